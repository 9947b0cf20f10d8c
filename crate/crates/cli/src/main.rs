//! `iwo` — exact Iwasawa decompositions of so(p,q) and orbit
//! verification on pseudo-Euclidean space R^{p,q}.
//!
//! Output is machine-readable JSON by default (one envelope per run,
//! schema shipped in `schema/envelope.schema.json`); `--pretty` switches
//! to a human-readable rendering. Exit codes: 0 success or all suites
//! pass, 1 verification failure, 2 usage or parse error.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use iwo_core::error::Error;
use iwo_core::exact::{parse_rational, Rational, Vector};
use iwo_core::flows::{self, uniform_grid};
use iwo_core::lie::{self, SubalgebraBasis, SubalgebraLabel};
use iwo_core::orbits::{self, GroupChoice, SamplePlan};
use iwo_core::space::Signature;
use iwo_core::verify::{self, SuiteId};

mod output;

const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Parser)]
#[command(
    name = "iwo",
    version,
    about = "Iwasawa decompositions of so(p,q) and exact orbit verification on R^{p,q}",
    after_help = "Configuration precedence: flags > environment (IWO_SEED, IWO_SAMPLES) > defaults.\n\
                  Exact-path commands take points as comma-separated rationals (e.g. 1/2,-3,0);\n\
                  flow points are floats. Exit codes: 0 ok/pass, 1 verification failure, 2 usage."
)]
struct Cli {
    /// Human-readable output instead of JSON
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions, restricted roots and (optionally) bases of the Iwasawa factors of so(p,q)
    Decompose {
        p: usize,
        q: usize,
        /// Include the full basis matrices of so, a, k0 and n
        #[arg(long)]
        bases: bool,
    },
    /// Orbit report for one rational point: stratum, predicted and oracle dimensions, descriptor
    Orbit {
        p: usize,
        q: usize,
        /// Acting group: N, A, K0, AN, K0AN, KprimeAN, SO
        #[arg(long)]
        group: String,
        /// Comma-separated exact rationals, e.g. 0,1/2,-3
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// k' for KprimeAN: full | trivial | indices:0,2 | line:1,-1/2,3
        #[arg(long)]
        kprime: Option<String>,
    },
    /// Run verification suites (exit 1 when a non-report-only suite fails)
    Verify {
        p: usize,
        q: usize,
        /// Suite id (structure, roots, n-equivalence, N-cohomogeneity, predictors,
        /// fixed-direction, adapted-basis, orbit-equivalence, A-orbit-count, flows, all)
        #[arg(long, default_value = "all")]
        suite: String,
        /// Sample seed (default: IWO_SEED or 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Random points per stratum (default: IWO_SAMPLES or 50)
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Sample an orbit curve under a one-parameter subgroup
    Flow {
        p: usize,
        q: usize,
        /// Generator: n:IDX | a:c1,c2,... | k0:IDX | so:IDX
        #[arg(long = "gen")]
        generator: String,
        /// Comma-separated floats for the starting point
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Parameter grid min:max:steps
        #[arg(long, default_value = "-3:3:61", allow_hyphen_values = true)]
        t: String,
        /// Output format: json | csv
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Dump the stratified sample plan
    Sample {
        p: usize,
        q: usize,
        /// Sample seed (default: IWO_SEED or 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Random points per stratum (default: IWO_SAMPLES or 50)
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Envelope {
    schema_version: &'static str,
    command: String,
    signature: Signature,
    payload: Value,
    timing_ms: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn env_u64(name: &str) -> Option<u64> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn env_usize(name: &str) -> Option<usize> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn resolve_plan(seed: Option<u64>, samples: Option<usize>) -> SamplePlan {
    SamplePlan {
        seed: seed.or_else(|| env_u64("IWO_SEED")).unwrap_or(0),
        per_stratum: samples.or_else(|| env_usize("IWO_SAMPLES")).unwrap_or(50),
        ..SamplePlan::default()
    }
}

fn parse_point(s: &str, dim: usize) -> Result<Vector, Error> {
    let entries: Vec<Rational> = s.split(',').map(parse_rational).collect::<Result<_, _>>()?;
    if entries.len() != dim {
        return Err(Error::Parse(format!(
            "point has {} coordinates but the space has dimension {dim}",
            entries.len()
        )));
    }
    Ok(Vector::new(entries))
}

fn parse_float_point(s: &str, dim: usize) -> Result<Vec<f64>, Error> {
    let entries: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("'{t}' is not a number")))
        })
        .collect::<Result<_, _>>()?;
    if entries.len() != dim {
        return Err(Error::Parse(format!(
            "point has {} coordinates but the space has dimension {dim}",
            entries.len()
        )));
    }
    Ok(entries)
}

/// Rational or decimal coefficient ("1/2", "3", "0.25").
fn parse_coefficient(s: &str) -> Result<Rational, Error> {
    if let Ok(r) = parse_rational(s) {
        return Ok(r);
    }
    let f: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("'{s}' is neither a rational nor a number")))?;
    Rational::from_float(f).ok_or_else(|| Error::Parse(format!("'{s}' is not finite")))
}

fn parse_kprime(spec: &str, sig: Signature) -> Result<SubalgebraBasis, Error> {
    let k0 = lie::build_k0(sig);
    match spec {
        "full" => Ok(k0),
        "trivial" => Ok(lie::trivial_kprime(sig)),
        _ => {
            if let Some(rest) = spec.strip_prefix("indices:") {
                let mut elements = Vec::new();
                for part in rest.split(',') {
                    let idx: usize = part
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("'{part}' is not a k0 basis index")))?;
                    let e = k0.elements().get(idx).ok_or_else(|| {
                        Error::Parse(format!(
                            "k0 for signature {sig} has {} basis elements, index {idx} is out of range",
                            k0.dim()
                        ))
                    })?;
                    elements.push(e.clone());
                }
                SubalgebraBasis::try_new(sig, SubalgebraLabel::K0, elements)
                    .map_err(|e| Error::Parse(format!("invalid k' selection: {e}")))
            } else if let Some(rest) = spec.strip_prefix("line:") {
                let coeffs: Vec<Rational> = rest
                    .split(',')
                    .map(parse_coefficient)
                    .collect::<Result<_, _>>()?;
                if coeffs.len() != k0.dim() {
                    return Err(Error::Parse(format!(
                        "line spec needs {} coefficients for signature {sig}",
                        k0.dim()
                    )));
                }
                let element = k0.combination(&coeffs);
                if element.is_zero() {
                    return Ok(lie::trivial_kprime(sig));
                }
                SubalgebraBasis::try_new(sig, SubalgebraLabel::K0, vec![element])
                    .map_err(|e| Error::Parse(format!("invalid k' line: {e}")))
            } else {
                Err(Error::Parse(format!(
                    "unknown k' spec '{spec}' (expected full, trivial, indices:..., line:...)"
                )))
            }
        }
    }
}

fn parse_group(name: &str, sig: Signature, kprime: Option<&str>) -> Result<GroupChoice, Error> {
    match name.to_ascii_uppercase().as_str() {
        "N" => Ok(GroupChoice::N),
        "A" => Ok(GroupChoice::A),
        "K0" => Ok(GroupChoice::K0),
        "AN" => Ok(GroupChoice::An),
        "K0AN" => Ok(GroupChoice::K0An),
        "SO" => Ok(GroupChoice::So),
        "KPRIMEAN" | "K'AN" | "KPRIME_AN" => {
            let spec = kprime.unwrap_or("full");
            Ok(GroupChoice::KPrimeAn(parse_kprime(spec, sig)?))
        }
        _ => Err(Error::Parse(format!(
            "unknown group '{name}' (expected N, A, K0, AN, K0AN, KprimeAN, SO)"
        ))),
    }
}

/// Generator spec: `a:c1,...,cq` builds the a-element with those
/// parameters; `n:IDX`, `k0:IDX`, `so:IDX` select basis elements.
fn parse_generator(spec: &str, sig: Signature) -> Result<lie::LieElement, Error> {
    let (family, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("generator '{spec}' must look like a:1 or n:0")))?;
    match family {
        "a" => {
            let coeffs: Vec<Rational> = rest
                .split(',')
                .map(parse_coefficient)
                .collect::<Result<_, _>>()?;
            if coeffs.len() != sig.q() {
                return Err(Error::Parse(format!(
                    "a-generator needs {} parameters for signature {sig}",
                    sig.q()
                )));
            }
            Ok(lie::a_element(sig, &coeffs))
        }
        "n" | "k0" | "so" => {
            let basis = match family {
                "n" => lie::build_n(sig),
                "k0" => lie::build_k0(sig),
                _ => lie::so_basis(sig),
            };
            let idx: usize = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("'{rest}' is not a basis index")))?;
            basis
                .elements()
                .get(idx)
                .cloned()
                .ok_or_else(|| {
                    Error::Parse(format!(
                        "{family} for signature {sig} has {} basis elements, index {idx} is out of range",
                        basis.dim()
                    ))
                })
        }
        _ => Err(Error::Parse(format!(
            "unknown generator family '{family}' (expected a, n, k0, so)"
        ))),
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "grid '{spec}' must look like min:max:steps"
        )));
    }
    let t_min: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Parse(format!("'{}' is not a number", parts[0])))?;
    let t_max: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Parse(format!("'{}' is not a number", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| Error::Parse(format!("'{}' is not a step count", parts[2])))?;
    if steps == 0 {
        return Err(Error::Parse("grid needs at least one step".into()));
    }
    Ok(uniform_grid(t_min, t_max, steps))
}

fn emit(envelope: &Envelope, pretty: bool) {
    if pretty {
        output::pretty_print(
            envelope.command.as_str(),
            envelope.signature,
            &envelope.payload,
        );
    } else {
        output::print_out(&serde_json::to_string(envelope).unwrap());
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let started = Instant::now();
    match &cli.command {
        Command::Decompose { p, q, bases } => {
            let sig = Signature::new(*p, *q)?;
            let payload = decompose_payload(sig, *bases);
            finish(
                "decompose",
                sig,
                payload,
                started,
                cli.pretty,
                ExitCode::SUCCESS,
            )
        }
        Command::Orbit {
            p,
            q,
            group,
            point,
            kprime,
        } => {
            let sig = Signature::new(*p, *q)?;
            let group = parse_group(group, sig, kprime.as_deref())?;
            let x = parse_point(point, sig.dim())?;
            let report = orbits::orbit_report(sig, &group, &x)?;
            let payload = serde_json::to_value(&report).unwrap();
            finish(
                "orbit",
                sig,
                payload,
                started,
                cli.pretty,
                ExitCode::SUCCESS,
            )
        }
        Command::Verify {
            p,
            q,
            suite,
            seed,
            samples,
        } => {
            let sig = Signature::new(*p, *q)?;
            let suite: SuiteId = suite.parse()?;
            let plan = resolve_plan(*seed, *samples);
            let results = match suite {
                SuiteId::All => verify::run_all(sig, &plan),
                single => vec![verify::run_suite(single, sig, &plan)],
            };
            let all_passed = results.iter().all(|r| r.passed());
            let payload = json!({
                "plan": plan,
                "suites": results,
                "allPassed": all_passed,
            });
            let code = if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            finish("verify", sig, payload, started, cli.pretty, code)
        }
        Command::Flow {
            p,
            q,
            generator,
            point,
            t,
            format,
        } => {
            let sig = Signature::new(*p, *q)?;
            let element = parse_generator(generator, sig)?;
            let floats = parse_float_point(point, sig.dim())?;
            let grid = parse_grid(t)?;
            // the flow path is numeric; carry the float point through an
            // exact lift of its binary expansion
            let lifted = Vector::new(
                floats
                    .iter()
                    .map(|&f| {
                        Rational::from_float(f)
                            .ok_or_else(|| Error::Parse(format!("'{f}' is not finite")))
                    })
                    .collect::<Result<_, _>>()?,
            );
            let samples = flows::flow_curve(&element, &lifted, &grid)?;
            match format.as_str() {
                "csv" => {
                    let mut text = String::from("t");
                    for i in 1..=sig.dim() {
                        text.push_str(&format!(",x{i}"));
                    }
                    text.push_str(",residual");
                    for s in &samples {
                        let coords: Vec<String> = s.point.iter().map(|v| format!("{v}")).collect();
                        text.push_str(&format!(
                            "\n{},{},{}",
                            s.t,
                            coords.join(","),
                            s.norm_residual
                        ));
                    }
                    output::print_out(&text);
                    Ok(ExitCode::SUCCESS)
                }
                "json" => {
                    let payload = json!({
                        "generator": generator,
                        "grid": {"min": grid[0], "max": grid[grid.len()-1], "steps": grid.len()},
                        "samples": samples,
                    });
                    finish("flow", sig, payload, started, cli.pretty, ExitCode::SUCCESS)
                }
                other => Err(Error::Parse(format!(
                    "unknown format '{other}' (expected json or csv)"
                ))),
            }
        }
        Command::Sample {
            p,
            q,
            seed,
            samples,
        } => {
            let sig = Signature::new(*p, *q)?;
            let plan = resolve_plan(*seed, *samples);
            let sample = orbits::sample_points(sig, &plan);
            let payload = serde_json::to_value(&sample).unwrap();
            finish(
                "sample",
                sig,
                payload,
                started,
                cli.pretty,
                ExitCode::SUCCESS,
            )
        }
    }
}

fn finish(
    command: &str,
    sig: Signature,
    payload: Value,
    started: Instant,
    pretty: bool,
    code: ExitCode,
) -> Result<ExitCode, Error> {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        signature: sig,
        payload,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    emit(&envelope, pretty);
    Ok(code)
}

fn decompose_payload(sig: Signature, include_bases: bool) -> Value {
    let so = lie::so_basis(sig);
    let (k, p_part) = lie::cartan_decompose(sig);
    let a = lie::build_a(sig);
    let k0 = lie::build_k0(sig);
    let n = lie::build_n(sig);
    let roots: Vec<Value> = lie::restricted_roots(sig)
        .iter()
        .map(|r| {
            json!({
                "root": r.root.to_string(),
                "multiplicity": r.multiplicity,
                "positive": r.root.is_positive(),
            })
        })
        .collect();
    let mut payload = json!({
        "dims": {
            "so": so.dim(),
            "k": k.dim(),
            "p": p_part.dim(),
            "a": a.dim(),
            "k0": k0.dim(),
            "n": n.dim(),
        },
        "roots": roots,
    });
    if include_bases {
        let matrices = |b: &SubalgebraBasis| -> Value {
            serde_json::to_value(b.elements().iter().map(|e| e.matrix()).collect::<Vec<_>>())
                .unwrap()
        };
        payload["bases"] = json!({
            "so": matrices(&so),
            "a": matrices(&a),
            "k0": matrices(&k0),
            "n": matrices(&n),
        });
    }
    payload
}
