//! Human-readable rendering behind `--pretty`. The JSON envelope is the
//! primary interface; these tables are a convenience view of the same
//! payloads.

use iwo_core::space::Signature;
use serde_json::Value;
use std::fmt::Write as _;

/// Writes a block of text to stdout, treating a closed pipe (e.g. the
/// consumer ran `head`) as a quiet stop rather than an error.
pub fn print_out(text: &str) {
    use std::io::{ErrorKind, Write};
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{text}") {
        if e.kind() == ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(2);
    }
}

pub fn pretty_print(command: &str, sig: Signature, payload: &Value) {
    let mut text = format!("iwo {command} for signature {sig}\n");
    match command {
        "decompose" => pretty_decompose(&mut text, payload),
        "orbit" => pretty_orbit(&mut text, payload),
        "verify" => pretty_verify(&mut text, payload),
        "flow" => pretty_flow(&mut text, payload),
        "sample" => pretty_sample(&mut text, payload),
        _ => {
            let _ = write!(text, "{payload:#}");
        }
    }
    print_out(text.trim_end_matches('\n'));
}

fn pretty_decompose(out: &mut String, payload: &Value) {
    if let Some(dims) = payload["dims"].as_object() {
        let line: Vec<String> = ["so", "k", "p", "a", "k0", "n"]
            .iter()
            .filter_map(|key| dims.get(*key).map(|v| format!("dim {key} = {v}")))
            .collect();
        let _ = writeln!(out, "  {}", line.join(", "));
    }
    if let Some(roots) = payload["roots"].as_array() {
        let _ = writeln!(out, "  restricted roots:");
        for r in roots {
            let positive = if r["positive"].as_bool().unwrap_or(false) {
                "+"
            } else {
                " "
            };
            let _ = writeln!(
                out,
                "   {positive} {:8} multiplicity {}",
                r["root"].as_str().unwrap_or("?"),
                r["multiplicity"]
            );
        }
    }
    if payload.get("bases").is_some() {
        let _ = writeln!(out, "  (basis matrices included in the JSON payload)");
    }
}

fn pretty_orbit(out: &mut String, payload: &Value) {
    let _ = writeln!(
        out,
        "  group     : {}",
        payload["group"].as_str().unwrap_or("?")
    );
    let _ = writeln!(out, "  point     : {}", join_strings(&payload["point"]));
    let stratum = &payload["stratum"];
    let case = if !stratum["kIndex"].is_null() {
        format!("a (k = {})", stratum["kIndex"])
    } else if !stratum["lIndex"].is_null() {
        format!("c (l = {})", stratum["lIndex"])
    } else {
        "b".to_string()
    };
    let _ = writeln!(
        out,
        "  stratum   : case {case}, sign {}, r^2 = {}",
        stratum["signLabel"].as_str().unwrap_or("-"),
        stratum["radiusSquared"].as_str().unwrap_or("?")
    );
    let predicted = if payload["predictedDim"].is_null() {
        "(oracle only)".to_string()
    } else {
        payload["predictedDim"].to_string()
    };
    let _ = writeln!(
        out,
        "  dimension : predicted {predicted}, oracle {}, agrees: {}",
        payload["oracleDim"], payload["agrees"]
    );
    if let Some(d) = payload.get("descriptor").filter(|d| !d.is_null()) {
        let _ = writeln!(
            out,
            "  orbit     : {} on {}(r^2 = {}), dim {}",
            d["form"]["kind"].as_str().unwrap_or("?"),
            family_name(&d["family"]),
            d["radiusSquared"].as_str().unwrap_or("?"),
            d["dim"]
        );
    }
}

fn family_name(v: &Value) -> &str {
    match v.as_str() {
        Some("S") => "the pseudo-sphere S",
        Some("H") => "the pseudo-hyperbolic space H",
        Some("Lambda") => "the null cone",
        _ => "?",
    }
}

fn pretty_verify(out: &mut String, payload: &Value) {
    if let Some(suites) = payload["suites"].as_array() {
        for s in suites {
            let status = s["status"].as_str().unwrap_or("?");
            let marker = match status {
                "pass" => "PASS",
                "report-only" => "INFO",
                _ => "FAIL",
            };
            let _ = writeln!(
                out,
                "  [{marker}] {:18} {} checks, {} failures",
                s["suite"].as_str().unwrap_or("?"),
                s["checksRun"],
                s["failures"].as_array().map_or(0, |f| f.len())
            );
            if let Some(first) = s["failures"].as_array().and_then(|f| f.first()) {
                let _ = writeln!(
                    out,
                    "         first failure: {} expected {} got {}",
                    first["witness"].as_str().unwrap_or("?"),
                    first["expected"].as_str().unwrap_or("?"),
                    first["actual"].as_str().unwrap_or("?")
                );
            }
        }
    }
    let _ = writeln!(out, "  all passed: {}", payload["allPassed"]);
}

fn pretty_flow(out: &mut String, payload: &Value) {
    let _ = writeln!(
        out,
        "  generator: {}",
        payload["generator"].as_str().unwrap_or("?")
    );
    if let Some(samples) = payload["samples"].as_array() {
        let _ = writeln!(out, "  {:>10}  {:>12}  point", "t", "residual");
        for s in samples {
            let coords: Vec<String> = s["point"]
                .as_array()
                .map(|a| {
                    a.iter()
                        .map(|v| format!("{:.6}", v.as_f64().unwrap_or(f64::NAN)))
                        .collect()
                })
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  {:>10.4}  {:>12.3e}  ({})",
                s["t"].as_f64().unwrap_or(f64::NAN),
                s["normResidual"].as_f64().unwrap_or(f64::NAN),
                coords.join(", ")
            );
        }
    }
}

fn pretty_sample(out: &mut String, payload: &Value) {
    if let Some(points) = payload["points"].as_array() {
        let _ = writeln!(
            out,
            "  {} points ({} skipped strata)",
            points.len(),
            payload["skipped"].as_array().map_or(0, |s| s.len())
        );
        for pt in points {
            let det = if pt["deterministic"].as_bool().unwrap_or(false) {
                "core"
            } else {
                "rand"
            };
            let _ = writeln!(
                out,
                "  [{det}] {:8} ({})",
                pt["stratumTag"].as_str().unwrap_or("?"),
                join_strings(&pt["point"])
            );
        }
    }
    if let Some(skipped) = payload["skipped"].as_array() {
        for s in skipped {
            let _ = writeln!(out, "  note: {}", s.as_str().unwrap_or("?"));
        }
    }
}

fn join_strings(v: &Value) -> String {
    v.as_array()
        .map(|a| {
            a.iter()
                .map(|e| e.as_str().unwrap_or("?").to_string())
                .collect::<Vec<_>>()
                .join(", ")
        })
        .unwrap_or_else(|| "?".to_string())
}
