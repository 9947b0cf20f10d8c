//! Orbit tangent spaces, exact orbit dimensions, closed-form dimension
//! predictors, stratum-level orbit descriptors, fixed directions,
//! cohomogeneity estimation, and the orbit-equivalence comparison off the
//! degenerate subspace W^p.
//!
//! For a linear action the orbit dimension at x is
//! `dim G(x) = dim g - dim g_x = rank of the matrix with columns X_i x`,
//! where `X_i` runs over a basis of the Lie algebra. That rank, computed
//! exactly, is the oracle against which the stratum predictors are
//! verified:
//!
//! | group | case (a), index k | case (b) | case (c), index l |
//! |-------|-------------------|----------|--------------------|
//! | N     | p+q-k-1           | q        | l-1                |
//! | AN    | p+q-k             | q        | l                  |
//! | K0AN  | p+q-k             | p-1      | l                  |
//! | K'AN  | p+q-k             | q + dim K'(y) | l             |
//! | SO    | p+q-1 everywhere  |          |                    |
//!
//! A and K0 alone have no closed form here and are served by the oracle
//! only. Orbit identity is decided at the tangent level plus exact stratum
//! invariants; the global statements (connected components, rays) are
//! mirrored by the descriptor structure, not re-proved.

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact::{self, rat_int, Matrix, Rational, Vector};
use crate::lie::{self, SubalgebraBasis, SubalgebraLabel};
use crate::space::{self, HyperquadricFamily, Sign, Signature, StratumCase, StratumDescriptor};

/// One of the acting groups. K'AN carries the chosen basis of k'.
#[derive(Clone, Debug)]
pub enum GroupChoice {
    N,
    A,
    K0,
    An,
    K0An,
    So,
    KPrimeAn(SubalgebraBasis),
}

impl GroupChoice {
    pub fn name(&self) -> &'static str {
        match self {
            GroupChoice::N => "N",
            GroupChoice::A => "A",
            GroupChoice::K0 => "K0",
            GroupChoice::An => "AN",
            GroupChoice::K0An => "K0AN",
            GroupChoice::So => "SO",
            GroupChoice::KPrimeAn(_) => "KprimeAN",
        }
    }

    /// The Lie algebra of the group.
    pub fn subalgebra(&self, sig: Signature) -> Result<SubalgebraBasis> {
        match self {
            GroupChoice::N => lie::group_subalgebra(sig, SubalgebraLabel::N, None),
            GroupChoice::A => lie::group_subalgebra(sig, SubalgebraLabel::A, None),
            GroupChoice::K0 => lie::group_subalgebra(sig, SubalgebraLabel::K0, None),
            GroupChoice::An => lie::group_subalgebra(sig, SubalgebraLabel::An, None),
            GroupChoice::K0An => lie::group_subalgebra(sig, SubalgebraLabel::K0An, None),
            GroupChoice::So => lie::group_subalgebra(sig, SubalgebraLabel::So, None),
            GroupChoice::KPrimeAn(kp) => {
                lie::group_subalgebra(sig, SubalgebraLabel::KPrimeAn, Some(kp))
            }
        }
    }

    fn has_descriptor(&self) -> bool {
        matches!(
            self,
            GroupChoice::N | GroupChoice::An | GroupChoice::K0An | GroupChoice::KPrimeAn(_)
        )
    }
}

impl fmt::Display for GroupChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Stacks the images `X_i x` as the rows of a matrix.
fn image_matrix(basis: &SubalgebraBasis, x: &Vector) -> Result<Matrix> {
    let mut rows = Vec::with_capacity(basis.dim());
    for e in basis.elements() {
        rows.push(e.apply(x)?.entries().to_vec());
    }
    if rows.is_empty() {
        return Ok(Matrix::zero(0, x.dim()));
    }
    Ok(Matrix::from_rows(rows))
}

/// Canonical basis of the tangent space `span{X_i x}` at x.
pub fn tangent_space(basis: &SubalgebraBasis, x: &Vector) -> Result<Vec<Vector>> {
    let m = image_matrix(basis, x)?;
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    Ok(exact::row_space_basis(&m))
}

/// Exact orbit dimension at x: the rank of the stacked image matrix.
pub fn orbit_dim_oracle(basis: &SubalgebraBasis, x: &Vector) -> Result<usize> {
    Ok(exact::rank(&image_matrix(basis, x)?))
}

/// The component of x along the sphere factor `R e_1 + ... + R e_{p-q}`,
/// embedded back into R^{p+q}.
fn sphere_part(x: &Vector, sig: Signature) -> Vector {
    let mut y = Vector::zero(sig.dim());
    for j in 0..sig.p() - sig.q() {
        y.set(j, x.get(j).clone());
    }
    y
}

/// Closed-form orbit dimension from the stratum of x. Only N, AN, K0AN,
/// K'AN and SO carry predictors; A and K0 are oracle-only.
pub fn predict_dim(sig: Signature, group: &GroupChoice, x: &Vector) -> Result<usize> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let strat = space::stratum(x, sig)?;
    let (p, q) = (sig.p(), sig.q());
    let case = strat.case();
    match group {
        GroupChoice::N => Ok(match case {
            StratumCase::A(k) => p + q - k - 1,
            StratumCase::B => q,
            StratumCase::C(l) => l - 1,
        }),
        GroupChoice::An => Ok(match case {
            StratumCase::A(k) => p + q - k,
            StratumCase::B => q,
            StratumCase::C(l) => l,
        }),
        GroupChoice::K0An => Ok(match case {
            StratumCase::A(k) => p + q - k,
            StratumCase::B => p - 1,
            StratumCase::C(l) => l,
        }),
        GroupChoice::KPrimeAn(kprime) => Ok(match case {
            StratumCase::A(k) => p + q - k,
            StratumCase::B => q + orbit_dim_oracle(kprime, &sphere_part(x, sig))?,
            StratumCase::C(l) => l,
        }),
        GroupChoice::So => Ok(p + q - 1),
        GroupChoice::A | GroupChoice::K0 => Err(Error::UnsupportedPredictor(group.name().into())),
    }
}

/// Basis of the simultaneous kernel of all basis elements — the directions
/// fixed pointwise by the group. An empty basis fixes everything.
pub fn fixed_directions(basis: &SubalgebraBasis) -> Vec<Vector> {
    let dim = basis.sig().dim();
    if basis.is_empty() {
        return (0..dim).map(|i| Vector::unit(dim, i)).collect();
    }
    let mut rows = Vec::with_capacity(basis.dim() * dim);
    for e in basis.elements() {
        for r in 0..dim {
            rows.push(
                (0..dim)
                    .map(|c| e.matrix().get(r, c).clone())
                    .collect::<Vec<_>>(),
            );
        }
    }
    exact::nullspace(&Matrix::from_rows(rows))
}

/// Structured orbit identity data at a point.
///
/// Two points receive equal descriptors exactly when the stratum
/// classification places them in the same orbit: the causal family and
/// exact radius, the stratum indices, the component sign, and — where the
/// group lacks the scaling or rotating factor that would sweep it out —
/// the exact residual invariant (the leading w-coefficient for N in case
/// (c), the pairing `<x, w_k>` for N in case (a), the sphere fiber y for
/// N and AN in case (b)). For K'AN in case (b) the descriptor carries the
/// k'-orbit dimension at y, a necessary condition only.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OrbitDescriptor {
    pub group: String,
    pub family: HyperquadricFamily,
    #[serde(serialize_with = "crate::serialize_rational")]
    pub radius_squared: Rational,
    /// Time orientation, set only when q = 1 on timelike/lightlike points.
    pub time_sign: Option<Sign>,
    pub dim: usize,
    pub form: OrbitForm,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    rename_all_fields = "camelCase"
)]
pub enum OrbitForm {
    /// Case (c): `span{w_1..w_{l-1}} + R_sign w_l` (a ray for groups
    /// containing A, the affine flat at the exact coefficient for N).
    FlagAffine {
        l: usize,
        /// Sign of the w_l coefficient `r_l = x^{p-l+1}`.
        ray_sign: Sign,
        #[serde(serialize_with = "crate::serialize_opt_rational")]
        leading_coefficient: Option<Rational>,
    },
    /// Case (a): one of the two connected components of
    /// `(inter_{i<k} Pi_i \ Pi_k) ∩ quadric`.
    ComponentOfIntersection {
        k: usize,
        /// Sign of `x^{p-k+1} + x^{p+k}`.
        sign: Sign,
        /// Exact invariant `<x, w_k>`, carried for N only.
        #[serde(serialize_with = "crate::serialize_opt_rational")]
        pairing: Option<Rational>,
    },
    /// Case (b): product of an orbit in the sphere factor `S^{p-q-1}(r)`
    /// with `span{w_1..w_q}` inside the cylinder.
    CylinderProduct {
        /// Exact sphere fiber y, carried for N and AN (orbit = y + span w).
        sphere_fiber: Option<Vector>,
        /// Sign of x^1 when p = q+1 (the sphere factor is two points).
        sign: Option<Sign>,
        /// dim K'(y) for K'AN; a necessary condition, not a complete key.
        kprime_orbit_dim: Option<usize>,
    },
}

/// Orbit descriptor of x for one of N, AN, K0AN, K'AN.
pub fn stratum_orbit_descriptor(
    sig: Signature,
    group: &GroupChoice,
    x: &Vector,
) -> Result<OrbitDescriptor> {
    if !group.has_descriptor() {
        return Err(Error::UnsupportedDescriptor(group.name().into()));
    }
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let strat = space::stratum(x, sig)?;
    let (family, radius_squared) = space::hyperquadric_radius(x, sig)?;
    let causal = space::causal_classify(x, sig)?;
    let dim = predict_dim(sig, group, x)?;
    let p = sig.p();
    let form = match strat.case() {
        StratumCase::A(k) => OrbitForm::ComponentOfIntersection {
            k,
            sign: strat.sign_label.expect("case (a) always carries a sign"),
            pairing: match group {
                GroupChoice::N => Some(x.get(p - k) + x.get(p + k - 1)),
                _ => None,
            },
        },
        StratumCase::C(l) => {
            let r_l = x.get(p - l).clone();
            OrbitForm::FlagAffine {
                l,
                ray_sign: Sign::of(&r_l).expect("case (c) leading coefficient is nonzero"),
                leading_coefficient: match group {
                    GroupChoice::N => Some(r_l),
                    _ => None,
                },
            }
        }
        StratumCase::B => {
            let y = sphere_part(x, sig);
            OrbitForm::CylinderProduct {
                sphere_fiber: match group {
                    GroupChoice::N | GroupChoice::An => Some(y.clone()),
                    _ => None,
                },
                sign: strat.sign_label,
                kprime_orbit_dim: match group {
                    GroupChoice::KPrimeAn(kp) => Some(orbit_dim_oracle(kp, &y)?),
                    _ => None,
                },
            }
        }
    };
    Ok(OrbitDescriptor {
        group: group.name().into(),
        family,
        radius_squared,
        time_sign: causal.time_sign,
        dim,
        form,
    })
}

/// Orbit-equivalence of AN and K'AN at a point off the degenerate
/// subspace: true when the two tangent spaces coincide as subspaces.
/// Points inside W^p are rejected — there the equality is expected to
/// fail for p > q+1 and nontrivial k', which callers test directly.
pub fn tangent_equal_off_w(sig: Signature, x: &Vector, kprime: &SubalgebraBasis) -> Result<bool> {
    let strat = space::stratum(x, sig)?;
    if strat.k_index.is_none() {
        return Err(Error::PointInDegenerateSubspace);
    }
    let an = lie::group_subalgebra(sig, SubalgebraLabel::An, None)?;
    let kan = lie::group_subalgebra(sig, SubalgebraLabel::KPrimeAn, Some(kprime))?;
    let t_an = image_matrix(&an, x)?;
    let t_kan = image_matrix(&kan, x)?;
    let d_an = exact::rank(&t_an);
    let d_kan = exact::rank(&t_kan);
    if d_an != d_kan {
        return Ok(false);
    }
    // AN is contained in K'AN, so equal dimensions force equal spans;
    // check the containment anyway via the stacked rank.
    let mut rows = Vec::new();
    for r in 0..t_an.rows() {
        rows.push(t_an.row(r).entries().to_vec());
    }
    for r in 0..t_kan.rows() {
        rows.push(t_kan.row(r).entries().to_vec());
    }
    Ok(exact::rank(&Matrix::from_rows(rows)) == d_an)
}

// -- sampling ----------------------------------------------------------------

/// Deterministic sampling plan: the stratified representative set plus
/// `per_stratum` seeded pseudo-random points per stratum, with all
/// numerators and denominators bounded by `coordinate_range`.
#[derive(Copy, Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplePlan {
    pub seed: u64,
    pub per_stratum: usize,
    pub coordinate_range: i64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            seed: 0,
            per_stratum: 50,
            coordinate_range: 10,
        }
    }
}

impl SamplePlan {
    pub fn with_seed(seed: u64) -> Self {
        SamplePlan {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SampledPoint {
    pub point: Vector,
    /// Stratum the point was constructed for, e.g. `a(k=2)` or `c(l=1)`.
    pub stratum_tag: String,
    /// True for the hand-picked representatives, false for seeded draws.
    pub deterministic: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleSet {
    #[serde(rename = "signature")]
    pub sig: Signature,
    pub plan: SamplePlan,
    pub points: Vec<SampledPoint>,
    /// Strata that do not exist for this signature (case (b) when p = q).
    pub skipped: Vec<String>,
}

impl SampleSet {
    pub fn vectors(&self) -> impl Iterator<Item = &Vector> {
        self.points.iter().map(|s| &s.point)
    }
}

fn random_rational(rng: &mut ChaCha8Rng, range: i64) -> Rational {
    let numer = rng.gen_range(-range..=range);
    let denom = rng.gen_range(1..=range);
    Rational::new(numer.into(), denom.into())
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, range: i64) -> Vector {
    Vector::new((0..dim).map(|_| random_rational(rng, range)).collect())
}

/// Stratified deterministic-plus-random point sample.
///
/// The deterministic core hits every stratum: for each k a spacelike, a
/// timelike-boundary (`x^{p-k+1} = 0`), a lightlike and a sign-flipped
/// representative; the sphere-factor points for case (b); the flag points
/// `w_1 + ... + w_l` and their sign flips for case (c). Random points are
/// projected onto their stratum and re-drawn if degenerate; every second
/// case (a) draw zeroes `x^{p-k+1}` to exercise the pivot-switch boundary.
/// Every emitted point is re-verified against its claimed stratum.
pub fn sample_points(sig: Signature, plan: &SamplePlan) -> SampleSet {
    let (p, q) = (sig.p(), sig.q());
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut points: Vec<SampledPoint> = Vec::new();
    let mut skipped = Vec::new();
    let push = |v: Vector, tag: String, det: bool, points: &mut Vec<SampledPoint>| {
        let strat = space::stratum(&v, sig).expect("sampled points are nonzero");
        let case_tag = strat.case().to_string();
        debug_assert!(
            tag.starts_with(&case_tag),
            "point {v} built for {tag} landed in {case_tag}"
        );
        points.push(SampledPoint {
            point: v,
            stratum_tag: tag,
            deterministic: det,
        });
    };

    // deterministic representatives
    for k in 1..=q {
        let tag = StratumCase::A(k).to_string();
        push(sig.basis_vector(p - k + 1), tag.clone(), true, &mut points);
        push(
            sig.basis_vector(p - k + 1).scale(&rat_int(-1)),
            tag.clone(),
            true,
            &mut points,
        );
        // pivot-switch boundary: x^{p-k+1} = 0, x^{p+k} != 0
        push(sig.basis_vector(p + k), tag.clone(), true, &mut points);
        // lightlike representative e_{p-k+1} + e_{p+k}
        push(
            sig.basis_vector(p - k + 1).add(&sig.basis_vector(p + k)),
            tag,
            true,
            &mut points,
        );
    }
    if p > q {
        let tag = StratumCase::B.to_string();
        push(sig.basis_vector(1), tag.clone(), true, &mut points);
        push(
            sig.basis_vector(1).scale(&rat_int(-1)),
            tag.clone(),
            true,
            &mut points,
        );
        let mut mixed = sig.basis_vector(1);
        for j in 1..=q {
            mixed = mixed.add(&sig.w_vector(j).scale(&rat_int(j as i64)));
        }
        push(mixed, tag, true, &mut points);
    } else {
        skipped.push("case b: stratum is empty when p = q".to_string());
    }
    for l in 1..=q {
        let tag = StratumCase::C(l).to_string();
        let mut flag = Vector::zero(sig.dim());
        for j in 1..=l {
            flag = flag.add(&sig.w_vector(j));
        }
        push(flag.clone(), tag.clone(), true, &mut points);
        let flipped = flag.sub(&sig.w_vector(l).scale(&rat_int(2)));
        push(flipped, tag, true, &mut points);
    }

    // seeded random points per stratum
    for k in 1..=q {
        let tag = StratumCase::A(k).to_string();
        for idx in 0..plan.per_stratum {
            let v = loop {
                let mut v = random_vector(&mut rng, sig.dim(), plan.coordinate_range);
                for i in 1..k {
                    let forced = -v.get(p + i - 1).clone();
                    v.set(p - i, forced);
                }
                if idx % 2 == 1 {
                    // boundary subcase
                    v.set(p - k, Rational::from_integer(0.into()));
                    if v.get(p + k - 1).is_zero() {
                        v.set(p + k - 1, rat_int(1));
                    }
                }
                if !(v.get(p - k) + v.get(p + k - 1)).is_zero() {
                    break v;
                }
            };
            push(v, tag.clone(), false, &mut points);
        }
    }
    if p > q {
        let tag = StratumCase::B.to_string();
        for _ in 0..plan.per_stratum {
            let mut v = random_vector(&mut rng, sig.dim(), plan.coordinate_range);
            for i in 1..=q {
                let forced = -v.get(p + i - 1).clone();
                v.set(p - i, forced);
            }
            if (0..p - q).all(|j| v.get(j).is_zero()) {
                v.set(0, rat_int(1));
            }
            push(v, tag.clone(), false, &mut points);
        }
    }
    for l in 1..=q {
        let tag = StratumCase::C(l).to_string();
        for _ in 0..plan.per_stratum {
            let mut v = Vector::zero(sig.dim());
            for j in 1..=l {
                let mut r = random_rational(&mut rng, plan.coordinate_range);
                if j == l && r.is_zero() {
                    r = rat_int(1);
                }
                v.set(p - j, r.clone());
                v.set(p + j - 1, -r);
            }
            push(v, tag.clone(), false, &mut points);
        }
    }

    SampleSet {
        sig,
        plan: *plan,
        points,
        skipped,
    }
}

/// `(p+q) - max dim G(x)` over the stratified sample: an upper-bound
/// estimate of the cohomogeneity that is exact whenever the sample meets
/// the largest stratum (the deterministic core guarantees it does).
pub fn cohomogeneity_estimate(
    sig: Signature,
    group: &GroupChoice,
    plan: &SamplePlan,
) -> Result<usize> {
    let basis = group.subalgebra(sig)?;
    let sample = sample_points(sig, plan);
    let mut max_dim = 0;
    for x in sample.vectors() {
        max_dim = max_dim.max(orbit_dim_oracle(&basis, x)?);
    }
    Ok(sig.dim() - max_dim)
}

// -- reports -----------------------------------------------------------------

/// Everything known about one orbit: stratum, predicted and oracle
/// dimensions, the tangent basis, and the descriptor where defined.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OrbitReport {
    pub signature: Signature,
    pub group: String,
    pub point: Vector,
    pub stratum: StratumDescriptor,
    pub predicted_dim: Option<usize>,
    pub oracle_dim: usize,
    pub tangent_basis: Vec<Vector>,
    pub agrees: bool,
    pub descriptor: Option<OrbitDescriptor>,
}

/// Assembles the full orbit report for a point.
pub fn orbit_report(sig: Signature, group: &GroupChoice, x: &Vector) -> Result<OrbitReport> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let basis = group.subalgebra(sig)?;
    let stratum = space::stratum(x, sig)?;
    let predicted_dim = match predict_dim(sig, group, x) {
        Ok(d) => Some(d),
        Err(Error::UnsupportedPredictor(_)) => None,
        Err(e) => return Err(e),
    };
    let tangent_basis = tangent_space(&basis, x)?;
    let oracle_dim = tangent_basis.len();
    debug_assert_eq!(oracle_dim, orbit_dim_oracle(&basis, x)?);
    let agrees = predicted_dim.is_none_or(|d| d == oracle_dim);
    let descriptor = if group.has_descriptor() {
        Some(stratum_orbit_descriptor(sig, group, x)?)
    } else {
        None
    };
    Ok(OrbitReport {
        signature: sig,
        group: group.name().into(),
        point: x.clone(),
        stratum,
        predicted_dim,
        oracle_dim,
        tangent_basis,
        agrees,
        descriptor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::lie::trivial_kprime;

    fn sig(p: usize, q: usize) -> Signature {
        Signature::new(p, q).unwrap()
    }

    #[test]
    fn tangent_space_examples() {
        // w_1 is fixed by N
        let s = sig(2, 1);
        let n = GroupChoice::N.subalgebra(s).unwrap();
        assert!(tangent_space(&n, &s.w_vector(1)).unwrap().is_empty());
        // k = 1 point: dim N(x) = p+q-2 = 3
        let s = sig(3, 2);
        let n = GroupChoice::N.subalgebra(s).unwrap();
        assert_eq!(tangent_space(&n, &s.basis_vector(3)).unwrap().len(), 3);
        // the origin is fixed by every linear action
        assert!(tangent_space(&n, &Vector::zero(5)).unwrap().is_empty());
    }

    #[test]
    fn oracle_dimension_examples() {
        let s = sig(3, 2);
        let n = GroupChoice::N.subalgebra(s).unwrap();
        let so = GroupChoice::So.subalgebra(s).unwrap();
        assert_eq!(orbit_dim_oracle(&n, &s.basis_vector(1)).unwrap(), 2);
        assert_eq!(orbit_dim_oracle(&so, &s.basis_vector(1)).unwrap(), 4);
        assert_eq!(orbit_dim_oracle(&n, &s.w_vector(2)).unwrap(), 1);
    }

    #[test]
    fn predictor_examples() {
        let s42 = sig(4, 2);
        assert_eq!(
            predict_dim(s42, &GroupChoice::K0An, &s42.basis_vector(4)).unwrap(),
            5
        );
        assert_eq!(
            predict_dim(s42, &GroupChoice::K0An, &s42.basis_vector(1)).unwrap(),
            3
        );
        assert_eq!(
            predict_dim(s42, &GroupChoice::An, &s42.basis_vector(1)).unwrap(),
            2
        );
        let s32 = sig(3, 2);
        let x = s32
            .w_vector(1)
            .scale(&rat_int(2))
            .add(&s32.w_vector(2).scale(&rat_int(3)));
        assert_eq!(predict_dim(s32, &GroupChoice::N, &x).unwrap(), 1);
        assert!(matches!(
            predict_dim(s32, &GroupChoice::A, &s32.basis_vector(1)),
            Err(Error::UnsupportedPredictor(_))
        ));
        assert!(matches!(
            predict_dim(s32, &GroupChoice::K0, &s32.basis_vector(1)),
            Err(Error::UnsupportedPredictor(_))
        ));
    }

    #[test]
    fn predictor_matches_oracle_on_spec_points() {
        for (p, q) in [(2, 1), (3, 2), (4, 2), (2, 2), (4, 3)] {
            let s = sig(p, q);
            let plan = SamplePlan {
                per_stratum: 5,
                ..Default::default()
            };
            let sample = sample_points(s, &plan);
            for g in [
                GroupChoice::N,
                GroupChoice::An,
                GroupChoice::K0An,
                GroupChoice::So,
            ] {
                let basis = g.subalgebra(s).unwrap();
                for x in sample.vectors() {
                    assert_eq!(
                        predict_dim(s, &g, x).unwrap(),
                        orbit_dim_oracle(&basis, x).unwrap(),
                        "group {} at {x} in {s}",
                        g.name()
                    );
                }
            }
        }
    }

    #[test]
    fn fixed_direction_examples() {
        let s = sig(3, 2);
        let n = GroupChoice::N.subalgebra(s).unwrap();
        let fixed = fixed_directions(&n);
        assert_eq!(fixed.len(), 1);
        // the fixed line is spanned by e_3 - e_4 = w_1
        let w1 = s.w_vector(1);
        let stacked = Matrix::from_rows(vec![fixed[0].entries().to_vec(), w1.entries().to_vec()]);
        assert_eq!(exact::rank(&stacked), 1);

        let s21 = sig(2, 1);
        let n21 = GroupChoice::N.subalgebra(s21).unwrap();
        let fixed = fixed_directions(&n21);
        assert_eq!(fixed.len(), 1);
        let stacked = Matrix::from_rows(vec![
            fixed[0].entries().to_vec(),
            s21.w_vector(1).entries().to_vec(),
        ]);
        assert_eq!(exact::rank(&stacked), 1);

        let so = GroupChoice::So.subalgebra(s).unwrap();
        assert!(fixed_directions(&so).is_empty());
    }

    #[test]
    fn descriptor_examples() {
        let s = sig(3, 2);
        // flag point 2w_1 + 3w_2: null cone, case (c), m = 2, positive ray
        let x = s
            .w_vector(1)
            .scale(&rat_int(2))
            .add(&s.w_vector(2).scale(&rat_int(3)));
        let d = stratum_orbit_descriptor(s, &GroupChoice::K0An, &x).unwrap();
        assert_eq!(d.family, HyperquadricFamily::NullCone);
        assert_eq!(d.dim, 2);
        assert_eq!(
            d.form,
            OrbitForm::FlagAffine {
                l: 2,
                ray_sign: Sign::Plus,
                leading_coefficient: None
            }
        );
        // e_5: pseudo-hyperbolic H(1), case (a) with k = 2, m = 3
        let d = stratum_orbit_descriptor(s, &GroupChoice::K0An, &s.basis_vector(5)).unwrap();
        assert_eq!(d.family, HyperquadricFamily::Hyperbolic);
        assert_eq!(d.radius_squared, rat_int(1));
        assert_eq!(d.dim, 3);
        assert_eq!(
            d.form,
            OrbitForm::ComponentOfIntersection {
                k: 2,
                sign: Sign::Plus,
                pairing: None
            }
        );
        // cylinder point e_1 + 5 w_1 in (4,2): S(1), case (b), m = p-1 = 3
        let s42 = sig(4, 2);
        let x = s42.basis_vector(1).add(&s42.w_vector(1).scale(&rat_int(5)));
        let d = stratum_orbit_descriptor(s42, &GroupChoice::K0An, &x).unwrap();
        assert_eq!(d.family, HyperquadricFamily::Sphere);
        assert_eq!(d.radius_squared, rat_int(1));
        assert_eq!(d.dim, 3);
        assert_eq!(
            d.form,
            OrbitForm::CylinderProduct {
                sphere_fiber: None,
                sign: None,
                kprime_orbit_dim: None
            }
        );
        // A has no descriptor
        assert!(stratum_orbit_descriptor(s, &GroupChoice::A, &s.basis_vector(1)).is_err());
    }

    #[test]
    fn descriptors_separate_n_orbits_but_not_an_orbits() {
        let s = sig(3, 2);
        // w_2 and 2w_2 lie on different N-orbits (different flat levels)
        // but on the same AN-orbit (the ray is swept by A)
        let x1 = s.w_vector(2);
        let x2 = s.w_vector(2).scale(&rat_int(2));
        let n1 = stratum_orbit_descriptor(s, &GroupChoice::N, &x1).unwrap();
        let n2 = stratum_orbit_descriptor(s, &GroupChoice::N, &x2).unwrap();
        assert_ne!(n1, n2);
        let a1 = stratum_orbit_descriptor(s, &GroupChoice::An, &x1).unwrap();
        let a2 = stratum_orbit_descriptor(s, &GroupChoice::An, &x2).unwrap();
        assert_eq!(a1, a2);
        // opposite rays stay distinct for AN
        let a3 = stratum_orbit_descriptor(s, &GroupChoice::An, &x1.scale(&rat_int(-1))).unwrap();
        assert_ne!(a1, a3);
    }

    #[test]
    fn cohomogeneity_examples() {
        let s = sig(3, 2);
        let plan = SamplePlan {
            per_stratum: 3,
            ..Default::default()
        };
        assert_eq!(
            cohomogeneity_estimate(s, &GroupChoice::N, &plan).unwrap(),
            2
        );
        assert_eq!(
            cohomogeneity_estimate(s, &GroupChoice::K0An, &plan).unwrap(),
            1
        );
        assert_eq!(
            cohomogeneity_estimate(s, &GroupChoice::So, &plan).unwrap(),
            1
        );
    }

    #[test]
    fn orbit_equivalence_off_w_and_witness_on_w() {
        let s = sig(4, 2);
        let k0 = lie::build_k0(s);
        assert!(tangent_equal_off_w(s, &s.basis_vector(4), &k0).unwrap());
        assert!(tangent_equal_off_w(s, &s.basis_vector(3), &k0).unwrap());
        // cylinder point violates the precondition ...
        let x = s.basis_vector(1).add(&s.w_vector(1).scale(&rat_int(5)));
        assert!(matches!(
            tangent_equal_off_w(s, &x, &k0),
            Err(Error::PointInDegenerateSubspace)
        ));
        // ... and the dimensions genuinely differ there: q = 2 vs p-1 = 3
        let an = GroupChoice::An.subalgebra(s).unwrap();
        let k0an = GroupChoice::K0An.subalgebra(s).unwrap();
        assert_eq!(orbit_dim_oracle(&an, &x).unwrap(), 2);
        assert_eq!(orbit_dim_oracle(&k0an, &x).unwrap(), 3);
    }

    #[test]
    fn sample_core_hits_every_stratum() {
        let s = sig(3, 2);
        let plan = SamplePlan {
            per_stratum: 2,
            ..Default::default()
        };
        let sample = sample_points(s, &plan);
        let has = |v: &Vector| sample.points.iter().any(|pt| &pt.point == v);
        assert!(has(&s.basis_vector(3))); // k = 1
        assert!(has(&s.basis_vector(2))); // k = 2
        assert!(has(&s.basis_vector(1))); // case b
        assert!(has(&s.w_vector(1))); // l = 1
        assert!(has(&s.w_vector(1).add(&s.w_vector(2)))); // l = 2
        assert!(has(&s.w_vector(1).sub(&s.w_vector(2)))); // l = 2, flipped
                                                          // pivot-switch boundary representatives e_{p+k}
        assert!(has(&s.basis_vector(4)));
        assert!(has(&s.basis_vector(5)));
        assert!(sample.skipped.is_empty());
        // p = q skips case (b) and records it
        let s22 = sig(2, 2);
        let sample22 = sample_points(s22, &plan);
        assert_eq!(sample22.skipped.len(), 1);
        assert!(sample22
            .points
            .iter()
            .all(|pt| !pt.stratum_tag.starts_with('b')));
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = sig(4, 2);
        let plan = SamplePlan {
            seed: 99,
            per_stratum: 7,
            coordinate_range: 10,
        };
        let a = sample_points(s, &plan);
        let b = sample_points(s, &plan);
        assert_eq!(a.points.len(), b.points.len());
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.point, y.point);
            assert_eq!(x.stratum_tag, y.stratum_tag);
        }
        let c = sample_points(s, &SamplePlan { seed: 100, ..plan });
        assert!(a
            .points
            .iter()
            .zip(&c.points)
            .any(|(x, y)| x.point != y.point));
    }

    #[test]
    fn oracle_is_scale_equivariant() {
        let s = sig(3, 2);
        let plan = SamplePlan {
            per_stratum: 2,
            ..Default::default()
        };
        let sample = sample_points(s, &plan);
        for g in [GroupChoice::N, GroupChoice::An, GroupChoice::So] {
            let basis = g.subalgebra(s).unwrap();
            for x in sample.vectors() {
                let d = orbit_dim_oracle(&basis, x).unwrap();
                for t in [rat_int(2), rat_int(-3), rat(1, 7)] {
                    assert_eq!(orbit_dim_oracle(&basis, &x.scale(&t)).unwrap(), d);
                }
            }
        }
    }

    #[test]
    fn report_assembly() {
        let s = sig(3, 2);
        let r = orbit_report(s, &GroupChoice::N, &s.basis_vector(3)).unwrap();
        assert_eq!(r.oracle_dim, 3);
        assert_eq!(r.predicted_dim, Some(3));
        assert!(r.agrees);
        assert_eq!(r.stratum.k_index, Some(1));
        assert!(r.descriptor.is_some());
        // oracle-only group: no prediction, vacuous agreement
        let r = orbit_report(s, &GroupChoice::A, &s.basis_vector(3)).unwrap();
        assert_eq!(r.predicted_dim, None);
        assert!(r.agrees);
        assert!(r.descriptor.is_none());
        assert!(orbit_report(s, &GroupChoice::N, &Vector::zero(5)).is_err());
    }

    #[test]
    fn kprime_an_with_trivial_kprime_behaves_like_an() {
        let s = sig(4, 2);
        let kp = trivial_kprime(s);
        let g = GroupChoice::KPrimeAn(kp);
        let x = s.basis_vector(1).add(&s.w_vector(1));
        assert_eq!(predict_dim(s, &g, &x).unwrap(), 2);
        let basis = g.subalgebra(s).unwrap();
        assert_eq!(orbit_dim_oracle(&basis, &x).unwrap(), 2);
        // full k0 lifts the cylinder orbit dimension to p-1
        let g_full = GroupChoice::KPrimeAn(lie::build_k0(s));
        assert_eq!(predict_dim(s, &g_full, &x).unwrap(), 3);
        let basis = g_full.subalgebra(s).unwrap();
        assert_eq!(orbit_dim_oracle(&basis, &x).unwrap(), 3);
    }
}
