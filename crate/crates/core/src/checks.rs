//! Randomized property suites. Each property records the largest residual
//! seen over its trials together with the tolerance it is held to.

use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::grassmann::{
    curvature_op_i1, curvature_op_i1_via_tensor, graph_operator, psi1, psi1_section, psi3,
    psi3_section, CotangentPoint, GrTangent, Subspace,
};
use crate::hkspace::{
    act1, act3, flat_potential, metric_g, omega, ComplexStructure, ConfigPoint, GroupElement,
    TangentPair, Truncation,
};
use crate::matcore::{self, identity, mul_i, real, unitary_deviation, ComplexMatrix};
use crate::moment::{
    infinitesimal_action, level_residual, level_value, moment, moment_derivative,
    moment_pairing_check, MomentKind,
};
use crate::potentials::{
    self, k1_closed, k3_hat_angles, k3_hat_cotangent, k3_hat_curvature, k3_spectral,
    quotient_potential, PotentialKind,
};
use crate::quotient::{project1, GroupPart, Pairing, SliceBasis};
use crate::sample::{Sampler, Space};

/// `|a − b| / (1 + max(|a|, |b|))`.
pub fn rel_delta(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Quaternion,
    Moment,
    Reduction,
    Potentials,
    Maps,
    Ddc,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Quaternion,
        Suite::Moment,
        Suite::Reduction,
        Suite::Potentials,
        Suite::Maps,
        Suite::Ddc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Quaternion => "quaternion",
            Suite::Moment => "moment",
            Suite::Reduction => "reduction",
            Suite::Potentials => "potentials",
            Suite::Maps => "maps",
            Suite::Ddc => "ddc",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    pub trials: usize,
    pub seed: u64,
    /// Upper bound for `p` and `q`.
    pub max_dim: usize,
    /// Upper bound for `p` and `q` in properties that assemble the tangent
    /// decomposition.
    pub slice_max_dim: usize,
    /// Upper bound for `p` and `q` in the finite-difference suite.
    pub ddc_max_dim: usize,
    /// Membership tolerance for sampled points.
    pub tol: f64,
    /// Step of the central differences in the ddᶜ suite (flat part).
    pub ddc_flat_step: f64,
    /// Step of the central differences in the ddᶜ suite (reduced part).
    pub ddc_reduced_step: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            trials: 20,
            seed: 7,
            max_dim: 6,
            slice_max_dim: 4,
            ddc_max_dim: 3,
            tol: crate::hkspace::DEFAULT_TOL,
            ddc_flat_step: 1e-4,
            ddc_reduced_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    /// First error raised while evaluating the property, if any.
    pub error: Option<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.max_residual.is_finite() && self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub properties: Vec<PropertyResult>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyResult::passed)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

struct Tracker {
    result: PropertyResult,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tracker {
            result: PropertyResult {
                name,
                max_residual: 0.0,
                tolerance,
                samples: 0,
                error: None,
            },
        }
    }

    fn record(&mut self, residual: Result<f64>) {
        self.result.samples += 1;
        match residual {
            Ok(r) if r.is_nan() => self.result.max_residual = f64::INFINITY,
            Ok(r) => self.result.max_residual = self.result.max_residual.max(r),
            Err(e) => {
                self.result.max_residual = f64::INFINITY;
                self.result.error.get_or_insert_with(|| e.to_string());
            }
        }
    }

    fn finish(self) -> PropertyResult {
        self.result
    }
}

fn random_trunc(s: &mut Sampler, max_dim: usize, tol: f64) -> Result<Truncation> {
    let p = s.dim(1, max_dim);
    let q = s.dim(1, max_dim);
    Truncation::new(p, q, s.uniform(0.5, 2.0))?.with_tol(tol)
}

pub fn run_suite(suite: Suite, cfg: &CheckConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let properties = match suite {
        Suite::Quaternion => quaternion(cfg)?,
        Suite::Moment => moment_suite(cfg)?,
        Suite::Reduction => reduction(cfg)?,
        Suite::Potentials => potentials_suite(cfg)?,
        Suite::Maps => maps(cfg)?,
        Suite::Ddc => ddc(cfg, &reduced_k1)?,
    };
    Ok(SuiteReport {
        suite,
        properties,
        elapsed: start.elapsed(),
    })
}

fn quaternion(cfg: &CheckConfig) -> Result<Vec<PropertyResult>> {
    let mut s = Sampler::new(cfg.seed);
    let mut squares = Tracker::new("i_squared_is_minus_id", 0.0);
    let mut products = Tracker::new("quaternion_products", 0.0);
    let mut compat = Tracker::new("omega_is_metric_of_i", 1e-12);
    let mut isometry = Tracker::new("i_is_isometry", 1e-12);
    use ComplexStructure::{I1, I2, I3};
    for _ in 0..cfg.trials {
        let (n, p) = (s.dim(2, 2 * cfg.max_dim), s.dim(1, cfg.max_dim));
        let v = s.tangent(n, p);
        let w = s.tangent(n, p);
        for j in ComplexStructure::ALL {
            squares.record(Ok((&j.apply(&j.apply(&v)) + &v).norm()));
        }
        for (a, b, c) in [(I1, I2, I3), (I2, I3, I1), (I3, I1, I2)] {
            products.record(Ok((&a.apply(&b.apply(&v)) - &c.apply(&v)).norm()));
        }
        let scale = v.norm() * w.norm();
        for j in ComplexStructure::ALL {
            let lhs = omega(j, &v, &w)?;
            let rhs = metric_g(&j.apply(&v), &w)?;
            compat.record(Ok((lhs - rhs).abs() / scale));
            let moved = metric_g(&j.apply(&v), &j.apply(&w))?;
            isometry.record(Ok((moved - metric_g(&v, &w)?).abs() / scale));
        }
    }
    Ok(vec![
        squares.finish(),
        products.finish(),
        compat.finish(),
        isometry.finish(),
    ])
}

fn moment_suite(cfg: &CheckConfig) -> Result<Vec<PropertyResult>> {
    let mut s = Sampler::new(cfg.seed);
    let mut pairing = Tracker::new("moment_pairing", 1e-11);
    let mut equivariance = Tracker::new("moment_equivariance", 1e-10);
    let mut holomorphic = Tracker::new("complex_moment_holomorphic", 1e-12);
    let mut level = Tracker::new("level_value", 1e-9);
    for _ in 0..cfg.trials {
        let t = random_trunc(&mut s, cfg.max_dim, cfg.tol)?;
        let (n, p) = (t.n(), t.p);
        let pt = ConfigPoint::new(t, s.gaussian(n, p), s.gaussian(n, p))?;
        let a = s.skew(p);
        let v = s.tangent(n, p);
        for j in ComplexStructure::ALL {
            pairing.record(
                moment_pairing_check(&pt, &a, &v, j).map(|(l, r)| (l - r).abs() / (1.0 + l.abs())),
            );
        }
        let u = s.unitary(p);
        let moved = act1(&GroupElement::unitary(u.clone())?, &pt)?;
        for kind in [MomentKind::Mu1, MomentKind::MuC] {
            let want = &u * moment(kind, &pt).value * u.adjoint();
            let got = moment(kind, &moved).value;
            equivariance.record(Ok((got - &want).norm() / (1.0 + want.norm())));
        }
        let d_iv = moment_derivative(MomentKind::MuC, &pt, &ComplexStructure::I1.apply(&v));
        let i_dv = mul_i(&moment_derivative(MomentKind::MuC, &pt, &v));
        holomorphic.record(Ok((d_iv - &i_dv).norm() / (1.0 + i_dv.norm())));

        let on_level = s.point(Space::Level, t)?;
        let mu1 = moment(MomentKind::Mu1, &on_level).value;
        level.record(Ok((mu1 - level_value(&on_level)).norm() / t.k2()));
    }
    Ok(vec![
        pairing.finish(),
        equivariance.finish(),
        holomorphic.finish(),
        level.finish(),
    ])
}

fn positive_part(res: &crate::quotient::ProjectionResult) -> Result<&GroupElement> {
    match &res.group_part {
        GroupPart::Positive(g) => Ok(g),
        GroupPart::Complex { .. } => Err(Error::ShapeMismatch(
            "expected a positive group part".into(),
        )),
    }
}

fn reduction(cfg: &CheckConfig) -> Result<Vec<PropertyResult>> {
    let mut props = projection_properties(cfg)?;
    props.extend(slice_properties(cfg)?);
    Ok(props)
}

/// Level projection along complexified orbits, on `I₁`-stable samples.
pub fn projection_properties(cfg: &CheckConfig) -> Result<Vec<PropertyResult>> {
    let mut s = Sampler::new(cfg.seed);
    let mut residual = Tracker::new("project1_level_residual", 1e-10);
    let mut equivariance = Tracker::new("project1_equivariance", 1e-9);
    let mut orbit_meets_level = Tracker::new("complex_orbit_meets_level_in_unitary_orbit", 1e-8);
    let mut uniqueness = Tracker::new("project1_polar_uniqueness", 1e-9);
    for _ in 0..cfg.trials {
        let t = random_trunc(&mut s, cfg.max_dim, cfg.tol)?;
        let p = t.p;
        let pt = s.point(Space::Stable1, t)?;
        let res = project1(&pt)?;
        residual.record(Ok(res.residual / t.k2()));

        let u = GroupElement::unitary(s.unitary(p))?;
        let moved = project1(&act1(&u, &pt)?)?.point;
        let want = act1(&u, &res.point)?;
        equivariance.record(Ok(point_distance(&moved, &want)));

        let level = &res.point;
        let g0 = GroupElement::positive(s.positive(p, 1.0)?)?;
        let pushed = act1(&g0, level)?;
        let back = project1(&pushed)?;
        let x1 = &back.point.base;
        let w = matcore::inverse(&(x1.adjoint() * x1))? * (x1.adjoint() * &level.base);
        orbit_meets_level.record(Ok(unitary_deviation(&w)));
        let composite = &positive_part(&back)?.mat * &g0.mat;
        uniqueness.record(Ok(unitary_deviation(&composite)));
    }
    Ok(vec![
        residual.finish(),
        equivariance.finish(),
        orbit_meets_level.finish(),
        uniqueness.finish(),
    ])
}

/// Tangent decomposition at level-set samples with `p, q ≤ slice_max_dim`.
pub fn slice_properties(cfg: &CheckConfig) -> Result<Vec<PropertyResult>> {
    let mut s = Sampler::new(cfg.seed ^ 0x51ce);
    let mut idempotent = Tracker::new("projector_idempotence", 1e-10);
    let mut orthogonal = Tracker::new("orbit_horizontal_orthogonality", 1e-10);
    let mut tangent = Tracker::new("horizontal_in_level_tangent", 1e-9);
    let mut stable = Tracker::new("horizontal_complex_stability", 1e-9);
    let mut reconstruct = Tracker::new("decomposition_reconstruction", 1e-8);
    let mut block = Tracker::new("decomposition_block_orthogonality", 1e-8);
    let mut independence = Tracker::new("reduced_pairing_independence", 1e-9);
    for _ in 0..cfg.trials {
        let t = random_trunc(&mut s, cfg.slice_max_dim, cfg.tol)?;
        let (n, p) = (t.n(), t.p);
        let pt = s.point(Space::Level, t)?;
        let basis = SliceBasis::new(&pt)?;
        let v = s.tangent(n, p);
        let scale = v.norm();
        let lv = basis.level(&v)?;
        let hv = basis.horizontal(&v)?;
        let ov = basis.orbit(&v)?;
        idempotent.record(Ok((&basis.level(&lv)? - &lv).norm() / scale));
        idempotent.record(Ok((&basis.horizontal(&hv)? - &hv).norm() / scale));
        idempotent.record(Ok((&basis.orbit(&ov)? - &ov).norm() / scale));
        let o = infinitesimal_action(&pt, &s.skew(p));
        orthogonal.record(Ok(metric_g(&o, &hv)?.abs() / (o.norm() * scale)));
        tangent.record(Ok(basis.df_norm(&hv) / scale));
        for j in ComplexStructure::ALL {
            let jh = j.apply(&hv);
            stable.record(Ok((&basis.horizontal(&jh)? - &jh).norm() / scale));
        }

        let parts = basis.decompose(&v)?;
        let mut sum = TangentPair::zeros(n, p);
        for part in &parts {
            sum = &sum + part;
        }
        reconstruct.record(Ok((&sum - &v).norm() / scale));
        for i in 0..parts.len() {
            for j in 0..i {
                block.record(Ok(metric_g(&parts[i], &parts[j])?.abs() / (scale * scale)));
            }
        }

        let w = s.tangent(n, p);
        let u = s.unitary(p);
        let moved = act1(&GroupElement::unitary(u.clone())?, &pt)?;
        let moved_basis = SliceBasis::new(&moved)?;
        let push = |x: &TangentPair| x.right_mul(&u.adjoint());
        for which in pairings() {
            let here = basis.pairing(which, &v, &w)?;
            let there = moved_basis.pairing(which, &push(&v), &push(&w))?;
            independence.record(Ok(rel_delta(here, there)));
        }
    }
    Ok(vec![
        idempotent.finish(),
        orthogonal.finish(),
        tangent.finish(),
        stable.finish(),
        reconstruct.finish(),
        block.finish(),
        independence.finish(),
    ])
}

fn pairings() -> [Pairing; 4] {
    [
        Pairing::Metric,
        Pairing::Omega(ComplexStructure::I1),
        Pairing::Omega(ComplexStructure::I2),
        Pairing::Omega(ComplexStructure::I3),
    ]
}

/// Frobenius distance between two points, relative to their size.
pub fn point_distance(a: &ConfigPoint, b: &ConfigPoint) -> f64 {
    let d = ((&a.base - &b.base).norm_squared() + (&a.fiber - &b.fiber).norm_squared()).sqrt();
    d / (1.0 + (a.base.norm_squared() + a.fiber.norm_squared()).sqrt())
}

fn route_spread(kind: PotentialKind, pt: &ConfigPoint) -> Result<f64> {
    let rep = potentials::report(kind, pt)?;
    Ok(rep
        .cross_checks
        .iter()
        .map(|(_, v)| rel_delta(*v, rep.value))
        .fold(0.0, f64::max))
}

fn potentials_suite(cfg: &CheckConfig) -> Result<Vec<PropertyResult>> {
    let mut s = Sampler::new(cfg.seed);
    let mut k1_routes = Tracker::new("k1_route_agreement", 1e-9);
    let mut k3_routes = Tracker::new("k3_route_agreement", 1e-8);
    let mut k1_invariant = Tracker::new("k1_unitary_invariance", 1e-10);
    let mut k3_invariant = Tracker::new("k3_unitary_invariance", 1e-10);
    let mut k3_orbit = Tracker::new("k3_complex_orbit_invariance", 1e-9);
    let mut quotient = Tracker::new("quotient_potential_matches_closed", 1e-10);
    let mut zero_section = Tracker::new("k1_zero_section", 1e-12);
    let mut zero_fiber = Tracker::new("k3_zero_fiber", 1e-12);
    let mut hat_routes = Tracker::new("k3hat_route_agreement", 1e-11);
    let mut hat_angles = Tracker::new("k3hat_angles_match_spectral", 1e-10);
    for _ in 0..cfg.trials {
        let t = random_trunc(&mut s, cfg.max_dim, cfg.tol)?;
        let (n, p) = (t.n(), t.p);
        let pt1 = s.point(Space::Stable1, t)?;
        k1_routes.record(route_spread(PotentialKind::K1, &pt1));
        let u = GroupElement::unitary(s.unitary(p))?;
        k1_invariant.record(Ok(rel_delta(
            k1_closed(&act1(&u, &pt1)?)?,
            k1_closed(&pt1)?,
        )));
        quotient.record(quotient_potential(&pt1).map(|r| r.max_delta() / (1.0 + r.value.abs())));

        let mut zero = pt1.clone();
        zero.fiber.fill(real(0.0));
        let xx = zero.base.adjoint() * &zero.base * real(1.0 / t.k2());
        let want = 0.25 * t.k2() * matcore::log_det_pd(&xx)?;
        zero_section.record(Ok((k1_closed(&zero)? - want).abs()));

        let pt3 = s.point(Space::Stable3, t)?;
        k3_routes.record(route_spread(PotentialKind::K3, &pt3));
        let base = k3_spectral(&pt3)?;
        let u = GroupElement::unitary(s.unitary(p))?;
        let zero_h = ComplexMatrix::zeros(p, p);
        k3_invariant.record(Ok(rel_delta(k3_spectral(&act3(&zero_h, &u, &pt3)?)?, base)));
        let spread = s.uniform(0.0, 1.0);
        let h = s.hermitian(p, spread);
        k3_orbit.record(Ok(rel_delta(k3_spectral(&act3(&h, &u, &pt3)?)?, base)));

        let reference = ConfigPoint::reference(t);
        let u_n = s.unitary(n);
        let rotated = reference.with_components(&u_n * &reference.base, ComplexMatrix::zeros(n, p));
        zero_fiber.record(Ok(k3_spectral(&rotated)?.abs()));

        let v = GrTangent::new(s.gaussian(t.q, p));
        let direct = k3_hat_cotangent(&v, t.k)?;
        hat_routes.record(Ok(rel_delta(direct, k3_hat_curvature(&v, t.k)?)));
        let pair = s.orbit_pair(p, t.q)?;
        let section = psi3_section(&pair, t.k)?;
        hat_angles.record(Ok(rel_delta(
            k3_hat_angles(&pair, t.k)?,
            k3_spectral(&section)?,
        )));
    }
    Ok(vec![
        k1_routes.finish(),
        k3_routes.finish(),
        k1_invariant.finish(),
        k3_invariant.finish(),
        k3_orbit.finish(),
        quotient.finish(),
        zero_section.finish(),
        zero_fiber.finish(),
        hat_routes.finish(),
        hat_angles.finish(),
    ])
}

fn cotangent_distance(a: &CotangentPoint, b: &CotangentPoint) -> f64 {
    a.plane.distance(&b.plane).max((&a.eta - &b.eta).norm())
}

fn maps(cfg: &CheckConfig) -> Result<Vec<PropertyResult>> {
    let mut s = Sampler::new(cfg.seed);
    let mut psi1_round = Tracker::new("psi1_section_round_trip", 1e-10);
    let mut psi3_round = Tracker::new("psi3_section_round_trip", 1e-10);
    let mut psi1_fiber = Tracker::new("psi1_fiber_constancy", 1e-9);
    let mut psi3_fiber = Tracker::new("psi3_fiber_constancy", 1e-9);
    let mut z_structure = Tracker::new("z_squared_is_ik2_z", 1e-9);
    let mut graph = Tracker::new("graph_spans_q_perp", 1e-10);
    let mut curvature = Tracker::new("curvature_operator_routes", 1e-12);
    for _ in 0..cfg.trials {
        let t = random_trunc(&mut s, cfg.max_dim, cfg.tol)?;
        let p = t.p;
        let cp = s.cotangent(t)?;
        psi1_round
            .record(psi1(&psi1_section(&cp, t.k)?).map(|back| cotangent_distance(&back, &cp)));
        let pair = s.orbit_pair(p, t.q)?;
        psi3_round.record(
            psi3_section(&pair, t.k)
                .and_then(|sec| psi3(&sec))
                .map(|img| img.pair.distance(&pair)),
        );
        let a = graph_operator(&pair)?;
        let span = Subspace::span_of(&(pair.p.frame() + pair.p.complement()?.frame() * a))?;
        graph.record(Ok(span.distance(&pair.q.complement()?)));

        let pt1 = s.point(Space::Stable1, t)?;
        let spread = s.uniform(0.0, 1.0);
        let g = GroupElement::new(s.invertible(p, spread)?)?;
        let here = psi1(&pt1)?;
        psi1_fiber.record(psi1(&act1(&g, &pt1)?).map(|img| cotangent_distance(&img, &here)));

        let pt3 = s.point(Space::Stable3, t)?;
        let img = psi3(&pt3)?;
        let spread = s.uniform(0.0, 1.0);
        let h = s.hermitian(p, spread);
        let u = GroupElement::unitary(s.unitary(p))?;
        psi3_fiber.record(psi3(&act3(&h, &u, &pt3)?).map(|moved| moved.pair.distance(&img.pair)));
        let z2 = &img.z * &img.z;
        let want = mul_i(&img.z) * real(t.k2());
        z_structure.record(Ok((z2 - want).norm() / (t.k2() * t.k2())));

        let v = GrTangent::new(s.gaussian(t.q, p));
        let y = GrTangent::new(s.gaussian(t.q, p));
        let a_route = curvature_op_i1(&v, &y)?.coords;
        let b_route = curvature_op_i1_via_tensor(&v, &y)?.coords;
        curvature.record(Ok((&a_route - &b_route).norm() / (1.0 + a_route.norm())));
    }
    Ok(vec![
        psi1_round.finish(),
        psi3_round.finish(),
        psi1_fiber.finish(),
        psi3_fiber.finish(),
        z_structure.finish(),
        graph.finish(),
        curvature.finish(),
    ])
}

/// A real function on configuration points, as used by the ddᶜ checks.
pub type Potential = dyn Fn(&ConfigPoint) -> Result<f64>;

/// Central mixed second difference `D²f[a, b]` with step `h`.
pub fn mixed_second(
    f: &Potential,
    pt: &ConfigPoint,
    a: &TangentPair,
    b: &TangentPair,
    h: f64,
) -> Result<f64> {
    let at = |sa: f64, sb: f64| f(&pt.offset(&(&(a * sa) + &(b * sb)), h));
    Ok((at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h))
}

/// `ddᶜf(u, v) = −D²f[u, I v] + D²f[v, I u]` for the complex structure `j`.
pub fn ddc_fd(
    f: &Potential,
    pt: &ConfigPoint,
    j: ComplexStructure,
    u: &TangentPair,
    v: &TangentPair,
    h: f64,
) -> Result<f64> {
    Ok(mixed_second(f, pt, v, &j.apply(u), h)? - mixed_second(f, pt, u, &j.apply(v), h)?)
}

/// Retraction onto `{X*x = 0}`: `(x, X − x(x*x)⁻¹x*X)`.
pub fn retract_stable1(pt: &ConfigPoint) -> Result<ConfigPoint> {
    let x = &pt.base;
    let xx_inv = matcore::inverse(&(x.adjoint() * x))?;
    let fiber = &pt.fiber - x * (xx_inv * (x.adjoint() * &pt.fiber));
    Ok(pt.with_components(x.clone(), fiber))
}

/// `K₁` extended off the I₁-stable set by [`retract_stable1`].
pub fn reduced_k1(pt: &ConfigPoint) -> Result<f64> {
    k1_closed(&retract_stable1(pt)?)
}

/// Compares finite-difference `ddᶜ` of `potential` (structure I₁) with the
/// reduced `ω₁` on horizontal vectors at a level-set point.
pub fn ddc_reduced_residual(
    potential: &Potential,
    basis: &SliceBasis,
    u: &TangentPair,
    v: &TangentPair,
    h: f64,
) -> Result<f64> {
    let hu = basis.horizontal(u)?;
    let hv = basis.horizontal(v)?;
    let hu = &hu * (1.0 / hu.norm());
    let hv = &hv * (1.0 / hv.norm());
    let fd = ddc_fd(potential, &basis.base, ComplexStructure::I1, &hu, &hv, h)?;
    let exact = basis.pairing(Pairing::Omega(ComplexStructure::I1), &hu, &hv)?;
    Ok(rel_delta(fd, exact))
}

/// The ddᶜ suite with an injectable potential for the reduced check.
pub fn ddc(cfg: &CheckConfig, potential: &Potential) -> Result<Vec<PropertyResult>> {
    let mut s = Sampler::new(cfg.seed);
    let mut flat = Tracker::new("flat_ddc_matches_omega", 1e-5);
    let mut reduced = Tracker::new("reduced_ddc_matches_omega1", 1e-3);
    let flat_k: &Potential = &|pt: &ConfigPoint| Ok(flat_potential(pt));
    for _ in 0..cfg.trials {
        let t = random_trunc(&mut s, cfg.ddc_max_dim, cfg.tol)?;
        let (n, p) = (t.n(), t.p);
        let dim = 4 * n * p;
        let pt = ConfigPoint::new(t, s.gaussian(n, p), s.gaussian(n, p))?;
        for j in ComplexStructure::ALL {
            let a = s.dim(0, dim - 1);
            let b = s.dim(0, dim - 1);
            let ea = unit(n, p, a);
            let eb = unit(n, p, b);
            let fd = ddc_fd(flat_k, &pt, j, &ea, &eb, cfg.ddc_flat_step)?;
            flat.record(Ok(rel_delta(fd, omega(j, &ea, &eb)?)));
        }

        let level = s.point(Space::Level, t)?;
        let basis = SliceBasis::new(&level)?;
        let u = s.tangent(n, p);
        let v = s.tangent(n, p);
        reduced.record(ddc_reduced_residual(
            potential,
            &basis,
            &u,
            &v,
            cfg.ddc_reduced_step,
        ));
        // a pair spanning a complex line, where ω₁ is largest
        let i1u = ComplexStructure::I1.apply(&u);
        reduced.record(ddc_reduced_residual(
            potential,
            &basis,
            &u,
            &i1u,
            cfg.ddc_reduced_step,
        ));
    }
    Ok(vec![flat.finish(), reduced.finish()])
}

fn unit(n: usize, p: usize, index: usize) -> TangentPair {
    let mut coords = vec![0.0; 4 * n * p];
    coords[index] = 1.0;
    TangentPair::from_real(n, p, &coords)
}

/// Level-set membership residual relative to `k²`, for reporting.
pub fn relative_level_residual(pt: &ConfigPoint) -> f64 {
    level_residual(pt).max() / pt.trunc.k2()
}

/// `‖g − Id‖_F` for reporting how far a projection moved a point.
pub fn distance_from_identity(g: &ComplexMatrix) -> f64 {
    (g - identity(g.nrows())).norm()
}
