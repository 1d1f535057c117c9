//! Kähler potentials of the quotient, each available through several
//! independent evaluation routes.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grassmann::{curvature_fun_apply, graph_spectrum, psi1, psi3, GrTangent, OrbitPair};
use crate::hkspace::{character_exists, flat_potential, ConfigPoint, GroupElement};
use crate::matcore::{
    self, herm_eig, herm_sqrt, hermitian_part, log_det_pd, real, svd, ComplexMatrix,
};
use crate::quotient::{project1, project3, require_stable1, require_stable3, GroupPart};

/// `(√(1+u) − 1)/u`, extended by `½` at zero.
pub fn h_weight(u: f64) -> f64 {
    1.0 / ((1.0 + u).sqrt() + 1.0)
}

/// `(√(1+u) − 1 − log((1 + √(1+u))/2))/u`, extended by `¼` at zero.
///
/// Written as `(2 − log1p(w)/w) / (2(s+1))` with `s = √(1+u)` and
/// `w = (s−1)/2 = u/(2(s+1))`, which has no cancellation near zero.
pub fn f_weight(u: f64) -> f64 {
    let s = (1.0 + u).sqrt();
    let w = u / (2.0 * (s + 1.0));
    let ratio = if w == 0.0 { 1.0 } else { w.ln_1p() / w };
    (2.0 - ratio) / (2.0 * (s + 1.0))
}

/// `√(1+4λ) − 1` without cancellation.
fn sqrt_excess(lambda: f64) -> f64 {
    4.0 * lambda / ((1.0 + 4.0 * lambda).sqrt() + 1.0)
}

fn warn_integrality(k: f64) {
    if !character_exists(k) {
        log::debug!(
            "k^2/2 = {} is not a positive integer; the character does not exist",
            k * k / 2.0
        );
    }
}

/// `(k²/4) log det(x*x/k²)`.
fn log_det_term(pt: &ConfigPoint) -> Result<f64> {
    let k2 = pt.trunc.k2();
    let xx = hermitian_part(&(pt.base.adjoint() * &pt.base)) * real(1.0 / k2);
    Ok(0.25 * k2 * log_det_pd(&xx)?)
}

/// Nonnegative eigenvalues of `(1/k⁴)|x| X*X |x|`, which equal those of
/// `V*V` for the cotangent vector of the point.
fn fiber_spectrum_closed(pt: &ConfigPoint) -> Result<Vec<f64>> {
    let k2 = pt.trunc.k2();
    let xx = hermitian_part(&(pt.base.adjoint() * &pt.base));
    let yy = hermitian_part(&(pt.fiber.adjoint() * &pt.fiber));
    let abs_x = herm_sqrt(&xx)?;
    let b = hermitian_part(&(&abs_x * yy * &abs_x)) * real(1.0 / (k2 * k2));
    Ok(herm_eig(&b)?
        .eigenvalues
        .into_iter()
        .map(|l| l.max(0.0))
        .collect())
}

fn tangent_spectrum(v: &GrTangent) -> Result<Vec<f64>> {
    let vv = hermitian_part(&(v.coords.adjoint() * &v.coords));
    Ok(herm_eig(&vv)?
        .eigenvalues
        .into_iter()
        .map(|l| l.max(0.0))
        .collect())
}

/// `(k²/4)Σ(√(1+4λ) − 1) − (k²/4)Σ log(½(1 + √(1+4λ)))`.
fn fiber_terms(k2: f64, spectrum: &[f64]) -> f64 {
    spectrum
        .iter()
        .map(|&l| {
            let e = sqrt_excess(l);
            0.25 * k2 * (e - (0.5 * e).ln_1p())
        })
        .sum()
}

/// `(k²/4) log det(x*x/k²) + (k²/2) Tr(γγ*/k² − Id) − (k²/4) Tr log(γγ*/k²)`
/// with `γγ*/k² = ½(Id + (Id + (4/k⁴)|x|X*X|x|)^{1/2})`.
pub fn k1_closed(pt: &ConfigPoint) -> Result<f64> {
    require_stable1(pt)?;
    warn_integrality(pt.trunc.k);
    let k2 = pt.trunc.k2();
    let mut total = log_det_term(pt)?;
    for l in fiber_spectrum_closed(pt)? {
        let gamma_excess = 0.5 * sqrt_excess(l);
        total += 0.5 * k2 * gamma_excess - 0.25 * k2 * gamma_excess.ln_1p();
    }
    Ok(total)
}

/// Log-determinant term plus the cotangent-fiber trace expression in
/// `V*V`, with `V` obtained from `psi1`.
pub fn k1_fiber(pt: &ConfigPoint) -> Result<f64> {
    let v = psi1(pt)?.tangent()?;
    Ok(log_det_term(pt)? + fiber_terms(pt.trunc.k2(), &tangent_spectrum(&v)?))
}

/// Log-determinant term plus `k² g_Gr(f(I₁R_{I₁V,V})V, V)`.
pub fn k1_curvature(pt: &ConfigPoint) -> Result<f64> {
    let v = psi1(pt)?.tangent()?;
    Ok(log_det_term(pt)? + pt.trunc.k2() * curvature_fun_apply(f_weight, &v)?)
}

/// `−(k²/4) log det(g⁻²) = (k²/2) log det g` for positive `g`.
pub fn character_log_term(g: &GroupElement, k: f64) -> Result<f64> {
    let h = matcore::ensure_hermitian(&g.mat)?;
    warn_integrality(k);
    Ok(0.5 * k * k * log_det_pd(&h)?)
}

/// Flat potential at the projected point plus the character term of the
/// projecting group element.
pub fn k1_level(pt: &ConfigPoint) -> Result<f64> {
    let res = project1(pt)?;
    let GroupPart::Positive(g) = &res.group_part else {
        unreachable!("project1 always returns a positive group part")
    };
    Ok(flat_potential(&res.point) + character_log_term(g, pt.trunc.k)?)
}

/// Hermitian form of the orbit invariant `(x+X)*(x+X)·(x−X)*(x−X)`.
///
/// Under `act3` the two factors transform as `e^{−h}·e^{−h}` and `e^{h}·e^{h}`,
/// so their product changes by conjugation and its spectrum is constant on
/// complex orbits. On the level set it equals `(k² + 2X*X)²`. It is evaluated
/// through the similar Hermitian matrix `A^{1/2} B A^{1/2}`.
fn k3_operand(pt: &ConfigPoint) -> Result<ComplexMatrix> {
    require_stable3(pt)?;
    let plus = &pt.base + &pt.fiber;
    let minus = &pt.base - &pt.fiber;
    let a = hermitian_part(&(plus.adjoint() * &plus));
    let b = hermitian_part(&(minus.adjoint() * &minus));
    let root_a = herm_sqrt(&a)?;
    Ok(hermitian_part(&(&root_a * b * &root_a)))
}

/// `¼ Σ (√d − k²)` over the eigenvalues `d` of a Hermitian operand.
fn half_root_excess(d: &ComplexMatrix, k2: f64) -> Result<f64> {
    let spectrum = herm_eig(d)?;
    if spectrum.min() <= 0.0 {
        return Err(Error::NotPositive {
            min_eigenvalue: spectrum.min(),
        });
    }
    Ok(spectrum
        .eigenvalues
        .iter()
        .map(|&e| 0.25 * (e - k2 * k2) / (e.sqrt() + k2))
        .sum())
}

/// `¼ Tr(D^{1/2} − k²)` with `D` the orbit invariant of [`k3_operand`].
pub fn k3_spectral(pt: &ConfigPoint) -> Result<f64> {
    half_root_excess(&k3_operand(pt)?, pt.trunc.k2())
}

/// `¼(‖z‖_* − p k²)` with `z = i(x+X)(x*−X*)` and `‖·‖_*` the sum of singular
/// values. The squared singular values of `z` are the eigenvalues of the
/// operand used by [`k3_spectral`].
pub fn k3_operator(pt: &ConfigPoint) -> Result<f64> {
    let z = psi3(pt)?.z;
    let k2 = pt.trunc.k2();
    let mut sigma = svd(&z)?.sigma;
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(sigma[..pt.trunc.p].iter().map(|s| 0.25 * (s - k2)).sum())
}

/// Flat potential at the level-set representative of the I₃-orbit.
pub fn k3_level(pt: &ConfigPoint) -> Result<f64> {
    Ok(flat_potential(&project3(pt)?.point))
}

/// Angle formula evaluated on `psi3(pt)`.
pub fn k3_angles(pt: &ConfigPoint) -> Result<f64> {
    k3_hat_angles(&psi3(pt)?.pair, pt.trunc.k)
}

/// `(k²/4) Σ (1/cos θ_i − 1) = (k²/4) Tr((Id + A*A)^{1/2} − Id)`.
pub fn k3_hat_angles(pair: &OrbitPair, k: f64) -> Result<f64> {
    Ok(graph_spectrum(pair)?
        .into_iter()
        .map(|a2| 0.25 * k * k * a2 / ((1.0 + a2).sqrt() + 1.0))
        .sum())
}

/// `(k²/4) Tr((Id + 4V*V)^{1/2} − Id)`.
pub fn k3_hat_cotangent(v: &GrTangent, k: f64) -> Result<f64> {
    Ok(tangent_spectrum(v)?
        .into_iter()
        .map(|l| 0.25 * k * k * sqrt_excess(l))
        .sum())
}

/// `k² g_Gr(h(I₁R_{I₁V,V})V, V)`.
pub fn k3_hat_curvature(v: &GrTangent, k: f64) -> Result<f64> {
    Ok(k * k * curvature_fun_apply(h_weight, v)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PotentialKind {
    /// `¼ Tr(x*x + X*X − k²)` on the ambient space.
    Flat,
    /// Potential of the I₁-Kähler structure.
    K1,
    /// Potential of the I₃-Kähler structure.
    K3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Closed,
    Fiber,
    Curvature,
    Spectral,
    Operator,
    Angles,
    Level,
}

impl PotentialKind {
    pub const ALL: [PotentialKind; 3] = [PotentialKind::Flat, PotentialKind::K1, PotentialKind::K3];

    pub fn name(self) -> &'static str {
        match self {
            PotentialKind::Flat => "flat",
            PotentialKind::K1 => "k1",
            PotentialKind::K3 => "k3",
        }
    }

    /// Routes in order of preference; the first one is the reported value.
    pub fn routes(self) -> &'static [Route] {
        match self {
            PotentialKind::Flat => &[Route::Closed],
            PotentialKind::K1 => &[Route::Closed, Route::Fiber, Route::Curvature, Route::Level],
            PotentialKind::K3 => &[
                Route::Spectral,
                Route::Operator,
                Route::Level,
                Route::Angles,
            ],
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PotentialKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        PotentialKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown potential `{s}` (expected flat, k1 or k3)"))
    }
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Closed => "closed",
            Route::Fiber => "fiber",
            Route::Curvature => "curvature",
            Route::Spectral => "spectral",
            Route::Operator => "operator",
            Route::Angles => "angles",
            Route::Level => "level",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates one potential along one route.
pub fn evaluate(kind: PotentialKind, route: Route, pt: &ConfigPoint) -> Result<f64> {
    match (kind, route) {
        (PotentialKind::Flat, Route::Closed) => Ok(flat_potential(pt)),
        (PotentialKind::K1, Route::Closed) => k1_closed(pt),
        (PotentialKind::K1, Route::Fiber) => k1_fiber(pt),
        (PotentialKind::K1, Route::Curvature) => k1_curvature(pt),
        (PotentialKind::K1, Route::Level) => k1_level(pt),
        (PotentialKind::K3, Route::Spectral) => k3_spectral(pt),
        (PotentialKind::K3, Route::Operator) => k3_operator(pt),
        (PotentialKind::K3, Route::Level) => k3_level(pt),
        (PotentialKind::K3, Route::Angles) => k3_angles(pt),
        _ => Err(Error::ShapeMismatch(format!(
            "route `{route}` is not available for potential `{kind}`"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialReport {
    pub kind: PotentialKind,
    pub route: Route,
    pub value: f64,
    /// Values from the remaining routes, for cross-checking.
    pub cross_checks: Vec<(Route, f64)>,
    /// SHA-256 of the truncation and the point's entries.
    pub inputs_digest: String,
}

impl PotentialReport {
    /// Largest `|value − other|` over the cross-check routes.
    pub fn max_delta(&self) -> f64 {
        self.cross_checks
            .iter()
            .map(|(_, v)| (v - self.value).abs())
            .fold(0.0, f64::max)
    }

    /// Whether every route agrees within `tol·(1 + |value|)`.
    pub fn consistent(&self, tol: f64) -> bool {
        self.max_delta() <= tol * (1.0 + self.value.abs())
    }
}

/// Evaluates `kind` along all its routes, reporting the first.
pub fn report(kind: PotentialKind, pt: &ConfigPoint) -> Result<PotentialReport> {
    let routes = kind.routes();
    let value = evaluate(kind, routes[0], pt)?;
    let cross_checks = routes[1..]
        .iter()
        .map(|&r| Ok((r, evaluate(kind, r, pt)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PotentialReport {
        kind,
        route: routes[0],
        value,
        cross_checks,
        inputs_digest: inputs_digest(pt),
    })
}

/// I₁-quotient potential assembled from the level-set projection, cross-checked
/// against the closed form.
pub fn quotient_potential(pt: &ConfigPoint) -> Result<PotentialReport> {
    Ok(PotentialReport {
        kind: PotentialKind::K1,
        route: Route::Level,
        value: k1_level(pt)?,
        cross_checks: vec![(Route::Closed, k1_closed(pt)?)],
        inputs_digest: inputs_digest(pt),
    })
}

/// Hex SHA-256 of `(p, q, k)` and the row-major entries of both components.
pub fn inputs_digest(pt: &ConfigPoint) -> String {
    let mut hasher = Sha256::new();
    hasher.update((pt.trunc.p as u64).to_le_bytes());
    hasher.update((pt.trunc.q as u64).to_le_bytes());
    hasher.update(pt.trunc.k.to_le_bytes());
    for m in [&pt.base, &pt.fiber] {
        for z in matcore::to_row_major(m) {
            hasher.update(z.re.to_le_bytes());
            hasher.update(z.im.to_le_bytes());
        }
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
