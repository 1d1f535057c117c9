//! Stable sets, the projections onto the level set, and the tangent
//! decomposition at a level-set point (orbit directions, their images under
//! the three complex structures, and the horizontal slice).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grassmann::{graph_operator, psi3, psi3_section};
use crate::hkspace::{
    act3, metric_g, omega, ComplexStructure, ConfigPoint, GroupElement, TangentPair,
};
use crate::matcore::{
    self, herm_inv_sqrt, herm_log, herm_sqrt, hermitian_part, identity, real, skew_part, svd,
    sym_sylvester_solve, to_real_coords, ComplexMatrix,
};
use crate::moment::{level_residual, require_level_set};

/// Relative singular-value cutoff for the row space of the assembled
/// level-set differential.
const DF_RANK_TOL: f64 = 1e-12;

fn injectivity(m: &ComplexMatrix) -> f64 {
    match svd(m) {
        Ok(s) if s.sigma_max() > 0.0 => s.sigma_min() / s.sigma_max(),
        _ => 0.0,
    }
}

/// Membership in the I₁-stable set: `‖X*x‖ ≤ tol·k²` and `x` injective
/// (`σ_min > tol·σ_max`).
pub fn in_stable1(pt: &ConfigPoint, tol: f64) -> bool {
    tol > 0.0
        && (pt.fiber.adjoint() * &pt.base).norm() <= tol * pt.trunc.k2()
        && injectivity(&pt.base) > tol
}

pub(crate) fn require_stable1(pt: &ConfigPoint) -> Result<()> {
    if in_stable1(pt, pt.trunc.tol) {
        Ok(())
    } else {
        Err(Error::NotInStable1 {
            complex_residual: (pt.fiber.adjoint() * &pt.base).norm(),
            injectivity: injectivity(&pt.base),
        })
    }
}

fn stable3_violation(pt: &ConfigPoint, tol: f64) -> Option<String> {
    let (x, y) = (&pt.base, &pt.fiber);
    let k2 = pt.trunc.k2();
    let real_res = level_residual(pt).real;
    if real_res > tol * k2 {
        return Some(format!("|x*x - X*X - k^2| = {real_res:.3e}"));
    }
    let yx = y.adjoint() * x;
    let asym = (&yx - yx.adjoint()).norm();
    if asym > tol * k2 {
        return Some(format!("|X*x - x*X| = {asym:.3e}"));
    }
    for (name, m) in [("x+X", x + y), ("x-X", x - y)] {
        let ratio = injectivity(&m);
        if ratio <= tol {
            return Some(format!("{name} not injective (ratio {ratio:.3e})"));
        }
    }
    None
}

/// Membership in the I₃-stable set: the real moment equations for `μ₁, μ₂`
/// hold and both `x + X` and `x − X` are injective.
pub fn in_stable3(pt: &ConfigPoint, tol: f64) -> bool {
    tol > 0.0 && stable3_violation(pt, tol).is_none()
}

pub(crate) fn require_stable3(pt: &ConfigPoint) -> Result<()> {
    match stable3_violation(pt, pt.trunc.tol) {
        None => Ok(()),
        Some(reason) => Err(Error::NotInStable3 { reason }),
    }
}

/// Complexified group element carrying a point onto the level set.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupPart {
    /// Positive `g` with `point = act1(g, original)`.
    Positive(GroupElement),
    /// `point = act3(h, u, s)` where `s` is the canonical section point of the
    /// original's orbit pair.
    Complex { h: ComplexMatrix, u: GroupElement },
}

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub group_part: GroupPart,
    pub point: ConfigPoint,
    /// Largest level-set residual of `point`.
    pub residual: f64,
}

/// `g⁻² = (x*x)^{-1/2} γγ* (x*x)^{-1/2}` with
/// `γγ* = (k²/2)(Id + (Id + (4/k⁴)|x| X*X |x|)^{1/2})`.
pub fn inverse_square_factor(pt: &ConfigPoint) -> Result<ComplexMatrix> {
    require_stable1(pt)?;
    let k2 = pt.trunc.k2();
    let p = pt.trunc.p;
    let xx = hermitian_part(&(pt.base.adjoint() * &pt.base));
    let yy = hermitian_part(&(pt.fiber.adjoint() * &pt.fiber));
    let abs_x = herm_sqrt(&xx)?;
    let inner = hermitian_part(&(identity(p) + &abs_x * yy * &abs_x * real(4.0 / (k2 * k2))));
    let gamma = (identity(p) + herm_sqrt(&inner)?) * real(0.5 * k2);
    let xx_is = herm_inv_sqrt(&xx)?;
    Ok(hermitian_part(&(&xx_is * gamma * &xx_is)))
}

/// Closed-form projection of an I₁-stable point onto the level set along its
/// complexified orbit.
pub fn project1(pt: &ConfigPoint) -> Result<ProjectionResult> {
    let g_m2 = inverse_square_factor(pt)?;
    let g_inv = herm_sqrt(&g_m2)?;
    let g = herm_inv_sqrt(&g_m2)?;
    let point = pt.with_components(&pt.base * &g_inv, &pt.fiber * &g);
    let residual = level_residual(&point).max();
    Ok(ProjectionResult {
        group_part: GroupPart::Positive(GroupElement::positive(g)?),
        point,
        residual,
    })
}

/// A level-set representative of the I₃-orbit of `pt`, built from the
/// canonical section point `s` of `psi3(pt)` as `act3(−¼ log(Id + A*A), Id, s)`
/// with `A` the graph operator. Only determined up to the unitary action.
pub fn project3(pt: &ConfigPoint) -> Result<ProjectionResult> {
    let image = psi3(pt)?;
    let a = graph_operator(&image.pair)?;
    let section = psi3_section(&image.pair, pt.trunc.k)?;
    let section = ConfigPoint {
        trunc: pt.trunc,
        ..section
    };
    let p = pt.trunc.p;
    let h = herm_log(&hermitian_part(&(identity(p) + a.adjoint() * &a)))? * real(-0.25);
    let u = GroupElement::identity(p);
    let point = act3(&h, &u, &section)?;
    let residual = level_residual(&point).max();
    Ok(ProjectionResult {
        group_part: GroupPart::Complex { h, u },
        point,
        residual,
    })
}

/// g-orthogonal projection onto the orbit directions `(−x a, −X a)`, `a`
/// skew-Hermitian: solves `(M a + a M)/2 = −skew(x*Z + X*T)`, `M = x*x + X*X`.
pub fn orbit_tangent_projection(pt: &ConfigPoint, v: &TangentPair) -> Result<TangentPair> {
    require_level_set(pt)?;
    orbit_projection_unchecked(pt, v)
}

fn orbit_projection_unchecked(pt: &ConfigPoint, v: &TangentPair) -> Result<TangentPair> {
    check_tangent(pt, v)?;
    let (x, y) = (&pt.base, &pt.fiber);
    let m = hermitian_part(&(x.adjoint() * x + y.adjoint() * y));
    let s = -skew_part(&(x.adjoint() * &v.base + y.adjoint() * &v.fiber));
    let a = sym_sylvester_solve(&m, &s)?;
    Ok(TangentPair {
        base: -(x * &a),
        fiber: -(y * &a),
    })
}

fn check_tangent(pt: &ConfigPoint, v: &TangentPair) -> Result<()> {
    if v.shape() == pt.base.shape() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "tangent vector {:?} at point {:?}",
            v.shape(),
            pt.base.shape()
        )))
    }
}

/// Real matrix of `dF(Z, T) = (X*Z + T*x, x*Z + Z*x − X*T − T*X)` in the real
/// coordinates of [`TangentPair::to_real`].
fn assemble_df(pt: &ConfigPoint) -> DMatrix<f64> {
    let (n, p) = (pt.trunc.n(), pt.trunc.p);
    let (x, y) = (&pt.base, &pt.fiber);
    let dim = 4 * n * p;
    let rows = 4 * p * p;
    let mut op = DMatrix::zeros(rows, dim);
    let mut unit = vec![0.0; dim];
    let mut out = Vec::with_capacity(rows);
    for col in 0..dim {
        unit[col] = 1.0;
        let e = TangentPair::from_real(n, p, &unit);
        unit[col] = 0.0;
        let complex = y.adjoint() * &e.base + e.fiber.adjoint() * x;
        let xz = x.adjoint() * &e.base;
        let yt = y.adjoint() * &e.fiber;
        let hermitian = &xz + xz.adjoint() - &yt - yt.adjoint();
        out.clear();
        to_real_coords(&complex, &mut out);
        to_real_coords(&hermitian, &mut out);
        op.set_column(col, &DVector::from_column_slice(&out));
    }
    op
}

/// Precomputed tangent decomposition at a level-set point.
#[derive(Debug, Clone)]
pub struct SliceBasis {
    pub base: ConfigPoint,
    /// Real dimension of the orbit directions, `p²`.
    pub orbit_dim: usize,
    /// Orthonormal basis (columns) of the row space of `dF`, the g-normal
    /// space of the level set.
    normal: DMatrix<f64>,
}

impl SliceBasis {
    pub fn new(pt: &ConfigPoint) -> Result<Self> {
        require_level_set(pt)?;
        let normal = matcore::real_row_space(&assemble_df(pt), DF_RANK_TOL)?;
        Ok(SliceBasis {
            base: pt.clone(),
            orbit_dim: pt.trunc.p * pt.trunc.p,
            normal,
        })
    }

    /// Rank of `dF`; `3p²` at every level-set point.
    pub fn normal_dim(&self) -> usize {
        self.normal.ncols()
    }

    pub fn orbit(&self, v: &TangentPair) -> Result<TangentPair> {
        orbit_projection_unchecked(&self.base, v)
    }

    pub fn level(&self, v: &TangentPair) -> Result<TangentPair> {
        check_tangent(&self.base, v)?;
        let (n, p) = (self.base.trunc.n(), self.base.trunc.p);
        let coords = DVector::from_vec(v.to_real());
        let normal_part = &self.normal * (self.normal.transpose() * &coords);
        Ok(TangentPair::from_real(
            n,
            p,
            (coords - normal_part).as_slice(),
        ))
    }

    pub fn horizontal(&self, v: &TangentPair) -> Result<TangentPair> {
        let level = self.level(v)?;
        let orbit = self.orbit(&level)?;
        Ok(&level - &orbit)
    }

    /// Projection onto `I_j` applied to the orbit directions.
    pub fn rotated_orbit(&self, j: ComplexStructure, v: &TangentPair) -> Result<TangentPair> {
        Ok(j.apply(&self.orbit(&j.apply_inverse(v))?))
    }

    /// Splits `v` into its orbit, `I₁`-, `I₂`-, `I₃`-rotated orbit and
    /// horizontal components, in that order.
    pub fn decompose(&self, v: &TangentPair) -> Result<[TangentPair; 5]> {
        Ok([
            self.orbit(v)?,
            self.rotated_orbit(ComplexStructure::I1, v)?,
            self.rotated_orbit(ComplexStructure::I2, v)?,
            self.rotated_orbit(ComplexStructure::I3, v)?,
            self.horizontal(v)?,
        ])
    }

    /// Evaluates `dF` on `v`, returning the Frobenius norm of the result.
    pub fn df_norm(&self, v: &TangentPair) -> f64 {
        let (x, y) = (&self.base.base, &self.base.fiber);
        let complex = y.adjoint() * &v.base + v.fiber.adjoint() * x;
        let xz = x.adjoint() * &v.base;
        let yt = y.adjoint() * &v.fiber;
        let hermitian = &xz + xz.adjoint() - &yt - yt.adjoint();
        (complex.norm_squared() + hermitian.norm_squared()).sqrt()
    }

    pub fn pairing(&self, which: Pairing, v1: &TangentPair, v2: &TangentPair) -> Result<f64> {
        let h1 = self.horizontal(v1)?;
        let h2 = self.horizontal(v2)?;
        match which {
            Pairing::Metric => metric_g(&h1, &h2),
            Pairing::Omega(j) => omega(j, &h1, &h2),
        }
    }
}

/// g-orthogonal projection onto the tangent space of the level set.
pub fn levelset_tangent_projection(pt: &ConfigPoint, v: &TangentPair) -> Result<TangentPair> {
    SliceBasis::new(pt)?.level(v)
}

/// Projection onto the horizontal slice: level-set tangent directions
/// g-orthogonal to the orbit.
pub fn horizontal_projection(pt: &ConfigPoint, v: &TangentPair) -> Result<TangentPair> {
    SliceBasis::new(pt)?.horizontal(v)
}

/// Which bilinear form to evaluate on the slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    Metric,
    Omega(ComplexStructure),
}

/// The reduced metric or symplectic forms: the ambient form evaluated on the
/// horizontal parts of `v1`, `v2`.
pub fn reduced_pairing(
    pt: &ConfigPoint,
    v1: &TangentPair,
    v2: &TangentPair,
    which: Pairing,
) -> Result<f64> {
    SliceBasis::new(pt)?.pairing(which, v1, v2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hkspace::{act1, Truncation};
    use crate::matcore::{c64, from_row_major, C64};
    use crate::sample::{Sampler, Space};
    use approx::assert_abs_diff_eq;

    fn col(entries: &[C64]) -> ComplexMatrix {
        from_row_major(entries.len(), 1, entries).unwrap()
    }

    fn s2_point() -> ConfigPoint {
        let r2 = 2f64.sqrt();
        ConfigPoint::new(
            Truncation::new(1, 1, r2).unwrap(),
            col(&[real(r2), real(0.0)]),
            col(&[real(0.0), real(1.0)]),
        )
        .unwrap()
    }

    fn s3_point() -> ConfigPoint {
        let r2 = 2f64.sqrt();
        ConfigPoint::new(
            Truncation::new(1, 1, r2).unwrap(),
            col(&[real(r2), real(0.5 * r2)]),
            col(&[real(0.0), real(-0.5 * r2)]),
        )
        .unwrap()
    }

    #[test]
    fn stable1_examples() {
        let t = Truncation::new(2, 2, 1.0).unwrap();
        assert!(in_stable1(&ConfigPoint::reference(t), 1e-9));
        let mut pt = ConfigPoint::reference(t);
        pt.base[(1, 1)] = real(0.0);
        assert!(!in_stable1(&pt, 1e-9));
        assert!(in_stable1(&s2_point(), 1e-9));
    }

    #[test]
    fn stable3_examples() {
        let t = Truncation::new(2, 3, 1.4).unwrap();
        assert!(in_stable3(&ConfigPoint::reference(t), 1e-9));
        assert!(in_stable3(&s3_point(), 1e-9));
        assert!(!in_stable3(&s2_point(), 1e-9));
    }

    #[test]
    fn project1_examples() {
        let t = Truncation::new(2, 1, 1.3).unwrap();
        let res = project1(&ConfigPoint::reference(t)).unwrap();
        assert!((&res.point.base - &ConfigPoint::reference(t).base).norm() <= 1e-14);

        let pt = ConfigPoint::new(
            Truncation::new(1, 1, 1.0).unwrap(),
            col(&[real(2.0), real(0.0)]),
            ComplexMatrix::zeros(2, 1),
        )
        .unwrap();
        let res = project1(&pt).unwrap();
        assert_abs_diff_eq!(res.point.base[(0, 0)].re, 1.0, epsilon = 1e-14);

        let res = project1(&s2_point()).unwrap();
        let GroupPart::Positive(g) = &res.group_part else {
            panic!()
        };
        assert_abs_diff_eq!(
            1.0 / (g.mat[(0, 0)].re * g.mat[(0, 0)].re),
            1.3660254,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(res.point.base[(0, 0)].re, 1.6528917, epsilon = 1e-7);
        assert_abs_diff_eq!(res.point.fiber[(1, 0)].re, 0.8555996, epsilon = 1e-7);
        assert!(res.residual <= 1e-14);
        let back = act1(g, &s2_point()).unwrap();
        assert!((&back.base - &res.point.base).norm() <= 1e-14);
    }

    #[test]
    fn project1_rejects_unstable() {
        let pt = ConfigPoint::new(
            Truncation::new(1, 1, 1.0).unwrap(),
            col(&[real(1.0), real(0.0)]),
            col(&[real(1.0), real(0.0)]),
        )
        .unwrap();
        assert!(matches!(project1(&pt), Err(Error::NotInStable1 { .. })));
    }

    #[test]
    fn project3_example() {
        let res = project3(&s3_point()).unwrap();
        let GroupPart::Complex { h, .. } = &res.group_part else {
            panic!()
        };
        assert_abs_diff_eq!(h[(0, 0)].re, -0.1732868, epsilon = 1e-7);
        // √2·(cosh h, ½(cosh h − sinh h)) and √2·(sinh h, −½(cosh h − sinh h)), h = ¼ log 2
        let want_x = [1.4354999728, 0.5946035575];
        let want_y = [0.2462928578, -0.5946035575];
        for i in 0..2 {
            assert_abs_diff_eq!(res.point.base[(i, 0)].re, want_x[i], epsilon = 1e-9);
            assert_abs_diff_eq!(res.point.fiber[(i, 0)].re, want_y[i], epsilon = 1e-9);
        }
        assert!(res.residual <= 1e-12);
        assert_abs_diff_eq!(
            crate::hkspace::flat_potential(&res.point),
            0.2071068,
            epsilon = 1e-7
        );
    }

    #[test]
    fn project3_on_level_set_preserves_flat_potential() {
        let mut s = Sampler::new(3);
        let t = Truncation::new(2, 3, 1.1).unwrap();
        let pt = s.point(Space::Level, t).unwrap();
        let res = project3(&pt).unwrap();
        assert!(res.residual <= 1e-9 * t.k2());
        assert_abs_diff_eq!(
            crate::hkspace::flat_potential(&res.point),
            crate::hkspace::flat_potential(&pt),
            epsilon = 1e-10
        );
    }

    #[test]
    fn orbit_projection_examples() {
        let r2 = 2f64.sqrt();
        let t = Truncation::new(1, 1, r2).unwrap();
        let base = ConfigPoint::reference(t);
        let radial =
            TangentPair::new(col(&[real(r2), real(0.0)]), ComplexMatrix::zeros(2, 1)).unwrap();
        assert!(orbit_tangent_projection(&base, &radial).unwrap().norm() <= 1e-15);
        let rotation =
            TangentPair::new(col(&[c64(0.0, r2), real(0.0)]), ComplexMatrix::zeros(2, 1)).unwrap();
        let out = orbit_tangent_projection(&base, &rotation).unwrap();
        assert!((&out - &rotation).norm() <= 1e-14);

        let mut s = Sampler::new(11);
        let t = Truncation::new(2, 2, 1.2).unwrap();
        let pt = s.point(Space::Level, t).unwrap();
        let a = s.skew(2);
        let v = crate::moment::infinitesimal_action(&pt, &a);
        assert!((&orbit_tangent_projection(&pt, &v).unwrap() - &v).norm() <= 1e-11);
    }

    #[test]
    fn level_projection_examples() {
        let mut s = Sampler::new(5);
        let t = Truncation::new(2, 3, 0.9).unwrap();
        let pt = s.point(Space::Level, t).unwrap();
        let basis = SliceBasis::new(&pt).unwrap();
        assert_eq!(basis.normal_dim(), 3 * 4);

        let orbit = crate::moment::infinitesimal_action(&pt, &s.skew(2));
        assert!((&basis.level(&orbit).unwrap() - &orbit).norm() <= 1e-10);

        let violation = TangentPair {
            base: &pt.base * s.hermitian(2, 1.0),
            fiber: ComplexMatrix::zeros(5, 2),
        };
        let out = basis.level(&violation).unwrap();
        assert!(basis.df_norm(&out) <= 1e-9 * violation.norm());
        assert!((&basis.level(&out).unwrap() - &out).norm() <= 1e-10);

        assert_eq!(basis.level(&TangentPair::zeros(5, 2)).unwrap().norm(), 0.0);
    }

    #[test]
    fn horizontal_projection_properties() {
        let mut s = Sampler::new(7);
        let t = Truncation::new(2, 2, 1.5).unwrap();
        let pt = s.point(Space::Level, t).unwrap();
        let basis = SliceBasis::new(&pt).unwrap();
        let v = s.tangent(4, 2);
        let h = basis.horizontal(&v).unwrap();
        assert!((&basis.horizontal(&h).unwrap() - &h).norm() <= 1e-10);
        assert!(basis.df_norm(&h) <= 1e-9 * v.norm());
        for _ in 0..3 {
            let o = crate::moment::infinitesimal_action(&pt, &s.skew(2));
            assert!(metric_g(&o, &h).unwrap().abs() <= 1e-10 * v.norm() * o.norm());
            assert!(basis.horizontal(&o).unwrap().norm() <= 1e-10 * o.norm());
        }
        for j in ComplexStructure::ALL {
            let jh = j.apply(&h);
            assert!((&basis.horizontal(&jh).unwrap() - &jh).norm() <= 1e-9 * h.norm());
        }
    }

    #[test]
    fn decomposition_reconstructs_and_is_orthogonal() {
        let mut s = Sampler::new(13);
        let t = Truncation::new(3, 2, 1.0).unwrap();
        let pt = s.point(Space::Level, t).unwrap();
        let basis = SliceBasis::new(&pt).unwrap();
        let v = s.tangent(5, 3);
        let parts = basis.decompose(&v).unwrap();
        let mut sum = TangentPair::zeros(5, 3);
        for part in &parts {
            sum = &sum + part;
        }
        assert!((&sum - &v).norm() <= 1e-8 * v.norm());
        for i in 0..5 {
            for j in 0..i {
                let gij = metric_g(&parts[i], &parts[j]).unwrap();
                assert!(
                    gij.abs() <= 1e-8 * v.norm() * v.norm(),
                    "blocks {i},{j}: {gij}"
                );
            }
        }
    }

    #[test]
    fn reduced_pairing_examples() {
        let mut s = Sampler::new(17);
        let t = Truncation::new(2, 2, 1.3).unwrap();
        let pt = s.point(Space::Level, t).unwrap();
        let basis = SliceBasis::new(&pt).unwrap();
        let v = s.tangent(4, 2);
        let w = s.tangent(4, 2);
        assert_abs_diff_eq!(
            basis
                .pairing(Pairing::Omega(ComplexStructure::I1), &v, &v)
                .unwrap(),
            0.0,
            epsilon = 1e-12
        );

        let h = basis.horizontal(&v).unwrap();
        let h = &h * (1.0 / h.norm());
        assert_abs_diff_eq!(
            basis.pairing(Pairing::Metric, &h, &h).unwrap(),
            1.0,
            epsilon = 1e-10
        );

        let o = crate::moment::infinitesimal_action(&pt, &s.skew(2));
        for which in [Pairing::Metric, Pairing::Omega(ComplexStructure::I2)] {
            assert!(basis.pairing(which, &o, &w).unwrap().abs() <= 1e-10 * o.norm() * w.norm());
        }

        // representative independence under the unitary action
        let u = s.unitary(2);
        let moved = act1(&GroupElement::unitary(u.clone()).unwrap(), &pt).unwrap();
        let push = |t: &TangentPair| t.right_mul(&u.adjoint());
        for which in [
            Pairing::Metric,
            Pairing::Omega(ComplexStructure::I1),
            Pairing::Omega(ComplexStructure::I2),
            Pairing::Omega(ComplexStructure::I3),
        ] {
            let here = reduced_pairing(&pt, &v, &w, which).unwrap();
            let there = reduced_pairing(&moved, &push(&v), &push(&w), which).unwrap();
            assert_abs_diff_eq!(here, there, epsilon = 1e-9);
        }
    }

    #[test]
    fn tangent_projections_require_level_set() {
        let v = TangentPair::zeros(2, 1);
        assert!(matches!(
            orbit_tangent_projection(&s2_point(), &v),
            Err(Error::NotOnLevelSet { .. })
        ));
        assert!(matches!(
            SliceBasis::new(&s2_point()),
            Err(Error::NotOnLevelSet { .. })
        ));
    }
}
