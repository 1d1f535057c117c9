//! The flat hyperkähler space of frame pairs `(x, X)`, truncated to `n = p + q`
//! dimensions: metric, the three complex structures, the symplectic forms, the
//! two group actions and the flat potential.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::matcore::{
    self, check_finite, herm_cosh_sinh, identity, im_inner, inner, mul_i, re_inner, real,
    ComplexMatrix, C64,
};

/// Default relative membership tolerance (scaled by `k²` where it applies).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Truncation dimensions and the level parameter `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub p: usize,
    pub q: usize,
    pub k: f64,
    /// Membership tolerance used by level-set and stable-set tests.
    pub tol: f64,
}

impl Truncation {
    pub fn new(p: usize, q: usize, k: f64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::BadTruncation(format!(
                "dimensions must be positive, got p={p}, q={q}"
            )));
        }
        if !(k.is_finite() && k != 0.0) {
            return Err(Error::BadTruncation(format!(
                "k must be finite and nonzero, got {k}"
            )));
        }
        Ok(Truncation {
            p,
            q,
            k,
            tol: DEFAULT_TOL,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::BadTruncation(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    pub fn k2(&self) -> f64 {
        self.k * self.k
    }

    /// Whether `k²/2` is a positive integer, the condition under which the
    /// determinant character `g ↦ det(g)^{k²/2}` exists on the unitary group.
    pub fn integrality_ok(&self) -> bool {
        character_exists(self.k)
    }
}

/// Whether `k²/2` is a positive integer (to relative precision `1e-9`).
pub fn character_exists(k: f64) -> bool {
    let half = k * k / 2.0;
    let nearest = half.round();
    nearest >= 1.0 && (half - nearest).abs() <= 1e-9 * half.max(1.0)
}

/// A point `(x, X)` of the tangent bundle: both components are `n×p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigPoint {
    pub trunc: Truncation,
    pub base: ComplexMatrix,
    pub fiber: ComplexMatrix,
}

impl ConfigPoint {
    pub fn new(trunc: Truncation, base: ComplexMatrix, fiber: ComplexMatrix) -> Result<Self> {
        let want = (trunc.n(), trunc.p);
        if base.shape() != want || fiber.shape() != want {
            return Err(Error::ShapeMismatch(format!(
                "point components must be {}x{}, got {:?} and {:?}",
                want.0,
                want.1,
                base.shape(),
                fiber.shape()
            )));
        }
        check_finite(&base, "base component")?;
        check_finite(&fiber, "fiber component")?;
        Ok(ConfigPoint { trunc, base, fiber })
    }

    /// `(k·[Id_p; 0], 0)`, the reference point of the level set.
    pub fn reference(trunc: Truncation) -> Self {
        let (n, p) = (trunc.n(), trunc.p);
        let base =
            ComplexMatrix::from_fn(n, p, |i, j| if i == j { real(trunc.k) } else { real(0.0) });
        ConfigPoint {
            trunc,
            base,
            fiber: ComplexMatrix::zeros(n, p),
        }
    }

    pub(crate) fn with_components(&self, base: ComplexMatrix, fiber: ComplexMatrix) -> Self {
        ConfigPoint {
            trunc: self.trunc,
            base,
            fiber,
        }
    }

    /// Translate by a tangent vector (the space is affine).
    pub fn offset(&self, v: &TangentPair, t: f64) -> Self {
        self.with_components(
            &self.base + matcore::scale(&v.base, t),
            &self.fiber + matcore::scale(&v.fiber, t),
        )
    }
}

/// A tangent vector `(Z, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub base: ComplexMatrix,
    pub fiber: ComplexMatrix,
}

impl TangentPair {
    pub fn new(base: ComplexMatrix, fiber: ComplexMatrix) -> Result<Self> {
        if base.shape() != fiber.shape() {
            return Err(Error::ShapeMismatch(format!(
                "tangent components {:?} and {:?}",
                base.shape(),
                fiber.shape()
            )));
        }
        Ok(TangentPair { base, fiber })
    }

    pub fn zeros(n: usize, p: usize) -> Self {
        TangentPair {
            base: ComplexMatrix::zeros(n, p),
            fiber: ComplexMatrix::zeros(n, p),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.base.shape()
    }

    pub fn norm(&self) -> f64 {
        (self.base.norm_squared() + self.fiber.norm_squared()).sqrt()
    }

    /// Right multiplication of both components by a `p×p` matrix.
    pub fn right_mul(&self, m: &ComplexMatrix) -> Self {
        TangentPair {
            base: &self.base * m,
            fiber: &self.fiber * m,
        }
    }

    /// Flattens to `4np` reals, orthonormal for [`metric_g`].
    pub fn to_real(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.base.len());
        matcore::to_real_coords(&self.base, &mut out);
        matcore::to_real_coords(&self.fiber, &mut out);
        out
    }

    pub fn from_real(n: usize, p: usize, coords: &[f64]) -> Self {
        let half = 2 * n * p;
        TangentPair {
            base: matcore::from_real_coords(n, p, &coords[..half]),
            fiber: matcore::from_real_coords(n, p, &coords[half..]),
        }
    }
}

impl Add for &TangentPair {
    type Output = TangentPair;
    fn add(self, rhs: &TangentPair) -> TangentPair {
        TangentPair {
            base: &self.base + &rhs.base,
            fiber: &self.fiber + &rhs.fiber,
        }
    }
}

impl Sub for &TangentPair {
    type Output = TangentPair;
    fn sub(self, rhs: &TangentPair) -> TangentPair {
        TangentPair {
            base: &self.base - &rhs.base,
            fiber: &self.fiber - &rhs.fiber,
        }
    }
}

impl Neg for &TangentPair {
    type Output = TangentPair;
    fn neg(self) -> TangentPair {
        TangentPair {
            base: -&self.base,
            fiber: -&self.fiber,
        }
    }
}

impl Mul<f64> for &TangentPair {
    type Output = TangentPair;
    fn mul(self, s: f64) -> TangentPair {
        TangentPair {
            base: matcore::scale(&self.base, s),
            fiber: matcore::scale(&self.fiber, s),
        }
    }
}

/// One of the three complex structures of the quaternionic triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComplexStructure {
    I1,
    I2,
    I3,
}

impl ComplexStructure {
    pub const ALL: [ComplexStructure; 3] = [
        ComplexStructure::I1,
        ComplexStructure::I2,
        ComplexStructure::I3,
    ];

    pub fn index(self) -> u8 {
        match self {
            ComplexStructure::I1 => 1,
            ComplexStructure::I2 => 2,
            ComplexStructure::I3 => 3,
        }
    }

    /// `I₁(Z,T) = (iZ, −iT)`, `I₂(Z,T) = (T, −Z)`, `I₃(Z,T) = (iT, iZ)`.
    pub fn apply(self, v: &TangentPair) -> TangentPair {
        match self {
            ComplexStructure::I1 => TangentPair {
                base: mul_i(&v.base),
                fiber: -mul_i(&v.fiber),
            },
            ComplexStructure::I2 => TangentPair {
                base: v.fiber.clone(),
                fiber: -&v.base,
            },
            ComplexStructure::I3 => TangentPair {
                base: mul_i(&v.fiber),
                fiber: mul_i(&v.base),
            },
        }
    }

    /// `I⁻¹ = −I`.
    pub fn apply_inverse(self, v: &TangentPair) -> TangentPair {
        -&self.apply(v)
    }
}

impl TryFrom<u8> for ComplexStructure {
    type Error = Error;
    fn try_from(j: u8) -> Result<Self> {
        match j {
            1 => Ok(ComplexStructure::I1),
            2 => Ok(ComplexStructure::I2),
            3 => Ok(ComplexStructure::I3),
            other => Err(Error::BadIndex(other)),
        }
    }
}

pub fn apply_i(j: u8, v: &TangentPair) -> Result<TangentPair> {
    Ok(ComplexStructure::try_from(j)?.apply(v))
}

fn same_shape(v1: &TangentPair, v2: &TangentPair) -> Result<()> {
    if v1.shape() == v2.shape() && v1.fiber.shape() == v2.fiber.shape() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "tangent pairs {:?} and {:?}",
            v1.shape(),
            v2.shape()
        )))
    }
}

/// `g = Re Tr Z₁*Z₂ + Re Tr T₁*T₂`.
pub fn metric_g(v1: &TangentPair, v2: &TangentPair) -> Result<f64> {
    same_shape(v1, v2)?;
    Ok(re_inner(&v1.base, &v2.base) + re_inner(&v1.fiber, &v2.fiber))
}

/// `Ω = Tr(T₁*Z₂) − Tr(T₂*Z₁)`, the I₁-holomorphic symplectic form.
pub fn omega_c(v1: &TangentPair, v2: &TangentPair) -> Result<C64> {
    same_shape(v1, v2)?;
    Ok(inner(&v1.fiber, &v2.base) - inner(&v2.fiber, &v1.base))
}

/// `ω₁ = Im Tr Z₁*Z₂ − Im Tr T₁*T₂`, `ω₂ = Re Ω`, `ω₃ = Im Ω`.
pub fn omega(j: ComplexStructure, v1: &TangentPair, v2: &TangentPair) -> Result<f64> {
    same_shape(v1, v2)?;
    Ok(match j {
        ComplexStructure::I1 => im_inner(&v1.base, &v2.base) - im_inner(&v1.fiber, &v2.fiber),
        ComplexStructure::I2 => omega_c(v1, v2)?.re,
        ComplexStructure::I3 => omega_c(v1, v2)?.im,
    })
}

/// An element of the complexified truncated group `GL(p)`, with optional
/// structure flags.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub mat: ComplexMatrix,
    pub unitary: bool,
    pub positive: bool,
}

impl GroupElement {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "group element must be square, got {:?}",
                mat.shape()
            )));
        }
        check_finite(&mat, "group element")?;
        if mat.determinant().norm() <= f64::MIN_POSITIVE {
            return Err(Error::Singular);
        }
        Ok(GroupElement {
            mat,
            unitary: false,
            positive: false,
        })
    }

    pub fn identity(p: usize) -> Self {
        GroupElement {
            mat: identity(p),
            unitary: true,
            positive: true,
        }
    }

    pub fn unitary(mat: ComplexMatrix) -> Result<Self> {
        let mut g = Self::new(mat)?;
        let deviation = matcore::unitary_deviation(&g.mat);
        if deviation > 1e-10 {
            return Err(Error::NotUnitary { deviation });
        }
        g.unitary = true;
        Ok(g)
    }

    pub fn positive(mat: ComplexMatrix) -> Result<Self> {
        let h = matcore::ensure_hermitian(&mat)?;
        let spectrum = matcore::herm_eig(&h)?;
        if spectrum.min() <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: spectrum.min(),
            });
        }
        let mut g = Self::new(h)?;
        g.positive = true;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        if self.unitary {
            Ok(self.mat.adjoint())
        } else {
            matcore::inverse(&self.mat)
        }
    }

    /// Group product `self · other`; flags are not propagated except for
    /// unitary·unitary.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            mat: &self.mat * &other.mat,
            unitary: self.unitary && other.unitary,
            positive: false,
        }
    }
}

/// The I₁-holomorphic action `g·(x, X) = (x g⁻¹, X g*)`.
pub fn act1(g: &GroupElement, pt: &ConfigPoint) -> Result<ConfigPoint> {
    if g.dim() != pt.trunc.p {
        return Err(Error::ShapeMismatch(format!(
            "group element of size {} acting on p={}",
            g.dim(),
            pt.trunc.p
        )));
    }
    let inv = g.inverse()?;
    Ok(pt.with_components(&pt.base * inv, &pt.fiber * g.mat.adjoint()))
}

/// The I₃-holomorphic action of `exp(ia)·u` with `h = i·a` Hermitian:
/// `x' = x u⁻¹ cosh h − X u⁻¹ sinh h`, `X' = −x u⁻¹ sinh h + X u⁻¹ cosh h`.
pub fn act3(h: &ComplexMatrix, u: &GroupElement, pt: &ConfigPoint) -> Result<ConfigPoint> {
    let p = pt.trunc.p;
    if h.shape() != (p, p) || u.dim() != p {
        return Err(Error::ShapeMismatch(format!(
            "act3 parameters {:?}/{} for p={p}",
            h.shape(),
            u.dim()
        )));
    }
    let deviation = matcore::unitary_deviation(&u.mat);
    if deviation > 1e-10 {
        return Err(Error::NotUnitary { deviation });
    }
    let asymmetry = matcore::hermitian_deviation(h);
    if asymmetry > matcore::HERMITIAN_TOL * (1.0 + h.norm()) {
        return Err(Error::NotHermitian { asymmetry });
    }
    let u_inv = u.mat.adjoint();
    let xu = &pt.base * &u_inv;
    let yu = &pt.fiber * &u_inv;
    if h.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok(pt.with_components(xu, yu));
    }
    let (ch, sh) = herm_cosh_sinh(h)?;
    Ok(pt.with_components(&xu * &ch - &yu * &sh, &yu * &ch - &xu * &sh))
}

/// `K = ¼ Tr(x*x + X*X − k² Id)`.
pub fn flat_potential(pt: &ConfigPoint) -> f64 {
    0.25 * (pt.base.norm_squared() + pt.fiber.norm_squared() - pt.trunc.p as f64 * pt.trunc.k2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c64, from_row_major, I};
    use approx::assert_abs_diff_eq;

    fn col(entries: &[C64]) -> ComplexMatrix {
        from_row_major(entries.len(), 1, entries).unwrap()
    }

    fn s2_point() -> ConfigPoint {
        let t = Truncation::new(1, 1, 2f64.sqrt()).unwrap();
        ConfigPoint::new(
            t,
            col(&[real(2f64.sqrt()), real(0.0)]),
            col(&[real(0.0), real(1.0)]),
        )
        .unwrap()
    }

    #[test]
    fn truncation_validation() {
        assert!(Truncation::new(0, 1, 1.0).is_err());
        assert!(Truncation::new(1, 0, 1.0).is_err());
        assert!(Truncation::new(1, 1, 0.0).is_err());
        assert!(Truncation::new(1, 1, 2f64.sqrt()).unwrap().integrality_ok());
        assert!(Truncation::new(1, 1, 2.0).unwrap().integrality_ok());
        assert!(!Truncation::new(1, 1, 1.0).unwrap().integrality_ok());
        assert_eq!(Truncation::new(2, 3, 1.0).unwrap().n(), 5);
    }

    #[test]
    fn point_shape_checked() {
        let t = Truncation::new(2, 1, 1.0).unwrap();
        assert!(
            ConfigPoint::new(t, ComplexMatrix::zeros(3, 2), ComplexMatrix::zeros(2, 2)).is_err()
        );
    }

    #[test]
    fn metric_examples() {
        let e11 = TangentPair::new(col(&[real(1.0)]), col(&[real(0.0)])).unwrap();
        assert_eq!(metric_g(&e11, &e11).unwrap(), 1.0);

        let v1 =
            TangentPair::new(col(&[real(1.0), real(0.0)]), ComplexMatrix::zeros(2, 1)).unwrap();
        let v2 = TangentPair::new(col(&[I, real(0.0)]), ComplexMatrix::zeros(2, 1)).unwrap();
        assert_eq!(metric_g(&v1, &v2).unwrap(), 0.0);

        let v = TangentPair::new(col(&[c64(1.0, 2.0)]), col(&[c64(-0.5, 3.0)])).unwrap();
        let w = ComplexStructure::I1.apply(&v);
        assert_eq!(metric_g(&w, &w).unwrap(), metric_g(&v, &v).unwrap());

        let bad = TangentPair::zeros(3, 1);
        assert!(matches!(metric_g(&v1, &bad), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn complex_structure_examples() {
        let z = col(&[c64(1.0, -2.0), c64(0.5, 0.25)]);
        let v = TangentPair::new(z.clone(), ComplexMatrix::zeros(2, 1)).unwrap();
        assert_eq!(ComplexStructure::I1.apply(&v).base, mul_i(&z));

        let w = TangentPair::new(z.clone(), col(&[c64(3.0, 1.0), c64(-1.0, 0.0)])).unwrap();
        let twice = ComplexStructure::I2.apply(&ComplexStructure::I2.apply(&w));
        assert_eq!(twice, -&w);
        assert_eq!(
            ComplexStructure::I1.apply(&ComplexStructure::I2.apply(&w)),
            ComplexStructure::I3.apply(&w)
        );
        assert!(matches!(apply_i(4, &w), Err(Error::BadIndex(4))));
    }

    #[test]
    fn omega_examples() {
        let v1 =
            TangentPair::new(col(&[real(1.0), real(0.0)]), ComplexMatrix::zeros(2, 1)).unwrap();
        let v2 = TangentPair::new(col(&[I, real(0.0)]), ComplexMatrix::zeros(2, 1)).unwrap();
        assert_eq!(omega(ComplexStructure::I1, &v1, &v2).unwrap(), 1.0);
        for j in ComplexStructure::ALL {
            assert_eq!(omega(j, &v1, &v1).unwrap(), 0.0);
        }
        let v3 =
            TangentPair::new(ComplexMatrix::zeros(2, 1), col(&[real(1.0), real(0.0)])).unwrap();
        assert_eq!(omega(ComplexStructure::I2, &v1, &v3).unwrap(), -1.0);
    }

    #[test]
    fn omega_c_examples() {
        let z = col(&[c64(1.0, 2.0), c64(0.0, -1.0)]);
        let t = col(&[c64(0.5, 0.5), c64(2.0, 0.0)]);
        let zero = ComplexMatrix::zeros(2, 1);
        let a = TangentPair::new(z.clone(), zero.clone()).unwrap();
        let b = TangentPair::new(zero, t.clone()).unwrap();
        let tz = inner(&t, &z);
        assert_eq!(omega_c(&a, &b).unwrap(), -tz);
        assert_eq!(omega_c(&b, &a).unwrap(), tz);
        assert_eq!(omega_c(&a, &a).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn act1_examples() {
        let pt = s2_point();
        let same = act1(&GroupElement::identity(1), &pt).unwrap();
        assert_eq!(same, pt);

        let two = GroupElement::new(from_row_major(1, 1, &[real(2.0)]).unwrap()).unwrap();
        let moved = act1(&two, &pt).unwrap();
        assert_abs_diff_eq!(moved.base[(0, 0)].re, 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(moved.fiber[(1, 0)].re, 2.0, epsilon = 1e-15);

        let ui = GroupElement::unitary(from_row_major(1, 1, &[I]).unwrap()).unwrap();
        let rotated = act1(&ui, &pt).unwrap();
        assert_abs_diff_eq!(
            (rotated.base[(0, 0)] - (-I * 2f64.sqrt())).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!((rotated.fiber[(1, 0)] - (-I)).norm(), 0.0, epsilon = 1e-15);

        let singular = from_row_major(1, 1, &[real(0.0)]).unwrap();
        assert!(matches!(GroupElement::new(singular), Err(Error::Singular)));
    }

    #[test]
    fn act3_examples() {
        let pt = s2_point();
        let zero = ComplexMatrix::zeros(1, 1);
        assert_eq!(act3(&zero, &GroupElement::identity(1), &pt).unwrap(), pt);

        let t = 0.37;
        let h = from_row_major(1, 1, &[real(t)]).unwrap();
        let moved = act3(&h, &GroupElement::identity(1), &pt).unwrap();
        let (x, y) = (pt.base.clone(), pt.fiber.clone());
        let want_x = &x * real(t.cosh()) - &y * real(t.sinh());
        let want_y = -&x * real(t.sinh()) + &y * real(t.cosh());
        assert!((moved.base - want_x).norm() <= 1e-15);
        assert!((moved.fiber - want_y).norm() <= 1e-15);

        let back = act3(
            &h,
            &GroupElement::identity(1),
            &act3(&-&h, &GroupElement::identity(1), &pt).unwrap(),
        )
        .unwrap();
        assert!((back.base - &pt.base).norm() <= 1e-11);
        assert!((back.fiber - &pt.fiber).norm() <= 1e-11);

        let not_herm = from_row_major(1, 1, &[I]).unwrap();
        assert!(matches!(
            act3(&not_herm, &GroupElement::identity(1), &pt),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn flat_potential_examples() {
        let t = Truncation::new(2, 3, 1.7).unwrap();
        assert_eq!(flat_potential(&ConfigPoint::reference(t)), 0.0);
        assert_abs_diff_eq!(flat_potential(&s2_point()), 0.25, epsilon = 1e-15);
    }
}
