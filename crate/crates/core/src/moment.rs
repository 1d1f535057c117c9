//! Moment maps of the unitary action, the level-set residual and the
//! pointwise check of the moment-map defining equation.
//!
//! Moment values are stored as `p×p` matrices `m` representing the functional
//! `a ↦ Tr(m·a)` on skew-Hermitian `a`.

use crate::error::{Error, Result};
use crate::hkspace::{omega, ComplexStructure, ConfigPoint, TangentPair};
use crate::matcore::{self, identity, mul_i, real, ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentKind {
    Mu1,
    Mu2,
    Mu3,
    Mu4,
    MuC,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue {
    pub kind: MomentKind,
    pub value: ComplexMatrix,
}

/// The four quadratic expressions behind every moment map, `x*x`, `X*X`,
/// `X*x` and `x*X`, evaluated for (possibly different) left and right factors.
fn gram(
    base_l: &ComplexMatrix,
    fiber_l: &ComplexMatrix,
    base_r: &ComplexMatrix,
    fiber_r: &ComplexMatrix,
) -> [ComplexMatrix; 4] {
    [
        base_l.adjoint() * base_r,
        fiber_l.adjoint() * fiber_r,
        fiber_l.adjoint() * base_r,
        base_l.adjoint() * fiber_r,
    ]
}

fn assemble(
    kind: MomentKind,
    xx: &ComplexMatrix,
    yy: &ComplexMatrix,
    yx: &ComplexMatrix,
    xy: &ComplexMatrix,
) -> ComplexMatrix {
    match kind {
        // −(i/2)(x*x − X*X)
        MomentKind::Mu1 => mul_i(&(xx - yy)) * real(-0.5),
        // ½(X*x − x*X)
        MomentKind::Mu2 => (yx - xy) * real(0.5),
        // −(i/2)(X*x + x*X)
        MomentKind::Mu3 => mul_i(&(yx + xy)) * real(-0.5),
        // (i/2)(x*x + X*X)
        MomentKind::Mu4 => mul_i(&(xx + yy)) * real(0.5),
        // X*x
        MomentKind::MuC => yx.clone(),
    }
}

pub fn moment(kind: MomentKind, pt: &ConfigPoint) -> MomentValue {
    let [xx, yy, yx, xy] = gram(&pt.base, &pt.fiber, &pt.base, &pt.fiber);
    MomentValue {
        kind,
        value: assemble(kind, &xx, &yy, &yx, &xy),
    }
}

/// Directional derivative of the stored moment matrix along `v`. Every moment
/// is quadratic, so this is exact: `d(A*B) = dA*·B + A*·dB`.
pub fn moment_derivative(kind: MomentKind, pt: &ConfigPoint, v: &TangentPair) -> ComplexMatrix {
    let [xx1, yy1, yx1, xy1] = gram(&v.base, &v.fiber, &pt.base, &pt.fiber);
    let [xx2, yy2, yx2, xy2] = gram(&pt.base, &pt.fiber, &v.base, &v.fiber);
    assemble(kind, &(xx1 + xx2), &(yy1 + yy2), &(yx1 + yx2), &(xy1 + xy2))
}

/// Frobenius residuals of the level-set equations `X*x = 0`, `x*x − X*X = k²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelResidual {
    pub complex: f64,
    pub real: f64,
}

impl LevelResidual {
    pub fn max(&self) -> f64 {
        self.complex.max(self.real)
    }
}

pub fn level_residual(pt: &ConfigPoint) -> LevelResidual {
    let (x, y) = (&pt.base, &pt.fiber);
    let p = pt.trunc.p;
    LevelResidual {
        complex: (y.adjoint() * x).norm(),
        real: (x.adjoint() * x - y.adjoint() * y - identity(p) * real(pt.trunc.k2())).norm(),
    }
}

/// Membership in the level set at the truncation's tolerance (scaled by `k²`).
pub fn on_level_set(pt: &ConfigPoint) -> bool {
    level_residual(pt).max() <= pt.trunc.tol * pt.trunc.k2()
}

pub(crate) fn require_level_set(pt: &ConfigPoint) -> Result<()> {
    let r = level_residual(pt);
    if r.max() <= pt.trunc.tol * pt.trunc.k2() {
        Ok(())
    } else {
        Err(Error::NotOnLevelSet {
            complex_residual: r.complex,
            real_residual: r.real,
        })
    }
}

/// Level value of `μ₁`: `−(i/2) k² Id`.
pub fn level_value(pt: &ConfigPoint) -> ComplexMatrix {
    identity(pt.trunc.p) * C64::new(0.0, -0.5 * pt.trunc.k2())
}

/// Infinitesimal generator of the unitary action in direction `a`,
/// `(−x a, −X a)` (equivalently `(−x a, X a*)` for skew `a`).
pub fn infinitesimal_action(pt: &ConfigPoint, a: &ComplexMatrix) -> TangentPair {
    TangentPair {
        base: -(&pt.base * a),
        fiber: -(&pt.fiber * a),
    }
}

/// Both sides of `d⟨μ_j, a⟩(v) = ω_j(X^a, v)`. The left side differentiates
/// the quadratic moment in closed form; the right side evaluates the
/// symplectic form on the generator.
pub fn moment_pairing_check(
    pt: &ConfigPoint,
    a: &ComplexMatrix,
    v: &TangentPair,
    j: ComplexStructure,
) -> Result<(f64, f64)> {
    let p = pt.trunc.p;
    if a.shape() != (p, p) {
        return Err(Error::ShapeMismatch(format!(
            "Lie algebra element {:?} for p={p}",
            a.shape()
        )));
    }
    matcore::ensure_skew(a, 1e-10)?;
    let kind = match j {
        ComplexStructure::I1 => MomentKind::Mu1,
        ComplexStructure::I2 => MomentKind::Mu2,
        ComplexStructure::I3 => MomentKind::Mu3,
    };
    let dmu = moment_derivative(kind, pt, v);
    let lhs = matcore::trace(&(dmu * a)).re;
    let generator = match j {
        ComplexStructure::I1 => infinitesimal_action(pt, a),
        ComplexStructure::I2 | ComplexStructure::I3 => TangentPair {
            base: -(&pt.base * a),
            fiber: &pt.fiber * a.adjoint(),
        },
    };
    let rhs = omega(j, &generator, v)?;
    Ok((lhs, rhs))
}
