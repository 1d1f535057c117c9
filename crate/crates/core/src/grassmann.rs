//! Truncated Grassmannian of `p`-planes in `ℂⁿ`: subspaces, the two
//! submersions from the stable sets with explicit sections, graph operators,
//! characteristic angles and the curvature tensor.

use crate::error::{Error, Result};
use crate::hkspace::{ConfigPoint, Truncation};
use crate::matcore::{
    self, complement_frame, herm_eig, mul_i, orthonormal_range, orthonormality_defect,
    projector_distance, re_inner, real, svd, ComplexMatrix,
};
use crate::quotient::{require_stable1, require_stable3};

/// Orthonormality accepted for a subspace frame.
pub const FRAME_TOL: f64 = 1e-11;
/// Smallest singular value of the stacked frames `[F_P F_Q]` accepted as
/// transversal.
pub const TRANSVERSAL_TOL: f64 = 1e-8;
const RANGE_TOL: f64 = 1e-10;

/// A subspace, held as an orthonormal frame. Compare subspaces with
/// [`Subspace::distance`], never by frame entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    frame: ComplexMatrix,
}

impl Subspace {
    pub fn new(frame: ComplexMatrix) -> Result<Self> {
        matcore::check_finite(&frame, "subspace frame")?;
        let deviation = orthonormality_defect(&frame);
        if deviation > FRAME_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Subspace { frame })
    }

    /// Column span of `m`; fails unless `m` has full column rank.
    pub fn span_of(m: &ComplexMatrix) -> Result<Self> {
        Ok(Subspace {
            frame: orthonormal_range(m, RANGE_TOL)?.full_rank()?,
        })
    }

    /// Span of the first `d` coordinate vectors of `ℂⁿ`.
    pub fn coordinate(n: usize, d: usize) -> Self {
        Subspace {
            frame: ComplexMatrix::from_fn(n, d, |i, j| real(if i == j { 1.0 } else { 0.0 })),
        }
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.frame.nrows()
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.frame * self.frame.adjoint()
    }

    pub fn distance(&self, other: &Subspace) -> f64 {
        projector_distance(&self.frame, &other.frame)
    }

    pub fn complement(&self) -> Result<Subspace> {
        Ok(Subspace {
            frame: complement_frame(&self.frame)?,
        })
    }

    /// Image under an ambient unitary.
    pub fn transform(&self, u: &ComplexMatrix) -> Result<Subspace> {
        Subspace::span_of(&(u * &self.frame))
    }
}

/// A point of the cotangent bundle: a `p`-plane `P` and `η: P^⊥ → P`, stored
/// as an `n×n` matrix with `η F_P = 0` and range inside `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    pub plane: Subspace,
    pub eta: ComplexMatrix,
}

impl CotangentPoint {
    pub fn new(plane: Subspace, eta: ComplexMatrix) -> Result<Self> {
        let n = plane.ambient();
        if eta.shape() != (n, n) {
            return Err(Error::BadCotangent(format!(
                "eta is {:?}, expected {n}x{n}",
                eta.shape()
            )));
        }
        let (on_plane, off_range) = cotangent_defects(&plane, &eta);
        let tol = 1e-10 * (1.0 + eta.norm());
        if on_plane > tol || off_range > tol {
            return Err(Error::BadCotangent(format!(
                "|eta F_P| = {on_plane:.3e}, |(Id - P)eta| = {off_range:.3e}"
            )));
        }
        Ok(CotangentPoint { plane, eta })
    }

    /// The fiber coordinate as a tangent vector `V = η*: P → P^⊥`, in the
    /// frames `(F_P, F_{P^⊥})`.
    pub fn tangent(&self) -> Result<GrTangent> {
        let perp = self.plane.complement()?;
        Ok(GrTangent {
            coords: perp.frame().adjoint() * self.eta.adjoint() * self.plane.frame(),
        })
    }
}

/// `(‖η F_P‖, ‖(Id − F_P F_P*) η‖)`.
pub fn cotangent_defects(plane: &Subspace, eta: &ComplexMatrix) -> (f64, f64) {
    let f = plane.frame();
    let n = plane.ambient();
    (
        (eta * f).norm(),
        ((matcore::identity(n) - plane.projector()) * eta).norm(),
    )
}

/// A transversal pair `(P, Q)` with `dim P = p`, `dim Q = q`, `P ∩ Q = {0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPair {
    pub p: Subspace,
    pub q: Subspace,
}

impl OrbitPair {
    pub fn new(p: Subspace, q: Subspace) -> Result<Self> {
        if p.ambient() != q.ambient() || p.dim() + q.dim() != p.ambient() {
            return Err(Error::ShapeMismatch(format!(
                "pair dimensions {} + {} in ambient {} / {}",
                p.dim(),
                q.dim(),
                p.ambient(),
                q.ambient()
            )));
        }
        let sigma_min = transversality(&p, &q)?;
        if sigma_min <= TRANSVERSAL_TOL {
            return Err(Error::NotTransversal { sigma_min });
        }
        Ok(OrbitPair { p, q })
    }

    pub fn truncation(&self, k: f64) -> Result<Truncation> {
        Truncation::new(self.p.dim(), self.q.dim(), k)
    }

    /// Simultaneous image of both subspaces under an ambient unitary.
    pub fn transform(&self, u: &ComplexMatrix) -> Result<OrbitPair> {
        OrbitPair::new(self.p.transform(u)?, self.q.transform(u)?)
    }

    pub fn distance(&self, other: &OrbitPair) -> f64 {
        self.p.distance(&other.p).max(self.q.distance(&other.q))
    }
}

/// Smallest singular value of the stacked frames `[F_P F_Q]`.
pub fn transversality(p: &Subspace, q: &Subspace) -> Result<f64> {
    let stacked = ComplexMatrix::from_fn(p.ambient(), p.dim() + q.dim(), |i, j| {
        if j < p.dim() {
            p.frame()[(i, j)]
        } else {
            q.frame()[(i, j - p.dim())]
        }
    });
    Ok(svd(&stacked)?.sigma_min())
}

/// A tangent vector to the Grassmannian at a fixed base plane, as its
/// `(n−p)×p` coordinate matrix. All operations assume a common base.
#[derive(Debug, Clone, PartialEq)]
pub struct GrTangent {
    pub coords: ComplexMatrix,
}

impl GrTangent {
    pub fn new(coords: ComplexMatrix) -> Self {
        GrTangent { coords }
    }

    pub fn scale_i(&self) -> GrTangent {
        GrTangent {
            coords: mul_i(&self.coords),
        }
    }
}

/// `g_Gr(X, Y) = Re Tr X*Y`.
pub fn metric_gr(a: &GrTangent, b: &GrTangent) -> Result<f64> {
    same_shape(&[a, b])?;
    Ok(re_inner(&a.coords, &b.coords))
}

fn same_shape(vs: &[&GrTangent]) -> Result<()> {
    let shape = vs[0].coords.shape();
    if vs.iter().all(|v| v.coords.shape() == shape) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(
            "Grassmannian tangents at different shapes".into(),
        ))
    }
}

/// `Ψ(x, X) = (Ran x, x X*/k²)` on the I₁-stable set.
pub fn psi1(pt: &ConfigPoint) -> Result<CotangentPoint> {
    require_stable1(pt)?;
    let plane = Subspace::span_of(&pt.base)?;
    let eta = (&pt.base * pt.fiber.adjoint()) * real(1.0 / pt.trunc.k2());
    Ok(CotangentPoint { plane, eta })
}

/// Section of [`psi1`]: `x = k F_P`, `X = k η* F_P`. The base satisfies
/// `x*x = k²`; the fiber is not level-normalized.
pub fn psi1_section(cp: &CotangentPoint, k: f64) -> Result<ConfigPoint> {
    let (n, p) = (cp.plane.ambient(), cp.plane.dim());
    if p == 0 || p >= n {
        return Err(Error::BadCotangent(format!(
            "plane of dimension {p} in {n}"
        )));
    }
    let trunc = Truncation::new(p, n - p, k)?;
    let f = cp.plane.frame();
    ConfigPoint::new(trunc, f * real(k), cp.eta.adjoint() * f * real(k))
}

/// Image of an I₃-stable point: the pair `(Ran(x+X), Ker(x*−X*))` and the
/// operator `z = i(x+X)(x*−X*)` whose spectrum is `{ik², 0}`.
#[derive(Debug, Clone)]
pub struct Psi3Image {
    pub pair: OrbitPair,
    pub z: ComplexMatrix,
}

impl Psi3Image {
    /// `(‖z F_P − ik² F_P‖, ‖z F_Q‖)`.
    pub fn eigen_residuals(&self, k2: f64) -> (f64, f64) {
        let fp = self.pair.p.frame();
        let fq = self.pair.q.frame();
        (
            (&self.z * fp - mul_i(fp) * real(k2)).norm(),
            (&self.z * fq).norm(),
        )
    }
}

pub fn psi3(pt: &ConfigPoint) -> Result<Psi3Image> {
    require_stable3(pt)?;
    let plus = &pt.base + &pt.fiber;
    let minus = &pt.base - &pt.fiber;
    let p = Subspace::span_of(&plus)?;
    let q = Subspace::span_of(&minus)?.complement()?;
    let z = mul_i(&(&plus * minus.adjoint()));
    Ok(Psi3Image {
        pair: OrbitPair::new(p, q)?,
        z,
    })
}

/// Graph operator `A: P → P^⊥` of `Q^⊥`, in the frames `(F_P, F_{P^⊥})`.
pub fn graph_operator(pair: &OrbitPair) -> Result<ComplexMatrix> {
    let q_perp = pair.q.complement()?;
    let p_perp = pair.p.complement()?;
    let m = pair.p.frame().adjoint() * q_perp.frame();
    let sigma_min = svd(&m)?.sigma_min();
    if sigma_min <= TRANSVERSAL_TOL {
        return Err(Error::NotTransversal { sigma_min });
    }
    let m_inv = matcore::inverse(&m).map_err(|_| Error::NotTransversal { sigma_min })?;
    Ok(p_perp.frame().adjoint() * q_perp.frame() * m_inv)
}

/// Section of [`psi3`]: `x = k(F_P + ½ F_{P^⊥} A)`, `X = −(k/2) F_{P^⊥} A`.
pub fn psi3_section(pair: &OrbitPair, k: f64) -> Result<ConfigPoint> {
    let a = graph_operator(pair)?;
    let trunc = pair.truncation(k)?;
    let fp = pair.p.frame();
    let perp_a = pair.p.complement()?.frame() * &a;
    ConfigPoint::new(
        trunc,
        (fp + &perp_a * real(0.5)) * real(k),
        perp_a * real(-0.5 * k),
    )
}

/// Squared graph singular values `a_i²` (ascending eigenvalues of `A*A`).
pub fn graph_spectrum(pair: &OrbitPair) -> Result<Vec<f64>> {
    let a = graph_operator(pair)?;
    Ok(herm_eig(&(a.adjoint() * &a))?
        .eigenvalues
        .into_iter()
        .map(|l| l.max(0.0))
        .collect())
}

/// Characteristic angles `θ_i ∈ [0, π/2)` with `cos θ_i = 1/√(1 + a_i²)`,
/// ascending, exactly `p` of them.
pub fn characteristic_angles(pair: &OrbitPair) -> Result<Vec<f64>> {
    Ok(graph_spectrum(pair)?
        .into_iter()
        .map(|a2| a2.sqrt().atan())
        .collect())
}

/// Curvature tensor of the Grassmannian,
/// `R_{X,Y} Z = Y X* Z − Z Y* X + Z X* Y − X Y* Z`.
pub fn curvature_r(x: &GrTangent, y: &GrTangent, z: &GrTangent) -> Result<GrTangent> {
    same_shape(&[x, y, z])?;
    let (x, y, z) = (&x.coords, &y.coords, &z.coords);
    Ok(GrTangent {
        coords: y * x.adjoint() * z - z * y.adjoint() * x + z * x.adjoint() * y
            - x * y.adjoint() * z,
    })
}

/// `I₁ R_{I₁V, V} Y = 2(V V* Y + Y V* V)`.
pub fn curvature_op_i1(v: &GrTangent, y: &GrTangent) -> Result<GrTangent> {
    same_shape(&[v, y])?;
    let (v, y) = (&v.coords, &y.coords);
    Ok(GrTangent {
        coords: (v * v.adjoint() * y + y * v.adjoint() * v) * real(2.0),
    })
}

/// The same operator evaluated through the general curvature tensor.
pub fn curvature_op_i1_via_tensor(v: &GrTangent, y: &GrTangent) -> Result<GrTangent> {
    Ok(curvature_r(&v.scale_i(), v, y)?.scale_i())
}

/// `g_Gr(f(I₁R_{I₁V,V}) V, V)`. Since the operator maps `V` to `4 V V* V`, this
/// is `Σ f(4σ_i²) σ_i²` over the singular values of `V`.
pub fn curvature_fun_apply<F: Fn(f64) -> f64>(f: F, v: &GrTangent) -> Result<f64> {
    let sigma = svd(&v.coords)?.sigma;
    let mut bad = Vec::new();
    let mut total = 0.0;
    for s in sigma {
        let u = 4.0 * s * s;
        let fu = f(u);
        if !fu.is_finite() {
            bad.push(u);
        }
        total += fu * s * s;
    }
    if bad.is_empty() {
        Ok(total)
    } else {
        Err(Error::DomainViolation { values: bad })
    }
}
