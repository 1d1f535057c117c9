//! Seeded random points, group elements and tangent vectors.
//!
//! All draws come from a single `ChaCha8Rng`, so a seed fixes every output
//! bit-for-bit across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grassmann::{psi1, CotangentPoint, OrbitPair, Subspace};
use crate::hkspace::{act3, ConfigPoint, GroupElement, TangentPair, Truncation};
use crate::matcore::{
    c64, fix_column_phases, herm_fun, hermitian_part, inverse, real, skew_part, svd, ComplexMatrix,
    C64,
};
use crate::quotient::{in_stable3, project1};

/// Attempts before a sampler gives up on a rejection loop.
pub const MAX_ATTEMPTS: usize = 100;
/// Scale of the Gaussian perturbation of `k[Id; 0]` for I₁-stable samples.
pub const BASE_PERTURBATION: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    /// The level set.
    Level,
    /// The I₁-stable set.
    Stable1,
    /// The I₃-stable set.
    Stable3,
}

impl Space {
    pub const ALL: [Space; 3] = [Space::Level, Space::Stable1, Space::Stable3];

    pub fn name(self) -> &'static str {
        match self {
            Space::Level => "level",
            Space::Stable1 => "stable1",
            Space::Stable3 => "stable3",
        }
    }
}

impl std::str::FromStr for Space {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Space::ALL
            .into_iter()
            .find(|sp| sp.name() == s)
            .ok_or_else(|| format!("unknown space `{s}` (expected level, stable1 or stable3)"))
    }
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn dim(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    /// Standard complex normal: real and imaginary parts with variance ½.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c64(s * self.normal(), s * self.normal())
    }

    pub fn gaussian(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        // filled row by row so the draw order does not depend on storage layout
        let entries: Vec<C64> = (0..rows * cols).map(|_| self.complex_normal()).collect();
        ComplexMatrix::from_row_slice(rows, cols, &entries)
    }

    /// Random Hermitian matrix with Frobenius norm `norm`.
    pub fn hermitian(&mut self, p: usize, norm: f64) -> ComplexMatrix {
        let h = hermitian_part(&self.gaussian(p, p));
        let n = h.norm();
        if n > 0.0 {
            h * real(norm / n)
        } else {
            h
        }
    }

    pub fn skew(&mut self, p: usize) -> ComplexMatrix {
        skew_part(&self.gaussian(p, p))
    }

    /// Haar-distributed unitary: QR of a complex Gaussian matrix with the
    /// phases of `R`'s diagonal moved into `Q`.
    pub fn unitary(&mut self, p: usize) -> ComplexMatrix {
        let qr = self.gaussian(p, p).qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..p {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                real(1.0)
            };
            for i in 0..p {
                q[(i, j)] *= phase;
            }
        }
        q
    }

    /// Positive definite `exp(H)` with `‖H‖_F = spread`.
    pub fn positive(&mut self, p: usize, spread: f64) -> Result<ComplexMatrix> {
        let h = self.hermitian(p, spread);
        herm_fun(&h, f64::exp, |_| true)
    }

    pub fn tangent(&mut self, n: usize, p: usize) -> TangentPair {
        TangentPair {
            base: self.gaussian(n, p),
            fiber: self.gaussian(n, p),
        }
    }

    /// Random `n×d` frame with orthonormal, phase-fixed columns.
    pub fn frame(&mut self, n: usize, d: usize) -> Result<ComplexMatrix> {
        for _ in 0..MAX_ATTEMPTS {
            let g = self.gaussian(n, d);
            if let Ok(s) = Subspace::span_of(&g) {
                let mut f = s.frame().clone();
                fix_column_phases(&mut f);
                return Ok(f);
            }
        }
        Err(Error::DegenerateSample(MAX_ATTEMPTS))
    }

    pub fn point(&mut self, space: Space, trunc: Truncation) -> Result<ConfigPoint> {
        match space {
            Space::Stable1 => self.stable1(trunc),
            Space::Level => self.level(trunc),
            Space::Stable3 => self.stable3(trunc),
        }
    }

    /// `x = k[Id; 0] + 0.3·G` conditioned on `σ_min > 0.1·σ_max`, and a
    /// Gaussian fiber with its component along `Ran x` removed.
    pub fn stable1(&mut self, trunc: Truncation) -> Result<ConfigPoint> {
        let (n, p) = (trunc.n(), trunc.p);
        let reference = ConfigPoint::reference(trunc).base;
        for _ in 0..MAX_ATTEMPTS {
            let x = &reference + self.gaussian(n, p) * real(BASE_PERTURBATION * trunc.k);
            let raw = self.gaussian(n, p) * real(trunc.k);
            let dec = svd(&x)?;
            if dec.sigma_min() <= 0.1 * dec.sigma_max() {
                continue;
            }
            let xx_inv = inverse(&(x.adjoint() * &x))?;
            let fiber = &raw - &x * (xx_inv * (x.adjoint() * &raw));
            return ConfigPoint::new(trunc, x, fiber);
        }
        Err(Error::DegenerateSample(MAX_ATTEMPTS))
    }

    pub fn level(&mut self, trunc: Truncation) -> Result<ConfigPoint> {
        Ok(project1(&self.stable1(trunc)?)?.point)
    }

    /// A level-set point moved by `act3` with Hermitian `‖h‖ ≤ 1` and a Haar
    /// unitary.
    pub fn stable3(&mut self, trunc: Truncation) -> Result<ConfigPoint> {
        let p = trunc.p;
        for _ in 0..MAX_ATTEMPTS {
            let base = self.level(trunc)?;
            let size = self.uniform(0.2, 1.0);
            let h = self.hermitian(p, size);
            let u = GroupElement::unitary(self.unitary(p))?;
            let pt = act3(&h, &u, &base)?;
            if in_stable3(&pt, trunc.tol) {
                return Ok(pt);
            }
        }
        Err(Error::DegenerateSample(MAX_ATTEMPTS))
    }

    /// Random transversal pair with `dim P = p`, `dim Q = q`.
    pub fn orbit_pair(&mut self, p: usize, q: usize) -> Result<OrbitPair> {
        let n = p + q;
        for _ in 0..MAX_ATTEMPTS {
            let fp = Subspace::new(self.frame(n, p)?)?;
            let fq = Subspace::new(self.frame(n, q)?)?;
            if let Ok(pair) = OrbitPair::new(fp, fq) {
                return Ok(pair);
            }
        }
        Err(Error::DegenerateSample(MAX_ATTEMPTS))
    }

    pub fn cotangent(&mut self, trunc: Truncation) -> Result<CotangentPoint> {
        psi1(&self.stable1(trunc)?)
    }

    /// Random element of the full linear group, `exp(H)·u`.
    pub fn invertible(&mut self, p: usize, spread: f64) -> Result<ComplexMatrix> {
        Ok(self.positive(p, spread)? * self.unitary(p))
    }
}
