//! Dense complex linear algebra kernel.
//!
//! Matrices are `nalgebra::DMatrix<Complex<f64>>`. The eigensolver is
//! nalgebra's and the SVD is a one-sided Jacobi. Everything built on top of
//! them (Hermitian functional calculus, gauge-fixed ranges, the anticommutator
//! Sylvester solver) lives here.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Relative asymmetry accepted by [`herm_eig`] before it refuses the input.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS_PER_DIM: usize = 10_000;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

pub const I: C64 = Complex { re: 0.0, im: 1.0 };

/// Builds a matrix from row-major entries, rejecting NaN/Inf.
pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<ComplexMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::ShapeMismatch(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    let m = ComplexMatrix::from_row_slice(rows, cols, entries);
    check_finite(&m, "matrix")?;
    Ok(m)
}

pub fn check_finite(m: &ComplexMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Row-major entries of `m`.
pub fn to_row_major(m: &ComplexMatrix) -> Vec<C64> {
    m.transpose().iter().copied().collect()
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(
        n,
        n,
        |i, j| if i == j { real(values[i]) } else { real(0.0) },
    )
}

pub fn scale(m: &ComplexMatrix, s: f64) -> ComplexMatrix {
    m.map(|z| z * s)
}

/// Multiplication by `i`, written out so that it is exact in floating point.
pub fn mul_i(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| Complex::new(-z.im, z.re))
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Real inner product `Re Tr(a* b)`.
pub fn re_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `Im Tr(a* b)`.
pub fn im_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).im).sum()
}

/// `Tr(a* b)`.
pub fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * real(0.5)
}

pub fn skew_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m - m.adjoint()) * real(0.5)
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn skew_deviation(m: &ComplexMatrix) -> f64 {
    (m + m.adjoint()).norm()
}

pub fn unitary_deviation(m: &ComplexMatrix) -> f64 {
    (m.adjoint() * m - identity(m.ncols())).norm()
}

/// `‖F*F − Id‖_F`.
pub fn orthonormality_defect(frame: &ComplexMatrix) -> f64 {
    unitary_deviation(frame)
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Symmetrizes `m` after checking it is Hermitian within [`HERMITIAN_TOL`].
pub fn ensure_hermitian(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square(m, "Hermitian input")?;
    check_finite(m, "Hermitian input")?;
    let asymmetry = hermitian_deviation(m);
    if asymmetry > HERMITIAN_TOL * (1.0 + m.norm()) {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(hermitian_part(m))
}

pub fn ensure_skew(m: &ComplexMatrix, tol: f64) -> Result<()> {
    let deviation = skew_deviation(m);
    if deviation > tol * (1.0 + m.norm()) {
        return Err(Error::NotSkew { deviation });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending, eigenvectors
/// as the columns of a unitary matrix.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    /// `U diag(f(λ)) U*`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.nrows();
        let mut scaled = u.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues
            .last()
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }
}

pub fn herm_eig(m: &ComplexMatrix) -> Result<HermitianSpectrum> {
    let h = ensure_hermitian(m)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianSpectrum {
            eigenvalues: Vec::new(),
            eigenvectors: h,
        });
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, MAX_SWEEPS_PER_DIM * n).ok_or(
        Error::NoConvergence {
            what: "Hermitian eigensolver",
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Applies a real scalar function to a Hermitian matrix through its spectrum.
///
/// `domain` is checked on every eigenvalue first; offending eigenvalues are
/// returned in [`Error::DomainViolation`].
pub fn herm_fun<F, D>(m: &ComplexMatrix, f: F, domain: D) -> Result<ComplexMatrix>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> bool,
{
    let spectrum = herm_eig(m)?;
    let bad: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .copied()
        .filter(|&l| !domain(l))
        .collect();
    if !bad.is_empty() {
        return Err(Error::DomainViolation { values: bad });
    }
    Ok(hermitian_part(&spectrum.map(f)))
}

/// Square root of a positive semidefinite matrix. Eigenvalues down to
/// `-1e-12·‖M‖` are treated as roundoff and clamped to zero.
pub fn herm_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let floor = -1e-12 * (1.0 + m.norm());
    herm_fun(m, |l| l.max(0.0).sqrt(), |l| l >= floor)
}

pub fn herm_inv_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    herm_fun(m, |l| 1.0 / l.sqrt(), |l| l > 0.0)
}

pub fn herm_log(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    herm_fun(m, f64::ln, |l| l > 0.0)
}

/// `(cosh h, sinh h)` for Hermitian `h`, from one eigendecomposition.
pub fn herm_cosh_sinh(h: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let spectrum = herm_eig(h)?;
    Ok((
        hermitian_part(&spectrum.map(f64::cosh)),
        hermitian_part(&spectrum.map(f64::sinh)),
    ))
}

/// `log det M` for Hermitian positive definite `M`.
pub fn log_det_pd(m: &ComplexMatrix) -> Result<f64> {
    let spectrum = herm_eig(m)?;
    if spectrum.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: spectrum.min(),
        });
    }
    Ok(spectrum.eigenvalues.iter().map(|l| l.ln()).sum())
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square(m, "inverse input")?;
    m.clone().try_inverse().ok_or(Error::Singular)
}

/// Thin singular value decomposition `M = U diag(σ) W*`, σ descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub w: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            for i in 0..us.nrows() {
                us[(i, j)] *= s;
            }
        }
        us * self.w.adjoint()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }
}

/// One-sided (Hestenes) Jacobi SVD. nalgebra's complex bidiagonal SVD loses
/// accuracy on rank-deficient inputs, which is exactly the regime of the
/// rank-`p` operators this crate builds, so it is not used here.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    check_finite(m, "SVD input")?;
    let (rows, cols) = m.shape();
    if rows < cols {
        let t = svd(&m.adjoint())?;
        return Ok(Svd {
            u: t.w,
            sigma: t.sigma,
            w: t.u,
        });
    }
    if cols == 0 {
        return Ok(Svd {
            u: ComplexMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            w: ComplexMatrix::zeros(0, 0),
        });
    }
    let mut a = m.clone();
    let mut v = identity(cols);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dotc(&a.column(j));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, i, j, c, s, phase);
                rotate_columns(&mut v, i, j, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "SVD" });
    }

    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let tiny = sigma[0] * f64::EPSILON * cols as f64;
    let kept = sigma.iter().take_while(|&&s| s > tiny && s > 0.0).count();

    let mut u = ComplexMatrix::zeros(rows, cols);
    let mut w = ComplexMatrix::zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        w.set_column(dst, &v.column(src));
        if dst < kept {
            u.set_column(dst, &(a.column(src) / real(norms[src])));
        }
    }
    if kept < cols {
        let completion = complement_frame(&u.columns(0, kept).into_owned())?;
        u.columns_mut(kept, cols - kept)
            .copy_from(&completion.columns(0, cols - kept));
    }
    Ok(Svd { u, sigma, w })
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// `(a_i, a_j) ← (c a_i − s e^{−iφ} a_j, s e^{iφ} a_i + c a_j)`.
fn rotate_columns(a: &mut ComplexMatrix, i: usize, j: usize, c: f64, s: f64, phase: C64) {
    for r in 0..a.nrows() {
        let (ai, aj) = (a[(r, i)], a[(r, j)]);
        a[(r, i)] = ai * c - aj * phase.conj() * s;
        a[(r, j)] = ai * phase * s + aj * c;
    }
}

/// Multiplies each column by a unit phase so that its largest-modulus entry
/// is real and positive.
pub fn fix_column_phases(m: &mut ComplexMatrix) {
    for j in 0..m.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..m.nrows() {
            let a = m[(i, j)].norm();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if best_abs > 0.0 {
            let phase = m[(best, j)].conj() / best_abs;
            for i in 0..m.nrows() {
                m[(i, j)] *= phase;
            }
            m[(best, j)].im = 0.0;
        }
    }
}

/// Result of [`orthonormal_range`]. A rank below `expected` is reported, not
/// treated as an error, so callers decide whether it is fatal.
#[derive(Debug, Clone)]
pub struct OrthonormalRange {
    pub frame: ComplexMatrix,
    pub rank: usize,
    pub expected: usize,
}

impl OrthonormalRange {
    pub fn is_deficient(&self) -> bool {
        self.rank < self.expected
    }

    pub fn full_rank(self) -> Result<ComplexMatrix> {
        if self.is_deficient() {
            Err(Error::RankDeficient {
                rank: self.rank,
                expected: self.expected,
            })
        } else {
            Ok(self.frame)
        }
    }
}

/// Orthonormal basis of the column span of `m`, keeping the left singular
/// vectors whose singular value exceeds `tol·σ_max`, gauge-fixed by
/// [`fix_column_phases`].
pub fn orthonormal_range(m: &ComplexMatrix, tol: f64) -> Result<OrthonormalRange> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::BadTruncation(format!(
            "rank tolerance must be positive, got {tol}"
        )));
    }
    let dec = svd(m)?;
    let cutoff = tol * dec.sigma_max();
    let rank = if dec.sigma_max() > 0.0 {
        dec.sigma.iter().filter(|&&s| s > cutoff).count()
    } else {
        0
    };
    let mut frame = dec.u.columns(0, rank).into_owned();
    fix_column_phases(&mut frame);
    Ok(OrthonormalRange {
        frame,
        rank,
        expected: m.nrows().min(m.ncols()),
    })
}

/// Orthonormal frame of the orthogonal complement of the span of an
/// orthonormal frame.
pub fn complement_frame(frame: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, d) = frame.shape();
    let projector = identity(n) - frame * frame.adjoint();
    let spectrum = herm_eig(&projector)?;
    let mut comp = spectrum.eigenvectors.columns(d, n - d).into_owned();
    fix_column_phases(&mut comp);
    Ok(comp)
}

/// `‖F₁F₁* − F₂F₂*‖_F`, the gauge-free distance between two spans.
pub fn projector_distance(f1: &ComplexMatrix, f2: &ComplexMatrix) -> f64 {
    (f1 * f1.adjoint() - f2 * f2.adjoint()).norm()
}

/// Solves `(M a + a M)/2 = S` for skew-Hermitian `a`, with `M` Hermitian
/// positive definite and `S` skew-Hermitian. Diagonal in the eigenbasis of `M`:
/// `a'_ij = 2 S'_ij / (λ_i + λ_j)`.
pub fn sym_sylvester_solve(m: &ComplexMatrix, s: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square(m, "Sylvester coefficient")?;
    if s.shape() != m.shape() {
        return Err(Error::ShapeMismatch(format!(
            "Sylvester right-hand side {}x{} vs coefficient {}x{}",
            s.nrows(),
            s.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    ensure_skew(s, HERMITIAN_TOL)?;
    let spectrum = herm_eig(m)?;
    let lmin = spectrum.min();
    if lmin.is_nan() || lmin <= f64::EPSILON * spectrum.max().abs().max(1.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lmin,
        });
    }
    let u = &spectrum.eigenvectors;
    let lambda = &spectrum.eigenvalues;
    let mut rotated = u.adjoint() * s * u;
    for i in 0..rotated.nrows() {
        for j in 0..rotated.ncols() {
            rotated[(i, j)] *= 2.0 / (lambda[i] + lambda[j]);
        }
    }
    Ok(skew_part(&(u * rotated * u.adjoint())))
}

/// Embeds a complex matrix into real coordinates `[Re(row-major), Im(row-major)]`.
pub fn to_real_coords(m: &ComplexMatrix, out: &mut Vec<f64>) {
    let rows = m.nrows();
    let cols = m.ncols();
    for i in 0..rows {
        for j in 0..cols {
            out.push(m[(i, j)].re);
        }
    }
    for i in 0..rows {
        for j in 0..cols {
            out.push(m[(i, j)].im);
        }
    }
}

/// Inverse of [`to_real_coords`]; consumes `2·rows·cols` reals from `coords`.
pub fn from_real_coords(rows: usize, cols: usize, coords: &[f64]) -> ComplexMatrix {
    let k = rows * cols;
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        let idx = i * cols + j;
        c64(coords[idx], coords[k + idx])
    })
}

/// Orthonormal basis of the row space of a real matrix, keeping singular
/// values above `rel_tol · σ_max`.
pub(crate) fn real_row_space(op: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let (rows, cols) = op.shape();
    if rows == 0 || cols == 0 {
        return Ok(DMatrix::zeros(cols, 0));
    }
    let transposed = ComplexMatrix::from_fn(cols, rows, |i, j| real(op[(j, i)]));
    let dec = svd(&transposed)?;
    let smax = dec.sigma_max();
    let keep = dec
        .sigma
        .iter()
        .take_while(|&&s| smax > 0.0 && s > rel_tol * smax)
        .count();
    Ok(DMatrix::from_fn(cols, keep, |i, j| dec.u[(i, j)].re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m2(a: [[C64; 2]; 2]) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
    }

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        // small LCG keeps these unit tests free of the sampler module
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| c64(next(), next()))
    }

    #[test]
    fn eig_of_diagonal_sorts_ascending() {
        let s = herm_eig(&diag_real(&[3.0, 1.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 3.0]);
        assert_abs_diff_eq!(s.eigenvectors[(1, 0)].norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvectors[(0, 1)].norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn eig_of_swap_matrix() {
        let m = m2([[real(0.0), real(1.0)], [real(1.0), real(0.0)]]);
        let s = herm_eig(&m).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_of_complex_two_by_two() {
        // characteristic polynomial (2-λ)² - 1
        let m = m2([[real(2.0), I], [-I, real(2.0)]]);
        let s = herm_eig(&m).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], 3.0, epsilon = 1e-14);
        assert!((s.reconstruct() - &m).norm() <= 1e-12 * (1.0 + m.norm()));
        assert!(unitary_deviation(&s.eigenvectors) <= 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = m2([[real(1.0), real(2.0)], [real(0.0), real(1.0)]]);
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        for n in 1..12 {
            let a = pseudo_random(n, n, n as u64);
            let h = hermitian_part(&a);
            let s = herm_eig(&h).unwrap();
            assert!((s.reconstruct() - &h).norm() <= 1e-12 * (1.0 + h.norm()));
            assert!(unitary_deviation(&s.eigenvectors) <= 1e-12);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn fun_sqrt_of_diagonal() {
        let r = herm_sqrt(&diag_real(&[4.0, 9.0])).unwrap();
        assert!((r - diag_real(&[2.0, 3.0])).norm() <= 1e-14);
    }

    #[test]
    fn fun_log_of_identity_is_zero() {
        let r = herm_log(&identity(3)).unwrap();
        assert!(r.norm() <= 1e-15);
    }

    #[test]
    fn fun_sqrt_of_symmetric_two_by_two() {
        // eigenbasis (1,±1)/√2 with eigenvalues 7 and 3
        let m = m2([[real(5.0), real(2.0)], [real(2.0), real(5.0)]]);
        let r = herm_sqrt(&m).unwrap();
        let d = (7f64.sqrt() + 3f64.sqrt()) / 2.0;
        let o = (7f64.sqrt() - 3f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(r[(0, 0)].re, d, epsilon = 1e-13);
        assert_abs_diff_eq!(r[(0, 1)].re, o, epsilon = 1e-13);
        assert_abs_diff_eq!(r[(1, 0)].re, o, epsilon = 1e-13);
        assert_abs_diff_eq!(r[(1, 1)].re, d, epsilon = 1e-13);
        assert_abs_diff_eq!(d, 2.1889, epsilon = 1e-4);
        assert_abs_diff_eq!(o, 0.4569, epsilon = 1e-4);
    }

    #[test]
    fn fun_identity_returns_input() {
        let h = hermitian_part(&pseudo_random(5, 5, 9));
        let r = herm_fun(&h, |l| l, |_| true).unwrap();
        assert!((r - &h).norm() <= 1e-12 * (1.0 + h.norm()));
    }

    #[test]
    fn fun_reports_domain_violations() {
        let err = herm_log(&diag_real(&[-1.0, 2.0])).unwrap_err();
        match err {
            Error::DomainViolation { values } => assert_eq!(values, vec![-1.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sqrt_then_square_is_identity_on_psd() {
        for n in 1..8 {
            let a = pseudo_random(n, n, 100 + n as u64);
            let psd = &a * a.adjoint();
            let r = herm_sqrt(&psd).unwrap();
            let back = herm_fun(&r, |l| l * l, |_| true).unwrap();
            assert!((back - &psd).norm() <= 1e-10);
        }
    }

    #[test]
    fn svd_examples() {
        let z = svd(&ComplexMatrix::zeros(3, 2)).unwrap();
        assert!(z.sigma.iter().all(|&s| s == 0.0));

        let d = svd(&diag_real(&[2.0, -3.0])).unwrap();
        assert_abs_diff_eq!(d.sigma[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.sigma[1], 2.0, epsilon = 1e-14);

        let col = from_row_major(2, 1, &[real(3.0), real(4.0)]).unwrap();
        let s = svd(&col).unwrap();
        assert_abs_diff_eq!(s.sigma[0], 5.0, epsilon = 1e-14);
    }

    #[test]
    fn svd_reconstructs() {
        for (r, c) in [(1, 1), (4, 2), (2, 5), (7, 7), (9, 3)] {
            let m = pseudo_random(r, c, (r * 31 + c) as u64);
            let s = svd(&m).unwrap();
            assert!((s.reconstruct() - &m).norm() <= 1e-11 * (1.0 + m.norm()));
            assert!(orthonormality_defect(&s.u) <= 1e-12);
            assert!(orthonormality_defect(&s.w) <= 1e-12);
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn range_examples() {
        let r = orthonormal_range(
            &from_row_major(2, 1, &[real(2.0), real(0.0)]).unwrap(),
            1e-10,
        )
        .unwrap();
        assert!(!r.is_deficient());
        assert_abs_diff_eq!(r.frame[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.frame[(0, 0)].im, 0.0);
        assert_abs_diff_eq!(r.frame[(1, 0)].norm(), 0.0, epsilon = 1e-15);

        let dup = from_row_major(2, 2, &[real(1.0), real(1.0), real(0.0), real(0.0)]).unwrap();
        let r = orthonormal_range(&dup, 1e-10).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.is_deficient());
        assert_abs_diff_eq!(r.frame[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert!(matches!(
            r.full_rank(),
            Err(Error::RankDeficient {
                rank: 1,
                expected: 2
            })
        ));

        let ones = from_row_major(2, 1, &[real(1.0), real(1.0)]).unwrap();
        let r = orthonormal_range(&ones, 1e-10).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(r.frame[(0, 0)].re, h, epsilon = 1e-14);
        assert_abs_diff_eq!(r.frame[(1, 0)].re, h, epsilon = 1e-14);
    }

    #[test]
    fn range_of_frame_is_same_span() {
        let f = orthonormal_range(&pseudo_random(6, 3, 5), 1e-12)
            .unwrap()
            .frame;
        let g = orthonormal_range(&f, 1e-12).unwrap().frame;
        assert!(projector_distance(&f, &g) <= 1e-12);
    }

    #[test]
    fn complement_is_orthogonal() {
        let f = orthonormal_range(&pseudo_random(7, 3, 11), 1e-12)
            .unwrap()
            .frame;
        let c = complement_frame(&f).unwrap();
        assert_eq!(c.shape(), (7, 4));
        assert!(orthonormality_defect(&c) <= 1e-12);
        assert!((f.adjoint() * &c).norm() <= 1e-12);
    }

    #[test]
    fn sylvester_examples() {
        let s = skew_part(&pseudo_random(3, 3, 21));
        let a = sym_sylvester_solve(&identity(3), &s).unwrap();
        assert!((a - &s).norm() <= 1e-14);

        let sv = c64(0.3, -1.2);
        let rhs = m2([[real(0.0), sv], [-sv.conj(), real(0.0)]]);
        let a = sym_sylvester_solve(&diag_real(&[1.0, 3.0]), &rhs).unwrap();
        let expected = m2([[real(0.0), sv / 2.0], [-sv.conj() / 2.0, real(0.0)]]);
        assert!((a - expected).norm() <= 1e-14);

        let a = sym_sylvester_solve(&diag_real(&[1.0, 3.0]), &ComplexMatrix::zeros(2, 2)).unwrap();
        assert_eq!(a.norm(), 0.0);
    }

    #[test]
    fn sylvester_residual_and_uniqueness() {
        for n in 1..7 {
            let b = pseudo_random(n, n, 40 + n as u64);
            let m = &b * b.adjoint() + identity(n);
            let s = skew_part(&pseudo_random(n, n, 60 + n as u64));
            let a = sym_sylvester_solve(&m, &s).unwrap();
            assert!(skew_deviation(&a) <= 1e-14);
            let res = (&m * &a + &a * &m) * real(0.5) - &s;
            assert!(res.norm() <= 1e-10 * (1.0 + s.norm()));

            let bumped = &s + skew_part(&pseudo_random(n, n, 80)) * real(1e-3);
            let _ = sym_sylvester_solve(&m, &bumped).unwrap();
            let again = sym_sylvester_solve(&m, &s).unwrap();
            assert!((again - &a).norm() <= 1e-12);
        }
    }

    #[test]
    fn sylvester_errors() {
        let s = ComplexMatrix::zeros(2, 2);
        assert!(matches!(
            sym_sylvester_solve(&diag_real(&[1.0, -1.0]), &s),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            sym_sylvester_solve(&identity(3), &s),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn real_coords_round_trip() {
        let m = pseudo_random(3, 2, 3);
        let mut v = Vec::new();
        to_real_coords(&m, &mut v);
        assert_eq!(from_real_coords(3, 2, &v), m);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(from_row_major(1, 1, &[c64(f64::NAN, 0.0)]).is_err());
        assert!(from_row_major(1, 2, &[real(0.0)]).is_err());
    }
}
