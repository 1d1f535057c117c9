use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not skew-Hermitian (deviation {deviation:.3e})")]
    NotSkew { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("{what} did not converge")]
    NoConvergence { what: &'static str },

    #[error("eigenvalues outside the function domain: {values:?}")]
    DomainViolation { values: Vec<f64> },

    #[error("rank deficient: detected rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("complex structure index must be 1, 2 or 3 (got {0})")]
    BadIndex(u8),

    #[error("invalid truncation: {0}")]
    BadTruncation(String),

    #[error("point is not in the I1-stable set (|X*x| = {complex_residual:.3e}, injectivity ratio {injectivity:.3e})")]
    NotInStable1 {
        complex_residual: f64,
        injectivity: f64,
    },

    #[error("point is not in the I3-stable set ({reason})")]
    NotInStable3 { reason: String },

    #[error(
        "point is not on the level set (residuals {complex_residual:.3e}, {real_residual:.3e})"
    )]
    NotOnLevelSet {
        complex_residual: f64,
        real_residual: f64,
    },

    #[error("invalid cotangent point ({0})")]
    BadCotangent(String),

    #[error("subspaces are not transversal (smallest singular value {sigma_min:.3e})")]
    NotTransversal { sigma_min: f64 },

    #[error("operator has non-positive eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("frame columns are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("sampler failed to produce a non-degenerate point after {0} attempts")]
    DegenerateSample(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
