//! Finite-dimensional hyperkähler quotient of the tangent bundle of an affine
//! space of frames by the unitary group.
//!
//! Points are pairs `(x, X)` of `n×p` complex matrices. The quotient is
//! realized through its level set `{X*x = 0, x*x − X*X = k²}`, the projections
//! of the two stable sets onto it, and the maps to the cotangent bundle of the
//! Grassmannian of `p`-planes and to pairs of transversal subspaces.

pub mod checks;
pub mod error;
pub mod grassmann;
pub mod hkspace;
pub mod matcore;
pub mod moment;
pub mod potentials;
pub mod quotient;
pub mod sample;

pub use error::{Error, Result};
pub use grassmann::{CotangentPoint, GrTangent, OrbitPair, Subspace};
pub use hkspace::{
    act1, act3, apply_i, flat_potential, metric_g, omega, omega_c, ComplexStructure, ConfigPoint,
    GroupElement, TangentPair, Truncation, DEFAULT_TOL,
};
pub use matcore::{ComplexMatrix, C64};
pub use moment::{level_residual, moment, LevelResidual, MomentKind, MomentValue};
pub use potentials::{PotentialKind, PotentialReport, Route};
pub use quotient::{GroupPart, Pairing, ProjectionResult, SliceBasis};
