//! Exact arithmetic over prime fields for quadratic forms, graded ideal
//! membership, relation graphs and Freiman-type maps.

pub mod error;
pub mod field_linalg;
pub mod freiman;
pub mod gamma;
pub mod mideal;
pub mod polyring;
pub mod quadform;
pub mod relgraph;
pub mod structure;

pub use error::{Error, Result};
pub use field_linalg::{FpScalar, FpVector, LinearSolution, Subspace};
pub use freiman::{AlmostLinearFn, BohrSet, FreimanReport, Gap, LocallyLinear, SuperPoly};
pub use gamma::{GammaElement, GammaSet};
pub use mideal::{Certificate, GradedIdealBasis, MIdeal, Membership};
pub use polyring::{HomPoly, Monomial, PrimePoly};
pub use quadform::QuadForm;
pub use relgraph::{AuxGraph, RelGraph};
pub use structure::{SeparationMap, SoDecomposition};
