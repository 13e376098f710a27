//! Quantum annular Khovanov homology over k_r = Z[q]/(q^r - 1) and its
//! Z/r-equivariant Burnside functor.

pub mod boxes;
pub mod burnside;
pub mod checks;
pub mod cobordism_maps;
pub mod cobordism_calc;
pub mod complex;
pub mod corpus;
pub mod diagram;
pub mod error;
pub mod homology;
pub mod ladybug;
pub mod matrix;
pub mod scalar;
pub mod uq;

pub use error::{Error, Result};
pub use scalar::{Cyclotomic, Laurent};
