//! Tensor representation of compiled forms: index classification, the
//! reference tensor `A^0` and the geometry tensor `G_K`.

mod classify;
mod compiled;
mod geometry;
mod reference;

use thiserror::Error;

use crate::form::FormError;
use crate::reference::ElementError;

pub use classify::{
    classify_indices, CoefficientRef, GeoIndex, IndexKind, IndexedMonomial, RefFactor, RefIndex, SecondaryIndex,
    SecondaryKind, Transform,
};
pub use compiled::{CompiledForm, CompiledTerm, NonZero, DEFAULT_ZERO_TOLERANCE};
pub use geometry::{derive_geometry_expr, Atom, GeometryTensorExpr};
pub use reference::{compute_reference_tensor, drop_zeros, ReferenceTensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("index '{0}' occurs only once in a monomial")]
    IndexOccursOnce(String),
    #[error("index '{0}' occurs more than twice in a monomial")]
    IndexOccursThrice(String),
    #[error("component mismatch: {0}")]
    ComponentMismatch(String),
    #[error("fixed index {value} out of range 0..{range}")]
    FixedIndexOutOfRange { value: usize, range: usize },
    #[error("only first derivatives are supported, found order {0}")]
    UnsupportedDerivativeOrder(usize),
    #[error("monomial needs {0} geometry indices, more than supported")]
    TooManyIndices(usize),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Element(#[from] ElementError),
}

#[cfg(test)]
mod tests;
