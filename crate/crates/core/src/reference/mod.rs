//! Reference simplices, Lagrange elements and quadrature rules.

mod cell;
mod expansion;
mod lagrange;
mod quadrature;

use thiserror::Error;

pub use cell::{Point, ReferenceCell, Shape};
pub use expansion::polynomial_dimension;
pub use lagrange::{
    make_lagrange, Continuity, ElementSpec, LagrangeElement, NodeEntity, TabulatedBasis, ValueRank, MAX_DEGREE,
};
pub(crate) use lagrange::ScalarTable;
pub use quadrature::{gauss_jacobi, make_quadrature, points_per_direction, QuadratureRule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error("unsupported degree {degree} for {continuity:?} Lagrange element (continuous: 1..=8, discontinuous: 0..=8)")]
    UnsupportedDegree { degree: usize, continuity: Continuity },
    #[error("unsupported cell shape '{0}'")]
    UnsupportedShape(String),
    #[error("point {0:?} lies outside the reference cell")]
    PointOutsideCell(Point),
    #[error("generalized Vandermonde matrix is singular")]
    SingularVandermonde,
}
