//! Meshes, dof maps, assembly and a small linear solver.

mod affine;
mod assemble;
mod dofmap;
mod mesh;
mod oracle;
mod solve;
mod sparse;

pub use affine::AffineMap;
pub use assemble::{assemble, assemble_form, ElementEvaluator, EvaluationPath, GlobalTensor, TensorEvaluator};
pub use dofmap::{build_dofmap, DofMap};
pub use mesh::Mesh;
pub use oracle::QuadratureEvaluator;
pub use solve::{apply_dirichlet, cg_solve, evaluate_function, interpolate, l2_error, CgReport};
pub use sparse::{CsrMatrix, SparseBuilder};

use thiserror::Error;

use crate::form::FormError;
use crate::reference::ElementError;
use crate::tensor::TensorError;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("degenerate cell{}", .0.map(|c| format!(" {c}")).unwrap_or_default())]
    DegenerateCell(Option<usize>),
    #[error("cell {cell} refers to vertex {vertex}, which does not exist")]
    VertexOutOfRange { cell: usize, vertex: usize },
    #[error("mesh line {line}: {message}")]
    MeshFormat { line: usize, message: String },
    #[error("matrix line {line}: {message}")]
    MatrixFormat { line: usize, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cannot assemble forms of arity {0}")]
    UnsupportedArity(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
