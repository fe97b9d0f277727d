//! Form language: the algebra of basis functions and coefficients, a text
//! grammar for form files, and expansion into monomials.
//!
//! A form file looks like
//!
//! ```text
//! element = FiniteElement("Lagrange", "triangle", 3)
//! v = BasisFunction(element)
//! u = BasisFunction(element)
//! i = Index()
//! a = v.dx(i)*u.dx(i)*dx
//! ```
//!
//! Arguments are numbered in declaration order, so `v` above is argument 0
//! (the test function) and `u` argument 1.

pub mod ast;
mod expand;
mod lower;
pub mod syntax;

use thiserror::Error;

use crate::reference::{Continuity, ElementError, ElementSpec, Shape};

pub use ast::{BasisFunction, Expr, ExprKind, Factor, Function, IndexRef, Product, Sum};
pub use expand::{expand_to_monomials, ArgumentFactor, CoefficientFactor, MonomialTerm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("undefined name '{name}' at {line}:{col}")]
    UndefinedName { name: String, line: usize, col: usize },
    #[error("arity error: {0}")]
    Arity(String),
    #[error("integrand term at {line}:{col} does not end with '*dx'")]
    MissingMeasure { line: usize, col: usize },
    #[error("cannot combine functions on a {0} with functions on a {1}")]
    IncompatibleCells(Shape, Shape),
    #[error("invalid component: {0}")]
    InvalidComponent(String),
    #[error("unsupported element family '{0}'")]
    UnsupportedFamily(String),
    #[error(transparent)]
    Element(#[from] ElementError),
}

/// A multilinear form `a(v_0, ..., v_{r-1}; w_0, ...) = ∫ integrand dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    pub name: String,
    pub integrand: Sum,
    /// Element of each argument, by slot.
    pub arguments: Vec<ElementSpec>,
    /// Element of each coefficient, by slot.
    pub coefficients: Vec<ElementSpec>,
    /// Source names of the free indices, by id.
    pub index_names: Vec<String>,
}

impl Form {
    /// Number of arguments `r`.
    pub fn arity(&self) -> usize {
        self.arguments.len()
    }

    pub fn shape(&self) -> Shape {
        self.arguments[0].shape
    }

    /// Same form with every element moved to `shape` and, except for
    /// piecewise constants, to polynomial degree `degree`.
    pub fn specialize(&self, shape: Shape, degree: usize) -> Result<Form, FormError> {
        let map = |e: ElementSpec| -> Result<ElementSpec, FormError> {
            let keep = e.degree == 0 && e.continuity == Continuity::Discontinuous;
            let spec = ElementSpec { shape, degree: if keep { 0 } else { degree }, ..e };
            spec.validate()?;
            Ok(spec)
        };
        let mut out = self.clone();
        for e in out.arguments.iter_mut().chain(out.coefficients.iter_mut()) {
            *e = map(*e)?;
        }
        for p in &mut out.integrand.terms {
            for f in &mut p.factors {
                match f {
                    Factor::Basis(b) => b.element = map(b.element)?,
                    Factor::Function(c) => c.element = map(c.element)?,
                }
            }
        }
        Ok(out)
    }
}

/// Parse a form file and return every form it defines, in order.
pub fn parse_form_file(text: &str) -> Result<Vec<Form>, FormError> {
    lower::lower_file(&syntax::parse(text)?)
}
