use crate::reference::ElementSpec;

use super::ast::{Factor, IndexRef};
use super::{Form, FormError};

/// One argument factor of a monomial, e.g. `u[i].dx(j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArgumentFactor {
    pub slot: usize,
    pub element: ElementSpec,
    pub component: Option<IndexRef>,
    pub derivatives: Vec<IndexRef>,
}

/// One coefficient factor of a monomial, e.g. `w[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoefficientFactor {
    pub slot: usize,
    pub element: ElementSpec,
    pub component: Option<IndexRef>,
    pub derivatives: Vec<IndexRef>,
}

/// A scalar-weighted product with exactly one factor per argument.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialTerm {
    pub scalar: f64,
    /// Indexed by argument slot.
    pub arguments: Vec<ArgumentFactor>,
    pub coefficients: Vec<CoefficientFactor>,
}

impl MonomialTerm {
    /// Total number of spatial derivatives.
    pub fn num_derivatives(&self) -> usize {
        self.arguments.iter().map(|a| a.derivatives.len()).sum::<usize>()
            + self.coefficients.iter().map(|c| c.derivatives.len()).sum::<usize>()
    }

    /// Polynomial degree of the integrand on the reference cell.
    pub fn integrand_degree(&self) -> usize {
        let per = |degree: usize, derivs: usize| degree.saturating_sub(derivs);
        self.arguments.iter().map(|a| per(a.element.degree, a.derivatives.len())).sum::<usize>()
            + self.coefficients.iter().map(|c| per(c.element.degree, c.derivatives.len())).sum::<usize>()
    }

    fn same_factors(&self, other: &MonomialTerm) -> bool {
        self.arguments == other.arguments && self.coefficients == other.coefficients
    }
}

/// Flatten a form's integrand into monomials, collecting identical terms
/// and dropping those whose scalar cancels to zero.
pub fn expand_to_monomials(form: &Form) -> Result<Vec<MonomialTerm>, FormError> {
    let r = form.arity();
    let mut out: Vec<MonomialTerm> = Vec::new();
    for product in &form.integrand.terms {
        let mut arguments: Vec<Option<ArgumentFactor>> = vec![None; r];
        let mut coefficients = Vec::new();
        for factor in &product.factors {
            match factor {
                Factor::Basis(b) => {
                    if arguments[b.slot].is_some() {
                        return Err(FormError::Arity(format!("argument {} appears twice in one product", b.slot)));
                    }
                    arguments[b.slot] = Some(ArgumentFactor {
                        slot: b.slot,
                        element: b.element,
                        component: b.component,
                        derivatives: b.derivatives.clone(),
                    });
                }
                Factor::Function(f) => coefficients.push(CoefficientFactor {
                    slot: f.slot,
                    element: f.element,
                    component: f.component,
                    derivatives: f.derivatives.clone(),
                }),
            }
        }
        let arguments = arguments
            .into_iter()
            .enumerate()
            .map(|(slot, a)| a.ok_or_else(|| FormError::Arity(format!("a product does not contain argument {slot}"))))
            .collect::<Result<Vec<_>, _>>()?;
        coefficients.sort();
        let term = MonomialTerm { scalar: product.scalar, arguments, coefficients };
        match out.iter_mut().find(|m| m.same_factors(&term)) {
            Some(existing) => existing.scalar += term.scalar,
            None => out.push(term),
        }
    }
    out.retain(|m| m.scalar != 0.0);
    Ok(out)
}
