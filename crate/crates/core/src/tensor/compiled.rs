use crate::form::{expand_to_monomials, Form};
use crate::reference::{ElementSpec, Shape};

use super::classify::{classify_indices, IndexedMonomial};
use super::geometry::{derive_geometry_expr, GeometryTensorExpr};
use super::reference::{compute_reference_tensor, ReferenceTensor};
use super::TensorError;

/// Relative cutoff below which reference-tensor entries are treated as zero.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-14;

/// Surviving reference-tensor entry, split into primary and secondary
/// flat positions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonZero {
    pub primary: u32,
    pub secondary: u32,
    pub value: f64,
}

/// One monomial `A^{0,k} : G_{K,k}`.
#[derive(Clone, Debug)]
pub struct CompiledTerm {
    pub monomial: IndexedMonomial,
    pub reference: ReferenceTensor,
    pub geometry: GeometryTensorExpr,
    pub nonzeros: Vec<NonZero>,
}

/// A form in tensor representation `A^K_i = Σ_k A^{0,k}_{iα} G_{K,k}^α`.
#[derive(Clone, Debug)]
pub struct CompiledForm {
    pub name: String,
    pub shape: Shape,
    pub arguments: Vec<ElementSpec>,
    pub coefficients: Vec<ElementSpec>,
    pub terms: Vec<CompiledTerm>,
}

impl CompiledForm {
    pub fn compile(form: &Form) -> Result<CompiledForm, TensorError> {
        Self::compile_with_tolerance(form, DEFAULT_ZERO_TOLERANCE)
    }

    pub fn compile_with_tolerance(form: &Form, tolerance: f64) -> Result<CompiledForm, TensorError> {
        let mut terms = Vec::new();
        for m in expand_to_monomials(form)? {
            let monomial = classify_indices(&m, &form.index_names)?;
            let reference = compute_reference_tensor(&monomial, None)?;
            let geometry = derive_geometry_expr(&monomial);
            let nonzeros = sparse_entries(&reference, tolerance);
            terms.push(CompiledTerm { monomial, reference, geometry, nonzeros });
        }
        Ok(CompiledForm {
            name: form.name.clone(),
            shape: form.shape(),
            arguments: form.arguments.clone(),
            coefficients: form.coefficients.clone(),
            terms,
        })
    }

    pub fn arity(&self) -> usize {
        self.arguments.len()
    }

    /// Extent of the element tensor along each argument.
    pub fn element_dims(&self) -> Vec<usize> {
        self.arguments.iter().map(|e| e.space_dimension()).collect()
    }

    /// Number of entries of the element tensor.
    pub fn element_size(&self) -> usize {
        self.element_dims().iter().product()
    }

    /// Cell-local expansion length of each coefficient.
    pub fn coefficient_dims(&self) -> Vec<usize> {
        self.coefficients.iter().map(|e| e.space_dimension()).collect()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.terms.iter().map(|t| t.nonzeros.len()).sum()
    }

    /// Evaluate the element tensor into `out` (overwritten). `scratch` holds
    /// geometry-tensor values between calls.
    pub fn tabulate_tensor(&self, det: f64, g: &[[f64; 3]; 3], w: &[&[f64]], out: &mut [f64], scratch: &mut Vec<f64>) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for term in &self.terms {
            scratch.resize(term.geometry.len(), 0.0);
            term.geometry.evaluate(det, g, w, scratch);
            for nz in &term.nonzeros {
                out[nz.primary as usize] += nz.value * scratch[nz.secondary as usize];
            }
        }
    }
}

fn sparse_entries(reference: &ReferenceTensor, tolerance: f64) -> Vec<NonZero> {
    let cutoff = tolerance * reference.max_abs();
    let ns: usize = reference.secondary_dims().iter().product();
    reference
        .entries
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > cutoff)
        .map(|(flat, &value)| NonZero { primary: (flat / ns) as u32, secondary: (flat % ns) as u32, value })
        .collect()
}
