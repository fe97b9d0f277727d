use crate::form::Form;
use crate::tensor::CompiledForm;

use super::{build_dofmap, AffineMap, CsrMatrix, DofMap, Mesh, QuadratureEvaluator, RuntimeError, SparseBuilder};

/// Computes one element tensor per cell.
pub trait ElementEvaluator {
    /// Local dimension of each argument, in slot order.
    fn argument_dims(&self) -> Vec<usize>;

    /// Local dimension of each coefficient.
    fn coefficient_dims(&self) -> Vec<usize>;

    /// Write the element tensor (row-major over the arguments) into `out`.
    /// `w[k]` holds the local expansion coefficients of coefficient `k`.
    fn evaluate(&mut self, map: &AffineMap, w: &[&[f64]], out: &mut [f64]);
}

/// Element tensors by contraction with precomputed reference tensors.
pub struct TensorEvaluator<'a> {
    form: &'a CompiledForm,
    scratch: Vec<f64>,
}

impl<'a> TensorEvaluator<'a> {
    pub fn new(form: &'a CompiledForm) -> Self {
        TensorEvaluator { form, scratch: Vec::new() }
    }
}

impl ElementEvaluator for TensorEvaluator<'_> {
    fn argument_dims(&self) -> Vec<usize> {
        self.form.element_dims()
    }

    fn coefficient_dims(&self) -> Vec<usize> {
        self.form.coefficient_dims()
    }

    fn evaluate(&mut self, map: &AffineMap, w: &[&[f64]], out: &mut [f64]) {
        self.form.tabulate_tensor(map.det(), map.inverse(), w, out, &mut self.scratch);
    }
}

/// Which element evaluator [`assemble_form`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvaluationPath {
    Tensor,
    Quadrature,
}

/// Result of global assembly.
#[derive(Clone, Debug, PartialEq)]
pub enum GlobalTensor {
    Vector(Vec<f64>),
    Matrix(CsrMatrix),
}

impl GlobalTensor {
    pub fn as_matrix(&self) -> Option<&CsrMatrix> {
        match self {
            GlobalTensor::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            GlobalTensor::Vector(v) => Some(v),
            _ => None,
        }
    }
}

/// Sum element tensors into a global tensor,
/// `A_{ι(K,i)} += A^K_i` over all cells.
///
/// `arguments` holds one dof map per argument slot, `coefficients` one
/// `(dof map, global values)` pair per coefficient slot.
pub fn assemble(
    evaluator: &mut dyn ElementEvaluator,
    mesh: &Mesh,
    arguments: &[&DofMap],
    coefficients: &[(&DofMap, &[f64])],
) -> Result<GlobalTensor, RuntimeError> {
    let dims = evaluator.argument_dims();
    if dims.len() != arguments.len() {
        return Err(RuntimeError::DimensionMismatch(format!(
            "form has {} arguments, {} dof maps given",
            dims.len(),
            arguments.len()
        )));
    }
    if dims.is_empty() || dims.len() > 2 {
        return Err(RuntimeError::UnsupportedArity(dims.len()));
    }
    for (k, (map, n)) in arguments.iter().zip(&dims).enumerate() {
        check_map(map, *n, mesh, &format!("argument {k}"))?;
    }
    let cdims = evaluator.coefficient_dims();
    if cdims.len() != coefficients.len() {
        return Err(RuntimeError::DimensionMismatch(format!(
            "form has {} coefficients, {} given",
            cdims.len(),
            coefficients.len()
        )));
    }
    for (k, ((map, values), n)) in coefficients.iter().zip(&cdims).enumerate() {
        check_map(map, *n, mesh, &format!("coefficient {k}"))?;
        if values.len() != map.global_dim() {
            return Err(RuntimeError::DimensionMismatch(format!(
                "coefficient {k} has {} values, expected {}",
                values.len(),
                map.global_dim()
            )));
        }
    }

    let size: usize = dims.iter().product();
    let mut block = vec![0.0; size];
    let mut local: Vec<Vec<f64>> = cdims.iter().map(|&n| vec![0.0; n]).collect();
    let mut vector = vec![0.0; arguments.first().map_or(0, |m| m.global_dim())];
    let mut matrix = (dims.len() == 2).then(|| SparseBuilder::new(arguments[0].global_dim(), arguments[1].global_dim()));

    for c in 0..mesh.num_cells() {
        let map = mesh.affine_map(c)?;
        for ((dofmap, values), w) in coefficients.iter().zip(local.iter_mut()) {
            for (x, &dof) in w.iter_mut().zip(dofmap.cell_dofs(c)) {
                *x = values[dof];
            }
        }
        let w: Vec<&[f64]> = local.iter().map(|v| v.as_slice()).collect();
        evaluator.evaluate(&map, &w, &mut block);
        match dims.len() {
            1 => {
                for (&dof, v) in arguments[0].cell_dofs(c).iter().zip(&block) {
                    vector[dof] += v;
                }
            }
            _ => {
                let m = matrix.as_mut().expect("bilinear builder");
                m.add_block(arguments[0].cell_dofs(c), arguments[1].cell_dofs(c), &block);
            }
        }
    }
    Ok(match dims.len() {
        1 => GlobalTensor::Vector(vector),
        _ => GlobalTensor::Matrix(matrix.expect("bilinear builder").finalize()),
    })
}

fn check_map(map: &DofMap, local: usize, mesh: &Mesh, what: &str) -> Result<(), RuntimeError> {
    if map.local_dim() != local || map.num_cells() != mesh.num_cells() {
        return Err(RuntimeError::DimensionMismatch(format!(
            "dof map of {what} has local dimension {} on {} cells, expected {local} on {}",
            map.local_dim(),
            map.num_cells(),
            mesh.num_cells()
        )));
    }
    Ok(())
}

/// Build dof maps for the form's elements and assemble with the chosen
/// evaluator. `coefficients` are global vectors, one per coefficient slot.
pub fn assemble_form(
    form: &Form,
    mesh: &Mesh,
    path: EvaluationPath,
    coefficients: &[Vec<f64>],
) -> Result<GlobalTensor, RuntimeError> {
    if form.shape() != mesh.shape() {
        return Err(RuntimeError::DimensionMismatch(format!(
            "form is defined on a {} but the mesh is made of {}s",
            form.shape().name(),
            mesh.shape().name()
        )));
    }
    let arguments = form.arguments.iter().map(|e| build_dofmap(mesh, *e)).collect::<Result<Vec<_>, _>>()?;
    let coefficient_maps = form.coefficients.iter().map(|e| build_dofmap(mesh, *e)).collect::<Result<Vec<_>, _>>()?;
    if coefficients.len() != coefficient_maps.len() {
        return Err(RuntimeError::DimensionMismatch(format!(
            "form has {} coefficients, {} given",
            coefficient_maps.len(),
            coefficients.len()
        )));
    }
    let argument_refs: Vec<&DofMap> = arguments.iter().collect();
    let pairs: Vec<(&DofMap, &[f64])> = coefficient_maps.iter().zip(coefficients).map(|(m, v)| (m, v.as_slice())).collect();
    match path {
        EvaluationPath::Tensor => {
            let compiled = CompiledForm::compile(form)?;
            assemble(&mut TensorEvaluator::new(&compiled), mesh, &argument_refs, &pairs)
        }
        EvaluationPath::Quadrature => {
            assemble(&mut QuadratureEvaluator::new(form)?, mesh, &argument_refs, &pairs)
        }
    }
}
