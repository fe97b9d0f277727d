use std::collections::HashMap;

use crate::reference::{Continuity, ElementSpec};

use super::{Mesh, RuntimeError};

/// Local-to-global map `ι(K, i)` for one element on one mesh.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    element: ElementSpec,
    global_dim: usize,
    local_dim: usize,
    dofs: Vec<usize>,
}

impl DofMap {
    pub fn element(&self) -> ElementSpec {
        self.element
    }

    /// Number of global degrees of freedom `M`.
    pub fn global_dim(&self) -> usize {
        self.global_dim
    }

    /// Number of local degrees of freedom `n`.
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn num_cells(&self) -> usize {
        self.dofs.len() / self.local_dim
    }

    /// Global dofs of cell `c`, in local order.
    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.dofs[c * self.local_dim..(c + 1) * self.local_dim]
    }
}

/// Build the dof map of a Lagrange element.
///
/// Continuous elements number vertex dofs by global vertex id; every other
/// node is identified by the global vertices of its supporting entity and
/// its lattice coordinates there, so neighbouring cells agree regardless of
/// their local vertex order. Vector elements repeat the scalar numbering
/// per component, component-major. Discontinuous dofs are cell-local.
pub fn build_dofmap(mesh: &Mesh, element: ElementSpec) -> Result<DofMap, RuntimeError> {
    if element.shape.dim() != mesh.dim() {
        return Err(RuntimeError::DimensionMismatch(format!(
            "{}-dimensional element on a {}-dimensional mesh",
            element.shape.dim(),
            mesh.dim()
        )));
    }
    let lagrange = element.build()?;
    let n = element.space_dimension();
    let ns = element.scalar_dimension();
    let nc = element.num_components();
    let cells = mesh.num_cells();

    if element.continuity == Continuity::Discontinuous {
        return Ok(DofMap { element, global_dim: n * cells, local_dim: n, dofs: (0..n * cells).collect() });
    }

    let mut scalar = vec![0; ns * cells];
    let mut keys: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut next = mesh.num_vertices();
    for c in 0..cells {
        let verts = mesh.cell(c);
        for (k, lattice) in lagrange.node_lattice().iter().enumerate() {
            let mut key: Vec<(usize, usize)> =
                verts.iter().enumerate().filter(|(v, _)| lattice[*v] > 0).map(|(v, &g)| (g, lattice[v])).collect();
            scalar[c * ns + k] = if key.len() == 1 {
                key[0].0
            } else {
                key.sort_unstable();
                *keys.entry(key).or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            };
        }
    }
    let mut dofs = vec![0; n * cells];
    for c in 0..cells {
        for comp in 0..nc {
            for k in 0..ns {
                dofs[c * n + comp * ns + k] = comp * next + scalar[c * ns + k];
            }
        }
    }
    Ok(DofMap { element, global_dim: nc * next, local_dim: n, dofs })
}
