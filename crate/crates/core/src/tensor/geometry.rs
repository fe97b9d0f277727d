use super::classify::{CoefficientRef, MAX_INDICES, GeoIndex, IndexedMonomial, Transform};
use super::reference::unflatten;


/// Factor of one product in an expanded geometry component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    /// `g[reference][physical]` = ∂X_reference/∂x_physical.
    Jacobian { reference: usize, physical: usize },
    /// Entry `index` of the cell-local expansion of coefficient `slot`.
    Coefficient { slot: usize, index: usize },
}

/// Symbolic `G_K^α = c · det F_K' · Π ∂X/∂x · Π w`, with auxiliary indices
/// summed.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryTensorExpr {
    pub scalar: f64,
    pub det_power: i32,
    /// Range of each free (secondary) index.
    pub dims: Vec<usize>,
    pub transforms: Vec<Transform>,
    pub coefficients: Vec<CoefficientRef>,
    /// Ranges of the internally summed indices.
    pub aux_ranges: Vec<usize>,
}

/// Build the geometry expression of a classified monomial.
pub fn derive_geometry_expr(m: &IndexedMonomial) -> GeometryTensorExpr {
    GeometryTensorExpr {
        scalar: m.scalar,
        det_power: 1,
        dims: m.secondary.iter().map(|s| s.range).collect(),
        transforms: m.transforms.clone(),
        coefficients: m.coefficients.clone(),
        aux_ranges: m.geometry_aux.clone(),
    }
}

impl GeometryTensorExpr {
    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Number of components.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn num_aux_assignments(&self) -> usize {
        self.aux_ranges.iter().product()
    }

    fn atoms(&self, alpha: &[usize], beta: &[usize], out: &mut Vec<Atom>) {
        out.clear();
        for t in &self.transforms {
            let physical = match t.physical {
                GeoIndex::Secondary(p) => alpha[p],
                GeoIndex::Auxiliary(a) => beta[a],
                GeoIndex::Fixed(n) => n,
            };
            out.push(Atom::Jacobian { reference: alpha[t.reference], physical });
        }
        for c in &self.coefficients {
            out.push(Atom::Coefficient { slot: c.slot, index: alpha[c.expansion] });
        }
    }

    /// The products summed in component `alpha`, one per assignment of the
    /// auxiliary indices. The factor `scalar · det` is not included.
    pub fn component_products(&self, alpha: &[usize]) -> Vec<Vec<Atom>> {
        let mut beta = vec![0; self.aux_ranges.len()];
        (0..self.num_aux_assignments())
            .map(|b| {
                unflatten(&self.aux_ranges, b, &mut beta);
                let mut atoms = Vec::new();
                self.atoms(alpha, &beta, &mut atoms);
                atoms
            })
            .collect()
    }

    /// Evaluate every component, row-major, into `out`.
    ///
    /// `g[a][j]` is ∂X_a/∂x_j and `w[slot]` the cell-local expansion of
    /// each coefficient.
    pub fn evaluate(&self, det: f64, g: &[[f64; 3]; 3], w: &[&[f64]], out: &mut [f64]) {
        let prefactor = self.scalar * det.powi(self.det_power);
        let mut alpha_buf = [0usize; MAX_INDICES];
        let mut beta_buf = [0usize; MAX_INDICES];
        let alpha = &mut alpha_buf[..self.dims.len()];
        let beta = &mut beta_buf[..self.aux_ranges.len()];
        let nb = self.num_aux_assignments();
        for (flat, slot) in out.iter_mut().enumerate().take(self.len()) {
            unflatten(&self.dims, flat, alpha);
            let mut sum = 0.0;
            for b in 0..nb {
                unflatten(&self.aux_ranges, b, beta);
                let mut product = 1.0;
                for t in &self.transforms {
                    let physical = match t.physical {
                        GeoIndex::Secondary(p) => alpha[p],
                        GeoIndex::Auxiliary(a) => beta[a],
                        GeoIndex::Fixed(n) => n,
                    };
                    product *= g[alpha[t.reference]][physical];
                }
                for c in &self.coefficients {
                    product *= w[c.slot][alpha[c.expansion]];
                }
                sum += product;
            }
            *slot = prefactor * sum;
        }
    }
}
