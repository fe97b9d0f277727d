use std::collections::HashMap;

use crate::reference::{make_quadrature, ElementSpec, ScalarTable};

use super::classify::{IndexedMonomial, RefIndex};
use super::TensorError;

/// Dense reference tensor `A^0`, row-major over primary then secondary
/// indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceTensor {
    pub dims: Vec<usize>,
    /// Number of leading primary indices.
    pub num_primary: usize,
    pub entries: Vec<f64>,
}

impl ReferenceTensor {
    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn primary_dims(&self) -> &[usize] {
        &self.dims[..self.num_primary]
    }

    pub fn secondary_dims(&self) -> &[usize] {
        &self.dims[self.num_primary..]
    }

    /// Flat position of a full multi-index.
    pub fn flat(&self, index: &[usize]) -> usize {
        flatten(&self.dims, index)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.entries[self.flat(index)]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn flatten(dims: &[usize], index: &[usize]) -> usize {
    index.iter().zip(dims).fold(0, |acc, (i, n)| acc * n + i)
}

pub(crate) fn unflatten(dims: &[usize], mut flat: usize, out: &mut [usize]) {
    for (k, n) in dims.iter().enumerate().rev() {
        out[k] = flat % n;
        flat /= n;
    }
}

/// Nonzero entries of a reference tensor: those with
/// `|value| > tolerance * max|entries|`.
pub fn drop_zeros(tensor: &ReferenceTensor, tolerance: f64) -> Vec<(Vec<usize>, f64)> {
    let cutoff = tolerance * tensor.max_abs();
    let mut index = vec![0; tensor.rank()];
    tensor
        .entries
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > cutoff)
        .map(|(flat, &v)| {
            unflatten(&tensor.dims, flat, &mut index);
            (index.clone(), v)
        })
        .collect()
}

// Variables of the enumeration: tensor positions then reference auxiliaries.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Var {
    Tensor(usize),
    Aux(usize),
}

struct FactorPlan<'a> {
    table: &'a ScalarTable,
    scalar_dim: usize,
    vector: bool,
    basis: Var,
    component: Option<Component>,
    direction: Option<Var>,
}

#[derive(Clone, Copy)]
enum Component {
    Fixed(usize),
    Var(Var),
}

fn var_of(index: RefIndex, num_primary: usize) -> Option<Var> {
    match index {
        RefIndex::Primary(slot) => Some(Var::Tensor(slot)),
        RefIndex::Secondary(pos) => Some(Var::Tensor(num_primary + pos)),
        RefIndex::Auxiliary(a) => Some(Var::Aux(a)),
        RefIndex::Fixed(_) => None,
    }
}

/// Compute `A^0` by quadrature on the reference cell, exact for the
/// integrand degree unless `degree` overrides it.
pub fn compute_reference_tensor(m: &IndexedMonomial, degree: Option<usize>) -> Result<ReferenceTensor, TensorError> {
    let rule = make_quadrature(m.shape, degree.unwrap_or(m.integrand_degree));
    let mut tables: HashMap<ElementSpec, ScalarTable> = HashMap::new();
    for f in &m.factors {
        if !tables.contains_key(&f.element) {
            let element = f.element.build()?;
            tables.insert(f.element, element.tabulate_scalar(rule.points()));
        }
    }

    let r = m.arity();
    let dims: Vec<usize> = m.primary_dims.iter().copied().chain(m.secondary.iter().map(|s| s.range)).collect();
    let plans: Vec<FactorPlan> = m
        .factors
        .iter()
        .map(|f| FactorPlan {
            table: &tables[&f.element],
            scalar_dim: f.element.scalar_dimension(),
            vector: f.element.num_components() > 1 || f.component.is_some(),
            basis: var_of(f.basis, r).expect("basis index is primary or secondary"),
            component: f.component.map(|c| match c {
                RefIndex::Fixed(n) => Component::Fixed(n),
                other => Component::Var(var_of(other, r).expect("non-fixed")),
            }),
            direction: f.direction.map(|p| Var::Tensor(r + p)),
        })
        .collect();

    // Enumeration order: per factor, basis, component and direction.
    let mut order: Vec<Var> = Vec::new();
    let mut ready_at: Vec<Vec<usize>> = Vec::new();
    for (k, p) in plans.iter().enumerate() {
        let comp = match p.component {
            Some(Component::Var(v)) => Some(v),
            _ => None,
        };
        for v in [Some(p.basis), comp, p.direction].into_iter().flatten() {
            if !order.contains(&v) {
                order.push(v);
                ready_at.push(Vec::new());
            }
        }
        ready_at.last_mut().expect("factor has a basis variable").push(k);
    }
    // every tensor position is attached to some factor, this only guards
    // the bookkeeping
    for t in 0..dims.len() {
        if !order.contains(&Var::Tensor(t)) {
            order.push(Var::Tensor(t));
            ready_at.push(Vec::new());
        }
    }
    let ranges: Vec<usize> = order
        .iter()
        .map(|v| match v {
            Var::Tensor(t) => dims[*t],
            Var::Aux(a) => m.reference_aux[*a],
        })
        .collect();

    let np = rule.len();
    let total: usize = dims.iter().product();
    let mut entries = vec![0.0; total];
    let mut state = Enumeration {
        plans: &plans,
        order: &order,
        ready_at: &ready_at,
        ranges: &ranges,
        tensor_values: vec![0; dims.len()],
        aux_values: vec![0; m.reference_aux.len()],
        products: vec![vec![0.0; np]; order.len() + 1],
        weights: rule.weights(),
        dims: &dims,
        entries: &mut entries,
    };
    state.products[0].iter_mut().for_each(|p| *p = 1.0);
    state.recurse(0);
    Ok(ReferenceTensor { dims, num_primary: r, entries })
}

struct Enumeration<'a> {
    plans: &'a [FactorPlan<'a>],
    order: &'a [Var],
    ready_at: &'a [Vec<usize>],
    ranges: &'a [usize],
    tensor_values: Vec<usize>,
    aux_values: Vec<usize>,
    // products[depth] is the running product of all factors completed
    // before `depth`
    products: Vec<Vec<f64>>,
    weights: &'a [f64],
    dims: &'a [usize],
    entries: &'a mut [f64],
}

impl Enumeration<'_> {
    fn value(&self, v: Var) -> usize {
        match v {
            Var::Tensor(t) => self.tensor_values[t],
            Var::Aux(a) => self.aux_values[a],
        }
    }

    fn recurse(&mut self, depth: usize) {
        if depth == self.order.len() {
            let integral: f64 = self.products[depth].iter().zip(self.weights).map(|(p, w)| p * w).sum();
            let flat = flatten(self.dims, &self.tensor_values);
            self.entries[flat] += integral;
            return;
        }
        let var = self.order[depth];
        'values: for value in 0..self.ranges[depth] {
            match var {
                Var::Tensor(t) => self.tensor_values[t] = value,
                Var::Aux(a) => self.aux_values[a] = value,
            }
            {
                let (done, rest) = self.products.split_at_mut(depth + 1);
                rest[0].copy_from_slice(&done[depth]);
            }
            let (plans, ready_at) = (self.plans, self.ready_at);
            for &k in &ready_at[depth] {
                let plan = &plans[k];
                let basis = self.value(plan.basis);
                if plan.vector {
                    let comp = match plan.component {
                        Some(Component::Fixed(n)) => n,
                        Some(Component::Var(v)) => self.value(v),
                        None => 0,
                    };
                    if basis / plan.scalar_dim != comp {
                        continue 'values;
                    }
                }
                let scalar = basis % plan.scalar_dim;
                let column = match plan.direction {
                    Some(dir) => plan.table.gradient_column(scalar, self.value(dir)),
                    None => plan.table.value_column(scalar),
                };
                let next = &mut self.products[depth + 1];
                next.iter_mut().zip(column).for_each(|(p, c)| *p *= c);
            }
            self.recurse(depth + 1);
        }
    }
}
