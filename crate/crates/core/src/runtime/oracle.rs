//! Direct quadrature evaluation of element tensors, independent of the
//! tensor representation. Used as the reference in equivalence tests and
//! as the quadrature path of the benchmark.

use crate::form::{expand_to_monomials, Form, IndexRef};
use crate::reference::{make_quadrature, ElementSpec, Shape, ValueRank};

use super::{AffineMap, ElementEvaluator, RuntimeError};

struct Table {
    spec: ElementSpec,
    ns: usize,
    // [q * ns + k]
    values: Vec<f64>,
    differentiated: bool,
    // [(q * d + a) * ns + k], reference and physical derivatives
    reference: Vec<f64>,
    physical: Vec<f64>,
}

struct Rule {
    degree: usize,
    weights: Vec<f64>,
    tables: Vec<Table>,
}

struct Factor {
    table: usize,
    slot: usize,
    component: Option<IndexRef>,
    derivative: Option<IndexRef>,
}

struct Term {
    scalar: f64,
    rule: usize,
    arguments: Vec<Factor>,
    coefficients: Vec<Factor>,
    // user index ids summed over
    free: Vec<usize>,
}

/// Evaluates `A^K_i = Σ_q w_q det F_K' Π factors(x_q)` monomial by
/// monomial, with derivatives mapped to physical coordinates per factor.
pub struct QuadratureEvaluator {
    dim: usize,
    coefficients: Vec<ElementSpec>,
    rules: Vec<Rule>,
    terms: Vec<Term>,
    dims: Vec<usize>,
    index_values: Vec<usize>,
}

impl QuadratureEvaluator {
    /// Exact quadrature for every monomial.
    pub fn new(form: &Form) -> Result<Self, RuntimeError> {
        Self::with_degree(form, None)
    }

    /// Use a fixed quadrature degree for every monomial instead of the exact
    /// one (for example `2q - 2`).
    pub fn with_degree(form: &Form, degree: Option<usize>) -> Result<Self, RuntimeError> {
        if !(1..=2).contains(&form.arity()) {
            return Err(RuntimeError::UnsupportedArity(form.arity()));
        }
        let shape = form.shape();
        let dim = shape.dim();
        let mut rules: Vec<Rule> = Vec::new();
        let mut terms = Vec::new();
        for m in expand_to_monomials(form)? {
            let p = degree.unwrap_or_else(|| m.integrand_degree());
            let rule = match rules.iter().position(|r| r.degree == p) {
                Some(k) => k,
                None => {
                    let q = make_quadrature(shape, p);
                    rules.push(Rule { degree: p, weights: q.weights().to_vec(), tables: Vec::new() });
                    rules.len() - 1
                }
            };
            let mut free = Vec::new();
            let mut factor = |spec: ElementSpec, slot, component: Option<IndexRef>, derivatives: &[IndexRef]| {
                if derivatives.len() > 1 {
                    return Err(RuntimeError::Unsupported("derivatives of order above one".into()));
                }
                if (spec.value_rank == ValueRank::Vector) != component.is_some() {
                    return Err(RuntimeError::Unsupported("component use does not match the element".into()));
                }
                for i in component.iter().chain(derivatives) {
                    if let IndexRef::Free(id) = i {
                        if !free.contains(id) {
                            free.push(*id);
                        }
                    }
                }
                let table = table_index(&mut rules[rule], shape, spec)?;
                rules[rule].tables[table].differentiated |= !derivatives.is_empty();
                Ok(Factor { table, slot, component, derivative: derivatives.first().copied() })
            };
            let arguments = m
                .arguments
                .iter()
                .map(|a| factor(a.element, a.slot, a.component, &a.derivatives))
                .collect::<Result<Vec<_>, _>>()?;
            let coefficients = m
                .coefficients
                .iter()
                .map(|c| factor(c.element, c.slot, c.component, &c.derivatives))
                .collect::<Result<Vec<_>, _>>()?;
            terms.push(Term { scalar: m.scalar, rule, arguments, coefficients, free });
        }
        Ok(QuadratureEvaluator {
            dim,
            coefficients: form.coefficients.clone(),
            rules,
            terms,
            dims: form.arguments.iter().map(|e| e.space_dimension()).collect(),
            index_values: vec![0; form.index_names.len()],
        })
    }

    fn map_derivatives(&mut self, g: &[[f64; 3]; 3]) {
        let d = self.dim;
        for rule in &mut self.rules {
            let np = rule.weights.len();
            for t in rule.tables.iter_mut().filter(|t| t.differentiated) {
                let ns = t.ns;
                for q in 0..np {
                    for j in 0..d {
                        let out = (q * d + j) * ns;
                        for k in 0..ns {
                            let mut s = 0.0;
                            for (a, row) in g.iter().enumerate().take(d) {
                                s += row[j] * t.reference[(q * d + a) * ns + k];
                            }
                            t.physical[out + k] = s;
                        }
                    }
                }
            }
        }
    }
}

fn table_index(rule: &mut Rule, shape: Shape, spec: ElementSpec) -> Result<usize, RuntimeError> {
    if let Some(k) = rule.tables.iter().position(|t| t.spec == spec) {
        return Ok(k);
    }
    let element = spec.build()?;
    let points = make_quadrature(shape, rule.degree).points().to_vec();
    let tab = element.tabulate(&points)?;
    let ns = spec.scalar_dimension();
    let d = shape.dim();
    let np = points.len();
    let mut values = vec![0.0; np * ns];
    let mut reference = vec![0.0; np * d * ns];
    for q in 0..np {
        for k in 0..ns {
            values[q * ns + k] = tab.value(k, 0, q);
            for a in 0..d {
                reference[(q * d + a) * ns + k] = tab.gradient(k, 0, a, q);
            }
        }
    }
    let physical = reference.clone();
    rule.tables.push(Table { spec, ns, values, differentiated: false, reference, physical });
    Ok(rule.tables.len() - 1)
}

impl ElementEvaluator for QuadratureEvaluator {
    fn argument_dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn coefficient_dims(&self) -> Vec<usize> {
        self.coefficients.iter().map(|e| e.space_dimension()).collect()
    }

    fn evaluate(&mut self, map: &AffineMap, w: &[&[f64]], out: &mut [f64]) {
        self.map_derivatives(map.inverse());
        out.iter_mut().for_each(|v| *v = 0.0);
        let d = self.dim;
        let det = map.det();
        let dims = &self.dims;
        let idx = &mut self.index_values;
        let mut rows: [&[f64]; 2] = [&[], &[]];
        let mut blocks = [0usize; 2];
        for term in &self.terms {
            let rule = &self.rules[term.rule];
            let np = rule.weights.len();
            let assignments = d.pow(term.free.len() as u32);
            for assignment in 0..assignments {
                let mut rest = assignment;
                for id in &term.free {
                    idx[*id] = rest % d;
                    rest /= d;
                }
                let resolve = |i: IndexRef| match i {
                    IndexRef::Fixed(n) => n,
                    IndexRef::Free(id) => idx[id],
                };
                for q in 0..np {
                    let mut s = term.scalar * det * rule.weights[q];
                    for c in &term.coefficients {
                        let t = &rule.tables[c.table];
                        let row = factor_row(t, d, q, c.derivative.map(resolve));
                        let offset = c.component.map(resolve).unwrap_or(0) * t.ns;
                        let coeffs = &w[c.slot][offset..offset + t.ns];
                        s *= row.iter().zip(coeffs).map(|(a, b)| a * b).sum::<f64>();
                    }
                    if s == 0.0 {
                        continue;
                    }
                    for a in &term.arguments {
                        let t = &rule.tables[a.table];
                        rows[a.slot] = factor_row(t, d, q, a.derivative.map(resolve));
                        blocks[a.slot] = a.component.map(resolve).unwrap_or(0) * t.ns;
                    }
                    accumulate(&rows[..dims.len()], &blocks, dims, s, out);
                }
            }
        }
    }
}

fn factor_row(t: &Table, d: usize, q: usize, derivative: Option<usize>) -> &[f64] {
    match derivative {
        None => &t.values[q * t.ns..(q + 1) * t.ns],
        Some(j) => &t.physical[(q * d + j) * t.ns..(q * d + j + 1) * t.ns],
    }
}

// out[i_0, i_1] += s * f_0[i_0] * f_1[i_1], where f_k is nonzero only on
// the block starting at offset k.
fn accumulate(f: &[&[f64]], offsets: &[usize; 2], dims: &[usize], s: f64, out: &mut [f64]) {
    match f {
        [f0] => {
            for (o, v) in out[offsets[0]..offsets[0] + f0.len()].iter_mut().zip(*f0) {
                *o += s * v;
            }
        }
        [f0, f1] => {
            let stride = dims[1];
            for (k0, v0) in f0.iter().enumerate() {
                let t = s * v0;
                let start = (offsets[0] + k0) * stride + offsets[1];
                for (o, v1) in out[start..start + f1.len()].iter_mut().zip(*f1) {
                    *o += t * v1;
                }
            }
        }
        _ => unreachable!("arity checked at construction"),
    }
}
