//! Name resolution: turns parsed statements into algebra values and forms.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::reference::{Continuity, ElementSpec, Shape, ValueRank};

use super::ast::{BasisFunction, Expr, Factor, Function, IndexRef, Sum};
use super::syntax::{ElementDecl, FormFile, Pos, Rhs, SynExpr, SynIndex};
use super::{Form, FormError};

#[derive(Clone, Debug)]
enum Value {
    Element(ElementSpec),
    Basis(BasisFunction),
    Function(Function),
    Index(usize),
    Expr(Expr),
}

enum Lowered {
    Scalar(f64),
    Expr(Expr),
}

struct Scope {
    names: HashMap<String, Value>,
    index_names: Vec<String>,
    num_basis: usize,
    num_functions: usize,
}

fn type_error(pos: Pos, message: impl Into<String>) -> FormError {
    FormError::Syntax { line: pos.line, col: pos.col, message: message.into() }
}

fn element_spec(decl: &ElementDecl) -> Result<ElementSpec, FormError> {
    let continuity = match decl.family.as_str() {
        "Lagrange" | "CG" => Continuity::Continuous,
        "Discontinuous Lagrange" | "DG" => Continuity::Discontinuous,
        other => return Err(FormError::UnsupportedFamily(other.to_string())),
    };
    let shape: Shape = decl.shape.parse()?;
    let value_rank = if decl.vector { ValueRank::Vector } else { ValueRank::Scalar };
    let spec = ElementSpec::new(shape, decl.degree, value_rank, continuity);
    spec.validate()?;
    Ok(spec)
}

impl Scope {
    fn lookup(&self, name: &str, pos: Pos) -> Result<&Value, FormError> {
        self.names
            .get(name)
            .ok_or_else(|| FormError::UndefinedName { name: name.to_string(), line: pos.line, col: pos.col })
    }

    fn index(&self, idx: &SynIndex) -> Result<IndexRef, FormError> {
        match idx {
            SynIndex::Literal(n) => Ok(IndexRef::Fixed(*n)),
            SynIndex::Name(name, pos) => match self.lookup(name, *pos)? {
                Value::Index(id) => Ok(IndexRef::Free(*id)),
                _ => Err(type_error(*pos, format!("'{name}' is not an index"))),
            },
        }
    }

    fn lower(&self, e: &SynExpr) -> Result<Lowered, FormError> {
        Ok(match e {
            SynExpr::Number(v) => Lowered::Scalar(*v),
            SynExpr::Name(name, pos) => match self.lookup(name, *pos)? {
                Value::Basis(b) => Lowered::Expr(Expr::Basis(b.clone())),
                Value::Function(f) => Lowered::Expr(Expr::Function(f.clone())),
                Value::Expr(x) => Lowered::Expr(x.clone()),
                Value::Element(_) => return Err(type_error(*pos, format!("element '{name}' used in an expression"))),
                Value::Index(_) => return Err(type_error(*pos, format!("index '{name}' used as a value"))),
            },
            SynExpr::Measure(pos) => return Err(type_error(*pos, "'dx' must terminate an integrand term")),
            SynExpr::Neg(inner) => match self.lower(inner)? {
                Lowered::Scalar(v) => Lowered::Scalar(-v),
                Lowered::Expr(x) => Lowered::Expr(x.neg()),
            },
            SynExpr::Add(a, b) | SynExpr::Sub(a, b) => {
                let (Lowered::Expr(x), Lowered::Expr(y)) = (self.lower(a)?, self.lower(b)?) else {
                    return Err(type_error(first_pos(e), "constants may only appear as multiplicative scalars"));
                };
                Lowered::Expr(if matches!(e, SynExpr::Add(..)) { x.add(y)? } else { x.sub(y)? })
            }
            SynExpr::Mul(a, b) => match (self.lower(a)?, self.lower(b)?) {
                (Lowered::Scalar(s), Lowered::Scalar(t)) => Lowered::Scalar(s * t),
                (Lowered::Scalar(s), Lowered::Expr(x)) | (Lowered::Expr(x), Lowered::Scalar(s)) => {
                    Lowered::Expr(x.scale(s))
                }
                (Lowered::Expr(x), Lowered::Expr(y)) => Lowered::Expr(x.mul(y)?),
            },
            SynExpr::Div(a, v) => {
                if *v == 0.0 {
                    return Err(type_error(first_pos(e), "division by zero"));
                }
                match self.lower(a)? {
                    Lowered::Scalar(s) => Lowered::Scalar(s / v),
                    Lowered::Expr(x) => Lowered::Expr(x.scale(1.0 / v)),
                }
            }
            SynExpr::Component(inner, idx) => match self.lower(inner)? {
                Lowered::Expr(x) => Lowered::Expr(x.component(self.index(idx)?)?),
                Lowered::Scalar(_) => return Err(type_error(first_pos(e), "cannot index a number")),
            },
            SynExpr::Derivative(inner, idx) => match self.lower(inner)? {
                Lowered::Expr(x) => Lowered::Expr(x.dx(self.index(idx)?)),
                // derivative of a constant
                Lowered::Scalar(_) => Lowered::Scalar(0.0),
            },
        })
    }

    /// Lower an integrand: every additive term must end with `*dx`.
    fn lower_integrand(&self, e: &SynExpr) -> Result<Expr, FormError> {
        let mut terms = Vec::new();
        split_terms(e, 1.0, &mut terms);
        let mut total: Option<Expr> = None;
        for (sign, term) in terms {
            let body = match term {
                SynExpr::Mul(body, last) if matches!(**last, SynExpr::Measure(_)) => body,
                SynExpr::Measure(pos) => return Err(type_error(*pos, "integrand is missing before 'dx'")),
                other => {
                    let pos = first_pos(other);
                    return Err(FormError::MissingMeasure { line: pos.line, col: pos.col });
                }
            };
            let lowered = match self.lower(body)? {
                Lowered::Expr(x) => x.scale(sign),
                Lowered::Scalar(_) => {
                    return Err(type_error(first_pos(body), "integrand contains no basis functions"));
                }
            };
            total = Some(match total {
                None => lowered,
                Some(t) => t.add(lowered)?,
            });
        }
        Ok(total.expect("at least one term"))
    }
}

fn split_terms<'a>(e: &'a SynExpr, sign: f64, out: &mut Vec<(f64, &'a SynExpr)>) {
    match e {
        SynExpr::Add(a, b) => {
            split_terms(a, sign, out);
            split_terms(b, sign, out);
        }
        SynExpr::Sub(a, b) => {
            split_terms(a, sign, out);
            split_terms(b, -sign, out);
        }
        SynExpr::Neg(a) => split_terms(a, -sign, out),
        other => out.push((sign, other)),
    }
}

fn contains_measure(e: &SynExpr) -> bool {
    match e {
        SynExpr::Measure(_) => true,
        SynExpr::Number(_) | SynExpr::Name(..) => false,
        SynExpr::Neg(a) | SynExpr::Div(a, _) | SynExpr::Component(a, _) | SynExpr::Derivative(a, _) => {
            contains_measure(a)
        }
        SynExpr::Add(a, b) | SynExpr::Sub(a, b) | SynExpr::Mul(a, b) => contains_measure(a) || contains_measure(b),
    }
}

fn referenced_names(e: &SynExpr, out: &mut HashSet<String>) {
    match e {
        SynExpr::Name(n, _) => {
            out.insert(n.clone());
        }
        SynExpr::Number(_) | SynExpr::Measure(_) => {}
        SynExpr::Neg(a) | SynExpr::Div(a, _) | SynExpr::Component(a, _) | SynExpr::Derivative(a, _) => {
            referenced_names(a, out)
        }
        SynExpr::Add(a, b) | SynExpr::Sub(a, b) | SynExpr::Mul(a, b) => {
            referenced_names(a, out);
            referenced_names(b, out);
        }
    }
}

fn first_pos(e: &SynExpr) -> Pos {
    match e {
        SynExpr::Name(_, p) | SynExpr::Measure(p) => *p,
        SynExpr::Number(_) => Pos::default(),
        SynExpr::Neg(a) | SynExpr::Div(a, _) | SynExpr::Component(a, _) | SynExpr::Derivative(a, _) => first_pos(a),
        SynExpr::Add(a, b) | SynExpr::Sub(a, b) | SynExpr::Mul(a, b) => {
            let p = first_pos(a);
            if p == Pos::default() {
                first_pos(b)
            } else {
                p
            }
        }
    }
}

/// Renumber argument and coefficient slots to the ones the integrand uses
/// and check linearity in every argument.
fn build_form(name: &str, integrand: Sum, index_names: &[String]) -> Result<Form, FormError> {
    let mut arg_slots = BTreeSet::new();
    let mut coeff_slots = BTreeSet::new();
    let mut arg_elements = HashMap::new();
    let mut coeff_elements = HashMap::new();
    for p in &integrand.terms {
        for f in &p.factors {
            match f {
                Factor::Basis(b) => {
                    arg_slots.insert(b.slot);
                    arg_elements.insert(b.slot, b.element);
                }
                Factor::Function(c) => {
                    coeff_slots.insert(c.slot);
                    coeff_elements.insert(c.slot, c.element);
                }
            }
        }
    }
    if arg_slots.is_empty() {
        return Err(FormError::Arity(format!("form '{name}' has no arguments")));
    }
    let arg_map: HashMap<usize, usize> = arg_slots.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let coeff_map: HashMap<usize, usize> = coeff_slots.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let mut integrand = integrand;
    for p in &mut integrand.terms {
        let mut seen = vec![false; arg_slots.len()];
        for f in &mut p.factors {
            match f {
                Factor::Basis(b) => {
                    b.slot = arg_map[&b.slot];
                    if std::mem::replace(&mut seen[b.slot], true) {
                        return Err(FormError::Arity(format!(
                            "argument {} appears twice in one product of form '{name}'",
                            b.slot
                        )));
                    }
                }
                Factor::Function(c) => c.slot = coeff_map[&c.slot],
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(FormError::Arity(format!(
                "form '{name}' is not linear in argument {missing}: a term does not contain it"
            )));
        }
    }
    Ok(Form {
        name: name.to_string(),
        integrand,
        arguments: arg_slots.iter().map(|s| arg_elements[s]).collect(),
        coefficients: coeff_slots.iter().map(|s| coeff_elements[s]).collect(),
        index_names: index_names.to_vec(),
    })
}

/// Resolve names and build one [`Form`] per assignment whose right-hand
/// side is an integral.
pub fn lower_file(file: &FormFile) -> Result<Vec<Form>, FormError> {
    let mut scope = Scope { names: HashMap::new(), index_names: Vec::new(), num_basis: 0, num_functions: 0 };
    let mut forms = Vec::new();
    let mut referenced = HashSet::new();
    for stmt in &file.statements {
        if let Rhs::Expr(e) = &stmt.rhs {
            referenced_names(e, &mut referenced);
        }
    }
    for stmt in &file.statements {
        let value = match &stmt.rhs {
            Rhs::Element(decl) => Value::Element(element_spec(decl)?),
            Rhs::BasisFunction(el, pos) | Rhs::Function(el, pos) => {
                let element = match scope.lookup(el, *pos)? {
                    Value::Element(spec) => *spec,
                    _ => return Err(type_error(*pos, format!("'{el}' is not a finite element"))),
                };
                if matches!(stmt.rhs, Rhs::BasisFunction(..)) {
                    scope.num_basis += 1;
                    Value::Basis(BasisFunction {
                        element,
                        slot: scope.num_basis - 1,
                        component: None,
                        derivatives: vec![],
                    })
                } else {
                    scope.num_functions += 1;
                    Value::Function(Function {
                        element,
                        slot: scope.num_functions - 1,
                        component: None,
                        derivatives: vec![],
                    })
                }
            }
            Rhs::Index => {
                scope.index_names.push(stmt.name.clone());
                Value::Index(scope.index_names.len() - 1)
            }
            Rhs::Expr(e) if contains_measure(e) => {
                let integrand = scope.lower_integrand(e)?.into_sum();
                forms.retain(|f: &Form| f.name != stmt.name);
                forms.push(build_form(&stmt.name, integrand, &scope.index_names)?);
                continue;
            }
            // an expression nobody refers to was meant as an integrand
            Rhs::Expr(e) if !referenced.contains(&stmt.name) => {
                let pos = first_pos(e);
                return Err(FormError::MissingMeasure { line: pos.line, col: pos.col });
            }
            Rhs::Expr(e) => match scope.lower(e)? {
                Lowered::Expr(x) => Value::Expr(x),
                Lowered::Scalar(_) => {
                    return Err(type_error(stmt.pos, "constants may only appear as multiplicative scalars"))
                }
            },
        };
        scope.names.insert(stmt.name.clone(), value);
    }
    Ok(forms)
}
