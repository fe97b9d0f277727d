use std::fmt;
use std::fmt::Write as _;

use crate::tensor::{CompiledForm, CompiledTerm, GeoIndex};

use super::{CodegenError, EmitterOptions};

/// S-expression used for geometry tensors in the raw listing.
#[derive(Clone, Debug, PartialEq)]
pub enum SExpr {
    Number(f64),
    Symbol(String),
    List(Vec<SExpr>),
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Number(v) => write!(f, "{v:e}"),
            SExpr::Symbol(s) => f.write_str(s),
            SExpr::List(items) => {
                f.write_str("(")?;
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn sym(s: impl Into<String>) -> SExpr {
    SExpr::Symbol(s.into())
}

fn geometry_sexpr(term: &CompiledTerm) -> SExpr {
    let g = &term.geometry;
    let mut atoms = vec![sym("*")];
    for t in &g.transforms {
        let physical = match t.physical {
            GeoIndex::Secondary(p) => sym(format!("a{p}")),
            GeoIndex::Auxiliary(a) => sym(format!("b{a}")),
            GeoIndex::Fixed(n) => sym(n.to_string()),
        };
        atoms.push(SExpr::List(vec![sym("dXdx"), sym(format!("a{}", t.reference)), physical]));
    }
    for c in &g.coefficients {
        atoms.push(SExpr::List(vec![sym("coeff"), sym(c.slot.to_string()), sym(format!("a{}", c.expansion))]));
    }
    let mut body = SExpr::List(atoms);
    for (a, range) in g.aux_ranges.iter().enumerate().rev() {
        body = SExpr::List(vec![sym("sum"), sym(format!("b{a}")), sym(range.to_string()), body]);
    }
    SExpr::List(vec![sym("*"), SExpr::Number(g.scalar), sym("det"), body])
}

/// Listing of the nonzero reference-tensor entries and geometry
/// expressions. Values are written in shortest round-trip form, so
/// [`read_raw`] recovers them exactly regardless of the precision option.
pub fn emit_raw(form: &CompiledForm, _options: &EmitterOptions) -> String {
    let mut s = String::from("formc-raw 1\n");
    let _ = writeln!(s, "form {} arity {} monomials {}", form.name, form.arity(), form.terms.len());
    for (k, term) in form.terms.iter().enumerate() {
        let dims = &term.reference.dims;
        let dims_text: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "tensor {k} rank {} dims {}", dims.len(), dims_text.join(" "));
        let secondary: usize = term.reference.secondary_dims().iter().product();
        let mut index = vec![0; dims.len()];
        for nz in &term.nonzeros {
            let flat = nz.primary as usize * secondary + nz.secondary as usize;
            let mut rest = flat;
            for (i, n) in index.iter_mut().zip(dims).rev() {
                *i = rest % n;
                rest /= n;
            }
            let idx: Vec<String> = index.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "e {} {:e}", idx.join(" "), nz.value);
        }
        let _ = writeln!(s, "geometry {k} {}", geometry_sexpr(term));
    }
    s
}

/// One monomial read back from a raw listing.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTerm {
    pub dims: Vec<usize>,
    pub entries: Vec<(Vec<usize>, f64)>,
    pub geometry: SExpr,
}

/// A raw listing read back into memory; it can be contracted directly.
#[derive(Clone, Debug, PartialEq)]
pub struct RawForm {
    pub name: String,
    pub arity: usize,
    pub terms: Vec<RawTerm>,
}

struct Env<'a> {
    det: f64,
    g: &'a [[f64; 3]; 3],
    w: &'a [&'a [f64]],
    alpha: Vec<usize>,
    beta: Vec<usize>,
}

impl Env<'_> {
    fn index(&self, e: &SExpr) -> usize {
        match e {
            SExpr::Symbol(s) => {
                if let Some(p) = s.strip_prefix('a') {
                    self.alpha[p.parse::<usize>().expect("checked by reader")]
                } else if let Some(b) = s.strip_prefix('b') {
                    self.beta[b.parse::<usize>().expect("checked by reader")]
                } else {
                    s.parse().expect("checked by reader")
                }
            }
            _ => unreachable!("checked by reader"),
        }
    }

    fn eval(&mut self, e: &SExpr) -> f64 {
        match e {
            SExpr::Number(v) => *v,
            SExpr::Symbol(_) => self.det,
            SExpr::List(items) => match items[0] {
                SExpr::Symbol(ref head) if head == "*" => {
                    let mut acc = 1.0;
                    for item in &items[1..] {
                        acc *= self.eval(item);
                    }
                    acc
                }
                SExpr::Symbol(ref head) if head == "dXdx" => self.g[self.index(&items[1])][self.index(&items[2])],
                SExpr::Symbol(ref head) if head == "coeff" => {
                    let slot = self.index(&items[1]);
                    self.w[slot][self.index(&items[2])]
                }
                _ => {
                    // directly nested sums run as one flat loop
                    let mut vars = Vec::new();
                    let mut body = e;
                    while let SExpr::List(items) = body {
                        match &items[0] {
                            SExpr::Symbol(h) if h == "sum" => {
                                vars.push((self.index_slot(&items[1]), self.index(&items[2])));
                                body = &items[3];
                            }
                            _ => break,
                        }
                    }
                    let total: usize = vars.iter().map(|v| v.1).product();
                    let mut acc = 0.0;
                    for flat in 0..total {
                        let mut rest = flat;
                        for &(slot, range) in vars.iter().rev() {
                            self.beta[slot] = rest % range;
                            rest /= range;
                        }
                        acc += self.eval(body);
                    }
                    acc
                }
            },
        }
    }

    fn index_slot(&self, e: &SExpr) -> usize {
        match e {
            SExpr::Symbol(s) => s[1..].parse().expect("checked by reader"),
            _ => unreachable!("checked by reader"),
        }
    }
}

impl RawForm {
    /// Element tensor dimensions, if any monomial is present.
    pub fn element_dims(&self) -> Option<Vec<usize>> {
        self.terms.first().map(|t| t.dims[..self.arity].to_vec())
    }

    /// Contract the listed entries against the geometry expressions, in the
    /// same order as the in-process contraction.
    pub fn tabulate_tensor(&self, det: f64, g: &[[f64; 3]; 3], w: &[&[f64]], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for term in &self.terms {
            let secondary_dims = &term.dims[self.arity..];
            let size: usize = secondary_dims.iter().product();
            let mut env = Env { det, g, w, alpha: vec![0; secondary_dims.len()], beta: vec![0; max_aux(&term.geometry)] };
            let mut values = vec![0.0; size];
            for (flat, v) in values.iter_mut().enumerate() {
                let mut rest = flat;
                for (a, n) in env.alpha.iter_mut().zip(secondary_dims).rev() {
                    *a = rest % n;
                    rest /= n;
                }
                *v = env.eval(&term.geometry);
            }
            for (index, value) in &term.entries {
                let primary = index[..self.arity].iter().zip(&term.dims).fold(0, |acc, (i, n)| acc * n + i);
                let secondary = index[self.arity..].iter().zip(secondary_dims).fold(0, |acc, (i, n)| acc * n + i);
                out[primary] += value * values[secondary];
            }
        }
    }
}

fn max_aux(e: &SExpr) -> usize {
    match e {
        SExpr::Symbol(s) if s.starts_with('b') => s[1..].parse::<usize>().map_or(0, |b| b + 1),
        SExpr::List(items) => items.iter().map(max_aux).max().unwrap_or(0),
        _ => 0,
    }
}

fn parse_sexpr(text: &str, line: usize) -> Result<SExpr, CodegenError> {
    let bad = |message: &str| CodegenError::RawFormat { line, message: message.into() };
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    for token in spaced.split_whitespace() {
        match token {
            "(" => stack.push(Vec::new()),
            ")" => {
                let list = stack.pop().ok_or_else(|| bad("unbalanced ')'"))?;
                stack.last_mut().ok_or_else(|| bad("unbalanced ')'"))?.push(SExpr::List(list));
            }
            t => {
                let starts_numeric = t.starts_with(|c: char| c == '-' || c == '+' || c == '.' || c.is_ascii_digit());
                let atom = if starts_numeric && t.contains(['e', '.']) {
                    SExpr::Number(t.parse().map_err(|_| bad("bad number"))?)
                } else {
                    SExpr::Symbol(t.to_string())
                };
                stack.last_mut().expect("root frame").push(atom);
            }
        }
    }
    if stack.len() != 1 {
        return Err(bad("unbalanced '('"));
    }
    let mut root = stack.pop().expect("root frame");
    if root.len() != 1 {
        return Err(bad("expected exactly one expression"));
    }
    let e = root.pop().expect("one expression");
    check_sexpr(&e, &bad)?;
    Ok(e)
}

fn check_sexpr(e: &SExpr, bad: &dyn Fn(&str) -> CodegenError) -> Result<(), CodegenError> {
    let is_index = |e: &SExpr| match e {
        SExpr::Symbol(s) => {
            s.parse::<usize>().is_ok()
                || (s.len() > 1 && (s.starts_with('a') || s.starts_with('b')) && s[1..].parse::<usize>().is_ok())
        }
        _ => false,
    };
    match e {
        SExpr::Number(_) => Ok(()),
        SExpr::Symbol(s) if s == "det" => Ok(()),
        SExpr::Symbol(s) => Err(bad(&format!("unknown atom '{s}'"))),
        SExpr::List(items) => {
            let Some(SExpr::Symbol(head)) = items.first() else { return Err(bad("list without an operator")) };
            match head.as_str() {
                "*" => items[1..].iter().try_for_each(|i| check_sexpr(i, bad)),
                "dXdx" | "coeff" if items.len() == 3 && is_index(&items[1]) && is_index(&items[2]) => Ok(()),
                "sum" if items.len() == 4
                    && matches!(&items[1], SExpr::Symbol(s) if s.starts_with('b') && is_index(&items[1]))
                    && matches!(&items[2], SExpr::Symbol(s) if s.parse::<usize>().is_ok()) =>
                {
                    check_sexpr(&items[3], bad)
                }
                other => Err(bad(&format!("malformed '{other}' expression"))),
            }
        }
    }
}

/// Read a listing written by [`emit_raw`].
pub fn read_raw(text: &str) -> Result<RawForm, CodegenError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim())).filter(|(_, l)| !l.is_empty()).peekable();
    let bad = |line: usize, message: &str| CodegenError::RawFormat { line, message: message.into() };
    match lines.next() {
        Some((_, "formc-raw 1")) => {}
        Some((line, _)) => return Err(bad(line, "expected 'formc-raw 1'")),
        None => return Err(bad(1, "empty listing")),
    }
    let (hline, header) = lines.next().ok_or_else(|| bad(2, "missing form line"))?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 6 || f[0] != "form" || f[2] != "arity" || f[4] != "monomials" {
        return Err(bad(hline, "expected 'form <name> arity <r> monomials <k>'"));
    }
    let arity: usize = f[3].parse().map_err(|_| bad(hline, "bad arity"))?;
    let count: usize = f[5].parse().map_err(|_| bad(hline, "bad monomial count"))?;
    let mut terms = Vec::with_capacity(count);
    for k in 0..count {
        let (tline, t) = lines.next().ok_or_else(|| bad(hline, "missing tensor line"))?;
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() < 5 || f[0] != "tensor" || f[1] != k.to_string() || f[2] != "rank" || f[4] != "dims" {
            return Err(bad(tline, &format!("expected 'tensor {k} rank <R> dims ...'")));
        }
        let rank: usize = f[3].parse().map_err(|_| bad(tline, "bad rank"))?;
        let dims: Vec<usize> = f[5..].iter().map(|d| d.parse().map_err(|_| bad(tline, "bad dimension"))).collect::<Result<_, _>>()?;
        if dims.len() != rank || rank < arity {
            return Err(bad(tline, "dims do not match rank"));
        }
        let mut entries = Vec::new();
        while let Some(&(eline, e)) = lines.peek() {
            if !e.starts_with("e ") {
                break;
            }
            lines.next();
            let f: Vec<&str> = e.split_whitespace().collect();
            if f.len() != rank + 2 {
                return Err(bad(eline, "wrong number of indices"));
            }
            let index: Vec<usize> = f[1..=rank].iter().map(|i| i.parse().map_err(|_| bad(eline, "bad index"))).collect::<Result<_, _>>()?;
            if index.iter().zip(&dims).any(|(i, n)| i >= n) {
                return Err(bad(eline, "index out of range"));
            }
            let value: f64 = f[rank + 1].parse().map_err(|_| bad(eline, "bad value"))?;
            entries.push((index, value));
        }
        let (gline, g) = lines.next().ok_or_else(|| bad(tline, "missing geometry line"))?;
        let prefix = format!("geometry {k} ");
        let Some(expr) = g.strip_prefix(&prefix) else {
            return Err(bad(gline, &format!("expected 'geometry {k} <expression>'")));
        };
        terms.push(RawTerm { dims, entries, geometry: parse_sexpr(expr, gline)? });
    }
    if let Some((line, _)) = lines.next() {
        return Err(bad(line, "unexpected trailing content"));
    }
    Ok(RawForm { name: f[1].to_string(), arity, terms })
}
