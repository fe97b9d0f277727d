use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::tensor::{Atom, CompiledForm, GeometryTensorExpr};

use super::{format_sci, EmitterOptions};

struct Kernel {
    dim: usize,
    coefficient_offsets: Vec<usize>,
    geometry: Vec<String>,
    block: Vec<String>,
    jacobian_used: BTreeSet<(usize, usize)>,
}

fn component_name(k: usize, dims: &[usize], flat: usize) -> String {
    let mut alpha = vec![0; dims.len()];
    let mut rest = flat;
    for (a, n) in alpha.iter_mut().zip(dims).rev() {
        *a = rest % n;
        rest /= n;
    }
    let mut name = format!("G{k}");
    for a in alpha {
        let _ = write!(name, "_{a}");
    }
    name
}

fn component_expression(
    g: &GeometryTensorExpr,
    flat: usize,
    offsets: &[usize],
    precision: usize,
    used: &mut BTreeSet<(usize, usize)>,
) -> String {
    let mut alpha = vec![0; g.dims.len()];
    let mut rest = flat;
    for (a, n) in alpha.iter_mut().zip(&g.dims).rev() {
        *a = rest % n;
        rest /= n;
    }
    let products: Vec<String> = g
        .component_products(&alpha)
        .iter()
        .map(|atoms| {
            atoms
                .iter()
                .map(|atom| match *atom {
                    Atom::Jacobian { reference, physical } => {
                        used.insert((reference, physical));
                        format!("g{reference}{physical}")
                    }
                    Atom::Coefficient { slot, index } => format!("w[{}]", offsets[slot] + index),
                })
                .collect::<Vec<_>>()
                .join("*")
        })
        .collect();
    let mut s = String::new();
    if g.scalar != 1.0 {
        let _ = write!(s, "{}*", format_sci(g.scalar, precision));
    }
    s.push_str("det");
    match products.as_slice() {
        [only] if only.is_empty() => {}
        [only] => {
            let _ = write!(s, "*{only}");
        }
        many => {
            let _ = write!(s, "*({})", many.iter().map(|p| if p.is_empty() { "1.0" } else { p }).collect::<Vec<_>>().join(" + "));
        }
    }
    s
}

fn build(form: &CompiledForm, options: &EmitterOptions) -> Kernel {
    let precision = options.precision();
    let mut offsets = Vec::new();
    let mut total = 0;
    for n in form.coefficient_dims() {
        offsets.push(total);
        total += n;
    }
    let mut geometry = Vec::new();
    let mut used = BTreeSet::new();
    let mut entries: Vec<Vec<(f64, String)>> = vec![Vec::new(); form.element_size()];
    for (k, term) in form.terms.iter().enumerate() {
        let needed: BTreeSet<u32> = term.nonzeros.iter().map(|nz| nz.secondary).collect();
        for &flat in &needed {
            let name = component_name(k, &term.geometry.dims, flat as usize);
            let expr = component_expression(&term.geometry, flat as usize, &offsets, precision, &mut used);
            geometry.push(format!("const double {name} = {expr};"));
        }
        for nz in &term.nonzeros {
            entries[nz.primary as usize].push((nz.value, component_name(k, &term.geometry.dims, nz.secondary as usize)));
        }
    }
    let block = entries
        .iter()
        .enumerate()
        .map(|(i, terms)| {
            let mut s = format!("block[{i}] = ");
            if terms.is_empty() {
                s.push_str("0.0");
            }
            for (k, (value, name)) in terms.iter().enumerate() {
                let text = format_sci(value.abs(), precision);
                match (k, *value < 0.0) {
                    (0, false) => {}
                    (0, true) => s.push('-'),
                    (_, false) => s.push_str(" + "),
                    (_, true) => s.push_str(" - "),
                }
                let _ = write!(s, "{text}*{name}");
            }
            s.push(';');
            s
        })
        .collect();
    Kernel { dim: form.shape.dim(), coefficient_offsets: offsets, geometry, block, jacobian_used: used }
}

/// Straight-line C99 translation unit computing the element tensor.
///
/// The generated function reads an `affine_map_<d>D` record holding
/// `det` and `g[a][j] = ∂X_a/∂x_j`, plus a flat coefficient array `w`
/// (slot-major) when the form has coefficients, and fills `block`
/// row-major.
pub fn emit_c(form: &CompiledForm, options: &EmitterOptions) -> String {
    let kernel = build(form, options);
    let d = kernel.dim;
    let record = format!("affine_map_{d}D");
    let guard = format!("AFFINE_MAP_{d}D_DEFINED");
    let dims: Vec<String> = form.element_dims().iter().map(|n| n.to_string()).collect();
    let mut s = String::new();
    let _ = writeln!(s, "/* Element tensor of form '{}': {} entries ({}). */", form.name, form.element_size(), dims.join(" x "));
    let _ = writeln!(s, "#ifndef {guard}");
    let _ = writeln!(s, "#define {guard}");
    let _ = writeln!(s, "typedef struct {{ double det; double g[{d}][{d}]; }} {record};");
    let _ = writeln!(s, "#endif");
    s.push('\n');
    let coefficient_arg = if kernel.coefficient_offsets.is_empty() { "" } else { ", const double w[]" };
    let _ = writeln!(s, "void {}(double block[], const {record}* map{coefficient_arg})", options.function_name());
    s.push_str("{\n");
    let _ = writeln!(s, "  const double det = map->det;");
    for (a, j) in &kernel.jacobian_used {
        let _ = writeln!(s, "  const double g{a}{j} = map->g[{a}][{j}];");
    }
    if !kernel.geometry.is_empty() {
        s.push('\n');
    }
    for line in &kernel.geometry {
        let _ = writeln!(s, "  {line}");
    }
    s.push('\n');
    for line in &kernel.block {
        let _ = writeln!(s, "  {line}");
    }
    s.push_str("}\n");
    s
}

/// Number of statements in the emitted kernel: one per geometry-tensor
/// component used and one per element-tensor entry.
pub fn count_code_lines(form: &CompiledForm) -> usize {
    let kernel = build(form, &EmitterOptions::default());
    kernel.geometry.len() + kernel.block.len()
}
