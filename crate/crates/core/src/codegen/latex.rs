use std::fmt::Write as _;

use crate::tensor::{CompiledForm, CompiledTerm, GeoIndex};

use super::{format_sci, EmitterOptions};

fn latex_number(v: f64, precision: usize) -> String {
    let s = format_sci(v, precision);
    let (mantissa, exponent) = s.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent == 0 {
        mantissa.to_string()
    } else {
        format!("{mantissa} \\cdot 10^{{{exponent}}}")
    }
}

fn geometry_line(k: usize, single: bool, term: &CompiledTerm, precision: usize) -> String {
    let g = &term.geometry;
    let name = if single { "G_K".to_string() } else { format!("G_{{K,{k}}}") };
    let alpha: String = (0..g.dims.len()).map(|p| format!("\\alpha_{{{}}}", p + 1)).collect();
    let mut s = if alpha.is_empty() { format!("{name} &= ") } else { format!("{name}^{{{alpha}}} &= ") };
    if g.scalar != 1.0 {
        let _ = write!(s, "{} \\, ", latex_number(g.scalar, precision));
    }
    s.push_str("\\det F_K'");
    for (a, range) in g.aux_ranges.iter().enumerate() {
        let _ = write!(s, " \\sum_{{\\beta_{{{}}}=0}}^{{{}}}", a + 1, range - 1);
    }
    for t in &g.transforms {
        let physical = match t.physical {
            GeoIndex::Secondary(p) => format!("\\alpha_{{{}}}", p + 1),
            GeoIndex::Auxiliary(a) => format!("\\beta_{{{}}}", a + 1),
            GeoIndex::Fixed(n) => n.to_string(),
        };
        let _ = write!(s, " \\frac{{\\partial X_{{\\alpha_{{{}}}}}}}{{\\partial x_{{{physical}}}}}", t.reference + 1);
    }
    for c in &g.coefficients {
        let _ = write!(s, " w^{{{}}}_{{\\alpha_{{{}}}}}", c.slot, c.expansion + 1);
    }
    s
}

/// Standalone LaTeX document listing the geometry tensors and the nonzero
/// reference-tensor entries.
pub fn emit_latex(form: &CompiledForm, options: &EmitterOptions) -> String {
    let precision = options.precision();
    let single = form.terms.len() == 1;
    let mut s = String::new();
    s.push_str("\\documentclass{article}\n\\usepackage{amsmath}\n\\allowdisplaybreaks\n\\begin{document}\n");
    let _ = writeln!(s, "\\section*{{Form \\texttt{{{}}}}}", form.name.replace('_', "\\_"));
    let dims: Vec<String> = form.element_dims().iter().map(|n| n.to_string()).collect();
    let _ = writeln!(
        s,
        "$A^K_i = \\sum_k A^{{0,k}}_{{i\\alpha}} G_{{K,k}}^{{\\alpha}}$, element tensor of size ${}$.\n",
        if dims.is_empty() { "1".to_string() } else { dims.join(" \\times ") }
    );
    for (k, term) in form.terms.iter().enumerate() {
        let _ = writeln!(s, "\\subsection*{{Monomial {k}}}");
        s.push_str("\\begin{align*}\n");
        let _ = writeln!(s, "{} \\\\", geometry_line(k, single, term, precision));
        let dims = &term.reference.dims;
        let secondary: usize = term.reference.secondary_dims().iter().product();
        let mut index = vec![0; dims.len()];
        for nz in &term.nonzeros {
            let mut rest = nz.primary as usize * secondary + nz.secondary as usize;
            for (i, n) in index.iter_mut().zip(dims).rev() {
                *i = rest % n;
                rest /= n;
            }
            let idx: Vec<String> = index.iter().map(|i| i.to_string()).collect();
            let label = if single { "A^0".to_string() } else { format!("A^{{0,{k}}}") };
            let _ = writeln!(s, "{label}_{{{}}} &= {} \\\\", idx.join(","), latex_number(nz.value, precision));
        }
        s.push_str("\\end{align*}\n");
    }
    s.push_str("\\end{document}\n");
    s
}
