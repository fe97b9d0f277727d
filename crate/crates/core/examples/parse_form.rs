//! Parse a form file and list the monomials it expands to.

use formc::form::{expand_to_monomials, parse_form_file, IndexRef};

fn index(names: &[String], i: &IndexRef) -> String {
    match i {
        IndexRef::Free(k) => names[*k].clone(),
        IndexRef::Fixed(n) => n.to_string(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/forms/Elasticity.form").into());
    let forms = parse_form_file(&std::fs::read_to_string(&path)?)?;
    for form in &forms {
        println!("form {} on {}: arity {}, {} coefficient(s)", form.name, form.shape().name(), form.arity(), form.coefficients.len());
        for m in expand_to_monomials(form)? {
            let mut factors = Vec::new();
            for f in &m.arguments {
                let comp = f.component.as_ref().map(|c| format!("[{}]", index(&form.index_names, c))).unwrap_or_default();
                let ders: String = f.derivatives.iter().map(|d| format!(".dx({})", index(&form.index_names, d))).collect();
                factors.push(format!("arg{}{comp}{ders}", f.slot));
            }
            for f in &m.coefficients {
                let comp = f.component.as_ref().map(|c| format!("[{}]", index(&form.index_names, c))).unwrap_or_default();
                factors.push(format!("w{}{comp}", f.slot));
            }
            println!("  {} * {}   (integrand degree {})", m.scalar, factors.join(" * "), m.integrand_degree());
        }
    }
    Ok(())
}
