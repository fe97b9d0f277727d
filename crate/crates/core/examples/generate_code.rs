//! Emit C, raw and LaTeX output for a form and read the raw listing back.

use formc::codegen::{count_code_lines, emit, read_raw, EmitterFormat, EmitterOptions};
use formc::form::parse_form_file;
use formc::runtime::AffineMap;
use formc::tensor::CompiledForm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/forms/NavierStokes.form"))?;
    let form = CompiledForm::compile(&parse_form_file(&text)?[0])?;
    let options = EmitterOptions::default().with_function_name("navier_stokes");

    let out = std::env::temp_dir().join("formc-example");
    std::fs::create_dir_all(&out)?;
    for format in [EmitterFormat::CSource, EmitterFormat::Raw, EmitterFormat::Latex] {
        let path = out.join(format!("NavierStokes.{}", format.extension()));
        std::fs::write(&path, emit(&form, format, &options))?;
        println!("wrote {}", path.display());
    }
    println!("{} lines of generated code", count_code_lines(&form));

    // the raw listing contracts to the same element tensor
    let raw = read_raw(&emit(&form, EmitterFormat::Raw, &options))?;
    let map = AffineMap::from_vertices(2, &[[0.1, 0.0, 0.0], [1.0, 0.2, 0.0], [0.3, 0.9, 0.0]])?;
    let w: Vec<f64> = (0..form.coefficient_dims()[0]).map(|k| (k as f64).sin()).collect();
    let mut a = vec![0.0; form.element_size()];
    let mut b = a.clone();
    form.tabulate_tensor(map.det(), map.inverse(), &[&w], &mut a, &mut Vec::new());
    raw.tabulate_tensor(map.det(), map.inverse(), &[&w], &mut b);
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("raw listing: {} monomials, max difference {diff:e}", raw.terms.len());
    Ok(())
}
