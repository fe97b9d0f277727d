//! Compute the reference tensor of the Poisson form and contract it with the
//! geometry tensor of one physical triangle.

use formc::cases::TestCase;
use formc::reference::Shape;
use formc::runtime::AffineMap;
use formc::tensor::CompiledForm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let degree = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let form = CompiledForm::compile(&TestCase::Poisson.form(Shape::Triangle, degree)?)?;
    let term = &form.terms[0];
    println!("A0 dims {:?}, {} nonzeros, G rank {}", term.reference.dims, term.nonzeros.len(), term.geometry.rank());

    if degree == 1 {
        let r = &term.reference;
        for i in 0..3 {
            for j in 0..3 {
                let block: Vec<String> =
                    (0..4).map(|ab| format!("{:+.3}", r.get(&[i, j, ab / 2, ab % 2]))).collect();
                println!("  A0[{i}][{j}] = [{}]", block.join(" "));
            }
        }
    }

    let map = AffineMap::from_vertices(2, &[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.5, 1.0, 0.0]])?;
    let mut element = vec![0.0; form.element_size()];
    form.tabulate_tensor(map.det(), map.inverse(), &[], &mut element, &mut Vec::new());
    let n = form.element_dims()[0];
    println!("element matrix on a skewed triangle:");
    for row in element.chunks(n).take(6) {
        println!("  {}", row.iter().take(6).map(|v| format!("{v:+.4}")).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}
