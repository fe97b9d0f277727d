//! Tabulate Lagrange basis functions and their reference gradients at the
//! points of a simplex quadrature rule.

use formc::reference::{make_quadrature, ElementSpec, Shape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let element = ElementSpec::scalar(Shape::Triangle, 2).build()?;
    let rule = make_quadrature(Shape::Triangle, 4);
    let table = element.tabulate(rule.points())?;

    println!("P2 triangle: {} basis functions, {} quadrature points", element.space_dimension(), rule.len());
    for (k, node) in element.nodes().iter().enumerate() {
        println!("  node {k}: ({:.3}, {:.3})", node[0], node[1]);
    }

    // partition of unity at every point
    for q in 0..rule.len() {
        let sum: f64 = (0..element.space_dimension()).map(|i| table.value(i, 0, q)).sum();
        let grad: f64 = (0..element.space_dimension()).map(|i| table.gradient(i, 0, 0, q)).sum();
        println!("  point {q}: sum phi = {sum:.15}, sum dphi/dX0 = {grad:+.1e}");
    }

    let area = rule.integrate(|_| 1.0);
    let x2 = rule.integrate(|x| x[0] * x[0]);
    println!("area = {area}, integral of X0^2 = {x2} (exact 1/12)");
    Ok(())
}
