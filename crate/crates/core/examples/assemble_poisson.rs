//! Solve -Δu = f on the unit square with P1 elements and watch the L2 error
//! fall by a factor of four per refinement.

use std::f64::consts::PI;

use formc::form::parse_form_file;
use formc::reference::Point;
use formc::runtime::{apply_dirichlet, assemble_form, build_dofmap, cg_solve, interpolate, l2_error, EvaluationPath, Mesh};

fn exact(x: &Point) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let forms = parse_form_file(include_str!("../forms/PoissonP1.form"))?;
    let (a, l) = (&forms[0], &forms[1]);
    let mut previous = None;
    for n in [4, 8, 16, 32] {
        let mesh = Mesh::unit_square(n);
        let space = build_dofmap(&mesh, a.arguments[0])?;
        let source = build_dofmap(&mesh, l.coefficients[0])?;
        let f = interpolate(&mesh, &source, |x, _| 2.0 * PI * PI * exact(x))?;

        let matrix = assemble_form(a, &mesh, EvaluationPath::Tensor, &[])?;
        let mut b = assemble_form(l, &mesh, EvaluationPath::Tensor, &[f])?.as_vector().unwrap().to_vec();
        let boundary = mesh.boundary_vertices();
        let matrix = apply_dirichlet(matrix.as_matrix().unwrap(), &mut b, &boundary, &vec![0.0; boundary.len()]);
        let mut u = vec![0.0; b.len()];
        let report = cg_solve(&matrix, &b, &mut u, 1e-12, 10 * b.len())?;

        let error = l2_error(&mesh, &space, &u, exact)?;
        let ratio = previous.map(|p: f64| format!("{:.3}", p / error)).unwrap_or_else(|| "-".into());
        println!("h = 1/{n:<3} dofs {:>5}  cg its {:>4}  L2 error {error:.4e}  ratio {ratio}", b.len(), report.iterations);
        previous = Some(error);
    }
    Ok(())
}
