use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::reference::{make_quadrature, ElementSpec, Point};

use super::{CsrMatrix, DofMap, Mesh, RuntimeError, SparseBuilder};

/// Outcome of a converged conjugate gradient solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Unpreconditioned conjugate gradients for a symmetric positive definite
/// matrix. Stops when `‖r‖ ≤ tolerance ‖b‖`.
///
/// Symmetry is spot-checked on ten random entry pairs first.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<CgReport, RuntimeError> {
    let n = a.rows();
    if a.cols() != n || b.len() != n || x.len() != n {
        return Err(RuntimeError::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {} and solution of length {}",
            a.rows(),
            a.cols(),
            b.len(),
            x.len()
        )));
    }
    check_symmetry(a)?;
    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    r.iter_mut().zip(b).for_each(|(r, b)| *r = b - *r);
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 0..=max_iterations {
        let res = rr.sqrt();
        if res <= tolerance * bnorm {
            return Ok(CgReport { iterations: it, residual: res / bnorm });
        }
        if it == max_iterations {
            break;
        }
        a.mul_vec(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.iter_mut().zip(&ap).for_each(|(r, ap)| *r -= alpha * ap);
        let next = dot(&r, &r);
        let beta = next / rr;
        rr = next;
        p.iter_mut().zip(&r).for_each(|(p, r)| *p = r + beta * *p);
    }
    Err(RuntimeError::MaxIterations { iterations: max_iterations, residual: rr.sqrt() / bnorm })
}

fn check_symmetry(a: &CsrMatrix) -> Result<(), RuntimeError> {
    if a.nnz() == 0 {
        return Ok(());
    }
    let entries: Vec<(usize, usize, f64)> = a.entries().collect();
    let scale = entries.iter().fold(0.0f64, |m, e| m.max(e.2.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..10 {
        let (r, c, v) = entries[rng.gen_range(0..entries.len())];
        if (v - a.get(c, r)).abs() > 1e-10 * scale {
            return Err(RuntimeError::NotSymmetric { row: r, col: c });
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Impose `x_k = values[k]` on the listed dofs by symmetric elimination:
/// the known values move to the right-hand side and the rows and columns
/// become identity.
pub fn apply_dirichlet(a: &CsrMatrix, b: &mut [f64], dofs: &[usize], values: &[f64]) -> CsrMatrix {
    let mut fixed = vec![None; a.rows()];
    for (&d, &v) in dofs.iter().zip(values) {
        fixed[d] = Some(v);
    }
    let mut out = SparseBuilder::new(a.rows(), a.cols());
    for (r, c, v) in a.entries() {
        match (fixed[r], fixed[c]) {
            (None, None) => out.add(r, c, v),
            (None, Some(g)) => b[r] -= v * g,
            _ => {}
        }
    }
    for (r, f) in fixed.iter().enumerate() {
        if let Some(g) = f {
            out.add(r, r, 1.0);
            b[r] = *g;
        }
    }
    out.finalize()
}

/// Nodal interpolant of a scalar function (continuous or discontinuous).
/// Vector elements interpolate each component from `f` applied to the
/// component index.
pub fn interpolate<F: Fn(&Point, usize) -> f64>(mesh: &Mesh, dofmap: &DofMap, f: F) -> Result<Vec<f64>, RuntimeError> {
    let element = dofmap.element().build()?;
    let mut out = vec![0.0; dofmap.global_dim()];
    for c in 0..mesh.num_cells() {
        let map = mesh.affine_map(c)?;
        for (k, &dof) in dofmap.cell_dofs(c).iter().enumerate() {
            let x = map.to_physical(&element.nodes()[element.scalar_index(k)]);
            out[dof] = f(&x, element.component_of(k));
        }
    }
    Ok(out)
}

/// Value of a finite element function at a reference point of cell `c`.
pub fn evaluate_function(dofmap: &DofMap, values: &[f64], c: usize, point: &Point) -> Result<Vec<f64>, RuntimeError> {
    let element = dofmap.element().build()?;
    let tab = element.tabulate(std::slice::from_ref(point))?;
    let mut out = vec![0.0; element.num_components()];
    for (k, &dof) in dofmap.cell_dofs(c).iter().enumerate() {
        for (comp, o) in out.iter_mut().enumerate() {
            *o += values[dof] * tab.value(k, comp, 0);
        }
    }
    Ok(out)
}

/// `‖u_h - u‖_{L2}` for a scalar field, integrated with a rule of degree
/// `2q + 2`.
pub fn l2_error<F: Fn(&Point) -> f64>(mesh: &Mesh, dofmap: &DofMap, values: &[f64], exact: F) -> Result<f64, RuntimeError> {
    let spec: ElementSpec = dofmap.element();
    let element = spec.build()?;
    let rule = make_quadrature(mesh.shape(), 2 * spec.degree + 2);
    let tab = element.tabulate(rule.points())?;
    let mut sum = 0.0;
    for c in 0..mesh.num_cells() {
        let map = mesh.affine_map(c)?;
        let dofs = dofmap.cell_dofs(c);
        for (q, (p, w)) in rule.points().iter().zip(rule.weights()).enumerate() {
            let uh: f64 = dofs.iter().enumerate().map(|(k, &d)| values[d] * tab.value(k, 0, q)).sum();
            let e = uh - exact(&map.to_physical(p));
            sum += w * map.det().abs() * e * e;
        }
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut b = SparseBuilder::new(n, n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i > 0 {
                b.add(i, i - 1, -1.0);
                b.add(i - 1, i, -1.0);
            }
        }
        b.finalize()
    }

    #[test]
    fn cg_solves_tridiagonal_system() {
        let a = laplacian_1d(50);
        let exact: Vec<f64> = (0..50).map(|i| (i as f64 * 0.1).sin()).collect();
        let mut b = vec![0.0; 50];
        a.mul_vec(&exact, &mut b);
        let mut x = vec![0.0; 50];
        let report = cg_solve(&a, &b, &mut x, 1e-12, 200).unwrap();
        assert!(report.iterations <= 50);
        assert!(x.iter().zip(&exact).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn cg_reports_iteration_limit() {
        let a = laplacian_1d(50);
        let b = vec![1.0; 50];
        let mut x = vec![0.0; 50];
        assert!(matches!(cg_solve(&a, &b, &mut x, 1e-14, 3), Err(RuntimeError::MaxIterations { iterations: 3, .. })));
    }

    #[test]
    fn cg_rejects_nonsymmetric_matrix() {
        let mut b = SparseBuilder::new(2, 2);
        b.add(0, 0, 1.0);
        b.add(0, 1, 1.0);
        b.add(1, 1, 1.0);
        let r = cg_solve(&b.finalize(), &[1.0, 1.0], &mut [0.0, 0.0], 1e-10, 10);
        assert!(matches!(r, Err(RuntimeError::NotSymmetric { .. })));
    }

    #[test]
    fn dirichlet_elimination_keeps_symmetry() {
        let a = laplacian_1d(4);
        let mut b = vec![0.0; 4];
        let m = apply_dirichlet(&a, &mut b, &[0, 3], &[1.0, 2.0]);
        assert_eq!(b, vec![1.0, 1.0, 2.0, 2.0]);
        let mut x = vec![0.0; 4];
        cg_solve(&m, &b, &mut x, 1e-14, 20).unwrap();
        for (k, v) in [1.0, 4.0 / 3.0, 5.0 / 3.0, 2.0].iter().enumerate() {
            assert!((x[k] - v).abs() < 1e-12);
        }
    }
}
