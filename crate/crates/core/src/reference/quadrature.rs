//! Collapsed-coordinate Gauss–Jacobi quadrature on the reference simplices.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{Point, ReferenceCell, Shape};

/// A quadrature rule on a reference cell. Weights sum to the cell volume.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    cell: ReferenceCell,
    degree: usize,
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn cell(&self) -> ReferenceCell {
        self.cell
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: Fn(&Point) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Number of one-dimensional points per collapsed direction for a rule
/// exact through `degree`.
pub fn points_per_direction(degree: usize) -> usize {
    degree / 2 + 1
}

/// Gauss–Jacobi points and weights on `[-1, 1]` for the weight `(1 - x)^alpha`.
///
/// Golub–Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
/// three-term recurrence, and the weights come from the first eigenvector
/// components.
pub fn gauss_jacobi(m: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(m > 0, "need at least one point");
    let beta = 0.0;
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < m {
            let n = kf + 1.0;
            let num = 4.0 * n * (n + alpha) * (n + beta) * (n + ab);
            let den = (2.0 * n + ab).powi(2) * (2.0 * n + ab + 1.0) * (2.0 * n + ab - 1.0);
            let off = (num / den).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mu0 = 2f64.powf(ab + 1.0) / (alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (x, w) in pairs.iter_mut() {
        polish_node(m, alpha, x, w);
    }
    pairs.into_iter().unzip()
}

/// One Newton step on `P_m^{(alpha,0)}` to tighten an eigenvalue-derived node,
/// with the weight recomputed from the derivative.
fn polish_node(m: usize, alpha: f64, x: &mut f64, w: &mut f64) {
    for _ in 0..3 {
        let (p, dp) = jacobi_with_derivative(m, alpha, *x);
        if dp == 0.0 {
            return;
        }
        *x -= p / dp;
    }
    let (_, dp) = jacobi_with_derivative(m, alpha, *x);
    // With beta = 0 the Gamma-function prefactor of the weight formula is 1.
    *w = 2f64.powf(alpha + 1.0) / ((1.0 - *x * *x) * dp * dp);
}

/// Value and derivative of the Jacobi polynomial `P_m^{(alpha,0)}(x)`.
fn jacobi_with_derivative(m: usize, alpha: f64, x: f64) -> (f64, f64) {
    let beta = 0.0;
    let mut p0 = 1.0;
    let mut d0 = 0.0;
    if m == 0 {
        return (p0, d0);
    }
    let mut p1 = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
    let mut d1 = 0.5 * (alpha + beta + 2.0);
    for k in 1..m {
        let n = k as f64;
        let a = alpha;
        let b = beta;
        let c1 = 2.0 * (n + 1.0) * (n + a + b + 1.0) * (2.0 * n + a + b);
        let c2 = (2.0 * n + a + b + 1.0) * (a * a - b * b);
        let c3 = (2.0 * n + a + b) * (2.0 * n + a + b + 1.0) * (2.0 * n + a + b + 2.0);
        let c4 = 2.0 * (n + a) * (n + b) * (2.0 * n + a + b + 2.0);
        let p2 = ((c2 + c3 * x) * p1 - c4 * p0) / c1;
        let d2 = ((c2 + c3 * x) * d1 + c3 * p1 - c4 * d0) / c1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Tensor-product Gauss–Jacobi rule mapped to the reference simplex by the
/// collapsed (Duffy) transform. Uses `degree/2 + 1` points per direction.
pub fn make_quadrature(shape: Shape, degree: usize) -> QuadratureRule {
    let m = points_per_direction(degree);
    let cell = ReferenceCell::new(shape);
    let (g0, w0) = gauss_jacobi(m, 0.0);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match shape {
        Shape::Interval => {
            for (x, w) in g0.iter().zip(&w0) {
                points.push([0.5 * (1.0 + x), 0.0, 0.0]);
                weights.push(0.5 * w);
            }
        }
        Shape::Triangle => {
            let (g1, w1) = gauss_jacobi(m, 1.0);
            for (s, ws) in g0.iter().zip(&w0) {
                for (t, wt) in g1.iter().zip(&w1) {
                    let y = 0.5 * (1.0 + t);
                    let x = 0.5 * (1.0 + s) * (1.0 - y);
                    points.push([x, y, 0.0]);
                    weights.push(ws * wt / 8.0);
                }
            }
        }
        Shape::Tetrahedron => {
            let (g1, w1) = gauss_jacobi(m, 1.0);
            let (g2, w2) = gauss_jacobi(m, 2.0);
            for (s, ws) in g0.iter().zip(&w0) {
                for (t, wt) in g1.iter().zip(&w1) {
                    for (u, wu) in g2.iter().zip(&w2) {
                        let z = 0.5 * (1.0 + u);
                        let y = 0.5 * (1.0 + t) * (1.0 - z);
                        let x = 0.5 * (1.0 + s) * (1.0 - y - z);
                        points.push([x, y, z]);
                        weights.push(ws * wt * wu / 64.0);
                    }
                }
            }
        }
    }
    QuadratureRule { cell, degree, points, weights }
}
