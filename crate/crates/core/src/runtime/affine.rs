use crate::reference::Point;

use super::RuntimeError;

// |det| must exceed this times (longest edge)^d
const DEGENERACY: f64 = 1e-14;

/// Affine map `x = x0 + B X` from the reference simplex onto a cell, with
/// `B = ∂x/∂X` and its inverse `g = ∂X/∂x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    dim: usize,
    jacobian: [[f64; 3]; 3],
    inverse: [[f64; 3]; 3],
    det: f64,
    origin: Point,
}

impl AffineMap {
    /// Map taking reference vertex `k` to `vertices[k]`.
    pub fn from_vertices(dim: usize, vertices: &[Point]) -> Result<AffineMap, RuntimeError> {
        let mut b = [[0.0; 3]; 3];
        let mut longest: f64 = 0.0;
        for j in 0..dim {
            for i in 0..dim {
                b[i][j] = vertices[j + 1][i] - vertices[0][i];
            }
        }
        for p in 0..=dim {
            for q in 0..p {
                let len2: f64 = (0..dim).map(|i| (vertices[p][i] - vertices[q][i]).powi(2)).sum();
                longest = longest.max(len2.sqrt());
            }
        }
        let (det, inverse) = invert(dim, &b);
        if !(det.abs() > DEGENERACY * longest.powi(dim as i32)) {
            return Err(RuntimeError::DegenerateCell(None));
        }
        Ok(AffineMap { dim, jacobian: b, inverse, det, origin: vertices[0] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `∂x_i/∂X_j` at `[i][j]`.
    pub fn jacobian(&self) -> &[[f64; 3]; 3] {
        &self.jacobian
    }

    /// `∂X_a/∂x_j` at `[a][j]`.
    pub fn inverse(&self) -> &[[f64; 3]; 3] {
        &self.inverse
    }

    /// Determinant of `∂x/∂X`.
    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn to_physical(&self, x: &Point) -> Point {
        let mut out = self.origin;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i] += self.jacobian[i][j] * x[j];
            }
        }
        out
    }

    pub fn to_reference(&self, x: &Point) -> Point {
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            for j in 0..self.dim {
                out[a] += self.inverse[a][j] * (x[j] - self.origin[j]);
            }
        }
        out
    }
}

fn invert(dim: usize, b: &[[f64; 3]; 3]) -> (f64, [[f64; 3]; 3]) {
    let mut inv = [[0.0; 3]; 3];
    let det = match dim {
        1 => {
            inv[0][0] = 1.0 / b[0][0];
            b[0][0]
        }
        2 => {
            let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
            inv[0][0] = b[1][1] / det;
            inv[0][1] = -b[0][1] / det;
            inv[1][0] = -b[1][0] / det;
            inv[1][1] = b[0][0] / det;
            det
        }
        _ => {
            let cof = |i: usize, j: usize| {
                let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
                let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
                b[r0][c0] * b[r1][c1] - b[r0][c1] * b[r1][c0]
            };
            let det = b[0][0] * cof(0, 0) + b[0][1] * cof(0, 1) + b[0][2] * cof(0, 2);
            for i in 0..3 {
                for j in 0..3 {
                    inv[j][i] = cof(i, j) / det;
                }
            }
            det
        }
    };
    (det, inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reference_triangle_is_identity() {
        let m = AffineMap::from_vertices(2, &[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(m.det(), 1.0);
        assert_eq!(m.jacobian()[0][0], 1.0);
        assert_eq!(m.jacobian()[0][1], 0.0);
    }

    #[test]
    fn scaled_triangle() {
        let m = AffineMap::from_vertices(2, &[[0.0; 3], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]]).unwrap();
        assert!((m.det() - 4.0).abs() < 1e-15);
        assert_eq!(m.inverse()[0], [0.5, 0.0, 0.0]);
        assert_eq!(m.inverse()[1], [0.0, 0.5, 0.0]);
        let swapped = AffineMap::from_vertices(2, &[[0.0; 3], [0.0, 2.0, 0.0], [2.0, 0.0, 0.0]]).unwrap();
        assert!((swapped.det() + 4.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_cell() {
        let r = AffineMap::from_vertices(2, &[[0.0; 3], [1.0, 1.0, 0.0], [2.0, 2.0, 0.0]]);
        assert!(matches!(r, Err(RuntimeError::DegenerateCell(_))));
    }

    #[test]
    fn random_maps_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=3 {
            for _ in 0..50 {
                let vertices: Vec<Point> =
                    (0..=dim).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
                let Ok(m) = AffineMap::from_vertices(dim, &vertices) else { continue };
                let b = nalgebra::DMatrix::from_fn(dim, dim, |i, j| m.jacobian()[i][j]);
                let g = nalgebra::DMatrix::from_fn(dim, dim, |i, j| m.inverse()[i][j]);
                let scale = m.det().abs().max(1.0) / m.det().abs().min(1.0);
                assert!(((&b * &g) - nalgebra::DMatrix::identity(dim, dim)).amax() < 1e-12 * scale);
                assert!((b.determinant() - m.det()).abs() < 1e-12);
                for (k, v) in vertices.iter().enumerate() {
                    let mut x = [0.0; 3];
                    if k > 0 {
                        x[k - 1] = 1.0;
                    }
                    let y = m.to_physical(&x);
                    assert!((0..dim).all(|i| (y[i] - v[i]).abs() < 1e-12));
                    let back = m.to_reference(&y);
                    assert!((0..dim).all(|i| (back[i] - x[i]).abs() < 1e-9 * scale));
                }
            }
        }
    }
}
