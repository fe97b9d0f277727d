//! Orthogonal (Dubiner-type) polynomial expansion sets on the reference
//! simplices, evaluated together with their first derivatives.
//!
//! The recurrences work on the biunit simplex with vertices at `-1`; the
//! unit-simplex coordinates are mapped by `x = 2X - 1` and derivatives are
//! carried through forward-mode.

use std::ops::{Add, Mul, Sub};

use super::{Point, Shape};

/// Value with gradient in up to three directions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dual {
    pub v: f64,
    pub g: [f64; 3],
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Self { v, g: [0.0; 3] }
    }

    fn scale(self, s: f64) -> Self {
        Self { v: self.v * s, g: [self.g[0] * s, self.g[1] * s, self.g[2] * s] }
    }

    fn shift(self, s: f64) -> Self {
        Self { v: self.v + s, g: self.g }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, g: [self.g[0] + o.g[0], self.g[1] + o.g[1], self.g[2] + o.g[2]] }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, g: [self.g[0] - o.g[0], self.g[1] - o.g[1], self.g[2] - o.g[2]] }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            g: [
                self.g[0] * o.v + self.v * o.g[0],
                self.g[1] * o.v + self.v * o.g[1],
                self.g[2] * o.v + self.v * o.g[2],
            ],
        }
    }
}

impl Mul<Dual> for f64 {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        o.scale(self)
    }
}

/// Number of polynomials of total degree `<= degree` in `dim` variables.
pub fn polynomial_dimension(dim: usize, degree: usize) -> usize {
    (1..=dim).fold(1, |acc, k| acc * (degree + k) / k)
}

/// Jacobi recurrence coefficients for `P^{(a,b)}_{n+1}` from `P_n` and `P_{n-1}`.
fn jacobi_recurrence(a: f64, b: f64, n: f64) -> (f64, f64, f64) {
    let an = (2.0 * n + 1.0 + a + b) * (2.0 * n + 2.0 + a + b) / (2.0 * (n + 1.0) * (n + 1.0 + a + b));
    let bn = (a * a - b * b) * (2.0 * n + 1.0 + a + b)
        / (2.0 * (n + 1.0) * (2.0 * n + a + b) * (n + 1.0 + a + b));
    let cn = (n + a) * (n + b) * (2.0 * n + 2.0 + a + b)
        / ((n + 1.0) * (n + 1.0 + a + b) * (2.0 * n + a + b));
    (an, bn, cn)
}

fn biunit_coordinates(point: &Point, dim: usize) -> [Dual; 3] {
    let mut x = [Dual::default(); 3];
    for k in 0..dim {
        x[k].v = 2.0 * point[k] - 1.0;
        x[k].g[k] = 2.0;
    }
    x
}

/// Evaluate all expansion functions up to `degree` at `point` (unit-simplex
/// coordinates). The ordering is fixed but otherwise unspecified.
pub(crate) fn tabulate(shape: Shape, degree: usize, point: &Point) -> Vec<Dual> {
    let x = biunit_coordinates(point, shape.dim());
    match shape {
        Shape::Interval => legendre(degree, x[0]),
        Shape::Triangle => dubiner_triangle(degree, x[0], x[1]),
        Shape::Tetrahedron => dubiner_tetrahedron(degree, x[0], x[1], x[2]),
    }
}

fn legendre(n: usize, x: Dual) -> Vec<Dual> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Dual::constant(1.0));
    if n >= 1 {
        out.push(x);
    }
    for p in 1..n {
        let pf = p as f64;
        let next = ((2.0 * pf + 1.0) / (pf + 1.0)) * (x * out[p]) - (pf / (pf + 1.0)) * out[p - 1];
        out.push(next);
    }
    for (p, v) in out.iter_mut().enumerate() {
        *v = v.scale((p as f64 + 0.5).sqrt());
    }
    out
}

fn dubiner_triangle(n: usize, x: Dual, y: Dual) -> Vec<Dual> {
    let idx = |p: usize, q: usize| (p + q) * (p + q + 1) / 2 + q;
    let mut r = vec![Dual::default(); polynomial_dimension(2, n)];
    let f1 = (x.scale(2.0) + y).shift(1.0).scale(0.5);
    let f2 = y.scale(-1.0).shift(1.0).scale(0.5);
    let f3 = f2 * f2;
    r[idx(0, 0)] = Dual::constant(1.0);
    if n == 0 {
        return r;
    }
    r[idx(1, 0)] = f1;
    for p in 1..n {
        let pf = p as f64;
        let a = (2.0 * pf + 1.0) / (pf + 1.0);
        let b = pf / (pf + 1.0);
        r[idx(p + 1, 0)] = a * (f1 * r[idx(p, 0)]) - b * (f3 * r[idx(p - 1, 0)]);
    }
    for p in 0..n {
        let pf = p as f64;
        let factor = (y.scale(3.0 + 2.0 * pf)).shift(1.0 + 2.0 * pf).scale(0.5);
        r[idx(p, 1)] = factor * r[idx(p, 0)];
    }
    for p in 0..n.saturating_sub(1) {
        for q in 1..(n - p) {
            let (a1, a2, a3) = jacobi_recurrence(2.0 * p as f64 + 1.0, 0.0, q as f64);
            r[idx(p, q + 1)] = (y.scale(a1).shift(a2)) * r[idx(p, q)] - a3 * r[idx(p, q - 1)];
        }
    }
    for p in 0..=n {
        for q in 0..=(n - p) {
            let s = ((p as f64 + 0.5) * (p as f64 + q as f64 + 1.0)).sqrt();
            r[idx(p, q)] = r[idx(p, q)].scale(s);
        }
    }
    r
}

fn dubiner_tetrahedron(n: usize, x: Dual, y: Dual, z: Dual) -> Vec<Dual> {
    let idx = |p: usize, q: usize, s: usize| {
        let t = p + q + s;
        let u = q + s;
        t * (t + 1) * (t + 2) / 6 + u * (u + 1) / 2 + s
    };
    let mut r = vec![Dual::default(); polynomial_dimension(3, n)];
    let f1 = (x.scale(2.0) + y + z).shift(2.0).scale(0.5);
    let yz = (y + z).scale(0.5);
    let f2 = yz * yz;
    let f3 = (y.scale(2.0) + z).shift(1.0).scale(0.5);
    let f4 = z.scale(-1.0).shift(1.0).scale(0.5);
    let f5 = f4 * f4;
    r[idx(0, 0, 0)] = Dual::constant(1.0);
    if n == 0 {
        return r;
    }
    r[idx(1, 0, 0)] = f1;
    for p in 1..n {
        let pf = p as f64;
        let a1 = (2.0 * pf + 1.0) / (pf + 1.0);
        let a2 = pf / (pf + 1.0);
        r[idx(p + 1, 0, 0)] = a1 * (f1 * r[idx(p, 0, 0)]) - a2 * (f2 * r[idx(p - 1, 0, 0)]);
    }
    for p in 0..n {
        let pf = p as f64;
        let factor = y.shift(1.0).scale(pf) + (y.scale(3.0) + z).shift(2.0).scale(0.5);
        r[idx(p, 1, 0)] = r[idx(p, 0, 0)] * factor;
    }
    for p in 0..n.saturating_sub(1) {
        for q in 1..(n - p) {
            let (aq, bq, cq) = jacobi_recurrence(2.0 * p as f64 + 1.0, 0.0, q as f64);
            let qm = f3.scale(aq) + f4.scale(bq);
            let qm1 = f5.scale(cq);
            r[idx(p, q + 1, 0)] = qm * r[idx(p, q, 0)] - qm1 * r[idx(p, q - 1, 0)];
        }
    }
    for p in 0..n {
        for q in 0..(n - p) {
            let pq = (p + q) as f64;
            let factor = z.scale(2.0 + pq).shift(1.0 + pq);
            r[idx(p, q, 1)] = r[idx(p, q, 0)] * factor;
        }
    }
    for p in 0..n.saturating_sub(1) {
        for q in 0..(n - p - 1) {
            for s in 1..(n - p - q) {
                let (ar, br, cr) = jacobi_recurrence(2.0 * (p + q) as f64 + 2.0, 0.0, s as f64);
                r[idx(p, q, s + 1)] = z.scale(ar).shift(br) * r[idx(p, q, s)] - cr * r[idx(p, q, s - 1)];
            }
        }
    }
    for p in 0..=n {
        for q in 0..=(n - p) {
            for s in 0..=(n - p - q) {
                let scale =
                    ((p as f64 + 0.5) * (p as f64 + q as f64 + 1.0) * (p as f64 + q as f64 + s as f64 + 1.5)).sqrt();
                r[idx(p, q, s)] = r[idx(p, q, s)].scale(scale);
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{make_quadrature, ReferenceCell};

    fn gram(shape: Shape, degree: usize) -> Vec<Vec<f64>> {
        let rule = make_quadrature(shape, 2 * degree);
        let n = polynomial_dimension(shape.dim(), degree);
        let mut g = vec![vec![0.0; n]; n];
        for (p, w) in rule.points().iter().zip(rule.weights()) {
            let vals = tabulate(shape, degree, p);
            for i in 0..n {
                for j in 0..n {
                    g[i][j] += w * vals[i].v * vals[j].v;
                }
            }
        }
        g
    }

    #[test]
    fn expansion_sets_are_orthogonal() {
        for (shape, degree) in [(Shape::Interval, 8), (Shape::Triangle, 8), (Shape::Tetrahedron, 6)] {
            let g = gram(shape, degree);
            // orthonormal on the biunit simplex, so each diagonal entry is the
            // volume ratio between unit and biunit cells
            let scale = ReferenceCell::new(shape).volume() / (2f64.powi(shape.dim() as i32) * ReferenceCell::new(shape).volume());
            for i in 0..g.len() {
                for j in 0..g.len() {
                    let expected = if i == j { scale } else { 0.0 };
                    assert!((g[i][j] - expected).abs() < 1e-11, "{shape} deg {degree}: G[{i}][{j}] = {}", g[i][j]);
                }
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for shape in [Shape::Interval, Shape::Triangle, Shape::Tetrahedron] {
            let p = [0.21, 0.17, 0.31];
            let base = tabulate(shape, 5, &p);
            for dir in 0..shape.dim() {
                let mut plus = p;
                let mut minus = p;
                plus[dir] += h;
                minus[dir] -= h;
                let fp = tabulate(shape, 5, &plus);
                let fm = tabulate(shape, 5, &minus);
                for k in 0..base.len() {
                    let fd = (fp[k].v - fm[k].v) / (2.0 * h);
                    assert!((fd - base[k].g[dir]).abs() < 1e-5 * (1.0 + fd.abs()));
                }
            }
        }
    }
}
