use std::fmt;

use nalgebra::DMatrix;

use super::expansion::{self, polynomial_dimension};
use super::{ElementError, Point, ReferenceCell, Shape};

/// Highest polynomial degree supported by [`make_lagrange`].
pub const MAX_DEGREE: usize = 8;

const CONTAINMENT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Continuity {
    Continuous,
    Discontinuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueRank {
    Scalar,
    Vector,
}

/// Lightweight description of a Lagrange element, used as a key and in the
/// form AST. [`ElementSpec::build`] constructs the actual basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSpec {
    pub shape: Shape,
    pub degree: usize,
    pub value_rank: ValueRank,
    pub continuity: Continuity,
}

impl ElementSpec {
    pub fn new(shape: Shape, degree: usize, value_rank: ValueRank, continuity: Continuity) -> Self {
        Self { shape, degree, value_rank, continuity }
    }

    pub fn scalar(shape: Shape, degree: usize) -> Self {
        Self::new(shape, degree, ValueRank::Scalar, Continuity::Continuous)
    }

    pub fn vector(shape: Shape, degree: usize) -> Self {
        Self::new(shape, degree, ValueRank::Vector, Continuity::Continuous)
    }

    /// Same element with cell-local degrees of freedom.
    pub fn discontinuous(self) -> Self {
        Self { continuity: Continuity::Discontinuous, ..self }
    }

    pub fn num_components(&self) -> usize {
        match self.value_rank {
            ValueRank::Scalar => 1,
            ValueRank::Vector => self.shape.dim(),
        }
    }

    pub fn scalar_dimension(&self) -> usize {
        polynomial_dimension(self.shape.dim(), self.degree)
    }

    /// Number of basis functions `n`.
    pub fn space_dimension(&self) -> usize {
        self.num_components() * self.scalar_dimension()
    }

    /// Check the degree range: continuous `1..=8`, discontinuous `0..=8`.
    pub fn validate(&self) -> Result<(), ElementError> {
        if self.degree > MAX_DEGREE || (self.degree == 0 && self.continuity == Continuity::Continuous) {
            return Err(ElementError::UnsupportedDegree { degree: self.degree, continuity: self.continuity });
        }
        Ok(())
    }

    pub fn build(&self) -> Result<LagrangeElement, ElementError> {
        make_lagrange(self.shape, self.degree, self.value_rank, self.continuity)
    }
}

impl fmt::Display for ElementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctor = match self.value_rank {
            ValueRank::Scalar => "FiniteElement",
            ValueRank::Vector => "VectorElement",
        };
        let family = match self.continuity {
            Continuity::Continuous => "Lagrange",
            Continuity::Discontinuous => "Discontinuous Lagrange",
        };
        write!(f, "{ctor}(\"{family}\", \"{}\", {})", self.shape, self.degree)
    }
}

/// Mesh entity supporting a node: topological dimension and local index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeEntity {
    pub dim: usize,
    pub index: usize,
}

/// Nodal Lagrange element on a reference simplex.
///
/// Scalar nodes are ordered by entity: vertices, then edges (each edge in
/// the cell's edge order, nodes by increasing distance from the lower
/// numbered vertex), then faces, then the interior. Vector elements repeat
/// the scalar basis per component, all dofs of component 0 first.
#[derive(Clone, Debug)]
pub struct LagrangeElement {
    spec: ElementSpec,
    cell: ReferenceCell,
    nodes: Vec<Point>,
    entities: Vec<NodeEntity>,
    lattice: Vec<[usize; 4]>,
    // columns are nodal basis functions expressed in the expansion set
    coefficients: DMatrix<f64>,
}

/// Construct a Lagrange element.
pub fn make_lagrange(
    shape: Shape,
    degree: usize,
    value_rank: ValueRank,
    continuity: Continuity,
) -> Result<LagrangeElement, ElementError> {
    let spec = ElementSpec::new(shape, degree, value_rank, continuity);
    spec.validate()?;
    let cell = ReferenceCell::new(shape);
    let (nodes, entities, lattice) = lattice_nodes(&cell, degree);
    let n = nodes.len();
    let mut vandermonde = DMatrix::<f64>::zeros(n, n);
    for (i, node) in nodes.iter().enumerate() {
        for (j, psi) in expansion::tabulate(shape, degree, node).iter().enumerate() {
            vandermonde[(i, j)] = psi.v;
        }
    }
    let coefficients = vandermonde.try_inverse().ok_or(ElementError::SingularVandermonde)?;
    Ok(LagrangeElement { spec, cell, nodes, entities, lattice, coefficients })
}

/// Equispaced nodes as integer barycentric tuples summing to `degree`,
/// sorted into entity order.
fn lattice_nodes(cell: &ReferenceCell, degree: usize) -> (Vec<Point>, Vec<NodeEntity>, Vec<[usize; 4]>) {
    let d = cell.dim();
    if degree == 0 {
        let c = 1.0 / (d as f64 + 1.0);
        let mut centroid = [0.0; 3];
        centroid[..d].iter_mut().for_each(|x| *x = c);
        let mut bary = [0; 4];
        bary[..=d].iter_mut().for_each(|b| *b = 1);
        return (vec![centroid], vec![NodeEntity { dim: d, index: 0 }], vec![bary]);
    }
    let mut tuples = Vec::new();
    collect_tuples(d + 1, degree, &mut [0; 4], 0, &mut tuples);
    let mut out_nodes = Vec::new();
    let mut out_entities = Vec::new();
    let mut out_lattice = Vec::new();
    for edim in 0..=d {
        for (index, verts) in cell.entities(edim).iter().enumerate() {
            let mut on_entity: Vec<[usize; 4]> = tuples
                .iter()
                .filter(|b| (0..=d).all(|v| (b[v] > 0) == verts.contains(&v)))
                .copied()
                .collect();
            // order along the entity: lexicographic in the barycentric weights
            // of its vertices, highest-numbered vertex most significant
            on_entity.sort_by_key(|b| verts.iter().rev().map(|&v| b[v]).collect::<Vec<_>>());
            for b in on_entity {
                let mut x = [0.0; 3];
                for k in 0..d {
                    x[k] = b[k + 1] as f64 / degree as f64;
                }
                out_nodes.push(x);
                out_entities.push(NodeEntity { dim: edim, index });
                out_lattice.push(b);
            }
        }
    }
    (out_nodes, out_entities, out_lattice)
}

fn collect_tuples(len: usize, remaining: usize, cur: &mut [usize; 4], pos: usize, out: &mut Vec<[usize; 4]>) {
    if pos + 1 == len {
        cur[pos] = remaining;
        out.push(*cur);
        return;
    }
    for k in 0..=remaining {
        cur[pos] = k;
        collect_tuples(len, remaining - k, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

impl LagrangeElement {
    pub fn spec(&self) -> ElementSpec {
        self.spec
    }

    pub fn cell(&self) -> ReferenceCell {
        self.cell
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    pub fn num_components(&self) -> usize {
        self.spec.num_components()
    }

    /// Dimension of the underlying scalar space.
    pub fn scalar_dimension(&self) -> usize {
        self.nodes.len()
    }

    pub fn space_dimension(&self) -> usize {
        self.num_components() * self.scalar_dimension()
    }

    /// Nodes of the scalar basis.
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node_entities(&self) -> &[NodeEntity] {
        &self.entities
    }

    /// Integer barycentric coordinates (scaled by the degree) of each scalar node.
    pub fn node_lattice(&self) -> &[[usize; 4]] {
        &self.lattice
    }

    /// Component carrying basis function `basis` (always 0 for scalars).
    pub fn component_of(&self, basis: usize) -> usize {
        basis / self.scalar_dimension()
    }

    pub fn scalar_index(&self, basis: usize) -> usize {
        basis % self.scalar_dimension()
    }

    /// Values and reference gradients of the scalar basis at one point.
    pub(crate) fn eval_scalar(&self, point: &Point, values: &mut [f64], gradients: &mut [[f64; 3]]) {
        let psi = expansion::tabulate(self.spec.shape, self.spec.degree, point);
        let n = self.scalar_dimension();
        for k in 0..n {
            let mut v = 0.0;
            let mut g = [0.0; 3];
            for (j, p) in psi.iter().enumerate() {
                let c = self.coefficients[(j, k)];
                v += c * p.v;
                g[0] += c * p.g[0];
                g[1] += c * p.g[1];
                g[2] += c * p.g[2];
            }
            values[k] = v;
            gradients[k] = g;
        }
    }

    /// Scalar basis values and gradients at many points; no containment check.
    pub(crate) fn tabulate_scalar(&self, points: &[Point]) -> ScalarTable {
        let n = self.scalar_dimension();
        let d = self.cell.dim();
        let np = points.len();
        let mut table = ScalarTable { n, dim: d, num_points: np, values: vec![0.0; n * np], gradients: vec![0.0; n * d * np] };
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 3]; n];
        for (q, p) in points.iter().enumerate() {
            self.eval_scalar(p, &mut v, &mut g);
            for k in 0..n {
                table.values[k * np + q] = v[k];
                for a in 0..d {
                    table.gradients[(k * d + a) * np + q] = g[k][a];
                }
            }
        }
        table
    }

    /// Tabulate the full basis (all components) and first derivatives.
    pub fn tabulate(&self, points: &[Point]) -> Result<TabulatedBasis, ElementError> {
        if let Some(p) = points.iter().find(|p| !self.cell.contains(p, CONTAINMENT_TOLERANCE)) {
            return Err(ElementError::PointOutsideCell(*p));
        }
        Ok(TabulatedBasis {
            spec: self.spec,
            points: points.to_vec(),
            scalar: self.tabulate_scalar(points),
        })
    }
}

/// Scalar basis data laid out point-fastest.
#[derive(Clone, Debug)]
pub(crate) struct ScalarTable {
    pub n: usize,
    pub dim: usize,
    pub num_points: usize,
    pub values: Vec<f64>,
    pub gradients: Vec<f64>,
}

impl ScalarTable {
    pub fn value_column(&self, k: usize) -> &[f64] {
        &self.values[k * self.num_points..(k + 1) * self.num_points]
    }

    pub fn gradient_column(&self, k: usize, dir: usize) -> &[f64] {
        let start = (k * self.dim + dir) * self.num_points;
        &self.gradients[start..start + self.num_points]
    }
}

/// Basis values and reference-coordinate gradients at a set of points.
#[derive(Clone, Debug)]
pub struct TabulatedBasis {
    spec: ElementSpec,
    points: Vec<Point>,
    scalar: ScalarTable,
}

impl TabulatedBasis {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn space_dimension(&self) -> usize {
        self.spec.space_dimension()
    }

    pub fn num_components(&self) -> usize {
        self.spec.num_components()
    }

    /// Value of component `comp` of basis function `basis` at point `q`.
    pub fn value(&self, basis: usize, comp: usize, q: usize) -> f64 {
        let n = self.scalar.n;
        if basis / n != comp {
            return 0.0;
        }
        self.scalar.values[(basis % n) * self.scalar.num_points + q]
    }

    /// Derivative along reference direction `dir`.
    pub fn gradient(&self, basis: usize, comp: usize, dir: usize, q: usize) -> f64 {
        let n = self.scalar.n;
        if basis / n != comp {
            return 0.0;
        }
        self.scalar.gradients[((basis % n) * self.scalar.dim + dir) * self.scalar.num_points + q]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SHAPES: [Shape; 3] = [Shape::Interval, Shape::Triangle, Shape::Tetrahedron];

    fn random_points(cell: &ReferenceCell, count: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let d = cell.dim();
        let mut out = Vec::new();
        while out.len() < count {
            let mut p = [0.0; 3];
            for x in p.iter_mut().take(d) {
                *x = rng.gen::<f64>();
            }
            if cell.contains(&p, 0.0) {
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn node_counts() {
        let e = make_lagrange(Shape::Triangle, 1, ValueRank::Scalar, Continuity::Continuous).unwrap();
        assert_eq!(e.space_dimension(), 3);
        assert_eq!(e.nodes(), &ReferenceCell::new(Shape::Triangle).vertices()[..]);
        let e = make_lagrange(Shape::Tetrahedron, 3, ValueRank::Scalar, Continuity::Continuous).unwrap();
        assert_eq!(e.space_dimension(), 20);
        let e = make_lagrange(Shape::Triangle, 2, ValueRank::Vector, Continuity::Continuous).unwrap();
        assert_eq!(e.space_dimension(), 12);
    }

    #[test]
    fn degree_validation() {
        assert!(matches!(
            make_lagrange(Shape::Triangle, 9, ValueRank::Scalar, Continuity::Continuous),
            Err(ElementError::UnsupportedDegree { degree: 9, .. })
        ));
        assert!(make_lagrange(Shape::Triangle, 0, ValueRank::Scalar, Continuity::Continuous).is_err());
        let dg0 = make_lagrange(Shape::Triangle, 0, ValueRank::Scalar, Continuity::Discontinuous).unwrap();
        assert_eq!(dg0.space_dimension(), 1);
        let t = dg0.tabulate(&[[0.2, 0.3, 0.0]]).unwrap();
        assert_eq!(t.value(0, 0, 0), 1.0);
    }

    #[test]
    fn node_order_vertices_edges_interior() {
        let e = make_lagrange(Shape::Triangle, 3, ValueRank::Scalar, Continuity::Continuous).unwrap();
        let dims: Vec<usize> = e.node_entities().iter().map(|x| x.dim).collect();
        assert_eq!(dims, vec![0, 0, 0, 1, 1, 1, 1, 1, 1, 2]);
        // edge 0 joins vertices 1 and 2; first node is nearer vertex 1
        assert!((e.nodes()[3][0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.nodes()[9][0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn nodal_property_and_partition_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for shape in SHAPES {
            for degree in 1..=MAX_DEGREE {
                let e = make_lagrange(shape, degree, ValueRank::Scalar, Continuity::Continuous).unwrap();
                let t = e.tabulate(e.nodes()).unwrap();
                let n = e.space_dimension();
                for j in 0..n {
                    for k in 0..n {
                        let expected = if j == k { 1.0 } else { 0.0 };
                        assert!((t.value(j, 0, k) - expected).abs() < 1e-10, "{shape} q={degree}");
                    }
                }
                let pts = random_points(&e.cell(), 10, &mut rng);
                let t = e.tabulate(&pts).unwrap();
                for q in 0..pts.len() {
                    let sum: f64 = (0..n).map(|j| t.value(j, 0, q)).sum();
                    assert!((sum - 1.0).abs() < 1e-12, "{shape} q={degree}: {sum}");
                    for dir in 0..shape.dim() {
                        let gsum: f64 = (0..n).map(|j| t.gradient(j, 0, dir, q)).sum();
                        assert!(gsum.abs() < 1e-10, "{shape} q={degree}: {gsum}");
                    }
                }
            }
        }
    }

    #[test]
    fn vector_elements_live_in_one_component() {
        for shape in [Shape::Triangle, Shape::Tetrahedron] {
            for degree in 1..=4 {
                let e = make_lagrange(shape, degree, ValueRank::Vector, Continuity::Continuous).unwrap();
                let t = e.tabulate(e.nodes()).unwrap();
                let ns = e.scalar_dimension();
                for b in 0..e.space_dimension() {
                    for c in 0..shape.dim() {
                        let nonzero = (0..ns).any(|q| t.value(b, c, q) != 0.0);
                        assert_eq!(nonzero, c == b / ns);
                    }
                    assert!((t.value(b, b / ns, b % ns) - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn p1_triangle_values_and_gradients() {
        let e = make_lagrange(Shape::Triangle, 1, ValueRank::Scalar, Continuity::Continuous).unwrap();
        let t = e.tabulate(&[[1.0 / 3.0, 1.0 / 3.0, 0.0], [0.1, 0.7, 0.0]]).unwrap();
        for j in 0..3 {
            assert!((t.value(j, 0, 0) - 1.0 / 3.0).abs() < 1e-14);
        }
        let expected = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        for q in 0..2 {
            for j in 0..3 {
                for a in 0..2 {
                    assert!((t.gradient(j, 0, a, q) - expected[j][a]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn p2_interval_identity_at_nodes() {
        let e = make_lagrange(Shape::Interval, 2, ValueRank::Scalar, Continuity::Continuous).unwrap();
        let t = e.tabulate(e.nodes()).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert!((t.value(j, 0, k) - if j == k { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tabulation_rejects_outside_points() {
        let e = make_lagrange(Shape::Triangle, 1, ValueRank::Scalar, Continuity::Continuous).unwrap();
        assert!(matches!(e.tabulate(&[[0.8, 0.8, 0.0]]), Err(ElementError::PointOutsideCell(_))));
    }

    #[test]
    fn gradients_match_central_differences() {
        let h = 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for shape in SHAPES {
            for degree in [1, 3, 5] {
                let e = make_lagrange(shape, degree, ValueRank::Scalar, Continuity::Continuous).unwrap();
                let cell = e.cell();
                // keep stencils inside the cell
                let pts: Vec<Point> = random_points(&cell, 5, &mut rng)
                    .into_iter()
                    .map(|p| {
                        let mut q = [0.0; 3];
                        for k in 0..shape.dim() {
                            q[k] = 0.1 + 0.7 * p[k];
                        }
                        q
                    })
                    .filter(|p| cell.contains(p, -1e-3))
                    .collect();
                let t = e.tabulate(&pts).unwrap();
                for (q, p) in pts.iter().enumerate() {
                    for dir in 0..shape.dim() {
                        let mut plus = *p;
                        let mut minus = *p;
                        plus[dir] += h;
                        minus[dir] -= h;
                        let tp = e.tabulate(&[plus]).unwrap();
                        let tm = e.tabulate(&[minus]).unwrap();
                        for j in 0..e.space_dimension() {
                            let fd = (tp.value(j, 0, 0) - tm.value(j, 0, 0)) / (2.0 * h);
                            assert!((fd - t.gradient(j, 0, dir, q)).abs() < 1e-6 * (1.0 + fd.abs()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for shape in SHAPES {
            for degree in 1..=6 {
                let e = make_lagrange(shape, degree, ValueRank::Scalar, Continuity::Continuous).unwrap();
                // random polynomial of total degree `degree`
                let terms: Vec<([i32; 3], f64)> = (0..6)
                    .map(|_| {
                        let mut a = [0i32; 3];
                        let mut left = degree as i32;
                        for k in 0..shape.dim() {
                            a[k] = rng.gen_range(0..=left);
                            left -= a[k];
                        }
                        (a, rng.gen_range(-1.0..1.0))
                    })
                    .collect();
                let g = |p: &Point| -> f64 {
                    terms.iter().map(|(a, c)| c * p[0].powi(a[0]) * p[1].powi(a[1]) * p[2].powi(a[2])).sum()
                };
                let nodal: Vec<f64> = e.nodes().iter().map(g).collect();
                let pts = random_points(&e.cell(), 20, &mut rng);
                let t = e.tabulate(&pts).unwrap();
                for (q, p) in pts.iter().enumerate() {
                    let interp: f64 = nodal.iter().enumerate().map(|(j, c)| c * t.value(j, 0, q)).sum();
                    assert!((interp - g(p)).abs() < 1e-9, "{shape} q={degree}");
                }
            }
        }
    }
}
