use std::fmt;
use std::str::FromStr;

use super::ElementError;

/// A point in reference or physical coordinates. Coordinates beyond the
/// cell dimension are zero.
pub type Point = [f64; 3];

/// Reference simplex shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Interval,
    Triangle,
    Tetrahedron,
}

const INTERVAL_EDGES: [[usize; 2]; 1] = [[0, 1]];
// Edge k and face k are opposite vertex k.
const TRIANGLE_EDGES: [[usize; 2]; 3] = [[1, 2], [0, 2], [0, 1]];
const TETRAHEDRON_EDGES: [[usize; 2]; 6] = [[2, 3], [1, 3], [1, 2], [0, 3], [0, 2], [0, 1]];
const TRIANGLE_FACES: [[usize; 3]; 1] = [[0, 1, 2]];
const TETRAHEDRON_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

impl Shape {
    pub fn from_dimension(dim: usize) -> Option<Shape> {
        match dim {
            1 => Some(Shape::Interval),
            2 => Some(Shape::Triangle),
            3 => Some(Shape::Tetrahedron),
            _ => None,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Shape::Interval => 1,
            Shape::Triangle => 2,
            Shape::Tetrahedron => 3,
        }
    }

    pub fn num_vertices(self) -> usize {
        self.dim() + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Interval => "interval",
            Shape::Triangle => "triangle",
            Shape::Tetrahedron => "tetrahedron",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = ElementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interval" => Ok(Shape::Interval),
            "triangle" => Ok(Shape::Triangle),
            "tetrahedron" => Ok(Shape::Tetrahedron),
            other => Err(ElementError::UnsupportedShape(other.to_string())),
        }
    }
}

/// The unit reference simplex with vertices at the origin and the unit
/// coordinate vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReferenceCell {
    shape: Shape,
}

impl ReferenceCell {
    pub fn new(shape: Shape) -> Self {
        Self { shape }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn vertices(&self) -> Vec<Point> {
        let d = self.dim();
        let mut vertices = vec![[0.0; 3]];
        for k in 0..d {
            let mut v = [0.0; 3];
            v[k] = 1.0;
            vertices.push(v);
        }
        vertices
    }

    /// Volume of the reference simplex, `1/d!`.
    pub fn volume(&self) -> f64 {
        match self.dim() {
            1 => 1.0,
            2 => 0.5,
            _ => 1.0 / 6.0,
        }
    }

    /// Barycentric coordinates `(1 - sum X, X_1, ..., X_d)`; unused slots are zero.
    pub fn barycentric(&self, point: &Point) -> [f64; 4] {
        let d = self.dim();
        let mut lambda = [0.0; 4];
        lambda[0] = 1.0 - point[..d].iter().sum::<f64>();
        lambda[1..=d].copy_from_slice(&point[..d]);
        lambda
    }

    pub fn contains(&self, point: &Point, tolerance: f64) -> bool {
        self.barycentric(point)[..=self.dim()].iter().all(|&l| l >= -tolerance)
    }

    /// Local vertex lists of all sub-entities of the given topological
    /// dimension, in the cell's canonical order.
    pub fn entities(&self, dim: usize) -> Vec<Vec<usize>> {
        let d = self.dim();
        if dim == d {
            return vec![(0..=d).collect()];
        }
        match dim {
            0 => (0..=d).map(|v| vec![v]).collect(),
            1 => match self.shape {
                Shape::Interval => INTERVAL_EDGES.iter().map(|e| e.to_vec()).collect(),
                Shape::Triangle => TRIANGLE_EDGES.iter().map(|e| e.to_vec()).collect(),
                Shape::Tetrahedron => TETRAHEDRON_EDGES.iter().map(|e| e.to_vec()).collect(),
            },
            2 => match self.shape {
                Shape::Triangle => TRIANGLE_FACES.iter().map(|f| f.to_vec()).collect(),
                Shape::Tetrahedron => TETRAHEDRON_FACES.iter().map(|f| f.to_vec()).collect(),
                Shape::Interval => Vec::new(),
            },
            _ => Vec::new(),
        }
    }
}
