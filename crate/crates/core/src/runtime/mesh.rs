use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::reference::{Point, Shape};

use super::{AffineMap, RuntimeError};

/// Simplicial mesh with consistently positive cell orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<[usize; 4]>,
}

impl Mesh {
    /// Build a mesh, reordering negatively oriented cells by swapping their
    /// last two vertices.
    pub fn new(dim: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Mesh, RuntimeError> {
        if !(1..=3).contains(&dim) {
            return Err(RuntimeError::DimensionMismatch(format!("mesh dimension {dim} is not 1, 2 or 3")));
        }
        let mut out = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(RuntimeError::DimensionMismatch(format!(
                    "cell {c} has {} vertices, expected {}",
                    cell.len(),
                    dim + 1
                )));
            }
            let mut ids = [0; 4];
            for (k, &v) in cell.iter().enumerate() {
                if v >= vertices.len() {
                    return Err(RuntimeError::VertexOutOfRange { cell: c, vertex: v });
                }
                ids[k] = v;
            }
            let points: Vec<Point> = ids[..=dim].iter().map(|&v| vertices[v]).collect();
            let map = AffineMap::from_vertices(dim, &points).map_err(|_| RuntimeError::DegenerateCell(Some(c)))?;
            if map.det() < 0.0 {
                ids.swap(dim - 1, dim);
            }
            out.push(ids);
        }
        Ok(Mesh { dim, vertices, cells: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> Shape {
        Shape::from_dimension(self.dim).expect("dimension checked on construction")
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Vertex ids of a cell in local order.
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..=self.dim]
    }

    pub fn cell_vertices(&self, c: usize) -> Vec<Point> {
        self.cell(c).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn affine_map(&self, c: usize) -> Result<AffineMap, RuntimeError> {
        AffineMap::from_vertices(self.dim, &self.cell_vertices(c)).map_err(|_| RuntimeError::DegenerateCell(Some(c)))
    }

    /// Sum of cell volumes.
    pub fn volume(&self) -> f64 {
        let factorial: f64 = (1..=self.dim).map(|k| k as f64).product();
        (0..self.num_cells()).map(|c| self.affine_map(c).map(|m| m.det().abs()).unwrap_or(0.0)).sum::<f64>()
            / factorial
    }

    /// Vertices lying on a facet that belongs to exactly one cell.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
        for c in 0..self.num_cells() {
            let cell = self.cell(c);
            for skip in 0..=self.dim {
                let mut f: Vec<usize> = cell.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
                f.sort_unstable();
                *facets.entry(f).or_default() += 1;
            }
        }
        let mut on_boundary = vec![false; self.num_vertices()];
        for (f, count) in facets {
            if count == 1 {
                f.iter().for_each(|&v| on_boundary[v] = true);
            }
        }
        (0..self.num_vertices()).filter(|&v| on_boundary[v]).collect()
    }

    /// Uniform mesh of [0, 1] with `n` cells.
    pub fn unit_interval(n: usize) -> Mesh {
        let vertices = (0..=n).map(|i| [i as f64 / n as f64, 0.0, 0.0]).collect();
        let cells = (0..n).map(|i| vec![i, i + 1]).collect();
        Mesh::new(1, vertices, cells).expect("valid interval mesh")
    }

    /// Unit square with `n x n` squares, each split along its rising
    /// diagonal.
    pub fn unit_square(n: usize) -> Mesh {
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64, 0.0]);
            }
        }
        let mut cells = Vec::new();
        for j in 0..n {
            for i in 0..n {
                cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::new(2, vertices, cells).expect("valid square mesh")
    }

    /// Unit cube with `n^3` cubes, each split into six tetrahedra sharing
    /// the main diagonal.
    pub fn unit_cube(n: usize) -> Mesh {
        let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
        let mut vertices = Vec::new();
        for k in 0..=n {
            for j in 0..=n {
                for i in 0..=n {
                    vertices.push([i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
                }
            }
        }
        const PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut cells = Vec::new();
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for path in PATHS {
                        let mut at = [i, j, k];
                        let mut cell = vec![id(at[0], at[1], at[2])];
                        for axis in path {
                            at[axis] += 1;
                            cell.push(id(at[0], at[1], at[2]));
                        }
                        cells.push(cell);
                    }
                }
            }
        }
        Mesh::new(3, vertices, cells).expect("valid cube mesh")
    }

    /// Unit box of the given dimension with `n` subdivisions per side.
    pub fn unit_box(dim: usize, n: usize) -> Mesh {
        match dim {
            1 => Mesh::unit_interval(n),
            2 => Mesh::unit_square(n),
            _ => Mesh::unit_cube(n),
        }
    }

    /// Move interior vertices by up to `amplitude` times the local spacing
    /// `h` in each coordinate.
    pub fn perturb<R: Rng>(&mut self, h: f64, amplitude: f64, rng: &mut R) -> Result<(), RuntimeError> {
        let boundary = self.boundary_vertices();
        let mut fixed = vec![false; self.num_vertices()];
        boundary.iter().for_each(|&v| fixed[v] = true);
        for (v, p) in self.vertices.iter_mut().enumerate() {
            if !fixed[v] {
                for x in p.iter_mut().take(self.dim) {
                    *x += amplitude * h * rng.gen_range(-1.0..1.0);
                }
            }
        }
        let cells = self.cells.iter().map(|c| c[..=self.dim].to_vec()).collect();
        *self = Mesh::new(self.dim, std::mem::take(&mut self.vertices), cells)?;
        Ok(())
    }
}

impl FromStr for Mesh {
    type Err = RuntimeError;

    /// Parse `mesh <d> <#vertices> <#cells>`, then vertex and cell lines.
    fn from_str(text: &str) -> Result<Mesh, RuntimeError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |line: usize, message: &str| RuntimeError::MeshFormat { line, message: message.to_string() };
        let (hline, header) = lines.next().ok_or_else(|| bad(1, "empty mesh file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "mesh" {
            return Err(bad(hline, "expected 'mesh <d> <#vertices> <#cells>'"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(hline, "expected an integer"));
        let (dim, nv, nc) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        if !(1..=3).contains(&dim) {
            return Err(bad(hline, "dimension must be 1, 2 or 3"));
        }
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, l) = lines.next().ok_or_else(|| bad(hline, "missing vertex lines"))?;
            let coords: Vec<f64> = l
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|_| bad(line, "expected a real number")))
                .collect::<Result<_, _>>()?;
            if coords.len() != dim {
                return Err(bad(line, &format!("expected {dim} coordinates")));
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(&coords);
            vertices.push(p);
        }
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (line, l) = lines.next().ok_or_else(|| bad(hline, "missing cell lines"))?;
            let ids: Vec<usize> = l
                .split_whitespace()
                .map(|s| s.parse::<usize>().map_err(|_| bad(line, "expected a vertex id")))
                .collect::<Result<_, _>>()?;
            if ids.len() != dim + 1 {
                return Err(bad(line, &format!("expected {} vertex ids", dim + 1)));
            }
            cells.push(ids);
        }
        if let Some((line, _)) = lines.next() {
            return Err(bad(line, "unexpected trailing content"));
        }
        Mesh::new(dim, vertices, cells)
    }
}

impl fmt::Display for Mesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mesh {} {} {}", self.dim, self.num_vertices(), self.num_cells())?;
        for p in &self.vertices {
            let coords: Vec<String> = p[..self.dim].iter().map(|x| format!("{x:?}")).collect();
            writeln!(f, "{}", coords.join(" "))?;
        }
        for c in 0..self.num_cells() {
            let ids: Vec<String> = self.cell(c).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", ids.join(" "))?;
        }
        Ok(())
    }
}
