//! Build degree-of-freedom maps on a small mesh for several elements.

use formc::reference::{ElementSpec, Shape};
use formc::runtime::{build_dofmap, Mesh};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = Mesh::unit_square(2);
    println!("{} vertices, {} cells", mesh.num_vertices(), mesh.num_cells());
    let elements = [
        ("P1", ElementSpec::scalar(Shape::Triangle, 1)),
        ("P2", ElementSpec::scalar(Shape::Triangle, 2)),
        ("P3", ElementSpec::scalar(Shape::Triangle, 3)),
        ("vector P2", ElementSpec::vector(Shape::Triangle, 2)),
        ("DG1", ElementSpec::scalar(Shape::Triangle, 1).discontinuous()),
    ];
    for (name, spec) in elements {
        let map = build_dofmap(&mesh, spec)?;
        println!("{name:>9}: {} global dofs, {} per cell, cell 0 -> {:?}", map.global_dim(), map.local_dim(), map.cell_dofs(0));
    }
    Ok(())
}
