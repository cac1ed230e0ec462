use std::io::Write;

use crate::mesh::Mesh;
use crate::Result;

pub enum PointData<'a> {
    Scalar { name: &'a str, values: &'a [f64] },
    /// Written with z = 0.
    Vector { name: &'a str, values: &'a [[f64; 2]] },
}

/// Legacy ASCII unstructured grid: triangles plus boundary segments, with
/// cell data "boundary_tag" (0 for triangles, 1 on the outer circle, 2 on the inner).
pub fn write_vtk<W: Write>(mut w: W, mesh: &Mesh, title: &str, point_data: &[PointData]) -> Result<()> {
    let nt = mesh.triangles.len();
    let nb = mesh.boundary_edges.len();
    writeln!(w, "# vtk DataFile Version 2.0")?;
    writeln!(w, "{}", title.replace('\n', " "))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.vertices.len())?;
    for v in &mesh.vertices {
        writeln!(w, "{:?} {:?} 0", v[0], v[1])?;
    }
    writeln!(w, "CELLS {} {}", nt + nb, 4 * nt + 3 * nb)?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    for be in &mesh.boundary_edges {
        writeln!(w, "2 {} {}", be.vertices[0], be.vertices[1])?;
    }
    writeln!(w, "CELL_TYPES {}", nt + nb)?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    for _ in 0..nb {
        writeln!(w, "3")?;
    }
    writeln!(w, "CELL_DATA {}", nt + nb)?;
    writeln!(w, "SCALARS boundary_tag int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for _ in 0..nt {
        writeln!(w, "0")?;
    }
    for be in &mesh.boundary_edges {
        writeln!(w, "{}", be.tag.code())?;
    }
    if !point_data.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.vertices.len())?;
    }
    for pd in point_data {
        match pd {
            PointData::Scalar { name, values } => {
                writeln!(w, "SCALARS {name} double 1")?;
                writeln!(w, "LOOKUP_TABLE default")?;
                for v in values.iter().take(mesh.vertices.len()) {
                    writeln!(w, "{v:?}")?;
                }
            }
            PointData::Vector { name, values } => {
                writeln!(w, "VECTORS {name} double")?;
                for v in values.iter().take(mesh.vertices.len()) {
                    writeln!(w, "{:?} {:?} 0", v[0], v[1])?;
                }
            }
        }
    }
    Ok(())
}

/// Vertex values of a P2 velocity vector (nodes 0..nv are the vertices).
pub fn vertex_velocity(mesh: &Mesh, u: &[f64]) -> Vec<[f64; 2]> {
    (0..mesh.vertices.len()).map(|i| [u[2 * i], u[2 * i + 1]]).collect()
}
