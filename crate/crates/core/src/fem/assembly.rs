//! Global matrices and load vectors.

use rayon::prelude::*;

use super::element::{p2_gradients, p2_values};
use super::{DofSpace, RobinField};
use crate::linalg::CsrMatrix;
use crate::mesh::BoundaryTag;
use crate::Result;

/// Boundary data evaluated at a point with the outward normal there.
pub type BoundaryFn<'a> = &'a (dyn Fn([f64; 2], [f64; 2]) -> [f64; 2] + Sync);
/// Body data evaluated at a point.
pub type BodyFn<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

type Triplets = Vec<(usize, usize, f64)>;

fn element_triplets(space: &DofSpace, f: impl Fn(usize) -> Triplets + Sync + Send) -> Triplets {
    (0..space.mesh.triangles.len()).into_par_iter().flat_map_iter(f).collect()
}

/// Local 6×6 matrices ∫∇φ_i·∇φ_j and ∫φ_iφ_j.
pub fn local_p2_matrices(space: &DofSpace, t: usize) -> ([[f64; 6]; 6], [[f64; 6]; 6]) {
    let mesh = &space.mesh;
    let (g, det) = mesh.barycentric_gradients(t);
    let rule = &mesh.triangle_rule;
    let mut k = [[0.0; 6]; 6];
    let mut m = [[0.0; 6]; 6];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let wd = w * det;
        let phi = p2_values(*l);
        let dphi = p2_gradients(*l, &g);
        for i in 0..6 {
            for j in 0..6 {
                k[i][j] += wd * (dphi[i][0] * dphi[j][0] + dphi[i][1] * dphi[j][1]);
                m[i][j] += wd * phi[i] * phi[j];
            }
        }
    }
    (k, m)
}

fn vector_block(space: &DofSpace, pick_stiffness: bool) -> CsrMatrix {
    let n = space.velocity_dof_count();
    let t = element_triplets(space, |t| {
        let (k, m) = local_p2_matrices(space, t);
        let a = if pick_stiffness { k } else { m };
        let nodes = space.triangle_nodes[t];
        let mut out = Vec::with_capacity(72);
        for i in 0..6 {
            for j in 0..6 {
                for c in 0..2 {
                    out.push((2 * nodes[i] + c, 2 * nodes[j] + c, a[i][j]));
                }
            }
        }
        out
    });
    CsrMatrix::from_triplets(n, n, t)
}

/// ∫ ∇u : ∇v on the velocity space.
pub fn assemble_stiffness(space: &DofSpace) -> CsrMatrix {
    vector_block(space, true)
}

/// ∫ u · v on the velocity space.
pub fn assemble_velocity_mass(space: &DofSpace) -> CsrMatrix {
    vector_block(space, false)
}

fn scalar_block(space: &DofSpace, pick_stiffness: bool) -> CsrMatrix {
    let n = space.n_nodes;
    let t = element_triplets(space, |t| {
        let (k, m) = local_p2_matrices(space, t);
        let a = if pick_stiffness { k } else { m };
        let nodes = space.triangle_nodes[t];
        let mut out = Vec::with_capacity(36);
        for i in 0..6 {
            for j in 0..6 {
                out.push((nodes[i], nodes[j], a[i][j]));
            }
        }
        out
    });
    CsrMatrix::from_triplets(n, n, t)
}

/// Scalar P2 stiffness ∫ ∇φ·∇ψ.
pub fn assemble_scalar_stiffness(space: &DofSpace) -> CsrMatrix {
    scalar_block(space, true)
}

/// Scalar P2 mass ∫ φψ.
pub fn assemble_scalar_mass(space: &DofSpace) -> CsrMatrix {
    scalar_block(space, false)
}

/// Pressure × velocity matrix with entries ∫ r div u.
pub fn assemble_divergence(space: &DofSpace) -> CsrMatrix {
    let mesh = &space.mesh;
    let t = element_triplets(space, |t| {
        let (g, det) = mesh.barycentric_gradients(t);
        let rule = &mesh.triangle_rule;
        let nodes = space.triangle_nodes[t];
        let verts = mesh.triangles[t];
        let mut b = [[[0.0; 2]; 6]; 3];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let dphi = p2_gradients(*l, &g);
            for r in 0..3 {
                for i in 0..6 {
                    for c in 0..2 {
                        b[r][i][c] += w * det * l[r] * dphi[i][c];
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(36);
        for r in 0..3 {
            for i in 0..6 {
                for c in 0..2 {
                    out.push((verts[r], 2 * nodes[i] + c, b[r][i][c]));
                }
            }
        }
        out
    });
    CsrMatrix::from_triplets(space.pressure_dof_count(), space.velocity_dof_count(), t)
}

/// Local 3×3 boundary mass ∫_e w φ_aφ_b on the three P2 nodes of a boundary edge.
fn edge_mass(space: &DofSpace, be_index: usize, weight: impl Fn(f64) -> f64) -> [[f64; 3]; 3] {
    let mesh = &space.mesh;
    let be = &mesh.boundary_edges[be_index];
    let mut m = [[0.0; 3]; 3];
    for (s, w) in mesh.edge_rule.points.iter().zip(&mesh.edge_rule.weights) {
        let phi = [(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)];
        let c = w * be.length * weight(*s);
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += c * phi[a] * phi[b];
            }
        }
    }
    m
}

/// ∫_{Γ0} q u · v. Fails if q drops below its lower bound.
pub fn assemble_robin_mass(space: &DofSpace, q: &RobinField) -> Result<CsrMatrix> {
    q.validate()?;
    let n = space.velocity_dof_count();
    let mesh = &space.mesh;
    let mut t = Vec::new();
    for (i, be) in mesh.boundary_edges.iter().enumerate() {
        if be.tag != BoundaryTag::Gamma0 {
            continue;
        }
        let m = edge_mass(space, i, |s| q.on_edge(be, s));
        let nodes = space.edge_nodes(be.triangle, be.local_edge);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..2 {
                    t.push((2 * nodes[a] + c, 2 * nodes[b] + c, m[a][b]));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(n, n, t))
}

/// Boundary mass ∫_{tag} u · v with unit weight.
pub fn assemble_boundary_mass(space: &DofSpace, tag: BoundaryTag) -> CsrMatrix {
    let n = space.velocity_dof_count();
    let mut t = Vec::new();
    for (i, be) in space.mesh.boundary_edges.iter().enumerate() {
        if be.tag != tag {
            continue;
        }
        let m = edge_mass(space, i, |_| 1.0);
        let nodes = space.edge_nodes(be.triangle, be.local_edge);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..2 {
                    t.push((2 * nodes[a] + c, 2 * nodes[b] + c, m[a][b]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, n, t)
}

/// ∫_{tag} g · v for pointwise boundary data.
pub fn assemble_boundary_load(space: &DofSpace, tag: BoundaryTag, g: BoundaryFn) -> Vec<f64> {
    let mesh = &space.mesh;
    let mut load = vec![0.0; space.velocity_dof_count()];
    for be in mesh.boundary_edges.iter().filter(|be| be.tag == tag) {
        let nodes = space.edge_nodes(be.triangle, be.local_edge);
        let (pa, pb) = (mesh.vertices[be.vertices[0]], mesh.vertices[be.vertices[1]]);
        for (s, w) in mesh.edge_rule.points.iter().zip(&mesh.edge_rule.weights) {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let gv = g(x, be.normal);
            let phi = [(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)];
            for a in 0..3 {
                for c in 0..2 {
                    load[2 * nodes[a] + c] += w * be.length * gv[c] * phi[a];
                }
            }
        }
    }
    load
}

/// ⟨g, v⟩ on the outer circle.
pub fn assemble_neumann_load(space: &DofSpace, g: BoundaryFn) -> Vec<f64> {
    assemble_boundary_load(space, BoundaryTag::GammaE, g)
}

/// ∫_Ω f · v.
pub fn assemble_body_load(space: &DofSpace, f: BodyFn) -> Vec<f64> {
    let mesh = &space.mesh;
    let parts: Vec<Vec<(usize, f64)>> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let (_, det) = mesh.barycentric_gradients(t);
            let nodes = space.triangle_nodes[t];
            let mut loc = [[0.0; 2]; 6];
            for (l, w) in mesh.triangle_rule.points.iter().zip(&mesh.triangle_rule.weights) {
                let fv = f(mesh.point(t, *l));
                let phi = p2_values(*l);
                for i in 0..6 {
                    for c in 0..2 {
                        loc[i][c] += w * det * fv[c] * phi[i];
                    }
                }
            }
            (0..12).map(|k| (2 * nodes[k / 2] + k % 2, loc[k / 2][k % 2])).collect()
        })
        .collect();
    let mut load = vec![0.0; space.velocity_dof_count()];
    for p in parts {
        for (i, v) in p {
            load[i] += v;
        }
    }
    load
}

/// Scalar load ∫ f φ for the P2 scalar space.
pub fn assemble_scalar_load(space: &DofSpace, f: &(dyn Fn([f64; 2]) -> f64 + Sync)) -> Vec<f64> {
    let mesh = &space.mesh;
    let mut load = vec![0.0; space.n_nodes];
    for t in 0..mesh.triangles.len() {
        let (_, det) = mesh.barycentric_gradients(t);
        let nodes = space.triangle_nodes[t];
        for (l, w) in mesh.triangle_rule.points.iter().zip(&mesh.triangle_rule.weights) {
            let fv = f(mesh.point(t, *l));
            let phi = p2_values(*l);
            for i in 0..6 {
                load[nodes[i]] += w * det * fv * phi[i];
            }
        }
    }
    load
}
