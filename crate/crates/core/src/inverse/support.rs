use crate::fem::eval::velocity_at;
use crate::fem::DofSpace;
use crate::mesh::BoundaryTag;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KPoint {
    pub boundary_edge: usize,
    pub s: f64,
    pub x: [f64; 2],
    pub weight: f64,
    pub normal: [f64; 2],
}

/// Inner-circle quadrature points where the reference velocity stays above m.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSubsetK {
    pub points: Vec<KPoint>,
    pub threshold: f64,
    pub measure: f64,
}

pub fn select_k(space: &DofSpace, u_ref: &[f64], m: f64) -> Result<CompactSubsetK> {
    if !(m > 0.0) {
        return Err(Error::Input(format!("threshold m must be positive, got {m}")));
    }
    let mesh = &space.mesh;
    let points: Vec<KPoint> = mesh
        .boundary_quadrature(BoundaryTag::Gamma0)
        .into_iter()
        .filter(|bp| {
            let be = &mesh.boundary_edges[bp.boundary_edge];
            let (u, _) = velocity_at(space, u_ref, be.triangle, mesh.edge_barycentric(be, bp.s));
            u[0].hypot(u[1]) >= m
        })
        .map(|bp| KPoint { boundary_edge: bp.boundary_edge, s: bp.s, x: bp.x, weight: bp.weight, normal: bp.normal })
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyK { m });
    }
    let measure = points.iter().map(|p| p.weight).sum();
    Ok(CompactSubsetK { points, threshold: m, measure })
}

impl CompactSubsetK {
    /// ‖f‖_{L²(K)} for values at the K points.
    pub fn l2(&self, values: &[f64]) -> f64 {
        self.points.iter().zip(values).map(|(p, v)| p.weight * v * v).sum::<f64>().sqrt()
    }
}
