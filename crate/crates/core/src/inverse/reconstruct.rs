use super::support::CompactSubsetK;
use crate::fem::eval::{boundary_flux, pressure_at, velocity_at};
use crate::fem::{DofSpace, RobinField};
use crate::mesh::BoundaryTag;
use crate::{Error, Result};

/// Pointwise reconstruction of q2 − q1 on K.
#[derive(Debug, Clone, PartialEq)]
pub struct QDifference {
    pub values: Vec<f64>,
    pub l2_norm: f64,
}

impl QDifference {
    /// ‖rec − exact‖_{L²(K)} for a coefficient difference given pointwise.
    pub fn error_against(&self, k: &CompactSubsetK, exact: impl Fn(&super::support::KPoint) -> f64) -> f64 {
        let diff: Vec<f64> = k.points.iter().zip(&self.values).map(|(p, v)| v - exact(p)).collect();
        k.l2(&diff)
    }
}

/// (q2 − q1) = r·u1/|u1|² with r = q2(u1 − u2) + ∂n(u1 − u2) − (p1 − p2)n.
pub fn reconstruct_q_difference(space: &DofSpace, sol1: (&[f64], &[f64]), sol2: (&[f64], &[f64]), q2: &RobinField, k: &CompactSubsetK) -> Result<QDifference> {
    let mesh = &space.mesh;
    let mut values = Vec::with_capacity(k.points.len());
    for pt in &k.points {
        let be = &mesh.boundary_edges[pt.boundary_edge];
        let l = mesh.edge_barycentric(be, pt.s);
        let (u1, g1) = velocity_at(space, sol1.0, be.triangle, l);
        let (u2, g2) = velocity_at(space, sol2.0, be.triangle, l);
        let (p1, _) = pressure_at(space, sol1.1, be.triangle, l);
        let (p2, _) = pressure_at(space, sol2.1, be.triangle, l);
        let norm1 = u1[0].hypot(u1[1]);
        if norm1 < k.threshold {
            return Err(Error::DivisionGuard { value: norm1, m: k.threshold });
        }
        let n = pt.normal;
        let q = q2.on_edge(be, pt.s);
        let r: Vec<f64> = (0..2)
            .map(|c| {
                let dn = (g1[c][0] - g2[c][0]) * n[0] + (g1[c][1] - g2[c][1]) * n[1];
                q * (u1[c] - u2[c]) + dn - (p1 - p2) * n[c]
            })
            .collect();
        values.push((r[0] * u1[0] + r[1] * u1[1]) / (norm1 * norm1));
    }
    let l2_norm = k.l2(&values);
    Ok(QDifference { values, l2_norm })
}

/// Constant-coefficient recovery: q1 = q2 − [q2∫(u1−u2)·n + ∫∂n(u1−u2)·n − ∫(p1−p2)] / ∫u1·n over Γ0.
pub fn recover_constant_q(space: &DofSpace, sol1: (&[f64], &[f64]), sol2: (&[f64], &[f64]), q2: f64, m1: f64) -> Result<f64> {
    let flux = boundary_flux(space, sol1.0, BoundaryTag::GammaE);
    if flux.abs() < m1 {
        return Err(Error::FluxTooSmall { flux, m1 });
    }
    let mesh = &space.mesh;
    let (mut num, mut den) = (0.0, 0.0);
    for bp in mesh.boundary_quadrature(BoundaryTag::Gamma0) {
        let be = &mesh.boundary_edges[bp.boundary_edge];
        let l = mesh.edge_barycentric(be, bp.s);
        let (u1, g1) = velocity_at(space, sol1.0, be.triangle, l);
        let (u2, g2) = velocity_at(space, sol2.0, be.triangle, l);
        let (p1, _) = pressure_at(space, sol1.1, be.triangle, l);
        let (p2, _) = pressure_at(space, sol2.1, be.triangle, l);
        let n = bp.normal;
        let mut dn_n = 0.0;
        for c in 0..2 {
            dn_n += ((g1[c][0] - g2[c][0]) * n[0] + (g1[c][1] - g2[c][1]) * n[1]) * n[c];
        }
        let w_n = (u1[0] - u2[0]) * n[0] + (u1[1] - u2[1]) * n[1];
        num += bp.weight * (q2 * w_n + dn_n - (p1 - p2));
        den += bp.weight * (u1[0] * n[0] + u1[1] * n[1]);
    }
    Ok(q2 - num / den)
}
