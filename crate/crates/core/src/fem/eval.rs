//! Pointwise evaluation, interpolation and norms of discrete fields.

use super::element::{p2_gradients, p2_hessians, p2_values};
use super::{DiscreteField, DofSpace, FieldKind};
use crate::mesh::BoundaryTag;

/// Velocity value and gradient (`grad[i][j] = ∂_j u_i`) at barycentric `l` of triangle `t`.
pub fn velocity_at(space: &DofSpace, u: &[f64], t: usize, l: [f64; 3]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (g, _) = space.mesh.barycentric_gradients(t);
    let phi = p2_values(l);
    let dphi = p2_gradients(l, &g);
    let nodes = space.triangle_nodes[t];
    let mut v = [0.0; 2];
    let mut grad = [[0.0; 2]; 2];
    for i in 0..6 {
        for c in 0..2 {
            let coef = u[2 * nodes[i] + c];
            v[c] += coef * phi[i];
            grad[c][0] += coef * dphi[i][0];
            grad[c][1] += coef * dphi[i][1];
        }
    }
    (v, grad)
}

/// Constant Hessian of each velocity component on triangle `t`.
pub fn velocity_hessian(space: &DofSpace, u: &[f64], t: usize) -> [[[f64; 2]; 2]; 2] {
    let (g, _) = space.mesh.barycentric_gradients(t);
    let h = p2_hessians(&g);
    let nodes = space.triangle_nodes[t];
    let mut out = [[[0.0; 2]; 2]; 2];
    for i in 0..6 {
        for c in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    out[c][a][b] += u[2 * nodes[i] + c] * h[i][a][b];
                }
            }
        }
    }
    out
}

/// P1 pressure value and gradient.
pub fn pressure_at(space: &DofSpace, p: &[f64], t: usize, l: [f64; 3]) -> (f64, [f64; 2]) {
    let (g, _) = space.mesh.barycentric_gradients(t);
    let tri = space.mesh.triangles[t];
    let mut v = 0.0;
    let mut grad = [0.0; 2];
    for i in 0..3 {
        v += p[tri[i]] * l[i];
        grad[0] += p[tri[i]] * g[i][0];
        grad[1] += p[tri[i]] * g[i][1];
    }
    (v, grad)
}

/// P2 scalar value and gradient.
pub fn scalar_at(space: &DofSpace, s: &[f64], t: usize, l: [f64; 3]) -> (f64, [f64; 2]) {
    let (g, _) = space.mesh.barycentric_gradients(t);
    let phi = p2_values(l);
    let dphi = p2_gradients(l, &g);
    let nodes = space.triangle_nodes[t];
    let mut v = 0.0;
    let mut grad = [0.0; 2];
    for i in 0..6 {
        v += s[nodes[i]] * phi[i];
        grad[0] += s[nodes[i]] * dphi[i][0];
        grad[1] += s[nodes[i]] * dphi[i][1];
    }
    (v, grad)
}

pub fn interpolate_velocity(space: &DofSpace, f: impl Fn([f64; 2]) -> [f64; 2]) -> DiscreteField {
    let mut values = vec![0.0; space.velocity_dof_count()];
    for (n, x) in space.node_coords.iter().enumerate() {
        let v = f(*x);
        values[2 * n] = v[0];
        values[2 * n + 1] = v[1];
    }
    DiscreteField { kind: FieldKind::Velocity, values }
}

pub fn interpolate_pressure(space: &DofSpace, f: impl Fn([f64; 2]) -> f64) -> DiscreteField {
    let values = space.mesh.vertices.iter().map(|x| f(*x)).collect();
    DiscreteField { kind: FieldKind::Pressure, values }
}

pub fn interpolate_scalar(space: &DofSpace, f: impl Fn([f64; 2]) -> f64) -> DiscreteField {
    let values = space.node_coords.iter().map(|x| f(*x)).collect();
    DiscreteField { kind: FieldKind::Scalar, values }
}

/// Sum over all triangle quadrature points of `w·det·f(t, l, x)`.
pub fn integrate(space: &DofSpace, mut f: impl FnMut(usize, [f64; 3], [f64; 2]) -> f64) -> f64 {
    let mesh = &space.mesh;
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let (_, det) = mesh.barycentric_gradients(t);
        for (l, w) in mesh.triangle_rule.points.iter().zip(&mesh.triangle_rule.weights) {
            total += w * det * f(t, *l, mesh.point(t, *l));
        }
    }
    total
}

/// Sum over quadrature points of one boundary component of `w·f(t, l, x, n)`.
pub fn integrate_boundary(space: &DofSpace, tag: BoundaryTag, mut f: impl FnMut(usize, [f64; 3], [f64; 2], [f64; 2]) -> f64) -> f64 {
    let mesh = &space.mesh;
    let mut total = 0.0;
    for bp in mesh.boundary_quadrature(tag) {
        let be = &mesh.boundary_edges[bp.boundary_edge];
        let l = mesh.edge_barycentric(be, bp.s);
        total += bp.weight * f(be.triangle, l, bp.x, bp.normal);
    }
    total
}

/// L² norm and H¹ seminorm of a velocity field.
pub fn velocity_norms(space: &DofSpace, u: &[f64]) -> (f64, f64) {
    let l2 = integrate(space, |t, l, _| {
        let (v, _) = velocity_at(space, u, t, l);
        v[0] * v[0] + v[1] * v[1]
    });
    let h1 = integrate(space, |t, l, _| {
        let (_, g) = velocity_at(space, u, t, l);
        g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2)
    });
    (l2.sqrt(), h1.sqrt())
}

/// Exact field value and gradient, `grad[i][j] = ∂_j u_i`.
pub type VelocityExact<'a> = &'a dyn Fn([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]);

/// L² and H¹-seminorm errors against an exact velocity.
pub fn velocity_errors(space: &DofSpace, u: &[f64], exact: VelocityExact) -> (f64, f64) {
    let mesh = &space.mesh;
    let (mut l2, mut h1) = (0.0, 0.0);
    for t in 0..mesh.triangles.len() {
        let (_, det) = mesh.barycentric_gradients(t);
        for (l, w) in mesh.triangle_rule.points.iter().zip(&mesh.triangle_rule.weights) {
            let (v, g) = velocity_at(space, u, t, *l);
            let (ve, ge) = exact(mesh.point(t, *l));
            l2 += w * det * ((v[0] - ve[0]).powi(2) + (v[1] - ve[1]).powi(2));
            for i in 0..2 {
                for j in 0..2 {
                    h1 += w * det * (g[i][j] - ge[i][j]).powi(2);
                }
            }
        }
    }
    (l2.sqrt(), h1.sqrt())
}

pub fn pressure_l2_error(space: &DofSpace, p: &[f64], exact: &dyn Fn([f64; 2]) -> f64) -> f64 {
    integrate(space, |t, l, x| (pressure_at(space, p, t, l).0 - exact(x)).powi(2)).sqrt()
}

pub fn pressure_l2(space: &DofSpace, p: &[f64]) -> f64 {
    integrate(space, |t, l, _| pressure_at(space, p, t, l).0.powi(2)).sqrt()
}

pub fn scalar_l2_error(space: &DofSpace, s: &[f64], exact: &dyn Fn([f64; 2]) -> f64) -> f64 {
    integrate(space, |t, l, x| (scalar_at(space, s, t, l).0 - exact(x)).powi(2)).sqrt()
}

/// ∫_{tag} u · n.
pub fn boundary_flux(space: &DofSpace, u: &[f64], tag: BoundaryTag) -> f64 {
    integrate_boundary(space, tag, |t, l, _, n| {
        let (v, _) = velocity_at(space, u, t, l);
        v[0] * n[0] + v[1] * n[1]
    })
}

/// ∫_{tag} |u|².
pub fn boundary_velocity_l2_sq(space: &DofSpace, u: &[f64], tag: BoundaryTag) -> f64 {
    integrate_boundary(space, tag, |t, l, _, _| {
        let (v, _) = velocity_at(space, u, t, l);
        v[0] * v[0] + v[1] * v[1]
    })
}
