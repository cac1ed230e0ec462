use rand::Rng;

use super::measurement::extract_measurement;
use crate::fem::assembly::{assemble_neumann_load, BoundaryFn};
use crate::fem::{DofSpace, RobinField};
use crate::mesh::{BoundaryTag, Mesh};
use crate::stationary::{SaddleSolver, StokesMatrices};
use crate::Result;

/// Random piecewise-linear pair: a shared random background and a tent bump
/// added to the second coefficient on an arc of the given angular fraction.
pub fn random_q_pair<R: Rng>(mesh: &Mesh, rng: &mut R, base: f64, alpha: f64, arc_fraction: f64) -> (RobinField, RobinField) {
    let phases: [f64; 3] = [rng.random_range(0.0..6.3), rng.random_range(0.0..6.3), rng.random_range(0.0..6.3)];
    let amps: [f64; 3] = [rng.random_range(0.0..0.3), rng.random_range(0.0..0.2), rng.random_range(0.0..0.1)];
    let background = move |x: [f64; 2]| {
        let th = x[1].atan2(x[0]);
        base + (0..3).map(|k| amps[k] * ((k + 1) as f64 * th + phases[k]).sin()).sum::<f64>()
    };
    let center = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let half = std::f64::consts::PI * arc_fraction;
    let height = rng.random_range(0.2..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let q1 = RobinField::from_fn(mesh, alpha, background);
    let q2 = RobinField::from_fn(mesh, alpha, move |x| {
        let th = x[1].atan2(x[0]);
        let mut d = (th - center).abs();
        if d > std::f64::consts::PI {
            d = 2.0 * std::f64::consts::PI - d;
        }
        background(x) + if d < half { height * (1.0 - d / half) } else { 0.0 }
    });
    (q1, q2)
}

/// Fraction of Γ0 (by arc length) where the two coefficients differ.
pub fn differing_fraction(mesh: &Mesh, q1: &RobinField, q2: &RobinField) -> f64 {
    let pts = mesh.boundary_quadrature(BoundaryTag::Gamma0);
    let total: f64 = pts.iter().map(|p| p.weight).sum();
    let diff: f64 = pts
        .iter()
        .filter(|p| {
            let be = &mesh.boundary_edges[p.boundary_edge];
            (q1.on_edge(be, p.s) - q2.on_edge(be, p.s)).abs() > 1e-12
        })
        .map(|p| p.weight)
        .sum();
    diff / total
}

/// B of the difference of the outer-circle data generated by two coefficients.
pub fn data_difference(space: &DofSpace, q1: &RobinField, q2: &RobinField, g: BoundaryFn, tol: f64) -> Result<f64> {
    let load = assemble_neumann_load(space, g);
    let m1 = StokesMatrices::new(space, q1)?;
    let m2 = m1.with_robin(space, q2)?;
    let (u1, p1, _) = SaddleSolver::new(&m1, 0.0)?.solve(&load, tol)?;
    let (u2, p2, _) = SaddleSolver::new(&m2, 0.0)?.solve(&load, tol)?;
    Ok(extract_measurement(space, &u1, &p1).difference(&extract_measurement(space, &u2, &p2)).b())
}
