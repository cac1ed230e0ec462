//! Truncated-SVD continuation of outer-circle difference data to the inner circle.
//!
//! The difference w = u1 − u2 between the truth and the reference solves the
//! Stokes system with zero Neumann data and Robin coefficient q2, driven by the
//! inner-circle source ρ = (q2 − q1)u1. ρ is expanded in vector Fourier modes and
//! fitted to the outer-circle traces.

use faer::Mat;

use super::measurement::{extract_measurement, BoundaryMeasurement};
use crate::fem::assembly::assemble_boundary_load;
use crate::fem::DofSpace;
use crate::linalg::axpy;
use crate::mesh::BoundaryTag;
use crate::stationary::{SaddleSolver, StokesMatrices};
use crate::{Error, Result};

/// Discrepancy-principle safety factor.
pub const DISCREPANCY_TAU: f64 = 1.5;

pub struct Continuation {
    responses: Vec<(Vec<f64>, Vec<f64>)>,
    u: Mat<f64>,
    s: Vec<f64>,
    v: Mat<f64>,
}

#[derive(Debug, Clone)]
pub struct ContinuedField {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub rank: usize,
    pub residual: f64,
}

fn mode_value(j: usize, theta: f64) -> [f64; 2] {
    let comp = j % 2;
    let m = j / 2;
    let k = m.div_ceil(2) as f64;
    let v = if m == 0 { 1.0 } else if m % 2 == 1 { (k * theta).cos() } else { (k * theta).sin() };
    let mut out = [0.0; 2];
    out[comp] = v;
    out
}

impl Continuation {
    /// Fourier modes up to angular frequency `max_frequency`; mats carry the reference coefficient.
    pub fn new(space: &DofSpace, mats: &StokesMatrices, max_frequency: usize) -> Result<Self> {
        let n_modes = 2 * (2 * max_frequency + 1);
        let solver = SaddleSolver::new(mats, 0.0)?;
        let loads: Vec<Vec<f64>> = (0..n_modes)
            .map(|j| assemble_boundary_load(space, BoundaryTag::Gamma0, &move |x: [f64; 2], _| mode_value(j, x[1].atan2(x[0]))))
            .collect();
        let responses = solver.solve_many(&loads);
        let columns: Vec<Vec<f64>> = responses.iter().map(|(u, p)| extract_measurement(space, u, p).stacked()).collect();
        let rows = columns[0].len();
        let f = Mat::<f64>::from_fn(rows, n_modes, |i, j| columns[j][i]);
        let svd = f.thin_svd().map_err(|e| Error::Singular(format!("continuation SVD failed: {e:?}")))?;
        let s: Vec<f64> = (0..n_modes.min(rows)).map(|i| svd.S().column_vector()[i]).collect();
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|a, b| s[*b].total_cmp(&s[*a]));
        let u = Mat::<f64>::from_fn(rows, order.len(), |i, j| svd.U()[(i, order[j])]);
        let v = Mat::<f64>::from_fn(n_modes, order.len(), |i, j| svd.V()[(i, order[j])]);
        let s = order.iter().map(|&i| s[i]).collect();
        Ok(Continuation { responses, u, s, v })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    /// Fits difference data; the rank follows the discrepancy principle when a
    /// noise norm is given, otherwise every numerically nonzero singular value is kept.
    pub fn solve(&self, data: &BoundaryMeasurement, noise_norm: Option<f64>) -> ContinuedField {
        let d = data.stacked();
        let beta: Vec<f64> = (0..self.s.len()).map(|j| (0..d.len()).map(|i| self.u[(i, j)] * d[i]).sum()).collect();
        let total: f64 = d.iter().map(|x| x * x).sum();
        let max_rank = self.s.iter().take_while(|s| **s > 1e-12 * self.s[0]).count();
        let mut rank = max_rank;
        let mut captured = 0.0;
        if let Some(delta) = noise_norm.filter(|d| *d > 0.0) {
            for (j, b) in beta.iter().enumerate().take(max_rank) {
                if (total - captured).max(0.0).sqrt() <= DISCREPANCY_TAU * delta {
                    rank = j;
                    break;
                }
                captured += b * b;
            }
        }
        let captured: f64 = beta[..rank].iter().map(|b| b * b).sum();
        let n_modes = self.v.nrows();
        let mut c = vec![0.0; n_modes];
        for j in 0..rank {
            let a = beta[j] / self.s[j];
            for (i, ci) in c.iter_mut().enumerate() {
                *ci += a * self.v[(i, j)];
            }
        }
        let mut u = vec![0.0; self.responses[0].0.len()];
        let mut p = vec![0.0; self.responses[0].1.len()];
        for (ci, (ru, rp)) in c.iter().zip(&self.responses) {
            axpy(&mut u, *ci, ru);
            axpy(&mut p, *ci, rp);
        }
        ContinuedField { u, p, rank, residual: (total - captured).max(0.0).sqrt() }
    }
}
