//! Noisy twin experiments: reconstruction error against data size B.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::continuation::Continuation;
use super::fit::{fit_free_exponent_with_c1, fit_log_law, FreeExponentFit, LogLawFit};
use super::measurement::{extract_measurement, BoundaryMeasurement};
use super::reconstruct::reconstruct_q_difference;
use super::support::{select_k, CompactSubsetK};
use crate::evolution::{step_implicit_euler_with, EvolutionProblem, Flux};
use crate::fem::assembly::{assemble_neumann_load, BoundaryFn};
use crate::fem::{DofSpace, RobinField};
use crate::linalg::add;
use crate::stationary::{SaddleSolver, StokesMatrices};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRecord {
    pub epsilon: f64,
    pub trial: usize,
    pub b: f64,
    pub err: f64,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct StabilityCurve {
    pub records: Vec<StabilityRecord>,
    pub fit: Option<LogLawFit>,
    pub free: Option<FreeExponentFit>,
    /// Noiseless reconstruction error.
    pub floor: f64,
}

impl StabilityCurve {
    pub fn levels(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.records.iter().map(|r| r.epsilon).collect();
        e.dedup();
        e
    }

    pub fn median_error(&self, eps: f64) -> f64 {
        let mut v: Vec<f64> = self.records.iter().filter(|r| r.epsilon == eps).map(|r| r.err).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }

    /// Records lying above the envelope bound; empty when the fit is consistent.
    pub fn bound_violations(&self) -> Vec<usize> {
        let Some(fit) = &self.fit else { return vec![] };
        fit.used.iter().copied().filter(|&i| self.records[i].err > fit.bound(self.records[i].b) * (1.0 + 1e-12)).collect()
    }
}

/// Deterministic per-trial stream.
pub fn trial_rng(seed: u64, level: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((level as u64) << 32) | trial as u64);
    rng
}

/// Reference (known q2) and truth (q1) solutions sharing the outer flux.
pub struct Twin<'a> {
    pub space: &'a DofSpace,
    pub q_ref: RobinField,
    pub q_true: RobinField,
    pub u_ref: Vec<f64>,
    pub p_ref: Vec<f64>,
    pub u_true: Vec<f64>,
    pub p_true: Vec<f64>,
    pub k: CompactSubsetK,
    pub continuation: Continuation,
    pub meas_ref: BoundaryMeasurement,
    pub meas_true: BoundaryMeasurement,
    pub mats_ref: StokesMatrices,
    pub mats_true: StokesMatrices,
}

impl<'a> Twin<'a> {
    pub fn new(space: &'a DofSpace, q_ref: RobinField, q_true: RobinField, g: BoundaryFn, m: f64, max_frequency: usize) -> Result<Self> {
        let load = assemble_neumann_load(space, g);
        let mats_ref = StokesMatrices::new(space, &q_ref)?;
        let mats_true = mats_ref.with_robin(space, &q_true)?;
        let (u_ref, p_ref, _) = SaddleSolver::new(&mats_ref, 0.0)?.solve(&load, 1e-12)?;
        let (u_true, p_true, _) = SaddleSolver::new(&mats_true, 0.0)?.solve(&load, 1e-12)?;
        let k = select_k(space, &u_ref, m)?;
        let continuation = Continuation::new(space, &mats_ref, max_frequency)?;
        let meas_ref = extract_measurement(space, &u_ref, &p_ref);
        let meas_true = extract_measurement(space, &u_true, &p_true);
        Ok(Twin { space, q_ref, q_true, u_ref, p_ref, u_true, p_true, k, continuation, meas_ref, meas_true, mats_ref, mats_true })
    }

    /// ‖q2 − q1‖_{L²(K)}.
    pub fn delta_norm(&self) -> f64 {
        let v: Vec<f64> = self.k.points.iter().map(|p| self.delta_at(p)).collect();
        self.k.l2(&v)
    }

    fn delta_at(&self, p: &super::support::KPoint) -> f64 {
        let be = &self.space.mesh.boundary_edges[p.boundary_edge];
        self.q_ref.on_edge(be, p.s) - self.q_true.on_edge(be, p.s)
    }

    /// Continues difference data, reconstructs q2 − q1 and returns (error on K, rank).
    pub fn reconstruct_from(&self, diff: &BoundaryMeasurement, noise_norm: Option<f64>) -> Result<(f64, usize)> {
        let w = self.continuation.solve(diff, noise_norm);
        let u1 = add(&self.u_ref, &w.u);
        let p1 = add(&self.p_ref, &w.p);
        let rec = reconstruct_q_difference(self.space, (&u1, &p1), (&self.u_ref, &self.p_ref), &self.q_ref, &self.k)?;
        Ok((rec.error_against(&self.k, |p| self.delta_at(p)), w.rank))
    }

    pub fn noiseless_error(&self) -> Result<f64> {
        Ok(self.reconstruct_from(&self.meas_true.difference(&self.meas_ref), None)?.0)
    }

    /// Noisy measurement of the truth; B is the size of the perturbation of the data.
    pub fn trial(&self, eps: f64, rng: &mut ChaCha8Rng) -> Result<(f64, f64, usize)> {
        let noisy = self.meas_true.perturbed(eps, rng);
        let b = noisy.difference(&self.meas_true).b();
        let (err, rank) = self.reconstruct_from(&noisy.difference(&self.meas_ref), Some(self.meas_true.expected_noise_norm(eps)))?;
        Ok((b, err, rank))
    }
}

fn run_sweep(levels: &[f64], trials: usize, f: impl Fn(usize, usize) -> Result<StabilityRecord> + Sync) -> Result<Vec<StabilityRecord>> {
    let mut levels_sorted: Vec<(usize, f64)> = levels.iter().copied().enumerate().collect();
    levels_sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
    let jobs: Vec<(usize, usize)> = levels_sorted.iter().flat_map(|&(l, _)| (0..trials).map(move |t| (l, t))).collect();
    jobs.into_par_iter().map(|(l, t)| f(l, t)).collect()
}

fn finish(records: Vec<StabilityRecord>, floor: f64) -> StabilityCurve {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.b, r.err)).collect();
    let fit = fit_log_law(&pts).ok();
    let free = fit.as_ref().and_then(|f| fit_free_exponent_with_c1(&pts, f.c1).ok());
    StabilityCurve { fit, free, records, floor }
}

/// Stationary sweep; levels are visited from the largest ε down.
pub fn stability_sweep(twin: &Twin, levels: &[f64], trials: usize, seed: u64) -> Result<StabilityCurve> {
    let records = run_sweep(levels, trials, |l, t| {
        let eps = levels[l];
        let (b, err, rank) = twin.trial(eps, &mut trial_rng(seed, l, t))?;
        Ok(StabilityRecord { epsilon: eps, trial: t, b, err, rank })
    })?;
    Ok(finish(records, twin.noiseless_error()?))
}

/// Trajectories of both coefficients from rest; data are sampled on a grid up to T.
pub struct EvolutionTwin<'a, 'b> {
    pub twin: &'b Twin<'a>,
    pub samples_ref: Vec<BoundaryMeasurement>,
    pub samples_true: Vec<BoundaryMeasurement>,
    pub horizon: f64,
}

impl<'a, 'b> EvolutionTwin<'a, 'b> {
    pub fn new(twin: &'b Twin<'a>, g: BoundaryFn, horizon: f64, dt: f64, sample_times: Vec<f64>) -> Result<Self> {
        let space = twin.space;
        let u0 = vec![0.0; space.velocity_dof_count()];
        let run = |q: &RobinField, mats: &StokesMatrices| -> Result<Vec<BoundaryMeasurement>> {
            let mut p = EvolutionProblem::new(space, q, u0.clone(), Flux::Constant(g), horizon, dt);
            p.sample_times = Some(sample_times.clone());
            let tr = step_implicit_euler_with(&p, mats)?;
            Ok(tr.times.iter().zip(tr.velocities.iter().zip(&tr.pressures)).map(|(t, (u, pr))| extract_measurement(space, u, pr).at_time(*t)).collect())
        };
        let samples_ref = run(&twin.q_ref, &twin.mats_ref)?;
        let samples_true = run(&twin.q_true, &twin.mats_true)?;
        Ok(EvolutionTwin { twin, samples_ref, samples_true, horizon })
    }

    /// B = sum over quantities of the sup over samples of the data perturbation;
    /// reconstruction from the last sample.
    pub fn trial(&self, eps: f64, rng: &mut ChaCha8Rng) -> Result<(f64, f64, usize)> {
        let n = self.samples_true.len();
        let last = self.samples_true[n - 1].perturbed(eps, rng);
        let mut sup = last.difference(&self.samples_true[n - 1]).norms();
        for k in 0..n - 1 {
            let d = self.samples_true[k].perturbed(eps, rng).difference(&self.samples_true[k]).norms();
            for q in 0..4 {
                sup[q] = sup[q].max(d[q]);
            }
        }
        let diff = last.difference(&self.samples_ref[n - 1]);
        let (err, rank) = self.twin.reconstruct_from(&diff, Some(self.samples_true[n - 1].expected_noise_norm(eps)))?;
        Ok((sup.iter().sum(), err, rank))
    }
}

pub fn stability_sweep_evolution(evo: &EvolutionTwin, levels: &[f64], trials: usize, seed: u64) -> Result<StabilityCurve> {
    let records = run_sweep(levels, trials, |l, t| {
        let eps = levels[l];
        let (b, err, rank) = evo.trial(eps, &mut trial_rng(seed, l, t))?;
        Ok(StabilityRecord { epsilon: eps, trial: t, b, err, rank })
    })?;
    Ok(finish(records, evo.twin.noiseless_error()?))
}
