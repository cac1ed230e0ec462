//! Evolution Stokes system: implicit-Euler Galerkin stepping and the spectral
//! propagator with stationary decomposition and Duhamel term.

use crate::fem::assembly::{assemble_neumann_load, BoundaryFn};
use crate::fem::scalar::{dirichlet_solve, ScalarFn};
use crate::fem::{DiscreteField, DofSpace, RobinField};
use crate::linalg::{axpy, sub};
use crate::quadrature::gauss_on;
use crate::spectral::EigenSystem;
use crate::stationary::{SaddleSolver, StokesMatrices};
use crate::{Error, Result};

/// Time dependence of the outer flux.
#[derive(Clone, Copy)]
pub enum Flux<'a> {
    /// Constant in time.
    Constant(BoundaryFn<'a>),
    /// g = κ(t, x) n with κ = h(x) + ω(t) ρ(x).
    Normal { h: ScalarFn<'a>, rho: ScalarFn<'a>, omega: &'a (dyn Fn(f64) -> f64 + Sync), domega: &'a (dyn Fn(f64) -> f64 + Sync) },
}

pub struct EvolutionProblem<'a> {
    pub space: &'a DofSpace,
    pub q: &'a RobinField,
    pub u0: Vec<f64>,
    pub flux: Flux<'a>,
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Requested sample times; every step when `None`.
    pub sample_times: Option<Vec<f64>>,
}

impl<'a> EvolutionProblem<'a> {
    pub fn new(space: &'a DofSpace, q: &'a RobinField, u0: Vec<f64>, flux: Flux<'a>, horizon: f64, dt: f64) -> Self {
        EvolutionProblem { space, q, u0, flux, t0: 0.0, horizon, dt, sample_times: None }
    }

    pub fn validate(&self, mats: &StokesMatrices) -> Result<()> {
        if !(self.dt > 0.0) || !(self.horizon >= self.dt) {
            return Err(Error::Input(format!("need dt > 0 and T >= dt, got dt={}, T={}", self.dt, self.horizon)));
        }
        if self.u0.len() != self.space.velocity_dof_count() {
            return Err(Error::Input("u0 length does not match the velocity space".into()));
        }
        let div = mats.divergence.mul_vec(&self.u0);
        let scale = self.u0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let worst = div.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if worst > 1e-10 * scale {
            return Err(Error::Input(format!("u0 violates the discrete divergence constraint: {worst:e}")));
        }
        Ok(())
    }

    fn end_time(&self) -> f64 {
        self.t0 + self.horizon
    }
}

struct FluxLoads {
    base: Vec<f64>,
    varying: Option<Vec<f64>>,
}

fn flux_loads(space: &DofSpace, flux: &Flux) -> FluxLoads {
    match flux {
        Flux::Constant(g) => FluxLoads { base: assemble_neumann_load(space, *g), varying: None },
        Flux::Normal { h, rho, .. } => {
            let gh = |x: [f64; 2], n: [f64; 2]| {
                let v = h(x);
                [v * n[0], v * n[1]]
            };
            let gr = |x: [f64; 2], n: [f64; 2]| {
                let v = rho(x);
                [v * n[0], v * n[1]]
            };
            FluxLoads { base: assemble_neumann_load(space, &gh), varying: Some(assemble_neumann_load(space, &gr)) }
        }
    }
}

impl FluxLoads {
    fn at(&self, flux: &Flux, t: f64) -> Vec<f64> {
        let mut l = self.base.clone();
        if let (Some(v), Flux::Normal { omega, .. }) = (&self.varying, flux) {
            axpy(&mut l, omega(t), v);
        }
        l
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyLog {
    /// sup_n ‖u^n‖²
    pub sup_l2_sq: f64,
    /// Σ dt ‖∇u^n‖²
    pub grad_integral: f64,
    /// Σ dt ‖u^n‖²
    pub l2_integral: f64,
}

impl EnergyLog {
    pub fn functional(&self) -> f64 {
        self.sup_l2_sq + self.grad_integral
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub velocities: Vec<Vec<f64>>,
    pub pressures: Vec<Vec<f64>>,
    pub energy: EnergyLog,
    /// Projection residual of the initial deviation on the eigenbasis (spectral only).
    pub projection_residual: f64,
    /// Final state, for continuing a run.
    pub final_velocity: Vec<f64>,
}

impl Trajectory {
    pub fn velocity_field(&self, k: usize) -> DiscreteField {
        DiscreteField { kind: crate::fem::FieldKind::Velocity, values: self.velocities[k].clone() }
    }
}

/// Sample indices (steps) for a uniform step grid.
fn sample_steps(problem: &EvolutionProblem, n_steps: usize) -> Vec<usize> {
    match &problem.sample_times {
        None => (0..=n_steps).collect(),
        Some(ts) => {
            let mut s: Vec<usize> = ts.iter().map(|t| (((t - problem.t0) / problem.dt).round().max(0.0) as usize).min(n_steps)).collect();
            s.sort_unstable();
            s.dedup();
            s
        }
    }
}

/// Implicit Euler: (M/dt + A + R) u^{n+1} − Bᵀ p^{n+1} = M u^n / dt + load(t^{n+1}), B u^{n+1} = 0.
pub fn step_implicit_euler(problem: &EvolutionProblem) -> Result<Trajectory> {
    let mats = StokesMatrices::new(problem.space, problem.q)?;
    step_implicit_euler_with(problem, &mats)
}

pub fn step_implicit_euler_with(problem: &EvolutionProblem, mats: &StokesMatrices) -> Result<Trajectory> {
    problem.validate(mats)?;
    let dt = problem.dt;
    let n_steps = (problem.horizon / dt).round() as usize;
    let solver = SaddleSolver::new(mats, 1.0 / dt)?;
    let loads = flux_loads(problem.space, &problem.flux);
    let samples = sample_steps(problem, n_steps);
    let mut next_sample = 0;
    let mut u = problem.u0.clone();
    let mut p = vec![0.0; mats.n_pressure()];
    let mut traj = Trajectory {
        times: vec![],
        velocities: vec![],
        pressures: vec![],
        energy: EnergyLog::default(),
        projection_residual: 0.0,
        final_velocity: vec![],
    };
    let m_norm_sq = |u: &[f64]| mats.mass.form(u, u);
    traj.energy.sup_l2_sq = m_norm_sq(&u);
    for n in 0..=n_steps {
        if n > 0 {
            let t = problem.t0 + n as f64 * dt;
            let mut rhs = mats.mass.mul_vec(&u);
            rhs.iter_mut().for_each(|v| *v /= dt);
            axpy(&mut rhs, 1.0, &loads.at(&problem.flux, t));
            let (un, pn, _) = solver.solve(&rhs, 1e-10).map_err(|e| Error::Step { step: n, source: Box::new(e) })?;
            u = un;
            p = pn;
            let l2 = m_norm_sq(&u);
            traj.energy.sup_l2_sq = traj.energy.sup_l2_sq.max(l2);
            traj.energy.grad_integral += dt * mats.stiffness.form(&u, &u);
            traj.energy.l2_integral += dt * l2;
        }
        if next_sample < samples.len() && samples[next_sample] == n {
            traj.times.push(problem.t0 + n as f64 * dt);
            traj.velocities.push(u.clone());
            traj.pressures.push(p.clone());
            next_sample += 1;
        }
    }
    traj.final_velocity = u;
    Ok(traj)
}

/// Stationary pieces shared by the spectral propagator.
pub struct SpectralParts {
    pub v: Vec<f64>,
    pub zeta: Vec<f64>,
    /// Response to the flux ρ n (separable case).
    pub y_unit: Option<(Vec<f64>, Vec<f64>)>,
}

pub fn spectral_parts(problem: &EvolutionProblem, mats: &StokesMatrices) -> Result<SpectralParts> {
    let solver = SaddleSolver::new(mats, 0.0)?;
    let loads = flux_loads(problem.space, &problem.flux);
    let (v, zeta, _) = solver.solve(&loads.base, 1e-10)?;
    let y_unit = match &loads.varying {
        Some(l) => {
            let (y, r, _) = solver.solve(l, 1e-10)?;
            Some((y, r))
        }
        None => None,
    };
    Ok(SpectralParts { v, zeta, y_unit })
}

/// u(t) = v + y(t) + e^{−tA}(u0 − v − y(0)) − ∫₀ᵗ e^{−(t−s)A} ∂_s y(s) ds on the computed eigenbasis.
pub fn propagate_spectral(problem: &EvolutionProblem, es: &EigenSystem) -> Result<Trajectory> {
    let mats = StokesMatrices::new(problem.space, problem.q)?;
    propagate_spectral_with(problem, es, &mats)
}

pub fn propagate_spectral_with(problem: &EvolutionProblem, es: &EigenSystem, mats: &StokesMatrices) -> Result<Trajectory> {
    problem.validate(mats)?;
    let parts = spectral_parts(problem, mats)?;
    let omega = |t: f64| match problem.flux {
        Flux::Normal { omega, .. } => omega(t),
        Flux::Constant(_) => 0.0,
    };
    let domega = |t: f64| match problem.flux {
        Flux::Normal { domega, .. } => domega(t),
        Flux::Constant(_) => 0.0,
    };
    let mut w0 = sub(&problem.u0, &parts.v);
    if let Some((y, _)) = &parts.y_unit {
        axpy(&mut w0, -omega(problem.t0), y);
    }
    let projection_residual = es.projection_residual(&w0);
    if projection_residual > 0.01 {
        log::warn!("initial deviation is truncation dominated: projection residual {projection_residual:.3e}");
    }
    let c0 = es.coefficients(&w0);
    let cy = parts.y_unit.as_ref().map(|(y, _)| es.coefficients(y)).unwrap_or_else(|| vec![0.0; es.len()]);
    let times: Vec<f64> = match &problem.sample_times {
        Some(ts) => ts.iter().copied().filter(|t| *t >= problem.t0 && *t <= problem.end_time() + 1e-12).collect(),
        None => {
            let n = (problem.horizon / problem.dt).round() as usize;
            (0..=n).map(|k| problem.t0 + k as f64 * problem.dt).collect()
        }
    };
    // I_l(t) = ∫_{t0}^t e^{−λ_l (t−s)} ω'(s) ds, advanced sample to sample
    let mut duhamel = vec![0.0; es.len()];
    let mut t_prev = problem.t0;
    let mut traj = Trajectory {
        times: vec![],
        velocities: vec![],
        pressures: vec![],
        energy: EnergyLog::default(),
        projection_residual,
        final_velocity: vec![],
    };
    for &t in &times {
        if parts.y_unit.is_some() && t > t_prev {
            let pieces = ((t - t_prev) / problem.dt).ceil().max(1.0) as usize;
            let h = (t - t_prev) / pieces as f64;
            for (l, lam) in es.eigenvalues.iter().enumerate() {
                let mut acc = duhamel[l] * (-lam * (t - t_prev)).exp();
                for k in 0..pieces {
                    let (s, w) = gauss_on(4, t_prev + k as f64 * h, t_prev + (k + 1) as f64 * h);
                    acc += s.iter().zip(&w).map(|(s, w)| w * (-lam * (t - s)).exp() * domega(*s)).sum::<f64>();
                }
                duhamel[l] = acc;
            }
        }
        t_prev = t;
        let tau = t - problem.t0;
        let coeffs: Vec<f64> = (0..es.len()).map(|l| (-es.eigenvalues[l] * tau).exp() * c0[l] - cy[l] * duhamel[l]).collect();
        let mut u = parts.v.clone();
        axpy(&mut u, 1.0, &es.combine(&coeffs));
        let mut p = parts.zeta.clone();
        axpy(&mut p, 1.0, &es.pressure_combine(&coeffs));
        if let Some((y, r)) = &parts.y_unit {
            axpy(&mut u, omega(t), y);
            axpy(&mut p, omega(t), r);
        }
        let l2 = mats.mass.form(&u, &u);
        traj.energy.sup_l2_sq = traj.energy.sup_l2_sq.max(l2);
        traj.times.push(t);
        traj.velocities.push(u);
        traj.pressures.push(p);
    }
    traj.final_velocity = traj.velocities.last().cloned().unwrap_or_default();
    Ok(traj)
}

/// Harmonic lifting: Δp̃ = 0, p̃ = data on the outer circle, p̃ = 0 on the inner circle.
pub fn lifting_solve(space: &DofSpace, data: ScalarFn) -> Result<DiscreteField> {
    dirichlet_solve(space, None, data, &|_| 0.0)
}

/// n geometrically spaced times between `t_min` and `t_max`, inclusive.
pub fn geometric_times(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && n >= 2);
    let r = (t_max / t_min).ln() / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { t_max } else { t_min * (r * k as f64).exp() }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub slope: f64,
    pub mu: f64,
    pub lambda1: f64,
    pub decades: f64,
    pub samples_used: usize,
}

/// Least-squares slope of ln‖u(t) − v‖_{L²} over the tail half of the time window.
pub fn measure_decay_rate(traj: &Trajectory, v: &[f64], es: &EigenSystem) -> Result<DecayReport> {
    let d: Vec<f64> = traj.velocities.iter().map(|u| es.mass_norm(&sub(u, v))).collect();
    let dmax = d.iter().copied().fold(0.0, f64::max);
    let floor = 1e-13 * dmax.max(es.mass_norm(v));
    let usable: Vec<usize> = (0..d.len()).filter(|&k| d[k] > floor).collect();
    let dmin = usable.iter().map(|&k| d[k]).fold(f64::INFINITY, f64::min);
    let decades = if dmax > 0.0 && dmin.is_finite() { (dmax / dmin).log10() } else { 0.0 };
    if decades < 2.0 {
        return Err(Error::InsufficientDecay { decades });
    }
    let (t0, t1) = (traj.times[0], *traj.times.last().unwrap());
    let mid = 0.5 * (t0 + t1);
    let pts: Vec<(f64, f64)> = usable.iter().filter(|&&k| traj.times[k] >= mid).map(|&k| (traj.times[k], d[k].ln())).collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientDecay { decades });
    }
    let (slope, _) = linear_fit(&pts);
    Ok(DecayReport { slope, mu: es.mu, lambda1: es.eigenvalues[0], decades, samples_used: pts.len() })
}

/// Least-squares line y = a x + b; returns (a, b).
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

/// Relative mass-norm discrepancy between two velocity states.
pub fn relative_discrepancy(mats: &StokesMatrices, a: &[f64], b: &[f64]) -> f64 {
    let d = sub(a, b);
    (mats.mass.form(&d, &d) / mats.mass.form(b, b)).sqrt()
}

/// ‖u0‖² + ∫₀ᵀ ‖g(t)‖²_{L²(Γe)} dt for the energy comparison.
pub fn data_size(mats: &StokesMatrices, u0: &[f64], g_sq_integral: f64) -> f64 {
    mats.mass.form(u0, u0) + g_sq_integral
}

/// Decay terms of the time-dependent flux hypothesis for κ = h + ω ρ, with
/// ‖ρ‖ given: (|ω(t)|‖ρ‖, |ω'(t)|‖ρ‖, (∫₀ᵗ e^{−μ(t−s)} ω'(s)² ds)^{1/2}‖ρ‖).
pub fn flux_decay_terms(omega: &dyn Fn(f64) -> f64, domega: &dyn Fn(f64) -> f64, rho_norm: f64, mu: f64, t: f64) -> [f64; 3] {
    let pieces = (t * 20.0).ceil().max(1.0) as usize;
    let h = t / pieces as f64;
    let mut conv = 0.0;
    for k in 0..pieces {
        let (s, w) = gauss_on(4, k as f64 * h, (k + 1) as f64 * h);
        conv += s.iter().zip(&w).map(|(s, w)| w * (-mu * (t - s)).exp() * domega(*s).powi(2)).sum::<f64>();
    }
    [omega(t).abs() * rho_norm, domega(t).abs() * rho_norm, conv.sqrt() * rho_norm]
}
