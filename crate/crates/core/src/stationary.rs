//! Stationary Stokes system with Neumann data on the outer circle and a
//! Robin condition on the inner circle, solved as one sparse saddle-point system.

use crate::fem::assembly::{
    assemble_body_load, assemble_boundary_load, assemble_divergence, assemble_neumann_load, assemble_robin_mass, assemble_stiffness,
    assemble_velocity_mass, BodyFn, BoundaryFn,
};
use crate::fem::eval::{integrate, integrate_boundary, pressure_at, velocity_at, velocity_norms};
use crate::fem::{DiscreteField, DofSpace, FieldKind, RobinField};
use crate::linalg::{dot, saddle_matrix, CsrMatrix, SparseLu};
use crate::mesh::BoundaryTag;
use crate::{Error, Result};

/// Assembled operators for one space and one Robin coefficient.
#[derive(Debug, Clone)]
pub struct StokesMatrices {
    pub stiffness: CsrMatrix,
    pub robin: CsrMatrix,
    /// stiffness + robin
    pub a_q: CsrMatrix,
    pub mass: CsrMatrix,
    pub divergence: CsrMatrix,
}

impl StokesMatrices {
    pub fn new(space: &DofSpace, q: &RobinField) -> Result<Self> {
        let stiffness = assemble_stiffness(space);
        let robin = assemble_robin_mass(space, q)?;
        let a_q = stiffness.add_scaled(&robin, 1.0);
        Ok(StokesMatrices { a_q, stiffness, robin, mass: assemble_velocity_mass(space), divergence: assemble_divergence(space) })
    }

    /// Same space, new coefficient: only the Robin block is reassembled.
    pub fn with_robin(&self, space: &DofSpace, q: &RobinField) -> Result<Self> {
        let robin = assemble_robin_mass(space, q)?;
        Ok(StokesMatrices { a_q: self.stiffness.add_scaled(&robin, 1.0), robin, ..self.clone() })
    }

    pub fn n_velocity(&self) -> usize {
        self.stiffness.nrows
    }

    pub fn n_pressure(&self) -> usize {
        self.divergence.nrows
    }

    /// a_q(u, v).
    pub fn a_form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.a_q.form(v, u)
    }

    pub fn mass_form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.form(v, u)
    }
}

/// Factorized [K + c·M, -Bᵀ; -B, 0] with K = stiffness + Robin.
#[derive(Debug)]
pub struct SaddleSolver {
    lu: SparseLu,
    n_velocity: usize,
    n_pressure: usize,
}

impl SaddleSolver {
    pub fn new(mats: &StokesMatrices, mass_shift: f64) -> Result<Self> {
        let k = if mass_shift == 0.0 { mats.a_q.clone() } else { mats.a_q.add_scaled(&mats.mass, mass_shift) };
        let s = saddle_matrix(&k, &mats.divergence.scaled(-1.0));
        Ok(SaddleSolver { lu: SparseLu::new(s)?, n_velocity: mats.n_velocity(), n_pressure: mats.n_pressure() })
    }

    /// Solves with velocity right-hand side `load`; returns (u, p, relative residual).
    pub fn solve(&self, load: &[f64], tol: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut rhs = load.to_vec();
        rhs.resize(self.n_velocity + self.n_pressure, 0.0);
        let (x, res) = self.lu.solve(&rhs, tol)?;
        Ok((x[..self.n_velocity].to_vec(), x[self.n_velocity..].to_vec(), res))
    }

    /// Unrefined multi-right-hand-side solve; returns velocity and pressure parts.
    pub fn solve_many(&self, loads: &[Vec<f64>]) -> Vec<(Vec<f64>, Vec<f64>)> {
        let n = self.n_velocity + self.n_pressure;
        let rhs: Vec<Vec<f64>> = loads
            .iter()
            .map(|l| {
                let mut r = l.clone();
                r.resize(n, 0.0);
                r
            })
            .collect();
        self.lu.solve_many(&rhs).into_iter().map(|x| (x[..self.n_velocity].to_vec(), x[self.n_velocity..].to_vec())).collect()
    }
}

pub struct StationaryProblem<'a> {
    pub space: &'a DofSpace,
    pub q: &'a RobinField,
    pub g: Option<BoundaryFn<'a>>,
    pub f: Option<BodyFn<'a>>,
    /// Right-hand side of the Robin condition; zero by default.
    pub rho0: Option<BoundaryFn<'a>>,
}

impl<'a> StationaryProblem<'a> {
    pub fn new(space: &'a DofSpace, q: &'a RobinField) -> Self {
        StationaryProblem { space, q, g: None, f: None, rho0: None }
    }

    pub fn with_g(mut self, g: BoundaryFn<'a>) -> Self {
        self.g = Some(g);
        self
    }

    pub fn with_f(mut self, f: BodyFn<'a>) -> Self {
        self.f = Some(f);
        self
    }

    pub fn with_rho0(mut self, rho0: BoundaryFn<'a>) -> Self {
        self.rho0 = Some(rho0);
        self
    }

    pub fn load(&self) -> Vec<f64> {
        let mut load = vec![0.0; self.space.velocity_dof_count()];
        if let Some(g) = self.g {
            crate::linalg::axpy(&mut load, 1.0, &assemble_neumann_load(self.space, g));
        }
        if let Some(f) = self.f {
            crate::linalg::axpy(&mut load, 1.0, &assemble_body_load(self.space, f));
        }
        if let Some(r) = self.rho0 {
            crate::linalg::axpy(&mut load, 1.0, &assemble_boundary_load(self.space, BoundaryTag::Gamma0, r));
        }
        load
    }
}

#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub u: DiscreteField,
    pub p: DiscreteField,
    pub residual: f64,
    /// a_q(u, u)
    pub energy: f64,
    /// load · u, the data side of the energy identity
    pub data_pairing: f64,
}

impl StationarySolution {
    pub fn energy_identity_error(&self) -> f64 {
        (self.energy - self.data_pairing).abs() / self.energy.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn solve_stationary(problem: &StationaryProblem, tol: f64) -> Result<StationarySolution> {
    if !(tol > 0.0) {
        return Err(Error::Input(format!("tolerance must be positive, got {tol}")));
    }
    let mats = StokesMatrices::new(problem.space, problem.q)?;
    solve_with_matrices(problem.space, &mats, &problem.load(), tol)
}

/// Solves with pre-assembled matrices and a given velocity load.
pub fn solve_with_matrices(space: &DofSpace, mats: &StokesMatrices, load: &[f64], tol: f64) -> Result<StationarySolution> {
    let solver = SaddleSolver::new(mats, 0.0)?;
    solve_with_solver(space, mats, &solver, load, tol)
}

pub fn solve_with_solver(space: &DofSpace, mats: &StokesMatrices, solver: &SaddleSolver, load: &[f64], tol: f64) -> Result<StationarySolution> {
    let (u, p, residual) = solver.solve(load, tol)?;
    let energy = mats.a_form(&u, &u);
    let data_pairing = dot(load, &u);
    Ok(StationarySolution {
        u: DiscreteField::new(space, FieldKind::Velocity, u)?,
        p: DiscreteField::new(space, FieldKind::Pressure, p)?,
        residual,
        energy,
        data_pairing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub h1_norm: f64,
    pub data_norm: f64,
    /// ‖u‖_{H¹} / (‖g‖_{L²(Γe)} + ‖f‖_{L²}); 0 for zero data.
    pub ratio: f64,
}

pub fn energy_estimate_check(sol: &StationarySolution, problem: &StationaryProblem) -> EnergyReport {
    let space = problem.space;
    let (l2, h1) = velocity_norms(space, &sol.u.values);
    let h1_norm = (l2 * l2 + h1 * h1).sqrt();
    let g_norm = problem
        .g
        .map(|g| {
            integrate_boundary(space, BoundaryTag::GammaE, |_, _, x, n| {
                let v = g(x, n);
                v[0] * v[0] + v[1] * v[1]
            })
            .sqrt()
        })
        .unwrap_or(0.0);
    let f_norm = problem
        .f
        .map(|f| {
            integrate(space, |_, _, x| {
                let v = f(x);
                v[0] * v[0] + v[1] * v[1]
            })
            .sqrt()
        })
        .unwrap_or(0.0);
    let data_norm = g_norm + f_norm;
    let ratio = if data_norm == 0.0 { 0.0 } else { h1_norm / data_norm };
    EnergyReport { h1_norm, data_norm, ratio }
}

/// True when the ratio between the two finest meshes changes by at most `rel`.
pub fn ratio_stabilizes(ratios: &[f64], rel: f64) -> bool {
    match ratios {
        [.., a, b] => (b - a).abs() <= rel * b.abs(),
        _ => true,
    }
}

/// Traces of a solution at the quadrature points of one boundary component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub x: [f64; 2],
    pub normal: [f64; 2],
    pub weight: f64,
    pub u: [f64; 2],
    pub du_dn: [f64; 2],
    pub p: f64,
    pub dp_dn: f64,
}

pub fn boundary_traces(space: &DofSpace, u: &[f64], p: &[f64], tag: BoundaryTag) -> Vec<TracePoint> {
    let mesh = &space.mesh;
    mesh.boundary_quadrature(tag)
        .into_iter()
        .map(|bp| {
            let be = &mesh.boundary_edges[bp.boundary_edge];
            let l = mesh.edge_barycentric(be, bp.s);
            let (uv, g) = velocity_at(space, u, be.triangle, l);
            let (pv, gp) = pressure_at(space, p, be.triangle, l);
            let n = bp.normal;
            TracePoint {
                x: bp.x,
                normal: n,
                weight: bp.weight,
                u: uv,
                du_dn: [g[0][0] * n[0] + g[0][1] * n[1], g[1][0] * n[0] + g[1][1] * n[1]],
                p: pv,
                dp_dn: gp[0] * n[0] + gp[1] * n[1],
            }
        })
        .collect()
}

/// Flux imbalance |∫_{Γe} u·n + ∫_{Γ0} u·n|.
pub fn flux_imbalance(space: &DofSpace, u: &[f64]) -> f64 {
    use crate::fem::eval::boundary_flux;
    (boundary_flux(space, u, BoundaryTag::GammaE) + boundary_flux(space, u, BoundaryTag::Gamma0)).abs()
}

/// Rigid rotation (−y, x) scaled by 1/R1 on the outer circle.
pub fn rigid_rotation_g(outer_radius: f64) -> impl Fn([f64; 2], [f64; 2]) -> [f64; 2] + Sync + Send + Copy {
    move |x, _| [-x[1] / outer_radius, x[0] / outer_radius]
}

/// Normal flux g = g_e·n.
pub fn radial_g(ge: f64) -> impl Fn([f64; 2], [f64; 2]) -> [f64; 2] + Sync + Send + Copy {
    move |_, n| [ge * n[0], ge * n[1]]
}
