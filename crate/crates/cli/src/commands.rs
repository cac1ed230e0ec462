//! Subcommand bodies. Each returns `Err(Failure)` naming the stage that failed.

use std::fs;

use rayon::prelude::*;
use robin_stokes::carleman::{analytic_suite, build_weights, carleman_functionals, radial_psi0, AnalyticWeight};
use robin_stokes::evolution::{geometric_times, measure_decay_rate, step_implicit_euler_with, EvolutionProblem, Flux};
use robin_stokes::fem::eval::{pressure_l2_error, velocity_errors};
use robin_stokes::inverse::sweep::{stability_sweep_evolution, EvolutionTwin};
use robin_stokes::inverse::{extract_measurement, reconstruct_q_difference, stability_sweep, StabilityCurve, Twin};
use robin_stokes::io::vtk::vertex_velocity;
use robin_stokes::io::{fmt_f64, read_csv, PointData};
use robin_stokes::linalg::{add, axpy, sub};
use robin_stokes::mesh::{build_annulus, build_refined};
use robin_stokes::spectral::{build_eigensystem_with, EigenOptions, EigenSystem};
use robin_stokes::stationary::{solve_stationary, solve_with_matrices, StationaryProblem, StokesMatrices};
use robin_stokes::{BoundaryTag, DofSpace, Error, Mesh};
use serde_json::{json, Map, Value};

use crate::artifacts::Artifacts;
use crate::config::{ExperimentConfig, FieldSuite, FluxPreset, InitialState, KappaPreset, RobinSpec, SweepMode};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Solver { stage: String, message: String },
    Invariant { stage: String, invariant: String },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Solver { .. } => 2,
            Failure::Invariant { .. } => 3,
        }
    }

    pub fn stage(&self) -> &str {
        match self {
            Failure::Config(_) => "config",
            Failure::Solver { stage, .. } | Failure::Invariant { stage, .. } => stage,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Config(m) => format!("config error: {m}"),
            Failure::Solver { stage, message } => format!("solver failure in {stage}: {message}"),
            Failure::Invariant { stage, invariant } => format!("invariant violated in {stage}: {invariant}"),
        }
    }
}

fn invariant(stage: &str, what: impl Into<String>) -> Failure {
    Failure::Invariant { stage: stage.into(), invariant: what.into() }
}

trait Stage<T> {
    fn stage(self, name: &str) -> Result<T, Failure>;
}

impl<T> Stage<T> for robin_stokes::Result<T> {
    fn stage(self, name: &str) -> Result<T, Failure> {
        self.map_err(|e| match e {
            Error::Input(_) | Error::Geometry(_) | Error::RobinBound { .. } => Failure::Config(format!("{name}: {e}")),
            Error::SignViolation { .. } | Error::InsufficientDecay { .. } | Error::EmptyK { .. } | Error::DivisionGuard { .. } | Error::FluxTooSmall { .. } => {
                invariant(name, e.to_string())
            }
            _ => Failure::Solver { stage: name.into(), message: e.to_string() },
        })
    }
}

impl<T> Stage<T> for std::io::Result<T> {
    fn stage(self, name: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure::Solver { stage: name.into(), message: format!("i/o: {e}") })
    }
}

type Run = Result<(), Failure>;

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn base_space(cfg: &ExperimentConfig) -> Result<DofSpace, Failure> {
    Ok(DofSpace::new(build_annulus(&cfg.geometry.spec()).stage("mesh")?))
}

fn flux_fn(cfg: &ExperimentConfig) -> impl Fn([f64; 2], [f64; 2]) -> [f64; 2] + Sync + '_ {
    let r1 = cfg.geometry.outer_radius;
    move |x, n| cfg.flux.eval(r1, x, n)
}

fn vertex_values(mesh: &Mesh, v: &[f64]) -> Vec<f64> {
    v[..mesh.vertices.len()].to_vec()
}

fn eigensystem(cfg: &ExperimentConfig, space: &DofSpace, mats: &StokesMatrices, q: &robin_stokes::RobinField) -> Result<EigenSystem, Failure> {
    let opts = EigenOptions { count: cfg.eigen_count, tol: cfg.tolerances.eigen, ..Default::default() };
    build_eigensystem_with(space, mats, q, &opts).stage("eigensystem")
}

pub fn mesh(cfg: &ExperimentConfig, out: &Artifacts) -> Run {
    let spec = cfg.geometry.spec();
    let mut mesh = build_annulus(&spec).stage("mesh")?;
    let mut rows = Vec::new();
    for level in 0..=cfg.geometry.refinements {
        if level > 0 {
            mesh = robin_stokes::mesh::refine(&mesh).stage("refine")?;
        }
        mesh.validate().stage("mesh validation")?;
        if mesh.euler_characteristic() != 0 {
            return Err(invariant("mesh validation", format!("Euler characteristic {} != 0 on level {level}", mesh.euler_characteristic())));
        }
        let space = DofSpace::new(mesh.clone());
        rows.push(vec![
            level.to_string(),
            f(mesh.max_edge_length()),
            mesh.vertices.len().to_string(),
            mesh.triangles.len().to_string(),
            mesh.boundary_edges_with(BoundaryTag::GammaE).count().to_string(),
            mesh.boundary_edges_with(BoundaryTag::Gamma0).count().to_string(),
            space.velocity_dof_count().to_string(),
            space.pressure_dof_count().to_string(),
            f(mesh.area()),
        ]);
    }
    let header = ["level", "max_edge", "vertices", "triangles", "outer_edges", "inner_edges", "velocity_dofs", "pressure_dofs", "area"];
    out.csv("mesh.csv", &header, &rows).stage("write mesh.csv")?;
    out.vtk("mesh.vtk", &mesh, &[]).stage("write mesh.vtk")?;
    Ok(())
}

type Exact = Box<dyn Fn([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) + Sync>;

/// Closed-form solutions available for the built-in presets with constant q.
fn exact_solution(cfg: &ExperimentConfig) -> Option<(Exact, f64)> {
    let RobinSpec::Constant { value: q } = cfg.robin else { return None };
    let (r0, r1, a) = (cfg.geometry.inner_radius, cfg.geometry.outer_radius, cfg.flux.magnitude);
    match cfg.flux.preset {
        FluxPreset::RigidRotation if (q * r0 - 1.0).abs() < 1e-12 => {
            let c = a / r1;
            Some((Box::new(move |x| ([-c * x[1], c * x[0]], [[0.0, -c], [c, 0.0]])), 0.0))
        }
        FluxPreset::Radial => {
            let c = a / (1.0 / (r0 * r0) - 1.0 / (r1 * r1) + q / r0);
            let p = -a - c / (r1 * r1);
            let u = move |x: [f64; 2]| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                let g = |i: usize, j: usize| c * ((i == j) as u8 as f64 / r2 - 2.0 * x[i] * x[j] / (r2 * r2));
                ([c * x[0] / r2, c * x[1] / r2], [[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]])
            };
            Some((Box::new(u), p))
        }
        _ => None,
    }
}

pub fn solve_stationary_cmd(cfg: &ExperimentConfig, out: &Artifacts) -> Run {
    let spec = cfg.geometry.spec();
    let g = flux_fn(cfg);
    let exact = exact_solution(cfg);
    let levels: Vec<usize> = (0..=cfg.geometry.refinements).collect();
    let results: Vec<Result<_, Failure>> = levels
        .par_iter()
        .map(|&level| {
            let mesh = build_refined(&spec, level).stage("mesh")?;
            let space = DofSpace::new(mesh);
            let q = cfg.robin.field(&space.mesh, cfg.alpha);
            let sol = solve_stationary(&StationaryProblem::new(&space, &q).with_g(&g), cfg.tolerances.solver).stage("stationary solve")?;
            let errs = exact.as_ref().map(|(u, p)| {
                let (l2, h1) = velocity_errors(&space, &sol.u.values, u.as_ref());
                (l2, h1, pressure_l2_error(&space, &sol.p.values, &|_| *p))
            });
            Ok((space, sol, errs))
        })
        .collect();
    let mut rows = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut last = None;
    for (level, r) in results.into_iter().enumerate() {
        let (space, sol, errs) = r?;
        if sol.energy_identity_error() > 1e-8 {
            return Err(invariant("stationary solve", format!("energy identity a_q(u,u) = <load, u> off by {:e} on level {level}", sol.energy_identity_error())));
        }
        let (l2, h1, p) = errs.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        let order = |a: f64, b: f64| (a / b).log2();
        let (o2, o1) = prev.map(|(a, b)| (order(a, l2), order(b, h1))).unwrap_or((f64::NAN, f64::NAN));
        prev = Some((l2, h1));
        rows.push(vec![
            level.to_string(),
            f(space.mesh.max_edge_length()),
            space.velocity_dof_count().to_string(),
            f(l2),
            f(h1),
            f(p),
            f(o2),
            f(o1),
            f(sol.energy),
            f(sol.residual),
        ]);
        last = Some((space, sol));
    }
    let header = ["level", "max_edge", "velocity_dofs", "u_l2_error", "u_h1_error", "p_l2_error", "u_l2_order", "u_h1_order", "energy", "residual"];
    out.csv("convergence.csv", &header, &rows).stage("write convergence.csv")?;
    let (space, sol) = last.expect("at least one level");
    let vel = vertex_velocity(&space.mesh, &sol.u.values);
    let pre = vertex_values(&space.mesh, &sol.p.values);
    out.vtk(
        "stationary.vtk",
        &space.mesh,
        &[PointData::Vector { name: "velocity", values: &vel }, PointData::Scalar { name: "pressure", values: &pre }],
    )
    .stage("write stationary.vtk")?;
    Ok(())
}

pub fn solve_evolution(cfg: &ExperimentConfig, out: &Artifacts) -> Run {
    let space = base_space(cfg)?;
    let q = cfg.robin.field(&space.mesh, cfg.alpha);
    let mats = StokesMatrices::new(&space, &q).stage("assembly")?;
    let es = eigensystem(cfg, &space, &mats, &q)?;

    let g_const = flux_fn(cfg);
    let (kh, rate) = match cfg.flux.time {
        Some(KappaPreset::Exponential { h, rate }) => (h, rate),
        None => (0.0, 0.0),
    };
    let h_fn = move |_: [f64; 2]| kh;
    let rho_fn = |x: [f64; 2]| x[0] / (x[0] * x[0] + x[1] * x[1]).sqrt();
    let omega = move |t: f64| (-rate * t).exp();
    let domega = move |t: f64| -rate * (-rate * t).exp();
    let g_limit = move |_: [f64; 2], n: [f64; 2]| [kh * n[0], kh * n[1]];
    let (flux, g_stat): (Flux, &(dyn Fn([f64; 2], [f64; 2]) -> [f64; 2] + Sync)) = match cfg.flux.time {
        Some(_) => (Flux::Normal { h: &h_fn, rho: &rho_fn, omega: &omega, domega: &domega }, &g_limit),
        None => (Flux::Constant(&g_const), &g_const),
    };
    let load = robin_stokes::fem::assembly::assemble_neumann_load(&space, g_stat);
    let stat = solve_with_matrices(&space, &mats, &load, cfg.tolerances.solver).stage("stationary solve")?;
    let v = stat.u.values.clone();
    let u0 = match cfg.time.initial {
        InitialState::Stationary => v.clone(),
        InitialState::Zero => vec![0.0; v.len()],
        InitialState::FirstMode => {
            let mut u = v.clone();
            axpy(&mut u, 1.0, &es.eigenfields[0]);
            u
        }
    };
    let n = cfg.time.samples;
    let samples: Vec<f64> = (0..n).map(|k| cfg.time.horizon * k as f64 / (n - 1) as f64).collect();
    let mut problem = EvolutionProblem::new(&space, &q, u0, flux, cfg.time.horizon, cfg.time.dt);
    problem.sample_times = Some(samples);
    let traj = step_implicit_euler_with(&problem, &mats).stage("time stepping")?;

    let meas_v = extract_measurement(&space, &v, &stat.p.values);
    let mut rows = Vec::new();
    for (k, &t) in traj.times.iter().enumerate() {
        let u = &traj.velocities[k];
        let b = extract_measurement(&space, u, &traj.pressures[k]).difference(&meas_v).b();
        rows.push(vec![f(t), f(es.mass_norm(&sub(u, &v))), f(mats.a_form(u, u)), f(b)]);
    }
    out.csv("trajectory.csv", &["t", "l2_dist_to_stationary", "energy", "boundary_B"], &rows).stage("write trajectory.csv")?;

    let mut summary = Map::new();
    summary.insert("lambda1".into(), json!(es.eigenvalues[0]));
    summary.insert("mu".into(), json!(es.mu));
    summary.insert("energy_functional".into(), json!(traj.energy.functional()));
    if cfg.flux.time.is_none() && cfg.time.initial != InitialState::Stationary {
        let mut dense = EvolutionProblem::new(&space, &q, problem.u0.clone(), flux, cfg.time.horizon, cfg.time.dt);
        dense.sample_times = None;
        let full = step_implicit_euler_with(&dense, &mats).stage("time stepping")?;
        match measure_decay_rate(&full, &v, &es) {
            Ok(d) => {
                summary.insert("decay_slope".into(), json!(d.slope));
                summary.insert("decay_decades".into(), json!(d.decades));
            }
            Err(e) => log::warn!("decay rate not measured: {e}"),
        }
    }
    out.json("evolution.json", summary).stage("write evolution.json")?;

    let k = traj.times.len() - 1;
    let vel = vertex_velocity(&space.mesh, &traj.velocities[k]);
    let pre = vertex_values(&space.mesh, &traj.pressures[k]);
    out.vtk("evolution_final.vtk", &space.mesh, &[PointData::Vector { name: "velocity", values: &vel }, PointData::Scalar { name: "pressure", values: &pre }])
        .stage("write evolution_final.vtk")?;
    Ok(())
}

pub fn eigs(cfg: &ExperimentConfig, out: &Artifacts) -> Run {
    let space = base_space(cfg)?;
    let q = cfg.robin.field(&space.mesh, cfg.alpha);
    let mats = StokesMatrices::new(&space, &q).stage("assembly")?;
    let es = eigensystem(cfg, &space, &mats, &q)?;
    let rows: Vec<Vec<String>> = es.eigenvalues.iter().zip(&es.residuals).enumerate().map(|(l, (lam, r))| vec![(l + 1).to_string(), f(*lam), f(*r)]).collect();
    out.csv("eigenvalues.csv", &["l", "lambda", "residual"], &rows).stage("write eigenvalues.csv")?;
    let mut summary = Map::new();
    summary.insert("mu".into(), json!(es.mu));
    summary.insert("orthonormality_error".into(), json!(es.orthonormality_error));
    summary.insert("rayleigh_error".into(), json!(es.rayleigh_error));
    out.json("eigs.json", summary).stage("write eigs.json")?;
    let vel = vertex_velocity(&space.mesh, &es.eigenfields[0]);
    out.vtk("eigenfield_1.vtk", &space.mesh, &[PointData::Vector { name: "velocity", values: &vel }]).stage("write eigenfield_1.vtk")?;
    let tol = 1e-8;
    if es.orthonormality_error > tol || es.rayleigh_error > tol {
        return Err(invariant(
            "eigensystem",
            format!("M-orthonormality {:e} / Rayleigh identity {:e} deviation above {tol:e}", es.orthonormality_error, es.rayleigh_error),
        ));
    }
    if es.mu > es.eigenvalues[0] * (1.0 + 1e-10) {
        return Err(invariant("eigensystem", format!("lower bound mu = {} exceeds lambda_1 = {}", es.mu, es.eigenvalues[0])));
    }
    Ok(())
}

pub fn weights(cfg: &ExperimentConfig, out: &Artifacts) -> Run {
    let space = base_space(cfg)?;
    let (lambda, s) = (cfg.carleman.lambdas.first().copied().unwrap_or(2.0), cfg.carleman.s_values.first().copied().unwrap_or(1.0));
    let w = build_weights(&space, lambda, s, &|_| 1.0).stage("carleman weights")?;
    let (_, theta) = radial_psi0(cfg.geometry.inner_radius, cfg.geometry.outer_radius);
    let rows = vec![
        vec!["lambda".into(), f(lambda)],
        vec!["s".into(), f(s)],
        vec!["k".into(), f(w.k)],
        vec!["theta".into(), f(w.theta)],
        vec!["theta_closed_form".into(), f(theta)],
        vec!["theta_rel_error".into(), f((w.theta - theta).abs() / theta)],
    ];
    out.csv("weights.csv", &["quantity", "value"], &rows).stage("write weights.csv")?;
    let p0 = vertex_values(&space.mesh, &w.psi0.values);
    let p1 = vertex_values(&space.mesh, &w.psi1.values);
    out.vtk("weights.vtk", &space.mesh, &[PointData::Scalar { name: "psi0", values: &p0 }, PointData::Scalar { name: "psi1", values: &p1 }])
        .stage("write weights.vtk")?;
    Ok(())
}

pub fn carleman_check(cfg: &ExperimentConfig, out: &Artifacts) -> Run {
    let (r0, r1) = (cfg.geometry.inner_radius, cfg.geometry.outer_radius);
    let suite: Vec<_> = analytic_suite().into_iter().filter(|u| cfg.carleman.suite == FieldSuite::Full || u.name.starts_with("constant")).collect();
    let grid: Vec<(f64, f64)> = cfg.carleman.lambdas.iter().flat_map(|&l| cfg.carleman.s_values.iter().map(move |&s| (l, s))).collect();
    let tol = cfg.tolerances.carleman;
    let rows: Vec<(Vec<String>, Option<String>)> = grid
        .par_iter()
        .flat_map_iter(|&(lambda, s)| {
            let w = AnalyticWeight::new(r0, r1, lambda, s, &|_| 1.0);
            suite
                .iter()
                .map(|u| {
                    let c = carleman_functionals(&w, u);
                    let ok = c.holds(tol);
                    let row = vec![u.name.clone(), f(lambda), f(s), f(c.lhs), f(c.rhs), f(c.margin()), ok.to_string()];
                    (row, (!ok).then(|| format!("{} (lambda={lambda}, s={s})", u.name)))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let failed: Vec<String> = rows.iter().filter_map(|r| r.1.clone()).collect();
    let rows: Vec<Vec<String>> = rows.into_iter().map(|r| r.0).collect();
    out.csv("carleman.csv", &["field_id", "lambda", "s", "lhs", "rhs", "margin", "holds"], &rows).stage("write carleman.csv")?;
    if !failed.is_empty() {
        return Err(invariant("carleman-check", format!("rhs - lhs >= -{tol:e} (|lhs| + |rhs|) fails for {}", failed.join(", "))));
    }
    Ok(())
}

fn twin<'a>(cfg: &ExperimentConfig, space: &'a DofSpace) -> Result<Twin<'a>, Failure> {
    let q_ref = cfg.robin.field(&space.mesh, cfg.alpha);
    let q_true = cfg.inverse.q_true.field(&space.mesh, cfg.alpha);
    let g = flux_fn(cfg);
    Twin::new(space, q_ref, q_true, &g, cfg.inverse.m, cfg.inverse.max_frequency).stage("inverse setup")
}

pub fn invert(cfg: &ExperimentConfig, out: &Artifacts) -> Run {
    let space = base_space(cfg)?;
    let tw = twin(cfg, &space)?;
    let diff = tw.meas_true.difference(&tw.meas_ref);
    let w = tw.continuation.solve(&diff, None);
    let u1 = add(&tw.u_ref, &w.u);
    let p1 = add(&tw.p_ref, &w.p);
    let rec = reconstruct_q_difference(&space, (&u1, &p1), (&tw.u_ref, &tw.p_ref), &tw.q_ref, &tw.k).stage("reconstruction")?;
    let mut rows = Vec::new();
    let mut exact = Vec::new();
    for (pt, d) in tw.k.points.iter().zip(&rec.values) {
        let be = &space.mesh.boundary_edges[pt.boundary_edge];
        let truth = tw.q_ref.on_edge(be, pt.s) - tw.q_true.on_edge(be, pt.s);
        exact.push(truth);
        rows.push(vec![f(pt.x[1].atan2(pt.x[0])), f(pt.x[0]), f(pt.x[1]), f(*d), f(truth)]);
    }
    out.csv("q_reconstruction.csv", &["theta", "x", "y", "delta_rec", "delta_true"], &rows).stage("write q_reconstruction.csv")?;
    let err = rec.error_against(&tw.k, |p| {
        let be = &space.mesh.boundary_edges[p.boundary_edge];
        tw.q_ref.on_edge(be, p.s) - tw.q_true.on_edge(be, p.s)
    });
    let mut summary = Map::new();
    summary.insert("err_L2K".into(), json!(err));
    summary.insert("delta_L2K".into(), json!(tw.k.l2(&exact)));
    summary.insert("K_measure".into(), json!(tw.k.measure));
    summary.insert("rank".into(), json!(w.rank));
    out.json("invert.json", summary).stage("write invert.json")?;
    Ok(())
}

pub fn stability_curve(cfg: &ExperimentConfig, out: &Artifacts) -> Run {
    let inv = &cfg.inverse;
    let space = base_space(cfg)?;
    let tw = twin(cfg, &space)?;
    let curve: StabilityCurve = match inv.mode {
        SweepMode::Stationary => stability_sweep(&tw, &inv.noise_levels, inv.trials, inv.seed).stage("stability sweep")?,
        SweepMode::Evolution => {
            let mats = &tw.mats_ref;
            let es = eigensystem(cfg, &space, mats, &tw.q_ref)?;
            let horizon = 20.0 / es.mu;
            let times = geometric_times(cfg.time.dt.max(horizon * 1e-3), horizon, cfg.time.samples);
            let g = flux_fn(cfg);
            let evo = EvolutionTwin::new(&tw, &g, horizon, cfg.time.dt, times).stage("evolution data")?;
            stability_sweep_evolution(&evo, &inv.noise_levels, inv.trials, inv.seed).stage("stability sweep")?
        }
    };
    let rows: Vec<Vec<String>> = curve.records.iter().map(|r| vec![f(r.epsilon), r.trial.to_string(), f(r.b), f(r.err), r.rank.to_string()]).collect();
    out.csv("stability.csv", &["epsilon", "trial", "B", "err_L2K", "rank"], &rows).stage("write stability.csv")?;
    let mut summary = Map::new();
    summary.insert("noiseless_error".into(), json!(curve.floor));
    summary.insert("median_error".into(), Value::Array(curve.levels().iter().map(|&e| json!({"epsilon": e, "median": curve.median_error(e)})).collect()));
    if let Some(fit) = &curve.fit {
        summary.insert("C".into(), json!(fit.c_ls));
        summary.insert("C_envelope".into(), json!(fit.c_envelope));
        summary.insert("C1".into(), json!(fit.c1));
        summary.insert("residual".into(), json!(fit.residual));
        summary.insert("excluded".into(), json!(fit.excluded));
    }
    if let Some(fr) = &curve.free {
        summary.insert("free_exponent".into(), json!(fr.exponent));
        summary.insert("free_C".into(), json!(fr.c));
    }
    out.json("stability.json", summary).stage("write stability.json")?;
    if curve.fit.is_none() {
        return Err(Failure::Solver { stage: "stability fit".into(), message: "logarithmic fit failed".into() });
    }
    let v = curve.bound_violations();
    if !v.is_empty() {
        return Err(invariant("stability fit", format!("{} records above C/sqrt(ln(C1/B))", v.len())));
    }
    Ok(())
}

/// Collects every CSV in the output directory into one table of column statistics.
pub fn report(_cfg: &ExperimentConfig, out: &Artifacts) -> Run {
    let mut names: Vec<String> = fs::read_dir(&out.dir)
        .stage("report scan")?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv") && n != "summary.csv")
        .collect();
    names.sort();
    let mut rows = Vec::new();
    for name in names {
        let table = read_csv(fs::File::open(out.path(&name)).stage("report read")?).stage("report read")?;
        for col in &table.header {
            let Some(vals) = table.floats(col) else { continue };
            let finite: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
            let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
            let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let last = vals.last().copied().unwrap_or(f64::NAN);
            rows.push(vec![name.clone(), col.clone(), vals.len().to_string(), f(min), f(max), f(last)]);
        }
    }
    out.csv("summary.csv", &["source", "column", "count", "min", "max", "last"], &rows).stage("write summary.csv")?;
    Ok(())
}
