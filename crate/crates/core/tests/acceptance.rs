//! Acceptance gate. Prints one `criterion N: PASS|FAIL` line per criterion and
//! exits nonzero when a criterion outside `KNOWN_RED` fails.

use std::time::Instant;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robin_stokes::analytic::{ManufacturedStokes, VectorField};
use robin_stokes::carleman::{analytic_suite, build_weights, carleman_functionals, radial_psi0, AnalyticWeight};
use robin_stokes::evolution::{
    data_size, geometric_times, measure_decay_rate, propagate_spectral_with, relative_discrepancy, step_implicit_euler_with, EvolutionProblem, Flux,
};
use robin_stokes::fem::assembly::assemble_neumann_load;
use robin_stokes::fem::eval::{integrate_boundary, pressure_l2, velocity_errors};
use robin_stokes::inverse::identifiability::{data_difference, differing_fraction, random_q_pair};
use robin_stokes::inverse::sweep::{stability_sweep_evolution, EvolutionTwin};
use robin_stokes::inverse::{recover_constant_q, reconstruct_q_difference, select_k, stability_sweep, StabilityCurve, Twin};
use robin_stokes::linalg::{axpy, symmetric_eigen};
use robin_stokes::mesh::{build_annulus, build_refined};
use robin_stokes::spectral::{build_eigensystem, build_eigensystem_with, EigenOptions};
use robin_stokes::stationary::{radial_g, rigid_rotation_g, solve_stationary, solve_with_matrices, StationaryProblem, StokesMatrices};
use robin_stokes::{AnnulusSpec, BoundaryTag, DofSpace, Error, RobinField};

const R0: f64 = 0.5;
const R1: f64 = 1.0;

/// Criteria that fail with a documented counterexample.
const KNOWN_RED: &[&str] = &["7"];

fn verdict(id: &str, pass: bool, detail: String) -> bool {
    let note = if !pass && KNOWN_RED.contains(&id) { " (known red)" } else { "" };
    println!("criterion {id}: {}{note} {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn space_at(h: f64, level: usize) -> DofSpace {
    DofSpace::new(build_refined(&AnnulusSpec::new(R0, R1, h), level).unwrap())
}

/// ∂u/∂n + 2u = 0 on the inner circle for u = (−y, x), since ∂u/∂n = −u/R0 there.
fn rotation_satisfies_robin_condition() -> bool {
    let u = VectorField::rigid_rotation();
    (0..16).all(|k| {
        let th = k as f64 * 0.4;
        let n = [-th.cos(), -th.sin()];
        let x = [R0 * th.cos(), R0 * th.sin()];
        let (v, g) = u.value_grad(x);
        let dn = [g[0][0] * n[0] + g[0][1] * n[1], g[1][0] * n[0] + g[1][1] * n[1]];
        (dn[0] + v[0] / R0).abs() < 1e-14 && (dn[1] + v[1] / R0).abs() < 1e-14
    })
}

fn criterion_01_rigid_rotation() -> bool {
    let t = Instant::now();
    let g = rigid_rotation_g(R1);
    let exact = |x: [f64; 2]| ([-x[1] / R1, x[0] / R1], [[0.0, -1.0 / R1], [1.0 / R1, 0.0]]);
    let mut errs = Vec::new();
    let mut p_fine = 0.0;
    for level in 0..=3 {
        let space = space_at(0.2, level);
        let q = RobinField::constant(&space.mesh, 2.0, 1.0);
        let sol = solve_stationary(&StationaryProblem::new(&space, &q).with_g(&g), 1e-10).unwrap();
        errs.push(velocity_errors(&space, &sol.u.values, &exact).0);
        p_fine = pressure_l2(&space, &sol.p.values);
    }
    let ord = orders(&errs);
    let secs = t.elapsed().as_secs_f64();
    let pass = rotation_satisfies_robin_condition() && ord.iter().all(|&o| o >= 1.5) && p_fine <= 1e-4 && secs <= 60.0;
    let errs_s = sci(&errs);
    verdict("1", pass, format!("L2 errors {errs_s} orders {ord:.2?} |p|_L2 {p_fine:.2e} time {secs:.1}s"))
}

fn criterion_02_manufactured_convergence() -> bool {
    let t = Instant::now();
    let ms = ManufacturedStokes::default();
    let q0 = 1.5;
    let f = |x: [f64; 2]| ms.force(x);
    let g = |x: [f64; 2], n: [f64; 2]| ms.traction(x, n);
    let rho = |x: [f64; 2], n: [f64; 2]| ms.robin_rhs(x, n, q0);
    let exact = |x: [f64; 2]| ms.u.value_grad(x);
    let (mut l2, mut h1) = (Vec::new(), Vec::new());
    for level in 0..=3 {
        let space = space_at(0.2, level);
        let q = RobinField::constant(&space.mesh, q0, 1.0);
        let sol = solve_stationary(&StationaryProblem::new(&space, &q).with_f(&f).with_g(&g).with_rho0(&rho), 1e-10).unwrap();
        let (a, b) = velocity_errors(&space, &sol.u.values, &exact);
        l2.push(a);
        h1.push(b);
    }
    let (o2, o1) = (orders(&l2), orders(&h1));
    let secs = t.elapsed().as_secs_f64();
    let pass = o1.iter().all(|&o| o >= 1.5) && o2.iter().all(|&o| o >= 1.8) && secs <= 120.0;
    verdict("2", pass, format!("H1 orders {o1:.2?} L2 orders {o2:.2?} time {secs:.1}s"))
}

/// Eigenvalues of A on ker B in the mass metric, by dense linear algebra.
fn dense_stokes_eigenvalues(mats: &StokesMatrices) -> Vec<f64> {
    let b = mats.divergence.to_dense();
    let btb = b.transpose() * &b;
    let (vals, vecs) = symmetric_eigen(&btb).unwrap();
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let kernel: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() < 1e-10 * top).collect();
    let z = Mat::<f64>::from_fn(vals.len(), kernel.len(), |i, j| vecs[(i, kernel[j])]);
    let kz = z.transpose() * mats.a_q.to_dense() * &z;
    let mz = z.transpose() * mats.mass.to_dense() * &z;
    let (s, u) = symmetric_eigen(&mz).unwrap();
    let k = s.len();
    let d = Mat::<f64>::from_fn(k, k, |i, j| if i == j { 1.0 / s[i].sqrt() } else { 0.0 });
    let mh = &u * &d * u.transpose();
    let c = &mh * &kz * &mh;
    let c = Mat::<f64>::from_fn(k, k, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    symmetric_eigen(&c).unwrap().0
}

fn criterion_03_eigensystem_oracle() -> bool {
    let space = space_at(0.2, 0);
    let ndof = space.velocity_dof_count();
    let q = RobinField::constant(&space.mesh, 2.0, 1.0);
    let mats = StokesMatrices::new(&space, &q).unwrap();
    let es = build_eigensystem_with(&space, &mats, &q, &EigenOptions { count: 5, ..Default::default() }).unwrap();
    let dense = dense_stokes_eigenvalues(&mats);
    let worst = (0..5).map(|i| (es.eigenvalues[i] - dense[i]).abs() / dense[i]).fold(0.0, f64::max);
    let (orth, ray) = es.deviations();
    let pass = ndof <= 2000 && worst <= 1e-8 && orth <= 1e-8 && ray <= 1e-8;
    verdict("3", pass, format!("{ndof} dofs, max rel diff {worst:.2e}, orthonormality {orth:.2e}, Rayleigh {ray:.2e}"))
}

fn criterion_03b_spectral_lower_bound() -> bool {
    let space = space_at(0.2, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let alpha = 1.0;
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..10 {
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (amp, base): (f64, f64) = (rng.random_range(0.0..3.0), rng.random_range(0.0..1.0));
        let q = RobinField::from_fn(&space.mesh, alpha, |x| alpha + base + amp * (0.5 + 0.5 * (x[1].atan2(x[0]) * 2.0 + phase).sin()));
        let es = build_eigensystem(&space, &q, 1).unwrap();
        tightest = tightest.min(es.eigenvalues[0] - es.mu);
        if es.eigenvalues[0] < es.mu {
            violations += 1;
        }
    }
    verdict("3b", violations == 0, format!("{violations} violations, min lambda1 - mu {tightest:.3e}"))
}

struct EvolutionSetup {
    space: DofSpace,
    q: RobinField,
    mats: StokesMatrices,
    v: Vec<f64>,
}

fn evolution_setup(h: f64) -> EvolutionSetup {
    let space = space_at(h, 0);
    let q = RobinField::constant(&space.mesh, 2.0, 1.0);
    let mats = StokesMatrices::new(&space, &q).unwrap();
    let v = solve_with_matrices(&space, &mats, &assemble_neumann_load(&space, &rigid_rotation_g(R1)), 1e-10).unwrap().u.values;
    EvolutionSetup { space, q, mats, v }
}

fn criterion_04_semigroup_decay() -> bool {
    let s = evolution_setup(0.2);
    let g = rigid_rotation_g(R1);
    let es = build_eigensystem_with(&s.space, &s.mats, &s.q, &EigenOptions { count: 30, ..Default::default() }).unwrap();
    let (l1, mu) = (es.eigenvalues[0], es.mu);

    let mut u_mode = s.v.clone();
    axpy(&mut u_mode, 1.0, &es.eigenfields[0]);
    let traj = step_implicit_euler_with(&EvolutionProblem::new(&s.space, &s.q, u_mode.clone(), Flux::Constant(&g), 4.0, 1e-3), &s.mats).unwrap();
    let single = measure_decay_rate(&traj, &s.v, &es).unwrap();
    let single_ok = (single.slope + l1).abs() <= 0.02 * l1;

    let skew = |x: [f64; 2], _: [f64; 2]| [x[1] * x[1], 1.0 + x[0]];
    let w = solve_stationary(&StationaryProblem::new(&s.space, &s.q).with_g(&skew), 1e-10).unwrap().u.values;
    let mut u_gen = s.v.clone();
    axpy(&mut u_gen, 1.0, &w);
    let traj = step_implicit_euler_with(&EvolutionProblem::new(&s.space, &s.q, u_gen, Flux::Constant(&g), 6.0, 1e-3), &s.mats).unwrap();
    let generic = measure_decay_rate(&traj, &s.v, &es).unwrap();
    let generic_ok = generic.slope >= -1.05 * l1 && generic.slope <= -0.95 * mu;

    let mut diffs = Vec::new();
    for dt in [4e-3, 2e-3, 1e-3] {
        let mut p = EvolutionProblem::new(&s.space, &s.q, u_mode.clone(), Flux::Constant(&g), 1.0, dt);
        p.sample_times = Some(vec![1.0]);
        let ie = step_implicit_euler_with(&p, &s.mats).unwrap();
        let sp = propagate_spectral_with(&p, &es, &s.mats).unwrap();
        diffs.push(relative_discrepancy(&s.mats, &ie.velocities[0], &sp.velocities[0]));
    }
    let ord = orders(&diffs);
    let agree_ok = diffs[2] <= 1e-3 && ord.iter().all(|&o| (0.8..=1.2).contains(&o));
    let diffs_s = sci(&diffs);
    verdict(
        "4",
        single_ok && generic_ok && agree_ok,
        format!(
            "single-mode slope {:.4} vs -lambda1 {:.4}; generic slope {:.4} in [{:.4}, {:.4}]; IE vs spectral {diffs_s} orders {ord:.2?}",
            single.slope,
            -l1,
            generic.slope,
            -1.05 * l1,
            -0.95 * mu
        ),
    )
}

fn criterion_05_discrete_energy() -> bool {
    let ratio = |h: f64, dt: f64| {
        let s = evolution_setup(h);
        let g = rigid_rotation_g(R1);
        let u0 = solve_with_matrices(&s.space, &s.mats, &assemble_neumann_load(&s.space, &radial_g(1.0)), 1e-10).unwrap().u.values;
        let horizon = 1.0;
        let traj = step_implicit_euler_with(&EvolutionProblem::new(&s.space, &s.q, u0.clone(), Flux::Constant(&g), horizon, dt), &s.mats).unwrap();
        let g_sq = integrate_boundary(&s.space, BoundaryTag::GammaE, |_, _, x, n| {
            let v = g(x, n);
            v[0] * v[0] + v[1] * v[1]
        });
        traj.energy.functional() / data_size(&s.mats, &u0, g_sq * horizon)
    };
    let base = ratio(0.2, 0.01);
    let space_ref = ratio(0.1, 0.01);
    let time_ref = ratio(0.2, 0.005);
    let dev = ((space_ref - base) / base).abs().max(((time_ref - base) / base).abs());
    verdict("5", dev <= 0.10, format!("ratio {base:.4} / space-refined {space_ref:.4} / time-refined {time_ref:.4}, max deviation {:.2}%", 100.0 * dev))
}

fn criterion_06_weight_signs() -> bool {
    let space = space_at(0.1, 0);
    let (_, theta_exact) = radial_psi0(R0, R1);
    let res = build_weights(&space, 2.0, 1.0, &|_| 1.0);
    match res {
        Ok(w) => {
            let rel = (w.theta - theta_exact).abs() / theta_exact;
            verdict("6", rel <= 0.02, format!("signs hold, theta {:.4} vs {theta_exact:.4} ({:.2}%), k {:.3}", w.theta, 100.0 * rel, w.k))
        }
        Err(e) => verdict("6", false, format!("{e}")),
    }
}

fn criterion_07_carleman_inequality() -> bool {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut count = 0;
    for lambda in [2.0, 4.0] {
        for s in [1.0, 2.0, 4.0, 8.0] {
            let w = AnalyticWeight::new(R0, R1, lambda, s, &|_| 1.0);
            for u in analytic_suite() {
                count += 1;
                let c = carleman_functionals(&w, &u);
                if !c.holds(1e-8) {
                    failures.push(format!("{} (lambda {lambda}, s {s}, margin {:.3e})", u.name, c.margin()));
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict("7", failures.is_empty() && secs <= 60.0, format!("{} of {count} cases violate: {failures:?}; time {secs:.1}s", failures.len()))
}

fn criterion_08_noiseless_twin() -> bool {
    let g = rigid_rotation_g(R1);
    let mut errs = Vec::new();
    let mut same = 0.0f64;
    for level in 0..=3 {
        let space = space_at(0.2, level);
        let q1 = RobinField::constant(&space.mesh, 2.0, 1.0);
        let q2 = RobinField::constant(&space.mesh, 2.1, 1.0);
        let s1 = solve_stationary(&StationaryProblem::new(&space, &q1).with_g(&g), 1e-12).unwrap();
        let s2 = solve_stationary(&StationaryProblem::new(&space, &q2).with_g(&g), 1e-12).unwrap();
        let k = select_k(&space, &s1.u.values, 0.4).unwrap();
        let rec = reconstruct_q_difference(&space, (&s1.u.values, &s1.p.values), (&s2.u.values, &s2.p.values), &q2, &k).unwrap();
        errs.push(rec.error_against(&k, |_| 0.1) / (0.1 * k.measure.sqrt()));
        let zero = reconstruct_q_difference(&space, (&s1.u.values, &s1.p.values), (&s1.u.values, &s1.p.values), &q1, &k).unwrap();
        same = same.max(zero.l2_norm);
    }
    let ord = orders(&errs);
    let pass = ord.iter().all(|&o| o >= 1.0) && same <= 1e-8;
    let errs_s = sci(&errs);
    verdict("8", pass, format!("relative errors {errs_s} orders {ord:.2?}, q1 = q2 gives {same:.1e}"))
}

fn criterion_09_constant_q_recovery() -> bool {
    let gn = radial_g(1.0);
    let gt = rigid_rotation_g(R1);
    let mut errs = Vec::new();
    let mut tangential = None;
    for level in 0..=3 {
        let space = space_at(0.2, level);
        let q1 = RobinField::constant(&space.mesh, 1.0, 0.5);
        let q2 = RobinField::constant(&space.mesh, 1.2, 0.5);
        let a = solve_stationary(&StationaryProblem::new(&space, &q1).with_g(&gn), 1e-12).unwrap();
        let b = solve_stationary(&StationaryProblem::new(&space, &q2).with_g(&gn), 1e-12).unwrap();
        let rec = recover_constant_q(&space, (&a.u.values, &a.p.values), (&b.u.values, &b.p.values), 1.2, 1e-3).unwrap();
        errs.push((rec - 1.0).abs());
        if level == 0 {
            let a = solve_stationary(&StationaryProblem::new(&space, &q1).with_g(&gt), 1e-12).unwrap();
            let b = solve_stationary(&StationaryProblem::new(&space, &q2).with_g(&gt), 1e-12).unwrap();
            tangential = Some(recover_constant_q(&space, (&a.u.values, &a.p.values), (&b.u.values, &b.p.values), 1.2, 1e-3));
        }
    }
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let flux_err = matches!(tangential, Some(Err(Error::FluxTooSmall { .. })));
    let errs_s = sci(&errs);
    verdict("9", decreasing && flux_err, format!("errors {errs_s}, tangential data -> {:?}", tangential.map(|r| r.err().map(|e| e.to_string()))))
}

const LEVELS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

fn corrosion_twin(space: &DofSpace) -> Twin<'_> {
    let q_ref = RobinField::constant(&space.mesh, 2.0, 1.0);
    let q_true = RobinField::from_fn(&space.mesh, 1.0, |x| if x[1].atan2(x[0]).abs() < 0.6 { 2.8 } else { 2.0 });
    Twin::new(space, q_ref, q_true, &rigid_rotation_g(R1), 0.3, 24).unwrap()
}

fn curve_summary(c: &StabilityCurve) -> String {
    let med: Vec<f64> = LEVELS.iter().map(|&e| c.median_error(e)).collect();
    let fit = c.fit.as_ref().unwrap();
    format!("medians {med:.4?} C {:.4} C_env {:.4} C1 {:.4} excluded {}", fit.c_ls, fit.c_envelope, fit.c1, fit.excluded.len())
}

fn criterion_10_logarithmic_stability() -> bool {
    let t = Instant::now();
    let space = DofSpace::new(build_annulus(&AnnulusSpec::new(R0, R1, 0.1)).unwrap());
    let twin = corrosion_twin(&space);
    let curve = stability_sweep(&twin, &LEVELS, 10, 7).unwrap();
    let med: Vec<f64> = LEVELS.iter().map(|&e| curve.median_error(e)).collect();
    let monotone = med.windows(2).all(|w| w[1] <= w[0]);
    let violations = curve.bound_violations().len();
    let beta = curve.free.map(|f| f.exponent).unwrap_or(f64::NAN);
    let secs = t.elapsed().as_secs_f64();
    let pass = curve.fit.is_some() && monotone && violations == 0 && (0.25..=1.0).contains(&beta) && secs <= 600.0;
    verdict("10", pass, format!("{}; {violations} bound violations; free exponent {beta:.3}; time {secs:.1}s", curve_summary(&curve)))
}

fn criterion_11_evolution_stability() -> bool {
    let space = DofSpace::new(build_annulus(&AnnulusSpec::new(R0, R1, 0.1)).unwrap());
    let twin = corrosion_twin(&space);
    let stat = stability_sweep(&twin, &LEVELS, 10, 7).unwrap();
    let es = build_eigensystem(&space, &twin.q_ref, 1).unwrap();
    let horizon = 20.0 / es.mu;
    let evo = EvolutionTwin::new(&twin, &rigid_rotation_g(R1), horizon, 0.01, geometric_times(0.05, horizon, 40)).unwrap();
    let dyn_curve = stability_sweep_evolution(&evo, &LEVELS, 10, 7).unwrap();
    let (cs, ce) = (stat.fit.as_ref().unwrap().c_ls, dyn_curve.fit.as_ref().unwrap().c_ls);
    let change = (ce - cs).abs() / cs;
    verdict("11", change <= 0.25, format!("T = {horizon:.2}; stationary C {cs:.4}, evolution C {ce:.4}, change {:.2}%; evolution {}", 100.0 * change, curve_summary(&dyn_curve)))
}

fn criterion_12_identifiability() -> bool {
    let space = DofSpace::new(build_annulus(&AnnulusSpec::new(R0, R1, 0.1)).unwrap());
    let g = rigid_rotation_g(R1);
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_b = f64::INFINITY;
    let mut worst_frac = f64::INFINITY;
    for _ in 0..20 {
        let (a, b) = random_q_pair(&space.mesh, &mut rng, 2.0, 1.0, 0.15);
        worst_frac = worst_frac.min(differing_fraction(&space.mesh, &a, &b));
        worst_b = worst_b.min(data_difference(&space, &a, &b, &g, tol).unwrap());
    }
    verdict("12", worst_frac >= 0.10 && worst_b > 10.0 * tol, format!("min differing fraction {worst_frac:.3}, min B {worst_b:.3e} vs {:.0e}", 10.0 * tol))
}

fn main() {
    let criteria: [(&str, fn() -> bool); 13] = [
        ("1", criterion_01_rigid_rotation),
        ("2", criterion_02_manufactured_convergence),
        ("3", criterion_03_eigensystem_oracle),
        ("3b", criterion_03b_spectral_lower_bound),
        ("4", criterion_04_semigroup_decay),
        ("5", criterion_05_discrete_energy),
        ("6", criterion_06_weight_signs),
        ("7", criterion_07_carleman_inequality),
        ("8", criterion_08_noiseless_twin),
        ("9", criterion_09_constant_q_recovery),
        ("10", criterion_10_logarithmic_stability),
        ("11", criterion_11_evolution_stability),
        ("12", criterion_12_identifiability),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (id, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let pass = std::panic::catch_unwind(run).unwrap_or_else(|_| verdict(id, false, "panicked".into()));
        if !pass && !KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: every criterion outside {KNOWN_RED:?} passed");
    } else {
        println!("acceptance: failing criteria {unexpected:?}");
        std::process::exit(1);
    }
}
