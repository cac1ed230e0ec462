use proptest::prelude::*;
use robin_stokes::analytic::VectorField;
use robin_stokes::carleman::{
    analytic_suite, bound_objective, build_weights, carleman_functionals, constant_field_gap, radial_psi0, theoretical_bound, trace_quantities,
    trace_quantities_discrete, AnalyticWeight,
};
use robin_stokes::analytic::ManufacturedStokes;
use robin_stokes::mesh::build_annulus;
use robin_stokes::stationary::{rigid_rotation_g, solve_stationary, StationaryProblem};
use robin_stokes::{AnnulusSpec, DofSpace, Error, RobinField};
use std::sync::OnceLock;

fn space() -> &'static DofSpace {
    static S: OnceLock<DofSpace> = OnceLock::new();
    S.get_or_init(|| DofSpace::new(build_annulus(&AnnulusSpec::new(0.5, 1.0, 0.2)).unwrap()))
}

fn weight(lambda: f64, s: f64) -> AnalyticWeight {
    AnalyticWeight::new(0.5, 1.0, lambda, s, &|x| 1.0 + 0.5 * x[0])
}

#[test]
fn weight_construction_rejects_bad_parameters() {
    let s = space();
    assert!(matches!(build_weights(s, 1.5, 1.0, &|_| 1.0), Err(Error::Input(_))));
    assert!(matches!(build_weights(s, 2.0, 0.0, &|_| 1.0), Err(Error::Input(_))));
    assert!(matches!(build_weights(s, 2.0, 1.0, &|x| x[0]), Err(Error::SignViolation { .. })));
    assert!(matches!(build_weights(s, 2.0, 1.0, &|_| 0.0), Err(Error::Input(_))));
}

#[test]
fn discrete_psi0_approximates_the_radial_solution() {
    let s = space();
    let w = build_weights(s, 2.0, 1.0, &|_| 1.0).unwrap();
    let (exact, theta) = radial_psi0(0.5, 1.0);
    for (i, x) in s.node_coords.iter().enumerate() {
        assert!((w.psi0.values[i] - exact(*x)).abs() < 2e-2);
    }
    assert!((w.theta - theta).abs() < 0.05 * theta);
    assert!((w.k - 1.0).abs() < 1e-12);
    let w4 = w.with_s(4.0);
    assert_eq!(w4.s, 4.0);
}

#[test]
fn constant_field_gap_matches_functionals() {
    for (lambda, s) in [(2.0, 1.0), (4.0, 8.0)] {
        let w = weight(lambda, s);
        let c = carleman_functionals(&w, &VectorField::constant(0.6, -0.8));
        let gap = constant_field_gap(&w, [0.6, -0.8]);
        assert!((c.margin() - gap).abs() < 1e-10 * gap.abs());
    }
}

#[test]
fn inequality_holds_for_the_suite_at_large_s() {
    for lambda in [2.0, 4.0] {
        for s in [4.0, 8.0] {
            let w = AnalyticWeight::new(0.5, 1.0, lambda, s, &|_| 1.0);
            for u in analytic_suite() {
                let c = carleman_functionals(&w, &u);
                assert!(c.holds(1e-8), "{} lambda {lambda} s {s}: {c:?}", u.name);
            }
        }
    }
}

#[test]
fn theoretical_bound_minimizes_the_objective() {
    let (a, b, k, d) = (3.0, 1e-6, 1.0, 2.0);
    let bd = theoretical_bound(a, b, k, d).unwrap();
    for f in [0.9, 0.99, 1.01, 1.1] {
        assert!(bound_objective(a, b, k, d, bd.s_opt * f) >= bd.value);
    }
    assert!(matches!(theoretical_bound(0.0, b, k, d), Err(Error::Input(_))));
    assert!(matches!(theoretical_bound(a, b, k, 0.5), Err(Error::Input(_))));
}

#[test]
fn trace_quantities_exact_and_discrete_agree_roughly() {
    let ms = ManufacturedStokes::default();
    let exact = trace_quantities(&ms.u, &ms.p, 0.5, 1.0);
    assert!(exact.a > 0.0 && exact.b > 0.0 && !exact.surrogate);
    let s = space();
    let q = RobinField::constant(&s.mesh, 2.0, 1.0);
    let sol = solve_stationary(&StationaryProblem::new(s, &q).with_g(&rigid_rotation_g(1.0)), 1e-10).unwrap();
    let d = trace_quantities_discrete(s, &sol.u.values, &sol.p.values);
    assert!(d.surrogate && d.a.is_finite() && d.b > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn analytic_weight_signs(r in 0.5001f64..0.9999, th in 0.0f64..6.283, lambda in 2.0f64..6.0) {
        let w = weight(lambda, 1.0);
        let x = [r * th.cos(), r * th.sin()];
        prop_assert!(w.psi0(x).0 > 0.0);
        prop_assert!(w.psi1(x).0 < 0.0);
    }

    #[test]
    fn analytic_weight_laplacians(r in 0.55f64..0.95, th in 0.0f64..6.283, lambda in 2.0f64..6.0) {
        let w = weight(lambda, 1.0);
        let x = [r * th.cos(), r * th.sin()];
        let e = 1e-4;
        let lap = |f: &dyn Fn([f64; 2]) -> f64| {
            (f([x[0] + e, x[1]]) + f([x[0] - e, x[1]]) + f([x[0], x[1] + e]) + f([x[0], x[1] - e]) - 4.0 * f(x)) / (e * e)
        };
        prop_assert!(lap(&|y| w.psi0(y).0).abs() < 1e-4);
        prop_assert!((lap(&|y| w.psi1(y).0) - lambda).abs() < 1e-4 * lambda);
        prop_assert_eq!(w.laplacian(), lambda);
    }

    #[test]
    fn weight_boundary_values(th in 0.0f64..6.283) {
        let w = weight(2.0, 1.0);
        let inner = [0.5 * th.cos(), 0.5 * th.sin()];
        let outer = [th.cos(), th.sin()];
        prop_assert!(w.psi0(inner).0.abs() < 1e-10);
        prop_assert!((w.psi0(outer).0 - (1.0 + 0.5 * outer[0])).abs() < 1e-10);
        prop_assert!(w.psi1(inner).0.abs() < 1e-12 && w.psi1(outer).0.abs() < 1e-12);
        // ∂nΨ0 < 0 on the inner circle (outward normal −x/r)
        let g = w.psi0(inner).1;
        prop_assert!(-(g[0] * inner[0] + g[1] * inner[1]) / 0.5 < 0.0);
    }
}
