use faer::Mat;
use proptest::prelude::*;
use robin_stokes::linalg::symmetric_eigen;
use robin_stokes::mesh::build_annulus;
use robin_stokes::spectral::{
    build_eigensystem, build_eigensystem_with, fractional_envelope, fractional_operator_norm, fractional_power_apply, isometry_check, semigroup_apply,
    EigenOptions, EigenSystem,
};
use robin_stokes::stationary::StokesMatrices;
use robin_stokes::{AnnulusSpec, DofSpace, Error, RobinField};
use std::sync::OnceLock;

fn space() -> &'static DofSpace {
    static S: OnceLock<DofSpace> = OnceLock::new();
    S.get_or_init(|| DofSpace::new(build_annulus(&AnnulusSpec::new(0.5, 1.0, 0.2)).unwrap()))
}

fn system() -> &'static (StokesMatrices, EigenSystem) {
    static E: OnceLock<(StokesMatrices, EigenSystem)> = OnceLock::new();
    E.get_or_init(|| {
        let s = space();
        let q = RobinField::constant(&s.mesh, 2.0, 1.0);
        let m = StokesMatrices::new(s, &q).unwrap();
        let es = build_eigensystem_with(s, &m, &q, &EigenOptions { count: 12, ..Default::default() }).unwrap();
        (m, es)
    })
}

/// Generalized eigenvalues of (A, M) restricted to ker B.
fn dense_oracle(mats: &StokesMatrices) -> Vec<f64> {
    let b = mats.divergence.to_dense();
    let (vals, vecs) = symmetric_eigen(&(b.transpose() * &b)).unwrap();
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let ker: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() < 1e-10 * top).collect();
    let z = Mat::<f64>::from_fn(vals.len(), ker.len(), |i, j| vecs[(i, ker[j])]);
    let kz = z.transpose() * mats.a_q.to_dense() * &z;
    let mz = z.transpose() * mats.mass.to_dense() * &z;
    let (s, u) = symmetric_eigen(&mz).unwrap();
    let n = s.len();
    let d = Mat::<f64>::from_fn(n, n, |i, j| if i == j { 1.0 / s[i].sqrt() } else { 0.0 });
    let mh = &u * &d * u.transpose();
    let c = &mh * &kz * &mh;
    symmetric_eigen(&Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]))).unwrap().0
}

#[test]
fn shift_invert_matches_dense_oracle() {
    let (m, es) = system();
    let dense = dense_oracle(m);
    for (l, lam) in es.eigenvalues.iter().enumerate() {
        assert!((lam - dense[l]).abs() < 1e-8 * dense[l], "mode {l}: {lam} vs {}", dense[l]);
    }
}

#[test]
fn eigenpairs_are_orthonormal_and_divergence_free() {
    let (m, es) = system();
    let (o, r) = es.deviations();
    assert!(o < 1e-10 && r < 1e-10);
    assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    for phi in &es.eigenfields {
        let div = m.divergence.mul_vec(phi);
        assert!(div.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-9);
    }
    assert!(isometry_check(es).max_deviation < 1e-10);
    assert!(es.mu <= es.eigenvalues[0]);
}

#[test]
fn semigroup_acts_diagonally() {
    let (_, es) = system();
    for l in [0, 3, 7] {
        let out = semigroup_apply(es, &es.eigenfields[l], 0.7);
        let f = (-0.7 * es.eigenvalues[l]).exp();
        for (a, b) in out.iter().zip(&es.eigenfields[l]) {
            assert!((a - f * b).abs() < 1e-10);
        }
    }
}

#[test]
fn fractional_power_requires_positive_time() {
    let (_, es) = system();
    assert!(matches!(fractional_power_apply(es, &es.eigenfields[0], 0.0, 0.5), Err(Error::ZeroTime)));
    assert!(fractional_power_apply(es, &es.eigenfields[0], 0.0, 0.0).is_ok());
    assert!(matches!(fractional_power_apply(es, &es.eigenfields[0], 1.0, -1.0), Err(Error::Input(_))));
}

#[test]
fn eigenvalues_increase_with_q() {
    let s = space();
    let lam = |q0: f64| build_eigensystem(s, &RobinField::constant(&s.mesh, q0, 1.0), 1).unwrap().eigenvalues[0];
    let (a, b, c) = (lam(1.0), lam(2.0), lam(4.0));
    assert!(a < b && b < c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fractional_norm_below_envelope(t in 0.05f64..5.0, eta in 0.0f64..2.0, delta in 0.05f64..0.95) {
        let (_, es) = system();
        prop_assert!(fractional_operator_norm(es, t, eta) <= fractional_envelope(es.mu, t, eta, delta) * (1.0 + 1e-12));
    }

    #[test]
    fn semigroup_contracts(t in 0.0f64..3.0, seed in 0u64..100) {
        let (_, es) = system();
        let coeffs: Vec<f64> = (0..es.len()).map(|i| ((i as u64 + seed) as f64 * 1.3).sin()).collect();
        let f = es.combine(&coeffs);
        let out = semigroup_apply(es, &f, t);
        prop_assert!(es.mass_norm(&out) <= (-es.eigenvalues[0] * t).exp() * es.mass_norm(&f) * (1.0 + 1e-10));
    }
}
