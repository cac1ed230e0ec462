//! Discrete Stokes operator A_q on the discretely divergence-free subspace:
//! leading eigenpairs, the lower bound μ, the semigroup and fractional powers.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fem::{DofSpace, RobinField};
use crate::linalg::{axpy, dot, symmetric_eigen, CsrMatrix};
use crate::stationary::{SaddleSolver, StokesMatrices};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub count: usize,
    /// Bound on λ·‖T x − x/λ‖_M for every returned pair.
    pub tol: f64,
    pub block: usize,
    pub max_basis: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { count: 30, tol: 1e-9, block: 4, max_basis: 0, seed: 0x5eed }
    }
}

#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Velocity coefficient vectors, mass-orthonormal.
    pub eigenfields: Vec<Vec<f64>>,
    /// Pressure multipliers ψ with A φ − Bᵀψ = λ M φ.
    pub eigenpressures: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub mu: f64,
    pub orthonormality_error: f64,
    pub rayleigh_error: f64,
    pub mass: CsrMatrix,
    pub a_q: CsrMatrix,
}

/// Shift-invert operator T y = x where [A, −Bᵀ; −B, 0][x; π] = [M y; 0].
struct ShiftInvert<'a> {
    solver: SaddleSolver,
    mats: &'a StokesMatrices,
}

impl ShiftInvert<'_> {
    fn apply(&self, ys: &[Vec<f64>]) -> Vec<(Vec<f64>, Vec<f64>)> {
        let loads: Vec<Vec<f64>> = ys.iter().map(|y| self.mats.mass.mul_vec(y)).collect();
        self.solver.solve_many(&loads)
    }
}

fn m_dot(m: &CsrMatrix, a: &[f64], b: &[f64]) -> f64 {
    dot(a, &m.mul_vec(b))
}

/// Smallest `opts.count` eigenpairs of (A_q, M) on the divergence-free subspace
/// by block Krylov iteration with the shift-invert operator and Rayleigh–Ritz.
pub fn smallest_eigenpairs(mats: &StokesMatrices, opts: &EigenOptions) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>)> {
    let n = mats.n_velocity();
    let n_free = n.saturating_sub(mats.n_pressure());
    let l = opts.count;
    if l == 0 || l > n_free {
        return Err(Error::Input(format!("eigen count {l} outside 1..={n_free}")));
    }
    let b = opts.block.max(1);
    let max_basis = if opts.max_basis == 0 { (6 * l + 120).min(n_free) } else { opts.max_basis.min(n_free) };
    let op = ShiftInvert { solver: SaddleSolver::new(mats, 0.0)?, mats };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<Vec<f64>> = (0..b).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    let mut block: Vec<Vec<f64>> = op.apply(&start).into_iter().map(|(x, _)| x).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut m_basis: Vec<Vec<f64>> = Vec::new();
    let mut worst = f64::INFINITY;
    loop {
        for mut w in block.drain(..) {
            let w0 = m_dot(&mats.mass, &w, &w).sqrt();
            for _ in 0..2 {
                for (v, mv) in basis.iter().zip(&m_basis) {
                    let c = dot(mv, &w);
                    axpy(&mut w, -c, v);
                }
            }
            let mw = mats.mass.mul_vec(&w);
            let nw = dot(&w, &mw).sqrt();
            if nw > 1e-10 * w0 && basis.len() < max_basis {
                basis.push(w.iter().map(|x| x / nw).collect());
                m_basis.push(mw.iter().map(|x| x / nw).collect());
            }
        }
        let k = basis.len();
        let last = k >= max_basis;
        if k >= l + b || last {
            let av: Vec<Vec<f64>> = basis.iter().map(|v| mats.a_q.mul_vec(v)).collect();
            let h = Mat::<f64>::from_fn(k, k, |i, j| 0.5 * (dot(&basis[i], &av[j]) + dot(&basis[j], &av[i])));
            let (theta, y) = symmetric_eigen(&h)?;
            let ritz: Vec<Vec<f64>> = (0..l)
                .map(|c| {
                    let mut x = vec![0.0; n];
                    for (i, v) in basis.iter().enumerate() {
                        axpy(&mut x, y[(i, c)], v);
                    }
                    x
                })
                .collect();
            let tx = op.apply(&ritz);
            let mut res = Vec::with_capacity(l);
            for c in 0..l {
                let r: Vec<f64> = tx[c].0.iter().zip(&ritz[c]).map(|(t, x)| t - x / theta[c]).collect();
                res.push(m_dot(&mats.mass, &r, &r).sqrt() * theta[c]);
            }
            worst = res.iter().copied().fold(0.0, f64::max);
            log::debug!("eigen basis {k}: worst residual {worst:e}");
            if worst <= opts.tol {
                let pressures = tx.iter().zip(&theta).map(|((_, pi), th)| pi.iter().map(|v| v * th).collect()).collect();
                return Ok((theta[..l].to_vec(), ritz, pressures, res));
            }
            if last {
                return Err(Error::EigenNotConverged { residual: worst, basis: k });
            }
        }
        let tail: Vec<Vec<f64>> = basis[basis.len().saturating_sub(b)..].to_vec();
        if tail.is_empty() {
            return Err(Error::EigenNotConverged { residual: worst, basis: basis.len() });
        }
        block = op.apply(&tail).into_iter().map(|(x, _)| x).collect();
    }
}

pub fn build_eigensystem(space: &DofSpace, q: &RobinField, count: usize) -> Result<EigenSystem> {
    let mats = StokesMatrices::new(space, q)?;
    build_eigensystem_with(space, &mats, q, &EigenOptions { count, ..EigenOptions::default() })
}

pub fn build_eigensystem_with(space: &DofSpace, mats: &StokesMatrices, q: &RobinField, opts: &EigenOptions) -> Result<EigenSystem> {
    q.validate()?;
    let (vals, vecs, pressures, residuals) = smallest_eigenpairs(mats, opts)?;
    let mu = if q.is_constant() && q.values[0] == q.alpha {
        vals[0]
    } else {
        let alpha_mats = mats.with_robin(space, &q.with_constant(q.alpha))?;
        smallest_eigenpairs(&alpha_mats, &EigenOptions { count: 1, ..opts.clone() })?.0[0]
    };
    let mut es = EigenSystem {
        eigenvalues: vals,
        eigenfields: vecs,
        eigenpressures: pressures,
        residuals,
        mu,
        orthonormality_error: 0.0,
        rayleigh_error: 0.0,
        mass: mats.mass.clone(),
        a_q: mats.a_q.clone(),
    };
    let (o, r) = es.deviations();
    es.orthonormality_error = o;
    es.rayleigh_error = r;
    Ok(es)
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// max |(φi, φj) − δij| and max |a_q(φi, φj) − λi δij| / λi.
    pub fn deviations(&self) -> (f64, f64) {
        let mphi: Vec<Vec<f64>> = self.eigenfields.iter().map(|p| self.mass.mul_vec(p)).collect();
        let aphi: Vec<Vec<f64>> = self.eigenfields.iter().map(|p| self.a_q.mul_vec(p)).collect();
        let (mut o, mut r) = (0.0f64, 0.0f64);
        for i in 0..self.len() {
            for j in 0..self.len() {
                let d = if i == j { 1.0 } else { 0.0 };
                o = o.max((dot(&self.eigenfields[i], &mphi[j]) - d).abs());
                r = r.max((dot(&self.eigenfields[i], &aphi[j]) - d * self.eigenvalues[i]).abs() / self.eigenvalues[i]);
            }
        }
        (o, r)
    }

    /// Mass inner products (φ_l, f).
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        let mf = self.mass.mul_vec(f);
        self.eigenfields.iter().map(|p| dot(p, &mf)).collect()
    }

    pub fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mass.nrows];
        for (c, p) in coeffs.iter().zip(&self.eigenfields) {
            axpy(&mut out, *c, p);
        }
        out
    }

    /// ‖f − P f‖_M / ‖f‖_M with P the projection onto the computed span.
    pub fn projection_residual(&self, f: &[f64]) -> f64 {
        let nf = m_dot(&self.mass, f, f).sqrt();
        if nf == 0.0 {
            return 0.0;
        }
        let pf = self.combine(&self.coefficients(f));
        let r: Vec<f64> = f.iter().zip(&pf).map(|(a, b)| a - b).collect();
        m_dot(&self.mass, &r, &r).sqrt() / nf
    }

    pub fn mass_norm(&self, f: &[f64]) -> f64 {
        m_dot(&self.mass, f, f).sqrt()
    }

    pub fn pressure_combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.eigenpressures.first().map_or(0, |p| p.len())];
        for (c, p) in coeffs.iter().zip(&self.eigenpressures) {
            axpy(&mut out, *c, p);
        }
        out
    }
}

/// e^{−tA} f = Σ e^{−tλ_l}(φ_l, f)φ_l.
pub fn semigroup_apply(es: &EigenSystem, f: &[f64], t: f64) -> Vec<f64> {
    let c: Vec<f64> = es.coefficients(f).iter().zip(&es.eigenvalues).map(|(c, l)| c * (-t * l).exp()).collect();
    es.combine(&c)
}

/// Σ λ_l^η e^{−tλ_l}(φ_l, f)φ_l.
pub fn fractional_power_apply(es: &EigenSystem, f: &[f64], t: f64, eta: f64) -> Result<Vec<f64>> {
    if eta < 0.0 {
        return Err(Error::Input(format!("eta must be nonnegative, got {eta}")));
    }
    if eta > 0.0 && t <= 0.0 {
        return Err(Error::ZeroTime);
    }
    let c: Vec<f64> = es.coefficients(f).iter().zip(&es.eigenvalues).map(|(c, l)| c * l.powf(eta) * (-t * l).exp()).collect();
    Ok(es.combine(&c))
}

/// Operator norm of A^η e^{−tA} on the computed span.
pub fn fractional_operator_norm(es: &EigenSystem, t: f64, eta: f64) -> f64 {
    es.eigenvalues.iter().map(|l| l.powf(eta) * (-t * l).exp()).fold(0.0, f64::max)
}

/// (η/(eδt))^η · e^{−(1−δ)μt}, an upper bound for the operator norm when every λ ≥ μ.
pub fn fractional_envelope(mu: f64, t: f64, eta: f64, delta: f64) -> f64 {
    let pre = if eta == 0.0 { 1.0 } else { (eta / (std::f64::consts::E * delta * t)).powf(eta) };
    pre * (-(1.0 - delta) * mu * t).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryReport {
    /// |a_q(φ,φ) − ‖A^{1/2}φ‖²| / λ per mode.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
}

pub fn isometry_check(es: &EigenSystem) -> IsometryReport {
    let deviations: Vec<f64> = es
        .eigenfields
        .iter()
        .zip(&es.eigenvalues)
        .map(|(p, l)| {
            let a = es.a_q.form(p, p);
            let half = l.sqrt();
            let m = half * half * m_dot(&es.mass, p, p);
            (a - m).abs() / l
        })
        .collect();
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    IsometryReport { deviations, max_deviation }
}
