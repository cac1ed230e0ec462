//! Fits of reconstruction error against data size B to err = C/(ln(C1/B))^β.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LogLawFit {
    /// Least-squares constant for the fitted C1.
    pub c_ls: f64,
    /// Smallest C making the curve an upper bound of every used record.
    pub c_envelope: f64,
    pub c1: f64,
    /// Root-mean-square residual of the least-squares fit.
    pub residual: f64,
    pub used: Vec<usize>,
    pub excluded: Vec<usize>,
}

impl LogLawFit {
    pub fn bound(&self, b: f64) -> f64 {
        self.c_envelope / (self.c1 / b).ln().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeExponentFit {
    pub c: f64,
    pub c1: f64,
    pub exponent: f64,
    pub residual: f64,
}

fn usable(points: &[(f64, f64)]) -> Vec<usize> {
    (0..points.len()).filter(|&i| points[i].0 > 0.0 && points[i].1 > 0.0 && points[i].0.is_finite()).collect()
}

/// Candidate ratios C1/max B, log-spaced, followed by golden-section refinement of `objective`.
fn minimize_over_c1(max_b: f64, objective: impl Fn(f64) -> f64) -> f64 {
    let grid: Vec<f64> = (0..=400).map(|i| (1e-3f64.ln() + (200f64.ln() - 1e-3f64.ln()) * i as f64 / 400.0).exp()).collect();
    let values: Vec<f64> = grid.iter().map(|t| objective(max_b * t.exp())).collect();
    let best = (0..grid.len()).min_by(|a, b| values[*a].total_cmp(&values[*b])).unwrap();
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)].ln(), grid[(best + 1).min(grid.len() - 1)].ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |lt: f64| objective(max_b * lt.exp().exp());
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    max_b * (0.5 * (lo + hi)).exp().exp()
}

/// Fixed exponent 1/2: C1 by least squares (profiled over C), then the envelope constant.
pub fn fit_log_law(points: &[(f64, f64)]) -> Result<LogLawFit> {
    let used = usable(points);
    if used.len() < 2 {
        return Err(Error::Fit(format!("need at least two records with B > 0, got {}", used.len())));
    }
    let max_b = used.iter().map(|&i| points[i].0).fold(0.0, f64::max);
    let ls = |c1: f64| {
        let x: Vec<f64> = used.iter().map(|&i| 1.0 / (c1 / points[i].0).ln().sqrt()).collect();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxe: f64 = x.iter().zip(&used).map(|(v, &i)| v * points[i].1).sum();
        let c = sxe / sxx;
        let r: f64 = x.iter().zip(&used).map(|(v, &i)| (points[i].1 - c * v).powi(2)).sum();
        (c, r)
    };
    let c1 = minimize_over_c1(max_b, |c1| ls(c1).1);
    fit_log_law_with_c1(points, c1).map(|mut f| {
        f.c_ls = ls(c1).0;
        f.residual = (ls(c1).1 / used.len() as f64).sqrt();
        f
    })
}

/// Fixed exponent 1/2 with C1 given; records with B ≥ C1 are excluded.
pub fn fit_log_law_with_c1(points: &[(f64, f64)], c1: f64) -> Result<LogLawFit> {
    let candidates = usable(points);
    let (used, excluded): (Vec<usize>, Vec<usize>) = candidates.into_iter().partition(|&i| points[i].0 < c1);
    if used.len() < 2 {
        return Err(Error::Fit(format!("only {} records below C1 = {c1:e}", used.len())));
    }
    let x: Vec<f64> = used.iter().map(|&i| 1.0 / (c1 / points[i].0).ln().sqrt()).collect();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let c_ls = x.iter().zip(&used).map(|(v, &i)| v * points[i].1).sum::<f64>() / sxx;
    let residual = (x.iter().zip(&used).map(|(v, &i)| (points[i].1 - c_ls * v).powi(2)).sum::<f64>() / used.len() as f64).sqrt();
    let c_envelope = x.iter().zip(&used).map(|(v, &i)| points[i].1 / v).fold(0.0, f64::max);
    Ok(LogLawFit { c_ls, c_envelope, c1, residual, used, excluded })
}

fn free_exponent_ls(points: &[(f64, f64)], used: &[usize], c1: f64) -> (f64, f64, f64) {
    let z: Vec<f64> = used.iter().map(|&i| (c1 / points[i].0).ln().ln()).collect();
    let y: Vec<f64> = used.iter().map(|&i| points[i].1.ln()).collect();
    let n = z.len() as f64;
    let (mz, my) = (z.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let szz: f64 = z.iter().map(|v| (v - mz).powi(2)).sum();
    let szy: f64 = z.iter().zip(&y).map(|(a, b)| (a - mz) * (b - my)).sum();
    let slope = szy / szz;
    let icpt = my - slope * mz;
    let r: f64 = z.iter().zip(&y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    (icpt.exp(), -slope, (r / n).sqrt())
}

/// ln err = ln C − β ln ln(C1/B) with C1 given, least squares in (ln C, β).
pub fn fit_free_exponent_with_c1(points: &[(f64, f64)], c1: f64) -> Result<FreeExponentFit> {
    let used: Vec<usize> = usable(points).into_iter().filter(|&i| points[i].0 < c1).collect();
    if used.len() < 3 {
        return Err(Error::Fit(format!("need at least three records with 0 < B < C1, got {}", used.len())));
    }
    let (c, exponent, residual) = free_exponent_ls(points, &used, c1);
    Ok(FreeExponentFit { c, c1, exponent, residual })
}

/// ln err = ln C − β ln ln(C1/B), least squares in (ln C, β) for each C1.
pub fn fit_free_exponent(points: &[(f64, f64)]) -> Result<FreeExponentFit> {
    let used = usable(points);
    if used.len() < 3 {
        return Err(Error::Fit(format!("need at least three records with B > 0, got {}", used.len())));
    }
    let max_b = used.iter().map(|&i| points[i].0).fold(0.0, f64::max);
    let ls = |c1: f64| {
        let z: Vec<f64> = used.iter().map(|&i| (c1 / points[i].0).ln().ln()).collect();
        let y: Vec<f64> = used.iter().map(|&i| points[i].1.ln()).collect();
        let n = z.len() as f64;
        let (mz, my) = (z.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let szz: f64 = z.iter().map(|v| (v - mz).powi(2)).sum();
        let szy: f64 = z.iter().zip(&y).map(|(a, b)| (a - mz) * (b - my)).sum();
        let slope = szy / szz;
        let icpt = my - slope * mz;
        let r: f64 = z.iter().zip(&y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
        (icpt.exp(), -slope, (r / n).sqrt())
    };
    let c1 = minimize_over_c1(max_b, |c1| ls(c1).2);
    let (c, exponent, residual) = ls(c1);
    Ok(FreeExponentFit { c, c1, exponent, residual })
}
