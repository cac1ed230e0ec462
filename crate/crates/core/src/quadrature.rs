//! Quadrature rules on the reference triangle and on segments.

/// Quadrature rule on the reference triangle with vertices (0,0), (1,0), (0,1).
/// Points are barycentric triples; weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule on [0, 1]; weights sum to 1.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Seven-point Radon rule, exact for polynomials of degree 5.
pub fn triangle_degree5() -> TriangleRule {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let w0 = 9.0 / 80.0;
    let w1 = (155.0 - s15) / 2400.0;
    let w2 = (155.0 + s15) / 2400.0;
    let mut points = vec![[1.0 / 3.0; 3]];
    let mut weights = vec![w0];
    for (a, w) in [(a1, w1), (a2, w2)] {
        let b = 1.0 - 2.0 * a;
        points.push([b, a, a]);
        points.push([a, b, a]);
        points.push([a, a, b]);
        weights.extend([w; 3]);
    }
    TriangleRule { points, weights, degree: 5 }
}

/// Three-point Gauss–Legendre rule on [0, 1], exact for degree 5.
pub fn line_degree5() -> LineRule {
    let r = gauss_legendre(3);
    LineRule { points: r.0.iter().map(|x| 0.5 * (x + 1.0)).collect(), weights: r.1.iter().map(|w| 0.5 * w).collect(), degree: 5 }
}

/// P_n(z) and P_n'(z) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Gauss–Legendre nodes and weights on [-1, 1] via Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let dp = legendre(n, z).1;
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    (x.iter().map(|t| a + h * (t + 1.0)).collect(), w.iter().map(|v| v * h).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn triangle_rule_integrates_monomials_to_degree_5() {
        let r = triangle_degree5();
        for i in 0..=5u32 {
            for j in 0..=(5 - i) {
                let exact = factorial(i) * factorial(j) / factorial(i + j + 2);
                let got: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[1].powi(i as i32) * p[2].powi(j as i32)).sum();
                assert!((got - exact).abs() < 1e-15, "x^{i} y^{j}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn gauss_legendre_exact_for_degree_2n_minus_1() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((got - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn line_rule_weights_sum_to_one() {
        let r = line_degree5();
        let s: f64 = r.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-15, "sum {s:e}");
        let i4: f64 = r.points.iter().zip(&r.weights).map(|(x, w)| w * x.powi(4)).sum();
        assert!((i4 - 0.2).abs() < 1e-15, "i4 {:e}", i4 - 0.2);
    }
}
