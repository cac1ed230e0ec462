//! Carleman weights Ψ = Ψ1 + sΨ0 on the annulus, the two sides of the weighted
//! inequality on analytic fields, trace quantities and the optimized bound.

use std::f64::consts::PI;

use crate::analytic::{tangential_derivative_grad_sq, Jet, ScalarField, VectorField};
use crate::fem::eval::{integrate, scalar_at, velocity_at, velocity_hessian, pressure_at};
use crate::fem::scalar::{dirichlet_solve, ScalarFn};
use crate::fem::{DiscreteField, DofSpace};
use crate::mesh::BoundaryTag;
use crate::quadrature::gauss_on;
use crate::stationary::boundary_traces;
use crate::{Error, Result};

/// Fourier modes of χ kept by the analytic weight.
const CHI_MODES: usize = 32;

/// Harmonic Ψ0 and radial Ψ1 on the exact annulus.
#[derive(Debug, Clone)]
pub struct AnalyticWeight {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub lambda: f64,
    pub s: f64,
    a0: f64,
    modes: Vec<(f64, f64, f64)>,
    psi1_a: f64,
    psi1_b: f64,
}

impl AnalyticWeight {
    pub fn new(inner_radius: f64, outer_radius: f64, lambda: f64, s: f64, chi: ScalarFn) -> Self {
        let (r0, r1) = (inner_radius, outer_radius);
        let n = 4 * CHI_MODES;
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n as f64;
                chi([r1 * th.cos(), r1 * th.sin()])
            })
            .collect();
        let a0 = samples.iter().sum::<f64>() / n as f64;
        let mut modes = Vec::new();
        for k in 1..=CHI_MODES {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, v) in samples.iter().enumerate() {
                let th = 2.0 * PI * (k * j) as f64 / n as f64;
                a += v * th.cos();
                b += v * th.sin();
            }
            let (a, b) = (2.0 * a / n as f64, 2.0 * b / n as f64);
            if a.abs() + b.abs() > 1e-14 * (1.0 + a0.abs()) {
                modes.push((k as f64, a, b));
            }
        }
        let psi1_a = (r1 * r1 - r0 * r0) / (r1 / r0).ln();
        let psi1_b = r0 * r0 - psi1_a * r0.ln();
        AnalyticWeight { inner_radius, outer_radius, lambda, s, a0, modes, psi1_a, psi1_b }
    }

    fn radial_mode(&self, k: f64, r: f64) -> (f64, f64) {
        let (r0, r1) = (self.inner_radius, self.outer_radius);
        let c = r1.powf(k) - r0.powf(2.0 * k) * r1.powf(-k);
        let f = (r.powf(k) - r0.powf(2.0 * k) * r.powf(-k)) / c;
        let df = k * (r.powf(k - 1.0) + r0.powf(2.0 * k) * r.powf(-k - 1.0)) / c;
        (f, df)
    }

    /// Ψ0 and its gradient.
    pub fn psi0(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let r = x[0].hypot(x[1]);
        let th = x[1].atan2(x[0]);
        let ln = (self.outer_radius / self.inner_radius).ln();
        let mut v = self.a0 * (r / self.inner_radius).ln() / ln;
        let mut dr = self.a0 / (r * ln);
        let mut dth = 0.0;
        for &(k, a, b) in &self.modes {
            let (f, df) = self.radial_mode(k, r);
            let (c, s) = ((k * th).cos(), (k * th).sin());
            v += f * (a * c + b * s);
            dr += df * (a * c + b * s);
            dth += f * k * (-a * s + b * c);
        }
        (v, polar_gradient(x, r, dr, dth))
    }

    /// Ψ1 with ΔΨ1 = λ and zero traces.
    pub fn psi1(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let r = x[0].hypot(x[1]);
        let c = self.lambda / 4.0;
        let v = c * (r * r - self.psi1_a * r.ln() - self.psi1_b);
        let dr = c * (2.0 * r - self.psi1_a / r);
        (v, polar_gradient(x, r, dr, 0.0))
    }

    /// Ψ = Ψ1 + sΨ0 and its gradient.
    pub fn psi(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let (a, ga) = self.psi1(x);
        let (b, gb) = self.psi0(x);
        (a + self.s * b, [ga[0] + self.s * gb[0], ga[1] + self.s * gb[1]])
    }

    pub fn laplacian(&self) -> f64 {
        self.lambda
    }
}

fn polar_gradient(x: [f64; 2], r: f64, dr: f64, dth: f64) -> [f64; 2] {
    let (c, s) = (x[0] / r, x[1] / r);
    [dr * c - dth * s / r, dr * s + dth * c / r]
}

#[derive(Debug, Clone)]
pub struct CarlemanWeight {
    pub psi0: DiscreteField,
    pub psi1: DiscreteField,
    pub s: f64,
    pub lambda: f64,
    /// max of Ψ0 on Γe
    pub k: f64,
    /// min of |∂nΨ0| on Γ0
    pub theta: f64,
    pub analytic: AnalyticWeight,
}

impl CarlemanWeight {
    pub fn with_s(&self, s: f64) -> CarlemanWeight {
        let mut w = self.clone();
        w.s = s;
        w.analytic.s = s;
        w
    }
}

fn sign_violation(what: &'static str, x: [f64; 2], value: f64) -> Error {
    Error::SignViolation { what, x: x[0], y: x[1], value }
}

pub fn build_weights(space: &DofSpace, lambda: f64, s: f64, chi: ScalarFn) -> Result<CarlemanWeight> {
    if !(lambda >= 2.0) {
        return Err(Error::Input(format!("lambda must be at least 2, got {lambda}")));
    }
    if !(s > 0.0) {
        return Err(Error::Input(format!("s must be positive, got {s}")));
    }
    let mesh = &space.mesh;
    let chi_values: Vec<f64> = space.gamma_e_nodes.iter().map(|&i| chi(space.node_coords[i])).collect();
    if let Some((k, v)) = chi_values.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(sign_violation("chi >= 0 on the outer circle", space.node_coords[space.gamma_e_nodes[k]], *v));
    }
    if chi_values.iter().all(|v| *v == 0.0) {
        return Err(Error::Input("chi vanishes identically on the outer circle".into()));
    }
    let psi0 = dirichlet_solve(space, None, chi, &|_| 0.0)?;
    let psi1 = dirichlet_solve(space, Some(&|_| -lambda), &|_| 0.0, &|_| 0.0)?;

    for t in 0..mesh.triangles.len() {
        for l in &mesh.triangle_rule.points {
            let x = mesh.point(t, *l);
            let (v0, _) = scalar_at(space, &psi0.values, t, *l);
            if !(v0 > 0.0) {
                return Err(sign_violation("psi0 > 0 in the interior", x, v0));
            }
            let (v1, _) = scalar_at(space, &psi1.values, t, *l);
            if !(v1 < 0.0) {
                return Err(sign_violation("psi1 < 0 in the interior", x, v1));
            }
        }
    }
    let mut theta = f64::INFINITY;
    for tag in [BoundaryTag::GammaE, BoundaryTag::Gamma0] {
        for bp in mesh.boundary_quadrature(tag) {
            let be = &mesh.boundary_edges[bp.boundary_edge];
            let l = mesh.edge_barycentric(be, bp.s);
            let (_, g1) = scalar_at(space, &psi1.values, be.triangle, l);
            let d1 = g1[0] * bp.normal[0] + g1[1] * bp.normal[1];
            if !(d1 > 0.0) {
                return Err(sign_violation("normal derivative of psi1 > 0 on the boundary", bp.x, d1));
            }
            if tag == BoundaryTag::Gamma0 {
                let (_, g0) = scalar_at(space, &psi0.values, be.triangle, l);
                let d0 = g0[0] * bp.normal[0] + g0[1] * bp.normal[1];
                if !(d0 < 0.0) {
                    return Err(sign_violation("normal derivative of psi0 < 0 on the inner circle", bp.x, d0));
                }
                theta = theta.min(-d0);
            }
        }
    }
    let k = space.gamma_e_nodes.iter().map(|&i| psi0.values[i]).fold(f64::NEG_INFINITY, f64::max);
    let analytic = AnalyticWeight::new(mesh.inner_radius, mesh.outer_radius, lambda, s, chi);
    Ok(CarlemanWeight { psi0, psi1, s, lambda, k, theta, analytic })
}

/// Polar tensor quadrature on the exact annulus: composite Gauss in r, trapezoid in θ.
pub struct PolarQuadrature {
    pub radial: Vec<(f64, f64)>,
    pub angular: usize,
}

impl PolarQuadrature {
    pub fn new(r0: f64, r1: f64, panels: usize, order: usize, angular: usize) -> Self {
        let h = (r1 - r0) / panels as f64;
        let mut radial = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let (x, w) = gauss_on(order, r0 + p as f64 * h, r0 + (p + 1) as f64 * h);
            radial.extend(x.into_iter().zip(w));
        }
        PolarQuadrature { radial, angular }
    }

    pub fn for_weight(w: &AnalyticWeight) -> Self {
        PolarQuadrature::new(w.inner_radius, w.outer_radius, 8, 10, 512)
    }

    pub fn area<F: FnMut([f64; 2]) -> f64>(&self, mut f: F) -> f64 {
        let dth = 2.0 * PI / self.angular as f64;
        let mut sum = 0.0;
        for &(r, w) in &self.radial {
            for j in 0..self.angular {
                let th = j as f64 * dth;
                sum += w * r * dth * f([r * th.cos(), r * th.sin()]);
            }
        }
        sum
    }

    /// ∮ over the circle of radius r with outward unit normal of the annulus.
    pub fn circle<F: FnMut([f64; 2], [f64; 2]) -> f64>(&self, r: f64, outward: f64, mut f: F) -> f64 {
        let dth = 2.0 * PI / self.angular as f64;
        let mut sum = 0.0;
        for j in 0..self.angular {
            let th = j as f64 * dth;
            let (c, s) = (th.cos(), th.sin());
            sum += r * dth * f([r * c, r * s], [outward * c, outward * s]);
        }
        sum
    }
}

fn grad_sq(jets: &[Jet]) -> f64 {
    jets.iter().map(|j| j.d[0] * j.d[0] + j.d[1] * j.d[1]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl CarlemanSides {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self, rel: f64) -> bool {
        self.margin() >= -rel * (self.lhs.abs() + self.rhs.abs())
    }
}

/// lhs = ∫(ΔΨ|u|² + (ΔΨ−1)|∇u|²)e^Ψ,
/// rhs = ∫|Δu|²e^Ψ + ∮∂nΨ(|u|² + |∇u|² + 2|∂τ|∇u|²|)e^Ψ.
pub fn carleman_functionals(w: &AnalyticWeight, u: &VectorField) -> CarlemanSides {
    carleman_functionals_with(w, u, &PolarQuadrature::for_weight(w))
}

pub fn carleman_functionals_with(w: &AnalyticWeight, u: &VectorField, quad: &PolarQuadrature) -> CarlemanSides {
    let lap_psi = w.laplacian();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let dth = 2.0 * PI / quad.angular as f64;
    for &(r, wr) in &quad.radial {
        for j in 0..quad.angular {
            let th = j as f64 * dth;
            let x = [r * th.cos(), r * th.sin()];
            let (psi, _) = w.psi(x);
            let e = psi.exp() * wr * r * dth;
            let jets = u.jets(x);
            let u2 = jets[0].v * jets[0].v + jets[1].v * jets[1].v;
            let lap = jets[0].laplacian().powi(2) + jets[1].laplacian().powi(2);
            lhs += (lap_psi * u2 + (lap_psi - 1.0) * grad_sq(&jets)) * e;
            rhs += lap * e;
        }
    }
    for (r, outward) in [(w.outer_radius, 1.0), (w.inner_radius, -1.0)] {
        rhs += quad.circle(r, outward, |x, n| {
            let (psi, g) = w.psi(x);
            let dn = g[0] * n[0] + g[1] * n[1];
            let jets = u.jets(x);
            let tau = [-n[1], n[0]];
            let u2 = jets[0].v * jets[0].v + jets[1].v * jets[1].v;
            dn * (u2 + grad_sq(&jets) + 2.0 * tangential_derivative_grad_sq(&jets, tau).abs()) * psi.exp()
        });
    }
    CarlemanSides { lhs, rhs }
}

/// ∫|∇Ψ|² c² e^Ψ, the exact gap for the constant field c.
pub fn constant_field_gap(w: &AnalyticWeight, c: [f64; 2]) -> f64 {
    let c2 = c[0] * c[0] + c[1] * c[1];
    PolarQuadrature::for_weight(w).area(|x| {
        let (psi, g) = w.psi(x);
        (g[0] * g[0] + g[1] * g[1]) * c2 * psi.exp()
    })
}

/// Fields on which the inequality is exercised.
pub fn analytic_suite() -> Vec<VectorField> {
    vec![
        VectorField::constant(1.0, 0.0),
        VectorField::constant(0.6, -0.8),
        VectorField::rigid_rotation(),
        VectorField::radial_source(),
        VectorField::new("x_over_r2_first", ScalarField::x_over_r2(), ScalarField::zero()),
        VectorField::new("y_over_r2_second", ScalarField::zero(), ScalarField::y_over_r2()),
        VectorField::trig_curl(PI, 1.0),
        VectorField::trig_curl(2.0 * PI, 0.25),
        VectorField::new(
            "trig_product",
            ScalarField::TrigProduct { amp: 1.0, kx: 1.5, ky: 0.5, fx: crate::analytic::Trig::Sin, fy: crate::analytic::Trig::Cos },
            ScalarField::TrigProduct { amp: -0.5, kx: 0.5, ky: 2.0, fx: crate::analytic::Trig::Cos, fy: crate::analytic::Trig::Sin },
        ),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceQuantities {
    pub a: f64,
    pub b: f64,
    /// A was computed from piecewise-polynomial derivatives rather than exact ones.
    pub surrogate: bool,
}

fn jet_h3_sq(j: &Jet) -> f64 {
    j.v * j.v
        + j.d[0] * j.d[0]
        + j.d[1] * j.d[1]
        + j.h[0][0] * j.h[0][0]
        + j.h[0][1] * j.h[0][1]
        + j.h[1][1] * j.h[1][1]
        + j.t.iter().map(|t| t * t).sum::<f64>()
}

/// A = ‖u‖_{H³} + ‖p‖_{H³}, B = ‖u‖ + ‖p‖ + ‖∂nu‖ + ‖∂np‖ in L²(Γe), for exact fields.
pub fn trace_quantities(u: &VectorField, p: &ScalarField, r0: f64, r1: f64) -> TraceQuantities {
    let quad = PolarQuadrature::new(r0, r1, 8, 10, 512);
    let u_h3 = quad.area(|x| u.jets(x).iter().map(jet_h3_sq).sum()).sqrt();
    let p_h3 = quad.area(|x| jet_h3_sq(&p.jet(x))).sqrt();
    let mut parts = [0.0; 4];
    quad.circle(r1, 1.0, |x, n| {
        let jets = u.jets(x);
        let pj = p.jet(x);
        let dn = |j: &Jet| j.d[0] * n[0] + j.d[1] * n[1];
        parts[0] += jets[0].v.powi(2) + jets[1].v.powi(2);
        parts[1] += pj.v * pj.v;
        parts[2] += dn(&jets[0]).powi(2) + dn(&jets[1]).powi(2);
        parts[3] += dn(&pj).powi(2);
        0.0
    });
    let dl = 2.0 * PI * r1 / quad.angular as f64;
    let b = parts.iter().map(|s| (s * dl).sqrt()).sum();
    TraceQuantities { a: u_h3 + p_h3, b, surrogate: false }
}

/// Discrete counterpart: A from the broken H² norm of the P2 velocity and the
/// H¹ norm of the P1 pressure, flagged as a surrogate.
pub fn trace_quantities_discrete(space: &DofSpace, u: &[f64], p: &[f64]) -> TraceQuantities {
    let mut u_sq = integrate(space, |t, l, _| {
        let (v, g) = velocity_at(space, u, t, l);
        v[0] * v[0] + v[1] * v[1] + g.iter().flatten().map(|x| x * x).sum::<f64>()
    });
    for t in 0..space.mesh.triangles.len() {
        let hess = velocity_hessian(space, u, t);
        let area = space.mesh.triangle_area(t);
        let h: f64 = hess.iter().map(|hc| hc[0][0].powi(2) + hc[0][1].powi(2) + hc[1][1].powi(2)).sum();
        u_sq += area * h;
    }
    let p_sq = integrate(space, |t, l, _| {
        let (v, g) = pressure_at(space, p, t, l);
        v * v + g[0] * g[0] + g[1] * g[1]
    });
    let mut parts = [0.0; 4];
    for tp in boundary_traces(space, u, p, BoundaryTag::GammaE) {
        parts[0] += tp.weight * (tp.u[0].powi(2) + tp.u[1].powi(2));
        parts[1] += tp.weight * tp.p * tp.p;
        parts[2] += tp.weight * (tp.du_dn[0].powi(2) + tp.du_dn[1].powi(2));
        parts[3] += tp.weight * tp.dp_dn * tp.dp_dn;
    }
    let b = parts.iter().map(|s| s.sqrt()).sum();
    TraceQuantities { a: u_sq.sqrt() + p_sq.sqrt(), b, surrogate: true }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub s_opt: f64,
}

/// f(s) = e^{ks}√B + d̃√A/s.
pub fn bound_objective(a: f64, b: f64, k: f64, dtilde: f64, s: f64) -> f64 {
    (k * s).exp() * b.sqrt() + dtilde * a.sqrt() / s
}

/// min over s > 0 of f(s); the stationary point solves 2 ln s + ks = ln(d̃√A/(k√B)).
pub fn theoretical_bound(a: f64, b: f64, k: f64, dtilde: f64) -> Result<Bound> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Input(format!("A and B must be positive, got A={a}, B={b}")));
    }
    if !(k > 0.0) || !(dtilde >= 1.0) {
        return Err(Error::Input(format!("need k > 0 and dtilde >= 1, got k={k}, dtilde={dtilde}")));
    }
    let target = (dtilde * a.sqrt() / (k * b.sqrt())).ln();
    let g = |s: f64| 2.0 * s.ln() + k * s - target;
    let (mut lo, mut hi) = (1e-300f64, 1.0f64);
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    while g(lo) > 0.0 {
        lo *= 0.5;
    }
    // bisection in log s: g is increasing
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    let s = (lo * hi).sqrt();
    Ok(Bound { value: bound_objective(a, b, k, dtilde, s), s_opt: s })
}

/// Closed-form Ψ0 = ln(r/R0)/ln(R1/R0) and θ = 1/(R0 ln(R1/R0)) for χ ≡ 1.
pub fn radial_psi0(r0: f64, r1: f64) -> (impl Fn([f64; 2]) -> f64, f64) {
    let ln = (r1 / r0).ln();
    (move |x: [f64; 2]| (x[0].hypot(x[1]) / r0).ln() / ln, 1.0 / (r0 * ln))
}
