//! Closed-form test fields with exact derivatives up to order three.

use num_complex::Complex64;

/// Value and partial derivatives of a scalar function at a point.
/// `t` holds the third derivatives xxx, xxy, xyy, yyy.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
    pub t: [f64; 4],
}

impl Jet {
    pub fn laplacian(&self) -> f64 {
        self.h[0][0] + self.h[1][1]
    }

    /// Gradient of the Laplacian.
    pub fn grad_laplacian(&self) -> [f64; 2] {
        [self.t[0] + self.t[2], self.t[1] + self.t[3]]
    }

    fn scaled(self, c: f64) -> Jet {
        Jet { v: c * self.v, d: self.d.map(|x| c * x), h: self.h.map(|r| r.map(|x| c * x)), t: self.t.map(|x| c * x) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trig {
    Sin,
    Cos,
}

impl Trig {
    /// f, f', f'', f''' of x ↦ trig(k x).
    fn derivatives(self, k: f64, x: f64) -> [f64; 4] {
        let (s, c) = (k * x).sin_cos();
        match self {
            Trig::Sin => [s, k * c, -k * k * s, -k * k * k * c],
            Trig::Cos => [c, -k * s, -k * k * c, k * k * k * s],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Constant(f64),
    /// a + b x + c y
    Linear { a: f64, b: f64, c: f64 },
    /// Re(c / z), harmonic away from the origin. c = 1 gives x/r², c = i gives y/r².
    InverseZ { c: Complex64 },
    /// amp · fx(kx·x) · fy(ky·y)
    TrigProduct { amp: f64, kx: f64, ky: f64, fx: Trig, fy: Trig },
    Sum(Vec<ScalarField>),
}

impl ScalarField {
    pub fn x_over_r2() -> Self {
        ScalarField::InverseZ { c: Complex64::new(1.0, 0.0) }
    }

    pub fn y_over_r2() -> Self {
        ScalarField::InverseZ { c: Complex64::new(0.0, 1.0) }
    }

    pub fn zero() -> Self {
        ScalarField::Constant(0.0)
    }

    pub fn jet(&self, x: [f64; 2]) -> Jet {
        match self {
            ScalarField::Constant(a) => Jet { v: *a, ..Jet::default() },
            ScalarField::Linear { a, b, c } => Jet { v: a + b * x[0] + c * x[1], d: [*b, *c], ..Jet::default() },
            ScalarField::InverseZ { c } => {
                let z = Complex64::new(x[0], x[1]);
                // ∂x^a ∂y^b Re(c F) = Re(c i^b F^(a+b)), F^(n) = (-1)^n n! / z^(n+1)
                let deriv = |n: i32| -> Complex64 {
                    let fact = [1.0, 1.0, 2.0, 6.0][n as usize];
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    c * sign * fact / z.powi(n + 1)
                };
                let i = Complex64::new(0.0, 1.0);
                let part = |a: i32, b: i32| (deriv(a + b) * i.powi(b)).re;
                Jet {
                    v: part(0, 0),
                    d: [part(1, 0), part(0, 1)],
                    h: [[part(2, 0), part(1, 1)], [part(1, 1), part(0, 2)]],
                    t: [part(3, 0), part(2, 1), part(1, 2), part(0, 3)],
                }
            }
            ScalarField::TrigProduct { amp, kx, ky, fx, fy } => {
                let f = fx.derivatives(*kx, x[0]);
                let g = fy.derivatives(*ky, x[1]);
                Jet {
                    v: f[0] * g[0],
                    d: [f[1] * g[0], f[0] * g[1]],
                    h: [[f[2] * g[0], f[1] * g[1]], [f[1] * g[1], f[0] * g[2]]],
                    t: [f[3] * g[0], f[2] * g[1], f[1] * g[2], f[0] * g[3]],
                }
                .scaled(*amp)
            }
            ScalarField::Sum(parts) => parts.iter().map(|p| p.jet(x)).fold(Jet::default(), |a, b| Jet {
                v: a.v + b.v,
                d: [a.d[0] + b.d[0], a.d[1] + b.d[1]],
                h: [[a.h[0][0] + b.h[0][0], a.h[0][1] + b.h[0][1]], [a.h[1][0] + b.h[1][0], a.h[1][1] + b.h[1][1]]],
                t: [a.t[0] + b.t[0], a.t[1] + b.t[1], a.t[2] + b.t[2], a.t[3] + b.t[3]],
            }),
        }
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        match self {
            ScalarField::Constant(a) => ScalarField::Constant(c * a),
            ScalarField::Linear { a, b, c: cy } => ScalarField::Linear { a: c * a, b: c * b, c: c * cy },
            ScalarField::InverseZ { c: k } => ScalarField::InverseZ { c: k * c },
            ScalarField::TrigProduct { amp, kx, ky, fx, fy } => ScalarField::TrigProduct { amp: c * amp, kx: *kx, ky: *ky, fx: *fx, fy: *fy },
            ScalarField::Sum(p) => ScalarField::Sum(p.iter().map(|s| s.scaled(c)).collect()),
        }
    }
}

/// Two-component closed-form field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub name: String,
    pub comps: [ScalarField; 2],
}

impl VectorField {
    pub fn new(name: &str, a: ScalarField, b: ScalarField) -> Self {
        VectorField { name: name.to_string(), comps: [a, b] }
    }

    pub fn jets(&self, x: [f64; 2]) -> [Jet; 2] {
        [self.comps[0].jet(x), self.comps[1].jet(x)]
    }

    pub fn value(&self, x: [f64; 2]) -> [f64; 2] {
        let j = self.jets(x);
        [j[0].v, j[1].v]
    }

    /// Value and gradient with `grad[i][j] = ∂_j u_i`.
    pub fn value_grad(&self, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let j = self.jets(x);
        ([j[0].v, j[1].v], [j[0].d, j[1].d])
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        VectorField { name: self.name.clone(), comps: [self.comps[0].scaled(c), self.comps[1].scaled(c)] }
    }

    pub fn zero() -> Self {
        VectorField::new("zero", ScalarField::zero(), ScalarField::zero())
    }

    pub fn constant(a: f64, b: f64) -> Self {
        VectorField::new("constant", ScalarField::Constant(a), ScalarField::Constant(b))
    }

    /// (−y, x)
    pub fn rigid_rotation() -> Self {
        VectorField::new("rigid_rotation", ScalarField::Linear { a: 0.0, b: 0.0, c: -1.0 }, ScalarField::Linear { a: 0.0, b: 1.0, c: 0.0 })
    }

    /// (x/r², y/r²): divergence-free, curl-free source flow.
    pub fn radial_source() -> Self {
        VectorField::new("radial_source", ScalarField::x_over_r2(), ScalarField::y_over_r2())
    }

    /// curl of amp·sin(kx)sin(ky) = amp·k(sin kx cos ky, −cos kx sin ky).
    pub fn trig_curl(k: f64, amp: f64) -> Self {
        VectorField::new(
            "trig_curl",
            ScalarField::TrigProduct { amp: amp * k, kx: k, ky: k, fx: Trig::Sin, fy: Trig::Cos },
            ScalarField::TrigProduct { amp: -amp * k, kx: k, ky: k, fx: Trig::Cos, fy: Trig::Sin },
        )
    }
}

/// Tangential derivative of |∇u|² = Σ_ij (∂_j u_i)² along τ.
pub fn tangential_derivative_grad_sq(jets: &[Jet], tau: [f64; 2]) -> f64 {
    jets.iter()
        .map(|j| {
            let ht = [j.h[0][0] * tau[0] + j.h[0][1] * tau[1], j.h[1][0] * tau[0] + j.h[1][1] * tau[1]];
            2.0 * (j.d[0] * ht[0] + j.d[1] * ht[1])
        })
        .sum()
}

/// Manufactured Stokes pair u = curl(sin πx sin πy), p = cos πx cos πy with
/// body force f = −Δu + ∇p.
#[derive(Debug, Clone)]
pub struct ManufacturedStokes {
    pub u: VectorField,
    pub p: ScalarField,
}

impl Default for ManufacturedStokes {
    fn default() -> Self {
        let pi = std::f64::consts::PI;
        ManufacturedStokes {
            u: VectorField::trig_curl(pi, 1.0),
            p: ScalarField::TrigProduct { amp: 1.0, kx: pi, ky: pi, fx: Trig::Cos, fy: Trig::Cos },
        }
    }
}

impl ManufacturedStokes {
    pub fn force(&self, x: [f64; 2]) -> [f64; 2] {
        let j = self.u.jets(x);
        let pj = self.p.jet(x);
        [-j[0].laplacian() + pj.d[0], -j[1].laplacian() + pj.d[1]]
    }

    /// ∂u/∂n − p n with the given normal.
    pub fn traction(&self, x: [f64; 2], n: [f64; 2]) -> [f64; 2] {
        let j = self.u.jets(x);
        let p = self.p.jet(x).v;
        [j[0].d[0] * n[0] + j[0].d[1] * n[1] - p * n[0], j[1].d[0] * n[0] + j[1].d[1] * n[1] - p * n[1]]
    }

    /// Right-hand side of the Robin condition ∂u/∂n − pn + qu for constant q.
    pub fn robin_rhs(&self, x: [f64; 2], n: [f64; 2], q: f64) -> [f64; 2] {
        let t = self.traction(x, n);
        let u = self.u.value(x);
        [t[0] + q * u[0], t[1] + q * u[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd_check(f: &ScalarField, x: [f64; 2]) {
        let e = 1e-5;
        let j = f.jet(x);
        let jx = (f.jet([x[0] + e, x[1]]), f.jet([x[0] - e, x[1]]));
        let jy = (f.jet([x[0], x[1] + e]), f.jet([x[0], x[1] - e]));
        let c = |a: f64, b: f64| (a - b) / (2.0 * e);
        let scale = 1.0 + j.v.abs() + j.d[0].abs() + j.d[1].abs() + j.h[0][0].abs() + j.h[1][1].abs() + j.t.iter().map(|v| v.abs()).sum::<f64>();
        let tol = 1e-6 * scale;
        assert!((j.d[0] - c(jx.0.v, jx.1.v)).abs() < tol);
        assert!((j.d[1] - c(jy.0.v, jy.1.v)).abs() < tol);
        assert!((j.h[0][0] - c(jx.0.d[0], jx.1.d[0])).abs() < tol);
        assert!((j.h[0][1] - c(jy.0.d[0], jy.1.d[0])).abs() < tol);
        assert!((j.h[1][1] - c(jy.0.d[1], jy.1.d[1])).abs() < tol);
        assert!((j.t[0] - c(jx.0.h[0][0], jx.1.h[0][0])).abs() < tol);
        assert!((j.t[1] - c(jy.0.h[0][0], jy.1.h[0][0])).abs() < tol);
        assert!((j.t[2] - c(jy.0.h[0][1], jy.1.h[0][1])).abs() < tol);
        assert!((j.t[3] - c(jy.0.h[1][1], jy.1.h[1][1])).abs() < tol);
    }

    proptest! {
        #[test]
        fn derivatives_agree_with_finite_differences(r in 0.5f64..1.0, th in 0.0f64..6.28) {
            let x = [r * th.cos(), r * th.sin()];
            for f in [
                ScalarField::x_over_r2(),
                ScalarField::y_over_r2(),
                ScalarField::Linear { a: 1.0, b: -2.0, c: 0.5 },
                ScalarField::TrigProduct { amp: 1.3, kx: 3.1, ky: 2.0, fx: Trig::Sin, fy: Trig::Cos },
                ScalarField::TrigProduct { amp: 0.7, kx: 1.0, ky: 4.0, fx: Trig::Cos, fy: Trig::Sin },
            ] {
                fd_check(&f, x);
            }
        }
    }

    #[test]
    fn inverse_z_fields_are_harmonic() {
        for x in [[0.6, 0.1], [-0.3, 0.7]] {
            assert!(ScalarField::x_over_r2().jet(x).laplacian().abs() < 1e-12);
            assert!(ScalarField::y_over_r2().jet(x).laplacian().abs() < 1e-12);
            let v = ScalarField::x_over_r2().jet(x).v;
            assert!((v - x[0] / (x[0] * x[0] + x[1] * x[1])).abs() < 1e-15);
        }
    }

    #[test]
    fn manufactured_velocity_is_divergence_free() {
        let m = ManufacturedStokes::default();
        for x in [[0.6, 0.1], [-0.3, 0.7], [0.2, -0.9]] {
            let j = m.u.jets(x);
            assert!((j[0].d[0] + j[1].d[1]).abs() < 1e-12);
        }
    }
}
