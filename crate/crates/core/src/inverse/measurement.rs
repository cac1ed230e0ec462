use rand::Rng;
use rand_distr::StandardNormal;

use crate::fem::DofSpace;
use crate::mesh::BoundaryTag;
use crate::stationary::boundary_traces;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurePoint {
    pub x: [f64; 2],
    pub normal: [f64; 2],
    pub weight: f64,
}

/// Traces on the outer-circle quadrature points.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMeasurement {
    pub points: Vec<MeasurePoint>,
    pub u: Vec<[f64; 2]>,
    pub du_dn: Vec<[f64; 2]>,
    pub p: Vec<f64>,
    pub dp_dn: Vec<f64>,
    /// `None` for stationary data.
    pub time: Option<f64>,
}

pub fn extract_measurement(space: &DofSpace, u: &[f64], p: &[f64]) -> BoundaryMeasurement {
    let tr = boundary_traces(space, u, p, BoundaryTag::GammaE);
    BoundaryMeasurement {
        points: tr.iter().map(|t| MeasurePoint { x: t.x, normal: t.normal, weight: t.weight }).collect(),
        u: tr.iter().map(|t| t.u).collect(),
        du_dn: tr.iter().map(|t| t.du_dn).collect(),
        p: tr.iter().map(|t| t.p).collect(),
        dp_dn: tr.iter().map(|t| t.dp_dn).collect(),
        time: None,
    }
}

fn vec_sq(w: f64, v: [f64; 2]) -> f64 {
    w * (v[0] * v[0] + v[1] * v[1])
}

impl BoundaryMeasurement {
    pub fn at_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// L²(Γe) norms of u, p, ∂u/∂n, ∂p/∂n.
    pub fn norms(&self) -> [f64; 4] {
        let mut s = [0.0; 4];
        for (i, pt) in self.points.iter().enumerate() {
            s[0] += vec_sq(pt.weight, self.u[i]);
            s[1] += pt.weight * self.p[i] * self.p[i];
            s[2] += vec_sq(pt.weight, self.du_dn[i]);
            s[3] += pt.weight * self.dp_dn[i] * self.dp_dn[i];
        }
        s.map(f64::sqrt)
    }

    /// B = ‖u‖ + ‖p‖ + ‖∂u/∂n‖ + ‖∂p/∂n‖ on Γe.
    pub fn b(&self) -> f64 {
        self.norms().iter().sum()
    }

    pub fn difference(&self, other: &BoundaryMeasurement) -> BoundaryMeasurement {
        let sub2 = |a: &[[f64; 2]], b: &[[f64; 2]]| a.iter().zip(b).map(|(x, y)| [x[0] - y[0], x[1] - y[1]]).collect();
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        BoundaryMeasurement {
            points: self.points.clone(),
            u: sub2(&self.u, &other.u),
            du_dn: sub2(&self.du_dn, &other.du_dn),
            p: sub(&self.p, &other.p),
            dp_dn: sub(&self.dp_dn, &other.dp_dn),
            time: self.time,
        }
    }

    /// Per-component standard deviations giving relative amplitude ε for u, p and ∂p/∂n.
    fn noise_scales(&self, eps: f64) -> [f64; 3] {
        let len: f64 = self.points.iter().map(|p| p.weight).sum();
        let n = self.norms();
        [eps * n[0] / (2.0 * len).sqrt(), eps * n[1] / len.sqrt(), eps * n[3] / len.sqrt()]
    }

    /// Gaussian noise on u, p and ∂p/∂n; ∂u/∂n moves with p n since g is known.
    pub fn perturbed<R: Rng>(&self, eps: f64, rng: &mut R) -> BoundaryMeasurement {
        let [su, sp, sd] = self.noise_scales(eps);
        let mut out = self.clone();
        for i in 0..self.len() {
            let z: [f64; 4] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            out.u[i][0] += su * z[0];
            out.u[i][1] += su * z[1];
            let dp = sp * z[2];
            out.p[i] += dp;
            let n = self.points[i].normal;
            out.du_dn[i][0] += dp * n[0];
            out.du_dn[i][1] += dp * n[1];
            out.dp_dn[i] += sd * z[3];
        }
        out
    }

    /// Expected norm of the noise in the stacked (u, p, ∂p/∂n) data.
    pub fn expected_noise_norm(&self, eps: f64) -> f64 {
        let n = self.norms();
        eps * (n[0] * n[0] + n[1] * n[1] + n[3] * n[3]).sqrt()
    }

    /// √w-weighted stacking of u, p and ∂p/∂n.
    pub fn stacked(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.len());
        for (i, pt) in self.points.iter().enumerate() {
            let w = pt.weight.sqrt();
            out.extend_from_slice(&[w * self.u[i][0], w * self.u[i][1], w * self.p[i], w * self.dp_dn[i]]);
        }
        out
    }
}
