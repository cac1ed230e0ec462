use crate::mesh::{BoundaryEdge, BoundaryTag, Mesh};
use crate::{Error, Result};

/// Robin coefficient, piecewise linear along the inner circle.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinField {
    /// Inner-circle vertex ids, sorted.
    pub vertices: Vec<usize>,
    pub values: Vec<f64>,
    pub alpha: f64,
    pub m2: Option<f64>,
}

impl RobinField {
    pub fn from_fn(mesh: &Mesh, alpha: f64, f: impl Fn([f64; 2]) -> f64) -> Self {
        let vertices = mesh.boundary_vertices(BoundaryTag::Gamma0);
        let values = vertices.iter().map(|&v| f(mesh.vertices[v])).collect();
        RobinField { vertices, values, alpha, m2: None }
    }

    pub fn constant(mesh: &Mesh, value: f64, alpha: f64) -> Self {
        Self::from_fn(mesh, alpha, |_| value)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Input(format!("alpha must be positive, got {}", self.alpha)));
        }
        for (&v, &q) in self.vertices.iter().zip(&self.values) {
            if !(q >= self.alpha) {
                return Err(Error::RobinBound { vertex: v, value: q, alpha: self.alpha });
            }
        }
        Ok(())
    }

    pub fn at_vertex(&self, v: usize) -> Option<f64> {
        self.vertices.binary_search(&v).ok().map(|k| self.values[k])
    }

    /// Linear interpolation along an inner boundary edge, s in [0, 1].
    pub fn on_edge(&self, be: &BoundaryEdge, s: f64) -> f64 {
        let a = self.at_vertex(be.vertices[0]).expect("edge vertex on inner circle");
        let b = self.at_vertex(be.vertices[1]).expect("edge vertex on inner circle");
        (1.0 - s) * a + s * b
    }

    pub fn scaled(&self, c: f64) -> Self {
        RobinField { values: self.values.iter().map(|v| c * v).collect(), alpha: self.alpha * c.abs().max(f64::MIN_POSITIVE), ..self.clone() }
    }

    /// Same nodes, every value replaced by `value`.
    pub fn with_constant(&self, value: f64) -> Self {
        RobinField { values: vec![value; self.values.len()], ..self.clone() }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }
}
