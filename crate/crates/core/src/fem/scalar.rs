//! Scalar P2 Dirichlet problems −Δφ = f with prescribed values on both circles.

use super::assembly::{assemble_scalar_load, assemble_scalar_stiffness};
use super::{DiscreteField, DofSpace, FieldKind};
use crate::linalg::{CsrMatrix, SparseLu};
use crate::Result;

pub type ScalarFn<'a> = &'a (dyn Fn([f64; 2]) -> f64 + Sync);

/// Solves ∫∇φ·∇v = ∫ f v for interior test functions with φ = `outer` on the
/// outer-circle nodes and φ = `inner` on the inner-circle nodes.
pub fn dirichlet_solve(space: &DofSpace, source: Option<ScalarFn>, outer: ScalarFn, inner: ScalarFn) -> Result<DiscreteField> {
    let n = space.n_nodes;
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for &i in &space.gamma_e_nodes {
        fixed[i] = Some(outer(space.node_coords[i]));
    }
    for &i in &space.gamma0_nodes {
        fixed[i] = Some(inner(space.node_coords[i]));
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut position = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        position[i] = k;
    }
    let k = assemble_scalar_stiffness(space);
    let mut rhs = match source {
        Some(f) => {
            let l = assemble_scalar_load(space, f);
            free.iter().map(|&i| l[i]).collect()
        }
        None => vec![0.0; free.len()],
    };
    let mut t = Vec::with_capacity(k.nnz());
    for (r, c, v) in k.triplets() {
        if position[r] == usize::MAX {
            continue;
        }
        match fixed[c] {
            Some(val) => rhs[position[r]] -= v * val,
            None => t.push((position[r], position[c], v)),
        }
    }
    let kii = CsrMatrix::from_triplets(free.len(), free.len(), t);
    let (x, _) = SparseLu::new(kii)?.solve(&rhs, 1e-12)?;
    let mut values: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    for (k, &i) in free.iter().enumerate() {
        values[i] = x[k];
    }
    Ok(DiscreteField { kind: FieldKind::Scalar, values })
}
