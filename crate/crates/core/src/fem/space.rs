use std::sync::Arc;

use crate::mesh::{BoundaryTag, Mesh};
use crate::{Error, Result};

/// Degrees of freedom of the P2 velocity / P1 pressure pair.
///
/// Nodes are the mesh vertices followed by one node per edge. Velocity dof
/// `2·node + component`; pressure dof = vertex index; scalar P2 dof = node.
#[derive(Debug, Clone)]
pub struct DofSpace {
    pub mesh: Arc<Mesh>,
    pub n_nodes: usize,
    pub node_coords: Vec<[f64; 2]>,
    pub triangle_nodes: Vec<[usize; 6]>,
    pub gamma_e_nodes: Vec<usize>,
    pub gamma0_nodes: Vec<usize>,
}

impl DofSpace {
    pub fn new(mesh: Mesh) -> Self {
        Self::from_arc(Arc::new(mesh))
    }

    pub fn from_arc(mesh: Arc<Mesh>) -> Self {
        let nv = mesh.vertices.len();
        let n_nodes = nv + mesh.edges.len();
        let mut node_coords = mesh.vertices.clone();
        for [a, b] in &mesh.edges {
            let (pa, pb) = (mesh.vertices[*a], mesh.vertices[*b]);
            node_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
        let triangle_nodes = mesh
            .triangles
            .iter()
            .zip(&mesh.triangle_edges)
            .map(|(t, e)| [t[0], t[1], t[2], nv + e[0], nv + e[1], nv + e[2]])
            .collect();
        let nodes_of = |tag: BoundaryTag| {
            let mut v: Vec<usize> = mesh.boundary_edges_with(tag).flat_map(|be| [be.vertices[0], be.vertices[1], nv + be.edge]).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let gamma_e_nodes = nodes_of(BoundaryTag::GammaE);
        let gamma0_nodes = nodes_of(BoundaryTag::Gamma0);
        DofSpace { mesh, n_nodes, node_coords, triangle_nodes, gamma_e_nodes, gamma0_nodes }
    }

    pub fn velocity_dof_count(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn pressure_dof_count(&self) -> usize {
        self.mesh.vertices.len()
    }

    pub fn boundary_nodes(&self, tag: BoundaryTag) -> &[usize] {
        match tag {
            BoundaryTag::GammaE => &self.gamma_e_nodes,
            BoundaryTag::Gamma0 => &self.gamma0_nodes,
        }
    }

    /// Velocity dofs attached to nodes of one boundary component.
    pub fn boundary_velocity_dofs(&self, tag: BoundaryTag) -> Vec<usize> {
        self.boundary_nodes(tag).iter().flat_map(|n| [2 * n, 2 * n + 1]).collect()
    }

    /// Nodes of the six-node element `t` lying on boundary edge local index k.
    pub fn edge_nodes(&self, t: usize, k: usize) -> [usize; 3] {
        let n = self.triangle_nodes[t];
        [n[k], n[(k + 1) % 3], n[3 + k]]
    }

    pub fn len_of(&self, kind: FieldKind) -> usize {
        match kind {
            FieldKind::Velocity => self.velocity_dof_count(),
            FieldKind::Pressure => self.pressure_dof_count(),
            FieldKind::Scalar => self.n_nodes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Velocity,
    Pressure,
    /// Continuous P2 scalar field (lifting and Carleman weights).
    Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    pub kind: FieldKind,
    pub values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(space: &DofSpace, kind: FieldKind, values: Vec<f64>) -> Result<Self> {
        let f = DiscreteField { kind, values };
        f.check(space)?;
        Ok(f)
    }

    pub fn zeros(space: &DofSpace, kind: FieldKind) -> Self {
        DiscreteField { kind, values: vec![0.0; space.len_of(kind)] }
    }

    pub fn check(&self, space: &DofSpace) -> Result<()> {
        let n = space.len_of(self.kind);
        if self.values.len() != n {
            return Err(Error::Input(format!("{:?} field has {} coefficients, space expects {n}", self.kind, self.values.len())));
        }
        Ok(())
    }
}
