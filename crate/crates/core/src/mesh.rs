//! Structured triangulations of the annulus R0 < r < R1.
//!
//! The outer circle carries the tag `GammaE`, the inner one `Gamma0`.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::quadrature::{line_degree5, triangle_degree5, LineRule, TriangleRule};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpec {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub h: f64,
}

impl AnnulusSpec {
    pub fn new(inner_radius: f64, outer_radius: f64, h: f64) -> Self {
        AnnulusSpec { inner_radius, outer_radius, h }
    }

    pub fn validate(&self) -> Result<()> {
        let (r0, r1, h) = (self.inner_radius, self.outer_radius, self.h);
        if !(r0.is_finite() && r1.is_finite() && h.is_finite()) {
            return Err(Error::Geometry("non-finite annulus parameters".into()));
        }
        if r0 <= 0.0 || r1 <= r0 {
            return Err(Error::Geometry(format!("radii out of order: need 0 < R0 < R1, got R0={r0}, R1={r1}")));
        }
        if h <= 0.0 || h >= 0.5 * (r1 - r0) {
            return Err(Error::Geometry(format!("h={h} cannot resolve the gap R1-R0={} with two layers", r1 - r0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    GammaE,
    Gamma0,
}

impl BoundaryTag {
    /// Integer code used in VTK output.
    pub fn code(self) -> i32 {
        match self {
            BoundaryTag::GammaE => 1,
            BoundaryTag::Gamma0 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    /// Endpoints, ordered counter-clockwise with respect to the adjacent triangle.
    pub vertices: [usize; 2],
    pub edge: usize,
    pub tag: BoundaryTag,
    pub triangle: usize,
    /// Local edge index k in the triangle, joining local vertices k and k+1.
    pub local_edge: usize,
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Unique edges with sorted endpoints.
    pub edges: Vec<[usize; 2]>,
    /// Edge index of local edge k = (v_k, v_{k+1}) of each triangle.
    pub triangle_edges: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub h: f64,
    pub triangle_rule: TriangleRule,
    pub edge_rule: LineRule,
}

pub fn build_annulus(spec: &AnnulusSpec) -> Result<Mesh> {
    spec.validate()?;
    let (r0, r1, h) = (spec.inner_radius, spec.outer_radius, spec.h);
    let nr = ((r1 - r0) / h).ceil() as usize;
    let nt = ((2.0 * PI * r1 / h).ceil() as usize).max(6);
    let mut vertices = Vec::with_capacity((nr + 1) * nt);
    for i in 0..=nr {
        let r = if i == nr { r1 } else { r0 + (r1 - r0) * i as f64 / nr as f64 };
        for j in 0..nt {
            let t = 2.0 * PI * j as f64 / nt as f64;
            vertices.push([r * t.cos(), r * t.sin()]);
        }
    }
    let id = |i: usize, j: usize| i * nt + (j % nt);
    let mut triangles = Vec::with_capacity(2 * nr * nt);
    for i in 0..nr {
        for j in 0..nt {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    Mesh::from_parts(vertices, triangles, r0, r1, h)
}

impl Mesh {
    /// Builds connectivity, tags and normals; orients triangles counter-clockwise.
    pub fn from_parts(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>, r0: f64, r1: f64, h: f64) -> Result<Mesh> {
        for t in triangles.iter_mut() {
            let a = signed_area(&vertices, *t);
            if a < 0.0 {
                t.swap(1, 2);
            }
        }
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut count = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let mut te = [0; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = if a < b { [a, b] } else { [b, a] };
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    count.push(0usize);
                    edges.len() - 1
                });
                count[e] += 1;
                te[k] = e;
            }
            triangle_edges.push(te);
        }
        let mid = 0.5 * (r0 + r1);
        let mut boundary_edges = Vec::new();
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let e = triangle_edges[ti][k];
                if count[e] != 1 {
                    continue;
                }
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let (pa, pb) = (vertices[a], vertices[b]);
                let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                let length = dx.hypot(dy);
                let normal = [dy / length, -dx / length];
                let tangent = [-normal[1], normal[0]];
                let rm = (0.5 * (pa[0] + pb[0])).hypot(0.5 * (pa[1] + pb[1]));
                let tag = if rm > mid { BoundaryTag::GammaE } else { BoundaryTag::Gamma0 };
                boundary_edges.push(BoundaryEdge { vertices: [a, b], edge: e, tag, triangle: ti, local_edge: k, normal, tangent, length });
            }
        }
        let mesh = Mesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
            boundary_edges,
            inner_radius: r0,
            outer_radius: r1,
            h,
            triangle_rule: triangle_degree5(),
            edge_rule: line_degree5(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks the structural invariants of the triangulation.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.triangles.iter().enumerate() {
            if signed_area(&self.vertices, *t) <= 0.0 {
                return Err(Error::Geometry(format!("triangle {i} has non-positive area")));
            }
        }
        let tol = 1e-12 * self.outer_radius;
        for be in &self.boundary_edges {
            let r = match be.tag {
                BoundaryTag::GammaE => self.outer_radius,
                BoundaryTag::Gamma0 => self.inner_radius,
            };
            for &v in &be.vertices {
                let p = self.vertices[v];
                if (p[0].hypot(p[1]) - r).abs() > tol {
                    return Err(Error::Geometry(format!("boundary vertex {v} is off its circle r={r}")));
                }
            }
        }
        if self.euler_characteristic() != 0 {
            return Err(Error::Geometry(format!("Euler characteristic {} is not 0", self.euler_characteristic())));
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, self.triangles[t])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_length(&self, tag: BoundaryTag) -> f64 {
        self.boundary_edges.iter().filter(|e| e.tag == tag).map(|e| e.length).sum()
    }

    pub fn boundary_edges_with(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Sorted list of vertices lying on the given boundary component.
    pub fn boundary_vertices(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_edges_with(tag).flat_map(|e| e.vertices).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Largest edge length.
    pub fn max_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let (a, b) = (self.vertices[e[0]], self.vertices[e[1]]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .fold(0.0, f64::max)
    }

    /// Gradients of the barycentric coordinates and twice the area.
    pub fn barycentric_gradients(&self, t: usize) -> ([[f64; 2]; 3], f64) {
        let [a, b, c] = self.triangles[t];
        let (p0, p1, p2) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let g1 = [(p2[1] - p0[1]) / det, -(p2[0] - p0[0]) / det];
        let g2 = [-(p1[1] - p0[1]) / det, (p1[0] - p0[0]) / det];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        ([g0, g1, g2], det)
    }

    /// Physical point of barycentric coordinates `l` in triangle `t`.
    pub fn point(&self, t: usize, l: [f64; 3]) -> [f64; 2] {
        let tri = self.triangles[t];
        let mut x = [0.0; 2];
        for i in 0..3 {
            let p = self.vertices[tri[i]];
            x[0] += l[i] * p[0];
            x[1] += l[i] * p[1];
        }
        x
    }

    /// Barycentric coordinates in the adjacent triangle of the point at
    /// parameter `s` in [0, 1] along a boundary edge.
    pub fn edge_barycentric(&self, be: &BoundaryEdge, s: f64) -> [f64; 3] {
        let mut l = [0.0; 3];
        l[be.local_edge] = 1.0 - s;
        l[(be.local_edge + 1) % 3] = s;
        l
    }

    /// Quadrature points and weights of all edges of one tag: (edge index, x, weight, s).
    pub fn boundary_quadrature(&self, tag: BoundaryTag) -> Vec<BoundaryPoint> {
        let mut out = Vec::new();
        for (i, be) in self.boundary_edges.iter().enumerate() {
            if be.tag != tag {
                continue;
            }
            let (pa, pb) = (self.vertices[be.vertices[0]], self.vertices[be.vertices[1]]);
            for (s, w) in self.edge_rule.points.iter().zip(&self.edge_rule.weights) {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                out.push(BoundaryPoint { boundary_edge: i, s: *s, x, weight: w * be.length, normal: be.normal, tangent: be.tangent });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub boundary_edge: usize,
    pub s: f64,
    pub x: [f64; 2],
    pub weight: f64,
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
}

fn signed_area(v: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Uniform quadrisection; boundary midpoints are projected onto their circle.
pub fn refine(mesh: &Mesh) -> Result<Mesh> {
    mesh.validate()?;
    let nv = mesh.vertices.len();
    let mut vertices = mesh.vertices.clone();
    let mut radius_of_edge = vec![None; mesh.edges.len()];
    for be in &mesh.boundary_edges {
        radius_of_edge[be.edge] = Some(match be.tag {
            BoundaryTag::GammaE => mesh.outer_radius,
            BoundaryTag::Gamma0 => mesh.inner_radius,
        });
    }
    for (e, [a, b]) in mesh.edges.iter().enumerate() {
        let (pa, pb) = (mesh.vertices[*a], mesh.vertices[*b]);
        let mut m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        if let Some(r) = radius_of_edge[e] {
            let rm = m[0].hypot(m[1]);
            m = [m[0] * r / rm, m[1] * r / rm];
        }
        vertices.push(m);
    }
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [e0, e1, e2] = mesh.triangle_edges[t];
        let (m01, m12, m20) = (nv + e0, nv + e1, nv + e2);
        triangles.push([tri[0], m01, m20]);
        triangles.push([m01, tri[1], m12]);
        triangles.push([m20, m12, tri[2]]);
        triangles.push([m01, m12, m20]);
    }
    Mesh::from_parts(vertices, triangles, mesh.inner_radius, mesh.outer_radius, 0.5 * mesh.h)
}

/// Base mesh followed by `levels` uniform refinements.
pub fn build_refined(spec: &AnnulusSpec, levels: usize) -> Result<Mesh> {
    let mut m = build_annulus(spec)?;
    for _ in 0..levels {
        m = refine(&m)?;
    }
    Ok(m)
}
