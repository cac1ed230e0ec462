//! Lagrange shape functions on a straight triangle in barycentric form.
//!
//! Local node order: vertices 0, 1, 2, then midpoints of edges (0,1), (1,2), (2,0).

pub const P2_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Physical gradients given the barycentric gradients `g`.
pub fn p2_gradients(l: [f64; 3], g: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let c = 4.0 * l[i] - 1.0;
        out[i] = [c * g[i][0], c * g[i][1]];
    }
    for (k, &(i, j)) in P2_EDGES.iter().enumerate() {
        out[3 + k] = [4.0 * (l[j] * g[i][0] + l[i] * g[j][0]), 4.0 * (l[j] * g[i][1] + l[i] * g[j][1])];
    }
    out
}

/// Constant Hessians of the six quadratic shape functions.
pub fn p2_hessians(g: &[[f64; 2]; 3]) -> [[[f64; 2]; 2]; 6] {
    let mut out = [[[0.0; 2]; 2]; 6];
    for i in 0..3 {
        for a in 0..2 {
            for b in 0..2 {
                out[i][a][b] = 4.0 * g[i][a] * g[i][b];
            }
        }
    }
    for (k, &(i, j)) in P2_EDGES.iter().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                out[3 + k][a][b] = 4.0 * (g[i][a] * g[j][b] + g[j][a] * g[i][b]);
            }
        }
    }
    out
}

/// Barycentric coordinates of the six P2 nodes.
pub fn p2_nodes() -> [[f64; 3]; 6] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]
}
