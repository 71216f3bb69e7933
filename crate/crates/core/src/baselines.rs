//! Classical connectome features: flattened edges, weighted clustering
//! coefficients and characteristic path length.
//!
//! The diagonal (self-connectivity) is ignored everywhere.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

/// Strict upper triangle, row-major: `(x_01, x_02, …, x_12, …)`.
pub fn edge_features(x: &SymmetricMatrix) -> Vec<f64> {
    let n = x.dim();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        out.extend_from_slice(&x.row(i)[i + 1..]);
    }
    out
}

/// Inverse of [`edge_features`] for a zero-diagonal matrix of size `dim`.
pub fn from_edge_features(dim: usize, edges: &[f64]) -> Result<SymmetricMatrix> {
    if edges.len() != dim * dim.saturating_sub(1) / 2 {
        return Err(Error::invalid(format!(
            "{} edge values do not fit a {dim}-node graph",
            edges.len()
        )));
    }
    let mut values = vec![0.0; dim * dim];
    let mut it = edges.iter();
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = *it.next().expect("length checked");
            values[i * dim + j] = v;
            values[j * dim + i] = v;
        }
    }
    SymmetricMatrix::new(dim, values)
}

fn check_nonnegative(x: &SymmetricMatrix) -> Result<()> {
    let n = x.dim();
    for i in 0..n {
        for j in 0..n {
            if i != j && x.get(i, j) < 0.0 {
                return Err(Error::invalid(format!(
                    "negative edge weight {} at ({i}, {j})",
                    x.get(i, j)
                )));
            }
        }
    }
    Ok(())
}

fn max_edge_weight(x: &SymmetricMatrix) -> f64 {
    let n = x.dim();
    let mut m = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            m = m.max(x.get(i, j));
        }
    }
    m
}

/// Weighted clustering coefficient per node, geometric-mean (Onnela) form:
///
/// ```text
/// c_i = Σ_{j≠k} (ŵ_ij ŵ_jk ŵ_ik)^{1/3} / (k_i (k_i − 1)),   ŵ = w / max w
/// ```
///
/// with `k_i` the number of non-zero neighbours; `c_i = 0` when `k_i < 2`.
/// An edgeless graph yields the zero vector.
pub fn clustering_coefficients(x: &SymmetricMatrix) -> Result<Vec<f64>> {
    check_nonnegative(x)?;
    let n = x.dim();
    let max = max_edge_weight(x);
    if max == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let w = |i: usize, j: usize| if i == j { 0.0 } else { x.get(i, j) / max };
    let cube_root: Vec<f64> = (0..n * n).map(|k| w(k / n, k % n).cbrt()).collect();
    let cr = |i: usize, j: usize| cube_root[i * n + j];

    Ok((0..n)
        .map(|i| {
            let neighbours: Vec<usize> = (0..n).filter(|&j| j != i && x.get(i, j) > 0.0).collect();
            let k = neighbours.len();
            if k < 2 {
                return 0.0;
            }
            let mut sum = 0.0;
            for &j in &neighbours {
                for &h in &neighbours {
                    if j != h {
                        sum += cr(i, j) * cr(j, h) * cr(i, h);
                    }
                }
            }
            sum / (k * (k - 1)) as f64
        })
        .collect())
}

pub fn mean_clustering_coefficient(x: &SymmetricMatrix) -> Result<f64> {
    let c = clustering_coefficients(x)?;
    Ok(c.iter().sum::<f64>() / c.len() as f64)
}

#[derive(PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path distances from every node, with edge length `1/w`.
pub fn shortest_path_lengths(x: &SymmetricMatrix) -> Result<Vec<Vec<f64>>> {
    check_nonnegative(x)?;
    let n = x.dim();
    Ok((0..n)
        .map(|src| {
            let mut dist = vec![f64::INFINITY; n];
            dist[src] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Frontier {
                dist: 0.0,
                node: src,
            });
            while let Some(Frontier { dist: d, node: u }) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                #[allow(clippy::needless_range_loop)]
                for v in 0..n {
                    let wt = x.get(u, v);
                    if v == u || wt <= 0.0 {
                        continue;
                    }
                    let nd = d + 1.0 / wt;
                    if nd < dist[v] {
                        dist[v] = nd;
                        heap.push(Frontier { dist: nd, node: v });
                    }
                }
            }
            dist
        })
        .collect())
}

/// Mean shortest-path length over ordered pairs `i ≠ j` that are connected.
///
/// Stronger connections are shorter: each edge has length `1/w`.
/// Unreachable pairs are left out of the mean.
pub fn characteristic_path_length(x: &SymmetricMatrix) -> Result<f64> {
    let d = shortest_path_lengths(x)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, row) in d.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j && v.is_finite() {
                sum += v;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::invalid(
            "characteristic path length undefined: graph has no edges",
        ));
    }
    Ok(sum / count as f64)
}
