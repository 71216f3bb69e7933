//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the solver, kernel or graph-metric code it is
//! used to check; only plain data types cross the boundary.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Row-major `n × n` symmetric matrix with entries in [-1, 1].
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    m
}

/// Row-major `B Bᵀ` for a random `n × r` Gaussian `B`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, r: usize) -> Vec<f64> {
    let b: Vec<f64> = (0..n * r).map(|_| normal(rng)).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (0..r).map(|k| b[i * r + k] * b[j * r + k]).sum();
        }
    }
    m
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------------------
// factorization objective and its oracles

/// `‖X − AAᵀ‖_F² + λ‖A‖_1` with `A` row-major `n × r`, by direct loops.
pub fn factor_objective(x: &[f64], a: &[f64], n: usize, r: usize, lambda: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let m: f64 = (0..r).map(|k| a[i * r + k] * a[j * r + k]).sum();
            s += (x[i * n + j] - m).powi(2);
        }
    }
    s + lambda * a.iter().map(|v| v.abs()).sum::<f64>()
}

/// Central finite-difference gradient of the smooth term.
pub fn finite_difference_gradient(x: &[f64], a: &[f64], n: usize, r: usize, h: f64) -> Vec<f64> {
    let mut g = vec![0.0; a.len()];
    let mut work = a.to_vec();
    for k in 0..a.len() {
        work[k] = a[k] + h;
        let up = factor_objective(x, &work, n, r, 0.0);
        work[k] = a[k] - h;
        let down = factor_objective(x, &work, n, r, 0.0);
        work[k] = a[k];
        g[k] = (up - down) / (2.0 * h);
    }
    g
}

/// Best objective over `starts` random starts of plain subgradient descent.
///
/// Step `η_k = η₀ / (1 + k/1000)`, subgradient of `|·|` taken as `sign`
/// (0 at 0). Returns the lowest objective seen along all trajectories.
pub fn multistart_subgradient(
    x: &[f64],
    n: usize,
    r: usize,
    lambda: f64,
    starts: usize,
    steps: usize,
    seed: u64,
) -> f64 {
    let mut rng = rng(seed);
    let scale = x
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .sqrt()
        .max(1e-3);
    let eta0 = 0.02 / scale.powi(2).max(1.0);
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut a: Vec<f64> = (0..n * r).map(|_| normal(&mut rng) * scale * 0.5).collect();
        for k in 0..steps {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] =
                        (0..r).map(|c| a[i * r + c] * a[j * r + c]).sum::<f64>() - x[i * n + j];
                }
            }
            let f = m.iter().map(|v| v * v).sum::<f64>()
                + lambda * a.iter().map(|v| v.abs()).sum::<f64>();
            best = best.min(f);
            let eta = eta0 / (1.0 + k as f64 / 1000.0);
            let mut g = vec![0.0; n * r];
            for i in 0..n {
                for c in 0..r {
                    let mut s = 0.0;
                    for j in 0..n {
                        s += (m[i * n + j] + m[j * n + i]) * a[j * r + c];
                    }
                    let v = a[i * r + c];
                    let sg = if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    g[i * r + c] = 2.0 * s + lambda * sg;
                }
            }
            for (ai, gi) in a.iter_mut().zip(&g) {
                *ai -= eta * gi;
            }
        }
        best = best.min(factor_objective(x, &a, n, r, lambda));
    }
    best
}

/// Frobenius residual of the best rank-`r` PSD approximation, via plain
/// power iteration with deflation on `X` (assumed PSD).
pub fn truncated_psd_residual(x: &[f64], n: usize, r: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut rest = x.to_vec();
    for _ in 0..r {
        let mut v = uniform_vec(&mut rng, n);
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let mut w = vec![0.0; n];
            for i in 0..n {
                w[i] = (0..n).map(|j| rest[i * n + j] * v[j]).sum();
            }
            let norm = w.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            lambda = norm;
            v = w.into_iter().map(|t| t / norm).collect();
        }
        for i in 0..n {
            for j in 0..n {
                rest[i * n + j] -= lambda * v[i] * v[j];
            }
        }
    }
    rest.iter().map(|t| t * t).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// kernel oracle

/// `Σ_p Σ_q exp(−γ‖x_p − y_q‖²)·exp(−γ‖x_p − y_q‖²)` written out by hand.
pub fn naive_ssgk(fx: &[Vec<f64>], fy: &[Vec<f64>], gamma: f64) -> f64 {
    let mut total = 0.0;
    for q in 0..fy.len() {
        for p in 0..fx.len() {
            let mut d2 = 0.0;
            for i in 0..fx[p].len() {
                let d = fy[q][i] - fx[p][i];
                d2 += d * d;
            }
            let k = (-gamma * d2).exp();
            total += k * k;
        }
    }
    total
}

// ---------------------------------------------------------------------------
// SVM dual oracle

/// Euclidean projection onto `{0 ≤ α ≤ C, Σ y_i α_i = 0}` by bisection on
/// the multiplier of the equality constraint.
pub fn project_dual(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c))
            .collect()
    };
    let h = |mu: f64| -> f64 { at(mu).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let span = v.iter().map(|t| t.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    // h is non-increasing in mu
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Maximum of `Σα − ½ αᵀQα` over the dual feasible set by accelerated
/// projected gradient. Returns `(objective, alphas)`.
pub fn dual_qp_oracle(k: &[f64], y: &[f64], c: f64, max_iters: usize) -> (f64, Vec<f64>) {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let trace: f64 = (0..n).map(|i| k[i * n + i]).sum();
    let step = 1.0 / trace.max(1e-12);
    let objective = |a: &[f64]| -> f64 {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * a[j] * q(i, j);
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0_f64;
    for _ in 0..max_iters {
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - (0..n).map(|j| q(i, j) * z[j]).sum::<f64>())
            .collect();
        let v: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi + step * gi).collect();
        let next = project_dual(&v, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved: f64 = next.iter().zip(&a).map(|(p, o)| (p - o).powi(2)).sum();
        z = next
            .iter()
            .zip(&a)
            .map(|(p, o)| p + (t - 1.0) / t_next * (p - o))
            .collect();
        // restart momentum when it stops helping
        if objective(&next) < objective(&a) {
            z = next.clone();
            t = 1.0;
        } else {
            t = t_next;
        }
        a = next;
        if moved < 1e-30 {
            break;
        }
    }
    (objective(&a), a)
}

/// RBF Gram matrix of plain points, row-major.
pub fn rbf_gram(points: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let n = points.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d2: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            k[i * n + j] = (-gamma * d2).exp();
        }
    }
    k
}

// ---------------------------------------------------------------------------
// graph metric oracles

/// Onnela clustering coefficients by enumerating every ordered (j, k).
pub fn clustering_by_enumeration(w: &[f64], n: usize) -> Vec<f64> {
    let mut max = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max = max.max(w[i * n + j]);
            }
        }
    }
    (0..n)
        .map(|i| {
            let deg = (0..n).filter(|&j| j != i && w[i * n + j] > 0.0).count();
            if deg < 2 || max == 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    if j == i || k == i || j == k {
                        continue;
                    }
                    let prod = (w[i * n + j] / max) * (w[j * n + k] / max) * (w[i * n + k] / max);
                    s += prod.powf(1.0 / 3.0);
                }
            }
            s / (deg * (deg - 1)) as f64
        })
        .collect()
}

/// Characteristic path length by Floyd–Warshall on lengths `1/w`.
pub fn cpl_floyd_warshall(w: &[f64], n: usize) -> Option<f64> {
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
        for j in 0..n {
            if i != j && w[i * n + j] > 0.0 {
                d[i * n + j] = 1.0 / w[i * n + j];
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    let finite: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| d[i * n + j])
        .filter(|v| v.is_finite())
        .collect();
    if finite.is_empty() {
        None
    } else {
        Some(finite.iter().sum::<f64>() / finite.len() as f64)
    }
}

/// Random non-negative weighted graph; each edge present with probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<f64> {
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                let v = rng.random_range(0.05..2.0);
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
    }
    w
}
