//! Sparse symmetric rank-R factorization.
//!
//! Minimizes `‖X − Σ_r a_r a_rᵀ‖_F² + λ Σ_r ‖a_r‖_1` over the factor
//! matrix `A = [a_1 … a_R]` with monotone proximal gradient descent
//! (ISTA with backtracking), started from the clamped spectral solution.
//!
//! For `λ > 0` the smooth term is invariant under `A → AQ` for orthogonal
//! `Q` but the penalty is not, and descent from the plain spectral start can
//! stall in a poorer local minimum. [`factorize`] therefore also starts from
//! Givens rotations of the spectral factors, `rotation_starts` evenly spaced
//! angles per column pair, and keeps the lowest final objective. All starts
//! are deterministic.
//!
//! The model `A Aᵀ` is always positive semidefinite, so any negative
//! spectral mass in `X` stays in the residual; indefinite inputs are
//! accepted and simply fit as well as the model allows.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{squared_residual, symmetric_eig, FactorSet, Matrix, SymmetricMatrix};

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationConfig {
    pub rank: usize,
    /// Weight of the ℓ1 penalty.
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the relative objective decrease stays below this for two
    /// consecutive accepted steps.
    pub rel_tol: f64,
    /// Step multiplier applied on each backtracking rejection.
    pub backtrack_shrink: f64,
    pub initial_step: f64,
    /// Angles per column pair for the rotated spectral starts; 0 or 1 keeps
    /// only the plain spectral start.
    pub rotation_starts: usize,
    /// Unused by the deterministic spectral start; kept so that configs
    /// round-trip through the command line unchanged.
    pub seed: u64,
}

impl FactorizationConfig {
    pub fn new(rank: usize, lambda: f64) -> Self {
        FactorizationConfig {
            rank,
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::invalid("rank must be at least 1"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        if !(self.backtrack_shrink > 0.0 && self.backtrack_shrink < 1.0) {
            return Err(Error::invalid(format!(
                "backtrack_shrink must lie in (0, 1), got {}",
                self.backtrack_shrink
            )));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::invalid("initial_step must be positive"));
        }
        if self.rel_tol.is_nan() || self.rel_tol < 0.0 {
            return Err(Error::invalid("rel_tol must be non-negative"));
        }
        Ok(())
    }
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        FactorizationConfig {
            rank: 1,
            lambda: 0.0,
            max_iters: 2000,
            rel_tol: 1e-9,
            backtrack_shrink: 0.5,
            initial_step: 1.0,
            rotation_starts: 12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationResult {
    pub factors: FactorSet,
    /// Objective at the start point followed by one entry per accepted step.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl FactorizationResult {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Steps below this size count as underflow.
pub const MIN_STEP: f64 = 1e-18;

/// `‖X − Σ a_r a_rᵀ‖_F² + λ Σ ‖a_r‖_1`.
pub fn objective(x: &SymmetricMatrix, f: &FactorSet, lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::invalid("lambda must be non-negative"));
    }
    Ok(squared_residual(x, f)? + lambda * f.l1_norm())
}

/// Gradient of `‖X − AAᵀ‖_F²` with respect to `A`, i.e. `4(AAᵀ − X)A`.
pub fn smooth_gradient(x: &SymmetricMatrix, a: &Matrix) -> Result<Matrix> {
    check_dim(x.dim(), a.rows())?;
    let residual = model_minus_target(x, a);
    let (n, r) = (a.rows(), a.cols());
    let mut g = Matrix::zeros(n, r);
    for i in 0..n {
        for k in 0..n {
            let m = residual[i * n + k];
            if m == 0.0 {
                continue;
            }
            for c in 0..r {
                let v = g.get(i, c) + m * a.get(k, c);
                g.set(i, c, v);
            }
        }
    }
    for v in g.as_mut_slice() {
        *v *= 4.0;
    }
    Ok(g)
}

/// Row-major `AAᵀ − X`.
fn model_minus_target(x: &SymmetricMatrix, a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = crate::linalg::dot(a.row(i), a.row(j)) - x.get(i, j);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    m
}

fn smooth_value(x: &SymmetricMatrix, a: &Matrix) -> f64 {
    model_minus_target(x, a).iter().map(|v| v * v).sum()
}

/// Elementwise `sign(a)·max(|a| − t, 0)`.
pub fn soft_threshold(a: &Matrix, t: f64) -> Result<Matrix> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::invalid(format!(
            "threshold must be non-negative, got {t}"
        )));
    }
    let mut out = a.clone();
    for v in out.as_mut_slice() {
        *v = shrink(*v, t);
    }
    Ok(out)
}

#[inline]
fn shrink(v: f64, t: f64) -> f64 {
    let m = v.abs() - t;
    if m > 0.0 {
        m.copysign(v)
    } else {
        0.0
    }
}

/// Flips each vector so that its largest-magnitude entry (lowest index on
/// ties) is non-negative. Reconstruction is unchanged bit for bit.
pub fn canonicalize_signs(f: &FactorSet) -> FactorSet {
    let vectors = f
        .vectors()
        .iter()
        .map(|v| {
            let mut best = 0;
            for (i, x) in v.iter().enumerate() {
                if x.abs() > v[best].abs() {
                    best = i;
                }
            }
            if v[best] < 0.0 {
                v.iter().map(|x| -x).collect()
            } else {
                v.clone()
            }
        })
        .collect();
    FactorSet::new(vectors)
        .expect("sign flips keep a valid factor set valid")
        .with_canonical_flag(true)
}

/// `a_r = sqrt(max(λ_r, 0))·v_r` over the `rank` leading eigenpairs,
/// sign-canonicalized.
pub fn eigen_init(x: &SymmetricMatrix, rank: usize) -> Result<FactorSet> {
    if rank == 0 || rank > x.dim() {
        return Err(Error::invalid(format!(
            "rank {rank} out of range 1..={}",
            x.dim()
        )));
    }
    let eig = symmetric_eig(x)?;
    let vectors = (0..rank)
        .map(|r| {
            let scale = eig.eigenvalues[r].max(0.0).sqrt();
            eig.eigenvector(r).into_iter().map(|v| v * scale).collect()
        })
        .collect();
    Ok(canonicalize_signs(&FactorSet::new(vectors)?))
}

/// Proximal gradient solve of the sparse symmetric factorization problem.
pub fn factorize(x: &SymmetricMatrix, cfg: &FactorizationConfig) -> Result<FactorizationResult> {
    cfg.validate()?;
    if cfg.rank > x.dim() {
        return Err(Error::invalid(format!(
            "rank {} exceeds matrix dimension {}",
            cfg.rank,
            x.dim()
        )));
    }
    let lambda = cfg.lambda;

    if x.is_zero() {
        let factors = canonicalize_signs(&FactorSet::zeros(x.dim(), cfg.rank)?);
        return Ok(FactorizationResult {
            factors,
            objective_trace: vec![0.0],
            converged: true,
            iterations: 0,
        });
    }

    let init = eigen_init(x, cfg.rank)?;
    let mut best = factorize_from(x, &init, cfg)?;
    if lambda == 0.0 || cfg.rank < 2 || cfg.rotation_starts < 2 {
        return Ok(best);
    }
    let n = cfg.rotation_starts;
    for p in 0..cfg.rank {
        for q in (p + 1)..cfg.rank {
            for j in 1..n {
                let angle = j as f64 * std::f64::consts::PI / n as f64;
                let start = givens(&init, p, q, angle);
                let cand = match factorize_from(x, &start, cfg) {
                    Ok(r) => r,
                    Err(Error::StepUnderflow { .. }) => continue,
                    Err(e) => return Err(e),
                };
                if cand.final_objective() < best.final_objective() {
                    best = cand;
                }
            }
        }
    }
    Ok(best)
}

/// Rotates columns `p` and `q` of `f` by `angle`.
fn givens(f: &FactorSet, p: usize, q: usize, angle: f64) -> FactorSet {
    let (c, s) = (angle.cos(), angle.sin());
    let mut v = f.vectors().to_vec();
    let (vp, vq) = (v[p].clone(), v[q].clone());
    for (i, (a, b)) in vp.into_iter().zip(vq).enumerate() {
        v[p][i] = c * a - s * b;
        v[q][i] = s * a + c * b;
    }
    FactorSet::new(v).expect("rotation keeps entries finite")
}

/// Proximal gradient solve started from `init` instead of the spectral start.
pub fn factorize_from(
    x: &SymmetricMatrix,
    init: &FactorSet,
    cfg: &FactorizationConfig,
) -> Result<FactorizationResult> {
    cfg.validate()?;
    check_dim(init.dim(), x.dim())?;
    check_dim(init.rank(), cfg.rank)?;
    let lambda = cfg.lambda;
    let mut a = init.to_columns();
    let l1 = |a: &Matrix| a.as_slice().iter().map(|v| v.abs()).sum::<f64>();
    let mut smooth = smooth_value(x, &a);
    let mut obj = smooth + lambda * l1(&a);
    let mut trace = vec![obj];
    let mut step = cfg.initial_step;
    let mut small_decreases = 0;
    let mut converged = obj == 0.0;
    let mut iterations = 0;

    while !converged && iterations < cfg.max_iters {
        let grad = smooth_gradient(x, &a)?;
        step = (step / cfg.backtrack_shrink).min(cfg.initial_step);
        let (next, next_smooth, next_obj) = loop {
            let mut cand = a.clone();
            for (c, g) in cand.as_mut_slice().iter_mut().zip(grad.as_slice()) {
                *c = shrink(*c - step * g, step * lambda);
            }
            let mut lin = 0.0;
            let mut dist = 0.0;
            for ((c, o), g) in cand
                .as_slice()
                .iter()
                .zip(a.as_slice())
                .zip(grad.as_slice())
            {
                let d = c - o;
                lin += g * d;
                dist += d * d;
            }
            let cand_smooth = smooth_value(x, &cand);
            let cand_obj = cand_smooth + lambda * l1(&cand);
            if cand_smooth <= smooth + lin + dist / (2.0 * step) && cand_obj <= obj {
                break (cand, cand_smooth, cand_obj);
            }
            step *= cfg.backtrack_shrink;
            if step < MIN_STEP {
                let best = FactorizationResult {
                    factors: canonicalize_signs(&FactorSet::from_columns(&a)?),
                    objective_trace: trace.clone(),
                    converged: false,
                    iterations,
                };
                if iterations == 0 {
                    return Err(Error::StepUnderflow {
                        best: Box::new(best),
                    });
                }
                // no representable descent step remains
                log::debug!("step underflow after {iterations} accepted steps; stopping");
                return Ok(FactorizationResult {
                    converged: true,
                    ..best
                });
            }
        };

        iterations += 1;
        let decrease = (obj - next_obj) / obj.abs().max(f64::MIN_POSITIVE);
        a = next;
        smooth = next_smooth;
        obj = next_obj;
        trace.push(obj);

        if obj == 0.0 {
            converged = true;
        } else if decrease < cfg.rel_tol {
            small_decreases += 1;
            converged = small_decreases >= 2;
        } else {
            small_decreases = 0;
        }
    }

    Ok(FactorizationResult {
        factors: canonicalize_signs(&FactorSet::from_columns(&a)?),
        objective_trace: trace,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_residual, reconstruct};

    fn fs(v: Vec<Vec<f64>>) -> FactorSet {
        FactorSet::new(v).unwrap()
    }

    #[test]
    fn objective_examples() {
        let i2 = SymmetricMatrix::identity(2).unwrap();
        let f = fs(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(objective(&i2, &f, 0.0).unwrap(), 0.0);
        assert_eq!(objective(&i2, &f, 2.0).unwrap(), 4.0);
        let z = SymmetricMatrix::zeros(2).unwrap();
        assert_eq!(objective(&z, &fs(vec![vec![1.0, 1.0]]), 1.0).unwrap(), 6.0);
        assert!(objective(&SymmetricMatrix::zeros(3).unwrap(), &f, 0.0).is_err());
    }

    #[test]
    fn gradient_examples() {
        let x = SymmetricMatrix::from_rows(&[vec![9.0, 12.0], vec![12.0, 16.0]]).unwrap();
        let a = Matrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        assert!(smooth_gradient(&x, &a)
            .unwrap()
            .as_slice()
            .iter()
            .all(|v| *v == 0.0));

        let z = SymmetricMatrix::zeros(2).unwrap();
        let e1 = Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        assert_eq!(smooth_gradient(&z, &e1).unwrap().as_slice(), &[4.0, 0.0]);
        assert!(smooth_gradient(&SymmetricMatrix::zeros(3).unwrap(), &e1).is_err());
    }

    #[test]
    fn soft_threshold_examples() {
        let a = Matrix::from_rows(&[vec![3.0, -0.5, 0.0]]).unwrap();
        assert_eq!(
            soft_threshold(&a, 1.0).unwrap().as_slice(),
            &[2.0, 0.0, 0.0]
        );
        assert_eq!(soft_threshold(&a, 0.0).unwrap(), a);
        assert!(soft_threshold(&a, 3.0)
            .unwrap()
            .as_slice()
            .iter()
            .all(|v| *v == 0.0));
        assert!(soft_threshold(&a, -1.0).is_err());
        let b = Matrix::from_rows(&[vec![-3.0]]).unwrap();
        assert_eq!(soft_threshold(&b, 1.0).unwrap().as_slice(), &[-2.0]);
    }

    #[test]
    fn eigen_init_examples() {
        let d = SymmetricMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        assert_eq!(eigen_init(&d, 1).unwrap().vector(0), &[2.0, 0.0]);

        let neg = SymmetricMatrix::from_diagonal(&[-1.0, -1.0]).unwrap();
        let f = eigen_init(&neg, 2).unwrap();
        assert!(f.vectors().iter().flatten().all(|v| *v == 0.0));

        let x = SymmetricMatrix::outer(&[3.0, 4.0]).unwrap();
        let f = eigen_init(&x, 1).unwrap();
        assert!((f.vector(0)[0] - 3.0).abs() < 1e-12);
        assert!((f.vector(0)[1] - 4.0).abs() < 1e-12);
        assert!(f.canonical_sign());

        assert!(eigen_init(&x, 0).is_err());
        assert!(eigen_init(&x, 3).is_err());
    }

    #[test]
    fn rotated_starts_never_worse_than_spectral_start() {
        let x = SymmetricMatrix::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap();
        for lambda in [0.5, 1.0, 4.0] {
            let cfg = FactorizationConfig::new(2, lambda);
            let plain = FactorizationConfig {
                rotation_starts: 0,
                ..cfg.clone()
            };
            let multi = factorize(&x, &cfg).unwrap().final_objective();
            let single = factorize(&x, &plain).unwrap().final_objective();
            assert!(multi <= single);
        }
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(
            canonicalize_signs(&fs(vec![vec![-3.0, 1.0]])).vector(0),
            &[3.0, -1.0]
        );
        assert_eq!(
            canonicalize_signs(&fs(vec![vec![0.0, 2.0]])).vector(0),
            &[0.0, 2.0]
        );
        assert_eq!(
            canonicalize_signs(&fs(vec![vec![-1.0, 1.0]])).vector(0),
            &[1.0, -1.0]
        );
    }

    #[test]
    fn factorize_exact_cases() {
        let i2 = SymmetricMatrix::identity(2).unwrap();
        let r = factorize(&i2, &FactorizationConfig::new(2, 0.0)).unwrap();
        assert!(frobenius_residual(&i2, &r.factors).unwrap() <= 1e-8);
        assert!(r.converged);

        let x = SymmetricMatrix::outer(&[3.0, 4.0]).unwrap();
        let r = factorize(&x, &FactorizationConfig::new(1, 0.0)).unwrap();
        assert!(frobenius_residual(&x, &r.factors).unwrap() <= 1e-8);
        assert!((r.factors.vector(0)[0] - 3.0).abs() < 1e-8);
        assert!((r.factors.vector(0)[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn zero_input_returns_immediately() {
        let z = SymmetricMatrix::zeros(3).unwrap();
        let r = factorize(&z, &FactorizationConfig::new(2, 1.0)).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
        assert!(r.factors.vectors().iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn indefinite_input_is_fit_without_error() {
        let x = SymmetricMatrix::from_diagonal(&[2.0, -3.0]).unwrap();
        let r = factorize(&x, &FactorizationConfig::new(2, 0.0)).unwrap();
        // the -3 direction cannot be represented
        assert!((frobenius_residual(&x, &r.factors).unwrap() - 3.0).abs() < 1e-8);
        assert!(reconstruct(&r.factors).get(1, 1).abs() < 1e-12);
    }

    #[test]
    fn heavy_penalty_shrinks_everything() {
        let x = SymmetricMatrix::from_rows(&[
            vec![1.0, 0.5, -0.2],
            vec![0.5, 0.8, 0.1],
            vec![-0.2, 0.1, 0.9],
        ])
        .unwrap();
        let r = factorize(&x, &FactorizationConfig::new(2, 1e6)).unwrap();
        assert!(r
            .factors
            .vectors()
            .iter()
            .flatten()
            .all(|v| v.abs() <= 1e-6));
    }

    #[test]
    fn config_validation() {
        let x = SymmetricMatrix::identity(2).unwrap();
        let mut cfg = FactorizationConfig::new(0, 0.0);
        assert!(factorize(&x, &cfg).is_err());
        cfg.rank = 1;
        cfg.backtrack_shrink = 1.0;
        assert!(factorize(&x, &cfg).is_err());
        cfg.backtrack_shrink = 0.5;
        cfg.lambda = -1.0;
        assert!(factorize(&x, &cfg).is_err());
        assert!(factorize(&x, &FactorizationConfig::new(3, 0.0)).is_err());
    }
}
