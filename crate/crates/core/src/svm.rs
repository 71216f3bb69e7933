//! Soft-margin kernel SVM on precomputed Gram matrices.
//!
//! The binary solver is SMO on the dual
//!
//! ```text
//! max  Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij   s.t. 0 ≤ α_i ≤ C,  Σ α_i y_i = 0
//! ```
//!
//! Each step picks the maximal violating pair and solves the two-variable
//! subproblem in closed form. When that pair cannot move, a second index is
//! drawn from a seeded stream instead. Multiclass problems are decomposed
//! one-vs-one.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::kernel::{psd_report, GramMatrix};
use crate::linalg::Matrix;
use crate::textio::{fmt_f64, push_row, write_file, Lines};

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    /// Allowed gap between the maximal and minimal violation scores.
    pub kkt_tol: f64,
    /// Consecutive stalled steps tolerated before giving up.
    pub max_passes: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl SvmConfig {
    pub fn new(c: f64) -> Self {
        SvmConfig {
            c,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if self.kkt_tol.is_nan() || self.kkt_tol <= 0.0 {
            return Err(Error::invalid("kkt_tol must be positive"));
        }
        Ok(())
    }
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            kkt_tol: 1e-3,
            max_passes: 10,
            max_iters: 1_000_000,
            seed: 0,
        }
    }
}

/// Alphas above this count as support vectors.
pub const SUPPORT_EPS: f64 = 1e-12;

/// Dual solution of a two-class problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// ±1 per training sample.
    pub labels: Vec<i8>,
    pub c: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl BinaryModel {
    pub fn support_indices(&self) -> Vec<usize> {
        self.alphas
            .iter()
            .enumerate()
            .filter(|(_, a)| **a > SUPPORT_EPS)
            .map(|(i, _)| i)
            .collect()
    }

    /// `Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij`.
    pub fn dual_objective(&self, g: &GramMatrix) -> f64 {
        dual_objective(g, &self.labels, &self.alphas)
    }

    /// `Σ_i α_i y_i k(x_i, x) + b`.
    pub fn decision(&self, kernel_row: &[f64]) -> Result<f64> {
        check_dim(self.alphas.len(), kernel_row.len())?;
        Ok(self.decision_unchecked(kernel_row.iter().copied()))
    }

    fn decision_unchecked(&self, row: impl Iterator<Item = f64>) -> f64 {
        let s: f64 = self
            .alphas
            .iter()
            .zip(&self.labels)
            .zip(row)
            .filter(|((a, _), _)| **a != 0.0)
            .map(|((a, y), k)| a * f64::from(*y) * k)
            .sum();
        s + self.bias
    }
}

/// Class of a decision value; exact zero goes to +1.
pub fn sign_label(score: f64) -> i8 {
    if score >= 0.0 {
        1
    } else {
        -1
    }
}

pub fn dual_objective(g: &GramMatrix, y: &[i8], alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alphas[i] * alphas[j] * f64::from(y[i] * y[j]) * g.get(i, j);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

pub fn decision(m: &BinaryModel, kernel_row: &[f64]) -> Result<f64> {
    m.decision(kernel_row)
}

/// SMO on a precomputed Gram matrix.
pub fn train_binary(g: &GramMatrix, y: &[i8], cfg: &SvmConfig) -> Result<BinaryModel> {
    cfg.validate()?;
    let n = g.n();
    check_dim(n, y.len())?;
    if let Some(bad) = y.iter().find(|v| **v != 1 && **v != -1) {
        return Err(Error::invalid(format!(
            "binary labels must be +1 or -1, got {bad}"
        )));
    }
    if !(y.contains(&1) && y.contains(&-1)) {
        return Err(Error::SingleClass);
    }

    let c = cfg.c;
    let yf: Vec<f64> = y.iter().map(|v| f64::from(*v)).collect();
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα
    let mut grad = vec![-1.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stalled = 0;
    let mut iterations = 0;
    let mut converged = false;

    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    while iterations < cfg.max_iters {
        let mut i = usize::MAX;
        let mut m_up = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let score = -yf[t] * grad[t];
            if in_up(alpha[t], yf[t]) && score > m_up {
                m_up = score;
                i = t;
            }
            if in_low(alpha[t], yf[t]) && score < m_low {
                m_low = score;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || m_up - m_low <= cfg.kkt_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let moved = smo_step(g, &yf, c, &mut alpha, &mut grad, i, j);
        if moved {
            stalled = 0;
            continue;
        }
        // seeded fallback partner among the remaining violators
        let candidates: Vec<usize> = (0..n)
            .filter(|&t| t != i && in_low(alpha[t], yf[t]) && -yf[t] * grad[t] < m_up)
            .collect();
        let moved = !candidates.is_empty() && {
            let k = candidates[rng.random_range(0..candidates.len())];
            smo_step(g, &yf, c, &mut alpha, &mut grad, i, k)
        };
        if moved {
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= cfg.max_passes {
                break;
            }
        }
    }

    if !converged {
        log::warn!(
            "SMO stopped after {iterations} iterations without reaching kkt_tol {}",
            cfg.kkt_tol
        );
    }

    let bias = compute_bias(&yf, &alpha, &grad, c);
    Ok(BinaryModel {
        alphas: alpha,
        bias,
        labels: y.to_vec(),
        c,
        converged,
        iterations,
    })
}

/// Moves along `α_i += y_i t`, `α_j −= y_j t`. Returns whether anything changed.
fn smo_step(
    g: &GramMatrix,
    y: &[f64],
    c: f64,
    alpha: &mut [f64],
    grad: &mut [f64],
    i: usize,
    j: usize,
) -> bool {
    let gap = -y[i] * grad[i] + y[j] * grad[j];
    if gap.is_nan() || gap <= 0.0 {
        return false;
    }
    let mut eta = g.get(i, i) + g.get(j, j) - 2.0 * g.get(i, j);
    if eta <= 0.0 {
        eta = 1e-12;
    }
    let cap_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
    let cap_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
    let t = (gap / eta).min(cap_i).min(cap_j);
    if t.is_nan() || t <= 0.0 {
        return false;
    }

    let old_i = alpha[i];
    let old_j = alpha[j];
    alpha[i] = if t == cap_i {
        if y[i] > 0.0 {
            c
        } else {
            0.0
        }
    } else {
        old_i + y[i] * t
    };
    alpha[j] = if t == cap_j {
        if y[j] > 0.0 {
            0.0
        } else {
            c
        }
    } else {
        old_j - y[j] * t
    };
    let di = alpha[i] - old_i;
    let dj = alpha[j] - old_j;
    if di == 0.0 && dj == 0.0 {
        return false;
    }
    for k in 0..alpha.len() {
        grad[k] += y[k] * (y[i] * di * g.get(k, i) + y[j] * dj * g.get(k, j));
    }
    true
}

fn compute_bias(y: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    let rho = if free > 0 {
        sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else {
        lb
    };
    -rho
}

/// Logs a warning when `g` has a clearly negative eigenvalue.
pub fn warn_if_indefinite(g: &GramMatrix) -> Result<()> {
    let r = psd_report(g, 1e-8)?;
    if !r.is_psd {
        log::warn!(
            "Gram matrix is not positive semidefinite (min eigenvalue {:e}); training anyway",
            r.min_eig
        );
    }
    Ok(())
}

/// One binary model between `classes[pos]` (+1) and `classes[neg]` (−1).
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseModel {
    pub pos: usize,
    pub neg: usize,
    /// Indices into the full training set, ascending.
    pub indices: Vec<usize>,
    pub model: BinaryModel,
}

/// Hyperparameters recorded alongside a trained model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelMeta {
    pub gamma: Option<f64>,
    pub rank: Option<usize>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassModel {
    /// Distinct labels in ascending order.
    pub classes: Vec<String>,
    pub pairwise: Vec<PairwiseModel>,
    pub n_train: usize,
    pub c: f64,
    pub meta: ModelMeta,
}

/// One-vs-one training: a binary model for each class pair on its samples.
pub fn train_multiclass(
    g: &GramMatrix,
    labels: &[String],
    cfg: &SvmConfig,
) -> Result<MulticlassModel> {
    cfg.validate()?;
    check_dim(g.n(), labels.len())?;
    let classes: Vec<String> = labels
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 classes, found {}",
            classes.len()
        )));
    }
    let class_of: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label drawn from classes"))
        .collect();

    let mut pairwise = Vec::with_capacity(classes.len() * (classes.len() - 1) / 2);
    for pos in 0..classes.len() {
        for neg in (pos + 1)..classes.len() {
            let indices: Vec<usize> = (0..labels.len())
                .filter(|&i| class_of[i] == pos || class_of[i] == neg)
                .collect();
            let y: Vec<i8> = indices
                .iter()
                .map(|&i| if class_of[i] == pos { 1 } else { -1 })
                .collect();
            let sub = g.submatrix(&indices);
            let model = train_binary(&sub, &y, cfg)
                .map_err(|e| e.context(format!("pair ({}, {})", classes[pos], classes[neg])))?;
            pairwise.push(PairwiseModel {
                pos,
                neg,
                indices,
                model,
            });
        }
    }
    Ok(MulticlassModel {
        classes,
        pairwise,
        n_train: labels.len(),
        c: cfg.c,
        meta: ModelMeta::default(),
    })
}

impl MulticlassModel {
    pub fn with_meta(mut self, meta: ModelMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Decision values of every pairwise model on one kernel row.
    pub fn pairwise_decisions(&self, row: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_train, row.len())?;
        Ok(self
            .pairwise
            .iter()
            .map(|p| {
                p.model
                    .decision_unchecked(p.indices.iter().map(|&i| row[i]))
            })
            .collect())
    }

    /// Index into `classes` chosen for one kernel row.
    ///
    /// Majority vote; ties go to the tied class with the larger sum of
    /// `|decision|` over the pairwise models it won, then to the earlier class.
    pub fn predict_row(&self, row: &[f64]) -> Result<usize> {
        let decisions = self.pairwise_decisions(row)?;
        let k = self.classes.len();
        let mut votes = vec![0usize; k];
        let mut margin = vec![0.0; k];
        for (p, d) in self.pairwise.iter().zip(&decisions) {
            let winner = if sign_label(*d) > 0 { p.pos } else { p.neg };
            votes[winner] += 1;
            margin[winner] += d.abs();
        }
        let mut best = 0;
        for c in 1..k {
            if votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best]) {
                best = c;
            }
        }
        Ok(best)
    }

    /// Predicted labels for each row of a `test × train` kernel matrix.
    pub fn predict(&self, cross: &Matrix) -> Result<Vec<String>> {
        check_dim(self.n_train, cross.cols())?;
        (0..cross.rows())
            .map(|i| Ok(self.classes[self.predict_row(cross.row(i))?].clone()))
            .collect()
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = String::from("ssgk-svm-model 1\n");
        out.push_str(&format!("n_train {}\n", self.n_train));
        out.push_str(&format!("classes {}", self.classes.len()));
        for c in &self.classes {
            if c.is_empty() || c.chars().any(char::is_whitespace) {
                return Err(Error::invalid(format!(
                    "class label '{c}' cannot be stored: labels must be non-empty without whitespace"
                )));
            }
            out.push(' ');
            out.push_str(c);
        }
        out.push('\n');
        out.push_str(&format!("c {}\n", fmt_f64(self.c)));
        let opt_f = |v: Option<f64>| v.map_or("none".to_string(), fmt_f64);
        out.push_str(&format!("gamma {}\n", opt_f(self.meta.gamma)));
        out.push_str(&format!(
            "rank {}\n",
            self.meta.rank.map_or("none".to_string(), |r| r.to_string())
        ));
        out.push_str(&format!("lambda {}\n", opt_f(self.meta.lambda)));
        out.push_str(&format!("pairs {}\n", self.pairwise.len()));
        for p in &self.pairwise {
            out.push_str(&format!(
                "pair {} {} {} {}\n",
                p.pos,
                p.neg,
                p.indices.len(),
                u8::from(p.model.converged)
            ));
            out.push_str("indices");
            for i in &p.indices {
                out.push_str(&format!(" {i}"));
            }
            out.push_str("\nlabels");
            for y in &p.model.labels {
                out.push_str(if *y > 0 { " +1" } else { " -1" });
            }
            out.push_str("\nalphas\n");
            push_row(&mut out, &p.model.alphas);
            out.push_str(&format!("bias {}\n", fmt_f64(p.model.bias)));
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_text()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut l = Lines::open(path)?;
        let keyed = |l: &mut Lines, key: &str| -> Result<(usize, Vec<String>)> {
            let (n, toks) = l.next_tokens(key)?;
            if toks.first().map(String::as_str) != Some(key) {
                return Err(l.err(n, format!("expected '{key}' line")));
            }
            Ok((n, toks[1..].to_vec()))
        };
        let one = |l: &Lines, n: usize, t: &[String]| -> Result<String> {
            match t {
                [v] => Ok(v.clone()),
                _ => Err(l.err(n, "expected exactly one value")),
            }
        };

        let (n, v) = keyed(&mut l, "ssgk-svm-model")?;
        if one(&l, n, &v)? != "1" {
            return Err(l.err(n, "unsupported model format version"));
        }
        let (n, v) = keyed(&mut l, "n_train")?;
        let n_train = l.parse_usize(n, &one(&l, n, &v)?, "n_train")?;
        let (n, v) = keyed(&mut l, "classes")?;
        let k = l.parse_usize(n, v.first().map_or("", String::as_str), "class count")?;
        if v.len() != k + 1 {
            return Err(l.err(n, format!("expected {k} class labels")));
        }
        let classes = v[1..].to_vec();
        let (n, v) = keyed(&mut l, "c")?;
        let c = l.parse_f64(n, &one(&l, n, &v)?)?;
        let opt_f = |l: &Lines, n: usize, s: String| -> Result<Option<f64>> {
            if s == "none" {
                Ok(None)
            } else {
                l.parse_f64(n, &s).map(Some)
            }
        };
        let (n, v) = keyed(&mut l, "gamma")?;
        let gamma = opt_f(&l, n, one(&l, n, &v)?)?;
        let (n, v) = keyed(&mut l, "rank")?;
        let rank = match one(&l, n, &v)?.as_str() {
            "none" => None,
            s => Some(l.parse_usize(n, s, "rank")?),
        };
        let (n, v) = keyed(&mut l, "lambda")?;
        let lambda = opt_f(&l, n, one(&l, n, &v)?)?;
        let (n, v) = keyed(&mut l, "pairs")?;
        let pairs = l.parse_usize(n, &one(&l, n, &v)?, "pair count")?;

        let mut pairwise = Vec::with_capacity(pairs);
        for _ in 0..pairs {
            let (n, v) = keyed(&mut l, "pair")?;
            if v.len() != 4 {
                return Err(l.err(n, "expected 'pair <pos> <neg> <count> <converged>'"));
            }
            let pos = l.parse_usize(n, &v[0], "class index")?;
            let neg = l.parse_usize(n, &v[1], "class index")?;
            let m = l.parse_usize(n, &v[2], "sample count")?;
            let converged = match v[3].as_str() {
                "0" => false,
                "1" => true,
                _ => return Err(l.err(n, "converged flag must be 0 or 1")),
            };
            if pos >= k || neg >= k || pos == neg {
                return Err(l.err(n, "invalid class pair"));
            }
            let (n, v) = keyed(&mut l, "indices")?;
            if v.len() != m {
                return Err(l.err(n, format!("expected {m} indices")));
            }
            let indices = v
                .iter()
                .map(|t| {
                    let i = l.parse_usize(n, t, "index")?;
                    if i < n_train {
                        Ok(i)
                    } else {
                        Err(l.err(n, format!("index {i} out of range")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let (n, v) = keyed(&mut l, "labels")?;
            if v.len() != m {
                return Err(l.err(n, format!("expected {m} labels")));
            }
            let labels = v
                .iter()
                .map(|t| match t.as_str() {
                    "+1" | "1" => Ok(1),
                    "-1" => Ok(-1),
                    _ => Err(l.err(n, format!("invalid binary label '{t}'"))),
                })
                .collect::<Result<Vec<i8>>>()?;
            keyed(&mut l, "alphas")?;
            let alphas = l.read_row(m, "alphas")?;
            let (n, v) = keyed(&mut l, "bias")?;
            let bias = l.parse_f64(n, &one(&l, n, &v)?)?;
            pairwise.push(PairwiseModel {
                pos,
                neg,
                indices,
                model: BinaryModel {
                    alphas,
                    bias,
                    labels,
                    c,
                    converged,
                    iterations: 0,
                },
            });
        }
        l.expect_end()?;
        Ok(MulticlassModel {
            classes,
            pairwise,
            n_train,
            c,
            meta: ModelMeta {
                gamma,
                rank,
                lambda,
            },
        })
    }
}

pub fn predict(m: &MulticlassModel, cross: &Matrix) -> Result<Vec<String>> {
    m.predict(cross)
}

/// Fraction of correct predictions, shown as a two-decimal percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    pub fn percent(&self) -> f64 {
        100.0 * self.correct as f64 / self.total as f64
    }
}

impl fmt::Display for Accuracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.percent())
    }
}

pub fn accuracy<T: PartialEq>(predicted: &[T], truth: &[T]) -> Result<Accuracy> {
    check_dim(truth.len(), predicted.len())?;
    if truth.is_empty() {
        return Err(Error::invalid("accuracy of an empty prediction set"));
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(Accuracy {
        correct,
        total: truth.len(),
    })
}
