//! Grid search with stratified k-fold cross-validation on the training set,
//! followed by a final fit on all training samples and optional scoring on a
//! held-out test set.
//!
//! Candidate order is ascending `(R, λ, γ, C)`; the first configuration with
//! the highest mean validation accuracy wins, so ties go to smaller ranks,
//! then smaller λ, γ and C. Work is spread over the rayon pool but results
//! are always gathered by index, so output does not depend on thread count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{
    characteristic_path_length, clustering_coefficients, edge_features, mean_clustering_coefficient,
};
use crate::data::{load_matrix, save_factors, Group, ManifestRow, SampleManifest};
use crate::error::{Error, Result};
use crate::factorization::{factorize, FactorizationConfig};
use crate::kernel::{
    build_cross_gram, build_gram, normalize_cross, vector_cross_gram, vector_gram, GramMatrix,
    RbfParams,
};
use crate::linalg::{FactorSet, Matrix, SymmetricMatrix};
use crate::svm::{accuracy, train_multiclass, Accuracy, ModelMeta, MulticlassModel, SvmConfig};
use crate::textio::{write_dense, write_file};

/// How graphs are turned into a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Sparse symmetric factorization followed by the SSGK.
    Ssgk,
    /// RBF on the flattened upper triangle.
    Edge,
    /// RBF on per-node clustering coefficients.
    Cc,
    /// RBF on the mean clustering coefficient.
    CcMean,
    /// RBF on the characteristic path length.
    Cpl,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ssgk => "ssgk",
            Method::Edge => "edge",
            Method::Cc => "cc",
            Method::CcMean => "cc-mean",
            Method::Cpl => "cpl",
        }
    }

    pub fn uses_factorization(&self) -> bool {
        matches!(self, Method::Ssgk)
    }

    /// Feature vector of a raw matrix for the vector-kernel baselines.
    pub fn features(&self, x: &SymmetricMatrix) -> Result<Vec<f64>> {
        match self {
            Method::Ssgk => Err(Error::invalid(
                "ssgk works on factor sets, not feature vectors",
            )),
            Method::Edge => Ok(edge_features(x)),
            Method::Cc => clustering_coefficients(x),
            Method::CcMean => Ok(vec![mean_clustering_coefficient(x)?]),
            Method::Cpl => Ok(vec![characteristic_path_length(x)?]),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ssgk" => Ok(Method::Ssgk),
            "edge" => Ok(Method::Edge),
            "cc" => Ok(Method::Cc),
            "cc-mean" => Ok(Method::CcMean),
            "cpl" => Ok(Method::Cpl),
            _ => Err(Error::invalid(format!(
                "unknown method '{s}'; expected ssgk, edge, cc, cc-mean or cpl"
            ))),
        }
    }
}

/// Hyperparameter ranges, each kept sorted and de-duplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub r_values: Vec<usize>,
    pub lambda_values: Vec<f64>,
}

fn powers_of_two(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

impl Default for GridSpec {
    /// `C, γ ∈ {2^-8 … 2^8}`, `R ∈ {1 … 12}`, `λ ∈ {2^-2 … 2^8}`.
    fn default() -> Self {
        GridSpec {
            c_values: powers_of_two(-8, 8),
            gamma_values: powers_of_two(-8, 8),
            r_values: (1..=12).collect(),
            lambda_values: powers_of_two(-2, 8),
        }
    }
}

impl GridSpec {
    pub fn new(
        c_values: Vec<f64>,
        gamma_values: Vec<f64>,
        r_values: Vec<usize>,
        lambda_values: Vec<f64>,
    ) -> Result<Self> {
        let g = GridSpec {
            c_values: sorted_reals(c_values),
            gamma_values: sorted_reals(gamma_values),
            r_values: r_values
                .into_iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
            lambda_values: sorted_reals(lambda_values),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, vals) in [("C", &self.c_values), ("gamma", &self.gamma_values)] {
            if vals.is_empty() {
                return Err(Error::invalid(format!("empty {name} grid")));
            }
            if vals.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::invalid(format!(
                    "{name} grid values must be positive"
                )));
            }
        }
        if self.r_values.is_empty() {
            return Err(Error::invalid("empty rank grid"));
        }
        if self.r_values.contains(&0) {
            return Err(Error::invalid("ranks must be at least 1"));
        }
        if self.lambda_values.is_empty() {
            return Err(Error::invalid("empty lambda grid"));
        }
        if self
            .lambda_values
            .iter()
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::invalid("lambda grid values must be non-negative"));
        }
        Ok(())
    }
}

fn sorted_reals(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn parse_real_atom(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::invalid(format!("invalid grid value '{s}'"));
    if let Some(exp) = s.strip_prefix("2^") {
        let e: i32 = exp.trim().parse().map_err(|_| bad())?;
        return Ok(2f64.powi(e));
    }
    s.parse::<f64>().map_err(|_| bad())
}

/// Comma list of reals; an item may be `2^a` or a range `2^a..2^b`
/// (every power of two in between).
pub fn parse_real_grid(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let exp = |t: &str| -> Result<i32> {
                t.trim()
                    .strip_prefix("2^")
                    .and_then(|e| e.trim().parse().ok())
                    .ok_or_else(|| {
                        Error::invalid(format!("range '{item}' must look like 2^a..2^b"))
                    })
            };
            let (a, b) = (exp(lo)?, exp(hi)?);
            if a > b {
                return Err(Error::invalid(format!("empty range '{item}'")));
            }
            out.extend(powers_of_two(a, b));
        } else {
            out.push(parse_real_atom(item)?);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid(format!("empty grid '{s}'")));
    }
    Ok(out)
}

/// Comma list of ranks; an item may be a range `a..b` (inclusive).
pub fn parse_rank_grid(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    let bad = |t: &str| Error::invalid(format!("invalid rank '{t}'"));
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let a: usize = lo.trim().parse().map_err(|_| bad(item))?;
            let b: usize = hi.trim().parse().map_err(|_| bad(item))?;
            if a > b {
                return Err(Error::invalid(format!("empty range '{item}'")));
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid(format!("empty rank grid '{s}'")));
    }
    Ok(out)
}

/// Splits sample indices into `k` folds, class by class.
///
/// Each class's indices are shuffled with ChaCha8 seeded by `seed` and dealt
/// round-robin, continuing the deal across classes so fold sizes stay
/// balanced. Indices inside a fold are ascending.
pub fn stratified_folds(labels: &[String], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.as_str()).or_default().push(i);
    }
    if let Some((c, idx)) = by_class.iter().find(|(_, v)| v.len() < k) {
        return Err(Error::invalid(format!(
            "class '{c}' has {} training samples, fewer than the {k} folds",
            idx.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for idx in by_class.values() {
        let mut idx = idx.clone();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// One sample: an identifier, its class and its connectivity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub label: String,
    pub matrix: SymmetricMatrix,
}

/// What a kernel is computed from.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Factors(Vec<FactorSet>),
    Vectors(Vec<Vec<f64>>),
}

impl Representation {
    pub fn len(&self) -> usize {
        match self {
            Representation::Factors(f) => f.len(),
            Representation::Vectors(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gram(&self, gamma: f64, normalize: bool) -> Result<GramMatrix> {
        let p = RbfParams::new(gamma)?;
        let g = match self {
            Representation::Factors(f) => build_gram(f, &p)?,
            Representation::Vectors(v) => vector_gram(v, &p)?,
        };
        Ok(if normalize { g.normalized() } else { g })
    }

    /// `self × train` kernel block.
    pub fn cross(&self, train: &Representation, gamma: f64, normalize: bool) -> Result<Matrix> {
        let p = RbfParams::new(gamma)?;
        let m = match (self, train) {
            (Representation::Factors(a), Representation::Factors(b)) => build_cross_gram(a, b, &p)?,
            (Representation::Vectors(a), Representation::Vectors(b)) => {
                vector_cross_gram(a, b, &p)?
            }
            _ => {
                return Err(Error::invalid(
                    "cannot mix factor and vector representations",
                ))
            }
        };
        if !normalize {
            return Ok(m);
        }
        normalize_cross(&m, &self.self_kernels(&p), &train.self_kernels(&p))
    }

    fn self_kernels(&self, p: &RbfParams) -> Vec<f64> {
        match self {
            Representation::Factors(f) => f
                .iter()
                .map(|x| crate::kernel::ssgk(x, x, p).expect("same dimension"))
                .collect(),
            // RBF self-similarity is always 1
            Representation::Vectors(v) => vec![1.0; v.len()],
        }
    }
}

/// Factorizes every sample (in parallel, gathered by index).
pub fn factorize_all(samples: &[Sample], cfg: &FactorizationConfig) -> Result<Vec<FactorSet>> {
    samples
        .par_iter()
        .map(|s| {
            factorize(&s.matrix, cfg)
                .map(|r| r.factors)
                .map_err(|e| e.context(format!("factorizing {}", s.id)))
        })
        .collect()
}

/// Representation of `samples` under `method`; `factor_cfg` only matters for SSGK.
pub fn represent(
    samples: &[Sample],
    method: Method,
    factor_cfg: &FactorizationConfig,
) -> Result<Representation> {
    if method.uses_factorization() {
        return Ok(Representation::Factors(factorize_all(samples, factor_cfg)?));
    }
    let feats = samples
        .par_iter()
        .map(|s| {
            method
                .features(&s.matrix)
                .map_err(|e| e.context(format!("{} features of {}", method.as_str(), s.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Representation::Vectors(feats))
}

#[derive(Debug, Clone)]
pub struct GridSearchConfig {
    pub method: Method,
    pub grid: GridSpec,
    pub folds: usize,
    pub seed: u64,
    pub normalize: bool,
    /// Solver settings; `rank` and `lambda` are overwritten per grid cell.
    pub factorization: FactorizationConfig,
    /// SVM settings; `c` is overwritten per grid cell.
    pub svm: SvmConfig,
}

impl GridSearchConfig {
    pub fn new(method: Method, grid: GridSpec) -> Self {
        GridSearchConfig {
            method,
            grid,
            folds: 3,
            seed: 0,
            normalize: false,
            factorization: FactorizationConfig::default(),
            svm: SvmConfig::default(),
        }
    }

    fn factor_cfg(&self, rank: usize, lambda: f64) -> FactorizationConfig {
        FactorizationConfig {
            rank,
            lambda,
            ..self.factorization.clone()
        }
    }

    fn svm_cfg(&self, c: f64) -> SvmConfig {
        SvmConfig {
            c,
            ..self.svm.clone()
        }
    }
}

/// One evaluated grid configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub rank: Option<usize>,
    pub lambda: Option<f64>,
    pub gamma: f64,
    pub c: f64,
    /// Per-fold validation accuracy in percent.
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub method: Method,
    pub band: Option<String>,
    pub folds: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub rows: Vec<GridRow>,
    /// Index into `rows`.
    pub best: usize,
    pub train_accuracy: Accuracy,
    pub test_accuracy: Option<Accuracy>,
    /// Not part of the serialized report, which must be reproducible.
    pub wall_time: Duration,
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or("-".to_string(), |v| v.to_string())
}

impl ExperimentReport {
    pub fn best_row(&self) -> &GridRow {
        &self.rows[self.best]
    }

    /// Aligned plain-text table followed by the selection summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method: {}", self.method.as_str());
        if let Some(b) = &self.band {
            let _ = writeln!(out, "band: {b}");
        }
        let _ = writeln!(
            out,
            "folds: {}  seed: {}  train samples: {}  test samples: {}",
            self.folds, self.seed, self.n_train, self.n_test
        );
        let _ = writeln!(
            out,
            "{:>4}  {:>12}  {:>12}  {:>12}  {:>8}",
            "R", "lambda", "gamma", "C", "val_acc"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>4}  {:>12}  {:>12}  {:>12}  {:>8.2}",
                fmt_opt(r.rank),
                fmt_opt(r.lambda),
                r.gamma,
                r.c,
                r.mean_accuracy
            );
        }
        let b = self.best_row();
        let _ = writeln!(
            out,
            "best: R={} lambda={} gamma={} C={} val_acc={:.2}",
            fmt_opt(b.rank),
            fmt_opt(b.lambda),
            b.gamma,
            b.c,
            b.mean_accuracy
        );
        let _ = writeln!(
            out,
            "train accuracy: {} ({}/{})",
            self.train_accuracy, self.train_accuracy.correct, self.train_accuracy.total
        );
        match &self.test_accuracy {
            Some(a) => {
                let _ = writeln!(out, "test accuracy: {a} ({}/{})", a.correct, a.total);
            }
            None => out.push_str("test accuracy: -\n"),
        }
        out
    }

    /// One CSV line per grid row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,lambda,gamma,c,val_acc");
        for f in 0..self.folds {
            let _ = write!(out, ",fold{f}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                r.rank.map_or(String::new(), |v| v.to_string()),
                r.lambda.map_or(String::new(), |v| v.to_string()),
                r.gamma,
                r.c,
                r.mean_accuracy
            );
            for a in &r.fold_accuracies {
                let _ = write!(out, ",{a}");
            }
            out.push('\n');
        }
        out
    }
}

/// Everything produced by the winning configuration.
#[derive(Debug, Clone)]
pub struct FinalFit {
    pub train: Representation,
    pub test: Option<Representation>,
    pub train_gram: GramMatrix,
    pub test_cross: Option<Matrix>,
    pub model: MulticlassModel,
    pub train_predictions: Vec<String>,
    pub test_predictions: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct GridSearchOutcome {
    pub report: ExperimentReport,
    pub fit: FinalFit,
}

/// Cross-validated accuracy (percent) of every C on one precomputed Gram.
fn cv_scores(
    g: &GramMatrix,
    labels: &[String],
    folds: &[Vec<usize>],
    cfg: &GridSearchConfig,
) -> Result<Vec<Vec<f64>>> {
    let n = labels.len();
    let mut scores = vec![Vec::with_capacity(folds.len()); cfg.grid.c_values.len()];
    for fold in folds {
        let mut in_fold = vec![false; n];
        for &i in fold {
            in_fold[i] = true;
        }
        let train_idx: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
        let sub = g.submatrix(&train_idx);
        let block = g.block(fold, &train_idx);
        let sub_labels: Vec<String> = train_idx.iter().map(|&i| labels[i].clone()).collect();
        let truth: Vec<String> = fold.iter().map(|&i| labels[i].clone()).collect();
        for (ci, &c) in cfg.grid.c_values.iter().enumerate() {
            let model = train_multiclass(&sub, &sub_labels, &cfg.svm_cfg(c))?;
            let pred = model.predict(&block)?;
            scores[ci].push(accuracy(&pred, &truth)?.percent());
        }
    }
    Ok(scores)
}

/// Full grid search; `test` may be empty.
pub fn grid_search(
    train: &[Sample],
    test: &[Sample],
    cfg: &GridSearchConfig,
) -> Result<GridSearchOutcome> {
    let started = Instant::now();
    cfg.grid.validate()?;
    cfg.svm.validate()?;
    if train.is_empty() {
        return Err(Error::invalid("no training samples"));
    }
    let labels: Vec<String> = train.iter().map(|s| s.label.clone()).collect();
    let folds = stratified_folds(&labels, cfg.folds, cfg.seed)?;
    let distinct: BTreeSet<&String> = labels.iter().collect();
    if distinct.len() < 2 {
        return Err(Error::invalid("training set needs at least 2 classes"));
    }

    // (R, λ) pairs; baselines have a single feature representation
    let reps: Vec<(Option<usize>, Option<f64>)> = if cfg.method.uses_factorization() {
        cfg.grid
            .r_values
            .iter()
            .flat_map(|&r| {
                cfg.grid
                    .lambda_values
                    .iter()
                    .map(move |&l| (Some(r), Some(l)))
            })
            .collect()
    } else {
        vec![(None, None)]
    };

    let mut rows = Vec::new();
    for &(rank, lambda) in &reps {
        log::info!(
            "evaluating {} R={} lambda={}",
            cfg.method.as_str(),
            fmt_opt(rank),
            fmt_opt(lambda)
        );
        let fcfg = cfg.factor_cfg(rank.unwrap_or(1), lambda.unwrap_or(0.0));
        let rep = represent(train, cfg.method, &fcfg)?;
        let per_gamma = cfg
            .grid
            .gamma_values
            .par_iter()
            .map(|&gamma| {
                let g = rep.gram(gamma, cfg.normalize)?;
                cv_scores(&g, &labels, &folds, cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        for (gi, scores) in per_gamma.into_iter().enumerate() {
            for (ci, fold_accuracies) in scores.into_iter().enumerate() {
                let mean_accuracy = fold_accuracies.iter().sum::<f64>() / folds.len() as f64;
                rows.push(GridRow {
                    rank,
                    lambda,
                    gamma: cfg.grid.gamma_values[gi],
                    c: cfg.grid.c_values[ci],
                    fold_accuracies,
                    mean_accuracy,
                });
            }
        }
    }

    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.mean_accuracy > rows[best].mean_accuracy {
            best = i;
        }
    }
    let winner = rows[best].clone();

    let fit = final_fit(train, test, cfg, &winner)?;
    let train_accuracy = accuracy(&fit.train_predictions, &labels)?;
    let test_accuracy = match &fit.test_predictions {
        Some(p) => {
            let truth: Vec<String> = test.iter().map(|s| s.label.clone()).collect();
            Some(accuracy(p, &truth)?)
        }
        None => None,
    };

    Ok(GridSearchOutcome {
        report: ExperimentReport {
            method: cfg.method,
            band: None,
            folds: cfg.folds,
            seed: cfg.seed,
            n_train: train.len(),
            n_test: test.len(),
            rows,
            best,
            train_accuracy,
            test_accuracy,
            wall_time: started.elapsed(),
        },
        fit,
    })
}

/// Retrains on all of `train` with one configuration and predicts `test`.
pub fn final_fit(
    train: &[Sample],
    test: &[Sample],
    cfg: &GridSearchConfig,
    row: &GridRow,
) -> Result<FinalFit> {
    let fcfg = cfg.factor_cfg(row.rank.unwrap_or(1), row.lambda.unwrap_or(0.0));
    let train_rep = represent(train, cfg.method, &fcfg)?;
    let train_gram = train_rep.gram(row.gamma, cfg.normalize)?;
    let labels: Vec<String> = train.iter().map(|s| s.label.clone()).collect();
    let model = train_multiclass(&train_gram, &labels, &cfg.svm_cfg(row.c))?.with_meta(ModelMeta {
        gamma: Some(row.gamma),
        rank: row.rank,
        lambda: row.lambda,
    });
    let train_predictions = model.predict(train_gram.values())?;

    let (test_rep, test_cross, test_predictions) = if test.is_empty() {
        (None, None, None)
    } else {
        let rep = represent(test, cfg.method, &fcfg)?;
        let cross = rep.cross(&train_rep, row.gamma, cfg.normalize)?;
        let pred = model.predict(&cross)?;
        (Some(rep), Some(cross), Some(pred))
    };
    Ok(FinalFit {
        train: train_rep,
        test: test_rep,
        train_gram,
        test_cross,
        model,
        train_predictions,
        test_predictions,
    })
}

/// Reads the matrices behind manifest rows; ids are paths relative to `base`.
pub fn load_samples(rows: &[&ManifestRow], base: &Path) -> Result<Vec<Sample>> {
    rows.par_iter()
        .map(|r| {
            Ok(Sample {
                id: sample_id(&r.path, base),
                label: r.label.clone(),
                matrix: load_matrix(&r.path)?,
            })
        })
        .collect()
}

pub fn sample_id(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

/// `path,predicted[,truth]` CSV.
pub fn predictions_csv(
    ids: &[String],
    predicted: &[String],
    truth: Option<&[String]>,
) -> Result<String> {
    if ids.len() != predicted.len() || truth.is_some_and(|t| t.len() != ids.len()) {
        return Err(Error::DimensionMismatch {
            expected: ids.len(),
            found: predicted.len(),
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| Error::invalid(format!("CSV encoding failed: {e}"));
    match truth {
        Some(_) => w.write_record(["path", "predicted", "truth"]),
        None => w.write_record(["path", "predicted"]),
    }
    .map_err(map)?;
    for (i, (id, p)) in ids.iter().zip(predicted).enumerate() {
        match truth {
            Some(t) => w.write_record([id, p, &t[i]]),
            None => w.write_record([id, p]),
        }
        .map_err(map)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::invalid(format!("CSV encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
}

/// Writes every artifact of a grid search under `dir`.
///
/// Layout: `factors/{train,test}_NNNN.txt` plus `factors.csv` (SSGK only),
/// `gram.txt`, `cross.txt`, `model.txt`, `predictions_train.csv`,
/// `predictions_test.csv`, `report.txt` and, if `csv`, `report.csv`.
pub fn write_artifacts(
    outcome: &GridSearchOutcome,
    train: &[Sample],
    test: &[Sample],
    dir: &Path,
    csv: bool,
) -> Result<()> {
    let fit = &outcome.fit;
    let groups = [
        (Group::Train, train, Some(&fit.train)),
        (Group::Test, test, fit.test.as_ref()),
    ];
    let mut factor_rows = Vec::new();
    for (group, samples, rep) in groups {
        if let Some(Representation::Factors(fs)) = rep {
            for (i, (f, s)) in fs.iter().zip(samples).enumerate() {
                let path = dir
                    .join("factors")
                    .join(format!("{}_{i:04}.txt", group.as_str()));
                save_factors(f, &path)?;
                factor_rows.push(ManifestRow {
                    path,
                    label: s.label.clone(),
                    group,
                });
            }
        }
    }
    if !factor_rows.is_empty() {
        SampleManifest::new(factor_rows)?.write(&dir.join("factors.csv"))?;
    }

    let train_ids: Vec<String> = train.iter().map(|s| s.id.clone()).collect();
    fit.train_gram
        .clone()
        .with_row_ids(train_ids.clone())?
        .write(&dir.join("gram.txt"))?;
    fit.model.write(&dir.join("model.txt"))?;
    let train_truth: Vec<String> = train.iter().map(|s| s.label.clone()).collect();
    write_file(
        &dir.join("predictions_train.csv"),
        &predictions_csv(&train_ids, &fit.train_predictions, Some(&train_truth))?,
    )?;
    if let (Some(cross), Some(pred)) = (&fit.test_cross, &fit.test_predictions) {
        write_dense(&dir.join("cross.txt"), cross)?;
        let ids: Vec<String> = test.iter().map(|s| s.id.clone()).collect();
        let truth: Vec<String> = test.iter().map(|s| s.label.clone()).collect();
        write_file(
            &dir.join("predictions_test.csv"),
            &predictions_csv(&ids, pred, Some(&truth))?,
        )?;
    }
    write_file(&dir.join("report.txt"), &outcome.report.to_text())?;
    if csv {
        write_file(&dir.join("report.csv"), &outcome.report.to_csv())?;
    }
    Ok(())
}

/// Methods as rows, bands as columns, test accuracy in each cell.
pub fn accuracy_table(entries: &[(String, String, Option<Accuracy>)]) -> String {
    let mut methods: Vec<&str> = Vec::new();
    let mut bands: Vec<&str> = Vec::new();
    for (m, b, _) in entries {
        if !methods.contains(&m.as_str()) {
            methods.push(m);
        }
        if !bands.contains(&b.as_str()) {
            bands.push(b);
        }
    }
    let mut out = format!("{:<10}", "Method");
    for b in &bands {
        let _ = write!(out, " {b:>8}");
    }
    out.push('\n');
    for m in &methods {
        let _ = write!(out, "{m:<10}");
        for b in &bands {
            let cell = entries
                .iter()
                .find(|(em, eb, _)| em == m && eb == b)
                .and_then(|(_, _, a)| a.as_ref())
                .map_or("-".to_string(), |a| a.to_string());
            let _ = write!(out, " {cell:>8}");
        }
        out.push('\n');
    }
    out
}
