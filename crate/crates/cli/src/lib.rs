//! The `ssgk` command line: factorization, Gram construction, SVM training
//! and prediction, cross-validated grid search, band averaging and a
//! synthetic dataset generator.
//!
//! Every failure is reported on standard error with a first line of the form
//! `error: <code>: <message>`. Exit status is 0 on success, 1 for usage
//! errors, 2 for data errors and 3 when a numerical method fails.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use ssgk::data::{
    band_average, generate_synthetic, load_factors, load_manifest, load_stacked, save_factors,
    save_matrix, write_synthetic, BandSpec, Group, ManifestRow, SampleManifest, SyntheticConfig,
};
use ssgk::experiment::{
    accuracy_table, grid_search, load_samples, parse_rank_grid, parse_real_grid, predictions_csv,
    sample_id, write_artifacts, GridSearchConfig, GridSpec, Method, Representation, Sample,
};
use ssgk::factorization::factorize;
use ssgk::kernel::psd_report;
use ssgk::linalg::frobenius_residual;
use ssgk::svm::{accuracy, train_multiclass};
use ssgk::textio::{dense_to_text, fmt_f64, read_dense, write_file};
use ssgk::{Error, FactorSet, FactorizationConfig, GramMatrix, MulticlassModel, SvmConfig};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag values.
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_DATA,
        }
    }

    /// `error: <code>: <message>` on a single line.
    pub fn first_line(&self) -> String {
        let (code, msg) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Core(e) => (e.code(), e.to_string()),
        };
        format!("error: {code}: {}", msg.replace('\n', " "))
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "ssgk",
    version,
    about = "Structure-preserving symmetric graph kernel pipeline"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sparse symmetric factorization of one matrix file or every manifest row.
    Factorize(FactorizeArgs),
    /// Kernel (Gram or cross-Gram) matrix over factor files or raw matrices.
    Gram(GramArgs),
    /// Train a one-vs-one SVM on a precomputed Gram matrix.
    Train(TrainArgs),
    /// Predict from a cross-Gram matrix, or score a predictions file.
    Predict(PredictArgs),
    /// Cross-validated hyperparameter search with a final fit.
    GridSearch(GridSearchArgs),
    /// Average frequency-stacked tensors over a band.
    Bands(BandsArgs),
    /// Write a seeded synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GroupArg {
    Train,
    Test,
}

impl From<GroupArg> for Group {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::Train => Group::Train,
            GroupArg::Test => Group::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Ssgk,
    Edge,
    Cc,
    CcMean,
    Cpl,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ssgk => Method::Ssgk,
            MethodArg::Edge => Method::Edge,
            MethodArg::Cc => Method::Cc,
            MethodArg::CcMean => Method::CcMean,
            MethodArg::Cpl => Method::Cpl,
        }
    }
}

/// Which samples to read: a manifest (optionally one group) or plain files.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV manifest with columns path,label,group.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Only use manifest rows of this group.
    #[arg(long, value_enum)]
    pub group: Option<GroupArg>,
    /// Input files, used when no manifest is given.
    pub files: Vec<PathBuf>,
}

/// One loaded input: id, optional manifest row and path.
struct Input {
    id: String,
    path: PathBuf,
    row: Option<ManifestRow>,
}

impl InputArgs {
    fn resolve(&self) -> CliResult<Vec<Input>> {
        match (&self.manifest, self.files.is_empty()) {
            (Some(_), false) => Err(usage("give either --manifest or input files, not both")),
            (None, true) => Err(usage("no input: give --manifest or input files")),
            (None, false) => {
                if self.group.is_some() {
                    return Err(usage("--group needs --manifest"));
                }
                Ok(self
                    .files
                    .iter()
                    .map(|p| Input {
                        id: p.file_name().map_or_else(
                            || p.display().to_string(),
                            |n| n.to_string_lossy().into_owned(),
                        ),
                        path: p.clone(),
                        row: None,
                    })
                    .collect())
            }
            (Some(m), true) => {
                let manifest = load_manifest(m)?;
                let base = manifest_dir(m);
                let rows: Vec<ManifestRow> = match self.group {
                    Some(g) => manifest.group(g.into()).into_iter().cloned().collect(),
                    None => manifest.rows,
                };
                if rows.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "{}: no rows in the selected group",
                        m.display()
                    ))
                    .into());
                }
                Ok(rows
                    .into_iter()
                    .map(|r| Input {
                        id: sample_id(&r.path, &base),
                        path: r.path.clone(),
                        row: Some(r),
                    })
                    .collect())
            }
        }
    }
}

/// Message without the error-kind prefix.
fn bare(e: &Error) -> String {
    match e.root() {
        Error::InvalidArgument(m) => m.clone(),
        other => other.to_string(),
    }
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().unwrap_or(Path::new("")).to_path_buf()
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Number of rank-one components R.
    #[arg(long)]
    pub rank: usize,
    /// ℓ1 weight λ.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 0.5)]
    pub backtrack_shrink: f64,
    #[arg(long, default_value_t = 1.0)]
    pub initial_step: f64,
    /// Rotated spectral starts per column pair (0 or 1: plain spectral start only).
    #[arg(long, default_value_t = 12)]
    pub rotation_starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    fn config(&self) -> FactorizationConfig {
        FactorizationConfig {
            rank: self.rank,
            lambda: self.lambda,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            backtrack_shrink: self.backtrack_shrink,
            initial_step: self.initial_step,
            rotation_starts: self.rotation_starts,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory for factor files, `factors.csv` and `report.txt`.
    #[arg(long)]
    pub out: PathBuf,
    /// Exit with status 3 if any sample hits the iteration cap.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct GramArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Kernel method; ssgk reads factor files, the others raw matrices.
    #[arg(long, value_enum, default_value = "ssgk")]
    pub method: MethodArg,
    /// RBF width γ.
    #[arg(long)]
    pub gamma: f64,
    /// Cosine-normalize: K(x,y) / sqrt(K(x,x) K(y,y)).
    #[arg(long)]
    pub normalize: bool,
    /// Training manifest: write the cross-Gram (inputs × these samples).
    #[arg(long)]
    pub against: Option<PathBuf>,
    /// Group of the --against manifest to use.
    #[arg(long, value_enum)]
    pub against_group: Option<GroupArg>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    /// Soft-margin weight C.
    #[arg(long)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub kkt_tol: f64,
    #[arg(long, default_value_t = 10)]
    pub max_passes: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SvmArgs {
    fn config(&self) -> SvmConfig {
        SvmConfig {
            c: self.c,
            kkt_tol: self.kkt_tol,
            max_passes: self.max_passes,
            max_iters: self.max_iters,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training Gram matrix; rows follow manifest order.
    #[arg(long)]
    pub gram: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub group: Option<GroupArg>,
    #[command(flatten)]
    pub svm: SvmArgs,
    /// Model output file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, requires = "cross")]
    pub model: Option<PathBuf>,
    /// Cross-Gram matrix (test × train).
    #[arg(long, requires = "model")]
    pub cross: Option<PathBuf>,
    /// Manifest of the test samples, for ids and truth labels.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub group: Option<GroupArg>,
    /// Predictions CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Score an existing predictions CSV (path,predicted[,truth]) instead.
    #[arg(long, conflicts_with_all = ["model", "cross", "manifest"])]
    pub score: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridSearchArgs {
    /// Manifest with train rows (and optionally test rows).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Separate manifest for the test rows.
    #[arg(long)]
    pub test_manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ssgk")]
    pub method: MethodArg,
    /// C values, e.g. `2^-8..2^8` or `0.5,1,2`.
    #[arg(long, value_parser = real_grid, default_value = "2^-8..2^8")]
    pub c_grid: RealList,
    /// γ values.
    #[arg(long, value_parser = real_grid, default_value = "2^-8..2^8")]
    pub gamma_grid: RealList,
    /// Ranks, e.g. `1..12` or `2,3,4`.
    #[arg(long, value_parser = rank_grid, default_value = "1..12")]
    pub rank_grid: RankList,
    /// λ values.
    #[arg(long, value_parser = real_grid, default_value = "2^-2..2^8")]
    pub lambda_grid: RealList,
    #[arg(long, default_value_t = 3)]
    pub folds: usize,
    /// Seed for fold assignment.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub normalize: bool,
    /// Treat manifest paths as stacked tensors and run once per band
    /// (comma list of built-in names), adding a methods-by-bands table.
    #[arg(long, value_delimiter = ',')]
    pub bands: Vec<String>,
    /// Artifact directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write report.csv.
    #[arg(long)]
    pub csv: bool,
}

/// Parsed as one value holding a whole grid.
pub type RealList = Vec<f64>;
pub type RankList = Vec<usize>;

fn real_grid(s: &str) -> Result<Vec<f64>, String> {
    parse_real_grid(s).map_err(|e| bare(&e))
}

fn rank_grid(s: &str) -> Result<Vec<usize>, String> {
    parse_rank_grid(s).map_err(|e| bare(&e))
}

#[derive(Debug, Args)]
pub struct BandsArgs {
    /// Manifest of stacked tensor files.
    #[arg(long)]
    pub manifest: PathBuf,
    /// delta, theta, alpha, beta or all.
    #[arg(long)]
    pub band: String,
    /// Output directory for band matrices and `manifest.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    #[arg(long, default_value_t = 3)]
    pub template_rank: usize,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, default_value_t = 20)]
    pub train_per_class: usize,
    #[arg(long, default_value_t = 10)]
    pub test_per_class: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs a parsed command line and returns what belongs on standard output.
pub fn run(cli: Cli) -> CliResult<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| usage(format!("cannot start worker threads: {e}")))?;
    pool.install(|| match cli.command {
        Command::Factorize(a) => cmd_factorize(&a),
        Command::Gram(a) => cmd_gram(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::GridSearch(a) => cmd_grid_search(&a),
        Command::Bands(a) => cmd_bands(&a),
        Command::Synth(a) => cmd_synth(&a),
    })
}

fn cmd_factorize(a: &FactorizeArgs) -> CliResult<String> {
    let cfg = a.solver.config();
    cfg.validate()?;
    let inputs = a.input.resolve()?;
    let results = {
        use rayon::prelude::*;
        inputs
            .par_iter()
            .map(|inp| {
                let x = ssgk::data::load_matrix(&inp.path)?;
                let r = factorize(&x, &cfg).map_err(|e| e.context(format!("sample {}", inp.id)))?;
                let resid = frobenius_residual(&x, &r.factors)?;
                Ok((r, resid))
            })
            .collect::<Result<Vec<_>, Error>>()?
    };

    let mut report = format!(
        "{:<32}  {:>24}  {:>24}  {:>10}  {}\n",
        "sample", "objective", "residual", "iterations", "converged"
    );
    let mut rows = Vec::new();
    let mut capped = Vec::new();
    for (inp, (r, resid)) in inputs.iter().zip(&results) {
        let path = a.out.join(factor_name(&inp.id));
        save_factors(&r.factors, &path)?;
        let _ = writeln!(
            report,
            "{:<32}  {:>24}  {:>24}  {:>10}  {}",
            inp.id,
            fmt_f64(r.final_objective()),
            fmt_f64(*resid),
            r.iterations,
            r.converged
        );
        if !r.converged {
            capped.push(inp.id.clone());
        }
        if let Some(row) = &inp.row {
            rows.push(ManifestRow {
                path,
                label: row.label.clone(),
                group: row.group,
            });
        }
    }
    if !rows.is_empty() {
        SampleManifest::new(rows)?.write(&a.out.join("factors.csv"))?;
    }
    write_file(&a.out.join("report.txt"), &report)?;
    if !capped.is_empty() {
        let msg = format!("iteration cap reached for {}", capped.join(", "));
        if a.strict {
            return Err(Error::NotConverged(msg).into());
        }
        log::warn!("{msg}");
    }
    Ok(report)
}

/// Output file name for the factors of sample `id`.
fn factor_name(id: &str) -> String {
    let stem = id.strip_suffix(".txt").unwrap_or(id);
    format!("{stem}.factors.txt")
}

/// Loads inputs as the representation `method` needs, naming bad files.
fn load_representation(inputs: &[Input], method: Method) -> CliResult<Representation> {
    if method.uses_factorization() {
        let sets = inputs
            .iter()
            .map(|i| load_factors(&i.path))
            .collect::<Result<Vec<FactorSet>, Error>>()?;
        if let Some(k) = sets.iter().position(|s| s.dim() != sets[0].dim()) {
            return Err(Error::DimensionMismatch {
                expected: sets[0].dim(),
                found: sets[k].dim(),
            }
            .context(format!(
                "factor dimension of {} differs from {}",
                inputs[k].path.display(),
                inputs[0].path.display()
            ))
            .into());
        }
        return Ok(Representation::Factors(sets));
    }
    let feats = inputs
        .iter()
        .map(|i| {
            let x = ssgk::data::load_matrix(&i.path)?;
            method.features(&x).map_err(|e| {
                e.context(format!(
                    "{} features of {}",
                    method.as_str(),
                    i.path.display()
                ))
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if let Some(k) = feats.iter().position(|f| f.len() != feats[0].len()) {
        return Err(Error::DimensionMismatch {
            expected: feats[0].len(),
            found: feats[k].len(),
        }
        .context(format!(
            "feature length of {} differs from {}",
            inputs[k].path.display(),
            inputs[0].path.display()
        ))
        .into());
    }
    Ok(Representation::Vectors(feats))
}

fn cmd_gram(a: &GramArgs) -> CliResult<String> {
    if !(a.gamma > 0.0 && a.gamma.is_finite()) {
        return Err(usage(format!("--gamma must be positive, got {}", a.gamma)));
    }
    let method: Method = a.method.into();
    let inputs = a.input.resolve()?;
    let rep = load_representation(&inputs, method)?;

    let text = match &a.against {
        None => {
            let g = rep.gram(a.gamma, a.normalize)?;
            let r = psd_report(&g, 1e-8)?;
            eprintln!(
                "psd: {} (min eigenvalue {:e}, max eigenvalue {:e})",
                r.is_psd, r.min_eig, r.max_eig
            );
            g.to_text()
        }
        Some(m) => {
            let against = InputArgs {
                manifest: Some(m.clone()),
                group: a.against_group,
                files: Vec::new(),
            }
            .resolve()?;
            let train = load_representation(&against, method)?;
            let cross = rep
                .cross(&train, a.gamma, a.normalize)
                .map_err(|e| e.context(format!("cross-Gram against {}", m.display())))?;
            dense_to_text(&cross)
        }
    };
    match &a.out {
        Some(p) => {
            write_file(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn manifest_labels(path: &Path, group: Option<GroupArg>) -> CliResult<Vec<Input>> {
    InputArgs {
        manifest: Some(path.to_path_buf()),
        group,
        files: Vec::new(),
    }
    .resolve()
}

fn cmd_train(a: &TrainArgs) -> CliResult<String> {
    let g = GramMatrix::read(&a.gram)?;
    let inputs = manifest_labels(&a.manifest, a.group)?;
    if inputs.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: inputs.len(),
        }
        .context(format!(
            "{} has {} samples but {} lists {}",
            a.gram.display(),
            g.n(),
            a.manifest.display(),
            inputs.len()
        ))
        .into());
    }
    let labels: Vec<String> = inputs.iter().map(label_of).collect();
    let model = train_multiclass(&g, &labels, &a.svm.config())?;
    model.write(&a.out)?;
    let acc = accuracy(&model.predict(g.values())?, &labels)?;
    Ok(format!(
        "train accuracy: {acc} ({}/{})\n",
        acc.correct, acc.total
    ))
}

fn label_of(i: &Input) -> String {
    i.row.as_ref().map(|r| r.label.clone()).unwrap_or_default()
}

fn cmd_predict(a: &PredictArgs) -> CliResult<String> {
    if let Some(p) = &a.score {
        return score_file(p);
    }
    let (Some(model_path), Some(cross_path)) = (&a.model, &a.cross) else {
        return Err(usage("predict needs --model and --cross, or --score"));
    };
    let model = MulticlassModel::read(model_path)?;
    let cross = read_dense(cross_path)?;
    let pred = model.predict(&cross).map_err(|e| {
        e.context(format!(
            "{} against {}",
            cross_path.display(),
            model_path.display()
        ))
    })?;

    let (ids, truth): (Vec<String>, Option<Vec<String>>) = match &a.manifest {
        Some(m) => {
            let inputs = manifest_labels(m, a.group)?;
            if inputs.len() != pred.len() {
                return Err(Error::DimensionMismatch {
                    expected: pred.len(),
                    found: inputs.len(),
                }
                .context(format!(
                    "{} has {} rows but {} lists {}",
                    cross_path.display(),
                    pred.len(),
                    m.display(),
                    inputs.len()
                ))
                .into());
            }
            let ids = inputs.iter().map(|i| i.id.clone()).collect();
            (ids, Some(inputs.iter().map(label_of).collect::<Vec<_>>()))
        }
        None => ((0..pred.len()).map(|i| i.to_string()).collect(), None),
    };
    let csv = predictions_csv(&ids, &pred, truth.as_deref())?;
    let mut out = String::new();
    match &a.out {
        Some(p) => write_file(p, &csv)?,
        None => out.push_str(&csv),
    }
    match truth {
        Some(t) => {
            let acc = accuracy(&pred, &t)?;
            let _ = writeln!(out, "accuracy: {acc} ({}/{})", acc.correct, acc.total);
        }
        None => eprintln!("note: no truth labels (no --manifest); accuracy omitted"),
    }
    Ok(out)
}

/// Accuracy of a `path,predicted[,truth]` CSV.
fn score_file(path: &Path) -> CliResult<String> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 1, &e.to_string()))?;
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, &e.to_string()))?
        .clone();
    let pc = headers
        .iter()
        .position(|c| c == "predicted")
        .ok_or_else(|| parse_err(path, 1, "missing column 'predicted'"))?;
    let Some(tc) = headers.iter().position(|c| c == "truth") else {
        eprintln!(
            "note: {} has no truth column; accuracy omitted",
            path.display()
        );
        return Ok(String::new());
    };
    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, &e.to_string())
        })?;
        pred.push(rec.get(pc).unwrap_or("").to_string());
        truth.push(rec.get(tc).unwrap_or("").to_string());
    }
    let acc = accuracy(&pred, &truth)?;
    Ok(format!("accuracy: {acc} ({}/{})\n", acc.correct, acc.total))
}

fn parse_err(path: &Path, line: usize, msg: &str) -> CliError {
    CliError::Core(Error::Parse {
        path: path.to_path_buf(),
        line,
        message: msg.to_string(),
    })
}

fn cmd_grid_search(a: &GridSearchArgs) -> CliResult<String> {
    let grid = GridSpec::new(
        a.c_grid.clone(),
        a.gamma_grid.clone(),
        a.rank_grid.clone(),
        a.lambda_grid.clone(),
    )
    .map_err(|e| usage(bare(&e)))?;
    let bands = a
        .bands
        .iter()
        .map(|b| BandSpec::builtin(b).map_err(|e| usage(bare(&e))))
        .collect::<CliResult<Vec<_>>>()?;
    if a.folds < 2 {
        return Err(usage("--folds must be at least 2"));
    }
    let mut cfg = GridSearchConfig::new(a.method.into(), grid);
    cfg.folds = a.folds;
    cfg.seed = a.seed;
    cfg.normalize = a.normalize;

    let manifest = load_manifest(&a.manifest)?;
    let base = manifest_dir(&a.manifest);
    let train_rows = manifest.group(Group::Train);
    let (test_rows, test_base) = match &a.test_manifest {
        Some(p) => {
            let m = load_manifest(p)?;
            (
                m.group(Group::Test)
                    .into_iter()
                    .cloned()
                    .collect::<Vec<_>>(),
                manifest_dir(p),
            )
        }
        None => (
            manifest.group(Group::Test).into_iter().cloned().collect(),
            base.clone(),
        ),
    };
    let test_refs: Vec<&ManifestRow> = test_rows.iter().collect();

    if bands.is_empty() {
        let train = load_samples(&train_rows, &base)?;
        let test = load_samples(&test_refs, &test_base)?;
        let outcome = grid_search(&train, &test, &cfg)?;
        log::info!("grid search took {:.2?}", outcome.report.wall_time);
        if let Some(dir) = &a.out {
            write_artifacts(&outcome, &train, &test, dir, a.csv)?;
        }
        return Ok(outcome.report.to_text());
    }

    let mut text = String::new();
    let mut table = Vec::new();
    for band in &bands {
        let train = load_band(&train_rows, &base, band)?;
        let test = load_band(&test_refs, &test_base, band)?;
        let mut outcome = grid_search(&train, &test, &cfg)?;
        log::info!(
            "{} band grid search took {:.2?}",
            band.name,
            outcome.report.wall_time
        );
        outcome.report.band = Some(band.name.clone());
        if let Some(dir) = &a.out {
            write_artifacts(
                &outcome,
                &train,
                &test,
                &dir.join(band.name.to_lowercase()),
                a.csv,
            )?;
        }
        text.push_str(&outcome.report.to_text());
        text.push('\n');
        table.push((
            cfg.method.as_str().to_string(),
            band.name.clone(),
            outcome.report.test_accuracy,
        ));
    }
    let table = accuracy_table(&table);
    if let Some(dir) = &a.out {
        write_file(&dir.join("table.txt"), &table)?;
    }
    text.push_str(&table);
    Ok(text)
}

fn load_band(rows: &[&ManifestRow], base: &Path, band: &BandSpec) -> CliResult<Vec<Sample>> {
    use rayon::prelude::*;
    Ok(rows
        .par_iter()
        .map(|r| {
            let t = load_stacked(&r.path)?;
            Ok(Sample {
                id: sample_id(&r.path, base),
                label: r.label.clone(),
                matrix: band_average(&t, band)
                    .map_err(|e| e.context(r.path.display().to_string()))?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?)
}

fn cmd_bands(a: &BandsArgs) -> CliResult<String> {
    let band = BandSpec::builtin(&a.band).map_err(|e| usage(bare(&e)))?;
    let manifest = load_manifest(&a.manifest)?;
    let base = manifest_dir(&a.manifest);
    let mut rows = Vec::new();
    for r in &manifest.rows {
        let t = load_stacked(&r.path)?;
        let x = band_average(&t, &band).map_err(|e| e.context(r.path.display().to_string()))?;
        let id = sample_id(&r.path, &base);
        let stem = id.strip_suffix(".txt").unwrap_or(&id);
        let path = a
            .out
            .join(format!("{stem}.{}.txt", band.name.to_lowercase()));
        save_matrix(&x, &path)?;
        rows.push(ManifestRow {
            path,
            label: r.label.clone(),
            group: r.group,
        });
    }
    let n = rows.len();
    SampleManifest::new(rows)?.write(&a.out.join("manifest.csv"))?;
    Ok(format!(
        "{} band ({}-{} Hz): {n} matrices written to {}\n",
        band.name,
        band.lo_hz,
        band.hi_hz,
        a.out.display()
    ))
}

fn cmd_synth(a: &SynthArgs) -> CliResult<String> {
    let cfg = SyntheticConfig {
        num_classes: a.classes,
        dim: a.dim,
        template_rank: a.template_rank,
        noise_sigma: a.sigma,
        train_per_class: a.train_per_class,
        test_per_class: a.test_per_class,
        seed: a.seed,
    };
    cfg.validate().map_err(|e| usage(bare(&e)))?;
    let ds = generate_synthetic(&cfg)?;
    let (train, test) = write_synthetic(&ds, &a.out)?;
    Ok(format!(
        "{} train and {} test samples written to {}\n",
        train.len(),
        test.len(),
        a.out.display()
    ))
}
