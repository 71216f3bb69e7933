//! Dataset ingestion: matrix, factor and frequency-stacked tensor files,
//! CSV manifests, band averaging and a seeded synthetic connectome
//! generator.
//!
//! File formats (all whitespace-delimited text, `#` comment lines allowed):
//!
//! * matrix: `I`, then `I` rows of `I` values
//! * factors: `I R`, then `R` rows of `I` values (one factor vector per row)
//! * stacked tensor: `I F`, then `F` blocks of `I` rows; block `f` is `f` Hz
//! * manifest: CSV with header `path,label,group`, group is `train` or `test`

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{FactorSet, SymmetricMatrix};
use crate::textio::{push_row, write_file, Lines};

pub fn matrix_to_text(x: &SymmetricMatrix) -> String {
    let mut out = format!("{}\n", x.dim());
    for i in 0..x.dim() {
        push_row(&mut out, x.row(i));
    }
    out
}

pub fn save_matrix(x: &SymmetricMatrix, path: &Path) -> Result<()> {
    write_file(path, &matrix_to_text(x))
}

fn read_square(lines: &mut Lines, dim: usize, what: &str) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        values.extend(lines.read_row(dim, &format!("{what} row {} of {dim}", r + 1))?);
    }
    Ok(values)
}

pub fn load_matrix(path: &Path) -> Result<SymmetricMatrix> {
    let mut lines = Lines::open(path)?;
    let (n, toks) = lines.next_tokens("header 'I'")?;
    if toks.len() != 1 {
        return Err(lines.err(n, "matrix header must be a single dimension 'I'"));
    }
    let dim = lines.parse_usize(n, &toks[0], "dimension")?;
    if dim == 0 {
        return Err(lines.err(n, "dimension must be at least 1"));
    }
    let values = read_square(&mut lines, dim, "matrix")?;
    lines.expect_end()?;
    SymmetricMatrix::new(dim, values).map_err(|e| e.context(path.display().to_string()))
}

pub fn factors_to_text(f: &FactorSet) -> String {
    let mut out = format!("{} {}\n", f.dim(), f.rank());
    for v in f.vectors() {
        push_row(&mut out, v);
    }
    out
}

pub fn save_factors(f: &FactorSet, path: &Path) -> Result<()> {
    write_file(path, &factors_to_text(f))
}

pub fn load_factors(path: &Path) -> Result<FactorSet> {
    let mut lines = Lines::open(path)?;
    let (n, toks) = lines.next_tokens("header 'I R'")?;
    if toks.len() != 2 {
        return Err(lines.err(n, "factor header must be 'I R'"));
    }
    let dim = lines.parse_usize(n, &toks[0], "dimension")?;
    let rank = lines.parse_usize(n, &toks[1], "rank")?;
    if dim == 0 || rank == 0 {
        return Err(lines.err(n, "dimension and rank must be at least 1"));
    }
    let vectors = (0..rank)
        .map(|r| lines.read_row(dim, &format!("factor {} of {rank}", r + 1)))
        .collect::<Result<Vec<_>>>()?;
    lines.expect_end()?;
    FactorSet::new(vectors).map_err(|e| e.context(path.display().to_string()))
}

/// Connectivity matrices at 1 Hz, 2 Hz, …, `F` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedBandTensor {
    slices: Vec<SymmetricMatrix>,
}

impl StackedBandTensor {
    pub fn new(slices: Vec<SymmetricMatrix>) -> Result<Self> {
        let dim = slices
            .first()
            .ok_or_else(|| Error::invalid("a stacked tensor needs at least one frequency"))?
            .dim();
        for (f, s) in slices.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                }
                .context(format!("frequency slice {}", f + 1)));
            }
        }
        Ok(StackedBandTensor { slices })
    }

    pub fn dim(&self) -> usize {
        self.slices[0].dim()
    }

    pub fn num_freqs(&self) -> usize {
        self.slices.len()
    }

    /// Slice for `hz` (1-based).
    pub fn slice(&self, hz: usize) -> Option<&SymmetricMatrix> {
        hz.checked_sub(1).and_then(|i| self.slices.get(i))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.dim(), self.num_freqs());
        for s in &self.slices {
            for i in 0..s.dim() {
                push_row(&mut out, s.row(i));
            }
        }
        out
    }
}

pub fn save_stacked(t: &StackedBandTensor, path: &Path) -> Result<()> {
    write_file(path, &t.to_text())
}

pub fn load_stacked(path: &Path) -> Result<StackedBandTensor> {
    let mut lines = Lines::open(path)?;
    let (n, toks) = lines.next_tokens("header 'I F'")?;
    if toks.len() != 2 {
        return Err(lines.err(n, "stacked tensor header must be 'I F'"));
    }
    let dim = lines.parse_usize(n, &toks[0], "dimension")?;
    let freqs = lines.parse_usize(n, &toks[1], "frequency count")?;
    if dim == 0 || freqs == 0 {
        return Err(lines.err(n, "dimension and frequency count must be at least 1"));
    }
    let mut slices = Vec::with_capacity(freqs);
    for f in 1..=freqs {
        let line = lines.next_line_no();
        let values = read_square(&mut lines, dim, &format!("{f} Hz block"))?;
        slices.push(SymmetricMatrix::new(dim, values).map_err(|e| lines.err(line, e.to_string()))?);
    }
    lines.expect_end()?;
    StackedBandTensor::new(slices)
}

/// Inclusive frequency range in Hz.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandSpec {
    pub name: String,
    pub lo_hz: usize,
    pub hi_hz: usize,
}

impl BandSpec {
    pub fn new(name: impl Into<String>, lo_hz: usize, hi_hz: usize) -> Result<Self> {
        if lo_hz < 1 || hi_hz < lo_hz {
            return Err(Error::invalid(format!(
                "invalid band {lo_hz}..{hi_hz} Hz: need 1 <= lo <= hi"
            )));
        }
        Ok(BandSpec {
            name: name.into(),
            lo_hz,
            hi_hz,
        })
    }

    pub fn delta() -> Self {
        BandSpec::new("Delta", 1, 3).unwrap()
    }

    pub fn theta() -> Self {
        BandSpec::new("Theta", 4, 7).unwrap()
    }

    pub fn alpha() -> Self {
        BandSpec::new("Alpha", 8, 12).unwrap()
    }

    pub fn beta() -> Self {
        BandSpec::new("Beta", 13, 30).unwrap()
    }

    /// Total power, 1–30 Hz.
    pub fn all() -> Self {
        BandSpec::new("All", 1, 30).unwrap()
    }

    pub fn builtins() -> [BandSpec; 5] {
        [
            Self::delta(),
            Self::theta(),
            Self::alpha(),
            Self::beta(),
            Self::all(),
        ]
    }

    /// Case-insensitive lookup of a built-in band.
    pub fn builtin(name: &str) -> Result<Self> {
        Self::builtins()
            .into_iter()
            .find(|b| b.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown band '{name}'; expected one of Delta, Theta, Alpha, Beta, All"
                ))
            })
    }
}

impl fmt::Display for BandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}-{} Hz)", self.name, self.lo_hz, self.hi_hz)
    }
}

/// Elementwise mean of the slices `lo_hz..=hi_hz`.
pub fn band_average(t: &StackedBandTensor, b: &BandSpec) -> Result<SymmetricMatrix> {
    if b.hi_hz > t.num_freqs() {
        return Err(Error::invalid(format!(
            "band {b} exceeds the {} available frequencies",
            t.num_freqs()
        )));
    }
    let n = t.dim();
    let mut sum = vec![0.0; n * n];
    for s in &t.slices[b.lo_hz - 1..b.hi_hz] {
        for (acc, v) in sum.iter_mut().zip(s.as_slice()) {
            *acc += v;
        }
    }
    let count = (b.hi_hz - b.lo_hz + 1) as f64;
    SymmetricMatrix::new(n, sum.into_iter().map(|v| v / count).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Train,
    Test,
}

impl Group {
    pub fn as_str(&self) -> &'static str {
        match self {
            Group::Train => "train",
            Group::Test => "test",
        }
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Group::Train),
            "test" => Ok(Group::Test),
            other => Err(Error::invalid(format!(
                "unknown group '{other}'; allowed values: train, test"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub label: String,
    pub group: Group,
}

/// Ordered `(path, label, group)` rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SampleManifest {
    pub rows: Vec<ManifestRow>,
}

impl SampleManifest {
    pub fn new(rows: Vec<ManifestRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("manifest has no rows"));
        }
        let mut seen = HashSet::new();
        for r in &rows {
            if r.label.is_empty() {
                return Err(Error::invalid(format!(
                    "empty label for {}",
                    r.path.display()
                )));
            }
            if !seen.insert(&r.path) {
                return Err(Error::invalid(format!(
                    "duplicate path in manifest: {}",
                    r.path.display()
                )));
            }
        }
        Ok(SampleManifest { rows })
    }

    pub fn group(&self, g: Group) -> Vec<&ManifestRow> {
        self.rows.iter().filter(|r| r.group == g).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV text; paths under `base` are written relative to it.
    pub fn to_csv(&self, base: &Path) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let map = |e: csv::Error| Error::invalid(format!("CSV encoding failed: {e}"));
        w.write_record(["path", "label", "group"]).map_err(map)?;
        for r in &self.rows {
            let p = r.path.strip_prefix(base).unwrap_or(&r.path);
            let p = p.to_string_lossy().replace('\\', "/");
            w.write_record([p.as_str(), r.label.as_str(), r.group.as_str()])
                .map_err(map)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::invalid(format!("CSV encoding failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let base = path.parent().unwrap_or(Path::new(""));
        write_file(path, &self.to_csv(base)?)
    }
}

/// Reads a manifest; relative paths resolve against the manifest's folder.
pub fn load_manifest(path: &Path) -> Result<SampleManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::parse(
                path,
                1,
                format!("missing column '{name}' (header must be path,label,group)"),
            )
        })
    };
    let (pc, lc, gc) = (col("path")?, col("label")?, col("group")?);

    let mut rows: Vec<ManifestRow> = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| rec.get(i).unwrap_or("");
        let raw = field(pc);
        if raw.is_empty() {
            return Err(Error::parse(path, line, "empty path"));
        }
        let label = field(lc).to_string();
        if label.is_empty() {
            return Err(Error::parse(path, line, "empty label"));
        }
        let group = field(gc)
            .parse::<Group>()
            .map_err(|e| Error::parse(path, line, e.root().to_string()))?;
        let p = Path::new(raw);
        let resolved = if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        };
        if !seen.insert(resolved.clone()) {
            return Err(Error::parse(path, line, format!("duplicate path '{raw}'")));
        }
        rows.push(ManifestRow {
            path: resolved,
            label,
            group,
        });
    }
    SampleManifest::new(rows).map_err(|e| e.context(path.display().to_string()))
}

/// Settings for [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub num_classes: usize,
    pub dim: usize,
    pub template_rank: usize,
    pub noise_sigma: f64,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    /// The pinned regression dataset.
    fn default() -> Self {
        SyntheticConfig {
            num_classes: 3,
            dim: 16,
            template_rank: 3,
            noise_sigma: 0.2,
            train_per_class: 20,
            test_per_class: 10,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0
            || self.dim == 0
            || self.template_rank == 0
            || self.train_per_class == 0
            || self.test_per_class == 0
        {
            return Err(Error::invalid("synthetic counts must all be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid(
                "noise sigma must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub name: String,
    pub label: String,
    pub group: Group,
    pub matrix: SymmetricMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub templates: Vec<SymmetricMatrix>,
    pub samples: Vec<SyntheticSample>,
}

pub fn class_label(c: usize) -> String {
    format!("class{c}")
}

/// Seeded synthetic connectomes.
///
/// Randomness comes from ChaCha8 seeded with `seed`, with standard normals
/// drawn by `rand_distr`'s ziggurat sampler. Draw order: every class
/// template `B_c` (`I × R₀`, row-major, class by class), then every training
/// sample's noise matrix `E` (`I × I`, row-major, class-major), then every
/// test sample's. Each sample is `B_c B_cᵀ + σ (E + Eᵀ)/2`.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.dim;
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };

    let templates = (0..cfg.num_classes)
        .map(|_| {
            let b: Vec<f64> = (0..n * cfg.template_rank).map(|_| normal()).collect();
            let mut t = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    t[i * n + j] = (0..cfg.template_rank)
                        .map(|r| b[i * cfg.template_rank + r] * b[j * cfg.template_rank + r])
                        .sum();
                }
            }
            SymmetricMatrix::new(n, t)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut samples = Vec::new();
    for (group, per_class) in [
        (Group::Train, cfg.train_per_class),
        (Group::Test, cfg.test_per_class),
    ] {
        for (c, template) in templates.iter().enumerate() {
            for k in 0..per_class {
                let e: Vec<f64> = (0..n * n).map(|_| normal()).collect();
                let mut x = template.as_slice().to_vec();
                for i in 0..n {
                    for j in 0..n {
                        x[i * n + j] += cfg.noise_sigma * 0.5 * (e[i * n + j] + e[j * n + i]);
                    }
                }
                samples.push(SyntheticSample {
                    name: format!("{}/{}_{:03}.txt", group.as_str(), class_label(c), k),
                    label: class_label(c),
                    group,
                    matrix: SymmetricMatrix::new(n, x)?,
                });
            }
        }
    }
    Ok(SyntheticDataset { templates, samples })
}

/// Writes matrices plus `train.csv` and `test.csv` under `dir`.
pub fn write_synthetic(
    ds: &SyntheticDataset,
    dir: &Path,
) -> Result<(SampleManifest, SampleManifest)> {
    let mut manifests = Vec::new();
    for group in [Group::Train, Group::Test] {
        let mut rows = Vec::new();
        for s in ds.samples.iter().filter(|s| s.group == group) {
            let path = dir.join(&s.name);
            save_matrix(&s.matrix, &path)?;
            rows.push(ManifestRow {
                path,
                label: s.label.clone(),
                group,
            });
        }
        let m = SampleManifest::new(rows)?;
        m.write(&dir.join(format!("{}.csv", group.as_str())))?;
        manifests.push(m);
    }
    let test = manifests.pop().expect("two manifests");
    let train = manifests.pop().expect("two manifests");
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn load_matrix_examples() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "i.txt", "2\n1 0\n0 1\n");
        assert_eq!(
            load_matrix(&p).unwrap(),
            SymmetricMatrix::identity(2).unwrap()
        );

        let p = write(d.path(), "c.txt", "# comment\n2\n1 0.5\n# mid\n0.5 1\n");
        assert_eq!(load_matrix(&p).unwrap().get(0, 1), 0.5);

        let p = write(d.path(), "short.txt", "3\n1 0 0\n0 1 0\n");
        let err = load_matrix(&p).unwrap_err().to_string();
        assert!(err.contains("row 3 of 3"), "{err}");

        let p = write(d.path(), "nan.txt", "2\n1 x\n0 1\n");
        let err = load_matrix(&p).unwrap_err().to_string();
        assert!(err.contains(":2:") && err.contains("'x'"), "{err}");

        let p = write(d.path(), "cols.txt", "2\n1 0 3\n0 1\n");
        assert!(load_matrix(&p).unwrap_err().to_string().contains(":2:"));

        let p = write(d.path(), "hdr.txt", "two\n");
        assert!(load_matrix(&p).unwrap_err().to_string().contains(":1:"));

        assert!(matches!(
            load_matrix(&d.path().join("missing.txt")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn save_load_is_byte_stable() {
        let d = tempfile::tempdir().unwrap();
        let x =
            SymmetricMatrix::from_rows(&[vec![0.1, -2.0 / 3.0], vec![-2.0 / 3.0, 1e-300]]).unwrap();
        let p = d.path().join("x.txt");
        save_matrix(&x, &p).unwrap();
        let first = std::fs::read(&p).unwrap();
        let back = load_matrix(&p).unwrap();
        assert_eq!(back, x);
        save_matrix(&back, &p).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), first);
    }

    #[test]
    fn factor_file_round_trip() {
        let d = tempfile::tempdir().unwrap();
        let f = FactorSet::new(vec![vec![1.0, -0.25, 3.0], vec![0.0, 1.0 / 7.0, 2.0]]).unwrap();
        let p = d.path().join("f.txt");
        save_factors(&f, &p).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("3 2\n"));
        assert_eq!(load_factors(&p).unwrap().vectors(), f.vectors());
        let p = write(d.path(), "bad.txt", "3 2\n1 2 3\n");
        assert!(load_factors(&p).is_err());
    }

    #[test]
    fn stacked_examples() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "s1.txt", "2 1\n1 2\n2 1\n");
        assert_eq!(load_stacked(&p).unwrap().num_freqs(), 1);

        let p = write(d.path(), "s2.txt", "2 2\n1 1\n1 1\n3 3\n3 3\n");
        let t = load_stacked(&p).unwrap();
        assert_eq!(t.slice(1).unwrap().as_slice(), &[1.0; 4]);
        assert_eq!(t.slice(2).unwrap().as_slice(), &[3.0; 4]);
        let avg = band_average(&t, &BandSpec::new("x", 1, 2).unwrap()).unwrap();
        assert_eq!(avg.as_slice(), &[2.0; 4]);
        let single = band_average(&t, &BandSpec::new("x", 2, 2).unwrap()).unwrap();
        assert_eq!(&single, t.slice(2).unwrap());
        assert!(band_average(&t, &BandSpec::theta()).is_err());

        let p = write(d.path(), "trunc.txt", "2 2\n1 1\n1 1\n3 3\n");
        let err = load_stacked(&p).unwrap_err().to_string();
        assert!(err.contains("2 Hz block"), "{err}");
    }

    #[test]
    fn builtin_bands() {
        let b: Vec<_> = BandSpec::builtins()
            .iter()
            .map(|b| (b.name.clone(), b.lo_hz, b.hi_hz))
            .collect();
        assert_eq!(
            b,
            vec![
                ("Delta".to_string(), 1, 3),
                ("Theta".to_string(), 4, 7),
                ("Alpha".to_string(), 8, 12),
                ("Beta".to_string(), 13, 30),
                ("All".to_string(), 1, 30),
            ]
        );
        assert_eq!(BandSpec::builtin("theta").unwrap(), BandSpec::theta());
        let err = BandSpec::builtin("gamma").unwrap_err().to_string();
        for name in ["Delta", "Theta", "Alpha", "Beta", "All"] {
            assert!(err.contains(name));
        }
        assert!(BandSpec::new("x", 0, 3).is_err());
        assert!(BandSpec::new("x", 5, 3).is_err());
    }

    #[test]
    fn manifest_examples() {
        let d = tempfile::tempdir().unwrap();
        let p = write(
            d.path(),
            "m.csv",
            "path,label,group\nb.txt,x,train\na.txt,y,test\n",
        );
        let m = load_manifest(&p).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.rows[0].path, d.path().join("b.txt"));
        assert_eq!(m.rows[1].label, "y");
        assert_eq!(m.rows[1].group, Group::Test);

        let p = write(d.path(), "g.csv", "path,label,group\na.txt,x,validation\n");
        let err = load_manifest(&p).unwrap_err().to_string();
        assert!(err.contains("train, test") && err.contains(":2:"), "{err}");

        let p = write(
            d.path(),
            "d.csv",
            "path,label,group\na.txt,x,train\na.txt,y,test\n",
        );
        let err = load_manifest(&p).unwrap_err().to_string();
        assert!(err.contains("duplicate path 'a.txt'"), "{err}");

        let p = write(d.path(), "c.csv", "path,label\na.txt,x\n");
        assert!(load_manifest(&p).unwrap_err().to_string().contains("group"));
    }

    #[test]
    fn manifest_write_is_relative() {
        let d = tempfile::tempdir().unwrap();
        let m = SampleManifest::new(vec![ManifestRow {
            path: d.path().join("sub/a.txt"),
            label: "x".into(),
            group: Group::Train,
        }])
        .unwrap();
        let p = d.path().join("m.csv");
        m.write(&p).unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap(),
            "path,label,group\nsub/a.txt,x,train\n"
        );
        assert_eq!(load_manifest(&p).unwrap(), m);
    }

    #[test]
    fn synthetic_noiseless_and_single_class() {
        let cfg = SyntheticConfig {
            noise_sigma: 0.0,
            train_per_class: 3,
            test_per_class: 2,
            ..Default::default()
        };
        let ds = generate_synthetic(&cfg).unwrap();
        assert_eq!(ds.samples.len(), 15);
        for s in &ds.samples {
            let c: usize = s.label.trim_start_matches("class").parse().unwrap();
            assert_eq!(s.matrix, ds.templates[c]);
        }
        let one = generate_synthetic(&SyntheticConfig {
            num_classes: 1,
            ..cfg.clone()
        })
        .unwrap();
        assert!(one.samples.iter().all(|s| s.label == "class0"));
        assert_eq!(generate_synthetic(&cfg).unwrap(), ds);
    }
}
