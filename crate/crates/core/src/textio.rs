//! Shared plumbing for the whitespace-delimited text formats.
//!
//! Numbers are written with 17 significant digits, which round-trips every
//! finite `f64` exactly. Blank lines and lines starting with `#` are skipped
//! on input; line numbers in errors are 1-based physical lines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// 17-significant-digit scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn push_row(out: &mut String, row: &[f64]) {
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Content lines of a text file with their 1-based line numbers.
pub(crate) struct Lines {
    path: PathBuf,
    lines: Vec<(usize, String)>,
    pos: usize,
    last_line: usize,
}

impl Lines {
    pub fn open(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_str(path, &text))
    }

    pub fn from_str(path: &Path, text: &str) -> Self {
        let mut last_line = 0;
        let lines = text
            .lines()
            .enumerate()
            .inspect(|(i, _)| last_line = i + 1)
            .filter(|(_, l)| {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            })
            .map(|(i, l)| (i + 1, l.to_string()))
            .collect();
        Lines {
            path: path.to_path_buf(),
            lines,
            pos: 0,
            last_line,
        }
    }

    /// Line number the next read would report an error at.
    pub fn next_line_no(&self) -> usize {
        self.lines
            .get(self.pos)
            .map_or(self.last_line + 1, |(n, _)| *n)
    }

    pub fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::parse(&self.path, line, message)
    }

    /// Next content line split on whitespace, or an error naming `what`.
    pub fn next_tokens(&mut self, what: &str) -> Result<(usize, Vec<String>)> {
        match self.lines.get(self.pos) {
            Some((n, l)) => {
                self.pos += 1;
                Ok((*n, l.split_whitespace().map(str::to_string).collect()))
            }
            None => Err(self.err(
                self.next_line_no(),
                format!("unexpected end of file, expected {what}"),
            )),
        }
    }

    pub fn expect_end(&self) -> Result<()> {
        match self.lines.get(self.pos) {
            None => Ok(()),
            Some((n, _)) => Err(self.err(*n, "unexpected trailing content")),
        }
    }

    pub fn parse_usize(&self, line: usize, tok: &str, what: &str) -> Result<usize> {
        tok.parse()
            .map_err(|_| self.err(line, format!("invalid {what} '{tok}'")))
    }

    pub fn parse_f64(&self, line: usize, tok: &str) -> Result<f64> {
        let v: f64 = tok
            .parse()
            .map_err(|_| self.err(line, format!("non-numeric token '{tok}'")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(line, format!("non-finite value '{tok}'")))
        }
    }

    /// A row of exactly `len` numbers.
    pub fn read_row(&mut self, len: usize, what: &str) -> Result<Vec<f64>> {
        let (n, toks) = self.next_tokens(what)?;
        if toks.len() != len {
            return Err(self.err(n, format!("expected {len} values, found {}", toks.len())));
        }
        toks.iter().map(|t| self.parse_f64(n, t)).collect()
    }

    /// `rows` rows of `cols` numbers each, row-major.
    pub fn read_block(&mut self, rows: usize, cols: usize, what: &str) -> Result<Vec<f64>> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.read_row(cols, what)?);
        }
        Ok(data)
    }
}

/// Dense rectangular matrix as text: header `rows cols`, then the rows.
pub fn dense_to_text(m: &Matrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        push_row(&mut out, m.row(i));
    }
    out
}

pub fn write_dense(path: &Path, m: &Matrix) -> Result<()> {
    write_file(path, &dense_to_text(m))
}

pub fn read_dense(path: &Path) -> Result<Matrix> {
    let mut lines = Lines::open(path)?;
    let (n, toks) = lines.next_tokens("header 'rows cols'")?;
    if toks.len() != 2 {
        return Err(lines.err(n, "header must be 'rows cols'"));
    }
    let rows = lines.parse_usize(n, &toks[0], "row count")?;
    let cols = lines.parse_usize(n, &toks[1], "column count")?;
    let data = lines.read_block(rows, cols, "matrix row")?;
    lines.expect_end()?;
    Matrix::from_row_major(rows, cols, data)
}
