//! Dense joint probability mass functions over compromise counts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Joint PMF of `(X_1, …, X_M)` where `X_i ∈ 0..=N_i`. Cells are stored in
/// row-major order, the last coordinate varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPmf {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    /// All-zero table for the given type sizes.
    pub fn zeros(type_sizes: &[usize]) -> JointPmf {
        let dims: Vec<usize> = type_sizes.iter().map(|&n| n + 1).collect();
        let cells = dims.iter().product();
        JointPmf {
            dims,
            probs: vec![0.0; cells],
        }
    }

    pub fn point_mass(type_sizes: &[usize], at: &[usize]) -> JointPmf {
        let mut pmf = JointPmf::zeros(type_sizes);
        let i = pmf.index(at);
        pmf.probs[i] = 1.0;
        pmf
    }

    /// Builds a table from `(counts, prob)` pairs; repeated cells accumulate.
    pub fn from_cells<'a>(
        type_sizes: &[usize],
        cells: impl IntoIterator<Item = (&'a [usize], f64)>,
    ) -> Result<JointPmf> {
        let mut pmf = JointPmf::zeros(type_sizes);
        for (x, prob) in cells {
            pmf.check_counts(x)?;
            pmf.add(x, prob);
        }
        Ok(pmf)
    }

    /// `(N_1 + 1, …, N_M + 1)`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn type_sizes(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d - 1).collect()
    }

    pub fn type_count(&self) -> usize {
        self.dims.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cell_count(&self) -> usize {
        self.probs.len()
    }

    pub fn index(&self, x: &[usize]) -> usize {
        debug_assert_eq!(x.len(), self.dims.len());
        x.iter().zip(&self.dims).fold(0, |acc, (&xi, &d)| {
            debug_assert!(xi < d);
            acc * d + xi
        })
    }

    pub fn counts_of(&self, mut index: usize) -> Vec<usize> {
        let mut x = vec![0; self.dims.len()];
        for (slot, &d) in x.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        x
    }

    pub fn check_counts(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.dims.len() || x.iter().zip(&self.dims).any(|(&xi, &d)| xi >= d) {
            return Err(Error::DimensionMismatch(format!(
                "count vector {x:?} outside table with dims {:?}",
                self.dims
            )));
        }
        Ok(())
    }

    pub fn get(&self, x: &[usize]) -> f64 {
        self.probs[self.index(x)]
    }

    pub fn add(&mut self, x: &[usize], prob: f64) {
        let i = self.index(x);
        self.probs[i] += prob;
    }

    pub(crate) fn add_at(&mut self, index: usize, prob: f64) {
        self.probs[index] += prob;
    }

    /// `(counts, prob)` for every cell in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.counts_of(i), p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Marginal PMF of `X_t`.
    pub fn marginal(&self, t: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dims[t]];
        for (x, p) in self.iter() {
            out[x[t]] += p;
        }
        out
    }

    /// Largest absolute cellwise difference; `None` when dims differ.
    pub fn max_abs_diff(&self, other: &JointPmf) -> Option<f64> {
        (self.dims == other.dims).then(|| {
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    /// CSV with header `x_1,…,x_M,prob`; probabilities carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for t in 1..=self.dims.len() {
            let _ = write!(out, "x_{t},");
        }
        out.push_str("prob\n");
        for (x, p) in self.iter() {
            for xi in x {
                let _ = write!(out, "{xi},");
            }
            let _ = writeln!(out, "{p:.16e}");
        }
        out
    }

    /// Parses the CSV written by [`JointPmf::to_csv`]. Table dims are the
    /// largest count seen per column plus one; absent cells are zero.
    pub fn from_csv(text: &str) -> Result<JointPmf> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("pmf csv", "empty file"))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let m = cols.len().saturating_sub(1);
        let expected: Vec<String> = (1..=m)
            .map(|t| format!("x_{t}"))
            .chain(["prob".into()])
            .collect();
        if m == 0 || cols != expected {
            return Err(Error::parse(
                "pmf csv",
                format!("unexpected header {header:?}"),
            ));
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != m + 1 {
                return Err(Error::parse(
                    "pmf csv",
                    format!("row {}: expected {} fields", lineno + 2, m + 1),
                ));
            }
            let x = fields[..m]
                .iter()
                .map(|f| f.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::parse("pmf csv", format!("row {}: {e}", lineno + 2)))?;
            let p: f64 = fields[m]
                .parse()
                .map_err(|e| Error::parse("pmf csv", format!("row {}: {e}", lineno + 2)))?;
            if p.is_nan() || p < 0.0 {
                return Err(Error::parse(
                    "pmf csv",
                    format!("row {}: invalid probability", lineno + 2),
                ));
            }
            rows.push((x, p));
        }
        let mut sizes = vec![0usize; m];
        for (x, _) in &rows {
            for (s, &xi) in sizes.iter_mut().zip(x) {
                *s = (*s).max(xi);
            }
        }
        JointPmf::from_cells(&sizes, rows.iter().map(|(x, p)| (x.as_slice(), *p)))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<JointPmf> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}
