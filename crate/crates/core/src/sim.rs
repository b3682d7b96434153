//! Seeded Monte Carlo simulation of L-hop propagation by backward elimination.
//!
//! Each run draws the directly compromised set, then repeatedly lets the
//! current front attack the intact nodes and retires it. Run `k` draws from
//! its own ChaCha stream `(master_seed, k)`, so a sample matrix does not
//! depend on how runs are scheduled.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{NetworkModel, NodeId};
use crate::pmf::JointPmf;

/// Nodes compromised in each round of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompromiseTrace {
    /// `fronts[h]` holds the nodes newly compromised at depth `h` (`h = 0` is direct).
    fronts: Vec<Vec<NodeId>>,
    /// `cumulative[l][t]`: type-`t` nodes compromised by depth `l`.
    cumulative: Vec<Vec<u32>>,
}

impl CompromiseTrace {
    pub fn depth(&self) -> u32 {
        (self.fronts.len() - 1) as u32
    }

    pub fn front(&self, h: u32) -> &[NodeId] {
        &self.fronts[h as usize]
    }

    pub fn cumulative_counts(&self, l: u32) -> &[u32] {
        &self.cumulative[l as usize]
    }

    /// Nodes compromised by depth `l`, ascending.
    pub fn compromised_by(&self, l: u32) -> Vec<NodeId> {
        let mut all: Vec<NodeId> = self.fronts[..=l as usize]
            .iter()
            .flatten()
            .copied()
            .collect();
        all.sort_unstable();
        all
    }

    /// Checks that fronts are disjoint, compromised sets are nested across
    /// depths, and the per-type counts agree with the fronts.
    pub fn is_consistent(&self, net: &NetworkModel) -> bool {
        let mut seen = vec![false; net.node_count()];
        let mut counts = vec![0u32; net.type_count()];
        let mut previous: Vec<NodeId> = Vec::new();
        for (h, front) in self.fronts.iter().enumerate() {
            for &v in front {
                if v >= seen.len() || seen[v] {
                    return false;
                }
                seen[v] = true;
                counts[net.node_type(v)] += 1;
            }
            if counts != self.cumulative[h] {
                return false;
            }
            let current = self.compromised_by(h as u32);
            if !previous.iter().all(|v| current.binary_search(v).is_ok()) {
                return false;
            }
            if self.cumulative[h]
                .iter()
                .zip(net.type_sizes())
                .any(|(&c, &n)| c as usize > n)
            {
                return false;
            }
            previous = current;
        }
        true
    }
}

/// Random stream for run `run` under `master_seed`.
pub fn run_rng(master_seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run);
    rng
}

/// One simulated run: direct compromise draws followed by `depth` rounds.
pub fn single_run<R: Rng + ?Sized>(net: &NetworkModel, depth: u32, rng: &mut R) -> CompromiseTrace {
    let direct: Vec<NodeId> = (0..net.node_count())
        .filter(|&i| rng.random::<f64>() < net.p(i))
        .collect();
    propagate_from(net, direct, depth, rng)
}

/// Runs `depth` propagation rounds from a given directly compromised set.
///
/// Each round, every intact node (ascending id) receives one independent
/// attempt from each front neighbour (ascending id); all attempts are drawn.
pub fn propagate_from<R: Rng + ?Sized>(
    net: &NetworkModel,
    mut direct: Vec<NodeId>,
    depth: u32,
    rng: &mut R,
) -> CompromiseTrace {
    let n = net.node_count();
    direct.sort_unstable();
    direct.dedup();

    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Intact,
        Front,
        Retired,
    }
    let mut state = vec![State::Intact; n];
    let mut counts = vec![0u32; net.type_count()];
    for &v in &direct {
        state[v] = State::Front;
        counts[net.node_type(v)] += 1;
    }
    let mut fronts = vec![direct];
    let mut cumulative = vec![counts.clone()];

    for _ in 0..depth {
        let mut next = Vec::new();
        if !fronts.last().unwrap().is_empty() {
            for j in 0..n {
                if state[j] != State::Intact {
                    continue;
                }
                let mut hit = false;
                for &(l, _, q_lj) in net.neighbors(j) {
                    if state[l] == State::Front {
                        hit |= rng.random::<f64>() < q_lj;
                    }
                }
                if hit {
                    next.push(j);
                }
            }
        }
        for &v in fronts.last().unwrap() {
            state[v] = State::Retired;
        }
        for &v in &next {
            state[v] = State::Front;
            counts[net.node_type(v)] += 1;
        }
        fronts.push(next);
        cumulative.push(counts.clone());
    }
    CompromiseTrace { fronts, cumulative }
}

/// Cumulative per-type counts for `runs` runs at depths `1..=depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    runs: usize,
    depth: u32,
    type_sizes: Vec<usize>,
    seed: Option<u64>,
    counts: Vec<u32>,
}

impl SampleMatrix {
    /// Builds a matrix from rows laid out as `[run][depth 1..=L][type]`.
    pub fn from_rows(
        type_sizes: Vec<usize>,
        depth: u32,
        rows: Vec<Vec<u32>>,
    ) -> Result<SampleMatrix> {
        let m = type_sizes.len();
        let width = depth as usize * m;
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::DimensionMismatch(format!(
                "every sample row needs {width} counts"
            )));
        }
        for row in &rows {
            for (k, &c) in row.iter().enumerate() {
                if c as usize > type_sizes[k % m] {
                    return Err(Error::DimensionMismatch(format!(
                        "count {c} exceeds type size {}",
                        type_sizes[k % m]
                    )));
                }
            }
        }
        Ok(SampleMatrix {
            runs: rows.len(),
            depth,
            type_sizes,
            seed: None,
            counts: rows.concat(),
        })
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn type_sizes(&self) -> &[usize] {
        &self.type_sizes
    }

    pub fn type_count(&self) -> usize {
        self.type_sizes.len()
    }

    /// Master seed the matrix was generated with, if known.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    fn check_depth(&self, l: u32) -> Result<()> {
        if l == 0 || l > self.depth {
            return Err(Error::InvalidParameter(format!(
                "depth {l} outside recorded range 1..={}",
                self.depth
            )));
        }
        Ok(())
    }

    /// Counts of run `run` at depth `l` (1-based).
    pub fn counts(&self, run: usize, l: u32) -> &[u32] {
        let m = self.type_count();
        let start = (run * self.depth as usize + (l as usize - 1)) * m;
        &self.counts[start..start + m]
    }

    /// Type-`t` counts at depth `l` across all runs.
    pub fn column(&self, l: u32, t: usize) -> Result<Vec<f64>> {
        self.check_depth(l)?;
        Ok((0..self.runs)
            .map(|k| f64::from(self.counts(k, l)[t]))
            .collect())
    }

    /// CSV with header `run,depth,x_1,…,x_M`, one row per run and depth.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run,depth");
        for t in 1..=self.type_count() {
            let _ = write!(out, ",x_{t}");
        }
        out.push('\n');
        for k in 0..self.runs {
            for l in 1..=self.depth {
                let _ = write!(out, "{k},{l}");
                for c in self.counts(k, l) {
                    let _ = write!(out, ",{c}");
                }
                out.push('\n');
            }
        }
        out
    }

    /// Parses [`SampleMatrix::to_csv`] output. Without `type_sizes`, each
    /// type's size is taken to be its largest observed count.
    pub fn from_csv(text: &str, type_sizes: Option<&[usize]>) -> Result<SampleMatrix> {
        let ctx = "sample csv";
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(ctx, "empty file"))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 3 || cols[0] != "run" || cols[1] != "depth" {
            return Err(Error::parse(ctx, format!("unexpected header {header:?}")));
        }
        let m = cols.len() - 2;
        let mut records: Vec<(usize, u32, Vec<u32>)> = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != m + 2 {
                return Err(Error::parse(
                    ctx,
                    format!("row {}: expected {} fields", i + 2, m + 2),
                ));
            }
            let bad = |e: std::num::ParseIntError| Error::parse(ctx, format!("row {}: {e}", i + 2));
            let run: usize = fields[0].parse().map_err(bad)?;
            let depth: u32 = fields[1].parse().map_err(bad)?;
            let xs = fields[2..]
                .iter()
                .map(|f| f.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(bad)?;
            records.push((run, depth, xs));
        }
        if records.is_empty() {
            return Err(Error::Empty("sample csv has no rows"));
        }
        let depth = records.iter().map(|r| r.1).max().unwrap();
        let runs = records.iter().map(|r| r.0).max().unwrap() + 1;
        if depth == 0 || records.len() != runs * depth as usize {
            return Err(Error::parse(
                ctx,
                "rows do not form a complete run × depth grid",
            ));
        }
        let mut rows = vec![vec![u32::MAX; depth as usize * m]; runs];
        for (run, l, xs) in records {
            if l == 0 {
                return Err(Error::parse(ctx, "depth must start at 1"));
            }
            let slot = &mut rows[run][(l as usize - 1) * m..l as usize * m];
            if slot[0] != u32::MAX {
                return Err(Error::parse(
                    ctx,
                    format!("duplicate row for run {run}, depth {l}"),
                ));
            }
            slot.copy_from_slice(&xs);
        }
        let sizes = match type_sizes {
            Some(s) if s.len() == m => s.to_vec(),
            Some(s) => {
                return Err(Error::DimensionMismatch(format!(
                    "samples have {m} types, network has {}",
                    s.len()
                )))
            }
            None => (0..m)
                .map(|t| {
                    rows.iter()
                        .flat_map(|r| r.iter().skip(t).step_by(m))
                        .copied()
                        .max()
                        .unwrap() as usize
                })
                .collect(),
        };
        SampleMatrix::from_rows(sizes, depth, rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>, type_sizes: Option<&[usize]>) -> Result<SampleMatrix> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, type_sizes)
    }
}

fn run_row(net: &NetworkModel, depth: u32, master_seed: u64, run: usize) -> Vec<u32> {
    let mut rng = run_rng(master_seed, run as u64);
    let trace = single_run(net, depth, &mut rng);
    trace.cumulative[1..].concat()
}

/// `runs` independent simulations recorded at every depth `1..=depth`.
pub fn simulate_runs(
    net: &NetworkModel,
    depth: u32,
    runs: usize,
    master_seed: u64,
) -> Result<SampleMatrix> {
    if depth == 0 {
        return Err(Error::InvalidParameter(
            "simulation depth must be at least 1".into(),
        ));
    }
    if runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    let rows = collect_rows(net, depth, runs, master_seed);
    let mut samples = SampleMatrix::from_rows(net.type_sizes().to_vec(), depth, rows)?;
    samples.seed = Some(master_seed);
    Ok(samples)
}

#[cfg(not(feature = "parallel"))]
fn collect_rows(net: &NetworkModel, depth: u32, runs: usize, master_seed: u64) -> Vec<Vec<u32>> {
    (0..runs)
        .map(|k| run_row(net, depth, master_seed, k))
        .collect()
}

#[cfg(feature = "parallel")]
fn collect_rows(net: &NetworkModel, depth: u32, runs: usize, master_seed: u64) -> Vec<Vec<u32>> {
    use rayon::prelude::*;
    (0..runs)
        .into_par_iter()
        .map(|k| run_row(net, depth, master_seed, k))
        .collect()
}

/// Normalized histogram of the depth-`l` count vectors.
pub fn empirical_pmf(samples: &SampleMatrix, l: u32) -> Result<JointPmf> {
    if samples.runs == 0 {
        return Err(Error::Empty("sample matrix has no runs"));
    }
    samples.check_depth(l)?;
    let mut hist = vec![0u64; samples.type_sizes.iter().map(|n| n + 1).product()];
    let mut pmf = JointPmf::zeros(&samples.type_sizes);
    let mut x = vec![0usize; samples.type_count()];
    for k in 0..samples.runs {
        for (slot, &c) in x.iter_mut().zip(samples.counts(k, l)) {
            *slot = c as usize;
        }
        hist[pmf.index(&x)] += 1;
    }
    let total = samples.runs as f64;
    for (i, &h) in hist.iter().enumerate() {
        if h > 0 {
            pmf.add_at(i, h as f64 / total);
        }
    }
    Ok(pmf)
}
