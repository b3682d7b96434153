//! Moments, rank and linear dependence, and orthant-order comparisons.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmf::JointPmf;
use crate::sim::SampleMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeMoments {
    pub mean: f64,
    pub sd: f64,
    /// Mean of `X_i / N_i`.
    pub mean_proportion: f64,
    pub sd_proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSummary {
    pub types: Vec<TypeMoments>,
}

fn moments(mean: f64, sd: f64, size: usize) -> TypeMoments {
    let scale = if size == 0 { 0.0 } else { 1.0 / size as f64 };
    TypeMoments {
        mean,
        sd,
        mean_proportion: mean * scale,
        sd_proportion: sd * scale,
    }
}

/// Exact per-type mean and standard deviation under `pmf`.
pub fn pmf_moments(pmf: &JointPmf) -> Result<MomentSummary> {
    if pmf.cell_count() == 0 {
        return Err(Error::Empty("pmf has no cells"));
    }
    let types = pmf
        .type_sizes()
        .iter()
        .enumerate()
        .map(|(t, &size)| {
            let marginal = pmf.marginal(t);
            let mean: f64 = marginal.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
            let var: f64 = marginal
                .iter()
                .enumerate()
                .map(|(k, p)| (k as f64 - mean).powi(2) * p)
                .sum();
            moments(mean, var.max(0.0).sqrt(), size)
        })
        .collect();
    Ok(MomentSummary { types })
}

/// Per-type sample mean and unbiased sample SD at depth `l` (SD is 0 for a single run).
pub fn sample_moments(samples: &SampleMatrix, l: u32) -> Result<MomentSummary> {
    if samples.runs() == 0 {
        return Err(Error::Empty("sample matrix has no runs"));
    }
    let types = (0..samples.type_count())
        .map(|t| {
            let col = samples.column(l, t)?;
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let sd = if col.len() < 2 {
                0.0
            } else {
                (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            Ok(moments(mean, sd, samples.type_sizes()[t]))
        })
        .collect::<Result<_>>()?;
    Ok(MomentSummary { types })
}

/// Pearson, Kendall tau-b and Spearman rho; `None` when undefined
/// (fewer than two observations or a constant margin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DependenceSummary {
    pub pearson: Option<f64>,
    pub kendall_tau_b: Option<f64>,
    pub spearman_rho: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDependence {
    pub first: usize,
    pub second: usize,
    pub summary: DependenceSummary,
}

pub fn dependence(x: &[f64], y: &[f64]) -> Result<DependenceSummary> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(
            "paired samples differ in length".into(),
        ));
    }
    Ok(DependenceSummary {
        pearson: pearson(x, y),
        kendall_tau_b: kendall_tau_b(x, y),
        spearman_rho: spearman(x, y),
    })
}

/// Dependence between the two type counts at depth `l`; needs exactly two types.
pub fn correlations(samples: &SampleMatrix, l: u32) -> Result<DependenceSummary> {
    if samples.type_count() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "pairwise summary needs 2 types, samples have {}; use pairwise_correlations",
            samples.type_count()
        )));
    }
    dependence(&samples.column(l, 0)?, &samples.column(l, 1)?)
}

/// Dependence for every pair of types `(i, j)`, `i < j`, at depth `l`.
pub fn pairwise_correlations(samples: &SampleMatrix, l: u32) -> Result<Vec<PairDependence>> {
    let m = samples.type_count();
    let cols = (0..m)
        .map(|t| samples.column(l, t))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            out.push(PairDependence {
                first: i,
                second: j,
                summary: dependence(&cols[i], &cols[j])?,
            });
        }
    }
    Ok(out)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall's tau-b with tie correction in `O(n log n)`.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let pairs = |count: u64| count * count.saturating_sub(1) / 2;
    let tied_pairs = |v: &[f64]| -> u64 {
        let mut sorted = v.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted
            .chunk_by(|a, b| a == b)
            .map(|g| pairs(g.len() as u64))
            .sum()
    };
    let n0 = pairs(n as u64);
    let (tx, ty) = (tied_pairs(x), tied_pairs(y));
    if n0 == tx || n0 == ty {
        return None;
    }

    // Dense ranks of y for a Fenwick tree.
    let mut ys: Vec<f64> = y.to_vec();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let rank_y = |v: f64| ys.partition_point(|&u| u < v);
    let mut tree = vec![0u64; ys.len() + 1];
    let add = |tree: &mut Vec<u64>, mut i: usize| {
        i += 1;
        while i < tree.len() {
            tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    };
    let prefix = |tree: &Vec<u64>, mut i: usize| {
        let mut s = 0;
        while i > 0 {
            s += tree[i];
            i &= i - 1;
        }
        s
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let mut inserted = 0u64;
    for group in order.chunk_by(|&a, &b| x[a] == x[b]) {
        for &i in group {
            let r = rank_y(y[i]);
            let below = prefix(&tree, r);
            let at_or_below = prefix(&tree, r + 1);
            concordant += below as i64;
            discordant += (inserted - at_or_below) as i64;
        }
        for &i in group {
            add(&mut tree, rank_y(y[i]));
            inserted += 1;
        }
    }
    let denom = (((n0 - tx) as f64) * ((n0 - ty) as f64)).sqrt();
    Some(((concordant - discordant) as f64 / denom).clamp(-1.0, 1.0))
}

/// `P(X_1 > x_1, …, X_M > x_M)`; coordinates may be `-1`.
pub fn upper_orthant_survival(pmf: &JointPmf, x: &[i64]) -> Result<f64> {
    check_point(pmf, x)?;
    Ok(pmf
        .iter()
        .filter(|(y, _)| y.iter().zip(x).all(|(&yi, &xi)| yi as i64 > xi))
        .map(|(_, p)| p)
        .sum())
}

/// `P(X_1 ≤ x_1, …, X_M ≤ x_M)`.
pub fn lower_orthant_cdf(pmf: &JointPmf, x: &[i64]) -> Result<f64> {
    check_point(pmf, x)?;
    Ok(pmf
        .iter()
        .filter(|(y, _)| y.iter().zip(x).all(|(&yi, &xi)| yi as i64 <= xi))
        .map(|(_, p)| p)
        .sum())
}

fn check_point(pmf: &JointPmf, x: &[i64]) -> Result<()> {
    if x.len() != pmf.type_count() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, pmf has {}",
            x.len(),
            pmf.type_count()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrthantKind {
    /// Upper-orthant survival of the larger PMF fell below the smaller one.
    Survival,
    /// Lower-orthant CDF of the larger PMF rose above the smaller one.
    Cdf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthantViolation {
    pub kind: OrthantKind,
    pub point: Vec<i64>,
    pub magnitude: f64,
}

/// Outcome of checking that `hi` dominates `lo` on every orthant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    /// Every point where the inequality fails by more than zero.
    pub violations: Vec<OrthantViolation>,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub points_checked: usize,
}

impl OrderReport {
    pub fn render(&self, label: &str) -> String {
        let mut out = format!(
            "{label}: {} (max violation {:.3e}, tolerance {:.1e}, {} orthant points)\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.max_violation,
            self.tolerance,
            self.points_checked
        );
        for v in self
            .violations
            .iter()
            .filter(|v| v.magnitude > self.tolerance)
        {
            out.push_str(&format!(
                "  {:?} at {:?}: {:.6e}\n",
                v.kind, v.point, v.magnitude
            ));
        }
        out
    }
}

/// Checks the orthant consequences of `lo ≤_st hi`: at every point the
/// survival of `hi` is at least that of `lo`, and the CDF of `hi` at most
/// that of `lo`, both up to `tol`.
pub fn check_orthant_monotone(lo: &JointPmf, hi: &JointPmf, tol: f64) -> Result<OrderReport> {
    if lo.dims() != hi.dims() {
        return Err(Error::DimensionMismatch(format!(
            "pmf dims {:?} vs {:?}",
            lo.dims(),
            hi.dims()
        )));
    }
    let survival_lo = orthant_table(lo, true);
    let survival_hi = orthant_table(hi, true);
    let cdf_lo = orthant_table(lo, false);
    let cdf_hi = orthant_table(hi, false);

    let mut violations = Vec::new();
    let mut max_violation: f64 = 0.0;
    for idx in 0..lo.cell_count() {
        let cell = lo.counts_of(idx);
        let survival_gap = survival_lo[idx] - survival_hi[idx];
        let cdf_gap = cdf_hi[idx] - cdf_lo[idx];
        for (kind, gap, point) in [
            (
                OrthantKind::Survival,
                survival_gap,
                cell.iter().map(|&c| c as i64 - 1).collect::<Vec<_>>(),
            ),
            (
                OrthantKind::Cdf,
                cdf_gap,
                cell.iter().map(|&c| c as i64).collect(),
            ),
        ] {
            if gap > 0.0 {
                max_violation = max_violation.max(gap);
                violations.push(OrthantViolation {
                    kind,
                    point,
                    magnitude: gap,
                });
            }
        }
    }
    Ok(OrderReport {
        passed: max_violation <= tol,
        violations,
        max_violation,
        tolerance: tol,
        points_checked: 2 * lo.cell_count(),
    })
}

/// Orthant sums indexed by cell. For `upper`, entry `y` is
/// `P(X ≥ y) = P(X > y - 1)`; otherwise `P(X ≤ y)`.
fn orthant_table(pmf: &JointPmf, upper: bool) -> Vec<f64> {
    let dims = pmf.dims().to_vec();
    let mut acc = pmf.probs().to_vec();
    let mut stride = 1;
    for &d in dims.iter().rev() {
        let block = stride * d;
        for base in (0..acc.len()).step_by(block) {
            for offset in 0..stride {
                if upper {
                    for k in (0..d - 1).rev() {
                        let i = base + k * stride + offset;
                        acc[i] += acc[i + stride];
                    }
                } else {
                    for k in 1..d {
                        let i = base + k * stride + offset;
                        acc[i] += acc[i - stride];
                    }
                }
            }
        }
        stride = block;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn kendall_brute(x: &[f64], y: &[f64]) -> Option<f64> {
        let n = x.len();
        let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
        for i in 0..n {
            for j in i + 1..n {
                let sx = (x[i] - x[j]).signum() as i64 * (x[i] != x[j]) as i64;
                let sy = (y[i] - y[j]).signum() as i64 * (y[i] != y[j]) as i64;
                match (sx, sy) {
                    (0, 0) => {
                        tx += 1;
                        ty += 1;
                    }
                    (0, _) => tx += 1,
                    (_, 0) => ty += 1,
                    _ if sx == sy => c += 1,
                    _ => d += 1,
                }
            }
        }
        let n0 = (n * (n - 1) / 2) as i64;
        let denom = (((n0 - tx) * (n0 - ty)) as f64).sqrt();
        (denom > 0.0).then(|| (c - d) as f64 / denom)
    }

    #[test]
    fn perfect_dependence() {
        let s = dependence(&[0., 1., 2.], &[0., 1., 2.]).unwrap();
        assert_eq!(s.pearson, Some(1.0));
        assert_eq!(s.kendall_tau_b, Some(1.0));
        assert_eq!(s.spearman_rho, Some(1.0));
        let s = dependence(&[0., 1.], &[1., 0.]).unwrap();
        assert_eq!(s.pearson, Some(-1.0));
        assert_eq!(s.kendall_tau_b, Some(-1.0));
        assert_eq!(s.spearman_rho, Some(-1.0));
    }

    #[test]
    fn constant_margin_is_undefined() {
        let s = dependence(&[2., 2., 2.], &[0., 1., 2.]).unwrap();
        assert_eq!(
            s,
            DependenceSummary {
                pearson: None,
                kendall_tau_b: None,
                spearman_rho: None
            }
        );
        assert!(dependence(&[1.], &[1., 2.]).is_err());
    }

    #[test]
    fn kendall_matches_brute_force_with_ties() {
        let x = [0., 1., 1., 2., 2., 2., 3., 0., 1., 3., 3., 2.];
        let y = [1., 1., 0., 2., 2., 3., 3., 0., 2., 1., 3., 2.];
        assert_abs_diff_eq!(
            kendall_tau_b(&x, &y).unwrap(),
            kendall_brute(&x, &y).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn average_ranks_share_ties() {
        assert_eq!(
            average_ranks(&[10., 20., 10., 30.]),
            vec![1.5, 3.0, 1.5, 4.0]
        );
    }

    #[test]
    fn moments_from_pmf() {
        let origin = JointPmf::point_mass(&[2, 3], &[0, 0]);
        let m = pmf_moments(&origin).unwrap();
        assert!(m.types.iter().all(|t| t.mean == 0.0 && t.sd == 0.0));

        let two = JointPmf::from_cells(&[2, 1], [(&[0, 0][..], 0.5), (&[2, 0][..], 0.5)]).unwrap();
        let m = pmf_moments(&two).unwrap();
        assert_eq!((m.types[0].mean, m.types[0].sd), (1.0, 1.0));
        assert_eq!(m.types[0].mean_proportion, 0.5);
    }

    #[test]
    fn moments_from_samples() {
        let s = SampleMatrix::from_rows(vec![4, 4], 1, vec![vec![0, 1], vec![2, 1], vec![4, 1]])
            .unwrap();
        let m = sample_moments(&s, 1).unwrap();
        assert_eq!(m.types[0].mean, 2.0);
        assert_eq!(m.types[0].sd, 2.0);
        assert_eq!(m.types[1].sd, 0.0);
        assert_eq!(correlations(&s, 1).unwrap().pearson, None);
    }

    #[test]
    fn survival_edges() {
        let mut pmf = JointPmf::zeros(&[2, 3]);
        for i in 0..pmf.cell_count() {
            pmf.add_at(i, 1.0 / 12.0);
        }
        assert_eq!(upper_orthant_survival(&pmf, &[2, 3]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            upper_orthant_survival(&pmf, &[-1, -1]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            upper_orthant_survival(&pmf, &[1, 2]).unwrap(),
            1.0 / 12.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            lower_orthant_cdf(&pmf, &[2, 3]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(upper_orthant_survival(&pmf, &[1]).is_err());
    }

    #[test]
    fn orthant_tables_match_direct_sums() {
        let mut pmf = JointPmf::zeros(&[2, 1, 2]);
        for i in 0..pmf.cell_count() {
            pmf.add_at(i, (i + 1) as f64 / 78.0);
        }
        let up = orthant_table(&pmf, true);
        let down = orthant_table(&pmf, false);
        for idx in 0..pmf.cell_count() {
            let x: Vec<i64> = pmf.counts_of(idx).iter().map(|&c| c as i64).collect();
            let shifted: Vec<i64> = x.iter().map(|c| c - 1).collect();
            assert_abs_diff_eq!(
                up[idx],
                upper_orthant_survival(&pmf, &shifted).unwrap(),
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                down[idx],
                lower_orthant_cdf(&pmf, &x).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn order_check_self_and_mismatch() {
        let pmf = JointPmf::from_cells(&[1, 1], [(&[0, 0][..], 0.3), (&[1, 1][..], 0.7)]).unwrap();
        let report = check_orthant_monotone(&pmf, &pmf, 0.0).unwrap();
        assert!(report.passed);
        assert_eq!(report.max_violation, 0.0);

        let shifted = JointPmf::point_mass(&[1, 1], &[1, 1]);
        assert!(check_orthant_monotone(&pmf, &shifted, 0.0).unwrap().passed);
        let reversed = check_orthant_monotone(&shifted, &pmf, 1e-12).unwrap();
        assert!(!reversed.passed);
        assert!(reversed.max_violation > 0.29);

        let other = JointPmf::zeros(&[2, 1]);
        assert!(check_orthant_monotone(&pmf, &other, 0.0).is_err());
    }
}
