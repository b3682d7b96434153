//! Closed-form joint PMFs for symmetric topologies: complete graphs with
//! homogeneous probabilities, stars, and complete bipartite graphs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_prob, Error, Result};
use crate::pmf::JointPmf;

/// Largest `n` for which binomial coefficients are computed in exact integer
/// arithmetic.
const EXACT_BINOMIAL_LIMIT: usize = 60;

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= EXACT_BINOMIAL_LIMIT {
        let mut c: u128 = 1;
        for i in 1..=k as u128 {
            c = c * (n as u128 - k as u128 + i) / i;
        }
        c as f64
    } else {
        let ln: f64 = (1..=k)
            .map(|i| ((n - k + i) as f64).ln() - (i as f64).ln())
            .sum();
        ln.exp().round()
    }
}

/// Complete graph with every `p_i = p` and every `q_ij = q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteHomogParams {
    pub type_sizes: Vec<usize>,
    pub p: f64,
    pub q: f64,
    pub depth: u32,
}

/// Two node classes with class-level probabilities. `q_1_to_2` is the
/// probability that a class-1 node compromises a class-2 neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoClassParams {
    pub p1: f64,
    pub p2: f64,
    pub q_1_to_2: f64,
    pub q_2_to_1: f64,
}

impl TwoClassParams {
    fn validate(&self) -> Result<()> {
        check_prob(|| "p1".into(), self.p1)?;
        check_prob(|| "p2".into(), self.p2)?;
        check_prob(|| "q_1_to_2".into(), self.q_1_to_2)?;
        check_prob(|| "q_2_to_1".into(), self.q_2_to_1)
    }
}

/// `R_{K_u}(c, d; L)` on a complete graph with homogeneous `q`, memoized on
/// `(u, c, d, L)`.
#[derive(Debug, Clone)]
pub struct CompleteR {
    q: f64,
    memo: HashMap<(usize, usize, usize, u32), f64>,
}

impl CompleteR {
    pub fn new(q: f64) -> Result<Self> {
        check_prob(|| "q".into(), q)?;
        Ok(CompleteR {
            q,
            memo: HashMap::new(),
        })
    }

    /// Probability that exactly `c` of `u` nodes end compromised given that a
    /// particular `d` of them start compromised, after `depth ≥ 1` rounds.
    pub fn r(&mut self, u: usize, c: usize, d: usize, depth: u32) -> Result<f64> {
        if d > c || c > u {
            return Err(Error::InvalidParameter(format!(
                "need d <= c <= u, got u={u}, c={c}, d={d}"
            )));
        }
        if depth == 0 {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        Ok(self.eval(u, c, d, depth))
    }

    fn one_round(&self, u: usize, c: usize, d: usize) -> f64 {
        let qbar = 1.0 - self.q;
        let hit = 1.0 - qbar.powi(d as i32);
        hit.powi((c - d) as i32) * qbar.powi((d * (u - c)) as i32)
    }

    fn eval(&mut self, u: usize, c: usize, d: usize, depth: u32) -> f64 {
        if depth == 1 {
            return self.one_round(u, c, d);
        }
        if let Some(&v) = self.memo.get(&(u, c, d, depth)) {
            return v;
        }
        let rest = c - d;
        let mut total = 0.0;
        for i in 0..=rest {
            let hop = self.one_round(u, d + i, d);
            if hop == 0.0 {
                continue;
            }
            total += binomial(rest, i) * hop * self.eval(u - d, rest, i, depth - 1);
        }
        self.memo.insert((u, c, d, depth), total);
        total
    }
}

/// `R_{K_u}(c, d; L)` with a fresh memo.
pub fn r_complete(u: usize, c: usize, d: usize, depth: u32, q: f64) -> Result<f64> {
    CompleteR::new(q)?.r(u, c, d, depth)
}

/// Joint PMF on a complete graph with homogeneous `p`, `q`. `depth = 0`
/// gives the direct-only product of binomials.
pub fn complete_homog_pmf(params: &CompleteHomogParams) -> Result<JointPmf> {
    check_prob(|| "p".into(), params.p)?;
    if params.type_sizes.is_empty() || params.type_sizes.contains(&0) {
        return Err(Error::InvalidParameter(
            "type sizes must be positive".into(),
        ));
    }
    let n: usize = params.type_sizes.iter().sum();
    let (p, pbar) = (params.p, 1.0 - params.p);
    let mut r = CompleteR::new(params.q)?;

    // The inner sum depends only on the total count χ.
    let by_total: Vec<f64> = (0..=n)
        .map(|chi| {
            (0..=chi)
                .map(|d| {
                    let cond = if params.depth == 0 {
                        if d == chi {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        r.eval(n, chi, d, params.depth)
                    };
                    binomial(chi, d) * p.powi(d as i32) * pbar.powi((n - d) as i32) * cond
                })
                .sum()
        })
        .collect();

    let mut pmf = JointPmf::zeros(&params.type_sizes);
    for idx in 0..pmf.cell_count() {
        let x = pmf.counts_of(idx);
        let ways: f64 = x
            .iter()
            .zip(&params.type_sizes)
            .map(|(&xi, &ni)| binomial(ni, xi))
            .product();
        let chi: usize = x.iter().sum();
        pmf.add_at(idx, ways * by_total[chi]);
    }
    Ok(pmf)
}

/// Joint PMF of (hub compromised, leaves compromised) on a star with `n`
/// nodes. Class 1 is the hub, class 2 the leaves. Depths above 2 are
/// equivalent to 2 on a star.
pub fn star_pmf(params: &TwoClassParams, n: usize, depth: u32) -> Result<JointPmf> {
    params.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "star needs at least 2 nodes, got {n}"
        )));
    }
    if depth == 0 {
        return Err(Error::InvalidParameter(
            "star closed form needs depth 1 or 2".into(),
        ));
    }
    let depth = depth.min(2);
    let leaves = n - 1;
    let TwoClassParams {
        p1: p_hub,
        p2: p_leaf,
        q_1_to_2: q_out,
        q_2_to_1: q_in,
    } = *params;
    let (pbar_hub, pbar_leaf, qbar_out, qbar_in) =
        (1.0 - p_hub, 1.0 - p_leaf, 1.0 - q_out, 1.0 - q_in);
    let pw = |x: f64, e: usize| x.powi(e as i32);

    let mut pmf = JointPmf::zeros(&[1, leaves]);
    for m in 0..=leaves {
        let choose = binomial(leaves, m);
        let hub_safe =
            choose * pw(p_leaf, m) * pbar_hub * pw(pbar_leaf, leaves - m) * pw(qbar_in, m);
        pmf.add(&[0, m], hub_safe);

        // Hub compromised directly: it hits m - d of the leaves not already down.
        let hub_direct: f64 = (0..=m)
            .map(|d| {
                binomial(m, d)
                    * p_hub
                    * pw(p_leaf, d)
                    * pw(pbar_leaf, leaves - d)
                    * pw(q_out, m - d)
                    * pw(qbar_out, leaves - m)
            })
            .sum();

        let hub_indirect = if depth == 1 {
            choose * pw(p_leaf, m) * pbar_hub * pw(pbar_leaf, leaves - m) * (1.0 - pw(qbar_in, m))
        } else {
            // Hub falls to d directly compromised leaves, then attacks the rest.
            choose
                * (1..=m)
                    .map(|d| {
                        binomial(m, d)
                            * pbar_hub
                            * pw(p_leaf, d)
                            * pw(pbar_leaf, leaves - d)
                            * (1.0 - pw(qbar_in, d))
                            * pw(qbar_out, leaves - m)
                            * pw(q_out, m - d)
                    })
                    .sum::<f64>()
        };
        pmf.add(&[1, m], hub_indirect + choose * hub_direct);
    }
    Ok(pmf)
}

/// One-round joint PMF on the complete bipartite graph `K_{n1,n2}`.
pub fn bipartite_pmf(
    params: &TwoClassParams,
    n1: usize,
    n2: usize,
    depth: u32,
) -> Result<JointPmf> {
    params.validate()?;
    if depth != 1 {
        return Err(Error::InvalidParameter(format!(
            "bipartite closed form covers depth 1 only (got {depth}); use the exact engine"
        )));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter(
            "both sides need at least one node".into(),
        ));
    }
    let TwoClassParams {
        p1,
        p2,
        q_1_to_2,
        q_2_to_1,
    } = *params;
    let pw = |x: f64, e: usize| x.powi(e as i32);
    let mut pmf = JointPmf::zeros(&[n1, n2]);
    for m1 in 0..=n1 {
        for m2 in 0..=n2 {
            let mut inner = 0.0;
            for d1 in 0..=m1 {
                for d2 in 0..=m2 {
                    inner += binomial(m1, d1)
                        * binomial(m2, d2)
                        * pw(p1, d1)
                        * pw(p2, d2)
                        * pw(1.0 - p1, n1 - d1)
                        * pw(1.0 - p2, n2 - d2)
                        * pw(1.0 - pw(1.0 - q_1_to_2, d1), m2 - d2)
                        * pw(1.0 - pw(1.0 - q_2_to_1, d2), m1 - d1)
                        * pw(1.0 - q_1_to_2, d1 * (n2 - m2))
                        * pw(1.0 - q_2_to_1, d2 * (n1 - m1));
                }
            }
            pmf.add(&[m1, m2], binomial(n1, m1) * binomial(n2, m2) * inner);
        }
    }
    Ok(pmf)
}
