//! Exact joint PMF of compromised-node counts by backward elimination.
//!
//! `R(U, C, D; ℓ)` is the probability that, on the subnetwork induced by
//! `U`, exactly the nodes of `C` end up compromised after `ℓ` propagation
//! rounds given that exactly `D` starts compromised. One round is a closed
//! product; deeper rounds condition on the set `D₁` compromised in the first
//! round, drop `D` (its attempts are spent) and recurse on `U \ D` with
//! seed `D₁` and one round fewer.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::network::NetworkModel;
use crate::nodeset::{NodeSet, MAX_NODES};
use crate::pmf::JointPmf;

/// Default refusal threshold for [`joint_pmf`].
pub const DEFAULT_EXACT_CAP: usize = 20;

/// Memoization key for `R(U, C, D; ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemoKey {
    pub active: NodeSet,
    pub target: NodeSet,
    pub seed: NodeSet,
    pub depth: u32,
}

/// Evaluator holding the dense `1 - q` table and the `R` memo for one network.
#[derive(Debug, Clone)]
pub struct ExactEngine<'a> {
    net: &'a NetworkModel,
    n: usize,
    /// `qbar[from * n + to] = 1 - q_{from,to}`; 1 off-edge and on the diagonal.
    qbar: Vec<f64>,
    memo: HashMap<MemoKey, f64>,
}

impl<'a> ExactEngine<'a> {
    pub fn new(net: &'a NetworkModel) -> Result<Self> {
        let n = net.node_count();
        if n > MAX_NODES {
            return Err(Error::ExactCapExceeded {
                nodes: n,
                cap: MAX_NODES,
                estimated_ops: estimated_cost(n, 1),
            });
        }
        let mut qbar = vec![1.0; n * n];
        for e in net.edges() {
            qbar[e.u * n + e.v] = 1.0 - e.q_uv;
            qbar[e.v * n + e.u] = 1.0 - e.q_vu;
        }
        Ok(ExactEngine {
            net,
            n,
            qbar,
            memo: HashMap::new(),
        })
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.n)
    }

    /// Number of memoized `R` values.
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn check_containment(&self, active: NodeSet, target: NodeSet, seed: NodeSet) -> Result<()> {
        if !active.is_subset(self.all_nodes()) {
            return Err(Error::Containment("active set contains unknown nodes"));
        }
        if !target.is_subset(active) {
            return Err(Error::Containment(
                "target set is not within the active set",
            ));
        }
        if !seed.is_subset(target) {
            return Err(Error::Containment("seed set is not within the target set"));
        }
        Ok(())
    }

    /// One propagation round on `active` from `seed`: every node of
    /// `target \ seed` is hit by at least one seed node and no node of
    /// `active \ target` is hit.
    pub fn one_hop_prob(&self, active: NodeSet, target: NodeSet, seed: NodeSet) -> Result<f64> {
        self.check_containment(active, target, seed)?;
        Ok(self.one_hop(active, target, seed))
    }

    fn one_hop(&self, active: NodeSet, target: NodeSet, seed: NodeSet) -> f64 {
        let n = self.n;
        let mut prob = 1.0;
        for i in target.difference(seed).iter() {
            let miss: f64 = seed.iter().map(|j| self.qbar[j * n + i]).product();
            prob *= 1.0 - miss;
            if prob == 0.0 {
                return 0.0;
            }
        }
        let outside = active.difference(target);
        for v in seed.iter() {
            let row = &self.qbar[v * n..(v + 1) * n];
            for l in outside.iter() {
                prob *= row[l];
            }
        }
        prob
    }

    /// `R(U, C, D₀; L)` for `L ≥ 1`.
    pub fn r_prob(
        &mut self,
        active: NodeSet,
        target: NodeSet,
        seed: NodeSet,
        depth: u32,
    ) -> Result<f64> {
        self.check_containment(active, target, seed)?;
        if depth == 0 {
            return Err(Error::InvalidParameter(
                "propagation depth must be at least 1 for R".into(),
            ));
        }
        Ok(self.r(active, target, seed, depth))
    }

    fn r(&mut self, active: NodeSet, target: NodeSet, seed: NodeSet, depth: u32) -> f64 {
        if seed.is_empty() {
            // Nothing left to propagate: only the empty target is reachable.
            return if target.is_empty() { 1.0 } else { 0.0 };
        }
        if depth == 1 || target == seed {
            return self.one_hop(active, target, seed);
        }
        let key = MemoKey {
            active,
            target,
            seed,
            depth,
        };
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let remaining = target.difference(seed);
        let next_active = active.difference(seed);
        let mut total = 0.0;
        for first_round in remaining.subsets() {
            let hop = self.one_hop(active, seed.union(first_round), seed);
            if hop == 0.0 {
                continue;
            }
            total += hop * self.r(next_active, remaining, first_round, depth - 1);
        }
        self.memo.insert(key, total);
        total
    }

    /// Probability that exactly the nodes of `direct` are directly compromised.
    fn direct_prob(&self, direct: NodeSet) -> f64 {
        (0..self.n)
            .map(|i| {
                let p = self.net.p(i);
                if direct.contains(i) {
                    p
                } else {
                    1.0 - p
                }
            })
            .product()
    }

    /// Probability that exactly the nodes of `target` are compromised after
    /// `depth` rounds. `depth = 0` counts direct compromise only.
    pub fn event_prob(&mut self, target: NodeSet, depth: u32) -> Result<f64> {
        if !target.is_subset(self.all_nodes()) {
            let bad = target.difference(self.all_nodes()).iter().next().unwrap();
            return Err(Error::UnknownNode(bad));
        }
        Ok(self.event(target, depth))
    }

    fn event(&mut self, target: NodeSet, depth: u32) -> f64 {
        if depth == 0 {
            return self.direct_prob(target);
        }
        let all = self.all_nodes();
        let mut total = 0.0;
        for direct in target.subsets() {
            let r = self.r(all, target, direct, depth);
            if r == 0.0 {
                continue;
            }
            total += self.direct_prob(direct) * r;
        }
        total
    }
}

/// Rough count of one-hop evaluations for a full joint PMF.
pub fn estimated_cost(nodes: usize, depth: u32) -> f64 {
    3f64.powi(nodes as i32) * f64::from(depth.max(1))
}

pub fn one_hop_prob(
    net: &NetworkModel,
    active: NodeSet,
    target: NodeSet,
    seed: NodeSet,
) -> Result<f64> {
    ExactEngine::new(net)?.one_hop_prob(active, target, seed)
}

pub fn r_prob(
    net: &NetworkModel,
    active: NodeSet,
    target: NodeSet,
    seed: NodeSet,
    depth: u32,
) -> Result<f64> {
    ExactEngine::new(net)?.r_prob(active, target, seed, depth)
}

pub fn event_prob(net: &NetworkModel, target: NodeSet, depth: u32) -> Result<f64> {
    ExactEngine::new(net)?.event_prob(target, depth)
}

/// Exact joint PMF with the default node cap.
pub fn joint_pmf(net: &NetworkModel, depth: u32) -> Result<JointPmf> {
    joint_pmf_with_cap(net, depth, DEFAULT_EXACT_CAP)
}

/// Exact joint PMF, refusing networks with more than `cap` nodes (at most 64).
pub fn joint_pmf_with_cap(net: &NetworkModel, depth: u32, cap: usize) -> Result<JointPmf> {
    let n = net.node_count();
    let cap = cap.min(MAX_NODES);
    if n > cap {
        return Err(Error::ExactCapExceeded {
            nodes: n,
            cap,
            estimated_ops: estimated_cost(n, depth),
        });
    }
    // Every round adds a node or stops, so depths beyond N change nothing.
    let depth = depth.min(n as u32);

    let type_masks: Vec<NodeSet> = (0..net.type_count())
        .map(|t| (0..n).filter(|&i| net.node_type(i) == t).collect())
        .collect();
    let mut pmf = JointPmf::zeros(net.type_sizes());
    let cell_of = |target: NodeSet, pmf: &JointPmf| {
        let counts: Vec<usize> = type_masks
            .iter()
            .map(|&m| target.intersection(m).len())
            .collect();
        pmf.index(&counts)
    };

    let engine = ExactEngine::new(net)?;
    let all = engine.all_nodes();
    let probs = event_probs(engine, all, depth);
    for (target, prob) in all.subsets().zip(probs) {
        let idx = cell_of(target, &pmf);
        pmf.add_at(idx, prob);
    }
    Ok(pmf)
}

#[cfg(not(feature = "parallel"))]
fn event_probs(mut engine: ExactEngine<'_>, all: NodeSet, depth: u32) -> Vec<f64> {
    all.subsets().map(|c| engine.event(c, depth)).collect()
}

// Each worker owns a memo; values are pure functions of their key, so the
// result is bit-identical to the sequential path.
#[cfg(feature = "parallel")]
fn event_probs(engine: ExactEngine<'_>, all: NodeSet, depth: u32) -> Vec<f64> {
    use rayon::prelude::*;
    let targets: Vec<NodeSet> = all.subsets().collect();
    targets
        .par_iter()
        .map_init(|| engine.clone(), |eng, &c| eng.event(c, depth))
        .collect()
}
