//! Test-only helpers: a brute-force outcome enumerator and random instances.
#![allow(dead_code)]

use hoprisk_core::{build_network, EdgeSpec, JointPmf, NetworkModel, NodeSpec};
use rand::Rng;

/// Enumerates every direct-compromise pattern and every directed attempt
/// outcome, propagates each deterministically for `depth` rounds and
/// accumulates the probability mass of the resulting count vector.
pub fn brute_force_pmf(net: &NetworkModel, depth: u32) -> JointPmf {
    let n = net.node_count();
    let mut attempts: Vec<(usize, usize, f64)> = Vec::new();
    for e in net.edges() {
        attempts.push((e.u, e.v, e.q_uv));
        attempts.push((e.v, e.u, e.q_vu));
    }
    assert!(
        n + attempts.len() <= 24,
        "instance too large for enumeration"
    );
    let mut pmf = JointPmf::zeros(net.type_sizes());
    for direct in 0u32..(1 << n) {
        let mut w_direct = 1.0;
        for i in 0..n {
            let p = net.nodes()[i].p;
            w_direct *= if direct >> i & 1 == 1 { p } else { 1.0 - p };
        }
        if w_direct == 0.0 {
            continue;
        }
        for outcome in 0u32..(1 << attempts.len()) {
            let mut w = w_direct;
            for (k, &(_, _, q)) in attempts.iter().enumerate() {
                w *= if outcome >> k & 1 == 1 { q } else { 1.0 - q };
            }
            if w == 0.0 {
                continue;
            }
            let mut compromised = direct;
            let mut front = direct;
            for _ in 0..depth {
                let mut next = 0u32;
                for (k, &(from, to, _)) in attempts.iter().enumerate() {
                    if front >> from & 1 == 1 && compromised >> to & 1 == 0 && outcome >> k & 1 == 1
                    {
                        next |= 1 << to;
                    }
                }
                compromised |= next;
                front = next;
            }
            let mut counts = vec![0usize; net.type_count()];
            for i in 0..n {
                if compromised >> i & 1 == 1 {
                    counts[net.nodes()[i].node_type] += 1;
                }
            }
            pmf.add(&counts, w);
        }
    }
    pmf
}

/// Random typed graph with `n` nodes, at most `max_edges` edges and
/// independent uniform `p`, `q`. Some probabilities are pinned to 0 or 1.
pub fn random_network<R: Rng>(rng: &mut R, n: usize, max_edges: usize) -> NetworkModel {
    let types = rng.random_range(1..=n.min(3));
    let mut node_types: Vec<usize> = (0..n)
        .map(|i| {
            if i < types {
                i
            } else {
                rng.random_range(0..types)
            }
        })
        .collect();
    // Shuffle so type blocks are not contiguous.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        node_types.swap(i, j);
    }
    let prob = |rng: &mut R| match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random::<f64>(),
    };
    let nodes = (0..n)
        .map(|id| NodeSpec {
            id,
            node_type: node_types[id],
            p: prob(rng),
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    for i in (1..pairs.len()).rev() {
        let j = rng.random_range(0..=i);
        pairs.swap(i, j);
    }
    let m = rng.random_range(0..=max_edges.min(pairs.len()));
    let edges = pairs[..m]
        .iter()
        .map(|&(u, v)| EdgeSpec {
            u,
            v,
            q_uv: prob(rng),
            q_vu: prob(rng),
        })
        .collect();
    build_network(nodes, edges).expect("generated network is valid")
}
