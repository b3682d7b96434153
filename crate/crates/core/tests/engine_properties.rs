mod support;

use hoprisk_core::closed_form::{
    bipartite_pmf, complete_homog_pmf, star_pmf, CompleteHomogParams, TwoClassParams,
};
use hoprisk_core::exact::joint_pmf;
use hoprisk_core::network::{bipartite_network, complete_network, star_network};
use hoprisk_core::stats::check_orthant_monotone;
use hoprisk_core::{build_network, EdgeSpec, NetworkModel, NodeSpec};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{brute_force_pmf, random_network};

#[test]
fn exact_engine_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..60 {
        let n = rng.random_range(1..=5);
        let net = random_network(&mut rng, n, 6);
        let depth = rng.random_range(1..=3);
        let exact = joint_pmf(&net, depth).unwrap();
        let oracle = brute_force_pmf(&net, depth);
        let diff = exact.max_abs_diff(&oracle).unwrap();
        assert!(
            diff <= 1e-12,
            "case {case}: diff {diff:e} on {net:?} at depth {depth}"
        );
    }
}

#[test]
fn hand_checked_path_matches_enumeration() {
    let net = build_network(
        vec![
            NodeSpec {
                id: 0,
                node_type: 0,
                p: 0.5,
            },
            NodeSpec {
                id: 1,
                node_type: 0,
                p: 0.0,
            },
            NodeSpec {
                id: 2,
                node_type: 0,
                p: 0.0,
            },
        ],
        vec![
            EdgeSpec {
                u: 0,
                v: 1,
                q_uv: 1.0,
                q_vu: 1.0,
            },
            EdgeSpec {
                u: 1,
                v: 2,
                q_uv: 1.0,
                q_vu: 1.0,
            },
        ],
    )
    .unwrap();
    let oracle = brute_force_pmf(&net, 2);
    assert_eq!(oracle.get(&[3]), 0.5);
    assert_eq!(joint_pmf(&net, 2).unwrap().get(&[3]), 0.5);
}

#[test]
fn complete_closed_form_matches_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..25 {
        let m = rng.random_range(1..=3);
        let sizes: Vec<usize> = (0..m).map(|_| rng.random_range(1..=3)).collect();
        if sizes.iter().sum::<usize>() > 8 {
            continue;
        }
        let (p, q, depth) = (
            rng.random::<f64>(),
            rng.random::<f64>(),
            rng.random_range(1..=4),
        );
        let closed = complete_homog_pmf(&CompleteHomogParams {
            type_sizes: sizes.clone(),
            p,
            q,
            depth,
        })
        .unwrap();
        let engine = joint_pmf(&complete_network(&sizes, p, q).unwrap(), depth).unwrap();
        let diff = closed.max_abs_diff(&engine).unwrap();
        assert!(
            diff <= 1e-12,
            "sizes {sizes:?} p={p} q={q} L={depth}: {diff:e}"
        );
    }
}

#[test]
fn star_closed_form_matches_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..25 {
        let n = rng.random_range(2..=8);
        let params = TwoClassParams {
            p1: rng.random(),
            p2: rng.random(),
            q_1_to_2: rng.random(),
            q_2_to_1: rng.random(),
        };
        let net = star_network(n, params.p1, params.p2, params.q_1_to_2, params.q_2_to_1).unwrap();
        for depth in [1, 2] {
            let closed = star_pmf(&params, n, depth).unwrap();
            let engine = joint_pmf(&net, depth).unwrap();
            let diff = closed.max_abs_diff(&engine).unwrap();
            assert!(diff <= 1e-12, "n={n} {params:?} L={depth}: {diff:e}");
        }
        // Depth saturates at 2 on a star.
        let deep = joint_pmf(&net, 5).unwrap();
        assert!(
            star_pmf(&params, n, 2)
                .unwrap()
                .max_abs_diff(&deep)
                .unwrap()
                <= 1e-12
        );
    }
}

#[test]
fn bipartite_closed_form_matches_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..25 {
        let (n1, n2) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let params = TwoClassParams {
            p1: rng.random(),
            p2: rng.random(),
            q_1_to_2: rng.random(),
            q_2_to_1: rng.random(),
        };
        let net = bipartite_network(
            n1,
            n2,
            params.p1,
            params.p2,
            params.q_1_to_2,
            params.q_2_to_1,
        )
        .unwrap();
        let closed = bipartite_pmf(&params, n1, n2, 1).unwrap();
        let engine = joint_pmf(&net, 1).unwrap();
        let diff = closed.max_abs_diff(&engine).unwrap();
        assert!(diff <= 1e-12, "K_{n1},{n2} {params:?}: {diff:e}");
    }
}

#[test]
fn label_permutation_within_type_leaves_pmf_unchanged() {
    let base = complete_network(&[2, 3], 0.25, 0.35).unwrap();
    // Interleave the type layout: ids 0,2 are type 0 now.
    let types = [0, 1, 0, 1, 1];
    let nodes = types
        .iter()
        .enumerate()
        .map(|(id, &t)| NodeSpec {
            id,
            node_type: t,
            p: 0.25,
        })
        .collect();
    let edges = base.edges().to_vec();
    let permuted = build_network(nodes, edges).unwrap();
    for depth in 0..4 {
        let a = joint_pmf(&base, depth).unwrap();
        let b = joint_pmf(&permuted, depth).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() <= 1e-15);
    }
}

#[test]
fn depth_saturates_at_node_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10 {
        let n = rng.random_range(1..=5);
        let net = random_network(&mut rng, n, 8);
        let at_n = joint_pmf(&net, n as u32).unwrap();
        for extra in 1..3 {
            assert_eq!(joint_pmf(&net, n as u32 + extra).unwrap(), at_n);
        }
    }
}

#[cfg(feature = "parallel")]
#[test]
fn exact_engine_is_thread_count_independent() {
    let net = complete_network(&[3, 4], 0.2, 0.3).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| joint_pmf(&net, 3).unwrap())
    };
    assert_eq!(run(1), run(4));
}

fn pmf_network(n: usize, seed: u64) -> NetworkModel {
    random_network(&mut ChaCha8Rng::seed_from_u64(seed), n, 10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn every_engine_normalizes(n in 1usize..=8, seed in any::<u64>(), depth in 0u32..=4) {
        let net = pmf_network(n, seed);
        let total = joint_pmf(&net, depth).unwrap().total();
        prop_assert!((total - 1.0).abs() <= 1e-9, "total {}", total);
    }

    #[test]
    fn closed_forms_normalize(
        n1 in 1usize..=4, n2 in 1usize..=4,
        p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, qa in 0.0f64..=1.0, qb in 0.0f64..=1.0,
        depth in 1u32..=6,
    ) {
        let params = TwoClassParams { p1, p2, q_1_to_2: qa, q_2_to_1: qb };
        let complete = complete_homog_pmf(&CompleteHomogParams { type_sizes: vec![n1, n2], p: p1, q: qa, depth }).unwrap();
        prop_assert!((complete.total() - 1.0).abs() <= 1e-9);
        prop_assert!((star_pmf(&params, n1 + n2, depth).unwrap().total() - 1.0).abs() <= 1e-9);
        prop_assert!((bipartite_pmf(&params, n1, n2, 1).unwrap().total() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn deeper_propagation_dominates_on_orthants(n in 1usize..=7, seed in any::<u64>(), depth in 1u32..=3) {
        let net = pmf_network(n, seed);
        let lo = joint_pmf(&net, depth).unwrap();
        let hi = joint_pmf(&net, depth + 1).unwrap();
        let report = check_orthant_monotone(&lo, &hi, 1e-12).unwrap();
        prop_assert!(report.passed, "max violation {:e}", report.max_violation);
    }

    #[test]
    fn larger_probabilities_dominate_on_orthants(
        n in 1usize..=7, seed in any::<u64>(), depth in 1u32..=3, bump in 0.0f64..0.5,
    ) {
        let net = pmf_network(n, seed);
        let base = joint_pmf(&net, depth).unwrap();

        let more_p: Vec<NodeSpec> = net.nodes().iter().enumerate()
            .map(|(i, s)| NodeSpec { p: (s.p + bump * ((i % 3) as f64 / 2.0)).min(1.0), ..*s })
            .collect();
        let p_net = build_network(more_p, net.edges().to_vec()).unwrap();
        let report = check_orthant_monotone(&base, &joint_pmf(&p_net, depth).unwrap(), 1e-12).unwrap();
        prop_assert!(report.passed, "p: {:e}", report.max_violation);

        let more_q: Vec<EdgeSpec> = net.edges().iter()
            .map(|e| EdgeSpec { q_uv: (e.q_uv + bump).min(1.0), ..*e })
            .collect();
        let q_net = build_network(net.nodes().to_vec(), more_q).unwrap();
        let report = check_orthant_monotone(&base, &joint_pmf(&q_net, depth).unwrap(), 1e-12).unwrap();
        prop_assert!(report.passed, "q: {:e}", report.max_violation);
    }
}
