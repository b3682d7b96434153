//! Browser demo bindings. Every export takes plain numbers and returns a JSON
//! string; the native functions behind them are usable and tested without wasm.

use hoprisk_core::closed_form::{complete_homog_pmf, CompleteHomogParams};
use hoprisk_core::exact::joint_pmf;
use hoprisk_core::network::complete_network;
use hoprisk_core::sim::simulate_runs;
use hoprisk_core::stats::{
    check_orthant_monotone, correlations, pmf_moments, sample_moments, DependenceSummary,
    OrderReport, TypeMoments,
};
use hoprisk_core::{generate_ba, BaParams, JointPmf, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest complete graph the demo evaluates; keeps the page responsive.
pub const MAX_DEMO_NODES: usize = 40;
/// Largest `runs × nodes × depth` the BA demo accepts.
pub const MAX_DEMO_WORK: usize = 50_000_000;

#[derive(Debug, Serialize)]
pub struct PmfView {
    /// Grid shape `(N1 + 1, N2 + 1)`, row-major with `x2` fastest.
    pub dims: Vec<usize>,
    pub probs: Vec<f64>,
    pub moments: Vec<TypeMoments>,
}

impl PmfView {
    fn new(pmf: &JointPmf) -> Result<Self> {
        Ok(PmfView {
            dims: pmf.dims().to_vec(),
            probs: pmf.probs().to_vec(),
            moments: pmf_moments(pmf)?.types,
        })
    }
}

fn demo_limit(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(hoprisk_core::Error::InvalidParameter(format!(
            "{what} too large for the demo"
        )))
    }
}

/// Joint PMF on a two-type complete graph.
pub fn complete_pmf(n1: usize, n2: usize, p: f64, q: f64, depth: u32) -> Result<PmfView> {
    demo_limit(n1 + n2 <= MAX_DEMO_NODES, "graph")?;
    let pmf = complete_homog_pmf(&CompleteHomogParams {
        type_sizes: vec![n1, n2],
        p,
        q,
        depth,
    })?;
    PmfView::new(&pmf)
}

#[derive(Debug, Serialize)]
pub struct DepthPoint {
    pub depth: u32,
    pub types: Vec<TypeMoments>,
    pub dependence: DependenceSummary,
}

#[derive(Debug, Serialize)]
pub struct DepthCurves {
    pub type_sizes: Vec<usize>,
    pub points: Vec<DepthPoint>,
}

/// BA network typed by degree (top `top_k` hubs are type 1), simulated to `depth`.
#[allow(clippy::too_many_arguments)]
pub fn ba_depth_curves(
    nodes: usize,
    top_k: usize,
    p: [f64; 2],
    q: [f64; 2],
    depth: u32,
    runs: usize,
    seed: u64,
) -> Result<DepthCurves> {
    demo_limit(
        runs.saturating_mul(nodes).saturating_mul(depth as usize) <= MAX_DEMO_WORK,
        "simulation",
    )?;
    let net = generate_ba(
        BaParams {
            nodes,
            attach: 2,
            init: 5,
        },
        seed,
    )?
    .assign_types_by_degree(top_k)?
    .with_type_parameters(&p, &q)?;
    let samples = simulate_runs(&net, depth, runs, seed)?;
    let points = (1..=depth)
        .map(|l| {
            Ok(DepthPoint {
                depth: l,
                types: sample_moments(&samples, l)?.types,
                dependence: correlations(&samples, l)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DepthCurves {
        type_sizes: net.type_sizes().to_vec(),
        points,
    })
}

#[derive(Debug, Serialize)]
pub struct DepthComparison {
    pub shallow: PmfView,
    pub deep: PmfView,
    pub report: OrderReport,
}

/// Exact PMFs at `depth` and `depth + 1` on a two-type complete graph and their orthant comparison.
pub fn compare_depths(n1: usize, n2: usize, p: f64, q: f64, depth: u32) -> Result<DepthComparison> {
    demo_limit(n1 + n2 <= 12, "graph")?;
    let net = complete_network(&[n1, n2], p, q)?;
    let shallow = joint_pmf(&net, depth)?;
    let deep = joint_pmf(&net, depth + 1)?;
    let report = check_orthant_monotone(&shallow, &deep, 1e-12)?;
    Ok(DepthComparison {
        shallow: PmfView::new(&shallow)?,
        deep: PmfView::new(&deep)?,
        report,
    })
}

fn to_js<T: Serialize>(value: Result<T>) -> std::result::Result<String, JsValue> {
    let value = value.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = completePmf)]
pub fn complete_pmf_js(
    n1: usize,
    n2: usize,
    p: f64,
    q: f64,
    depth: u32,
) -> std::result::Result<String, JsValue> {
    to_js(complete_pmf(n1, n2, p, q, depth))
}

#[wasm_bindgen(js_name = baDepthCurves)]
#[allow(clippy::too_many_arguments)]
pub fn ba_depth_curves_js(
    nodes: usize,
    top_k: usize,
    p1: f64,
    p2: f64,
    q1: f64,
    q2: f64,
    depth: u32,
    runs: usize,
    seed: u32,
) -> std::result::Result<String, JsValue> {
    to_js(ba_depth_curves(
        nodes,
        top_k,
        [p1, p2],
        [q1, q2],
        depth,
        runs,
        u64::from(seed),
    ))
}

#[wasm_bindgen(js_name = compareDepths)]
pub fn compare_depths_js(
    n1: usize,
    n2: usize,
    p: f64,
    q: f64,
    depth: u32,
) -> std::result::Result<String, JsValue> {
    to_js(compare_depths(n1, n2, p, q, depth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_pmf_matches_engine() {
        let view = complete_pmf(2, 3, 0.2, 0.1, 2).unwrap();
        assert_eq!(view.dims, vec![3, 4]);
        let engine = joint_pmf(&complete_network(&[2, 3], 0.2, 0.1).unwrap(), 2).unwrap();
        for (a, b) in view.probs.iter().zip(engine.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(complete_pmf(30, 30, 0.1, 0.1, 2).is_err());
    }

    #[test]
    fn depth_curves_have_one_point_per_depth() {
        let curves = ba_depth_curves(60, 6, [0.05, 0.15], [0.2, 0.3], 4, 500, 7).unwrap();
        assert_eq!(curves.type_sizes, vec![6, 54]);
        assert_eq!(curves.points.len(), 4);
        for pair in curves.points.windows(2) {
            for t in 0..2 {
                assert!(pair[1].types[t].mean >= pair[0].types[t].mean);
            }
        }
    }

    #[test]
    fn deeper_depth_passes_orthant_check() {
        let cmp = compare_depths(2, 3, 0.2, 0.1, 1).unwrap();
        assert!(cmp.report.passed);
        let json = to_js(compare_depths(2, 2, 0.3, 0.4, 2)).unwrap();
        assert!(json.contains("\"passed\":true"));
    }
}
