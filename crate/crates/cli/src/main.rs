//! `hoprisk`: exact and simulated joint compromise-count distributions for
//! typed networks under L-hop propagation.

mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use hoprisk_core::exact::{joint_pmf_with_cap, DEFAULT_EXACT_CAP};
use hoprisk_core::network::{bipartite_network, complete_network, star_network};
use hoprisk_core::score::{parse_rules, score_distribution};
use hoprisk_core::sim::{empirical_pmf, simulate_runs, SampleMatrix};
use hoprisk_core::stats::{
    check_orthant_monotone, pairwise_correlations, pmf_moments, sample_moments, MomentSummary,
};
use hoprisk_core::{generate_ba, BaParams, JointPmf, NetworkModel};

use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "hoprisk",
    version,
    about = "Joint cyber-risk distributions under L-hop propagation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact joint PMF of per-type compromised counts.
    Exact(ExactArgs),
    /// Monte Carlo samples of cumulative counts at every depth 1..=L.
    Simulate(SimulateArgs),
    /// Moments, correlations and contour data from samples or a PMF.
    Stats(StatsArgs),
    /// Risk-score distribution of a PMF under a rule file.
    Score(ScoreArgs),
    /// Write a network JSON file.
    Generate(GenerateArgs),
    /// Orthant-order comparison between depths or scaled probabilities.
    OrderCheck(OrderCheckArgs),
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, short = 'L')]
    depth: u32,
    #[arg(long)]
    out: PathBuf,
    /// Raise the node limit of the exact engine (hard limit 64).
    #[arg(long)]
    cap_override: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, short = 'L')]
    depth: u32,
    #[arg(long, short = 'K')]
    runs: usize,
    /// Master seed; drawn from entropy and reported when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long, conflicts_with = "pmf", required_unless_present = "pmf")]
    samples: Option<PathBuf>,
    #[arg(long)]
    pmf: Option<PathBuf>,
    /// Network the samples came from; supplies the type sizes.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Depth label written for PMF input.
    #[arg(long, short = 'L')]
    depth: Option<u32>,
    /// Also write `x1,x2,prob` contour data for this depth (two types only).
    #[arg(long)]
    contour_depth: Option<u32>,
    /// Moments CSV; correlations and contour files are written beside it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    pmf: PathBuf,
    #[arg(long)]
    rules: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(subcommand)]
    kind: GenerateKind,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenerateKind {
    /// Preferential-attachment graph, optionally typed by degree.
    Ba {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 2)]
        attach: usize,
        #[arg(long, default_value_t = 5)]
        init: usize,
        /// The k highest-degree nodes become type 1, the rest type 2.
        #[arg(long)]
        top_k: Option<usize>,
        /// Direct-compromise probability per type, comma separated.
        #[arg(long, value_delimiter = ',')]
        p_type: Vec<f64>,
        /// Probability that a node of each type compromises a neighbour, comma separated.
        #[arg(long, value_delimiter = ',')]
        q_type: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Complete graph with homogeneous probabilities.
    Complete {
        /// Nodes per type, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// Star: hub is type 1, leaves type 2.
    Star {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        p_hub: f64,
        #[arg(long)]
        p_leaf: f64,
        #[arg(long)]
        q_hub_leaf: f64,
        #[arg(long)]
        q_leaf_hub: f64,
    },
    /// Complete bipartite graph between two types.
    Bipartite {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long)]
        q12: f64,
        #[arg(long)]
        q21: f64,
    },
}

#[derive(Debug, Args)]
struct OrderCheckArgs {
    #[arg(long)]
    network: PathBuf,
    /// Depths to compare pairwise in order; with scaling flags, each depth is checked separately.
    #[arg(long, short = 'L', num_args = 1.., required = true)]
    depths: Vec<u32>,
    /// Compare against the network with every p multiplied by this factor.
    #[arg(long)]
    p_scale: Option<f64>,
    /// Compare against the network with every q multiplied by this factor.
    #[arg(long)]
    q_scale: Option<f64>,
    /// Swap the roles of the smaller and larger PMF.
    #[arg(long)]
    reverse: bool,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    cap_override: Option<usize>,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Exact(args) => cmd_exact(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Score(args) => cmd_score(args),
        Command::Generate(args) => cmd_generate(args),
        Command::OrderCheck(args) => cmd_order_check(args),
    }
}

fn load_network(path: &Path) -> Result<NetworkModel> {
    NetworkModel::load_json(path).with_context(|| format!("loading network {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let seed = rand::random();
        eprintln!("seed: {seed}");
        seed
    })
}

/// `stats.csv` → `stats.<suffix>.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let cap = args.cap_override.unwrap_or(DEFAULT_EXACT_CAP);
    let pmf = joint_pmf_with_cap(&net, args.depth, cap)?;
    pmf.write_csv(&args.out)?;

    let mut manifest = RunManifest::new("exact");
    manifest.input(&args.network)?.output(&args.out)?;
    manifest.param("depth", args.depth).param("cap", cap);
    manifest.write_beside(&args.out)?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    ensure!(args.runs >= 1, "--runs must be at least 1");
    let net = load_network(&args.network)?;
    let seed = resolve_seed(args.seed);
    let samples = simulate_runs(&net, args.depth, args.runs, seed)?;
    samples.write_csv(&args.out)?;

    let mut manifest = RunManifest::new("simulate");
    manifest.input(&args.network)?.output(&args.out)?;
    manifest
        .param("depth", args.depth)
        .param("runs", args.runs)
        .param("seed", seed)
        .param("type_sizes", net.type_sizes());
    manifest.write_beside(&args.out)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |x| format!("{x}"))
}

fn push_moments(out: &mut String, depth: &str, summary: &MomentSummary) {
    for (t, m) in summary.types.iter().enumerate() {
        let _ = writeln!(out, "{depth},{},{},{}", t + 1, m.mean, m.sd);
    }
}

fn contour_csv(pmf: &JointPmf) -> Result<String> {
    ensure!(
        pmf.type_count() == 2,
        "contour export needs exactly two types"
    );
    let mut out = String::from("x1,x2,prob\n");
    for (x, p) in pmf.iter() {
        let _ = writeln!(out, "{},{},{p}", x[0], x[1]);
    }
    Ok(out)
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let mut manifest = RunManifest::new("stats");
    let sizes = match &args.network {
        Some(path) => {
            manifest.input(path)?;
            Some(load_network(path)?.type_sizes().to_vec())
        }
        None => None,
    };
    let mut outputs = vec![args.out.clone()];
    let mut moments = String::from("depth,type,mean,sd\n");

    if let Some(path) = &args.samples {
        manifest.input(path)?;
        let samples = SampleMatrix::read_csv(path, sizes.as_deref())?;
        let mut corr = String::from("depth,pair,pearson,kendall,spearman\n");
        for l in 1..=samples.depth() {
            push_moments(&mut moments, &l.to_string(), &sample_moments(&samples, l)?);
            for pair in pairwise_correlations(&samples, l)? {
                let s = pair.summary;
                let _ = writeln!(
                    corr,
                    "{l},{}-{},{},{},{}",
                    pair.first + 1,
                    pair.second + 1,
                    fmt_opt(s.pearson),
                    fmt_opt(s.kendall_tau_b),
                    fmt_opt(s.spearman_rho)
                );
            }
        }
        let corr_path = sibling(&args.out, "corr");
        write_text(&corr_path, &corr)?;
        outputs.push(corr_path);
        if let Some(l) = args.contour_depth {
            let contour_path = sibling(&args.out, "contour");
            write_text(&contour_path, &contour_csv(&empirical_pmf(&samples, l)?)?)?;
            outputs.push(contour_path);
        }
    } else if let Some(path) = &args.pmf {
        manifest.input(path)?;
        let pmf = JointPmf::read_csv(path)?;
        if let Some(sizes) = &sizes {
            ensure!(
                &pmf.type_sizes() == sizes,
                "pmf dims {:?} do not match network type sizes {sizes:?}",
                pmf.type_sizes()
            );
        }
        let label = args
            .depth
            .map_or_else(|| "NA".to_owned(), |d| d.to_string());
        push_moments(&mut moments, &label, &pmf_moments(&pmf)?);
        if args.contour_depth.is_some() {
            let contour_path = sibling(&args.out, "contour");
            write_text(&contour_path, &contour_csv(&pmf)?)?;
            outputs.push(contour_path);
        }
    } else {
        bail!("one of --samples or --pmf is required");
    }
    write_text(&args.out, &moments)?;

    for path in &outputs {
        manifest.output(path)?;
    }
    manifest
        .param("depth", args.depth)
        .param("contour_depth", args.contour_depth);
    manifest.write_beside(&args.out)?;
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let pmf = JointPmf::read_csv(&args.pmf)?;
    let text = fs::read_to_string(&args.rules)
        .with_context(|| format!("reading {}", args.rules.display()))?;
    let rules = parse_rules(&text)?;
    let dist = score_distribution(&rules, &pmf)?;
    let mut out = String::from("score,prob\n");
    for (score, p) in &dist {
        let _ = writeln!(out, "{score},{p:.16e}");
    }
    write_text(&args.out, &out)?;

    let mut manifest = RunManifest::new("score");
    manifest
        .input(&args.pmf)?
        .input(&args.rules)?
        .output(&args.out)?;
    manifest.write_beside(&args.out)?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let out = args.out.context("--out is required")?;
    let mut manifest = RunManifest::new("generate");
    let net = match args.kind {
        GenerateKind::Ba {
            nodes,
            attach,
            init,
            top_k,
            p_type,
            q_type,
            seed,
        } => {
            let seed = resolve_seed(seed);
            let mut net = generate_ba(
                BaParams {
                    nodes,
                    attach,
                    init,
                },
                seed,
            )?;
            if let Some(k) = top_k {
                net = net.assign_types_by_degree(k)?;
            }
            if !p_type.is_empty() || !q_type.is_empty() {
                let m = net.type_count();
                let p = if p_type.is_empty() {
                    vec![0.0; m]
                } else {
                    p_type.clone()
                };
                let q = if q_type.is_empty() {
                    vec![0.0; m]
                } else {
                    q_type.clone()
                };
                net = net.with_type_parameters(&p, &q)?;
            }
            manifest
                .param("kind", "ba")
                .param("nodes", nodes)
                .param("attach", attach)
                .param("init", init)
                .param("top_k", top_k)
                .param("p_type", p_type)
                .param("q_type", q_type)
                .param("seed", seed);
            net
        }
        GenerateKind::Complete { sizes, p, q } => {
            manifest
                .param("kind", "complete")
                .param("sizes", &sizes)
                .param("p", p)
                .param("q", q);
            complete_network(&sizes, p, q)?
        }
        GenerateKind::Star {
            nodes,
            p_hub,
            p_leaf,
            q_hub_leaf,
            q_leaf_hub,
        } => {
            manifest
                .param("kind", "star")
                .param("nodes", nodes)
                .param("p_hub", p_hub)
                .param("p_leaf", p_leaf)
                .param("q_hub_leaf", q_hub_leaf)
                .param("q_leaf_hub", q_leaf_hub);
            star_network(nodes, p_hub, p_leaf, q_hub_leaf, q_leaf_hub)?
        }
        GenerateKind::Bipartite {
            n1,
            n2,
            p1,
            p2,
            q12,
            q21,
        } => {
            manifest
                .param("kind", "bipartite")
                .param("n1", n1)
                .param("n2", n2)
                .param("p1", p1)
                .param("p2", p2)
                .param("q12", q12)
                .param("q21", q21);
            bipartite_network(n1, n2, p1, p2, q12, q21)?
        }
    };
    net.save_json(&out)?;
    manifest.output(&out)?;
    manifest.write_beside(&out)?;
    Ok(())
}

fn cmd_order_check(args: OrderCheckArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let cap = args.cap_override.unwrap_or(DEFAULT_EXACT_CAP);
    let scaled = match (args.p_scale, args.q_scale) {
        (None, None) => None,
        (p, q) => Some(net.scaled(p.unwrap_or(1.0), q.unwrap_or(1.0))?),
    };

    let mut comparisons: Vec<(String, JointPmf, JointPmf)> = Vec::new();
    match &scaled {
        Some(other) => {
            for &d in &args.depths {
                comparisons.push((
                    format!(
                        "L={d}: base vs p×{} q×{}",
                        args.p_scale.unwrap_or(1.0),
                        args.q_scale.unwrap_or(1.0)
                    ),
                    joint_pmf_with_cap(&net, d, cap)?,
                    joint_pmf_with_cap(other, d, cap)?,
                ));
            }
        }
        None => {
            let pmfs = args
                .depths
                .iter()
                .map(|&d| joint_pmf_with_cap(&net, d, cap))
                .collect::<Result<Vec<_>, _>>()?;
            if pmfs.len() == 1 {
                comparisons.push((
                    format!("L={} vs itself", args.depths[0]),
                    pmfs[0].clone(),
                    pmfs[0].clone(),
                ));
            }
            for (i, pair) in pmfs.windows(2).enumerate() {
                comparisons.push((
                    format!("L={} vs L={}", args.depths[i], args.depths[i + 1]),
                    pair[0].clone(),
                    pair[1].clone(),
                ));
            }
        }
    }

    let mut report = String::new();
    let mut all_pass = true;
    for (label, lo, hi) in comparisons {
        let (label, lo, hi) = if args.reverse {
            (format!("{label} (reversed)"), hi, lo)
        } else {
            (label, lo, hi)
        };
        let r = check_orthant_monotone(&lo, &hi, args.tol)?;
        all_pass &= r.passed;
        report.push_str(&r.render(&label));
    }
    let _ = writeln!(
        report,
        "overall: {}",
        if all_pass { "PASS" } else { "FAIL" }
    );

    match &args.out {
        Some(path) => {
            write_text(path, &report)?;
            let mut manifest = RunManifest::new("order-check");
            manifest.input(&args.network)?.output(path)?;
            manifest
                .param("depths", &args.depths)
                .param("p_scale", args.p_scale)
                .param("q_scale", args.q_scale)
                .param("reverse", args.reverse)
                .param("tol", args.tol)
                .param("cap", cap);
            manifest.write_beside(path)?;
        }
        None => print!("{report}"),
    }
    Ok(())
}
