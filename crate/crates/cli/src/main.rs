//! Batch experiment runner: exact motif counts, convergence sweeps over an
//! n-grid, regularity partitions, and the built-in example checks.
//!
//! Exit codes: 0 success, 2 configuration error, 3 capacity error,
//! 4 example-check failure.

mod pexpr;
mod report;
mod sources;

use clap::{Parser, Subcommand};
use gmetrics::counts::Counter;
use gmetrics::cutnorm::{dhat_cut, graph_kernel_cut, Alignment};
use gmetrics::graph::Graph;
use gmetrics::kernel::{motif_density, named_kernel, path_power, NamedKernel};
use gmetrics::motif::{parse_motif, Motif};
use gmetrics::partition_metric::{partition_distance, Side};
use gmetrics::regularity::{strong_regular_partition, weak_regular_partition, Partition};
use gmetrics::Error as CoreError;
use pexpr::PExpr;
use rayon::prelude::*;
use report::{emit, Format, ReportRow};
use serde_json::json;
use sources::{load_graph, load_kernel, ConstructionSpec};
use std::io::Write;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "gmetrics", about = "sparse graph metric experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact motif counts (hom, emb, t_p, s_p) on a graph.
    Count {
        /// Edge-list file (`u v` per line, # comments).
        #[arg(long)]
        graph: Option<String>,
        /// Construction spec `name:key=val,...` used instead of a file.
        #[arg(long)]
        construction: Option<String>,
        /// Order for sampled constructions.
        #[arg(long)]
        n: Option<usize>,
        /// Semicolon-separated motif specs: K2, C4, P3, K2,2, Star3,
        /// Theta3,3, Tree[0,0,1], inline 0-1,1-2 (multi: prefix allowed).
        #[arg(long, default_value = "K2;C3;C4")]
        motifs: String,
        /// Normalizing density: `c`, `n^-a`, `1/log n`, `sqrt(log n / n)`.
        #[arg(long = "p-expr", default_value = "1")]
        p_expr: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Backtracking budget for the generic counting engine.
        #[arg(long, default_value_t = 500_000_000)]
        budget: u64,
    },
    /// Convergence sweep of a statistic set over an n-grid.
    Converge {
        #[arg(long)]
        construction: Option<String>,
        /// Kernel spec: samples G_p(n, kappa) and enables cut/partition stats.
        #[arg(long)]
        kernel: Option<String>,
        /// Comma-separated n values.
        #[arg(long = "n-grid", default_value = "500,1000,2000")]
        n_grid: String,
        #[arg(long = "p-expr", default_value = "n^-0.3")]
        p_expr: String,
        /// Statistic set: counts | cut | partition.
        #[arg(long, default_value = "counts")]
        stat: String,
        #[arg(long, default_value = "K2;C4")]
        motifs: String,
        /// Seeds per grid cell.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Restart/sample budget for heuristic statistics.
        #[arg(long, default_value_t = 8)]
        budget: usize,
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Weak or strong (eps,p)-regular partition of a graph.
    Regularity {
        #[arg(long)]
        graph: Option<String>,
        #[arg(long)]
        construction: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps: f64,
        /// Density bound constant used by the round bookkeeping.
        #[arg(long = "C", default_value_t = 2.0)]
        c_bound: f64,
        /// weak | strong.
        #[arg(long, default_value = "weak")]
        kind: String,
        /// Initial part count.
        #[arg(long, default_value_t = 1)]
        k0: usize,
        #[arg(long = "p-expr", default_value = "n^-0.3")]
        p_expr: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Path for the full JSON report (summary row goes to stdout).
        #[arg(long)]
        out: Option<String>,
    },
    /// Built-in example checks with baked thresholds (exit 4 on failure).
    Examples {
        /// chessboard-moments | dhat-triangle | polarity-c4free |
        /// subdivision-identity | list
        name: String,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(AppError::Config(msg)) => {
            eprintln!("config error: {msg}");
            2
        }
        Err(AppError::Capacity(msg)) => {
            eprintln!("capacity error: {msg}");
            3
        }
    };
    std::process::exit(code);
}

enum AppError {
    Config(String),
    Capacity(String),
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> AppError {
        match e {
            CoreError::Capacity(m) => AppError::Capacity(m),
            other => AppError::Config(other.to_string()),
        }
    }
}

impl From<String> for AppError {
    fn from(m: String) -> AppError {
        AppError::Config(m)
    }
}

fn config<T>(msg: impl Into<String>) -> Result<T, AppError> {
    Err(AppError::Config(msg.into()))
}

fn parse_motif_list(text: &str) -> Result<Vec<Motif>, AppError> {
    let mut out = Vec::new();
    for spec in text.split(';').filter(|s| !s.trim().is_empty()) {
        out.push(parse_motif(spec).map_err(AppError::from)?);
    }
    if out.is_empty() {
        return config("empty motif list");
    }
    Ok(out)
}

fn open_output(path: &Option<String>) -> Result<Box<dyn Write>, AppError> {
    match path {
        None => Ok(Box::new(std::io::stdout())),
        Some(p) => Ok(Box::new(
            std::fs::File::create(p).map_err(|e| AppError::Config(e.to_string()))?,
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_count(
    graph: Option<String>,
    construction: Option<String>,
    n: Option<usize>,
    motifs: String,
    p_expr: String,
    seed: u64,
    out: Option<String>,
    format: String,
    budget: u64,
) -> Result<i32, AppError> {
    let format = Format::parse(&format)?;
    let pe = PExpr::parse(&p_expr)?;
    let motifs = parse_motif_list(&motifs)?;
    let (g, source) = resolve_graph(&graph, &construction, n, &pe, seed)?;
    let p = pe.eval(g.n());
    if p <= 0.0 {
        return config("p must evaluate positive");
    }
    let mut counter = Counter::new(&g).with_budget(budget);
    let mut rows = Vec::new();
    for f in &motifs {
        let t0 = Instant::now();
        let rep = counter.normalized(f, p)?;
        let wall = t0.elapsed().as_millis();
        for (stat, value) in [
            (format!("hom({})", f.label()), rep.hom.to_string()),
            (format!("emb({})", f.label()), rep.emb.to_string()),
            (format!("t_p({})", f.label()), rep.t_p.to_string()),
            (format!("s_p({})", f.label()), rep.s_p.to_string()),
        ] {
            rows.push(ReportRow {
                experiment: "count".into(),
                n: g.n(),
                p,
                statistic: stat,
                value,
                stderr: None,
                seed,
                wall_ms: wall,
            });
        }
    }
    let echo = json!({
        "command": "count", "source": source, "p_expr": pe.describe(),
        "motifs": motifs.iter().map(|m| m.label()).collect::<Vec<_>>(),
        "seed": seed, "budget": budget,
    });
    emit(&mut *open_output(&out)?, &format, &echo, &rows)
        .map_err(|e| AppError::Config(e.to_string()))?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_converge(
    construction: Option<String>,
    kernel: Option<String>,
    n_grid: String,
    p_expr: String,
    stat: String,
    motifs: String,
    seeds: u64,
    seed: u64,
    budget: usize,
    out: Option<String>,
    format: String,
) -> Result<i32, AppError> {
    let format = Format::parse(&format)?;
    let pe = PExpr::parse(&p_expr)?;
    let grid: Vec<usize> = n_grid
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| format!("bad n `{s}`")))
        .collect::<Result<_, String>>()?;
    if grid.is_empty() {
        return config("empty n grid");
    }
    let kappa = kernel.as_deref().map(load_kernel).transpose()?;
    let spec = construction
        .as_deref()
        .map(ConstructionSpec::parse)
        .transpose()?;
    if kappa.is_none() && spec.is_none() {
        return config("converge needs --kernel or --construction");
    }
    let motifs = parse_motif_list(&motifs)?;
    let cells: Vec<(usize, u64)> = grid
        .iter()
        .flat_map(|&n| (0..seeds).map(move |s| (n, seed.wrapping_add(s + 1))))
        .collect();
    let rows_nested: Result<Vec<Vec<ReportRow>>, String> = cells
        .par_iter()
        .map(|&(n, cell_seed)| {
            let t0 = Instant::now();
            let p = pe.eval(n);
            let rec = match (&kappa, &spec) {
                (Some(k), None) => gmetrics::sampler::sample_inhomogeneous(n, k, p, cell_seed)
                    .map_err(|e| e.to_string())?,
                (_, Some(c)) => c.sample(n, p, cell_seed)?,
                (None, None) => unreachable!(),
            };
            let mut rows = Vec::new();
            match stat.as_str() {
                "counts" => {
                    let mut counter = Counter::new(&rec.graph);
                    for f in &motifs {
                        let rep = counter.normalized(f, p).map_err(|e| e.to_string())?;
                        rows.push(ReportRow {
                            experiment: "converge".into(),
                            n,
                            p,
                            statistic: format!("s_p({})", f.label()),
                            value: rep.s_p.to_string(),
                            stderr: None,
                            seed: cell_seed,
                            wall_ms: t0.elapsed().as_millis(),
                        });
                    }
                }
                "cut" => {
                    let k = kappa.as_ref().ok_or_else(|| "cut statistic needs --kernel".to_string())?;
                    let alignment = match &rec.latent_types {
                        Some(t) => Alignment::Given(t.clone()),
                        None => Alignment::Identity,
                    };
                    let est = graph_kernel_cut(&rec.graph, k, p, &alignment, budget, cell_seed)
                        .map_err(|e| e.to_string())?;
                    rows.push(ReportRow {
                        experiment: "converge".into(),
                        n,
                        p,
                        statistic: "cut_estimate".into(),
                        value: est.lower_bound.to_string(),
                        stderr: None,
                        seed: cell_seed,
                        wall_ms: t0.elapsed().as_millis(),
                    });
                }
                "partition" => {
                    let k = kappa.as_ref().ok_or_else(|| "partition statistic needs --kernel".to_string())?;
                    let (per_k, agg) = partition_distance(
                        &Side::Graph(&rec.graph),
                        &Side::Kernel(k),
                        p,
                        4,
                        budget.max(20),
                        cell_seed,
                    )
                    .map_err(|e| e.to_string())?;
                    for (kk, d) in per_k {
                        rows.push(ReportRow {
                            experiment: "converge".into(),
                            n,
                            p,
                            statistic: format!("d_H(k={kk})"),
                            value: d.to_string(),
                            stderr: None,
                            seed: cell_seed,
                            wall_ms: t0.elapsed().as_millis(),
                        });
                    }
                    rows.push(ReportRow {
                        experiment: "converge".into(),
                        n,
                        p,
                        statistic: "d_P_aggregate".into(),
                        value: agg.to_string(),
                        stderr: None,
                        seed: cell_seed,
                        wall_ms: t0.elapsed().as_millis(),
                    });
                }
                other => return Err(format!("unknown statistic set `{other}`")),
            }
            Ok(rows)
        })
        .collect();
    let mut rows: Vec<ReportRow> = rows_nested?.into_iter().flatten().collect();
    rows.sort_by(|a, b| (a.n, &a.statistic, a.seed).cmp(&(b.n, &b.statistic, b.seed)));
    // monotone-trend summary per statistic, means per n
    let mut stat_names: Vec<String> = rows.iter().map(|r| r.statistic.clone()).collect();
    stat_names.sort();
    stat_names.dedup();
    let mut summary = Vec::new();
    for s in stat_names {
        let mut means = Vec::new();
        for &n in &grid {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.statistic == s && r.n == n)
                .filter_map(|r| r.value.parse().ok())
                .collect();
            if !vals.is_empty() {
                means.push(vals.iter().sum::<f64>() / vals.len() as f64);
            }
        }
        let trend = if means.len() < 2 {
            "flat"
        } else if means.windows(2).all(|w| w[1] < w[0]) {
            "decreasing"
        } else if means.windows(2).all(|w| w[1] > w[0]) {
            "increasing"
        } else {
            "mixed"
        };
        summary.push(ReportRow {
            experiment: "converge".into(),
            n: *grid.last().unwrap(),
            p: pe.eval(*grid.last().unwrap()),
            statistic: format!("trend({s})"),
            value: trend.into(),
            stderr: None,
            seed,
            wall_ms: 0,
        });
    }
    rows.extend(summary);
    let echo = json!({
        "command": "converge", "kernel": kernel, "construction": construction,
        "n_grid": grid, "p_expr": pe.describe(), "stat": stat,
        "motifs": motifs.iter().map(|m| m.label()).collect::<Vec<_>>(),
        "seeds": seeds, "seed": seed, "budget": budget,
    });
    emit(&mut *open_output(&out)?, &format, &echo, &rows)
        .map_err(|e| AppError::Config(e.to_string()))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<i32, AppError> {
    match cli.command {
        Command::Count {
            graph,
            construction,
            n,
            motifs,
            p_expr,
            seed,
            out,
            format,
            budget,
        } => cmd_count(graph, construction, n, motifs, p_expr, seed, out, format, budget),
        Command::Converge {
            construction,
            kernel,
            n_grid,
            p_expr,
            stat,
            motifs,
            seeds,
            seed,
            budget,
            out,
            format,
        } => cmd_converge(
            construction,
            kernel,
            n_grid,
            p_expr,
            stat,
            motifs,
            seeds,
            seed,
            budget,
            out,
            format,
        ),
        Command::Regularity {
            graph,
            construction,
            n,
            eps,
            c_bound,
            kind,
            k0,
            p_expr,
            seed,
            out,
        } => {
            if eps <= 0.0 {
                return config("eps must be positive");
            }
            let pe = PExpr::parse(&p_expr)?;
            let (g, source) = resolve_graph(&graph, &construction, n, &pe, seed)?;
            let p = pe.eval(g.n());
            let initial = if k0 <= 1 {
                Partition::trivial(g.n())
            } else {
                Partition::balanced_random(g.n(), k0, seed)?
            };
            let report = match kind.as_str() {
                "weak" => weak_regular_partition(&g, p, eps, &initial, c_bound, seed)?,
                "strong" => strong_regular_partition(&g, p, eps, &initial, c_bound, seed)?,
                other => return config(format!("unknown kind `{other}` (weak|strong)")),
            };
            let summary = json!({
                "command": "regularity", "source": source, "kind": kind,
                "eps": eps, "C": c_bound, "p": p, "seed": seed,
                "rounds": report.rounds,
                "parts": report.partition.k(),
                "cut_certificate": report.cut_certificate,
                "irregular_pairs": report.irregular_pairs_witnessed.len(),
            });
            println!("{summary}");
            if let Some(path) = out {
                std::fs::write(&path, report.to_json())
                    .map_err(|e| AppError::Config(e.to_string()))?;
            }
            Ok(0)
        }
        Command::Examples { name } => run_example(&name),
    }
}

fn resolve_graph(
    graph: &Option<String>,
    construction: &Option<String>,
    n: Option<usize>,
    pe: &PExpr,
    seed: u64,
) -> Result<(Graph, serde_json::Value), AppError> {
    match (graph, construction) {
        (Some(path), None) => {
            let (g, labels) = load_graph(path)?;
            Ok((g, json!({"file": path, "labels": labels.len()})))
        }
        (None, Some(spec_text)) => {
            let spec = ConstructionSpec::parse(spec_text)?;
            let n = n.ok_or_else(|| AppError::Config("constructions need --n".into()))?;
            let p = pe.eval(n);
            let rec = spec.sample(n, p, seed)?;
            Ok((rec.graph.clone(), rec.sidecar_json()))
        }
        _ => config("provide exactly one of --graph or --construction"),
    }
}

/// Registered example checks; thresholds baked in.
fn run_example(name: &str) -> Result<i32, AppError> {
    let mut checks: Vec<(String, bool, String)> = Vec::new();
    match name {
        "list" => {
            println!("chessboard-moments\ndhat-triangle\npolarity-c4free\nsubdivision-identity");
            return Ok(0);
        }
        "chessboard-moments" => {
            let k1 = named_kernel(&NamedKernel::Chessboard1)?;
            let k2 = named_kernel(&NamedKernel::Chessboard2)?;
            let c5 = Motif::cycle(5).map_err(AppError::from)?;
            let v1 = motif_density(&c5, &k1)?;
            checks.push((
                "s(C5,chessboard1) = 1/16".into(),
                (v1 - 0.0625).abs() < 1e-12,
                format!("{v1}"),
            ));
            let v2 = motif_density(&c5, &k2)?;
            checks.push(("s(C5,chessboard2) = 0".into(), v2 == 0.0, format!("{v2}")));
        }
        "dhat-triangle" => {
            let k3 = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)])?;
            let e1 = Graph::from_edges(3, &[(0, 1)])?;
            let b = dhat_cut(&k3, &e1, 1.0, 0, 0)?;
            checks.push((
                "dhat(K3, one-edge) = 2/9".into(),
                (b.upper - 2.0 / 9.0).abs() < 1e-12,
                format!("{}", b.upper),
            ));
            let bb = dhat_cut(&k3.blow_up(2)?, &e1.blow_up(2)?, 1.0, 0, 0)?;
            checks.push((
                "blow-up pairing bound <= 1/6".into(),
                bb.upper <= 1.0 / 6.0 + 1e-12,
                format!("{}", bb.upper),
            ));
        }
        "polarity-c4free" => {
            for q in [3u64, 5, 7, 17] {
                let rec = gmetrics::sampler::construct_polarity_graph(q)?;
                let emb = gmetrics::counts::emb_count(&Motif::cycle(4).unwrap(), &rec.graph)?;
                checks.push((
                    format!("q={q}: emb(C4) = 0"),
                    emb == num_bigint::BigUint::from(0u32),
                    format!("{emb}"),
                ));
            }
        }
        "subdivision-identity" => {
            let kappa = named_kernel(&NamedKernel::KappaD { d: 3.0, r: 4 })?;
            for t in [2usize, 3] {
                let kt = path_power(&kappa, t)?;
                let f = Motif::double_edge();
                let lhs = motif_density(&f.subdivide(t)?, &kappa)?;
                let rhs = motif_density(&f, &kt)?;
                checks.push((
                    format!("s(F_{t},κ) = s(F,κ^{t})"),
                    (lhs - rhs).abs() < 1e-12,
                    format!("{lhs} vs {rhs}"),
                ));
            }
        }
        other => return config(format!("unknown example `{other}` (try `list`)")),
    }
    let mut ok = true;
    for (what, passed, measured) in &checks {
        println!(
            "{}: {} (measured {measured})",
            what,
            if *passed { "PASS" } else { "FAIL" }
        );
        ok &= passed;
    }
    Ok(if ok { 0 } else { 4 })
}
