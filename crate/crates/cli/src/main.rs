use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use fgsw_core::analysis::{
    ball_highway_stats, estimate_alpha, estimate_diameter, far_pairs, fresh_contact_probability,
    highway_distance_stats, improvement_probability, routing_scaling, shell_highway_stats,
    sweep_clustering_exponent, z_stats, AlphaGrid, DiameterMode, KChoice, ScalingConfig,
    StatReport, DEFAULT_EXACT_CAP,
};
use fgsw_core::generators::{gen_lattice, gen_sierpinski, import_dimacs, DEFAULT_NODE_BUDGET};
use fgsw_core::overlay::{build_overlay, OverlayParams};
use fgsw_core::routing::{
    route_batch, write_batch_csv, EdgeKind, Phase, RouteScratch, Router, Variant,
};
use fgsw_core::{with_threads, Graph, HighwayOverlay, NodeId};

const GIT_DESCRIBE: &str = env!("FGSW_GIT_DESCRIBE");

#[derive(Parser)]
#[command(
    name = "fgsw",
    version,
    about = "Randomized-highway small worlds over fixed-growth graphs"
)]
struct Cli {
    /// Worker threads (0 = all cores). Never changes output bytes.
    #[arg(long, global = true, env = "FGSW_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Axis-aligned lattice, optionally wrapped into a torus.
    GenLattice {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        side: usize,
        #[arg(long)]
        wrap: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sierpinski gasket graph of the given level.
    GenSierpinski {
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// DIMACS road network; keeps the largest component and writes a renumbering map.
    ImportDimacs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to `<out>.ids.csv`.
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Samples a highway overlay.
    Augment {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        overlay: OverlayArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Routes one message and writes its hop-by-hop trace.
    Route {
        #[command(flatten)]
        input: Inputs,
        #[arg(long)]
        source: NodeId,
        #[arg(long)]
        target: NodeId,
        #[arg(long, default_value = "highway-sticky")]
        variant: Variant,
        #[arg(long)]
        out: PathBuf,
    },
    /// Routes many far pairs (or the pairs in `--pairs-file`).
    RouteBatch {
        #[command(flatten)]
        input: Inputs,
        #[arg(long, required_unless_present = "pairs_file")]
        pairs: Option<usize>,
        /// Lines of `source,target`.
        #[arg(long, conflicts_with = "pairs")]
        pairs_file: Option<PathBuf>,
        #[arg(long, default_value = "highway-sticky")]
        variant: Variant,
        #[arg(long, required_unless_present = "pairs_file")]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Highway statistics over a graph and overlay.
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Augmented and underlying diameter.
    Diameter {
        #[command(flatten)]
        input: Inputs,
        #[arg(long, value_parser = ["exact", "sampled"], default_value = "exact")]
        mode: String,
        #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
        cap: usize,
        #[arg(long, required_if_eq("mode", "sampled"))]
        sources: Option<usize>,
        #[arg(long, required_if_eq("mode", "sampled"))]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed-growth dimensionality estimate.
    EstimateAlpha {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha_min: f64,
        #[arg(long, default_value_t = 4.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 0.01)]
        alpha_step: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean highway-sticky hops for each clustering exponent.
    SweepS {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "auto")]
        k: KArg,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        s_values: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        pairs: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean routing hops on wrap lattices of growing side.
    Scaling {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        sides: Vec<usize>,
        #[arg(long, default_value = "auto")]
        k: KArg,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value = "highway-sticky")]
        variant: Variant,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Highway counts in balls of radius ceil(c (k ln n)^(1/alpha)).
    Balls {
        #[command(flatten)]
        input: Inputs,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Highway counts per distance shell and their growth exponent.
    Shells {
        #[command(flatten)]
        input: Inputs,
        #[arg(long)]
        w: u32,
        #[arg(long)]
        b_max: u32,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalization constants z(u) over highway nodes.
    Z {
        #[command(flatten)]
        input: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance from every node to the nearest highway node.
    HighwayDist {
        #[command(flatten)]
        input: Inputs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability that fresh contacts cut the distance to a target by a factor c.
    Improve {
        #[command(flatten)]
        input: Inputs,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        cs: Vec<f64>,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability that a fresh contact lands outside a ball around its source.
    Fresh {
        #[command(flatten)]
        input: Inputs,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        ells: Vec<u32>,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    overlay: PathBuf,
}

#[derive(Args)]
struct OverlayArgs {
    /// Highway constant, or `auto` for ceil(ln n).
    #[arg(long)]
    k: KArg,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    seed: u64,
}

#[derive(Clone, Copy, Debug)]
struct KArg(KChoice);

impl FromStr for KArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(KArg(KChoice::Auto));
        }
        match s.parse::<f64>() {
            Ok(k) if k >= 1.0 && k.is_finite() => Ok(KArg(KChoice::Fixed(k))),
            _ => Err(format!("expected `auto` or a number >= 1, got `{s}`")),
        }
    }
}

/// Failure after arguments parsed: a usage problem (exit 1) or bad data (exit 2).
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow::anyhow!("{msg}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = cli.threads;
    match with_threads(threads, move || run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_graph(path: &Path) -> anyhow::Result<Graph> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Graph::read_text(BufReader::new(f)).with_context(|| format!("reading graph {}", path.display()))
}

fn load_inputs(input: &Inputs) -> anyhow::Result<(Graph, HighwayOverlay)> {
    let graph = load_graph(&input.graph)?;
    let f = File::open(&input.overlay)
        .with_context(|| format!("opening {}", input.overlay.display()))?;
    let overlay = HighwayOverlay::read_text(BufReader::new(f), &graph)
        .with_context(|| format!("reading overlay {}", input.overlay.display()))?;
    Ok((graph, overlay))
}

fn graph_label(path: &Path) -> String {
    path.file_stem()
        .map_or("graph".into(), |s| s.to_string_lossy().into_owned())
}

fn write_report(
    mut report: StatReport,
    out: Option<PathBuf>,
    graph: &Path,
    n: usize,
    seed: u64,
) -> Result<(), Failure> {
    report
        .param("graph", graph.display())
        .param("git_describe", GIT_DESCRIBE);
    let path = out.unwrap_or_else(|| PathBuf::from(report.file_name(&graph_label(graph), n, seed)));
    let mut w = create(&path)?;
    report.write_csv(&mut w)?;
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

fn check_node(graph: &Graph, u: NodeId, what: &str) -> Result<(), Failure> {
    if (u as usize) < graph.node_count() {
        Ok(())
    } else {
        Err(usage(format!(
            "--{what} {u} is not a node (n = {})",
            graph.node_count()
        )))
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::GenLattice {
            dim,
            side,
            wrap,
            budget,
            out,
        } => {
            if !(1..=3).contains(&dim) || side < 2 {
                return Err(usage("--dim must be 1..=3 and --side at least 2"));
            }
            let g = gen_lattice(dim, side, wrap, budget)?;
            let mut w = create(&out)?;
            writeln!(w, "# lattice dim={dim} side={side} wrap={wrap}")?;
            g.write_text(&mut w)?;
            w.flush()?;
            println!(
                "wrote {} ({} nodes, {} edges)",
                out.display(),
                g.node_count(),
                g.edge_count()
            );
        }
        Cmd::GenSierpinski { level, budget, out } => {
            if level == 0 {
                return Err(usage("--level must be at least 1"));
            }
            let g = gen_sierpinski(level, budget)?;
            let mut w = create(&out)?;
            writeln!(w, "# sierpinski level={level}")?;
            g.write_text(&mut w)?;
            w.flush()?;
            println!(
                "wrote {} ({} nodes, {} edges)",
                out.display(),
                g.node_count(),
                g.edge_count()
            );
        }
        Cmd::ImportDimacs {
            input,
            out,
            map_out,
        } => {
            let imported =
                import_dimacs(&input).with_context(|| format!("importing {}", input.display()))?;
            for warning in &imported.warnings {
                eprintln!("warning: {warning}");
            }
            let mut w = create(&out)?;
            writeln!(
                w,
                "# dimacs source={} dropped_nodes={}",
                input.display(),
                imported.dropped_nodes
            )?;
            imported.graph.write_text(&mut w)?;
            w.flush()?;
            let map_path = map_out.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".ids.csv");
                PathBuf::from(p)
            });
            let mut m = create(&map_path)?;
            imported.write_renumbering(&mut m)?;
            m.flush()?;
            println!("wrote {} and {}", out.display(), map_path.display());
        }
        Cmd::Augment {
            graph,
            overlay,
            out,
        } => {
            let g = load_graph(&graph)?;
            let k = overlay.k.0.resolve(g.node_count());
            let params =
                OverlayParams::new(k, overlay.q, overlay.s, overlay.seed).map_err(usage)?;
            let o = build_overlay(&g, &params)?;
            let mut w = create(&out)?;
            o.write_text(&mut w)?;
            w.flush()?;
            println!(
                "wrote {} ({} highway nodes, {} contacts)",
                out.display(),
                o.highway_nodes().len(),
                o.total_contacts()
            );
        }
        Cmd::Route {
            input,
            source,
            target,
            variant,
            out,
        } => {
            let (g, o) = load_inputs(&input)?;
            check_node(&g, source, "source")?;
            check_node(&g, target, "target")?;
            let router = Router::new(&g, &o);
            let trace = router.route(source, target, variant, &mut RouteScratch::new(&g))?;
            let mut w = create(&out)?;
            writeln!(w, "# experiment=route")?;
            writeln!(w, "# graph={}", input.graph.display())?;
            writeln!(w, "# overlay={}", input.overlay.display())?;
            writeln!(w, "# variant={variant}")?;
            writeln!(w, "# source={source}")?;
            writeln!(w, "# target={target}")?;
            writeln!(w, "# dist_st={}", trace.dist_st)?;
            writeln!(w, "# hops={}", trace.hops())?;
            writeln!(w, "# git_describe={GIT_DESCRIBE}")?;
            writeln!(w, "step,from,to,edge,phase")?;
            for (i, hop) in trace.path.windows(2).enumerate() {
                let edge = match trace.edge_kinds[i] {
                    EdgeKind::Local => "local",
                    EdgeKind::LongRange => "long-range",
                };
                let phase = match trace.phases[i] {
                    Phase::ToHighway => "to-highway",
                    Phase::OnHighway => "on-highway",
                    Phase::ToTarget => "to-target",
                };
                writeln!(w, "{i},{},{},{edge},{phase}", hop[0], hop[1])?;
            }
            w.flush()?;
            println!("{} hops (distance {})", trace.hops(), trace.dist_st);
        }
        Cmd::RouteBatch {
            input,
            pairs,
            pairs_file,
            variant,
            seed,
            out,
        } => {
            let (g, o) = load_inputs(&input)?;
            let (list, source_desc) = match (pairs_file, pairs, seed) {
                (Some(path), _, _) => (read_pairs(&path, &g)?, format!("file {}", path.display())),
                (None, Some(count), Some(seed)) => {
                    let fp = far_pairs(&g, count, seed);
                    (
                        fp.pairs,
                        format!(
                            "far pairs count={count} seed={seed} threshold={}",
                            fp.threshold
                        ),
                    )
                }
                _ => {
                    return Err(usage(
                        "--pairs and --seed are required without --pairs-file",
                    ))
                }
            };
            let router = Router::new(&g, &o);
            let rows = route_batch(&router, &list, variant);
            let mut w = create(&out)?;
            writeln!(w, "# experiment=route-batch")?;
            writeln!(w, "# graph={}", input.graph.display())?;
            writeln!(w, "# overlay={}", input.overlay.display())?;
            writeln!(w, "# variant={variant}")?;
            writeln!(w, "# pairs={source_desc}")?;
            writeln!(w, "# git_describe={GIT_DESCRIBE}")?;
            write_batch_csv(&rows, &mut w)?;
            w.flush()?;
            let failed = rows.iter().filter(|r| r.is_err()).count();
            println!(
                "routed {} pairs ({failed} failed) -> {}",
                rows.len(),
                out.display()
            );
        }
        Cmd::Stats(stats) => run_stats(stats)?,
        Cmd::Diameter {
            input,
            mode,
            cap,
            sources,
            seed,
            out,
        } => {
            let (g, o) = load_inputs(&input)?;
            let m = match mode.as_str() {
                "exact" => DiameterMode::Exact { cap },
                _ => DiameterMode::Sampled {
                    sources: sources.unwrap(),
                    seed: seed.unwrap(),
                },
            };
            let r = estimate_diameter(&g, &o, m)?;
            write_report(
                r,
                out,
                &input.graph,
                g.node_count(),
                seed.unwrap_or(o.params().seed),
            )?;
        }
        Cmd::EstimateAlpha {
            graph,
            samples,
            alpha_min,
            alpha_max,
            alpha_step,
            seed,
            out,
        } => {
            let grid = AlphaGrid {
                min: alpha_min,
                max: alpha_max,
                step: alpha_step,
            };
            grid.validate().map_err(usage)?;
            if samples == 0 {
                return Err(usage("--samples must be positive"));
            }
            let g = load_graph(&graph)?;
            let est = estimate_alpha(&g, samples, grid, seed)?;
            println!("alpha median {}", est.alpha_median);
            write_report(
                est.to_report(g.node_count()),
                out,
                &graph,
                g.node_count(),
                seed,
            )?;
        }
        Cmd::SweepS {
            graph,
            k,
            q,
            s_values,
            pairs,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let k = k.0.resolve(g.node_count());
            for &s in &s_values {
                OverlayParams::new(k, q, s, seed).map_err(usage)?;
            }
            let r = sweep_clustering_exponent(&g, k, q, &s_values, pairs, seed)?;
            write_report(r, out, &graph, g.node_count(), seed)?;
        }
        Cmd::Scaling {
            dim,
            sides,
            k,
            q,
            s,
            pairs,
            variant,
            budget,
            seed,
            out,
        } => {
            if !(1..=3).contains(&dim) || sides.iter().any(|&x| x < 2) {
                return Err(usage("--dim must be 1..=3 and every side at least 2"));
            }
            OverlayParams::new(1.0, q, s, seed).map_err(usage)?;
            let cfg = ScalingConfig {
                dim,
                sides,
                k: k.0,
                q,
                s,
                pairs,
                seed,
                variant,
                budget,
            };
            let r = routing_scaling(&cfg)?;
            let n = r.column("n").and_then(|c| c.last().copied()).unwrap_or(0.0) as usize;
            let label = PathBuf::from(format!("lattice{dim}d"));
            write_report(r, out, &label, n, seed)?;
        }
    }
    Ok(())
}

fn run_stats(cmd: StatsCmd) -> Result<(), Failure> {
    let (report, input, seed, out) = match cmd {
        StatsCmd::Balls {
            input,
            alpha,
            c,
            samples,
            seed,
            out,
        } => {
            let (g, o) = load_inputs(&input)?;
            (
                ball_highway_stats(&g, &o, alpha, c, samples, seed),
                (input, g),
                Some(seed),
                out,
            )
        }
        StatsCmd::Shells {
            input,
            w,
            b_max,
            samples,
            seed,
            out,
        } => {
            let (g, o) = load_inputs(&input)?;
            (
                shell_highway_stats(&g, &o, w, b_max, samples, seed),
                (input, g),
                Some(seed),
                out,
            )
        }
        StatsCmd::Z { input, out } => {
            let (g, o) = load_inputs(&input)?;
            (z_stats(&g, &o), (input, g), None, out)
        }
        StatsCmd::HighwayDist { input, alpha, out } => {
            let (g, o) = load_inputs(&input)?;
            (highway_distance_stats(&g, &o, alpha), (input, g), None, out)
        }
        StatsCmd::Improve {
            input,
            alpha,
            cs,
            samples,
            seed,
            out,
        } => {
            let (g, o) = load_inputs(&input)?;
            (
                improvement_probability(&g, &o, alpha, &cs, samples, seed),
                (input, g),
                Some(seed),
                out,
            )
        }
        StatsCmd::Fresh {
            input,
            alpha,
            theta,
            ells,
            samples,
            seed,
            out,
        } => {
            let (g, o) = load_inputs(&input)?;
            let r = fresh_contact_probability(&g, &o, alpha, theta, &ells, samples, seed);
            (r, (input, g), Some(seed), out)
        }
    };
    let (input, g) = input;
    let report = report.map_err(|e| match e {
        fgsw_core::Error::InvalidParameter(_) | fgsw_core::Error::RadiusTooLarge { .. } => usage(e),
        e => Failure::Data(e.into()),
    })?;
    let seed = match seed {
        Some(s) => s,
        None => report
            .get_param("overlay_seed")
            .and_then(|s| s.parse().ok())
            .unwrap_or(0),
    };
    let mut report = report;
    report.param("overlay", input.overlay.display());
    write_report(report, out, &input.graph, g.node_count(), seed)
}

fn read_pairs(path: &Path, graph: &Graph) -> anyhow::Result<Vec<(NodeId, NodeId)>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("source") {
            continue;
        }
        let parsed = line.split_once(',').and_then(|(a, b)| {
            Some((
                a.trim().parse::<NodeId>().ok()?,
                b.trim().parse::<NodeId>().ok()?,
            ))
        });
        let Some((s, t)) = parsed else {
            bail!("{}:{}: expected `source,target`", path.display(), i + 1);
        };
        let n = graph.node_count();
        if s as usize >= n || t as usize >= n {
            bail!("{}:{}: node out of range (n = {n})", path.display(), i + 1);
        }
        pairs.push((s, t));
    }
    Ok(pairs)
}
