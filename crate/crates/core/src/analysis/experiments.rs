//! Multi-run routing experiments: far-pair sampling, clustering-exponent
//! sweeps and hop scaling across lattice sizes.

use rand::Rng;
use rayon::prelude::*;

use crate::analysis::highway_stats::RADIUS_PROBES;
use crate::analysis::report::StatReport;
use crate::analysis::stats::{ci95, linear_fit, mean, std_dev};
use crate::error::{Error, Result};
use crate::generators::gen_lattice;
use crate::graph::{sampled_radius, Bfs, Graph, NodeId};
use crate::overlay::{
    auto_k, build_overlay, build_overlay_with, sample_highway_membership, OverlayParams,
};
use crate::rng::{substream, Domain};
use crate::routing::{route_batch, RouteRow, Router, Variant};

/// Rejections per pair before settling for the farthest target seen.
pub const MAX_REJECTIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarPairs {
    pub pairs: Vec<(NodeId, NodeId)>,
    /// Minimum accepted `d(s,t)`: half the sampled graph radius, rounded up.
    pub threshold: u32,
    pub radius: u32,
}

/// Uniform source, then uniform targets until `d(s,t) >= threshold`; after
/// [`MAX_REJECTIONS`] the farthest target seen is used.
pub fn far_pairs(graph: &Graph, count: usize, seed: u64) -> FarPairs {
    let n = graph.node_count();
    let radius = sampled_radius(graph, RADIUS_PROBES);
    let threshold = radius.div_ceil(2);
    let pairs = (0..count as u64)
        .into_par_iter()
        .map_init(
            || Bfs::new(n),
            |bfs, i| {
                let mut rng = substream(seed, Domain::Pairs, 0, i);
                let s = rng.gen_range(0..n) as NodeId;
                bfs.run(graph, s, None);
                let mut best = (0, s);
                for _ in 0..=MAX_REJECTIONS {
                    let t = rng.gen_range(0..n) as NodeId;
                    let d = bfs.dist(t);
                    if d >= threshold {
                        return (s, t);
                    }
                    if d > best.0 {
                        best = (d, t);
                    }
                }
                (s, best.1)
            },
        )
        .collect();
    FarPairs {
        pairs,
        threshold,
        radius,
    }
}

/// Highway constant choice for size sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KChoice {
    /// `ceil(ln n)`.
    Auto,
    Fixed(f64),
}

impl KChoice {
    pub fn resolve(&self, n: usize) -> f64 {
        match *self {
            KChoice::Auto => auto_k(n),
            KChoice::Fixed(k) => k,
        }
    }
}

impl std::fmt::Display for KChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KChoice::Auto => f.write_str("auto"),
            KChoice::Fixed(k) => write!(f, "{k}"),
        }
    }
}

struct HopSummary {
    pairs: usize,
    mean: f64,
    sd: f64,
    ci: f64,
    to_highway: f64,
    on_highway: f64,
    to_target: f64,
}

fn summarize(rows: &[Result<RouteRow>]) -> Result<HopSummary> {
    let rows: Vec<&RouteRow> = rows
        .iter()
        .map(|r| {
            r.as_ref()
                .map_err(|e| Error::InvalidParameter(e.to_string()))
        })
        .collect::<Result<_>>()?;
    let hops: Vec<f64> = rows.iter().map(|r| r.hops as f64).collect();
    let avg =
        |f: fn(&RouteRow) -> usize| mean(&rows.iter().map(|r| f(r) as f64).collect::<Vec<_>>());
    Ok(HopSummary {
        pairs: rows.len(),
        mean: mean(&hops),
        sd: std_dev(&hops),
        ci: ci95(&hops),
        to_highway: avg(|r| r.hops_to_highway),
        on_highway: avg(|r| r.hops_on_highway),
        to_target: avg(|r| r.hops_to_target),
    })
}

/// Mean highway-sticky hops over far pairs for each clustering exponent.
/// Highway membership and the pair set are shared by all exponents; only the
/// contacts are redrawn. The argmin (ties to the smaller `s`) is reported as
/// `summary.argmin_s`.
pub fn sweep_clustering_exponent(
    graph: &Graph,
    k: f64,
    q: f64,
    s_values: &[f64],
    pairs_per_s: usize,
    seed: u64,
) -> Result<StatReport> {
    if s_values.is_empty() {
        return Err(Error::InvalidParameter("need at least one s value".into()));
    }
    if pairs_per_s == 0 {
        return Err(Error::InvalidParameter("need at least one pair".into()));
    }
    let base = OverlayParams::new(k, q, s_values[0], seed)?;
    let membership = sample_highway_membership(graph, &base)?;
    let far = far_pairs(graph, pairs_per_s, seed);
    let mut r = StatReport::new(
        "sweep-s",
        &[
            "s",
            "pairs",
            "mean_hops",
            "sd",
            "ci95",
            "mean_to_highway",
            "mean_on_highway",
            "mean_to_target",
        ],
    );
    r.param("n", graph.node_count())
        .param("k", k)
        .param("q", q)
        .param("seed", seed)
        .param("epoch", membership.epoch)
        .param("variant", Variant::HighwaySticky)
        .param("pairs_per_s", pairs_per_s)
        .param("pair_threshold", far.threshold);
    let mut best: Option<(f64, f64)> = None;
    for &s in s_values {
        let params = OverlayParams::new(k, q, s, seed)?;
        let overlay = build_overlay_with(graph, &params, membership.clone())?;
        let router = Router::new(graph, &overlay);
        let rows = route_batch(&router, &far.pairs, Variant::HighwaySticky);
        let h = summarize(&rows)?;
        r.push_row(vec![
            s,
            h.pairs as f64,
            h.mean,
            h.sd,
            h.ci,
            h.to_highway,
            h.on_highway,
            h.to_target,
        ]);
        let better = match best {
            None => true,
            Some((bm, bs)) => h.mean < bm || (h.mean == bm && s < bs),
        };
        if better {
            best = Some((h.mean, s));
        }
    }
    let (best_mean, best_s) = best.unwrap();
    r.set_summary("argmin_s", best_s)
        .set_summary("min_mean_hops", best_mean);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub dim: usize,
    pub sides: Vec<usize>,
    pub k: KChoice,
    pub q: f64,
    pub s: f64,
    pub pairs: usize,
    pub seed: u64,
    pub variant: Variant,
    pub budget: usize,
}

/// Mean hops over far pairs on wrap lattices of growing side, with a fit of
/// mean hops against `ln n` in the summary.
pub fn routing_scaling(cfg: &ScalingConfig) -> Result<StatReport> {
    if cfg.sides.is_empty() || cfg.pairs == 0 {
        return Err(Error::InvalidParameter("need sides and pairs".into()));
    }
    let mut r = StatReport::new(
        "scaling",
        &[
            "side",
            "n",
            "ln_n",
            "k",
            "pairs",
            "mean_hops",
            "sd",
            "ci95",
            "mean_to_highway",
            "mean_on_highway",
            "mean_to_target",
            "max_dist_to_highway",
        ],
    );
    r.param("dim", cfg.dim)
        .param("k", cfg.k)
        .param("q", cfg.q)
        .param("s", cfg.s)
        .param("pairs", cfg.pairs)
        .param("seed", cfg.seed)
        .param("variant", cfg.variant);
    for &side in &cfg.sides {
        let graph = gen_lattice(cfg.dim, side, true, cfg.budget)?;
        let n = graph.node_count();
        let k = cfg.k.resolve(n);
        let overlay = build_overlay(&graph, &OverlayParams::new(k, cfg.q, cfg.s, cfg.seed)?)?;
        let router = Router::new(&graph, &overlay);
        let far = far_pairs(&graph, cfg.pairs, cfg.seed);
        let rows = route_batch(&router, &far.pairs, cfg.variant);
        let h = summarize(&rows)?;
        let max_dist = router.nearest().max_dist();
        r.push_row(vec![
            side as f64,
            n as f64,
            (n as f64).ln(),
            k,
            h.pairs as f64,
            h.mean,
            h.sd,
            h.ci,
            h.to_highway,
            h.on_highway,
            h.to_target,
            max_dist as f64,
        ]);
    }
    let ln_n = r.column("ln_n").unwrap();
    let hops = r.column("mean_hops").unwrap();
    if let Some(fit) = linear_fit(&ln_n, &hops) {
        r.set_summary("slope", fit.slope)
            .set_summary("intercept", fit.intercept)
            .set_summary("r2", fit.r2);
    }
    Ok(r)
}
