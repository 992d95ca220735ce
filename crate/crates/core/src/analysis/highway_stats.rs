//! Measurements of highway density, normalization constants, distance to the
//! highway and single-step contact statistics.

use rand::Rng;
use rayon::prelude::*;

use crate::analysis::report::StatReport;
use crate::analysis::stats::{linear_fit, mean, quantile_sorted};
use crate::error::{Error, Result};
use crate::graph::{sampled_radius, Bfs, Graph, NodeId};
use crate::overlay::{nearest_highway_field, HighwayOverlay, SamplerScratch};
use crate::rng::{substream, Domain};

/// Probes used when bounding the graph radius.
pub const RADIUS_PROBES: usize = 16;

/// `(k ln n)^(1/alpha)`: the scale of highway spacing.
pub fn highway_scale(n: usize, k: f64, alpha: f64) -> f64 {
    (k * (n as f64).ln()).powf(1.0 / alpha)
}

fn base_report(
    name: &str,
    columns: &[&str],
    graph: &Graph,
    overlay: &HighwayOverlay,
) -> StatReport {
    let p = overlay.params();
    let mut r = StatReport::new(name, columns);
    r.param("n", graph.node_count())
        .param("k", p.k)
        .param("q", p.q)
        .param("s", p.s)
        .param("overlay_seed", p.seed)
        .param("epoch", overlay.epoch())
        .param("highway_nodes", overlay.highway_nodes().len());
    r
}

/// Highway nodes inside balls of radius `ceil(c * (k ln n)^(1/alpha))`
/// around `samples` uniformly drawn centers.
pub fn ball_highway_stats(
    graph: &Graph,
    overlay: &HighwayOverlay,
    alpha: f64,
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<StatReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let n = graph.node_count();
    let k = overlay.params().k;
    let ell = (c * highway_scale(n, k, alpha)).ceil() as u32;
    let radius = sampled_radius(graph, RADIUS_PROBES);
    if ell > radius {
        return Err(Error::RadiusTooLarge {
            requested: ell,
            radius,
        });
    }
    let balls: Vec<(NodeId, Vec<NodeId>, usize)> = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || Bfs::new(n),
            |bfs, i| {
                let center = substream(seed, Domain::Samples, 0, i).gen_range(0..n) as NodeId;
                let members = bfs.run(graph, center, Some(ell)).to_vec();
                let highway = members.iter().filter(|&&v| overlay.is_highway(v)).count();
                (center, members, highway)
            },
        )
        .collect();

    // Var of the summed counts is p(1-p) * sum_v m_v^2 where m_v counts the
    // sampled balls holding v; overlapping balls are therefore accounted for.
    let p = 1.0 / k;
    let mut multiplicity = vec![0u32; n];
    for (_, members, _) in &balls {
        for &v in members {
            multiplicity[v as usize] += 1;
        }
    }
    let sum_sq: f64 = multiplicity.iter().map(|&m| (m as f64).powi(2)).sum();
    let sigma_mean = (p * (1.0 - p) * sum_sq).sqrt() / samples as f64;

    let mut r = base_report(
        "ball-highway",
        &["sample", "center", "ball_size", "highway_count", "expected"],
        graph,
        overlay,
    );
    r.param("alpha", alpha)
        .param("c", c)
        .param("ell", ell)
        .param("samples", samples)
        .param("seed", seed);
    for (i, (center, members, h)) in balls.iter().enumerate() {
        r.push_row(vec![
            i as f64,
            *center as f64,
            members.len() as f64,
            *h as f64,
            members.len() as f64 * p,
        ]);
    }
    let counts: Vec<f64> = balls.iter().map(|b| b.2 as f64).collect();
    let min = counts.iter().copied().fold(f64::INFINITY, f64::min);
    let max = counts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = mean(&counts);
    let expected = balls.iter().map(|b| b.1.len() as f64).sum::<f64>() * p / samples as f64;
    r.set_summary("ell", ell as f64)
        .set_summary("min", min)
        .set_summary("max", max)
        .set_summary("mean", m)
        .set_summary("expected_mean", expected)
        .set_summary("sigma_mean", sigma_mean)
        .set_summary("max_over_min", max / min)
        .set_summary("mean_over_scale", m / ((ell as f64).powf(alpha) / k));
    Ok(r)
}

/// Mean highway count per shell index `b = 0..=b_max` of width `w`, and the
/// log-log slope of count against the shell midpoint index `b + 1/2`.
pub fn shell_highway_stats(
    graph: &Graph,
    overlay: &HighwayOverlay,
    w: u32,
    b_max: u32,
    samples: usize,
    seed: u64,
) -> Result<StatReport> {
    if w == 0 || samples == 0 {
        return Err(Error::InvalidParameter(
            "shell width and samples must be >= 1".into(),
        ));
    }
    let n = graph.node_count();
    let outer = (b_max + 1) * w;
    let radius = sampled_radius(graph, RADIUS_PROBES);
    if outer > radius {
        return Err(Error::RadiusTooLarge {
            requested: outer,
            radius,
        });
    }
    let shells = b_max as usize + 1;
    let counts: Vec<Vec<u32>> = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || Bfs::new(n),
            |bfs, i| {
                let center = substream(seed, Domain::Samples, 0, i).gen_range(0..n) as NodeId;
                let mut per_shell = vec![0u32; shells];
                bfs.run(graph, center, Some(outer));
                for &v in bfs.visited() {
                    let d = bfs.dist(v);
                    if d > 0 && overlay.is_highway(v) {
                        per_shell[((d - 1) / w) as usize] += 1;
                    }
                }
                per_shell
            },
        )
        .collect();

    let mut r = base_report(
        "shell-highway",
        &["b", "samples", "mean", "min", "max"],
        graph,
        overlay,
    );
    r.param("w", w)
        .param("b_max", b_max)
        .param("samples", samples)
        .param("seed", seed);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for b in 0..shells {
        let col: Vec<f64> = counts.iter().map(|c| c[b] as f64).collect();
        let m = mean(&col);
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        r.push_row(vec![b as f64, samples as f64, m, min, max]);
        if m > 0.0 {
            xs.push((b as f64 + 0.5).ln());
            ys.push(m.ln());
        }
    }
    if let Some(fit) = linear_fit(&xs, &ys) {
        r.set_summary("exponent", fit.slope)
            .set_summary("intercept", fit.intercept)
            .set_summary("r2", fit.r2);
    }
    Ok(r)
}

/// Range of `z(u)` over highway nodes and its scale-free ratios
/// `max z / (ln n / k + ln ln n)` and `min z / (ln n / k)`.
pub fn z_stats(graph: &Graph, overlay: &HighwayOverlay) -> Result<StatReport> {
    let n = graph.node_count();
    let k = overlay.params().k;
    overlay.materialize_z();
    let mut zs = overlay
        .highway_nodes()
        .iter()
        .map(|&h| overlay.zvalue(h))
        .collect::<Result<Vec<f64>>>()?;
    zs.sort_by(f64::total_cmp);
    let ln_n = (n as f64).ln();
    let (min, max) = (zs[0], *zs.last().unwrap());
    let max_ratio = max / (ln_n / k + ln_n.ln());
    let min_ratio = min / (ln_n / k);
    let mut r = base_report(
        "z",
        &[
            "n",
            "k",
            "highway_nodes",
            "z_min",
            "z_p50",
            "z_mean",
            "z_max",
            "max_ratio",
            "min_ratio",
        ],
        graph,
        overlay,
    );
    r.push_row(vec![
        n as f64,
        k,
        zs.len() as f64,
        min,
        quantile_sorted(&zs, 0.5),
        mean(&zs),
        max,
        max_ratio,
        min_ratio,
    ]);
    r.set_summary("z_min", min)
        .set_summary("z_max", max)
        .set_summary("max_ratio", max_ratio)
        .set_summary("min_ratio", min_ratio);
    Ok(r)
}

/// Exact maximum and mean distance to the nearest highway node, and the
/// maximum normalized by `(k ln n)^(1/alpha)`.
pub fn highway_distance_stats(
    graph: &Graph,
    overlay: &HighwayOverlay,
    alpha: f64,
) -> Result<StatReport> {
    let n = graph.node_count();
    let k = overlay.params().k;
    let field = nearest_highway_field(graph, overlay);
    let max = field.max_dist() as f64;
    let normalized = max / highway_scale(n, k, alpha);
    let mut r = base_report(
        "highway-distance",
        &["n", "k", "max", "mean", "normalized_max"],
        graph,
        overlay,
    );
    r.param("alpha", alpha);
    r.push_row(vec![n as f64, k, max, field.mean_dist(), normalized]);
    r.set_summary("max", max)
        .set_summary("mean", field.mean_dist())
        .set_summary("normalized_max", normalized);
    Ok(r)
}

/// Draws a uniform target at distance >= `threshold` from the BFS source in
/// `bfs` (up to 100 tries, then the farthest seen). `None` when even the
/// farthest is too close.
fn far_target<R: Rng>(rng: &mut R, bfs: &Bfs, n: usize, threshold: u32) -> Option<NodeId> {
    let mut best: Option<(u32, NodeId)> = None;
    for _ in 0..100 {
        let t = rng.gen_range(0..n) as NodeId;
        let d = bfs.dist(t);
        if d >= threshold {
            return Some(t);
        }
        if best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, t));
        }
    }
    best.filter(|&(d, _)| d >= threshold).map(|(_, t)| t)
}

/// One improvement trial: highway node `u`, target `t`, and for each factor
/// `c` whether a fresh contact set of `u` had a node within `d(u,t)/c` of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementTrial {
    pub u: NodeId,
    pub t: NodeId,
    pub dist: u32,
    pub hits: Vec<bool>,
}

/// Runs `samples` trials. Each draws a uniform highway `u`, a target at
/// distance at least `min(cs) * (k ln n)^(1/alpha)`, and a fresh set of
/// `round(q k)` contacts from the overlay's law; trials without an eligible
/// target are dropped.
pub fn improvement_trials(
    graph: &Graph,
    overlay: &HighwayOverlay,
    alpha: f64,
    cs: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<ImprovementTrial>> {
    if cs.is_empty() || cs.iter().any(|&c| c.is_nan() || c <= 1.0) {
        return Err(Error::InvalidParameter(
            "improvement factors must be > 1".into(),
        ));
    }
    let n = graph.node_count();
    let k = overlay.params().k;
    let c_min = cs.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = (c_min * highway_scale(n, k, alpha)).ceil() as u32;
    let highway = overlay.highway_nodes();
    let sampler = overlay.sampler(graph);
    let m = overlay.draws_per_node();
    let trials: Vec<Option<ImprovementTrial>> = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || (Bfs::new(n), SamplerScratch::new(graph)),
            |(bfs, scratch), i| {
                let mut rng = substream(seed, Domain::Trials, 0, i);
                let u = highway[rng.gen_range(0..highway.len())];
                bfs.run(graph, u, None);
                let t = far_target(&mut rng, bfs, n, threshold)?;
                let dist = bfs.dist(t);
                let (draws, _) = sampler.draw(u, m, &mut rng, scratch);
                bfs.run(graph, t, None);
                let closest = draws.iter().map(|&v| bfs.dist(v)).min().unwrap();
                let hits = cs
                    .iter()
                    .map(|&c| closest <= (dist as f64 / c).floor() as u32)
                    .collect();
                Some(ImprovementTrial { u, t, dist, hits })
            },
        )
        .collect();
    let trials: Vec<ImprovementTrial> = trials.into_iter().flatten().collect();
    if trials.is_empty() {
        return Err(Error::NoEligibleSamples(format!(
            "no target at distance >= {threshold} from sampled highway nodes"
        )));
    }
    Ok(trials)
}

/// Probability that a fresh contact set improves the distance to the target
/// by each factor `c`, with `prob * (c+1)^alpha * z(u)` for flatness checks.
pub fn improvement_probability(
    graph: &Graph,
    overlay: &HighwayOverlay,
    alpha: f64,
    cs: &[f64],
    samples: usize,
    seed: u64,
) -> Result<StatReport> {
    let trials = improvement_trials(graph, overlay, alpha, cs, samples, seed)?;
    let mut r = base_report(
        "improvement",
        &["c", "trials", "hits", "prob", "normalized"],
        graph,
        overlay,
    );
    r.param("alpha", alpha)
        .param("samples", samples)
        .param("seed", seed);
    for (j, &c) in cs.iter().enumerate() {
        let mut hits = 0usize;
        let mut norm = 0.0;
        for tr in &trials {
            if tr.hits[j] {
                hits += 1;
                norm += (c + 1.0).powf(alpha) * overlay.zvalue(tr.u)?;
            }
        }
        let count = trials.len() as f64;
        r.push_row(vec![
            c,
            count,
            hits as f64,
            hits as f64 / count,
            norm / count,
        ]);
    }
    Ok(r)
}

/// One fresh-contact trial: highway node `u` and the distance to one contact
/// freshly drawn from the overlay's law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreshTrial {
    pub u: NodeId,
    pub contact: NodeId,
    pub dist: u32,
}

pub fn fresh_contact_trials(
    graph: &Graph,
    overlay: &HighwayOverlay,
    samples: usize,
    seed: u64,
) -> Result<Vec<FreshTrial>> {
    if samples == 0 {
        return Err(Error::NoEligibleSamples("zero samples requested".into()));
    }
    let n = graph.node_count();
    let highway = overlay.highway_nodes();
    let sampler = overlay.sampler(graph);
    Ok((0..samples as u64)
        .into_par_iter()
        .map_init(
            || (Bfs::new(n), SamplerScratch::new(graph)),
            |(bfs, scratch), i| {
                let mut rng = substream(seed, Domain::Trials, 1, i);
                let u = highway[rng.gen_range(0..highway.len())];
                let (draws, _) = sampler.draw(u, 1, &mut rng, scratch);
                let contact = draws[0];
                let dist = match graph.torus() {
                    Some(shape) => shape.distance(u, contact),
                    None => {
                        bfs.run(graph, u, None);
                        bfs.dist(contact)
                    }
                };
                FreshTrial { u, contact, dist }
            },
        )
        .collect())
}

/// Probability that a fresh contact of a highway node lands outside
/// `B_l(u)`, per radius in `ells`, normalized by `ln n / (k z(u))`.
/// Every radius must satisfy `l <= n^(theta/alpha)` with `theta < 1`.
pub fn fresh_contact_probability(
    graph: &Graph,
    overlay: &HighwayOverlay,
    alpha: f64,
    theta: f64,
    ells: &[u32],
    samples: usize,
    seed: u64,
) -> Result<StatReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    let n = graph.node_count();
    let cap = (n as f64).powf(theta / alpha);
    if let Some(&bad) = ells.iter().find(|&&l| l as f64 > cap) {
        return Err(Error::RadiusTooLarge {
            requested: bad,
            radius: cap.floor() as u32,
        });
    }
    let trials = fresh_contact_trials(graph, overlay, samples, seed)?;
    let k = overlay.params().k;
    let ln_n = (n as f64).ln();
    let mut r = base_report(
        "fresh-contact",
        &["ell", "trials", "outside", "prob", "normalized"],
        graph,
        overlay,
    );
    r.param("alpha", alpha)
        .param("theta", theta)
        .param("samples", samples)
        .param("seed", seed);
    for &ell in ells {
        let mut outside = 0usize;
        let mut norm = 0.0;
        for tr in &trials {
            if tr.dist > ell {
                outside += 1;
                norm += k * overlay.zvalue(tr.u)? / ln_n;
            }
        }
        let count = trials.len() as f64;
        r.push_row(vec![
            ell as f64,
            count,
            outside as f64,
            outside as f64 / count,
            norm / count,
        ]);
    }
    Ok(r)
}
