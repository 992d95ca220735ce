//! Fixed-growth dimensionality from ball growth.
//!
//! For a node `u` and candidate `alpha`, the ball-growth constants
//! `c(l) = (|B_l(u)| - 1) / l^alpha` over `1 <= l <= l_max` should be flat if
//! the graph grows like `l^alpha` around `u`. The spread `max c / min c` is the
//! fit quality; the node's estimate is the grid `alpha` minimizing it, and the
//! graph's estimate is the median over sampled nodes.

use rand::seq::index;
use rayon::prelude::*;

use crate::analysis::report::StatReport;
use crate::analysis::stats::median;
use crate::error::{Error, Result};
use crate::graph::{BallProfile, Bfs, Graph, NodeId};
use crate::rng::{substream, Domain};

/// Nodes with fewer usable radii are skipped.
pub const MIN_RADII: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            min: 0.5,
            max: 4.0,
            step: 0.01,
        }
    }
}

impl AlphaGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = self.min >= 0.5
            && self.max <= 4.0
            && self.min <= self.max
            && self.step > 0.0
            && self.step <= 0.01;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "alpha grid must lie in [0.5, 4.0] with 0 < step <= 0.01, got {self:?}"
            )))
        }
    }

    /// Grid values, rounded to 1e-9 so that e.g. `1.0` is exact.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.min + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeAlpha {
    pub node: NodeId,
    pub alpha: f64,
    /// `max c / min c` at the best alpha; always >= 1.
    pub ratio: f64,
    pub ell_max: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimEstimate {
    pub alpha_median: f64,
    pub per_node: Vec<NodeAlpha>,
    pub grid: AlphaGrid,
    /// Sampled nodes whose ball profile had fewer than [`MIN_RADII`] radii
    /// below the half-graph cutoff.
    pub skipped: Vec<NodeId>,
    pub seed: u64,
}

/// Best grid alpha for one cumulative ball profile. Radii run from 1 to the
/// largest `l` with `|B_l| < n/2`. Ties go to the smaller alpha.
pub fn best_alpha(sizes: &[usize], n: usize, grid: &[f64]) -> Option<NodeAlpha> {
    let radii: Vec<usize> = (1..sizes.len()).take_while(|&l| 2 * sizes[l] < n).collect();
    if radii.len() < MIN_RADII {
        return None;
    }
    let ln_l: Vec<f64> = radii.iter().map(|&l| (l as f64).ln()).collect();
    let ln_y: Vec<f64> = radii
        .iter()
        .map(|&l| ((sizes[l] - 1) as f64).ln())
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for &alpha in grid {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (a, b) in ln_y.iter().zip(&ln_l) {
            let c = a - alpha * b;
            lo = lo.min(c);
            hi = hi.max(c);
        }
        let spread = hi - lo;
        if best.is_none_or(|(_, s)| spread < s) {
            best = Some((alpha, spread));
        }
    }
    let (alpha, spread) = best?;
    Some(NodeAlpha {
        node: 0,
        alpha,
        ratio: spread.exp(),
        ell_max: *radii.last().unwrap() as u32,
    })
}

/// Estimates dimensionality from `samples` distinct nodes chosen with `seed`
/// (all nodes when `samples >= n`).
pub fn estimate_alpha(
    graph: &Graph,
    samples: usize,
    grid: AlphaGrid,
    seed: u64,
) -> Result<DimEstimate> {
    grid.validate()?;
    let n = graph.node_count();
    let nodes: Vec<NodeId> = if samples >= n {
        (0..n as NodeId).collect()
    } else {
        let mut rng = substream(seed, Domain::Samples, 0, 0);
        let mut v: Vec<NodeId> = index::sample(&mut rng, n, samples)
            .into_iter()
            .map(|i| i as NodeId)
            .collect();
        v.sort_unstable();
        v
    };
    let values = grid.values();
    let results: Vec<(NodeId, Option<NodeAlpha>)> = nodes
        .par_iter()
        .map_init(
            || Bfs::new(n),
            |bfs, &u| {
                let profile = BallProfile::from_bfs(bfs, graph, u, None);
                let fit =
                    best_alpha(&profile.sizes, n, &values).map(|f| NodeAlpha { node: u, ..f });
                (u, fit)
            },
        )
        .collect();
    let mut per_node = Vec::new();
    let mut skipped = Vec::new();
    for (u, fit) in results {
        match fit {
            Some(f) => per_node.push(f),
            None => skipped.push(u),
        }
    }
    if per_node.is_empty() {
        return Err(Error::NoEligibleSamples(format!(
            "every sampled node has fewer than {MIN_RADII} radii below n/2"
        )));
    }
    let alphas: Vec<f64> = per_node.iter().map(|f| f.alpha).collect();
    Ok(DimEstimate {
        alpha_median: median(&alphas),
        per_node,
        grid,
        skipped,
        seed,
    })
}

impl DimEstimate {
    pub fn to_report(&self, n: usize) -> StatReport {
        let mut r = StatReport::new("estimate-alpha", &["node", "alpha", "ratio", "ell_max"]);
        r.param("n", n)
            .param("seed", self.seed)
            .param("samples", self.per_node.len() + self.skipped.len())
            .param("skipped", self.skipped.len())
            .param("grid_min", self.grid.min)
            .param("grid_max", self.grid.max)
            .param("grid_step", self.grid.step);
        for f in &self.per_node {
            r.push_row(vec![f.node as f64, f.alpha, f.ratio, f.ell_max as f64]);
        }
        r.set_summary("alpha_median", self.alpha_median);
        r
    }
}
