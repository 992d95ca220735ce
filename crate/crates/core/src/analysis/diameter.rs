use rand::Rng;
use rayon::prelude::*;

use crate::analysis::report::StatReport;
use crate::error::{Error, Result};
use crate::graph::{Bfs, Graph, NodeId, UNREACHED};
use crate::overlay::HighwayOverlay;
use crate::rng::{substream, Domain};

/// Largest graph accepted in exact mode by default.
pub const DEFAULT_EXACT_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiameterMode {
    /// Eccentricity of every node; limited to `cap` nodes.
    Exact { cap: usize },
    /// Eccentricities of uniformly drawn sources; a lower bound.
    Sampled { sources: usize, seed: u64 },
}

/// BFS over local edges (both directions) plus directed long-range contacts.
fn augmented_eccentricity(
    graph: &Graph,
    overlay: &HighwayOverlay,
    source: NodeId,
    dist: &mut [u32],
    queue: &mut Vec<NodeId>,
) -> u32 {
    for &v in queue.iter() {
        dist[v as usize] = UNREACHED;
    }
    queue.clear();
    dist[source as usize] = 0;
    queue.push(source);
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        let du = dist[u as usize];
        for &v in graph.neighbors(u).iter().chain(overlay.contacts(u)) {
            if dist[v as usize] == UNREACHED {
                dist[v as usize] = du + 1;
                queue.push(v);
            }
        }
    }
    dist[*queue.last().unwrap() as usize]
}

/// Diameter of the augmented graph alongside the underlying diameter over
/// the same sources. Sampled mode reports lower bounds and says so in the
/// `mode` parameter.
pub fn estimate_diameter(
    graph: &Graph,
    overlay: &HighwayOverlay,
    mode: DiameterMode,
) -> Result<StatReport> {
    let n = graph.node_count();
    let (sources, label, seed): (Vec<NodeId>, &str, Option<u64>) = match mode {
        DiameterMode::Exact { cap } => {
            if n > cap {
                return Err(Error::ExactCapExceeded { n, cap });
            }
            ((0..n as NodeId).collect(), "exact", None)
        }
        DiameterMode::Sampled { sources, seed } => {
            if sources == 0 {
                return Err(Error::InvalidParameter("need at least one source".into()));
            }
            let picked = (0..sources as u64)
                .map(|i| substream(seed, Domain::Samples, 2, i).gen_range(0..n) as NodeId)
                .collect();
            (picked, "sampled-lower-bound", Some(seed))
        }
    };
    let eccs: Vec<(u32, u32)> = sources
        .par_iter()
        .map_init(
            || (vec![UNREACHED; n], Vec::with_capacity(n), Bfs::new(n)),
            |(dist, queue, bfs), &u| {
                let aug = augmented_eccentricity(graph, overlay, u, dist, queue);
                bfs.run(graph, u, None);
                (aug, bfs.max_dist())
            },
        )
        .collect();
    let augmented = eccs.iter().map(|e| e.0).max().unwrap();
    let underlying = eccs.iter().map(|e| e.1).max().unwrap();

    let p = overlay.params();
    let mut r = StatReport::new(
        "diameter",
        &[
            "n",
            "k",
            "sources",
            "augmented_diameter",
            "underlying_diameter",
        ],
    );
    r.param("mode", label)
        .param("n", n)
        .param("k", p.k)
        .param("q", p.q)
        .param("s", p.s)
        .param("overlay_seed", p.seed)
        .param("epoch", overlay.epoch());
    if let Some(seed) = seed {
        r.param("seed", seed);
    }
    r.push_row(vec![
        n as f64,
        p.k,
        sources.len() as f64,
        augmented as f64,
        underlying as f64,
    ]);
    r.set_summary("augmented_diameter", augmented as f64)
        .set_summary("underlying_diameter", underlying as f64);
    Ok(r)
}
