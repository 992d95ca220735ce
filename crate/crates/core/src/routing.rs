//! Greedy routing over an underlying graph plus highway overlay.
//!
//! Every variant measures progress with exact hop distance to the target
//! (one BFS from the target per route) and breaks ties by lowest node id.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Bfs, Graph, NodeId};
use crate::overlay::{nearest_highway_field, HighwayOverlay, NearestHighway};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Best of local and long-range neighbors at every step.
    Plain,
    /// Local steps to the highway, improving long-range hops while possible,
    /// local steps otherwise.
    HighwaySticky,
    /// As `HighwaySticky`, but reaches the highway through nearest-highway
    /// pointers.
    HighwayAware,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::Plain,
        Variant::HighwaySticky,
        Variant::HighwayAware,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::HighwaySticky => "highway-sticky",
            Variant::HighwayAware => "highway-aware",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown routing variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Local,
    LongRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    ToHighway,
    OnHighway,
    ToTarget,
}

/// One routed message. `path` has one more entry than `edge_kinds`/`phases`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingTrace {
    pub source: NodeId,
    pub target: NodeId,
    pub variant: Variant,
    pub path: Vec<NodeId>,
    pub edge_kinds: Vec<EdgeKind>,
    pub phases: Vec<Phase>,
    /// `d(source, target)` over local edges.
    pub dist_st: u32,
}

impl RoutingTrace {
    pub fn hops(&self) -> usize {
        self.edge_kinds.len()
    }

    pub fn reached_target(&self) -> bool {
        self.path.first() == Some(&self.source) && self.path.last() == Some(&self.target)
    }

    pub fn phase_hops(&self, phase: Phase) -> usize {
        self.phases.iter().filter(|&&p| p == phase).count()
    }

    /// Checks endpoints and that every hop uses an edge of the recorded kind.
    pub fn validate(&self, graph: &Graph, overlay: &HighwayOverlay) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !self.reached_target() {
            return bad(format!(
                "trace {}->{} does not connect its endpoints",
                self.source, self.target
            ));
        }
        if self.edge_kinds.len() + 1 != self.path.len()
            || self.phases.len() != self.edge_kinds.len()
        {
            return bad("trace label lengths do not match path".into());
        }
        for (i, w) in self.path.windows(2).enumerate() {
            let ok = match self.edge_kinds[i] {
                EdgeKind::Local => graph.has_edge(w[0], w[1]),
                EdgeKind::LongRange => overlay.contacts(w[0]).binary_search(&w[1]).is_ok(),
            };
            if !ok {
                return bad(format!(
                    "hop {i} {}->{} is not a {:?} edge",
                    w[0], w[1], self.edge_kinds[i]
                ));
            }
        }
        Ok(())
    }
}

/// Router bound to one graph and overlay. The nearest-highway field is built
/// on first use by a `HighwayAware` route.
pub struct Router<'a> {
    graph: &'a Graph,
    overlay: &'a HighwayOverlay,
    nearest: OnceLock<NearestHighway>,
}

/// Per-thread buffers for [`Router::route`].
pub struct RouteScratch {
    bfs: Bfs,
}

impl RouteScratch {
    pub fn new(graph: &Graph) -> Self {
        RouteScratch {
            bfs: Bfs::new(graph.node_count()),
        }
    }
}

struct Walk {
    path: Vec<NodeId>,
    kinds: Vec<EdgeKind>,
    phases: Vec<Phase>,
    seen_highway: bool,
}

impl Walk {
    fn step(&mut self, next: NodeId, kind: EdgeKind, overlay: &HighwayOverlay) {
        let phase = match (kind, self.seen_highway) {
            (EdgeKind::LongRange, _) => Phase::OnHighway,
            (EdgeKind::Local, false) => Phase::ToHighway,
            (EdgeKind::Local, true) => Phase::ToTarget,
        };
        self.path.push(next);
        self.kinds.push(kind);
        self.phases.push(phase);
        self.seen_highway |= overlay.is_highway(next);
    }
}

impl<'a> Router<'a> {
    pub fn new(graph: &'a Graph, overlay: &'a HighwayOverlay) -> Self {
        Router {
            graph,
            overlay,
            nearest: OnceLock::new(),
        }
    }

    pub fn with_nearest(
        graph: &'a Graph,
        overlay: &'a HighwayOverlay,
        nearest: NearestHighway,
    ) -> Self {
        let router = Router::new(graph, overlay);
        let _ = router.nearest.set(nearest);
        router
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn nearest(&self) -> &NearestHighway {
        self.nearest
            .get_or_init(|| nearest_highway_field(self.graph, self.overlay))
    }

    /// Routes one message; `scratch` holds the BFS from `target`.
    pub fn route(
        &self,
        source: NodeId,
        target: NodeId,
        variant: Variant,
        scratch: &mut RouteScratch,
    ) -> Result<RoutingTrace> {
        self.graph.check_node(source)?;
        self.graph.check_node(target)?;
        if self.overlay.node_count() != self.graph.node_count() {
            return Err(Error::InvalidParameter(
                "overlay does not match graph".into(),
            ));
        }
        scratch.bfs.run(self.graph, target, None);
        let dist = scratch.bfs.distances();
        let g = self.graph;
        let o = self.overlay;

        let mut walk = Walk {
            path: vec![source],
            kinds: Vec::new(),
            phases: Vec::new(),
            seen_highway: o.is_highway(source),
        };
        let mut cur = source;

        // argmin of d(., target), lowest id on ties
        let best_of = |nodes: &[NodeId]| -> Option<NodeId> {
            nodes.iter().copied().min_by_key(|&v| (dist[v as usize], v))
        };
        let local_step = |cur: NodeId| -> NodeId {
            let next = best_of(g.neighbors(cur)).expect("connected graph");
            debug_assert!(dist[next as usize] < dist[cur as usize]);
            next
        };

        if variant == Variant::HighwayAware {
            let nearest = self.nearest();
            while cur != target && !o.is_highway(cur) {
                cur = nearest.next_hop[cur as usize];
                walk.step(cur, EdgeKind::Local, o);
            }
        }

        while cur != target {
            let here = dist[cur as usize];
            let (next, kind) = match variant {
                Variant::Plain => {
                    let local = local_step(cur);
                    match best_of(o.contacts(cur)) {
                        Some(far) if (dist[far as usize], far) < (dist[local as usize], local) => {
                            (far, EdgeKind::LongRange)
                        }
                        _ => (local, EdgeKind::Local),
                    }
                }
                Variant::HighwaySticky | Variant::HighwayAware => match best_of(o.contacts(cur)) {
                    Some(far) if dist[far as usize] < here => (far, EdgeKind::LongRange),
                    _ => (local_step(cur), EdgeKind::Local),
                },
            };
            cur = next;
            walk.step(cur, kind, o);
        }

        Ok(RoutingTrace {
            source,
            target,
            variant,
            path: walk.path,
            edge_kinds: walk.kinds,
            phases: walk.phases,
            dist_st: dist[source as usize],
        })
    }
}

/// Convenience wrapper for a single route.
pub fn route(
    graph: &Graph,
    overlay: &HighwayOverlay,
    source: NodeId,
    target: NodeId,
    variant: Variant,
) -> Result<RoutingTrace> {
    let router = Router::new(graph, overlay);
    router.route(source, target, variant, &mut RouteScratch::new(graph))
}

/// Per-pair summary row of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteRow {
    pub pair_id: usize,
    pub source: NodeId,
    pub target: NodeId,
    pub variant: Variant,
    pub hops: usize,
    pub hops_to_highway: usize,
    pub hops_on_highway: usize,
    pub hops_to_target: usize,
    pub dist_st: u32,
}

impl RouteRow {
    pub fn from_trace(pair_id: usize, trace: &RoutingTrace) -> Self {
        RouteRow {
            pair_id,
            source: trace.source,
            target: trace.target,
            variant: trace.variant,
            hops: trace.hops(),
            hops_to_highway: trace.phase_hops(Phase::ToHighway),
            hops_on_highway: trace.phase_hops(Phase::OnHighway),
            hops_to_target: trace.phase_hops(Phase::ToTarget),
            dist_st: trace.dist_st,
        }
    }
}

pub const TRACE_CSV_HEADER: &str =
    "pair_id,source,target,variant,hops,hops_to_highway,hops_on_highway,hops_to_target,dist_st";

/// Routes every pair on the current rayon pool. Output order matches input
/// order; a failing pair yields an `Err` row without stopping the batch.
pub fn route_batch(
    router: &Router<'_>,
    pairs: &[(NodeId, NodeId)],
    variant: Variant,
) -> Vec<Result<RouteRow>> {
    if variant == Variant::HighwayAware {
        router.nearest();
    }
    pairs
        .par_iter()
        .enumerate()
        .map_init(
            || RouteScratch::new(router.graph()),
            |scratch, (i, &(s, t))| {
                router
                    .route(s, t, variant, scratch)
                    .map(|trace| RouteRow::from_trace(i, &trace))
            },
        )
        .collect()
}

/// Writes successful rows as trace CSV; failed pairs become `# pair <i>:`
/// comment lines.
pub fn write_batch_csv<W: Write>(rows: &[Result<RouteRow>], mut out: W) -> Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for (i, row) in rows.iter().enumerate() {
        match row {
            Ok(r) => writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.pair_id,
                r.source,
                r.target,
                r.variant,
                r.hops,
                r.hops_to_highway,
                r.hops_on_highway,
                r.hops_to_target,
                r.dist_st
            )?,
            Err(e) => writeln!(out, "# pair {i}: {e}")?,
        }
    }
    out.flush()?;
    Ok(())
}
