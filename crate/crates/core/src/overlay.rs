//! Randomized highway overlay.
//!
//! Each node becomes a highway node independently with probability `1/k`.
//! Every highway node `u` draws `round(q*k)` directed long-range contacts
//! among the other highway nodes, target `h` with probability
//! `d(u,h)^-s / z(u)` where `z(u)` sums `d(u,h)^-s` over all highway `h != u`.

use std::io::{BufRead, Write};
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Bfs, Graph, NodeId, TorusShape};
use crate::rng::{substream, Domain};

/// Membership resampling stops after this many epochs.
pub const MAX_EPOCHS: u32 = 16;

/// Rejection sampling on a torus is used while at least one node in this
/// many is a highway node; sparser overlays enumerate the highway set.
const REJECTION_DENSITY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayParams {
    /// Highway constant; each node is a highway node with probability `1/k`.
    pub k: f64,
    /// Contact multiplier.
    pub q: f64,
    /// Clustering exponent.
    pub s: f64,
    pub seed: u64,
}

impl OverlayParams {
    pub fn new(k: f64, q: f64, s: f64, seed: u64) -> Result<Self> {
        let p = OverlayParams { k, q, s, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "k must be >= 1, got {}",
                self.k
            )));
        }
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "q must be > 0, got {}",
                self.q
            )));
        }
        // s = 0 gives uniform contacts; allowed for testing
        if !(self.s.is_finite() && self.s >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "s must be >= 0, got {}",
                self.s
            )));
        }
        if self.contacts_per_node() == 0 {
            return Err(Error::InvalidParameter(format!(
                "round(q*k) must be >= 1, got q={} k={}",
                self.q, self.k
            )));
        }
        Ok(())
    }

    /// Long-range draws per highway node: `round(q*k)`.
    pub fn contacts_per_node(&self) -> usize {
        (self.q * self.k).round() as usize
    }
}

/// `ceil(ln n)`, the highway constant used for scaling experiments.
pub fn auto_k(n: usize) -> f64 {
    (n as f64).ln().ceil().max(1.0)
}

/// Highway flags plus the epoch that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub flags: Vec<bool>,
    pub epoch: u32,
}

impl Membership {
    pub fn highway_nodes(&self) -> Vec<NodeId> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(v, &f)| f.then_some(v as NodeId))
            .collect()
    }
}

/// Flags each node independently with probability `1/k`, each node reading
/// its own substream. Resamples with the next epoch until at least two nodes
/// are flagged.
pub fn sample_highway_membership(graph: &Graph, params: &OverlayParams) -> Result<Membership> {
    params.validate()?;
    let p = 1.0 / params.k;
    for epoch in 0..MAX_EPOCHS {
        let flags: Vec<bool> = (0..graph.node_count() as u64)
            .into_par_iter()
            .map(|v| substream(params.seed, Domain::Membership, epoch, v).gen::<f64>() < p)
            .collect();
        if flags.iter().filter(|&&f| f).count() >= 2 {
            return Ok(Membership { flags, epoch });
        }
    }
    Err(Error::TooFewHighwayNodes { epochs: MAX_EPOCHS })
}

/// `weights[d] = d^-s` for `d >= 1`.
fn weight_table(max_dist: usize, s: f64) -> Vec<f64> {
    let mut w = Vec::with_capacity(max_dist + 1);
    w.push(0.0);
    w.extend((1..=max_dist).map(|d| (d as f64).powf(-s)));
    w
}

/// First index whose cumulative weight exceeds `x`.
fn invert(cum: &[f64], x: f64) -> usize {
    cum.partition_point(|&c| c <= x).min(cum.len() - 1)
}

#[derive(Debug, Clone)]
enum Method {
    /// One BFS from the source, then inversion over highway nodes in
    /// ascending id.
    Bfs,
    /// Closed-form torus distances, inversion over highway nodes.
    TorusEnumerate(TorusShape),
    /// Draw an offset from the distance law over all nodes, keep it when it
    /// lands on a highway node. `cum` covers offsets `1..n`.
    TorusRejection { shape: TorusShape, cum: Vec<f64> },
}

/// Draws long-range contacts from the exact `d^-s` law over highway nodes.
#[derive(Debug, Clone)]
pub struct ContactSampler<'a> {
    graph: &'a Graph,
    highway: &'a [NodeId],
    is_highway: &'a [bool],
    weights: Vec<f64>,
    method: Method,
}

/// Per-thread buffers for [`ContactSampler`].
#[derive(Debug, Clone)]
pub struct SamplerScratch {
    bfs: Bfs,
    cum: Vec<f64>,
    targets: Vec<NodeId>,
}

impl SamplerScratch {
    pub fn new(graph: &Graph) -> Self {
        SamplerScratch {
            bfs: Bfs::new(graph.node_count()),
            cum: Vec::new(),
            targets: Vec::new(),
        }
    }
}

impl<'a> ContactSampler<'a> {
    pub fn new(graph: &'a Graph, highway: &'a [NodeId], is_highway: &'a [bool], s: f64) -> Self {
        let n = graph.node_count();
        match graph.torus() {
            Some(shape) => {
                let weights = weight_table(shape.diameter() as usize, s);
                let method = if highway.len() * REJECTION_DENSITY >= n {
                    let mut acc = 0.0;
                    let cum = (1..n as NodeId)
                        .map(|o| {
                            acc += weights[shape.distance(0, o) as usize];
                            acc
                        })
                        .collect();
                    Method::TorusRejection { shape, cum }
                } else {
                    Method::TorusEnumerate(shape)
                };
                ContactSampler {
                    graph,
                    highway,
                    is_highway,
                    weights,
                    method,
                }
            }
            None => ContactSampler {
                graph,
                highway,
                is_highway,
                weights: weight_table(n, s),
                method: Method::Bfs,
            },
        }
    }

    /// Fills `scratch.cum`/`scratch.targets` with the cumulative law over
    /// highway nodes `!= u` in ascending id; returns its total, `z(u)`.
    fn enumerate(&self, u: NodeId, scratch: &mut SamplerScratch) -> f64 {
        scratch.cum.clear();
        scratch.targets.clear();
        let mut acc = 0.0;
        let mut push = |h: NodeId, d: u32| {
            acc += self.weights[d as usize];
            scratch.cum.push(acc);
            scratch.targets.push(h);
        };
        match &self.method {
            Method::Bfs => {
                scratch.bfs.run(self.graph, u, None);
                for &h in self.highway {
                    if h != u {
                        push(h, scratch.bfs.dist(h));
                    }
                }
            }
            Method::TorusEnumerate(shape) | Method::TorusRejection { shape, .. } => {
                for &h in self.highway {
                    if h != u {
                        push(h, shape.distance(u, h));
                    }
                }
            }
        }
        acc
    }

    /// Normalization constant `z(u)`, summed over highway nodes in ascending id.
    pub fn z(&self, u: NodeId, scratch: &mut SamplerScratch) -> f64 {
        match &self.method {
            Method::Bfs => self.enumerate(u, scratch),
            Method::TorusEnumerate(shape) | Method::TorusRejection { shape, .. } => self
                .highway
                .iter()
                .filter(|&&h| h != u)
                .map(|&h| self.weights[shape.distance(u, h) as usize])
                .sum(),
        }
    }

    /// `count` independent draws (with replacement) for highway node `u`.
    /// Also returns `z(u)` when it was computed on the way.
    pub fn draw(
        &self,
        u: NodeId,
        count: usize,
        rng: &mut ChaCha8Rng,
        scratch: &mut SamplerScratch,
    ) -> (Vec<NodeId>, Option<f64>) {
        match &self.method {
            Method::TorusRejection { shape, cum } => {
                let total = *cum.last().unwrap();
                let draws = (0..count)
                    .map(|_| loop {
                        let offset = invert(cum, rng.gen::<f64>() * total) as NodeId + 1;
                        let v = shape.translate(u, offset);
                        if self.is_highway[v as usize] {
                            break v;
                        }
                    })
                    .collect();
                (draws, None)
            }
            _ => {
                let z = self.enumerate(u, scratch);
                let draws = (0..count)
                    .map(|_| scratch.targets[invert(&scratch.cum, rng.gen::<f64>() * z)])
                    .collect();
                (draws, Some(z))
            }
        }
    }
}

/// Highway membership, long-range contacts and normalization constants.
#[derive(Debug, Clone)]
pub struct HighwayOverlay {
    params: OverlayParams,
    epoch: u32,
    is_highway: Vec<bool>,
    highway: Vec<NodeId>,
    rank: Vec<u32>,
    offsets: Vec<usize>,
    contacts: Vec<NodeId>,
    draws_per_node: usize,
    z: Vec<OnceLock<f64>>,
    torus: Option<TorusShape>,
}

const NO_RANK: u32 = u32::MAX;

/// Samples membership and contacts. Deterministic for fixed
/// `(graph, params)` regardless of the rayon pool size.
pub fn build_overlay(graph: &Graph, params: &OverlayParams) -> Result<HighwayOverlay> {
    let membership = sample_highway_membership(graph, params)?;
    build_overlay_with(graph, params, membership)
}

/// Samples contacts on top of a given membership.
pub fn build_overlay_with(
    graph: &Graph,
    params: &OverlayParams,
    membership: Membership,
) -> Result<HighwayOverlay> {
    params.validate()?;
    if membership.flags.len() != graph.node_count() {
        return Err(Error::InvalidParameter(
            "membership size does not match graph".into(),
        ));
    }
    let highway = membership.highway_nodes();
    if highway.len() < 2 {
        return Err(Error::TooFewHighwayNodes {
            epochs: membership.epoch + 1,
        });
    }
    let draws_per_node = params.contacts_per_node();
    let sampler = ContactSampler::new(graph, &highway, &membership.flags, params.s);
    let per_node: Vec<(Vec<NodeId>, Option<f64>)> = highway
        .par_iter()
        .map_init(
            || SamplerScratch::new(graph),
            |scratch, &u| {
                let mut rng = substream(params.seed, Domain::Contacts, membership.epoch, u as u64);
                let (mut draws, z) = sampler.draw(u, draws_per_node, &mut rng, scratch);
                draws.sort_unstable();
                draws.dedup();
                (draws, z)
            },
        )
        .collect();

    let mut rank = vec![NO_RANK; graph.node_count()];
    for (i, &h) in highway.iter().enumerate() {
        rank[h as usize] = i as u32;
    }
    let mut offsets = Vec::with_capacity(highway.len() + 1);
    offsets.push(0);
    let mut contacts = Vec::new();
    let mut z = Vec::with_capacity(highway.len());
    for (draws, zu) in per_node {
        contacts.extend_from_slice(&draws);
        offsets.push(contacts.len());
        let cell = OnceLock::new();
        if let Some(v) = zu {
            let _ = cell.set(v);
        }
        z.push(cell);
    }
    Ok(HighwayOverlay {
        params: *params,
        epoch: membership.epoch,
        is_highway: membership.flags,
        highway,
        rank,
        offsets,
        contacts,
        draws_per_node,
        z,
        torus: graph.torus(),
    })
}

impl HighwayOverlay {
    pub fn params(&self) -> &OverlayParams {
        &self.params
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn node_count(&self) -> usize {
        self.is_highway.len()
    }

    #[inline]
    pub fn is_highway(&self, u: NodeId) -> bool {
        self.is_highway[u as usize]
    }

    pub fn highway_flags(&self) -> &[bool] {
        &self.is_highway
    }

    /// Highway nodes in ascending id.
    pub fn highway_nodes(&self) -> &[NodeId] {
        &self.highway
    }

    pub fn membership(&self) -> Membership {
        Membership {
            flags: self.is_highway.clone(),
            epoch: self.epoch,
        }
    }

    /// Raw draws per highway node before deduplication.
    pub fn draws_per_node(&self) -> usize {
        self.draws_per_node
    }

    /// Distinct long-range targets of `u`, ascending; empty for non-highway nodes.
    #[inline]
    pub fn contacts(&self, u: NodeId) -> &[NodeId] {
        match self.rank[u as usize] {
            NO_RANK => &[],
            r => &self.contacts[self.offsets[r as usize]..self.offsets[r as usize + 1]],
        }
    }

    pub fn total_contacts(&self) -> usize {
        self.contacts.len()
    }

    /// Exact normalization constant of highway node `u`.
    pub fn zvalue(&self, u: NodeId) -> Result<f64> {
        if u as usize >= self.node_count() {
            return Err(Error::InvalidNode {
                node: u as u64,
                n: self.node_count(),
            });
        }
        match self.rank[u as usize] {
            NO_RANK => Err(Error::NotHighway(u)),
            r => Ok(*self.z[r as usize].get_or_init(|| {
                let shape = self.torus.expect("z is only left unset for torus overlays");
                let weights = weight_table(shape.diameter() as usize, self.params.s);
                self.highway
                    .iter()
                    .filter(|&&h| h != u)
                    .map(|&h| weights[shape.distance(u, h) as usize])
                    .sum()
            })),
        }
    }

    /// Fills in every cached z value, in parallel.
    pub fn materialize_z(&self) {
        self.highway.par_iter().for_each(|&h| {
            let _ = self.zvalue(h);
        });
    }

    /// Sampler drawing fresh contacts from this overlay's law.
    pub fn sampler<'a>(&'a self, graph: &'a Graph) -> ContactSampler<'a> {
        ContactSampler::new(graph, &self.highway, &self.is_highway, self.params.s)
    }

    /// Header `k q s seed epoch n`, then `h <id> z=<z> : <targets>` per
    /// highway node in ascending id. Floats carry 17 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        self.materialize_z();
        let p = &self.params;
        writeln!(
            out,
            "{:.16e} {:.16e} {:.16e} {} {} {}",
            p.k,
            p.q,
            p.s,
            p.seed,
            self.epoch,
            self.node_count()
        )?;
        for &h in &self.highway {
            write!(out, "h {h} z={:.16e} :", self.zvalue(h)?)?;
            for t in self.contacts(h) {
                write!(out, " {t}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads an overlay written by [`write_text`](Self::write_text) and
    /// checks it against `graph`.
    pub fn read_text<R: BufRead>(reader: R, graph: &Graph) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (params, epoch, n) = loop {
            let Some((idx, line)) = lines.next() else {
                return Err(Error::parse(1, "missing header"));
            };
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let lineno = idx + 1;
            if f.len() != 6 {
                return Err(Error::parse(lineno, "expected header `k q s seed epoch n`"));
            }
            let float = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("bad number {s:?}")))
            };
            let int = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| Error::parse(lineno, format!("bad integer {s:?}")))
            };
            let params = OverlayParams {
                k: float(f[0])?,
                q: float(f[1])?,
                s: float(f[2])?,
                seed: int(f[3])?,
            };
            params
                .validate()
                .map_err(|e| Error::parse(lineno, e.to_string()))?;
            break (params, int(f[4])? as u32, int(f[5])? as usize);
        };
        if n != graph.node_count() {
            return Err(Error::InvalidParameter(format!(
                "overlay is for {n} nodes, graph has {}",
                graph.node_count()
            )));
        }
        let mut highway: Vec<NodeId> = Vec::new();
        let mut zs = Vec::new();
        let mut lists: Vec<Vec<NodeId>> = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, tail) = line
                .split_once(" :")
                .ok_or_else(|| Error::parse(lineno, "missing ` :` separator"))?;
            let f: Vec<&str> = head.split_whitespace().collect();
            if f.len() != 3 || f[0] != "h" || !f[2].starts_with("z=") {
                return Err(Error::parse(lineno, "expected `h <id> z=<float> : ...`"));
            }
            let id: NodeId = f[1]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad id {:?}", f[1])))?;
            if id as usize >= n || highway.last().is_some_and(|&p| p >= id) {
                return Err(Error::parse(
                    lineno,
                    format!("highway id {id} out of range or order"),
                ));
            }
            let z: f64 = f[2][2..]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad z {:?}", f[2])))?;
            let targets = tail
                .split_whitespace()
                .map(|t| {
                    t.parse::<NodeId>()
                        .map_err(|_| Error::parse(lineno, format!("bad target {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if targets.is_empty() || targets.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::parse(
                    lineno,
                    "targets must be non-empty and strictly ascending",
                ));
            }
            highway.push(id);
            zs.push(z);
            lists.push(targets);
        }
        if highway.len() < 2 {
            return Err(Error::TooFewHighwayNodes { epochs: epoch + 1 });
        }
        let mut is_highway = vec![false; n];
        let mut rank = vec![NO_RANK; n];
        for (i, &h) in highway.iter().enumerate() {
            is_highway[h as usize] = true;
            rank[h as usize] = i as u32;
        }
        let mut offsets = vec![0];
        let mut contacts = Vec::new();
        for (&h, list) in highway.iter().zip(&lists) {
            for &t in list {
                if t as usize >= n || !is_highway[t as usize] || t == h {
                    return Err(Error::InvalidParameter(format!(
                        "contact {h}->{t} must point at another highway node"
                    )));
                }
            }
            contacts.extend_from_slice(list);
            offsets.push(contacts.len());
        }
        let z = zs.into_iter().map(OnceLock::from).collect();
        Ok(HighwayOverlay {
            draws_per_node: params.contacts_per_node(),
            params,
            epoch,
            is_highway,
            highway,
            rank,
            offsets,
            contacts,
            z,
            torus: None,
        })
    }
}

/// Distance from every node to its nearest highway node, and the neighbor to
/// step to on the way there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearestHighway {
    pub dist: Vec<u32>,
    pub next_hop: Vec<NodeId>,
}

impl NearestHighway {
    pub fn max_dist(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    pub fn mean_dist(&self) -> f64 {
        self.dist.iter().map(|&d| d as f64).sum::<f64>() / self.dist.len() as f64
    }
}

/// Multi-source BFS from all highway nodes. The next hop is the lowest-id
/// neighbor one step closer; highway nodes point at themselves.
pub fn nearest_highway_field(graph: &Graph, overlay: &HighwayOverlay) -> NearestHighway {
    nearest_highway_from(graph, overlay.highway_nodes())
}

/// [`nearest_highway_field`] for an explicit, non-empty highway set.
pub fn nearest_highway_from(graph: &Graph, highway: &[NodeId]) -> NearestHighway {
    assert!(!highway.is_empty(), "need at least one highway node");
    let mut bfs = Bfs::new(graph.node_count());
    bfs.run_multi(graph, highway, None);
    let dist = bfs.distances().to_vec();
    let next_hop = (0..graph.node_count() as NodeId)
        .map(|v| match dist[v as usize] {
            0 => v,
            d => *graph
                .neighbors(v)
                .iter()
                .find(|&&w| dist[w as usize] + 1 == d)
                .expect("connected graph has a closer neighbor"),
        })
        .collect();
    NearestHighway { dist, next_hop }
}
