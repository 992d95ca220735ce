//! Immutable undirected graphs in compressed adjacency form, hop-distance
//! BFS, balls, shells and independent-ball packing.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Distance sentinel for nodes not reached (beyond a cutoff).
pub const UNREACHED: u32 = u32::MAX;

/// Shape of a wrap-around lattice. Lets callers evaluate hop distance in
/// closed form instead of running a BFS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusShape {
    pub dim: usize,
    pub side: usize,
}

impl TorusShape {
    pub fn node_count(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// Row-major coordinates, last axis fastest.
    pub fn coords(&self, mut id: usize, out: &mut [usize]) {
        for axis in (0..self.dim).rev() {
            out[axis] = id % self.side;
            id /= self.side;
        }
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> u32 {
        let (mut a, mut b) = (a as usize, b as usize);
        let mut total = 0;
        for _ in 0..self.dim {
            let (x, y) = (a % self.side, b % self.side);
            let dx = x.abs_diff(y);
            total += dx.min(self.side - dx);
            a /= self.side;
            b /= self.side;
        }
        total as u32
    }

    /// Node reached from `from` by adding the displacement encoded by
    /// `offset` (itself a node id, read as a coordinate vector).
    pub fn translate(&self, from: NodeId, offset: NodeId) -> NodeId {
        let (mut a, mut b) = (from as usize, offset as usize);
        let mut id = 0;
        let mut place = 1;
        for _ in 0..self.dim {
            let x = (a % self.side + b % self.side) % self.side;
            id += x * place;
            place *= self.side;
            a /= self.side;
            b /= self.side;
        }
        id as NodeId
    }

    pub fn diameter(&self) -> u32 {
        (self.dim * (self.side / 2)) as u32
    }
}

/// Undirected simple connected graph. Node ids are dense `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    torus: Option<TorusShape>,
}

impl Graph {
    /// Builds a graph from an undirected edge list with each edge listed once.
    /// Rejects out-of-range ids, self-loops, duplicates and disconnected input.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let graph = Self::from_edges_unchecked_connectivity(n, edges)?;
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    pub(crate) fn from_edges_unchecked_connectivity<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > NodeId::MAX as usize {
            return Err(Error::BudgetExceeded {
                requested: n as u128,
                budget: NodeId::MAX as usize,
            });
        }
        let edges: Vec<(NodeId, NodeId)> = edges.into_iter().collect();
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::InvalidNode { node: x as u64, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0; offsets[n]];
        for &(u, v) in &edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for u in 0..n {
            let adj = &mut targets[offsets[u]..offsets[u + 1]];
            adj.sort_unstable();
            if let Some(w) = adj.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (u as NodeId, w[0]);
                return Err(Error::DuplicateEdge(a.min(b), a.max(b)));
            }
        }
        Ok(Graph {
            offsets,
            targets,
            torus: None,
        })
    }

    pub(crate) fn with_torus(mut self, shape: TorusShape) -> Self {
        debug_assert_eq!(shape.node_count(), self.node_count());
        self.torus = Some(shape);
        self
    }

    /// Closed-form metric, present for wrap lattices built in memory.
    pub fn torus(&self) -> Option<TorusShape> {
        self.torus
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Sorted ascending.
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.neighbors(u).len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        })
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if (u as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                node: u as u64,
                n: self.node_count(),
            })
        }
    }

    pub fn component_count(&self) -> usize {
        self.components().1
    }

    /// Component label per node (labels in order of smallest member) and
    /// the number of components.
    pub(crate) fn components(&self) -> (Vec<u32>, usize) {
        let n = self.node_count();
        let mut label = vec![u32::MAX; n];
        let mut queue = Vec::new();
        let mut count = 0;
        for start in 0..n {
            if label[start] != u32::MAX {
                continue;
            }
            label[start] = count;
            queue.clear();
            queue.push(start as NodeId);
            let mut head = 0;
            while head < queue.len() {
                let u = queue[head];
                head += 1;
                for &v in self.neighbors(u) {
                    if label[v as usize] == u32::MAX {
                        label[v as usize] = count;
                        queue.push(v);
                    }
                }
            }
            count += 1;
        }
        (label, count as usize)
    }

    /// Parses the text format: `n m` on the first line, then `m` lines `u v`.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let a = fields.next();
            let b = fields.next();
            let (Some(a), Some(b), None) = (a, b, fields.next()) else {
                return Err(Error::parse(lineno, "expected two fields"));
            };
            match header {
                None => {
                    let n = a
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad node count {a:?}")))?;
                    let m = b
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad edge count {b:?}")))?;
                    header = Some((n, m));
                }
                Some((n, _)) => {
                    let parse_id = |s: &str| -> Result<NodeId> {
                        let id: u64 = s
                            .parse()
                            .map_err(|_| Error::parse(lineno, format!("bad node id {s:?}")))?;
                        if id as usize >= n {
                            return Err(Error::parse(
                                lineno,
                                format!("node id {id} out of range 0..{n}"),
                            ));
                        }
                        Ok(id as NodeId)
                    };
                    edges.push((parse_id(a)?, parse_id(b)?));
                }
            }
        }
        let (n, m) = header.ok_or(Error::EmptyGraph)?;
        if edges.len() != m {
            return Err(Error::parse(
                0,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        Graph::from_edges(n, edges)
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.node_count(), self.edge_count())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reusable BFS state. Resetting only touches the nodes visited by the
/// previous run, so bounded searches on large graphs stay cheap.
#[derive(Debug, Clone)]
pub struct Bfs {
    dist: Vec<u32>,
    order: Vec<NodeId>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Bfs {
            dist: vec![UNREACHED; n],
            order: Vec::with_capacity(n),
        }
    }

    fn reset(&mut self) {
        for &v in &self.order {
            self.dist[v as usize] = UNREACHED;
        }
        self.order.clear();
    }

    /// Single-source BFS. Returns visited nodes in BFS order (distances
    /// non-decreasing along it).
    pub fn run(&mut self, graph: &Graph, source: NodeId, cutoff: Option<u32>) -> &[NodeId] {
        self.run_multi(graph, &[source], cutoff)
    }

    pub fn run_multi(
        &mut self,
        graph: &Graph,
        sources: &[NodeId],
        cutoff: Option<u32>,
    ) -> &[NodeId] {
        debug_assert_eq!(self.dist.len(), graph.node_count());
        self.reset();
        for &s in sources {
            if self.dist[s as usize] == UNREACHED {
                self.dist[s as usize] = 0;
                self.order.push(s);
            }
        }
        let limit = cutoff.unwrap_or(UNREACHED - 1);
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            let du = self.dist[u as usize];
            if du >= limit {
                continue;
            }
            for &v in graph.neighbors(u) {
                let dv = &mut self.dist[v as usize];
                if *dv == UNREACHED {
                    *dv = du + 1;
                    self.order.push(v);
                }
            }
        }
        &self.order
    }

    #[inline]
    pub fn dist(&self, v: NodeId) -> u32 {
        self.dist[v as usize]
    }

    pub fn distances(&self) -> &[u32] {
        &self.dist
    }

    pub fn visited(&self) -> &[NodeId] {
        &self.order
    }

    /// Distance of the last visited node (eccentricity when uncut).
    pub fn max_dist(&self) -> u32 {
        self.order.last().map_or(0, |&v| self.dist[v as usize])
    }
}

/// Hop distances from one source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    pub source: NodeId,
    pub dist: Vec<u32>,
}

impl DistanceField {
    pub fn get(&self, v: NodeId) -> Option<u32> {
        match self.dist[v as usize] {
            UNREACHED => None,
            d => Some(d),
        }
    }
}

pub fn bfs(graph: &Graph, source: NodeId, cutoff: Option<u32>) -> Result<DistanceField> {
    graph.check_node(source)?;
    let mut scratch = Bfs::new(graph.node_count());
    scratch.run(graph, source, cutoff);
    Ok(DistanceField {
        source,
        dist: scratch.dist,
    })
}

/// Nodes within distance `radius` of `center`, in BFS order.
pub fn ball(graph: &Graph, center: NodeId, radius: u32) -> Result<Vec<NodeId>> {
    graph.check_node(center)?;
    let mut scratch = Bfs::new(graph.node_count());
    Ok(scratch.run(graph, center, Some(radius)).to_vec())
}

/// Shell of width `width` at index `index`: distances in
/// `(index*width, (index+1)*width]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShellSpec {
    width: u32,
    index: u32,
}

impl ShellSpec {
    pub fn new(width: u32, index: u32) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidParameter("shell width must be >= 1".into()));
        }
        Ok(ShellSpec { width, index })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn inner(&self) -> u32 {
        self.index * self.width
    }

    pub fn outer(&self) -> u32 {
        (self.index + 1) * self.width
    }

    pub fn contains(&self, d: u32) -> bool {
        d > self.inner() && d <= self.outer()
    }
}

pub fn shell(graph: &Graph, center: NodeId, spec: ShellSpec) -> Result<Vec<NodeId>> {
    graph.check_node(center)?;
    let mut scratch = Bfs::new(graph.node_count());
    scratch.run(graph, center, Some(spec.outer()));
    Ok(scratch
        .visited()
        .iter()
        .copied()
        .filter(|&v| spec.contains(scratch.dist(v)))
        .collect())
}

/// Cumulative ball sizes `|B_l(center)|` for `l = 0..=max_radius`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallProfile {
    pub center: NodeId,
    pub sizes: Vec<usize>,
}

impl BallProfile {
    /// With no `max_radius` the profile runs to the eccentricity of `center`.
    pub fn compute(graph: &Graph, center: NodeId, max_radius: Option<u32>) -> Result<Self> {
        graph.check_node(center)?;
        let mut scratch = Bfs::new(graph.node_count());
        Ok(Self::from_bfs(&mut scratch, graph, center, max_radius))
    }

    pub(crate) fn from_bfs(
        scratch: &mut Bfs,
        graph: &Graph,
        center: NodeId,
        max_radius: Option<u32>,
    ) -> Self {
        scratch.run(graph, center, max_radius);
        let top = scratch.max_dist() as usize;
        let mut sizes = vec![0usize; top + 1];
        for &v in scratch.visited() {
            sizes[scratch.dist(v) as usize] += 1;
        }
        for l in 1..sizes.len() {
            sizes[l] += sizes[l - 1];
        }
        if let Some(r) = max_radius {
            let last = *sizes.last().unwrap();
            sizes.resize(r as usize + 1, last);
        }
        BallProfile { center, sizes }
    }
}

/// Greedy packing of centers pairwise more than `2*radius` apart: scan nodes in
/// ascending id, take each still-available node and block its
/// `2*radius`-ball.
pub fn pack_independent_balls(graph: &Graph, radius: u32) -> Result<Vec<NodeId>> {
    if radius == 0 {
        return Err(Error::InvalidParameter(
            "packing radius must be >= 1".into(),
        ));
    }
    let n = graph.node_count();
    let mut available = vec![true; n];
    let mut scratch = Bfs::new(n);
    let mut centers = Vec::new();
    for u in 0..n as NodeId {
        if !available[u as usize] {
            continue;
        }
        centers.push(u);
        for &v in scratch.run(graph, u, Some(2 * radius)) {
            available[v as usize] = false;
        }
    }
    Ok(centers)
}

/// Eccentricity of `u` over local edges.
pub fn eccentricity(graph: &Graph, scratch: &mut Bfs, u: NodeId) -> u32 {
    scratch.run(graph, u, None);
    scratch.max_dist()
}

/// Upper bound on the graph radius: the minimum eccentricity over up to
/// `probes` nodes spread evenly over the id range.
pub fn sampled_radius(graph: &Graph, probes: usize) -> u32 {
    if let Some(t) = graph.torus() {
        return t.diameter();
    }
    let n = graph.node_count();
    let probes = probes.clamp(1, n);
    let mut scratch = Bfs::new(n);
    (0..probes)
        .map(|i| eccentricity(graph, &mut scratch, (i * n / probes) as NodeId))
        .min()
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n as NodeId).map(|v| (v - 1, v))).unwrap()
    }

    #[test]
    fn bfs_on_path() {
        let g = path(3);
        assert_eq!(bfs(&g, 0, None).unwrap().dist, vec![0, 1, 2]);
        assert_eq!(bfs(&g, 1, None).unwrap().get(1), Some(0));
        let cut = bfs(&g, 0, Some(1)).unwrap();
        assert_eq!(cut.get(2), None);
        assert!(matches!(bfs(&g, 3, None), Err(Error::InvalidNode { .. })));
    }

    #[test]
    fn rejects_bad_edge_lists() {
        assert!(matches!(
            Graph::from_edges(3, [(0, 1), (1, 1)]),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            Graph::from_edges(4, [(0, 1), (2, 3)]),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 5)]),
            Err(Error::InvalidNode { node: 5, .. })
        ));
        assert!(matches!(Graph::from_edges(0, []), Err(Error::EmptyGraph)));
    }

    #[test]
    fn text_round_trip_and_errors() {
        let g = path(4);
        let mut buf = Vec::new();
        g.write_text(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "4 3\n0 1\n1 2\n2 3\n"
        );
        assert_eq!(Graph::read_text(&buf[..]).unwrap(), g);

        let err = Graph::read_text("3 2\n0 1\n1 7\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = Graph::read_text("3 2\n0 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = Graph::read_text("4 2\n0 1\n2 3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Disconnected { components: 2 }));
    }

    #[test]
    fn ball_and_shell_on_path() {
        let g = path(7);
        assert_eq!(ball(&g, 3, 0).unwrap(), vec![3]);
        let mut b = ball(&g, 3, 2).unwrap();
        b.sort();
        assert_eq!(b, vec![1, 2, 3, 4, 5]);
        let mut s = shell(&g, 3, ShellSpec::new(1, 0).unwrap()).unwrap();
        s.sort();
        assert_eq!(s, vec![2, 4]);
        assert!(ShellSpec::new(0, 1).is_err());
    }

    #[test]
    fn profile_pads_to_requested_radius() {
        let g = path(3);
        let p = BallProfile::compute(&g, 0, Some(5)).unwrap();
        assert_eq!(p.sizes, vec![1, 2, 3, 3, 3, 3]);
        let p = BallProfile::compute(&g, 1, None).unwrap();
        assert_eq!(p.sizes, vec![1, 3]);
    }

    #[test]
    fn packing_on_path_of_nine() {
        let g = path(9);
        assert_eq!(pack_independent_balls(&g, 1).unwrap(), vec![0, 3, 6]);
        assert_eq!(pack_independent_balls(&g, 8).unwrap(), vec![0]);
        assert!(pack_independent_balls(&g, 0).is_err());
    }

    #[test]
    fn torus_shape_arithmetic() {
        let t = TorusShape { dim: 2, side: 4 };
        // node (2,2) = 10
        assert_eq!(t.distance(0, 10), 4);
        assert_eq!(t.distance(0, 3), 1);
        assert_eq!(t.translate(15, 5), 0);
        let mut c = [0; 2];
        t.coords(7, &mut c);
        assert_eq!(c, [1, 3]);
    }
}
