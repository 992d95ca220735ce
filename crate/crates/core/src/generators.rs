//! Fixed-growth underlying graphs: wrap and open lattices, Sierpinski gasket
//! graphs, and road networks imported from DIMACS shortest-path files.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, TorusShape};

/// Default cap on generated node counts.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 24;

/// `dim`-dimensional lattice with `side` nodes per axis, ids in row-major
/// order (last axis fastest). With `wrap` every axis is a cycle.
pub fn gen_lattice(dim: usize, side: usize, wrap: bool, budget: usize) -> Result<Graph> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!(
            "lattice dim must be 1..=3, got {dim}"
        )));
    }
    if side < 2 {
        return Err(Error::InvalidParameter(format!(
            "lattice side must be >= 2, got {side}"
        )));
    }
    let requested = (side as u128).pow(dim as u32);
    if requested > budget as u128 {
        return Err(Error::BudgetExceeded { requested, budget });
    }
    let shape = TorusShape { dim, side };
    let n = requested as usize;
    let mut edges = Vec::with_capacity(n * dim);
    let mut coords = vec![0; dim];
    for id in 0..n {
        shape.coords(id, &mut coords);
        let mut stride = 1;
        for axis in (0..dim).rev() {
            let x = coords[axis];
            if x + 1 < side {
                edges.push((id as NodeId, (id + stride) as NodeId));
            } else if wrap && side > 2 {
                // wrap edge back to x = 0; for side 2 it would duplicate x=0 -> x=1
                edges.push(((id + stride - side * stride) as NodeId, id as NodeId));
            }
            stride *= side;
        }
    }
    let graph = Graph::from_edges(n, edges)?;
    Ok(if wrap { graph.with_torus(shape) } else { graph })
}

/// Node count of the level-`level` gasket: 3, 6, 15, 42, ...
pub fn sierpinski_node_count(level: u32) -> u128 {
    3 * (3u128.pow(level.saturating_sub(1)) + 1) / 2
}

/// Sierpinski gasket graph. Level 1 is a triangle; level `L+1` glues three
/// copies of level `L` pairwise at corners. Copies are numbered in order and
/// a glued corner keeps the id it already had in the earlier copy.
pub fn gen_sierpinski(level: u32, budget: usize) -> Result<Graph> {
    if level == 0 {
        return Err(Error::InvalidParameter("gasket level must be >= 1".into()));
    }
    let requested = sierpinski_node_count(level);
    if requested > budget as u128 {
        return Err(Error::BudgetExceeded { requested, budget });
    }
    let mut n = 3usize;
    let mut edges: Vec<(NodeId, NodeId)> = vec![(0, 1), (1, 2), (0, 2)];
    // top, bottom-left, bottom-right
    let mut corners: [NodeId; 3] = [0, 1, 2];
    for _ in 1..level {
        let [top, left, right] = corners.map(|c| c as usize);
        let mut maps: [Vec<NodeId>; 3] = Default::default();
        maps[0] = (0..n as NodeId).collect();
        let mut next = n as NodeId;
        let mut fresh = |glued: &[(usize, NodeId)]| -> Vec<NodeId> {
            (0..n)
                .map(|v| match glued.iter().find(|(c, _)| *c == v) {
                    Some(&(_, id)) => id,
                    None => {
                        next += 1;
                        next - 1
                    }
                })
                .collect()
        };
        // copy 1 sits bottom-left: its top is copy 0's bottom-left
        maps[1] = fresh(&[(top, maps[0][left])]);
        // copy 2 sits bottom-right: top = copy 0's bottom-right,
        // bottom-left = copy 1's bottom-right
        let glue2 = [(top, maps[0][right]), (left, maps[1][right])];
        maps[2] = fresh(&glue2);
        let mut next_edges = Vec::with_capacity(edges.len() * 3);
        for map in &maps {
            next_edges.extend(
                edges
                    .iter()
                    .map(|&(u, v)| (map[u as usize], map[v as usize])),
            );
        }
        corners = [maps[0][top], maps[1][left], maps[2][right]];
        n = 3 * n - 3;
        edges = next_edges;
    }
    Graph::from_edges(n, edges)
}

/// Largest connected component of a DIMACS road network as a hop graph.
#[derive(Debug, Clone)]
pub struct ImportedGraph {
    pub graph: Graph,
    /// Original 1-based DIMACS id of each new node id.
    pub original_ids: Vec<u64>,
    pub dropped_nodes: usize,
    pub warnings: Vec<String>,
}

impl ImportedGraph {
    /// CSV `new_id,original_id`.
    pub fn write_renumbering<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "new_id,original_id")?;
        for (new, orig) in self.original_ids.iter().enumerate() {
            writeln!(out, "{new},{orig}")?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn import_dimacs(path: impl AsRef<Path>) -> Result<ImportedGraph> {
    read_dimacs(BufReader::new(File::open(path)?))
}

/// Parses `p sp n m` / `a u v w` lines. Weights are discarded, arc pairs are
/// merged into undirected edges, and only the largest component is kept
/// (ties go to the component holding the smallest id).
pub fn read_dimacs<R: BufRead>(reader: R) -> Result<ImportedGraph> {
    let mut n: Option<usize> = None;
    let mut edges = BTreeSet::new();
    let mut warnings = Vec::new();
    let mut self_loops = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let mut fields = line.split_whitespace();
        match fields.next() {
            None | Some("c") => {}
            Some("p") => {
                if n.is_some() {
                    return Err(Error::parse(lineno, "duplicate problem line"));
                }
                let f: Vec<&str> = fields.collect();
                if f.len() != 3 || f[0] != "sp" {
                    return Err(Error::parse(lineno, "expected `p sp <n> <m>`"));
                }
                let count = f[1]
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad node count {:?}", f[1])))?;
                f[2].parse::<u64>()
                    .map_err(|_| Error::parse(lineno, format!("bad arc count {:?}", f[2])))?;
                n = Some(count);
            }
            Some("a") => {
                let Some(n) = n else {
                    return Err(Error::parse(lineno, "arc before problem line"));
                };
                let f: Vec<&str> = fields.collect();
                if f.len() != 3 {
                    return Err(Error::parse(lineno, "expected `a <u> <v> <w>`"));
                }
                let mut ids = [0 as NodeId; 2];
                for (slot, s) in ids.iter_mut().zip(&f[..2]) {
                    let id: u64 = s
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad node id {s:?}")))?;
                    if id == 0 || id as usize > n {
                        return Err(Error::parse(
                            lineno,
                            format!("node id {id} out of range 1..={n}"),
                        ));
                    }
                    *slot = (id - 1) as NodeId;
                }
                f[2].parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("bad weight {:?}", f[2])))?;
                let [u, v] = ids;
                if u == v {
                    self_loops += 1;
                    continue;
                }
                edges.insert((u.min(v), u.max(v)));
            }
            Some(other) => {
                return Err(Error::parse(lineno, format!("unknown line type {other:?}")));
            }
        }
    }
    let n = n.ok_or(Error::EmptyGraph)?;
    if n == 0 || edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if self_loops > 0 {
        warnings.push(format!("ignored {self_loops} self-loop arcs"));
    }
    let full = Graph::from_edges_unchecked_connectivity(n, edges.iter().copied())?;
    let (label, count) = full.components();
    let mut sizes = vec![0usize; count];
    for &l in &label {
        sizes[l as usize] += 1;
    }
    // max_by_key returns the last maximum; labels follow smallest member
    let keep = (0..count).rev().max_by_key(|&c| sizes[c]).unwrap() as u32;
    let mut new_id = vec![NodeId::MAX; n];
    let mut original_ids = Vec::new();
    for (old, &l) in label.iter().enumerate() {
        if l == keep {
            new_id[old] = original_ids.len() as NodeId;
            original_ids.push(old as u64 + 1);
        }
    }
    let dropped_nodes = n - original_ids.len();
    if dropped_nodes > 0 {
        warnings.push(format!(
            "kept largest component of {} nodes; dropped {dropped_nodes} nodes in {} other components",
            original_ids.len(),
            count - 1
        ));
    }
    let kept_edges = edges
        .iter()
        .filter(|&&(u, _)| label[u as usize] == keep)
        .map(|&(u, v)| (new_id[u as usize], new_id[v as usize]));
    let graph = Graph::from_edges(original_ids.len(), kept_edges)?;
    Ok(ImportedGraph {
        graph,
        original_ids,
        dropped_nodes,
        warnings,
    })
}
