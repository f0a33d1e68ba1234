//! Finite simple graphs with an optional vertex boundary.
//!
//! Every measure in the crate is defined on a [`Graph`]: a vertex count, an
//! ordered edge list and, for subgraphs cut out of a larger ambient graph,
//! the set of boundary vertices together with the exterior edges that leave
//! the subgraph. Exterior edges are stored as the inside endpoint only, one
//! entry per edge, which is all the monochromatic Potts Hamiltonian needs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId)>,
    /// `adjacency[v]` lists `(neighbor, edge index)` in edge order.
    adjacency: Vec<Vec<(VertexId, usize)>>,
    boundary: Vec<VertexId>,
    exterior: Vec<VertexId>,
}

impl Graph {
    /// Builds a simple graph. Self-loops are dropped and repeated pairs are
    /// collapsed to their first occurrence, so edge order is deterministic.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(Error::Index { index: w, size: vertex_count });
                }
            }
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                kept.push((u, v));
            }
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (i, &(u, v)) in kept.iter().enumerate() {
            adjacency[u].push((v, i));
            adjacency[v].push((u, i));
        }
        Ok(Graph {
            vertex_count,
            edges: kept,
            adjacency,
            boundary: Vec::new(),
            exterior: Vec::new(),
        })
    }

    /// Attaches exterior edges (one inside endpoint per edge). The boundary is
    /// the set of distinct endpoints.
    pub fn with_exterior(mut self, exterior: Vec<VertexId>) -> Result<Self> {
        for &v in &exterior {
            if v >= self.vertex_count {
                return Err(Error::Index { index: v, size: self.vertex_count });
            }
        }
        let set: BTreeSet<_> = exterior.iter().copied().collect();
        self.boundary = set.into_iter().collect();
        self.exterior = exterior;
        Ok(self)
    }

    /// Declares a boundary set without exterior-edge multiplicities (one
    /// exterior edge per boundary vertex).
    pub fn with_boundary(self, boundary: &[VertexId]) -> Result<Self> {
        let set: BTreeSet<_> = boundary.iter().copied().collect();
        self.with_exterior(set.into_iter().collect())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn incident(&self, v: VertexId) -> &[(VertexId, usize)] {
        &self.adjacency[v]
    }

    pub fn neighbors(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        Ok(self.adjacency[v].iter().map(|&(w, _)| w).collect())
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    /// Sorted boundary vertices (empty for graphs without an ambient graph).
    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    /// Inside endpoints of the exterior edges, one entry per edge.
    pub fn exterior(&self) -> &[VertexId] {
        &self.exterior
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.vertex_count {
            Ok(())
        } else {
            Err(Error::Index { index: v, size: self.vertex_count })
        }
    }

    /// Graph distances from `source` (usize::MAX when unreachable).
    pub fn distances_from(&self, source: VertexId) -> Result<Vec<usize>> {
        self.check_vertex(source)?;
        let mut dist = vec![usize::MAX; self.vertex_count];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count == 0
            || self
                .distances_from(0)
                .map(|d| d.iter().all(|&x| x != usize::MAX))
                .unwrap_or(false)
    }

    /// Parses the plain-text corpus format: one edge `u v` per line, `#`
    /// comments, and an optional `vertices N` line for trailing isolated
    /// vertices.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::InvalidData(format!("line {}: cannot parse `{}`", lineno + 1, raw.trim()));
            match fields.as_slice() {
                ["vertices", n] => declared = Some(n.parse::<usize>().map_err(|_| bad())?),
                [u, v] => {
                    let u = u.parse::<usize>().map_err(|_| bad())?;
                    let v = v.parse::<usize>().map_err(|_| bad())?;
                    edges.push((u, v));
                }
                _ => return Err(bad()),
            }
        }
        let implied = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let n = match declared {
            Some(n) if n < implied => {
                return Err(Error::InvalidData(format!(
                    "declared {n} vertices but edges reference vertex {}",
                    implied - 1
                )))
            }
            Some(n) => n,
            None => implied,
        };
        Graph::new(n, edges)
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse_edge_list(&text)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vertices {}", self.vertex_count);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Vertex boundary of `sub` inside `g`: members of `sub` with a neighbor outside it.
pub fn boundary_of(g: &Graph, sub: &[VertexId]) -> Result<Vec<VertexId>> {
    let mut inside = vec![false; g.vertex_count()];
    for &v in sub {
        g.check_vertex(v)?;
        inside[v] = true;
    }
    let mut out: Vec<VertexId> = sub
        .iter()
        .copied()
        .filter(|&v| g.incident(v).iter().any(|&(w, _)| !inside[w]))
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
