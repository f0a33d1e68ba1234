//! Hypercubic lattices with per-axis periodic or open boundaries.
//!
//! Covers tori `(Z/L_1) x ... x (Z/L_d)`, thick tori with a few short
//! periodic axes, and slabs whose short axes are open. Vertices are
//! linearized row-major over the axes in declaration order (the first axis
//! varies slowest). Each edge is stored oriented so that its second endpoint
//! is the first endpoint plus one unit step along the recorded axis, which
//! is what wrapping detection relies on.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{boundary_of, Graph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wrap {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxisSpec {
    pub length: usize,
    pub wrap: Wrap,
}

impl AxisSpec {
    pub fn periodic(length: usize) -> Self {
        AxisSpec { length, wrap: Wrap::Periodic }
    }

    pub fn open(length: usize) -> Self {
        AxisSpec { length, wrap: Wrap::Open }
    }
}

#[derive(Debug, Clone)]
pub struct Lattice {
    axes: Vec<AxisSpec>,
    strides: Vec<usize>,
    graph: Graph,
    edge_axis: Vec<u8>,
}

impl Lattice {
    pub fn new(axes: &[AxisSpec]) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidSpec("at least one axis is required".into()));
        }
        if axes.len() > 32 {
            return Err(Error::InvalidSpec("at most 32 axes are supported".into()));
        }
        if let Some(a) = axes.iter().position(|a| a.length == 0) {
            return Err(Error::InvalidSpec(format!("axis {a} has length 0")));
        }
        let n = axes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.length))
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| Error::InvalidSpec("too many vertices".into()))?;
        let d = axes.len();
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].length;
        }

        let mut edges = Vec::new();
        let mut edge_axis = Vec::new();
        let mut coords = vec![0usize; d];
        for v in 0..n {
            for (a, axis) in axes.iter().enumerate() {
                let c = coords[a];
                let fwd = if c + 1 < axis.length {
                    Some(v + strides[a])
                } else if axis.wrap == Wrap::Periodic && axis.length >= 3 {
                    Some(v - c * strides[a])
                } else {
                    // length 1 would be a self-loop; for length 2 the wrap edge
                    // coincides with the forward edge from coordinate 0.
                    None
                };
                if let Some(w) = fwd {
                    edges.push((v, w));
                    edge_axis.push(a as u8);
                }
            }
            for a in (0..d).rev() {
                coords[a] += 1;
                if coords[a] < axes[a].length {
                    break;
                }
                coords[a] = 0;
            }
        }
        let graph = Graph::new(n, edges)?;
        debug_assert_eq!(graph.edge_count(), edge_axis.len());
        Ok(Lattice {
            axes: axes.to_vec(),
            strides,
            graph,
            edge_axis,
        })
    }

    /// Fully periodic lattice with the given side lengths.
    pub fn torus(sides: &[usize]) -> Result<Self> {
        let axes: Vec<_> = sides.iter().map(|&l| AxisSpec::periodic(l)).collect();
        Self::new(&axes)
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn sides(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.length).collect()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        self.graph.edges()
    }

    /// Axis along which edge `e` points (from its first to its second endpoint).
    pub fn edge_axis(&self, e: usize) -> usize {
        self.edge_axis[e] as usize
    }

    pub fn is_fully_periodic(&self) -> bool {
        self.axes.iter().all(|a| a.wrap == Wrap::Periodic)
    }

    pub fn coords(&self, v: VertexId) -> Vec<usize> {
        self.axes
            .iter()
            .zip(&self.strides)
            .map(|(a, &s)| (v / s) % a.length)
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> Result<VertexId> {
        if coords.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                coords.len()
            )));
        }
        let mut v = 0;
        for ((&c, a), &s) in coords.iter().zip(&self.axes).zip(&self.strides) {
            if c >= a.length {
                return Err(Error::Index { index: c, size: a.length });
            }
            v += c * s;
        }
        Ok(v)
    }

    /// Vertex reached from `v` by the displacement `delta`, taken modulo the
    /// side on every axis (also on open axes, where it is only meaningful for
    /// in-range results).
    pub fn translate(&self, v: VertexId, delta: &[i64]) -> VertexId {
        let c = self.coords(v);
        let mut w = 0;
        for (a, axis) in self.axes.iter().enumerate() {
            let l = axis.length as i64;
            w += ((c[a] as i64 + delta[a]).rem_euclid(l)) as usize * self.strides[a];
        }
        w
    }

    /// Displacement `y - x` reduced into `[0, L_a)` on every axis.
    pub fn displacement(&self, x: VertexId, y: VertexId) -> Vec<usize> {
        let cx = self.coords(x);
        let cy = self.coords(y);
        self.axes
            .iter()
            .enumerate()
            .map(|(a, axis)| (cy[a] + axis.length - cx[a]) % axis.length)
            .collect()
    }

    /// Linear index of the displacement `y - x` (as a vertex id of the same lattice).
    pub fn displacement_index(&self, x: VertexId, y: VertexId) -> usize {
        let mut idx = 0;
        for (a, axis) in self.axes.iter().enumerate() {
            let s = self.strides[a];
            let cx = (x / s) % axis.length;
            let cy = (y / s) % axis.length;
            idx += ((cy + axis.length - cx) % axis.length) * s;
        }
        idx
    }

    pub fn neighbors(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.graph.neighbors(v)
    }

    pub fn ball(&self, center: VertexId, radius: usize) -> Result<BallSubgraph> {
        BallSubgraph::new(&self.graph, center, radius)
    }

    pub fn boundary_vertices(&self, sub: &[VertexId]) -> Result<Vec<VertexId>> {
        boundary_of(&self.graph, sub)
    }
}

impl fmt::Display for Lattice {
    /// Compact form such as `16x16x4o` (`o` marks open axes).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.axes.iter().enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "{}", a.length)?;
            if a.wrap == Wrap::Open {
                write!(f, "o")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Lattice {
    type Err = Error;

    /// Inverse of the `Display` form: `16x16x4o`.
    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .trim()
            .split('x')
            .map(|tok| {
                let (num, wrap) = match tok.strip_suffix('o') {
                    Some(rest) => (rest, Wrap::Open),
                    None => (tok, Wrap::Periodic),
                };
                num.parse::<usize>()
                    .map(|length| AxisSpec { length, wrap })
                    .map_err(|_| Error::InvalidSpec(format!("bad axis `{tok}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Lattice::new(&axes)
    }
}

/// Ball of graph-distance radius `R` around a center, with its vertex
/// boundary relative to the ambient graph.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSubgraph {
    pub center: VertexId,
    pub radius: usize,
    /// Sorted ambient vertex ids.
    pub vertices: Vec<VertexId>,
    /// Induced edges, as ambient vertex pairs, in ambient edge order.
    pub edges: Vec<(VertexId, VertexId)>,
    pub boundary: Vec<VertexId>,
    /// Inside endpoint of every ambient edge leaving the ball.
    pub exterior: Vec<VertexId>,
}

impl BallSubgraph {
    pub fn new(ambient: &Graph, center: VertexId, radius: usize) -> Result<Self> {
        let dist = ambient.distances_from(center)?;
        let vertices: Vec<VertexId> = (0..ambient.vertex_count()).filter(|&v| dist[v] <= radius).collect();
        let inside: BTreeSet<VertexId> = vertices.iter().copied().collect();
        let edges = ambient
            .edges()
            .iter()
            .copied()
            .filter(|(u, v)| inside.contains(u) && inside.contains(v))
            .collect();
        let mut exterior = Vec::new();
        for &v in &vertices {
            for &(w, _) in ambient.incident(v) {
                if !inside.contains(&w) {
                    exterior.push(v);
                }
            }
        }
        let boundary = boundary_of(ambient, &vertices)?;
        Ok(BallSubgraph {
            center,
            radius,
            vertices,
            edges,
            boundary,
            exterior,
        })
    }

    /// Relabels the ball as a standalone [`Graph`] carrying its boundary and
    /// exterior edges. Local id `i` corresponds to ambient `self.vertices[i]`.
    pub fn to_graph(&self) -> Result<Graph> {
        let local = |v: VertexId| self.vertices.binary_search(&v).expect("ball vertex");
        let edges = self.edges.iter().map(|&(u, v)| (local(u), local(v)));
        Graph::new(self.vertices.len(), edges)?.with_exterior(self.exterior.iter().map(|&v| local(v)).collect())
    }

    pub fn local_id(&self, ambient: VertexId) -> Option<usize> {
        self.vertices.binary_search(&ambient).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let lat: Lattice = "6x4x3o".parse().unwrap();
        assert_eq!(lat.to_string(), "6x4x3o");
        assert_eq!(lat.axes()[2].wrap, Wrap::Open);
        assert!("6xx4".parse::<Lattice>().is_err());
        assert!("0x4".parse::<Lattice>().is_err());
    }

    #[test]
    fn torus_4x4_counts() {
        let lat = Lattice::torus(&[4, 4]).unwrap();
        assert_eq!(lat.vertex_count(), 16);
        assert_eq!(lat.edge_count(), 32);
        assert!((0..16).all(|v| lat.graph().degree(v) == 4));
    }

    #[test]
    fn open_path() {
        let lat = Lattice::new(&[AxisSpec::open(3)]).unwrap();
        assert_eq!(lat.vertex_count(), 3);
        assert_eq!(lat.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(lat.neighbors(0).unwrap(), vec![1]);
    }

    #[test]
    fn side_two_axis_collapses() {
        let mut axes = vec![AxisSpec::periodic(4); 3];
        axes.push(AxisSpec::periodic(2));
        let lat = Lattice::new(&axes).unwrap();
        assert_eq!(lat.vertex_count(), 128);
        assert_eq!(lat.edge_count(), 448);
        assert!((0..128).all(|v| lat.graph().degree(v) == 7));

        let ring = Lattice::torus(&[2]).unwrap();
        assert_eq!(ring.neighbors(0).unwrap(), vec![1]);
    }

    #[test]
    fn zero_length_axis_rejected() {
        assert!(matches!(
            Lattice::new(&[AxisSpec::periodic(3), AxisSpec::open(0)]),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(Lattice::new(&[]), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn neighbors_of_origin() {
        let lat = Lattice::torus(&[4, 4]).unwrap();
        let mut got = lat.neighbors(0).unwrap();
        got.sort_unstable();
        let mut want: Vec<_> = [[1, 0], [3, 0], [0, 1], [0, 3]]
            .iter()
            .map(|c| lat.index(c).unwrap())
            .collect();
        want.sort_unstable();
        assert_eq!(got, want);
        assert!(matches!(lat.neighbors(16), Err(Error::Index { .. })));
    }

    #[test]
    fn edges_point_along_their_axis() {
        let lat = Lattice::new(&[AxisSpec::periodic(5), AxisSpec::open(3), AxisSpec::periodic(4)]).unwrap();
        for (e, &(u, v)) in lat.edges().iter().enumerate() {
            let a = lat.edge_axis(e);
            let mut delta = vec![0i64; 3];
            delta[a] = 1;
            assert_eq!(lat.translate(u, &delta), v);
        }
    }

    #[test]
    fn balls_on_7x7() {
        let lat = Lattice::torus(&[7, 7]).unwrap();
        let c = lat.index(&[3, 3]).unwrap();
        let b0 = lat.ball(c, 0).unwrap();
        assert_eq!(b0.vertices, vec![c]);
        assert_eq!(b0.boundary, vec![c]);
        let b1 = lat.ball(c, 1).unwrap();
        assert_eq!(b1.vertices.len(), 5);
        let mut nb = lat.neighbors(c).unwrap();
        nb.sort_unstable();
        assert_eq!(b1.boundary, nb);
        assert_eq!(b1.edges.len(), 4);
        // Every boundary vertex of the radius-1 ball has 3 exterior edges.
        assert_eq!(b1.exterior.len(), 12);
        let g = b1.to_graph().unwrap();
        assert_eq!(g.boundary().len(), 4);
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn boundary_examples() {
        let t4 = Lattice::torus(&[4, 4]).unwrap();
        let all: Vec<_> = (0..16).collect();
        assert!(t4.boundary_vertices(&all).unwrap().is_empty());
        assert_eq!(t4.boundary_vertices(&[5]).unwrap(), vec![5]);

        let t7 = Lattice::torus(&[7, 7]).unwrap();
        let block: Vec<_> = (2..5)
            .flat_map(|x| (2..5).map(move |y| (x, y)))
            .map(|(x, y)| t7.index(&[x, y]).unwrap())
            .collect();
        let b = t7.boundary_vertices(&block).unwrap();
        assert_eq!(b.len(), 8);
        assert!(!b.contains(&t7.index(&[3, 3]).unwrap()));
    }

    #[test]
    fn displacement_roundtrip() {
        let lat = Lattice::torus(&[4, 6]).unwrap();
        for x in 0..24 {
            for y in 0..24 {
                let d = lat.displacement(x, y);
                let d64: Vec<i64> = d.iter().map(|&c| c as i64).collect();
                assert_eq!(lat.translate(x, &d64), y);
                assert_eq!(lat.displacement_index(x, y), lat.index(&d).unwrap());
            }
        }
    }
}
