//! Exact enumeration of random-cluster and Potts measures on small graphs.
//!
//! Random-cluster weights are `(p/(1-p))^|w| q^k(w)` with `k` the free or
//! wired cluster count, accumulated in log space against a fixed upper
//! bound so that no weight overflows. Potts states are enumerated as base-q
//! counters; colors are indices and only the simplex scalar product is ever
//! evaluated.

mod params;

pub use params::{
    beta_from_p, couple_params, dot, p_from_beta, Coupling, PottsBoundary, PottsParams, RcBoundary, RcParams,
};
pub(crate) use params::integer_q;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::union_find::UnionFind;

/// Limits on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationCaps {
    pub max_edges: u32,
    pub max_spin_states: u64,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        EnumerationCaps {
            max_edges: 24,
            max_spin_states: 1 << 20,
        }
    }
}

/// Open/closed state of every edge of a host graph, indexed like its edge list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeConfiguration {
    open: Vec<bool>,
}

impl EdgeConfiguration {
    pub fn empty(edge_count: usize) -> Self {
        EdgeConfiguration { open: vec![false; edge_count] }
    }

    pub fn full(edge_count: usize) -> Self {
        EdgeConfiguration { open: vec![true; edge_count] }
    }

    pub fn from_bools(open: Vec<bool>) -> Self {
        EdgeConfiguration { open }
    }

    /// Bit `e` of `mask` is edge `e`.
    pub fn from_mask(mask: u64, edge_count: usize) -> Self {
        EdgeConfiguration {
            open: (0..edge_count).map(|e| mask >> e & 1 == 1).collect(),
        }
    }

    pub fn to_mask(&self) -> Option<u64> {
        (self.open.len() <= 64).then(|| {
            self.open
                .iter()
                .enumerate()
                .fold(0u64, |m, (e, &o)| if o { m | 1 << e } else { m })
        })
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn is_open(&self, e: usize) -> bool {
        self.open[e]
    }

    pub fn set(&mut self, e: usize, open: bool) {
        self.open[e] = open;
    }

    /// |w|
    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.open
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    colors: Vec<u32>,
}

impl SpinConfiguration {
    pub fn new(colors: Vec<u32>, q: u32) -> Result<Self> {
        if let Some(&c) = colors.iter().find(|&&c| c >= q) {
            return Err(Error::InvalidArgument(format!("color {c} >= q = {q}")));
        }
        Ok(SpinConfiguration { colors })
    }

    pub fn uniform(n: usize, color: u32) -> Self {
        SpinConfiguration { colors: vec![color; n] }
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn colors_mut(&mut self) -> &mut [u32] {
        &mut self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

/// How clusters touching the boundary are counted.
#[derive(Debug, Clone, Copy)]
pub enum ClusterMode<'a> {
    Free,
    Wired(&'a [VertexId]),
}

/// Number of clusters of `omega`; in wired mode every cluster meeting the
/// boundary set is counted once in total.
pub fn cluster_count(g: &Graph, omega: &EdgeConfiguration, mode: ClusterMode<'_>) -> Result<usize> {
    check_config(g, omega)?;
    let mut uf = UnionFind::new(g.vertex_count());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if omega.is_open(e) {
            uf.union(u, v);
        }
    }
    if let ClusterMode::Wired(boundary) = mode {
        for &b in boundary {
            if b >= g.vertex_count() {
                return Err(Error::InvalidArgument(format!("boundary vertex {b} not in graph")));
            }
        }
        for w in boundary.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    Ok(uf.components())
}

fn check_config(g: &Graph, omega: &EdgeConfiguration) -> Result<()> {
    if omega.len() != g.edge_count() {
        return Err(Error::InvalidArgument(format!(
            "edge configuration has {} entries, graph has {} edges",
            omega.len(),
            g.edge_count()
        )));
    }
    Ok(())
}

/// Cluster structure of one enumerated configuration. In wired mode with a
/// nonempty boundary, vertex `ghost` (= |V|) is joined to every boundary vertex.
pub struct ConfigView<'a> {
    pub mask: u64,
    pub clusters: &'a mut UnionFind,
    pub ghost: Option<usize>,
}

impl ConfigView<'_> {
    pub fn connected(&mut self, x: VertexId, y: VertexId) -> bool {
        self.clusters.same(x, y)
    }

    /// Whether `x` is joined to the wired boundary (false in free mode).
    pub fn connected_to_boundary(&mut self, x: VertexId) -> bool {
        match self.ghost {
            Some(g) => self.clusters.same(x, g),
            None => false,
        }
    }
}

/// Exhaustive enumerator with configurable caps.
#[derive(Debug, Clone, Copy, Default)]
pub struct Enumerator {
    pub caps: EnumerationCaps,
}

impl Enumerator {
    pub fn new(caps: EnumerationCaps) -> Self {
        Enumerator { caps }
    }

    fn check_edges(&self, g: &Graph) -> Result<()> {
        if g.edge_count() as u64 > self.caps.max_edges.min(63) as u64 {
            return Err(Error::Capacity {
                what: "edge count",
                requested: g.edge_count() as u128,
                cap: self.caps.max_edges as u128,
            });
        }
        Ok(())
    }

    /// Calls `visit(view, weight)` for every edge configuration with its
    /// unnormalized weight and returns the normalization. The weights share
    /// an arbitrary common factor; only ratios to the returned total matter.
    pub fn for_each_rc<F>(&self, g: &Graph, params: &RcParams, mut visit: F) -> Result<f64>
    where
        F: FnMut(&mut ConfigView<'_>, f64),
    {
        params.validate()?;
        self.check_edges(g)?;
        let n = g.vertex_count();
        let m = g.edge_count();
        let wired = params.bc == RcBoundary::Wired && !g.boundary().is_empty();
        let ghost = wired.then_some(n);
        let mut uf = UnionFind::new(n + usize::from(wired));

        let build = |uf: &mut UnionFind, mask: u64| {
            uf.reset();
            if let Some(gh) = ghost {
                for &b in g.boundary() {
                    uf.union(gh, b);
                }
            }
            for (e, &(u, v)) in g.edges().iter().enumerate() {
                if mask >> e & 1 == 1 {
                    uf.union(u, v);
                }
            }
        };

        // Point masses at the endpoints of the p range.
        if params.p == 0.0 || params.p == 1.0 {
            let mask = if params.p == 0.0 { 0 } else { (1u64 << m) - 1 };
            build(&mut uf, mask);
            visit(&mut ConfigView { mask, clusters: &mut uf, ghost }, 1.0);
            return Ok(1.0);
        }

        let log_ratio = params.p.ln() - (-params.p).ln_1p();
        let log_q = params.q.ln();
        // Upper bound on every log weight, used as the common reference.
        let reference = (m as f64 * log_ratio).max(0.0) + (n as f64 * log_q).max(log_q);
        let mut total = 0.0;
        for mask in 0..(1u64 << m) {
            build(&mut uf, mask);
            let k = uf.components();
            let log_w = mask.count_ones() as f64 * log_ratio + k as f64 * log_q - reference;
            let w = log_w.exp();
            total += w;
            visit(&mut ConfigView { mask, clusters: &mut uf, ghost }, w);
        }
        Ok(total)
    }

    /// Probability of every edge configuration, indexed by bitmask.
    pub fn rc_distribution(&self, g: &Graph, params: &RcParams) -> Result<RcDistribution> {
        self.check_edges(g)?;
        let mut probs = vec![0.0; 1usize << g.edge_count()];
        let z = self.for_each_rc(g, params, |view, w| probs[view.mask as usize] = w)?;
        for p in &mut probs {
            *p /= z;
        }
        Ok(RcDistribution {
            edge_count: g.edge_count(),
            probs,
        })
    }

    /// `E[f]` under the random-cluster measure.
    pub fn rc_expectation<F>(&self, g: &Graph, params: &RcParams, mut f: F) -> Result<f64>
    where
        F: FnMut(&mut ConfigView<'_>) -> f64,
    {
        let mut acc = 0.0;
        let z = self.for_each_rc(g, params, |view, w| acc += w * f(view))?;
        Ok(acc / z)
    }

    pub fn rc_connection(&self, g: &Graph, params: &RcParams, x: VertexId, y: VertexId) -> Result<f64> {
        g.check_vertex(x)?;
        g.check_vertex(y)?;
        self.rc_expectation(g, params, |view| f64::from(u8::from(view.connected(x, y))))
    }

    /// All-pairs connection probabilities as a row-major |V| x |V| matrix.
    pub fn rc_connection_matrix(&self, g: &Graph, params: &RcParams) -> Result<Vec<f64>> {
        let n = g.vertex_count();
        let mut acc = vec![0.0; n * n];
        let mut roots = vec![0usize; n];
        let z = self.for_each_rc(g, params, |view, w| {
            for (v, r) in roots.iter_mut().enumerate() {
                *r = view.clusters.find(v);
            }
            for x in 0..n {
                for y in 0..n {
                    if roots[x] == roots[y] {
                        acc[x * n + y] += w;
                    }
                }
            }
        })?;
        acc.iter_mut().for_each(|a| *a /= z);
        Ok(acc)
    }

    /// Probability that `x` is joined to at least one vertex of `targets`.
    pub fn rc_connection_to_set(&self, g: &Graph, params: &RcParams, x: VertexId, targets: &[VertexId]) -> Result<f64> {
        g.check_vertex(x)?;
        for &t in targets {
            g.check_vertex(t)?;
        }
        self.rc_expectation(g, params, |view| {
            let hit = targets.iter().any(|&t| view.connected(x, t));
            f64::from(u8::from(hit))
        })
    }

    fn check_spins(&self, g: &Graph, q: u32) -> Result<u64> {
        let states = (q as u128).checked_pow(g.vertex_count() as u32).unwrap_or(u128::MAX);
        if states > self.caps.max_spin_states as u128 {
            return Err(Error::Capacity {
                what: "spin states",
                requested: states,
                cap: self.caps.max_spin_states as u128,
            });
        }
        Ok(states as u64)
    }

    /// Calls `visit(colors, weight)` for every spin configuration and returns
    /// the normalization.
    pub fn for_each_potts<F>(&self, g: &Graph, params: &PottsParams, mut visit: F) -> Result<f64>
    where
        F: FnMut(&[u32], f64),
    {
        params.validate()?;
        let states = self.check_spins(g, params.q)?;
        let n = g.vertex_count();
        let field = match params.bc {
            PottsBoundary::Free => None,
            PottsBoundary::Monochromatic(b) => Some(b),
        };
        let bonds = g.edge_count() + field.map_or(0, |_| g.exterior().len());
        let reference = params.beta * bonds as f64;
        let mut colors = vec![0u32; n];
        let mut total = 0.0;
        for _ in 0..states {
            let h = energy_unchecked(g, &colors, params.q, field);
            let w = (-params.beta * h - reference).exp();
            total += w;
            visit(&colors, w);
            for c in colors.iter_mut() {
                *c += 1;
                if *c < params.q {
                    break;
                }
                *c = 0;
            }
        }
        Ok(total)
    }

    pub fn potts_expectation(&self, g: &Graph, params: &PottsParams, observable: PottsObservable) -> Result<f64> {
        let q = params.q;
        match observable {
            PottsObservable::TwoPoint(x, y) => {
                g.check_vertex(x)?;
                g.check_vertex(y)?;
                let mut acc = 0.0;
                let z = self.for_each_potts(g, params, |s, w| acc += w * dot(s[x], s[y], q))?;
                Ok(acc / z)
            }
            PottsObservable::Magnetization(x) => {
                g.check_vertex(x)?;
                let PottsBoundary::Monochromatic(b) = params.bc else {
                    return Err(Error::InvalidArgument(
                        "magnetization needs a monochromatic boundary condition".into(),
                    ));
                };
                let mut acc = 0.0;
                let z = self.for_each_potts(g, params, |s, w| acc += w * dot(s[x], b, q))?;
                Ok(acc / z)
            }
        }
    }

    /// All-pairs `<s_x . s_y>` as a row-major |V| x |V| matrix.
    pub fn potts_two_point_matrix(&self, g: &Graph, params: &PottsParams) -> Result<Vec<f64>> {
        let n = g.vertex_count();
        let q = params.q;
        // <s_x.s_y> = (q P[s_x = s_y] - 1) / (q - 1)
        let mut same = vec![0.0; n * n];
        let z = self.for_each_potts(g, params, |s, w| {
            for x in 0..n {
                let row = &mut same[x * n..(x + 1) * n];
                for (y, acc) in row.iter_mut().enumerate() {
                    if s[x] == s[y] {
                        *acc += w;
                    }
                }
            }
        })?;
        let qf = q as f64;
        Ok(same.into_iter().map(|a| (qf * a / z - 1.0) / (qf - 1.0)).collect())
    }
}

/// Probability table over all edge configurations.
#[derive(Debug, Clone)]
pub struct RcDistribution {
    pub edge_count: usize,
    /// Indexed by configuration bitmask.
    pub probs: Vec<f64>,
}

impl RcDistribution {
    pub fn prob(&self, omega: &EdgeConfiguration) -> f64 {
        omega.to_mask().map_or(0.0, |m| self.probs[m as usize])
    }

    /// P[edge e open]
    pub fn edge_marginal(&self, e: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(m, _)| m >> e & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    /// Cov(1[e open], 1[f open])
    pub fn edge_covariance(&self, e: usize, f: usize) -> f64 {
        let both: f64 = self
            .probs
            .iter()
            .enumerate()
            .filter(|(m, _)| m >> e & 1 == 1 && m >> f & 1 == 1)
            .map(|(_, p)| p)
            .sum();
        both - self.edge_marginal(e) * self.edge_marginal(f)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PottsObservable {
    TwoPoint(VertexId, VertexId),
    Magnetization(VertexId),
}

/// H = -sum over edges of s_x.s_y - sum over exterior edges of s_x.b, the
/// second sum only under a monochromatic boundary condition.
pub fn potts_energy(g: &Graph, sigma: &SpinConfiguration, params: &PottsParams) -> Result<f64> {
    params.validate()?;
    if sigma.len() != g.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "spin configuration has {} entries, graph has {} vertices",
            sigma.len(),
            g.vertex_count()
        )));
    }
    if let Some(&c) = sigma.colors().iter().find(|&&c| c >= params.q) {
        return Err(Error::InvalidArgument(format!("color {c} >= q = {}", params.q)));
    }
    let field = match params.bc {
        PottsBoundary::Free => None,
        PottsBoundary::Monochromatic(b) => Some(b),
    };
    Ok(energy_unchecked(g, sigma.colors(), params.q, field))
}

fn energy_unchecked(g: &Graph, s: &[u32], q: u32, field: Option<u32>) -> f64 {
    let mut h = 0.0;
    for &(u, v) in g.edges() {
        h -= dot(s[u], s[v], q);
    }
    if let Some(b) = field {
        for &x in g.exterior() {
            h -= dot(s[x], b, q);
        }
    }
    h
}

pub fn rc_distribution(g: &Graph, params: &RcParams) -> Result<RcDistribution> {
    Enumerator::default().rc_distribution(g, params)
}

pub fn rc_connection(g: &Graph, params: &RcParams, x: VertexId, y: VertexId) -> Result<f64> {
    Enumerator::default().rc_connection(g, params, x, y)
}

pub fn potts_expectation(g: &Graph, params: &PottsParams, observable: PottsObservable) -> Result<f64> {
    Enumerator::default().potts_expectation(g, params, observable)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> Graph {
        Graph::new(2, [(0, 1)]).unwrap()
    }

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn cluster_count_examples() {
        let lat = crate::lattice::Lattice::torus(&[4, 4]).unwrap();
        let g = lat.graph();
        let empty = EdgeConfiguration::empty(g.edge_count());
        assert_eq!(cluster_count(g, &empty, ClusterMode::Free).unwrap(), 16);
        let full = EdgeConfiguration::full(g.edge_count());
        assert_eq!(cluster_count(g, &full, ClusterMode::Free).unwrap(), 1);

        let p = path3();
        let none = EdgeConfiguration::empty(2);
        assert_eq!(cluster_count(&p, &none, ClusterMode::Wired(&[0, 2])).unwrap(), 2);
        assert!(cluster_count(&p, &none, ClusterMode::Wired(&[7])).is_err());
        assert!(cluster_count(&p, &EdgeConfiguration::empty(3), ClusterMode::Free).is_err());
    }

    #[test]
    fn single_edge_ising_third() {
        let params = RcParams::free(0.5, 2.0).unwrap();
        let dist = rc_distribution(&single_edge(), &params).unwrap();
        assert!((dist.probs[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((rc_connection(&single_edge(), &params, 0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn q_one_is_bernoulli() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let p = 0.3;
        let dist = rc_distribution(&g, &RcParams::free(p, 1.0).unwrap()).unwrap();
        for (mask, &prob) in dist.probs.iter().enumerate() {
            let k = (mask as u64).count_ones() as i32;
            let want = p.powi(k) * (1.0 - p).powi(5 - k);
            assert!((prob - want).abs() < 1e-14);
        }
        let c = rc_connection(&single_edge(), &RcParams::free(0.37, 1.0).unwrap(), 0, 1).unwrap();
        assert!((c - 0.37).abs() < 1e-14);
    }

    #[test]
    fn point_masses() {
        let g = path3();
        let d0 = rc_distribution(&g, &RcParams::free(0.0, 2.5).unwrap()).unwrap();
        assert_eq!(d0.probs, vec![1.0, 0.0, 0.0, 0.0]);
        let d1 = rc_distribution(&g, &RcParams::free(1.0, 2.5).unwrap()).unwrap();
        assert_eq!(d1.probs[3], 1.0);
    }

    #[test]
    fn wired_boundary_pair_is_connected() {
        let g = path3().with_boundary(&[0, 2]).unwrap();
        let params = RcParams::new(0.2, 2.0, RcBoundary::Wired).unwrap();
        assert!((rc_connection(&g, &params, 0, 2).unwrap() - 1.0).abs() < 1e-15);
        // Free mode ignores the boundary.
        let free = RcParams::free(0.2, 2.0).unwrap();
        assert!(rc_connection(&g, &free, 0, 2).unwrap() < 0.1);
    }

    #[test]
    fn capacity_error() {
        let lat = crate::lattice::Lattice::torus(&[4, 4]).unwrap();
        let err = rc_distribution(lat.graph(), &RcParams::free(0.5, 2.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Capacity { cap: 24, .. }));
        let err = potts_expectation(lat.graph(), &PottsParams::free(0.5, 3).unwrap(), PottsObservable::TwoPoint(0, 1))
            .unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn energy_examples() {
        let lat = crate::lattice::Lattice::torus(&[3, 3]).unwrap();
        let g = lat.graph();
        let params = PottsParams::free(1.0, 3).unwrap();
        let all = SpinConfiguration::uniform(9, 2);
        assert_eq!(potts_energy(g, &all, &params).unwrap(), -(g.edge_count() as f64));

        let e = single_edge();
        let s = SpinConfiguration::new(vec![0, 1], 2).unwrap();
        assert_eq!(potts_energy(&e, &s, &PottsParams::free(1.0, 2).unwrap()).unwrap(), 1.0);

        let lone = Graph::new(1, []).unwrap().with_exterior(vec![0, 0]).unwrap();
        let mono = PottsParams::new(0.7, 4, PottsBoundary::Monochromatic(3)).unwrap();
        let s = SpinConfiguration::uniform(1, 3);
        assert_eq!(potts_energy(&lone, &s, &mono).unwrap(), -2.0);

        let bad = SpinConfiguration::uniform(2, 5);
        assert!(potts_energy(&e, &bad, &params).is_err());
        assert!(SpinConfiguration::new(vec![0, 3], 3).is_err());
    }

    #[test]
    fn two_point_examples() {
        let e = single_edge();
        let beta = 0.5 * 2f64.ln();
        let tp = potts_expectation(&e, &PottsParams::free(beta, 2).unwrap(), PottsObservable::TwoPoint(0, 1)).unwrap();
        assert!((tp - 1.0 / 3.0).abs() < 1e-14);
        assert!((tp - beta.tanh()).abs() < 1e-14);

        let g = path3();
        let zero = potts_expectation(&g, &PottsParams::free(0.0, 3).unwrap(), PottsObservable::TwoPoint(0, 2)).unwrap();
        assert!(zero.abs() < 1e-15);
        let same = potts_expectation(&g, &PottsParams::free(0.8, 3).unwrap(), PottsObservable::TwoPoint(1, 1)).unwrap();
        assert!((same - 1.0).abs() < 1e-14);

        let err = potts_expectation(&g, &PottsParams::free(0.8, 3).unwrap(), PottsObservable::Magnetization(0));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn two_point_matrix_matches_single_entries() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let params = PottsParams::free(0.6, 3).unwrap();
        let m = Enumerator::default().potts_two_point_matrix(&g, &params).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let single = potts_expectation(&g, &params, PottsObservable::TwoPoint(x, y)).unwrap();
                assert!((m[x * 4 + y] - single).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn magnetization_matches_ghost_connection() {
        // Monochromatic Potts on G equals wired random-cluster on G plus a
        // ghost vertex joined by the exterior edges.
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap().with_exterior(vec![0, 2, 2]).unwrap();
        let params = PottsParams::new(0.4, 3, PottsBoundary::Monochromatic(1)).unwrap();
        let aug = Graph::new(4, [(0, 1), (1, 2), (0, 3), (2, 3)])
            .unwrap()
            .with_boundary(&[3])
            .unwrap();
        // The two exterior edges at vertex 2 become one edge with p' = 1-(1-p)^2.
        // Check instead on a graph where every boundary vertex has one exterior edge.
        let g1 = Graph::new(3, [(0, 1), (1, 2)]).unwrap().with_exterior(vec![0, 2]).unwrap();
        let rc = RcParams::new(params.coupled_p(), 3.0, RcBoundary::Wired).unwrap();
        for x in 0..3 {
            let m = potts_expectation(&g1, &params, PottsObservable::Magnetization(x)).unwrap();
            let c = rc_connection(&aug, &rc, x, 3).unwrap();
            assert!((m - c).abs() < 1e-13, "x={x}: {m} vs {c}");
        }
        // Sanity: the multi-edge variant carries more field, so stronger magnetization at 2.
        let m_multi = potts_expectation(&g, &params, PottsObservable::Magnetization(2)).unwrap();
        let m_single = potts_expectation(&g1, &params, PottsObservable::Magnetization(2)).unwrap();
        assert!(m_multi > m_single);
    }
}
