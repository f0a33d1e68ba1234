use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{binned_stats, EstimatorResult};
use super::steps::{ChayesMachtaKernel, Ghost, HeatBathKernel, SwKernel};
use crate::error::{Error, Result};
use crate::exact::{dot, EdgeConfiguration, PottsBoundary, PottsParams, RcBoundary, RcParams, SpinConfiguration};
use crate::graph::{Graph, VertexId};
use crate::lattice::{Lattice, Wrap};
use crate::union_find::{UnionFind, WrappingUnionFind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    SwendsenWang,
    ChayesMachta,
    HeatBath,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::SwendsenWang => "swendsen_wang",
            Algorithm::ChayesMachta => "chayes_machta",
            Algorithm::HeatBath => "heat_bath",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub algorithm: Algorithm,
    pub sweeps: usize,
    #[serde(default)]
    pub burn_in: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub stride: usize,
    /// Stream index under the master seed; independent chains of one
    /// experiment differ only here.
    #[serde(default)]
    pub stream: u64,
}

fn one() -> usize {
    1
}

impl ChainConfig {
    pub fn new(algorithm: Algorithm, sweeps: usize, burn_in: usize, seed: u64) -> Self {
        ChainConfig {
            algorithm,
            sweeps,
            burn_in,
            seed,
            stride: 1,
            stream: 0,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidArgument("sweeps must be positive".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn measurements(&self) -> usize {
        self.sweeps.div_ceil(self.stride.max(1))
    }
}

/// Generator for stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// 1[x <-> y]
    Connect(VertexId, VertexId),
    /// s_x . s_y (the connection indicator for bond-only dynamics, equal in mean).
    TwoPointSpin(VertexId, VertexId),
    /// 1[some cluster winds around at least one of the listed axes]
    Wrapping(Vec<usize>),
    /// Spin magnetization along the boundary color, or the fraction of
    /// vertices joined to the wired boundary for bond-only dynamics.
    Magnetization,
    /// 1[0 <-> x and the cluster of 0 neither wraps nor reaches the boundary]
    TruncatedTwoPoint(VertexId),
    /// sum over clusters of |C|^2 / |V|^2, the translation average of P[x <-> y].
    MeanClusterFraction,
}

/// Model driven by a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    RandomCluster(RcParams),
    Potts(PottsParams),
}

/// A graph, optionally with the lattice geometry needed for wrapping.
pub trait Host {
    fn graph(&self) -> &Graph;
    fn geometry(&self) -> Option<&Lattice> {
        None
    }
}

impl Host for Graph {
    fn graph(&self) -> &Graph {
        self
    }
}

impl Host for Lattice {
    fn graph(&self) -> &Graph {
        Lattice::graph(self)
    }
    fn geometry(&self) -> Option<&Lattice> {
        Some(self)
    }
}

enum Kernel {
    Sw(SwKernel),
    Cm(ChayesMachtaKernel),
    Hb(HeatBathKernel),
}

/// A running Markov chain over bond (and, for Swendsen-Wang, spin) configurations.
pub struct Chain<'a> {
    graph: &'a Graph,
    geometry: Option<&'a Lattice>,
    rc: RcParams,
    q_int: Option<u32>,
    ghost: Ghost,
    kernel: Kernel,
    rng: ChaCha8Rng,
    bonds: Vec<bool>,
    ext_bonds: Vec<bool>,
    spins: Option<Vec<u32>>,
    uf: UnionFind,
    wuf: Option<WrappingUnionFind>,
}

impl<'a> Chain<'a> {
    pub fn new<H: Host + ?Sized>(host: &'a H, model: ModelParams, algorithm: Algorithm, rng: ChaCha8Rng) -> Result<Self> {
        let graph = host.graph();
        let n = graph.vertex_count();
        let (rc, q_int, ghost) = match model {
            ModelParams::RandomCluster(rc) => {
                rc.validate()?;
                (rc, rc.integer_q(), Ghost::for_rc(graph, rc.bc))
            }
            ModelParams::Potts(potts) => {
                potts.validate()?;
                let ghost = Ghost::for_potts(graph, potts.bc);
                if matches!(ghost, Ghost::Exterior(_)) && algorithm != Algorithm::SwendsenWang {
                    return Err(Error::UnsupportedAlgorithm(format!(
                        "{} does not support a monochromatic Potts boundary; use swendsen_wang",
                        algorithm.name()
                    )));
                }
                (potts.to_rc(), Some(potts.q), ghost)
            }
        };
        let kernel = match algorithm {
            Algorithm::SwendsenWang => {
                if q_int.is_none() {
                    return Err(Error::UnsupportedAlgorithm(format!(
                        "swendsen_wang needs an integer q >= 2, got {}",
                        rc.q
                    )));
                }
                Kernel::Sw(SwKernel::new(n))
            }
            Algorithm::ChayesMachta => {
                if rc.q < 1.0 {
                    return Err(Error::UnsupportedParameter(format!(
                        "chayes_machta needs q >= 1, got {}",
                        rc.q
                    )));
                }
                Kernel::Cm(ChayesMachtaKernel::new(n))
            }
            Algorithm::HeatBath => Kernel::Hb(HeatBathKernel::new(n)),
        };
        let spins = matches!(kernel, Kernel::Sw(_)).then(|| vec![0u32; n]);
        let ext_len = if matches!(ghost, Ghost::Exterior(_)) { graph.exterior().len() } else { 0 };
        Ok(Chain {
            graph,
            geometry: host.geometry(),
            rc,
            q_int,
            ghost,
            kernel,
            rng,
            bonds: vec![false; graph.edge_count()],
            ext_bonds: vec![false; ext_len],
            spins,
            uf: UnionFind::new(n + 1),
            wuf: None,
        })
    }

    /// One sweep: a full cluster update, or one heat-bath update per edge in edge order.
    pub fn sweep(&mut self) {
        let g = self.graph;
        match &mut self.kernel {
            Kernel::Sw(k) => {
                let spins = self.spins.as_mut().expect("spins present for swendsen_wang");
                k.step(
                    g,
                    spins,
                    &mut self.bonds,
                    &mut self.ext_bonds,
                    self.rc.p,
                    self.q_int.expect("integer q"),
                    self.ghost,
                    &mut self.rng,
                );
            }
            Kernel::Cm(k) => k.step(g, &mut self.bonds, &self.rc, self.ghost.present(), &mut self.rng),
            Kernel::Hb(k) => {
                for e in 0..g.edge_count() {
                    k.step(g, &mut self.bonds, &self.rc, self.ghost.present(), e, &mut self.rng);
                }
            }
        }
    }

    pub fn bonds(&self) -> EdgeConfiguration {
        EdgeConfiguration::from_bools(self.bonds.clone())
    }

    pub fn bond_slice(&self) -> &[bool] {
        &self.bonds
    }

    pub fn spins(&self) -> Option<SpinConfiguration> {
        self.spins.as_ref().map(|s| {
            SpinConfiguration::new(s.clone(), self.q_int.unwrap_or(2)).expect("colors below q")
        })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    /// Rebuilds the cluster structure of the current bonds (ghost at index |V|).
    pub fn clusters(&mut self) -> &mut UnionFind {
        let n = self.graph.vertex_count();
        self.uf.reset();
        for (e, &(u, v)) in self.graph.edges().iter().enumerate() {
            if self.bonds[e] {
                self.uf.union(u, v);
            }
        }
        match self.ghost {
            Ghost::None => {}
            Ghost::Fused => {
                for &b in self.graph.boundary() {
                    self.uf.union(n, b);
                }
            }
            Ghost::Exterior(_) => {
                for (i, &x) in self.graph.exterior().iter().enumerate() {
                    if self.ext_bonds[i] {
                        self.uf.union(n, x);
                    }
                }
            }
        }
        &mut self.uf
    }

    /// Bitmask of periodic axes around which some cluster of the current
    /// bonds winds. Errors without a lattice geometry.
    pub fn wrap_mask(&mut self) -> Result<u32> {
        let lat = self
            .geometry
            .ok_or_else(|| Error::InvalidArgument("wrapping needs a lattice geometry".into()))?;
        let wuf = self
            .wuf
            .get_or_insert_with(|| WrappingUnionFind::new(lat.vertex_count(), lat.dim()));
        wuf.reset();
        for (e, &(u, v)) in lat.edges().iter().enumerate() {
            if self.bonds[e] {
                wuf.union_step(u, v, lat.edge_axis(e), 1);
            }
        }
        Ok(wuf.any_wrap_mask())
    }

    fn check_observable(&self, obs: &Observable) -> Result<()> {
        let n = self.graph.vertex_count();
        let check = |v: VertexId| self.graph.check_vertex(v);
        match obs {
            Observable::Connect(x, y) => {
                check(*x)?;
                check(*y)
            }
            Observable::TwoPointSpin(x, y) => {
                check(*x)?;
                check(*y)?;
                if self.q_int.is_none() {
                    return Err(Error::UnsupportedParameter("spin observables need an integer q >= 2".into()));
                }
                Ok(())
            }
            Observable::Wrapping(axes) => {
                let lat = self
                    .geometry
                    .ok_or_else(|| Error::InvalidArgument("wrapping needs a lattice geometry".into()))?;
                if axes.is_empty() {
                    return Err(Error::InvalidArgument("wrapping needs at least one axis".into()));
                }
                for &a in axes {
                    if a >= lat.dim() {
                        return Err(Error::InvalidArgument(format!("axis {a} out of range")));
                    }
                    if lat.axes()[a].wrap != Wrap::Periodic {
                        return Err(Error::InvalidArgument(format!("axis {a} is not periodic")));
                    }
                }
                Ok(())
            }
            Observable::Magnetization => {
                if self.ghost.present() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(
                        "magnetization needs a wired or monochromatic boundary".into(),
                    ))
                }
            }
            Observable::TruncatedTwoPoint(x) => {
                if n == 0 {
                    return Err(Error::InvalidArgument("empty graph".into()));
                }
                check(*x)
            }
            Observable::MeanClusterFraction => Ok(()),
        }
    }

    /// Evaluates observables on the current state.
    pub fn measure(&mut self, observables: &[Observable], out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        let n = self.graph.vertex_count();
        let needs_wrap = observables
            .iter()
            .any(|o| matches!(o, Observable::Wrapping(_) | Observable::TruncatedTwoPoint(_)));
        let wrap_info = if needs_wrap && self.geometry.is_some() {
            Some(self.wrapping_roots()?)
        } else {
            None
        };
        if observables.iter().any(|o| !matches!(o, Observable::Wrapping(_))) {
            self.clusters();
        }
        for obs in observables {
            let value = match obs {
                Observable::Connect(x, y) => indicator(self.uf.same(*x, *y)),
                Observable::TwoPointSpin(x, y) => match &self.spins {
                    Some(s) => dot(s[*x], s[*y], self.q_int.expect("integer q")),
                    None => indicator(self.uf.same(*x, *y)),
                },
                Observable::Wrapping(axes) => {
                    let mask: u32 = axes.iter().fold(0, |m, &a| m | 1 << a);
                    let (_, any) = wrap_info.as_ref().expect("geometry checked");
                    indicator(any & mask != 0)
                }
                Observable::Magnetization => match (&self.spins, self.ghost) {
                    (Some(s), Ghost::Exterior(b)) => {
                        let q = self.q_int.expect("integer q");
                        s.iter().map(|&c| dot(c, b, q)).sum::<f64>() / n as f64
                    }
                    (Some(s), Ghost::Fused) => {
                        let q = self.q_int.expect("integer q");
                        s.iter().map(|&c| dot(c, 0, q)).sum::<f64>() / n as f64
                    }
                    _ => (0..n).filter(|&x| self.uf.same(x, n)).count() as f64 / n as f64,
                },
                Observable::TruncatedTwoPoint(x) => {
                    let wraps = match &wrap_info {
                        Some((per_vertex, _)) => per_vertex[0] != 0,
                        None => false,
                    };
                    let boundary = self.ghost.present() && self.uf.same(0, n);
                    indicator(self.uf.same(0, *x) && !wraps && !boundary)
                }
                Observable::MeanClusterFraction => {
                    let mut sum = 0.0;
                    for v in 0..n {
                        // Each cluster contributes |C|^2 = sum over its members of |C|.
                        sum += self.uf.set_size(v) as f64;
                    }
                    if self.ghost.present() {
                        // The ghost itself is not a vertex.
                        let r = self.uf.find(n);
                        let with_ghost = (0..n).filter(|&v| self.uf.find(v) == r).count() as f64;
                        sum -= with_ghost;
                    }
                    sum / (n as f64 * n as f64)
                }
            };
            out.push(value);
        }
        Ok(())
    }

    /// Per-vertex wrap mask of its cluster, plus the union over clusters.
    fn wrapping_roots(&mut self) -> Result<(Vec<u32>, u32)> {
        let any = self.wrap_mask()?;
        let wuf = self.wuf.as_mut().expect("built by wrap_mask");
        let per_vertex = (0..self.graph.vertex_count()).map(|v| wuf.wrap_mask(v)).collect();
        Ok((per_vertex, any))
    }
}

fn indicator(b: bool) -> f64 {
    f64::from(u8::from(b))
}

/// Raw per-measurement values, one series per observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSeries {
    pub series: Vec<Vec<f64>>,
}

/// Runs a chain and returns the raw measurement series.
pub fn run_chain_series<H: Host + ?Sized>(
    host: &H,
    model: ModelParams,
    chain: &ChainConfig,
    observables: &[Observable],
) -> Result<ChainSeries> {
    chain.validate()?;
    let mut c = Chain::new(host, model, chain.algorithm, stream_rng(chain.seed, chain.stream))?;
    for obs in observables {
        c.check_observable(obs)?;
    }
    for _ in 0..chain.burn_in {
        c.sweep();
    }
    let mut series = vec![Vec::with_capacity(chain.measurements()); observables.len()];
    let mut row = Vec::with_capacity(observables.len());
    for i in 0..chain.sweeps {
        c.sweep();
        if i % chain.stride == 0 {
            c.measure(observables, &mut row)?;
            for (s, &v) in series.iter_mut().zip(&row) {
                s.push(v);
            }
        }
    }
    Ok(ChainSeries { series })
}

/// Runs a chain and summarizes every observable with [`binned_stats`].
pub fn run_chain<H: Host + ?Sized>(
    host: &H,
    model: ModelParams,
    chain: &ChainConfig,
    observables: &[Observable],
) -> Result<Vec<EstimatorResult>> {
    let raw = run_chain_series(host, model, chain, observables)?;
    raw.series.iter().map(|s| binned_stats(s)).collect()
}

/// File name for a raw series: lattice, q, p and seed are embedded.
pub fn series_file_name(lattice: &str, q: f64, p: f64, seed: u64, observable: usize) -> String {
    format!("series_{lattice}_q{q}_p{p:.6}_seed{seed}_obs{observable}.txt")
}

/// Writes one value per line.
pub fn write_series(path: &Path, values: &[f64]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for v in values {
        writeln!(f, "{v:e}")?;
    }
    f.flush()?;
    Ok(())
}

impl ModelParams {
    pub fn rc(&self) -> RcParams {
        match self {
            ModelParams::RandomCluster(rc) => *rc,
            ModelParams::Potts(potts) => potts.to_rc(),
        }
    }

    pub fn q(&self) -> f64 {
        self.rc().q
    }

    /// Free or wired random-cluster model.
    pub fn random_cluster(p: f64, q: f64, bc: RcBoundary) -> Result<Self> {
        Ok(ModelParams::RandomCluster(RcParams::new(p, q, bc)?))
    }

    pub fn potts(beta: f64, q: u32, bc: PottsBoundary) -> Result<Self> {
        Ok(ModelParams::Potts(PottsParams::new(beta, q, bc)?))
    }
}
