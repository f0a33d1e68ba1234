//! Numerical check of the infrared bound on even tori,
//!
//! ```text
//! sum_{x,y} v_x v_y <s_x . s_y>  <=  (q-1)/(2 beta) sum_{x,y} v_x v_y G(x,y)   for sum_x v_x = 0,
//! ```
//!
//! with two-point functions from exact spin enumeration or from a
//! Swendsen-Wang chain.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{EnumerationCaps, Enumerator, PottsBoundary, PottsParams};
use crate::graph::VertexId;
use crate::greens::{autocorrelation, green_quadratic_form, torus_green, GreenTable};
use crate::lattice::{Lattice, Wrap};
use crate::sampler::{binned_stats, pairwise_sum, stream_rng, Algorithm, Chain, ChainConfig, ModelParams};

/// Largest tolerated `|sum v|`.
pub const ZERO_SUM_TOL: f64 = 1e-12;
/// Default slack tolerance for exact correlations.
pub const EXACT_TOL: f64 = 1e-9;

/// Real weights on the vertices of a torus summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumVector {
    values: Vec<f64>,
}

impl ZeroSumVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let s = pairwise_sum(&values);
        if !(s.abs() <= ZERO_SUM_TOL) {
            return Err(Error::InvalidArgument(format!("vector sums to {s:e}, not 0")));
        }
        Ok(ZeroSumVector { values })
    }

    /// Uniform entries in `[-1, 1]` with their mean removed.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = pairwise_sum(&values) / n as f64;
        for v in &mut values {
            *v -= mean;
        }
        ZeroSumVector { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `v_x = 1/|T| - 1[x in E]/|E|`.
pub fn make_locality_vector(lat: &Lattice, set: &[VertexId]) -> Result<ZeroSumVector> {
    let n = lat.vertex_count();
    let set = dedup_set(lat, set)?;
    let inv_t = 1.0 / n as f64;
    let inv_e = 1.0 / set.len() as f64;
    let mut values = vec![inv_t; n];
    for &x in &set {
        values[x] = inv_t - inv_e;
    }
    if set.len() == n {
        values.fill(0.0);
    }
    Ok(ZeroSumVector { values })
}

fn dedup_set(lat: &Lattice, set: &[VertexId]) -> Result<Vec<VertexId>> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("vertex set E is empty".into()));
    }
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    for &x in &s {
        lat.graph().check_vertex(x)?;
    }
    Ok(s)
}

/// Where two-point functions come from.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationSource {
    Exact(EnumerationCaps),
    /// Swendsen-Wang chain; the algorithm field is ignored.
    MonteCarlo(ChainConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Exact,
    MonteCarlo,
}

impl SourceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SourceKind::Exact => "exact",
            SourceKind::MonteCarlo => "monte_carlo",
        }
    }
}

/// `C(D) = <s_0 . s_D>` on a torus, with per-measurement values for
/// Monte Carlo sources.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusCorrelations {
    pub sides: Vec<usize>,
    pub mean: Vec<f64>,
    /// One row per measurement, each a translation average of `1[x <-> x+D]`.
    pub samples: Option<Vec<Vec<f64>>>,
}

impl TorusCorrelations {
    pub fn kind(&self) -> SourceKind {
        if self.samples.is_some() {
            SourceKind::MonteCarlo
        } else {
            SourceKind::Exact
        }
    }

    /// `sum_{x,y} v_x v_y C(y-x)` and its standard error.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<(f64, f64)> {
        if v.len() != self.mean.len() {
            return Err(Error::InvalidArgument(format!(
                "vector has {} entries, torus has {} vertices",
                v.len(),
                self.mean.len()
            )));
        }
        let a = autocorrelation(&self.sides, v);
        Ok(self.weighted(&a))
    }

    /// `sum_D w(D) C(D)` with its standard error.
    fn weighted(&self, w: &[f64]) -> (f64, f64) {
        match &self.samples {
            None => {
                let terms: Vec<f64> = w.iter().zip(&self.mean).map(|(a, c)| a * c).collect();
                (pairwise_sum(&terms), 0.0)
            }
            Some(rows) => {
                let series: Vec<f64> = rows
                    .iter()
                    .map(|row| {
                        let terms: Vec<f64> = w.iter().zip(row).map(|(a, c)| a * c).collect();
                        pairwise_sum(&terms)
                    })
                    .collect();
                match binned_stats(&series) {
                    Ok(est) => (est.mean, est.stderr),
                    Err(_) => (pairwise_sum(&series) / series.len() as f64, f64::INFINITY),
                }
            }
        }
    }
}

fn check_torus(lat: &Lattice) -> Result<()> {
    for a in lat.axes() {
        if a.wrap != Wrap::Periodic {
            return Err(Error::InvalidSpec(format!("{lat} is not fully periodic")));
        }
        if a.length < 4 || a.length % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "{lat}: every side must be even and at least 4, found {}",
                a.length
            )));
        }
    }
    Ok(())
}

fn check_params(params: &PottsParams) -> Result<()> {
    params.validate()?;
    if !(params.beta > 0.0 && params.beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta = {} must be positive and finite", params.beta)));
    }
    if params.bc != PottsBoundary::Free {
        return Err(Error::InvalidArgument("the torus has no boundary; use free boundary conditions".into()));
    }
    Ok(())
}

/// Two-point function of the Potts model on an even torus.
pub fn torus_correlations(lat: &Lattice, params: &PottsParams, source: &CorrelationSource) -> Result<TorusCorrelations> {
    check_torus(lat)?;
    check_params(params)?;
    let n = lat.vertex_count();
    let sides = lat.sides();
    match source {
        CorrelationSource::Exact(caps) => {
            let q = params.q;
            let mut same = vec![0.0; n];
            let z = Enumerator::new(*caps).for_each_potts(lat.graph(), params, |s, w| {
                for (acc, &c) in same.iter_mut().zip(s) {
                    if c == s[0] {
                        *acc += w;
                    }
                }
            })?;
            let qf = q as f64;
            let mean = same.into_iter().map(|a| (qf * a / z - 1.0) / (qf - 1.0)).collect();
            Ok(TorusCorrelations { sides, mean, samples: None })
        }
        CorrelationSource::MonteCarlo(cfg) => {
            let cfg = ChainConfig { algorithm: Algorithm::SwendsenWang, ..*cfg };
            cfg.validate()?;
            let mut chain = Chain::new(lat, ModelParams::Potts(*params), cfg.algorithm, stream_rng(cfg.seed, cfg.stream))?;
            for _ in 0..cfg.burn_in {
                chain.sweep();
            }
            let shifts: Vec<Vec<VertexId>> = (0..n)
                .map(|delta| {
                    let c: Vec<i64> = lat.coords(delta).iter().map(|&x| x as i64).collect();
                    (0..n).map(|x| lat.translate(x, &c)).collect()
                })
                .collect();
            let mut rows = Vec::with_capacity(cfg.measurements());
            let inv = 1.0 / n as f64;
            for i in 0..cfg.sweeps {
                chain.sweep();
                if i % cfg.stride != 0 {
                    continue;
                }
                let uf = chain.clusters();
                let row: Vec<f64> = shifts
                    .iter()
                    .map(|sh| sh.iter().enumerate().filter(|&(x, &y)| uf.same(x, y)).count() as f64 * inv)
                    .collect();
                rows.push(row);
            }
            let mean = (0..n)
                .map(|d| {
                    let col: Vec<f64> = rows.iter().map(|r| r[d]).collect();
                    pairwise_sum(&col) / col.len() as f64
                })
                .collect();
            Ok(TorusCorrelations { sides, mean, samples: Some(rows) })
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrbReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`
    pub slack: f64,
    pub lhs_stderr: f64,
    pub source: SourceKind,
    pub tolerance: f64,
    pub pass: bool,
}

impl IrbReport {
    fn new(lhs: f64, lhs_stderr: f64, rhs: f64, source: SourceKind, tolerance: f64) -> Self {
        let slack = rhs - lhs;
        IrbReport {
            lhs,
            rhs,
            slack,
            lhs_stderr,
            source,
            tolerance,
            pass: slack >= -(tolerance + 3.0 * lhs_stderr),
        }
    }

    pub fn csv_header() -> &'static str {
        "lattice,q,beta,vector,lhs,rhs,slack,lhs_stderr,source,pass"
    }

    pub fn csv_row(&self, lattice: &str, q: u32, beta: f64, vector: &str) -> String {
        format!(
            "{lattice},{q},{beta},{vector},{:e},{:e},{:e},{:e},{},{}",
            self.lhs,
            self.rhs,
            self.slack,
            self.lhs_stderr,
            self.source.name(),
            self.pass
        )
    }
}

fn check_vector(lat: &Lattice, v: &ZeroSumVector) -> Result<()> {
    if v.len() != lat.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "vector has {} entries, torus has {} vertices",
            v.len(),
            lat.vertex_count()
        )));
    }
    ZeroSumVector::new(v.values.clone()).map(|_| ())
}

/// Checks the bound for several vectors against one set of correlations.
pub fn check_infrared_bound_batch(
    lat: &Lattice,
    params: &PottsParams,
    vectors: &[ZeroSumVector],
    correlations: &TorusCorrelations,
    green: &GreenTable,
    tolerance: f64,
) -> Result<Vec<IrbReport>> {
    check_torus(lat)?;
    check_params(params)?;
    if green.sides() != lat.sides().as_slice() || correlations.sides != lat.sides() {
        return Err(Error::InvalidArgument("Green table or correlations belong to another torus".into()));
    }
    let factor = (params.q as f64 - 1.0) / (2.0 * params.beta);
    vectors
        .iter()
        .map(|v| {
            check_vector(lat, v)?;
            let (lhs, err) = correlations.quadratic_form(v.values())?;
            let rhs = factor * green_quadratic_form(green, v.values())?;
            Ok(IrbReport::new(lhs, err, rhs, correlations.kind(), tolerance))
        })
        .collect()
}

/// Checks the bound for one zero-sum vector.
pub fn check_infrared_bound(
    lat: &Lattice,
    params: &PottsParams,
    v: &ZeroSumVector,
    source: &CorrelationSource,
    tolerance: f64,
) -> Result<IrbReport> {
    check_torus(lat)?;
    check_params(params)?;
    check_vector(lat, v)?;
    let corr = torus_correlations(lat, params, source)?;
    let green = torus_green(lat)?;
    let mut reports = check_infrared_bound_batch(lat, params, std::slice::from_ref(v), &corr, &green, tolerance)?;
    Ok(reports.remove(0))
}

/// Block averages entering the locality argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stu {
    /// `|E|^-2 sum_{x,y in E} <s_x . s_y>`
    pub s: f64,
    /// `|T|^-1 sum_y <s_0 . s_y>`
    pub t: f64,
    /// `|E|^-2 sum_{x,y in E} G(x,y)`
    pub u: f64,
    /// Standard error of `S - T` (0 for exact correlations).
    pub s_minus_t_stderr: f64,
}

impl Stu {
    /// `(q-1)/(2 beta) U - (S - T)`
    pub fn slack(&self, params: &PottsParams) -> f64 {
        (params.q as f64 - 1.0) / (2.0 * params.beta) * self.u - (self.s - self.t)
    }
}

pub fn compute_stu(lat: &Lattice, params: &PottsParams, set: &[VertexId], source: &CorrelationSource) -> Result<Stu> {
    check_torus(lat)?;
    check_params(params)?;
    let corr = torus_correlations(lat, params, source)?;
    let green = torus_green(lat)?;
    compute_stu_with(lat, set, &corr, &green)
}

/// [`compute_stu`] with precomputed correlations and Green table.
pub fn compute_stu_with(lat: &Lattice, set: &[VertexId], corr: &TorusCorrelations, green: &GreenTable) -> Result<Stu> {
    let set = dedup_set(lat, set)?;
    let n = lat.vertex_count();
    let e2 = (set.len() * set.len()) as f64;
    // Multiplicity of each displacement among pairs of E.
    let mut pairs = vec![0.0; n];
    for &x in &set {
        for &y in &set {
            pairs[lat.displacement_index(x, y)] += 1.0;
        }
    }
    let s_w: Vec<f64> = pairs.iter().map(|c| c / e2).collect();
    let t_w = vec![1.0 / n as f64; n];
    let (s, _) = corr.weighted(&s_w);
    let (t, _) = corr.weighted(&t_w);
    let diff_w: Vec<f64> = s_w.iter().zip(&t_w).map(|(a, b)| a - b).collect();
    let (_, err) = corr.weighted(&diff_w);
    let u_terms: Vec<f64> = s_w.iter().zip(green.values()).map(|(w, g)| w * g).collect();
    Ok(Stu { s, t, u: pairwise_sum(&u_terms), s_minus_t_stderr: err })
}
