//! Finite-size estimates of critical points from wrapping probabilities.
//!
//! For every size `L` of a lattice family and every `p` on a grid, a chain
//! estimates the probability that some cluster winds around one of the
//! family's wrapping axes. Each curve is smoothed by isotonic regression,
//! and `p_c` is read off where the curves of two sizes cross.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{beta_from_p, p_from_beta, RcBoundary, RcParams};
use crate::lattice::{AxisSpec, Lattice, Wrap};
use crate::sampler::{binned_stats, run_chain, ChainConfig, EstimatorResult, ModelParams, Observable};

/// Sizes `L` index a family of lattices `L^r x (thin box)^(d-r)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeFamily {
    pub d: usize,
    /// Number of axes of length `L`; they come first.
    pub r: usize,
    /// Side of the remaining `d - r` axes.
    #[serde(default)]
    pub thickness: usize,
    /// Boundary of the thin axes: periodic for thick tori, open for slabs.
    #[serde(default = "periodic")]
    pub thin_wrap: Wrap,
    /// Axes a wrapping cluster may wind around (all `L`-axes by default).
    #[serde(default)]
    pub wrap_axes: Vec<usize>,
}

fn periodic() -> Wrap {
    Wrap::Periodic
}

impl LatticeFamily {
    /// `L^d` tori, wrapping along any axis.
    pub fn torus(d: usize) -> Self {
        LatticeFamily { d, r: d, thickness: 0, thin_wrap: Wrap::Periodic, wrap_axes: (0..d).collect() }
    }

    /// `L^r x (Z/2nZ)^(d-r)`, wrapping along the `r` long axes.
    pub fn thick_torus(d: usize, r: usize, n: usize) -> Self {
        LatticeFamily { d, r, thickness: 2 * n, thin_wrap: Wrap::Periodic, wrap_axes: (0..r).collect() }
    }

    /// `L^r` periodic times an open box of side `thickness`.
    pub fn slab(d: usize, r: usize, thickness: usize) -> Self {
        LatticeFamily { d, r, thickness, thin_wrap: Wrap::Open, wrap_axes: (0..r).collect() }
    }

    pub fn with_wrap_axes(mut self, axes: Vec<usize>) -> Self {
        self.wrap_axes = axes;
        self
    }

    fn wrap_axes(&self) -> Vec<usize> {
        if self.wrap_axes.is_empty() {
            (0..self.r).collect()
        } else {
            self.wrap_axes.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.r == 0 || self.r > self.d {
            return Err(Error::InvalidSpec(format!("need 1 <= r <= d, got d = {}, r = {}", self.d, self.r)));
        }
        if self.r < self.d && self.thickness == 0 {
            return Err(Error::InvalidSpec("thin axes need a positive thickness".into()));
        }
        for &a in &self.wrap_axes() {
            if a >= self.r {
                return Err(Error::InvalidSpec(format!("wrapping axis {a} is not one of the {} long axes", self.r)));
            }
        }
        Ok(())
    }

    pub fn lattice(&self, size: usize) -> Result<Lattice> {
        self.validate()?;
        let mut axes = vec![AxisSpec::periodic(size); self.r];
        axes.extend(std::iter::repeat_n(
            AxisSpec { length: self.thickness, wrap: self.thin_wrap },
            self.d - self.r,
        ));
        Lattice::new(&axes)
    }

    pub fn label(&self) -> String {
        let thin = match self.thin_wrap {
            Wrap::Periodic => "",
            Wrap::Open => "o",
        };
        let mut s = format!("L^{}", self.r);
        for _ in self.r..self.d {
            s.push_str(&format!("x{}{thin}", self.thickness));
        }
        s
    }
}

/// Estimated wrapping probability at one `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub wrapping: EstimatorResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub size: usize,
    /// Sorted by `p`.
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcMethod {
    WrappingCrossing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    pub p_c_hat: f64,
    pub ci_halfwidth: f64,
    pub method: PcMethod,
    pub sizes: Vec<usize>,
    pub q: f64,
    /// Crossing of each size pair `(L1, L2, p, statistical error)`.
    pub crossings: Vec<(usize, usize, f64, f64)>,
}

impl PcEstimate {
    /// `(beta_c, ci)` for `q > 1`.
    pub fn beta_c(&self) -> Option<(f64, f64)> {
        if self.q <= 1.0 {
            return None;
        }
        let b = beta_from_p(self.q, self.p_c_hat).ok()?;
        let slope = (self.q - 1.0) / self.q / (1.0 - self.p_c_hat);
        Some((b, self.ci_halfwidth * slope))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub family: LatticeFamily,
    pub q: f64,
    pub curves: Vec<Curve>,
    pub estimate: PcEstimate,
}

/// Wrapping probabilities of every (size, p) cell. Cell `i` (size-major)
/// runs on stream `chain.stream + stream_base + i` of the master seed.
pub fn scan_curves(
    family: &LatticeFamily,
    q: f64,
    sizes: &[usize],
    grid: &[f64],
    chain: &ChainConfig,
    stream_base: u64,
) -> Result<Vec<Curve>> {
    family.validate()?;
    chain.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty p grid".into()));
    }
    for &p in grid {
        RcParams::free(p, q)?;
    }
    let lattices: Vec<Lattice> = sizes.iter().map(|&l| family.lattice(l)).collect::<Result<_>>()?;
    let obs = [Observable::Wrapping(family.wrap_axes())];
    let cells: Vec<(usize, usize)> = (0..sizes.len()).flat_map(|s| (0..grid.len()).map(move |j| (s, j))).collect();
    let results: Vec<Result<EstimatorResult>> = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(s, j))| {
            let model = ModelParams::RandomCluster(RcParams::new(grid[j], q, RcBoundary::Free)?);
            let cfg = chain.with_stream(chain.stream + stream_base + i as u64);
            Ok(run_chain(&lattices[s], model, &cfg, &obs)?[0])
        })
        .collect();
    let mut curves: Vec<Curve> = sizes.iter().map(|&size| Curve { size, points: Vec::new() }).collect();
    for (&(s, j), r) in cells.iter().zip(results) {
        curves[s].points.push(CurvePoint { p: grid[j], wrapping: r? });
    }
    for c in &mut curves {
        c.points.sort_by(|a, b| a.p.total_cmp(&b.p));
    }
    Ok(curves)
}

/// Weighted pool-adjacent-violators fit, nondecreasing.
pub fn isotonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let (v2, w2, n2) = blocks[blocks.len() - 1];
            let (v1, w1, n1) = blocks[blocks.len() - 2];
            if v1 <= v2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            blocks.push(((v1 * w1 + v2 * w2) / w, w, n1 + n2));
        }
    }
    blocks.into_iter().flat_map(|(v, _, n)| std::iter::repeat_n(v, n)).collect()
}

fn smoothed(curve: &Curve) -> Vec<f64> {
    let values: Vec<f64> = curve.points.iter().map(|pt| pt.wrapping.mean).collect();
    let weights: Vec<f64> = curve
        .points
        .iter()
        .map(|pt| {
            // A floor keeps all-zero or all-one cells from dominating.
            let floor = 1.0 / (pt.wrapping.samples.max(1) as f64);
            1.0 / (pt.wrapping.stderr.powi(2) + floor * floor)
        })
        .collect();
    isotonic(&values, &weights)
}

/// Lowest `p` where the smoothed curve of the larger size overtakes the
/// smaller one, with its statistical error. Both curves share the grid;
/// points where both curves sit at 0 or both at 1 carry no information and
/// are skipped.
fn pair_crossing(small: &Curve, large: &Curve) -> Option<(f64, f64)> {
    let a = smoothed(small);
    let b = smoothed(large);
    let informative: Vec<usize> = (0..a.len())
        .filter(|&i| !((a[i] <= 0.0 && b[i] <= 0.0) || (a[i] >= 1.0 && b[i] >= 1.0)))
        .collect();
    let diff = |i: usize| b[i] - a[i];
    let var = |k: usize| small.points[k].wrapping.stderr.powi(2) + large.points[k].wrapping.stderr.powi(2);
    for w in informative.windows(2) {
        let (i, j) = (w[0], w[1]);
        if diff(i) < 0.0 && diff(j) >= 0.0 {
            let (p0, p1) = (small.points[i].p, small.points[j].p);
            let t = -diff(i) / (diff(j) - diff(i));
            let p = p0 + t * (p1 - p0);
            let slope = (diff(j) - diff(i)) / (p1 - p0);
            let sigma_d = (1.0 - t) * var(i).sqrt() + t * var(j).sqrt();
            return Some((p, sigma_d / slope));
        }
    }
    None
}

/// Median of pairwise crossings; the half-width is the larger of half
/// their spread and the root-mean-square statistical error.
pub fn estimate_pc(curves: &[Curve], q: f64) -> Result<PcEstimate> {
    if curves.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 sizes, got {}", curves.len())));
    }
    let grid: Vec<f64> = curves[0].points.iter().map(|pt| pt.p).collect();
    for c in curves {
        let g: Vec<f64> = c.points.iter().map(|pt| pt.p).collect();
        if g != grid {
            return Err(Error::InvalidArgument("curves must share one p grid".into()));
        }
    }
    let mut order: Vec<usize> = (0..curves.len()).collect();
    order.sort_by_key(|&i| curves[i].size);
    let mut crossings = Vec::new();
    let mut used = vec![false; curves.len()];
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            if let Some((p, err)) = pair_crossing(&curves[i], &curves[j]) {
                crossings.push((curves[i].size, curves[j].size, p, err));
                used[i] = true;
                used[j] = true;
            }
        }
    }
    if crossings.is_empty() || used.iter().any(|u| !u) {
        let missing: Vec<usize> = curves.iter().zip(&used).filter(|(_, u)| !**u).map(|(c, _)| c.size).collect();
        return Err(Error::InconclusiveScan(format!(
            "no crossing on [{}, {}] for sizes {missing:?}",
            grid.first().unwrap_or(&f64::NAN),
            grid.last().unwrap_or(&f64::NAN)
        )));
    }
    let mut ps: Vec<f64> = crossings.iter().map(|c| c.2).collect();
    ps.sort_by(f64::total_cmp);
    let m = ps.len();
    let median = if m % 2 == 1 { ps[m / 2] } else { 0.5 * (ps[m / 2 - 1] + ps[m / 2]) };
    let spread = 0.5 * (ps[m - 1] - ps[0]);
    let stat = (crossings.iter().map(|c| c.3 * c.3).sum::<f64>() / m as f64).sqrt();
    let mut sizes: Vec<usize> = curves.iter().map(|c| c.size).collect();
    sizes.sort_unstable();
    Ok(PcEstimate {
        p_c_hat: median,
        ci_halfwidth: spread.max(stat).max(f64::MIN_POSITIVE),
        method: PcMethod::WrappingCrossing,
        sizes,
        q,
        crossings,
    })
}

pub fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 sizes, got {}", sizes.len())));
    }
    let mut s = sizes.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != sizes.len() {
        return Err(Error::InvalidArgument("sizes must be distinct".into()));
    }
    Ok(())
}

/// One-stage scan over `grid`.
pub fn scan_pc(family: &LatticeFamily, q: f64, sizes: &[usize], grid: &[f64], chain: &ChainConfig) -> Result<ScanResult> {
    check_sizes(sizes)?;
    let curves = scan_curves(family, q, sizes, grid, chain, 0)?;
    let estimate = estimate_pc(&curves, q)?;
    Ok(ScanResult { family: family.clone(), q, curves, estimate })
}

/// Scan over a grid of couplings, converted to `p` for integer `q >= 2`.
pub fn scan_pc_beta(family: &LatticeFamily, q: u32, sizes: &[usize], betas: &[f64], chain: &ChainConfig) -> Result<ScanResult> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("coupling scans need q >= 2, got {q}")));
    }
    let grid: Vec<f64> = betas.iter().map(|&b| p_from_beta(q as f64, b)).collect();
    scan_pc(family, q as f64, sizes, &grid, chain)
}

/// Coarse scan followed by `stages` refinements. Each refinement spans one
/// previous grid step on either side of the current estimate with
/// `fine_points` points. The coarse stage uses a quarter of the sweeps; all
/// stages enter the final curves, later points replacing coincident ones.
pub fn scan_pc_refined(
    family: &LatticeFamily,
    q: f64,
    sizes: &[usize],
    coarse: &[f64],
    fine_points: usize,
    stages: usize,
    chain: &ChainConfig,
) -> Result<ScanResult> {
    let curves = refined_curves(family, q, sizes, coarse, fine_points, stages, chain)?;
    let estimate = estimate_pc(&curves, q)?;
    Ok(ScanResult { family: family.clone(), q, curves, estimate })
}

/// Curves of [`scan_pc_refined`]. Refinement stops early when no centre can
/// be located, so the curves are available even for inconclusive scans.
pub fn refined_curves(
    family: &LatticeFamily,
    q: f64,
    sizes: &[usize],
    coarse: &[f64],
    fine_points: usize,
    stages: usize,
    chain: &ChainConfig,
) -> Result<Vec<Curve>> {
    check_sizes(sizes)?;
    if coarse.len() < 2 || fine_points < 3 {
        return Err(Error::InvalidArgument("refined scans need at least two coarse and three fine points".into()));
    }
    let quick = ChainConfig { sweeps: (chain.sweeps / 4).max(8 * chain.stride), ..*chain };
    let mut curves = scan_curves(family, q, sizes, coarse, &quick, 0)?;
    let mut base = (sizes.len() * coarse.len()) as u64;
    let mut step = coarse.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    for _ in 0..stages {
        let center = match estimate_pc(&curves, q) {
            Ok(rough) => rough.p_c_hat,
            Err(Error::InconclusiveScan(_)) => match half_point(&curves) {
                Some(c) => c,
                None => break,
            },
            Err(e) => return Err(e),
        };
        let lo = (center - step).max(0.0);
        let hi = (center + step).min(1.0);
        let fine: Vec<f64> = (0..fine_points)
            .map(|i| lo + (hi - lo) * i as f64 / (fine_points - 1) as f64)
            .collect();
        let more = scan_curves(family, q, sizes, &fine, chain, base)?;
        base += (sizes.len() * fine.len()) as u64;
        step = (hi - lo) / (fine_points - 1) as f64;
        for (c, m) in curves.iter_mut().zip(more) {
            merge_points(&mut c.points, m.points);
        }
    }
    Ok(curves)
}

/// Where the size-averaged smoothed curve first reaches 1/2; locates a
/// transition too sharp for the grid to show any crossing.
fn half_point(curves: &[Curve]) -> Option<f64> {
    let smooth: Vec<Vec<f64>> = curves.iter().map(smoothed).collect();
    let pts = &curves.first()?.points;
    let avg: Vec<f64> = (0..pts.len())
        .map(|i| smooth.iter().map(|c| c[i]).sum::<f64>() / smooth.len() as f64)
        .collect();
    for i in 1..avg.len() {
        if avg[i - 1] < 0.5 && avg[i] >= 0.5 {
            let t = (0.5 - avg[i - 1]) / (avg[i] - avg[i - 1]);
            return Some(pts[i - 1].p + t * (pts[i].p - pts[i - 1].p));
        }
    }
    None
}

fn merge_points(points: &mut Vec<CurvePoint>, newer: Vec<CurvePoint>) {
    for pt in newer {
        points.retain(|old| (old.p - pt.p).abs() > 1e-9);
        points.push(pt);
    }
    points.sort_by(|x, y| x.p.total_cmp(&y.p));
}

/// One row of the locality experiment; `n = None` marks the full-torus proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityRow {
    pub n: Option<usize>,
    pub p_c_hat: f64,
    pub ci: f64,
    pub n_used: Vec<usize>,
    pub scan: ScanResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalitySpec {
    pub d: usize,
    pub r: usize,
    pub q: f64,
    pub thicknesses: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Coarse grid; each row is refined around its own crossing.
    pub coarse: Vec<f64>,
    pub fine_points: usize,
    pub stages: usize,
}

impl LocalitySpec {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.r >= self.d {
            return Err(Error::InvalidSpec(format!("need 1 <= r < d, got d = {}, r = {}", self.d, self.r)));
        }
        if self.thicknesses.is_empty() || self.thicknesses.contains(&0) {
            return Err(Error::InvalidSpec("thicknesses must be positive".into()));
        }
        check_sizes(&self.sizes)?;
        let max_n = *self.thicknesses.iter().max().expect("non-empty");
        let min_size = *self.sizes.iter().min().expect("non-empty");
        if min_size < 4 * max_n {
            return Err(Error::InvalidSpec(format!(
                "smallest size {min_size} is below 4 x largest thickness {max_n}"
            )));
        }
        Ok(())
    }
}

/// Thick-torus rows in increasing `n`, then the `L^d` torus row wrapping
/// along the same `r` axes.
pub fn locality_table(spec: &LocalitySpec, chain: &ChainConfig) -> Result<Vec<LocalityRow>> {
    spec.validate()?;
    let mut ns = spec.thicknesses.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut families: Vec<(Option<usize>, LatticeFamily)> = ns
        .iter()
        .map(|&n| (Some(n), LatticeFamily::thick_torus(spec.d, spec.r, n)))
        .collect();
    families.push((None, LatticeFamily::torus(spec.d).with_wrap_axes((0..spec.r).collect())));
    families
        .into_iter()
        .enumerate()
        .map(|(i, (n, family))| {
            // Rows get disjoint stream ranges of the master seed.
            let row_chain = chain.with_stream(chain.stream + ((i as u64 + 1) << 40));
            let scan = scan_pc_refined(&family, spec.q, &spec.sizes, &spec.coarse, spec.fine_points, spec.stages, &row_chain)?;
            Ok(LocalityRow {
                n,
                p_c_hat: scan.estimate.p_c_hat,
                ci: scan.estimate.ci_halfwidth,
                n_used: spec.sizes.clone(),
                scan,
            })
        })
        .collect()
}

/// Confidence half-width of a difference of two independent estimates.
pub fn combined_ci(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

/// Weighted least-squares fit of `ln value = intercept - rate * distance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub rate_stderr: f64,
    pub intercept: f64,
    /// Reduced chi-square (residual variance for unweighted input).
    pub fit_quality: f64,
    /// Rate positive and at least twice its standard error.
    pub decaying: bool,
}

/// Fits `(distance, value, stderr)` triples; zero errors mean unit weights.
pub fn decay_fit(series: &[(f64, f64, f64)]) -> Result<DecayFit> {
    if series.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: series.len() });
    }
    if let Some(bad) = series.iter().find(|s| !(s.1 > 0.0)) {
        return Err(Error::InvalidData(format!("non-positive value {} at distance {}", bad.1, bad.0)));
    }
    let weighted = series.iter().all(|s| s.2 > 0.0);
    let pts: Vec<(f64, f64, f64)> = series
        .iter()
        .map(|&(x, v, e)| {
            let w = if weighted { (v / e).powi(2) } else { 1.0 };
            (x, v.ln(), w)
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let sx: f64 = pts.iter().map(|p| p.2 * p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.2 * p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * p.0 * p.1).sum();
    let det = sw * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(Error::InvalidData("distances must not all coincide".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let dof = (pts.len() - 2) as f64;
    let chi2: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / dof;
    let var_slope = if weighted { sw / det } else { chi2 * sw / det };
    let rate = -slope;
    let rate_stderr = var_slope.max(0.0).sqrt();
    Ok(DecayFit {
        rate,
        rate_stderr,
        intercept,
        fit_quality: chi2,
        decaying: rate > 0.0 && rate > 2.0 * rate_stderr && rate > 1e-12,
    })
}

/// `P[0 <-> x, cluster of 0 neither wraps nor touches the boundary]` for
/// `x = k e_axis`, `k = 1..=max_distance`, from one chain per distance.
pub fn truncated_profile(
    lat: &Lattice,
    model: ModelParams,
    axis: usize,
    max_distance: usize,
    chain: &ChainConfig,
) -> Result<Vec<(usize, EstimatorResult)>> {
    if axis >= lat.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    if max_distance == 0 || max_distance >= lat.sides()[axis] {
        return Err(Error::InvalidArgument(format!(
            "distance must be in 1..{}",
            lat.sides()[axis]
        )));
    }
    let obs: Vec<Observable> = (1..=max_distance)
        .map(|k| {
            let mut delta = vec![0i64; lat.dim()];
            delta[axis] = k as i64;
            Observable::TruncatedTwoPoint(lat.translate(0, &delta))
        })
        .collect();
    let raw = crate::sampler::run_chain_series(lat, model, chain, &obs)?;
    raw.series
        .iter()
        .enumerate()
        .map(|(k, s)| Ok((k + 1, binned_stats(s)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Algorithm;

    fn fake_curve(size: usize, grid: &[f64], pc: f64, slope: f64) -> Curve {
        Curve {
            size,
            points: grid
                .iter()
                .map(|&p| CurvePoint {
                    p,
                    wrapping: EstimatorResult {
                        mean: 1.0 / (1.0 + (-(p - pc) * slope * size as f64).exp()),
                        stderr: 0.001,
                        tau_int: 0.5,
                        samples: 1000,
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn isotonic_pools_violators() {
        assert_eq!(isotonic(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic(&[3.0, 2.0, 1.0], &[1.0, 1.0, 2.0]), vec![1.75, 1.75, 1.75]);
        let up = [0.1, 0.2, 0.3];
        assert_eq!(isotonic(&up, &[1.0; 3]), up.to_vec());
    }

    #[test]
    fn synthetic_crossing() {
        let grid: Vec<f64> = (0..11).map(|i| 0.45 + 0.01 * i as f64).collect();
        let curves: Vec<Curve> = [16, 32, 64].iter().map(|&l| fake_curve(l, &grid, 0.5, 1.0)).collect();
        let est = estimate_pc(&curves, 1.0).unwrap();
        assert!((est.p_c_hat - 0.5).abs() < 1e-9, "{est:?}");
        assert_eq!(est.crossings.len(), 3);
        assert!(est.ci_halfwidth > 0.0);
    }

    #[test]
    fn no_crossing_is_inconclusive() {
        let grid: Vec<f64> = (0..5).map(|i| 0.3 + 0.01 * i as f64).collect();
        let curves: Vec<Curve> = [16, 32, 64].iter().map(|&l| fake_curve(l, &grid, 0.5, 1.0)).collect();
        assert!(matches!(estimate_pc(&curves, 1.0), Err(Error::InconclusiveScan(_))));
    }

    #[test]
    fn families() {
        let f = LatticeFamily::thick_torus(3, 2, 3);
        let lat = f.lattice(12).unwrap();
        assert_eq!(lat.sides(), vec![12, 12, 6]);
        assert_eq!(f.label(), "L^2x6");
        let s = LatticeFamily::slab(3, 2, 4);
        assert_eq!(s.lattice(8).unwrap().axes()[2].wrap, Wrap::Open);
        assert!(LatticeFamily::torus(2).with_wrap_axes(vec![2]).validate().is_err());
    }

    #[test]
    fn locality_schedule_rule() {
        let spec = LocalitySpec {
            d: 3,
            r: 2,
            q: 2.0,
            thicknesses: vec![1, 2, 3],
            sizes: vec![8, 16, 24],
            coarse: vec![0.3, 0.4, 0.5],
            fine_points: 3,
            stages: 1,
        };
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
        let ok = LocalitySpec { sizes: vec![12, 16, 24], ..spec };
        ok.validate().unwrap();
    }

    #[test]
    fn decay_fit_exact_exponential() {
        let s: Vec<(f64, f64, f64)> = (1..=6).map(|x| (x as f64, (-0.5 * x as f64).exp(), 0.0)).collect();
        let f = decay_fit(&s).unwrap();
        assert!((f.rate - 0.5).abs() < 1e-12);
        assert!(f.decaying);
        let flat: Vec<(f64, f64, f64)> = (1..=6).map(|x| (x as f64, 0.3, 0.01)).collect();
        let f = decay_fit(&flat).unwrap();
        assert!(f.rate.abs() < 1e-12);
        assert!(!f.decaying);
        assert!(matches!(decay_fit(&[(1.0, 1.0, 0.0), (2.0, 0.0, 0.0), (3.0, 1.0, 0.0), (4.0, 1.0, 0.0)]), Err(Error::InvalidData(_))));
        assert!(decay_fit(&s[..3]).is_err());
    }

    #[test]
    fn decay_fit_noisy() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut inside = 0;
        for _ in 0..50 {
            let s: Vec<(f64, f64, f64)> = (1..=10)
                .map(|x| {
                    let v = (-0.3 * x as f64).exp();
                    // Gaussian-ish noise: sum of 12 uniforms.
                    let z: f64 = (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0;
                    (x as f64, v * (1.0 + 0.05 * z), 0.05 * v)
                })
                .collect();
            let f = decay_fit(&s).unwrap();
            if (f.rate - 0.3).abs() <= 2.0 * f.rate_stderr {
                inside += 1;
            }
        }
        assert!(inside >= 43, "{inside}/50");
    }

    #[test]
    fn small_percolation_scan() {
        let chain = ChainConfig::new(Algorithm::ChayesMachta, 2000, 20, 5);
        let grid: Vec<f64> = (0..7).map(|i| 0.35 + 0.05 * i as f64).collect();
        let res = scan_pc(&LatticeFamily::torus(2), 1.0, &[6, 10, 16], &grid, &chain).unwrap();
        assert!((res.estimate.p_c_hat - 0.5).abs() < 0.06, "{:?}", res.estimate);
        assert!(res.estimate.beta_c().is_none());
    }

    #[test]
    fn beta_scan_matches_p_scan() {
        let chain = ChainConfig::new(Algorithm::SwendsenWang, 400, 20, 9);
        let betas: Vec<f64> = (0..6).map(|i| 0.3 + 0.05 * i as f64).collect();
        let family = LatticeFamily::torus(2);
        let a = scan_pc_beta(&family, 2, &[4, 6, 8], &betas, &chain).unwrap();
        let grid: Vec<f64> = betas.iter().map(|&b| p_from_beta(2.0, b)).collect();
        let b = scan_pc(&family, 2.0, &[4, 6, 8], &grid, &chain).unwrap();
        assert!((a.estimate.p_c_hat - b.estimate.p_c_hat).abs() < 1e-12);
    }
}
