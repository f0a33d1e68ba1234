//! Lattice Green functions of the simple random walk with the zero mode removed.
//!
//! On a torus with sides `L_j` the Green function is the mode sum
//!
//! ```text
//! G(D) = (1/|T|) sum_{k != 0} cos(k.D) / (1 - phi(k)),   k_j = 2 pi m_j / L_j,
//! ```
//!
//! with `phi(k) = (1/d) sum_j cos k_j`. Letting some sides go to infinity turns
//! the corresponding sums into integrals over `[-pi, pi]`, which are evaluated
//! by the midpoint rule with Richardson extrapolation in the step size.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Wrap};
use crate::sampler::pairwise_sum;

/// Largest mode count a full torus table may have.
pub const MODE_CAP: usize = 1 << 20;
/// Largest number of quadrature nodes (after folding) in one evaluation.
pub const NODE_CAP: usize = 1 << 28;

/// `(1/d) sum_j cos k_j`.
pub fn char_fn(k: &[f64]) -> f64 {
    if k.is_empty() {
        return 1.0;
    }
    k.iter().map(|x| x.cos()).sum::<f64>() / k.len() as f64
}

/// Torus Green function indexed by displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenTable {
    sides: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl GreenTable {
    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in row-major displacement order (same order as lattice vertex ids).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `G(delta)`, with every coordinate reduced modulo its side.
    pub fn value(&self, delta: &[i64]) -> f64 {
        self.values[self.index_of(delta)]
    }

    pub fn at_index(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn index_of(&self, delta: &[i64]) -> usize {
        assert_eq!(delta.len(), self.sides.len(), "displacement dimension mismatch");
        delta
            .iter()
            .zip(&self.sides)
            .zip(&self.strides)
            .map(|((&x, &l), &s)| x.rem_euclid(l as i64) as usize * s)
            .sum()
    }

    pub fn coords(&self, i: usize) -> Vec<usize> {
        self.sides
            .iter()
            .zip(&self.strides)
            .map(|(&l, &s)| (i / s) % l)
            .collect()
    }

    /// Sum over all displacements (zero up to rounding).
    pub fn total(&self) -> f64 {
        pairwise_sum(&self.values)
    }

    /// Largest deviation from `G(D) - mean_{|e|=1} G(D+e) = 1[D=0] - 1/|T|`.
    pub fn harmonicity_residual(&self) -> f64 {
        let d = self.sides.len();
        let inv = 1.0 / self.values.len() as f64;
        let mut worst: f64 = 0.0;
        let mut delta = vec![0i64; d];
        for i in 0..self.values.len() {
            for (x, c) in delta.iter_mut().zip(self.coords(i)) {
                *x = c as i64;
            }
            let mut mean = 0.0;
            for a in 0..d {
                for step in [-1, 1] {
                    delta[a] += step;
                    mean += self.value(&delta);
                    delta[a] -= step;
                }
            }
            mean /= (2 * d) as f64;
            let want = if i == 0 { 1.0 - inv } else { -inv };
            worst = worst.max((self.values[i] - mean - want).abs());
        }
        worst
    }

    /// Plain-text export: a header line naming the torus, then one row
    /// `d_1 ... d_k value` per displacement.
    pub fn to_text(&self) -> String {
        let name: Vec<String> = self.sides.iter().map(|l| l.to_string()).collect();
        let mut out = format!("# torus_green {}\n", name.join("x"));
        let cols: Vec<String> = (0..self.sides.len()).map(|a| format!("d{a}")).collect();
        let _ = writeln!(out, "{} value", cols.join(" "));
        for (i, v) in self.values.iter().enumerate() {
            let c: Vec<String> = self.coords(i).iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{} {:e}", c.join(" "), v);
        }
        out
    }
}

fn check_even_sides(sides: &[usize]) -> Result<()> {
    if sides.is_empty() {
        return Err(Error::InvalidSpec("torus needs at least one axis".into()));
    }
    for &l in sides {
        if l < 2 || l % 2 != 0 {
            return Err(Error::InvalidSpec(format!("side {l} must be even and at least 2")));
        }
    }
    Ok(())
}

fn mode_count(sides: &[usize]) -> Result<usize> {
    let mut n: u128 = 1;
    for &l in sides {
        n *= l as u128;
    }
    if n > MODE_CAP as u128 {
        return Err(Error::Capacity { what: "torus modes", requested: n, cap: MODE_CAP as u128 });
    }
    Ok(n as usize)
}

/// Green table of a fully periodic lattice with even sides.
pub fn torus_green(lat: &Lattice) -> Result<GreenTable> {
    if lat.axes().iter().any(|a| a.wrap != Wrap::Periodic) {
        return Err(Error::InvalidSpec(format!("{lat} is not fully periodic")));
    }
    torus_green_sides(&lat.sides())
}

/// Green table of the torus with the given even sides, by separable
/// cosine transforms of `1/(1 - phi)`.
pub fn torus_green_sides(sides: &[usize]) -> Result<GreenTable> {
    check_even_sides(sides)?;
    let n = mode_count(sides)?;
    let d = sides.len();
    let mut strides = vec![1; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * sides[a + 1];
    }
    let cos_tables: Vec<Vec<f64>> = sides.iter().map(|&l| cos_table(l)).collect();

    let mut values = vec![0.0; n];
    for (i, v) in values.iter_mut().enumerate().skip(1) {
        let s: f64 = (0..d).map(|a| cos_tables[a][(i / strides[a]) % sides[a]]).sum();
        *v = 1.0 / (1.0 - s / d as f64);
    }
    let mut line = Vec::new();
    let mut out = Vec::new();
    for a in 0..d {
        let l = sides[a];
        let s = strides[a];
        let table = &cos_tables[a];
        for base in 0..n {
            if !(base / s).is_multiple_of(l) {
                continue;
            }
            line.clear();
            line.extend((0..l).map(|m| values[base + m * s]));
            out.clear();
            out.extend((0..l).map(|x| (0..l).map(|m| line[m] * table[(m * x) % l]).sum::<f64>()));
            for (x, &o) in out.iter().enumerate() {
                values[base + x * s] = o;
            }
        }
    }
    let inv = 1.0 / n as f64;
    for v in &mut values {
        *v *= inv;
    }
    Ok(GreenTable { sides: sides.to_vec(), strides, values })
}

fn cos_table(l: usize) -> Vec<f64> {
    (0..l)
        .map(|m| (2.0 * std::f64::consts::PI * m as f64 / l as f64).cos())
        .collect()
}

/// `G(delta)` on a torus by the direct complex mode sum, for tori too large
/// for a full table. Fails if the imaginary parts fail to cancel.
pub fn torus_green_at(sides: &[usize], delta: &[i64]) -> Result<f64> {
    check_even_sides(sides)?;
    if delta.len() != sides.len() {
        return Err(Error::InvalidArgument("displacement dimension mismatch".into()));
    }
    let mut n: u128 = 1;
    for &l in sides {
        n *= l as u128;
    }
    if n > NODE_CAP as u128 {
        return Err(Error::Capacity { what: "torus modes", requested: n, cap: NODE_CAP as u128 });
    }
    let n = n as usize;
    let d = sides.len();
    let two_pi = 2.0 * std::f64::consts::PI;
    let terms: Vec<(f64, f64)> = (1..n)
        .into_par_iter()
        .map(|i| {
            let mut rem = i;
            let mut phase = 0.0;
            let mut s = 0.0;
            for a in (0..d).rev() {
                let l = sides[a];
                let m = rem % l;
                rem /= l;
                let r = (m as i64 * delta[a]).rem_euclid(l as i64) as f64 / l as f64;
                phase += two_pi * r;
                s += (two_pi * m as f64 / l as f64).cos();
            }
            let f = 1.0 / (1.0 - s / d as f64);
            (f * phase.cos(), f * phase.sin())
        })
        .collect();
    let re: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let im: Vec<f64> = terms.iter().map(|t| t.1).collect();
    let imag = pairwise_sum(&im) / n as f64;
    if imag.abs() > 1e-12 {
        return Err(Error::InvalidData(format!("imaginary mass {imag:e} did not cancel")));
    }
    Ok(pairwise_sum(&re) / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    #[default]
    Midpoint,
}

/// Midpoint quadrature over the continuous axes, refined by halving the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes per continuous axis on the coarsest level.
    pub nodes: usize,
    #[serde(default)]
    pub rule: QuadratureRule,
    /// Maximal number of halvings after the coarsest level.
    pub levels: usize,
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes: 16, rule: QuadratureRule::Midpoint, levels: 4, tolerance: 1e-5 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 || !self.nodes.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "quadrature nodes = {} must be even and at least 8",
                self.nodes
            )));
        }
        if self.levels == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one refinement level".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance = {} must be positive", self.tolerance)));
        }
        Ok(())
    }
}

/// Extrapolated quadrature value with its refinement history.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Difference between the last two extrapolated levels.
    pub error_estimate: f64,
    pub converged: bool,
    /// Raw midpoint values, coarsest first.
    pub raw: Vec<f64>,
    /// Extrapolated values, one per level.
    pub extrapolated: Vec<f64>,
}

/// At most this many step-size orders are eliminated.
const MAX_ELIMINATIONS: usize = 3;

/// Green function of `Z^r x` (torus with the given even `transverse` sides)
/// at displacement `delta` (continuous coordinates first).
pub fn slab_green_estimate(r: usize, transverse: &[usize], delta: &[i64], quad: &QuadratureSpec) -> Result<QuadratureResult> {
    if r < 3 {
        return Err(Error::DivergentIntegral(format!(
            "the walk on Z^{r} times a finite box is recurrent; need r >= 3"
        )));
    }
    quad.validate()?;
    if !transverse.is_empty() {
        check_even_sides(transverse)?;
    }
    let d = r + transverse.len();
    if delta.len() != d {
        return Err(Error::InvalidArgument(format!(
            "displacement has {} coordinates, expected {d}",
            delta.len()
        )));
    }
    let modes = transverse_modes(transverse, &delta[r..])?;

    // Singular part of the error expands in h^(r-2), h^r, h^(r+2), ...
    let orders: Vec<i32> = (0..MAX_ELIMINATIONS).map(|j| r as i32 - 2 + 2 * j as i32).collect();
    let mut raw = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut extrapolated = Vec::new();
    let mut m = quad.nodes;
    for level in 0..=quad.levels {
        let half = m / 2;
        let nodes = (half as u128).pow(r as u32) * modes.len() as u128;
        if nodes > NODE_CAP as u128 * 16 {
            return Err(Error::Capacity { what: "quadrature nodes", requested: nodes, cap: NODE_CAP as u128 * 16 });
        }
        let q = midpoint(r, m, &delta[..r], &modes, d);
        raw.push(q);
        let mut row = vec![q];
        for j in 0..level.min(MAX_ELIMINATIONS) {
            let f = 2f64.powi(orders[j]);
            let prev = rows[level - 1][j];
            row.push(row[j] + (row[j] - prev) / (f - 1.0));
        }
        extrapolated.push(*row.last().expect("non-empty row"));
        rows.push(row);
        if level >= 2 {
            let err = (extrapolated[level] - extrapolated[level - 1]).abs();
            if err < quad.tolerance {
                return Ok(QuadratureResult {
                    value: extrapolated[level],
                    error_estimate: err,
                    converged: true,
                    raw,
                    extrapolated,
                });
            }
        }
        m *= 2;
    }
    let n = extrapolated.len();
    let err = if n >= 2 { (extrapolated[n - 1] - extrapolated[n - 2]).abs() } else { f64::INFINITY };
    Ok(QuadratureResult {
        value: extrapolated[n - 1],
        error_estimate: err,
        converged: false,
        raw,
        extrapolated,
    })
}

/// [`slab_green_estimate`] that fails unless the refinement converged.
pub fn slab_green(r: usize, transverse: &[usize], delta: &[i64], quad: &QuadratureSpec) -> Result<f64> {
    let res = slab_green_estimate(r, transverse, delta, quad)?;
    if res.converged {
        Ok(res.value)
    } else {
        Err(Error::NotConverged(format!(
            "slab Green function at {delta:?}: last refinement changed the value by {:e} (tolerance {:e})",
            res.error_estimate, quad.tolerance
        )))
    }
}

/// Green function of the simple random walk on `Z^d`, normalized by
/// `G(0) - mean_{|e|=1} G(e) = 1`.
pub fn zd_green(d: usize, delta: &[i64], quad: &QuadratureSpec) -> Result<f64> {
    if d < 3 {
        return Err(Error::DivergentIntegral(format!("the walk on Z^{d} is recurrent; need d >= 3")));
    }
    slab_green(d, &[], delta, quad)
}

/// `(sum of cos over the transverse mode, weight cos(k.D)/|box|)` per mode.
fn transverse_modes(sides: &[usize], delta: &[i64]) -> Result<Vec<(f64, f64)>> {
    let mut count: u128 = 1;
    for &l in sides {
        count *= l as u128;
    }
    if count > MODE_CAP as u128 {
        return Err(Error::Capacity { what: "transverse modes", requested: count, cap: MODE_CAP as u128 });
    }
    let mut modes = vec![(0.0, 1.0 / count as f64)];
    for (&l, &x) in sides.iter().zip(delta) {
        let table = cos_table(l);
        let mut next = Vec::with_capacity(modes.len() * l);
        for &(s, w) in &modes {
            for (m, &c) in table.iter().enumerate() {
                let phase = table[((m as i64 * x).rem_euclid(l as i64)) as usize];
                next.push((s + c, w * phase));
            }
        }
        modes = next;
    }
    Ok(modes)
}

/// Mean of the folded integrand over the midpoint grid of `[0, pi]^r` with
/// `m / 2` nodes per axis.
fn midpoint(r: usize, m: usize, delta: &[i64], modes: &[(f64, f64)], d: usize) -> f64 {
    let half = m / 2;
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let k: Vec<f64> = (0..half).map(|i| (i as f64 + 0.5) * h).collect();
    let c: Vec<f64> = k.iter().map(|x| x.cos()).collect();
    let phase: Vec<Vec<f64>> = delta
        .iter()
        .map(|&x| k.iter().map(|kk| (kk * x as f64).cos()).collect())
        .collect();
    let dinv = 1.0 / d as f64;
    let partial: Vec<f64> = (0..half)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            inner(1, r, c[i], phase[0][i], &c, &phase, modes, dinv, &mut acc);
            acc
        })
        .collect();
    pairwise_sum(&partial) / (half as f64).powi(r as i32)
}

#[allow(clippy::too_many_arguments)]
fn inner(axis: usize, r: usize, s: f64, w: f64, c: &[f64], phase: &[Vec<f64>], modes: &[(f64, f64)], dinv: f64, acc: &mut f64) {
    if axis == r {
        let mut t = 0.0;
        for &(ms, mw) in modes {
            t += mw / (1.0 - (s + ms) * dinv);
        }
        *acc += w * t;
        return;
    }
    for (i, &ci) in c.iter().enumerate() {
        inner(axis + 1, r, s + ci, w * phase[axis][i], c, phase, modes, dinv, acc);
    }
}

/// `sum_{x,y} v_x v_y G(y - x)` for `v` indexed like the vertices of the torus.
pub fn green_quadratic_form(table: &GreenTable, v: &[f64]) -> Result<f64> {
    let n = table.len();
    if v.len() != n {
        return Err(Error::InvalidArgument(format!(
            "vector has {} entries, torus has {n} vertices",
            v.len()
        )));
    }
    let auto = autocorrelation(&table.sides, v);
    let terms: Vec<f64> = auto.iter().zip(&table.values).map(|(a, g)| a * g).collect();
    Ok(pairwise_sum(&terms))
}

/// `A(D) = sum_x v_x v_{x+D}` on a torus with the given sides (row-major ids).
pub fn autocorrelation(sides: &[usize], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let d = sides.len();
    let mut strides = vec![1; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * sides[a + 1];
    }
    let shift = |x: usize, delta: usize| -> usize {
        let mut y = 0;
        for a in 0..d {
            let l = sides[a];
            let cx = (x / strides[a]) % l;
            let cd = (delta / strides[a]) % l;
            y += ((cx + cd) % l) * strides[a];
        }
        y
    };
    (0..n)
        .map(|delta| {
            let terms: Vec<f64> = (0..n).map(|x| v[x] * v[shift(x, delta)]).collect();
            pairwise_sum(&terms)
        })
        .collect()
}

/// `sum_{x,y} v_x v_y G(y - x)` for points of `Z^d` and a Green evaluator.
pub fn evaluator_quadratic_form<F>(points: &[Vec<i64>], v: &[f64], mut green: F) -> Result<f64>
where
    F: FnMut(&[i64]) -> Result<f64>,
{
    if points.len() != v.len() {
        return Err(Error::InvalidArgument("one weight per point expected".into()));
    }
    let mut cache: std::collections::BTreeMap<Vec<i64>, f64> = std::collections::BTreeMap::new();
    let mut terms = Vec::with_capacity(points.len() * points.len());
    for (x, vx) in points.iter().zip(v) {
        for (y, vy) in points.iter().zip(v) {
            if x.len() != y.len() {
                return Err(Error::InvalidArgument("points of different dimension".into()));
            }
            // Hypercubic symmetry: only |D| sorted matters.
            let mut key: Vec<i64> = x.iter().zip(y).map(|(a, b)| (b - a).abs()).collect();
            key.sort_unstable();
            let g = match cache.get(&key) {
                Some(&g) => g,
                None => {
                    let g = green(&key)?;
                    cache.insert(key, g);
                    g
                }
            };
            terms.push(vx * vy * g);
        }
    }
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_fn_examples() {
        assert_eq!(char_fn(&[0.0, 0.0, 0.0]), 1.0);
        let pi = std::f64::consts::PI;
        assert!((char_fn(&[pi, pi]) + 1.0).abs() < 1e-15);
        assert!(char_fn(&[pi, 0.0]).abs() < 1e-15);
    }

    #[test]
    fn two_by_two() {
        let g = torus_green_sides(&[2, 2]).unwrap();
        assert!((g.value(&[0, 0]) - 0.625).abs() < 1e-12);
        assert!(g.total().abs() < 1e-12);
    }

    #[test]
    fn odd_side_rejected() {
        assert!(matches!(torus_green_sides(&[4, 3]), Err(Error::InvalidSpec(_))));
        let slab = Lattice::new(&[crate::lattice::AxisSpec::periodic(4), crate::lattice::AxisSpec::open(4)]).unwrap();
        assert!(matches!(torus_green(&slab), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn table_matches_direct_sum() {
        let sides = [4, 6, 2];
        let g = torus_green_sides(&sides).unwrap();
        for i in 0..g.len() {
            let c: Vec<i64> = g.coords(i).iter().map(|&x| x as i64).collect();
            let direct = torus_green_at(&sides, &c).unwrap();
            assert!((direct - g.at_index(i)).abs() < 1e-10);
            let neg: Vec<i64> = c.iter().map(|x| -x).collect();
            assert!((g.value(&neg) - g.at_index(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonicity_and_zero_sum() {
        for sides in [vec![4, 4], vec![6, 4], vec![8], vec![4, 4, 6], vec![2, 8]] {
            let g = torus_green_sides(&sides).unwrap();
            assert!(g.total().abs() < 1e-10, "{sides:?}");
            assert!(g.harmonicity_residual() < 1e-9, "{sides:?}");
        }
    }

    #[test]
    fn quadratic_form_examples() {
        let g = torus_green_sides(&[4, 4]).unwrap();
        assert_eq!(green_quadratic_form(&g, &[0.0; 16]).unwrap(), 0.0);
        let mut v = vec![0.0; 16];
        v[0] = 1.0;
        v[5] = -1.0; // (1, 1)
        let q = green_quadratic_form(&g, &v).unwrap();
        assert!((q - 2.0 * (g.value(&[0, 0]) - g.value(&[1, 1]))).abs() < 1e-12);
        assert!(green_quadratic_form(&g, &[1.0; 3]).is_err());
    }

    #[test]
    fn recurrent_dimensions_rejected() {
        let q = QuadratureSpec::default();
        assert!(matches!(zd_green(2, &[0, 0], &q), Err(Error::DivergentIntegral(_))));
        assert!(matches!(slab_green(2, &[4], &[0, 0, 0], &q), Err(Error::DivergentIntegral(_))));
        let bad = QuadratureSpec { nodes: 4, ..q };
        assert!(zd_green(3, &[0, 0, 0], &bad).is_err());
    }

    #[test]
    fn z3_harmonic_at_origin() {
        let q = QuadratureSpec { tolerance: 1e-7, levels: 5, ..Default::default() };
        let g0 = zd_green(3, &[0, 0, 0], &q).unwrap();
        let g1 = zd_green(3, &[1, 0, 0], &q).unwrap();
        assert!((g0 - g1 - 1.0).abs() < 1e-6, "{g0} {g1}");
        let g1b = zd_green(3, &[0, 0, -1], &q).unwrap();
        assert!((g1 - g1b).abs() < 1e-9);
    }

    #[test]
    fn refinement_shrinks_differences() {
        let q = QuadratureSpec { tolerance: 1e-14, levels: 4, ..Default::default() };
        let res = slab_green_estimate(3, &[], &[1, 0, 0], &q).unwrap();
        let diffs: Vec<f64> = res.raw.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for w in diffs.windows(2) {
            assert!(w[1] < 0.6 * w[0], "{diffs:?}");
        }
        assert!(!res.converged);
        assert!(matches!(zd_green(3, &[1, 0, 0], &q), Err(Error::NotConverged(_))));
    }

    #[test]
    fn empty_transverse_box_is_zd() {
        let q = QuadratureSpec::default();
        assert_eq!(
            slab_green(3, &[], &[0, 0, 0], &q).unwrap(),
            zd_green(3, &[0, 0, 0], &q).unwrap()
        );
    }

    #[test]
    fn text_export_header() {
        let g = torus_green_sides(&[2, 2]).unwrap();
        let t = g.to_text();
        assert!(t.starts_with("# torus_green 2x2\nd0 d1 value\n0 0 6.25e-1\n"), "{t}");
        assert_eq!(t.lines().count(), 6);
    }
}
