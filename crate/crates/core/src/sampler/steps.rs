//! Single updates of the cluster and single-bond dynamics.
//!
//! Each public step function is a thin wrapper over a kernel that owns its
//! scratch buffers; [`super::Chain`] keeps the kernels alive between sweeps.

use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{EdgeConfiguration, PottsBoundary, PottsParams, RcBoundary, RcParams, SpinConfiguration};
use crate::graph::Graph;
use crate::union_find::UnionFind;

/// How the boundary enters a dynamics, through an extra ghost vertex `|V|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Ghost {
    None,
    /// Ghost permanently joined to every boundary vertex (wired measure);
    /// under Swendsen-Wang the ghost carries color `0`.
    Fused,
    /// Ghost with fixed color `b`, linked by the exterior edges, each bond
    /// drawn like an ordinary edge (monochromatic Potts measure).
    Exterior(u32),
}

impl Ghost {
    pub(crate) fn for_rc(g: &Graph, bc: RcBoundary) -> Ghost {
        match bc {
            RcBoundary::Wired if !g.boundary().is_empty() => Ghost::Fused,
            _ => Ghost::None,
        }
    }

    pub(crate) fn for_potts(g: &Graph, bc: PottsBoundary) -> Ghost {
        match bc {
            PottsBoundary::Monochromatic(b) if !g.exterior().is_empty() => Ghost::Exterior(b),
            _ => Ghost::None,
        }
    }

    pub(crate) fn present(self) -> bool {
        self != Ghost::None
    }
}

/// Output of one Swendsen-Wang update: the recolored spins together with
/// the bond configuration drawn in the same step.
#[derive(Debug, Clone, PartialEq)]
pub struct SwSample {
    pub spins: SpinConfiguration,
    pub bonds: EdgeConfiguration,
    /// Bond state of each exterior edge (empty without a monochromatic boundary).
    pub exterior_bonds: Vec<bool>,
}

pub(crate) struct SwKernel {
    uf: UnionFind,
    color: Vec<u32>,
}

const UNSET: u32 = u32::MAX;

impl SwKernel {
    pub(crate) fn new(n: usize) -> Self {
        SwKernel {
            uf: UnionFind::new(n + 1),
            color: vec![UNSET; n + 1],
        }
    }

    /// Bond phase then cluster recoloring. `bonds` and `ext_bonds` are overwritten.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn step<R: Rng + ?Sized>(
        &mut self,
        g: &Graph,
        spins: &mut [u32],
        bonds: &mut [bool],
        ext_bonds: &mut [bool],
        p: f64,
        q: u32,
        ghost: Ghost,
        rng: &mut R,
    ) {
        let n = g.vertex_count();
        self.uf.reset();
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let open = spins[u] == spins[v] && rng.random::<f64>() < p;
            bonds[e] = open;
            if open {
                self.uf.union(u, v);
            }
        }
        let ghost_color = match ghost {
            Ghost::None => None,
            Ghost::Fused => {
                for &b in g.boundary() {
                    self.uf.union(n, b);
                }
                Some(0)
            }
            Ghost::Exterior(b) => {
                for (i, &x) in g.exterior().iter().enumerate() {
                    let open = spins[x] == b && rng.random::<f64>() < p;
                    ext_bonds[i] = open;
                    if open {
                        self.uf.union(n, x);
                    }
                }
                Some(b)
            }
        };
        self.color.fill(UNSET);
        if let Some(c) = ghost_color {
            let r = self.uf.find(n);
            self.color[r] = c;
        }
        for (v, s) in spins.iter_mut().enumerate() {
            let r = self.uf.find(v);
            if self.color[r] == UNSET {
                self.color[r] = rng.random_range(0..q);
            }
            *s = self.color[r];
        }
    }
}

/// One Swendsen-Wang update of a Potts configuration: every monochromatic
/// edge is opened with probability `p = 1 - exp(-beta q/(q-1))`, then every
/// cluster gets a fresh uniform color (clusters reaching a monochromatic
/// boundary take the boundary color).
pub fn sw_step<R: Rng + ?Sized>(
    g: &Graph,
    sigma: &SpinConfiguration,
    params: &PottsParams,
    rng: &mut R,
) -> Result<SwSample> {
    params.validate()?;
    if sigma.len() != g.vertex_count() {
        return Err(Error::InvalidArgument("spin configuration does not match graph".into()));
    }
    let ghost = Ghost::for_potts(g, params.bc);
    let mut spins = sigma.colors().to_vec();
    let mut bonds = vec![false; g.edge_count()];
    let mut ext = vec![false; if ghost.present() { g.exterior().len() } else { 0 }];
    SwKernel::new(g.vertex_count()).step(g, &mut spins, &mut bonds, &mut ext, params.coupled_p(), params.q, ghost, rng);
    Ok(SwSample {
        spins: SpinConfiguration::new(spins, params.q)?,
        bonds: EdgeConfiguration::from_bools(bonds),
        exterior_bonds: ext,
    })
}

/// Reachability in `omega` minus one edge, with an optional fused ghost.
pub(crate) struct HeatBathKernel {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<usize>,
}

impl HeatBathKernel {
    pub(crate) fn new(n: usize) -> Self {
        HeatBathKernel {
            stamp: vec![0; n + 1],
            epoch: 0,
            stack: Vec::new(),
        }
    }

    fn connected_without(&mut self, g: &Graph, open: &[bool], skip: usize, ghost: bool) -> bool {
        let (src, dst) = g.edge(skip);
        let n = g.vertex_count();
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let boundary = g.boundary();
        self.stack.clear();
        self.stack.push(src);
        self.stamp[src] = self.epoch;
        while let Some(x) = self.stack.pop() {
            if x == dst {
                return true;
            }
            if x == n {
                for &b in boundary {
                    if self.stamp[b] != self.epoch {
                        self.stamp[b] = self.epoch;
                        self.stack.push(b);
                    }
                }
                continue;
            }
            for &(y, e) in g.incident(x) {
                if e != skip && open[e] && self.stamp[y] != self.epoch {
                    self.stamp[y] = self.epoch;
                    self.stack.push(y);
                }
            }
            if ghost && self.stamp[n] != self.epoch && boundary.binary_search(&x).is_ok() {
                self.stamp[n] = self.epoch;
                self.stack.push(n);
            }
        }
        false
    }

    pub(crate) fn step<R: Rng + ?Sized>(
        &mut self,
        g: &Graph,
        open: &mut [bool],
        params: &RcParams,
        ghost: bool,
        e: usize,
        rng: &mut R,
    ) {
        let p = params.p;
        let prob = if self.connected_without(g, open, e, ghost) {
            p
        } else {
            p / (p + params.q * (1.0 - p))
        };
        open[e] = rng.random::<f64>() < prob;
    }
}

/// Resamples edge `e` from its conditional law given the other edges:
/// open with probability `p` when its endpoints are already connected,
/// `p / (p + q(1-p))` otherwise.
pub fn heat_bath_step<R: Rng + ?Sized>(
    g: &Graph,
    omega: &mut EdgeConfiguration,
    params: &RcParams,
    rng: &mut R,
    e: usize,
) -> Result<()> {
    params.validate()?;
    if omega.len() != g.edge_count() {
        return Err(Error::InvalidArgument("edge configuration does not match graph".into()));
    }
    if e >= g.edge_count() {
        return Err(Error::Index { index: e, size: g.edge_count() });
    }
    let ghost = Ghost::for_rc(g, params.bc).present();
    let mut open = omega.as_slice().to_vec();
    HeatBathKernel::new(g.vertex_count()).step(g, &mut open, params, ghost, e, rng);
    omega.set(e, open[e]);
    Ok(())
}

pub(crate) struct ChayesMachtaKernel {
    uf: UnionFind,
    active: Vec<u8>,
}

impl ChayesMachtaKernel {
    pub(crate) fn new(n: usize) -> Self {
        ChayesMachtaKernel {
            uf: UnionFind::new(n + 1),
            active: vec![0; n + 1],
        }
    }

    /// Activation, percolation on the active region, recombination.
    pub(crate) fn step<R: Rng + ?Sized>(&mut self, g: &Graph, open: &mut [bool], params: &RcParams, ghost: bool, rng: &mut R) {
        let n = g.vertex_count();
        self.uf.reset();
        if ghost {
            for &b in g.boundary() {
                self.uf.union(n, b);
            }
        }
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if open[e] {
                self.uf.union(u, v);
            }
        }
        // 0 = undecided, 1 = inactive, 2 = active; one draw per cluster.
        self.active.fill(0);
        let activate = 1.0 / params.q;
        let last = if ghost { n + 1 } else { n };
        for v in 0..last {
            let r = self.uf.find(v);
            if self.active[r] == 0 {
                self.active[r] = if rng.random::<f64>() < activate { 2 } else { 1 };
            }
        }
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let ru = self.uf.find(u);
            let rv = self.uf.find(v);
            if self.active[ru] == 2 && self.active[rv] == 2 {
                open[e] = rng.random::<f64>() < params.p;
            }
        }
    }
}

/// One Chayes-Machta update for real `q >= 1`: each cluster is activated
/// with probability `1/q`, every edge inside the active region is redrawn
/// independently with probability `p`, the rest is kept.
pub fn cm_step<R: Rng + ?Sized>(g: &Graph, omega: &mut EdgeConfiguration, params: &RcParams, rng: &mut R) -> Result<()> {
    params.validate()?;
    if params.q < 1.0 {
        return Err(Error::UnsupportedParameter(format!(
            "Chayes-Machta needs q >= 1, got {}",
            params.q
        )));
    }
    if omega.len() != g.edge_count() {
        return Err(Error::InvalidArgument("edge configuration does not match graph".into()));
    }
    let ghost = Ghost::for_rc(g, params.bc).present();
    let mut open = omega.as_slice().to_vec();
    ChayesMachtaKernel::new(g.vertex_count()).step(g, &mut open, params, ghost, rng);
    *omega = EdgeConfiguration::from_bools(open);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sw_infinite_beta_aligns_everything() {
        let lat = Lattice::torus(&[5, 5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = PottsParams::free(f64::INFINITY, 3).unwrap();
        let mut sigma = SpinConfiguration::uniform(25, 0);
        // Start from a spread of colors; the first step at p = 1 still only
        // joins equal neighbors, so iterate until one cluster remains.
        for (i, c) in sigma.colors_mut().iter_mut().enumerate() {
            *c = (i % 3) as u32;
        }
        let out = sw_step(lat.graph(), &sigma, &params, &mut rng).unwrap();
        // Spins are constant on the bond clusters of the step.
        for (e, &(u, v)) in lat.edges().iter().enumerate() {
            if out.bonds.is_open(e) {
                assert_eq!(out.spins.colors()[u], out.spins.colors()[v]);
                assert_eq!(sigma.colors()[u], sigma.colors()[v]);
            }
        }
        let uniform = SpinConfiguration::uniform(25, 2);
        let out = sw_step(lat.graph(), &uniform, &params, &mut rng).unwrap();
        let c0 = out.spins.colors()[0];
        assert!(out.spins.colors().iter().all(|&c| c == c0));
        assert_eq!(out.bonds.open_count(), lat.edge_count());
    }

    #[test]
    fn sw_zero_beta_has_no_bonds() {
        let lat = Lattice::torus(&[4, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = PottsParams::free(0.0, 4).unwrap();
        let sigma = SpinConfiguration::uniform(16, 1);
        let mut counts = [0usize; 4];
        for _ in 0..2000 {
            let out = sw_step(lat.graph(), &sigma, &params, &mut rng).unwrap();
            assert_eq!(out.bonds.open_count(), 0);
            for &c in out.spins.colors() {
                counts[c as usize] += 1;
            }
        }
        // 32000 uniform draws over 4 colors.
        for c in counts {
            assert!((c as f64 - 8000.0).abs() < 5.0 * (32000.0f64 * 0.25 * 0.75).sqrt());
        }
    }

    #[test]
    fn sw_monochromatic_boundary_clusters_take_boundary_color() {
        let g = Graph::new(2, [(0, 1)]).unwrap().with_exterior(vec![0]).unwrap();
        let params = PottsParams::new(f64::INFINITY, 3, PottsBoundary::Monochromatic(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma = SpinConfiguration::uniform(2, 2);
        let out = sw_step(&g, &sigma, &params, &mut rng).unwrap();
        assert_eq!(out.spins.colors(), &[2, 2]);
        assert_eq!(out.exterior_bonds, vec![true]);
    }

    #[test]
    fn heat_bath_q1_ignores_connectivity() {
        let g = Graph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let params = RcParams::free(0.3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut omega = EdgeConfiguration::from_bools(vec![false, true, true]);
        let trials = 40_000;
        let mut opened = 0;
        for _ in 0..trials {
            omega.set(0, false);
            heat_bath_step(&g, &mut omega, &params, &mut rng, 0).unwrap();
            opened += usize::from(omega.is_open(0));
        }
        let f = opened as f64 / trials as f64;
        assert!((f - 0.3).abs() < 4.0 * (0.3 * 0.7 / trials as f64).sqrt());
    }

    #[test]
    fn heat_bath_single_edge_third() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let params = RcParams::free(0.5, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut omega = EdgeConfiguration::empty(1);
        let trials = 60_000;
        let mut opened = 0;
        for _ in 0..trials {
            heat_bath_step(&g, &mut omega, &params, &mut rng, 0).unwrap();
            opened += usize::from(omega.is_open(0));
        }
        let f = opened as f64 / trials as f64;
        assert!((f - 1.0 / 3.0).abs() < 4.0 * (2.0 / 9.0 / trials as f64).sqrt());
        assert!(heat_bath_step(&g, &mut omega, &params, &mut rng, 1).is_err());
    }

    #[test]
    fn heat_bath_wired_sees_boundary_path() {
        // 0 - 1 - 2 with boundary {0, 2}: edge (0,1) alone still closes a
        // loop through the boundary once (1,2) is open.
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap().with_boundary(&[0, 2]).unwrap();
        let mut k = HeatBathKernel::new(3);
        assert!(k.connected_without(&g, &[true, true], 0, true));
        assert!(!k.connected_without(&g, &[true, true], 0, false));
        assert!(!k.connected_without(&g, &[true, false], 0, true));
    }

    #[test]
    fn cm_q1_is_independent_resampling() {
        let lat = Lattice::torus(&[4, 4]).unwrap();
        let params = RcParams::free(0.25, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut omega = EdgeConfiguration::full(lat.edge_count());
        let mut total = 0usize;
        let steps = 5000;
        for _ in 0..steps {
            cm_step(lat.graph(), &mut omega, &params, &mut rng).unwrap();
            total += omega.open_count();
        }
        let draws = (steps * lat.edge_count()) as f64;
        let f = total as f64 / draws;
        assert!((f - 0.25).abs() < 4.0 * (0.25 * 0.75 / draws).sqrt());
    }

    #[test]
    fn cm_rejects_small_q() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let mut omega = EdgeConfiguration::empty(1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = RcParams::free(0.5, 0.5).unwrap();
        assert!(matches!(
            cm_step(&g, &mut omega, &params, &mut rng),
            Err(Error::UnsupportedParameter(_))
        ));
    }
}
