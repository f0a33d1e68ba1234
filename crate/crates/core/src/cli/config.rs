use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{beta_from_p, p_from_beta};
use crate::graph::Graph;
use crate::lattice::{AxisSpec, Lattice};
use crate::sampler::{Algorithm, ChainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Exact,
    Sample,
    Greens,
    IrbCheck,
    PcScan,
    Locality,
    Decay,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exact => "exact",
            Command::Sample => "sample",
            Command::Greens => "greens",
            Command::IrbCheck => "irb-check",
            Command::PcScan => "pc-scan",
            Command::Locality => "locality",
            Command::Decay => "decay",
        }
    }
}

/// Whole experiment description, read from TOML. `workers` and `output`
/// only affect where and how fast a run happens, so they are left out of
/// manifests and of the config hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greens: Option<GreensSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irb: Option<IrbSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locality: Option<LocalitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecaySection>,
    /// Present when a manifest is reused as a config; ignored.
    #[serde(default, skip_serializing)]
    pub manifest: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// Axis records in declaration order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<AxisSpec>>,
    /// Compact shorthand such as `16x16` or `8x8x4o`; replaced by `axes`
    /// in manifests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    /// Edge-list file; replaced by inline `edges` in manifests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    /// Display name of an explicit graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    /// Boundary vertices of an explicit graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<usize>>,
    /// Restrict a lattice to the ball of `radius` around `center`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<BallConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: usize,
    pub radius: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BcName {
    #[default]
    Free,
    Wired,
    Monochromatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub bc: BcName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    pub sweeps: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExactSection {
    /// Vertex pairs to tabulate; all pairs by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_edges: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_spin_states: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    /// `connect X Y`, `two_point X Y`, `wrapping AXIS...`, `magnetization`,
    /// `truncated X`, `mean_cluster_fraction`.
    pub observables: Vec<String>,
    /// Independent chains merged into one estimate.
    #[serde(default = "one")]
    pub chains: usize,
    #[serde(default)]
    pub write_series: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreensKind {
    Torus,
    Zd,
    Slab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreensSection {
    pub kind: GreensKind,
    /// Dimension for `zd`, number of infinite axes for `slab`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transverse: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub displacements: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SourceName {
    #[default]
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrbSection {
    pub betas: Vec<f64>,
    #[serde(default)]
    pub random_vectors: usize,
    /// Explicit vertex sets `E` for locality vectors.
    #[serde(default)]
    pub locality_sets: Vec<Vec<usize>>,
    #[serde(default)]
    pub source: SourceName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_spin_states: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Torus,
    ThickTorus,
    Slab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub family: FamilyName,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// `n` for thick tori (thin side `2n`), the open side for slabs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wrap_axes: Option<Vec<usize>>,
    pub sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse: Option<Vec<f64>>,
    #[serde(default = "five")]
    pub fine_points: usize,
    #[serde(default = "one")]
    pub stages: usize,
}

fn five() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalitySection {
    pub d: usize,
    pub r: usize,
    pub thicknesses: Vec<usize>,
    pub sizes: Vec<usize>,
    pub coarse: Vec<f64>,
    #[serde(default = "five")]
    pub fine_points: usize,
    #[serde(default = "one")]
    pub stages: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    #[serde(default)]
    pub axis: usize,
    pub max_distance: usize,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {}", e.message())))
    }

    /// Reads a config; relative graph paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(lat) = cfg.lattice.as_mut() {
            if let Some(g) = lat.graph.as_mut() {
                if g.is_relative() {
                    if let Some(dir) = path.parent() {
                        *g = dir.join(&*g);
                    }
                }
            }
        }
        Ok(cfg)
    }

    /// Canonical TOML of the reproducible part of the config.
    pub fn canonical(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidData(format!("cannot serialize config: {e}")))
    }

    pub fn command(&self) -> Result<Command> {
        self.command
            .ok_or_else(|| Error::InvalidArgument("no command given (config `command` or subcommand)".into()))
    }

    /// Replaces lattice shorthand by axis records and graph files by inline
    /// edges, so that manifests stand alone.
    pub fn normalize(&mut self) -> Result<()> {
        if let Some(lat) = self.lattice.as_mut() {
            lat.check_exclusive()?;
            if let Some(spec) = lat.spec.take() {
                let l: Lattice = spec.parse()?;
                lat.axes = Some(l.axes().to_vec());
            }
            if let Some(path) = lat.graph.take() {
                let g = Graph::read_edge_list(&path)?;
                if lat.name.is_none() {
                    lat.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
                }
                lat.vertices = Some(g.vertex_count());
                lat.edges = Some(g.edges().iter().map(|&(u, v)| [u, v]).collect());
            }
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidArgument(format!("command `{}` is stochastic and needs a seed", self.command.map_or("?", |c| c.name()))))
    }

    pub fn model(&self) -> Result<ModelConfig> {
        let m = self.model.ok_or_else(|| Error::InvalidArgument("missing [model] section".into()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn chain(&self, default: Algorithm) -> Result<ChainConfig> {
        let c = self.chain.ok_or_else(|| Error::InvalidArgument("missing [chain] section".into()))?;
        let seed = self.require_seed()?;
        let cfg = ChainConfig {
            algorithm: c.algorithm.unwrap_or(default),
            sweeps: c.sweeps,
            burn_in: c.burn_in,
            seed,
            stride: c.stride,
            stream: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p.is_some() && self.beta.is_some() {
            return Err(Error::InvalidArgument(
                "model gives both p and beta; they are mutually exclusive".into(),
            ));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::InvalidArgument(format!("q = {} must be positive", self.q)));
        }
        if self.bc == BcName::Monochromatic && self.color.is_none() {
            return Err(Error::InvalidArgument("monochromatic boundary needs `color`".into()));
        }
        Ok(())
    }

    pub fn integer_q(&self) -> Result<u32> {
        crate::exact::integer_q(self.q)
            .ok_or_else(|| Error::InvalidArgument(format!("this command needs an integer q >= 2, got {}", self.q)))
    }

    /// Edge weight, derived from beta when only beta is given.
    pub fn p(&self) -> Result<f64> {
        match (self.p, self.beta) {
            (Some(p), None) => Ok(p),
            (None, Some(beta)) => {
                if self.q <= 1.0 {
                    return Err(Error::InvalidArgument("beta needs q > 1".into()));
                }
                if !(beta >= 0.0) {
                    return Err(Error::InvalidArgument(format!("beta = {beta} must be >= 0")));
                }
                Ok(p_from_beta(self.q, beta))
            }
            (None, None) => Err(Error::InvalidArgument("model needs p or beta".into())),
            (Some(_), Some(_)) => Err(Error::InvalidArgument("model gives both p and beta".into())),
        }
    }

    /// Coupling, derived from p when only p is given.
    pub fn beta(&self) -> Result<f64> {
        match self.beta {
            Some(b) => Ok(b),
            None => beta_from_p(self.q, self.p()?),
        }
    }
}

impl LatticeConfig {
    pub fn lattice(&self) -> Result<Option<Lattice>> {
        self.check_exclusive()?;
        match (&self.axes, &self.spec) {
            (Some(axes), _) => Ok(Some(Lattice::new(axes)?)),
            (None, Some(s)) => Ok(Some(s.parse()?)),
            _ => Ok(None),
        }
    }

    fn check_exclusive(&self) -> Result<()> {
        let given = [self.axes.is_some(), self.spec.is_some(), self.graph.is_some(), self.edges.is_some()];
        if given.iter().filter(|&&b| b).count() != 1 {
            return Err(Error::InvalidArgument(
                "[lattice] needs exactly one of `axes`, `spec`, `graph`, `edges`".into(),
            ));
        }
        let is_lattice = self.axes.is_some() || self.spec.is_some();
        if is_lattice && (self.boundary.is_some() || self.vertices.is_some()) {
            return Err(Error::InvalidArgument("`boundary` and `vertices` apply to explicit graphs only".into()));
        }
        if !is_lattice && self.ball.is_some() {
            return Err(Error::InvalidArgument("`ball` applies to lattices only".into()));
        }
        Ok(())
    }

    /// An explicit graph with its boundary, or `None` for lattices.
    pub fn explicit_graph(&self) -> Result<Option<(Graph, String)>> {
        self.check_exclusive()?;
        let (g, name) = if let Some(path) = &self.graph {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
            let name = self.name.clone().or(stem).unwrap_or_else(|| "graph".to_string());
            (Graph::read_edge_list(path)?, name)
        } else if let Some(edges) = &self.edges {
            let implied = edges.iter().map(|e| e[0].max(e[1]) + 1).max().unwrap_or(0);
            let n = self.vertices.unwrap_or(implied);
            let name = self.name.clone().unwrap_or_else(|| "graph".to_string());
            (Graph::new(n, edges.iter().map(|e| (e[0], e[1])))?, name)
        } else {
            return Ok(None);
        };
        let g = match &self.boundary {
            Some(b) => g.with_boundary(b)?,
            None => g,
        };
        Ok(Some((g, name)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_p_and_beta() {
        let cfg = ExperimentConfig::from_toml("command = \"exact\"\n[model]\nq = 2\np = 0.5\nbeta = 0.3\n").unwrap();
        let err = cfg.model().unwrap_err();
        assert!(err.to_string().contains("both p and beta"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("command = \"exact\"\nsed = 3\n").is_err());
        assert!(ExperimentConfig::from_toml("command = \"frobnicate\"\n").is_err());
    }

    #[test]
    fn canonical_skips_runtime_fields() {
        let cfg = ExperimentConfig::from_toml("command = \"greens\"\nworkers = 4\noutput = \"x\"\n[lattice]\nspec = \"2x2\"\n").unwrap();
        let mut cfg = cfg;
        cfg.normalize().unwrap();
        let text = cfg.canonical().unwrap();
        assert!(!text.contains("workers"));
        assert!(!text.contains("output"));
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back.lattice, cfg.lattice);
    }

    #[test]
    fn beta_and_p_derivations() {
        let m = ModelConfig { q: 2.0, p: Some(0.5), beta: None, bc: BcName::Free, color: None };
        assert!((m.beta().unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        let m = ModelConfig { q: 2.0, p: None, beta: Some(0.5 * 2f64.ln()), bc: BcName::Free, color: None };
        assert!((m.p().unwrap() - 0.5).abs() < 1e-15);
    }
}
