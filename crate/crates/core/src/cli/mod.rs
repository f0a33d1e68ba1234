//! Command-line runner: one TOML experiment config, CSV tables out.
//!
//! Every run writes its tables and a `manifest.toml` to the output
//! directory. The manifest holds the normalized config plus a `[manifest]`
//! record (tool version, config hash, table list) and can be passed back as
//! `--config` to reproduce the tables byte for byte.

mod config;
mod output;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

pub use config::{
    BallConfig, BcName, ChainSection, Command, DecaySection, ExactSection, ExperimentConfig, FamilyName, GreensKind,
    GreensSection, IrbSection, LatticeConfig, LocalitySection, ModelConfig, SampleSection, ScanSection, SourceName,
};
pub use output::Outputs;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "rclocality", version, about = "Random-cluster and Potts experiments on lattices and small graphs")]
pub struct Args {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// Experiment config (TOML); a previous manifest also works.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Lattice shorthand such as `8x8` or `16x16x4o`.
    #[arg(long, global = true)]
    pub lattice: Option<String>,
    /// Edge-list file.
    #[arg(long, global = true)]
    pub graph: Option<PathBuf>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub sweeps: Option<usize>,
}

/// Parses `argv` and runs; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let out_dir = args.out.clone();
    match resolve(args) {
        Ok(cfg) => run::execute(cfg),
        Err(e) => {
            let dir = out_dir.unwrap_or_else(|| PathBuf::from("out"));
            report_error(&e, Some(&dir))
        }
    }
}

/// Merges the config file with flag overrides.
pub fn resolve(args: Args) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::from_toml("")?,
    };
    if let Some(c) = args.command {
        if cfg.command.is_some_and(|given| given != c) {
            return Err(Error::InvalidArgument(format!(
                "subcommand `{}` disagrees with config command `{}`",
                c.name(),
                cfg.command.map_or("", |x| x.name())
            )));
        }
        cfg.command = Some(c);
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if args.out.is_some() {
        cfg.output = args.out;
    }
    if args.lattice.is_some() || args.graph.is_some() {
        cfg.lattice = Some(LatticeConfig {
            axes: None,
            spec: args.lattice,
            graph: args.graph,
            name: None,
            vertices: None,
            edges: None,
            boundary: None,
            ball: None,
        });
    }
    if args.q.is_some() || args.p.is_some() || args.beta.is_some() {
        let mut m = cfg.model.unwrap_or(ModelConfig { q: 2.0, p: None, beta: None, bc: BcName::Free, color: None });
        if let Some(q) = args.q {
            m.q = q;
        }
        if args.p.is_some() || args.beta.is_some() {
            m.p = args.p;
            m.beta = args.beta;
        }
        cfg.model = Some(m);
    }
    if let Some(s) = args.sweeps {
        match cfg.chain.as_mut() {
            Some(c) => c.sweeps = s,
            None => cfg.chain = Some(ChainSection { algorithm: None, sweeps: s, burn_in: 0, stride: 1 }),
        }
    }
    cfg.command()?;
    Ok(cfg)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::InconclusiveScan(_) => EXIT_INCONCLUSIVE,
        Error::NotConverged(_) | Error::Io(_) => EXIT_RUNTIME,
        _ => EXIT_VALIDATION,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidSpec(_) => "invalid_spec",
        Error::Index { .. } => "index",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::InvalidData(_) => "invalid_data",
        Error::Capacity { .. } => "capacity",
        Error::UnsupportedAlgorithm(_) => "unsupported_algorithm",
        Error::UnsupportedParameter(_) => "unsupported_parameter",
        Error::DivergentIntegral(_) => "divergent_integral",
        Error::NotConverged(_) => "not_converged",
        Error::InsufficientData { .. } => "insufficient_data",
        Error::InconclusiveScan(_) => "inconclusive_scan",
        Error::Io(_) => "io",
    }
}

/// JSON error record written to stderr and `error.json`.
pub fn error_record(e: &Error) -> serde_json::Value {
    let mut rec = json!({
        "kind": error_kind(e),
        "exit_code": exit_code(e),
        "message": e.to_string(),
    });
    if let Error::Capacity { what, requested, cap } = e {
        rec["what"] = json!(what);
        rec["requested"] = json!(requested.to_string());
        rec["cap"] = json!(cap.to_string());
    }
    json!({ "error": rec })
}

pub(crate) fn report_error(e: &Error, dir: Option<&std::path::Path>) -> i32 {
    let text = serde_json::to_string_pretty(&error_record(e)).expect("json");
    eprintln!("{text}");
    if let Some(dir) = dir {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{text}\n"));
        }
    }
    exit_code(e)
}
