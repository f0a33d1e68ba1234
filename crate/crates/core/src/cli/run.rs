use std::path::PathBuf;

use rayon::prelude::*;

use super::config::{BcName, Command, ExperimentConfig, FamilyName, GreensKind, ModelConfig, SourceName};
use super::output::{num, Outputs};
use super::{report_error, EXIT_OK};
use crate::critical::{
    check_sizes, combined_ci, decay_fit, estimate_pc, locality_table, refined_curves, scan_curves, truncated_profile,
    Curve, LatticeFamily, LocalitySpec,
};
use crate::error::{Error, Result};
use crate::exact::{p_from_beta, EnumerationCaps, Enumerator, PottsBoundary, PottsParams, RcBoundary, RcParams};
use crate::graph::Graph;
use crate::greens::{slab_green_estimate, torus_green, QuadratureSpec};
use crate::irb::{
    check_infrared_bound_batch, make_locality_vector, torus_correlations, CorrelationSource, IrbReport, ZeroSumVector,
    EXACT_TOL,
};
use crate::lattice::Lattice;
use crate::sampler::{binned_stats, run_chain_series, stream_rng, Algorithm, EstimatorResult, ModelParams, Observable};

/// Stream of the master seed reserved for random test vectors.
const VECTOR_STREAM: u64 = 1 << 62;

pub fn execute(mut cfg: ExperimentConfig) -> i32 {
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"));
    let prepared = (|| -> Result<(String, Outputs)> {
        cfg.normalize()?;
        let canonical = cfg.canonical()?;
        let header = header(&cfg, &canonical)?;
        Ok((canonical, Outputs::new(&dir, header)?))
    })();
    let (canonical, mut outputs) = match prepared {
        Ok(x) => x,
        Err(e) => return report_error(&e, Some(&dir)),
    };
    let outcome = match cfg.workers {
        Some(0) => Err(Error::InvalidArgument("workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {w} workers: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cfg, &mut outputs))),
        None => dispatch(&cfg, &mut outputs),
    };
    let status = match &outcome {
        Ok(()) => Some("ok"),
        Err(Error::InconclusiveScan(_)) => Some("inconclusive"),
        Err(_) => None,
    };
    if let Some(status) = status {
        if let Err(e) = outputs.manifest(&canonical, status) {
            return report_error(&e, Some(&dir));
        }
    }
    match outcome {
        Ok(()) => {
            for f in outputs.files() {
                println!("{}", outputs.dir().join(f).display());
            }
            EXIT_OK
        }
        Err(e) => report_error(&e, Some(&dir)),
    }
}

fn header(cfg: &ExperimentConfig, canonical: &str) -> Result<Vec<(String, String)>> {
    use sha2::{Digest, Sha256};
    let cmd = cfg.command()?;
    let mut h = vec![
        ("command".to_string(), cmd.name().to_string()),
        ("tool_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("config_sha256".to_string(), hex::encode(Sha256::digest(canonical.as_bytes()))),
        ("seed".to_string(), cfg.seed.map_or("none".to_string(), |s| s.to_string())),
    ];
    if let Some(lat) = &cfg.lattice {
        let label = match lat.lattice()? {
            Some(l) => match lat.ball {
                Some(b) => format!("{l} ball(center {}, radius {})", b.center, b.radius),
                None => l.to_string(),
            },
            None => {
                let (g, name) = lat.explicit_graph()?.expect("explicit graph");
                format!("{name} ({} vertices, {} edges)", g.vertex_count(), g.edge_count())
            }
        };
        h.push(("lattice".to_string(), label));
    }
    if let Some(m) = &cfg.model {
        let mut s = format!("q={}", m.q);
        if let Some(p) = m.p {
            s += &format!(" p={p}");
        }
        if let Some(b) = m.beta {
            s += &format!(" beta={b}");
        }
        s += &format!(" bc={}", bc_name(m.bc));
        if let Some(c) = m.color {
            s += &format!(" color={c}");
        }
        h.push(("model".to_string(), s));
    }
    if let Some(c) = &cfg.chain {
        let q = cfg.model.map_or(2.0, |m| m.q);
        let alg = c.algorithm.unwrap_or(default_algorithm(q)).name();
        h.push((
            "chain".to_string(),
            format!("algorithm={alg} sweeps={} burn_in={} stride={}", c.sweeps, c.burn_in, c.stride),
        ));
    }
    Ok(h)
}

fn bc_name(bc: BcName) -> &'static str {
    match bc {
        BcName::Free => "free",
        BcName::Wired => "wired",
        BcName::Monochromatic => "monochromatic",
    }
}

fn dispatch(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    match cfg.command()? {
        Command::Exact => exact(cfg, out),
        Command::Sample => sample(cfg, out),
        Command::Greens => greens(cfg, out),
        Command::IrbCheck => irb_check(cfg, out),
        Command::PcScan => pc_scan(cfg, out),
        Command::Locality => locality(cfg, out),
        Command::Decay => decay(cfg, out),
    }
}

/// The graph a command works on, with display labels per vertex
/// (coordinates for lattices, ids for explicit graphs).
struct HostData {
    graph: Graph,
    lattice: Option<Lattice>,
    labels: Vec<String>,
    name: String,
}

fn coord_label(c: &[usize]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn host(cfg: &ExperimentConfig) -> Result<HostData> {
    let lc = cfg.lattice.as_ref().ok_or_else(|| Error::InvalidArgument("missing [lattice] section".into()))?;
    if let Some(lat) = lc.lattice()? {
        let name = lat.to_string();
        return match lc.ball {
            Some(b) => {
                let ball = lat.ball(b.center, b.radius)?;
                let labels = ball.vertices.iter().map(|&v| coord_label(&lat.coords(v))).collect();
                Ok(HostData { graph: ball.to_graph()?, lattice: None, labels, name: format!("{name}_ball{}r{}", b.center, b.radius) })
            }
            None => {
                let labels = (0..lat.vertex_count()).map(|v| coord_label(&lat.coords(v))).collect();
                Ok(HostData { graph: lat.graph().clone(), lattice: Some(lat), labels, name })
            }
        };
    }
    let (graph, name) = lc.explicit_graph()?.expect("explicit graph");
    let labels = (0..graph.vertex_count()).map(|v| v.to_string()).collect();
    Ok(HostData { graph, lattice: None, labels, name })
}

fn require_lattice(cfg: &ExperimentConfig) -> Result<Lattice> {
    let lc = cfg.lattice.as_ref().ok_or_else(|| Error::InvalidArgument("missing [lattice] section".into()))?;
    if lc.ball.is_some() {
        return Err(Error::InvalidArgument("this command needs a whole lattice, not a ball".into()));
    }
    lc.lattice()?.ok_or_else(|| Error::InvalidArgument("this command needs a lattice, not an explicit graph".into()))
}

fn rc_boundary(bc: BcName) -> RcBoundary {
    match bc {
        BcName::Free => RcBoundary::Free,
        BcName::Wired | BcName::Monochromatic => RcBoundary::Wired,
    }
}

fn default_algorithm(q: f64) -> Algorithm {
    if crate::exact::integer_q(q).is_some() {
        Algorithm::SwendsenWang
    } else {
        Algorithm::ChayesMachta
    }
}

fn exact(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let h = host(cfg)?;
    let m = cfg.model()?;
    let sec = cfg.exact.clone().unwrap_or_default();
    let defaults = EnumerationCaps::default();
    let caps = EnumerationCaps {
        max_edges: sec.max_edges.map_or(defaults.max_edges, |x| x as _),
        max_spin_states: sec.max_spin_states.map_or(defaults.max_spin_states, |x| x as _),
    };
    let en = Enumerator::new(caps);
    let n = h.graph.vertex_count();
    let pairs: Vec<[usize; 2]> = match &sec.pairs {
        Some(p) => p.clone(),
        None => (0..n).flat_map(|x| (x + 1..n).map(move |y| [x, y])).collect(),
    };
    for &[x, y] in &pairs {
        h.graph.check_vertex(x)?;
        h.graph.check_vertex(y)?;
    }
    let p = m.p()?;
    let rc = RcParams::new(p, m.q, rc_boundary(m.bc))?;
    let conn = en.rc_connection_matrix(&h.graph, &rc)?;
    let two_point = match (crate::exact::integer_q(m.q), m.bc) {
        (Some(q), BcName::Free) => Some(en.potts_two_point_matrix(&h.graph, &PottsParams::new(m.beta()?, q, PottsBoundary::Free)?)?),
        (Some(q), BcName::Monochromatic) => {
            let color = m.color.expect("validated");
            Some(en.potts_two_point_matrix(&h.graph, &PottsParams::new(m.beta()?, q, PottsBoundary::Monochromatic(color))?)?)
        }
        _ => None,
    };
    let rows: Vec<Vec<String>> = pairs
        .iter()
        .map(|&[x, y]| {
            vec![
                h.labels[x].clone(),
                h.labels[y].clone(),
                num(conn[x * n + y]),
                two_point.as_ref().map_or(String::new(), |t| num(t[x * n + y])),
            ]
        })
        .collect();
    let mut extra = vec![("p", num(p))];
    if m.q > 1.0 {
        extra.push(("beta", num(m.beta()?)));
    }
    out.table("exact.csv", &extra, &["x", "y", "connection", "two_point"], &rows)
}

fn parse_observable(s: &str, h: &HostData) -> Result<Observable> {
    let toks: Vec<&str> = s.split_whitespace().collect();
    let vertex = |t: &str| -> Result<usize> {
        let v: usize = t.parse().map_err(|_| Error::InvalidArgument(format!("bad vertex `{t}` in observable `{s}`")))?;
        h.graph.check_vertex(v)?;
        Ok(v)
    };
    let bad = || Error::InvalidArgument(format!("unknown observable `{s}`"));
    match toks.as_slice() {
        ["connect", x, y] => Ok(Observable::Connect(vertex(x)?, vertex(y)?)),
        ["two_point", x, y] => Ok(Observable::TwoPointSpin(vertex(x)?, vertex(y)?)),
        ["wrapping", axes @ ..] => {
            let lat = h.lattice.as_ref().ok_or_else(|| Error::InvalidArgument("wrapping needs a lattice".into()))?;
            let axes: Vec<usize> = if axes.is_empty() {
                (0..lat.dim()).collect()
            } else {
                axes.iter().map(|a| a.parse().map_err(|_| bad())).collect::<Result<_>>()?
            };
            Ok(Observable::Wrapping(axes))
        }
        ["magnetization"] => Ok(Observable::Magnetization),
        ["truncated", x] => Ok(Observable::TruncatedTwoPoint(vertex(x)?)),
        ["mean_cluster_fraction"] => Ok(Observable::MeanClusterFraction),
        _ => Err(bad()),
    }
}

fn model_params(m: &ModelConfig) -> Result<ModelParams> {
    match m.bc {
        BcName::Monochromatic => {
            ModelParams::potts(m.beta()?, m.integer_q()?, PottsBoundary::Monochromatic(m.color.expect("validated")))
        }
        bc => ModelParams::random_cluster(m.p()?, m.q, rc_boundary(bc)),
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '_' { c } else { '_' }).collect()
}

fn stat_cells(r: &EstimatorResult) -> Vec<String> {
    vec![num(r.mean), num(r.stderr), num(r.tau_int), r.samples.to_string()]
}

fn sample(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let h = host(cfg)?;
    let m = cfg.model()?;
    let sec = cfg.sample.clone().ok_or_else(|| Error::InvalidArgument("missing [sample] section".into()))?;
    if sec.observables.is_empty() || sec.chains == 0 {
        return Err(Error::InvalidArgument("sample needs at least one observable and one chain".into()));
    }
    let model = model_params(&m)?;
    let chain = cfg.chain(default_algorithm(m.q))?;
    let obs: Vec<Observable> = sec.observables.iter().map(|s| parse_observable(s, &h)).collect::<Result<_>>()?;
    let runs: Vec<Result<Vec<Vec<f64>>>> = (0..sec.chains as u64)
        .into_par_iter()
        .map(|j| {
            let c = chain.with_stream(chain.stream + j);
            let raw = match &h.lattice {
                Some(lat) => run_chain_series(lat, model, &c, &obs)?,
                None => run_chain_series(&h.graph, model, &c, &obs)?,
            };
            Ok(raw.series)
        })
        .collect();
    let runs: Vec<Vec<Vec<f64>>> = runs.into_iter().collect::<Result<_>>()?;
    let mut merged: Vec<Option<EstimatorResult>> = vec![None; obs.len()];
    for series in &runs {
        for (acc, s) in merged.iter_mut().zip(series) {
            let r = binned_stats(s)?;
            *acc = Some(match acc {
                Some(a) => a.merge(&r),
                None => r,
            });
        }
    }
    let rows: Vec<Vec<String>> = sec
        .observables
        .iter()
        .zip(&merged)
        .map(|(label, r)| {
            let mut row = vec![label.split_whitespace().collect::<Vec<_>>().join(" ")];
            row.extend(stat_cells(r.as_ref().expect("at least one chain")));
            row
        })
        .collect();
    let rc = model.rc();
    out.table(
        "sample.csv",
        &[("algorithm", chain.algorithm.name().to_string()), ("p", num(rc.p)), ("chains", sec.chains.to_string())],
        &["observable", "mean", "stderr", "tau_int", "samples"],
        &rows,
    )?;
    if sec.write_series {
        for (j, series) in runs.iter().enumerate() {
            for (k, s) in series.iter().enumerate() {
                let base = crate::sampler::series_file_name(&sanitize(&h.name), rc.q, rc.p, chain.seed, k);
                let name = if sec.chains > 1 { format!("chain{j}_{base}") } else { base };
                let text: String = s.iter().map(|v| format!("{v:e}\n")).collect();
                out.write_raw(&name, &text)?;
            }
        }
    }
    Ok(())
}

fn quadrature(sec: &super::config::GreensSection) -> Result<QuadratureSpec> {
    let d = QuadratureSpec::default();
    let q = QuadratureSpec {
        nodes: sec.nodes.unwrap_or(d.nodes),
        rule: d.rule,
        levels: sec.levels.unwrap_or(d.levels),
        tolerance: sec.tolerance.unwrap_or(d.tolerance),
    };
    q.validate()?;
    Ok(q)
}

fn greens(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let sec = cfg.greens.clone().unwrap_or(super::config::GreensSection {
        kind: GreensKind::Torus,
        d: None,
        transverse: None,
        displacements: None,
        nodes: None,
        levels: None,
        tolerance: None,
    });
    let coord_cols = |k: usize| -> Vec<String> { (0..k).map(|i| format!("d{i}")).collect() };
    match sec.kind {
        GreensKind::Torus => {
            let lat = require_lattice(cfg)?;
            let table = torus_green(&lat)?;
            let dim = lat.dim();
            let idx: Vec<usize> = match &sec.displacements {
                Some(ds) => ds
                    .iter()
                    .map(|d| {
                        if d.len() != dim {
                            return Err(Error::InvalidArgument(format!("displacement {d:?} needs {dim} coordinates")));
                        }
                        Ok(table.index_of(d))
                    })
                    .collect::<Result<_>>()?,
                None => (0..table.len()).collect(),
            };
            let rows: Vec<Vec<String>> = idx
                .iter()
                .map(|&i| {
                    let mut r: Vec<String> = table.coords(i).iter().map(|c| c.to_string()).collect();
                    r.push(num(table.at_index(i)));
                    r
                })
                .collect();
            let mut cols = coord_cols(dim);
            cols.push("value".into());
            let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
            let extra = [("row_sum", num(table.total())), ("harmonicity_residual", num(table.harmonicity_residual()))];
            out.table("green.csv", &extra, &cols, &rows)
        }
        GreensKind::Zd | GreensKind::Slab => {
            let r = sec.d.ok_or_else(|| Error::InvalidArgument("[greens] needs `d`".into()))?;
            let transverse = match sec.kind {
                GreensKind::Slab => sec
                    .transverse
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("slab Green functions need `transverse` sides".into()))?,
                _ => Vec::new(),
            };
            let dim = r + transverse.len();
            let quad = quadrature(&sec)?;
            let deltas = sec.displacements.clone().unwrap_or_else(|| vec![vec![0; dim]]);
            let mut rows = Vec::new();
            let mut failed = Vec::new();
            for d in &deltas {
                let res = slab_green_estimate(r, &transverse, d, &quad)?;
                if !res.converged {
                    failed.push(format!("{d:?}"));
                }
                let mut row: Vec<String> = d.iter().map(|c| c.to_string()).collect();
                row.extend([num(res.value), num(res.error_estimate), res.converged.to_string()]);
                rows.push(row);
            }
            let mut cols = coord_cols(dim);
            cols.extend(["value".into(), "error_estimate".into(), "converged".into()]);
            let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
            let geometry = match sec.kind {
                GreensKind::Slab => format!("Z^{r} x torus {transverse:?}"),
                _ => format!("Z^{r}"),
            };
            let extra = [
                ("geometry", geometry),
                ("quadrature", format!("midpoint nodes={} levels={} tolerance={:e}", quad.nodes, quad.levels, quad.tolerance)),
            ];
            out.table("green.csv", &extra, &cols, &rows)?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Error::NotConverged(format!("quadrature did not reach tolerance at {}", failed.join(", "))))
            }
        }
    }
}

fn irb_check(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let lat = require_lattice(cfg)?;
    let m = cfg.model()?;
    let q = m.integer_q()?;
    let sec = cfg.irb.clone().ok_or_else(|| Error::InvalidArgument("missing [irb] section".into()))?;
    if sec.betas.is_empty() {
        return Err(Error::InvalidArgument("[irb] needs at least one beta".into()));
    }
    let mut vectors = Vec::new();
    let mut names = Vec::new();
    if sec.random_vectors > 0 {
        let mut rng = stream_rng(cfg.require_seed()?, VECTOR_STREAM);
        for i in 0..sec.random_vectors {
            vectors.push(ZeroSumVector::random(lat.vertex_count(), &mut rng));
            names.push(format!("random_{i}"));
        }
    }
    for (i, set) in sec.locality_sets.iter().enumerate() {
        vectors.push(make_locality_vector(&lat, set)?);
        names.push(format!("locality_{i}"));
    }
    if vectors.is_empty() {
        return Err(Error::InvalidArgument("[irb] needs random_vectors or locality_sets".into()));
    }
    let chain = match sec.source {
        SourceName::MonteCarlo => Some(cfg.chain(Algorithm::SwendsenWang)?),
        SourceName::Exact => None,
    };
    let tolerance = sec.tolerance.unwrap_or(match sec.source {
        SourceName::Exact => EXACT_TOL,
        SourceName::MonteCarlo => 0.0,
    });
    let green = torus_green(&lat)?;
    let label = lat.to_string();
    let mut rows = Vec::new();
    let mut failures = 0usize;
    let mut min_slack = f64::INFINITY;
    for (b, &beta) in sec.betas.iter().enumerate() {
        let params = PottsParams::free(beta, q)?;
        let source = match &chain {
            Some(c) => CorrelationSource::MonteCarlo(c.with_stream(c.stream + b as u64)),
            None => {
                let mut caps = EnumerationCaps::default();
                if let Some(s) = sec.max_spin_states {
                    caps.max_spin_states = s as _;
                }
                CorrelationSource::Exact(caps)
            }
        };
        let corr = torus_correlations(&lat, &params, &source)?;
        let reports = check_infrared_bound_batch(&lat, &params, &vectors, &corr, &green, tolerance)?;
        for (r, name) in reports.iter().zip(&names) {
            failures += usize::from(!r.pass);
            min_slack = min_slack.min(r.slack);
            rows.push(r.csv_row(&label, q, beta, name).split(',').map(str::to_string).collect());
        }
    }
    let cols: Vec<&str> = IrbReport::csv_header().split(',').collect();
    let extra = [
        ("checks", rows.len().to_string()),
        ("failures", failures.to_string()),
        ("min_slack", num(min_slack)),
    ];
    out.table("irb.csv", &extra, &cols, &rows)
}

fn family(sec: &super::config::ScanSection) -> Result<LatticeFamily> {
    let need = |x: Option<usize>, what: &str| x.ok_or_else(|| Error::InvalidArgument(format!("[scan] family needs `{what}`")));
    let fam = match sec.family {
        FamilyName::Torus => LatticeFamily::torus(sec.d),
        FamilyName::ThickTorus => LatticeFamily::thick_torus(sec.d, need(sec.r, "r")?, need(sec.thickness, "thickness")?),
        FamilyName::Slab => LatticeFamily::slab(sec.d, need(sec.r, "r")?, need(sec.thickness, "thickness")?),
    };
    let fam = match &sec.wrap_axes {
        Some(a) => fam.with_wrap_axes(a.clone()),
        None => fam,
    };
    fam.validate()?;
    Ok(fam)
}

fn scan_q(cfg: &ExperimentConfig, command: &str) -> Result<f64> {
    let m = cfg.model()?;
    if m.p.is_some() || m.beta.is_some() {
        return Err(Error::InvalidArgument(format!("{command} scans p itself; [model] takes only q")));
    }
    if m.bc != BcName::Free {
        return Err(Error::InvalidArgument(format!("{command} uses free boundary conditions")));
    }
    Ok(m.q)
}

fn curve_rows(label: Option<&str>, curves: &[Curve], q: f64) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for c in curves {
        for pt in &c.points {
            let mut row = Vec::new();
            if let Some(l) = label {
                row.push(l.to_string());
            }
            row.push(c.size.to_string());
            row.push(num(pt.p));
            row.push(if q > 1.0 { num(crate::exact::beta_from_p(q, pt.p).unwrap_or(f64::NAN)) } else { String::new() });
            row.extend(stat_cells(&pt.wrapping));
            rows.push(row);
        }
    }
    rows
}

const CURVE_COLUMNS: [&str; 7] = ["size", "p", "beta", "wrapping", "stderr", "tau_int", "samples"];

fn pc_scan(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let q = scan_q(cfg, "pc-scan")?;
    let sec = cfg.scan.clone().ok_or_else(|| Error::InvalidArgument("missing [scan] section".into()))?;
    let fam = family(&sec)?;
    check_sizes(&sec.sizes)?;
    let chain = cfg.chain(default_algorithm(q))?;
    let curves = match (&sec.grid, &sec.grid_beta, &sec.coarse) {
        (Some(g), None, None) => scan_curves(&fam, q, &sec.sizes, g, &chain, 0)?,
        (None, Some(b), None) => {
            if q <= 1.0 {
                return Err(Error::InvalidArgument("grid_beta needs q > 1".into()));
            }
            let g: Vec<f64> = b.iter().map(|&beta| p_from_beta(q, beta)).collect();
            scan_curves(&fam, q, &sec.sizes, &g, &chain, 0)?
        }
        (None, None, Some(c)) => refined_curves(&fam, q, &sec.sizes, c, sec.fine_points, sec.stages, &chain)?,
        _ => return Err(Error::InvalidArgument("[scan] needs exactly one of `grid`, `grid_beta`, `coarse`".into())),
    };
    let extra = [("family", fam.label()), ("algorithm", chain.algorithm.name().to_string())];
    out.table("curves.csv", &extra, &CURVE_COLUMNS, &curve_rows(None, &curves, q))?;
    let est = estimate_pc(&curves, q)?;
    let (bc, bci) = est.beta_c().map_or((String::new(), String::new()), |(b, e)| (num(b), num(e)));
    let sizes = est.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
    out.table(
        "estimate.csv",
        &extra,
        &["q", "p_c_hat", "ci_halfwidth", "beta_c", "beta_ci", "method", "sizes"],
        &[vec![num(q), num(est.p_c_hat), num(est.ci_halfwidth), bc, bci, "wrapping_crossing".into(), sizes]],
    )?;
    let rows: Vec<Vec<String>> = est
        .crossings
        .iter()
        .map(|&(a, b, p, e)| vec![a.to_string(), b.to_string(), num(p), num(e)])
        .collect();
    out.table("crossings.csv", &extra, &["size_1", "size_2", "p", "stderr"], &rows)
}

fn locality(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let q = scan_q(cfg, "locality")?;
    let sec = cfg.locality.clone().ok_or_else(|| Error::InvalidArgument("missing [locality] section".into()))?;
    let spec = LocalitySpec {
        d: sec.d,
        r: sec.r,
        q,
        thicknesses: sec.thicknesses.clone(),
        sizes: sec.sizes.clone(),
        coarse: sec.coarse.clone(),
        fine_points: sec.fine_points,
        stages: sec.stages,
    };
    spec.validate()?;
    let chain = cfg.chain(default_algorithm(q))?;
    let rows = locality_table(&spec, &chain)?;
    let torus = rows.last().expect("torus row");
    let mut table = Vec::new();
    let mut curve_table = Vec::new();
    for row in &rows {
        let label = row.scan.family.label();
        let diff = row.p_c_hat - torus.p_c_hat;
        let ci = combined_ci(row.ci, torus.ci);
        table.push(vec![
            row.n.map_or("torus".to_string(), |n| n.to_string()),
            label.clone(),
            num(row.p_c_hat),
            num(row.ci),
            num(diff),
            num(ci),
            (diff >= -ci).to_string(),
        ]);
        curve_table.extend(curve_rows(Some(&label), &row.scan.curves, q));
    }
    let thick = &rows[..rows.len() - 1];
    let decreasing = thick
        .windows(2)
        .all(|w| w[0].p_c_hat - w[1].p_c_hat > combined_ci(w[0].ci, w[1].ci));
    let mut extra = vec![("strictly_decreasing", decreasing.to_string())];
    if spec.r < 3 {
        extra.push(("note", "exploratory: fewer than three long axes".to_string()));
    }
    out.table(
        "locality.csv",
        &extra,
        &["n", "family", "p_c_hat", "ci", "minus_torus", "combined_ci", "not_below_torus"],
        &table,
    )?;
    let mut cols = vec!["family"];
    cols.extend(CURVE_COLUMNS);
    out.table("locality_curves.csv", &[], &cols, &curve_table)
}

fn decay(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let lat = require_lattice(cfg)?;
    let m = cfg.model()?;
    let model = model_params(&m)?;
    let sec = cfg.decay.ok_or_else(|| Error::InvalidArgument("missing [decay] section".into()))?;
    let chain = cfg.chain(default_algorithm(m.q))?;
    let profile = truncated_profile(&lat, model, sec.axis, sec.max_distance, &chain)?;
    let rows: Vec<Vec<String>> = profile
        .iter()
        .map(|(k, r)| {
            let mut row = vec![k.to_string()];
            row.extend(stat_cells(r));
            row
        })
        .collect();
    let extra = [("axis", sec.axis.to_string()), ("p", num(model.rc().p))];
    out.table("decay.csv", &extra, &["distance", "value", "stderr", "tau_int", "samples"], &rows)?;
    // Fit up to the first distance with no observed connection.
    let pts: Vec<(f64, f64, f64)> = profile
        .iter()
        .take_while(|(_, r)| r.mean > 0.0)
        .map(|(k, r)| (*k as f64, r.mean, r.stderr))
        .collect();
    let mut extra = extra.to_vec();
    extra.push(("fit_points", pts.len().to_string()));
    match decay_fit(&pts) {
        Ok(f) => out.table(
            "decay_fit.csv",
            &extra,
            &["rate", "rate_stderr", "intercept", "fit_quality", "decaying"],
            &[vec![num(f.rate), num(f.rate_stderr), num(f.intercept), num(f.fit_quality), f.decaying.to_string()]],
        ),
        Err(e @ (Error::InvalidData(_) | Error::InsufficientData { .. })) => {
            extra.push(("fit", format!("unavailable: {e}")));
            out.table("decay_fit.csv", &extra, &["rate", "rate_stderr", "intercept", "fit_quality", "decaying"], &[])
        }
        Err(e) => Err(e),
    }
}
