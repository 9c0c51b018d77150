//! `dgbo`: run the laboratory from the command line.
//!
//! Exit codes: 0 ok, 1 runtime error, 2 a checked verdict failed,
//! 64 malformed config or arguments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use dgbo_core::evolution::{evolve, ConservedLedger};
use dgbo_core::experiments::{
    run_experiment, Check, EvolutionSpec, ExperimentConfig, ExperimentId, GridSpec, InitialData, IDENTITY_TOL,
    PROBE_DRIFT_TOL,
};
use dgbo_core::identities::Identity;
use dgbo_core::par::Execution;
use dgbo_core::probes::{probe_refinement, ProbeConfig, ProbeKind};
use dgbo_core::stein::{default_eta_grid, membership_rule, stein_profile, L2Class, SteinSymbol};
use dgbo_core::{DispersionParams, Field};

const EXIT_RUNTIME: u8 = 1;
const EXIT_VERDICT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "dgbo", version, about = "Numerical laboratory for dispersion-generalized Benjamin-Ono")]
struct Cli {
    /// Output directory (default: the config's `output`, else ./dgbo-out).
    #[arg(long, global = true, env = "DGBO_OUT_DIR")]
    out: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve initial data; writes the conserved-quantity ledger and final field.
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solitary-wave profile by Petviashvili iteration.
    Groundstate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        half_length: Option<f64>,
        /// Also evolve the profile to this time and compare with the translate.
        #[arg(long)]
        travel_t: Option<f64>,
    },
    /// Stein derivative profile of |ξ|^α χ(ξ).
    Stein {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        b: f64,
        /// Use |ξ|^α sgn(ξ) χ(ξ).
        #[arg(long)]
        signed: bool,
        #[arg(long, default_value_t = 10)]
        per_decade: usize,
    },
    /// One weight commutator identity on Gaussian data.
    Identities {
        /// weight1, weight1-noderivative, weight2 or weight2-noderivative
        #[arg(long)]
        which: String,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 60.0)]
        half_length: f64,
    },
    /// Randomized lhs/rhs ratio of an estimate under grid refinement.
    Probe {
        /// dmp1, dmp2, prop*-i, prop*-ii, prop**, propositionB or lemma1
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coarsest grid; refinement doubles it twice.
        #[arg(long, default_value_t = 512)]
        n: usize,
    },
    /// A named experiment; without --config the built-in preset runs.
    Experiment {
        id: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<dgbo_core::Error> for CliError {
    fn from(e: dgbo_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolveConfig {
    params: DispersionParams,
    grid: GridSpec,
    evolution: EvolutionSpec,
    data: InitialData,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    execution: Execution,
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn usage_check(r: dgbo_core::Result<()>) -> CliResult<()> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

/// Everything a command writes, collected before touching the disk.
struct Output {
    name: String,
    config: serde_json::Value,
    report: serde_json::Value,
    checks: Vec<Check>,
    ledger: Option<ConservedLedger>,
    field: Option<Field>,
    stein: Option<Vec<(f64, f64)>>,
    seed: Option<u64>,
}

impl Output {
    fn new(name: &str, config: serde_json::Value, report: serde_json::Value) -> Self {
        Self { name: name.into(), config, report, checks: vec![], ledger: None, field: None, stein: None, seed: None }
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn csv_bytes<R: Serialize>(header: &[&str], rows: impl Iterator<Item = R>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).map_err(|e| CliError::Runtime(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

/// Temp file in the target directory, then rename over the target.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    use std::io::Write;
    let io = |e: std::io::Error| CliError::Runtime(format!("writing {}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    Ok(())
}

fn write_outputs(dir: &Path, out: &Output) -> CliResult<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    let mut files = vec![];
    if let Some(l) = &out.ledger {
        let rows = (0..l.times.len()).map(|i| (l.times[i], l.i1[i], l.i2[i], l.i3[i], l.m[i]));
        write_atomic(dir, "ledger.csv", &csv_bytes(&["t", "I1", "I2", "I3", "M"], rows)?)?;
        files.push("ledger.csv".to_string());
    }
    if let Some(f) = &out.field {
        let rows = f.grid().nodes().into_iter().zip(f.values().iter().copied());
        write_atomic(dir, "field.csv", &csv_bytes(&["x", "u"], rows)?)?;
        files.push("field.csv".to_string());
    }
    if let Some(s) = &out.stein {
        write_atomic(dir, "stein.csv", &csv_bytes(&["eta", "value"], s.iter().copied())?)?;
        files.push("stein.csv".to_string());
    }
    let report = json!({ "passed": out.passed(), "checks": out.checks, "report": out.report });
    write_atomic(dir, "report.json", &pretty(&report)?)?;
    files.push("report.json".to_string());
    let manifest = json!({
        "tool": "dgbo",
        "version": env!("CARGO_PKG_VERSION"),
        "command": out.name,
        "config": out.config,
        "seed": out.seed,
        "passed": out.passed(),
        "files": files,
    });
    write_atomic(dir, "manifest.json", &pretty(&manifest)?)?;
    files.push("manifest.json".to_string());
    Ok(files)
}

fn pretty(v: &serde_json::Value) -> CliResult<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v).map_err(|e| CliError::Runtime(e.to_string()))?;
    b.push(b'\n');
    Ok(b)
}

fn to_json<T: Serialize>(v: &T) -> CliResult<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| CliError::Runtime(e.to_string()))
}

fn exec(cli_sequential: bool, cfg: Execution) -> Execution {
    if cli_sequential {
        Execution::Sequential
    } else {
        cfg
    }
}

fn cmd_evolve(config: &Path) -> CliResult<(Output, Option<PathBuf>)> {
    let cfg: EvolveConfig = read_toml(config)?;
    usage_check(cfg.params.validate())?;
    let grid = cfg.grid.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let ecfg = cfg.evolution.config(cfg.params);
    usage_check(ecfg.steps().map(|_| ()))?;
    let u0 = cfg.data.sample(&grid)?;
    let traj = evolve(&u0, &ecfg)?;
    let (d1, d2, d3) = traj.ledger.drifts();
    let report = json!({
        "snapshots": traj.snapshots.len(),
        "t_end": ecfg.t_end,
        "drift": { "I1": d1, "I2": d2, "I3": d3 },
        "max_escape": traj.ledger.escape.iter().copied().fold(0.0, f64::max),
    });
    let mut out = Output::new("evolve", to_json(&cfg)?, report);
    out.field = Some(traj.last().clone());
    out.ledger = Some(traj.ledger);
    Ok((out, cfg.output))
}

fn experiment_config(id: ExperimentId, config: Option<&Path>) -> CliResult<ExperimentConfig> {
    let Some(path) = config else {
        return Ok(ExperimentConfig::preset(id));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut table: toml::Table = text.parse().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    match table.get("experiment") {
        None => {
            table.insert("experiment".into(), toml::Value::String(id.name().into()));
        }
        Some(toml::Value::String(s)) if s == id.name() => {}
        Some(other) => {
            return Err(CliError::Usage(format!("config names experiment {other}, command line says {}", id.name())))
        }
    }
    let cfg: ExperimentConfig =
        table.try_into().map_err(|e: toml::de::Error| CliError::Usage(format!("{}: {e}", path.display())))?;
    usage_check(cfg.params.validate())?;
    cfg.grid.build().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn run_config(mut cfg: ExperimentConfig, sequential: bool, name: &str) -> CliResult<(Output, Option<PathBuf>)> {
    cfg.execution = exec(sequential, cfg.execution);
    let outcome = run_experiment(&cfg)?;
    let mut out = Output::new(name, to_json(&cfg)?, to_json(&outcome.report)?);
    out.seed = Some(cfg.seed);
    out.checks = outcome.checks;
    out.ledger = outcome.ledger;
    out.field = outcome.field;
    Ok((out, cfg.output))
}

#[allow(clippy::too_many_arguments)]
fn cmd_groundstate(
    config: Option<&Path>,
    a: Option<f64>,
    c: Option<f64>,
    n: Option<usize>,
    half_length: Option<f64>,
    travel_t: Option<f64>,
    sequential: bool,
) -> CliResult<(Output, Option<PathBuf>)> {
    let mut cfg = experiment_config(ExperimentId::GroundState, config)?;
    if let Some(a) = a {
        cfg.params = DispersionParams::with_a(a).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Some(n) = n {
        cfg.grid.n = n;
    }
    if let Some(l) = half_length {
        cfg.grid.half_length = l;
    }
    let mut gs = cfg.ground_state.clone().unwrap_or_default();
    gs.c = c.unwrap_or(gs.c);
    gs.travel_t = travel_t.or(gs.travel_t);
    cfg.ground_state = Some(gs);
    cfg.grid.build().map_err(|e| CliError::Usage(e.to_string()))?;
    run_config(cfg, sequential, "groundstate")
}

fn cmd_stein(alpha: f64, b: f64, signed: bool, per_decade: usize, sequential: bool) -> CliResult<(Output, Option<PathBuf>)> {
    if !(alpha > 0.0 && alpha < 1.0) || !(b > 0.0 && b < 1.0) || per_decade < 2 {
        return Err(CliError::Usage(format!("need 0 < α, b < 1 and per-decade ≥ 2 (got α = {alpha}, b = {b})")));
    }
    let g = if signed { SteinSymbol::SignedPowerCutoff { alpha } } else { SteinSymbol::PowerCutoff { alpha } };
    let ex = exec(sequential, Execution::Parallel);
    let p = stein_profile(&g, b, &default_eta_grid(per_decade), ex)?;
    let rule = membership_rule(alpha, b);
    let verdict = |c: L2Class| if c == L2Class::Member { "member" } else { "non-member" };
    println!("{}", verdict(p.class));
    let config = json!({ "alpha": alpha, "b": b, "signed": signed, "per_decade": per_decade });
    let report = json!({
        "verdict": verdict(p.class),
        "rule": verdict(rule),
        "near_slope": p.near_zero.slope,
        "far_slope": p.far.slope,
        "l2_norm_sq": p.l2_norm_sq,
    });
    let mut out = Output::new("stein", config, report);
    out.checks.push(Check::new("membership", p.class == rule, format!("measured {}, rule {}", verdict(p.class), verdict(rule))));
    out.stein = Some(p.eta.iter().copied().zip(p.values.iter().copied()).collect());
    Ok((out, None))
}

fn cmd_identities(which: &str, a: f64, n: usize, half_length: f64) -> CliResult<(Output, Option<PathBuf>)> {
    let id = Identity::ALL
        .into_iter()
        .find(|i| i.name() == which)
        .ok_or_else(|| CliError::Usage(format!("unknown identity {which:?}")))?;
    let p = DispersionParams::with_a(a).map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = dgbo_core::SpectralGrid::new(n, half_length).map_err(|e| CliError::Usage(e.to_string()))?;
    // the identity without a derivative on the weight-2 side needs mean zero
    let data = if id == Identity::Weight2NoDerivative {
        InitialData::derivative_of_gaussian(1.0, 1.0)
    } else {
        InitialData::gaussian(1.0, 1.0)
    };
    let f = data.sample(&grid)?;
    let rep = id.check(&f, p)?;
    let config = json!({ "which": which, "a": a, "n": n, "half_length": half_length, "data": data });
    let mut out = Output::new("identities", config, to_json(&rep)?);
    out.checks.push(Check::new(
        "residual",
        rep.relative_residual < IDENTITY_TOL,
        format!("{:.3e}", rep.relative_residual),
    ));
    Ok((out, None))
}

fn cmd_probe(kind: &str, trials: usize, seed: u64, n: usize, sequential: bool) -> CliResult<(Output, Option<PathBuf>)> {
    let k = ProbeKind::by_name(kind).map_err(|e| CliError::Usage(e.to_string()))?;
    if trials == 0 || n < 64 {
        return Err(CliError::Usage("need trials ≥ 1 and n ≥ 64".into()));
    }
    let pc = ProbeConfig { exec: exec(sequential, Execution::Parallel), ..ProbeConfig::new(trials, seed, n) };
    let r = probe_refinement(&k, &pc, &[n, 2 * n, 4 * n])?;
    let config = json!({ "kind": k, "trials": trials, "seed": seed, "n": n });
    let mut out = Output::new("probe", config, to_json(&r)?);
    out.seed = Some(seed);
    out.checks.push(Check::new("refinement", r.drift < PROBE_DRIFT_TOL, format!("drift {:.3e}", r.drift)));
    Ok((out, None))
}

fn run(cli: Cli) -> CliResult<bool> {
    let seq = cli.sequential;
    let (out, cfg_dir) = match &cli.command {
        Command::Evolve { config } => cmd_evolve(config)?,
        Command::Groundstate { config, a, c, n, half_length, travel_t } => {
            cmd_groundstate(config.as_deref(), *a, *c, *n, *half_length, *travel_t, seq)?
        }
        Command::Stein { alpha, b, signed, per_decade } => cmd_stein(*alpha, *b, *signed, *per_decade, seq)?,
        Command::Identities { which, a, n, half_length } => cmd_identities(which, *a, *n, *half_length)?,
        Command::Probe { kind, trials, seed, n } => cmd_probe(kind, *trials, *seed, *n, seq)?,
        Command::Experiment { id, config } => {
            let id = ExperimentId::parse(id).map_err(|e| CliError::Usage(e.to_string()))?;
            let cfg = experiment_config(id, config.as_deref())?;
            run_config(cfg, seq, id.name())?
        }
    };
    let dir = cli.out.or(cfg_dir).unwrap_or_else(|| PathBuf::from("dgbo-out"));
    let files = write_outputs(&dir, &out)?;
    for c in &out.checks {
        eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    eprintln!("wrote {} to {}", files.join(", "), dir.display());
    Ok(out.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERDICT),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("usage: dgbo <evolve|groundstate|stein|identities|probe|experiment> [--config FILE] [--out DIR]");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
