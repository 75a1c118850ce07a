//! Orchestration of the `run`, `study` and `verify` commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use vsg_core::field::{estimate_sector_constant, validate_accretivity, validate_ellipticity};
use vsg_core::splitting::{convergence_study, evolve, TraceConfig, HYPOTHESIS_TOL};

use crate::config::RunConfig;
use crate::presets::{exponent_label, Problem};
use crate::report::{ConvergenceReport, EvolutionSummary, NormTable, RunReport, Status, Validators, Verdict};
use crate::snapshot::write_snapshot;
use crate::suites::Suite;
use crate::{CliError, ExitStatus};

pub const REPORT_FILE: &str = "report.json";
pub const NORMS_FILE: &str = "norms.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Study,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Study => "study",
            Command::Verify => "verify",
        }
    }
}

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub struct Outcome {
    pub status: ExitStatus,
    pub report: RunReport,
    pub out_dir: PathBuf,
}

/// Loads the config, applies overrides and executes `cmd`. Config problems
/// are returned as errors; everything after parsing ends in a report.
pub fn execute(cmd: Command, config: &Path, ov: &Overrides) -> Result<Outcome, CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    let out_dir = ov
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("vsg-out"));
    let threads = ov.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    pool.install(|| execute_config(cmd, &cfg, &out_dir))
}

pub fn execute_config(cmd: Command, cfg: &RunConfig, out_dir: &Path) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let problem = Problem::build(cfg)?;
    if cmd == Command::Study && cfg.scheme.n_list.is_none() {
        return Err(CliError::Config("scheme.n_list: required by study".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let mut report = RunReport::new(cmd.name(), cfg.seed, cfg.to_toml());
    let status = match drive(cmd, cfg, &problem, out_dir, &mut report) {
        Ok(s) => s,
        Err(e) => {
            report.status = Status::Abort;
            report.error = Some(e.to_string());
            ExitStatus::NumericalAbort
        }
    };
    report.timing.insert("total".into(), start.elapsed().as_secs_f64());
    write(out_dir, REPORT_FILE, &report.to_json())?;
    Ok(Outcome {
        status,
        report,
        out_dir: out_dir.to_path_buf(),
    })
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn timed<R>(report: &mut RunReport, phase: &str, f: impl FnOnce() -> R) -> R {
    let t = Instant::now();
    let r = f();
    report.timing.insert(phase.into(), t.elapsed().as_secs_f64());
    r
}

/// Numerical errors surface as `Err` and become exit status 3.
fn drive(
    cmd: Command,
    cfg: &RunConfig,
    pb: &Problem,
    out_dir: &Path,
    report: &mut RunReport,
) -> Result<ExitStatus, CliError> {
    let validators = timed(report, "validate", || validate(pb))?;
    let hypotheses_ok = validators.ellipticity.pass && validators.accretivity.pass;
    report.validators = Some(validators);
    if !hypotheses_ok {
        report.status = Status::Fail;
        return Ok(ExitStatus::SuiteFailure);
    }

    let mut trace = None;
    match cmd {
        Command::Run => {
            let config = TraceConfig {
                exponents: pb.exponents.clone(),
                snapshot_every: cfg.snapshot_every,
            };
            let (_, tr) = timed(report, "evolve", || evolve(&pb.u0, &pb.scheme, &pb.q, &pb.v, &config))?;
            let table = NormTable::from_trace(&tr);
            write(out_dir, NORMS_FILE, &table.to_csv())?;
            let mut names = Vec::new();
            for (k, (t, u)) in tr.snapshots.iter().enumerate() {
                let name = format!("snapshot_{k:04}.vssf");
                write_snapshot(u, &out_dir.join(&name)).map_err(|e| CliError::Io(e.to_string()))?;
                names.push(format!("{name} t={t:e}"));
            }
            let (worst, k, row) = tr.worst_increase();
            report.evolution = Some(EvolutionSummary {
                steps: pb.scheme.steps,
                tau: pb.scheme.step_size(),
                final_norms: tr.norms.last().cloned().unwrap_or_default(),
                worst_increase: worst,
                worst_exponent: exponent_label(tr.exponents[k].exponent()),
                worst_row: row,
                snapshots: names,
            });
            report.norms = Some(table);
            trace = Some(tr);
        }
        Command::Study => {
            let list = cfg.scheme.n_list.as_deref().unwrap_or_default();
            let table = timed(report, "study", || {
                convergence_study(&pb.u0, pb.scheme.horizon, list, &pb.scheme, &pb.q, &pb.v)
            })?;
            let conv = ConvergenceReport::from(&table);
            write(out_dir, CONVERGENCE_FILE, &conv.to_csv())?;
            report.convergence = Some(conv);
        }
        Command::Verify => {}
    }

    let enabled: Vec<Suite> = Suite::ALL.into_iter().filter(|s| s.enabled(&cfg.suites)).collect();
    let results: Vec<(Suite, f64, Result<Verdict, vsg_core::Error>)> = enabled
        .par_iter()
        .map(|&s| {
            let t = Instant::now();
            let r = s.run(pb, trace.as_ref());
            (s, t.elapsed().as_secs_f64(), r)
        })
        .collect();
    for (s, secs, r) in results {
        report.timing.insert(format!("suite.{}", s.name()), secs);
        report.suites.push(r.map_err(|e| CliError::Numerical(format!("suite {}: {e}", s.name())))?);
    }
    let pass = report.suites.iter().all(|v| v.pass);
    report.status = if pass { Status::Pass } else { Status::Fail };
    Ok(if pass { ExitStatus::Pass } else { ExitStatus::SuiteFailure })
}

fn validate(pb: &Problem) -> Result<Validators, CliError> {
    let ell = validate_ellipticity(&pb.q, HYPOTHESIS_TOL).map_err(|e| CliError::Numerical(e.to_string()))?;
    let acc = validate_accretivity(&pb.v, HYPOTHESIS_TOL);
    let sector = if acc.pass {
        estimate_sector_constant(&pb.v, 10_000, pb.seed)
            .ok()
            .filter(|c| c.is_finite())
    } else {
        None
    };
    Ok(Validators {
        ellipticity: Verdict::from(&ell),
        accretivity: Verdict::from(&acc),
        sector_constant: sector,
    })
}
