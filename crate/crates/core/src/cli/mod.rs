//! The `geoprob` command line.
//!
//! Every command is first turned into a fully resolved [`RunConfig`], then
//! executed; the config, the seed and the produced files are recorded in a
//! [`RunManifest`] next to the outputs, and `geoprob replay` re-executes
//! one bit for bit. Exit codes: 0 success, 1 a pass criterion failed,
//! 2 usage or configuration error, 3 runtime error.

mod args;
mod run;

pub use args::{parse_marks, parse_phi, parse_radius_law, parse_window, Cli, Command};
pub use run::{
    load_point_set, EstimateConfig, EvaluateConfig, GenerateConfig, Outcome, RunConfig, Sampler,
    VerifyConfig,
};

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::estimators::VMethod;
use crate::harness::{ExperimentConfig, TestFunction};
use crate::point_process::DensityField;
use args::{EstimateArgs, EvaluateArgs, GenerateArgs, ProcessKind, VMethodArg, VerifyArgs};

/// Replicates per estimate when `--reps` is not given.
pub const DEFAULT_REPS: usize = 1000;
pub const SEED_ENV: &str = "GEOPROB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CRITERION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSource {
    Flag,
    Config,
    /// Overridden by the `GEOPROB_SEED` environment variable.
    Environment,
    /// Replayed from an earlier manifest.
    Manifest,
}

/// Record of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: RunConfig,
    pub seed: Option<u64>,
    pub seed_source: Option<SeedSource>,
    /// Files written by the run (the manifest itself excluded).
    pub outputs: Vec<PathBuf>,
    /// Seconds per stage; the only field that differs between replays.
    pub wall_times: BTreeMap<String, f64>,
    pub workers: Option<usize>,
    pub passed: bool,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<RunManifest> {
        let file = File::open(path)
            .map_err(|e| Error::Parameter(format!("cannot open {}: {e}", path.display())))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = File::create(path)?;
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::Parse { .. } | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            Error::Parameter(format!("{SEED_ENV} must be an unsigned integer, got '{s}'"))
        }),
        Err(_) => Ok(None),
    }
}

fn seeded(flag: u64, default_source: SeedSource) -> Result<(u64, SeedSource)> {
    Ok(match env_seed()? {
        Some(s) => (s, SeedSource::Environment),
        None => (flag, default_source),
    })
}

fn generate_config(a: &GenerateArgs) -> Result<(RunConfig, SeedSource)> {
    let window = parse_window(&a.window)?;
    let density = || -> Result<DensityField> {
        match a.density.as_deref() {
            None | Some("uniform") => DensityField::uniform(window.clone()),
            Some(name) => {
                let d = DensityField::by_name(name, window.dim())?;
                if d.window != window {
                    return param(format!(
                        "density '{name}' is defined on the unit cube; use --window cube{}",
                        window.dim()
                    ));
                }
                Ok(d)
            }
        }
    };
    let sampler = match (a.process, a.tau, a.lambda, a.n) {
        (ProcessKind::Poisson, Some(tau), None, None) => {
            if a.density.is_some() {
                return param("--tau draws a homogeneous process; use --lambda with --density");
            }
            Sampler::HomogeneousPoisson { tau, window }
        }
        (ProcessKind::Poisson, None, Some(lambda), None) => Sampler::Poisson {
            lambda,
            density: density()?,
        },
        (ProcessKind::Poisson, ..) => {
            return param("poisson needs exactly one of --tau or --lambda (and no --n)")
        }
        (ProcessKind::Binomial, None, None, Some(n)) => {
            if n == 0 {
                return param("--n must be at least 1");
            }
            Sampler::Binomial {
                n,
                density: density()?,
            }
        }
        (ProcessKind::Binomial, ..) => {
            return param("binomial needs --n (and no --tau or --lambda)")
        }
    };
    let (seed, source) = seeded(a.seed, SeedSource::Flag)?;
    let cfg = GenerateConfig {
        sampler,
        marks: parse_marks(&a.marks)?,
        seed,
        output: a.output.clone(),
    };
    Ok((RunConfig::Generate(cfg), source))
}

fn evaluate_config(a: &EvaluateArgs) -> Result<RunConfig> {
    Ok(RunConfig::Evaluate(EvaluateConfig {
        input: a.input.clone(),
        functional: a.functional.build()?,
        lambda: a.lambda,
        test_functions: a
            .f
            .iter()
            .map(|s| TestFunction::by_name(s))
            .collect::<Result<_>>()?,
        out_dir: a.out.clone(),
    }))
}

fn estimate_config(a: &EstimateArgs) -> Result<(RunConfig, SeedSource)> {
    if !(a.tail_step > 0.0 && a.tail_max >= a.tail_step && a.tail_max.is_finite()) {
        return param("--tail-step and --tail-max must satisfy 0 < step <= max");
    }
    let steps = (a.tail_max / a.tail_step + 1e-9).floor() as usize;
    let v_method = match a.v_method {
        VMethodArg::Identity => VMethod::CovarianceIdentity,
        VMethodArg::Shells => VMethod::ShellQuadrature {
            rho_max: a.rho_max,
            shells: a.shells,
        },
    };
    let (seed, source) = seeded(a.seed, SeedSource::Flag)?;
    let cfg = EstimateConfig {
        functional: a.functional.build()?,
        dim: a.dim,
        tau_grid: a.tau.clone(),
        reps: a.reps,
        seed,
        half_width: a.half_width,
        v_method,
        gamma: a.gamma,
        tail_grid: (1..=steps).map(|i| a.tail_step * i as f64).collect(),
        battery: a.battery,
        out_dir: a.out.clone(),
    };
    Ok((RunConfig::Estimate(cfg), source))
}

fn verify_config(a: &VerifyArgs) -> Result<(RunConfig, SeedSource)> {
    let file = File::open(&a.config)
        .map_err(|e| Error::Parameter(format!("cannot open {}: {e}", a.config.display())))?;
    let mut experiment: ExperimentConfig = serde_json::from_reader(BufReader::new(file))?;
    let source = match env_seed()? {
        Some(s) => {
            experiment.seed = s;
            SeedSource::Environment
        }
        None => SeedSource::Config,
    };
    let problems = experiment.problems();
    if !problems.is_empty() {
        return param(format!("invalid config:\n  {}", problems.join("\n  ")));
    }
    Ok((
        RunConfig::Verify(VerifyConfig {
            experiment,
            out_dir: a.out.clone(),
        }),
        source,
    ))
}

/// JSON schema of [`ExperimentConfig`], as published in the docs.
pub fn config_schema() -> String {
    let schema = schemars::schema_for!(ExperimentConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => param("--workers must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Parameter(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Executes `config`, writes its manifest and returns it.
pub fn execute(
    mut config: RunConfig,
    seed_source: Option<SeedSource>,
    workers: Option<usize>,
) -> Result<RunManifest> {
    config.validate()?;
    let outcome = in_pool(workers, || config.execute())??;
    for line in &outcome.summary {
        println!("{line}");
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed(),
        seed_source: config.seed().and(seed_source),
        config,
        outputs: outcome.outputs,
        wall_times: outcome.wall_times,
        workers,
        passed: outcome.passed,
    };
    manifest.write(&manifest.config.manifest_path())?;
    Ok(manifest)
}

/// Re-executes a recorded run, optionally with outputs sent to `out`.
pub fn replay(path: &Path, out: Option<&Path>, workers: Option<usize>) -> Result<RunManifest> {
    let recorded = RunManifest::read(path)?;
    let mut config = recorded.config;
    if let Some(dir) = out {
        config.redirect(dir);
    }
    execute(config, recorded.seed.map(|_| SeedSource::Manifest), workers)
}

fn dispatch(cli: Cli) -> Result<RunManifest> {
    let w = cli.workers;
    match cli.command {
        Command::Generate(a) => {
            let (cfg, src) = generate_config(&a)?;
            execute(cfg, Some(src), w)
        }
        Command::Evaluate(a) => execute(evaluate_config(&a)?, None, w),
        Command::Estimate(a) => {
            let (cfg, src) = estimate_config(&a)?;
            execute(cfg, Some(src), w)
        }
        Command::Verify(a) => {
            let (cfg, src) = verify_config(&a)?;
            execute(cfg, Some(src), w)
        }
        Command::Replay(a) => replay(&a.manifest, a.out.as_deref(), w),
        Command::Schema => unreachable!("handled before dispatch"),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if matches!(cli.command, Command::Schema) {
        print!("{}", config_schema());
        return EXIT_OK;
    }
    match dispatch(cli) {
        Ok(m) if m.passed => EXIT_OK,
        Ok(_) => EXIT_CRITERION,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
