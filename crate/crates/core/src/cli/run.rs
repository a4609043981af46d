//! Fully resolved command configurations. Executing one depends on nothing
//! but its fields, which is what makes a manifest replayable.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::estimators::{
    estimate_stab_tail, McConfig, TableSettings, VDTable, VMethod, MIN_REPLICATIONS, TAU_RANGE,
};
use crate::functionals::{
    birth_growth, integrate, point_measure, rsa_pack, write_acceptance, WeightFunctional,
};
use crate::harness::{
    run_clt_experiment, scaling_check, CLTReport, ExperimentConfig, TestFunction,
};
use crate::point_process::{
    attach_marks, read_point_set, rescale, sample_binomial, sample_homogeneous_poisson,
    sample_inhomogeneous_poisson, write_point_set, DensityField, MarkLaw, PointSet, Window,
};
use crate::RngStream;

/// How `generate` draws its points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "kebab-case")]
pub enum Sampler {
    /// Homogeneous Poisson process of intensity `tau` on `window`.
    HomogeneousPoisson {
        tau: f64,
        window: Window,
    },
    /// Poisson process with intensity `λ κ`.
    Poisson {
        lambda: f64,
        density: DensityField,
    },
    Binomial {
        n: usize,
        density: DensityField,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub sampler: Sampler,
    pub marks: MarkLaw,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluateConfig {
    pub input: PathBuf,
    pub functional: WeightFunctional,
    pub lambda: f64,
    pub test_functions: Vec<TestFunction>,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub functional: WeightFunctional,
    pub dim: usize,
    pub tau_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Filled from the stabilization tail when not given.
    pub half_width: Option<f64>,
    pub v_method: VMethod,
    pub gamma: Option<f64>,
    /// Stabilization-tail grid at `τ = 1`.
    pub tail_grid: Vec<f64>,
    pub battery: usize,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub experiment: ExperimentConfig,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Generate(GenerateConfig),
    Evaluate(EvaluateConfig),
    Estimate(EstimateConfig),
    Verify(VerifyConfig),
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub wall_times: BTreeMap<String, f64>,
    /// False when a pass criterion failed.
    pub passed: bool,
    pub summary: Vec<String>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn timed<T>(
    times: &mut BTreeMap<String, f64>,
    name: &str,
    f: impl FnOnce() -> Result<T>,
) -> Result<T> {
    let t = Instant::now();
    let out = f()?;
    times.insert(name.to_string(), t.elapsed().as_secs_f64());
    Ok(out)
}

impl RunConfig {
    pub fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::Generate(c) => Some(c.seed),
            RunConfig::Estimate(c) => Some(c.seed),
            RunConfig::Verify(c) => Some(c.experiment.seed),
            RunConfig::Evaluate(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RunConfig::Generate(c) => c.validate(),
            RunConfig::Evaluate(c) => c.validate(),
            RunConfig::Estimate(c) => c.validate(),
            RunConfig::Verify(c) => c.experiment.validate(),
        }
    }

    /// Where the manifest of this run goes.
    pub fn manifest_path(&self) -> PathBuf {
        match self {
            RunConfig::Generate(c) => {
                let mut name = c.output.file_name().unwrap_or_default().to_os_string();
                name.push(".manifest.json");
                c.output.with_file_name(name)
            }
            RunConfig::Evaluate(c) => c.out_dir.join("manifest.json"),
            RunConfig::Estimate(c) => c.out_dir.join("manifest.json"),
            RunConfig::Verify(c) => c.out_dir.join("manifest.json"),
        }
    }

    /// Sends every output into `dir`, keeping file names.
    pub fn redirect(&mut self, dir: &Path) {
        match self {
            RunConfig::Generate(c) => c.output = dir.join(c.output.file_name().unwrap_or_default()),
            RunConfig::Evaluate(c) => c.out_dir = dir.to_path_buf(),
            RunConfig::Estimate(c) => c.out_dir = dir.to_path_buf(),
            RunConfig::Verify(c) => c.out_dir = dir.to_path_buf(),
        }
    }

    /// Runs the command. Any default that needed computing is written back
    /// into `self` so the recorded config is complete.
    pub fn execute(&mut self) -> Result<Outcome> {
        self.validate()?;
        match self {
            RunConfig::Generate(c) => c.execute(),
            RunConfig::Evaluate(c) => c.execute(),
            RunConfig::Estimate(c) => c.execute(),
            RunConfig::Verify(c) => c.execute(),
        }
    }
}

impl GenerateConfig {
    fn validate(&self) -> Result<()> {
        match &self.sampler {
            Sampler::HomogeneousPoisson { tau, window } => {
                window.validate()?;
                if !(tau.is_finite() && *tau > 0.0) {
                    return param("--tau must be positive");
                }
            }
            Sampler::Poisson { lambda, density } => {
                density.validate()?;
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return param("--lambda must be positive");
                }
            }
            Sampler::Binomial { n, density } => {
                density.validate()?;
                if *n == 0 {
                    return param("--n must be at least 1");
                }
            }
        }
        self.marks.validate()
    }

    fn execute(&self) -> Result<Outcome> {
        let mut rng = RngStream::new(RngStream::derive_seed(self.seed, "generate"), 0).rng();
        let mut out = Outcome {
            passed: true,
            ..Outcome::default()
        };
        let x = timed(&mut out.wall_times, "sample", || {
            let x = match &self.sampler {
                Sampler::HomogeneousPoisson { tau, window } => {
                    sample_homogeneous_poisson(*tau, window, &mut rng)?
                }
                Sampler::Poisson { lambda, density } => {
                    sample_inhomogeneous_poisson(density, *lambda, &mut rng)?
                }
                Sampler::Binomial { n, density } => sample_binomial(*n, density, &mut rng)?,
            };
            if self.marks.is_empty() {
                Ok(x)
            } else {
                attach_marks(&x, &self.marks, &mut rng)
            }
        })?;
        write_with(&self.output, |w| write_point_set(&x, w))?;
        out.summary.push(format!(
            "{} points written to {}",
            x.len(),
            self.output.display()
        ));
        out.outputs.push(self.output.clone());
        Ok(out)
    }
}

#[derive(Serialize)]
struct Integral {
    f: String,
    value: f64,
}

#[derive(Serialize)]
struct EvaluateSummary<'a> {
    input: &'a Path,
    points: usize,
    lambda: f64,
    total_mass: f64,
    integrals: Vec<Integral>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accepted: Option<usize>,
}

/// Reads a point-set file; a missing file is a usage error, a malformed
/// one a parse error with its line number.
pub fn load_point_set(path: &Path) -> Result<PointSet> {
    let file = File::open(path)
        .map_err(|e| Error::Parameter(format!("cannot open {}: {e}", path.display())))?;
    read_point_set(BufReader::new(file))
}

impl EvaluateConfig {
    fn validate(&self) -> Result<()> {
        self.functional.validate()?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return param("--lambda must be positive");
        }
        if self.test_functions.is_empty() {
            return param("at least one test function is required");
        }
        Ok(())
    }

    fn execute(&self) -> Result<Outcome> {
        let x = load_point_set(&self.input)?;
        let xi = &self.functional;
        if let Some(d) = xi.required_dim() {
            if d != x.dim() {
                return param(format!(
                    "this functional is only defined in d = {d}, input has d = {}",
                    x.dim()
                ));
            }
        }
        xi.check_input(&x)?;
        for f in &self.test_functions {
            f.validate(x.dim())?;
        }
        let mut out = Outcome {
            passed: true,
            ..Outcome::default()
        };
        let mu = timed(&mut out.wall_times, "evaluate", || {
            point_measure(xi, &x, self.lambda)
        })?;
        let measure = self.out_dir.join("measure.csv");
        write_with(&measure, |w| mu.write_csv(w))?;
        out.outputs.push(measure);

        let acceptance = match xi {
            WeightFunctional::Rsa { ball_volume } => {
                Some(rsa_pack(&rescale(&x, self.lambda)?, *ball_volume)?)
            }
            WeightFunctional::BirthGrowth { speed, .. } => {
                Some(birth_growth(&rescale(&x, self.lambda)?, *speed)?)
            }
            _ => None,
        };
        if let Some(a) = &acceptance {
            let path = self.out_dir.join("acceptance.csv");
            write_with(&path, |w| write_acceptance(a, w))?;
            out.outputs.push(path);
        }

        let summary = EvaluateSummary {
            input: &self.input,
            points: x.len(),
            lambda: self.lambda,
            total_mass: mu.total(),
            integrals: self
                .test_functions
                .iter()
                .map(|f| Integral {
                    f: f.label(),
                    value: integrate(|p| f.eval(p), &mu),
                })
                .collect(),
            accepted: acceptance.as_ref().map(|a| a.count()),
        };
        out.summary.push(format!("points: {}", summary.points));
        out.summary
            .push(format!("total mass: {}", summary.total_mass));
        for i in &summary.integrals {
            out.summary.push(format!("<{}, mu>: {}", i.f, i.value));
        }
        if let Some(a) = summary.accepted {
            out.summary.push(format!("accepted: {a}"));
        }
        let path = self.out_dir.join("summary.json");
        write_json(&path, &summary)?;
        out.outputs.push(path);
        Ok(out)
    }
}

impl EstimateConfig {
    fn validate(&self) -> Result<()> {
        self.functional.validate()?;
        if !(1..=3).contains(&self.dim) {
            return param("--dim must be 1, 2 or 3");
        }
        if let Some(d) = self.functional.required_dim() {
            if d != self.dim {
                return param(format!("this functional is only defined in d = {d}"));
            }
        }
        let t = &self.tau_grid;
        if t.is_empty() || t.windows(2).any(|w| w[1] <= w[0]) {
            return param("--tau must be a strictly increasing list");
        }
        if t.iter().any(|&x| !(TAU_RANGE.0..=TAU_RANGE.1).contains(&x)) {
            return param(format!(
                "--tau values must lie in [{}, {}]",
                TAU_RANGE.0, TAU_RANGE.1
            ));
        }
        if self.reps < MIN_REPLICATIONS {
            return param(format!("--reps must be at least {MIN_REPLICATIONS}"));
        }
        if let Some(h) = self.half_width {
            if !(h.is_finite() && h > 0.0) {
                return param("--half-width must be positive");
            }
        }
        if let Some(g) = self.gamma {
            if !g.is_finite() {
                return param("--gamma must be finite");
            }
        }
        let g = &self.tail_grid;
        if g.is_empty()
            || g[0] <= 0.0
            || g.windows(2).any(|w| w[1] <= w[0])
            || g.iter().any(|v| !v.is_finite())
        {
            return param("stabilization grid must be positive and strictly increasing");
        }
        if self.battery == 0 {
            return param("--battery must be positive");
        }
        self.v_method.validate()
    }

    fn execute(&mut self) -> Result<Outcome> {
        let mc = McConfig::new(self.dim, self.reps, self.seed);
        let xi = self.functional.clone();
        let mut out = Outcome {
            passed: true,
            ..Outcome::default()
        };
        let tail = timed(&mut out.wall_times, "tail", || {
            estimate_stab_tail(&xi, 1.0, &self.tail_grid, self.battery, &mc)
        })?;
        let half_width = match self.half_width {
            Some(h) => h,
            None => tail.suggested_half_width().ok_or_else(|| {
                Error::GridTooSmall(
                    "no grid value has tail below 1e-3; raise --tail-max or give --half-width"
                        .into(),
                )
            })?,
        };
        self.half_width = Some(half_width);
        let settings = TableSettings {
            tau_grid: self.tau_grid.clone(),
            half_width,
            v_method: self.v_method.clone(),
            reps: self.reps,
        };
        let table = timed(&mut out.wall_times, "table", || {
            VDTable::estimate(&xi, &settings, &mc)
        })?;

        let path = self.out_dir.join("vd_table.json");
        write_json(&path, &table)?;
        out.outputs.push(path);
        let path = self.out_dir.join("tail.csv");
        write_with(&path, |w| tail.write_csv(w))?;
        out.outputs.push(path);

        for (i, tau) in table.tau_grid.iter().enumerate() {
            let (m, v, d) = (
                &table.mean_values[i],
                &table.v_values[i],
                &table.d_values[i],
            );
            out.summary.push(format!(
                "tau {tau}: mean {:.6} ± {:.6}, V {:.6} ± {:.6}, D {:.6} ± {:.6}",
                m.value, m.std_error, v.value, v.std_error, d.value, d.std_error
            ));
        }
        if let Some(gamma) = self.gamma {
            let report = scaling_check(&table, gamma, 3.0);
            let path = self.out_dir.join("scaling.csv");
            write_with(&path, |w| report.write_csv(w))?;
            out.outputs.push(path);
            let path = self.out_dir.join("scaling.json");
            write_json(&path, &report)?;
            out.outputs.push(path);
            out.summary.push(format!(
                "scaling check at gamma {gamma}: V max z {:.3}, D max z {:.3} -> {}",
                report.v_max_z,
                report.d_max_z,
                if report.passed { "pass" } else { "FAIL" }
            ));
            out.passed = report.passed;
        }
        Ok(out)
    }
}

impl VerifyConfig {
    fn execute(&mut self) -> Result<Outcome> {
        let mut out = Outcome::default();
        self.experiment = timed(&mut out.wall_times, "resolve", || {
            self.experiment.resolved()
        })?;
        let report: CLTReport = timed(&mut out.wall_times, "experiment", || {
            run_clt_experiment(&self.experiment)
        })?;
        out.outputs = report.write_all(&self.out_dir)?;
        for c in &report.criteria {
            out.summary.push(format!(
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out.passed = report.passed;
        Ok(out)
    }
}
