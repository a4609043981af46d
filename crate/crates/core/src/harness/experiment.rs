use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{
    predict_covariance, predict_mean, Prediction, Sampling, TestFunction, DEFAULT_QUADRATURE_NODES,
};
use crate::error::{param, Result};
use crate::estimators::{
    cumulant_stats, estimate_stab_tail, run_reps, CumulantStats, McConfig, TableSettings, VDTable,
    VMethod, MIN_REPLICATIONS,
};
use crate::functionals::{integrate, point_measure, WeightFunctional};
use crate::point_process::{
    attach_marks, sample_binomial, sample_inhomogeneous_poisson, DensityField, PointSet,
};
use crate::util::{compensated_sum, mean, sample_variance};
use crate::RngStream;

/// Input process and its size grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputGrid {
    /// `P_{λκ}` for each `λ`.
    Poisson { lambdas: Vec<f64> },
    /// `n` i.i.d. points with density `κ` for each `n`.
    Binomial { ns: Vec<usize> },
}

impl InputGrid {
    fn sizes(&self) -> Vec<f64> {
        match self {
            InputGrid::Poisson { lambdas } => lambdas.clone(),
            InputGrid::Binomial { ns } => ns.iter().map(|&n| n as f64).collect(),
        }
    }

    fn sampling(&self) -> Sampling {
        match self {
            InputGrid::Poisson { .. } => Sampling::Poisson,
            InputGrid::Binomial { .. } => Sampling::Binomial,
        }
    }
}

/// How the prediction table is built; every `None` is resolved to a
/// concrete value before the run and recorded.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct TablePlan {
    /// Default: `[1]` for homogeneous functionals, otherwise 9 log-spaced
    /// intensities covering the range of `κ`.
    #[serde(default)]
    pub tau_grid: Option<Vec<f64>>,
    /// Default: twice the first `t` with `r̂(t) < 10⁻³` at `τ = 1`.
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default)]
    pub v_method: VMethod,
    /// Default 2000.
    #[serde(default)]
    pub reps: Option<usize>,
}

pub const DEFAULT_TABLE_REPS: usize = 2000;
pub const TABLE_GRID_POINTS: usize = 9;

/// Pass-criterion tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default)]
pub struct Criteria {
    /// Allowed `|Var/n − prediction| / prediction` at the largest size.
    pub variance_rel_tol: f64,
    /// Allowed relative change of Var/n over the last grid step.
    pub convergence_rel_change: f64,
    pub max_abs_skewness: f64,
    pub max_abs_excess_kurtosis: f64,
    /// Joint standard errors allowed for the mean check.
    pub mean_se: f64,
    /// Joint standard errors allowed for the covariance check.
    pub covariance_se: f64,
}

impl Default for Criteria {
    fn default() -> Self {
        Criteria {
            variance_rel_tol: 0.15,
            convergence_rel_change: 0.10,
            max_abs_skewness: 0.25,
            max_abs_excess_kurtosis: 0.5,
            mean_se: 3.0,
            covariance_se: 3.0,
        }
    }
}

fn default_nodes() -> usize {
    DEFAULT_QUADRATURE_NODES
}

/// A replicated binomial or Poisson experiment with its predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ExperimentConfig {
    pub model: WeightFunctional,
    pub density: DensityField,
    pub input: InputGrid,
    pub test_functions: Vec<TestFunction>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default)]
    pub table: TablePlan,
    #[serde(default)]
    pub criteria: Criteria,
}

impl ExperimentConfig {
    /// Every problem with the configuration, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = vec![];
        let dim = self.density.dim();
        if let Err(e) = self.model.validate() {
            out.push(format!("model: {e}"));
        }
        if let Some(d) = self.model.required_dim() {
            if d != dim {
                out.push(format!(
                    "model: only defined in d = {d}, density has d = {dim}"
                ));
            }
        }
        if let Err(e) = self.density.validate() {
            out.push(format!("density: {e}"));
        } else if !self.density.window.is_box() {
            out.push("density: predictions need a box window".into());
        }
        let sizes = self.input.sizes();
        if sizes.is_empty() {
            out.push("input: empty grid".into());
        }
        if sizes.windows(2).any(|w| w[1] <= w[0]) {
            out.push("input: grid must be strictly increasing".into());
        }
        if sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            out.push("input: sizes must be positive".into());
        }
        if self.test_functions.is_empty() {
            out.push("test_functions: at least one is required".into());
        }
        for (i, f) in self.test_functions.iter().enumerate() {
            if let Err(e) = f.validate(dim) {
                out.push(format!("test_functions[{i}]: {e}"));
            }
        }
        if self.replications < MIN_REPLICATIONS {
            out.push(format!(
                "replications: at least {MIN_REPLICATIONS} required (got {})",
                self.replications
            ));
        }
        if self.quadrature_nodes == 0 {
            out.push("quadrature_nodes: must be positive".into());
        }
        if let Some(g) = &self.table.tau_grid {
            if g.is_empty() || g.windows(2).any(|w| w[1] <= w[0]) || g.iter().any(|t| !(*t > 0.0)) {
                out.push("table.tau_grid: must be positive and strictly increasing".into());
            }
        }
        if let Some(h) = self.table.half_width {
            if !(h.is_finite() && h > 0.0) {
                out.push("table.half_width: must be positive".into());
            }
        }
        if let Some(r) = self.table.reps {
            if r < MIN_REPLICATIONS {
                out.push(format!("table.reps: at least {MIN_REPLICATIONS} required"));
            }
        }
        if let Err(e) = self.table.v_method.validate() {
            out.push(format!("table.v_method: {e}"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            param(p.join("; "))
        }
    }

    /// Fills every defaulted field of the table plan. May run a short
    /// stabilization-tail estimate to pick the half-width.
    pub fn resolved(&self) -> Result<ExperimentConfig> {
        self.validate()?;
        let mut cfg = self.clone();
        let dim = cfg.density.dim();
        if cfg.table.tau_grid.is_none() {
            cfg.table.tau_grid = Some(match cfg.model.homogeneity_order() {
                Some(_) => vec![1.0],
                None => TableSettings::log_grid(
                    cfg.density.inf_bound(),
                    cfg.density.sup_bound(),
                    TABLE_GRID_POINTS,
                ),
            });
        }
        if cfg.table.reps.is_none() {
            cfg.table.reps = Some(DEFAULT_TABLE_REPS);
        }
        if cfg.table.half_width.is_none() {
            cfg.table.half_width = Some(default_half_width(&cfg.model, dim, cfg.seed)?);
        }
        Ok(cfg)
    }

    fn table_settings(&self) -> Result<TableSettings> {
        match (&self.table.tau_grid, self.table.half_width, self.table.reps) {
            (Some(g), Some(h), Some(r)) => Ok(TableSettings {
                tau_grid: g.clone(),
                half_width: h,
                v_method: self.table.v_method.clone(),
                reps: r,
            }),
            _ => param("table plan is not resolved"),
        }
    }
}

/// `2 t*` where `t*` is the first grid value with `r̂(t*) < 10⁻³` at `τ = 1`
/// (grid `0.25, 0.5, …, 12`, battery 16, 1000 replicates).
pub fn default_half_width(xi: &WeightFunctional, dim: usize, seed: u64) -> Result<f64> {
    let grid: Vec<f64> = (1..=48).map(|i| 0.25 * i as f64).collect();
    let mc = McConfig::new(dim, 1000, RngStream::derive_seed(seed, "half-width"));
    let tail = estimate_stab_tail(xi, 1.0, &grid, 16, &mc)?;
    tail.suggested_half_width().ok_or_else(|| {
        crate::Error::GridTooSmall(
            "no grid value has tail below 1e-3; give table.half_width".into(),
        )
    })
}

/// Empirical statistics of `⟨f, ·⟩` at one grid size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionStats {
    pub label: String,
    pub mean_over_n: f64,
    pub mean_se: f64,
    pub var_over_n: f64,
    pub var_se: f64,
    /// Cumulants of the standardized samples (empirical centring and scaling).
    pub cumulants: CumulantStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub n: f64,
    pub functions: Vec<FunctionStats>,
    /// Sample covariance matrix over `n`, row-major.
    pub covariance_over_n: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionPrediction {
    pub label: String,
    pub mean: Prediction,
    pub variance: Prediction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEntry {
    pub f1: String,
    pub f2: String,
    pub empirical: f64,
    /// Standard error of the empirical value.
    pub std_error: f64,
    pub predicted: f64,
    pub predicted_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CLTReport {
    pub config: ExperimentConfig,
    pub table: VDTable,
    pub grid: Vec<GridResult>,
    pub predictions: Vec<FunctionPrediction>,
    /// Pairs `i < j` at the largest grid size.
    pub covariance: Vec<CovarianceEntry>,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

fn sample_input(
    cfg: &ExperimentConfig,
    size: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<PointSet> {
    let x = match cfg.input {
        InputGrid::Poisson { .. } => sample_inhomogeneous_poisson(&cfg.density, size, rng)?,
        InputGrid::Binomial { .. } => sample_binomial(size as usize, &cfg.density, rng)?,
    };
    let law = cfg.model.mark_law();
    if law.is_empty() {
        Ok(x)
    } else {
        attach_marks(&x, &law, rng)
    }
}

/// `⟨f, ρ⟩` for every test function on one replicate.
pub(crate) fn replicate_masses(
    cfg: &ExperimentConfig,
    size: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Vec<f64>> {
    let x = sample_input(cfg, size, rng)?;
    let mu = point_measure(&cfg.model, &x, size)?;
    Ok(cfg
        .test_functions
        .iter()
        .map(|f| integrate(|p| f.eval(p), &mu))
        .collect())
}

/// Standard error of a mean of `values`.
fn se_of_mean(values: &[f64]) -> f64 {
    (sample_variance(values) / values.len() as f64).sqrt()
}

fn grid_result(labels: &[String], samples: &[Vec<f64>], n: f64) -> Result<GridResult> {
    let k = labels.len();
    let cols: Vec<Vec<f64>> = (0..k)
        .map(|j| samples.iter().map(|s| s[j]).collect())
        .collect();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let mut functions = Vec::with_capacity(k);
    for (j, c) in cols.iter().enumerate() {
        let var = sample_variance(c);
        let sq: Vec<f64> = c.iter().map(|v| (v - means[j]).powi(2)).collect();
        let standardized: Vec<f64> = if var > 0.0 {
            let sd = var.sqrt();
            c.iter().map(|v| (v - means[j]) / sd).collect()
        } else {
            c.clone()
        };
        functions.push(FunctionStats {
            label: labels[j].clone(),
            mean_over_n: means[j] / n,
            mean_se: se_of_mean(c) / n,
            var_over_n: var / n,
            var_se: se_of_mean(&sq) / n,
            cumulants: cumulant_stats(&standardized)?,
        });
    }
    let r = samples.len() as f64;
    let covariance_over_n = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| {
                    compensated_sum(
                        cols[a]
                            .iter()
                            .zip(&cols[b])
                            .map(|(x, y)| (x - means[a]) * (y - means[b])),
                    ) / (r - 1.0)
                        / n
                })
                .collect()
        })
        .collect();
    Ok(GridResult {
        n,
        functions,
        covariance_over_n,
    })
}

/// Runs the experiment on a configuration. Defaults are resolved first and
/// the resolved configuration is part of the report.
pub fn run_clt_experiment(cfg: &ExperimentConfig) -> Result<CLTReport> {
    let cfg = cfg.resolved()?;
    let mc = McConfig::new(cfg.density.dim(), cfg.table.reps.unwrap(), cfg.seed);
    let table = VDTable::estimate(&cfg.model, &cfg.table_settings()?, &mc)?;
    run_clt_with_table(&cfg, table)
}

/// Runs the replicated experiment against a precomputed table (the table
/// plan of `cfg` is then ignored).
pub fn run_clt_with_table(cfg: &ExperimentConfig, table: VDTable) -> Result<CLTReport> {
    cfg.validate()?;
    let cfg = cfg.clone();
    if table.dim != cfg.density.dim() {
        return param("table and density dimensions differ");
    }
    let labels: Vec<String> = cfg.test_functions.iter().map(|f| f.label()).collect();
    let sampling = cfg.input.sampling();

    let evals: Vec<Box<dyn Fn(&crate::Point) -> f64 + '_>> = cfg
        .test_functions
        .iter()
        .map(|f| Box::new(move |p: &crate::Point| f.eval(p)) as Box<dyn Fn(&crate::Point) -> f64>)
        .collect();
    let mut predictions = Vec::with_capacity(labels.len());
    for (j, f) in evals.iter().enumerate() {
        predictions.push(FunctionPrediction {
            label: labels[j].clone(),
            mean: predict_mean(&table, &cfg.density, f, cfg.quadrature_nodes)?,
            variance: predict_covariance(
                &table,
                &cfg.density,
                f,
                f,
                sampling,
                cfg.quadrature_nodes,
            )?,
        });
    }

    let sizes = cfg.input.sizes();
    let mut grid = Vec::with_capacity(sizes.len());
    let mut last_samples = vec![];
    for (g, &n) in sizes.iter().enumerate() {
        let seed = RngStream::derive_seed(cfg.seed, &format!("clt-{g}"));
        let samples = run_reps(seed, cfg.replications, |rng| replicate_masses(&cfg, n, rng))?;
        grid.push(grid_result(&labels, &samples, n)?);
        last_samples = samples;
    }

    let last = grid.last().unwrap();
    let r = last_samples.len() as f64;
    let mut covariance = vec![];
    for a in 0..labels.len() {
        for b in a + 1..labels.len() {
            let pred = predict_covariance(
                &table,
                &cfg.density,
                &evals[a],
                &evals[b],
                sampling,
                cfg.quadrature_nodes,
            )?;
            let (ma, mb) = (
                mean(&last_samples.iter().map(|s| s[a]).collect::<Vec<_>>()),
                mean(&last_samples.iter().map(|s| s[b]).collect::<Vec<_>>()),
            );
            let prods: Vec<f64> = last_samples
                .iter()
                .map(|s| (s[a] - ma) * (s[b] - mb))
                .collect();
            covariance.push(CovarianceEntry {
                f1: labels[a].clone(),
                f2: labels[b].clone(),
                empirical: last.covariance_over_n[a][b],
                std_error: se_of_mean(&prods) * r / (r - 1.0) / last.n,
                predicted: pred.value,
                predicted_se: pred.std_error,
            });
        }
    }

    drop(evals);
    let criteria = evaluate_criteria(&cfg.criteria, &grid, &predictions, &covariance);
    let passed = criteria.iter().all(|c| c.passed);
    Ok(CLTReport {
        config: cfg,
        table,
        grid,
        predictions,
        covariance,
        criteria,
        passed,
    })
}

/// Floating-point slack for comparisons whose standard error is exactly zero
/// (deterministic functionals such as counting).
const ROUNDOFF: f64 = 1e-12;

fn roundoff(a: f64, b: f64) -> f64 {
    ROUNDOFF * a.abs().max(b.abs()).max(1.0)
}

fn evaluate_criteria(
    c: &Criteria,
    grid: &[GridResult],
    predictions: &[FunctionPrediction],
    covariance: &[CovarianceEntry],
) -> Vec<CriterionResult> {
    let mut out = vec![];
    let last = grid.last().unwrap();
    let n = last.n;
    for (s, p) in last.functions.iter().zip(predictions) {
        let se = s.mean_se.hypot(p.mean.std_error);
        let diff = (s.mean_over_n - p.mean.value).abs();
        out.push(CriterionResult {
            name: format!("mean[{}]", s.label),
            passed: diff <= c.mean_se * se + roundoff(s.mean_over_n, p.mean.value),
            detail: format!(
                "n = {n}: mean/n {:.6} vs predicted {:.6} (|diff| {:.3e}, {} joint SE = {:.3e})",
                s.mean_over_n,
                p.mean.value,
                diff,
                c.mean_se,
                c.mean_se * se
            ),
        });

        let (emp, pred) = (s.var_over_n, p.variance.value);
        let (passed, rel) = if pred.abs() <= ROUNDOFF {
            let zero = emp.abs() <= ROUNDOFF;
            (zero, if zero { 0.0 } else { f64::INFINITY })
        } else {
            let rel = (emp - pred).abs() / pred.abs();
            (rel <= c.variance_rel_tol, rel)
        };
        out.push(CriterionResult {
            name: format!("variance[{}]", s.label),
            passed,
            detail: format!(
                "n = {n}: Var/n {emp:.6} (SE {:.2e}) vs predicted {pred:.6} (SE {:.2e}); relative error {rel:.4} (tolerance {})",
                s.var_se, p.variance.std_error, c.variance_rel_tol
            ),
        });

        if grid.len() >= 2 {
            let prev = &grid[grid.len() - 2];
            let v0 = prev
                .functions
                .iter()
                .find(|f| f.label == s.label)
                .map_or(0.0, |f| f.var_over_n);
            let change = if v0.abs() <= ROUNDOFF && emp.abs() <= ROUNDOFF {
                0.0
            } else {
                (emp - v0).abs() / v0.abs()
            };
            out.push(CriterionResult {
                name: format!("convergence[{}]", s.label),
                passed: change < c.convergence_rel_change,
                detail: format!(
                    "Var/n {v0:.6} at n = {} -> {emp:.6} at n = {n}: relative change {change:.4} (tolerance {})",
                    prev.n, c.convergence_rel_change
                ),
            });
        }

        let (passed, detail) = match (s.cumulants.skewness, s.cumulants.excess_kurtosis) {
            (Some(sk), Some(ek)) => (
                sk.abs() <= c.max_abs_skewness && ek.abs() <= c.max_abs_excess_kurtosis,
                format!(
                    "n = {n}: skewness {sk:.4} (limit {}), excess kurtosis {ek:.4} (limit {})",
                    c.max_abs_skewness, c.max_abs_excess_kurtosis
                ),
            ),
            _ => (
                true,
                format!("n = {n}: degenerate sample (zero variance); not applicable"),
            ),
        };
        out.push(CriterionResult {
            name: format!("normality[{}]", s.label),
            passed,
            detail,
        });
    }
    for e in covariance {
        let se = e.std_error.hypot(e.predicted_se);
        let diff = (e.empirical - e.predicted).abs();
        out.push(CriterionResult {
            name: format!("covariance[{},{}]", e.f1, e.f2),
            passed: diff <= c.covariance_se * se + roundoff(e.empirical, e.predicted),
            detail: format!(
                "n = {n}: empirical {:.6} vs predicted {:.6} (|diff| {:.3e}, {} joint SE = {:.3e})",
                e.empirical,
                e.predicted,
                diff,
                c.covariance_se,
                c.covariance_se * se
            ),
        });
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.16e}"))
}

impl CLTReport {
    /// CSV `f,n,var_over_n,se,prediction`.
    pub fn write_variance_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "f,n,var_over_n,se,prediction")?;
        for g in &self.grid {
            for (s, p) in g.functions.iter().zip(&self.predictions) {
                writeln!(
                    out,
                    "{},{},{:.16e},{:.16e},{:.16e}",
                    s.label, g.n, s.var_over_n, s.var_se, p.variance.value
                )?;
            }
        }
        Ok(())
    }

    /// CSV `f,n,skew,skew_se,exkurt,exkurt_se`; empty fields for degenerate samples.
    pub fn write_cumulants_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "f,n,skew,skew_se,exkurt,exkurt_se")?;
        for g in &self.grid {
            for s in &g.functions {
                let c = &s.cumulants;
                writeln!(
                    out,
                    "{},{},{},{:.16e},{},{:.16e}",
                    s.label,
                    g.n,
                    opt(c.skewness),
                    c.skewness_se,
                    opt(c.excess_kurtosis),
                    c.excess_kurtosis_se
                )?;
            }
        }
        Ok(())
    }

    /// CSV `f1,f2,empirical,predicted,se` at the largest grid size.
    pub fn write_covariance_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "f1,f2,empirical,predicted,se")?;
        for e in &self.covariance {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e}",
                e.f1, e.f2, e.empirical, e.predicted, e.std_error
            )?;
        }
        Ok(())
    }

    /// Writes `clt_report.json` and the three CSVs into `dir`; returns the paths.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join("clt_report.json");
        let mut w = BufWriter::new(File::create(&json)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        let mut paths = vec![json];
        type Writer<'a> = fn(&CLTReport, BufWriter<File>) -> Result<()>;
        let csvs: [(&str, Writer); 3] = [
            ("variance_vs_n.csv", |r, w| r.write_variance_csv(w)),
            ("cumulants.csv", |r, w| r.write_cumulants_csv(w)),
            ("covariance.csv", |r, w| r.write_covariance_csv(w)),
        ];
        for (name, write) in csvs {
            let p = dir.join(name);
            write(self, BufWriter::new(File::create(&p)?))?;
            paths.push(p);
        }
        Ok(paths)
    }
}
