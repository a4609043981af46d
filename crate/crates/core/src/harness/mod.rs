//! Limit predictions from [`VDTable`] inputs and the replicated experiments
//! that check them.
//!
//! Predictions are integrals over the window of the density `κ`:
//!
//! * mean: `∫ f m(κ) κ`,
//! * Poisson variance: `∫ f² V(κ) κ`,
//! * binomial variance: `∫ f² V(κ) κ − (∫ f D(κ) κ)²`,
//!
//! evaluated with a tensor Gauss–Legendre rule. For homogeneous functionals
//! the table applies the scaling law, which turns these into the closed
//! forms `V(1) ∫ f² κ^{(d−2γ)/d} − D(1)² (∫ f κ^{(d−γ)/d})²`.

mod experiment;

pub use experiment::{
    default_half_width, run_clt_experiment, run_clt_with_table, CLTReport, CovarianceEntry,
    Criteria, CriterionResult, ExperimentConfig, FunctionPrediction, FunctionStats, GridResult,
    InputGrid, TablePlan,
};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::estimators::{Ingredient, McConfig, TableSettings, VDTable};
use crate::functionals::WeightFunctional;
use crate::point_process::{DensityField, Point, Window};
use crate::util::{compensated_sum, gauss_legendre};

pub const DEFAULT_QUADRATURE_NODES: usize = 24;

/// A continuous test function on the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `f ≡ value` (default 1).
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// `f(x) = x_{axis+1}`.
    Coordinate {
        #[serde(default)]
        axis: usize,
    },
    /// `f(x) = cos(2π x_{axis+1})`.
    Cosine {
        #[serde(default)]
        axis: usize,
    },
    /// Piecewise-linear interpolation of `values` at increasing `knots`
    /// along one coordinate, constant beyond the end knots.
    Tabulated {
        #[serde(default)]
        axis: usize,
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl TestFunction {
    pub fn one() -> Self {
        TestFunction::Constant { value: 1.0 }
    }

    pub fn x1() -> Self {
        TestFunction::Coordinate { axis: 0 }
    }

    pub fn cos_x1() -> Self {
        TestFunction::Cosine { axis: 0 }
    }

    /// Parses `one`, `x1`..`x3`, `cos`/`cos1`..`cos3`, or a number.
    pub fn by_name(name: &str) -> Result<Self> {
        let axis = |s: &str| -> Result<usize> {
            match s {
                "" | "1" => Ok(0),
                "2" => Ok(1),
                "3" => Ok(2),
                _ => param(format!("unknown test function '{name}'")),
            }
        };
        match name {
            "one" | "1" => Ok(Self::one()),
            n if n.starts_with("cos") => Ok(TestFunction::Cosine {
                axis: axis(&n[3..])?,
            }),
            n if n.starts_with('x') && n.len() == 2 => Ok(TestFunction::Coordinate {
                axis: axis(&n[1..])?,
            }),
            n => match n.parse::<f64>() {
                Ok(value) if value.is_finite() => Ok(TestFunction::Constant { value }),
                _ => param(format!(
                    "unknown test function '{name}' (one|x1|x2|x3|cos|cos2|cos3|<number>)"
                )),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Constant { value } if *value == 1.0 => "one".into(),
            TestFunction::Constant { value } => format!("{value}"),
            TestFunction::Coordinate { axis } => format!("x{}", axis + 1),
            TestFunction::Cosine { axis } => format!("cos{}", axis + 1),
            TestFunction::Tabulated { axis, .. } => format!("tabulated{}", axis + 1),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let axis = match self {
            TestFunction::Constant { value } => {
                if !value.is_finite() {
                    return param("constant test function must be finite");
                }
                return Ok(());
            }
            TestFunction::Coordinate { axis } | TestFunction::Cosine { axis } => *axis,
            TestFunction::Tabulated {
                axis,
                knots,
                values,
            } => {
                if knots.len() < 2 || knots.len() != values.len() {
                    return param(
                        "tabulated test function needs matching knots and values (at least 2)",
                    );
                }
                if knots.windows(2).any(|w| !(w[1] > w[0]))
                    || knots.iter().chain(values).any(|v| !v.is_finite())
                {
                    return param(
                        "tabulated knots must be finite and strictly increasing, values finite",
                    );
                }
                *axis
            }
        };
        if axis >= dim {
            return param(format!(
                "test function axis {} exceeds dimension {dim}",
                axis + 1
            ));
        }
        Ok(())
    }

    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            TestFunction::Constant { value } => *value,
            TestFunction::Coordinate { axis } => x.coord(*axis),
            TestFunction::Cosine { axis } => (std::f64::consts::TAU * x.coord(*axis)).cos(),
            TestFunction::Tabulated {
                axis,
                knots,
                values,
            } => {
                let t = x.coord(*axis);
                let k = knots.partition_point(|&v| v <= t);
                if k == 0 {
                    values[0]
                } else if k == knots.len() {
                    values[k - 1]
                } else {
                    let s = (t - knots[k - 1]) / (knots[k] - knots[k - 1]);
                    values[k - 1] + s * (values[k] - values[k - 1])
                }
            }
        }
    }
}

/// Tensor Gauss–Legendre nodes and weights on a box window.
pub fn quadrature(window: &Window, nodes: usize) -> Result<Vec<(Point, f64)>> {
    window.validate()?;
    if !window.is_box() {
        return param("prediction quadrature needs a box window");
    }
    if nodes == 0 {
        return param("quadrature needs at least one node per axis");
    }
    let (lo, hi) = window.bounds();
    let (t, w) = gauss_legendre(nodes);
    let d = window.dim();
    let mut out = Vec::with_capacity(nodes.pow(d as u32));
    let mut idx = vec![0usize; d];
    loop {
        let mut c = [0.0; 3];
        let mut weight = 1.0;
        for a in 0..d {
            let half = 0.5 * (hi.coord(a) - lo.coord(a));
            c[a] = lo.coord(a) + half * (t[idx[a]] + 1.0);
            weight *= half * w[idx[a]];
        }
        out.push((Point::new(&c[..d])?, weight));
        let mut a = 0;
        loop {
            if a == d {
                return Ok(out);
            }
            idx[a] += 1;
            if idx[a] < nodes {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// A predicted limit with a standard error propagated from the table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: f64,
    pub std_error: f64,
}

/// Which input process a variance or covariance refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    Binomial,
    Poisson,
}

/// `∫ g q(κ) κ` with the fully correlated error bound `∫ |g| se_q(κ) κ`.
fn ingredient_integral(
    table: &VDTable,
    kappa: &DensityField,
    q: Ingredient,
    g: impl Fn(&Point) -> f64,
    nodes: usize,
) -> Result<Prediction> {
    if table.dim != kappa.dim() {
        return param("table and density dimensions differ");
    }
    table.covers(kappa.inf_bound(), kappa.sup_bound())?;
    let rule = quadrature(&kappa.window, nodes)?;
    let mut value = Vec::with_capacity(rule.len());
    let mut err = Vec::with_capacity(rule.len());
    for (x, w) in &rule {
        let k = kappa.evaluate(x);
        let (v, se) = table.at(q, k)?;
        let gx = g(x);
        value.push(w * gx * v * k);
        err.push(w * gx.abs() * se * k);
    }
    Ok(Prediction {
        value: compensated_sum(value),
        std_error: compensated_sum(err),
    })
}

/// `lim E⟨f, ρ_n⟩ / n = ∫ f(x) E ξ(0; P_{κ(x)}) κ(x) dx`.
pub fn predict_mean(
    table: &VDTable,
    kappa: &DensityField,
    f: impl Fn(&Point) -> f64,
    nodes: usize,
) -> Result<Prediction> {
    ingredient_integral(table, kappa, Ingredient::Mean, f, nodes)
}

/// `lim Var⟨f, μ_{λκ}⟩ / λ = ∫ f² V(κ) κ`.
pub fn predict_variance_poisson(
    table: &VDTable,
    kappa: &DensityField,
    f: impl Fn(&Point) -> f64,
    nodes: usize,
) -> Result<Prediction> {
    ingredient_integral(table, kappa, Ingredient::V, |x| f(x).powi(2), nodes)
}

/// `lim Var⟨f, ρ_n⟩ / n = ∫ f² V(κ) κ − (∫ f D(κ) κ)²`.
pub fn predict_variance_binomial(
    table: &VDTable,
    kappa: &DensityField,
    f: impl Fn(&Point) -> f64,
    nodes: usize,
) -> Result<Prediction> {
    predict_covariance(table, kappa, &f, &f, Sampling::Binomial, nodes)
}

/// Limiting covariance of `⟨f1, ·⟩` and `⟨f2, ·⟩` per unit intensity:
/// `∫ f1 f2 V(κ) κ`, minus `∫ f1 D(κ) κ · ∫ f2 D(κ) κ` for binomial input.
pub fn predict_covariance(
    table: &VDTable,
    kappa: &DensityField,
    f1: impl Fn(&Point) -> f64,
    f2: impl Fn(&Point) -> f64,
    sampling: Sampling,
    nodes: usize,
) -> Result<Prediction> {
    let v = ingredient_integral(table, kappa, Ingredient::V, |x| f1(x) * f2(x), nodes)?;
    if sampling == Sampling::Poisson {
        return Ok(v);
    }
    let a = ingredient_integral(table, kappa, Ingredient::D, &f1, nodes)?;
    let b = ingredient_integral(table, kappa, Ingredient::D, &f2, nodes)?;
    Ok(Prediction {
        value: v.value - a.value * b.value,
        std_error: v
            .std_error
            .hypot(b.value.abs() * a.std_error)
            .hypot(a.value.abs() * b.std_error),
    })
}

/// One intensity of a scaling check: `V̂(τ) τ^{2γ/d}` and `D̂(τ) τ^{γ/d}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub tau: f64,
    pub v_scaled: f64,
    pub v_se: f64,
    pub d_scaled: f64,
    pub d_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub gamma: f64,
    pub rows: Vec<ScalingRow>,
    /// Largest pairwise `|a − b| / sqrt(se_a² + se_b²)` per row kind.
    pub v_max_z: f64,
    pub d_max_z: f64,
    pub v_pass: bool,
    pub d_pass: bool,
    pub passed: bool,
}

impl ScalingReport {
    /// CSV `tau,v_scaled,v_se,d_scaled,d_se`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "tau,v_scaled,v_se,d_scaled,d_se")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.tau, r.v_scaled, r.v_se, r.d_scaled, r.d_se
            )?;
        }
        Ok(())
    }
}

fn max_pairwise_z(vals: &[(f64, f64)]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vals.iter().enumerate() {
        for b in &vals[i + 1..] {
            let diff = (a.0 - b.0).abs();
            let se = a.1.hypot(b.1);
            let z = if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
    }
    worst
}

/// Checks the scaling law with exponent `gamma` (which need not be the
/// functional's own, for negative controls): pass iff all rescaled values
/// are pairwise within `k` joint standard errors.
pub fn scaling_check(table: &VDTable, gamma: f64, k: f64) -> ScalingReport {
    let d = table.dim as f64;
    let rows: Vec<ScalingRow> = table
        .tau_grid
        .iter()
        .zip(table.v_values.iter().zip(&table.d_values))
        .map(|(&tau, (v, dd))| {
            let (fv, fd) = (tau.powf(2.0 * gamma / d), tau.powf(gamma / d));
            ScalingRow {
                tau,
                v_scaled: v.value * fv,
                v_se: v.std_error * fv,
                d_scaled: dd.value * fd,
                d_se: dd.std_error * fd,
            }
        })
        .collect();
    let v_max_z = max_pairwise_z(
        &rows
            .iter()
            .map(|r| (r.v_scaled, r.v_se))
            .collect::<Vec<_>>(),
    );
    let d_max_z = max_pairwise_z(
        &rows
            .iter()
            .map(|r| (r.d_scaled, r.d_se))
            .collect::<Vec<_>>(),
    );
    ScalingReport {
        gamma,
        rows,
        v_max_z,
        d_max_z,
        v_pass: v_max_z <= k,
        d_pass: d_max_z <= k,
        passed: v_max_z <= k && d_max_z <= k,
    }
}

/// Estimates a table on `settings` and checks the scaling law at `gamma`.
pub fn run_scaling_check(
    xi: &WeightFunctional,
    gamma: f64,
    settings: &TableSettings,
    mc: &McConfig,
) -> Result<(VDTable, ScalingReport)> {
    let table = VDTable::estimate(xi, settings, mc)?;
    let report = scaling_check(&table, gamma, 3.0);
    Ok((table, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_polynomials() {
        let rule = quadrature(&Window::unit_cube(2), 6).unwrap();
        let total: f64 = rule
            .iter()
            .map(|(x, w)| w * x.coord(0).powi(3) * x.coord(1))
            .sum();
        assert!((total - 0.125).abs() < 1e-14);
        assert!(quadrature(
            &Window::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0
            },
            4
        )
        .is_err());
    }

    #[test]
    fn test_functions() {
        let p = Point::new(&[0.25, 0.5]).unwrap();
        assert_eq!(TestFunction::by_name("x1").unwrap().eval(&p), 0.25);
        assert!(TestFunction::by_name("cos").unwrap().eval(&p).abs() < 1e-15);
        assert_eq!(TestFunction::by_name("x2").unwrap().label(), "x2");
        let t = TestFunction::Tabulated {
            axis: 1,
            knots: vec![0.0, 1.0],
            values: vec![2.0, 4.0],
        };
        t.validate(2).unwrap();
        assert_eq!(t.eval(&p), 3.0);
        assert!(TestFunction::Coordinate { axis: 2 }.validate(2).is_err());
        assert!(TestFunction::by_name("y").is_err());
    }
}
