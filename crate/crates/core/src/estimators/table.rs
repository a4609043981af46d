use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{estimate_d, estimate_v, estimate_xi_mean, EstimateReport, McConfig, VMethod};
use crate::error::{param, Error, Result};
use crate::functionals::WeightFunctional;
use crate::RngStream;

/// How a [`VDTable`] is estimated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct TableSettings {
    /// Increasing intensities.
    pub tau_grid: Vec<f64>,
    /// Sampling half-width at `τ = 1`; multiplied by `max(1, τ^{-1/d})` at
    /// other intensities, so sparser inputs see the same expected number of
    /// points and the window never shrinks below the fixed-range reach.
    pub half_width: f64,
    #[serde(default)]
    pub v_method: VMethod,
    pub reps: usize,
}

impl TableSettings {
    /// `points` log-spaced intensities covering `[lo, hi]` (a single point
    /// when they coincide).
    pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
        if points < 2 || (hi - lo).abs() <= 1e-12 * hi.abs() {
            return vec![lo];
        }
        let (a, b) = (lo.ln(), hi.ln());
        (0..points)
            .map(|i| match i {
                0 => lo,
                i if i == points - 1 => hi,
                i => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_grid.is_empty() {
            return param("tau grid is empty");
        }
        if self.tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return param("tau grid must be strictly increasing");
        }
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return param("half_width must be positive");
        }
        self.v_method.validate()
    }
}

/// Which limit ingredient to read from a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ingredient {
    Mean,
    V,
    D,
}

/// `E ξ(0; P_τ)`, `V^ξ(τ)` and `D^ξ(τ)` on a grid of intensities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VDTable {
    pub dim: usize,
    pub tau_grid: Vec<f64>,
    pub mean_values: Vec<EstimateReport>,
    pub v_values: Vec<EstimateReport>,
    pub d_values: Vec<EstimateReport>,
    /// `γ` when the functional is homogeneous; values at other intensities
    /// then follow the scaling law instead of interpolation.
    pub homogeneity_order: Option<f64>,
}

impl VDTable {
    /// Estimates every ingredient at every grid intensity. Grid point `i`
    /// uses the sub-seed `derive_seed(seed, "tau-i")`, so grid points are
    /// independent.
    pub fn estimate(
        xi: &WeightFunctional,
        settings: &TableSettings,
        mc: &McConfig,
    ) -> Result<VDTable> {
        settings.validate()?;
        mc.validate()?;
        xi.validate()?;
        let d = mc.dim as f64;
        let (mut mean_values, mut v_values, mut d_values) = (vec![], vec![], vec![]);
        for (i, &tau) in settings.tau_grid.iter().enumerate() {
            let sub = McConfig {
                seed: RngStream::derive_seed(mc.seed, &format!("tau-{i}")),
                reps: settings.reps,
                ..mc.clone()
            };
            let l = settings.half_width * tau.powf(-1.0 / d).max(1.0);
            mean_values.push(estimate_xi_mean(xi, tau, l, &sub, None)?);
            v_values.push(estimate_v(xi, tau, l, &settings.v_method, &sub, None)?);
            d_values.push(estimate_d(xi, tau, l, &sub, None)?);
        }
        Ok(VDTable {
            dim: mc.dim,
            tau_grid: settings.tau_grid.clone(),
            mean_values,
            v_values,
            d_values,
            homogeneity_order: xi.homogeneity_order(),
        })
    }

    fn reports(&self, q: Ingredient) -> &[EstimateReport] {
        match q {
            Ingredient::Mean => &self.mean_values,
            Ingredient::V => &self.v_values,
            Ingredient::D => &self.d_values,
        }
    }

    /// Exponent `p` in `q(τ) = q(1) τ^{-p}`.
    fn scaling_exponent(&self, q: Ingredient, gamma: f64) -> f64 {
        let p = gamma / self.dim as f64;
        if q == Ingredient::V {
            2.0 * p
        } else {
            p
        }
    }

    /// Inverse-variance pooled `q(τ_i) τ_i^{p}` over the grid, with its
    /// standard error. Exact (zero-error) entries take precedence.
    pub fn pooled_constant(&self, q: Ingredient, gamma: f64) -> (f64, f64) {
        let p = self.scaling_exponent(q, gamma);
        let scaled: Vec<(f64, f64)> = self
            .tau_grid
            .iter()
            .zip(self.reports(q))
            .map(|(t, r)| (r.value * t.powf(p), r.std_error * t.powf(p)))
            .collect();
        let exact: Vec<f64> = scaled.iter().filter(|s| s.1 == 0.0).map(|s| s.0).collect();
        if !exact.is_empty() {
            return (exact.iter().sum::<f64>() / exact.len() as f64, 0.0);
        }
        let wsum: f64 = scaled.iter().map(|s| 1.0 / (s.1 * s.1)).sum();
        let c = scaled.iter().map(|s| s.0 / (s.1 * s.1)).sum::<f64>() / wsum;
        (c, wsum.sqrt().recip())
    }

    /// `(value, std_error)` of an ingredient at intensity `tau`.
    pub fn at(&self, q: Ingredient, tau: f64) -> Result<(f64, f64)> {
        if !(tau.is_finite() && tau > 0.0) {
            return param(format!("intensity {tau} must be positive"));
        }
        if let Some(gamma) = self.homogeneity_order {
            let (c, se) = self.pooled_constant(q, gamma);
            let f = tau.powf(-self.scaling_exponent(q, gamma));
            return Ok((c * f, se * f));
        }
        self.covers(tau, tau)?;
        let reports = self.reports(q);
        let ys: Vec<f64> = reports.iter().map(|r| r.value).collect();
        let ses: Vec<f64> = reports.iter().map(|r| r.std_error).collect();
        Ok((
            pchip(&self.tau_grid, &ys, tau),
            linear(&self.tau_grid, &ses, tau),
        ))
    }

    /// Whether `[lo, hi]` can be evaluated without extrapolation.
    pub fn covers(&self, lo: f64, hi: f64) -> Result<()> {
        if self.homogeneity_order.is_some() {
            return Ok(());
        }
        let (a, b) = (self.tau_grid[0], *self.tau_grid.last().unwrap());
        let slack = 1e-12 * b;
        if lo < a - slack || hi > b + slack {
            return Err(Error::Extrapolation(format!(
                "intensity range [{lo}, {hi}] leaves the table range [{a}, {b}]"
            )));
        }
        Ok(())
    }
}

fn bracket(xs: &[f64], x: f64) -> usize {
    match xs.partition_point(|&v| v <= x) {
        0 => 0,
        k => (k - 1).min(xs.len().saturating_sub(2)),
    }
}

fn linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.len() == 1 {
        return ys[0];
    }
    let i = bracket(xs, x);
    let t = ((x - xs[i]) / (xs[i + 1] - xs[i])).clamp(0.0, 1.0);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).
pub(crate) fn pchip(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = delta[0];
        m[1] = delta[0];
    } else {
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let (w1, w2) = (2.0 * h[i] + h[i - 1], h[i] + 2.0 * h[i - 1]);
                m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    let i = bracket(xs, x);
    let t = ((x - xs[i]) / h[i]).clamp(0.0, 1.0);
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * ys[i]
        + (t3 - 2.0 * t2 + t) * h[i] * m[i]
        + (-2.0 * t3 + 3.0 * t2) * ys[i + 1]
        + (t3 - t2) * h[i] * m[i + 1]
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::Truncation;

    fn report(value: f64, se: f64) -> EstimateReport {
        EstimateReport {
            value,
            std_error: se,
            replications: 100,
            seed: 0,
            truncation: Truncation::default(),
            wall_time: 0.0,
            warnings: vec![],
        }
    }

    #[test]
    fn pchip_is_exact_on_knots_and_monotone() {
        let xs = [0.5, 1.0, 2.0, 4.0];
        let ys = [4.0, 2.0, 1.0, 0.9];
        for (x, y) in xs.iter().zip(&ys) {
            assert!((pchip(&xs, &ys, *x) - y).abs() < 1e-12);
        }
        let mut prev = f64::INFINITY;
        for k in 0..=350 {
            let v = pchip(&xs, &ys, 0.5 + k as f64 * 0.01);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
        // Linear data is reproduced exactly.
        let lin = [1.0, 2.0, 4.0, 8.0];
        assert!((pchip(&xs, &lin, 3.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = TableSettings::log_grid(2.0 / 3.0, 4.0 / 3.0, 9);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], 2.0 / 3.0);
        assert_eq!(g[8], 4.0 / 3.0);
        assert!((g[4] - (8.0f64 / 9.0).sqrt()).abs() < 1e-12);
        assert_eq!(TableSettings::log_grid(1.0, 1.0, 9), vec![1.0]);
    }

    #[test]
    fn homogeneous_pooling_and_extrapolation() {
        let mut t = VDTable {
            dim: 2,
            tau_grid: vec![0.5, 1.0, 2.0],
            mean_values: vec![
                report(2f64.sqrt(), 0.1),
                report(1.0, 0.1),
                report(0.5f64.sqrt(), 0.1),
            ],
            v_values: vec![report(2.0, 0.2), report(1.0, 0.1), report(0.5, 0.05)],
            d_values: vec![report(1.0, 0.0), report(1.0, 0.0), report(1.0, 0.0)],
            homogeneity_order: Some(1.0),
        };
        let (v, _) = t.at(Ingredient::V, 4.0).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
        let (m, se) = t.at(Ingredient::Mean, 1.0).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        assert!(se < 0.1);
        t.homogeneity_order = None;
        assert!(matches!(
            t.at(Ingredient::V, 4.0),
            Err(Error::Extrapolation(_))
        ));
        assert_eq!(t.at(Ingredient::D, 1.5).unwrap(), (1.0, 0.0));
    }
}
