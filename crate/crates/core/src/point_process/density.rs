use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Point, Window};
use crate::error::{param, Result};

/// Built-in probability densities. The linear and Gaussian densities live on
/// the unit cube and are bounded away from zero there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensityKind {
    /// `1 / vol(W)` on any window.
    Uniform,
    /// `(1 + x_1) / (3/2)` on the unit cube.
    Linear,
    /// Product Gaussian `exp(-|x - c|^2 / (2 sigma^2))` truncated to the unit
    /// cube and renormalised; `c = (center, ..., center)`.
    GaussianBump { center: f64, sigma: f64 },
}

/// A probability density `κ` on a convex compact window, with known bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct DensityField {
    pub window: Window,
    pub kind: DensityKind,
}

impl DensityField {
    pub fn uniform(window: Window) -> Result<Self> {
        window.validate()?;
        Ok(DensityField {
            window,
            kind: DensityKind::Uniform,
        })
    }

    pub fn linear(dim: usize) -> Result<Self> {
        let f = DensityField {
            window: Window::unit_cube(dim),
            kind: DensityKind::Linear,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn gaussian_bump(dim: usize, center: f64, sigma: f64) -> Result<Self> {
        let f = DensityField {
            window: Window::unit_cube(dim),
            kind: DensityKind::GaussianBump { center, sigma },
        };
        f.validate()?;
        Ok(f)
    }

    /// Looks up a built-in density by name: `uniform`, `linear`, `gaussian`.
    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        match name {
            "uniform" => Self::uniform(Window::unit_cube(dim)),
            "linear" => Self::linear(dim),
            "gaussian" => Self::gaussian_bump(dim, 0.5, 0.5),
            other => param(format!(
                "unknown density '{other}' (uniform|linear|gaussian)"
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        match &self.kind {
            DensityKind::Uniform => Ok(()),
            DensityKind::Linear => self.require_unit_cube(),
            DensityKind::GaussianBump { center, sigma } => {
                self.require_unit_cube()?;
                if !(sigma.is_finite() && *sigma > 0.0 && center.is_finite()) {
                    return param("gaussian bump needs finite center and positive sigma");
                }
                Ok(())
            }
        }
    }

    fn require_unit_cube(&self) -> Result<()> {
        match self.window {
            Window::UnitCube { .. } => Ok(()),
            _ => param("this density is only defined on the unit cube"),
        }
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, DensityKind::Uniform)
    }

    /// `κ(x)`; zero outside the window.
    pub fn evaluate(&self, x: &Point) -> f64 {
        if !self.window.contains(x) {
            return 0.0;
        }
        match &self.kind {
            DensityKind::Uniform => 1.0 / self.window.volume(),
            DensityKind::Linear => (1.0 + x.coord(0)) / 1.5,
            DensityKind::GaussianBump { center, sigma } => (0..self.dim())
                .map(|i| gauss1(x.coord(i), *center, *sigma) / gauss_norm(*center, *sigma))
                .product(),
        }
    }

    pub fn sup_bound(&self) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0 / self.window.volume(),
            DensityKind::Linear => 2.0 / 1.5,
            DensityKind::GaussianBump { center, sigma } => {
                let peak = gauss1(center.clamp(0.0, 1.0), *center, *sigma);
                (peak / gauss_norm(*center, *sigma)).powi(self.dim() as i32)
            }
        }
    }

    pub fn inf_bound(&self) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0 / self.window.volume(),
            DensityKind::Linear => 1.0 / 1.5,
            DensityKind::GaussianBump { center, sigma } => {
                let far = if *center >= 0.5 { 0.0 } else { 1.0 };
                (gauss1(far, *center, *sigma) / gauss_norm(*center, *sigma)).powi(self.dim() as i32)
            }
        }
    }
}

fn gauss1(x: f64, c: f64, s: f64) -> f64 {
    (-(x - c) * (x - c) / (2.0 * s * s)).exp()
}

/// `∫_0^1 exp(-(x-c)^2/(2s^2)) dx`.
fn gauss_norm(c: f64, s: f64) -> f64 {
    let r = s * std::f64::consts::SQRT_2;
    s * (std::f64::consts::PI / 2.0).sqrt() * (libm::erf((1.0 - c) / r) + libm::erf(c / r))
}
