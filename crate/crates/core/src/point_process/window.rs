use rand::Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{Point, MAX_DIM};
use crate::error::{param, Result};

/// A compact convex observation window with nonempty interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Window {
    UnitCube { dim: usize },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

/// Volume of the unit ball in dimension `d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 / 3.0 * std::f64::consts::PI,
        _ => f64::NAN,
    }
}

impl Window {
    pub fn unit_cube(dim: usize) -> Self {
        Window::UnitCube { dim }
    }

    /// The cube `[-h, h]^d`.
    pub fn centered_cube(dim: usize, half_width: f64) -> Self {
        Window::Box {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn cube_around(center: &Point, half_width: f64) -> Self {
        Window::Box {
            lo: center.coords().iter().map(|c| c - half_width).collect(),
            hi: center.coords().iter().map(|c| c + half_width).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::UnitCube { dim } => *dim,
            Window::Box { lo, .. } => lo.len(),
            Window::Ball { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if !(1..=MAX_DIM).contains(&d) {
            return param(format!("window dimension {d} not in 1..=3"));
        }
        match self {
            Window::UnitCube { .. } => Ok(()),
            Window::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return param("box bounds have different lengths");
                }
                if lo
                    .iter()
                    .zip(hi)
                    .any(|(a, b)| !(a.is_finite() && b.is_finite() && b > a))
                {
                    return param("box window must satisfy lo < hi on every axis");
                }
                Ok(())
            }
            Window::Ball { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return param("ball window needs a finite center and positive radius");
                }
                Ok(())
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounds(&self) -> (Point, Point) {
        let d = self.dim();
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        match self {
            Window::UnitCube { .. } => {
                hi[..d].fill(1.0);
            }
            Window::Box { lo: l, hi: h } => {
                lo[..d].copy_from_slice(l);
                hi[..d].copy_from_slice(h);
            }
            Window::Ball { center, radius } => {
                for i in 0..d {
                    lo[i] = center[i] - radius;
                    hi[i] = center[i] + radius;
                }
            }
        }
        (Point::from_array(lo, d), Point::from_array(hi, d))
    }

    pub fn is_box(&self) -> bool {
        !matches!(self, Window::Ball { .. })
    }

    pub fn volume(&self) -> f64 {
        match self {
            Window::Ball { radius, .. } => {
                unit_ball_volume(self.dim()) * radius.powi(self.dim() as i32)
            }
            _ => {
                let (lo, hi) = self.bounds();
                (0..self.dim()).map(|i| hi.coord(i) - lo.coord(i)).product()
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Window::Ball { center, radius } => {
                let c = Point::new(center).expect("validated center");
                p.dist2(&c) <= radius * radius
            }
            _ => {
                let (lo, hi) = self.bounds();
                (0..self.dim()).all(|i| p.coord(i) >= lo.coord(i) && p.coord(i) <= hi.coord(i))
            }
        }
    }

    /// One point uniform on the window (rejection from the bounding box for balls).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let d = self.dim();
        let (lo, hi) = self.bounds();
        loop {
            let mut c = [0.0; MAX_DIM];
            for i in 0..d {
                let u: f64 = rng.random();
                c[i] = lo.coord(i) + u * (hi.coord(i) - lo.coord(i));
            }
            let p = Point::from_array(c, d);
            if self.is_box() || self.contains(&p) {
                return p;
            }
        }
    }
}
