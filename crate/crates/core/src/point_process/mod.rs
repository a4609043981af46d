//! Point sets, windows, densities and the samplers that generate them.

mod density;
mod io;
mod sampling;
mod window;

pub use density::{DensityField, DensityKind};
pub use io::{read_point_set, write_point_set};
pub use sampling::{
    attach_marks, rescale, sample_binomial, sample_homogeneous_poisson,
    sample_inhomogeneous_poisson, MarkLaw, RadiusLaw,
};
pub use window::{unit_ball_volume, Window};

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::util::{label_hash, mix64};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A point of `R^d`, `1 <= d <= 3`. Unused trailing coordinates are zero so
/// that distances can be computed without consulting `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return param(format!("point dimension {} not in 1..=3", coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return param("point coordinates must be finite");
        }
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Point {
            coords: c,
            dim: coords.len() as u8,
        })
    }

    pub(crate) fn from_array(coords: [f64; MAX_DIM], dim: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        let mut c = coords;
        for v in c.iter_mut().skip(dim) {
            *v = 0.0;
        }
        Point {
            coords: c,
            dim: dim as u8,
        }
    }

    pub fn origin(dim: usize) -> Self {
        Point::from_array([0.0; MAX_DIM], dim)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    pub(crate) fn raw(&self) -> &[f64; MAX_DIM] {
        &self.coords
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.coords[axis]
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.coords[0] - other.coords[0];
        let dy = self.coords[1] - other.coords[1];
        let dz = self.coords[2] - other.coords[2];
        dx * dx + dy * dy + dz * dz
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.dist2(&Point::origin(self.dim())).sqrt()
    }

    pub fn scaled(&self, a: f64) -> Point {
        let mut c = self.coords;
        for v in c.iter_mut() {
            *v *= a;
        }
        Point {
            coords: c,
            dim: self.dim,
        }
    }

    pub fn add(&self, other: &Point) -> Point {
        let mut c = self.coords;
        for (v, o) in c.iter_mut().zip(other.coords.iter()) {
            *v += o;
        }
        Point {
            coords: c,
            dim: self.dim,
        }
    }

    pub fn sub(&self, other: &Point) -> Point {
        let mut c = self.coords;
        for (v, o) in c.iter_mut().zip(other.coords.iter()) {
            *v -= o;
        }
        Point {
            coords: c,
            dim: self.dim,
        }
    }

    /// Lexicographic comparison of coordinates (the distance tie-break).
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for axis in 0..MAX_DIM {
            match self.coords[axis].total_cmp(&other.coords[axis]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

/// Optional marks carried by a point: an arrival time in `[0, 1]` and/or a
/// nonnegative radius.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Mark {
    pub time: Option<f64>,
    pub radius: Option<f64>,
}

impl Mark {
    pub fn with_time(time: f64) -> Self {
        Mark {
            time: Some(time),
            radius: None,
        }
    }

    pub fn with_radius(radius: f64) -> Self {
        Mark {
            time: None,
            radius: Some(radius),
        }
    }

    pub fn new(time: f64, radius: f64) -> Self {
        Mark {
            time: Some(time),
            radius: Some(radius),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.time {
            if !(0.0..=1.0).contains(&t) {
                return param(format!("mark time {t} outside [0, 1]"));
            }
        }
        if let Some(r) = self.radius {
            if !(r >= 0.0 && r.is_finite()) {
                return param(format!("mark radius {r} must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// A finite set of distinct points of a common dimension, optionally marked.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Point>,
    marks: Option<Vec<Mark>>,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Point>) -> Result<Self> {
        Self::build(dim, points, None)
    }

    pub fn with_marks(dim: usize, points: Vec<Point>, marks: Vec<Mark>) -> Result<Self> {
        Self::build(dim, points, Some(marks))
    }

    pub fn empty(dim: usize) -> Self {
        PointSet {
            dim,
            points: Vec::new(),
            marks: None,
        }
    }

    /// Convenience constructor for tests and fixtures: one coordinate tuple per point.
    pub fn from_coords(dim: usize, coords: &[&[f64]]) -> Result<Self> {
        let pts = coords
            .iter()
            .map(|c| Point::new(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, pts)
    }

    fn build(dim: usize, points: Vec<Point>, marks: Option<Vec<Mark>>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return param(format!("dimension {dim} not in 1..=3"));
        }
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return param(format!(
                "point of dimension {} in a set of dimension {dim}",
                p.dim()
            ));
        }
        if let Some(m) = &marks {
            if m.len() != points.len() {
                return param(format!("{} marks for {} points", m.len(), points.len()));
            }
            for mark in m {
                mark.validate()?;
            }
        }
        if let Some((a, b)) = first_duplicate(&points) {
            return Err(Error::Degenerate(format!("points {a} and {b} coincide")));
        }
        Ok(PointSet { dim, points, marks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn marks(&self) -> Option<&[Mark]> {
        self.marks.as_deref()
    }

    pub fn mark(&self, i: usize) -> Option<&Mark> {
        self.marks.as_ref().map(|m| &m[i])
    }

    pub fn has_times(&self) -> bool {
        self.marks
            .as_ref()
            .is_some_and(|m| m.iter().all(|k| k.time.is_some()))
    }

    pub fn has_radii(&self) -> bool {
        self.marks
            .as_ref()
            .is_some_and(|m| m.iter().all(|k| k.radius.is_some()))
    }

    /// Returns a copy with `p` (and its mark, when the set is marked) appended.
    pub fn with_point(&self, p: Point, mark: Option<Mark>) -> Result<PointSet> {
        if p.dim() != self.dim {
            return param("inserted point has the wrong dimension");
        }
        if self.points.iter().any(|q| *q == p) {
            return param("inserted point already belongs to the set");
        }
        let mut points = self.points.clone();
        points.push(p);
        let marks = match (&self.marks, mark) {
            (Some(m), Some(k)) => {
                let mut m = m.clone();
                m.push(k);
                Some(m)
            }
            (None, None) => None,
            (None, Some(k)) if self.points.is_empty() => Some(vec![k]),
            (Some(_), None) => return param("marked set requires a mark for the inserted point"),
            (None, Some(_)) => return param("cannot insert a marked point into an unmarked set"),
        };
        Ok(PointSet {
            dim: self.dim,
            points,
            marks,
        })
    }

    /// Construction without the duplicate scan; callers guarantee distinctness.
    pub(crate) fn from_parts_unchecked(
        dim: usize,
        points: Vec<Point>,
        marks: Option<Vec<Mark>>,
    ) -> PointSet {
        PointSet { dim, points, marks }
    }

    /// Applies `x -> a x + shift`; marks are carried unchanged.
    pub fn affine(&self, a: f64, shift: &Point) -> PointSet {
        let points = self.points.iter().map(|p| p.scaled(a).add(shift)).collect();
        PointSet {
            dim: self.dim,
            points,
            marks: self.marks.clone(),
        }
    }
}

/// Returns the first pair of identical points (indices in storage order).
pub(crate) fn first_duplicate(points: &[Point]) -> Option<(usize, usize)> {
    if points.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_unstable_by(|&a, &b| points[a].lex_cmp(&points[b]));
    order
        .windows(2)
        .find_map(|w| (points[w[0]] == points[w[1]]).then(|| (w[0].min(w[1]), w[0].max(w[1]))))
}

/// A reproducible random stream: `(seed, stream_id)` identifies the sample
/// path. Streams with different ids are independent ChaCha8 streams of the
/// same key, so replicate `r` can be regenerated in isolation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derives the root seed of a labelled sub-experiment.
    pub fn derive_seed(seed: u64, label: &str) -> u64 {
        mix64(seed ^ mix64(label_hash(label)))
    }
}
