//! Monte-Carlo estimators of the limit ingredients on homogeneous Poisson
//! input: `E ξ(0; P_τ)`, `V^ξ(τ)`, `D^ξ(τ)`, stabilization tails and pair
//! correlations.
//!
//! Replicate `r` of an estimator seeded with `seed` draws from
//! `RngStream::new(derive_seed(seed, label), r)`, so every replicate can be
//! regenerated alone and results do not depend on how work is scheduled.

mod cumulants;
mod moments;
mod table;
mod tail;

pub use cumulants::{cumulant_stats, CumulantStats};
pub use moments::TAIL_LEVEL;
pub use moments::{
    estimate_d, estimate_pair_correlation, estimate_pair_integrand, estimate_v, estimate_xi_mean,
    shell_nodes, QuadratureNode, VMethod,
};
pub use table::{Ingredient, TableSettings, VDTable};
pub use tail::{battery, estimate_stab_tail, TailCurve};

use std::io::Write;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::functionals::WeightFunctional;
use crate::geometry::{knn_lists, Candidate, Neighborhood, SpatialIndex};
use crate::point_process::{
    attach_marks, sample_homogeneous_poisson, Mark, MarkLaw, PointSet, Window,
};
use crate::util::{mean, sample_variance};
use crate::RngStream;

pub const MIN_REPLICATIONS: usize = 100;
pub const TAU_RANGE: (f64, f64) = (1e-3, 1e3);

/// Shared Monte-Carlo settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub dim: usize,
    pub reps: usize,
    pub seed: u64,
    /// Mark given to the inserted origin; drawn from the functional's mark
    /// law when absent.
    #[serde(default)]
    pub origin_mark: Option<Mark>,
}

impl McConfig {
    pub fn new(dim: usize, reps: usize, seed: u64) -> Self {
        McConfig {
            dim,
            reps,
            seed,
            origin_mark: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return param("dimension must be 1, 2 or 3");
        }
        if self.reps < MIN_REPLICATIONS {
            return param(format!(
                "at least {MIN_REPLICATIONS} replications are required (got {})",
                self.reps
            ));
        }
        if let Some(m) = &self.origin_mark {
            m.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Half-width `L` of the sampling window.
    pub window_half_width: f64,
    /// Cutoff `ρ_max` of the pair integral, when one was used.
    pub pair_cutoff: Option<f64>,
}

/// A Monte-Carlo estimate. `std_error` is the sample standard deviation of
/// the per-replicate contributions over `√replications`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub value: f64,
    pub std_error: f64,
    pub replications: usize,
    pub seed: u64,
    pub truncation: Truncation,
    /// Seconds; kept in memory for the run manifest, never serialized so that
    /// report files are reproducible bit for bit.
    #[serde(skip)]
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EstimateReport {
    pub(crate) fn from_samples(
        z: &[f64],
        seed: u64,
        truncation: Truncation,
        started: Instant,
    ) -> Self {
        EstimateReport {
            value: mean(z),
            std_error: (sample_variance(z) / z.len() as f64).sqrt(),
            replications: z.len(),
            seed,
            truncation,
            wall_time: started.elapsed().as_secs_f64(),
            warnings: vec![],
        }
    }

    /// `|a - b| <= k sqrt(se_a² + se_b²)`.
    pub fn agrees_with(&self, other: &EstimateReport, k: f64) -> bool {
        (self.value - other.value).abs() <= k * self.std_error.hypot(other.std_error)
    }

    pub fn scaled(&self, factor: f64) -> EstimateReport {
        EstimateReport {
            value: self.value * factor,
            std_error: self.std_error * factor.abs(),
            ..self.clone()
        }
    }

    /// Flat CSV `value,std_error,replications,seed,window_half_width,pair_cutoff`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "value,std_error,replications,seed,window_half_width,pair_cutoff"
        )?;
        writeln!(
            out,
            "{:.16e},{:.16e},{},{},{:.16e},{}",
            self.value,
            self.std_error,
            self.replications,
            self.seed,
            self.truncation.window_half_width,
            self.truncation
                .pair_cutoff
                .map_or(String::new(), |c| format!("{c:.16e}"))
        )?;
        Ok(())
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if !(TAU_RANGE.0..=TAU_RANGE.1).contains(&tau) {
        return param(format!(
            "intensity {tau} outside [{}, {}]",
            TAU_RANGE.0, TAU_RANGE.1
        ));
    }
    Ok(())
}

pub(crate) fn check_setting(xi: &WeightFunctional, tau: f64, mc: &McConfig) -> Result<()> {
    xi.validate()?;
    mc.validate()?;
    check_tau(tau)?;
    if let Some(d) = xi.required_dim() {
        if mc.dim != d {
            return param(format!("this functional is only defined in d = {d}"));
        }
    }
    Ok(())
}

/// Runs `reps` replicates in parallel; output order is replicate order.
pub(crate) fn run_reps<T, F>(seed: u64, reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r).rng();
            f(&mut rng).map_err(|e| Error::Replicate {
                seed,
                stream: r,
                message: e.to_string(),
            })
        })
        .collect()
}

/// One sampled configuration with the structures local evaluation needs.
pub(crate) struct Sample {
    pub points: PointSet,
    pub index: SpatialIndex,
    pub knn: Option<(Vec<Vec<Candidate>>, usize)>,
}

impl Sample {
    pub fn new(xi: &WeightFunctional, points: PointSet) -> Result<Self> {
        let index = SpatialIndex::new(&points);
        let k = match xi {
            WeightFunctional::KnnEdge { k, .. } => Some(*k),
            WeightFunctional::SigEdge { .. } => Some(1),
            _ => None,
        };
        let knn = match k {
            Some(k) if k < points.len() => Some((knn_lists(&points, k)?, k)),
            _ => None,
        };
        Ok(Sample { points, index, knn })
    }

    pub fn draw(
        xi: &WeightFunctional,
        tau: f64,
        window: &Window,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let mut x = sample_homogeneous_poisson(tau, window, rng)?;
        let law = xi.mark_law();
        if !law.is_empty() {
            x = attach_marks(&x, &law, rng)?;
        }
        Sample::new(xi, x)
    }

    pub fn neighborhood(&self) -> Neighborhood<'_> {
        let nb = Neighborhood::new(&self.points, &self.index);
        match &self.knn {
            Some((lists, k)) => nb.with_knn_cache(lists, *k),
            None => nb,
        }
    }
}

/// A mark for an inserted point: `fixed` if given, otherwise drawn.
pub(crate) fn insert_mark(
    law: &MarkLaw,
    fixed: Option<Mark>,
    rng: &mut ChaCha8Rng,
) -> Option<Mark> {
    if let Some(m) = fixed {
        return Some(m);
    }
    if law.is_empty() {
        return None;
    }
    Some(law.draw(
        Mark {
            time: None,
            radius: None,
        },
        rng,
    ))
}
