use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_setting, insert_mark, run_reps, McConfig, Sample};
use crate::error::{param, Error, Result};
use crate::functionals::{evaluate_local, WeightFunctional};
use crate::point_process::{Mark, MarkLaw, Point, Window};
use crate::RngStream;

/// Empirical tail `r̂(t) = P(R̂ >= t)` of the stabilization radius at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub t_grid: Vec<f64>,
    pub tail_prob: Vec<f64>,
    pub fitted_rate: Option<f64>,
    /// Where the fitted exponential `exp(-rate (t - onset))` equals one.
    pub fitted_onset: Option<f64>,
    /// Grid values changed by the monotone (isotonic) correction.
    pub isotonic_corrections: usize,
    pub replications: usize,
    pub seed: u64,
    pub battery_size: usize,
}

impl TailCurve {
    /// Upper bound for `P(R̂ >= t)` read off the curve.
    pub fn prob_at(&self, t: f64) -> f64 {
        match self.t_grid.iter().rposition(|&g| g <= t) {
            Some(i) => self.tail_prob[i],
            None => 1.0,
        }
    }

    /// First grid value where the tail is below `level`.
    pub fn first_below(&self, level: f64) -> Option<f64> {
        self.t_grid
            .iter()
            .zip(&self.tail_prob)
            .find(|(_, &p)| p < level)
            .map(|(&t, _)| t)
    }

    /// Default truncation: twice the first grid value with tail below 10⁻³.
    pub fn suggested_half_width(&self) -> Option<f64> {
        self.first_below(super::moments::TAIL_LEVEL)
            .map(|t| 2.0 * t)
    }

    /// Whether `r̂(t) < level` at every grid `t >= onset + scales / rate`;
    /// `None` without a fitted positive rate.
    pub fn below_after_scales(&self, scales: f64, level: f64) -> Option<bool> {
        let rate = self.fitted_rate.filter(|r| *r > 0.0)?;
        let from = self.fitted_onset? + scales / rate;
        Some(
            self.t_grid
                .iter()
                .zip(&self.tail_prob)
                .all(|(&t, &p)| t < from || p < level),
        )
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.tail_prob.windows(2).all(|w| w[1] <= w[0])
    }

    /// CSV `t,tail_prob`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,tail_prob")?;
        for (t, p) in self.t_grid.iter().zip(&self.tail_prob) {
            writeln!(out, "{t:.16e},{p:.16e}")?;
        }
        Ok(())
    }
}

/// Directions spread over the sphere: `±1` in d = 1, equal angles offset by
/// `phase` in d = 2, a Fibonacci spiral in d = 3.
fn directions(dim: usize, count: usize, phase: f64) -> Vec<[f64; 3]> {
    (0..count)
        .map(|k| match dim {
            1 => [if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0, 0.0],
            2 => {
                let a = phase + std::f64::consts::TAU * k as f64 / count as f64;
                [a.cos(), a.sin(), 0.0]
            }
            _ => {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                let s = (1.0 - z * z).sqrt();
                let a = phase + k as f64 * std::f64::consts::PI * (3.0 - 5f64.sqrt());
                [s * a.cos(), s * a.sin(), z]
            }
        })
        .collect()
}

fn tangents(u: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if u[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let dot = helper[0] * u[0] + helper[1] * u[1] + helper[2] * u[2];
    let mut a = [
        helper[0] - dot * u[0],
        helper[1] - dot * u[1],
        helper[2] - dot * u[2],
    ];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    a = [a[0] / na, a[1] / na, a[2] / na];
    let b = [
        u[1] * a[2] - u[2] * a[1],
        u[2] * a[0] - u[0] * a[2],
        u[0] * a[1] - u[1] * a[0],
    ];
    (a, b)
}

/// The adversarial configurations placed just outside `B_t(0)`: `⌈size/2⌉`
/// dense 3×3 clusters (spacing `spacing`) and `⌊size/2⌋` single points.
pub fn battery(dim: usize, t: f64, size: usize, spacing: f64, phase: f64) -> Vec<Vec<Point>> {
    let clusters = size.div_ceil(2);
    let singles = size / 2;
    let mut out = Vec::with_capacity(size);
    let lift = t * (1.0 + 1e-9) + 1e-12;
    for u in directions(dim, clusters, phase) {
        let (a, b) = tangents(u);
        let mut pts = Vec::with_capacity(9);
        for i in -1..=1 {
            for j in -1..=1 {
                let (fi, fj) = (i as f64 * spacing, j as f64 * spacing);
                let c: [f64; 3] = match dim {
                    1 => [
                        u[0] * (lift + (3 * (i + 1) + (j + 1)) as f64 * spacing),
                        0.0,
                        0.0,
                    ],
                    2 => {
                        let r = lift + (1 + i) as f64 * spacing + spacing;
                        [u[0] * r + a[0] * fj, u[1] * r + a[1] * fj, 0.0]
                    }
                    _ => {
                        let r = lift + 2.0 * spacing;
                        [
                            u[0] * r + a[0] * fi + b[0] * fj,
                            u[1] * r + a[1] * fi + b[1] * fj,
                            u[2] * r + a[2] * fi + b[2] * fj,
                        ]
                    }
                };
                pts.push(Point::new(&c[..dim]).expect("finite battery point"));
            }
        }
        out.push(pts);
    }
    let offset = if dim == 2 && singles > 0 {
        std::f64::consts::PI / singles as f64
    } else {
        0.0
    };
    for u in directions(dim, singles, phase + offset) {
        let c = [u[0] * lift, u[1] * lift, u[2] * lift];
        out.push(vec![Point::new(&c[..dim]).expect("finite battery point")]);
    }
    out
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Largest fraction of replicates allowed to exceed the grid.
const GRID_OVERFLOW: f64 = 0.01;

/// `R̂` per replicate on `t_grid`: the smallest grid `t` from which
/// `ξ(0; P_τ ∩ B_s ∪ 0)` is constant for all grid `s >= t` and unchanged by
/// each battery configuration placed just outside `B_t`. `+∞` when no grid
/// value qualifies.
fn radius_sample(
    xi: &WeightFunctional,
    t_grid: &[f64],
    battery_size: usize,
    spacing: f64,
    law: &MarkLaw,
    s: &Sample,
    origin_mark: Option<Mark>,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let dim = s.points.dim();
    let o = Point::origin(dim);
    let m0 = insert_mark(law, origin_mark, rng);
    let values = t_grid
        .iter()
        .map(|&t| {
            let mut nb = s.neighborhood().with_clip(o, t);
            let id = nb.insert(o, m0)?;
            evaluate_local(xi, &nb, id)
        })
        .collect::<Result<Vec<f64>>>()?;
    let last = *values.last().unwrap();
    let mut from = values.len();
    while from > 0 && same(values[from - 1], last) {
        from -= 1;
    }
    let phase = rng.random::<f64>() * std::f64::consts::TAU;
    for i in from..t_grid.len() {
        let t = t_grid[i];
        let mut stable = true;
        for group in battery(dim, t, battery_size, spacing, phase) {
            let mut nb = s.neighborhood().with_clip(o, t);
            let id = nb.insert(o, m0)?;
            for p in group {
                // Battery points can coincide with sample points only on a
                // null event; skip such a point rather than fail.
                let _ = nb.insert_external(p, insert_mark(law, None, rng));
            }
            if !same(evaluate_local(xi, &nb, id)?, values[i]) {
                stable = false;
                break;
            }
        }
        if stable {
            return Ok(t);
        }
    }
    Ok(f64::INFINITY)
}

/// Pool-adjacent-violators fit of a nonincreasing sequence.
fn isotonic_nonincreasing(p: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in p {
        blocks.push((v, 1));
        while blocks.len() > 1 && blocks[blocks.len() - 2].0 < blocks[blocks.len() - 1].0 {
            let (v2, n2) = blocks.pop().unwrap();
            let (v1, n1) = blocks.pop().unwrap();
            blocks.push((
                (v1 * n1 as f64 + v2 * n2 as f64) / (n1 + n2) as f64,
                n1 + n2,
            ));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, n)| std::iter::repeat_n(v, n))
        .collect()
}

/// Least-squares line `ln p = -rate (t - onset)` over grid values with
/// `0 < p < 1`; returns `(rate, onset)`.
fn fit_rate(t: &[f64], p: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(p)
        .filter(|(_, &p)| p > 0.0 && p < 1.0)
        .map(|(&t, &p)| (t, p.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let ml = pts.iter().map(|q| q.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|q| (q.0 - mt) * (q.1 - ml)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mt).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let rate = -sxy / sxx;
    Some((rate, mt + ml / rate))
}

/// `r̂(t)` for the origin of `P_τ`, sampled on the cube of half-width
/// `max(t_grid)`. The battery makes this a lower-bound estimator of the true
/// tail.
pub fn estimate_stab_tail(
    xi: &WeightFunctional,
    tau: f64,
    t_grid: &[f64],
    battery_size: usize,
    mc: &McConfig,
) -> Result<TailCurve> {
    check_setting(xi, tau, mc)?;
    if t_grid.is_empty() || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return param("t_grid must be positive and strictly increasing");
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return param("t_grid must be finite");
    }
    if battery_size == 0 {
        return param("battery size must be positive");
    }
    let seed = RngStream::derive_seed(mc.seed, "stab-tail");
    let t_max = *t_grid.last().unwrap();
    let window = Window::centered_cube(mc.dim, t_max);
    let spacing = 0.05 * tau.powf(-1.0 / mc.dim as f64);
    let law = xi.mark_law();
    let radii = run_reps(seed, mc.reps, |rng| {
        let s = Sample::draw(xi, tau, &window, rng)?;
        radius_sample(
            xi,
            t_grid,
            battery_size,
            spacing,
            &law,
            &s,
            mc.origin_mark,
            rng,
        )
    })?;
    let over = radii.iter().filter(|r| r.is_infinite()).count();
    if over as f64 > GRID_OVERFLOW * radii.len() as f64 {
        return Err(Error::GridTooSmall(format!(
            "{over} of {} replicates did not stabilize within t = {t_max}",
            radii.len()
        )));
    }
    let raw: Vec<f64> = t_grid
        .iter()
        .map(|&t| radii.iter().filter(|&&r| r >= t).count() as f64 / radii.len() as f64)
        .collect();
    let tail_prob = isotonic_nonincreasing(&raw);
    let isotonic_corrections = raw.iter().zip(&tail_prob).filter(|(a, b)| a != b).count();
    let fit = fit_rate(t_grid, &tail_prob);
    Ok(TailCurve {
        fitted_rate: fit.map(|f| f.0),
        fitted_onset: fit.map(|f| f.1),
        t_grid: t_grid.to_vec(),
        tail_prob,
        isotonic_corrections,
        replications: mc.reps,
        seed: mc.seed,
        battery_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotonic_pools_violators() {
        assert_eq!(
            isotonic_nonincreasing(&[1.0, 0.5, 0.7, 0.2]),
            vec![1.0, 0.6, 0.6, 0.2]
        );
        assert_eq!(isotonic_nonincreasing(&[1.0, 0.5]), vec![1.0, 0.5]);
    }

    #[test]
    fn rate_fit_recovers_exponential() {
        let t: Vec<f64> = (1..10).map(|i| i as f64 * 0.5).collect();
        let p: Vec<f64> = t
            .iter()
            .map(|t| (-1.7 * (t - 0.8)).exp().min(0.99))
            .collect();
        let (rate, onset) = fit_rate(&t[1..], &p[1..]).unwrap();
        assert!((rate - 1.7).abs() < 1e-12 && (onset - 0.8).abs() < 1e-12);
    }

    #[test]
    fn battery_lies_outside_the_ball() {
        for dim in 1..=3 {
            let groups = battery(dim, 2.0, 16, 0.05, 0.3);
            assert_eq!(groups.len(), 16);
            assert_eq!(groups.iter().filter(|g| g.len() == 9).count(), 8);
            for p in groups.iter().flatten() {
                assert!(p.norm() > 2.0, "d={dim}: {p:?}");
            }
        }
    }

    #[test]
    fn counting_collapses_at_first_grid_value() {
        let mc = McConfig::new(2, 100, 3);
        let grid = [0.5, 1.0, 2.0];
        let tc = estimate_stab_tail(&WeightFunctional::Counting, 1.0, &grid, 16, &mc).unwrap();
        assert_eq!(tc.tail_prob, vec![1.0, 0.0, 0.0]);
        assert_eq!(tc.fitted_rate, None);
    }
}
