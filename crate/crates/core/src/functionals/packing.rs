//! Random sequential adsorption and spatial birth–growth.

use std::io::Write;

use crate::error::{param, Result};
use crate::geometry::SpatialIndex;
use crate::point_process::{unit_ball_volume, PointSet};

/// Per-point acceptance, in the storage order of the input.
#[derive(Clone, Debug, PartialEq)]
pub struct AcceptanceVector {
    pub times: Vec<f64>,
    pub accepted: Vec<bool>,
}

impl AcceptanceVector {
    pub fn count(&self) -> usize {
        self.accepted.iter().filter(|&&a| a).count()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.accepted.iter().map(|&a| a as u8 as f64).collect()
    }
}

/// CSV `index,time,accepted`.
pub fn write_acceptance<W: Write>(a: &AcceptanceVector, mut out: W) -> Result<()> {
    writeln!(out, "index,time,accepted")?;
    for (i, (t, acc)) in a.times.iter().zip(&a.accepted).enumerate() {
        writeln!(out, "{i},{t:.16e},{}", *acc as u8)?;
    }
    Ok(())
}

/// Radius `r` with `ω_d r^d = ball_volume`.
pub fn rsa_radius(dim: usize, ball_volume: f64) -> f64 {
    (ball_volume / unit_ball_volume(dim)).powf(1.0 / dim as f64)
}

/// Which earlier seeds can block a later one.
#[derive(Clone, Copy, Debug)]
pub(crate) enum PackRule {
    /// Equal balls of radius `r`.
    Rsa { r: f64 },
    /// Balls of radius `ρ` growing at speed `v` from their birth time.
    Growth { speed: f64 },
}

impl PackRule {
    /// Search radius for blockers of a seed born at `t` with radius `rho`,
    /// given the earliest time and largest radius present.
    pub(crate) fn reach(&self, t: f64, rho: f64, min_time: f64, max_radius: f64) -> f64 {
        match *self {
            PackRule::Rsa { r } => 2.0 * r,
            PackRule::Growth { speed } => rho + max_radius + speed * (t - min_time).max(0.0),
        }
    }

    /// Whether an accepted seed `(tj, rj)` at distance `d` blocks `(ti, ri)`,
    /// `tj < ti`. Overlap is of open balls: touching does not block.
    pub(crate) fn blocks(&self, d: f64, ti: f64, ri: f64, tj: f64, rj: f64) -> bool {
        match *self {
            PackRule::Rsa { r } => d < 2.0 * r,
            PackRule::Growth { speed } => d < ri + rj + speed * (ti - tj),
        }
    }
}

pub(crate) fn check_times(x: &PointSet) -> Result<Vec<f64>> {
    let times: Vec<f64> = match x.marks() {
        Some(m) if x.has_times() => m.iter().map(|m| m.time.unwrap()).collect(),
        _ if x.is_empty() => vec![],
        _ => return param("packing needs a time mark on every point"),
    };
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return param("time marks must be distinct");
    }
    Ok(times)
}

fn pack(x: &PointSet, rule: PackRule, radii: &[f64]) -> Result<AcceptanceVector> {
    let times = check_times(x)?;
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let min_time = order.first().map_or(0.0, |&i| times[i]);
    let max_radius = radii.iter().copied().fold(0.0, f64::max);
    let index = SpatialIndex::new(x);
    let mut accepted = vec![false; n];
    for &i in &order {
        let reach = rule.reach(times[i], radii[i], min_time, max_radius);
        accepted[i] = !index.within(x.point(i), reach, true).iter().any(|c| {
            let j = c.id;
            accepted[j]
                && times[j] < times[i]
                && rule.blocks(c.d2.sqrt(), times[i], radii[i], times[j], radii[j])
        });
    }
    Ok(AcceptanceVector { times, accepted })
}

/// RSA: in increasing time order, a ball of volume `ball_volume` is accepted
/// iff it overlaps no previously accepted ball.
pub fn rsa_pack(x: &PointSet, ball_volume: f64) -> Result<AcceptanceVector> {
    if !(ball_volume.is_finite() && ball_volume > 0.0) {
        return param("RSA ball volume must be positive");
    }
    let r = rsa_radius(x.dim(), ball_volume);
    pack(x, PackRule::Rsa { r }, &vec![0.0; x.len()])
}

/// Spatial birth–growth: a seed `(x_i, t_i, ρ_i)` is accepted iff
/// `|x_i - x_j| >= ρ_i + ρ_j + v (t_i - t_j)` for every earlier accepted seed.
/// With `v = 0` and constant `ρ = r` this is RSA with balls of radius `r`.
pub fn birth_growth(x: &PointSet, speed: f64) -> Result<AcceptanceVector> {
    if !(speed.is_finite() && speed >= 0.0) {
        return param("growth speed must be finite and nonnegative");
    }
    if !x.is_empty() && !x.has_radii() {
        return param("birth-growth needs a radius mark on every point");
    }
    let radii: Vec<f64> = x
        .marks()
        .unwrap_or(&[])
        .iter()
        .map(|m| m.radius.unwrap())
        .collect();
    pack(x, PackRule::Growth { speed }, &radii)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::{Mark, Point};

    fn timed(dim: usize, pts: &[(&[f64], f64)]) -> PointSet {
        PointSet::with_marks(
            dim,
            pts.iter().map(|p| Point::new(p.0).unwrap()).collect(),
            pts.iter().map(|p| Mark::with_time(p.1)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn rsa_one_dimensional_example() {
        // ball volume 1 in d = 1: radius 1/2; 0 and 0.5 overlap.
        let x = timed(1, &[(&[0.0], 0.1), (&[0.5], 0.2), (&[2.0], 0.3)]);
        let a = rsa_pack(&x, 1.0).unwrap();
        assert_eq!(a.accepted, vec![true, false, true]);
        assert_eq!(a.count(), 2);
    }

    #[test]
    fn rejected_balls_do_not_block() {
        // 1 is blocked by 0; 2 overlaps only 1 and is accepted.
        let x = timed(1, &[(&[0.0], 0.1), (&[1.0], 0.2), (&[2.0], 0.3)]);
        assert_eq!(rsa_pack(&x, 1.2).unwrap().accepted, vec![true, false, true]);
    }

    #[test]
    fn touching_balls_are_both_accepted() {
        let x = timed(1, &[(&[0.0], 0.1), (&[1.0], 0.2)]);
        assert_eq!(rsa_pack(&x, 1.0).unwrap().accepted, vec![true, true]);
    }

    #[test]
    fn duplicate_times_rejected() {
        let x = timed(1, &[(&[0.0], 0.5), (&[3.0], 0.5)]);
        assert!(rsa_pack(&x, 1.0).is_err());
        let unmarked = PointSet::from_coords(1, &[&[0.0]]).unwrap();
        assert!(rsa_pack(&unmarked, 1.0).is_err());
    }

    #[test]
    fn birth_growth_example() {
        let x = PointSet::with_marks(
            2,
            vec![
                Point::new(&[0.0, 0.0]).unwrap(),
                Point::new(&[0.3, 0.0]).unwrap(),
            ],
            vec![Mark::new(0.0, 0.0), Mark::new(0.5, 0.1)],
        )
        .unwrap();
        // 0.3 < 0 + 0.1 + 1 · 0.5
        assert_eq!(birth_growth(&x, 1.0).unwrap().accepted, vec![true, false]);
        assert_eq!(birth_growth(&x, 0.0).unwrap().accepted, vec![true, true]);
    }

    #[test]
    fn acceptance_csv() {
        let x = timed(1, &[(&[0.0], 0.25), (&[0.5], 0.75)]);
        let mut buf = Vec::new();
        write_acceptance(&rsa_pack(&x, 1.0).unwrap(), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "index,time,accepted");
        assert!(lines[1].starts_with("0,2.5") && lines[1].ends_with(",1"));
        assert!(lines[2].ends_with(",0"));
    }
}
