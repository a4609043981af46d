use rand::Rng;
use rand_distr::{Distribution, Poisson};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{first_duplicate, DensityField, Mark, Point, PointSet, Window};
use crate::error::{param, Result};

/// Law of the radius mark. Only bounded laws are admissible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadiusLaw {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl RadiusLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadiusLaw::Constant { value } if value.is_finite() && value >= 0.0 => Ok(()),
            RadiusLaw::Uniform { lo, hi }
                if lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo =>
            {
                Ok(())
            }
            _ => param(format!(
                "radius law {self:?} must be bounded with nonnegative support"
            )),
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match *self {
            RadiusLaw::Constant { value } => value,
            RadiusLaw::Uniform { hi, .. } => hi,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RadiusLaw::Constant { value } => value,
            RadiusLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

/// Which marks to attach: uniform arrival times on `[0, 1]` and/or i.i.d. radii.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MarkLaw {
    #[serde(default)]
    pub time: bool,
    #[serde(default)]
    pub radius: Option<RadiusLaw>,
}

impl MarkLaw {
    pub fn times() -> Self {
        MarkLaw {
            time: true,
            radius: None,
        }
    }

    pub fn radii(law: RadiusLaw) -> Self {
        MarkLaw {
            time: false,
            radius: Some(law),
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.time && self.radius.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        match &self.radius {
            Some(r) => r.validate(),
            None => Ok(()),
        }
    }

    /// Draws one mark; components the law does not cover are taken from `base`.
    pub fn draw<R: Rng + ?Sized>(&self, base: Mark, rng: &mut R) -> Mark {
        let mut m = base;
        if self.time {
            m.time = Some(rng.random::<f64>());
        }
        if let Some(r) = &self.radius {
            m.radius = Some(r.draw(rng));
        }
        m
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return param(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean)
        .map_err(|e| crate::Error::Parameter(format!("poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

/// Redraws exact duplicates with `draw` until all points are distinct.
fn dedup_with<R: Rng + ?Sized>(
    points: &mut [Point],
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Point,
) {
    while let Some((_, later)) = first_duplicate(points) {
        points[later] = draw(rng);
    }
}

/// Homogeneous Poisson process of intensity `tau` on `window`.
pub fn sample_homogeneous_poisson<R: Rng + ?Sized>(
    tau: f64,
    window: &Window,
    rng: &mut R,
) -> Result<PointSet> {
    check_positive("intensity", tau)?;
    window.validate()?;
    let n = poisson_count(tau * window.volume(), rng)?;
    let mut pts: Vec<Point> = (0..n).map(|_| window.sample_uniform(rng)).collect();
    dedup_with(&mut pts, rng, |r| window.sample_uniform(r));
    Ok(PointSet::from_parts_unchecked(window.dim(), pts, None))
}

fn thinned_draw<R: Rng + ?Sized>(kappa: &DensityField, sup: f64, rng: &mut R) -> Point {
    loop {
        let x = kappa.window.sample_uniform(rng);
        if kappa.is_uniform() || rng.random::<f64>() * sup < kappa.evaluate(&x) {
            return x;
        }
    }
}

/// Poisson process with intensity measure `λ κ(x) dx`, obtained by thinning a
/// homogeneous process of intensity `λ · sup κ`.
pub fn sample_inhomogeneous_poisson<R: Rng + ?Sized>(
    kappa: &DensityField,
    lambda: f64,
    rng: &mut R,
) -> Result<PointSet> {
    check_positive("lambda", lambda)?;
    kappa.validate()?;
    let sup = kappa.sup_bound();
    if !(sup > 0.0) {
        return param("density with zero upper bound");
    }
    let w = &kappa.window;
    let n = poisson_count(lambda * sup * w.volume(), rng)?;
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        let x = w.sample_uniform(rng);
        if kappa.is_uniform() || rng.random::<f64>() * sup < kappa.evaluate(&x) {
            pts.push(x);
        }
    }
    dedup_with(&mut pts, rng, |r| thinned_draw(kappa, sup, r));
    Ok(PointSet::from_parts_unchecked(w.dim(), pts, None))
}

/// Exactly `n` i.i.d. points with density `κ` (rejection against `sup κ`).
pub fn sample_binomial<R: Rng + ?Sized>(
    n: usize,
    kappa: &DensityField,
    rng: &mut R,
) -> Result<PointSet> {
    if n == 0 {
        return param("binomial sample size must be at least 1");
    }
    kappa.validate()?;
    let sup = kappa.sup_bound();
    if !(sup > 0.0) {
        return param("density with zero upper bound");
    }
    let mut pts: Vec<Point> = (0..n).map(|_| thinned_draw(kappa, sup, rng)).collect();
    dedup_with(&mut pts, rng, |r| thinned_draw(kappa, sup, r));
    Ok(PointSet::from_parts_unchecked(kappa.dim(), pts, None))
}

/// Attaches (or replaces) marks according to `law`. Times are distinct.
pub fn attach_marks<R: Rng + ?Sized>(x: &PointSet, law: &MarkLaw, rng: &mut R) -> Result<PointSet> {
    law.validate()?;
    let base = |i: usize| x.mark(i).copied().unwrap_or_default();
    let mut marks: Vec<Mark> = (0..x.len()).map(|i| law.draw(base(i), rng)).collect();
    if law.time {
        loop {
            let mut order: Vec<usize> = (0..marks.len()).collect();
            order.sort_unstable_by(|&a, &b| {
                marks[a].time.unwrap().total_cmp(&marks[b].time.unwrap())
            });
            let dup = order
                .windows(2)
                .find(|w| marks[w[0]].time == marks[w[1]].time)
                .map(|w| w[1]);
            match dup {
                Some(i) => marks[i].time = Some(rng.random::<f64>()),
                None => break,
            }
        }
    }
    Ok(PointSet::from_parts_unchecked(
        x.dim(),
        x.points().to_vec(),
        Some(marks),
    ))
}

/// The map `x -> λ^{1/d} x` applied to every point; marks unchanged.
pub fn rescale(x: &PointSet, lambda: f64) -> Result<PointSet> {
    check_positive("lambda", lambda)?;
    if lambda == 1.0 {
        return Ok(x.clone());
    }
    let a = lambda.powf(1.0 / x.dim() as f64);
    Ok(x.affine(a, &Point::origin(x.dim())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        (crate::util::mean(v), crate::util::sample_variance(v))
    }

    #[test]
    fn homogeneous_count_moments_on_square() {
        let w = Window::Box {
            lo: vec![0.0, 0.0],
            hi: vec![2.0, 2.0],
        };
        let counts: Vec<f64> = (0..20_000)
            .map(|r| {
                let mut rng = RngStream::new(11, r).rng();
                sample_homogeneous_poisson(5.0, &w, &mut rng).unwrap().len() as f64
            })
            .collect();
        let (m, v) = mean_var(&counts);
        let se = (20.0f64 / 20_000.0).sqrt();
        assert!((m - 20.0).abs() < 4.0 * se, "mean {m}");
        assert!((v - 20.0).abs() < 1.0, "variance {v}");
    }

    #[test]
    fn unit_interval_mean_count() {
        let w = Window::unit_cube(1);
        let reps = 100_000;
        let counts: Vec<f64> = (0..reps)
            .map(|r| {
                let mut rng = RngStream::new(12, r).rng();
                sample_homogeneous_poisson(1.0, &w, &mut rng).unwrap().len() as f64
            })
            .collect();
        let (m, _) = mean_var(&counts);
        assert!(
            (m - 1.0).abs() < 3.0 * (1.0 / reps as f64).sqrt(),
            "mean {m}"
        );
    }

    #[test]
    fn ball_mean_count() {
        let w = Window::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let reps = 20_000;
        let counts: Vec<f64> = (0..reps)
            .map(|r| {
                let mut rng = RngStream::new(13, r).rng();
                sample_homogeneous_poisson(2.0, &w, &mut rng).unwrap().len() as f64
            })
            .collect();
        let (m, _) = mean_var(&counts);
        let target = 2.0 * std::f64::consts::PI;
        assert!(
            (m - target).abs() < 3.0 * (target / reps as f64).sqrt(),
            "mean {m}"
        );
    }

    #[test]
    fn parameter_errors() {
        let mut rng = RngStream::new(1, 0).rng();
        let w = Window::unit_cube(2);
        assert!(sample_homogeneous_poisson(0.0, &w, &mut rng).is_err());
        assert!(sample_homogeneous_poisson(-1.0, &w, &mut rng).is_err());
        let k = DensityField::uniform(w).unwrap();
        assert!(sample_binomial(0, &k, &mut rng).is_err());
        assert!(sample_inhomogeneous_poisson(&k, 0.0, &mut rng).is_err());
    }

    #[test]
    fn linear_density_left_half_counts() {
        // κ(x) = (1 + x1)/1.5: mass of [0, 1/2] x [0, 1] is (1/2 + 1/8)/1.5 = 5/12.
        let k = DensityField::linear(2).unwrap();
        let reps = 4000;
        let mut total = Vec::new();
        let mut left = Vec::new();
        for r in 0..reps {
            let mut rng = RngStream::new(21, r).rng();
            let x = sample_inhomogeneous_poisson(&k, 600.0, &mut rng).unwrap();
            total.push(x.len() as f64);
            left.push(x.points().iter().filter(|p| p.coord(0) < 0.5).count() as f64);
        }
        let (mt, _) = mean_var(&total);
        let (ml, _) = mean_var(&left);
        assert!(
            (mt - 600.0).abs() < 3.0 * (600.0 / reps as f64).sqrt(),
            "total {mt}"
        );
        assert!(
            (ml - 250.0).abs() < 3.0 * (250.0 / reps as f64).sqrt(),
            "left {ml}"
        );
    }

    #[test]
    fn binomial_fixed_count_and_left_fraction() {
        let k = DensityField::linear(2).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        assert_eq!(sample_binomial(3, &k, &mut rng).unwrap().len(), 3);
        let n = 10_000;
        let x = sample_binomial(n, &k, &mut rng).unwrap();
        let frac = x.points().iter().filter(|p| p.coord(0) < 0.5).count() as f64 / n as f64;
        let p = 5.0 / 12.0;
        assert!(
            (frac - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt(),
            "fraction {frac}"
        );
        let one = sample_binomial(
            1,
            &DensityField::uniform(Window::unit_cube(1)).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(one.len(), 1);
        assert!((0.0..=1.0).contains(&one.point(0).coord(0)));
    }

    #[test]
    fn vanishing_intensity_gives_empty_sets() {
        let k = DensityField::linear(2).unwrap();
        let empty = (0..200)
            .filter(|&r| {
                let mut rng = RngStream::new(8, r).rng();
                sample_inhomogeneous_poisson(&k, 1e-6, &mut rng)
                    .unwrap()
                    .is_empty()
            })
            .count();
        assert!(empty >= 199);
    }

    #[test]
    fn marks() {
        let mut rng = RngStream::new(2, 0).rng();
        let x = PointSet::from_coords(1, &[&[0.1], &[0.5], &[0.9]]).unwrap();
        let t = attach_marks(&x, &MarkLaw::times(), &mut rng).unwrap();
        let times: Vec<f64> = t.marks().unwrap().iter().map(|m| m.time.unwrap()).collect();
        assert!(times.iter().all(|t| (0.0..=1.0).contains(t)));
        assert!(times[0] != times[1] && times[1] != times[2] && times[0] != times[2]);

        let c = attach_marks(
            &x,
            &MarkLaw::radii(RadiusLaw::Constant { value: 0.1 }),
            &mut rng,
        )
        .unwrap();
        assert!(c.marks().unwrap().iter().all(|m| m.radius == Some(0.1)));

        let u = attach_marks(
            &t,
            &MarkLaw::radii(RadiusLaw::Uniform { lo: 0.05, hi: 0.1 }),
            &mut rng,
        )
        .unwrap();
        for (m, old) in u.marks().unwrap().iter().zip(&times) {
            let r = m.radius.unwrap();
            assert!((0.05..=0.1).contains(&r));
            assert_eq!(m.time, Some(*old), "time marks kept when radii replaced");
        }

        let unbounded = MarkLaw::radii(RadiusLaw::Uniform {
            lo: 0.0,
            hi: f64::INFINITY,
        });
        assert!(attach_marks(&x, &unbounded, &mut rng).is_err());
    }

    #[test]
    fn rescale_examples() {
        let x = PointSet::from_coords(2, &[&[1.0, 1.0]]).unwrap();
        assert_eq!(rescale(&x, 1.0).unwrap(), x);
        assert_eq!(rescale(&x, 4.0).unwrap().point(0).coords(), &[2.0, 2.0]);
        let y = PointSet::from_coords(1, &[&[0.5]]).unwrap();
        assert_eq!(rescale(&y, 9.0).unwrap().point(0).coords(), &[4.5]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let k = DensityField::gaussian_bump(3, 0.5, 0.5).unwrap();
        let a = sample_inhomogeneous_poisson(&k, 300.0, &mut RngStream::new(4, 9).rng()).unwrap();
        let b = sample_inhomogeneous_poisson(&k, 300.0, &mut RngStream::new(4, 9).rng()).unwrap();
        assert_eq!(a, b);
    }
}
