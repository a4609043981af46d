//! Germ–grain (Boolean model) volume functional: the area of the union of
//! grains `B(x_i, T_i)` inside the Voronoi cell of `x`.

use rand::Rng;

use crate::error::{param, Result};
use crate::geometry::{clip_halfplane, polygon_contains, Polygon, SpatialIndex};
use crate::point_process::{Point, PointSet, Window};

/// Lattice size used per cell: the Fibonacci number F_26.
pub const QMC_SAMPLES: usize = 121_393;
const QMC_GENERATOR: usize = 75_025;

/// Rank-1 Fibonacci lattice on `[0,1)^2`, shifted to cell midpoints.
#[derive(Clone, Copy, Debug)]
pub struct FibonacciLattice {
    n: usize,
    g: usize,
}

impl Default for FibonacciLattice {
    fn default() -> Self {
        FibonacciLattice {
            n: QMC_SAMPLES,
            g: QMC_GENERATOR,
        }
    }
}

impl FibonacciLattice {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        let n = self.n as f64;
        let u = (i as f64 + 0.5) / n;
        let v = (((i * self.g) % self.n) as f64 + 0.5) / n;
        [u, v]
    }

    /// `|{p ∈ [lo, hi] : inside(p)}|` estimated on the lattice.
    pub fn area(&self, lo: [f64; 2], hi: [f64; 2], inside: impl Fn([f64; 2]) -> bool) -> f64 {
        let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
        if !(w > 0.0 && h > 0.0) {
            return 0.0;
        }
        let hits = (0..self.n)
            .filter(|&i| {
                let [u, v] = self.node(i);
                inside([lo[0] + u * w, lo[1] + v * h])
            })
            .count();
        w * h * hits as f64 / self.n as f64
    }
}

fn in_union(p: [f64; 2], grains: &[([f64; 2], f64)]) -> bool {
    grains
        .iter()
        .any(|(c, r)| (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) <= r * r)
}

/// Core computation. `others` are the sites within `2 T_max` of `x`; the
/// union inside the cell lies in `B(x, T_max)` (a grain point closer to `x`
/// than to its own centre is within that centre's radius of `x`), so
/// bisectors of further sites cannot matter.
pub(crate) fn cell_union_area(
    x: [f64; 2],
    others: &[[f64; 2]],
    grains: &[([f64; 2], f64)],
    t_max: f64,
    window: Option<&Window>,
) -> f64 {
    if t_max <= 0.0 || grains.is_empty() {
        return 0.0;
    }
    let (mut lo, mut hi) = ([x[0] - t_max, x[1] - t_max], [x[0] + t_max, x[1] + t_max]);
    if let Some(w) = window {
        let (wl, wh) = w.bounds();
        for a in 0..2 {
            lo[a] = lo[a].max(wl.coord(a));
            hi[a] = hi[a].min(wh.coord(a));
        }
        if lo[0] >= hi[0] || lo[1] >= hi[1] {
            return 0.0;
        }
    }
    let mut poly: Polygon = vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]];
    for y in others {
        let m = [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])];
        poly = clip_halfplane(&poly, m, [y[0] - x[0], y[1] - x[1]]);
        if poly.len() < 3 {
            return 0.0;
        }
    }
    let mut blo = [f64::INFINITY; 2];
    let mut bhi = [f64::NEG_INFINITY; 2];
    for v in &poly {
        for a in 0..2 {
            blo[a] = blo[a].min(v[a]);
            bhi[a] = bhi[a].max(v[a]);
        }
    }
    let ball = window.filter(|w| !w.is_box());
    FibonacciLattice::default().area(blo, bhi, |p| {
        polygon_contains(&poly, p, 0.0)
            && in_union(p, grains)
            && ball.is_none_or(|w| w.contains(&Point::new(&p).unwrap()))
    })
}

pub(crate) fn radii_of(x: &PointSet) -> Result<Vec<f64>> {
    if x.dim() != 2 {
        return param("germ-grain functional is only defined in d = 2");
    }
    if x.is_empty() {
        return Ok(vec![]);
    }
    if !x.has_radii() {
        return param("germ-grain functional needs a radius mark on every point");
    }
    Ok(x.marks()
        .unwrap()
        .iter()
        .map(|m| m.radius.unwrap())
        .collect())
}

pub(crate) fn volume_with_index(
    x: &PointSet,
    radii: &[f64],
    index: &SpatialIndex,
    i: usize,
    window: Option<&Window>,
) -> f64 {
    let t_max = radii.iter().copied().fold(0.0, f64::max);
    let p = x.point(i);
    let xy = [p.coord(0), p.coord(1)];
    let near = index.within(p, 2.0 * t_max, true);
    let others: Vec<[f64; 2]> = near
        .iter()
        .filter(|c| c.id != i)
        .map(|c| [c.point.coord(0), c.point.coord(1)])
        .collect();
    let grains: Vec<([f64; 2], f64)> = near
        .iter()
        .filter(|c| c.d2.sqrt() <= t_max + radii[c.id])
        .map(|c| ([c.point.coord(0), c.point.coord(1)], radii[c.id]))
        .collect();
    cell_union_area(xy, &others, &grains, t_max, window)
}

/// `L(x_i; X) = |(∪_j B(x_j, T_j)) ∩ V(x_i; X) ∩ W|` by quasi-Monte Carlo.
pub fn germ_grain_volume(x: &PointSet, i: usize, window: Option<&Window>) -> Result<f64> {
    let radii = radii_of(x)?;
    if i >= x.len() {
        return param(format!("index {i} out of range (n = {})", x.len()));
    }
    let index = SpatialIndex::new(x);
    Ok(volume_with_index(x, &radii, &index, i, window))
}

/// Plain Monte Carlo estimate of `|(∪ B(c, r)) ∩ W|` from `samples` uniform
/// draws over the window's bounding box.
pub fn hit_or_miss_union_area<R: Rng + ?Sized>(
    grains: &[(Point, f64)],
    window: &Window,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let (lo, hi) = window.bounds();
    let g: Vec<([f64; 2], f64)> = grains
        .iter()
        .map(|(c, r)| ([c.coord(0), c.coord(1)], *r))
        .collect();
    let hits = (0..samples)
        .filter(|_| {
            let p = [
                rng.random_range(lo.coord(0)..hi.coord(0)),
                rng.random_range(lo.coord(1)..hi.coord(1)),
            ];
            window.contains(&Point::new(&p).unwrap()) && in_union(p, &g)
        })
        .count();
    (hi.coord(0) - lo.coord(0)) * (hi.coord(1) - lo.coord(1)) * hits as f64 / samples as f64
}
