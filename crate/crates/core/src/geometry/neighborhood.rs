//! A read-only view of `base ∪ extras`, optionally restricted to a closed
//! ball, supporting ordered neighbour scans without rebuilding the index.
//! Estimators use it to insert the origin (and a second point) into a sampled
//! configuration many times per replicate.

use std::cell::OnceCell;
use std::cmp::Ordering;

use super::index::{Candidate, NeighborIter, SpatialIndex};
use crate::error::{param, Result};
use crate::point_process::{Mark, Point, PointSet};

pub struct Neighborhood<'a> {
    base: &'a PointSet,
    index: &'a SpatialIndex,
    /// Inserted points; the flag exempts a point from the clip.
    extras: Vec<(Point, Option<Mark>, bool)>,
    clip: Option<(Point, f64)>,
    knn_cache: Option<(&'a [Vec<Candidate>], usize)>,
    base_extent: OnceCell<MarkExtent>,
}

/// Range of the marks present: earliest time and largest radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkExtent {
    pub min_time: f64,
    pub max_radius: f64,
}

impl MarkExtent {
    const EMPTY: MarkExtent = MarkExtent {
        min_time: f64::INFINITY,
        max_radius: 0.0,
    };

    fn add(&mut self, m: &Mark) {
        if let Some(t) = m.time {
            self.min_time = self.min_time.min(t);
        }
        if let Some(r) = m.radius {
            self.max_radius = self.max_radius.max(r);
        }
    }
}

impl<'a> Neighborhood<'a> {
    pub fn new(base: &'a PointSet, index: &'a SpatialIndex) -> Self {
        Neighborhood {
            base,
            index,
            extras: Vec::new(),
            clip: None,
            knn_cache: None,
            base_extent: OnceCell::new(),
        }
    }

    /// Supplies the `k`-nearest lists of the base points (as from `knn_lists`),
    /// used to answer neighbour queries of base points in O(k + extras).
    pub fn with_knn_cache(mut self, lists: &'a [Vec<Candidate>], k: usize) -> Self {
        self.knn_cache = Some((lists, k));
        self
    }

    /// Restricts the configuration to the closed ball `B_s(center)`.
    pub fn with_clip(mut self, center: Point, radius: f64) -> Self {
        self.clip = Some((center, radius));
        self
    }

    pub fn clip(&self) -> Option<(Point, f64)> {
        self.clip
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    /// Inserts a point and returns its id. The point must not already be present.
    pub fn insert(&mut self, p: Point, mark: Option<Mark>) -> Result<usize> {
        self.insert_with(p, mark, false)
    }

    /// Inserts a point that stays visible outside the clip ball: the
    /// configuration becomes `(base ∩ B_s) ∪ extras`.
    pub fn insert_external(&mut self, p: Point, mark: Option<Mark>) -> Result<usize> {
        self.insert_with(p, mark, true)
    }

    fn insert_with(&mut self, p: Point, mark: Option<Mark>, external: bool) -> Result<usize> {
        if p.dim() != self.dim() {
            return param("inserted point has the wrong dimension");
        }
        let clash = self.index.within(&p, 0.0, true);
        if !clash.is_empty() || self.extras.iter().any(|(q, _, _)| *q == p) {
            return param("inserted point coincides with an existing point");
        }
        self.extras.push((p, mark, external));
        Ok(self.base.len() + self.extras.len() - 1)
    }

    pub fn truncate_extras(&mut self, keep: usize) {
        self.extras.truncate(keep);
    }

    pub fn extras_len(&self) -> usize {
        self.extras.len()
    }

    pub fn point(&self, id: usize) -> Point {
        let n = self.base.len();
        if id < n {
            *self.base.point(id)
        } else {
            self.extras[id - n].0
        }
    }

    pub fn mark(&self, id: usize) -> Option<Mark> {
        let n = self.base.len();
        if id < n {
            self.base.mark(id).copied()
        } else {
            self.extras[id - n].1
        }
    }

    fn visible(&self, p: &Point) -> bool {
        match &self.clip {
            Some((c, s)) => p.dist2(c) <= s * s,
            None => true,
        }
    }

    pub fn contains(&self, id: usize) -> bool {
        let n = self.base.len();
        match id.checked_sub(n) {
            None => self.visible(self.base.point(id)),
            Some(k) => {
                k < self.extras.len() && (self.extras[k].2 || self.visible(&self.extras[k].0))
            }
        }
    }

    fn extra_candidates(&self, center: &Point) -> Vec<Candidate> {
        let n = self.base.len();
        let mut v: Vec<Candidate> = self
            .extras
            .iter()
            .enumerate()
            .filter(|(_, (p, _, ext))| *ext || self.visible(p))
            .map(|(k, (p, _, _))| Candidate {
                d2: p.dist2(center),
                id: n + k,
                point: *p,
            })
            .collect();
        v.sort();
        v
    }

    /// All present points in increasing `(distance, coordinates, id)` order.
    pub fn nearest_iter(&self, center: Point) -> MergedIter<'_> {
        MergedIter {
            base: self.index.nearest_iter(center),
            pending: None,
            extras: self.extra_candidates(&center),
            next_extra: 0,
            clip: self.clip,
            // Beyond the clip ball nothing is visible: stop early.
            horizon: self.clip.map(|(c, s)| {
                let r = center.dist(&c) + s;
                r * r
            }),
        }
    }

    /// The `k` nearest present points to point `id` (which is excluded).
    pub fn k_nearest_of(&self, id: usize, k: usize) -> Vec<Candidate> {
        let p = self.point(id);
        if let (Some((lists, kc)), None) = (self.knn_cache, self.clip) {
            if id < self.base.len() && k <= kc {
                let mut out: Vec<Candidate> = lists[id].clone();
                out.extend(self.extra_candidates(&p));
                out.sort();
                out.truncate(k);
                return out;
            }
        }
        self.nearest_iter(p)
            .filter(|c| c.id != id)
            .take(k)
            .collect()
    }

    /// All present points within distance `r` of `center` (closed ball), by id.
    pub fn within(&self, center: &Point, r: f64) -> Vec<Candidate> {
        let mut v: Vec<Candidate> = self
            .index
            .within(center, r, true)
            .into_iter()
            .filter(|c| self.visible(&c.point))
            .collect();
        let r2 = r * r;
        v.extend(
            self.extra_candidates(center)
                .into_iter()
                .filter(|c| c.d2 <= r2),
        );
        v.sort_by_key(|c| c.id);
        v
    }

    /// Number of present points.
    pub fn present_count(&self) -> usize {
        match self.clip {
            Some(_) => self.all_ids().len(),
            None => self.base.len() + self.extras.len(),
        }
    }

    /// Mark range over base and extras (ignoring the clip, so it is an upper
    /// bound for the present points).
    pub fn mark_extent(&self) -> MarkExtent {
        let mut e = *self.base_extent.get_or_init(|| {
            let mut e = MarkExtent::EMPTY;
            for m in self.base.marks().unwrap_or(&[]) {
                e.add(m);
            }
            e
        });
        for m in self.extras.iter().filter_map(|x| x.1.as_ref()) {
            e.add(m);
        }
        e
    }

    /// Ids of every present point.
    pub fn all_ids(&self) -> Vec<usize> {
        let n = self.base.len();
        let mut ids: Vec<usize> = match &self.clip {
            Some((c, s)) => self
                .index
                .within(c, *s, true)
                .into_iter()
                .map(|c| c.id)
                .collect(),
            None => (0..n).collect(),
        };
        ids.extend(
            (0..self.extras.len())
                .map(|k| n + k)
                .filter(|&id| self.contains(id)),
        );
        ids
    }

    /// Materializes the given ids as a point set (with marks when every point
    /// carries one), preserving the order of `ids`.
    pub fn materialize(&self, ids: &[usize]) -> PointSet {
        let pts: Vec<Point> = ids.iter().map(|&i| self.point(i)).collect();
        let marks: Option<Vec<Mark>> = ids.iter().map(|&i| self.mark(i)).collect();
        match marks {
            Some(m) if !ids.is_empty() => PointSet::from_parts_unchecked(self.dim(), pts, Some(m)),
            _ => PointSet::from_parts_unchecked(self.dim(), pts, None),
        }
    }
}

pub struct MergedIter<'a> {
    base: NeighborIter<'a>,
    pending: Option<Candidate>,
    extras: Vec<Candidate>,
    next_extra: usize,
    clip: Option<(Point, f64)>,
    horizon: Option<f64>,
}

impl Iterator for MergedIter<'_> {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        if self.pending.is_none() {
            loop {
                match self.base.next() {
                    None => break,
                    Some(c) => {
                        if let Some(h) = self.horizon {
                            if c.d2 > h {
                                break;
                            }
                        }
                        let ok = match &self.clip {
                            Some((cc, s)) => c.point.dist2(cc) <= s * s,
                            None => true,
                        };
                        if ok {
                            self.pending = Some(c);
                            break;
                        }
                    }
                }
            }
        }
        let extra = self.extras.get(self.next_extra).copied();
        match (self.pending, extra) {
            (None, None) => None,
            (Some(b), None) => {
                self.pending = None;
                Some(b)
            }
            (None, Some(e)) => {
                self.next_extra += 1;
                Some(e)
            }
            (Some(b), Some(e)) => {
                if e.key_cmp(&b) == Ordering::Less {
                    self.next_extra += 1;
                    Some(e)
                } else {
                    self.pending = None;
                    Some(b)
                }
            }
        }
    }
}

/// A partition of directions around a point into cells of bounded angular
/// diameter: sign in d=1, equal sectors in d=2, subdivided cube faces in d=3.
#[derive(Clone, Debug)]
pub struct DirectionCells {
    dim: usize,
    per_axis: usize,
    diameter: f64,
}

impl DirectionCells {
    /// The coarsest partition whose cells have angular diameter at most `max_angle`.
    pub fn new(dim: usize, max_angle: f64) -> Self {
        match dim {
            1 => DirectionCells {
                dim,
                per_axis: 1,
                diameter: 0.0,
            },
            2 => {
                let m = (std::f64::consts::TAU / max_angle).ceil().max(1.0) as usize;
                DirectionCells {
                    dim,
                    per_axis: m,
                    diameter: std::f64::consts::TAU / m as f64,
                }
            }
            _ => {
                let mut m = 1;
                loop {
                    let d = cube_face_diameter(m);
                    if d <= max_angle || m > 64 {
                        return DirectionCells {
                            dim,
                            per_axis: m,
                            diameter: d,
                        };
                    }
                    m += 1;
                }
            }
        }
    }

    pub fn count(&self) -> usize {
        match self.dim {
            1 => 2,
            2 => self.per_axis,
            _ => 6 * self.per_axis * self.per_axis,
        }
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Cell containing the direction of the nonzero vector `v`.
    pub fn cell(&self, v: &Point) -> usize {
        match self.dim {
            1 => (v.coord(0) >= 0.0) as usize,
            2 => {
                let m = self.per_axis as f64;
                let a = v
                    .coord(1)
                    .atan2(v.coord(0))
                    .rem_euclid(std::f64::consts::TAU);
                ((a / std::f64::consts::TAU * m) as usize).min(self.per_axis - 1)
            }
            _ => {
                let c = [v.coord(0), v.coord(1), v.coord(2)];
                let major = (0..3)
                    .max_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs()))
                    .unwrap();
                let face = 2 * major + (c[major] >= 0.0) as usize;
                let (u, w) = ((major + 1) % 3, (major + 2) % 3);
                let m = self.per_axis;
                let bin =
                    |t: f64| ((((t / c[major].abs()) + 1.0) * 0.5 * m as f64) as usize).min(m - 1);
                (face * m + bin(c[u])) * m + bin(c[w])
            }
        }
    }
}

/// Largest angular diameter of the cells of a cube face divided `m x m`.
fn cube_face_diameter(m: usize) -> f64 {
    let angle = |a: [f64; 3], b: [f64; 3]| {
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        (dot / (na * nb)).clamp(-1.0, 1.0).acos()
    };
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let u0 = -1.0 + 2.0 * i as f64 / m as f64;
            let u1 = -1.0 + 2.0 * (i + 1) as f64 / m as f64;
            let w0 = -1.0 + 2.0 * j as f64 / m as f64;
            let w1 = -1.0 + 2.0 * (j + 1) as f64 / m as f64;
            let corners = [[u0, w0, 1.0], [u1, w0, 1.0], [u1, w1, 1.0], [u0, w1, 1.0]];
            for a in 0..4 {
                for b in a + 1..4 {
                    worst = worst.max(angle(corners[a], corners[b]));
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::{sample_homogeneous_poisson, Window};
    use crate::RngStream;

    #[test]
    fn merged_order_matches_materialized_brute_force() {
        let mut rng = RngStream::new(9, 0).rng();
        let x = sample_homogeneous_poisson(80.0, &Window::unit_cube(2), &mut rng).unwrap();
        let ix = SpatialIndex::new(&x);
        let mut nb = Neighborhood::new(&x, &ix).with_clip(Point::new(&[0.5, 0.5]).unwrap(), 0.4);
        nb.insert(Point::new(&[0.5, 0.5]).unwrap(), None).unwrap();
        nb.insert(Point::new(&[0.51, 0.52]).unwrap(), None).unwrap();
        nb.insert(Point::new(&[2.0, 2.0]).unwrap(), None).unwrap();
        let q = Point::new(&[0.3, 0.6]).unwrap();
        let got: Vec<usize> = nb.nearest_iter(q).map(|c| c.id).collect();
        let mut want: Vec<Candidate> = (0..x.len() + 3)
            .filter(|&i| nb.contains(i))
            .map(|i| Candidate {
                d2: nb.point(i).dist2(&q),
                id: i,
                point: nb.point(i),
            })
            .collect();
        want.sort();
        assert_eq!(got, want.iter().map(|c| c.id).collect::<Vec<_>>());
        assert!(!got.contains(&(x.len() + 2)), "clipped extra is hidden");
        assert!(nb.insert(*x.point(0), None).is_err());
    }

    #[test]
    fn knn_cache_agrees_with_scan() {
        let mut rng = RngStream::new(10, 0).rng();
        let x = sample_homogeneous_poisson(100.0, &Window::unit_cube(2), &mut rng).unwrap();
        let ix = SpatialIndex::new(&x);
        let lists = crate::geometry::knn_lists(&x, 2).unwrap();
        let mut cached = Neighborhood::new(&x, &ix).with_knn_cache(&lists, 2);
        let mut plain = Neighborhood::new(&x, &ix);
        for p in [[0.5, 0.5], [0.1, 0.9]] {
            cached.insert(Point::new(&p).unwrap(), None).unwrap();
            plain.insert(Point::new(&p).unwrap(), None).unwrap();
        }
        for id in 0..x.len() + 2 {
            for k in 1..=2 {
                let a: Vec<usize> = cached.k_nearest_of(id, k).iter().map(|c| c.id).collect();
                let b: Vec<usize> = plain.k_nearest_of(id, k).iter().map(|c| c.id).collect();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn direction_cells_have_requested_diameter() {
        let sixty = std::f64::consts::FRAC_PI_3;
        let c2 = DirectionCells::new(2, sixty);
        assert_eq!(c2.count(), 6);
        let c3 = DirectionCells::new(3, sixty);
        assert!(c3.diameter() <= sixty);
        // Sampled pairs from the same cell are never further apart than the diameter.
        let mut rng = RngStream::new(3, 3).rng();
        let w = Window::centered_cube(3, 1.0);
        let pts: Vec<Point> = (0..4000).map(|_| w.sample_uniform(&mut rng)).collect();
        for a in pts.iter().take(400) {
            for b in &pts {
                if c3.cell(a) == c3.cell(b) {
                    let cos = (a.coord(0) * b.coord(0)
                        + a.coord(1) * b.coord(1)
                        + a.coord(2) * b.coord(2))
                        / (a.norm() * b.norm());
                    assert!(cos.clamp(-1.0, 1.0).acos() <= c3.diameter() + 1e-9);
                }
            }
        }
    }
}
