use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::point_process::{Point, PointSet, MAX_DIM};

/// A candidate neighbour, ordered by squared distance, then coordinates, then id.
#[derive(Clone, Copy, Debug)]
pub struct Candidate {
    pub d2: f64,
    pub id: usize,
    pub point: Point,
}

impl Candidate {
    pub fn key_cmp(&self, other: &Self) -> Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then_with(|| self.point.lex_cmp(&other.point))
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.key_cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

/// Uniform grid over the bounding box of a point set, stored in CSR form.
/// The cell side is `(vol(bbox) / n)^{1/d}`, so a Poisson sample has O(1)
/// points per cell.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    dim: usize,
    origin: [f64; MAX_DIM],
    side: f64,
    cells: [usize; MAX_DIM],
    start: Vec<u32>,
    ids: Vec<u32>,
    pts: Vec<Point>,
    len: usize,
}

impl SpatialIndex {
    pub fn new(x: &PointSet) -> Self {
        Self::from_points(x.dim(), x.points())
    }

    pub fn from_points(dim: usize, points: &[Point]) -> Self {
        let n = points.len();
        let mut lo = [0.0f64; MAX_DIM];
        let mut hi = [0.0f64; MAX_DIM];
        if n > 0 {
            lo = *points[0].raw();
            hi = lo;
            for p in points {
                for a in 0..dim {
                    lo[a] = lo[a].min(p.coord(a));
                    hi[a] = hi[a].max(p.coord(a));
                }
            }
        }
        let scale = (0..dim)
            .map(|a| lo[a].abs().max(hi[a].abs()))
            .fold(1.0, f64::max);
        let max_ext = (0..dim).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        let floor = if max_ext > 0.0 {
            (max_ext * 1e-6).max(scale * 1e-12)
        } else {
            1.0
        };
        let ext: Vec<f64> = (0..dim).map(|a| (hi[a] - lo[a]).max(floor)).collect();
        let vol: f64 = ext.iter().product();
        let mut side = (vol / n.max(1) as f64).powf(1.0 / dim as f64);
        // Guard against runaway cell counts on nearly flat inputs.
        loop {
            let total: f64 = ext.iter().map(|e| (e / side).ceil().max(1.0)).product();
            if total <= 4.0 * n.max(1) as f64 + 8.0 {
                break;
            }
            side *= 1.5;
        }
        let mut cells = [1usize; MAX_DIM];
        for a in 0..dim {
            cells[a] = ((ext[a] / side).ceil() as usize).max(1);
        }
        let total: usize = cells[..dim].iter().product();

        let mut index = SpatialIndex {
            dim,
            origin: lo,
            side,
            cells,
            start: Vec::new(),
            ids: Vec::new(),
            pts: Vec::new(),
            len: n,
        };
        let cell_of: Vec<usize> = points
            .iter()
            .map(|p| index.flat(&index.cell_coords(p)))
            .collect();
        let mut count = vec![0u32; total + 1];
        for &c in &cell_of {
            count[c + 1] += 1;
        }
        for i in 0..total {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut ids = vec![0u32; n];
        let mut pts = vec![Point::origin(dim); n];
        for (i, &c) in cell_of.iter().enumerate() {
            let slot = fill[c] as usize;
            ids[slot] = i as u32;
            pts[slot] = points[i];
            fill[c] += 1;
        }
        index.start = count;
        index.ids = ids;
        index.pts = pts;
        index
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unclamped integer cell coordinates of `p`.
    fn cell_coords(&self, p: &Point) -> [i64; MAX_DIM] {
        let mut c = [0i64; MAX_DIM];
        for a in 0..self.dim {
            let v = ((p.coord(a) - self.origin[a]) / self.side).floor();
            c[a] = v.clamp(-1e15, 1e15) as i64;
        }
        c
    }

    fn flat(&self, c: &[i64; MAX_DIM]) -> usize {
        let mut f = 0usize;
        for a in (0..self.dim).rev() {
            let v = c[a].clamp(0, self.cells[a] as i64 - 1) as usize;
            f = f * self.cells[a] + v;
        }
        f
    }

    fn cell_slice(&self, c: &[i64; MAX_DIM]) -> std::ops::Range<usize> {
        let f = self.flat(c);
        self.start[f] as usize..self.start[f + 1] as usize
    }

    /// All points with `|p - center| < r` (open) or `<= r` (closed), in id order.
    pub fn within(&self, center: &Point, r: f64, closed: bool) -> Vec<Candidate> {
        let mut out = Vec::new();
        if self.len == 0 || !(r >= 0.0) {
            return out;
        }
        let r2 = r * r;
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        for a in 0..self.dim {
            let l = ((center.coord(a) - r - self.origin[a]) / self.side).floor();
            let h = ((center.coord(a) + r - self.origin[a]) / self.side).floor();
            lo[a] = l.max(0.0).min(self.cells[a] as f64 - 1.0) as i64;
            hi[a] = h.max(0.0).min(self.cells[a] as f64 - 1.0) as i64;
            if h < 0.0 || l > self.cells[a] as f64 - 1.0 {
                return out;
            }
        }
        let mut c = lo;
        loop {
            for s in self.cell_slice(&c) {
                let d2 = self.pts[s].dist2(center);
                if d2 < r2 || (closed && d2 == r2) {
                    out.push(Candidate {
                        d2,
                        id: self.ids[s] as usize,
                        point: self.pts[s],
                    });
                }
            }
            // odometer over the cell box
            let mut a = 0;
            loop {
                if a == self.dim {
                    out.sort_unstable_by_key(|c| c.id);
                    return out;
                }
                if c[a] < hi[a] {
                    c[a] += 1;
                    break;
                }
                c[a] = lo[a];
                a += 1;
            }
        }
    }

    /// Iterates over all indexed points in increasing `(distance, coordinates, id)` order.
    pub fn nearest_iter(&self, center: Point) -> NeighborIter<'_> {
        let cc = self.cell_coords(&center);
        NeighborIter {
            index: self,
            center,
            center_cell: cc,
            ring: -1,
            heap: BinaryHeap::new(),
            exhausted: self.len == 0,
        }
    }

    /// The `k` nearest points to `center`, skipping `exclude`.
    pub fn k_nearest(&self, center: &Point, k: usize, exclude: Option<usize>) -> Vec<Candidate> {
        self.nearest_iter(*center)
            .filter(|c| Some(c.id) != exclude)
            .take(k)
            .collect()
    }
}

pub struct NeighborIter<'a> {
    index: &'a SpatialIndex,
    center: Point,
    center_cell: [i64; MAX_DIM],
    ring: i64,
    heap: BinaryHeap<Reverse<Candidate>>,
    exhausted: bool,
}

impl NeighborIter<'_> {
    /// Distance from the center to the outside of the scanned cell box.
    fn scanned_radius(&self) -> f64 {
        if self.exhausted {
            return f64::INFINITY;
        }
        if self.ring < 0 {
            return f64::NEG_INFINITY;
        }
        let ix = self.index;
        let mut lb = f64::INFINITY;
        for a in 0..ix.dim {
            let box_lo = ix.origin[a] + (self.center_cell[a] - self.ring) as f64 * ix.side;
            let box_hi = ix.origin[a] + (self.center_cell[a] + self.ring + 1) as f64 * ix.side;
            lb = lb
                .min(self.center.coord(a) - box_lo)
                .min(box_hi - self.center.coord(a));
        }
        lb
    }

    fn scan_next_ring(&mut self) {
        let ix = self.index;
        // Rings closer than the grid's Chebyshev distance hold no cells.
        let gap = (0..ix.dim)
            .map(|a| {
                let c = self.center_cell[a];
                if c < 0 {
                    -c
                } else {
                    (c - (ix.cells[a] as i64 - 1)).max(0)
                }
            })
            .max()
            .unwrap_or(0);
        self.ring = (self.ring + 1).max(gap);
        let d = ix.dim;
        let r = self.ring;
        let cc = self.center_cell;
        let mut covers = true;
        for a in 0..d {
            if cc[a] - r > 0 || cc[a] + r < ix.cells[a] as i64 - 1 {
                covers = false;
            }
        }
        let clamp_lo = |a: usize| (cc[a] - r).max(0);
        let clamp_hi = |a: usize| (cc[a] + r).min(ix.cells[a] as i64 - 1);
        let in_range = |a: usize, v: i64| v >= 0 && v < ix.cells[a] as i64;

        // Enumerate the leading d-1 axes over the clamped box; the last axis is
        // either the full range (if a leading axis sits on the shell) or its two ends.
        let last = d - 1;
        let mut lead = [0i64; MAX_DIM];
        let mut ok = true;
        for a in 0..last {
            lead[a] = clamp_lo(a);
            if lead[a] > clamp_hi(a) {
                ok = false;
            }
        }
        while ok {
            let on_shell = (0..last).any(|a| (lead[a] - cc[a]).abs() == r);
            let visit = |v: i64, heap: &mut BinaryHeap<Reverse<Candidate>>| {
                if !in_range(last, v) {
                    return;
                }
                let mut c = lead;
                c[last] = v;
                for s in ix.cell_slice(&c) {
                    heap.push(Reverse(Candidate {
                        d2: ix.pts[s].dist2(&self.center),
                        id: ix.ids[s] as usize,
                        point: ix.pts[s],
                    }));
                }
            };
            if on_shell {
                for v in clamp_lo(last)..=clamp_hi(last) {
                    visit(v, &mut self.heap);
                }
            } else {
                visit(cc[last] - r, &mut self.heap);
                if r > 0 {
                    visit(cc[last] + r, &mut self.heap);
                }
            }
            let mut a = 0;
            loop {
                if a == last {
                    ok = false;
                    break;
                }
                if lead[a] < clamp_hi(a) {
                    lead[a] += 1;
                    break;
                }
                lead[a] = clamp_lo(a);
                a += 1;
            }
        }
        if covers {
            self.exhausted = true;
        }
    }
}

impl Iterator for NeighborIter<'_> {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        loop {
            if let Some(Reverse(top)) = self.heap.peek() {
                let lb = self.scanned_radius();
                if self.exhausted || top.d2 < lb * lb && lb > 0.0 {
                    return self.heap.pop().map(|r| r.0);
                }
            } else if self.exhausted {
                return None;
            }
            self.scan_next_ring();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::{sample_homogeneous_poisson, Window};
    use crate::RngStream;

    fn brute_sorted(x: &PointSet, c: &Point) -> Vec<usize> {
        let mut v: Vec<Candidate> = x
            .points()
            .iter()
            .enumerate()
            .map(|(id, p)| Candidate {
                d2: p.dist2(c),
                id,
                point: *p,
            })
            .collect();
        v.sort();
        v.into_iter().map(|c| c.id).collect()
    }

    #[test]
    fn single_point_is_always_nearest() {
        let x = PointSet::from_coords(2, &[&[0.3, 0.7]]).unwrap();
        let ix = SpatialIndex::new(&x);
        for q in [[0.0, 0.0], [100.0, -5.0], [0.3, 0.7]] {
            let nn = ix.k_nearest(&Point::new(&q).unwrap(), 1, None);
            assert_eq!(nn.len(), 1);
            assert_eq!(nn[0].id, 0);
        }
    }

    #[test]
    fn radius_zero_range_is_empty() {
        let x = PointSet::from_coords(2, &[&[0.3, 0.7], &[0.4, 0.1]]).unwrap();
        let ix = SpatialIndex::new(&x);
        assert!(ix.within(x.point(0), 0.0, false).is_empty());
        let closed = ix.within(x.point(0), 0.0, true);
        assert_eq!(
            closed.len(),
            1,
            "closed query returns only the center itself"
        );
    }

    #[test]
    fn iteration_order_matches_brute_force() {
        for d in 1..=3 {
            let mut rng = RngStream::new(40 + d as u64, 0).rng();
            let x = sample_homogeneous_poisson(100.0, &Window::unit_cube(d), &mut rng).unwrap();
            let ix = SpatialIndex::new(&x);
            for _ in 0..50 {
                let q = Window::centered_cube(d, 1.5).sample_uniform(&mut rng);
                let got: Vec<usize> = ix.nearest_iter(q).map(|c| c.id).collect();
                assert_eq!(got, brute_sorted(&x, &q));
            }
        }
    }

    #[test]
    fn within_matches_brute_force() {
        let mut rng = RngStream::new(5, 1).rng();
        let x = sample_homogeneous_poisson(200.0, &Window::unit_cube(2), &mut rng).unwrap();
        let ix = SpatialIndex::new(&x);
        for _ in 0..50 {
            let q = Window::unit_cube(2).sample_uniform(&mut rng);
            let r = 0.2;
            let got: Vec<usize> = ix.within(&q, r, false).iter().map(|c| c.id).collect();
            let want: Vec<usize> = (0..x.len()).filter(|&i| x.point(i).dist(&q) < r).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn grid_ties_broken_lexicographically() {
        let pts: Vec<Vec<f64>> = (0..3)
            .flat_map(|i| (0..3).map(move |j| vec![i as f64, j as f64]))
            .collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let x = PointSet::from_coords(2, &refs).unwrap();
        let ix = SpatialIndex::new(&x);
        let center = Point::new(&[1.0, 1.0]).unwrap();
        let got: Vec<Vec<f64>> = ix
            .k_nearest(&center, 4, Some(4))
            .iter()
            .map(|c| c.point.coords().to_vec())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 2.0],
                vec![2.0, 1.0]
            ]
        );
    }

    #[test]
    fn flat_inputs_are_handled() {
        let pts: Vec<Vec<f64>> = (0..500).map(|i| vec![i as f64 * 0.01, 0.5]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let x = PointSet::from_coords(2, &refs).unwrap();
        let ix = SpatialIndex::new(&x);
        let q = Point::new(&[2.004, 3.0]).unwrap();
        let got: Vec<usize> = ix.nearest_iter(q).map(|c| c.id).collect();
        assert_eq!(got, brute_sorted(&x, &q));
    }
}
