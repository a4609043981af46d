//! Planar Delaunay triangulation by incremental Bowyer–Watson insertion.
//!
//! The convex hull is closed off with ghost triangles `(u, v, GHOST)` so that
//! points outside the current hull are handled by the same cavity search.
//! Orientation and in-circle tests use exact adaptive predicates. Exactly
//! cocircular quadrilaterals are resolved afterwards by a deterministic rule:
//! keep the diagonal whose smaller endpoint index is smallest.

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

use super::Graph;
use crate::error::{param, Error, Result};
use crate::point_process::PointSet;

const GHOST: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Tri {
    v: [u32; 3],
    /// `n[i]` is the triangle across the edge opposite `v[i]`.
    n: [u32; 3],
    alive: bool,
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v.contains(&GHOST)
    }
}

fn c(p: &[f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

struct Builder<'a> {
    p: &'a [[f64; 2]],
    tris: Vec<Tri>,
    free: Vec<u32>,
    last: u32,
}

impl Builder<'_> {
    fn orient(&self, a: u32, b: u32, q: &[f64; 2]) -> f64 {
        orient2d(c(&self.p[a as usize]), c(&self.p[b as usize]), c(q))
    }

    /// Whether `q` lies strictly inside the circumdisk of triangle `t`
    /// (for ghosts: the open outer half-plane plus the open hull edge).
    fn conflicts(&self, t: u32, q: &[f64; 2]) -> bool {
        let tri = &self.tris[t as usize];
        if tri.is_ghost() {
            let g = tri.v.iter().position(|&v| v == GHOST).unwrap();
            let u = tri.v[(g + 1) % 3];
            let w = tri.v[(g + 2) % 3];
            let o = self.orient(u, w, q);
            if o > 0.0 {
                return true;
            }
            if o < 0.0 {
                return false;
            }
            let (a, b) = (&self.p[u as usize], &self.p[w as usize]);
            let dot = (q[0] - a[0]) * (b[0] - a[0]) + (q[1] - a[1]) * (b[1] - a[1]);
            let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
            return dot > 0.0 && dot < len2;
        }
        let [a, b, d] = tri.v.map(|v| c(&self.p[v as usize]));
        incircle(a, b, d, c(q)) > 0.0
    }

    fn alloc(&mut self, t: Tri) -> u32 {
        if let Some(slot) = self.free.pop() {
            self.tris[slot as usize] = t;
            slot
        } else {
            self.tris.push(t);
            (self.tris.len() - 1) as u32
        }
    }

    /// Visibility walk from the last created triangle towards `q`.
    fn locate(&self, q: &[f64; 2]) -> Option<u32> {
        let mut t = self.last;
        let mut rot = 0usize;
        for _ in 0..(4 * self.tris.len() + 16) {
            let tri = &self.tris[t as usize];
            if tri.is_ghost() {
                return self.conflicts(t, q).then_some(t);
            }
            let mut moved = false;
            for k in 0..3 {
                let i = (k + rot) % 3;
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                if self.orient(a, b, q) < 0.0 {
                    t = tri.n[i];
                    moved = true;
                    break;
                }
            }
            rot = (rot + 1) % 3;
            if !moved {
                return Some(t);
            }
        }
        None
    }

    fn insert(&mut self, pi: u32) {
        let q = self.p[pi as usize];
        let seed = match self.locate(&q).filter(|&t| self.conflicts(t, &q)) {
            Some(t) => t,
            None => (0..self.tris.len() as u32)
                .find(|&t| self.tris[t as usize].alive && self.conflicts(t, &q))
                .expect("every new point conflicts with some triangle"),
        };

        // Cavity by breadth-first search over conflicting triangles.
        let mut cavity = vec![seed];
        let mut in_cavity: HashMap<u32, ()> = HashMap::new();
        in_cavity.insert(seed, ());
        let mut head = 0;
        while head < cavity.len() {
            let t = cavity[head];
            head += 1;
            for &nb in &self.tris[t as usize].n {
                if !in_cavity.contains_key(&nb) && self.conflicts(nb, &q) {
                    in_cavity.insert(nb, ());
                    cavity.push(nb);
                }
            }
        }

        // Boundary edges (a, b) in cavity orientation, with their outside neighbour.
        let mut boundary = Vec::new();
        for &t in &cavity {
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.n[i];
                if !in_cavity.contains_key(&nb) {
                    boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb, t));
                }
            }
        }
        for &t in &cavity {
            self.tris[t as usize].alive = false;
        }

        let mut by_first: HashMap<u32, u32> = HashMap::with_capacity(boundary.len());
        let mut by_second: HashMap<u32, u32> = HashMap::with_capacity(boundary.len());
        let mut created = Vec::with_capacity(boundary.len());
        for &(a, b, nb, old) in &boundary {
            let t = self.alloc(Tri {
                v: [a, b, pi],
                n: [NONE, NONE, nb],
                alive: true,
            });
            let outer = &mut self.tris[nb as usize];
            for slot in outer.n.iter_mut() {
                if *slot == old {
                    *slot = t;
                }
            }
            by_first.insert(a, t);
            by_second.insert(b, t);
            created.push(t);
        }
        for &t in &created {
            let [a, b, _] = self.tris[t as usize].v;
            let across_bp = by_first[&b];
            let across_pa = by_second[&a];
            let tri = &mut self.tris[t as usize];
            tri.n[0] = across_bp;
            tri.n[1] = across_pa;
        }
        // Freed only now so that no slot is reused while `old` ids are still meaningful.
        self.free.extend_from_slice(&cavity);
        self.last = *created
            .iter()
            .find(|&&t| !self.tris[t as usize].is_ghost())
            .unwrap_or(&created[0]);
    }
}

/// Hilbert-curve key on a `2^16` grid, used to order insertions.
fn hilbert_key(x: u32, y: u32) -> u64 {
    let (mut x, mut y) = (x, y);
    let mut d: u64 = 0;
    let mut s: u32 = 1 << 15;
    while s > 0 {
        let rx = ((x & s) > 0) as u32;
        let ry = ((y & s) > 0) as u32;
        d += (s as u64) * (s as u64) * ((3 * rx) ^ ry) as u64;
        if ry == 0 {
            if rx == 1 {
                x = 0xffff - x;
                y = 0xffff - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s >>= 1;
    }
    d
}

/// A Delaunay triangulation of a planar point set.
#[derive(Clone, Debug)]
pub struct Triangulation {
    points: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    triangles: Vec<[usize; 3]>,
    /// Triangle across the edge opposite each vertex; `None` on the hull.
    adjacent: Vec<[Option<usize>; 3]>,
}

impl Triangulation {
    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn adjacent(&self) -> &[[Option<usize>; 3]] {
        &self.adjacent
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        self.points[i]
    }

    /// Undirected triangulation edges with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn circumcenter(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|v| self.points[v]);
        let (bx, by) = (b[0] - a[0], b[1] - a[1]);
        let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
        let d = 2.0 * (bx * cy - by * cx);
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        [
            a[0] + (cy * b2 - by * c2) / d,
            a[1] + (bx * c2 - cx * b2) / d,
        ]
    }

    pub fn circumradius(&self, t: usize) -> f64 {
        let cc = self.circumcenter(t);
        let a = self.points[self.triangles[t][0]];
        ((cc[0] - a[0]).powi(2) + (cc[1] - a[1]).powi(2)).sqrt()
    }

    /// Vertices lying on the convex hull boundary (on a hull edge).
    pub fn hull_flags(&self) -> Vec<bool> {
        let mut hull = vec![false; self.points.len()];
        for (t, adj) in self.triangles.iter().zip(&self.adjacent) {
            for k in 0..3 {
                if adj[k].is_none() {
                    hull[t[(k + 1) % 3]] = true;
                    hull[t[(k + 2) % 3]] = true;
                }
            }
        }
        hull
    }

    /// Whether the two triangles sharing an edge are exactly cocircular.
    pub fn cocircular_across(&self, t: usize, k: usize) -> bool {
        let Some(u) = self.adjacent[t][k] else {
            return false;
        };
        let far = self.triangles[u]
            .iter()
            .copied()
            .find(|v| !self.triangles[t].contains(v))
            .expect("adjacent triangles share exactly two vertices");
        let [a, b, cc] = self.triangles[t].map(|v| c(&self.points[v]));
        incircle(a, b, cc, c(&self.points[far])) == 0.0
    }

    pub fn to_graph(&self, x: &PointSet) -> Graph {
        Graph::from_pairs(x, false, self.edges())
    }
}

/// Delaunay triangulation of a planar point set with at least 3 points, not all collinear.
pub fn delaunay_2d(x: &PointSet) -> Result<Triangulation> {
    if x.dim() != 2 {
        return param("Delaunay triangulation is only implemented for d = 2");
    }
    if x.len() < 3 {
        return param("Delaunay triangulation needs at least 3 points");
    }
    let p: Vec<[f64; 2]> = x
        .points()
        .iter()
        .map(|q| [q.coord(0), q.coord(1)])
        .collect();
    let n = p.len();

    let i2 = (2..n)
        .find(|&k| orient2d(c(&p[0]), c(&p[1]), c(&p[k])) != 0.0)
        .ok_or_else(|| Error::Degenerate("all points are collinear".into()))?;
    let (a, b, d) = if orient2d(c(&p[0]), c(&p[1]), c(&p[i2])) > 0.0 {
        (0u32, 1u32, i2 as u32)
    } else {
        (1u32, 0u32, i2 as u32)
    };
    // Triangle 0 = (a, b, d); ghosts 1..=3 across its edges.
    let tris = vec![
        Tri {
            v: [a, b, d],
            n: [2, 3, 1],
            alive: true,
        },
        Tri {
            v: [b, a, GHOST],
            n: [3, 2, 0],
            alive: true,
        },
        Tri {
            v: [d, b, GHOST],
            n: [1, 3, 0],
            alive: true,
        },
        Tri {
            v: [a, d, GHOST],
            n: [2, 1, 0],
            alive: true,
        },
    ];
    let mut builder = Builder {
        p: &p,
        tris,
        free: Vec::new(),
        last: 0,
    };

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for q in &p {
        for a in 0..2 {
            lo[a] = lo[a].min(q[a]);
            hi[a] = hi[a].max(q[a]);
        }
    }
    let scale = |v: f64, a: usize| {
        let w = hi[a] - lo[a];
        if w > 0.0 {
            (((v - lo[a]) / w) * 65535.0) as u32
        } else {
            0
        }
    };
    let mut order: Vec<u32> = (0..n as u32)
        .filter(|&k| k != a && k != b && k != d)
        .collect();
    order.sort_by_key(|&k| {
        (
            hilbert_key(scale(p[k as usize][0], 0), scale(p[k as usize][1], 1)),
            k,
        )
    });
    for k in order {
        builder.insert(k);
    }

    let mut tri = compact(builder.tris);
    tri.points = p;
    resolve_cocircular(&mut tri);
    Ok(tri)
}

fn compact(tris: Vec<Tri>) -> Triangulation {
    let mut id = vec![usize::MAX; tris.len()];
    let mut count = 0;
    for (k, t) in tris.iter().enumerate() {
        if t.alive && !t.is_ghost() {
            id[k] = count;
            count += 1;
        }
    }
    let mut triangles = Vec::with_capacity(count);
    let mut adjacent = Vec::with_capacity(count);
    for (k, t) in tris.iter().enumerate() {
        if id[k] == usize::MAX {
            continue;
        }
        triangles.push(t.v.map(|v| v as usize));
        adjacent.push(t.n.map(|m| {
            let m = m as usize;
            (id[m] != usize::MAX).then_some(id[m])
        }));
    }
    Triangulation {
        points: Vec::new(),
        triangles,
        adjacent,
    }
}

/// Applies the index tie-break to exactly cocircular quadrilaterals. Each flip
/// strictly lowers the sum over edges of the smaller endpoint, so the loop ends.
fn resolve_cocircular(tri: &mut Triangulation) {
    loop {
        let mut flipped = false;
        for t in 0..tri.triangles.len() {
            for k in 0..3 {
                let Some(u) = tri.adjacent[t][k] else {
                    continue;
                };
                if u < t || !tri.cocircular_across(t, k) {
                    continue;
                }
                let tv = tri.triangles[t];
                let (pa, pb, pc) = (tv[(k + 1) % 3], tv[(k + 2) % 3], tv[k]);
                let ku = (0..3)
                    .find(|&m| !tv.contains(&tri.triangles[u][m]))
                    .unwrap();
                let pd = tri.triangles[u][ku];
                if pc.min(pd) < pa.min(pb) {
                    flip(tri, t, k, u, ku);
                    flipped = true;
                    break;
                }
            }
        }
        if !flipped {
            return;
        }
    }
}

/// Flips the edge shared by `t` (opposite its vertex `k`) and `u` (opposite `ku`).
fn flip(tri: &mut Triangulation, t: usize, k: usize, u: usize, ku: usize) {
    let tv = tri.triangles[t];
    let uv = tri.triangles[u];
    let c = tv[k];
    let a = tv[(k + 1) % 3];
    let b = tv[(k + 2) % 3];
    let d = uv[ku];
    // Outer neighbours: across (c, a) / (b, c) in t, across (a, d) / (d, b) in u.
    let n_ca = tri.adjacent[t][(k + 2) % 3];
    let n_bc = tri.adjacent[t][(k + 1) % 3];
    let pos = |v: usize| uv.iter().position(|&w| w == v).unwrap();
    let n_ad = tri.adjacent[u][pos(b)];
    let n_db = tri.adjacent[u][pos(a)];
    // New triangles: t = (c, a, d), u = (d, b, c).
    tri.triangles[t] = [c, a, d];
    tri.adjacent[t] = [n_ad, Some(u), n_ca];
    tri.triangles[u] = [d, b, c];
    tri.adjacent[u] = [n_bc, Some(t), n_db];
    let relink = |tri: &mut Triangulation, outer: Option<usize>, from: usize, to: usize| {
        if let Some(o) = outer {
            for s in tri.adjacent[o].iter_mut() {
                if *s == Some(from) {
                    *s = Some(to);
                }
            }
        }
    };
    relink(tri, n_ad, u, t);
    relink(tri, n_bc, t, u);
}

/// Delaunay edges as a [`Graph`] with Euclidean lengths.
pub fn delaunay_graph(x: &PointSet) -> Result<Graph> {
    Ok(delaunay_2d(x)?.to_graph(x))
}

/// Exhaustive empty-circumcircle check used by tests: returns the worst
/// in-circle determinant (positive means some point lies strictly inside).
pub fn worst_incircle(tri: &Triangulation) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for t in tri.triangles() {
        let [a, b, cc] = t.map(|v| c(&tri.points[v]));
        for (i, q) in tri.points.iter().enumerate() {
            if t.contains(&i) {
                continue;
            }
            worst = worst.max(incircle(a, b, cc, c(q)));
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
    fn single_triangle() {
        let x = PointSet::from_coords(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let t = delaunay_2d(&x).unwrap();
        assert_eq!(t.triangles().len(), 1);
        assert_eq!(t.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn unit_square_tie_break() {
        let x = PointSet::from_coords(2, &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]])
            .unwrap();
        let e = delaunay_2d(&x).unwrap().edges();
        assert_eq!(e.len(), 5);
        assert!(
            e.contains(&(0, 2)),
            "diagonal through vertex 0 is kept: {e:?}"
        );
        // Relabelling so that the other diagonal carries the lowest index flips the choice.
        let y = PointSet::from_coords(2, &[&[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[0.0, 0.0]])
            .unwrap();
        let e = delaunay_2d(&y).unwrap().edges();
        assert!(e.contains(&(0, 2)), "{e:?}");
    }

    #[test]
    fn collinear_rejected() {
        let x = PointSet::from_coords(2, &[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]])
            .unwrap();
        assert!(matches!(delaunay_2d(&x), Err(Error::Degenerate(_))));
    }

    #[test]
    fn random_sets_are_delaunay() {
        for seed in 0..20 {
            let mut rng = RngStream::new(300 + seed, 0).rng();
            let x = sample_homogeneous_poisson(30.0, &Window::unit_cube(2), &mut rng).unwrap();
            if x.len() < 3 {
                continue;
            }
            let t = delaunay_2d(&x).unwrap();
            assert!(worst_incircle(&t) <= 0.0);
            // Euler: 2n - h - 2 triangles for h hull vertices (general position).
            let h = t.hull_flags().iter().filter(|&&f| f).count();
            assert_eq!(t.triangles().len(), 2 * x.len() - h - 2);
        }
    }

    #[test]
    fn grid_with_collinear_and_cocircular_points() {
        let mut pts = Vec::new();
        for i in 0..6 {
            for j in 0..5 {
                pts.push(vec![i as f64, j as f64]);
            }
        }
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let x = PointSet::from_coords(2, &refs).unwrap();
        let t = delaunay_2d(&x).unwrap();
        assert!(worst_incircle(&t) <= 0.0);
        // 5 x 4 unit squares, two triangles each.
        assert_eq!(t.triangles().len(), 40);
        let area: f64 = t
            .triangles()
            .iter()
            .map(|tr| {
                let [a, b, c] = tr.map(|v| t.point(v));
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
            })
            .sum();
        assert!((area - 20.0).abs() < 1e-12);
    }
}
