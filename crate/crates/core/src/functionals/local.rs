//! Evaluation of `ξ(x; X)` at one point of a [`Neighborhood`], exploring only
//! as much of the configuration as is needed to certify the value.

use std::collections::{HashMap, HashSet};

use super::germ_grain::cell_union_area;
use super::packing::PackRule;
use super::{graph_sums, planar_graph, rsa_radius, EdgeWeight, WeightFunctional};
use crate::error::{param, Result};
use crate::geometry::{DirectionCells, Neighborhood};
use crate::point_process::PointSet;

/// `ξ(x_id; X)` where `X` is the configuration presented by `nb`.
/// Agrees with [`super::evaluate_all`] on the materialized configuration.
pub fn evaluate_local(xi: &WeightFunctional, nb: &Neighborhood<'_>, id: usize) -> Result<f64> {
    if !nb.contains(id) {
        return param(format!("point {id} is not part of the configuration"));
    }
    if let Some(d) = xi.required_dim() {
        if nb.dim() != d {
            return param(format!("this functional is only defined in d = {d}"));
        }
    }
    match xi {
        WeightFunctional::Counting => Ok(1.0),
        WeightFunctional::KnnEdge { k, directed, phi } => Ok(knn_local(nb, id, *k, *directed, phi)),
        WeightFunctional::SigEdge { phi } => Ok(sig_local(nb, id, phi)),
        WeightFunctional::DelaunayEdge { phi } => planar_local(nb, id, false, phi),
        WeightFunctional::VoronoiEdge { phi } => planar_local(nb, id, true, phi),
        WeightFunctional::Rsa { ball_volume } => {
            let r = rsa_radius(nb.dim(), *ball_volume);
            packed_local(nb, id, PackRule::Rsa { r })
        }
        WeightFunctional::BirthGrowth { speed, .. } => {
            packed_local(nb, id, PackRule::Growth { speed: *speed })
        }
        WeightFunctional::GermGrainVolume { window, .. } => {
            germ_grain_local(nb, id, window.as_ref())
        }
    }
}

fn knn_local(nb: &Neighborhood<'_>, id: usize, k: usize, directed: bool, phi: &EdgeWeight) -> f64 {
    let p = nb.point(id);
    let out = nb.k_nearest_of(id, k);
    if directed {
        return out.iter().map(|c| phi.eval(c.d2.sqrt())).sum();
    }
    // Reverse neighbours: y points to x unless k points are strictly closer
    // to y than x is. Any z in the same direction cell as y (seen from x)
    // with |z - x| < |y - x| is closer to y when the cell is narrower than
    // 60°, so once every cell holds k points closer than |y - x| the scan
    // can stop.
    let cells = DirectionCells::new(nb.dim(), std::f64::consts::FRAC_PI_4);
    let mut counts = vec![0usize; cells.count()];
    let mut unfilled = cells.count();
    let mut fill_radius: f64 = 0.0;
    let known: HashSet<usize> = out.iter().map(|c| c.id).collect();
    let mut total: f64 = out.iter().map(|c| phi.eval(c.d2.sqrt())).sum();
    for c in nb.nearest_iter(p).filter(|c| c.id != id) {
        let a = c.d2.sqrt();
        if unfilled == 0 && a > fill_radius {
            break;
        }
        if !known.contains(&c.id) && nb.k_nearest_of(c.id, k).iter().any(|z| z.id == id) {
            total += phi.eval(a);
        }
        let cell = cells.cell(&c.point.sub(&p));
        counts[cell] += 1;
        if counts[cell] == k {
            fill_radius = fill_radius.max(a);
            unfilled -= 1;
        }
    }
    total
}

fn sig_local(nb: &Neighborhood<'_>, id: usize, phi: &EdgeWeight) -> f64 {
    let p = nb.point(id);
    let Some(r_x) = nb.k_nearest_of(id, 1).first().map(|c| c.d2.sqrt()) else {
        return 0.0;
    };
    // A point y at distance a from x is not joined when some z in its
    // direction cell (half-angle θ seen from x) at distance b satisfies
    // |y - z| < a - r_x, because r_y <= |y - z|. By the cosine rule that
    // holds for all a > B(b) = (b² - r_x²) / (2 (b cos θ - r_x)) once
    // b cos θ > r_x.
    let cells = DirectionCells::new(nb.dim(), std::f64::consts::PI / 6.0);
    let cos = cells.diameter().cos();
    let mut bound = vec![f64::INFINITY; cells.count()];
    let mut open = cells.count();
    let mut total = 0.0;
    for c in nb.nearest_iter(p).filter(|c| c.id != id) {
        let a = c.d2.sqrt();
        if open == 0 && bound.iter().all(|&b| a > b) {
            break;
        }
        let r_y = nb.k_nearest_of(c.id, 1)[0].d2.sqrt();
        if a < r_x + r_y {
            total += phi.eval(a);
        }
        if a * cos > r_x {
            let b = (a * a - r_x * r_x) / (2.0 * (a * cos - r_x));
            let cell = cells.cell(&c.point.sub(&p));
            if bound[cell].is_infinite() {
                open -= 1;
            }
            bound[cell] = bound[cell].min(a.max(b));
        }
    }
    total
}

fn planar_local(nb: &Neighborhood<'_>, id: usize, voronoi: bool, phi: &EdgeWeight) -> Result<f64> {
    let p = nb.point(id);
    let present = nb.present_count();
    let mut t = nb
        .nearest_iter(p)
        .filter(|c| c.id != id)
        .take(12)
        .last()
        .map_or(1.0, |c| 1.5 * c.d2.sqrt());
    loop {
        let near = nb.within(&p, t);
        let ids: Vec<usize> = near.iter().map(|c| c.id).collect();
        let complete = ids.len() >= present;
        let local: PointSet = nb.materialize(&ids);
        let pos = ids.binary_search(&id).expect("centre lies in its own ball");
        let (g, tri) = planar_graph(voronoi, &local)?;
        let certified = complete
            || tri.as_ref().is_some_and(|tri| {
                // Every triangle around x has an empty circumdisk inside B(x, t):
                // points outside the ball cannot invalidate it.
                !tri.hull_flags()[pos]
                    && tri.triangles().iter().enumerate().all(|(k, v)| {
                        if !v.contains(&pos) {
                            return true;
                        }
                        let cc = tri.circumcenter(k);
                        let d =
                            ((cc[0] - p.coord(0)).powi(2) + (cc[1] - p.coord(1)).powi(2)).sqrt();
                        d + tri.circumradius(k) < t * (1.0 - 1e-9)
                    })
            });
        if certified {
            return Ok(graph_sums(&g, phi)[pos]);
        }
        t *= 2.0;
    }
}

fn packed_local(nb: &Neighborhood<'_>, id: usize, rule: PackRule) -> Result<f64> {
    let ext = nb.mark_extent();
    let mark_of = |i: usize| -> Result<(f64, f64)> {
        let m = nb.mark(i);
        let t = m
            .and_then(|m| m.time)
            .ok_or_else(|| crate::Error::Parameter("packing needs time marks".into()))?;
        let r = match rule {
            PackRule::Rsa { .. } => 0.0,
            PackRule::Growth { .. } => m
                .and_then(|m| m.radius)
                .ok_or_else(|| crate::Error::Parameter("birth-growth needs radius marks".into()))?,
        };
        Ok((t, r))
    };
    // Blockers of i: earlier points that would block it if accepted.
    let blockers = |i: usize| -> Result<Vec<usize>> {
        let (ti, ri) = mark_of(i)?;
        let p = nb.point(i);
        let mut out = Vec::new();
        for c in nb.within(&p, rule.reach(ti, ri, ext.min_time, ext.max_radius)) {
            if c.id == i {
                continue;
            }
            let (tj, rj) = mark_of(c.id)?;
            if tj == ti {
                return param("time marks must be distinct");
            }
            if tj < ti && rule.blocks(c.d2.sqrt(), ti, ri, tj, rj) {
                out.push(c.id);
            }
        }
        // Latest blockers first: they are the nearest in the recursion.
        out.sort_by(|&a, &b| mark_of(b).unwrap().0.total_cmp(&mark_of(a).unwrap().0));
        Ok(out)
    };
    // accepted(i) = no blocker is accepted; explicit stack to bound recursion.
    let mut memo: HashMap<usize, bool> = HashMap::new();
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(id, blockers(id)?, 0)];
    while let Some(top) = stack.last_mut() {
        let (node, cands, pos) = (top.0, &top.1, top.2);
        if pos == cands.len() {
            memo.insert(node, true);
            stack.pop();
            continue;
        }
        let j = cands[pos];
        match memo.get(&j) {
            Some(true) => {
                memo.insert(node, false);
                stack.pop();
            }
            Some(false) => top.2 += 1,
            None => {
                let b = blockers(j)?;
                stack.push((j, b, 0));
            }
        }
    }
    Ok(memo[&id] as u8 as f64)
}

fn germ_grain_local(
    nb: &Neighborhood<'_>,
    id: usize,
    window: Option<&crate::point_process::Window>,
) -> Result<f64> {
    let radius = |i: usize| -> Result<f64> {
        nb.mark(i).and_then(|m| m.radius).ok_or_else(|| {
            crate::Error::Parameter("germ-grain functional needs radius marks".into())
        })
    };
    radius(id)?;
    let t_max = nb.mark_extent().max_radius;
    let p = nb.point(id);
    let near = nb.within(&p, 2.0 * t_max);
    let mut others = Vec::new();
    let mut grains = Vec::new();
    for c in &near {
        let xy = [c.point.coord(0), c.point.coord(1)];
        let r = radius(c.id)?;
        if c.id != id {
            others.push(xy);
        }
        if c.d2.sqrt() <= t_max + r {
            grains.push((xy, r));
        }
    }
    Ok(cell_union_area(
        [p.coord(0), p.coord(1)],
        &others,
        &grains,
        t_max,
        window,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::evaluate_all;
    use crate::geometry::{knn_lists, SpatialIndex};
    use crate::point_process::{
        attach_marks, sample_homogeneous_poisson, MarkLaw, Point, RadiusLaw, Window,
    };
    use crate::RngStream;

    fn graph_functionals() -> Vec<WeightFunctional> {
        vec![
            WeightFunctional::knn_length(1),
            WeightFunctional::knn_length(3),
            WeightFunctional::KnnEdge {
                k: 2,
                directed: true,
                phi: EdgeWeight::length(),
            },
            WeightFunctional::SigEdge {
                phi: EdgeWeight::length(),
            },
            WeightFunctional::DelaunayEdge {
                phi: EdgeWeight::half_length(),
            },
            WeightFunctional::VoronoiEdge {
                phi: EdgeWeight::length(),
            },
            WeightFunctional::Counting,
        ]
    }

    fn compare(xi: &WeightFunctional, nb: &Neighborhood<'_>) {
        let ids = nb.all_ids();
        let x = nb.materialize(&ids);
        let want = evaluate_all(xi, &x).unwrap();
        for (pos, &id) in ids.iter().enumerate() {
            let got = evaluate_local(xi, nb, id).unwrap();
            assert!(
                (got - want[pos]).abs() <= 1e-12 * (1.0 + want[pos].abs()),
                "{xi:?} id {id}: local {got} vs global {}",
                want[pos]
            );
        }
    }

    #[test]
    fn local_matches_global_with_extras_and_clip() {
        for seed in 0..3 {
            let mut rng = RngStream::new(seed, 4).rng();
            let x = sample_homogeneous_poisson(150.0, &Window::unit_cube(2), &mut rng).unwrap();
            let ix = SpatialIndex::new(&x);
            let lists = knn_lists(&x, 3).unwrap();
            for xi in graph_functionals() {
                let mut nb = Neighborhood::new(&x, &ix).with_knn_cache(&lists, 3);
                nb.insert(Point::new(&[0.5, 0.5]).unwrap(), None).unwrap();
                nb.insert(Point::new(&[0.52, 0.47]).unwrap(), None).unwrap();
                compare(&xi, &nb);
                let clipped =
                    Neighborhood::new(&x, &ix).with_clip(Point::new(&[0.4, 0.6]).unwrap(), 0.3);
                compare(&xi, &clipped);
            }
        }
    }

    #[test]
    fn local_matches_global_in_other_dimensions() {
        for dim in [1, 3] {
            let mut rng = RngStream::new(7, dim as u64).rng();
            let x = sample_homogeneous_poisson(200.0, &Window::unit_cube(dim), &mut rng).unwrap();
            let ix = SpatialIndex::new(&x);
            for xi in graph_functionals()
                .into_iter()
                .filter(|f| f.required_dim().is_none())
            {
                compare(&xi, &Neighborhood::new(&x, &ix));
            }
        }
    }

    #[test]
    fn packing_local_matches_global() {
        let mut rng = RngStream::new(11, 0).rng();
        let x = sample_homogeneous_poisson(300.0, &Window::unit_cube(2), &mut rng).unwrap();
        let law = MarkLaw {
            time: true,
            radius: Some(RadiusLaw::Uniform { lo: 0.0, hi: 0.03 }),
        };
        let x = attach_marks(&x, &law, &mut rng).unwrap();
        let ix = SpatialIndex::new(&x);
        let nb = Neighborhood::new(&x, &ix);
        compare(&WeightFunctional::Rsa { ball_volume: 0.01 }, &nb);
        compare(
            &WeightFunctional::BirthGrowth {
                speed: 0.05,
                radius: RadiusLaw::Uniform { lo: 0.0, hi: 0.03 },
            },
            &nb,
        );
    }

    #[test]
    fn germ_grain_local_matches_global() {
        let mut rng = RngStream::new(12, 0).rng();
        let x = sample_homogeneous_poisson(15.0, &Window::unit_cube(2), &mut rng).unwrap();
        let law = MarkLaw::radii(RadiusLaw::Uniform { lo: 0.05, hi: 0.2 });
        let x = attach_marks(&x, &law, &mut rng).unwrap();
        let ix = SpatialIndex::new(&x);
        let xi = WeightFunctional::GermGrainVolume {
            radius: RadiusLaw::Uniform { lo: 0.05, hi: 0.2 },
            window: Some(Window::unit_cube(2)),
        };
        compare(&xi, &Neighborhood::new(&x, &ix));
    }
}
