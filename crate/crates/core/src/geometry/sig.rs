use super::index::SpatialIndex;
use super::Graph;
use crate::error::{param, Result};
use crate::point_process::PointSet;

fn check(x: &PointSet) -> Result<()> {
    if x.len() < 2 {
        return param("sphere-of-influence graph needs at least 2 points");
    }
    Ok(())
}

/// Nearest-neighbour distance of every point: the radius of its ball of influence.
pub fn sig_radii(x: &PointSet) -> Result<Vec<f64>> {
    check(x)?;
    let index = SpatialIndex::new(x);
    Ok((0..x.len())
        .map(|i| index.k_nearest(x.point(i), 1, Some(i))[0].d2.sqrt())
        .collect())
}

/// Sphere-of-influence graph: `{x, y}` is an edge iff the balls `B(x, r_x)`
/// and `B(y, r_y)` overlap, i.e. `|x - y| < r_x + r_y`. Tangent balls do not
/// count (measure zero for random input; decides the grid fixtures).
pub fn sig_graph(x: &PointSet) -> Result<Graph> {
    let r = sig_radii(x)?;
    let rmax = r.iter().copied().fold(0.0, f64::max);
    let index = SpatialIndex::new(x);
    let mut pairs = Vec::new();
    for i in 0..x.len() {
        for c in index.within(x.point(i), r[i] + rmax, true) {
            if c.id > i && c.d2.sqrt() < r[i] + r[c.id] {
                pairs.push((i, c.id));
            }
        }
    }
    Ok(Graph::from_pairs(x, false, pairs))
}

/// O(n²) reference for [`sig_graph`].
pub fn sig_brute(x: &PointSet) -> Result<Graph> {
    check(x)?;
    let n = x.len();
    let r: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| x.point(i).dist(x.point(j)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if x.point(i).dist(x.point(j)) < r[i] + r[j] {
                pairs.push((i, j));
            }
        }
    }
    Ok(Graph::from_pairs(x, false, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_always_joined() {
        let x = PointSet::from_coords(2, &[&[0.0, 0.0], &[3.0, 4.0]]).unwrap();
        assert_eq!(sig_graph(&x).unwrap().pairs(), vec![(0, 1)]);
    }

    #[test]
    fn line_fixture() {
        let x = PointSet::from_coords(1, &[&[0.0], &[1.0], &[10.0]]).unwrap();
        assert_eq!(sig_radii(&x).unwrap(), vec![1.0, 1.0, 9.0]);
        let g = sig_graph(&x).unwrap();
        assert_eq!(g.pairs(), vec![(0, 1), (1, 2)]);
        assert_eq!(g, sig_brute(&x).unwrap());
    }

    #[test]
    fn tangent_balls_do_not_count() {
        // radii 1, 1, 1, 1: points 1 and 2 are at distance 2 = r1 + r2.
        let x = PointSet::from_coords(1, &[&[0.0], &[1.0], &[3.0], &[4.0]]).unwrap();
        assert_eq!(sig_graph(&x).unwrap().pairs(), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn single_point_rejected() {
        let x = PointSet::from_coords(1, &[&[0.0]]).unwrap();
        assert!(sig_graph(&x).is_err());
    }
}
