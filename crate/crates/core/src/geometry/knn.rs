use super::index::{Candidate, SpatialIndex};
use super::Graph;
use crate::error::{param, Result};
use crate::point_process::PointSet;

fn check_k(x: &PointSet, k: usize) -> Result<()> {
    if k >= x.len().max(1) {
        return param(format!(
            "k = {k} needs at least {} points, found {}",
            k + 1,
            x.len()
        ));
    }
    Ok(())
}

/// The `k` nearest neighbours of every point, sorted by the tie-broken distance order.
pub fn knn_lists(x: &PointSet, k: usize) -> Result<Vec<Vec<Candidate>>> {
    check_k(x, k)?;
    let index = SpatialIndex::new(x);
    Ok((0..x.len())
        .map(|i| index.k_nearest(x.point(i), k, Some(i)))
        .collect())
}

fn from_lists(x: &PointSet, lists: &[Vec<Candidate>], directed: bool) -> Graph {
    let pairs = lists
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.iter().map(move |c| (i, c.id)));
    Graph::from_pairs(x, directed, pairs)
}

/// k-nearest-neighbour graph. The directed variant has out-degree exactly `k`;
/// the undirected variant joins `x` and `y` when either is among the other's
/// `k` nearest neighbours.
pub fn knn_graph(x: &PointSet, k: usize, directed: bool) -> Result<Graph> {
    let lists = knn_lists(x, k)?;
    Ok(from_lists(x, &lists, directed))
}

/// O(n²) reference for [`knn_graph`].
pub fn knn_brute(x: &PointSet, k: usize, directed: bool) -> Result<Graph> {
    check_k(x, k)?;
    let lists: Vec<Vec<Candidate>> = (0..x.len())
        .map(|i| {
            let mut all: Vec<Candidate> = (0..x.len())
                .filter(|&j| j != i)
                .map(|j| Candidate {
                    d2: x.point(i).dist2(x.point(j)),
                    id: j,
                    point: *x.point(j),
                })
                .collect();
            all.sort();
            all.truncate(k);
            all
        })
        .collect();
    Ok(from_lists(x, &lists, directed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Edge;

    fn fixture() -> PointSet {
        PointSet::from_coords(1, &[&[0.0], &[1.0], &[3.0]]).unwrap()
    }

    #[test]
    fn undirected_on_line() {
        let g = knn_graph(&fixture(), 1, false).unwrap();
        assert_eq!(g.pairs(), vec![(0, 1), (1, 2)]);
        assert_eq!(g, knn_brute(&fixture(), 1, false).unwrap());
    }

    #[test]
    fn directed_on_line() {
        let g = knn_graph(&fixture(), 1, true).unwrap();
        assert_eq!(g.pairs(), vec![(0, 1), (1, 0), (2, 1)]);
        assert!(g.degrees().iter().all(|&d| d == 1));
        assert_eq!(
            g.edges[2],
            Edge {
                i: 2,
                j: 1,
                length: 2.0
            }
        );
    }

    #[test]
    fn k_too_large() {
        assert!(knn_graph(&fixture(), 3, false).is_err());
        assert!(knn_brute(&fixture(), 3, true).is_err());
        assert!(knn_graph(&fixture(), 2, false).is_ok());
    }
}
