use serde::{Deserialize, Serialize};

use super::delaunay::{delaunay_2d, Triangulation};
use super::polygon::{clip_halfplane, Polygon};
use super::{Edge, Graph};
use crate::error::{param, Result};
use crate::point_process::{PointSet, Window};

/// The Voronoi cell of one site, clipped to a box window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoronoiCell {
    pub site_index: usize,
    pub polygon: Polygon,
    /// Whether the cell is unbounded before clipping (the site is on the convex hull).
    pub unbounded: bool,
}

fn box_polygon(w: &Window) -> Result<Polygon> {
    if w.dim() != 2 || !w.is_box() {
        return param("Voronoi cells need a two-dimensional box window");
    }
    w.validate()?;
    let (lo, hi) = w.bounds();
    let (x0, y0, x1, y1) = (lo.coord(0), lo.coord(1), hi.coord(0), hi.coord(1));
    Ok(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
}

fn bisector_clip(poly: &[[f64; 2]], s: [f64; 2], t: [f64; 2]) -> Polygon {
    let m = [0.5 * (s[0] + t[0]), 0.5 * (s[1] + t[1])];
    clip_halfplane(poly, m, [t[0] - s[0], t[1] - s[1]])
}

/// Delaunay neighbours of every vertex.
pub(crate) fn neighbours(tri: &Triangulation) -> Vec<Vec<usize>> {
    let mut nb = vec![Vec::new(); tri.vertex_count()];
    for (i, j) in tri.edges() {
        nb[i].push(j);
        nb[j].push(i);
    }
    nb
}

/// Voronoi cells of all sites, clipped to the box window `w`.
pub fn voronoi_cells_2d(x: &PointSet, w: &Window) -> Result<Vec<VoronoiCell>> {
    if x.dim() != 2 {
        return param("Voronoi cells are only implemented for d = 2");
    }
    if x.is_empty() {
        return param("Voronoi cells need at least one site");
    }
    let wpoly = box_polygon(w)?;
    if let Some(i) = (0..x.len()).find(|&i| !w.contains(x.point(i))) {
        return param(format!("site {i} lies outside the window"));
    }
    let site = |i: usize| [x.point(i).coord(0), x.point(i).coord(1)];
    let (nb, hull) = match x.len() {
        1 => (vec![vec![]], vec![true]),
        2 => (vec![vec![1], vec![0]], vec![true, true]),
        _ => {
            let tri = delaunay_2d(x)?;
            (neighbours(&tri), tri.hull_flags())
        }
    };
    Ok((0..x.len())
        .map(|i| {
            let mut poly = wpoly.clone();
            for &j in &nb[i] {
                poly = bisector_clip(&poly, site(i), site(j));
            }
            VoronoiCell {
                site_index: i,
                polygon: poly,
                unbounded: hull[i],
            }
        })
        .collect())
}

/// Dual Voronoi edges per Delaunay edge `(i, j)`: the boundary segment shared
/// by the cells of `i` and `j`, with length `+inf` when unbounded. Delaunay
/// edges between exactly cocircular triangles have a degenerate (single point)
/// dual and are omitted.
pub fn voronoi_dual_edges(tri: &Triangulation) -> Vec<Edge> {
    let mut edges = Vec::new();
    for (t, v) in tri.triangles().iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (v[(k + 1) % 3], v[(k + 2) % 3]);
            let length = match tri.adjacent()[t][k] {
                None => f64::INFINITY,
                Some(u) if u < t => continue,
                Some(_) if tri.cocircular_across(t, k) => continue,
                Some(u) => {
                    let (p, q) = (tri.circumcenter(t), tri.circumcenter(u));
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
                }
            };
            edges.push(Edge {
                i: a.min(b),
                j: a.max(b),
                length,
            });
        }
    }
    edges
}

/// The Voronoi graph as seen from the sites: vertex `i` is joined to `j` when
/// their cells share a boundary segment, whose length is stored on the edge.
pub fn voronoi_graph(x: &PointSet) -> Result<Graph> {
    if x.dim() != 2 {
        return param("Voronoi graph is only implemented for d = 2");
    }
    match x.len() {
        0 | 1 => Ok(Graph::new(x.len(), false, vec![])),
        2 => Ok(Graph::new(
            2,
            false,
            vec![Edge {
                i: 0,
                j: 1,
                length: f64::INFINITY,
            }],
        )),
        _ => Ok(Graph::new(
            x.len(),
            false,
            voronoi_dual_edges(&delaunay_2d(x)?),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{incident_edges, polygon_area, polygon_contains};
    use crate::point_process::sample_homogeneous_poisson;
    use crate::RngStream;

    #[test]
    fn one_site_fills_window() {
        let x = PointSet::from_coords(2, &[&[0.3, 0.3]]).unwrap();
        let cells = voronoi_cells_2d(&x, &Window::unit_cube(2)).unwrap();
        assert_eq!(polygon_area(&cells[0].polygon), 1.0);
        assert!(cells[0].unbounded);
    }

    #[test]
    fn two_sites_split_square() {
        let x = PointSet::from_coords(2, &[&[0.25, 0.5], &[0.75, 0.5]]).unwrap();
        let cells = voronoi_cells_2d(&x, &Window::unit_cube(2)).unwrap();
        for c in &cells {
            assert!((polygon_area(&c.polygon) - 0.5).abs() < 1e-15);
            assert!(c.polygon.iter().all(|p| p[0] <= 0.5 || c.site_index == 1));
        }
    }

    #[test]
    fn random_cells_tile_window() {
        let mut rng = RngStream::new(77, 0).rng();
        let x = sample_homogeneous_poisson(30.0, &Window::unit_cube(2), &mut rng).unwrap();
        let cells = voronoi_cells_2d(&x, &Window::unit_cube(2)).unwrap();
        let total: f64 = cells.iter().map(|c| polygon_area(&c.polygon)).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for c in &cells {
            let s = x.point(c.site_index);
            assert!(polygon_contains(
                &c.polygon,
                [s.coord(0), s.coord(1)],
                1e-12
            ));
        }
    }

    #[test]
    fn grid_center_has_four_finite_segments() {
        let mut pts = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                pts.push(vec![i as f64, j as f64]);
            }
        }
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let x = PointSet::from_coords(2, &refs).unwrap();
        let g = voronoi_graph(&x).unwrap();
        let center = 4;
        let l = incident_edges(&g, center).unwrap();
        assert_eq!(l.len(), 4, "{l:?}");
        assert!(l.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        // A corner site has two unbounded segments.
        let corner = incident_edges(&g, 0).unwrap();
        assert_eq!(corner.iter().filter(|v| v.is_infinite()).count(), 2);
    }

    #[test]
    fn ball_window_rejected() {
        let x = PointSet::from_coords(2, &[&[0.0, 0.0]]).unwrap();
        let w = Window::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        assert!(voronoi_cells_2d(&x, &w).is_err());
    }
}
