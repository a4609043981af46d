//! Geometric graphs on point sets: k-nearest neighbours, Delaunay/Voronoi in
//! the plane, and the sphere-of-influence graph, each with a brute-force
//! reference construction.

mod delaunay;
mod index;
mod knn;
mod neighborhood;
mod polygon;
mod sig;
mod voronoi;

pub use delaunay::{delaunay_2d, delaunay_graph, worst_incircle, Triangulation};
pub use index::{Candidate, NeighborIter, SpatialIndex};
pub use knn::{knn_brute, knn_graph, knn_lists};
pub use neighborhood::{DirectionCells, MarkExtent, Neighborhood};
pub use polygon::{clip_halfplane, polygon_area, polygon_contains, Polygon};
pub use sig::{sig_brute, sig_graph, sig_radii};
pub use voronoi::{voronoi_cells_2d, voronoi_dual_edges, voronoi_graph, VoronoiCell};

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::point_process::PointSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

/// A graph on the points of a `PointSet`. Undirected graphs store each edge
/// once with `i < j`; edge lists are sorted by `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub vertex_count: usize,
    pub directed: bool,
    pub edges: Vec<Edge>,
}

impl Graph {
    pub fn new(vertex_count: usize, directed: bool, mut edges: Vec<Edge>) -> Self {
        if !directed {
            for e in edges.iter_mut() {
                if e.i > e.j {
                    std::mem::swap(&mut e.i, &mut e.j);
                }
            }
        }
        edges.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
        edges.dedup_by(|a, b| a.i == b.i && a.j == b.j);
        Graph {
            vertex_count,
            directed,
            edges,
        }
    }

    /// Undirected graph whose edge lengths are the Euclidean distances in `x`.
    pub(crate) fn from_pairs(
        x: &PointSet,
        directed: bool,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let edges = pairs
            .into_iter()
            .map(|(i, j)| Edge {
                i,
                j,
                length: x.point(i).dist(x.point(j)),
            })
            .collect();
        Graph::new(x.len(), directed, edges)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for e in &self.edges {
            deg[e.i] += 1;
            if !self.directed {
                deg[e.j] += 1;
            }
        }
        deg
    }

    /// Lengths of edges incident to each vertex, in edge order. Directed graphs
    /// report out-arcs only.
    pub fn incidence(&self) -> Vec<Vec<f64>> {
        let mut inc = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            inc[e.i].push(e.length);
            if !self.directed {
                inc[e.j].push(e.length);
            }
        }
        inc
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.i, e.j)).collect()
    }
}

/// Lengths of all edges meeting vertex `i` (out-arcs for directed graphs).
pub fn incident_edges(g: &Graph, i: usize) -> Result<Vec<f64>> {
    if i >= g.vertex_count {
        return param(format!("vertex {i} out of range (n = {})", g.vertex_count));
    }
    Ok(g.edges
        .iter()
        .filter(|e| e.i == i || (!g.directed && e.j == i))
        .map(|e| e.length)
        .collect())
}

/// CSV form: `# directed=<0|1> n=<count>` then `i,j,length` rows.
pub fn write_graph<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "# directed={} n={}", g.directed as u8, g.vertex_count)?;
    writeln!(out, "i,j,length")?;
    for e in &g.edges {
        writeln!(out, "{},{},{:.16e}", e.i, e.j, e.length)?;
    }
    Ok(())
}

pub fn read_graph<R: BufRead>(input: R) -> Result<Graph> {
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let mut directed = None;
    let mut n = None;
    let mut edges = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = k + 1;
        if line.is_empty() || line == "i,j,length" {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for tok in rest.split_whitespace() {
                if let Some(v) = tok.strip_prefix("directed=") {
                    directed = Some(v == "1");
                } else if let Some(v) = tok.strip_prefix("n=") {
                    n = Some(
                        v.parse::<usize>()
                            .map_err(|e| perr(lineno, e.to_string()))?,
                    );
                }
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(perr(
                lineno,
                format!("expected 3 fields, found {}", f.len()),
            ));
        }
        let i = f[0]
            .trim()
            .parse::<usize>()
            .map_err(|e| perr(lineno, e.to_string()))?;
        let j = f[1]
            .trim()
            .parse::<usize>()
            .map_err(|e| perr(lineno, e.to_string()))?;
        let length = f[2]
            .trim()
            .parse::<f64>()
            .map_err(|e| perr(lineno, e.to_string()))?;
        edges.push(Edge { i, j, length });
    }
    let (Some(directed), Some(n)) = (directed, n) else {
        return Err(perr(
            1,
            "missing '# directed=<0|1> n=<count>' header".into(),
        ));
    };
    if let Some(e) = edges.iter().find(|e| e.i >= n || e.j >= n) {
        return Err(perr(0, format!("edge ({}, {}) out of range", e.i, e.j)));
    }
    Ok(Graph::new(n, directed, edges))
}
