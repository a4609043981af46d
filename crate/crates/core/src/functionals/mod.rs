//! Weight functionals ξ(x; X) and the point measures, masses and add-one
//! costs built from them.

mod germ_grain;
mod local;
mod packing;

pub use germ_grain::{germ_grain_volume, hit_or_miss_union_area, FibonacciLattice, QMC_SAMPLES};
pub use local::evaluate_local;
pub use packing::{birth_growth, rsa_pack, rsa_radius, write_acceptance, AcceptanceVector};

use std::io::Write;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::geometry::{
    delaunay_2d, knn_graph, sig_graph, voronoi_dual_edges, Edge, Graph, Triangulation,
};
use crate::point_process::{rescale, Mark, MarkLaw, Point, PointSet, RadiusLaw, Window};
use crate::util::compensated_sum;

/// Edge-length weight ϕ on `[0, ∞]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EdgeWeight {
    /// `coefficient · t^exponent`, with `ϕ(∞) = 0`.
    Power { exponent: f64, coefficient: f64 },
    /// `1{t <= threshold}`.
    Indicator { threshold: f64 },
    /// `value` for every `t`, including `t = ∞`.
    Constant { value: f64 },
}

impl EdgeWeight {
    pub fn length() -> Self {
        EdgeWeight::Power {
            exponent: 1.0,
            coefficient: 1.0,
        }
    }

    /// `t / 2`: summing over vertices gives the total edge length.
    pub fn half_length() -> Self {
        EdgeWeight::Power {
            exponent: 1.0,
            coefficient: 0.5,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            EdgeWeight::Power {
                exponent,
                coefficient,
            } => {
                if t.is_infinite() {
                    0.0
                } else {
                    coefficient * t.powf(exponent)
                }
            }
            EdgeWeight::Indicator { threshold } => (t <= threshold) as u8 as f64,
            EdgeWeight::Constant { value } => value,
        }
    }

    /// Homogeneity order of `ϕ`, when it is a pure power.
    pub fn homogeneity(&self) -> Option<f64> {
        match *self {
            EdgeWeight::Power { exponent, .. } => Some(exponent),
            EdgeWeight::Constant { .. } => Some(0.0),
            EdgeWeight::Indicator { .. } => None,
        }
    }

    /// `(C, a)` with `ϕ(t) <= C (1 + t^a)`.
    pub fn growth(&self) -> (f64, f64) {
        match *self {
            EdgeWeight::Power {
                exponent,
                coefficient,
            } => (coefficient.abs(), exponent),
            EdgeWeight::Indicator { .. } => (1.0, 0.0),
            EdgeWeight::Constant { value } => (value.abs(), 0.0),
        }
    }

    pub fn vanishes_at_infinity(&self) -> bool {
        !matches!(self, EdgeWeight::Constant { value } if *value != 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EdgeWeight::Power {
                exponent,
                coefficient,
            } if exponent.is_finite()
                && exponent >= 0.0
                && coefficient.is_finite()
                && coefficient >= 0.0 =>
            {
                Ok(())
            }
            EdgeWeight::Indicator { threshold } if threshold >= 0.0 && !threshold.is_nan() => {
                Ok(())
            }
            EdgeWeight::Constant { value } if value.is_finite() && value >= 0.0 => Ok(()),
            _ => param(format!("invalid edge weight {self:?}")),
        }
    }
}

/// The rule `ξ(x; X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightFunctional {
    /// `ξ ≡ 1`.
    Counting,
    KnnEdge {
        k: usize,
        directed: bool,
        phi: EdgeWeight,
    },
    DelaunayEdge {
        phi: EdgeWeight,
    },
    /// Sum of `ϕ` over the Voronoi boundary segments of the cell of `x`.
    VoronoiEdge {
        phi: EdgeWeight,
    },
    SigEdge {
        phi: EdgeWeight,
    },
    /// Indicator that the ball of volume `ball_volume` at `x` is packed.
    Rsa {
        ball_volume: f64,
    },
    /// Indicator that the seed at `x` survives spatial birth–growth.
    BirthGrowth {
        speed: f64,
        radius: RadiusLaw,
    },
    /// Area of the union of grains within the Voronoi cell of `x`, optionally
    /// restricted to a window.
    GermGrainVolume {
        radius: RadiusLaw,
        #[serde(default)]
        window: Option<Window>,
    },
}

impl WeightFunctional {
    /// `k`-NN total edge length (`ϕ(t) = t/2`, undirected).
    pub fn knn_length(k: usize) -> Self {
        WeightFunctional::KnnEdge {
            k,
            directed: false,
            phi: EdgeWeight::half_length(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFunctional::Counting => Ok(()),
            WeightFunctional::KnnEdge { k, phi, .. } => {
                if *k == 0 {
                    return param("k-NN functional needs k >= 1");
                }
                phi.validate()
            }
            WeightFunctional::DelaunayEdge { phi } | WeightFunctional::SigEdge { phi } => {
                phi.validate()
            }
            WeightFunctional::VoronoiEdge { phi } => {
                phi.validate()?;
                if !phi.vanishes_at_infinity() {
                    return param("Voronoi functionals need ϕ(∞) = 0; a nonzero constant weight is not allowed");
                }
                Ok(())
            }
            WeightFunctional::Rsa { ball_volume } => {
                if !(ball_volume.is_finite() && *ball_volume > 0.0) {
                    return param("RSA ball volume must be positive");
                }
                Ok(())
            }
            WeightFunctional::BirthGrowth { speed, radius } => {
                if !(speed.is_finite() && *speed >= 0.0) {
                    return param("growth speed must be finite and nonnegative");
                }
                radius.validate()
            }
            WeightFunctional::GermGrainVolume { radius, window } => {
                radius.validate()?;
                if let Some(w) = window {
                    w.validate()?;
                    if w.dim() != 2 {
                        return param("germ-grain window must be planar");
                    }
                }
                Ok(())
            }
        }
    }

    /// `γ` with `ξ(ax; aX) = a^γ ξ(x; X)`, when known.
    pub fn homogeneity_order(&self) -> Option<f64> {
        match self {
            WeightFunctional::Counting => Some(0.0),
            WeightFunctional::KnnEdge { phi, .. }
            | WeightFunctional::DelaunayEdge { phi }
            | WeightFunctional::SigEdge { phi } => phi.homogeneity(),
            WeightFunctional::VoronoiEdge { phi } => match phi {
                EdgeWeight::Power { exponent, .. } => Some(*exponent),
                _ => None,
            },
            _ => None,
        }
    }

    /// Marks the functional reads; inserted points receive marks from this law.
    pub fn mark_law(&self) -> MarkLaw {
        match self {
            WeightFunctional::Rsa { .. } => MarkLaw::times(),
            WeightFunctional::BirthGrowth { radius, .. } => MarkLaw {
                time: true,
                radius: Some(radius.clone()),
            },
            WeightFunctional::GermGrainVolume { radius, .. } => MarkLaw::radii(radius.clone()),
            _ => MarkLaw::default(),
        }
    }

    pub fn required_dim(&self) -> Option<usize> {
        match self {
            WeightFunctional::DelaunayEdge { .. }
            | WeightFunctional::VoronoiEdge { .. }
            | WeightFunctional::GermGrainVolume { .. } => Some(2),
            _ => None,
        }
    }

    pub fn check_input(&self, x: &PointSet) -> Result<()> {
        self.validate()?;
        if let Some(d) = self.required_dim() {
            if x.dim() != d {
                return param(format!("this functional is only defined in d = {d}"));
            }
        }
        let law = self.mark_law();
        if law.time && !x.is_empty() && !x.has_times() {
            return param("this functional needs time marks on every point");
        }
        if law.radius.is_some() && !x.is_empty() && !x.has_radii() {
            return param("this functional needs radius marks on every point");
        }
        Ok(())
    }

    /// The functional acting on the configuration `λ^{1/d} X`: any spatial
    /// parameter attached to the functional (a clipping window) is mapped too.
    pub fn rescaled(&self, lambda: f64, dim: usize) -> Self {
        match self {
            WeightFunctional::GermGrainVolume {
                radius,
                window: Some(w),
            } if lambda != 1.0 => {
                let a = lambda.powf(1.0 / dim as f64);
                let (lo, hi) = w.bounds();
                let scaled = match w {
                    Window::Ball { center, radius: r } => Window::Ball {
                        center: center.iter().map(|c| a * c).collect(),
                        radius: a * r,
                    },
                    _ => Window::Box {
                        lo: lo.coords().iter().map(|c| a * c).collect(),
                        hi: hi.coords().iter().map(|c| a * c).collect(),
                    },
                };
                WeightFunctional::GermGrainVolume {
                    radius: radius.clone(),
                    window: Some(scaled),
                }
            }
            other => other.clone(),
        }
    }
}

pub(crate) fn graph_sums(g: &Graph, phi: &EdgeWeight) -> Vec<f64> {
    g.incidence()
        .iter()
        .map(|ls| compensated_sum(ls.iter().map(|&l| phi.eval(l))))
        .collect()
}

/// The Delaunay graph (or, with `voronoi`, the Voronoi boundary-length
/// graph), extended to the degenerate inputs a functional may meet: two
/// points, or all points on a line (consecutive points are joined, and their
/// Voronoi boundaries are parallel lines of infinite length).
pub(crate) fn planar_graph(voronoi: bool, x: &PointSet) -> Result<(Graph, Option<Triangulation>)> {
    let n = x.len();
    let pairs: Vec<(usize, usize)> = match n {
        0 | 1 => vec![],
        2 => vec![(0, 1)],
        _ => match delaunay_2d(x) {
            Ok(t) => {
                let g = if voronoi {
                    Graph::new(n, false, voronoi_dual_edges(&t))
                } else {
                    t.to_graph(x)
                };
                return Ok((g, Some(t)));
            }
            Err(crate::Error::Degenerate(_)) => {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| x.point(a).lex_cmp(x.point(b)));
                order
                    .windows(2)
                    .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
                    .collect()
            }
            Err(e) => return Err(e),
        },
    };
    let g = if voronoi {
        Graph::new(
            n,
            false,
            pairs
                .into_iter()
                .map(|(i, j)| Edge {
                    i,
                    j,
                    length: f64::INFINITY,
                })
                .collect(),
        )
    } else {
        Graph::from_pairs(x, false, pairs)
    };
    Ok((g, None))
}

/// `ξ(x_i; X)` for every point of `X` (no rescaling).
pub fn evaluate_all(xi: &WeightFunctional, x: &PointSet) -> Result<Vec<f64>> {
    xi.check_input(x)?;
    let n = x.len();
    if n == 0 {
        return Ok(vec![]);
    }
    match xi {
        WeightFunctional::Counting => Ok(vec![1.0; n]),
        WeightFunctional::KnnEdge { k, directed, phi } => {
            if n < 2 {
                return Ok(vec![0.0; n]);
            }
            let g = knn_graph(x, (*k).min(n - 1), *directed)?;
            Ok(graph_sums(&g, phi))
        }
        WeightFunctional::DelaunayEdge { phi } => Ok(graph_sums(&planar_graph(false, x)?.0, phi)),
        WeightFunctional::VoronoiEdge { phi } => Ok(graph_sums(&planar_graph(true, x)?.0, phi)),
        WeightFunctional::SigEdge { phi } => {
            if n < 2 {
                return Ok(vec![0.0; n]);
            }
            Ok(graph_sums(&sig_graph(x)?, phi))
        }
        WeightFunctional::Rsa { ball_volume } => Ok(rsa_pack(x, *ball_volume)?.weights()),
        WeightFunctional::BirthGrowth { speed, .. } => Ok(birth_growth(x, *speed)?.weights()),
        WeightFunctional::GermGrainVolume { window, .. } => {
            let radii = germ_grain::radii_of(x)?;
            let index = crate::geometry::SpatialIndex::new(x);
            Ok((0..n)
                .map(|i| germ_grain::volume_with_index(x, &radii, &index, i, window.as_ref()))
                .collect())
        }
    }
}

/// `ξ_ϕ^G(x_i; X)` for a graph functional.
pub fn xi_graph(xi: &WeightFunctional, i: usize, x: &PointSet) -> Result<f64> {
    match xi {
        WeightFunctional::KnnEdge { .. }
        | WeightFunctional::DelaunayEdge { .. }
        | WeightFunctional::VoronoiEdge { .. }
        | WeightFunctional::SigEdge { .. } => at_index(xi, i, x),
        _ => param("xi_graph needs a graph functional"),
    }
}

fn at_index(xi: &WeightFunctional, i: usize, x: &PointSet) -> Result<f64> {
    if i >= x.len() {
        return param(format!("index {i} out of range (n = {})", x.len()));
    }
    Ok(evaluate_all(xi, x)?[i])
}

/// `ξ_λ(x_i; X) = ξ(λ^{1/d} x_i; λ^{1/d} X)`.
pub fn xi_rescaled(xi: &WeightFunctional, lambda: f64, i: usize, x: &PointSet) -> Result<f64> {
    at_index(&xi.rescaled(lambda, x.dim()), i, &rescale(x, lambda)?)
}

/// The atoms `Σ_x ξ_λ(x; X) δ_x`, at unscaled positions.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedMeasure {
    pub dim: usize,
    pub atoms: Vec<(Point, f64)>,
}

impl WeightedMeasure {
    pub fn total(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.1))
    }

    /// CSV `x1,...,xd,weight`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let head: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        writeln!(out, "{},weight", head.join(","))?;
        for (p, w) in &self.atoms {
            let mut f: Vec<String> = p.coords().iter().map(|c| format!("{c:.16e}")).collect();
            f.push(format!("{w:.16e}"));
            writeln!(out, "{}", f.join(","))?;
        }
        Ok(())
    }
}

pub fn point_measure(xi: &WeightFunctional, x: &PointSet, lambda: f64) -> Result<WeightedMeasure> {
    let weights = evaluate_all(&xi.rescaled(lambda, x.dim()), &rescale(x, lambda)?)?;
    Ok(WeightedMeasure {
        dim: x.dim(),
        atoms: x.points().iter().copied().zip(weights).collect(),
    })
}

/// `⟨f, μ⟩ = Σ f(x) w(x)`.
pub fn integrate(f: impl Fn(&Point) -> f64, mu: &WeightedMeasure) -> f64 {
    compensated_sum(mu.atoms.iter().map(|(p, w)| f(p) * w))
}

/// `H_λ(X) = Σ_x ξ_λ(x; X)`.
pub fn total_mass(xi: &WeightFunctional, x: &PointSet, lambda: f64) -> Result<f64> {
    Ok(point_measure(xi, x, lambda)?.total())
}

/// `H_n^f(X) = Σ_x f(x) ξ_n(x; X)`.
pub fn weighted_mass(
    xi: &WeightFunctional,
    f: impl Fn(&Point) -> f64,
    x: &PointSet,
    n: f64,
) -> Result<f64> {
    Ok(integrate(f, &point_measure(xi, x, n)?))
}

/// `Δ_x(X) = H(X ∪ x) − H(X)`, computed pointwise so that points whose
/// weight is unaffected cancel exactly.
pub fn add_one_cost(
    xi: &WeightFunctional,
    p: Point,
    mark: Option<Mark>,
    x: &PointSet,
) -> Result<f64> {
    let with = x.with_point(p, mark)?;
    let before = evaluate_all(xi, x)?;
    let after = evaluate_all(xi, &with)?;
    let n = x.len();
    Ok(after[n] + compensated_sum((0..n).map(|i| after[i] - before[i])))
}
