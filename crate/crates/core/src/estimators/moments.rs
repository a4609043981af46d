use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use super::{
    check_setting, check_tau, insert_mark, run_reps, EstimateReport, McConfig, Sample, TailCurve,
    Truncation,
};
use crate::error::{param, Error, Result};
use crate::functionals::{evaluate_all, evaluate_local, WeightFunctional};
use crate::geometry::Neighborhood;
use rand::Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::point_process::{
    attach_marks, sample_homogeneous_poisson, sample_inhomogeneous_poisson, unit_ball_volume,
    DensityField, Mark, Point, PointSet, Window,
};
use crate::util::{compensated_sum, gauss_legendre, mean};
use crate::RngStream;

/// Tail level below which truncation at `L` is accepted.
pub const TAIL_LEVEL: f64 = 1e-3;

fn check_truncation(l: f64, tail: Option<&TailCurve>) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return param("window half-width must be positive");
    }
    if let Some(tc) = tail {
        if tc.prob_at(l) >= TAIL_LEVEL {
            let suggested = tc
                .first_below(TAIL_LEVEL)
                .map_or(2.0 * l, |t| (2.0 * t).max(l * 1.5));
            return Err(Error::Truncation {
                message: format!(
                    "stabilization tail at L = {l} is {:.3e} >= {TAIL_LEVEL:e}",
                    tc.prob_at(l)
                ),
                suggested,
            });
        }
    }
    Ok(())
}

fn origin_of(dim: usize) -> Point {
    Point::origin(dim)
}

/// `Ê ξ(0; P_τ ∪ 0)` on `[-L, L]^d`.
pub fn estimate_xi_mean(
    xi: &WeightFunctional,
    tau: f64,
    l: f64,
    mc: &McConfig,
    tail: Option<&TailCurve>,
) -> Result<EstimateReport> {
    check_setting(xi, tau, mc)?;
    check_truncation(l, tail)?;
    let started = Instant::now();
    let seed = RngStream::derive_seed(mc.seed, "xi-mean");
    let window = Window::centered_cube(mc.dim, l);
    let law = xi.mark_law();
    let z = run_reps(seed, mc.reps, |rng| {
        let s = Sample::draw(xi, tau, &window, rng)?;
        let mut nb = s.neighborhood();
        let o = nb.insert(origin_of(mc.dim), insert_mark(&law, mc.origin_mark, rng))?;
        evaluate_local(xi, &nb, o)
    })?;
    Ok(EstimateReport::from_samples(
        &z,
        mc.seed,
        Truncation {
            window_half_width: l,
            pair_cutoff: None,
        },
        started,
    ))
}

/// `Δ_0(X) = H(X ∪ 0) - H(X)` as a sum of pointwise changes, so that
/// weights untouched by the insertion cancel exactly.
fn add_one_at_origin(xi: &WeightFunctional, s: &Sample, mark: Option<Mark>) -> Result<f64> {
    let x = &s.points;
    let o = origin_of(x.dim());
    if let WeightFunctional::GermGrainVolume { .. } = xi {
        // Only cells of sites within 2 T_max of the origin can change.
        let mut with = s.neighborhood();
        let id = with.insert(o, mark)?;
        let reach = 2.0 * with.mark_extent().max_radius;
        let without = s.neighborhood();
        let mut terms = vec![evaluate_local(xi, &with, id)?];
        for c in s.index.within(&o, reach, true) {
            terms.push(evaluate_local(xi, &with, c.id)? - evaluate_local(xi, &without, c.id)?);
        }
        return Ok(compensated_sum(terms));
    }
    let before = evaluate_all(xi, x)?;
    let after = evaluate_all(xi, &x.with_point(o, mark)?)?;
    let n = x.len();
    Ok(after[n] + compensated_sum((0..n).map(|i| after[i] - before[i])))
}

/// `D̂^ξ(τ) = Ê Δ_0(P_τ ∩ [-L, L]^d)`.
pub fn estimate_d(
    xi: &WeightFunctional,
    tau: f64,
    l: f64,
    mc: &McConfig,
    tail: Option<&TailCurve>,
) -> Result<EstimateReport> {
    check_setting(xi, tau, mc)?;
    check_truncation(l, tail)?;
    let started = Instant::now();
    let seed = RngStream::derive_seed(mc.seed, "add-one");
    let window = Window::centered_cube(mc.dim, l);
    let law = xi.mark_law();
    let z = run_reps(seed, mc.reps, |rng| {
        let s = Sample::draw(xi, tau, &window, rng)?;
        add_one_at_origin(xi, &s, insert_mark(&law, mc.origin_mark, rng))
    })?;
    Ok(EstimateReport::from_samples(
        &z,
        mc.seed,
        Truncation {
            window_half_width: l,
            pair_cutoff: None,
        },
        started,
    ))
}

/// Per-replicate ingredients of the two-point term:
/// `A = ξ(a; X ∪ {a, b}) ξ(b; X ∪ {a, b})`, `B = ξ(a; X ∪ a)` and
/// `B' = ξ(b; X' ∪ b)` on an independent copy `X'`.
struct Paired {
    a: f64,
    b: f64,
    b_indep: f64,
}

/// `Ā - B̄ B̄'` with the delta-method standard error.
fn paired_report(
    p: &[Paired],
    seed: u64,
    truncation: Truncation,
    started: Instant,
) -> EstimateReport {
    let bm = mean(&p.iter().map(|q| q.b).collect::<Vec<_>>());
    let bpm = mean(&p.iter().map(|q| q.b_indep).collect::<Vec<_>>());
    let z: Vec<f64> = p.iter().map(|q| q.a - bpm * q.b - bm * q.b_indep).collect();
    let mut r = EstimateReport::from_samples(&z, seed, truncation, started);
    r.value = mean(&p.iter().map(|q| q.a).collect::<Vec<_>>()) - bm * bpm;
    r
}

/// `E[ξ(0; P ∪ y) ξ(y; P ∪ 0)] - E ξ(0; P) E ξ(y; P')`, sampled on the cube
/// of half-width `L` centred at `y/2`.
pub fn estimate_pair_integrand(
    xi: &WeightFunctional,
    tau: f64,
    y: &Point,
    l: f64,
    mc: &McConfig,
    tail: Option<&TailCurve>,
) -> Result<EstimateReport> {
    check_setting(xi, tau, mc)?;
    check_truncation(l, tail)?;
    if y.dim() != mc.dim {
        return param("y has the wrong dimension");
    }
    if y.norm() >= 2.0 * l {
        return param("|y| must be below 2L");
    }
    if y.norm() == 0.0 {
        return param("y must differ from the origin");
    }
    let started = Instant::now();
    let seed = RngStream::derive_seed(mc.seed, "pair-integrand");
    let window = Window::cube_around(&y.scaled(0.5), l);
    let law = xi.mark_law();
    let o = origin_of(mc.dim);
    let p = run_reps(seed, mc.reps, |rng| {
        let s = Sample::draw(xi, tau, &window, rng)?;
        let s2 = Sample::draw(xi, tau, &window, rng)?;
        let mo = insert_mark(&law, mc.origin_mark, rng);
        let my = insert_mark(&law, None, rng);
        let my2 = insert_mark(&law, None, rng);
        paired_at(xi, &s, &s2, o, *y, mo, my, my2)
    })?;
    Ok(paired_report(
        &p,
        mc.seed,
        Truncation {
            window_half_width: l,
            pair_cutoff: None,
        },
        started,
    ))
}

#[allow(clippy::too_many_arguments)]
fn paired_at(
    xi: &WeightFunctional,
    s: &Sample,
    s2: &Sample,
    a: Point,
    b: Point,
    ma: Option<Mark>,
    mb: Option<Mark>,
    mb2: Option<Mark>,
) -> Result<Paired> {
    let mut nb = s.neighborhood();
    let ia = nb.insert(a, ma)?;
    let single = evaluate_local(xi, &nb, ia)?;
    let ib = nb.insert(b, mb)?;
    let prod = evaluate_local(xi, &nb, ia)? * evaluate_local(xi, &nb, ib)?;
    let mut nb2 = s2.neighborhood();
    let ib2 = nb2.insert(b, mb2)?;
    Ok(Paired {
        a: prod,
        b: single,
        b_indep: evaluate_local(xi, &nb2, ib2)?,
    })
}

/// A node of the pair-integral rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureNode {
    pub point: Point,
    pub weight: f64,
    pub shell: usize,
}

/// Radial midpoint shells on `B(0, ρ_max)` times a fixed angular rule: the two
/// points `±r` in d = 1, 24 equally spaced angles in d = 2, and a product
/// rule (6 Gauss–Legendre nodes in `cos θ` × 12 azimuths) in d = 3. Weights
/// sum to the ball volume.
pub fn shell_nodes(dim: usize, rho_max: f64, shells: usize) -> Result<Vec<QuadratureNode>> {
    if !(1..=3).contains(&dim) || shells == 0 || !(rho_max > 0.0 && rho_max.is_finite()) {
        return param("invalid shell quadrature parameters");
    }
    let h = rho_max / shells as f64;
    let omega = unit_ball_volume(dim);
    let dirs: Vec<([f64; 3], f64)> = match dim {
        1 => vec![([1.0, 0.0, 0.0], 0.5), ([-1.0, 0.0, 0.0], 0.5)],
        2 => (0..24)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 24.0;
                ([a.cos(), a.sin(), 0.0], 1.0 / 24.0)
            })
            .collect(),
        _ => {
            let (ct, wt) = gauss_legendre(6);
            let mut v = Vec::new();
            for (c, w) in ct.iter().zip(&wt) {
                let s = (1.0 - c * c).sqrt();
                for k in 0..12 {
                    let phi = std::f64::consts::TAU * (k as f64 + 0.5) / 12.0;
                    v.push(([s * phi.cos(), s * phi.sin(), *c], w / 2.0 / 12.0));
                }
            }
            v
        }
    };
    let mut nodes = Vec::with_capacity(shells * dirs.len());
    for s in 0..shells {
        let (r0, r1) = (s as f64 * h, (s + 1) as f64 * h);
        let r = 0.5 * (r0 + r1);
        let vol = omega * (r1.powi(dim as i32) - r0.powi(dim as i32));
        for (u, w) in &dirs {
            nodes.push(QuadratureNode {
                point: Point::new(&[r * u[0], r * u[1], r * u[2]][..dim])?,
                weight: vol * w,
                shell: s,
            });
        }
    }
    Ok(nodes)
}

/// How the pair integral inside `V^ξ(τ)` is computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum VMethod {
    /// Poisson covariance identity
    /// `V = ∫_0^1 E[Δ_0(P) Δ_0(P^(s))] ds`, where `P^(s)` keeps each point of
    /// `P` with probability `s` and adds an independent `P_{τ(1-s)}`. Only
    /// add-one costs at the origin enter, so the per-replicate variance does
    /// not grow with the pair cutoff.
    CovarianceIdentity,
    /// `Ê ξ²(0; P ∪ 0) + τ Σ_j w_j ĝ(y_j)` over [`shell_nodes`] in
    /// `B(0, ρ_max)`; `ρ_max` is doubled (at most three times) until the
    /// outermost shell contributes at most `10⁻³ |V̂|` plus three of its
    /// standard errors.
    ShellQuadrature { rho_max: f64, shells: usize },
}

impl Default for VMethod {
    fn default() -> Self {
        VMethod::CovarianceIdentity
    }
}

impl VMethod {
    pub fn validate(&self) -> Result<()> {
        match self {
            VMethod::CovarianceIdentity => Ok(()),
            VMethod::ShellQuadrature { rho_max, shells } => {
                if !(rho_max.is_finite() && *rho_max > 0.0) || *shells == 0 {
                    return param("shell quadrature needs rho_max > 0 and at least one shell");
                }
                Ok(())
            }
        }
    }
}

const MAX_DOUBLINGS: usize = 3;

/// `V̂^ξ(τ)` on `[-L, L]^d` (enlarged by `ρ_max` for shell quadrature).
pub fn estimate_v(
    xi: &WeightFunctional,
    tau: f64,
    l: f64,
    method: &VMethod,
    mc: &McConfig,
    tail: Option<&TailCurve>,
) -> Result<EstimateReport> {
    check_setting(xi, tau, mc)?;
    check_truncation(l, tail)?;
    method.validate()?;
    let (rho_max, shells) = match method {
        VMethod::CovarianceIdentity => return estimate_v_identity(xi, tau, l, mc),
        VMethod::ShellQuadrature { rho_max, shells } => (*rho_max, *shells),
    };
    let mut rho = rho_max;
    for attempt in 0..=MAX_DOUBLINGS {
        let (report, converged) = estimate_v_at(xi, tau, l, rho, shells, mc)?;
        if converged {
            return Ok(report);
        }
        if attempt == MAX_DOUBLINGS {
            let mut report = report;
            report.warnings.push(format!(
                "pair integrand has not decayed at rho_max = {rho}: the integral may diverge"
            ));
            return Ok(report);
        }
        rho *= 2.0;
    }
    unreachable!()
}

/// `P^(s)`: points of `x` kept with probability `s`, plus an independent
/// marked `P_{τ(1-s)}` on the same window.
fn interpolated(
    xi: &WeightFunctional,
    x: &PointSet,
    s: f64,
    tau: f64,
    window: &Window,
    rng: &mut ChaCha8Rng,
) -> Result<PointSet> {
    let keep: Vec<bool> = (0..x.len()).map(|_| rng.random::<f64>() < s).collect();
    let mut pts: Vec<Point> = Vec::new();
    let mut marks: Vec<Mark> = Vec::new();
    for (i, &k) in keep.iter().enumerate() {
        if k {
            pts.push(*x.point(i));
            if let Some(m) = x.mark(i) {
                marks.push(*m);
            }
        }
    }
    let fresh_rate = tau * (1.0 - s);
    if fresh_rate > 0.0 {
        let mut fresh = sample_homogeneous_poisson(fresh_rate, window, rng)?;
        let law = xi.mark_law();
        if !law.is_empty() {
            fresh = attach_marks(&fresh, &law, rng)?;
        }
        pts.extend(fresh.points().iter().copied());
        if let Some(m) = fresh.marks() {
            marks.extend_from_slice(m);
        }
    }
    if x.marks().is_some() {
        PointSet::with_marks(x.dim(), pts, marks)
    } else {
        PointSet::new(x.dim(), pts)
    }
}

fn estimate_v_identity(
    xi: &WeightFunctional,
    tau: f64,
    l: f64,
    mc: &McConfig,
) -> Result<EstimateReport> {
    let started = Instant::now();
    let seed = RngStream::derive_seed(mc.seed, "variance");
    let window = Window::centered_cube(mc.dim, l);
    let law = xi.mark_law();
    let z = run_reps(seed, mc.reps, |rng| {
        let s = Sample::draw(xi, tau, &window, rng)?;
        let mark = insert_mark(&law, mc.origin_mark, rng);
        let u: f64 = rng.random();
        let other = Sample::new(xi, interpolated(xi, &s.points, u, tau, &window, rng)?)?;
        Ok(add_one_at_origin(xi, &s, mark)? * add_one_at_origin(xi, &other, mark)?)
    })?;
    Ok(EstimateReport::from_samples(
        &z,
        mc.seed,
        Truncation {
            window_half_width: l,
            pair_cutoff: None,
        },
        started,
    ))
}

/// Per replicate: `B = ξ(0; X ∪ 0)`, `S = Σ_j w_j ξ(0; X ∪ {0, y_j}) ξ(y_j; X ∪ {0, y_j})`
/// and `T = Σ_j w_j ξ(y_j; X ∪ y_j)`, in full and restricted to the outer shell.
struct VRep {
    b: f64,
    s: [f64; 2],
    t: [f64; 2],
}

/// `mean(B²) + τ (mean(S) - ⟨B T⟩)` where `⟨B T⟩` is the unbiased
/// off-diagonal estimate of `E B · E T` from the common sample; returns the
/// value and the influence-function terms.
fn v_combine(reps: &[VRep], tau: f64, part: usize, with_second: bool) -> (f64, Vec<f64>) {
    let r = reps.len() as f64;
    let sb = compensated_sum(reps.iter().map(|q| q.b));
    let st = compensated_sum(reps.iter().map(|q| q.t[part]));
    let sbt = compensated_sum(reps.iter().map(|q| q.b * q.t[part]));
    let prod = (sb * st - sbt) / (r * (r - 1.0));
    let (bm, tm) = (sb / r, st / r);
    let second = if with_second { 1.0 } else { 0.0 };
    let z: Vec<f64> = reps
        .iter()
        .map(|q| second * q.b * q.b + tau * (q.s[part] - bm * q.t[part] - tm * q.b))
        .collect();
    let value = second * mean(&reps.iter().map(|q| q.b * q.b).collect::<Vec<_>>())
        + tau * (mean(&reps.iter().map(|q| q.s[part]).collect::<Vec<_>>()) - prod);
    (value, z)
}

fn estimate_v_at(
    xi: &WeightFunctional,
    tau: f64,
    l: f64,
    rho: f64,
    shells: usize,
    mc: &McConfig,
) -> Result<(EstimateReport, bool)> {
    check_tau(tau)?;
    let started = Instant::now();
    let nodes = shell_nodes(mc.dim, rho, shells)?;
    let outer = shells - 1;
    let seed = RngStream::derive_seed(mc.seed, "variance-shells");
    let window = Window::centered_cube(mc.dim, l + rho);
    let law = xi.mark_law();
    let o = origin_of(mc.dim);
    let reps = run_reps(seed, mc.reps, |rng: &mut ChaCha8Rng| {
        let s = Sample::draw(xi, tau, &window, rng)?;
        let mut plain = s.neighborhood();
        let mut nb: Neighborhood<'_> = s.neighborhood();
        let i0 = nb.insert(o, insert_mark(&law, mc.origin_mark, rng))?;
        let b = evaluate_local(xi, &nb, i0)?;
        let (mut sa, mut so, mut ta, mut to) = (vec![], vec![], vec![], vec![]);
        for node in &nodes {
            let my = insert_mark(&law, None, rng);
            let iy = nb.insert(node.point, my)?;
            let a = evaluate_local(xi, &nb, i0)? * evaluate_local(xi, &nb, iy)?;
            nb.truncate_extras(1);
            let jy = plain.insert(node.point, my)?;
            let c = evaluate_local(xi, &plain, jy)?;
            plain.truncate_extras(0);
            sa.push(node.weight * a);
            ta.push(node.weight * c);
            if node.shell == outer {
                so.push(node.weight * a);
                to.push(node.weight * c);
            }
        }
        Ok(VRep {
            b,
            s: [compensated_sum(sa), compensated_sum(so)],
            t: [compensated_sum(ta), compensated_sum(to)],
        })
    })?;
    let (value, z) = v_combine(&reps, tau, 0, true);
    let (outer_value, z_outer) = v_combine(&reps, tau, 1, false);
    let mut report = EstimateReport::from_samples(
        &z,
        mc.seed,
        Truncation {
            window_half_width: l,
            pair_cutoff: Some(rho),
        },
        started,
    );
    report.value = value;
    let outer_se =
        EstimateReport::from_samples(&z_outer, mc.seed, Truncation::default(), started).std_error;
    let converged = outer_value.abs() <= TAIL_LEVEL * report.value.abs() + 3.0 * outer_se;
    Ok((report, converged))
}

/// `ĉ_λ(x, y) = Ê[ξ_λ(x; P ∪ y) ξ_λ(y; P ∪ x)] - Ê ξ_λ(x; P) Ê ξ_λ(y; P')`
/// for `P = P_{λκ}`.
pub fn estimate_pair_correlation(
    xi: &WeightFunctional,
    kappa: &DensityField,
    lambda: f64,
    x: &Point,
    y: &Point,
    mc: &McConfig,
) -> Result<EstimateReport> {
    xi.validate()?;
    mc.validate()?;
    kappa.validate()?;
    let dim = kappa.dim();
    if x.dim() != dim || y.dim() != dim || mc.dim != dim {
        return param("points and density must share a dimension");
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return param("lambda must be positive");
    }
    if !kappa.window.contains(x) || !kappa.window.contains(y) || x == y {
        return param("x and y must be distinct points of the window");
    }
    let started = Instant::now();
    let seed = RngStream::derive_seed(mc.seed, "pair-correlation");
    let scaled_xi = xi.rescaled(lambda, dim);
    let a = lambda.powf(1.0 / dim as f64);
    let (sx, sy) = (x.scaled(a), y.scaled(a));
    let law = xi.mark_law();
    let draw = |rng: &mut ChaCha8Rng| -> Result<Sample> {
        let mut p = sample_inhomogeneous_poisson(kappa, lambda, rng)?;
        if !law.is_empty() {
            p = attach_marks(&p, &law, rng)?;
        }
        Sample::new(&scaled_xi, p.affine(a, &Point::origin(dim)))
    };
    let p = run_reps(seed, mc.reps, |rng| {
        let s = draw(rng)?;
        let s2 = draw(rng)?;
        let mx = insert_mark(&law, mc.origin_mark, rng);
        let my = insert_mark(&law, None, rng);
        let my2 = insert_mark(&law, None, rng);
        paired_at(&scaled_xi, &s, &s2, sx, sy, mx, my, my2)
    })?;
    Ok(paired_report(
        &p,
        mc.seed,
        Truncation {
            window_half_width: 0.0,
            pair_cutoff: None,
        },
        started,
    ))
}
