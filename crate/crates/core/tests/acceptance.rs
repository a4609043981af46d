//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Seeds are fixed up front; tolerances are the stated ones.

use std::path::{Path, PathBuf};
use std::time::Instant;

use geoprob::estimators::{
    estimate_pair_correlation, estimate_stab_tail, McConfig, TableSettings, VDTable, VMethod,
};
use geoprob::functionals::{
    birth_growth, germ_grain_volume, hit_or_miss_union_area, rsa_pack, rsa_radius, EdgeWeight,
    WeightFunctional,
};
use geoprob::geometry::{
    delaunay_2d, knn_brute, knn_graph, polygon_area, sig_brute, sig_graph, voronoi_cells_2d,
};
use geoprob::harness::{
    default_half_width, run_clt_experiment, run_clt_with_table, run_scaling_check, scaling_check,
    CLTReport, ExperimentConfig, FunctionStats, InputGrid, TablePlan, TestFunction,
};
use geoprob::point_process::{attach_marks, sample_binomial, MarkLaw, RadiusLaw};
use geoprob::{DensityField, Point, PointSet, RngStream, Window};
use rand::Rng;

type Outcome = Result<(bool, String), geoprob::Error>;

fn nn() -> WeightFunctional {
    WeightFunctional::knn_length(1)
}

fn stats<'a>(r: &'a CLTReport, g: usize, label: &str) -> &'a FunctionStats {
    r.grid[g]
        .functions
        .iter()
        .find(|f| f.label == label)
        .unwrap()
}

fn prediction(r: &CLTReport, label: &str) -> (f64, f64, f64, f64) {
    let p = r.predictions.iter().find(|p| p.label == label).unwrap();
    (
        p.mean.value,
        p.mean.std_error,
        p.variance.value,
        p.variance.std_error,
    )
}

fn experiment(
    model: WeightFunctional,
    density: &str,
    dim: usize,
    input: InputGrid,
    fs: Vec<TestFunction>,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        model,
        density: DensityField::by_name(density, dim).unwrap(),
        input,
        test_functions: fs,
        replications: 1000,
        seed,
        quadrature_nodes: 24,
        table: TablePlan::default(),
        criteria: Default::default(),
    }
}

fn uniform_points(n: usize, dim: usize, rng: &mut rand_chacha::ChaCha8Rng) -> PointSet {
    sample_binomial(n, &DensityField::by_name("uniform", dim).unwrap(), rng).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let (mut knn_bad, mut sig_bad) = (0, 0);
    for r in 0..100u64 {
        let mut rng = RngStream::new(101, r).rng();
        let dim = 1 + (r % 3) as usize;
        let n = rng.random_range(2..=200);
        let x = uniform_points(n, dim, &mut rng);
        let k = rng.random_range(1..=(n - 1).min(8));
        for directed in [false, true] {
            if knn_graph(&x, k, directed)? != knn_brute(&x, k, directed)? {
                knn_bad += 1;
            }
        }
        let mut rng = RngStream::new(102, r).rng();
        let x = uniform_points(rng.random_range(2..=200), dim, &mut rng);
        if sig_graph(&x)? != sig_brute(&x)? {
            sig_bad += 1;
        }
    }
    Ok((
        knn_bad == 0 && sig_bad == 0,
        format!(
            "100 instances each, d in 1..3, n <= 200: {knn_bad} kNN and {sig_bad} SIG mismatches"
        ),
    ))
}

fn delaunay_voronoi() -> Outcome {
    let w = Window::unit_cube(2);
    let (mut worst_inside, mut worst_area) = (0.0f64, 0.0f64);
    for r in 0..50u64 {
        let mut rng = RngStream::new(201, r).rng();
        let x = uniform_points(100, 2, &mut rng);
        let tri = delaunay_2d(&x)?;
        for t in 0..tri.triangles().len() {
            let (c, rad) = (tri.circumcenter(t), tri.circumradius(t));
            for p in x.points() {
                let d = (p.coord(0) - c[0]).hypot(p.coord(1) - c[1]);
                worst_inside = worst_inside.max((rad - d) / rad);
            }
        }
        let area: f64 = voronoi_cells_2d(&x, &w)?
            .iter()
            .map(|c| polygon_area(&c.polygon))
            .sum();
        worst_area = worst_area.max((area - 1.0).abs());
    }
    Ok((
        worst_inside <= 1e-9 && worst_area <= 1e-6,
        format!(
            "50 instances, n = 100: worst relative circumcircle intrusion {worst_inside:.2e} (slack 1e-9), \
             worst cell-area error {worst_area:.2e} (tol 1e-6)"
        ),
    ))
}

fn counting_degenerate() -> Outcome {
    let one = vec![TestFunction::one()];
    let b = experiment(
        WeightFunctional::Counting,
        "linear",
        2,
        InputGrid::Binomial {
            ns: vec![250, 1000, 2000],
        },
        one.clone(),
        301,
    );
    let rb = run_clt_experiment(&b)?;
    let zero_var = rb.grid.iter().all(|g| g.functions[0].var_over_n == 0.0);
    let (v, d) = (rb.table.v_values[0].value, rb.table.d_values[0].value);
    let (_, _, pred_b, _) = prediction(&rb, "one");

    let p = experiment(
        WeightFunctional::Counting,
        "linear",
        2,
        InputGrid::Poisson {
            lambdas: vec![1000.0],
        },
        one,
        302,
    );
    let rp = run_clt_experiment(&p)?;
    let s = stats(&rp, 0, "one");
    let var_ok = (s.var_over_n - 1.0).abs() <= 3.0 * s.var_se;
    let skew = s.cumulants.skewness.unwrap();
    let exact_skew = 1000f64.powf(-0.5);
    let skew_ok = (skew - exact_skew).abs() <= 3.0 * s.cumulants.skewness_se;
    Ok((
        zero_var && v == 1.0 && d == 1.0 && pred_b.abs() <= 1e-12 && var_ok && skew_ok,
        format!(
            "binomial Var = 0 at every n: {zero_var}; V = {v}, D = {d}, binomial prediction {pred_b:.1e}; \
             Poisson Var/λ {:.4} ± {:.4} (vs 1); skewness {skew:.4} vs {exact_skew:.4} (3·√(6/R) = {:.4})",
            s.var_over_n,
            s.var_se,
            3.0 * s.cumulants.skewness_se
        ),
    ))
}

fn rsa_two_intervals() -> Outcome {
    let reps = 100_000u64;
    let kappa = DensityField::by_name("uniform", 1).unwrap();
    let mut total = 0usize;
    let mut sq = 0usize;
    for r in 0..reps {
        let mut rng = RngStream::new(401, r).rng();
        let x = attach_marks(
            &sample_binomial(2, &kappa, &mut rng)?,
            &MarkLaw::times(),
            &mut rng,
        )?;
        let c = rsa_pack(&x, 0.5)?.count();
        total += c;
        sq += c * c;
    }
    let mean = total as f64 / reps as f64;
    let se = ((sq as f64 / reps as f64 - mean * mean) / reps as f64).sqrt();
    Ok((
        (mean - 1.25).abs() <= 0.01,
        format!("d = 1, n = 2, ball volume 1/2, {reps} reps: mean accepted {mean:.4} (SE {se:.4}) vs 1.25 ± 0.01"),
    ))
}

fn birth_growth_reduction() -> Outcome {
    let mut mismatches = 0;
    for r in 0..1000u64 {
        let mut rng = RngStream::new(501, r).rng();
        let dim = 1 + (r % 3) as usize;
        let volume = 0.002 * (1 + r % 10) as f64;
        let radius = rsa_radius(dim, volume);
        let law = MarkLaw {
            time: true,
            radius: Some(RadiusLaw::Constant { value: radius }),
        };
        let x = attach_marks(&uniform_points(60, dim, &mut rng), &law, &mut rng)?;
        if birth_growth(&x, 0.0)? != rsa_pack(&x, volume)? {
            mismatches += 1;
        }
    }
    Ok((
        mismatches == 0,
        format!("1000 seeded replicates (d = 1..3, 60 seeds, v = 0, ρ = r): {mismatches} differing acceptance vectors"),
    ))
}

fn homogeneity_scaling(half_width: f64) -> Outcome {
    let settings = TableSettings {
        tau_grid: vec![0.5, 1.0, 2.0],
        half_width,
        v_method: VMethod::CovarianceIdentity,
        reps: 2000,
    };
    let (table, report) = run_scaling_check(&nn(), 1.0, &settings, &McConfig::new(2, 2000, 601))?;
    let control = scaling_check(&table, 2.0, 3.0);
    Ok((
        report.passed && !control.passed,
        format!(
            "τ ∈ {{1/2, 1, 2}}, R = 2000: γ = 1 max pairwise z V {:.2}, D {:.2} (limit 3); \
             control γ = 2: V {:.2}, D {:.2} -> {}",
            report.v_max_z,
            report.d_max_z,
            control.v_max_z,
            control.d_max_z,
            if control.passed {
                "passed (should fail)"
            } else {
                "fails as required"
            }
        ),
    ))
}

fn rel_err(r: &CLTReport, label: &str) -> f64 {
    let s = stats(r, r.grid.len() - 1, label);
    let (_, _, pred, _) = prediction(r, label);
    (s.var_over_n - pred).abs() / pred
}

fn variance_asymptotics(reports: &[(&str, &CLTReport)]) -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for (name, r) in reports {
        for f in ["one", "x1"] {
            let e = rel_err(r, f);
            ok &= e <= 0.15;
            let s = stats(r, r.grid.len() - 1, f);
            let (_, _, pred, _) = prediction(r, f);
            parts.push(format!(
                "{name}/{f} {:.4} vs {pred:.4} ({:.1}%)",
                s.var_over_n,
                100.0 * e
            ));
        }
    }
    Ok((
        ok,
        format!("n = λ = 2000, R = 1000, tol 15%: {}", parts.join("; ")),
    ))
}

fn gaussianity(r: &CLTReport) -> Outcome {
    let g = r.grid.len();
    let (a, b) = (stats(r, g - 2, "one"), stats(r, g - 1, "one"));
    let change = (b.var_over_n - a.var_over_n).abs() / a.var_over_n;
    // sampling noise of the relative change, for the report only
    let change_se =
        (b.var_over_n / a.var_over_n) * (a.var_se / a.var_over_n).hypot(b.var_se / b.var_over_n);
    let (sk, ek) = (
        b.cumulants.skewness.unwrap(),
        b.cumulants.excess_kurtosis.unwrap(),
    );
    let c = r
        .covariance
        .iter()
        .find(|c| c.f1 == "one" && c.f2 == "cos1")
        .unwrap();
    let joint = c.std_error.hypot(c.predicted_se);
    let cov_ok = (c.empirical - c.predicted).abs() <= 3.0 * joint;
    let ok = change < 0.10 && sk.abs() <= 0.25 && ek.abs() <= 0.5 && cov_ok;
    Ok((
        ok,
        format!(
            "Var/n {:.4} (n = 1000) -> {:.4} (n = 2000): change {:.1}% (< 10%, sampling SE {:.1}%); skewness {sk:.3} (≤ 0.25), \
             excess kurtosis {ek:.3} (≤ 0.5); Cov(1, cos 2πx₁)/n {:.5} vs predicted {:.5} (3 SE = {:.5})",
            a.var_over_n,
            b.var_over_n,
            100.0 * change,
            100.0 * change_se,
            c.empirical,
            c.predicted,
            3.0 * joint
        ),
    ))
}

fn mean_lln() -> Outcome {
    let one = vec![TestFunction::one()];
    let counting = run_clt_experiment(&experiment(
        WeightFunctional::Counting,
        "linear",
        2,
        InputGrid::Binomial { ns: vec![2000] },
        one.clone(),
        901,
    ))?;
    let directed = WeightFunctional::KnnEdge {
        k: 1,
        directed: true,
        phi: EdgeWeight::length(),
    };
    let nn1 = run_clt_experiment(&experiment(
        directed,
        "linear",
        1,
        InputGrid::Binomial { ns: vec![2000] },
        one,
        902,
    ))?;
    let check = |r: &CLTReport| {
        let s = stats(r, 0, "one");
        let (pred, pred_se, _, _) = prediction(r, "one");
        let joint = s.mean_se.hypot(pred_se);
        let diff = (s.mean_over_n - pred).abs();
        (diff <= 3.0 * joint + 1e-12, s.mean_over_n, pred, joint)
    };
    let (c_ok, c_emp, c_pred, _) = check(&counting);
    let (n_ok, n_emp, n_pred, n_se) = check(&nn1);
    // exact E ξ(0; P_τ) = 1/(2τ), so the limit is ∫ κ/(2κ) = 1/2 for any κ
    let table = &nn1.table.mean_values[0];
    let exact_ok = (table.value - 0.5).abs() <= 3.0 * table.std_error;
    let emp_ok = (n_emp - 0.5).abs() <= 3.0 * stats(&nn1, 0, "one").mean_se;
    Ok((
        c_ok && n_ok && exact_ok && emp_ok,
        format!(
            "n = 2000: counting mean/n {c_emp} vs {c_pred}; directed NN (d = 1) mean/n {n_emp:.5} vs predicted \
             {n_pred:.5} (3 joint SE {:.5}); table E ξ(0; P_1) {:.5} ± {:.5} vs exact 0.5",
            3.0 * n_se,
            table.value,
            table.std_error
        ),
    ))
}

fn stabilization_tails() -> Result<((bool, String), f64), geoprob::Error> {
    let grid: Vec<f64> = (1..=48).map(|i| 0.25 * i as f64).collect();
    let mut ok = true;
    let mut parts = vec![];
    let mut nn_reach = f64::NAN;
    let models = [
        ("NN", nn()),
        (
            "SIG",
            WeightFunctional::SigEdge {
                phi: EdgeWeight::length(),
            },
        ),
        ("RSA", WeightFunctional::Rsa { ball_volume: 1.0 }),
    ];
    for (i, (name, xi)) in models.into_iter().enumerate() {
        let tail = estimate_stab_tail(
            &xi,
            1.0,
            &grid,
            16,
            &McConfig::new(2, 1000, 1001 + i as u64),
        )?;
        let rate = tail.fitted_rate.unwrap_or(f64::NAN);
        let onset = tail.fitted_onset.unwrap_or(f64::NAN);
        let decayed = tail.below_after_scales(5.0, 0.05) == Some(true);
        ok &= tail.is_nonincreasing() && rate > 0.0 && decayed;
        if name == "NN" {
            nn_reach = onset + 5.0 / rate;
        }
        parts.push(format!(
            "{name}: nonincreasing {}, rate {rate:.3}, r̂ < 0.05 beyond t = {:.2}: {decayed}",
            tail.is_nonincreasing(),
            onset + 5.0 / rate
        ));
    }
    Ok((
        (ok, format!("τ = 1, d = 2, R = 1000: {}", parts.join("; "))),
        nn_reach,
    ))
}

fn germ_grain_tiling() -> Outcome {
    let w = Window::unit_cube(2);
    let law = MarkLaw::radii(RadiusLaw::Uniform { lo: 0.05, hi: 0.25 });
    let mut worst = 0.0f64;
    for r in 0..5u64 {
        let mut rng = RngStream::new(1101, r).rng();
        let x = attach_marks(&uniform_points(20, 2, &mut rng), &law, &mut rng)?;
        let total: f64 = (0..x.len())
            .map(|i| germ_grain_volume(&x, i, Some(&w)))
            .sum::<Result<f64, _>>()?;
        let grains: Vec<(Point, f64)> = (0..x.len())
            .map(|i| (*x.point(i), x.mark(i).unwrap().radius.unwrap()))
            .collect();
        let area = hit_or_miss_union_area(&grains, &w, 2_000_000, &mut rng);
        worst = worst.max((total - area).abs() / area);
    }
    Ok((
        worst <= 0.01,
        format!(
            "5 configurations of 20 grains: worst |Σ L − hit-or-miss| / area = {:.3}% (tol 1%)",
            100.0 * worst
        ),
    ))
}

fn pair_correlation_decay(nn_reach: f64) -> Outcome {
    let lambda: f64 = 500.0;
    let x = Point::new(&[0.3, 0.5])?;
    let y = Point::new(&[0.7, 0.5])?;
    let separation = lambda.sqrt() * x.dist(&y);
    let kappa = DensityField::by_name("uniform", 2)?;
    let c =
        estimate_pair_correlation(&nn(), &kappa, lambda, &x, &y, &McConfig::new(2, 2000, 1201))?;
    let far = separation > nn_reach;
    Ok((
        far && c.value.abs() <= 3.0 * c.std_error,
        format!(
            "λ = 500, λ^(1/2)|x − y| = {separation:.2} (> {nn_reach:.2}, 5 fitted scales past onset): ĉ = {:.2e} ± {:.2e}",
            c.value, c.std_error
        ),
    ))
}

fn cli(args: &[&str]) -> i32 {
    geoprob::cli::run(std::iter::once("geoprob").chain(args.iter().copied()))
}

fn files_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .map(|d| d.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    v.retain(|p| !p.to_string_lossy().ends_with("manifest.json"));
    v.sort();
    v
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir()?;
    let root = tmp.path();
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    let cfg = ExperimentConfig {
        replications: 100,
        table: TablePlan {
            reps: Some(200),
            half_width: Some(6.0),
            ..TablePlan::default()
        },
        ..experiment(
            nn(),
            "linear",
            2,
            InputGrid::Binomial { ns: vec![100, 200] },
            vec![TestFunction::one(), TestFunction::cos_x1()],
            1301,
        )
    };
    std::fs::write(root.join("cfg.json"), serde_json::to_string_pretty(&cfg)?)?;
    let runs: [(Vec<String>, String); 4] = [
        (
            vec![
                "generate",
                "--process",
                "poisson",
                "--lambda",
                "300",
                "--density",
                "gaussian",
                "--marks",
                "times",
            ]
            .into_iter()
            .map(String::from)
            .chain(["-o".into(), p("a/gen/pts.csv")])
            .collect(),
            p("a/gen/pts.csv.manifest.json"),
        ),
        (
            vec![
                "evaluate".into(),
                "--input".into(),
                p("a/gen/pts.csv"),
                "--functional".into(),
                "rsa".into(),
                "--ball-volume".into(),
                "1".into(),
                "--lambda".into(),
                "300".into(),
                "--f".into(),
                "one,x2".into(),
                "--out".into(),
                p("a/eval"),
            ],
            p("a/eval/manifest.json"),
        ),
        (
            [
                "estimate",
                "--functional",
                "knn-len",
                "--tau",
                "0.5,2",
                "--reps",
                "200",
                "--gamma",
                "1",
                "--half-width",
                "6",
            ]
            .into_iter()
            .map(String::from)
            .chain(["--out".into(), p("a/est")])
            .collect(),
            p("a/est/manifest.json"),
        ),
        (
            vec![
                "verify".into(),
                "--config".into(),
                p("cfg.json"),
                "--out".into(),
                p("a/ver"),
            ],
            p("a/ver/manifest.json"),
        ),
    ];
    let mut compared = 0;
    let mut differing = vec![];
    for (args, manifest) in &runs {
        let mut a: Vec<&str> = vec!["--workers", "1"];
        a.extend(args.iter().map(String::as_str));
        let code = cli(&a);
        if code > 1 {
            return Ok((false, format!("`{}` exited with {code}", args.join(" "))));
        }
        let original = Path::new(manifest).parent().unwrap().to_path_buf();
        for workers in ["2", "3"] {
            let out = root
                .join(format!("w{workers}"))
                .join(original.file_name().unwrap());
            let code = cli(&[
                "--workers",
                workers,
                "replay",
                manifest,
                "--out",
                &out.to_string_lossy(),
            ]);
            if code > 1 {
                return Ok((false, format!("replay of {manifest} exited with {code}")));
            }
            let (mine, theirs) = (files_in(&original), files_in(&out));
            if mine.len() != theirs.len() || mine.is_empty() {
                differing.push(format!("{} file lists", original.display()));
                continue;
            }
            for (f, g) in mine.iter().zip(&theirs) {
                compared += 1;
                if std::fs::read(f)? != std::fs::read(g)? {
                    differing.push(f.file_name().unwrap().to_string_lossy().into_owned());
                }
            }
        }
    }
    Ok((
        differing.is_empty(),
        format!(
            "generate/evaluate/estimate/verify replayed with 2 and 3 workers: {compared} files compared, {} differ {:?}",
            differing.len(),
            differing
        ),
    ))
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, bool)> = vec![];
    let mut report = |id: usize, name: &'static str, outcome: Outcome| {
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        println!(
            "[{}] {id:>2}. {name}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        results.push((id, name, ok));
    };

    report(1, "oracle equivalence", oracle_equivalence());
    report(2, "Delaunay/Voronoi soundness", delaunay_voronoi());
    report(3, "degenerate counting functional", counting_degenerate());
    report(4, "RSA analytic check", rsa_two_intervals());
    report(5, "birth-growth reduction", birth_growth_reduction());

    let half_width = default_half_width(&nn(), 2, 600).unwrap_or(7.0);
    report(6, "homogeneity scaling", homogeneity_scaling(half_width));

    let table = VDTable::estimate(
        &nn(),
        &TableSettings {
            tau_grid: vec![1.0],
            half_width,
            v_method: VMethod::CovarianceIdentity,
            reps: 20_000,
        },
        &McConfig::new(2, 20_000, 700),
    );
    let fs = || vec![TestFunction::one(), TestFunction::x1()];
    let runs = table.and_then(|t| {
        let mut three = fs();
        three.push(TestFunction::cos_x1());
        let grid = run_clt_with_table(
            &experiment(
                nn(),
                "uniform",
                2,
                InputGrid::Binomial {
                    ns: vec![250, 500, 1000, 2000],
                },
                three,
                701,
            ),
            t.clone(),
        )?;
        let bin_lin = run_clt_with_table(
            &experiment(
                nn(),
                "linear",
                2,
                InputGrid::Binomial { ns: vec![2000] },
                fs(),
                702,
            ),
            t.clone(),
        )?;
        let poi_uni = run_clt_with_table(
            &experiment(
                nn(),
                "uniform",
                2,
                InputGrid::Poisson {
                    lambdas: vec![2000.0],
                },
                fs(),
                703,
            ),
            t.clone(),
        )?;
        let poi_lin = run_clt_with_table(
            &experiment(
                nn(),
                "linear",
                2,
                InputGrid::Poisson {
                    lambdas: vec![2000.0],
                },
                fs(),
                704,
            ),
            t,
        )?;
        Ok((grid, bin_lin, poi_uni, poi_lin))
    });
    match &runs {
        Ok((grid, bin_lin, poi_uni, poi_lin)) => {
            report(
                7,
                "variance asymptotics",
                variance_asymptotics(&[
                    ("binomial uniform", grid),
                    ("binomial linear", bin_lin),
                    ("Poisson uniform", poi_uni),
                    ("Poisson linear", poi_lin),
                ]),
            );
            report(8, "Gaussianity", gaussianity(grid));
        }
        Err(e) => {
            report(
                7,
                "variance asymptotics",
                Err(geoprob::Error::Parameter(e.to_string())),
            );
            report(
                8,
                "Gaussianity",
                Err(geoprob::Error::Parameter(e.to_string())),
            );
        }
    }

    report(9, "mean LLN", mean_lln());
    let (tails, nn_reach) = match stabilization_tails() {
        Ok((o, reach)) => (Ok(o), reach),
        Err(e) => (Err(e), f64::INFINITY),
    };
    report(10, "stabilization tails", tails);
    report(11, "germ-grain tiling identity", germ_grain_tiling());
    report(
        12,
        "pair-correlation decay",
        pair_correlation_decay(nn_reach),
    );
    report(13, "reproducibility", reproducibility());

    let failed: Vec<usize> = results.iter().filter(|r| !r.2).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.0} s{}",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {failed:?}")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
