//! Experiment orchestration: solves, convergence studies, Γ-probes,
//! certificate suites and the cross-module invariant run.

use crate::config::{child_seed, DatasetSpec, ExperimentKind, RunConfig};
use crate::emit::{fmt, write_json, CsvWriter};
use dd_fluids_core::dataset::{
    check_convergence_eq, sample_law, ConstitutiveLaw, MaterialDataSet,
};
use dd_fluids_core::hulls;
use dd_fluids_core::phase::{Dim, Exponents, PhasePoint, TracelessSym};
use dd_fluids_core::solver::{
    functional_value, solve, velocity_rel_l2, ProblemSpec, Regime, SolveReport, SolveStatus,
};
use dd_fluids_core::spectral::io::{export_field_binary, export_field_csv};
use dd_fluids_core::spectral::TorusGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

pub fn run(cfg: &RunConfig) -> anyhow::Result<u8> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("config error: {v}");
        }
        return Ok(1);
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    let started = Instant::now();
    let code = match cfg.experiment {
        ExperimentKind::Solve => run_solve(cfg)?,
        ExperimentKind::DataConvergenceStudy { levels } => run_study(cfg, levels)?,
        ExperimentKind::GammaProbe { levels } => run_gamma(cfg, levels)?,
        ExperimentKind::HullSuite => run_hulls(cfg)?,
        ExperimentKind::VerifyInvariants => run_verify(cfg)?,
    };
    // wall-clock data lives outside run.json so identical configs give
    // byte-identical primary outputs
    write_json(
        &cfg.output_dir.join("timings.json"),
        &serde_json::json!({ "wall_seconds": started.elapsed().as_secs_f64() }),
    )?;
    Ok(code)
}

pub fn build_dataset(cfg: &RunConfig, seed: u64) -> anyhow::Result<MaterialDataSet> {
    let dim = cfg.dim()?;
    let exp = cfg.exponents()?;
    let ds = match &cfg.problem.dataset {
        DatasetSpec::LawSample { law, n_dirs, n_mags, range, noise, noise_mode } => {
            let law = law.build(dim)?;
            sample_law(&law, &exp, *n_dirs, *n_mags, *range, *noise, *noise_mode, seed)?
        }
        DatasetSpec::GraphLattice { law, range, spacing } => {
            MaterialDataSet::graph_lattice(&law.build(dim)?, &exp, *range, *spacing)?
        }
        DatasetSpec::Segment { law, direction, range, spacing } => {
            let law = law.build(dim)?;
            let dir = TracelessSym::from_coords(dim, direction)?;
            let unit = dir.scale(1.0 / dir.norm());
            let steps = (range / spacing).ceil() as i64;
            let points: Vec<PhasePoint> = (-steps..=steps)
                .map(|i| {
                    let eps = unit.scale(i as f64 * spacing);
                    PhasePoint::new(eps, law.stress(&eps))
                })
                .collect::<Result<_, _>>()?;
            MaterialDataSet::from_points(exp, points)?
        }
        DatasetSpec::File { path } => MaterialDataSet::read_csv(path)?,
    };
    Ok(ds)
}

fn build_problem(cfg: &RunConfig, dataset: MaterialDataSet) -> anyhow::Result<ProblemSpec> {
    let grid = cfg.grid()?;
    Ok(ProblemSpec {
        grid,
        exp: cfg.exponents()?,
        dataset,
        force: cfg.problem.force.sample(&grid),
        means: cfg.means()?,
        regime: cfg.problem.regime,
        tol: cfg.problem.tol,
    })
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    config_hash: String,
    experiment: &'static str,
    seed: u64,
    status: SolveStatus,
    iterations: usize,
    final_i: f64,
    final_momentum_residual: f64,
    final_strain_residual: f64,
    warnings: &'a [String],
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::Stalled | SolveStatus::MaxIter => 2,
    }
}

fn emit_trace(cfg: &RunConfig, report: &SolveReport, path: &Path) -> anyhow::Result<()> {
    let mut w = CsvWriter::create(
        path,
        &cfg.hash(),
        &[
            "iter",
            "i_value",
            "assignment_changes",
            "momentum_residual",
            "strain_residual",
            "picard_inner_iters",
            "u_update",
        ],
    )?;
    for (i, r) in report.iterations.iter().enumerate() {
        w.row(&[
            i.to_string(),
            fmt(r.i_value),
            r.assignment_changes.to_string(),
            fmt(r.momentum_residual),
            fmt(r.strain_residual),
            r.picard_inner_iters.to_string(),
            fmt(r.u_update),
        ])?;
    }
    w.finish()
}

fn run_solve(cfg: &RunConfig) -> anyhow::Result<u8> {
    let spec = build_problem(cfg, build_dataset(cfg, child_seed(cfg.seed, 1))?)?;
    let report = solve(&spec)?;
    let last = report.iterations.last();
    write_json(
        &cfg.output_dir.join("run.json"),
        &SolveSummary {
            config_hash: cfg.hash(),
            experiment: "solve",
            seed: cfg.seed,
            status: report.status,
            iterations: report.iterations.len(),
            final_i: report.final_i,
            final_momentum_residual: last.map_or(0.0, |r| r.momentum_residual),
            final_strain_residual: last.map_or(0.0, |r| r.strain_residual),
            warnings: &report.warnings,
        },
    )?;
    if cfg.emit.trace {
        emit_trace(cfg, &report, &cfg.output_dir.join("trace.csv"))?;
    }
    if cfg.emit.fields {
        export_field_csv(
            &report.final_field,
            Some(&report.final_vp),
            &cfg.output_dir.join("fields.csv"),
            &[format!("units=nondimensional-torus, config_hash={}", cfg.hash())],
        )?;
        export_field_binary(
            &report.final_field,
            Some(&report.final_vp),
            &cfg.output_dir.join("fields.bin"),
        )?;
    }
    if cfg.emit.plotdata {
        let dir = cfg.output_dir.join("plotdata");
        std::fs::create_dir_all(&dir)?;
        let mut w =
            CsvWriter::create(&dir.join("trace_long.csv"), &cfg.hash(), &["iter", "metric", "value"])?;
        for (i, r) in report.iterations.iter().enumerate() {
            w.row(&[i.to_string(), "i_value".into(), fmt(r.i_value)])?;
            w.row(&[i.to_string(), "momentum_residual".into(), fmt(r.momentum_residual)])?;
        }
        w.finish()?;
    }
    Ok(status_code(report.status))
}

#[derive(Serialize)]
struct StudyLevel {
    level: usize,
    a_n: f64,
    n_points: usize,
    a_hat: f64,
    b_hat: f64,
    a_hat_pseudo: f64,
    b_hat_pseudo: f64,
}

#[derive(Serialize)]
struct StudyResult {
    config_hash: String,
    experiment: &'static str,
    seed: u64,
    levels: Vec<StudyLevel>,
    /// Least-squares slope of log2 a_hat (resp. b_hat) against the level.
    a_rate: f64,
    b_rate: f64,
}

fn fit_log2_rate(values: &[(f64, f64)]) -> f64 {
    // slope of log2(y) over x by least squares; guarded against zeros
    let pts: Vec<(f64, f64)> =
        values.iter().filter(|(_, y)| *y > 0.0).map(|(x, y)| (*x, y.log2())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Data-convergence study: noise halves per level against a dense
/// noiseless reference of the same law; reports the estimated
/// approximation constants and their fitted decay rates.
fn run_study(cfg: &RunConfig, levels: usize) -> anyhow::Result<u8> {
    let dim = cfg.dim()?;
    let exp = cfg.exponents()?;
    let DatasetSpec::LawSample { law, n_dirs, n_mags, range, noise_mode, .. } =
        &cfg.problem.dataset
    else {
        eprintln!("config error: problem.dataset: a law_sample data set is required for studies");
        return Ok(1);
    };
    let law = law.build(dim)?;
    let d_ref = sample_law(
        &law,
        &exp,
        n_dirs * 4,
        n_mags * 4,
        *range,
        0.0,
        *noise_mode,
        child_seed(cfg.seed, 0),
    )?;
    let mut rows = Vec::new();
    for n in 1..=levels {
        let a_n = 2f64.powi(-(n as i32));
        let growth = 2usize.pow((n as u32).min(4));
        let dn = sample_law(
            &law,
            &exp,
            n_dirs * growth,
            n_mags * growth,
            *range,
            a_n,
            *noise_mode,
            child_seed(cfg.seed, n as u64),
        )?;
        let rep = check_convergence_eq(&dn, &d_ref, range * 0.75, range * 0.75)?;
        rows.push(StudyLevel {
            level: n,
            a_n,
            n_points: dn.len(),
            a_hat: rep.a_hat,
            b_hat: rep.b_hat,
            a_hat_pseudo: rep.a_hat_pseudo,
            b_hat_pseudo: rep.b_hat_pseudo,
        });
    }
    let a_rate = fit_log2_rate(
        &rows.iter().map(|r| (r.level as f64, r.a_hat)).collect::<Vec<_>>(),
    );
    let b_rate = fit_log2_rate(
        &rows.iter().map(|r| (r.level as f64, r.b_hat)).collect::<Vec<_>>(),
    );
    let result = StudyResult {
        config_hash: cfg.hash(),
        experiment: "data_convergence_study",
        seed: cfg.seed,
        levels: rows,
        a_rate,
        b_rate,
    };
    write_json(&cfg.output_dir.join("run.json"), &result)?;
    if cfg.emit.plotdata {
        let dir = cfg.output_dir.join("plotdata");
        std::fs::create_dir_all(&dir)?;
        let mut w = CsvWriter::create(
            &dir.join("convergence.csv"),
            &cfg.hash(),
            &["level", "metric", "value"],
        )?;
        for r in &result.levels {
            w.row(&[r.level.to_string(), "a_hat".into(), fmt(r.a_hat)])?;
            w.row(&[r.level.to_string(), "b_hat".into(), fmt(r.b_hat)])?;
        }
        w.finish()?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct GammaLevel {
    level: usize,
    a_n: f64,
    r_n: f64,
    n_points: usize,
    i_value: Option<f64>,
    u_err_vs_ref: Option<f64>,
    /// L₂ deviation |σ̃ − 2μ(|ε|)ε| of the minimizer from the base law.
    consistency_l2: Option<f64>,
    status: Option<SolveStatus>,
    error: Option<String>,
}

#[derive(Serialize)]
struct GammaResult {
    config_hash: String,
    experiment: &'static str,
    seed: u64,
    reference_i: f64,
    levels: Vec<GammaLevel>,
    i_rate: f64,
}

/// Γ-probe: data sequences D_n with a_n = 2^{−n}, R_n = 2^n·R₀ and
/// growing density; records minimizer functional values and the distance
/// of each minimizer to the dense-noiseless reference solution.
fn run_gamma(cfg: &RunConfig, levels: usize) -> anyhow::Result<u8> {
    let dim = cfg.dim()?;
    let exp = cfg.exponents()?;
    let DatasetSpec::LawSample { law, n_dirs, n_mags, range, noise_mode, .. } =
        &cfg.problem.dataset
    else {
        eprintln!("config error: problem.dataset: a law_sample data set is required for gamma");
        return Ok(1);
    };
    let law = law.build(dim)?;
    if !law.check_monotone(range * 2f64.powi(levels as i32)) {
        eprintln!("config error: problem.dataset.law: gamma probe requires a monotone law");
        return Ok(1);
    }
    // A measurement campaign at two scales per level: a base-range run
    // keeping the fine inner magnitude cutoff R₀·10⁻³, plus an extended
    // run out to R_n = 2^n·R₀. Sampling only at R_n would drag the inner
    // cutoff outward with the range and starve the small-strain region.
    let two_scale = |n_dirs: usize, n_mags: usize, r_n: f64, noise: f64, seed: u64| {
        let inner = sample_law(&law, &exp, n_dirs, n_mags, *range, noise, *noise_mode, seed)?;
        let outer = sample_law(
            &law,
            &exp,
            n_dirs,
            n_mags,
            r_n,
            noise,
            *noise_mode,
            child_seed(seed, 0x5eed),
        )?;
        let mut points = inner.points().to_vec();
        points.extend_from_slice(outer.points());
        MaterialDataSet::from_points(exp, points)
    };

    // level-∞ reference: dense, noiseless, full range
    let d_ref = two_scale(
        n_dirs * 2usize.pow((levels as u32).min(4)),
        n_mags * 2usize.pow((levels as u32).min(5)),
        range * 2f64.powi(levels as i32),
        0.0,
        child_seed(cfg.seed, 0),
    )?;
    let ref_report = solve(&build_problem(cfg, d_ref)?)?;

    let mut rows = Vec::new();
    let mut failed = false;
    for n in 1..=levels {
        let a_n = 2f64.powi(-(n as i32));
        let r_n = range * 2f64.powi(n as i32);
        let dn = two_scale(
            n_dirs * 2usize.pow((n as u32).min(4)),
            n_mags * 2usize.pow((n as u32).min(5)),
            r_n,
            a_n,
            child_seed(cfg.seed, n as u64),
        )?;
        let n_points = dn.len();
        match build_problem(cfg, dn).and_then(|spec| Ok(solve(&spec)?)) {
            Ok(report) => rows.push(GammaLevel {
                level: n,
                a_n,
                r_n,
                n_points,
                i_value: Some(report.final_i),
                u_err_vs_ref: Some(velocity_rel_l2(
                    &report.final_vp.u,
                    &ref_report.final_vp.u,
                    dim.d(),
                )),
                consistency_l2: Some(
                    dd_fluids_core::solver::consistency_check(&report, &law).l2_deviation,
                ),
                status: Some(report.status),
                error: None,
            }),
            Err(e) => {
                failed = true;
                rows.push(GammaLevel {
                    level: n,
                    a_n,
                    r_n,
                    n_points,
                    i_value: None,
                    u_err_vs_ref: None,
                    consistency_l2: None,
                    status: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let i_rate = fit_log2_rate(
        &rows
            .iter()
            .filter_map(|r| r.i_value.map(|v| (r.level as f64, v)))
            .collect::<Vec<_>>(),
    );
    let result = GammaResult {
        config_hash: cfg.hash(),
        experiment: "gamma_probe",
        seed: cfg.seed,
        reference_i: ref_report.final_i,
        levels: rows,
        i_rate,
    };
    write_json(&cfg.output_dir.join("run.json"), &result)?;
    if cfg.emit.plotdata {
        let dir = cfg.output_dir.join("plotdata");
        std::fs::create_dir_all(&dir)?;
        let mut w =
            CsvWriter::create(&dir.join("gamma.csv"), &cfg.hash(), &["level", "metric", "value"])?;
        for r in &result.levels {
            if let Some(i) = r.i_value {
                w.row(&[r.level.to_string(), "i_value".into(), fmt(i)])?;
            }
            if let Some(e) = r.u_err_vs_ref {
                w.row(&[r.level.to_string(), "u_err_vs_ref".into(), fmt(e)])?;
            }
        }
        w.finish()?;
    }
    Ok(if failed { 2 } else { 0 })
}

#[derive(Serialize)]
struct HullSummary {
    config_hash: String,
    experiment: &'static str,
    seed: u64,
    on_set_points: usize,
    on_set_inside: usize,
    off_set_points: usize,
    off_set_certified: usize,
    witness_failures: usize,
}

fn run_hulls(cfg: &RunConfig) -> anyhow::Result<u8> {
    let dim = cfg.dim()?;
    let exp = cfg.exponents()?;
    let law_spec = match &cfg.problem.dataset {
        DatasetSpec::LawSample { law, .. }
        | DatasetSpec::GraphLattice { law, .. }
        | DatasetSpec::Segment { law, .. } => law,
        DatasetSpec::File { .. } => {
            eprintln!("config error: problem.dataset: hull suite needs a law-backed data set");
            return Ok(1);
        }
    };
    let law = law_spec.build(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(cfg.seed, 11));
    let tol = 1e-10;
    let m = dim.y_dim();
    let random_dir = |rng: &mut ChaCha8Rng| -> TracelessSym {
        loop {
            let c: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t = TracelessSym::from_coords(dim, &c).expect("sized");
            if t.norm() > 1e-6 {
                return t.scale(1.0 / t.norm());
            }
        }
    };

    let (mut inside_ok, mut cert_ok, mut failures) = (0usize, 0usize, 0usize);
    let mut certificates = Vec::new();
    let n_on = 2000;
    let n_off = 500;
    let yield_value = law.yield_value();
    for k in 0..n_on {
        let z = if yield_value > 0.0 && k % 5 == 0 {
            let dir = random_dir(&mut rng);
            PhasePoint::new(TracelessSym::zero(dim), dir.scale(rng.gen_range(0.0..yield_value)))?
        } else {
            let eps = random_dir(&mut rng).scale(rng.gen_range(0.0..2.0));
            PhasePoint::new(eps, law.stress(&eps))?
        };
        match hulls::hull_membership(&z, &law, &exp, tol) {
            Ok((true, _)) => inside_ok += 1,
            Ok((false, _)) => {}
            Err(_) => failures += 1,
        }
    }
    for _ in 0..n_off {
        let eps = random_dir(&mut rng).scale(rng.gen_range(0.0..1.5));
        let clean = law.stress(&eps);
        let push = random_dir(&mut rng)
            .scale((0.3 + 0.7 * rng.gen::<f64>()) * (1.0 + clean.norm()));
        let z = PhasePoint::new(eps, clean.add(&push))?;
        match hulls::hull_membership(&z, &law, &exp, tol) {
            Ok((false, Some(cert))) if cert.value > 0.0 => {
                cert_ok += 1;
                if cfg.emit.certificates {
                    certificates.push(serde_json::json!({
                        "z": z,
                        "certificate": cert,
                    }));
                }
            }
            Ok(_) => {}
            Err(_) => failures += 1,
        }
    }
    let summary = HullSummary {
        config_hash: cfg.hash(),
        experiment: "hull_suite",
        seed: cfg.seed,
        on_set_points: n_on,
        on_set_inside: inside_ok,
        off_set_points: n_off,
        off_set_certified: cert_ok,
        witness_failures: failures,
    };
    write_json(&cfg.output_dir.join("run.json"), &summary)?;
    if cfg.emit.certificates {
        write_json(&cfg.output_dir.join("certs.json"), &certificates)?;
    }
    Ok(if inside_ok == n_on && cert_ok == n_off && failures == 0 { 0 } else { 2 })
}

#[derive(Serialize)]
struct VerifyOutcome {
    config_hash: String,
    experiment: &'static str,
    checks: Vec<(String, bool)>,
}

/// Cross-module invariant suite; prints one line per check.
fn run_verify(cfg: &RunConfig) -> anyhow::Result<u8> {
    let mut checks: Vec<(String, bool)> = Vec::new();
    let mut record = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "ok  " } else { "FAIL" });
        checks.push((name.to_string(), ok));
    };

    // phase: orthonormal basis and triangle inequality
    let gram_ok = [Dim::D2, Dim::D3].iter().all(|dim| {
        let basis = dim.y_basis();
        basis.iter().enumerate().all(|(i, a)| {
            basis.iter().enumerate().all(|(j, b)| {
                (a.dot(b) - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-14
            })
        })
    });
    record("phase.gram_identity", gram_ok);

    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(cfg.seed, 21));
    let mut triangle_ok = true;
    for p in [2.0, 3.0] {
        let exp = Exponents::new(p).unwrap();
        for _ in 0..10_000 {
            let mut pts = Vec::new();
            for _ in 0..3 {
                let c: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let s: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
                pts.push(
                    PhasePoint::new(
                        TracelessSym::from_coords(Dim::D2, &c).unwrap(),
                        TracelessSym::from_coords(Dim::D2, &s).unwrap(),
                    )
                    .unwrap(),
                );
            }
            let d = |a: &PhasePoint, b: &PhasePoint| {
                dd_fluids_core::phase::metric_d(a, b, &exp).unwrap()
            };
            if d(&pts[0], &pts[2]) > d(&pts[0], &pts[1]) + d(&pts[1], &pts[2]) + 1e-12 {
                triangle_ok = false;
            }
        }
    }
    record("phase.triangle_inequality", triangle_ok);

    // dataset: accelerated index vs linear scan
    let exp = Exponents::new(3.0).unwrap();
    let law = ConstitutiveLaw::power_law(0.5, 2.0, Dim::D2).unwrap();
    let ds = sample_law(
        &law,
        &exp,
        32,
        16,
        1.5,
        0.05,
        dd_fluids_core::dataset::NoiseMode::Relative,
        child_seed(cfg.seed, 22),
    )?;
    let mut nn_ok = true;
    for _ in 0..500 {
        let c: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let z = PhasePoint::new(
            TracelessSym::from_coords(Dim::D2, &c).unwrap(),
            TracelessSym::from_coords(Dim::D2, &s).unwrap(),
        )
        .unwrap();
        let (i_fast, _, d_fast) = ds.nearest(&z)?;
        let (i_slow, _, d_slow) = ds.nearest_linear(&z)?;
        if i_fast != i_slow || (d_fast - d_slow).abs() > 1e-12 * (1.0 + d_slow) {
            nn_ok = false;
        }
    }
    record("dataset.nearest_matches_linear_scan", nn_ok);

    let self_rep = check_convergence_eq(&ds, &ds, 10.0, 10.0)?;
    record("dataset.self_convergence_zero", self_rep.a_hat == 0.0 && self_rep.b_hat == 0.0);

    // spectral: projection exactness and the Null-Lagrangian identity
    let grid = TorusGrid::new(Dim::D2, 16)?;
    let fft = dd_fluids_core::spectral::Fft::new(&grid);
    let exp2 = Exponents::quadratic();
    let means = (TracelessSym::diag2(0.2), TracelessSym::offdiag2(-0.1));
    let zero_force = vec![[0.0; 3]; grid.num_nodes()];
    let f_spec = dd_fluids_core::spectral::SpectralVec::from_values(&zero_force, &grid, &fft);
    let ctx = dd_fluids_core::solver::ConstraintContext::new(grid, means, f_spec)?;
    let mut targets = dd_fluids_core::solver::Targets::zeros(&grid);
    for flat in 0..grid.num_nodes() {
        let c: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        targets.eps[flat] = TracelessSym::from_coords(Dim::D2, &c).unwrap();
        targets.sig[flat] = TracelessSym::from_coords(Dim::D2, &s).unwrap();
    }
    let step = ctx.global_step(&targets, &exp2, 1e-10)?;
    record(
        "spectral.projection_residuals",
        step.strain_residual <= 1e-10
            && step.momentum_residual <= 1e-10
            && step.divergence_residual <= 1e-10,
    );
    let pairing = step.field.mean_pairing();
    let offset = dd_fluids_core::phase::inner(&means.0, &means.1).unwrap();
    record(
        "spectral.null_lagrangian",
        (pairing - offset).abs() <= 1e-9 * (1.0 + means.0.norm() * means.1.norm()),
    );

    // solver: monotone descent and determinism on a small problem
    let grid8 = TorusGrid::new(Dim::D2, 8)?;
    let law_n = ConstitutiveLaw::newtonian(0.5, Dim::D2).unwrap();
    let build = |seed: u64| -> anyhow::Result<ProblemSpec> {
        Ok(ProblemSpec {
            grid: grid8,
            exp: exp2,
            dataset: sample_law(
                &law_n,
                &exp2,
                16,
                8,
                1.0,
                0.05,
                dd_fluids_core::dataset::NoiseMode::Relative,
                seed,
            )?,
            force: crate::config::ForceSpec::Shear { amplitude: 0.8 }.sample(&grid8),
            means: (TracelessSym::zero(Dim::D2), TracelessSym::zero(Dim::D2)),
            regime: Regime::Inertialess,
            tol: Default::default(),
        })
    };
    let seed = child_seed(cfg.seed, 23);
    let rep1 = solve(&build(seed)?)?;
    let rep2 = solve(&build(seed)?)?;
    let descent_ok = rep1
        .iterations
        .windows(2)
        .all(|w| w[1].i_value <= w[0].i_value + 1e-12 * (1.0 + w[0].i_value));
    record("solver.monotone_descent", descent_ok);
    record(
        "solver.deterministic",
        serde_json::to_string(&rep1)? == serde_json::to_string(&rep2)?
            && rep1.final_field.eps == rep2.final_field.eps,
    );
    let i0 = functional_value(&rep1.final_field, &build(seed)?.dataset)?;
    record("solver.functional_consistent", (i0 - rep1.final_i).abs() <= 1e-12 * (1.0 + i0));

    // hulls: spanning property and the characteristic-cone example
    record("hulls.spanning_d2", hulls::spanning_check(Dim::D2, 8));
    record("hulls.spanning_d3", hulls::spanning_check(Dim::D3, 16));
    record("hulls.single_direction_insufficient", !hulls::spanning_check(Dim::D2, 1));
    let in_cone = matches!(
        hulls::cone_membership(&TracelessSym::offdiag2(1.0), &TracelessSym::diag2(1.0), Dim::D2)?,
        hulls::ConeResult::InCone(_)
    );
    record("hulls.cone_kernel_example", in_cone);

    let all_ok = checks.iter().all(|(_, ok)| *ok);
    write_json(
        &cfg.output_dir.join("run.json"),
        &VerifyOutcome { config_hash: cfg.hash(), experiment: "verify_invariants", checks },
    )?;
    Ok(if all_ok { 0 } else { 1 })
}
