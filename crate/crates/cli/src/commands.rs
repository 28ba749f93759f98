//! The four subcommands. solve/sweep-eps/report share the config loading
//! and artifact layout; verify is a self-contained seeded check battery
//! that never assembles a linear system.

use std::time::Instant;

use normpx_core::field::gradient;
use normpx_core::grid::{BallRegion, Grid};
use normpx_core::manufactured::{linf_error, ManufacturedFamily};
use normpx_core::operator::diffusion_matrix;
use normpx_core::proofkit::{
    exp_transform, normalized_difference_bound, phi_prime, phi_second,
    sample_normalized_difference,
};
use normpx_core::regularity::{
    affine_decay, fit_holder_exponent, holder_exponent_from, imposc_constants,
    lipschitz_proof_constants, morrey_condition, oscillation_decay, weak_harnack_check,
};
use normpx_core::solver::{continuation_in_epsilon, solve_dirichlet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{default_alpha_grid, RunConfig};
use crate::output::{fmt_float, read_solution, solution_rows, OutDir};
use crate::{CliError, RunArgs, VerifyArgs};

/// Convergence and schedule trouble is a solver failure; everything else a
/// solve can return stems from how the problem was posed.
fn classify_solve(e: normpx_core::Error) -> CliError {
    match e {
        normpx_core::Error::NoConvergence { .. } | normpx_core::Error::LinearSolve(_) => {
            CliError::Solver(e)
        }
        other => CliError::config_from(other),
    }
}

struct RunContext {
    cfg: RunConfig,
    grid: Grid,
    out: OutDir,
    started: Instant,
}

fn prepare(args: &RunArgs) -> Result<RunContext, CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let grid = cfg.build_grid(args.grid_n)?;
    let out = OutDir::create(&args.out)?;
    Ok(RunContext {
        cfg,
        grid,
        out,
        started: Instant::now(),
    })
}

pub fn cmd_solve(args: &RunArgs) -> Result<(), CliError> {
    let ctx = prepare(args)?;
    let (problem, exact) = ctx.cfg.build_problem(&ctx.grid)?;
    let opts = ctx.cfg.solve_options()?;
    let report = solve_dirichlet(&problem, &opts).map_err(classify_solve)?;

    let (header, rows) = solution_rows(&ctx.grid, &report.solution, exact.as_ref());
    ctx.out.write_csv("solution.csv", &header, &rows)?;
    ctx.out.write_manifest(
        "solve",
        Some(&ctx.cfg),
        Some(&ctx.grid),
        args.seed,
        ctx.started.elapsed().as_millis(),
        &[
            ("residual_norm", fmt_float(report.residual_norm)),
            ("iterations", report.iterations.to_string()),
            ("converged", report.converged.to_string()),
        ],
    )?;
    if !args.quiet {
        let mut line = format!(
            "solve: n={} dim={} iterations={} residual={:.3e}",
            ctx.grid.points_per_axis(),
            ctx.grid.dim(),
            report.iterations,
            report.residual_norm
        );
        if let Some(ex) = &exact {
            let err = linf_error(&report.solution, ex).map_err(CliError::config_from)?;
            line.push_str(&format!(" error_linf={err:.3e}"));
        }
        println!("{line}");
    }
    Ok(())
}

pub fn cmd_sweep(args: &RunArgs) -> Result<(), CliError> {
    let ctx = prepare(args)?;
    let sweep_cfg = ctx.cfg.sweep.clone().ok_or_else(|| {
        CliError::config("sweep-eps needs a [sweep] table with `epsilons`".into())
    })?;
    let (problem, exact) = ctx.cfg.build_problem(&ctx.grid)?;
    let opts = ctx.cfg.solve_options()?;
    let sweep =
        continuation_in_epsilon(&problem, &sweep_cfg.epsilons, &opts).map_err(classify_solve)?;

    let mut rows = Vec::with_capacity(sweep.epsilons.len());
    for (i, eps) in sweep.epsilons.iter().enumerate() {
        let gap = if i == 0 {
            String::new()
        } else {
            fmt_float(sweep.cauchy_gaps[i - 1])
        };
        let rep = &sweep.reports[i];
        rows.push(vec![
            fmt_float(*eps),
            gap,
            fmt_float(rep.residual_norm),
            rep.iterations.to_string(),
            if rep.converged { "1" } else { "0" }.to_string(),
        ]);
    }
    ctx.out
        .write_csv("sweep.csv", "eps,gap,residual,iterations,converged", &rows)?;
    let last = sweep.solutions.last().expect("non-empty schedule");
    let (header, rows) = solution_rows(&ctx.grid, last, exact.as_ref());
    ctx.out.write_csv("solution.csv", &header, &rows)?;
    let final_report = sweep.reports.last().expect("non-empty schedule");
    ctx.out.write_manifest(
        "sweep-eps",
        Some(&ctx.cfg),
        Some(&ctx.grid),
        args.seed,
        ctx.started.elapsed().as_millis(),
        &[
            ("residual_norm", fmt_float(final_report.residual_norm)),
            ("levels", sweep.epsilons.len().to_string()),
        ],
    )?;
    if !args.quiet {
        println!(
            "sweep-eps: {} levels, final epsilon {:.3e}, final gap {:.3e}",
            sweep.epsilons.len(),
            sweep.epsilons.last().unwrap(),
            sweep.cauchy_gaps.last().copied().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

pub fn cmd_report(args: &RunArgs) -> Result<(), CliError> {
    let ctx = prepare(args)?;
    let rep_cfg = ctx.cfg.report.clone().unwrap_or_default();
    let (problem, exact) = ctx.cfg.build_problem(&ctx.grid)?;

    let u = match &rep_cfg.from_solution {
        Some(path) => read_solution(path, &ctx.grid)?,
        None => {
            let opts = ctx.cfg.solve_options()?;
            let report = solve_dirichlet(&problem, &opts).map_err(classify_solve)?;
            let (header, rows) = solution_rows(&ctx.grid, &report.solution, exact.as_ref());
            ctx.out.write_csv("solution.csv", &header, &rows)?;
            report.solution
        }
    };
    let du = gradient(&u).map_err(CliError::config_from)?;
    let dim = ctx.grid.dim();

    // Pointwise smoothness fit for the solution and its gradient.
    let region =
        BallRegion::centred(dim, rep_cfg.holder_radius).map_err(CliError::config_from)?;
    let alphas = rep_cfg
        .holder_alphas
        .clone()
        .unwrap_or_else(default_alpha_grid);
    let mut holder_rows = Vec::new();
    let mut fitted = Vec::new();
    for (label, fieldref) in [
        ("u", normpx_core::regularity::FieldRef::from(&u)),
        ("grad_u", normpx_core::regularity::FieldRef::from(&du)),
    ] {
        let rep = fit_holder_exponent(fieldref, &region, &alphas).map_err(CliError::config_from)?;
        fitted.push((label, rep.alpha));
        holder_rows.push(vec![
            label.to_string(),
            fmt_float(rep_cfg.holder_radius),
            fmt_float(rep.alpha),
            fmt_float(rep.seminorm),
            fmt_float(rep.fit_residual),
            if rep.degenerate { "1" } else { "0" }.to_string(),
            if rep.subsampled { "1" } else { "0" }.to_string(),
        ]);
    }
    ctx.out.write_csv(
        "holder.csv",
        "field,radius,alpha,seminorm,fit_residual,degenerate,subsampled",
        &holder_rows,
    )?;

    // Oscillation decay toward the configured center, for u and its gradient.
    let center = match &rep_cfg.decay_center {
        Some(c) if c.len() == dim => c.clone(),
        Some(c) => {
            return Err(CliError::config(format!(
                "report.decay_center has {} components on a {dim}-dimensional grid",
                c.len()
            )))
        }
        None => vec![0.0; dim],
    };
    let mut decay_rows = Vec::new();
    for (label, fieldref) in [
        ("u", normpx_core::regularity::FieldRef::from(&u)),
        ("grad_u", normpx_core::regularity::FieldRef::from(&du)),
    ] {
        let rep = oscillation_decay(fieldref, &center, rep_cfg.decay_tau, rep_cfg.decay_depth)
            .map_err(CliError::config_from)?;
        for (i, level) in rep.levels.iter().enumerate() {
            decay_rows.push(vec![
                label.to_string(),
                level.to_string(),
                fmt_float(rep.tau.powi(*level as i32)),
                fmt_float(rep.values[i]),
                fmt_float(rep.fitted_rate),
                fmt_float(rep.fit_residual),
                if rep.truncated { "1" } else { "0" }.to_string(),
            ]);
        }
    }
    ctx.out.write_csv(
        "decay.csv",
        "field,level,radius,value,fitted_rate,fit_residual,truncated",
        &decay_rows,
    )?;

    let affine = affine_decay(&u, &center, rep_cfg.decay_tau, rep_cfg.decay_depth)
        .map_err(CliError::config_from)?;
    let mut affine_rows = Vec::new();
    for (i, level) in affine.levels.iter().enumerate() {
        affine_rows.push(vec![
            level.to_string(),
            fmt_float(affine.tau.powi(*level as i32)),
            fmt_float(affine.values[i]),
            fmt_float(affine.fitted_rate),
            fmt_float(affine.fit_residual),
            if affine.truncated { "1" } else { "0" }.to_string(),
        ]);
    }
    ctx.out.write_csv(
        "affine_decay.csv",
        "level,radius,value,fitted_exponent,fit_residual,truncated",
        &affine_rows,
    )?;

    // Measure-to-pointwise check, only meaningful for nonnegative solutions.
    let interior_min = ctx
        .grid
        .interior_nodes()
        .iter()
        .map(|&n| u.value(n))
        .fold(f64::INFINITY, f64::min);
    let mut harnack_rows = Vec::new();
    if interior_min >= -1e-12 {
        let check = weak_harnack_check(
            &u,
            problem.eq().source(),
            rep_cfg.harnack_tau,
            rep_cfg.harnack_q,
        )
        .map_err(CliError::config_from)?;
        harnack_rows.push(vec![
            fmt_float(check.tau),
            fmt_float(check.qexp),
            fmt_float(check.lhs),
            fmt_float(check.inf_term),
            fmt_float(check.f_term),
            fmt_float(check.fitted_c),
        ]);
    }
    ctx.out.write_csv(
        "harnack.csv",
        "tau,qexp,lhs,inf_term,f_term,fitted_c",
        &harnack_rows,
    )?;

    // Fraction of the directional-smallness budget actually used.
    let direction = match &rep_cfg.morrey_direction {
        Some(d) if d.len() == dim => d.clone(),
        Some(d) => {
            return Err(CliError::config(format!(
                "report.morrey_direction has {} components on a {dim}-dimensional grid",
                d.len()
            )))
        }
        None => {
            let mut e1 = vec![0.0; dim];
            e1[0] = 1.0;
            e1
        }
    };
    let fraction = morrey_condition(&du, &direction, rep_cfg.morrey_eps0)
        .map_err(CliError::config_from)?;
    let mut morrey_header = String::new();
    let mut morrey_row = Vec::with_capacity(dim + 2);
    for (k, dk) in direction.iter().enumerate() {
        morrey_header.push_str(&format!("d{},", k + 1));
        morrey_row.push(fmt_float(*dk));
    }
    morrey_header.push_str("eps0,fraction");
    morrey_row.push(fmt_float(rep_cfg.morrey_eps0));
    morrey_row.push(fmt_float(fraction));
    ctx.out
        .write_csv("morrey.csv", &morrey_header, &[morrey_row])?;

    ctx.out.write_manifest(
        "report",
        Some(&ctx.cfg),
        Some(&ctx.grid),
        args.seed,
        ctx.started.elapsed().as_millis(),
        &[],
    )?;
    if !args.quiet {
        let alpha_u = fitted[0].1;
        let alpha_du = fitted[1].1;
        let harnack_note = if harnack_rows.is_empty() {
            "skipped (solution takes negative values)"
        } else {
            "written"
        };
        println!(
            "report: alpha(u)={alpha_u:.3} alpha(grad u)={alpha_du:.3} morrey_fraction={fraction:.3} harnack {harnack_note}"
        );
    }
    Ok(())
}

const CONSTANTS_REFERENCE: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/data/constants_reference.csv"
));

struct Collector {
    rows: Vec<Vec<String>>,
    failures: u64,
}

impl Collector {
    fn new() -> Collector {
        Collector {
            rows: Vec::new(),
            failures: 0,
        }
    }

    fn record(&mut self, check: &str, cases: u64, failures: u64, detail: String) {
        self.failures += failures;
        self.rows.push(vec![
            check.to_string(),
            cases.to_string(),
            failures.to_string(),
            detail,
        ]);
    }
}

/// Seeded check battery over the closed-form layer: sampled inequalities,
/// derivative ranges, stencil exactness on a quadratic, and the constants
/// calculators against a frozen high-precision table. No linear systems.
pub fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let out = OutDir::create(&args.out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut col = Collector::new();

    // Sampled normalized-difference inequalities, wide magnitude range.
    {
        const SAMPLES: u64 = 40_000;
        let (mut fail_main, mut fail_step, mut fail_gap) = (0u64, 0u64, 0u64);
        let (mut ratio_main, mut ratio_step, mut ratio_gap) = (0f64, 0f64, 0f64);
        for i in 0..SAMPLES {
            let dim = 1 + (i % 4) as usize;
            let checks = sample_normalized_difference(&mut rng, dim);
            if !checks.main.holds {
                fail_main += 1;
            }
            if !checks.step.holds {
                fail_step += 1;
            }
            if !checks.norm_gap.holds {
                fail_gap += 1;
            }
            ratio_main = ratio_main.max(checks.main.lhs / checks.main.rhs);
            ratio_step = ratio_step.max(checks.step.lhs / checks.step.rhs);
            ratio_gap = ratio_gap.max(checks.norm_gap.lhs / checks.norm_gap.rhs);
        }
        col.record(
            "normalized_difference_main",
            SAMPLES,
            fail_main,
            format!("max_lhs_over_rhs={}", fmt_float(ratio_main)),
        );
        col.record(
            "normalized_difference_step",
            SAMPLES,
            fail_step,
            format!("max_lhs_over_rhs={}", fmt_float(ratio_step)),
        );
        col.record(
            "normalized_difference_norm_gap",
            SAMPLES,
            fail_gap,
            format!("max_lhs_over_rhs={}", fmt_float(ratio_gap)),
        );
    }

    // The barrier profile: slope pinned at the far endpoint, slope range,
    // strict concavity on an s-grid.
    {
        let mut max_dev = 0f64;
        let mut failures = 0u64;
        const CASES: u64 = 1000;
        for _ in 0..CASES {
            let gamma = loop {
                let g: f64 = rng.gen_range(1.0..2.0);
                if g > 1.0 {
                    break g;
                }
            };
            let dev = (phi_prime(2.0, gamma).map_err(CliError::config_from)? - 0.75).abs();
            max_dev = max_dev.max(dev);
            if dev > 1e-14 {
                failures += 1;
            }
        }
        col.record(
            "profile_slope_at_two",
            CASES,
            failures,
            format!("max_abs_dev={}", fmt_float(max_dev)),
        );

        let mut range_failures = 0u64;
        let mut concavity_failures = 0u64;
        const GAMMAS: u64 = 200;
        const SPTS: u64 = 500;
        for _ in 0..GAMMAS {
            let gamma = loop {
                let g: f64 = rng.gen_range(1.0..2.0);
                if g > 1.0 {
                    break g;
                }
            };
            for j in 0..SPTS {
                let s = 2.0 * (j + 1) as f64 / SPTS as f64;
                let dp = phi_prime(s, gamma).map_err(CliError::config_from)?;
                if !(0.75 - 1e-12..=1.0 + 1e-12).contains(&dp) {
                    range_failures += 1;
                }
                let ds = phi_second(s, gamma).map_err(CliError::config_from)?;
                if !(ds < 0.0) {
                    concavity_failures += 1;
                }
            }
        }
        col.record(
            "profile_slope_range",
            GAMMAS * SPTS,
            range_failures,
            String::new(),
        );
        col.record(
            "profile_concavity",
            GAMMAS * SPTS,
            concavity_failures,
            String::new(),
        );
    }

    // Exponential flattening transform: pinched between 0 and the gap to the
    // maximum, exactly zero at the maximum.
    {
        const CASES: u64 = 50_000;
        let mut failures = 0u64;
        for _ in 0..CASES {
            let hmax = rng.gen_range(0.0..10.0);
            let h = hmax * rng.gen::<f64>();
            let nu = 10f64.powf(rng.gen_range(-6.0..2.0));
            let v = exp_transform(h, nu, hmax).map_err(CliError::config_from)?;
            let hi = (hmax - h) * (1.0 + 1e-12) + 1e-15;
            if !(-1e-15..=hi).contains(&v) {
                failures += 1;
            }
            let at_top = exp_transform(hmax, nu, hmax).map_err(CliError::config_from)?;
            if at_top != 0.0 {
                failures += 1;
            }
        }
        col.record("exp_transform_bounds", 2 * CASES, failures, String::new());
    }

    // Diffusion matrix: exact symmetry and eigenvalue pinch for random
    // directions, exponents, and regularizations.
    {
        const CASES: u64 = 50_000;
        let mut failures = 0u64;
        let mut worst_excess = 0f64;
        for _ in 0..CASES {
            let d: usize = rng.gen_range(1..=6);
            let p: f64 = rng.gen_range(1.05..4.5);
            let eps = 10f64.powf(rng.gen_range(-3.0..1.0));
            let mut eta = vec![0.0; d];
            for e in eta.iter_mut() {
                *e = rng.gen_range(-2.0..2.0);
            }
            let mut a = vec![0.0; d * d];
            diffusion_matrix(p, &eta, eps, &mut a).map_err(CliError::config_from)?;
            let mut ok = true;
            for i in 0..d {
                for j in 0..i {
                    if a[i * d + j] != a[j * d + i] {
                        ok = false;
                    }
                }
            }
            let mut v = vec![0.0; d];
            let norm = loop {
                for vi in v.iter_mut() {
                    *vi = rng.gen_range(-1.0..1.0);
                }
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n >= 1e-3 {
                    break n;
                }
            };
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            let mut quad = 0.0;
            for i in 0..d {
                for j in 0..d {
                    quad += v[i] * a[i * d + j] * v[j];
                }
            }
            let lo = 1f64.min(p - 1.0);
            let hi = 1f64.max(p - 1.0);
            if quad < lo - 1e-12 || quad > hi + 1e-12 {
                ok = false;
            }
            worst_excess = worst_excess.max(lo - quad).max(quad - hi);
            if !ok {
                failures += 1;
            }
        }
        col.record(
            "diffusion_pinch",
            CASES,
            failures,
            format!("worst_excess={}", fmt_float(worst_excess)),
        );
    }

    // Difference stencils reproduce a quadratic exactly (up to roundoff).
    {
        let grid = Grid::new(2, 17).map_err(CliError::config_from)?;
        let family = ManufacturedFamily::default_quadratic(2);
        let u = family.field(&grid).map_err(CliError::config_from)?;
        let du = gradient(&u).map_err(CliError::config_from)?;
        let mut failures = 0u64;
        let mut cases = 0u64;
        let mut max_err = 0f64;
        let mut x = vec![0.0; 2];
        let mut g = vec![0.0; 2];
        let mut h_exact = vec![0.0; 4];
        for &node in grid.interior_nodes() {
            grid.coords(node, &mut x);
            family.gradient(&x, &mut g);
            family.hessian(&x, &mut h_exact);
            for k in 0..2 {
                let err = (du.component(node, k) - g[k]).abs();
                max_err = max_err.max(err);
                cases += 1;
                if err > 1e-9 {
                    failures += 1;
                }
            }
            let h = normpx_core::field::hessian(&u, node).map_err(CliError::config_from)?;
            for (hv, he) in h.iter().zip(&h_exact) {
                let err = (hv - he).abs();
                max_err = max_err.max(err);
                cases += 1;
                if err > 1e-9 {
                    failures += 1;
                }
            }
        }
        col.record(
            "stencil_quadratic_exactness",
            cases,
            failures,
            format!("max_abs_err={}", fmt_float(max_err)),
        );
    }

    // Constants calculators against the frozen high-precision table.
    {
        let tol = 1e-10;
        let (mut n_imposc, mut n_lips, mut n_alpha) = (0u64, 0u64, 0u64);
        let (mut f_imposc, mut f_lips, mut f_alpha) = (0u64, 0u64, 0u64);
        let mut worst_rel = 0f64;
        let mut rel = |a: f64, b: f64| {
            let r = if a == b {
                0.0
            } else {
                (a - b).abs() / a.abs().max(b.abs())
            };
            worst_rel = worst_rel.max(r);
            r
        };
        for (lineno, line) in CONSTANTS_REFERENCE.lines().skip(1).enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            let bad = || {
                CliError::config(format!(
                    "embedded constants table row {} is malformed",
                    lineno + 2
                ))
            };
            let num = |k: usize| -> Result<f64, CliError> {
                cells.get(k).and_then(|c| c.parse().ok()).ok_or_else(bad)
            };
            match cells[0] {
                "imposc" => {
                    n_imposc += 1;
                    let dim: usize = cells.get(3).and_then(|c| c.parse().ok()).ok_or_else(bad)?;
                    let got = imposc_constants(num(1)?, num(2)?, dim, num(4)?, num(5)?, num(6)?)
                        .map_err(CliError::config_from)?;
                    if rel(got.tau, num(7)?) > tol || rel(got.theta, num(8)?) > tol {
                        f_imposc += 1;
                    }
                }
                "lipschitz" => {
                    n_lips += 1;
                    let got = lipschitz_proof_constants(num(1)?, num(2)?, num(3)?, num(4)?)
                        .map_err(CliError::config_from)?;
                    let outs = [got.gamma, got.kappa0, got.c3, got.r, got.m, got.l_lower];
                    let mut row_ok = true;
                    for (k, o) in outs.iter().enumerate() {
                        if rel(*o, num(7 + k)?) > tol {
                            row_ok = false;
                        }
                    }
                    if !row_ok {
                        f_lips += 1;
                    }
                }
                "alpha" => {
                    n_alpha += 1;
                    let got =
                        holder_exponent_from(num(1)?, num(2)?).map_err(CliError::config_from)?;
                    if rel(got, num(7)?) > tol {
                        f_alpha += 1;
                    }
                }
                other => {
                    return Err(CliError::config(format!(
                        "embedded constants table has unknown kind {other:?}"
                    )))
                }
            }
        }
        let detail = format!("worst_rel_err={}", fmt_float(worst_rel));
        col.record("constants_smallness", n_imposc, f_imposc, detail.clone());
        col.record("constants_growth_lemma", n_lips, f_lips, detail.clone());
        col.record("constants_exponent", n_alpha, f_alpha, detail);
    }

    // Canary: with --negate-canary the expectation on a true inequality is
    // inverted, which must surface as a reported failure and a nonzero exit.
    {
        let v = normalized_difference_bound(&[1.0, 2.0], &[3.0, -1.0], 0.5)
            .map_err(CliError::config_from)?;
        let expected = if args.negate_canary { !v.holds } else { v.holds };
        col.record(
            "canary_inverted_inequality",
            1,
            if expected { 0 } else { 1 },
            format!("negated={}", args.negate_canary),
        );
    }

    let total_checks = col.rows.len();
    let failures = col.failures;
    out.write_csv("verdicts.csv", "check,cases,failures,detail", &col.rows)?;
    out.write_manifest(
        "verify",
        None,
        None,
        args.seed,
        started.elapsed().as_millis(),
        &[("failures", failures.to_string())],
    )?;
    if !args.quiet {
        println!("verify: {total_checks} checks, {failures} failing cases");
    }
    if failures > 0 {
        return Err(CliError::VerifyFailed(failures));
    }
    Ok(())
}
