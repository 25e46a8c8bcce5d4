//! Acceptance criteria 1–11, one line each. Runs as a plain binary so the
//! lines always reach the test log.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use shocklab_core::ansatz::{
    shift_formula, solve_shift_ode, viscosity_rate_study, AnsatzContext, InitialShape,
    ShiftOptions,
};
use shocklab_core::cauchy::{
    ansatz_on_line, distance_to_shifted_profile, make_initial, make_riemann_initial, measure_shift, oleinik_max,
    LineGrid, LineRun, LineSettings, BOUNDARY_MARGIN,
};
use shocklab_core::hopf::{coincidence_check, coincidence_time, hopf_eval, HopfData, HopfInitial};
use shocklab_core::numerics::fit::fit_line;
use shocklab_core::periodic::{fit_decay, Norm, PeriodicSettings};
use shocklab_core::rarefaction::{rarefaction_gap, RarefactionWave};
use shocklab_core::{
    compute_profile, evolve_periodic, ExcessOptions, FluxModel, PerturbationSpec, ProfileOptions,
    ProfileTable, StatePair, TimeScheme,
};

type Outcome = anyhow::Result<(bool, String)>;

const TOL: f64 = 1e-14;
const SWEEP: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.025];

fn gap_flux() -> FluxModel {
    FluxModel::gap(50.0, -0.9, 0.9, 0.225).unwrap()
}

fn sine(a: f64) -> PerturbationSpec {
    PerturbationSpec::sine(a, 1.0).unwrap()
}

fn profile(flux: &FluxModel, ul: f64, ur: f64, nu: f64) -> ProfileTable {
    let st = StatePair::new(flux, ul, ur).unwrap();
    compute_profile(flux, st, nu, ProfileOptions::default()).unwrap()
}

/// Burgers (1, −1), ν = 0.5, `w = 0.2 sin(2πx)`, `L = 20`.
fn burgers_run(dx: f64) -> anyhow::Result<(ProfileTable, LineRun)> {
    let f = FluxModel::burgers();
    let prof = profile(&f, 1.0, -1.0, 0.5);
    let w = sine(0.2);
    let setup = make_initial(&prof, &w, &w, LineGrid::new(20.0, dx)?)?;
    let run = LineRun::new(&f, setup, 0.5, &LineSettings::default())?;
    Ok((prof, run))
}

fn burgers_hopf() -> HopfData {
    HopfData::burgers(
        HopfInitial::ProfilePlusPeriodic {
            ul: 1.0,
            ur: -1.0,
            w: sine(0.2),
        },
        0.5,
    )
    .unwrap()
}

fn c1() -> Outcome {
    let (_, mut run) = burgers_run(1.0 / 512.0)?;
    let data = burgers_hopf();
    let mut errs = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        run.advance_to(t)?;
        let v = run.view();
        let mut sup = 0.0f64;
        for i in BOUNDARY_MARGIN..v.grid.len() - BOUNDARY_MARGIN {
            sup = sup.max((v.line[i] - hopf_eval(&data, v.grid.x(i), v.t)?).abs());
        }
        errs.push(sup);
    }
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Ok((
        worst <= 5e-3,
        format!("sup error at t=0.5,1,2: {:.3e} {:.3e} {:.3e} (<= 5e-3)", errs[0], errs[1], errs[2]),
    ))
}

fn c2() -> Outcome {
    let data = burgers_hopf();
    let (prof, mut run) = burgers_run(1.0 / 512.0)?;
    let (mut hopf, mut fd) = (0.0f64, 0.0f64);
    for k in 1..=5 {
        hopf = hopf.max(coincidence_check(&data, k)?);
        let tk = coincidence_time(1.0, -1.0, 1.0, k);
        run.advance_to(tk)?;
        let v = run.view();
        let psi = ansatz_on_line(&v, &prof, prof.states().s * tk);
        for i in BOUNDARY_MARGIN..v.grid.len() - BOUNDARY_MARGIN {
            fd = fd.max((v.line[i] - psi[i]).abs());
        }
    }
    Ok((
        hopf <= 1e-6 && fd <= 5e-3,
        format!("max_k gap: Hopf {hopf:.3e} (<= 1e-6), solver {fd:.3e} (<= 5e-3)"),
    ))
}

fn c3() -> Outcome {
    let (prof, mut run) = burgers_run(1.0 / 512.0)?;
    let ctx = AnsatzContext::new(prof.clone(), TOL)?;
    let w = sine(0.2);
    let rep = shift_formula(&ctx, &InitialShape::Blended, &w, &w, &ExcessOptions::new(1.0 / 128.0))?;
    let mut worst = 0.0f64;
    for k in 1..=5 {
        let tk = coincidence_time(1.0, -1.0, 1.0, k);
        run.advance_to(tk)?;
        worst = worst.max((measure_shift(&run.view(), &prof)? - prof.states().s * tk).abs());
    }
    let x2 = rep.x_inf_2.abs();
    Ok((
        x2 <= 1e-4 && worst <= 2e-3,
        format!(
            "|X_inf_2| = {x2:.3e} (<= 1e-4, quadrature bound {:.3e}), max_k |a(t_k) - s t_k| = {worst:.3e} (<= 2e-3)",
            rep.x_inf_2_err
        ),
    ))
}

fn c4() -> Outcome {
    let f = gap_flux();
    let nu = 0.1;
    let w = sine(0.1);
    let ctx = AnsatzContext::new(profile(&f, 1.0, -1.0, nu), TOL)?;
    let rep = shift_formula(&ctx, &InitialShape::Blended, &w, &w, &ExcessOptions::new(1.0 / 128.0))?;
    // C bounds ∫₀^∞∫₀^p w_r²: the L² energy decays at least like e^{−αt}.
    let settings = PeriodicSettings {
        dx: 1.0 / 128.0,
        scheme: TimeScheme::Imex,
        record_every: 0.01,
        t_max: 400.0,
        stop_below: Some(1e-13),
    };
    let traj = evolve_periodic(&f, &w, -1.0, nu, &settings)?;
    let c0 = traj.records[0].l2_norm.powi(2);
    let alpha = traj
        .records
        .iter()
        .filter(|r| r.t > 0.0 && r.l2_norm.powi(2) > 1e-26)
        .map(|r| -(r.l2_norm.powi(2) / c0).ln() / r.t)
        .fold(f64::INFINITY, f64::min);
    let c = c0 / alpha;
    let bound = c / (2.0 * 50.0);
    let (x2, err) = (rep.x_inf_2, rep.x_inf_2_err);
    let (el, er) = (rep.excess_left.value, rep.excess_right.value * w.period());
    Ok((
        x2 > 10.0 * err && el > er && er <= bound,
        format!(
            "X_inf_2 = {x2:.4e} > 10 x {err:.2e}; left {el:.4e} > right {er:.4e}; right <= C/(2n) = {bound:.4e}"
        ),
    ))
}

fn c5() -> Outcome {
    let (prof, mut run) = burgers_run(1.0 / 512.0)?;
    let ctx = AnsatzContext::new(prof.clone(), TOL)?;
    let w = sine(0.2);
    let x_inf = shift_formula(&ctx, &InitialShape::Blended, &w, &w, &ExcessOptions::new(1.0 / 128.0))?.x_inf;
    let s = prof.states().s;
    let (mut ts, mut ys) = (Vec::new(), Vec::new());
    let mut t = 5.0;
    while t <= 30.0 + 1e-9 {
        run.advance_to(t)?;
        let v = run.view();
        let d = distance_to_shifted_profile(&v, &prof, s * v.t + x_inf);
        ts.push(v.t);
        ys.push(d.ln());
        t += 0.25;
    }
    let fit = fit_line(&ts, &ys).ok_or_else(|| anyhow::anyhow!("degenerate fit"))?;
    let (mu, r2) = (-fit.slope, fit.r_squared);
    Ok((
        mu > 0.0 && r2 >= 0.98,
        format!(
            "mu = {mu:.3e} (> 0), R^2 = {r2:.4} (>= 0.98), distance {:.3e} at t=5, {:.3e} at t=30",
            ys[0].exp(),
            ys.last().unwrap().exp()
        ),
    ))
}

fn c6() -> Outcome {
    let f = gap_flux();
    let nu = 0.1;
    let w = sine(0.1);
    let prof = profile(&f, 1.0, -1.0, nu);
    let ctx = AnsatzContext::new(prof.clone(), TOL)?;
    let x_inf = shift_formula(&ctx, &InitialShape::Blended, &w, &w, &ExcessOptions::new(1.0 / 128.0))?.x_inf;
    let setup = make_initial(&prof, &w, &w, LineGrid::new(40.0, 1.0 / 256.0)?)?;
    let mut run = LineRun::new(&f, setup, nu, &LineSettings::default())?;
    let mut opts = ShiftOptions::new(10.0);
    opts.measure_stride = 0;
    let traj = solve_shift_ode(&ctx, &mut run, &opts)?;
    let last = traj.samples.last().unwrap();
    let gap = (last.x - traj.s * last.t - x_inf).abs();
    let (ok_fit, fit) = match traj.approach {
        Some(a) => (a.rate > 0.0, format!("rate {:.3} (R^2 {:.3})", a.rate, a.r_squared)),
        None => (false, "no approach fit".to_string()),
    };
    Ok((
        gap <= 1e-3 && ok_fit,
        format!("|X(T) - sT - X_inf| = {gap:.3e} (<= 1e-3) at T = {}; approach {fit}", last.t),
    ))
}

fn c7() -> Outcome {
    let w = sine(0.1);
    let study = viscosity_rate_study(&gap_flux(), 1.0, -1.0, &w, &w, &SWEEP, &ExcessOptions::new(1.0 / 128.0))?;
    let d: Vec<String> = study.rows.iter().map(|r| format!("{:.3e}", r.discrepancy)).collect();
    Ok((
        study.monotone && study.meets_order(0.2, 0.05),
        format!(
            "discrepancy at nu={SWEEP:?}: [{}]; decreasing: {}; order {:.4} +/- {:.1e} (>= 0.2 - max(0.05, stderr))",
            d.join(", "),
            study.monotone,
            study.order,
            study.order_stderr
        ),
    ))
}

fn c8() -> Outcome {
    let mut ok = true;
    let (mut r2_min, mut mass, mut over) = (1.0f64, 0.0f64, 0.0f64);
    let mut msgs = Vec::new();
    let cases = [
        ("burgers", FluxModel::burgers(), 1.0, sine(0.2)),
        ("gap", gap_flux(), 1.0, sine(0.1)),
        ("gap", gap_flux(), -1.0, sine(0.1)),
    ];
    for (name, f, ubar, w) in cases {
        let (cmin, _) = f.curvature_range(ubar - w.sup_norm(), ubar + w.sup_norm());
        let bound = w.sup_norm() + 2.0 * w.period() / cmin;
        let mut c_max = 0.0f64;
        for nu in SWEEP {
            let mut settings = PeriodicSettings::new(1.0 / 256.0, 60.0);
            settings.scheme = TimeScheme::Imex;
            settings.stop_below = Some(1e-16);
            let traj = evolve_periodic(&f, &w, ubar, nu, &settings)?;
            for norm in [Norm::Sup, Norm::L2] {
                let fit = fit_decay(&traj.records, norm)?;
                ok &= fit.rate > 0.0 && fit.r_squared >= 0.99;
                r2_min = r2_min.min(fit.r_squared);
            }
            let (lo, hi) = traj.initial.samples.iter().fold((f64::MAX, f64::MIN), |(a, b), &u| (a.min(u), b.max(u)));
            for r in &traj.records {
                mass = mass.max(r.mass_error.abs());
                over = over.max(lo - r.min).max(r.max - hi);
                c_max = c_max.max(r.sup_norm * (1.0 + r.t));
            }
        }
        ok &= c_max <= bound;
        msgs.push(format!("{name} ubar={ubar}: C {c_max:.3e} <= {bound:.3e}"));
    }
    ok &= mass <= 1e-12 && over <= 0.0;
    Ok((
        ok,
        format!(
            "min R^2 {r2_min:.5} (>= 0.99); mass {mass:.2e} (<= 1e-12); overshoot {over:.1e}; {}",
            msgs.join("; ")
        ),
    ))
}

fn c9() -> Outcome {
    let mut burgers_dev = 0.0f64;
    for nu in [0.5, 0.1, 0.025] {
        let p = profile(&FluxModel::burgers(), 1.0, -1.0, nu);
        for s in p.samples() {
            burgers_dev = burgers_dev.max((s.ratio - 0.5 / nu).abs());
        }
    }
    let f = gap_flux();
    let (cmin, cmax) = f.curvature_range(-1.0, 1.0);
    let mut inside = true;
    let mut worst = 0.0f64;
    for nu in SWEEP {
        let p = profile(&f, 1.0, -1.0, nu);
        let (lo, hi) = (cmin / (2.0 * nu), cmax / (2.0 * nu));
        inside &= p.beta1() >= lo * (1.0 - 1e-8) && p.beta2() <= hi * (1.0 + 1e-8);
        worst = worst.max(lo / p.beta1()).max(p.beta2() / hi);
    }
    Ok((
        burgers_dev <= 1e-8 && inside,
        format!(
            "burgers |ratio - 1/(2nu)| = {burgers_dev:.2e} (<= 1e-8); gap flux ratios inside [f''_min, f''_max]/(2nu): {inside} (worst edge ratio {worst:.4})"
        ),
    ))
}

fn c10() -> Outcome {
    let f = FluxModel::burgers();
    let zero = PerturbationSpec::zero(1.0);
    let w = sine(0.2);
    let wave = RarefactionWave::new(&f, -1.0, 1.0)?;
    let grid = LineGrid::new(72.0, 1.0 / 64.0)?;
    let mut series = Vec::new();
    let mut oleinik = f64::NEG_INFINITY;
    for (wl, wr) in [(&w, &w), (&zero, &zero)] {
        let setup = make_riemann_initial(&f, -1.0, 1.0, wl, wr, grid)?;
        let mut run = LineRun::new(&f, setup, 0.1, &LineSettings::default())?;
        let times: Vec<f64> = (1..=50).map(f64::from).collect();
        let s = rarefaction_gap(&mut run, &wave, &times)?;
        oleinik = oleinik.max(s.oleinik_sup());
        series.push(s);
    }
    // The shock scenario is an Oleinik run too.
    let (_, mut run) = burgers_run(1.0 / 256.0)?;
    for t in [0.5, 1.0, 2.0, 5.0] {
        run.advance_to(t)?;
        oleinik = oleinik.max(oleinik_max(&run.view()));
    }
    let s = &series[0];
    let (g10, g50) = (s.at(10.0).unwrap().sup_gap, s.at(50.0).unwrap().sup_gap);
    let e = 1.0; // 1/min f'' for Burgers
    Ok((
        g50 <= 0.05 && g50 <= 0.5 * g10 && oleinik <= 1.02 * e,
        format!(
            "gap(50) = {g50:.4e} (<= 0.05), gap(10) = {g10:.4e} (ratio {:.3} <= 0.5); unperturbed gap(50) = {:.3e}; sup t*u_x = {oleinik:.4} (<= E = 1, 2% grid slack)",
            g50 / g10,
            series[1].at(50.0).unwrap().sup_gap
        ),
    ))
}

fn csv_files(dir: &Path) -> anyhow::Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for kind in fs::read_dir(dir)? {
        let kind = kind?.path();
        if !kind.is_dir() {
            continue;
        }
        for f in fs::read_dir(&kind)? {
            let f = f?.path();
            if f.extension().is_some_and(|e| e == "csv") {
                let rel = f.strip_prefix(dir)?.display().to_string();
                out.push((rel, fs::read(&f)?));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn c11() -> Outcome {
    let a = tempfile::tempdir()?;
    let b = tempfile::tempdir()?;
    shocklab_cli::run_suite(a.path(), 1)?;
    shocklab_cli::run_suite(b.path(), 4)?;
    let (fa, fb) = (csv_files(a.path())?, csv_files(b.path())?);
    let differing: Vec<&str> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let same = fa.len() == fb.len() && differing.is_empty() && !fa.is_empty();
    Ok((
        same,
        format!("{} CSV files compared across two suite runs; differing: {differing:?}", fa.len()),
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, Option<f64>, fn() -> Outcome); 11] = [
        (1, Some(120.0), c1),
        (2, Some(120.0), c2),
        (3, Some(300.0), c3),
        (4, Some(600.0), c4),
        (5, Some(600.0), c5),
        (6, None, c6),
        (7, Some(1800.0), c7),
        (8, None, c8),
        (9, None, c9),
        (10, None, c10),
        (11, None, c11),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, limit, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok((ok, d)) => (ok, d),
            Err(e) => (false, format!("error: {e:#}")),
        };
        let in_time = limit.map_or(true, |l| secs <= l);
        let budget = limit.map_or(String::new(), |l| format!(" / {l:.0}s"));
        let tag = if passed && in_time { "PASS" } else { "FAIL" };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {n:>2}: {tag}  {detail}  [{secs:.1}s{budget}]");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
