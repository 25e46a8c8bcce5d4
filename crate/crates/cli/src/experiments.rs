//! Validation and the experiment runners.

use std::path::Path;

use anyhow::{Context, Result};
use shocklab_core::ansatz::{
    rate_from_rows, shift_formula, solve_shift_ode, AnsatzContext, InitialShape, RateRow,
    ShiftOptions, ShiftReport,
};
use shocklab_core::cauchy::{
    ansatz_on_line, check_rarefaction_domain, check_shock_domain, make_initial,
    make_riemann_initial, LineGrid, LineRun, LineSettings, BOUNDARY_MARGIN,
};
use shocklab_core::hopf::{
    coincidence_check, coincidence_gap_at, coincidence_time, hopf_eval, log_q,
    periodic_component_eval, HopfData, HopfInitial, Side,
};
use shocklab_core::periodic::{fit_decay, Norm, PeriodicSettings};
use shocklab_core::rarefaction::{rarefaction_gap, RarefactionWave};
use shocklab_core::{
    compute_profile, evolve_periodic, ExcessOptions, FluxModel, PerturbationSpec, ProfileOptions,
    ProfileTable, StatePair,
};

use crate::config::{ExperimentKind, FluxSpec, ScenarioConfig};
use crate::map_ordered;
use crate::report::{Check, Report, Table};

/// Tolerance for the profile truncation and the shift quadratures.
const ANSATZ_TOL: f64 = 1e-14;

/// Validated inputs, built before any simulation starts.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cfg: ScenarioConfig,
    pub flux: FluxModel,
    pub wl: PerturbationSpec,
    pub wr: PerturbationSpec,
    pub grid: Option<LineGrid>,
    pub profile: Option<ProfileTable>,
}

/// Checks every precondition of `cfg` and returns all violations at once.
pub fn validate(cfg: &ScenarioConfig) -> std::result::Result<Prepared, Vec<String>> {
    use ExperimentKind::*;
    let mut errs: Vec<String> = Vec::new();
    let kind = cfg.kind;

    if cfg.nus.is_empty() {
        errs.push("nu: at least one viscosity is required".into());
    }
    for &nu in &cfg.nus {
        if !(nu > 0.0 && nu.is_finite()) {
            errs.push(format!("nu: viscosity must be positive, got {nu}"));
        }
    }
    if kind == ViscositySweep {
        if cfg.nus.len() < 4 {
            errs.push(format!(
                "nu: a sweep needs at least four viscosities, got {}",
                cfg.nus.len()
            ));
        } else {
            let hi = cfg.nus.iter().copied().fold(f64::MIN, f64::max);
            let lo = cfg.nus.iter().copied().fold(f64::MAX, f64::min);
            if hi / lo < 10.0 - 1e-9 {
                errs.push("nu: a sweep must span at least one decade".into());
            }
        }
    } else if cfg.nus.len() > 1 && kind != PeriodicDecay {
        errs.push(format!("nu: {kind} takes a single viscosity"));
    }
    let flux = match cfg.flux.build() {
        Ok(f) => Some(f),
        Err(e) => {
            errs.push(format!("flux: {e}"));
            None
        }
    };
    let wl = cfg
        .left
        .build()
        .map_err(|e| errs.push(format!("perturbation.left: {e}")))
        .ok();
    let wr = cfg
        .right
        .build()
        .map_err(|e| errs.push(format!("perturbation.right: {e}")))
        .ok();
    if !(cfg.dx > 0.0) {
        errs.push(format!("grid.dx: must be positive, got {}", cfg.dx));
    }
    if !(cfg.excess_dx > 0.0) {
        errs.push(format!("excess.dx: must be positive, got {}", cfg.excess_dx));
    }
    if !(cfg.horizon > 0.0) {
        errs.push(format!("time.horizon: must be positive, got {}", cfg.horizon));
    }
    if !(cfg.record_every > 0.0 && cfg.record_every <= cfg.horizon) {
        errs.push(format!(
            "time.record_every: must lie in (0, horizon], got {}",
            cfg.record_every
        ));
    }
    let needs_times = matches!(kind, Rarefaction | HopfCheck);
    if needs_times {
        if cfg.times.is_empty() {
            errs.push("time.samples: at least one sample time is required".into());
        }
        if cfg.times.windows(2).any(|w| w[1] <= w[0])
            || cfg.times.iter().any(|&t| t <= 0.0 || t > cfg.horizon + 1e-12)
        {
            errs.push("time.samples: must increase within (0, horizon]".into());
        }
    }
    if kind == BurgersCoincidence && cfg.ks.is_empty() {
        errs.push("coincidence.k: at least one lattice index is required".into());
    }

    let states = flux.as_ref().and_then(|f| match StatePair::new(f, cfg.ul, cfg.ur) {
        Ok(s) => Some(s),
        Err(e) => {
            errs.push(format!("states: {e}"));
            None
        }
    });
    if let Some(st) = states {
        let r = if kind == Rarefaction {
            st.require_rarefaction()
        } else if kind == PeriodicDecay {
            Ok(())
        } else {
            st.require_shock()
        };
        if let Err(e) = r {
            errs.push(format!("states: {e}"));
        }
    }
    if let (Some(f), Some(wl), Some(wr)) = (&flux, &wl, &wr) {
        for (side, ubar, w) in [("left", cfg.ul, wl), ("right", cfg.ur, wr)] {
            for u in [ubar - w.sup_norm(), ubar + w.sup_norm()] {
                if let Err(e) = f.check_domain(u) {
                    errs.push(format!("perturbation.{side}: {e}"));
                }
            }
        }
    }
    if matches!(kind, BurgersCoincidence | HopfCheck) {
        if let Some(f) = &flux {
            if !f.is_burgers() {
                errs.push(format!("flux.kind: {kind} needs the Burgers flux"));
            }
        }
    }
    if kind == BurgersCoincidence && cfg.left != cfg.right {
        errs.push("perturbation: the coincidence identity needs identical perturbations".into());
    }
    let line_kind = matches!(kind, ShockShift | BurgersCoincidence | Rarefaction | HopfCheck);
    if let (Some(wl), Some(wr)) = (&wl, &wr) {
        let dxs: &[f64] = match kind {
            Counterexample | ViscositySweep => &[cfg.excess_dx],
            PeriodicDecay => &[cfg.dx],
            Profile => &[],
            _ => &[cfg.dx],
        };
        for &dx in dxs {
            for (side, w) in [("left", wl), ("right", wr)] {
                if let Err(e) = shocklab_core::PeriodicField::from_spec(w, 0.0, dx) {
                    errs.push(format!("grid: {side} perturbation: {e}"));
                }
            }
        }
    }
    let grid = if line_kind {
        match LineGrid::new(cfg.half_width, cfg.dx) {
            Ok(g) => Some(g),
            Err(e) => {
                errs.push(format!("grid.half_width: {e}"));
                None
            }
        }
    } else {
        None
    };

    let shock_profile = !matches!(kind, PeriodicDecay | Rarefaction | ViscositySweep);
    let profile = match (&flux, states, errs.is_empty() && shock_profile) {
        (Some(f), Some(st), true) => {
            match compute_profile(f, st, cfg.nu(), ProfileOptions::default()) {
                Ok(p) => Some(p),
                Err(e) => {
                    errs.push(format!("profile: {e}"));
                    None
                }
            }
        }
        _ => None,
    };
    if errs.is_empty() && line_kind {
        let (f, g, wl, wr) = (flux.as_ref().unwrap(), grid.as_ref().unwrap(), wl.as_ref().unwrap(), wr.as_ref().unwrap());
        let tol = LineSettings::default().boundary_tol;
        let r = if kind == Rarefaction {
            check_rarefaction_domain(f, cfg.ul, cfg.ur, cfg.nu(), g, cfg.horizon, tol)
        } else {
            check_shock_domain(profile.as_ref().unwrap(), wl, wr, g, cfg.horizon, tol)
        };
        if let Err(e) = r {
            errs.push(format!("grid.half_width: {e}"));
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    Ok(Prepared {
        cfg: cfg.clone(),
        flux: flux.unwrap(),
        wl: wl.unwrap(),
        wr: wr.unwrap(),
        grid,
        profile,
    })
}

/// Runs a validated scenario.
pub fn run(p: &Prepared, threads: usize) -> Result<Report> {
    let kind = p.cfg.kind;
    let r = match kind {
        ExperimentKind::Profile => run_profile(p),
        ExperimentKind::PeriodicDecay => run_periodic(p, threads),
        ExperimentKind::ShockShift => run_shock_shift(p),
        ExperimentKind::BurgersCoincidence => run_coincidence(p),
        ExperimentKind::Counterexample => run_counterexample(p),
        ExperimentKind::ViscositySweep => run_sweep(p, threads),
        ExperimentKind::Rarefaction => run_rarefaction(p),
        ExperimentKind::HopfCheck => run_hopf_check(p),
    };
    r.with_context(|| format!("scenario {kind}"))
}

/// Oleinik constant `E = 1/min f''` over the range of the data.
fn oleinik_constant(p: &Prepared) -> f64 {
    let lo = p.cfg.ul.min(p.cfg.ur) - p.wl.sup_norm().max(p.wr.sup_norm());
    let hi = p.cfg.ul.max(p.cfg.ur) + p.wl.sup_norm().max(p.wr.sup_norm());
    1.0 / p.flux.curvature_range(lo, hi).0
}

fn oleinik_check(report: &mut Report, p: &Prepared, sup: f64) {
    let e = oleinik_constant(p);
    report.note("oleinik_sup", sup);
    // Centred differences of a smooth solution overshoot by O(dx²).
    report.check(Check::at_most("oleinik t*u_x bound", sup, e * 1.02));
}

fn report_row(r: &ShiftReport) -> Vec<f64> {
    vec![
        r.nu,
        r.x_inf_1,
        r.x_inf_2,
        r.x_inf,
        r.x_inf_2_inviscid,
        r.err_bound(),
    ]
}

const REPORT_HEADER: [&str; 6] = ["nu", "X_inf_1", "X_inf_2", "X_inf", "X_inf_2_inviscid", "err_bound"];

fn run_profile(p: &Prepared) -> Result<Report> {
    let profile = p.profile.as_ref().unwrap();
    let nu = p.cfg.nu();
    let mut report = Report::new("profile");
    let mut table = Table::new("profile.csv", &["x", "phi", "g", "gprime", "ratio"]);
    for s in profile.samples() {
        table.push(vec![s.x, s.phi, s.g, s.gp, s.ratio]);
    }
    report.tables.push(table);
    let (b1, b2) = (profile.beta1(), profile.beta2());
    let (cmin, cmax) = p.flux.curvature_range(p.cfg.ur, p.cfg.ul);
    let (lo, hi) = (cmin / (2.0 * nu), cmax / (2.0 * nu));
    report.note("beta1", b1);
    report.note("beta2", b2);
    report.check(Check::flag(
        "ratio window",
        b1 >= lo * (1.0 - 1e-8) && b2 <= hi * (1.0 + 1e-8),
        format!("[{b1:.6e}, {b2:.6e}] within [{lo:.6e}, {hi:.6e}]"),
    ));
    if p.flux.is_burgers() {
        let dev = (b1 - 0.5 / nu).abs().max((b2 - 0.5 / nu).abs());
        report.check(Check::at_most("burgers ratio equals 1/(2 nu)", dev, 1e-8));
    }
    Ok(report)
}

fn run_periodic(p: &Prepared, threads: usize) -> Result<Report> {
    let cfg = &p.cfg;
    let mut report = Report::new("periodic-decay");
    let runs = map_ordered(&cfg.nus, threads, |&nu| {
        let settings = PeriodicSettings {
            dx: cfg.dx,
            scheme: cfg.scheme,
            record_every: cfg.record_every,
            t_max: cfg.horizon,
            stop_below: Some(1e-16),
        };
        evolve_periodic(&p.flux, &p.wl, cfg.ul, nu, &settings)
    });
    let w_sup = p.wl.sup_norm();
    let e = 1.0 / p.flux.curvature_range(cfg.ul - w_sup, cfg.ul + w_sup).0;
    let c_bound = w_sup + 2.0 * p.wl.period() * e;
    let mut c_max = 0.0f64;
    for (&nu, run) in cfg.nus.iter().zip(runs) {
        let traj = run?;
        let tag = format!("nu={nu}");
        let name = if cfg.nus.len() == 1 {
            "periodic.csv".to_string()
        } else {
            format!("periodic_nu{nu}.csv")
        };
        let mut table = Table::new(name, &["t", "sup_norm", "l2_norm", "flux_excess_cum"]);
        for r in &traj.records {
            table.push(vec![r.t, r.sup_norm, r.l2_norm, r.flux_excess_cum]);
        }
        report.tables.push(table);
        for norm in [Norm::Sup, Norm::L2] {
            let label = if norm == Norm::Sup { "sup" } else { "l2" };
            let fit = fit_decay(&traj.records, norm)?;
            if fit.degenerate {
                report.warnings.push(format!("{tag}: zero perturbation, decay fit skipped"));
                continue;
            }
            report.note(&format!("{tag} {label} decay rate"), fit.rate);
            report.check(Check::above(&format!("{tag} {label} decay rate positive"), fit.rate, 0.0));
            report.check(Check::flag(
                &format!("{tag} {label} decay fit R^2"),
                fit.r_squared >= 0.99,
                format!("{:.6} >= 0.99 on [{:.2}, {:.2}]", fit.r_squared, fit.window.0, fit.window.1),
            ));
        }
        let mass = traj.records.iter().map(|r| r.mass_error.abs()).fold(0.0, f64::max);
        report.check(Check::at_most(&format!("{tag} mass error"), mass, 1e-12));
        let (lo0, hi0) = traj.initial.samples.iter().fold((f64::MAX, f64::MIN), |(a, b), &u| {
            (a.min(u), b.max(u))
        });
        let overshoot = traj
            .records
            .iter()
            .map(|r| (lo0 - r.min).max(r.max - hi0))
            .fold(f64::NEG_INFINITY, f64::max);
        report.check(Check::at_most(
            &format!("{tag} maximum principle overshoot"),
            overshoot.max(0.0),
            1e-13,
        ));
        let c_nu = traj
            .records
            .iter()
            .map(|r| r.sup_norm * (1.0 + r.t))
            .fold(0.0, f64::max);
        report.note(&format!("{tag} sup (1+t)|u-ubar|"), c_nu);
        c_max = c_max.max(c_nu);
    }
    report.check(Check::at_most(
        "uniform C/(1+t) bound across viscosities",
        c_max,
        c_bound,
    ));
    Ok(report)
}

fn identical(p: &Prepared) -> bool {
    p.cfg.left == p.cfg.right
}

fn run_shock_shift(p: &Prepared) -> Result<Report> {
    let cfg = &p.cfg;
    let profile = p.profile.clone().unwrap();
    let st = profile.states();
    let ctx = AnsatzContext::new(profile.clone(), ANSATZ_TOL)?;
    let mut report = Report::new("shock-shift");
    let formula = shift_formula(
        &ctx,
        &InitialShape::Blended,
        &p.wl,
        &p.wr,
        &ExcessOptions::new(cfg.excess_dx),
    )?;
    let setup = make_initial(&profile, &p.wl, &p.wr, p.grid.unwrap())?;
    let settings = LineSettings {
        scheme: cfg.scheme,
        cadence: cfg.record_every,
        ..LineSettings::default()
    };
    let mut run = LineRun::new(&p.flux, setup, cfg.nu(), &settings)?;
    let mut opts = ShiftOptions::new(cfg.horizon);
    opts.record_every = cfg.record_every;
    opts.reference_shift = Some(formula.x_inf);
    opts.backward = true;
    let traj = solve_shift_ode(&ctx, &mut run, &opts)?;

    let mut line = Table::new(
        "line.csv",
        &["t", "shift", "shift_minus_st", "sup_dist_profile", "antideriv_sup", "oleinik_max"],
    );
    let mut shift = Table::new("shift.csv", &["t", "shift", "shift_minus_st", "sup_dist"]);
    for s in &traj.samples {
        let a = s.measured.unwrap_or(f64::NAN);
        line.push(vec![
            s.t,
            a,
            a - st.s * s.t,
            s.sup_dist_ref.unwrap_or(f64::NAN),
            s.antideriv_sup,
            s.oleinik_max,
        ]);
        shift.push(vec![s.t, s.x, s.x - st.s * s.t, s.sup_dist]);
    }
    report.tables.push(line);
    report.tables.push(shift);
    let mut rep = Table::new("report.csv", &REPORT_HEADER);
    rep.push(report_row(&formula));
    report.tables.push(rep);

    report.note("T0", traj.t0);
    report.note("X0", traj.x0);
    report.note("X_inf formula", formula.x_inf);
    report.note("X_inf ode", traj.x_inf_estimate);
    let last = *traj.samples.last().context("no samples recorded")?;
    report.check(Check::at_most(
        "|X(T) - sT - X_inf|",
        (last.x - st.s * last.t - formula.x_inf).abs(),
        1e-3,
    ));
    match traj.approach {
        Some(fit) => {
            report.note("approach rate", fit.rate);
            report.check(Check::above("shift approach rate", fit.rate, 0.0));
        }
        None => report.check(Check::flag(
            "shift approach rate",
            true,
            "X(t) - st constant to round-off from T0",
        )),
    }
    if let Some(a) = last.measured {
        let tol = if p.flux.is_burgers() { 1e-2 } else { 5e-2 };
        report.check(Check::at_most(
            "|a(T) - sT - X_inf| (measured vs formula)",
            (a - st.s * last.t - formula.x_inf).abs(),
            tol,
        ));
    }
    let mass = traj.samples.iter().map(|s| s.mass_defect.abs()).fold(0.0, f64::max);
    report.check(Check::at_most("mass selection |int(u - psi_X)|", mass, 1e-8));
    if let Some(b) = &traj.backward {
        report.note("M", b.m);
        report.note("X_hat_0", b.x_hat0);
        report.check(Check::at_most("backward branch identity residual", b.residual.abs(), 1e-6));
    }
    if p.flux.is_burgers() && identical(p) {
        report.check(Check::at_most(
            "|X_inf_2| within quadrature error",
            formula.x_inf_2.abs(),
            formula.x_inf_2_err.max(1e-15),
        ));
        let mut worst = 0.0f64;
        let mut k = 1;
        loop {
            let tk = coincidence_time(st.ul, st.ur, p.wl.period(), k);
            if tk > cfg.horizon + 1e-9 {
                break;
            }
            if let Some(s) = traj.samples.iter().find(|s| (s.t - tk).abs() < 1e-9) {
                if let Some(a) = s.measured {
                    worst = worst.max((a - st.s * tk).abs());
                }
            }
            k += 1;
        }
        report.check(Check::at_most("max |a(t_k) - s t_k|", worst, 2e-3));
    }
    let ol = traj.samples.iter().map(|s| s.oleinik_max).fold(f64::NEG_INFINITY, f64::max);
    oleinik_check(&mut report, p, ol);
    Ok(report)
}

fn run_coincidence(p: &Prepared) -> Result<Report> {
    let cfg = &p.cfg;
    let profile = p.profile.clone().unwrap();
    let st = profile.states();
    let data = HopfData::new(
        &p.flux,
        HopfInitial::ProfilePlusPeriodic {
            ul: cfg.ul,
            ur: cfg.ur,
            w: p.wl.clone(),
        },
        cfg.nu(),
    )?;
    let lambda = data.lambda().unwrap();
    let mut report = Report::new("burgers-coincidence");
    let setup = make_initial(&profile, &p.wl, &p.wr, p.grid.unwrap())?;
    let settings = LineSettings {
        scheme: cfg.scheme,
        cadence: cfg.record_every,
        ..LineSettings::default()
    };
    let mut run = LineRun::new(&p.flux, setup, cfg.nu(), &settings)?;
    let mut ks = cfg.ks.clone();
    ks.sort_unstable();
    let mut table = Table::new("coincidence.csv", &["k", "t", "gap_hopf", "gap_solver"]);
    let (mut worst_hopf, mut worst_fd, mut worst_q) = (0.0f64, 0.0f64, 0.0f64);
    let mut worst_ol = f64::NEG_INFINITY;
    for &k in &ks {
        let tk = coincidence_time(cfg.ul, cfg.ur, p.wl.period(), k);
        let gap_hopf = coincidence_check(&data, k)?;
        for off in [-3.0, -0.7, 0.0, 0.45, 2.5] {
            let x = st.s * tk + off;
            let diff = log_q(&data, Side::Right, x, tk)? - log_q(&data, Side::Left, x, tk)?;
            worst_q = worst_q.max((diff - 2.0 * lambda * (x - st.s * tk)).exp_m1().abs());
        }
        let gap_fd = if tk <= cfg.horizon + 1e-9 {
            run.advance_to(tk)?;
            let v = run.view();
            let psi = ansatz_on_line(&v, &profile, st.s * tk);
            let n = v.grid.len();
            worst_ol = worst_ol.max(shocklab_core::cauchy::oleinik_max(&v));
            (BOUNDARY_MARGIN..n - BOUNDARY_MARGIN)
                .map(|i| (v.line[i] - psi[i]).abs())
                .fold(0.0, f64::max)
        } else {
            f64::NAN
        };
        worst_hopf = worst_hopf.max(gap_hopf);
        if gap_fd.is_finite() {
            worst_fd = worst_fd.max(gap_fd);
        }
        table.push(vec![k as f64, tk, gap_hopf, gap_fd]);
    }
    report.tables.push(table);
    report.check(Check::at_most("max_k coincidence gap (Hopf)", worst_hopf, 1e-6));
    report.check(Check::at_most("max_k coincidence gap (solver)", worst_fd, 5e-3));
    report.check(Check::at_most("Q-ratio identity relative error", worst_q, 1e-8));
    let t_half = 0.5 * coincidence_time(cfg.ul, cfg.ur, p.wl.period(), 1);
    let off = coincidence_gap_at(&data, t_half)?;
    report.check(Check::above("off-lattice gap at t_1/2", off, 10.0 * 1e-6));
    if worst_ol.is_finite() {
        oleinik_check(&mut report, p, worst_ol);
    }
    Ok(report)
}

/// `C = C₀/α` with `∫₀^p w_r² ≤ C₀ e^{−αt}` measured on the right
/// periodic run, so that `∫∫ w_r² ≤ C`.
fn energy_constant(p: &Prepared) -> Result<f64> {
    let cfg = &p.cfg;
    let settings = PeriodicSettings {
        dx: cfg.excess_dx,
        scheme: cfg.scheme,
        record_every: 0.01,
        t_max: 400.0,
        stop_below: Some(1e-13),
    };
    let traj = evolve_periodic(&p.flux, &p.wr, cfg.ur, cfg.nu(), &settings)?;
    let c0 = traj.records[0].l2_norm.powi(2);
    let alpha = traj
        .records
        .iter()
        .filter(|r| r.t > 0.0 && r.l2_norm.powi(2) > 1e-26)
        .map(|r| -(r.l2_norm.powi(2) / c0).ln() / r.t)
        .fold(f64::INFINITY, f64::min);
    Ok(c0 / alpha)
}

fn run_counterexample(p: &Prepared) -> Result<Report> {
    let cfg = &p.cfg;
    let ctx = AnsatzContext::new(p.profile.clone().unwrap(), ANSATZ_TOL)?;
    let mut report = Report::new("counterexample");
    let formula = shift_formula(
        &ctx,
        &InitialShape::Blended,
        &p.wl,
        &p.wr,
        &ExcessOptions::new(cfg.excess_dx),
    )?;
    let mut rep = Table::new("report.csv", &REPORT_HEADER);
    rep.push(report_row(&formula));
    report.tables.push(rep);
    let mut parts = Table::new(
        "excess.csv",
        &["side", "ubar", "excess", "quadrature_err", "tail", "discretization_err", "antideriv_avg"],
    );
    for (side, ubar, e, a) in [
        (0.0, cfg.ul, formula.excess_left, formula.average_left),
        (1.0, cfg.ur, formula.excess_right, formula.average_right),
    ] {
        parts.push(vec![side, ubar, e.value, e.quadrature_err, e.tail, e.discretization_err, a]);
    }
    report.tables.push(parts);

    let err = formula.x_inf_2_err;
    report.note("X_inf_2", formula.x_inf_2);
    report.note("X_inf_2 error bound", err);
    report.check(Check::above("X_inf_2 / (10 x error bound)", formula.x_inf_2, 10.0 * err));
    report.check(Check::above(
        "left excess - right excess",
        formula.excess_left.value - formula.excess_right.value,
        0.0,
    ));
    let c = energy_constant(p)?;
    let w = p.wr.sup_norm();
    let (_, cmax) = p.flux.curvature_range(cfg.ur - w, cfg.ur + w);
    let bound = 0.5 * cmax * c;
    report.note("energy constant C", c);
    if let FluxSpec::Gap { n, .. } = cfg.flux {
        report.note("C/(2n)", c / (2.0 * n));
    }
    report.check(Check::at_most(
        "right excess (per period) <= C max f''/2",
        formula.excess_right.value * p.wr.period(),
        bound,
    ));
    Ok(report)
}

fn run_sweep(p: &Prepared, threads: usize) -> Result<Report> {
    let cfg = &p.cfg;
    let st = StatePair::new(&p.flux, cfg.ul, cfg.ur)?;
    let reports = map_ordered(&cfg.nus, threads, |&nu| -> Result<ShiftReport> {
        let profile = compute_profile(&p.flux, st, nu, ProfileOptions::default())?;
        let ctx = AnsatzContext::new(profile, ANSATZ_TOL)?;
        Ok(shift_formula(
            &ctx,
            &InitialShape::Blended,
            &p.wl,
            &p.wr,
            &ExcessOptions::new(cfg.excess_dx),
        )?)
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = Report::new("viscosity-sweep");
    let mut rep = Table::new("report.csv", &REPORT_HEADER);
    let mut rows = Vec::new();
    for r in &reports {
        rep.push(report_row(r));
        rows.push(RateRow {
            nu: r.nu,
            x_inf_2: r.x_inf_2,
            err_bound: r.x_inf_2_err,
            discrepancy: (r.x_inf_2 - r.x_inf_2_inviscid).abs(),
        });
    }
    report.tables.push(rep);
    let inviscid = reports[0].x_inf_2_inviscid;
    let study = rate_from_rows(rows, inviscid)?;
    let mut rate = Table::new("rate.csv", &["nu", "discrepancy", "log_nu", "log_discrepancy"]);
    for r in &study.rows {
        rate.push(vec![r.nu, r.discrepancy, r.nu.ln(), r.discrepancy.ln()]);
    }
    report.tables.push(rate);
    report.note("X_inf_2 inviscid", inviscid);
    if study.degenerate {
        report.warnings.push("all discrepancies within error bounds: degenerate study".into());
        return Ok(report);
    }
    report.note("fitted order", study.order);
    report.note("order stderr", study.order_stderr);
    report.check(Check::flag(
        "discrepancy decreasing with nu",
        study.monotone,
        format!(
            "discrepancies {:?}",
            study.rows.iter().map(|r| format!("{:.3e}", r.discrepancy)).collect::<Vec<_>>()
        ),
    ));
    let slack = 0.05f64.max(study.order_stderr);
    report.check(Check::flag(
        "fitted order >= 1/5 - uncertainty",
        study.meets_order(0.2, 0.05),
        format!("{:.4} >= {:.4}", study.order, 0.2 - slack),
    ));
    Ok(report)
}

fn run_rarefaction(p: &Prepared) -> Result<Report> {
    let cfg = &p.cfg;
    let wave = RarefactionWave::new(&p.flux, cfg.ul, cfg.ur)?;
    let setup = make_riemann_initial(&p.flux, cfg.ul, cfg.ur, &p.wl, &p.wr, p.grid.unwrap())?;
    let settings = LineSettings {
        scheme: cfg.scheme,
        cadence: cfg.record_every,
        ..LineSettings::default()
    };
    let mut run = LineRun::new(&p.flux, setup, cfg.nu(), &settings)?;
    let series = rarefaction_gap(&mut run, &wave, &cfg.times)?;
    let mut report = Report::new("rarefaction");
    let mut table = Table::new("rarefaction.csv", &["t", "sup_gap"]);
    for s in &series.samples {
        table.push(vec![s.t, s.sup_gap]);
    }
    report.tables.push(table);
    let last = *series.samples.last().unwrap();
    report.note("tail order", series.tail_order);
    report.check(Check::at_most(&format!("gap at t={}", last.t), last.sup_gap, 0.05));
    if let Some(g10) = series.samples.iter().find(|s| (s.t - 10.0).abs() < 1e-9) {
        report.check(Check::at_most(
            "gap(T) / gap(10)",
            last.sup_gap / g10.sup_gap,
            0.5,
        ));
    }
    report.check(Check::flag(
        "gap decreasing over the second half",
        series.decreasing_tail,
        format!("tail order {:.3}", series.tail_order),
    ));
    oleinik_check(&mut report, p, series.oleinik_sup());
    Ok(report)
}

fn run_hopf_check(p: &Prepared) -> Result<Report> {
    let cfg = &p.cfg;
    let profile = p.profile.clone().unwrap();
    let setup = make_initial(&profile, &p.wl, &p.wr, p.grid.unwrap())?;
    let initial = if identical(p) {
        HopfInitial::ProfilePlusPeriodic {
            ul: cfg.ul,
            ur: cfg.ur,
            w: p.wl.clone(),
        }
    } else {
        let g = setup.field.grid;
        HopfInitial::Tabulated {
            x0: g.x(0),
            dx: g.dx,
            values: setup.field.samples.clone(),
        }
    };
    let data = HopfData::new(&p.flux, initial, cfg.nu())?;
    let settings = LineSettings {
        scheme: cfg.scheme,
        cadence: cfg.record_every,
        ..LineSettings::default()
    };
    let mut run = LineRun::new(&p.flux, setup, cfg.nu(), &settings)?;
    let mut report = Report::new("hopf-check");
    let mut worst = 0.0f64;
    let mut worst_side = 0.0f64;
    let mut worst_ol = f64::NEG_INFINITY;
    for &t in &cfg.times {
        run.advance_to(t)?;
        let v = run.view();
        worst_ol = worst_ol.max(shocklab_core::cauchy::oleinik_max(&v));
        let n = v.grid.len();
        let stride = (n / 2048).max(1);
        let mut table = Table::new(format!("hopf_t{t}.csv"), &["x", "u_exact", "u_solver", "abs_err"]);
        let mut sup = 0.0f64;
        for i in (BOUNDARY_MARGIN..n - BOUNDARY_MARGIN).step_by(stride) {
            let x = v.grid.x(i);
            let exact = hopf_eval(&data, x, v.t)?;
            let err = (exact - v.line[i]).abs();
            sup = sup.max(err);
            table.push(vec![x, exact, v.line[i], err]);
        }
        report.tables.push(table);
        report.check(Check::at_most(&format!("sup |u - u_hopf| at t={t}"), sup, 5e-3));
        worst = worst.max(sup);
        if identical(p) {
            let nper = v.left.len();
            for j in (0..nper).step_by((nper / 16).max(1)) {
                let x = (j as f64 + 0.5) * v.grid.dx;
                for (side, trace) in [(Side::Left, v.left), (Side::Right, v.right)] {
                    let e = periodic_component_eval(&data, side, x, v.t)?;
                    worst_side = worst_side.max((e - trace[j]).abs());
                }
            }
        }
    }
    report.note("max sup error", worst);
    if identical(p) {
        report.check(Check::at_most("periodic components vs traces", worst_side, 5e-3));
    }
    oleinik_check(&mut report, p, worst_ol);
    Ok(report)
}

/// Runs `cfg` and writes its outputs into `out`.
pub fn run_and_write(p: &Prepared, out: &Path, threads: usize) -> Result<Report> {
    let mut report = run(p, threads)?;
    report.write(out)?;
    Ok(report)
}
