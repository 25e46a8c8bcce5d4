//! Ansatz `ψ_ξ = u_l·g_ξ + u_r·(1 − g_ξ)`, the shift ODE and the asymptotic
//! shift formulas.

use crate::cauchy::{
    antiderivative_diagnostic, distance_to_shifted_profile, mass_defect, measure_shift,
    oleinik_max, LineRun, LineView,
};
use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::numerics::fit::fit_line;
use crate::numerics::interp::periodic_cubic;
use crate::numerics::quadrature::adaptive_gk15;
use crate::periodic::{
    antiderivative_min, antiderivative_period_average, excess_flux_time_integral, ExcessIntegral,
    ExcessOptions, PeriodicField, PerturbationSpec,
};
use crate::profile::ProfileTable;

/// Profile plus the quadrature truncation used by every ansatz integral.
#[derive(Debug, Clone)]
pub struct AnsatzContext {
    profile: ProfileTable,
    radius: f64,
    tol: f64,
}

impl AnsatzContext {
    /// `tol` bounds the `g'`/`g''` weight dropped outside `|x − ξ| ≤ R`.
    pub fn new(profile: ProfileTable, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(LabError::Invalid(format!("tolerance must lie in (0, 1), got {tol}")));
        }
        let radius = profile.truncation_radius(tol);
        Ok(Self {
            profile,
            radius,
            tol,
        })
    }

    pub fn profile(&self) -> &ProfileTable {
        &self.profile
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn flux(&self) -> &FluxModel {
        self.profile.flux()
    }
}

/// The two periodic solutions at one instant, on a shared cell grid.
#[derive(Debug, Clone)]
pub struct Traces {
    pub left: PeriodicField,
    pub right: PeriodicField,
}

impl Traces {
    pub fn new(left: PeriodicField, right: PeriodicField) -> Result<Self> {
        if (left.dx - right.dx).abs() > 1e-15 * left.dx {
            return Err(LabError::Invalid(format!(
                "periodic traces need a common dx, got {} and {}",
                left.dx, right.dx
            )));
        }
        Ok(Self { left, right })
    }

    pub fn from_view(view: &LineView) -> Self {
        Self {
            left: view.left_field(),
            right: view.right_field(),
        }
    }

    pub fn t(&self) -> f64 {
        self.left.t
    }

    fn dx(&self) -> f64 {
        self.left.dx
    }

    /// Cell indices `j` with centres `(j + ½)dx` inside `|x − ξ| ≤ R`.
    fn window(&self, xi: f64, radius: f64) -> std::ops::RangeInclusive<i64> {
        let dx = self.dx();
        let lo = ((xi - radius) / dx - 0.5).ceil() as i64;
        let hi = ((xi + radius) / dx - 0.5).floor() as i64;
        lo..=hi
    }
}

/// `ψ_ξ(x)` with the periodic fields interpolated at `x`.
pub fn ansatz_eval(ctx: &AnsatzContext, traces: &Traces, xi: f64, x: f64) -> f64 {
    let g = ctx.profile.g(x - xi);
    traces.left.value_at(x) * g + traces.right.value_at(x) * (1.0 - g)
}

/// Source term `h_ξ` of the ansatz equation at `x`, in the form
/// `(f'(ψ) − f'(u_l))∂u_l·g + (f'(ψ) − f'(u_r))∂u_r·(1 − g)
///  − 2ν∂(u_l − u_r)·g' − (u_l − u_r)(ξ' − s + f'(φ) − f'(ψ))·g'`.
pub fn source_eval(ctx: &AnsatzContext, traces: &Traces, xi: f64, xi_dot: f64, x: f64) -> f64 {
    let dl = traces.left.derivative();
    let dr = traces.right.derivative();
    source_with(ctx, traces, &dl, &dr, xi, xi_dot, x)
}

fn source_with(
    ctx: &AnsatzContext,
    traces: &Traces,
    dl: &[f64],
    dr: &[f64],
    xi: f64,
    xi_dot: f64,
    x: f64,
) -> f64 {
    let f = ctx.flux();
    let p = ctx.profile.eval(x - xi);
    let ul = traces.left.value_at(x);
    let ur = traces.right.value_at(x);
    let ulx = periodic_cubic(dl, traces.dx(), x);
    let urx = periodic_cubic(dr, traces.dx(), x);
    source_terms(f, ctx.nu(), ctx.profile.states().s, p, ul, ur, ulx, urx, xi_dot)
}

#[allow(clippy::too_many_arguments)]
fn source_terms(
    f: &FluxModel,
    nu: f64,
    s: f64,
    p: crate::profile::ProfilePoint,
    ul: f64,
    ur: f64,
    ulx: f64,
    urx: f64,
    xi_dot: f64,
) -> f64 {
    let psi = ul * p.g + ur * (1.0 - p.g);
    let dpsi = f.df(psi);
    (dpsi - f.df(ul)) * ulx * p.g + (dpsi - f.df(ur)) * urx * (1.0 - p.g)
        - 2.0 * nu * (ulx - urx) * p.gp
        - (ul - ur) * (xi_dot - s + f.df(p.phi) - dpsi) * p.gp
}

impl AnsatzContext {
    fn nu(&self) -> f64 {
        self.profile.nu()
    }
}

/// Numerator and denominator of `F^ν(ξ, t)`, each split into its exact
/// constant-state part plus the quadrature of the perturbation terms.
fn shift_parts(ctx: &AnsatzContext, traces: &Traces, xi: f64) -> (f64, f64) {
    let f = ctx.flux();
    let st = ctx.profile.states();
    let nu = ctx.nu();
    let (ml, mr) = (traces.left.mean, traces.right.mean);
    let (fl0, fr0) = (f.f(ml), f.f(mr));
    let dx = traces.dx();
    let mut num = 0.0;
    let mut den = 0.0;
    for j in traces.window(xi, ctx.radius) {
        let x = (j as f64 + 0.5) * dx;
        let p = ctx.profile.eval(x - xi);
        let (ul, ur) = (traces.left.at_index(j), traces.right.at_index(j));
        let dw = (ul - ml) - (ur - mr);
        num += nu * dw * p.gpp + ((f.f(ul) - fl0) - (f.f(ur) - fr0)) * p.gp;
        den += dw * p.gp;
    }
    // ∫g' = −1 and ∫g'' = 0 for the constant parts.
    (-(fl0 - fr0) + num * dx, -st.jump() + den * dx)
}

/// `F^ν(ξ, t)`; a non-negative denominator means `t` is before `T₀`.
pub fn shift_rhs(ctx: &AnsatzContext, traces: &Traces, xi: f64) -> Result<f64> {
    let (num, den) = shift_parts(ctx, traces, xi);
    if den >= 0.0 {
        return Err(LabError::NotYetValid { t: traces.t() });
    }
    Ok(num / den)
}

/// `F̂^ν(ξ, t)` with the denominator lowered by `M`.
pub fn shift_rhs_modified(ctx: &AnsatzContext, traces: &Traces, xi: f64, m: f64) -> Result<f64> {
    let (num, den) = shift_parts(ctx, traces, xi);
    if den - m >= 0.0 {
        return Err(LabError::Invalid(format!(
            "M = {m} does not make the denominator negative ({den:e})"
        )));
    }
    Ok(num / (den - m))
}

/// `∫(u_l − u_r)g'_ξ dx`.
pub fn shift_denominator(ctx: &AnsatzContext, traces: &Traces, xi: f64) -> f64 {
    shift_parts(ctx, traces, xi).1
}

/// `sup_x |∫_{−∞}^x h_ξ|` and the full integral, by cell sums over the
/// truncation window.
pub fn source_antiderivative(
    ctx: &AnsatzContext,
    traces: &Traces,
    xi: f64,
    xi_dot: f64,
) -> (f64, f64) {
    let f = ctx.flux();
    let dl = traces.left.derivative();
    let dr = traces.right.derivative();
    let (nl, nr) = (dl.len() as i64, dr.len() as i64);
    let dx = traces.dx();
    let s = ctx.profile.states().s;
    let mut acc = 0.0;
    let mut sup = 0.0f64;
    for j in traces.window(xi, ctx.radius) {
        let x = (j as f64 + 0.5) * dx;
        let p = ctx.profile.eval(x - xi);
        let h = source_terms(
            f,
            ctx.nu(),
            s,
            p,
            traces.left.at_index(j),
            traces.right.at_index(j),
            dl[j.rem_euclid(nl) as usize],
            dr[j.rem_euclid(nr) as usize],
            xi_dot,
        );
        acc += h * dx;
        sup = sup.max(acc.abs());
    }
    (sup, acc)
}

/// Controls for [`solve_shift_ode`].
#[derive(Debug, Clone)]
pub struct ShiftOptions {
    pub horizon: f64,
    /// Sampling interval (rounded to a whole number of ODE steps).
    pub record_every: f64,
    /// Run the bisection shift measurement at every `measure_stride`-th sample
    /// (0 disables it).
    pub measure_stride: usize,
    /// Reference shift for the `sup|u − φ(· − s t − X)|` column.
    pub reference_shift: Option<f64>,
    /// Integrate the `M`-modified branch back to `t = 0`.
    pub backward: bool,
}

impl ShiftOptions {
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            record_every: 0.1,
            measure_stride: 1,
            reference_shift: None,
            backward: false,
        }
    }
}

/// One sample of the shift trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSample {
    pub t: f64,
    /// `X(t)` from the ODE.
    pub x: f64,
    /// Shift from the mass condition on the solver output.
    pub measured: Option<f64>,
    /// `∫(u − ψ_{X(t)})` on the line.
    pub mass_defect: f64,
    /// `sup |u − φ(· − X(t))|`.
    pub sup_dist: f64,
    /// `sup |u − φ(· − s t − X_ref)|` when a reference shift was given.
    pub sup_dist_ref: Option<f64>,
    /// `sup_x |∫_{−L}^x (u − ψ_{X(t)})|`.
    pub antideriv_sup: f64,
    /// `sup_x |∫_{−∞}^x h_{X(t)}|` with `ξ' = F(X(t), t)`.
    pub source_sup: f64,
    pub oleinik_max: f64,
}

/// `M`-modified branch on `[0, T₀]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardBranch {
    pub m: f64,
    pub x_hat0: f64,
    /// `M(X₀ − X̂₀) + ∫(u₀ − ψ_{X̂₀}(·, 0))`.
    pub residual: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Exponential approach `|X(t) − s t − X_∞| ≈ C e^{−rate·t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproachFit {
    pub rate: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTrajectory {
    pub t0: f64,
    pub x0: f64,
    pub s: f64,
    pub samples: Vec<ShiftSample>,
    pub backward: Option<BackwardBranch>,
    /// `X(T) − s T` at the last sample.
    pub x_inf_estimate: f64,
    pub approach: Option<ApproachFit>,
}

impl ShiftTrajectory {
    /// Fits the approach of `X(t) − s t` to `target`, over the samples whose
    /// distance exceeds `floor`; `None` if fewer than three qualify.
    pub fn approach_to(&self, target: f64, floor: f64) -> Option<ApproachFit> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .map(|p| (p.t, (p.x - self.s * p.t - target).abs()))
            .take_while(|&(_, d)| d > floor)
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        let fit = fit_line(&ts, &ys)?;
        Some(ApproachFit {
            rate: -fit.slope,
            prefactor: fit.intercept.exp(),
            r_squared: fit.r_squared,
            window: (ts[0], *ts.last().unwrap()),
        })
    }
}

/// RK4 step of `X' = rhs(X, stage)` with stage states at `t`, `t + h/2`, `t + h`.
fn rk4(x: f64, h: f64, rhs: impl Fn(f64, usize) -> Result<f64>) -> Result<f64> {
    let k1 = rhs(x, 0)?;
    let k2 = rhs(x + 0.5 * h * k1, 1)?;
    let k3 = rhs(x + 0.5 * h * k2, 1)?;
    let k4 = rhs(x + h * k3, 2)?;
    Ok(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Drives `run` (which must start at `t = 0`) to `opts.horizon`: detects
/// `T₀`, fixes `X₀` by the mass condition and integrates `X' = F(X, t)`
/// with RK4 at step `2·dt`, fed by the solver's own periodic traces.
pub fn solve_shift_ode(
    ctx: &AnsatzContext,
    run: &mut LineRun,
    opts: &ShiftOptions,
) -> Result<ShiftTrajectory> {
    solve_shift_ode_observed(ctx, run, opts, |_, _| Ok(()))
}

/// [`solve_shift_ode`] with a callback on the solver state at every sample.
pub fn solve_shift_ode_observed(
    ctx: &AnsatzContext,
    run: &mut LineRun,
    opts: &ShiftOptions,
    mut observe: impl FnMut(&LineView, &ShiftSample) -> Result<()>,
) -> Result<ShiftTrajectory> {
    if run.steps() != 0 {
        return Err(LabError::Invalid("the line run must start at t = 0".into()));
    }
    let profile = ctx.profile();
    let s = profile.states().s;
    let dt = run.dt();
    let h = 2.0 * dt;
    let stride = ((opts.record_every / h).round() as usize).max(1);
    let total = (opts.horizon / h).round() as usize;

    let grid = run.grid();
    let initial_line = run.view().line.to_vec();
    let mut history: Vec<Traces> = Vec::new();
    let keep_history = opts.backward;

    // T₀: first even step with separated traces.
    loop {
        let done = {
            let v = run.view();
            let done = v.separated() && run.steps() % 2 == 0;
            if keep_history && !done {
                history.push(Traces::from_view(&v));
            }
            done
        };
        if done {
            break;
        }
        if run.t() >= opts.horizon {
            return Err(LabError::NotYetValid { t: run.t() });
        }
        run.step()?;
    }
    let t0 = run.t();
    let x0 = measure_shift(&run.view(), profile)?;
    if keep_history {
        history.push(Traces::from_view(&run.view()));
    }

    let backward = if opts.backward {
        Some(backward_branch(
            ctx,
            &history,
            x0,
            h,
            &initial_line,
            &grid,
        )?)
    } else {
        None
    };
    drop(history);

    let mut samples = Vec::new();
    let mut x = x0;
    let mut k = run.steps() / 2;
    let mut recorded = 0usize;
    let mut stage0 = Traces::from_view(&run.view());
    loop {
        if k % stride == 0 {
            let v = run.view();
            let xi_dot = shift_rhs(ctx, &stage0, x)?;
            let measured = if opts.measure_stride > 0 && recorded % opts.measure_stride == 0 {
                Some(measure_shift(&v, profile)?)
            } else {
                None
            };
            let anti = antiderivative_diagnostic(&v, profile, x);
            samples.push(ShiftSample {
                t: v.t,
                x,
                measured,
                mass_defect: mass_defect(&v, profile, x),
                sup_dist: distance_to_shifted_profile(&v, profile, x),
                sup_dist_ref: opts
                    .reference_shift
                    .map(|r| distance_to_shifted_profile(&v, profile, s * v.t + r)),
                antideriv_sup: anti.sup,
                source_sup: source_antiderivative(ctx, &stage0, x, xi_dot).0,
                oleinik_max: oleinik_max(&v),
            });
            observe(&v, samples.last().unwrap())?;
            recorded += 1;
        }
        if k >= total {
            break;
        }
        run.step()?;
        let stage1 = Traces::from_view(&run.view());
        run.step()?;
        let stage2 = Traces::from_view(&run.view());
        let stages = [&stage0, &stage1, &stage2];
        x = rk4(x, h, |xi, i| shift_rhs(ctx, stages[i], xi))?;
        stage0 = stage2;
        k += 1;
    }

    let last = samples.last().copied();
    let x_inf_estimate = last.map(|p| p.x - s * p.t).unwrap_or(x0 - s * t0);
    let mut traj = ShiftTrajectory {
        t0,
        x0,
        s,
        samples,
        backward,
        x_inf_estimate,
        approach: None,
    };
    traj.approach = traj.approach_to(x_inf_estimate, 1e-11);
    Ok(traj)
}

fn backward_branch(
    ctx: &AnsatzContext,
    history: &[Traces],
    x0: f64,
    h: f64,
    initial_line: &[f64],
    grid: &crate::cauchy::LineGrid,
) -> Result<BackwardBranch> {
    let peak = history
        .iter()
        .map(|tr| {
            (0..tr.left.len().max(tr.right.len()) as i64)
                .map(|j| (tr.left.at_index(j) - tr.right.at_index(j)).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let m = 2.0 * peak + 1.0;
    let n = history.len() - 1;
    let mut x = x0;
    let mut samples = vec![(history[n].t(), x)];
    let mut k = n;
    while k >= 2 {
        let stages = [&history[k], &history[k - 1], &history[k - 2]];
        x = rk4(x, -h, |xi, i| shift_rhs_modified(ctx, stages[i], xi, m))?;
        k -= 2;
        samples.push((history[k].t(), x));
    }
    samples.reverse();
    let start = &history[0];
    let view = LineView {
        grid: *grid,
        t: 0.0,
        line: initial_line,
        left: &start.left.samples,
        right: &start.right.samples,
        left_mean: start.left.mean,
        right_mean: start.right.mean,
    };
    let residual = m * (x0 - x) + mass_defect(&view, ctx.profile(), x);
    Ok(BackwardBranch {
        m,
        x_hat0: x,
        residual,
        samples,
    })
}

/// Closed-form asymptotic shift and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftReport {
    pub nu: f64,
    /// `ū_l − ū_r`.
    pub jump: f64,
    pub x_inf_1: f64,
    pub x_inf_2: f64,
    /// `(X_∞,1 + X_∞,2)/(ū_l − ū_r)`.
    pub x_inf: f64,
    pub x_inf_2_inviscid: f64,
    pub excess_left: ExcessIntegral,
    pub excess_right: ExcessIntegral,
    pub average_left: f64,
    pub average_right: f64,
    pub x_inf_1_err: f64,
    pub x_inf_2_err: f64,
}

impl ShiftReport {
    /// Bound on the error of `X_∞`.
    pub fn err_bound(&self) -> f64 {
        (self.x_inf_1_err + self.x_inf_2_err) / self.jump
    }
}

/// How the initial data departs from `φ + w0l·g + w0r·(1 − g)`.
pub enum InitialShape<'a> {
    /// Exactly the blend.
    Blended,
    /// Arbitrary `u₀` whose departure from the blend is supported in
    /// `|x| ≤ support`.
    General {
        u0: &'a dyn Fn(f64) -> f64,
        support: f64,
    },
}

/// `X_∞,1`: the two half-line integrals of `u₀ − φ − w0`.
pub fn localized_shift(
    ctx: &AnsatzContext,
    shape: &InitialShape,
    w0l: &PerturbationSpec,
    w0r: &PerturbationSpec,
) -> (f64, f64) {
    let profile = ctx.profile();
    let reach = ctx.radius();
    let (u0, support): (Box<dyn Fn(f64) -> f64>, f64) = match shape {
        InitialShape::Blended => (
            Box::new(|x: f64| {
                let p = profile.eval(x);
                p.phi + w0l.value(x) * p.g + w0r.value(x) * (1.0 - p.g)
            }),
            0.0,
        ),
        InitialShape::General { u0, support } => (Box::new(|x: f64| u0(x)), *support),
    };
    let left = |x: f64| u0(x) - profile.eval(x).phi - w0l.value(x);
    let right = |x: f64| u0(x) - profile.eval(x).phi - w0r.value(x);
    let end = reach + support;
    let panel = w0l.period().min(w0r.period()).min(1.0);
    let panels = (end / panel).ceil() as usize;
    let mut value = 0.0;
    let mut err = 0.0;
    for k in 0..panels {
        let (a, b) = (k as f64 * panel, ((k + 1) as f64 * panel).min(end));
        let (vl, el) = adaptive_gk15(-b, -a, 1e-16, 1e-13, &left);
        let (vr, er) = adaptive_gk15(a, b, 1e-16, 1e-13, &right);
        value += vl + vr;
        err += el + er;
    }
    // Weight dropped beyond the window.
    let tail = ctx.tol() * (w0l.sup_norm() + w0r.sup_norm() + profile.states().jump());
    (value, err + tail)
}

/// `X_∞,2⁰ = −min ∫₀^x w0l + min ∫₀^x w0r`.
pub fn inviscid_shift(w0l: &PerturbationSpec, w0r: &PerturbationSpec) -> f64 {
    -antiderivative_min(w0l) + antiderivative_min(w0r)
}

/// `X_∞,1`, `X_∞,2` and `X_∞` with error bounds.
pub fn shift_formula(
    ctx: &AnsatzContext,
    shape: &InitialShape,
    w0l: &PerturbationSpec,
    w0r: &PerturbationSpec,
    excess: &ExcessOptions,
) -> Result<ShiftReport> {
    let profile = ctx.profile();
    let st = profile.states();
    let nu = profile.nu();
    let (x1, x1_err) = localized_shift(ctx, shape, w0l, w0r);
    let (x2, parts) = periodic_shift(profile.flux(), st.ul, st.ur, nu, w0l, w0r, excess)?;
    Ok(ShiftReport {
        nu,
        jump: st.jump(),
        x_inf_1: x1,
        x_inf_2: x2,
        x_inf: (x1 + x2) / st.jump(),
        x_inf_2_inviscid: inviscid_shift(w0l, w0r),
        excess_left: parts.0,
        excess_right: parts.1,
        average_left: parts.2,
        average_right: parts.3,
        x_inf_1_err: x1_err,
        x_inf_2_err: parts.0.error_bound() + parts.1.error_bound() + 2e-12,
    })
}

type PeriodicParts = (ExcessIntegral, ExcessIntegral, f64, f64);

/// `X_∞,2 = E_l − A_l − E_r + A_r` from the time-integrated flux excesses
/// `E` and the period averages `A` of the antiderivatives.
pub fn periodic_shift(
    flux: &FluxModel,
    ul: f64,
    ur: f64,
    nu: f64,
    w0l: &PerturbationSpec,
    w0r: &PerturbationSpec,
    excess: &ExcessOptions,
) -> Result<(f64, PeriodicParts)> {
    let el = excess_flux_time_integral(flux, w0l, ul, nu, excess)?;
    let er = excess_flux_time_integral(flux, w0r, ur, nu, excess)?;
    let al = antiderivative_period_average(w0l);
    let ar = antiderivative_period_average(w0r);
    Ok((el.value - al - er.value + ar, (el, er, al, ar)))
}

/// One row of the viscosity study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub nu: f64,
    pub x_inf_2: f64,
    pub err_bound: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudy {
    pub rows: Vec<RateRow>,
    pub inviscid: f64,
    /// Slope of `ln|X_∞,2^ν − X_∞,2⁰|` against `ln ν`.
    pub order: f64,
    pub order_stderr: f64,
    pub r_squared: f64,
    /// Discrepancy decreases as `ν` decreases.
    pub monotone: bool,
    /// All discrepancies are within their error bounds of zero.
    pub degenerate: bool,
}

impl RateStudy {
    /// Whether the fitted order reaches `1/5` up to the fit uncertainty.
    pub fn meets_order(&self, target: f64, slack: f64) -> bool {
        !self.degenerate && self.order >= target - slack.max(self.order_stderr)
    }
}

/// Fits the vanishing-viscosity order of `X_∞,2^ν` from rows already
/// computed for each `ν`.
pub fn rate_from_rows(mut rows: Vec<RateRow>, inviscid: f64) -> Result<RateStudy> {
    if rows.len() < 4 {
        return Err(LabError::Arity(format!(
            "a rate study needs at least four viscosities, got {}",
            rows.len()
        )));
    }
    rows.sort_by(|a, b| b.nu.partial_cmp(&a.nu).unwrap());
    let span = rows[0].nu / rows[rows.len() - 1].nu;
    if span < 10.0 - 1e-9 {
        return Err(LabError::Arity(format!(
            "viscosities must span a decade, got a ratio of {span}"
        )));
    }
    let degenerate = rows.iter().all(|r| r.discrepancy <= r.err_bound);
    let monotone = rows.windows(2).all(|w| w[1].discrepancy < w[0].discrepancy);
    if degenerate {
        return Ok(RateStudy {
            rows,
            inviscid,
            order: f64::NAN,
            order_stderr: f64::NAN,
            r_squared: f64::NAN,
            monotone,
            degenerate,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.nu.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.discrepancy.max(f64::MIN_POSITIVE).ln()).collect();
    let fit = fit_line(&lx, &ly)
        .ok_or_else(|| LabError::Invalid("rate fit needs distinct viscosities".into()))?;
    Ok(RateStudy {
        rows,
        inviscid,
        order: fit.slope,
        order_stderr: fit.slope_stderr,
        r_squared: fit.r_squared,
        monotone,
        degenerate,
    })
}

/// Computes `X_∞,2^ν` for each viscosity and fits the order of
/// `|X_∞,2^ν − X_∞,2⁰|`.
#[allow(clippy::too_many_arguments)]
pub fn viscosity_rate_study(
    flux: &FluxModel,
    ul: f64,
    ur: f64,
    w0l: &PerturbationSpec,
    w0r: &PerturbationSpec,
    nus: &[f64],
    excess: &ExcessOptions,
) -> Result<RateStudy> {
    if nus.len() < 4 {
        return Err(LabError::Arity(format!(
            "a rate study needs at least four viscosities, got {}",
            nus.len()
        )));
    }
    let inviscid = inviscid_shift(w0l, w0r);
    let rows = nus
        .iter()
        .map(|&nu| {
            let (x2, parts) = periodic_shift(flux, ul, ur, nu, w0l, w0r, excess)?;
            Ok(RateRow {
                nu,
                x_inf_2: x2,
                err_bound: parts.0.error_bound() + parts.1.error_bound(),
                discrepancy: (x2 - inviscid).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rate_from_rows(rows, inviscid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::StatePair;
    use crate::profile::{compute_profile, ProfileOptions};

    fn ctx(flux: FluxModel, nu: f64) -> AnsatzContext {
        let st = StatePair::new(&flux, 1.0, -1.0).unwrap();
        let p = compute_profile(&flux, st, nu, ProfileOptions::default()).unwrap();
        AnsatzContext::new(p, 1e-14).unwrap()
    }

    fn flat_traces(ul: f64, ur: f64, dx: f64) -> Traces {
        let z = PerturbationSpec::zero(1.0);
        Traces::new(
            PeriodicField::from_spec(&z, ul, dx).unwrap(),
            PeriodicField::from_spec(&z, ur, dx).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_perturbation_gives_rankine_hugoniot_speed() {
        for flux in [
            FluxModel::burgers(),
            FluxModel::quadratic(0.7).unwrap(),
            FluxModel::gap(50.0, -0.9, 0.9, 0.225).unwrap(),
        ] {
            let c = ctx(flux.clone(), 0.3);
            let tr = flat_traces(1.0, -1.0, 1.0 / 64.0);
            let s = c.profile().states().s;
            for xi in [-3.3, 0.0, 0.71] {
                assert!((shift_rhs(&c, &tr, xi).unwrap() - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_perturbation_source_vanishes() {
        let c = ctx(FluxModel::gap(50.0, -0.9, 0.9, 0.225).unwrap(), 0.4);
        let tr = flat_traces(1.0, -1.0, 1.0 / 64.0);
        let s = c.profile().states().s;
        for x in [-2.0, -0.1, 0.0, 0.4, 3.0] {
            assert!(source_eval(&c, &tr, 0.2, s, x).abs() < 1e-10);
        }
        let (sup, _) = source_antiderivative(&c, &tr, 0.2, s);
        assert!(sup < 1e-10);
    }

    #[test]
    fn ansatz_reduces_to_profile() {
        let c = ctx(FluxModel::burgers(), 0.5);
        let tr = flat_traces(1.0, -1.0, 1.0 / 32.0);
        for x in [-4.0, 0.3, 2.5] {
            let want = c.profile().eval(x - 0.7).phi;
            assert!((ansatz_eval(&c, &tr, 0.7, x) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn inviscid_shift_examples() {
        let c = PerturbationSpec::cosine(0.1, 1.0).unwrap();
        let s = PerturbationSpec::sine(0.1, 1.0).unwrap();
        let z = PerturbationSpec::zero(1.0);
        assert!((inviscid_shift(&c, &z) - 0.1 / (2.0 * std::f64::consts::PI)).abs() < 1e-9);
        assert!(inviscid_shift(&s, &z).abs() < 1e-9);
        assert!(inviscid_shift(&s, &s).abs() < 1e-15);
    }

    #[test]
    fn blended_data_has_no_localized_shift() {
        let c = ctx(FluxModel::burgers(), 0.5);
        let w = PerturbationSpec::sine(0.2, 1.0).unwrap();
        let (x1, err) = localized_shift(&c, &InitialShape::Blended, &w, &w);
        assert!(x1.abs() <= err.max(1e-14));
    }

    #[test]
    fn rate_study_needs_four_viscosities() {
        let f = FluxModel::burgers();
        let w = PerturbationSpec::sine(0.1, 1.0).unwrap();
        let r = viscosity_rate_study(&f, 1.0, -1.0, &w, &w, &[0.1], &ExcessOptions::new(1.0 / 64.0));
        assert!(matches!(r, Err(LabError::Arity(_))));
    }
}
