//! Periodic perturbations: evolution on one period, decay fits, and the
//! flux-excess and antiderivative quantities entering the asymptotic shift.

use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::numerics::fit::fit_line;
use crate::numerics::interp::periodic_cubic;
use crate::numerics::tridiag::PeriodicDiffusionSolver;
use crate::scheme::{extend_periodic, FvOperator, Integrator, SplitSystem, TimeScheme};

/// Number of Fourier modes in the smoothed sawtooth.
const SAWTOOTH_MODES: usize = 16;
/// Norms below this are treated as round-off.
pub const NORM_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Closed-form shape of a periodic perturbation.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Zero,
    Sine,
    Cosine,
    /// Lanczos-smoothed Fourier sawtooth rising from −1 to 1 over a period.
    SawtoothSmoothed,
    /// Node values at `j·p/m`, `j = 0..m`, linearly interpolated; the mean is
    /// removed at construction.
    Tabulated(Vec<f64>),
}

/// Zero-average periodic perturbation `w₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    shape: Shape,
    amplitude: f64,
    period: f64,
    /// Phase in radians: the shape is evaluated at `2πx/p + phase`.
    phase: f64,
    /// Far-field matching exponent used by line experiments.
    pub beta0: Option<f64>,
    /// Cumulative integral of the tabulated shape at its nodes.
    table_integral: Vec<f64>,
}

impl PerturbationSpec {
    pub fn new(shape: Shape, amplitude: f64, period: f64, phase: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(LabError::Invalid(format!("period must be positive, got {period}")));
        }
        if !amplitude.is_finite() || !phase.is_finite() {
            return Err(LabError::Invalid("amplitude and phase must be finite".into()));
        }
        let (shape, table_integral) = match shape {
            Shape::Tabulated(values) => {
                if values.len() < 2 {
                    return Err(LabError::Invalid(
                        "tabulated perturbation needs at least two samples".into(),
                    ));
                }
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let values: Vec<f64> = values.iter().map(|v| v - mean).collect();
                let m = values.len();
                let h = 1.0 / m as f64;
                let mut cum = vec![0.0; m + 1];
                for j in 0..m {
                    cum[j + 1] = cum[j] + 0.5 * h * (values[j] + values[(j + 1) % m]);
                }
                (Shape::Tabulated(values), cum)
            }
            other => (other, Vec::new()),
        };
        Ok(Self {
            shape,
            amplitude,
            period,
            phase,
            beta0: None,
            table_integral,
        })
    }

    pub fn zero(period: f64) -> Self {
        Self::new(Shape::Zero, 0.0, period, 0.0).expect("valid zero perturbation")
    }

    pub fn sine(amplitude: f64, period: f64) -> Result<Self> {
        Self::new(Shape::Sine, amplitude, period, 0.0)
    }

    pub fn cosine(amplitude: f64, period: f64) -> Result<Self> {
        Self::new(Shape::Cosine, amplitude, period, 0.0)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0 || self.shape == Shape::Zero
    }

    #[inline]
    fn angle(&self, x: f64) -> f64 {
        2.0 * PI * x / self.period + self.phase
    }

    /// Position within the unit cell of the tabulated shape, in `[0, 1)`.
    fn unit_position(&self, x: f64) -> f64 {
        (self.angle(x) / (2.0 * PI)).rem_euclid(1.0)
    }

    fn lanczos(k: usize) -> f64 {
        let a = PI * k as f64 / (SAWTOOTH_MODES + 1) as f64;
        a.sin() / a
    }

    /// `w₀(x)`.
    pub fn value(&self, x: f64) -> f64 {
        let a = self.amplitude;
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Sine => a * self.angle(x).sin(),
            Shape::Cosine => a * self.angle(x).cos(),
            Shape::SawtoothSmoothed => {
                let th = self.angle(x);
                let mut sum = 0.0;
                for k in 1..=SAWTOOTH_MODES {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sum += sign * Self::lanczos(k) * (k as f64 * th).sin() / k as f64;
                }
                a * 2.0 / PI * sum
            }
            Shape::Tabulated(v) => {
                let m = v.len();
                let pos = self.unit_position(x) * m as f64;
                let j = (pos.floor() as usize).min(m - 1);
                let t = pos - j as f64;
                a * (v[j] * (1.0 - t) + v[(j + 1) % m] * t)
            }
        }
    }

    /// Primitive of the shape in the angle variable, up to a constant.
    fn primitive(&self, x: f64) -> f64 {
        let a = self.amplitude;
        let scale = self.period / (2.0 * PI);
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Sine => -a * scale * self.angle(x).cos(),
            Shape::Cosine => a * scale * self.angle(x).sin(),
            Shape::SawtoothSmoothed => {
                let th = self.angle(x);
                let mut sum = 0.0;
                for k in 1..=SAWTOOTH_MODES {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    let kf = k as f64;
                    sum -= sign * Self::lanczos(k) * (kf * th).cos() / (kf * kf);
                }
                a * 2.0 / PI * scale * sum
            }
            Shape::Tabulated(v) => {
                let m = v.len();
                let pos = self.unit_position(x) * m as f64;
                let j = (pos.floor() as usize).min(m - 1);
                let t = pos - j as f64;
                let h = 1.0 / m as f64;
                let (v0, v1) = (v[j], v[(j + 1) % m]);
                let partial = h * (v0 * t + 0.5 * (v1 - v0) * t * t);
                a * self.period * (self.table_integral[j] + partial)
            }
        }
    }

    /// `∫₀^x w₀(y) dy`; periodic because `w₀` has zero mean.
    pub fn antiderivative(&self, x: f64) -> f64 {
        self.primitive(x) - self.primitive(0.0)
    }

    /// `sup |w₀|` (dense sampling for shapes without a closed form).
    pub fn sup_norm(&self) -> f64 {
        match self.shape {
            Shape::Zero => 0.0,
            Shape::Sine | Shape::Cosine => self.amplitude.abs(),
            _ => (0..4096)
                .map(|j| self.value(self.period * j as f64 / 4096.0).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Total variation over one period (dense sampling).
    pub fn total_variation(&self) -> f64 {
        let n = 8192;
        let h = self.period / n as f64;
        (0..n)
            .map(|j| (self.value((j + 1) as f64 * h) - self.value(j as f64 * h)).abs())
            .sum()
    }

    /// Cell-centre samples on `n` cells of one period with the discrete mean
    /// removed.
    pub fn sample_cells(&self, n: usize) -> Vec<f64> {
        let dx = self.period / n as f64;
        let mut v: Vec<f64> = (0..n).map(|j| self.value((j as f64 + 0.5) * dx)).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        for x in v.iter_mut() {
            *x -= mean;
        }
        v
    }
}

/// `(1/p)∫₀^p ∫₀^x w₀(y) dy dx` by composite Simpson with 10⁴ intervals.
pub fn antiderivative_period_average(spec: &PerturbationSpec) -> f64 {
    if spec.is_zero() {
        return 0.0;
    }
    let n = 10_000;
    let p = spec.period();
    let h = p / n as f64;
    let mut sum = spec.antiderivative(0.0) + spec.antiderivative(p);
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * spec.antiderivative(j as f64 * h);
    }
    sum * h / 3.0 / p
}

/// Minimum over one period of `∫₀^x w₀`, by sampling at 10⁵ points and
/// refining the best sample with a local quadratic fit.
pub fn antiderivative_min(spec: &PerturbationSpec) -> f64 {
    if spec.is_zero() {
        return 0.0;
    }
    let n = 100_000;
    let p = spec.period();
    let h = p / n as f64;
    let (mut best_j, mut best) = (0usize, f64::INFINITY);
    for j in 0..n {
        let v = spec.antiderivative(j as f64 * h);
        if v < best {
            best = v;
            best_j = j;
        }
    }
    let x0 = best_j as f64 * h;
    let (fm, f0, fp) = (
        spec.antiderivative(x0 - h),
        best,
        spec.antiderivative(x0 + h),
    );
    let curv = fm - 2.0 * f0 + fp;
    if curv > 0.0 {
        let off = 0.5 * (fm - fp) / curv;
        if off.abs() <= 1.0 {
            return best.min(spec.antiderivative(x0 + off * h));
        }
    }
    best
}

/// One period of a periodic solution at time `t`, sampled at cell centres
/// `(j + ½)·dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    pub period: f64,
    pub dx: f64,
    pub samples: Vec<f64>,
    pub t: f64,
    /// The conserved average `ū`.
    pub mean: f64,
}

impl PeriodicField {
    /// Samples `ū + w₀` on cells of width `dx`; `dx` must divide the period.
    pub fn from_spec(spec: &PerturbationSpec, ubar: f64, dx: f64) -> Result<Self> {
        let n = cells_per_period(spec.period(), dx)?;
        let samples = spec.sample_cells(n).into_iter().map(|w| ubar + w).collect();
        Ok(Self {
            period: spec.period(),
            dx,
            samples,
            t: 0.0,
            mean: ubar,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn discrete_mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// `sup |u − ū|`.
    pub fn sup_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|u| (u - self.mean).abs())
            .fold(0.0, f64::max)
    }

    /// `(∫₀^p (u − ū)²)^{1/2}`.
    pub fn l2_deviation(&self) -> f64 {
        (self.dx * self.samples.iter().map(|u| (u - self.mean).powi(2)).sum::<f64>()).sqrt()
    }

    /// Sample at the cell containing the line point with global index offset
    /// `index` (cell centres shared with the periodic grid).
    #[inline]
    pub fn at_index(&self, index: i64) -> f64 {
        self.samples[index.rem_euclid(self.samples.len() as i64) as usize]
    }

    /// Periodic cubic interpolation at an arbitrary `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        periodic_cubic(&self.samples, self.dx, x)
    }

    /// Fourth-order centred differences `∂ₓu` at the cell centres.
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.samples.len() as i64;
        let c = 1.0 / (12.0 * self.dx);
        (0..n)
            .map(|j| {
                let u = |k: i64| self.at_index(j + k);
                c * (u(-2) - 8.0 * u(-1) + 8.0 * u(1) - u(2))
            })
            .collect()
    }

    /// `(1/p)∫₀^p (f(u) − f(ū))`, evaluated through the Bregman excess (the
    /// linear term integrates to zero by conservation).
    pub fn excess_flux(&self, flux: &FluxModel) -> f64 {
        self.samples
            .iter()
            .map(|&u| flux.bregman(self.mean, u))
            .sum::<f64>()
            / self.samples.len() as f64
    }
}

pub(crate) fn cells_per_period(period: f64, dx: f64) -> Result<usize> {
    if !(dx > 0.0) {
        return Err(LabError::Invalid(format!("dx must be positive, got {dx}")));
    }
    let n = (period / dx).round();
    if n < 4.0 || ((n * dx - period).abs() > 1e-9 * period) {
        return Err(LabError::Invalid(format!(
            "dx = {dx} must divide the period {period} into at least four cells"
        )));
    }
    Ok(n as usize)
}

/// Semi-discrete system for one periodic field.
#[derive(Debug, Clone)]
pub struct PeriodicSystem {
    op: FvOperator,
    ext: Vec<f64>,
    solver: Option<PeriodicDiffusionSolver>,
}

impl PeriodicSystem {
    pub fn new(op: FvOperator, n: usize) -> Self {
        Self {
            op,
            ext: vec![0.0; n + 4],
            solver: None,
        }
    }

    pub fn operator(&self) -> &FvOperator {
        &self.op
    }
}

impl SplitSystem for PeriodicSystem {
    fn dim(&self) -> usize {
        self.ext.len() - 4
    }

    fn convective(&mut self, u: &[f64], out: &mut [f64]) {
        extend_periodic(u, &mut self.ext);
        self.op.convective(&self.ext, out);
    }

    fn diffusive(&mut self, u: &[f64], out: &mut [f64]) {
        extend_periodic(u, &mut self.ext);
        self.op.diffusive(&self.ext, out);
    }

    fn prepare_implicit(&mut self, c_dt: f64) {
        self.solver = Some(PeriodicDiffusionSolver::new(
            self.dim(),
            self.op.implicit_ratio(c_dt),
        ));
    }

    fn solve_implicit(&mut self, b: &mut [f64]) {
        self.solver
            .as_ref()
            .expect("implicit solver prepared")
            .solve(b);
    }
}

/// Largest `|f'|` over `[lo, hi]` for a convex flux.
pub(crate) fn max_speed(flux: &FluxModel, lo: f64, hi: f64) -> f64 {
    flux.df(lo).abs().max(flux.df(hi).abs())
}

/// Step count and step size such that `cadence` is an integer number of steps.
pub(crate) fn aligned_dt(dt_max: f64, cadence: f64) -> (f64, usize) {
    let steps = (cadence / dt_max).ceil().max(1.0) as usize;
    (cadence / steps as f64, steps)
}

/// Controls for a periodic evolution.
#[derive(Debug, Clone)]
pub struct PeriodicSettings {
    pub dx: f64,
    pub scheme: TimeScheme,
    /// Recording interval.
    pub record_every: f64,
    /// Final time.
    pub t_max: f64,
    /// Stop early (after `t ≥ 1`) once the sup deviation drops below this.
    pub stop_below: Option<f64>,
}

impl PeriodicSettings {
    pub fn new(dx: f64, t_max: f64) -> Self {
        Self {
            dx,
            scheme: TimeScheme::Rk4,
            record_every: 0.02,
            t_max,
            stop_below: None,
        }
    }
}

/// One recorded time of a periodic run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicRecord {
    pub t: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    /// `∫₀^t (1/p)∫(f(u) − f(ū)) dx dt` (trapezoid in time).
    pub flux_excess_cum: f64,
    /// `mean(u) − ū`.
    pub mass_error: f64,
    pub min: f64,
    pub max: f64,
}

/// Recorded history of a periodic evolution.
#[derive(Debug, Clone)]
pub struct PeriodicTrajectory {
    pub records: Vec<PeriodicRecord>,
    pub initial: PeriodicField,
    pub last: PeriodicField,
    pub dt: f64,
    pub scheme: TimeScheme,
    /// Excess-flux integrand at every solver step (index `k` ↔ `t = k·dt`).
    pub excess_series: Vec<f64>,
}

/// Running periodic solver.
#[derive(Debug, Clone)]
pub struct PeriodicRun {
    system: PeriodicSystem,
    integrator: Integrator,
    pub field: PeriodicField,
    steps: usize,
}

impl PeriodicRun {
    pub fn new(
        flux: &FluxModel,
        field: PeriodicField,
        nu: f64,
        scheme: TimeScheme,
        dt: f64,
    ) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(LabError::Invalid(format!("viscosity must be positive, got {nu}")));
        }
        let op = FvOperator {
            flux: flux.clone(),
            nu,
            dx: field.dx,
        };
        let mut system = PeriodicSystem::new(op, field.len());
        let integrator = Integrator::new(scheme, dt, &mut system);
        Ok(Self {
            system,
            integrator,
            field,
            steps: 0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.integrator.dt()
    }

    /// Advances one step; fails if the solution stops being finite.
    pub fn step(&mut self) -> Result<()> {
        self.integrator
            .step(&mut self.system, &mut self.field.samples);
        self.steps += 1;
        self.field.t = self.steps as f64 * self.integrator.dt();
        if !self.field.samples.iter().all(|v| v.is_finite()) {
            return Err(LabError::Stability {
                step: self.steps,
                t: self.field.t,
            });
        }
        Ok(())
    }
}

/// Evolves `ū + w₀` on one period.
pub fn evolve_periodic(
    flux: &FluxModel,
    spec: &PerturbationSpec,
    ubar: f64,
    nu: f64,
    settings: &PeriodicSettings,
) -> Result<PeriodicTrajectory> {
    if !(settings.t_max > 0.0) {
        return Err(LabError::Invalid(format!(
            "final time must be positive, got {}",
            settings.t_max
        )));
    }
    let field = PeriodicField::from_spec(spec, ubar, settings.dx)?;
    let lo = field.samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    flux.check_domain(lo)?;
    flux.check_domain(hi)?;
    let dt_max = settings
        .scheme
        .max_dt(settings.dx, max_speed(flux, lo, hi), nu, spec.period());
    let (dt, per_record) = aligned_dt(dt_max, settings.record_every);
    let mut run = PeriodicRun::new(flux, field.clone(), nu, settings.scheme, dt)?;

    let record = |f: &PeriodicField, cum: f64| PeriodicRecord {
        t: f.t,
        sup_norm: f.sup_deviation(),
        l2_norm: f.l2_deviation(),
        flux_excess_cum: cum,
        mass_error: f.discrete_mean() - f.mean,
        min: f.samples.iter().copied().fold(f64::INFINITY, f64::min),
        max: f.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    let mut excess_series = vec![run.field.excess_flux(flux)];
    let mut cum = 0.0;
    let mut records = vec![record(&run.field, cum)];
    let total_steps = (settings.t_max / dt).round() as usize;
    for k in 1..=total_steps {
        run.step()?;
        let e = run.field.excess_flux(flux);
        cum += 0.5 * dt * (e + excess_series[k - 1]);
        excess_series.push(e);
        if k % per_record == 0 || k == total_steps {
            let r = record(&run.field, cum);
            records.push(r);
            if let Some(floor) = settings.stop_below {
                if r.t >= 1.0 && r.sup_norm < floor {
                    break;
                }
            }
        }
    }
    Ok(PeriodicTrajectory {
        records,
        initial: field,
        last: run.field,
        dt,
        scheme: settings.scheme,
        excess_series,
    })
}

/// Which norm a decay fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    Sup,
    L2,
}

/// Exponential fit `norm ≈ C e^{−rate·t}` on `[t_a, t_b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub prefactor: f64,
    pub rate: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    /// True when the perturbation was identically zero; `rate` is then `+∞`.
    pub degenerate: bool,
}

/// Fits an exponential decay to the later half of the above-floor part of
/// the record past `t = 1`.
pub fn fit_decay(records: &[PeriodicRecord], norm: Norm) -> Result<DecayFit> {
    let value = |r: &PeriodicRecord| match norm {
        Norm::Sup => r.sup_norm,
        Norm::L2 => r.l2_norm,
    };
    if records.first().map(|r| value(r) <= NORM_FLOOR).unwrap_or(true) {
        return Ok(DecayFit {
            prefactor: 0.0,
            rate: f64::INFINITY,
            window: (0.0, 0.0),
            r_squared: 1.0,
            degenerate: true,
        });
    }
    let late: Vec<&PeriodicRecord> = records.iter().filter(|r| r.t >= 1.0).collect();
    if late.len() < 20 {
        return Err(LabError::WindowSelection(format!(
            "need at least 20 samples past t = 1, got {}",
            late.len()
        )));
    }
    let above: Vec<&PeriodicRecord> = late
        .iter()
        .take_while(|r| value(r) > NORM_FLOOR)
        .copied()
        .collect();
    if above.len() < 3 {
        return Err(LabError::WindowSelection(
            "norm fell below the round-off floor before the fit window".into(),
        ));
    }
    let t_b = above.last().unwrap().t;
    let t_a = (0.5 * t_b).max(1.0);
    let window: Vec<&PeriodicRecord> = above.into_iter().filter(|r| r.t >= t_a).collect();
    let ts: Vec<f64> = window.iter().map(|r| r.t).collect();
    let ys: Vec<f64> = window.iter().map(|r| value(r).ln()).collect();
    let fit = fit_line(&ts, &ys).ok_or_else(|| {
        LabError::WindowSelection("fit window has fewer than two distinct times".into())
    })?;
    Ok(DecayFit {
        prefactor: fit.intercept.exp(),
        rate: -fit.slope,
        window: (ts[0], *ts.last().unwrap()),
        r_squared: fit.r_squared,
        degenerate: false,
    })
}

/// Controls for [`excess_flux_time_integral`].
#[derive(Debug, Clone)]
pub struct ExcessOptions {
    pub dx: f64,
    pub scheme: TimeScheme,
    /// Stop once the per-period integrand drops below this.
    pub tol: f64,
    /// Give up (truncation error) if the integrand has not decayed by then.
    pub t_max: f64,
    /// Repeat at `dx/2` and report the difference as discretization error.
    pub estimate_discretization: bool,
}

impl ExcessOptions {
    pub fn new(dx: f64) -> Self {
        Self {
            dx,
            scheme: TimeScheme::Imex,
            tol: 1e-15,
            t_max: 400.0,
            estimate_discretization: true,
        }
    }
}

/// Value and error budget of the time-integrated flux excess.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExcessIntegral {
    pub value: f64,
    /// Richardson estimate of the time-quadrature error.
    pub quadrature_err: f64,
    /// Envelope tail `C/(1+T)` added to `value` (also counted as error).
    pub tail: f64,
    /// Difference to the `dx/2` recomputation (0 if not requested).
    pub discretization_err: f64,
    /// Time at which integration stopped.
    pub t_end: f64,
    /// Smallest integrand seen while the perturbation was non-zero.
    pub min_integrand: f64,
}

impl ExcessIntegral {
    pub fn error_bound(&self) -> f64 {
        self.quadrature_err + self.tail + self.discretization_err
    }
}

fn excess_single(
    flux: &FluxModel,
    spec: &PerturbationSpec,
    ubar: f64,
    nu: f64,
    dx: f64,
    opts: &ExcessOptions,
) -> Result<ExcessIntegral> {
    let field = PeriodicField::from_spec(spec, ubar, dx)?;
    let lo = field.samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    flux.check_domain(lo)?;
    flux.check_domain(hi)?;
    let dt = opts
        .scheme
        .max_dt(dx, max_speed(flux, lo, hi), nu, spec.period());
    let mut run = PeriodicRun::new(flux, field, nu, opts.scheme, dt)?;
    let mut series = vec![run.field.excess_flux(flux)];
    let mut min_integrand = series[0];
    loop {
        run.step()?;
        let e = run.field.excess_flux(flux);
        series.push(e);
        if run.field.sup_deviation() > 0.0 {
            min_integrand = min_integrand.min(e);
        }
        let steps = series.len() - 1;
        if e < opts.tol && steps % 2 == 0 && run.field.t >= 1.0 {
            break;
        }
        if run.field.t > opts.t_max {
            return Err(LabError::Truncation(format!(
                "flux-excess integrand still {e:e} at t = {}",
                run.field.t
            )));
        }
    }
    let n = series.len() - 1;
    let trap = |stride: usize| {
        let h = dt * stride as f64;
        let mut s = 0.5 * (series[0] + series[n]);
        let mut k = stride;
        while k < n {
            s += series[k];
            k += stride;
        }
        s * h
    };
    let fine = trap(1);
    let coarse = trap(2);
    let t_end = n as f64 * dt;
    let tail = series[n] * (1.0 + t_end);
    Ok(ExcessIntegral {
        value: fine + (fine - coarse) / 3.0 + tail,
        quadrature_err: (fine - coarse).abs() / 3.0,
        tail,
        discretization_err: 0.0,
        t_end,
        min_integrand,
    })
}

/// `∫₀^∞ (1/p)∫₀^p (f(u) − f(ū)) dx dt` for the periodic solution from
/// `ū + w₀`, with an error budget.
pub fn excess_flux_time_integral(
    flux: &FluxModel,
    spec: &PerturbationSpec,
    ubar: f64,
    nu: f64,
    opts: &ExcessOptions,
) -> Result<ExcessIntegral> {
    if spec.is_zero() {
        return Ok(ExcessIntegral::default());
    }
    let coarse = excess_single(flux, spec, ubar, nu, opts.dx, opts)?;
    if !opts.estimate_discretization {
        return Ok(coarse);
    }
    let mut fine = excess_single(flux, spec, ubar, nu, 0.5 * opts.dx, opts)?;
    fine.discretization_err = (fine.value - coarse.value).abs();
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antiderivative_averages() {
        let s = PerturbationSpec::sine(0.3, 2.0).unwrap();
        assert!((antiderivative_period_average(&s) - 0.3 * 2.0 / (2.0 * PI)).abs() < 1e-12);
        let c = PerturbationSpec::cosine(0.3, 1.0).unwrap();
        assert!(antiderivative_period_average(&c).abs() < 1e-12);
        assert_eq!(antiderivative_period_average(&PerturbationSpec::zero(1.0)), 0.0);
    }

    #[test]
    fn antiderivative_min_of_cosine() {
        let c = PerturbationSpec::cosine(0.1, 1.0).unwrap();
        assert!((antiderivative_min(&c) + 0.1 / (2.0 * PI)).abs() < 1e-12);
        let s = PerturbationSpec::sine(0.1, 1.0).unwrap();
        assert!(antiderivative_min(&s).abs() < 1e-12);
    }

    #[test]
    fn tabulated_shape_has_zero_mean_and_periodic_antiderivative() {
        let spec = PerturbationSpec::new(Shape::Tabulated(vec![1.0, 3.0, 2.0, 0.5]), 1.0, 2.0, 0.0)
            .unwrap();
        assert!(spec.antiderivative(2.0).abs() < 1e-14);
        let h = 1e-6;
        let d = (spec.antiderivative(0.7 + h) - spec.antiderivative(0.7 - h)) / (2.0 * h);
        assert!((d - spec.value(0.7)).abs() < 1e-8);
    }

    #[test]
    fn sawtooth_antiderivative_is_consistent() {
        let spec = PerturbationSpec::new(Shape::SawtoothSmoothed, 0.2, 1.5, 0.3).unwrap();
        assert!(spec.antiderivative(1.5).abs() < 1e-14);
        let h = 1e-6;
        for x in [0.1, 0.74, 1.3] {
            let d = (spec.antiderivative(x + h) - spec.antiderivative(x - h)) / (2.0 * h);
            assert!((d - spec.value(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn dx_must_divide_period() {
        assert!(cells_per_period(1.0, 0.3).is_err());
        assert_eq!(cells_per_period(1.0, 1.0 / 64.0).unwrap(), 64);
    }
}
