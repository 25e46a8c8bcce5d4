//! Perturbed shocks and rarefactions on a truncated line `[−L, L]` whose
//! boundary ghost cells are fed by the two periodic solutions, evolved in
//! lock-step with the line.
//!
//! Line cells are centred at `x_i = −L + (i + ½)dx` with `L/dx` integral, so
//! every line cell coincides with a cell of each periodic grid and traces
//! need no interpolation.

use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::numerics::tridiag::{DiffusionSolver, PeriodicDiffusionSolver};
use crate::periodic::{cells_per_period, max_speed, PeriodicField, PerturbationSpec};
use crate::profile::ProfileTable;
use crate::scheme::{extend_periodic, FvOperator, Integrator, SplitSystem, TimeScheme};

/// Cells excluded at each end when taking interior sup-norms.
pub const BOUNDARY_MARGIN: usize = 5;

/// Uniform grid on `[−L, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGrid {
    pub half_width: f64,
    pub dx: f64,
    /// `L/dx`.
    offset: i64,
}

impl LineGrid {
    pub fn new(half_width: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && half_width > 0.0) {
            return Err(LabError::Invalid(format!(
                "line grid needs positive L and dx, got L = {half_width}, dx = {dx}"
            )));
        }
        let k = (half_width / dx).round();
        if (k * dx - half_width).abs() > 1e-9 * half_width || k < 8.0 {
            return Err(LabError::Invalid(format!(
                "dx = {dx} must divide the half-width L = {half_width}"
            )));
        }
        Ok(Self {
            half_width,
            dx,
            offset: k as i64,
        })
    }

    pub fn len(&self) -> usize {
        2 * self.offset as usize
    }

    pub fn is_empty(&self) -> bool {
        self.offset == 0
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.offset as f64 + 0.5) * self.dx
    }

    /// Index on a periodic grid of the same spacing for line cell `i`
    /// (may be negative or beyond `n`; reduce modulo the period).
    #[inline]
    pub fn periodic_index(&self, i: i64) -> i64 {
        i - self.offset
    }
}

/// Line solution at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LineField {
    pub grid: LineGrid,
    pub samples: Vec<f64>,
    pub t: f64,
}

/// Initial line data together with the periodic data driving its boundaries.
#[derive(Debug, Clone)]
pub struct LineSetup {
    pub field: LineField,
    pub left: PeriodicField,
    pub right: PeriodicField,
}

impl LineSetup {
    /// Adds a localized function to the line data (periodic traces unchanged).
    pub fn with_localized(mut self, bump: impl Fn(f64) -> f64) -> Self {
        let grid = self.field.grid;
        for (i, u) in self.field.samples.iter_mut().enumerate() {
            *u += bump(grid.x(i));
        }
        self
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.field
            .samples
            .iter()
            .chain(&self.left.samples)
            .chain(&self.right.samples)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| {
                (lo.min(u), hi.max(u))
            })
    }
}

fn periodic_pair(
    grid: &LineGrid,
    w0l: &PerturbationSpec,
    w0r: &PerturbationSpec,
    ul: f64,
    ur: f64,
) -> Result<(PeriodicField, PeriodicField)> {
    cells_per_period(w0l.period(), grid.dx)?;
    cells_per_period(w0r.period(), grid.dx)?;
    Ok((
        PeriodicField::from_spec(w0l, ul, grid.dx)?,
        PeriodicField::from_spec(w0r, ur, grid.dx)?,
    ))
}

/// Blended shock data `u₀ = φ + w0l·g + w0r·(1 − g)`.
pub fn make_initial(
    profile: &ProfileTable,
    w0l: &PerturbationSpec,
    w0r: &PerturbationSpec,
    grid: LineGrid,
) -> Result<LineSetup> {
    let st = profile.states();
    let (left, right) = periodic_pair(&grid, w0l, w0r, st.ul, st.ur)?;
    let samples: Vec<f64> = (0..grid.len())
        .map(|i| {
            let p = profile.eval(grid.x(i));
            let j = grid.periodic_index(i as i64);
            let wl = left.at_index(j) - left.mean;
            let wr = right.at_index(j) - right.mean;
            p.phi + wl * p.g + wr * (1.0 - p.g)
        })
        .collect();
    let setup = LineSetup {
        field: LineField {
            grid,
            samples,
            t: 0.0,
        },
        left,
        right,
    };
    let (lo, hi) = setup.bounds();
    profile.flux().check_domain(lo)?;
    profile.flux().check_domain(hi)?;
    Ok(setup)
}

/// Riemann data `ū_l + w0l` for `x < 0`, `ū_r + w0r` for `x > 0`.
pub fn make_riemann_initial(
    flux: &FluxModel,
    ul: f64,
    ur: f64,
    w0l: &PerturbationSpec,
    w0r: &PerturbationSpec,
    grid: LineGrid,
) -> Result<LineSetup> {
    let (left, right) = periodic_pair(&grid, w0l, w0r, ul, ur)?;
    let samples: Vec<f64> = (0..grid.len())
        .map(|i| {
            let j = grid.periodic_index(i as i64);
            if grid.x(i) < 0.0 {
                left.at_index(j)
            } else {
                right.at_index(j)
            }
        })
        .collect();
    let setup = LineSetup {
        field: LineField {
            grid,
            samples,
            t: 0.0,
        },
        left,
        right,
    };
    let (lo, hi) = setup.bounds();
    flux.check_domain(lo)?;
    flux.check_domain(hi)?;
    Ok(setup)
}

/// Line plus its two periodic trace fields as one semi-discrete system.
/// State layout: `[line | left period | right period]`.
#[derive(Debug, Clone)]
struct CoupledSystem {
    op: FvOperator,
    grid: LineGrid,
    n_left: usize,
    n_right: usize,
    ext_line: Vec<f64>,
    ext_left: Vec<f64>,
    ext_right: Vec<f64>,
    r: f64,
    line_solver: Option<DiffusionSolver>,
    left_solver: Option<PeriodicDiffusionSolver>,
    right_solver: Option<PeriodicDiffusionSolver>,
}

impl CoupledSystem {
    fn split<'a>(&self, u: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let n = self.grid.len();
        let (line, rest) = u.split_at(n);
        let (left, right) = rest.split_at(self.n_left);
        (line, left, right)
    }

    fn fill_line_ext(&mut self, line: &[f64], left: &[f64], right: &[f64]) {
        let n = line.len();
        let at = |v: &[f64], i: i64| v[self.grid.periodic_index(i).rem_euclid(v.len() as i64) as usize];
        self.ext_line[0] = at(left, -2);
        self.ext_line[1] = at(left, -1);
        self.ext_line[2..n + 2].copy_from_slice(line);
        self.ext_line[n + 2] = at(right, n as i64);
        self.ext_line[n + 3] = at(right, n as i64 + 1);
    }

    fn apply(&mut self, u: &[f64], out: &mut [f64], convective: bool) {
        let n = self.grid.len();
        let (line, left, right) = self.split(u);
        let (out_line, out_rest) = out.split_at_mut(n);
        let (out_left, out_right) = out_rest.split_at_mut(self.n_left);
        extend_periodic(left, &mut self.ext_left);
        extend_periodic(right, &mut self.ext_right);
        self.fill_line_ext(line, left, right);
        if convective {
            self.op.convective(&self.ext_left, out_left);
            self.op.convective(&self.ext_right, out_right);
            self.op.convective(&self.ext_line, out_line);
        } else {
            self.op.diffusive(&self.ext_left, out_left);
            self.op.diffusive(&self.ext_right, out_right);
            self.op.diffusive(&self.ext_line, out_line);
        }
    }
}

impl SplitSystem for CoupledSystem {
    fn dim(&self) -> usize {
        self.grid.len() + self.n_left + self.n_right
    }

    fn convective(&mut self, u: &[f64], out: &mut [f64]) {
        self.apply(u, out, true);
    }

    fn diffusive(&mut self, u: &[f64], out: &mut [f64]) {
        self.apply(u, out, false);
    }

    fn prepare_implicit(&mut self, c_dt: f64) {
        self.r = self.op.implicit_ratio(c_dt);
        self.line_solver = Some(DiffusionSolver::new(self.grid.len(), self.r));
        self.left_solver = Some(PeriodicDiffusionSolver::new(self.n_left, self.r));
        self.right_solver = Some(PeriodicDiffusionSolver::new(self.n_right, self.r));
    }

    fn solve_implicit(&mut self, b: &mut [f64]) {
        let n = self.grid.len();
        let (line, rest) = b.split_at_mut(n);
        let (left, right) = rest.split_at_mut(self.n_left);
        self.left_solver.as_ref().unwrap().solve(left);
        self.right_solver.as_ref().unwrap().solve(right);
        let ghost_l = left[self.grid.periodic_index(-1).rem_euclid(left.len() as i64) as usize];
        let ghost_r = right[self.grid.periodic_index(n as i64).rem_euclid(right.len() as i64) as usize];
        line[0] += self.r * ghost_l;
        line[n - 1] += self.r * ghost_r;
        self.line_solver.as_ref().unwrap().solve(line);
    }
}

/// Borrowed view of a line run at one instant.
#[derive(Debug, Clone, Copy)]
pub struct LineView<'a> {
    pub grid: LineGrid,
    pub t: f64,
    pub line: &'a [f64],
    pub left: &'a [f64],
    pub right: &'a [f64],
    pub left_mean: f64,
    pub right_mean: f64,
}

impl<'a> LineView<'a> {
    /// Left periodic solution at line cell `i`.
    #[inline]
    pub fn ul(&self, i: usize) -> f64 {
        let j = self.grid.periodic_index(i as i64);
        self.left[j.rem_euclid(self.left.len() as i64) as usize]
    }

    /// Right periodic solution at line cell `i`.
    #[inline]
    pub fn ur(&self, i: usize) -> f64 {
        let j = self.grid.periodic_index(i as i64);
        self.right[j.rem_euclid(self.right.len() as i64) as usize]
    }

    /// Copies the left trace into a standalone periodic field.
    pub fn left_field(&self) -> PeriodicField {
        PeriodicField {
            period: self.left.len() as f64 * self.grid.dx,
            dx: self.grid.dx,
            samples: self.left.to_vec(),
            t: self.t,
            mean: self.left_mean,
        }
    }

    pub fn right_field(&self) -> PeriodicField {
        PeriodicField {
            period: self.right.len() as f64 * self.grid.dx,
            dx: self.grid.dx,
            samples: self.right.to_vec(),
            t: self.t,
            mean: self.right_mean,
        }
    }

    /// Whether `Δ/2 < u_l − u_r < 2Δ` holds at every line cell.
    pub fn separated(&self) -> bool {
        let jump = self.left_mean - self.right_mean;
        (0..self.grid.len()).all(|i| {
            let d = self.ul(i) - self.ur(i);
            d > 0.5 * jump && d < 2.0 * jump
        })
    }
}

/// Controls for a line run.
#[derive(Debug, Clone)]
pub struct LineSettings {
    pub scheme: TimeScheme,
    /// Sentinel threshold is 100× this.
    pub boundary_tol: f64,
    /// Steps are aligned so this interval is a whole number of steps.
    pub cadence: f64,
}

impl Default for LineSettings {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::Imex,
            boundary_tol: 1e-8,
            cadence: 0.05,
        }
    }
}

/// Running line solver.
#[derive(Debug, Clone)]
pub struct LineRun {
    system: CoupledSystem,
    integrator: Integrator,
    state: Vec<f64>,
    grid: LineGrid,
    steps: usize,
    left_mean: f64,
    right_mean: f64,
    sentinel: f64,
    bounds: (f64, f64),
}

impl LineRun {
    pub fn new(flux: &FluxModel, setup: LineSetup, nu: f64, settings: &LineSettings) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(LabError::Invalid(format!("viscosity must be positive, got {nu}")));
        }
        let grid = setup.field.grid;
        let bounds = setup.bounds();
        let longest = setup.left.period.max(setup.right.period);
        let dt_max = settings
            .scheme
            .max_dt(grid.dx, max_speed(flux, bounds.0, bounds.1), nu, longest);
        // Even, so the shift ODE (step 2·dt) also lands on every cadence point.
        let steps = 2.0 * (0.5 * settings.cadence / dt_max).ceil().max(1.0);
        let dt = settings.cadence / steps;
        let op = FvOperator {
            flux: flux.clone(),
            nu,
            dx: grid.dx,
        };
        let n = grid.len();
        let (n_left, n_right) = (setup.left.len(), setup.right.len());
        let mut system = CoupledSystem {
            op,
            grid,
            n_left,
            n_right,
            ext_line: vec![0.0; n + 4],
            ext_left: vec![0.0; n_left + 4],
            ext_right: vec![0.0; n_right + 4],
            r: 0.0,
            line_solver: None,
            left_solver: None,
            right_solver: None,
        };
        let integrator = Integrator::new(settings.scheme, dt, &mut system);
        let mut state = setup.field.samples;
        state.extend_from_slice(&setup.left.samples);
        state.extend_from_slice(&setup.right.samples);
        Ok(Self {
            system,
            integrator,
            state,
            grid,
            steps: 0,
            left_mean: setup.left.mean,
            right_mean: setup.right.mean,
            sentinel: 100.0 * settings.boundary_tol,
            bounds,
        })
    }

    pub fn dt(&self) -> f64 {
        self.integrator.dt()
    }

    pub fn t(&self) -> f64 {
        self.steps as f64 * self.integrator.dt()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn grid(&self) -> LineGrid {
        self.grid
    }

    /// Extremes of the initial data (line and traces).
    pub fn initial_bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn view(&self) -> LineView<'_> {
        let n = self.grid.len();
        let (line, rest) = self.state.split_at(n);
        let (left, right) = rest.split_at(self.system.n_left);
        LineView {
            grid: self.grid,
            t: self.t(),
            line,
            left,
            right,
            left_mean: self.left_mean,
            right_mean: self.right_mean,
        }
    }

    pub fn field(&self) -> LineField {
        LineField {
            grid: self.grid,
            samples: self.view().line.to_vec(),
            t: self.t(),
        }
    }

    /// One time step, with stability and boundary-contamination checks.
    pub fn step(&mut self) -> Result<()> {
        self.integrator.step(&mut self.system, &mut self.state);
        self.steps += 1;
        if !self.state.iter().all(|v| v.is_finite()) {
            return Err(LabError::Stability {
                step: self.steps,
                t: self.t(),
            });
        }
        let v = self.view();
        let n = self.grid.len();
        let (a, b) = (BOUNDARY_MARGIN, n - 1 - BOUNDARY_MARGIN);
        let dev = (v.line[a] - v.ul(a)).abs().max((v.line[b] - v.ur(b)).abs());
        if dev > self.sentinel {
            return Err(LabError::Truncation(format!(
                "boundary contamination {dev:e} at t = {} exceeds {:e}; enlarge the domain",
                self.t(),
                self.sentinel
            )));
        }
        Ok(())
    }

    /// Steps until `t` (rounded to the step grid).
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let target = (t / self.dt()).round() as usize;
        while self.steps < target {
            self.step()?;
        }
        Ok(())
    }
}

/// Checks that `e^{−β(L − |s|T − X_max)}` is below the boundary tolerance
/// for a shock run.
pub fn check_shock_domain(
    profile: &ProfileTable,
    w0l: &PerturbationSpec,
    w0r: &PerturbationSpec,
    grid: &LineGrid,
    horizon: f64,
    boundary_tol: f64,
) -> Result<()> {
    let (rate_l, rate_r) = profile.tail_rates();
    let beta = rate_l.min(rate_r);
    let st = profile.states();
    let x_max =
        1.0 + (w0l.sup_norm() * w0l.period() + w0r.sup_norm() * w0r.period()) / st.jump();
    let room = grid.half_width - st.s.abs() * horizon - x_max;
    let needed = (1.0 / boundary_tol).ln() / beta;
    if room < needed {
        return Err(LabError::Truncation(format!(
            "half-width {} too small for T = {horizon}: need L ≥ {:.3}",
            grid.half_width,
            needed + st.s.abs() * horizon + x_max
        )));
    }
    Ok(())
}

/// Checks that the rarefaction fan and its viscous edges stay inside the
/// domain up to `horizon`.
pub fn check_rarefaction_domain(
    flux: &FluxModel,
    ul: f64,
    ur: f64,
    nu: f64,
    grid: &LineGrid,
    horizon: f64,
    boundary_tol: f64,
) -> Result<()> {
    let spread = flux.df(ul).abs().max(flux.df(ur).abs()) * horizon;
    let layer = (4.0 * nu * horizon * (1.0 / boundary_tol).ln()).sqrt();
    let needed = spread + layer + 2.0;
    if grid.half_width < needed {
        return Err(LabError::Truncation(format!(
            "half-width {} too small for the fan at T = {horizon}: need L ≥ {needed:.3}",
            grid.half_width
        )));
    }
    Ok(())
}

/// Ansatz `ψ_ξ` at every line cell.
pub fn ansatz_on_line(view: &LineView, profile: &ProfileTable, shift: f64) -> Vec<f64> {
    (0..view.grid.len())
        .map(|i| {
            let g = profile.g(view.grid.x(i) - shift);
            view.ul(i) * g + view.ur(i) * (1.0 - g)
        })
        .collect()
}

/// `∫_{−L}^{L} (u − ψ_ξ) dx` (midpoint rule on the cells).
pub fn mass_defect(view: &LineView, profile: &ProfileTable, shift: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..view.grid.len() {
        let g = profile.g(view.grid.x(i) - shift);
        sum += view.line[i] - view.ul(i) * g - view.ur(i) * (1.0 - g);
    }
    sum * view.grid.dx
}

/// Bisection on `ξ ↦ ∫(u − ψ_ξ)`, which decreases strictly in `ξ` once the
/// left and right solutions are separated, down to a bracket of `1e−10`.
pub fn measure_shift(view: &LineView, profile: &ProfileTable) -> Result<f64> {
    if !view.separated() {
        return Err(LabError::NotYetValid { t: view.t });
    }
    bisect_shift(view, profile, |xi| mass_defect(view, profile, xi))
}

pub(crate) fn bisect_shift(
    view: &LineView,
    profile: &ProfileTable,
    defect: impl Fn(f64) -> f64,
) -> Result<f64> {
    let _ = profile;
    let (mut a, mut b) = (-view.grid.half_width, view.grid.half_width);
    let (fa, fb) = (defect(a), defect(b));
    if !(fa > 0.0 && fb < 0.0) {
        return Err(LabError::Bracket(format!(
            "mass defect does not change sign on [{a}, {b}] (values {fa:e}, {fb:e}); domain too small"
        )));
    }
    while b - a > 1e-10 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if defect(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// `sup |u(x) − φ(x − shift)|` over the interior cells.
pub fn distance_to_shifted_profile(view: &LineView, profile: &ProfileTable, shift: f64) -> f64 {
    let n = view.grid.len();
    (BOUNDARY_MARGIN..n - BOUNDARY_MARGIN)
        .map(|i| (view.line[i] - profile.eval(view.grid.x(i) - shift).phi).abs())
        .fold(0.0, f64::max)
}

/// Anti-derivative of `u − ψ_X` accumulated over the cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiderivativeDiagnostic {
    /// `sup_x |∫_{−L}^x (u − ψ_X)|` over cell faces.
    pub sup: f64,
    /// Value at `x = L`.
    pub total: f64,
}

pub fn antiderivative_diagnostic(
    view: &LineView,
    profile: &ProfileTable,
    shift: f64,
) -> AntiderivativeDiagnostic {
    let mut acc = 0.0;
    let mut sup = 0.0f64;
    for i in 0..view.grid.len() {
        let g = profile.g(view.grid.x(i) - shift);
        acc += (view.line[i] - view.ul(i) * g - view.ur(i) * (1.0 - g)) * view.grid.dx;
        sup = sup.max(acc.abs());
    }
    AntiderivativeDiagnostic { sup, total: acc }
}

/// `max_x t·∂ₓu` with centred differences over the interior.
pub fn oleinik_max(view: &LineView) -> f64 {
    let n = view.grid.len();
    let inv = 0.5 / view.grid.dx;
    (1..n - 1)
        .map(|i| (view.line[i + 1] - view.line[i - 1]) * inv)
        .fold(f64::NEG_INFINITY, f64::max)
        * view.t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::StatePair;
    use crate::profile::{compute_profile, ProfileOptions};

    fn burgers_profile(nu: f64) -> ProfileTable {
        let f = FluxModel::burgers();
        let st = StatePair::new(&f, 1.0, -1.0).unwrap();
        compute_profile(&f, st, nu, ProfileOptions::default()).unwrap()
    }

    #[test]
    fn grid_alignment() {
        let g = LineGrid::new(2.0, 0.25).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.x(0), -1.875);
        assert_eq!(g.periodic_index(0), -8);
        assert!(LineGrid::new(2.0, 0.3).is_err());
    }

    #[test]
    fn blend_identity_with_equal_perturbations() {
        let p = burgers_profile(0.5);
        let w = PerturbationSpec::sine(0.2, 1.0).unwrap();
        let grid = LineGrid::new(4.0, 1.0 / 64.0).unwrap();
        let setup = make_initial(&p, &w, &w, grid).unwrap();
        for i in 0..grid.len() {
            let j = grid.periodic_index(i as i64);
            let wl = setup.left.at_index(j) - setup.left.mean;
            let d = setup.field.samples[i] - p.eval(grid.x(i)).phi - wl;
            assert!(d.abs() < 1e-15);
        }
    }

    #[test]
    fn shift_recovered_for_exact_ansatz() {
        let p = burgers_profile(0.5);
        let zero = PerturbationSpec::zero(1.0);
        let grid = LineGrid::new(20.0, 1.0 / 64.0).unwrap();
        let mut setup = make_initial(&p, &zero, &zero, grid).unwrap();
        for (i, u) in setup.field.samples.iter_mut().enumerate() {
            *u = p.eval(grid.x(i) - 0.37).phi;
        }
        let run = LineRun::new(p.flux(), setup, 0.5, &LineSettings::default()).unwrap();
        let xi = measure_shift(&run.view(), &p).unwrap();
        assert!((xi - 0.37).abs() < 1e-9, "{xi}");
        assert!(distance_to_shifted_profile(&run.view(), &p, 0.37) < 1e-15);
    }
}
