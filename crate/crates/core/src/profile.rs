//! Viscous shock profiles from the first-integral ODE
//! `ν φ' = f(φ) − f(ū_l) − s(φ − ū_l)`.
//!
//! The profile is integrated in the logit variable `z = ln((1 − g)/g)`, where
//! `g = (φ − ū_r)/(ū_l − ū_r)`. In that variable the ODE becomes
//! `z' = (ū_l − ū_r)·f[ū_r, φ, ū_l]/ν`, which is bounded above and below by
//! the curvature of `f`, so the tails are exactly linear in `z` and no
//! stiffness appears near the end states.

use crate::error::{LabError, Result};
use crate::flux::{FluxModel, StatePair};
use crate::numerics::interp::{fritsch_carlson_limit, hermite};
use crate::numerics::logistic_decreasing;

/// Integration stops once `|z|` exceeds this (`g < 3·10⁻¹⁷`); beyond it the
/// table continues with the exact exponential asymptote.
const Z_CUT: f64 = 38.0;
/// Largest change of `z` between adjacent table nodes.
const Z_INCREMENT: f64 = 0.02;

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    /// Upper bound on the tabulated half-width; `None` tabulates until the
    /// profile reaches its end states to machine precision.
    pub half_width: Option<f64>,
    /// Local error tolerance of the adaptive RK4 integration (on `z`).
    pub tol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            half_width: None,
            tol: 1e-10,
        }
    }
}

/// Profile quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub phi: f64,
    pub g: f64,
    pub gp: f64,
    pub gpp: f64,
}

/// One row of the profile table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub x: f64,
    pub phi: f64,
    pub g: f64,
    pub gp: f64,
    pub gpp: f64,
    /// `−g'/((ū_l − ū_r) g (1 − g))`.
    pub ratio: f64,
}

/// Tabulated viscous shock profile, normalized by `φ(0) = (ū_l + ū_r)/2`.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    flux: FluxModel,
    states: StatePair,
    nu: f64,
    x_first: f64,
    h: f64,
    z: Vec<f64>,
    dz: Vec<f64>,
    ddz: Vec<f64>,
    /// `z'` at `+∞`: `(s − f'(ū_r))/ν`.
    slope_right: f64,
    /// `z'` at `−∞`: `(f'(ū_l) − s)/ν`.
    slope_left: f64,
    beta1: f64,
    beta2: f64,
}

/// Integrates the profile ODE and tabulates `z`, `z'`, `z''` on a uniform grid.
pub fn compute_profile(
    model: &FluxModel,
    states: StatePair,
    nu: f64,
    opts: ProfileOptions,
) -> Result<ProfileTable> {
    states.require_shock()?;
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(LabError::Invalid(format!("viscosity must be positive, got {nu}")));
    }
    if !(opts.tol > 0.0) {
        return Err(LabError::Invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    model.check_domain(states.ul)?;
    model.check_domain(states.ur)?;
    let delta = states.jump();
    let rhs = |z: f64| -> f64 {
        let phi = states.ur + delta * logistic_decreasing(z);
        delta * model.second_divided_difference(states.ur, phi, states.ul) / nu
    };

    let zmax_rate = (0..=400)
        .map(|i| rhs(-Z_CUT + 2.0 * Z_CUT * i as f64 / 400.0))
        .fold(0.0, f64::max);
    if !(zmax_rate > 0.0 && zmax_rate.is_finite()) {
        return Err(LabError::Construction(
            "profile ODE right-hand side is not positive".into(),
        ));
    }
    let h = Z_INCREMENT / zmax_rate;
    let max_nodes = opts
        .half_width
        .map(|w| (w / h).ceil() as usize)
        .unwrap_or(usize::MAX);

    let forward = integrate_branch(&rhs, h, opts.tol, max_nodes)?;
    let backward = integrate_branch(&rhs, -h, opts.tol, max_nodes)?;

    let mut z: Vec<f64> = backward.iter().rev().copied().collect();
    z.extend_from_slice(&forward[1..]);
    let x_first = -((backward.len() - 1) as f64) * h;

    let mut dz: Vec<f64> = z.iter().map(|&zi| rhs(zi)).collect();
    fritsch_carlson_limit(h, &z, &mut dz);
    let ddz = z
        .iter()
        .zip(&dz)
        .map(|(&zi, &dzi)| {
            let g = logistic_decreasing(zi);
            let phi = states.ur + delta * g;
            dzi * ((model.df(phi) - states.s) / nu + dzi * (1.0 - 2.0 * g))
        })
        .collect();

    let (beta1, beta2) = dz.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| {
        (lo.min(d / delta), hi.max(d / delta))
    });

    Ok(ProfileTable {
        flux: model.clone(),
        states,
        nu,
        x_first,
        h,
        z,
        dz,
        ddz,
        slope_right: (states.s - model.df(states.ur)) / nu,
        slope_left: (model.df(states.ul) - states.s) / nu,
        beta1,
        beta2,
    })
}

/// Integrates `z' = rhs(z)` from `z(0) = 0` with node spacing `h` (signed)
/// until `|z| ≥ Z_CUT` or `max_nodes` nodes are produced.
fn integrate_branch(
    rhs: &impl Fn(f64) -> f64,
    h: f64,
    tol: f64,
    max_nodes: usize,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0];
    let mut z = 0.0f64;
    while z.abs() < Z_CUT && out.len() <= max_nodes {
        z = adaptive_rk4(rhs, z, h, tol, out.len() as f64 * h)?;
        out.push(z);
    }
    Ok(out)
}

fn rk4_step(rhs: &impl Fn(f64) -> f64, z: f64, h: f64) -> f64 {
    let k1 = rhs(z);
    let k2 = rhs(z + 0.5 * h * k1);
    let k3 = rhs(z + 0.5 * h * k2);
    let k4 = rhs(z + h * k3);
    z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Step-doubling RK4 over one node interval, subdividing until the
/// Richardson error estimate meets `tol`.
fn adaptive_rk4(rhs: &impl Fn(f64) -> f64, z: f64, h: f64, tol: f64, x: f64) -> Result<f64> {
    let full = rk4_step(rhs, z, h);
    let half = rk4_step(rhs, rk4_step(rhs, z, 0.5 * h), 0.5 * h);
    let err = (half - full).abs() / 15.0;
    if err <= tol {
        return Ok(half + (half - full) / 15.0);
    }
    if h.abs() < 1e-12 {
        return Err(LabError::Stiffness { x, step: h });
    }
    let mid = adaptive_rk4(rhs, z, 0.5 * h, 0.5 * tol, x)?;
    adaptive_rk4(rhs, mid, 0.5 * h, 0.5 * tol, x + 0.5 * h)
}

impl ProfileTable {
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn states(&self) -> StatePair {
        self.states
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    /// Smallest tabulated ratio `−g'/(Δ g(1 − g))`.
    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    /// Largest tabulated ratio.
    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    /// `min(β₀, β₁, β₂)`.
    pub fn beta(&self, beta0: f64) -> f64 {
        beta0.min(self.beta1).min(self.beta2)
    }

    /// Exponential rates of `g → 0` at `+∞` and `1 − g → 0` at `−∞`.
    pub fn tail_rates(&self) -> (f64, f64) {
        (self.slope_left, self.slope_right)
    }

    /// Grid spacing of the table.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Largest `z'` on the table; `1/max_logit_slope` is the profile's
    /// narrowest length scale.
    pub fn max_logit_slope(&self) -> f64 {
        self.beta2 * self.states.jump()
    }

    /// Abscissas of the table nodes (0 is a node).
    pub fn grid(&self) -> Vec<f64> {
        (0..self.z.len())
            .map(|i| self.x_first + i as f64 * self.h)
            .collect()
    }

    /// Tabulated rows, including the ratio at every node.
    pub fn samples(&self) -> Vec<ProfileSample> {
        let delta = self.states.jump();
        self.grid()
            .into_iter()
            .zip(&self.dz)
            .map(|(x, &dz)| {
                let p = self.eval(x);
                ProfileSample {
                    x,
                    phi: p.phi,
                    g: p.g,
                    gp: p.gp,
                    gpp: p.gpp,
                    ratio: dz / delta,
                }
            })
            .collect()
    }

    /// Radius `R` with `g(R) < tol` and `1 − g(−R) < tol`.
    pub fn truncation_radius(&self, tol: f64) -> f64 {
        let zt = (1.0 / tol).ln();
        let right = self.x_at_logit(zt);
        let left = -self.x_at_logit(-zt);
        right.max(left)
    }

    fn x_at_logit(&self, target: f64) -> f64 {
        let x_last = self.x_first + (self.z.len() - 1) as f64 * self.h;
        let z_last = *self.z.last().unwrap();
        let z_first = self.z[0];
        if target >= z_last {
            return x_last + (target - z_last) / self.slope_right;
        }
        if target <= z_first {
            return self.x_first - (z_first - target) / self.slope_left;
        }
        let k = self.z.partition_point(|&z| z < target);
        self.x_first + k as f64 * self.h
    }

    /// Logit `z(y)` and its derivative.
    #[inline]
    fn logit(&self, y: f64) -> (f64, f64) {
        let pos = (y - self.x_first) / self.h;
        let n = self.z.len();
        if pos < 0.0 {
            return (self.z[0] + self.slope_left * (y - self.x_first), self.slope_left);
        }
        if pos > (n - 1) as f64 {
            let x_last = self.x_first + (n - 1) as f64 * self.h;
            return (self.z[n - 1] + self.slope_right * (y - x_last), self.slope_right);
        }
        let k = (pos.floor() as usize).min(n - 2);
        let t = pos - k as f64;
        let h = self.h;
        let z = hermite(t, self.z[k], self.z[k + 1], self.dz[k] * h, self.dz[k + 1] * h);
        let dz = hermite(t, self.dz[k], self.dz[k + 1], self.ddz[k] * h, self.ddz[k + 1] * h);
        (z, dz)
    }

    /// Unshifted evaluation at `y`.
    #[inline]
    pub fn eval(&self, y: f64) -> ProfilePoint {
        let (z, dz) = self.logit(y);
        let g = logistic_decreasing(z);
        let one_minus_g = logistic_decreasing(-z);
        let delta = self.states.jump();
        let phi = if g < 0.5 {
            self.states.ur + delta * g
        } else {
            self.states.ul - delta * one_minus_g
        };
        let gp = -g * one_minus_g * dz;
        let gpp = (self.flux.df(phi) - self.states.s) * gp / self.nu;
        ProfilePoint { phi, g, gp, gpp }
    }

    /// Only `g` at `y` (cheaper than [`Self::eval`]).
    #[inline]
    pub fn g(&self, y: f64) -> f64 {
        logistic_decreasing(self.logit(y).0)
    }

    /// `g` and `g'` at `y`.
    #[inline]
    pub fn g_and_slope(&self, y: f64) -> (f64, f64) {
        let (z, dz) = self.logit(y);
        let g = logistic_decreasing(z);
        (g, -g * logistic_decreasing(-z) * dz)
    }
}

/// Evaluates the profile at `x − ξ`.
pub fn profile_at(profile: &ProfileTable, x: f64, shift: f64) -> ProfilePoint {
    profile.eval(x - shift)
}

/// `(β₁, β₂)`: extreme values of `−g'/((ū_l − ū_r) g (1 − g))` on the grid.
pub fn g_ratio_bounds(profile: &ProfileTable) -> (f64, f64) {
    (profile.beta1, profile.beta2)
}
