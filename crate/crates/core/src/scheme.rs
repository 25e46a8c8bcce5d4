//! Conservative finite-volume discretization of `u_t + f(u)_x = ν u_xx` and
//! the time integrators shared by the periodic and line solvers.
//!
//! Faces carry the central average of MUSCL (van Leer) reconstructed states
//! plus local Lax–Friedrichs dissipation; diffusion is the central second
//! difference. Cell arrays are passed with two ghost cells on each side.

use crate::flux::FluxModel;

/// Time integrator choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    /// Classical explicit RK4 on the full operator with
    /// `dt = 0.4·min(dx/max|f'|, dx²/(2ν))`.
    Rk4,
    /// IMEX ARS(2,2,2): explicit convection, implicit diffusion, with
    /// `dt = 0.4·dx/max|f'|`.
    #[default]
    Imex,
}

impl TimeScheme {
    pub fn name(self) -> &'static str {
        match self {
            TimeScheme::Rk4 => "rk4",
            TimeScheme::Imex => "imex",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rk4" => Some(TimeScheme::Rk4),
            "imex" => Some(TimeScheme::Imex),
            _ => None,
        }
    }

    /// Largest admissible step. `max_speed` bounds `|f'|` over the data range;
    /// `longest_period` caps IMEX steps so the slowest periodic mode is still
    /// resolved in time.
    pub fn max_dt(self, dx: f64, max_speed: f64, nu: f64, longest_period: f64) -> f64 {
        let convective = if max_speed > 0.0 {
            dx / max_speed
        } else {
            f64::INFINITY
        };
        match self {
            TimeScheme::Rk4 => 0.4 * convective.min(dx * dx / (2.0 * nu)),
            TimeScheme::Imex => {
                let k = 2.0 * std::f64::consts::PI / longest_period;
                (0.4 * convective).min(0.02 / (nu * k * k))
            }
        }
    }
}

#[inline]
fn van_leer(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

/// Spatial operator on a uniform grid.
#[derive(Debug, Clone)]
pub struct FvOperator {
    pub flux: FluxModel,
    pub nu: f64,
    pub dx: f64,
}

impl FvOperator {
    /// Numerical convective flux through the face between `u0` and `u1`,
    /// with outer neighbours `um` and `u2`.
    #[inline]
    pub fn face_flux(&self, um: f64, u0: f64, u1: f64, u2: f64) -> f64 {
        let d = u1 - u0;
        let left = u0 + 0.5 * van_leer(u0 - um, d);
        let right = u1 - 0.5 * van_leer(d, u2 - u1);
        let a = self.flux.df(left).abs().max(self.flux.df(right).abs());
        0.5 * (self.flux.f(left) + self.flux.f(right)) - 0.5 * a * (right - left)
    }

    /// Writes `−(F_{i+½} − F_{i−½})/dx` for the `ext.len() − 4` interior cells.
    pub fn convective(&self, ext: &[f64], out: &mut [f64]) {
        let n = out.len();
        debug_assert_eq!(ext.len(), n + 4);
        let inv_dx = 1.0 / self.dx;
        let mut left = self.face_flux(ext[0], ext[1], ext[2], ext[3]);
        for i in 0..n {
            let right = self.face_flux(ext[i + 1], ext[i + 2], ext[i + 3], ext[i + 4]);
            out[i] = -(right - left) * inv_dx;
            left = right;
        }
    }

    /// Writes `ν (u_{i+1} − 2u_i + u_{i−1})/dx²` for the interior cells.
    pub fn diffusive(&self, ext: &[f64], out: &mut [f64]) {
        let c = self.nu / (self.dx * self.dx);
        for (i, o) in out.iter_mut().enumerate() {
            *o = c * (ext[i + 3] - 2.0 * ext[i + 2] + ext[i + 1]);
        }
    }

    /// Implicit-diffusion coefficient `r = c·ν/dx²` for stage weight `c·dt`.
    pub fn implicit_ratio(&self, c_dt: f64) -> f64 {
        c_dt * self.nu / (self.dx * self.dx)
    }
}

/// Fills `ext` (length `u.len() + 4`) with the periodic extension of `u`.
pub fn extend_periodic(u: &[f64], ext: &mut [f64]) {
    let n = u.len();
    ext[0] = u[n - 2];
    ext[1] = u[n - 1];
    ext[2..n + 2].copy_from_slice(u);
    ext[n + 2] = u[0];
    ext[n + 3] = u[1];
}

/// A semi-discrete system split into convective and diffusive parts.
pub trait SplitSystem {
    fn dim(&self) -> usize;
    fn convective(&mut self, u: &[f64], out: &mut [f64]);
    fn diffusive(&mut self, u: &[f64], out: &mut [f64]);
    /// Prepares `solve_implicit` for the fixed stage coefficient `c_dt`.
    fn prepare_implicit(&mut self, c_dt: f64);
    /// Solves `(I − c_dt·ν D₂) v = b` in place.
    fn solve_implicit(&mut self, b: &mut [f64]);
}

/// Fixed-step integrator with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Integrator {
    scheme: TimeScheme,
    dt: f64,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    base: Vec<f64>,
}

const ARS_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

impl Integrator {
    pub fn new<S: SplitSystem>(scheme: TimeScheme, dt: f64, sys: &mut S) -> Self {
        let n = sys.dim();
        if scheme == TimeScheme::Imex {
            sys.prepare_implicit(ARS_GAMMA * dt);
        }
        Self {
            scheme,
            dt,
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            stage: vec![0.0; n],
            base: vec![0.0; n],
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> TimeScheme {
        self.scheme
    }

    /// Advances `u` by one step.
    pub fn step<S: SplitSystem>(&mut self, sys: &mut S, u: &mut [f64]) {
        match self.scheme {
            TimeScheme::Rk4 => self.step_rk4(sys, u),
            TimeScheme::Imex => self.step_imex(sys, u),
        }
    }

    fn full_rhs<S: SplitSystem>(sys: &mut S, u: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        sys.convective(u, out);
        sys.diffusive(u, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += s;
        }
    }

    fn step_rk4<S: SplitSystem>(&mut self, sys: &mut S, u: &mut [f64]) {
        let dt = self.dt;
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;
        let scratch = &mut self.base;
        Self::full_rhs(sys, u, k1, scratch);
        for i in 0..u.len() {
            stage[i] = u[i] + 0.5 * dt * k1[i];
        }
        Self::full_rhs(sys, stage, k2, scratch);
        for i in 0..u.len() {
            stage[i] = u[i] + 0.5 * dt * k2[i];
        }
        Self::full_rhs(sys, stage, k3, scratch);
        for i in 0..u.len() {
            stage[i] = u[i] + dt * k3[i];
        }
        Self::full_rhs(sys, stage, k4, scratch);
        for i in 0..u.len() {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    fn step_imex<S: SplitSystem>(&mut self, sys: &mut S, u: &mut [f64]) {
        let dt = self.dt;
        let g = ARS_GAMMA;
        let d = 1.0 - 1.0 / (2.0 * g);
        let [e1, e2, i2, _] = &mut self.k;
        let stage = &mut self.stage;
        sys.convective(u, e1);
        for j in 0..u.len() {
            stage[j] = u[j] + dt * g * e1[j];
        }
        sys.solve_implicit(stage);
        sys.diffusive(stage, i2);
        sys.convective(stage, e2);
        for j in 0..u.len() {
            u[j] += dt * (d * e1[j] + (1.0 - d) * e2[j] + (1.0 - g) * i2[j]);
        }
        sys.solve_implicit(u);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state_has_zero_flux_divergence() {
        let op = FvOperator {
            flux: FluxModel::burgers(),
            nu: 0.3,
            dx: 0.01,
        };
        let ext = vec![0.7; 14];
        let mut out = vec![1.0; 10];
        op.convective(&ext, &mut out);
        assert!(out.iter().all(|v| *v == 0.0));
        op.diffusive(&ext, &mut out);
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn face_flux_is_consistent() {
        let op = FvOperator {
            flux: FluxModel::burgers(),
            nu: 0.0,
            dx: 1.0,
        };
        assert_eq!(op.face_flux(2.0, 2.0, 2.0, 2.0), 2.0);
    }
}
