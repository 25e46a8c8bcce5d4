//! Exact viscous Burgers solutions through the Hopf formula
//!
//! `u(x,t) = ∫ u₀(y) e^{−Φ(y)} dy / ∫ e^{−Φ(y)} dy`,
//! `Φ(y) = (x − y)²/(4νt) + U₀(y)/(2ν)`, `U₀(y) = ∫₀^y u₀`.

use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::numerics::quadrature::adaptive_gk15_vec;
use crate::numerics::softplus;
use crate::periodic::PerturbationSpec;

/// Weights below `e^{−CUTOFF}` of the peak are dropped.
const CUTOFF: f64 = 40.0;

/// Initial data with a closed-form antiderivative.
#[derive(Debug, Clone, PartialEq)]
pub enum HopfInitial {
    Constant(f64),
    /// Burgers profile `m − (Δ/2)·tanh(λy)` with `φ(0) = m`.
    Profile { ul: f64, ur: f64 },
    /// Profile plus the same periodic perturbation on both sides.
    ProfilePlusPeriodic { ul: f64, ur: f64, w: PerturbationSpec },
    /// `ū_l + w_l` for `y < 0`, `ū_r + w_r` for `y > 0`.
    Riemann {
        ul: f64,
        ur: f64,
        wl: PerturbationSpec,
        wr: PerturbationSpec,
    },
    /// `ū + w` on the whole line.
    Periodic { mean: f64, w: PerturbationSpec },
    /// Node values at `x0 + k·dx`, linear in between, constant beyond.
    Tabulated { x0: f64, dx: f64, values: Vec<f64> },
}

/// Which periodic component to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Viscous Burgers initial value problem.
#[derive(Debug, Clone)]
pub struct HopfData {
    initial: HopfInitial,
    nu: f64,
    /// Cumulative integral at tabulated nodes.
    table_integral: Vec<f64>,
}

impl HopfData {
    /// The Hopf formula exists for `u²/2` only.
    pub fn new(flux: &FluxModel, initial: HopfInitial, nu: f64) -> Result<Self> {
        if !flux.is_burgers() {
            return Err(LabError::Unsupported(
                "the Hopf formula needs the Burgers flux u²/2".into(),
            ));
        }
        Self::burgers(initial, nu)
    }

    pub fn burgers(initial: HopfInitial, nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(LabError::Invalid(format!("viscosity must be positive, got {nu}")));
        }
        let table_integral = match &initial {
            HopfInitial::Profile { ul, ur } | HopfInitial::ProfilePlusPeriodic { ul, ur, .. } => {
                if !(ul > ur) {
                    return Err(LabError::Ordering(format!(
                        "profile data needs ū_l > ū_r, got {ul}, {ur}"
                    )));
                }
                Vec::new()
            }
            HopfInitial::Tabulated { dx, values, .. } => {
                if values.len() < 2 || !(*dx > 0.0) {
                    return Err(LabError::Invalid(
                        "tabulated data needs two or more samples and dx > 0".into(),
                    ));
                }
                let mut cum = vec![0.0; values.len()];
                for k in 1..values.len() {
                    cum[k] = cum[k - 1] + 0.5 * dx * (values[k - 1] + values[k]);
                }
                cum
            }
            _ => Vec::new(),
        };
        Ok(Self {
            initial,
            nu,
            table_integral,
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn initial(&self) -> &HopfInitial {
        &self.initial
    }

    /// `λ = (ū_l − ū_r)/(4ν)` for profile data.
    pub fn lambda(&self) -> Option<f64> {
        match &self.initial {
            HopfInitial::Profile { ul, ur } | HopfInitial::ProfilePlusPeriodic { ul, ur, .. } => {
                Some((ul - ur) / (4.0 * self.nu))
            }
            _ => None,
        }
    }

    fn profile_value(&self, ul: f64, ur: f64, y: f64) -> f64 {
        let lam = (ul - ur) / (4.0 * self.nu);
        0.5 * (ul + ur) - 0.5 * (ul - ur) * (lam * y).tanh()
    }

    /// `∫₀^y` of the profile: `m y − (Δ/(2λ)) ln cosh(λy)`.
    fn profile_integral(&self, ul: f64, ur: f64, y: f64) -> f64 {
        let delta = ul - ur;
        let lam = delta / (4.0 * self.nu);
        let a = (lam * y).abs();
        let log_cosh = a + softplus(-2.0 * a) - std::f64::consts::LN_2;
        0.5 * (ul + ur) * y - delta / (2.0 * lam) * log_cosh
    }

    /// `u₀(y)`.
    pub fn u0(&self, y: f64) -> f64 {
        match &self.initial {
            HopfInitial::Constant(c) => *c,
            HopfInitial::Profile { ul, ur } => self.profile_value(*ul, *ur, y),
            HopfInitial::ProfilePlusPeriodic { ul, ur, w } => {
                self.profile_value(*ul, *ur, y) + w.value(y)
            }
            HopfInitial::Riemann { ul, ur, wl, wr } => {
                if y < 0.0 {
                    ul + wl.value(y)
                } else {
                    ur + wr.value(y)
                }
            }
            HopfInitial::Periodic { mean, w } => mean + w.value(y),
            HopfInitial::Tabulated { x0, dx, values } => {
                let pos = (y - x0) / dx;
                if pos <= 0.0 {
                    values[0]
                } else if pos >= (values.len() - 1) as f64 {
                    values[values.len() - 1]
                } else {
                    let k = pos.floor() as usize;
                    let t = pos - k as f64;
                    values[k] * (1.0 - t) + values[k + 1] * t
                }
            }
        }
    }

    /// `U₀(y) = ∫₀^y u₀` (tabulated data: anchored at the first node instead,
    /// which only shifts `Φ` by a constant).
    pub fn antiderivative(&self, y: f64) -> f64 {
        match &self.initial {
            HopfInitial::Constant(c) => c * y,
            HopfInitial::Profile { ul, ur } => self.profile_integral(*ul, *ur, y),
            HopfInitial::ProfilePlusPeriodic { ul, ur, w } => {
                self.profile_integral(*ul, *ur, y) + w.antiderivative(y)
            }
            HopfInitial::Riemann { ul, ur, wl, wr } => {
                if y < 0.0 {
                    ul * y + wl.antiderivative(y)
                } else {
                    ur * y + wr.antiderivative(y)
                }
            }
            HopfInitial::Periodic { mean, w } => mean * y + w.antiderivative(y),
            HopfInitial::Tabulated { x0, dx, values } => {
                let last = values.len() - 1;
                let pos = (y - x0) / dx;
                if pos <= 0.0 {
                    values[0] * (y - x0)
                } else if pos >= last as f64 {
                    self.table_integral[last] + values[last] * (y - x0 - last as f64 * dx)
                } else {
                    let k = pos.floor() as usize;
                    let t = pos - k as f64;
                    let (a, b) = (values[k], values[k + 1]);
                    self.table_integral[k] + dx * (a * t + 0.5 * (b - a) * t * t)
                }
            }
        }
    }

    /// Bounds of `u₀`.
    pub fn bounds(&self) -> (f64, f64) {
        match &self.initial {
            HopfInitial::Constant(c) => (*c, *c),
            HopfInitial::Profile { ul, ur } => (*ur, *ul),
            HopfInitial::ProfilePlusPeriodic { ul, ur, w } => {
                (ur - w.sup_norm(), ul + w.sup_norm())
            }
            HopfInitial::Riemann { ul, ur, wl, wr } => (
                (ul - wl.sup_norm()).min(ur - wr.sup_norm()),
                (ul + wl.sup_norm()).max(ur + wr.sup_norm()),
            ),
            HopfInitial::Periodic { mean, w } => (mean - w.sup_norm(), mean + w.sup_norm()),
            HopfInitial::Tabulated { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                }),
        }
    }

    /// Shortest length on which `u₀` varies.
    fn feature_length(&self) -> f64 {
        let per = |w: &PerturbationSpec| {
            if w.is_zero() {
                f64::INFINITY
            } else {
                w.period() / 8.0
            }
        };
        let prof = |ul: f64, ur: f64| self.nu / (ul - ur);
        match &self.initial {
            HopfInitial::Constant(_) => f64::INFINITY,
            HopfInitial::Profile { ul, ur } => prof(*ul, *ur),
            HopfInitial::ProfilePlusPeriodic { ul, ur, w } => prof(*ul, *ur).min(per(w)),
            HopfInitial::Riemann { wl, wr, .. } => per(wl).min(per(wr)),
            HopfInitial::Periodic { w, .. } => per(w),
            HopfInitial::Tabulated { dx, .. } => 2.0 * dx,
        }
    }

    /// Periodic data `ū_side + w` seen far on one side.
    pub fn side_data(&self, side: Side) -> Result<HopfData> {
        let (mean, w) = match (&self.initial, side) {
            (HopfInitial::Constant(c), _) => (*c, PerturbationSpec::zero(1.0)),
            (HopfInitial::Profile { ul, .. }, Side::Left) => (*ul, PerturbationSpec::zero(1.0)),
            (HopfInitial::Profile { ur, .. }, Side::Right) => (*ur, PerturbationSpec::zero(1.0)),
            (HopfInitial::ProfilePlusPeriodic { ul, w, .. }, Side::Left) => (*ul, w.clone()),
            (HopfInitial::ProfilePlusPeriodic { ur, w, .. }, Side::Right) => (*ur, w.clone()),
            (HopfInitial::Riemann { ul, wl, .. }, Side::Left) => (*ul, wl.clone()),
            (HopfInitial::Riemann { ur, wr, .. }, Side::Right) => (*ur, wr.clone()),
            (HopfInitial::Periodic { mean, w }, _) => (*mean, w.clone()),
            (HopfInitial::Tabulated { .. }, _) => {
                return Err(LabError::Unsupported(
                    "tabulated data has no periodic components".into(),
                ))
            }
        };
        HopfData::burgers(HopfInitial::Periodic { mean, w }, self.nu)
    }

    /// Returns `(ln ∫e^{−Φ}, ∫u₀e^{−Φ}/∫e^{−Φ})`.
    fn integrate(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(LabError::Domain {
                value: t,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        let nu = self.nu;
        let (umin, umax) = self.bounds();
        let half_gauss = (4.0 * nu * t * CUTOFF).sqrt();
        let a = x - t * umax - half_gauss;
        let b = x - t * umin + half_gauss;
        let phi = |y: f64| (x - y) * (x - y) / (4.0 * nu * t) + self.antiderivative(y) / (2.0 * nu);

        let panel = (2.0 * nu * t).sqrt().min(self.feature_length());
        let panels = (((b - a) / panel).ceil() as usize).clamp(4, 20_000);
        let h = (b - a) / panels as f64;
        let sub = 4;
        let mut phi_min = f64::INFINITY;
        for k in 0..=panels * sub {
            phi_min = phi_min.min(phi(a + k as f64 * h / sub as f64));
        }
        let scale = umin.abs().max(umax.abs()).max(1.0);
        let integrand = |y: f64| {
            let w = (phi_min - phi(y)).exp();
            [w, self.u0(y) * w]
        };
        let mut total = [0.0, 0.0];
        for k in 0..panels {
            let lo = a + k as f64 * h;
            let (v, _) = adaptive_gk15_vec(lo, lo + h, 1e-17 * h, 1e-13, scale, &integrand);
            total[0] += v[0];
            total[1] += v[1];
        }
        Ok((total[0].ln() - phi_min, total[1] / total[0]))
    }

    /// `u(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.integrate(x, t)?.1)
    }

    /// `ln ∫ exp(−(x−y)²/(4νt) − U₀(y)/(2ν)) dy`.
    pub fn log_weight(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.integrate(x, t)?.0)
    }
}

/// `u(x, t)` by the Hopf formula.
pub fn hopf_eval(data: &HopfData, x: f64, t: f64) -> Result<f64> {
    data.eval(x, t)
}

/// `u_side(x, t)`: the periodic solution from `ū_side + w₀`.
pub fn periodic_component_eval(data: &HopfData, side: Side, x: f64, t: f64) -> Result<f64> {
    data.side_data(side)?.eval(x, t)
}

/// `ln Q_side(x, t)` for the P/Q decomposition of the periodic components.
pub fn log_q(data: &HopfData, side: Side, x: f64, t: f64) -> Result<f64> {
    data.side_data(side)?.log_weight(x, t)
}

/// `sup_x |u(x,t) − ψ_{st}(x,t)|` for profile-plus-periodic data, with the
/// ansatz built from the two periodic components and the closed-form `g`.
pub fn coincidence_gap_at(data: &HopfData, t: f64) -> Result<f64> {
    let (ul, ur, w) = match data.initial() {
        HopfInitial::ProfilePlusPeriodic { ul, ur, w } => (*ul, *ur, w.clone()),
        HopfInitial::Profile { ul, ur } => (*ul, *ur, PerturbationSpec::zero(1.0)),
        _ => {
            return Err(LabError::Unsupported(
                "coincidence needs a Burgers profile with identical perturbations".into(),
            ))
        }
    };
    let lam = (ul - ur) / (4.0 * data.nu());
    let s = 0.5 * (ul + ur);
    let centre = s * t;
    let left = data.side_data(Side::Left)?;
    let right = data.side_data(Side::Right)?;
    let reach = 8.0 / lam + w.period();
    let step = (w.period() / 32.0).min(1.0 / (8.0 * lam));
    let n = (2.0 * reach / step).ceil() as usize;
    let mut gap = 0.0f64;
    for k in 0..=n {
        let x = centre - reach + k as f64 * step;
        let g = 0.5 * (1.0 - (lam * (x - centre)).tanh());
        let psi = left.eval(x, t)? * g + right.eval(x, t)? * (1.0 - g);
        gap = gap.max((data.eval(x, t)? - psi).abs());
    }
    Ok(gap)
}

/// Coincidence gap at `t_k = k·p/(ū_l − ū_r)`.
pub fn coincidence_check(data: &HopfData, k: u32) -> Result<f64> {
    let (ul, ur, p) = match data.initial() {
        HopfInitial::ProfilePlusPeriodic { ul, ur, w } => (*ul, *ur, w.period()),
        _ => {
            return Err(LabError::Unsupported(
                "coincidence needs a Burgers profile with identical perturbations".into(),
            ))
        }
    };
    if k == 0 {
        return Err(LabError::Invalid("k must be positive".into()));
    }
    coincidence_gap_at(data, k as f64 * p / (ul - ur))
}

/// Lattice time `t_k`.
pub fn coincidence_time(ul: f64, ur: f64, period: f64, k: u32) -> f64 {
    k as f64 * period / (ul - ur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_is_preserved() {
        let d = HopfData::burgers(HopfInitial::Constant(0.7), 0.3).unwrap();
        for (x, t) in [(0.0, 0.1), (5.0, 3.0), (-2.0, 40.0)] {
            assert!((d.eval(x, t).unwrap() - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn non_positive_time_is_domain_error() {
        let d = HopfData::burgers(HopfInitial::Constant(0.7), 0.3).unwrap();
        assert!(matches!(d.eval(0.0, 0.0), Err(LabError::Domain { .. })));
    }

    #[test]
    fn non_burgers_flux_is_unsupported() {
        let f = FluxModel::quadratic(2.0).unwrap();
        assert!(matches!(
            HopfData::new(&f, HopfInitial::Constant(0.0), 1.0),
            Err(LabError::Unsupported(_))
        ));
    }

    #[test]
    fn antiderivative_matches_data() {
        let w = PerturbationSpec::sine(0.2, 1.0).unwrap();
        let d = HopfData::burgers(HopfInitial::ProfilePlusPeriodic { ul: 1.0, ur: -1.0, w }, 0.5)
            .unwrap();
        let h = 1e-5;
        for y in [-7.1, -0.3, 0.0, 0.9, 12.0] {
            let deriv = (d.antiderivative(y + h) - d.antiderivative(y - h)) / (2.0 * h);
            assert!((deriv - d.u0(y)).abs() < 1e-8, "{y}");
        }
    }
}
