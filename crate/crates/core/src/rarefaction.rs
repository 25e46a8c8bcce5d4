//! Centred rarefaction waves and the convergence gap of line runs.

use crate::cauchy::{oleinik_max, LineRun, LineView, BOUNDARY_MARGIN};
use crate::error::{LabError, Result};
use crate::flux::{FluxModel, StatePair};
use crate::numerics::fit::fit_line;
use crate::numerics::interp::hermite;

const TABLE_SIZE: usize = 10_000;

/// `u^R(x/t)` for `ū_l < ū_r`, with `(f')⁻¹` tabulated on the fan.
#[derive(Debug, Clone)]
pub struct RarefactionWave {
    flux: FluxModel,
    states: StatePair,
    /// Characteristic speeds `f'(u_k)` (strictly increasing).
    speeds: Vec<f64>,
    values: Vec<f64>,
    /// `du/dc = 1/f''(u_k)`.
    slopes: Vec<f64>,
}

impl RarefactionWave {
    pub fn new(flux: &FluxModel, ul: f64, ur: f64) -> Result<Self> {
        let states = StatePair::new(flux, ul, ur)?;
        states.require_rarefaction()?;
        flux.check_domain(ul)?;
        flux.check_domain(ur)?;
        let values: Vec<f64> = (0..TABLE_SIZE)
            .map(|k| ul + (ur - ul) * k as f64 / (TABLE_SIZE - 1) as f64)
            .collect();
        let speeds: Vec<f64> = values.iter().map(|&u| flux.df(u)).collect();
        if speeds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::Construction(
                "f' is not strictly increasing across the fan".into(),
            ));
        }
        let slopes = values.iter().map(|&u| 1.0 / flux.d2f(u)).collect();
        Ok(Self {
            flux: flux.clone(),
            states,
            speeds,
            values,
            slopes,
        })
    }

    pub fn states(&self) -> StatePair {
        self.states
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    /// Fan edges `(f'(ū_l), f'(ū_r))`.
    pub fn fan(&self) -> (f64, f64) {
        (self.speeds[0], self.speeds[TABLE_SIZE - 1])
    }

    /// `(f')⁻¹(c)` clamped to the end states.
    pub fn at_speed(&self, c: f64) -> f64 {
        let (lo, hi) = self.fan();
        if c <= lo {
            return self.states.ul;
        }
        if c >= hi {
            return self.states.ur;
        }
        let k = self.speeds.partition_point(|&v| v <= c).clamp(1, TABLE_SIZE - 1) - 1;
        let h = self.speeds[k + 1] - self.speeds[k];
        let t = (c - self.speeds[k]) / h;
        hermite(
            t,
            self.values[k],
            self.values[k + 1],
            self.slopes[k] * h,
            self.slopes[k + 1] * h,
        )
    }
}

/// `u^R(x, t)`.
pub fn rarefaction_eval(wave: &RarefactionWave, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LabError::Domain {
            value: t,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    Ok(wave.at_speed(x / t))
}

/// `sup |u − u^R|` over the interior cells of a line snapshot.
pub fn gap_at(view: &LineView, wave: &RarefactionWave) -> Result<f64> {
    let n = view.grid.len();
    let mut gap = 0.0f64;
    for i in BOUNDARY_MARGIN..n - BOUNDARY_MARGIN {
        let r = rarefaction_eval(wave, view.grid.x(i), view.t)?;
        gap = gap.max((view.line[i] - r).abs());
    }
    Ok(gap)
}

/// One sample of the gap series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub t: f64,
    pub sup_gap: f64,
    /// `t·max ∂ₓu`.
    pub oleinik: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSeries {
    pub samples: Vec<GapSample>,
    /// Gap at the end is below its value half way and the log–log slope
    /// over the second half is negative.
    pub decreasing_tail: bool,
    /// Fitted exponent of `gap ~ t^{−k}` over the second half.
    pub tail_order: f64,
}

impl GapSeries {
    /// Sample nearest to `t`.
    pub fn at(&self, t: f64) -> Option<GapSample> {
        self.samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
            .copied()
    }

    pub fn oleinik_sup(&self) -> f64 {
        self.samples.iter().map(|s| s.oleinik).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Advances `run` through `times` (increasing, positive) and records the gap
/// to the rarefaction wave at each.
pub fn rarefaction_gap(
    run: &mut LineRun,
    wave: &RarefactionWave,
    times: &[f64],
) -> Result<GapSeries> {
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().map_or(true, |&t| t <= 0.0) {
        return Err(LabError::Invalid(
            "gap times must be positive and increasing".into(),
        ));
    }
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        run.advance_to(t)?;
        let v = run.view();
        samples.push(GapSample {
            t: v.t,
            sup_gap: gap_at(&v, wave)?,
            oleinik: oleinik_max(&v),
        });
    }
    Ok(summarize(samples))
}

fn summarize(samples: Vec<GapSample>) -> GapSeries {
    let n = samples.len();
    if n < 2 {
        return GapSeries {
            samples,
            decreasing_tail: false,
            tail_order: f64::NAN,
        };
    }
    let t_end = samples[n - 1].t;
    let half: Vec<&GapSample> = samples.iter().filter(|s| s.t >= 0.5 * t_end).collect();
    let mid = half[0].sup_gap;
    let fit = if half.len() >= 2 {
        let lx: Vec<f64> = half.iter().map(|s| s.t.ln()).collect();
        let ly: Vec<f64> = half.iter().map(|s| s.sup_gap.ln()).collect();
        fit_line(&lx, &ly)
    } else {
        None
    };
    let slope = fit.map_or(f64::NAN, |f| f.slope);
    GapSeries {
        decreasing_tail: samples[n - 1].sup_gap < mid && slope < 0.0,
        tail_order: -slope,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burgers_fan_is_identity() {
        let w = RarefactionWave::new(&FluxModel::burgers(), -1.0, 1.0).unwrap();
        assert!((rarefaction_eval(&w, 0.5, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(rarefaction_eval(&w, -2.0, 1.0).unwrap(), -1.0);
        assert_eq!(rarefaction_eval(&w, -1.0, 1.0).unwrap(), -1.0);
        assert!(rarefaction_eval(&w, 0.0, 0.0).is_err());
    }

    #[test]
    fn shock_states_are_rejected() {
        assert!(RarefactionWave::new(&FluxModel::burgers(), 1.0, -1.0).is_err());
    }

    #[test]
    fn gap_flux_inverse_matches_derivative() {
        let f = FluxModel::gap(50.0, -0.9, 0.9, 0.225).unwrap();
        let w = RarefactionWave::new(&f, -1.0, 1.0).unwrap();
        for u in [-0.95, -0.3, -0.1, 0.0, 0.2, 0.5, 0.95] {
            assert!((w.at_speed(f.df(u)) - u).abs() < 1e-8, "{u}");
        }
    }
}
