//! Strictly convex flux models and Rankine–Hugoniot speeds.

use crate::error::{LabError, Result};
use crate::numerics::quadrature::gauss_legendre5;

/// Which derivative `evaluate` returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Value,
    First,
    Second,
}

/// Flux shapes supported by [`FluxModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum FluxKind {
    /// `u²/2`.
    Burgers,
    /// `a·u²/2` with `a > 0`.
    Quadratic { a: f64 },
    /// `u²/(2n)` below the lower knot, `u²/2` above the upper knot.
    Gap(GapFlux),
    /// Piecewise-linear curvature table integrated twice.
    Tabulated(TabulatedFlux),
}

/// A smooth strictly convex flux restricted to an evaluation domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxModel {
    kind: FluxKind,
    domain: (f64, f64),
    convexity_floor: f64,
}

impl FluxModel {
    pub fn burgers() -> Self {
        Self::from_kind(FluxKind::Burgers, (f64::NEG_INFINITY, f64::INFINITY))
    }

    pub fn quadratic(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(LabError::Construction(format!(
                "quadratic coefficient must be positive, got {a}"
            )));
        }
        Ok(Self::from_kind(
            FluxKind::Quadratic { a },
            (f64::NEG_INFINITY, f64::INFINITY),
        ))
    }

    pub fn gap(n: f64, u_lo: f64, u_hi: f64, blend_resolution: f64) -> Result<Self> {
        build_gap_flux(n, u_lo, u_hi, blend_resolution)
    }

    pub fn tabulated(table: TabulatedFlux) -> Self {
        let domain = (table.nodes[0], *table.nodes.last().unwrap());
        Self::from_kind(FluxKind::Tabulated(table), domain)
    }

    fn from_kind(kind: FluxKind, domain: (f64, f64)) -> Self {
        let mut model = Self {
            kind,
            domain,
            convexity_floor: 0.0,
        };
        model.convexity_floor = model.curvature_min_on(domain.0, domain.1);
        model
    }

    /// Restricts evaluation to `[lo, hi]` and recomputes the convexity floor.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(LabError::Construction(format!(
                "empty evaluation domain [{lo}, {hi}]"
            )));
        }
        if let FluxKind::Tabulated(t) = &self.kind {
            let (a, b) = (t.nodes[0], *t.nodes.last().unwrap());
            if lo < a || hi > b {
                return Err(LabError::Construction(format!(
                    "domain [{lo}, {hi}] exceeds curvature table range [{a}, {b}]"
                )));
            }
        }
        self.domain = (lo, hi);
        self.convexity_floor = self.curvature_min_on(lo, hi);
        Ok(self)
    }

    /// The default experiment domain `[min(states) − 2, max(states) + 2]`.
    pub fn with_domain_for_states(self, states: &[f64]) -> Result<Self> {
        let lo = states.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = states.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.with_domain(lo - 2.0, hi + 2.0)
    }

    pub fn kind(&self) -> &FluxKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// `inf f''` over the evaluation domain.
    pub fn convexity_floor(&self) -> f64 {
        self.convexity_floor
    }

    /// True for `u²/2` (including the quadratic kind with `a = 1`).
    pub fn is_burgers(&self) -> bool {
        match self.kind {
            FluxKind::Burgers => true,
            FluxKind::Quadratic { a } => a == 1.0,
            _ => false,
        }
    }

    pub fn check_domain(&self, u: f64) -> Result<()> {
        if u >= self.domain.0 && u <= self.domain.1 {
            Ok(())
        } else {
            Err(LabError::Domain {
                value: u,
                min: self.domain.0,
                max: self.domain.1,
            })
        }
    }

    /// Checked evaluation of `f`, `f'` or `f''`.
    pub fn evaluate(&self, u: f64, order: Order) -> Result<f64> {
        self.check_domain(u)?;
        Ok(match order {
            Order::Value => self.f(u),
            Order::First => self.df(u),
            Order::Second => self.d2f(u),
        })
    }

    /// Unchecked `f(u)` for inner loops.
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => 0.5 * u * u,
            FluxKind::Quadratic { a } => 0.5 * a * u * u,
            FluxKind::Gap(g) => g.f(u),
            FluxKind::Tabulated(t) => t.f(u),
        }
    }

    /// Unchecked `f'(u)`.
    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => u,
            FluxKind::Quadratic { a } => a * u,
            FluxKind::Gap(g) => g.df(u),
            FluxKind::Tabulated(t) => t.df(u),
        }
    }

    /// Unchecked `f''(u)`.
    #[inline]
    pub fn d2f(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => 1.0,
            FluxKind::Quadratic { a } => *a,
            FluxKind::Gap(g) => g.d2f(u),
            FluxKind::Tabulated(t) => t.d2f(u),
        }
    }

    /// Abscissas where the closed form changes.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            FluxKind::Burgers | FluxKind::Quadratic { .. } => Vec::new(),
            FluxKind::Gap(g) => vec![-g.delta, g.delta, g.u_hi],
            FluxKind::Tabulated(t) => t.nodes.clone(),
        }
    }

    /// Secant slope `(f(b) − f(a))/(b − a)`, computed as the mean of `f'`
    /// over `[a, b]` so that nearby arguments do not cancel. Equals `f'(a)`
    /// when `a == b`.
    pub fn secant_slope(&self, a: f64, b: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => 0.5 * (a + b),
            FluxKind::Quadratic { a: c } => 0.5 * c * (a + b),
            _ => {
                if a == b {
                    return self.df(a);
                }
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let mut total = 0.0;
                let mut left = lo;
                for k in self.breakpoints() {
                    if k > left && k < hi {
                        total += gauss_legendre5(left, k, |u| self.df(u));
                        left = k;
                    }
                }
                total += gauss_legendre5(left, hi, |u| self.df(u));
                total / (hi - lo)
            }
        }
    }

    /// Second divided difference `f[a, m, b]`; lies in `[½ inf f'', ½ sup f'']`.
    pub fn second_divided_difference(&self, a: f64, m: f64, b: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => 0.5,
            FluxKind::Quadratic { a: c } => 0.5 * c,
            _ => (self.secant_slope(m, b) - self.secant_slope(a, m)) / (b - a),
        }
    }

    /// Bregman excess `f(u) − f(ū) − f'(ū)(u − ū) ≥ 0`, free of cancellation
    /// for small `u − ū`.
    pub fn bregman(&self, ubar: f64, u: f64) -> f64 {
        let d = u - ubar;
        match &self.kind {
            FluxKind::Burgers => 0.5 * d * d,
            FluxKind::Quadratic { a } => 0.5 * a * d * d,
            FluxKind::Gap(g) if (u <= -g.delta && ubar <= -g.delta) => 0.5 * d * d / g.n,
            FluxKind::Gap(g) if (u >= g.u_hi && ubar >= g.u_hi) => 0.5 * d * d,
            _ => d * (self.secant_slope(ubar, u) - self.df(ubar)),
        }
    }

    /// `(min f'', max f'')` over `[lo, hi]`: the closed-form minimum and a
    /// maximum over a dense sample that includes the piece boundaries and the
    /// bump extremes.
    pub fn curvature_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut pts: Vec<f64> = (0..=4000)
            .map(|k| lo + (hi - lo) * k as f64 / 4000.0)
            .chain(self.breakpoints())
            .collect();
        if let FluxKind::Gap(g) = &self.kind {
            let z_crit = 1.0 / 7f64.sqrt();
            pts.extend([-z_crit, z_crit].map(|z| g.bump_center + g.bump_radius * z));
        }
        let max = pts
            .into_iter()
            .filter(|u| *u >= lo && *u <= hi)
            .map(|u| self.d2f(u))
            .fold(f64::NEG_INFINITY, f64::max);
        (self.curvature_min_on(lo, hi), max)
    }

    /// Minimum of `f''` over `[lo, hi]` from the closed-form pieces.
    fn curvature_min_on(&self, lo: f64, hi: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => 1.0,
            FluxKind::Quadratic { a } => *a,
            FluxKind::Gap(g) => {
                let mut candidates = vec![lo, hi];
                let z_crit = 1.0 / 7f64.sqrt();
                for z in [-z_crit, z_crit] {
                    candidates.push(g.bump_center + g.bump_radius * z);
                }
                candidates.push(-g.delta);
                candidates
                    .into_iter()
                    .filter(|u| u.is_finite() && *u >= lo && *u <= hi)
                    .map(|u| g.d2f(u))
                    .chain(if lo < -g.delta { Some(1.0 / g.n) } else { None })
                    .fold(f64::INFINITY, f64::min)
            }
            FluxKind::Tabulated(t) => {
                // Piecewise-linear curvature: the minimum sits at a node or an end.
                let mut m = t.d2f(lo).min(t.d2f(hi));
                for (u, c) in t.nodes.iter().zip(&t.curvature) {
                    if *u >= lo && *u <= hi {
                        m = m.min(*c);
                    }
                }
                m
            }
        }
    }
}

/// Rankine–Hugoniot speed of the jump between two distinct states.
pub fn shock_speed(model: &FluxModel, ul: f64, ur: f64) -> Result<f64> {
    if ul == ur {
        return Err(LabError::Degenerate(format!(
            "shock speed needs distinct states, got {ul} twice"
        )));
    }
    model.check_domain(ul)?;
    model.check_domain(ur)?;
    Ok(model.secant_slope(ul, ur))
}

/// Far-field states of a shock or rarefaction experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePair {
    pub ul: f64,
    pub ur: f64,
    /// Rankine–Hugoniot speed.
    pub s: f64,
}

impl StatePair {
    pub fn new(model: &FluxModel, ul: f64, ur: f64) -> Result<Self> {
        Ok(Self {
            ul,
            ur,
            s: shock_speed(model, ul, ur)?,
        })
    }

    /// Checks the Lax condition `ū_l > ū_r` required for shocks.
    pub fn require_shock(&self) -> Result<()> {
        if self.ul > self.ur {
            Ok(())
        } else {
            Err(LabError::Ordering(format!(
                "shock experiments need ū_l > ū_r (Lax condition), got ū_l = {}, ū_r = {}",
                self.ul, self.ur
            )))
        }
    }

    pub fn require_rarefaction(&self) -> Result<()> {
        if self.ul < self.ur {
            Ok(())
        } else {
            Err(LabError::Ordering(format!(
                "rarefaction experiments need ū_l < ū_r, got ū_l = {}, ū_r = {}",
                self.ul, self.ur
            )))
        }
    }

    /// `ū_l − ū_r`.
    pub fn jump(&self) -> f64 {
        self.ul - self.ur
    }
}

/// Gap flux: exactly `u²/(2n)` for `u ≤ −δ` and `u²/2` for `u ≥ u_hi`.
///
/// The curvature rises from `1/n` to `1` by a quintic smoothstep on
/// `[−δ, δ]`, centered on `0` where the two parabolas are tangent. Because a
/// monotone curvature ramp cannot reproduce both parabolas exactly, a
/// zero-mean C² bump `A·z(1 − z²)³` on `[δ, u_hi]` removes the leftover
/// offset in `f`, so all three of `f, f', f''` match both closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct GapFlux {
    pub n: f64,
    pub u_lo: f64,
    pub u_hi: f64,
    /// Half-width of the smoothstep ramp.
    pub delta: f64,
    bump_center: f64,
    bump_radius: f64,
    bump_amplitude: f64,
    /// Offset of `f` above `u²/2` at the end of the ramp, removed by the bump.
    ramp_excess: f64,
    /// `(f(u_hi) − u_hi²/2, f'(u_hi) − u_hi)` after construction.
    pub knot_mismatch: (f64, f64),
}

/// Builds the gap flux with a curvature ramp of half-width `blend_resolution`.
pub fn build_gap_flux(n: f64, u_lo: f64, u_hi: f64, blend_resolution: f64) -> Result<FluxModel> {
    if !(n >= 1.0 && n.is_finite()) {
        return Err(LabError::Construction(format!(
            "gap flux needs n ≥ 1, got {n}"
        )));
    }
    if !(u_lo < u_hi) {
        return Err(LabError::Construction(format!(
            "gap flux needs u_lo < u_hi, got [{u_lo}, {u_hi}]"
        )));
    }
    if !(u_lo < 0.0 && u_hi > 0.0) {
        return Err(LabError::Construction(format!(
            "the parabolas u²/(2n) and u²/2 only join smoothly at 0, so the knots must bracket 0; got [{u_lo}, {u_hi}]"
        )));
    }
    let delta = blend_resolution;
    let room = (-u_lo).min(u_hi);
    if !(delta > 0.0 && delta < room) {
        return Err(LabError::Construction(format!(
            "blend resolution must lie in (0, {room}), got {delta}"
        )));
    }
    let ramp_excess = (1.0 - 1.0 / n) * delta * delta / 14.0;
    let bump_center = 0.5 * (delta + u_hi);
    let bump_radius = 0.5 * (u_hi - delta);
    // ∫_{-1}^{1} z²(1 − z²)³ dz = 32/315.
    let bump_amplitude = ramp_excess / (bump_radius * bump_radius * 32.0 / 315.0);
    let mut g = GapFlux {
        n,
        u_lo,
        u_hi,
        delta,
        bump_center,
        bump_radius,
        bump_amplitude,
        ramp_excess,
        knot_mismatch: (0.0, 0.0),
    };
    // Peak of |z(1 − z²)³| is (1/√7)(6/7)³.
    let dip = bump_amplitude * (6.0f64 / 7.0).powi(3) / 7f64.sqrt();
    if 1.0 - dip <= 1.0 / n {
        return Err(LabError::Construction(format!(
            "blend resolution {delta} too wide: correction would push f'' below 1/n"
        )));
    }
    g.knot_mismatch = (g.f(u_hi) - 0.5 * u_hi * u_hi, g.df(u_hi) - u_hi);
    Ok(FluxModel::from_kind(
        FluxKind::Gap(g),
        (f64::NEG_INFINITY, f64::INFINITY),
    ))
}

impl GapFlux {
    #[inline]
    fn ramp_coord(&self, u: f64) -> f64 {
        (u + self.delta) / (2.0 * self.delta)
    }

    #[inline]
    fn bump_coord(&self, u: f64) -> f64 {
        (u - self.bump_center) / self.bump_radius
    }

    fn in_bump(&self, u: f64) -> bool {
        u > self.delta && u < self.u_hi
    }

    pub fn f(&self, u: f64) -> f64 {
        let w = 1.0 - 1.0 / self.n;
        if u <= -self.delta {
            0.5 * u * u / self.n
        } else if u < self.delta {
            let t = self.ramp_coord(u);
            let i2 = t.powi(5) * (t * t / 7.0 - 0.5 * t + 0.5);
            0.5 * u * u / self.n + w * 4.0 * self.delta * self.delta * i2
        } else if self.in_bump(u) {
            let z = self.bump_coord(u);
            let p = |s: f64| {
                let s2 = s * s;
                s * (1.0 + s2 * (-4.0 / 3.0 + s2 * (1.2 + s2 * (-4.0 / 7.0 + s2 / 9.0))))
            };
            let k2 = -self.bump_amplitude * self.bump_radius.powi(2) / 8.0 * (p(z) + p(1.0));
            0.5 * u * u + self.ramp_excess + k2
        } else {
            0.5 * u * u
        }
    }

    pub fn df(&self, u: f64) -> f64 {
        let w = 1.0 - 1.0 / self.n;
        if u <= -self.delta {
            u / self.n
        } else if u < self.delta {
            let t = self.ramp_coord(u);
            let i1 = t.powi(4) * (t * t - 3.0 * t + 2.5);
            u / self.n + w * 2.0 * self.delta * i1
        } else if self.in_bump(u) {
            let z = self.bump_coord(u);
            u - self.bump_amplitude * self.bump_radius * (1.0 - z * z).powi(4) / 8.0
        } else {
            u
        }
    }

    pub fn d2f(&self, u: f64) -> f64 {
        let w = 1.0 - 1.0 / self.n;
        if u <= -self.delta {
            1.0 / self.n
        } else if u < self.delta {
            let t = self.ramp_coord(u);
            let s = t * t * t * (t * (6.0 * t - 15.0) + 10.0);
            1.0 / self.n + w * s
        } else if self.in_bump(u) {
            let z = self.bump_coord(u);
            1.0 + self.bump_amplitude * z * (1.0 - z * z).powi(3)
        } else {
            1.0
        }
    }
}

/// Flux defined by curvature samples `f''(u_k)`, linearly interpolated and
/// integrated exactly from the anchors `f(u_0)`, `f'(u_0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFlux {
    nodes: Vec<f64>,
    curvature: Vec<f64>,
    slope_at: Vec<f64>,
    value_at: Vec<f64>,
}

impl TabulatedFlux {
    pub fn new(nodes: Vec<f64>, curvature: Vec<f64>, f0: f64, df0: f64) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != curvature.len() {
            return Err(LabError::Construction(
                "curvature table needs at least two (u, f'') pairs of equal length".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(LabError::Construction(
                "curvature table nodes must be strictly increasing".into(),
            ));
        }
        if let Some(c) = curvature.iter().find(|c| !(**c > 0.0)) {
            return Err(LabError::Construction(format!(
                "curvature samples must be positive, got {c}"
            )));
        }
        let m = nodes.len();
        let mut slope_at = vec![df0; m];
        let mut value_at = vec![f0; m];
        for k in 0..m - 1 {
            let h = nodes[k + 1] - nodes[k];
            let (c0, c1) = (curvature[k], curvature[k + 1]);
            slope_at[k + 1] = slope_at[k] + h * 0.5 * (c0 + c1);
            value_at[k + 1] = value_at[k] + slope_at[k] * h + h * h * (c0 / 3.0 + c1 / 6.0);
        }
        Ok(Self {
            nodes,
            curvature,
            slope_at,
            value_at,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn locate(&self, u: f64) -> (usize, f64, f64) {
        let last = self.nodes.len() - 2;
        let k = match self.nodes.binary_search_by(|v| v.partial_cmp(&u).unwrap()) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        };
        let h = self.nodes[k + 1] - self.nodes[k];
        (k, h, (u - self.nodes[k]) / h)
    }

    pub fn f(&self, u: f64) -> f64 {
        let (k, h, t) = self.locate(u);
        let (c0, c1) = (self.curvature[k], self.curvature[k + 1]);
        self.value_at[k]
            + self.slope_at[k] * h * t
            + h * h * (c0 * t * t / 2.0 + (c1 - c0) * t * t * t / 6.0)
    }

    pub fn df(&self, u: f64) -> f64 {
        let (k, h, t) = self.locate(u);
        let (c0, c1) = (self.curvature[k], self.curvature[k + 1]);
        self.slope_at[k] + h * (c0 * t + (c1 - c0) * t * t / 2.0)
    }

    pub fn d2f(&self, u: f64) -> f64 {
        let (k, _, t) = self.locate(u);
        self.curvature[k] + (self.curvature[k + 1] - self.curvature[k]) * t
    }
}
