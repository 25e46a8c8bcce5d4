//! Scenario files: `key = value` lines with dotted keys, `#` comments and
//! bracketed lists.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use shocklab_core::{FluxModel, PerturbationSpec, Shape, TimeScheme};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    Profile,
    PeriodicDecay,
    ShockShift,
    BurgersCoincidence,
    Counterexample,
    ViscositySweep,
    Rarefaction,
    HopfCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        Self::Profile,
        Self::PeriodicDecay,
        Self::ShockShift,
        Self::BurgersCoincidence,
        Self::Counterexample,
        Self::ViscositySweep,
        Self::Rarefaction,
        Self::HopfCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Profile => "profile",
            Self::PeriodicDecay => "periodic-decay",
            Self::ShockShift => "shock-shift",
            Self::BurgersCoincidence => "burgers-coincidence",
            Self::Counterexample => "counterexample",
            Self::ViscositySweep => "viscosity-sweep",
            Self::Rarefaction => "rarefaction",
            Self::HopfCheck => "hopf-check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FluxSpec {
    Burgers,
    Quadratic { a: f64 },
    Gap { n: f64, knots: (f64, f64), blend: f64 },
}

impl FluxSpec {
    pub fn build(&self) -> shocklab_core::Result<FluxModel> {
        match *self {
            FluxSpec::Burgers => Ok(FluxModel::burgers()),
            FluxSpec::Quadratic { a } => FluxModel::quadratic(a),
            FluxSpec::Gap { n, knots, blend } => FluxModel::gap(n, knots.0, knots.1, blend),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationConfig {
    pub shape: String,
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
}

impl PerturbationConfig {
    fn sine(amplitude: f64) -> Self {
        Self {
            shape: "sine".into(),
            amplitude,
            period: 1.0,
            phase: 0.0,
        }
    }

    pub fn build(&self) -> shocklab_core::Result<PerturbationSpec> {
        let shape = match self.shape.as_str() {
            "zero" => Shape::Zero,
            "sine" => Shape::Sine,
            "cosine" => Shape::Cosine,
            "sawtooth" => Shape::SawtoothSmoothed,
            other => {
                return Err(shocklab_core::LabError::Invalid(format!(
                    "unknown perturbation shape '{other}'"
                )))
            }
        };
        PerturbationSpec::new(shape, self.amplitude, self.period, self.phase)
    }
}

/// Everything an experiment needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ExperimentKind,
    pub flux: FluxSpec,
    pub ul: f64,
    pub ur: f64,
    pub nus: Vec<f64>,
    pub left: PerturbationConfig,
    pub right: PerturbationConfig,
    pub dx: f64,
    pub half_width: f64,
    pub horizon: f64,
    pub record_every: f64,
    pub scheme: TimeScheme,
    /// Sample times (hopf-check, rarefaction).
    pub times: Vec<f64>,
    /// Lattice indices (burgers-coincidence).
    pub ks: Vec<u32>,
    pub excess_dx: f64,
    pub out_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Built-in desk-scale defaults for each experiment.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let base = Self {
            kind,
            flux: FluxSpec::Burgers,
            ul: 1.0,
            ur: -1.0,
            nus: vec![0.5],
            left: PerturbationConfig::sine(0.2),
            right: PerturbationConfig::sine(0.2),
            dx: 1.0 / 256.0,
            half_width: 20.0,
            horizon: 5.0,
            record_every: 0.05,
            scheme: TimeScheme::Imex,
            times: Vec::new(),
            ks: Vec::new(),
            excess_dx: 1.0 / 128.0,
            out_dir: None,
        };
        let gap = FluxSpec::Gap {
            n: 50.0,
            knots: (-0.9, 0.9),
            blend: 0.225,
        };
        match kind {
            ExperimentKind::Profile => base,
            ExperimentKind::PeriodicDecay => Self {
                nus: vec![0.4, 0.2, 0.1, 0.05, 0.025],
                horizon: 60.0,
                record_every: 0.02,
                ..base
            },
            ExperimentKind::ShockShift => base,
            ExperimentKind::BurgersCoincidence => Self {
                ks: vec![1, 2, 3, 4, 5],
                horizon: 2.5,
                ..base
            },
            ExperimentKind::Counterexample => Self {
                flux: gap,
                nus: vec![0.1],
                left: PerturbationConfig::sine(0.1),
                right: PerturbationConfig::sine(0.1),
                ..base
            },
            ExperimentKind::ViscositySweep => Self {
                flux: gap,
                nus: vec![0.4, 0.2, 0.1, 0.05, 0.025],
                left: PerturbationConfig::sine(0.1),
                right: PerturbationConfig::sine(0.1),
                ..base
            },
            ExperimentKind::Rarefaction => Self {
                ul: -1.0,
                ur: 1.0,
                nus: vec![0.1],
                dx: 1.0 / 64.0,
                half_width: 72.0,
                horizon: 50.0,
                times: (1..=50).map(f64::from).collect(),
                ..base
            },
            ExperimentKind::HopfCheck => Self {
                dx: 1.0 / 512.0,
                horizon: 2.0,
                times: vec![0.5, 1.0, 2.0],
                ..base
            },
        }
    }

    pub fn nu(&self) -> f64 {
        self.nus[0]
    }

    /// Parses `text` on top of the defaults for `kind` (or for the file's own
    /// `kind` key when `kind` is `None`).
    pub fn parse(text: &str, kind: Option<ExperimentKind>) -> Result<Self, ConfigError> {
        let entries = parse_entries(text)?;
        let kind = match (kind, entries.get("kind")) {
            (Some(k), _) => k,
            (None, Some(v)) => {
                let name = v.scalar();
                ExperimentKind::parse(&name).ok_or_else(|| {
                    ConfigError::Invalid(vec![format!("kind: unknown experiment '{name}'")])
                })?
            }
            (None, None) => {
                return Err(ConfigError::Invalid(vec!["kind: missing".into()]));
            }
        };
        let mut cfg = Self::default_for(kind);
        let mut errors = Vec::new();
        let mut flux_kind: Option<String> = None;
        let (mut fa, mut fn_, mut knots, mut blend) = (None, None, None, None);
        for (key, value) in &entries {
            let res: Result<(), String> = (|| {
                match key.as_str() {
                    "kind" => {}
                    "flux.kind" => flux_kind = Some(value.scalar()),
                    "flux.a" => fa = Some(value.number()?),
                    "flux.n" => fn_ = Some(value.number()?),
                    "flux.knots" => {
                        let k = value.numbers()?;
                        if k.len() != 2 {
                            return Err("expected two knots [lo, hi]".into());
                        }
                        knots = Some((k[0], k[1]));
                    }
                    "flux.blend" => blend = Some(value.number()?),
                    "states.left" => cfg.ul = value.number()?,
                    "states.right" => cfg.ur = value.number()?,
                    "nu" => cfg.nus = value.numbers()?,
                    "grid.dx" => cfg.dx = value.number()?,
                    "grid.half_width" => cfg.half_width = value.number()?,
                    "time.horizon" => cfg.horizon = value.number()?,
                    "time.record_every" => cfg.record_every = value.number()?,
                    "time.scheme" => {
                        let s = value.scalar();
                        cfg.scheme = TimeScheme::parse(&s)
                            .ok_or_else(|| format!("unknown scheme '{s}'"))?;
                    }
                    "time.samples" => cfg.times = value.numbers()?,
                    "coincidence.k" => {
                        cfg.ks = value
                            .numbers()?
                            .into_iter()
                            .map(|k| {
                                if k >= 1.0 && k.fract() == 0.0 {
                                    Ok(k as u32)
                                } else {
                                    Err(format!("lattice index {k} is not a positive integer"))
                                }
                            })
                            .collect::<Result<_, _>>()?
                    }
                    "excess.dx" => cfg.excess_dx = value.number()?,
                    "output.dir" => cfg.out_dir = Some(PathBuf::from(value.scalar())),
                    k if k.starts_with("perturbation.") => {
                        let rest = &k["perturbation.".len()..];
                        let (side, field) = rest
                            .split_once('.')
                            .ok_or_else(|| "expected perturbation.<side>.<field>".to_string())?;
                        let targets: Vec<&mut PerturbationConfig> = match side {
                            "left" => vec![&mut cfg.left],
                            "right" => vec![&mut cfg.right],
                            "both" => vec![&mut cfg.left, &mut cfg.right],
                            _ => return Err(format!("unknown side '{side}'")),
                        };
                        for t in targets {
                            match field {
                                "shape" => t.shape = value.scalar(),
                                "amplitude" => t.amplitude = value.number()?,
                                "period" => t.period = value.number()?,
                                "phase" => t.phase = value.number()?,
                                _ => return Err("unknown key".into()),
                            }
                        }
                    }
                    _ => return Err("unknown key".into()),
                }
                Ok(())
            })();
            if let Err(e) = res {
                errors.push(format!("{key}: {e}"));
            }
        }
        if let Some(fk) = flux_kind {
            match fk.as_str() {
                "burgers" => cfg.flux = FluxSpec::Burgers,
                "quadratic" => cfg.flux = FluxSpec::Quadratic { a: fa.unwrap_or(1.0) },
                "gap" => {
                    let (n0, k0, b0) = match cfg.flux {
                        FluxSpec::Gap { n, knots, blend } => (n, knots, blend),
                        _ => (50.0, (-0.9, 0.9), 0.225),
                    };
                    cfg.flux = FluxSpec::Gap {
                        n: fn_.unwrap_or(n0),
                        knots: knots.unwrap_or(k0),
                        blend: blend.unwrap_or(b0),
                    };
                }
                other => errors.push(format!("flux.kind: unknown flux '{other}'")),
            }
        } else {
            match &mut cfg.flux {
                FluxSpec::Quadratic { a } => *a = fa.unwrap_or(*a),
                FluxSpec::Gap { n, knots: k, blend: b } => {
                    *n = fn_.unwrap_or(*n);
                    *k = knots.unwrap_or(*k);
                    *b = blend.unwrap_or(*b);
                }
                FluxSpec::Burgers => {
                    if fa.is_some() || fn_.is_some() || knots.is_some() || blend.is_some() {
                        errors.push("flux: parameters given without flux.kind".into());
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    List(Vec<String>),
}

impl Value {
    fn scalar(&self) -> String {
        match self {
            Value::Scalar(s) => s.clone(),
            Value::List(v) => format!("[{}]", v.join(", ")),
        }
    }

    fn number(&self) -> Result<f64, String> {
        match self {
            Value::Scalar(s) => parse_number(s),
            Value::List(_) => Err("expected a number, got a list".into()),
        }
    }

    fn numbers(&self) -> Result<Vec<f64>, String> {
        match self {
            Value::Scalar(s) => Ok(vec![parse_number(s)?]),
            Value::List(v) => v.iter().map(|s| parse_number(s)).collect(),
        }
    }
}

/// Accepts plain floats and fractions such as `1/512`.
fn parse_number(s: &str) -> Result<f64, String> {
    let bad = || format!("'{s}' is not a number");
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (f64, f64) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        if b == 0.0 {
            return Err(bad());
        }
        return Ok(a / b);
    }
    s.trim().parse().map_err(|_| bad())
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, Value>, ConfigError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            msg: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax {
                line: line_no,
                msg: format!("invalid key '{key}'"),
            });
        }
        let value = value.trim();
        let value = if let Some(inner) = value.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                msg: "unterminated list".into(),
            })?;
            Value::List(
                inner
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect(),
            )
        } else {
            Value::Scalar(value.trim_matches('"').to_string())
        };
        if out.insert(key.to_string(), value).is_some() {
            return Err(ConfigError::Syntax {
                line: line_no,
                msg: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides_on_defaults() {
        let text = "
            # shock run
            kind = shock-shift
            flux.kind = gap
            flux.n = 20
            nu = 0.25
            grid.dx = 1/128
            perturbation.both.amplitude = 0.05
            time.samples = [0.5, 1]
        ";
        let c = ScenarioConfig::parse(text, None).unwrap();
        assert_eq!(c.kind, ExperimentKind::ShockShift);
        assert_eq!(
            c.flux,
            FluxSpec::Gap {
                n: 20.0,
                knots: (-0.9, 0.9),
                blend: 0.225
            }
        );
        assert_eq!(c.nus, vec![0.25]);
        assert_eq!(c.dx, 1.0 / 128.0);
        assert_eq!(c.left.amplitude, 0.05);
        assert_eq!(c.right.amplitude, 0.05);
        assert_eq!(c.times, vec![0.5, 1.0]);
    }

    #[test]
    fn reports_every_bad_key() {
        let err = ScenarioConfig::parse("grid.dz = 1\nnu = abc\n", Some(ExperimentKind::Profile))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("grid.dz") && msg.contains("nu"), "{msg}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = ScenarioConfig::parse("kind = profile\nnonsense\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
    }
}
