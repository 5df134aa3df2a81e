use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::{Error, Result};

/// Attempts at redrawing the noise before an interaction is skipped.
pub const MAX_RESAMPLES: usize = 32;

/// Closed interval of admissible values; `upper` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidParameter(format!(
                "interval [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `[0, +∞)`.
    pub fn positive() -> Self {
        Self {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.is_finite()
    }

    /// Points used to check coefficient bounds: the interval itself, or
    /// `[lower, lower + 100]` for a half-line.
    fn probe_points(&self) -> impl Iterator<Item = f64> + '_ {
        let top = if self.is_bounded() {
            self.upper
        } else {
            self.lower + 100.0
        };
        (0..=200).map(move |k| self.lower + (top - self.lower) * k as f64 / 200.0)
    }
}

/// Zero-mean noise with bounded support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLaw {
    /// Uniform on `[−a, a]` with `a = √(3 σ²)`.
    Uniform { variance: f64 },
    /// `±σ` with equal probability.
    TwoPoint { variance: f64 },
}

impl NoiseLaw {
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Uniform { variance } | Self::TwoPoint { variance } => variance,
        }
    }

    /// Largest absolute value the noise can take.
    pub fn bound(&self) -> f64 {
        match *self {
            Self::Uniform { variance } => (3.0 * variance).sqrt(),
            Self::TwoPoint { variance } => variance.sqrt(),
        }
    }

    pub fn with_variance(&self, variance: f64) -> Self {
        match self {
            Self::Uniform { .. } => Self::Uniform { variance },
            Self::TwoPoint { .. } => Self::TwoPoint { variance },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { variance } => {
                if variance == 0.0 {
                    return 0.0;
                }
                let a = (3.0 * variance).sqrt();
                rng.random_range(-a..=a)
            }
            Self::TwoPoint { variance } => {
                let s = variance.sqrt();
                if rng.random::<bool>() {
                    s
                } else {
                    -s
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let v = self.variance();
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise variance {v}")));
        }
        Ok(())
    }
}

/// A coefficient function `P(v)` or `Q(v)`.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// `a + b v`.
    Affine {
        a: f64,
        b: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Self::Affine { a, b } => f
                .debug_struct("Affine")
                .field("a", a)
                .field("b", b)
                .finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Coefficient {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Affine { a, b } => a + b * v,
            Self::Custom(f) => f(v),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match *self {
            Self::Constant(c) => Some(c),
            Self::Affine { a, b: 0.0 } => Some(a),
            _ => None,
        }
    }

    pub fn scaled(&self, eps: f64) -> Self {
        match self {
            Self::Constant(c) => Self::Constant(eps * c),
            Self::Affine { a, b } => Self::Affine {
                a: eps * a,
                b: eps * b,
            },
            Self::Custom(f) => {
                let f = Arc::clone(f);
                Self::custom(move |v| eps * f(v))
            }
        }
    }

    fn check(&self, name: &str, domain: &Interval, unit: bool) -> Result<()> {
        for v in domain.probe_points() {
            let c = self.eval(v);
            let ok = c >= 0.0 && c.is_finite() && (!unit || c <= 1.0);
            if !ok {
                return Err(Error::InvalidParameter(format!("{name}({v}) = {c}")));
            }
        }
        Ok(())
    }
}

/// What to do when an interaction would leave the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    /// Redraw the noise up to [`MAX_RESAMPLES`] times, then skip.
    Resample,
    /// Skip at once.
    Skip,
}

/// Binary rule `v* = v + P(v)(w − v) + Q(v)η`, `w* = w + P(w)(v − w) + Q(w)η̃`.
#[derive(Debug, Clone)]
pub struct PairRule {
    pub p: Coefficient,
    pub q: Coefficient,
    pub noise: NoiseLaw,
    pub domain: Interval,
    pub admissibility: Admissibility,
}

impl PairRule {
    /// Checks `P ∈ [0, 1]` and `Q ≥ 0` on the domain.
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        self.p.check("P", &self.domain, true)?;
        self.q.check("Q", &self.domain, false)
    }
}

/// Where environment values come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    Constant(f64),
    Uniform {
        lower: f64,
        upper: f64,
    },
    /// Drawn uniformly from a list.
    Empirical(Vec<f64>),
}

impl Environment {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Constant(z) => *z,
            Self::Uniform { lower, upper } => rng.random_range(*lower..=*upper),
            Self::Empirical(values) => values[rng.random_range(0..values.len())],
        }
    }

    fn validate(&self, domain: &Interval) -> Result<()> {
        let ok = match self {
            Self::Constant(z) => domain.contains(*z),
            Self::Uniform { lower, upper } => {
                lower <= upper && domain.contains(*lower) && domain.contains(*upper)
            }
            Self::Empirical(v) => !v.is_empty() && v.iter().all(|z| domain.contains(*z)),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "environment values must lie in the domain".into(),
            ))
        }
    }
}

/// Rule against the environment: `v* = v + P_E(v) z − P(v) v + Q(v) η`.
#[derive(Debug, Clone)]
pub struct EnvRule {
    pub p_env: Coefficient,
    pub p: Coefficient,
    pub q: Coefficient,
    pub noise: NoiseLaw,
    pub domain: Interval,
    pub admissibility: Admissibility,
    pub environment: Environment,
}

impl EnvRule {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        self.p_env.check("P_E", &self.domain, true)?;
        self.p.check("P", &self.domain, true)?;
        self.q.check("Q", &self.domain, false)?;
        self.environment.validate(&self.domain)
    }
}

fn attempts(policy: Admissibility) -> usize {
    match policy {
        Admissibility::Resample => 1 + MAX_RESAMPLES,
        Admissibility::Skip => 1,
    }
}

/// Applies the pair rule with independent noise draws. Outputs outside the
/// domain trigger the admissibility policy; a skipped interaction returns the
/// inputs unchanged.
pub fn pair_interact<R: Rng + ?Sized>(v: f64, w: f64, rule: &PairRule, rng: &mut R) -> (f64, f64) {
    let (pv, pw) = (rule.p.eval(v), rule.p.eval(w));
    let (qv, qw) = (rule.q.eval(v), rule.q.eval(w));
    let drift_v = v + pv * (w - v);
    let drift_w = w + pw * (v - w);
    let noisy = qv != 0.0 || qw != 0.0;
    for _ in 0..attempts(rule.admissibility) {
        let (vs, ws) = if noisy {
            (
                drift_v + qv * rule.noise.sample(rng),
                drift_w + qw * rule.noise.sample(rng),
            )
        } else {
            (drift_v, drift_w)
        };
        if rule.domain.contains(vs) && rule.domain.contains(ws) {
            return (vs, ws);
        }
        if !noisy {
            break;
        }
    }
    (v, w)
}

/// Applies the environment rule with one noise draw, under the same
/// admissibility policy as [`pair_interact`].
pub fn env_interact<R: Rng + ?Sized>(v: f64, z: f64, rule: &EnvRule, rng: &mut R) -> f64 {
    let drift = v + rule.p_env.eval(v) * z - rule.p.eval(v) * v;
    let q = rule.q.eval(v);
    for _ in 0..attempts(rule.admissibility) {
        let vs = if q != 0.0 {
            drift + q * rule.noise.sample(rng)
        } else {
            drift
        };
        if rule.domain.contains(vs) {
            return vs;
        }
        if q == 0.0 {
            break;
        }
    }
    v
}
