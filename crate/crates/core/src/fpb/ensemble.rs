use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::rules::{env_interact, pair_interact, EnvRule, Interval, PairRule};
use crate::{Error, Result};

/// `N` particle values with the random stream that drives them.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub values: Vec<f64>,
    pub t: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl Ensemble {
    pub fn new(values: Vec<f64>, seed: u64, domain: &Interval) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !domain.contains(**v)) {
            return Err(Error::InvalidParameter(format!(
                "value {v} outside [{}, {}]",
                domain.lower, domain.upper
            )));
        }
        Ok(Self {
            values,
            t: 0.0,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Draws `n` initial values from `sampler` using the ensemble's own
    /// stream, so one seed fixes the whole run.
    pub fn sample(
        n: usize,
        seed: u64,
        domain: &Interval,
        mut sampler: impl FnMut(&mut ChaCha8Rng) -> f64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n).map(|_| sampler(&mut rng)).collect();
        let mut e = Self::new(values, seed, domain)?;
        e.rng = rng;
        Ok(e)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        weak_observable(self, |v| v)
    }

    /// Population variance `(1/N) Σ (v − mean)²`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        weak_observable(self, |v| (v - m) * (v - m))
    }
}

fn check_rate(lambda: f64, dt: f64) -> Result<f64> {
    let p = lambda * dt;
    if !(lambda >= 0.0 && dt > 0.0) || p > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "need lambda >= 0, dt > 0 and lambda * dt <= 1, got lambda = {lambda}, dt = {dt}"
        )));
    }
    Ok(p)
}

/// One Nanbu step: `K ~ Binomial(N/2, λ dt)` disjoint pairs are drawn
/// uniformly at random and each interacts once through [`pair_interact`].
pub fn mc_step(ensemble: &mut Ensemble, rule: &PairRule, lambda: f64, dt: f64) -> Result<()> {
    let p = check_rate(lambda, dt)?;
    let n = ensemble.len();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "ensemble size {n} must be even"
        )));
    }
    if p > 0.0 && n > 0 {
        let rng = &mut ensemble.rng;
        let pairs = Binomial::new((n / 2) as u64, p)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(rng) as usize;
        let chosen = index::sample(rng, n, 2 * pairs);
        for k in 0..pairs {
            let (a, b) = (chosen.index(2 * k), chosen.index(2 * k + 1));
            let (va, vb) = pair_interact(ensemble.values[a], ensemble.values[b], rule, rng);
            ensemble.values[a] = va;
            ensemble.values[b] = vb;
        }
    }
    ensemble.t += dt;
    Ok(())
}

/// One step against the environment: `Binomial(N, λ dt)` particles chosen
/// at random each meet a fresh environment value.
pub fn env_step(ensemble: &mut Ensemble, rule: &EnvRule, lambda: f64, dt: f64) -> Result<()> {
    let p = check_rate(lambda, dt)?;
    let n = ensemble.len();
    if p > 0.0 && n > 0 {
        let rng = &mut ensemble.rng;
        let count = Binomial::new(n as u64, p)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(rng) as usize;
        let chosen = index::sample(rng, n, count);
        for k in chosen.iter() {
            let z = rule.environment.sample(rng);
            ensemble.values[k] = env_interact(ensemble.values[k], z, rule, rng);
        }
    }
    ensemble.t += dt;
    Ok(())
}

/// Ensemble average `(1/N) Σ φ(v_k)`.
pub fn weak_observable(ensemble: &Ensemble, phi: impl Fn(f64) -> f64) -> f64 {
    ensemble.values.iter().map(|&v| phi(v)).sum::<f64>() / ensemble.len() as f64
}

/// Equal-width histogram normalized to a probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// Values outside `[lower, upper]` are ignored but still count toward
    /// the normalization.
    pub fn new(values: &[f64], lower: f64, upper: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(lower < upper) || !upper.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "histogram over [{lower}, {upper}] with {bins} bins"
            )));
        }
        let width = (upper - lower) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            if v < lower || v > upper {
                continue;
            }
            let b = (((v - lower) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let norm = values.len().max(1) as f64 * width;
        Ok(Self {
            edges: (0..=bins).map(|k| lower + k as f64 * width).collect(),
            density: counts.iter().map(|&c| c as f64 / norm).collect(),
        })
    }

    /// Histogram over the ensemble's domain, or over `[lower, max value]`
    /// on a half-line.
    pub fn of_ensemble(ensemble: &Ensemble, domain: &Interval, bins: usize) -> Result<Self> {
        let upper = if domain.is_bounded() {
            domain.upper
        } else {
            let top = ensemble.values.iter().copied().fold(domain.lower, f64::max);
            if top > domain.lower {
                top
            } else {
                domain.lower + 1.0
            }
        };
        Self::new(&ensemble.values, domain.lower, upper, bins)
    }
}

/// Draws uniformly from `[lower, upper]`, the usual initial law.
pub fn uniform_sampler(lower: f64, upper: f64) -> impl FnMut(&mut ChaCha8Rng) -> f64 {
    move |rng| rng.random_range(lower..=upper)
}
