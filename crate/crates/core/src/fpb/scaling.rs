use super::ensemble::{mc_step, Ensemble};
use super::rules::{Interval, PairRule};
use crate::{Error, Result};

/// Rule with `P ↦ ε P` and noise variance `σ² ↦ ε σ²`. The scaled rule is
/// meant to be run to the horizon `t / ε`.
pub fn quasi_invariant_scale(rule: &PairRule, eps: f64) -> Result<PairRule> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} must lie in (0, 1]"
        )));
    }
    if eps == 1.0 {
        return Ok(rule.clone());
    }
    Ok(PairRule {
        p: rule.p.scaled(eps),
        noise: rule.noise.with_variance(eps * rule.noise.variance()),
        ..rule.clone()
    })
}

/// Closed-form mean and variance for a rule with constant `P = p` and
/// `Q = q` interacting at rate `λ`:
///
/// ```text
/// dm/dt = 0,    dV/dt = λ (q² σ² − 2 p (1 − p) V)
/// ```
///
/// obtained from the weak form with `φ(v) = v` and `φ(v) = v²` for
/// independent partners, ignoring the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOracle {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub noise_variance: f64,
}

impl MomentOracle {
    /// Relaxation rate `2 λ p (1 − p)` of the variance.
    pub fn decay_rate(&self) -> f64 {
        2.0 * self.lambda * self.p * (1.0 - self.p)
    }

    /// Variance input `λ q² σ²` from the noise.
    pub fn source(&self) -> f64 {
        self.lambda * self.q * self.q * self.noise_variance
    }

    /// `(mean, variance)` at time `t` from `(mean0, var0)` at time zero.
    pub fn evaluate(&self, t: f64, mean0: f64, var0: f64) -> (f64, f64) {
        let k = self.decay_rate();
        let s = self.source();
        let var = if k == 0.0 {
            var0 + s * t
        } else {
            let limit = s / k;
            limit + (var0 - limit) * (-k * t).exp()
        };
        (mean0, var)
    }
}

/// Oracle for a constant-coefficient rule; any other rule is rejected.
pub fn moment_ode_oracle(rule: &PairRule, lambda: f64) -> Result<MomentOracle> {
    let (Some(p), Some(q)) = (rule.p.as_constant(), rule.q.as_constant()) else {
        return Err(Error::InvalidParameter(
            "moment oracle needs constant P and Q".into(),
        ));
    };
    Ok(MomentOracle {
        p,
        q,
        lambda,
        noise_variance: rule.noise.variance(),
    })
}

/// Variance curves of ε-scaled runs on a common rescaled time axis `τ = ε t`.
#[derive(Debug, Clone)]
pub struct QuasiInvariantStudy {
    pub rule: PairRule,
    pub lambda: f64,
    /// Physical time step of every scaled run.
    pub dt: f64,
    /// Rescaled sampling times `τ`.
    pub sample_times: Vec<f64>,
    pub particles: usize,
    pub seeds: Vec<u64>,
}

impl QuasiInvariantStudy {
    /// Seed-averaged variance at each sample time for one `ε`. Every seed
    /// draws its initial ensemble from `initial` on `domain`.
    pub fn variance_curve(
        &self,
        eps: f64,
        domain: &Interval,
        initial: &dyn Fn(&mut rand_chacha::ChaCha8Rng) -> f64,
    ) -> Result<Vec<f64>> {
        let scaled = quasi_invariant_scale(&self.rule, eps)?;
        let mut curve = vec![0.0; self.sample_times.len()];
        for &seed in &self.seeds {
            let mut e = Ensemble::sample(self.particles, seed, domain, initial)?;
            for (slot, &tau) in curve.iter_mut().zip(&self.sample_times) {
                // advance to physical time tau / eps
                let target = tau / eps;
                while e.t < target - 1e-9 * self.dt {
                    let dt = self.dt.min(target - e.t);
                    mc_step(&mut e, &scaled, self.lambda, dt)?;
                }
                *slot += e.variance() / self.seeds.len() as f64;
            }
        }
        Ok(curve)
    }

    /// Largest difference of each ε curve from the curve of the smallest ε
    /// (the last entry of `eps`, which must be decreasing).
    pub fn discrepancies(
        &self,
        eps: &[f64],
        domain: &Interval,
        initial: &dyn Fn(&mut rand_chacha::ChaCha8Rng) -> f64,
    ) -> Result<Vec<f64>> {
        if eps.len() < 2 || eps.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidParameter(
                "eps must be a decreasing list of at least two values".into(),
            ));
        }
        let curves = eps
            .iter()
            .map(|&e| self.variance_curve(e, domain, initial))
            .collect::<Result<Vec<_>>>()?;
        let reference = curves.last().unwrap();
        Ok(curves[..curves.len() - 1]
            .iter()
            .map(|c| {
                c.iter()
                    .zip(reference)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .collect())
    }
}
