//! Seeded synthetic exchange-rate-like series: linear trend, AR(1)
//! log-noise and a few level shifts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n: usize,
    pub base: f64,
    /// Trend per step, as a fraction of `base`.
    pub drift: f64,
    pub phi: f64,
    /// Innovation standard deviation of the log-noise.
    pub sigma: f64,
    pub regimes: usize,
    /// Largest level shift, as a fraction of `base`.
    pub max_shift: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 278,
            base: 8.3,
            drift: 2e-4,
            phi: 0.7,
            sigma: 0.004,
            regimes: 3,
            max_shift: 0.04,
            seed: 42,
        }
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<Vec<f64>> {
    if cfg.n == 0 || !(cfg.base > 0.0) || !(cfg.phi.abs() < 1.0) {
        return Err(CliError::Config(
            "synthetic series needs n ≥ 1, base > 0 and |phi| < 1".into(),
        ));
    }
    let noise = Normal::new(0.0, cfg.sigma)
        .map_err(|e| CliError::Config(format!("sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut shifts: Vec<(usize, f64)> = (0..cfg.regimes)
        .map(|_| {
            let at = rng.random_range(0..cfg.n);
            let size = rng.random_range(-cfg.max_shift..=cfg.max_shift);
            (at, size)
        })
        .collect();
    shifts.sort_by_key(|s| s.0);

    let mut ar = 0.0;
    let mut offset = 0.0;
    let mut next_shift = shifts.iter().peekable();
    let mut out = Vec::with_capacity(cfg.n);
    for t in 0..cfg.n {
        while let Some(&&(at, size)) = next_shift.peek() {
            if at > t {
                break;
            }
            offset += size;
            next_shift.next();
        }
        ar = cfg.phi * ar + noise.sample(&mut rng);
        let level = cfg.base * (1.0 + cfg.drift * t as f64 + offset);
        out.push(level * f64::exp(ar));
    }
    if let Some(i) = out.iter().position(|v| !(*v > 0.0)) {
        return Err(CliError::Config(format!(
            "synthetic value at step {i} is not positive; reduce drift or shifts"
        )));
    }
    Ok(out)
}
