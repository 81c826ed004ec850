//! Monte-Carlo bit error rate.
//!
//! Trial `t` draws its payload from stream `2t` and its noise from stream
//! `2t + 1` of the run seed. Trials are grouped into fixed blocks that a worker
//! pool evaluates in any order; block error counts are summed as integers, so
//! a result never depends on the worker count. Two schemes run with the same
//! seed see the same noise samples.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use crate::channel::{add_noise, impair, noise_variance, trial_rng, ChannelSpec};
use crate::config::{Mode, SchemeConfig};
use crate::error::{Error, Result};
use crate::schemes;

/// Trials per work unit.
pub const BLOCK: u64 = 64;

/// One simulated operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerPoint {
    pub config: SchemeConfig,
    pub mode: Mode,
    pub spec: ChannelSpec,
    /// Symbols simulated.
    pub trials: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// 95% normal-approximation half width.
    pub half_width: f64,
}

impl BerPoint {
    fn new(config: SchemeConfig, mode: Mode, spec: ChannelSpec, trials: u64, bit_errors: u64) -> Self {
        let bits = (trials * config.bits_per_symbol() as u64) as f64;
        let ber = bit_errors as f64 / bits;
        let half_width = 1.96 * (ber * (1.0 - ber) / bits).sqrt();
        BerPoint {
            config,
            mode,
            spec,
            trials,
            bit_errors,
            ber,
            half_width,
        }
    }

    /// Total bits compared.
    pub fn bits(&self) -> u64 {
        self.trials * self.config.bits_per_symbol() as u64
    }
}

/// Early-stopping rule: keep doubling the trial count from `min_trials` until at
/// least `min_errors` bit errors are seen or `max_trials` is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StopRule {
    pub min_trials: u64,
    pub min_errors: u64,
    pub max_trials: u64,
}

impl StopRule {
    pub fn fixed(trials: u64) -> Self {
        StopRule {
            min_trials: trials,
            min_errors: 0,
            max_trials: trials,
        }
    }
}

/// Number of worker threads; `0` uses the global pool.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Workers(pub usize);

fn pool(n: usize) -> Arc<ThreadPool> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    let pools = POOLS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = pools.lock().expect("pool registry poisoned");
    map.entry(n)
        .or_insert_with(|| {
            Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .expect("thread pool"),
            )
        })
        .clone()
}

/// Bit errors over trials `[from, to)`.
fn count_range(config: &SchemeConfig, mode: Mode, spec: &ChannelSpec, from: u64, to: u64) -> Result<u64> {
    let b = config.bits_per_symbol();
    let var = noise_variance(spec, config);
    let mut errors = 0u64;
    let mut bits = vec![0u8; b];
    for t in from..to {
        let mut payload = trial_rng(spec.seed, 2 * t);
        for x in bits.iter_mut() {
            *x = payload.gen::<bool>() as u8;
        }
        let mut y = schemes::modulate(config, &bits)?;
        impair(&mut y, spec.psi, spec.delta_f);
        add_noise(&mut y, var, &mut trial_rng(spec.seed, 2 * t + 1));
        let got = schemes::detect(config, &y, mode)?;
        errors += bits.iter().zip(&got).filter(|(a, b)| a != b).count() as u64;
    }
    Ok(errors)
}

/// Bit errors over trials `[from, to)`, split into blocks across the pool.
fn count_parallel(
    config: &SchemeConfig,
    mode: Mode,
    spec: &ChannelSpec,
    from: u64,
    to: u64,
    workers: Workers,
) -> Result<u64> {
    let blocks: Vec<(u64, u64)> = (from..to)
        .step_by(BLOCK as usize)
        .map(|s| (s, (s + BLOCK).min(to)))
        .collect();
    let run = || {
        blocks
            .par_iter()
            .map(|&(a, b)| count_range(config, mode, spec, a, b))
            .try_reduce(|| 0, |x, y| Ok(x + y))
    };
    match workers.0 {
        0 => run(),
        n => pool(n).install(run),
    }
}

fn prepare(config: &SchemeConfig, mode: Mode, spec: &ChannelSpec) -> Result<()> {
    config.validate()?;
    config.check_mode(mode)?;
    spec.validate()
}

/// Simulates exactly `trials` symbols with the seed carried by `spec`.
pub fn ber_point(config: &SchemeConfig, mode: Mode, spec: &ChannelSpec, trials: u64) -> Result<BerPoint> {
    ber_point_with(config, mode, spec, trials, Workers::default())
}

pub fn ber_point_with(
    config: &SchemeConfig,
    mode: Mode,
    spec: &ChannelSpec,
    trials: u64,
    workers: Workers,
) -> Result<BerPoint> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    prepare(config, mode, spec)?;
    let errors = count_parallel(config, mode, spec, 0, trials, workers)?;
    Ok(BerPoint::new(*config, mode, *spec, trials, errors))
}

/// Simulates under a [`StopRule`]. The trial count actually used is in the result.
pub fn ber_adaptive(
    config: &SchemeConfig,
    mode: Mode,
    spec: &ChannelSpec,
    rule: StopRule,
    workers: Workers,
) -> Result<BerPoint> {
    if rule.min_trials == 0 || rule.max_trials < rule.min_trials {
        return Err(Error::InvalidConfig(format!("invalid stop rule {rule:?}")));
    }
    prepare(config, mode, spec)?;
    let mut done = 0u64;
    let mut errors = 0u64;
    let mut next = rule.min_trials;
    loop {
        errors += count_parallel(config, mode, spec, done, next, workers)?;
        done = next;
        if errors >= rule.min_errors || done >= rule.max_trials {
            break;
        }
        next = (done * 2).min(rule.max_trials);
    }
    Ok(BerPoint::new(*config, mode, *spec, done, errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scheme;

    #[test]
    fn noiseless_is_error_free() {
        for scheme in Scheme::ALL {
            let cfg = SchemeConfig::new(scheme, 6);
            for &mode in scheme.supported_modes() {
                let p = ber_point(&cfg, mode, &ChannelSpec::noiseless(), 200).unwrap();
                assert_eq!(p.bit_errors, 0, "{scheme} {mode}");
                assert_eq!(p.ber, 0.0);
            }
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let cfg = SchemeConfig::new(Scheme::DcrkLora, 6);
        let spec = ChannelSpec::awgn(2.0, 77);
        let a = ber_point_with(&cfg, Mode::NonCoherent, &spec, 700, Workers(1)).unwrap();
        let b = ber_point_with(&cfg, Mode::NonCoherent, &spec, 700, Workers(3)).unwrap();
        assert_eq!(a.bit_errors, b.bit_errors);
        assert!(a.bit_errors > 0);
    }

    #[test]
    fn adaptive_extends_until_errors() {
        let cfg = SchemeConfig::new(Scheme::Lora, 5);
        let spec = ChannelSpec::awgn(4.0, 5);
        let rule = StopRule {
            min_trials: 64,
            min_errors: 100,
            max_trials: 1 << 16,
        };
        let p = ber_adaptive(&cfg, Mode::NonCoherent, &spec, rule, Workers(1)).unwrap();
        assert!(p.bit_errors >= 100 || p.trials == rule.max_trials);
        assert!(p.trials.is_power_of_two());
        // The first 64 trials are shared with a fixed-length run.
        let fixed = ber_point(&cfg, Mode::NonCoherent, &spec, p.trials).unwrap();
        assert_eq!(fixed.bit_errors, p.bit_errors);
    }

    #[test]
    fn unsupported_pair_is_an_error() {
        let cfg = SchemeConfig::new(Scheme::Gcss, 5);
        assert!(matches!(
            ber_point(&cfg, Mode::Coherent, &ChannelSpec::noiseless(), 10),
            Err(Error::UnsupportedMode { .. })
        ));
    }
}
