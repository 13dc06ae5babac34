//! Repeated-trial estimation: survival frequencies with Wilson intervals,
//! deterministic per-trial streams, and parameter sweeps along the phase
//! boundary.
//!
//! Trial `i` of a run with master seed `s` always uses the stream seeded
//! `mix_seed(s, i)`, so estimates are bit-identical regardless of execution
//! order or degree of parallelism. Sweep points derive their seed from the
//! swept parameter's value bits, not its grid position: inserting a grid
//! point never perturbs the other points' trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use std::fmt;
use std::str::FromStr;

use crate::criteria::{criterion_m, MValue, Method};
use crate::env::{ClockLaw, EnvironmentLaw, RateLaw};
use crate::error::{Error, Result};
use crate::process::{
    DispersionConfig, FixedConfig, GlobalConfig, Model, TrialConfig,
};
use crate::rng::mix_seed;

/// z for a central 95% normal interval.
const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials` at 95% confidence.
/// Well-behaved at 0 or `trials` successes (returns exact 0/1 endpoints).
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the score interval's endpoints at 0 or n successes are exactly 0/1
    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, 1.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).clamp(0.0, 1.0) };
    (lo, hi)
}

/// Survival frequency over independent trials, with full provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalEstimate {
    pub n_trials: u64,
    pub n_survived: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
    /// Generation/epoch cap of the run (0 for the time-bounded fixed model).
    pub max_steps: u32,
    pub population_cap: u64,
}

/// Run `n_trials` independent trials of `cfg`; trial `i` uses the stream
/// seeded `mix_seed(master_seed, i)`. Trials run in parallel; the result is
/// independent of scheduling.
pub fn estimate_survival(cfg: &TrialConfig, n_trials: u64, master_seed: u64) -> SurvivalEstimate {
    assert!(n_trials >= 1, "need at least one trial");
    let n_survived: u64 = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(master_seed, i));
            u64::from(cfg.run(&mut rng).survived())
        })
        .sum();
    let (ci_low, ci_high) = wilson_interval(n_survived, n_trials);
    SurvivalEstimate {
        n_trials,
        n_survived,
        point: n_survived as f64 / n_trials as f64,
        ci_low,
        ci_high,
        master_seed,
        max_steps: cfg.max_steps(),
        population_cap: cfg.population_cap(),
    }
}

/// Which law parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Exponential clock rate `a`.
    ClockRate,
    /// Two-point probability of the lower rate.
    PLow,
    /// Lower rate of a two-point law (canonical order).
    Lambda1,
    /// Upper rate of a two-point law (canonical order).
    Lambda2,
    /// Deterministic clock time.
    T0,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ClockRate => "a",
            Self::PLow => "p",
            Self::Lambda1 => "lambda1",
            Self::Lambda2 => "lambda2",
            Self::T0 => "t0",
        })
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Self::ClockRate),
            "p" => Ok(Self::PLow),
            "lambda1" => Ok(Self::Lambda1),
            "lambda2" => Ok(Self::Lambda2),
            "t0" => Ok(Self::T0),
            other => Err(Error::Parse(format!(
                "unknown sweep parameter '{other}' (expected a, p, lambda1, lambda2 or t0)"
            ))),
        }
    }
}

impl SweepParam {
    /// Rebuild `env` with this parameter set to `value`; fails when the law
    /// shape does not carry the parameter or the value breaks an invariant.
    pub fn apply(&self, env: &EnvironmentLaw, value: f64) -> Result<EnvironmentLaw> {
        let (rate_law, clock_law) = (env.rate_law().clone(), env.clock_law().clone());
        let (rate_law, clock_law) = match self {
            Self::ClockRate => match clock_law {
                ClockLaw::Exponential { .. } => (rate_law, ClockLaw::exponential(value)?),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "sweep parameter 'a' needs an exponential clock law, got {other}"
                    )))
                }
            },
            Self::T0 => match clock_law {
                ClockLaw::Deterministic { .. } => (rate_law, ClockLaw::deterministic(value)?),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "sweep parameter 't0' needs a deterministic clock law, got {other}"
                    )))
                }
            },
            Self::PLow | Self::Lambda1 | Self::Lambda2 => match rate_law {
                RateLaw::TwoPoint { low, high, p_low } => {
                    let new = match self {
                        Self::PLow => RateLaw::two_point(low, high, value)?,
                        Self::Lambda1 => RateLaw::two_point(value, high, p_low)?,
                        Self::Lambda2 => RateLaw::two_point(low, value, p_low)?,
                        _ => unreachable!(),
                    };
                    (new, clock_law)
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "sweep parameter '{self}' needs a two_point rate law, got {other}"
                    )))
                }
            },
        };
        EnvironmentLaw::new(rate_law, clock_law, env.coupling())
    }
}

/// Binary survival prediction attached to a sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prediction {
    Survives,
    Dies,
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Survives => "Survives",
            Self::Dies => "Dies",
        })
    }
}

impl FromStr for Prediction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Survives" => Ok(Self::Survives),
            "Dies" => Ok(Self::Dies),
            other => Err(Error::Parse(format!("unknown prediction '{other}'"))),
        }
    }
}

fn predict(model: Model, env: &EnvironmentLaw, m: MValue) -> Prediction {
    let survives = match model {
        Model::Dispersion => m.is_infinite() || m.value() > 1.0,
        // fixed-model rate in sweeps is E(Λ), so both reduce to the mean
        Model::Global | Model::Fixed => env.mean_rate() > 1.0,
    };
    if survives {
        Prediction::Survives
    } else {
        Prediction::Dies
    }
}

/// One sweep grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub m: MValue,
    pub predicted: Prediction,
    pub estimate: SurvivalEstimate,
}

/// Outcome of one grid value: a row, or the diagnostic explaining why the
/// value was rejected (never silently skipped).
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: std::result::Result<SweepRow, String>,
}

/// Everything a sweep needs besides the grid itself.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub model: Model,
    pub env: EnvironmentLaw,
    pub max_steps: u32,
    pub population_cap: u64,
    /// Time horizon for fixed-model rows.
    pub fixed_horizon: f64,
    pub trials: u64,
    pub master_seed: u64,
}

/// Sub-stream index reserved for the criterion evaluation of a sweep point
/// (trial indices occupy 0..trials).
const CRITERION_STREAM: u64 = u64::MAX;

fn trial_config(model: Model, env: &EnvironmentLaw, spec: &SweepSpec) -> Result<TrialConfig> {
    Ok(match model {
        Model::Dispersion => TrialConfig::Dispersion(DispersionConfig::new(
            env.clone(),
            spec.max_steps,
            spec.population_cap,
        )?),
        Model::Global => TrialConfig::Global(GlobalConfig::new(
            env.clone(),
            spec.max_steps,
            spec.population_cap,
        )?),
        Model::Fixed => TrialConfig::Fixed(FixedConfig::new(
            env.mean_rate(),
            spec.fixed_horizon,
            spec.population_cap,
        )?),
    })
}

/// Sweep one parameter across `values`, in grid order.
///
/// Each point gets `mix_seed(master_seed, value.to_bits())` as its own
/// master seed, recomputes the criterion and predicted verdict for its law,
/// and runs a fresh survival estimate. Grid values that violate law
/// invariants yield a per-row diagnostic.
pub fn sweep(spec: &SweepSpec, param: SweepParam, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    Ok(values
        .iter()
        .map(|&value| {
            let outcome = sweep_point(spec, param, value).map_err(|e| e.to_string());
            SweepPoint { value, outcome }
        })
        .collect())
}

fn sweep_point(spec: &SweepSpec, param: SweepParam, value: f64) -> Result<SweepRow> {
    let env = param.apply(&spec.env, value)?;
    let point_seed = mix_seed(spec.master_seed, value.to_bits());
    let mut criterion_rng = ChaCha8Rng::seed_from_u64(mix_seed(point_seed, CRITERION_STREAM));
    let m = criterion_m(&env, Method::Auto, &mut criterion_rng)?;
    let predicted = predict(spec.model, &env, m);
    let cfg = trial_config(spec.model, &env, spec)?;
    let estimate = estimate_survival(&cfg, spec.trials, point_seed);
    Ok(SweepRow { param, value, m, predicted, estimate })
}
