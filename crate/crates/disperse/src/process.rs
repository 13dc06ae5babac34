//! The three population processes.
//!
//! * dispersion — independent colonies, each with its own freshly drawn
//!   (λ, τ); survivors of a collapse each found a new colony. Simulated by
//!   generations through the embedded Galton-Watson process (V_n): every
//!   founder draws an environment and an offspring count from the exact
//!   transient law, so a generation costs O(V_n) regardless of real time.
//! * global — one population whose birth rate is redrawn for everyone at
//!   each renewal; the embedded chain observed at switch times is a
//!   branching process in a random environment shared within each epoch.
//!   Requires an independent (Λ, τ) coupling.
//! * fixed — the classical chain at a constant rate, run event-by-event.
//!
//! "Survives" is operationally: population reached `population_cap`, or
//! still alive after `max_generations`/`max_epochs` (or at the fixed model's
//! time horizon). Hitting the cap is always reported as such, never
//! silently truncated.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::birth_death::{
    gillespie_until, sample_population_at, transient_law, Termination, TrajectoryEvent,
};
use crate::env::{Coupling, EnvironmentLaw};
use crate::error::{Error, Result};
use crate::rng::exp_variate;

/// Default generation/epoch cap.
pub const DEFAULT_MAX_STEPS: u32 = 100;
/// Default population cap (survival proxy).
pub const DEFAULT_POPULATION_CAP: u64 = 100_000;
/// Default time horizon for the fixed-rate model.
pub const DEFAULT_FIXED_HORIZON: f64 = 200.0;

/// Which process to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Dispersion,
    Global,
    Fixed,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dispersion => "dispersion",
            Self::Global => "global",
            Self::Fixed => "fixed",
        })
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dispersion" => Ok(Self::Dispersion),
            "global" => Ok(Self::Global),
            "fixed" => Ok(Self::Fixed),
            other => Err(Error::Parse(format!(
                "unknown model '{other}' (expected dispersion, global or fixed)"
            ))),
        }
    }
}

/// Verdict of one simulated lineage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Extinct,
    SurvivedToCap,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Extinct => "Extinct",
            Self::SurvivedToCap => "SurvivedToCap",
        })
    }
}

impl FromStr for Verdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Extinct" => Ok(Self::Extinct),
            "SurvivedToCap" => Ok(Self::SurvivedToCap),
            other => Err(Error::Parse(format!("unknown verdict '{other}'"))),
        }
    }
}

/// Outcome of one trial.
///
/// For the generation/epoch models `stop_generation_or_epoch` is the step at
/// which the run stopped; the fixed model has no step structure and reports 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub verdict: Verdict,
    pub stop_generation_or_epoch: u32,
    pub stop_population: u64,
    pub peak_population: u64,
}

impl TrialOutcome {
    pub fn survived(&self) -> bool {
        self.verdict == Verdict::SurvivedToCap
    }
}

fn check_caps(max_steps: u32, population_cap: u64) -> Result<()> {
    if max_steps < 1 || population_cap < 1 {
        return Err(Error::InvalidParameter(format!(
            "caps must be >= 1 (got max steps {max_steps}, population cap {population_cap})"
        )));
    }
    Ok(())
}

/// Configuration of the dispersion (per-colony environment) model.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionConfig {
    env: EnvironmentLaw,
    max_generations: u32,
    population_cap: u64,
}

impl DispersionConfig {
    pub fn new(env: EnvironmentLaw, max_generations: u32, population_cap: u64) -> Result<Self> {
        check_caps(max_generations, population_cap)?;
        Ok(Self { env, max_generations, population_cap })
    }

    pub fn env(&self) -> &EnvironmentLaw {
        &self.env
    }

    pub fn max_generations(&self) -> u32 {
        self.max_generations
    }

    pub fn population_cap(&self) -> u64 {
        self.population_cap
    }
}

/// Configuration of the global (shared environment) model.
///
/// The survival dichotomy for this model assumes Λ and τ independent, so
/// construction rejects dependent couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalConfig {
    env: EnvironmentLaw,
    max_epochs: u32,
    population_cap: u64,
}

impl GlobalConfig {
    pub fn new(env: EnvironmentLaw, max_epochs: u32, population_cap: u64) -> Result<Self> {
        check_caps(max_epochs, population_cap)?;
        if env.coupling() != Coupling::Independent {
            return Err(Error::InvalidLaw(format!(
                "the global model requires independent coupling, got {}",
                env.coupling()
            )));
        }
        Ok(Self { env, max_epochs, population_cap })
    }

    pub fn env(&self) -> &EnvironmentLaw {
        &self.env
    }

    pub fn max_epochs(&self) -> u32 {
        self.max_epochs
    }

    pub fn population_cap(&self) -> u64 {
        self.population_cap
    }
}

/// Configuration of the classical fixed-rate baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedConfig {
    rate: f64,
    horizon: f64,
    population_cap: u64,
}

impl FixedConfig {
    pub fn new(rate: f64, horizon: f64, population_cap: u64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidParameter(format!("fixed rate must be >= 0, got {rate}")));
        }
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(Error::InvalidParameter(format!("horizon must be >= 0, got {horizon}")));
        }
        check_caps(1, population_cap)?;
        Ok(Self { rate, horizon, population_cap })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn population_cap(&self) -> u64 {
        self.population_cap
    }
}

/// One dispersion trial: generation recursion of the embedded process.
///
/// V_0 = 1; each of the V_n founders independently draws its own (λ, τ) and
/// an offspring count from the exact transient law. Stops at extinction, at
/// the population cap, or after `max_generations` with the lineage alive.
pub fn run_dispersion_trial<R: Rng + ?Sized>(
    cfg: &DispersionConfig,
    rng: &mut R,
) -> TrialOutcome {
    let mut population = 1u64;
    let mut peak = 1u64;
    let mut generation = 0u32;
    loop {
        if population == 0 {
            return TrialOutcome {
                verdict: Verdict::Extinct,
                stop_generation_or_epoch: generation,
                stop_population: 0,
                peak_population: peak,
            };
        }
        if population >= cfg.population_cap || generation >= cfg.max_generations {
            return TrialOutcome {
                verdict: Verdict::SurvivedToCap,
                stop_generation_or_epoch: generation,
                stop_population: population,
                peak_population: peak,
            };
        }
        let mut next = 0u64;
        for _ in 0..population {
            let (lambda, clock) = cfg.env.sample(rng);
            let law = transient_law(lambda, clock);
            next = next.saturating_add(law.sample(rng));
        }
        population = next;
        peak = peak.max(population);
        generation += 1;
    }
}

/// One global trial: epoch recursion Z_{k+1} = population of Z_k founders
/// after one shared (λ, τ) epoch. Same stopping rules with epochs in place
/// of generations.
pub fn run_global_trial<R: Rng + ?Sized>(cfg: &GlobalConfig, rng: &mut R) -> TrialOutcome {
    let mut population = 1u64;
    let mut peak = 1u64;
    let mut epoch = 0u32;
    loop {
        if population == 0 {
            return TrialOutcome {
                verdict: Verdict::Extinct,
                stop_generation_or_epoch: epoch,
                stop_population: 0,
                peak_population: peak,
            };
        }
        if population >= cfg.population_cap || epoch >= cfg.max_epochs {
            return TrialOutcome {
                verdict: Verdict::SurvivedToCap,
                stop_generation_or_epoch: epoch,
                stop_population: population,
                peak_population: peak,
            };
        }
        let (lambda, clock) = cfg.env.sample(rng);
        population = sample_population_at(lambda, clock, population, rng);
        peak = peak.max(population);
        epoch += 1;
    }
}

/// One classical fixed-rate trial via exact event simulation. Survival means
/// the cap was reached or the chain is alive at the horizon.
pub fn run_fixed_trial<R: Rng + ?Sized>(cfg: &FixedConfig, rng: &mut R) -> TrialOutcome {
    let run = gillespie_until(cfg.rate, cfg.horizon, 1, cfg.population_cap, false, rng);
    let verdict = match run.termination {
        Termination::Absorbed => Verdict::Extinct,
        Termination::CapReached | Termination::Horizon => Verdict::SurvivedToCap,
    };
    TrialOutcome {
        verdict,
        stop_generation_or_epoch: 0,
        stop_population: run.population,
        peak_population: run.peak,
    }
}

/// A model paired with its configuration; the unit the estimation harness
/// runs repeatedly.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialConfig {
    Dispersion(DispersionConfig),
    Global(GlobalConfig),
    Fixed(FixedConfig),
}

impl TrialConfig {
    pub fn model(&self) -> Model {
        match self {
            Self::Dispersion(_) => Model::Dispersion,
            Self::Global(_) => Model::Global,
            Self::Fixed(_) => Model::Fixed,
        }
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        match self {
            Self::Dispersion(cfg) => run_dispersion_trial(cfg, rng),
            Self::Global(cfg) => run_global_trial(cfg, rng),
            Self::Fixed(cfg) => run_fixed_trial(cfg, rng),
        }
    }

    /// Generation/epoch cap; 0 for the fixed model (it is time-bounded).
    pub fn max_steps(&self) -> u32 {
        match self {
            Self::Dispersion(cfg) => cfg.max_generations,
            Self::Global(cfg) => cfg.max_epochs,
            Self::Fixed(_) => 0,
        }
    }

    pub fn population_cap(&self) -> u64 {
        match self {
            Self::Dispersion(cfg) => cfg.population_cap,
            Self::Global(cfg) => cfg.population_cap,
            Self::Fixed(cfg) => cfg.population_cap,
        }
    }
}

// ---------------------------------------------------------------------------
// Trajectory mode: full event-driven paths
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Colony {
    lambda: f64,
    population: u64,
    collapse_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pending {
    BirthDeath,
    Collapse,
}

#[derive(Debug, Clone, Copy)]
struct Scheduled {
    time: f64,
    colony: usize,
    kind: Pending,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.colony == other.colony
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    // min-heap via Reverse at the call sites; ties broken by colony id so
    // simultaneous deterministic collapses process in a fixed order
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time.total_cmp(&other.time).then(self.colony.cmp(&other.colony))
    }
}

/// Full event-driven sample path of the selected model.
///
/// The first record is the bootstrap row (time 0, delta 0, population 1);
/// every later record is a birth or death. The trace ends at the horizon,
/// at extinction, or cleanly at the population cap.
pub fn run_trajectory<R: Rng + ?Sized>(
    cfg: &TrialConfig,
    horizon: f64,
    rng: &mut R,
) -> Vec<TrajectoryEvent> {
    assert!(horizon >= 0.0, "horizon must be >= 0");
    let mut events = vec![TrajectoryEvent { time: 0.0, delta: 0, population_after: 1 }];
    match cfg {
        TrialConfig::Fixed(fixed) => {
            let run =
                gillespie_until(fixed.rate, horizon, 1, fixed.population_cap, true, rng);
            events.extend(run.events.unwrap_or_default());
        }
        TrialConfig::Global(global) => {
            let mut population = 1u64;
            let mut now = 0.0;
            while population > 0 && population < global.population_cap && now < horizon {
                let (lambda, clock) = global.env.sample(rng);
                let segment = clock.min(horizon - now);
                let run = gillespie_until(
                    lambda,
                    segment,
                    population,
                    global.population_cap,
                    true,
                    rng,
                );
                if let Some(seg_events) = run.events {
                    events.extend(seg_events.into_iter().map(|mut e| {
                        e.time += now;
                        e
                    }));
                }
                population = run.population;
                now += run.elapsed;
                if run.termination == Termination::CapReached {
                    break;
                }
            }
        }
        TrialConfig::Dispersion(disp) => {
            dispersion_trajectory(disp, horizon, &mut events, rng);
        }
    }
    events
}

fn dispersion_trajectory<R: Rng + ?Sized>(
    cfg: &DispersionConfig,
    horizon: f64,
    events: &mut Vec<TrajectoryEvent>,
    rng: &mut R,
) {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut colonies: Vec<Colony> = Vec::new();
    let mut heap: BinaryHeap<Reverse<Scheduled>> = BinaryHeap::new();
    let mut total = 1u64;

    let schedule = |colony: &Colony,
                        id: usize,
                        now: f64,
                        heap: &mut BinaryHeap<Reverse<Scheduled>>,
                        rng: &mut R| {
        let rate = colony.population as f64 * (colony.lambda + 1.0);
        let bd_at = now + exp_variate(rate, rng);
        let (time, kind) = if bd_at < colony.collapse_at {
            (bd_at, Pending::BirthDeath)
        } else {
            (colony.collapse_at, Pending::Collapse)
        };
        heap.push(Reverse(Scheduled { time, colony: id, kind }));
    };

    let (lambda0, clock0) = cfg.env.sample(rng);
    let founder = Colony { lambda: lambda0, population: 1, collapse_at: clock0 };
    colonies.push(founder);
    schedule(&founder, 0, 0.0, &mut heap, rng);

    while let Some(Reverse(next)) = heap.pop() {
        if next.time > horizon || total == 0 || total >= cfg.population_cap {
            break;
        }
        let id = next.colony;
        match next.kind {
            Pending::BirthDeath => {
                let colony = &mut colonies[id];
                let p_birth = colony.lambda / (colony.lambda + 1.0);
                let delta: i8 = if rng.random::<f64>() < p_birth { 1 } else { -1 };
                colony.population =
                    if delta == 1 { colony.population + 1 } else { colony.population - 1 };
                total = if delta == 1 { total + 1 } else { total - 1 };
                events.push(TrajectoryEvent {
                    time: next.time,
                    delta,
                    population_after: total,
                });
                if colonies[id].population > 0 {
                    let colony = colonies[id];
                    schedule(&colony, id, next.time, &mut heap, rng);
                }
            }
            Pending::Collapse => {
                // every survivor founds a new colony with a fresh environment
                let survivors = colonies[id].population;
                for _ in 0..survivors {
                    let (lambda, clock) = cfg.env.sample(rng);
                    let colony = Colony {
                        lambda,
                        population: 1,
                        collapse_at: next.time + clock,
                    };
                    let new_id = colonies.len();
                    colonies.push(colony);
                    schedule(&colony, new_id, next.time, &mut heap, rng);
                }
            }
        }
    }
}
