//! The linear birth-death chain with per-individual birth rate λ and death
//! rate 1.
//!
//! Two complementary engines:
//!
//! 1. [`transient_law`] — the exact population law at a fixed time, started
//!    from one individual. It is geometric with a point mass at zero:
//!    `P(0) = alpha`, `P(n) = (1-alpha)(1-beta) beta^(n-1)` for `n >= 1`,
//!    where for `lambda != 1`
//!    `alpha = (e^((lambda-1)t) - 1) / (lambda e^((lambda-1)t) - 1)` and
//!    `beta = lambda * alpha`, and for `lambda = 1`
//!    `alpha = beta = t/(1+t)`. Sampling from it is O(1) per founder, which
//!    is what makes large population sweeps feasible.
//!
//! 2. [`gillespie_until`] — exact event-driven simulation of the same chain
//!    (direct method: exponential waiting time at total rate `n(lambda+1)`,
//!    birth with probability `lambda/(lambda+1)`). Used as an independent
//!    oracle for the closed form and for trajectory output.
//!
//! # Numerical form
//!
//! All exponentials of `x = (lambda-1)t` are evaluated through `expm1` in
//! one of two rearrangements, so no intermediate overflows for |x| up to 700
//! and the `lambda -> 1` limit is exact:
//!
//! - `x <= 0`: with `h = expm1(x)/x` (`h = 1` at `x = 0`),
//!   `alpha = h t / (lambda h t + 1)`.
//! - `x > 0`: with `num = -expm1(-x)`,
//!   `alpha = num / ((lambda - 1) + num)`.

use rand::Rng;

use crate::rng::{exp_variate, geometric_variate};

/// Exact law of the population at a fixed time, started from one individual.
///
/// Both `alpha`/`beta` and their complements are computed directly from
/// stable rearrangements (never as `1 - value`), so the geometric tail stays
/// exact even when `beta` is within an ulp of 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffspringLaw {
    lambda: f64,
    time: f64,
    alpha: f64,
    beta: f64,
    one_minus_alpha: f64,
    one_minus_beta: f64,
    mean: f64,
}

/// Population law of the chain at time `time`, started from one individual.
///
/// Requires `lambda >= 0` and `time >= 0`; `time = 0` yields the degenerate
/// law `P(1) = 1`.
pub fn transient_law(lambda: f64, time: f64) -> OffspringLaw {
    assert!(lambda >= 0.0 && lambda.is_finite(), "birth rate must be finite and >= 0");
    assert!(time >= 0.0 && time.is_finite(), "time must be finite and >= 0");

    let x = (lambda - 1.0) * time;
    // (alpha, 1-alpha, beta, 1-beta)
    let (alpha, om_alpha, beta, om_beta) = if time == 0.0 {
        (0.0, 1.0, 0.0, 1.0)
    } else if lambda == 0.0 {
        ((-(-time).exp_m1()).clamp(0.0, 1.0), (-time).exp(), 0.0, 1.0)
    } else if x > 0.0 {
        let num = -(-x).exp_m1();
        let denom = (lambda - 1.0) + num;
        (
            num / denom,
            (lambda - 1.0) / denom,
            lambda * num / denom,
            (lambda - 1.0) * (-x).exp() / denom,
        )
    } else {
        let h = if x == 0.0 { 1.0 } else { x.exp_m1() / x };
        let denom = lambda * h * time + 1.0;
        (h * time / denom, x.exp() / denom, lambda * h * time / denom, 1.0 / denom)
    };

    OffspringLaw {
        lambda,
        time,
        alpha: alpha.clamp(0.0, 1.0),
        beta: beta.clamp(0.0, 1.0),
        one_minus_alpha: om_alpha.clamp(0.0, 1.0),
        one_minus_beta: om_beta.clamp(0.0, 1.0),
        mean: x.exp(),
    }
}

impl OffspringLaw {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Mass at zero (extinction by `time`).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Geometric decay of the positive part.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Survival probability `1 - alpha`, computed without cancellation.
    pub fn one_minus_alpha(&self) -> f64 {
        self.one_minus_alpha
    }

    /// `1 - beta`, computed without cancellation.
    pub fn one_minus_beta(&self) -> f64 {
        self.one_minus_beta
    }

    /// `e^((lambda-1) time)`, the exact mean.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `P(population = n)`.
    pub fn pmf(&self, n: u64) -> f64 {
        if n == 0 {
            self.alpha
        } else {
            self.one_minus_alpha * self.one_minus_beta * self.beta.powf((n - 1) as f64)
        }
    }

    /// One draw: 0 with probability `alpha`, else `1 + Geometric(1 - beta)`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if rng.random::<f64>() < self.alpha {
            0
        } else {
            1u64.saturating_add(geometric_variate(self.one_minus_beta, rng))
        }
    }
}

/// Shorthand for a single draw from [`transient_law`].
#[inline]
pub fn sample_offspring<R: Rng + ?Sized>(law: &OffspringLaw, rng: &mut R) -> u64 {
    law.sample(rng)
}

/// Population at `time` started from `n0` individuals: by the branching
/// property, the sum of `n0` independent draws from [`transient_law`].
/// Saturates at `u64::MAX`.
pub fn sample_population_at<R: Rng + ?Sized>(
    lambda: f64,
    time: f64,
    n0: u64,
    rng: &mut R,
) -> u64 {
    assert!(n0 >= 1, "n0 must be >= 1");
    let law = transient_law(lambda, time);
    let mut total = 0u64;
    for _ in 0..n0 {
        total = total.saturating_add(law.sample(rng));
    }
    total
}

/// One recorded population change.
///
/// `delta` is +1 (birth) or -1 (death); trajectory output reserves 0 for the
/// initial bootstrap record. Events are time-ordered and `population_after`
/// changes by exactly `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub delta: i8,
    pub population_after: u64,
}

/// How a Gillespie run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Reached the time horizon with the population still in (0, cap).
    Horizon,
    /// Absorbed at population 0.
    Absorbed,
    /// Population reached the cap; reported distinctly, never truncated away.
    CapReached,
}

/// Result of one event-driven run.
#[derive(Debug, Clone)]
pub struct GillespieRun {
    pub population: u64,
    pub termination: Termination,
    pub peak: u64,
    pub elapsed: f64,
    /// Present only when event recording was requested.
    pub events: Option<Vec<TrajectoryEvent>>,
}

/// Exact simulation of the chain from `n0` individuals until `horizon`,
/// absorption at 0, or the population cap, whichever comes first.
///
/// Event times are relative to the start of the run. Requires `cap >= n0`.
pub fn gillespie_until<R: Rng + ?Sized>(
    lambda: f64,
    horizon: f64,
    n0: u64,
    cap: u64,
    record_events: bool,
    rng: &mut R,
) -> GillespieRun {
    assert!(lambda >= 0.0, "birth rate must be >= 0");
    assert!(horizon >= 0.0, "horizon must be >= 0");
    assert!(n0 >= 1 && cap >= n0, "need 1 <= n0 <= cap");

    let mut events = record_events.then(Vec::new);
    let mut n = n0;
    let mut peak = n0;
    let mut t = 0.0;
    let p_birth = lambda / (lambda + 1.0);

    let termination = loop {
        if n == 0 {
            break Termination::Absorbed;
        }
        if n >= cap {
            break Termination::CapReached;
        }
        let total_rate = n as f64 * (lambda + 1.0);
        let wait = exp_variate(total_rate, rng);
        if t + wait > horizon {
            t = horizon;
            break Termination::Horizon;
        }
        t += wait;
        let delta: i8 = if rng.random::<f64>() < p_birth { 1 } else { -1 };
        n = if delta == 1 { n + 1 } else { n - 1 };
        peak = peak.max(n);
        if let Some(ev) = events.as_mut() {
            ev.push(TrajectoryEvent { time: t, delta, population_after: n });
        }
    };

    GillespieRun { population: n, termination, peak, elapsed: t, events }
}
