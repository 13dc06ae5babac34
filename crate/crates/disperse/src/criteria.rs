//! Survival criteria and extinction probabilities.
//!
//! The dispersion process survives with positive probability exactly when
//! the mean offspring number of its embedded generation process exceeds one:
//! `m = E[exp((Λ-1)τ)] > 1`. The globally switching process instead follows
//! the Smith-Wilkinson dichotomy, which under an independent (Λ, τ) reduces
//! to `E(Λ) > 1`. Jensen's inequality links the two:
//! `m >= exp(E(Λ-1) E(τ))`, with equality only for degenerate environments,
//! which is why a randomly dispersing population can survive where the
//! fixed-rate chain with the same mean cannot.
//!
//! `m` is evaluated by up to three routes — exact summation (two-point or
//! discrete rates under an exponential clock), adaptive quadrature, and
//! plain Monte Carlo — that cross-check one another in the test suite.
//! Divergence (`m = +inf`) is decided symbolically from the law parameters,
//! never by letting a numeric integral overflow.

use std::fmt;

use rand::Rng;

use crate::env::{ClockLaw, Coupling, EnvironmentLaw, RateLaw};
use crate::error::{Error, Result};
use crate::quad;

/// Default draw count for Monte Carlo evaluation of `m`.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

/// Absolute tolerance for the quadrature route.
const QUAD_TOL: f64 = 1e-10;
/// Tighter tolerance for the inner integral of a nested (rate x clock) rule.
const INNER_QUAD_TOL: f64 = 1e-12;
/// Relative mass allowed in the truncated exponential tail.
const TAIL_EPS: f64 = 1e-13;
/// Fixed-point tolerance for extinction probabilities.
const PGF_TOL: f64 = 1e-12;
/// Iteration cap for the fixed-point loop.
const PGF_MAX_ITER: usize = 1_000_000;
/// Bootstrap resamples behind the extinction-probability standard error.
const BOOTSTRAP_RESAMPLES: usize = 100;

/// How to evaluate the dispersion criterion `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Most exact applicable route: closed form, else quadrature, else
    /// (for dependent couplings) Monte Carlo with [`DEFAULT_MC_SAMPLES`].
    Auto,
    /// Exact summation; applies to discrete rates under an exponential clock.
    ClosedForm,
    /// Adaptive quadrature over the clock (and rate, when continuous).
    Quadrature,
    /// Sample mean of `exp((λ-1)t)` over joint draws; the only route for
    /// dependent couplings.
    MonteCarlo { samples: usize },
}

/// The value of `m = E[exp((Λ-1)τ)]`, possibly infinite or estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MValue {
    /// Closed form or quadrature result.
    Exact(f64),
    /// Symbolically divergent (`m = +inf`).
    Infinite,
    /// Monte Carlo estimate with its standard error.
    Estimated { mean: f64, std_error: f64, samples: usize },
}

impl MValue {
    /// Numeric value, `+inf` when divergent.
    pub fn value(&self) -> f64 {
        match self {
            Self::Exact(v) => *v,
            Self::Infinite => f64::INFINITY,
            Self::Estimated { mean, .. } => *mean,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite) || self.value().is_infinite()
    }

    pub fn std_error(&self) -> Option<f64> {
        match self {
            Self::Estimated { std_error, .. } => Some(*std_error),
            _ => None,
        }
    }

    /// Survival verdict for the dispersion process: survives iff `m > 1`
    /// (`m = 1` dies). A Monte Carlo estimate within 3 standard errors of 1
    /// refuses to decide.
    pub fn dispersion_verdict(&self) -> DispersionVerdict {
        match self {
            Self::Infinite => DispersionVerdict::Survives,
            Self::Exact(v) => {
                if *v > 1.0 {
                    DispersionVerdict::Survives
                } else {
                    DispersionVerdict::Dies
                }
            }
            Self::Estimated { mean, std_error, .. } => {
                if (mean - 1.0).abs() < 3.0 * std_error {
                    DispersionVerdict::Inconclusive
                } else if *mean > 1.0 {
                    DispersionVerdict::Survives
                } else {
                    DispersionVerdict::Dies
                }
            }
        }
    }
}

/// Verdict for the dispersion model. `Inconclusive` is surfaced only by the
/// Monte Carlo route, when the estimate cannot resolve the sign of `m - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionVerdict {
    Survives,
    Dies,
    Inconclusive,
}

impl fmt::Display for DispersionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Survives => "Survives",
            Self::Dies => "Dies",
            Self::Inconclusive => "Inconclusive",
        })
    }
}

/// Verdict for the global model; not applicable under dependent couplings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GlobalVerdict {
    Survives,
    Dies,
    NotApplicable(String),
}

impl fmt::Display for GlobalVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Survives => f.write_str("Survives"),
            Self::Dies => f.write_str("Dies"),
            Self::NotApplicable(reason) => write!(f, "NotApplicable({reason})"),
        }
    }
}

/// Decide `m = +inf` from the law parameters alone.
///
/// Only an exponential clock can diverge: under rate `a` the inner
/// expectation `E[e^((λ-1)τ)]` is infinite as soon as `λ >= a + 1`. Which λ
/// matters depends on the coupling: the one paired with arbitrarily long
/// clocks — the top of the support when independent or comonotone, the
/// bottom when antimonotone. Bounded clocks always give a finite `m`.
fn symbolically_infinite(env: &EnvironmentLaw) -> bool {
    let ClockLaw::Exponential { rate: a } = env.clock_law() else {
        return false;
    };
    let threshold = a + 1.0;
    let critical_rate = match env.coupling() {
        Coupling::Independent | Coupling::Comonotone => env.rate_law().support_max(),
        Coupling::Antimonotone => support_min(env.rate_law()),
    };
    critical_rate >= threshold
}

fn support_min(law: &RateLaw) -> f64 {
    match law {
        RateLaw::PointMass { rate } => *rate,
        RateLaw::TwoPoint { low, high, p_low } => {
            if *p_low > 0.0 {
                *low
            } else {
                *high
            }
        }
        RateLaw::FiniteDiscrete { atoms } => atoms[0].0,
        RateLaw::UniformInterval { lo, .. } => *lo,
    }
}

/// `E[e^((λ-1)τ)]` for one fixed rate, numerically for exponential clocks
/// and as an exact finite sum otherwise.
fn clock_expectation(lambda: f64, clock: &ClockLaw, tol: f64) -> f64 {
    match clock {
        ClockLaw::Deterministic { time } => ((lambda - 1.0) * time).exp(),
        ClockLaw::FiniteDiscrete { atoms } => {
            atoms.iter().map(|(t, q)| q * ((lambda - 1.0) * t).exp()).sum()
        }
        ClockLaw::Exponential { rate: a } => {
            // integrand a e^{(λ-1-a) t}; decay r > 0 since divergence was
            // ruled out symbolically before this point
            let r = a + 1.0 - lambda;
            debug_assert!(r > 0.0);
            let t_max = (a / (r * TAIL_EPS)).ln().max(0.0) / r;
            quad::integrate(&|t| a * ((lambda - 1.0 - a) * t).exp(), 0.0, t_max, tol)
        }
    }
}

/// Evaluate `m = E[exp((Λ-1)τ)]`.
///
/// `rng` is consumed only by the Monte Carlo route. Divergent configurations
/// return [`MValue::Infinite`] for every method.
pub fn criterion_m<R: Rng + ?Sized>(
    env: &EnvironmentLaw,
    method: Method,
    rng: &mut R,
) -> Result<MValue> {
    if symbolically_infinite(env) {
        return Ok(MValue::Infinite);
    }
    match method {
        Method::Auto => {
            if env.coupling() != Coupling::Independent {
                criterion_m(env, Method::MonteCarlo { samples: DEFAULT_MC_SAMPLES }, rng)
            } else if closed_form_applies(env) {
                criterion_m(env, Method::ClosedForm, rng)
            } else {
                criterion_m(env, Method::Quadrature, rng)
            }
        }
        Method::ClosedForm => {
            if !closed_form_applies(env) {
                return Err(Error::MethodNotApplicable(format!(
                    "closed form needs a discrete rate law under an exponential clock with \
                     independent coupling; got {env}"
                )));
            }
            let ClockLaw::Exponential { rate: a } = env.clock_law() else { unreachable!() };
            let atoms = env.rate_law().atoms().expect("discrete rate law");
            let m = atoms.iter().map(|(l, p)| p * a / (a + 1.0 - l)).sum();
            Ok(MValue::Exact(m))
        }
        Method::Quadrature => {
            if env.coupling() != Coupling::Independent {
                return Err(Error::MethodNotApplicable(
                    "quadrature applies only to independent couplings; use monte_carlo".into(),
                ));
            }
            let m = match env.rate_law() {
                RateLaw::UniformInterval { lo, hi } => {
                    if lo == hi {
                        clock_expectation(*lo, env.clock_law(), QUAD_TOL)
                    } else {
                        let width = hi - lo;
                        quad::integrate(
                            &|l| clock_expectation(l, env.clock_law(), INNER_QUAD_TOL) / width,
                            *lo,
                            *hi,
                            QUAD_TOL,
                        )
                    }
                }
                discrete => discrete
                    .atoms()
                    .expect("discrete rate law")
                    .iter()
                    .map(|(l, p)| p * clock_expectation(*l, env.clock_law(), QUAD_TOL))
                    .sum(),
            };
            Ok(MValue::Exact(m))
        }
        Method::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("monte_carlo needs samples >= 1".into()));
            }
            // Welford running moments
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for i in 0..samples {
                let (lambda, t) = env.sample(rng);
                let v = ((lambda - 1.0) * t).exp();
                let delta = v - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (v - mean);
            }
            let std_error = if samples > 1 {
                (m2 / (samples - 1) as f64 / samples as f64).sqrt()
            } else {
                f64::INFINITY
            };
            Ok(MValue::Estimated { mean, std_error, samples })
        }
    }
}

fn closed_form_applies(env: &EnvironmentLaw) -> bool {
    env.coupling() == Coupling::Independent
        && env.rate_law().is_discrete()
        && matches!(env.clock_law(), ClockLaw::Exponential { .. })
}

/// Critical exponential-clock rate for a two-point rate law with
/// `0 <= λ1 <= 1 < λ2` and `p = P(λ1)`: the dispersion process survives iff
/// the clock rate is below it. `None` when `E(Λ) >= 1` (then survival holds
/// for every clock rate).
pub fn critical_a(lambda1: f64, lambda2: f64, p: f64) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&lambda1) || lambda2 <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "critical_a needs 0 <= λ1 <= 1 < λ2, got λ1={lambda1}, λ2={lambda2}"
        )));
    }
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidParameter(format!("critical_a needs p in (0,1), got {p}")));
    }
    let mean = p * lambda1 + (1.0 - p) * lambda2;
    if mean >= 1.0 {
        return Ok(None);
    }
    Ok(Some((1.0 - lambda1) * (1.0 - lambda2) / (mean - 1.0)))
}

/// Survival dichotomy for the globally switching model: survives iff
/// `E(Λ) > 1`, assuming Λ and τ independent with finite means (guaranteed by
/// construction, asserted anyway).
pub fn classify_global(env: &EnvironmentLaw) -> GlobalVerdict {
    if env.coupling() != Coupling::Independent {
        return GlobalVerdict::NotApplicable(format!(
            "the global criterion assumes independent coupling; law has {}",
            env.coupling()
        ));
    }
    assert!(env.mean_rate().is_finite(), "E(Λ) must be finite");
    assert!(env.mean_clock().is_finite(), "E(τ) must be finite");
    if env.mean_rate() > 1.0 {
        GlobalVerdict::Survives
    } else {
        GlobalVerdict::Dies
    }
}

/// `exp(E(Λ-1) E(τ))`: Jensen's lower bound for `m` under independence, and
/// simultaneously the exponential of the Smith-Wilkinson quantity
/// `E(ln b(τ, Λ))` for the global model.
pub fn jensen_lower_bound(env: &EnvironmentLaw) -> Result<f64> {
    if env.coupling() != Coupling::Independent {
        return Err(Error::InvalidParameter(
            "the Jensen bound requires independent coupling".into(),
        ));
    }
    Ok(jensen_from_marginals(env))
}

fn jensen_from_marginals(env: &EnvironmentLaw) -> f64 {
    ((env.mean_rate() - 1.0) * env.mean_clock()).exp()
}

// ---------------------------------------------------------------------------
// Extinction probability via the empirical pgf
// ---------------------------------------------------------------------------

/// Extinction probability of the embedded generation process with a
/// bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtinctionEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Offspring sample aggregated by count, with pgf evaluation.
struct EmpiricalPgf {
    /// distinct offspring counts, ascending
    counts: Vec<u64>,
    /// multiplicity of each count
    multiplicity: Vec<u64>,
    total: u64,
}

impl EmpiricalPgf {
    fn from_draws(draws: &[u64]) -> Self {
        let mut sorted = draws.to_vec();
        sorted.sort_unstable();
        let mut counts = Vec::new();
        let mut multiplicity: Vec<u64> = Vec::new();
        for &k in &sorted {
            match counts.last() {
                Some(&last) if last == k => *multiplicity.last_mut().unwrap() += 1,
                _ => {
                    counts.push(k);
                    multiplicity.push(1);
                }
            }
        }
        Self { counts, multiplicity, total: draws.len() as u64 }
    }

    fn mean_with(&self, mult: &[u64]) -> f64 {
        let n: u64 = mult.iter().sum();
        self.counts
            .iter()
            .zip(mult)
            .map(|(&k, &m)| k as f64 * m as f64)
            .sum::<f64>()
            / n as f64
    }

    fn eval_with(&self, mult: &[u64], s: f64) -> f64 {
        let n: u64 = mult.iter().sum();
        self.counts
            .iter()
            .zip(mult)
            .filter(|(_, &m)| m > 0)
            .map(|(&k, &m)| m as f64 * s.powf(k as f64))
            .sum::<f64>()
            / n as f64
    }

    /// Smallest fixed point of the pgf on [0, 1], reached by iterating up
    /// from 0; 1 outright when the sample mean is subcritical.
    fn smallest_root(&self, mult: &[u64]) -> f64 {
        if self.mean_with(mult) <= 1.0 {
            return 1.0;
        }
        let mut q = 0.0;
        for _ in 0..PGF_MAX_ITER {
            let next = self.eval_with(mult, q).clamp(0.0, 1.0);
            if (next - q).abs() <= PGF_TOL {
                return next;
            }
            q = next;
        }
        q
    }
}

/// Estimate the extinction probability of the dispersion model's embedded
/// generation process by fixed-point iteration on the empirical pgf of
/// first-generation offspring counts.
///
/// Requires `n_samples >= 10_000`. Reports probability 1 whenever the
/// empirical offspring mean is at most 1; the standard error comes from
/// multinomial bootstrap resampling of the draws.
pub fn gw_extinction_prob<R: Rng + ?Sized>(
    env: &EnvironmentLaw,
    n_samples: usize,
    rng: &mut R,
) -> Result<ExtinctionEstimate> {
    if n_samples < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "gw_extinction_prob needs n_samples >= 10000, got {n_samples}"
        )));
    }
    let draws: Vec<u64> = (0..n_samples)
        .map(|_| {
            let (lambda, t) = env.sample(rng);
            crate::birth_death::transient_law(lambda, t).sample(rng)
        })
        .collect();
    let pgf = EmpiricalPgf::from_draws(&draws);
    let q = pgf.smallest_root(&pgf.multiplicity);

    // multinomial bootstrap over the aggregated counts
    let cumulative: Vec<u64> = pgf
        .multiplicity
        .iter()
        .scan(0u64, |acc, &m| {
            *acc += m;
            Some(*acc)
        })
        .collect();
    let mut roots = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resampled = vec![0u64; pgf.counts.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        resampled.fill(0);
        let last = resampled.len() - 1;
        for _ in 0..pgf.total {
            let u = rng.random::<f64>() * pgf.total as f64;
            let idx = cumulative.partition_point(|&c| (c as f64) <= u);
            resampled[idx.min(last)] += 1;
        }
        roots.push(pgf.smallest_root(&resampled));
    }
    let mean_root: f64 = roots.iter().sum::<f64>() / roots.len() as f64;
    let var = roots.iter().map(|r| (r - mean_root).powi(2)).sum::<f64>()
        / (roots.len() - 1) as f64;

    Ok(ExtinctionEstimate { probability: q, std_error: var.sqrt(), n_samples })
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

/// Everything the criteria say about one environment law.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub m: MValue,
    pub mean_rate: f64,
    pub mean_clock: f64,
    pub jensen_lower_bound: f64,
    pub a_critical: Option<f64>,
    pub dispersion_verdict: DispersionVerdict,
    pub global_verdict: GlobalVerdict,
}

impl CriterionReport {
    /// Evaluate all criteria for `env`. `rng` is used only when the method
    /// resolves to Monte Carlo.
    pub fn evaluate<R: Rng + ?Sized>(
        env: &EnvironmentLaw,
        method: Method,
        rng: &mut R,
    ) -> Result<Self> {
        let m = criterion_m(env, method, rng)?;
        let a_critical = match env.rate_law() {
            RateLaw::TwoPoint { low, high, p_low }
                if *low <= 1.0 && *high > 1.0 && *p_low > 0.0 && *p_low < 1.0 =>
            {
                critical_a(*low, *high, *p_low)?
            }
            _ => None,
        };
        Ok(Self {
            m,
            mean_rate: env.mean_rate(),
            mean_clock: env.mean_clock(),
            jensen_lower_bound: jensen_from_marginals(env),
            a_critical,
            dispersion_verdict: m.dispersion_verdict(),
            global_verdict: classify_global(env),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ClockLaw, RateLaw};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn env(mu: &str, nu: &str) -> EnvironmentLaw {
        EnvironmentLaw::independent(mu.parse().unwrap(), nu.parse().unwrap()).unwrap()
    }

    fn exact_m(env: &EnvironmentLaw, method: Method) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        criterion_m(env, method, &mut rng).unwrap().value()
    }

    #[test]
    fn closed_form_two_point() {
        let e = env("two_point:0,2,0.5", "exp:1.5");
        let m = exact_m(&e, Method::ClosedForm);
        assert!((m - 1.8).abs() < 1e-12, "m {m}");
        let q = exact_m(&e, Method::Quadrature);
        assert!((q - 1.8).abs() < 1e-9, "quadrature {q}");
    }

    #[test]
    fn point_mass_one_is_exactly_critical() {
        for nu in ["exp:0.3", "det:5", "discrete:1:0.5,2:0.5"] {
            let e = env("point:1", nu);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let m = criterion_m(&e, Method::Auto, &mut rng).unwrap();
            assert!((m.value() - 1.0).abs() < 1e-10, "nu={nu}: m {:?}", m);
            assert_eq!(m.dispersion_verdict(), DispersionVerdict::Dies);
        }
    }

    #[test]
    fn divergence_is_symbolic() {
        // λ2 = a + 1 exactly: infinite, decided without any integration
        let e = env("two_point:0,2,0.5", "exp:1");
        for method in [
            Method::Auto,
            Method::ClosedForm,
            Method::Quadrature,
            Method::MonteCarlo { samples: 10 },
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            assert_eq!(criterion_m(&e, method, &mut rng).unwrap(), MValue::Infinite);
        }
        assert_eq!(MValue::Infinite.dispersion_verdict(), DispersionVerdict::Survives);
        // just below the threshold stays finite
        let e = env("two_point:0,2,0.5", "exp:1.0000001");
        assert!(exact_m(&e, Method::ClosedForm).is_finite());
    }

    #[test]
    fn quadrature_matches_closed_form_on_grid() {
        for a in [0.6, 0.7, 1.0, 1.2, 3.0] {
            let e = env("two_point:0.5,1.5,0.8", &format!("exp:{a}"));
            let cf = exact_m(&e, Method::ClosedForm);
            let q = exact_m(&e, Method::Quadrature);
            assert!((cf - q).abs() < 1e-9, "a={a}: cf {cf} vs quad {q}");
        }
    }

    #[test]
    fn sweep_row_m_values() {
        // frozen closed-form values for the two-point phase boundary
        let m = |a: f64| exact_m(&env("two_point:0.5,1.5,0.8", &format!("exp:{a}")), Method::Auto);
        assert!((m(0.6) - 18.0 / 11.0).abs() < 1e-12);
        assert!((m(0.7) - 7.0 / 6.0).abs() < 1e-12);
        assert!((m(1.0) - 14.0 / 15.0).abs() < 1e-12);
        assert!(m(0.3).is_infinite()); // a <= λ2 - 1
    }

    #[test]
    fn quadrature_uniform_rate_against_analytic_integral() {
        // uniform Λ on [0, 2] under exp(3): ∫ (1/2) 3/(4-λ) dλ = 1.5 ln 2
        let e = env("uniform:0,2", "exp:3");
        let q = exact_m(&e, Method::Quadrature);
        let expected = 1.5 * LN_2;
        assert!((q - expected).abs() < 1e-9, "{q} vs {expected}");
        // degenerate uniform behaves like a point mass: a/(a+1-λ) = 3/2
        let e = env("uniform:2,2", "exp:3");
        assert!((exact_m(&e, Method::Quadrature) - 1.5).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_agrees_within_four_se() {
        let e = env("two_point:0.5,1.5,0.8", "exp:2");
        let truth = exact_m(&e, Method::ClosedForm); // 0.8*2/2.5 + 0.2*2/1.5
        assert!((truth - (0.64 + 0.4 / 1.5)).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mc = criterion_m(&e, Method::MonteCarlo { samples: 200_000 }, &mut rng).unwrap();
        let MValue::Estimated { mean, std_error, .. } = mc else { panic!("{mc:?}") };
        assert!((mean - truth).abs() < 4.0 * std_error, "mc {mean} vs {truth} (se {std_error})");
    }

    #[test]
    fn monte_carlo_is_only_route_for_dependent_couplings() {
        let dep = EnvironmentLaw::new(
            RateLaw::uniform(0.0, 1.8).unwrap(),
            ClockLaw::exponential(1.0).unwrap(),
            Coupling::Comonotone,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            criterion_m(&dep, Method::Auto, &mut rng).unwrap(),
            MValue::Estimated { .. }
        ));
        assert!(criterion_m(&dep, Method::Quadrature, &mut rng).is_err());
        assert!(criterion_m(&dep, Method::ClosedForm, &mut rng).is_err());
        assert!(jensen_lower_bound(&dep).is_err());
    }

    #[test]
    fn antimonotone_divergence_uses_support_min() {
        // high rates pair with short clocks, so only the low edge matters
        let anti = EnvironmentLaw::new(
            RateLaw::uniform(2.5, 4.0).unwrap(),
            ClockLaw::exponential(1.0).unwrap(),
            Coupling::Antimonotone,
        )
        .unwrap();
        assert!(symbolically_infinite(&anti)); // lo = 2.5 >= a+1 = 2
        let como = EnvironmentLaw::new(
            RateLaw::uniform(0.0, 1.5).unwrap(),
            ClockLaw::exponential(1.0).unwrap(),
            Coupling::Comonotone,
        )
        .unwrap();
        assert!(!symbolically_infinite(&como));
    }

    #[test]
    fn critical_a_examples() {
        let a = critical_a(0.5, 1.5, 0.8).unwrap().unwrap();
        assert!((a - 5.0 / 6.0).abs() < 1e-12, "a_c {a}");
        assert_eq!(critical_a(0.5, 1.5, 0.5).unwrap(), None); // E(Λ) = 1
        let a = critical_a(0.0, 2.0, 0.9).unwrap().unwrap();
        assert!((a - 1.25).abs() < 1e-12);
        assert!(critical_a(1.2, 2.0, 0.5).is_err()); // λ1 > 1
        assert!(critical_a(0.5, 0.9, 0.5).is_err()); // λ2 <= 1
        assert!(critical_a(0.5, 1.5, 0.0).is_err());
    }

    #[test]
    fn critical_a_matches_bisection_on_m() {
        // independent route: solve m(a) = 1 by bisection on the closed form
        for (l1, l2, p) in [(0.5, 1.5, 0.8), (0.0, 2.0, 0.9)] {
            let m_of = |a: f64| {
                let mu = RateLaw::two_point(l1, l2, p).unwrap();
                let nu = ClockLaw::exponential(a).unwrap();
                let e = EnvironmentLaw::independent(mu, nu).unwrap();
                exact_m(&e, Method::ClosedForm)
            };
            let (mut lo, mut hi) = (l2 - 1.0 + 1e-9, 50.0);
            assert!(m_of(lo) > 1.0 && m_of(hi) < 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if m_of(mid) > 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let bisected = 0.5 * (lo + hi);
            let analytic = critical_a(l1, l2, p).unwrap().unwrap();
            assert!((bisected - analytic).abs() < 1e-9, "{bisected} vs {analytic}");
        }
    }

    #[test]
    fn m_straddles_one_at_critical_a() {
        let a_c = critical_a(0.5, 1.5, 0.8).unwrap().unwrap();
        let m_of = |a: f64| exact_m(&env("two_point:0.5,1.5,0.8", &format!("exp:{a}")), Method::Auto);
        assert!(m_of(a_c * (1.0 - 1e-6)) > 1.0);
        assert!(m_of(a_c * (1.0 + 1e-6)) < 1.0);
    }

    #[test]
    fn global_classification() {
        assert_eq!(classify_global(&env("two_point:0.5,1.5,0.8", "exp:1")), GlobalVerdict::Dies);
        assert_eq!(classify_global(&env("point:2", "exp:1")), GlobalVerdict::Survives);
        // strict inequality: E(Λ) = 1 dies
        assert_eq!(classify_global(&env("two_point:0,2,0.5", "exp:1.5")), GlobalVerdict::Dies);
        let dep = EnvironmentLaw::new(
            RateLaw::two_point(0.0, 2.0, 0.5).unwrap(),
            ClockLaw::finite_discrete(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap(),
            Coupling::Comonotone,
        )
        .unwrap();
        assert!(matches!(classify_global(&dep), GlobalVerdict::NotApplicable(_)));
    }

    #[test]
    fn jensen_bound_examples() {
        // E(Λ) = 1: bound is exactly 1 while m = 1.8
        let e = env("two_point:0,2,0.5", "exp:1.5");
        assert!((jensen_lower_bound(&e).unwrap() - 1.0).abs() < 1e-15);
        assert!(exact_m(&e, Method::Auto) > jensen_lower_bound(&e).unwrap());

        // degenerate laws: equality with m
        let e = env("point:0.7", "det:2");
        let bound = jensen_lower_bound(&e).unwrap();
        assert!((bound - (-0.6f64).exp()).abs() < 1e-15);
        assert!((exact_m(&e, Method::Quadrature) - bound).abs() < 1e-12);

        // subcritical two-point example: exp(-0.3) <= m = 14/15
        let e = env("two_point:0.5,1.5,0.8", "exp:1");
        let bound = jensen_lower_bound(&e).unwrap();
        assert!((bound - (-0.3f64).exp()).abs() < 1e-15);
        let m = exact_m(&e, Method::ClosedForm);
        assert!((m - 14.0 / 15.0).abs() < 1e-12);
        assert!(m >= bound);
    }

    #[test]
    fn extinction_probability_doubling_law() {
        // PointMass(2) x Det(ln 2): pgf root of 2q^2 - 3q + 1 = 0 is 1/2
        let e = env("point:2", "det:0.6931471805599453");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let est = gw_extinction_prob(&e, 20_000, &mut rng).unwrap();
        assert!((est.probability - 0.5).abs() < 0.02, "q {}", est.probability);
        assert!(est.std_error > 0.0 && est.std_error < 0.02);
    }

    #[test]
    fn extinction_probability_subcritical_is_one() {
        let e = env("two_point:0.5,0.8,0.5", "exp:1");
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let est = gw_extinction_prob(&e, 10_000, &mut rng).unwrap();
        assert_eq!(est.probability, 1.0);
    }

    #[test]
    fn extinction_probability_long_horizon_limit() {
        // PointMass(2) x Det(50): q -> 1/λ = 1/2
        let e = env("point:2", "det:50");
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let est = gw_extinction_prob(&e, 10_000, &mut rng).unwrap();
        assert!((est.probability - 0.5).abs() < 0.02, "q {}", est.probability);
    }

    #[test]
    fn extinction_probability_rejects_small_samples() {
        let e = env("point:2", "det:1");
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert!(gw_extinction_prob(&e, 9_999, &mut rng).is_err());
    }

    #[test]
    fn report_fields_cohere() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = CriterionReport::evaluate(&env("two_point:0,2,0.5", "exp:1.5"), Method::Auto, &mut rng)
            .unwrap();
        assert!((r.m.value() - 1.8).abs() < 1e-12);
        assert_eq!(r.dispersion_verdict, DispersionVerdict::Survives);
        assert_eq!(r.global_verdict, GlobalVerdict::Dies);
        assert_eq!(r.a_critical, None); // E(Λ) = 1
        assert!((r.jensen_lower_bound - 1.0).abs() < 1e-15);

        let r = CriterionReport::evaluate(
            &env("two_point:0.5,1.5,0.8", "exp:1"),
            Method::Auto,
            &mut rng,
        )
        .unwrap();
        assert_eq!(r.dispersion_verdict, DispersionVerdict::Dies);
        assert!((r.a_critical.unwrap() - 5.0 / 6.0).abs() < 1e-12);

        // verdict coherence across a parameter grid
        for a in [0.6, 0.7, 0.83, 0.9, 1.5] {
            let r = CriterionReport::evaluate(
                &env("two_point:0.5,1.5,0.8", &format!("exp:{a}")),
                Method::Auto,
                &mut rng,
            )
            .unwrap();
            let expect = if r.m.value() > 1.0 {
                DispersionVerdict::Survives
            } else {
                DispersionVerdict::Dies
            };
            assert_eq!(r.dispersion_verdict, expect);
            assert_eq!(
                r.global_verdict,
                if r.mean_rate > 1.0 { GlobalVerdict::Survives } else { GlobalVerdict::Dies }
            );
        }
    }
}
