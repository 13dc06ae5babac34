//! Random-environment laws: the per-colony birth rate Λ, the collapse/switch
//! clock τ, and their joint structure.
//!
//! A law is immutable once constructed and all invariants (non-negative
//! rates, strictly positive clock times, probabilities summing to one,
//! canonical ordering) are enforced by the constructors and the text parser.
//! Sampling is inverse-transform throughout, so dependent couplings reduce to
//! feeding a shared (or reflected) uniform into both marginal quantile
//! functions. Every variant has a finite mean by construction.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::exp_variate;

/// Tolerance for "probabilities sum to 1" checks.
const PROB_SUM_TOL: f64 = 1e-12;

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidLaw(format!("{what} must lie in [0,1], got {p}")));
    }
    Ok(())
}

/// Clamp a quantile argument into [0, 1) so inverse transforms stay finite.
#[inline]
fn clamp_unit(u: f64) -> f64 {
    if u >= 1.0 {
        1.0 - f64::EPSILON
    } else if u < 0.0 {
        0.0
    } else {
        u
    }
}

/// Validate, sort and canonicalize a discrete atom list.
///
/// Atoms are sorted ascending by value, exact duplicates merged, and
/// zero-probability atoms dropped. `min_value` excludes the lower endpoint
/// when the support must be strictly positive.
fn canonicalize_atoms(
    mut atoms: Vec<(f64, f64)>,
    what: &str,
    strictly_positive: bool,
) -> Result<Vec<(f64, f64)>> {
    if atoms.is_empty() {
        return Err(Error::InvalidLaw(format!("{what}: empty atom list")));
    }
    let mut sum = 0.0;
    for &(v, p) in &atoms {
        if v.is_nan() || v.is_infinite() || (strictly_positive && v <= 0.0) || v < 0.0 {
            return Err(Error::InvalidLaw(format!("{what}: invalid atom value {v}")));
        }
        check_prob(p, &format!("{what} atom probability"))?;
        sum += p;
    }
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidLaw(format!(
            "{what}: probabilities sum to {sum}, expected 1 within {PROB_SUM_TOL:e}"
        )));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        if p == 0.0 {
            continue;
        }
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => merged.push((v, p)),
        }
    }
    if merged.is_empty() {
        return Err(Error::InvalidLaw(format!("{what}: all atoms have probability 0")));
    }
    Ok(merged)
}

fn quantile_atoms(atoms: &[(f64, f64)], u: f64) -> f64 {
    let u = clamp_unit(u);
    let mut cum = 0.0;
    for &(v, p) in atoms {
        cum += p;
        if u < cum {
            return v;
        }
    }
    atoms[atoms.len() - 1].0
}

// ---------------------------------------------------------------------------
// Birth-rate law μ
// ---------------------------------------------------------------------------

/// Distribution of the per-colony birth rate Λ.
#[derive(Debug, Clone, PartialEq)]
pub enum RateLaw {
    /// All mass at a single rate.
    PointMass { rate: f64 },
    /// Two rates; `p_low` is the probability of `low`. Canonical: `low <= high`.
    TwoPoint { low: f64, high: f64, p_low: f64 },
    /// Finite support, sorted ascending by rate.
    FiniteDiscrete { atoms: Vec<(f64, f64)> },
    /// Uniform on `[lo, hi]`.
    UniformInterval { lo: f64, hi: f64 },
}

impl RateLaw {
    pub fn point_mass(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidLaw(format!("point mass rate must be >= 0, got {rate}")));
        }
        Ok(Self::PointMass { rate })
    }

    /// Two-point law; swaps the pair (and `p -> 1-p`) when given out of order.
    pub fn two_point(rate_a: f64, rate_b: f64, p_a: f64) -> Result<Self> {
        for r in [rate_a, rate_b] {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidLaw(format!("two-point rate must be >= 0, got {r}")));
            }
        }
        check_prob(p_a, "two-point probability")?;
        let (low, high, p_low) =
            if rate_a <= rate_b { (rate_a, rate_b, p_a) } else { (rate_b, rate_a, 1.0 - p_a) };
        Ok(Self::TwoPoint { low, high, p_low })
    }

    pub fn finite_discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self::FiniteDiscrete { atoms: canonicalize_atoms(atoms, "rate law", false)? })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || hi < lo {
            return Err(Error::InvalidLaw(format!(
                "uniform interval needs 0 <= lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::UniformInterval { lo, hi })
    }

    /// Exact E(Λ).
    pub fn mean(&self) -> f64 {
        match self {
            Self::PointMass { rate } => *rate,
            Self::TwoPoint { low, high, p_low } => p_low * low + (1.0 - p_low) * high,
            Self::FiniteDiscrete { atoms } => atoms.iter().map(|(v, p)| v * p).sum(),
            Self::UniformInterval { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// Supremum of the support (zero-probability atoms excluded).
    pub fn support_max(&self) -> f64 {
        match self {
            Self::PointMass { rate } => *rate,
            Self::TwoPoint { low, high, p_low } => {
                if *p_low < 1.0 {
                    *high
                } else {
                    *low
                }
            }
            Self::FiniteDiscrete { atoms } => atoms[atoms.len() - 1].0,
            Self::UniformInterval { hi, .. } => *hi,
        }
    }

    /// True when the law is carried by finitely many atoms.
    pub fn is_discrete(&self) -> bool {
        !matches!(self, Self::UniformInterval { .. })
    }

    /// True when the law puts all mass on one point.
    pub fn is_degenerate(&self) -> bool {
        match self {
            Self::PointMass { .. } => true,
            Self::TwoPoint { low, high, p_low } => low == high || *p_low == 0.0 || *p_low == 1.0,
            Self::FiniteDiscrete { atoms } => atoms.len() == 1,
            Self::UniformInterval { lo, hi } => lo == hi,
        }
    }

    /// Atoms `(rate, probability)` for discrete variants, `None` otherwise.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Self::PointMass { rate } => Some(vec![(*rate, 1.0)]),
            Self::TwoPoint { low, high, p_low } => {
                Some(vec![(*low, *p_low), (*high, 1.0 - p_low)])
            }
            Self::FiniteDiscrete { atoms } => Some(atoms.clone()),
            Self::UniformInterval { .. } => None,
        }
    }

    /// Inverse transform at `u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = clamp_unit(u);
        match self {
            Self::PointMass { rate } => *rate,
            Self::TwoPoint { low, high, p_low } => {
                if u < *p_low {
                    *low
                } else {
                    *high
                }
            }
            Self::FiniteDiscrete { atoms } => quantile_atoms(atoms, u),
            Self::UniformInterval { lo, hi } => lo + u * (hi - lo),
        }
    }

    /// One draw. Degenerate point masses consume no randomness; every other
    /// variant consumes exactly one uniform (part of the determinism contract).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::PointMass { rate } => *rate,
            _ => self.quantile(rng.random::<f64>()),
        }
    }
}

impl fmt::Display for RateLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointMass { rate } => write!(f, "point:{rate}"),
            Self::TwoPoint { low, high, p_low } => write!(f, "two_point:{low},{high},{p_low}"),
            Self::FiniteDiscrete { atoms } => {
                write!(f, "discrete:")?;
                for (i, (v, p)) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}:{p}")?;
                }
                Ok(())
            }
            Self::UniformInterval { lo, hi } => write!(f, "uniform:{lo},{hi}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Collapse-clock law ν
// ---------------------------------------------------------------------------

/// Distribution of the collapse/switch clock τ. Always strictly positive
/// with a finite mean.
#[derive(Debug, Clone, PartialEq)]
pub enum ClockLaw {
    /// Exponential with the given rate (mean `1/rate`).
    Exponential { rate: f64 },
    /// All mass at a single time.
    Deterministic { time: f64 },
    /// Finite support of positive times, sorted ascending.
    FiniteDiscrete { atoms: Vec<(f64, f64)> },
}

impl ClockLaw {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::InvalidLaw(format!("exponential clock rate must be > 0, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn deterministic(time: f64) -> Result<Self> {
        if !time.is_finite() || time <= 0.0 {
            return Err(Error::InvalidLaw(format!("deterministic clock must be > 0, got {time}")));
        }
        Ok(Self::Deterministic { time })
    }

    pub fn finite_discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self::FiniteDiscrete { atoms: canonicalize_atoms(atoms, "clock law", true)? })
    }

    /// Exact E(τ); finite for every variant.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Deterministic { time } => *time,
            Self::FiniteDiscrete { atoms } => atoms.iter().map(|(v, p)| v * p).sum(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, Self::Exponential { .. })
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            Self::Deterministic { .. } => true,
            Self::FiniteDiscrete { atoms } => atoms.len() == 1,
            Self::Exponential { .. } => false,
        }
    }

    /// Atoms `(time, probability)` for discrete variants, `None` otherwise.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Self::Deterministic { time } => Some(vec![(*time, 1.0)]),
            Self::FiniteDiscrete { atoms } => Some(atoms.clone()),
            Self::Exponential { .. } => None,
        }
    }

    /// Inverse transform at `u`, kept strictly positive.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = clamp_unit(u);
        match self {
            Self::Exponential { rate } => {
                let t = -(-u).ln_1p() / rate;
                t.max(f64::MIN_POSITIVE)
            }
            Self::Deterministic { time } => *time,
            Self::FiniteDiscrete { atoms } => quantile_atoms(atoms, u),
        }
    }

    /// One draw; deterministic clocks consume no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Deterministic { time } => *time,
            Self::Exponential { rate } => exp_variate(*rate, rng).max(f64::MIN_POSITIVE),
            Self::FiniteDiscrete { .. } => self.quantile(rng.random::<f64>()),
        }
    }
}

impl fmt::Display for ClockLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "exp:{rate}"),
            Self::Deterministic { time } => write!(f, "det:{time}"),
            Self::FiniteDiscrete { atoms } => {
                write!(f, "discrete:")?;
                for (i, (v, p)) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}:{p}")?;
                }
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Joint law
// ---------------------------------------------------------------------------

/// Dependence structure of the pair (Λ, τ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Fresh independent draws for each coordinate.
    Independent,
    /// Both coordinates from one shared uniform (maximal positive dependence).
    Comonotone,
    /// Clock driven by the reflected uniform (maximal negative dependence).
    Antimonotone,
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Independent => "independent",
            Self::Comonotone => "comonotone",
            Self::Antimonotone => "antimonotone",
        };
        f.write_str(s)
    }
}

impl FromStr for Coupling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Self::Independent),
            "comonotone" => Ok(Self::Comonotone),
            "antimonotone" => Ok(Self::Antimonotone),
            other => Err(Error::Parse(format!(
                "unknown coupling '{other}' (expected independent, comonotone or antimonotone)"
            ))),
        }
    }
}

/// The joint law of one environment draw (Λ, τ).
///
/// Dependent couplings are only permitted when both marginals are discrete
/// or both are continuous, so that the inverse-transform coupling is exact
/// and the marginals remain statistically testable.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentLaw {
    rate_law: RateLaw,
    clock_law: ClockLaw,
    coupling: Coupling,
}

impl EnvironmentLaw {
    pub fn new(rate_law: RateLaw, clock_law: ClockLaw, coupling: Coupling) -> Result<Self> {
        if coupling != Coupling::Independent
            && rate_law.is_discrete() != clock_law.is_discrete()
        {
            return Err(Error::InvalidLaw(format!(
                "{coupling} coupling needs both marginals discrete or both continuous \
                 (got rate '{rate_law}' and clock '{clock_law}')"
            )));
        }
        Ok(Self { rate_law, clock_law, coupling })
    }

    pub fn independent(rate_law: RateLaw, clock_law: ClockLaw) -> Result<Self> {
        Self::new(rate_law, clock_law, Coupling::Independent)
    }

    pub fn rate_law(&self) -> &RateLaw {
        &self.rate_law
    }

    pub fn clock_law(&self) -> &ClockLaw {
        &self.clock_law
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// E(Λ).
    pub fn mean_rate(&self) -> f64 {
        self.rate_law.mean()
    }

    /// E(τ).
    pub fn mean_clock(&self) -> f64 {
        self.clock_law.mean()
    }

    /// One draw of the environment pair (λ, t).
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.coupling {
            Coupling::Independent => (self.rate_law.sample(rng), self.clock_law.sample(rng)),
            Coupling::Comonotone => {
                let u = rng.random::<f64>();
                (self.rate_law.quantile(u), self.clock_law.quantile(u))
            }
            Coupling::Antimonotone => {
                let u = rng.random::<f64>();
                (self.rate_law.quantile(u), self.clock_law.quantile(1.0 - u))
            }
        }
    }
}

impl fmt::Display for EnvironmentLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {} ({})", self.rate_law, self.clock_law, self.coupling)
    }
}

// ---------------------------------------------------------------------------
// Text forms
// ---------------------------------------------------------------------------

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: '{s}' is not a number")))
}

fn parse_atom_list(body: &str, what: &str) -> Result<Vec<(f64, f64)>> {
    let mut atoms = Vec::new();
    for pair in body.split(',') {
        let (v, p) = pair.split_once(':').ok_or_else(|| {
            Error::Parse(format!("{what}: expected value:prob pairs, got '{pair}'"))
        })?;
        atoms.push((parse_f64(v, what)?, parse_f64(p, what)?));
    }
    Ok(atoms)
}

impl FromStr for RateLaw {
    type Err = Error;

    /// Parses `point:R`, `two_point:L1,L2,P`, `discrete:L1:P1,...`, `uniform:LO,HI`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("rate law '{s}': expected kind:params")))?;
        match kind {
            "point" => Self::point_mass(parse_f64(body, "point rate")?),
            "two_point" => {
                let parts: Vec<&str> = body.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!(
                        "two_point law needs lambda1,lambda2,p — got '{body}'"
                    )));
                }
                Self::two_point(
                    parse_f64(parts[0], "two_point lambda1")?,
                    parse_f64(parts[1], "two_point lambda2")?,
                    parse_f64(parts[2], "two_point p")?,
                )
            }
            "discrete" => Self::finite_discrete(parse_atom_list(body, "discrete rate law")?),
            "uniform" => {
                let (lo, hi) = body.split_once(',').ok_or_else(|| {
                    Error::Parse(format!("uniform law needs lo,hi — got '{body}'"))
                })?;
                Self::uniform(parse_f64(lo, "uniform lo")?, parse_f64(hi, "uniform hi")?)
            }
            other => Err(Error::Parse(format!(
                "unknown rate law kind '{other}' (expected point, two_point, discrete or uniform)"
            ))),
        }
    }
}

impl FromStr for ClockLaw {
    type Err = Error;

    /// Parses `exp:A`, `det:T`, `discrete:T1:Q1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("clock law '{s}': expected kind:params")))?;
        match kind {
            "exp" => Self::exponential(parse_f64(body, "exponential clock rate")?),
            "det" => Self::deterministic(parse_f64(body, "deterministic clock time")?),
            "discrete" => Self::finite_discrete(parse_atom_list(body, "discrete clock law")?),
            other => Err(Error::Parse(format!(
                "unknown clock law kind '{other}' (expected exp, det or discrete)"
            ))),
        }
    }
}
