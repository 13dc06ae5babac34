//! Command-line surface, configuration parsing, and output serialization.
//!
//! Six subcommands: `criterion` (analytic verdicts), `simulate` (one trial),
//! `survival` (Monte Carlo estimate), `sweep` (parameter grid), `compare`
//! (all three models on the same laws) and `trajectory` (one event-driven
//! sample path). CSV is the primary format; JSON mirrors the same field
//! names. All floats serialize at full round-trip precision, `+inf` as the
//! literal `inf`, and every emitted file is re-parseable by the readers in
//! this module.
//!
//! Seeds default to the fixed constant [`DEFAULT_SEED`] so identical
//! invocations produce byte-identical artifacts; pass `--seed random` to opt
//! into entropy. Exit status is 0 exactly when the computation completed —
//! survival verdicts never affect it.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, CommandFactory, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::birth_death::TrajectoryEvent;
use crate::criteria::{
    classify_global, criterion_m, CriterionReport, DispersionVerdict, GlobalVerdict, MValue,
    Method, DEFAULT_MC_SAMPLES,
};
use crate::env::{Coupling, EnvironmentLaw};
use crate::error::{Error, Result};
use crate::montecarlo::{
    estimate_survival, sweep, Prediction, SurvivalEstimate, SweepParam, SweepRow, SweepSpec,
};
use crate::process::{
    run_trajectory, DispersionConfig, FixedConfig, GlobalConfig, Model, TrialConfig,
    TrialOutcome, Verdict, DEFAULT_FIXED_HORIZON, DEFAULT_MAX_STEPS, DEFAULT_POPULATION_CAP,
};
use crate::rng::mix_seed;

/// Master seed used when `--seed` is omitted.
pub const DEFAULT_SEED: u64 = 42;
/// Trials used when `--trials` is omitted.
pub const DEFAULT_TRIALS: u64 = 10_000;

// ---------------------------------------------------------------------------
// Argument declarations
// ---------------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "disperse",
    version,
    about = "Birth-death chains in random environments: survival criteria and Monte Carlo simulation",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct EnvFlags {
    /// Birth-rate law: point:R | two_point:L1,L2,P | discrete:L1:P1,... | uniform:LO,HI
    #[arg(long)]
    mu: Option<String>,
    /// Collapse-clock law: exp:A | det:T | discrete:T1:Q1,...
    #[arg(long)]
    nu: Option<String>,
    /// Dependence of the (rate, clock) pair
    #[arg(long, default_value = "independent", value_parser = ["independent", "comonotone", "antimonotone"])]
    coupling: String,
}

#[derive(Args, Debug)]
struct ModelFlag {
    /// Process to run: dispersion | global | fixed
    #[arg(long)]
    model: String,
}

#[derive(Args, Debug)]
struct RateFlag {
    /// Fixed-model birth rate (defaults to the mean of --mu)
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args, Debug)]
struct TrialsFlag {
    /// Number of independent trials
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
}

#[derive(Args, Debug)]
struct CapFlags {
    /// Generation/epoch cap per trial
    #[arg(long = "max-gen", default_value_t = DEFAULT_MAX_STEPS)]
    max_gen: u32,
    /// Population cap; reaching it counts as survival
    #[arg(long = "pop-cap", default_value_t = DEFAULT_POPULATION_CAP)]
    pop_cap: u64,
    /// Time horizon for the fixed model and for trajectories
    #[arg(long, default_value_t = DEFAULT_FIXED_HORIZON)]
    horizon: f64,
}

#[derive(Args, Debug)]
struct SeedFlag {
    /// Master seed: a 64-bit integer, or 'random' for one drawn from entropy
    #[arg(long, default_value = "42")]
    seed: String,
}

#[derive(Args, Debug)]
struct OutputFlags {
    /// Output format
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Output path, '-' for standard output
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate the analytic survival criteria for one environment law
    Criterion {
        #[command(flatten)]
        env: EnvFlags,
        /// Evaluation method for m
        #[arg(long, default_value = "auto", value_parser = ["auto", "closed-form", "quadrature", "monte-carlo"])]
        method: String,
        /// Joint draws used by the monte-carlo method
        #[arg(long = "mc-samples", default_value_t = DEFAULT_MC_SAMPLES)]
        mc_samples: usize,
        #[command(flatten)]
        seed: SeedFlag,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Run a single trial and print its outcome
    Simulate {
        #[command(flatten)]
        model: ModelFlag,
        #[command(flatten)]
        env: EnvFlags,
        #[command(flatten)]
        rate: RateFlag,
        #[command(flatten)]
        caps: CapFlags,
        #[command(flatten)]
        seed: SeedFlag,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Estimate survival probability over many independent trials
    Survival {
        #[command(flatten)]
        model: ModelFlag,
        #[command(flatten)]
        env: EnvFlags,
        #[command(flatten)]
        rate: RateFlag,
        #[command(flatten)]
        trials: TrialsFlag,
        #[command(flatten)]
        caps: CapFlags,
        #[command(flatten)]
        seed: SeedFlag,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Sweep one law parameter across a grid, estimating survival per point
    Sweep {
        #[command(flatten)]
        model: ModelFlag,
        #[command(flatten)]
        env: EnvFlags,
        /// Grid: PARAM=START:STOP:STEP or PARAM=V1,V2,... (PARAM: a, p, lambda1, lambda2, t0)
        #[arg(long)]
        sweep: String,
        #[command(flatten)]
        trials: TrialsFlag,
        #[command(flatten)]
        caps: CapFlags,
        #[command(flatten)]
        seed: SeedFlag,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Run the dispersion, global and fixed models on the same laws
    Compare {
        #[command(flatten)]
        env: EnvFlags,
        #[command(flatten)]
        rate: RateFlag,
        #[command(flatten)]
        trials: TrialsFlag,
        #[command(flatten)]
        caps: CapFlags,
        #[command(flatten)]
        seed: SeedFlag,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Emit one full event-driven sample path as time,delta,population rows
    Trajectory {
        #[command(flatten)]
        model: ModelFlag,
        #[command(flatten)]
        env: EnvFlags,
        #[command(flatten)]
        rate: RateFlag,
        #[command(flatten)]
        caps: CapFlags,
        #[command(flatten)]
        seed: SeedFlag,
        #[command(flatten)]
        output: OutputFlags,
    },
}

// ---------------------------------------------------------------------------
// Resolved run specification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Criterion,
    Simulate,
    Survival,
    Sweep,
    Compare,
    Trajectory,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Criterion => "criterion",
            Self::Simulate => "simulate",
            Self::Survival => "survival",
            Self::Sweep => "sweep",
            Self::Compare => "compare",
            Self::Trajectory => "trajectory",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Parse(format!("unknown format '{other}'"))),
        }
    }
}

/// A fully resolved invocation: every field carries its documented default
/// when the flag was omitted, and `--seed random` has been replaced by the
/// drawn value, so a spec round-trips exactly through its own textual form.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: CommandKind,
    pub model: Option<Model>,
    pub env: Option<EnvironmentLaw>,
    pub rate: Option<f64>,
    pub method: Method,
    pub sweep: Option<(SweepParam, Vec<f64>)>,
    pub trials: u64,
    pub master_seed: u64,
    pub max_steps: u32,
    pub population_cap: u64,
    pub horizon: f64,
    pub format: OutputFormat,
    /// `None` means standard output.
    pub out: Option<PathBuf>,
}

impl RunSpec {
    /// Render the spec back to a canonical argument list; parsing it yields
    /// an equal spec.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec!["disperse".to_string(), self.command.to_string()];
        if let Some(model) = self.model {
            args.push("--model".into());
            args.push(model.to_string());
        }
        if let Some(env) = &self.env {
            args.push("--mu".into());
            args.push(env.rate_law().to_string());
            args.push("--nu".into());
            args.push(env.clock_law().to_string());
            args.push("--coupling".into());
            args.push(env.coupling().to_string());
        }
        if let Some(rate) = self.rate {
            args.push("--rate".into());
            args.push(fmt_float(rate));
        }
        if self.command == CommandKind::Criterion {
            let (name, samples) = match self.method {
                Method::Auto => ("auto", None),
                Method::ClosedForm => ("closed-form", None),
                Method::Quadrature => ("quadrature", None),
                Method::MonteCarlo { samples } => ("monte-carlo", Some(samples)),
            };
            args.push("--method".into());
            args.push(name.into());
            args.push("--mc-samples".into());
            args.push(samples.unwrap_or(DEFAULT_MC_SAMPLES).to_string());
        }
        if let Some((param, values)) = &self.sweep {
            let list: Vec<String> = values.iter().map(|v| fmt_float(*v)).collect();
            args.push("--sweep".into());
            args.push(format!("{param}={}", list.join(",")));
        }
        if matches!(
            self.command,
            CommandKind::Survival | CommandKind::Sweep | CommandKind::Compare
        ) {
            args.push("--trials".into());
            args.push(self.trials.to_string());
        }
        if self.command != CommandKind::Criterion {
            args.push("--max-gen".into());
            args.push(self.max_steps.to_string());
            args.push("--pop-cap".into());
            args.push(self.population_cap.to_string());
            args.push("--horizon".into());
            args.push(fmt_float(self.horizon));
        }
        args.push("--seed".into());
        args.push(self.master_seed.to_string());
        args.push("--format".into());
        args.push(self.format.to_string());
        args.push("--out".into());
        args.push(self.out.as_ref().map_or_else(|| "-".into(), |p| p.display().to_string()));
        args
    }
}

fn resolve_env(flags: &EnvFlags, required: bool) -> Result<Option<EnvironmentLaw>> {
    match (&flags.mu, &flags.nu) {
        (Some(mu), Some(nu)) => Ok(Some(EnvironmentLaw::new(
            mu.parse()?,
            nu.parse()?,
            flags.coupling.parse()?,
        )?)),
        (None, None) if !required => Ok(None),
        _ => Err(Error::Parse(
            "this invocation needs both --mu and --nu (only the fixed model may omit them, \
             given --rate)"
                .into(),
        )),
    }
}

fn resolve_seed(flag: &SeedFlag) -> Result<u64> {
    if flag.seed == "random" {
        Ok(rand::random::<u64>())
    } else {
        flag.seed
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("--seed expects a 64-bit integer or 'random', got '{}'", flag.seed)))
    }
}

fn resolve_method(method: &str, mc_samples: usize) -> Result<Method> {
    Ok(match method {
        "auto" => Method::Auto,
        "closed-form" => Method::ClosedForm,
        "quadrature" => Method::Quadrature,
        "monte-carlo" => {
            if mc_samples == 0 {
                return Err(Error::Parse("--mc-samples must be >= 1".into()));
            }
            Method::MonteCarlo { samples: mc_samples }
        }
        other => return Err(Error::Parse(format!("unknown method '{other}'"))),
    })
}

fn resolve_output(flags: &OutputFlags) -> Result<(OutputFormat, Option<PathBuf>)> {
    let format = flags.format.parse()?;
    let out = if flags.out == "-" { None } else { Some(PathBuf::from(&flags.out)) };
    Ok((format, out))
}

/// Parse `PARAM=START:STOP:STEP` or `PARAM=V1,V2,...` into a grid.
fn parse_sweep_grid(s: &str) -> Result<(SweepParam, Vec<f64>)> {
    let (name, body) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("--sweep expects PARAM=..., got '{s}'")))?;
    let param: SweepParam = name.parse()?;
    let values = if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "sweep range must be START:STOP:STEP, got '{body}'"
            )));
        }
        let start = parse_float_str(parts[0], "sweep start")?;
        let stop = parse_float_str(parts[1], "sweep stop")?;
        let step = parse_float_str(parts[2], "sweep step")?;
        if step <= 0.0 {
            return Err(Error::Parse(format!("sweep step must be > 0, got {step}")));
        }
        if stop < start {
            return Err(Error::Parse(format!(
                "empty sweep range: stop {stop} below start {start}"
            )));
        }
        let mut values = Vec::new();
        let mut k = 0u32;
        loop {
            let v = start + f64::from(k) * step;
            if v > stop + step * 1e-9 {
                break;
            }
            values.push(v);
            k += 1;
        }
        values
    } else {
        body.split(',')
            .map(|v| parse_float_str(v, "sweep value"))
            .collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(Error::Parse("empty sweep grid".into()));
    }
    Ok((param, values))
}

fn resolve(cli: Cli) -> Result<RunSpec> {
    let mut spec = RunSpec {
        command: CommandKind::Criterion,
        model: None,
        env: None,
        rate: None,
        method: Method::Auto,
        sweep: None,
        trials: DEFAULT_TRIALS,
        master_seed: DEFAULT_SEED,
        max_steps: DEFAULT_MAX_STEPS,
        population_cap: DEFAULT_POPULATION_CAP,
        horizon: DEFAULT_FIXED_HORIZON,
        format: OutputFormat::Csv,
        out: None,
    };
    match cli.command {
        Cmd::Criterion { env, method, mc_samples, seed, output } => {
            spec.command = CommandKind::Criterion;
            spec.env = resolve_env(&env, true)?;
            spec.method = resolve_method(&method, mc_samples)?;
            spec.master_seed = resolve_seed(&seed)?;
            (spec.format, spec.out) = resolve_output(&output)?;
        }
        Cmd::Simulate { model, env, rate, caps, seed, output } => {
            spec.command = CommandKind::Simulate;
            resolve_model_env(&mut spec, &model, &env, &rate)?;
            resolve_caps(&mut spec, &caps);
            spec.master_seed = resolve_seed(&seed)?;
            (spec.format, spec.out) = resolve_output(&output)?;
        }
        Cmd::Survival { model, env, rate, trials, caps, seed, output } => {
            spec.command = CommandKind::Survival;
            resolve_model_env(&mut spec, &model, &env, &rate)?;
            spec.trials = check_trials(trials.trials)?;
            resolve_caps(&mut spec, &caps);
            spec.master_seed = resolve_seed(&seed)?;
            (spec.format, spec.out) = resolve_output(&output)?;
        }
        Cmd::Sweep { model, env, sweep, trials, caps, seed, output } => {
            spec.command = CommandKind::Sweep;
            spec.model = Some(model.model.parse()?);
            spec.env = resolve_env(&env, true)?;
            spec.sweep = Some(parse_sweep_grid(&sweep)?);
            spec.trials = check_trials(trials.trials)?;
            resolve_caps(&mut spec, &caps);
            spec.master_seed = resolve_seed(&seed)?;
            (spec.format, spec.out) = resolve_output(&output)?;
        }
        Cmd::Compare { env, rate, trials, caps, seed, output } => {
            spec.command = CommandKind::Compare;
            spec.env = resolve_env(&env, true)?;
            spec.rate = rate.rate;
            spec.trials = check_trials(trials.trials)?;
            resolve_caps(&mut spec, &caps);
            spec.master_seed = resolve_seed(&seed)?;
            (spec.format, spec.out) = resolve_output(&output)?;
        }
        Cmd::Trajectory { model, env, rate, caps, seed, output } => {
            spec.command = CommandKind::Trajectory;
            resolve_model_env(&mut spec, &model, &env, &rate)?;
            resolve_caps(&mut spec, &caps);
            spec.master_seed = resolve_seed(&seed)?;
            (spec.format, spec.out) = resolve_output(&output)?;
        }
    }
    Ok(spec)
}

fn check_trials(trials: u64) -> Result<u64> {
    if trials == 0 {
        return Err(Error::Parse("--trials must be >= 1".into()));
    }
    Ok(trials)
}

fn resolve_model_env(
    spec: &mut RunSpec,
    model: &ModelFlag,
    env: &EnvFlags,
    rate: &RateFlag,
) -> Result<()> {
    let model: Model = model.model.parse()?;
    spec.model = Some(model);
    spec.rate = rate.rate;
    let env_required = model != Model::Fixed;
    spec.env = resolve_env(env, env_required)?;
    if model == Model::Fixed && spec.rate.is_none() && spec.env.is_none() {
        return Err(Error::Parse("the fixed model needs --rate or --mu".into()));
    }
    Ok(())
}

fn resolve_caps(spec: &mut RunSpec, caps: &CapFlags) {
    spec.max_steps = caps.max_gen;
    spec.population_cap = caps.pop_cap;
    spec.horizon = caps.horizon;
}

/// Parse a full argument vector (including the program name) into a spec.
pub fn parse_args<I, S>(argv: I) -> Result<RunSpec>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Parse(e.to_string()))?;
    resolve(cli)
}

/// The clap command tree (used by the help/flag parity test).
pub fn command() -> clap::Command {
    Cli::command()
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// A rendered artifact plus any per-row diagnostics for standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub body: String,
    pub warnings: Vec<String>,
}

impl Rendered {
    fn clean(body: String) -> Self {
        Self { body, warnings: Vec::new() }
    }
}

fn require_env(spec: &RunSpec) -> Result<&EnvironmentLaw> {
    spec.env.as_ref().ok_or_else(|| Error::InvalidParameter("missing environment law".into()))
}

fn build_trial_config(spec: &RunSpec) -> Result<TrialConfig> {
    let model = spec
        .model
        .ok_or_else(|| Error::InvalidParameter("missing --model".into()))?;
    Ok(match model {
        Model::Dispersion => TrialConfig::Dispersion(DispersionConfig::new(
            require_env(spec)?.clone(),
            spec.max_steps,
            spec.population_cap,
        )?),
        Model::Global => TrialConfig::Global(GlobalConfig::new(
            require_env(spec)?.clone(),
            spec.max_steps,
            spec.population_cap,
        )?),
        Model::Fixed => {
            let rate = match spec.rate {
                Some(r) => r,
                None => require_env(spec)?.mean_rate(),
            };
            TrialConfig::Fixed(FixedConfig::new(rate, spec.horizon, spec.population_cap)?)
        }
    })
}

/// Run the spec and render its artifact. Pure given the spec: no I/O here.
pub fn execute(spec: &RunSpec) -> Result<Rendered> {
    match spec.command {
        CommandKind::Criterion => {
            let env = require_env(spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
            let report = CriterionReport::evaluate(env, spec.method, &mut rng)?;
            Ok(Rendered::clean(match spec.format {
                OutputFormat::Csv => criterion_to_csv(&report),
                OutputFormat::Json => to_pretty(&criterion_to_json(&report)),
            }))
        }
        CommandKind::Simulate => {
            let cfg = build_trial_config(spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.master_seed, 0));
            let outcome = cfg.run(&mut rng);
            Ok(Rendered::clean(match spec.format {
                OutputFormat::Csv => outcome_to_csv(&outcome),
                OutputFormat::Json => to_pretty(&outcome_to_json(&outcome)),
            }))
        }
        CommandKind::Survival => {
            let cfg = build_trial_config(spec)?;
            let estimate = estimate_survival(&cfg, spec.trials, spec.master_seed);
            Ok(Rendered::clean(match spec.format {
                OutputFormat::Csv => survival_to_csv(&estimate),
                OutputFormat::Json => to_pretty(&survival_to_json(&estimate)),
            }))
        }
        CommandKind::Sweep => execute_sweep(spec),
        CommandKind::Compare => execute_compare(spec),
        CommandKind::Trajectory => {
            let cfg = build_trial_config(spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.master_seed, 0));
            let events = run_trajectory(&cfg, spec.horizon, &mut rng);
            let termination = trajectory_termination(&events, cfg.population_cap());
            Ok(Rendered::clean(match spec.format {
                OutputFormat::Csv => trajectory_to_csv(&events, termination),
                OutputFormat::Json => to_pretty(&trajectory_to_json(&events, termination)),
            }))
        }
    }
}

fn execute_sweep(spec: &RunSpec) -> Result<Rendered> {
    let env = require_env(spec)?;
    let model = spec.model.ok_or_else(|| Error::InvalidParameter("missing --model".into()))?;
    let (param, values) = spec
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("missing --sweep".into()))?;
    let sweep_spec = SweepSpec {
        model,
        env: env.clone(),
        max_steps: spec.max_steps,
        population_cap: spec.population_cap,
        fixed_horizon: spec.horizon,
        trials: spec.trials,
        master_seed: spec.master_seed,
    };
    let points = sweep(&sweep_spec, *param, values)?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for point in points {
        match point.outcome {
            Ok(row) => rows.push(row),
            Err(diag) => warnings.push(format!(
                "sweep point {param}={} rejected: {diag}",
                fmt_float(point.value)
            )),
        }
    }
    let body = match spec.format {
        OutputFormat::Csv => sweep_to_csv(&rows),
        OutputFormat::Json => to_pretty(&Value::Array(rows.iter().map(sweep_row_to_json).collect())),
    };
    Ok(Rendered { body, warnings })
}

/// One line of the three-model comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub model: Model,
    /// The model's own criterion value: m, E(Λ), or the fixed rate.
    pub criterion: f64,
    pub predicted: Prediction,
    pub estimate: SurvivalEstimate,
}

fn execute_compare(spec: &RunSpec) -> Result<Rendered> {
    let env = require_env(spec)?;
    if env.coupling() != Coupling::Independent {
        return Err(Error::InvalidParameter(
            "compare requires independent coupling (the global model is undefined otherwise)"
                .into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.master_seed, CRITERION_STREAM));
    let m = criterion_m(env, Method::Auto, &mut rng)?;
    let fixed_rate = spec.rate.unwrap_or_else(|| env.mean_rate());

    let configs = [
        TrialConfig::Dispersion(DispersionConfig::new(
            env.clone(),
            spec.max_steps,
            spec.population_cap,
        )?),
        TrialConfig::Global(GlobalConfig::new(
            env.clone(),
            spec.max_steps,
            spec.population_cap,
        )?),
        TrialConfig::Fixed(FixedConfig::new(fixed_rate, spec.horizon, spec.population_cap)?),
    ];
    let rows: Vec<CompareRow> = configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            let (criterion, survives) = match cfg.model() {
                Model::Dispersion => {
                    (m.value(), m.dispersion_verdict() == DispersionVerdict::Survives)
                }
                Model::Global => {
                    (env.mean_rate(), classify_global(env) == GlobalVerdict::Survives)
                }
                Model::Fixed => (fixed_rate, fixed_rate > 1.0),
            };
            CompareRow {
                model: cfg.model(),
                criterion,
                predicted: if survives { Prediction::Survives } else { Prediction::Dies },
                estimate: estimate_survival(cfg, spec.trials, mix_seed(spec.master_seed, i as u64)),
            }
        })
        .collect();
    let body = match spec.format {
        OutputFormat::Csv => compare_to_csv(&rows),
        OutputFormat::Json => {
            to_pretty(&Value::Array(rows.iter().map(compare_row_to_json).collect()))
        }
    };
    Ok(Rendered::clean(body))
}

/// Sub-stream index reserved for criterion evaluation (mirrors the sweep's
/// convention; trial indices occupy 0..trials).
const CRITERION_STREAM: u64 = u64::MAX;

fn trajectory_termination(events: &[TrajectoryEvent], cap: u64) -> &'static str {
    match events.last() {
        Some(e) if e.population_after == 0 => "extinct",
        Some(e) if e.population_after >= cap => "cap-reached",
        _ => "horizon",
    }
}

/// Entry point used by the binary. Parses, executes, writes, and maps
/// failures to a nonzero exit status with a one-line diagnostic.
pub fn main_entry() -> std::process::ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let is_error = e.use_stderr();
            let _ = e.print();
            return if is_error {
                std::process::ExitCode::from(2)
            } else {
                std::process::ExitCode::SUCCESS
            };
        }
    };
    let result = resolve(cli).and_then(|spec| {
        let rendered = execute(&spec)?;
        for warning in &rendered.warnings {
            eprintln!("warning: {warning}");
        }
        write_output(&spec, &rendered.body)
    });
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn write_output(spec: &RunSpec, body: &str) -> Result<()> {
    match &spec.out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => std::fs::write(path, body).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
    }
}

// ---------------------------------------------------------------------------
// Serialization: shared primitives
// ---------------------------------------------------------------------------

/// Full-precision float rendering; `+inf` becomes the literal `inf`.
pub fn fmt_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn parse_float_str(s: &str, what: &str) -> Result<f64> {
    let t = s.trim();
    let v = match t {
        "inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("{what}: '{s}' is not a number")))?,
    };
    if v.is_nan() {
        return Err(Error::Parse(format!("{what}: NaN is not a valid value")));
    }
    Ok(v)
}

fn float_json(x: f64) -> Value {
    if x.is_infinite() {
        Value::String("inf".into())
    } else {
        json!(x)
    }
}

fn float_from_json(v: &Value, what: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("{what}: bad number"))),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        other => Err(Error::Parse(format!("{what}: unexpected {other}"))),
    }
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json rendering cannot fail");
    s.push('\n');
    s
}

fn split_csv(content: &str, expected_header: &str, what: &str) -> Result<Vec<Vec<String>>> {
    let mut lines = content
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{what}: empty file")))?;
    if header != expected_header {
        return Err(Error::Parse(format!(
            "{what}: unexpected header '{header}' (expected '{expected_header}')"
        )));
    }
    Ok(lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn field<'a>(row: &'a [String], idx: usize, what: &str) -> Result<&'a str> {
    row.get(idx)
        .map(String::as_str)
        .ok_or_else(|| Error::Parse(format!("{what}: missing column {idx}")))
}

// ---------------------------------------------------------------------------
// CriterionReport
// ---------------------------------------------------------------------------

const CRITERION_HEADER: &str =
    "m,m_std_error,mean_rate,mean_clock,jensen_lower_bound,a_critical,dispersion_verdict,global_verdict";

pub fn criterion_to_csv(report: &CriterionReport) -> String {
    let se = report.m.std_error().map(fmt_float).unwrap_or_default();
    let a_c = report.a_critical.map(fmt_float).unwrap_or_default();
    format!(
        "{CRITERION_HEADER}\n{},{},{},{},{},{},{},{}\n",
        fmt_float(report.m.value()),
        se,
        fmt_float(report.mean_rate),
        fmt_float(report.mean_clock),
        fmt_float(report.jensen_lower_bound),
        a_c,
        report.dispersion_verdict,
        report.global_verdict,
    )
}

fn parse_dispersion_verdict(s: &str) -> Result<DispersionVerdict> {
    match s {
        "Survives" => Ok(DispersionVerdict::Survives),
        "Dies" => Ok(DispersionVerdict::Dies),
        "Inconclusive" => Ok(DispersionVerdict::Inconclusive),
        other => Err(Error::Parse(format!("unknown dispersion verdict '{other}'"))),
    }
}

fn parse_global_verdict(s: &str) -> Result<GlobalVerdict> {
    match s {
        "Survives" => Ok(GlobalVerdict::Survives),
        "Dies" => Ok(GlobalVerdict::Dies),
        other => match other.strip_prefix("NotApplicable(").and_then(|r| r.strip_suffix(')')) {
            Some(reason) => Ok(GlobalVerdict::NotApplicable(reason.to_string())),
            None => Err(Error::Parse(format!("unknown global verdict '{other}'"))),
        },
    }
}

fn m_from_parts(value: f64, se: Option<f64>) -> MValue {
    match se {
        // sample count is not serialized; parsed estimates carry 0
        Some(std_error) => MValue::Estimated { mean: value, std_error, samples: 0 },
        None if value.is_infinite() => MValue::Infinite,
        None => MValue::Exact(value),
    }
}

pub fn criterion_from_csv(content: &str) -> Result<CriterionReport> {
    let rows = split_csv(content, CRITERION_HEADER, "criterion report")?;
    let row = rows
        .first()
        .ok_or_else(|| Error::Parse("criterion report: no data row".into()))?;
    let what = "criterion report";
    let m_value = parse_float_str(field(row, 0, what)?, "m")?;
    let se_field = field(row, 1, what)?;
    let se = if se_field.is_empty() { None } else { Some(parse_float_str(se_field, "m_std_error")?) };
    let a_c_field = field(row, 5, what)?;
    Ok(CriterionReport {
        m: m_from_parts(m_value, se),
        mean_rate: parse_float_str(field(row, 2, what)?, "mean_rate")?,
        mean_clock: parse_float_str(field(row, 3, what)?, "mean_clock")?,
        jensen_lower_bound: parse_float_str(field(row, 4, what)?, "jensen_lower_bound")?,
        a_critical: if a_c_field.is_empty() {
            None
        } else {
            Some(parse_float_str(a_c_field, "a_critical")?)
        },
        dispersion_verdict: parse_dispersion_verdict(field(row, 6, what)?)?,
        global_verdict: parse_global_verdict(field(row, 7, what)?)?,
    })
}

pub fn criterion_to_json(report: &CriterionReport) -> Value {
    json!({
        "m": float_json(report.m.value()),
        "m_std_error": report.m.std_error().map(float_json).unwrap_or(Value::Null),
        "mean_rate": report.mean_rate,
        "mean_clock": report.mean_clock,
        "jensen_lower_bound": report.jensen_lower_bound,
        "a_critical": report.a_critical.map(|a| json!(a)).unwrap_or(Value::Null),
        "dispersion_verdict": report.dispersion_verdict.to_string(),
        "global_verdict": report.global_verdict.to_string(),
    })
}

pub fn criterion_from_json(content: &str) -> Result<CriterionReport> {
    let v: Value = serde_json::from_str(content)
        .map_err(|e| Error::Parse(format!("criterion report json: {e}")))?;
    let m_value = float_from_json(&v["m"], "m")?;
    let se = match &v["m_std_error"] {
        Value::Null => None,
        other => Some(float_from_json(other, "m_std_error")?),
    };
    let a_critical = match &v["a_critical"] {
        Value::Null => None,
        other => Some(float_from_json(other, "a_critical")?),
    };
    Ok(CriterionReport {
        m: m_from_parts(m_value, se),
        mean_rate: float_from_json(&v["mean_rate"], "mean_rate")?,
        mean_clock: float_from_json(&v["mean_clock"], "mean_clock")?,
        jensen_lower_bound: float_from_json(&v["jensen_lower_bound"], "jensen_lower_bound")?,
        a_critical,
        dispersion_verdict: parse_dispersion_verdict(
            v["dispersion_verdict"].as_str().unwrap_or_default(),
        )?,
        global_verdict: parse_global_verdict(v["global_verdict"].as_str().unwrap_or_default())?,
    })
}

// ---------------------------------------------------------------------------
// TrialOutcome
// ---------------------------------------------------------------------------

const OUTCOME_HEADER: &str = "verdict,stop_generation_or_epoch,stop_population,peak_population";

pub fn outcome_to_csv(outcome: &TrialOutcome) -> String {
    format!(
        "{OUTCOME_HEADER}\n{},{},{},{}\n",
        outcome.verdict,
        outcome.stop_generation_or_epoch,
        outcome.stop_population,
        outcome.peak_population,
    )
}

pub fn outcome_from_csv(content: &str) -> Result<TrialOutcome> {
    let rows = split_csv(content, OUTCOME_HEADER, "trial outcome")?;
    let row = rows.first().ok_or_else(|| Error::Parse("trial outcome: no data row".into()))?;
    let what = "trial outcome";
    Ok(TrialOutcome {
        verdict: field(row, 0, what)?.parse::<Verdict>()?,
        stop_generation_or_epoch: parse_int(field(row, 1, what)?, "stop_generation_or_epoch")?,
        stop_population: parse_int(field(row, 2, what)?, "stop_population")?,
        peak_population: parse_int(field(row, 3, what)?, "peak_population")?,
    })
}

pub fn outcome_to_json(outcome: &TrialOutcome) -> Value {
    json!({
        "verdict": outcome.verdict.to_string(),
        "stop_generation_or_epoch": outcome.stop_generation_or_epoch,
        "stop_population": outcome.stop_population,
        "peak_population": outcome.peak_population,
    })
}

fn parse_int<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::Parse(format!("{what}: '{s}' is not a valid integer")))
}

// ---------------------------------------------------------------------------
// SurvivalEstimate
// ---------------------------------------------------------------------------

const SURVIVAL_HEADER: &str =
    "n_trials,n_survived,point,ci_low,ci_high,master_seed,max_steps,population_cap";

pub fn survival_to_csv(e: &SurvivalEstimate) -> String {
    format!(
        "{SURVIVAL_HEADER}\n{},{},{},{},{},{},{},{}\n",
        e.n_trials,
        e.n_survived,
        fmt_float(e.point),
        fmt_float(e.ci_low),
        fmt_float(e.ci_high),
        e.master_seed,
        e.max_steps,
        e.population_cap,
    )
}

pub fn survival_from_csv(content: &str) -> Result<SurvivalEstimate> {
    let rows = split_csv(content, SURVIVAL_HEADER, "survival estimate")?;
    let row =
        rows.first().ok_or_else(|| Error::Parse("survival estimate: no data row".into()))?;
    survival_from_row(row)
}

fn survival_from_row(row: &[String]) -> Result<SurvivalEstimate> {
    let what = "survival estimate";
    Ok(SurvivalEstimate {
        n_trials: parse_int(field(row, 0, what)?, "n_trials")?,
        n_survived: parse_int(field(row, 1, what)?, "n_survived")?,
        point: parse_float_str(field(row, 2, what)?, "point")?,
        ci_low: parse_float_str(field(row, 3, what)?, "ci_low")?,
        ci_high: parse_float_str(field(row, 4, what)?, "ci_high")?,
        master_seed: parse_int(field(row, 5, what)?, "master_seed")?,
        max_steps: parse_int(field(row, 6, what)?, "max_steps")?,
        population_cap: parse_int(field(row, 7, what)?, "population_cap")?,
    })
}

pub fn survival_to_json(e: &SurvivalEstimate) -> Value {
    json!({
        "n_trials": e.n_trials,
        "n_survived": e.n_survived,
        "point": e.point,
        "ci_low": e.ci_low,
        "ci_high": e.ci_high,
        "master_seed": e.master_seed,
        "max_steps": e.max_steps,
        "population_cap": e.population_cap,
    })
}

pub fn survival_from_json(content: &str) -> Result<SurvivalEstimate> {
    let v: Value = serde_json::from_str(content)
        .map_err(|e| Error::Parse(format!("survival estimate json: {e}")))?;
    Ok(SurvivalEstimate {
        n_trials: v["n_trials"].as_u64().ok_or_else(|| Error::Parse("n_trials".into()))?,
        n_survived: v["n_survived"].as_u64().ok_or_else(|| Error::Parse("n_survived".into()))?,
        point: float_from_json(&v["point"], "point")?,
        ci_low: float_from_json(&v["ci_low"], "ci_low")?,
        ci_high: float_from_json(&v["ci_high"], "ci_high")?,
        master_seed: v["master_seed"].as_u64().ok_or_else(|| Error::Parse("master_seed".into()))?,
        max_steps: v["max_steps"].as_u64().ok_or_else(|| Error::Parse("max_steps".into()))? as u32,
        population_cap: v["population_cap"]
            .as_u64()
            .ok_or_else(|| Error::Parse("population_cap".into()))?,
    })
}

// ---------------------------------------------------------------------------
// Sweep rows
// ---------------------------------------------------------------------------

const SWEEP_HEADER: &str = "param,value,m,predicted,n_trials,n_survived,point,ci_low,ci_high,seed";

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.param,
            fmt_float(row.value),
            fmt_float(row.m.value()),
            row.predicted,
            row.estimate.n_trials,
            row.estimate.n_survived,
            fmt_float(row.estimate.point),
            fmt_float(row.estimate.ci_low),
            fmt_float(row.estimate.ci_high),
            row.estimate.master_seed,
        ));
    }
    out
}

pub fn sweep_from_csv(content: &str) -> Result<Vec<SweepRow>> {
    let rows = split_csv(content, SWEEP_HEADER, "sweep output")?;
    let what = "sweep output";
    rows.iter()
        .map(|row| {
            let m_value = parse_float_str(field(row, 2, what)?, "m")?;
            Ok(SweepRow {
                param: field(row, 0, what)?.parse()?,
                value: parse_float_str(field(row, 1, what)?, "value")?,
                m: m_from_parts(m_value, None),
                predicted: field(row, 3, what)?.parse()?,
                estimate: SurvivalEstimate {
                    n_trials: parse_int(field(row, 4, what)?, "n_trials")?,
                    n_survived: parse_int(field(row, 5, what)?, "n_survived")?,
                    point: parse_float_str(field(row, 6, what)?, "point")?,
                    ci_low: parse_float_str(field(row, 7, what)?, "ci_low")?,
                    ci_high: parse_float_str(field(row, 8, what)?, "ci_high")?,
                    master_seed: parse_int(field(row, 9, what)?, "seed")?,
                    // caps are not part of the sweep row contract
                    max_steps: 0,
                    population_cap: 0,
                },
            })
        })
        .collect()
}

fn sweep_row_to_json(row: &SweepRow) -> Value {
    json!({
        "param": row.param.to_string(),
        "value": row.value,
        "m": float_json(row.m.value()),
        "predicted": row.predicted.to_string(),
        "n_trials": row.estimate.n_trials,
        "n_survived": row.estimate.n_survived,
        "point": row.estimate.point,
        "ci_low": row.estimate.ci_low,
        "ci_high": row.estimate.ci_high,
        "seed": row.estimate.master_seed,
    })
}

pub fn sweep_from_json(content: &str) -> Result<Vec<SweepRow>> {
    let v: Value =
        serde_json::from_str(content).map_err(|e| Error::Parse(format!("sweep json: {e}")))?;
    let arr = v.as_array().ok_or_else(|| Error::Parse("sweep json: expected array".into()))?;
    arr.iter()
        .map(|row| {
            Ok(SweepRow {
                param: row["param"].as_str().unwrap_or_default().parse()?,
                value: float_from_json(&row["value"], "value")?,
                m: m_from_parts(float_from_json(&row["m"], "m")?, None),
                predicted: row["predicted"].as_str().unwrap_or_default().parse()?,
                estimate: SurvivalEstimate {
                    n_trials: row["n_trials"].as_u64().ok_or_else(|| Error::Parse("n_trials".into()))?,
                    n_survived: row["n_survived"]
                        .as_u64()
                        .ok_or_else(|| Error::Parse("n_survived".into()))?,
                    point: float_from_json(&row["point"], "point")?,
                    ci_low: float_from_json(&row["ci_low"], "ci_low")?,
                    ci_high: float_from_json(&row["ci_high"], "ci_high")?,
                    master_seed: row["seed"].as_u64().ok_or_else(|| Error::Parse("seed".into()))?,
                    max_steps: 0,
                    population_cap: 0,
                },
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Compare rows
// ---------------------------------------------------------------------------

const COMPARE_HEADER: &str =
    "model,criterion,predicted,n_trials,n_survived,point,ci_low,ci_high,seed";

pub fn compare_to_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.model,
            fmt_float(row.criterion),
            row.predicted,
            row.estimate.n_trials,
            row.estimate.n_survived,
            fmt_float(row.estimate.point),
            fmt_float(row.estimate.ci_low),
            fmt_float(row.estimate.ci_high),
            row.estimate.master_seed,
        ));
    }
    out
}

pub fn compare_from_csv(content: &str) -> Result<Vec<CompareRow>> {
    let rows = split_csv(content, COMPARE_HEADER, "compare output")?;
    let what = "compare output";
    rows.iter()
        .map(|row| {
            Ok(CompareRow {
                model: field(row, 0, what)?.parse()?,
                criterion: parse_float_str(field(row, 1, what)?, "criterion")?,
                predicted: field(row, 2, what)?.parse()?,
                estimate: SurvivalEstimate {
                    n_trials: parse_int(field(row, 3, what)?, "n_trials")?,
                    n_survived: parse_int(field(row, 4, what)?, "n_survived")?,
                    point: parse_float_str(field(row, 5, what)?, "point")?,
                    ci_low: parse_float_str(field(row, 6, what)?, "ci_low")?,
                    ci_high: parse_float_str(field(row, 7, what)?, "ci_high")?,
                    master_seed: parse_int(field(row, 8, what)?, "seed")?,
                    max_steps: 0,
                    population_cap: 0,
                },
            })
        })
        .collect()
}

fn compare_row_to_json(row: &CompareRow) -> Value {
    json!({
        "model": row.model.to_string(),
        "criterion": float_json(row.criterion),
        "predicted": row.predicted.to_string(),
        "n_trials": row.estimate.n_trials,
        "n_survived": row.estimate.n_survived,
        "point": row.estimate.point,
        "ci_low": row.estimate.ci_low,
        "ci_high": row.estimate.ci_high,
        "seed": row.estimate.master_seed,
    })
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

const TRAJECTORY_HEADER: &str = "time,delta,population";

pub fn trajectory_to_csv(events: &[TrajectoryEvent], termination: &str) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for e in events {
        out.push_str(&format!("{},{},{}\n", fmt_float(e.time), e.delta, e.population_after));
    }
    out.push_str(&format!("# termination: {termination}\n"));
    out
}

pub fn trajectory_from_csv(content: &str) -> Result<(Vec<TrajectoryEvent>, String)> {
    let termination = content
        .lines()
        .find_map(|l| l.strip_prefix("# termination: "))
        .unwrap_or("horizon")
        .to_string();
    let rows = split_csv(content, TRAJECTORY_HEADER, "trajectory")?;
    let what = "trajectory";
    let events = rows
        .iter()
        .map(|row| {
            Ok(TrajectoryEvent {
                time: parse_float_str(field(row, 0, what)?, "time")?,
                delta: parse_int(field(row, 1, what)?, "delta")?,
                population_after: parse_int(field(row, 2, what)?, "population")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((events, termination))
}

fn trajectory_to_json(events: &[TrajectoryEvent], termination: &str) -> Value {
    json!({
        "termination": termination,
        "events": events
            .iter()
            .map(|e| json!({"time": e.time, "delta": e.delta, "population": e.population_after}))
            .collect::<Vec<Value>>(),
    })
}

pub fn trajectory_from_json(content: &str) -> Result<(Vec<TrajectoryEvent>, String)> {
    let v: Value =
        serde_json::from_str(content).map_err(|e| Error::Parse(format!("trajectory json: {e}")))?;
    let termination = v["termination"].as_str().unwrap_or("horizon").to_string();
    let events = v["events"]
        .as_array()
        .ok_or_else(|| Error::Parse("trajectory json: expected events array".into()))?
        .iter()
        .map(|e| {
            Ok(TrajectoryEvent {
                time: float_from_json(&e["time"], "time")?,
                delta: e["delta"].as_i64().ok_or_else(|| Error::Parse("delta".into()))? as i8,
                population_after: e["population"]
                    .as_u64()
                    .ok_or_else(|| Error::Parse("population".into()))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((events, termination))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(line: &str) -> Result<RunSpec> {
        parse_args(line.split_whitespace())
    }

    #[test]
    fn parses_survival_example_with_defaults() {
        let spec = parse(
            "disperse survival --model dispersion --mu two_point:0,2,0.5 --nu exp:1.5 \
             --trials 10000 --seed 42",
        )
        .unwrap();
        assert_eq!(spec.command, CommandKind::Survival);
        assert_eq!(spec.model, Some(Model::Dispersion));
        assert_eq!(spec.trials, 10_000);
        assert_eq!(spec.master_seed, 42);
        // documented defaults fill the rest
        assert_eq!(spec.max_steps, 100);
        assert_eq!(spec.population_cap, 100_000);
        assert_eq!(spec.horizon, 200.0);
        assert_eq!(spec.format, OutputFormat::Csv);
        assert_eq!(spec.out, None);
        let env = spec.env.unwrap();
        assert_eq!(env.rate_law().to_string(), "two_point:0,2,0.5");
        assert_eq!(env.clock_law().to_string(), "exp:1.5");
        assert_eq!(env.coupling(), Coupling::Independent);
    }

    #[test]
    fn canonicalizes_out_of_order_two_point() {
        let spec = parse("disperse criterion --mu two_point:2,0.5,0.8 --nu exp:1").unwrap();
        assert_eq!(
            spec.env.unwrap().rate_law().to_string(),
            "two_point:0.5,2,0.19999999999999996"
        );
    }

    #[test]
    fn spec_round_trips_through_its_args() {
        for line in [
            "disperse criterion --mu two_point:0,2,0.5 --nu exp:1 --method quadrature",
            "disperse survival --model global --mu point:2 --nu exp:1 --trials 500",
            "disperse sweep --model dispersion --mu two_point:0.5,1.5,0.8 --nu exp:1 \
             --sweep a=0.3:1.2:0.1 --trials 100",
            "disperse compare --mu two_point:0,2,0.5 --nu exp:1.5 --rate 1.0",
            "disperse simulate --model fixed --rate 2 --pop-cap 1000",
            "disperse trajectory --model dispersion --mu point:2 --nu det:0.6931 --horizon 5",
        ] {
            let spec = parse(line).unwrap();
            let again = parse_args(spec.to_args()).unwrap();
            assert_eq!(spec, again, "round trip failed for: {line}");
        }
    }

    #[test]
    fn sweep_range_expansion() {
        let spec = parse(
            "disperse sweep --model dispersion --mu two_point:0.5,1.5,0.8 --nu exp:1 \
             --sweep a=0.3:1.2:0.1",
        )
        .unwrap();
        let (param, values) = spec.sweep.unwrap();
        assert_eq!(param, SweepParam::ClockRate);
        assert_eq!(values.len(), 10);
        assert!((values[0] - 0.3).abs() < 1e-12);
        assert!((values[9] - 1.2).abs() < 1e-9);
        // explicit list form
        let spec = parse(
            "disperse sweep --model dispersion --mu two_point:0.5,1.5,0.8 --nu exp:1 \
             --sweep a=0.3,0.6,0.7,1.0,1.2",
        )
        .unwrap();
        assert_eq!(spec.sweep.unwrap().1, vec![0.3, 0.6, 0.7, 1.0, 1.2]);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(parse("disperse survival --model dispersion --mu bad --nu exp:1").is_err());
        assert!(parse("disperse survival --model warp --mu point:1 --nu exp:1").is_err());
        assert!(parse("disperse survival --model dispersion --nu exp:1").is_err());
        assert!(parse("disperse simulate --model fixed").is_err());
        assert!(parse("disperse sweep --model dispersion --mu point:1 --nu exp:1 --sweep a=").is_err());
        assert!(
            parse("disperse sweep --model dispersion --mu point:1 --nu exp:1 --sweep a=1:0:0.1")
                .is_err()
        );
        assert!(
            parse("disperse sweep --model dispersion --mu point:1 --nu exp:1 --sweep q=1,2")
                .is_err()
        );
        assert!(parse("disperse survival --model dispersion --mu point:1 --nu exp:1 --trials 0")
            .is_err());
        assert!(parse("disperse survival --model dispersion --mu point:1 --nu exp:1 --seed x")
            .is_err());
        assert!(parse("disperse survival --unknown-flag 1").is_err());
    }

    #[test]
    fn criterion_execution_examples() {
        // m = 1 exactly: Dies
        let spec = parse("disperse criterion --mu point:1 --nu det:5").unwrap();
        let out = execute(&spec).unwrap().body;
        let report = criterion_from_csv(&out).unwrap();
        assert!((report.m.value() - 1.0).abs() < 1e-12);
        assert_eq!(report.dispersion_verdict, DispersionVerdict::Dies);

        // divergent branch: inf, Survives
        let spec = parse("disperse criterion --mu two_point:0,2,0.5 --nu exp:1.0").unwrap();
        let out = execute(&spec).unwrap().body;
        assert!(out.contains("inf"));
        let report = criterion_from_csv(&out).unwrap();
        assert!(report.m.is_infinite());
        assert_eq!(report.dispersion_verdict, DispersionVerdict::Survives);
    }

    #[test]
    fn identical_invocations_render_identical_bytes() {
        let line = "disperse survival --model dispersion --mu two_point:0,2,0.5 --nu exp:1.5 \
                    --trials 300 --pop-cap 1000 --max-gen 30 --seed 7";
        let a = execute(&parse(line).unwrap()).unwrap();
        let b = execute(&parse(line).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn survival_csv_and_json_round_trip() {
        let line = "disperse survival --model fixed --rate 0 --trials 50 --seed 3";
        let spec = parse(line).unwrap();
        let csv = execute(&spec).unwrap().body;
        let est = survival_from_csv(&csv).unwrap();
        assert_eq!(est.n_survived, 0);
        assert_eq!(survival_to_csv(&est), csv);

        let spec = parse(&format!("{line} --format json")).unwrap();
        let json = execute(&spec).unwrap().body;
        let est2 = survival_from_json(&json).unwrap();
        assert_eq!(est, est2);
    }

    #[test]
    fn trajectory_round_trip_and_termination_label() {
        let spec = parse(
            "disperse trajectory --model fixed --rate 0 --horizon 100 --pop-cap 10 --seed 5",
        )
        .unwrap();
        let csv = execute(&spec).unwrap().body;
        let (events, termination) = trajectory_from_csv(&csv).unwrap();
        assert_eq!(termination, "extinct");
        assert_eq!(events[0], TrajectoryEvent { time: 0.0, delta: 0, population_after: 1 });
        assert_eq!(trajectory_to_csv(&events, &termination), csv);

        let spec = parse(
            "disperse trajectory --model fixed --rate 0 --horizon 100 --pop-cap 10 --seed 5 \
             --format json",
        )
        .unwrap();
        let json = execute(&spec).unwrap().body;
        let (events2, term2) = trajectory_from_json(&json).unwrap();
        assert_eq!(events, events2);
        assert_eq!(termination, term2);
    }

    #[test]
    fn sweep_invalid_rows_become_warnings() {
        let spec = parse(
            "disperse sweep --model dispersion --mu two_point:0.5,1.5,0.8 --nu exp:1 \
             --sweep p=0.5,1.5 --trials 10 --pop-cap 50 --max-gen 5",
        )
        .unwrap();
        let rendered = execute(&spec).unwrap();
        let rows = sweep_from_csv(&rendered.body).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rendered.warnings.len(), 1);
        assert!(rendered.warnings[0].contains("p=1.5"), "{:?}", rendered.warnings);
    }

    #[test]
    fn compare_emits_three_rows() {
        let spec = parse(
            "disperse compare --mu two_point:0,2,0.5 --nu exp:1.5 --trials 40 --pop-cap 200 \
             --max-gen 20 --seed 11",
        )
        .unwrap();
        let body = execute(&spec).unwrap().body;
        let rows = compare_from_csv(&body).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(
            rows.iter().map(|r| r.model).collect::<Vec<_>>(),
            vec![Model::Dispersion, Model::Global, Model::Fixed]
        );
        assert!((rows[0].criterion - 1.8).abs() < 1e-12);
        assert_eq!(rows[0].predicted, Prediction::Survives);
        assert_eq!(rows[1].predicted, Prediction::Dies); // E(Λ) = 1, strict
        assert!((rows[2].criterion - 1.0).abs() < 1e-12); // rate defaults to E(Λ)
        // dependent coupling cannot be compared
        assert!(execute(
            &parse("disperse compare --mu two_point:0,2,0.5 --nu discrete:1:0.5,3:0.5 \
                    --coupling comonotone --trials 10")
            .unwrap()
        )
        .is_err());
    }

    #[test]
    fn help_lists_every_flag_with_default() {
        let mut cmd = command();
        cmd.build();
        for sub in cmd.get_subcommands() {
            let help = sub.clone().render_long_help().to_string();
            for arg in sub.get_arguments() {
                if arg.get_id() == "help" || arg.get_id() == "version" {
                    continue;
                }
                let flag = format!("--{}", arg.get_long().unwrap());
                assert!(
                    help.contains(&flag),
                    "help for '{}' misses {flag}",
                    sub.get_name()
                );
                if let Some(default) = arg.get_default_values().first() {
                    let rendered = format!("[default: {}]", default.to_string_lossy());
                    assert!(
                        help.contains(&rendered),
                        "help for '{} {flag}' misses {rendered}",
                        sub.get_name()
                    );
                }
            }
        }
    }
}
