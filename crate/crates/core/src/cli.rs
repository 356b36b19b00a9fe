// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Configuration is a flat `key = value` file; several assignments may
//! share a line separated by commas, `#` starts a comment, and lists are
//! whitespace separated. `-s key=value` flags override the file, and
//! `--steps` overrides both. Unknown keys are errors.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure
//! (convergence, grid or propagation), 4 I/O error. Failures also print a
//! one-line JSON record on stderr.

use std::ffi::OsString;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dynamics::Integrator;
use crate::experiments::{
    arange_inclusive, default_theta_grid, fmt_f64, linspace, run_berry_vs_theta, run_decay_fidelity,
    run_dynamical_regime, run_evolve, run_fidelity_vs_v33, run_fringes, run_phase_traces,
    run_scheme_traces, Base, EvolveInput, ExperimentError, PointFailure, ResultTable, ScanOutcome,
    SweepMode,
};
use crate::gates::{run_gate, Scheme};
use crate::hamiltonian::SystemParams;
use crate::pulses::tau_from_cycles;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("override `{flag}`: {message}")]
    Override { flag: String, message: String },
    #[error("{0}")]
    Io(String),
}

/// Names accepted by `experiment = ...` and the `run` subcommand.
pub const EXPERIMENTS: [&str; 10] = [
    "fringes",
    "phase_traces",
    "scheme1_traces",
    "scheme2_traces",
    "berry_vs_theta",
    "fidelity_vs_v33",
    "decay_fidelity",
    "dynamical_regime",
    "gate",
    "evolve",
];

/// Every tunable, with defaults at the reference operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Option<String>,
    pub omega: f64,
    pub cycles: f64,
    pub v22: f64,
    pub v23: f64,
    pub v33: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub steps: usize,
    pub stride: usize,
    pub verify: bool,
    pub scheme: Scheme,
    pub input: EvolveInput,
    pub phip_points: usize,
    pub phip_values: Vec<f64>,
    pub theta_points: usize,
    pub sweep: SweepMode,
    pub v33_min: f64,
    pub v33_max: f64,
    pub v33_step: f64,
    pub v23_set: Vec<f64>,
    pub scan_v22: f64,
    pub gammas: Vec<f64>,
    pub presets: Vec<(f64, f64)>,
    pub dynamical_v33: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            omega: 1.0,
            cycles: 6.0,
            v22: 0.0,
            v23: 1.1,
            v33: 0.9,
            gamma2: 0.0,
            gamma3: 0.0,
            steps: crate::dynamics::DEFAULT_STEPS,
            stride: crate::dynamics::DEFAULT_STRIDE,
            verify: false,
            scheme: Scheme::Berry,
            input: EvolveInput::Superposition,
            phip_points: 64,
            phip_values: vec![0.0, PI / 2.0],
            theta_points: 32,
            sweep: SweepMode::BothPhases,
            v33_min: 0.0,
            v33_max: 4.0,
            v33_step: 0.1,
            v23_set: vec![0.0, 1.0, 2.0, 4.0],
            scan_v22: 0.005,
            gammas: vec![0.0, 1e-4, 1e-3],
            presets: crate::experiments::DECAY_PRESETS.to_vec(),
            dynamical_v33: vec![0.0, 0.1],
        }
    }
}

/// Parses a real, also accepting `pi`, `2pi`, `pi/2`, `3*pi/4`, `-pi`.
pub fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Ok(x) = t.parse::<f64>() {
        return Some(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().ok()?),
        None => (t, 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim_end_matches('*').trim();
    let c = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().ok()?,
    };
    Some(c * PI / den)
}

fn parse_scheme(v: &str) -> Option<Scheme> {
    match v {
        "1" | "berry" | "scheme1" => Some(Scheme::Berry),
        "2" | "non_berry" | "nonberry" | "scheme2" => Some(Scheme::NonBerry),
        _ => None,
    }
}

fn fmt_scheme(s: Scheme) -> &'static str {
    match s {
        Scheme::Berry => "1",
        Scheme::NonBerry => "2",
    }
}

impl RunConfig {
    fn bad(line: usize, key: &str, value: &str, what: &str) -> ConfigError {
        ConfigError::Parse { line, message: format!("`{key}` expects {what}, got `{value}`") }
    }

    /// Applies one assignment; `line` is used in diagnostics (0 for flags).
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let real = |v: &str| parse_real(v).ok_or_else(|| Self::bad(line, key, v, "a number"));
        let count = |v: &str| v.trim().parse::<usize>().map_err(|_| Self::bad(line, key, v, "a non-negative integer"));
        let list = |v: &str| -> Result<Vec<f64>, ConfigError> {
            v.split_whitespace().map(|x| parse_real(x).ok_or_else(|| Self::bad(line, key, x, "a number"))).collect()
        };
        match key {
            "experiment" => {
                if !EXPERIMENTS.contains(&value) {
                    return Err(Self::bad(line, key, value, "a known experiment"));
                }
                self.experiment = Some(value.to_string());
            }
            "omega" => self.omega = real(value)?,
            "cycles" => self.cycles = real(value)?,
            "tau" => self.cycles = real(value)? * self.omega / (2.0 * PI),
            "v22" => self.v22 = real(value)?,
            "v23" => self.v23 = real(value)?,
            "v33" => self.v33 = real(value)?,
            "gamma" => {
                let g = real(value)?;
                self.gamma2 = g;
                self.gamma3 = g;
            }
            "gamma2" => self.gamma2 = real(value)?,
            "gamma3" => self.gamma3 = real(value)?,
            "steps" => self.steps = count(value)?,
            "stride" => self.stride = count(value)?,
            "verify" => {
                self.verify = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(Self::bad(line, key, value, "true or false")),
                }
            }
            "scheme" => self.scheme = parse_scheme(value).ok_or_else(|| Self::bad(line, key, value, "1 or 2"))?,
            "input" => {
                self.input = EvolveInput::parse(value)
                    .ok_or_else(|| Self::bad(line, key, value, "psi0, 00, 01, 10 or 11"))?
            }
            "phip_points" => self.phip_points = count(value)?,
            "phip_values" => self.phip_values = list(value)?,
            "theta_points" => self.theta_points = count(value)?,
            "sweep" => {
                self.sweep = SweepMode::parse(value).ok_or_else(|| Self::bad(line, key, value, "both, mu or p"))?
            }
            "v33_min" => self.v33_min = real(value)?,
            "v33_max" => self.v33_max = real(value)?,
            "v33_step" => self.v33_step = real(value)?,
            "v23_set" => self.v23_set = list(value)?,
            "scan_v22" => self.scan_v22 = real(value)?,
            "gammas" => self.gammas = list(value)?,
            "presets" => {
                self.presets = value
                    .split_whitespace()
                    .map(|pair| {
                        let (a, b) = pair.split_once(':').ok_or_else(|| Self::bad(line, key, pair, "v22:v23 pairs"))?;
                        Ok((real(a)?, real(b)?))
                    })
                    .collect::<Result<_, ConfigError>>()?
            }
            "dynamical_v33" => self.dynamical_v33 = list(value)?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
        Ok(())
    }

    /// Parses configuration text over the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            for item in body.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let (k, v) = item.split_once('=').ok_or_else(|| ConfigError::Parse {
                    line,
                    message: format!("expected `key = value`, got `{item}`"),
                })?;
                self.set(k.trim(), v.trim(), line)?;
            }
        }
        Ok(())
    }

    /// Applies a `-s` flag: one or more comma-separated `key=value` pairs.
    pub fn apply_flag(&mut self, flag: &str) -> Result<(), ConfigError> {
        let over = |message: String| ConfigError::Override { flag: flag.to_string(), message };
        for item in flag.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| over(format!("expected `key=value`, got `{item}`")))?;
            self.set(k.trim(), v.trim(), 0).map_err(|e| match e {
                ConfigError::Parse { message, .. } => over(message),
                ConfigError::UnknownKey { key, .. } => over(format!("unknown key `{key}`")),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        tau_from_cycles(self.omega, self.cycles)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, message: &str| Err(ConfigError::Invalid { key: key.into(), message: message.into() });
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return invalid("omega", "must be positive");
        }
        if !(self.cycles.is_finite() && self.cycles > 0.0) {
            return invalid("cycles", "must be positive");
        }
        if self.steps < 4 || !self.steps.is_multiple_of(4) {
            return invalid("steps", "must be a positive multiple of 4");
        }
        if self.stride == 0 {
            return invalid("stride", "must be at least 1");
        }
        if !(self.v33_step > 0.0) || self.v33_max < self.v33_min {
            return invalid("v33_step", "scan range must be non-empty with a positive step");
        }
        if self.phip_points == 0 || self.theta_points == 0 {
            return invalid("phip_points", "grids need at least one point");
        }
        self.params().map_err(|e| ConfigError::Invalid { key: "params".into(), message: e.to_string() })?;
        Ok(())
    }

    pub fn params(&self) -> Result<SystemParams, crate::hamiltonian::ParamError> {
        SystemParams::new(self.v22, self.v23, self.v33, self.gamma2, self.gamma3)
    }

    pub fn base(&self) -> Result<Base, ConfigError> {
        self.validate()?;
        Ok(Base {
            omega: self.omega,
            tau: self.tau(),
            params: self.params().expect("validated"),
            integrator: Integrator { steps: self.steps, stride: self.stride, verify_convergence: self.verify },
        })
    }

    pub fn v33_grid(&self) -> Vec<f64> {
        arange_inclusive(self.v33_min, self.v33_max, self.v33_step)
    }

    /// Every effective setting as `(key, value)` text.
    pub fn echo(&self) -> Vec<(String, String)> {
        let list = |xs: &[f64]| xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ");
        let presets: Vec<String> = self.presets.iter().map(|(a, b)| format!("{}:{}", fmt_f64(*a), fmt_f64(*b))).collect();
        vec![
            ("experiment".into(), self.experiment.clone().unwrap_or_default()),
            ("omega".into(), fmt_f64(self.omega)),
            ("cycles".into(), fmt_f64(self.cycles)),
            ("tau".into(), fmt_f64(self.tau())),
            ("v22".into(), fmt_f64(self.v22)),
            ("v23".into(), fmt_f64(self.v23)),
            ("v33".into(), fmt_f64(self.v33)),
            ("gamma2".into(), fmt_f64(self.gamma2)),
            ("gamma3".into(), fmt_f64(self.gamma3)),
            ("steps".into(), self.steps.to_string()),
            ("stride".into(), self.stride.to_string()),
            ("verify".into(), self.verify.to_string()),
            ("scheme".into(), fmt_scheme(self.scheme).into()),
            ("input".into(), self.input.label()),
            ("phip_points".into(), self.phip_points.to_string()),
            ("phip_values".into(), list(&self.phip_values)),
            ("theta_points".into(), self.theta_points.to_string()),
            ("sweep".into(), self.sweep.label().into()),
            ("v33_min".into(), fmt_f64(self.v33_min)),
            ("v33_max".into(), fmt_f64(self.v33_max)),
            ("v33_step".into(), fmt_f64(self.v33_step)),
            ("v23_set".into(), list(&self.v23_set)),
            ("scan_v22".into(), fmt_f64(self.scan_v22)),
            ("gammas".into(), list(&self.gammas)),
            ("presets".into(), presets.join(" ")),
            ("dynamical_v33".into(), list(&self.dynamical_v33)),
        ]
    }
}

#[derive(Debug, Parser)]
#[command(name = "rydgate", version, about = "Adiabatic Rydberg phase-gate simulator")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Output file; standard output when omitted.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// RK4 steps per full gate sequence.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write JSON instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// EPR fringes versus the probe phase after a half pulse.
    Fringes,
    /// Time trace of a gate sequence from one input state.
    Evolve,
    /// Full gate report for the configured scheme.
    Gate,
    /// Geometric phase versus mixing angle.
    Berry,
    /// Coherent fidelity versus V33.
    ScanV33,
    /// Fidelity versus V33 under spontaneous decay.
    Decay,
    /// Small-V33 regime against the dynamical-phase estimate.
    Dynamical,
    /// Run the experiment named by the `experiment` key.
    Run,
}

impl Command {
    fn experiment(&self, cfg: &RunConfig) -> Result<String, ConfigError> {
        Ok(match self {
            Command::Fringes => "fringes".into(),
            Command::Evolve => "evolve".into(),
            Command::Gate => "gate".into(),
            Command::Berry => "berry_vs_theta".into(),
            Command::ScanV33 => "fidelity_vs_v33".into(),
            Command::Decay => "decay_fidelity".into(),
            Command::Dynamical => "dynamical_regime".into(),
            Command::Run => cfg.experiment.clone().ok_or_else(|| ConfigError::Invalid {
                key: "experiment".into(),
                message: "`run` needs an experiment name".into(),
            })?,
        })
    }
}

/// Builds the effective configuration: defaults, then file, then flags.
pub fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for flag in &cli.set {
        cfg.apply_flag(flag)?;
    }
    if let Some(steps) = cli.steps {
        cfg.steps = steps;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// What a run produced.
#[derive(Debug)]
pub enum Output {
    Table(ResultTable),
    Json(Value),
}

/// A failed run, possibly with a partial result to write anyway.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub failures: Vec<PointFailure>,
    pub partial: Option<Output>,
}

impl Failure {
    fn config(e: ConfigError) -> Self {
        let code = if matches!(e, ConfigError::Io(_)) { EXIT_IO } else { EXIT_CONFIG };
        let kind = if code == EXIT_IO { "io" } else { "config" };
        Self { code, kind, message: e.to_string(), failures: vec![], partial: None }
    }

    fn experiment(e: ExperimentError) -> Self {
        let (code, kind) = match &e {
            ExperimentError::Io(_) => (EXIT_IO, "io"),
            ExperimentError::InvalidGrid(_) | ExperimentError::Params(_) => (EXIT_CONFIG, "config"),
            _ => (EXIT_NUMERICAL, "numerical"),
        };
        Self { code, kind, message: e.to_string(), failures: vec![], partial: None }
    }

    pub fn record(&self) -> Value {
        let points: Vec<Value> = self
            .failures
            .iter()
            .map(|f| json!({"index": f.index, "point": f.point, "message": f.error.to_string()}))
            .collect();
        json!({
            "error": self.kind,
            "exit_code": self.code,
            "message": self.message,
            "failed_points": points,
        })
    }
}

fn scan(outcome: ScanOutcome) -> Result<Output, Failure> {
    if outcome.failures.is_empty() {
        return Ok(Output::Table(outcome.table));
    }
    let first = &outcome.failures[0];
    let mut failure = Failure::experiment(first.error.clone());
    failure.message = format!("{} of {} scan points failed; first at {}: {}",
        outcome.failures.len(),
        outcome.failures.len() + outcome.table.rows.len(),
        first.point,
        first.error);
    failure.failures = outcome.failures;
    failure.partial = Some(Output::Table(outcome.table));
    Err(failure)
}

/// Runs one named experiment.
pub fn execute(experiment: &str, cfg: &RunConfig) -> Result<Output, Failure> {
    let mut cfg = cfg.clone();
    cfg.experiment = Some(experiment.to_string());
    let cfg = &cfg;
    let base = cfg.base().map_err(Failure::config)?;
    let exp = Failure::experiment;
    let mut out = match experiment {
        "fringes" => scan(run_fringes(&base, &linspace(0.0, 2.0 * PI, cfg.phip_points)).map_err(exp)?)?,
        "phase_traces" => Output::Table(run_phase_traces(&base, &cfg.phip_values).map_err(exp)?),
        "scheme1_traces" => Output::Table(run_scheme_traces(&base, Scheme::Berry).map_err(exp)?),
        "scheme2_traces" => Output::Table(run_scheme_traces(&base, Scheme::NonBerry).map_err(exp)?),
        "evolve" => Output::Table(run_evolve(&base, cfg.scheme, cfg.input).map_err(exp)?),
        "berry_vs_theta" => {
            scan(run_berry_vs_theta(&base, &default_theta_grid(cfg.theta_points), cfg.sweep).map_err(exp)?)?
        }
        "fidelity_vs_v33" => scan(
            run_fidelity_vs_v33(&base, cfg.scheme, &cfg.v33_grid(), &cfg.v23_set, cfg.scan_v22).map_err(exp)?,
        )?,
        "decay_fidelity" => scan(
            run_decay_fidelity(&base, cfg.scheme, &cfg.gammas, &cfg.v33_grid(), &cfg.presets).map_err(exp)?,
        )?,
        "dynamical_regime" => Output::Table(run_dynamical_regime(&base, &cfg.dynamical_v33).map_err(exp)?),
        "gate" => {
            let report = run_gate(cfg.scheme, &base.params, &base.setup())
                .map_err(|e| exp(ExperimentError::Gate(e)))?;
            let mut v = report.to_json();
            let obj = v.as_object_mut().expect("flat object");
            for (k, val) in cfg.echo() {
                obj.insert(format!("config.{k}"), Value::String(val));
            }
            Output::Json(v)
        }
        other => {
            return Err(Failure::config(ConfigError::Invalid {
                key: "experiment".into(),
                message: format!("unknown experiment `{other}`"),
            }))
        }
    };
    if let Output::Table(t) = &mut out {
        embed_config(t, cfg);
    }
    Ok(out)
}

fn embed_config(t: &mut ResultTable, cfg: &RunConfig) {
    for (k, v) in cfg.echo() {
        t.metadata.push((format!("config.{k}"), v));
    }
}

fn render(out: &Output, json_mode: bool) -> String {
    match out {
        Output::Table(t) if !json_mode => t.to_csv(),
        Output::Table(t) => serde_json::to_string_pretty(&t.to_json()).expect("serializable") + "\n",
        Output::Json(v) => serde_json::to_string_pretty(v).expect("serializable") + "\n",
    }
}

fn write_output(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    let io_fail = |e: std::io::Error, what: String| Failure {
        code: EXIT_IO,
        kind: "io",
        message: format!("{what}: {e}"),
        failures: vec![],
        partial: None,
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_fail(e, p.display().to_string())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| io_fail(e, "stdout".into())),
    }
}

fn report(f: &Failure) -> i32 {
    eprintln!("{}", f.record());
    f.code
}

/// Parses arguments, runs, writes output; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => return report(&Failure::config(e)),
    };
    let experiment = match cli.command.experiment(&cfg) {
        Ok(x) => x,
        Err(e) => return report(&Failure::config(e)),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => return report(&Failure::config(ConfigError::Invalid { key: "jobs".into(), message: e.to_string() })),
    };
    let result = pool.install(|| execute(&experiment, &cfg));
    match result {
        Ok(out) => match write_output(&render(&out, cli.json), cli.output.as_deref()) {
            Ok(()) => EXIT_OK,
            Err(f) => report(&f),
        },
        Err(mut f) => {
            if let Some(partial) = f.partial.take() {
                if let Err(w) = write_output(&render(&partial, cli.json), cli.output.as_deref()) {
                    return report(&w);
                }
            }
            report(&f)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn comma_separated_assignments() {
        let c = RunConfig::parse("experiment = fringes, phip_points = 64").unwrap();
        assert_eq!(c.experiment.as_deref(), Some("fringes"));
        assert_eq!(c.phip_points, 64);
    }

    #[test]
    fn negative_v33_is_accepted() {
        let c = RunConfig::parse("v33 = -0.5").unwrap();
        assert_eq!(c.v33, -0.5);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_key_names_line() {
        let e = RunConfig::parse("v33 = 1\nfoo = 2").unwrap_err();
        assert_eq!(e, ConfigError::UnknownKey { line: 2, key: "foo".into() });
        let e = RunConfig::parse("v33 = abc").unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 1, .. }));
        assert!(matches!(RunConfig::parse("v33").unwrap_err(), ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn pi_expressions() {
        assert_eq!(parse_real("pi"), Some(PI));
        assert_eq!(parse_real("pi/2"), Some(PI / 2.0));
        assert_eq!(parse_real("3*pi/4"), Some(0.75 * PI));
        assert_eq!(parse_real("-pi"), Some(-PI));
        assert_eq!(parse_real("2pi"), Some(2.0 * PI));
        assert_eq!(parse_real("1e-4"), Some(1e-4));
        assert_eq!(parse_real("pie"), None);
    }

    #[test]
    fn lists_and_presets() {
        let c = RunConfig::parse("v23_set = 0 1.5\npresets = 0.005:1 0:0\ngammas = 0 1e-4").unwrap();
        assert_eq!(c.v23_set, vec![0.0, 1.5]);
        assert_eq!(c.presets, vec![(0.005, 1.0), (0.0, 0.0)]);
        assert_eq!(c.gammas, vec![0.0, 1e-4]);
    }

    #[test]
    fn flags_override_file() {
        let mut c = RunConfig::parse("v33 = 0.2").unwrap();
        c.apply_flag("v33=0.7").unwrap();
        assert_eq!(c.v33, 0.7);
        assert!(matches!(c.apply_flag("v33"), Err(ConfigError::Override { .. })));
        assert!(matches!(c.apply_flag("nope=1"), Err(ConfigError::Override { .. })));
    }

    #[test]
    fn invalid_values() {
        assert!(RunConfig::parse("gamma = -1").unwrap().validate().is_err());
        assert!(RunConfig::parse("steps = 10").unwrap().validate().is_err());
        assert!(RunConfig::parse("scheme = 3").is_err());
    }

    #[test]
    fn default_v33_grid_has_41_points() {
        assert_eq!(RunConfig::default().v33_grid().len(), 41);
    }
}
