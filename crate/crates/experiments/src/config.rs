//! Flat TOML experiment configuration.
//!
//! A file names one experiment and sets its parameters at the top level:
//!
//! ```toml
//! experiment = "convergence"
//! runs = 1000
//! seed = 7
//! mu1 = 0.5
//! mu2 = 0.01
//! ```
//!
//! Keys that are not set take the experiment's defaults. Unknown keys, wrong
//! types and out-of-range values are all reported together.

use serde::de::DeserializeOwned;
use std::fmt;
use toml::{Table, Value};

use crate::experiments::{
    convergence::ConvergenceParams, echo::EchoParams, lowcost::LowcostParams,
    robustness::RobustnessParams, sparse::SparseParams, steady::SteadyParams,
    theory_tables::TheoryTablesParams, tracking::TrackingParams, transfer::TransferParams,
};

pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    SteadyNsd,
    AffineGain,
    LmsRlsTracking,
    Convergence,
    PnRobustness,
    Transfer,
    Lowcost,
    Sparse,
    Echo,
    TheoryTables,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::SteadyNsd,
        ExperimentId::AffineGain,
        ExperimentId::LmsRlsTracking,
        ExperimentId::Convergence,
        ExperimentId::PnRobustness,
        ExperimentId::Transfer,
        ExperimentId::Lowcost,
        ExperimentId::Sparse,
        ExperimentId::Echo,
        ExperimentId::TheoryTables,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::SteadyNsd => "steady-nsd",
            ExperimentId::AffineGain => "affine-gain",
            ExperimentId::LmsRlsTracking => "lms-rls-tracking",
            ExperimentId::Convergence => "convergence",
            ExperimentId::PnRobustness => "pn-robustness",
            ExperimentId::Transfer => "transfer",
            ExperimentId::Lowcost => "lowcost",
            ExperimentId::Sparse => "sparse",
            ExperimentId::Echo => "echo",
            ExperimentId::TheoryTables => "theory-tables",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.name() == name)
    }

    /// Whether the experiment runs Monte-Carlo simulations.
    pub fn simulates(self) -> bool {
        !matches!(self, ExperimentId::AffineGain | ExperimentId::LmsRlsTracking)
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Experiment-specific parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Steady(SteadyParams),
    Tracking(TrackingParams),
    Convergence(ConvergenceParams),
    Robustness(RobustnessParams),
    Transfer(TransferParams),
    Lowcost(LowcostParams),
    Sparse(SparseParams),
    Echo(EchoParams),
    TheoryTables(TheoryTablesParams),
}

impl Params {
    pub fn defaults(id: ExperimentId) -> Params {
        match id {
            ExperimentId::SteadyNsd => Params::Steady(SteadyParams::default()),
            ExperimentId::AffineGain => Params::Steady(SteadyParams::affine_gain()),
            ExperimentId::LmsRlsTracking => Params::Tracking(TrackingParams::default()),
            ExperimentId::Convergence => Params::Convergence(ConvergenceParams::default()),
            ExperimentId::PnRobustness => Params::Robustness(RobustnessParams::default()),
            ExperimentId::Transfer => Params::Transfer(TransferParams::default()),
            ExperimentId::Lowcost => Params::Lowcost(LowcostParams::default()),
            ExperimentId::Sparse => Params::Sparse(SparseParams::default()),
            ExperimentId::Echo => Params::Echo(EchoParams::default()),
            ExperimentId::TheoryTables => Params::TheoryTables(TheoryTablesParams::default()),
        }
    }

    fn to_table(&self) -> Table {
        let v = match self {
            Params::Steady(p) => Table::try_from(p),
            Params::Tracking(p) => Table::try_from(p),
            Params::Convergence(p) => Table::try_from(p),
            Params::Robustness(p) => Table::try_from(p),
            Params::Transfer(p) => Table::try_from(p),
            Params::Lowcost(p) => Table::try_from(p),
            Params::Sparse(p) => Table::try_from(p),
            Params::Echo(p) => Table::try_from(p),
            Params::TheoryTables(p) => Table::try_from(p),
        };
        v.expect("parameter structs serialize to tables")
    }

    fn from_table(id: ExperimentId, t: Table) -> Result<Params, toml::de::Error> {
        fn de<T: DeserializeOwned>(t: Table) -> Result<T, toml::de::Error> {
            Value::Table(t).try_into()
        }
        Ok(match Params::defaults(id) {
            Params::Steady(_) => Params::Steady(de(t)?),
            Params::Tracking(_) => Params::Tracking(de(t)?),
            Params::Convergence(_) => Params::Convergence(de(t)?),
            Params::Robustness(_) => Params::Robustness(de(t)?),
            Params::Transfer(_) => Params::Transfer(de(t)?),
            Params::Lowcost(_) => Params::Lowcost(de(t)?),
            Params::Sparse(_) => Params::Sparse(de(t)?),
            Params::Echo(_) => Params::Echo(de(t)?),
            Params::TheoryTables(_) => Params::TheoryTables(de(t)?),
        })
    }

    pub fn check(&self, c: &mut Check) {
        match self {
            Params::Steady(p) => p.check(c),
            Params::Tracking(p) => p.check(c),
            Params::Convergence(p) => p.check(c),
            Params::Robustness(p) => p.check(c),
            Params::Transfer(p) => p.check(c),
            Params::Lowcost(p) => p.check(c),
            Params::Sparse(p) => p.check(c),
            Params::Echo(p) => p.check(c),
            Params::TheoryTables(p) => p.check(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub runs: usize,
    pub seed: u64,
    /// Stem of the output file names; defaults to the experiment name.
    pub output: Option<String>,
    pub params: Params,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        ExperimentConfig {
            experiment,
            runs: DEFAULT_RUNS,
            seed: DEFAULT_SEED,
            output: None,
            params: Params::defaults(experiment),
        }
    }

    pub fn stem(&self) -> &str {
        self.output.as_deref().unwrap_or(self.experiment.name())
    }

    /// Range checks of every parameter.
    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut c = Check::default();
        if self.runs == 0 {
            c.error("runs: must be at least 1");
        }
        self.params.check(&mut c);
        c.finish()
    }
}

/// A parsed configuration and the warnings raised while reading it.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Accumulates validation errors.
#[derive(Debug, Default)]
pub struct Check {
    errors: Vec<String>,
}

impl Check {
    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    pub fn positive(&mut self, key: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.error(format!("{key}: must be > 0, got {v}"));
        }
    }

    pub fn non_negative(&mut self, key: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.error(format!("{key}: must be >= 0, got {v}"));
        }
    }

    pub fn finite(&mut self, key: &str, v: f64) {
        if !v.is_finite() {
            self.error(format!("{key}: must be finite, got {v}"));
        }
    }

    pub fn eta(&mut self, key: &str, v: f64) {
        if !(0.0..1.0).contains(&v) {
            self.error(format!("{key}: η out of [0,1), got {v}"));
        }
    }

    /// Open interval `(0, 1)`.
    pub fn unit_open(&mut self, key: &str, v: f64) {
        if !(v > 0.0 && v < 1.0) {
            self.error(format!("{key}: must lie in (0,1), got {v}"));
        }
    }

    /// Closed interval `[0, 1]`.
    pub fn unit_closed(&mut self, key: &str, v: f64) {
        if !(0.0..=1.0).contains(&v) {
            self.error(format!("{key}: must lie in [0,1], got {v}"));
        }
    }

    pub fn at_least(&mut self, key: &str, v: usize, min: usize) {
        if v < min {
            self.error(format!("{key}: must be at least {min}, got {v}"));
        }
    }

    pub fn nonempty<T>(&mut self, key: &str, v: &[T]) {
        if v.is_empty() {
            self.error(format!("{key}: must not be empty"));
        }
    }

    /// `lo < hi`, both positive (log-spaced grids).
    pub fn log_range(&mut self, lo_key: &str, lo: f64, hi_key: &str, hi: f64) {
        self.positive(lo_key, lo);
        self.positive(hi_key, hi);
        if !(lo < hi) {
            self.error(format!("{lo_key} must be below {hi_key}, got {lo} >= {hi}"));
        }
    }

    /// Steady-state tail inside the horizon.
    pub fn tail(&mut self, tail: usize, horizon: usize) {
        self.at_least("horizon", horizon, 1);
        if tail == 0 || tail > horizon {
            self.error(format!("tail: must be in 1..={horizon}, got {tail}"));
        }
    }

    pub fn finish(self) -> Result<(), ConfigErrors> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(self.errors))
        }
    }
}

/// Parse and validate a configuration document.
pub fn parse(text: &str) -> Result<Loaded, ConfigErrors> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| ConfigErrors(vec![e.message().to_string()]))?;
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    let id = match table.remove("experiment") {
        Some(Value::String(s)) => match ExperimentId::from_name(&s) {
            Some(id) => id,
            None => {
                let known: Vec<_> = ExperimentId::ALL.iter().map(|i| i.name()).collect();
                return Err(ConfigErrors(vec![format!(
                    "experiment: unknown id \"{s}\" (expected one of {})",
                    known.join(", ")
                )]));
            }
        },
        Some(v) => return Err(ConfigErrors(vec![format!("experiment: expected a string, got {v}")])),
        None => return Err(ConfigErrors(vec!["experiment: missing (required)".into()])),
    };
    let mut config = ExperimentConfig::new(id);

    match table.remove("runs") {
        Some(Value::Integer(r)) if r >= 1 => config.runs = r as usize,
        Some(v) => errors.push(format!("runs: must be an integer >= 1, got {v}")),
        None if id.simulates() => {
            warnings.push(format!("runs not set; using default {DEFAULT_RUNS}"))
        }
        None => {}
    }
    match table.remove("seed") {
        Some(Value::Integer(s)) if s >= 0 => config.seed = s as u64,
        Some(v) => errors.push(format!("seed: must be a non-negative integer, got {v}")),
        None => {}
    }
    match table.remove("output") {
        Some(Value::String(s)) if valid_stem(&s) => config.output = Some(s),
        Some(v) => errors.push(format!("output: expected a plain file stem, got {v}")),
        None => {}
    }

    let mut merged = Params::defaults(id).to_table();
    for (key, value) in table {
        match merged.get(&key) {
            None => errors.push(format!("{key}: unknown key for experiment {id}")),
            Some(default) => {
                let v = coerce(default, value);
                merged.insert(key, v);
            }
        }
    }
    // unknown keys never reach `merged`, so the known ones are still checked
    match Params::from_table(id, merged) {
        Ok(p) => {
            config.params = p;
            if let Err(ConfigErrors(e)) = config.validate() {
                errors.extend(e);
            }
        }
        Err(e) => errors.push(e.message().to_string()),
    }
    if errors.is_empty() {
        Ok(Loaded { config, warnings })
    } else {
        Err(ConfigErrors(errors))
    }
}

fn valid_stem(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) && s != "." && s != ".."
}

/// Integers are accepted where floats are expected (`mu = 1`).
fn coerce(default: &Value, value: Value) -> Value {
    match (default, value) {
        (Value::Float(_), Value::Integer(i)) => Value::Float(i as f64),
        (Value::Array(d), Value::Array(items)) if d.first().is_some_and(Value::is_float) => Value::Array(
            items.into_iter().map(|v| if let Value::Integer(i) = v { Value::Float(i as f64) } else { v }).collect(),
        ),
        (_, v) => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_out_of_range_is_reported() {
        let err = parse("experiment = \"convergence\"\nruns = 10\neta = 1.2\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert!(err.0[0].contains("η out of [0,1)"), "{err}");
    }

    #[test]
    fn missing_runs_uses_default_with_warning() {
        let l = parse("experiment = \"convergence\"\n").unwrap();
        assert_eq!(l.config.runs, DEFAULT_RUNS);
        assert_eq!(l.warnings.len(), 1);
        assert!(l.warnings[0].contains("runs"));
        let l = parse("experiment = \"lms-rls-tracking\"\n").unwrap();
        assert!(l.warnings.is_empty());
    }

    #[test]
    fn errors_are_aggregated() {
        let err = parse("experiment = \"convergence\"\nbogus = 1\nother = 2\nruns = 0\n").unwrap_err();
        assert_eq!(err.0.len(), 3, "{err}");
        let err = parse("experiment = \"convergence\"\nmu1 = -1.0\neta = 2.0\nhorizon = 0\n").unwrap_err();
        assert!(err.0.len() >= 3, "{err}");
    }

    #[test]
    fn integers_coerce_to_floats() {
        let l = parse("experiment = \"convergence\"\nruns = 3\nmu1 = 1\nmixer_steps = [1, 0.5]\n").unwrap();
        let Params::Convergence(p) = l.config.params else { panic!() };
        assert_eq!(p.mu1, 1.0);
        assert_eq!(p.mixer_steps, vec![1.0, 0.5]);
    }

    #[test]
    fn unknown_experiment_and_bad_toml() {
        assert!(parse("experiment = \"nope\"").unwrap_err().0[0].contains("unknown id"));
        assert!(parse("experiment = ").is_err());
        assert!(parse("runs = 3").unwrap_err().0[0].contains("missing"));
    }

    #[test]
    fn every_experiment_has_valid_defaults() {
        for id in ExperimentId::ALL {
            ExperimentConfig::new(id).validate().unwrap();
            assert_eq!(ExperimentId::from_name(id.name()), Some(id));
            let l = parse(&format!("experiment = \"{id}\"\nruns = 2\n")).unwrap();
            assert_eq!(l.config.params, Params::defaults(id));
        }
    }
}
