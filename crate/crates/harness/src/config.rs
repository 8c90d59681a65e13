//! Flat `key=value` experiment configuration.
//!
//! One assignment per line; `#` starts a comment. Command-line flags apply
//! the same assignments on top of a file.

use bapred::adversary::{PlacementRule, StrategyId};
use bapred::predictions::{choose_group_count, parse_rational, Placement, Rational};
use bapred::protocol::ProtocolId;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {value:?}")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

/// A fault count given directly or as "t" (equal to the resilience parameter).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FaultCount {
    Exact(usize),
    T,
}

/// A misprediction budget: absolute, or a multiple of n.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Budget {
    Bits(u64),
    TimesN(u64),
    /// t·n: enough to misclassify every process the faults could cover.
    TimesTN,
}

impl Budget {
    pub fn resolve(self, n: usize, t: usize) -> u64 {
        match self {
            Budget::Bits(b) => b,
            Budget::TimesN(k) => k * n as u64,
            Budget::TimesTN => (t * n) as u64,
        }
    }

    pub fn parse(s: &str) -> Option<Budget> {
        let s = s.trim();
        if s == "tn" {
            return Some(Budget::TimesTN);
        }
        if let Some(k) = s.strip_suffix('n') {
            return if k.is_empty() { Some(Budget::TimesN(1)) } else { k.parse().ok().map(Budget::TimesN) };
        }
        s.parse().ok().map(Budget::Bits)
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Budget::Bits(b) => write!(f, "{b}"),
            Budget::TimesN(k) => write!(f, "{k}n"),
            Budget::TimesTN => f.write_str("tn"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InputPolicy {
    /// Uniform bits per process.
    Random,
    /// Every process proposes the same value.
    Unanimous(u8),
    /// p1..p⌈n/2⌉ propose 0, the rest 1.
    Split,
}

impl InputPolicy {
    pub fn parse(s: &str) -> Option<InputPolicy> {
        match s {
            "random" => Some(InputPolicy::Random),
            "split" => Some(InputPolicy::Split),
            _ => s.strip_prefix("unanimous:").and_then(|v| v.parse().ok()).map(InputPolicy::Unanimous),
        }
    }

    pub fn name(self) -> String {
        match self {
            InputPolicy::Random => "random".into(),
            InputPolicy::Split => "split".into(),
            InputPolicy::Unanimous(v) => format!("unanimous:{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaultPlacement {
    First,
    Spread,
    /// Targets the grouping the protocol uses for k̂ = f.
    TargetSmallestPerGroup,
}

impl FaultPlacement {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "first" => Some(FaultPlacement::First),
            "spread" => Some(FaultPlacement::Spread),
            "target_smallest_per_group" => Some(FaultPlacement::TargetSmallestPerGroup),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FaultPlacement::First => "first",
            FaultPlacement::Spread => "spread",
            FaultPlacement::TargetSmallestPerGroup => "target_smallest_per_group",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PredictionPlacement {
    Uniform,
    AdversarialMisclassify,
    /// Errors concentrated on the smallest honest ids.
    SmallestHonest,
    /// Errors concentrated on the faulty ids, so they look honest.
    FaultyAsHonest,
}

impl PredictionPlacement {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(PredictionPlacement::Uniform),
            "adversarial_misclassify" => Some(PredictionPlacement::AdversarialMisclassify),
            "smallest_honest" => Some(PredictionPlacement::SmallestHonest),
            "faulty_as_honest" => Some(PredictionPlacement::FaultyAsHonest),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PredictionPlacement::Uniform => "uniform",
            PredictionPlacement::AdversarialMisclassify => "adversarial_misclassify",
            PredictionPlacement::SmallestHonest => "smallest_honest",
            PredictionPlacement::FaultyAsHonest => "faulty_as_honest",
        }
    }

    pub fn to_placement(&self, truth: &bapred::predictions::GroundTruth) -> Placement {
        match self {
            PredictionPlacement::Uniform => Placement::Uniform,
            PredictionPlacement::AdversarialMisclassify => Placement::AdversarialMisclassify,
            PredictionPlacement::SmallestHonest => Placement::ConcentratedOnTargets(truth.honest().collect()),
            PredictionPlacement::FaultyAsHonest => Placement::ConcentratedOnTargets(truth.faulty().iter().copied().collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub protocol: ProtocolId,
    pub n: usize,
    /// `None`: largest t within the protocol's resilience.
    pub t: Option<usize>,
    pub f: FaultCount,
    /// `None`: the protocol default.
    pub eps: Option<Rational>,
    pub budget: Budget,
    pub fault_placement: FaultPlacement,
    pub prediction_placement: PredictionPlacement,
    pub inputs: InputPolicy,
    pub adversary: StrategyId,
    pub kappa: u32,
    pub seeds: Vec<u64>,
    pub round_cap: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            protocol: ProtocolId::UnauthCubic,
            n: 16,
            t: None,
            f: FaultCount::Exact(0),
            eps: None,
            budget: Budget::Bits(0),
            fault_placement: FaultPlacement::First,
            prediction_placement: PredictionPlacement::Uniform,
            inputs: InputPolicy::Random,
            adversary: StrategyId::Silent,
            kappa: 256,
            seeds: vec![0],
            round_cap: None,
            out: None,
        }
    }
}

/// `a..b` (exclusive), `a,b,c`, or a single seed.
pub fn parse_seeds(s: &str) -> Option<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        return (a < b).then(|| (a..b).collect());
    }
    s.split(',').map(|x| x.trim().parse().ok()).collect::<Option<Vec<u64>>>().filter(|v| !v.is_empty())
}

impl ExperimentConfig {
    pub fn eps(&self) -> Rational {
        self.eps.unwrap_or_else(|| self.protocol.default_eps())
    }

    pub fn t(&self) -> usize {
        self.t.or_else(|| self.protocol.max_t(self.n, self.eps())).unwrap_or(0)
    }

    pub fn f(&self) -> usize {
        match self.f {
            FaultCount::Exact(f) => f,
            FaultCount::T => self.t(),
        }
    }

    pub fn placement_rule(&self) -> PlacementRule {
        match self.fault_placement {
            FaultPlacement::First => PlacementRule::First,
            FaultPlacement::Spread => PlacementRule::Spread,
            FaultPlacement::TargetSmallestPerGroup => {
                let lemma = match self.protocol {
                    ProtocolId::UnauthCubic => bapred::unauth::UnauthMode::Cubic.lemma(),
                    ProtocolId::UnauthSubcubic => bapred::unauth::UnauthMode::Subcubic.lemma(),
                    ProtocolId::Auth => bapred::auth::AUTH_LEMMA,
                };
                let m = choose_group_count(lemma, self.eps(), self.n, self.f().max(1)).unwrap_or(1);
                PlacementRule::TargetSmallestPerGroup { m }
            }
        }
    }

    /// Apply one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let bad = || ConfigError::BadValue { key: key.to_string(), value: value.to_string() };
        match key.trim() {
            "protocol" => self.protocol = value.parse().map_err(|_| bad())?,
            "n" => self.n = value.parse().map_err(|_| bad())?,
            "t" => self.t = if value == "auto" { None } else { Some(value.parse().map_err(|_| bad())?) },
            "f" => self.f = if value == "t" { FaultCount::T } else { FaultCount::Exact(value.parse().map_err(|_| bad())?) },
            "epsilon" | "eps" => self.eps = if value == "auto" { None } else { Some(parse_rational(value).ok_or_else(bad)?) },
            "B" | "b" => self.budget = Budget::parse(value).ok_or_else(bad)?,
            "fault_placement" => self.fault_placement = FaultPlacement::parse(value).ok_or_else(bad)?,
            "prediction_placement" => self.prediction_placement = PredictionPlacement::parse(value).ok_or_else(bad)?,
            "inputs" => self.inputs = InputPolicy::parse(value).ok_or_else(bad)?,
            "adversary" => self.adversary = value.parse().map_err(|_| bad())?,
            "kappa" => self.kappa = value.parse().map_err(|_| bad())?,
            "seed" => self.seeds = vec![value.parse().map_err(|_| bad())?],
            "seeds" => self.seeds = parse_seeds(value).ok_or_else(bad)?,
            "round_cap" | "round-cap" => self.round_cap = Some(value.parse().map_err(|_| bad())?),
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parse a config file's text over the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Hard errors only; resilience overruns are reported by [`warnings`](Self::warnings).
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.n == 0 {
            return invalid("n must be positive".into());
        }
        if self.t() >= self.n {
            return invalid(format!("t={} must be below n={}", self.t(), self.n));
        }
        if self.f() > self.t() {
            return invalid(format!("f={} exceeds t={}", self.f(), self.t()));
        }
        if self.kappa == 0 || self.kappa % 8 != 0 || self.kappa > 1024 {
            return invalid(format!("kappa={} must be a multiple of 8 in 8..=1024", self.kappa));
        }
        let eps = self.eps();
        if eps <= Rational::from_integer(0) || self.protocol.fault_fraction(eps) <= Rational::from_integer(0) {
            return invalid(format!("epsilon={eps} out of range for {}", self.protocol));
        }
        if self.seeds.is_empty() {
            return invalid("no seeds".into());
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.protocol.resilience_ok(self.n, self.t(), self.eps()) {
            w.push(format!(
                "t={} is outside the resilience of {} at n={} (t < {}·n required); guarantees do not apply",
                self.t(),
                self.protocol,
                self.n,
                self.protocol.fault_fraction(self.eps())
            ));
        }
        w
    }

    /// Config-file text that [`parse`](Self::parse) reads back to `self`.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("protocol = {}", self.protocol),
            format!("n = {}", self.n),
            format!("t = {}", self.t.map_or("auto".to_string(), |t| t.to_string())),
            format!(
                "f = {}",
                match self.f {
                    FaultCount::Exact(f) => f.to_string(),
                    FaultCount::T => "t".into(),
                }
            ),
            format!("epsilon = {}", self.eps.map_or("auto".to_string(), |e| e.to_string())),
            format!("B = {}", self.budget),
            format!("fault_placement = {}", self.fault_placement.name()),
            format!("prediction_placement = {}", self.prediction_placement.name()),
            format!("inputs = {}", self.inputs.name()),
            format!("adversary = {}", self.adversary),
            format!("kappa = {}", self.kappa),
            format!("seeds = {}", self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",")),
        ];
        if let Some(c) = self.round_cap {
            lines.push(format!("round_cap = {c}"));
        }
        if let Some(p) = &self.out {
            lines.push(format!("out = {}", p.display()));
        }
        lines.join("\n") + "\n"
    }

    /// Canonical single-line rendering of every field that affects a run,
    /// for a given seed.
    pub fn canonical(&self, seed: u64) -> String {
        format!(
            "protocol={};n={};t={};f={};epsilon={};B={};fault_placement={};prediction_placement={};inputs={};adversary={};kappa={};round_cap={};seed={}",
            self.protocol,
            self.n,
            self.t(),
            self.f(),
            self.eps(),
            self.budget.resolve(self.n, self.t()),
            self.fault_placement.name(),
            self.prediction_placement.name(),
            self.inputs.name(),
            self.adversary,
            self.kappa,
            self.round_cap.map_or("default".to_string(), |c| c.to_string()),
            seed
        )
    }
}
