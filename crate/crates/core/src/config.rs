//! Run configuration: line-oriented `key = value` files.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Which representation the cocycle is pushed through.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// A complex embedding of the field, by root index (`None` = identity).
    Embedding(Option<usize>),
    /// The tree of a finite place above `p`.
    Padic(u64),
    Trivial,
}

impl TargetSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(TargetSpec::Embedding(None)),
            "trivial" => Ok(TargetSpec::Trivial),
            _ => {
                if let Some(p) = s.strip_prefix("padic:") {
                    return p.parse().map(TargetSpec::Padic).map_err(|e| format!("bad prime: {e}"));
                }
                if let Some(k) = s.strip_prefix("embedding:") {
                    return k
                        .parse()
                        .map(|k| TargetSpec::Embedding(Some(k)))
                        .map_err(|e| format!("bad embedding index: {e}"));
                }
                Err(format!("unknown target `{s}` (identity, trivial, embedding:<k>, padic:<p>)"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Time of one Markov step.
    pub tau: f64,
    pub eps: f64,
    /// Unit-time steps for drift runs.
    pub n: usize,
    /// Total flow time `n τ` of Markov chains.
    pub horizon: f64,
    pub samples: usize,
    pub seed: u64,
    pub word_len: usize,
    pub max_iter: usize,
    /// θ-grid size for conditional means and rotation profiles.
    pub grid: usize,
    pub alpha0: f64,
    pub trials: usize,
    /// First index of the maximal inequality; 0 means a quarter of the chain.
    pub n1: usize,
    /// `c = c_scale * (λ̂/5) * τ`.
    pub c_scale: f64,
    /// Drift used when no Lyapunov run precedes; 0 means estimate it.
    pub lambda_hat: f64,
    pub target: TargetSpec,
    pub tol: f64,
    pub hausdorff_n: usize,
    /// Random-walk steps per orbit sample.
    pub walk_steps: usize,
    pub window_lo: f64,
    pub window_hi: f64,
    pub sequence: String,
    pub seq_len: u32,
    /// Catalogued circle whose orbit the main-lemma probe starts on.
    pub circle: String,
    /// Ball radius for the inversion-generation probe.
    pub probe: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            tau: 10.0,
            eps: 0.2,
            n: 2000,
            horizon: 200.0,
            samples: 200,
            seed: 1,
            word_len: 6,
            max_iter: 10_000,
            grid: 64,
            alpha0: 0.05,
            trials: 100,
            n1: 0,
            c_scale: 0.1,
            lambda_hat: 0.0,
            target: TargetSpec::Embedding(None),
            tol: 1e-6,
            hausdorff_n: 10_000,
            walk_steps: 30,
            window_lo: 1.0,
            window_hi: 1.6,
            sequence: "inversion".into(),
            seq_len: 20,
            circle: "norm2".into(),
            probe: 0.5,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if !(self.tau > 0.0) {
            return bad("tau must be positive");
        }
        if !(self.horizon > 0.0) {
            return bad("horizon must be positive");
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return bad("eps must lie in (0, 1/2)");
        }
        if self.grid == 0 || self.samples == 0 {
            return bad("grid and samples must be positive");
        }
        if !(self.window_lo < self.window_hi) {
            return bad("window_lo must be below window_hi");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        Ok(())
    }

    /// Steps of a `τ`-chain covering the horizon.
    pub fn markov_steps(&self) -> usize {
        ((self.horizon / self.tau).round() as usize).max(1)
    }

    pub fn n1(&self) -> usize {
        if self.n1 == 0 {
            (self.markov_steps() / 4).max(1)
        } else {
            self.n1
        }
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn p<T: std::str::FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
        }
        match key {
            "tau" => self.tau = p(value)?,
            "eps" => self.eps = p(value)?,
            "n" => self.n = p(value)?,
            "horizon" => self.horizon = p(value)?,
            "samples" => self.samples = p(value)?,
            "seed" => self.seed = p(value)?,
            "word_len" => self.word_len = p(value)?,
            "max_iter" => self.max_iter = p(value)?,
            "grid" => self.grid = p(value)?,
            "alpha0" => self.alpha0 = p(value)?,
            "trials" => self.trials = p(value)?,
            "n1" => self.n1 = p(value)?,
            "c_scale" => self.c_scale = p(value)?,
            "lambda_hat" => self.lambda_hat = p(value)?,
            "target" => self.target = TargetSpec::parse(value)?,
            "tol" => self.tol = p(value)?,
            "hausdorff_n" => self.hausdorff_n = p(value)?,
            "walk_steps" => self.walk_steps = p(value)?,
            "window_lo" => self.window_lo = p(value)?,
            "window_hi" => self.window_hi = p(value)?,
            "sequence" => self.sequence = value.to_string(),
            "seq_len" => self.seq_len = p(value)?,
            "circle" => self.circle = value.to_string(),
            "probe" => self.probe = p(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ConfigError::Syntax { line: i + 1, msg };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            cfg.set(k.trim(), v.trim()).map_err(err)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }
}
