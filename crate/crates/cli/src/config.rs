//! Experiment configuration: CLI flags and key-value config files share the
//! same keys, with flags taking precedence. Every run echoes its validated
//! configuration (and its hash) into the output header.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use repdec_core::cellular::{BoundaryPolicy, Diagonal, ShearingParams, ToomParams};
use repdec_core::montecarlo::Decoder;
use repdec_core::noise::{fnv1a64, PhenomenologicalParams};
use repdec_core::signal::SignalRuleParams;
use serde::{Deserialize, Serialize};

/// Process exit codes: 0 success, 2 configuration error, 3 verification or
/// rule failure, 4 I/O error.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Verify(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verify(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Verify(m) => write!(f, "verification failure: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<repdec_core::RuleError> for CliError {
    fn from(e: repdec_core::RuleError) -> Self {
        CliError::Verify(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleName {
    Asr,
    Ssr,
    Shearing,
    Toom,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleName::Asr => "asr",
            RuleName::Ssr => "ssr",
            RuleName::Shearing => "shearing",
            RuleName::Toom => "toom",
        };
        f.write_str(s)
    }
}

impl FromStr for RuleName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "asr" => Ok(RuleName::Asr),
            "ssr" => Ok(RuleName::Ssr),
            "shearing" => Ok(RuleName::Shearing),
            "toom" => Ok(RuleName::Toom),
            other => Err(format!("unknown rule '{other}' (asr, ssr, shearing, toom)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    Phenomenological,
    CodeCapacity,
}

impl FromStr for NoiseModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "phenomenological" | "phen" => Ok(NoiseModel::Phenomenological),
            "code-capacity" | "code_capacity" | "cc" => Ok(NoiseModel::CodeCapacity),
            other => Err(format!("unknown model '{other}'")),
        }
    }
}

/// The full experiment configuration, with one entry per CLI flag / config
/// key.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub rule: RuleName,
    pub model: NoiseModel,
    pub n: Vec<usize>,
    pub side: Vec<usize>,
    pub eps: Vec<f64>,
    pub eps_d: Vec<f64>,
    pub eps_m: Vec<f64>,
    pub tau: u32,
    pub trials: Option<u64>,
    pub budget_flips: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub ka: u32,
    pub kb: u32,
    pub workers: usize,
    pub toom_c: f64,
    pub toom_boundary: String,
    pub shearing_periodic: bool,
    pub first_diagonal: String,
    pub snapshot_every: u32,
    pub defects: Vec<i64>,
    pub soft_cap: u16,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rule: RuleName::Ssr,
            model: NoiseModel::Phenomenological,
            n: vec![],
            side: vec![],
            eps: vec![],
            eps_d: vec![],
            eps_m: vec![],
            tau: 1000,
            trials: None,
            budget_flips: 100,
            max_trials: 10_000_000,
            seed: 1,
            ka: 3,
            kb: 3,
            workers: 0,
            toom_c: 2.0,
            toom_boundary: "agree".into(),
            shearing_periodic: true,
            first_diagonal: "left".into(),
            snapshot_every: 0,
            defects: vec![],
            soft_cap: 255,
        }
    }
}

impl ExperimentConfig {
    /// Stable fingerprint of the configuration (timestamps excluded).
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", fnv1a64(canon.as_bytes()))
    }

    pub fn signal_params(&self) -> Result<SignalRuleParams, CliError> {
        SignalRuleParams::with_speeds(self.ka, self.kb, self.rule == RuleName::Ssr)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn shearing_params(&self) -> Result<ShearingParams, CliError> {
        let first_diagonal = match self.first_diagonal.as_str() {
            "left" => Diagonal::Left,
            "right" => Diagonal::Right,
            other => return Err(CliError::Config(format!("unknown diagonal '{other}'"))),
        };
        Ok(ShearingParams { periodic: self.shearing_periodic, first_diagonal })
    }

    pub fn toom_params(&self) -> Result<ToomParams, CliError> {
        let boundary = match self.toom_boundary.as_str() {
            "agree" => BoundaryPolicy::Agree,
            "periodic" => BoundaryPolicy::Periodic,
            other => return Err(CliError::Config(format!("unknown boundary policy '{other}'"))),
        };
        if self.toom_c <= 0.0 {
            return Err(CliError::Config("toom-c must be positive".into()));
        }
        Ok(ToomParams { schedule_factor: self.toom_c, boundary })
    }

    /// Decoder instance for one lattice size.
    pub fn decoder(&self, size: usize) -> Result<Decoder, CliError> {
        match self.rule {
            RuleName::Asr | RuleName::Ssr => {
                if size < 3 {
                    return Err(CliError::Config("ring size must be at least 3".into()));
                }
                Ok(Decoder::Signal { params: self.signal_params()?, n: size })
            }
            RuleName::Shearing => {
                if size < 4 || size % 2 != 0 {
                    return Err(CliError::Config("shearing needs an even qubit count >= 4".into()));
                }
                Ok(Decoder::Shearing { params: self.shearing_params()?, n: size })
            }
            RuleName::Toom => {
                if size < 2 {
                    return Err(CliError::Config("grid side must be at least 2".into()));
                }
                Ok(Decoder::Toom { params: self.toom_params()?, side: size })
            }
        }
    }

    /// Lattice sizes to sweep: `n` for 1D rules, `side` for the grid.
    pub fn sizes(&self) -> Result<Vec<usize>, CliError> {
        let sizes = if self.rule == RuleName::Toom {
            if !self.n.is_empty() && self.side.is_empty() {
                // Interpret n as a qubit count and take the nearest square.
                self.n
                    .iter()
                    .map(|&n| (n as f64).sqrt().round() as usize)
                    .collect()
            } else {
                self.side.clone()
            }
        } else {
            self.n.clone()
        };
        if sizes.is_empty() {
            return Err(CliError::Config("no lattice size given (--n or --side)".into()));
        }
        Ok(sizes)
    }

    /// Noise points to sweep: the symmetric list takes precedence; otherwise
    /// the cartesian product of eps_d and eps_m lists.
    pub fn noise_points(&self) -> Result<Vec<PhenomenologicalParams>, CliError> {
        let mut out = Vec::new();
        if !self.eps.is_empty() {
            for &e in &self.eps {
                out.push(
                    PhenomenologicalParams::symmetric(e)
                        .map_err(|e| CliError::Config(e.to_string()))?,
                );
            }
        } else {
            let ds = if self.eps_d.is_empty() { vec![0.0] } else { self.eps_d.clone() };
            let ms = if self.eps_m.is_empty() { vec![0.0] } else { self.eps_m.clone() };
            for &d in &ds {
                for &m in &ms {
                    out.push(
                        PhenomenologicalParams::new(d, m)
                            .map_err(|e| CliError::Config(e.to_string()))?,
                    );
                }
            }
        }
        if out.is_empty() {
            return Err(CliError::Config("no error rate given (--eps or --eps-d/--eps-m)".into()));
        }
        Ok(out)
    }

    pub fn worker_count(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
        } else {
            self.workers
        }
    }

    /// Apply one `key = value` setting (config-file line or override).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |m: String| CliError::Config(m);
        match key {
            "rule" => self.rule = value.parse().map_err(bad)?,
            "model" => self.model = value.parse().map_err(bad)?,
            "n" => self.n = parse_list(value)?,
            "side" => self.side = parse_list(value)?,
            "eps" => self.eps = parse_list(value)?,
            "eps-d" | "eps_d" => self.eps_d = parse_list(value)?,
            "eps-m" | "eps_m" => self.eps_m = parse_list(value)?,
            "tau" => self.tau = parse_one(value)?,
            "trials" => self.trials = Some(parse_one(value)?),
            "budget-flips" | "budget_flips" => self.budget_flips = parse_one(value)?,
            "max-trials" | "max_trials" => self.max_trials = parse_one(value)?,
            "seed" => self.seed = parse_one(value)?,
            "ka" => self.ka = parse_one(value)?,
            "kb" => self.kb = parse_one(value)?,
            "workers" => self.workers = parse_one(value)?,
            "toom-c" | "toom_c" => self.toom_c = parse_one(value)?,
            "toom-boundary" | "toom_boundary" => self.toom_boundary = value.to_string(),
            "shearing-periodic" | "shearing_periodic" => {
                self.shearing_periodic = parse_one(value)?
            }
            "first-diagonal" | "first_diagonal" => self.first_diagonal = value.to_string(),
            "snapshot-every" | "snapshot_every" => self.snapshot_every = parse_one(value)?,
            "defects" => self.defects = parse_list(value)?,
            "soft-cap" | "soft_cap" => self.soft_cap = parse_one(value)?,
            other => return Err(CliError::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Load `key = value` lines; `#` starts a comment.
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{}:{}: expected key = value", path.display(), lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, CliError>
where
    T::Err: fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|e| CliError::Config(format!("bad value '{p}': {e}"))))
        .collect()
}

fn parse_one<T: FromStr>(s: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| CliError::Config(format!("bad value '{s}': {e}")))
}

/// Stable per-point experiment id, fed into the stream derivation.
pub fn experiment_id(rule: RuleName, size: usize, noise: &PhenomenologicalParams, tau: u32) -> u64 {
    let key = format!("{rule}|{size}|{:?}|{:?}|{tau}", noise.eps_d, noise.eps_m);
    fnv1a64(key.as_bytes())
}

/// Ordered key-value view of a config, used by textual outputs.
pub fn config_items(cfg: &ExperimentConfig) -> BTreeMap<String, String> {
    let json = serde_json::to_value(cfg).expect("config serializes");
    let mut out = BTreeMap::new();
    if let serde_json::Value::Object(map) = json {
        for (k, v) in map {
            out.insert(k, v.to_string());
        }
    }
    out
}
