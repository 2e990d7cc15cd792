//! Result files: JSON-lines records (one header object, then one object per
//! parameter point), CSV tables for plotting/fitting, and trace files for
//! the renderer.

use std::io::Write;
use std::path::Path;

use repdec_core::lattice::BitPlane;
use repdec_core::montecarlo::SurvivalPoint;
use repdec_core::signal::Trace;
use serde::{Deserialize, Serialize};

use crate::config::{CliError, ExperimentConfig};
use crate::harness::PointSummary;

/// First line of every record file: the configuration echoed verbatim, its
/// hash, and the seed. `created` is informational and excluded from the
/// hash; everything else reproduces byte-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Header {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub created: String,
}

impl Header {
    pub fn new(config: &ExperimentConfig) -> Self {
        Header {
            config: config.clone(),
            config_hash: config.hash(),
            seed: config.seed,
            created: timestamp(),
        }
    }
}

fn timestamp() -> String {
    match std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH) {
        Ok(d) => format!("unix:{}", d.as_secs()),
        Err(_) => "unix:0".into(),
    }
}

/// One parameter point of a phenomenological run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRecord {
    pub rule: String,
    pub n: usize,
    pub eps_d: f64,
    pub eps_m: f64,
    pub tau: u32,
    pub trials: u64,
    pub flips: u64,
    pub eps_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub censored: bool,
    pub tau_n: Option<u32>,
    pub max_stack: u32,
    pub stack_hist: Vec<u64>,
    pub experiment: u64,
}

impl PointRecord {
    pub fn from_summary(
        rule: &str,
        n: usize,
        eps_d: f64,
        eps_m: f64,
        experiment: u64,
        s: &PointSummary,
    ) -> Self {
        PointRecord {
            rule: rule.to_string(),
            n,
            eps_d,
            eps_m,
            tau: s.acc.tau,
            trials: s.acc.trials,
            flips: s.acc.flips_final,
            eps_l: s.rate.eps_l,
            ci_low: s.rate.ci_low,
            ci_high: s.rate.ci_high,
            censored: s.rate.censored,
            tau_n: s.tau_n,
            max_stack: s.acc.max_stack(),
            stack_hist: s.acc.stack_hist.clone(),
            experiment,
        }
    }
}

/// Code-capacity point record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeCapacityRecord {
    pub rule: String,
    pub n: usize,
    pub eps: f64,
    pub tau: u32,
    pub trials: u64,
    pub failures: u64,
    pub p_fail: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub max_stack: u16,
    pub experiment: u64,
}

pub struct JsonlWriter<W: Write> {
    out: W,
}

impl<W: Write> JsonlWriter<W> {
    pub fn new(mut out: W, header: &Header) -> Result<Self, CliError> {
        let line = serde_json::to_string(header)?;
        writeln!(out, "{line}")?;
        Ok(JsonlWriter { out })
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<(), CliError> {
        let line = serde_json::to_string(record)?;
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush()?;
        Ok(())
    }
}

/// Plot/fit input table, one row per point.
pub fn write_fit_table(path: &Path, records: &[PointRecord]) -> Result<(), CliError> {
    let mut out = String::from("rule,n,eps_d,eps_m,tau,trials,flips,eps_l,ci_low,ci_high,censored,tau_n\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.rule,
            r.n,
            r.eps_d,
            r.eps_m,
            r.tau,
            r.trials,
            r.flips,
            r.eps_l,
            r.ci_low,
            r.ci_high,
            r.censored,
            r.tau_n.map(|t| t.to_string()).unwrap_or_default(),
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_survival_table(path: &Path, rows: &[SurvivalPoint]) -> Result<(), CliError> {
    let mut out = String::from("m,survival,ci_low,ci_high,count\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.m, r.survival, r.ci_low, r.ci_high, r.count
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Space-time trace on disk: either full decoder snapshots (signal rules)
/// or plain qubit planes per step (memoryless rules).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TraceFile {
    Signal { header: Header, trace: Trace },
    Bits { header: Header, columns: usize, rows: Vec<BitPlane> },
}

impl TraceFile {
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
