//! Verification campaigns: randomized property runs over the proof-derived
//! oracles, reported as structured records and driven either by the CLI or
//! by the acceptance suite.

use rayon::prelude::*;
use repdec_core::lattice::EdgeBits;
use repdec_core::montecarlo::code_capacity_tau;
use repdec_core::noise::{trajectory_rng, PhenomenologicalParams, RngCore};
use repdec_core::oracles::{
    chunk_decomposition, enumerate_code_capacity, erasure_run, exact_phenomenological_flip,
    random_defect_set, suppression_exponent, threshold_bound, threshold_lower_bound,
    ErasureChecks, OracleRun,
};
use repdec_core::signal::SignalRuleParams;
use serde::Serialize;

use crate::config::{CliError, parse_list};
use crate::harness::{run_code_capacity_point, thread_pool};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Erasure,
    Charge,
    Frontier,
    Chunks,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Erasure, Suite::Charge, Suite::Frontier, Suite::Chunks, Suite::Oracle];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Erasure => "erasure",
            Suite::Charge => "charge",
            Suite::Frontier => "frontier",
            Suite::Chunks => "chunks",
            Suite::Oracle => "oracle",
        }
    }
}

pub fn parse_suites(s: &str) -> Result<Vec<Suite>, CliError> {
    if s.trim() == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    let names: Vec<String> = parse_list(s)?;
    names
        .iter()
        .map(|n| match n.as_str() {
            "erasure" => Ok(Suite::Erasure),
            "charge" => Ok(Suite::Charge),
            "frontier" => Ok(Suite::Frontier),
            "chunks" => Ok(Suite::Chunks),
            "oracle" => Ok(Suite::Oracle),
            other => Err(CliError::Config(format!("unknown suite '{other}'"))),
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct CampaignOptions {
    pub cases: u64,
    pub max_pairs: u32,
    pub max_delta: i64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions { cases: 1000, max_pairs: 4, max_delta: 50, seed: 1, workers: 0 }
    }
}

impl CampaignOptions {
    fn worker_count(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
        } else {
            self.workers
        }
    }
}

/// One violation found by a campaign: which check, on which case, with a
/// short description.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub check: String,
    pub case: u64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub violations: Vec<Violation>,
    pub elapsed_ms: u64,
    pub passed: bool,
}

/// Run the erasure-style campaigns: `cases` random defect sets with at most
/// `max_pairs` pairs inside `max_delta` sites, each verified against the
/// requested streaming checks.
pub fn defect_campaign(
    opts: &CampaignOptions,
    checks: ErasureChecks,
    collect: impl Fn(u64, &OracleRun, &mut Vec<Violation>) + Sync,
) -> Result<(u64, Vec<Violation>), CliError> {
    let params = SignalRuleParams::asymmetric();
    let pool = thread_pool(opts.worker_count());
    let results: Result<Vec<Vec<Violation>>, CliError> = pool.install(|| {
        (0..opts.cases)
            .into_par_iter()
            .map(|case| {
                let mut rng = trajectory_rng(opts.seed, 0x6f7261636c65, case);
                let sigma = random_defect_set(opts.max_pairs, opts.max_delta, &mut rng);
                if sigma.is_empty() {
                    return Ok(Vec::new());
                }
                let run = erasure_run(&sigma, &params, &checks)
                    .map_err(|e| CliError::Verify(format!("case {case} ({sigma:?}): {e}")))?;
                let mut out = Vec::new();
                collect(case, &run, &mut out);
                Ok(out)
            })
            .collect()
    });
    let violations: Vec<Violation> = results?.into_iter().flatten().collect();
    Ok((opts.cases, violations))
}

fn certificate_violations(case: u64, run: &OracleRun, out: &mut Vec<Violation>) {
    let c = &run.certificate;
    if !c.sigma_confined {
        out.push(Violation { check: "sigma-confinement".into(), case, detail: format!("{c:?}") });
    }
    if !c.support_bounded {
        out.push(Violation { check: "support-bound".into(), case, detail: format!("{c:?}") });
    }
    if c.t_zero.is_none() {
        out.push(Violation { check: "zero-by-budget".into(), case, detail: format!("{c:?}") });
    }
    if !run.cleanup_ok {
        out.push(Violation { check: "cleanup".into(), case, detail: "excitation cleanup exceeded its bounds".into() });
    }
}

fn charge_violations(case: u64, run: &OracleRun, out: &mut Vec<Violation>) {
    for v in &run.charge_violations {
        out.push(Violation { check: format!("{:?}", v.fact), case, detail: format!("t={} site={} q={}", v.t, v.site, v.observed) });
    }
}

fn frontier_violations(case: u64, run: &OracleRun, out: &mut Vec<Violation>) {
    if !run.frontier_monotone {
        out.push(Violation { check: "frontier-monotone".into(), case, detail: "frontier decreased".into() });
    }
    if !run.frontier_speed_ok {
        out.push(Violation { check: "frontier-speed".into(), case, detail: "coarse speed below 1/11".into() });
    }
    for v in &run.region_violations {
        out.push(Violation { check: "region".into(), case, detail: format!("t={} site={} {}", v.t, v.site, v.rule) });
    }
}

pub fn run_suite(suite: Suite, opts: &CampaignOptions) -> Result<SuiteReport, CliError> {
    let start = std::time::Instant::now();
    let (cases, violations) = match suite {
        Suite::Erasure => defect_campaign(
            opts,
            ErasureChecks { cleanup: true, ..Default::default() },
            certificate_violations,
        )?,
        Suite::Charge => defect_campaign(
            opts,
            ErasureChecks { charge: true, cleanup: true, ..Default::default() },
            |case, run, out| {
                certificate_violations(case, run, out);
                charge_violations(case, run, out);
            },
        )?,
        Suite::Frontier => {
            // Multi-cluster sets check the frontier itself; single pairs
            // additionally check the independent-matching region structure.
            let (cases, mut violations) = defect_campaign(
                opts,
                ErasureChecks::multi_cluster(),
                |case, run, out| {
                    certificate_violations(case, run, out);
                    frontier_violations(case, run, out);
                },
            )?;
            let params = SignalRuleParams::asymmetric();
            let single = opts.cases.min(200);
            for case in 0..single {
                let mut rng = trajectory_rng(opts.seed, 0x70616972, case);
                let a = (rng.next_u64() % 16) as i64;
                let b = a + 1 + (rng.next_u64() % opts.max_delta.max(1) as u64) as i64;
                let sigma = repdec_core::lattice::DefectSet::new(vec![a, b]);
                let run = erasure_run(&sigma, &params, &ErasureChecks::all())
                    .map_err(|e| CliError::Verify(e.to_string()))?;
                frontier_violations(case, &run, &mut violations);
            }
            (cases + single, violations)
        }
        Suite::Chunks => {
            let mut violations = Vec::new();
            let mut rng = trajectory_rng(opts.seed, 0x6368756e6b, 0);
            for case in 0..opts.cases {
                let mut edges = Vec::new();
                for _ in 0..(1 + rng.next_u64() % 12) {
                    edges.push((rng.next_u64() % 600) as usize);
                }
                let error = EdgeBits::from_edges(640, &edges);
                match chunk_decomposition(&error, 6) {
                    Ok(d) => {
                        let mut all: Vec<i64> = d.fragments.iter().flatten().copied().collect();
                        all.sort_unstable();
                        if all != d.levels[0] {
                            violations.push(Violation {
                                check: "fragment-partition".into(),
                                case,
                                detail: "fragments do not partition the error".into(),
                            });
                        }
                    }
                    Err(e) => violations.push(Violation {
                        check: "chunk-invariant".into(),
                        case,
                        detail: e.to_string(),
                    }),
                }
            }
            // Threshold-bound reference values.
            if threshold_lower_bound(232) <= 0.004 {
                violations.push(Violation {
                    check: "threshold-bound".into(),
                    case: 0,
                    detail: "threshold at scale 232 not above 0.4%".into(),
                });
            }
            if suppression_exponent(232) <= 0.12 {
                violations.push(Violation {
                    check: "suppression-exponent".into(),
                    case: 0,
                    detail: "exponent at scale 232 not above 0.12".into(),
                });
            }
            if threshold_bound(1000, 0.002, 232).is_err() {
                violations.push(Violation {
                    check: "threshold-bound".into(),
                    case: 0,
                    detail: "bound evaluation failed in the valid regime".into(),
                });
            }
            (opts.cases, violations)
        }
        Suite::Oracle => {
            let mut violations = Vec::new();
            // Monte Carlo against exhaustive enumeration, code capacity.
            let params = SignalRuleParams::asymmetric();
            let n = 5;
            let eps = 0.1;
            let exact = enumerate_code_capacity(&params, n, eps, code_capacity_tau(n))
                .map_err(|e| CliError::Verify(e.to_string()))?;
            let trials = opts.cases.max(100_000);
            let mc = run_code_capacity_point(
                &params,
                n,
                eps,
                None,
                opts.seed,
                0x6d63,
                trials,
                opts.worker_count(),
            )
            .map_err(|e| CliError::Verify(e.to_string()))?;
            if !mc.estimate.contains(exact.p_fail) {
                violations.push(Violation {
                    check: "mc-vs-exact".into(),
                    case: 0,
                    detail: format!(
                        "exact {} outside [{}, {}]",
                        exact.p_fail, mc.estimate.ci_low, mc.estimate.ci_high
                    ),
                });
            }
            // Tiny phenomenological cross-check.
            let noise = PhenomenologicalParams::symmetric(0.1).unwrap();
            let exact_p = exact_phenomenological_flip(&params, 3, &noise, 2)
                .map_err(|e| CliError::Verify(e.to_string()))?;
            if !(0.0..=1.0).contains(&exact_p) {
                violations.push(Violation {
                    check: "exact-probability-range".into(),
                    case: 0,
                    detail: format!("{exact_p}"),
                });
            }
            (trials, violations)
        }
    };
    let passed = violations.is_empty();
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        cases,
        violations,
        elapsed_ms: start.elapsed().as_millis() as u64,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suites_pass() {
        let opts = CampaignOptions { cases: 150, ..Default::default() };
        for suite in [Suite::Erasure, Suite::Charge, Suite::Chunks] {
            let report = run_suite(suite, &opts).unwrap();
            assert!(report.passed, "{}: {:?}", report.suite, report.violations);
        }
    }

    #[test]
    fn frontier_suite_passes() {
        let opts = CampaignOptions { cases: 80, ..Default::default() };
        let report = run_suite(Suite::Frontier, &opts).unwrap();
        assert!(report.passed, "{:?}", report.violations);
    }
}
