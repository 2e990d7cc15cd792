//! Deterministic trajectory execution over a worker pool.
//!
//! Trajectories are indexed work items whose random streams derive from
//! `(seed, experiment, index)`; they are processed in fixed batches and
//! reduced by integer merges, so the aggregate is bit-identical for any
//! worker count. Adaptive stopping decisions happen only at fixed round
//! boundaries for the same reason.

use rayon::prelude::*;
use repdec_core::montecarlo::{
    code_capacity_tau, convergence_time, estimate_logical_rate, run_code_capacity,
    run_trajectory, Decoder, FailureRateEstimate, LogicalRateEstimate, PointAccumulator,
};
use repdec_core::noise::{trajectory_rng, PhenomenologicalParams};
use repdec_core::signal::SignalRuleParams;
use repdec_core::RuleError;

/// Trajectories per batch (one work item).
pub const BATCH: u64 = 1024;
/// Batches per stopping round; fixed so stopping points do not depend on
/// the worker count.
pub const ROUND_BATCHES: u64 = 8;

#[derive(Debug, Clone, Copy)]
pub enum TrialsPolicy {
    /// Run exactly this many trajectories.
    Fixed(u64),
    /// Run full rounds until at least `flip_budget` flips were observed at
    /// the horizon, or `max_trials` is reached.
    Adaptive { flip_budget: u64, max_trials: u64 },
}

/// One parameter point of a phenomenological run.
#[derive(Debug, Clone, Copy)]
pub struct PointSpec {
    pub decoder: Decoder,
    pub noise: PhenomenologicalParams,
    pub tau: u32,
    pub experiment: u64,
}

#[derive(Debug, Clone)]
pub struct PointSummary {
    pub acc: PointAccumulator,
    pub rate: LogicalRateEstimate,
    pub tau_n: Option<u32>,
    pub elapsed_ms: u64,
}

pub fn thread_pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("worker pool")
}

/// Run one phenomenological parameter point.
pub fn run_point(
    spec: &PointSpec,
    seed: u64,
    policy: TrialsPolicy,
    workers: usize,
    record_curve: bool,
) -> Result<PointSummary, RuleError> {
    let start = std::time::Instant::now();
    let pool = thread_pool(workers);
    let mut acc = PointAccumulator::new(spec.tau);

    let run_batch = |batch: u64, count: u64| -> Result<PointAccumulator, RuleError> {
        let mut local = PointAccumulator::new(spec.tau);
        let first = batch * BATCH;
        for traj in first..first + count {
            let mut rng = trajectory_rng(seed, spec.experiment, traj);
            run_trajectory(&spec.decoder, &spec.noise, &mut rng, &mut local, record_curve)?;
        }
        Ok(local)
    };

    let reduce = |a: Result<PointAccumulator, RuleError>,
                  b: Result<PointAccumulator, RuleError>| match (a, b) {
        (Ok(mut a), Ok(b)) => {
            a.merge(&b);
            Ok(a)
        }
        (Err(e), _) | (_, Err(e)) => Err(e),
    };

    match policy {
        TrialsPolicy::Fixed(total) => {
            let batches = total.div_ceil(BATCH);
            let merged = pool.install(|| {
                (0..batches)
                    .into_par_iter()
                    .map(|b| run_batch(b, BATCH.min(total - b * BATCH)))
                    .reduce(|| Ok(PointAccumulator::new(spec.tau)), reduce)
            })?;
            acc.merge(&merged);
        }
        TrialsPolicy::Adaptive { flip_budget, max_trials } => {
            let mut next_batch = 0u64;
            while acc.flips_final < flip_budget && acc.trials < max_trials {
                let remaining = max_trials - acc.trials;
                let round = (ROUND_BATCHES * BATCH).min(remaining);
                let batches = round.div_ceil(BATCH);
                let merged = pool.install(|| {
                    (next_batch..next_batch + batches)
                        .into_par_iter()
                        .map(|b| run_batch(b, BATCH.min(round - (b - next_batch) * BATCH)))
                        .reduce(|| Ok(PointAccumulator::new(spec.tau)), reduce)
                })?;
                acc.merge(&merged);
                next_batch += batches;
            }
        }
    }

    let fit_floor = (2 * spec.decoder.qubits() as u32).max(50);
    let rate = estimate_logical_rate(&acc, fit_floor);
    let tau_n = if record_curve && !rate.censored {
        convergence_time(&acc, rate.eps_l)
    } else {
        None
    };
    Ok(PointSummary { acc, rate, tau_n, elapsed_ms: start.elapsed().as_millis() as u64 })
}

/// Aggregate of a code-capacity point: fixed-trial Monte Carlo of one round
/// of errors plus a full decoding.
#[derive(Debug, Clone, Copy)]
pub struct CodeCapacityPoint {
    pub estimate: FailureRateEstimate,
    pub max_stack: u16,
    pub trials: u64,
    pub elapsed_ms: u64,
}

pub fn run_code_capacity_point(
    params: &SignalRuleParams,
    n: usize,
    eps: f64,
    tau: Option<u32>,
    seed: u64,
    experiment: u64,
    trials: u64,
    workers: usize,
) -> Result<CodeCapacityPoint, RuleError> {
    let start = std::time::Instant::now();
    let tau = tau.unwrap_or_else(|| code_capacity_tau(n));
    let pool = thread_pool(workers);
    let batches = trials.div_ceil(BATCH);
    let merged: Result<(u64, u16), RuleError> = pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut failures = 0u64;
                let mut max_stack = 0u16;
                let first = b * BATCH;
                for traj in first..first + BATCH.min(trials - first) {
                    let mut rng = trajectory_rng(seed, experiment, traj);
                    let out = run_code_capacity(params, n, eps, tau, &mut rng)?;
                    failures += out.failed as u64;
                    max_stack = max_stack.max(out.max_stack);
                }
                Ok((failures, max_stack))
            })
            .reduce(
                || Ok((0, 0)),
                |a, b| match (a, b) {
                    (Ok((fa, ma)), Ok((fb, mb))) => Ok((fa + fb, ma.max(mb))),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                },
            )
    });
    let (failures, max_stack) = merged?;
    Ok(CodeCapacityPoint {
        estimate: FailureRateEstimate::from_counts(failures, trials),
        max_stack,
        trials,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> PointSpec {
        PointSpec {
            decoder: Decoder::Signal { params: SignalRuleParams::symmetric(), n: 9 },
            noise: PhenomenologicalParams::symmetric(0.05).unwrap(),
            tau: 120,
            experiment: 11,
        }
    }

    #[test]
    fn worker_count_does_not_change_aggregates() {
        let one = run_point(&spec(), 5, TrialsPolicy::Fixed(4000), 1, true).unwrap();
        let eight = run_point(&spec(), 5, TrialsPolicy::Fixed(4000), 8, true).unwrap();
        assert_eq!(one.acc, eight.acc);

        let policy = TrialsPolicy::Adaptive { flip_budget: 40, max_trials: 100_000 };
        let a = run_point(&spec(), 5, policy, 1, false).unwrap();
        let b = run_point(&spec(), 5, policy, 8, false).unwrap();
        assert_eq!(a.acc, b.acc);
    }

    #[test]
    fn adaptive_policy_reaches_budget_and_stops_on_round() {
        let policy = TrialsPolicy::Adaptive { flip_budget: 25, max_trials: 1_000_000 };
        let out = run_point(&spec(), 9, policy, 4, false).unwrap();
        assert!(out.acc.flips_final >= 25);
        assert_eq!(out.acc.trials % (BATCH * ROUND_BATCHES), 0);
    }

    #[test]
    fn code_capacity_point_zero_noise_never_fails() {
        let p = SignalRuleParams::asymmetric();
        let out = run_code_capacity_point(&p, 9, 0.0, None, 1, 2, 5000, 4).unwrap();
        assert_eq!(out.estimate.failures, 0);
        assert_eq!(out.max_stack, 0);
    }
}
