//! Trajectory execution and logical-error statistics: per-step flip curves,
//! logical-error-rate extraction, convergence times, and stack-survival
//! tables.
//!
//! Aggregation is done in integer accumulators that merge by addition, so
//! any parallel partition of trajectories reduces to bit-identical results.

use alloc::vec;
use alloc::vec::Vec;
use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::cellular::{orientation_schedule, switch_interval, ShearingParams, SquareGrid, ToomParams, TwoRowLattice};
use crate::lattice::{logical_state_plane, Topology};
use crate::noise::{flip_bits, noisy_syndrome, sample_code_capacity, PhenomenologicalParams};
use crate::signal::SignalRuleParams;
use crate::RuleError;

/// Which decoder a trajectory runs, with its geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decoder {
    /// Signal rule on a ring of `n` data qubits.
    Signal { params: SignalRuleParams, n: usize },
    /// Shearing rule on `n` qubits in two rows; one time step is one full
    /// (majority, permutation, majority, permutation) cycle.
    Shearing { params: ShearingParams, n: usize },
    /// Toom's rule on a `side x side` grid (counted as `n = side^2` qubits).
    Toom { params: ToomParams, side: usize },
}

impl Decoder {
    pub fn qubits(&self) -> usize {
        match *self {
            Decoder::Signal { n, .. } => n,
            Decoder::Shearing { n, .. } => n,
            Decoder::Toom { side, .. } => side * side,
        }
    }

    /// Proven per-site stack bound; zero for the memoryless rules.
    pub fn stack_bound(&self) -> u32 {
        match *self {
            Decoder::Signal { n, .. } => 2 * n as u32,
            _ => 0,
        }
    }
}

/// Integer aggregate over a set of trajectories of one parameter point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointAccumulator {
    pub tau: u32,
    pub trials: u64,
    /// `flips_at[t]` = number of trajectories whose logical readout was 1
    /// after step `t` (index 0 unused, kept for direct indexing).
    pub flips_at: Vec<u64>,
    /// `stack_hist[m]` = trajectories whose maximum stack height was `m`.
    pub stack_hist: Vec<u64>,
    /// Flips observed at the final step.
    pub flips_final: u64,
}

impl PointAccumulator {
    pub fn new(tau: u32) -> Self {
        PointAccumulator {
            tau,
            trials: 0,
            flips_at: vec![0; tau as usize + 1],
            stack_hist: Vec::new(),
            flips_final: 0,
        }
    }

    pub fn merge(&mut self, other: &PointAccumulator) {
        debug_assert_eq!(self.tau, other.tau);
        self.trials += other.trials;
        self.flips_final += other.flips_final;
        for (a, b) in self.flips_at.iter_mut().zip(&other.flips_at) {
            *a += b;
        }
        if self.stack_hist.len() < other.stack_hist.len() {
            self.stack_hist.resize(other.stack_hist.len(), 0);
        }
        for (i, &c) in other.stack_hist.iter().enumerate() {
            self.stack_hist[i] += c;
        }
    }

    fn record_stack(&mut self, max_stack: u16) {
        let m = max_stack as usize;
        if self.stack_hist.len() <= m {
            self.stack_hist.resize(m + 1, 0);
        }
        self.stack_hist[m] += 1;
    }

    pub fn max_stack(&self) -> u32 {
        self.stack_hist
            .iter()
            .rposition(|&c| c > 0)
            .map(|m| m as u32)
            .unwrap_or(0)
    }

    /// Observed flip fraction at step `t`.
    pub fn p_at(&self, t: u32) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.flips_at[t as usize] as f64 / self.trials as f64
        }
    }
}

/// One phenomenological trajectory from the zero configuration: per step,
/// inject data errors, measure noisily, run the rule, apply its corrections.
/// Outcomes are folded into the accumulator.
pub fn run_trajectory(
    decoder: &Decoder,
    noise: &PhenomenologicalParams,
    rng: &mut impl RngCore,
    acc: &mut PointAccumulator,
    record_curve: bool,
) -> Result<(), RuleError> {
    let tau = acc.tau;
    match decoder {
        Decoder::Signal { params, n } => {
            let top = Topology::Ring { n: *n };
            let mut state = params.state(top);
            for t in 1..=tau {
                flip_bits(state.data_mut(), noise.eps_d, rng);
                let synd = noisy_syndrome(state.data(), &top, noise.eps_m, rng);
                let mask = state.step(params, Some(&synd))?;
                state.apply_correction(&mask);
                if record_curve && logical_state_plane(state.data()) {
                    acc.flips_at[t as usize] += 1;
                }
            }
            let flipped = logical_state_plane(state.data());
            if !record_curve && flipped {
                acc.flips_at[tau as usize] += 1;
            }
            if flipped {
                acc.flips_final += 1;
            }
            acc.record_stack(state.max_stack_seen());
        }
        Decoder::Shearing { params, n } => {
            let mut lat = TwoRowLattice::new(*n, *params)?;
            for t in 1..=tau {
                lat.cycle(Some((noise, rng)));
                if record_curve && lat.logical_state() {
                    acc.flips_at[t as usize] += 1;
                }
            }
            let flipped = lat.logical_state();
            if !record_curve && flipped {
                acc.flips_at[tau as usize] += 1;
            }
            if flipped {
                acc.flips_final += 1;
            }
            acc.record_stack(0);
        }
        Decoder::Toom { params, side } => {
            let mut grid = SquareGrid::new(*side, *params)?;
            let k_switch = switch_interval(*side, params.schedule_factor);
            for t in 1..=tau {
                let orientation = orientation_schedule(t - 1, k_switch);
                grid.toom_step(orientation, Some((noise, rng)));
                if record_curve && grid.logical_state() {
                    acc.flips_at[t as usize] += 1;
                }
            }
            let flipped = grid.logical_state();
            if !record_curve && flipped {
                acc.flips_at[tau as usize] += 1;
            }
            if flipped {
                acc.flips_final += 1;
            }
            acc.record_stack(0);
        }
    }
    acc.trials += 1;
    Ok(())
}

/// Outcome of one code-capacity run: a single round of errors, perfect
/// initial syndrome, then `tau` noiseless rule iterations. Decoding succeeds
/// only if the data returns exactly to zero with all registers empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeCapacityOutcome {
    pub failed: bool,
    pub max_stack: u16,
    pub steps_used: u32,
}

pub fn run_code_capacity(
    params: &SignalRuleParams,
    n: usize,
    eps: f64,
    tau: u32,
    rng: &mut impl RngCore,
) -> Result<CodeCapacityOutcome, RuleError> {
    let error = sample_code_capacity(n, eps, rng);
    run_code_capacity_error(params, &error, tau)
}

/// Deterministic code-capacity run on a fixed error pattern.
pub fn run_code_capacity_error(
    params: &SignalRuleParams,
    error: &crate::lattice::EdgeBits,
    tau: u32,
) -> Result<CodeCapacityOutcome, RuleError> {
    let mut state = crate::lattice::DecoderState::from_error(error, params.direction_count());
    let mut steps_used = 0;
    for _ in 0..tau {
        if state.is_quiescent() {
            break;
        }
        let mask = state.step(params, None)?;
        state.apply_correction(&mask);
        steps_used += 1;
    }
    let failed = !(state.is_quiescent() && state.data().is_empty_plane());
    Ok(CodeCapacityOutcome { failed, max_stack: state.max_stack_seen(), steps_used })
}

/// Default code-capacity horizon: enough for any cluster on the ring to be
/// erased and cleaned up.
pub fn code_capacity_tau(n: usize) -> u32 {
    (77 * n) as u32
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)) / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A per-run failure probability with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureRateEstimate {
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub failures: u64,
    pub trials: u64,
}

impl FailureRateEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let (lo, hi) = wilson_interval(failures, trials, 1.96);
        FailureRateEstimate {
            p: if trials == 0 { 0.0 } else { failures as f64 / trials as f64 },
            ci_low: lo,
            ci_high: hi,
            failures,
            trials,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        (self.ci_low..=self.ci_high).contains(&p)
    }
}

/// Per-step logical error rate extracted from a flip curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalRateEstimate {
    pub eps_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub tau: u32,
    pub n_traj: u64,
    /// True when no flip was observed and only the upper bound is
    /// meaningful.
    pub censored: bool,
}

/// Fit `ln(1 - 2 P_L(t)) = t ln(1 - eps_l)` by weighted least squares
/// through the origin over `t >= fit_floor` (falling back to earlier steps
/// if the tail is saturated). Zero-flip curves yield a one-sided bound.
pub fn estimate_logical_rate(acc: &PointAccumulator, fit_floor: u32) -> LogicalRateEstimate {
    let n = acc.trials;
    let tau = acc.tau;
    if n == 0 || acc.flips_at.iter().all(|&k| k == 0) {
        // Rule-of-three style one-sided 95% bound on the per-step rate.
        let bound = if n == 0 { 1.0 } else { 3.6889 / (n as f64 * tau as f64) };
        return LogicalRateEstimate {
            eps_l: 0.0,
            ci_low: 0.0,
            ci_high: bound.min(1.0),
            tau,
            n_traj: n,
            censored: true,
        };
    }

    let usable = |t: u32| -> Option<(f64, f64, f64)> {
        let k = acc.flips_at[t as usize];
        let p = k as f64 / n as f64;
        if p >= 0.5 {
            return None;
        }
        let y = libm::log(1.0 - 2.0 * p);
        // Continuity-corrected variance so k = 0 and k = n stay finite.
        let pc = (k as f64 + 0.5) / (n as f64 + 1.0);
        let var_p = pc * (1.0 - pc) / n as f64;
        let var_y = 4.0 * var_p / ((1.0 - 2.0 * p) * (1.0 - 2.0 * p));
        Some((t as f64, y, 1.0 / var_y))
    };

    let mut pts: Vec<(f64, f64, f64)> = (fit_floor.max(1)..=tau).filter_map(usable).collect();
    if pts.len() < 2 {
        // Saturated tail: use whatever early window is informative.
        pts = (1..=tau).filter_map(usable).collect();
    }
    if pts.is_empty() {
        // Every step saturated; the rate is of order one per step.
        return LogicalRateEstimate {
            eps_l: 1.0,
            ci_low: 0.0,
            ci_high: 1.0,
            tau,
            n_traj: n,
            censored: false,
        };
    }

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y, w) in &pts {
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let slope = sxy / sxx;
    let sigma = libm::sqrt(1.0 / sxx);
    let eps = 1.0 - libm::exp(slope);
    let hi = 1.0 - libm::exp(slope - 1.96 * sigma);
    let lo = 1.0 - libm::exp(slope + 1.96 * sigma);
    LogicalRateEstimate {
        eps_l: eps.clamp(0.0, 1.0),
        ci_low: lo.clamp(0.0, 1.0),
        ci_high: hi.clamp(0.0, 1.0),
        tau,
        n_traj: n,
        censored: false,
    }
}

/// Smallest sampled `t0` such that the normalized flip probability
/// `P_L(t)/t` exceeds half its asymptote for every sampled `t >= t0`; 0
/// when the whole curve sits at the asymptote, `None` (right-censored) when
/// the condition still fails at the end of the scan.
///
/// Under the closed form `P_L(t) = [1 - (1 - eps_l)^t]/2` the normalized
/// curve plateaus at `eps_l/2`, so half of it is `eps_l/4`. The scan stops
/// at `t ~ 1.5/eps_l`: beyond that the flip probability saturates toward
/// 1/2 and `P_L(t)/t` decays as `1/t` for every decoder, which says nothing
/// about the transient this time measures.
pub fn convergence_time(acc: &PointAccumulator, eps_l: f64) -> Option<u32> {
    let threshold = eps_l / 4.0;
    let horizon = if eps_l > 0.0 {
        acc.tau.min((1.5 / eps_l).max(10.0) as u32)
    } else {
        acc.tau
    };
    let mut last_fail = 0u32;
    for t in 1..=horizon {
        if acc.p_at(t) / t as f64 <= threshold {
            last_fail = t;
        }
    }
    if last_fail == horizon {
        None
    } else {
        Some(last_fail)
    }
}

/// One row of the stack-survival table `S_M(m) = P(max stack >= m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub m: u32,
    pub survival: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub count: u64,
}

pub fn stack_survival(acc: &PointAccumulator) -> Vec<SurvivalPoint> {
    let n = acc.trials;
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let max_m = acc.stack_hist.len();
    let mut tail = 0u64;
    let mut rows: Vec<(u32, u64)> = Vec::new();
    for m in (0..max_m).rev() {
        tail += acc.stack_hist[m];
        rows.push((m as u32, tail));
    }
    rows.reverse();
    for (m, count) in rows {
        let (lo, hi) = wilson_interval(count, n, 1.96);
        out.push(SurvivalPoint { m, survival: count as f64 / n as f64, ci_low: lo, ci_high: hi, count });
    }
    out
}
