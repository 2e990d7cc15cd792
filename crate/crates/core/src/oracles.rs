//! Proof-derived runtime checkers and independent brute-force oracles:
//! charge conservation facts, the interaction frontier, linear-erasure
//! certificates, the hierarchical chunk decomposition with its threshold
//! bound, and exact small-system logical-error enumeration.
//!
//! These exist to catch rule bugs: every check below is a proven property
//! of the asymmetric rule in the code-capacity model, so any violation is
//! an implementation defect, not noise.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::lattice::{DecoderState, DefectSet, EdgeBits, Topology};
use crate::montecarlo::run_code_capacity_error;
use crate::noise::PhenomenologicalParams;
use crate::signal::{SignalRuleParams, Trace};
use crate::RuleError;

// ---------------------------------------------------------------------------
// Charge facts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeFact {
    /// The total charge must vanish.
    TotalZero,
    /// Every prefix charge must be nonpositive.
    PrefixDeficit,
    /// The charge strictly left of any defect must vanish.
    DefectPrefixZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeViolation {
    pub fact: ChargeFact,
    pub t: u32,
    pub site: i64,
    pub observed: i64,
}

/// Scan one single-direction state for charge-fact violations.
fn charge_violations_at(state: &DecoderState, t: u32, out: &mut Vec<ChargeViolation>) {
    let d = state.direction(0);
    let hi = match state.support_bounds() {
        Some((_, hi)) => hi,
        None => return,
    };
    let defects = d.defect_plane();
    let mut prefix: i64 = 0;
    for i in 0..=hi {
        if defects.get(i) && prefix != 0 {
            out.push(ChargeViolation {
                fact: ChargeFact::DefectPrefixZero,
                t,
                site: state.topology().global(i),
                observed: prefix,
            });
        }
        prefix += d.site_charge(i);
        if prefix > 0 {
            out.push(ChargeViolation {
                fact: ChargeFact::PrefixDeficit,
                t,
                site: state.topology().global(i) + 1,
                observed: prefix,
            });
        }
    }
    if prefix != 0 {
        out.push(ChargeViolation { fact: ChargeFact::TotalZero, t, site: 0, observed: prefix });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeReport {
    pub steps: u32,
    pub violations: Vec<ChargeViolation>,
}

impl ChargeReport {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the charge facts at every recorded step of a dense code-capacity
/// trace.
pub fn check_charge_facts(trace: &Trace) -> Result<ChargeReport, RuleError> {
    if !trace.is_dense() {
        return Err(RuleError::InvalidParam("charge checks need a dense trace"));
    }
    let mut violations = Vec::new();
    for (t, state) in trace.states.iter().enumerate() {
        charge_violations_at(state, t as u32, &mut violations);
    }
    Ok(ChargeReport { steps: trace.states.len() as u32, violations })
}

// ---------------------------------------------------------------------------
// Interaction frontier
// ---------------------------------------------------------------------------

/// The non-decreasing space-time marker left of which defect pairs
/// recombine independently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierTrace {
    /// `positions[t]` is the frontier after `t` iterations, starting at the
    /// leftmost initial defect.
    pub positions: Vec<i64>,
    /// First `t` with no defects right of the frontier in the next state.
    pub terminated_at: Option<u32>,
}

/// Compute the next frontier position, or `None` once no defect remains to
/// its right.
fn frontier_step(phi: i64, prev: &DecoderState, next: &DecoderState) -> Option<i64> {
    let top = *next.topology();
    let next_def = next.direction(0).defect_plane();
    let next_fwd = next.direction(0).forward_plane();
    let after = top.internal(phi + 1).map_or(next_def.len(), |i| i);
    let defect_right = next_def.first_one_from(after).is_some();
    if !defect_right {
        return None;
    }
    let a = top
        .internal(phi + 1)
        .map(|i| next_def.get(i) || next_fwd.get(i))
        .unwrap_or(false);
    if a {
        return Some(phi + 1);
    }
    let prev_def = prev.direction(0).defect_plane();
    let cut = top.internal(phi).map_or(0, |i| i + 1);
    let left_count = (0..cut).filter(|&i| prev_def.get(i)).count();
    if left_count % 2 == 1 {
        return Some(phi);
    }
    // Jump to the nearest defect or forward signal right of the frontier.
    let jd = next_def.first_one_from(after);
    let jf = next_fwd.first_one_from(after);
    let j = match (jd, jf) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => unreachable!("guarded by defect_right"),
    };
    Some(top.global(j))
}

/// Track the interaction frontier across a dense code-capacity window trace.
pub fn track_frontier(trace: &Trace) -> Result<FrontierTrace, RuleError> {
    if !trace.is_dense() {
        return Err(RuleError::InvalidParam("frontier tracking needs a dense trace"));
    }
    if trace.states.is_empty() {
        return Err(RuleError::InvalidParam("empty trace"));
    }
    if trace.states[0].topology().is_ring() {
        return Err(RuleError::InvalidParam("frontier tracking is defined on window lattices"));
    }
    let sigma = trace.states[0].defects(0);
    let mut phi = sigma.min().ok_or(RuleError::InvalidParam("trace starts without defects"))?;
    let mut positions = vec![phi];
    let mut terminated_at = None;
    for (t, pair) in trace.states.windows(2).enumerate() {
        match frontier_step(phi, &pair[0], &pair[1]) {
            Some(next) => {
                phi = next;
                positions.push(phi);
            }
            None => {
                terminated_at = Some(t as u32);
                break;
            }
        }
    }
    Ok(FrontierTrace { positions, terminated_at })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionViolation {
    pub t: u32,
    pub site: i64,
    pub rule: &'static str,
}

/// Independent-matching region checks left of the frontier: between an odd
/// and the next even defect only forward signals and no negative charges;
/// between an even and the next odd defect no forward signals, and at least
/// two sites of separation.
fn region_violations_at(
    state: &DecoderState,
    phi: i64,
    t: u32,
    out: &mut Vec<RegionViolation>,
) {
    let top = *state.topology();
    let d = state.direction(0);
    let defects = state.defects(0);
    let sites = defects.sites();
    let negative =
        |i: usize| -> bool { d.anti_plane().get(i) || d.stack_mask().get(i) };
    for (idx, pair) in sites.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let odd_first = idx % 2 == 0; // 1-based odd defect opens the interval
        for s in (a + 1)..b {
            if odd_first {
                if s > phi {
                    continue;
                }
                let i = match top.internal(s) {
                    Some(i) => i,
                    None => continue,
                };
                if !d.forward_plane().get(i) {
                    out.push(RegionViolation { t, site: s, rule: "odd-even interval missing forward signal" });
                }
                if negative(i) {
                    out.push(RegionViolation { t, site: s, rule: "odd-even interval holds negative charge" });
                }
            } else {
                if s >= phi {
                    continue;
                }
                let i = match top.internal(s) {
                    Some(i) => i,
                    None => continue,
                };
                if d.forward_plane().get(i) {
                    out.push(RegionViolation { t, site: s, rule: "even-odd interval holds forward signal" });
                }
            }
        }
        if !odd_first && b <= phi && b - a < 2 {
            out.push(RegionViolation { t, site: b, rule: "even-odd defects closer than 2" });
        }
    }
}

// ---------------------------------------------------------------------------
// Erasure certificate
// ---------------------------------------------------------------------------

/// Outcome of a linear-erasure run: defects confined to the initial span,
/// support confined to 78 widths, everything gone within 77 widths of time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub pass: bool,
    pub sigma_confined: bool,
    pub support_bounded: bool,
    pub t_zero: Option<u32>,
    pub max_support_right: i64,
    pub width: i64,
}

/// Which streaming checks to run alongside a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErasureChecks {
    pub charge: bool,
    pub frontier: bool,
    /// Independent-matching region checks left of the frontier. These are
    /// the single-cluster structure statements; stray signals surviving a
    /// finished cluster can legitimately enter a later pair's interval, so
    /// the checks are only meaningful on single-pair defect sets.
    pub regions: bool,
    pub cleanup: bool,
}

impl ErasureChecks {
    pub fn all() -> Self {
        ErasureChecks { charge: true, frontier: true, regions: true, cleanup: true }
    }

    /// Everything that holds for arbitrary defect sets.
    pub fn multi_cluster() -> Self {
        ErasureChecks { charge: true, frontier: true, regions: false, cleanup: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleRun {
    pub certificate: Certificate,
    pub charge_violations: Vec<ChargeViolation>,
    pub region_violations: Vec<RegionViolation>,
    pub frontier: Option<FrontierTrace>,
    pub frontier_monotone: bool,
    /// Lemma on coarse frontier speed: at least one site per 11 iterations
    /// between frontier-on-defect events.
    pub frontier_speed_ok: bool,
    /// Excitation cleanup after defect clearance stayed within 6 widths and
    /// finished within 5 widths of time.
    pub cleanup_ok: bool,
}

impl OracleRun {
    pub fn clean(&self) -> bool {
        self.certificate.pass
            && self.charge_violations.is_empty()
            && self.region_violations.is_empty()
            && self.frontier_monotone
            && self.frontier_speed_ok
            && self.cleanup_ok
    }
}

/// Run the asymmetric rule on an isolated defect set in a window lattice
/// and verify the linear-erasure guarantees, optionally with the charge and
/// frontier checkers streaming over every step.
pub fn erasure_run(
    sigma: &DefectSet,
    params: &SignalRuleParams,
    checks: &ErasureChecks,
) -> Result<OracleRun, RuleError> {
    if params.symmetric {
        return Err(RuleError::InvalidParam("erasure certificates run the asymmetric rule"));
    }
    params.validate()?;
    let mut state = DecoderState::erasure_window(sigma, 1)?;
    let sigma_min = sigma.min().unwrap();
    let width = sigma.width().max(1);
    let budget = 77 * width as u32;
    let sigma_hi = sigma_min + width;
    let support_hi = sigma_min + 78 * width;

    let mut sigma_confined = true;
    let mut support_bounded = true;
    let mut max_support_right = state.support_global().map_or(sigma_min, |(_, b)| b);
    let mut t_zero = None;

    let mut charge_violations = Vec::new();
    if checks.charge {
        charge_violations_at(&state, 0, &mut charge_violations);
    }

    let mut region_violations = Vec::new();
    let mut phi = sigma_min;
    let mut frontier_positions = vec![phi];
    let mut frontier_terminated = None;
    let mut frontier_monotone = true;
    // (t, phi) pairs at which the frontier sat on a defect.
    let mut frontier_events: Vec<(u32, i64)> = vec![(0, phi)];

    // Cleanup bookkeeping: once defects are gone, excitations must die out.
    let mut cleanup_origin: Option<(u32, i64, i64)> = None; // (t_r, z, delta)
    let mut cleanup_ok = true;

    if checks.frontier && checks.regions {
        region_violations_at(&state, phi, 0, &mut region_violations);
    }

    let mut prev_defect_plane = state.direction(0).defect_plane().clone();
    let mut t = 0u32;
    while t < budget {
        let prev_for_frontier = if checks.frontier && frontier_terminated.is_none() {
            Some(prev_defect_plane.clone())
        } else {
            None
        };
        let mask = state.step(params, None)?;
        state.apply_correction(&mask);
        t += 1;

        let defects = state.defects(0);
        if let (Some(a), Some(b)) = (defects.min(), defects.max()) {
            if a < sigma_min || b > sigma_hi {
                sigma_confined = false;
            }
        }
        let support = state.support_global();
        if let Some((a, b)) = support {
            max_support_right = max_support_right.max(b);
            if a < sigma_min || b > support_hi {
                support_bounded = false;
            }
        }

        if checks.charge {
            charge_violations_at(&state, t, &mut charge_violations);
        }

        if let Some(prev_plane) = prev_for_frontier {
            // Rebuild a thin previous-state view for parity counting.
            let next = &state;
            let top = *next.topology();
            let after = top.internal(phi + 1).map_or(usize::MAX, |i| i);
            let next_def = next.direction(0).defect_plane();
            let next_fwd = next.direction(0).forward_plane();
            if next_def.first_one_from(after).is_none() {
                frontier_terminated = Some(t - 1);
            } else {
                let a_cond = top
                    .internal(phi + 1)
                    .map(|i| next_def.get(i) || next_fwd.get(i))
                    .unwrap_or(false);
                let next_phi = if a_cond {
                    phi + 1
                } else {
                    let cut = top.internal(phi).map_or(0, |i| i + 1);
                    let left = (0..cut).filter(|&i| prev_plane.get(i)).count();
                    if left % 2 == 1 {
                        phi
                    } else {
                        let jd = next_def.first_one_from(after);
                        let jf = next_fwd.first_one_from(after);
                        let j = match (jd, jf) {
                            (Some(x), Some(y)) => x.min(y),
                            (Some(x), None) => x,
                            (None, Some(y)) => y,
                            (None, None) => unreachable!(),
                        };
                        top.global(j)
                    }
                };
                if next_phi < phi {
                    frontier_monotone = false;
                }
                phi = next_phi;
                frontier_positions.push(phi);
                if top.internal(phi).map(|i| next_def.get(i)).unwrap_or(false) {
                    frontier_events.push((t, phi));
                }
                if checks.regions {
                    region_violations_at(&state, phi, t, &mut region_violations);
                }
            }
        }
        prev_defect_plane = state.direction(0).defect_plane().clone();

        if checks.cleanup && cleanup_origin.is_none() && defects.is_empty() {
            if let Some((a, b)) = support {
                cleanup_origin = Some((t, a, b - a));
            }
        }
        if let Some((t_r, z, delta)) = cleanup_origin {
            if let Some((a, b)) = support {
                if a < z || b > z + 6 * delta {
                    cleanup_ok = false;
                }
                if t > t_r + (5 * delta).max(0) as u32 {
                    cleanup_ok = false;
                }
            }
        }

        if state.is_quiescent() {
            t_zero = Some(t);
            break;
        }
    }

    let mut frontier_speed_ok = true;
    for w in frontier_events.windows(2) {
        let (t1, p1) = w[0];
        let (t2, p2) = w[1];
        if 11 * (p2 - p1) < (t2 - t1) as i64 {
            frontier_speed_ok = false;
        }
    }

    let certificate = Certificate {
        pass: sigma_confined && support_bounded && t_zero.is_some(),
        sigma_confined,
        support_bounded,
        t_zero,
        max_support_right,
        width,
    };
    Ok(OracleRun {
        certificate,
        charge_violations,
        region_violations,
        frontier: checks.frontier.then_some(FrontierTrace {
            positions: frontier_positions,
            terminated_at: frontier_terminated,
        }),
        frontier_monotone,
        frontier_speed_ok,
        cleanup_ok,
    })
}

/// Certificate-only wrapper.
pub fn erasure_certificate(
    sigma: &DefectSet,
    params: &SignalRuleParams,
) -> Result<Certificate, RuleError> {
    erasure_run(sigma, params, &ErasureChecks::default()).map(|r| r.certificate)
}

// ---------------------------------------------------------------------------
// Hierarchical chunk decomposition
// ---------------------------------------------------------------------------

/// Hierarchical grouping of error positions into chunks of doubling weight
/// and geometrically growing diameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkDecomposition {
    pub scale: u32,
    /// `levels[k]` = positions surviving to level `k` (`E_k`); `levels[0]`
    /// is the full error.
    pub levels: Vec<Vec<i64>>,
    /// `fragments[k]` = `E_k \ E_{k+1}`; the fragments partition the error.
    pub fragments: Vec<Vec<i64>>,
    /// Connected components of each fragment at its level's interaction
    /// range.
    pub components: Vec<Vec<Vec<i64>>>,
    /// Index of the deepest nonempty level.
    pub max_level: usize,
}

fn diam(sites: &[i64]) -> i64 {
    match (sites.first(), sites.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0,
    }
}

fn set_distance(a: &[i64], b: &[i64]) -> i64 {
    // Both sorted and small; brute force is fine.
    let mut best = i64::MAX;
    for &x in a {
        for &y in b {
            best = best.min((x - y).abs());
        }
    }
    best
}

fn disjoint_sorted(a: &[i64], b: &[i64]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => return false,
        }
    }
    true
}

fn merge_sorted(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out
}

/// Split sorted positions into maximal runs whose consecutive gaps are at
/// most `range`.
fn connected_components(sites: &[i64], range: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur: Vec<i64> = Vec::new();
    for &s in sites {
        if let Some(&last) = cur.last() {
            if s - last > range {
                out.push(core::mem::take(&mut cur));
            }
        }
        cur.push(s);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

const CHUNK_GUARD: usize = 200_000;

/// Build the chunk hierarchy of an error set at the given scale. A level-k
/// chunk is a disjoint union of two level-(k-1) chunks of joint diameter at
/// most `scale^k / 2`; `E_k` is the union of all level-k chunks. The proven
/// component bounds are validated on construction and any violation is an
/// error.
pub fn chunk_decomposition(error: &EdgeBits, scale: u32) -> Result<ChunkDecomposition, RuleError> {
    if scale < 6 {
        return Err(RuleError::InvalidParam("chunk scale must be at least 6"));
    }
    let positions: Vec<i64> = error.plane().iter_ones().map(|i| i as i64).collect();
    chunk_decomposition_of_positions(&positions, scale)
}

/// Same construction over explicit positions.
pub fn chunk_decomposition_of_positions(
    positions: &[i64],
    scale: u32,
) -> Result<ChunkDecomposition, RuleError> {
    if scale < 6 {
        return Err(RuleError::InvalidParam("chunk scale must be at least 6"));
    }
    let mut sorted: Vec<i64> = positions.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let mut levels: Vec<Vec<i64>> = vec![sorted.clone()];
    // Current level's chunk list, deduplicated by support.
    let mut chunks: Vec<Vec<i64>> = sorted.iter().map(|&p| vec![p]).collect();
    let mut pow: i128 = 1; // scale^k for the level being built
    while !chunks.is_empty() {
        pow = pow.saturating_mul(scale as i128);
        let mut next: Vec<Vec<i64>> = Vec::new();
        for i in 0..chunks.len() {
            for j in (i + 1)..chunks.len() {
                let (a, b) = (&chunks[i], &chunks[j]);
                if !disjoint_sorted(a, b) {
                    continue;
                }
                let merged = merge_sorted(a, b);
                if 2 * diam(&merged) as i128 <= pow {
                    next.push(merged);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        if next.len() > CHUNK_GUARD {
            return Err(RuleError::SizeGuard("chunk hierarchy too large"));
        }
        if next.is_empty() {
            break;
        }
        let mut union: Vec<i64> = next.iter().flatten().copied().collect();
        union.sort_unstable();
        union.dedup();
        levels.push(union);
        chunks = next;
    }

    let m = levels.len() - 1;
    let mut fragments: Vec<Vec<i64>> = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let upper = levels.get(k + 1).map(|v| v.as_slice()).unwrap_or(&[]);
        let frag: Vec<i64> =
            levels[k].iter().copied().filter(|p| upper.binary_search(p).is_err()).collect();
        fragments.push(frag);
    }

    // Component bounds: the level-k fragment splits into scale^k-connected
    // components of diameter at most scale^k, each further than
    // scale^(k+1) / 3 from the rest of the level-k error.
    let mut components = Vec::with_capacity(m + 1);
    let mut range: i128 = 1; // scale^k
    for k in 0..=m {
        let comps = connected_components(&fragments[k], range.min(i64::MAX as i128) as i64);
        for comp in &comps {
            if diam(comp) as i128 > range {
                return Err(RuleError::ChunkInvariant("component diameter above its level bound"));
            }
            let rest: Vec<i64> = levels[k]
                .iter()
                .copied()
                .filter(|p| comp.binary_search(p).is_err())
                .collect();
            if !rest.is_empty() {
                let d = set_distance(comp, &rest) as i128;
                if 3 * d <= range.saturating_mul(scale as i128) {
                    return Err(RuleError::ChunkInvariant(
                        "component too close to the rest of its level",
                    ));
                }
            }
        }
        components.push(comps);
        range = range.saturating_mul(scale as i128);
    }

    Ok(ChunkDecomposition { scale, levels, fragments, components, max_level: m })
}

// ---------------------------------------------------------------------------
// Threshold bound
// ---------------------------------------------------------------------------

/// Proven code-capacity threshold: below `1/scale` the bound is nontrivial.
pub fn threshold_lower_bound(scale: u32) -> f64 {
    1.0 / scale as f64
}

/// Exponent of the proven logical-error suppression `exp(-n^alpha)`.
pub fn suppression_exponent(scale: u32) -> f64 {
    libm::log(2.0) / libm::log(scale as f64)
}

/// Depth of the hierarchy: largest `M` with `scale^M <= n`.
pub fn hierarchy_depth(n: usize, scale: u32) -> u32 {
    let mut m = 0u32;
    let mut p: u128 = 1;
    loop {
        p = p.saturating_mul(scale as u128);
        if p <= n as u128 {
            m += 1;
        } else {
            return m;
        }
    }
}

/// Closed-form code-capacity bound
/// `eps_L <= n * scale^-(M+1) * (scale * eps)^(2^M)`.
pub fn threshold_bound(n: usize, eps: f64, scale: u32) -> Result<f64, RuleError> {
    if scale < 232 {
        return Err(RuleError::InvalidParam("bound requires scale at least 232"));
    }
    if eps >= threshold_lower_bound(scale) {
        return Err(RuleError::Degenerate("error rate at or above 1/scale: bound vacuous"));
    }
    let m = hierarchy_depth(n, scale);
    let l = scale as f64;
    let bound = n as f64 * libm::pow(l, -((m + 1) as f64)) * libm::pow(l * eps, libm::pow(2.0, m as f64));
    Ok(bound)
}

// ---------------------------------------------------------------------------
// Exhaustive small-system oracles
// ---------------------------------------------------------------------------

/// Exact code-capacity statistics by enumeration of all `2^n` error
/// patterns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeCapacityEnumeration {
    pub p_fail: f64,
    pub failing_patterns: u64,
    pub total_patterns: u64,
    pub min_failing_weight: Option<u32>,
    pub max_stack: u16,
}

pub fn enumerate_code_capacity(
    params: &SignalRuleParams,
    n: usize,
    eps: f64,
    tau: u32,
) -> Result<CodeCapacityEnumeration, RuleError> {
    if n > 16 {
        return Err(RuleError::SizeGuard("code-capacity enumeration is limited to n <= 16"));
    }
    let mut p_fail = 0.0;
    let mut failing = 0u64;
    let mut min_weight: Option<u32> = None;
    let mut max_stack = 0u16;
    for pattern in 0u64..(1u64 << n) {
        let mut error = EdgeBits::zeros(n);
        for b in 0..n {
            if pattern >> b & 1 == 1 {
                error.set(b, true);
            }
        }
        let w = error.weight() as u32;
        let out = run_code_capacity_error(params, &error, tau)?;
        max_stack = max_stack.max(out.max_stack);
        if out.failed {
            failing += 1;
            min_weight = Some(min_weight.map_or(w, |m| m.min(w)));
            p_fail += libm::pow(eps, w as f64) * libm::pow(1.0 - eps, (n as u32 - w) as f64);
        }
    }
    Ok(CodeCapacityEnumeration {
        p_fail,
        failing_patterns: failing,
        total_patterns: 1 << n,
        min_failing_weight: min_weight,
        max_stack,
    })
}

/// Exact phenomenological logical-flip probability by summation over every
/// noise realization of every step. Sizes are tightly guarded: the sum has
/// `4^(n tau)` terms.
pub fn exact_phenomenological_flip(
    params: &SignalRuleParams,
    n: usize,
    noise: &PhenomenologicalParams,
    tau: u32,
) -> Result<f64, RuleError> {
    if n as u64 * tau as u64 > 12 {
        return Err(RuleError::SizeGuard("phenomenological enumeration is limited to n*tau <= 12"));
    }
    let top = Topology::Ring { n };
    let state = params.state(top);
    fn go(
        state: &DecoderState,
        params: &SignalRuleParams,
        noise: &PhenomenologicalParams,
        n: usize,
        steps_left: u32,
        p_acc: f64,
        total: &mut f64,
    ) -> Result<(), RuleError> {
        if steps_left == 0 {
            if crate::lattice::logical_state_plane(state.data()) {
                *total += p_acc;
            }
            return Ok(());
        }
        let top = *state.topology();
        for data_mask in 0u64..(1 << n) {
            let wd = data_mask.count_ones();
            let pd = libm::pow(noise.eps_d, wd as f64)
                * libm::pow(1.0 - noise.eps_d, (n as u32 - wd) as f64);
            if pd == 0.0 {
                continue;
            }
            for synd_mask in 0u64..(1 << n) {
                let wm = synd_mask.count_ones();
                let pm = libm::pow(noise.eps_m, wm as f64)
                    * libm::pow(1.0 - noise.eps_m, (n as u32 - wm) as f64);
                if pm == 0.0 {
                    continue;
                }
                let mut s = state.clone();
                for b in 0..n {
                    if data_mask >> b & 1 == 1 {
                        s.data_mut().flip(b);
                    }
                }
                let mut synd = crate::lattice::boundary_plane(s.data(), &top);
                for b in 0..n {
                    if synd_mask >> b & 1 == 1 {
                        synd.flip(b);
                    }
                }
                let mask = s.step(params, Some(&synd))?;
                s.apply_correction(&mask);
                go(&s, params, noise, n, steps_left - 1, p_acc * pd * pm, total)?;
            }
        }
        Ok(())
    }
    let mut total = 0.0;
    go(&state, params, noise, n, tau, 1.0, &mut total)?;
    Ok(total)
}

// ---------------------------------------------------------------------------
// Random defect sets for campaigns
// ---------------------------------------------------------------------------

/// Sample an even defect set with at most `max_pairs` pairs inside a span of
/// `max_width` sites.
pub fn random_defect_set(
    max_pairs: u32,
    max_width: i64,
    rng: &mut impl rand_chacha::rand_core::RngCore,
) -> DefectSet {
    let pairs = 1 + (rng.next_u32() % max_pairs);
    let want = (2 * pairs) as usize;
    let span = max_width + 1;
    let mut sites: Vec<i64> = Vec::with_capacity(want);
    while sites.len() < want {
        let s = (rng.next_u64() % span as u64) as i64;
        if !sites.contains(&s) {
            sites.push(s);
        }
        // A span too small to host the requested pairs cannot stall: the
        // span always has at least 2 sites and we cap the request below.
        if sites.len() == span as usize {
            break;
        }
    }
    if sites.len() % 2 == 1 {
        sites.pop();
    }
    DefectSet::new(sites)
}
