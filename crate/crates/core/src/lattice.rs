//! Core data model: bit-packed site/edge planes on ring and windowed-line
//! lattices, decoder registers, and charge accounting.
//!
//! Sites are indexed left to right. Every per-site binary register is stored
//! as one machine-word-packed plane so that a synchronous automaton substep
//! is a constant number of word-wide shift/mask operations. Stacks are the
//! exception: one small unsigned integer per site, with a hard bound at `2n`
//! and a configurable soft cap.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::RuleError;

const WORD_BITS: usize = 64;

/// Dense bit vector over lattice sites (or edges), value `bit i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitPlane {
    words: Vec<u64>,
    len: usize,
}

impl BitPlane {
    pub fn zeros(len: usize) -> Self {
        BitPlane { words: vec![0; len.div_ceil(WORD_BITS)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty_plane(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn normalize(&mut self) {
        if let Some(last) = self.words.last_mut() {
            let m = if self.len % WORD_BITS == 0 { u64::MAX } else { (1u64 << (self.len % WORD_BITS)) - 1 };
            *last &= m;
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn last_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(wi * WORD_BITS + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    /// First set bit at index `from` or later.
    pub fn first_one_from(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let wi0 = from / WORD_BITS;
        let mut w = self.words[wi0] & (u64::MAX << (from % WORD_BITS));
        let mut wi = wi0;
        loop {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
            wi += 1;
            if wi >= self.words.len() {
                return None;
            }
            w = self.words[wi];
        }
    }

    pub fn and_assign(&mut self, other: &BitPlane) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitPlane) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn xor_assign(&mut self, other: &BitPlane) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// `self &= !other`
    pub fn andnot_assign(&mut self, other: &BitPlane) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn and(&self, other: &BitPlane) -> BitPlane {
        let mut out = self.clone();
        out.and_assign(other);
        out
    }

    pub fn or(&self, other: &BitPlane) -> BitPlane {
        let mut out = self.clone();
        out.or_assign(other);
        out
    }

    pub fn andnot(&self, other: &BitPlane) -> BitPlane {
        let mut out = self.clone();
        out.andnot_assign(other);
        out
    }

    pub fn not(&self) -> BitPlane {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        out.normalize();
        out
    }

    pub fn complement(&self) -> BitPlane {
        self.not()
    }

    /// Shift every bit one site toward higher indices; bit `len-1` wraps to 0.
    pub fn shift_high_wrap(&self) -> BitPlane {
        let top = self.len > 0 && self.get(self.len - 1);
        let mut out = self.shift_high_zero().0;
        if top {
            out.set(0, true);
        }
        out
    }

    /// Shift toward higher indices with zero fill; second value reports
    /// whether a set bit fell off the high end.
    pub fn shift_high_zero(&self) -> (BitPlane, bool) {
        let mut out = BitPlane::zeros(self.len);
        let mut carry = 0u64;
        for (i, &w) in self.words.iter().enumerate() {
            out.words[i] = (w << 1) | carry;
            carry = w >> 63;
        }
        let lost = self.len > 0 && self.get(self.len - 1);
        out.normalize();
        (out, lost)
    }

    /// Shift every bit one site toward lower indices; bit 0 wraps to `len-1`.
    pub fn shift_low_wrap(&self) -> BitPlane {
        let bottom = self.len > 0 && self.get(0);
        let mut out = self.shift_low_zero().0;
        if bottom {
            out.set(self.len - 1, true);
        }
        out
    }

    /// Shift toward lower indices with zero fill; second value reports
    /// whether a set bit fell off the low end.
    pub fn shift_low_zero(&self) -> (BitPlane, bool) {
        let mut out = BitPlane::zeros(self.len);
        let mut carry = 0u64;
        for (i, &w) in self.words.iter().enumerate().rev() {
            out.words[i] = (w >> 1) | carry;
            carry = w << 63;
        }
        let lost = self.len > 0 && self.get(0);
        (out, lost)
    }
}

/// Lattice layout: a periodic ring of `n` sites, or a finite window of a
/// line lattice covering global sites `lo ..= lo + len - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Ring { n: usize },
    Window { lo: i64, len: usize },
}

impl Topology {
    pub fn sites(&self) -> usize {
        match *self {
            Topology::Ring { n } => n,
            Topology::Window { len, .. } => len,
        }
    }

    /// Number of data edges: `n` on a ring, `len - 1` on a window.
    pub fn edges(&self) -> usize {
        match *self {
            Topology::Ring { n } => n,
            Topology::Window { len, .. } => len - 1,
        }
    }

    pub fn is_ring(&self) -> bool {
        matches!(self, Topology::Ring { .. })
    }

    /// Global coordinate of internal site index `i`.
    pub fn global(&self, i: usize) -> i64 {
        match *self {
            Topology::Ring { .. } => i as i64,
            Topology::Window { lo, .. } => lo + i as i64,
        }
    }

    /// Internal index of a global site coordinate, if inside the lattice.
    pub fn internal(&self, site: i64) -> Option<usize> {
        match *self {
            Topology::Ring { n } => {
                let m = site.rem_euclid(n as i64) as usize;
                Some(m)
            }
            Topology::Window { lo, len } => {
                let off = site - lo;
                (0..len as i64).contains(&off).then_some(off as usize)
            }
        }
    }
}

/// One lattice direction for plane shifts: `High` moves content toward larger
/// site indices (the rightward direction of the first signal rule).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    High,
    Low,
}

impl Dir {
    pub fn opposite(self) -> Dir {
        match self {
            Dir::High => Dir::Low,
            Dir::Low => Dir::High,
        }
    }
}

/// Move a plane one site toward `dir`. On a window, letting a set bit fall
/// off either end is a hard error: it means the run escaped its support
/// guarantee.
pub fn move_plane(p: &BitPlane, dir: Dir, topology: &Topology, t: u64) -> Result<BitPlane, RuleError> {
    match (topology, dir) {
        (Topology::Ring { .. }, Dir::High) => Ok(p.shift_high_wrap()),
        (Topology::Ring { .. }, Dir::Low) => Ok(p.shift_low_wrap()),
        (Topology::Window { .. }, Dir::High) => {
            let (out, lost) = p.shift_high_zero();
            if lost { Err(RuleError::WindowEscape { t }) } else { Ok(out) }
        }
        (Topology::Window { .. }, Dir::Low) => {
            let (out, lost) = p.shift_low_zero();
            if lost { Err(RuleError::WindowEscape { t }) } else { Ok(out) }
        }
    }
}

/// Neighbor view: plane whose value at `i` is `p` at `i + 1` (`Dir::High`)
/// or `i - 1` (`Dir::Low`). Reading past a window edge yields 0.
pub fn view_plane(p: &BitPlane, dir: Dir, topology: &Topology) -> BitPlane {
    match (topology, dir) {
        (Topology::Ring { .. }, Dir::High) => p.shift_low_wrap(),
        (Topology::Ring { .. }, Dir::Low) => p.shift_high_wrap(),
        (Topology::Window { .. }, Dir::High) => p.shift_low_zero().0,
        (Topology::Window { .. }, Dir::Low) => p.shift_high_zero().0,
    }
}

/// Data-qubit error bits on the `n` edges of a ring; edge `i` joins vertices
/// `i` and `i + 1 (mod n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeBits {
    n: usize,
    bits: BitPlane,
}

impl EdgeBits {
    pub fn zeros(n: usize) -> Self {
        EdgeBits { n, bits: BitPlane::zeros(n) }
    }

    pub fn from_edges(n: usize, edges: &[usize]) -> Self {
        let mut e = EdgeBits::zeros(n);
        for &i in edges {
            e.bits.set(i % n, true);
        }
        e
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.bits.set(i, v);
    }

    pub fn flip(&mut self, i: usize) {
        self.bits.flip(i);
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn plane(&self) -> &BitPlane {
        &self.bits
    }

    pub fn plane_mut(&mut self) -> &mut BitPlane {
        &mut self.bits
    }

    /// The complementary error `Z_n \ E`; it has the same syndrome.
    pub fn complement(&self) -> EdgeBits {
        EdgeBits { n: self.n, bits: self.bits.complement() }
    }
}

/// Sorted set of syndrome vertices (defects), in global coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectSet {
    sites: Vec<i64>,
}

impl DefectSet {
    pub fn new(mut sites: Vec<i64>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        DefectSet { sites }
    }

    pub fn sites(&self) -> &[i64] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn min(&self) -> Option<i64> {
        self.sites.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.sites.last().copied()
    }

    /// `max - min`, the width of the defect pattern.
    pub fn width(&self) -> i64 {
        match (self.min(), self.max()) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }
}

/// Boundary of an error: vertex `i` is a defect iff its incident edges
/// `(i-1, i)` and `(i, i+1)` carry differing values.
pub fn defects_from_error(error: &EdgeBits) -> DefectSet {
    let plane = boundary_plane(error.plane(), &Topology::Ring { n: error.n() });
    DefectSet::new(plane.iter_ones().map(|i| i as i64).collect())
}

/// Syndrome plane of a data-edge plane under the given topology.
pub fn boundary_plane(data: &BitPlane, topology: &Topology) -> BitPlane {
    match topology {
        Topology::Ring { .. } => {
            // defect[i] = data[i-1] ^ data[i]
            let mut out = data.shift_high_wrap();
            out.xor_assign(data);
            out
        }
        Topology::Window { .. } => {
            // Edge e joins sites e and e+1; edges outside the window are 0.
            let mut out = data.shift_high_zero().0;
            out.xor_assign(data);
            out
        }
    }
}

/// One site's classical memory for one rule direction, as a plain value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRegisters {
    pub defect: bool,
    pub forward: bool,
    pub backward: bool,
    pub anti: bool,
    pub stack: u16,
}

/// Packed registers of one rule direction across the whole lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionRegisters {
    pub(crate) defect: BitPlane,
    pub(crate) forward: BitPlane,
    pub(crate) backward: BitPlane,
    pub(crate) anti: BitPlane,
    pub(crate) stack: Vec<u16>,
    /// Invariant: set exactly at sites with `stack > 0`.
    pub(crate) stack_mask: BitPlane,
}

impl DirectionRegisters {
    fn zeros(len: usize) -> Self {
        DirectionRegisters {
            defect: BitPlane::zeros(len),
            forward: BitPlane::zeros(len),
            backward: BitPlane::zeros(len),
            anti: BitPlane::zeros(len),
            stack: vec![0; len],
            stack_mask: BitPlane::zeros(len),
        }
    }

    pub fn defect_plane(&self) -> &BitPlane {
        &self.defect
    }

    pub fn forward_plane(&self) -> &BitPlane {
        &self.forward
    }

    pub fn backward_plane(&self) -> &BitPlane {
        &self.backward
    }

    pub fn anti_plane(&self) -> &BitPlane {
        &self.anti
    }

    pub fn stack(&self, i: usize) -> u16 {
        self.stack[i]
    }

    pub fn stack_mask(&self) -> &BitPlane {
        &self.stack_mask
    }

    pub fn is_quiescent(&self) -> bool {
        self.defect.is_empty_plane()
            && self.forward.is_empty_plane()
            && self.backward.is_empty_plane()
            && self.anti.is_empty_plane()
            && self.stack_mask.is_empty_plane()
    }

    /// Charge at one site: +1 per forward/backward signal, -1 per
    /// anti-signal and per stack unit. Defects are neutral.
    pub fn site_charge(&self, i: usize) -> i64 {
        self.forward.get(i) as i64 + self.backward.get(i) as i64
            - self.anti.get(i) as i64
            - self.stack[i] as i64
    }

    fn support_bounds(&self) -> Option<(usize, usize)> {
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        let mut any = false;
        for p in [&self.defect, &self.forward, &self.backward, &self.anti, &self.stack_mask] {
            if let (Some(a), Some(b)) = (p.first_one(), p.last_one()) {
                lo = lo.min(a);
                hi = hi.max(b);
                any = true;
            }
        }
        any.then_some((lo, hi))
    }
}

/// Full decoder configuration: data-qubit errors on edges, site registers on
/// vertices (one register set per rule direction), and an iteration counter.
///
/// This is a plain value: no interior sharing, safe to move across threads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderState {
    topology: Topology,
    data: BitPlane,
    dirs: Vec<DirectionRegisters>,
    t: u64,
    soft_cap: u16,
    max_stack_seen: u16,
}

pub const DEFAULT_STACK_SOFT_CAP: u16 = 255;

impl DecoderState {
    /// Fresh all-zero state with one register set (asymmetric rule).
    pub fn new_asymmetric(topology: Topology) -> Self {
        Self::new(topology, 1)
    }

    /// Fresh all-zero state with two register sets (symmetric rule).
    pub fn new_symmetric(topology: Topology) -> Self {
        Self::new(topology, 2)
    }

    fn new(topology: Topology, dirs: usize) -> Self {
        let len = topology.sites();
        DecoderState {
            topology,
            data: BitPlane::zeros(len),
            dirs: (0..dirs).map(|_| DirectionRegisters::zeros(len)).collect(),
            t: 0,
            soft_cap: DEFAULT_STACK_SOFT_CAP,
            max_stack_seen: 0,
        }
    }

    /// Ring state initialized from a data error; defect registers are loaded
    /// with the error's boundary.
    pub fn from_error(error: &EdgeBits, dirs: usize) -> Self {
        let topology = Topology::Ring { n: error.n() };
        let mut s = Self::new(topology, dirs);
        s.data = error.plane().clone();
        let synd = boundary_plane(&s.data, &topology);
        for d in &mut s.dirs {
            d.defect = synd.clone();
        }
        s
    }

    /// Window state initialized with the given defects and no data error,
    /// as in the erasure analysis. For the one-direction rule the window
    /// spans `[min - 2, min + 80 * width]`, comfortably containing the
    /// proven support bound `[min, min + 78 * width]`; two-direction states
    /// get the same margin on both sides.
    pub fn erasure_window(sigma: &DefectSet, dirs: usize) -> Result<Self, RuleError> {
        let min = sigma.min().ok_or(RuleError::InvalidParam("empty defect set"))?;
        if sigma.len() % 2 != 0 {
            return Err(RuleError::InvalidParam("defect set must have even cardinality"));
        }
        let width = sigma.width().max(1);
        let left = if dirs == 2 { 80 * width + 2 } else { 2 };
        let lo = min - left;
        let len = (left + 80 * width + 1) as usize;
        let topology = Topology::Window { lo, len };
        let mut s = Self::new(topology, dirs);
        for &site in sigma.sites() {
            let i = topology.internal(site).ok_or(RuleError::InvalidParam("defect outside window"))?;
            for d in &mut s.dirs {
                d.defect.set(i, true);
            }
        }
        Ok(s)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub(crate) fn advance_t(&mut self) {
        self.t += 1;
    }

    pub fn data(&self) -> &BitPlane {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut BitPlane {
        &mut self.data
    }

    pub fn direction_count(&self) -> usize {
        self.dirs.len()
    }

    pub fn direction(&self, k: usize) -> &DirectionRegisters {
        &self.dirs[k]
    }

    pub(crate) fn direction_mut(&mut self, k: usize) -> &mut DirectionRegisters {
        &mut self.dirs[k]
    }

    pub fn soft_cap(&self) -> u16 {
        self.soft_cap
    }

    pub fn set_soft_cap(&mut self, cap: u16) {
        self.soft_cap = cap;
    }

    /// Largest stack value observed anywhere since construction.
    pub fn max_stack_seen(&self) -> u16 {
        self.max_stack_seen
    }

    pub fn site(&self, k: usize, i: usize) -> SiteRegisters {
        let d = &self.dirs[k];
        SiteRegisters {
            defect: d.defect.get(i),
            forward: d.forward.get(i),
            backward: d.backward.get(i),
            anti: d.anti.get(i),
            stack: d.stack[i],
        }
    }

    /// Defects of one direction, in global coordinates.
    pub fn defects(&self, k: usize) -> DefectSet {
        DefectSet::new(self.dirs[k].defect.iter_ones().map(|i| self.topology.global(i)).collect())
    }

    /// Overwrite every direction's defect register with a measured syndrome.
    pub fn load_syndrome(&mut self, syndrome: &BitPlane) {
        for d in &mut self.dirs {
            d.defect = syndrome.clone();
        }
    }

    /// Total charge of one direction. Zero for every reachable state.
    pub fn total_charge(&self, k: usize) -> i64 {
        let d = &self.dirs[k];
        let mut q = d.forward.count_ones() as i64 + d.backward.count_ones() as i64
            - d.anti.count_ones() as i64;
        for i in d.stack_mask.iter_ones() {
            q -= d.stack[i] as i64;
        }
        q
    }

    /// Charge at one site of one direction.
    pub fn site_charge(&self, k: usize, i: usize) -> i64 {
        self.dirs[k].site_charge(i)
    }

    /// Sum of site charges at internal sites `< z` (window topologies).
    pub fn prefix_charge(&self, k: usize, z: usize) -> i64 {
        (0..z.min(self.topology.sites())).map(|i| self.site_charge(k, i)).sum()
    }

    /// Ring prefix charge relative to an explicit cut vertex: sum over the
    /// arc `cut, cut+1, ..., z-1`.
    pub fn prefix_charge_from(&self, k: usize, cut: usize, z: usize) -> i64 {
        let n = self.topology.sites();
        let mut q = 0;
        let mut i = cut % n;
        while i != z % n {
            q += self.site_charge(k, i);
            i = (i + 1) % n;
        }
        q
    }

    /// All registers of all directions zero (data may be anything).
    pub fn is_quiescent(&self) -> bool {
        self.dirs.iter().all(|d| d.is_quiescent())
    }

    /// Internal-index bounds of nonzero register content, over all
    /// directions.
    pub fn support_bounds(&self) -> Option<(usize, usize)> {
        let mut out: Option<(usize, usize)> = None;
        for d in &self.dirs {
            if let Some((a, b)) = d.support_bounds() {
                out = Some(match out {
                    None => (a, b),
                    Some((x, y)) => (x.min(a), y.max(b)),
                });
            }
        }
        out
    }

    /// Global-coordinate support bounds.
    pub fn support_global(&self) -> Option<(i64, i64)> {
        self.support_bounds()
            .map(|(a, b)| (self.topology.global(a), self.topology.global(b)))
    }

    pub(crate) fn stack_increment(&mut self, k: usize, mask: &BitPlane) -> Result<(), RuleError> {
        let hard_cap = 2 * self.topology.sites() as u32;
        let soft_cap = self.soft_cap;
        let d = &mut self.dirs[k];
        let mut max_seen = self.max_stack_seen;
        for i in mask.iter_ones() {
            let s = &mut d.stack[i];
            *s += 1;
            let v = *s;
            if v as u32 > hard_cap {
                return Err(RuleError::StackHardCap {
                    site: self.topology.global(i),
                    value: v as u32,
                    cap: hard_cap,
                });
            }
            if v > soft_cap {
                return Err(RuleError::StackSoftCap {
                    site: self.topology.global(i),
                    value: v as u32,
                    cap: soft_cap as u32,
                });
            }
            if v > max_seen {
                max_seen = v;
            }
            d.stack_mask.set(i, true);
        }
        self.max_stack_seen = max_seen;
        Ok(())
    }

    /// Decrement stacks at `mask` sites. Callers must pass a subset of
    /// `stack_mask`.
    pub(crate) fn stack_decrement(&mut self, k: usize, mask: &BitPlane) {
        let d = &mut self.dirs[k];
        for i in mask.iter_ones() {
            debug_assert!(d.stack[i] > 0);
            d.stack[i] -= 1;
            if d.stack[i] == 0 {
                d.stack_mask.set(i, false);
            }
        }
    }
}

/// Logical readout of a repetition-code data configuration: 1 iff strictly
/// more than half of the qubits are 1.
pub fn logical_state(data: &EdgeBits) -> bool {
    2 * data.weight() > data.n()
}

/// Same readout on a raw plane of `n` qubits.
pub fn logical_state_plane(data: &BitPlane) -> bool {
    2 * data.count_ones() > data.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_of_zero_and_full_errors_is_empty() {
        let zero = EdgeBits::zeros(8);
        assert!(defects_from_error(&zero).is_empty());
        let full = zero.complement();
        assert!(defects_from_error(&full).is_empty());
    }

    #[test]
    fn boundary_of_single_edge() {
        // Error on edge (3,4) makes defects at vertices 3 and 4.
        let e = EdgeBits::from_edges(8, &[3]);
        assert_eq!(defects_from_error(&e).sites(), &[3, 4]);
    }

    #[test]
    fn boundary_matches_complement() {
        let e = EdgeBits::from_edges(10, &[0, 4, 5, 9]);
        assert_eq!(defects_from_error(&e), defects_from_error(&e.complement()));
    }

    #[test]
    fn shift_wrap_round_trips() {
        let mut p = BitPlane::zeros(70);
        p.set(0, true);
        p.set(69, true);
        p.set(33, true);
        let q = p.shift_high_wrap().shift_low_wrap();
        assert_eq!(p, q);
        let r = p.shift_high_wrap();
        assert!(r.get(1) && r.get(0) && r.get(34));
        assert_eq!(r.count_ones(), 3);
    }

    #[test]
    fn window_shift_reports_escape() {
        let mut p = BitPlane::zeros(5);
        p.set(4, true);
        let (_, lost) = p.shift_high_zero();
        assert!(lost);
        let (_, lost) = p.shift_low_zero();
        assert!(!lost);
    }

    #[test]
    fn site_charge_examples() {
        let mut s = DecoderState::new_asymmetric(Topology::Ring { n: 8 });
        assert_eq!(s.site_charge(0, 3), 0);
        // forward + one stack unit: net zero (pair-created charges)
        s.dirs[0].forward.set(3, true);
        s.dirs[0].stack[3] = 1;
        s.dirs[0].stack_mask.set(3, true);
        assert_eq!(s.site_charge(0, 3), 0);
        // backward + anti + stack 2: -2
        let mut s2 = DecoderState::new_asymmetric(Topology::Ring { n: 8 });
        s2.dirs[0].backward.set(1, true);
        s2.dirs[0].anti.set(1, true);
        s2.dirs[0].stack[1] = 2;
        s2.dirs[0].stack_mask.set(1, true);
        assert_eq!(s2.site_charge(0, 1), -2);
    }

    #[test]
    fn logical_majority() {
        assert!(!logical_state(&EdgeBits::zeros(9)));
        assert!(logical_state(&EdgeBits::zeros(9).complement()));
        let five = EdgeBits::from_edges(9, &[0, 2, 4, 6, 8]);
        assert!(logical_state(&five));
        let four = EdgeBits::from_edges(9, &[0, 2, 4, 6]);
        assert!(!logical_state(&four));
    }

    #[test]
    fn erasure_window_geometry() {
        let sigma = DefectSet::new(vec![10, 16]);
        let s = DecoderState::erasure_window(&sigma, 1).unwrap();
        match s.topology() {
            Topology::Window { lo, len } => {
                assert_eq!(*lo, 8);
                assert_eq!(*len, 80 * 6 + 3);
            }
            _ => panic!("expected window"),
        }
        assert_eq!(s.defects(0).sites(), &[10, 16]);
    }
}
