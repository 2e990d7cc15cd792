//! Memoryless decoders: the shearing rule on a two-row periodic lattice and
//! a Toom's-rule variant on a flat square grid with a rotating vote
//! orientation.

use alloc::vec::Vec;
use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::lattice::{view_plane, BitPlane, Dir, Topology};
use crate::noise::{flip_bits, PhenomenologicalParams};
use crate::RuleError;

/// Which diagonal a shearing permutation runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagonal {
    /// Swap top qubit `(0, i)` with bottom qubit `(1, i-1)`.
    Left,
    /// Swap top qubit `(0, i)` with bottom qubit `(1, i+1)`.
    Right,
}

impl Diagonal {
    pub fn other(self) -> Diagonal {
        match self {
            Diagonal::Left => Diagonal::Right,
            Diagonal::Right => Diagonal::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShearingParams {
    pub periodic: bool,
    /// Diagonal of the first permutation of each cycle; the second uses the
    /// other one. Kept configurable so the reflected convention can be
    /// exercised too.
    pub first_diagonal: Diagonal,
}

impl Default for ShearingParams {
    fn default() -> Self {
        ShearingParams { periodic: true, first_diagonal: Diagonal::Left }
    }
}

/// Qubits on the vertices of the two-row lattice `Z_2 x Z_{n/2}`; parity
/// checks live on the edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoRowLattice {
    half_n: usize,
    rows: [BitPlane; 2],
    params: ShearingParams,
}

impl TwoRowLattice {
    /// `n` must be even; columns wrap when periodic.
    pub fn new(n: usize, params: ShearingParams) -> Result<Self, RuleError> {
        if n == 0 || n % 2 != 0 {
            return Err(RuleError::InvalidParam("two-row lattice needs an even qubit count"));
        }
        let half_n = n / 2;
        Ok(TwoRowLattice {
            half_n,
            rows: [BitPlane::zeros(half_n), BitPlane::zeros(half_n)],
            params,
        })
    }

    pub fn half_n(&self) -> usize {
        self.half_n
    }

    pub fn qubits(&self) -> usize {
        2 * self.half_n
    }

    pub fn params(&self) -> &ShearingParams {
        &self.params
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].get(col)
    }

    pub fn set(&mut self, row: usize, col: usize, v: bool) {
        self.rows[row].set(col, v);
    }

    pub fn row(&self, r: usize) -> &BitPlane {
        &self.rows[r]
    }

    pub fn weight(&self) -> usize {
        self.rows[0].count_ones() + self.rows[1].count_ones()
    }

    /// Majority of 1 over all qubits.
    pub fn logical_state(&self) -> bool {
        2 * self.weight() > self.qubits()
    }

    fn row_topology(&self) -> Topology {
        if self.params.periodic {
            Topology::Ring { n: self.half_n }
        } else {
            Topology::Window { lo: 0, len: self.half_n }
        }
    }

    /// Majority substep: a top-row qubit flips when it is in odd parity with
    /// both its bottom partner and its left neighbor; same for the bottom
    /// row (left neighbor, or right neighbor in the non-periodic variant).
    /// With noise, data errors land first (row 0 then row 1, ascending
    /// columns), then each parity readout is flipped independently
    /// (vertical, top-horizontal, bottom-horizontal planes, in that order).
    pub fn majority_step(
        &mut self,
        noise: Option<(&PhenomenologicalParams, &mut dyn RngCore)>,
    ) {
        let top = self.row_topology();
        let mut eps_m = 0.0;
        let mut rng_opt: Option<&mut dyn RngCore> = None;
        if let Some((p, rng)) = noise {
            flip_bits(&mut self.rows[0], p.eps_d, rng);
            flip_bits(&mut self.rows[1], p.eps_d, rng);
            eps_m = p.eps_m;
            rng_opt = Some(rng);
        }

        let mut vertical = self.rows[0].clone();
        vertical.xor_assign(&self.rows[1]);
        // Horizontal parity of qubit (r, i) with its checked neighbor.
        let mut top_h = view_plane(&self.rows[0], Dir::Low, &top);
        top_h.xor_assign(&self.rows[0]);
        let bottom_dir = if self.params.periodic { Dir::Low } else { Dir::High };
        let mut bot_h = view_plane(&self.rows[1], bottom_dir, &top);
        bot_h.xor_assign(&self.rows[1]);

        if let Some(rng) = rng_opt {
            flip_bits(&mut vertical, eps_m, rng);
            flip_bits(&mut top_h, eps_m, rng);
            flip_bits(&mut bot_h, eps_m, rng);
        }

        // A parity check that does not exist on the open lattice never
        // produces flip pressure.
        if !self.params.periodic {
            top_h.set(0, false);
            bot_h.set(self.half_n - 1, false);
        }

        let flips0 = vertical.and(&top_h);
        let flips1 = vertical.and(&bot_h);
        self.rows[0].xor_assign(&flips0);
        self.rows[1].xor_assign(&flips1);
    }

    /// Synchronous qubit permutation along one diagonal. Data errors are
    /// injected after the permutation when noise is given.
    pub fn permutation_step(
        &mut self,
        diagonal: Diagonal,
        noise: Option<(&PhenomenologicalParams, &mut dyn RngCore)>,
    ) {
        let top = self.row_topology();
        let (new0, new1) = match diagonal {
            Diagonal::Left => {
                // (0, i) <-> (1, i-1)
                let mut n0 = view_plane(&self.rows[1], Dir::Low, &top);
                let mut n1 = view_plane(&self.rows[0], Dir::High, &top);
                if !self.params.periodic {
                    n0.set(0, self.rows[0].get(0));
                    n1.set(self.half_n - 1, self.rows[1].get(self.half_n - 1));
                }
                (n0, n1)
            }
            Diagonal::Right => {
                // (0, i) <-> (1, i+1)
                let mut n0 = view_plane(&self.rows[1], Dir::High, &top);
                let mut n1 = view_plane(&self.rows[0], Dir::Low, &top);
                if !self.params.periodic {
                    n0.set(self.half_n - 1, self.rows[0].get(self.half_n - 1));
                    n1.set(0, self.rows[1].get(0));
                }
                (n0, n1)
            }
        };
        self.rows[0] = new0;
        self.rows[1] = new1;
        if let Some((p, rng)) = noise {
            flip_bits(&mut self.rows[0], p.eps_d, rng);
            flip_bits(&mut self.rows[1], p.eps_d, rng);
        }
    }

    /// One full cycle: majority, first diagonal, majority, other diagonal.
    pub fn cycle(&mut self, noise: Option<(&PhenomenologicalParams, &mut dyn RngCore)>) {
        let first = self.params.first_diagonal;
        match noise {
            None => {
                self.majority_step(None);
                self.permutation_step(first, None);
                self.majority_step(None);
                self.permutation_step(first.other(), None);
            }
            Some((p, rng)) => {
                self.majority_step(Some((p, rng)));
                self.permutation_step(first, Some((p, rng)));
                self.majority_step(Some((p, rng)));
                self.permutation_step(first.other(), Some((p, rng)));
            }
        }
    }
}

/// Vote orientation of the Toom step: the pair of neighbors a cell is
/// compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    SW,
    SE,
    NE,
    NW,
}

impl Orientation {
    /// Fixed rotation used by the schedule.
    pub const CYCLE: [Orientation; 4] =
        [Orientation::SW, Orientation::SE, Orientation::NE, Orientation::NW];

    /// (vertical, horizontal) neighbor directions; row 0 is the south edge,
    /// column 0 the west edge.
    fn axes(self) -> (Dir, Dir) {
        match self {
            Orientation::SW => (Dir::Low, Dir::Low),
            Orientation::SE => (Dir::Low, Dir::High),
            Orientation::NE => (Dir::High, Dir::High),
            Orientation::NW => (Dir::High, Dir::Low),
        }
    }
}

/// What a vote does when its neighbor falls outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryPolicy {
    /// Missing neighbors agree with the cell: no flip pressure at the rim.
    Agree,
    /// Wrap around (torus).
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToomParams {
    /// `k_switch = ceil(c * log2(side))` steps per orientation.
    pub schedule_factor: f64,
    pub boundary: BoundaryPolicy,
}

impl Default for ToomParams {
    fn default() -> Self {
        ToomParams { schedule_factor: 2.0, boundary: BoundaryPolicy::Agree }
    }
}

/// Qubits on the vertices of an open square grid, one bit plane per row.
/// Row 0 is the southern edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareGrid {
    side: usize,
    rows: Vec<BitPlane>,
    params: ToomParams,
}

impl SquareGrid {
    pub fn new(side: usize, params: ToomParams) -> Result<Self, RuleError> {
        if side < 2 {
            return Err(RuleError::InvalidParam("grid side must be at least 2"));
        }
        Ok(SquareGrid {
            side,
            rows: (0..side).map(|_| BitPlane::zeros(side)).collect(),
            params,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn qubits(&self) -> usize {
        self.side * self.side
    }

    pub fn params(&self) -> &ToomParams {
        &self.params
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].get(col)
    }

    pub fn set(&mut self, row: usize, col: usize, v: bool) {
        self.rows[row].set(col, v);
    }

    pub fn weight(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones()).sum()
    }

    pub fn logical_state(&self) -> bool {
        2 * self.weight() > self.qubits()
    }

    fn col_topology(&self) -> Topology {
        match self.params.boundary {
            BoundaryPolicy::Periodic => Topology::Ring { n: self.side },
            BoundaryPolicy::Agree => Topology::Window { lo: 0, len: self.side },
        }
    }

    fn vertical_neighbor_row(&self, r: usize, dir: Dir) -> Option<usize> {
        match (dir, self.params.boundary) {
            (Dir::Low, _) if r > 0 => Some(r - 1),
            (Dir::High, _) if r + 1 < self.side => Some(r + 1),
            (_, BoundaryPolicy::Periodic) => Some(match dir {
                Dir::Low => self.side - 1,
                Dir::High => 0,
            }),
            _ => None,
        }
    }

    /// One synchronous Toom step in the given orientation: a cell flips when
    /// both parity reads against its two oriented neighbors come out odd.
    /// With noise, data errors land first (rows ascending), then the
    /// vertical read masks (rows ascending), then the horizontal ones.
    pub fn toom_step(
        &mut self,
        orientation: Orientation,
        noise: Option<(&PhenomenologicalParams, &mut dyn RngCore)>,
    ) {
        let (vdir, hdir) = orientation.axes();
        let col_top = self.col_topology();
        let side = self.side;

        let mut eps_m = 0.0;
        let mut rng_opt: Option<&mut dyn RngCore> = None;
        if let Some((p, rng)) = noise {
            for r in 0..side {
                flip_bits(&mut self.rows[r], p.eps_d, rng);
            }
            eps_m = p.eps_m;
            rng_opt = Some(rng);
        }

        // Disagreement with the vertical neighbor; missing neighbors agree.
        let mut vdis: Vec<BitPlane> = (0..side)
            .map(|r| match self.vertical_neighbor_row(r, vdir) {
                Some(nr) => {
                    let mut d = self.rows[r].clone();
                    d.xor_assign(&self.rows[nr]);
                    d
                }
                None => BitPlane::zeros(side),
            })
            .collect();
        // Disagreement with the horizontal neighbor.
        let mut hdis: Vec<BitPlane> = (0..side)
            .map(|r| {
                let mut d = view_plane(&self.rows[r], hdir, &col_top);
                d.xor_assign(&self.rows[r]);
                d
            })
            .collect();

        if let Some(rng) = rng_opt {
            for d in vdis.iter_mut() {
                flip_bits(d, eps_m, rng);
            }
            for d in hdis.iter_mut() {
                flip_bits(d, eps_m, rng);
            }
        }

        if self.params.boundary == BoundaryPolicy::Agree {
            // Redo the agree policy after noise: nonexistent reads carry no
            // pressure, noisy or not.
            for r in 0..side {
                if self.vertical_neighbor_row(r, vdir).is_none() {
                    vdis[r].clear();
                }
                let edge_col = match hdir {
                    Dir::Low => 0,
                    Dir::High => side - 1,
                };
                hdis[r].set(edge_col, false);
            }
        }

        for r in 0..side {
            let flips = vdis[r].and(&hdis[r]);
            self.rows[r].xor_assign(&flips);
        }
    }
}

/// Steps spent in each orientation: `ceil(c * log2(side))`, at least 1.
pub fn switch_interval(side: usize, schedule_factor: f64) -> u32 {
    let lg = libm::log2(side.max(2) as f64);
    let k = libm::ceil(schedule_factor * lg);
    (k as u32).max(1)
}

/// Deterministic cyclic schedule over the four orientations.
pub fn orientation_schedule(t: u32, k_switch: u32) -> Orientation {
    let idx = (t / k_switch.max(1)) % 4;
    Orientation::CYCLE[idx as usize]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(lat: &mut TwoRowLattice, cols: core::ops::Range<usize>) {
        for c in cols {
            lat.set(0, c, true);
            lat.set(1, c, true);
        }
    }

    #[test]
    fn uniform_states_are_fixed_points() {
        let mut lat = TwoRowLattice::new(32, ShearingParams::default()).unwrap();
        lat.cycle(None);
        assert_eq!(lat.weight(), 0);
        for c in 0..16 {
            lat.set(0, c, true);
            lat.set(1, c, true);
        }
        lat.cycle(None);
        assert_eq!(lat.weight(), 32);

        let mut grid = SquareGrid::new(8, ToomParams::default()).unwrap();
        grid.toom_step(Orientation::SW, None);
        assert_eq!(grid.weight(), 0);
        for r in 0..8 {
            for c in 0..8 {
                grid.set(r, c, true);
            }
        }
        grid.toom_step(Orientation::SW, None);
        assert_eq!(grid.weight(), 64);
    }

    #[test]
    fn isolated_error_is_a_minority() {
        let mut lat = TwoRowLattice::new(32, ShearingParams::default()).unwrap();
        lat.set(0, 5, true);
        lat.majority_step(None);
        assert_eq!(lat.weight(), 0);
    }

    #[test]
    fn square_block_survives_one_majority_substep() {
        let mut lat = TwoRowLattice::new(32, ShearingParams::default()).unwrap();
        block(&mut lat, 6..8);
        lat.majority_step(None);
        assert_eq!(lat.weight(), 4);
    }

    #[test]
    fn permutations_are_involutions_and_preserve_weight() {
        for periodic in [true, false] {
            let params = ShearingParams { periodic, ..Default::default() };
            for diag in [Diagonal::Left, Diagonal::Right] {
                let mut lat = TwoRowLattice::new(24, params).unwrap();
                lat.set(0, 0, true);
                lat.set(0, 5, true);
                lat.set(1, 7, true);
                lat.set(1, 11, true);
                let before = lat.clone();
                lat.permutation_step(diag, None);
                assert_eq!(lat.weight(), before.weight());
                lat.permutation_step(diag, None);
                assert_eq!(lat, before);
            }
        }
    }

    #[test]
    fn left_permutation_moves_single_bit_down_left() {
        let mut lat = TwoRowLattice::new(32, ShearingParams::default()).unwrap();
        lat.set(0, 5, true);
        lat.permutation_step(Diagonal::Left, None);
        assert!(lat.get(1, 4));
        assert_eq!(lat.weight(), 1);
    }

    #[test]
    fn two_row_cluster_splits_and_erases() {
        // A width-4 cluster over both rows is sheared into one top-row and
        // one bottom-row cluster, then each is erased; the whole
        // configuration empties within a few cycles.
        let mut lat = TwoRowLattice::new(64, ShearingParams::default()).unwrap();
        block(&mut lat, 12..16);
        let mut split_seen = false;
        let mut zero_at = None;
        for cycle in 1..=12 {
            lat.cycle(None);
            let w0 = lat.row(0).count_ones();
            let w1 = lat.row(1).count_ones();
            if w0 > 0 && w1 > 0 {
                // Rows hold disjoint column ranges once the shear separated
                // the cluster.
                let t0 = (lat.row(0).first_one().unwrap(), lat.row(0).last_one().unwrap());
                let t1 = (lat.row(1).first_one().unwrap(), lat.row(1).last_one().unwrap());
                if t0.0 > t1.1 || t1.0 > t0.1 {
                    split_seen = true;
                }
            }
            if lat.weight() == 0 {
                zero_at = Some(cycle);
                break;
            }
        }
        assert!(split_seen, "cluster never split across rows");
        let z = zero_at.expect("cluster not erased");
        assert!(z <= 8, "width-4 cluster took {z} cycles");
    }

    #[test]
    fn weight_one_errors_erase_within_one_cycle() {
        for row in 0..2 {
            for col in 0..32 {
                let mut lat = TwoRowLattice::new(64, ShearingParams::default()).unwrap();
                lat.set(row, col, true);
                lat.cycle(None);
                assert_eq!(lat.weight(), 0, "leftover after ({row},{col})");
            }
        }
    }

    #[test]
    fn toom_erodes_rectangle_from_the_corner() {
        // A 3x4 rectangle under a fixed SW orientation erodes along its
        // anti-diagonal: gone after height + width - 1 steps.
        let mut grid = SquareGrid::new(16, ToomParams::default()).unwrap();
        for r in 5..8 {
            for c in 6..10 {
                grid.set(r, c, true);
            }
        }
        let mut zero_at = None;
        for step in 1..=20 {
            grid.toom_step(Orientation::SW, None);
            if grid.weight() == 0 {
                zero_at = Some(step);
                break;
            }
        }
        assert_eq!(zero_at, Some(3 + 4 - 1));
    }

    #[test]
    fn toom_single_error_bulk_one_step() {
        let mut grid = SquareGrid::new(8, ToomParams::default()).unwrap();
        grid.set(4, 4, true);
        grid.toom_step(Orientation::SW, None);
        assert_eq!(grid.weight(), 0);
    }

    #[test]
    fn toom_rectangles_erase_under_every_orientation() {
        for orient in Orientation::CYCLE {
            for h in 1..=5usize {
                for w in 1..=5usize {
                    let mut grid = SquareGrid::new(16, ToomParams::default()).unwrap();
                    for r in 6..6 + h {
                        for c in 6..6 + w {
                            grid.set(r, c, true);
                        }
                    }
                    for _ in 0..(h + w) {
                        grid.toom_step(orient, None);
                    }
                    assert_eq!(grid.weight(), 0, "{orient:?} left a {h}x{w} block");
                }
            }
        }
    }

    #[test]
    fn schedule_cycles_with_logarithmic_interval() {
        assert_eq!(switch_interval(32, 2.0), 10);
        let k = 10;
        assert_eq!(orientation_schedule(0, k), Orientation::CYCLE[0]);
        assert_eq!(orientation_schedule(k - 1, k), Orientation::CYCLE[0]);
        assert_eq!(orientation_schedule(k, k), Orientation::CYCLE[1]);
        assert_eq!(orientation_schedule(4 * k, k), Orientation::CYCLE[0]);
    }
}
