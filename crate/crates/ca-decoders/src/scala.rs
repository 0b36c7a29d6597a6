//! Signal-and-attraction automata on the repetition ring and the torus.
//!
//! Every cell holds one defect bit plus one signal bit per lattice direction.
//! Steps are synchronous: each one reads a snapshot of the previous cell
//! states and the freshly measured syndrome. On the ring a defect broadcasts
//! only while both of its signal bits are clear; on the torus every defect
//! broadcasts each step. Corrections read the signals held at the start of
//! the step.

use serde::{Deserialize, Serialize};

use crate::bits::{Ones, Ring};
use crate::lattice::{RepetitionState, Syndrome1D, Syndrome2D, ToricState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScalaCell1D {
    pub defect: bool,
    pub sig_left: bool,
    pub sig_right: bool,
}

/// All cells of a ring, stored as bit words. `heard` keeps the signals that
/// reached each cell in the last step; corrections act on these, so a reset
/// stops propagation but not the response to signals already received.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scala1D {
    ring: Ring<u128>,
    defect: u128,
    left: u128,
    right: u128,
    heard: (u128, u128),
}

impl Scala1D {
    pub fn new(d: usize) -> Self {
        Scala1D {
            ring: Ring::new(d),
            defect: 0,
            left: 0,
            right: 0,
            heard: (0, 0),
        }
    }

    pub fn d(&self) -> usize {
        self.ring.len()
    }

    pub fn cell(&self, i: usize) -> ScalaCell1D {
        ScalaCell1D {
            defect: (self.defect >> i) & 1 == 1,
            sig_left: (self.left >> i) & 1 == 1,
            sig_right: (self.right >> i) & 1 == 1,
        }
    }

    pub fn cells(&self) -> Vec<ScalaCell1D> {
        (0..self.d()).map(|i| self.cell(i)).collect()
    }

    pub fn set_cell(&mut self, i: usize, cell: ScalaCell1D) {
        let b = 1u128 << i;
        self.defect = (self.defect & !b) | if cell.defect { b } else { 0 };
        self.left = (self.left & !b) | if cell.sig_left { b } else { 0 };
        self.right = (self.right & !b) | if cell.sig_right { b } else { 0 };
        self.heard = (self.left, self.right);
    }

    /// Left- and right-moving signal words.
    pub fn signals(&self) -> (u128, u128) {
        (self.left, self.right)
    }

    /// XORs bit-flip masks into the left- and right-moving signals.
    pub fn flip_signals(&mut self, left: u128, right: u128) {
        self.left ^= left;
        self.right ^= right;
        self.heard.0 ^= left;
        self.heard.1 ^= right;
    }

    pub fn n_sigs(&self) -> usize {
        (self.left.count_ones() + self.right.count_ones()) as usize
    }

    /// One synchronous update. Returns the mask of flipped qubits, already applied to `state`.
    pub fn step(&mut self, measured: &Syndrome1D, state: &mut RepetitionState) -> u128 {
        let flips = self.advance(measured.bits);
        state.apply(flips);
        flips
    }

    pub(crate) fn advance(&mut self, s: u128) -> u128 {
        let ring = self.ring;
        let (left, right) = self.heard;
        let emit = s & !self.left & !self.right;
        self.defect = s;
        self.left = ring.east(self.left | emit);
        self.right = ring.west(self.right | emit);
        self.heard = (self.left, self.right);

        let dl = ring.west(s);
        let dr = ring.east(s);
        let nn = s & dl;
        let iso = s & !dl & !dr;
        let follow_left = iso & right & !left;
        let follow_right = iso & left & !right;
        // a left-qubit flip by cell i hits qubit i-1
        ring.east(nn | follow_left) ^ follow_right
    }

    pub fn reset(&mut self) {
        self.left = 0;
        self.right = 0;
    }

    /// Runs `d-2` noiseless steps from `initial` and reports the final state and signal count.
    pub fn run_code_capacity(initial: &RepetitionState) -> (RepetitionState, usize) {
        let mut state = *initial;
        let mut ca = Scala1D::new(state.d());
        for _ in 0..state.d() - 2 {
            let s = state.syndrome();
            ca.step(&s, &mut state);
        }
        (state, ca.n_sigs())
    }

    /// Number of steps until the syndrome is empty, capped at `cap`.
    pub fn erosion_time(initial: &RepetitionState, cap: usize) -> Option<usize> {
        let mut state = *initial;
        let mut ca = Scala1D::new(state.d());
        for t in 0..=cap {
            let s = state.syndrome();
            if s.is_empty() {
                return Some(t);
            }
            ca.step(&s, &mut state);
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScalaCell2D {
    pub defect: bool,
    pub sig_n: bool,
    pub sig_e: bool,
    pub sig_s: bool,
    pub sig_w: bool,
}

impl ScalaCell2D {
    pub fn n_sig(&self) -> u32 {
        self.sig_n as u32 + self.sig_e as u32 + self.sig_s as u32 + self.sig_w as u32
    }
}

/// Flips requested by one 2D step, split by edge family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flips2D {
    pub h: Vec<u64>,
    pub v: Vec<u64>,
}

impl Flips2D {
    pub fn count(&self) -> usize {
        self.h
            .iter()
            .chain(self.v.iter())
            .map(|x| x.count_ones() as usize)
            .sum()
    }
}

/// All cells of a torus. Signal words are named by travel direction:
/// `north[r]` holds signals moving towards row `r-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scala2D {
    ring: Ring<u64>,
    defect: Vec<u64>,
    north: Vec<u64>,
    east: Vec<u64>,
    south: Vec<u64>,
    west: Vec<u64>,
    /// Signals received in the last step, in N, E, S, W order.
    heard: [Vec<u64>; 4],
}

impl Scala2D {
    pub fn new(d: usize) -> Self {
        Scala2D {
            ring: Ring::new(d),
            defect: vec![0; d],
            north: vec![0; d],
            east: vec![0; d],
            south: vec![0; d],
            west: vec![0; d],
            heard: std::array::from_fn(|_| vec![0; d]),
        }
    }

    pub fn d(&self) -> usize {
        self.ring.len()
    }

    pub fn cell(&self, r: usize, c: usize) -> ScalaCell2D {
        let g = |w: &Vec<u64>| (w[r] >> c) & 1 == 1;
        ScalaCell2D {
            defect: g(&self.defect),
            sig_n: g(&self.north),
            sig_e: g(&self.east),
            sig_s: g(&self.south),
            sig_w: g(&self.west),
        }
    }

    pub fn set_cell(&mut self, r: usize, c: usize, cell: ScalaCell2D) {
        let b = 1u64 << c;
        let put = |w: &mut Vec<u64>, on: bool| w[r] = (w[r] & !b) | if on { b } else { 0 };
        put(&mut self.defect, cell.defect);
        put(&mut self.north, cell.sig_n);
        put(&mut self.east, cell.sig_e);
        put(&mut self.south, cell.sig_s);
        put(&mut self.west, cell.sig_w);
        self.heard = [self.north.clone(), self.east.clone(), self.south.clone(), self.west.clone()];
    }

    pub fn n_sigs(&self) -> usize {
        [&self.north, &self.east, &self.south, &self.west]
            .iter()
            .flat_map(|w| w.iter())
            .map(|x| x.count_ones() as usize)
            .sum()
    }

    /// XORs per-row bit-flip masks into the signals, given in N, E, S, W order.
    pub fn flip_signals(&mut self, masks: [&[u64]; 4]) {
        let live = [&mut self.north, &mut self.east, &mut self.south, &mut self.west];
        for ((w, h), m) in live.into_iter().zip(self.heard.iter_mut()).zip(masks) {
            for r in 0..w.len() {
                w[r] ^= m[r];
                h[r] ^= m[r];
            }
        }
    }

    pub fn reset(&mut self) {
        for w in [&mut self.north, &mut self.east, &mut self.south, &mut self.west] {
            w.iter_mut().for_each(|x| *x = 0);
        }
    }

    pub fn step(&mut self, measured: &Syndrome2D, state: &mut ToricState) -> Flips2D {
        let flips = self.advance(&measured.rows);
        for r in 0..self.d() {
            state.apply_h_row(r, flips.h[r]);
            state.apply_v_row(r, flips.v[r]);
        }
        flips
    }

    pub(crate) fn advance(&mut self, s: &[u64]) -> Flips2D {
        let d = self.d();
        let ring = self.ring;
        let up = |r: usize| (r + d - 1) % d;
        let down = |r: usize| (r + 1) % d;

        let mut north = vec![0; d];
        let mut south = vec![0; d];
        let mut east = vec![0; d];
        let mut west = vec![0; d];
        for r in 0..d {
            east[r] = ring.west(self.east[r] | s[r]);
            west[r] = ring.east(self.west[r] | s[r]);
            south[r] = self.south[up(r)] | s[up(r)];
            north[r] = self.north[down(r)] | s[down(r)];
        }
        for r in 0..d {
            let (n, e, so, w) = (north[r], east[r], south[r], west[r]);
            let two = (n & e) | (n & so) | (n & w) | (e & so) | (e & w) | (so & w);
            let refl = two & !s[r];
            north[r] = (n & !refl) | (so & refl);
            south[r] = (so & !refl) | (n & refl);
            east[r] = (e & !refl) | (w & refl);
            west[r] = (w & !refl) | (e & refl);
        }

        let mut fh = vec![0u64; d];
        let mut fv = vec![0u64; d];
        for r in 0..d {
            let sr = s[r];
            if sr == 0 {
                continue;
            }
            let dw = ring.west(sr);
            let de = ring.east(sr);
            let dn = s[up(r)];
            let ds = s[down(r)];
            let nn_w = sr & dw;
            let nn_n = sr & dn & !dw;
            let iso = sr & !dw & !de & !dn & !ds;
            // received signals named by the side they came from
            let fw = self.heard[1][r];
            let fe = self.heard[3][r];
            let fnn = self.heard[2][r];
            let fs = self.heard[0][r];
            let to_w = iso & fw & !fe;
            let to_e = iso & fe & !fw & !(fnn ^ fs);
            let to_n = iso & fnn & !fs & !(fw & !fe);
            let to_s = iso & fs & !fnn & !(fw ^ fe);
            fv[r] ^= nn_w | to_w | ring.west(to_e);
            fh[r] ^= nn_n | to_n;
            fh[down(r)] ^= to_s;
        }

        self.defect = s.to_vec();
        self.heard = [north.clone(), east.clone(), south.clone(), west.clone()];
        self.north = north;
        self.east = east;
        self.south = south;
        self.west = west;
        Flips2D { h: fh, v: fv }
    }

    /// Runs `d²` noiseless steps under the ramped reset schedule.
    pub fn run_code_capacity(initial: &ToricState) -> ToricState {
        let mut state = initial.clone();
        let d = state.d();
        let mut ca = Scala2D::new(d);
        let schedule = ResetSchedule::Ramp;
        for t in 1..=d * d {
            let s = state.syndrome();
            if s.is_empty() {
                break;
            }
            ca.step(&s, &mut state);
            if schedule.resets_after(t, d) {
                ca.reset();
            }
        }
        state
    }
}

/// State after one step of a scripted replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayStep {
    pub t: usize,
    pub injected: u128,
    pub state: RepetitionState,
    pub n_sigs: usize,
}

/// Data errors injected before steps 1 and 3 of a `d = 7` ring with signal
/// resets every 3 steps; the signals of the first error drag the later pair
/// around the ring.
pub const WRAPAROUND_D7: [(usize, u128); 2] = [(1, 0b1), (3, 0b11000)];
pub const WRAPAROUND_D7_RESET: usize = 3;

impl Scala1D {
    /// Runs `steps` noiseless steps, XOR-ing `(t, mask)` errors into the data
    /// before step `t` is measured.
    pub fn replay(
        d: usize,
        schedule: ResetSchedule,
        injections: &[(usize, u128)],
        steps: usize,
    ) -> crate::Result<Vec<ReplayStep>> {
        let mut state = RepetitionState::new(d)?;
        let mut ca = Scala1D::new(d);
        let mut out = Vec::with_capacity(steps);
        for t in 1..=steps {
            let injected = injections
                .iter()
                .filter(|(at, _)| *at == t)
                .fold(0, |m, (_, e)| m ^ e);
            state.apply(injected);
            let s = state.syndrome();
            ca.step(&s, &mut state);
            if schedule.resets_after(t, d) {
                ca.reset();
            }
            out.push(ReplayStep { t, injected, state, n_sigs: ca.n_sigs() });
        }
        Ok(out)
    }
}

/// When signal bits are cleared, driven by the step clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResetSchedule {
    Never,
    Fixed(usize),
    /// Periods 1, 2, .., d, then d-1, .., 1; the whole ramp spans d² steps.
    Ramp,
}

impl ResetSchedule {
    /// Whether a reset follows step `t` (counted from 1).
    pub fn resets_after(&self, t: usize, d: usize) -> bool {
        match *self {
            ResetSchedule::Never => false,
            ResetSchedule::Fixed(period) => period > 0 && t.is_multiple_of(period),
            ResetSchedule::Ramp => ramp_reset_times(d).contains(&t),
        }
    }

    pub fn max_period_1d(d: usize) -> usize {
        (d - 1) / 2
    }

    pub fn max_period_2d(d: usize) -> usize {
        d
    }
}

/// Cumulative step counts after which the ramp schedule resets.
pub fn ramp_reset_times(d: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * d);
    let mut t = 0;
    for period in (1..=d).chain((1..d).rev()) {
        t += period;
        out.push(t);
    }
    out
}

/// Iterates over flipped edges as `(is_horizontal, r, c)`.
pub fn flipped_edges(f: &Flips2D) -> Vec<(bool, usize, usize)> {
    let mut out = Vec::new();
    for (r, &w) in f.h.iter().enumerate() {
        out.extend(Ones(w).map(|c| (true, r, c)));
    }
    for (r, &w) in f.v.iter().enumerate() {
        out.extend(Ones(w).map(|c| (false, r, c)));
    }
    out
}
