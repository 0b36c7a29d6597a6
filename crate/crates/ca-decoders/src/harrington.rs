//! Hierarchical colony decoder on the repetition ring and the torus.
//!
//! Level 0 acts every step on the Moore neighbourhood of each defect. Level
//! `k >= 1` runs in cycles of `U^k + Q^k` steps: representatives count their
//! own defect and the count signals arriving from neighbouring representatives
//! during phases `1..=U^k`, decide at phase `U^k`, emit a flip signal that
//! spreads over the following `Q^k - 1` steps, and at phase 0 every cell
//! holding a flip signal flips its qubit, after which all level-`k` counters
//! and signals clear.
//! The decision overwrites the representative's own flip-signal bits.
//!
//! Representatives of level `k` sit at coordinates congruent to `(3^k - 1)/2`
//! modulo `3^k`; their level-`k` address is the quotient modulo 3.

use serde::{Deserialize, Serialize};

use crate::bits::{Ones, Ring};
use crate::error::{Error, Result};
use crate::lattice::{mask1, RepetitionState, Syndrome1D, Syndrome2D, ToricState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierConstants {
    pub u: u64,
    pub q: usize,
    pub f_c: f64,
    pub f_n: f64,
    pub m: u32,
}

impl HierConstants {
    pub fn for_distance(d: usize) -> Result<Self> {
        let mut m = 0;
        let mut x = 1;
        while x < d {
            x *= 3;
            m += 1;
        }
        if x != d || m == 0 {
            return Err(Error::InvalidDistance {
                d,
                reason: "distance must be a power of 3 (3, 9, 27, ...)",
            });
        }
        Ok(HierConstants {
            u: 10,
            q: 3,
            f_c: 0.9,
            f_n: 0.4,
            m,
        })
    }

    pub fn d(&self) -> usize {
        self.q.pow(self.m)
    }

    /// Levels that run the counting and flip-signal machinery.
    pub fn levels(&self) -> std::ops::Range<u32> {
        1..self.m
    }

    pub fn working_period(&self, k: u32) -> u64 {
        self.u.pow(k)
    }

    pub fn chain_length(&self, k: u32) -> usize {
        self.q.pow(k)
    }

    pub fn cycle(&self, k: u32) -> u64 {
        self.working_period(k) + self.chain_length(k) as u64
    }

    pub fn center_threshold(&self, k: u32) -> u32 {
        threshold(self.f_c, self.working_period(k))
    }

    pub fn neighbor_threshold(&self, k: u32) -> u32 {
        threshold(self.f_n, self.working_period(k))
    }

    /// Level-`k` defect bits from the accumulated counters: the centre bit and one bit per neighbour counter.
    pub fn level_k_syndrome(&self, k: u32, defect_counter: u32, sig_counters: &[u32]) -> (bool, Vec<bool>) {
        let nt = self.neighbor_threshold(k);
        (
            defect_counter >= self.center_threshold(k),
            sig_counters.iter().map(|&c| c >= nt).collect(),
        )
    }

    fn rep_offset(k: u32) -> usize {
        (3usize.pow(k) - 1) / 2
    }

    /// Level-`k` address coordinate (0, 1 or 2) of position `i`, or `None` when `i` is not a level-`k` representative.
    pub fn address(&self, k: u32, i: usize) -> Option<u8> {
        if k == 0 {
            return Some((i % 3) as u8);
        }
        let stride = 3usize.pow(k);
        let off = Self::rep_offset(k);
        let shifted = (i + self.d() - off) % self.d();
        shifted.is_multiple_of(stride).then(|| ((shifted / stride) % 3) as u8)
    }
}

fn threshold(f: f64, n: u64) -> u32 {
    (f * n as f64 - 1e-9).ceil().max(0.0) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Loc1D {
    L,
    C,
    R,
}

impl Loc1D {
    pub fn from_coord(a: u8) -> Self {
        match a {
            0 => Loc1D::L,
            1 => Loc1D::C,
            _ => Loc1D::R,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir1D {
    Left,
    Right,
}

/// Level-independent 1D correction rule; acts only on the cell's own defect `c`.
///
/// `L` cells move across the border when the left neighbour holds a defect and
/// otherwise push towards the centre; `R` cells pair with a left defect or, when
/// both neighbours are clear, push towards the centre; `C` cells never move.
pub fn correct_1d(l: bool, c: bool, r: bool, addr: Option<Loc1D>) -> Option<Dir1D> {
    if !c {
        return None;
    }
    match addr? {
        Loc1D::L => Some(if l { Dir1D::Left } else { Dir1D::Right }),
        Loc1D::R if l || !r => Some(Dir1D::Left),
        _ => None,
    }
}

/// Snapshot of one cell of [`Harrington1D`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierCell1D {
    pub defect: bool,
    pub age: u64,
    /// One entry per level `0..m`.
    pub address: Vec<Option<Loc1D>>,
    /// One entry per counting level `1..m`.
    pub levels: Vec<LevelCell1D>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCell1D {
    pub defect_counter: u32,
    /// Count signals moving left and right.
    pub count_sig: [bool; 2],
    /// Signals counted from the left and right neighbour representatives.
    pub sig_counter: [u32; 2],
    /// Flip signals moving left and right.
    pub flip_sig: [bool; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Level1D {
    k: u32,
    reps: u128,
    addr_l: u128,
    addr_c: u128,
    addr_r: u128,
    cs_left: u128,
    cs_right: u128,
    fs_left: u128,
    fs_right: u128,
    defect_counter: Vec<u32>,
    from_left: Vec<u32>,
    from_right: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Harrington1D {
    consts: HierConstants,
    ring: Ring<u128>,
    age: u64,
    defect: u128,
    level0: [u128; 3],
    levels: Vec<Level1D>,
}

impl Harrington1D {
    pub fn new(d: usize) -> Result<Self> {
        let consts = HierConstants::for_distance(d)?;
        if d > 81 {
            return Err(Error::InvalidDistance {
                d,
                reason: "the 1D hierarchical decoder supports d <= 81",
            });
        }
        let masks = |k: u32| {
            let mut out = [0u128; 3];
            for i in 0..d {
                if let Some(a) = consts.address(k, i) {
                    out[a as usize] |= 1 << i;
                }
            }
            out
        };
        let levels = consts
            .levels()
            .map(|k| {
                let [l, c, r] = masks(k);
                Level1D {
                    k,
                    reps: l | c | r,
                    addr_l: l,
                    addr_c: c,
                    addr_r: r,
                    cs_left: 0,
                    cs_right: 0,
                    fs_left: 0,
                    fs_right: 0,
                    defect_counter: vec![0; d],
                    from_left: vec![0; d],
                    from_right: vec![0; d],
                }
            })
            .collect();
        Ok(Harrington1D {
            consts,
            ring: Ring::new(d),
            age: 0,
            defect: 0,
            level0: masks(0),
            levels,
        })
    }

    pub fn constants(&self) -> &HierConstants {
        &self.consts
    }

    pub fn d(&self) -> usize {
        self.ring.len()
    }

    pub fn age(&self) -> u64 {
        self.age
    }

    pub fn cell(&self, i: usize) -> HierCell1D {
        let bit = |w: u128| (w >> i) & 1 == 1;
        HierCell1D {
            defect: bit(self.defect),
            age: self.age,
            address: (0..self.consts.m)
                .map(|k| self.consts.address(k, i).map(Loc1D::from_coord))
                .collect(),
            levels: self
                .levels
                .iter()
                .map(|lv| LevelCell1D {
                    defect_counter: lv.defect_counter[i],
                    count_sig: [bit(lv.cs_left), bit(lv.cs_right)],
                    sig_counter: [lv.from_left[i], lv.from_right[i]],
                    flip_sig: [bit(lv.fs_left), bit(lv.fs_right)],
                })
                .collect(),
        }
    }

    /// Count-signal words (left, right) of every counting level.
    pub fn count_signals_mut(&mut self) -> Vec<(&mut u128, &mut u128)> {
        self.levels
            .iter_mut()
            .map(|lv| (&mut lv.cs_left, &mut lv.cs_right))
            .collect()
    }

    /// Flip-signal words (left, right) of every counting level.
    pub fn flip_signals_mut(&mut self) -> Vec<(&mut u128, &mut u128)> {
        self.levels
            .iter_mut()
            .map(|lv| (&mut lv.fs_left, &mut lv.fs_right))
            .collect()
    }

    /// True while a pending flip signal or a saturated defect counter could still act on an empty syndrome.
    pub fn has_pending_work(&self) -> bool {
        self.levels.iter().any(|lv| {
            let thr = self.consts.center_threshold(lv.k);
            (lv.fs_left | lv.fs_right) != 0
                || Ones(lv.reps).any(|i| lv.defect_counter[i] >= thr)
        })
    }

    pub fn step(&mut self, measured: &Syndrome1D, state: &mut RepetitionState) -> u128 {
        let flips = self.advance(measured.bits);
        state.apply(flips);
        flips
    }

    pub(crate) fn advance(&mut self, s: u128) -> u128 {
        let ring = self.ring;
        self.age += 1;
        self.defect = s;
        let mut exec_left = 0u128;
        let mut exec_right = 0u128;
        let consts = self.consts;
        for lv in &mut self.levels {
            let k = lv.k;
            let uk = consts.working_period(k);
            let phase = self.age % consts.cycle(k);
            let reps = lv.reps;

            let arrive_from_left = ring.west(lv.cs_right) & reps;
            let arrive_from_right = ring.east(lv.cs_left) & reps;
            lv.cs_right = (ring.west(lv.cs_right) & !reps) | (s & reps);
            lv.cs_left = (ring.east(lv.cs_left) & !reps) | (s & reps);
            if (1..=uk).contains(&phase) {
                for i in Ones(reps) {
                    lv.defect_counter[i] += ((s >> i) & 1) as u32;
                    lv.from_left[i] += ((arrive_from_left >> i) & 1) as u32;
                    lv.from_right[i] += ((arrive_from_right >> i) & 1) as u32;
                }
            }

            if phase != 0 {
                lv.fs_left = (ring.east(lv.fs_left) & !reps) | (lv.fs_left & reps);
                lv.fs_right = (ring.west(lv.fs_right) & !reps) | (lv.fs_right & reps);
            }

            if phase == uk {
                lv.fs_left &= !reps;
                lv.fs_right &= !reps;
                for i in Ones(reps) {
                    let (c, nb) = consts.level_k_syndrome(k, lv.defect_counter[i], &[lv.from_left[i], lv.from_right[i]]);
                    let addr = if (lv.addr_l >> i) & 1 == 1 {
                        Loc1D::L
                    } else if (lv.addr_c >> i) & 1 == 1 {
                        Loc1D::C
                    } else {
                        Loc1D::R
                    };
                    match correct_1d(nb[0], c, nb[1], Some(addr)) {
                        Some(Dir1D::Left) => lv.fs_left |= 1 << i,
                        Some(Dir1D::Right) => lv.fs_right |= 1 << i,
                        None => {}
                    }
                }
            } else if phase == 0 {
                exec_left ^= lv.fs_left;
                exec_right ^= lv.fs_right;
                lv.cs_left = 0;
                lv.cs_right = 0;
                lv.fs_left = 0;
                lv.fs_right = 0;
                lv.defect_counter.iter_mut().for_each(|x| *x = 0);
                lv.from_left.iter_mut().for_each(|x| *x = 0);
                lv.from_right.iter_mut().for_each(|x| *x = 0);
            }
        }

        let [a_l, _, a_r] = self.level0;
        let dl = ring.west(s);
        let dr = ring.east(s);
        let free = !(exec_left | exec_right);
        let go_left = ((a_l & s & dl) | (a_r & s & (dl | !dr))) & free;
        let go_right = a_l & s & !dl & free;
        (ring.east(go_left | exec_left) ^ go_right ^ exec_right) & mask1(self.d())
    }

    /// Runs noiselessly until no defect and no pending higher-level action remains.
    /// Returns the final state, the steps taken and whether the step cap was hit.
    pub fn run_code_capacity(initial: &RepetitionState, cap: u64) -> Result<(RepetitionState, u64, bool)> {
        let mut state = *initial;
        let mut ca = Harrington1D::new(state.d())?;
        let mut steps = 0;
        loop {
            let s = state.syndrome();
            if s.is_empty() && !ca.has_pending_work() {
                return Ok((state, steps, false));
            }
            if steps >= cap {
                return Ok((state, steps, true));
            }
            ca.step(&s, &mut state);
            steps += 1;
        }
    }

    pub fn default_step_cap(d: usize) -> Result<u64> {
        let c = HierConstants::for_distance(d)?;
        Ok(50 * d as u64 * c.u.pow(c.m))
    }
}

/// Cardinal directions in NESW order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cardinal {
    N,
    E,
    S,
    W,
}

/// Defect bits of a Moore neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Moore {
    pub c: bool,
    pub n: bool,
    pub ne: bool,
    pub e: bool,
    pub se: bool,
    pub s: bool,
    pub sw: bool,
    pub w: bool,
    pub nw: bool,
}

impl Moore {
    fn any_cardinal(&self) -> bool {
        self.n || self.e || self.s || self.w
    }
}

const CENTER: (u8, u8) = (1, 1);

/// Level-independent 2D correction rule for a cell at colony address `(row, col)`.
///
/// Neighbouring defect pairs are resolved by one designated cell: crossing the
/// western or southern colony border first, otherwise the cell farther from the
/// colony centre. Diagonal pairs are resolved by the non-centre cell (the
/// southern one when neither is the centre) with a cardinal move. Lone defects
/// drift towards the colony centre.
pub fn correct_2d(nb: &Moore, addr: Option<(u8, u8)>) -> Option<Cardinal> {
    if !nb.c {
        return None;
    }
    let (ra, ca) = addr?;
    if nb.any_cardinal() {
        let west = nb.w && (ca == 0 || ca == 2);
        let east = nb.e && ca == 0;
        let south = nb.s && (ra == 0 || ra == 2);
        let north = nb.n && ra == 2;
        if west && ca == 0 {
            return Some(Cardinal::W);
        }
        if south && ra == 2 {
            return Some(Cardinal::S);
        }
        return [(north, Cardinal::N), (east, Cardinal::E), (south, Cardinal::S), (west, Cardinal::W)]
            .into_iter()
            .find_map(|(on, dir)| on.then_some(dir));
    }
    let me_center = (ra, ca) == CENTER;
    let diag = [
        (nb.ne, -1i8, 1i8, Cardinal::N),
        (nb.se, 1, 1, Cardinal::E),
        (nb.sw, 1, -1, Cardinal::S),
        (nb.nw, -1, -1, Cardinal::N),
    ];
    if diag.iter().any(|x| x.0) {
        if me_center {
            return None;
        }
        return diag.into_iter().find_map(|(on, dr, dc, dir)| {
            let partner = (
                (ra as i8 + dr).rem_euclid(3) as u8,
                (ca as i8 + dc).rem_euclid(3) as u8,
            );
            (on && (partner == CENTER || dr < 0)).then_some(dir)
        });
    }
    match (ra, ca) {
        (0, 0) | (1, 0) => Some(Cardinal::E),
        (0, 1) | (0, 2) => Some(Cardinal::S),
        (1, 2) => Some(Cardinal::W),
        (2, _) => Some(Cardinal::N),
        _ => None,
    }
}

/// Travel directions of count signals, as (row, column) steps.
pub const DIRS8: [(i32, i32); 8] = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)];

fn card_delta(c: Cardinal) -> (i32, i32) {
    match c {
        Cardinal::N => (-1, 0),
        Cardinal::E => (0, 1),
        Cardinal::S => (1, 0),
        Cardinal::W => (0, -1),
    }
}

const CARDS: [Cardinal; 4] = [Cardinal::N, Cardinal::E, Cardinal::S, Cardinal::W];

#[derive(Debug, Clone, PartialEq, Eq)]
struct Level2D {
    k: u32,
    reps: Vec<u64>,
    rep_cells: Vec<(usize, usize)>,
    /// Count signals by travel direction, indexed like [`DIRS8`].
    cs: [Vec<u64>; 8],
    /// Flip signals by travel direction in NESW order.
    fs: [Vec<u64>; 4],
    defect_counter: Vec<u32>,
    /// Counted arrivals per source direction, indexed like [`DIRS8`] by the neighbour's offset.
    sig_counter: Vec<[u32; 8]>,
}

/// Snapshot of one cell of [`Harrington2D`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierCell2D {
    pub defect: bool,
    pub age: u64,
    pub address: Vec<Option<(u8, u8)>>,
    pub levels: Vec<LevelCell2D>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCell2D {
    pub defect_counter: u32,
    pub count_sig: [bool; 8],
    pub sig_counter: [u32; 8],
    pub flip_sig: [bool; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Harrington2D {
    consts: HierConstants,
    ring: Ring<u64>,
    age: u64,
    defect: Vec<u64>,
    levels: Vec<Level2D>,
}

impl Harrington2D {
    pub fn new(d: usize) -> Result<Self> {
        let consts = HierConstants::for_distance(d)?;
        if d > 64 {
            return Err(Error::InvalidDistance {
                d,
                reason: "the 2D hierarchical decoder supports d <= 27",
            });
        }
        let levels = consts
            .levels()
            .map(|k| {
                let mut reps = vec![0u64; d];
                let mut rep_cells = Vec::new();
                for (r, row) in reps.iter_mut().enumerate() {
                    for c in 0..d {
                        if consts.address(k, r).is_some() && consts.address(k, c).is_some() {
                            *row |= 1 << c;
                            rep_cells.push((r, c));
                        }
                    }
                }
                Level2D {
                    k,
                    reps,
                    rep_cells,
                    cs: std::array::from_fn(|_| vec![0; d]),
                    fs: std::array::from_fn(|_| vec![0; d]),
                    defect_counter: vec![0; d * d],
                    sig_counter: vec![[0; 8]; d * d],
                }
            })
            .collect();
        Ok(Harrington2D {
            consts,
            ring: Ring::new(d),
            age: 0,
            defect: vec![0; d],
            levels,
        })
    }

    pub fn constants(&self) -> &HierConstants {
        &self.consts
    }

    pub fn d(&self) -> usize {
        self.ring.len()
    }

    pub fn cell(&self, r: usize, c: usize) -> HierCell2D {
        let d = self.d();
        let bit = |w: &Vec<u64>| (w[r] >> c) & 1 == 1;
        HierCell2D {
            defect: bit(&self.defect),
            age: self.age,
            address: (0..self.consts.m)
                .map(|k| Some((self.consts.address(k, r)?, self.consts.address(k, c)?)))
                .collect(),
            levels: self
                .levels
                .iter()
                .map(|lv| LevelCell2D {
                    defect_counter: lv.defect_counter[r * d + c],
                    count_sig: std::array::from_fn(|i| bit(&lv.cs[i])),
                    sig_counter: lv.sig_counter[r * d + c],
                    flip_sig: std::array::from_fn(|i| bit(&lv.fs[i])),
                })
                .collect(),
        }
    }

    pub fn count_signals_mut(&mut self) -> Vec<&mut Vec<u64>> {
        self.levels.iter_mut().flat_map(|lv| lv.cs.iter_mut()).collect()
    }

    pub fn flip_signals_mut(&mut self) -> Vec<&mut Vec<u64>> {
        self.levels.iter_mut().flat_map(|lv| lv.fs.iter_mut()).collect()
    }

    pub fn has_pending_work(&self) -> bool {
        let d = self.d();
        self.levels.iter().any(|lv| {
            let thr = self.consts.center_threshold(lv.k);
            lv.fs.iter().any(|w| w.iter().any(|&x| x != 0))
                || lv.rep_cells.iter().any(|&(r, c)| lv.defect_counter[r * d + c] >= thr)
        })
    }

    /// `out[r]` holds bit `c` of `rows[r - dr]` shifted by `dc` columns.
    fn shift(&self, rows: &[u64], dr: i32, dc: i32) -> Vec<u64> {
        let d = self.d() as i32;
        (0..d)
            .map(|r| {
                let src = rows[(r - dr).rem_euclid(d) as usize];
                match dc {
                    1 => self.ring.west(src),
                    -1 => self.ring.east(src),
                    _ => src,
                }
            })
            .collect()
    }

    fn moore(s: &[u64], d: usize, r: usize, c: usize) -> Moore {
        let g = |dr: i32, dc: i32| {
            let rr = (r as i32 + dr).rem_euclid(d as i32) as usize;
            let cc = (c as i32 + dc).rem_euclid(d as i32) as usize;
            (s[rr] >> cc) & 1 == 1
        };
        Moore {
            c: g(0, 0),
            n: g(-1, 0),
            ne: g(-1, 1),
            e: g(0, 1),
            se: g(1, 1),
            s: g(1, 0),
            sw: g(1, -1),
            w: g(0, -1),
            nw: g(-1, -1),
        }
    }

    pub fn step(&mut self, measured: &Syndrome2D, state: &mut ToricState) -> (Vec<u64>, Vec<u64>) {
        let (fh, fv) = self.advance(&measured.rows);
        for r in 0..self.d() {
            state.apply_h_row(r, fh[r]);
            state.apply_v_row(r, fv[r]);
        }
        (fh, fv)
    }

    pub(crate) fn advance(&mut self, s: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let d = self.d();
        self.age += 1;
        self.defect = s.to_vec();
        let consts = self.consts;
        let mut exec: [Vec<u64>; 4] = std::array::from_fn(|_| vec![0u64; d]);
        let mut levels = std::mem::take(&mut self.levels);
        for lv in &mut levels {
            let k = lv.k;
            let uk = consts.working_period(k);
            let phase = self.age % consts.cycle(k);
            let counting = (1..=uk).contains(&phase);
            for (i, &(dr, dc)) in DIRS8.iter().enumerate() {
                let moved = self.shift(&lv.cs[i], dr, dc);
                if counting {
                    // a signal travelling along (dr, dc) comes from the neighbour at (-dr, -dc)
                    let src = (i + 4) % 8;
                    for &(r, c) in &lv.rep_cells {
                        lv.sig_counter[r * d + c][src] += ((moved[r] >> c) & 1) as u32;
                    }
                }
                for r in 0..d {
                    lv.cs[i][r] = (moved[r] & !lv.reps[r]) | (s[r] & lv.reps[r]);
                }
            }
            if counting {
                for &(r, c) in &lv.rep_cells {
                    lv.defect_counter[r * d + c] += ((s[r] >> c) & 1) as u32;
                }
            }
            for (i, &card) in CARDS.iter().enumerate().filter(|_| phase != 0) {
                let (dr, dc) = card_delta(card);
                let moved = self.shift(&lv.fs[i], dr, dc);
                for ((f, m), rep) in lv.fs[i].iter_mut().zip(&moved).zip(&lv.reps) {
                    *f = (m & !rep) | (*f & rep);
                }
            }
            if phase == uk {
                for w in lv.fs.iter_mut() {
                    w.iter_mut().zip(&lv.reps).for_each(|(x, m)| *x &= !m);
                }
                for &(r, c) in &lv.rep_cells {
                    let cnt = lv.sig_counter[r * d + c];
                    let (center, nb) = consts.level_k_syndrome(k, lv.defect_counter[r * d + c], &cnt);
                    let moore = Moore {
                        c: center,
                        n: nb[0],
                        ne: nb[1],
                        e: nb[2],
                        se: nb[3],
                        s: nb[4],
                        sw: nb[5],
                        w: nb[6],
                        nw: nb[7],
                    };
                    let addr = consts.address(k, r).zip(consts.address(k, c));
                    if let Some(dir) = correct_2d(&moore, addr) {
                        lv.fs[dir as usize][r] |= 1 << c;
                    }
                }
            } else if phase == 0 {
                for (e, f) in exec.iter_mut().zip(&lv.fs) {
                    e.iter_mut().zip(f).for_each(|(x, y)| *x ^= y);
                }
                for w in lv.cs.iter_mut().chain(lv.fs.iter_mut()) {
                    w.iter_mut().for_each(|x| *x = 0);
                }
                lv.defect_counter.iter_mut().for_each(|x| *x = 0);
                lv.sig_counter.iter_mut().for_each(|x| *x = [0; 8]);
            }
        }
        self.levels = levels;

        let mut fh = vec![0u64; d];
        let mut fv = vec![0u64; d];
        let busy: Vec<u64> = (0..d).map(|r| exec.iter().fold(0, |a, w| a | w[r])).collect();
        for (r, &row) in s.iter().enumerate() {
            for c in Ones(row & !busy[r]) {
                let nb = Self::moore(s, d, r, c);
                let addr = Some(((r % 3) as u8, (c % 3) as u8));
                if let Some(dir) = correct_2d(&nb, addr) {
                    flip_toward(&mut fh, &mut fv, d, r, 1 << c, dir, &self.ring);
                }
            }
        }
        for (rows, &card) in exec.iter().zip(CARDS.iter()) {
            for (r, &m) in rows.iter().enumerate() {
                if m != 0 {
                    flip_toward(&mut fh, &mut fv, d, r, m, card, &self.ring);
                }
            }
        }
        (fh, fv)
    }

    pub fn run_code_capacity(initial: &ToricState, cap: u64) -> Result<(ToricState, u64, bool)> {
        let mut state = initial.clone();
        let mut ca = Harrington2D::new(state.d())?;
        let mut steps = 0;
        loop {
            let s = state.syndrome();
            if s.is_empty() && !ca.has_pending_work() {
                return Ok((state, steps, false));
            }
            if steps >= cap {
                return Ok((state, steps, true));
            }
            ca.step(&s, &mut state);
            steps += 1;
        }
    }
}

/// Applies, for every cell in `cols` of row `r`, a flip of its qubit on side `dir`.
fn flip_toward(fh: &mut [u64], fv: &mut [u64], d: usize, r: usize, cols: u64, dir: Cardinal, ring: &Ring<u64>) {
    match dir {
        Cardinal::N => fh[r] ^= cols,
        Cardinal::S => fh[(r + 1) % d] ^= cols,
        Cardinal::W => fv[r] ^= cols,
        Cardinal::E => fv[r] ^= ring.west(cols),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_thresholds() {
        let c = HierConstants::for_distance(27).unwrap();
        assert_eq!(c.m, 3);
        assert_eq!(c.levels().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(c.center_threshold(1), 9);
        assert_eq!(c.neighbor_threshold(1), 4);
        assert_eq!(c.center_threshold(2), 90);
        assert_eq!(c.cycle(1), 13);
        assert!(c.f_n < c.f_c);
        assert!(HierConstants::for_distance(5).is_err());
        assert!(HierConstants::for_distance(1).is_err());
    }

    #[test]
    fn level_k_syndrome_examples() {
        let c = HierConstants::for_distance(9).unwrap();
        assert_eq!(c.level_k_syndrome(1, 9, &[3, 4]), (true, vec![false, true]));
        assert_eq!(c.level_k_syndrome(1, 0, &[0, 0]), (false, vec![false, false]));
    }

    #[test]
    fn addresses() {
        let c = HierConstants::for_distance(27).unwrap();
        let reps1: Vec<_> = (0..27).filter(|&i| c.address(1, i).is_some()).collect();
        assert_eq!(reps1, vec![1, 4, 7, 10, 13, 16, 19, 22, 25]);
        assert_eq!(c.address(1, 4), Some(1));
        let reps2: Vec<_> = (0..27).filter(|&i| c.address(2, i).is_some()).collect();
        assert_eq!(reps2, vec![4, 13, 22]);
        assert_eq!(c.address(2, 13), Some(1));
    }

    #[test]
    fn correct_1d_examples() {
        assert_eq!(correct_1d(true, true, false, Some(Loc1D::L)), Some(Dir1D::Left));
        assert_eq!(correct_1d(false, true, false, Some(Loc1D::L)), Some(Dir1D::Right));
        for a in [Loc1D::L, Loc1D::C, Loc1D::R] {
            assert_eq!(correct_1d(true, false, true, Some(a)), None);
        }
        assert_eq!(correct_1d(false, true, true, Some(Loc1D::R)), None);
        assert_eq!(correct_1d(false, true, false, Some(Loc1D::C)), None);
    }

    #[test]
    fn single_error_fixed_quickly() {
        for d in [3, 9, 27] {
            for q in 0..d {
                let mut st = RepetitionState::from_bits(d, 1 << q).unwrap();
                let mut ca = Harrington1D::new(d).unwrap();
                for _ in 0..2 {
                    let s = st.syndrome();
                    ca.step(&s, &mut st);
                }
                assert_eq!(st.weight(), 0, "d={d} q={q}");
            }
        }
    }

    #[test]
    fn block_majority() {
        // qubits 1, 2, 3 lie between the centres at cells 1 and 4
        for pattern in 0u128..8 {
            let mut st = RepetitionState::from_bits(9, pattern << 1).unwrap();
            let mut ca = Harrington1D::new(9).unwrap();
            for _ in 0..3 {
                let s = st.syndrome();
                ca.step(&s, &mut st);
            }
            let want = if pattern.count_ones() >= 2 { 0b111 << 1 } else { 0 };
            assert_eq!(st.bits(), want, "pattern {pattern:03b}");
        }
    }

    #[test]
    fn correct_2d_rules() {
        let only = |f: fn(&mut Moore)| {
            let mut m = Moore {
                c: true,
                ..Default::default()
            };
            f(&mut m);
            m
        };
        let w = only(|m| m.w = true);
        assert_eq!(correct_2d(&w, Some((1, 0))), Some(Cardinal::W));
        assert_eq!(correct_2d(&w, Some((1, 1))), None);
        let e = only(|m| m.e = true);
        assert_eq!(correct_2d(&e, Some((1, 0))), Some(Cardinal::E));
        assert_eq!(correct_2d(&e, Some((1, 2))), None);
        let s = only(|m| m.s = true);
        assert_eq!(correct_2d(&s, Some((2, 1))), Some(Cardinal::S));
        assert_eq!(correct_2d(&s, Some((1, 1))), None);
        let ne = only(|m| m.ne = true);
        assert_eq!(correct_2d(&ne, Some((2, 0))), Some(Cardinal::N));
        assert_eq!(correct_2d(&ne, Some((1, 1))), None);
        let alone = only(|_| {});
        assert_eq!(correct_2d(&alone, Some((0, 0))), Some(Cardinal::E));
        assert_eq!(correct_2d(&alone, Some((2, 2))), Some(Cardinal::N));
        assert_eq!(correct_2d(&alone, Some((1, 1))), None);
        assert_eq!(correct_2d(&Moore::default(), Some((0, 0))), None);
    }

    #[test]
    fn isolated_2d_error_fixed_within_two_steps() {
        for d in [3, 9] {
            for r in 0..d {
                for c in 0..d {
                    for hor in [true, false] {
                        let mut st = ToricState::new(d).unwrap();
                        if hor {
                            st.flip_h(r, c)
                        } else {
                            st.flip_v(r, c)
                        }
                        let mut ca = Harrington2D::new(d).unwrap();
                        for _ in 0..2 {
                            let s = st.syndrome();
                            ca.step(&s, &mut st);
                        }
                        assert!(st.syndrome().is_empty(), "d={d} {hor} {r} {c}");
                        assert!(!st.cut_parity(crate::lattice::Direction::Horizontal));
                        assert!(!st.cut_parity(crate::lattice::Direction::Vertical));
                    }
                }
            }
        }
    }

    fn idle(ca: &mut Harrington1D, n: usize) -> u128 {
        let mut st = RepetitionState::new(ca.d()).unwrap();
        let mut last = 0;
        for _ in 0..n {
            last = ca.step(&st.syndrome(), &mut st);
        }
        last
    }

    #[test]
    fn level_one_chain_flips_three_qubits() {
        let mut ca = Harrington1D::new(9).unwrap();
        assert_eq!(idle(&mut ca, 10), 0);
        *ca.flip_signals_mut()[0].0 |= 1 << 4;
        assert_eq!(idle(&mut ca, 2), 0);
        assert_eq!(ca.cell(2).levels[0].flip_sig, [true, false]);
        assert_eq!(idle(&mut ca, 1), 0b1110);
        assert!(!ca.has_pending_work());
    }

    #[test]
    fn opposite_chains_cancel() {
        let mut ca = Harrington1D::new(9).unwrap();
        idle(&mut ca, 10);
        {
            let mut fs = ca.flip_signals_mut();
            *fs[0].0 |= 1 << 4;
            *fs[0].1 |= 1 << 1;
        }
        assert_eq!(idle(&mut ca, 3), 0);
    }

    #[test]
    fn memory_grows_with_levels() {
        let sizes: Vec<_> = [3, 9, 27]
            .iter()
            .map(|&d| {
                let c = Harrington1D::new(d).unwrap().cell(0);
                let c2 = Harrington2D::new(d).unwrap().cell(0, 0);
                assert_eq!(c.levels.len(), c2.levels.len());
                (c.address.len(), c.levels.len())
            })
            .collect();
        assert_eq!(sizes, vec![(1, 0), (2, 1), (3, 2)]);
    }

    #[test]
    fn quiet_lattice_stays_quiet() {
        let mut ca = Harrington2D::new(9).unwrap();
        let mut st = ToricState::new(9).unwrap();
        for _ in 0..40 {
            let (fh, fv) = ca.step(&st.syndrome(), &mut st);
            assert!(fh.iter().chain(&fv).all(|&x| x == 0));
        }
        assert!(!ca.has_pending_work());
    }

    #[test]
    fn border_pair_annihilated_across_border() {
        let mut st = ToricState::new(9).unwrap();
        st.flip_v(4, 3);
        assert_eq!(st.syndrome().defects(), vec![(4, 2), (4, 3)]);
        let mut ca = Harrington2D::new(9).unwrap();
        let (_, fv) = ca.step(&st.syndrome(), &mut st);
        assert_eq!(fv[4], 1 << 3);
        assert!(st.is_zero());
    }
}
