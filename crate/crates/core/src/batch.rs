//! Bit-sliced engine: 64 independent trajectories of one network advance
//! together, one `u64` per node with bit `l` holding lane `l`.
//!
//! Lookup tables are evaluated as multiplexer trees over the input words and
//! threshold units with a vertical (bit-sliced) counter, so every operation
//! touches all 64 lanes at once.

use crate::dynamics::threshold_output;
use crate::error::{Error, Result};
use crate::rules::{RuleSet, ZeroSign};
use crate::state::NetworkState;
use crate::topology::Topology;

pub const LANES: usize = 64;

/// Fan-in above which lookup tables are evaluated lane by lane instead of by
/// a 2^k multiplexer tree.
const MUX_MAX_INPUTS: usize = 10;

#[derive(Clone, Debug)]
enum Kernel {
    Boolean { lut_offsets: Vec<usize>, lut_words: Vec<u64> },
    Threshold { negate: Vec<u64>, h: i32, zero: ZeroSign },
}

/// Flattened, validated network ready for lane-parallel updates.
#[derive(Clone, Debug)]
pub struct CompiledNetwork {
    offsets: Vec<usize>,
    sources: Vec<u32>,
    kernel: Kernel,
}

impl CompiledNetwork {
    pub fn new(topology: &Topology, rules: &RuleSet) -> Result<Self> {
        rules.check(topology)?;
        let n = topology.n_nodes();
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter("network too large".into()));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut sources = Vec::with_capacity(topology.n_links());
        offsets.push(0);
        for i in 0..n {
            sources.extend(topology.in_edges(i).iter().map(|&s| s as u32));
            offsets.push(sources.len());
        }
        let kernel = match rules {
            RuleSet::Boolean(tables) => {
                let mut lut_offsets = Vec::with_capacity(n + 1);
                let mut lut_words = Vec::new();
                lut_offsets.push(0);
                for t in tables {
                    lut_words.extend_from_slice(t.words());
                    lut_offsets.push(lut_words.len());
                }
                Kernel::Boolean { lut_offsets, lut_words }
            }
            RuleSet::Threshold(r) => Kernel::Threshold {
                negate: r.weights.iter().flatten().map(|&c| if c < 0 { !0 } else { 0 }).collect(),
                h: r.h,
                zero: r.zero,
            },
        };
        Ok(CompiledNetwork { offsets, sources, kernel })
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// One synchronous update of all lanes.
    pub fn step(&self, cur: &[u64], next: &mut [u64], scratch: &mut Vec<u64>) {
        let n = self.n_nodes();
        assert_eq!(cur.len(), n);
        assert_eq!(next.len(), n);
        match &self.kernel {
            Kernel::Boolean { lut_offsets, lut_words } => {
                for i in 0..n {
                    let srcs = &self.sources[self.offsets[i]..self.offsets[i + 1]];
                    let lut = &lut_words[lut_offsets[i]..lut_offsets[i + 1]];
                    next[i] = if srcs.len() <= 6 {
                        let mut x = [0u64; 6];
                        for (xj, &s) in x.iter_mut().zip(srcs) {
                            *xj = cur[s as usize];
                        }
                        mux_word(&x[..srcs.len()], lut[0])
                    } else {
                        scratch.clear();
                        scratch.extend(srcs.iter().map(|&s| cur[s as usize]));
                        eval_lut(scratch, lut)
                    };
                }
            }
            Kernel::Threshold { negate, h, zero } => {
                for i in 0..n {
                    let (a, b) = (self.offsets[i], self.offsets[i + 1]);
                    scratch.clear();
                    scratch.extend(self.sources[a..b].iter().zip(&negate[a..b]).map(|(&s, m)| cur[s as usize] ^ m));
                    next[i] = eval_threshold(scratch, *h, *zero, cur[i]);
                }
            }
        }
    }
}

#[inline]
fn lut_bit(lut: &[u64], x: usize) -> bool {
    (lut[x >> 6] >> (x & 63)) & 1 == 1
}

#[inline]
fn splat(b: bool) -> u64 {
    0u64.wrapping_sub(u64::from(b))
}

/// Multiplexer tree for tables of at most 6 inputs (one word). Entries are
/// folded pairwise, input 0 first; the first fold reads table bit pairs
/// directly.
#[inline]
fn mux_word(inputs: &[u64], lut: u64) -> u64 {
    let k = inputs.len();
    if k == 0 {
        return splat(lut & 1 == 1);
    }
    let width = 1u32 << k;
    let mask = if width == 64 { !0 } else { (1u64 << width) - 1 };
    let bits = lut & mask;
    if bits == 0 {
        return 0;
    }
    if bits == mask {
        return !0;
    }
    let x0 = inputs[0];
    let pairs = [0, !x0, x0, !0];
    let pair = |e: usize| pairs[((bits >> (2 * e)) & 3) as usize];
    let fold = |lo: u64, hi: u64, x: u64| lo ^ (x & (lo ^ hi));
    match k {
        1 => return pair(0),
        2 => return fold(pair(0), pair(1), inputs[1]),
        3 => {
            let x1 = inputs[1];
            return fold(fold(pair(0), pair(1), x1), fold(pair(2), pair(3), x1), inputs[2]);
        }
        _ => {}
    }
    let mut v = [0u64; 32];
    let mut len = (width / 2) as usize;
    for (e, slot) in v.iter_mut().enumerate().take(len) {
        *slot = pairs[((bits >> (2 * e)) & 3) as usize];
    }
    for &x in &inputs[1..] {
        len /= 2;
        for e in 0..len {
            let (lo, hi) = (v[2 * e], v[2 * e + 1]);
            v[e] = lo ^ (x & (lo ^ hi));
        }
    }
    v[0]
}

fn eval_lut(inputs: &[u64], lut: &[u64]) -> u64 {
    let k = inputs.len();
    if k <= 6 {
        return mux_word(inputs, lut[0]);
    }
    if k <= MUX_MAX_INPUTS {
        // One 6-input tree per table word, then fold the remaining inputs.
        let mut v: Vec<u64> = lut.iter().map(|&w| mux_word(&inputs[..6], w)).collect();
        for &x in &inputs[6..] {
            let half = v.len() / 2;
            for e in 0..half {
                let (lo, hi) = (v[2 * e], v[2 * e + 1]);
                v[e] = lo ^ (x & (lo ^ hi));
            }
            v.truncate(half);
        }
        v[0]
    } else {
        let mut out = 0u64;
        for lane in 0..LANES {
            let x = inputs.iter().enumerate().fold(0usize, |acc, (j, w)| acc | (((w >> lane) & 1) as usize) << j);
            out |= u64::from(lut_bit(lut, x)) << lane;
        }
        out
    }
}

/// `inputs` already hold per-input agreement bits (spin times weight > 0).
/// Positive sum iff `2 * agree - k + h > 0`.
fn eval_threshold(inputs: &[u64], h: i32, zero: ZeroSign, own: u64) -> u64 {
    let k = inputs.len() as i64;
    let m = k - i64::from(h);
    if m < 0 {
        return !0;
    }
    if m > 2 * k {
        return 0;
    }
    let mut counter = [0u64; 24];
    let bits = (usize::BITS - inputs.len().leading_zeros()) as usize;
    for &a in inputs {
        let mut carry = a;
        for c in counter.iter_mut().take(bits) {
            let t = *c & carry;
            *c ^= carry;
            carry = t;
            if carry == 0 {
                break;
            }
        }
    }
    let counter = &counter[..bits];
    let positive = at_least(counter, (m / 2 + 1) as u64);
    let tie = if m % 2 == 0 { equals(counter, (m / 2) as u64) } else { 0 };
    let tie_out = match zero {
        ZeroSign::Negative => 0,
        ZeroSign::Positive => !0,
        ZeroSign::Hold => own,
    };
    positive | (tie & tie_out)
}

fn at_least(counter: &[u64], t: u64) -> u64 {
    if counter.len() < 64 && t >> counter.len() != 0 {
        return 0;
    }
    let mut gt = 0u64;
    let mut eq = !0u64;
    for (b, &c) in counter.iter().enumerate().rev() {
        if (t >> b) & 1 == 1 {
            eq &= c;
        } else {
            gt |= eq & c;
            eq &= !c;
        }
    }
    gt | eq
}

fn equals(counter: &[u64], t: u64) -> u64 {
    if counter.len() < 64 && t >> counter.len() != 0 {
        return 0;
    }
    counter
        .iter()
        .enumerate()
        .fold(!0u64, |acc, (b, &c)| acc & if (t >> b) & 1 == 1 { c } else { !c })
}

/// Node-major lane storage: `words[i]` bit `l` is node `i` in lane `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaneState {
    words: Vec<u64>,
}

impl LaneState {
    pub fn zeros(n: usize) -> Self {
        LaneState { words: vec![0; n] }
    }

    /// Loads up to 64 states into lanes `0..states.len()`.
    pub fn from_states(states: &[NetworkState]) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidParameter("at least one state required".into()));
        };
        if states.len() > LANES {
            return Err(Error::InvalidParameter(format!("{} states exceed {LANES} lanes", states.len())));
        }
        let mut lanes = LaneState::zeros(first.len());
        for (l, s) in states.iter().enumerate() {
            lanes.set_lane(l, s)?;
        }
        Ok(lanes)
    }

    pub fn n_nodes(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn set_lane(&mut self, lane: usize, state: &NetworkState) -> Result<()> {
        if state.len() != self.words.len() {
            return Err(Error::LengthMismatch { left: state.len(), right: self.words.len() });
        }
        assert!(lane < LANES);
        let m = 1u64 << lane;
        for (i, w) in self.words.iter_mut().enumerate() {
            if state.get(i) {
                *w |= m;
            } else {
                *w &= !m;
            }
        }
        Ok(())
    }

    pub fn lane(&self, lane: usize) -> NetworkState {
        assert!(lane < LANES);
        let bits: Vec<bool> = self.words.iter().map(|w| (w >> lane) & 1 == 1).collect();
        NetworkState::from_bits(&bits)
    }

    /// Flips node `node` in every lane selected by `lanes`.
    pub fn flip(&mut self, node: usize, lanes: u64) {
        self.words[node] ^= lanes;
    }
}

/// Owns the double buffer for repeated lane-parallel updates.
pub struct LaneRunner<'a> {
    net: &'a CompiledNetwork,
    cur: Vec<u64>,
    next: Vec<u64>,
    scratch: Vec<u64>,
}

impl<'a> LaneRunner<'a> {
    pub fn new(net: &'a CompiledNetwork, init: LaneState) -> Result<Self> {
        if init.n_nodes() != net.n_nodes() {
            return Err(Error::LengthMismatch { left: init.n_nodes(), right: net.n_nodes() });
        }
        let n = init.n_nodes();
        Ok(LaneRunner { net, cur: init.words, next: vec![0; n], scratch: Vec::with_capacity(16) })
    }

    pub fn step(&mut self) {
        self.net.step(&self.cur, &mut self.next, &mut self.scratch);
        std::mem::swap(&mut self.cur, &mut self.next);
    }

    pub fn run(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.cur
    }

    pub fn state(&self) -> LaneState {
        LaneState { words: self.cur.clone() }
    }
}

/// Scalar evaluation of one threshold node, shared with tests of the
/// bit-sliced counter.
#[allow(dead_code)]
pub(crate) fn threshold_scalar(agree: usize, k: usize, h: i32, zero: ZeroSign, own: bool) -> bool {
    threshold_output(2 * agree as i32 - k as i32 + h, zero, own)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_counter_matches_scalar() {
        for k in 0..=13usize {
            for h in -3..=3 {
                for zero in [ZeroSign::Negative, ZeroSign::Positive, ZeroSign::Hold] {
                    // Lane l carries agreement pattern l over the k inputs (wrapping).
                    let inputs: Vec<u64> = (0..k)
                        .map(|j| (0..64).fold(0u64, |w, l| w | (((l * 37 + 11) >> (j % 6)) as u64 & 1) << l))
                        .collect();
                    let own = 0xAAAA_5555_F0F0_0F0Fu64;
                    let got = eval_threshold(&inputs, h, zero, own);
                    for l in 0..64 {
                        let agree = inputs.iter().filter(|w| (*w >> l) & 1 == 1).count();
                        let want = threshold_scalar(agree, k, h, zero, (own >> l) & 1 == 1);
                        assert_eq!((got >> l) & 1 == 1, want, "k={k} h={h} {zero:?} lane {l}");
                    }
                }
            }
        }
    }

    #[test]
    fn mux_matches_direct_lookup() {
        for k in 0..=12usize {
            let lut: Vec<u64> = (0..(1usize << k).div_ceil(64))
                .map(|i| (i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x1234)
                .collect();
            let inputs: Vec<u64> =
                (0..k).map(|j| (j as u64 + 3).wrapping_mul(0xd1b5_4a32_d192_ed03).rotate_left(j as u32)).collect();
            let got = eval_lut(&inputs, &lut);
            for l in 0..64 {
                let x = (0..k).fold(0usize, |a, j| a | (((inputs[j] >> l) & 1) as usize) << j);
                assert_eq!((got >> l) & 1 == 1, lut_bit(&lut, x), "k={k} lane {l}");
            }
        }
    }

    #[test]
    fn lanes_round_trip() {
        let a = NetworkState::from_bitstring("10110").unwrap();
        let b = NetworkState::from_bitstring("01101").unwrap();
        let mut ls = LaneState::from_states(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(ls.lane(0), a);
        assert_eq!(ls.lane(1), b);
        ls.flip(2, 0b10);
        assert_eq!(ls.lane(1).to_string(), "01001");
        assert!(LaneState::from_states(&[]).is_err());
    }
}
