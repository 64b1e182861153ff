//! Per-node update functions: Boolean lookup tables or signed threshold units.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;
use crate::topology::Topology;

/// Output column of a Boolean function of `k` inputs. Entry `x` is the output
/// for the input configuration whose bit `j` is the state of the node's
/// `j`-th source.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LookupTable {
    k: usize,
    bits: Vec<u64>,
}

/// Largest supported fan-in for a lookup table (2^24 entries).
pub const MAX_LUT_INPUTS: usize = 24;

impl LookupTable {
    pub fn zeros(k: usize) -> Self {
        assert!(k <= MAX_LUT_INPUTS, "fan-in {k} too large for a lookup table");
        LookupTable { k, bits: vec![0; (1usize << k).div_ceil(64)] }
    }

    pub fn from_fn(k: usize, f: impl Fn(usize) -> bool) -> Self {
        let mut t = LookupTable::zeros(k);
        for x in 0..t.len() {
            t.set(x, f(x));
        }
        t
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if !bits.len().is_power_of_two() {
            return Err(invalid(format!("lookup table length {} is not a power of two", bits.len())));
        }
        let k = bits.len().trailing_zeros() as usize;
        Ok(LookupTable::from_fn(k, |x| bits[x]))
    }

    /// Constant-output table with no inputs.
    pub fn constant(value: bool) -> Self {
        LookupTable::from_fn(0, |_| value)
    }

    pub fn n_inputs(&self) -> usize {
        self.k
    }

    /// Number of entries, `2^k`.
    pub fn len(&self) -> usize {
        1 << self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        (self.bits[x >> 6] >> (x & 63)) & 1 == 1
    }

    pub fn set(&mut self, x: usize, value: bool) {
        assert!(x < self.len());
        let m = 1u64 << (x & 63);
        if value {
            self.bits[x >> 6] |= m;
        } else {
            self.bits[x >> 6] &= !m;
        }
    }

    pub fn flip(&mut self, x: usize) {
        assert!(x < self.len());
        self.bits[x >> 6] ^= 1u64 << (x & 63);
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The dual function `x -> !f(!x)`.
    pub fn dual(&self) -> Self {
        let mask = self.len() - 1;
        LookupTable::from_fn(self.k, |x| !self.get(!x & mask))
    }

    /// Lower-case hex of the table read as an integer, entry 0 least
    /// significant; `ceil(2^k / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len().div_ceil(4);
        (0..digits)
            .rev()
            .map(|d| {
                let nib = (0..4).fold(0u32, |acc, b| {
                    let x = d * 4 + b;
                    acc | (u32::from(x < self.len() && self.get(x)) << b)
                });
                char::from_digit(nib, 16).expect("nibble")
            })
            .collect()
    }

    pub fn from_hex(k: usize, hex: &str) -> Result<Self> {
        if k > MAX_LUT_INPUTS {
            return Err(invalid(format!("fan-in {k} too large for a lookup table")));
        }
        let mut t = LookupTable::zeros(k);
        let digits = t.len().div_ceil(4);
        if hex.len() != digits {
            return Err(invalid(format!("expected {digits} hex digits for k={k}, got {}", hex.len())));
        }
        for (pos, c) in hex.chars().enumerate() {
            let nib = c.to_digit(16).ok_or_else(|| invalid(format!("bad hex digit {c:?}")))?;
            let d = digits - 1 - pos;
            for b in 0..4 {
                let x = d * 4 + b;
                if nib >> b & 1 == 1 {
                    if x >= t.len() {
                        return Err(invalid("hex value wider than the lookup table"));
                    }
                    t.set(x, true);
                }
            }
        }
        Ok(t)
    }
}

/// Output of a threshold unit whose weighted input sum is exactly zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ZeroSign {
    #[default]
    Negative,
    Positive,
    /// Keep the node's current spin.
    Hold,
}

impl ZeroSign {
    pub fn as_str(self) -> &'static str {
        match self {
            ZeroSign::Negative => "-1",
            ZeroSign::Positive => "+1",
            ZeroSign::Hold => "hold",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "-1" | "neg" | "negative" => Ok(ZeroSign::Negative),
            "+1" | "1" | "pos" | "positive" => Ok(ZeroSign::Positive),
            "hold" => Ok(ZeroSign::Hold),
            other => Err(invalid(format!("unknown sgn(0) convention {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThresholdRules {
    /// `c_ij` in {+1, -1}, aligned with each node's in-edge list. Absent
    /// edges carry no weight.
    pub weights: Vec<Vec<i8>>,
    /// Additive threshold `h`.
    pub h: i32,
    pub zero: ZeroSign,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleSet {
    Boolean(Vec<LookupTable>),
    Threshold(ThresholdRules),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Boolean,
    Threshold,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Boolean => "boolean",
            RuleKind::Threshold => "threshold",
        }
    }
}

impl RuleSet {
    pub fn kind(&self) -> RuleKind {
        match self {
            RuleSet::Boolean(_) => RuleKind::Boolean,
            RuleSet::Threshold(_) => RuleKind::Threshold,
        }
    }

    pub fn n_nodes(&self) -> usize {
        match self {
            RuleSet::Boolean(t) => t.len(),
            RuleSet::Threshold(r) => r.weights.len(),
        }
    }

    /// Checks per-node table and weight sizes against `topology`.
    pub fn check(&self, topology: &Topology) -> Result<()> {
        let n = topology.n_nodes();
        if self.n_nodes() != n {
            return Err(Error::Inconsistent(format!("{} rules for {n} nodes", self.n_nodes())));
        }
        match self {
            RuleSet::Boolean(tables) => {
                for (i, t) in tables.iter().enumerate() {
                    if t.n_inputs() != topology.in_degree(i) {
                        return Err(Error::Inconsistent(format!(
                            "node {i}: table has {} inputs, in-degree is {}",
                            t.n_inputs(),
                            topology.in_degree(i)
                        )));
                    }
                }
            }
            RuleSet::Threshold(r) => {
                for (i, w) in r.weights.iter().enumerate() {
                    if w.len() != topology.in_degree(i) {
                        return Err(Error::Inconsistent(format!(
                            "node {i}: {} weights, in-degree is {}",
                            w.len(),
                            topology.in_degree(i)
                        )));
                    }
                    if w.iter().any(|&c| c != 1 && c != -1) {
                        return Err(Error::Inconsistent(format!("node {i}: weights must be +1 or -1")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Random lookup tables: every entry is 1 with probability `bias`.
/// Input-less nodes get a one-entry constant table.
pub fn sample_boolean_rules(topology: &Topology, bias: f64, stream: &RandomStream) -> Result<RuleSet> {
    if !(0.0..=1.0).contains(&bias) {
        return Err(invalid(format!("bias {bias} outside [0,1]")));
    }
    let mut rng = stream.rng();
    Ok(RuleSet::Boolean(
        (0..topology.n_nodes())
            .map(|i| sample_table(topology.in_degree(i), bias, &mut rng))
            .collect::<Result<_>>()?,
    ))
}

pub(crate) fn sample_table<R: Rng + ?Sized>(k: usize, bias: f64, rng: &mut R) -> Result<LookupTable> {
    if k > MAX_LUT_INPUTS {
        return Err(invalid(format!("fan-in {k} too large for a lookup table")));
    }
    let mut t = LookupTable::zeros(k);
    if bias == 0.5 {
        let len = t.len();
        for (w, word) in t.bits.iter_mut().enumerate() {
            let live = (len - w * 64).min(64);
            *word = rng.gen::<u64>() & if live == 64 { !0 } else { (1u64 << live) - 1 };
        }
    } else {
        for x in 0..t.len() {
            if rng.gen_bool(bias) {
                t.set(x, true);
            }
        }
    }
    Ok(t)
}

/// Weights `+1`/`-1` with equal probability, threshold `h = 0`.
pub fn sample_threshold_rules(topology: &Topology, zero: ZeroSign, stream: &RandomStream) -> RuleSet {
    let mut rng = stream.rng();
    let weights = (0..topology.n_nodes())
        .map(|i| (0..topology.in_degree(i)).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
        .collect();
    RuleSet::Threshold(ThresholdRules { weights, h: 0, zero })
}
