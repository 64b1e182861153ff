//! Binary network states.
//!
//! Boolean networks read a bit as 0/1. Threshold networks read bit 1 as spin
//! +1 and bit 0 as spin -1, so damage is always a bit-level Hamming distance.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Fixed-length bit vector, one bit per node, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NetworkState {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl NetworkState {
    pub fn zeros(len: usize) -> Self {
        NetworkState { words: vec![0; words_for(len)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = NetworkState { words: vec![!0; words_for(len)], len };
        s.clear_tail();
        s
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = NetworkState::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Parses a string of `0`/`1` characters, node 0 first.
    pub fn from_bitstring(text: &str) -> Result<Self> {
        let bits = text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!("not a bit: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(NetworkState::from_bits(&bits))
    }

    /// Builds a state from spins; `+1` maps to bit 1, anything else to bit 0.
    pub fn from_spins(spins: &[i8]) -> Self {
        let bits: Vec<bool> = spins.iter().map(|&s| s > 0).collect();
        NetworkState::from_bits(&bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "node {i} out of range ({})", self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "node {i} out of range ({})", self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "node {i} out of range ({})", self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    /// Spin value of node `i` under the threshold-network reading.
    #[inline]
    pub fn spin(&self, i: usize) -> i8 {
        if self.get(i) {
            1
        } else {
            -1
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn density(&self) -> f64 {
        if self.len == 0 {
            0.0
        } else {
            self.count_ones() as f64 / self.len as f64
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// Bitwise complement over all nodes.
    pub fn complement(&self) -> Self {
        let mut s = NetworkState { words: self.words.iter().map(|w| !w).collect(), len: self.len };
        s.clear_tail();
        s
    }

    pub fn is_all_zeros(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_all_ones(&self) -> bool {
        self.count_ones() == self.len
    }

    fn clear_tail(&mut self) {
        let rem = self.len & 63;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NetworkState({self})")
    }
}

impl fmt::Display for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Number of nodes whose bits differ.
pub fn hamming_distance(a: &NetworkState, b: &NetworkState) -> Result<usize> {
    if a.len != b.len {
        return Err(Error::LengthMismatch { left: a.len, right: b.len });
    }
    Ok(a.words.iter().zip(&b.words).map(|(x, y)| (x ^ y).count_ones() as usize).sum())
}

/// Copy of `state` with the listed nodes flipped.
pub fn perturb(state: &NetworkState, nodes: &[usize]) -> Result<NetworkState> {
    validate_node_set(nodes, state.len())?;
    let mut out = state.clone();
    for &i in nodes {
        out.flip(i);
    }
    Ok(out)
}

pub(crate) fn validate_node_set(nodes: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in nodes {
        if i >= n {
            return Err(Error::NodeOutOfRange { node: i, n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateNode(i));
        }
    }
    Ok(())
}

/// Uniformly random state: each bit independently 1 with probability 1/2.
pub fn random_state(n: usize, stream: &RandomStream) -> Result<NetworkState> {
    if n == 0 {
        return Err(Error::InvalidParameter("state length must be positive".into()));
    }
    let mut rng = stream.rng();
    Ok(random_state_with(n, &mut rng))
}

pub(crate) fn random_state_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> NetworkState {
    let mut s = NetworkState { words: (0..words_for(n)).map(|_| rng.gen::<u64>()).collect(), len: n };
    s.clear_tail();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> NetworkState {
        NetworkState::from_bitstring(s).unwrap()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&st("0000"), &st("0000")).unwrap(), 0);
        assert_eq!(hamming_distance(&st("0101"), &st("0011")).unwrap(), 2);
        assert_eq!(hamming_distance(&NetworkState::ones(1024), &NetworkState::zeros(1024)).unwrap(), 1024);
    }

    #[test]
    fn hamming_length_mismatch() {
        assert_eq!(
            hamming_distance(&st("000"), &st("0000")),
            Err(Error::LengthMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn perturb_examples() {
        let s = st("0000");
        let p = perturb(&s, &[1]).unwrap();
        assert_eq!(p.to_string(), "0100");
        assert_eq!(s.to_string(), "0000");
        assert_eq!(perturb(&p, &[1]).unwrap(), s);
    }

    #[test]
    fn perturb_rejects_bad_sets() {
        let s = st("0000");
        assert_eq!(perturb(&s, &[1, 1]), Err(Error::DuplicateNode(1)));
        assert_eq!(perturb(&s, &[4]), Err(Error::NodeOutOfRange { node: 4, n: 4 }));
    }

    #[test]
    fn ones_has_clean_tail() {
        let s = NetworkState::ones(70);
        assert_eq!(s.count_ones(), 70);
        assert_eq!(s.complement().count_ones(), 0);
        assert!(s.is_all_ones());
    }

    #[test]
    fn spins_map_to_bits() {
        let s = NetworkState::from_spins(&[1, -1, -1, 1]);
        assert_eq!(s.to_string(), "1001");
        assert_eq!(s.spin(0), 1);
        assert_eq!(s.spin(1), -1);
    }

    #[test]
    fn random_state_is_deterministic() {
        let stream = RandomStream::new(5).child(1);
        assert_eq!(random_state(1024, &stream).unwrap(), random_state(1024, &stream).unwrap());
        assert!(random_state(0, &stream).is_err());
    }

    #[test]
    fn random_state_mean_density() {
        // 10^4 draws of 1024 bits: the mean density has sd ~ 1.6e-4.
        let root = RandomStream::new(11);
        let total: f64 = (0..10_000).map(|i| random_state(1024, &root.child(i)).unwrap().density()).sum();
        let mean = total / 10_000.0;
        assert!((mean - 0.5).abs() < 0.01, "mean density {mean}");
    }

    #[test]
    fn replicates_differ() {
        let root = RandomStream::new(11);
        for i in 0..100 {
            let a = random_state(64, &root.child(i)).unwrap();
            let b = random_state(64, &root.child(i + 1)).unwrap();
            assert!(hamming_distance(&a, &b).unwrap() >= 1);
        }
    }
}
