//! Reference evaluators used to cross-check the simulation engines.
//!
//! Everything here works one node at a time on plain `bool` slices and shares
//! no code with the packed engines it validates.

use critnet::{RuleSet, Topology, ZeroSign};

/// One synchronous update computed node by node from the in-edge lists.
pub fn reference_step(t: &Topology, rules: &RuleSet, s: &[bool]) -> Vec<bool> {
    (0..t.n_nodes())
        .map(|i| {
            let src = t.in_edges(i);
            match rules {
                RuleSet::Boolean(luts) => {
                    let idx = src.iter().enumerate().map(|(b, &j)| usize::from(s[j]) << b).sum::<usize>();
                    luts[i].get(idx)
                }
                RuleSet::Threshold(r) => {
                    let field = src
                        .iter()
                        .zip(&r.weights[i])
                        .map(|(&j, &w)| i32::from(w) * if s[j] { 1 } else { -1 })
                        .sum::<i32>()
                        + r.h;
                    match field.signum() {
                        1 => true,
                        -1 => false,
                        _ => match r.zero {
                            ZeroSign::Negative => false,
                            ZeroSign::Positive => true,
                            ZeroSign::Hold => s[i],
                        },
                    }
                }
            }
        })
        .collect()
}

/// Exhaustive attractor search over all `2^n` states, for `n <= 20`.
/// Returns (transient length, period) of the trajectory from `ic`.
pub fn brute_force_attractor(t: &Topology, rules: &RuleSet, ic: &[bool]) -> (usize, usize) {
    let n = t.n_nodes();
    assert!(n <= 20, "brute force is limited to 20 nodes");
    let index = |s: &[bool]| s.iter().enumerate().map(|(i, &b)| usize::from(b) << i).sum::<usize>();
    let mut first_seen = vec![usize::MAX; 1 << n];
    let mut s = ic.to_vec();
    let mut time = 0;
    while first_seen[index(&s)] == usize::MAX {
        first_seen[index(&s)] = time;
        s = reference_step(t, rules, &s);
        time += 1;
    }
    let transient = first_seen[index(&s)];
    (transient, time - transient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use critnet::rules::LookupTable;

    #[test]
    fn two_node_swap_has_period_two() {
        // Each node copies the other.
        let t = Topology::new(vec![vec![1], vec![0]], None, critnet::ClassTag::RbnRandom).unwrap();
        let copy = LookupTable::from_bits(&[false, true]).unwrap();
        let rules = RuleSet::Boolean(vec![copy.clone(), copy]);
        assert_eq!(reference_step(&t, &rules, &[true, false]), [false, true]);
        assert_eq!(brute_force_attractor(&t, &rules, &[true, false]), (0, 2));
        assert_eq!(brute_force_attractor(&t, &rules, &[true, true]), (0, 1));
    }
}
