use std::collections::{BTreeMap, HashSet};

use critnet::generate::{
    gen_ca_diluted, gen_random_avg, gen_small_world, links_for, LengthDist, SmallWorldParams, TopologyClass, TopologySpec,
};
use critnet::io::{parse_network, parse_topology, write_network, write_topology};
use critnet::metrics::wire_cost;
use critnet::rules::{sample_boolean_rules, sample_threshold_rules};
use critnet::{Geometry, RandomStream, Topology, ZeroSign};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = TopologySpec> {
    let side = 3usize..12;
    prop_oneof![
        (1usize..60, 0usize..6, any::<bool>()).prop_map(|(n, k, s)| TopologySpec::rbn_exact(n.max(k + 1), k, s)),
        (2usize..80, 0.0f64..5.0, any::<bool>()).prop_map(|(n, k, s)| TopologySpec::random_avg(n, k.min((n - 1) as f64), s)),
        side.clone().prop_map(|s| TopologySpec::ca_lattice(s * s)),
        (side.clone(), 0.0f64..=4.0).prop_map(|(s, k)| TopologySpec::ca_diluted(s * s, k)),
        (3usize..10, 0.0f64..=1.0, prop_oneof![Just(LengthDist::Uniform), (1.0f64..4.0).prop_map(|alpha| LengthDist::PowerLaw { alpha })])
            .prop_map(|(s, p, length_dist)| TopologySpec::small_world(
                s * s,
                SmallWorldParams { k_base: 4, p, length_dist, ring: false }
            )),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn generated_link_count_is_exact(spec in spec_strategy(), seed in any::<u64>()) {
        let t = spec.generate(&RandomStream::new(seed)).unwrap();
        let n = spec.n_nodes;
        let want = match spec.class {
            TopologyClass::RbnExactK => n * spec.k as usize,
            TopologyClass::RandomAvgK | TopologyClass::CaDiluted => links_for(n, spec.k),
            TopologyClass::CaLattice => 4 * n,
            TopologyClass::SmallWorld => n * spec.small_world.k_base,
        };
        prop_assert_eq!(t.n_links(), want);
        prop_assert!(t.n_links() <= spec.candidate_link_count());
        let mut seen = HashSet::new();
        for (s, d) in t.links() {
            prop_assert!(seen.insert((s, d)), "duplicate link {}->{}", s, d);
            if !spec.allow_self {
                prop_assert_ne!(s, d);
            }
        }
    }

    #[test]
    fn serialization_round_trips(spec in spec_strategy(), seed in any::<u64>(), threshold in any::<bool>()) {
        let stream = RandomStream::new(seed);
        let t = spec.generate(&stream).unwrap();
        let text = write_topology(&t);
        let back = parse_topology(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(write_topology(&back), text);
        let rules = if threshold {
            sample_threshold_rules(&t, ZeroSign::Hold, &stream.named("r"))
        } else {
            sample_boolean_rules(&t, 0.3, &stream.named("r")).unwrap()
        };
        let text = write_network(&t, &rules).unwrap();
        let (t2, r2) = parse_network(&text).unwrap();
        prop_assert_eq!(t2, t);
        prop_assert_eq!(r2, Some(rules));
    }

    /// Total wire length recomputed from the serialized edge lines alone.
    #[test]
    fn wire_total_matches_serialized_edges(side in 3usize..14, k in 0.0f64..=4.0, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let n = side * side;
        let stream = RandomStream::new(seed);
        let t = if seed % 2 == 0 {
            gen_ca_diluted(side, k, &stream).unwrap()
        } else {
            gen_small_world(Geometry::Torus { side }, 4, p, LengthDist::Uniform, &stream).unwrap()
        };
        let text = write_topology(&t);
        let mut total = 0.0;
        for line in text.lines().skip(1) {
            let (a, b) = line.split_once('\t').unwrap();
            let (a, b): (usize, usize) = (a.parse().unwrap(), b.parse().unwrap());
            let wrap = |x: usize, y: usize| {
                let d = x.abs_diff(y);
                d.min(side - d) as f64
            };
            let dx = wrap(a % side, b % side);
            let dy = wrap(a / side, b / side);
            total += (dx * dx + dy * dy).sqrt();
        }
        let w = wire_cost(&t).unwrap();
        prop_assert!((w.total - total).abs() < 1e-9 * total.max(1.0));
        prop_assert_eq!(w.histogram.iter().sum::<usize>(), t.n_links());
        prop_assert!(n > 0);
    }
}

/// P(in-degree = d) when `links` of the `n*n` ordered pairs are chosen
/// without replacement and each target owns `n` of them.
fn hypergeometric(n: usize, links: usize, dmax: usize) -> Vec<f64> {
    let total = (n * n) as f64;
    let (own, l) = (n as f64, links as f64);
    let mut p = vec![0.0; dmax + 1];
    p[0] = (0..n).map(|i| (total - l - i as f64) / (total - i as f64)).product();
    for d in 0..dmax {
        let d_ = d as f64;
        p[d + 1] = p[d] * (own - d_) * (l - d_) / ((d_ + 1.0) * (total - own - l + d_ + 1.0));
    }
    p
}

#[test]
fn average_k_in_degrees_follow_the_urn_distribution() {
    let (n, k, nets) = (400, 2.5, 25);
    let links = (n as f64 * k).round() as usize;
    let mut counts = vec![0usize; 30];
    for r in 0..nets {
        let t = gen_random_avg(n, k, true, &RandomStream::new(99).child(r)).unwrap();
        for i in 0..n {
            counts[t.in_degree(i)] += 1;
        }
    }
    // Bins 0..=6 plus a pooled tail.
    let p = hypergeometric(n, links, 6);
    let samples = (n as u64 * nets) as f64;
    let mut chi2 = 0.0;
    for d in 0..=6 {
        let e = p[d] * samples;
        chi2 += (counts[d] as f64 - e).powi(2) / e;
    }
    let tail_e = (1.0 - p.iter().sum::<f64>()) * samples;
    let tail_o: usize = counts[7..].iter().sum();
    chi2 += (tail_o as f64 - tail_e).powi(2) / tail_e;
    // 7 degrees of freedom, 0.1% level.
    assert!(chi2 < 24.32, "chi2 = {chi2}, counts {:?}", &counts[..10]);
}

fn mean_wire(dist: LengthDist, seed: u64) -> f64 {
    let spec = TopologySpec::small_world(1024, SmallWorldParams { k_base: 4, p: 0.5, length_dist: dist, ring: false });
    let mut total = 0.0;
    for r in 0..5 {
        total += wire_cost(&spec.generate(&RandomStream::new(seed).child(r)).unwrap()).unwrap().mean;
    }
    total / 5.0
}

#[test]
fn steep_power_law_keeps_wires_shorter_than_uniform() {
    let uniform = mean_wire(LengthDist::Uniform, 4);
    let steep = mean_wire(LengthDist::PowerLaw { alpha: 4.0 }, 4);
    assert!(steep < uniform, "alpha=4 mean {steep} vs uniform {uniform}");
    assert!(uniform > 1.0);
}

/// Rewired lengths at alpha = 2: the density per available offset, binned
/// by unit shells, falls off with log-log slope -2.
#[test]
fn power_law_rewiring_slope() {
    let side = 64;
    let g = Geometry::Torus { side };
    let mut link_len: BTreeMap<usize, f64> = BTreeMap::new();
    for r in 0..4 {
        let t = gen_small_world(g, 4, 1.0, LengthDist::PowerLaw { alpha: 2.0 }, &RandomStream::new(17).child(r)).unwrap();
        for (s, d) in t.links() {
            *link_len.entry(g.distance(s, d).floor() as usize).or_default() += 1.0;
        }
    }
    // Offsets available in each shell, counted from node 0.
    let mut offsets: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for j in 1..side * side {
        let l = g.distance(0, j);
        let e = offsets.entry(l.floor() as usize).or_default();
        e.0 += 1.0;
        e.1 += l;
    }
    let pts: Vec<(f64, f64)> = (2..=20)
        .map(|b| {
            let (cnt, sum_l) = offsets[&b];
            ((sum_l / cnt).ln(), (link_len.get(&b).copied().unwrap_or(0.0) / cnt).ln())
        })
        .collect();
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 2.0).abs() < 0.2, "slope {slope}");
}

#[test]
fn relabeling_preserves_degree_sequence() {
    let t = gen_random_avg(50, 3.0, false, &RandomStream::new(3)).unwrap();
    let perm: Vec<usize> = (0..50).map(|i| (i * 7) % 50).collect();
    let p = t.relabel(&perm).unwrap();
    for i in 0..50 {
        assert_eq!(t.in_degree(i), p.in_degree(perm[i]));
    }
    let back: Vec<(usize, usize)> = p.links().collect();
    let want: HashSet<(usize, usize)> = t.links().map(|(s, d)| (perm[s], perm[d])).collect();
    assert_eq!(back.len(), want.len());
    assert!(back.iter().all(|l| want.contains(l)));
    assert!(Topology::new(vec![vec![0, 0]], None, critnet::ClassTag::RbnRandom).is_err());
}
