use critnet::generate::{gen_ca_diluted, gen_random_avg};
use critnet::metrics::{avg_path_length, clustering_coefficient, components};
use critnet::{RandomStream, Topology};
use proptest::prelude::*;

const INF: usize = usize::MAX / 4;

/// All-pairs hop distances on the undirected projection.
fn floyd_warshall(t: &Topology) -> Vec<Vec<usize>> {
    let n = t.n_nodes();
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (s, x) in t.links() {
        if s != x {
            d[s][x] = 1;
            d[x][s] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn adjacency(t: &Topology) -> Vec<Vec<bool>> {
    let n = t.n_nodes();
    let mut a = vec![vec![false; n]; n];
    for (s, x) in t.links() {
        if s != x {
            a[s][x] = true;
            a[x][s] = true;
        }
    }
    a
}

fn topology_strategy() -> impl Strategy<Value = Topology> {
    prop_oneof![
        (2usize..=64, 0.0f64..4.0, any::<u64>())
            .prop_map(|(n, k, seed)| gen_random_avg(n, k.min(n as f64), true, &RandomStream::new(seed)).unwrap()),
        (2usize..=8, 0.0f64..=4.0, any::<u64>())
            .prop_map(|(s, k, seed)| gen_ca_diluted(s.max(3), k, &RandomStream::new(seed)).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn paths_and_components_match_floyd_warshall(t in topology_strategy()) {
        let n = t.n_nodes();
        let d = floyd_warshall(&t);
        let (mut sum, mut pairs) = (0usize, 0usize);
        for i in 0..n {
            for j in 0..n {
                if i != j && d[i][j] < INF {
                    sum += d[i][j];
                    pairs += 1;
                }
            }
        }
        let got = avg_path_length(&t).unwrap();
        let frac = pairs as f64 / (n * (n - 1)) as f64;
        prop_assert!((got.reachable_fraction - frac).abs() < 1e-12);
        if pairs > 0 {
            prop_assert!((got.mean - sum as f64 / pairs as f64).abs() < 1e-9);
            prop_assert!(got.mean >= 1.0);
        }

        // Components: group nodes by their reachable set.
        let mut label = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for i in 0..n {
            if label[i] == usize::MAX {
                let members: Vec<usize> = (0..n).filter(|&j| d[i][j] < INF).collect();
                for &j in &members {
                    label[j] = sizes.len();
                }
                sizes.push(members.len());
            }
        }
        let c = components(&t);
        prop_assert_eq!(c.count, sizes.len());
        prop_assert!((c.largest_fraction - *sizes.iter().max().unwrap() as f64 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn clustering_matches_triangle_count(t in topology_strategy()) {
        let a = adjacency(&t);
        let n = t.n_nodes();
        let mut total = 0.0;
        for i in 0..n {
            let nb: Vec<usize> = (0..n).filter(|&j| a[i][j]).collect();
            if nb.len() < 2 {
                continue;
            }
            let mut closed = 0;
            for (x, &u) in nb.iter().enumerate() {
                for &v in &nb[x + 1..] {
                    closed += usize::from(a[u][v]);
                }
            }
            total += closed as f64 / (nb.len() * (nb.len() - 1) / 2) as f64;
        }
        let want = if n == 0 { 0.0 } else { total / n as f64 };
        prop_assert!((clustering_coefficient(&t) - want).abs() < 1e-12);
    }

    #[test]
    fn metrics_are_invariant_under_relabeling(t in topology_strategy(), seed in any::<u64>()) {
        let n = t.n_nodes();
        let perm = critnet::damage::random_damage_set(n, n, &mut RandomStream::new(seed).rng());
        let p = t.relabel(&perm).unwrap();
        let (a, b) = (avg_path_length(&t).unwrap(), avg_path_length(&p).unwrap());
        prop_assert!((a.mean - b.mean).abs() < 1e-9);
        prop_assert!((a.reachable_fraction - b.reachable_fraction).abs() < 1e-12);
        prop_assert!((clustering_coefficient(&t) - clustering_coefficient(&p)).abs() < 1e-12);
        prop_assert_eq!(components(&t), components(&p));
    }
}
