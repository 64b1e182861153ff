//! Structural metrics on the undirected projection of a topology: path
//! length, clustering, connected components and wiring cost.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathLength {
    /// Mean shortest-path length over ordered reachable pairs (0 when no pair
    /// is reachable).
    pub mean: f64,
    /// Reachable ordered pairs over `N(N-1)`.
    pub reachable_fraction: f64,
}

fn bfs(adj: &[Vec<usize>], src: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) -> (u64, u64) {
    dist.fill(u32::MAX);
    dist[src] = 0;
    queue.clear();
    queue.push_back(src);
    let (mut sum, mut count) = (0u64, 0u64);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                sum += u64::from(dist[v]);
                count += 1;
                queue.push_back(v);
            }
        }
    }
    (sum, count)
}

pub fn avg_path_length(topology: &Topology) -> Result<PathLength> {
    let n = topology.n_nodes();
    if n < 2 {
        return Err(Error::InvalidParameter("path length needs at least two nodes".into()));
    }
    let adj = topology.undirected_neighbors();
    let (sum, count) = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; n], VecDeque::new()),
            |(dist, queue), s| bfs(&adj, s, dist, queue),
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let pairs = (n * (n - 1)) as f64;
    Ok(PathLength {
        mean: if count == 0 { 0.0 } else { sum as f64 / count as f64 },
        reachable_fraction: count as f64 / pairs,
    })
}

/// Mean local clustering coefficient; nodes with fewer than two neighbours
/// contribute zero.
pub fn clustering_coefficient(topology: &Topology) -> f64 {
    let n = topology.n_nodes();
    if n == 0 {
        return 0.0;
    }
    let adj = topology.undirected_neighbors();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|u| {
            let nb = &adj[u];
            let d = nb.len();
            if d < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for (a, &v) in nb.iter().enumerate() {
                for &w in &nb[a + 1..] {
                    if adj[v].binary_search(&w).is_ok() {
                        links += 1;
                    }
                }
            }
            2.0 * links as f64 / (d * (d - 1)) as f64
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    total / n as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Components {
    pub count: usize,
    pub largest_fraction: f64,
}

/// Weakly connected components.
pub fn components(topology: &Topology) -> Components {
    let n = topology.n_nodes();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (s, t) in topology.links() {
        let (a, b) = (find(&mut parent, s), find(&mut parent, t));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut size = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        size[r] += 1;
    }
    let count = size.iter().filter(|&&s| s > 0).count();
    let largest = size.iter().copied().max().unwrap_or(0);
    Components { count, largest_fraction: if n == 0 { 0.0 } else { largest as f64 / n as f64 } }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WireCost {
    pub total: f64,
    pub mean: f64,
    /// `histogram[b]` counts links with length in `[b, b + 1)`.
    pub histogram: Vec<usize>,
}

/// Periodic Euclidean length of every directed link.
pub fn wire_cost(topology: &Topology) -> Result<WireCost> {
    let g = topology.geometry().ok_or(Error::MissingGeometry)?;
    let mut total = 0.0;
    let mut histogram = Vec::new();
    for (s, t) in topology.links() {
        let l = g.distance(s, t);
        total += l;
        let b = l.floor() as usize;
        if histogram.len() <= b {
            histogram.resize(b + 1, 0);
        }
        histogram[b] += 1;
    }
    let links = topology.n_links();
    Ok(WireCost { total, mean: if links == 0 { 0.0 } else { total / links as f64 }, histogram })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub n: usize,
    pub mean_in_degree: f64,
    pub class: String,
    pub path: PathLength,
    pub clustering: f64,
    pub components: Components,
    /// `None` when the topology has no geometry.
    pub wire: Option<WireCost>,
    pub degree_histogram: Vec<usize>,
}

pub fn metrics_report(topology: &Topology) -> Result<MetricsReport> {
    Ok(MetricsReport {
        n: topology.n_nodes(),
        mean_in_degree: topology.mean_in_degree(),
        class: topology.class().to_string(),
        path: avg_path_length(topology)?,
        clustering: clustering_coefficient(topology),
        components: components(topology),
        wire: topology.geometry().map(|_| wire_cost(topology)).transpose()?,
        degree_histogram: topology.in_degree_histogram(),
    })
}

pub const METRICS_CSV_HEADER: &str =
    "N,K,class,p,alpha,avg_path,reachable_frac,clustering,n_components,largest_frac,total_wire,mean_wire";

impl MetricsReport {
    /// One CSV row; `p` and `alpha` describe the generator (empty when not
    /// applicable). Wire columns are empty without geometry.
    pub fn csv_row(&self, p: Option<f64>, alpha: Option<f64>) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        let mut s = String::new();
        write!(
            s,
            "{},{:.6},{},{},{},{:.6},{:.6},{:.6},{},{:.6},{},{}",
            self.n,
            self.mean_in_degree,
            self.class,
            opt(p),
            opt(alpha),
            self.path.mean,
            self.path.reachable_fraction,
            self.clustering,
            self.components.count,
            self.components.largest_fraction,
            opt(self.wire.as_ref().map(|w| w.total)),
            opt(self.wire.as_ref().map(|w| w.mean)),
        )
        .expect("writing to a String");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_ca_lattice, gen_small_world, LengthDist};
    use crate::rng::RandomStream;
    use crate::topology::{ClassTag, Geometry};

    fn undirected(n: usize, edges: &[(usize, usize)]) -> Topology {
        let mut in_edges = vec![Vec::new(); n];
        for &(a, b) in edges {
            in_edges[b].push(a);
        }
        Topology::new(in_edges, None, ClassTag::RbnRandom).unwrap()
    }

    #[test]
    fn complete_graph() {
        let edges: Vec<_> = (0..6).flat_map(|a| (0..6).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        let t = undirected(6, &edges);
        assert_eq!(avg_path_length(&t).unwrap(), PathLength { mean: 1.0, reachable_fraction: 1.0 });
        assert_eq!(clustering_coefficient(&t), 1.0);
    }

    #[test]
    fn ring_of_eight() {
        let ring = gen_small_world(Geometry::Ring { len: 8 }, 2, 0.0, LengthDist::Uniform, &RandomStream::new(0)).unwrap();
        let p = avg_path_length(&ring).unwrap();
        assert!((p.mean - 16.0 / 7.0).abs() < 1e-12);
        assert_eq!(p.reachable_fraction, 1.0);
    }

    #[test]
    fn triangle_and_star() {
        assert_eq!(clustering_coefficient(&undirected(3, &[(0, 1), (1, 2), (2, 0)])), 1.0);
        assert_eq!(clustering_coefficient(&undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)])), 0.0);
    }

    #[test]
    fn ring_lattice_clustering() {
        // Closed form 3(k-2)/(4(k-1)) for a ring where each node links to k/2 per side.
        for k in [4usize, 6, 8] {
            let ring = gen_small_world(Geometry::Ring { len: 60 }, k, 0.0, LengthDist::Uniform, &RandomStream::new(0)).unwrap();
            let want = 3.0 * (k as f64 - 2.0) / (4.0 * (k as f64 - 1.0));
            assert!((clustering_coefficient(&ring) - want).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn edgeless_and_full_components() {
        let t = undirected(7, &[]);
        assert_eq!(components(&t), Components { count: 7, largest_fraction: 1.0 / 7.0 });
        assert_eq!(avg_path_length(&t).unwrap(), PathLength { mean: 0.0, reachable_fraction: 0.0 });
        assert_eq!(components(&gen_ca_lattice(6).unwrap()), Components { count: 1, largest_fraction: 1.0 });
    }

    #[test]
    fn lattice_wire_cost() {
        let t = gen_ca_lattice(5).unwrap();
        let w = wire_cost(&t).unwrap();
        assert_eq!(w.total, 100.0);
        assert_eq!(w.mean, 1.0);
        assert_eq!(w.histogram, vec![0, 100]);
        assert_eq!(wire_cost(&undirected(2, &[(0, 1)])), Err(Error::MissingGeometry));
    }

    #[test]
    fn csv_row_shape() {
        let r = metrics_report(&gen_ca_lattice(4).unwrap()).unwrap();
        let row = r.csv_row(Some(0.0), None);
        assert_eq!(row.split(',').count(), METRICS_CSV_HEADER.split(',').count());
        assert!(row.starts_with("16,4.000000,ca-lattice,0.000000,,"));
    }
}
