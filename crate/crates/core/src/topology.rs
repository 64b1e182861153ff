//! Directed network wiring: per-node ordered in-edge lists plus optional
//! node geometry.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Node index in `[0, N)` of some topology.
pub type NodeId = usize;

/// Which family a topology was built as.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassTag {
    RbnRandom,
    CaLattice,
    CaDiluted,
    SmallWorld,
}

impl ClassTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassTag::RbnRandom => "rbn-random",
            ClassTag::CaLattice => "ca-lattice",
            ClassTag::CaDiluted => "ca-diluted",
            ClassTag::SmallWorld => "small-world",
        }
    }

    pub fn is_ca(self) -> bool {
        matches!(self, ClassTag::CaLattice | ClassTag::CaDiluted)
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbn-random" => Ok(ClassTag::RbnRandom),
            "ca-lattice" => Ok(ClassTag::CaLattice),
            "ca-diluted" => Ok(ClassTag::CaDiluted),
            "small-world" => Ok(ClassTag::SmallWorld),
            other => Err(Error::InvalidParameter(format!("unknown topology class {other:?}"))),
        }
    }
}

/// Node placement used for wire lengths. Node `i` of a torus sits at
/// `(i % side, i / side)`; node `i` of a ring sits at position `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    Torus { side: usize },
    Ring { len: usize },
}

impl Geometry {
    pub fn n_nodes(&self) -> usize {
        match *self {
            Geometry::Torus { side } => side * side,
            Geometry::Ring { len } => len,
        }
    }

    pub fn coords(&self, i: NodeId) -> (usize, usize) {
        match *self {
            Geometry::Torus { side } => (i % side, i / side),
            Geometry::Ring { .. } => (i, 0),
        }
    }

    pub fn node_at(&self, x: usize, y: usize) -> NodeId {
        match *self {
            Geometry::Torus { side } => (y % side) * side + (x % side),
            Geometry::Ring { len } => x % len,
        }
    }

    /// Per-axis periodic offsets between two nodes.
    pub fn offsets(&self, a: NodeId, b: NodeId) -> (usize, usize) {
        let wrap = |u: usize, v: usize, m: usize| {
            let d = u.abs_diff(v);
            d.min(m - d)
        };
        match *self {
            Geometry::Torus { side } => {
                let (ax, ay) = self.coords(a);
                let (bx, by) = self.coords(b);
                (wrap(ax, bx, side), wrap(ay, by, side))
            }
            Geometry::Ring { len } => (wrap(a, b, len), 0),
        }
    }

    /// Periodic Euclidean distance in lattice units.
    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        let (dx, dy) = self.offsets(a, b);
        ((dx * dx + dy * dy) as f64).sqrt()
    }

    /// The four von Neumann neighbours of a torus node, in the order
    /// left, right, down, up. Ring geometries return the two ring neighbours.
    pub fn von_neumann(&self, i: NodeId) -> Vec<NodeId> {
        match *self {
            Geometry::Torus { side } => {
                let (x, y) = self.coords(i);
                vec![
                    self.node_at(x + side - 1, y),
                    self.node_at(x + 1, y),
                    self.node_at(x, y + side - 1),
                    self.node_at(x, y + 1),
                ]
            }
            Geometry::Ring { len } => vec![(i + len - 1) % len, (i + 1) % len],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Topology {
    in_edges: Vec<Vec<NodeId>>,
    geometry: Option<Geometry>,
    class: ClassTag,
}

impl Topology {
    /// Validates and wraps raw in-edge lists.
    pub fn new(in_edges: Vec<Vec<NodeId>>, geometry: Option<Geometry>, class: ClassTag) -> Result<Self> {
        let n = in_edges.len();
        if let Some(g) = geometry {
            if g.n_nodes() != n {
                return Err(Error::Inconsistent(format!(
                    "geometry holds {} nodes but topology has {n}",
                    g.n_nodes()
                )));
            }
        }
        let mut mark = vec![usize::MAX; n];
        for (target, sources) in in_edges.iter().enumerate() {
            for &s in sources {
                if s >= n {
                    return Err(Error::NodeOutOfRange { node: s, n });
                }
                if mark[s] == target {
                    return Err(Error::Inconsistent(format!("duplicate link {s} -> {target}")));
                }
                mark[s] = target;
            }
        }
        if class.is_ca() {
            let Some(g @ Geometry::Torus { .. }) = geometry else {
                return Err(Error::Inconsistent("cellular automata need torus geometry".into()));
            };
            for (target, sources) in in_edges.iter().enumerate() {
                let nb = g.von_neumann(target);
                for &s in sources {
                    if s == target || !nb.contains(&s) {
                        return Err(Error::Inconsistent(format!(
                            "link {s} -> {target} is not a von Neumann lattice link"
                        )));
                    }
                }
            }
        }
        Ok(Topology { in_edges, geometry, class })
    }

    pub fn n_nodes(&self) -> usize {
        self.in_edges.len()
    }

    pub fn class(&self) -> ClassTag {
        self.class
    }

    pub fn geometry(&self) -> Option<Geometry> {
        self.geometry
    }

    /// Ordered sources feeding node `i`. The order fixes lookup-table
    /// input-bit positions: the first source is the least significant bit.
    pub fn in_edges(&self, i: NodeId) -> &[NodeId] {
        &self.in_edges[i]
    }

    pub fn all_in_edges(&self) -> &[Vec<NodeId>] {
        &self.in_edges
    }

    pub fn in_degree(&self, i: NodeId) -> usize {
        self.in_edges[i].len()
    }

    /// Total number of directed links `L`.
    pub fn n_links(&self) -> usize {
        self.in_edges.iter().map(Vec::len).sum()
    }

    pub fn mean_in_degree(&self) -> f64 {
        if self.in_edges.is_empty() {
            0.0
        } else {
            self.n_links() as f64 / self.n_nodes() as f64
        }
    }

    /// `(source, target)` pairs, grouped by target in in-edge order.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.in_edges
            .iter()
            .enumerate()
            .flat_map(|(t, srcs)| srcs.iter().map(move |&s| (s, t)))
    }

    pub fn in_degree_histogram(&self) -> Vec<usize> {
        let max = self.in_edges.iter().map(Vec::len).max().unwrap_or(0);
        let mut h = vec![0; max + 1];
        for e in &self.in_edges {
            h[e.len()] += 1;
        }
        h
    }

    /// Undirected simple-graph projection: sorted neighbour lists without
    /// self-loops.
    pub fn undirected_neighbors(&self) -> Vec<Vec<NodeId>> {
        let n = self.n_nodes();
        let mut adj = vec![Vec::new(); n];
        for (s, t) in self.links() {
            if s != t {
                adj[s].push(t);
                adj[t].push(s);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Same wiring with node labels permuted: old node `i` becomes `perm[i]`.
    /// Geometry is dropped because positions no longer follow the labels.
    pub fn relabel(&self, perm: &[NodeId]) -> Result<Topology> {
        let n = self.n_nodes();
        if perm.len() != n {
            return Err(Error::LengthMismatch { left: perm.len(), right: n });
        }
        crate::state::validate_node_set(perm, n)?;
        let mut in_edges = vec![Vec::new(); n];
        for (t, srcs) in self.in_edges.iter().enumerate() {
            in_edges[perm[t]] = srcs.iter().map(|&s| perm[s]).collect();
        }
        let class = if self.class.is_ca() { ClassTag::RbnRandom } else { self.class };
        Topology::new(in_edges, None, class)
    }
}
