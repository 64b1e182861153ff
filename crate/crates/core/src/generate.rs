//! Topology generators for every network class: random wiring with exact or
//! average in-degree, full and diluted folded von Neumann lattices, and
//! rewired small-world lattices.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;
use crate::topology::{ClassTag, Geometry, NodeId, Topology};

/// Distribution of rewired link lengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LengthDist {
    /// Any node is an equally likely new target.
    Uniform,
    /// Target chosen with probability proportional to `l^-alpha`.
    PowerLaw { alpha: f64 },
    /// Target chosen with probability proportional to `exp(-l^2 / 2 sigma^2)`.
    Gaussian { sigma: f64 },
}

impl LengthDist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LengthDist::Uniform => Ok(()),
            LengthDist::PowerLaw { alpha } if alpha > 0.0 && alpha.is_finite() => Ok(()),
            LengthDist::Gaussian { sigma } if sigma > 0.0 && sigma.is_finite() => Ok(()),
            other => Err(invalid(format!("{other:?}: exponent/width must be positive"))),
        }
    }

    /// Unnormalised selection weight of a target at distance `l > 0`.
    pub fn weight(&self, l: f64) -> f64 {
        match *self {
            LengthDist::Uniform => 1.0,
            LengthDist::PowerLaw { alpha } => l.powf(-alpha),
            LengthDist::Gaussian { sigma } => (-l * l / (2.0 * sigma * sigma)).exp(),
        }
    }

    /// Short label used in CSV output (`uniform`, `power_law`, `gaussian`).
    pub fn label(&self) -> &'static str {
        match self {
            LengthDist::Uniform => "uniform",
            LengthDist::PowerLaw { .. } => "power_law",
            LengthDist::Gaussian { .. } => "gaussian",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TopologyClass {
    RbnExactK,
    RandomAvgK,
    CaLattice,
    CaDiluted,
    SmallWorld,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallWorldParams {
    /// Neighbours per node in the base lattice: 4 (von Neumann) or 8 (Moore)
    /// on the torus, any even number on the ring.
    pub k_base: usize,
    pub p: f64,
    pub length_dist: LengthDist,
    /// Use a 1D ring of `n_nodes` instead of a square torus.
    pub ring: bool,
}

impl Default for SmallWorldParams {
    fn default() -> Self {
        SmallWorldParams { k_base: 4, p: 0.0, length_dist: LengthDist::Uniform, ring: false }
    }
}

/// Declarative description of one topology ensemble member.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopologySpec {
    pub class: TopologyClass,
    pub n_nodes: usize,
    /// Exact K for `RbnExactK`, mean in-degree for the other classes. Ignored
    /// for `CaLattice` and `SmallWorld`.
    pub k: f64,
    pub allow_self: bool,
    pub small_world: SmallWorldParams,
}

impl TopologySpec {
    pub fn rbn_exact(n_nodes: usize, k: usize, allow_self: bool) -> Self {
        TopologySpec {
            class: TopologyClass::RbnExactK,
            n_nodes,
            k: k as f64,
            allow_self,
            small_world: SmallWorldParams::default(),
        }
    }

    pub fn random_avg(n_nodes: usize, k_avg: f64, allow_self: bool) -> Self {
        TopologySpec { class: TopologyClass::RandomAvgK, k: k_avg, ..Self::rbn_exact(n_nodes, 0, allow_self) }
    }

    pub fn ca_lattice(n_nodes: usize) -> Self {
        TopologySpec { class: TopologyClass::CaLattice, k: 4.0, ..Self::rbn_exact(n_nodes, 0, false) }
    }

    pub fn ca_diluted(n_nodes: usize, k_avg: f64) -> Self {
        TopologySpec { class: TopologyClass::CaDiluted, k: k_avg, ..Self::rbn_exact(n_nodes, 0, false) }
    }

    pub fn small_world(n_nodes: usize, params: SmallWorldParams) -> Self {
        TopologySpec {
            class: TopologyClass::SmallWorld,
            k: params.k_base as f64,
            small_world: params,
            ..Self::rbn_exact(n_nodes, 0, false)
        }
    }

    /// Same spec with the connectivity parameter replaced.
    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_nodes(mut self, n_nodes: usize) -> Self {
        self.n_nodes = n_nodes;
        self
    }

    fn side(&self) -> Result<usize> {
        square_side(self.n_nodes)
            .ok_or_else(|| invalid(format!("N={} is not a perfect square", self.n_nodes)))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes;
        if n == 0 {
            return Err(invalid("N must be positive"));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(invalid(format!("connectivity {} must be finite and >= 0", self.k)));
        }
        match self.class {
            TopologyClass::RbnExactK => {
                if self.k.fract() != 0.0 {
                    return Err(invalid(format!("exact K must be an integer, got {}", self.k)));
                }
                let max = if self.allow_self { n } else { n - 1 };
                if self.k as usize > max {
                    return Err(invalid(format!("K={} exceeds the {max} admissible inputs", self.k)));
                }
            }
            TopologyClass::RandomAvgK => {
                let max = if self.allow_self { n } else { n - 1 };
                if self.k > max as f64 {
                    return Err(invalid(format!("<K>={} exceeds the {max} admissible inputs", self.k)));
                }
                let l = links_for(n, self.k);
                if l > self.candidate_link_count() {
                    return Err(invalid(format!("{l} links exceed the admissible pairs")));
                }
            }
            TopologyClass::CaLattice => {
                if self.side()? < 2 {
                    return Err(invalid("lattice side must be at least 2"));
                }
            }
            TopologyClass::CaDiluted => {
                if self.side()? < 2 {
                    return Err(invalid("lattice side must be at least 2"));
                }
                if self.k > 4.0 {
                    return Err(invalid(format!("<K>={} exceeds the 4 lattice neighbours", self.k)));
                }
                if links_for(n, self.k) > self.candidate_link_count() {
                    return Err(invalid("more links requested than lattice links exist"));
                }
            }
            TopologyClass::SmallWorld => {
                let sw = &self.small_world;
                if !(0.0..=1.0).contains(&sw.p) {
                    return Err(invalid(format!("rewiring probability {} outside [0,1]", sw.p)));
                }
                sw.length_dist.validate()?;
                if sw.ring {
                    if sw.k_base % 2 != 0 || sw.k_base == 0 || sw.k_base >= n {
                        return Err(invalid(format!("ring k_base={} must be even and < N", sw.k_base)));
                    }
                } else {
                    let side = self.side()?;
                    if !matches!(sw.k_base, 4 | 8) {
                        return Err(invalid(format!("2D k_base={} must be 4 or 8", sw.k_base)));
                    }
                    if side < 3 || (sw.k_base == 8 && side < 3) {
                        return Err(invalid("small-world lattice side must be at least 3"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of admissible directed links for this class.
    pub fn candidate_link_count(&self) -> usize {
        let n = self.n_nodes;
        match self.class {
            TopologyClass::RbnExactK | TopologyClass::RandomAvgK => {
                if self.allow_self {
                    n * n
                } else {
                    n * n.saturating_sub(1)
                }
            }
            TopologyClass::CaLattice | TopologyClass::CaDiluted => match square_side(n) {
                Some(side) if side >= 2 => lattice_sources(side).iter().map(Vec::len).sum(),
                _ => 0,
            },
            TopologyClass::SmallWorld => n * n.saturating_sub(1),
        }
    }

    pub fn generate(&self, stream: &RandomStream) -> Result<Topology> {
        self.validate()?;
        let n = self.n_nodes;
        match self.class {
            TopologyClass::RbnExactK => gen_rbn_exact(n, self.k as usize, self.allow_self, stream),
            TopologyClass::RandomAvgK => gen_random_avg(n, self.k, self.allow_self, stream),
            TopologyClass::CaLattice => gen_ca_lattice(self.side()?),
            TopologyClass::CaDiluted => gen_ca_diluted(self.side()?, self.k, stream),
            TopologyClass::SmallWorld => {
                let sw = self.small_world;
                let base = if sw.ring {
                    Geometry::Ring { len: n }
                } else {
                    Geometry::Torus { side: self.side()? }
                };
                gen_small_world(base, sw.k_base, sw.p, sw.length_dist, stream)
            }
        }
    }
}

pub fn square_side(n: usize) -> Option<usize> {
    let s = (n as f64).sqrt().round() as usize;
    (s * s == n).then_some(s)
}

/// `round(N * <K>)`, the link budget of the average-connectivity classes.
pub fn links_for(n: usize, k_avg: f64) -> usize {
    (n as f64 * k_avg).round() as usize
}

/// Every node gets exactly `k` distinct sources drawn uniformly.
pub fn gen_rbn_exact(n: usize, k: usize, allow_self: bool, stream: &RandomStream) -> Result<Topology> {
    let max = if allow_self { n } else { n.saturating_sub(1) };
    if k > max {
        return Err(invalid(format!("K={k} exceeds the {max} admissible inputs for N={n}")));
    }
    let mut rng = stream.rng();
    let in_edges = (0..n)
        .map(|target| {
            let mut srcs: Vec<NodeId> = index::sample(&mut rng, max, k)
                .into_iter()
                .map(|s| if !allow_self && s >= target { s + 1 } else { s })
                .collect();
            srcs.sort_unstable();
            srcs
        })
        .collect();
    Topology::new(in_edges, None, ClassTag::RbnRandom)
}

/// Exactly `round(n * k_avg)` distinct links placed uniformly over all
/// admissible (source, target) pairs.
pub fn gen_random_avg(n: usize, k_avg: f64, allow_self: bool, stream: &RandomStream) -> Result<Topology> {
    let max = if allow_self { n } else { n.saturating_sub(1) };
    if !(k_avg >= 0.0) || k_avg > max as f64 {
        return Err(invalid(format!("<K>={k_avg} outside [0, {max}] for N={n}")));
    }
    let per_target = if allow_self { n } else { n - 1 };
    let candidates = n * per_target;
    let l = links_for(n, k_avg);
    if l > candidates {
        return Err(invalid(format!("{l} links exceed {candidates} admissible pairs")));
    }
    let mut rng = stream.rng();
    let mut in_edges = vec![Vec::new(); n];
    for idx in index::sample(&mut rng, candidates, l) {
        let target = idx / per_target;
        let mut src = idx % per_target;
        if !allow_self && src >= target {
            src += 1;
        }
        in_edges[target].push(src);
    }
    for e in &mut in_edges {
        e.sort_unstable();
    }
    Topology::new(in_edges, None, ClassTag::RbnRandom)
}

/// Distinct von Neumann sources of every torus node, ascending. On a side-2
/// torus opposite neighbours coincide, leaving two distinct sources.
fn lattice_sources(side: usize) -> Vec<Vec<NodeId>> {
    let g = Geometry::Torus { side };
    (0..side * side)
        .map(|i| {
            let mut nb = g.von_neumann(i);
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect()
}

/// Full folded 2D lattice: each cell reads its four von Neumann neighbours.
pub fn gen_ca_lattice(side: usize) -> Result<Topology> {
    if side < 2 {
        return Err(invalid(format!("lattice side {side} < 2")));
    }
    Topology::new(lattice_sources(side), Some(Geometry::Torus { side }), ClassTag::CaLattice)
}

/// Keeps `round(N * k_avg)` of the lattice links, chosen uniformly without
/// replacement.
pub fn gen_ca_diluted(side: usize, k_avg: f64, stream: &RandomStream) -> Result<Topology> {
    if side < 2 {
        return Err(invalid(format!("lattice side {side} < 2")));
    }
    if !(0.0..=4.0).contains(&k_avg) {
        return Err(invalid(format!("<K>={k_avg} outside [0, 4]")));
    }
    let full = lattice_sources(side);
    let candidates: Vec<(NodeId, NodeId)> = full
        .iter()
        .enumerate()
        .flat_map(|(t, srcs)| srcs.iter().map(move |&s| (t, s)))
        .collect();
    let n = side * side;
    let l = links_for(n, k_avg);
    if l > candidates.len() {
        return Err(invalid(format!("{l} links exceed {} lattice links", candidates.len())));
    }
    let mut rng = stream.rng();
    let mut in_edges = vec![Vec::new(); n];
    for idx in index::sample(&mut rng, candidates.len(), l) {
        let (t, s) = candidates[idx];
        in_edges[t].push(s);
    }
    for e in &mut in_edges {
        e.sort_unstable();
    }
    Topology::new(in_edges, Some(Geometry::Torus { side }), ClassTag::CaDiluted)
}

fn base_lattice(geometry: Geometry, k_base: usize) -> Result<Vec<Vec<NodeId>>> {
    let n = geometry.n_nodes();
    let mut in_edges: Vec<Vec<NodeId>> = match geometry {
        Geometry::Ring { len } => {
            if k_base % 2 != 0 || k_base == 0 || k_base >= len {
                return Err(invalid(format!("ring k_base={k_base} must be even and < N={len}")));
            }
            let half = k_base / 2;
            (0..n)
                .map(|i| (1..=half).flat_map(|d| [(i + len - d) % len, (i + d) % len]).collect())
                .collect()
        }
        Geometry::Torus { side } => {
            if side < 3 {
                return Err(invalid("small-world lattice side must be at least 3"));
            }
            match k_base {
                4 => (0..n).map(|i| geometry.von_neumann(i)).collect(),
                8 => (0..n)
                    .map(|i| {
                        let (x, y) = geometry.coords(i);
                        let mut v = Vec::with_capacity(8);
                        for dy in 0..3 {
                            for dx in 0..3 {
                                if (dx, dy) != (1, 1) {
                                    v.push(geometry.node_at(x + side + dx - 1, y + side + dy - 1));
                                }
                            }
                        }
                        v
                    })
                    .collect(),
                _ => return Err(invalid(format!("2D k_base={k_base} must be 4 or 8"))),
            }
        }
    };
    for e in &mut in_edges {
        e.sort_unstable();
        e.dedup();
    }
    Ok(in_edges)
}

/// Cumulative target weights indexed by offset from the source; offset 0
/// (the source itself) has weight zero.
struct OffsetSampler {
    cumulative: Vec<f64>,
}

impl OffsetSampler {
    fn new(geometry: Geometry, dist: LengthDist) -> Self {
        let n = geometry.n_nodes();
        let mut acc = 0.0;
        let cumulative = (0..n)
            .map(|off| {
                if off != 0 {
                    acc += dist.weight(geometry.distance(0, off));
                }
                acc
            })
            .collect();
        OffsetSampler { cumulative }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty lattice");
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

fn translate(geometry: Geometry, source: NodeId, offset: usize) -> NodeId {
    match geometry {
        Geometry::Torus { side } => {
            let (sx, sy) = geometry.coords(source);
            let (ox, oy) = geometry.coords(offset);
            geometry.node_at(sx + ox, (sy + oy) % side)
        }
        Geometry::Ring { len } => (source + offset) % len,
    }
}

/// Regular lattice whose links are each rewired with probability `p`. A
/// rewired link keeps its source and moves its target; new targets follow
/// `length_dist` over periodic distance and never create self-loops or
/// duplicate links.
pub fn gen_small_world(
    geometry: Geometry,
    k_base: usize,
    p: f64,
    length_dist: LengthDist,
    stream: &RandomStream,
) -> Result<Topology> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("rewiring probability {p} outside [0,1]")));
    }
    length_dist.validate()?;
    let base = base_lattice(geometry, k_base)?;
    let n = geometry.n_nodes();
    let links: Vec<(NodeId, NodeId)> =
        base.iter().enumerate().flat_map(|(t, s)| s.iter().map(move |&s| (s, t))).collect();
    if p == 0.0 {
        return Topology::new(base, Some(geometry), ClassTag::SmallWorld);
    }
    let sampler = OffsetSampler::new(geometry, length_dist);
    let mut present: HashSet<(NodeId, NodeId)> = links.iter().copied().collect();
    let mut rng = stream.rng();
    let mut rewired = Vec::with_capacity(links.len());
    for (s, t) in links {
        if !rng.gen_bool(p) {
            rewired.push((s, t));
            continue;
        }
        present.remove(&(s, t));
        let mut placed = None;
        for _ in 0..10_000 {
            let cand = translate(geometry, s, sampler.sample(&mut rng));
            if cand != s && !present.contains(&(s, cand)) {
                placed = Some(cand);
                break;
            }
        }
        let t_new = placed.ok_or_else(|| {
            Error::InvalidParameter(format!("could not place a rewired link from node {s}"))
        })?;
        present.insert((s, t_new));
        rewired.push((s, t_new));
    }
    let mut in_edges = vec![Vec::new(); n];
    for (s, t) in rewired {
        in_edges[t].push(s);
    }
    for e in &mut in_edges {
        e.sort_unstable();
    }
    Topology::new(in_edges, Some(geometry), ClassTag::SmallWorld)
}
