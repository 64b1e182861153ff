//! Damage spreading: Hamming distance between a perturbed and an unperturbed
//! copy of the same network after `T` synchronous updates, averaged over
//! ensembles of networks and initial conditions.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::batch::{CompiledNetwork, LaneRunner, LaneState};
use crate::error::{invalid, Error, Result};
use crate::generate::TopologySpec;
use crate::rng::RandomStream;
use crate::rules::{sample_boolean_rules, sample_threshold_rules, RuleKind, RuleSet, ZeroSign};
use crate::state::{perturb, random_state_with, validate_node_set, NetworkState};
use crate::topology::Topology;

/// Network family of a damage experiment: wiring plus rule variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NetworkClass {
    /// Random wiring with `round(N<K>)` links, random lookup tables.
    Rbn,
    /// Random wiring with `round(N<K>)` links, +-1 threshold units.
    Rtn,
    /// Diluted folded von Neumann lattice, random lookup tables.
    Ca,
}

impl NetworkClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkClass::Rbn => "rbn",
            NetworkClass::Rtn => "rtn",
            NetworkClass::Ca => "ca",
        }
    }

    pub fn rule_kind(self) -> RuleKind {
        match self {
            NetworkClass::Rtn => RuleKind::Threshold,
            NetworkClass::Rbn | NetworkClass::Ca => RuleKind::Boolean,
        }
    }
}

impl std::fmt::Display for NetworkClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetworkClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbn" => Ok(NetworkClass::Rbn),
            "rtn" => Ok(NetworkClass::Rtn),
            "ca" => Ok(NetworkClass::Ca),
            other => Err(invalid(format!("unknown network class {other:?}"))),
        }
    }
}

/// How one random network instance is built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub class: NetworkClass,
    /// Self-loops for the random-wiring classes. Lattices never have them.
    pub allow_self: bool,
    /// Probability of a 1 in random lookup tables.
    pub bias: f64,
    pub zero: ZeroSign,
}

impl EnsembleSpec {
    pub fn new(class: NetworkClass) -> Self {
        EnsembleSpec { class, allow_self: true, bias: 0.5, zero: ZeroSign::Negative }
    }

    pub fn topology_spec(&self, n: usize, k: f64) -> TopologySpec {
        match self.class {
            NetworkClass::Rbn | NetworkClass::Rtn => TopologySpec::random_avg(n, k, self.allow_self),
            NetworkClass::Ca => TopologySpec::ca_diluted(n, k),
        }
    }

    pub fn validate(&self, n: usize, k: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&self.bias) {
            return Err(invalid(format!("bias {} outside [0,1]", self.bias)));
        }
        self.topology_spec(n, k).validate()
    }

    /// Topology and rules of the replicate addressed by `stream`.
    pub fn sample(&self, n: usize, k: f64, stream: &RandomStream) -> Result<(Topology, RuleSet)> {
        let topology = self.topology_spec(n, k).generate(&stream.named("topology"))?;
        let rules = match self.class.rule_kind() {
            RuleKind::Boolean => sample_boolean_rules(&topology, self.bias, &stream.named("rules"))?,
            RuleKind::Threshold => sample_threshold_rules(&topology, self.zero, &stream.named("rules")),
        };
        Ok((topology, rules))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DamageTrialSpec {
    pub ensemble: EnsembleSpec,
    pub damage_size: usize,
    pub t_measure: usize,
    /// Average the distance over the last `window` updates up to `t_measure`;
    /// 1 measures at the single instant `t_measure`.
    pub window: usize,
    pub n_networks: usize,
    pub n_ics: usize,
}

impl DamageTrialSpec {
    pub fn new(class: NetworkClass) -> Self {
        DamageTrialSpec {
            ensemble: EnsembleSpec::new(class),
            damage_size: 1,
            t_measure: 200,
            window: 1,
            n_networks: 500,
            n_ics: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.damage_size == 0 {
            return Err(invalid("damage size must be at least 1"));
        }
        if self.t_measure == 0 {
            return Err(invalid("t_measure must be at least 1"));
        }
        if self.window == 0 || self.window > self.t_measure {
            return Err(invalid(format!("window {} must be in [1, t_measure]", self.window)));
        }
        if self.n_networks == 0 || self.n_ics == 0 {
            return Err(invalid("ensemble sizes must be at least 1"));
        }
        Ok(())
    }
}

fn check_pair(topology: &Topology, ic: &NetworkState, damage_nodes: &[usize]) -> Result<()> {
    if ic.len() != topology.n_nodes() {
        return Err(Error::LengthMismatch { left: ic.len(), right: topology.n_nodes() });
    }
    validate_node_set(damage_nodes, ic.len())
}

/// Per-step Hamming distance between the run from `ic` and the run from `ic`
/// with `damage_nodes` flipped; element `t` is the distance after `t` updates.
pub fn damage_timeseries(
    topology: &Topology,
    rules: &RuleSet,
    ic: &NetworkState,
    damage_nodes: &[usize],
    t_max: usize,
) -> Result<Vec<usize>> {
    check_pair(topology, ic, damage_nodes)?;
    let net = CompiledNetwork::new(topology, rules)?;
    let lanes = LaneState::from_states(&[ic.clone(), perturb(ic, damage_nodes)?])?;
    let mut runner = LaneRunner::new(&net, lanes)?;
    let distance = |w: &[u64]| w.iter().filter(|&&x| (x ^ (x >> 1)) & 1 == 1).count();
    let mut trace = Vec::with_capacity(t_max + 1);
    trace.push(distance(runner.words()));
    for _ in 0..t_max {
        runner.step();
        trace.push(distance(runner.words()));
    }
    Ok(trace)
}

/// Hamming distance after `t_measure` updates.
pub fn damage_trial(
    topology: &Topology,
    rules: &RuleSet,
    ic: &NetworkState,
    damage_nodes: &[usize],
    t_measure: usize,
) -> Result<usize> {
    Ok(*damage_timeseries(topology, rules, ic, damage_nodes, t_measure)?.last().expect("non-empty trace"))
}

/// Initial conditions per lane batch: lanes `0..32` run the unperturbed
/// copies, lanes `32..64` the perturbed ones.
const PAIRS_PER_BATCH: usize = 32;

/// Mean measured damage for each initial condition of one network.
///
/// IC `j` and its damage set come from `stream.named("ic").child(j)` and
/// `stream.named("damage").child(j)`.
pub fn network_damage(
    net: &CompiledNetwork,
    n_ics: usize,
    damage_size: usize,
    t_measure: usize,
    window: usize,
    stream: &RandomStream,
) -> Result<Vec<f64>> {
    let n = net.n_nodes();
    if damage_size > n {
        return Err(invalid(format!("damage size {damage_size} exceeds N={n}")));
    }
    let ic_root = stream.named("ic");
    let dmg_root = stream.named("damage");
    let mut out = Vec::with_capacity(n_ics);
    let mut start = 0;
    while start < n_ics {
        let count = PAIRS_PER_BATCH.min(n_ics - start);
        let mut lanes = LaneState::zeros(n);
        for j in 0..count {
            let mut rng = ic_root.child((start + j) as u64).rng();
            let ic = random_state_with(n, &mut rng);
            lanes.set_lane(j, &ic)?;
            lanes.set_lane(PAIRS_PER_BATCH + j, &ic)?;
            let mut rng = dmg_root.child((start + j) as u64).rng();
            for node in index::sample(&mut rng, n, damage_size) {
                lanes.flip(node, 1u64 << (PAIRS_PER_BATCH + j));
            }
        }
        let mask = if count == 64 { !0 } else { (1u64 << count) - 1 };
        let mut runner = LaneRunner::new(net, lanes)?;
        let mut sums = vec![0usize; count];
        let first_counted = t_measure + 1 - window;
        for t in 1..=t_measure {
            runner.step();
            let words = runner.words();
            if t >= first_counted {
                accumulate(words, mask, &mut sums);
            }
            // Healed pairs stay healed: identical states evolve identically.
            if words.iter().all(|w| (w ^ (w >> PAIRS_PER_BATCH)) & mask == 0) {
                break;
            }
        }
        out.extend(sums.iter().map(|&s| s as f64 / window as f64));
        start += count;
    }
    Ok(out)
}

fn accumulate(words: &[u64], mask: u64, sums: &mut [usize]) {
    for &w in words {
        let mut d = (w ^ (w >> PAIRS_PER_BATCH)) & mask;
        while d != 0 {
            sums[d.trailing_zeros() as usize] += 1;
            d &= d - 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DamageRow {
    pub class: NetworkClass,
    pub n: usize,
    pub k: f64,
    pub damage_size: usize,
    pub mean_damage: f64,
    pub std_error: f64,
    pub n_networks: usize,
    pub n_ics: usize,
    pub t_measure: usize,
    pub seed: u64,
}

/// A grid cell that could not be run, with the reason.
#[derive(Clone, Debug, PartialEq)]
pub struct SkippedCell {
    pub n: usize,
    pub k: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DamageTable {
    pub rows: Vec<DamageRow>,
    pub skipped: Vec<SkippedCell>,
}

pub const DAMAGE_CSV_HEADER: &str = "class,N,K,damage_size,mean_damage,std_error,n_networks,n_ics,t_measure,seed";

impl DamageTable {
    pub fn extend(&mut self, other: DamageTable) {
        self.rows.extend(other.rows);
        self.skipped.extend(other.skipped);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(DAMAGE_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{:.6},{},{:.6},{:.6},{},{},{},{}",
                r.class, r.n, r.k, r.damage_size, r.mean_damage, r.std_error, r.n_networks, r.n_ics, r.t_measure, r.seed
            )
            .expect("writing to a String");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == DAMAGE_CSV_HEADER => {}
            _ => return Err(Error::Parse { line: 1, msg: "missing damage table header".into() }),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.trim().split(',').collect();
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            if f.len() != 10 {
                return Err(perr(format!("expected 10 fields, found {}", f.len())));
            }
            fn num<T: FromStr>(s: &str, line: usize) -> Result<T> {
                s.parse().map_err(|_| Error::Parse { line, msg: format!("bad number {s:?}") })
            }
            rows.push(DamageRow {
                class: f[0].parse().map_err(|e: Error| perr(e.to_string()))?,
                n: num(f[1], i + 1)?,
                k: num(f[2], i + 1)?,
                damage_size: num(f[3], i + 1)?,
                mean_damage: num(f[4], i + 1)?,
                std_error: num(f[5], i + 1)?,
                n_networks: num(f[6], i + 1)?,
                n_ics: num(f[7], i + 1)?,
                t_measure: num(f[8], i + 1)?,
                seed: num(f[9], i + 1)?,
            });
        }
        Ok(DamageTable { rows, skipped: Vec::new() })
    }

    /// Rows of one class and damage size.
    pub fn select(&self, class: NetworkClass, damage_size: usize) -> impl Iterator<Item = &DamageRow> {
        self.rows.iter().filter(move |r| r.class == class && r.damage_size == damage_size)
    }

    pub fn get(&self, class: NetworkClass, damage_size: usize, n: usize, k: f64) -> Option<&DamageRow> {
        self.select(class, damage_size).find(|r| r.n == n && (r.k - k).abs() < 1e-9)
    }
}

/// Stream of the `net`-th network replicate of cell `(n, k)`.
pub fn cell_stream(root: &RandomStream, n: usize, k: f64) -> RandomStream {
    root.child(n as u64).child(k.to_bits())
}

/// Mean and standard error over network replicates of their per-network
/// mean damage. With a single network the error falls back to the spread
/// over its initial conditions.
fn summarize(per_network: &[Vec<f64>]) -> (f64, f64) {
    let means: Vec<f64> = per_network.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    let samples: &[f64] = if means.len() >= 2 { &means } else { &per_network[0] };
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let se = if samples.len() < 2 {
        0.0
    } else {
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    };
    (mean, se)
}

/// Ensemble damage for every `(N, <K>)` cell.
///
/// Work items are (cell, network replicate) pairs addressed by their own
/// stream path, run on the current rayon pool and reduced in grid order, so
/// the table does not depend on the number of worker threads.
pub fn damage_sweep(
    spec: &DamageTrialSpec,
    k_grid: &[f64],
    n_list: &[usize],
    stream: &RandomStream,
) -> Result<DamageTable> {
    spec.validate()?;
    if k_grid.is_empty() || n_list.is_empty() {
        return Err(invalid("K grid and N list must be non-empty"));
    }
    let mut table = DamageTable::default();
    let mut cells = Vec::new();
    for &n in n_list {
        for &k in k_grid {
            let feasible = spec.ensemble.validate(n, k).and_then(|_| {
                if spec.damage_size > n {
                    Err(invalid(format!("damage size {} exceeds N={n}", spec.damage_size)))
                } else {
                    Ok(())
                }
            });
            match feasible {
                Ok(()) => cells.push((n, k)),
                Err(e) => table.skipped.push(SkippedCell { n, k, reason: e.to_string() }),
            }
        }
    }
    let items: Vec<(usize, usize)> =
        (0..cells.len()).flat_map(|c| (0..spec.n_networks).map(move |r| (c, r))).collect();
    let results: Vec<Result<Vec<f64>>> = items
        .par_iter()
        .map(|&(c, r)| {
            let (n, k) = cells[c];
            let s = cell_stream(stream, n, k).child(r as u64);
            let (topology, rules) = spec.ensemble.sample(n, k, &s)?;
            let net = CompiledNetwork::new(&topology, &rules)?;
            network_damage(&net, spec.n_ics, spec.damage_size, spec.t_measure, spec.window, &s)
        })
        .collect();
    let mut results = results.into_iter();
    for &(n, k) in &cells {
        let per_network = results.by_ref().take(spec.n_networks).collect::<Result<Vec<_>>>()?;
        let (mean_damage, std_error) = summarize(&per_network);
        table.rows.push(DamageRow {
            class: spec.ensemble.class,
            n,
            k,
            damage_size: spec.damage_size,
            mean_damage,
            std_error,
            n_networks: spec.n_networks,
            n_ics: spec.n_ics,
            t_measure: spec.t_measure,
            seed: stream.seed(),
        });
    }
    Ok(table)
}

/// Default sweep grid: 0.25 to 4.0 in steps of 0.125.
pub fn default_k_grid() -> Vec<f64> {
    k_grid(0.25, 4.0, 0.125)
}

/// Inclusive arithmetic grid; endpoints are hit exactly when `step` divides
/// the range.
pub fn k_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// Uniform choice of `size` distinct nodes.
pub fn random_damage_set<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Vec<usize> {
    index::sample(rng, n, size).into_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::run;
    use crate::generate::gen_random_avg;
    use crate::rules::LookupTable;
    use crate::state::hamming_distance;
    use crate::topology::ClassTag;

    #[test]
    fn constant_network_heals() {
        let t = gen_random_avg(50, 0.0, true, &RandomStream::new(1)).unwrap();
        let r = sample_boolean_rules(&t, 0.5, &RandomStream::new(2)).unwrap();
        let ic = NetworkState::zeros(50);
        assert_eq!(damage_trial(&t, &r, &ic, &[7], 200).unwrap(), 0);
        let trace = damage_timeseries(&t, &r, &ic, &[1, 2, 3], 5).unwrap();
        assert_eq!(trace, vec![3, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn empty_damage_set_is_zero() {
        let t = gen_random_avg(40, 3.0, true, &RandomStream::new(1)).unwrap();
        let r = sample_boolean_rules(&t, 0.5, &RandomStream::new(2)).unwrap();
        let ic = crate::state::random_state(40, &RandomStream::new(3)).unwrap();
        assert_eq!(damage_timeseries(&t, &r, &ic, &[], 20).unwrap(), vec![0; 21]);
        assert!(damage_trial(&t, &r, &ic, &[3, 3], 5).is_err());
    }

    #[test]
    fn four_node_net_matches_two_runs() {
        let t = Topology::new(vec![vec![1, 3], vec![0, 2], vec![3], vec![0, 1, 2]], None, ClassTag::RbnRandom).unwrap();
        let r = RuleSet::Boolean(vec![
            LookupTable::from_hex(2, "6").unwrap(),
            LookupTable::from_hex(2, "e").unwrap(),
            LookupTable::from_hex(1, "1").unwrap(),
            LookupTable::from_hex(3, "96").unwrap(),
        ]);
        for x in 0..16u32 {
            let ic = NetworkState::from_bits(&(0..4).map(|i| x >> i & 1 == 1).collect::<Vec<_>>());
            for d in 0..4 {
                for tm in [1, 2, 7] {
                    let a = run(&ic, &t, &r, tm).unwrap();
                    let b = run(&perturb(&ic, &[d]).unwrap(), &t, &r, tm).unwrap();
                    assert_eq!(damage_trial(&t, &r, &ic, &[d], tm).unwrap(), hamming_distance(&a, &b).unwrap());
                }
            }
        }
    }

    #[test]
    fn k_zero_column_is_zero() {
        let mut spec = DamageTrialSpec::new(NetworkClass::Rbn);
        spec.n_networks = 4;
        spec.n_ics = 5;
        spec.damage_size = 3;
        spec.t_measure = 3;
        for class in [NetworkClass::Rbn, NetworkClass::Rtn, NetworkClass::Ca] {
            spec.ensemble.class = class;
            let table = damage_sweep(&spec, &[0.0], &[16, 64], &RandomStream::new(7)).unwrap();
            assert_eq!(table.rows.len(), 2);
            assert!(table.rows.iter().all(|r| r.mean_damage == 0.0 && r.std_error == 0.0));
        }
    }

    #[test]
    fn infeasible_cells_are_skipped() {
        let mut spec = DamageTrialSpec::new(NetworkClass::Ca);
        spec.n_networks = 2;
        spec.n_ics = 2;
        spec.t_measure = 2;
        let table = damage_sweep(&spec, &[1.0, 4.5], &[16, 20], &RandomStream::new(7)).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.skipped.len(), 3);
    }

    #[test]
    fn csv_round_trip() {
        let mut spec = DamageTrialSpec::new(NetworkClass::Rbn);
        spec.n_networks = 3;
        spec.n_ics = 4;
        spec.t_measure = 10;
        let table = damage_sweep(&spec, &[1.0, 2.5], &[32], &RandomStream::new(3)).unwrap();
        let csv = table.to_csv();
        assert!(csv.starts_with(DAMAGE_CSV_HEADER));
        let back = DamageTable::from_csv(&csv).unwrap();
        assert_eq!(back.to_csv(), csv);
        assert!(DamageTable::from_csv("nope\n").is_err());
    }

    #[test]
    fn grid_defaults() {
        let g = default_k_grid();
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 0.25);
        assert_eq!(*g.last().unwrap(), 4.0);
        assert_eq!(k_grid(1.0, 3.0, 0.125).len(), 17);
    }
}
