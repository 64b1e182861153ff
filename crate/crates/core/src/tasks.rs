//! Benchmark tasks for Boolean substrates: global density classification
//! and global synchronisation, plus a greedy stochastic rule search.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::batch::{CompiledNetwork, LaneRunner, LaneState, LANES};
use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;
use crate::rules::{sample_boolean_rules, RuleSet};
use crate::state::NetworkState;
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    /// Settle on all-ones if the initial density exceeds 1/2, else all-zeros.
    Density,
    /// Reach the global cycle all-zeros <-> all-ones.
    Synchronization,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Density => "density",
            Task::Synchronization => "sync",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(Task::Density),
            "sync" | "synchronization" => Ok(Task::Synchronization),
            other => Err(invalid(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaskSpec {
    pub task: Task,
    /// Updates allowed; `None` means `2N`.
    pub t_run: Option<usize>,
    pub n_ics: usize,
}

impl TaskSpec {
    pub fn new(task: Task, n_ics: usize) -> Self {
        TaskSpec { task, t_run: None, n_ics }
    }

    pub fn steps_for(&self, n: usize) -> usize {
        self.t_run.unwrap_or(2 * n)
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.steps_for(n) == 0 {
            return Err(invalid("t_run must be at least 1"));
        }
        if self.n_ics == 0 {
            return Err(invalid("need at least one initial condition"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DensityBin {
    pub trials: usize,
    pub successes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitnessReport {
    /// Fraction of initial conditions solved.
    pub fitness: f64,
    pub n_ics: usize,
    /// Results keyed by the number of ones in the initial condition.
    pub by_ones: BTreeMap<usize, DensityBin>,
}

impl FitnessReport {
    fn from_outcomes(ics: &[NetworkState], solved: &[bool]) -> Self {
        let mut by_ones: BTreeMap<usize, DensityBin> = BTreeMap::new();
        for (ic, &ok) in ics.iter().zip(solved) {
            let bin = by_ones.entry(ic.count_ones()).or_default();
            bin.trials += 1;
            bin.successes += usize::from(ok);
        }
        let wins = solved.iter().filter(|&&b| b).count();
        FitnessReport { fitness: wins as f64 / ics.len() as f64, n_ics: ics.len(), by_ones }
    }

    /// Per-density breakdown: `ones,density,trials,successes` lines.
    pub fn breakdown_csv(&self, n: usize) -> String {
        let mut s = String::from("ones,density,trials,successes\n");
        for (ones, bin) in &self.by_ones {
            s.push_str(&format!("{ones},{:.6},{},{}\n", *ones as f64 / n as f64, bin.trials, bin.successes));
        }
        s
    }
}

/// Initial conditions with a number of ones uniform over `0..=N`, skipping
/// exactly `N/2`; IC `i` comes from `stream.child(i)`.
pub fn task_ics(n: usize, count: usize, stream: &RandomStream) -> Result<Vec<NetworkState>> {
    if n == 0 {
        return Err(invalid("network must have nodes"));
    }
    let choices: Vec<usize> = (0..=n).filter(|&c| 2 * c != n).collect();
    Ok((0..count)
        .map(|i| {
            let mut rng = stream.child(i as u64).rng();
            let ones = choices[rng.gen_range(0..choices.len())];
            let mut s = NetworkState::zeros(n);
            for node in index::sample(&mut rng, n, ones) {
                s.set(node, true);
            }
            s
        })
        .collect())
}

fn require_boolean(rules: &RuleSet) -> Result<()> {
    match rules {
        RuleSet::Boolean(_) => Ok(()),
        RuleSet::Threshold(_) => Err(invalid("tasks run on Boolean substrates only")),
    }
}

/// Runs every IC for up to `steps` updates, 64 at a time; a lane succeeds
/// when `judge` flags it at any time `0..=steps`.
fn run_until(net: &CompiledNetwork, ics: &[NetworkState], steps: usize, judge: impl Fn(&[u64]) -> u64 + Sync) -> Result<Vec<bool>> {
    let per_chunk = ics
        .par_chunks(LANES)
        .map(|chunk| {
            let mut runner = LaneRunner::new(net, LaneState::from_states(chunk)?)?;
            let mask = if chunk.len() == 64 { !0 } else { (1u64 << chunk.len()) - 1 };
            let mut hit = judge(runner.words());
            for _ in 0..steps {
                if hit & mask == mask {
                    break;
                }
                runner.step();
                hit |= judge(runner.words());
            }
            Ok((0..chunk.len()).map(|l| (hit >> l) & 1 == 1).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_chunk.into_iter().flatten().collect())
}

fn all_ones_lanes(words: &[u64]) -> u64 {
    words.iter().fold(!0u64, |acc, &w| acc & w)
}

fn all_zeros_lanes(words: &[u64]) -> u64 {
    words.iter().fold(!0u64, |acc, &w| acc & !w)
}

/// Density classification on an explicit IC list. ICs with exactly half
/// ones are rejected.
pub fn eval_density_on(topology: &Topology, rules: &RuleSet, ics: &[NetworkState], t_run: usize) -> Result<FitnessReport> {
    require_boolean(rules)?;
    let n = topology.n_nodes();
    if ics.is_empty() {
        return Err(invalid("need at least one initial condition"));
    }
    for ic in ics {
        if ic.len() != n {
            return Err(Error::LengthMismatch { left: ic.len(), right: n });
        }
        if 2 * ic.count_ones() == n {
            return Err(invalid("initial conditions of density exactly 1/2 are ambiguous"));
        }
    }
    let net = CompiledNetwork::new(topology, rules)?;
    let solved = ics
        .par_chunks(LANES)
        .map(|chunk| {
            let majority = chunk
                .iter()
                .enumerate()
                .fold(0u64, |m, (l, ic)| m | (u64::from(2 * ic.count_ones() > n) << l));
            let mut runner = LaneRunner::new(&net, LaneState::from_states(chunk)?)?;
            runner.run(t_run);
            let w = runner.words();
            let ok = (all_ones_lanes(w) & majority) | (all_zeros_lanes(w) & !majority);
            Ok((0..chunk.len()).map(|l| (ok >> l) & 1 == 1).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    Ok(FitnessReport::from_outcomes(ics, &solved))
}

pub fn eval_density(topology: &Topology, rules: &RuleSet, spec: &TaskSpec, stream: &RandomStream) -> Result<FitnessReport> {
    let n = topology.n_nodes();
    spec.validate(n)?;
    let ics = task_ics(n, spec.n_ics, &stream.named("task-ics"))?;
    eval_density_on(topology, rules, &ics, spec.steps_for(n))
}

/// Whether all-zeros and all-ones map onto each other, i.e. the global
/// period-2 cycle exists at all.
pub fn has_sync_cycle(topology: &Topology, rules: &RuleSet) -> Result<bool> {
    let n = topology.n_nodes();
    let zeros = NetworkState::zeros(n);
    let ones = NetworkState::ones(n);
    Ok(crate::dynamics::step(&zeros, topology, rules)? == ones && crate::dynamics::step(&ones, topology, rules)? == zeros)
}

/// Synchronisation on an explicit IC list: success when the trajectory
/// visits all-zeros or all-ones within `t_run` updates and those two states
/// form a 2-cycle.
pub fn eval_sync_on(topology: &Topology, rules: &RuleSet, ics: &[NetworkState], t_run: usize) -> Result<FitnessReport> {
    require_boolean(rules)?;
    let n = topology.n_nodes();
    if ics.is_empty() {
        return Err(invalid("need at least one initial condition"));
    }
    if let Some(ic) = ics.iter().find(|ic| ic.len() != n) {
        return Err(Error::LengthMismatch { left: ic.len(), right: n });
    }
    if !has_sync_cycle(topology, rules)? {
        return Ok(FitnessReport::from_outcomes(ics, &vec![false; ics.len()]));
    }
    let net = CompiledNetwork::new(topology, rules)?;
    let solved = run_until(&net, ics, t_run, |w| all_ones_lanes(w) | all_zeros_lanes(w))?;
    Ok(FitnessReport::from_outcomes(ics, &solved))
}

pub fn eval_sync(topology: &Topology, rules: &RuleSet, spec: &TaskSpec, stream: &RandomStream) -> Result<FitnessReport> {
    let n = topology.n_nodes();
    spec.validate(n)?;
    let ics = task_ics(n, spec.n_ics, &stream.named("task-ics"))?;
    eval_sync_on(topology, rules, &ics, spec.steps_for(n))
}

pub fn evaluate(topology: &Topology, rules: &RuleSet, spec: &TaskSpec, stream: &RandomStream) -> Result<FitnessReport> {
    match spec.task {
        Task::Density => eval_density(topology, rules, spec, stream),
        Task::Synchronization => eval_sync(topology, rules, spec, stream),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub rules: RuleSet,
    pub report: FitnessReport,
    /// Fitness after each evaluation that was accepted, starting with the
    /// initial rule set.
    pub accepted: Vec<f64>,
    pub evaluations: usize,
}

/// Greedy hill climbing over lookup-table bits. Each candidate flips one to
/// three random table entries of the incumbent and replaces it when its
/// fitness is at least as good. All candidates are scored on the same ICs.
pub fn rule_search(topology: &Topology, spec: &TaskSpec, budget: usize, stream: &RandomStream) -> Result<SearchResult> {
    if budget == 0 {
        return Err(invalid("budget must be at least 1"));
    }
    let n = topology.n_nodes();
    spec.validate(n)?;
    let ics = task_ics(n, spec.n_ics, &stream.named("task-ics"))?;
    let score = |rules: &RuleSet| match spec.task {
        Task::Density => eval_density_on(topology, rules, &ics, spec.steps_for(n)),
        Task::Synchronization => eval_sync_on(topology, rules, &ics, spec.steps_for(n)),
    };
    let mut best = sample_boolean_rules(topology, 0.5, &stream.named("search-init"))?;
    let mut report = score(&best)?;
    let mut accepted = vec![report.fitness];
    let mut rng = stream.named("search").rng();
    let total_entries: usize = match &best {
        RuleSet::Boolean(t) => t.iter().map(|lut| lut.len()).sum(),
        RuleSet::Threshold(_) => unreachable!("search samples Boolean rules"),
    };
    let mut evaluations = 1;
    while evaluations < budget && report.fitness < 1.0 {
        let mut cand = best.clone();
        let RuleSet::Boolean(tables) = &mut cand else { unreachable!() };
        for _ in 0..rng.gen_range(1..=3) {
            let mut e = rng.gen_range(0..total_entries);
            for lut in tables.iter_mut() {
                if e < lut.len() {
                    lut.flip(e);
                    break;
                }
                e -= lut.len();
            }
        }
        let r = score(&cand)?;
        evaluations += 1;
        if r.fitness >= report.fitness {
            best = cand;
            report = r;
            accepted.push(report.fitness);
        }
    }
    Ok(SearchResult { rules: best, report, accepted, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{find_attractor, run};
    use crate::generate::{gen_random_avg, gen_rbn_exact};
    use crate::rules::LookupTable;
    use crate::topology::ClassTag;

    fn all_and(t: &Topology) -> RuleSet {
        RuleSet::Boolean((0..t.n_nodes()).map(|i| {
            let k = t.in_degree(i);
            LookupTable::from_fn(k, |x| x == (1 << k) - 1)
        }).collect())
    }

    fn constant(t: &Topology, v: bool) -> RuleSet {
        RuleSet::Boolean((0..t.n_nodes()).map(|i| LookupTable::from_fn(t.in_degree(i), |_| v)).collect())
    }

    #[test]
    fn all_ones_stays_with_and_rules() {
        let t = gen_rbn_exact(9, 3, true, &RandomStream::new(1)).unwrap();
        let r = eval_density_on(&t, &all_and(&t), &[NetworkState::ones(9)], 18).unwrap();
        assert_eq!(r.fitness, 1.0);
    }

    #[test]
    fn constant_zero_scores_low_density_fraction() {
        let t = gen_rbn_exact(11, 2, true, &RandomStream::new(1)).unwrap();
        let mut ics = Vec::new();
        for i in 0..10 {
            let ones = if i < 4 { 2 } else { 8 };
            ics.push(NetworkState::from_bits(&(0..11).map(|j| j < ones).collect::<Vec<_>>()));
        }
        let r = eval_density_on(&t, &constant(&t, false), &ics, 22).unwrap();
        assert_eq!(r.fitness, 0.4);
        assert_eq!(r.by_ones[&2], DensityBin { trials: 4, successes: 4 });
        assert_eq!(r.by_ones[&8], DensityBin { trials: 6, successes: 0 });
    }

    #[test]
    fn density_matches_stepwise_oracle() {
        let t = gen_rbn_exact(15, 2, true, &RandomStream::new(4)).unwrap();
        let rules = sample_boolean_rules(&t, 0.5, &RandomStream::new(5)).unwrap();
        let ics = task_ics(15, 100, &RandomStream::new(6)).unwrap();
        let got = eval_density_on(&t, &rules, &ics, 30).unwrap();
        let want = ics
            .iter()
            .filter(|ic| {
                let fin = run(ic, &t, &rules, 30).unwrap();
                if 2 * ic.count_ones() > 15 { fin.is_all_ones() } else { fin.is_all_zeros() }
            })
            .count();
        assert_eq!(got.fitness, want as f64 / 100.0);
    }

    #[test]
    fn half_density_rejected_and_ics_skip_half() {
        let t = gen_rbn_exact(4, 1, true, &RandomStream::new(1)).unwrap();
        let ic = NetworkState::from_bitstring("1100").unwrap();
        assert!(eval_density_on(&t, &constant(&t, true), &[ic], 8).is_err());
        let ics = task_ics(4, 500, &RandomStream::new(2)).unwrap();
        assert!(ics.iter().all(|s| s.count_ones() != 2));
        let seen: std::collections::BTreeSet<_> = ics.iter().map(NetworkState::count_ones).collect();
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![0, 1, 3, 4]);
    }

    #[test]
    fn threshold_substrate_rejected() {
        let t = gen_rbn_exact(5, 1, true, &RandomStream::new(1)).unwrap();
        let r = crate::rules::sample_threshold_rules(&t, Default::default(), &RandomStream::new(1));
        assert!(eval_density(&t, &r, &TaskSpec::new(Task::Density, 4), &RandomStream::new(1)).is_err());
    }

    #[test]
    fn not_self_loops_synchronise() {
        let n = 6;
        let t = Topology::new((0..n).map(|i| vec![i]).collect(), None, ClassTag::RbnRandom).unwrap();
        let not = RuleSet::Boolean(vec![LookupTable::from_fn(1, |x| x == 0); n]);
        let r = eval_sync_on(&t, &not, &[NetworkState::zeros(n)], 12).unwrap();
        assert_eq!(r.fitness, 1.0);
        let r = eval_sync_on(&t, &constant(&t, true), &[NetworkState::zeros(n), NetworkState::ones(n)], 12).unwrap();
        assert_eq!(r.fitness, 0.0);
    }

    #[test]
    fn sync_agrees_with_attractor_content() {
        let root = RandomStream::new(77);
        for net in 0..60u64 {
            let n = 3 + (net as usize % 8);
            let t = gen_random_avg(n, 1.5, true, &root.child(net)).unwrap();
            // Bias toward rules that can sustain the global oscillation.
            let mut rules = sample_boolean_rules(&t, 0.5, &root.child(net).named("r")).unwrap();
            if net % 2 == 0 {
                let RuleSet::Boolean(tables) = &mut rules else { unreachable!() };
                for lut in tables.iter_mut() {
                    let top = lut.len() - 1;
                    lut.set(0, true);
                    lut.set(top, false);
                }
            }
            let ics: Vec<NetworkState> = (0..1u32 << n)
                .map(|x| NetworkState::from_bits(&(0..n).map(|i| x >> i & 1 == 1).collect::<Vec<_>>()))
                .collect();
            let cap = (1 << n) + 1;
            let got = eval_sync_on(&t, &rules, &ics, cap).unwrap();
            let zeros = NetworkState::zeros(n);
            let ones = NetworkState::ones(n);
            let want = ics
                .iter()
                .filter(|ic| {
                    let a = find_attractor(ic, &t, &rules, cap).unwrap();
                    let cyc = a.cycle_states.unwrap();
                    a.period == 2 && cyc.contains(&zeros) && cyc.contains(&ones)
                })
                .count();
            assert_eq!(got.fitness, want as f64 / ics.len() as f64, "net {net}");
        }
    }

    #[test]
    fn complement_symmetry() {
        let t = gen_rbn_exact(9, 3, true, &RandomStream::new(8)).unwrap();
        let rules = sample_boolean_rules(&t, 0.5, &RandomStream::new(9)).unwrap();
        let RuleSet::Boolean(tables) = &rules else { unreachable!() };
        let dual = RuleSet::Boolean(tables.iter().map(LookupTable::dual).collect());
        let ics = task_ics(9, 200, &RandomStream::new(10)).unwrap();
        let flipped: Vec<_> = ics.iter().map(NetworkState::complement).collect();
        let a = eval_density_on(&t, &rules, &ics, 18).unwrap();
        let b = eval_density_on(&t, &dual, &flipped, 18).unwrap();
        assert_eq!(a.fitness, b.fitness);
        for (ones, bin) in &a.by_ones {
            assert_eq!(b.by_ones[&(9 - ones)], *bin);
        }
    }

    #[test]
    fn search_budget_one_returns_initial() {
        let t = gen_rbn_exact(7, 2, true, &RandomStream::new(1)).unwrap();
        let spec = TaskSpec::new(Task::Density, 40);
        let s = RandomStream::new(3);
        let res = rule_search(&t, &spec, 1, &s).unwrap();
        let init = sample_boolean_rules(&t, 0.5, &s.named("search-init")).unwrap();
        assert_eq!(res.rules, init);
        assert_eq!(res.report, eval_density(&t, &init, &spec, &s).unwrap());
        assert_eq!(res.evaluations, 1);
        assert!(rule_search(&t, &spec, 0, &s).is_err());
    }

    #[test]
    fn search_is_monotone() {
        let t = gen_rbn_exact(9, 2, true, &RandomStream::new(1)).unwrap();
        let res = rule_search(&t, &TaskSpec::new(Task::Density, 60), 200, &RandomStream::new(5)).unwrap();
        assert!(res.accepted.windows(2).all(|w| w[1] >= w[0]));
        assert!(res.evaluations <= 200);
        assert_eq!(*res.accepted.last().unwrap(), res.report.fitness);
    }

    #[test]
    fn tiny_search_solves_single_loop() {
        let t = Topology::new(vec![vec![0]], None, ClassTag::RbnRandom).unwrap();
        for seed in 0..20 {
            let res = rule_search(&t, &TaskSpec::new(Task::Density, 16), 10, &RandomStream::new(seed)).unwrap();
            assert_eq!(res.report.fitness, 1.0, "seed {seed}");
        }
    }
}
