//! Synchronous time evolution and attractor detection on single states.
//!
//! These are the reference (per-node) engines. [`crate::batch`] evaluates the
//! same update rule on 64 trajectories at once and is checked against them.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rules::{RuleSet, ThresholdRules, ZeroSign};
use crate::state::NetworkState;
use crate::topology::Topology;

fn check(state: &NetworkState, topology: &Topology, rules: &RuleSet) -> Result<()> {
    if state.len() != topology.n_nodes() {
        return Err(Error::LengthMismatch { left: state.len(), right: topology.n_nodes() });
    }
    rules.check(topology)
}

/// Output of a threshold unit for weighted sum `f = sum c_ij s_j + h`.
#[inline]
pub(crate) fn threshold_output(f: i32, zero: ZeroSign, current: bool) -> bool {
    match f.cmp(&0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => match zero {
            ZeroSign::Negative => false,
            ZeroSign::Positive => true,
            ZeroSign::Hold => current,
        },
    }
}

fn node_output(state: &NetworkState, topology: &Topology, rules: &RuleSet, i: usize) -> bool {
    let srcs = topology.in_edges(i);
    match rules {
        RuleSet::Boolean(tables) => {
            let x = srcs
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &s)| acc | (usize::from(state.get(s)) << j));
            tables[i].get(x)
        }
        RuleSet::Threshold(ThresholdRules { weights, h, zero }) => {
            let f: i32 = srcs
                .iter()
                .zip(&weights[i])
                .map(|(&s, &c)| i32::from(c) * i32::from(state.spin(s)))
                .sum::<i32>()
                + h;
            threshold_output(f, *zero, state.get(i))
        }
    }
}

fn step_unchecked(state: &NetworkState, topology: &Topology, rules: &RuleSet, out: &mut NetworkState) {
    for i in 0..topology.n_nodes() {
        out.set(i, node_output(state, topology, rules, i));
    }
}

/// One synchronous update: every node reads its inputs at time `t`.
pub fn step(state: &NetworkState, topology: &Topology, rules: &RuleSet) -> Result<NetworkState> {
    check(state, topology, rules)?;
    let mut out = NetworkState::zeros(state.len());
    step_unchecked(state, topology, rules, &mut out);
    Ok(out)
}

/// State after `t_max` synchronous updates.
pub fn run(state: &NetworkState, topology: &Topology, rules: &RuleSet, t_max: usize) -> Result<NetworkState> {
    check(state, topology, rules)?;
    let mut cur = state.clone();
    let mut next = NetworkState::zeros(state.len());
    for _ in 0..t_max {
        step_unchecked(&cur, topology, rules, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Recorded states of one run, at times `0, stride, 2*stride, ...` and
/// always including the final time.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<usize>,
    pub states: Vec<NetworkState>,
}

impl Trajectory {
    pub fn final_state(&self) -> &NetworkState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

pub fn run_trajectory(
    state: &NetworkState,
    topology: &Topology,
    rules: &RuleSet,
    t_max: usize,
    stride: usize,
) -> Result<Trajectory> {
    check(state, topology, rules)?;
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be positive".into()));
    }
    let mut times = vec![0];
    let mut states = vec![state.clone()];
    let mut cur = state.clone();
    let mut next = NetworkState::zeros(state.len());
    for t in 1..=t_max {
        step_unchecked(&cur, topology, rules, &mut next);
        std::mem::swap(&mut cur, &mut next);
        if t % stride == 0 || t == t_max {
            times.push(t);
            states.push(cur.clone());
        }
    }
    Ok(Trajectory { times, states })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttractorInfo {
    /// Updates before the trajectory first enters the cycle.
    pub transient: usize,
    pub period: usize,
    /// The cycle, starting at the first cycle state reached. Present when the
    /// search stored its trajectory.
    pub cycle_states: Option<Vec<NetworkState>>,
}

/// States kept in memory by [`find_attractor`] before it switches to
/// constant-memory cycle detection.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 20;

/// First-revisit decomposition of the trajectory from `state`.
///
/// Fails with [`Error::StepCapExceeded`] when no state repeats within
/// `step_cap` updates.
pub fn find_attractor(
    state: &NetworkState,
    topology: &Topology,
    rules: &RuleSet,
    step_cap: usize,
) -> Result<AttractorInfo> {
    find_attractor_with_budget(state, topology, rules, step_cap, DEFAULT_MEMORY_BUDGET)
}

pub fn find_attractor_with_budget(
    state: &NetworkState,
    topology: &Topology,
    rules: &RuleSet,
    step_cap: usize,
    memory_budget: usize,
) -> Result<AttractorInfo> {
    check(state, topology, rules)?;
    if step_cap == 0 {
        return Err(Error::InvalidParameter("step cap must be at least 1".into()));
    }
    let mut seen: HashMap<NetworkState, usize> = HashMap::new();
    let mut history = vec![state.clone()];
    seen.insert(state.clone(), 0);
    let mut cur = state.clone();
    let mut next = NetworkState::zeros(state.len());
    for t in 1..=step_cap {
        step_unchecked(&cur, topology, rules, &mut next);
        std::mem::swap(&mut cur, &mut next);
        if let Some(&first) = seen.get(&cur) {
            let cycle = history.split_off(first);
            return Ok(AttractorInfo { transient: first, period: t - first, cycle_states: Some(cycle) });
        }
        if seen.len() >= memory_budget {
            return brent(state, topology, rules, step_cap);
        }
        seen.insert(cur.clone(), t);
        history.push(cur.clone());
    }
    Err(Error::StepCapExceeded { cap: step_cap })
}

/// Brent's cycle detection; constant memory, no stored cycle.
fn brent(state: &NetworkState, topology: &Topology, rules: &RuleSet, step_cap: usize) -> Result<AttractorInfo> {
    let n = state.len();
    let mut scratch = NetworkState::zeros(n);
    let mut advance = |s: &mut NetworkState| {
        step_unchecked(s, topology, rules, &mut scratch);
        std::mem::swap(s, &mut scratch);
    };
    let hare_cap = step_cap.saturating_mul(2).saturating_add(2);
    let mut power = 1usize;
    let mut period = 1usize;
    let mut tortoise = state.clone();
    let mut hare = state.clone();
    advance(&mut hare);
    let mut hare_steps = 1usize;
    while tortoise != hare {
        if hare_steps > hare_cap {
            return Err(Error::StepCapExceeded { cap: step_cap });
        }
        if power == period {
            tortoise = hare.clone();
            power *= 2;
            period = 0;
        }
        advance(&mut hare);
        hare_steps += 1;
        period += 1;
    }
    let mut tortoise = state.clone();
    let mut hare = state.clone();
    for _ in 0..period {
        advance(&mut hare);
    }
    let mut transient = 0;
    while tortoise != hare {
        advance(&mut tortoise);
        advance(&mut hare);
        transient += 1;
    }
    if transient + period > step_cap {
        return Err(Error::StepCapExceeded { cap: step_cap });
    }
    Ok(AttractorInfo { transient, period, cycle_states: None })
}
