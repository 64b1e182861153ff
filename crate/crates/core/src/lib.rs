//! Simulation toolkit for random dynamical networks: random Boolean networks,
//! random threshold networks, diluted cellular automata and small-world
//! lattices.
//!
//! The crate covers wiring generation ([`generate`]), rule sampling
//! ([`rules`]), synchronous dynamics and attractors ([`dynamics`], with the
//! 64-lane engine in [`batch`]), ensemble damage spreading ([`damage`],
//! [`ks`], [`derrida`]), structural metrics ([`metrics`]) and benchmark
//! tasks ([`tasks`]). All randomness flows from a [`RandomStream`], so every
//! result is a pure function of a seed and a stream path.

pub mod batch;
pub mod damage;
pub mod derrida;
pub mod dynamics;
pub mod error;
pub mod generate;
pub mod io;
pub mod ks;
pub mod metrics;
pub mod rng;
pub mod rules;
pub mod state;
pub mod tasks;
pub mod topology;

pub use damage::{damage_sweep, damage_timeseries, damage_trial, DamageRow, DamageTable, DamageTrialSpec, EnsembleSpec, NetworkClass};
pub use dynamics::{find_attractor, run, step, AttractorInfo, Trajectory};
pub use error::{Error, Result};
pub use generate::{LengthDist, SmallWorldParams, TopologyClass, TopologySpec};
pub use ks::{estimate_ks, KsEstimate, KsOutcome};
pub use rng::RandomStream;
pub use rules::{LookupTable, RuleKind, RuleSet, ThresholdRules, ZeroSign};
pub use state::{hamming_distance, perturb, random_state, NetworkState};
pub use topology::{ClassTag, Geometry, NodeId, Topology};
