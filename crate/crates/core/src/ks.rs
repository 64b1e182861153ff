//! Locating the size-independent damage point: where the `<d>(K)` curves of
//! different system sizes cross.

use std::collections::BTreeMap;

use crate::damage::{DamageTable, NetworkClass};
use crate::error::{invalid, Result};

/// Crossings spread wider than this (standard deviation, in units of `<K>`)
/// do not count as a common intersection.
pub const DEFAULT_MAX_DISPERSION: f64 = 0.25;

/// One sign change of `<d>_{n1}(K) - <d>_{n2}(K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub n1: usize,
    pub n2: usize,
    pub k: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum KsOutcome {
    Intersection { ks: f64, dispersion: f64 },
    /// Some size pair never crosses, or the crossings are too spread out.
    NoCommonIntersection { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct KsEstimate {
    pub class: NetworkClass,
    pub damage_size: usize,
    pub crossings: Vec<Crossing>,
    /// Mean of all crossings, when there is at least one.
    pub mean: Option<f64>,
    /// Sample standard deviation of the crossings (0 for a single crossing).
    pub dispersion: Option<f64>,
    pub outcome: KsOutcome,
}

impl KsEstimate {
    pub fn ks(&self) -> Option<f64> {
        match self.outcome {
            KsOutcome::Intersection { ks, .. } => Some(ks),
            KsOutcome::NoCommonIntersection { .. } => None,
        }
    }
}

/// Sign changes of `diff` over `grid`, linearly interpolated. Exact zeros are
/// skipped so flat stretches (e.g. the all-zero `K = 0` column) are not read
/// as crossings; a zero between opposite signs is recovered by interpolation.
pub fn sign_changes(grid: &[f64], diff: &[f64]) -> Vec<f64> {
    let nonzero: Vec<(f64, f64)> = grid.iter().zip(diff).filter(|(_, d)| **d != 0.0).map(|(k, d)| (*k, *d)).collect();
    nonzero
        .windows(2)
        .filter(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0))
        .map(|w| {
            let (k0, d0) = w[0];
            let (k1, d1) = w[1];
            k0 + (k1 - k0) * d0 / (d0 - d1)
        })
        .collect()
}

/// Estimates `K_s` from every pair of system sizes in `table`.
pub fn estimate_ks(table: &DamageTable, class: NetworkClass, damage_size: usize) -> Result<KsEstimate> {
    estimate_ks_with(table, class, damage_size, DEFAULT_MAX_DISPERSION)
}

pub fn estimate_ks_with(
    table: &DamageTable,
    class: NetworkClass,
    damage_size: usize,
    max_dispersion: f64,
) -> Result<KsEstimate> {
    let mut curves: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in table.select(class, damage_size) {
        curves.entry(r.n).or_default().push((r.k, r.mean_damage));
    }
    if curves.len() < 2 {
        return Err(invalid(format!(
            "need at least two system sizes for {class} damage {damage_size}, found {}",
            curves.len()
        )));
    }
    for c in curves.values_mut() {
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let sizes: Vec<usize> = curves.keys().copied().collect();
    let mut crossings = Vec::new();
    let mut silent_pairs = Vec::new();
    for (a, &n1) in sizes.iter().enumerate() {
        for &n2 in &sizes[a + 1..] {
            let (grid, diff): (Vec<f64>, Vec<f64>) = curves[&n1]
                .iter()
                .filter_map(|&(k, d1)| {
                    curves[&n2].iter().find(|(k2, _)| (k2 - k).abs() < 1e-9).map(|&(_, d2)| (k, d1 - d2))
                })
                .unzip();
            if grid.len() < 2 {
                return Err(invalid(format!("sizes {n1} and {n2} share fewer than two grid points")));
            }
            let found = sign_changes(&grid, &diff);
            if found.is_empty() {
                silent_pairs.push((n1, n2));
            }
            crossings.extend(found.into_iter().map(|k| Crossing { n1, n2, k }));
        }
    }
    let ks: Vec<f64> = crossings.iter().map(|c| c.k).collect();
    let (mean, dispersion) = if ks.is_empty() {
        (None, None)
    } else {
        let m = ks.iter().sum::<f64>() / ks.len() as f64;
        let sd = if ks.len() < 2 {
            0.0
        } else {
            (ks.iter().map(|k| (k - m).powi(2)).sum::<f64>() / (ks.len() - 1) as f64).sqrt()
        };
        (Some(m), Some(sd))
    };
    let outcome = match (mean, dispersion) {
        _ if !silent_pairs.is_empty() => KsOutcome::NoCommonIntersection {
            reason: format!(
                "no crossing for size pair(s) {}",
                silent_pairs.iter().map(|(a, b)| format!("{a}/{b}")).collect::<Vec<_>>().join(", ")
            ),
        },
        (Some(ks), Some(sd)) if sd <= max_dispersion => KsOutcome::Intersection { ks, dispersion: sd },
        (_, Some(sd)) => KsOutcome::NoCommonIntersection {
            reason: format!("crossing dispersion {sd:.4} exceeds {max_dispersion}"),
        },
        _ => KsOutcome::NoCommonIntersection { reason: "no crossings".into() },
    };
    Ok(KsEstimate { class, damage_size, crossings, mean, dispersion, outcome })
}
