//! One-step damage growth (Derrida map slope): the mean Hamming distance one
//! update after flipping a single node. Ordered ensembles shrink a
//! perturbation (`r < 1`), chaotic ones amplify it (`r > 1`).

use rayon::prelude::*;

use crate::batch::CompiledNetwork;
use crate::damage::{cell_stream, network_damage, EnsembleSpec};
use crate::error::{invalid, Result};
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerridaPoint {
    pub k: f64,
    pub rate: f64,
    pub std_error: f64,
}

/// Ensemble estimate of `r(K)`: `n_networks` random networks of `n` nodes,
/// `n_ics` single-node flips each.
pub fn derrida_rate(
    ensemble: &EnsembleSpec,
    k: f64,
    n: usize,
    n_networks: usize,
    n_ics: usize,
    stream: &RandomStream,
) -> Result<DerridaPoint> {
    if n_networks == 0 || n_ics == 0 {
        return Err(invalid("ensemble sizes must be at least 1"));
    }
    ensemble.validate(n, k)?;
    let root = cell_stream(&stream.named("derrida"), n, k);
    let per_net: Vec<f64> = (0..n_networks)
        .into_par_iter()
        .map(|r| {
            let s = root.child(r as u64);
            let (topology, rules) = ensemble.sample(n, k, &s)?;
            let net = CompiledNetwork::new(&topology, &rules)?;
            let d = network_damage(&net, n_ics, 1, 1, 1, &s)?;
            Ok(d.iter().sum::<f64>() / d.len() as f64)
        })
        .collect::<Result<_>>()?;
    let m = per_net.len() as f64;
    let rate = per_net.iter().sum::<f64>() / m;
    let std_error = if per_net.len() < 2 {
        0.0
    } else {
        (per_net.iter().map(|x| (x - rate).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
    };
    Ok(DerridaPoint { k, rate, std_error })
}

pub fn derrida_curve(
    ensemble: &EnsembleSpec,
    k_grid: &[f64],
    n: usize,
    n_networks: usize,
    n_ics: usize,
    stream: &RandomStream,
) -> Result<Vec<DerridaPoint>> {
    k_grid.iter().map(|&k| derrida_rate(ensemble, k, n, n_networks, n_ics, stream)).collect()
}

/// First `K` at which the sampled rate rises through 1, by linear
/// interpolation between grid points.
pub fn critical_connectivity(curve: &[DerridaPoint]) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        (a.rate < 1.0 && b.rate >= 1.0).then(|| a.k + (b.k - a.k) * (1.0 - a.rate) / (b.rate - a.rate))
    })
}

/// Annealed one-step rate for unbiased Boolean networks, `r = K/2`.
pub fn annealed_boolean_rate(k: f64, bias: f64) -> f64 {
    2.0 * bias * (1.0 - bias) * k
}
