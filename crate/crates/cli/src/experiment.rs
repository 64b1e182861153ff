//! Running a preset: sweeps on a bounded worker pool, then CSV tables, plot
//! data, a K_s summary and a manifest in the output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use critnet::damage::{damage_sweep, DamageTable, DamageTrialSpec, EnsembleSpec, NetworkClass};
use critnet::generate::{LengthDist, SmallWorldParams, TopologySpec};
use critnet::io::write_network;
use critnet::ks::{estimate_ks_with, KsEstimate, KsOutcome};
use critnet::metrics::{components, metrics_report, METRICS_CSV_HEADER};
use critnet::tasks::{rule_search, TaskSpec};
use critnet::RandomStream;

use crate::config::{ConfigError, ExperimentConfig, Preset};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration or infeasible parameters; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Anything that went wrong while running; exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<critnet::Error> for CliError {
    fn from(e: critnet::Error) -> Self {
        match e {
            critnet::Error::InvalidParameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub const KS_CSV_HEADER: &str = "class,damage_size,ks,dispersion,n_crossings,crossings,note";
pub const TASK_CSV_HEADER: &str = "task,class,N,K,fitness,budget,seed";
pub const PERCOLATION_CSV_HEADER: &str = "N,K,replicate,n_components,largest_frac";

#[derive(Debug, Default)]
pub struct RunReport {
    /// Files written, relative to the output directory.
    pub outputs: Vec<PathBuf>,
    pub ks: Vec<KsEstimate>,
    /// Grid cells that could not be run, as log lines.
    pub skipped: Vec<String>,
}

/// Runs `cfg` and writes every artifact under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    fs::create_dir_all(&cfg.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut report = pool.install(|| match cfg.preset {
        Preset::MetricsSweep => run_metrics(cfg),
        Preset::TaskEval => run_tasks(cfg),
        _ => run_damage(cfg),
    })?;
    let mut manifest = format!("# critnet {}\n# rerun with: critnet run <this file>\n", env!("CARGO_PKG_VERSION"));
    for o in &report.outputs {
        let _ = writeln!(manifest, "# output {}", o.display());
    }
    for s in &report.skipped {
        let _ = writeln!(manifest, "# skipped {s}");
    }
    manifest.push_str(&cfg.render());
    fs::write(cfg.out.join("manifest.txt"), manifest)?;
    report.outputs.push("manifest.txt".into());
    Ok(report)
}

fn write(dir: &Path, name: &str, body: &str, outputs: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::write(dir.join(name), body)?;
    outputs.push(name.into());
    Ok(())
}

fn run_damage(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let (n_networks, n_ics) = cfg.scaled_ensemble();
    let d = &cfg.damage;
    let root = RandomStream::new(cfg.seed).named("damage");
    let grid = cfg.sweep.grid();
    let mut report = RunReport::default();
    let mut table = DamageTable::default();
    for &class in &d.classes {
        let spec = DamageTrialSpec {
            ensemble: EnsembleSpec { class, allow_self: d.allow_self, bias: d.bias, zero: d.zero },
            damage_size: d.damage_size,
            t_measure: d.t_measure,
            window: d.window,
            n_networks,
            n_ics,
        };
        let part = damage_sweep(&spec, &grid, &cfg.sweep.n_list, &root.named(class.as_str()))?;
        for s in &part.skipped {
            let line = format!("{class} N={} K={}: {}", s.n, s.k, s.reason);
            report.skipped.push(line);
        }
        table.extend(part);
    }
    if table.rows.is_empty() {
        return Err(CliError::Config("no feasible grid cell".into()));
    }
    write(&cfg.out, "damage.csv", &table.to_csv(), &mut report.outputs)?;
    let (summary, estimates) = ks_summary(&table, cfg.max_dispersion);
    write(&cfg.out, "ks.csv", &summary, &mut report.outputs)?;
    report.ks = estimates;
    for p in emit_plotdata(&table, &cfg.out.join("plot"))? {
        report.outputs.push(Path::new("plot").join(p));
    }
    Ok(report)
}

/// K_s estimate for every (class, damage size) present in `table`, as CSV
/// text plus the estimates that could be formed.
pub fn ks_summary(table: &DamageTable, max_dispersion: f64) -> (String, Vec<KsEstimate>) {
    let mut keys: Vec<(NetworkClass, usize)> = table.rows.iter().map(|r| (r.class, r.damage_size)).collect();
    keys.sort();
    keys.dedup();
    let mut csv = format!("{KS_CSV_HEADER}\n");
    let mut estimates = Vec::new();
    for (class, damage_size) in keys {
        match estimate_ks_with(table, class, damage_size, max_dispersion) {
            Ok(est) => {
                let crossings: Vec<String> =
                    est.crossings.iter().map(|c| format!("{}/{}:{:.6}", c.n1, c.n2, c.k)).collect();
                let (ks, note) = match &est.outcome {
                    KsOutcome::Intersection { ks, .. } => (format!("{ks:.6}"), "common intersection".to_string()),
                    KsOutcome::NoCommonIntersection { reason } => (String::new(), reason.clone()),
                };
                let _ = writeln!(
                    csv,
                    "{class},{damage_size},{ks},{},{},{},\"{note}\"",
                    est.dispersion.map(|d| format!("{d:.6}")).unwrap_or_default(),
                    est.crossings.len(),
                    crossings.join(";"),
                );
                estimates.push(est);
            }
            Err(e) => {
                let _ = writeln!(csv, "{class},{damage_size},,,0,,\"{e}\"");
            }
        }
    }
    (csv, estimates)
}

/// One whitespace-separated `K mean_damage std_error` file per (class,
/// damage size, N), sorted by K and printed with the same digits as the CSV.
/// Returns the file names written into `dir`.
pub fn emit_plotdata(table: &DamageTable, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut groups: BTreeMap<(NetworkClass, usize, usize), Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in &table.rows {
        groups.entry((r.class, r.damage_size, r.n)).or_default().push((r.k, r.mean_damage, r.std_error));
    }
    if !groups.is_empty() {
        fs::create_dir_all(dir)?;
    }
    let mut names = Vec::new();
    for ((class, damage_size, n), mut pts) in groups {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut body = String::from("# K mean_damage std_error\n");
        for (k, m, se) in pts {
            let _ = writeln!(body, "{k:.6} {m:.6} {se:.6}");
        }
        let name = PathBuf::from(format!("{class}_d{damage_size}_N{n}.dat"));
        fs::write(dir.join(&name), body)?;
        names.push(name);
    }
    Ok(names)
}

fn run_metrics(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let m = &cfg.metrics;
    let reps = cfg.scaled_replicates() as u64;
    let root = RandomStream::new(cfg.seed).named("metrics");
    let mut report = RunReport::default();

    let dists: Vec<(LengthDist, Option<f64>)> = std::iter::once((LengthDist::Uniform, None))
        .chain(m.alpha_list.iter().map(|&a| (LengthDist::PowerLaw { alpha: a }, Some(a))))
        .collect();
    let mut items = Vec::new();
    for &p in &m.p_list {
        for &(dist, alpha) in &dists {
            let spec = TopologySpec::small_world(m.n, SmallWorldParams { k_base: m.k_base, p, length_dist: dist, ring: m.ring });
            spec.validate()?;
            for r in 0..reps {
                items.push((spec, p, alpha, r));
            }
        }
    }
    let rows = items
        .par_iter()
        .map(|&(spec, p, alpha, r)| {
            let s = root
                .named("small-world")
                .child(alpha.map_or(u64::MAX, f64::to_bits))
                .child(p.to_bits())
                .child(r);
            let topology = spec.generate(&s)?;
            Ok(metrics_report(&topology)?.csv_row(Some(p), alpha))
        })
        .collect::<Result<Vec<String>, critnet::Error>>()?;
    let mut csv = format!("{METRICS_CSV_HEADER}\n");
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    write(&cfg.out, "metrics.csv", &csv, &mut report.outputs)?;

    let mut cells = Vec::new();
    for &n in &cfg.sweep.n_list {
        for k in cfg.sweep.grid() {
            match TopologySpec::ca_diluted(n, k).validate() {
                Ok(()) => cells.push((n, k)),
                Err(e) => {
                    let line = format!("ca N={n} K={k}: {e}");
                    report.skipped.push(line);
                }
            }
        }
    }
    let items: Vec<(usize, f64, u64)> =
        cells.iter().flat_map(|&(n, k)| (0..reps).map(move |r| (n, k, r))).collect();
    let rows = items
        .par_iter()
        .map(|&(n, k, r)| {
            let s = root.named("percolation").child(n as u64).child(k.to_bits()).child(r);
            let c = components(&TopologySpec::ca_diluted(n, k).generate(&s)?);
            Ok(format!("{n},{k:.6},{r},{},{:.6}", c.count, c.largest_fraction))
        })
        .collect::<Result<Vec<String>, critnet::Error>>()?;
    let mut csv = format!("{PERCOLATION_CSV_HEADER}\n");
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    write(&cfg.out, "percolation.csv", &csv, &mut report.outputs)?;
    Ok(report)
}

fn run_tasks(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let t = &cfg.task;
    let d = &cfg.damage;
    let root = RandomStream::new(cfg.seed).named("task");
    let mut report = RunReport::default();
    let mut csv = format!("{TASK_CSV_HEADER}\n");
    for &class in &t.classes {
        let ensemble = EnsembleSpec { class, allow_self: d.allow_self, bias: d.bias, zero: d.zero };
        for &task in &t.tasks {
            let s = root.named(class.as_str()).named(task.as_str());
            let topology = ensemble.topology_spec(t.n, t.k).generate(&s.named("topology"))?;
            let spec = TaskSpec { task, t_run: t.t_run, n_ics: t.n_ics };
            let found = rule_search(&topology, &spec, t.budget, &s)?;
            let _ = writeln!(
                csv,
                "{},{class},{},{:.6},{:.6},{},{}",
                task.as_str(),
                t.n,
                topology.mean_in_degree(),
                found.report.fitness,
                t.budget,
                cfg.seed
            );
            let stem = format!("task_{}_{class}", task.as_str());
            write(&cfg.out, &format!("{stem}_breakdown.csv"), &found.report.breakdown_csv(t.n), &mut report.outputs)?;
            write(&cfg.out, &format!("{stem}.net"), &write_network(&topology, &found.rules)?, &mut report.outputs)?;
        }
    }
    write(&cfg.out, "tasks.csv", &csv, &mut report.outputs)?;
    Ok(report)
}
