use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use critnet::damage::DamageTable;
use critnet::generate::{LengthDist, SmallWorldParams, TopologySpec};
use critnet::io::{parse_network, write_network, write_topology};
use critnet::metrics::{metrics_report, METRICS_CSV_HEADER};
use critnet::rules::{sample_boolean_rules, sample_threshold_rules};
use critnet::tasks::{evaluate, rule_search, Task, TaskSpec};
use critnet::{RandomStream, ZeroSign};
use critnet_cli::experiment::TASK_CSV_HEADER;
use critnet_cli::{emit_plotdata, ks_summary, parse_config, run_experiment, CliError, ExperimentConfig, Preset};

#[derive(Parser)]
#[command(name = "critnet", version, about = "Damage spreading and structure of random dynamical networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed; every output is a function of it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Ensemble-count multiplier in (0, 1].
    #[arg(long, global = true)]
    scale: Option<f64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    RbnExact,
    RandomAvg,
    CaLattice,
    CaDiluted,
    SmallWorld,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rules {
    Boolean,
    Threshold,
}

#[derive(Subcommand)]
enum Command {
    /// Write one random topology, optionally with rules, in the text format.
    Generate {
        kind: Kind,
        #[arg(long)]
        n: usize,
        /// In-degree (exact or mean, depending on the kind).
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        #[arg(long)]
        allow_self: bool,
        /// Rewiring probability for small worlds.
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        /// Power-law exponent of rewired link lengths.
        #[arg(long, conflicts_with = "sigma")]
        alpha: Option<f64>,
        /// Gaussian width of rewired link lengths.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 4)]
        k_base: usize,
        /// Rewire a 1D ring instead of a square torus.
        #[arg(long)]
        ring: bool,
        #[arg(long)]
        rules: Option<Rules>,
        #[arg(long, default_value_t = 0.5)]
        bias: f64,
        /// Output of a threshold unit with zero input: -1, +1 or hold.
        #[arg(long, default_value = "-1", allow_hyphen_values = true)]
        zero_sign: String,
    },
    /// Run a preset by name or a config file.
    Run { target: String },
    /// K_s summary of a damage CSV.
    Ks {
        table: PathBuf,
        #[arg(long, default_value_t = critnet::ks::DEFAULT_MAX_DISPERSION)]
        max_dispersion: f64,
    },
    /// Structural metrics of topology files, one CSV row each.
    Metrics { files: Vec<PathBuf> },
    /// Score a network on a task, or search rules for its wiring with --budget.
    Tasks {
        network: PathBuf,
        #[arg(long, value_parser = parse_task)]
        task: Task,
        #[arg(long, default_value_t = 100)]
        n_ics: usize,
        /// Updates per trial (default 2N).
        #[arg(long)]
        t_run: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Plot-ready column files from a damage CSV.
    Plotdata { table: PathBuf },
}

fn parse_task(s: &str) -> Result<Task, String> {
    Task::parse(s).map_err(|e| e.to_string())
}

fn config_err(msg: impl std::fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64, CliError> {
    seed.ok_or_else(|| config_err("--seed is required"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("critnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Generate { kind, n, k, allow_self, p, alpha, sigma, k_base, ring, rules, bias, zero_sign } => {
            let seed = require_seed(cli.seed)?;
            let length_dist = match (alpha, sigma) {
                (Some(alpha), _) => LengthDist::PowerLaw { alpha },
                (_, Some(sigma)) => LengthDist::Gaussian { sigma },
                _ => LengthDist::Uniform,
            };
            let spec = match kind {
                Kind::RbnExact => {
                    if k < 0.0 || k.fract() != 0.0 {
                        return Err(config_err(format!("rbn-exact needs an integer k, got {k}")));
                    }
                    TopologySpec::rbn_exact(n, k as usize, allow_self)
                }
                Kind::RandomAvg => TopologySpec::random_avg(n, k, allow_self),
                Kind::CaLattice => TopologySpec::ca_lattice(n),
                Kind::CaDiluted => TopologySpec::ca_diluted(n, k),
                Kind::SmallWorld => TopologySpec::small_world(n, SmallWorldParams { k_base, p, length_dist, ring }),
            };
            let root = RandomStream::new(seed);
            let topology = spec.generate(&root.named("topology"))?;
            let text = match rules {
                None => write_topology(&topology),
                Some(Rules::Boolean) => {
                    write_network(&topology, &sample_boolean_rules(&topology, bias, &root.named("rules"))?)?
                }
                Some(Rules::Threshold) => {
                    let zero = ZeroSign::parse(&zero_sign)?;
                    write_network(&topology, &sample_threshold_rules(&topology, zero, &root.named("rules")))?
                }
            };
            emit(out, &text)
        }
        Command::Run { target } => {
            let mut cfg = match Preset::parse(&target) {
                Some(p) => ExperimentConfig::preset(p, require_seed(cli.seed)?),
                None => {
                    let text = fs::read_to_string(&target)
                        .map_err(|e| config_err(format!("{target:?} is neither a preset nor a readable config: {e}")))?;
                    parse_config(&text)?
                }
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(w) = cli.workers {
                cfg.workers = w;
            }
            if let Some(s) = cli.scale {
                cfg.scale = s;
            }
            if let Some(o) = cli.out {
                cfg.out = o;
            }
            let report = run_experiment(&cfg)?;
            for line in &report.skipped {
                eprintln!("skipped {line}");
            }
            for est in &report.ks {
                match est.ks() {
                    Some(ks) => println!("{} damage {}: K_s = {ks:.4}", est.class, est.damage_size),
                    None => println!("{} damage {}: no common intersection", est.class, est.damage_size),
                }
            }
            println!("wrote {} files to {}", report.outputs.len(), cfg.out.display());
            Ok(())
        }
        Command::Ks { table, max_dispersion } => {
            let table = DamageTable::from_csv(&read(&table)?).map_err(config_err)?;
            emit(out, &ks_summary(&table, max_dispersion).0)
        }
        Command::Metrics { files } => {
            let mut csv = format!("{METRICS_CSV_HEADER}\n");
            for f in &files {
                let (topology, _) = parse_network(&read(f)?).map_err(config_err)?;
                csv.push_str(&metrics_report(&topology)?.csv_row(None, None));
                csv.push('\n');
            }
            emit(out, &csv)
        }
        Command::Tasks { network, task, n_ics, t_run, budget } => {
            let seed = require_seed(cli.seed)?;
            let (topology, rules) = parse_network(&read(&network)?).map_err(config_err)?;
            let spec = TaskSpec { task, t_run, n_ics };
            let stream = RandomStream::new(seed).named("task");
            let (report, rules) = match budget {
                Some(b) => {
                    let found = rule_search(&topology, &spec, b, &stream)?;
                    (found.report, found.rules)
                }
                None => {
                    let rules = rules.ok_or_else(|| config_err("network file has no rules; pass --budget to search"))?;
                    (evaluate(&topology, &rules, &spec, &stream)?, rules)
                }
            };
            let n = topology.n_nodes();
            let row = format!(
                "{},{},{n},{:.6},{:.6},{},{seed}\n",
                task.as_str(),
                topology.class(),
                topology.mean_in_degree(),
                report.fitness,
                budget.unwrap_or(0)
            );
            match out {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join("tasks.csv"), format!("{TASK_CSV_HEADER}\n{row}"))?;
                    fs::write(dir.join("breakdown.csv"), report.breakdown_csv(n))?;
                    if budget.is_some() {
                        fs::write(dir.join("best.net"), write_network(&topology, &rules)?)?;
                    }
                }
                None => print!("{TASK_CSV_HEADER}\n{row}"),
            }
            Ok(())
        }
        Command::Plotdata { table } => {
            let dir = out.ok_or_else(|| config_err("plotdata needs --out <dir>"))?;
            let table = DamageTable::from_csv(&read(&table)?).map_err(config_err)?;
            for f in emit_plotdata(&table, dir)? {
                println!("{}", dir.join(f).display());
            }
            Ok(())
        }
    }
}
