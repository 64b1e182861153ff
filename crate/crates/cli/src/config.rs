//! Flat `section.key = value` experiment configuration.
//!
//! A config starts from the defaults of its preset (`run.preset`) and every
//! other key overrides one field. `render` writes every key, so a rendered
//! config reproduces the run on its own.

use std::fmt::Write as _;
use std::path::PathBuf;

use critnet::tasks::Task;
use critnet::{NetworkClass, ZeroSign};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ConfigError {
    /// 1-based; one past the last line for keys that are missing altogether.
    pub line: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig3Rbn,
    Fig3Rtn,
    Fig4D1,
    Fig5D10,
    Fig6D20,
    KsEstimate,
    MetricsSweep,
    TaskEval,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig3Rbn,
        Preset::Fig3Rtn,
        Preset::Fig4D1,
        Preset::Fig5D10,
        Preset::Fig6D20,
        Preset::KsEstimate,
        Preset::MetricsSweep,
        Preset::TaskEval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3Rbn => "fig3-rbn",
            Preset::Fig3Rtn => "fig3-rtn",
            Preset::Fig4D1 => "fig4-d1",
            Preset::Fig5D10 => "fig5-d10",
            Preset::Fig6D20 => "fig6-d20",
            Preset::KsEstimate => "ks-estimate",
            Preset::MetricsSweep => "metrics-sweep",
            Preset::TaskEval => "task-eval",
        }
    }

    pub fn parse(s: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Presets that run a damage sweep.
    pub fn is_damage(self) -> bool {
        !matches!(self, Preset::MetricsSweep | Preset::TaskEval)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DamageConfig {
    pub classes: Vec<NetworkClass>,
    pub damage_size: usize,
    pub t_measure: usize,
    pub window: usize,
    /// Networks per grid cell before `run.scale` is applied.
    pub n_networks: usize,
    /// Initial conditions per network before `run.scale` is applied.
    pub n_ics: usize,
    pub allow_self: bool,
    pub bias: f64,
    pub zero: ZeroSign,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub k_start: f64,
    pub k_stop: f64,
    pub k_step: f64,
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        critnet::damage::k_grid(self.k_start, self.k_stop, self.k_step)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsConfig {
    /// Size of the small-world lattice.
    pub n: usize,
    pub k_base: usize,
    pub ring: bool,
    pub p_list: Vec<f64>,
    /// Power-law exponents rewired alongside the uniform case.
    pub alpha_list: Vec<f64>,
    /// Topologies per parameter point before `run.scale` is applied.
    pub replicates: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskConfig {
    pub tasks: Vec<Task>,
    pub classes: Vec<NetworkClass>,
    pub n: usize,
    pub k: f64,
    pub n_ics: usize,
    /// `None` runs `2N` updates.
    pub t_run: Option<usize>,
    pub budget: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub out: PathBuf,
    /// Multiplier on ensemble counts, in (0, 1].
    pub scale: f64,
    pub damage: DamageConfig,
    pub sweep: SweepConfig,
    pub max_dispersion: f64,
    pub metrics: MetricsConfig,
    pub task: TaskConfig,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset, seed: u64) -> Self {
        let mut cfg = ExperimentConfig {
            preset,
            seed,
            workers: 0,
            out: PathBuf::from(format!("out/{}", preset.name())),
            scale: 1.0,
            damage: DamageConfig {
                classes: vec![NetworkClass::Rbn, NetworkClass::Ca],
                damage_size: 1,
                t_measure: 200,
                window: 1,
                n_networks: 100,
                n_ics: 100,
                allow_self: true,
                bias: 0.5,
                zero: ZeroSign::Negative,
            },
            sweep: SweepConfig { n_list: vec![256, 1024, 4096], k_start: 0.25, k_stop: 4.0, k_step: 0.125 },
            max_dispersion: critnet::ks::DEFAULT_MAX_DISPERSION,
            metrics: MetricsConfig {
                n: 1024,
                k_base: 4,
                ring: false,
                p_list: vec![0.0, 0.01, 0.03, 0.1, 0.3, 1.0],
                alpha_list: vec![2.0, 4.0],
                replicates: 10,
            },
            task: TaskConfig {
                tasks: vec![Task::Density, Task::Synchronization],
                classes: vec![NetworkClass::Rbn, NetworkClass::Ca],
                n: 49,
                k: 3.0,
                n_ics: 100,
                t_run: None,
                budget: 200,
            },
        };
        let fig3 = |cfg: &mut ExperimentConfig, class| {
            cfg.damage.classes = vec![class];
            cfg.damage.n_networks = 10_000;
            cfg.sweep = SweepConfig { n_list: vec![64, 256, 1024], k_start: 1.0, k_stop: 3.0, k_step: 0.125 };
        };
        match preset {
            Preset::Fig3Rbn => fig3(&mut cfg, NetworkClass::Rbn),
            Preset::Fig3Rtn => fig3(&mut cfg, NetworkClass::Rtn),
            Preset::Fig4D1 => {}
            Preset::Fig5D10 => cfg.damage.damage_size = 10,
            Preset::Fig6D20 => cfg.damage.damage_size = 20,
            Preset::KsEstimate => {
                fig3(&mut cfg, NetworkClass::Rbn);
                cfg.damage.n_networks = 500;
                cfg.damage.n_ics = 20;
            }
            Preset::MetricsSweep => cfg.sweep.n_list = vec![4096],
            Preset::TaskEval => {}
        }
        cfg
    }

    /// Damage ensemble actually run: `n_networks` scaled with a floor of one
    /// network, `n_ics` scaled with a floor of 20 (or the configured count if
    /// that is smaller).
    pub fn scaled_ensemble(&self) -> (usize, usize) {
        (
            scaled(self.damage.n_networks, self.scale, 1),
            scaled(self.damage.n_ics, self.scale, 20),
        )
    }

    pub fn scaled_replicates(&self) -> usize {
        scaled(self.metrics.replicates, self.scale, 1)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(format!("run.scale {} outside (0, 1]", self.scale));
        }
        let d = &self.damage;
        if d.classes.is_empty() {
            return Err("damage.classes is empty".into());
        }
        if d.damage_size == 0 || d.t_measure == 0 || d.n_networks == 0 || d.n_ics == 0 {
            return Err("damage sizes and counts must be at least 1".into());
        }
        if d.window == 0 || d.window > d.t_measure {
            return Err(format!("damage.window {} must be in [1, t_measure]", d.window));
        }
        if !(0.0..=1.0).contains(&d.bias) {
            return Err(format!("damage.bias {} outside [0, 1]", d.bias));
        }
        let s = &self.sweep;
        if s.n_list.is_empty() {
            return Err("sweep.n_list is empty".into());
        }
        if !(s.k_step > 0.0) || !(s.k_stop >= s.k_start) || s.k_start < 0.0 {
            return Err(format!("sweep grid {}..{} step {} is empty", s.k_start, s.k_stop, s.k_step));
        }
        if !(self.max_dispersion >= 0.0) {
            return Err("ks.max_dispersion must be non-negative".into());
        }
        let m = &self.metrics;
        if m.p_list.is_empty() || m.replicates == 0 {
            return Err("metrics.p_list and metrics.replicates must be non-empty".into());
        }
        if m.p_list.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err("metrics.p_list values must be in [0, 1]".into());
        }
        let t = &self.task;
        if t.tasks.is_empty() || t.classes.is_empty() {
            return Err("task.tasks and task.classes must be non-empty".into());
        }
        if t.classes.contains(&NetworkClass::Rtn) {
            return Err("task.classes: rule search needs Boolean rules (rbn or ca)".into());
        }
        if t.n == 0 || t.n_ics == 0 || t.budget == 0 || t.t_run == Some(0) {
            return Err("task sizes and counts must be at least 1".into());
        }
        Ok(())
    }

    /// Every key, one per line, in a fixed order.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("run.preset", self.preset.name().into());
        kv("run.seed", self.seed.to_string());
        kv("run.workers", self.workers.to_string());
        kv("run.out", self.out.display().to_string());
        kv("run.scale", self.scale.to_string());
        let d = &self.damage;
        kv("damage.classes", join(d.classes.iter().map(|c| c.as_str())));
        kv("damage.damage_size", d.damage_size.to_string());
        kv("damage.t_measure", d.t_measure.to_string());
        kv("damage.window", d.window.to_string());
        kv("damage.n_networks", d.n_networks.to_string());
        kv("damage.n_ics", d.n_ics.to_string());
        kv("damage.allow_self", d.allow_self.to_string());
        kv("damage.bias", d.bias.to_string());
        kv("damage.zero_sign", d.zero.as_str().into());
        kv("sweep.n_list", join(&self.sweep.n_list));
        kv("sweep.k_start", self.sweep.k_start.to_string());
        kv("sweep.k_stop", self.sweep.k_stop.to_string());
        kv("sweep.k_step", self.sweep.k_step.to_string());
        kv("ks.max_dispersion", self.max_dispersion.to_string());
        let m = &self.metrics;
        kv("metrics.n", m.n.to_string());
        kv("metrics.k_base", m.k_base.to_string());
        kv("metrics.ring", m.ring.to_string());
        kv("metrics.p_list", join(&m.p_list));
        kv("metrics.alpha_list", join(&m.alpha_list));
        kv("metrics.replicates", m.replicates.to_string());
        let t = &self.task;
        kv("task.tasks", join(t.tasks.iter().map(|t| t.as_str())));
        kv("task.classes", join(t.classes.iter().map(|c| c.as_str())));
        kv("task.n", t.n.to_string());
        kv("task.k", t.k.to_string());
        kv("task.n_ics", t.n_ics.to_string());
        kv("task.t_run", t.t_run.map_or_else(|| "auto".into(), |v| v.to_string()));
        kv("task.budget", t.budget.to_string());
        s
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "run.preset" => self.preset = parse_preset(v)?,
            "run.seed" => self.seed = num(v)?,
            "run.workers" => self.workers = num(v)?,
            "run.out" => {
                if v.is_empty() {
                    return Err("run.out is empty".into());
                }
                self.out = PathBuf::from(v)
            }
            "run.scale" => self.scale = num(v)?,
            "damage.classes" => self.damage.classes = list(v, |s| s.parse().map_err(|e| format!("{e}")))?,
            "damage.damage_size" => self.damage.damage_size = num(v)?,
            "damage.t_measure" => self.damage.t_measure = num(v)?,
            "damage.window" => self.damage.window = num(v)?,
            "damage.n_networks" => self.damage.n_networks = num(v)?,
            "damage.n_ics" => self.damage.n_ics = num(v)?,
            "damage.allow_self" => self.damage.allow_self = num(v)?,
            "damage.bias" => self.damage.bias = num(v)?,
            "damage.zero_sign" => self.damage.zero = ZeroSign::parse(v).map_err(|e| e.to_string())?,
            "sweep.n_list" => self.sweep.n_list = list(v, num)?,
            "sweep.k_start" => self.sweep.k_start = num(v)?,
            "sweep.k_stop" => self.sweep.k_stop = num(v)?,
            "sweep.k_step" => self.sweep.k_step = num(v)?,
            "ks.max_dispersion" => self.max_dispersion = num(v)?,
            "metrics.n" => self.metrics.n = num(v)?,
            "metrics.k_base" => self.metrics.k_base = num(v)?,
            "metrics.ring" => self.metrics.ring = num(v)?,
            "metrics.p_list" => self.metrics.p_list = list(v, num)?,
            "metrics.alpha_list" => self.metrics.alpha_list = list(v, num)?,
            "metrics.replicates" => self.metrics.replicates = num(v)?,
            "task.tasks" => self.task.tasks = list(v, |s| Task::parse(s).map_err(|e| e.to_string()))?,
            "task.classes" => self.task.classes = list(v, |s| s.parse().map_err(|e| format!("{e}")))?,
            "task.n" => self.task.n = num(v)?,
            "task.k" => self.task.k = num(v)?,
            "task.n_ics" => self.task.n_ics = num(v)?,
            "task.t_run" => self.task.t_run = if v == "auto" { None } else { Some(num(v)?) },
            "task.budget" => self.task.budget = num(v)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }
}

fn scaled(count: usize, scale: f64, floor: usize) -> usize {
    ((count as f64 * scale).round() as usize).max(floor.min(count))
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?} as {}", std::any::type_name::<T>()))
}

fn list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| item(s.trim())).collect()
}

fn parse_preset(v: &str) -> Result<Preset, String> {
    Preset::parse(v).ok_or_else(|| {
        format!("unknown preset {v:?} (expected one of {})", join(Preset::ALL.iter().map(|p| p.name())))
    })
}

/// Parses and validates a config. `run.seed` and `run.preset` are required;
/// duplicate and unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: Vec<(usize, &str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ConfigError { line, msg: format!("expected `section.key = value`, got {body:?}") })?;
        let (key, value) = (key.trim(), value.trim());
        if !key.contains('.') {
            return Err(ConfigError { line, msg: format!("key {key:?} has no section") });
        }
        if let Some((first, ..)) = entries.iter().find(|e| e.1 == key) {
            return Err(ConfigError { line, msg: format!("duplicate key {key:?} (first set on line {first})") });
        }
        entries.push((line, key, value));
    }
    let end = text.lines().count() + 1;
    let find = |key: &str| entries.iter().find(|e| e.1 == key);
    let Some(&(seed_line, _, seed)) = find("run.seed") else {
        return Err(ConfigError { line: end, msg: "run.seed is required".into() });
    };
    let seed: u64 = num(seed).map_err(|msg| ConfigError { line: seed_line, msg })?;
    let Some(&(preset_line, _, preset)) = find("run.preset") else {
        return Err(ConfigError { line: end, msg: "run.preset is required".into() });
    };
    let preset = parse_preset(preset).map_err(|msg| ConfigError { line: preset_line, msg })?;
    let mut cfg = ExperimentConfig::preset(preset, seed);
    for &(line, key, value) in &entries {
        cfg.set(key, value).map_err(|msg| ConfigError { line, msg })?;
    }
    cfg.validate().map_err(|msg| {
        let key = msg.split_whitespace().next().unwrap_or("").trim_end_matches(':');
        let line = entries.iter().find(|e| e.1 == key).map_or(end, |e| e.0);
        ConfigError { line, msg }
    })?;
    Ok(cfg)
}
