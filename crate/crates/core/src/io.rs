//! Plain-text network files.
//!
//! ```text
//! critnet-topology v1 N=<n> class=<tag>
//! <target>\t<source>          one line per link, grouped by target
//! rules boolean               optional rule section
//! rule\t<hex lookup table>    one line per node
//! ```
//!
//! Threshold sections start with `rules threshold h=<h> sgn0=<-1|+1|hold>`
//! and list `weights\t<+/- string>` per node. Links of a target appear in
//! in-edge order, which is ascending for generated topologies and fixes the
//! lookup-table bit positions. A `geometry=torus:<side>` or
//! `geometry=ring:<len>` header token appears only when the geometry differs
//! from the class default (torus for lattice classes, none for random
//! wiring).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::generate::square_side;
use crate::rules::{LookupTable, RuleSet, ThresholdRules, ZeroSign};
use crate::topology::{ClassTag, Geometry, Topology};

const MAGIC: &str = "critnet-topology";
const VERSION: &str = "v1";

fn default_geometry(class: ClassTag, n: usize) -> Option<Geometry> {
    match class {
        ClassTag::RbnRandom => None,
        _ => square_side(n).map(|side| Geometry::Torus { side }),
    }
}

pub fn write_topology(topology: &Topology) -> String {
    let n = topology.n_nodes();
    let mut s = format!("{MAGIC} {VERSION} N={n} class={}", topology.class());
    let geometry = topology.geometry();
    if geometry != default_geometry(topology.class(), n) {
        match geometry {
            Some(Geometry::Torus { side }) => write!(s, " geometry=torus:{side}"),
            Some(Geometry::Ring { len }) => write!(s, " geometry=ring:{len}"),
            None => write!(s, " geometry=none"),
        }
        .expect("writing to a String");
    }
    s.push('\n');
    for (src, target) in topology.links() {
        writeln!(s, "{target}\t{src}").expect("writing to a String");
    }
    s
}

/// Topology followed by its rule section.
pub fn write_network(topology: &Topology, rules: &RuleSet) -> Result<String> {
    rules.check(topology)?;
    let mut s = write_topology(topology);
    match rules {
        RuleSet::Boolean(tables) => {
            s.push_str("rules boolean\n");
            for t in tables {
                writeln!(s, "rule\t{}", t.to_hex()).expect("writing to a String");
            }
        }
        RuleSet::Threshold(r) => {
            writeln!(s, "rules threshold h={} sgn0={}", r.h, r.zero.as_str()).expect("writing to a String");
            for w in &r.weights {
                let signs: String = w.iter().map(|&c| if c > 0 { '+' } else { '-' }).collect();
                writeln!(s, "weights\t{signs}").expect("writing to a String");
            }
        }
    }
    Ok(s)
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_geometry(value: &str, line: usize) -> Result<Option<Geometry>> {
    if value == "none" {
        return Ok(None);
    }
    let (kind, size) = value.split_once(':').ok_or_else(|| perr(line, format!("bad geometry {value:?}")))?;
    let size: usize = size.parse().map_err(|_| perr(line, format!("bad geometry size {size:?}")))?;
    match kind {
        "torus" => Ok(Some(Geometry::Torus { side: size })),
        "ring" => Ok(Some(Geometry::Ring { len: size })),
        _ => Err(perr(line, format!("unknown geometry {kind:?}"))),
    }
}

/// Parses a topology file with an optional rule section.
pub fn parse_network(text: &str) -> Result<(Topology, Option<RuleSet>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(MAGIC) || tokens.next() != Some(VERSION) {
        return Err(perr(hl, format!("expected `{MAGIC} {VERSION}` header")));
    }
    let (mut n, mut class, mut geometry) = (None, None, None);
    for tok in tokens {
        let (key, value) = tok.split_once('=').ok_or_else(|| perr(hl, format!("bad header token {tok:?}")))?;
        match key {
            "N" => n = Some(value.parse::<usize>().map_err(|_| perr(hl, format!("bad N {value:?}")))?),
            "class" => class = Some(value.parse::<ClassTag>().map_err(|e| perr(hl, e.to_string()))?),
            "geometry" => geometry = Some(parse_geometry(value, hl)?),
            _ => return Err(perr(hl, format!("unknown header key {key:?}"))),
        }
    }
    let n = n.ok_or_else(|| perr(hl, "header lacks N"))?;
    let class = class.ok_or_else(|| perr(hl, "header lacks class"))?;
    let geometry = geometry.unwrap_or_else(|| default_geometry(class, n));

    let mut in_edges = vec![Vec::new(); n];
    let mut rules_header = None;
    for (ln, line) in lines.by_ref() {
        if line.starts_with("rules") {
            rules_header = Some((ln, line));
            break;
        }
        if line.is_empty() {
            continue;
        }
        let (t, s) = line.split_once('\t').ok_or_else(|| perr(ln, "expected `target<TAB>source`"))?;
        let t: usize = t.parse().map_err(|_| perr(ln, format!("bad target {t:?}")))?;
        let s: usize = s.parse().map_err(|_| perr(ln, format!("bad source {s:?}")))?;
        if t >= n {
            return Err(perr(ln, format!("target {t} out of range")));
        }
        in_edges[t].push(s);
    }
    let topology = Topology::new(in_edges, geometry, class).map_err(|e| perr(hl, e.to_string()))?;
    let Some((rl, rheader)) = rules_header else {
        return Ok((topology, None));
    };
    let mut rtokens = rheader.split_whitespace().skip(1);
    let rules = match rtokens.next() {
        Some("boolean") => {
            let mut tables = Vec::with_capacity(n);
            for (ln, line) in lines.by_ref().take(n) {
                let hex = line.strip_prefix("rule\t").ok_or_else(|| perr(ln, "expected `rule<TAB><hex>`"))?;
                let k = topology.in_degree(tables.len());
                tables.push(LookupTable::from_hex(k, hex).map_err(|e| perr(ln, e.to_string()))?);
            }
            if tables.len() != n {
                return Err(perr(rl, format!("expected {n} rule lines, found {}", tables.len())));
            }
            RuleSet::Boolean(tables)
        }
        Some("threshold") => {
            let (mut h, mut zero) = (0, ZeroSign::Negative);
            for tok in rtokens {
                match tok.split_once('=') {
                    Some(("h", v)) => h = v.parse().map_err(|_| perr(rl, format!("bad h {v:?}")))?,
                    Some(("sgn0", v)) => zero = ZeroSign::parse(v).map_err(|e| perr(rl, e.to_string()))?,
                    _ => return Err(perr(rl, format!("bad rules token {tok:?}"))),
                }
            }
            let mut weights = Vec::with_capacity(n);
            for (ln, line) in lines.by_ref().take(n) {
                let signs = line.strip_prefix("weights\t").ok_or_else(|| perr(ln, "expected `weights<TAB><signs>`"))?;
                let w = signs
                    .chars()
                    .map(|c| match c {
                        '+' => Ok(1i8),
                        '-' => Ok(-1i8),
                        other => Err(perr(ln, format!("bad weight sign {other:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                weights.push(w);
            }
            if weights.len() != n {
                return Err(perr(rl, format!("expected {n} weight lines, found {}", weights.len())));
            }
            RuleSet::Threshold(ThresholdRules { weights, h, zero })
        }
        other => return Err(perr(rl, format!("unknown rule kind {other:?}"))),
    };
    if let Some((ln, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(perr(ln, format!("unexpected trailing line {extra:?}")));
    }
    rules.check(&topology).map_err(|e| perr(rl, e.to_string()))?;
    Ok((topology, Some(rules)))
}

pub fn parse_topology(text: &str) -> Result<Topology> {
    parse_network(text).map(|(t, _)| t)
}
