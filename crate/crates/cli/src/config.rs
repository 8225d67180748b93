//! Text experiment configs: `key = value` lines under `[domain]`, `[weight]`,
//! `[inequality]`, and `[search]` sections, with `#` comments. Unknown
//! sections or keys are rejected so a typo cannot silently change a run.

use cplab::lab::{Experiment, ExperimentConfig, InequalityKind};
use cplab::weights::{SearchStrategy, WeightSpec};
use cplab::{Error, GridFunction, Result};
use std::collections::BTreeMap;
use std::path::Path;

const SECTIONS: [(&str, &[&str]); 4] = [
    ("domain", &["k", "l"]),
    (
        "weight",
        &[
            "kind", "a", "left", "length", "levels", "gain", "seed", "roughness", "path",
        ],
    ),
    ("inequality", &["kind", "p", "r"]),
    ("search", &["strategy", "budget", "seed", "b", "experiment"]),
];

pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (num, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(Error::Config(format!(
                        "line {}: unknown section [{name}]",
                        num + 1
                    )));
                }
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, found {line:?}",
                    num + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(section) = &current else {
                return Err(Error::Config(format!(
                    "line {}: key {key:?} before any section",
                    num + 1
                )));
            };
            let allowed = SECTIONS
                .iter()
                .find(|(s, _)| s == section)
                .map(|(_, keys)| *keys)
                .unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key {key:?} in [{section}]",
                    num + 1
                )));
            }
            let entry = sections.get_mut(section).expect("section exists");
            if entry.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key:?} in [{section}]",
                    num + 1
                )));
            }
        }
        Ok(RawConfig { sections })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(|s| s.as_str())
    }

    fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| Error::Config(format!("missing {key} in [{section}]")))
    }

    fn parse_num<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("bad value {v:?} for {key} in [{section}]"))
            }),
        }
    }

    fn require_num<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T> {
        self.parse_num(section, key)?
            .ok_or_else(|| Error::Config(format!("missing {key} in [{section}]")))
    }
}

/// Builds the experiment description; `config_dir` anchors relative weight
/// file paths and `seed_override` takes precedence over `[search] seed`.
pub fn build(
    raw: &RawConfig,
    config_dir: &Path,
    seed_override: Option<u64>,
) -> Result<ExperimentConfig> {
    let k: u32 = raw.require_num("domain", "k")?;
    let l: u32 = raw.require_num("domain", "l")?;

    let weight = match raw.require("weight", "kind")? {
        "power" => WeightSpec::Power {
            a: raw.require_num("weight", "a")?,
        },
        "indicator" => WeightSpec::Indicator {
            left: raw.require_num("weight", "left")?,
            length: raw.require_num("weight", "length")?,
        },
        "lacunary" => WeightSpec::Lacunary {
            levels: raw.require_num("weight", "levels")?,
            gain: raw.require_num("weight", "gain")?,
        },
        "random" => WeightSpec::Random {
            seed: raw.require_num("weight", "seed")?,
            roughness: raw.require_num("weight", "roughness")?,
        },
        "file" => {
            let rel = raw.require("weight", "path")?;
            let path = config_dir.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|e| {
                Error::Config(format!("cannot read weight file {}: {e}", path.display()))
            })?;
            WeightSpec::Custom(GridFunction::from_text(&text)?)
        }
        other => {
            return Err(Error::Config(format!("unknown weight kind {other:?}")));
        }
    };

    let p: f64 = raw.parse_num("inequality", "p")?.unwrap_or(1.5);
    let r: f64 = raw.parse_num("inequality", "r")?.unwrap_or(2.0);
    let strategy = match raw.get("search", "strategy").unwrap_or("levelsets") {
        "levelsets" => SearchStrategy::LevelSets,
        "greedy" => SearchStrategy::Greedy,
        "anneal" => SearchStrategy::Anneal,
        other => {
            return Err(Error::Config(format!("unknown search strategy {other:?}")));
        }
    };
    let budget: usize = raw.parse_num("search", "budget")?.unwrap_or(100);
    let seed: u64 = seed_override
        .or(raw.parse_num("search", "seed")?)
        .unwrap_or(0);
    let b: f64 = raw.parse_num("search", "b")?.unwrap_or(4.0);
    let experiment = match raw.get("search", "experiment") {
        None => Experiment::ReverseHolder,
        Some(s) => Experiment::parse(s)?,
    };

    let cfg = ExperimentConfig {
        k,
        l,
        weight,
        p,
        r,
        strategy,
        budget,
        seed,
        b,
        experiment,
    };
    cfg.domain()?; // validates the depth cap early
    if let WeightSpec::Custom(f) = &cfg.weight {
        if f.domain().k() != k || f.domain().l() != l {
            return Err(Error::Config(
                "weight file resolution disagrees with [domain]".into(),
            ));
        }
    }
    Ok(cfg)
}

/// Inequality kind for `verify`, read from `[inequality] kind`.
pub fn inequality_kind(raw: &RawConfig) -> Result<InequalityKind> {
    InequalityKind::parse(raw.require("inequality", "kind")?)
}
