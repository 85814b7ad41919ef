//! Simulation parameters, the six reference scenarios, and the flat
//! `key = value` configuration format.
//!
//! A document is a sequence of lines. `#` starts a comment that runs to the
//! end of the line; blank lines are ignored; every other line is
//! `key = value`. Keys are the snake_case field names of [`SimParams`].
//! Booleans accept `true`/`false`/`on`/`off`. Keys missing from a document
//! keep their scenario-1 value, so an empty document parses to `preset(1)`.
//!
//! Sweep files reuse the same grammar and additionally allow list values
//! (`key = [a, b, c]`); see [`parse_document`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use thiserror::Error;

use crate::world::GRID_EXTENT;

/// Probability per tick of each influx event (ten per year at one tick per day).
pub const DEFAULT_INFLUX_PROB: f64 = 10.0 / 365.0;

pub const SCENARIO_COUNT: u32 = 6;

/// Every tunable of a run.
///
/// Energies, myelin amounts and radii are real-valued; head counts are
/// integers. `mean_treg`, `kill_energy_gain` and `influx_prob` have no
/// reference-table value and default to 10, 5 and 10/365.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub init_treg_n: u32,
    pub init_teff_n: u32,
    pub init_virus_n: u32,
    pub treg_life: f64,
    pub teff_life: f64,
    pub v_energy: f64,
    pub cytokine_energy: f64,
    /// Chance (percent) per tick that a Treg tries to divide.
    pub treg_repro_pct: f64,
    /// Maximum Teff duplication rate, in percent.
    pub teff_repro_pct: f64,
    pub treg_radius: f64,
    pub v_radius: f64,
    /// Per-contact activation probability.
    pub mimicry: f64,
    pub master_seed: u64,
    pub disable_treg: bool,
    /// Annotate snapshots with per-agent energy.
    pub show_energy: bool,
    pub init_mye: f64,
    pub ate_mye: f64,
    pub rec_mye: f64,
    /// Ticks between regrowth events; 0 disables regrowth.
    pub mye_regrow_time: u32,
    pub bbb_countdown: u32,
    pub cytokine_n: u32,
    pub hill1: f64,
    pub hill2: f64,
    pub patch_density: u32,
    pub mean_treg: f64,
    pub kill_energy_gain: f64,
    pub influx_prob: f64,
    pub ticks: u32,
    pub grid_extent: u32,
}

/// Canonical key order used by [`SimParams::to_config_string`].
pub const KEYS: &[&str] = &[
    "init_treg_n",
    "init_teff_n",
    "init_virus_n",
    "treg_life",
    "teff_life",
    "v_energy",
    "cytokine_energy",
    "treg_repro_pct",
    "teff_repro_pct",
    "treg_radius",
    "v_radius",
    "mimicry",
    "master_seed",
    "disable_treg",
    "show_energy",
    "init_mye",
    "ate_mye",
    "rec_mye",
    "mye_regrow_time",
    "bbb_countdown",
    "cytokine_n",
    "hill1",
    "hill2",
    "patch_density",
    "mean_treg",
    "kill_energy_gain",
    "influx_prob",
    "ticks",
    "grid_extent",
];

const SIM1: SimParams = SimParams {
    init_treg_n: 100,
    init_teff_n: 100,
    init_virus_n: 100,
    treg_life: 60.0,
    teff_life: 60.0,
    v_energy: 20.0,
    cytokine_energy: 25.0,
    treg_repro_pct: 25.0,
    teff_repro_pct: 25.0,
    treg_radius: 3.0,
    v_radius: 3.0,
    mimicry: 1.0,
    master_seed: 100,
    disable_treg: false,
    show_energy: false,
    init_mye: 100.0,
    ate_mye: 2.0,
    rec_mye: 1.5,
    mye_regrow_time: 2,
    bbb_countdown: 50,
    cytokine_n: 1,
    hill1: 2.0,
    hill2: 1.0,
    patch_density: 3,
    mean_treg: 10.0,
    kill_energy_gain: 5.0,
    influx_prob: DEFAULT_INFLUX_PROB,
    ticks: 2000,
    grid_extent: GRID_EXTENT as u32,
};

/// Returns the reference scenario `id` (1..=6).
pub fn preset(id: u32) -> Result<SimParams, ConfigError> {
    let base = SIM1;
    let weak_tregs = SimParams {
        init_treg_n: 50,
        treg_life: 30.0,
        treg_repro_pct: 12.0,
        treg_radius: 2.0,
        ..base
    };
    Ok(match id {
        1 => base,
        2 => weak_tregs,
        3 => SimParams {
            init_teff_n: 50,
            teff_life: 30.0,
            teff_repro_pct: 12.0,
            ..base
        },
        4 => SimParams {
            ate_mye: 5.0,
            mye_regrow_time: 0,
            ..base
        },
        5 => SimParams {
            ate_mye: 5.0,
            mye_regrow_time: 0,
            ..weak_tregs
        },
        6 => SimParams {
            init_virus_n: 50,
            v_energy: 10.0,
            v_radius: 2.0,
            cytokine_energy: 12.0,
            patch_density: 1,
            ..base
        },
        other => return Err(ConfigError::UnknownScenario(other)),
    })
}

impl Default for SimParams {
    fn default() -> Self {
        SIM1
    }
}

/// One violated constraint. `rule` is the human-readable constraint and
/// always begins with the key it concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub key: &'static str,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: &'static str },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: `{key}` does not take a list")]
    ListNotAllowed { line: usize, key: String },
    #[error("out of range: {}", join_violations(.0))]
    OutOfRange(Vec<Violation>),
    #[error("unknown scenario {0} (expected 1..=6)")]
    UnknownScenario(u32),
}

fn join_violations(v: &[Violation]) -> String {
    let mut s = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push_str("; ");
        }
        s.push_str(x.rule);
    }
    s
}

/// Checks every constraint and reports all violations, not just the first.
pub fn validate(p: &SimParams) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut check = |ok: bool, key: &'static str, rule: &'static str| {
        if !ok {
            out.push(Violation { key, rule });
        }
    };
    let nonneg = |x: f64| x.is_finite() && x >= 0.0;
    let unit = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
    let pct = |x: f64| x.is_finite() && (0.0..=100.0).contains(&x);

    check(nonneg(p.treg_life), "treg_life", "treg_life >= 0");
    check(nonneg(p.teff_life), "teff_life", "teff_life >= 0");
    check(nonneg(p.v_energy), "v_energy", "v_energy >= 0");
    check(
        nonneg(p.cytokine_energy),
        "cytokine_energy",
        "cytokine_energy >= 0",
    );
    check(
        pct(p.treg_repro_pct),
        "treg_repro_pct",
        "treg_repro_pct in [0, 100]",
    );
    check(
        pct(p.teff_repro_pct),
        "teff_repro_pct",
        "teff_repro_pct in [0, 100]",
    );
    check(nonneg(p.treg_radius), "treg_radius", "treg_radius >= 0");
    check(nonneg(p.v_radius), "v_radius", "v_radius >= 0");
    check(unit(p.mimicry), "mimicry", "mimicry in [0, 1]");
    check(
        p.init_mye.is_finite() && p.init_mye > 0.0,
        "init_mye",
        "init_mye > 0",
    );
    check(
        p.ate_mye.is_finite() && p.ate_mye > 0.0,
        "ate_mye",
        "ate_mye > 0",
    );
    check(nonneg(p.rec_mye), "rec_mye", "rec_mye >= 0");
    check(p.hill1.is_finite() && p.hill1 >= 1.0, "hill1", "hill1 >= 1");
    check(p.hill2.is_finite() && p.hill2 >= 1.0, "hill2", "hill2 >= 1");
    check(p.patch_density >= 1, "patch_density", "patch_density >= 1");
    check(
        p.mean_treg.is_finite() && p.mean_treg > 0.0,
        "mean_treg",
        "mean_treg > 0",
    );
    check(
        nonneg(p.kill_energy_gain),
        "kill_energy_gain",
        "kill_energy_gain >= 0",
    );
    check(unit(p.influx_prob), "influx_prob", "influx_prob in [0, 1]");
    check(
        p.grid_extent as usize == GRID_EXTENT,
        "grid_extent",
        "grid_extent = 51",
    );

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A value on the right-hand side of `=`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value<'a> {
    Scalar(&'a str),
    List(Vec<&'a str>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry<'a> {
    /// 1-based line number.
    pub line: usize,
    pub key: &'a str,
    pub value: Value<'a>,
}

/// Splits a document into entries without interpreting keys.
///
/// Rejects malformed lines and repeated keys.
pub fn parse_document(text: &str) -> Result<Vec<Entry<'_>>, ConfigError> {
    let mut entries: Vec<Entry<'_>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        }
        .trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax {
            line,
            message: "expected `key = value`",
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty()
            || !key
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
        {
            return Err(ConfigError::Syntax {
                line,
                message: "keys are lowercase snake_case",
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "missing value",
            });
        }
        let value = if let Some(inner) = value.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or(ConfigError::Syntax {
                line,
                message: "unterminated list",
            })?;
            let items: Vec<&str> = inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            if items.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: "empty list",
                });
            }
            Value::List(items)
        } else {
            Value::Scalar(value)
        };
        if entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        entries.push(Entry { line, key, value });
    }
    Ok(entries)
}

/// Parses a configuration document into validated parameters.
pub fn parse_config(text: &str) -> Result<SimParams, ConfigError> {
    let mut p = SimParams::default();
    for entry in parse_document(text)? {
        match entry.value {
            Value::Scalar(v) => p.set(entry.key, v, entry.line)?,
            Value::List(_) => {
                return Err(ConfigError::ListNotAllowed {
                    line: entry.line,
                    key: entry.key.to_string(),
                })
            }
        }
    }
    validate(&p).map_err(ConfigError::OutOfRange)?;
    Ok(p)
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "on" => Some(true),
        "false" | "off" => Some(false),
        _ => None,
    }
}

impl SimParams {
    /// Assigns one field from its textual value. Does not validate ranges.
    /// `line` is only used for error reporting.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let bad = || ConfigError::InvalidValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        };
        macro_rules! num {
            ($field:ident, $t:ty) => {
                self.$field = value.parse::<$t>().map_err(|_| bad())?
            };
        }
        macro_rules! real {
            ($field:ident) => {{
                let x = value.parse::<f64>().map_err(|_| bad())?;
                if !x.is_finite() {
                    return Err(bad());
                }
                self.$field = x
            }};
        }
        match key {
            "init_treg_n" => num!(init_treg_n, u32),
            "init_teff_n" => num!(init_teff_n, u32),
            "init_virus_n" => num!(init_virus_n, u32),
            "treg_life" => real!(treg_life),
            "teff_life" => real!(teff_life),
            "v_energy" => real!(v_energy),
            "cytokine_energy" => real!(cytokine_energy),
            "treg_repro_pct" => real!(treg_repro_pct),
            "teff_repro_pct" => real!(teff_repro_pct),
            "treg_radius" => real!(treg_radius),
            "v_radius" => real!(v_radius),
            "mimicry" => real!(mimicry),
            "master_seed" => num!(master_seed, u64),
            "disable_treg" => self.disable_treg = parse_bool(value).ok_or_else(bad)?,
            "show_energy" => self.show_energy = parse_bool(value).ok_or_else(bad)?,
            "init_mye" => real!(init_mye),
            "ate_mye" => real!(ate_mye),
            "rec_mye" => real!(rec_mye),
            "mye_regrow_time" => num!(mye_regrow_time, u32),
            "bbb_countdown" => num!(bbb_countdown, u32),
            "cytokine_n" => num!(cytokine_n, u32),
            "hill1" => real!(hill1),
            "hill2" => real!(hill2),
            "patch_density" => num!(patch_density, u32),
            "mean_treg" => real!(mean_treg),
            "kill_energy_gain" => real!(kill_energy_gain),
            "influx_prob" => real!(influx_prob),
            "ticks" => num!(ticks, u32),
            "grid_extent" => num!(grid_extent, u32),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Textual value of a field, in the form [`SimParams::set`] accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let s = match key {
            "init_treg_n" => self.init_treg_n.to_string(),
            "init_teff_n" => self.init_teff_n.to_string(),
            "init_virus_n" => self.init_virus_n.to_string(),
            "treg_life" => format!("{}", self.treg_life),
            "teff_life" => format!("{}", self.teff_life),
            "v_energy" => format!("{}", self.v_energy),
            "cytokine_energy" => format!("{}", self.cytokine_energy),
            "treg_repro_pct" => format!("{}", self.treg_repro_pct),
            "teff_repro_pct" => format!("{}", self.teff_repro_pct),
            "treg_radius" => format!("{}", self.treg_radius),
            "v_radius" => format!("{}", self.v_radius),
            "mimicry" => format!("{}", self.mimicry),
            "master_seed" => self.master_seed.to_string(),
            "disable_treg" => self.disable_treg.to_string(),
            "show_energy" => self.show_energy.to_string(),
            "init_mye" => format!("{}", self.init_mye),
            "ate_mye" => format!("{}", self.ate_mye),
            "rec_mye" => format!("{}", self.rec_mye),
            "mye_regrow_time" => self.mye_regrow_time.to_string(),
            "bbb_countdown" => self.bbb_countdown.to_string(),
            "cytokine_n" => self.cytokine_n.to_string(),
            "hill1" => format!("{}", self.hill1),
            "hill2" => format!("{}", self.hill2),
            "patch_density" => self.patch_density.to_string(),
            "mean_treg" => format!("{}", self.mean_treg),
            "kill_energy_gain" => format!("{}", self.kill_energy_gain),
            "influx_prob" => format!("{}", self.influx_prob),
            "ticks" => self.ticks.to_string(),
            "grid_extent" => self.grid_extent.to_string(),
            _ => return None,
        };
        Some(s)
    }

    /// Serializes every key in canonical order. `parse_config` inverts this.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            // every key in KEYS is known to `get`
            let _ = writeln!(out, "{key} = {}", self.get(key).unwrap_or_default());
        }
        out
    }

    /// Maximum Teff duplication probability (the duplication constant).
    pub fn effector_dupl(&self) -> f64 {
        self.teff_repro_pct / 100.0
    }
}
