//! Batch experiments: a Cartesian grid of parameter values, seeded
//! replicates of every cell, and per-cell summary statistics.
//!
//! A sweep spec uses the configuration syntax. Scalar entries override the
//! base parameters; list entries (`key = [a, b]`) become axes. Four keys are
//! reserved:
//!
//! ```text
//! scenario   = 2          # base preset (1..=6); a list makes it an axis
//! replicates = 20         # runs per cell, default 1
//! base_seed  = 100        # default 100
//! ticks      = 2000       # ordinary parameter, may also be an axis
//! ```
//!
//! Axes are enumerated in lexicographic key order with the last key varying
//! fastest, values in the order written. Run `i` of cell `c` has enumeration
//! index `c * replicates + i` and seed `base_seed + index`. `master_seed`
//! is therefore not accepted in a spec.

use std::panic::{catch_unwind, AssertUnwindSafe};

use msabm_core::config::{parse_document, Value, KEYS};
use msabm_core::metrics::MetricsRecord;
use msabm_core::{preset, run, validate, ConfigError, SimParams};
use rayon::prelude::*;
use thiserror::Error;

pub const DEFAULT_BASE_SEED: u64 = 100;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("line {line}: `{key}` is derived from base_seed and cannot be set")]
    SeedKey { line: usize, key: String },
    #[error("line {line}: `{key}` must be a single value")]
    NotAnAxis { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: axis `{key}` repeats value `{value}`")]
    RepeatedValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("cell {cell}: {source}")]
    Cell { cell: usize, source: ConfigError },
    #[error("parallelism must be at least 1")]
    Parallelism,
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Preset the base parameters start from.
    pub scenario: u32,
    /// Scalar overrides applied on top of the preset, in file order.
    pub overrides: Vec<(String, String)>,
    /// Sorted by key.
    pub axes: Vec<(String, Vec<String>)>,
    pub replicates: u32,
    pub base_seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            scenario: 1,
            overrides: Vec::new(),
            axes: Vec::new(),
            replicates: 1,
            base_seed: DEFAULT_BASE_SEED,
        }
    }
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self, SweepError> {
        let mut spec = SweepSpec::default();
        for entry in parse_document(text)? {
            let line = entry.line;
            let key = entry.key;
            let invalid = |value: &str| SweepError::InvalidValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
            };
            match (key, entry.value) {
                ("master_seed", _) => {
                    return Err(SweepError::SeedKey {
                        line,
                        key: key.to_string(),
                    })
                }
                ("replicates" | "base_seed", Value::List(_)) => {
                    return Err(SweepError::NotAnAxis {
                        line,
                        key: key.to_string(),
                    })
                }
                ("replicates", Value::Scalar(v)) => {
                    spec.replicates = v
                        .parse()
                        .ok()
                        .filter(|&n| n >= 1)
                        .ok_or_else(|| invalid(v))?;
                }
                ("base_seed", Value::Scalar(v)) => {
                    spec.base_seed = v.parse().map_err(|_| invalid(v))?;
                }
                ("scenario", Value::Scalar(v)) => {
                    spec.scenario = v.parse().map_err(|_| invalid(v))?;
                    preset(spec.scenario)?;
                }
                (_, Value::Scalar(v)) => {
                    // check the key and value now so errors carry the line
                    SimParams::default().set(key, v, line)?;
                    spec.overrides.push((key.to_string(), v.to_string()));
                }
                (_, Value::List(values)) => {
                    for (i, v) in values.iter().enumerate() {
                        if key == "scenario" {
                            preset(v.parse().map_err(|_| invalid(v))?)?;
                        } else {
                            SimParams::default().set(key, v, line)?;
                        }
                        if values[..i].contains(v) {
                            return Err(SweepError::RepeatedValue {
                                line,
                                key: key.to_string(),
                                value: v.to_string(),
                            });
                        }
                    }
                    spec.axes.push((
                        key.to_string(),
                        values.iter().map(|v| v.to_string()).collect(),
                    ));
                }
            }
        }
        spec.axes.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(spec)
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn run_count(&self) -> usize {
        self.cell_count() * self.replicates as usize
    }

    /// Axis values of cell `index`, one per axis.
    pub fn cell(&self, index: usize) -> Vec<(String, String)> {
        let mut rest = index;
        let mut out = vec![(String::new(), String::new()); self.axes.len()];
        for (i, (key, values)) in self.axes.iter().enumerate().rev() {
            out[i] = (key.clone(), values[rest % values.len()].clone());
            rest /= values.len();
        }
        out
    }

    /// Parameters of cell `index`, before seeding.
    pub fn cell_params(&self, index: usize) -> Result<SimParams, ConfigError> {
        let cell = self.cell(index);
        let scenario = match cell.iter().find(|(k, _)| k == "scenario") {
            Some((_, v)) => v.parse().map_err(|_| ConfigError::InvalidValue {
                line: 0,
                key: "scenario".to_string(),
                value: v.clone(),
            })?,
            None => self.scenario,
        };
        let mut p = preset(scenario)?;
        for (k, v) in &self.overrides {
            p.set(k, v, 0)?;
        }
        for (k, v) in cell.iter().filter(|(k, _)| k != "scenario") {
            p.set(k, v, 0)?;
        }
        validate(&p).map_err(ConfigError::OutOfRange)?;
        Ok(p)
    }
}

/// One run of the sweep, before execution.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedRun {
    pub index: usize,
    pub cell_index: usize,
    pub replicate: u32,
    pub seed: u64,
    /// Fully resolved, with `master_seed == seed`.
    pub params: SimParams,
}

/// Every run of `spec` in enumeration order.
pub fn expand_sweep(spec: &SweepSpec) -> Result<Vec<PlannedRun>, SweepError> {
    debug_assert!(spec
        .axes
        .iter()
        .all(|(k, _)| k == "scenario" || KEYS.contains(&k.as_str())));
    let mut runs = Vec::with_capacity(spec.run_count());
    for cell_index in 0..spec.cell_count() {
        let base = spec
            .cell_params(cell_index)
            .map_err(|source| SweepError::Cell {
                cell: cell_index,
                source,
            })?;
        for replicate in 0..spec.replicates {
            let index = cell_index * spec.replicates as usize + replicate as usize;
            let seed = spec.base_seed.wrapping_add(index as u64);
            runs.push(PlannedRun {
                index,
                cell_index,
                replicate,
                seed,
                params: SimParams {
                    master_seed: seed,
                    ..base
                },
            });
        }
    }
    Ok(runs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub final_record: MetricsRecord,
    pub peak_teff_act: u32,
    /// First tick with at least one unrecoverable patch.
    pub first_unrecoverable: Option<u64>,
}

impl RunSummary {
    pub fn from_records(records: &[MetricsRecord]) -> Option<Self> {
        Some(Self {
            final_record: *records.last()?,
            peak_teff_act: records.iter().map(|r| r.n_teff_act).max()?,
            first_unrecoverable: records.iter().find(|r| r.unrecoverable > 0).map(|r| r.tick),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub index: usize,
    pub cell_index: usize,
    pub cell: Vec<(String, String)>,
    pub replicate: u32,
    pub seed: u64,
    /// `Err` carries the failure message.
    pub outcome: Result<RunSummary, String>,
}

/// Executes every run on a pool of `parallelism` workers. Results come back
/// in enumeration order whatever the completion order.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<Vec<RunResult>, SweepError> {
    run_sweep_with(spec, parallelism, |_, _| Ok(()))
}

/// Like [`run_sweep`], handing each run's full time series to `sink` on the
/// worker that produced it. A sink error fails that run only.
pub fn run_sweep_with<F>(
    spec: &SweepSpec,
    parallelism: usize,
    sink: F,
) -> Result<Vec<RunResult>, SweepError>
where
    F: Fn(&PlannedRun, &[MetricsRecord]) -> Result<(), String> + Sync,
{
    if parallelism == 0 {
        return Err(SweepError::Parallelism);
    }
    let plan = expand_sweep(spec)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let results = pool.install(|| {
        plan.par_iter()
            .with_max_len(1)
            .map(|planned| RunResult {
                index: planned.index,
                cell_index: planned.cell_index,
                cell: spec.cell(planned.cell_index),
                replicate: planned.replicate,
                seed: planned.seed,
                outcome: execute(planned, &sink),
            })
            .collect()
    });
    Ok(results)
}

fn execute<F>(planned: &PlannedRun, sink: &F) -> Result<RunSummary, String>
where
    F: Fn(&PlannedRun, &[MetricsRecord]) -> Result<(), String>,
{
    let ticks = planned.params.ticks;
    let out = catch_unwind(AssertUnwindSafe(|| run(planned.params, ticks)))
        .map_err(|panic| panic_message(&panic))?
        .map_err(|e| e.to_string())?;
    sink(planned, &out.records)?;
    RunSummary::from_records(&out.records).ok_or_else(|| "run produced no records".to_string())
}

fn panic_message(panic: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = panic.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = panic.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".to_string()
    }
}

/// Median, minimum and maximum of one statistic over a cell's runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    /// `None` for an empty sample. The median of an even count is the mean
    /// of the two middle values.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        Some(Self {
            median,
            min: v[0],
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell_index: usize,
    pub cell: Vec<(String, String)>,
    pub runs: usize,
    pub failed: usize,
    pub unrecoverable: Option<Spread>,
    pub peak_teff_act: Option<Spread>,
}

/// Folds run results into one summary per cell, in cell order.
pub fn aggregate(spec: &SweepSpec, results: &[RunResult]) -> Vec<CellSummary> {
    (0..spec.cell_count())
        .map(|c| {
            let runs: Vec<&RunResult> = results.iter().filter(|r| r.cell_index == c).collect();
            let ok: Vec<&RunSummary> = runs
                .iter()
                .filter_map(|r| r.outcome.as_ref().ok())
                .collect();
            let unrec: Vec<f64> = ok
                .iter()
                .map(|s| f64::from(s.final_record.unrecoverable))
                .collect();
            let peak: Vec<f64> = ok.iter().map(|s| f64::from(s.peak_teff_act)).collect();
            CellSummary {
                cell_index: c,
                cell: spec.cell(c),
                runs: runs.len(),
                failed: runs.len() - ok.len(),
                unrecoverable: Spread::of(&unrec),
                peak_teff_act: Spread::of(&peak),
            }
        })
        .collect()
}

/// `aggregate.csv`: one row per cell, axis values first. Statistics of a
/// cell whose runs all failed are left empty.
pub fn aggregate_csv(spec: &SweepSpec, cells: &[CellSummary]) -> String {
    let mut out = String::from("cell");
    for (key, _) in &spec.axes {
        out.push(',');
        out.push_str(key);
    }
    out.push_str(
        ",runs,failed,unrecoverable_median,unrecoverable_min,unrecoverable_max,\
         peak_teff_act_median,peak_teff_act_min,peak_teff_act_max\n",
    );
    for c in cells {
        out.push_str(&c.cell_index.to_string());
        for (_, v) in &c.cell {
            out.push(',');
            out.push_str(v);
        }
        out.push_str(&format!(",{},{}", c.runs, c.failed));
        for spread in [c.unrecoverable, c.peak_teff_act] {
            match spread {
                Some(s) => {
                    for x in [s.median, s.min, s.max] {
                        out.push(',');
                        out.push_str(&msabm_core::metrics::format_myelin(x));
                    }
                }
                None => out.push_str(",,,"),
            }
        }
        out.push('\n');
    }
    out
}
