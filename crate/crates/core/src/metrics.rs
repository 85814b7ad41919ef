//! Per-tick census and its CSV form.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use thiserror::Error;

use crate::dynamics::Breed;
use crate::engine::WorldState;
use crate::world::{Zone, WM_TOTAL};

pub const CSV_HEADER: &str = "tick,virus,treg_rest,treg_act,teff_rest,teff_act,cytokine,total_myelin,recoverable,unrecoverable,bbb_damaged";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub tick: u64,
    pub n_virus: u32,
    pub n_treg_rest: u32,
    pub n_treg_act: u32,
    pub n_teff_rest: u32,
    pub n_teff_act: u32,
    pub n_cytokine: u32,
    pub total_myelin: f64,
    /// White-matter patches with myelin left.
    pub recoverable: u32,
    /// White-matter patches at exactly zero myelin.
    pub unrecoverable: u32,
    pub bbb_damaged: u32,
}

/// Series a plot or aggregate can select, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    Virus,
    TregRest,
    TregAct,
    TeffRest,
    TeffAct,
    Cytokine,
    TotalMyelin,
    Recoverable,
    Unrecoverable,
    BbbDamaged,
}

impl Column {
    pub const ALL: [Column; 10] = [
        Column::Virus,
        Column::TregRest,
        Column::TregAct,
        Column::TeffRest,
        Column::TeffAct,
        Column::Cytokine,
        Column::TotalMyelin,
        Column::Recoverable,
        Column::Unrecoverable,
        Column::BbbDamaged,
    ];

    /// CSV header name.
    pub const fn name(self) -> &'static str {
        match self {
            Column::Virus => "virus",
            Column::TregRest => "treg_rest",
            Column::TregAct => "treg_act",
            Column::TeffRest => "teff_rest",
            Column::TeffAct => "teff_act",
            Column::Cytokine => "cytokine",
            Column::TotalMyelin => "total_myelin",
            Column::Recoverable => "recoverable",
            Column::Unrecoverable => "unrecoverable",
            Column::BbbDamaged => "bbb_damaged",
        }
    }

    pub fn from_name(name: &str) -> Option<Column> {
        Column::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn value(self, r: &MetricsRecord) -> f64 {
        match self {
            Column::Virus => f64::from(r.n_virus),
            Column::TregRest => f64::from(r.n_treg_rest),
            Column::TregAct => f64::from(r.n_treg_act),
            Column::TeffRest => f64::from(r.n_teff_rest),
            Column::TeffAct => f64::from(r.n_teff_act),
            Column::Cytokine => f64::from(r.n_cytokine),
            Column::TotalMyelin => r.total_myelin,
            Column::Recoverable => f64::from(r.recoverable),
            Column::Unrecoverable => f64::from(r.unrecoverable),
            Column::BbbDamaged => f64::from(r.bbb_damaged),
        }
    }
}

/// Census of agents by breed and of white-matter and barrier patches.
pub fn collect_metrics(world: &WorldState) -> MetricsRecord {
    let pop = &world.population;
    let n = |b: Breed| pop.count(b) as u32;
    let mut total_myelin = 0.0;
    let mut unrecoverable = 0u32;
    let mut bbb_damaged = 0u32;
    for p in world.grid.patches() {
        match p.zone {
            Zone::WhiteMatter => {
                total_myelin += p.myelin;
                if p.myelin <= 0.0 {
                    unrecoverable += 1;
                }
            }
            Zone::Barrier if p.is_damaged_barrier() => bbb_damaged += 1,
            _ => {}
        }
    }
    MetricsRecord {
        tick: world.tick,
        n_virus: n(Breed::Virus),
        n_treg_rest: n(Breed::TregResting),
        n_treg_act: n(Breed::TregActive),
        n_teff_rest: n(Breed::TeffResting),
        n_teff_act: n(Breed::TeffActive),
        n_cytokine: n(Breed::Cytokine),
        total_myelin,
        recoverable: WM_TOTAL as u32 - unrecoverable,
        unrecoverable,
        bbb_damaged,
    }
}

/// Myelin with at most two decimals and no trailing zeros.
pub fn format_myelin(x: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{x:.2}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s.clear();
        s.push('0');
    }
    s
}

pub fn write_csv_row(out: &mut String, r: &MetricsRecord) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.tick,
        r.n_virus,
        r.n_treg_rest,
        r.n_treg_act,
        r.n_teff_rest,
        r.n_teff_act,
        r.n_cytokine,
        format_myelin(r.total_myelin),
        r.recoverable,
        r.unrecoverable,
        r.bbb_damaged
    );
}

/// Header plus one `\n`-terminated row per record.
pub fn write_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        write_csv_row(&mut out, r);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvError {
    #[error("missing or unexpected header")]
    Header,
    #[error("line {0}: expected 11 fields")]
    FieldCount(usize),
    #[error("line {line}: bad value in column `{column}`")]
    Value { line: usize, column: &'static str },
}

/// Inverse of [`write_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<MetricsRecord>, CsvError> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(CsvError::Header);
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(CsvError::FieldCount(line_no));
        }
        let int = |idx: usize, column: &'static str| {
            f[idx].parse::<u32>().map_err(|_| CsvError::Value {
                line: line_no,
                column,
            })
        };
        out.push(MetricsRecord {
            tick: f[0].parse().map_err(|_| CsvError::Value {
                line: line_no,
                column: "tick",
            })?,
            n_virus: int(1, "virus")?,
            n_treg_rest: int(2, "treg_rest")?,
            n_treg_act: int(3, "treg_act")?,
            n_teff_rest: int(4, "teff_rest")?,
            n_teff_act: int(5, "teff_act")?,
            n_cytokine: int(6, "cytokine")?,
            total_myelin: f[7].parse().map_err(|_| CsvError::Value {
                line: line_no,
                column: "total_myelin",
            })?,
            recoverable: int(8, "recoverable")?,
            unrecoverable: int(9, "unrecoverable")?,
            bbb_damaged: int(10, "bbb_damaged")?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{preset, SimParams};
    use crate::engine::{init_run, WorldState};
    use crate::world::Barrier;

    #[test]
    fn fresh_scenario_one_census() {
        let w = init_run(preset(1).unwrap()).unwrap();
        let r = collect_metrics(&w);
        assert_eq!(r.tick, 0);
        assert_eq!(
            (r.n_treg_rest, r.n_teff_rest, r.n_virus, r.n_cytokine),
            (100, 100, 100, 0)
        );
        assert_eq!((r.n_treg_act, r.n_teff_act), (0, 0));
        assert_eq!(r.total_myelin, 102_000.0);
        assert_eq!(
            (r.recoverable, r.unrecoverable, r.bbb_damaged),
            (1020, 0, 0)
        );
        assert_eq!(collect_metrics(&w), r);
    }

    #[test]
    fn counts_damage() {
        let mut w = WorldState::new(SimParams::default()).unwrap();
        for x in 0..3 {
            w.grid.get_mut(x, 20).myelin = 0.0;
        }
        w.grid.get_mut(7, 36).barrier = Some(Barrier::Damaged(3));
        let r = collect_metrics(&w);
        assert_eq!((r.unrecoverable, r.recoverable), (3, 1017));
        assert_eq!(r.bbb_damaged, 1);
        assert_eq!(r.n_virus + r.n_treg_rest + r.n_teff_rest, 0);
    }

    #[test]
    fn myelin_formatting() {
        assert_eq!(format_myelin(102_000.0), "102000");
        assert_eq!(format_myelin(99.5), "99.5");
        assert_eq!(format_myelin(1.25), "1.25");
        assert_eq!(format_myelin(0.0), "0");
    }

    #[test]
    fn single_record_csv() {
        let w = init_run(preset(1).unwrap()).unwrap();
        let csv = write_csv(&[collect_metrics(&w)]);
        assert_eq!(
            csv,
            "tick,virus,treg_rest,treg_act,teff_rest,teff_act,cytokine,total_myelin,recoverable,unrecoverable,bbb_damaged\n\
             0,100,100,0,100,0,0,102000,1020,0,0\n"
        );
        assert_eq!(parse_csv(&csv).unwrap(), [collect_metrics(&w)]);
    }

    #[test]
    fn csv_errors() {
        assert_eq!(parse_csv("nope\n"), Err(CsvError::Header));
        let bad = alloc::format!("{CSV_HEADER}\n1,2,3\n");
        assert_eq!(parse_csv(&bad), Err(CsvError::FieldCount(2)));
        let bad = alloc::format!("{CSV_HEADER}\n1,2,3,4,5,x,7,8,9,10,11\n");
        assert_eq!(
            parse_csv(&bad),
            Err(CsvError::Value {
                line: 2,
                column: "teff_act"
            })
        );
    }

    #[test]
    fn column_names_match_header() {
        let names: Vec<_> = Column::ALL.iter().map(|c| c.name()).collect();
        assert_eq!(alloc::format!("tick,{}", names.join(",")), CSV_HEADER);
    }
}
