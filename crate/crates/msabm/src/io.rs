//! Output directory layout.
//!
//! ```text
//! <out>/metrics.csv
//! <out>/snapshots/tick_<K>.txt
//! <out>/plot.svg
//! <out>/runs/<index>/metrics.csv     (sweeps)
//! <out>/aggregate.csv                (sweeps)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use msabm_core::metrics::{write_csv, MetricsRecord};

pub const METRICS_FILE: &str = "metrics.csv";
pub const PLOT_FILE: &str = "plot.svg";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const RUNS_DIR: &str = "runs";

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create directory {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_metrics(dir: &Path, records: &[MetricsRecord]) -> Result<PathBuf> {
    let path = dir.join(METRICS_FILE);
    write_file(&path, &write_csv(records))?;
    Ok(path)
}

pub fn snapshot_path(dir: &Path, tick: u64) -> PathBuf {
    dir.join(SNAPSHOT_DIR).join(format!("tick_{tick}.txt"))
}

pub fn run_dir(dir: &Path, index: usize) -> PathBuf {
    dir.join(RUNS_DIR).join(index.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let d = Path::new("out");
        assert_eq!(snapshot_path(d, 40), Path::new("out/snapshots/tick_40.txt"));
        assert_eq!(run_dir(d, 3), Path::new("out/runs/3"));
    }

    #[test]
    fn nested_write() {
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join("a/b/c.txt");
        write_file(&p, "x\n").unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "x\n");
    }
}
