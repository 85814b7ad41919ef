use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use msabm_core::config::{parse_config, KEYS, SCENARIO_COUNT};
use msabm_core::engine::run_with;
use msabm_core::metrics::Column;
use msabm_core::plot::emit_plot;
use msabm_core::snapshot::write_snapshot;
use msabm_core::{preset, validate, ConfigError, SimParams};

use crate::io;
use crate::sweep::{aggregate, aggregate_csv, run_sweep_with, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "msabm", version, about = "Agent-based MS immune simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write its time series.
    Simulate(SimulateArgs),
    /// Run a parameter sweep.
    Sweep(SweepArgs),
    /// Print the six reference scenarios side by side.
    Presets,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true))]
struct SimulateArgs {
    /// Parameter file.
    #[arg(long, group = "source")]
    config: Option<PathBuf>,
    /// Reference scenario, 1 to 6.
    #[arg(long, group = "source")]
    scenario: Option<u32>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `ticks`.
    #[arg(long)]
    ticks: Option<u32>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write a grid snapshot every K ticks, starting at tick 0.
    #[arg(long, value_name = "K")]
    snapshot_every: Option<u64>,
    /// Write plot.svg.
    #[arg(long)]
    plot: bool,
    /// Columns to plot.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "treg_act,teff_act,unrecoverable,bbb_damaged"
    )]
    series: Vec<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long, default_value = "sweep")]
    out: PathBuf,
}

/// Entry point shared by the binary and the tests. `argv[0]` is the program
/// name. Returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Presets => {
            print!("{}", presets_table());
            Ok(())
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn load_params(args: &SimulateArgs) -> Result<SimParams> {
    let mut p = match (&args.config, args.scenario) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        (None, Some(id)) => preset(id)?,
        (None, None) => unreachable!("clap requires a source"),
    };
    if let Some(seed) = args.seed {
        p.master_seed = seed;
    }
    if let Some(ticks) = args.ticks {
        p.ticks = ticks;
    }
    validate(&p).map_err(ConfigError::OutOfRange)?;
    Ok(p)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let params = load_params(args)?;
    let series = args
        .series
        .iter()
        .map(|name| Column::from_name(name).ok_or_else(|| anyhow!("unknown series `{name}`")))
        .collect::<Result<Vec<_>>>()?;
    if args.snapshot_every == Some(0) {
        bail!("--snapshot-every must be at least 1");
    }

    let mut snapshot_err = None;
    let out = run_with(params, params.ticks, |world| {
        let Some(every) = args.snapshot_every else {
            return;
        };
        if snapshot_err.is_none() && world.tick % every == 0 {
            let text = write_snapshot(world, params.show_energy);
            if let Err(e) = io::write_file(&io::snapshot_path(&args.out, world.tick), &text) {
                snapshot_err = Some(e);
            }
        }
    })?;
    if let Some(e) = snapshot_err {
        return Err(e);
    }

    let path = io::write_metrics(&args.out, &out.records)?;
    if args.plot {
        let svg = emit_plot(&out.records, &series)?;
        io::write_file(&args.out.join(io::PLOT_FILE), &svg)?;
    }
    // run_with always yields the initial record
    let last = out.records[out.records.len() - 1];
    println!(
        "{}: {} ticks, unrecoverable {}, teff_act {}, treg_act {}, bbb_damaged {}",
        path.display(),
        last.tick,
        last.unrecoverable,
        last.n_teff_act,
        last.n_treg_act,
        last.bbb_damaged
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("cannot read sweep spec {}", args.spec.display()))?;
    let spec = SweepSpec::parse(&text).with_context(|| format!("in {}", args.spec.display()))?;
    let out: &Path = &args.out;
    let results = run_sweep_with(&spec, args.parallel, |planned, records| {
        io::write_metrics(&io::run_dir(out, planned.index), records)
            .map(|_| ())
            .map_err(|e| format!("{e:#}"))
    })?;
    let cells = aggregate(&spec, &results);
    let path = out.join(io::AGGREGATE_FILE);
    io::write_file(&path, &aggregate_csv(&spec, &cells))?;

    let failed: Vec<_> = results.iter().filter(|r| r.outcome.is_err()).collect();
    for r in &failed {
        if let Err(msg) = &r.outcome {
            eprintln!(
                "run {} (cell {}, seed {}) failed: {msg}",
                r.index, r.cell_index, r.seed
            );
        }
    }
    println!(
        "{}: {} cells, {} runs, {} failed",
        path.display(),
        cells.len(),
        results.len(),
        failed.len()
    );
    if !failed.is_empty() {
        bail!("{} of {} runs failed", failed.len(), results.len());
    }
    Ok(())
}

/// One row per parameter, one column per reference scenario.
pub fn presets_table() -> String {
    let columns: Vec<SimParams> = (1..=SCENARIO_COUNT)
        .map(|id| preset(id).expect("ids 1..=SCENARIO_COUNT exist"))
        .collect();
    let width = KEYS.iter().map(|k| k.len()).max().unwrap_or(0);
    let mut out = format!("{:width$}", "parameter");
    for id in 1..=SCENARIO_COUNT {
        out.push_str(&format!("  {:>9}", format!("sim{id}")));
    }
    out.push('\n');
    for key in KEYS {
        out.push_str(&format!("{key:width$}"));
        for p in &columns {
            let v = if *key == "influx_prob" {
                format!("{:.6}", p.influx_prob)
            } else {
                p.get(key).unwrap_or_default()
            };
            out.push_str(&format!("  {v:>9}"));
        }
        out.push('\n');
    }
    out
}
