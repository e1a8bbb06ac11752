//! Command-line front end.
//!
//! Every command writes a table either as CSV (one `#` comment line with the
//! invocation, a header row, then rows at 17 significant digits) or as a JSON
//! document with the same columns plus a summary object. `simulate` writes a
//! directory of CSV files and a `report.json`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::distribution::{h, SizeDistribution};
use crate::ensemble::{empirical_return_radius, measure_new_volume, rc_power_slope, Ensemble, SeriesRow, Snapshot};
use crate::error::{Error, Result};
use crate::recrystallization::{default_s_grid, log_grid, phi, phi_initial_rate};
use crate::regime::Regime;
use crate::return_map::{return_time_ratio, return_z0, rho};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "ripening", version, about = "Late-stage Ostwald ripening: return map, recrystallized fraction, ensemble simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rescaled trajectory: z, tau(z), alpha(z), dz/dtau
    Tau(TauArgs),
    /// Return map: z0, rho(z0), s = (z0/rho)^gamma
    Return(ReturnArgs),
    /// Recrystallized fraction phi(s)
    Phi(PhiArgs),
    /// Scaled size distribution: z, h(z), cdf(z)
    Dist(DistArgs),
    /// Direct N-particle simulation with snapshots and a comparison report
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Dl,
    Al,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Dl => Regime::DiffusionLimited,
            RegimeArg::Al => Regime::AttachmentLimited,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Evenly spaced grid; command-specific defaults apply to omitted bounds.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub max: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Space the grid logarithmically
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TauArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    /// Explicit z values (repeatable or comma separated); overrides the grid
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub z: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum ReturnAxis {
    #[default]
    S,
    Z0,
}

#[derive(Debug, Clone, Args)]
pub struct ReturnArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    /// Explicit time ratios s = t/t0
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "z0")]
    pub s: Vec<f64>,
    /// Explicit rescaled start radii
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub z0: Vec<f64>,
    /// Variable the grid runs over
    #[arg(long, value_enum, default_value_t = ReturnAxis::S)]
    pub by: ReturnAxis,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PhiArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub s: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub z: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long, default_value_t = 20_000)]
    pub n: usize,
    /// Initial critical radius
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub rc0: f64,
    /// Reference time for the comparisons; must be a snapshot time
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t0: f64,
    /// Final time; defaults to the last snapshot time
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Snapshot times (comma separated); defaults to the times at which
    /// t/t0 on the late-stage clock equals 1.5, 2 and 3
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub snapshot_times: Vec<f64>,
    /// Number of evenly spaced series rows
    #[arg(long, default_value_t = 100)]
    pub series_points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; errors are reported on `stderr`.
pub fn main_with_args(args: Vec<String>, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    let invocation = args.iter().skip(1).cloned().collect::<Vec<_>>().join(" ");
    match run(&cli, &invocation) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command. `invocation` is recorded in output headers.
pub fn run(cli: &Cli, invocation: &str) -> Result<()> {
    match &cli.command {
        Command::Tau(a) => emit(&a.out, &cmd_tau(a)?, invocation, None),
        Command::Return(a) => emit(&a.out, &cmd_return(a)?, invocation, None),
        Command::Phi(a) => emit(&a.out, &cmd_phi(a)?, invocation, None),
        Command::Dist(a) => emit(&a.out, &cmd_dist(a)?, invocation, None),
        Command::Simulate(a) => cmd_simulate(a, invocation),
    }
}

/// Output of an analytic command.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    pub regime: Regime,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Map<String, Value>,
}

impl Table {
    fn new(command: &'static str, regime: Regime, columns: &[&'static str]) -> Self {
        Self {
            command,
            regime,
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Map::new(),
        }
    }
}

fn grid_or_values(values: &[f64], grid: &GridArgs, lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !values.is_empty() {
        return Ok(values.to_vec());
    }
    let lo = grid.min.unwrap_or(lo);
    let hi = grid.max.unwrap_or(hi);
    let n = grid.count.unwrap_or(count);
    if n == 0 {
        return Err(Error::domain("grid", "count must be positive", 0.0));
    }
    if !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("grid", "requires finite min <= max", hi));
    }
    if grid.log {
        if !(lo > 0.0) {
            return Err(Error::domain("grid", "log grid requires min > 0", lo));
        }
        return Ok(log_grid(lo, hi, n));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect())
}

pub fn cmd_tau(a: &TauArgs) -> Result<Table> {
    let regime: Regime = a.regime.into();
    let zmax = regime.z_max::<f64>();
    let zs = grid_or_values(&a.z, &a.grid, 0.01, zmax - 0.01, 100)?;
    let mut t = Table::new("tau", regime, &["z", "tau", "alpha", "dz_dtau"]);
    for z in zs {
        t.rows.push(vec![
            z,
            regime.tau_of_z(z)?,
            regime.alpha(z)?,
            regime.growth_rate_scaled(z)?,
        ]);
    }
    Ok(t)
}

pub fn cmd_return(a: &ReturnArgs) -> Result<Table> {
    let regime: Regime = a.regime.into();
    let zmax = regime.z_max::<f64>();
    let by_z0 = !a.z0.is_empty() || (a.s.is_empty() && a.by == ReturnAxis::Z0);
    let mut t = Table::new("return", regime, &["z0", "rho", "s"]);
    if by_z0 {
        for z0 in grid_or_values(&a.z0, &a.grid, 1.0, zmax - 1e-6, 100)? {
            t.rows.push(vec![z0, rho(regime, z0)?, return_time_ratio(regime, z0)?]);
        }
    } else {
        let default_log = GridArgs {
            log: a.grid.log || (a.grid.min.is_none() && a.grid.max.is_none()),
            ..a.grid.clone()
        };
        for s in grid_or_values(&a.s, &default_log, 1.0, 1e3, 100)? {
            let z0 = return_z0(regime, s)?;
            t.rows.push(vec![z0, rho(regime, z0)?, s]);
        }
    }
    Ok(t)
}

pub fn cmd_phi(a: &PhiArgs) -> Result<Table> {
    let regime: Regime = a.regime.into();
    let dist = SizeDistribution::<f64>::new(regime)?;
    let grid = if a.s.is_empty() && a.grid.min.is_none() && a.grid.max.is_none() && a.grid.count.is_none() {
        default_s_grid()
    } else {
        grid_or_values(&a.s, &a.grid, 1.0, 1e3, 200)?
    };
    let mut t = Table::new("phi", regime, &["s", "phi"]);
    for s in grid {
        t.rows.push(vec![s, phi(&dist, s)?]);
    }
    t.summary.insert("initial_slope".into(), json!(phi_initial_rate(&dist)?));
    t.summary.insert("mean_cubed_radius".into(), json!(dist.third_moment()));
    Ok(t)
}

pub fn cmd_dist(a: &DistArgs) -> Result<Table> {
    let regime: Regime = a.regime.into();
    let dist = SizeDistribution::<f64>::new(regime)?;
    let zs = grid_or_values(&a.z, &a.grid, 0.0, regime.z_max::<f64>(), 200)?;
    let mut t = Table::new("dist", regime, &["z", "h", "cdf"]);
    for z in zs {
        t.rows.push(vec![z, h(regime, z)?, dist.cdf(z)?]);
    }
    let moments: Vec<f64> = (0..=3).map(|k| dist.moment(k)).collect::<Result<_>>()?;
    t.summary.insert("moments".into(), json!(moments));
    Ok(t)
}

/// Formats a value with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn header_line(invocation: &str, seed: Option<u64>) -> String {
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    format!("# ripening {VERSION} {invocation} seed={seed}\n")
}

pub fn render_csv(table: &Table, invocation: &str) -> String {
    let mut s = header_line(invocation, None);
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn render_json(table: &Table, invocation: &str) -> String {
    let doc = json!({
        "command": table.command,
        "regime": table.regime.tag(),
        "version": VERSION,
        "invocation": invocation,
        "columns": table.columns,
        "rows": table.rows,
        "summary": table.summary,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("table serialises");
    s.push('\n');
    s
}

fn emit(out: &OutputArgs, table: &Table, invocation: &str, _seed: Option<u64>) -> Result<()> {
    let text = match out.format {
        Format::Csv => render_csv(table, invocation),
        Format::Json => render_json(table, invocation),
    };
    match &out.output {
        Some(path) => fs::write(path, text)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// Ensemble time at which `t/t₀` on the late-stage clock equals `s`.
fn time_for_ratio(e: &Ensemble<f64>, t0: f64, s: f64) -> f64 {
    let shift = e.late_stage_time(0.0);
    s * (t0 + shift) - shift
}

fn write_snapshot(path: &Path, snap: &Snapshot<f64>, invocation: &str, seed: u64) -> Result<()> {
    let mut s = header_line(invocation, Some(seed));
    s.push_str(&format!("# t={}\n", fmt_f64(snap.t)));
    s.push_str("id,radius\n");
    for (id, r) in &snap.radii {
        s.push_str(&format!("{id},{}\n", fmt_f64(*r)));
    }
    fs::write(path, s)?;
    Ok(())
}

fn write_series(path: &Path, series: &[SeriesRow<f64>], invocation: &str, seed: u64) -> Result<()> {
    let mut s = header_line(invocation, Some(seed));
    s.push_str("t,n,rc_estimate,total_r3,lost_volume\n");
    for r in series {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.t),
            r.n,
            fmt_f64(r.rc_estimate),
            fmt_f64(r.total_r3),
            fmt_f64(r.lost_volume)
        ));
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs, invocation: &str) -> Result<()> {
    let regime: Regime = a.regime.into();
    if !(a.t0 >= 0.0) || !a.t0.is_finite() {
        return Err(Error::domain("simulate", "requires t0 >= 0", a.t0));
    }
    let dist = SizeDistribution::<f64>::new(regime)?;
    let mut ens = Ensemble::from_distribution(&dist, a.n, a.rc0, a.seed)?;

    let mut times = if a.snapshot_times.is_empty() {
        [1.5, 2.0, 3.0].iter().map(|&s| time_for_ratio(&ens, a.t0, s)).collect()
    } else {
        a.snapshot_times.clone()
    };
    if !times.contains(&a.t0) {
        times.push(a.t0);
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::domain("simulate", "snapshot times must be finite and >= 0", f64::NAN));
    }
    times.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    times.dedup();
    let last = *times.last().expect("nonempty");
    let t_end = a.t_end.unwrap_or(last);
    if t_end < last {
        return Err(Error::domain("simulate", "t_end precedes a snapshot time", t_end));
    }
    if !(t_end > 0.0) {
        return Err(Error::domain("simulate", "requires t_end > 0", t_end));
    }

    let out = ens.run(t_end, &times, a.series_points)?;
    fs::create_dir_all(&a.out_dir)?;
    for (i, snap) in out.snapshots.iter().enumerate() {
        write_snapshot(&a.out_dir.join(format!("snapshot_{i:03}.csv")), snap, invocation, a.seed)?;
    }
    write_series(&a.out_dir.join("series.csv"), &out.series, invocation, a.seed)?;

    let base = out
        .snapshots
        .iter()
        .find(|s| s.t == a.t0)
        .expect("t0 is a snapshot time");
    let rc_t0 = regime.critical_radius(a.rc0, a.t0)?;
    let late0 = ens.late_stage_time(a.t0);
    let mut comparisons = Vec::new();
    for snap in out.snapshots.iter().filter(|s| s.t > a.t0) {
        let ratio = ens.late_stage_time(snap.t) / late0;
        let nv = measure_new_volume(base, snap)?;
        let analytic = phi(&dist, ratio)?;
        let boundary = empirical_return_radius(base, snap).ok();
        let predicted = return_z0(regime, ratio)? * rc_t0;
        comparisons.push(json!({
            "t": snap.t,
            "s": ratio,
            "n": snap.radii.len(),
            "empirical_phi": nv.fraction,
            "analytic_phi": analytic,
            "phi_relative_error": (nv.fraction - analytic).abs() / analytic,
            "empirical_return_radius": boundary,
            "analytic_return_radius": predicted,
            "return_radius_relative_error": boundary.map(|b| (b - predicted).abs() / predicted),
        }));
    }
    let fit_rows: Vec<SeriesRow<f64>> = out.series.iter().copied().filter(|r| r.t >= a.t0).collect();
    let report = json!({
        "version": VERSION,
        "invocation": invocation,
        "regime": regime.tag(),
        "seed": a.seed,
        "n_initial": a.n,
        "n_final": ens.len(),
        "deletions": ens.deletions(),
        "rc0": a.rc0,
        "t0": a.t0,
        "t_end": t_end,
        "late_stage_offset": ens.late_stage_time(0.0),
        "conservation_residual": ens.conservation_residual(),
        "lost_volume": ens.lost_volume(),
        "rc_power_slope": rc_power_slope(regime, &fit_rows).ok(),
        "rc_power_slope_expected": regime.coarsening_rate::<f64>(),
        "comparisons": comparisons,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
    text.push('\n');
    fs::write(a.out_dir.join("report.json"), text)?;
    Ok(())
}
