//! Command-line front end. Every subcommand writes plot-ready CSV/JSON into
//! the output directory; nothing is plotted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cavity::{nearest_row, rate_curves, write_rate_csv, Baseline, Sweep};
use crate::config::{rate_report, simulate, RateLawCheck, ReferenceRates, SimulationConfig};
use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::herald::two_photon_rate_law;
use crate::homodyne::read_records_csv;
use crate::tomo::{reconstruct, Binning, Diagnostics, TomoConfig, TomoMode};
use crate::wigner::{wigner, wigner_min, wigner_point, GridSpec, WignerMinimum};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "heralded-fock",
    version,
    about = "Cavity-enhanced heralded Fock states: simulation and homodyne tomography"
)]
pub struct Cli {
    /// JSON simulation config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// RNG seed; overrides sampling.seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Suppress progress and warnings on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Herald a state, apply preparation loss, and sample homodyne data.
    Simulate,
    /// Maximum-likelihood reconstruction plus Wigner function of a dataset.
    Reconstruct(ReconstructArgs),
    /// Build-up and heralded-rate curves versus cavity reflectivities.
    CavityDesign(CavityArgs),
    /// Predicted heralding rates and the two-photon rate law.
    Rates(RatesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Full,
    Diagonal,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Dataset CSV with header `theta,x`.
    pub dataset: PathBuf,
    /// Detection efficiency to correct for (1 = no correction).
    #[arg(long)]
    pub eta_d: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Use 200 x-bins and 12 phase bins instead of one POVM per record.
    #[arg(long)]
    pub binned: bool,
}

#[derive(Debug, Args)]
pub struct CavityArgs {
    /// Input-coupler reflectivities, one curve each.
    #[arg(long, num_args = 1.., default_values_t = vec![0.90, 0.99])]
    pub ri: Vec<f64>,
    /// Loop-reflectivity sweep: START STOP [STEP].
    #[arg(long, num_args = 2..=3, default_values_t = vec![0.80, 0.999, 1e-3])]
    pub rm: Vec<f64>,
    /// Single-pass one-photon herald rate in Hz.
    #[arg(long, default_value_t = 500.0)]
    pub baseline_r1: f64,
    /// Single-pass two-photon herald rate in Hz; defaults to R1²/(2·rep-rate).
    #[arg(long)]
    pub baseline_r2: Option<f64>,
    #[arg(long, default_value_t = 82e6)]
    pub rep_rate: f64,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    /// Measured single-photon rate to evaluate the rate law on (Hz).
    #[arg(long)]
    pub r1_measured: Option<f64>,
    /// Measured two-photon rate to compare against (Hz).
    #[arg(long, requires = "r1_measured")]
    pub r2_measured: Option<f64>,
    #[arg(long, requires = "r2_measured")]
    pub r2_uncertainty: Option<f64>,
}

/// Exit code for an error: 2 for bad input, 3 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Parse { .. } | Error::Io(_) | Error::Json(_) | Error::Shape(_) => EXIT_CONFIG,
        Error::Domain { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

/// Writes via a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn config_required(cli: &Cli) -> Result<SimulationConfig> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config {
        path: "--config".into(),
        message: "this subcommand needs a config file".into(),
    })?;
    SimulationConfig::load(path)
}

/// Runs a parsed command line; returns the paths written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    match &cli.command {
        Command::Simulate => cmd_simulate(cli),
        Command::Reconstruct(args) => cmd_reconstruct(cli, args),
        Command::CavityDesign(args) => cmd_cavity_design(cli, args),
        Command::Rates(args) => cmd_rates(cli, args),
    }
}

fn note(cli: &Cli, msg: impl AsRef<str>) {
    if !cli.quiet {
        eprintln!("{}", msg.as_ref());
    }
}

pub fn cmd_simulate(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = config_required(cli)?;
    let seed = cli.seed.or(cfg.sampling.seed).ok_or_else(|| Error::Config {
        path: "sampling.seed".into(),
        message: "a seed is required (config sampling.seed or --seed)".into(),
    })?;
    if let Some(tail) = cfg.truncation_warning()? {
        note(
            cli,
            format!(
                "warning: source tail above cutoff dim={} is {tail:.2e}; consider a larger source.dim",
                cfg.source.dim
            ),
        );
    }
    let sim = simulate(&cfg, seed)?;
    let state = cli.out.join("state.json");
    let data = cli.out.join("dataset.csv");
    let meta = cli.out.join("dataset.json");
    let rates = cli.out.join("rates.json");
    write_json(&state, &sim.state)?;
    let mut buf = Vec::new();
    sim.dataset.write_csv(&mut buf)?;
    write_atomic(&data, &buf)?;
    write_json(&meta, &sim.dataset.meta)?;
    write_json(&rates, &sim.report)?;
    note(
        cli,
        format!(
            "heralded {} with p = {:.3e}/pulse ({:.3e} Hz); {} samples written",
            sim.report.pattern,
            sim.report.prob_per_pulse,
            sim.report.rate_hz,
            sim.dataset.len()
        ),
    );
    Ok(vec![state, data, meta, rates])
}

/// Negativity summary of a reconstructed state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativityReport {
    pub origin: f64,
    pub grid_min: GridMinimum,
    /// Radial minimum of the phase-averaged state.
    pub radial_min: WignerMinimum,
    pub negative: bool,
    pub max_off_diagonal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMinimum {
    pub value: f64,
    pub x: f64,
    pub p: f64,
    pub radius: f64,
}

pub fn negativity_report(
    rho: &DensityMatrix,
    grid: &GridSpec,
) -> Result<(NegativityReport, crate::wigner::WignerGrid)> {
    let w = wigner(rho, grid);
    let (value, x, p) = w.min();
    let radial = wigner_min(&rho.phase_averaged())?;
    let report = NegativityReport {
        origin: wigner_point(rho, 0.0, 0.0),
        grid_min: GridMinimum {
            value,
            x,
            p,
            radius: x.hypot(p),
        },
        radial_min: radial,
        negative: value < 0.0 || radial.value < 0.0,
        max_off_diagonal: rho.max_off_diagonal(),
    };
    Ok((report, w))
}

pub fn tomo_config(cli: &Cli, args: &ReconstructArgs) -> Result<TomoConfig> {
    let mut tc = match &cli.config {
        Some(path) => SimulationConfig::load(path)?.tomo,
        None => TomoConfig::default(),
    };
    if let Some(e) = args.eta_d {
        tc.eta_d = e;
    }
    if let Some(m) = args.mode {
        tc.mode = match m {
            ModeArg::Full => TomoMode::Full,
            ModeArg::Diagonal => TomoMode::Diagonal,
        };
    }
    if let Some(d) = args.dim {
        tc.dim = d;
    }
    if let Some(t) = args.tol {
        tc.tol = t;
    }
    if let Some(m) = args.max_iter {
        tc.max_iter = m;
    }
    if args.binned {
        tc.binning = Binning::histogram();
    }
    tc.validate().map_err(|e| Error::Config {
        path: "tomo".into(),
        message: e.to_string(),
    })?;
    Ok(tc)
}

pub fn cmd_reconstruct(cli: &Cli, args: &ReconstructArgs) -> Result<Vec<PathBuf>> {
    let tc = tomo_config(cli, args)?;
    let file = fs::File::open(&args.dataset).map_err(|e| Error::Config {
        path: args.dataset.display().to_string(),
        message: e.to_string(),
    })?;
    let records = read_records_csv(std::io::BufReader::new(file))?;
    let (rho, diag): (DensityMatrix, Diagnostics) = reconstruct(&records, &tc)?;
    let (neg, grid) = negativity_report(&rho, &GridSpec::default())?;

    let rho_path = cli.out.join("rho.json");
    let diag_path = cli.out.join("diagnostics.json");
    let wig_path = cli.out.join("wigner.csv");
    let neg_path = cli.out.join("negativity.json");
    write_json(&rho_path, &rho)?;
    write_json(&diag_path, &diag)?;
    let mut buf = Vec::new();
    grid.write_csv(&mut buf)?;
    write_atomic(&wig_path, &buf)?;
    write_json(&neg_path, &neg)?;
    note(
        cli,
        format!(
            "{} iterations (converged: {}), diag = {:.4?}, W min = {:.4} at r = {:.3}",
            diag.iterations,
            diag.converged,
            rho.diagonal(),
            neg.radial_min.value,
            neg.radial_min.radius
        ),
    );
    Ok(vec![rho_path, diag_path, wig_path, neg_path])
}

/// Rows of the curve table flagged as the measured and the optimized cavity.
#[derive(Debug, Clone, Serialize)]
pub struct CavityMarkers {
    pub measured: Option<MarkedRow>,
    pub optimized: Option<MarkedRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkedRow {
    pub row: usize,
    pub r_m: f64,
    pub r_i: f64,
    pub enhancement: f64,
    pub rate2_gain: f64,
}

pub fn cmd_cavity_design(cli: &Cli, args: &CavityArgs) -> Result<Vec<PathBuf>> {
    let sweep = match args.rm.as_slice() {
        [a, b] => Sweep {
            start: *a,
            stop: *b,
            step: if a == b { 1.0 } else { 1e-3 },
        },
        [a, b, c] => Sweep {
            start: *a,
            stop: *b,
            step: *c,
        },
        _ => unreachable!("clap enforces 2..=3 values"),
    };
    if args.rep_rate.is_nan() || args.rep_rate <= 0.0 {
        return Err(Error::Config {
            path: "--rep-rate".into(),
            message: "must be positive".into(),
        });
    }
    let baseline = Baseline {
        rate1_hz: args.baseline_r1,
        rate2_hz: args
            .baseline_r2
            .unwrap_or_else(|| two_photon_rate_law(args.baseline_r1, args.rep_rate)),
    };
    let rows = rate_curves(&args.ri, &sweep, baseline).map_err(|e| Error::Config {
        path: "--ri/--rm/--baseline".into(),
        message: e.to_string(),
    })?;
    let mark = |r_m: f64, r_i: f64| {
        nearest_row(&rows, r_m, r_i).map(|k| MarkedRow {
            row: k,
            r_m: rows[k].r_m,
            r_i: rows[k].r_i,
            enhancement: rows[k].enhancement,
            rate2_gain: rows[k].rate2_gain,
        })
    };
    let markers = CavityMarkers {
        measured: mark(0.93, 0.90),
        optimized: mark(0.99, 0.99),
    };
    let csv_path = cli.out.join("cavity_rates.csv");
    let marker_path = cli.out.join("cavity_markers.json");
    let mut buf = Vec::new();
    write_rate_csv(&rows, &mut buf)?;
    write_atomic(&csv_path, &buf)?;
    write_json(&marker_path, &markers)?;
    note(cli, format!("{} rows written", rows.len()));
    Ok(vec![csv_path, marker_path])
}

pub fn cmd_rates(cli: &Cli, args: &RatesArgs) -> Result<Vec<PathBuf>> {
    let mut cfg = config_required(cli)?;
    if let Some(r1) = args.r1_measured {
        cfg.reference = Some(ReferenceRates {
            r1_hz: r1,
            r2_hz: args.r2_measured,
            r2_uncertainty_hz: args.r2_uncertainty,
        });
        cfg.validate()?;
    }
    let report = rate_report(&cfg)?;
    let path = cli.out.join("rates.json");
    write_json(&path, &report)?;
    if !cli.quiet {
        println!("{}", serde_json::to_string_pretty(&report)?);
        if let Some(RateLawCheck {
            r2_formula_hz,
            r2_measured_hz: Some(m),
            r2_measured_uncertainty_hz: u,
            ..
        }) = report.reference
        {
            eprintln!(
                "rate law gives {r2_formula_hz:.3} Hz; measured {m} ± {} Hz (reported, not fitted)",
                u.map(|v| v.to_string()).unwrap_or_else(|| "?".into())
            );
        }
    }
    Ok(vec![path])
}
