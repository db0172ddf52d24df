//! `twocav`: trajectories, route comparisons, spectra and decoherence-free
//! certificates for two cavities sharing a Markovian bath.
//!
//! Exit status: 0 success, 2 config error, 3 invariant or tolerance
//! violation, 1 I/O failure.

mod analysis;
mod check;
mod config;
mod error;
mod presets;
mod report;
mod simulate;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Quantity, ScenarioConfig, DEFAULT_TRUNCATION, MAX_TRUNCATION};
use error::{CliError, ConfigError};
use report::Column;
use simulate::Trajectory;

const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "twocav", version, about = "Two cavities damped through a common bath")]
struct Cli {
    /// Scenario file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Embedded figure scenario (fig1..fig7), used in place of --config.
    #[arg(long = "preset", global = true, value_name = "NAME", conflicts_with = "config")]
    preset_name: Option<String>,

    /// Output directory [default: out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Largest allowed gap between routes, and slack for CSV checks.
    #[arg(long, global = true, value_name = "REAL", default_value_t = 1e-8)]
    tolerance: f64,

    /// Fock-space truncation; overrides the scenario file [default: 3].
    #[arg(long, global = true, value_name = "INT")]
    truncation: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario; one CSV per requested output plus summary.json.
    Run,
    /// Analytic versus numerical gaps per time point; exit 3 above --tolerance.
    Compare,
    /// Figure CSVs for one preset, or `all`.
    Figures {
        #[arg(value_name = "PRESET")]
        figure: String,
    },
    /// Generator spectrum against the predicted multiset.
    Spectrum {
        /// Used when no scenario is given.
        #[arg(long, value_name = "REAL", default_value_t = 1.0)]
        decay_rate: f64,
    },
    /// Decoherence-free subspace certificates and kernel comparison.
    Dfs {
        /// Used when no scenario is given.
        #[arg(long, value_name = "REAL", default_value_t = 1.0)]
        decay_rate: f64,
    },
    /// Check a scenario and spot-check density CSVs.
    Validate {
        /// Density CSV written by `run` or `figures`; repeatable.
        #[arg(long = "input", value_name = "CSV")]
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if !(cli.tolerance > 0.0 && cli.tolerance.is_finite()) {
        return Err(flag_error("--tolerance", format!("must be positive, got {}", cli.tolerance)));
    }
    if let Some(n) = cli.truncation {
        if n > MAX_TRUNCATION {
            return Err(flag_error("--truncation", format!("must be at most {MAX_TRUNCATION}, got {n}")));
        }
    }
    match &cli.command {
        Command::Run => run(cli),
        Command::Compare => compare(cli),
        Command::Figures { figure } => figures(cli, figure),
        Command::Spectrum { decay_rate } => spectrum(cli, *decay_rate),
        Command::Dfs { decay_rate } => dfs(cli, *decay_rate),
        Command::Validate { inputs } => validate(cli, inputs),
    }
}

fn flag_error(flag: &str, message: String) -> CliError {
    CliError::Config(ConfigError::new("command line", None, flag, message))
}

fn out_dir(cli: &Cli) -> Result<PathBuf, CliError> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    report::ensure_dir(&dir)?;
    Ok(dir)
}

fn load_scenario(cli: &Cli) -> Result<Option<ScenarioConfig>, CliError> {
    if let Some(path) = &cli.config {
        let origin = path.display().to_string();
        let source = fs::read_to_string(path)
            .map_err(|e| ConfigError::new(&origin, None, "", format!("cannot read file: {e}")))?;
        return Ok(Some(config::parse(&source, &origin, cli.truncation)?));
    }
    if let Some(name) = &cli.preset_name {
        return Ok(Some(load_preset(name, cli.truncation)?));
    }
    Ok(None)
}

fn require_scenario(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    load_scenario(cli)?.ok_or_else(|| flag_error("--config", "a scenario is required (--config PATH or --preset NAME)".into()))
}

fn load_preset(name: &str, truncation: Option<usize>) -> Result<ScenarioConfig, CliError> {
    let source = presets::lookup(name).ok_or_else(|| {
        let known: Vec<_> = presets::names().collect();
        flag_error("preset", format!("unknown preset `{name}`; expected one of {}", known.join(", ")))
    })?;
    Ok(config::parse(source, &format!("preset {name}"), truncation)?)
}

fn series_columns(cfg: &ScenarioConfig, trajectories: &[Trajectory], quantity: Quantity) -> Vec<Column> {
    if !cfg.outputs.contains(&quantity) {
        return Vec::new();
    }
    let build = match quantity {
        Quantity::Density => report::density_columns,
        Quantity::Concurrence => report::concurrence_columns,
        Quantity::Estar => report::estar_columns,
        Quantity::Spectrum | Quantity::Dfs => return Vec::new(),
    };
    trajectories.iter().flat_map(build).collect()
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = require_scenario(cli)?;
    let trajectories = simulate::simulate(&cfg)?;
    simulate::check_invariants(&trajectories, cli.tolerance)?;
    let dir = out_dir(cli)?;
    let sigma_t = cfg.time_grid.points();
    for q in [Quantity::Density, Quantity::Concurrence, Quantity::Estar] {
        if cfg.outputs.contains(&q) {
            let path = dir.join(format!("{}.csv", q.name()));
            report::write_series(&path, &sigma_t, &series_columns(&cfg, &trajectories, q))?;
            announce(&path);
        }
    }
    let spectrum = if cfg.outputs.contains(&Quantity::Spectrum) {
        let r = analysis::spectrum_report(cfg.decay_rate, cfg.truncation, cli.tolerance)?;
        let path = dir.join("spectrum.csv");
        report::write_spectrum(&path, &r)?;
        announce(&path);
        Some(r)
    } else {
        None
    };
    let dfs = if cfg.outputs.contains(&Quantity::Dfs) {
        let r = analysis::dfs_report(cfg.decay_rate, cfg.truncation)?;
        let path = dir.join("dfs.csv");
        report::write_dfs(&path, &r)?;
        announce(&path);
        Some(r)
    } else {
        None
    };
    let failed_spectrum = spectrum.as_ref().is_some_and(|r| !r.passed);
    let failed_dfs = dfs.as_ref().is_some_and(|r| !r.passed);
    let summary = report::summarize(&cfg, cli.tolerance, &trajectories, spectrum, dfs)?;
    let path = dir.join("summary.json");
    report::write_json(&path, &summary)?;
    announce(&path);
    if failed_spectrum {
        return Err(CliError::Invariant("numerical spectrum does not match the predicted multiset".into()));
    }
    if failed_dfs {
        return Err(CliError::Invariant("decoherence-free certificates failed".into()));
    }
    Ok(())
}

fn compare(cli: &Cli) -> Result<(), CliError> {
    let cfg = require_scenario(cli)?;
    let trajectories = simulate::simulate(&cfg)?;
    let dir = out_dir(cli)?;
    let path = dir.join("compare.csv");
    report::write_comparison(&path, &trajectories)?;
    println!("member,max_analytic_vs_expm,max_expm_vs_rk4,status");
    for t in &trajectories {
        let ok = t.max_expm_gap() <= cli.tolerance && t.max_rk4_gap() <= cli.tolerance;
        println!(
            "{},{:.3e},{:.3e},{}",
            t.member.label.as_deref().unwrap_or(t.member.initial.kind()),
            t.max_expm_gap(),
            t.max_rk4_gap(),
            if ok { "ok" } else { "FAIL" }
        );
    }
    announce(&path);
    simulate::check_invariants(&trajectories, cli.tolerance)
}

fn figures(cli: &Cli, figure: &str) -> Result<(), CliError> {
    let names: Vec<&str> = if figure == "all" {
        presets::names().collect()
    } else {
        vec![figure]
    };
    let configs = names
        .iter()
        .map(|n| load_preset(n, cli.truncation))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = out_dir(cli)?;
    for (name, cfg) in names.iter().zip(&configs) {
        let trajectories = simulate::simulate(cfg)?;
        simulate::check_invariants(&trajectories, cli.tolerance)?;
        let columns: Vec<Column> = [Quantity::Density, Quantity::Concurrence, Quantity::Estar]
            .into_iter()
            .flat_map(|q| series_columns(cfg, &trajectories, q))
            .collect();
        let path = dir.join(format!("{name}.csv"));
        report::write_series(&path, &cfg.time_grid.points(), &columns)?;
        announce(&path);
    }
    Ok(())
}

/// Rate and truncation from the scenario when one is given, else flags.
fn model_size(cli: &Cli, decay_rate: f64) -> Result<(f64, usize), CliError> {
    if let Some(cfg) = load_scenario(cli)? {
        return Ok((cfg.decay_rate, cfg.truncation));
    }
    if !(decay_rate > 0.0 && decay_rate.is_finite()) {
        return Err(flag_error("--decay-rate", format!("must be positive, got {decay_rate}")));
    }
    Ok((decay_rate, cli.truncation.unwrap_or(DEFAULT_TRUNCATION)))
}

fn spectrum(cli: &Cli, decay_rate: f64) -> Result<(), CliError> {
    let (rate, truncation) = model_size(cli, decay_rate)?;
    let r = analysis::spectrum_report(rate, truncation, cli.tolerance)?;
    let dir = out_dir(cli)?;
    let path = dir.join("spectrum.csv");
    report::write_spectrum(&path, &r)?;
    println!("eigenvalue,multiplicity,predicted_multiplicity");
    for row in &r.rows {
        let center = if row.center_re.is_nan() { row.predicted } else { row.center_re };
        println!("{center:.12},{},{}", row.multiplicity, row.predicted_multiplicity);
    }
    announce(&path);
    if r.passed {
        Ok(())
    } else {
        Err(CliError::Invariant("numerical spectrum does not match the predicted multiset".into()))
    }
}

fn dfs(cli: &Cli, decay_rate: f64) -> Result<(), CliError> {
    let (rate, truncation) = model_size(cli, decay_rate)?;
    let r = analysis::dfs_report(rate, truncation)?;
    let dir = out_dir(cli)?;
    let csv = dir.join("dfs.csv");
    report::write_dfs(&csv, &r)?;
    let json = dir.join("dfs.json");
    report::write_json(&json, &r)?;
    let passed = r.certificates.iter().filter(|c| c.passed).count();
    println!("certified {passed}/{} dark dyads", r.certificates.len());
    println!(
        "kernel dimension {} (dark span {}), residuals {:.3e} / {:.3e}",
        r.kernel.kernel_dim, r.kernel.dark_dim, r.kernel.dark_in_kernel, r.kernel.kernel_in_dark
    );
    announce(&csv);
    announce(&json);
    if r.passed {
        Ok(())
    } else {
        Err(CliError::Invariant("decoherence-free certificates failed".into()))
    }
}

fn validate(cli: &Cli, inputs: &[PathBuf]) -> Result<(), CliError> {
    let scenario = load_scenario(cli)?;
    if scenario.is_none() && inputs.is_empty() {
        return Err(flag_error("--config", "nothing to validate; pass --config, --preset or --input".into()));
    }
    if let Some(cfg) = scenario {
        println!(
            "scenario ok: {} member(s), truncation {}, {} time points",
            cfg.members.len(),
            cfg.truncation,
            cfg.time_grid.steps + 1
        );
    }
    for path in inputs {
        let c = check::check_density_csv(path, cli.tolerance)?;
        println!(
            "{}: {} rows, {} state(s), max trace error {:.3e}, lowest eigenvalue {:.3e}",
            path.display(),
            c.rows,
            c.groups,
            c.max_trace_error,
            c.min_eigenvalue
        );
    }
    Ok(())
}
