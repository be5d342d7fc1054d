//! Command-line surface: file-based subcommands tying the simulator, the
//! detector self-characterization and the security analysis into
//! reproducible pipelines. The binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 degenerate geometry, 5 solver failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::io::{self, IoError, Preset, RunConfig};
use crate::qdsc::{run_qdsc_detailed, QdscError, QdscOptions, QdscOutput};
use crate::receiver::{emit_timestamps, simulate_run, SimError, SimRun};
use crate::security::{analyze_run, RunAnalysis, SecurityConfig, SecurityError};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DEGENERATE_GEOMETRY: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;

/// A failed command with its script-facing exit code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let exit_code = match &e {
            IoError::Config(_) => EXIT_CONFIG,
            IoError::Data { .. } | IoError::Io { .. } => EXIT_DATA,
        };
        CliError { exit_code, message: e.to_string() }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let exit_code = match &e {
            SimError::InvalidWindow { .. } | SimError::InvalidModel(_) => EXIT_CONFIG,
            SimError::Quantum(_) => EXIT_DATA,
        };
        CliError { exit_code, message: e.to_string() }
    }
}

impl From<QdscError> for CliError {
    fn from(e: QdscError) -> Self {
        let exit_code = match &e {
            QdscError::EmptyInput | QdscError::Quantum(_) => EXIT_DATA,
            QdscError::InsufficientPhaseCoverage
            | QdscError::DegenerateHull { .. }
            | QdscError::NotAnEllipse
            | QdscError::InconsistentFit(_)
            | QdscError::GramInconsistent { .. }
            | QdscError::CoverageTooLow { .. } => EXIT_DEGENERATE_GEOMETRY,
        };
        CliError { exit_code, message: e.to_string() }
    }
}

impl From<SecurityError> for CliError {
    fn from(e: SecurityError) -> Self {
        let exit_code = match &e {
            SecurityError::EmptyInput => EXIT_DATA,
            SecurityError::DomainError(_) => EXIT_CONFIG,
            _ => EXIT_SOLVER,
        };
        CliError { exit_code, message: e.to_string() }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run configuration; omitted means all defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configured one.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory all outputs are written into (created if missing).
    #[arg(long, global = true, default_value = "rfiqkd-out")]
    pub out_dir: PathBuf,
    /// Relax the security constraints by the finite-key deviation delta(k).
    #[arg(long, global = true)]
    pub finite_key: bool,
    /// Device preset: "ideal" or "paper-fig4" (overrides [device]).
    #[arg(long, global = true)]
    pub preset: Option<String>,
}

#[derive(Debug, Parser)]
#[command(
    name = "rfiqkd",
    about = "Passive time-bin RFI-QKD receiver toolkit: simulation, detector \
             self-characterization and finite-key security analysis",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an acquisition: counts, Z records, a TDC event snippet and
    /// the ground-truth POVM.
    Simulate,
    /// Reconstruct the receiver POVM from a counts file.
    Characterize {
        /// Counts file (defaults to <out-dir>/counts.csv).
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Per-window security analysis from a counts file and a POVM document.
    Security {
        #[arg(long)]
        counts: Option<PathBuf>,
        /// POVM document (defaults to <out-dir>/povm.txt).
        #[arg(long)]
        povm: Option<PathBuf>,
        /// Z-basis coincidence sidecar (defaults to <out-dir>/z_records.csv).
        #[arg(long)]
        z_records: Option<PathBuf>,
    },
    /// Simulate, characterize and analyze in one run; writes a report.
    Pipeline,
    /// Print the fidelity table of a POVM document against the ideal
    /// effects (and a reference document, when given).
    Fidelity {
        #[arg(long)]
        povm: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => io::parse_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(name) = &common.preset {
        name.parse::<Preset>()?.apply(&mut config);
    }
    if let Some(seed) = common.seed {
        config.seed = Some(seed);
    }
    if common.finite_key {
        config.security.finite_key = true;
    }
    config.validate()?;
    Ok(config)
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError {
        exit_code: EXIT_DATA,
        message: format!("cannot create output directory {}: {e}", dir.display()),
    })
}

fn security_config(config: &RunConfig) -> SecurityConfig {
    SecurityConfig {
        epsilon: config.security.epsilon,
        finite_key: config.security.finite_key,
        e_zz_override: config.security.e_zz_override,
        pin_marginal: config.security.pin_marginal,
        ..SecurityConfig::default()
    }
}

fn run_simulation(config: &RunConfig) -> Result<SimRun, CliError> {
    let a = &config.acquisition;
    Ok(simulate_run(
        &config.device,
        &config.effective_drift(),
        a.n_windows,
        a.mean_detections,
        a.window_s,
    )?)
}

fn write_simulation(config: &RunConfig, run: &SimRun, out_dir: &Path) -> Result<(), CliError> {
    let out = &config.output;
    io::write_counts_file(&out_dir.join(&out.counts), &run.windows)?;
    io::write_z_records(&out_dir.join(&out.z_records), &run.z_records)?;
    io::write_povm_document(&out_dir.join(&out.ground_truth_povm), &run.ground_truth)?;
    // A full event dump would hold every detection of the run; one window
    // is a representative TDC snippet.
    let events =
        emit_timestamps(&run.windows[0], &config.device, config.acquisition.jitter_ps, 0)?;
    io::write_events_file(&out_dir.join(&out.events), &events)?;
    Ok(())
}

fn characterize_counts(
    config: &RunConfig,
    counts_path: &Path,
    out_dir: &Path,
) -> Result<QdscOutput, CliError> {
    let windows = io::read_counts_file(counts_path)?;
    let output = run_qdsc_detailed(&windows, &QdscOptions::default())?;
    let out = &config.output;
    io::write_povm_document(&out_dir.join(&out.povm), &output.povm)?;
    io::write_text(
        &out_dir.join(&out.diagnostics),
        &io::diagnostics_to_document(&output.diagnostics),
    )?;
    io::write_ellipse_plot(&out_dir.join(&out.ellipse_plot), &output.boundary, &output.fit)?;
    Ok(output)
}

fn analyze_counts(
    config: &RunConfig,
    counts_path: &Path,
    z_path: &Path,
    povm: &crate::quantum::Povm,
    out_dir: &Path,
) -> Result<RunAnalysis, CliError> {
    let windows = io::read_counts_file(counts_path)?;
    let z_records = if config.security.e_zz_override.is_some() {
        Vec::new()
    } else {
        io::read_z_records(z_path)?
    };
    let analysis = analyze_run(&windows, &z_records, povm, &security_config(config))?;
    let out = &config.output;
    io::write_results(&out_dir.join(&out.results), &analysis)?;
    io::write_security_plot(&out_dir.join(&out.security_plot), &windows, &analysis)?;
    Ok(analysis)
}

fn print_summary(analysis: &RunAnalysis) {
    let s = &analysis.summary;
    println!(
        "windows={} excluded={} e_zz={:.4} C = {:.4} +- {:.4}  R = {:.4} +- {:.4}",
        s.windows_analyzed, s.windows_excluded, s.e_zz, s.c_mean, s.c_std, s.r_mean, s.r_std
    );
}

fn print_fidelity_table(rows: &[io::FidelityRow]) {
    println!("channel  to_ground_truth  to_ideal");
    for row in rows {
        let gt = match row.to_ground_truth {
            Some(f) => format!("{f:.6}"),
            None => "n/a".into(),
        };
        println!("{:<7}  {:<15}  {:.6}", row.channel, gt, row.to_ideal);
    }
}

/// Execute a parsed command; errors carry the script-facing exit code.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(&cli.common)?;
    let out_dir = cli.common.out_dir.as_path();

    match &cli.command {
        Command::Simulate => {
            ensure_out_dir(out_dir)?;
            let run = run_simulation(&config)?;
            write_simulation(&config, &run, out_dir)?;
            println!(
                "simulated {} windows ({} detections) into {}",
                run.windows.len(),
                run.windows.iter().map(|w| w.total()).sum::<u64>(),
                out_dir.display()
            );
        }
        Command::Characterize { counts } => {
            ensure_out_dir(out_dir)?;
            let counts_path =
                counts.clone().unwrap_or_else(|| out_dir.join(&config.output.counts));
            let output = characterize_counts(&config, &counts_path, out_dir)?;
            let rows = io::fidelity_table(&output.povm, None)
                .map_err(|e| CliError { exit_code: EXIT_DATA, message: e.to_string() })?;
            print_fidelity_table(&rows);
        }
        Command::Security { counts, povm, z_records } => {
            ensure_out_dir(out_dir)?;
            let counts_path =
                counts.clone().unwrap_or_else(|| out_dir.join(&config.output.counts));
            let povm_path = povm.clone().unwrap_or_else(|| out_dir.join(&config.output.povm));
            let z_path =
                z_records.clone().unwrap_or_else(|| out_dir.join(&config.output.z_records));
            let povm = io::read_povm_document(&povm_path)?;
            let analysis = analyze_counts(&config, &counts_path, &z_path, &povm, out_dir)?;
            print_summary(&analysis);
        }
        Command::Pipeline => {
            ensure_out_dir(out_dir)?;
            let run = run_simulation(&config)?;
            write_simulation(&config, &run, out_dir)?;
            let counts_path = out_dir.join(&config.output.counts);
            let qdsc = characterize_counts(&config, &counts_path, out_dir)?;
            let z_path = out_dir.join(&config.output.z_records);
            let analysis =
                analyze_counts(&config, &counts_path, &z_path, &qdsc.povm, out_dir)?;
            let fidelity = io::fidelity_table(&qdsc.povm, Some(&run.ground_truth))
                .map_err(|e| CliError { exit_code: EXIT_DATA, message: e.to_string() })?;
            let report = io::ReportDocument {
                config_hash: io::config_fingerprint(&config.to_toml()),
                seed: config.seed.unwrap_or(config.drift.seed),
                version: env!("CARGO_PKG_VERSION").to_string(),
                diagnostics: qdsc.diagnostics,
                fidelity,
                summary: analysis.summary,
            };
            report.validate()?;
            io::write_text(&out_dir.join(&config.output.report), &report.to_document())?;
            print_fidelity_table(&report.fidelity);
            print_summary(&analysis);
        }
        Command::Fidelity { povm, reference } => {
            let povm = io::read_povm_document(povm)?;
            let reference = match reference {
                Some(path) => Some(io::read_povm_document(path)?),
                None => None,
            };
            let rows = io::fidelity_table(&povm, reference.as_ref())
                .map_err(|e| CliError { exit_code: EXIT_DATA, message: e.to_string() })?;
            print_fidelity_table(&rows);
        }
    }
    Ok(())
}
