use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qds", version, about = "Generate and validate noisy one- and two-qubit simulation datasets")]
pub struct Cli {
    /// Worker threads (defaults to all cores). Never changes numerical output.
    #[arg(long, env = "QDS_THREADS", global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the 52 dataset configurations.
    List {
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Generate a dataset directory with one file per example and a manifest.
    Generate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        /// Output root; the dataset is written to <OUT>/<NAME>/.
        #[arg(long, default_value = "datasets")]
        out: PathBuf,
    },
    /// Check a dataset (by name, config or directory/file) and print a JSON report.
    Validate {
        /// Dataset name, dataset directory or example file.
        target: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::File)]
        mode: Mode,
        #[command(flatten)]
        overrides: Overrides,
        /// RK4 substeps per time slice for the oracle.
        #[arg(long, default_value_t = qds_core::validation::DEFAULT_SUBSTEPS)]
        substeps: usize,
        /// Tolerance; defaults to 1e-6 for expectations and 0.05 for PSD bands.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Summarize an example file.
    Inspect {
        file: PathBuf,
        /// Write state/observable expectations as CSV.
        #[arg(long)]
        csv_expectations: Option<PathBuf>,
        /// Write time, pulses and distorted pulses as CSV (one row per time step).
        #[arg(long)]
        csv_waveforms: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Noiseless data against the oracle, plus V_O = I.
    Noiseless,
    /// Noisy data against the oracle fed the same realizations.
    Matched,
    /// Periodogram of PSD-specified noise against its density.
    Psd,
    /// Delay and attenuation of distorted pulses.
    Distortion,
    /// Checksums, shapes and manifest agreement of stored files.
    File,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Canonical dataset name, e.g. G_1q_X_Z_N1.
    #[arg(value_name = "NAME", conflicts_with_all = ["name", "config"])]
    pub positional: Option<String>,
    #[arg(long, conflicts_with = "config")]
    pub name: Option<String>,
    /// JSON config file (same schema as the simulation_parameters block).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long = "num-ex")]
    pub num_examples: Option<usize>,
    /// Monte Carlo realizations per example.
    #[arg(long)]
    pub k: Option<usize>,
    /// Time steps (power of two).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Retain per-realization H1 and UI arrays.
    #[arg(long)]
    pub full: bool,
    /// Drop the distortion stage even for `_D` names.
    #[arg(long)]
    pub no_distortion_override: bool,
    #[arg(long)]
    pub filter_order: Option<usize>,
    /// Passband ripple in dB.
    #[arg(long)]
    pub filter_ripple: Option<f64>,
    /// Cutoff in rad/s.
    #[arg(long)]
    pub filter_cutoff: Option<f64>,
}
