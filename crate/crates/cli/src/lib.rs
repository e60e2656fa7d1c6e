//! Command-line front end. `run` parses arguments, dispatches, and maps
//! outcomes to exit codes: 0 success, 1 invalid flags, 2 a check outside its
//! tolerance, 3 a dense state above the qubit cap.

mod commands;
pub mod io;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Tolerance(String),
    Core(xxz_im::Error),
    Io(String),
}

impl From<xxz_im::Error> for CliError {
    fn from(e: xxz_im::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use xxz_im::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Tolerance(_) => EXIT_TOLERANCE,
            CliError::Core(E::Capacity { .. }) => EXIT_CAPACITY,
            // Extrapolation and root finding that miss their targets are tolerance failures.
            CliError::Core(E::Precision(_) | E::Convergence(_)) => EXIT_TOLERANCE,
            CliError::Core(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Tolerance(m) => write!(f, "check failed: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

fn complex(s: &str) -> Result<num_complex::Complex64, String> {
    io::parse_complex(s)
}

#[derive(Debug, Parser)]
#[command(name = "xxz-im", version, about = "Influence matrices of Floquet XXZ circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Half the number of time steps; the IM has 4N legs.
    #[arg(long = "N")]
    pub n: usize,
    /// Anisotropy η, e.g. `i*pi/2` or `0.1+0.8i`.
    #[arg(long, value_parser = complex, default_value = "i*pi/2")]
    pub eta: num_complex::Complex64,
    /// Gate parameter u.
    #[arg(long, value_parser = complex)]
    pub u: num_complex::Complex64,
    /// Bath weight q > 0.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuildMethod {
    Circuit,
    Bethe,
    Fermion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SaddleArg {
    Leading,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Adjugate,
    Jacobi,
    Orth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SectorArg {
    Cl,
    Q,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Yang-Baxter, crossing, unitarity and fusion-projector residuals at random spectral parameters.
    VerifyIdentities {
        #[arg(long, value_parser = complex)]
        eta: num_complex::Complex64,
        #[arg(long, value_parser = complex)]
        u: num_complex::Complex64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Build an IM and write it as JSON.
    BuildIm {
        #[arg(long, value_enum)]
        method: BuildMethod,
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated ε values for the Bethe route.
        #[arg(long = "eps-ladder")]
        eps_ladder: Option<String>,
        /// Working decimal digits for the Bethe route.
        #[arg(long)]
        digits: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalized ∞-norm distance between two IM files.
    CompareIm {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Checks that the circuit IM is a fixed point of T(v) and T̃(v).
    FixedPoint {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = complex)]
        v: num_complex::Complex64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// One-point function of the boundary spin between two IMs.
    Correlator {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// sx, sy, sz or a JSON file holding a 2×2 matrix.
        #[arg(long)]
        obs: String,
        /// JSON file holding the 2×2 initial density matrix.
        #[arg(long)]
        rho0: PathBuf,
    },
    /// Exact Jordan-block multiplicities, optionally with saddle-point estimates, as CSV.
    JordanMult {
        #[arg(long = "N")]
        n: usize,
        /// Occupations n1,n2,n3,n4.
        #[arg(long = "n")]
        occupations: String,
        /// Fill the exact column and check the dimension sum rule.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum)]
        saddle: Option<SaddleArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dense Jordan structure of T̃(v) per magnetization block, 4N ≤ 12.
    JordanProbe {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = complex)]
        v: num_complex::Complex64,
        /// Probe T̃_ε instead of T̃.
        #[arg(long, value_parser = complex)]
        epsilon: Option<num_complex::Complex64>,
        #[arg(long, default_value_t = 1e-7)]
        cluster_tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        rank_tol: f64,
    },
    /// Single-particle basis rows as CSV, optionally with a tail fit report.
    Basis {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long = "N")]
        n: usize,
        /// s = sech u, in (0, 1).
        #[arg(long)]
        s: f64,
        #[arg(long, value_enum, default_value = "both")]
        sector: SectorArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        fit: bool,
        /// Fit report path; defaults to the CSV path with a `.fit.json` extension.
        #[arg(long = "fit-out")]
        fit_out: Option<PathBuf>,
        /// Fit window lo,hi in tail index k.
        #[arg(long)]
        window: Option<String>,
        /// Working decimal digits for the Jacobi rows.
        #[arg(long, default_value_t = 40)]
        digits: u32,
    },
    /// Free-fermion single-particle checks: [M, h] commutators, triangularity, Gaussian form.
    FfCheck {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        u: f64,
        #[arg(long, value_parser = complex)]
        v: num_complex::Complex64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

/// Parses `args` (program name first) and runs; human-readable output goes to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = write!(out, "{e}");
            return code;
        }
    };
    match commands::dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            e.exit_code()
        }
    }
}
