use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use canontime::spectra::DEFAULT_NORM_TOL;
use canontime::timekernel::DEFAULT_COVERAGE_TOL;

#[derive(Debug, Parser)]
#[command(name = "canontime", version, about = "Canonical time distributions, arrow-of-time curves and time POMs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// State file checks.
    #[command(subcommand)]
    State(StateCommand),
    /// Canonical time density on a uniform grid, as CSV (t, p_T, cumulative).
    Timedist(TimedistArgs),
    /// ⟨M_F⟩ and ⟨sgn T⟩ along an evolution, as CSV (t, mf, sgn, err).
    Lyapunov(LyapunovArgs),
    /// Energy and time ensemble lengths, as JSON.
    Uncertainty(UncertaintyArgs),
    /// Finite-resolution time POM of a discrete spectrum, as JSON.
    Pom(PomArgs),
    /// Closed-form free-particle density and M_F curve, as CSV.
    Oracle(OracleArgs),
    /// Full pipeline against the free-particle closed forms, as JSON.
    OracleCompare(OracleCompareArgs),
    /// M_F (or sgn T) matrix on a spectrum grid, in the binary matrix format.
    MfMatrix(MfMatrixArgs),
}

#[derive(Debug, Subcommand)]
pub enum StateCommand {
    /// Reports norm and estimated tail mass; exits 2 if the norm is off.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NORM_TOL)]
        norm_tol: f64,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// `t0:t1:step` with t0 ≤ t1 and step > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl TimeRange {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step * (1.0 + 1e-12)).floor() as usize;
        (0..=count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for TimeRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("expected t0:t1:step, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let (start, end, step) = (num(a)?, num(b)?, num(c)?);
        if !(start.is_finite() && end.is_finite() && step.is_finite()) {
            return Err("time range must be finite".into());
        }
        if end < start {
            return Err(format!("time range is not increasing: {start} > {end}"));
        }
        if step <= 0.0 {
            return Err(format!("step must be positive, got {step}"));
        }
        if (end - start) / step > 1e7 {
            return Err("time range has more than 1e7 points".into());
        }
        Ok(Self { start, end, step })
    }
}

/// Symmetric time grid; both flags or neither (automatic widening).
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, requires = "t_nodes")]
    pub t_half_width: Option<f64>,
    #[arg(long, requires = "t_half_width")]
    pub t_nodes: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_COVERAGE_TOL)]
    pub coverage_tol: f64,
}

#[derive(Debug, Args)]
pub struct TimedistArgs {
    pub state: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub tmin: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub tmax: f64,
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_COVERAGE_TOL)]
    pub coverage_tol: f64,
    #[arg(long, default_value_t = DEFAULT_NORM_TOL)]
    pub norm_tol: f64,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    pub state: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub times: TimeRange,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = DEFAULT_NORM_TOL)]
    pub norm_tol: f64,
}

#[derive(Debug, Args)]
pub struct UncertaintyArgs {
    pub state: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = DEFAULT_NORM_TOL)]
    pub norm_tol: f64,
}

#[derive(Debug, Args)]
pub struct PomArgs {
    pub spectrum: PathBuf,
    #[arg(long)]
    pub tau: f64,
    /// Power of two.
    #[arg(long)]
    pub nodes: usize,
    /// State whose time probabilities are reported.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = canontime::discrete::DEFAULT_COMPLETENESS_TOL)]
    pub completeness_tol: f64,
    #[arg(long, default_value_t = DEFAULT_NORM_TOL)]
    pub norm_tol: f64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub times: TimeRange,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleCompareArgs {
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 4001)]
    pub energy_nodes: usize,
    #[arg(long, default_value_t = 4001)]
    pub t_nodes: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MfMatrixArgs {
    pub spectrum: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write sgn T = I − 2 M_F instead.
    #[arg(long)]
    pub sgn: bool,
}
