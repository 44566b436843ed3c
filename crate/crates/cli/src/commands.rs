use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use canontime::discrete::pom_probability;
use canontime::io::{write_complex_matrix, StateFile};
use canontime::lyapunov::lyapunov_curve_on;
use canontime::oracle::{analytic_mf, analytic_time_density, oracle_spectrum};
use canontime::spectra::DEFAULT_TAIL_TOL;
use canontime::{
    build_oracle_state, build_pom, ensemble_length, mf_matrix, sgn_t_matrix, time_density, time_density_auto, AutoGrid,
    EnergyState, EnsembleLengthReport, Error, FreeParticleParams, PomOptions, SpectrumKind, TimeDistribution, TimeGrid,
};
use serde::Serialize;

use crate::args::*;
use crate::output::{write_csv, write_json};

/// Failure of a subcommand.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// A check the command itself performs, such as the oracle comparison.
    Contract {
        kind: &'static str,
        message: String,
    },
}

impl CliError {
    pub fn is_numerical(&self) -> bool {
        match self {
            CliError::Core(e) => e.is_numerical(),
            CliError::Contract { .. } => true,
        }
    }

    pub fn kind(&self) -> &str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Contract { kind, .. } => kind,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Contract { message, .. } => f.write_str(message),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult = Result<(), CliError>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::State(StateCommand::Validate { file, norm_tol, out }) => validate(&file, norm_tol, out.as_deref()),
        Command::Timedist(a) => timedist(a),
        Command::Lyapunov(a) => lyapunov(a),
        Command::Uncertainty(a) => uncertainty(a),
        Command::Pom(a) => pom(a),
        Command::Oracle(a) => oracle(a),
        Command::OracleCompare(a) => oracle_compare(a),
        Command::MfMatrix(a) => matrix(a),
    }
}

fn load_state(path: &Path, norm_tol: f64) -> Result<EnergyState, Error> {
    StateFile::read(path)?.state_with_tol(norm_tol)
}

fn density(state: &EnergyState, grid: &GridArgs) -> Result<TimeDistribution, Error> {
    match (grid.t_half_width, grid.t_nodes) {
        (Some(w), Some(n)) => time_density(state, &TimeGrid::symmetric(w, n)?.with_coverage_tol(grid.coverage_tol)?),
        _ => time_density_auto(state, &AutoGrid { coverage_tol: grid.coverage_tol, ..AutoGrid::default() }),
    }
}

#[derive(Serialize)]
struct ValidationReport {
    kind: SpectrumKind,
    levels: usize,
    degeneracy: usize,
    norm: f64,
    norm_error: f64,
    norm_tol: f64,
    /// Extrapolated mass above the top node; null for a hard cutoff.
    tail_mass: Option<f64>,
    tail_tol: f64,
    valid: bool,
}

fn validate(path: &Path, norm_tol: f64, out: Option<&Path>) -> CliResult {
    let file = StateFile::read(path)?;
    let st = file.state_with_tol(f64::INFINITY)?;
    let norm = st.norm_squared();
    let norm_error = (norm - 1.0).abs();
    let tail_mass = st.tail_mass_estimate();
    let tail_ok = tail_mass.is_none_or(|m| m <= DEFAULT_TAIL_TOL);
    let report = ValidationReport {
        kind: file.kind,
        levels: st.spectrum().len(),
        degeneracy: st.spectrum().degeneracy(),
        norm,
        norm_error,
        norm_tol,
        tail_mass,
        tail_tol: DEFAULT_TAIL_TOL,
        valid: norm_error <= norm_tol && tail_ok,
    };
    write_json(out, &report)?;
    if norm_error > norm_tol {
        return Err(Error::InvalidState(format!("norm {norm} differs from 1 by more than {norm_tol:e}")).into());
    }
    if let Some(mass) = tail_mass.filter(|_| !tail_ok) {
        return Err(Error::TailMass { mass, tol: DEFAULT_TAIL_TOL }.into());
    }
    Ok(())
}

fn timedist(a: TimedistArgs) -> CliResult {
    let st = load_state(&a.state, a.norm_tol)?;
    let grid = TimeGrid::uniform(a.tmin, a.tmax, a.nodes)?.with_coverage_tol(a.coverage_tol)?;
    let dist = time_density(&st, &grid)?;
    let rows = dist.nodes().iter().zip(dist.density()).map(|(&t, &p)| vec![t, p, dist.mass_below(t)]);
    write_csv(&a.out, &["t", "p_T", "cumulative"], rows)?;
    Ok(())
}

fn lyapunov(a: LyapunovArgs) -> CliResult {
    let st = load_state(&a.state, a.norm_tol)?;
    let dist = density(&st, &a.grid)?;
    let curve = lyapunov_curve_on(&dist, &a.times.values())?;
    let rows = (0..curve.len()).map(|i| vec![curve.times[i], curve.mf_values[i], curve.sgn_values[i], curve.errors[i]]);
    write_csv(&a.out, &["t", "mf", "sgn", "err"], rows)?;
    Ok(())
}

fn uncertainty(a: UncertaintyArgs) -> CliResult {
    let st = load_state(&a.state, a.norm_tol)?;
    let l_h = ensemble_length(&st.energy_density())?;
    let l_t = ensemble_length(&density(&st, &a.grid)?.to_distribution())?;
    write_json(Some(&a.out), &EnsembleLengthReport::new(l_h, l_t))?;
    Ok(())
}

#[derive(Serialize)]
struct PomReport {
    tau: f64,
    nodes: usize,
    rank: usize,
    completeness_residual: f64,
    idempotency_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability: Option<ProbabilitySeries>,
}

#[derive(Serialize)]
struct ProbabilitySeries {
    state: PathBuf,
    integrated_mass: f64,
    residual_mass: f64,
    total_error: f64,
    times: Vec<f64>,
    density: Vec<f64>,
}

fn pom(a: PomArgs) -> CliResult {
    let spectrum = Arc::new(StateFile::read(&a.spectrum)?.spectrum()?);
    let options = PomOptions { completeness_tol: Some(a.completeness_tol), ..PomOptions::default() };
    let family = build_pom(spectrum, a.tau, a.nodes, &options)?;
    let probability = match &a.state {
        Some(path) => {
            let p = pom_probability(&family, &load_state(path, a.norm_tol)?)?;
            Some(ProbabilitySeries {
                state: path.clone(),
                integrated_mass: p.integrated_mass,
                residual_mass: p.residual_mass,
                total_error: p.total_error(),
                times: p.times,
                density: p.density,
            })
        }
        None => None,
    };
    let report = PomReport {
        tau: family.tau(),
        nodes: family.len(),
        rank: family.ntau().rank(),
        completeness_residual: family.completeness_residual(),
        idempotency_residual: family.idempotency_residual(),
        probability,
    };
    write_json(Some(&a.out), &report)?;
    Ok(())
}

fn oracle(a: OracleArgs) -> CliResult {
    let p = FreeParticleParams::new(a.m, a.sigma)?;
    let rows = a.times.values().into_iter().map(|t| vec![t, analytic_time_density(&p, t), analytic_mf(&p, t)]);
    write_csv(&a.out, &["t", "p_T_analytic", "mf_analytic"], rows)?;
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    m: f64,
    sigma: f64,
    a: f64,
    energy_nodes: usize,
    t_nodes: usize,
    captured_mass: f64,
    /// max |⟨M_F⟩ − analytic| over 101 times in [−20a, 20a].
    max_mf_error: f64,
    /// max relative density error over |t| ≤ 10a.
    max_density_rel_error: f64,
    tol: f64,
    pass: bool,
}

fn oracle_compare(a: OracleCompareArgs) -> CliResult {
    let p = FreeParticleParams::new(a.m, a.sigma)?;
    let scale = p.a();
    let st = build_oracle_state(&p, Arc::new(oracle_spectrum(&p, a.energy_nodes)?))?;
    let dist = time_density(&st, &TimeGrid::sinh(4000.0 * scale, a.t_nodes, scale)?)?;
    let max_mf_error = (0..=100)
        .map(|k| -20.0 * scale + 0.4 * scale * k as f64)
        .map(|t| (dist.cdf(-t).value - analytic_mf(&p, t)).abs())
        .fold(0.0, f64::max);
    let max_density_rel_error = dist
        .nodes()
        .iter()
        .zip(dist.density())
        .filter(|(t, _)| t.abs() <= 10.0 * scale)
        .map(|(&t, v)| (v - analytic_time_density(&p, t)).abs() / analytic_time_density(&p, t))
        .fold(0.0, f64::max);
    let pass = max_mf_error <= a.tol && max_density_rel_error <= a.tol;
    let report = OracleReport {
        m: a.m,
        sigma: a.sigma,
        a: scale,
        energy_nodes: a.energy_nodes,
        t_nodes: a.t_nodes,
        captured_mass: dist.captured_mass(),
        max_mf_error,
        max_density_rel_error,
        tol: a.tol,
        pass,
    };
    write_json(a.out.as_deref(), &report)?;
    if !pass {
        return Err(CliError::Contract {
            kind: "OracleMismatch",
            message: format!(
                "pipeline differs from the closed forms: M_F {max_mf_error:e}, density {max_density_rel_error:e} (tol {:e})",
                a.tol
            ),
        });
    }
    Ok(())
}

fn matrix(a: MfMatrixArgs) -> CliResult {
    let spectrum = Arc::new(StateFile::read(&a.spectrum)?.spectrum()?);
    let op = if a.sgn { sgn_t_matrix(spectrum)? } else { mf_matrix(spectrum)? };
    let mut w = BufWriter::new(File::create(&a.out).map_err(Error::from)?);
    write_complex_matrix(&mut w, op.matrix())?;
    w.flush().map_err(Error::from)?;
    Ok(())
}
