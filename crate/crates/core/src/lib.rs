//! Canonical time observable toolkit.
//!
//! States live in the energy representation ([`spectra`]); their canonical
//! time densities come from [`timekernel`]; the arrow-of-time operator and
//! general time functionals are in [`lyapunov`]; entropic spreads in
//! [`uncertainty`]; finite-resolution time measurements for discrete spectra
//! in [`discrete`]; closed-form free-particle results in [`oracle`].

pub mod discrete;
pub mod distribution;
pub mod error;
pub mod io;
pub mod lyapunov;
pub mod oracle;
pub mod quadrature;
pub mod spectra;
pub mod timekernel;
pub mod uncertainty;

pub use discrete::{
    build_ntau, build_pom, find_recurrence_time, pom_probability, DiscreteTimeKet, NTauOperator, PomFamily, PomOptions,
    PomProbability, Recurrence, RecurrenceSearch,
};
pub use distribution::{Distribution, Measure};
pub use error::{Error, Result};
pub use io::StateFile;
pub use lyapunov::{
    g_expectation, lyapunov_curve, mf_expectation, mf_matrix, sgn_expectation, sgn_t_matrix, HermitianMatrixObservable,
    LyapunovCurve, TimeFunction,
};
pub use oracle::{analytic_mf, analytic_time_density, build_oracle_state, FreeParticleParams};
pub use spectra::{box_state, EnergyState, SpectrumKind, SpectrumSpec, UnitsConfig, HBAR};
pub use timekernel::{
    covariance_residual, mean_time, time_amplitudes, time_density, time_density_auto, AutoGrid, CdfValue, FilonRule,
    TimeDistribution, TimeGrid,
};
pub use uncertainty::{ensemble_length, uncertainty_product, EnsembleLengthReport};
