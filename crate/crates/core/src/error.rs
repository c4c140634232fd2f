use thiserror::Error;

use crate::subspaces::GapMinimum;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("photon-number cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operator dimension {found} does not match space dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("Schur iteration did not converge on a {0}x{0} matrix")]
    EigenNoConvergence(usize),

    #[error("eigenbasis is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("steady state is degenerate: {zero_modes} modes below {threshold:.3e}")]
    DegenerateSteadyState { zero_modes: usize, threshold: f64 },

    #[error("no steady state: smallest singular value {0:.3e} is not numerically zero")]
    NoSteadyState(f64),

    #[error("correlation did not decay within {0} steps")]
    NoDecay(usize),

    #[error("cavity and exciton energies do not cross in [{lo}, {hi}] K")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("no peaks found in spectrum")]
    NoPeaks,

    #[error("Lorentzian fit did not converge after {0} iterations")]
    FitNoConvergence(usize),

    #[error("fit window contains only {0} grid points")]
    FitWindowTooSmall(usize),

    #[error("peak assignment is ambiguous at T = {temperature} K")]
    TrackingAmbiguity { temperature: f64 },

    #[error("branch labels are ambiguous at P_theta = {p_theta} meV (gap {gap:.3e} meV)")]
    LabelAmbiguity { p_theta: f64, gap: f64 },

    #[error("branches do not coalesce: minimum gap {:.3e} meV at P_theta = {} meV", .0.gap, .0.p_theta)]
    AvoidedCrossing(GapMinimum),
}
