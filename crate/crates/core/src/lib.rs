//! Quantum dot coupled to a microcavity with phonon-assisted feeding.
//!
//! The model is the Jaynes–Cummings Hamiltonian with cavity loss,
//! spontaneous emission, incoherent pumping and a temperature-activated
//! `σa†` channel. The crate builds its Lindblad generator, computes steady
//! states and photoluminescence spectra, and analyses the one-photon
//! transition sectors of the gain-free generator (branch labels, exceptional
//! points, bare-state content).
//!
//! Units: ħ = 1, energies and rates in meV, time in 1/meV, temperature in K.

pub mod error;
pub mod linalg;
pub mod liouville;
pub mod operators;
pub mod spectrum;
pub mod subspaces;
pub mod sweep;
pub mod thermal;

pub use error::{Error, Result};
pub use liouville::{
    dissipator, evolve, full_liouvillian, full_liouvillian_in_frame, no_gain_liouvillian, no_gain_liouvillian_in_frame,
    steady_state, GeneratorKind, Superoperator,
};
pub use operators::{
    bare_operators, build_space, jc_hamiltonian, BareOperators, DensityMatrix, HilbertSpace, Operator, SystemParams,
};
pub use spectrum::{emission_spectrum, Emission, Peak, PeakLabel, PeakTrajectory, Spectrum, SpectrumMethod};
pub use subspaces::{Branch, ExceptionalPoint, GapMinimum, Source, SubspaceParams, TransitionEigen};
pub use thermal::{classify_region, resonance_temperature, Region, ResonancePoint, ThermalModel};
