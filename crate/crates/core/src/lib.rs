//! Open-system simulation of a driven single-ion phonon laser: generator
//! assembly, spectral analysis, time evolution, state diagnostics, and the
//! mean-field reduction.

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod liouvillian;
pub mod meanfield;
pub mod observables;
mod ode;

pub use dynamics::{evolve, fit_decaying_oscillation, DecayFit, QuantumState, Trajectory};
pub use error::{Error, Result};
pub use hilbert::{build_hamiltonian, build_operators, Operators, SystemParams};
pub use liouvillian::{
    build_liouvillian, collapse_operators, eigenspectrum, find_lep, reconstruct_state,
    steady_state, EigenMode, LepClass, LepProbe, LepScanResult, SuperOperator,
};
pub use meanfield::{
    find_fixed_points, integrate_mf, jacobian, mf_rhs, phase_diagram, tail_recurrence,
    threshold_and_amplitude, FixedPoint, MeanFieldState, MfTrajectory, PhaseDiagram,
    RegionLabel, Stability,
};
pub use observables::{
    expectation, log_negativity, mean_phonon, phase_distribution, phonon_reduced,
    power_spectrum, power_spectrum_direct, sync_measure, tail_population, wigner,
    PhaseDistribution, PowerSpectrum, WignerField,
};
