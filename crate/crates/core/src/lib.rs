//! Simulator for a periodically driven chain of coupled bosonic sites split
//! into a driven (ergodic) half and a disordered (localized) half.
//!
//! The crate covers the model parameterization ([`model`], [`device`],
//! [`config`]), the excitation-number sectors ([`basis`]), Hamiltonian
//! assembly ([`hamiltonian`]), time evolution and Floquet operators
//! ([`propagator`]), observables ([`observables`]), quasienergy statistics
//! ([`spectrum`]), disorder ensembles ([`ensemble`]) and the classical
//! parametric-resonance model ([`semiclassical`]).

pub mod basis;
pub mod config;
pub mod device;
pub mod ensemble;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod propagator;
pub mod quadrature;
pub mod semiclassical;
pub mod spectrum;

pub use basis::{BasisTag, QuantumState, SectorBasis};
pub use config::{ModelConfig, ProfileKind, ResolvedModel};
pub use device::{DeviceTable, WorkingRow};
pub use ensemble::{run_dynamics_ensemble, run_spectrum_ensemble, DynamicsRequest, EnsembleResult};
pub use error::{JunctionError, Result};
pub use hamiltonian::{hamiltonian_at, HamiltonianBuilder, HamiltonianSnapshot};
pub use model::{
    frequency_at, resonance_drive_frequency, units, ChainSpec, DisorderSpec, DriveSpec, JunctionModel,
    PotentialProfile, PotentialSpec, SiteRange,
};
pub use observables::ObservableSeries;
pub use propagator::{
    convergence_probe, evolve_state, floquet_operator, ConvergenceReport, FloquetOperator, Propagator,
    StateTrajectory, UnitaryMatrix,
};
pub use semiclassical::{SemiclassicalParams, StabilityGrid};
pub use spectrum::{QuasienergySpectrum, RatioSample};
