//! Exact diagonalization of the lattice Schwinger model and the spin-1 U(1)
//! quantum link model, resolved by gauge sector, with symmetry-breaking
//! diagnostics of the left subsystem.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod lattice;
pub mod metrics;
pub mod par;
pub mod rdm;
pub mod spectral;

pub use dynamics::{
    build_initial_state, diagonalize, evolve, long_time_average, EigenDecomposition, InitialStateSpec,
    MultiSectorState, Propagator, Trajectory,
};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, HoppingConvention, ModelParams, SectorHamiltonian};
pub use lattice::{
    enumerate_sector_basis, FermionConfig, GaugeSector, LatticeSpec, LinkConfig, ModelKind, SectorBasis,
    SubsystemSpec,
};
pub use metrics::{entanglement_asymmetry, order_parameter, renyi2_asymmetry, trace_distance};
pub use rdm::{reduce, ReducedDensityMatrix};
