//! Gate dynamics: basis, Hamiltonian and quantum trajectories.

pub mod basis;
pub mod expmv;
pub mod hamiltonian;
pub mod model;
pub mod trajectory;

pub use basis::{BasisState, Level, LevelScheme, Subspace};
pub use model::{
    decay_error_analytic, ideal_output, CcLeakage, CtLeakage, DecayConvention, DriveNoise,
    GateModel, LeakageTerms, PulseSchedule, PulseStage, Stage,
};
pub use trajectory::{
    average_fidelity, process_fidelity, FidelityReport, InputReport, JumpRecord, SimConfig,
    Simulator, TrajectoryOutcome,
};
