//! Hamiltonian ground-state solvers (QCELS and a simplified ADAPT-QSCI) on a
//! statevector simulator, plus the surrogate-guided hyperparameter search
//! that tunes them.

pub mod error;
pub mod ham;
pub mod hyperopt;
pub mod models;
pub mod optim;
pub mod params;
pub mod pipeline;
pub mod qcels;
pub mod qsci;
pub mod sim;
pub mod surrogate;

pub use error::{Error, Result};
pub use ham::{EnergyEstimate, GroundState, PauliHamiltonian, PauliOp, PauliString};
pub use hyperopt::{HyperparamSpec, SearchConfig, SearchResult};
pub use params::{Hyperparams, Solver};
pub use qcels::QcelsHyperparams;
pub use qsci::AdaptQsciHyperparams;
pub use sim::{ExecutionMode, ShotBudget, Statevector};
pub use surrogate::{GbtConfig, GbtModel, TrainingRecord};
