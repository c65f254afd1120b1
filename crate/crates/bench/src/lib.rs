//! Benchmark fixtures shared by the criterion suites.

use accelerq::models::{ionic_hubbard_chain, transverse_field_ising};
use accelerq::PauliHamiltonian;

/// Open transverse-field Ising chain at the critical field.
pub fn ising(n: usize) -> PauliHamiltonian {
    transverse_field_ising(n, 1.0, 1.0, false).expect("valid chain")
}

/// Ionic Hubbard chain on `2·sites` qubits.
pub fn hubbard(sites: usize) -> PauliHamiltonian {
    ionic_hubbard_chain(sites, 1.0, 4.0, 2.0, 6.0).expect("valid chain")
}
