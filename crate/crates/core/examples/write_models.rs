//! Regenerate the Hamiltonians under `data/hamiltonians/`.
//!
//!     cargo run -p accelerq-core --example write_models -- data/hamiltonians

use accelerq::models::{ionic_hubbard_chain, transverse_field_ising, xxz_chain};
use accelerq::{PauliHamiltonian, PauliOp, PauliString};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/hamiltonians".into());
    std::fs::create_dir_all(&dir)?;
    let systems = [
        (
            "z0",
            PauliHamiltonian::new(1, [(-1.0, PauliString::single(0, PauliOp::Z))])?,
        ),
        ("ising4", transverse_field_ising(4, 1.0, 0.5, true)?),
        ("ising6", transverse_field_ising(6, 1.0, 0.5, false)?),
        (
            "ising6_critical",
            transverse_field_ising(6, 1.0, 1.0, false)?,
        ),
        ("ising8", transverse_field_ising(8, 1.0, 0.8, false)?),
        ("ising10", transverse_field_ising(10, 1.0, 0.6, false)?),
        ("hubbard4", ionic_hubbard_chain(2, 1.0, 4.0, 2.0, 6.0)?),
        ("hubbard6", ionic_hubbard_chain(3, 1.0, 4.0, 2.0, 6.0)?),
        ("hubbard8", ionic_hubbard_chain(4, 1.0, 4.0, 2.0, 6.0)?),
        ("xxz6", xxz_chain(6, 1.0, 1.5)?),
    ];
    for (name, h) in systems {
        let path = format!("{dir}/{name}.ham");
        std::fs::write(&path, h.to_text())?;
        println!("{path}: {} qubits, {} terms", h.n_qubits(), h.len());
    }
    Ok(())
}
