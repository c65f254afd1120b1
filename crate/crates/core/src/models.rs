//! Generators for the lattice Hamiltonians used in tests, benchmarks and
//! the bundled data set.

use rand::Rng;

use crate::error::Result;
use crate::ham::{PauliHamiltonian, PauliOp, PauliString};

/// `−J Σ Z_i Z_{i+1} − g Σ X_i` on an open (or periodic) chain.
pub fn transverse_field_ising(
    n: usize,
    coupling: f64,
    field: f64,
    periodic: bool,
) -> Result<PauliHamiltonian> {
    let mut terms = Vec::new();
    let bonds = if periodic && n > 2 { n } else { n - 1 };
    for i in 0..bonds {
        let j = (i + 1) % n;
        terms.push((
            -coupling,
            PauliString::from_ops([(i, PauliOp::Z), (j, PauliOp::Z)]),
        ));
    }
    for i in 0..n {
        terms.push((-field, PauliString::single(i, PauliOp::X)));
    }
    PauliHamiltonian::new(n, terms)
}

/// `J Σ (X_i X_{i+1} + Y_i Y_{i+1} + Δ Z_i Z_{i+1})` on an open chain.
pub fn xxz_chain(n: usize, coupling: f64, anisotropy: f64) -> Result<PauliHamiltonian> {
    let mut terms = Vec::new();
    for i in 0..n - 1 {
        for (op, w) in [
            (PauliOp::X, 1.0),
            (PauliOp::Y, 1.0),
            (PauliOp::Z, anisotropy),
        ] {
            terms.push((coupling * w, PauliString::from_ops([(i, op), (i + 1, op)])));
        }
    }
    PauliHamiltonian::new(n, terms)
}

/// Jordan–Wigner encoded Fermi–Hubbard chain with `sites` sites
/// (`2·sites` qubits, qubit `2i` = site i spin up, `2i+1` = spin down):
///
///   H = −t Σ_{⟨ij⟩σ} (c†_iσ c_jσ + h.c.) + U Σ_i n_i↑ n_i↓ − μ Σ_iσ n_iσ
pub fn hubbard_chain(sites: usize, hopping: f64, onsite: f64, mu: f64) -> Result<PauliHamiltonian> {
    ionic_hubbard_chain(sites, hopping, onsite, mu, 0.0)
}

/// [`hubbard_chain`] plus a staggered on-site potential
/// `− (Δ/2) Σ_iσ (−1)^i n_iσ`, which makes the doubly-occupied even-site
/// configuration a good reference state when `Δ` dominates `t`.
pub fn ionic_hubbard_chain(
    sites: usize,
    hopping: f64,
    onsite: f64,
    mu: f64,
    stagger: f64,
) -> Result<PauliHamiltonian> {
    let n = 2 * sites;
    let mut terms = Vec::new();
    for i in 0..sites.saturating_sub(1) {
        for spin in 0..2 {
            let p = 2 * i + spin;
            let q = 2 * (i + 1) + spin;
            // c†_p c_q + h.c. = ½ (X_p Z… X_q + Y_p Z… Y_q)
            for op in [PauliOp::X, PauliOp::Y] {
                let ops = std::iter::once((p, op))
                    .chain((p + 1..q).map(|k| (k, PauliOp::Z)))
                    .chain(std::iter::once((q, op)));
                terms.push((-hopping / 2.0, PauliString::from_ops(ops)));
            }
        }
    }
    for i in 0..sites {
        let (up, down) = (2 * i, 2 * i + 1);
        // n_a n_b = ¼ (1 − Z_a − Z_b + Z_a Z_b)
        terms.push((onsite / 4.0, PauliString::identity()));
        terms.push((-onsite / 4.0, PauliString::single(up, PauliOp::Z)));
        terms.push((-onsite / 4.0, PauliString::single(down, PauliOp::Z)));
        terms.push((
            onsite / 4.0,
            PauliString::from_ops([(up, PauliOp::Z), (down, PauliOp::Z)]),
        ));
    }
    for q in 0..n {
        // n = ½ (1 − Z)
        let site = q / 2;
        let sign = if site % 2 == 0 { 1.0 } else { -1.0 };
        let eps = -mu - sign * stagger / 2.0;
        terms.push((eps / 2.0, PauliString::identity()));
        terms.push((-eps / 2.0, PauliString::single(q, PauliOp::Z)));
    }
    PauliHamiltonian::new(n, terms)
}

/// Random Hamiltonian of `n_terms` Pauli strings with Gaussian-ish
/// coefficients; every string has weight between 1 and `max_weight`.
pub fn random_hamiltonian<R: Rng>(
    n: usize,
    n_terms: usize,
    max_weight: usize,
    rng: &mut R,
) -> Result<PauliHamiltonian> {
    let ops = [PauliOp::X, PauliOp::Y, PauliOp::Z];
    let terms = (0..n_terms).map(|_| {
        let weight = rng.random_range(1..=max_weight.min(n));
        let mut qubits: Vec<usize> = (0..n).collect();
        for i in 0..weight {
            let j = rng.random_range(i..n);
            qubits.swap(i, j);
        }
        let string = PauliString::from_ops(
            qubits[..weight]
                .iter()
                .map(|&q| (q, ops[rng.random_range(0..3)])),
        );
        let coeff: f64 = rng.random_range(-1.0..1.0);
        (coeff, string)
    });
    PauliHamiltonian::new(n, terms.collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_term_counts() {
        let h = transverse_field_ising(4, 1.0, 0.5, false).unwrap();
        assert_eq!(h.len(), 3 + 4);
        let h = transverse_field_ising(4, 1.0, 0.5, true).unwrap();
        assert_eq!(h.len(), 4 + 4);
    }

    #[test]
    fn single_site_hubbard_spectrum() {
        // One site: states |00⟩, |01⟩, |10⟩, |11⟩ have energies 0, −μ, −μ, U − 2μ.
        let h = hubbard_chain(1, 1.0, 4.0, 1.0).unwrap();
        let diag = h.diagonal_entries();
        let expect = [0.0, -1.0, -1.0, 2.0];
        for (d, e) in diag.iter().zip(expect) {
            assert!((d - e).abs() < 1e-12, "{diag:?}");
        }
    }

    #[test]
    fn hubbard_two_sites_is_hermitian_and_particle_conserving() {
        let h = hubbard_chain(2, 1.0, 4.0, 2.0).unwrap();
        let m = h.to_dense_matrix().unwrap();
        for i in 0..16 {
            for j in 0..16 {
                assert!((m[(i, j)] - m[(j, i)].conj()).norm() < 1e-12);
                if m[(i, j)].norm() > 1e-12 {
                    assert_eq!((i as u32).count_ones(), (j as u32).count_ones());
                }
            }
        }
    }
}
