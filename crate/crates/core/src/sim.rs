//! Dense statevector simulation: Pauli rotations, first-order Trotter
//! evolution, Hadamard-test expectation series and basis sampling.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::ham::{PauliHamiltonian, PauliString, MAX_DENSE_QUBITS};

/// Largest Trotter slice used when the caller does not pick a step count.
pub const DEFAULT_TROTTER_DT: f64 = 0.05;

/// Largest register the simulator accepts.
pub const MAX_SIM_QUBITS: usize = 20;

/// Outcome counts keyed by basis index.
pub type Counts = BTreeMap<usize, u64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_sim(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Invalid(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wrap amplitudes, normalising them. Fails on a zero vector or a
    /// length that is not a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Shape(format!("statevector length {dim} is not 2^n")));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Invalid("cannot normalise a zero statevector".into()));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_sim(n_qubits)?;
        Ok(Self {
            n_qubits,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn expectation(&self, h: &PauliHamiltonian) -> f64 {
        h.expectation(&self.amps)
    }

    /// In-place `exp(−i·angle·P)`, i.e. `cos(angle)·I − i·sin(angle)·P`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, angle: f64) {
        let act = p.action();
        let (s, c) = angle.sin_cos();
        let minus_i_sin = Complex64::new(0.0, -s);
        if act.is_diagonal() {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= c + minus_i_sin * act.phase(b);
            }
            return;
        }
        let x = act.x_mask;
        for b in 0..self.amps.len() {
            let partner = b ^ x;
            if partner < b {
                continue;
            }
            let (ab, ap) = (self.amps[b], self.amps[partner]);
            // (P a)[b] = phase(partner) · a[partner]
            self.amps[b] = ab * c + minus_i_sin * act.phase(partner) * ap;
            self.amps[partner] = ap * c + minus_i_sin * act.phase(b) * ab;
        }
    }

    /// First-order Trotter product `[Π_j exp(−i c_j (t/n) P_j)]^n`, terms in
    /// the Hamiltonian's stored order.
    pub fn trotter_evolve(&mut self, h: &PauliHamiltonian, t: f64, n_steps: usize) {
        let n_steps = n_steps.max(1);
        let dt = t / n_steps as f64;
        let prepared: Vec<_> = h.terms().iter().filter(|(_, p)| !p.is_identity()).collect();
        // Identity terms contribute a global phase exp(−i c t).
        let phase_shift: f64 = h
            .terms()
            .iter()
            .filter(|(_, p)| p.is_identity())
            .map(|(c, _)| c)
            .sum();
        for _ in 0..n_steps {
            for (c, p) in &prepared {
                self.apply_pauli_rotation(p, c * dt);
            }
        }
        if phase_shift != 0.0 {
            let g = Complex64::from_polar(1.0, -phase_shift * t);
            for a in &mut self.amps {
                *a *= g;
            }
        }
    }
}

/// Step count keeping each slice at most [`DEFAULT_TROTTER_DT`].
pub fn default_trotter_steps(t: f64) -> usize {
    ((t.abs() / DEFAULT_TROTTER_DT).ceil() as usize).max(1)
}

fn check_sim(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_SIM_QUBITS {
        return Err(Error::Capacity {
            what: "statevector",
            requested: n_qubits,
            limit: MAX_SIM_QUBITS,
        });
    }
    Ok(())
}

/// Global measurement-shot allowance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotBudget {
    cap: u64,
    used: u64,
}

impl ShotBudget {
    /// Contest-scale cap of 10^7 shots per solve.
    pub const DEFAULT_CAP: u64 = 10_000_000;

    pub fn new(cap: u64) -> Self {
        Self { cap, used: 0 }
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.cap - self.used
    }

    /// Reserve `shots`, or fail without touching the counter.
    pub fn charge(&mut self, shots: u64) -> Result<()> {
        if shots > self.remaining() {
            return Err(Error::Budget {
                requested: shots,
                remaining: self.remaining(),
                cap: self.cap,
            });
        }
        self.used += shots;
        Ok(())
    }
}

impl Default for ShotBudget {
    fn default() -> Self {
        Self::new(Self::DEFAULT_CAP)
    }
}

/// Basis state minimising `⟨x|H|x⟩`, lowest index on ties.
pub fn hartree_fock_reference(h: &PauliHamiltonian) -> Result<Statevector> {
    Statevector::basis(h.n_qubits(), hartree_fock_index(h)?)
}

pub fn hartree_fock_index(h: &PauliHamiltonian) -> Result<usize> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::Capacity {
            what: "Hartree-Fock search",
            requested: h.n_qubits(),
            limit: MAX_DENSE_QUBITS,
        });
    }
    let diag = h.diagonal_entries();
    let mut best = 0;
    for (i, d) in diag.iter().enumerate() {
        if *d < diag[best] {
            best = i;
        }
    }
    Ok(best)
}

/// How a solver obtains its quantum data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    /// Classical mode: exact expectation values and probabilities.
    Exact,
    /// Quantum mode: shot-sampled estimates charged to the budget.
    Sampled,
}

/// How `Z_n` values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    /// Read `⟨ψ₀|U(t)|ψ₀⟩` off the statevector.
    Exact,
    /// Simulated Hadamard tests with this many shots per branch and point.
    Sampled { shots_per_point: u64 },
}

/// `Z_n ≈ ⟨ψ₀|U(n·Δt)|ψ₀⟩` for `n = 0..n_z`, with `U` the first-order
/// Trotterisation of `h`. `Z_0` is fixed to 1.
///
/// Each point evolves the previous state by one `delta_t` segment of
/// `trotter_steps` slices. In sampled mode the real part comes from the
/// plain Hadamard test and the imaginary part from the phase-corrected one,
/// each a binomial draw with `Pr(0) = (1 + part)/2`; the full cost
/// `2 · shots_per_point · (n_z − 1)` is charged before any sampling.
pub fn expectation_series(
    reference: &Statevector,
    h: &PauliHamiltonian,
    delta_t: f64,
    n_z: usize,
    trotter_steps: usize,
    mode: SeriesMode,
    budget: &mut ShotBudget,
    rng_seed: u64,
) -> Result<Vec<Complex64>> {
    if n_z < 2 {
        return Err(Error::Invalid(format!("n_Z must be at least 2, got {n_z}")));
    }
    if h.n_qubits() != reference.n_qubits() {
        return Err(Error::Shape(format!(
            "Hamiltonian has {} qubits, reference state {}",
            h.n_qubits(),
            reference.n_qubits()
        )));
    }
    if let SeriesMode::Sampled { shots_per_point } = mode {
        let total = 2 * shots_per_point * (n_z as u64 - 1);
        budget.charge(total)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut zs = Vec::with_capacity(n_z);
    zs.push(Complex64::new(1.0, 0.0));
    let mut state = reference.clone();
    for _ in 1..n_z {
        state.trotter_evolve(h, delta_t, trotter_steps);
        let exact = reference.inner(&state);
        let z = match mode {
            SeriesMode::Exact => exact,
            SeriesMode::Sampled { shots_per_point } => Complex64::new(
                hadamard_branch(exact.re, shots_per_point, &mut rng),
                hadamard_branch(exact.im, shots_per_point, &mut rng),
            ),
        };
        zs.push(z);
    }
    Ok(zs)
}

fn hadamard_branch(part: f64, shots: u64, rng: &mut ChaCha8Rng) -> f64 {
    if shots == 0 {
        return part;
    }
    let p0 = ((1.0 + part) / 2.0).clamp(0.0, 1.0);
    let zeros = Binomial::new(shots, p0)
        .expect("probability clamped to [0, 1]")
        .sample(rng);
    2.0 * zeros as f64 / shots as f64 - 1.0
}

/// Draw `shots` basis outcomes with probabilities `|a_i|²`.
///
/// Uses sequential conditional binomials, so the result is a multinomial
/// sample that is reproducible for a fixed seed.
pub fn sample_bitstrings(
    state: &Statevector,
    shots: u64,
    budget: &mut ShotBudget,
    rng_seed: u64,
) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::Invalid("shots must be positive".into()));
    }
    budget.charge(shots)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    let mut remaining_shots = shots;
    let mut remaining_prob = total;
    let mut counts = Counts::new();
    for (i, p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if *p <= 0.0 {
            continue;
        }
        let frac = if remaining_prob > 0.0 {
            (p / remaining_prob).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let k = if frac >= 1.0 {
            remaining_shots
        } else {
            Binomial::new(remaining_shots, frac)
                .expect("probability clamped to [0, 1]")
                .sample(&mut rng)
        };
        if k > 0 {
            counts.insert(i, k);
        }
        remaining_shots -= k;
        remaining_prob -= p;
    }
    // Rounding can leave a few shots unassigned; give them to the mode.
    if remaining_shots > 0 {
        let top = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        *counts.entry(top).or_insert(0) += remaining_shots;
    }
    Ok(counts)
}

/// Render a basis index as a bitstring, qubit `n−1` first.
pub fn format_bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}
