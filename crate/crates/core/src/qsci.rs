//! Simplified ADAPT-QSCI.
//!
//! Each iteration samples the current ansatz state, keeps the most frequent
//! configurations as a subspace, diagonalises `H` there and grows the
//! ansatz by the pool operator with the largest energy gradient
//!
//!   h_j = ⟨c|i[H, P_j]|c⟩
//!
//! appended as `exp(−iθ P_j)` with θ chosen to minimise the energy.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::{
    lowest_eigenpair, EnergyEstimate, PauliHamiltonian, PauliOp, PauliString, MAX_DENSE_QUBITS,
};
use crate::optim::golden_section;
use crate::sim::{
    hartree_fock_index, sample_bitstrings, Counts, ExecutionMode, ShotBudget, Statevector,
};

/// Largest subspace handed to the dense eigensolver.
pub const MAX_SUBSPACE_DIM: usize = 4096;

const ANGLE_EVALS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptQsciHyperparams {
    pub num_pickup: usize,
    pub coeff_cutoff: f64,
    pub self_selection: bool,
    pub iter_max: u64,
    pub sampling_shots: u64,
    pub atol: f64,
    pub final_sampling_shots_coeff: u64,
    pub num_precise_gradient: usize,
    pub max_num_converged: usize,
    pub reset_ignored_inx_mode: usize,
}

impl Default for AdaptQsciHyperparams {
    fn default() -> Self {
        Self {
            num_pickup: 100,
            coeff_cutoff: 1e-3,
            self_selection: false,
            iter_max: 100,
            sampling_shots: 100_000,
            atol: 1e-6,
            final_sampling_shots_coeff: 5,
            num_precise_gradient: 128,
            max_num_converged: 2,
            reset_ignored_inx_mode: 0,
        }
    }
}

impl AdaptQsciHyperparams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_pickup", self.num_pickup as u64),
            ("iter_max", self.iter_max),
            ("sampling_shots", self.sampling_shots),
            (
                "final_sampling_shots_coeff",
                self.final_sampling_shots_coeff,
            ),
            ("num_precise_gradient", self.num_precise_gradient as u64),
            ("max_num_converged", self.max_num_converged as u64),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Invalid(format!("{name} must be positive")));
            }
        }
        if !(self.coeff_cutoff >= 0.0 && self.coeff_cutoff.is_finite()) {
            return Err(Error::Invalid(format!(
                "coeff_cutoff must be >= 0, got {}",
                self.coeff_cutoff
            )));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(Error::Invalid(format!(
                "atol must be > 0, got {}",
                self.atol
            )));
        }
        Ok(())
    }

    /// Iteration cap after fitting `sampling_shots` per iteration into the
    /// budget cap.
    pub fn effective_iter_max(&self, cap: u64) -> u64 {
        self.iter_max.min(cap / self.sampling_shots.max(1))
    }
}

/// Selected configurations, in selection order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    basis: Vec<usize>,
}

impl Subspace {
    pub fn new(basis: Vec<usize>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Invalid("empty subspace".into()));
        }
        let distinct: BTreeSet<_> = basis.iter().collect();
        if distinct.len() != basis.len() {
            return Err(Error::Invalid(
                "subspace basis has repeated configurations".into(),
            ));
        }
        Ok(Self { basis })
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Place subspace coefficients into a full register.
    pub fn embed(&self, coeffs: &[Complex64], n_qubits: usize) -> Result<Statevector> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        for (&b, &c) in self.basis.iter().zip(coeffs) {
            amps[b] = c;
        }
        Statevector::from_amplitudes(amps)
    }
}

/// Reference basis state plus the gates `exp(−iθ P)` applied in order.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzState {
    pub reference: usize,
    pub gates: Vec<(PauliString, f64)>,
}

impl AnsatzState {
    pub fn prepare(&self, n_qubits: usize) -> Result<Statevector> {
        let mut psi = Statevector::basis(n_qubits, self.reference)?;
        for (p, theta) in &self.gates {
            psi.apply_pauli_rotation(p, *theta);
        }
        Ok(psi)
    }
}

/// Single `Y_i` plus `X_iY_j`, `Y_iX_j`, `Y_iZ_j`, `Z_iY_j` for every pair
/// `i < j`: `2n² − n` strings, each with an odd number of Y factors so it
/// generates a real rotation.
pub fn build_operator_pool(n_qubits: usize) -> Vec<PauliString> {
    use PauliOp::{X, Y, Z};
    let mut pool: Vec<PauliString> = (0..n_qubits).map(|i| PauliString::single(i, Y)).collect();
    for i in 0..n_qubits {
        for j in i + 1..n_qubits {
            for (a, b) in [(X, Y), (Y, X), (Y, Z), (Z, Y)] {
                pool.push(PauliString::from_ops([(i, a), (j, b)]));
            }
        }
    }
    pool
}

/// Distinct configurations by descending count (ascending index on ties),
/// truncated to `r_cap`.
pub fn select_subspace(samples: &Counts, r_cap: usize) -> Result<Subspace> {
    rank_configurations(samples.iter().map(|(&b, &k)| (b, k as f64)), r_cap)
}

/// Same ranking as [`select_subspace`] but over exact probabilities.
pub fn select_subspace_exact(probabilities: &[f64], r_cap: usize) -> Result<Subspace> {
    rank_configurations(
        probabilities
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(b, &p)| (b, p)),
        r_cap,
    )
}

fn rank_configurations(
    weights: impl Iterator<Item = (usize, f64)>,
    r_cap: usize,
) -> Result<Subspace> {
    let mut ranked: Vec<(usize, f64)> = weights.collect();
    if ranked.is_empty() {
        return Err(Error::Invalid("no samples to select from".into()));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(r_cap.max(1));
    Subspace::new(ranked.into_iter().map(|(b, _)| b).collect())
}

/// Lowest eigenpair of `M_lm = ⟨r_l|H|r_m⟩`.
pub fn diagonalize_subspace(h: &PauliHamiltonian, s: &Subspace) -> Result<(f64, Vec<Complex64>)> {
    let r = s.dim();
    if r > MAX_SUBSPACE_DIM {
        return Err(Error::Capacity {
            what: "subspace dimension",
            requested: r,
            limit: MAX_SUBSPACE_DIM,
        });
    }
    let position: HashMap<usize, usize> =
        s.basis.iter().enumerate().map(|(l, &b)| (b, l)).collect();
    let mut m = DMatrix::<Complex64>::zeros(r, r);
    for (coeff, p) in h.terms() {
        let act = p.action();
        for (col, &b) in s.basis.iter().enumerate() {
            if let Some(&row) = position.get(&(b ^ act.x_mask)) {
                m[(row, col)] += act.phase(b) * *coeff;
            }
        }
    }
    Ok(lowest_eigenpair(m))
}

/// `h_j = ⟨c|i[H, P_j]|c⟩ = −2·Im⟨Hc|P_j c⟩` for every pool element.
pub fn pool_gradients(h: &PauliHamiltonian, pool: &[PauliString], state: &Statevector) -> Vec<f64> {
    let psi = state.amplitudes();
    let h_psi = h.apply(psi);
    pool.iter()
        .map(|p| {
            let act = p.action();
            let w: Complex64 = psi
                .iter()
                .enumerate()
                .map(|(b, a)| h_psi[b ^ act.x_mask].conj() * act.phase(b) * a)
                .sum();
            -2.0 * w.im
        })
        .collect()
}

/// One loop iteration as recorded in [`AdaptQsciOutcome::history`].
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub energy: f64,
    pub best: f64,
    pub subspace_dim: usize,
    /// Pool index appended this iteration, if any.
    pub operator: Option<usize>,
    pub angle: f64,
    /// Energy from the refined re-sample, when one was taken.
    pub refined_energy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AdaptQsciOutcome {
    pub estimate: EnergyEstimate,
    pub history: Vec<IterationRecord>,
    pub ansatz: AnsatzState,
}

/// Outcome of one sampling round.
enum Sample {
    Ok(Subspace),
    OutOfBudget,
}

struct Sampler<'a> {
    mode: ExecutionMode,
    budget: &'a mut ShotBudget,
    rng: ChaCha8Rng,
    r_cap: usize,
}

impl Sampler<'_> {
    fn subspace(&mut self, psi: &Statevector, shots: u64) -> Result<Sample> {
        match self.mode {
            ExecutionMode::Exact => Ok(Sample::Ok(select_subspace_exact(
                &psi.probabilities(),
                self.r_cap,
            )?)),
            ExecutionMode::Sampled => {
                let seed = self.rng.random();
                match sample_bitstrings(psi, shots, self.budget, seed) {
                    Ok(counts) => Ok(Sample::Ok(select_subspace(&counts, self.r_cap)?)),
                    Err(Error::Budget { .. }) => Ok(Sample::OutOfBudget),
                    Err(e) => Err(e),
                }
            }
        }
    }
}

/// Run the adaptive loop and return the lowest subspace energy seen.
///
/// In exact mode configurations are ranked by their exact probabilities and
/// no shots are charged, but the iteration cap still follows
/// [`AdaptQsciHyperparams::effective_iter_max`].
pub fn adapt_qsci_solve(
    h: &PauliHamiltonian,
    hp: &AdaptQsciHyperparams,
    budget: &mut ShotBudget,
    mode: ExecutionMode,
    rng_seed: u64,
) -> Result<AdaptQsciOutcome> {
    hp.validate()?;
    let n = h.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Capacity {
            what: "ADAPT-QSCI",
            requested: n,
            limit: MAX_DENSE_QUBITS,
        });
    }
    let start = Instant::now();
    let used_before = budget.used();
    let hc = h.compress(hp.coeff_cutoff, Some(hp.num_pickup.saturating_mul(10)));
    let pool = build_operator_pool(n);
    let mut ansatz = AnsatzState {
        reference: hartree_fock_index(&hc)?,
        gates: Vec::new(),
    };
    let mut psi = ansatz.prepare(n)?;
    // The shot-derived cap applies in exact mode too, so sampling_shots keeps
    // its effect on classical runs.
    let iter_cap = hp.effective_iter_max(budget.cap());
    let mut sampler = Sampler {
        mode,
        budget,
        rng: ChaCha8Rng::seed_from_u64(rng_seed),
        r_cap: hp.num_pickup,
    };

    let mut history: Vec<IterationRecord> = Vec::new();
    let mut best = f64::INFINITY;
    let mut prev: Option<f64> = None;
    let mut converged_run = 0;
    let mut used_ops: BTreeSet<usize> = BTreeSet::new();
    let mut ignored: BTreeSet<usize> = BTreeSet::new();
    let mut truncated = false;

    for k in 1..=iter_cap {
        let subspace = match sampler.subspace(&psi, hp.sampling_shots)? {
            Sample::Ok(s) => s,
            Sample::OutOfBudget => {
                truncated = true;
                break;
            }
        };
        let (energy, coeffs) = diagonalize_subspace(&hc, &subspace)?;
        best = best.min(energy);
        let mut record = IterationRecord {
            energy,
            best,
            subspace_dim: subspace.dim(),
            operator: None,
            angle: 0.0,
            refined_energy: None,
        };

        if prev.is_some_and(|e| (energy - e).abs() < hp.atol) {
            converged_run += 1;
        } else {
            converged_run = 0;
        }
        prev = Some(energy);
        if converged_run >= hp.max_num_converged {
            history.push(record);
            break;
        }

        let grad_state = if hp.self_selection {
            subspace.embed(&coeffs, n)?
        } else {
            psi.clone()
        };
        let grads = pool_gradients(&hc, &pool, &grad_state);
        let Some(j) = pick_operator(&grads, &ignored, hp.num_precise_gradient) else {
            history.push(record);
            break;
        };
        if grads[j].abs() < hp.atol {
            // Stationary with respect to every candidate.
            history.push(record);
            break;
        }

        let theta = optimal_angle(&hc, &psi, &pool[j]);
        let refine = used_ops.contains(&j) || theta.abs() < hp.atol;
        if refine && mode == ExecutionMode::Sampled {
            let shots = hp
                .sampling_shots
                .saturating_mul(hp.final_sampling_shots_coeff);
            match sampler.subspace(&psi, shots)? {
                Sample::Ok(s) => {
                    let (e, _) = diagonalize_subspace(&hc, &s)?;
                    best = best.min(e);
                    record.best = best;
                    record.refined_energy = Some(e);
                    prev = Some(e);
                }
                Sample::OutOfBudget => {
                    history.push(record);
                    truncated = true;
                    break;
                }
            }
        }

        psi.apply_pauli_rotation(&pool[j], theta);
        ansatz.gates.push((pool[j].clone(), theta));
        used_ops.insert(j);
        ignored.insert(j);
        if hp.reset_ignored_inx_mode > 0 && k % hp.reset_ignored_inx_mode as u64 == 0 {
            ignored.clear();
        }
        record.operator = Some(j);
        record.angle = theta;
        history.push(record);
    }

    if history.is_empty() {
        // Not even one sample fitted in the budget.
        best = hc.diagonal(ansatz.reference);
        truncated = true;
    }
    if truncated {
        log::warn!(
            "ADAPT-QSCI stopped on the shot budget after {} iterations",
            history.len()
        );
    }
    Ok(AdaptQsciOutcome {
        estimate: EnergyEstimate {
            value: best,
            shots_used: sampler.budget.used() - used_before,
            iterations: history.len(),
            wall_time_s: start.elapsed().as_secs_f64(),
            degenerate: false,
            truncated,
        },
        history,
        ansatz,
    })
}

/// Largest-|h_j| operator among the `limit` strongest that are not ignored.
fn pick_operator(grads: &[f64], ignored: &BTreeSet<usize>, limit: usize) -> Option<usize> {
    let mut order: Vec<usize> = (0..grads.len()).collect();
    order.sort_by(|&a, &b| grads[b].abs().total_cmp(&grads[a].abs()).then(a.cmp(&b)));
    order.into_iter().take(limit).find(|j| !ignored.contains(j))
}

/// Angle in `(−π/2, π/2]` minimising `⟨ψ|e^{iθP} H e^{−iθP}|ψ⟩`, or 0 if the
/// search finds nothing below the current energy.
fn optimal_angle(h: &PauliHamiltonian, psi: &Statevector, p: &PauliString) -> f64 {
    let energy_at = |theta: f64| {
        let mut trial = psi.clone();
        trial.apply_pauli_rotation(p, theta);
        trial.expectation(h)
    };
    let e0 = psi.expectation(h);
    let (theta, e) = golden_section(energy_at, -PI, PI, 1e-10, ANGLE_EVALS);
    if e >= e0 {
        return 0.0;
    }
    // exp(−i(θ ± π)P) = −exp(−iθP): shift into the principal window.
    let mut t = theta;
    while t <= -FRAC_PI_2 {
        t += PI;
    }
    while t > FRAC_PI_2 {
        t -= PI;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ham::parse_hamiltonian;
    use crate::models::transverse_field_ising;

    #[test]
    fn pool_size_and_uniqueness() {
        for n in 2..7 {
            let pool = build_operator_pool(n);
            assert_eq!(pool.len(), 2 * n * n - n);
            let distinct: BTreeSet<_> = pool.iter().collect();
            assert_eq!(distinct.len(), pool.len());
        }
        let pool = build_operator_pool(2);
        for s in ["Y0", "Y1", "X0 Y1", "Y0 X1"] {
            assert!(pool.iter().any(|p| p.to_string() == s), "{s}");
        }
    }

    #[test]
    fn selection_order_and_ties() {
        let s = select_subspace(&Counts::from([(3, 90), (1, 10)]), 1).unwrap();
        assert_eq!(s.basis(), &[3]);
        let s = select_subspace(&Counts::from([(6, 50), (2, 50)]), 2).unwrap();
        assert_eq!(s.basis(), &[2, 6]);
        assert!(select_subspace(&Counts::new(), 2).is_err());
    }

    #[test]
    fn one_dimensional_subspace_is_diagonal_element() {
        let h = transverse_field_ising(3, 1.0, 0.7, false).unwrap();
        let s = Subspace::new(vec![5]).unwrap();
        let (e, _) = diagonalize_subspace(&h, &s).unwrap();
        assert!((e - h.diagonal(5)).abs() < 1e-12);
    }

    #[test]
    fn full_subspace_matches_dense() {
        let h = transverse_field_ising(4, 1.0, 0.9, true).unwrap();
        let s = Subspace::new((0..16).collect()).unwrap();
        let (e, _) = diagonalize_subspace(&h, &s).unwrap();
        let exact = h.exact_ground_state().unwrap().energy;
        assert!((e - exact).abs() < 1e-9);
    }

    #[test]
    fn gradient_of_z_under_y() {
        let h = parse_hamiltonian("qubits 1\n1.0 Z0").unwrap();
        let pool = [PauliString::single(0, PauliOp::Y)];
        let zero = Statevector::basis(1, 0).unwrap();
        assert!(pool_gradients(&h, &pool, &zero)[0].abs() < 1e-12);
        let plus = Statevector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        assert!((pool_gradients(&h, &pool, &plus)[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn effective_iterations_follow_cap() {
        let hp = AdaptQsciHyperparams {
            sampling_shots: 1_000_000,
            ..Default::default()
        };
        assert_eq!(hp.effective_iter_max(10_000_000), 10);
    }

    #[test]
    fn ground_reference_converges_immediately() {
        let h = parse_hamiltonian("qubits 2\n-1.0 Z0 Z1").unwrap();
        let mut budget = ShotBudget::default();
        let out = adapt_qsci_solve(
            &h,
            &Default::default(),
            &mut budget,
            ExecutionMode::Sampled,
            1,
        )
        .unwrap();
        assert_eq!(out.estimate.value, -1.0);
        assert!(out.estimate.iterations <= 2);
    }

    #[test]
    fn replay_reproduces_state_and_is_deterministic() {
        let h = transverse_field_ising(4, 1.0, 1.0, false).unwrap();
        let hp = AdaptQsciHyperparams {
            sampling_shots: 2000,
            iter_max: 6,
            ..Default::default()
        };
        let run = |seed| {
            let mut budget = ShotBudget::new(1_000_000);
            adapt_qsci_solve(&h, &hp, &mut budget, ExecutionMode::Sampled, seed).unwrap()
        };
        let (a, b) = (run(3), run(3));
        assert_eq!(a.estimate.value, b.estimate.value);
        assert_eq!(a.history, b.history);
        assert!(a.estimate.shots_used <= 1_000_000);
        for w in a.history.windows(2) {
            assert!(w[1].best <= w[0].best);
        }
    }

    #[test]
    fn truncates_when_budget_runs_out() {
        let h = transverse_field_ising(3, 1.0, 1.0, false).unwrap();
        let hp = AdaptQsciHyperparams {
            sampling_shots: 400,
            atol: 1e-12,
            ..Default::default()
        };
        let mut budget = ShotBudget::new(1000);
        let out = adapt_qsci_solve(&h, &hp, &mut budget, ExecutionMode::Sampled, 9).unwrap();
        assert!(out.estimate.shots_used <= 1000);
        assert!(out.history.len() <= 2);
    }
}
