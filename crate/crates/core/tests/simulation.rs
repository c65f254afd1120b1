//! Hamiltonian and simulator properties checked against dense oracles built
//! here from Kronecker products.

use accelerq::ham::parse_hamiltonian;
use accelerq::models::random_hamiltonian;
use accelerq::qcels::{qcels_solve, QcelsHyperparams};
use accelerq::qsci::{adapt_qsci_solve, build_operator_pool, AdaptQsciHyperparams};
use accelerq::{ExecutionMode, PauliHamiltonian, PauliOp, ShotBudget, Statevector};
use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kron_dense(h: &PauliHamiltonian) -> DMatrix<Complex64> {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let (o, l, i) = (
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
    );
    let mut m = DMatrix::from_element(dim, dim, o);
    for (c, p) in h.terms() {
        let mut term = DMatrix::from_element(1, 1, Complex64::new(*c, 0.0));
        for q in (0..n).rev() {
            let s = match p.get(q) {
                None => [l, o, o, l],
                Some(PauliOp::X) => [o, l, l, o],
                Some(PauliOp::Y) => [o, -i, i, o],
                Some(PauliOp::Z) => [l, o, o, -l],
            };
            term = term.kronecker(&DMatrix::from_row_slice(2, 2, &s));
        }
        m += term;
    }
    m
}

/// `exp(−iHt)` by scaling and squaring a Taylor series.
fn expm_minus_i(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let a = h * Complex64::new(0.0, -t);
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = norm.log2().ceil().max(0.0) as i32 + 1;
    let a = a / Complex64::new(2f64.powi(squarings), 0.0);
    let dim = h.nrows();
    let mut result = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..30 {
        term = &term * &a / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Statevector {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Statevector::from_amplitudes(amps).unwrap()
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn text_round_trip(seed in any::<u64>(), n in 1usize..8, terms in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hamiltonian(n, terms, 4, &mut rng).unwrap();
        let back = parse_hamiltonian(&h.to_text()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn compress_is_idempotent(seed in any::<u64>(), cutoff in 0.0f64..0.8, keep in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hamiltonian(5, 25, 3, &mut rng).unwrap();
        let once = h.compress(cutoff, Some(keep));
        prop_assert!(once.len() <= keep);
        prop_assert!(once.terms().iter().all(|(c, _)| c.abs() > cutoff));
        prop_assert_eq!(once.compress(cutoff, Some(keep)), once.clone());
    }

    #[test]
    fn evolution_preserves_norm(seed in any::<u64>(), t in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=6);
        let h = random_hamiltonian(n, 12, 3, &mut rng).unwrap();
        let mut psi = random_state(n, &mut rng);
        for p in build_operator_pool(n).iter().take(5) {
            psi.apply_pauli_rotation(p, t);
        }
        psi.trotter_evolve(&h, t, 7);
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_matches_dense(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=5);
        let h = random_hamiltonian(n, 10, 3, &mut rng).unwrap();
        let psi = random_state(n, &mut rng);
        let v = DMatrix::from_column_slice(1 << n, 1, psi.amplitudes());
        let dense = (v.adjoint() * kron_dense(&h) * &v)[(0, 0)];
        prop_assert!((psi.expectation(&h) - dense.re).abs() < 1e-12);
        prop_assert!(dense.im.abs() < 1e-12);
    }

    #[test]
    fn rotation_matches_dense_exponential(seed in any::<u64>(), angle in -4.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=4);
        let pool = build_operator_pool(n);
        let p = pool[rng.random_range(0..pool.len())].clone();
        let mut psi = random_state(n, &mut rng);
        let expected = expm_minus_i(&kron_dense(&PauliHamiltonian::new(n, [(1.0, p.clone())]).unwrap()), angle)
            * DMatrix::from_column_slice(1 << n, 1, psi.amplitudes());
        psi.apply_pauli_rotation(&p, angle);
        prop_assert!(distance(psi.amplitudes(), expected.as_slice()) < 1e-12);
    }
}

#[test]
fn commuting_terms_trotterise_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = PauliHamiltonian::new(
        4,
        [
            (0.7, accelerq::PauliString::single(0, PauliOp::Z)),
            (
                -1.3,
                accelerq::PauliString::from_ops([(1, PauliOp::Z), (3, PauliOp::Z)]),
            ),
            (0.4, accelerq::PauliString::identity()),
        ],
    )
    .unwrap();
    let mut psi = random_state(4, &mut rng);
    let expected =
        expm_minus_i(&kron_dense(&h), 2.3) * DMatrix::from_column_slice(16, 1, psi.amplitudes());
    psi.trotter_evolve(&h, 2.3, 1);
    // The identity term only contributes a global phase.
    let overlap: Complex64 = expected
        .iter()
        .zip(psi.amplitudes())
        .map(|(e, a)| e.conj() * a)
        .sum();
    assert_abs_diff_eq!(overlap.norm(), 1.0, epsilon = 1e-12);
}

#[test]
fn trotter_error_shrinks_linearly_with_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = random_hamiltonian(3, 8, 3, &mut rng).unwrap();
    let psi0 = random_state(3, &mut rng);
    let t = 1.0;
    // Drop the global phase from identity terms by comparing up to phase.
    let exact =
        expm_minus_i(&kron_dense(&h), t) * DMatrix::from_column_slice(8, 1, psi0.amplitudes());
    let error = |steps: usize| {
        let mut psi = psi0.clone();
        psi.trotter_evolve(&h, t, steps);
        let overlap: Complex64 = exact
            .iter()
            .zip(psi.amplitudes())
            .map(|(e, a)| e.conj() * a)
            .sum();
        (1.0 - overlap.norm()).abs().sqrt()
    };
    let (e10, e40, e160) = (error(10), error(40), error(160));
    assert!(e40 < e10 && e160 < e40, "{e10} {e40} {e160}");
    // First order: four times the steps cuts the error about fourfold.
    let ratio = e40 / e160;
    assert!((3.0..5.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn ground_state_matches_dense_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 1..=6 {
        let h = random_hamiltonian(n, 3 * n, 3, &mut rng).unwrap();
        let gs = h.exact_ground_state().unwrap();
        let dense = kron_dense(&h);
        let lowest = dense
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(gs.energy, lowest, epsilon = 1e-9);
        // The returned vector is an eigenvector for that energy.
        let v = DMatrix::from_column_slice(1 << n, 1, &gs.vector);
        let residual = &dense * &v - &v * Complex64::new(gs.energy, 0.0);
        assert!(
            residual.norm() < 1e-8,
            "n = {n}: residual {}",
            residual.norm()
        );
    }
}

#[test]
fn adapt_exact_mode_is_variational_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for k in 0..6 {
        let n = 2 + k % 3;
        let h = random_hamiltonian(n, 10, 3, &mut rng).unwrap();
        let e0 = h.exact_ground_state().unwrap().energy;
        let hp = AdaptQsciHyperparams {
            coeff_cutoff: 0.0,
            ..Default::default()
        };
        let out = adapt_qsci_solve(
            &h,
            &hp,
            &mut ShotBudget::default(),
            ExecutionMode::Exact,
            k as u64,
        )
        .unwrap();
        assert!(out.history.iter().all(|r| r.energy >= e0 - 1e-9));
        assert!(out.estimate.value >= e0 - 1e-9);
        assert_eq!(out.estimate.shots_used, 0);
    }
}

#[test]
fn sampled_solvers_stay_within_the_shot_cap() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let h = random_hamiltonian(4, 12, 3, &mut rng).unwrap();
    for cap in [1_000u64, 123_457, 2_000_000] {
        let mut budget = ShotBudget::new(cap);
        let out = qcels_solve(
            &h,
            &QcelsHyperparams::default(),
            &mut budget,
            ExecutionMode::Sampled,
            1,
        )
        .unwrap();
        assert!(out.estimate.shots_used <= cap);
        assert_eq!(out.estimate.shots_used, budget.used());

        let mut budget = ShotBudget::new(cap);
        let hp = AdaptQsciHyperparams {
            sampling_shots: 1_000,
            ..Default::default()
        };
        let out = adapt_qsci_solve(&h, &hp, &mut budget, ExecutionMode::Sampled, 1).unwrap();
        assert!(out.estimate.shots_used <= cap);
        assert_eq!(out.estimate.shots_used, budget.used());
    }
}
