//! Quantum complex exponential least squares (QCELS).
//!
//! The solver collects `Z_n = ⟨ψ₀|e^{−iHt_n}|ψ₀⟩` from a Hartree–Fock
//! reference and fits a sum of complex exponentials in three stages:
//!
//! ```text
//! f¹(t) = r₁ e^{−iθ₁t} + 1 − r₁
//! f²(t) = r₁ e^{−iθ₁t} + r₂ e^{−iθ₂t} + 1 − r₁ − r₂
//! f³(t) = r₁ e^{−iθ₁t} + r₂ e^{−iθ₂t} + (1 − r₁ − r₂) e^{−iθ₃t}
//! ```
//!
//! Later stages are seeded from the earlier one and constrained so the
//! added terms only correct the first fit: `|θ_k| ≤ α·|θ₁¹|` for `k ≥ 2`,
//! `r₂ ≤ r₁¹`, every `r` in `[0, 1]` and `r₁ + r₂ ≤ 1`.
//!
//! For fixed frequencies the amplitudes enter linearly, so each stage
//! solves a small box-constrained least-squares problem exactly and only
//! searches over the frequencies.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::{EnergyEstimate, PauliHamiltonian, MAX_DENSE_QUBITS};
use crate::optim::{golden_section, NelderMead};
use crate::sim::{
    default_trotter_steps, expectation_series, hartree_fock_index, ExecutionMode, SeriesMode,
    ShotBudget, Statevector,
};

/// Grid starts per added frequency.
const RESTARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QcelsHyperparams {
    pub delta_t: f64,
    #[serde(rename = "n_Z")]
    pub n_z: usize,
    pub ham_terms: usize,
    pub ham_cutoff: f64,
    pub alpha: f64,
}

impl Default for QcelsHyperparams {
    fn default() -> Self {
        Self {
            delta_t: 0.03,
            n_z: 10,
            ham_terms: 200,
            ham_cutoff: 1e-9,
            alpha: 0.8,
        }
    }
}

impl QcelsHyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return Err(Error::Invalid(format!(
                "delta_t must be > 0, got {}",
                self.delta_t
            )));
        }
        if self.n_z < 2 {
            return Err(Error::Invalid(format!(
                "n_Z must be >= 2, got {}",
                self.n_z
            )));
        }
        if self.ham_terms == 0 {
            return Err(Error::Invalid("ham_terms must be positive".into()));
        }
        if !(self.ham_cutoff >= 0.0) {
            return Err(Error::Invalid("ham_cutoff must be >= 0".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Invalid(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// One stage of the sequential fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub stage: u8,
    /// `[r₁]`, `[r₁, r₂]` or `[r₁, r₂, 1 − r₁ − r₂]`.
    pub amplitudes: Vec<f64>,
    /// `θ₁..θ_stage`, in energy units.
    pub frequencies: Vec<f64>,
    /// `Σ_n |f(t_n) − Z_n|²`
    pub residual: f64,
    pub degenerate: bool,
}

impl FitResult {
    /// Evaluate the fitted model at time `t`.
    pub fn model(&self, t: f64) -> Complex64 {
        model_value(self.stage, &self.amplitudes, &self.frequencies, t)
    }

    pub fn energy(&self) -> f64 {
        self.frequencies[0]
    }
}

/// Result of the three-stage fit, keeping every stage for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialFit {
    pub stages: Vec<FitResult>,
}

impl SequentialFit {
    pub fn last(&self) -> &FitResult {
        self.stages.last().expect("at least one stage")
    }

    pub fn degenerate(&self) -> bool {
        self.stages[0].degenerate
    }
}

fn phasor(theta: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -theta * t)
}

fn model_value(stage: u8, r: &[f64], theta: &[f64], t: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    match stage {
        1 => phasor(theta[0], t) * r[0] + one * (1.0 - r[0]),
        2 => phasor(theta[0], t) * r[0] + phasor(theta[1], t) * r[1] + one * (1.0 - r[0] - r[1]),
        _ => {
            phasor(theta[0], t) * r[0]
                + phasor(theta[1], t) * r[1]
                + phasor(theta[2], t) * (1.0 - r[0] - r[1])
        }
    }
}

fn residual_of(stage: u8, r: &[f64], theta: &[f64], zs: &[Complex64], ts: &[f64]) -> f64 {
    zs.iter()
        .zip(ts)
        .map(|(z, &t)| (model_value(stage, r, theta, t) - z).norm_sqr())
        .sum()
}

fn check_series(zs: &[Complex64], ts: &[f64]) -> Result<f64> {
    if zs.len() != ts.len() || zs.len() < 2 {
        return Err(Error::Shape(format!(
            "need equal-length series of at least 2 points, got {} values and {} times",
            zs.len(),
            ts.len()
        )));
    }
    if ts[0] != 0.0 {
        return Err(Error::Invalid("the time series must start at t = 0".into()));
    }
    let dt = ts[1] - ts[0];
    if !(dt > 0.0) {
        return Err(Error::Invalid("time series must be increasing".into()));
    }
    Ok(PI / dt)
}

/// Best `r₁ ∈ [0, 1]` for a fixed `θ`.
fn stage1_amplitude(theta: f64, zs: &[Complex64], ts: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (z, &t) in zs.iter().zip(ts) {
        let a = phasor(theta, t) - 1.0;
        num += (a.conj() * (z - 1.0)).re;
        den += a.norm_sqr();
    }
    if den <= 0.0 {
        0.0
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

/// Single-frequency fit of `r₁ e^{−iθ₁t} + 1 − r₁`, θ₁ in the Nyquist
/// window `[−π/Δt, π/Δt]`.
pub fn fit_single(zs: &[Complex64], ts: &[f64]) -> Result<FitResult> {
    let nyquist = check_series(zs, ts)?;
    let spread = zs.iter().map(|z| (z - zs[0]).norm()).fold(0.0, f64::max);
    if spread < 1e-12 {
        return Ok(FitResult {
            stage: 1,
            amplitudes: vec![0.0],
            frequencies: vec![0.0],
            residual: residual_of(1, &[0.0], &[0.0], zs, ts),
            degenerate: true,
        });
    }
    let objective = |theta: f64| {
        let r = stage1_amplitude(theta, zs, ts);
        residual_of(1, &[r], &[theta], zs, ts)
    };

    let n_grid = (40 * zs.len()).max(400);
    let step = 2.0 * nyquist / n_grid as f64;
    let grid: Vec<f64> = (0..=n_grid).map(|i| -nyquist + i as f64 * step).collect();
    let values: Vec<f64> = grid.iter().map(|&th| objective(th)).collect();
    let mut minima: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
            let right = values.get(i + 1).copied().unwrap_or(f64::INFINITY);
            values[i] <= left && values[i] <= right
        })
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    minima.truncate(RESTARTS);

    let mut best = (grid[minima[0]], values[minima[0]]);
    for &i in &minima {
        let lo = (grid[i] - step).max(-nyquist);
        let hi = (grid[i] + step).min(nyquist);
        let cand = golden_section(objective, lo, hi, 1e-13, 400);
        if cand.1 < best.1 {
            best = cand;
        }
    }
    let theta = best.0;
    let r = stage1_amplitude(theta, zs, ts);
    Ok(FitResult {
        stage: 1,
        amplitudes: vec![r],
        frequencies: vec![theta],
        residual: residual_of(1, &[r], &[theta], zs, ts),
        degenerate: false,
    })
}

/// Minimise `‖b − r₁a₁ − r₂a₂‖²` over real `r` in the polygon
/// `r₁, r₂ ≥ 0`, `r₂ ≤ r2_max`, `r₁ + r₂ ≤ 1`.
fn two_amplitude_ls(a1: &[Complex64], a2: &[Complex64], b: &[Complex64], r2_max: f64) -> [f64; 2] {
    let dot = |x: &[Complex64], y: &[Complex64]| -> f64 {
        x.iter().zip(y).map(|(p, q)| (p.conj() * q).re).sum()
    };
    let g11 = dot(a1, a1);
    let g12 = dot(a1, a2);
    let g22 = dot(a2, a2);
    let h1 = dot(a1, b);
    let h2 = dot(a2, b);
    let objective = |r: [f64; 2]| {
        g11 * r[0] * r[0] + 2.0 * g12 * r[0] * r[1] + g22 * r[1] * r[1]
            - 2.0 * (h1 * r[0] + h2 * r[1])
    };
    let m = r2_max.clamp(0.0, 1.0);
    let feasible = |r: [f64; 2]| {
        let eps = 1e-15;
        r[0] >= -eps && r[1] >= -eps && r[1] <= m + eps && r[0] + r[1] <= 1.0 + eps
    };

    let mut best: Option<([f64; 2], f64)> = None;
    let mut consider = |r: [f64; 2]| {
        let v = objective(r);
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((r, v));
        }
    };

    let det = g11 * g22 - g12 * g12;
    if det > 1e-14 * (g11 * g22).max(1e-300) {
        let r = [(g22 * h1 - g12 * h2) / det, (g11 * h2 - g12 * h1) / det];
        if feasible(r) {
            consider(r);
        }
    }
    let vertices = [[0.0, 0.0], [1.0, 0.0], [1.0 - m, m], [0.0, m]];
    for k in 0..4 {
        let p = vertices[k];
        let q = vertices[(k + 1) % 4];
        let d = [q[0] - p[0], q[1] - p[1]];
        let gd = [g11 * d[0] + g12 * d[1], g12 * d[0] + g22 * d[1]];
        let curv = d[0] * gd[0] + d[1] * gd[1];
        let slope = p[0] * gd[0] + p[1] * gd[1] - (h1 * d[0] + h2 * d[1]);
        let s = if curv > 0.0 {
            (-slope / curv).clamp(0.0, 1.0)
        } else if slope < 0.0 {
            1.0
        } else {
            0.0
        };
        consider([p[0] + s * d[0], p[1] + s * d[1]]);
        consider(p);
    }
    best.expect("polygon has vertices").0
}

/// Amplitudes for stage 2 or 3 given frequencies.
fn stage_amplitudes(
    stage: u8,
    theta: &[f64],
    zs: &[Complex64],
    ts: &[f64],
    r2_max: f64,
) -> Vec<f64> {
    let e = |k: usize| -> Vec<Complex64> { ts.iter().map(|&t| phasor(theta[k], t)).collect() };
    let (e1, e2) = (e(0), e(1));
    // Rest term: 1 for stage 2, e^{−iθ₃t} for stage 3.
    let rest: Vec<Complex64> = if stage == 2 {
        vec![Complex64::new(1.0, 0.0); ts.len()]
    } else {
        e(2)
    };
    let a1: Vec<_> = e1.iter().zip(&rest).map(|(x, c)| x - c).collect();
    let a2: Vec<_> = e2.iter().zip(&rest).map(|(x, c)| x - c).collect();
    let b: Vec<_> = zs.iter().zip(&rest).map(|(z, c)| z - c).collect();
    let r = two_amplitude_ls(&a1, &a2, &b, r2_max);
    if stage == 2 {
        vec![r[0], r[1]]
    } else {
        vec![r[0], r[1], 1.0 - r[0] - r[1]]
    }
}

fn fit_stage(
    stage: u8,
    seed: &FitResult,
    zs: &[Complex64],
    ts: &[f64],
    nyquist: f64,
    bound: f64,
    r2_max: f64,
) -> FitResult {
    let dim = stage as usize;
    let mut lo = vec![-bound; dim];
    let mut hi = vec![bound; dim];
    lo[0] = -nyquist;
    hi[0] = nyquist;

    // The seed embeds the previous model with the new frequency at zero.
    let mut seed_theta = seed.frequencies.clone();
    seed_theta.push(0.0);
    let mut seed_r = seed.amplitudes[..seed.amplitudes.len().min(2)].to_vec();
    if seed_r.len() < 2 {
        seed_r.push(0.0);
    }
    if stage == 3 {
        seed_r.push(1.0 - seed_r[0] - seed_r[1]);
    }
    let seed_fit = FitResult {
        stage,
        residual: residual_of(stage, &seed_r, &seed_theta, zs, ts),
        amplitudes: seed_r,
        frequencies: seed_theta.clone(),
        degenerate: false,
    };

    let objective = |theta: &[f64]| {
        let r = stage_amplitudes(stage, theta, zs, ts, r2_max);
        residual_of(stage, &r, theta, zs, ts)
    };

    let mut starts = vec![seed_theta.clone()];
    for k in 0..RESTARTS {
        let mut s = seed_theta.clone();
        s[dim - 1] = if bound > 0.0 {
            -bound + (k as f64 + 0.5) * 2.0 * bound / RESTARTS as f64
        } else {
            0.0
        };
        starts.push(s);
    }
    let steps: Vec<f64> = (0..dim)
        .map(|i| {
            let width = hi[i] - lo[i];
            if i == 0 {
                (0.02 * width).clamp(1e-6, 0.5)
            } else {
                (0.1 * width).max(1e-9)
            }
        })
        .collect();

    let nm = NelderMead::default();
    let mut best = seed_fit.clone();
    for start in starts {
        let (theta, _) = nm.minimize(objective, &start, &steps, &lo, &hi);
        let r = stage_amplitudes(stage, &theta, zs, ts, r2_max);
        let residual = residual_of(stage, &r, &theta, zs, ts);
        if residual < best.residual {
            best = FitResult {
                stage,
                amplitudes: r,
                frequencies: theta,
                residual,
                degenerate: false,
            };
        }
    }
    best
}

/// Stage-1 fit followed by constrained two- and three-frequency
/// refinements. Each stage keeps its seed unless it lowers the residual.
pub fn fit_sequential(zs: &[Complex64], ts: &[f64], alpha: f64) -> Result<SequentialFit> {
    let nyquist = check_series(zs, ts)?;
    let first = fit_single(zs, ts)?;
    if first.degenerate {
        return Ok(SequentialFit {
            stages: vec![first],
        });
    }
    let bound = alpha * first.frequencies[0].abs();
    let r2_max = first.amplitudes[0];
    let second = fit_stage(2, &first, zs, ts, nyquist, bound, r2_max);
    let third = fit_stage(3, &second, zs, ts, nyquist, bound, r2_max);
    Ok(SequentialFit {
        stages: vec![first, second, third],
    })
}

#[derive(Debug, Clone)]
pub struct QcelsOutcome {
    pub estimate: EnergyEstimate,
    pub fit: SequentialFit,
    pub reference_energy: f64,
}

/// Full QCELS run: compress, pick the Hartree–Fock reference, collect the
/// `Z_n` series and return θ₁ of the final fit stage.
///
/// In sampled mode the remaining budget is split evenly across the
/// `2·(n_Z − 1)` Hadamard-test branches.
pub fn qcels_solve(
    h: &PauliHamiltonian,
    hp: &QcelsHyperparams,
    budget: &mut ShotBudget,
    mode: ExecutionMode,
    rng_seed: u64,
) -> Result<QcelsOutcome> {
    hp.validate()?;
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::Capacity {
            what: "QCELS",
            requested: h.n_qubits(),
            limit: MAX_DENSE_QUBITS,
        });
    }
    let start = Instant::now();
    let used_before = budget.used();
    let hc = h.compress(hp.ham_cutoff, Some(hp.ham_terms));
    let hf = hartree_fock_index(&hc)?;
    let reference = Statevector::basis(hc.n_qubits(), hf)?;
    let reference_energy = hc.diagonal(hf);

    let series_mode = match mode {
        ExecutionMode::Exact => SeriesMode::Exact,
        ExecutionMode::Sampled => SeriesMode::Sampled {
            shots_per_point: budget.remaining() / (2 * (hp.n_z as u64 - 1)),
        },
    };
    let zs = expectation_series(
        &reference,
        &hc,
        hp.delta_t,
        hp.n_z,
        default_trotter_steps(hp.delta_t),
        series_mode,
        budget,
        rng_seed,
    )?;
    let ts: Vec<f64> = (0..hp.n_z).map(|n| n as f64 * hp.delta_t).collect();
    let fit = fit_sequential(&zs, &ts, hp.alpha)?;
    let degenerate = fit.degenerate();
    if degenerate {
        log::warn!("QCELS fit degenerate; falling back to the reference diagonal energy");
    }
    let value = if degenerate {
        reference_energy
    } else {
        fit.last().energy()
    };
    Ok(QcelsOutcome {
        estimate: EnergyEstimate {
            value,
            shots_used: budget.used() - used_before,
            iterations: hp.n_z - 1,
            wall_time_s: start.elapsed().as_secs_f64(),
            degenerate,
            truncated: false,
        },
        fit,
        reference_energy,
    })
}
