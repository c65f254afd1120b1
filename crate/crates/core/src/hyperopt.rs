//! Surrogate-guided genetic search over hyperparameter vectors.
//!
//! Generation 0 is random. Each later generation keeps the elite and fills
//! the rest with children of random elite pairs; every field of a child is
//! the parents' average, their minimum, their maximum, or a fresh draw.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ham::PauliHamiltonian;
use crate::params::{Hyperparams, Solver};
use crate::surrogate::{encode_features, feature_len, GbtModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Int {
        lo: i64,
        hi: i64,
    },
    Real {
        lo: f64,
        hi: f64,
    },
    /// Sampled uniformly in `ln x`.
    LogReal {
        lo: f64,
        hi: f64,
    },
    Bool,
}

impl Domain {
    fn bounds(self) -> (f64, f64) {
        match self {
            Domain::Int { lo, hi } => (lo as f64, hi as f64),
            Domain::Real { lo, hi } | Domain::LogReal { lo, hi } => (lo, hi),
            Domain::Bool => (0.0, 1.0),
        }
    }

    fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            Domain::Int { lo, hi } => rng.random_range(lo..=hi) as f64,
            Domain::Real { lo, hi } => rng.random_range(lo..=hi),
            Domain::LogReal { lo, hi } => rng.random_range(lo.ln()..=hi.ln()).exp().clamp(lo, hi),
            Domain::Bool => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Clamp into range; integers round half away from zero (half-up for
    /// the non-negative ranges used here).
    fn project(self, v: f64) -> f64 {
        let (lo, hi) = self.bounds();
        match self {
            Domain::Int { .. } | Domain::Bool => v.round().clamp(lo, hi),
            _ => v.clamp(lo, hi),
        }
    }

    fn contains(self, v: f64) -> bool {
        let (lo, hi) = self.bounds();
        let whole = match self {
            Domain::Int { .. } | Domain::Bool => v.fract() == 0.0,
            _ => true,
        };
        whole && v >= lo && v <= hi
    }
}

/// Search domain for every hyperparameter of one solver, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperparamSpec {
    pub solver: Solver,
    pub fields: Vec<(&'static str, Domain)>,
}

impl HyperparamSpec {
    pub fn qcels() -> Self {
        Self {
            solver: Solver::Qcels,
            fields: vec![
                ("delta_t", Domain::Real { lo: 1e-3, hi: 0.3 }),
                ("n_Z", Domain::Int { lo: 5, hi: 25 }),
                ("ham_terms", Domain::Int { lo: 50, hi: 1000 }),
                ("ham_cutoff", Domain::Real { lo: 1e-4, hi: 1e-2 }),
                ("alpha", Domain::Real { lo: 0.5, hi: 1.0 }),
            ],
        }
    }

    pub fn adapt_qsci() -> Self {
        Self {
            solver: Solver::AdaptQsci,
            fields: vec![
                ("num_pickup", Domain::Int { lo: 50, hi: 1000 }),
                ("coeff_cutoff", Domain::Real { lo: 1e-4, hi: 1e-2 }),
                ("self_selection", Domain::Bool),
                (
                    "iter_max",
                    Domain::Int {
                        lo: 10_000,
                        hi: 1_000_000,
                    },
                ),
                (
                    "sampling_shots",
                    Domain::Int {
                        lo: 100,
                        hi: 1_000_000,
                    },
                ),
                ("atol", Domain::Real { lo: 1e-6, hi: 1e-4 }),
                ("final_sampling_shots_coeff", Domain::Int { lo: 1, hi: 8 }),
                ("num_precise_gradient", Domain::Int { lo: 32, hi: 300 }),
                ("max_num_converged", Domain::Int { lo: 1, hi: 4 }),
                ("reset_ignored_inx_mode", Domain::Int { lo: 0, hi: 100 }),
            ],
        }
    }

    pub fn for_solver(solver: Solver) -> Self {
        match solver {
            Solver::Qcels => Self::qcels(),
            Solver::AdaptQsci => Self::adapt_qsci(),
        }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn random_vector<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.fields.iter().map(|(_, d)| d.sample(rng)).collect()
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.len() && self.fields.iter().zip(v).all(|((_, d), &x)| d.contains(x))
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.fields
            .iter()
            .zip(v)
            .map(|((_, d), &x)| d.project(x))
            .collect()
    }

    pub fn to_hyperparams(&self, v: &[f64]) -> Result<Hyperparams> {
        Hyperparams::from_values(self.solver, v)
    }
}

/// Relative odds of the four per-field crossover modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverWeights {
    pub average: f64,
    pub min: f64,
    pub max: f64,
    pub fresh: f64,
}

impl Default for CrossoverWeights {
    fn default() -> Self {
        Self {
            average: 0.4,
            min: 0.2,
            max: 0.2,
            fresh: 0.2,
        }
    }
}

pub fn crossover<R: Rng>(
    p1: &[f64],
    p2: &[f64],
    spec: &HyperparamSpec,
    weights: &CrossoverWeights,
    rng: &mut R,
) -> Vec<f64> {
    let total = weights.average + weights.min + weights.max + weights.fresh;
    spec.fields
        .iter()
        .zip(p1.iter().zip(p2))
        .map(|((_, domain), (&a, &b))| {
            let u = rng.random::<f64>() * total;
            let v = if u < weights.average {
                match domain {
                    Domain::Bool => {
                        if rng.random_bool(0.5) {
                            a
                        } else {
                            b
                        }
                    }
                    _ => 0.5 * (a + b),
                }
            } else if u < weights.average + weights.min {
                a.min(b)
            } else if u < weights.average + weights.min + weights.max {
                a.max(b)
            } else {
                domain.sample(rng)
            };
            domain.project(v)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub population: usize,
    pub generations: usize,
    pub elite_fraction: f64,
    pub seed: u64,
    pub crossover: CrossoverWeights,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 20,
            elite_fraction: 0.2,
            seed: 0,
            crossover: CrossoverWeights::default(),
        }
    }
}

impl SearchConfig {
    pub fn elite_count(&self) -> usize {
        ((self.population as f64 * self.elite_fraction).round() as usize).clamp(2, self.population)
    }

    /// Vectors scored by a full run.
    pub fn evaluations(&self) -> usize {
        self.population + self.generations * (self.population - self.elite_count())
    }

    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Invalid("population must be at least 2".into()));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return Err(Error::Invalid(format!(
                "elite_fraction must be in (0, 1], got {}",
                self.elite_fraction
            )));
        }
        Ok(())
    }
}

/// Anything that scores a hyperparameter vector; lower is better.
pub trait Objective {
    fn score(&self, v: &[f64]) -> Result<f64>;
}

impl<F: Fn(&[f64]) -> f64> Objective for F {
    fn score(&self, v: &[f64]) -> Result<f64> {
        Ok(self(v))
    }
}

/// Predicted energy of a vector on one Hamiltonian.
pub struct SurrogateObjective<'a> {
    model: &'a GbtModel,
    h: &'a PauliHamiltonian,
    solver: Solver,
    slots: usize,
}

impl<'a> SurrogateObjective<'a> {
    /// Checks that the model was trained on this solver's feature layout.
    pub fn new(model: &'a GbtModel, h: &'a PauliHamiltonian, solver: Solver) -> Result<Self> {
        if let Some(trained) = model.solver.filter(|s| *s != solver) {
            return Err(Error::Shape(format!(
                "model was trained for {trained}, not {solver}"
            )));
        }
        let n_hyper = solver.field_names().len();
        let slots = match model.slots {
            Some(s) => s,
            None => model.n_features().checked_sub(n_hyper + 1).ok_or_else(|| {
                Error::Shape(format!(
                    "model has too few features ({}) for {solver}",
                    model.n_features()
                ))
            })?,
        };
        if feature_len(solver, slots) != model.n_features() {
            return Err(Error::Shape(format!(
                "model expects {} features, {solver} with {slots} slots gives {}",
                model.n_features(),
                feature_len(solver, slots)
            )));
        }
        Ok(Self {
            model,
            h,
            solver,
            slots,
        })
    }

    pub fn predict(&self, hp: &Hyperparams) -> Result<f64> {
        self.model.predict(&encode_features(self.h, hp, self.slots))
    }
}

impl Objective for SurrogateObjective<'_> {
    fn score(&self, v: &[f64]) -> Result<f64> {
        self.predict(&Hyperparams::from_values(self.solver, v)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Vec<f64>,
    pub best_score: f64,
    /// Best score after each generation, starting with generation 0.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Genetic search. `seeds` replace the first random members of
/// generation 0 as given, so a default configuration outside the search
/// box can still compete; everything the search generates lies inside it.
pub fn optimize<O: Objective + ?Sized>(
    objective: &O,
    spec: &HyperparamSpec,
    cfg: &SearchConfig,
    seeds: &[Vec<f64>],
) -> Result<SearchResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for s in seeds {
        spec.to_hyperparams(s)?;
    }
    let mut population: Vec<Vec<f64>> = seeds.iter().take(cfg.population).cloned().collect();
    while population.len() < cfg.population {
        population.push(spec.random_vector(&mut rng));
    }
    let mut evaluations = 0;
    let mut scored = score_all(objective, population, &mut evaluations)?;
    let elite_n = cfg.elite_count();
    let mut trace = vec![scored[0].1];

    for _ in 0..cfg.generations {
        scored.truncate(elite_n);
        let mut children = Vec::with_capacity(cfg.population - elite_n);
        while children.len() < cfg.population - elite_n {
            let i = rng.random_range(0..elite_n);
            let mut j = rng.random_range(0..elite_n - 1);
            if j >= i {
                j += 1;
            }
            children.push(crossover(
                &scored[i].0,
                &scored[j].0,
                spec,
                &cfg.crossover,
                &mut rng,
            ));
        }
        scored.extend(score_all(objective, children, &mut evaluations)?);
        sort_scored(&mut scored);
        trace.push(scored[0].1);
    }
    let (best, best_score) = scored.swap_remove(0);
    Ok(SearchResult {
        best,
        best_score,
        trace,
        evaluations,
    })
}

/// Best of `n_evals` independent random vectors.
pub fn random_search<O: Objective + ?Sized>(
    objective: &O,
    spec: &HyperparamSpec,
    n_evals: usize,
    seed: u64,
) -> Result<SearchResult> {
    if n_evals == 0 {
        return Err(Error::Invalid(
            "random search needs at least one evaluation".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluations = 0;
    let vectors = (0..n_evals).map(|_| spec.random_vector(&mut rng)).collect();
    let mut scored = score_all(objective, vectors, &mut evaluations)?;
    let (best, best_score) = scored.swap_remove(0);
    Ok(SearchResult {
        best,
        best_score,
        trace: vec![best_score],
        evaluations,
    })
}

fn score_all<O: Objective + ?Sized>(
    objective: &O,
    vectors: Vec<Vec<f64>>,
    evaluations: &mut usize,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut scored = vectors
        .into_iter()
        .map(|v| {
            *evaluations += 1;
            let s = objective.score(&v)?;
            Ok((v, if s.is_nan() { f64::INFINITY } else { s }))
        })
        .collect::<Result<Vec<_>>>()?;
    sort_scored(&mut scored);
    Ok(scored)
}

/// Stable sort by score, so earlier (older) vectors win ties.
fn sort_scored(scored: &mut [(Vec<f64>, f64)]) {
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
}
