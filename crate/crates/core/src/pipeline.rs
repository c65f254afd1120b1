//! End-to-end orchestration: mine solver runs on small systems, train the
//! surrogate, search hyperparameters and compare against the defaults.
//!
//! Job files are TOML; relative paths inside them resolve against the
//! file's own directory.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ham::{EnergyEstimate, PauliHamiltonian, MAX_DENSE_QUBITS};
use crate::hyperopt::{optimize, HyperparamSpec, SearchConfig, SurrogateObjective};
use crate::params::{Hyperparams, Solver};
use crate::qcels::qcels_solve;
use crate::qsci::adapt_qsci_solve;
use crate::sim::{ExecutionMode, ShotBudget};
use crate::surrogate::{
    append_records, encode_features, evaluate, read_dataset, split_dataset, train_gbt,
    DatasetSplit, GbtConfig, GbtModel, Metrics, TrainingRecord, DEFAULT_SLOTS,
};

/// Run either solver.
pub fn run_solver(
    h: &PauliHamiltonian,
    hp: &Hyperparams,
    budget: &mut ShotBudget,
    mode: ExecutionMode,
    seed: u64,
) -> Result<EnergyEstimate> {
    match hp {
        Hyperparams::Qcels(p) => Ok(qcels_solve(h, p, budget, mode, seed)?.estimate),
        Hyperparams::AdaptQsci(p) => Ok(adapt_qsci_solve(h, p, budget, mode, seed)?.estimate),
    }
}

/// `|(score − truth)/truth|·100`.
pub fn relative_error_pct(score: f64, truth: f64) -> f64 {
    ((score - truth) / truth).abs() * 100.0
}

/// SplitMix64 finaliser, used to derive independent per-run seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a: stable across platforms and releases, unlike DefaultHasher.
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn default_runs() -> u64 {
    100
}
fn default_slots() -> usize {
    DEFAULT_SLOTS
}
fn default_timeout() -> f64 {
    300.0
}
fn default_cap() -> u64 {
    ShotBudget::DEFAULT_CAP
}
fn default_repeats() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiningJob {
    pub solver: Solver,
    pub hamiltonians: Vec<PathBuf>,
    #[serde(default = "default_runs")]
    pub runs_per_system: u64,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
    #[serde(default = "default_slots")]
    pub slots: usize,
    /// Runs slower than this are discarded.
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default = "default_cap")]
    pub shot_cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MiningSummary {
    pub written: usize,
    pub skipped: usize,
    /// Runs already present in the output file.
    pub resumed: usize,
}

/// Canonical tag of a Hamiltonian file: its stem.
pub fn system_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

impl MiningJob {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut job: MiningJob =
            toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        job.output = base.join(&job.output);
        for h in &mut job.hamiltonians {
            *h = base.join(&*h);
        }
        Ok(job)
    }

    /// Seed of one `(system, run)` pair, independent of job order.
    pub fn run_seed(&self, system: &str, run: u64) -> u64 {
        mix_seed(mix_seed(self.seed, name_hash(system)), run)
    }

    /// Draw a random configuration per run, solve in exact mode and append
    /// one record per finished run. Runs already in the output are skipped,
    /// so an interrupted job can simply be restarted.
    pub fn mine(&self) -> Result<MiningSummary> {
        let spec = HyperparamSpec::for_solver(self.solver);
        if let Some(dir) = self.output.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut done: BTreeSet<(String, u64)> = BTreeSet::new();
        if self.output.exists() {
            for r in read_dataset(&self.output)? {
                if r.solver != self.solver {
                    return Err(Error::format(
                        &self.output,
                        format!("holds {} records, job mines {}", r.solver, self.solver),
                    ));
                }
                done.insert((r.system, r.run));
            }
        }
        let mut summary = MiningSummary::default();
        for path in &self.hamiltonians {
            let h = PauliHamiltonian::read(path)?;
            if h.n_qubits() > MAX_DENSE_QUBITS {
                return Err(Error::Capacity {
                    what: "mining system size",
                    requested: h.n_qubits(),
                    limit: MAX_DENSE_QUBITS,
                });
            }
            let system = system_name(path);
            for run in 0..self.runs_per_system {
                if done.contains(&(system.clone(), run)) {
                    summary.resumed += 1;
                    continue;
                }
                let seed = self.run_seed(&system, run);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let hp = spec.to_hyperparams(&spec.random_vector(&mut rng))?;
                let mut budget = ShotBudget::new(self.shot_cap);
                let start = Instant::now();
                let outcome = run_solver(
                    &h,
                    &hp,
                    &mut budget,
                    ExecutionMode::Exact,
                    mix_seed(seed, 1),
                );
                let elapsed = start.elapsed().as_secs_f64();
                match outcome {
                    Ok(est) if elapsed <= self.timeout_s && est.value.is_finite() => {
                        let record = TrainingRecord {
                            system: system.clone(),
                            run,
                            solver: self.solver,
                            x: encode_features(&h, &hp, self.slots),
                            y: est.value,
                        };
                        append_records(&self.output, std::slice::from_ref(&record))?;
                        summary.written += 1;
                    }
                    Ok(_) if elapsed > self.timeout_s => {
                        log::warn!(
                            "{system} run {run}: {elapsed:.1} s exceeds the timeout; skipped"
                        );
                        summary.skipped += 1;
                    }
                    Ok(est) => {
                        log::warn!(
                            "{system} run {run}: non-finite energy {}; skipped",
                            est.value
                        );
                        summary.skipped += 1;
                    }
                    Err(e) => {
                        log::warn!("{system} run {run}: {e}; skipped");
                        summary.skipped += 1;
                    }
                }
            }
        }
        Ok(summary)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: GbtModel,
    pub split: DatasetSplit,
    pub test: Option<Metrics>,
    pub holdout: Option<Metrics>,
}

/// Split a dataset, fit on the training part and score the other two.
pub fn train_surrogate(
    records: &[TrainingRecord],
    cfg: &GbtConfig,
    split_seed: u64,
) -> Result<TrainOutcome> {
    let first = records
        .first()
        .ok_or_else(|| Error::Invalid("dataset is empty".into()))?;
    let solver = first.solver;
    if let Some(r) = records.iter().find(|r| r.solver != solver) {
        return Err(Error::Shape(format!(
            "dataset mixes {solver} and {} records",
            r.solver
        )));
    }
    let n_hyper = solver.field_names().len();
    let slots = first
        .x
        .len()
        .checked_sub(n_hyper + 1)
        .ok_or_else(|| Error::Shape(format!("records too short for {solver} features")))?;
    let split = split_dataset(records, split_seed);
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
        idx.iter()
            .map(|&i| (records[i].x.clone(), records[i].y))
            .unzip()
    };
    let (x, y) = pick(&split.train);
    let (mut model, _) = train_gbt(&x, &y, cfg)?;
    model.solver = Some(solver);
    model.slots = Some(slots);
    let score = |idx: &[usize]| -> Result<Option<Metrics>> {
        if idx.is_empty() {
            return Ok(None);
        }
        let (x, y) = pick(idx);
        evaluate(&model, &x, &y).map(Some)
    };
    let test = score(&split.test)?;
    let holdout = score(&split.holdout)?;
    Ok(TrainOutcome {
        model,
        split,
        test,
        holdout,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    Default,
    Optimized,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Default => "default",
            Variant::Optimized => "optimized",
        }
    }
}

/// One line of an evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub system: String,
    pub solver: Solver,
    pub variant: Variant,
    /// Surrogate prediction for this configuration.
    pub predicted: f64,
    /// Best (lowest) energy over the repeats.
    pub task_score: f64,
    pub error_pct: Option<f64>,
    pub runtime_s: f64,
    pub iterations: usize,
    pub shots: u64,
    pub truncated: bool,
    pub hyperparams: Hyperparams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSettings {
    pub search: SearchConfig,
    pub shot_cap: u64,
    pub mode: ExecutionMode,
    pub repeats: usize,
    pub seed: u64,
}

/// Run the solver with its defaults and with the searched configuration.
pub fn evaluate_system(
    system: &str,
    h: &PauliHamiltonian,
    true_value: Option<f64>,
    model: &GbtModel,
    solver: Solver,
    settings: &EvalSettings,
) -> Result<Vec<EvalRow>> {
    if settings.repeats == 0 {
        return Err(Error::Invalid("repeats must be positive".into()));
    }
    let objective = SurrogateObjective::new(model, h, solver)?;
    let spec = HyperparamSpec::for_solver(solver);
    let defaults = solver.defaults();
    let search = SearchConfig {
        seed: mix_seed(settings.seed, name_hash(system)),
        ..settings.search
    };
    let found = optimize(&objective, &spec, &search, &[defaults.to_values()])?;
    let optimized = spec.to_hyperparams(&found.best)?;

    let mut rows = Vec::with_capacity(2);
    for (variant, hp) in [
        (Variant::Default, defaults),
        (Variant::Optimized, optimized),
    ] {
        let mut best: Option<(EnergyEstimate, f64)> = None;
        for r in 0..settings.repeats {
            let mut budget = ShotBudget::new(settings.shot_cap);
            let start = Instant::now();
            let est = run_solver(
                h,
                &hp,
                &mut budget,
                settings.mode,
                mix_seed(search.seed, r as u64 + 1),
            )?;
            let elapsed = start.elapsed().as_secs_f64();
            if best.as_ref().is_none_or(|(b, _)| est.value < b.value) {
                best = Some((est, elapsed));
            }
        }
        let (est, runtime_s) = best.expect("at least one repeat");
        rows.push(EvalRow {
            system: system.to_string(),
            solver,
            variant,
            predicted: objective.predict(&hp)?,
            task_score: est.value,
            error_pct: true_value.map(|t| relative_error_pct(est.value, t)),
            runtime_s,
            iterations: est.iterations,
            shots: est.shots_used,
            truncated: est.truncated,
            hyperparams: hp,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemEntry {
    pub name: Option<String>,
    pub hamiltonian: PathBuf,
    pub true_value: Option<f64>,
    /// Fill in `true_value` by exact diagonalisation.
    #[serde(default)]
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub population: Option<usize>,
    pub generations: Option<usize>,
    pub elite_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalJob {
    pub model: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_cap")]
    pub shot_cap: u64,
    /// Exact (classical) execution instead of shot sampling.
    #[serde(default)]
    pub exact: bool,
    pub search: Option<SearchSection>,
    pub system: Vec<SystemEntry>,
}

impl EvalJob {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut job: EvalJob =
            toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        job.model = base.join(&job.model);
        for s in &mut job.system {
            s.hamiltonian = base.join(&s.hamiltonian);
        }
        Ok(job)
    }

    pub fn settings(&self) -> EvalSettings {
        let mut search = SearchConfig::default();
        if let Some(s) = &self.search {
            search.population = s.population.unwrap_or(search.population);
            search.generations = s.generations.unwrap_or(search.generations);
            search.elite_fraction = s.elite_fraction.unwrap_or(search.elite_fraction);
        }
        EvalSettings {
            search,
            shot_cap: self.shot_cap,
            mode: if self.exact {
                ExecutionMode::Exact
            } else {
                ExecutionMode::Sampled
            },
            repeats: self.repeats,
            seed: self.seed,
        }
    }

    pub fn run(&self) -> Result<EvalReport> {
        let model = GbtModel::load(&self.model)?;
        let solver = model
            .solver
            .ok_or_else(|| Error::format(&self.model, "model does not record its solver"))?;
        let settings = self.settings();
        let mut rows = Vec::new();
        for entry in &self.system {
            let h = PauliHamiltonian::read(&entry.hamiltonian)?;
            let name = entry
                .name
                .clone()
                .unwrap_or_else(|| system_name(&entry.hamiltonian));
            let truth = match (entry.true_value, entry.oracle) {
                (Some(t), _) => Some(t),
                (None, true) => Some(h.exact_ground_state()?.energy),
                (None, false) => None,
            };
            rows.extend(evaluate_system(
                &name, &h, truth, &model, solver, &settings,
            )?);
        }
        Ok(EvalReport { rows })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

const TSV_HEADER: &[&str] = &[
    "system",
    "algorithm",
    "variant",
    "predicted",
    "task_score",
    "error_pct",
    "iterations",
    "shots",
    "truncated",
    "hyperparams",
];

impl EvalReport {
    /// Tab-separated rows. Runtime is appended only when asked for, so the
    /// default output is reproducible byte for byte.
    pub fn to_tsv(&self, timing: bool) -> String {
        let mut s = TSV_HEADER.join("\t");
        if timing {
            s.push_str("\truntime_s");
        }
        s.push('\n');
        for r in &self.rows {
            let hp = serde_json::to_string(&r.hyperparams).expect("hyperparameters serialise");
            write!(
                s,
                "{}\t{}\t{}\t{:?}\t{:?}\t{}\t{}\t{}\t{}\t{}",
                r.system,
                r.solver,
                r.variant.name(),
                r.predicted,
                r.task_score,
                r.error_pct.map_or(String::new(), |e| format!("{e:?}")),
                r.iterations,
                r.shots,
                r.truncated,
                hp
            )
            .unwrap();
            if timing {
                write!(s, "\t{:?}", r.runtime_s).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let bad = |line: usize, msg: String| Error::Parse { line, msg };
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty report".into()))?;
        let cols: Vec<&str> = header.split('\t').collect();
        let timing = match cols.len() {
            n if n == TSV_HEADER.len() => false,
            n if n == TSV_HEADER.len() + 1 && cols[n - 1] == "runtime_s" => true,
            _ => return Err(bad(1, "unexpected report header".into())),
        };
        if cols[..TSV_HEADER.len()] != *TSV_HEADER {
            return Err(bad(1, "unexpected report header".into()));
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let no = i + 1;
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != cols.len() {
                return Err(bad(
                    no,
                    format!("expected {} columns, got {}", cols.len(), f.len()),
                ));
            }
            let num = |k: usize| -> Result<f64> {
                f[k].parse()
                    .map_err(|_| bad(no, format!("bad number '{}'", f[k])))
            };
            let variant = match f[2] {
                "default" => Variant::Default,
                "optimized" => Variant::Optimized,
                v => return Err(bad(no, format!("unknown variant '{v}'"))),
            };
            rows.push(EvalRow {
                system: f[0].to_string(),
                solver: f[1].parse()?,
                variant,
                predicted: num(3)?,
                task_score: num(4)?,
                error_pct: if f[5].is_empty() { None } else { Some(num(5)?) },
                iterations: f[6]
                    .parse()
                    .map_err(|_| bad(no, "bad iteration count".into()))?,
                shots: f[7].parse().map_err(|_| bad(no, "bad shot count".into()))?,
                truncated: f[8]
                    .parse()
                    .map_err(|_| bad(no, "bad truncated flag".into()))?,
                hyperparams: Hyperparams::from_json(f[9])?,
                runtime_s: if timing { num(10)? } else { 0.0 },
            });
        }
        Ok(Self { rows })
    }

    /// Aligned table for terminals.
    pub fn to_table(&self, timing: bool) -> String {
        let mut head = vec![
            "system",
            "algorithm",
            "variant",
            "predicted",
            "score",
            "error %",
            "itr",
            "shots",
        ];
        if timing {
            head.push("runtime s");
        }
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![
                    r.system.clone(),
                    r.solver.to_string(),
                    r.variant.name().to_string() + if r.truncated { "*" } else { "" },
                    format!("{:.6}", r.predicted),
                    format!("{:.6}", r.task_score),
                    r.error_pct.map_or("-".into(), |e| format!("{e:.2}")),
                    r.iterations.to_string(),
                    r.shots.to_string(),
                ];
                if timing {
                    cells.push(format!("{:.2}", r.runtime_s));
                }
                cells
            })
            .collect();
        let widths: Vec<usize> = (0..head.len())
            .map(|c| {
                body.iter()
                    .map(|r| r[c].len())
                    .chain([head[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut s = String::new();
        let line = |cells: &[String], s: &mut String| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            s.push_str(padded.join("  ").trim_end());
            s.push('\n');
        };
        line(
            &head.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
            &mut s,
        );
        for r in &body {
            line(r, &mut s);
        }
        if self.rows.iter().any(|r| r.truncated) {
            s.push_str("* stopped on the shot budget\n");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_formula_anchor() {
        let e = relative_error_pct(-21.503637869562557, -22.046059902);
        assert_eq!(format!("{e:.2}"), "2.46");
        assert_eq!(relative_error_pct(-3.0, -3.0), 0.0);
    }

    #[test]
    fn run_seeds_are_stable_and_distinct() {
        let job = MiningJob {
            solver: Solver::Qcels,
            hamiltonians: vec![],
            runs_per_system: 1,
            seed: 3,
            output: "x".into(),
            slots: 4,
            timeout_s: 1.0,
            shot_cap: 1,
        };
        assert_eq!(job.run_seed("a", 0), job.run_seed("a", 0));
        assert_ne!(job.run_seed("a", 0), job.run_seed("a", 1));
        assert_ne!(job.run_seed("a", 0), job.run_seed("b", 0));
    }

    #[test]
    fn report_round_trip() {
        let row = EvalRow {
            system: "ising4".into(),
            solver: Solver::Qcels,
            variant: Variant::Optimized,
            predicted: -4.1,
            task_score: -4.25,
            error_pct: Some(0.5),
            runtime_s: 0.0,
            iterations: 9,
            shots: 1000,
            truncated: false,
            hyperparams: Solver::Qcels.defaults(),
        };
        let mut other = row.clone();
        other.error_pct = None;
        other.variant = Variant::Default;
        let report = EvalReport {
            rows: vec![row, other],
        };
        assert_eq!(EvalReport::from_tsv(&report.to_tsv(false)).unwrap(), report);
        let table = report.to_table(false);
        assert!(table.contains("ising4") && table.contains("0.50"));
    }
}
