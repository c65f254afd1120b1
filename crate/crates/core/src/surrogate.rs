//! Surrogate model: fixed-length features and gradient-boosted regression
//! trees predicting a solver's energy from (Hamiltonian, hyperparameters).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::PauliHamiltonian;
use crate::params::{Hyperparams, Solver};

/// Coefficients at or below this magnitude are dropped before encoding.
pub const FEATURE_CUTOFF: f64 = 0.05;
pub const DEFAULT_SLOTS: usize = 300;

/// `[hyperparameters | n_qubits | top-K coefficients, zero-padded]`.
pub fn encode_features(h: &PauliHamiltonian, hp: &Hyperparams, slots: usize) -> Vec<f64> {
    let mut x = hp.to_values();
    x.push(h.n_qubits() as f64);
    let compressed = h.compress(FEATURE_CUTOFF, Some(slots));
    x.extend(compressed.terms().iter().map(|(c, _)| *c));
    x.resize(feature_len(hp.solver(), slots), 0.0);
    x
}

pub fn feature_len(solver: Solver, slots: usize) -> usize {
    solver.field_names().len() + 1 + slots
}

/// One mined solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub system: String,
    pub run: u64,
    pub solver: Solver,
    pub x: Vec<f64>,
    pub y: f64,
}

/// Append records as JSON lines.
pub fn append_records(path: impl AsRef<Path>, records: &[TrainingRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = String::new();
    for r in records {
        buf.push_str(&serde_json::to_string(r).expect("records serialise"));
        buf.push('\n');
    }
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    file.write_all(buf.as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| Error::io(path, e))
}

/// Read a JSON-lines dataset. A truncated final line (an interrupted
/// append) is skipped with a warning; any other malformed line is an error.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<TrainingRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let mut records = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TrainingRecord>(line) {
            Ok(r) if r.y.is_finite() => records.push(r),
            Ok(_) => return Err(Error::format(path, format!("line {}: non-finite y", i + 1))),
            Err(_) if i + 1 == lines.len() => {
                log::warn!("{}: ignoring truncated last line", path.display());
            }
            Err(e) => return Err(Error::format(path, format!("line {}: {e}", i + 1))),
        }
    }
    Ok(records)
}

/// Index partition of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetSplit {
    pub holdout: Vec<usize>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per system: shuffle, hold out 10%, then split the rest 80/20 into train
/// and test. Systems with fewer than 10 records go entirely to train.
pub fn split_dataset(records: &[TrainingRecord], seed: u64) -> DatasetSplit {
    let mut by_system: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_system.entry(&r.system).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = DatasetSplit::default();
    for (system, mut idx) in by_system {
        if idx.len() < 10 {
            log::warn!(
                "system {system} has only {} records; all go to training",
                idx.len()
            );
            split.train.extend(idx);
            continue;
        }
        idx.shuffle(&mut rng);
        let n_holdout = (idx.len() as f64 * 0.1).round() as usize;
        let rest = idx.len() - n_holdout;
        let n_test = (rest as f64 * 0.2).round() as usize;
        split.holdout.extend_from_slice(&idx[..n_holdout]);
        split
            .test
            .extend_from_slice(&idx[n_holdout..n_holdout + n_test]);
        split.train.extend_from_slice(&idx[n_holdout + n_test..]);
    }
    split
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    /// Fraction of rows drawn (without replacement) for each tree.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 6,
            learning_rate: 0.1,
            min_leaf: 5,
            subsample: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    /// Go left iff `x[feature] <= threshold`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(f64),
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    trees: Vec<Tree>,
    learning_rate: f64,
    base_score: f64,
    n_features: usize,
    /// Layout the features were built with, when known.
    pub solver: Option<Solver>,
    pub slots: Option<usize>,
}

/// Per-node accumulator while scanning a level.
#[derive(Clone, Copy)]
struct Candidate {
    sum: f64,
    count: usize,
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Fit squared-error gradient boosting. Returns the model and the training
/// MSE after each round.
pub fn train_gbt(x: &[Vec<f64>], y: &[f64], cfg: &GbtConfig) -> Result<(GbtModel, Vec<f64>)> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} targets",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Invalid("cannot train on an empty dataset".into()));
    }
    let n_features = x[0].len();
    if let Some(row) = x.iter().position(|r| r.len() != n_features) {
        return Err(Error::Shape(format!(
            "row {row} has {} features, expected {n_features}",
            x[row].len()
        )));
    }
    if cfg.n_trees == 0 || cfg.min_leaf == 0 {
        return Err(Error::Invalid(
            "n_trees and min_leaf must be positive".into(),
        ));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0) {
        return Err(Error::Invalid(format!(
            "learning_rate must be in (0, 1], got {}",
            cfg.learning_rate
        )));
    }
    if !(cfg.subsample > 0.0 && cfg.subsample <= 1.0) {
        return Err(Error::Invalid(format!(
            "subsample must be in (0, 1], got {}",
            cfg.subsample
        )));
    }
    if y.iter().any(|v| !v.is_finite()) || x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("training data must be finite".into()));
    }

    let n = y.len();
    // Features that never vary cannot split; skipping them matters because
    // most coefficient slots are padding.
    let varying: Vec<usize> = (0..n_features)
        .filter(|&f| x.iter().any(|r| r[f] != x[0][f]))
        .collect();
    let presorted: Vec<Vec<usize>> = varying
        .iter()
        .map(|&f| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
            order
        })
        .collect();

    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_rows = ((n as f64 * cfg.subsample).round() as usize).clamp(1, n);
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut history = Vec::with_capacity(cfg.n_trees);
    let mut rows: Vec<usize> = (0..n).collect();

    for _ in 0..cfg.n_trees {
        let residual: Vec<f64> = y.iter().zip(&pred).map(|(t, p)| t - p).collect();
        let in_tree: Vec<bool> = if n_rows < n {
            rows.shuffle(&mut rng);
            let mut mask = vec![false; n];
            for &r in &rows[..n_rows] {
                mask[r] = true;
            }
            mask
        } else {
            vec![true; n]
        };
        let tree = build_tree(x, &residual, &in_tree, &varying, &presorted, cfg);
        for (p, row) in pred.iter_mut().zip(x) {
            *p += cfg.learning_rate * tree.predict(row);
        }
        history.push(
            y.iter()
                .zip(&pred)
                .map(|(t, p)| (t - p).powi(2))
                .sum::<f64>()
                / n as f64,
        );
        trees.push(tree);
    }
    Ok((
        GbtModel {
            trees,
            learning_rate: cfg.learning_rate,
            base_score,
            n_features,
            solver: None,
            slots: None,
        },
        history,
    ))
}

/// Level-wise exact greedy regression tree on `residual`.
fn build_tree(
    x: &[Vec<f64>],
    residual: &[f64],
    in_tree: &[bool],
    varying: &[usize],
    presorted: &[Vec<usize>],
    cfg: &GbtConfig,
) -> Tree {
    const NONE: usize = usize::MAX;
    let mut nodes = vec![Node::Leaf(0.0)];
    let mut node_of: Vec<usize> = in_tree.iter().map(|&t| if t { 0 } else { NONE }).collect();
    let mut frontier = vec![0usize];

    for depth in 0..=cfg.max_depth {
        // Totals per frontier node.
        let slot: BTreeMap<usize, usize> = frontier
            .iter()
            .enumerate()
            .map(|(s, &nd)| (nd, s))
            .collect();
        let mut stats = vec![
            Candidate {
                sum: 0.0,
                count: 0,
                gain: 0.0,
                feature: 0,
                threshold: 0.0,
            };
            frontier.len()
        ];
        let mut slot_of = vec![NONE; node_of.len()];
        for (i, &nd) in node_of.iter().enumerate() {
            if let Some(&s) = slot.get(&nd) {
                slot_of[i] = s;
                stats[s].sum += residual[i];
                stats[s].count += 1;
            }
        }
        for s in &stats {
            debug_assert!(s.count > 0);
        }
        for (s, &nd) in frontier.iter().enumerate() {
            nodes[nd] = Node::Leaf(stats[s].sum / stats[s].count as f64);
        }
        if depth == cfg.max_depth {
            break;
        }

        let parent_score: Vec<f64> = stats
            .iter()
            .map(|s| s.sum * s.sum / s.count as f64)
            .collect();
        let mut left_sum = vec![0.0; frontier.len()];
        let mut left_count = vec![0usize; frontier.len()];
        let mut last_value = vec![0.0; frontier.len()];
        for (k, &f) in varying.iter().enumerate() {
            left_sum.iter_mut().for_each(|v| *v = 0.0);
            left_count.iter_mut().for_each(|v| *v = 0);
            for &i in &presorted[k] {
                let s = slot_of[i];
                if s == NONE {
                    continue;
                }
                let v = x[i][f];
                let (lc, total) = (left_count[s], stats[s].count);
                if lc >= cfg.min_leaf && total - lc >= cfg.min_leaf && v > last_value[s] {
                    let ls = left_sum[s];
                    let rs = stats[s].sum - ls;
                    let gain =
                        ls * ls / lc as f64 + rs * rs / (total - lc) as f64 - parent_score[s];
                    if gain > stats[s].gain * (1.0 + 1e-12) + 1e-300 {
                        let mut threshold = 0.5 * (last_value[s] + v);
                        if threshold >= v {
                            threshold = last_value[s];
                        }
                        stats[s].gain = gain;
                        stats[s].feature = f;
                        stats[s].threshold = threshold;
                    }
                }
                left_sum[s] += residual[i];
                left_count[s] += 1;
                last_value[s] = v;
            }
        }

        let mut next = Vec::new();
        let mut child_of = vec![(NONE, NONE); frontier.len()];
        for (s, &nd) in frontier.iter().enumerate() {
            if stats[s].gain <= 0.0 {
                continue;
            }
            let (l, r) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf(0.0));
            nodes.push(Node::Leaf(0.0));
            nodes[nd] = Node::Split {
                feature: stats[s].feature,
                threshold: stats[s].threshold,
                left: l,
                right: r,
            };
            child_of[s] = (l, r);
            next.push(l);
            next.push(r);
        }
        if next.is_empty() {
            break;
        }
        for (i, nd) in node_of.iter_mut().enumerate() {
            let s = slot_of[i];
            if s == NONE || child_of[s].0 == NONE {
                if s != NONE {
                    *nd = NONE; // finished leaf
                }
                continue;
            }
            *nd = if x[i][stats[s].feature] <= stats[s].threshold {
                child_of[s].0
            } else {
                child_of[s].1
            };
        }
        frontier = next;
    }
    Tree { nodes }
}

impl GbtModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        Ok(self.base_score
            + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>())
    }

    /// Plain-text dump with every real at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "gbt 1").unwrap();
        if let Some(solver) = self.solver {
            writeln!(s, "solver {solver}").unwrap();
        }
        if let Some(slots) = self.slots {
            writeln!(s, "slots {slots}").unwrap();
        }
        writeln!(s, "features {}", self.n_features).unwrap();
        writeln!(s, "learning_rate {:.16e}", self.learning_rate).unwrap();
        writeln!(s, "base_score {:.16e}", self.base_score).unwrap();
        writeln!(s, "trees {}", self.trees.len()).unwrap();
        for tree in &self.trees {
            writeln!(s, "tree {}", tree.nodes.len()).unwrap();
            for node in &tree.nodes {
                match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => writeln!(s, "split {feature} {threshold:.16e} {left} {right}").unwrap(),
                    Node::Leaf(v) => writeln!(s, "leaf {v:.16e}").unwrap(),
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cur = Cursor::new(text);
        let toks = cur.expect("gbt")?;
        if toks.get(1) != Some(&"1") {
            return Err(cur.error("unsupported model version"));
        }
        // Optional layout metadata precedes the feature count.
        let mut solver = None;
        let mut slots = None;
        if cur.peek() == Some("solver") {
            let toks = cur.expect("solver")?;
            solver = Some(toks.get(1).copied().unwrap_or("").parse::<Solver>()?);
        }
        if cur.peek() == Some("slots") {
            let toks = cur.expect("slots")?;
            slots = Some(cur.field(&toks, 1)?);
        }
        let toks = cur.expect("features")?;
        let n_features: usize = cur.field(&toks, 1)?;
        let toks = cur.expect("learning_rate")?;
        let learning_rate: f64 = cur.field(&toks, 1)?;
        let toks = cur.expect("base_score")?;
        let base_score: f64 = cur.field(&toks, 1)?;
        let toks = cur.expect("trees")?;
        let n_trees: usize = cur.field(&toks, 1)?;
        let mut trees = Vec::with_capacity(n_trees);
        for _ in 0..n_trees {
            let toks = cur.expect("tree")?;
            let n_nodes: usize = cur.field(&toks, 1)?;
            let mut nodes = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                let node = match cur.peek() {
                    Some("leaf") => {
                        let toks = cur.expect("leaf")?;
                        Node::Leaf(cur.field(&toks, 1)?)
                    }
                    Some("split") => {
                        let toks = cur.expect("split")?;
                        let (feature, left, right): (usize, usize, usize) = (
                            cur.field(&toks, 1)?,
                            cur.field(&toks, 3)?,
                            cur.field(&toks, 4)?,
                        );
                        if feature >= n_features || left >= n_nodes || right >= n_nodes {
                            return Err(cur.error("split index out of range"));
                        }
                        Node::Split {
                            feature,
                            threshold: cur.field(&toks, 2)?,
                            left,
                            right,
                        }
                    }
                    _ => {
                        cur.advance();
                        return Err(cur.error("expected 'leaf' or 'split'"));
                    }
                };
                nodes.push(node);
            }
            trees.push(Tree { nodes });
        }
        Ok(GbtModel {
            trees,
            learning_rate,
            base_score,
            n_features,
            solver,
            slots,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}

/// Line-by-line reader for the model dump.
struct Cursor<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
            .filter(|(_, t)| !t.is_empty())
            .collect();
        Self { lines, pos: 0 }
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|(_, t)| t[0])
    }

    fn advance(&mut self) {
        self.pos += 1;
    }

    fn line_no(&self) -> usize {
        self.pos
            .checked_sub(1)
            .and_then(|p| self.lines.get(p))
            .map_or(0, |(n, _)| *n)
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            line: self.line_no(),
            msg: msg.to_string(),
        }
    }

    fn expect(&mut self, keyword: &str) -> Result<Vec<&'a str>> {
        let found = self.peek();
        self.advance();
        match found {
            Some(k) if k == keyword => Ok(self.lines[self.pos - 1].1.clone()),
            Some(k) => Err(self.error(&format!("expected '{keyword}', found '{k}'"))),
            None => Err(self.error(&format!("unexpected end of file, expected '{keyword}'"))),
        }
    }

    fn field<T: std::str::FromStr>(&self, toks: &[&str], i: usize) -> Result<T> {
        toks.get(i)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.error(&format!("bad or missing value in column {}", i + 1)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mae: f64,
    pub mse: f64,
    /// `1 − SSE/SST`; NaN when the targets are constant.
    pub r2: f64,
}

pub fn evaluate(model: &GbtModel, x: &[Vec<f64>], y: &[f64]) -> Result<Metrics> {
    let pred = x
        .iter()
        .map(|r| model.predict(r))
        .collect::<Result<Vec<_>>>()?;
    metrics(&pred, y)
}

pub fn metrics(pred: &[f64], y: &[f64]) -> Result<Metrics> {
    if pred.is_empty() || pred.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} targets",
            pred.len(),
            y.len()
        )));
    }
    let n = y.len() as f64;
    let mae = pred.iter().zip(y).map(|(p, t)| (p - t).abs()).sum::<f64>() / n;
    let sse: f64 = pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum();
    let mean = y.iter().sum::<f64>() / n;
    let sst: f64 = y.iter().map(|t| (t - mean).powi(2)).sum();
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { f64::NAN };
    Ok(Metrics {
        mae,
        mse: sse / n,
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ham::parse_hamiltonian;

    fn record(system: &str, run: u64) -> TrainingRecord {
        TrainingRecord {
            system: system.into(),
            run,
            solver: Solver::Qcels,
            x: vec![run as f64],
            y: 0.0,
        }
    }

    #[test]
    fn encoding_drops_small_coefficients() {
        let h = parse_hamiltonian("qubits 1\n1.0 Z0\n0.04 X0").unwrap();
        let x = encode_features(&h, &Solver::Qcels.defaults(), 3);
        assert_eq!(x.len(), 5 + 1 + 3);
        assert_eq!(&x[..5], &Solver::Qcels.defaults().to_values()[..]);
        assert_eq!(x[5], 1.0);
        assert_eq!(&x[6..], &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn split_sizes() {
        let one: Vec<_> = (0..100).map(|i| record("a", i)).collect();
        let s = split_dataset(&one, 1);
        assert_eq!((s.holdout.len(), s.train.len(), s.test.len()), (10, 72, 18));

        let two: Vec<_> = (0..100)
            .map(|i| record(if i < 50 { "a" } else { "b" }, i))
            .collect();
        let s = split_dataset(&two, 1);
        assert_eq!((s.holdout.len(), s.train.len(), s.test.len()), (10, 72, 18));
        let in_a = |v: &[usize]| v.iter().filter(|&&i| i < 50).count();
        assert_eq!(
            (in_a(&s.holdout), in_a(&s.train), in_a(&s.test)),
            (5, 36, 9)
        );

        let mut all: Vec<usize> = [s.holdout, s.train, s.test].concat();
        all.sort();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(split_dataset(&two, 9), split_dataset(&two, 9));

        let small: Vec<_> = (0..7).map(|i| record("c", i)).collect();
        assert_eq!(split_dataset(&small, 0).train.len(), 7);
    }

    #[test]
    fn stump_predicts_leaf_means() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![if i < 10 { 0.0 } else { 1.0 }])
            .collect();
        let y: Vec<f64> = (0..20)
            .map(|i| if i < 10 { 1.0 + (i % 2) as f64 } else { 5.0 })
            .collect();
        let cfg = GbtConfig {
            n_trees: 1,
            max_depth: 1,
            learning_rate: 1.0,
            min_leaf: 1,
            ..Default::default()
        };
        let (m, _) = train_gbt(&x, &y, &cfg).unwrap();
        assert!((m.predict(&[0.0]).unwrap() - 1.5).abs() < 1e-12);
        assert!((m.predict(&[1.0]).unwrap() - 5.0).abs() < 1e-12);
        // Left iff x <= threshold, threshold at the midpoint.
        assert!((m.predict(&[0.5]).unwrap() - 1.5).abs() < 1e-12);
        assert!((m.predict(&[0.51]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn constant_target_is_reproduced() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let y = vec![-2.75; 30];
        let (m, _) = train_gbt(&x, &y, &GbtConfig::default()).unwrap();
        for row in &x {
            assert!((m.predict(row).unwrap() + 2.75).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_ragged_rows() {
        let x = vec![vec![1.0, 2.0], vec![1.0]];
        assert!(matches!(
            train_gbt(&x, &[0.0, 1.0], &GbtConfig::default()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let x: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i as f64 * 0.37).sin(), i as f64])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * 3.0 + 0.1 * r[1]).collect();
        let cfg = GbtConfig {
            n_trees: 20,
            ..Default::default()
        };
        let (mut m, _) = train_gbt(&x, &y, &cfg).unwrap();
        m.solver = Some(Solver::AdaptQsci);
        m.slots = Some(7);
        let back = GbtModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(GbtModel::from_text("gbt 1\nfeatures 2\n").is_err());
    }

    #[test]
    fn metric_examples() {
        let m = metrics(&[1.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_eq!((m.mae, m.mse), (1.0, 1.0));
        let m = metrics(&[3.0, 4.0], &[3.0, 4.0]).unwrap();
        assert_eq!((m.mae, m.mse, m.r2), (0.0, 0.0, 1.0));
    }

    #[test]
    fn dataset_file_round_trip_skips_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let recs: Vec<_> = (0..3).map(|i| record("s", i)).collect();
        append_records(&path, &recs[..2]).unwrap();
        append_records(&path, &recs[2..]).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), recs);
        std::fs::write(
            &path,
            std::fs::read_to_string(&path).unwrap() + "{\"system\": \"s\"",
        )
        .unwrap();
        assert_eq!(read_dataset(&path).unwrap(), recs);
    }
}
