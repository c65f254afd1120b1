//! Solver-agnostic hyperparameter vectors.
//!
//! The surrogate and the search both see a configuration as a flat list of
//! reals in the solver's canonical field order; integers are stored as
//! whole numbers and booleans as 0/1.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcels::QcelsHyperparams;
use crate::qsci::AdaptQsciHyperparams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Qcels,
    AdaptQsci,
}

const QCELS_FIELDS: &[&str] = &["delta_t", "n_Z", "ham_terms", "ham_cutoff", "alpha"];
const ADAPT_FIELDS: &[&str] = &[
    "num_pickup",
    "coeff_cutoff",
    "self_selection",
    "iter_max",
    "sampling_shots",
    "atol",
    "final_sampling_shots_coeff",
    "num_precise_gradient",
    "max_num_converged",
    "reset_ignored_inx_mode",
];

impl Solver {
    pub const ALL: [Solver; 2] = [Solver::Qcels, Solver::AdaptQsci];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Qcels => "qcels",
            Solver::AdaptQsci => "adapt-qsci",
        }
    }

    /// Canonical field order.
    pub fn field_names(self) -> &'static [&'static str] {
        match self {
            Solver::Qcels => QCELS_FIELDS,
            Solver::AdaptQsci => ADAPT_FIELDS,
        }
    }

    pub fn defaults(self) -> Hyperparams {
        match self {
            Solver::Qcels => Hyperparams::Qcels(QcelsHyperparams::default()),
            Solver::AdaptQsci => Hyperparams::AdaptQsci(AdaptQsciHyperparams::default()),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qcels" => Ok(Solver::Qcels),
            "adapt-qsci" => Ok(Solver::AdaptQsci),
            _ => Err(Error::Invalid(format!(
                "unknown solver '{s}' (expected qcels or adapt-qsci)"
            ))),
        }
    }
}

/// Hyperparameters of either solver. Serialises as a flat JSON object with
/// a `solver` tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "kebab-case")]
pub enum Hyperparams {
    Qcels(QcelsHyperparams),
    AdaptQsci(AdaptQsciHyperparams),
}

impl Hyperparams {
    pub fn solver(&self) -> Solver {
        match self {
            Hyperparams::Qcels(_) => Solver::Qcels,
            Hyperparams::AdaptQsci(_) => Solver::AdaptQsci,
        }
    }

    pub fn to_values(&self) -> Vec<f64> {
        match self {
            Hyperparams::Qcels(p) => vec![
                p.delta_t,
                p.n_z as f64,
                p.ham_terms as f64,
                p.ham_cutoff,
                p.alpha,
            ],
            Hyperparams::AdaptQsci(p) => vec![
                p.num_pickup as f64,
                p.coeff_cutoff,
                if p.self_selection { 1.0 } else { 0.0 },
                p.iter_max as f64,
                p.sampling_shots as f64,
                p.atol,
                p.final_sampling_shots_coeff as f64,
                p.num_precise_gradient as f64,
                p.max_num_converged as f64,
                p.reset_ignored_inx_mode as f64,
            ],
        }
    }

    /// Inverse of [`Hyperparams::to_values`]. Integer fields are rounded and
    /// booleans are true at 0.5 and above; the result is validated.
    pub fn from_values(solver: Solver, values: &[f64]) -> Result<Self> {
        let expected = solver.field_names().len();
        if values.len() != expected {
            return Err(Error::Shape(format!(
                "{solver} takes {expected} hyperparameters, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite hyperparameter {v}")));
        }
        let int = |v: f64| v.round().max(0.0) as u64;
        let hp = match solver {
            Solver::Qcels => Hyperparams::Qcels(QcelsHyperparams {
                delta_t: values[0],
                n_z: int(values[1]) as usize,
                ham_terms: int(values[2]) as usize,
                ham_cutoff: values[3],
                alpha: values[4],
            }),
            Solver::AdaptQsci => Hyperparams::AdaptQsci(AdaptQsciHyperparams {
                num_pickup: int(values[0]) as usize,
                coeff_cutoff: values[1],
                self_selection: values[2] >= 0.5,
                iter_max: int(values[3]),
                sampling_shots: int(values[4]),
                atol: values[5],
                final_sampling_shots_coeff: int(values[6]),
                num_precise_gradient: int(values[7]) as usize,
                max_num_converged: int(values[8]) as usize,
                reset_ignored_inx_mode: int(values[9]) as usize,
            }),
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hyperparams::Qcels(p) => p.validate(),
            Hyperparams::AdaptQsci(p) => p.validate(),
        }
    }

    /// Override one field by its canonical name.
    pub fn set(&mut self, field: &str, value: f64) -> Result<()> {
        let solver = self.solver();
        let idx = solver
            .field_names()
            .iter()
            .position(|f| *f == field)
            .ok_or_else(|| Error::Invalid(format!("{solver} has no hyperparameter '{field}'")))?;
        let mut values = self.to_values();
        values[idx] = value;
        *self = Hyperparams::from_values(solver, &values)?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hyperparameters serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let hp: Hyperparams = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("bad hyperparameters: {e}")))?;
        hp.validate()?;
        Ok(hp)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip() {
        for solver in Solver::ALL {
            let hp = solver.defaults();
            let back = Hyperparams::from_values(solver, &hp.to_values()).unwrap();
            assert_eq!(back, hp);
            assert_eq!(hp.to_values().len(), solver.field_names().len());
        }
    }

    #[test]
    fn json_round_trip_and_field_names() {
        let hp = Solver::Qcels.defaults();
        let text = hp.to_json();
        assert!(text.contains("\"n_Z\": 10"), "{text}");
        assert!(text.contains("\"solver\": \"qcels\""));
        assert_eq!(Hyperparams::from_json(&text).unwrap(), hp);
        let partial = r#"{"solver": "adapt-qsci", "num_pickup": 64}"#;
        match Hyperparams::from_json(partial).unwrap() {
            Hyperparams::AdaptQsci(p) => {
                assert_eq!(p.num_pickup, 64);
                assert_eq!(p.sampling_shots, 100_000);
            }
            other => panic!("{other:?}"),
        }
        assert!(Hyperparams::from_json(r#"{"solver": "qcels", "n_z": 4}"#).is_err());
    }

    #[test]
    fn set_by_name() {
        let mut hp = Solver::AdaptQsci.defaults();
        hp.set("self_selection", 1.0).unwrap();
        hp.set("sampling_shots", 1e6).unwrap();
        let v = hp.to_values();
        assert_eq!(v[2], 1.0);
        assert_eq!(v[4], 1e6);
        assert!(hp.set("delta_t", 0.1).is_err());
        assert!(hp.set("num_pickup", 0.0).is_err());
    }
}
