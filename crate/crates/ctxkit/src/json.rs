//! JSON forms for inequalities, states, substitution maps and estimate reports.

use std::collections::BTreeMap;

use ctxkit_core::catalog::{InequalityExpr, Sign, Term};
use ctxkit_core::linalg::{ComplexMatrix, DensityMatrix, StateVector, C64};
use ctxkit_core::observables::{ObservableLabel, SetId};
use ctxkit_core::quantum::{NamedState, StateSpec};
use ctxkit_core::sim::EstimateReport;
use ctxkit_core::Error;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub sign: i64,
    pub factors: Vec<String>,
}

/// `{"id", "set_id", "bound", "terms": [{"sign": ±1, "factors": [...]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityJson {
    pub id: String,
    /// `ks18`, `peres_mermin` or `mermin_star:N`.
    pub set_id: String,
    #[serde(default)]
    pub bound: Option<i64>,
    pub terms: Vec<TermJson>,
}

impl From<&InequalityExpr> for InequalityJson {
    fn from(e: &InequalityExpr) -> Self {
        InequalityJson {
            id: e.id.clone(),
            set_id: e.set_id.to_string(),
            bound: e.bound,
            terms: e
                .terms
                .iter()
                .map(|t| TermJson {
                    sign: t.sign.value(),
                    factors: t.factors.iter().map(|f| f.as_str().to_string()).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<InequalityJson> for InequalityExpr {
    type Error = Error;

    fn try_from(j: InequalityJson) -> Result<Self, Error> {
        let set_id: SetId = j.set_id.parse()?;
        let terms = j
            .terms
            .into_iter()
            .map(|t| {
                let factors = t.factors.into_iter().map(ObservableLabel::new).collect();
                Term::new(Sign::from_value(t.sign)?, factors)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        if terms.is_empty() {
            return Err(Error::InvalidArgument("inequality has no terms".into()));
        }
        Ok(InequalityExpr { id: j.id, set_id, terms, bound: j.bound })
    }
}

pub fn parse_inequality(text: &str) -> Result<InequalityExpr, CliError> {
    let j: InequalityJson = serde_json::from_str(text)?;
    Ok(j.try_into()?)
}

/// Tagged by `kind`. Complex numbers are `[re, im]` pairs; `entries` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateJson {
    Named { name: String },
    Ket { dim: usize, amplitudes: Vec<[f64; 2]> },
    Dm { dim: usize, entries: Vec<[f64; 2]> },
    Haar { dim: usize, seed: u64 },
}

fn complex(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl TryFrom<StateJson> for StateSpec {
    type Error = Error;

    fn try_from(j: StateJson) -> Result<Self, Error> {
        Ok(match j {
            StateJson::Named { name } => StateSpec::Named(name.parse()?),
            StateJson::Ket { dim, amplitudes } => {
                if amplitudes.len() != dim {
                    return Err(Error::InvalidArgument(format!(
                        "ket declares dim {dim} but has {} amplitudes",
                        amplitudes.len()
                    )));
                }
                StateSpec::Ket(StateVector::new(complex(&amplitudes))?)
            }
            StateJson::Dm { dim, entries } => {
                let m = ComplexMatrix::from_entries(dim, dim, complex(&entries))?;
                StateSpec::Density(DensityMatrix::new(m)?)
            }
            StateJson::Haar { dim, seed } => StateSpec::Haar { dim, seed },
        })
    }
}

impl From<&StateSpec> for StateJson {
    fn from(s: &StateSpec) -> Self {
        match s {
            StateSpec::Named(n) => StateJson::Named { name: n.to_string() },
            StateSpec::Ket(psi) => StateJson::Ket { dim: psi.dim(), amplitudes: pairs(psi.amplitudes()) },
            StateSpec::Density(rho) => StateJson::Dm { dim: rho.dim(), entries: pairs(rho.matrix().entries()) },
            StateSpec::Haar { dim, seed } => StateJson::Haar { dim: *dim, seed: *seed },
        }
    }
}

pub fn parse_state(text: &str) -> Result<StateSpec, CliError> {
    let j: StateJson = serde_json::from_str(text)?;
    Ok(j.try_into()?)
}

/// Short description used in reports: the name for named states, the kind otherwise.
pub fn describe_state(s: &StateSpec) -> String {
    match s {
        StateSpec::Named(n) => n.to_string(),
        StateSpec::Ket(psi) => format!("ket:{}", psi.dim()),
        StateSpec::Density(rho) => format!("dm:{}", rho.dim()),
        StateSpec::Haar { dim, seed } => format!("haar:{dim}:{seed}"),
    }
}

/// Resolve a named state if the text parses as one.
pub fn named_state(text: &str) -> Option<StateSpec> {
    text.parse::<NamedState>().ok().map(StateSpec::Named)
}

/// Substitution file: `{"P16": -1, "P26": -1}`.
pub fn parse_subs(text: &str) -> Result<BTreeMap<ObservableLabel, Sign>, CliError> {
    let raw: BTreeMap<String, i64> = serde_json::from_str(text)?;
    raw.into_iter()
        .map(|(k, v)| Ok((ObservableLabel::new(k), Sign::from_value(v)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermEstimateJson {
    pub estimate: f64,
    pub stderr: f64,
}

/// `{"inequality", "state", "seed", "shots_per_term", "terms": [{"estimate", "stderr"}], "lhs_estimate", "lhs_stderr"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReportJson {
    pub inequality: String,
    pub state: String,
    pub seed: u64,
    pub shots_per_term: u64,
    pub terms: Vec<TermEstimateJson>,
    pub lhs_estimate: f64,
    pub lhs_stderr: f64,
}

impl EstimateReportJson {
    pub fn new(inequality: &str, state: &str, r: &EstimateReport) -> Self {
        EstimateReportJson {
            inequality: inequality.to_string(),
            state: state.to_string(),
            seed: r.seed,
            shots_per_term: r.shots_per_term,
            terms: r
                .terms
                .iter()
                .map(|t| TermEstimateJson { estimate: t.estimate, stderr: t.standard_error })
                .collect(),
            lhs_estimate: r.lhs_estimate,
            lhs_stderr: r.lhs_standard_error,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctxkit_core::catalog_get;

    #[test]
    fn inequality_round_trip() {
        for (id, n) in [("ineq1", None), ("chsh8", None), ("mermin11", Some(5))] {
            let e = catalog_get(id, n).unwrap();
            let text = serde_json::to_string(&InequalityJson::from(&e)).unwrap();
            assert_eq!(parse_inequality(&text).unwrap(), e);
        }
    }

    #[test]
    fn bad_sign_is_rejected() {
        let text = r#"{"id":"x","set_id":"ks18","bound":null,"terms":[{"sign":2,"factors":["A12"]}]}"#;
        assert!(matches!(parse_inequality(text), Err(CliError::Core(Error::InvalidArgument(_)))));
    }

    #[test]
    fn state_forms() {
        let s = parse_state(r#"{"kind":"named","name":"singlet"}"#).unwrap();
        assert_eq!(s, StateSpec::Named(NamedState::Singlet));
        let s = parse_state(r#"{"kind":"ket","dim":2,"amplitudes":[[1,0],[0,0]]}"#).unwrap();
        assert!(matches!(s, StateSpec::Ket(_)));
        let s = parse_state(r#"{"kind":"dm","dim":2,"entries":[[0.5,0],[0,0],[0,0],[0.5,0]]}"#).unwrap();
        assert!(matches!(s, StateSpec::Density(_)));
        let s = parse_state(r#"{"kind":"haar","dim":4,"seed":9}"#).unwrap();
        assert_eq!(s, StateSpec::Haar { dim: 4, seed: 9 });
        let back = serde_json::to_string(&StateJson::from(&s)).unwrap();
        assert_eq!(back, r#"{"kind":"haar","dim":4,"seed":9}"#);
        assert!(parse_state(r#"{"kind":"ket","dim":3,"amplitudes":[[1,0]]}"#).is_err());
    }

    #[test]
    fn subs_file() {
        let m = parse_subs(r#"{"P16":-1,"P26":1}"#).unwrap();
        assert_eq!(m[&ObservableLabel::from("P16")], Sign::Minus);
        assert!(parse_subs(r#"{"P16":0}"#).is_err());
    }
}
