//! System descriptions: named observables and states over one Hilbert space
//! together with the contexts they generate.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contexts::{build_poset, context_of, Context, ContextPoset, PosetOptions, DEFAULT_POSET_CAP, DEFAULT_SEED};
use crate::daseinisation::EPS_STRICT;
use crate::error::{Error, Result};
use crate::ks::Entry;
use crate::linalg::{ComplexMatrix, HermitianMatrix, ProjectionMatrix};
use crate::states::{State, EPS_PROB};

/// A matrix given as `{"matrix": {...}}`, `{"real": [[...]]}` or `{"diag": [...]}`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ObservableJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<Vec<f64>>,
}

/// A density matrix or a state vector, promoted to `|ψ⟩⟨ψ|`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<Entry>>,
}

/// An explicit context: a list of atoms, an orthonormal basis, or the
/// algebra generated by a named observable.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ContextJson {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<ComplexMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ContextsJson {
    /// `"generate"`: one context per observable.
    Mode(String),
    Explicit(Vec<ContextJson>),
}

impl Default for ContextsJson {
    fn default() -> Self {
        ContextsJson::Mode("generate".into())
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OptionsJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poset_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_strict: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_prob: Option<f64>,
    /// Grid for the interval site.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemDescription {
    pub dim: usize,
    #[serde(default)]
    pub observables: Vec<ObservableJson>,
    #[serde(default)]
    pub states: Vec<StateJson>,
    #[serde(default)]
    pub contexts: ContextsJson,
    #[serde(default)]
    pub options: OptionsJson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub strict: f64,
    pub prob: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { strict: EPS_STRICT, prob: EPS_PROB }
    }
}

/// A validated system with its context poset built.
#[derive(Clone, Debug)]
pub struct System {
    pub dim: usize,
    pub observables: Vec<(String, HermitianMatrix)>,
    pub states: Vec<(String, State)>,
    pub poset: Arc<ContextPoset>,
    pub tolerances: Tolerances,
    pub grid: Option<Vec<f64>>,
}

fn complex_rows(rows: &[Vec<f64>]) -> Result<ComplexMatrix> {
    ComplexMatrix::from_real_rows(rows)
}

fn one_of<T>(what: &str, name: &str, opts: Vec<Option<T>>) -> Result<T> {
    let mut given: Vec<T> = opts.into_iter().flatten().collect();
    if given.len() != 1 {
        return Err(Error::Input(format!("{what} `{name}` needs exactly one of its matrix forms, found {}", given.len())));
    }
    Ok(given.pop().unwrap())
}

fn check_dim(dim: usize, found: usize) -> Result<()> {
    if dim == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: dim, found })
    }
}

impl ObservableJson {
    pub fn to_matrix(&self) -> Result<HermitianMatrix> {
        let m = one_of(
            "observable",
            &self.name,
            vec![
                self.matrix.clone().map(Ok),
                self.real.as_ref().map(|r| complex_rows(r)),
                self.diag.as_ref().map(|d| Ok(ComplexMatrix::diag(d))),
            ],
        )??;
        HermitianMatrix::new(m)
    }
}

fn vector(entries: &[Entry]) -> Vec<Complex64> {
    entries.iter().map(|&e| e.into()).collect()
}

impl StateJson {
    pub fn to_state(&self) -> Result<State> {
        if let Some(v) = &self.vector {
            if self.matrix.is_some() || self.real.is_some() {
                return Err(Error::Input(format!("state `{}` has both a vector and a matrix", self.name)));
            }
            return State::pure(&vector(v));
        }
        let m = one_of(
            "state",
            &self.name,
            vec![self.matrix.clone().map(Ok), self.real.as_ref().map(|r| complex_rows(r))],
        )??;
        State::new(HermitianMatrix::new(m)?)
    }
}

impl SystemDescription {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Validates names and dimensions and builds the poset. `seed` overrides
    /// the one in the options.
    pub fn build(&self, seed: Option<u64>) -> Result<System> {
        if self.dim == 0 || self.dim > 64 {
            return Err(Error::Input(format!("dimension {} out of range 1..=64", self.dim)));
        }
        let mut observables: Vec<(String, HermitianMatrix)> = Vec::new();
        for o in &self.observables {
            if observables.iter().any(|(n, _)| n == &o.name) {
                return Err(Error::Input(format!("duplicate observable name `{}`", o.name)));
            }
            let a = o.to_matrix()?;
            check_dim(self.dim, a.dim())?;
            observables.push((o.name.clone(), a));
        }
        let mut states: Vec<(String, State)> = Vec::new();
        for s in &self.states {
            if states.iter().any(|(n, _)| n == &s.name) {
                return Err(Error::Input(format!("duplicate state name `{}`", s.name)));
            }
            let st = s.to_state()?;
            check_dim(self.dim, st.dim())?;
            states.push((s.name.clone(), st));
        }
        let generators = match &self.contexts {
            ContextsJson::Mode(m) if m == "generate" => {
                observables.iter().map(|(n, a)| context_of(n.clone(), a)).collect::<Vec<_>>()
            }
            ContextsJson::Mode(m) => return Err(Error::Input(format!("unknown contexts mode `{m}`"))),
            ContextsJson::Explicit(list) => {
                let mut out: Vec<Context> = Vec::new();
                for c in list {
                    if out.iter().any(|d| d.label() == c.label) {
                        return Err(Error::Input(format!("duplicate context label `{}`", c.label)));
                    }
                    out.push(self.explicit_context(c, &observables)?);
                }
                out
            }
        };
        let opts = PosetOptions {
            cap: self.options.poset_cap.unwrap_or(DEFAULT_POSET_CAP),
            seed: seed.or(self.options.seed).unwrap_or(DEFAULT_SEED),
        };
        let poset = if generators.is_empty() {
            build_poset(vec![Context::trivial(self.dim)], &opts)?
        } else {
            build_poset(generators, &opts)?
        };
        let tolerances = Tolerances {
            strict: self.options.eps_strict.unwrap_or(EPS_STRICT),
            prob: self.options.eps_prob.unwrap_or(EPS_PROB),
        };
        Ok(System { dim: self.dim, observables, states, poset: Arc::new(poset), tolerances, grid: self.options.grid.clone() })
    }

    fn explicit_context(&self, c: &ContextJson, observables: &[(String, HermitianMatrix)]) -> Result<Context> {
        let forms = c.atoms.is_some() as usize + c.basis.is_some() as usize + c.observable.is_some() as usize;
        if forms != 1 {
            return Err(Error::Input(format!("context `{}` needs exactly one of atoms, basis, observable", c.label)));
        }
        if let Some(atoms) = &c.atoms {
            let ps = atoms
                .iter()
                .map(|m| {
                    check_dim(self.dim, m.dim())?;
                    ProjectionMatrix::new(HermitianMatrix::new(m.clone())?)
                })
                .collect::<Result<Vec<_>>>()?;
            return Context::new(c.label.clone(), ps);
        }
        if let Some(basis) = &c.basis {
            let vs: Vec<Vec<Complex64>> = basis.iter().map(|v| vector(v)).collect();
            for v in &vs {
                check_dim(self.dim, v.len())?;
            }
            return Context::from_basis(c.label.clone(), &vs);
        }
        let name = c.observable.as_ref().unwrap();
        let (_, a) = observables
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| Error::Input(format!("context `{}` names unknown observable `{name}`", c.label)))?;
        Ok(context_of(c.label.clone(), a))
    }
}

impl System {
    pub fn observable(&self, name: &str) -> Result<&HermitianMatrix> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| Error::Input(format!("unknown observable `{name}`")))
    }

    pub fn state(&self, name: &str) -> Result<&State> {
        self.states
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::Input(format!("unknown state `{name}`")))
    }

    pub fn context_index(&self, label: &str) -> Result<usize> {
        self.poset.index_of_label(label).ok_or_else(|| Error::Input(format!("unknown context `{label}`")))
    }
}
