//! Points of a finite fragment of the spectrum: one atom per context, chosen
//! naturally along inclusions. A configuration without points is a
//! Kochen–Specker set.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contexts::{build_poset, Context, ContextPoset, PosetOptions};
use crate::error::{Error, Result};

/// A choice of atom index for every context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCandidate {
    pub choice: BTreeMap<usize, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_visited: u64,
    pub contexts: usize,
    /// Every choice function was either explored or pruned by a violated
    /// inclusion.
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    PointFound(PointCandidate),
    NoPoint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KSCertificate {
    pub verdict: Verdict,
    pub stats: SearchStats,
}

impl KSCertificate {
    pub fn has_point(&self) -> bool {
        matches!(self.verdict, Verdict::PointFound(_))
    }

    pub fn to_json(&self, poset: &ContextPoset) -> CertificateJson {
        let (verdict, point) = match &self.verdict {
            Verdict::PointFound(p) => (
                "point_found",
                Some(p.choice.iter().map(|(&c, &a)| (poset.contexts()[c].label().to_string(), a)).collect()),
            ),
            Verdict::NoPoint => ("no_point", None),
        };
        CertificateJson { verdict: verdict.to_string(), point, stats: self.stats }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<BTreeMap<String, usize>>,
    pub stats: SearchStats,
}

/// Contexts ordered greedily: next is the one with most comparabilities to
/// those already placed, then by total comparabilities, then by index.
fn search_order(poset: &ContextPoset) -> Vec<usize> {
    let n = poset.len();
    let cmp = |c: usize, d: usize| c != d && (poset.leq(c, d) || poset.leq(d, c));
    let degree: Vec<usize> = (0..n).map(|c| (0..n).filter(|&d| cmp(c, d)).count()).collect();
    let mut placed = vec![false; n];
    let mut linked = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let c = (0..n)
            .filter(|&c| !placed[c])
            .max_by_key(|&c| (linked[c], degree[c], std::cmp::Reverse(c)))
            .unwrap();
        placed[c] = true;
        order.push(c);
        for (d, l) in linked.iter_mut().enumerate() {
            if cmp(c, d) {
                *l += 1;
            }
        }
    }
    order
}

/// Whether choosing `atom` at `c` agrees with the choices made so far.
fn consistent(poset: &ContextPoset, choice: &[Option<usize>], c: usize, atom: usize) -> bool {
    choice.iter().enumerate().all(|(d, &ch)| match ch {
        None => true,
        Some(b) if poset.leq(d, c) && d != c => poset.refinement(d, c).unwrap()[atom] == b,
        Some(b) if poset.leq(c, d) && d != c => poset.refinement(c, d).unwrap()[b] == atom,
        Some(_) => true,
    })
}

/// Depth-first search for a natural choice of atoms, deterministic in the
/// poset's ordering.
pub fn find_point(poset: &ContextPoset) -> KSCertificate {
    let order = search_order(poset);
    let mut choice = vec![None; poset.len()];
    let mut nodes = 0u64;
    let found = search(poset, &order, 0, &mut choice, &mut nodes);
    let stats = SearchStats { nodes_visited: nodes, contexts: poset.len(), exhaustive: true };
    let verdict = if found {
        Verdict::PointFound(PointCandidate {
            choice: choice.iter().enumerate().map(|(c, a)| (c, a.unwrap())).collect(),
        })
    } else {
        Verdict::NoPoint
    };
    KSCertificate { verdict, stats }
}

fn search(poset: &ContextPoset, order: &[usize], i: usize, choice: &mut [Option<usize>], nodes: &mut u64) -> bool {
    if i == order.len() {
        return true;
    }
    let c = order[i];
    for atom in 0..poset.contexts()[c].num_atoms() {
        *nodes += 1;
        if consistent(poset, choice, c, atom) {
            choice[c] = Some(atom);
            if search(poset, order, i + 1, choice, nodes) {
                return true;
            }
            choice[c] = None;
        }
    }
    false
}

/// Naturality on every comparable pair. A missing context is an error.
pub fn verify_point(poset: &ContextPoset, cand: &PointCandidate) -> Result<bool> {
    let mut choice = Vec::with_capacity(poset.len());
    for c in 0..poset.len() {
        let a = *cand.choice.get(&c).ok_or(Error::IncompleteChoice(c))?;
        let k = poset.contexts()[c].num_atoms();
        if a >= k {
            return Err(Error::IndexOutOfRange { index: a, len: k });
        }
        choice.push(a);
    }
    for c in 0..poset.len() {
        for d in poset.up(c) {
            if poset.refinement(c, d).unwrap()[choice[d]] != choice[c] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A vector entry: a real number or `[re, im]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// `{"dim": n, "bases": [[vector, ...], ...]}`; vectors are normalised on load.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KsConfig {
    pub dim: usize,
    pub bases: Vec<Vec<Vec<Entry>>>,
}

impl KsConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// One context per basis, labelled `B0`, `B1`, …
    pub fn contexts(&self) -> Result<Vec<Context>> {
        if self.bases.is_empty() {
            return Err(Error::Input("configuration has no bases".into()));
        }
        self.bases
            .iter()
            .enumerate()
            .map(|(i, basis)| {
                if basis.len() != self.dim {
                    return Err(Error::InvalidContext(format!(
                        "basis {i} has {} vectors, expected {}",
                        basis.len(),
                        self.dim
                    )));
                }
                let vs: Vec<Vec<Complex64>> = basis
                    .iter()
                    .map(|v| {
                        if v.len() != self.dim {
                            Err(Error::DimensionMismatch { expected: self.dim, found: v.len() })
                        } else {
                            Ok(v.iter().map(|&e| e.into()).collect())
                        }
                    })
                    .collect::<Result<_>>()?;
                Context::from_basis(format!("B{i}"), &vs)
            })
            .collect()
    }

    pub fn poset(&self, opts: &PosetOptions) -> Result<ContextPoset> {
        build_poset(self.contexts()?, opts)
    }
}
