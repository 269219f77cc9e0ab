//! Density-matrix states, their restrictions to contexts, and the pairing of
//! a state with a proposition `a ∈ (r, s)` as a truth value in Ω.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::contexts::{Context, ContextPoset, UpperSet};
use crate::daseinisation::{inner_outer, EPS_STRICT};
use crate::error::{Error, Result};
use crate::interval::RationalInterval;
use crate::linalg::{eigen, vector_norm, ComplexMatrix, HermitianMatrix, EPS_ORDER};
use crate::spectrum::{AtomSet, SpectralOpen};

/// Slack for "probability one".
pub const EPS_PROB: f64 = 1e-9;
/// Probabilities in `(1 − NEAR_MISS, 1 − EPS_PROB)` are reported.
pub const NEAR_MISS: f64 = 1e-6;

/// A density matrix: positive semidefinite with unit trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct State {
    rho: HermitianMatrix,
}

impl State {
    pub fn new(rho: HermitianMatrix) -> Result<Self> {
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("trace is {tr}, not 1")));
        }
        let min = eigen(&rho).values[0];
        if min < -EPS_ORDER {
            return Err(Error::InvalidState(format!("not positive: smallest eigenvalue {min:e}")));
        }
        Ok(Self { rho })
    }

    /// `|ψ⟩⟨ψ|` for a vector, normalised first.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let n = vector_norm(psi);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let unit: Vec<Complex64> = psi.iter().map(|z| z / n).collect();
        Self::new(HermitianMatrix::new(ComplexMatrix::outer(&unit))?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { rho: HermitianMatrix::identity(dim).scale(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &HermitianMatrix {
        &self.rho
    }

    /// `tr(ρa)`
    pub fn expectation(&self, a: &HermitianMatrix) -> f64 {
        self.rho.trace_product(a)
    }
}

/// The restriction of a state to one context: a probability on its atoms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContextValuation {
    pub context: usize,
    /// `tr(ρp)` for each atom in order.
    pub atom_weights: Vec<f64>,
}

impl ContextValuation {
    /// `μ(x) = Σ_{p ∈ x} tr(ρp)`, summed in atom order.
    pub fn value(&self, x: AtomSet) -> f64 {
        self.atom_weights
            .iter()
            .enumerate()
            .filter(|(i, _)| x >> i & 1 == 1)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn is_one(&self, x: AtomSet) -> bool {
        self.value(x) >= 1.0 - EPS_PROB
    }
}

pub fn valuation(rho: &State, poset: &ContextPoset, c: usize) -> Result<ContextValuation> {
    let ctx = poset.context(c)?;
    Ok(ContextValuation { context: c, atom_weights: atom_weights(rho, ctx)? })
}

pub fn atom_weights(rho: &State, c: &Context) -> Result<Vec<f64>> {
    if rho.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: rho.dim() });
    }
    Ok(c.atoms().iter().map(|p| rho.expectation(p.hermitian())).collect())
}

/// Whether the stage `c` forces `μ_ρ(u) = 1`: `μ_D(u(D)) = 1` at every `D ≥ c`.
pub fn state_subobject_membership(rho: &State, u: &SpectralOpen, c: usize) -> Result<bool> {
    let poset = u.poset();
    poset.check_index(c)?;
    for d in poset.up(c) {
        if !valuation(rho, poset, d)?.is_one(u.value(d)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A probability that came out within the near-miss band below one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearMiss {
    pub context: String,
    pub which: &'static str,
    pub probability: f64,
    pub tolerance: f64,
}

impl std::fmt::Display for NearMiss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "context `{}`: {} projection has probability {} (within {NEAR_MISS:e} of 1 but not within {:e})",
            self.context, self.which, self.probability, self.tolerance
        )
    }
}

#[derive(Clone, Debug)]
pub struct Pairing {
    pub truth: UpperSet,
    pub near_misses: Vec<NearMiss>,
}

/// `⟨a ∈ (r, s), ρ⟩` at stage `base`: the contexts `C ≥ base` where both
/// `P_C = Σ{p : λ_p > r}` and `Q_C = Σ{p : μ_p < s}` have probability one.
pub fn pair(
    a: &HermitianMatrix,
    iv: &RationalInterval,
    rho: &State,
    poset: &Arc<ContextPoset>,
    base: usize,
) -> Result<Pairing> {
    pair_with(a, iv, rho, poset, base, EPS_STRICT, EPS_PROB)
}

/// [`pair`] with explicit tie and probability tolerances.
pub fn pair_with(
    a: &HermitianMatrix,
    iv: &RationalInterval,
    rho: &State,
    poset: &Arc<ContextPoset>,
    base: usize,
    eps_strict: f64,
    eps_prob: f64,
) -> Result<Pairing> {
    poset.check_index(base)?;
    if a.dim() != poset.dim() {
        return Err(Error::DimensionMismatch { expected: poset.dim(), found: a.dim() });
    }
    if rho.dim() != poset.dim() {
        return Err(Error::DimensionMismatch { expected: poset.dim(), found: rho.dim() });
    }
    let mut members = BTreeSet::new();
    let mut near_misses = Vec::new();
    for c in poset.up(base) {
        let ctx = &poset.contexts()[c];
        let prof = inner_outer(a, ctx)?;
        let mut lower = 0;
        let mut upper = 0;
        for i in 0..ctx.num_atoms() {
            if !iv.has_finite_lo() || prof.lower[i] - iv.lo() > eps_strict {
                lower |= 1 << i;
            }
            if !iv.has_finite_hi() || iv.hi() - prof.upper[i] > eps_strict {
                upper |= 1 << i;
            }
        }
        let v = ContextValuation { context: c, atom_weights: atom_weights(rho, ctx)? };
        let mut ok = true;
        for (which, set) in [("lower", lower), ("upper", upper)] {
            let prob = v.value(set);
            if prob < 1.0 - eps_prob {
                ok = false;
                if prob > 1.0 - NEAR_MISS {
                    near_misses.push(NearMiss { context: ctx.label().to_string(), which, probability: prob, tolerance: eps_prob });
                }
            }
        }
        if ok {
            members.insert(c);
        }
    }
    let truth = UpperSet::new(poset, base, members)?;
    Ok(Pairing { truth, near_misses })
}

/// Recovers the expectation functional on each context from the valuations:
/// for `x = Σ λ_p p` in context `C`, `ρ'(x) = Σ λ_p μ_C({p})`.
pub fn quasi_state_expectation(rho: &State, c: &Context, x: &HermitianMatrix) -> Result<f64> {
    let coefs = c.coefficients(x)?;
    let w = atom_weights(rho, c)?;
    Ok(coefs.iter().zip(&w).map(|(l, m)| l * m).sum())
}
