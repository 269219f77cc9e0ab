//! The Boolean lattices `L_C`, their generators `D_a`, and the external
//! spectrum: monotone assignments of an `L_C` element to every context.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::contexts::{Context, ContextPoset, UpperSet};
use crate::error::{Error, Result};
use crate::lattice::{Cover, FiniteLattice, Site};
use crate::linalg::{HermitianMatrix, EPS_ORDER};

/// A set of atoms of one context, bit `i` ↔ atom `i`.
pub type AtomSet = u64;

/// Default cap on the number of opens [`SpectralOpen::enumerate`] produces.
pub const DEFAULT_ENUM_CAP: usize = 100_000;

pub fn full_set(k: usize) -> AtomSet {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// An element of `L_C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeElement {
    pub context: usize,
    pub atoms: AtomSet,
}

/// `D_a` in `L_C`: the atoms on which `a` has a positive coefficient.
pub fn generator(c: &Context, a: &HermitianMatrix) -> Result<AtomSet> {
    let coefs = c.coefficients(a)?;
    Ok(coefs.iter().enumerate().filter(|(_, &l)| l > EPS_ORDER).fold(0, |m, (i, _)| m | 1 << i))
}

pub fn generator_at(poset: &ContextPoset, c: usize, a: &HermitianMatrix) -> Result<LatticeElement> {
    Ok(LatticeElement { context: c, atoms: generator(poset.context(c)?, a)? })
}

/// Image of `x ⊆ atoms(C)` in `L_D` for `C ≤ D`, given the refinement map
/// (parent `C`-atom of each `D`-atom).
pub fn embed_with(refinement: &[usize], x: AtomSet) -> AtomSet {
    refinement
        .iter()
        .enumerate()
        .filter(|(_, &p)| x >> p & 1 == 1)
        .fold(0, |m, (q, _)| m | 1 << q)
}

/// `L_C ↪ L_D`: the `D`-atoms below some atom of `x`.
pub fn embed(poset: &ContextPoset, x: LatticeElement, d: usize) -> Result<LatticeElement> {
    poset.check_index(x.context)?;
    poset.check_index(d)?;
    let map = poset
        .refinement(x.context, d)
        .ok_or(Error::NotComparable { lower: x.context, upper: d })?;
    Ok(LatticeElement { context: d, atoms: embed_with(map, x.atoms) })
}

/// `x ◁ U` in `L_C`. With finite spectrum, `D_{a−q} = D_a` once `q` is
/// below the smallest positive coefficient, so the cover is `x ≤ ⋁U`.
pub fn spectrum_cover(x: AtomSet, u: &[AtomSet]) -> bool {
    x & !u.iter().fold(0, |m, y| m | y) == 0
}

/// `L_C` for a context with `k ≤ 6` atoms; element index = atom bitmask.
pub fn spectral_lattice(k: usize) -> FiniteLattice {
    FiniteLattice::powerset(k)
}

/// `L_C` with the spectrum cover as a site.
pub fn spectral_site(k: usize) -> Result<Site> {
    if k > 6 {
        return Err(Error::EnumerationTooLarge { size: 1 << k.min(63), cap: 64 });
    }
    let n = 1usize << k;
    Site::new(spectral_lattice(k), Cover::Generated((0..n as u64).collect()))
}

/// An element of `𝒪(Σ)(ℂ·1)`: a monotone choice of `L_C` element for every
/// context `C` of the poset.
#[derive(Clone, Debug)]
pub struct SpectralOpen {
    poset: Arc<ContextPoset>,
    values: Vec<AtomSet>,
}

impl PartialEq for SpectralOpen {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.poset, &other.poset) && self.values == other.values
    }
}

impl Eq for SpectralOpen {}

impl SpectralOpen {
    /// Checks ranges and monotonicity.
    pub fn new(poset: Arc<ContextPoset>, values: Vec<AtomSet>) -> Result<Self> {
        if values.len() != poset.len() {
            return Err(Error::DimensionMismatch { expected: poset.len(), found: values.len() });
        }
        for (c, &v) in values.iter().enumerate() {
            let k = poset.contexts()[c].num_atoms();
            if v & !full_set(k) != 0 {
                return Err(Error::Input(format!(
                    "value at `{}` names atoms beyond its {k} atoms",
                    poset.contexts()[c].label()
                )));
            }
        }
        let open = Self { poset, values };
        if let Some((c, d)) = open.monotonicity_violation() {
            return Err(Error::Input(format!(
                "not monotone: value at `{}` does not embed into the value at `{}`",
                open.poset.contexts()[c].label(),
                open.poset.contexts()[d].label()
            )));
        }
        Ok(open)
    }

    pub fn top(poset: &Arc<ContextPoset>) -> Self {
        let values = poset.contexts().iter().map(|c| full_set(c.num_atoms())).collect();
        Self { poset: poset.clone(), values }
    }

    pub fn bottom(poset: &Arc<ContextPoset>) -> Self {
        Self { poset: poset.clone(), values: vec![0; poset.len()] }
    }

    pub fn poset(&self) -> &Arc<ContextPoset> {
        &self.poset
    }

    pub fn values(&self) -> &[AtomSet] {
        &self.values
    }

    pub fn value(&self, c: usize) -> Result<AtomSet> {
        self.values.get(c).copied().ok_or(Error::IndexOutOfRange { index: c, len: self.values.len() })
    }

    fn monotonicity_violation(&self) -> Option<(usize, usize)> {
        let p = &self.poset;
        for c in 0..p.len() {
            for d in p.up(c) {
                let map = p.refinement(c, d).expect("c ≤ d");
                if embed_with(map, self.values[c]) & !self.values[d] != 0 {
                    return Some((c, d));
                }
            }
        }
        None
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violation().is_none()
    }

    fn same_poset(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.poset, &other.poset) {
            Ok(())
        } else {
            Err(Error::PosetMismatch)
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(AtomSet, AtomSet) -> AtomSet) -> Result<Self> {
        self.same_poset(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { poset: self.poset.clone(), values })
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a & b)
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a | b)
    }

    /// `(u → v)(C)`: the largest `x ∈ L_C` with
    /// `embed(x, D) ∧ u(D) ≤ v(D)` for all `D ≥ C`.
    ///
    /// `embed` preserves joins, so `x` qualifies iff each of its atoms does
    /// and the answer is the set of qualifying atoms.
    pub fn implies(&self, other: &Self) -> Result<Self> {
        self.same_poset(other)?;
        let p = &self.poset;
        let values = (0..p.len())
            .map(|c| {
                let k = p.contexts()[c].num_atoms();
                (0..k)
                    .filter(|&atom| {
                        p.up(c).into_iter().all(|d| {
                            let x = embed_with(p.refinement(c, d).unwrap(), 1 << atom);
                            x & self.values[d] & !other.values[d] == 0
                        })
                    })
                    .fold(0, |m, atom| m | 1 << atom)
            })
            .collect();
        Ok(Self { poset: p.clone(), values })
    }

    pub fn not(&self) -> Self {
        self.implies(&Self::bottom(&self.poset)).expect("same poset")
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.same_poset(other)?;
        Ok(self.values.iter().zip(&other.values).all(|(&a, &b)| a & !b == 0))
    }

    /// Every open of the poset (monotone families), up to `cap` of them.
    pub fn enumerate(poset: &Arc<ContextPoset>, cap: usize) -> Result<Vec<Self>> {
        let p = poset.as_ref();
        // a linear extension: fewer contexts below first
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by_key(|&c| ((0..p.len()).filter(|&b| p.leq(b, c)).count(), c));
        let mut out = Vec::new();
        let mut values = vec![0; p.len()];
        enumerate_rec(p, &order, 0, &mut values, &mut out, cap)?;
        Ok(out.into_iter().map(|values| Self { poset: poset.clone(), values }).collect())
    }

    pub fn to_json(&self) -> SpectralOpenJson {
        let values = self
            .poset
            .contexts()
            .iter()
            .zip(&self.values)
            .map(|(c, &v)| (c.label().to_string(), atom_list(v)))
            .collect();
        SpectralOpenJson { values }
    }

    /// Missing labels mean the empty set.
    pub fn from_json(poset: &Arc<ContextPoset>, json: &SpectralOpenJson) -> Result<Self> {
        let mut values = vec![0; poset.len()];
        for (label, atoms) in &json.values {
            let c = poset
                .index_of_label(label)
                .ok_or_else(|| Error::Input(format!("unknown context `{label}`")))?;
            for &a in atoms {
                if a >= 64 {
                    return Err(Error::IndexOutOfRange { index: a, len: 64 });
                }
                values[c] |= 1 << a;
            }
        }
        Self::new(poset.clone(), values)
    }

    /// One row per context, grouped by height in the Hasse diagram.
    pub fn render_table(&self) -> String {
        let p = &self.poset;
        let height = heights(p);
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by_key(|&c| (height[c], c));
        let width = p.contexts().iter().map(|c| c.label().chars().count()).max().unwrap_or(7).max(7);
        let mut out = String::new();
        let _ = writeln!(out, "{:<4} {:<width$}  {:<6}  atoms", "lvl", "context", "value");
        for c in order {
            let ctx = &p.contexts()[c];
            let v = self.values[c];
            let tag = if v == 0 {
                "⊥"
            } else if v == full_set(ctx.num_atoms()) {
                "⊤"
            } else {
                ""
            };
            let atoms: Vec<String> = atom_list(v).iter().map(|a| a.to_string()).collect();
            let _ = writeln!(
                out,
                "{:<4} {:<width$}  {:<6}  {{{}}} of {}",
                height[c],
                ctx.label(),
                tag,
                atoms.join(","),
                ctx.num_atoms()
            );
        }
        out
    }
}

fn enumerate_rec(
    p: &ContextPoset,
    order: &[usize],
    i: usize,
    values: &mut Vec<AtomSet>,
    out: &mut Vec<Vec<AtomSet>>,
    cap: usize,
) -> Result<()> {
    if i == order.len() {
        if out.len() >= cap {
            return Err(Error::EnumerationTooLarge { size: out.len() + 1, cap });
        }
        out.push(values.clone());
        return Ok(());
    }
    let c = order[i];
    let k = p.contexts()[c].num_atoms();
    if k > 20 {
        return Err(Error::EnumerationTooLarge { size: k, cap: 20 });
    }
    let forced = order[..i]
        .iter()
        .filter(|&&b| p.leq(b, c))
        .fold(0, |m, &b| m | embed_with(p.refinement(b, c).unwrap(), values[b]));
    let free = full_set(k) & !forced;
    // all subsets of the free atoms
    let mut sub = free;
    loop {
        values[c] = forced | sub;
        enumerate_rec(p, order, i + 1, values, out, cap)?;
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
    Ok(())
}

/// Length of the longest chain from the bottom to each context.
pub fn heights(p: &ContextPoset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&c| (0..p.len()).filter(|&b| p.leq(b, c)).count());
    let mut h = vec![0; p.len()];
    for &c in &order {
        h[c] = (0..p.len()).filter(|&b| b != c && p.leq(b, c)).map(|b| h[b] + 1).max().unwrap_or(0);
    }
    h
}

pub fn atom_list(v: AtomSet) -> Vec<usize> {
    (0..64).filter(|i| v >> i & 1 == 1).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralOpenJson {
    pub values: BTreeMap<String, Vec<usize>>,
}

/// `π*_Σ(↑d)`: ⊤ on `↑d`, ⊥ elsewhere.
pub fn pi_sigma_star(poset: &Arc<ContextPoset>, d: usize) -> Result<SpectralOpen> {
    poset.check_index(d)?;
    Ok(pi_sigma_star_of(poset, &poset.up(d).into_iter().collect()))
}

/// `π*_Σ` on an arbitrary upper set of contexts.
pub fn pi_sigma_star_of(poset: &Arc<ContextPoset>, members: &BTreeSet<usize>) -> SpectralOpen {
    let values = poset
        .contexts()
        .iter()
        .enumerate()
        .map(|(c, ctx)| if members.contains(&c) { full_set(ctx.num_atoms()) } else { 0 })
        .collect();
    SpectralOpen { poset: poset.clone(), values }
}

/// `π*_Σ` on an element of Ω(base).
pub fn pi_sigma_star_upper(poset: &Arc<ContextPoset>, s: &UpperSet) -> SpectralOpen {
    pi_sigma_star_of(poset, s.members())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{build_poset, context_of, PosetOptions};
    use crate::lattice::{regular_ideals, well_inside};
    use crate::linalg::tests::hermitian_of_dim;
    use crate::linalg::{eigen, ProjectionMatrix};
    use proptest::prelude::*;

    fn sx() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn v_poset() -> Arc<ContextPoset> {
        let z = context_of("Cz", &HermitianMatrix::diag(&[1.0, -1.0]));
        let x = context_of("Cx", &sx());
        Arc::new(build_poset(vec![z, x], &PosetOptions::default()).unwrap())
    }

    fn dim3_poset() -> Arc<ContextPoset> {
        let coarse = context_of("coarse", &HermitianMatrix::diag(&[1.0, 1.0, 2.0]));
        let fine = context_of("fine", &HermitianMatrix::diag(&[1.0, 2.0, 3.0]));
        let rot = HermitianMatrix::from_real_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let other = context_of("other", &rot);
        Arc::new(build_poset(vec![coarse, fine, other], &PosetOptions::default()).unwrap())
    }

    #[test]
    fn generator_examples() {
        let c = context_of("d", &HermitianMatrix::diag(&[1.0, -1.0]));
        assert_eq!(generator(&c, &HermitianMatrix::identity(2)).unwrap(), 0b11);
        let p = c.atoms()[0].hermitian().scale(-1.0);
        assert_eq!(generator(&c, &p).unwrap(), 0);
        let d = generator(&c, &HermitianMatrix::diag(&[1.0, -1.0])).unwrap();
        assert_eq!(d.count_ones(), 1);
        assert!(c.atoms()[d.trailing_zeros() as usize].distance(&ProjectionMatrix::new(HermitianMatrix::diag(&[1.0, 0.0])).unwrap()) < 1e-9);
        assert!(matches!(generator(&c, &sx()), Err(Error::NotInContext { .. })));
    }

    #[test]
    fn embed_examples() {
        let p = dim3_poset();
        let coarse = p.index_of_label("coarse").unwrap();
        let fine = p.index_of_label("fine").unwrap();
        let top = LatticeElement { context: coarse, atoms: 0b11 };
        assert_eq!(embed(&p, top, coarse).unwrap(), top);
        assert_eq!(embed(&p, top, fine).unwrap().atoms, 0b111);
        // the rank-two atom e₁+e₂ splits into two fine atoms
        let ctx = &p.contexts()[coarse];
        let big = ctx.atoms().iter().position(|a| a.rank() == 2).unwrap();
        let e = embed(&p, LatticeElement { context: coarse, atoms: 1 << big }, fine).unwrap();
        assert_eq!(e.atoms.count_ones(), 2);
        let other = p.index_of_label("other").unwrap();
        assert!(matches!(
            embed(&p, LatticeElement { context: fine, atoms: 1 }, other),
            Err(Error::NotComparable { .. })
        ));
    }

    #[test]
    fn spectrum_cover_examples() {
        assert!(spectrum_cover(0b01, &[0b01]));
        assert!(spectrum_cover(0b111, &[0b001, 0b010, 0b100]));
        assert!(!spectrum_cover(0b01, &[0b10]));
    }

    #[test]
    fn spectral_sites_present_boolean_frames() {
        for k in 1..=3 {
            let site = spectral_site(k).unwrap();
            let frame = crate::lattice::frame_of_site(&site).unwrap();
            assert_eq!(frame.len(), 1 << k);
            // every principal ideal is regular, so RIdl(L_C) ≅ L_C
            assert_eq!(regular_ideals(site.lattice()).unwrap().ideals.len(), 1 << k);
        }
    }

    #[test]
    fn heyting_examples() {
        let p = v_poset();
        let cz = p.index_of_label("Cz").unwrap();
        let top = SpectralOpen::top(&p);
        let bot = SpectralOpen::bottom(&p);
        let mut values = vec![0; p.len()];
        values[cz] = 0b11;
        let u = SpectralOpen::new(p.clone(), values).unwrap();
        assert_eq!(u.implies(&u).unwrap(), top);
        assert_eq!(top.meet(&u).unwrap(), u);
        assert_eq!(bot.join(&u).unwrap(), u);
        let nu = u.not();
        assert_eq!(nu.value(p.bottom()).unwrap(), 0);
        assert_ne!(u.join(&nu).unwrap(), top);
        let other = v_poset();
        assert!(matches!(u.meet(&SpectralOpen::top(&other)), Err(Error::PosetMismatch)));
    }

    #[test]
    fn pi_sigma_star_examples() {
        let p = v_poset();
        assert_eq!(pi_sigma_star(&p, p.bottom()).unwrap(), SpectralOpen::top(&p));
        let cz = p.index_of_label("Cz").unwrap();
        let pz = pi_sigma_star(&p, cz).unwrap();
        for c in 0..p.len() {
            assert_eq!(pz.value(c).unwrap() != 0, c == cz);
        }
        assert!(pz.is_monotone());
        assert!(matches!(pi_sigma_star(&p, 7), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn pi_sigma_star_preserves_meets_and_joins() {
        for p in [v_poset(), dim3_poset()] {
            for d in 0..p.len() {
                for e in 0..p.len() {
                    let ud: BTreeSet<usize> = p.up(d).into_iter().collect();
                    let ue: BTreeSet<usize> = p.up(e).into_iter().collect();
                    let (a, b) = (pi_sigma_star(&p, d).unwrap(), pi_sigma_star(&p, e).unwrap());
                    assert_eq!(a.meet(&b).unwrap(), pi_sigma_star_of(&p, &(&ud & &ue)));
                    assert_eq!(a.join(&b).unwrap(), pi_sigma_star_of(&p, &(&ud | &ue)));
                }
            }
        }
    }

    /// `(u → v)(C)` by descending search over all of `L_C`.
    fn implies_oracle(u: &SpectralOpen, v: &SpectralOpen) -> Vec<AtomSet> {
        let p = u.poset();
        (0..p.len())
            .map(|c| {
                let k = p.contexts()[c].num_atoms();
                let ok = |x: AtomSet| {
                    p.up(c).into_iter().all(|d| {
                        embed_with(p.refinement(c, d).unwrap(), x) & u.values()[d] & !v.values()[d] == 0
                    })
                };
                let mut cands: Vec<AtomSet> = (0..=full_set(k)).collect();
                cands.sort_by_key(|x| std::cmp::Reverse(x.count_ones()));
                let best = cands.into_iter().find(|&x| ok(x)).unwrap();
                // the largest one must dominate every qualifying element
                for x in 0..=full_set(k) {
                    if ok(x) {
                        assert_eq!(x & !best, 0);
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn frame_laws_exhaustively() {
        for p in [v_poset(), dim3_poset()] {
            let opens = SpectralOpen::enumerate(&p, DEFAULT_ENUM_CAP).unwrap();
            assert!(opens.iter().all(SpectralOpen::is_monotone));
            let sample: Vec<&SpectralOpen> = opens.iter().step_by((opens.len() / 40).max(1)).collect();
            for &x in &sample {
                let big_join = opens.iter().fold(SpectralOpen::bottom(&p), |acc, y| acc.join(y).unwrap());
                let distributed = opens
                    .iter()
                    .fold(SpectralOpen::bottom(&p), |acc, y| acc.join(&x.meet(y).unwrap()).unwrap());
                assert_eq!(x.meet(&big_join).unwrap(), distributed);
                for &y in &sample {
                    let imp = x.implies(y).unwrap();
                    assert!(imp.is_monotone());
                    assert_eq!(imp.values(), implies_oracle(x, y).as_slice());
                    for &z in &sample {
                        assert_eq!(z.leq(&imp).unwrap(), z.meet(x).unwrap().leq(y).unwrap());
                        assert_eq!(
                            x.meet(&y.join(z).unwrap()).unwrap(),
                            x.meet(y).unwrap().join(&x.meet(z).unwrap()).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn v_poset_has_seventeen_opens() {
        assert_eq!(SpectralOpen::enumerate(&v_poset(), DEFAULT_ENUM_CAP).unwrap().len(), 17);
    }

    #[test]
    fn single_context_spectrum_is_a_powerset() {
        let c = context_of("C", &HermitianMatrix::diag(&[1.0, 2.0, 3.0]));
        let p = Arc::new(build_poset(vec![c], &PosetOptions::default()).unwrap());
        let ci = p.index_of_label("C").unwrap();
        let opens = SpectralOpen::enumerate(&p, DEFAULT_ENUM_CAP).unwrap();
        let above: BTreeSet<AtomSet> = opens.iter().map(|u| u.value(ci).unwrap()).collect();
        assert_eq!(above.len(), 8);
    }

    #[test]
    fn json_round_trip() {
        let p = dim3_poset();
        let fine = p.index_of_label("fine").unwrap();
        let u = pi_sigma_star(&p, fine).unwrap();
        let text = serde_json::to_string(&u.to_json()).unwrap();
        let back = SpectralOpen::from_json(&p, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, u);
        let bad = SpectralOpenJson { values: [("trivial".to_string(), vec![0])].into_iter().collect() };
        assert!(SpectralOpen::from_json(&p, &bad).is_err());
        assert!(u.render_table().contains("fine"));
    }

    fn coefficient_vectors(k: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (proptest::collection::vec(-2.0f64..2.0, k), proptest::collection::vec(-2.0f64..2.0, k))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn generator_relations((a, b) in coefficient_vectors(4)) {
            let c = context_of("C", &HermitianMatrix::diag(&[1.0, 2.0, 3.0, 4.0]));
            let el = |v: &[f64]| generator(&c, &c.span_element(v)).unwrap();
            let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
            let sq: Vec<f64> = b.iter().map(|x| -x * x).collect();
            prop_assert_eq!(el(&[1.0; 4]), 0b1111);
            prop_assert_eq!(el(&a) & el(&neg(&a)), 0);
            prop_assert_eq!(el(&sq), 0);
            prop_assert_eq!(el(&sum) & !(el(&a) | el(&b)), 0);
            prop_assert_eq!(el(&prod), (el(&a) & el(&b)) | (el(&neg(&a)) & el(&neg(&b))));
        }

        #[test]
        fn finite_spectrum_collapse(a in hermitian_of_dim(3)) {
            let c = context_of("a", &a);
            let e = eigen(&a);
            let d_a = generator(&c, &a).unwrap();
            let positive: Vec<f64> = e.values.iter().copied().filter(|&l| l > 1e-6).collect();
            prop_assume!(!positive.is_empty());
            let gap = positive.iter().copied().fold(f64::INFINITY, f64::min);
            for t in [0.05, 0.25, 0.5, 0.9] {
                prop_assert_eq!(generator(&c, &a.shift(t * gap)).unwrap(), d_a);
            }
            let above = generator(&c, &a.shift(gap * 1.01)).unwrap();
            prop_assert!(above & !d_a == 0 && above != d_a);
        }

        #[test]
        fn well_inside_matches_shifted_generators((a, b) in coefficient_vectors(3)) {
            // D_b ≪ D_a iff D_b ≤ D_{a−q} for some q > 0 (q below half the gap)
            let c = context_of("C", &HermitianMatrix::diag(&[1.0, 2.0, 3.0]));
            let lat = spectral_lattice(3);
            let el = |v: &[f64]| generator(&c, &c.span_element(v)).unwrap();
            let gap = a.iter().map(|x| x.abs()).filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
            let shifted: Vec<f64> = a.iter().map(|x| x - gap / 2.0).collect();
            let lhs = well_inside(&lat, el(&b) as usize, el(&a) as usize);
            prop_assert_eq!(lhs, el(&b) & !el(&shifted) == 0);
        }
    }
}
