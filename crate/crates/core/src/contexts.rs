//! Contexts (commutative unital *-subalgebras given by their atoms), the
//! coarsening order between them, finite intersection-closed posets of
//! contexts, and the upper sets that serve as truth values.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    eigen, inner, vector_norm, ComplexMatrix, HermitianMatrix, ProjectionMatrix, CLUSTER_REL,
    EPS_HERM,
};

/// Projector distance below which two atoms are the same.
pub const ATOM_EQ_TOL: f64 = 1e-7;
/// Default cap on the number of contexts in a generated poset.
pub const DEFAULT_POSET_CAP: usize = 512;
/// Default cap on `|↑C|` when enumerating Ω(C).
pub const DEFAULT_OMEGA_CAP: usize = 20;
/// Default seed for the generic-element draw in [`intersect`].
pub const DEFAULT_SEED: u64 = 0x5eed_b0b5;

const GENERIC_ATTEMPTS: usize = 64;

/// An orthogonal decomposition of the identity into nonzero projections.
#[derive(Clone, Debug)]
pub struct Context {
    label: String,
    atoms: Vec<ProjectionMatrix>,
}

impl Context {
    /// Validates orthogonality, completeness and positive ranks, then puts
    /// the atoms in canonical order.
    pub fn new(label: impl Into<String>, atoms: Vec<ProjectionMatrix>) -> Result<Self> {
        let label = label.into();
        let dim = atoms
            .first()
            .map(ProjectionMatrix::dim)
            .ok_or_else(|| Error::InvalidContext(format!("`{label}` has no atoms")))?;
        if atoms.len() > 64 {
            return Err(Error::InvalidContext(format!("`{label}` has more than 64 atoms")));
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for (i, p) in atoms.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
            if p.rank() == 0 {
                return Err(Error::InvalidContext(format!("`{label}`: atom {i} has rank 0")));
            }
            for (j, q) in atoms.iter().enumerate().skip(i + 1) {
                let overlap = p.matrix().mul(q.matrix()).frobenius_norm();
                if overlap > EPS_HERM * dim as f64 {
                    return Err(Error::InvalidContext(format!(
                        "`{label}`: atoms {i} and {j} are not orthogonal ({overlap:e})"
                    )));
                }
            }
            sum = sum.add(p.matrix());
        }
        let defect = sum.sub(&ComplexMatrix::identity(dim)).frobenius_norm();
        if defect > EPS_HERM * dim as f64 {
            return Err(Error::InvalidContext(format!(
                "`{label}`: atoms do not sum to the identity ({defect:e})"
            )));
        }
        let mut keyed: Vec<(AtomKey, ProjectionMatrix)> =
            atoms.into_iter().map(|p| (AtomKey::of(&p), p)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self { label, atoms: keyed.into_iter().map(|(_, p)| p).collect() })
    }

    /// Rank-one atoms from an orthonormal basis. Vectors are normalised;
    /// pairwise orthogonality is checked.
    pub fn from_basis(label: impl Into<String>, basis: &[Vec<Complex64>]) -> Result<Self> {
        let label = label.into();
        let mut unit = Vec::with_capacity(basis.len());
        for v in basis {
            let n = vector_norm(v);
            if n == 0.0 {
                return Err(Error::InvalidContext(format!("`{label}`: zero basis vector")));
            }
            unit.push(v.iter().map(|c| c / n).collect::<Vec<_>>());
        }
        for i in 0..unit.len() {
            for j in (i + 1)..unit.len() {
                if inner(&unit[i], &unit[j]).norm() > 1e-9 {
                    return Err(Error::InvalidContext(format!(
                        "`{label}`: basis vectors {i} and {j} are not orthogonal"
                    )));
                }
            }
        }
        let atoms = unit
            .iter()
            .map(|v| ProjectionMatrix::from_orthonormal(std::slice::from_ref(v)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(label, atoms)
    }

    /// The context `ℂ·1`.
    pub fn trivial(dim: usize) -> Self {
        Self { label: "trivial".into(), atoms: vec![ProjectionMatrix::identity(dim)] }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn atoms(&self) -> &[ProjectionMatrix] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.len() == 1
    }

    /// Equality of the underlying subalgebras: same atoms up to order.
    pub fn same_as(&self, other: &Context) -> bool {
        self.dim() == other.dim()
            && self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .all(|p| other.atoms.iter().any(|q| p.distance(q) < ATOM_EQ_TOL))
    }

    /// Coefficients `λ_p` with `a = Σ λ_p p`, or `NotInContext`.
    pub fn coefficients(&self, a: &HermitianMatrix) -> Result<Vec<f64>> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.dim() });
        }
        let coefs: Vec<f64> = self
            .atoms
            .iter()
            .map(|p| p.hermitian().trace_product(a) / p.rank() as f64)
            .collect();
        let residual = a.matrix().sub(self.span_element(&coefs).matrix()).frobenius_norm();
        if residual > EPS_HERM * a.frobenius_norm().max(1.0) {
            return Err(Error::NotInContext { context: self.label.clone() });
        }
        Ok(coefs)
    }

    pub fn contains(&self, a: &HermitianMatrix) -> bool {
        self.coefficients(a).is_ok()
    }

    /// `Σ coefs[i] · atom[i]`
    pub fn span_element(&self, coefs: &[f64]) -> HermitianMatrix {
        let terms: Vec<(f64, &HermitianMatrix)> =
            coefs.iter().copied().zip(self.atoms.iter().map(ProjectionMatrix::hermitian)).collect();
        HermitianMatrix::linear_combination(&terms)
    }

    /// Sum of the atoms selected by `mask` (bit i ↔ atom i).
    pub fn projection_of(&self, mask: u64) -> ProjectionMatrix {
        ProjectionMatrix::orthogonal_sum(
            self.dim(),
            self.atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p),
        )
    }
}

/// Sort key: rank, then entries rounded to 1e-6.
#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct AtomKey(usize, Vec<(i64, i64)>);

impl AtomKey {
    fn of(p: &ProjectionMatrix) -> Self {
        let m = p.matrix();
        let n = m.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let c = m[(i, j)];
                entries.push(((c.re * 1e6).round() as i64, (c.im * 1e6).round() as i64));
            }
        }
        AtomKey(p.rank(), entries)
    }
}

/// The context `C*(a)`: atoms are the spectral projections of the distinct
/// (clustered) eigenvalues of `a`.
pub fn context_of(label: impl Into<String>, a: &HermitianMatrix) -> Context {
    let e = eigen(a);
    let atoms: Vec<ProjectionMatrix> =
        e.clusters().iter().map(|c| e.projection(&c.indices)).collect();
    let label = label.into();
    Context::new(label.clone(), atoms)
        .unwrap_or_else(|err| panic!("spectral projections of `{label}` failed validation: {err}"))
}

/// For `c ≤ d`: the index of the `c`-atom above each `d`-atom.
/// `None` when `d` does not refine `c`.
pub fn refinement_map(c: &Context, d: &Context) -> Option<Vec<usize>> {
    if c.dim() != d.dim() {
        return None;
    }
    d.atoms
        .iter()
        .map(|q| c.atoms.iter().position(|p| q.is_below(p)))
        .collect()
}

/// `c ⊆ d` as subalgebras: every atom of `c` is a sum of atoms of `d`.
pub fn includes(c: &Context, d: &Context) -> Result<bool> {
    if c.dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: d.dim() });
    }
    Ok(refinement_map(c, d).is_some())
}

/// `C ∩ D` with the default seed.
pub fn intersect(c: &Context, d: &Context) -> Result<Context> {
    intersect_with(c, d, &mut ChaCha8Rng::seed_from_u64(DEFAULT_SEED))
}

/// `C ∩ D`: intersect the real spans of the atoms, then read off the atoms of
/// the resulting algebra from a generic element.
///
/// An element of the intersection is `Σ αᵢ pᵢ = Σ βⱼ qⱼ`; the pairs `(α, β)`
/// form the null space of the Hilbert–Schmidt Gram matrix of
/// `[p₁ … p_k, −q₁ … −q_l]`. A random combination of a null-space basis is
/// written in the atoms of `c`, so its spectral projections are the groups of
/// `c`-atoms sharing a coefficient; with `m` null vectors there must be `m`
/// groups, otherwise the draw hit a collision and is repeated.
pub fn intersect_with<R: Rng>(c: &Context, d: &Context, rng: &mut R) -> Result<Context> {
    if c.dim() != d.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: d.dim() });
    }
    let label = format!("{}∧{}", c.label, d.label);
    if refinement_map(c, d).is_some() {
        return Ok(c.clone());
    }
    if refinement_map(d, c).is_some() {
        return Ok(d.clone());
    }
    let k1 = c.atoms.len();
    let span: Vec<(f64, &ProjectionMatrix)> = c
        .atoms
        .iter()
        .map(|p| (1.0, p))
        .chain(d.atoms.iter().map(|q| (-1.0, q)))
        .collect();
    let n = span.len();
    let mut gram = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let (si, pi) = span[i];
            let (sj, pj) = span[j];
            gram[(i, j)] = Complex64::new(si * sj * pi.hermitian().trace_product(pj.hermitian()), 0.0);
        }
    }
    let e = eigen(&HermitianMatrix::new(gram)?);
    let top = e.values.last().copied().unwrap_or(0.0).max(1.0);
    let null: Vec<Vec<f64>> = e
        .values
        .iter()
        .zip(&e.vectors)
        .filter(|(v, _)| **v <= 1e-9 * top)
        .map(|(_, vec)| vec[..k1].iter().map(|z| z.re).collect())
        .collect();
    let m = null.len();
    if m <= 1 {
        return Ok(Context::trivial(c.dim()).with_label(label));
    }
    for _ in 0..GENERIC_ATTEMPTS {
        let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=1000) as f64 / 97.0).collect();
        let coefs: Vec<f64> = (0..k1)
            .map(|i| null.iter().zip(&weights).map(|(v, w)| w * v[i]).sum())
            .collect();
        let groups = cluster_values(&coefs);
        if groups.len() != m {
            continue;
        }
        let atoms = groups
            .iter()
            .map(|g| ProjectionMatrix::orthogonal_sum(c.dim(), g.iter().map(|&i| &c.atoms[i])))
            .collect();
        let meet = Context::new(label.clone(), atoms)?;
        if refinement_map(&meet, d).is_some() {
            return Ok(meet);
        }
    }
    Err(Error::GenericElementFailed { attempts: GENERIC_ATTEMPTS })
}

/// Groups indices whose values agree to [`CLUSTER_REL`] (relative to the
/// largest magnitude).
fn cluster_values(values: &[f64]) -> Vec<Vec<usize>> {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if (values[i] - values[*g.last().unwrap()]).abs() <= CLUSTER_REL * scale => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

#[derive(Clone, Copy, Debug)]
pub struct PosetOptions {
    pub cap: usize,
    pub seed: u64,
}

impl Default for PosetOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_POSET_CAP, seed: DEFAULT_SEED }
    }
}

/// A finite, intersection-closed family of contexts with the inclusion order.
#[derive(Clone, Debug)]
pub struct ContextPoset {
    contexts: Vec<Context>,
    leq: Vec<Vec<bool>>,
    /// `refinements[c][d]`: for `c ≤ d`, the `c`-atom above each `d`-atom.
    refinements: Vec<Vec<Option<Vec<usize>>>>,
    bottom: usize,
    seed: u64,
}

/// Closes `generators` (plus the trivial context) under pairwise
/// intersection. Generators keep their order; new meets are appended in
/// discovery order, so the result is deterministic.
pub fn build_poset(generators: Vec<Context>, opts: &PosetOptions) -> Result<ContextPoset> {
    let dim = generators
        .first()
        .map(Context::dim)
        .ok_or_else(|| Error::Input("cannot build a poset from no contexts".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut contexts: Vec<Context> = Vec::new();
    let push = |contexts: &mut Vec<Context>, c: Context| -> Result<bool> {
        if c.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: c.dim() });
        }
        if contexts.iter().any(|x| x.same_as(&c)) {
            return Ok(false);
        }
        if contexts.len() >= opts.cap {
            return Err(Error::PosetTooLarge { cap: opts.cap });
        }
        let mut c = c;
        if contexts.iter().any(|x| x.label == c.label) {
            let n = contexts.len();
            c.label = format!("{}#{n}", c.label);
        }
        contexts.push(c);
        Ok(true)
    };
    for g in generators {
        push(&mut contexts, g)?;
    }
    let mut i = 0;
    // Pairs (i, j) with j < i are processed exactly once as the list grows.
    while i < contexts.len() {
        for j in 0..i {
            let meet = intersect_with(&contexts[j], &contexts[i], &mut rng)?;
            push(&mut contexts, meet)?;
        }
        i += 1;
    }
    push(&mut contexts, Context::trivial(dim))?;
    let bottom = contexts.iter().position(Context::is_trivial).expect("trivial context present");
    let n = contexts.len();
    let mut refinements = vec![vec![None; n]; n];
    let mut leq = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if let Some(map) = refinement_map(&contexts[a], &contexts[b]) {
                leq[a][b] = true;
                refinements[a][b] = Some(map);
            }
        }
    }
    Ok(ContextPoset { contexts, leq, refinements, bottom, seed: opts.seed })
}

impl ContextPoset {
    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.contexts[0].dim()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context(&self, i: usize) -> Result<&Context> {
        self.contexts.get(i).ok_or(Error::IndexOutOfRange { index: i, len: self.len() })
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.len() })
        }
    }

    pub fn leq(&self, c: usize, d: usize) -> bool {
        self.leq[c][d]
    }

    /// For `c ≤ d`, the `c`-atom above each `d`-atom.
    pub fn refinement(&self, c: usize, d: usize) -> Option<&[usize]> {
        self.refinements[c][d].as_deref()
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.contexts.iter().position(|c| c.label() == label)
    }

    /// Position of a context equal (as a subalgebra) to `c`.
    pub fn find(&self, c: &Context) -> Option<usize> {
        self.contexts.iter().position(|x| x.same_as(c))
    }

    /// `↑c` in index order.
    pub fn up(&self, c: usize) -> Vec<usize> {
        (0..self.len()).filter(|&d| self.leq[c][d]).collect()
    }

    pub fn maximal(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&c| (0..self.len()).all(|d| d == c || !self.leq[c][d]))
            .collect()
    }

    /// Covering pairs `(c, d)`: `c < d` with nothing strictly between.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut edges = Vec::new();
        for c in 0..n {
            for d in 0..n {
                if c == d || !self.leq[c][d] {
                    continue;
                }
                let between = (0..n).any(|e| e != c && e != d && self.leq[c][e] && self.leq[e][d]);
                if !between {
                    edges.push((c, d));
                }
            }
        }
        edges
    }

    /// Hasse diagram in Graphviz DOT, bottom at the bottom.
    pub fn to_dot(&self, highlight: &BTreeSet<usize>) -> String {
        let mut out = String::from("digraph poset {\n  rankdir=BT;\n  node [shape=box];\n");
        for (i, c) in self.contexts.iter().enumerate() {
            let style = if highlight.contains(&i) { ", style=filled, fillcolor=lightblue" } else { "" };
            let _ = writeln!(out, "  c{i} [label=\"{}\"{style}];", escape_dot(c.label()));
        }
        for (c, d) in self.hasse_edges() {
            let _ = writeln!(out, "  c{c} -> c{d};");
        }
        out.push_str("}\n");
        out
    }
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// An upward-closed set of contexts above a base context: an element of Ω(base).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UpperSet {
    base: usize,
    members: BTreeSet<usize>,
}

impl UpperSet {
    /// Checks that members lie above `base` and are upward closed.
    pub fn new(poset: &ContextPoset, base: usize, members: BTreeSet<usize>) -> Result<Self> {
        poset.check_index(base)?;
        for &m in &members {
            poset.check_index(m)?;
            if !poset.leq(base, m) {
                return Err(Error::Input(format!("context {m} is not above base {base}")));
            }
            for d in poset.up(m) {
                if !members.contains(&d) {
                    return Err(Error::Input(format!(
                        "not upward closed: {m} is a member but {d} is not"
                    )));
                }
            }
        }
        Ok(Self { base, members })
    }

    pub fn empty(base: usize) -> Self {
        Self { base, members: BTreeSet::new() }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, c: usize) -> bool {
        self.members.contains(&c)
    }

    pub fn is_subset(&self, other: &UpperSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn meet(&self, other: &UpperSet) -> UpperSet {
        UpperSet { base: self.base, members: &self.members & &other.members }
    }

    pub fn join(&self, other: &UpperSet) -> UpperSet {
        UpperSet { base: self.base, members: &self.members | &other.members }
    }

    /// Largest upper set `U ⊆ ↑base` with `U ∩ self ⊆ other`.
    pub fn implies(&self, other: &UpperSet, poset: &ContextPoset) -> UpperSet {
        let members = poset
            .up(self.base)
            .into_iter()
            .filter(|&d| poset.up(d).into_iter().all(|e| !self.contains(e) || other.contains(e)))
            .collect();
        UpperSet { base: self.base, members }
    }

    /// Restriction along `base ≤ d`: `S ↦ S ∩ ↑d`.
    pub fn truncate(&self, poset: &ContextPoset, d: usize) -> Result<UpperSet> {
        poset.check_index(d)?;
        if !poset.leq(self.base, d) {
            return Err(Error::NotComparable { lower: self.base, upper: d });
        }
        let members = self.members.iter().copied().filter(|&m| poset.leq(d, m)).collect();
        Ok(UpperSet { base: d, members })
    }

    pub fn is_upward_closed(&self, poset: &ContextPoset) -> bool {
        self.members
            .iter()
            .all(|&m| poset.leq(self.base, m) && poset.up(m).iter().all(|d| self.members.contains(d)))
    }
}

/// `↑c`, the top element of Ω(c).
pub fn principal_up(poset: &ContextPoset, c: usize) -> Result<UpperSet> {
    poset.check_index(c)?;
    Ok(UpperSet { base: c, members: poset.up(c).into_iter().collect() })
}

/// All upper sets of `↑c`, from `∅` to `↑c`, in a deterministic order.
pub fn omega_elements(poset: &ContextPoset, c: usize) -> Result<Vec<UpperSet>> {
    omega_elements_capped(poset, c, DEFAULT_OMEGA_CAP)
}

pub fn omega_elements_capped(poset: &ContextPoset, c: usize, cap: usize) -> Result<Vec<UpperSet>> {
    poset.check_index(c)?;
    let up = poset.up(c);
    if up.len() > cap || up.len() >= 64 {
        return Err(Error::EnumerationTooLarge { size: up.len(), cap });
    }
    // successor masks within ↑c
    let succ: Vec<u64> = up
        .iter()
        .map(|&x| {
            up.iter()
                .enumerate()
                .filter(|(_, &y)| poset.leq(x, y))
                .fold(0u64, |m, (j, _)| m | 1 << j)
        })
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << up.len()) {
        let closed = (0..up.len()).all(|i| mask >> i & 1 == 0 || succ[i] & !mask == 0);
        if closed {
            let members = (0..up.len()).filter(|&i| mask >> i & 1 == 1).map(|i| up[i]).collect();
            out.push(UpperSet { base: c, members });
        }
    }
    Ok(out)
}
