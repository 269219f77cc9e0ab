//! Finite lattices, sites (a lattice with a covering relation), the frame a
//! site presents, regular ideals and continuous maps between sites.
//!
//! Subsets of a site are bitsets (`u64`), so sites have at most 64 elements.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset of a site's elements, bit `i` ↔ element `i`.
pub type ElemSet = u64;

/// Sites up to this size have their axioms checked on every subset.
pub const EXHAUSTIVE_LIMIT: usize = 12;
/// Number of random subsets drawn for larger sites.
pub const SAMPLE_COUNT: usize = 1000;
const SAMPLE_SEED: u64 = 0x517e;
/// Largest frame `frame_of_site` will enumerate.
pub const FRAME_CAP: usize = 1 << 14;

fn bits(set: ElemSet) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| set >> i & 1 == 1)
}

fn full(n: usize) -> ElemSet {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A finite lattice given by its order, with meet and join tables.
#[derive(Clone, Debug)]
pub struct FiniteLattice {
    names: Vec<String>,
    le: Vec<Vec<bool>>,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
    top: usize,
    bottom: usize,
}

impl FiniteLattice {
    /// Builds the lattice from a partial order given as a predicate.
    /// The predicate is closed reflexively and transitively first.
    #[allow(clippy::needless_range_loop)]
    pub fn from_order(names: Vec<String>, le: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidLattice("no elements".into()));
        }
        let mut rel: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || le(i, j)).collect()).collect();
        for k in 0..n {
            for i in 0..n {
                if rel[i][k] {
                    for j in 0..n {
                        if rel[k][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rel[i][j] && rel[j][i] {
                    return Err(Error::InvalidLattice(format!(
                        "`{}` and `{}` are distinct but mutually below each other",
                        names[i], names[j]
                    )));
                }
            }
        }
        let bound = |i: usize, j: usize, lower: bool| -> Option<usize> {
            let cands: Vec<usize> = (0..n)
                .filter(|&k| if lower { rel[k][i] && rel[k][j] } else { rel[i][k] && rel[j][k] })
                .collect();
            cands
                .iter()
                .copied()
                .find(|&k| cands.iter().all(|&c| if lower { rel[c][k] } else { rel[k][c] }))
        };
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                meet[i][j] = bound(i, j, true).ok_or_else(|| {
                    Error::InvalidLattice(format!("`{}` and `{}` have no meet", names[i], names[j]))
                })?;
                join[i][j] = bound(i, j, false).ok_or_else(|| {
                    Error::InvalidLattice(format!("`{}` and `{}` have no join", names[i], names[j]))
                })?;
            }
        }
        let bottom = (0..n).find(|&b| (0..n).all(|x| rel[b][x])).expect("finite lattice has a bottom");
        let top = (0..n).find(|&t| (0..n).all(|x| rel[x][t])).expect("finite lattice has a top");
        Ok(Self { names, le: rel, meet, join, top, bottom })
    }

    /// The powerset of `k` atoms; element `i` is the subset with bitmask `i`.
    pub fn powerset(k: usize) -> Self {
        assert!(k <= 6, "powerset lattices are limited to 6 atoms");
        let n = 1usize << k;
        let names = (0..n).map(mask_name).collect();
        Self::from_order(names, |i, j| i & !j == 0).expect("powerset is a lattice")
    }

    /// The chain `0 < 1 < … < n-1`.
    pub fn chain(n: usize) -> Self {
        Self::from_order((0..n).map(|i| i.to_string()).collect(), |i, j| i <= j)
            .expect("a chain is a lattice")
    }

    /// Down-sets of a finite poset on `m` points (bit `i` ↔ point `i`),
    /// ordered by inclusion: every finite distributive lattice arises this way.
    pub fn of_down_sets(m: usize, below: impl Fn(usize, usize) -> bool) -> Self {
        let sets: Vec<u64> = (0u64..(1 << m))
            .filter(|&s| bits(s).all(|i| (0..m).all(|j| !below(j, i) || s >> j & 1 == 1)))
            .collect();
        let names = sets.iter().map(|&s| mask_name(s as usize)).collect();
        Self::from_order(names, |a, b| sets[a] & !sets[b] == 0).expect("down-sets form a lattice")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.le[x][y]
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet[x][y]
    }

    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x][y]
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    /// `⋁U` (bottom for the empty set).
    pub fn join_all(&self, u: ElemSet) -> usize {
        bits(u).fold(self.bottom, |acc, x| self.join(acc, x))
    }

    /// `↓x` as a bitset. Needs at most 64 elements.
    pub fn down(&self, x: usize) -> ElemSet {
        (0..self.len()).filter(|&y| self.le[y][x]).fold(0, |m, y| m | 1 << y)
    }

    pub fn up(&self, x: usize) -> ElemSet {
        (0..self.len()).filter(|&y| self.le[x][y]).fold(0, |m, y| m | 1 << y)
    }

    pub fn down_closure(&self, u: ElemSet) -> ElemSet {
        bits(u).fold(0, |m, x| m | self.down(x))
    }

    pub fn is_down_set(&self, u: ElemSet) -> bool {
        self.down_closure(u) == u
    }

    /// `U ∧ V = {u ∧ v}`.
    pub fn set_meet(&self, u: ElemSet, v: ElemSet) -> ElemSet {
        let mut out = 0;
        for x in bits(u) {
            for y in bits(v) {
                out |= 1 << self.meet(x, y);
            }
        }
        out
    }

    /// All down-sets, in increasing bitmask order.
    pub fn down_sets(&self) -> Vec<ElemSet> {
        let n = self.len();
        let downs: Vec<ElemSet> = (0..n).map(|x| self.down(x)).collect();
        // Grow by adding maximal-candidate elements; a visited set keeps it linear in the output.
        let mut seen = BTreeSet::new();
        let mut stack = vec![0u64];
        seen.insert(0u64);
        while let Some(s) = stack.pop() {
            for (x, &dx) in downs.iter().enumerate() {
                if s >> x & 1 == 0 && dx & !(s | 1 << x) == 0 {
                    let t = s | 1 << x;
                    if seen.insert(t) {
                        stack.push(t);
                    }
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn is_distributive(&self) -> bool {
        let n = self.len();
        (0..n).all(|x| {
            (0..n).all(|y| (0..n).all(|z| self.meet(x, self.join(y, z)) == self.join(self.meet(x, y), self.meet(x, z))))
        })
    }

    /// Checks the lattice laws on the tables (exhaustive).
    pub fn satisfies_lattice_laws(&self) -> bool {
        let n = self.len();
        (0..n).all(|x| {
            self.meet(x, x) == x
                && self.join(x, x) == x
                && (0..n).all(|y| {
                    self.meet(x, y) == self.meet(y, x)
                        && self.join(x, y) == self.join(y, x)
                        && self.meet(x, self.join(x, y)) == x
                        && self.join(x, self.meet(x, y)) == x
                        && (0..n).all(|z| {
                            self.meet(x, self.meet(y, z)) == self.meet(self.meet(x, y), z)
                                && self.join(x, self.join(y, z)) == self.join(self.join(x, y), z)
                        })
                })
        })
    }

    /// Covering pairs of the order.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if x != y && self.le[x][y] && !(0..n).any(|z| z != x && z != y && self.le[x][z] && self.le[z][y]) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n  rankdir=BT;\n");
        for (i, n) in self.names.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", n.replace('"', "\\\""));
        }
        for (x, y) in self.hasse_edges() {
            let _ = writeln!(out, "  n{x} -> n{y};");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            elements: self.names.clone(),
            leq: self.hasse_edges().into_iter().map(|(x, y)| [x, y]).collect(),
        }
    }
}

fn mask_name(mask: usize) -> String {
    let inner: Vec<String> = (0..usize::BITS as usize).filter(|i| mask >> i & 1 == 1).map(|i| i.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

/// Element names and generating order pairs `[lower, upper]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LatticeJson {
    pub elements: Vec<String>,
    pub leq: Vec<[usize; 2]>,
}

/// `x ≪ y`: some `z` has `x ∧ z = ⊥` and `y ∨ z = ⊤`.
pub fn well_inside(lat: &FiniteLattice, x: usize, y: usize) -> bool {
    (0..lat.len()).any(|z| lat.meet(x, z) == lat.bottom() && lat.join(y, z) == lat.top())
}

pub fn is_normal(lat: &FiniteLattice) -> bool {
    let n = lat.len();
    let (bot, top) = (lat.bottom(), lat.top());
    (0..n).all(|b1| {
        (0..n).all(|b2| {
            lat.join(b1, b2) != top
                || (0..n).any(|c1| {
                    lat.join(c1, b1) == top
                        && (0..n).any(|c2| lat.meet(c1, c2) == bot && lat.join(c2, b2) == top)
                })
        })
    })
}

pub fn is_strongly_normal(lat: &FiniteLattice) -> bool {
    let n = lat.len();
    (0..n).all(|a| {
        (0..n).all(|b| {
            (0..n).any(|x| {
                lat.leq(a, lat.join(b, x))
                    && (0..n).any(|y| lat.leq(b, lat.join(a, y)) && lat.meet(x, y) == lat.bottom())
            })
        })
    })
}

/// Ideals: down-closed, closed under binary joins, containing ⊥.
pub fn is_ideal(lat: &FiniteLattice, u: ElemSet) -> bool {
    u >> lat.bottom() & 1 == 1
        && lat.is_down_set(u)
        && bits(u).all(|x| bits(u).all(|y| u >> lat.join(x, y) & 1 == 1))
}

/// `(∀y. y ≪ x ⇒ y ∈ U) ⇒ x ∈ U` for every `x`.
pub fn is_regular(lat: &FiniteLattice, u: ElemSet) -> bool {
    (0..lat.len()).all(|x| {
        u >> x & 1 == 1 || (0..lat.len()).any(|y| well_inside(lat, y, x) && u >> y & 1 == 0)
    })
}

/// The regular ideals of a finite distributive lattice, ordered by inclusion.
#[derive(Clone, Debug)]
pub struct RegularIdeals {
    pub ideals: Vec<ElemSet>,
    pub lattice: FiniteLattice,
}

/// In a finite lattice every ideal is principal (`↓⋁U`), so only principal
/// ideals are tested for regularity.
pub fn regular_ideals(lat: &FiniteLattice) -> Result<RegularIdeals> {
    if lat.len() > 64 {
        return Err(Error::EnumerationTooLarge { size: lat.len(), cap: 64 });
    }
    let mut ideals: Vec<ElemSet> = (0..lat.len()).map(|x| lat.down(x)).filter(|&u| is_regular(lat, u)).collect();
    ideals.sort_by_key(|u| (u.count_ones(), *u));
    let names = ideals.iter().map(|&u| set_name(lat, u)).collect();
    let lattice = FiniteLattice::from_order(names, |a, b| ideals[a] & !ideals[b] == 0)?;
    Ok(RegularIdeals { ideals, lattice })
}

fn set_name(lat: &FiniteLattice, u: ElemSet) -> String {
    let inner: Vec<&str> = bits(u).map(|x| lat.name(x)).collect();
    format!("[{}]", inner.join(" "))
}

/// Grid intervals `(p, q)` with a bottom element, ordered by inclusion.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSite {
    grid: Vec<f64>,
    /// `pairs[k - 1]` is element `k`; element 0 is ⊥.
    pairs: Vec<(usize, usize)>,
}

impl IntervalSite {
    pub fn new(mut grid: Vec<f64>) -> Result<Self> {
        if grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidInterval("grid points must be finite".into()));
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        if grid.len() < 2 {
            return Err(Error::InvalidInterval("grid needs at least two points".into()));
        }
        let g = grid.len();
        let pairs: Vec<(usize, usize)> = (0..g).flat_map(|i| ((i + 1)..g).map(move |j| (i, j))).collect();
        if pairs.len() + 1 > 64 {
            return Err(Error::EnumerationTooLarge { size: pairs.len() + 1, cap: 64 });
        }
        Ok(Self { grid, pairs })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.pairs.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Endpoints of element `k`, `None` for ⊥.
    pub fn interval(&self, k: usize) -> Option<(f64, f64)> {
        (k > 0).then(|| {
            let (i, j) = self.pairs[k - 1];
            (self.grid[i], self.grid[j])
        })
    }

    /// Element index of `(p, q)`; both must be grid points.
    pub fn element(&self, p: f64, q: f64) -> Option<usize> {
        let i = self.grid.iter().position(|&g| g == p)?;
        let j = self.grid.iter().position(|&g| g == q)?;
        self.pairs.iter().position(|&pq| pq == (i, j)).map(|k| k + 1)
    }

    pub fn set_of(&self, intervals: &[(f64, f64)]) -> Option<ElemSet> {
        intervals.iter().try_fold(0u64, |m, &(p, q)| Some(m | 1 << self.element(p, q)?))
    }

    pub fn lattice(&self) -> FiniteLattice {
        let mut names = vec!["⊥".to_string()];
        names.extend(self.pairs.iter().map(|&(i, j)| format!("({},{})", self.grid[i], self.grid[j])));
        let pairs = self.pairs.clone();
        FiniteLattice::from_order(names, move |a, b| {
            a == 0 || (b != 0 && {
                let (p, q) = pairs[a - 1];
                let (p2, q2) = pairs[b - 1];
                p2 <= p && q <= q2
            })
        })
        .expect("grid intervals form a lattice")
    }

    /// A rational subinterval strictly inside `x` that lies in no member of
    /// `u`, if there is one.
    pub fn escape_witness(&self, x: usize, u: ElemSet) -> Option<(f64, f64)> {
        let (p, q) = self.interval(x)?;
        let fits_all = bits(u).any(|k| matches!(self.interval(k), Some((a, b)) if a <= p && q <= b));
        if fits_all {
            return None;
        }
        // Every member misses x at an end; shrink x by less than the smallest
        // overhang so each member still misses the shrunken interval.
        let mut delta = (q - p) / 4.0;
        for k in bits(u) {
            if let Some((a, b)) = self.interval(k) {
                if a > p {
                    delta = delta.min((a - p) / 2.0);
                }
                if b < q {
                    delta = delta.min((q - b) / 2.0);
                }
            }
        }
        Some((p + delta, q - delta))
    }
}

/// `x ◀ U` on the interval site: ⊥ is covered by everything; `(p, q)` is
/// covered iff every rational `(p', q')` with `p < p' < q' < q` lies inside
/// some member of `U`. For a finite `U` of grid intervals this holds exactly
/// when `(p, q)` itself lies inside a member, which is what is computed.
pub fn interval_cover(site: &IntervalSite, x: usize, u: ElemSet) -> bool {
    site.escape_witness(x, u).is_none()
}

pub type CoverFn = Arc<dyn Fn(&FiniteLattice, usize, ElemSet) -> bool + Send + Sync>;

/// Covering relations.
#[derive(Clone)]
pub enum Cover {
    /// `x ◁ U` iff `x ≤ ⋁U`.
    JoinCover,
    /// `x ◁ U` iff `x ≤ u` for some `u ∈ U`.
    DownSet,
    /// `x ◁ U` iff `f(x) ⊆ ⋃ f(U)` for a map `f` into a powerset.
    Generated(Vec<ElemSet>),
    /// Down-set cover plus listed pairs: `x ◁ U` also when some listed
    /// `(y, V)` has `x ≤ y` and `V ⊆ ↓U`.
    Explicit(Vec<(usize, ElemSet)>),
    Interval(IntervalSite),
    Custom(CoverFn),
}

impl std::fmt::Debug for Cover {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cover::JoinCover => f.write_str("JoinCover"),
            Cover::DownSet => f.write_str("DownSet"),
            Cover::Generated(g) => f.debug_tuple("Generated").field(g).finish(),
            Cover::Explicit(p) => f.debug_tuple("Explicit").field(p).finish(),
            Cover::Interval(s) => f.debug_tuple("Interval").field(&s.grid).finish(),
            Cover::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A finite lattice with a covering relation.
#[derive(Clone, Debug)]
pub struct Site {
    lattice: FiniteLattice,
    cover: Cover,
}

/// How thoroughly the covering axioms were checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub exhaustive: bool,
    pub subsets_checked: usize,
}

impl Site {
    /// Builds the site and checks the covering axioms.
    pub fn new(lattice: FiniteLattice, cover: Cover) -> Result<Self> {
        let site = Self::new_unchecked(lattice, cover)?;
        site.check_axioms()?;
        Ok(site)
    }

    /// Builds the site without checking the axioms.
    pub fn new_unchecked(lattice: FiniteLattice, cover: Cover) -> Result<Self> {
        if lattice.len() > 64 {
            return Err(Error::EnumerationTooLarge { size: lattice.len(), cap: 64 });
        }
        match &cover {
            Cover::Generated(images) if images.len() != lattice.len() => {
                return Err(Error::DimensionMismatch { expected: lattice.len(), found: images.len() })
            }
            Cover::Interval(s) if s.len() != lattice.len() => {
                return Err(Error::DimensionMismatch { expected: lattice.len(), found: s.len() })
            }
            Cover::Explicit(pairs) => {
                for &(x, u) in pairs {
                    if x >= lattice.len() || u & !full(lattice.len()) != 0 {
                        return Err(Error::IndexOutOfRange { index: x, len: lattice.len() });
                    }
                }
            }
            _ => {}
        }
        Ok(Self { lattice, cover })
    }

    pub fn interval(grid: Vec<f64>) -> Result<Self> {
        let s = IntervalSite::new(grid)?;
        Self::new(s.lattice(), Cover::Interval(s))
    }

    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn all(&self) -> ElemSet {
        full(self.len())
    }

    pub fn covers(&self, x: usize, u: ElemSet) -> bool {
        let lat = &self.lattice;
        match &self.cover {
            Cover::JoinCover => lat.leq(x, lat.join_all(u)),
            Cover::DownSet => bits(u).any(|y| lat.leq(x, y)),
            Cover::Generated(f) => f[x] & !bits(u).fold(0, |m, y| m | f[y]) == 0,
            Cover::Explicit(pairs) => {
                let down = lat.down_closure(u);
                down >> x & 1 == 1 || pairs.iter().any(|&(y, v)| lat.leq(x, y) && v & !down == 0)
            }
            Cover::Interval(s) => interval_cover(s, x, u),
            Cover::Custom(f) => f(lat, x, u),
        }
    }

    /// `𝒜U = {x : x ◁ U}`
    pub fn closure(&self, u: ElemSet) -> ElemSet {
        (0..self.len()).filter(|&x| self.covers(x, u)).fold(0, |m, x| m | 1 << x)
    }

    /// `U ◁ V`: every member of `U` is covered by `V`.
    pub fn covers_set(&self, u: ElemSet, v: ElemSet) -> bool {
        bits(u).all(|x| self.covers(x, v))
    }

    /// Checks the covering axioms:
    /// 1. `x ∈ U ⇒ x ◁ U`;
    /// 2. `x ◁ U` and `U ◁ V` ⇒ `x ◁ V`;
    /// 3. `x ◁ U ⇒ x ∧ y ◁ U`;
    /// 4. `x ◁ U` and `x ◁ V` ⇒ `x ◁ U ∧ V`.
    ///
    /// Axiom 2 is checked as monotonicity of `𝒜` plus `𝒜𝒜V ⊆ 𝒜V`, which
    /// together are equivalent to it. Given 1–3, `𝒜U = 𝒜(↓U)` and
    /// `↓(U ∧ V) = ↓U ∩ ↓V`, so axiom 4 only needs down-sets.
    pub fn check_axioms(&self) -> Result<AxiomReport> {
        let n = self.len();
        let exhaustive = n <= EXHAUSTIVE_LIMIT;
        let subsets: Vec<ElemSet> = if exhaustive {
            (0..(1u64 << n)).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
            let mut v: Vec<ElemSet> = (0..SAMPLE_COUNT).map(|_| rng.gen::<u64>() & self.all()).collect();
            v.extend([0, self.all()]);
            v.extend((0..n).map(|x| self.lattice.down(x)));
            v
        };
        let fail = |axiom: usize, detail: String| Err(Error::InvalidCovering { axiom, detail });
        let name = |u: ElemSet| set_name(&self.lattice, u);
        let mut closures: HashMap<ElemSet, ElemSet> = HashMap::with_capacity(subsets.len());
        for &u in &subsets {
            let a = self.closure(u);
            if u & !a != 0 {
                return fail(1, format!("{} is not covered by itself", name(u)));
            }
            if !self.lattice.is_down_set(a) {
                let x = bits(a).find(|&x| self.lattice.down(x) & !a != 0).unwrap();
                let y = bits(self.lattice.down(x) & !a).next().unwrap();
                return fail(
                    3,
                    format!("{} ◁ {} but {} is not", self.lattice.name(x), name(u), self.lattice.name(y)),
                );
            }
            closures.insert(u, a);
        }
        for &u in &subsets {
            let a = closures[&u];
            if self.closure(a) & !a != 0 {
                return fail(2, format!("𝒜𝒜{} ⊄ 𝒜{}", name(u), name(u)));
            }
            for y in 0..n {
                let w = u | 1 << y;
                if w != u && a & !self.closure(w) != 0 {
                    return fail(2, format!("𝒜 is not monotone at {} ⊆ {}", name(u), name(w)));
                }
            }
        }
        let downs: Vec<ElemSet> = if exhaustive {
            self.lattice.down_sets()
        } else {
            let mut d: Vec<ElemSet> = subsets.iter().map(|&u| self.lattice.down_closure(u)).collect();
            d.sort_unstable();
            d.dedup();
            d.truncate(200);
            d
        };
        let down_closures: Vec<ElemSet> = downs.iter().map(|&d| self.closure(d)).collect();
        for (i, &d) in downs.iter().enumerate() {
            for (j, &e) in downs.iter().enumerate().skip(i) {
                let both = down_closures[i] & down_closures[j];
                if both & !self.closure(d & e) != 0 {
                    return fail(4, format!("𝒜{} ∩ 𝒜{} ⊄ 𝒜({} ∧ {})", name(d), name(e), name(d), name(e)));
                }
            }
        }
        Ok(AxiomReport { exhaustive, subsets_checked: subsets.len() })
    }

    /// `x ↦ 𝒜(↓x)`
    pub fn canonical_map(&self, x: usize) -> ElemSet {
        self.closure(self.lattice.down(x))
    }

    pub fn to_json(&self) -> SiteJson {
        match &self.cover {
            Cover::Interval(s) => SiteJson::Interval { grid: s.grid.clone() },
            cover => {
                let LatticeJson { elements, leq } = self.lattice.to_json();
                let cover = match cover {
                    Cover::JoinCover => CoverJson::Named(NamedCover::JoinCover),
                    Cover::DownSet => CoverJson::Named(NamedCover::DownSet),
                    Cover::Explicit(pairs) => CoverJson::Pairs(
                        pairs.iter().map(|&(x, u)| (x, bits(u).collect())).collect(),
                    ),
                    Cover::Generated(images) => {
                        CoverJson::Generated { images: images.iter().map(|&m| bits(m).collect()).collect() }
                    }
                    Cover::Interval(_) | Cover::Custom(_) => CoverJson::Named(NamedCover::JoinCover),
                };
                SiteJson::Explicit { elements, leq, cover }
            }
        }
    }

    pub fn from_json(json: &SiteJson) -> Result<Self> {
        match json {
            SiteJson::Interval { grid } => Self::interval(grid.clone()),
            SiteJson::Explicit { elements, leq, cover } => {
                let n = elements.len();
                for &[a, b] in leq {
                    if a >= n || b >= n {
                        return Err(Error::IndexOutOfRange { index: a.max(b), len: n });
                    }
                }
                let pairs: BTreeSet<(usize, usize)> = leq.iter().map(|&[a, b]| (a, b)).collect();
                let lattice = FiniteLattice::from_order(elements.clone(), |a, b| pairs.contains(&(a, b)))?;
                let to_set = |xs: &[usize]| -> Result<ElemSet> {
                    xs.iter().try_fold(0u64, |m, &x| {
                        if x >= n {
                            Err(Error::IndexOutOfRange { index: x, len: n })
                        } else {
                            Ok(m | 1 << x)
                        }
                    })
                };
                let cover = match cover {
                    CoverJson::Named(NamedCover::JoinCover) => Cover::JoinCover,
                    CoverJson::Named(NamedCover::DownSet) => Cover::DownSet,
                    CoverJson::Pairs(p) => Cover::Explicit(
                        p.iter().map(|(x, u)| Ok((*x, to_set(u)?))).collect::<Result<_>>()?,
                    ),
                    CoverJson::Generated { images } => {
                        Cover::Generated(images.iter().map(|u| to_set(u)).collect::<Result<_>>()?)
                    }
                };
                Self::new(lattice, cover)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SiteJson {
    Interval { grid: Vec<f64> },
    Explicit { elements: Vec<String>, leq: Vec<[usize; 2]>, cover: CoverJson },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CoverJson {
    Named(NamedCover),
    Generated { images: Vec<Vec<usize>> },
    Pairs(Vec<(usize, Vec<usize>)>),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum NamedCover {
    JoinCover,
    DownSet,
}

/// The frame `F(L, ◁)`: fixed points of `𝒜`, ordered by inclusion.
#[derive(Clone, Debug)]
pub struct Frame {
    opens: Vec<ElemSet>,
    index: HashMap<ElemSet, usize>,
}

/// Enumerates `F(L, ◁)` as all joins of canonical images `𝒜(↓x)`.
pub fn frame_of_site(site: &Site) -> Result<Frame> {
    site.check_axioms()?;
    frame_unchecked(site)
}

fn frame_unchecked(site: &Site) -> Result<Frame> {
    let gens: Vec<ElemSet> = {
        let mut g: Vec<ElemSet> = (0..site.len()).map(|x| site.canonical_map(x)).collect();
        g.sort_unstable();
        g.dedup();
        g
    };
    let mut seen: BTreeSet<ElemSet> = BTreeSet::new();
    let mut stack = vec![site.closure(0)];
    seen.insert(stack[0]);
    while let Some(u) = stack.pop() {
        for &g in &gens {
            if g & !u == 0 {
                continue;
            }
            let v = site.closure(u | g);
            if seen.insert(v) {
                if seen.len() > FRAME_CAP {
                    return Err(Error::EnumerationTooLarge { size: seen.len(), cap: FRAME_CAP });
                }
                stack.push(v);
            }
        }
    }
    let mut opens: Vec<ElemSet> = seen.into_iter().collect();
    opens.sort_by_key(|u| (u.count_ones(), *u));
    let index = opens.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    Ok(Frame { opens, index })
}

impl Frame {
    pub fn len(&self) -> usize {
        self.opens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opens.is_empty()
    }

    pub fn opens(&self) -> &[ElemSet] {
        &self.opens
    }

    pub fn index_of(&self, u: ElemSet) -> Option<usize> {
        self.index.get(&u).copied()
    }

    pub fn contains(&self, u: ElemSet) -> bool {
        self.index.contains_key(&u)
    }

    pub fn bottom(&self) -> ElemSet {
        self.opens[0]
    }

    pub fn top(&self) -> ElemSet {
        *self.opens.last().unwrap()
    }

    pub fn meet(&self, u: ElemSet, v: ElemSet) -> ElemSet {
        u & v
    }

    pub fn join(&self, site: &Site, u: ElemSet, v: ElemSet) -> ElemSet {
        site.closure(u | v)
    }

    /// The frame as a lattice with opens named by their members.
    pub fn lattice(&self, site: &Site) -> Result<FiniteLattice> {
        if self.len() > 512 {
            return Err(Error::EnumerationTooLarge { size: self.len(), cap: 512 });
        }
        let names = self.opens.iter().map(|&u| set_name(site.lattice(), u)).collect();
        FiniteLattice::from_order(names, |a, b| self.opens[a] & !self.opens[b] == 0)
    }
}

/// A frame map `U ↦ 𝒜_M f*(U)` between the frames of two sites.
#[derive(Clone, Debug)]
pub struct FrameMap {
    pub domain: Frame,
    pub codomain: Frame,
    /// `images[i]` is the image of `domain.opens()[i]`.
    pub images: Vec<ElemSet>,
}

impl FrameMap {
    pub fn apply(&self, u: ElemSet) -> Option<ElemSet> {
        self.domain.index_of(u).map(|i| self.images[i])
    }
}

/// Checks that `f_star: L → P(M)` is continuous from `codomain` to `domain`
/// and returns the induced frame map `F(L) → F(M)`.
///
/// Conditions (failures report the index):
/// 1. `f*(L)` covers all of `M`;
/// 2. `f*(x) ∧ f*(y) ◀ f*(x ∧ y)`;
/// 3. `x ◁ U ⇒ f*(x) ◀ f*(U)`.
///
/// Condition 4 reports an induced map that fails to preserve meets, joins or
/// the top element.
pub fn induced_frame_map(
    f_star: impl Fn(usize) -> ElemSet,
    domain: &Site,
    codomain: &Site,
) -> Result<FrameMap> {
    let l = domain.lattice();
    let m = codomain.lattice();
    let fx: Vec<ElemSet> = (0..l.len()).map(&f_star).collect();
    if let Some(bad) = fx.iter().find(|&&u| u & !codomain.all() != 0) {
        return Err(Error::Input(format!("f* produced a set outside the codomain: {bad:#x}")));
    }
    let image = |u: ElemSet| bits(u).fold(0u64, |acc, x| acc | fx[x]);
    let fail = |condition: usize, detail: String| Err(Error::NotContinuous { condition, detail });

    let all_images = image(domain.all());
    if codomain.closure(all_images) != codomain.all() {
        let missing = bits(codomain.all() & !codomain.closure(all_images)).next().unwrap();
        return fail(1, format!("{} is not covered by f*(L)", m.name(missing)));
    }
    for x in 0..l.len() {
        for y in 0..l.len() {
            let lhs = m.set_meet(fx[x], fx[y]);
            if !codomain.covers_set(lhs, fx[l.meet(x, y)]) {
                return fail(
                    2,
                    format!("f*({}) ∧ f*({}) is not covered by f*({})", l.name(x), l.name(y), l.name(l.meet(x, y))),
                );
            }
        }
    }
    let subsets: Vec<ElemSet> = if l.len() <= EXHAUSTIVE_LIMIT {
        (0..(1u64 << l.len())).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        let mut v: Vec<ElemSet> = (0..SAMPLE_COUNT).map(|_| rng.gen::<u64>() & domain.all()).collect();
        v.extend(l.down_sets().into_iter().take(SAMPLE_COUNT));
        v
    };
    for &u in &subsets {
        let target = codomain.closure(image(u));
        for x in bits(domain.closure(u)) {
            if fx[x] & !target != 0 {
                return fail(3, format!("{} ◁ {} but f* of it is not covered", l.name(x), set_name(l, u)));
            }
        }
    }

    let dom = frame_of_site(domain)?;
    let cod = frame_of_site(codomain)?;
    let images: Vec<ElemSet> = dom.opens().iter().map(|&u| codomain.closure(image(u))).collect();
    let check = |ok: bool, what: &str| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::NotContinuous { condition: 4, detail: what.to_string() })
        }
    };
    for &v in &images {
        check(cod.contains(v), "image is not an open of the codomain")?;
    }
    check(images[dom.len() - 1] == cod.top(), "top is not preserved")?;
    check(images[0] == cod.bottom(), "the empty join is not preserved")?;
    for i in 0..dom.len() {
        for j in i..dom.len() {
            let (u, v) = (dom.opens()[i], dom.opens()[j]);
            let meet = dom.index_of(u & v).expect("opens are closed under intersection");
            check(images[meet] == images[i] & images[j], "binary meets are not preserved")?;
            let join = dom.index_of(domain.closure(u | v)).expect("joins of opens are opens");
            check(images[join] == codomain.closure(images[i] | images[j]), "binary joins are not preserved")?;
        }
    }
    Ok(FrameMap { domain: dom, codomain: cod, images })
}

/// Frame as JSON: opens as lists of element indices plus their Hasse edges.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FrameJson {
    pub opens: Vec<Vec<usize>>,
    pub leq: Vec<[usize; 2]>,
    pub site_elements: Vec<String>,
}

pub fn frame_json(site: &Site, frame: &Frame) -> Result<FrameJson> {
    let lat = frame.lattice(site)?;
    Ok(FrameJson {
        opens: frame.opens().iter().map(|&u| bits(u).collect()).collect(),
        leq: lat.hasse_edges().into_iter().map(|(a, b)| [a, b]).collect(),
        site_elements: site.lattice().names().to_vec(),
    })
}

/// Counts elements by name; used by table renderers.
pub fn element_names(site: &Site, u: ElemSet) -> Vec<String> {
    bits(u).map(|x| site.lattice().name(x).to_string()).collect()
}

/// Name → index map for a lattice.
pub fn name_index(lat: &FiniteLattice) -> BTreeMap<String, usize> {
    lat.names().iter().enumerate().map(|(i, n)| (n.clone(), i)).collect()
}
