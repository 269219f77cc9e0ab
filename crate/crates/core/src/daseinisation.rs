//! Daseinisation: how much of an observable's value-in-an-interval each
//! context can see, via the best inner and outer approximations from the
//! context.

use std::sync::Arc;

use serde::Serialize;

use crate::contexts::{Context, ContextPoset};
use crate::error::{Error, Result};
use crate::interval::RationalInterval;
use crate::lattice::{ElemSet, IntervalSite};
use crate::linalg::{compress, eigen, HermitianMatrix, EPS_ORDER};
use crate::spectrum::{generator, AtomSet, SpectralOpen};

/// Slack for the strict comparisons `λ_p > r` and `μ_p < s`.
pub const EPS_STRICT: f64 = 1e-9;

/// Per-atom extremal coefficients of the best approximations from a context:
/// `lower[i]` is the largest coefficient at atom `i` of any `f ≤ a` in the
/// context, `upper[i]` the smallest coefficient of any `g ≥ a`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerOuterProfile {
    pub context: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// `λ_p = min spec(pap|ₚ)`, `μ_p = max spec(pap|ₚ)` for every atom `p`.
pub fn inner_outer(a: &HermitianMatrix, c: &Context) -> Result<InnerOuterProfile> {
    if a.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: a.dim() });
    }
    let mut lower = Vec::with_capacity(c.num_atoms());
    let mut upper = Vec::with_capacity(c.num_atoms());
    for p in c.atoms() {
        let e = eigen(&compress(a, p)?);
        lower.push(e.values[0]);
        upper.push(*e.values.last().unwrap());
    }
    Ok(InnerOuterProfile { context: c.label().to_string(), lower, upper })
}

/// A strict comparison decided within [`EPS_STRICT`] of a tie.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryWarning {
    pub context: String,
    pub atom: usize,
    /// `"lower"` (λ against r) or `"upper"` (μ against s).
    pub side: &'static str,
    pub endpoint: f64,
    pub coefficient: f64,
    pub tolerance: f64,
}

impl std::fmt::Display for BoundaryWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sym = if self.side == "lower" { "λ" } else { "μ" };
        write!(
            f,
            "context `{}`, atom {}: {sym} = {} is within {:e} of the endpoint {}",
            self.context, self.atom, self.coefficient, self.tolerance, self.endpoint
        )
    }
}

/// Atoms with `λ_p > r` and `μ_p < s`, plus warnings for near ties.
pub fn value_from_profile(profile: &InnerOuterProfile, iv: &RationalInterval) -> (AtomSet, Vec<BoundaryWarning>) {
    value_from_profile_with(profile, iv, EPS_STRICT)
}

pub fn value_from_profile_with(
    profile: &InnerOuterProfile,
    iv: &RationalInterval,
    eps: f64,
) -> (AtomSet, Vec<BoundaryWarning>) {
    let mut set = 0;
    let mut warnings = Vec::new();
    for (i, (&l, &m)) in profile.lower.iter().zip(&profile.upper).enumerate() {
        let lo_ok = !iv.has_finite_lo() || l - iv.lo() > eps;
        let hi_ok = !iv.has_finite_hi() || iv.hi() - m > eps;
        if iv.has_finite_lo() && (l - iv.lo()).abs() <= eps {
            warnings.push(BoundaryWarning {
                context: profile.context.clone(),
                atom: i,
                side: "lower",
                endpoint: iv.lo(),
                coefficient: l,
                tolerance: eps,
            });
        }
        if iv.has_finite_hi() && (iv.hi() - m).abs() <= eps {
            warnings.push(BoundaryWarning {
                context: profile.context.clone(),
                atom: i,
                side: "upper",
                endpoint: iv.hi(),
                coefficient: m,
                tolerance: eps,
            });
        }
        if lo_ok && hi_ok {
            set |= 1 << i;
        }
    }
    (set, warnings)
}

#[derive(Clone, Debug)]
pub struct Daseinisation {
    pub open: SpectralOpen,
    pub profiles: Vec<InnerOuterProfile>,
    pub warnings: Vec<BoundaryWarning>,
}

/// `δ(a)⁻¹(r, s)`: at each context `C` the atoms `p` with `λ_p > r` and
/// `μ_p < s`. An infinite endpoint drops its clause.
pub fn daseinise(a: &HermitianMatrix, iv: &RationalInterval, poset: &Arc<ContextPoset>) -> Result<Daseinisation> {
    daseinise_with(a, iv, poset, EPS_STRICT)
}

/// [`daseinise`] with the tie tolerance given explicitly.
pub fn daseinise_with(
    a: &HermitianMatrix,
    iv: &RationalInterval,
    poset: &Arc<ContextPoset>,
    eps: f64,
) -> Result<Daseinisation> {
    let profiles = profiles(a, poset)?;
    let mut values = Vec::with_capacity(poset.len());
    let mut warnings = Vec::new();
    for p in &profiles {
        let (v, w) = value_from_profile_with(p, iv, eps);
        values.push(v);
        warnings.extend(w);
    }
    let open = SpectralOpen::new(poset.clone(), values)?;
    Ok(Daseinisation { open, profiles, warnings })
}

/// Profiles of `a` at every context of the poset.
pub fn profiles(a: &HermitianMatrix, poset: &ContextPoset) -> Result<Vec<InnerOuterProfile>> {
    if a.dim() != poset.dim() {
        return Err(Error::DimensionMismatch { expected: poset.dim(), found: a.dim() });
    }
    poset.contexts().iter().map(|c| inner_outer(a, c)).collect()
}

/// Join of `δ(a)⁻¹` over a finite union of intervals.
pub fn daseinise_union(
    a: &HermitianMatrix,
    ivs: &[RationalInterval],
    poset: &Arc<ContextPoset>,
) -> Result<SpectralOpen> {
    ivs.iter().try_fold(SpectralOpen::bottom(poset), |acc, iv| acc.join(&daseinise(a, iv, poset)?.open))
}

/// Gelfand transform `â⁻¹(r, s) = D_{a−r} ∧ D_{s−a}` for `a` in the context.
pub fn gelfand_open(a: &HermitianMatrix, c: &Context, iv: &RationalInterval) -> Result<AtomSet> {
    let k = c.num_atoms();
    let all = crate::spectrum::full_set(k);
    let lo = if iv.has_finite_lo() { generator(c, &a.shift(iv.lo()))? } else { c.coefficients(a).map(|_| all)? };
    let hi = if iv.has_finite_hi() { generator(c, &a.shift(iv.hi()).scale(-1.0))? } else { all };
    Ok(lo & hi)
}

/// `δ(a) ≤ δ(b)` on the poset: pointwise comparison of the profiles.
pub fn daseinise_leq(a: &HermitianMatrix, b: &HermitianMatrix, poset: &ContextPoset) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let tol = EPS_ORDER * a.frobenius_norm().max(b.frobenius_norm()).max(1.0);
    let pa = profiles(a, poset)?;
    let pb = profiles(b, poset)?;
    Ok(pa.iter().zip(&pb).all(|(x, y)| {
        x.lower.iter().zip(&y.lower).all(|(l, m)| *l <= m + tol)
            && x.upper.iter().zip(&y.upper).all(|(l, m)| *l <= m + tol)
    }))
}

/// `d(a)*` at one context, as a map from the interval site to the bitsets of
/// the spectral site `L_C` (element index = atom mask): an interval `(r, s)`
/// goes to `↓{p : λ_p > r, μ_p < s}`, and ⊥ to `{∅}`.
pub fn dasein_site_map(a: &HermitianMatrix, c: &Context, site: &IntervalSite) -> Result<Vec<ElemSet>> {
    if c.num_atoms() > 6 {
        return Err(Error::EnumerationTooLarge { size: c.num_atoms(), cap: 6 });
    }
    let profile = inner_outer(a, c)?;
    let n = 1u64 << c.num_atoms();
    let down = |v: AtomSet| (0..n).filter(|&x| x & !v == 0).fold(0u64, |m, x| m | 1 << x);
    (0..site.len())
        .map(|k| match site.interval(k) {
            None => Ok(1),
            Some((r, s)) => Ok(down(value_from_profile(&profile, &RationalInterval::new(r, s)?).0)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{build_poset, context_of, PosetOptions};
    use crate::lattice::{frame_of_site, induced_frame_map, Site};
    use crate::linalg::tests::hermitian_of_dim;
    use crate::linalg::{is_positive_leq, ComplexMatrix, ProjectionMatrix};
    use crate::spectrum::{embed_with, spectral_site};
    use proptest::prelude::*;

    fn sx() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn sz() -> HermitianMatrix {
        HermitianMatrix::diag(&[1.0, -1.0])
    }

    fn v_poset() -> Arc<ContextPoset> {
        Arc::new(build_poset(vec![context_of("Cz", &sz()), context_of("Cx", &sx())], &PosetOptions::default()).unwrap())
    }

    fn iv(r: f64, s: f64) -> RationalInterval {
        RationalInterval::new(r, s).unwrap()
    }

    /// Largest λ with `λp − M(1−p) ≤ a`, by bisection on the positivity test.
    fn lower_oracle(a: &HermitianMatrix, p: &ProjectionMatrix) -> f64 {
        let big = 1e6 * a.spectral_norm().max(1e-3);
        let comp = ProjectionMatrix::new(HermitianMatrix::identity(a.dim()).sub(p.hermitian())).ok();
        let f = |l: f64| {
            let mut m = p.hermitian().scale(l);
            if let Some(q) = &comp {
                m = m.sub(&q.hermitian().scale(big));
            }
            m
        };
        let (mut lo, mut hi) = (-2.0 * a.spectral_norm() - 1.0, 2.0 * a.spectral_norm() + 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if is_positive_leq(&f(mid), a).unwrap() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn inner_outer_examples() {
        let c = context_of("d", &HermitianMatrix::diag(&[1.0, 3.0]));
        let prof = inner_outer(&HermitianMatrix::diag(&[1.0, 3.0]), &c).unwrap();
        assert_eq!(prof.lower, prof.upper);
        let mut got = prof.lower.clone();
        got.sort_by(f64::total_cmp);
        assert!((got[0] - 1.0).abs() < 1e-12 && (got[1] - 3.0).abs() < 1e-12);
        let prof = inner_outer(&sx(), &context_of("z", &sz())).unwrap();
        for v in prof.lower.iter().chain(&prof.upper) {
            assert!(v.abs() < 1e-12);
        }
        let a = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let prof = inner_outer(&a, &Context::trivial(2)).unwrap();
        let e = eigen(&a);
        assert!((prof.lower[0] - e.values[0]).abs() < 1e-12);
        assert!((prof.upper[0] - e.values[1]).abs() < 1e-12);
        assert!(matches!(inner_outer(&a, &Context::trivial(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sigma_x_oracle() {
        let c = context_of("z", &sz());
        for p in c.atoms() {
            assert!(lower_oracle(&sx(), p).abs() < 1e-6);
        }
    }

    #[test]
    fn daseinise_examples() {
        let p = v_poset();
        let cz = p.index_of_label("Cz").unwrap();
        let cx = p.index_of_label("Cx").unwrap();
        let d = daseinise(&sz(), &iv(0.5, 1.5), &p).unwrap();
        assert_eq!(d.open.value(cz).unwrap().count_ones(), 1);
        let whole = daseinise(&sx(), &RationalInterval::whole_line(), &p).unwrap();
        assert_eq!(whole.open, SpectralOpen::top(&p));
        let d = daseinise(&sx(), &iv(-0.5, 0.5), &p).unwrap();
        assert_eq!(d.open.value(cz).unwrap(), 0b11);
        assert_eq!(d.open.value(cx).unwrap(), 0);
        assert_eq!(d.open.value(p.bottom()).unwrap(), 0);
        assert!(d.warnings.is_empty());
        let tie = daseinise(&sx(), &iv(0.0, 0.5), &p).unwrap();
        assert!(!tie.warnings.is_empty());
        assert_eq!(tie.open.value(cz).unwrap(), 0);
    }

    #[test]
    fn gelfand_examples() {
        let a = HermitianMatrix::diag(&[1.0, 3.0]);
        let c = context_of("a", &a);
        let one = c.atoms().iter().position(|p| p.hermitian().trace_product(&a) < 2.0).unwrap();
        assert_eq!(gelfand_open(&a, &c, &iv(0.0, 2.0)).unwrap(), 1 << one);
        assert_eq!(gelfand_open(&a, &c, &iv(0.0, 4.0)).unwrap(), 0b11);
        assert_eq!(gelfand_open(&a, &c, &iv(4.0, 5.0)).unwrap(), 0);
        assert_eq!(gelfand_open(&a, &c, &"2,inf".parse().unwrap()).unwrap(), 1 << (1 - one));
        assert!(matches!(gelfand_open(&sx(), &c, &iv(0.0, 1.0)), Err(Error::NotInContext { .. })));
    }

    #[test]
    fn leq_examples() {
        let a = HermitianMatrix::diag(&[0.0, 1.0]);
        let b = HermitianMatrix::diag(&[1.0, 0.0]);
        let p = Arc::new(build_poset(vec![context_of("d", &a)], &PosetOptions::default()).unwrap());
        assert!(daseinise_leq(&a, &a, &p).unwrap());
        assert!(!daseinise_leq(&a, &b, &p).unwrap());
        assert!(!daseinise_leq(&b, &a, &p).unwrap());
    }

    #[test]
    fn dasein_site_map_induces_a_frame_map() {
        let a = HermitianMatrix::from_real_rows(&[vec![0.5, 0.5, 0.0], vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        let c = context_of("C", &HermitianMatrix::diag(&[1.0, 2.0, 3.0]));
        let grid = IntervalSite::new(vec![-1.0, 0.5, 1.5, 3.0]).unwrap();
        let domain = Site::interval(grid.grid().to_vec()).unwrap();
        let codomain = spectral_site(c.num_atoms()).unwrap();
        let images = dasein_site_map(&a, &c, &grid).unwrap();
        let map = induced_frame_map(|x| images[x], &domain, &codomain).unwrap();
        assert_eq!(map.domain.len(), frame_of_site(&domain).unwrap().len());
        // the image of the principal open of each interval is ↓ of its daseinisation value
        let prof = inner_outer(&a, &c).unwrap();
        for k in 1..grid.len() {
            let (r, s) = grid.interval(k).unwrap();
            let value = value_from_profile(&prof, &iv(r, s)).0;
            let img = map.apply(domain.canonical_map(k)).unwrap();
            assert_eq!(img, codomain.canonical_map(value as usize));
        }
    }

    fn scaled(max: usize) -> impl Strategy<Value = HermitianMatrix> {
        (1..=max).prop_flat_map(hermitian_of_dim).prop_map(|a| {
            let n = a.spectral_norm().max(1e-9);
            a.scale(0.5 / n)
        })
    }

    fn random_context(n: usize) -> impl Strategy<Value = Context> {
        (hermitian_of_dim(n), proptest::collection::vec(0..3usize, n)).prop_map(move |(h, groups)| {
            let u = eigen(&h).vectors;
            let mut atoms = Vec::new();
            for g in 0..3 {
                let vs: Vec<_> = (0..n).filter(|&i| groups[i] == g).map(|i| u[i].clone()).collect();
                if !vs.is_empty() {
                    atoms.push(ProjectionMatrix::from_orthonormal(&vs).unwrap());
                }
            }
            Context::new("R", atoms).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn extremal_coefficients_match_bisection(
            (a, c) in (1usize..=3).prop_flat_map(|n| (hermitian_of_dim(n), random_context(n)))
        ) {
            let a = a.scale(0.5 / a.spectral_norm().max(1e-9));
            let prof = inner_outer(&a, &c).unwrap();
            for (i, p) in c.atoms().iter().enumerate() {
                prop_assert!(prof.lower[i] <= prof.upper[i] + 1e-12);
                prop_assert!((prof.lower[i] - lower_oracle(&a, p)).abs() < 1e-6);
                let neg = a.scale(-1.0);
                prop_assert!((prof.upper[i] + lower_oracle(&neg, p)).abs() < 1e-6);
            }
        }

        #[test]
        fn agrees_with_gelfand_inside_the_context(a in scaled(4), r in -1.0f64..1.0, w in 0.01f64..1.5) {
            let c = context_of("a", &a);
            let p = Arc::new(build_poset(vec![c.clone()], &PosetOptions::default()).unwrap());
            let i = iv(r, r + w);
            let d = daseinise(&a, &i, &p).unwrap();
            prop_assume!(d.warnings.is_empty());
            let ci = p.find(&c).unwrap();
            prop_assert_eq!(d.open.value(ci).unwrap(), gelfand_open(&a, &c, &i).unwrap());
        }

        #[test]
        fn monotone_in_interval_and_context(
            (a, b) in (2usize..=3).prop_flat_map(|n| (hermitian_of_dim(n), hermitian_of_dim(n))),
            r in -3.0f64..0.0, w in 0.1f64..3.0, grow in 0.0f64..1.0,
        ) {
            let fine = context_of("a", &a);
            let coarse = context_of("b", &b);
            let p = Arc::new(build_poset(vec![fine, coarse], &PosetOptions::default()).unwrap());
            let small = daseinise(&a, &iv(r, r + w), &p).unwrap().open;
            let big = daseinise(&a, &iv(r - grow, r + w + grow), &p).unwrap().open;
            prop_assert!(small.is_monotone() && big.is_monotone());
            prop_assert!(small.leq(&big).unwrap());
            for c in 0..p.len() {
                for d in p.up(c) {
                    let e = embed_with(p.refinement(c, d).unwrap(), small.value(c).unwrap());
                    prop_assert_eq!(e & !small.value(d).unwrap(), 0);
                }
            }
        }

        #[test]
        fn order_preserving_and_reflecting((a, b) in (1usize..=4).prop_flat_map(|n| (hermitian_of_dim(n), hermitian_of_dim(n)))) {
            // b' ≥ a by construction, b itself usually incomparable
            let mut m = ComplexMatrix::zeros(a.dim());
            for i in 0..a.dim() { m = m.add(&ComplexMatrix::outer(&b.matrix().rows()[i])); }
            let above = a.add(&HermitianMatrix::new(m).unwrap());
            for other in [above, b] {
                let p = build_poset(
                    vec![context_of("a", &a), context_of("b", &other), context_of("d", &other.sub(&a))],
                    &PosetOptions::default(),
                ).unwrap();
                prop_assert_eq!(daseinise_leq(&a, &other, &p).unwrap(), is_positive_leq(&a, &other).unwrap());
                if daseinise_leq(&a, &other, &p).unwrap() && daseinise_leq(&other, &a, &p).unwrap() {
                    prop_assert!(a.sub(&other).frobenius_norm() < 1e-6);
                }
            }
        }
    }
}
