//! The sandwich semigroup on partial injections: fix a middle element,
//! multiply by composing through it. Arbitrary middle elements are
//! normalized to an idempotent at context creation, which any rank-
//! preserving change of the middle element permits; `normalize` exhibits
//! the witnessing isomorphism explicitly.

use serde::{Deserialize, Serialize};

use crate::element::{PartialInjection, Point, PointSet};
use crate::error::{Error, Result};

/// Product in the variant of composition with a fixed middle element:
/// `x·s·y`, composing left to right.
pub fn product_with(
    s: &PartialInjection,
    x: &PartialInjection,
    y: &PartialInjection,
) -> Result<PartialInjection> {
    x.compose(s)?.compose(y)
}

/// A size `n` together with a sandwich element. The working middle
/// element is always the idempotent `e`, the identity on `A = {1..k}`
/// where `k` is the rank of the sandwich element; the original element
/// is kept for reference. `A̅ = {k+1..n}` is the complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ContextRepr", into = "ContextRepr")]
pub struct SandwichContext {
    n: usize,
    sandwich: PartialInjection,
    e: PartialInjection,
    k: usize,
    a: PointSet,
    a_bar: PointSet,
}

impl SandwichContext {
    pub fn new(n: usize, sandwich: PartialInjection) -> Result<Self> {
        if sandwich.n() != n {
            return Err(Error::SizeMismatch(sandwich.n(), n));
        }
        let k = sandwich.rank();
        let a: PointSet = (1..=k).collect();
        let a_bar: PointSet = (k + 1..=n).collect();
        let e = PartialInjection::identity_on(n, &a);
        Ok(SandwichContext { n, sandwich, e, k, a, a_bar })
    }

    /// Context whose sandwich element is already the identity on `{1..k}`.
    pub fn with_rank(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::OutOfRange { point: k, n });
        }
        let e = PartialInjection::identity_on(n, &(1..=k).collect());
        Self::new(n, e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sandwich(&self) -> &PartialInjection {
        &self.sandwich
    }

    pub fn e(&self) -> &PartialInjection {
        &self.e
    }

    pub fn a_set(&self) -> &PointSet {
        &self.a
    }

    pub fn a_bar(&self) -> &PointSet {
        &self.a_bar
    }

    /// The sandwich product `x ∗ y = x·e·y`.
    pub fn product(&self, x: &PartialInjection, y: &PartialInjection) -> Result<PartialInjection> {
        product_with(&self.e, x, y)
    }

    /// Idempotents of the sandwich product are exactly the partial
    /// identities with domain inside `A`. The definitional check
    /// `x ∗ x = x` is equated with this in tests.
    pub fn is_idempotent(&self, x: &PartialInjection) -> bool {
        x.n() == self.n && x.is_partial_identity() && x.dom().is_subset(&self.a)
    }

    /// All idempotents, one per subset of `A`, in canonical order.
    pub fn idempotents(&self) -> Vec<PartialInjection> {
        let mut subsets: Vec<PointSet> = vec![PointSet::new()];
        for &p in &self.a {
            let mut grown: Vec<PointSet> = subsets
                .iter()
                .map(|s| {
                    let mut t = s.clone();
                    t.insert(p);
                    t
                })
                .collect();
            subsets.append(&mut grown);
        }
        let mut out: Vec<PartialInjection> =
            subsets.iter().map(|s| PartialInjection::identity_on(self.n, s)).collect();
        out.sort_unstable();
        out
    }

    /// The natural partial order on idempotents: `f ≤ h` iff
    /// `f ∗ h = h ∗ f = f`, which holds exactly when `dom(f) ⊆ dom(h)`.
    pub fn natural_leq(&self, f: &PartialInjection, h: &PartialInjection) -> Result<bool> {
        for x in [f, h] {
            if !self.is_idempotent(x) {
                return Err(Error::NotIdempotent(x.to_canonical_string()));
            }
        }
        Ok(f.dom().is_subset(&h.dom()))
    }

    /// Left annihilator membership: `x ∗ y = ∅` for every `y`, which
    /// holds exactly when `im(x) ⊆ A̅`.
    pub fn in_ann_l(&self, x: &PartialInjection) -> bool {
        x.im().is_subset(&self.a_bar)
    }

    /// Right annihilator membership: `y ∗ x = ∅` for every `y`, which
    /// holds exactly when `dom(x) ⊆ A̅`.
    pub fn in_ann_r(&self, x: &PartialInjection) -> bool {
        x.dom().is_subset(&self.a_bar)
    }

    /// Two-sided annihilator membership.
    pub fn in_ann(&self, x: &PartialInjection) -> bool {
        self.in_ann_l(x) && self.in_ann_r(x)
    }

    /// Whether `x` is a sandwich product of two elements, which holds
    /// exactly when `rank(x) ≤ k`: every product factors through `e`.
    pub fn is_decomposable(&self, x: &PartialInjection) -> bool {
        x.rank() <= self.k
    }

    /// Splits a decomposable `x` as `b ∗ c`: with `x_1 < … < x_m` the
    /// domain of `x`, `b` sends `x_i` to `i` and `c` sends `i` to
    /// `x(x_i)`. The route through `{1..m} ⊆ A` survives `e`.
    pub fn decompose(&self, x: &PartialInjection) -> Result<(PartialInjection, PartialInjection)> {
        if !self.is_decomposable(x) {
            return Err(Error::Indecomposable { rank: x.rank(), k: self.k });
        }
        let dom: Vec<Point> = x.dom().into_iter().collect();
        let b: Vec<(Point, Point)> = dom.iter().enumerate().map(|(i, &d)| (d, i + 1)).collect();
        let c: Vec<(Point, Point)> =
            dom.iter().enumerate().map(|(i, &d)| (i + 1, x.apply(d).unwrap())).collect();
        let b = PartialInjection::make(self.n, &b)?;
        let c = PartialInjection::make(self.n, &c)?;
        debug_assert_eq!(self.product(&b, &c).unwrap(), *x);
        Ok((b, c))
    }

    /// Membership of `x` in the two-sided principal ideal of an
    /// idempotent `f`: a witness pair `(u, v)` with `u ∗ f ∗ v = x`
    /// when `rank(x) ≤ rank(f)`, absent otherwise. The witness routes
    /// the domain of `x` through the domain of `f`.
    pub fn ideal_membership(
        &self,
        f: &PartialInjection,
        x: &PartialInjection,
    ) -> Result<Option<(PartialInjection, PartialInjection)>> {
        if !self.is_idempotent(f) {
            return Err(Error::NotIdempotent(f.to_canonical_string()));
        }
        if x.n() != self.n {
            return Err(Error::SizeMismatch(x.n(), self.n));
        }
        if x.rank() > f.rank() {
            return Ok(None);
        }
        let dom_f: Vec<Point> = f.dom().into_iter().collect();
        let dom_x: Vec<Point> = x.dom().into_iter().collect();
        let u: Vec<(Point, Point)> =
            dom_x.iter().zip(&dom_f).map(|(&s, &d)| (s, d)).collect();
        let v: Vec<(Point, Point)> =
            dom_x.iter().zip(&dom_f).map(|(&s, &d)| (d, x.apply(s).unwrap())).collect();
        let u = PartialInjection::make(self.n, &u)?;
        let v = PartialInjection::make(self.n, &v)?;
        debug_assert_eq!(
            self.product(&self.product(&u, f)?, &v).unwrap(),
            *x,
            "witness must reproduce the element"
        );
        Ok(Some((u, v)))
    }

    /// Smallest rank of an idempotent whose principal ideal contains
    /// `x`. Membership depends on an idempotent only through its rank,
    /// so scanning one idempotent per rank suffices; the result always
    /// equals `rank(x)`.
    pub fn min_idempotent_rank(&self, x: &PartialInjection) -> Result<usize> {
        if !self.is_decomposable(x) {
            return Err(Error::Indecomposable { rank: x.rank(), k: self.k });
        }
        for r in 0..=self.k {
            let f = PartialInjection::identity_on(self.n, &(1..=r).collect());
            if self.ideal_membership(&f, x)?.is_some() {
                return Ok(r);
            }
        }
        unreachable!("rank(x) ≤ k, so the rank-k idempotent always admits x")
    }
}

/// Whether two sandwich elements of the same size yield isomorphic
/// sandwich semigroups: exactly when their ranks agree.
pub fn iso_criterion(a: &PartialInjection, b: &PartialInjection) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch(a.n(), b.n()));
    }
    Ok(a.rank() == b.rank())
}

/// Change of coordinates taking the variant with middle element `a` to
/// the one with middle element `e`, the identity on `{1..rank(a)}`:
/// two bijections `p`, `q` of the base set with `q·e·p = a`, so that
/// `x ↦ p·x·q` is an isomorphism of the two sandwich products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub p: PartialInjection,
    pub q: PartialInjection,
}

impl Normalization {
    /// Applies the isomorphism: `x ↦ p·x·q`.
    pub fn map(&self, x: &PartialInjection) -> Result<PartialInjection> {
        self.p.compose(x)?.compose(&self.q)
    }
}

/// Builds the normalization of `a`. With `d_1 < … < d_k` the domain of
/// `a` and `r_i = a(d_i)`: `q` sends `d_i` to `i` and `p` sends `i` to
/// `r_i`, both completed to bijections by matching the leftover points
/// in ascending order. Any completion works; this one is fixed for
/// determinism.
pub fn normalize(a: &PartialInjection) -> Normalization {
    let n = a.n();
    let dom: Vec<Point> = a.dom().into_iter().collect();
    let k = dom.len();
    let range: Vec<Point> = dom.iter().map(|&d| a.apply(d).unwrap()).collect();
    let low: Vec<Point> = (1..=k).collect();
    let q = fill_bijection(n, &dom, &low);
    let p = fill_bijection(n, &low, &range);
    debug_assert_eq!(
        q.compose(&PartialInjection::identity_on(n, &low.iter().copied().collect()))
            .and_then(|qe| qe.compose(&p))
            .unwrap(),
        *a
    );
    Normalization { p, q }
}

/// The bijection of `{1..n}` pinning `sources[i] -> targets[i]` and
/// matching the remaining points to the remaining values in ascending
/// order.
fn fill_bijection(n: usize, sources: &[Point], targets: &[Point]) -> PartialInjection {
    let mut pairs: Vec<(Point, Point)> = sources.iter().copied().zip(targets.iter().copied()).collect();
    let used_s: PointSet = sources.iter().copied().collect();
    let used_t: PointSet = targets.iter().copied().collect();
    let rest_s = (1..=n).filter(|p| !used_s.contains(p));
    let rest_t = (1..=n).filter(|p| !used_t.contains(p));
    pairs.extend(rest_s.zip(rest_t));
    PartialInjection::make(n, &pairs).expect("pinned pairs and fill are disjoint and injective")
}

#[derive(Serialize, Deserialize)]
struct ContextRepr {
    n: usize,
    sandwich: PartialInjection,
}

impl TryFrom<ContextRepr> for SandwichContext {
    type Error = Error;

    fn try_from(repr: ContextRepr) -> Result<Self> {
        SandwichContext::new(repr.n, repr.sandwich)
    }
}

impl From<SandwichContext> for ContextRepr {
    fn from(ctx: SandwichContext) -> Self {
        ContextRepr { n: ctx.n, sandwich: ctx.sandwich }
    }
}
