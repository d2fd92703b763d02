//! Automorphisms of the sandwich product, their two building blocks,
//! and the bridge between them: every automorphism is a block
//! permutation part `τ` (one permutation of the kept set, two of its
//! complement) followed by a within-class shuffle `π`, and `factorize`
//! recovers that pair exactly. For the zero kept block the two parts
//! overlap and the group degenerates; those entry points refuse with a
//! dedicated error instead of producing a wrong count.

use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;
use std::sync::OnceLock;

use itertools::Itertools;
use num_bigint::BigUint;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::congruence::CongruenceClass;
use crate::element::{enumerate_all, universe_size, PartialInjection, Point, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::perm::{all_block_perms, BlockPerm};
use crate::sandwich::SandwichContext;

/// A bijection of the canonical element list, as the image index per
/// index. `verified` is set only by a full homomorphism check (or by
/// composing maps that passed one); equality and hashing ignore it.
#[derive(Clone, Debug, Eq, Serialize, Deserialize)]
#[serde(try_from = "AutomorphismRepr", into = "AutomorphismRepr")]
pub struct Automorphism {
    images: Vec<u16>,
    verified: bool,
}

impl PartialEq for Automorphism {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
    }
}

impl Hash for Automorphism {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.images.hash(state);
    }
}

impl Automorphism {
    pub fn identity(m: usize) -> Self {
        Automorphism { images: (0..m as u16).collect(), verified: true }
    }

    /// Wraps an unchecked image list; rejects non-bijections. The result
    /// is unverified until an engine checks it.
    pub fn from_images(images: Vec<u16>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &v in &images {
            if usize::from(v) >= m || std::mem::replace(&mut seen[usize::from(v)], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection of 0..{m}"
                )));
            }
        }
        Ok(Automorphism { images, verified: false })
    }

    pub fn images(&self) -> &[u16] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        usize::from(self.images[i])
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == usize::from(v))
    }

    /// Applies `self` first, then `other`. Verification survives
    /// composition: a composite of checked automorphisms is one.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.images.len() != other.images.len() {
            return Err(Error::SizeMismatch(self.images.len(), other.images.len()));
        }
        let images = self.images.iter().map(|&v| other.images[usize::from(v)]).collect();
        Ok(Automorphism { images, verified: self.verified && other.verified })
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0u16; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[usize::from(v)] = i as u16;
        }
        Automorphism { images, verified: self.verified }
    }
}

#[derive(Serialize, Deserialize)]
struct AutomorphismRepr {
    images: Vec<u16>,
}

impl TryFrom<AutomorphismRepr> for Automorphism {
    type Error = Error;

    fn try_from(repr: AutomorphismRepr) -> Result<Self> {
        Automorphism::from_images(repr.images)
    }
}

impl From<Automorphism> for AutomorphismRepr {
    fn from(aut: Automorphism) -> Self {
        AutomorphismRepr { images: aut.images }
    }
}

/// The block-permutation data of a structured automorphism: `g` on the
/// kept set, `h1` and `h2` on the complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GTriple {
    pub g: BlockPerm,
    pub h1: BlockPerm,
    pub h2: BlockPerm,
}

impl GTriple {
    pub fn identity(ctx: &SandwichContext) -> Self {
        let (n, k) = (ctx.n(), ctx.k());
        GTriple {
            g: BlockPerm::identity(1, k),
            h1: BlockPerm::identity(k + 1, n - k),
            h2: BlockPerm::identity(k + 1, n - k),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.g.is_identity() && self.h1.is_identity() && self.h2.is_identity()
    }

    /// Componentwise product, each component applying `self`'s part
    /// first.
    pub fn compose(&self, other: &Self) -> Self {
        GTriple {
            g: self.g.compose(&other.g),
            h1: self.h1.compose(&other.h1),
            h2: self.h2.compose(&other.h2),
        }
    }
}

/// A choice of permutation for every congruence class, each given as
/// target positions within the class member list. Valid only against
/// the class partition it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassPerm {
    perms: Vec<Vec<u32>>,
}

impl ClassPerm {
    pub fn perms(&self) -> &[Vec<u32>] {
        &self.perms
    }

    pub fn is_identity(&self) -> bool {
        self.perms.iter().all(|p| p.iter().enumerate().all(|(i, &v)| i == v as usize))
    }
}

fn positions_one_line(perm: &[u32]) -> String {
    perm.iter().map(u32::to_string).join(",")
}

/// The two factors of an automorphism: apply the block part first, then
/// the within-class part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub triple: GTriple,
    pub class_perm: ClassPerm,
}

impl Serialize for Factorization {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct NontrivialPerms<'a>(&'a ClassPerm);
        impl Serialize for NontrivialPerms<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let moved: Vec<(usize, &Vec<u32>)> = self
                    .0
                    .perms
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.iter().enumerate().any(|(i, &v)| i != v as usize))
                    .collect();
                let mut map = serializer.serialize_map(Some(moved.len()))?;
                for (ci, perm) in moved {
                    map.serialize_entry(&ci.to_string(), &positions_one_line(perm))?;
                }
                map.end()
            }
        }

        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("g", &self.triple.g.one_line())?;
        map.serialize_entry("h1", &self.triple.h1.one_line())?;
        map.serialize_entry("h2", &self.triple.h2.one_line())?;
        map.serialize_entry("class_perms", &NontrivialPerms(&self.class_perm))?;
        map.end()
    }
}

/// The order of the automorphism group, with a flag for the zero kept
/// block where the structured formula does not apply and the count is
/// that of the null semigroup instead.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutOrder {
    pub order: BigUint,
    pub degenerate: bool,
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).fold(BigUint::from(1u32), |a, b| a * b)
}

/// The total bijection acting as `g` on the kept block and as `h` on
/// the complement block.
pub fn combined_perm(ctx: &SandwichContext, g: &BlockPerm, h: &BlockPerm) -> PartialInjection {
    let (n, k) = (ctx.n(), ctx.k());
    assert_eq!((g.start(), g.len()), (1, k), "g must act on the kept block");
    assert_eq!((h.start(), h.len()), (k + 1, n - k), "h must act on the complement");
    let pairs: Vec<(Point, Point)> = g
        .points()
        .map(|x| (x, g.apply(x)))
        .chain(h.points().map(|x| (x, h.apply(x))))
        .collect();
    PartialInjection::make(n, &pairs).expect("the blocks partition the ground set")
}

/// Order of the automorphism group. For a nonzero kept block this is
/// `k!·((n−k)!)²·∏|class|!`; for the zero block every pair multiplies
/// to the empty element, so the automorphisms are exactly the
/// bijections fixing it: `(|universe|−1)!`, flagged degenerate.
pub fn aut_order(ctx: &SandwichContext) -> Result<AutOrder> {
    let (n, k) = (ctx.n(), ctx.k());
    if k == 0 {
        if n > ENUMERATION_CAP {
            return Err(Error::CapExceeded { quantity: "size", value: n, cap: ENUMERATION_CAP });
        }
        let m = universe_size(n) as usize;
        return Ok(AutOrder { order: factorial(m - 1), degenerate: true });
    }
    let mut order = factorial(k) * factorial(n - k) * factorial(n - k);
    for class in ctx.classes()? {
        order *= factorial(class.members.len());
    }
    Ok(AutOrder { order, degenerate: false })
}

/// Precomputed element and class indexing for one context, on which all
/// automorphism construction and checking runs. Verification multiplies
/// elements directly; no product table is materialized.
pub struct AutEngine {
    ctx: SandwichContext,
    elements: Vec<PartialInjection>,
    classes: Vec<CongruenceClass>,
    class_of: Vec<u32>,
    pos_in_class: Vec<u32>,
    class_members: Vec<Vec<u16>>,
    e_index: u16,
    class_perms_certified: OnceLock<()>,
}

impl AutEngine {
    pub fn new(ctx: &SandwichContext) -> Result<Self> {
        let elements = enumerate_all(ctx.n())?;
        let classes = ctx.classes()?;
        let m = elements.len();
        let mut class_of = vec![0u32; m];
        let mut pos_in_class = vec![0u32; m];
        let mut class_members = Vec::with_capacity(classes.len());
        for (ci, class) in classes.iter().enumerate() {
            let mut members = Vec::with_capacity(class.members.len());
            for (pos, x) in class.members.iter().enumerate() {
                let i = elements.binary_search(x).expect("class members come from the universe");
                class_of[i] = ci as u32;
                pos_in_class[i] = pos as u32;
                members.push(i as u16);
            }
            class_members.push(members);
        }
        let e_index = elements.binary_search(ctx.e()).expect("e is in the universe") as u16;
        Ok(AutEngine {
            ctx: ctx.clone(),
            elements,
            classes,
            class_of,
            pos_in_class,
            class_members,
            e_index,
            class_perms_certified: OnceLock::new(),
        })
    }

    pub fn ctx(&self) -> &SandwichContext {
        &self.ctx
    }

    pub fn elements(&self) -> &[PartialInjection] {
        &self.elements
    }

    pub fn classes(&self) -> &[CongruenceClass] {
        &self.classes
    }

    pub fn e_index(&self) -> usize {
        usize::from(self.e_index)
    }

    pub fn index_of(&self, x: &PartialInjection) -> Option<usize> {
        self.elements.binary_search(x).ok()
    }

    fn product_index(&self, i: usize, j: usize) -> usize {
        let p = self
            .ctx
            .product(&self.elements[i], &self.elements[j])
            .expect("universe elements share the context size");
        self.index_of(&p).expect("products stay in the universe")
    }

    /// The definitional check: a bijection of indices that carries every
    /// product to the product of the images.
    pub fn is_automorphism(&self, images: &[u16]) -> bool {
        let m = self.elements.len();
        if images.len() != m {
            return false;
        }
        let mut seen = vec![false; m];
        for &v in images {
            if usize::from(v) >= m || std::mem::replace(&mut seen[usize::from(v)], true) {
                return false;
            }
        }
        (0..m).all(|i| {
            (0..m).all(|j| {
                usize::from(images[self.product_index(i, j)])
                    == self.product_index(usize::from(images[i]), usize::from(images[j]))
            })
        })
    }

    /// Runs the full check on `aut` and marks it verified.
    pub fn verified(&self, mut aut: Automorphism) -> Result<Automorphism> {
        if !self.is_automorphism(&aut.images) {
            return Err(Error::NotAutomorphism(format!(
                "the map is not an automorphism of the {}-element table",
                self.elements.len()
            )));
        }
        aut.verified = true;
        Ok(aut)
    }

    /// Image list of the block conjugation, before any verification.
    /// Checking flows use this to report a failed check instead of
    /// unwinding.
    pub fn tau_images(&self, t: &GTriple) -> Vec<u16> {
        let u = combined_perm(&self.ctx, &t.g, &t.h1).inverse();
        let w = combined_perm(&self.ctx, &t.g, &t.h2);
        self.elements
            .iter()
            .map(|x| {
                let y = u.compose(x).and_then(|ux| ux.compose(&w)).expect("sizes agree");
                self.index_of(&y).expect("conjugates stay in the universe") as u16
            })
            .collect()
    }

    /// The structured automorphism of a block-permutation triple:
    /// `x ↦ (g∪h1)⁻¹ · x · (g∪h2)`. Always verifies.
    pub fn tau(&self, t: &GTriple) -> Automorphism {
        self.verified(Automorphism { images: self.tau_images(t), verified: false })
            .expect("block conjugation preserves the product")
    }

    pub fn identity_class_perm(&self) -> ClassPerm {
        ClassPerm {
            perms: self.classes.iter().map(|c| (0..c.members.len() as u32).collect()).collect(),
        }
    }

    /// Validates one position permutation per class, in class order.
    pub fn class_perm(&self, perms: Vec<Vec<u32>>) -> Result<ClassPerm> {
        if perms.len() != self.classes.len() {
            return Err(Error::CrossClassMove(format!(
                "{} class permutations for {} classes",
                perms.len(),
                self.classes.len()
            )));
        }
        for (ci, perm) in perms.iter().enumerate() {
            let size = self.classes[ci].members.len();
            let mut seen = vec![false; size];
            let ok = perm.len() == size
                && perm.iter().all(|&v| {
                    (v as usize) < size && !std::mem::replace(&mut seen[v as usize], true)
                });
            if !ok {
                return Err(Error::InvalidPermutation(format!(
                    "{perm:?} is not a permutation of the {size} positions of class {ci}"
                )));
            }
        }
        Ok(ClassPerm { perms })
    }

    /// Reads a class permutation off an image map, rejecting any map
    /// that moves an element out of its class.
    pub fn class_perm_from_images(&self, images: &[u16]) -> Result<ClassPerm> {
        if images.len() != self.elements.len() {
            return Err(Error::SizeMismatch(images.len(), self.elements.len()));
        }
        let mut perms: Vec<Vec<u32>> =
            self.classes.iter().map(|c| vec![u32::MAX; c.members.len()]).collect();
        for (i, &v) in images.iter().enumerate() {
            let (ci, cv) = (self.class_of[i], self.class_of[usize::from(v)]);
            if ci != cv {
                return Err(Error::CrossClassMove(format!(
                    "{} moves to {}, which lies in a different class",
                    self.elements[i], self.elements[usize::from(v)]
                )));
            }
            perms[ci as usize][self.pos_in_class[i] as usize] = self.pos_in_class[usize::from(v)];
        }
        self.class_perm(perms)
    }

    /// The automorphism shuffling each class internally by `cp` and
    /// touching nothing else. Always verifies: products are constant on
    /// class pairs and land on decomposables, which sit alone in their
    /// classes.
    pub fn pi(&self, cp: &ClassPerm) -> Result<Automorphism> {
        if cp.perms.len() != self.classes.len()
            || cp.perms.iter().zip(&self.classes).any(|(p, c)| p.len() != c.members.len())
        {
            return Err(Error::CrossClassMove(
                "class permutation shaped for a different partition".into(),
            ));
        }
        let mut images = vec![0u16; self.elements.len()];
        for (members, perm) in self.class_members.iter().zip(&cp.perms) {
            for (pos, &el) in members.iter().enumerate() {
                images[usize::from(el)] = members[perm[pos] as usize];
            }
        }
        self.verified(Automorphism { images, verified: false })
    }

    /// One-time certificate that every within-class shuffle is an
    /// automorphism, shared by the whole enumeration: products are
    /// constant on pairs of classes, and every product is decomposable,
    /// hence a singleton class fixed by any shuffle.
    fn certify_class_perms(&self) {
        self.class_perms_certified.get_or_init(|| {
            let violations =
                self.ctx.congruence_violations().expect("engine construction enumerated already");
            assert!(violations.is_empty(), "products must be constant on class pairs");
            let m = self.elements.len();
            for i in 0..m {
                for j in 0..m {
                    let p = self.product_index(i, j);
                    assert!(
                        self.class_members[self.class_of[p] as usize].len() == 1,
                        "products must land in singleton classes"
                    );
                }
            }
        });
    }

    /// All block-permutation triples, lexicographic in `(g, h1, h2)`.
    pub fn all_triples(&self) -> Vec<GTriple> {
        let (n, k) = (self.ctx.n(), self.ctx.k());
        let gs = all_block_perms(1, k);
        let hs = all_block_perms(k + 1, n - k);
        let mut out = Vec::with_capacity(gs.len() * hs.len() * hs.len());
        for g in &gs {
            for h1 in &hs {
                for h2 in &hs {
                    out.push(GTriple { g: g.clone(), h1: h1.clone(), h2: h2.clone() });
                }
            }
        }
        out
    }

    /// Streams every structured automorphism `tau(t)` then `pi(c)`,
    /// triples outermost in lexicographic order, class permutations as
    /// an odometer with the last class fastest and each class
    /// lexicographic. Duplicates are skipped (none are expected: the
    /// factorization is unique). Returns the number visited.
    pub fn for_each_aut(
        &self,
        mut visit: impl FnMut(Automorphism) -> ControlFlow<()>,
    ) -> Result<usize> {
        if self.ctx.k() == 0 {
            return Err(Error::DegenerateContext(
                "structured enumeration needs a nonzero kept block",
            ));
        }
        self.certify_class_perms();
        // choices[ci][s][pos] = member index after applying the class's
        // s-th position permutation at pos.
        let choices: Vec<Vec<Vec<u16>>> = self
            .class_members
            .iter()
            .map(|members| {
                (0..members.len())
                    .permutations(members.len())
                    .map(|perm| perm.iter().map(|&p| members[p]).collect())
                    .collect()
            })
            .collect();
        let m = self.elements.len();
        let mut seen: HashSet<Box<[u16]>> = HashSet::new();
        let mut emitted = 0usize;
        let mut pi_im = vec![0u16; m];
        for t in self.all_triples() {
            let tau = self.tau(&t);
            let mut sel = vec![0usize; choices.len()];
            'odometer: loop {
                for ((members, &pick), mapped) in
                    self.class_members.iter().zip(&sel).zip(&choices)
                {
                    for (pos, &el) in members.iter().enumerate() {
                        pi_im[usize::from(el)] = mapped[pick][pos];
                    }
                }
                let images: Vec<u16> =
                    tau.images.iter().map(|&v| pi_im[usize::from(v)]).collect();
                if seen.insert(images.clone().into_boxed_slice()) {
                    emitted += 1;
                    // tau passed the full check; pi is covered by the
                    // class-perm certificate; composites inherit both.
                    if visit(Automorphism { images, verified: true }).is_break() {
                        return Ok(emitted);
                    }
                }
                let mut ci = sel.len();
                loop {
                    if ci == 0 {
                        break 'odometer;
                    }
                    ci -= 1;
                    sel[ci] += 1;
                    if sel[ci] < choices[ci].len() {
                        continue 'odometer;
                    }
                    sel[ci] = 0;
                }
            }
        }
        Ok(emitted)
    }

    /// The structured stream as a list, optionally stopping after
    /// `limit` automorphisms.
    pub fn enumerate_aut(&self, limit: Option<usize>) -> Result<Vec<Automorphism>> {
        let mut out = Vec::new();
        let cap = limit.unwrap_or(usize::MAX);
        if cap == 0 {
            return Ok(Vec::new());
        }
        self.for_each_aut(|aut| {
            out.push(aut);
            if out.len() < cap {
                ControlFlow::Continue(())
            } else {
                ControlFlow::Break(())
            }
        })?;
        Ok(out)
    }

    /// Splits a verified automorphism into its block part and its
    /// within-class part, reading `g` off the images of the kept
    /// single-point identities and `h1`, `h2` off the complement ones;
    /// the residue `tau⁻¹ then sigma` must shuffle within classes.
    pub fn factorize(&self, sigma: &Automorphism) -> Result<Factorization> {
        let (n, k) = (self.ctx.n(), self.ctx.k());
        if k == 0 {
            return Err(Error::DegenerateContext(
                "factorization needs a nonzero kept block",
            ));
        }
        if sigma.images.len() != self.elements.len() {
            return Err(Error::SizeMismatch(sigma.images.len(), self.elements.len()));
        }
        if !sigma.verified {
            return Err(Error::NotAutomorphism(
                "factorization requires a verified automorphism".into(),
            ));
        }
        let atom_image = |x: Point| -> Result<(Point, Point)> {
            let atom = PartialInjection::make(n, &[(x, x)]).expect("single pins are valid");
            let idx = self.index_of(&atom).expect("atoms are in the universe");
            let image = &self.elements[sigma.apply(idx)];
            let mut pairs = image.pairs();
            match (pairs.next(), pairs.next()) {
                (Some(pair), None) => Ok(pair),
                _ => Err(Error::NotAutomorphism(format!(
                    "the image of {atom} is {image}, not a single pin"
                ))),
            }
        };
        let mut g_images = Vec::with_capacity(k);
        for i in 1..=k {
            let (s, t) = atom_image(i)?;
            if s != t || s > k {
                return Err(Error::NotAutomorphism(format!(
                    "a kept single pin moved to {s}>{t}, outside the kept diagonal"
                )));
            }
            g_images.push(s);
        }
        let mut h1_images = Vec::with_capacity(n - k);
        let mut h2_images = Vec::with_capacity(n - k);
        for j in k + 1..=n {
            let (s, t) = atom_image(j)?;
            if s <= k || t <= k {
                return Err(Error::NotAutomorphism(format!(
                    "a complement single pin moved to {s}>{t}, touching the kept block"
                )));
            }
            h1_images.push(s);
            h2_images.push(t);
        }
        let not_aut = |_| Error::NotAutomorphism("single-pin images do not form bijections".into());
        let triple = GTriple {
            g: BlockPerm::new(1, g_images).map_err(not_aut)?,
            h1: BlockPerm::new(k + 1, h1_images).map_err(not_aut)?,
            h2: BlockPerm::new(k + 1, h2_images).map_err(not_aut)?,
        };
        let residue = self.tau(&triple).inverse().compose(sigma)?;
        let class_perm = self.class_perm_from_images(&residue.images)?;
        debug_assert_eq!(self.pi(&class_perm)?.images, residue.images);
        Ok(Factorization { triple, class_perm })
    }
}

// Tests continue in this file.
#[cfg(test)]
mod tests {
    use super::*;

    fn el(n: usize, text: &str) -> PartialInjection {
        PartialInjection::parse(text, n).unwrap()
    }

    fn ctx(n: usize, k: usize) -> SandwichContext {
        SandwichContext::with_rank(n, k).unwrap()
    }

    fn engine(n: usize, k: usize) -> AutEngine {
        AutEngine::new(&ctx(n, k)).unwrap()
    }

    #[test]
    fn combined_perm_acts_blockwise() {
        let c = ctx(3, 1);
        let id = combined_perm(&c, &BlockPerm::identity(1, 1), &BlockPerm::identity(2, 2));
        assert_eq!(id, PartialInjection::identity(3));
        let swapped =
            combined_perm(&c, &BlockPerm::identity(1, 1), &BlockPerm::new(2, vec![3, 2]).unwrap());
        assert_eq!(swapped, el(3, "1>1,2>3,3>2"));
    }

    #[test]
    fn combined_perm_is_injective_on_pairs() {
        let c = ctx(4, 2);
        let gs = all_block_perms(1, 2);
        let hs = all_block_perms(3, 2);
        let mut seen = std::collections::HashSet::new();
        for g in &gs {
            for h in &hs {
                assert!(seen.insert(combined_perm(&c, g, h)));
            }
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn tau_of_identity_triple_is_identity() {
        for (n, k) in [(2, 1), (3, 1), (3, 2), (3, 3)] {
            let eng = engine(n, k);
            let tau = eng.tau(&GTriple::identity(eng.ctx()));
            assert!(tau.is_identity() && tau.is_verified());
        }
    }

    #[test]
    fn tau_moves_single_pins_by_the_block_data() {
        let eng = engine(3, 1);
        for t in eng.all_triples() {
            let tau = eng.tau(&t);
            let u = combined_perm(eng.ctx(), &t.g, &t.h1);
            let w = combined_perm(eng.ctx(), &t.g, &t.h2);
            for s in 1..=3 {
                for tt in 1..=3 {
                    let pin = el(3, &format!("{s}>{tt}"));
                    let image = &eng.elements()[tau.apply(eng.index_of(&pin).unwrap())];
                    let expected = PartialInjection::make(
                        3,
                        &[(u.apply(s).unwrap(), w.apply(tt).unwrap())],
                    )
                    .unwrap();
                    assert_eq!(*image, expected);
                }
            }
        }
    }

    #[test]
    fn tau_applies_the_conjugation_formula() {
        let eng = engine(3, 1);
        let t = GTriple {
            g: BlockPerm::identity(1, 1),
            h1: BlockPerm::new(2, vec![3, 2]).unwrap(),
            h2: BlockPerm::identity(2, 2),
        };
        let tau = eng.tau(&t);
        let from = eng.index_of(&el(3, "2>2")).unwrap();
        assert_eq!(eng.elements()[tau.apply(from)], el(3, "3>2"));
    }

    #[test]
    fn tau_is_injective_in_the_triple() {
        for (n, k) in [(3, 1), (3, 2), (3, 3)] {
            let eng = engine(n, k);
            let triples = eng.all_triples();
            let mut seen = std::collections::HashSet::new();
            for t in &triples {
                assert!(seen.insert(eng.tau(t)), "duplicate tau at n={n} k={k}");
            }
            assert_eq!(seen.len(), triples.len());
        }
    }

    #[test]
    fn pi_of_identity_is_identity() {
        let eng = engine(3, 1);
        let pi = eng.pi(&eng.identity_class_perm()).unwrap();
        assert!(pi.is_identity() && pi.is_verified());
    }

    #[test]
    fn pi_swapping_a_two_element_class_verifies() {
        let eng = engine(3, 1);
        let target = [el(3, "2>2,3>3"), el(3, "2>3,3>2")];
        let ci = (0..eng.classes().len())
            .find(|&ci| eng.classes()[ci].members == target)
            .expect("the empty-profile pair is a class");
        let mut perms: Vec<Vec<u32>> =
            eng.classes().iter().map(|c| (0..c.members.len() as u32).collect()).collect();
        perms[ci] = vec![1, 0];
        let pi = eng.pi(&eng.class_perm(perms).unwrap()).unwrap();
        assert!(pi.is_verified() && !pi.is_identity());
        let i = eng.index_of(&target[0]).unwrap();
        let j = eng.index_of(&target[1]).unwrap();
        assert_eq!(pi.apply(i), j);
        assert_eq!(pi.apply(j), i);
    }

    #[test]
    fn class_perm_rejects_moves_across_classes() {
        let eng = engine(3, 1);
        // Swapping two distinct decomposables crosses their singleton
        // classes.
        let a = eng.index_of(&el(3, "1>1")).unwrap();
        let b = eng.index_of(&el(3, "1>2")).unwrap();
        let mut images: Vec<u16> = (0..eng.elements().len() as u16).collect();
        images.swap(a, b);
        assert!(matches!(
            eng.class_perm_from_images(&images),
            Err(Error::CrossClassMove(_))
        ));
        assert!(matches!(
            eng.class_perm(vec![vec![0]]),
            Err(Error::CrossClassMove(_))
        ));
        let mut perms: Vec<Vec<u32>> =
            eng.classes().iter().map(|c| (0..c.members.len() as u32).collect()).collect();
        perms[0] = vec![1];
        assert!(matches!(eng.class_perm(perms), Err(Error::InvalidPermutation(_))));
    }

    #[test]
    fn definitional_check_accepts_identity_and_rejects_rank_mixing() {
        let eng = engine(3, 2);
        let m = eng.elements().len();
        let identity: Vec<u16> = (0..m as u16).collect();
        assert!(eng.is_automorphism(&identity));

        // Transposing two decomposables of different ranks breaks rank
        // preservation.
        let mut images = identity.clone();
        let a = eng.index_of(&PartialInjection::empty(3)).unwrap();
        let b = eng.index_of(&el(3, "1>1")).unwrap();
        images.swap(a, b);
        assert!(!eng.is_automorphism(&images));
        assert!(!eng.is_automorphism(&identity[..m - 1]));
        let constant = vec![0u16; m];
        assert!(!eng.is_automorphism(&constant));
    }

    #[test]
    fn composition_and_inverse_form_a_group() {
        let eng = engine(3, 1);
        for t in eng.all_triples() {
            let tau = eng.tau(&t);
            let round = tau.compose(&tau.inverse()).unwrap();
            assert!(round.is_identity() && round.is_verified());
        }
    }

    #[test]
    fn tau_of_composed_triples_is_the_composition() {
        for (n, k) in [(3, 1), (3, 2)] {
            let eng = engine(n, k);
            let triples = eng.all_triples();
            for t1 in &triples {
                for t2 in &triples {
                    let composed = eng.tau(t1).compose(&eng.tau(t2)).unwrap();
                    assert_eq!(composed, eng.tau(&t1.compose(t2)));
                }
            }
        }
    }

    #[test]
    fn conjugating_a_class_shuffle_by_tau_stays_within_classes() {
        // Exhaustive over every class permutation at the small contexts,
        // seeded samples at (3,1) where there are 368640.
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0c0a);
        for (n, k, samples) in [(2, 1, usize::MAX), (2, 2, usize::MAX), (3, 2, usize::MAX), (3, 3, usize::MAX), (3, 1, 500)] {
            let eng = engine(n, k);
            let mut cps: Vec<ClassPerm> = Vec::new();
            if samples == usize::MAX {
                let all_perms: Vec<Vec<Vec<u32>>> = eng
                    .classes()
                    .iter()
                    .map(|c| {
                        (0..c.members.len() as u32)
                            .permutations(c.members.len())
                            .collect()
                    })
                    .collect();
                let total: usize = all_perms.iter().map(Vec::len).product();
                for mut index in 0..total {
                    let mut perms = Vec::with_capacity(all_perms.len());
                    for options in &all_perms {
                        perms.push(options[index % options.len()].clone());
                        index /= options.len();
                    }
                    cps.push(eng.class_perm(perms).unwrap());
                }
            } else {
                for _ in 0..samples {
                    let perms: Vec<Vec<u32>> = eng
                        .classes()
                        .iter()
                        .map(|c| {
                            let mut p: Vec<u32> = (0..c.members.len() as u32).collect();
                            p.shuffle(&mut rng);
                            p
                        })
                        .collect();
                    cps.push(eng.class_perm(perms).unwrap());
                }
            }
            for t in eng.all_triples() {
                let tau = eng.tau(&t);
                for cp in &cps {
                    let pi = eng.pi(cp).unwrap();
                    let conjugate = tau.inverse().compose(&pi).unwrap().compose(&tau).unwrap();
                    let residue = eng
                        .class_perm_from_images(conjugate.images())
                        .expect("conjugation preserves the class partition");
                    assert_eq!(eng.pi(&residue).unwrap(), conjugate);
                }
            }
        }
    }

    #[test]
    fn block_and_class_parts_meet_only_at_the_identity() {
        for (n, k) in [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)] {
            let eng = engine(n, k);
            for t in eng.all_triples() {
                let tau = eng.tau(&t);
                match eng.class_perm_from_images(tau.images()) {
                    Ok(cp) => {
                        assert!(t.is_identity(), "n={n} k={k}: nonidentity triple stayed in classes");
                        assert!(tau.is_identity() && cp.is_identity());
                    }
                    Err(Error::CrossClassMove(_)) => assert!(!t.is_identity()),
                    Err(e) => panic!("unexpected error: {e}"),
                }
            }
        }
    }

    #[test]
    fn order_formula_matches_hand_counts() {
        let cases = [
            (1, 1, 1u64),
            (2, 1, 1),
            (2, 2, 2),
            (3, 1, 1_474_560),
            (3, 2, 2),
            (3, 3, 6),
        ];
        for (n, k, expected) in cases {
            let got = aut_order(&ctx(n, k)).unwrap();
            assert_eq!(got.order, BigUint::from(expected), "n={n} k={k}");
            assert!(!got.degenerate);
        }
    }

    #[test]
    fn zero_block_order_is_the_null_semigroup_count() {
        let got = aut_order(&ctx(2, 0)).unwrap();
        assert_eq!(got.order, BigUint::from(720u32));
        assert!(got.degenerate);

        // The structured formula would overcount: the whole nonempty
        // universe is one class, so it gives 0!·(2!)²·6! = 2880.
        let c = ctx(2, 0);
        let classes = c.classes().unwrap();
        assert_eq!(classes.len(), 2);
        let product: usize = classes.iter().map(|cl| cl.members.len()).product();
        assert_eq!(factorial(2) * factorial(2) * factorial(product), BigUint::from(2880u32));
    }

    #[test]
    fn enumeration_matches_the_order_on_small_contexts() {
        for (n, k) in [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)] {
            let eng = engine(n, k);
            let all = eng.enumerate_aut(None).unwrap();
            let expected = aut_order(eng.ctx()).unwrap().order;
            assert_eq!(BigUint::from(all.len()), expected, "n={n} k={k}");
            let distinct: std::collections::HashSet<&Automorphism> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
            assert!(all.iter().all(Automorphism::is_verified));
            assert!(all[0].is_identity());
        }
    }

    #[test]
    fn enumeration_streams_are_deterministic_and_structured() {
        let eng = engine(3, 2);
        let all = eng.enumerate_aut(None).unwrap();
        assert_eq!(all, eng.enumerate_aut(None).unwrap());
        assert_eq!(all.len(), 2);
        let swap = GTriple {
            g: BlockPerm::new(1, vec![2, 1]).unwrap(),
            h1: BlockPerm::identity(3, 1),
            h2: BlockPerm::identity(3, 1),
        };
        assert_eq!(all[1], eng.tau(&swap));

        let eng = engine(3, 3);
        let all = eng.enumerate_aut(None).unwrap();
        assert_eq!(all.len(), 6);
        let taus: Vec<Automorphism> =
            eng.all_triples().iter().map(|t| eng.tau(t)).collect();
        assert_eq!(all, taus);

        let limited = eng.enumerate_aut(Some(4)).unwrap();
        assert_eq!(limited, all[..4]);

        assert!(matches!(
            engine(2, 0).enumerate_aut(None),
            Err(Error::DegenerateContext(_))
        ));
    }

    #[test]
    fn every_verified_automorphism_fixes_the_middle_idempotent() {
        for (n, k) in [(2, 1), (3, 1), (3, 2)] {
            let eng = engine(n, k);
            for t in eng.all_triples() {
                assert_eq!(eng.tau(&t).apply(eng.e_index()), eng.e_index());
            }
            for aut in eng.enumerate_aut(Some(50)).unwrap() {
                assert_eq!(aut.apply(eng.e_index()), eng.e_index());
            }
        }
    }

    #[test]
    fn automorphisms_preserve_rank_of_decomposables() {
        for (n, k) in [(2, 1), (3, 1), (3, 2), (3, 3)] {
            let eng = engine(n, k);
            for aut in eng.enumerate_aut(Some(100)).unwrap() {
                for (i, x) in eng.elements().iter().enumerate() {
                    if x.rank() <= k {
                        assert_eq!(eng.elements()[aut.apply(i)].rank(), x.rank());
                    }
                }
            }
        }
    }

    #[test]
    fn factorize_splits_identity_and_pure_taus() {
        for (n, k) in [(2, 1), (3, 1), (3, 2), (3, 3)] {
            let eng = engine(n, k);
            let f = eng.factorize(&Automorphism::identity(eng.elements().len())).unwrap();
            assert!(f.triple.is_identity() && f.class_perm.is_identity());
            for t in eng.all_triples() {
                let f = eng.factorize(&eng.tau(&t)).unwrap();
                assert_eq!(f.triple, t);
                assert!(f.class_perm.is_identity());
            }
        }
    }

    #[test]
    fn factorize_round_trips_structured_pairs_exactly() {
        let eng = engine(3, 1);
        let nontrivial = {
            let mut perms: Vec<Vec<u32>> =
                eng.classes().iter().map(|c| (0..c.members.len() as u32).collect()).collect();
            for p in perms.iter_mut() {
                if p.len() >= 2 {
                    p.swap(0, 1);
                }
            }
            eng.class_perm(perms).unwrap()
        };
        for t in eng.all_triples() {
            for cp in [eng.identity_class_perm(), nontrivial.clone()] {
                let sigma = eng.tau(&t).compose(&eng.pi(&cp).unwrap()).unwrap();
                let f = eng.factorize(&sigma).unwrap();
                assert_eq!(f.triple, t);
                assert_eq!(f.class_perm, cp);
                let back = eng.tau(&f.triple).compose(&eng.pi(&f.class_perm).unwrap()).unwrap();
                assert_eq!(back, sigma);
            }
        }
    }

    #[test]
    fn factorize_rejects_unverified_and_degenerate_input() {
        let eng = engine(3, 1);
        let raw = Automorphism::from_images((0..34u16).collect()).unwrap();
        assert!(matches!(eng.factorize(&raw), Err(Error::NotAutomorphism(_))));
        let short = Automorphism::identity(7);
        assert!(matches!(eng.factorize(&short), Err(Error::SizeMismatch(7, 34))));
        let zero = engine(2, 0);
        assert!(matches!(
            zero.factorize(&Automorphism::identity(7)),
            Err(Error::DegenerateContext(_))
        ));
    }

    #[test]
    fn tau_respects_the_profile_equivariance_identities() {
        for n in 1..=3usize {
            for k in 1..=n {
                let eng = engine(n, k);
                let c = eng.ctx();
                for t in eng.all_triples() {
                    let tau = eng.tau(&t);
                    for (i, a) in eng.elements().iter().enumerate() {
                        let image = &eng.elements()[tau.apply(i)];
                        let pa = c.profile(a);
                        let pb = c.profile(image);
                        let map_set = |s: &crate::element::PointSet, f: &BlockPerm| {
                            s.iter().map(|&x| f.apply(x)).collect::<crate::element::PointSet>()
                        };
                        assert_eq!(*pb.m1(), map_set(pa.m1(), &t.g));
                        assert_eq!(*pb.m2(), map_set(pa.m2(), &t.g));
                        assert_eq!(*pb.m3(), map_set(pa.m3(), &t.h1));
                        for &x in pa.m1() {
                            assert_eq!(image.apply(t.g.apply(x)), a.apply(x).map(|y| t.g.apply(y)));
                        }
                        for &x in pa.m2() {
                            assert_eq!(
                                image.apply(t.g.apply(x)),
                                a.apply(x).map(|y| t.h2.apply(y))
                            );
                        }
                        for &x in pa.m3() {
                            assert_eq!(
                                image.apply(t.h1.apply(x)),
                                a.apply(x).map(|y| t.g.apply(y))
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn automorphism_json_round_trip() {
        let aut = Automorphism::identity(3);
        let json = serde_json::to_string(&aut).unwrap();
        assert_eq!(json, r#"{"images":[0,1,2]}"#);
        let back: Automorphism = serde_json::from_str(&json).unwrap();
        assert_eq!(back, aut);
        assert!(!back.is_verified());
        assert!(serde_json::from_str::<Automorphism>(r#"{"images":[0,0,1]}"#).is_err());
    }

    #[test]
    fn factorization_serializes_block_parts_and_moved_classes() {
        let eng = engine(3, 1);
        let t = GTriple {
            g: BlockPerm::identity(1, 1),
            h1: BlockPerm::new(2, vec![3, 2]).unwrap(),
            h2: BlockPerm::identity(2, 2),
        };
        let cp = {
            let ci = (0..eng.classes().len())
                .find(|&ci| eng.classes()[ci].members.len() == 6)
                .unwrap();
            let mut perms: Vec<Vec<u32>> =
                eng.classes().iter().map(|c| (0..c.members.len() as u32).collect()).collect();
            perms[ci] = vec![0, 1, 2, 3, 5, 4];
            eng.class_perm(perms).unwrap()
        };
        let sigma = eng.tau(&t).compose(&eng.pi(&cp).unwrap()).unwrap();
        let f = eng.factorize(&sigma).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let ci = (0..eng.classes().len())
            .find(|&ci| eng.classes()[ci].members.len() == 6)
            .unwrap();
        assert_eq!(
            json,
            format!(
                r#"{{"g":"1","h1":"3,2","h2":"2,3","class_perms":{{"{ci}":"0,1,2,3,5,4"}}}}"#
            )
        );
    }
}
