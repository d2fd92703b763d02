//! The coarsest structure the automorphism analysis needs: elements are
//! grouped by how they interact with the kept set `A`. Indecomposable
//! elements are equivalent when they agree on every pair touching `A`
//! on either side; decomposable elements are equivalent only to
//! themselves. The relation is a congruence in a strong sense: products
//! are literally constant on pairs of classes.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::element::{enumerate_all, PartialInjection, Point, PointSet};
use crate::error::Result;
use crate::sandwich::SandwichContext;

/// How an element's pairs sit relative to `A` and `A̅`: `m1` holds the
/// domain points of `A`-to-`A` pairs, `m2` of `A`-to-`A̅`, `m3` of
/// `A̅`-to-`A`. `fixed_values` is the element restricted to those three
/// sets. The fourth block (`A̅`-to-`A̅`) is the rest of the domain and is
/// deliberately not part of the data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MProfile {
    m1: PointSet,
    m2: PointSet,
    m3: PointSet,
    fixed_values: BTreeMap<Point, Point>,
    indecomposable: bool,
}

impl MProfile {
    pub fn m1(&self) -> &PointSet {
        &self.m1
    }

    pub fn m2(&self) -> &PointSet {
        &self.m2
    }

    pub fn m3(&self) -> &PointSet {
        &self.m3
    }

    pub fn fixed_values(&self) -> &BTreeMap<Point, Point> {
        &self.fixed_values
    }

    pub fn is_indecomposable(&self) -> bool {
        self.indecomposable
    }
}

/// Identifier of a congruence class: the element itself when
/// decomposable, otherwise the canonical pair list over `m1 ∪ m2 ∪ m3`.
/// Given the context, those pairs determine the three sets and the
/// values jointly, so this is the whole profile in one string. The
/// prefix keeps the two kinds apart even when the strings coincide.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClassKey {
    Element(String),
    Profile(String),
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassKey::Element(s) => write!(f, "element:{s}"),
            ClassKey::Profile(s) => write!(f, "profile:{s}"),
        }
    }
}

impl Serialize for ClassKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// One congruence class: its key and its members in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceClass {
    pub key: ClassKey,
    pub members: Vec<PartialInjection>,
}

impl Serialize for CongruenceClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("key", &self.key)?;
        let members: Vec<String> =
            self.members.iter().map(PartialInjection::to_canonical_string).collect();
        map.serialize_entry("members", &members)?;
        map.end()
    }
}

impl SandwichContext {
    /// Classifies every domain point of `x` against `A` and `A̅`.
    pub fn profile(&self, x: &PartialInjection) -> MProfile {
        debug_assert_eq!(x.n(), self.n());
        let mut p = MProfile {
            m1: PointSet::new(),
            m2: PointSet::new(),
            m3: PointSet::new(),
            fixed_values: BTreeMap::new(),
            indecomposable: !self.is_decomposable(x),
        };
        for (s, t) in x.pairs() {
            let bucket = match (self.a_set().contains(&s), self.a_set().contains(&t)) {
                (true, true) => &mut p.m1,
                (true, false) => &mut p.m2,
                (false, true) => &mut p.m3,
                (false, false) => continue,
            };
            bucket.insert(s);
            p.fixed_values.insert(s, t);
        }
        p
    }

    /// The key under which `x` falls in `classes`.
    pub fn class_key(&self, x: &PartialInjection) -> ClassKey {
        if self.is_decomposable(x) {
            return ClassKey::Element(x.to_canonical_string());
        }
        let p = self.profile(x);
        let pairs: Vec<String> =
            p.fixed_values.iter().map(|(s, t)| format!("{s}>{t}")).collect();
        ClassKey::Profile(pairs.join(","))
    }

    /// Whether `x` and `y` fall in the same congruence class: equal
    /// profiles when both are indecomposable, literal equality as soon
    /// as either is decomposable.
    pub fn similar(&self, x: &PartialInjection, y: &PartialInjection) -> bool {
        if self.is_decomposable(x) || self.is_decomposable(y) {
            return x == y;
        }
        self.profile(x) == self.profile(y)
    }

    /// The full partition of the universe, classes ordered by their
    /// earliest member in canonical order, members in canonical order.
    pub fn classes(&self) -> Result<Vec<CongruenceClass>> {
        let mut out: Vec<CongruenceClass> = Vec::new();
        let mut index: HashMap<ClassKey, usize> = HashMap::new();
        for x in enumerate_all(self.n())? {
            let key = self.class_key(&x);
            match index.get(&key) {
                Some(&i) => out[i].members.push(x),
                None => {
                    index.insert(key.clone(), out.len());
                    out.push(CongruenceClass { key, members: vec![x] });
                }
            }
        }
        Ok(out)
    }

    /// Exhaustive check that products are constant on pairs of classes:
    /// every `(a, a', b, b')` with `a ∼ a'`, `b ∼ b'` but
    /// `a ∗ b ≠ a' ∗ b'` is reported, relative to class representatives.
    /// An empty result verifies the congruence property, in the strong
    /// form with literal product equality.
    pub fn congruence_violations(
        &self,
    ) -> Result<Vec<(PartialInjection, PartialInjection, PartialInjection, PartialInjection)>>
    {
        let classes = self.classes()?;
        let mut violations = Vec::new();
        for ca in &classes {
            for cb in &classes {
                let expected = self.product(&ca.members[0], &cb.members[0])?;
                for a in &ca.members {
                    for b in &cb.members {
                        if self.product(a, b)? != expected {
                            violations.push((
                                ca.members[0].clone(),
                                a.clone(),
                                cb.members[0].clone(),
                                b.clone(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(violations)
    }
}
