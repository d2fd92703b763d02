//! Partial injective transformations of the set `{1..n}`.
//!
//! A [`PartialInjection`] is an injective map defined on a subset of
//! `{1..n}`. Composition reads left to right: `(a.compose(b))(x) = b(a(x))`.
//! Elements are immutable after construction and carry a canonical text and
//! JSON form; the canonical ordering is rank first, then the canonical
//! string.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 1-based point of the base set.
pub type Point = usize;

/// An ordered set of points.
pub type PointSet = BTreeSet<Point>;

/// Largest `n` accepted by [`enumerate_all`]. `|IS_6| = 13327` keeps full
/// enumeration comfortable; anything larger is rejected with `CapExceeded`.
pub const ENUMERATION_CAP: usize = 6;

/// An injective partial map on `{1..n}`, stored as a fixed-size image table
/// so that applying it to a point is O(1). Slot `i` holds the image of point
/// `i + 1`, with 0 meaning undefined.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialInjection {
    n: usize,
    img: Box<[Point]>,
}

impl PartialInjection {
    /// Builds a validated element from (domain, image) pairs given in any
    /// order.
    pub fn make(n: usize, pairs: &[(Point, Point)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize);
        }
        let mut img = vec![0; n];
        let mut used = vec![false; n];
        for &(x, y) in pairs {
            if x == 0 || x > n {
                return Err(Error::OutOfRange { point: x, n });
            }
            if y == 0 || y > n {
                return Err(Error::OutOfRange { point: y, n });
            }
            if img[x - 1] != 0 {
                return Err(Error::DuplicateDomain(x));
            }
            if used[y - 1] {
                return Err(Error::DuplicateImage(y));
            }
            img[x - 1] = y;
            used[y - 1] = true;
        }
        Ok(Self {
            n,
            img: img.into_boxed_slice(),
        })
    }

    /// The empty map on `{1..n}`.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            img: vec![0; n].into_boxed_slice(),
        }
    }

    /// The identity map on all of `{1..n}`.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            img: (1..=n).collect(),
        }
    }

    /// The identity map restricted to `points`.
    pub fn identity_on(n: usize, points: &PointSet) -> Self {
        let mut img = vec![0; n];
        for &p in points {
            img[p - 1] = p;
        }
        Self {
            n,
            img: img.into_boxed_slice(),
        }
    }

    /// Size of the base set.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Image of `x`, or `None` when `x` is outside the domain.
    #[inline]
    pub fn apply(&self, x: Point) -> Option<Point> {
        match self.img[x - 1] {
            0 => None,
            y => Some(y),
        }
    }

    #[inline]
    pub fn defined_at(&self, x: Point) -> bool {
        self.img[x - 1] != 0
    }

    /// Number of points in the domain (equivalently the image).
    pub fn rank(&self) -> usize {
        self.img.iter().filter(|&&y| y != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.img.iter().all(|&y| y == 0)
    }

    pub fn dom(&self) -> PointSet {
        (1..=self.n).filter(|&x| self.defined_at(x)).collect()
    }

    pub fn im(&self) -> PointSet {
        self.img.iter().copied().filter(|&y| y != 0).collect()
    }

    /// The (domain, image) pairs in ascending domain order.
    pub fn pairs(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.img
            .iter()
            .enumerate()
            .filter(|&(_, &y)| y != 0)
            .map(|(i, &y)| (i + 1, y))
    }

    /// Left-to-right composition: the result maps `x` to `other(self(x))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        let mut img = vec![0; self.n];
        for x in 1..=self.n {
            if let Some(mid) = self.apply(x) {
                if let Some(y) = other.apply(mid) {
                    img[x - 1] = y;
                }
            }
        }
        Ok(Self {
            n: self.n,
            img: img.into_boxed_slice(),
        })
    }

    /// Swaps every pair; always defined because the map is injective.
    pub fn inverse(&self) -> Self {
        let mut img = vec![0; self.n];
        for (x, y) in self.pairs() {
            img[y - 1] = x;
        }
        Self {
            n: self.n,
            img: img.into_boxed_slice(),
        }
    }

    /// Keeps only the pairs whose domain point lies in `m`.
    pub fn restrict(&self, m: &PointSet) -> Self {
        let mut img = vec![0; self.n];
        for &x in m {
            if x >= 1 && x <= self.n {
                img[x - 1] = self.img[x - 1];
            }
        }
        Self {
            n: self.n,
            img: img.into_boxed_slice(),
        }
    }

    /// True when every domain point is fixed, i.e. the element is an
    /// idempotent of the ordinary composition semigroup.
    pub fn is_partial_identity(&self) -> bool {
        self.pairs().all(|(x, y)| x == y)
    }

    /// Canonical text form: comma-separated `x>y` pairs sorted by `x`; the
    /// empty map renders as the empty string.
    pub fn to_canonical_string(&self) -> String {
        self.pairs().map(|(x, y)| format!("{x}>{y}")).join(",")
    }

    /// Parses the canonical text form. Syntax errors carry the byte
    /// position; range and injectivity violations reuse the `make` errors.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let bytes = text.as_bytes();
        let mut pos = 0;
        let mut pairs = Vec::new();
        if bytes.is_empty() {
            return Self::make(n, &pairs);
        }
        loop {
            let x = parse_number(bytes, &mut pos)?;
            if pos >= bytes.len() || bytes[pos] != b'>' {
                return Err(Error::Parse {
                    position: pos,
                    message: "expected '>'".into(),
                });
            }
            pos += 1;
            let y = parse_number(bytes, &mut pos)?;
            pairs.push((x, y));
            if pos == bytes.len() {
                break;
            }
            if bytes[pos] != b',' {
                return Err(Error::Parse {
                    position: pos,
                    message: "expected ',' or end of input".into(),
                });
            }
            pos += 1;
        }
        Self::make(n, &pairs)
    }
}

fn parse_number(bytes: &[u8], pos: &mut usize) -> Result<Point> {
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return Err(Error::Parse {
            position: start,
            message: "expected a point number".into(),
        });
    }
    std::str::from_utf8(&bytes[start..*pos])
        .unwrap()
        .parse()
        .map_err(|_| Error::Parse {
            position: start,
            message: "point number too large".into(),
        })
}

impl fmt::Display for PartialInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl fmt::Debug for PartialInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialInjection(n={}, \"{}\")", self.n, self)
    }
}

// Canonical order: rank ascending, then canonical string ascending. The
// pairwise comparison below agrees with the string comparison for
// single-digit points, which the enumeration cap guarantees.
impl Ord for PartialInjection {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.rank().cmp(&other.rank()))
            .then_with(|| self.pairs().cmp(other.pairs()))
    }
}

impl PartialOrd for PartialInjection {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    n: usize,
    pairs: Vec<(Point, Point)>,
}

impl From<PartialInjection> for ElementRepr {
    fn from(e: PartialInjection) -> Self {
        ElementRepr {
            n: e.n,
            pairs: e.pairs().collect(),
        }
    }
}

impl TryFrom<ElementRepr> for PartialInjection {
    type Error = Error;
    fn try_from(r: ElementRepr) -> Result<Self> {
        PartialInjection::make(r.n, &r.pairs)
    }
}

impl Serialize for PartialInjection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementRepr::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartialInjection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ElementRepr::deserialize(d)?;
        PartialInjection::try_from(repr).map_err(serde::de::Error::custom)
    }
}

/// Number of partial injections of `{1..n}`: `sum C(n,i)^2 * i!`.
pub fn universe_size(n: usize) -> u64 {
    (0..=n as u64)
        .map(|i| {
            let c = binomial(n as u64, i);
            c * c * factorial(i)
        })
        .sum()
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn factorial(k: u64) -> u64 {
    (1..=k).product()
}

/// All partial injections of `{1..n}` in canonical order. The position of an
/// element in this list is its canonical index, used by every table-valued
/// structure downstream.
pub fn enumerate_all(n: usize) -> Result<Vec<PartialInjection>> {
    if n == 0 {
        return Err(Error::InvalidSize);
    }
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            quantity: "base set size",
            value: n,
            cap: ENUMERATION_CAP,
        });
    }
    let mut out = Vec::with_capacity(universe_size(n) as usize);
    for mask in 0u32..(1 << n) {
        let dom: Vec<Point> = (1..=n).filter(|&x| mask & (1 << (x - 1)) != 0).collect();
        let k = dom.len();
        for images in (1..=n).permutations(k) {
            let mut img = vec![0; n];
            for (&x, &y) in dom.iter().zip(images.iter()) {
                img[x - 1] = y;
            }
            out.push(PartialInjection {
                n,
                img: img.into_boxed_slice(),
            });
        }
    }
    out.sort_unstable();
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    Ok(out)
}

/// Uniform-ish random element for property tests and the `verify` command:
/// each point enters the domain with probability 1/2 and images are a random
/// injection.
pub fn random_element<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> PartialInjection {
    use rand::seq::SliceRandom;
    let dom: Vec<Point> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
    let mut targets: Vec<Point> = (1..=n).collect();
    targets.shuffle(rng);
    let mut img = vec![0; n];
    for (&x, &y) in dom.iter().zip(targets.iter()) {
        img[x - 1] = y;
    }
    PartialInjection {
        n,
        img: img.into_boxed_slice(),
    }
}
