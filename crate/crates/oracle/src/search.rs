use std::ops::ControlFlow;

use num_bigint::BigUint;

use crate::CayleyTable;

const UNSET: u16 = u16::MAX;

/// Stable colouring of the elements: the table's structure is refined
/// until fixed point, and any automorphism maps each element to one of
/// the same colour. Colours are dense integers starting at 0.
pub fn refined_colors(t: &CayleyTable) -> Vec<u32> {
    let (c, _) = joint_refine(t, t).expect("a table always matches itself");
    c
}

/// Refines both element sets against a shared colour alphabet, so the
/// colours are comparable across tables. `None` means the colour
/// histograms diverged, which already certifies there is no isomorphism.
fn joint_refine(t1: &CayleyTable, t2: &CayleyTable) -> Option<(Vec<u32>, Vec<u32>)> {
    let (m1, m2) = (t1.size(), t2.size());
    let mut c1 = vec![0u32; m1];
    let mut c2 = vec![0u32; m2];
    let mut palette = 1usize;
    loop {
        let sig1: Vec<Vec<u32>> = (0..m1).map(|i| signature(t1, &c1, i)).collect();
        let sig2: Vec<Vec<u32>> = (0..m2).map(|i| signature(t2, &c2, i)).collect();
        let mut all: Vec<&Vec<u32>> = sig1.iter().chain(sig2.iter()).collect();
        all.sort_unstable();
        all.dedup();
        for (colors, sigs) in [(&mut c1, &sig1), (&mut c2, &sig2)] {
            for (c, s) in colors.iter_mut().zip(sigs) {
                *c = all.binary_search(&s).unwrap() as u32;
            }
        }
        let mut hist1 = vec![0usize; all.len()];
        let mut hist2 = vec![0usize; all.len()];
        for &c in &c1 {
            hist1[c as usize] += 1;
        }
        for &c in &c2 {
            hist2[c as usize] += 1;
        }
        if hist1 != hist2 {
            return None;
        }
        // Signatures embed the previous colour, so classes only split;
        // an unchanged count means the partition is stable.
        if all.len() == palette {
            return Some((c1, c2));
        }
        palette = all.len();
    }
}

/// Invariant data of element `i` under the current colouring: own colour,
/// the diagonal cell with an idempotency flag, then for every `j` the
/// packed colours of `j` and both products together with the equality
/// flags saying whether each product reproduces `i` or `j`. The equality
/// flags matter: colour multisets alone cannot split the zero of a null
/// semigroup from its other elements.
fn signature(t: &CayleyTable, c: &[u32], i: usize) -> Vec<u32> {
    let m = t.size();
    let mut sig = Vec::with_capacity(m + 2);
    sig.push(c[i]);
    let d = t.get(i, i);
    sig.push(c[d] << 1 | u32::from(d == i));
    let mut cells: Vec<u32> = (0..m)
        .map(|j| {
            let ij = t.get(i, j);
            let ji = t.get(j, i);
            debug_assert!(c[j] < 1 << 8, "palette never exceeds the table size");
            u32::from(ij == i)
                | u32::from(ij == j) << 1
                | u32::from(ji == i) << 2
                | u32::from(ji == j) << 3
                | c[j] << 4
                | c[ij] << 12
                | c[ji] << 20
        })
        .collect();
    cells.sort_unstable();
    sig.extend(cells);
    sig
}

/// Partial bijection search state mapping elements of `t1` to elements
/// of `t2`, with colours precomputed by `joint_refine`. Assignments are
/// recorded on a trail so choice points can be rolled back.
struct Search<'a> {
    m: usize,
    t1: &'a [u16],
    t2: &'a [u16],
    c1: &'a [u32],
    c2: &'a [u32],
    map: Vec<u16>,
    used: Vec<bool>,
    trail: Vec<u16>,
}

impl<'a> Search<'a> {
    fn new(t1: &'a CayleyTable, t2: &'a CayleyTable, c1: &'a [u32], c2: &'a [u32]) -> Self {
        let m = t1.size();
        Search {
            m,
            t1: t1.flat(),
            t2: t2.flat(),
            c1,
            c2,
            map: vec![UNSET; m],
            used: vec![false; m],
            trail: Vec::with_capacity(m),
        }
    }

    fn checkpoint(&self) -> usize {
        self.trail.len()
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let i = usize::from(self.trail.pop().unwrap());
            let v = usize::from(self.map[i]);
            self.map[i] = UNSET;
            self.used[v] = false;
        }
    }

    fn place(&mut self, i: usize, v: usize) -> bool {
        if self.used[v] || self.c1[i] != self.c2[v] {
            return false;
        }
        self.map[i] = v as u16;
        self.used[v] = true;
        self.trail.push(i as u16);
        true
    }

    /// The source product `d` must land on the target product `e`:
    /// checks it if already mapped, otherwise forces the assignment.
    fn require(&mut self, d: u16, e: u16) -> bool {
        let cur = self.map[usize::from(d)];
        if cur != UNSET {
            return cur == e;
        }
        self.place(usize::from(d), usize::from(e))
    }

    /// Assigns `i -> v` and closes under products against everything
    /// already assigned, forcing further assignments as needed. On
    /// contradiction returns false; the caller rolls back via the trail.
    fn assign(&mut self, i: usize, v: usize) -> bool {
        let start = self.trail.len();
        let cur = self.map[i];
        if cur != UNSET {
            return usize::from(cur) == v;
        }
        if !self.place(i, v) {
            return false;
        }
        // Every newly placed source is paired against the whole trail;
        // any pair of assigned sources is covered when its later member
        // is processed, so the closure sees all products.
        let mut head = start;
        while head < self.trail.len() {
            let x = usize::from(self.trail[head]);
            head += 1;
            let y = usize::from(self.map[x]);
            let mut idx = 0;
            while idx < self.trail.len() {
                let z = usize::from(self.trail[idx]);
                idx += 1;
                let w = usize::from(self.map[z]);
                let (a, b) = (self.t1[x * self.m + z], self.t2[y * self.m + w]);
                if !self.require(a, b) {
                    return false;
                }
                let (a, b) = (self.t1[z * self.m + x], self.t2[w * self.m + y]);
                if !self.require(a, b) {
                    return false;
                }
            }
        }
        true
    }

    /// Extends the current partial map every possible way, visiting each
    /// complete map once, in ascending lexicographic order of the image
    /// vector. Restores the entry state before returning.
    fn complete(&mut self, visit: &mut impl FnMut(&[u16]) -> ControlFlow<()>) -> ControlFlow<()> {
        let Some(i) = (0..self.m).find(|&i| self.map[i] == UNSET) else {
            return visit(&self.map);
        };
        for v in 0..self.m {
            if self.used[v] || self.c2[v] != self.c1[i] {
                continue;
            }
            let mark = self.checkpoint();
            let placed = self.assign(i, v);
            let flow = if placed { self.complete(visit) } else { ControlFlow::Continue(()) };
            self.undo_to(mark);
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn has_completion(&mut self) -> bool {
        let mut found = false;
        let _ = self.complete(&mut |_| {
            found = true;
            ControlFlow::Break(())
        });
        found
    }
}

/// Calls `visit` for each bijection `p` with `p(t[i][j]) = t[p(i)][p(j)]`,
/// in ascending lexicographic order of the image vector. The visitor can
/// break to stop the search early.
pub fn for_each_automorphism(t: &CayleyTable, mut visit: impl FnMut(&[u16]) -> ControlFlow<()>) {
    let colors = refined_colors(t);
    let mut s = Search::new(t, t, &colors, &colors);
    let _ = s.complete(&mut visit);
}

/// All automorphisms of `t` as image vectors, or only the
/// lexicographically first `limit` of them.
pub fn magma_automorphisms(t: &CayleyTable, limit: Option<usize>) -> Vec<Vec<u16>> {
    let cap = limit.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    if cap == 0 {
        return out;
    }
    for_each_automorphism(t, |p| {
        out.push(p.to_vec());
        if out.len() < cap {
            ControlFlow::Continue(())
        } else {
            ControlFlow::Break(())
        }
    });
    out
}

/// Order of the automorphism group of `t`, without materializing it:
/// the product over base points of the orbit size of that point under
/// the stabilizer of all earlier points. Each orbit membership test is
/// one satisfiability search.
pub fn count_automorphisms(t: &CayleyTable) -> BigUint {
    let colors = refined_colors(t);
    let m = t.size();
    let mut s = Search::new(t, t, &colors, &colors);
    let mut order = BigUint::from(1u32);
    for b in 0..m {
        if s.map[b] != UNSET {
            // Forced by the identity prefix, so the whole stabilizer
            // fixes it: the orbit is a single point.
            debug_assert_eq!(usize::from(s.map[b]), b);
            continue;
        }
        let mut orbit = 0u32;
        for v in 0..m {
            if colors[v] != colors[b] {
                continue;
            }
            let mark = s.checkpoint();
            if s.assign(b, v) && s.has_completion() {
                orbit += 1;
            }
            s.undo_to(mark);
        }
        debug_assert!(orbit >= 1, "the identity always completes the prefix");
        order *= orbit;
        let pinned = s.assign(b, b);
        debug_assert!(pinned);
    }
    order
}

/// A bijection carrying `t1` onto `t2`, or `None` if there is none.
/// Distinct sizes are immediately `None`.
pub fn magma_isomorphic(t1: &CayleyTable, t2: &CayleyTable) -> Option<Vec<u16>> {
    if t1.size() != t2.size() {
        return None;
    }
    let (c1, c2) = joint_refine(t1, t2)?;
    let mut s = Search::new(t1, t2, &c1, &c2);
    let mut found = None;
    let _ = s.complete(&mut |p| {
        found = Some(p.to_vec());
        ControlFlow::Break(())
    });
    found
}

/// Checks that `p` is a bijection with `p(t1[i][j]) = t2[p(i)][p(j)]`
/// on every pair, directly from the definition.
pub fn is_isomorphism(t1: &CayleyTable, t2: &CayleyTable, p: &[u16]) -> bool {
    let m = t1.size();
    if t2.size() != m || p.len() != m {
        return false;
    }
    let mut seen = vec![false; m];
    for &v in p {
        let Some(slot) = seen.get_mut(usize::from(v)) else {
            return false;
        };
        if std::mem::replace(slot, true) {
            return false;
        }
    }
    (0..m).all(|i| {
        (0..m).all(|j| {
            usize::from(p[t1.get(i, j)]) == t2.get(usize::from(p[i]), usize::from(p[j]))
        })
    })
}

/// `is_isomorphism` from a table to itself.
pub fn is_automorphism(t: &CayleyTable, p: &[u16]) -> bool {
    is_isomorphism(t, t, p)
}
