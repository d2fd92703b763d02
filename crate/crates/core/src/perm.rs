//! Permutations of a contiguous block of points, the building blocks
//! of the structured automorphisms: one acting on the kept set
//! `A = {1..k}`, two acting on its complement `A̅ = {k+1..n}`.

use itertools::Itertools;

use crate::element::Point;
use crate::error::{Error, Result};

/// A bijection of the block `start..start+len` onto itself, stored as
/// the image list in block order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockPerm {
    start: Point,
    images: Vec<Point>,
}

impl BlockPerm {
    pub fn identity(start: Point, len: usize) -> Self {
        BlockPerm { start, images: (start..start + len).collect() }
    }

    /// Validates that `images` lists each block point exactly once.
    pub fn new(start: Point, images: Vec<Point>) -> Result<Self> {
        let len = images.len();
        let mut seen = vec![false; len];
        for &v in &images {
            let ok = v >= start && v < start + len && !seen[v - start];
            if !ok {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a permutation of {start}..{}",
                    start + len
                )));
            }
            seen[v - start] = true;
        }
        Ok(BlockPerm { start, images })
    }

    pub fn start(&self) -> Point {
        self.start
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Block points in ascending order.
    pub fn points(&self) -> impl Iterator<Item = Point> {
        self.start..self.start + self.images.len()
    }

    pub fn apply(&self, x: Point) -> Point {
        debug_assert!(x >= self.start && x < self.start + self.images.len());
        self.images[x - self.start]
    }

    pub fn is_identity(&self) -> bool {
        self.points().zip(&self.images).all(|(x, &y)| x == y)
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (x, &y) in self.points().zip(&self.images) {
            images[y - self.start] = x;
        }
        BlockPerm { start: self.start, images }
    }

    /// Applies `self` first, then `other`. Both must act on the same
    /// block.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.start, other.start);
        assert_eq!(self.images.len(), other.images.len());
        let images = self.images.iter().map(|&y| other.apply(y)).collect();
        BlockPerm { start: self.start, images }
    }

    /// One-line notation: the images in block order, comma-separated.
    pub fn one_line(&self) -> String {
        self.images.iter().map(Point::to_string).join(",")
    }
}

/// Every permutation of the block, ordered lexicographically by image
/// list. An empty block has exactly one permutation.
pub fn all_block_perms(start: Point, len: usize) -> Vec<BlockPerm> {
    (start..start + len)
        .permutations(len)
        .map(|images| BlockPerm { start, images })
        .collect()
}
