//! Permutations of `0..n` and their Lehmer ranks.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(Error::InvalidParams(format!("{images:?} is not a permutation")));
            }
            seen[v] = true;
        }
        Ok(Self(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Self(inv)
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Perm) -> Self {
        Self(other.0.iter().map(|&i| self.0[i]).collect())
    }

    /// Lehmer rank in `0..n!` (lexicographic order of image lists).
    pub fn rank(&self) -> usize {
        let n = self.0.len();
        let mut used = vec![false; n];
        let mut rank = 0usize;
        for (pos, &v) in self.0.iter().enumerate() {
            let smaller = (0..v).filter(|&u| !used[u]).count();
            rank = rank * (n - pos) + smaller;
            used[v] = true;
        }
        rank
    }

    pub fn unrank(n: usize, mut rank: usize) -> Self {
        let mut digits = vec![0; n];
        for (i, d) in digits.iter_mut().enumerate().rev() {
            let base = n - i;
            *d = rank % base;
            rank /= base;
        }
        let mut pool: Vec<usize> = (0..n).collect();
        Self(digits.into_iter().map(|d| pool.remove(d)).collect())
    }

    /// 1-based image list, used in serialized artifacts.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|v| v + 1).collect()
    }
}

pub fn factorial(n: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

/// Lexicographic list of all permutations of `0..n`.
pub fn all_perms(n: usize) -> Vec<Perm> {
    let total = factorial(n).expect("n! overflows");
    (0..total).map(|r| Perm::unrank(n, r)).collect()
}
