//! Set-disjointness input families and the padding embedding.

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::tape::{SeededTape, Stream, Tape};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DisjParams {
    pub n: usize,
    pub set_size: usize,
    pub intersection: usize,
}

impl DisjParams {
    pub fn new(n: usize, set_size: usize, intersection: usize) -> Result<Self> {
        if intersection > set_size || 2 * set_size - intersection > n {
            return Err(Error::InvalidParams(format!(
                "no pair of {set_size}-subsets of [{n}] meets in exactly {intersection} elements"
            )));
        }
        Ok(Self {
            n,
            set_size,
            intersection,
        })
    }

    /// Sizes `⌊n/4⌋` with the given intersection.
    pub fn standard(n: usize, intersection: usize) -> Result<Self> {
        Self::new(n, n / 4, intersection)
    }

    /// The intersecting family with `|U ∩ V| = ⌊√n⌋`.
    pub fn sqrt_intersecting(n: usize) -> Result<Self> {
        Self::new(n, n / 4, n.isqrt())
    }
}

/// Uniform pair of sets with the prescribed sizes and intersection.
pub fn draw_disj(tape: &mut dyn Tape, stream: Stream, p: &DisjParams) -> (Vec<usize>, Vec<usize>) {
    let all: Vec<usize> = (0..p.n).collect();
    let shared = tape.subset(stream, &all, p.intersection);
    let rest: Vec<usize> = all.iter().copied().filter(|x| !shared.contains(x)).collect();
    let only_u = tape.subset(stream, &rest, p.set_size - p.intersection);
    let rest: Vec<usize> = rest.into_iter().filter(|x| !only_u.contains(x)).collect();
    let only_v = tape.subset(stream, &rest, p.set_size - p.intersection);
    let mut u: Vec<usize> = shared.iter().chain(&only_u).copied().collect();
    let mut v: Vec<usize> = shared.iter().chain(&only_v).copied().collect();
    u.sort_unstable();
    v.sort_unstable();
    (u, v)
}

pub fn sample_disj(p: &DisjParams, seed: u64) -> (Vec<usize>, Vec<usize>) {
    draw_disj(&mut SeededTape::new(seed, 0), Stream::Source, p)
}

/// Embeds a disjointness instance over `[n]` into `[n²]`: each element `u`
/// becomes the block `u·n .. u·n + n-1`, and a shared uniform permutation of
/// `[n²]` drawn from public randomness relabels both sets.
pub fn pad_disjointness(tape: &mut dyn Tape, n: usize, u: &[usize], v: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let shuffle: Perm = tape.perm(Stream::Public, n * n);
    let shuffle = &shuffle;
    let blow_up = |s: &[usize]| {
        let mut out: Vec<usize> = s.iter().flat_map(|&x| (0..n).map(move |j| shuffle.apply(x * n + j))).collect();
        out.sort_unstable();
        out
    };
    (blow_up(u), blow_up(v))
}

pub(crate) fn intersection_size(u: &[usize], v: &[usize]) -> usize {
    u.iter().filter(|x| v.contains(x)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_intersections_are_exact() {
        let p = DisjParams::new(16, 4, 2).unwrap();
        for seed in 0..200 {
            let (u, v) = sample_disj(&p, seed);
            assert_eq!((u.len(), v.len()), (4, 4));
            assert_eq!(intersection_size(&u, &v), 2);
        }
        let forced = DisjParams::new(16, 4, 4).unwrap();
        let (u, v) = sample_disj(&forced, 3);
        assert_eq!(u, v);
    }

    #[test]
    fn infeasible_rejected() {
        assert!(DisjParams::new(4, 3, 1).is_err());
        assert!(DisjParams::new(16, 2, 3).is_err());
    }

    #[test]
    fn padding_scales_intersection() {
        let mut tape = SeededTape::new(5, 0);
        let (u, v) = pad_disjointness(&mut tape, 4, &[1], &[1]);
        assert_eq!(u.len(), 4);
        assert_eq!(intersection_size(&u, &v), 4);
        let (u, v) = pad_disjointness(&mut tape, 4, &[0], &[2]);
        assert_eq!(intersection_size(&u, &v), 0);
    }
}
