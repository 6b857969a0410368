//! Random micro-scale sources and protocols for property trials.
//!
//! Masses are small-integer weights normalized in the chosen backend, so
//! the same generator yields exact rational objects or floats.

use crate::prob::{Dist, JointDist, OutcomeSpace, Weight};
use crate::protocol::{Flavor, Kernel, KeyedProtocol, ProtocolTree};
use rand::Rng;
use std::sync::Arc;

/// Normalized random weights; at least one entry is positive. With
/// `sparse`, entries are zero with probability about one third.
pub fn random_masses<W: Weight>(rng: &mut impl Rng, len: usize, sparse: bool) -> Vec<W> {
    loop {
        let raw: Vec<u64> = (0..len)
            .map(|_| {
                if sparse && rng.gen_range(0..3) == 0 {
                    0
                } else {
                    rng.gen_range(1..=12)
                }
            })
            .collect();
        let total: u64 = raw.iter().sum();
        if total > 0 {
            return raw.into_iter().map(|w| W::ratio(w, total)).collect();
        }
    }
}

pub fn random_dist<W: Weight>(rng: &mut impl Rng, len: usize, sparse: bool) -> Dist<W> {
    Dist::new(OutcomeSpace::range(len), random_masses(rng, len, sparse)).expect("normalized masses")
}

/// Random joint law over `factors` (sizes).
pub fn random_joint<W: Weight>(rng: &mut impl Rng, factors: &[usize], sparse: bool) -> JointDist<W> {
    let spaces: Vec<OutcomeSpace> = factors.iter().map(|&n| OutcomeSpace::range(n)).collect();
    let len = factors.iter().product();
    JointDist::new(spaces, random_masses(rng, len, sparse)).expect("normalized masses")
}

/// Random source over `X × Y` with `2..=max` atoms per side.
pub fn random_source<W: Weight>(rng: &mut impl Rng, max: usize) -> JointDist<W> {
    let nx = rng.gen_range(2..=max);
    let ny = rng.gen_range(2..=max);
    random_joint(rng, &[nx, ny], true)
}

fn random_table<W: Weight>(rng: &mut impl Rng, rows: usize, width: usize, point: bool) -> Kernel<W> {
    let mut flat = Vec::with_capacity(rows * width);
    for _ in 0..rows {
        if point {
            let hit = rng.gen_range(0..width);
            flat.extend((0..width).map(|s| if s == hit { W::one() } else { W::zero() }));
        } else {
            flat.extend(random_masses::<W>(rng, width, true));
        }
    }
    Kernel::Table {
        width,
        rows: Arc::new(flat),
    }
}

/// Random alternating protocol with dense table kernels over the given
/// input sizes, `rounds` rounds, and alphabets of `1..=max_alphabet`
/// symbols. Public-coin protocols get a coin of two or three atoms.
pub fn random_protocol<W: Weight>(
    rng: &mut impl Rng,
    nx: usize,
    ny: usize,
    rounds: usize,
    max_alphabet: usize,
    flavor: Flavor,
) -> ProtocolTree<W> {
    let mut b = ProtocolTree::<W>::builder(OutcomeSpace::range(nx), OutcomeSpace::range(ny)).flavor(flavor);
    let coins = if flavor == Flavor::PublicCoin {
        let k = rng.gen_range(2..=3);
        b = b.public_coin(random_dist(rng, k, false));
        k
    } else {
        1
    };
    let mut histories = 1;
    for t in 0..rounds {
        let width = rng.gen_range(1..=max_alphabet);
        let inputs = if t % 2 == 0 { nx } else { ny };
        let rows = histories * inputs * coins;
        let point = flavor == Flavor::Deterministic;
        b = b.round(OutcomeSpace::range(width), random_table(rng, rows, width, point));
        histories *= width;
    }
    b.build().expect("shapes are consistent by construction")
}

/// Random protocol with random key maps over `keys` symbols.
pub fn random_keyed<W: Weight>(
    rng: &mut impl Rng,
    nx: usize,
    ny: usize,
    rounds: usize,
    max_alphabet: usize,
    keys: usize,
    flavor: Flavor,
) -> KeyedProtocol<W> {
    let p = random_protocol::<W>(rng, nx, ny, rounds, max_alphabet, flavor);
    let hist = p.history_radix(p.rounds()).total() * p.coin_count();
    let point = flavor == Flavor::Deterministic;
    let a = random_table(rng, hist * nx, keys, point);
    let b = random_table(rng, hist * ny, keys, point);
    KeyedProtocol::new(p, OutcomeSpace::range(keys), a, b).expect("shapes are consistent by construction")
}
