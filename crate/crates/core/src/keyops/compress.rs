use crate::error::{Error, Result};
use crate::prob::{min_entropy, Dist, OutcomeSpace, Weight};
use crate::protocol::Row;

/// How a key map acts on each domain atom.
#[derive(Clone, Debug)]
pub enum KeyRule<W> {
    Deterministic(Vec<usize>),
    /// One row per domain atom.
    Randomized(Vec<Row<W>>),
}

/// A total map from one key space to another.
#[derive(Clone, Debug)]
pub struct KeyMap<W> {
    pub domain: OutcomeSpace,
    pub codomain: OutcomeSpace,
    pub rule: KeyRule<W>,
}

impl<W: Weight> KeyMap<W> {
    pub fn row(&self, k: usize) -> Row<W> {
        match &self.rule {
            KeyRule::Deterministic(f) => vec![(f[k], W::one())],
            KeyRule::Randomized(rows) => rows[k].clone(),
        }
    }

    /// Law of the image of `k`.
    pub fn push(&self, k: &Dist<W>) -> Result<Dist<W>> {
        let mut out = vec![W::zero(); self.codomain.len()];
        for (a, m) in k.masses().iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            for (b, w) in self.row(a) {
                out[b] = out[b].clone() + m.clone() * w;
            }
        }
        Dist::new(self.codomain.clone(), out)
    }
}

#[derive(Clone, Debug)]
pub struct Compression<W> {
    pub map: KeyMap<W>,
    pub bucket_masses: Vec<W>,
    /// `(1 + δ)/|K'|`.
    pub bound: f64,
}

impl<W: Weight> Compression<W> {
    pub fn max_bucket(&self) -> f64 {
        self.bucket_masses.iter().map(W::to_f64).fold(0.0, f64::max)
    }

    pub fn bound_holds(&self) -> bool {
        self.max_bucket() <= self.bound * (1.0 + 1e-12)
    }
}

/// Greedy compression of a key with `H∞ ≥ l_bits` into `⌊δ·2^L⌋` buckets:
/// atoms in index order each go to the currently lightest bucket, lowest
/// bucket index on ties. The heaviest bucket then carries at most
/// `(1+δ)/|K'|`, so `H∞(f(K)) ≥ log|K'| − log(1+δ)`.
pub fn compress_min_entropy<W: Weight>(k: &Dist<W>, l_bits: f64, delta: f64) -> Result<Compression<W>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParams(format!("delta must lie in (0, 1], got {delta}")));
    }
    let h = min_entropy(k);
    if h < l_bits - 1e-12 {
        return Err(Error::Precondition(format!("min-entropy {h} is below the claimed {l_bits}")));
    }
    let size = (delta * l_bits.exp2() + 1e-9).floor();
    if size < 1.0 || size > k.len() as f64 {
        return Err(Error::InvalidParams(format!("target size {size} is outside 1..={}", k.len())));
    }
    let size = size as usize;
    let mut buckets = vec![W::zero(); size];
    let mut f = Vec::with_capacity(k.len());
    for m in k.masses() {
        let (b, _) = buckets
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("masses are ordered").then(a.0.cmp(&b.0)))
            .expect("at least one bucket");
        buckets[b] = buckets[b].clone() + m.clone();
        f.push(b);
    }
    let c = Compression {
        map: KeyMap {
            domain: k.space().clone(),
            codomain: OutcomeSpace::range(size),
            rule: KeyRule::Deterministic(f),
        },
        bucket_masses: buckets,
        bound: (1.0 + delta) / size as f64,
    };
    debug_assert!(c.bound_holds(), "compression bound violated");
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct Coupling<W> {
    pub map: KeyMap<W>,
    /// `P[g(K) = K]`, equal to `1 − Δ(K, U)`.
    pub agreement: W,
}

/// Randomized `g` with `g(K)` exactly uniform and `P[g(K) = K]` as large as
/// possible. Each atom keeps `min(p, 1/m)` of its mass; the excess of heavy
/// atoms is spread over light atoms in proportion to their deficits.
pub fn couple_to_uniform<W: Weight>(k: &Dist<W>) -> Coupling<W> {
    let m = k.len();
    let u = W::ratio(1, m as u64);
    let deficits: Vec<W> = k
        .masses()
        .iter()
        .map(|p| if *p < u { u.clone() - p.clone() } else { W::zero() })
        .collect();
    let gap = deficits.iter().fold(W::zero(), |a, d| a + d.clone());
    let mut agreement = W::zero();
    let rows = k
        .masses()
        .iter()
        .enumerate()
        .map(|(a, p)| {
            if *p <= u || p.is_zero() {
                agreement = agreement.clone() + p.clone();
                return vec![(a, W::one())];
            }
            agreement = agreement.clone() + u.clone();
            let stay = u.clone() / p.clone();
            let excess = (p.clone() - u.clone()) / p.clone();
            let mut row = vec![(a, stay)];
            for (b, d) in deficits.iter().enumerate() {
                if !d.is_zero() {
                    row.push((b, excess.clone() * d.clone() / gap.clone()));
                }
            }
            row
        })
        .collect();
    Coupling {
        map: KeyMap {
            domain: k.space().clone(),
            codomain: k.space().clone(),
            rule: KeyRule::Randomized(rows),
        },
        agreement,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{tv, Rational};
    use crate::random::random_dist;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn uniform_into_half_as_many_buckets() {
        let k = Dist::<Rational>::uniform(OutcomeSpace::range(8));
        let c = compress_min_entropy(&k, 3.0, 0.5).unwrap();
        assert_eq!(c.bucket_masses, vec![q(1, 4); 4]);
        assert_eq!(min_entropy(&c.map.push(&k).unwrap()), 2.0);
    }

    #[test]
    fn single_bucket() {
        let k = Dist::<f64>::uniform(OutcomeSpace::range(4));
        let c = compress_min_entropy(&k, 2.0, 0.25).unwrap();
        assert_eq!(c.bucket_masses.len(), 1);
        assert_eq!(min_entropy(&c.map.push(&k).unwrap()), 0.0);
    }

    #[test]
    fn rejects_overstated_min_entropy() {
        let k = Dist::<f64>::new(OutcomeSpace::range(4), vec![0.7, 0.1, 0.1, 0.1]).unwrap();
        assert!(matches!(compress_min_entropy(&k, 2.0, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn greedy_bound_on_flat_random_keys() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            // Near-flat laws over 2^10 atoms.
            let raw: Vec<f64> = (0..1024).map(|_| rng.gen_range(1.0..2.0)).collect();
            let total: f64 = raw.iter().sum();
            let k = Dist::new(OutcomeSpace::range(1024), raw.into_iter().map(|w| w / total).collect()).unwrap();
            let c = compress_min_entropy(&k, min_entropy(&k), 0.5).unwrap();
            assert!(c.bound_holds());
        }
    }

    #[test]
    fn coupling_examples() {
        let k = Dist::<Rational>::uniform(OutcomeSpace::range(5));
        let c = couple_to_uniform(&k);
        assert_eq!(c.agreement, q(1, 1));
        assert!((0..5).all(|a| c.map.row(a) == vec![(a, q(1, 1))]));
        let k = Dist::<Rational>::point(OutcomeSpace::range(2), 0);
        let c = couple_to_uniform(&k);
        assert_eq!(c.agreement, q(1, 2));
        assert_eq!(c.map.push(&k).unwrap(), Dist::uniform(OutcomeSpace::range(2)));
    }

    #[test]
    fn coupling_is_exact_and_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..300 {
            let k = random_dist::<Rational>(&mut rng, 2 + i % 9, i % 2 == 0);
            let c = couple_to_uniform(&k);
            let u = Dist::uniform(k.space().clone());
            assert_eq!(c.map.push(&k).unwrap(), u);
            assert_eq!(c.agreement, q(1, 1) - tv(&k, &u).unwrap());
        }
    }
}
