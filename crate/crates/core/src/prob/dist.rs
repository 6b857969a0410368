use super::space::{checked_product, MixedRadix, OutcomeSpace};
use super::weight::{Rational, Weight};
use crate::error::{Error, Result};

/// Tolerance used when validating that floating masses sum to one.
const FLOAT_MASS_TOL: f64 = 1e-9;

fn check_masses<W: Weight>(mass: &[W]) -> Result<()> {
    let mut total = W::zero();
    for m in mass {
        if m.is_negative() {
            return Err(Error::InvalidDistribution(format!("negative mass {m:?}")));
        }
        if !W::EXACT && !m.to_f64().is_finite() {
            return Err(Error::InvalidDistribution("non-finite mass".into()));
        }
        total = total + m.clone();
    }
    if !total.approx_eq(&W::one(), FLOAT_MASS_TOL) {
        return Err(Error::InvalidDistribution(format!(
            "masses sum to {} instead of 1",
            total.to_f64()
        )));
    }
    Ok(())
}

/// A probability distribution on a single outcome space.
#[derive(Clone, Debug, PartialEq)]
pub struct Dist<W = f64> {
    space: OutcomeSpace,
    mass: Vec<W>,
}

impl<W: Weight> Dist<W> {
    pub fn new(space: OutcomeSpace, mass: Vec<W>) -> Result<Self> {
        if mass.len() != space.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} masses for {} atoms",
                mass.len(),
                space.len()
            )));
        }
        check_masses(&mass)?;
        Ok(Self { space, mass })
    }

    pub fn uniform(space: OutcomeSpace) -> Self {
        let n = space.len() as u64;
        let mass = vec![W::ratio(1, n); space.len()];
        Self { space, mass }
    }

    pub fn point(space: OutcomeSpace, atom: usize) -> Self {
        let mut mass = vec![W::zero(); space.len()];
        mass[atom] = W::one();
        Self { space, mass }
    }

    pub fn bernoulli(p: W) -> Result<Self> {
        let space = OutcomeSpace::labeled(["0", "1"])?;
        Self::new(space, vec![W::one() - p.clone(), p])
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(space: OutcomeSpace, weights: Vec<W>) -> Result<Self> {
        let total = weights.iter().cloned().fold(W::zero(), |a, b| a + b);
        if total == W::zero() {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        let mass = weights.into_iter().map(|w| w / total.clone()).collect();
        Self::new(space, mass)
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn masses(&self) -> &[W] {
        &self.mass
    }

    pub fn mass(&self, atom: usize) -> &W {
        &self.mass[atom]
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.mass.len()).filter(|&i| !self.mass[i].is_zero()).collect()
    }

    pub fn to_f64(&self) -> Dist<f64> {
        Dist {
            space: self.space.clone(),
            mass: self.mass.iter().map(Weight::to_f64).collect(),
        }
    }

    pub fn convert<V: Weight>(&self) -> Dist<V> {
        Dist {
            space: self.space.clone(),
            mass: self.mass.iter().map(|m| V::from_rational(&m.to_rational())).collect(),
        }
    }

    pub fn masses_f64(&self) -> Vec<f64> {
        self.mass.iter().map(Weight::to_f64).collect()
    }

    /// Law of `f(W)` on `codomain`.
    pub fn push_forward(&self, codomain: OutcomeSpace, f: impl Fn(usize) -> usize) -> Result<Self> {
        let mut mass = vec![W::zero(); codomain.len()];
        for (i, m) in self.mass.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let j = f(i);
            if j >= mass.len() {
                return Err(Error::InvalidParams(format!("image {j} outside codomain")));
            }
            mass[j] = mass[j].clone() + m.clone();
        }
        Ok(Self {
            space: codomain,
            mass,
        })
    }
}

/// Exact joint law on an ordered product of finite spaces, stored densely
/// in row-major order (the last factor varies fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct JointDist<W = f64> {
    factors: Vec<OutcomeSpace>,
    mass: Vec<W>,
}

impl<W: Weight> JointDist<W> {
    pub fn new(factors: Vec<OutcomeSpace>, mass: Vec<W>) -> Result<Self> {
        let size = checked_product(factors.iter().map(|f| f.len()))
            .ok_or_else(|| Error::InvalidParams("joint too large".into()))?;
        if size != mass.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} masses for {size} tuples",
                mass.len()
            )));
        }
        check_masses(&mass)?;
        Ok(Self { factors, mass })
    }

    /// Builds a joint from `(tuple, mass)` pairs; repeated tuples accumulate.
    pub fn from_sparse<I>(factors: Vec<OutcomeSpace>, entries: I, cap: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, W)>,
    {
        let radix = Self::radix_checked(&factors, cap)?;
        let mut mass = vec![W::zero(); radix.total()];
        for (tuple, w) in entries {
            if tuple.len() != factors.len() || tuple.iter().zip(&factors).any(|(&t, f)| t >= f.len()) {
                return Err(Error::InvalidParams(format!("tuple {tuple:?} outside the factor spaces")));
            }
            let i = radix.encode(&tuple);
            mass[i] = mass[i].clone() + w;
        }
        Self::new(factors, mass)
    }

    pub fn from_fn(factors: Vec<OutcomeSpace>, cap: usize, f: impl Fn(&[usize]) -> W) -> Result<Self> {
        let radix = Self::radix_checked(&factors, cap)?;
        let mut digits = vec![0; factors.len()];
        let mass = (0..radix.total())
            .map(|i| {
                radix.decode_into(i, &mut digits);
                f(&digits)
            })
            .collect();
        Self::new(factors, mass)
    }

    fn radix_checked(factors: &[OutcomeSpace], cap: usize) -> Result<MixedRadix> {
        let size = factors
            .iter()
            .try_fold(1u128, |acc, f| acc.checked_mul(f.len() as u128))
            .unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::CapExceeded {
                what: "joint distribution",
                needed: size,
                cap: cap as u128,
            });
        }
        Ok(MixedRadix::new(factors.iter().map(|f| f.len()).collect()))
    }

    /// Independent product `p ⊗ q` with factors `[p-space, q-space]`.
    pub fn product(p: &Dist<W>, q: &Dist<W>) -> Self {
        let mut mass = Vec::with_capacity(p.len() * q.len());
        for a in p.masses() {
            for b in q.masses() {
                mass.push(a.clone() * b.clone());
            }
        }
        Self {
            factors: vec![p.space().clone(), q.space().clone()],
            mass,
        }
    }

    pub fn from_dist(d: &Dist<W>) -> Self {
        Self {
            factors: vec![d.space().clone()],
            mass: d.masses().to_vec(),
        }
    }

    pub fn factors(&self) -> &[OutcomeSpace] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn size(&self) -> usize {
        self.mass.len()
    }

    pub fn masses(&self) -> &[W] {
        &self.mass
    }

    pub fn radix(&self) -> MixedRadix {
        MixedRadix::new(self.factors.iter().map(|f| f.len()).collect())
    }

    pub fn mass_at(&self, tuple: &[usize]) -> &W {
        &self.mass[self.radix().encode(tuple)]
    }

    /// Non-zero tuples with their masses.
    pub fn support(&self) -> Vec<(Vec<usize>, W)> {
        let radix = self.radix();
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(i, m)| (radix.decode(i), m.clone()))
            .collect()
    }

    pub fn support_len(&self) -> usize {
        self.mass.iter().filter(|m| !m.is_zero()).count()
    }

    /// Marginal on the listed factors, in the listed order.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        self.check_factors(keep)?;
        let factors: Vec<OutcomeSpace> = keep.iter().map(|&k| self.factors[k].clone()).collect();
        let out = MixedRadix::new(factors.iter().map(|f| f.len()).collect());
        let radix = self.radix();
        let mut mass = vec![W::zero(); out.total()];
        let mut digits = vec![0; self.arity()];
        let mut sub = vec![0; keep.len()];
        for (i, m) in self.mass.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            radix.decode_into(i, &mut digits);
            for (s, &k) in sub.iter_mut().zip(keep) {
                *s = digits[k];
            }
            let j = out.encode(&sub);
            mass[j] = mass[j].clone() + m.clone();
        }
        Ok(Self { factors, mass })
    }

    /// Marginal law of a single factor.
    pub fn marginal_dist(&self, factor: usize) -> Result<Dist<W>> {
        let m = self.marginal(&[factor])?;
        Ok(Dist {
            space: m.factors[0].clone(),
            mass: m.mass,
        })
    }

    /// Flattens the joint into a single distribution over tuple indices.
    pub fn flatten(&self) -> Dist<W> {
        Dist {
            space: OutcomeSpace::indexed("tuple", self.size()),
            mass: self.mass.clone(),
        }
    }

    /// Law of the remaining factors given `factor = atom`.
    pub fn condition_on(&self, factor: usize, atom: usize) -> Result<Self> {
        self.check_factors(&[factor])?;
        let radix = self.radix();
        let rest: Vec<usize> = (0..self.arity()).filter(|&k| k != factor).collect();
        let factors: Vec<OutcomeSpace> = rest.iter().map(|&k| self.factors[k].clone()).collect();
        let out = MixedRadix::new(factors.iter().map(|f| f.len()).collect());
        let mut mass = vec![W::zero(); out.total()];
        let mut digits = vec![0; self.arity()];
        let mut sub = vec![0; rest.len()];
        let mut total = W::zero();
        for (i, m) in self.mass.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            radix.decode_into(i, &mut digits);
            if digits[factor] != atom {
                continue;
            }
            for (s, &k) in sub.iter_mut().zip(&rest) {
                *s = digits[k];
            }
            let j = out.encode(&sub);
            mass[j] = mass[j].clone() + m.clone();
            total = total + m.clone();
        }
        if total.is_zero() {
            return Err(Error::Precondition(format!("conditioning event {factor}={atom} has zero mass")));
        }
        for m in &mut mass {
            *m = m.clone() / total.clone();
        }
        Ok(Self { factors, mass })
    }

    /// Law of `f(tuple)` on new factor spaces.
    pub fn push_forward(
        &self,
        factors: Vec<OutcomeSpace>,
        cap: usize,
        f: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        let radix = self.radix();
        let mut digits = vec![0; self.arity()];
        let mut entries = Vec::new();
        for (i, m) in self.mass.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            radix.decode_into(i, &mut digits);
            entries.push((f(&digits), m.clone()));
        }
        Self::from_sparse(factors, entries, cap)
    }

    /// Product of the marginals of a two-factor joint.
    pub fn product_of_marginals(&self) -> Result<Self> {
        if self.arity() != 2 {
            return Err(Error::InvalidParams("product of marginals needs exactly two factors".into()));
        }
        Ok(Self::product(&self.marginal_dist(0)?, &self.marginal_dist(1)?))
    }

    pub fn to_f64(&self) -> JointDist<f64> {
        JointDist {
            factors: self.factors.clone(),
            mass: self.mass.iter().map(Weight::to_f64).collect(),
        }
    }

    pub fn convert<V: Weight>(&self) -> JointDist<V> {
        JointDist {
            factors: self.factors.clone(),
            mass: self.mass.iter().map(|m| V::from_rational(&m.to_rational())).collect(),
        }
    }

    pub fn to_rational(&self) -> JointDist<Rational> {
        self.convert()
    }

    fn check_factors(&self, idx: &[usize]) -> Result<()> {
        for &k in idx {
            if k >= self.arity() {
                return Err(Error::InvalidParams(format!("factor {k} out of range (arity {})", self.arity())));
            }
        }
        Ok(())
    }

    pub(crate) fn masses_f64(&self) -> Vec<f64> {
        self.mass.iter().map(Weight::to_f64).collect()
    }
}
