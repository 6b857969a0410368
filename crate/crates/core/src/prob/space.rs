use crate::error::{Error, Result};
use std::borrow::Cow;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

/// A finite, totally ordered set of opaque atoms.
///
/// Atoms are addressed by index `0..len`. Labels are used only for display
/// and serialization; large structured spaces use the `Indexed` form so
/// labels are generated on demand.
#[derive(Clone, PartialEq, Eq)]
pub struct OutcomeSpace {
    repr: Repr,
}

#[derive(Clone, PartialEq, Eq)]
enum Repr {
    Labels(Arc<[String]>),
    Indexed { name: Arc<str>, len: usize },
}

impl OutcomeSpace {
    /// Labelled space. Labels must be pairwise distinct and non-empty as a set.
    pub fn labeled<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidParams("outcome space must be non-empty".into()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidParams(format!("duplicate atom label {l:?}")));
            }
        }
        Ok(Self {
            repr: Repr::Labels(labels.into()),
        })
    }

    /// Space of `len` atoms labelled `name#0 .. name#len-1`.
    pub fn indexed(name: &str, len: usize) -> Self {
        assert!(len > 0, "outcome space must be non-empty");
        Self {
            repr: Repr::Indexed {
                name: name.into(),
                len,
            },
        }
    }

    /// Atoms `0..len` labelled by their decimal index.
    pub fn range(len: usize) -> Self {
        Self::indexed("", len)
    }

    /// The one-atom space, used for absent coins and padded rounds.
    pub fn unit() -> Self {
        Self::indexed("unit", 1)
    }

    pub fn bits(width: u32) -> Self {
        Self::range(1usize << width)
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Labels(l) => l.len(),
            Repr::Indexed { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, i: usize) -> Cow<'_, str> {
        match &self.repr {
            Repr::Labels(l) => Cow::Borrowed(&l[i]),
            Repr::Indexed { name, .. } if name.is_empty() => Cow::Owned(i.to_string()),
            Repr::Indexed { name, .. } => Cow::Owned(format!("{name}#{i}")),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.label(i).into_owned()).collect()
    }

    /// `(name, len)` for spaces with generated labels.
    pub fn indexed_parts(&self) -> Option<(&str, usize)> {
        match &self.repr {
            Repr::Labels(_) => None,
            Repr::Indexed { name, len } => Some((name, *len)),
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        match &self.repr {
            Repr::Labels(l) => l.iter().position(|x| x == label),
            Repr::Indexed { name, len } => {
                let rest = if name.is_empty() {
                    label
                } else {
                    label.strip_prefix(&**name)?.strip_prefix('#')?
                };
                rest.parse().ok().filter(|i| i < len)
            }
        }
    }

    /// Product space with labels `(a,b,..)`.
    pub fn product(parts: &[OutcomeSpace]) -> Result<Self> {
        let len = checked_product(parts.iter().map(|p| p.len()))
            .ok_or_else(|| Error::InvalidParams("product space too large".into()))?;
        if len > 1 << 20 {
            return Ok(Self::indexed("tuple", len));
        }
        let mut labels = Vec::with_capacity(len);
        let radix = MixedRadix::new(parts.iter().map(|p| p.len()).collect());
        let mut digits = vec![0; parts.len()];
        for i in 0..len {
            radix.decode_into(i, &mut digits);
            let inner: Vec<Cow<str>> = parts.iter().zip(&digits).map(|(p, &d)| p.label(d)).collect();
            labels.push(format!("({})", inner.join(",")));
        }
        Self::labeled(labels)
    }
}

impl fmt::Debug for OutcomeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Labels(l) if l.len() <= 8 => write!(f, "OutcomeSpace{:?}", &l[..]),
            Repr::Labels(l) => write!(f, "OutcomeSpace[{} labelled atoms]", l.len()),
            Repr::Indexed { name, len } => write!(f, "OutcomeSpace[{name}; {len}]"),
        }
    }
}

pub(crate) fn checked_product(it: impl IntoIterator<Item = usize>) -> Option<usize> {
    it.into_iter().try_fold(1usize, |acc, x| acc.checked_mul(x))
}

/// Row-major mixed-radix indexing (last digit varies fastest).
#[derive(Clone, Debug)]
pub struct MixedRadix {
    radices: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl MixedRadix {
    pub fn new(radices: Vec<usize>) -> Self {
        let mut strides = vec![1; radices.len()];
        let mut acc = 1usize;
        for i in (0..radices.len()).rev() {
            strides[i] = acc;
            acc = acc.checked_mul(radices[i]).expect("mixed radix overflow");
        }
        Self {
            radices,
            strides,
            total: acc,
        }
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.radices.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn decode_into(&self, mut index: usize, out: &mut [usize]) {
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = index / s;
            index %= s;
        }
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.radices.len()];
        self.decode_into(index, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_labels_rejected() {
        assert!(OutcomeSpace::labeled(["a", "a"]).is_err());
        assert!(OutcomeSpace::labeled(Vec::<String>::new()).is_err());
    }

    #[test]
    fn indexed_round_trips_labels() {
        let s = OutcomeSpace::indexed("x", 5);
        assert_eq!(s.label(3), "x#3");
        assert_eq!(s.index_of("x#3"), Some(3));
        assert_eq!(s.index_of("x#5"), None);
        assert_eq!(OutcomeSpace::range(4).index_of("2"), Some(2));
    }

    #[test]
    fn mixed_radix_round_trip() {
        let r = MixedRadix::new(vec![3, 1, 4]);
        for i in 0..r.total() {
            assert_eq!(r.encode(&r.decode(i)), i);
        }
        assert_eq!(r.decode(5), vec![1, 0, 1]);
    }

    #[test]
    fn product_labels() {
        let a = OutcomeSpace::labeled(["0", "1"]).unwrap();
        let p = OutcomeSpace::product(&[a.clone(), a]).unwrap();
        assert_eq!(p.labels(), vec!["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);
    }
}
