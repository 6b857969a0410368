use crate::error::{Error, Result};
use crate::prob::{Dist, MixedRadix, OutcomeSpace, Weight};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    /// Speaker of 0-based round `t`: Alice speaks first and turns alternate.
    pub fn of_round(t: usize) -> Party {
        if t % 2 == 0 {
            Party::Alice
        } else {
            Party::Bob
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Deterministic,
    PrivateCoin,
    PublicCoin,
}

/// Sparse kernel row: `(symbol, probability)` pairs.
pub type Row<W> = Vec<(usize, W)>;

/// Kernel evaluated on demand: `(history, speaker input, public coin)` to a
/// row, or `None` when the row is undefined.
pub type KernelFn<W> = Arc<dyn Fn(&[usize], usize, usize) -> Option<Row<W>> + Send + Sync>;

/// A Markov kernel from `(history, input, coin)` to a finite alphabet.
///
/// Tables are stored densely; the row for `(h, x, c)` starts at
/// `((h * inputs + x) * coins + c) * width`. An all-zero table row is
/// undefined.
#[derive(Clone)]
pub enum Kernel<W> {
    Table { width: usize, rows: Arc<Vec<W>> },
    Func(KernelFn<W>),
}

impl<W: Weight> Kernel<W> {
    pub fn func(f: impl Fn(&[usize], usize, usize) -> Option<Row<W>> + Send + Sync + 'static) -> Self {
        Kernel::Func(Arc::new(f))
    }

    /// Deterministic kernel from a message function.
    pub fn deterministic(f: impl Fn(&[usize], usize, usize) -> usize + Send + Sync + 'static) -> Self {
        Kernel::Func(Arc::new(move |h, x, c| Some(vec![(f(h, x, c), W::one())])))
    }

    pub(crate) fn row(&self, hist: &[usize], flat: impl FnOnce() -> usize, input: usize, coin: usize) -> Option<Row<W>> {
        match self {
            Kernel::Func(f) => f(hist, input, coin),
            Kernel::Table { width, rows } => {
                let start = flat() * width;
                let slice = rows.get(start..start + width)?;
                let row: Row<W> = slice
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(i, w)| (i, w.clone()))
                    .collect();
                if row.is_empty() {
                    None
                } else {
                    Some(row)
                }
            }
        }
    }
}

impl<W> fmt::Debug for Kernel<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Table { width, rows } => write!(f, "Table[{} rows x {width}]", rows.len() / (*width).max(1)),
            Kernel::Func(_) => write!(f, "Func"),
        }
    }
}

/// An r-round alternating protocol with stochastic kernels. Private coins
/// live inside the kernels; a public coin, when present, is drawn once and
/// seen by both parties.
#[derive(Clone, Debug)]
pub struct ProtocolTree<W = f64> {
    pub(crate) alice: OutcomeSpace,
    pub(crate) bob: OutcomeSpace,
    pub(crate) alphabets: Vec<OutcomeSpace>,
    pub(crate) kernels: Vec<Kernel<W>>,
    pub(crate) public_coin: Option<Dist<W>>,
    pub(crate) flavor: Flavor,
    pub(crate) halting: bool,
}

impl<W: Weight> ProtocolTree<W> {
    pub fn builder(alice: OutcomeSpace, bob: OutcomeSpace) -> ProtocolBuilder<W> {
        ProtocolBuilder {
            tree: ProtocolTree {
                alice,
                bob,
                alphabets: Vec::new(),
                kernels: Vec::new(),
                public_coin: None,
                flavor: Flavor::Deterministic,
                halting: false,
            },
        }
    }

    /// One round in which Alice sends her input.
    pub fn reveal_alice(alice: OutcomeSpace, bob: OutcomeSpace) -> Self {
        let alphabet = alice.clone();
        ProtocolTree {
            alice,
            bob,
            alphabets: vec![alphabet],
            kernels: vec![Kernel::deterministic(|_, x, _| x)],
            public_coin: None,
            flavor: Flavor::Deterministic,
            halting: false,
        }
    }

    pub fn rounds(&self) -> usize {
        self.alphabets.len()
    }

    pub fn speaker(&self, t: usize) -> Party {
        Party::of_round(t)
    }

    pub fn alice_inputs(&self) -> &OutcomeSpace {
        &self.alice
    }

    pub fn bob_inputs(&self) -> &OutcomeSpace {
        &self.bob
    }

    pub fn inputs(&self, party: Party) -> &OutcomeSpace {
        match party {
            Party::Alice => &self.alice,
            Party::Bob => &self.bob,
        }
    }

    pub fn alphabets(&self) -> &[OutcomeSpace] {
        &self.alphabets
    }

    pub fn kernel(&self, t: usize) -> &Kernel<W> {
        &self.kernels[t]
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn public_coin(&self) -> Option<&Dist<W>> {
        self.public_coin.as_ref()
    }

    pub fn coin_count(&self) -> usize {
        self.public_coin.as_ref().map_or(1, Dist::len)
    }

    /// Whether rows may be undefined; the halt symbol is then the index
    /// `|U_t|` of every round.
    pub fn halting(&self) -> bool {
        self.halting
    }

    /// Symbols per round including the halt symbol when enabled.
    pub fn symbol_count(&self, t: usize) -> usize {
        self.alphabets[t].len() + self.halting as usize
    }

    pub fn halt_symbol(&self, t: usize) -> usize {
        self.alphabets[t].len()
    }

    /// Fixed-length encoding cost: `Σ_t ⌈log2 |U_t|⌉` (halt counted as a symbol).
    pub fn cc_bits(&self) -> u32 {
        (0..self.rounds()).map(|t| ceil_log2(self.symbol_count(t))).sum()
    }

    /// Radix over the first `t` rounds' symbols.
    pub fn history_radix(&self, t: usize) -> MixedRadix {
        MixedRadix::new((0..t).map(|s| self.symbol_count(s)).collect())
    }

    /// Kernel row of round `t`. Rows are validated: masses must be
    /// non-negative, sum to one, and be point masses for deterministic
    /// protocols. `Ok(None)` means the row is undefined.
    pub fn row(&self, t: usize, hist: &[usize], input: usize, coin: usize) -> Result<Option<Row<W>>> {
        let speaker = self.speaker(t);
        let inputs = self.inputs(speaker).len();
        let coins = self.coin_count();
        let row = self.kernels[t].row(
            hist,
            || (self.history_radix(t).encode(hist) * inputs + input) * coins + coin,
            input,
            coin,
        );
        let Some(row) = row else { return Ok(None) };
        check_row(&row, self.alphabets[t].len(), self.flavor == Flavor::Deterministic, t)?;
        Ok(Some(row))
    }
}

pub(crate) fn check_row<W: Weight>(row: &Row<W>, width: usize, point: bool, round: usize) -> Result<()> {
    let mut total = W::zero();
    for (sym, w) in row {
        if *sym >= width || w.is_negative() {
            return Err(Error::InvalidDistribution(format!(
                "round {round}: row entry ({sym}, {w:?}) outside alphabet or negative"
            )));
        }
        total = total + w.clone();
    }
    if !total.approx_eq(&W::one(), 1e-9) {
        return Err(Error::InvalidDistribution(format!(
            "round {round}: row sums to {}",
            total.to_f64()
        )));
    }
    if point && row.iter().filter(|(_, w)| !w.is_zero()).count() != 1 {
        return Err(Error::InvalidDistribution(format!(
            "round {round}: deterministic protocol has a randomized row"
        )));
    }
    Ok(())
}

pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

pub struct ProtocolBuilder<W> {
    tree: ProtocolTree<W>,
}

impl<W: Weight> ProtocolBuilder<W> {
    pub fn round(mut self, alphabet: OutcomeSpace, kernel: Kernel<W>) -> Self {
        self.tree.alphabets.push(alphabet);
        self.tree.kernels.push(kernel);
        self
    }

    pub fn public_coin(mut self, coin: Dist<W>) -> Self {
        self.tree.public_coin = Some(coin);
        self
    }

    pub fn flavor(mut self, flavor: Flavor) -> Self {
        self.tree.flavor = flavor;
        self
    }

    pub fn halting(mut self, halting: bool) -> Self {
        self.tree.halting = halting;
        self
    }

    pub fn build(self) -> Result<ProtocolTree<W>> {
        let t = &self.tree;
        if t.public_coin.is_some() && t.flavor != Flavor::PublicCoin {
            return Err(Error::InvalidParams("a public coin requires the public-coin flavor".into()));
        }
        for (k, kernel) in t.kernels.iter().enumerate() {
            if let Kernel::Table { width, rows } = kernel {
                let expect = t.history_radix(k).total() * t.inputs(Party::of_round(k)).len() * t.coin_count();
                if *width != t.alphabets[k].len() || rows.len() != expect * width {
                    return Err(Error::InvalidParams(format!(
                        "round {k}: table has {} entries, expected {} rows of width {}",
                        rows.len(),
                        expect,
                        t.alphabets[k].len()
                    )));
                }
            }
        }
        Ok(self.tree)
    }
}

/// A protocol together with key maps for both parties.
#[derive(Clone, Debug)]
pub struct KeyedProtocol<W = f64> {
    pub protocol: ProtocolTree<W>,
    pub(crate) key_space: OutcomeSpace,
    /// Key maps read `(full transcript, own input, coin)`.
    pub(crate) alice_key: Kernel<W>,
    pub(crate) bob_key: Kernel<W>,
}

impl<W: Weight> KeyedProtocol<W> {
    pub fn new(protocol: ProtocolTree<W>, key_space: OutcomeSpace, alice_key: Kernel<W>, bob_key: Kernel<W>) -> Result<Self> {
        let kp = Self {
            protocol,
            key_space,
            alice_key,
            bob_key,
        };
        for party in [Party::Alice, Party::Bob] {
            if let Kernel::Table { width, rows } = kp.key_map(party) {
                let p = &kp.protocol;
                let expect = p.history_radix(p.rounds()).total() * p.inputs(party).len() * p.coin_count();
                if *width != kp.key_space.len() || rows.len() != expect * width {
                    return Err(Error::InvalidParams("key table has the wrong shape".into()));
                }
            }
        }
        Ok(kp)
    }

    pub fn key_space(&self) -> &OutcomeSpace {
        &self.key_space
    }

    pub fn key_map(&self, party: Party) -> &Kernel<W> {
        match party {
            Party::Alice => &self.alice_key,
            Party::Bob => &self.bob_key,
        }
    }

    /// Key row of `party` given its input, the full transcript, and the coin.
    pub fn key_row(&self, party: Party, transcript: &[usize], input: usize, coin: usize) -> Result<Option<Row<W>>> {
        let p = &self.protocol;
        let inputs = p.inputs(party).len();
        let coins = p.coin_count();
        let row = self.key_map(party).row(
            transcript,
            || (p.history_radix(p.rounds()).encode(transcript) * inputs + input) * coins + coin,
            input,
            coin,
        );
        let Some(row) = row else { return Ok(None) };
        check_row(&row, self.key_space.len(), false, p.rounds())?;
        Ok(Some(row))
    }
}
