//! Protocol documents (`crglab-protocol/1`).
//!
//! ```json
//! {
//!   "schema": "crglab-protocol/1",
//!   "numeric": "exact-rational",
//!   "rounds": 1,
//!   "inputs": {"alice": ["0", "1"], "bob": ["0", "1"]},
//!   "alphabets": [["0", "1"]],
//!   "flavor": "deterministic",
//!   "halting": false,
//!   "public_coin": null,
//!   "kernels": [[[[1, 1], [0, 1]], [[0, 1], [1, 1]]]],
//!   "key_space": null,
//!   "key_maps": null
//! }
//! ```
//!
//! `kernels[t]` lists dense rows in the order `(history, input, coin)` with
//! the coin varying fastest. An all-zero row is undefined. Spaces are label
//! lists or `{"name": .., "len": ..}` for generated labels. In exact mode a
//! probability is a `[numerator, denominator]` pair (decimal strings when a
//! part exceeds 64 bits); in float mode it is a JSON number.

use super::tree::{Flavor, Kernel, KeyedProtocol, Party, ProtocolTree};
use crate::error::{Error, Result};
use crate::prob::{Dist, OutcomeSpace, Rational, Weight};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::sync::Arc;

pub const SCHEMA: &str = "crglab-protocol/1";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceDoc {
    Labels(Vec<String>),
    Indexed { name: String, len: usize },
}

impl SpaceDoc {
    fn of(s: &OutcomeSpace) -> Self {
        match s.indexed_parts() {
            Some((name, len)) => SpaceDoc::Indexed { name: name.into(), len },
            None => SpaceDoc::Labels(s.labels()),
        }
    }

    fn build(self) -> Result<OutcomeSpace> {
        match self {
            SpaceDoc::Labels(l) => OutcomeSpace::labeled(l),
            SpaceDoc::Indexed { len: 0, .. } => Err(Error::Artifact("empty indexed space".into())),
            SpaceDoc::Indexed { name, len } => Ok(OutcomeSpace::indexed(&name, len)),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputsDoc {
    pub alice: SpaceDoc,
    pub bob: SpaceDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoinDoc {
    pub space: SpaceDoc,
    pub mass: Vec<Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyMapsDoc {
    pub alice: Vec<Vec<Value>>,
    pub bob: Vec<Vec<Value>>,
}

/// Serialized protocol, optionally with key maps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolDoc {
    pub schema: String,
    pub numeric: String,
    pub rounds: usize,
    pub inputs: InputsDoc,
    pub alphabets: Vec<SpaceDoc>,
    pub flavor: Flavor,
    #[serde(default)]
    pub halting: bool,
    #[serde(default)]
    pub public_coin: Option<CoinDoc>,
    pub kernels: Vec<Vec<Vec<Value>>>,
    #[serde(default)]
    pub key_space: Option<SpaceDoc>,
    #[serde(default)]
    pub key_maps: Option<KeyMapsDoc>,
}

fn big_to_json(b: &BigInt) -> Value {
    match u64::try_from(b) {
        Ok(v) => Value::from(v),
        Err(_) => Value::from(b.to_string()),
    }
}

fn weight_to_json<W: Weight>(w: &W) -> Value {
    if W::EXACT {
        let r = w.to_rational();
        Value::Array(vec![big_to_json(r.numer()), big_to_json(r.denom())])
    } else {
        Value::from(w.to_f64())
    }
}

fn json_to_big(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_u64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn weight_from_json<W: Weight>(v: &Value) -> Result<W> {
    let bad = || Error::Artifact(format!("bad probability {v}"));
    match v {
        Value::Array(pair) if pair.len() == 2 => {
            let n = json_to_big(&pair[0]).ok_or_else(bad)?;
            let d = json_to_big(&pair[1]).ok_or_else(bad)?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(W::from_rational(&Rational::new(n, d)))
        }
        Value::Number(n) => Ok(W::from_f64(n.as_f64().ok_or_else(bad)?)),
        _ => Err(bad()),
    }
}

/// Materializes a kernel into dense rows over `(history, input, coin)`.
fn dense_rows<W: Weight>(
    p: &ProtocolTree<W>,
    hist_len: usize,
    party: Party,
    width: usize,
    row: impl Fn(&[usize], usize, usize) -> Result<Option<Vec<(usize, W)>>>,
) -> Result<Vec<Vec<Value>>> {
    let radix = p.history_radix(hist_len);
    let inputs = p.inputs(party).len();
    let coins = p.coin_count();
    let total = radix.total().saturating_mul(inputs).saturating_mul(coins);
    if total.saturating_mul(width) > crate::STATE_CAP {
        return Err(Error::CapExceeded {
            what: "dense kernel serialization",
            needed: total as u128 * width as u128,
            cap: crate::STATE_CAP as u128,
        });
    }
    let mut out = Vec::with_capacity(total);
    let mut hist = vec![0; hist_len];
    for h in 0..radix.total() {
        radix.decode_into(h, &mut hist);
        for x in 0..inputs {
            for c in 0..coins {
                let mut dense = vec![W::zero(); width];
                if let Some(r) = row(&hist, x, c)? {
                    for (s, w) in r {
                        dense[s] = w;
                    }
                }
                out.push(dense.iter().map(weight_to_json).collect());
            }
        }
    }
    Ok(out)
}

fn numeric_name<W: Weight>() -> &'static str {
    if W::EXACT {
        "exact-rational"
    } else {
        "float64"
    }
}

fn doc_of<W: Weight>(p: &ProtocolTree<W>) -> Result<ProtocolDoc> {
    let mut kernels = Vec::with_capacity(p.rounds());
    for t in 0..p.rounds() {
        let width = p.alphabets()[t].len();
        // Rows are read unvalidated here so halting histories serialize as
        // undefined rows.
        kernels.push(dense_rows(p, t, p.speaker(t), width, |h, x, c| {
            let reached_halt = p.halting() && h.iter().enumerate().any(|(s, &m)| m == p.halt_symbol(s));
            if reached_halt {
                return Ok(None);
            }
            p.row(t, h, x, c)
        })?);
    }
    Ok(ProtocolDoc {
        schema: SCHEMA.into(),
        numeric: numeric_name::<W>().into(),
        rounds: p.rounds(),
        inputs: InputsDoc {
            alice: SpaceDoc::of(p.alice_inputs()),
            bob: SpaceDoc::of(p.bob_inputs()),
        },
        alphabets: p.alphabets().iter().map(SpaceDoc::of).collect(),
        flavor: p.flavor(),
        halting: p.halting(),
        public_coin: p.public_coin().map(|d| CoinDoc {
            space: SpaceDoc::of(d.space()),
            mass: d.masses().iter().map(weight_to_json).collect(),
        }),
        kernels,
        key_space: None,
        key_maps: None,
    })
}

pub fn protocol_to_json<W: Weight>(p: &ProtocolTree<W>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&doc_of(p)?)?)
}

pub fn keyed_to_json<W: Weight>(kp: &KeyedProtocol<W>) -> Result<String> {
    let p = &kp.protocol;
    let mut doc = doc_of(p)?;
    let width = kp.key_space().len();
    let map = |party| dense_rows(p, p.rounds(), party, width, |h, x, c| kp.key_row(party, h, x, c));
    doc.key_maps = Some(KeyMapsDoc {
        alice: map(Party::Alice)?,
        bob: map(Party::Bob)?,
    });
    doc.key_space = Some(SpaceDoc::of(kp.key_space()));
    Ok(serde_json::to_string_pretty(&doc)?)
}

fn table<W: Weight>(rows: &[Vec<Value>], width: usize) -> Result<Kernel<W>> {
    let mut flat = Vec::with_capacity(rows.len() * width);
    for r in rows {
        if r.len() != width {
            return Err(Error::Artifact(format!("kernel row has {} entries, expected {width}", r.len())));
        }
        for v in r {
            flat.push(weight_from_json::<W>(v)?);
        }
    }
    Ok(Kernel::Table {
        width,
        rows: Arc::new(flat),
    })
}

fn tree_of<W: Weight>(doc: ProtocolDoc) -> Result<(ProtocolTree<W>, Option<(OutcomeSpace, KeyMapsDoc)>)> {
    if doc.schema != SCHEMA {
        return Err(Error::Artifact(format!("unsupported schema `{}`", doc.schema)));
    }
    if doc.rounds != doc.alphabets.len() || doc.rounds != doc.kernels.len() {
        return Err(Error::Artifact("rounds, alphabets and kernels disagree in length".into()));
    }
    let mut b = ProtocolTree::<W>::builder(doc.inputs.alice.build()?, doc.inputs.bob.build()?)
        .flavor(doc.flavor)
        .halting(doc.halting);
    if let Some(c) = doc.public_coin {
        let mass = c.mass.iter().map(weight_from_json::<W>).collect::<Result<Vec<_>>>()?;
        b = b.public_coin(Dist::new(c.space.build()?, mass)?);
    }
    for (alphabet, rows) in doc.alphabets.into_iter().zip(&doc.kernels) {
        let alphabet = alphabet.build()?;
        let width = alphabet.len();
        b = b.round(alphabet, table(rows, width)?);
    }
    let keys = match (doc.key_space, doc.key_maps) {
        (Some(k), Some(m)) => Some((k.build()?, m)),
        (None, None) => None,
        _ => return Err(Error::Artifact("key_space and key_maps must appear together".into())),
    };
    Ok((b.build()?, keys))
}

pub fn protocol_from_json<W: Weight>(text: &str) -> Result<ProtocolTree<W>> {
    Ok(tree_of(serde_json::from_str(text)?)?.0)
}

pub fn keyed_from_json<W: Weight>(text: &str) -> Result<KeyedProtocol<W>> {
    let (p, keys) = tree_of::<W>(serde_json::from_str(text)?)?;
    let (space, maps) = keys.ok_or_else(|| Error::Artifact("document has no key maps".into()))?;
    let width = space.len();
    let alice = table(&maps.alice, width)?;
    let bob = table(&maps.bob, width)?;
    KeyedProtocol::new(p, space, alice, bob)
}
