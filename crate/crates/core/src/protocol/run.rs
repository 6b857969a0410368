//! Sampled execution of protocols.

use super::tree::{KeyedProtocol, Party, ProtocolTree, Row};
use crate::error::{Error, Result};
use crate::prob::Weight;
use crate::tape::{Stream, Tape};
use serde::Serialize;

/// The public view of one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub coin: usize,
    pub messages: Vec<usize>,
}

/// Draws a symbol from a row using 53 uniform bits from `stream`.
pub fn draw_row<W: Weight>(tape: &mut dyn Tape, stream: Stream, row: &Row<W>) -> usize {
    if let [(only, _)] = row.as_slice() {
        return *only;
    }
    let u = tape.bits(stream, 53) as f64 / (1u64 << 53) as f64;
    let mut acc = 0.0;
    let mut last = row[0].0;
    for (sym, w) in row {
        let w = w.to_f64();
        if w <= 0.0 {
            continue;
        }
        last = *sym;
        acc += w;
        if u < acc {
            break;
        }
    }
    last
}

fn private_stream(p: Party) -> Stream {
    match p {
        Party::Alice => Stream::Alice,
        Party::Bob => Stream::Bob,
    }
}

/// Runs the protocol on inputs `(x, y)`. Alice's and Bob's kernels draw
/// from their private streams, the coin from the public stream. Undefined
/// rows emit the halt symbol when the protocol allows halting.
pub fn run_protocol<W: Weight>(p: &ProtocolTree<W>, x: usize, y: usize, tape: &mut dyn Tape) -> Result<Transcript> {
    if x >= p.alice_inputs().len() || y >= p.bob_inputs().len() {
        return Err(Error::InvalidParams(format!("inputs ({x}, {y}) outside the protocol's input spaces")));
    }
    let coin = match p.public_coin() {
        Some(d) => {
            let row: Row<W> = d.masses().iter().cloned().enumerate().filter(|(_, w)| !w.is_zero()).collect();
            draw_row(tape, Stream::Public, &row)
        }
        None => 0,
    };
    let mut messages = Vec::with_capacity(p.rounds());
    let mut halted = false;
    for t in 0..p.rounds() {
        if halted {
            messages.push(p.halt_symbol(t));
            continue;
        }
        let speaker = p.speaker(t);
        let input = if speaker == Party::Alice { x } else { y };
        match p.row(t, &messages, input, coin)? {
            Some(row) => messages.push(draw_row(tape, private_stream(speaker), &row)),
            None if p.halting() => {
                halted = true;
                messages.push(p.halt_symbol(t));
            }
            None => return Err(Error::UndefinedRow { round: t }),
        }
    }
    Ok(Transcript { coin, messages })
}

/// A run of a keyed protocol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KeyedRun {
    pub transcript: Transcript,
    pub key_a: usize,
    pub key_b: usize,
}

pub fn run_keyed<W: Weight>(kp: &KeyedProtocol<W>, x: usize, y: usize, tape: &mut dyn Tape) -> Result<KeyedRun> {
    let transcript = run_protocol(&kp.protocol, x, y, tape)?;
    let mut key = |party: Party, input: usize| -> Result<usize> {
        let row = kp
            .key_row(party, &transcript.messages, input, transcript.coin)?
            .ok_or_else(|| Error::Precondition(format!("{party:?}'s key map is undefined on this run")))?;
        Ok(draw_row(tape, private_stream(party), &row))
    };
    let key_a = key(Party::Alice, x)?;
    let key_b = key(Party::Bob, y)?;
    Ok(KeyedRun {
        transcript,
        key_a,
        key_b,
    })
}
