//! The pointer-chasing key agreement protocol.

use crate::error::Result;
use crate::prob::{OutcomeSpace, Weight};
use crate::protocol::{Flavor, Kernel, KeyedProtocol, ProtocolTree};
use crate::sources::{PcsCodec, PcsParams};
use std::sync::Arc;

/// Deterministic protocol that chases the pointers and outputs the strings
/// at the endpoint.
///
/// Round 1 is a dummy symbol from Alice over an `n`-symbol alphabet. Round
/// `t ≥ 2` carries `i_{t-2}`, so the last round carries `i_r` and both keys
/// are read at that index: Alice outputs `A_{i_r}`, Bob `B_{i_r}`.
pub fn pointer_chase_protocol<W: Weight>(p: PcsParams) -> Result<KeyedProtocol<W>> {
    let codec = Arc::new(PcsCodec::new(p)?);
    let protocol = chase_rounds(p, codec.clone(), false)?;
    let last = p.r + 1;
    let (ca, cb) = (codec.clone(), codec);
    let alice = Kernel::deterministic(move |h: &[usize], x, _| ca.decode_alice(x).strings[h[last]] as usize);
    let bob = Kernel::deterministic(move |h: &[usize], y, _| cb.decode_bob(y).strings[h[last]] as usize);
    KeyedProtocol::new(protocol, OutcomeSpace::bits(p.ell), alice, bob)
}

/// The chase with the last speaker also announcing its string at the
/// endpoint. The listener already holds the same string, so the announcement
/// adds nothing to the internal cost while it removes all remaining
/// correlation: the external cost exceeds the internal one by `I(X;Y) = ℓ`.
pub fn pointer_chase_reveal<W: Weight>(p: PcsParams) -> Result<ProtocolTree<W>> {
    chase_rounds(p, Arc::new(PcsCodec::new(p)?), true)
}

fn chase_rounds<W: Weight>(p: PcsParams, codec: Arc<PcsCodec>, reveal: bool) -> Result<ProtocolTree<W>> {
    let n = p.n;
    let ptr = OutcomeSpace::indexed("ptr", n);
    let strings = 1usize << p.ell;
    let mut b = ProtocolTree::<W>::builder(codec.alice_space(), codec.bob_space()).flavor(Flavor::Deterministic);
    b = b.round(ptr.clone(), Kernel::deterministic(|_, _, _| 0));
    let c = codec.clone();
    b = b.round(ptr.clone(), Kernel::deterministic(move |_, y, _| c.decode_bob(y).i0));
    for t in 2..p.r + 2 {
        // Round t (0-based) applies step t-1 to the pointer sent in round t-1.
        let step = t - 1;
        let c = codec.clone();
        let last = reveal && t == p.r + 1;
        // On the revealing round the symbol is `i_r · 2^ℓ + string`.
        let pack = move |i: usize, s: &[u64]| if last { i * strings + s[i] as usize } else { i };
        let kernel = if step % 2 == 1 {
            Kernel::deterministic(move |h: &[usize], x, _| {
                let v = c.decode_alice(x);
                pack(v.perms[(step - 1) / 2].apply(h[t - 1]), &v.strings)
            })
        } else {
            Kernel::deterministic(move |h: &[usize], y, _| {
                let v = c.decode_bob(y);
                pack(v.perms[step / 2 - 1].apply(h[t - 1]), &v.strings)
            })
        };
        let alphabet = if last { OutcomeSpace::range(n * strings) } else { ptr.clone() };
        b = b.round(alphabet, kernel);
    }
    b.build()
}
