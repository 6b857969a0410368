//! Achieved envelopes, rate curves, and the quantities read off them.

use crate::error::{Error, Result};
use crate::protocol::{mix_protocols, protocol_to_json, ProtocolTree};
use serde::Serialize;
use std::collections::BTreeMap;

/// Tolerance when matching a budget against a witness's internal cost.
const C_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// Supremum of achieved external cost under the budget.
    Envelope,
    /// `C + I(X;Y)`, past a protocol that exhausts the correlation.
    Cap,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatePoint {
    pub c_bits: f64,
    pub l_bits: f64,
    pub witness_id: String,
    pub branch: Branch,
    /// Costs of the witness protocol itself.
    pub witness_ic_int: f64,
    pub witness_ic_ext: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeVertex {
    pub c_bits: f64,
    pub l_bits: f64,
    pub witness_id: String,
}

/// Index-based envelope of a cost cloud.
pub(crate) struct Envelope {
    vertices: Vec<(f64, f64, usize)>,
    exhausting: Option<(f64, f64, usize)>,
    source_mi: f64,
}

impl Envelope {
    /// Upper concave nondecreasing hull of `(ic_int, ic_ext)` points, plus
    /// the cheapest point whose external cost exceeds its internal cost by
    /// `I(X;Y)`. Ties go to the lowest index.
    pub(crate) fn from_points(costs: &[(f64, f64)], source_mi: f64) -> Self {
        let mut order: Vec<usize> = (0..costs.len()).collect();
        order.sort_by(|&a, &b| {
            costs[a].0.total_cmp(&costs[b].0).then(costs[b].1.total_cmp(&costs[a].1)).then(a.cmp(&b))
        });
        let mut front: Vec<(f64, f64, usize)> = Vec::new();
        for i in order {
            let (c, l) = costs[i];
            if front.last().is_none_or(|&(_, best, _)| l > best + 1e-15) {
                front.push((c, l, i));
            }
        }
        let mut hull: Vec<(f64, f64, usize)> = Vec::new();
        for p in front {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                // Drop b when it lies on or below the chord from a to p.
                if (b.1 - a.1) * (p.0 - a.0) <= (p.1 - a.1) * (b.0 - a.0) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let exhausting = costs
            .iter()
            .enumerate()
            .filter(|(_, &(c, l))| l - c >= source_mi - C_TOL)
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
            .map(|(i, &(c, l))| (c, l, i));
        Self {
            vertices: hull,
            exhausting,
            source_mi,
        }
    }

    pub(crate) fn used_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.vertices.iter().map(|v| v.2).chain(self.exhausting.map(|e| e.2)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Achieved lower bounds on the rate function over a grid of budgets.
#[derive(Clone, Debug, Serialize)]
pub struct RateCurve {
    pub source: String,
    pub rounds: usize,
    /// Mesh denominator; 0 for curves spanned by explicit witnesses.
    pub granularity: u32,
    pub alphabet_caps: Vec<usize>,
    /// Whether the search class is narrower than the support-lemma class.
    pub heuristic: bool,
    pub source_mi: f64,
    pub evaluated: u64,
    pub grid: Vec<RatePoint>,
    pub envelope: Vec<EnvelopeVertex>,
    /// Cheapest witness with `ic_ext ≥ ic_int + I(X;Y)`.
    pub exhausting: Option<EnvelopeVertex>,
    #[serde(skip)]
    witnesses: BTreeMap<String, ProtocolTree<f64>>,
}

impl RateCurve {
    pub(crate) fn assemble(
        env: Envelope,
        c_grid: &[f64],
        protocols: BTreeMap<String, ProtocolTree<f64>>,
        prefix: &str,
    ) -> Result<Self> {
        if c_grid.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidParams("budgets must be finite and non-negative".into()));
        }
        let id = |i: usize| format!("{prefix}{i}");
        let vertex = |&(c, l, i): &(f64, f64, usize)| EnvelopeVertex {
            c_bits: c,
            l_bits: l,
            witness_id: id(i),
        };
        let mut curve = RateCurve {
            source: "explicit".into(),
            rounds: 0,
            granularity: 0,
            alphabet_caps: Vec::new(),
            heuristic: false,
            source_mi: env.source_mi,
            evaluated: 0,
            grid: Vec::new(),
            envelope: env.vertices.iter().map(vertex).collect(),
            exhausting: env.exhausting.as_ref().map(vertex),
            witnesses: protocols,
        };
        let mut grid = c_grid.to_vec();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        curve.grid = grid
            .into_iter()
            .map(|c| curve.point_at(c).ok_or_else(|| Error::NotFound(format!("no witness within budget {c}"))))
            .collect::<Result<_>>()?;
        Ok(curve)
    }

    /// Curve value at budget `c`, or `None` below every witness.
    pub fn point_at(&self, c: f64) -> Option<RatePoint> {
        if let Some(e) = &self.exhausting {
            if c > e.c_bits + C_TOL {
                return Some(RatePoint {
                    c_bits: c,
                    l_bits: c + self.source_mi,
                    witness_id: e.witness_id.clone(),
                    branch: Branch::Cap,
                    witness_ic_int: e.c_bits,
                    witness_ic_ext: e.l_bits,
                });
            }
        }
        let k = self.envelope.iter().rposition(|v| v.c_bits <= c + C_TOL)?;
        let v = &self.envelope[k];
        let single = |v: &EnvelopeVertex| RatePoint {
            c_bits: c,
            l_bits: v.l_bits,
            witness_id: v.witness_id.clone(),
            branch: Branch::Envelope,
            witness_ic_int: v.c_bits,
            witness_ic_ext: v.l_bits,
        };
        if k + 1 == self.envelope.len() || (c - v.c_bits).abs() <= C_TOL {
            return Some(single(v));
        }
        let w = &self.envelope[k + 1];
        let delta = (w.c_bits - c) / (w.c_bits - v.c_bits);
        let l = delta * v.l_bits + (1.0 - delta) * w.l_bits;
        Some(RatePoint {
            c_bits: c,
            l_bits: l,
            witness_id: format!("mix:{}:{}:{delta}", v.witness_id, w.witness_id),
            branch: Branch::Envelope,
            witness_ic_int: c,
            witness_ic_ext: l,
        })
    }

    pub fn value_at(&self, c: f64) -> Option<f64> {
        self.point_at(c).map(|p| p.l_bits)
    }

    /// The protocol behind a witness id; mixtures are rebuilt on demand.
    pub fn witness(&self, id: &str) -> Result<ProtocolTree<f64>> {
        if let Some(rest) = id.strip_prefix("mix:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let bad = || Error::InvalidParams(format!("malformed mixture id `{id}`"));
            let [a, b, d] = parts[..] else { return Err(bad()) };
            let delta: f64 = d.parse().map_err(|_| bad())?;
            return mix_protocols(&self.witness(a)?, &self.witness(b)?, delta);
        }
        self.witnesses
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("witness `{id}`")))
    }

    /// CSV with a schema line, then `C_bits,L_bits,witness_id`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema: crglab-curve/1\nC_bits,L_bits,witness_id\n");
        for p in &self.grid {
            out.push_str(&format!("{},{},{}\n", p.c_bits, p.l_bits, p.witness_id));
        }
        out
    }

    /// Protocol JSON of every witness named on the grid, keyed by id.
    pub fn witness_json(&self) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        for p in &self.grid {
            if !out.contains_key(&p.witness_id) {
                out.insert(p.witness_id.clone(), protocol_to_json(&self.witness(&p.witness_id)?)?);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MimkEstimate {
    /// Smallest grid budget with an exhausting witness.
    pub value: f64,
    pub witness_id: String,
    pub witness_ic_int: f64,
    pub witness_ic_ext: f64,
    /// `max(0, value + I(X;Y) − ic_ext)` of the witness.
    pub slack: f64,
}

/// Smallest grid budget whose witness satisfies `ic_ext ≥ ic_int + i_xy`
/// (up to `1e-9`). The witness's internal cost bounds the true value from
/// above; `slack` is how far the witness falls short of `value + i_xy`.
pub fn mimk_estimate(curve: &RateCurve, i_xy: f64) -> Result<MimkEstimate> {
    curve
        .grid
        .iter()
        .find(|p| p.witness_ic_int <= p.c_bits + C_TOL && p.witness_ic_ext >= p.witness_ic_int + i_xy - C_TOL)
        .map(|p| MimkEstimate {
            value: p.c_bits,
            witness_id: p.witness_id.clone(),
            witness_ic_int: p.witness_ic_int,
            witness_ic_ext: p.witness_ic_ext,
            slack: (p.c_bits + i_xy - p.witness_ic_ext).max(0.0),
        })
        .ok_or_else(|| Error::NotFound("no grid witness attains ic_ext = ic_int + I(X;Y)".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gamma {
    Finite(f64),
    /// Some zero-budget point already has positive rate.
    Infinite,
}

impl Gamma {
    /// Secret-key bits per interaction bit, `Γ − 1` when finite.
    pub fn key_bits(self) -> Gamma {
        match self {
            Gamma::Finite(g) => Gamma::Finite((g - 1.0).max(0.0)),
            Gamma::Infinite => Gamma::Infinite,
        }
    }
}

/// Largest `L/C` over grid points with `C > 0`.
pub fn gamma_cbib(curve: &RateCurve) -> Gamma {
    if curve.grid.iter().any(|p| p.c_bits <= 1e-12 && p.l_bits > 1e-12) {
        return Gamma::Infinite;
    }
    Gamma::Finite(
        curve
            .grid
            .iter()
            .filter(|p| p.c_bits > 1e-12)
            .map(|p| p.l_bits / p.c_bits)
            .fold(0.0, f64::max),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct ShapeReport {
    pub points: usize,
    pub monotone: bool,
    pub concave: bool,
    /// Secants below the correlation-exhausting budget have slope `≥ 1`.
    pub slope: bool,
    /// `L ≤ C + I(X;Y)` everywhere.
    pub cap: bool,
    pub violations: Vec<String>,
}

impl ShapeReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.concave && self.slope && self.cap
    }
}

/// Checks monotonicity, chord concavity on consecutive triples, secant
/// slope at least `1 − tol` up to the MIMK estimate, and the cap.
pub fn certify_shape(curve: &RateCurve, tol: f64) -> Result<ShapeReport> {
    let g = &curve.grid;
    if g.len() < 3 {
        return Err(Error::InvalidParams("shape certification needs at least 3 grid points".into()));
    }
    let mut v = Vec::new();
    for w in g.windows(2) {
        if w[1].l_bits < w[0].l_bits - tol {
            v.push(format!("decrease at C={}", w[1].c_bits));
        }
    }
    let monotone = v.is_empty();
    let before = v.len();
    for w in g.windows(3) {
        let chord = w[0].l_bits + (w[2].l_bits - w[0].l_bits) * (w[1].c_bits - w[0].c_bits) / (w[2].c_bits - w[0].c_bits);
        if w[1].l_bits < chord - tol {
            v.push(format!("convex kink at C={}", w[1].c_bits));
        }
    }
    let concave = v.len() == before;
    let limit = mimk_estimate(curve, curve.source_mi).map(|m| m.value).unwrap_or(f64::INFINITY);
    let before = v.len();
    for w in g.windows(2) {
        if w[1].c_bits <= limit + C_TOL {
            let s = (w[1].l_bits - w[0].l_bits) / (w[1].c_bits - w[0].c_bits);
            if s < 1.0 - tol {
                v.push(format!("secant slope {s} on [{}, {}]", w[0].c_bits, w[1].c_bits));
            }
        }
    }
    let slope = v.len() == before;
    let before = v.len();
    for p in g {
        if p.l_bits > p.c_bits + curve.source_mi + tol {
            v.push(format!("above C + I(X;Y) at C={}", p.c_bits));
        }
    }
    let cap = v.len() == before;
    Ok(ShapeReport {
        points: g.len(),
        monotone,
        concave,
        slope,
        cap,
        violations: v,
    })
}
