//! Source specification strings, e.g. `pcs:r=1,n=2,ell=1` or `bss:p=0.11`.
//!
//! Grammar: `kind[:key=value(,key=value)*]`. Kinds and keys:
//!
//! | kind          | keys                                   |
//! |---------------|----------------------------------------|
//! | `pcs`         | `r`, `n`, `ell`                        |
//! | `pcs-hat`     | `r`, `n`, `ell`, `size` (default ⌊√n⌋) |
//! | `pcs-mid`     | `r`, `n`, `ell`, `size` (default ⌊√n⌋) |
//! | `pcs-product` | `r`, `n`, `ell`                        |
//! | `disj`        | `n`, `k` (default ⌊n/4⌋), `int` (default 0) |
//! | `pv`          | `r` (odd), `n`, `ans` (`yes`/`no`)     |
//! | `bss`         | `p` (decimal or `a/b`)                 |
//! | `perfect-bit` | none                                   |
//! | `explicit`    | `file` (JSON joint table)              |

use super::{Answer, DisjParams, PcsParams, PlantedParams, PvParams, SourceHandle};
use crate::error::{Error, Result};
use crate::prob::{parse_rational, JointDist, OutcomeSpace, Rational};
use std::collections::BTreeMap;

struct Fields<'a> {
    values: BTreeMap<&'a str, (usize, &'a str)>,
    end: usize,
}

impl<'a> Fields<'a> {
    fn take_usize(&mut self, key: &str, default: Option<usize>) -> Result<usize> {
        match self.values.remove(key) {
            Some((pos, v)) => v.parse().map_err(|_| Error::Parse {
                pos,
                msg: format!("`{key}` expects a non-negative integer, got `{v}`"),
            }),
            None => default.ok_or_else(|| Error::Parse {
                pos: self.end,
                msg: format!("missing key `{key}`"),
            }),
        }
    }

    fn take_str(&mut self, key: &str) -> Result<(usize, &'a str)> {
        self.values.remove(key).ok_or_else(|| Error::Parse {
            pos: self.end,
            msg: format!("missing key `{key}`"),
        })
    }

    fn finish(self) -> Result<()> {
        if let Some((k, (pos, _))) = self.values.into_iter().next() {
            return Err(Error::Parse {
                pos,
                msg: format!("unknown key `{k}`"),
            });
        }
        Ok(())
    }
}

fn split(spec: &str) -> Result<(&str, Fields<'_>)> {
    let (kind, rest, offset) = match spec.split_once(':') {
        Some((k, r)) => (k, r, k.len() + 1),
        None => (spec, "", spec.len()),
    };
    let mut values = BTreeMap::new();
    let mut pos = offset;
    if !rest.is_empty() {
        for part in rest.split(',') {
            let Some((k, v)) = part.split_once('=') else {
                return Err(Error::Parse {
                    pos,
                    msg: format!("expected key=value, got `{part}`"),
                });
            };
            if values.insert(k.trim(), (pos + k.len() + 1, v.trim())).is_some() {
                return Err(Error::Parse {
                    pos,
                    msg: format!("duplicate key `{k}`"),
                });
            }
            pos += part.len() + 1;
        }
    }
    Ok((
        kind.trim(),
        Fields {
            values,
            end: spec.len(),
        },
    ))
}

fn pcs_params(f: &mut Fields) -> Result<PcsParams> {
    let r = f.take_usize("r", None)?;
    let n = f.take_usize("n", None)?;
    let ell = f.take_usize("ell", None)?;
    PcsParams::new(r, n, ell as u32)
}

pub fn parse_source_spec(spec: &str) -> Result<SourceHandle> {
    let (kind, mut f) = split(spec)?;
    let handle = match kind {
        "pcs" => SourceHandle::pcs(pcs_params(&mut f)?),
        "pcs-hat" | "pcs-mid" => {
            let base = pcs_params(&mut f)?;
            let size = f.take_usize("size", Some(PlantedParams::default_size(base.n)))?;
            SourceHandle::planted(PlantedParams::new(base, size, kind == "pcs-hat")?)
        }
        "pcs-product" => SourceHandle::pcs(pcs_params(&mut f)?).product_of_marginals(),
        "disj" => {
            let n = f.take_usize("n", None)?;
            let k = f.take_usize("k", Some(n / 4))?;
            let int = f.take_usize("int", Some(0))?;
            SourceHandle::disj(DisjParams::new(n, k, int)?)
        }
        "pv" => {
            let r = f.take_usize("r", None)?;
            let n = f.take_usize("n", None)?;
            let (pos, ans) = f.take_str("ans")?;
            let answer = match ans {
                "yes" => Answer::Yes,
                "no" => Answer::No,
                other => {
                    return Err(Error::Parse {
                        pos,
                        msg: format!("`ans` must be yes or no, got `{other}`"),
                    })
                }
            };
            SourceHandle::pv(PvParams::new(r, n, answer)?)
        }
        "bss" => {
            let (pos, p) = f.take_str("p")?;
            let p = parse_rational(p).ok_or_else(|| Error::Parse {
                pos,
                msg: format!("`p` expects a decimal or fraction, got `{p}`"),
            })?;
            SourceHandle::bss(p)?
        }
        "perfect-bit" => SourceHandle::perfect_bit(),
        "explicit" => {
            let (_, path) = f.take_str("file")?;
            let text = std::fs::read_to_string(path)?;
            SourceHandle::explicit(parse_joint_json(&text)?)?
        }
        other => {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("unknown source kind `{other}`"),
            })
        }
    };
    f.finish()?;
    Ok(handle)
}

/// Joint table JSON: `{"x": [labels], "y": [labels], "mass": [[p(x,y) ...] ...]}`
/// with entries given as fraction or decimal strings, or JSON numbers.
pub fn parse_joint_json(text: &str) -> Result<JointDist<Rational>> {
    #[derive(serde::Deserialize)]
    struct Table {
        x: Vec<String>,
        y: Vec<String>,
        mass: Vec<Vec<serde_json::Value>>,
    }
    let t: Table = serde_json::from_str(text)?;
    let xs = OutcomeSpace::labeled(t.x)?;
    let ys = OutcomeSpace::labeled(t.y)?;
    if t.mass.len() != xs.len() || t.mass.iter().any(|row| row.len() != ys.len()) {
        return Err(Error::Artifact("mass table shape does not match the label lists".into()));
    }
    let mut mass = Vec::with_capacity(xs.len() * ys.len());
    for row in &t.mass {
        for v in row {
            let r = match v {
                serde_json::Value::String(s) => parse_rational(s),
                serde_json::Value::Number(n) => parse_rational(&n.to_string()),
                _ => None,
            }
            .ok_or_else(|| Error::Artifact(format!("bad mass entry {v}")))?;
            mass.push(r);
        }
    }
    JointDist::new(vec![xs, ys], mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        assert_eq!(parse_source_spec("pcs:r=1,n=2,ell=1").unwrap().kind_name(), "pcs");
        assert_eq!(parse_source_spec("bss:p=0.11").unwrap().kind_name(), "bss");
        assert_eq!(parse_source_spec("disj:n=16,k=4").unwrap().kind_name(), "disj");
        assert_eq!(parse_source_spec("pv:r=3,n=8,ans=yes").unwrap().kind_name(), "pv");
        assert_eq!(parse_source_spec("perfect-bit").unwrap().kind_name(), "perfect-bit");
        assert_eq!(parse_source_spec("pcs-product:r=1,n=2,ell=1").unwrap().kind_name(), "product");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_source_spec("pcs:r=1,n=x,ell=1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 10),
            other => panic!("{other:?}"),
        }
        match parse_source_spec("pcs:r=1,n=2,ell=1,q=3") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 20),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_source_spec("nope"), Err(Error::Parse { pos: 0, .. })));
        assert!(parse_source_spec("pv:r=2,n=4,ans=yes").is_err());
    }

    #[test]
    fn joint_json_round_trip() {
        let j = parse_joint_json(r#"{"x":["a","b"],"y":["0","1"],"mass":[["1/4","1/4"],[0.5,0]]}"#).unwrap();
        assert_eq!(j.masses()[2], Rational::new(1.into(), 2.into()));
    }
}
