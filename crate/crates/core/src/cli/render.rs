//! Serialized sample artifacts. Pointer labels are 1-based here and 0-based
//! everywhere in memory.

use crate::error::Result;
use crate::perm::Perm;
use crate::sources::{Sample, SourceHandle};
use serde_json::{json, Value};

pub const SAMPLES_SCHEMA: &str = "# schema: crglab-samples/1";

fn labels(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn perms(ps: &[Perm]) -> Vec<Vec<usize>> {
    ps.iter().map(Perm::one_based).collect()
}

/// A sample as JSON with 1-based pointer labels.
pub fn sample_value(s: &Sample) -> Value {
    match s {
        Sample::Pcs(p) => {
            let trace = p.trace();
            json!({
                "kind": "pcs",
                "n": p.n,
                "ell": p.ell,
                "i0": p.i0 + 1,
                "perms": perms(&p.perms),
                "a": p.a,
                "b": p.b,
                "forward": labels(&trace.forward),
                "reverse": labels(&trace.reverse),
                "endpoint": p.endpoint() + 1,
            })
        }
        Sample::Pv(p) => json!({
            "kind": "pv",
            "n": p.n,
            "i0": p.i0 + 1,
            "j0": p.j0 + 1,
            "perms": perms(&p.perms),
            "yes": p.is_yes(),
        }),
        Sample::Disj { u, v } => json!({ "kind": "disj", "u": labels(u), "v": labels(v) }),
        Sample::Atoms { x, y } => json!({ "kind": "atoms", "x": x, "y": y }),
    }
}

fn kind(s: &Sample) -> &'static str {
    match s {
        Sample::Pcs(_) => "pcs",
        Sample::Pv(_) => "pv",
        Sample::Disj { .. } => "disj",
        Sample::Atoms { .. } => "atoms",
    }
}

fn quoted(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

/// `index,kind,x,y,sample`. `x` and `y` are the encoded atom indices, blank
/// when the source has no finite encoding at this size.
pub fn samples_csv(source: &SourceHandle, samples: &[Sample]) -> String {
    let mut out = format!("{SAMPLES_SCHEMA}\nindex,kind,x,y,sample\n");
    for (i, s) in samples.iter().enumerate() {
        let (x, y) = match source.encode(s) {
            Ok((x, y)) => (x.to_string(), y.to_string()),
            Err(_) => (String::new(), String::new()),
        };
        out += &format!("{i},{},{x},{y},{}\n", kind(s), quoted(&sample_value(s).to_string()));
    }
    out
}

/// `{"schema": .., "source": .., "samples": [..]}`.
pub fn samples_json(source: &SourceHandle, samples: &[Sample]) -> Result<String> {
    let doc = json!({
        "schema": "crglab-samples/1",
        "source": source.kind_name(),
        "samples": samples.iter().map(sample_value).collect::<Vec<_>>(),
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{PcsParams, SourceHandle};

    #[test]
    fn labels_are_one_based() {
        let src = SourceHandle::pcs(PcsParams::new(1, 3, 2).unwrap());
        let s = src.sample(7, 0);
        let v = sample_value(&s);
        let Sample::Pcs(p) = &s else { panic!() };
        assert_eq!(v["i0"], p.i0 + 1);
        assert_eq!(v["endpoint"], p.endpoint() + 1);
        assert!(v["perms"][0].as_array().unwrap().iter().all(|x| (1..=3).contains(&x.as_u64().unwrap())));
    }

    #[test]
    fn csv_escapes_the_json_column() {
        let src = SourceHandle::perfect_bit();
        let csv = samples_csv(&src, &[src.sample(1, 0)]);
        let row = csv.lines().nth(2).unwrap();
        assert!(row.starts_with("0,atoms,"));
        assert!(row.contains("\"{\"\"kind\"\":\"\"atoms\"\""));
    }
}
