//! End-to-end runs of the `crglab` binary.

use std::process::{Command, Output};

fn crglab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_crglab"));
    c.args(args).env_remove("CRGLAB_SEED").env_remove("CRGLAB_NUMERIC_MODE");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn randomized_commands_need_a_seed() {
    for args in [
        &["sample", "--source", "pcs:r=1,n=2,ell=1"][..],
        &["verify", "--suite", "lemmas", "--check", "prob.pinsker"],
        &["advantage", "--detector", "pv", "--n", "3", "--trials", "100"],
    ] {
        let o = crglab(args, &[]);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(err["error"], "precondition");
    }
}

#[test]
fn seed_precedence_is_flag_then_env() {
    let args = ["sample", "--source", "pv:r=3,n=5,ans=no", "--count", "4"];
    let from_env = crglab(&args, &[("CRGLAB_SEED", "9")]);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "9"]);
    let from_flag = crglab(&with_flag, &[("CRGLAB_SEED", "1")]);
    let other = crglab(&args, &[("CRGLAB_SEED", "1")]);
    assert!(from_env.status.success());
    assert_eq!(stdout(&from_env), stdout(&from_flag));
    assert_ne!(stdout(&from_env), stdout(&other));
}

#[test]
fn output_is_byte_deterministic() {
    let runs = [
        vec!["sample", "--source", "pcs:r=2,n=4,ell=3", "--count", "20", "--seed", "3"],
        vec!["analyze", "--source", "pcs:r=1,n=2,ell=1", "--protocol", "chase"],
        vec!["rate-region", "--source", "bss:p=1/4", "--grid", "0:0.5:1.5"],
        vec!["verify", "--suite", "lemmas", "--trials", "30", "--seed", "5"],
    ];
    for args in runs {
        let (a, b) = (crglab(&args, &[]), crglab(&args, &[]));
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn csv_outputs_start_with_a_schema_line() {
    let cases = [
        (vec!["sample", "--source", "disj:n=8", "--count", "2", "--seed", "1"], "samples", "index,kind,x,y,sample"),
        (vec!["advantage", "--detector", "pv", "--n", "4", "--exact"], "advantage", "detector,mode,trials,advantage,half_width,exact"),
        (vec!["rate-region", "--source", "perfect-bit", "--grid", "0:0.5:1"], "curve", "C_bits,L_bits,witness_id"),
        (vec!["verify", "--suite", "reductions", "--check", "sources.pointer_identity", "--seed", "1"], "verify", "check_id,trials,violations,max_slack"),
    ];
    for (args, kind, header) in cases {
        let o = crglab(&args, &[]);
        let text = stdout(&o);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(format!("# schema: crglab-{kind}/1").as_str()), "{args:?}");
        assert_eq!(lines.next(), Some(header));
    }
}

#[test]
fn pv_exact_advantage_golden() {
    let o = crglab(&["advantage", "--detector", "pv", "--n", "4", "--r", "3", "--exact"], &[]);
    assert_eq!(
        stdout(&o),
        "# schema: crglab-advantage/1\ndetector,mode,trials,advantage,half_width,exact\npv,exact,0,0.75,0,3/4\n"
    );
}

#[test]
fn perfect_bit_curve_golden() {
    let o = crglab(&["rate-region", "--source", "perfect-bit", "--grid", "0:0.5:1"], &[]);
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(2).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][..2], ["0", "1"]);
    assert_eq!(rows[2][..2], ["1", "2"]);
}

#[test]
fn numeric_mode_from_env_and_flag() {
    let args = ["analyze", "--source", "pcs:r=1,n=2,ell=1", "--protocol", "chase"];
    let exact: serde_json::Value = serde_json::from_str(&stdout(&crglab(&args, &[("CRGLAB_NUMERIC_MODE", "exact")]))).unwrap();
    assert_eq!(exact["numeric_mode"], "exact");
    let mut flagged = args.to_vec();
    flagged.extend(["--numeric-mode", "float"]);
    let float: serde_json::Value = serde_json::from_str(&stdout(&crglab(&flagged, &[("CRGLAB_NUMERIC_MODE", "exact")]))).unwrap();
    assert_eq!(float["numeric_mode"], "float");
    assert_eq!(exact["agreement"], 1.0);
    let bad = crglab(&args, &[("CRGLAB_NUMERIC_MODE", "decimal")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn caps_are_reported() {
    let o = crglab(&["analyze", "--source", "pcs:r=2,n=5,ell=4", "--protocol", "chase", "--atom-cap", "1000"], &[]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "cap_exceeded");
}

#[test]
fn out_flag_and_witness_artifacts() {
    let dir = std::env::temp_dir().join(format!("crglab-cli-{}", std::process::id()));
    let csv = dir.join("curve.csv");
    let witnesses = dir.join("w");
    let summary = dir.join("summary.json");
    let o = crglab(
        &[
            "rate-region", "--source", "perfect-bit", "--grid", "0:0.5:1",
            "--out", csv.to_str().unwrap(),
            "--witness-dir", witnesses.to_str().unwrap(),
            "--summary", summary.to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    for line in text.lines().skip(2) {
        let id = line.rsplit(',').next().unwrap().replace(':', "_");
        let doc = std::fs::read_to_string(witnesses.join(format!("{id}.json"))).unwrap();
        crglab::protocol::protocol_from_json::<f64>(&doc).unwrap();
    }
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["gamma"], "infinite");
    assert_eq!(s["mimk"]["value"], 0.0);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_reports_violations_in_the_exit_status() {
    let o = crglab(&["verify", "--suite", "lemmas", "--check", "prob.tv_metric", "--trials", "50", "--seed", "2"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("prob.tv_metric,50,0,"));
    let o = crglab(&["verify", "--suite", "lemmas", "--check", "no.such.check", "--seed", "2"], &[]);
    assert_eq!(o.status.code(), Some(2));
}
