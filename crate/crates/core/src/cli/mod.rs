//! The `crglab` command line.
//!
//! Settings resolve as flags, then `CRGLAB_SEED` / `CRGLAB_NUMERIC_MODE`,
//! then defaults. Commands that draw randomness refuse to run without a
//! seed. Every CSV starts with a `# schema: crglab-<kind>/<version>` line,
//! and identical invocations produce identical bytes.
//!
//! Exit status: 0 success, 1 verification violations, 2 usage or parse
//! errors, 3 cap or budget errors, 4 anything else. Errors are reported on
//! stderr as one JSON object.

mod render;

use crate::distinguish::{exhaustive_advantage, measure_advantage, AdvantageReport, Budget};
use crate::error::{Error, Result};
use crate::prob::{Rational, Weight};
use crate::protocol::{
    crg_report, info_costs, keyed_from_json, prefix_residuals, protocol_from_json, protocol_to_json, CrgReport,
    IcReport, Kernel, KeyedProtocol, ProtocolTree,
};
use crate::rate::{approx_tilfc_joint, budget_grid, certify_shape, gamma_cbib, mimk_estimate, MeshOptions};
use crate::reference::{pointer_chase_protocol, pointer_chase_reveal, pv_bidirectional_protocol, pv_exact_advantage};
use crate::sources::{parse_source_spec, Answer, PcsParams, PvParams, SourceHandle, SourceKind};
use crate::verify::{results_csv, run_selected, run_suite, Suite};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use render::{samples_csv, samples_json, SAMPLES_SCHEMA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    /// Rational arithmetic.
    Exact,
    /// IEEE doubles.
    Float,
}

#[derive(Debug, Parser)]
#[command(name = "crglab", version, about = "Common randomness generation laboratory")]
pub struct Cli {
    /// Seed for every random draw; required by randomized commands.
    #[arg(long, global = true, env = "CRGLAB_SEED")]
    pub seed: Option<u64>,
    /// Arithmetic for exact analyses.
    #[arg(long, global = true, env = "CRGLAB_NUMERIC_MODE", value_enum, default_value = "float")]
    pub numeric_mode: NumericMode,
    /// Cap on enumerated source atoms.
    #[arg(long, global = true, default_value_t = crate::ATOM_CAP)]
    pub atom_cap: usize,
    /// Cap on enumerated protocol states.
    #[arg(long, global = true, default_value_t = crate::STATE_CAP)]
    pub state_cap: usize,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples from a source.
    Sample(SampleArgs),
    /// Information costs and key quality of a protocol on a source.
    Analyze(AnalyzeArgs),
    /// Distinguishing advantage between two sources.
    Advantage(AdvantageArgs),
    /// Approximate rate curve of a source.
    RateRegion(RateArgs),
    /// Run the property battery.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Source spec, e.g. `pcs:r=1,n=2,ell=1`.
    #[arg(long)]
    pub source: String,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: SampleFormat,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub source: String,
    /// `chase`, `chase-reveal`, `reveal`, `pv`, or a protocol JSON file.
    #[arg(long)]
    pub protocol: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Detector {
    /// The pointer-verification protocol on yes versus no instances.
    Pv,
    /// A protocol JSON file between two sources; the verdict is the last message.
    Protocol,
    /// Best deterministic protocol within a round and bit budget.
    Exhaustive,
}

#[derive(Debug, Args)]
pub struct AdvantageArgs {
    #[arg(long, value_enum)]
    pub detector: Detector,
    /// Universe size for `pv`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of permutations for `pv` (odd).
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Exact transcript laws instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// Sampled runs per source.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long)]
    pub protocol: Option<PathBuf>,
    #[arg(long)]
    pub source_a: Option<String>,
    #[arg(long)]
    pub source_b: Option<String>,
    /// Round budget for `exhaustive`.
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    /// Bit budget for `exhaustive`.
    #[arg(long, default_value_t = 1)]
    pub cc: u32,
    /// Node budget for `exhaustive`.
    #[arg(long, default_value_t = 50_000_000)]
    pub budget: u64,
    /// Write the optimal protocol of `exhaustive` as JSON here.
    #[arg(long)]
    pub witness_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long)]
    pub source: String,
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    /// Budget grid `start:step:stop` in bits.
    #[arg(long, default_value = "0:0.1:1.5")]
    pub grid: String,
    /// Mesh granularity of kernel rows.
    #[arg(long, default_value_t = 4)]
    pub mesh: u32,
    /// Alphabet size per round, comma separated; defaults to the support-lemma bound.
    #[arg(long, value_delimiter = ',')]
    pub caps: Option<Vec<usize>>,
    /// Cap on evaluated protocols.
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: u64,
    /// Write each witness protocol as JSON into this directory.
    #[arg(long)]
    pub witness_dir: Option<PathBuf>,
    /// Write MIMK, Γ and shape diagnostics as JSON here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Override the trial count of randomized checks.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Run only these checks.
    #[arg(long = "check")]
    pub checks: Vec<String>,
}

/// Result of one command: the bytes to emit and the exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub status: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, status: 0 }
    }
}

fn need_seed(cli: &Cli, what: &str) -> Result<u64> {
    cli.seed.ok_or_else(|| {
        Error::Precondition(format!("{what} draws randomness; pass --seed or set CRGLAB_SEED"))
    })
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Sample(a) => sample(cli, a),
        Command::Analyze(a) => match cli.numeric_mode {
            NumericMode::Exact => analyze::<Rational>(cli, a),
            NumericMode::Float => analyze::<f64>(cli, a),
        },
        Command::Advantage(a) => advantage(cli, a),
        Command::RateRegion(a) => rate_region(cli, a),
        Command::Verify(a) => verify(cli, a),
    }
}

fn sample(cli: &Cli, a: &SampleArgs) -> Result<Outcome> {
    let seed = need_seed(cli, "sample")?;
    let source = parse_source_spec(&a.source)?;
    let samples: Vec<_> = (0..a.count).map(|c| source.sample(seed, c)).collect();
    Ok(Outcome::ok(match a.format {
        SampleFormat::Csv => samples_csv(&source, &samples),
        SampleFormat::Json => samples_json(&source, &samples)?,
    }))
}

/// The pointer-chasing parameters under a pcs-family source.
fn pcs_base(s: &SourceHandle) -> Option<PcsParams> {
    match s.kind() {
        SourceKind::Pcs(p) => Some(*p),
        SourceKind::PcsHat(p) | SourceKind::PcsMid(p) => Some(p.base),
        SourceKind::Product(inner) | SourceKind::Coins { inner, .. } => pcs_base(inner),
        _ => None,
    }
}

enum Analyzed<W> {
    Keyed(KeyedProtocol<W>),
    Plain(ProtocolTree<W>),
}

fn resolve_protocol<W: Weight>(name: &str, source: &SourceHandle) -> Result<Analyzed<W>> {
    let pcs = || {
        pcs_base(source).ok_or_else(|| Error::InvalidParams(format!("`{name}` needs a pointer-chasing source")))
    };
    Ok(match name {
        "chase" => Analyzed::Keyed(pointer_chase_protocol(pcs()?)?),
        "chase-reveal" => Analyzed::Plain(pointer_chase_reveal(pcs()?)?),
        "reveal" => {
            let (x, y) = source.spaces()?;
            let p = ProtocolTree::reveal_alice(x.clone(), y);
            let alice = Kernel::deterministic(|_, x, _| x);
            let bob = Kernel::deterministic(|h: &[usize], _, _| h[0]);
            Analyzed::Keyed(KeyedProtocol::new(p, x, alice, bob)?)
        }
        "pv" => match source.kind() {
            SourceKind::Pv(p) => Analyzed::Plain(pv_bidirectional_protocol(p.r, p.n)?),
            _ => return Err(Error::InvalidParams("`pv` needs a pointer-verification source".into())),
        },
        path => {
            let text = std::fs::read_to_string(path)?;
            match keyed_from_json::<W>(&text) {
                Ok(kp) => Analyzed::Keyed(kp),
                Err(Error::Artifact(_)) => Analyzed::Plain(protocol_from_json(&text)?),
                Err(e) => return Err(e),
            }
        }
    })
}

#[derive(Serialize)]
struct AnalyzeReport {
    schema: &'static str,
    source: String,
    protocol: String,
    numeric_mode: NumericMode,
    #[serde(flatten)]
    ic: IcReport,
    #[serde(flatten)]
    crg: Option<CrgReport>,
    /// `0 ≤ ic_int ≤ ic_ext ≤ cc_bits`.
    cost_chain_holds: bool,
    /// `I(X;Y|Π) = I(X;Y) + ic_int − ic_ext`.
    residual_identity_holds: bool,
    /// `I(X;Y|Π^t) ≤ I(X;Y)` for every prefix.
    prefix_monotone: bool,
}

fn analyze<W: Weight>(cli: &Cli, a: &AnalyzeArgs) -> Result<Outcome> {
    let source = parse_source_spec(&a.source)?;
    let joint = source.exact::<W>(cli.atom_cap)?;
    let resolved = resolve_protocol::<W>(&a.protocol, &source)?;
    let (p, crg) = match &resolved {
        Analyzed::Keyed(kp) => (&kp.protocol, Some(crg_report(kp, &joint, cli.state_cap)?)),
        Analyzed::Plain(p) => (p, None),
    };
    let ic = info_costs(p, &joint, cli.state_cap)?;
    let prefixes = prefix_residuals(p, &joint, cli.state_cap)?;
    let report = AnalyzeReport {
        schema: "crglab-analyze/1",
        source: a.source.clone(),
        protocol: a.protocol.clone(),
        numeric_mode: cli.numeric_mode,
        cost_chain_holds: ic.chain_holds(1e-9),
        residual_identity_holds: ic.residual_gap() <= 1e-9,
        prefix_monotone: prefixes.iter().all(|r| *r <= ic.source_mi + 1e-9),
        ic,
        crg,
    };
    Ok(Outcome::ok(serde_json::to_string_pretty(&report)? + "\n"))
}

pub const ADVANTAGE_SCHEMA: &str = "# schema: crglab-advantage/1";

fn advantage_csv(detector: &str, r: &AdvantageReport) -> String {
    let mode = if r.trials == 0 { "exact" } else { "monte-carlo" };
    let exact = r.exact.as_ref().map(|q| q.to_string()).unwrap_or_default();
    format!(
        "{ADVANTAGE_SCHEMA}\ndetector,mode,trials,advantage,half_width,exact\n{detector},{mode},{},{},{},{exact}\n",
        r.trials, r.advantage, r.half_width
    )
}

fn two_sources(a: &AdvantageArgs) -> Result<(SourceHandle, SourceHandle)> {
    fn get<'a>(s: &'a Option<String>, flag: &str) -> Result<&'a str> {
        s.as_deref().ok_or_else(|| Error::InvalidParams(format!("this detector needs --{flag}")))
    }
    Ok((parse_source_spec(get(&a.source_a, "source-a")?)?, parse_source_spec(get(&a.source_b, "source-b")?)?))
}

fn measured<W: Weight>(p: &ProtocolTree<W>, s1: &SourceHandle, s2: &SourceHandle, cli: &Cli, a: &AdvantageArgs) -> Result<AdvantageReport> {
    let budget = if a.exact {
        Budget::Exact { cap: cli.atom_cap }
    } else {
        Budget::MonteCarlo {
            trials: a.trials,
            seed: need_seed(cli, "Monte-Carlo advantage")?,
        }
    };
    measure_advantage(p, s1, s2, budget)
}

fn advantage(cli: &Cli, a: &AdvantageArgs) -> Result<Outcome> {
    let (name, report) = match a.detector {
        Detector::Pv => {
            let n = a.n.ok_or_else(|| Error::InvalidParams("`pv` needs --n".into()))?;
            let report = if a.exact {
                AdvantageReport::exact(pv_exact_advantage(a.r, n, cli.atom_cap)?)
            } else {
                let yes = SourceHandle::pv(PvParams::new(a.r, n, Answer::Yes)?);
                let no = SourceHandle::pv(PvParams::new(a.r, n, Answer::No)?);
                measured(&pv_bidirectional_protocol::<f64>(a.r, n)?, &yes, &no, cli, a)?
            };
            ("pv", report)
        }
        Detector::Protocol => {
            let path = a.protocol.as_ref().ok_or_else(|| Error::InvalidParams("`protocol` needs --protocol".into()))?;
            let text = std::fs::read_to_string(path)?;
            let (s1, s2) = two_sources(a)?;
            let report = match (cli.numeric_mode, a.exact) {
                (NumericMode::Exact, true) => measured(&protocol_from_json::<Rational>(&text)?, &s1, &s2, cli, a)?,
                _ => measured(&protocol_from_json::<f64>(&text)?, &s1, &s2, cli, a)?,
            };
            ("protocol", report)
        }
        Detector::Exhaustive => {
            let (s1, s2) = two_sources(a)?;
            let (j1, j2) = (s1.exact::<Rational>(cli.atom_cap)?, s2.exact::<Rational>(cli.atom_cap)?);
            let found = exhaustive_advantage(&j1, &j2, a.rounds, a.cc, a.budget)?;
            if let Some(path) = &a.witness_out {
                write_file(path, &(protocol_to_json(&found.protocol)? + "\n"))?;
            }
            ("exhaustive", found.report)
        }
    };
    Ok(Outcome::ok(advantage_csv(name, &report)))
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        let s = parts[i];
        s.trim().parse::<f64>().map_err(|_| Error::Parse {
            pos: parts[..i].iter().map(|p| p.len() + 1).sum(),
            msg: format!("grid entry `{s}` is not a number"),
        })
    };
    match parts.len() {
        1 => Ok(vec![num(0)?]),
        3 => {
            let (a, step, b) = (num(0)?, num(1)?, num(2)?);
            if !(step > 0.0) || b < a || a < 0.0 {
                return Err(Error::InvalidParams(format!("grid `{text}` needs 0 <= start <= stop and step > 0")));
            }
            Ok(budget_grid(a, step, b))
        }
        _ => Err(Error::Parse {
            pos: 0,
            msg: format!("grid `{text}` must be `start:step:stop` or a single value"),
        }),
    }
}

fn rate_region(cli: &Cli, a: &RateArgs) -> Result<Outcome> {
    let source = parse_source_spec(&a.source)?;
    let grid = parse_grid(&a.grid)?;
    let opts = MeshOptions {
        granularity: a.mesh,
        caps: a.caps.clone(),
        budget: a.budget,
    };
    let mut curve = approx_tilfc_joint(&source.exact::<f64>(cli.atom_cap)?, a.rounds, &grid, &opts)?;
    curve.source = source.kind_name().to_string();
    if let Some(dir) = &a.witness_dir {
        std::fs::create_dir_all(dir)?;
        for (id, json) in curve.witness_json()? {
            write_file(&dir.join(format!("{}.json", id.replace(':', "_"))), &(json + "\n"))?;
        }
    }
    if let Some(path) = &a.summary {
        #[derive(Serialize)]
        struct Summary<'a> {
            schema: &'static str,
            source: &'a str,
            rounds: usize,
            heuristic: bool,
            source_mi: f64,
            mimk: Option<crate::rate::MimkEstimate>,
            gamma: crate::rate::Gamma,
            shape: Option<crate::rate::ShapeReport>,
        }
        let s = Summary {
            schema: "crglab-rate-summary/1",
            source: &a.source,
            rounds: a.rounds,
            heuristic: curve.heuristic,
            source_mi: curve.source_mi,
            mimk: mimk_estimate(&curve, curve.source_mi).ok(),
            gamma: gamma_cbib(&curve),
            shape: certify_shape(&curve, 1e-9).ok(),
        };
        write_file(path, &(serde_json::to_string_pretty(&s)? + "\n"))?;
    }
    Ok(Outcome::ok(curve.to_csv()))
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<Outcome> {
    let suite: Suite = a.suite.parse()?;
    let seed = need_seed(cli, "verify")?;
    let results = if a.checks.is_empty() {
        run_suite(suite, seed, a.trials)?
    } else {
        let ids: Vec<&str> = a.checks.iter().map(String::as_str).collect();
        run_selected(suite, &ids, seed, a.trials)?
    };
    let failed = results.iter().any(|r| !r.passed());
    Ok(Outcome {
        text: results_csv(&results),
        status: failed as i32,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Exit status for an error.
pub fn error_status(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidParams(_) | Error::Precondition(_) | Error::NotFound(_) => 2,
        Error::CapExceeded { .. } | Error::BudgetExhausted(_) => 3,
        _ => 4,
    }
}

/// One-line JSON diagnostic for an error.
pub fn error_json(e: &Error) -> String {
    let kind = match e {
        Error::CapExceeded { .. } => "cap_exceeded",
        Error::BudgetExhausted(_) => "budget_exhausted",
        Error::Parse { .. } => "parse",
        Error::InvalidParams(_) => "invalid_params",
        Error::Precondition(_) => "precondition",
        Error::InvalidDistribution(_) => "invalid_distribution",
        Error::SupportMismatch(_) => "support_mismatch",
        Error::UndefinedRow { .. } => "undefined_row",
        Error::NotFound(_) => "not_found",
        Error::MismatchAlpha { .. } => "mismatch_alpha",
        Error::Artifact(_) => "artifact",
        Error::Json(_) => "json",
        Error::Io(_) => "io",
    };
    let mut v = serde_json::json!({ "error": kind, "message": e.to_string() });
    match e {
        Error::CapExceeded { what, needed, cap } => {
            v["what"] = (*what).into();
            v["needed"] = needed.to_string().into();
            v["cap"] = cap.to_string().into();
        }
        Error::Parse { pos, .. } => v["position"] = (*pos).into(),
        _ => {}
    }
    v.to_string()
}

/// Parse arguments, run, write the output, and return the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = run(&cli).and_then(|o| {
        match &cli.out {
            Some(path) => write_file(path, &o.text)?,
            None => std::io::stdout().write_all(o.text.as_bytes())?,
        }
        Ok(o.status)
    });
    match outcome {
        Ok(status) => status,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            error_status(&e)
        }
    }
}
