//! `summing` command-line frontend.
//!
//! Every command prints one JSON envelope `{header, payload}` to stdout. The
//! header carries the tool name, version and timestamp; the payload is a
//! deterministic function of the arguments and input files and embeds a
//! SHA-256 digest of both. With `--out DIR` the envelope is also written to
//! `DIR/reports/<experiment>/<label>.json`.
//!
//! Exit codes: 0 success, 1 usage, 2 input validation, 3 inconsistent
//! verdict, 4 numerical failure.

pub mod files;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use summing_core::domination::{refine, validate_with_grid, RefineConfig};
use summing_core::experiments::{
    coincidence, default_pairs, doubling_schedule, holder_factor_check, multi_equivalence, triviality_probe, Bracket,
    ExperimentConfig, Report, Verdict,
};
use summing_core::seqnorms::{cohen_norm, strong_norm, weak_norm};
use summing_core::witness::{gamma_check, gamma_check_exact, parse_ratio, ExponentScheme, SearchConfig};
use summing_core::{Error, Exponent};

use files::{label_for, parse_operator, parse_sequence, read_bytes, Loaded, SCHEMA};

pub const TOOL: &str = "summing";

/// Failure classes, one per exit code.
#[derive(Debug, PartialEq)]
pub enum CliError {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

#[derive(Debug, Parser, Serialize)]
#[command(name = TOOL, version, about = "Summing constants and Pietsch domination certificates")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Master seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random multistarts per search.
    #[arg(long, global = true, default_value_t = 8)]
    pub budget: usize,
    /// Largest witness length searched.
    #[arg(long = "m-max", global = true, default_value_t = summing_core::witness::DEFAULT_M_MAX)]
    pub m_max: usize,
    /// Codomain atoms for domination certificates.
    #[arg(long, global = true, default_value_t = 720)]
    pub atoms: usize,
    /// Validation grid size.
    #[arg(long, global = true, default_value_t = summing_core::domination::DEFAULT_GRID)]
    pub grid: usize,
    /// Relative tolerance for cross-scheme verdicts.
    #[arg(long, global = true, default_value_t = summing_core::experiments::CROSS_TOL)]
    pub tol: f64,
    /// Directory for `reports/<experiment>/<label>.json`.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Report label (defaults to the input's label or file stem).
    #[arg(long, global = true)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Strong,
    Weak,
    Cohen,
}

#[derive(Debug, Args, Serialize)]
pub struct SchemeArgs {
    /// Summing exponent `p` (decimal, `a/b` or `inf`).
    #[arg(long)]
    pub p: String,
    #[arg(long, requires = "q1")]
    pub q0: Option<String>,
    #[arg(long, requires = "q0")]
    pub q1: Option<String>,
    /// Joint multilinear scheme.
    #[arg(long, conflicts_with_all = ["q0", "q1", "separate", "q_tuple"])]
    pub joint: bool,
    /// Separate multilinear scheme with `n` = arity.
    #[arg(long, conflicts_with_all = ["q0", "q1", "q_tuple"])]
    pub separate: bool,
    /// General multilinear scheme `q0,q1,…,qn`.
    #[arg(long = "q-tuple", value_delimiter = ',', conflicts_with_all = ["q0", "q1"])]
    pub q_tuple: Option<Vec<String>>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Strong, weak or Cohen norm of a sequence file.
    Norm {
        #[arg(long, value_enum)]
        kind: NormKind,
        #[arg(long)]
        p: String,
        file: PathBuf,
    },
    /// Bracket the best constant of one scheme.
    Constant {
        #[command(flatten)]
        scheme: SchemeArgs,
        file: PathBuf,
    },
    /// Fit, validate and emit a domination certificate.
    Dominate {
        #[command(flatten)]
        scheme: SchemeArgs,
        file: PathBuf,
    },
    /// Brackets for several Γ pairs; inconsistent brackets exit with 3.
    VerifyCoincidence {
        #[arg(long)]
        p: String,
        /// `q0,q1`; repeatable. Defaults to three pairs including `(1, p)`.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        file: PathBuf,
    },
    /// Brackets for several multilinear schemes.
    MultiEquivalence {
        #[arg(long)]
        p: String,
        /// `joint`, `separate` or a tuple `q0,q1,…,qn`; repeatable.
        #[arg(long = "scheme")]
        schemes: Vec<String>,
        file: PathBuf,
    },
    /// Witness ratios for growing `m` under a pair with `q1 > p`.
    AdjudicateTriviality {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q0: String,
        #[arg(long)]
        q1: String,
        /// Comma-separated `m` values; defaults to 1,2,4,…,64.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<usize>>,
        file: PathBuf,
    },
    /// Sampled three-exponent Hölder inequality.
    HolderCheck {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q0: String,
        #[arg(long)]
        q1: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

impl Command {
    fn experiment(&self) -> &'static str {
        match self {
            Command::Norm { .. } => "norm",
            Command::Constant { .. } => "constant",
            Command::Dominate { .. } => "dominate",
            Command::VerifyCoincidence { .. } => "coincidence",
            Command::MultiEquivalence { .. } => "multi-equivalence",
            Command::AdjudicateTriviality { .. } => "triviality-probe",
            Command::HolderCheck { .. } => "holder-check",
        }
    }

    fn file(&self) -> Option<&Path> {
        match self {
            Command::Norm { file, .. }
            | Command::Constant { file, .. }
            | Command::Dominate { file, .. }
            | Command::VerifyCoincidence { file, .. }
            | Command::MultiEquivalence { file, .. }
            | Command::AdjudicateTriviality { file, .. } => Some(file),
            Command::HolderCheck { .. } => None,
        }
    }
}

#[derive(Serialize)]
struct Header {
    tool: &'static str,
    version: &'static str,
    timestamp: String,
}

/// Deterministic part of the output.
#[derive(Serialize)]
pub struct Payload {
    pub schema: &'static str,
    pub experiment: String,
    pub label: String,
    pub input_digest: String,
    pub result: Value,
}

#[derive(Serialize)]
struct Envelope<'a> {
    header: Header,
    payload: &'a Payload,
}

fn exponent(s: &str) -> Result<Exponent, CliError> {
    s.parse::<Exponent>().map_err(CliError::from)
}

/// Γ membership: exact when all three are rational literals, else within
/// `1e-12`.
pub fn check_gamma(p: &str, q0: &str, q1: &str) -> Result<(Exponent, Exponent, Exponent), CliError> {
    let (pe, a, b) = (exponent(p)?, exponent(q0)?, exponent(q1)?);
    let member = match (parse_ratio(p), parse_ratio(q0), parse_ratio(q1)) {
        (Some(x), Some(y), Some(z)) => gamma_check_exact(x, y, z).member,
        _ => gamma_check(pe, a, b).member,
    };
    if !member {
        return Err(CliError::Input(format!("not a Γ pair: ({q0}, {q1}) at p = {p}")));
    }
    Ok((pe, a, b))
}

fn scheme_for(args: &SchemeArgs, op: &Loaded) -> Result<ExponentScheme, CliError> {
    let p = exponent(&args.p)?;
    let arity = op.arity();
    let scheme = if args.joint {
        ExponentScheme::joint(p)?
    } else if args.separate {
        ExponentScheme::separate(p, arity)?
    } else if let Some(t) = &args.q_tuple {
        let qs = t.iter().map(|s| exponent(s)).collect::<Result<Vec<_>, _>>()?;
        if qs.len() < 2 {
            return Err(CliError::Input("--q-tuple needs q0 and at least one slot exponent".into()));
        }
        ExponentScheme::general(p, qs[0], qs[1..].to_vec())?
    } else if let (Some(q0), Some(q1)) = (&args.q0, &args.q1) {
        let (p, q0, q1) = check_gamma(&args.p, q0, q1)?;
        ExponentScheme::linear(p, q0, q1)?
    } else if arity == 1 {
        ExponentScheme::cohen(p)?
    } else {
        ExponentScheme::joint(p)?
    };
    scheme.check_arity(arity)?;
    Ok(scheme)
}

fn refine_config(g: &Global) -> RefineConfig {
    RefineConfig {
        search: SearchConfig { budget: g.budget, seed: g.seed, m_max: g.m_max },
        atoms: g.atoms,
        grid: g.grid,
        ..RefineConfig::default()
    }
}

fn experiment_config(g: &Global) -> ExperimentConfig {
    ExperimentConfig { refine: refine_config(g), tol: g.tol }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn digest(cli: &Cli, input: Option<&[u8]>) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&json!({ "global": &cli.global, "command": &cli.command })).expect("args serialize"));
    if let Some(bytes) = input {
        h.update(b"\0input\0");
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

fn finish_report(mut report: Report, file_digest: Option<&str>) -> (Value, Option<Verdict>) {
    report.inputs.operator = file_digest.map(str::to_string);
    let v = report.verdict;
    (to_value(&report), Some(v))
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn need_linear(op: &Loaded) -> Result<summing_core::LinearOp, CliError> {
    op.as_linear().ok_or_else(|| CliError::Input("this command needs a linear operator".into()))
}

/// Run a parsed command; returns the payload and the verdict if any.
pub fn execute(cli: &Cli) -> Result<(Payload, Option<Verdict>), CliError> {
    let g = &cli.global;
    let bytes = cli.command.file().map(read_bytes).transpose()?;
    let input_digest = digest(cli, bytes.as_deref());
    let file_digest = bytes.as_deref().map(sha_hex);
    let mut label = g.label.clone();

    let (result, verdict) = match &cli.command {
        Command::Norm { kind, p, file } => {
            let (f, seq) = parse_sequence(bytes.as_deref().unwrap())?;
            label.get_or_insert_with(|| label_for(file, f.label.as_deref()));
            let p = exponent(p)?;
            let est = match kind {
                NormKind::Strong => strong_norm(&seq, p)?,
                NormKind::Weak => weak_norm(&seq, p, g.budget, g.seed)?,
                NormKind::Cohen => cohen_norm(&seq, p, g.budget, g.seed)?,
            };
            (json!({ "kind": kind, "p": p.to_string(), "estimate": est }), None)
        }
        Command::Constant { scheme, file } => {
            let (f, op) = parse_operator(bytes.as_deref().unwrap())?;
            label.get_or_insert_with(|| label_for(file, f.label.as_deref()));
            let scheme = scheme_for(scheme, &op)?;
            let est = match &op {
                Loaded::Linear(l) => refine(l, &scheme, &refine_config(g))?,
                Loaded::Multi(m) => refine(m, &scheme, &refine_config(g))?,
            };
            let bracket = Bracket::from_estimate(&est);
            (json!({ "operator": file_digest, "scheme": est.scheme, "bracket": bracket, "best_witness": est.best_witness }), None)
        }
        Command::Dominate { scheme, file } => {
            let (f, op) = parse_operator(bytes.as_deref().unwrap())?;
            label.get_or_insert_with(|| label_for(file, f.label.as_deref()));
            let scheme = scheme_for(scheme, &op)?;
            let (est, validation) = match &op {
                Loaded::Linear(l) => {
                    let est = refine(l, &scheme, &refine_config(g))?;
                    let v = validate_with_grid(l, est.certificate.as_ref().unwrap(), g.grid, g.budget, g.seed)?;
                    (est, v)
                }
                Loaded::Multi(m) => {
                    let est = refine(m, &scheme, &refine_config(g))?;
                    let v = validate_with_grid(m, est.certificate.as_ref().unwrap(), g.grid, g.budget, g.seed)?;
                    (est, v)
                }
            };
            (
                json!({
                    "operator": file_digest,
                    "certificate": est.certificate,
                    "validated_constant": validation.value,
                    "validation_certified": validation.certified,
                    "bracket": Bracket::from_estimate(&est),
                }),
                None,
            )
        }
        Command::VerifyCoincidence { p, pairs, file } => {
            let (f, op) = parse_operator(bytes.as_deref().unwrap())?;
            label.get_or_insert_with(|| label_for(file, f.label.as_deref()));
            let t = need_linear(&op)?;
            let pe = exponent(p)?;
            let pairs = if pairs.is_empty() {
                default_pairs(pe)?
            } else {
                pairs
                    .iter()
                    .map(|s| {
                        let (a, b) = s
                            .split_once(',')
                            .ok_or_else(|| CliError::Usage(format!("--pair expects q0,q1, got {s:?}")))?;
                        check_gamma(p, a.trim(), b.trim()).map(|(_, a, b)| (a, b))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            finish_report(coincidence(&t, pe, &pairs, &experiment_config(g))?, file_digest.as_deref())
        }
        Command::MultiEquivalence { p, schemes, file } => {
            let (f, op) = parse_operator(bytes.as_deref().unwrap())?;
            label.get_or_insert_with(|| label_for(file, f.label.as_deref()));
            let m = op.as_multi();
            let n = m.domains.len();
            let pe = exponent(p)?;
            let list = if schemes.is_empty() {
                let q = pe.times(n as f64);
                vec![
                    ExponentScheme::joint(pe)?,
                    ExponentScheme::separate(pe, n)?,
                    ExponentScheme::general(pe, Exponent::ONE, vec![q; n])?,
                ]
            } else {
                schemes
                    .iter()
                    .map(|s| match s.trim() {
                        "joint" => ExponentScheme::joint(pe).map_err(CliError::from),
                        "separate" => ExponentScheme::separate(pe, n).map_err(CliError::from),
                        t => {
                            let qs = t.split(',').map(exponent).collect::<Result<Vec<_>, _>>()?;
                            if qs.len() < 2 {
                                return Err(CliError::Usage(format!("bad scheme {t:?}")));
                            }
                            ExponentScheme::general(pe, qs[0], qs[1..].to_vec()).map_err(CliError::from)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            finish_report(multi_equivalence(&m, pe, &list, &experiment_config(g))?, file_digest.as_deref())
        }
        Command::AdjudicateTriviality { p, q0, q1, schedule, file } => {
            let (f, op) = parse_operator(bytes.as_deref().unwrap())?;
            label.get_or_insert_with(|| label_for(file, f.label.as_deref()));
            let t = need_linear(&op)?;
            let (pe, a, b) = check_gamma(p, q0, q1)?;
            let schedule = schedule.clone().unwrap_or_else(|| doubling_schedule(64));
            finish_report(triviality_probe(&t, pe, a, b, &schedule, &experiment_config(g))?, file_digest.as_deref())
        }
        Command::HolderCheck { p, q0, q1, trials } => {
            let (pe, a, b) = (exponent(p)?, exponent(q0)?, exponent(q1)?);
            let exact = matches!((parse_ratio(p), parse_ratio(q0), parse_ratio(q1)), (Some(_), Some(_), Some(_)));
            if exact {
                check_gamma(p, q0, q1)?;
            }
            label.get_or_insert_with(|| format!("p{p}_q0{q0}_q1{q1}").replace('/', "-"));
            finish_report(holder_factor_check(pe, a, b, *trials, g.seed)?, None)
        }
    };
    let payload = Payload {
        schema: SCHEMA,
        experiment: cli.command.experiment().into(),
        label: label.unwrap_or_else(|| cli.command.experiment().into()),
        input_digest,
        result,
    };
    Ok((payload, verdict))
}

/// Serialized envelope with a fresh timestamp.
pub fn render(payload: &Payload) -> String {
    let env = Envelope {
        header: Header { tool: TOOL, version: env!("CARGO_PKG_VERSION"), timestamp: chrono::Utc::now().to_rfc3339() },
        payload,
    };
    serde_json::to_string_pretty(&env).expect("envelope serializes")
}

fn write_out(dir: &Path, payload: &Payload, text: &str) -> Result<PathBuf, CliError> {
    let safe: String = payload
        .label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect();
    let target = dir.join("reports").join(&payload.experiment);
    std::fs::create_dir_all(&target).map_err(|e| CliError::Input(format!("cannot create {}: {e}", target.display())))?;
    let path = target.join(format!("{safe}.json"));
    std::fs::write(&path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Parse `argv`, run, print; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((payload, verdict)) => {
            let text = render(&payload);
            {
                use std::io::Write;
                let mut out = std::io::stdout().lock();
                let _ = writeln!(out, "{text}");
            }
            if let Some(dir) = &cli.global.out {
                if let Err(e) = write_out(dir, &payload, &text) {
                    eprintln!("error: {e}");
                    return e.code();
                }
            }
            if verdict == Some(Verdict::Inconsistent) {
                eprintln!("verdict: inconsistent");
                3
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
