//! Command-line front end: `gen`, `verify`, `plan`, `exists` and
//! `certify-graph`.
//!
//! Exit codes are 0 for success, 1 when the object does not exist or fails
//! verification, and 2 for usage or internal errors. Machine output goes to
//! `out`; diagnostics go to `err`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use zerodiag::construct::{Branch, ConstructError};
use zerodiag::format::{
    decode_csv, decode_json, encode_csv, encode_json, CertificateRecord, MatrixFile, Param,
};
use zerodiag::graphs::{q2_certificate, GraphSpec, Q2Status};
use zerodiag::planner::{
    self, execute, exists, plan_conference, plan_drt, plan_drt_doubling, plan_multipartite,
    plan_skew_hadamard, ConstructionPlan, Kind, PlanError, PlanOptions, Route, Verdict,
};
use zerodiag::verify::{certify, check_drt, default_zero_tol, Claim, IntMatrix, DEFAULT_RES_TOL};
use zerodiag::RealMatrix;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "zerodiag",
    version,
    about = "Orthogonal matrices with zero diagonals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Omzd,
    SymmetricOmzd,
    Ompzd,
    Conference,
    Drt,
    SkewHadamard,
    Multipartite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExistsKind {
    Omzd,
    SymmetricOmzd,
    Ompzd,
}

impl From<ExistsKind> for Kind {
    fn from(k: ExistsKind) -> Self {
        match k {
            ExistsKind::Omzd => Kind::Omzd,
            ExistsKind::SymmetricOmzd => Kind::SymmetricOmzd,
            ExistsKind::Ompzd => Kind::Ompzd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    Auto,
    PreferDrt,
    PreferRecursive,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Auto => Route::Auto,
            RouteArg::PreferDrt => Route::PreferDrt,
            RouteArg::PreferRecursive => Route::PreferRecursive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Knn,
    Gnk,
    Multipartite,
}

#[derive(Debug, clap::Args)]
struct Target {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Order; the part size for `multipartite`.
    #[arg(long)]
    n: Option<usize>,
    /// Number of diagonal zeros for `ompzd`.
    #[arg(long)]
    k: Option<usize>,
    /// Prime power for `conference` (order q+1) and `drt`.
    #[arg(long)]
    q: Option<u64>,
    /// Number of doublings applied to the Paley tournament for `drt`.
    #[arg(long)]
    t: Option<u32>,
    /// Number of parts for `multipartite`.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    route: RouteArg,
    #[arg(long, value_enum, default_value = "minus")]
    branch: BranchArg,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a certified matrix and write it out.
    Gen {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
    },
    /// Certify a matrix file against a claim.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// omzd, ompzd(K), conference, skew-hadamard, symmetric-omzd,
        /// nowhere-zero, block-zero-diagonal(B) or drt.
        #[arg(long)]
        claim: String,
        /// Zero count when the claim is plain `ompzd`.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        res_tol: Option<f64>,
        #[arg(long)]
        zero_tol: Option<f64>,
    },
    /// Print the construction plan for a target.
    Plan {
        #[command(flatten)]
        target: Target,
    },
    /// Decide existence from the classification theorems.
    Exists {
        #[arg(long, value_enum)]
        kind: ExistsKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Certify that a graph has two distinct eigenvalues in some matrix of S(G).
    CertifyGraph {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        /// Number of parts for `multipartite`.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed command: exit code plus message for the error stream.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn failed(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_FAILED,
        message: message.into(),
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        let code = match &e {
            PlanError::NonexistentTarget(_)
            | PlanError::CertificationFailed { .. }
            | PlanError::Construct(ConstructError::Nonexistent { .. }) => EXIT_FAILED,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Runs the tool on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen {
            target,
            out: path,
            format,
        } => cmd_gen(&target, path.as_deref(), format, out, err),
        Command::Verify {
            input,
            claim,
            k,
            res_tol,
            zero_tol,
        } => cmd_verify(&input, &claim, k, res_tol, zero_tol, out, err),
        Command::Plan { target } => cmd_plan(&target, out),
        Command::Exists { kind, n, k } => cmd_exists(kind.into(), n, k, out, err),
        Command::CertifyGraph {
            family,
            n,
            k,
            m,
            out: path,
        } => cmd_certify_graph(family, n, k, m, path.as_deref(), out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    usage(format!("I/O error: {e}"))
}

fn require(v: Option<usize>, flag: &str, kind: GenKind) -> Result<usize, Failure> {
    v.ok_or_else(|| {
        usage(format!(
            "--{flag} is required for --kind {}",
            kind_name(kind)
        ))
    })
}

fn kind_name(kind: GenKind) -> &'static str {
    match kind {
        GenKind::Omzd => "omzd",
        GenKind::SymmetricOmzd => "symmetric-omzd",
        GenKind::Ompzd => "ompzd",
        GenKind::Conference => "conference",
        GenKind::Drt => "drt",
        GenKind::SkewHadamard => "skew-hadamard",
        GenKind::Multipartite => "multipartite",
    }
}

fn route_name(r: RouteArg) -> &'static str {
    match r {
        RouteArg::Auto => "auto",
        RouteArg::PreferDrt => "prefer-drt",
        RouteArg::PreferRecursive => "prefer-recursive",
    }
}

fn build_plan(t: &Target) -> Result<ConstructionPlan, Failure> {
    let opts = PlanOptions {
        route: t.route.into(),
        branch: t.branch.into(),
    };
    let p = match t.kind {
        GenKind::Omzd => planner::plan(Kind::Omzd, require(t.n, "n", t.kind)?, None, opts)?,
        GenKind::SymmetricOmzd => {
            planner::plan(Kind::SymmetricOmzd, require(t.n, "n", t.kind)?, None, opts)?
        }
        GenKind::Ompzd => planner::plan(
            Kind::Ompzd,
            require(t.n, "n", t.kind)?,
            Some(require(t.k, "k", t.kind)?),
            opts,
        )?,
        GenKind::Conference => match (t.n, t.q) {
            (_, Some(q)) => plan_conference(
                usize::try_from(q)
                    .map_err(|_| usage("--q is too large"))?
                    .saturating_add(1),
            )?,
            (Some(n), None) => plan_conference(n)?,
            (None, None) => return Err(usage("--n or --q is required for --kind conference")),
        },
        GenKind::Drt => match (t.n, t.q) {
            (_, Some(q)) => plan_drt_doubling(q, t.t.unwrap_or(0))?,
            (Some(n), None) => match t.t {
                None => plan_drt(n)?,
                Some(doublings) => {
                    let base = (n + 1)
                        .checked_shr(doublings)
                        .filter(|b| b << doublings == n + 1)
                        .and_then(|b| b.checked_sub(1))
                        .ok_or_else(|| usage(format!("order {n} is not 2^{doublings}(q+1)-1")))?;
                    plan_drt_doubling(base as u64, doublings)?
                }
            },
            (None, None) => return Err(usage("--n or --q is required for --kind drt")),
        },
        GenKind::SkewHadamard => plan_skew_hadamard(require(t.n, "n", t.kind)?)?,
        GenKind::Multipartite => {
            plan_multipartite(require(t.n, "n", t.kind)?, require(t.m, "m", t.kind)?)?
        }
    };
    Ok(p)
}

fn parameters(t: &Target, p: &ConstructionPlan) -> std::collections::BTreeMap<String, Param> {
    let mut params = std::collections::BTreeMap::new();
    params.insert("order".to_string(), Param::from(p.target.order()));
    for (name, v) in [("n", t.n), ("k", t.k), ("m", t.m)] {
        if let Some(v) = v {
            params.insert(name.to_string(), Param::from(v));
        }
    }
    if let Some(q) = t.q {
        params.insert("q".to_string(), Param::from(q));
    }
    if let Some(d) = t.t {
        params.insert("t".to_string(), Param::from(d));
    }
    if matches!(
        t.kind,
        GenKind::Omzd | GenKind::SymmetricOmzd | GenKind::Ompzd
    ) {
        params.insert("route".to_string(), Param::from(route_name(t.route)));
        params.insert(
            "branch".to_string(),
            Param::from(Branch::from(t.branch).to_string()),
        );
    }
    params
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(io_failure),
        None => out.write_all(text.as_bytes()).map_err(io_failure),
    }
}

fn cmd_gen(
    t: &Target,
    path: Option<&Path>,
    format: OutFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let p = build_plan(t)?;
    let executed = execute(&p)?;
    if !executed.verdict.passed() {
        return Err(failed(format!("{} failed certification", p.target)));
    }
    let certificate = match &executed.verdict {
        Verdict::Ortho(c) => CertificateRecord::from(c),
        Verdict::Drt(v) => CertificateRecord {
            claim: "drt".to_string(),
            passed: v.passed,
            max_residual: 0.0,
            min_offdiag_magnitude: 0.0,
            symmetry: "neither".to_string(),
        },
    };
    let mut file =
        MatrixFile::from_matrix(executed.product.family(), &executed.matrix, p.root.theorem);
    file.plan = Some(p.to_string());
    file.certificate = Some(certificate);
    file.provenance.parameters = parameters(t, &p);

    let text = match format {
        OutFormat::Json => encode_json(&file),
        OutFormat::Csv => encode_csv(&executed.matrix),
    }
    .map_err(|e| usage(e.to_string()))?;
    write_output(path, &text, out)?;
    let _ = writeln!(err, "certified {} via {}", p.target, p);
    Ok(EXIT_OK)
}

fn read_matrix(input: &Path) -> Result<(RealMatrix, Option<MatrixFile>), Failure> {
    let text = std::fs::read_to_string(input).map_err(io_failure)?;
    if text.trim_start().starts_with('{') {
        let file = decode_json(&text).map_err(|e| usage(e.to_string()))?;
        Ok((file.matrix(), Some(file)))
    } else {
        Ok((decode_csv(&text).map_err(|e| usage(e.to_string()))?, None))
    }
}

fn cmd_verify(
    input: &Path,
    claim: &str,
    k: Option<usize>,
    res_tol: Option<f64>,
    zero_tol: Option<f64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let (m, _) = read_matrix(input)?;
    if claim.trim() == "drt" {
        let t = IntMatrix::try_from_real(&m)
            .ok_or_else(|| failed("tournament entries must be integers"))?;
        let v = check_drt(&t);
        let report = json!({
            "claim": "drt",
            "passed": v.passed,
            "order": v.order,
            "failures": v.failures,
        });
        writeln!(out, "{report}").map_err(io_failure)?;
        for f in &v.failures {
            let _ = writeln!(err, "violation: {f}");
        }
        return Ok(if v.passed { EXIT_OK } else { EXIT_FAILED });
    }
    let claim: Claim = match (claim.trim(), k) {
        ("ompzd", Some(k)) => Claim::Ompzd(k),
        ("ompzd", None) => return Err(usage("--claim ompzd needs --k or the form ompzd(K)")),
        (c, _) => c.parse().map_err(usage)?,
    };
    let zero_tol = zero_tol.unwrap_or_else(|| default_zero_tol(&m));
    let res_tol = res_tol.unwrap_or(DEFAULT_RES_TOL);
    let cert = certify(&m, claim, zero_tol, res_tol).map_err(|e| failed(e.to_string()))?;
    let report = json!({
        "claim": cert.claim.to_string(),
        "passed": cert.passed,
        "scale_c": cert.scale_c,
        "max_residual": cert.max_residual,
        "min_offdiag_magnitude": cert.min_offdiag_magnitude,
        "symmetry": cert.symmetry.to_string(),
        "failures": cert.failures.iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    writeln!(out, "{report}").map_err(io_failure)?;
    for f in &cert.failures {
        let _ = writeln!(err, "violation: {f}");
    }
    Ok(if cert.passed { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_plan(t: &Target, out: &mut dyn Write) -> CmdResult {
    let p = build_plan(t)?;
    writeln!(out, "{p}").map_err(io_failure)?;
    Ok(EXIT_OK)
}

fn cmd_exists(
    kind: Kind,
    n: usize,
    k: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let v = exists(kind, n, k)?;
    let report = json!({
        "n": n,
        "k": k,
        "exists": v.exists,
        "theorem": v.theorem,
        "statement": v.statement,
    });
    writeln!(out, "{report}").map_err(io_failure)?;
    if v.exists {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "{}", v.statement);
        Ok(EXIT_FAILED)
    }
}

fn cmd_certify_graph(
    family: Family,
    n: usize,
    k: Option<usize>,
    m: Option<usize>,
    path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let spec = match family {
        Family::Knn => GraphSpec::Knn(n),
        Family::Gnk => GraphSpec::Gnk {
            n,
            k: k.ok_or_else(|| usage("--k is required for --family gnk"))?,
        },
        Family::Multipartite => GraphSpec::Multipartite {
            part: n,
            parts: m.ok_or_else(|| usage("--m is required for --family multipartite"))?,
        },
    };
    spec.validate().map_err(usage)?;
    let cert = q2_certificate(spec);
    let (status, reason, code) = match &cert.status {
        Q2Status::Certified => ("certified", None, EXIT_OK),
        Q2Status::KnownImpossible(r) => ("known-impossible", Some(r.as_str()), EXIT_FAILED),
        Q2Status::Unknown(r) => ("unknown", Some(r.as_str()), EXIT_FAILED),
    };
    let text = match &cert.matrix {
        Some(matrix) if cert.is_certified() => {
            let mut file =
                MatrixFile::from_matrix("graph-certificate", matrix, "two-eigenvalue-certificate");
            let params = &mut file.provenance.parameters;
            params.insert("graph".into(), Param::from(spec.to_string()));
            params.insert("status".into(), Param::from(status));
            params.insert(
                "pattern_verified".into(),
                Param::from(cert.pattern_verified),
            );
            if let Some(count) = cert.distinct_eigenvalue_count {
                params.insert("distinct_eigenvalues".into(), Param::from(count));
            }
            encode_json(&file).map_err(|e| usage(e.to_string()))?
        }
        _ => {
            let report = json!({
                "graph": spec.to_string(),
                "status": status,
                "reason": reason,
            });
            format!("{report}\n")
        }
    };
    write_output(path, &text, out)?;
    if let Some(r) = reason {
        let _ = writeln!(err, "{spec}: {status}: {r}");
    }
    Ok(code)
}
