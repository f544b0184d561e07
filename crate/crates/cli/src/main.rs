//! `mubcert`: command-line driver wiring the constellation generators, the
//! Gröbner and Nullstellensatz engines, Grassmann geometry, convex iteration,
//! and the moment/SDP machinery into composable subcommands.
//!
//! Conventions shared by every subcommand:
//!
//! * primary results are JSON on standard output; `-` for `--in`/`--out`
//!   means standard input/output;
//! * diagnostics and the per-run manifest are JSON lines on standard error;
//! * exit codes: 0 success/verified, 1 negative result (no certificate up to
//!   the bound, verification failed, solver below target), 2 usage error,
//!   3 resource cap hit;
//! * outputs are deterministic for fixed inputs and options — timing lives
//!   only in the manifest;
//! * `MUBCERT_THREADS` caps internal parallelism.

use std::io::{Read as _, Write as _};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest as _, Sha256};

use mubcert_core::consys::{
    build_1111_2, build_5333_6_density_with, build_5551_6, build_vector_system, check_mu,
    promote_squared_objective, ConstellationSpec, MinorSet, PermutationGroup, PolySystem,
};
use mubcert_core::grassmann::{avg_distance_sq, basis_plane, distance_sq};
use mubcert_core::groebner::{basis_is_unit, groebner_basis, BuchbergerOptions, GroebnerError};
use mubcert_core::lasserre::build_moment_relaxation;
use mubcert_core::nulla::{certificate_stats, nulla_search_with, Certificate, NullaError, ResourceCaps};
use mubcert_core::qmp::{
    build_relaxation, convex_iteration, decode_states, encode_constellation_qmp,
    ConvexIterOptions, ConvexIterStatus, FantopeInit, ObjectiveChoice,
};
use mubcert_core::sdp::sdpa::{emit_sdpa_string, parse_sdpa_str};
use mubcert_core::sdp::{solve as solve_sdp, SdpOptions, SdpStatus};
use mubcert_core::{MonomialOrder, Polynomial};

// ---------------------------------------------------------------------------
// Command-line surface

#[derive(Parser)]
#[command(
    name = "mubcert",
    version,
    about = "Feasibility certificates for mutually-unbiased-bases constellations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the polynomial feasibility system of a constellation.
    Gen(GenArgs),
    /// Reduced Gröbner basis and the complex-infeasibility verdict.
    Groebner(GroebnerArgs),
    /// Search for a Nullstellensatz certificate by exact linear algebra.
    Nulla(NullaArgs),
    /// Check a certificate against a system as an exact identity.
    Verify(VerifyArgs),
    /// Pairwise and averaged squared Grassmann distances between bases.
    Grassmann(GrassmannArgs),
    /// Convex iteration on the rank-constrained SDP of a constellation.
    Citer(CiterArgs),
    /// Emit the rank-free SDP relaxation of a constellation in SDPA format.
    EmitQmp(EmitQmpArgs),
    /// Moment (Lasserre) relaxation of a polynomial system: structure,
    /// lower bound, or SDPA emission.
    Lasserre(LasserreArgs),
    /// Solve an SDPA sparse-format problem with the internal solver.
    Sdp(SdpArgs),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Gen(_) => "gen",
            Cmd::Groebner(_) => "groebner",
            Cmd::Nulla(_) => "nulla",
            Cmd::Verify(_) => "verify",
            Cmd::Grassmann(_) => "grassmann",
            Cmd::Citer(_) => "citer",
            Cmd::EmitQmp(_) => "emit-qmp",
            Cmd::Lasserre(_) => "lasserre",
            Cmd::Sdp(_) => "sdp",
        }
    }

    fn options_json(&self) -> Value {
        match self {
            Cmd::Gen(a) => json!(a),
            Cmd::Groebner(a) => json!(a),
            Cmd::Nulla(a) => json!(a),
            Cmd::Verify(a) => json!(a),
            Cmd::Grassmann(a) => json!(a),
            Cmd::Citer(a) => json!(a),
            Cmd::EmitQmp(a) => json!(a),
            Cmd::Lasserre(a) => json!(a),
            Cmd::Sdp(a) => json!(a),
        }
    }
}

#[derive(Args, Serialize)]
struct GenArgs {
    /// Constellation label `a1,a2,...,ak@d`, e.g. `1,1,1,1@2`.
    #[arg(long)]
    spec: String,
    /// Parameterization: unit vectors or density matrices.
    #[arg(long, value_enum, default_value_t = Param::Vector)]
    param: Param,
    /// Gauge scheme. `auto` uses the hand-reduced systems for `1,1,1,1@2`
    /// and `5,5,5,1@6` and the generic scheme otherwise; `reduced` demands
    /// one of those two systems.
    #[arg(long, value_enum, default_value_t = Gauge::Auto)]
    gauge: Gauge,
    /// Minor set for the density parameterization.
    #[arg(long, value_enum, default_value_t = Minors::Adjacent)]
    minors: Minors,
    /// Output path for the system JSON (`-` = stdout).
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Param {
    Vector,
    Density,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Gauge {
    Auto,
    Reduced,
    Generic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Minors {
    Adjacent,
    All,
}

#[derive(Args, Serialize)]
struct GroebnerArgs {
    /// Input system JSON (`-` = stdin).
    #[arg(long = "in")]
    input: String,
    /// Monomial order.
    #[arg(long, value_enum, default_value_t = Order::Grevlex)]
    order: Order,
    /// Abort with a resource-cap exit when any intermediate degree exceeds
    /// this bound.
    #[arg(long)]
    max_degree: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Order {
    Grevlex,
    Grlex,
    Lex,
}

impl Order {
    fn to_core(self) -> MonomialOrder {
        match self {
            Order::Grevlex => MonomialOrder::GrevLex,
            Order::Grlex => MonomialOrder::GrLex,
            Order::Lex => MonomialOrder::Lex,
        }
    }
}

#[derive(Args, Serialize)]
struct NullaArgs {
    /// Input system JSON (`-` = stdin).
    #[arg(long = "in")]
    input: String,
    /// Largest certificate degree to try.
    #[arg(long)]
    dmax: u32,
    /// Variable-permutation group JSON; restricts the search to symmetric
    /// certificates on the orbit-reduced system.
    #[arg(long)]
    group: Option<String>,
    /// Write the certificate JSON here when one is found (`-` = stdout).
    #[arg(long)]
    out: Option<String>,
    /// Row cap for the linear systems (checked before allocation).
    #[arg(long, default_value_t = ResourceCaps::default().max_rows)]
    max_rows: u64,
    /// Column cap for the linear systems (checked before allocation).
    #[arg(long, default_value_t = ResourceCaps::default().max_cols)]
    max_cols: u64,
    /// Coefficient bit-size cap during exact elimination.
    #[arg(long, default_value_t = ResourceCaps::default().max_coeff_bits)]
    max_coeff_bits: u64,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// System JSON (`-` = stdin).
    #[arg(long)]
    sys: String,
    /// Certificate JSON (`-` = stdin; at most one of --sys/--cert may be `-`).
    #[arg(long)]
    cert: String,
}

#[derive(Args, Serialize)]
struct GrassmannArgs {
    /// Bases JSON (`-` = stdin): `{"bases": [basis, ...]}` or a bare list;
    /// a basis is a list of vectors, a vector a list of `[re, im]` pairs.
    #[arg(long)]
    bases: String,
}

#[derive(Args, Serialize)]
struct CiterArgs {
    /// Constellation label `a1,a2,...,ak@d`.
    #[arg(long)]
    spec: String,
    /// Objective promoted into the weight iteration.
    #[arg(long, value_enum, default_value_t = Objective::FirstOrthogonality)]
    objective: Objective,
    /// Promote the feasibility constraint at this index instead.
    #[arg(long, conflicts_with = "objective")]
    promote_constraint: Option<usize>,
    /// Maximum number of weight-iteration rounds.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Convergence target for the rank residual tau.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Seed for the random-projector initialization; without it the
    /// iteration starts from the zero weight (a pure feasibility solve).
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance of the inner SDP solves.
    #[arg(long, default_value_t = 1e-7)]
    sdp_tol: f64,
    /// Tolerance for the mutual-unbiasedness check of the decoded states.
    #[arg(long, default_value_t = 1e-5)]
    mu_tol: f64,
    /// Write the iteration trace JSON here (`-` = stdout).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Objective {
    Feasibility,
    FirstOrthogonality,
}

#[derive(Args, Serialize)]
struct EmitQmpArgs {
    /// Constellation label `a1,a2,...,ak@d`.
    #[arg(long)]
    spec: String,
    /// Objective promoted out of the constraint set.
    #[arg(long, value_enum, default_value_t = Objective::FirstOrthogonality)]
    objective: Objective,
    /// Promote the feasibility constraint at this index instead.
    #[arg(long, conflicts_with = "objective")]
    promote_constraint: Option<usize>,
    /// Output path for the `.dat-s` file (`-` = stdout).
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Serialize)]
struct LasserreArgs {
    /// Input system JSON (`-` = stdin).
    #[arg(long = "in")]
    input: String,
    /// Relaxation order k (moment matrix indexed by monomials of degree <= k).
    #[arg(long)]
    order: u32,
    /// Replace the objective by the square of this constraint, removing it
    /// from the constraint set, before relaxing.
    #[arg(long)]
    promote_squared: Option<usize>,
    /// Solve the relaxation and report the lower bound.
    #[arg(long, conflicts_with = "emit")]
    solve: bool,
    /// Emit the relaxation as an SDPA `.dat-s` file instead (`-` = stdout).
    #[arg(long)]
    emit: Option<String>,
    /// SDP solver tolerance (with --solve).
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// SDP solver iteration cap (with --solve).
    #[arg(long, default_value_t = SdpOptions::default().max_iter)]
    max_iter: usize,
}

#[derive(Args, Serialize)]
struct SdpArgs {
    /// Input problem in SDPA sparse format (`-` = stdin).
    #[arg(long = "in")]
    input: String,
    /// Solver tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = SdpOptions::default().max_iter)]
    max_iter: usize,
}

// ---------------------------------------------------------------------------
// Run plumbing: exit codes, digests, manifest

/// Exit codes, per the interface contract.
const EXIT_NEGATIVE: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_RESOURCE: i32 = 3;

/// A usage failure: aborts the subcommand before it can print a result.
/// (Resource-cap aborts instead print their exhausted bounds as the result
/// and exit 3 through the normal path.)
struct Failure(String);

impl Failure {
    fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }

    fn message(&self) -> &str {
        &self.0
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure(msg.to_string())
}

/// A completed subcommand: its exit code and the summary for the manifest.
struct Run {
    exit: i32,
    summary: Value,
}

impl Run {
    fn ok(summary: Value) -> Self {
        Run { exit: 0, summary }
    }

    fn negative(summary: Value) -> Self {
        Run { exit: EXIT_NEGATIVE, summary }
    }
}

#[derive(Serialize)]
struct InputDigest {
    source: String,
    sha256: String,
}

/// Tracks inputs (with content digests) and written artifacts for the
/// manifest, and owns the `-` = stdin/stdout convention.
#[derive(Default)]
struct Io {
    inputs: Vec<InputDigest>,
    artifacts: Vec<String>,
}

impl Io {
    fn read(&mut self, path: &str) -> Result<String, Failure> {
        let (label, bytes) = if path == "-" {
            let mut buf = Vec::new();
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| usage(format!("reading stdin: {e}")))?;
            ("-".to_string(), buf)
        } else {
            let buf = std::fs::read(path).map_err(|e| usage(format!("reading {path}: {e}")))?;
            (path.to_string(), buf)
        };
        let digest = hex::encode(Sha256::digest(&bytes));
        self.inputs.push(InputDigest { source: label.clone(), sha256: digest });
        String::from_utf8(bytes).map_err(|_| usage(format!("{label} is not valid UTF-8")))
    }

    fn write(&mut self, path: &str, content: &str) -> Result<(), Failure> {
        if path == "-" {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| usage(format!("writing stdout: {e}")))
        } else {
            std::fs::write(path, content)
                .map_err(|e| usage(format!("writing {path}: {e}")))?;
            self.artifacts.push(path.to_string());
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    subcommand: &'a str,
    inputs: &'a [InputDigest],
    options: Value,
    wall_ms: f64,
    result: Value,
    artifacts: &'a [String],
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    level: &'static str,
    message: &'a str,
}

fn emit_stderr_line(v: &impl Serialize) {
    let line = serde_json::to_string(v).expect("stderr diagnostics serialize");
    eprintln!("{line}");
}

/// Print the primary result JSON (one line) on stdout.
fn emit_result(v: &Value) {
    println!("{v}");
}

fn init_threads() -> Result<(), Failure> {
    if let Ok(raw) = std::env::var("MUBCERT_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("MUBCERT_THREADS must be a positive integer, got {raw:?}")))?;
        // A failure here means a pool already exists (e.g. under tests);
        // the cap is then simply not applied.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let t0 = Instant::now();
    let subcommand = cli.cmd.name();
    let options = cli.cmd.options_json();
    let mut io = Io::default();

    let outcome = init_threads().and_then(|()| dispatch(cli.cmd, &mut io));
    let (exit, result) = match outcome {
        Ok(run) => (run.exit, run.summary),
        Err(failure) => {
            emit_stderr_line(&Diagnostic {
                kind: "diagnostic",
                level: "error",
                message: failure.message(),
            });
            (failure.exit_code(), json!({ "error": failure.message() }))
        }
    };
    emit_stderr_line(&Manifest {
        kind: "manifest",
        subcommand,
        inputs: &io.inputs,
        options,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        result,
        artifacts: &io.artifacts,
    });
    std::process::exit(exit);
}

fn dispatch(cmd: Cmd, io: &mut Io) -> Result<Run, Failure> {
    match cmd {
        Cmd::Gen(a) => cmd_gen(a, io),
        Cmd::Groebner(a) => cmd_groebner(a, io),
        Cmd::Nulla(a) => cmd_nulla(a, io),
        Cmd::Verify(a) => cmd_verify(a, io),
        Cmd::Grassmann(a) => cmd_grassmann(a, io),
        Cmd::Citer(a) => cmd_citer(a, io),
        Cmd::EmitQmp(a) => cmd_emit_qmp(a, io),
        Cmd::Lasserre(a) => cmd_lasserre(a, io),
        Cmd::Sdp(a) => cmd_sdp(a, io),
    }
}

// ---------------------------------------------------------------------------
// Shared input helpers

fn parse_spec(s: &str) -> Result<ConstellationSpec, Failure> {
    s.parse::<ConstellationSpec>().map_err(usage)
}

fn read_system(io: &mut Io, path: &str) -> Result<PolySystem, Failure> {
    let text = io.read(path)?;
    let sys: PolySystem =
        serde_json::from_str(&text).map_err(|e| usage(format!("parsing system JSON: {e}")))?;
    sys.validate().map_err(|e| usage(format!("invalid system: {e}")))?;
    Ok(sys)
}

fn objective_choice(
    objective: Objective,
    promote_constraint: Option<usize>,
) -> (ObjectiveChoice, String) {
    match promote_constraint {
        Some(i) => (ObjectiveChoice::Constraint(i), format!("constraint:{i}")),
        None => match objective {
            Objective::Feasibility => (ObjectiveChoice::Feasibility, "feasibility".into()),
            Objective::FirstOrthogonality => {
                (ObjectiveChoice::FirstOrthogonality, "first_orthogonality".into())
            }
        },
    }
}

// ---------------------------------------------------------------------------
// gen

fn cmd_gen(args: GenArgs, io: &mut Io) -> Result<Run, Failure> {
    let spec = parse_spec(&args.spec)?;
    let is_1111_2 = spec.d() == 2 && spec.groups() == [1, 1, 1, 1];
    let is_5551_6 = spec.d() == 6 && spec.groups() == [5, 5, 5, 1];

    let sys = match args.param {
        Param::Density => {
            if !(spec.d() == 6 && spec.groups() == [5, 3, 3, 3]) {
                return Err(usage(format!(
                    "the density parameterization is implemented for 5,3,3,3@6 only, got {spec}"
                )));
            }
            let minors = match args.minors {
                Minors::Adjacent => MinorSet::Adjacent,
                Minors::All => MinorSet::All,
            };
            build_5333_6_density_with(minors)
        }
        Param::Vector => match args.gauge {
            Gauge::Generic => build_vector_system(&spec).map_err(usage)?,
            Gauge::Reduced => {
                if is_1111_2 {
                    build_1111_2()
                } else if is_5551_6 {
                    build_5551_6()
                } else {
                    return Err(usage(format!(
                        "no hand-reduced gauge system for {spec}; use --gauge generic"
                    )));
                }
            }
            Gauge::Auto => {
                if is_1111_2 {
                    build_1111_2()
                } else if is_5551_6 {
                    build_5551_6()
                } else {
                    build_vector_system(&spec).map_err(usage)?
                }
            }
        },
    };

    let text = serde_json::to_string_pretty(&sys).expect("system serializes") + "\n";
    io.write(&args.out, &text)?;
    let summary = json!({
        "spec": spec.to_string(),
        "nvars": sys.nvars,
        "constraints": sys.constraints.len(),
        "has_objective": sys.objective.is_some(),
        "out": args.out,
    });
    if args.out != "-" {
        emit_result(&summary);
    }
    Ok(Run::ok(summary))
}

// ---------------------------------------------------------------------------
// groebner

fn cmd_groebner(args: GroebnerArgs, io: &mut Io) -> Result<Run, Failure> {
    let sys = read_system(io, &args.input)?;
    let opts = BuchbergerOptions {
        order: args.order.to_core(),
        max_degree: args.max_degree,
        ..BuchbergerOptions::default()
    };
    let (gb, stats) = match groebner_basis(&sys.constraints, &opts) {
        Ok(r) => r,
        Err(e @ GroebnerError::DegreeCap { .. }) => {
            let out = json!({
                "reduced_basis": null,
                "resource_cap": {
                    "message": e.to_string(),
                    "max_degree": args.max_degree,
                    "order": args.order,
                },
            });
            emit_result(&out);
            return Ok(Run { exit: EXIT_RESOURCE, summary: out });
        }
        Err(e) => return Err(usage(e)),
    };
    let out = json!({
        "reduced_basis": gb.polynomials,
        "infeasible_over_C": basis_is_unit(&gb),
        "stats": stats,
        "order": args.order,
    });
    emit_result(&out);
    let summary = json!({
        "infeasible_over_C": basis_is_unit(&gb),
        "basis_len": gb.polynomials.len(),
        "stats": stats,
    });
    Ok(Run::ok(summary))
}

// ---------------------------------------------------------------------------
// nulla

fn cmd_nulla(args: NullaArgs, io: &mut Io) -> Result<Run, Failure> {
    let sys = read_system(io, &args.input)?;
    let group = match &args.group {
        None => None,
        Some(path) => {
            let text = io.read(path)?;
            let g: PermutationGroup = serde_json::from_str(&text)
                .map_err(|e| usage(format!("parsing group JSON: {e}")))?;
            Some(g)
        }
    };
    let caps = ResourceCaps {
        max_rows: args.max_rows,
        max_cols: args.max_cols,
        max_coeff_bits: args.max_coeff_bits,
    };
    let caps_json = json!({
        "max_rows": caps.max_rows,
        "max_cols": caps.max_cols,
        "max_coeff_bits": caps.max_coeff_bits,
    });

    match nulla_search_with(&sys.constraints, args.dmax, &caps, group.as_ref()) {
        Ok(Some(cert)) => {
            let stats = certificate_stats(&cert);
            if let Some(out_path) = &args.out {
                let text = serde_json::to_string_pretty(&cert).expect("certificate serializes") + "\n";
                io.write(out_path, &text)?;
            }
            let out = json!({
                "certificate": cert,
                "verified": true,
                "degree": cert.degree,
                "stats": stats,
                "dmax": args.dmax,
                "symmetric_search": group.is_some(),
            });
            // Avoid printing the certificate twice when --out is stdout.
            if args.out.as_deref() != Some("-") {
                emit_result(&out);
            }
            Ok(Run::ok(json!({
                "certificate_found": true,
                "degree": cert.degree,
                "stats": stats,
            })))
        }
        Ok(None) => {
            let out = json!({
                "certificate": null,
                "exhausted": { "dmax": args.dmax, "caps": caps_json },
                "symmetric_search": group.is_some(),
            });
            emit_result(&out);
            Ok(Run::negative(out))
        }
        Err(NullaError::Resource { message, last_completed_degree }) => {
            let out = json!({
                "certificate": null,
                "resource_cap": {
                    "message": message,
                    "last_completed_degree": last_completed_degree,
                    "dmax": args.dmax,
                    "caps": caps_json,
                },
            });
            emit_result(&out);
            Ok(Run { exit: EXIT_RESOURCE, summary: out })
        }
        Err(e) => Err(usage(e)),
    }
}

// ---------------------------------------------------------------------------
// verify

fn cmd_verify(args: VerifyArgs, io: &mut Io) -> Result<Run, Failure> {
    if args.sys == "-" && args.cert == "-" {
        return Err(usage("--sys and --cert cannot both read stdin"));
    }
    let sys = read_system(io, &args.sys)?;
    let cert_text = io.read(&args.cert)?;
    let cert: Certificate = serde_json::from_str(&cert_text)
        .map_err(|e| usage(format!("parsing certificate JSON: {e}")))?;

    let (verified, reason) = match mubcert_core::nulla::verify(&sys.constraints, &cert) {
        Ok(true) => (true, Value::Null),
        Ok(false) => (false, json!("cofactor combination is not the constant 1")),
        Err(e @ NullaError::CofactorCount { .. }) => (false, json!(e.to_string())),
        Err(e) => return Err(usage(e)),
    };
    let out = json!({
        "verified": verified,
        "degree": cert.degree,
        "reason": reason,
    });
    emit_result(&out);
    if verified {
        Ok(Run::ok(out))
    } else {
        Ok(Run::negative(out))
    }
}

// ---------------------------------------------------------------------------
// grassmann

#[derive(Deserialize)]
#[serde(untagged)]
enum BasesFile {
    Wrapped { bases: Vec<BasisEntries> },
    Bare(Vec<BasisEntries>),
}

/// One basis: a list of vectors, each a list of `[re, im]` entries.
type BasisEntries = Vec<Vec<[f64; 2]>>;

fn cmd_grassmann(args: GrassmannArgs, io: &mut Io) -> Result<Run, Failure> {
    let text = io.read(&args.bases)?;
    let file: BasesFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("parsing bases JSON: {e}")))?;
    let raw = match file {
        BasesFile::Wrapped { bases } => bases,
        BasesFile::Bare(b) => b,
    };
    if raw.is_empty() {
        return Err(usage("bases file contains no bases"));
    }

    let mut matrices = Vec::with_capacity(raw.len());
    for (b, basis) in raw.iter().enumerate() {
        let cols = basis.len();
        let rows = basis.first().map_or(0, Vec::len);
        if rows == 0 || basis.iter().any(|v| v.len() != rows) {
            return Err(usage(format!("basis {b}: vectors must be nonempty and equal-length")));
        }
        let m = DMatrix::from_fn(rows, cols, |i, j| Complex::new(basis[j][i][0], basis[j][i][1]));
        matrices.push(m);
    }

    let planes: Vec<_> = matrices
        .iter()
        .enumerate()
        .map(|(b, m)| basis_plane(m).map_err(|e| usage(format!("basis {b}: {e}"))))
        .collect::<Result<_, _>>()?;

    let mut pairs = Vec::new();
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let d2 = distance_sq(&planes[i], &planes[j]).map_err(usage)?;
            pairs.push(json!({ "i": i, "j": j, "d2": d2 }));
        }
    }
    let dbar2 = if planes.len() >= 2 {
        json!(avg_distance_sq(&planes).map_err(usage)?)
    } else {
        Value::Null
    };
    let out = json!({
        "d": matrices[0].nrows(),
        "bases": matrices.len(),
        "pairs": pairs,
        "dbar2": dbar2,
    });
    emit_result(&out);
    Ok(Run::ok(out))
}

// ---------------------------------------------------------------------------
// citer

fn cmd_citer(args: CiterArgs, io: &mut Io) -> Result<Run, Failure> {
    let spec = parse_spec(&args.spec)?;
    let (choice, choice_label) = objective_choice(args.objective, args.promote_constraint);
    let qmp = encode_constellation_qmp(&spec, choice).map_err(usage)?;
    let relax = build_relaxation(&qmp).map_err(usage)?;
    let opts = ConvexIterOptions {
        max_iter: args.max_iter,
        tol: args.tol,
        init: match args.seed {
            Some(seed) => FantopeInit::RandomProjector { seed },
            None => FantopeInit::Zero,
        },
        sdp: SdpOptions { tol: args.sdp_tol, ..SdpOptions::default() },
    };

    let base = json!({
        "spec": spec.to_string(),
        "objective": choice_label,
        "seed": args.seed,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "size": relax.size,
        "rank_bound": relax.rank_bound,
    });
    let mut out = base.as_object().expect("object").clone();

    let state = match convex_iteration(&relax, &opts) {
        Ok(s) => s,
        Err(e) => {
            // The inner SDP declared the weighted subproblem infeasible (or
            // broke down): a negative result for this seed, not a usage error.
            out.insert("status".into(), json!("failed"));
            out.insert("error".into(), json!(e.to_string()));
            let out = Value::Object(out);
            emit_result(&out);
            return Ok(Run::negative(out));
        }
    };

    let status = match state.status {
        ConvexIterStatus::Converged => "converged",
        ConvexIterStatus::Stalled => "stalled",
    };
    let mu_check = match state.extracted.as_ref() {
        None => Value::Null,
        Some(x) => {
            let states = decode_states(&spec, x).map_err(usage)?;
            json!(check_mu(&states, args.mu_tol).map_err(usage)?)
        }
    };
    out.insert("status".into(), json!(status));
    out.insert("iterations".into(), json!(state.iterations));
    out.insert("tau".into(), json!(state.tau_history));
    out.insert(
        "tau_final".into(),
        json!(state.tau_history.last().copied().unwrap_or(f64::NAN)),
    );
    out.insert("mu_check".into(), mu_check);
    let out = Value::Object(out);

    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&out).expect("trace serializes") + "\n";
        io.write(path, &text)?;
    }
    if args.out.as_deref() != Some("-") {
        emit_result(&out);
    }

    let summary = json!({
        "status": status,
        "iterations": state.iterations,
        "tau_final": state.tau_history.last().copied().unwrap_or(f64::NAN),
    });
    match state.status {
        ConvexIterStatus::Converged => Ok(Run::ok(summary)),
        ConvexIterStatus::Stalled => Ok(Run::negative(summary)),
    }
}

// ---------------------------------------------------------------------------
// emit-qmp

fn cmd_emit_qmp(args: EmitQmpArgs, io: &mut Io) -> Result<Run, Failure> {
    let spec = parse_spec(&args.spec)?;
    let (choice, choice_label) = objective_choice(args.objective, args.promote_constraint);
    let qmp = encode_constellation_qmp(&spec, choice).map_err(usage)?;
    let relax = build_relaxation(&qmp).map_err(usage)?;
    let problem = relax.to_sdp_problem().map_err(usage)?;
    let comments = vec![
        format!("constellation {spec}, objective {choice_label}"),
        format!(
            "rank bound r = {} on the lifted {}x{} variable (rank-free relaxation; \
             the bound is enforced by convex iteration, not encoded here)",
            relax.rank_bound, relax.size, relax.size
        ),
    ];
    let text = emit_sdpa_string(&problem, &comments).map_err(usage)?;
    io.write(&args.out, &text)?;
    let summary = json!({
        "spec": spec.to_string(),
        "size": relax.size,
        "rank_bound": relax.rank_bound,
        "constraints": problem.constraints.len(),
        "objective": choice_label,
        "out": args.out,
    });
    if args.out != "-" {
        emit_result(&summary);
    }
    Ok(Run::ok(summary))
}

// ---------------------------------------------------------------------------
// lasserre

fn cmd_lasserre(args: LasserreArgs, io: &mut Io) -> Result<Run, Failure> {
    let mut sys = read_system(io, &args.input)?;
    if let Some(idx) = args.promote_squared {
        sys = promote_squared_objective(&sys, idx).map_err(usage)?;
    }
    let objective = sys
        .objective
        .clone()
        .unwrap_or_else(|| Polynomial::zero(sys.nvars));
    let relax =
        build_moment_relaxation(&objective, &sys.constraints, args.order).map_err(usage)?;
    let meta = relax.meta();

    if let Some(path) = &args.emit {
        let comments = vec![format!(
            "moment relaxation of {}, order {}",
            sys.spec, args.order
        )];
        let text = emit_sdpa_string(relax.sdp(), &comments).map_err(usage)?;
        io.write(path, &text)?;
        let summary = json!({ "meta": meta, "out": path });
        if path != "-" {
            emit_result(&summary);
        }
        return Ok(Run::ok(summary));
    }

    if !args.solve {
        let out = json!({ "meta": meta });
        emit_result(&out);
        return Ok(Run::ok(out));
    }

    let opts = SdpOptions { tol: args.tol, max_iter: args.max_iter, ..SdpOptions::default() };
    let sol = relax.solve(&opts).map_err(usage)?;
    let out = json!({
        "bound": sol.primal_value,
        "status": sol.status,
        "eq_residual": sol.eq_residual,
        "duality_gap": sol.duality_gap,
        "iterations": sol.iterations,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "meta": meta,
    });
    emit_result(&out);
    match sol.status {
        SdpStatus::Optimal => Ok(Run::ok(out)),
        _ => Ok(Run::negative(out)),
    }
}

// ---------------------------------------------------------------------------
// sdp

fn cmd_sdp(args: SdpArgs, io: &mut Io) -> Result<Run, Failure> {
    let text = io.read(&args.input)?;
    let label = if args.input == "-" { "<stdin>" } else { &args.input };
    let problem = parse_sdpa_str(&text, label).map_err(usage)?;
    let opts = SdpOptions { tol: args.tol, max_iter: args.max_iter, ..SdpOptions::default() };
    let sol = solve_sdp(&problem, &opts).map_err(usage)?;
    let out = json!({
        "primal_value": sol.primal_value,
        "dual_value": sol.dual_value,
        "eq_residual": sol.eq_residual,
        "min_eigenvalue": sol.min_eigenvalue,
        "duality_gap": sol.duality_gap,
        "iterations": sol.iterations,
        "status": sol.status,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "blocks": problem.blocks,
        "constraints": problem.constraints.len(),
    });
    emit_result(&out);
    match sol.status {
        SdpStatus::Optimal => Ok(Run::ok(out)),
        _ => Ok(Run::negative(out)),
    }
}
