use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use ncclab::circuit::{classify_gates, node_polynomials, parse_circuit, to_json, Circuit, CircuitError, NodeId};
use ncclab::corpus::{self, CorpusError, CorpusLimits};
use ncclab::freealgebra::{Alphabet, Degree, Field, NcPoly};
use ncclab::hardpoly::{naive_circuit, palindrome_poly, HardPolyError, HardPolySpec};
use ncclab::nisan::{self, build_matrix, check_all_gates, rank as matrix_rank, GateCheck, NisanError, RankCache};
use ncclab::normalize::{normalize, NormalizeError};
use ncclab::pathtrace::{trace_path, verify_trace, TraceConfig, TraceError};
use ncclab::ringtrans::{check_function_agreement, seeded_samples, translate, RingError};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use crate::report::{emit, sha256_hex, to_pretty, write_file, Failure, RunManifest};

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a circuit file and report its shape.
    Parse(ParseArgs),
    /// Compute the polynomial at the output (or any node).
    Eval(EvalArgs),
    /// Normalize a field circuit.
    Normalize(NormalizeArgs),
    /// Coefficient-matrix rank, optionally with the per-gate inequalities.
    Rank(RankArgs),
    /// Backward path trace on a normalized circuit.
    Trace(TraceArgs),
    /// Palindrome polynomial and its naive circuit.
    Hardpoly(HardpolyArgs),
    /// Translate a ring circuit into a field circuit.
    Translate(TranslateArgs),
    /// Check that a ring circuit computes a given polynomial as a function.
    VerifyRing(VerifyRingArgs),
    /// Generate a deterministic circuit corpus with a ledger.
    Corpus(CorpusArgs),
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    node: Option<NodeId>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NormalizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    #[arg(long)]
    node: Option<NodeId>,
    #[arg(long)]
    check_gates: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = TraceConfig::DEFAULT_C)]
    c: u64,
    /// Rational in `p/q` form.
    #[arg(long, default_value = "1/4")]
    alpha: String,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HardpolyArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    d: usize,
    /// `Q` or `GF(p)`.
    #[arg(long, default_value = "Q")]
    field: String,
    #[arg(long)]
    emit_circuit: Option<PathBuf>,
    /// Writes the polynomial in text form.
    #[arg(long)]
    emit_poly: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TranslateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyRingArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Polynomial over the X variables, in text form.
    #[arg(long)]
    f: PathBuf,
    #[arg(long, default_value_t = 8)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out_dir: PathBuf,
    /// Emit ring circuits with cancelling Z-noise.
    #[arg(long)]
    ring: bool,
    #[arg(long, default_value_t = CorpusLimits::default().max_n)]
    max_n: u32,
    #[arg(long, default_value_t = CorpusLimits::default().max_degree)]
    max_degree: usize,
    #[arg(long, default_value_t = CorpusLimits::default().max_nodes)]
    max_nodes: usize,
}

pub fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Parse(a) => parse_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Normalize(a) => normalize_cmd(a),
        Command::Rank(a) => rank_cmd(a),
        Command::Trace(a) => trace_cmd(a),
        Command::Hardpoly(a) => hardpoly_cmd(a),
        Command::Translate(a) => translate_cmd(a),
        Command::VerifyRing(a) => verify_ring_cmd(a),
        Command::Corpus(a) => corpus_cmd(a),
    }
}

fn domain<E: Display>(e: E) -> Failure {
    Failure::domain(e)
}

fn from_normalize(e: NormalizeError) -> Failure {
    match e {
        NormalizeError::Defect(_) => Failure::defect(e),
        _ => Failure::domain(e),
    }
}

fn from_trace(e: TraceError) -> Failure {
    match e {
        TraceError::Defect { .. } => Failure::defect(e),
        _ => Failure::domain(e),
    }
}

fn from_ring(e: RingError) -> Failure {
    match e {
        RingError::Defect(_) => Failure::defect(e),
        _ => Failure::domain(e),
    }
}

fn load_circuit(manifest: &mut RunManifest, path: &Path) -> Result<Circuit, Failure> {
    let text = manifest.read_input(path)?;
    parse_circuit(&text).map_err(|e: CircuitError| Failure::domain(format!("{}: {e}", path.display())))
}

fn check_node(c: &Circuit, node: NodeId) -> Result<(), Failure> {
    if node >= c.len() {
        return Err(Failure::domain(format!("node {node} out of range (circuit has {})", c.len())));
    }
    Ok(())
}

fn degree_of(p: &NcPoly) -> Option<usize> {
    match p.degree() {
        Degree::NegInfinity => None,
        Degree::Finite(k) => Some(k),
    }
}

#[derive(Serialize)]
struct ParseResult {
    field: String,
    x_vars: u32,
    z_vars: u32,
    field_circuit: bool,
    output: NodeId,
    size: usize,
    depth: usize,
    counts: ncclab::circuit::GateCounts,
    /// The file is byte-identical to the canonical serialization.
    canonical: bool,
}

fn parse_cmd(args: ParseArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("parse", json!({}));
    let text = manifest.read_input(&args.input)?;
    let c = parse_circuit(&text).map_err(|e| Failure::domain(format!("{}: {e}", args.input.display())))?;
    let polys = node_polynomials(&c).map_err(domain)?;
    let result = ParseResult {
        field: c.field().to_string(),
        x_vars: c.alphabet().x,
        z_vars: c.alphabet().z,
        field_circuit: c.is_field_circuit(),
        output: c.output(),
        size: c.size(),
        depth: c.depth(),
        counts: classify_gates(&c, &polys).counts,
        canonical: to_json(&c) == text,
    };
    manifest.outcome = format!("{} nodes", c.len());
    emit(&manifest, &result, args.report.as_ref())
}

fn eval_cmd(args: EvalArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("eval", json!({ "node": args.node }));
    let c = load_circuit(&mut manifest, &args.input)?;
    let node = args.node.unwrap_or(c.output());
    check_node(&c, node)?;
    let polys = node_polynomials(&c).map_err(domain)?;
    let p = &polys[node];
    manifest.outcome = format!("{} terms", p.len());
    let result = json!({
        "node": node,
        "field": c.field().to_string(),
        "degree": degree_of(p),
        "terms": p.len(),
        "polynomial": p.to_string(),
    });
    emit(&manifest, &result, args.report.as_ref())
}

fn normalize_cmd(args: NormalizeArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("normalize", json!({}));
    let c = load_circuit(&mut manifest, &args.input)?;
    let (out, report) = normalize(&c).map_err(from_normalize)?;
    if !report.semantics_preserved || !report.properties.all() {
        return Err(Failure::defect("normalized circuit fails its postconditions"));
    }
    write_file(&args.out, &to_json(&out))?;
    manifest.outcome = format!(
        "{} -> {} nodes, {} -> {} non-scalar products",
        report.before.nodes, report.after.nodes, report.before.nonscalar_products, report.after.nonscalar_products
    );
    emit(&manifest, &report, args.report.as_ref())
}

fn rank_cmd(args: RankArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new(
        "rank",
        json!({ "a": args.a, "b": args.b, "node": args.node, "check_gates": args.check_gates }),
    );
    let c = load_circuit(&mut manifest, &args.input)?;
    let polys = node_polynomials(&c).map_err(domain)?;
    let mut cache = RankCache::new(&polys);
    let node = args.node.unwrap_or(c.output());
    check_node(&c, node)?;
    let m = cache.matrix(node, args.a, args.b).map_err(domain)?;
    let r = matrix_rank(&m);
    let mut result = json!({
        "node": node,
        "a": args.a,
        "b": args.b,
        "rows": m.rows().to_string(),
        "cols": m.cols().to_string(),
        "nonzeros": m.nnz(),
        "rank": r.rank,
    });
    manifest.outcome = format!("rank {}", r.rank);
    let mut violations = 0;
    if args.check_gates {
        let gates: Vec<GateCheck> = check_all_gates(&c, &mut cache, args.a, args.b).map_err(|e| match e {
            NisanError::NonzeroConstantTerm { .. } => Failure::domain(format!("{e}; normalize first")),
            other => Failure::domain(other),
        })?;
        violations = gates.iter().filter(|g| !g.ok()).count();
        manifest.outcome = format!("rank {}, {} gate checks, {violations} violations", r.rank, gates.len());
        result["violations"] = json!(violations);
        result["gates"] = serde_json::to_value(&gates).expect("gate checks serialize");
    }
    emit(&manifest, &result, args.report.as_ref())?;
    if violations > 0 {
        return Err(Failure::defect(format!("{violations} gate inequality violations")));
    }
    Ok(())
}

fn trace_cmd(args: TraceArgs) -> Result<(), Failure> {
    let alpha: BigRational = args
        .alpha
        .parse()
        .map_err(|_| Failure::domain(format!("alpha must be a rational p/q, got `{}`", args.alpha)))?;
    let mut manifest = RunManifest::new("trace", json!({ "d": args.d, "c": args.c, "alpha": alpha.to_string() }));
    let c = load_circuit(&mut manifest, &args.input)?;
    let cfg = TraceConfig::with_constants(args.d, c.alphabet().x, args.c, alpha).map_err(from_trace)?;
    manifest.config["n"] = json!(cfg.n);
    manifest.config["field"] = json!(c.field().to_string());
    let trace = trace_path(&c, &cfg).map_err(from_trace)?;
    let verification = verify_trace(&trace, &c, &cfg).map_err(from_trace)?;
    manifest.outcome = format!(
        "t = {}, witness {}, verification {}",
        trace.t,
        trace.witness.len(),
        if verification.passed { "passed" } else { "FAILED" }
    );
    emit(&manifest, &json!({ "trace": trace, "verification": verification }), args.report.as_ref())?;
    if !verification.passed {
        let names: Vec<String> = verification.failures().map(|f| f.name.clone()).collect();
        return Err(Failure::defect(format!("trace verification failed: {}", names.join(", "))));
    }
    Ok(())
}

fn hardpoly_cmd(args: HardpolyArgs) -> Result<(), Failure> {
    let field: Field = args.field.parse().map_err(domain)?;
    let guard = nisan::guard_entries();
    let mut manifest = RunManifest::new(
        "hardpoly",
        json!({ "n": args.n, "d": args.d, "field": field.to_string(), "guard_entries": guard.to_string() }),
    );
    let hard = |e: HardPolyError| Failure::domain(e);
    let spec = HardPolySpec::new(args.n, args.d).map_err(hard)?;
    let f = palindrome_poly(spec, field, guard).map_err(hard)?;
    let half = args.d / 2;
    let m = build_matrix(&f, half, half).map_err(domain)?;
    let r = matrix_rank(&m);
    let expected = spec.side();
    let full = r.rank as u128 == expected;
    if let Some(path) = &args.emit_circuit {
        write_file(path, &to_json(&naive_circuit(spec, field, guard).map_err(hard)?))?;
    }
    if let Some(path) = &args.emit_poly {
        write_file(path, &f.to_text())?;
    }
    manifest.outcome = format!("rank {} of {expected}", r.rank);
    let result = json!({
        "terms": f.len(),
        "rank": r.rank,
        "expected_rank": expected.to_string(),
        "full_rank": full,
    });
    emit(&manifest, &result, args.report.as_ref())?;
    if !full {
        return Err(Failure::defect(format!("rank {} differs from n^(d/2) = {expected}", r.rank)));
    }
    Ok(())
}

fn translate_cmd(args: TranslateArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("translate", json!({}));
    let rc = load_circuit(&mut manifest, &args.input)?;
    let (out, report) = translate(&rc).map_err(from_ring)?;
    write_file(&args.out, &to_json(&out))?;
    manifest.outcome = format!("{} nodes translated", out.len());
    emit(&manifest, &report, args.report.as_ref())
}

fn verify_ring_cmd(args: VerifyRingArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("verify-ring", json!({ "samples": args.samples, "seed": args.seed }));
    let rc = load_circuit(&mut manifest, &args.input)?;
    let f_text = manifest.read_input(&args.f)?;
    let f = NcPoly::parse_text(&f_text, Alphabet::x_only(rc.alphabet().x)).map_err(domain)?;
    manifest.config["field"] = json!(rc.field().to_string());
    let m = rc.alphabet().z.max(1);
    let samples = seeded_samples(args.seed, rc.field(), rc.alphabet().x, m, args.samples);
    let report = check_function_agreement(&rc, &f, &samples).map_err(from_ring)?;
    manifest.outcome = if report.agrees { "agrees".into() } else { "disagrees".into() };
    emit(&manifest, &report, args.report.as_ref())?;
    if !report.agrees {
        return Err(Failure::domain("the ring circuit does not compute f"));
    }
    Ok(())
}

#[derive(Serialize)]
struct LedgerLine {
    file: String,
    sha256: String,
    polynomial_sha256: String,
    #[serde(flatten)]
    entry: corpus::CorpusEntry,
}

fn corpus_cmd(args: CorpusArgs) -> Result<(), Failure> {
    let limits = CorpusLimits {
        max_n: args.max_n,
        max_degree: args.max_degree,
        max_nodes: args.max_nodes,
    };
    let mut manifest = RunManifest::new(
        "corpus",
        json!({ "seed": args.seed, "count": args.count, "ring": args.ring, "limits": limits }),
    );
    limits.validate().map_err(domain)?;
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::domain(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let mut lines = Vec::with_capacity(args.count);
    for i in 0..args.count {
        let c = if args.ring {
            corpus::generate_ring_circuit(args.seed, i, limits)
        } else {
            corpus::generate_circuit(args.seed, i, limits)
        }
        .map_err(|e: CorpusError| Failure::domain(e))?;
        let text = to_json(&c);
        let file = format!("c{i:04}.json");
        write_file(&args.out_dir.join(&file), &text)?;
        let entry = corpus::describe(i, &c).map_err(domain)?;
        lines.push(LedgerLine {
            file,
            sha256: sha256_hex(text.as_bytes()),
            polynomial_sha256: sha256_hex(entry.polynomial.as_bytes()),
            entry,
        });
    }
    let ledger_hash = sha256_hex(to_pretty(&lines).as_bytes());
    manifest.outcome = format!("{} circuits, ledger {ledger_hash}", lines.len());
    let result = json!({ "entries": lines, "ledger_hash": ledger_hash });
    emit(&manifest, &result, Some(&args.out_dir.join("ledger.json")))
}
