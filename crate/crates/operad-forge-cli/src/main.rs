//! Batch front end: one verb per run, line-oriented JSON on stdout.
//! Exit codes: 0 success, 1 verification failure, 2 invalid input.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

use operad_forge::coderivation::sl2_matrix_example;

/// Stdout writes; a closed reader ends the run quietly instead of panicking.
macro_rules! out {
    ($($arg:tt)*) => { write_stdout(format_args!($($arg)*), false) };
}

macro_rules! outln {
    ($($arg:tt)*) => { write_stdout(format_args!($($arg)*), true) };
}
use operad_forge::oc_morphism::phi_basis;
use operad_forge::tree::codim_counts;
use operad_forge::{
    check_chain_map, check_equivalence, check_module_morphism, d_sum, d_tree, enumerate_planar_rooted,
    enumerate_spatial_rooted, euler_by_dimension, l_corolla, n_corolla, verify_oc_relations, ChainComplex, CheckReport,
    ForgeError, FormalSum, Structure, Tree,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Verb {
    Enumerate,
    Fvector,
    Betti,
    Diff,
    DSquared,
    VerifyOcha,
    VerifyMu,
    VerifyOc,
    ExportDot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Table,
}

#[derive(Parser, Debug)]
#[command(name = "operad-forge", about = "Trees, differentials and cohomology of the open-closed tree operad")]
struct Cli {
    verb: Verb,
    /// Spatial leaves of a planar-rooted signature.
    #[arg(long)]
    p: Option<usize>,
    /// Planar leaves of a planar-rooted signature.
    #[arg(long)]
    q: Option<usize>,
    /// Leaves of a spatial-rooted signature.
    #[arg(long)]
    n: Option<usize>,
    /// Bound on 2p + q for the verification suites.
    #[arg(long)]
    max_arity: Option<usize>,
    /// Word-length truncation for verify-ocha.
    #[arg(long, default_value_t = 4)]
    max_word: usize,
    /// Defaults to dot for export-dot and json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Tree, formal sum or structure JSON.
    #[arg(long)]
    input: Option<PathBuf>,
}

enum Failure {
    Verification,
    Input(String),
}

impl From<ForgeError> for Failure {
    fn from(e: ForgeError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// The planar or spatial signature named by the flags.
enum Signature {
    Planar(usize, usize),
    Spatial(usize),
}

fn signature(cli: &Cli) -> std::result::Result<Signature, Failure> {
    match (cli.p, cli.q, cli.n) {
        (_, _, Some(n)) if cli.p.is_none() && cli.q.is_none() => Ok(Signature::Spatial(n)),
        (Some(p), q, None) => Ok(Signature::Planar(p, q.unwrap_or(0))),
        (None, Some(q), None) => Ok(Signature::Planar(0, q)),
        _ => Err(Failure::Input("give --p/--q for planar-rooted trees or --n for spatial-rooted trees".into())),
    }
}

fn read_input(cli: &Cli) -> std::result::Result<Option<Value>, Failure> {
    let Some(path) = &cli.input else { return Ok(None) };
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map(Some).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// A formal sum or a single tree (taken with its canonicalization sign).
fn parse_sum(v: &Value) -> std::result::Result<FormalSum, Failure> {
    if v.get("terms").is_some() {
        return Ok(FormalSum::from_json(v)?);
    }
    let (s, t) = Tree::from_json(v)?;
    Ok(FormalSum::from_tree(&t).scale(&operad_forge::rat(s as i64)))
}

/// The input sum, or the corolla of the given signature.
fn subject(cli: &Cli) -> std::result::Result<FormalSum, Failure> {
    if let Some(v) = read_input(cli)? {
        return parse_sum(&v);
    }
    let t = match signature(cli)? {
        Signature::Planar(p, q) => {
            if 2 * p + q < 2 {
                return Err(ForgeError::InvalidSignature { p, q }.into());
            }
            n_corolla(p, q)
        }
        Signature::Spatial(n) => {
            if n < 2 {
                return Err(ForgeError::InvalidArity(format!("l_{n} needs n >= 2")).into());
            }
            l_corolla(n)
        }
    };
    Ok(FormalSum::from_tree(&t))
}

fn trees_of(sig: &Signature) -> std::result::Result<Vec<Tree>, Failure> {
    Ok(match *sig {
        Signature::Planar(p, q) => enumerate_planar_rooted(p, q, None)?,
        Signature::Spatial(n) => enumerate_spatial_rooted(n)?,
    })
}

fn complex_of(sig: &Signature) -> std::result::Result<ChainComplex, Failure> {
    Ok(match *sig {
        Signature::Planar(p, q) => ChainComplex::planar(p, q)?,
        Signature::Spatial(n) => ChainComplex::spatial(n)?,
    })
}

fn sig_json(sig: &Signature) -> Value {
    match *sig {
        Signature::Planar(p, q) => json!({ "p": p, "q": q }),
        Signature::Spatial(n) => json!({ "n": n }),
    }
}

fn format(cli: &Cli) -> Format {
    cli.format.unwrap_or(if cli.verb == Verb::ExportDot { Format::Dot } else { Format::Json })
}

fn write_stdout(args: std::fmt::Arguments, newline: bool) {
    let mut stdout = io::stdout().lock();
    let written = stdout.write_fmt(args).and_then(|()| if newline { stdout.write_all(b"\n") } else { Ok(()) });
    match written {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn emit(v: &Value) {
    outln!("{v}");
}

fn emit_sum_table(x: &FormalSum) {
    for (t, c) in x.iter() {
        outln!("{c:>8}  {t}");
    }
}

fn enumerate(cli: &Cli) -> Outcome {
    let sig = signature(cli)?;
    for (k, t) in trees_of(&sig)?.iter().enumerate() {
        match format(cli) {
            Format::Json => emit(&json!({ "tree": t.to_json(), "codim": t.internal_edges(), "degree": t.degree() })),
            Format::Table => outln!("{k:>5}  {:>2}  {:>3}  {t}", t.internal_edges(), t.degree()),
            Format::Dot => out!("{}", t.to_dot(&format!("t{k}"))),
        }
    }
    Ok(())
}

fn fvector(cli: &Cli) -> Outcome {
    let sig = signature(cli)?;
    let f = codim_counts(&trees_of(&sig)?);
    let top = match sig {
        Signature::Planar(p, q) => 2 * p + q - 2,
        Signature::Spatial(n) => 2 * n - 3,
    };
    let euler = euler_by_dimension(&f, top);
    match format(cli) {
        Format::Table => {
            for (k, c) in f.iter().enumerate() {
                outln!("codim {k}: {c}");
            }
            outln!("euler: {euler}");
        }
        _ => {
            let mut v = sig_json(&sig);
            v["f_vector"] = json!(f);
            v["euler"] = json!(euler);
            emit(&v);
        }
    }
    Ok(())
}

fn betti(cli: &Cli) -> Outcome {
    let b = complex_of(&signature(cli)?)?.betti();
    match format(cli) {
        Format::Table => b.iter().enumerate().for_each(|(m, x)| outln!("H^{m}: {x}")),
        _ => emit(&json!({ "betti": b })),
    }
    Ok(())
}

fn diff(cli: &Cli) -> Outcome {
    let x = subject(cli)?;
    let dx = d_sum(&x);
    match format(cli) {
        Format::Table => emit_sum_table(&dx),
        _ => emit(&dx.to_json()),
    }
    Ok(())
}

fn d_squared(cli: &Cli) -> Outcome {
    let trees = if cli.input.is_some() {
        subject(cli)?.iter().map(|(t, _)| t.clone()).collect()
    } else {
        trees_of(&signature(cli)?)?
    };
    let failures: Vec<Value> = trees.iter().filter(|t| !d_sum(&d_tree(t)).is_zero()).map(Tree::to_json).collect();
    emit(&json!({ "check": "d_squared", "checked": trees.len(), "failures": failures }));
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn verify_ocha(cli: &Cli) -> Outcome {
    let s = match read_input(cli)? {
        Some(v) => Structure::from_json(&v)?,
        None => sl2_matrix_example(),
    };
    let report = check_equivalence(&s, cli.max_word)?;
    emit(&report.to_json());
    if report.equivalent() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn finish(reports: &[CheckReport], cli: &Cli) -> Outcome {
    for r in reports {
        match format(cli) {
            Format::Table => outln!(
                "{:<18} bound {:>2}  checked {:>5}  literal {:>5}  class {:>4}  failures {:>3}",
                r.check,
                r.bound,
                r.checked,
                r.literal,
                r.class_level,
                r.failures.len()
            ),
            _ => emit(&r.to_json()),
        }
    }
    if reports.iter().all(CheckReport::passed) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn verify_mu(cli: &Cli) -> Outcome {
    let bound = cli.max_arity.unwrap_or(6);
    let chain = check_chain_map(bound)?;
    let module = check_module_morphism(bound)?;
    let mut phi_ok = true;
    let mut ranks = Vec::new();
    for p in 0..=3usize {
        for q in 0..=2usize {
            if 2 * p + q < 2 || 2 * p + q > bound {
                continue;
            }
            let basis = phi_basis(p, q)?;
            let complex = ChainComplex::planar(p, q)?;
            let r = basis.ranks(&complex)?;
            let b = complex.betti();
            let ok = basis.all_cocycles() && r == b;
            phi_ok &= ok;
            ranks.push(json!({ "p": p, "q": q, "ranks": r, "betti": b, "ok": ok }));
        }
    }
    let outcome = finish(&[chain, module], cli);
    match format(cli) {
        Format::Table => outln!("phi_basis          ranks match betti: {phi_ok}"),
        _ => emit(&json!({ "check": "phi_basis", "bound": bound, "signatures": ranks, "passed": phi_ok })),
    }
    if phi_ok {
        outcome
    } else {
        Err(Failure::Verification)
    }
}

fn verify_oc(cli: &Cli) -> Outcome {
    finish(&[verify_oc_relations(cli.max_arity.unwrap_or(6))?], cli)
}

fn export_dot(cli: &Cli) -> Outcome {
    let x = subject(cli)?;
    for (k, (t, c)) in x.iter().enumerate() {
        let dot = t.to_dot(&format!("term{k} ({c})"));
        match format(cli) {
            Format::Json => emit(&json!({ "coef": c.to_string(), "tree": t.to_json(), "dot": dot })),
            _ => out!("{dot}"),
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    match cli.verb {
        Verb::Enumerate => enumerate(cli),
        Verb::Fvector => fvector(cli),
        Verb::Betti => betti(cli),
        Verb::Diff => diff(cli),
        Verb::DSquared => d_squared(cli),
        Verb::VerifyOcha => verify_ocha(cli),
        Verb::VerifyMu => verify_mu(cli),
        Verb::VerifyOc => verify_oc(cli),
        Verb::ExportDot => export_dot(cli),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 and usage text on unknown verbs and flags.
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
