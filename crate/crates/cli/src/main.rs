//! `monomialize`: reads problem documents, runs the engine and emits
//! certificates, transformation scripts and blow-up trees.

use clap::{Parser, Subcommand, ValueEnum};
use monomialize_core::doc::{self, Certificate, OptionsDoc, ProblemDoc};
use monomialize_core::driver::{self, MonomialForm};
use monomialize_core::linalg::{fmt_q, Q};
use monomialize_core::prepared::{decompose, is_algebraic, Payload, PreparedPair, Transformation};
use monomialize_core::toric::{self, TransformSeq};
use monomialize_core::valgroup::{self, GroupValue};
use monomialize_core::Error;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_IO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_TRUNCATION: u8 = 3;
const EXIT_FIELD: u8 = 4;
const EXIT_ITERATION: u8 = 5;
const EXIT_VERIFY: u8 = 6;
const EXIT_UNSUPPORTED: u8 = 7;

#[derive(Parser)]
#[command(name = "monomialize", version, about = "Local monomialization of prepared germs along a monomial valuation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Lower every series to precision N.
    #[arg(long, global = true, value_name = "N")]
    trunc: Option<i64>,
    /// Bound on the number of type-raising steps.
    #[arg(long, global = true, value_name = "K")]
    max_steps: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Json)]
    emit: Emit,
    /// Write the artifact here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem document and print its type (s,r,l).
    Validate { problem: PathBuf },
    /// Monomialize and emit the certificate.
    Run { problem: PathBuf },
    /// Replay a certificate against its problem.
    Verify { problem: PathBuf, certificate: PathBuf },
    /// Split each x-series by class modulo the lattice of C.
    Decompose { problem: PathBuf },
    /// Reduce each dependent y-weight to zero by blow-ups.
    Perron { problem: PathBuf },
    /// Principalize the monomial ideal in `options.generators`.
    Principalize { problem: PathBuf },
    /// Kill the next-to-leading coefficient along `options.var`.
    Tschirnhaus { problem: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Text,
    Dot,
}

/// A failure with its exit code.
struct Fail {
    code: u8,
    msg: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail { code: exit_code(&e), msg: e.to_string() }
    }
}

/// Exit code of every engine error.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::InvalidPreparedForm(_)
        | Error::RankMismatch { .. }
        | Error::RankDeficient
        | Error::NotDependent(_)
        | Error::NotIndependent(_)
        | Error::InvalidOrder(_) => EXIT_INPUT,
        Error::TruncationExhausted(_) => EXIT_TRUNCATION,
        Error::FieldExtensionRequired { .. } => EXIT_FIELD,
        Error::IterationLimit(_) | Error::InstanceTooLarge(_) => EXIT_ITERATION,
        Error::Unsupported(_)
        | Error::NotAUnit
        | Error::NotRepresentable(_)
        | Error::InvalidTransformation(_)
        | Error::NotApplicable(_) => EXIT_UNSUPPORTED,
    }
}

type Out<T> = std::result::Result<T, Fail>;

fn read(path: &Path) -> Out<String> {
    std::fs::read_to_string(path).map_err(|e| Fail { code: EXIT_IO, msg: format!("{}: {e}", path.display()) })
}

fn load(cli: &Cli, path: &Path) -> Out<(PreparedPair, Option<OptionsDoc>)> {
    let d: ProblemDoc = doc::parse_problem(&read(path)?)?;
    let mut p = doc::problem_of(&d)?;
    if let Some(n) = cli.trunc {
        if n < 1 {
            return Err(Fail { code: EXIT_INPUT, msg: "--trunc must be positive".into() });
        }
        let n = Q::from_integer(n.into());
        p.trunc = n.clone();
        p.xseries = p.xseries.iter().map(|g| g.truncate(&n)).collect();
    }
    Ok((p, d.options))
}

fn emit(cli: &Cli, text: &str) -> Out<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Fail { code: EXIT_IO, msg: format!("{}: {e}", path.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn kind_str((s, r, l): (usize, usize, usize)) -> String {
    format!("({s},{r},{l})")
}

fn json_only(cli: &Cli, what: &str) -> Out<()> {
    if cli.emit != Emit::Json {
        return Err(Fail { code: EXIT_INPUT, msg: format!("{what} emits json only") });
    }
    Ok(())
}

fn cmd_validate(cli: &Cli, path: &Path) -> Out<()> {
    let (p, _) = load(cli, path)?;
    println!("{}", kind_str(p.kind()));
    Ok(())
}

fn cmd_run(cli: &Cli, path: &Path) -> Out<()> {
    let (p, opts) = load(cli, path)?;
    let max_steps = cli.max_steps.or(opts.and_then(|o| o.max_steps));
    let mf = driver::run(&p, max_steps)?;
    let text = match cli.emit {
        Emit::Json => doc::to_json(&doc::certificate_doc(&p, mf.certificate())),
        Emit::Text => script(&mf),
        Emit::Dot => dot(&p, mf.certificate()),
    };
    emit(cli, &text)
}

/// One line per transformation: index, type tag and the type after it.
fn script(mf: &MonomialForm) -> String {
    let mut out = String::new();
    for (k, t) in mf.certificate().iter().enumerate() {
        writeln!(out, "{} type {} {}", k + 1, t.tag(), kind_str(t.post.kind())).unwrap();
    }
    out
}

/// Elementary blow-ups of a payload, each with the side it acts on.
fn blowups(p: &Payload) -> Vec<(char, &TransformSeq)> {
    let mut v = Vec::new();
    match p {
        Payload::Type1 { seq } | Payload::Type6 { seq, .. } => v.push(('y', seq)),
        Payload::Type2 { xseq, yseq } => {
            v.push(('x', xseq));
            v.push(('y', yseq));
        }
        Payload::Type4 { lift, .. } | Payload::Type9 { lift, .. } => {
            v.push(('x', &lift.xseq));
            if let Some((seq, _)) = &lift.ypre {
                v.push(('y', seq));
            }
            v.push(('y', &lift.ypost));
        }
        _ => {}
    }
    v
}

/// The blow-up tree: charts are nodes labeled by the type, elementary
/// blow-ups are edges labeled `(i,j)`; other coordinate changes are dashed.
fn dot(p: &PreparedPair, cert: &[Transformation]) -> String {
    let mut out = String::from("digraph blowups {\n  node [shape=box];\n");
    let mut kind = p.kind();
    writeln!(out, "  c0 [label=\"{}\"];", kind_str(kind)).unwrap();
    let mut node = 0usize;
    for t in cert {
        let post = t.post.kind();
        let steps: Vec<(char, usize, usize)> = blowups(&t.payload)
            .into_iter()
            .flat_map(|(side, seq)| seq.steps.iter().map(move |b| (side, b.i + 1, b.j + 1)))
            .collect();
        if steps.is_empty() {
            writeln!(out, "  c{} [label=\"{}\"];", node + 1, kind_str(post)).unwrap();
            writeln!(out, "  c{node} -> c{} [label=\"type {}\", style=dashed];", node + 1, t.tag()).unwrap();
            node += 1;
        }
        for (k, (side, i, j)) in steps.iter().enumerate() {
            if k + 1 == steps.len() {
                kind = post;
            }
            writeln!(out, "  c{} [label=\"{}\"];", node + 1, kind_str(kind)).unwrap();
            writeln!(out, "  c{node} -> c{} [label=\"({i},{j})\", tooltip=\"{side}\"];", node + 1).unwrap();
            node += 1;
        }
        kind = post;
    }
    out.push_str("}\n");
    out
}

fn cmd_verify(cli: &Cli, problem: &Path, certificate: &Path) -> Out<()> {
    let (p, _) = load(cli, problem)?;
    let cd = doc::parse_certificate(&read(certificate)?)?;
    let Certificate { problem: issued, entries, declared } = doc::certificate_of(&cd)?;
    let stage = |k: usize, msg: &str| Fail { code: EXIT_VERIFY, msg: format!("verify failed at stage {k}: {msg}") };
    if issued != p.snapshot() {
        return Err(stage(0, "certificate was issued for a different problem"));
    }
    driver::verify_report(&p, &entries).map_err(|f| stage(f.stage, &f.reason))?;
    for (k, (t, d)) in entries.iter().zip(&declared).enumerate() {
        if t.post.kind() != *d {
            return Err(stage(k, "declared type differs from the recorded state"));
        }
    }
    let last = entries.last().map_or(p.kind(), |t| t.post.kind());
    emit(cli, &format!("ok {} entries {}\n", entries.len(), kind_str(last)))
}

fn selected(opts: &Option<OptionsDoc>, p: &PreparedPair) -> Out<Vec<usize>> {
    match opts.as_ref().and_then(|o| o.series) {
        Some(k) if k >= 1 && k <= p.xseries.len() => Ok(vec![k - 1]),
        Some(k) => Err(Fail { code: EXIT_INPUT, msg: format!("options.series {k} outside 1..{}", p.xseries.len()) }),
        None => Ok((0..p.xseries.len()).collect()),
    }
}

fn cmd_decompose(cli: &Cli, path: &Path) -> Out<()> {
    json_only(cli, "decompose")?;
    let (p, opts) = load(cli, path)?;
    let mut items = Vec::new();
    for k in selected(&opts, &p)? {
        let g = &p.xseries[k];
        let classes: Vec<Value> = decompose(g, &p)
            .classes
            .iter()
            .map(|(key, h)| json!({ "class": key, "part": doc::series_doc(h, p.field) }))
            .collect();
        items.push(json!({ "series": k + 1, "algebraic": is_algebraic(g, &p), "classes": classes }));
    }
    emit(cli, &doc::to_json(&items))
}

fn values_json(v: &[GroupValue]) -> Value {
    serde_json::to_value(v).expect("values serialize")
}

fn cmd_perron(cli: &Cli, path: &Path) -> Out<()> {
    json_only(cli, "perron")?;
    let (p, _) = load(cli, path)?;
    let mut items = Vec::new();
    for v in p.s..p.n {
        let mut w = p.weights[..p.s].to_vec();
        w.push(p.weights[v].clone());
        let res = toric::perron(&w, &[])?;
        items.push(json!({
            "var": v + 1,
            "seq": doc::seq_doc(&res.seq),
            "perm": res.perm.iter().map(|k| k + 1).collect::<Vec<_>>(),
            "matrix": res.matrix,
            "values": values_json(&res.values),
        }));
    }
    emit(cli, &doc::to_json(&items))
}

fn cmd_principalize(cli: &Cli, path: &Path) -> Out<()> {
    json_only(cli, "principalize")?;
    let (p, opts) = load(cli, path)?;
    let gens = opts
        .and_then(|o| o.generators)
        .ok_or_else(|| Fail { code: EXIT_INPUT, msg: "principalize needs options.generators".into() })?;
    let res = toric::principalize(&gens, &p.weights[..p.s])?;
    let out = json!({
        "seq": doc::seq_doc(&res.seq),
        "generator": res.gen,
        "source": res.source + 1,
        "images": res.images,
        "values": values_json(&res.values),
    });
    emit(cli, &doc::to_json(&out))
}

fn cmd_tschirnhaus(cli: &Cli, path: &Path) -> Out<()> {
    json_only(cli, "tschirnhaus")?;
    let (p, opts) = load(cli, path)?;
    let o = opts.clone().unwrap_or_default();
    let need = |name: &str| Fail { code: EXIT_INPUT, msg: format!("tschirnhaus needs options.{name}") };
    let var = o.var.ok_or_else(|| need("var"))?;
    let t = o.order.ok_or_else(|| need("order"))?;
    if var == 0 || var > p.n {
        return Err(Fail { code: EXIT_INPUT, msg: format!("options.var {var} outside 1..{}", p.n) });
    }
    let k = *selected(&opts, &p)?
        .first()
        .ok_or_else(|| Fail { code: EXIT_INPUT, msg: "the problem has no x-series".into() })?;
    let (phi, fbar) = p.xseries[k].tschirnhaus(var - 1, t)?;
    let out = json!({
        "series": k + 1,
        "var": var,
        "order": t,
        "trunc": fmt_q(fbar.trunc()),
        "phi": doc::series_doc(&phi, p.field),
        "transformed": doc::series_doc(&fbar, p.field),
    });
    emit(cli, &doc::to_json(&out))
}

fn dispatch(cli: &Cli) -> Out<()> {
    if let Ok(list) = std::env::var(valgroup::BASIS_ENV) {
        valgroup::set_basis(valgroup::parse_basis(&list)?)?;
    }
    match &cli.command {
        Command::Validate { problem } => cmd_validate(cli, problem),
        Command::Run { problem } => cmd_run(cli, problem),
        Command::Verify { problem, certificate } => cmd_verify(cli, problem, certificate),
        Command::Decompose { problem } => cmd_decompose(cli, problem),
        Command::Perron { problem } => cmd_perron(cli, problem),
        Command::Principalize { problem } => cmd_principalize(cli, problem),
        Command::Tschirnhaus { problem } => cmd_tschirnhaus(cli, problem),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("monomialize: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
