//! The `triflip` command line: generate, analyze, transform, verify and
//! enumerate triangulations from scripts and CI.
//!
//! Every subcommand reads and writes the plain-text formats defined in
//! [`embedding`](crate::embedding): the ".tri" triangulation format and the
//! flip-log format (`flip <a> <b> -> <c> <d> [outer <x> <y> <z>]`). `-`
//! stands for stdin or stdout wherever a file is expected. All output is
//! byte-deterministic given identical inputs and seeds, and every
//! machine-readable line starts with a fixed keyword:
//!
//! | keyword | emitted by | line |
//! |---|---|---|
//! | `n`, `m`, `maxdeg`, `septri` | `analyze` | one value each |
//! | `depth` | `analyze` | `depth <d> <count>` histogram row |
//! | `contains` | `analyze` | direct containment `<parent a b c> <child a b c>` |
//! | `fourconnected` | `analyze` | `yes` or `no` |
//! | `flip` | `make4c`, `canon`, `distance` | one flip record |
//! | `charge`, `recoin` | `make4c --audit` | coin-ledger rows |
//! | `flips` | `make4c`, `canon`, `distance` | budget report (see below) |
//! | `cycle`, `inside`, `outside` | `hamcycle` | Hamiltonian cycle and side sets |
//! | `lemmas`, `violation`, `verdict` | `verify lemmas` | exhaustive check report |
//! | `bound`, `verdict` | `verify bounds` | per-stage budget rows |
//! | `roundtrip` | `verify roundtrip` | `pass` or `FAIL <reason>` |
//! | `count`, `code` | `enumerate` | class count and hex codes |
//! | `distance` | `exactdist` | exact flip distance |
//!
//! Budget report lines: `canon` prints `flips <k> bound <B> delta0 <Δ>`;
//! `make4c` prints `flips <k> bound <B>`; `distance` prints
//! `flips <k> bound <B>` when the composed bound applies (`n ≥ 19`),
//! `flips <k> exact` when the answer is oracle-exact (`n ≤ 9` or
//! `--exact`), and bare `flips <k>` otherwise. When a result is exact the
//! reported bound equals the achieved count.
//!
//! Exit codes: 0 success, 1 invalid input (message carries the offending
//! error's name), 2 usage error, 3 violated bound or failed verification.

use std::fmt::Debug;
use std::fs;
use std::io::{Read, Write};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::canonicalize::{
    canonical_flip_bound, flip_distance_via_canonical, to_canonical, CanonError,
};
use crate::embedding::{ParseError, Triangulation, VertexId};
use crate::four_connect::{make_4_connected, FourConnectError};
use crate::generators::{gen_canonical, gen_random, gen_sierpinski, gen_stacked};
use crate::hamiltonian::hamiltonian_cycle_through;
use crate::oracle::{enumerate_all, exact_flip_distance, lemma_suite, shortest_flip_path};
use crate::septri::ContainmentIndex;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

#[derive(Parser)]
#[command(
    name = "triflip",
    version,
    about = "Edge flips on planar triangulations: 4-connectivity, Hamiltonian cycles, canonical forms"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated triangulation in ".tri" format
    Gen {
        #[command(subcommand)]
        family: GenCmd,
    },
    /// Report size, degree, separating-triangle structure and connectivity
    Analyze {
        file: String,
        /// Emit a graph-description text for visualization instead
        #[arg(long)]
        dot: bool,
    },
    /// Flip until no separating triangle remains (≤ ⌊(3n−9)/5⌋ flips)
    Make4c {
        file: String,
        /// Also run and print the coin-ledger accounting of the bound
        #[arg(long)]
        audit: bool,
        /// Write the flip log here instead of stdout
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Transform a 4-connected triangulation into the canonical one
    Canon {
        file: String,
        /// Write the flip log here instead of stdout
        #[arg(short, long)]
        output: Option<String>,
    },
    /// A flip sequence from the first triangulation to the second's class
    Distance {
        file1: String,
        file2: String,
        /// Use the breadth-first oracle (exact, n ≤ 9 only)
        #[arg(long)]
        exact: bool,
    },
    /// A Hamiltonian cycle through an edge, chords split by side
    Hamcycle {
        file: String,
        /// The edge the cycle must use
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        edge: Vec<usize>,
    },
    /// Re-check the library's claims on a given input or exhaustively
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Count and list all triangulation classes on n vertices
    Enumerate { n: usize },
    /// Exact flip distance between two triangulations (n ≤ 9)
    Exactdist { file1: String, file2: String },
    /// Shorthand for `verify lemmas`
    Lemmas { n: usize },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Two dominant vertices completing a path on the rest
    Canonical {
        n: usize,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// The recursive family with (3n−10)/5 edge-disjoint separating
    /// triangles; `partial` stops that many insertions short of full depth
    Sierpinski {
        depth: usize,
        #[arg(default_value_t = 0)]
        partial: usize,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Seeded random walk in the flip graph from the canonical start
    Random {
        n: usize,
        /// Walk length (default 10·n)
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Apollonian: repeatedly subdivide a random face
    Stacked {
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<String>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Exhaustively check the structural facts on all classes of size n
    Lemmas { n: usize },
    /// Run the flip pipelines on a file and check every stated budget
    Bounds { file: String },
    /// Serialize, re-parse and compare
    Roundtrip { file: String },
}

/// A failed command: exit code plus the message for stderr.
struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

/// `Variant(..)` / `Variant { .. }` → `Variant`.
fn variant_name(e: &impl Debug) -> String {
    let s = format!("{e:?}");
    s.chars()
        .skip_while(|c| !c.is_alphanumeric())
        .take_while(|c| c.is_alphanumeric())
        .collect()
}

/// Invalid-input failure named after the underlying error variant.
fn invalid(e: &impl Debug, detail: impl std::fmt::Display) -> Failure {
    fail(EXIT_INVALID, format!("error {}: {detail}", variant_name(e)))
}

pub fn run(
    args: Vec<String>,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args.iter().map(String::as_str)) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.cmd, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Cmd, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Cmd::Gen { family } => gen(family, stdout),
        Cmd::Analyze { file, dot } => analyze(&file, dot, stdin, stdout),
        Cmd::Make4c { file, audit, output } => make4c(&file, audit, output, stdin, stdout),
        Cmd::Canon { file, output } => canon(&file, output, stdin, stdout),
        Cmd::Distance { file1, file2, exact } => distance(&file1, &file2, exact, stdin, stdout),
        Cmd::Hamcycle { file, edge } => hamcycle(&file, &edge, stdin, stdout),
        Cmd::Verify { what } => match what {
            VerifyCmd::Lemmas { n } => lemmas(n, stdout),
            VerifyCmd::Bounds { file } => bounds(&file, stdin, stdout),
            VerifyCmd::Roundtrip { file } => roundtrip(&file, stdin, stdout),
        },
        Cmd::Enumerate { n } => enumerate(n, stdout),
        Cmd::Exactdist { file1, file2 } => exactdist(&file1, &file2, stdin, stdout),
        Cmd::Lemmas { n } => lemmas(n, stdout),
    }
}

fn load(path: &str, stdin: &mut dyn Read) -> Result<Triangulation, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s).map_err(|e| invalid(&"Io", e))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| invalid(&"Io", format!("{path}: {e}")))?
    };
    Triangulation::deserialize(&text).map_err(|e| match &e {
        ParseError::Invalid(inner) => invalid(inner, &e),
        _ => invalid(&e, &e),
    })
}

/// Writes `content` to `target` (a path, or stdout for `None` / `-`).
fn emit(
    target: &Option<String>,
    stdout: &mut dyn Write,
    content: &str,
) -> Result<(), Failure> {
    match target.as_deref() {
        Some(path) if path != "-" => {
            fs::write(path, content).map_err(|e| invalid(&"Io", format!("{path}: {e}")))
        }
        _ => out(stdout, content),
    }
}

fn out(stdout: &mut dyn Write, content: &str) -> Result<(), Failure> {
    stdout
        .write_all(content.as_bytes())
        .map_err(|e| invalid(&"Io", format!("stdout: {e}")))
}

fn gen(family: GenCmd, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (built, output) = match family {
        GenCmd::Canonical { n, output } => (gen_canonical(n), output),
        GenCmd::Sierpinski { depth, partial, output } => (gen_sierpinski(depth, partial), output),
        GenCmd::Random { n, steps, seed, output } => {
            (gen_random(n, steps.unwrap_or(10 * n), seed), output)
        }
        GenCmd::Stacked { n, seed, output } => (gen_stacked(n, seed), output),
    };
    let t = built.map_err(|e| invalid(&e, &e))?;
    emit(&output, stdout, &t.serialize())
}

fn analyze(file: &str, dot: bool, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<(), Failure> {
    let t = load(file, stdin)?;
    if dot {
        return out(stdout, &t.to_dot());
    }
    let index = ContainmentIndex::from_triangulation(&t);
    let mut report = String::new();
    report.push_str(&format!("n {}\n", t.n()));
    report.push_str(&format!("m {}\n", t.m()));
    report.push_str(&format!("maxdeg {}\n", t.max_degree()));
    report.push_str(&format!("septri {}\n", index.len()));
    let mut histogram = std::collections::BTreeMap::new();
    for i in 0..index.len() {
        *histogram.entry(index.depth(i)).or_insert(0usize) += 1;
    }
    for (d, count) in histogram {
        report.push_str(&format!("depth {d} {count}\n"));
    }
    for i in 0..index.len() {
        // the deepest container is the direct parent in the nesting order
        if let Some(&p) = index.containers(i).iter().max_by_key(|&&p| index.depth(p)) {
            let [a, b, c] = index.triangle(p).vertices;
            let [d, e, f] = index.triangle(i).vertices;
            report.push_str(&format!("contains {a} {b} {c} {d} {e} {f}\n"));
        }
    }
    report.push_str(&format!(
        "fourconnected {}\n",
        if index.is_empty() { "yes" } else { "no" }
    ));
    out(stdout, &report)
}

fn make4c(
    file: &str,
    audit: bool,
    output: Option<String>,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let t = load(file, stdin)?;
    let (seq, ledger) = make_4_connected(&t, audit).map_err(|e| match e {
        FourConnectError::Unremovable => invalid(&e, &e),
        _ => fail(EXIT_BOUND, format!("error {}: {e}", variant_name(&e))),
    })?;
    let bound = (3 * t.n() - 9) / 5;
    emit(&output, stdout, &seq.to_log())?;
    if let Some(ledger) = ledger {
        out(stdout, &ledger.to_log())?;
    }
    out(stdout, &format!("flips {} bound {bound}\n", seq.len()))?;
    if seq.len() > bound {
        return Err(fail(
            EXIT_BOUND,
            format!("error BoundViolated: {} flips exceed {bound}", seq.len()),
        ));
    }
    Ok(())
}

fn canon(
    file: &str,
    output: Option<String>,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let mut t = load(file, stdin)?;
    let n = t.n();
    let delta0 = t.max_degree();
    match to_canonical(&mut t) {
        Ok(seq) => {
            // below the pipeline range the sequence is oracle-exact, so the
            // achieved length is the certificate
            let bound =
                if n >= 13 { canonical_flip_bound(n, delta0) } else { seq.len() };
            emit(&output, stdout, &seq.to_log())?;
            out(stdout, &format!("flips {} bound {bound} delta0 {delta0}\n", seq.len()))
        }
        Err(CanonError::BudgetExceeded { flips, bound }) => {
            out(stdout, &format!("flips {flips} bound {bound} delta0 {delta0}\n"))?;
            Err(fail(
                EXIT_BOUND,
                format!("error BudgetExceeded: {flips} flips exceed {bound}"),
            ))
        }
        Err(e) => Err(invalid(&e, &e)),
    }
}

fn distance(
    file1: &str,
    file2: &str,
    exact: bool,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let t1 = load(file1, stdin)?;
    let t2 = load(file2, stdin)?;
    let n = t1.n();
    if exact || n <= 9 {
        if t1.n() != t2.n() {
            let e = CanonError::SizeMismatch { n1: t1.n(), n2: t2.n() };
            return Err(invalid(&e, &e));
        }
        if n > 9 {
            return Err(fail(
                EXIT_INVALID,
                format!("error TooLarge: exact distance handles up to 9 vertices, got {n}"),
            ));
        }
        let seq = shortest_flip_path(&t1, &t2).map_err(|e| invalid(&e, &e))?;
        out(stdout, &seq.to_log())?;
        return out(stdout, &format!("flips {} exact\n", seq.len()));
    }
    match flip_distance_via_canonical(&t1, &t2) {
        Ok(seq) => {
            out(stdout, &seq.to_log())?;
            if n >= 19 {
                let bound = (5.2 * n as f64 - 33.6).floor() as usize;
                out(stdout, &format!("flips {} bound {bound}\n", seq.len()))
            } else {
                out(stdout, &format!("flips {}\n", seq.len()))
            }
        }
        Err(CanonError::BudgetExceeded { flips, bound }) => {
            out(stdout, &format!("flips {flips} bound {bound}\n"))?;
            Err(fail(
                EXIT_BOUND,
                format!("error BudgetExceeded: {flips} flips exceed {bound}"),
            ))
        }
        Err(e) => Err(invalid(&e, &e)),
    }
}

fn hamcycle(
    file: &str,
    edge: &[usize],
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let t = load(file, stdin)?;
    let n = t.n();
    if n < 6 {
        return Err(fail(
            EXIT_INVALID,
            format!("error TooSmall: a side-separating cycle needs at least 6 vertices, got {n}"),
        ));
    }
    let (a, b) = (edge[0], edge[1]);
    if a >= n || b >= n || !t.is_edge(VertexId(a), VertexId(b)) {
        return Err(fail(EXIT_INVALID, format!("error NotAnEdge: {a} {b}")));
    }
    let d = hamiltonian_cycle_through(&t, VertexId(a), VertexId(b))
        .map_err(|e| invalid(&e, &e))?;
    let mut report = String::from("cycle");
    for v in &d.cycle {
        report.push_str(&format!(" {v}"));
    }
    report.push('\n');
    for e in &d.inside_edges {
        report.push_str(&format!("inside {e}\n"));
    }
    for e in &d.outside_edges {
        report.push_str(&format!("outside {e}\n"));
    }
    out(stdout, &report)
}

fn lemmas(n: usize, stdout: &mut dyn Write) -> Result<(), Failure> {
    let report = lemma_suite(n).map_err(|e| invalid(&e, &e))?;
    out(
        stdout,
        &format!(
            "lemmas n {n} classes {} configurations {} checks {} violations {}\n",
            report.classes,
            report.configurations,
            report.checks,
            report.violations.len()
        ),
    )?;
    for v in &report.violations {
        out(stdout, &format!("violation {v}\n"))?;
    }
    if report.ok() {
        out(stdout, "verdict pass\n")
    } else {
        out(stdout, "verdict fail\n")?;
        Err(fail(EXIT_BOUND, format!("error LemmaViolated: {} violations", report.violations.len())))
    }
}

fn bounds(file: &str, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<(), Failure> {
    let t = load(file, stdin)?;
    let n = t.n();
    let mut all_ok = true;
    let mut row = |stdout: &mut dyn Write, name: &str, k: usize, b: usize| {
        let ok = k <= b;
        all_ok &= ok;
        let verdict = if ok { "pass" } else { "FAIL" };
        out(stdout, &format!("bound {name} {k} {b} {verdict}\n"))
    };

    let (seq, _) = make_4_connected(&t, false).map_err(|e| invalid(&e, &e))?;
    row(stdout, "make4c", seq.len(), (3 * n - 9) / 5)?;
    let mut repaired = t.clone();
    seq.replay(&mut repaired).expect("own sequence replays");
    let delta0 = repaired.max_degree();
    match to_canonical(&mut repaired) {
        Ok(canon_seq) => {
            let b = if n >= 13 { canonical_flip_bound(n, delta0) } else { canon_seq.len() };
            row(stdout, "canon", canon_seq.len(), b)?;
        }
        Err(CanonError::BudgetExceeded { flips, bound }) => row(stdout, "canon", flips, bound)?,
        Err(e) => return Err(invalid(&e, &e)),
    }
    if all_ok {
        out(stdout, "verdict pass\n")
    } else {
        out(stdout, "verdict fail\n")?;
        Err(fail(EXIT_BOUND, "error BoundViolated: see report".to_string()))
    }
}

fn roundtrip(file: &str, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<(), Failure> {
    let t = load(file, stdin)?;
    let text = t.serialize();
    let back = match Triangulation::deserialize(&text) {
        Ok(b) => b,
        Err(e) => {
            out(stdout, &format!("roundtrip FAIL reparse: {e}\n"))?;
            return Err(fail(EXIT_BOUND, "error RoundtripFailed: reparse".to_string()));
        }
    };
    let mut problems = Vec::new();
    if !back.same_embedding(&t) {
        problems.push("embedding differs");
    }
    if back.serialize() != text {
        problems.push("serialization not stable");
    }
    if back.canonical_code() != t.canonical_code() {
        problems.push("canonical code differs");
    }
    if problems.is_empty() {
        out(stdout, "roundtrip pass\n")
    } else {
        out(stdout, &format!("roundtrip FAIL {}\n", problems.join(", ")))?;
        Err(fail(EXIT_BOUND, "error RoundtripFailed: see report".to_string()))
    }
}

fn enumerate(n: usize, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut codes = enumerate_all(n).map_err(|e| invalid(&e, &e))?;
    codes.sort();
    out(stdout, &format!("count {}\n", codes.len()))?;
    for code in &codes {
        out(stdout, &format!("code {}\n", code.to_hex()))?;
    }
    Ok(())
}

fn exactdist(
    file1: &str,
    file2: &str,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let t1 = load(file1, stdin)?;
    let t2 = load(file2, stdin)?;
    let d = exact_flip_distance(&t1, &t2).map_err(|e| invalid(&e, &e))?;
    out(stdout, &format!("distance {d}\n"))
}
