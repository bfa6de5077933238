//! The `p4sparse` command line.
//!
//! Exit codes: 0 success, 1 input not P4-sparse, 2 malformed input or bad
//! arguments, 3 the queried pair is already an edge, 4 `--verify` found a
//! disagreement, 5 the oracle budget was exceeded.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use p4sparse::completion::min_edge_addition;
use p4sparse::oracle::{brute_force_min, random_p4_sparse, OracleBudget};
use p4sparse::tree::{build_tree, is_p4_sparse_by_definition, DEFINITIONAL_CAP};
use p4sparse::{CompletionResult, Error, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_P4_SPARSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ALREADY_EDGE: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "p4sparse",
    version,
    about = "P4-sparse recognition and minimum completion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a graph is P4-sparse.
    Recognize { file: PathBuf },
    /// Print the P4-sparse tree.
    Tree {
        file: PathBuf,
        /// Graphviz output instead of the parenthesized form.
        #[arg(long)]
        dot: bool,
    },
    /// Minimum fill set through the non-edge `u v`.
    Complete {
        file: PathBuf,
        u: usize,
        v: usize,
        /// Also print the fill edges.
        #[arg(long)]
        edges: bool,
        /// Re-check the result with both recognizers and, on small inputs,
        /// the exhaustive oracle.
        #[arg(long)]
        verify: bool,
    },
    /// Exhaustive minimum fill set (small graphs only).
    Oracle {
        file: PathBuf,
        u: usize,
        v: usize,
        /// Largest number of fill edges to try besides `u v`.
        #[arg(long, value_name = "K")]
        max_extra: Option<usize>,
        #[arg(long)]
        edges: bool,
    },
    /// Emit a random P4-sparse graph.
    Gen { n: usize, seed: u64 },
    /// Time completion queries on random graphs of size N and N/2.
    Bench { n: usize, seed: u64, reps: usize },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::NotP4Sparse(_) => EXIT_NOT_P4_SPARSE,
            Error::AlreadyAdjacent { .. } => EXIT_ALREADY_EDGE,
            Error::BudgetExceeded { .. } | Error::TooLarge { .. } => EXIT_BUDGET,
            Error::InvalidCompletion(_) => EXIT_VERIFY_FAILED,
            _ => EXIT_USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::new(EXIT_USAGE, e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> std::result::Result<Graph, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    Graph::parse(&text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Recognize { file } => {
            let g = load(&file)?;
            match build_tree(&g) {
                Ok(_) | Err(Error::EmptyGraph) => {
                    writeln!(out, "p4-sparse")?;
                    Ok(EXIT_OK)
                }
                Err(Error::NotP4Sparse(w)) => {
                    writeln!(out, "not-p4-sparse {w}")?;
                    Ok(EXIT_NOT_P4_SPARSE)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Tree { file, dot } => {
            let t = build_tree(&load(&file)?)?;
            if dot {
                write!(out, "{}", t.to_dot())?;
            } else {
                writeln!(out, "{}", t.to_text())?;
            }
            Ok(EXIT_OK)
        }
        Command::Complete {
            file,
            u,
            v,
            edges,
            verify,
        } => {
            let g = load(&file)?;
            let res = min_edge_addition(&g, u, v)?;
            print_result(out, &res, edges)?;
            if verify {
                return verify_result(out, &g, u, v, &res);
            }
            Ok(EXIT_OK)
        }
        Command::Oracle {
            file,
            u,
            v,
            max_extra,
            edges,
        } => {
            let g = load(&file)?;
            let mut budget = OracleBudget::default();
            if let Some(k) = max_extra {
                budget.max_extra_edges = k;
            }
            let res = brute_force_min(&g, u, v, budget)?;
            print_result(out, &res, edges)?;
            Ok(EXIT_OK)
        }
        Command::Gen { n, seed } => {
            if n == 0 {
                return Err(Failure::new(EXIT_USAGE, "N must be at least 1"));
            }
            write!(out, "{}", random_p4_sparse(n, seed).to_text())?;
            Ok(EXIT_OK)
        }
        Command::Bench { n, seed, reps } => bench(out, n, seed, reps),
    }
}

fn print_result(out: &mut dyn Write, res: &CompletionResult, edges: bool) -> std::io::Result<()> {
    writeln!(out, "{}", res.size())?;
    if edges {
        for e in &res.fill {
            writeln!(out, "{} {}", e.a(), e.b())?;
        }
    }
    Ok(())
}

fn verify_result(
    out: &mut dyn Write,
    g: &Graph,
    u: usize,
    v: usize,
    res: &CompletionResult,
) -> Outcome {
    let mut ok = true;
    let tree_ok = build_tree(&res.completed).is_ok();
    ok &= tree_ok;
    writeln!(out, "verify tree {}", if tree_ok { "ok" } else { "FAIL" })?;
    if g.n() <= DEFINITIONAL_CAP {
        let def_ok = is_p4_sparse_by_definition(&res.completed)?;
        ok &= def_ok;
        writeln!(
            out,
            "verify definition {}",
            if def_ok { "ok" } else { "FAIL" }
        )?;
    } else {
        writeln!(out, "verify definition skipped (n > {DEFINITIONAL_CAP})")?;
    }
    let budget = OracleBudget::default();
    if g.n() <= budget.max_n {
        match brute_force_min(g, u, v, budget) {
            Ok(best) if best.size() == res.size() => writeln!(out, "verify oracle ok")?,
            Ok(best) => {
                ok = false;
                writeln!(out, "verify oracle FAIL (oracle {})", best.size())?;
            }
            Err(Error::BudgetExceeded { .. }) => writeln!(out, "verify oracle skipped (budget)")?,
            Err(e) => return Err(e.into()),
        }
    } else {
        writeln!(out, "verify oracle skipped (n > {})", budget.max_n)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Per-query wall time in microseconds on `random_p4_sparse(n, seed)`.
fn time_queries(
    out: &mut dyn Write,
    n: usize,
    seed: u64,
    reps: usize,
) -> std::result::Result<Vec<f64>, Failure> {
    let g = random_p4_sparse(n, seed);
    let non_edges = n * (n - 1) / 2 - g.m();
    if non_edges == 0 {
        writeln!(out, "n={n} seed={seed}: complete graph, no queries")?;
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(reps);
    for i in 0..reps {
        let (u, v) = loop {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b && !g.has_edge(a, b) {
                break (a, b);
            }
        };
        let start = Instant::now();
        let res = min_edge_addition(&g, u, v)?;
        let micros = start.elapsed().as_secs_f64() * 1e6;
        writeln!(
            out,
            "n={n} query={i} u={u} v={v} k={} us={micros:.0}",
            res.size()
        )?;
        times.push(micros);
    }
    Ok(times)
}

fn bench(out: &mut dyn Write, n: usize, seed: u64, reps: usize) -> Outcome {
    if n < 4 || reps == 0 {
        return Err(Failure::new(EXIT_USAGE, "bench needs N >= 4 and REPS >= 1"));
    }
    let mut half = time_queries(out, n / 2, seed, reps)?;
    let mut full = time_queries(out, n, seed, reps)?;
    if half.is_empty() || full.is_empty() {
        return Ok(EXIT_OK);
    }
    let (mh, mf) = (median(&mut half), median(&mut full));
    writeln!(out, "median n={} us={mh:.0}", n / 2)?;
    writeln!(out, "median n={n} us={mf:.0}")?;
    writeln!(
        out,
        "ratio {:.2} (quadratic scaling predicts 4)",
        mf / mh.max(1.0)
    )?;
    Ok(EXIT_OK)
}
