//! Command-line front end for the `udp6` binary.
//!
//! Exit codes: 0 ok, 1 input or validation error, 2 truncated enumeration,
//! 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionConfig};
use crate::families::{detect_asymptotic_linearity, instantiate_family, FamilyId, FamilySpec, LinearAnsatz};
use crate::params::{Params, ParityPair, StatePair};
use crate::qp6_oracle::{ud_limit_compare, EpsSchedule};
use crate::riccati::{riccati_evolve, verify_riccati_table, RiccatiConfig, Sampling};
use crate::table::{verify_table, SolutionTable};
use crate::tropical::{parse_rat, rat, Rat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_TRUNCATED: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "udp6", version, about = "Ultradiscrete Painleve VI with parity variables")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate every solution branch from an initial state.
    Evolve(EvolveArgs),
    /// Check a solution table against the equations.
    Verify(VerifyArgs),
    /// Build solutions of the Riccati-type equation.
    Riccati(RiccatiArgs),
    /// List or instantiate closed-form solution families.
    Families(FamiliesArgs),
    /// Scan random no-parity runs for asymptotically linear behaviour.
    Conjecture(ConjectureArgs),
    /// Compare a table with the q-difference system as eps decreases.
    Qlimit(QlimitArgs),
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Output {
    /// Write to this file (atomically) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long)]
    params: PathBuf,
    /// Initial y as sign:amplitude, e.g. -1:43.
    #[arg(long, allow_hyphen_values = true)]
    y0: String,
    #[arg(long, allow_hyphen_values = true)]
    z0: String,
    /// Index of the initial state.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    m0: i64,
    /// Inclusive index window lo:hi.
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    #[arg(long, default_value_t = EvolutionConfig::DEFAULT_MAX_BRANCHES)]
    max_branches: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    params: PathBuf,
    /// Table CSV with header m,sy,Y,sz,Z.
    #[arg(long)]
    table: PathBuf,
    /// Also check both Riccati equations.
    #[arg(long)]
    riccati: bool,
}

#[derive(Args, Debug)]
struct RiccatiArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    y0: String,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    m0: i64,
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    /// endpoints, midpoint or all-breakpoints.
    #[arg(long, default_value = "endpoints")]
    sampling: String,
    #[arg(long, default_value_t = 16)]
    max_tables: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct FamiliesArgs {
    /// Print the family catalog.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Free constant c (or c').
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m0: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, default_value = "-5:5", allow_hyphen_values = true)]
    window: String,
    /// json: validity report with the table; csv: the table only.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ConjectureArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value = "-50:50", allow_hyphen_values = true)]
    window: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed parameters; random ones are drawn per run otherwise.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Range of random integers.
    #[arg(long, default_value_t = 20)]
    span: i64,
    /// Steps of exact affine behaviour required at each end.
    #[arg(long, default_value_t = 5)]
    w: usize,
    #[arg(long, default_value_t = 8)]
    max_branches: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct QlimitArgs {
    #[arg(long)]
    params: PathBuf,
    /// Strictly decreasing comma-separated eps values.
    #[arg(long, default_value = "1,0.5,0.2,0.1")]
    eps: String,
    #[arg(long, default_value = "0:3", allow_hyphen_values = true)]
    window: String,
    /// Table to compare; otherwise one is evolved from --y0/--z0 at the window start.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    /// Fixed working precision in bits.
    #[arg(long)]
    precision: Option<usize>,
    #[command(flatten)]
    output: Output,
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let res = match cli.cmd {
        Command::Evolve(a) => cmd_evolve(a, out, err),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Riccati(a) => cmd_riccati(a, out, err),
        Command::Families(a) => cmd_families(a, out, err),
        Command::Conjecture(a) => cmd_conjecture(a, out),
        Command::Qlimit(a) => cmd_qlimit(a, out, err),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn parse_window(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Window(format!("expected lo:hi, got {s:?}")))?;
    let p = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| Error::Window(format!("bad bound {t:?}")))
    };
    let (lo, hi) = (p(a)?, p(b)?);
    if lo > hi {
        return Err(Error::Window(format!("{lo} > {hi}")));
    }
    Ok((lo, hi))
}

fn load_params(path: &Path) -> Result<Params> {
    let text = std::fs::read_to_string(path)?;
    Params::from_json_str(&text)
}

fn load_table(path: &Path) -> Result<SolutionTable> {
    SolutionTable::read_csv(std::fs::File::open(path)?)
}

/// Writes `content` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn emit(output: &Output, content: &str, out: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(p) => write_atomic(p, content.as_bytes()),
        None => Ok(out.write_all(content.as_bytes())?),
    }
}

fn tables_text(tables: &[SolutionTable], truncated: bool, format: Format) -> String {
    match format {
        Format::Csv if tables.len() == 1 => tables[0].to_csv_string(),
        Format::Csv => tables
            .iter()
            .enumerate()
            .map(|(k, t)| format!("# branch {k}\n{}", t.to_csv_string()))
            .collect(),
        Format::Json => {
            let v = json!({
                "truncated": truncated,
                "branches": tables
                    .iter()
                    .enumerate()
                    .map(|(k, t)| t.to_json_value(Some(k)))
                    .collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
    }
}

fn cmd_evolve(a: EvolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let p = load_params(&a.params)?;
    let (lo, hi) = parse_window(&a.window)?;
    let init = StatePair::new(a.m0, ParityPair::parse(&a.y0)?, ParityPair::parse(&a.z0)?);
    let cfg = EvolutionConfig::window(lo, hi).with_max_branches(a.max_branches);
    let tree = evolve(&p, &init, &cfg)?;
    emit(&a.output, &tables_text(&tree.branches, tree.truncated, a.format), out)?;
    if tree.truncated {
        writeln!(err, "warning: branch cap {} reached; output truncated", a.max_branches)?;
        return Ok(EXIT_TRUNCATED);
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let p = load_params(&a.params)?;
    let t = load_table(&a.table)?;
    let mut fails = verify_table(&p, &t)?;
    if a.riccati {
        fails.extend(verify_riccati_table(&p, &t)?);
    }
    if fails.is_empty() {
        writeln!(out, "ok: {} rows, m={}..{}", t.len(), t.m_min(), t.m_max())?;
        return Ok(EXIT_OK);
    }
    for f in &fails {
        writeln!(out, "fail: m={} equation={}", f.m, f.equation)?;
    }
    Ok(EXIT_VERIFY)
}

fn cmd_riccati(a: RiccatiArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let p = load_params(&a.params)?;
    let (lo, hi) = parse_window(&a.window)?;
    let sampling: Sampling = a.sampling.parse()?;
    let cfg = RiccatiConfig::window(lo, hi)
        .with_sampling(sampling)
        .with_max_tables(a.max_tables);
    let run = riccati_evolve(&p, a.m0, &ParityPair::parse(&a.y0)?, &cfg)?;
    if run.tables.is_empty() {
        writeln!(
            err,
            "error: no table covers the window (dead ends at {:?})",
            run.dead_ends
        )?;
        return Ok(EXIT_VERIFY);
    }
    emit(&a.output, &tables_text(&run.tables, run.truncated, a.format), out)?;
    if run.truncated {
        writeln!(err, "warning: table cap {} reached; output truncated", a.max_tables)?;
        return Ok(EXIT_TRUNCATED);
    }
    Ok(EXIT_OK)
}

fn opt_rat(s: &Option<String>) -> Result<Option<Rat>> {
    s.as_deref().map(parse_rat).transpose()
}

fn cmd_families(a: FamiliesArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if a.list {
        for id in FamilyId::ALL {
            writeln!(out, "{:<9} {}", id.name(), id.description())?;
        }
        return Ok(EXIT_OK);
    }
    let id: FamilyId =
        a.id.as_deref()
            .ok_or_else(|| Error::Config("--id or --list is required".into()))?
            .parse()?;
    let p = load_params(
        a.params
            .as_deref()
            .ok_or_else(|| Error::Config("--params is required".into()))?,
    )?;
    let (lo, hi) = parse_window(&a.window)?;
    let mut spec = FamilySpec::new(id);
    spec.c = opt_rat(&a.c)?;
    spec.m0 = a.m0;
    if let (Some(al), Some(be), Some(ga)) = (opt_rat(&a.alpha)?, opt_rat(&a.beta)?, opt_rat(&a.gamma)?) {
        spec.ansatz = Some(LinearAnsatz::new(al, be, ga));
    }
    let inst = instantiate_family(&spec, &p, lo, hi)?;
    let text = match a.format {
        Format::Json => {
            let mut v = inst.report_json(&spec, &p);
            v["table"] = inst.table.to_json_value(None)["rows"].clone();
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        Format::Csv => inst.table.to_csv_string(),
    };
    emit(&a.output, &text, out)?;
    if inst.valid {
        Ok(EXIT_OK)
    } else {
        for c in inst.violated() {
            writeln!(err, "violated: {}", c.expr)?;
        }
        Ok(EXIT_VERIFY)
    }
}

fn cmd_conjecture(a: ConjectureArgs, out: &mut dyn Write) -> Result<i32> {
    let (lo, hi) = parse_window(&a.window)?;
    if lo > 0 || hi < 0 {
        return Err(Error::Window("window must contain m=0".into()));
    }
    if a.span < 1 {
        return Err(Error::Config("--span must be positive".into()));
    }
    let fixed = a.params.as_deref().map(load_params).transpose()?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let cfg = EvolutionConfig::window(lo, hi).with_max_branches(a.max_branches);
    let (mut branches, mut linear, mut truncated_runs, mut failed_runs) = (0usize, 0usize, 0usize, 0usize);
    let mut candidates = Vec::new();
    for run in 0..a.n {
        let p = match &fixed {
            Some(p) => p.clone(),
            None => Params::random_integer(&mut rng, a.span),
        };
        let y0 = ParityPair::minus(rat(rng.gen_range(-a.span..=a.span)));
        let z0 = ParityPair::minus(rat(rng.gen_range(-a.span..=a.span)));
        let tree = match evolve(&p, &StatePair::new(0, y0.clone(), z0.clone()), &cfg) {
            Ok(t) => t,
            Err(e) => {
                failed_runs += 1;
                candidates.push(json!({
                    "run": run,
                    "params": p,
                    "y0": y0.to_string(),
                    "z0": z0.to_string(),
                    "notes": [e.to_string()],
                }));
                continue;
            }
        };
        truncated_runs += usize::from(tree.truncated);
        for (k, t) in tree.branches.iter().enumerate() {
            branches += 1;
            let rep = detect_asymptotic_linearity(&p, t, a.w)?;
            if rep.consistent() {
                linear += 1;
            } else {
                candidates.push(json!({
                    "run": run,
                    "branch": k,
                    "params": p,
                    "y0": y0.to_string(),
                    "z0": z0.to_string(),
                    "forward": rep.forward,
                    "backward": rep.backward,
                    "notes": rep.notes,
                }));
            }
        }
    }
    let v = json!({
        "runs": a.n,
        "seed": a.seed,
        "window": [lo, hi],
        "branches": branches,
        "linear_detected": linear,
        "truncated_runs": truncated_runs,
        "failed_runs": failed_runs,
        "counterexample_candidates": candidates,
    });
    emit(
        &a.output,
        &(serde_json::to_string_pretty(&v).expect("json") + "\n"),
        out,
    )?;
    Ok(EXIT_OK)
}

fn cmd_qlimit(a: QlimitArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let p = load_params(&a.params)?;
    let (lo, hi) = parse_window(&a.window)?;
    let mut sched = EpsSchedule::parse(&a.eps)?;
    if let Some(bits) = a.precision {
        sched = sched.with_precision(bits);
    }
    let table = match (&a.table, &a.y0, &a.z0) {
        (Some(path), _, _) => load_table(path)?,
        (None, Some(y0), Some(z0)) => {
            let init = StatePair::new(lo, ParityPair::parse(y0)?, ParityPair::parse(z0)?);
            let tree = evolve(&p, &init, &EvolutionConfig::window(lo, hi))?;
            if tree.branches.len() != 1 {
                return Err(Error::Config(format!(
                    "initial state has {} branches; pass --table",
                    tree.branches.len()
                )));
            }
            tree.branches[0].clone()
        }
        _ => return Err(Error::Config("give --table or both --y0 and --z0".into())),
    };
    let rep = ud_limit_compare(&p, &table, &sched, lo, hi)?;
    emit(&a.output, &rep.to_csv_string()?, out)?;
    for ab in &rep.aborts {
        writeln!(err, "abort: eps={} m={}: {}", ab.eps, ab.m, ab.reason)?;
    }
    if !rep.non_decreasing.is_empty() {
        writeln!(err, "error does not decrease at m={:?}", rep.non_decreasing)?;
    }
    if !rep.plateau.is_empty() {
        writeln!(err, "error plateau at m={:?}", rep.plateau)?;
    }
    if rep.converged() {
        writeln!(err, "converged")?;
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_VERIFY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("udp6").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn windows() {
        assert_eq!(parse_window("-5:5").unwrap(), (-5, 5));
        assert_eq!(parse_window("3:3").unwrap(), (3, 3));
        assert!(parse_window("5:-5").is_err());
        assert!(parse_window("5").is_err());
        assert!(parse_window("a:b").is_err());
    }

    #[test]
    fn list_families() {
        let (code, out, _) = run_str(&["families", "--list"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), FamilyId::ALL.len());
        assert!(out.starts_with("r1"));
    }

    #[test]
    fn bad_usage_is_input_error() {
        assert_eq!(run_str(&["evolve"]).0, EXIT_INPUT);
        assert_eq!(run_str(&["nonsense"]).0, EXIT_INPUT);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("x.csv");
        write_atomic(&f, b"one").unwrap();
        write_atomic(&f, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&f).unwrap(), "two");
    }
}
