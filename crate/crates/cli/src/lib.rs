//! The `iep` command line: engines, heights, verifiers, searches and the
//! reference-value table. [`run`] does all the work and returns the exit code
//! and output, so tests drive it without spawning a process.

pub mod repro;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use iep_core::poly::format::{write_binary, write_csv, CoefficientJson};
use iep_core::search::{collect_records, sweep_heights, Bounds, Ranges, SearchTask, SweepOptions, TaskKind};
use iep_core::theorems::{
    bounded_m, lemma_sweep, main_theorem_sweep, render_summary, residue_class_sweep, summarize, verify_corollary,
    verify_eq_1_5, verify_eq_1_6, verify_height_bound, verify_iterated_bound, verify_main_theorem, Congruence, LemmaId,
    Sign, VerificationReport,
};
use iep_core::{coeffs_chi, coeffs_series, height, verify_lemma, CoefficientVector, DegreeCap, Error, Mode, Triple};

/// Exit status and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    /// 0 ok, 1 a verification failed, 2 usage or precondition, 3 resource cap.
    pub exit_code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl CommandOutcome {
    pub fn stdout_text(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "iep",
    version,
    about = "Ternary inclusion-exclusion polynomials: coefficients, heights, checks, searches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the coefficients of Q_{p,q,r}.
    Coeffs(CoeffsArgs),
    /// Print the height and coefficient range.
    Height {
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run one check; see `iep verify --help` for identifiers.
    Verify(VerifyArgs),
    /// Run a sweep; results are JSON lines.
    Search(SearchArgs),
    /// Recompute the reference values and compare.
    ReproPaper {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct TripleArgs {
    p: i64,
    q: i64,
    r: i64,
}

impl TripleArgs {
    /// Ascending order; the polynomial is symmetric in its parameters.
    fn canonical(&self) -> Result<Triple, Error> {
        let mut e = [self.p, self.q, self.r];
        e.sort_unstable();
        Triple::new(e[0], e[1], e[2])
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineChoice {
    Series,
    Chi,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
    Bin,
}

#[derive(Args, Debug)]
struct CoeffsArgs {
    #[command(flatten)]
    triple: TripleArgs,
    #[arg(long, value_enum, default_value = "series")]
    engine: EngineChoice,
    /// Series engine: compute the lower half only and mirror it.
    #[arg(long)]
    half: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Relation {
    Same,
    Opposite,
}

#[derive(Args, Debug)]
#[command(after_help = "\
Checks and their parameters:
  eq1.5 P Q R S          equal heights for R ≡ ±S (mod PQ)
  eq1.6 P Q R S          equal / negated coefficient sets (--relation pins which)
  main P Q S R           A(P,Q,S) <= A(P,Q,R) <= A(P,Q,S) + 1 for R ≡ ±S (mod PQ)
  corollary P Q S R      A(P,Q,R) <= S, strictly for S >= 5
  iterated P Q [+|-]     A(Q, PQ±1, Q(PQ±1)±P) <= 2
  bound1.11 P Q R        A <= m - ceil(m/4), m the smallest element
  lemma1 .. lemma11, eq2.4, eq2.5, eq2.6  P Q R [S]
                         S is the shift for R = PQ + S (lemmas 6, 7, 9-11)
  bounded-m S P_MAX      max of A(p,q,S) over coprime 3 <= p < q <= P_MAX
  main-sweep Q_MAX       `main` over every admissible instance with q <= Q_MAX
  residue-sweep P Q MULT eq1.5 and eq1.6 over all R, S <= MULT*PQ
  lemma-sweep MAX [ALL]  every lemma on every triple with pqr <= MAX")]
struct VerifyArgs {
    /// Check identifier.
    id: String,
    params: Vec<String>,
    /// Seeded points per role assignment for lemmas on large triples.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    relation: Option<Relation>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
#[command(after_help = "\
Bounds by kind:
  height-sweep [LO] MAX   every coprime LO <= p < q < r <= MAX (LO defaults to 3)
  flat-hunt [LO] MAX      the same, keeping only flat triples
  eq13 S P_MAX [Q_MAX]    pairs with A(p,q,pq+S) = S
  eq14 S P_MAX            pairs with A(p,q,pq+S) = M(S; P_MAX) + 1")]
struct SearchArgs {
    kind: TaskKind,
    bounds: Vec<i64>,
    /// Write results here (replacing any previous run).
    #[arg(long, value_name = "FILE", conflicts_with = "resume")]
    out: Option<PathBuf>,
    /// Continue the run stored in FILE.
    #[arg(long, value_name = "FILE")]
    resume: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Stop after this many new records.
    #[arg(long)]
    limit: Option<usize>,
    /// flat-hunt: keep r ≡ ±C (mod pq); repeatable.
    #[arg(long = "residue", value_name = "C")]
    residues: Vec<i64>,
    /// Admit triples with one element below 3.
    #[arg(long)]
    allow_degenerate: bool,
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandOutcome {
                    exit_code: EXIT_OK,
                    stdout: text.into_bytes(),
                    stderr: String::new(),
                },
                _ => usage(text.lines().next().unwrap_or("error: invalid arguments").to_string()),
            };
        }
    };
    let mut out = Vec::new();
    let result = DegreeCap::from_env().and_then(|cap| dispatch(cli.command, cap, &mut out));
    match result {
        Ok(code) => CommandOutcome {
            exit_code: code,
            stdout: out,
            stderr: String::new(),
        },
        Err(e) => CommandOutcome {
            exit_code: exit_code_for(&e),
            stdout: out,
            stderr: format!("error: {e}\n"),
        },
    }
}

fn usage(line: String) -> CommandOutcome {
    CommandOutcome {
        exit_code: EXIT_USAGE,
        stdout: Vec::new(),
        stderr: line + "\n",
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::DegreeCapExceeded { .. } | Error::OverflowDetected { .. } => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

type Outcome = Result<i32, Error>;

fn dispatch(command: Command, cap: DegreeCap, out: &mut Vec<u8>) -> Outcome {
    match command {
        Command::Coeffs(args) => coeffs(args, cap, out),
        Command::Height { triple, json } => {
            let rec = height(&triple.canonical()?, cap)?;
            if json {
                writeln!(out, "{}", rec.to_json_line())?;
            } else {
                writeln!(
                    out,
                    "A{} = {}  (min {}, max {}, {})",
                    rec.triple,
                    rec.height,
                    rec.a_minus,
                    rec.a_plus,
                    if rec.flat { "flat" } else { "not flat" }
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify(args) => verify(args, cap, out),
        Command::Search(args) => search(args, cap, out),
        Command::ReproPaper { json } => repro_paper(json, cap, out),
    }
}

fn coeffs(args: CoeffsArgs, cap: DegreeCap, out: &mut Vec<u8>) -> Outcome {
    if matches!(args.format, Format::Bin) && args.out.is_none() {
        return Err(Error::InvalidParameters("--format bin needs --out FILE".into()));
    }
    let t = args.triple.canonical()?;
    let mode = if args.half { Mode::Half } else { Mode::Full };
    let v = match args.engine {
        EngineChoice::Series => coeffs_series(&t, mode, cap)?,
        EngineChoice::Chi => coeffs_chi(&t, cap)?,
        EngineChoice::Both => {
            let series = coeffs_series(&t, mode, cap)?;
            let chi = coeffs_chi(&t, cap)?;
            if let Some(m) = (0..series.coeffs.len()).find(|&m| series.coeffs[m] != chi.coeffs[m]) {
                writeln!(
                    out,
                    "engines disagree on {t} at m = {m}: series {}, chi {}",
                    series.coeffs[m], chi.coeffs[m]
                )?;
                return Ok(EXIT_FAILED);
            }
            series
        }
    };
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            render_vector(&v, args.format, &mut w)?;
            w.flush()?;
        }
        None => render_vector(&v, args.format, out)?,
    }
    Ok(EXIT_OK)
}

fn render_vector<W: Write>(v: &CoefficientVector, format: Format, mut w: W) -> Result<(), Error> {
    match format {
        Format::Text => {
            writeln!(w, "Q{} degree {} ({})", v.triple, v.degree, v.engine.name())?;
            let line: Vec<String> = v.coeffs.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Format::Csv => write_csv(v, w)?,
        Format::Json => {
            let j = CoefficientJson::from(v);
            writeln!(w, "{}", serde_json::to_string(&j).expect("serializes"))?;
        }
        Format::Bin => write_binary(v, w)?,
    }
    Ok(())
}

fn ints(id: &str, params: &[String], min: usize, max: usize) -> Result<Vec<i64>, Error> {
    if params.len() < min || params.len() > max {
        let want = if min == max {
            format!("{min}")
        } else {
            format!("{min} to {max}")
        };
        return Err(Error::InvalidParameters(format!(
            "`{id}` takes {want} parameters, got {}",
            params.len()
        )));
    }
    params
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidParameters(format!("`{s}` is not an integer")))
        })
        .collect()
}

fn emit_report(r: &VerificationReport, json: bool, out: &mut Vec<u8>) -> Outcome {
    if json {
        writeln!(out, "{}", r.to_json_line())?;
    } else {
        let status = if r.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {} {:?}: {}", r.check_id, r.instance, r.detail)?;
        if let Some(w) = &r.witness {
            writeln!(out, "  witness: {w}")?;
        }
    }
    Ok(if r.passed { EXIT_OK } else { EXIT_FAILED })
}

fn emit_reports(reports: &[VerificationReport], json: bool, out: &mut Vec<u8>) -> Outcome {
    let failed: Vec<&VerificationReport> = reports.iter().filter(|r| !r.passed).collect();
    if json {
        for r in reports {
            writeln!(out, "{}", r.to_json_line())?;
        }
    } else {
        write!(out, "{}", render_summary(&summarize(reports)))?;
        for r in &failed {
            emit_report(r, false, out)?;
        }
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_FAILED })
}

fn verify(args: VerifyArgs, cap: DegreeCap, out: &mut Vec<u8>) -> Outcome {
    let id = args.id.as_str();
    let p = &args.params;
    let report = match id {
        "eq1.5" => {
            let v = ints(id, p, 4, 4)?;
            verify_eq_1_5(v[0], v[1], v[2], v[3], cap)?
        }
        "eq1.6" => {
            let v = ints(id, p, 4, 4)?;
            let expect = args.relation.map(|r| match r {
                Relation::Same => Congruence::Same,
                Relation::Opposite => Congruence::Opposite,
            });
            verify_eq_1_6(v[0], v[1], v[2], v[3], expect, cap)?
        }
        "main" => {
            let v = ints(id, p, 4, 4)?;
            verify_main_theorem(v[0], v[1], v[2], v[3], cap)?
        }
        "corollary" => {
            let v = ints(id, p, 4, 4)?;
            verify_corollary(v[0], v[1], v[2], v[3], cap)?
        }
        "iterated" => {
            let (nums, sign) = match p.len() {
                3 => (&p[..2], p[2].parse::<Sign>()?),
                _ => (&p[..], Sign::Plus),
            };
            let v = ints(id, nums, 2, 2)?;
            verify_iterated_bound(v[0], v[1], sign, cap)?
        }
        "bound1.11" => {
            let v = ints(id, p, 3, 3)?;
            verify_height_bound(&Triple::new(v[0], v[1], v[2])?, cap)?
        }
        "bounded-m" => {
            let v = ints(id, p, 2, 2)?;
            let m = bounded_m(v[0], v[1], cap)?;
            if args.json {
                writeln!(out, "{}", serde_json::to_string(&m).expect("serializes"))?;
            } else {
                writeln!(
                    out,
                    "M({}; {}) >= {}  attained at {:?}  ({} pairs)",
                    m.s, m.p_max, m.value, m.attaining, m.pairs_checked
                )?;
            }
            return Ok(EXIT_OK);
        }
        "main-sweep" => {
            let v = ints(id, p, 1, 1)?;
            let sweep = main_theorem_sweep(v[0], cap)?;
            let code = emit_reports(&sweep.reports, args.json, out)?;
            if !args.json {
                writeln!(
                    out,
                    "lower bound attained {} times, upper bound attained {} times",
                    sweep.lower_attained, sweep.upper_attained
                )?;
            }
            return Ok(code);
        }
        "residue-sweep" => {
            let v = ints(id, p, 3, 3)?;
            return emit_reports(&residue_class_sweep(v[0], v[1], v[2], cap)?, args.json, out);
        }
        "lemma-sweep" => {
            let v = ints(id, p, 1, 2)?;
            let ids: Vec<LemmaId> = LemmaId::ALL.into_iter().filter(|&l| l != LemmaId::Lemma1).collect();
            let sweep = lemma_sweep(v[0], v.get(1).copied().unwrap_or(0), &ids, cap)?;
            writeln!(out, "{} triples", sweep.triples)?;
            writeln!(
                out,
                "{:<8}  {:>9}  {:>12}  {:>8}",
                "check", "instances", "points", "failures"
            )?;
            for row in &sweep.rows {
                writeln!(
                    out,
                    "{:<8}  {:>9}  {:>12}  {:>8}",
                    row.id.name(),
                    row.instances,
                    row.points,
                    row.failures
                )?;
                for r in &row.examples {
                    emit_report(r, args.json, out)?;
                }
            }
            return Ok(if sweep.passed() { EXIT_OK } else { EXIT_FAILED });
        }
        _ => {
            let lemma: LemmaId = id
                .parse()
                .map_err(|_| Error::InvalidParameters(format!("unknown check `{id}`")))?;
            let v = ints(id, p, 3, 4)?;
            let t = Triple::new(v[0], v[1], v[2])?;
            verify_lemma(lemma.name(), &t, v.get(3).copied(), args.samples, args.seed, cap)?
        }
    };
    emit_report(&report, args.json, out)
}

fn search(args: SearchArgs, cap: DegreeCap, out: &mut Vec<u8>) -> Outcome {
    let b = &args.bounds;
    let arity = |lo: usize, hi: usize, shape: &str| -> Result<(), Error> {
        if b.len() < lo || b.len() > hi {
            Err(Error::InvalidParameters(format!("{} takes bounds {shape}", args.kind)))
        } else {
            Ok(())
        }
    };
    let mut task = match args.kind {
        TaskKind::HeightSweep | TaskKind::FlatHunt => {
            arity(1, 2, "[LO] MAX")?;
            let (lo, hi) = if b.len() == 2 { (b[0], b[1]) } else { (3, b[0]) };
            SearchTask::new(args.kind, Ranges::cube(lo, hi))
        }
        TaskKind::Eq13 => {
            arity(2, 3, "S P_MAX [Q_MAX]")?;
            let ranges = Ranges {
                p: Bounds::upto(b[1]),
                q: Bounds::upto(*b.get(2).unwrap_or(&b[1])),
                r: Bounds::upto(i64::MAX),
            };
            SearchTask::new(args.kind, ranges).with_s(b[0])
        }
        TaskKind::Eq14 => {
            arity(2, 2, "S P_MAX")?;
            let ranges = Ranges {
                p: Bounds::upto(b[1]),
                q: Bounds::upto(b[1]),
                r: Bounds::upto(i64::MAX),
            };
            SearchTask::new(args.kind, ranges).with_s(b[0])
        }
    };
    if !args.residues.is_empty() {
        task.residues = Some(args.residues.clone());
    }
    task.allow_degenerate = args.allow_degenerate;
    task.validate()?;

    let (path, resume) = match (args.out, args.resume) {
        (Some(p), None) => (Some(p), false),
        (None, Some(p)) => (Some(p), true),
        _ => (None, false),
    };
    match path {
        Some(path) => {
            let options = SweepOptions {
                workers: args.workers,
                resume,
                max_records: args.limit,
                cap,
            };
            let summary = sweep_heights(&task, &path, options)?;
            writeln!(
                out,
                "{}: {} records written, {} already present, {} errors, {}",
                path.display(),
                summary.written,
                summary.existing,
                summary.errors,
                if summary.complete {
                    "complete"
                } else {
                    "stopped at limit"
                }
            )?;
        }
        None => {
            let mut records = collect_records(&task, args.workers, cap)?;
            if let Some(n) = args.limit {
                records.truncate(n);
            }
            for rec in &records {
                writeln!(out, "{}", rec.to_json_line())?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn repro_paper(json: bool, cap: DegreeCap, out: &mut Vec<u8>) -> Outcome {
    let rows = repro::REFERENCES
        .iter()
        .map(|r| repro::evaluate(r, cap))
        .collect::<Result<Vec<_>, Error>>()?;
    if json {
        for row in &rows {
            let line = serde_json::json!({
                "check": row.reference.label,
                "expected": row.expected,
                "computed": row.computed,
                "passed": row.passed,
                "note": row.reference.note,
            });
            writeln!(out, "{line}")?;
        }
    } else {
        let w = rows.iter().map(|r| r.reference.label.len()).max().unwrap_or(0);
        let e = rows
            .iter()
            .map(|r| r.expected.len())
            .max()
            .unwrap_or(0)
            .max("expected".len());
        let c = rows
            .iter()
            .map(|r| r.computed.len())
            .max()
            .unwrap_or(0)
            .max("computed".len());
        writeln!(
            out,
            "{:<w$}  {:<e$}  {:<c$}  status  note",
            "check", "expected", "computed"
        )?;
        for r in &rows {
            writeln!(
                out,
                "{:<w$}  {:<e$}  {:<c$}  {:<6}  {}",
                r.reference.label,
                r.expected,
                r.computed,
                if r.passed { "ok" } else { "FAIL" },
                r.reference.note
            )?;
        }
        let failed = rows.iter().filter(|r| !r.passed).count();
        writeln!(out, "{} of {} checks passed", rows.len() - failed, rows.len())?;
    }
    Ok(if rows.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}
