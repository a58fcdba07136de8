//! Triple enumeration, height sweeps and solution hunts with resumable,
//! byte-deterministic JSON-lines output.
//!
//! Records are computed in batches on a worker pool and written in key order
//! by a single writer, so the output depends only on the task. Each result
//! file has a `<file>.manifest.json` sidecar holding the task parameters; a
//! resumed run must present the same task.

use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::height::{height, HeightRecord};
use crate::poly::DegreeCap;
use crate::repr::Triple;
use crate::theorems::{admissible_pairs, bounded_m, BoundedM};

/// Keys processed per batch; the writer flushes after every batch.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    HeightSweep,
    Eq13,
    Eq14,
    FlatHunt,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::HeightSweep,
        TaskKind::Eq13,
        TaskKind::Eq14,
        TaskKind::FlatHunt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::HeightSweep => "height-sweep",
            TaskKind::Eq13 => "eq13",
            TaskKind::Eq14 => "eq14",
            TaskKind::FlatHunt => "flat-hunt",
        }
    }

    pub fn needs_s(self) -> bool {
        matches!(self, TaskKind::Eq13 | TaskKind::Eq14)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameters(format!("unknown search kind `{s}`")))
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: i64,
    pub hi: i64,
}

impl Bounds {
    pub fn new(lo: i64, hi: i64) -> Self {
        Bounds { lo, hi }
    }

    pub fn upto(hi: i64) -> Self {
        Bounds { lo: 3, hi }
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Per-slot bounds for `p < q < r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranges {
    pub p: Bounds,
    pub q: Bounds,
    pub r: Bounds,
}

impl Ranges {
    /// `lo <= p < q < r <= hi`.
    pub fn cube(lo: i64, hi: i64) -> Self {
        let b = Bounds::new(lo, hi);
        Ranges { p: b, q: b, r: b }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTask {
    pub kind: TaskKind,
    pub ranges: Ranges,
    /// The shift in `r = pq + s` for the equation searches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<i64>,
    /// Flat hunts keep only `r ≡ ±c (mod pq)` for some listed `c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residues: Option<Vec<i64>>,
    /// Admit an element below 3 in the lowest slot.
    #[serde(default)]
    pub allow_degenerate: bool,
    /// Keys up to and including this one are skipped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume_from: Option<Vec<i64>>,
}

impl SearchTask {
    pub fn new(kind: TaskKind, ranges: Ranges) -> Self {
        SearchTask {
            kind,
            ranges,
            s: None,
            residues: None,
            allow_degenerate: false,
            resume_from: None,
        }
    }

    pub fn with_s(mut self, s: i64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.ranges;
        let slots: &[(&str, Bounds)] = if self.kind.needs_s() {
            &[("p", r.p), ("q", r.q)]
        } else {
            &[("p", r.p), ("q", r.q), ("r", r.r)]
        };
        for (name, b) in slots {
            if b.lo > b.hi {
                return Err(Error::InvalidParameters(format!(
                    "empty range for {name}: {}..={}",
                    b.lo, b.hi
                )));
            }
        }
        let floor = if self.allow_degenerate { 1 } else { 3 };
        if r.p.lo < floor || r.q.lo < floor.max(3) || (!self.kind.needs_s() && r.r.lo < 3) {
            return Err(Error::InvalidParameters(format!(
                "bounds must start at 3 or above{}",
                if self.allow_degenerate {
                    " (except the lowest slot)"
                } else {
                    ""
                }
            )));
        }
        match (self.kind.needs_s(), self.s) {
            (true, None) => Err(Error::InvalidParameters(format!("{} needs s", self.kind))),
            (true, Some(s)) if s < 1 => Err(Error::InvalidParameters(format!("s must be at least 1, got {s}"))),
            _ => Ok(()),
        }
    }
}

/// All pairwise coprime `p < q < r` within the bounds, lexicographically.
pub fn enumerate_coprime_triples(ranges: &Ranges) -> Vec<Triple> {
    let mut out = Vec::new();
    for p in ranges.p.lo.max(1)..=ranges.p.hi {
        for q in ranges.q.lo.max(p + 1)..=ranges.q.hi {
            if gcd(p, q) != 1 {
                continue;
            }
            for r in ranges.r.lo.max(q + 1)..=ranges.r.hi {
                if gcd(r, p * q) == 1 {
                    if let Ok(t) = Triple::new(p, q, r) {
                        out.push(t);
                    }
                }
            }
        }
    }
    out
}

/// Outcome for one `(p, q, s)` of an equation search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFlag {
    pub r: i64,
    pub height: i64,
    pub target: i64,
    pub solution: bool,
    /// `M̂(s; p_max)` and its bound when the target is `M̂ + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_hat: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_hat_p_max: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Error { error: String },
    Solution(SolutionFlag),
    Height(HeightRecord),
}

/// One persisted line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub task: TaskKind,
    pub key: Vec<i64>,
    #[serde(flatten)]
    pub payload: Payload,
}

impl ResultRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain record serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let mut rec: ResultRecord =
            serde_json::from_str(line).map_err(|e| Error::Persistence(format!("bad result line: {e}")))?;
        if let Payload::Height(h) = &mut rec.payload {
            h.coeff_set = (h.a_minus..=h.a_plus).collect();
        }
        Ok(rec)
    }

    /// Invariant violations of the record, empty when consistent.
    pub fn defects(&self) -> Vec<String> {
        match &self.payload {
            Payload::Height(h) => {
                let mut out = h.defects();
                if self.key != h.triple.elements() {
                    out.push("key differs from the record's triple".into());
                }
                out
            }
            Payload::Solution(f) => {
                if f.solution != (f.height == f.target) {
                    vec!["solution flag inconsistent with height and target".into()]
                } else {
                    Vec::new()
                }
            }
            Payload::Error { .. } => Vec::new(),
        }
    }
}

/// One unit of work, in output order.
#[derive(Debug, Clone, Copy)]
enum Job {
    Triple(Triple),
    Pair { p: i64, q: i64 },
}

impl Job {
    fn key(&self, s: Option<i64>) -> Vec<i64> {
        match *self {
            Job::Triple(t) => t.elements().to_vec(),
            Job::Pair { p, q } => vec![p, q, s.expect("validated")],
        }
    }
}

/// Work list, the fixed `M̂ + 1` target if any, and the degree cap.
struct Plan {
    task: SearchTask,
    jobs: Vec<Job>,
    m_hat: Option<BoundedM>,
    cap: DegreeCap,
}

fn flat_hunt_keeps(task: &SearchTask, t: &Triple) -> bool {
    let Some(res) = &task.residues else { return true };
    let [p, q, r] = t.elements();
    let m = r.rem_euclid(p * q);
    res.iter()
        .any(|&c| m == c.rem_euclid(p * q) || m == (-c).rem_euclid(p * q))
}

impl Plan {
    fn new(task: &SearchTask, cap: DegreeCap) -> Result<Plan> {
        task.validate()?;
        let r = &task.ranges;
        let jobs: Vec<Job> = match task.kind {
            TaskKind::HeightSweep => enumerate_coprime_triples(r).into_iter().map(Job::Triple).collect(),
            TaskKind::FlatHunt => enumerate_coprime_triples(r)
                .into_iter()
                .filter(|t| flat_hunt_keeps(task, t))
                .map(Job::Triple)
                .collect(),
            TaskKind::Eq13 | TaskKind::Eq14 => {
                let s = task.s.expect("validated");
                admissible_pairs(s, r.p.hi, r.q.hi)
                    .into_iter()
                    .filter(|&(p, q)| r.p.contains(p) && r.q.contains(q))
                    .map(|(p, q)| Job::Pair { p, q })
                    .collect()
            }
        };
        let m_hat = match task.kind {
            TaskKind::Eq14 => Some(bounded_m(task.s.expect("validated"), r.p.hi.max(r.q.hi), cap)?),
            _ => None,
        };
        Ok(Plan {
            task: task.clone(),
            jobs,
            m_hat,
            cap,
        })
    }

    fn pending(&self) -> impl Iterator<Item = &Job> {
        let s = self.task.s;
        let after = self.task.resume_from.clone();
        self.jobs
            .iter()
            .filter(move |j| after.as_ref().is_none_or(|a| j.key(s) > *a))
    }

    /// `None` when a flat hunt drops the triple.
    fn run(&self, job: &Job) -> Option<ResultRecord> {
        let task = self.task.kind;
        let key = job.key(self.task.s);
        let payload = match *job {
            Job::Triple(t) => match height(&t, self.cap) {
                Ok(h) if task == TaskKind::FlatHunt && !h.flat => return None,
                Ok(h) => Payload::Height(h),
                Err(e) => Payload::Error { error: e.to_string() },
            },
            Job::Pair { p, q } => {
                let s = self.task.s.expect("validated");
                let r = p * q + s;
                let target = match &self.m_hat {
                    Some(m) => m.value + 1,
                    None => s,
                };
                match Triple::new(p, q, r).and_then(|t| height(&t, self.cap)) {
                    Ok(h) => Payload::Solution(SolutionFlag {
                        r,
                        height: h.height,
                        target,
                        solution: h.height == target,
                        m_hat: self.m_hat.as_ref().map(|m| m.value),
                        m_hat_p_max: self.m_hat.as_ref().map(|m| m.p_max),
                    }),
                    Err(e) => Payload::Error { error: e.to_string() },
                }
            }
        };
        Some(ResultRecord { task, key, payload })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads; 0 means the machine's parallelism.
    pub workers: usize,
    /// Continue an existing result file instead of starting afresh.
    pub resume: bool,
    /// Stop after this many newly written records (simulates an interruption).
    pub max_records: Option<usize>,
    pub cap: DegreeCap,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            workers: 0,
            resume: false,
            max_records: None,
            cap: DegreeCap(crate::poly::DEFAULT_DEGREE_CAP),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSummary {
    /// Records already present when a resumed run started.
    pub existing: usize,
    pub written: usize,
    pub errors: usize,
    /// Every key has been processed.
    pub complete: bool,
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

#[derive(Serialize, Deserialize, PartialEq)]
struct Manifest {
    task: SearchTask,
    degree_cap: u64,
    seed: Option<u64>,
    version: String,
}

fn manifest_for(task: &SearchTask, cap: DegreeCap) -> Manifest {
    let mut task = task.clone();
    // the skip point is a property of a run, not of the result file
    task.resume_from = None;
    Manifest {
        task,
        degree_cap: cap.0,
        seed: None,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Parses and re-validates a result file; a trailing partial line is ignored.
pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = fs::read_to_string(path)?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    let mut out: Vec<ResultRecord> = Vec::new();
    for (i, line) in complete.lines().enumerate() {
        let rec = ResultRecord::from_json_line(line)?;
        let defects = rec.defects();
        if !defects.is_empty() {
            return Err(Error::Persistence(format!("line {}: {}", i + 1, defects.join("; "))));
        }
        if let Some(prev) = out.last() {
            if prev.key >= rec.key {
                return Err(Error::Persistence(format!(
                    "line {}: keys not strictly increasing",
                    i + 1
                )));
            }
        }
        out.push(rec);
    }
    Ok(out)
}

/// Drops a partial last line left by an interrupted writer.
fn truncate_partial_line(path: &Path) -> Result<()> {
    let text = fs::read(path)?;
    let keep = text.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if keep < text.len() {
        OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
    }
    Ok(())
}

/// Runs the task into `path` (JSON lines) and its manifest sidecar.
pub fn sweep_heights(task: &SearchTask, path: &Path, options: SweepOptions) -> Result<SweepSummary> {
    let manifest = manifest_for(task, options.cap);
    let manifest_text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let mpath = manifest_path(path);
    let mut task = task.clone();
    let mut existing = 0;
    if options.resume && path.exists() {
        match fs::read_to_string(&mpath) {
            Ok(found) if found == manifest_text => {}
            Ok(_) => {
                return Err(Error::Persistence(format!(
                    "{} was written for a different task",
                    path.display()
                )))
            }
            Err(_) => {
                return Err(Error::Persistence(format!("{} has no manifest", path.display())));
            }
        }
        truncate_partial_line(path)?;
        let done = read_results(path)?;
        existing = done.len();
        if let Some(last) = done.last() {
            task.resume_from = Some(match &task.resume_from {
                Some(given) if given > &last.key => given.clone(),
                _ => last.key.clone(),
            });
        }
    } else {
        File::create(path)?;
    }
    fs::write(&mpath, manifest_text)?;

    let plan = Plan::new(&task, options.cap)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::InvalidParameters(format!("worker pool: {e}")))?;
    let mut out = OpenOptions::new().append(true).open(path)?;
    let pending: Vec<&Job> = plan.pending().collect();
    let budget = options.max_records.unwrap_or(usize::MAX);
    let (mut written, mut errors) = (0, 0);
    let mut complete = true;
    for batch in pending.chunks(BATCH) {
        let records: Vec<ResultRecord> = pool.install(|| batch.par_iter().filter_map(|job| plan.run(job)).collect());
        let mut text = String::new();
        for rec in &records {
            if written == budget {
                complete = false;
                break;
            }
            errors += matches!(rec.payload, Payload::Error { .. }) as usize;
            text.push_str(&rec.to_json_line());
            text.push('\n');
            written += 1;
        }
        out.write_all(text.as_bytes())?;
        out.flush()?;
        if !complete {
            break;
        }
    }
    Ok(SweepSummary {
        existing,
        written,
        errors,
        complete,
    })
}

/// Runs the task in memory; same records, same order as the file writer.
pub fn collect_records(task: &SearchTask, workers: usize, cap: DegreeCap) -> Result<Vec<ResultRecord>> {
    let plan = Plan::new(task, cap)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameters(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        plan.pending()
            .collect::<Vec<_>>()
            .par_iter()
            .filter_map(|j| plan.run(j))
            .collect()
    }))
}

/// Pairs in an equation search and the heights found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationSearch {
    pub s: i64,
    pub target: i64,
    pub solutions: Vec<(i64, i64)>,
    pub pairs_checked: usize,
    /// Records for every pair, in key order.
    pub records: Vec<ResultRecord>,
    /// Present for `eq14`, whose target is `M̂(s; p_max) + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_hat: Option<BoundedM>,
}

fn equation_search(task: SearchTask, cap: DegreeCap) -> Result<EquationSearch> {
    let plan = Plan::new(&task, cap)?;
    let records: Vec<ResultRecord> = plan.jobs.par_iter().filter_map(|j| plan.run(j)).collect();
    let mut solutions = Vec::new();
    for rec in &records {
        match &rec.payload {
            Payload::Solution(f) if f.solution => solutions.push((rec.key[0], rec.key[1])),
            Payload::Error { error } => return Err(Error::InvalidParameters(error.clone())),
            _ => {}
        }
    }
    let s = task.s.expect("validated");
    Ok(EquationSearch {
        s,
        target: plan.m_hat.as_ref().map_or(s, |m| m.value + 1),
        solutions,
        pairs_checked: records.len(),
        records,
        m_hat: plan.m_hat,
    })
}

/// Pairs `3 <= p < q` with `p <= p_max`, `q <= q_max`, coprime to each other
/// and to `s`, with `A(p, q, pq + s) = s`.
pub fn find_eq13_solutions(s: i64, p_max: i64, q_max: i64, cap: DegreeCap) -> Result<EquationSearch> {
    let ranges = Ranges {
        p: Bounds::upto(p_max),
        q: Bounds::upto(q_max),
        r: Bounds::upto(i64::MAX),
    };
    equation_search(SearchTask::new(TaskKind::Eq13, ranges).with_s(s), cap)
}

/// Pairs `3 <= p < q <= p_max` with `A(p, q, pq + s) = M̂(s; p_max) + 1`;
/// conditional on the bounded maximum being the true one.
pub fn find_eq14_solutions(s: i64, p_max: i64, cap: DegreeCap) -> Result<EquationSearch> {
    let ranges = Ranges {
        p: Bounds::upto(p_max),
        q: Bounds::upto(p_max),
        r: Bounds::upto(i64::MAX),
    };
    equation_search(SearchTask::new(TaskKind::Eq14, ranges).with_s(s), cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: DegreeCap = DegreeCap(crate::poly::DEFAULT_DEGREE_CAP);

    fn brute_triples(lo: i64, hi: i64) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        for p in lo..=hi {
            for q in lo..=hi {
                for r in lo..=hi {
                    if p < q && q < r && gcd(p, q) == 1 && gcd(q, r) == 1 && gcd(p, r) == 1 {
                        out.push([p, q, r]);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let ts = enumerate_coprime_triples(&Ranges::cube(3, 5));
        assert!(ts.iter().any(|t| t.elements() == [3, 4, 5]));
        assert!(ts.iter().all(|t| !(t.p() == 4 && t.r() % 2 == 0)));
        for hi in [5, 7, 12] {
            let got: Vec<[i64; 3]> = enumerate_coprime_triples(&Ranges::cube(3, hi))
                .iter()
                .map(|t| t.elements())
                .collect();
            assert_eq!(got, brute_triples(3, hi));
        }
    }

    #[test]
    fn degenerate_slot_needs_opt_in() {
        let mut task = SearchTask::new(TaskKind::HeightSweep, Ranges::cube(1, 6));
        assert!(task.validate().is_err());
        task.allow_degenerate = true;
        task.ranges.q.lo = 3;
        task.ranges.r.lo = 3;
        assert!(task.validate().is_ok());
    }

    #[test]
    fn kinds_parse() {
        for k in TaskKind::ALL {
            assert_eq!(k.name().parse::<TaskKind>().unwrap(), k);
        }
        assert!("eq15".parse::<TaskKind>().is_err());
    }

    #[test]
    fn eq13_small_cases() {
        let one = find_eq13_solutions(1, 10, 10, CAP).unwrap();
        assert_eq!(one.solutions.len(), one.pairs_checked);
        assert!(one.pairs_checked > 10);
        let two = find_eq13_solutions(2, 5, 10, CAP).unwrap();
        assert!(two.solutions.contains(&(3, 5)));
        assert!(two.solutions.iter().all(|&(p, q)| p % 2 == 1 && q % 2 == 1));
    }

    #[test]
    fn eq14_small_cases() {
        let one = find_eq14_solutions(1, 10, CAP).unwrap();
        assert_eq!(one.target, 1);
        assert_eq!(one.solutions.len(), one.pairs_checked);
        let three = find_eq14_solutions(3, 20, CAP).unwrap();
        assert_eq!(three.m_hat.as_ref().unwrap().value, 2);
        assert!(three.solutions.contains(&(7, 16)));
    }

    #[test]
    fn records_round_trip() {
        let task = SearchTask::new(TaskKind::HeightSweep, Ranges::cube(3, 7));
        let plan = Plan::new(&task, CAP).unwrap();
        for job in &plan.jobs {
            let rec = plan.run(job).unwrap();
            let back = ResultRecord::from_json_line(&rec.to_json_line()).unwrap();
            assert_eq!(back, rec);
            assert!(back.defects().is_empty());
        }
        let task = SearchTask::new(TaskKind::Eq13, Ranges::cube(3, 8)).with_s(2);
        let plan = Plan::new(&task, CAP).unwrap();
        let rec = plan.run(&plan.jobs[0]).unwrap();
        assert_eq!(ResultRecord::from_json_line(&rec.to_json_line()).unwrap(), rec);
        let err = ResultRecord {
            task: TaskKind::HeightSweep,
            key: vec![3, 4, 5],
            payload: Payload::Error {
                error: "degree cap".into(),
            },
        };
        assert_eq!(ResultRecord::from_json_line(&err.to_json_line()).unwrap(), err);
    }

    #[test]
    fn flat_hunt_with_unit_residues_is_all_flat() {
        let mut task = SearchTask::new(TaskKind::FlatHunt, Ranges::cube(3, 40));
        task.residues = Some(vec![1]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.jsonl");
        let sum = sweep_heights(&task, &path, SweepOptions::default()).unwrap();
        let recs = read_results(&path).unwrap();
        assert_eq!(recs.len(), sum.written);
        let expected = enumerate_coprime_triples(&task.ranges)
            .iter()
            .filter(|t| [1, t.p() * t.q() - 1].contains(&(t.r() % (t.p() * t.q()))))
            .count();
        assert_eq!(recs.len(), expected);
        assert!(recs.iter().all(|r| matches!(&r.payload, Payload::Height(h) if h.flat)));
    }

    #[test]
    fn sweep_resume_and_workers_are_byte_identical() {
        let task = SearchTask::new(TaskKind::HeightSweep, Ranges::cube(3, 14));
        let dir = tempfile::tempdir().unwrap();
        let full = dir.path().join("full.jsonl");
        let sum = sweep_heights(
            &task,
            &full,
            SweepOptions {
                workers: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(sum.complete);
        assert_eq!(sum.written, enumerate_coprime_triples(&task.ranges).len());
        let reference = fs::read(&full).unwrap();

        let other = dir.path().join("other.jsonl");
        sweep_heights(
            &task,
            &other,
            SweepOptions {
                workers: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(fs::read(&other).unwrap(), reference);

        let cut = dir.path().join("cut.jsonl");
        let first = sweep_heights(
            &task,
            &cut,
            SweepOptions {
                max_records: Some(37),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!first.complete);
        // simulate a write cut off mid-line
        let mut f = OpenOptions::new().append(true).open(&cut).unwrap();
        f.write_all(b"{\"task\":\"height-sw").unwrap();
        drop(f);
        let resumed = sweep_heights(
            &task,
            &cut,
            SweepOptions {
                resume: true,
                workers: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(resumed.existing, 37);
        assert!(resumed.complete);
        assert_eq!(fs::read(&cut).unwrap(), reference);
        assert_eq!(
            fs::read(manifest_path(&cut)).unwrap(),
            fs::read(manifest_path(&full)).unwrap()
        );
    }

    #[test]
    fn resume_refuses_a_different_task() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.jsonl");
        let task = SearchTask::new(TaskKind::HeightSweep, Ranges::cube(3, 9));
        sweep_heights(&task, &path, SweepOptions::default()).unwrap();
        let other = SearchTask::new(TaskKind::HeightSweep, Ranges::cube(3, 10));
        let err = sweep_heights(
            &other,
            &path,
            SweepOptions {
                resume: true,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Persistence(_)));
    }

    #[test]
    fn corrupted_records_are_rejected_on_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.jsonl");
        let task = SearchTask::new(TaskKind::HeightSweep, Ranges::cube(3, 9));
        sweep_heights(&task, &path, SweepOptions::default()).unwrap();
        let text = fs::read_to_string(&path)
            .unwrap()
            .replacen("\"height\":2", "\"height\":3", 1);
        fs::write(&path, text).unwrap();
        assert!(read_results(&path).is_err());
    }

    #[test]
    fn degree_cap_failures_become_error_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.jsonl");
        let task = SearchTask::new(TaskKind::HeightSweep, Ranges::cube(3, 9));
        let opts = SweepOptions {
            cap: DegreeCap(100),
            ..Default::default()
        };
        let sum = sweep_heights(&task, &path, opts).unwrap();
        assert!(sum.errors > 0 && sum.errors < sum.written);
        let recs = read_results(&path).unwrap();
        assert_eq!(
            recs.iter()
                .filter(|r| matches!(r.payload, Payload::Error { .. }))
                .count(),
            sum.errors
        );
    }
}
