//! Point-wise validators for the auxiliary lemmas on the indicator `χ`,
//! the window sums `σ_k`, and the coefficients.
//!
//! Each lemma is a predicate over a box of integer points clipped to its
//! hypothesis range. The box is either walked exhaustively (against dense
//! tables) or sampled from a seeded ChaCha stream (against the O(1)
//! decomposition).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

mod dense;

use self::dense::Dense;
use super::VerificationReport;
use crate::error::{Error, Result};
use crate::poly::{coeffs_series, degree, series_prefix, CoefficientVector, DegreeCap, Mode};
use crate::repr::{f_residue_table, others, residue, ChiTable, Representation, Role, Triple, TripleContext};

/// Triples with `pqr` at most this are checked exhaustively by [`verify_lemma`].
pub const EXHAUSTIVE_LIMIT: i64 = 100_000;

/// Largest `pqr` for which dense tables are built.
pub const DENSE_LIMIT: i64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LemmaId {
    Lemma1,
    Lemma2,
    Eq24,
    Eq25,
    Eq26,
    Lemma3,
    Lemma4,
    Lemma5,
    Lemma6,
    Lemma7,
    Lemma9,
    Lemma10,
    Lemma11,
}

impl LemmaId {
    pub const ALL: [LemmaId; 13] = [
        LemmaId::Lemma1,
        LemmaId::Lemma2,
        LemmaId::Eq24,
        LemmaId::Eq25,
        LemmaId::Eq26,
        LemmaId::Lemma3,
        LemmaId::Lemma4,
        LemmaId::Lemma5,
        LemmaId::Lemma6,
        LemmaId::Lemma7,
        LemmaId::Lemma9,
        LemmaId::Lemma10,
        LemmaId::Lemma11,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Lemma1 => "lemma1",
            LemmaId::Lemma2 => "lemma2",
            LemmaId::Eq24 => "eq2.4",
            LemmaId::Eq25 => "eq2.5",
            LemmaId::Eq26 => "eq2.6",
            LemmaId::Lemma3 => "lemma3",
            LemmaId::Lemma4 => "lemma4",
            LemmaId::Lemma5 => "lemma5",
            LemmaId::Lemma6 => "lemma6",
            LemmaId::Lemma7 => "lemma7",
            LemmaId::Lemma9 => "lemma9",
            LemmaId::Lemma10 => "lemma10",
            LemmaId::Lemma11 => "lemma11",
        }
    }

    /// Lemmas stated for `r = pq + s` (and the companion `{p, q, s}`).
    pub fn needs_shift(self) -> bool {
        matches!(
            self,
            LemmaId::Lemma6 | LemmaId::Lemma7 | LemmaId::Lemma9 | LemmaId::Lemma10 | LemmaId::Lemma11
        )
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownLemma(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Exhaustive,
    Seeded { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct LemmaOptions {
    pub sampling: Sampling,
    /// Check every role assignment, not only the one the lemma is stated for.
    pub all_roles: bool,
    pub cap: DegreeCap,
}

/// Checks one lemma on `t`: exhaustively when `pqr <= EXHAUSTIVE_LIMIT`,
/// otherwise on `samples` seeded points per role assignment.
pub fn verify_lemma(
    id: &str,
    t: &Triple,
    s: Option<i64>,
    samples: u64,
    seed: u64,
    cap: DegreeCap,
) -> Result<VerificationReport> {
    let id: LemmaId = id.parse()?;
    if samples < 1 {
        return Err(Error::PreconditionViolated("samples must be at least 1".into()));
    }
    let sampling = if t.product() <= EXHAUSTIVE_LIMIT {
        Sampling::Exhaustive
    } else {
        Sampling::Seeded { samples, seed }
    };
    verify_lemma_with(
        id,
        t,
        s,
        LemmaOptions {
            sampling,
            all_roles: true,
            cap,
        },
    )
}

pub fn verify_lemma_with(id: LemmaId, t: &Triple, s: Option<i64>, options: LemmaOptions) -> Result<VerificationReport> {
    LemmaSuite::new(*t, s, options)?.check(id)
}

/// Access to `χ`, `σ_k`, and the decomposition of one triple.
trait Source {
    fn chi(&self, n: i64) -> u8;
    fn sigma(&self, k: i64, m: i64) -> i64;
    fn rep(&self, n: i64) -> Representation;
}

impl Source for TripleContext {
    #[inline]
    fn chi(&self, n: i64) -> u8 {
        self.chi_unchecked(n)
    }

    fn sigma(&self, k: i64, m: i64) -> i64 {
        ((m - k + 1).max(0)..=m).map(|n| self.chi_unchecked(n) as i64).sum()
    }

    fn rep(&self, n: i64) -> Representation {
        self.decompose(n)
    }
}

#[derive(Debug, Clone, Copy)]
enum Variant {
    /// the singled-out element (window for `lemma1`, `c` elsewhere)
    Pivot(Role),
    /// `(a, b, c)` for the interval lemma
    Ordered(Role, Role, Role),
    /// the two elements `(p, q)` with `r = pq + s`
    Pair(i64, i64),
    Fixed,
}

enum Flow {
    Skip,
    Ok,
    Fail(Box<Value>),
}

#[derive(Debug, Default)]
struct Tally {
    points: u64,
    failures: u64,
    witness: Option<Value>,
}

impl Tally {
    fn absorb(&mut self, other: Tally) {
        self.points += other.points;
        self.failures += other.failures;
        if self.witness.is_none() {
            self.witness = other.witness;
        }
    }

    #[inline(always)]
    fn record(&mut self, flow: Flow) {
        match flow {
            Flow::Skip => return,
            Flow::Ok => {}
            Flow::Fail(w) => {
                self.failures += 1;
                self.witness.get_or_insert(*w);
            }
        }
        self.points += 1;
    }
}

/// Walks (or samples) the half-open box `ranges`.
#[inline(always)]
fn drive<const N: usize>(
    ranges: [(i64, i64); N],
    sampling: Sampling,
    rng: &mut ChaCha8Rng,
    mut f: impl FnMut([i64; N]) -> Flow,
) -> Tally {
    let mut tally = Tally::default();
    if ranges.iter().any(|&(lo, hi)| lo >= hi) {
        return tally;
    }
    match sampling {
        Sampling::Exhaustive => {
            let mut pt = ranges.map(|r| r.0);
            let (lo, hi) = ranges[N - 1];
            loop {
                for x in lo..hi {
                    pt[N - 1] = x;
                    tally.record(f(pt));
                }
                let mut d = N - 1;
                loop {
                    if d == 0 {
                        return tally;
                    }
                    d -= 1;
                    pt[d] += 1;
                    if pt[d] < ranges[d].1 {
                        break;
                    }
                    pt[d] = ranges[d].0;
                }
            }
        }
        Sampling::Seeded { samples, .. } => {
            let max_draws = samples.saturating_mul(200);
            let mut draws = 0;
            while tally.points < samples && draws < max_draws {
                draws += 1;
                let pt = ranges.map(|(lo, hi)| rng.gen_range(lo..hi));
                tally.record(f(pt));
            }
            tally
        }
    }
}

#[inline(always)]
fn check(ok: bool, witness: impl FnOnce() -> Value) -> Flow {
    if ok {
        Flow::Ok
    } else {
        fail(witness)
    }
}

#[cold]
#[inline(never)]
fn fail(witness: impl FnOnce() -> Value) -> Flow {
    Flow::Fail(Box::new(witness()))
}

/// Everything needed to validate the lemmas on one triple.
pub struct LemmaSuite {
    triple: Triple,
    options: LemmaOptions,
    /// `s` with `r = pq + s`, when `r > pq`.
    shift: Option<i64>,
    ctx: TripleContext,
    /// coefficients when sampling; the dense tables carry their own
    coeffs: Option<CoefficientVector>,
    dense: Option<Dense>,
    /// indicator table of `{p, q, s}` over `[0, pqs)`
    companion: Option<ChiTable>,
}

impl LemmaSuite {
    pub fn new(triple: Triple, s: Option<i64>, options: LemmaOptions) -> Result<Self> {
        if !triple.is_ternary() {
            return Err(Error::PreconditionViolated(format!("{triple} is not ternary")));
        }
        let [p, q, r] = triple.elements();
        let shift = match s {
            Some(s) if s < 1 || r != p * q + s => {
                return Err(Error::PreconditionViolated(format!(
                    "need r = pq + s with s >= 1, got {triple} and s = {s}"
                )))
            }
            Some(s) => Some(s),
            None if r > p * q => Some(r - p * q),
            None => None,
        };
        let companion = match shift {
            Some(s) => {
                let c = Triple::new(p, q, s).map_err(|e| Error::PreconditionViolated(e.to_string()))?;
                Some(ChiTable::build(&c, c.product()))
            }
            None => None,
        };
        let ctx = TripleContext::new(triple);
        let dense = match options.sampling {
            Sampling::Exhaustive if triple.product() > DENSE_LIMIT => {
                return Err(Error::InvalidParameters(format!(
                    "exhaustive checks are limited to pqr <= {DENSE_LIMIT}"
                )))
            }
            Sampling::Exhaustive => Some(()),
            _ => None,
        };
        let (coeffs, dense) = match dense {
            Some(()) => {
                options.cap.check(degree(&triple))?;
                let half = series_prefix(&triple, degree(&triple) as usize / 2 + 1)?;
                (None, Some(Dense::new(&ctx, &half)))
            }
            None => (Some(coeffs_series(&triple, Mode::Half, options.cap)?), None),
        };
        Ok(LemmaSuite {
            triple,
            options,
            shift,
            coeffs,
            ctx,
            dense,
            companion,
        })
    }

    pub fn triple(&self) -> &Triple {
        &self.triple
    }

    fn coeff(&self, m: i64) -> i64 {
        match (&self.dense, &self.coeffs) {
            (Some(d), _) => d.coeff(m),
            (None, Some(c)) => c.get(m),
            (None, None) => unreachable!("suite without coefficients"),
        }
    }

    pub fn shift(&self) -> Option<i64> {
        self.shift
    }

    /// Lemma ids applicable to this triple.
    pub fn applicable(&self) -> impl Iterator<Item = LemmaId> + '_ {
        LemmaId::ALL
            .into_iter()
            .filter(|id| !id.needs_shift() || self.shift.is_some())
    }

    pub fn check(&self, id: LemmaId) -> Result<VerificationReport> {
        if id.needs_shift() && self.shift.is_none() {
            return Err(Error::PreconditionViolated(format!(
                "{id} needs r = pq + s with s >= 1; {} is not of that form",
                self.triple
            )));
        }
        let seed = match self.options.sampling {
            Sampling::Seeded { seed, .. } => Some(seed),
            Sampling::Exhaustive => None,
        };
        let mut tally = Tally::default();
        for v in self.variants(id) {
            tally.absorb(match &self.dense {
                Some(d) => self.run_dense(d, id, v),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
                    self.run(&self.ctx, id, v, &mut rng)
                }
            });
        }
        let mut instance = self.triple.elements().to_vec();
        if id.needs_shift() {
            instance.extend(self.shift);
        }
        let mode = if seed.is_some() { "sampled" } else { "exhaustive" };
        let detail = format!(
            "{id} on {}: {} {mode} points, {} failures",
            self.triple, tally.points, tally.failures
        );
        let data = json!({ "mode": mode, "points": tally.points, "failures": tally.failures });
        let mut report = match tally.witness {
            None => VerificationReport::pass(id.name(), instance, detail, data),
            Some(w) => VerificationReport::fail(id.name(), instance, detail, data, w),
        };
        report.seed = seed;
        report.points = tally.points;
        Ok(report)
    }

    fn roles(&self, canonical: Role) -> Vec<Role> {
        if self.options.all_roles {
            Role::ALL.to_vec()
        } else {
            vec![canonical]
        }
    }

    /// Role assignments under which `id` is checked.
    fn variants(&self, id: LemmaId) -> Vec<Variant> {
        let (p, q) = (self.triple.p(), self.triple.q());
        match id {
            LemmaId::Lemma1 => self.roles(Role::P).into_iter().map(Variant::Pivot).collect(),
            LemmaId::Lemma2 | LemmaId::Eq24 | LemmaId::Eq25 | LemmaId::Eq26 | LemmaId::Lemma4 | LemmaId::Lemma5 => {
                self.roles(Role::R).into_iter().map(Variant::Pivot).collect()
            }
            LemmaId::Lemma3 => {
                let mut out = Vec::new();
                for c in self.roles(Role::R) {
                    let [a, b] = others(c);
                    out.push(Variant::Ordered(a, b, c));
                    if self.options.all_roles {
                        out.push(Variant::Ordered(b, a, c));
                    }
                }
                out
            }
            LemmaId::Lemma6 if self.options.all_roles => vec![Variant::Pair(p, q), Variant::Pair(q, p)],
            LemmaId::Lemma6 => vec![Variant::Pair(p, q)],
            LemmaId::Lemma7 => vec![Variant::Pair(p.min(q), p.max(q))],
            LemmaId::Lemma9 | LemmaId::Lemma10 | LemmaId::Lemma11 => vec![Variant::Fixed],
        }
    }

    /// Point-wise evaluation through `src`.
    fn run<S: Source>(&self, src: &S, id: LemmaId, v: Variant, rng: &mut ChaCha8Rng) -> Tally {
        match (id, v) {
            (LemmaId::Lemma1, Variant::Pivot(w)) => self.lemma1(src, w, rng),
            (LemmaId::Lemma2, Variant::Pivot(c)) => self.lemma2(src, c, rng),
            (LemmaId::Eq24, Variant::Pivot(c)) => self.eq24(src, c, rng),
            (LemmaId::Eq25, Variant::Pivot(c)) => self.eq25(src, c, rng),
            (LemmaId::Eq26, Variant::Pivot(c)) => self.eq26(src, c, rng),
            (LemmaId::Lemma3, Variant::Ordered(a, b, c)) => self.lemma3(src, (a, b, c), rng),
            (LemmaId::Lemma4, Variant::Pivot(c)) => self.lemma4(src, c, rng),
            (LemmaId::Lemma5, Variant::Pivot(c)) => self.lemma5(src, c, rng),
            (LemmaId::Lemma6, Variant::Pair(p, q)) => self.lemma6(src, p, q, rng),
            (LemmaId::Lemma7, Variant::Pair(..)) => self.lemma7(src, rng),
            (LemmaId::Lemma9, _) => self.lemma9(src, rng),
            (LemmaId::Lemma10, _) => self.lemma10(src, rng),
            (LemmaId::Lemma11, _) => self.lemma11(src, rng),
            _ => unreachable!("variant {v:?} does not apply to {id}"),
        }
    }

    /// Exhaustive evaluation with the table kernels.
    fn run_dense(&self, d: &Dense, id: LemmaId, v: Variant) -> Tally {
        let t = &self.triple;
        match (id, v) {
            (LemmaId::Lemma1, _) => self.run(d, id, v, &mut ChaCha8Rng::seed_from_u64(0)),
            (LemmaId::Lemma2, Variant::Pivot(c)) => {
                let (_, a, b) = t.split(c);
                dense::lemma2(d, a, b)
            }
            (LemmaId::Eq24, Variant::Pivot(c)) => dense::eq24(d, c),
            (LemmaId::Eq25, Variant::Pivot(c)) => dense::eq25(d, c),
            (LemmaId::Eq26, Variant::Pivot(c)) => dense::eq26(d, c),
            (LemmaId::Lemma3, Variant::Ordered(a, b, c)) => dense::lemma3(d, t.get(a), t.get(b), t.get(c)),
            (LemmaId::Lemma4, Variant::Pivot(c)) => dense::lemma4(d, c),
            (LemmaId::Lemma5, Variant::Pivot(c)) => {
                let (s, table) = self.lemma5_companion(c);
                dense::lemma5(d, c, s, &table)
            }
            (LemmaId::Lemma6, Variant::Pair(p, q)) => dense::lemma6(d, p, q, self.shift.unwrap()),
            (LemmaId::Lemma7, Variant::Pair(p, q)) => dense::lemma7(d, p, q, self.shift.unwrap()),
            (LemmaId::Lemma9, _) => dense::lemma9(d, self.companion(), self.shift.unwrap()),
            (LemmaId::Lemma10, _) => dense::lemma10(d, self.shift.unwrap()),
            (LemmaId::Lemma11, _) => dense::lemma11(d, self.companion(), self.shift.unwrap()),
            _ => unreachable!("variant {v:?} does not apply to {id}"),
        }
    }

    /// `s' ≡ c (mod ab)` with `s' != c`, and `f` of `{a, b, s'}` on `[0, ab)`.
    fn lemma5_companion(&self, c_role: Role) -> (i64, Vec<i64>) {
        let (c, a, b) = self.triple.split(c_role);
        let ab = a * b;
        let s = if c > ab { residue(c, ab) } else { c + ab };
        let other = TripleContext::new(Triple::new(a, b, s).expect("coprime companion"));
        (s, (0..ab).map(|n| other.f_value(n, Role::R)).collect())
    }

    fn product(&self) -> i64 {
        self.triple.product()
    }

    /// `a_m` as the alternating window sum with window element `w`.
    fn lemma1<S: Source>(&self, src: &S, w: Role, rng: &mut ChaCha8Rng) -> Tally {
        let (k, b, c) = self.triple.split(w);
        let [p, q, r] = self.triple.elements();
        drive([(-(p + q + r), self.product())], self.options.sampling, rng, |[m]| {
            let lhs = self.coeff(m);
            let rhs = src.sigma(k, m) - src.sigma(k, m - b) - src.sigma(k, m - c) + src.sigma(k, m - b - c);
            check(
                lhs == rhs,
                || json!({ "m": m, "window": k, "a_m": lhs, "window_sum": rhs }),
            )
        })
    }

    fn lemma2<S: Source>(&self, src: &S, c: Role, rng: &mut ChaCha8Rng) -> Tally {
        let (_, a, b) = self.triple.split(c);
        drive([(0, self.product())], self.options.sampling, rng, |[n]| {
            let v = src.chi(n) as i64 - src.chi(n - a) as i64 - src.chi(n - b) as i64 + src.chi(n - a - b) as i64;
            check(v.abs() <= 1, || json!({ "n": n, "a": a, "b": b, "value": v }))
        })
    }

    fn eq24<S: Source>(&self, src: &S, c: Role, rng: &mut ChaCha8Rng) -> Tally {
        let (_, a, b) = self.triple.split(c);
        drive([(0, self.product())], self.options.sampling, rng, |[n]| {
            let rep = src.rep(n);
            if rep.component(c) == 0 && rep.delta == 0 {
                return Flow::Ok;
            }
            let (now, before) = (src.chi(n), src.chi(n - a * b));
            check(now == before, || json!({ "n": n, "chi": now, "chi_shifted": before }))
        })
    }

    fn eq25<S: Source>(&self, src: &S, c_role: Role, rng: &mut ChaCha8Rng) -> Tally {
        let (c, a, b) = self.triple.split(c_role);
        let ab = a * b;
        drive([(-ab + 1, ab), (0, c)], self.options.sampling, rng, |[k, t]| {
            let n = k * c + t * ab;
            if n < 0 || n >= self.product() {
                return Flow::Skip;
            }
            let (lhs, rhs) = (src.chi(n), src.chi(k * c));
            check(lhs == rhs, || json!({ "k": k, "t": t, "chi": lhs, "chi_base": rhs }))
        })
    }

    fn eq26<S: Source>(&self, src: &S, c_role: Role, rng: &mut ChaCha8Rng) -> Tally {
        let (c, a, b) = self.triple.split(c_role);
        let ab = a * b;
        drive([(-ab + 1, ab), (1, c)], self.options.sampling, rng, |[k, t]| {
            if k * c - t * ab < 0 {
                return Flow::Skip;
            }
            let v = src.chi(k * c - t * ab);
            check(v == 0, || json!({ "k": k, "t": t, "chi": v }))
        })
    }

    /// `a_m = a_{m-ab}` unless a multiple `n` of `c` in `I_1 ∪ I_2` has
    /// `χ(n) = 1` or `χ(n - c) = 1`.
    fn lemma3<S: Source>(&self, src: &S, roles: (Role, Role, Role), rng: &mut ChaCha8Rng) -> Tally {
        let (a, b, c) = (
            self.triple.get(roles.0),
            self.triple.get(roles.1),
            self.triple.get(roles.2),
        );
        let blocked = |lo: i64, hi: i64| {
            let mut n = (lo.div_euclid(c) + 1) * c;
            while n <= hi {
                if src.chi(n) == 1 || src.chi(n - c) == 1 {
                    return true;
                }
                n += c;
            }
            false
        };
        drive([(0, self.product())], self.options.sampling, rng, |[m]| {
            if blocked(m - b - a, m - b) || blocked(m - a, m) {
                return Flow::Ok;
            }
            let (now, before) = (self.coeff(m), self.coeff(m - a * b));
            check(
                now == before,
                || json!({ "m": m, "a_m": now, "a_shifted": before, "roles": [a, b, c] }),
            )
        })
    }

    fn lemma4<S: Source>(&self, src: &S, c_role: Role, rng: &mut ChaCha8Rng) -> Tally {
        let (c, a, b) = self.triple.split(c_role);
        let ab = a * b;
        let f = f_residue_table(&self.triple, c_role);
        drive([(0, self.product())], self.options.sampling, rng, |[n]| {
            let fv = f[(n % ab) as usize];
            let predicted = (fv <= n / c) as u8;
            let chi = src.chi(n);
            check(
                chi == predicted,
                || json!({ "n": n, "chi": chi, "f": fv, "floor": n / c }),
            )
        })
    }

    /// `f` read from the decomposition of `θ` at `n` agrees with `f` read from
    /// the decomposition of `{a, b, s'}` at `[n]_{ab}`, where `s' ≡ c (mod ab)`
    /// and `s' != c`.
    fn lemma5<S: Source>(&self, src: &S, c_role: Role, rng: &mut ChaCha8Rng) -> Tally {
        let (_, a, b) = self.triple.split(c_role);
        let ab = a * b;
        let (s, f_other) = self.lemma5_companion(c_role);
        let [ra, rb] = others(c_role);
        let (xa, xb) = (self.triple.get(ra), self.triple.get(rb));
        drive([(0, self.product())], self.options.sampling, rng, |[n]| {
            let rep = src.rep(n);
            let here = rep.component(ra) * xb + rep.component(rb) * xa;
            let there = f_other[(n % ab) as usize];
            check(
                here == there,
                || json!({ "n": n, "f": here, "f_companion": there, "companion": s }),
            )
        })
    }

    fn sigma1<S: Source>(src: &S, s: i64, p: i64, q: i64, m: i64) -> i64 {
        src.sigma(s, m) - src.sigma(s, m - p) - src.sigma(s, m - q) + src.sigma(s, m - q - p)
    }

    fn lemma6<S: Source>(&self, src: &S, p: i64, q: i64, rng: &mut ChaCha8Rng) -> Tally {
        let s = self.shift.unwrap();
        let r = self.triple.r();
        let pq = p * q;
        drive([(-(p + q + r), self.product())], self.options.sampling, rng, |[m]| {
            let s1 = Self::sigma1(src, s, p, q, m);
            let s2 =
                src.sigma(p, m - s) - src.sigma(p, m - s - pq) - src.sigma(p, m - q - s) + src.sigma(p, m - q - s - pq);
            let a = self.coeff(m);
            check(a == s1 + s2, || json!({ "m": m, "a_m": a, "sigma1": s1, "sigma2": s2 }))
        })
    }

    fn lemma7<S: Source>(&self, src: &S, rng: &mut ChaCha8Rng) -> Tally {
        let s = self.shift.unwrap();
        let r = self.triple.r();
        let (p, q) = (
            self.triple.p().min(self.triple.q()),
            self.triple.p().max(self.triple.q()),
        );
        drive([(-(p + q + r), self.product())], self.options.sampling, rng, |[m]| {
            let s1 = Self::sigma1(src, s, p, q, m);
            let n = (m - s).div_euclid(r) * r;
            let correction = if n > m - s - p {
                src.chi(n) as i64
            } else if n > m - s - q - p && n <= m - s - q {
                -(src.chi(n) as i64)
            } else {
                0
            };
            let a = self.coeff(m);
            check(
                a == s1 + correction,
                || json!({ "m": m, "a_m": a, "sigma1": s1, "alpha": n / r, "correction": correction }),
            )
        })
    }

    fn companion(&self) -> &ChiTable {
        self.companion.as_ref().expect("shift lemmas have a companion")
    }

    fn lemma9<S: Source>(&self, src: &S, rng: &mut ChaCha8Rng) -> Tally {
        let s = self.shift.unwrap();
        let [p, q, r] = self.triple.elements();
        let pq = p * q;
        let other = self.companion();
        drive([(1 - pq, pq), (1 - s, s)], self.options.sampling, rng, |[k, j]| {
            let (n, n2) = (k * r + j, k * s + j);
            if n >= self.product() || n2 >= other.limit() {
                return Flow::Skip;
            }
            let (lhs, rhs) = (src.chi(n), other.chi(n2));
            check(
                lhs == rhs,
                || json!({ "k": k, "j": j, "chi": lhs, "chi_companion": rhs }),
            )
        })
    }

    fn lemma10<S: Source>(&self, src: &S, rng: &mut ChaCha8Rng) -> Tally {
        let s = self.shift.unwrap();
        let [p, q, r] = self.triple.elements();
        let pq = p * q;
        let bmax = pq / s;
        drive(
            [(1 - pq, pq), (1 - s, s), (-bmax, bmax + 1)],
            self.options.sampling,
            rng,
            |[k, j, beta]| {
                let base = k * r + j;
                if j == 0 || base >= self.product() || base + beta * pq >= self.product() {
                    return Flow::Skip;
                }
                let (lhs, rhs) = (src.chi(base + beta * pq), src.chi(base));
                check(
                    lhs == rhs,
                    || json!({ "k": k, "j": j, "beta": beta, "chi_shifted": lhs, "chi": rhs }),
                )
            },
        )
    }

    fn lemma11<S: Source>(&self, src: &S, rng: &mut ChaCha8Rng) -> Tally {
        let s = self.shift.unwrap();
        let [p, q, r] = self.triple.elements();
        let pq = p * q;
        let bmax = pq / s;
        let other = self.companion();
        drive(
            [(1 - pq, pq), (0, s), (-bmax, bmax + 1)],
            self.options.sampling,
            rng,
            |[k, g, beta]| {
                let n = k * r + g + beta * pq;
                if n >= self.product() || k * s + g >= other.limit() {
                    return Flow::Skip;
                }
                let lhs = src.sigma(s, n) - src.chi(k * r + beta * pq) as i64;
                let mid = other.sigma(s, k * s + g) - other.chi(k * s) as i64;
                let rhs = other.sigma(s, k * s + g - pq);
                check(
                    lhs == mid && mid == rhs,
                    || json!({ "k": k, "gamma": g, "beta": beta, "lhs": lhs, "middle": mid, "rhs": rhs }),
                )
            },
        )
    }
}

/// Sorted pairwise coprime triples `3 <= p < q < r` with `pqr <= max_product`.
pub fn ternary_triples_upto(max_product: i64) -> Vec<Triple> {
    let mut out = Vec::new();
    let mut p = 3;
    while p * (p + 1) * (p + 2) <= max_product {
        let mut q = p + 1;
        while p * q * (q + 1) <= max_product {
            if crate::arith::gcd(p, q) == 1 {
                for r in q + 1..=max_product / (p * q) {
                    if crate::arith::gcd(r, p * q) == 1 {
                        out.push(Triple::new(p, q, r).expect("validated above"));
                    }
                }
            }
            q += 1;
        }
        p += 1;
    }
    out
}

/// Aggregate outcome for one lemma over a family of triples.
#[derive(Debug, Clone)]
pub struct LemmaSweepRow {
    pub id: LemmaId,
    pub instances: usize,
    pub points: u64,
    pub failures: usize,
    /// Up to a few failing reports, ordered by instance.
    pub examples: Vec<VerificationReport>,
}

#[derive(Debug, Clone)]
pub struct LemmaSweep {
    pub triples: usize,
    pub rows: Vec<LemmaSweepRow>,
}

impl LemmaSweep {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.failures == 0)
    }

    pub fn row(&self, id: LemmaId) -> Option<&LemmaSweepRow> {
        self.rows.iter().find(|r| r.id == id)
    }
}

const KEPT_EXAMPLES: usize = 5;

fn empty_rows(ids: &[LemmaId]) -> Vec<LemmaSweepRow> {
    ids.iter()
        .map(|&id| LemmaSweepRow {
            id,
            instances: 0,
            points: 0,
            failures: 0,
            examples: Vec::new(),
        })
        .collect()
}

fn merge_rows(mut a: Vec<LemmaSweepRow>, b: Vec<LemmaSweepRow>) -> Vec<LemmaSweepRow> {
    for (x, y) in a.iter_mut().zip(b) {
        x.instances += y.instances;
        x.points += y.points;
        x.failures += y.failures;
        x.examples.extend(y.examples);
        x.examples.sort_by(|u, v| u.instance.cmp(&v.instance));
        x.examples.truncate(KEPT_EXAMPLES);
    }
    a
}

/// Exhaustive validation of `ids` on every triple of [`ternary_triples_upto`].
/// Triples with `pqr <= all_roles_upto` are also checked under every role
/// assignment.
pub fn lemma_sweep(max_product: i64, all_roles_upto: i64, ids: &[LemmaId], cap: DegreeCap) -> Result<LemmaSweep> {
    let triples = ternary_triples_upto(max_product);
    let rows = triples
        .par_iter()
        .try_fold(
            || empty_rows(ids),
            |mut rows, t| {
                let options = LemmaOptions {
                    sampling: Sampling::Exhaustive,
                    all_roles: t.product() <= all_roles_upto,
                    cap,
                };
                let suite = LemmaSuite::new(*t, None, options)?;
                for row in rows.iter_mut() {
                    if row.id.needs_shift() && suite.shift().is_none() {
                        continue;
                    }
                    let report = suite.check(row.id)?;
                    row.instances += 1;
                    row.points += report.points;
                    if !report.passed {
                        row.failures += 1;
                        if row.examples.len() < KEPT_EXAMPLES {
                            row.examples.push(report);
                        }
                    }
                }
                Ok::<_, Error>(rows)
            },
        )
        .try_reduce(|| empty_rows(ids), |a, b| Ok(merge_rows(a, b)))?;
    Ok(LemmaSweep {
        triples: triples.len(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::DEFAULT_DEGREE_CAP;

    const CAP: DegreeCap = DegreeCap(DEFAULT_DEGREE_CAP);

    fn t(p: i64, q: i64, r: i64) -> Triple {
        Triple::new(p, q, r).unwrap()
    }

    fn exhaustive(all_roles: bool) -> LemmaOptions {
        LemmaOptions {
            sampling: Sampling::Exhaustive,
            all_roles,
            cap: CAP,
        }
    }

    fn sampled(samples: u64, seed: u64) -> LemmaOptions {
        LemmaOptions {
            sampling: Sampling::Seeded { samples, seed },
            all_roles: true,
            cap: CAP,
        }
    }

    #[test]
    fn ids_round_trip() {
        for id in LemmaId::ALL {
            assert_eq!(id.name().parse::<LemmaId>().unwrap(), id);
        }
        assert!(matches!("lemma8".parse::<LemmaId>(), Err(Error::UnknownLemma(_))));
    }

    #[test]
    fn lemma2_on_3_5_7_covers_all_n() {
        let rep = verify_lemma_with(LemmaId::Lemma2, &t(3, 5, 7), None, exhaustive(false)).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.points, 105);
        assert_eq!(rep.seed, None);
    }

    #[test]
    fn lemma6_on_3_5_17() {
        let rep = verify_lemma("lemma6", &t(3, 5, 17), Some(2), 1, 0, CAP).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.instance, vec![3, 5, 17, 2]);
        // both (p, q) orders over the extended range
        assert_eq!(rep.points, 2 * (255 + 25));
    }

    #[test]
    fn lemma9_on_3_5_17() {
        let rep = verify_lemma("lemma9", &t(3, 5, 17), Some(2), 1, 0, CAP).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.points > 0);
    }

    #[test]
    fn every_lemma_passes_on_small_triples() {
        for tr in [
            t(3, 5, 7),
            t(3, 5, 17),
            t(3, 4, 13),
            t(5, 7, 38),
            t(4, 9, 35),
            t(3, 7, 20),
            t(5, 6, 29),
        ] {
            let suite = LemmaSuite::new(tr, None, exhaustive(true)).unwrap();
            for id in suite.applicable().collect::<Vec<_>>() {
                let rep = suite.check(id).unwrap();
                assert!(rep.passed, "{rep:?}");
            }
        }
    }

    #[test]
    fn sampled_mode_is_deterministic_and_passes() {
        let tr = t(17, 19, 17 * 19 + 3);
        let a = verify_lemma_with(LemmaId::Lemma7, &tr, Some(3), sampled(2000, 9)).unwrap();
        let b = verify_lemma_with(LemmaId::Lemma7, &tr, Some(3), sampled(2000, 9)).unwrap();
        assert!(a.passed, "{a:?}");
        assert_eq!(a, b);
        assert_eq!(a.seed, Some(9));
        assert_eq!(a.points, 2000);
        for id in [LemmaId::Lemma4, LemmaId::Lemma11, LemmaId::Eq26, LemmaId::Lemma3] {
            let rep = verify_lemma_with(id, &tr, None, sampled(500, 1)).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn verify_lemma_switches_to_sampling_for_large_triples() {
        let tr = t(13, 29, 13 * 29 + 5);
        let rep = verify_lemma("lemma9", &tr, Some(5), 300, 4, CAP).unwrap();
        assert_eq!(rep.seed, Some(4));
        assert!(rep.passed);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(
            verify_lemma("lemma6", &t(3, 5, 7), None, 1, 0, CAP),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            verify_lemma("lemma6", &t(3, 5, 17), Some(3), 1, 0, CAP),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            verify_lemma("lemma2", &t(2, 5, 7), None, 1, 0, CAP),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            verify_lemma("lemma2", &t(3, 5, 7), None, 0, 0, CAP),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            verify_lemma("nope", &t(3, 5, 7), None, 1, 0, CAP),
            Err(Error::UnknownLemma(_))
        ));
    }

    /// A deliberately wrong shift exposes a witness: the identity for
    /// `a_m` breaks when `Σ_1` uses the wrong window.
    #[test]
    fn failures_carry_witnesses() {
        let tr = t(3, 5, 17);
        let suite = LemmaSuite::new(tr, Some(2), exhaustive(false)).unwrap();
        let dense = suite.dense.as_ref().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tally = drive([(0, 255)], Sampling::Exhaustive, &mut rng, |[m]| {
            let wrong = LemmaSuite::sigma1(dense, 3, 3, 5, m);
            check(suite.coeff(m) == wrong, || json!({ "m": m }))
        });
        assert!(tally.failures > 0);
        assert!(tally.witness.is_some());
    }

    #[test]
    fn dense_and_direct_sources_agree() {
        let tr = t(5, 7, 11);
        let ctx = TripleContext::new(tr);
        let full = coeffs_series(&tr, Mode::Full, CAP).unwrap();
        let dense = Dense::new(&ctx, &series_prefix(&tr, full.coeffs.len() / 2 + 1).unwrap());
        for m in -40..tr.product() + 5 {
            assert_eq!(dense.coeff(m), full.get(m));
        }
        for n in -40..tr.product() {
            assert_eq!(Source::chi(&dense, n), Source::chi(&ctx, n));
            assert_eq!(Source::sigma(&dense, 7, n), Source::sigma(&ctx, 7, n));
            if n >= 0 {
                assert_eq!(dense.rep(n), ctx.rep(n));
            }
        }
    }

    fn compare_paths(suite: &LemmaSuite, d: &Dense, label: &str) -> u64 {
        let mut failures = 0;
        for id in suite.applicable().collect::<Vec<_>>() {
            for v in suite.variants(id) {
                let kernel = suite.run_dense(d, id, v);
                let pointwise = suite.run(d, id, v, &mut ChaCha8Rng::seed_from_u64(0));
                let ctx: &TripleContext = &suite.ctx;
                assert_eq!(kernel.points, pointwise.points, "{label} {id} {v:?} points");
                assert_eq!(kernel.failures, pointwise.failures, "{label} {id} {v:?} failures");
                assert_eq!(kernel.witness, pointwise.witness, "{label} {id} {v:?} witness");
                let _ = ctx;
                failures += kernel.failures;
            }
        }
        failures
    }

    /// The table kernels and the point-wise driver enumerate the same points
    /// and report the same failures, both on true tables and on tables with
    /// a flipped entry.
    #[test]
    fn kernels_match_pointwise_driver() {
        for tr in [
            t(3, 5, 7),
            t(3, 5, 17),
            t(4, 5, 23),
            t(5, 7, 38),
            t(3, 7, 19),
            t(4, 7, 9),
        ] {
            let mut suite = LemmaSuite::new(tr, None, exhaustive(true)).unwrap();
            let mut d = suite.dense.take().unwrap();
            suite.coeffs = Some(coeffs_series(&tr, Mode::Full, CAP).unwrap());
            assert_eq!(compare_paths(&suite, &d, "clean"), 0);
            for n in [tr.product() / 3, tr.product() / 2 + 1] {
                d.flip(n);
                assert!(
                    compare_paths(&suite, &d, "mutated") > 0,
                    "flip at {n} undetected on {tr}"
                );
                d.flip(n);
            }
        }
    }

    #[test]
    fn sampled_points_satisfy_every_lemma_on_a_mid_size_triple() {
        // just above the exhaustive limit
        let tr = t(17, 19, 17 * 19 + 4);
        assert!(tr.product() > EXHAUSTIVE_LIMIT);
        for id in LemmaId::ALL {
            let rep = verify_lemma(id.name(), &tr, None, 400, 17, CAP).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert_eq!(rep.seed, Some(17));
        }
    }

    #[test]
    fn triple_enumeration() {
        let ts = ternary_triples_upto(200);
        assert!(ts.iter().all(|t| t.product() <= 200 && t.p() < t.q() && t.q() < t.r()));
        assert!(ts.contains(&t(3, 5, 7)));
        assert!(ts.contains(&t(3, 4, 13)));
        assert!(!ts.iter().any(|t| t.elements() == [3, 5, 9]));
        let brute = (3..200)
            .flat_map(|p| (p + 1..200).flat_map(move |q| (q + 1..200).map(move |r| (p, q, r))))
            .filter(|&(p, q, r)| p * q * r <= 200 && Triple::new(p, q, r).is_ok())
            .count();
        assert_eq!(ts.len(), brute);
    }

    #[test]
    fn small_sweep_passes() {
        let sweep = lemma_sweep(3000, 1000, &LemmaId::ALL, CAP).unwrap();
        assert!(sweep.passed());
        assert!(sweep.row(LemmaId::Lemma9).unwrap().instances > 0);
        assert_eq!(sweep.row(LemmaId::Lemma2).unwrap().instances, sweep.triples);
    }
}
