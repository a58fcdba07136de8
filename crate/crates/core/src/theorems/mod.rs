//! Instance-level checks of the residue-class identities, the recursive
//! height estimate and its corollary, and the supporting lemmas.
//!
//! Every check recomputes both sides from the engines and returns a
//! [`VerificationReport`]. A failing report always carries a witness.

pub mod lemmas;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::height::{coefficient_set, height, HeightRecord};
use crate::poly::DegreeCap;
use crate::repr::{residue, Triple};

pub use lemmas::{
    lemma_sweep, ternary_triples_upto, verify_lemma, verify_lemma_with, LemmaId, LemmaOptions, LemmaSuite, LemmaSweep,
    LemmaSweepRow, Sampling, EXHAUSTIVE_LIMIT,
};

/// Evidence for one check on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub instance: Vec<i64>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub detail: String,
    /// Computed quantities behind the verdict.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub data: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of points examined (1 for single-instance checks).
    pub points: u64,
}

impl VerificationReport {
    pub fn pass(check_id: &str, instance: Vec<i64>, detail: String, data: Value) -> Self {
        VerificationReport {
            check_id: check_id.to_string(),
            instance,
            passed: true,
            witness: None,
            detail,
            data,
            seed: None,
            points: 1,
        }
    }

    pub fn fail(check_id: &str, instance: Vec<i64>, detail: String, data: Value, witness: Value) -> Self {
        VerificationReport {
            check_id: check_id.to_string(),
            instance,
            passed: false,
            witness: Some(witness),
            detail,
            data,
            seed: None,
            points: 1,
        }
    }

    fn verdict(check_id: &str, instance: Vec<i64>, ok: bool, detail: String, data: Value) -> Self {
        if ok {
            Self::pass(check_id, instance, detail, data)
        } else {
            let witness = data.clone();
            Self::fail(check_id, instance, detail, data, witness)
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn precondition(failures: Vec<String>) -> Result<()> {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::PreconditionViolated(failures.join("; ")))
    }
}

fn triple_or_precondition(p: i64, q: i64, r: i64) -> Result<Triple> {
    Triple::new(p, q, r).map_err(|e| Error::PreconditionViolated(e.to_string()))
}

/// How `r` relates to `s` modulo `pq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Congruence {
    Same,
    Opposite,
}

pub fn congruence(r: i64, s: i64, modulus: i64) -> Option<Congruence> {
    if residue(r - s, modulus) == 0 {
        Some(Congruence::Same)
    } else if residue(r + s, modulus) == 0 {
        Some(Congruence::Opposite)
    } else {
        None
    }
}

/// `m - ceil(m/4)`, the height bound in terms of the smallest element.
pub fn height_bound(m: i64) -> i64 {
    m - (m + 3).div_euclid(4)
}

/// Heights agree when `r ≡ ±s (mod pq)` and `r, s > max(p, q)`.
pub fn verify_eq_1_5(p: i64, q: i64, r: i64, s: i64, cap: DegreeCap) -> Result<VerificationReport> {
    let tr = triple_or_precondition(p, q, r)?;
    let ts = triple_or_precondition(p, q, s)?;
    let mut failed = Vec::new();
    if congruence(r, s, p * q).is_none() {
        failed.push(format!("{r} is not congruent to ±{s} modulo {}", p * q));
    }
    if r <= p.max(q) || s <= p.max(q) {
        failed.push(format!("need r, s > max(p, q) = {}", p.max(q)));
    }
    precondition(failed)?;
    let (a_r, a_s) = (height(&tr, cap)?.height, height(&ts, cap)?.height);
    Ok(VerificationReport::verdict(
        "eq1.5",
        vec![p, q, r, s],
        a_r == a_s,
        format!("A({p},{q},{r}) = {a_r}, A({p},{q},{s}) = {a_s}"),
        json!({ "A_r": a_r, "A_s": a_s }),
    ))
}

/// Coefficient sets agree (same residue) or are negatives (opposite residue).
///
/// `expect` pins the relation; a mismatch with the actual residues is a
/// precondition failure.
pub fn verify_eq_1_6(
    p: i64,
    q: i64,
    r: i64,
    s: i64,
    expect: Option<Congruence>,
    cap: DegreeCap,
) -> Result<VerificationReport> {
    let tr = triple_or_precondition(p, q, r)?;
    let ts = triple_or_precondition(p, q, s)?;
    let mut failed = Vec::new();
    let relation = congruence(r, s, p * q);
    match (relation, expect) {
        (None, _) => failed.push(format!("{r} is not congruent to ±{s} modulo {}", p * q)),
        (Some(actual), Some(wanted)) if actual != wanted => {
            failed.push(format!("{r} and {s} are not related by {wanted:?} modulo {}", p * q))
        }
        _ => {}
    }
    if r <= p.max(q) || s <= p.max(q) {
        failed.push(format!("need r, s > max(p, q) = {}", p.max(q)));
    }
    precondition(failed)?;
    let relation = relation.unwrap();
    let set_r = coefficient_set(&tr, cap)?;
    let set_s = coefficient_set(&ts, cap)?;
    Ok(compare_sets(p, q, r, s, relation, &set_r, &set_s))
}

fn compare_sets(
    p: i64,
    q: i64,
    r: i64,
    s: i64,
    relation: Congruence,
    set_r: &[i64],
    set_s: &[i64],
) -> VerificationReport {
    let target: Vec<i64> = match relation {
        Congruence::Same => set_s.to_vec(),
        Congruence::Opposite => set_s.iter().rev().map(|c| -c).collect(),
    };
    VerificationReport::verdict(
        "eq1.6",
        vec![p, q, r, s],
        set_r == target,
        format!("{relation:?} residue: sets {set_r:?} vs {set_s:?}"),
        json!({ "relation": relation, "set_r": set_r, "set_s": set_s }),
    )
}

fn main_theorem_preconditions(p: i64, q: i64, s: i64, r: i64) -> Result<(Triple, Triple)> {
    let mut failed = Vec::new();
    if p < 3 || q < 3 {
        failed.push("p and q must be at least 3".to_string());
    }
    if s < 1 {
        failed.push("s must be at least 1".to_string());
    }
    if !(r > p.max(q) && p.max(q) > s) {
        failed.push(format!("need r > max(p, q) > s, got r={r}, max={}, s={s}", p.max(q)));
    }
    if s >= 1 && congruence(r, s, p * q).is_none() {
        failed.push(format!("{r} is not congruent to ±{s} modulo {}", p * q));
    }
    precondition(failed)?;
    Ok((triple_or_precondition(p, q, r)?, triple_or_precondition(p, q, s)?))
}

/// `A(p,q,s) <= A(p,q,r) <= A(p,q,s) + 1`, with `A(p,q,s) = s - 1` for `s <= 2`.
pub fn verify_main_theorem(p: i64, q: i64, s: i64, r: i64, cap: DegreeCap) -> Result<VerificationReport> {
    let (tr, ts) = main_theorem_preconditions(p, q, s, r)?;
    let a_s = height(&ts, cap)?.height;
    let a_r = height(&tr, cap)?.height;
    let attained = if a_r == a_s {
        "lower"
    } else if a_r == a_s + 1 {
        "upper"
    } else {
        "neither"
    };
    Ok(VerificationReport::verdict(
        "main",
        vec![p, q, s, r],
        a_s <= a_r && a_r <= a_s + 1,
        format!("A({p},{q},{s}) = {a_s} <= A({p},{q},{r}) = {a_r} <= {}", a_s + 1),
        json!({ "A_s": a_s, "A_r": a_r, "attained": attained }),
    ))
}

/// `A(p,q,r) <= s`, strictly for `s >= 5`.
pub fn verify_corollary(p: i64, q: i64, s: i64, r: i64, cap: DegreeCap) -> Result<VerificationReport> {
    let (tr, _) = main_theorem_preconditions(p, q, s, r)?;
    let a_r = height(&tr, cap)?.height;
    let ok = if s >= 5 { a_r < s } else { a_r <= s };
    Ok(VerificationReport::verdict(
        "corollary",
        vec![p, q, s, r],
        ok,
        format!(
            "A({p},{q},{r}) = {a_r} against s = {s}{}",
            if s >= 5 { " (strict)" } else { "" }
        ),
        json!({ "A_r": a_r, "equality": a_r == s }),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn apply(self, x: i64) -> i64 {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(Error::InvalidParameters(format!("sign must be + or -, got `{s}`"))),
        }
    }
}

/// `A(q, pq±1, q(pq±1) ± p) <= 2` from two applications of the estimate.
pub fn verify_iterated_bound(p: i64, q: i64, sign: Sign, cap: DegreeCap) -> Result<VerificationReport> {
    if p < 1 || q < 3 || gcd(p, q) != 1 {
        return Err(Error::PreconditionViolated(format!(
            "need coprime p >= 1, q >= 3, got p={p}, q={q}"
        )));
    }
    let middle = p * q + sign.apply(1);
    let last = q * middle + sign.apply(p);
    let t = triple_or_precondition(q, middle, last)?;
    let a = height(&t, cap)?.height;
    Ok(VerificationReport::verdict(
        "iterated",
        vec![q, middle, last],
        a <= 2,
        format!("A({q},{middle},{last}) = {a} <= 2"),
        json!({ "A": a }),
    ))
}

/// `A(θ) <= m - ceil(m/4)` with `m` the smallest element.
pub fn verify_height_bound(t: &Triple, cap: DegreeCap) -> Result<VerificationReport> {
    let rec = height(t, cap)?;
    let m = t.min_element();
    Ok(VerificationReport::verdict(
        "bound1.11",
        t.elements().to_vec(),
        rec.height <= height_bound(m),
        format!("A{} = {} <= {}", t, rec.height, height_bound(m)),
        json!({ "A": rec.height, "bound": height_bound(m) }),
    ))
}

/// Maximum of `A(p,q,s)` over coprime pairs `3 <= p < q <= p_max` coprime to
/// `s`. A lower bound for the unrestricted maximum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedM {
    pub s: i64,
    pub p_max: i64,
    pub value: i64,
    pub attaining: Vec<(i64, i64)>,
    pub pairs_checked: usize,
}

pub(crate) fn admissible_pairs(s: i64, p_max: i64, q_max: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for p in 3..=p_max {
        for q in p + 1..=q_max {
            if gcd(p, q) == 1 && gcd(p, s) == 1 && gcd(q, s) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

pub fn bounded_m(s: i64, p_max: i64, cap: DegreeCap) -> Result<BoundedM> {
    if s < 1 {
        return Err(Error::InvalidParameters(format!("s must be at least 1, got {s}")));
    }
    let pairs = admissible_pairs(s, p_max, p_max);
    let heights: Vec<i64> = pairs
        .par_iter()
        .map(|&(p, q)| Ok(height(&Triple::new(p, q, s)?, cap)?.height))
        .collect::<Result<_>>()?;
    let value = heights.iter().copied().max().unwrap_or(if s <= 2 { s - 1 } else { 0 });
    let attaining = pairs
        .iter()
        .zip(&heights)
        .filter(|(_, &h)| h == value)
        .map(|(&pq, _)| pq)
        .collect();
    Ok(BoundedM {
        s,
        p_max,
        value,
        attaining,
        pairs_checked: pairs.len(),
    })
}

/// All `(p, q, s, r)` with `3 <= p < q <= q_max`, `1 <= s < q`, `r = pq ± s`,
/// coprimality satisfied, ordered by `(p, q, r, s)`.
pub fn main_theorem_instances(q_max: i64) -> Vec<(i64, i64, i64, i64)> {
    let mut out = Vec::new();
    for p in 3..q_max {
        for q in p + 1..=q_max {
            if gcd(p, q) != 1 {
                continue;
            }
            let mut here = Vec::new();
            for s in 1..q {
                if gcd(s, p) != 1 || gcd(s, q) != 1 {
                    continue;
                }
                here.push((p, q, s, p * q - s));
                here.push((p, q, s, p * q + s));
            }
            here.sort_by_key(|&(_, _, s, r)| (r, s));
            out.extend(here);
        }
    }
    out
}

/// Outcome of the recursive-estimate sweep, with the tally of which bound
/// was attained.
#[derive(Debug, Clone)]
pub struct MainSweep {
    pub reports: Vec<VerificationReport>,
    pub lower_attained: usize,
    pub upper_attained: usize,
}

pub fn main_theorem_sweep(q_max: i64, cap: DegreeCap) -> Result<MainSweep> {
    let reports: Vec<VerificationReport> = main_theorem_instances(q_max)
        .par_iter()
        .map(|&(p, q, s, r)| verify_main_theorem(p, q, s, r, cap))
        .collect::<Result<_>>()?;
    let count = |label: &str| reports.iter().filter(|r| r.data["attained"] == label).count();
    Ok(MainSweep {
        lower_attained: count("lower"),
        upper_attained: count("upper"),
        reports,
    })
}

/// Checks height equality and coefficient-set (anti)equality for every pair
/// `max(p,q) < r < s <= mult * pq` with `r ≡ ±s (mod pq)`. Each triple is
/// expanded once; every pair gets its own `eq1.5` and `eq1.6` report.
pub fn residue_class_sweep(p: i64, q: i64, mult: i64, cap: DegreeCap) -> Result<Vec<VerificationReport>> {
    let pq = p * q;
    let rs: Vec<i64> = (p.max(q) + 1..=mult * pq).filter(|&r| gcd(r, pq) == 1).collect();
    let records: Vec<HeightRecord> = rs
        .par_iter()
        .map(|&r| {
            let t = Triple::new(p, q, r)?;
            let rec = height(&t, cap)?;
            if rec.coeff_set.len() as i64 != rec.a_plus - rec.a_minus + 1 {
                return Err(Error::NotConsecutive { p, q, r });
            }
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    for i in 0..rs.len() {
        for j in i + 1..rs.len() {
            let (r, s) = (rs[i], rs[j]);
            let Some(relation) = congruence(r, s, pq) else { continue };
            let (a, b) = (&records[i], &records[j]);
            reports.push(VerificationReport::verdict(
                "eq1.5",
                vec![p, q, r, s],
                a.height == b.height,
                format!("A({p},{q},{r}) = {}, A({p},{q},{s}) = {}", a.height, b.height),
                json!({ "A_r": a.height, "A_s": b.height }),
            ));
            reports.push(compare_sets(p, q, r, s, relation, &a.coeff_set, &b.coeff_set));
        }
    }
    Ok(reports)
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryRow {
    pub check_id: String,
    pub instances: usize,
    pub passes: usize,
    pub failures: usize,
}

pub fn summarize(reports: &[VerificationReport]) -> Vec<SummaryRow> {
    let mut by_id: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in reports {
        let e = by_id.entry(&r.check_id).or_default();
        e.0 += 1;
        if r.passed {
            e.1 += 1;
        }
    }
    by_id
        .into_iter()
        .map(|(id, (n, ok))| SummaryRow {
            check_id: id.to_string(),
            instances: n,
            passes: ok,
            failures: n - ok,
        })
        .collect()
}

pub fn render_summary(rows: &[SummaryRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.check_id.len())
        .max()
        .unwrap_or(0)
        .max("check".len());
    let mut out = format!(
        "{:<width$}  {:>10}  {:>10}  {:>10}\n",
        "check", "instances", "passes", "failures"
    );
    for r in rows {
        out += &format!(
            "{:<width$}  {:>10}  {:>10}  {:>10}\n",
            r.check_id, r.instances, r.passes, r.failures
        );
    }
    out
}
