//! Coefficient statistics: extremes, height, flatness and the coefficient set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{coeffs_series, CoefficientVector, DegreeCap, Mode};
use crate::repr::Triple;

/// Statistics of one polynomial.
///
/// `height` follows the convention `A(p,q,s) = s - 1` for a degenerate element
/// `s` in `{1, 2}`; `literal_max` is always the computed `max |a_m|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightRecord {
    #[serde(flatten)]
    pub triple: Triple,
    pub a_minus: i64,
    pub a_plus: i64,
    pub height: i64,
    pub literal_max: i64,
    pub flat: bool,
    /// Not serialized; rebuilt from `[a_minus, a_plus]` on read-back.
    #[serde(skip)]
    pub coeff_set: Vec<i64>,
}

impl HeightRecord {
    pub fn from_vector(v: &CoefficientVector) -> Self {
        let set: BTreeSet<i64> = v.coeffs.iter().copied().collect();
        let a_minus = *set.first().expect("nonempty vector");
        let a_plus = *set.last().expect("nonempty vector");
        let literal_max = a_minus.abs().max(a_plus.abs());
        let height = match v.triple.degenerate_element() {
            Some(s) => s - 1,
            None => literal_max,
        };
        HeightRecord {
            triple: v.triple,
            a_minus,
            a_plus,
            height,
            literal_max,
            flat: a_minus >= -1 && a_plus <= 1,
            coeff_set: set.into_iter().collect(),
        }
    }

    /// Parses one JSON line and restores the coefficient set.
    pub fn from_json_line(line: &str) -> Result<Self> {
        let mut rec: HeightRecord =
            serde_json::from_str(line).map_err(|e| Error::Persistence(format!("bad height record: {e}")))?;
        rec.coeff_set = (rec.a_minus..=rec.a_plus).collect();
        Ok(rec)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    /// Record-level invariants; empty when all hold.
    pub fn defects(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.literal_max != self.a_minus.abs().max(self.a_plus.abs()) {
            out.push("literal_max != max(|a_minus|, a_plus)".into());
        }
        if self.flat != (self.a_minus >= -1 && self.a_plus <= 1) {
            out.push("flat flag inconsistent with extremes".into());
        }
        if self.triple.is_ternary() {
            if !(self.a_minus <= 0 && 1 <= self.a_plus) {
                out.push(format!(
                    "extremes {}..{} do not straddle 0 and 1",
                    self.a_minus, self.a_plus
                ));
            }
            if self.height != self.literal_max {
                out.push("height differs from literal maximum on a ternary triple".into());
            }
        }
        let run: Vec<i64> = (self.a_minus..=self.a_plus).collect();
        if self.coeff_set != run {
            out.push("coefficient set is not the consecutive run a_minus..=a_plus".into());
        }
        out
    }
}

/// Height record from the half-length series expansion.
pub fn height(t: &Triple, cap: DegreeCap) -> Result<HeightRecord> {
    let v = coeffs_series(t, Mode::Half, cap)?;
    Ok(HeightRecord::from_vector(&v))
}

/// The sorted set of distinct coefficients, required to be consecutive.
pub fn coefficient_set(t: &Triple, cap: DegreeCap) -> Result<Vec<i64>> {
    if !t.is_ternary() {
        return Err(Error::InvalidTriple {
            p: t.p(),
            q: t.q(),
            r: t.r(),
            reason: "coefficient set is defined for ternary triples".into(),
        });
    }
    let rec = height(t, cap)?;
    let expected = (rec.a_plus - rec.a_minus + 1) as usize;
    if rec.coeff_set.len() != expected {
        return Err(Error::NotConsecutive {
            p: t.p(),
            q: t.q(),
            r: t.r(),
        });
    }
    Ok(rec.coeff_set)
}

pub fn is_flat(t: &Triple, cap: DegreeCap) -> Result<bool> {
    Ok(height(t, cap)?.flat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(p: i64, q: i64, r: i64) -> Triple {
        Triple::new(p, q, r).unwrap()
    }

    fn h(p: i64, q: i64, r: i64) -> HeightRecord {
        height(&t(p, q, r), DegreeCap::default()).unwrap()
    }

    #[test]
    fn reported_heights() {
        assert_eq!(h(5, 7, 3).height, 2);
        assert_eq!(h(11, 13, 4).height, 3);
        assert_eq!(h(3, 5, 17).height, 2);
    }

    #[test]
    fn degenerate_convention() {
        let one = h(3, 5, 1);
        assert_eq!((one.height, one.literal_max), (0, 1));
        assert!(one.flat);
        let two = h(7, 3, 2);
        assert_eq!((two.height, two.literal_max), (1, 1));
        assert!(two.defects().is_empty());
    }

    #[test]
    fn coefficient_sets() {
        let cap = DegreeCap::default();
        assert_eq!(coefficient_set(&t(3, 5, 16), cap).unwrap(), vec![-1, 0, 1]);
        let s = coefficient_set(&t(3, 5, 7), cap).unwrap();
        assert_eq!(s[0], -2);
        assert!(s.windows(2).all(|w| w[1] == w[0] + 1));
        let s = coefficient_set(&t(3, 4, 5), cap).unwrap();
        assert!(s.windows(2).all(|w| w[1] == w[0] + 1));
        assert!(coefficient_set(&t(3, 5, 1), cap).is_err());
    }

    #[test]
    fn flatness() {
        let cap = DegreeCap::default();
        assert!(is_flat(&t(3, 5, 16), cap).unwrap());
        assert!(!is_flat(&t(3, 5, 7), cap).unwrap());
        assert!(is_flat(&t(4, 9, 1), cap).unwrap());
    }

    #[test]
    fn json_line_round_trip() {
        let rec = h(5, 7, 3);
        let line = rec.to_json_line();
        assert!(line.starts_with(r#"{"p":5,"q":7,"r":3,"a_minus":"#), "{line}");
        assert!(line.ends_with(r#""height":2,"literal_max":2,"flat":false}"#), "{line}");
        assert_eq!(HeightRecord::from_json_line(&line).unwrap(), rec);
    }

    #[test]
    fn permutation_invariance_and_bound() {
        for base in [t(5, 7, 11), t(4, 9, 13), t(7, 11, 5)] {
            let r0 = height(&base, DegreeCap::default()).unwrap();
            assert!(r0.defects().is_empty());
            let m = base.min_element();
            assert!(r0.height <= m - (m + 3) / 4);
            for perm in base.permutations() {
                let r = height(&perm, DegreeCap::default()).unwrap();
                assert_eq!(
                    (r.a_minus, r.a_plus, r.height, r.flat),
                    (r0.a_minus, r0.a_plus, r0.height, r0.flat)
                );
            }
        }
    }
}
