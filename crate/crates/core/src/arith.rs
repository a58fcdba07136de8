//! Residue arithmetic and two-generator semigroup membership.

use crate::error::{Error, Result};

/// A least nonnegative residue together with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: i64,
    modulus: i64,
}

impl Residue {
    pub fn value(self) -> i64 {
        self.value
    }

    pub fn modulus(self) -> i64 {
        self.modulus
    }
}

impl From<Residue> for i64 {
    fn from(r: Residue) -> i64 {
        r.value
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// `[n]_modulus`, the representative in `[0, modulus)`.
///
/// Panics if `modulus < 1`.
pub fn least_nonneg_residue(n: i64, modulus: i64) -> Residue {
    assert!(modulus >= 1, "modulus must be positive, got {modulus}");
    Residue {
        value: n.rem_euclid(modulus),
        modulus,
    }
}

/// Multiplicative inverse of `a` modulo `n` by the extended Euclidean algorithm.
pub fn mod_inverse(a: i64, n: i64) -> Result<Residue> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("modulus must be at least 2, got {n}")));
    }
    let (mut old_r, mut r) = (a.rem_euclid(n) as i128, n as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible { a, n });
    }
    Ok(Residue {
        value: old_s.rem_euclid(n as i128) as i64,
        modulus: n,
    })
}

/// Multiplication modulo `n` without intermediate overflow.
#[inline]
pub fn mul_mod(a: i64, b: i64, n: i64) -> i64 {
    ((a as i128 * b as i128).rem_euclid(n as i128)) as i64
}

/// Whether `n = x*q + y*p` for some `x, y >= 0`.
///
/// Solves for `x` in `[0, p)` from `n * q^{-1} mod p`; `n` is representable
/// exactly when the remaining `n - x*q` is nonnegative.
pub fn in_semigroup(n: i64, p: i64, q: i64) -> Result<bool> {
    if p < 1 || q < 1 || gcd(p, q) != 1 {
        return Err(Error::InvalidParameters(format!(
            "semigroup generators {p}, {q} must be positive and coprime"
        )));
    }
    if n < 0 {
        return Ok(false);
    }
    if p == 1 || q == 1 {
        return Ok(true);
    }
    let q_inv = mod_inverse(q, p)?.value();
    let x = mul_mod(n, q_inv, p);
    Ok(n - x * q >= 0)
}

/// Membership table for `[0, limit)` in the semigroup generated by `p, q`.
pub(crate) fn semigroup_table(p: i64, q: i64, limit: usize) -> Vec<bool> {
    let mut table = vec![false; limit];
    if limit == 0 {
        return table;
    }
    table[0] = true;
    for n in 1..limit {
        let n_i = n as i64;
        table[n] = (n_i >= p && table[n - p as usize]) || (n_i >= q && table[n - q as usize]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_in_semigroup(n: i64, p: i64, q: i64) -> bool {
        if n < 0 {
            return false;
        }
        (0..=n / q).any(|x| (n - x * q) % p == 0)
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(1, 15).unwrap().value(), 1);
        assert_eq!(mod_inverse(7, 15).unwrap().value(), 13);
        assert_eq!(mod_inverse(2, 4), Err(Error::NotInvertible { a: 2, n: 4 }));
        assert_eq!(mod_inverse(-2, 15).unwrap().value(), 7);
        assert!(mod_inverse(1, 1).is_err());
    }

    #[test]
    fn residue_examples() {
        assert_eq!(least_nonneg_residue(0, 15).value(), 0);
        assert_eq!(least_nonneg_residue(-1, 15).value(), 14);
        assert_eq!(least_nonneg_residue(91, 15).value(), 1);
        assert_eq!(least_nonneg_residue(91, 15).modulus(), 15);
    }

    #[test]
    fn semigroup_examples() {
        assert!(in_semigroup(0, 3, 5).unwrap());
        assert!(in_semigroup(8, 3, 5).unwrap());
        assert!(!in_semigroup(7, 3, 5).unwrap());
        assert!(!in_semigroup(-3, 3, 5).unwrap());
        assert!(in_semigroup(4, 3, 6).is_err());
    }

    #[test]
    fn semigroup_matches_brute_force_and_conductor() {
        for p in 2..=20 {
            for q in 2..=20 {
                if gcd(p, q) != 1 {
                    continue;
                }
                let conductor = (p - 1) * (q - 1);
                let table = semigroup_table(p, q, (conductor + 40) as usize);
                for n in -5..conductor + 40 {
                    let fast = in_semigroup(n, p, q).unwrap();
                    assert_eq!(fast, brute_in_semigroup(n, p, q), "n={n} p={p} q={q}");
                    if n >= 0 {
                        assert_eq!(fast, table[n as usize]);
                    }
                    if n >= conductor {
                        assert!(fast);
                    }
                }
                // the largest gap sits just below the conductor
                assert!(!in_semigroup(conductor - 1, p, q).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn inverse_is_an_involution(a in -10_000i64..10_000, n in 2i64..5_000) {
            prop_assume!(gcd(a, n) == 1);
            let inv = mod_inverse(a, n).unwrap().value();
            prop_assert_eq!(mul_mod(a, inv, n), 1 % n);
            prop_assert!((0..n).contains(&inv));
            prop_assert_eq!(mod_inverse(inv, n).unwrap().value(), a.rem_euclid(n));
        }

        #[test]
        fn residue_is_shift_invariant(n in -1_000_000i64..1_000_000, m in 1i64..10_000, k in -1000i64..1000) {
            let r = least_nonneg_residue(n, m);
            prop_assert_eq!(least_nonneg_residue(n + k * m, m), r);
            prop_assert!((0..m).contains(&r.value()));
            prop_assert_eq!((n - r.value()).rem_euclid(m), 0);
        }
    }
}
