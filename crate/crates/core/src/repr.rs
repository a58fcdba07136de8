//! Unique decomposition `n = x*qr + y*rp + z*pq + delta*pqr`, the indicator
//! of representable integers, and the two-parameter `f`-function.
//!
//! Everything here is symmetric in the three parameters. Operations that
//! single one of them out take an explicit [`Role`].

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, in_semigroup, least_nonneg_residue, mod_inverse, mul_mod};
use crate::error::{Error, Result};

/// A pairwise-coprime parameter set `{p, q, r}`, stored in the order given.
///
/// At most one element may be below 3, which admits the degenerate sets
/// `{p, q, 1}` and `{p, q, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTriple", into = "RawTriple")]
pub struct Triple {
    p: i64,
    q: i64,
    r: i64,
}

#[derive(Serialize, Deserialize)]
struct RawTriple {
    p: i64,
    q: i64,
    r: i64,
}

impl TryFrom<RawTriple> for Triple {
    type Error = Error;
    fn try_from(raw: RawTriple) -> Result<Self> {
        Triple::new(raw.p, raw.q, raw.r)
    }
}

impl From<Triple> for RawTriple {
    fn from(t: Triple) -> Self {
        RawTriple { p: t.p, q: t.q, r: t.r }
    }
}

/// Which of the three stored parameters an operation singles out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    P,
    Q,
    R,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::P, Role::Q, Role::R];

    pub(crate) fn index(self) -> usize {
        match self {
            Role::P => 0,
            Role::Q => 1,
            Role::R => 2,
        }
    }
}

impl Triple {
    pub fn new(p: i64, q: i64, r: i64) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidTriple {
            p,
            q,
            r,
            reason: reason.to_string(),
        };
        if p < 1 || q < 1 || r < 1 {
            return Err(invalid("elements must be positive"));
        }
        if gcd(p, q) != 1 || gcd(q, r) != 1 || gcd(r, p) != 1 {
            return Err(invalid("elements must be pairwise coprime"));
        }
        if [p, q, r].iter().filter(|&&e| e < 3).count() > 1 {
            return Err(invalid("at most one element may be below 3"));
        }
        // keeps pqr and the engines' index arithmetic inside i64
        if (p as i128) * (q as i128) * (r as i128) >= 1i128 << 62 {
            return Err(invalid("product pqr does not fit in 62 bits"));
        }
        Ok(Triple { p, q, r })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn elements(&self) -> [i64; 3] {
        [self.p, self.q, self.r]
    }

    pub fn get(&self, role: Role) -> i64 {
        self.elements()[role.index()]
    }

    /// `(pivot, a, b)` where `a, b` are the two remaining elements.
    pub fn split(&self, pivot: Role) -> (i64, i64, i64) {
        match pivot {
            Role::P => (self.p, self.q, self.r),
            Role::Q => (self.q, self.r, self.p),
            Role::R => (self.r, self.p, self.q),
        }
    }

    /// Same set with elements in ascending order.
    pub fn sorted(&self) -> Triple {
        let mut e = self.elements();
        e.sort_unstable();
        Triple {
            p: e[0],
            q: e[1],
            r: e[2],
        }
    }

    /// All elements at least 3.
    pub fn is_ternary(&self) -> bool {
        self.p >= 3 && self.q >= 3 && self.r >= 3
    }

    /// The element below 3, if any.
    pub fn degenerate_element(&self) -> Option<i64> {
        self.elements().into_iter().find(|&e| e < 3)
    }

    pub fn min_element(&self) -> i64 {
        self.p.min(self.q).min(self.r)
    }

    pub fn product(&self) -> i64 {
        self.p * self.q * self.r
    }

    /// The six orderings of the same set.
    pub fn permutations(&self) -> [Triple; 6] {
        let Triple { p, q, r } = *self;
        [
            Triple { p, q, r },
            Triple { p, q: r, r: q },
            Triple { p: q, q: p, r },
            Triple { p: q, q: r, r: p },
            Triple { p: r, q: p, r: q },
            Triple { p: r, q, r: p },
        ]
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{},{},{}}}", self.p, self.q, self.r)
    }
}

/// The unique `(x, y, z, delta)` with `n = x*qr + y*rp + z*pq + delta*pqr`,
/// `0 <= x < p`, `0 <= y < q`, `0 <= z < r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Representation {
    pub x: i64,
    pub y: i64,
    pub z: i64,
    pub delta: i64,
}

impl Representation {
    pub fn component(&self, role: Role) -> i64 {
        match role {
            Role::P => self.x,
            Role::Q => self.y,
            Role::R => self.z,
        }
    }
}

/// Per-triple cached inverses, making decomposition O(1).
#[derive(Debug, Clone)]
pub struct TripleContext {
    triple: Triple,
    elems: [i64; 3],
    /// product of the other two elements, per slot
    cofactors: [i64; 3],
    /// inverse of the cofactor modulo the element (0 when the element is 1)
    inverses: [i64; 3],
    product: i64,
}

impl TripleContext {
    pub fn new(triple: Triple) -> Self {
        let elems = triple.elements();
        let cofactors = [elems[1] * elems[2], elems[2] * elems[0], elems[0] * elems[1]];
        let mut inverses = [0; 3];
        for i in 0..3 {
            if elems[i] > 1 {
                inverses[i] = mod_inverse(cofactors[i], elems[i])
                    .expect("pairwise coprime triple")
                    .value();
            }
        }
        TripleContext {
            triple,
            elems,
            cofactors,
            inverses,
            product: triple.product(),
        }
    }

    pub fn triple(&self) -> &Triple {
        &self.triple
    }

    /// `pqr`, the upper end of the analysis range.
    pub fn product(&self) -> i64 {
        self.product
    }

    pub fn decompose(&self, n: i64) -> Representation {
        let mut c = [0i64; 3];
        for i in 0..3 {
            if self.elems[i] > 1 {
                let m = self.elems[i];
                c[i] = mul_mod(n.rem_euclid(m), self.inverses[i], m);
            }
        }
        let rest = n as i128 - (0..3).map(|i| c[i] as i128 * self.cofactors[i] as i128).sum::<i128>();
        let product = self.product as i128;
        assert!(
            rest % product == 0,
            "decomposition of {n} over {} is not exact",
            self.triple
        );
        Representation {
            x: c[0],
            y: c[1],
            z: c[2],
            delta: (rest / product) as i64,
        }
    }

    /// Indicator of representable integers for `n < pqr`; zero for `n < 0`.
    pub fn chi(&self, n: i64) -> Result<u8> {
        if n >= self.product {
            return Err(Error::DomainExceeded { n, limit: self.product });
        }
        Ok(self.chi_unchecked(n))
    }

    #[inline]
    pub(crate) fn chi_unchecked(&self, n: i64) -> u8 {
        if n < 0 {
            return 0;
        }
        (self.decompose(n).delta == 0) as u8
    }

    /// `f(n) = x_a * b + x_b * a` for the two non-pivot elements `a, b`,
    /// read off the decomposition.
    pub fn f_value(&self, n: i64, pivot: Role) -> i64 {
        let rep = self.decompose(n);
        let [a, b] = others(pivot);
        rep.component(a) * self.triple.get(b) + rep.component(b) * self.triple.get(a)
    }

    /// Window sum of the indicator over `(m - k, m]`.
    pub fn sigma(&self, k: i64, m: i64) -> Result<i64> {
        if m >= self.product {
            return Err(Error::DomainExceeded {
                n: m,
                limit: self.product,
            });
        }
        if k < 0 {
            return Err(Error::InvalidParameters(format!("window length {k} is negative")));
        }
        let lo = (m - k + 1).max(0);
        Ok((lo..=m).map(|n| self.chi_unchecked(n) as i64).sum())
    }

    /// Indicator values for `0..len`, streamed with incremental residues.
    pub fn chi_run(&self, len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(len);
        let mut c = [0i64; 3];
        for n in 0..len as i64 {
            let partial = c[0] * self.cofactors[0] + c[1] * self.cofactors[1] + c[2] * self.cofactors[2];
            out.push((partial == n) as u8);
            for i in 0..3 {
                c[i] += self.inverses[i];
                if c[i] >= self.elems[i] {
                    c[i] -= self.elems[i];
                }
            }
        }
        out
    }

    /// The three residue components of the decomposition for `0..len`.
    pub(crate) fn component_run(&self, len: usize) -> [Vec<u32>; 3] {
        let mut out: [Vec<u32>; 3] = std::array::from_fn(|_| Vec::with_capacity(len));
        let mut c = [0i64; 3];
        for _ in 0..len {
            for i in 0..3 {
                out[i].push(c[i] as u32);
                c[i] += self.inverses[i];
                if c[i] >= self.elems[i] {
                    c[i] -= self.elems[i];
                }
            }
        }
        out
    }

    pub(crate) fn cofactors(&self) -> [i64; 3] {
        self.cofactors
    }

    /// `(n / cofactor) mod element` step per unit of `n`, by role index.
    pub(crate) fn inverses(&self) -> [i64; 3] {
        self.inverses
    }
}

/// Sets `out[n] = 1` for every representable `n < out.len()` (at most `pqr`).
pub(crate) fn mark_representable(t: &Triple, out: &mut [u8]) {
    let [p, q, r] = t.elements();
    let (qr, rp, pq) = (q * r, r * p, p * q);
    let limit = out.len() as i64;
    for x in 0..p {
        let bx = x * qr;
        if bx >= limit {
            break;
        }
        for y in 0..q {
            let by = bx + y * rp;
            if by >= limit {
                break;
            }
            let mut n = by;
            while n < limit && n < by + r * pq {
                out[n as usize] = 1;
                n += pq;
            }
        }
    }
}

pub(crate) fn others(pivot: Role) -> [Role; 2] {
    match pivot {
        Role::P => [Role::Q, Role::R],
        Role::Q => [Role::R, Role::P],
        Role::R => [Role::P, Role::Q],
    }
}

/// Residue-side evaluation of `f`: `[n c*]_{ab}`, lifted by `ab` when it falls
/// outside the semigroup generated by `a, b`.
pub fn f_via_residue(n: i64, t: &Triple, pivot: Role) -> i64 {
    let (c, a, b) = t.split(pivot);
    let ab = a * b;
    let c_inv = mod_inverse(c, ab).expect("pairwise coprime triple").value();
    let rho = mul_mod(n.rem_euclid(ab), c_inv, ab);
    if in_semigroup(rho, a, b).expect("coprime generators") {
        rho
    } else {
        rho + ab
    }
}

pub fn decompose(n: i64, t: &Triple) -> Representation {
    TripleContext::new(*t).decompose(n)
}

pub fn chi(n: i64, t: &Triple) -> Result<u8> {
    TripleContext::new(*t).chi(n)
}

pub fn f_value(n: i64, t: &Triple, pivot: Role) -> i64 {
    TripleContext::new(*t).f_value(n, pivot)
}

/// Indicator via the criterion `f(n) <= floor(n / c)`; an oracle for [`chi`]
/// that never touches the three-term decomposition.
pub fn chi_via_lemma4(n: i64, t: &Triple, pivot: Role) -> Result<u8> {
    let limit = t.product();
    if !(0..limit).contains(&n) {
        return Err(Error::DomainExceeded { n, limit });
    }
    let c = t.get(pivot);
    Ok((f_via_residue(n, t, pivot) <= n / c) as u8)
}

pub fn sigma(k: i64, m: i64, t: &Triple) -> Result<i64> {
    TripleContext::new(*t).sigma(k, m)
}

/// `[n]_m` as a bare integer.
pub(crate) fn residue(n: i64, m: i64) -> i64 {
    least_nonneg_residue(n, m).value()
}

/// Dense indicator table over `[0, limit)` with prefix counts, built by
/// enumerating `x*qr + y*rp + z*pq` directly.
#[derive(Debug, Clone)]
pub struct ChiTable {
    limit: i64,
    bits: Vec<u8>,
    /// prefix[i] = number of representable n in [0, i)
    prefix: Vec<u32>,
}

impl ChiTable {
    /// Table for `[0, limit)`; `limit` must not exceed `pqr`.
    pub fn build(t: &Triple, limit: i64) -> Self {
        assert!(
            (0..=t.product()).contains(&limit),
            "table limit {limit} outside [0, pqr]"
        );
        let mut bits = vec![0u8; limit as usize];
        mark_representable(t, &mut bits);
        let mut prefix = Vec::with_capacity(bits.len() + 1);
        let mut acc = 0u32;
        prefix.push(0);
        for &b in &bits {
            acc += b as u32;
            prefix.push(acc);
        }
        ChiTable { limit, bits, prefix }
    }

    pub fn limit(&self) -> i64 {
        self.limit
    }

    #[inline]
    pub fn chi(&self, n: i64) -> u8 {
        if n < 0 {
            0
        } else {
            self.bits[n as usize]
        }
    }

    /// Number of representable integers in `[0, m]`.
    #[inline]
    pub fn count_upto(&self, m: i64) -> i64 {
        if m < 0 {
            0
        } else {
            self.prefix[(m + 1) as usize] as i64
        }
    }

    /// Window sum over `(m - k, m]`.
    #[inline]
    pub fn sigma(&self, k: i64, m: i64) -> i64 {
        self.count_upto(m) - self.count_upto(m - k)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// `prefix[i]` counts representable integers in `[0, i)`.
    pub(crate) fn prefix(&self) -> &[u32] {
        &self.prefix
    }
}

/// `ab`-periodic table of `f` for pivot `c`, indexed by `[n]_{ab}`.
pub(crate) fn f_residue_table(t: &Triple, pivot: Role) -> Vec<i64> {
    let (c, a, b) = t.split(pivot);
    let ab = a * b;
    let c_inv = mod_inverse(c, ab).expect("pairwise coprime triple").value();
    let members = crate::arith::semigroup_table(a, b, ab as usize);
    (0..ab)
        .map(|n| {
            let rho = mul_mod(n, c_inv, ab);
            if members[rho as usize] {
                rho
            } else {
                rho + ab
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(p: i64, q: i64, r: i64) -> Triple {
        Triple::new(p, q, r).unwrap()
    }

    /// Exhaustive search for the decomposition, independent of inverses.
    fn brute_decompose(n: i64, t: &Triple) -> Representation {
        let [p, q, r] = t.elements();
        let pqr = p * q * r;
        for x in 0..p {
            for y in 0..q {
                for z in 0..r {
                    let rest = n - x * q * r - y * r * p - z * p * q;
                    if rest.rem_euclid(pqr) == 0 {
                        return Representation {
                            x,
                            y,
                            z,
                            delta: rest / pqr,
                        };
                    }
                }
            }
        }
        unreachable!("no decomposition for {n}")
    }

    #[test]
    fn triple_validation() {
        assert!(Triple::new(3, 5, 7).is_ok());
        assert!(Triple::new(3, 5, 1).is_ok());
        assert!(Triple::new(3, 5, 2).is_ok());
        assert!(Triple::new(3, 6, 7).is_err());
        assert!(Triple::new(1, 2, 7).is_err());
        assert!(Triple::new(0, 5, 7).is_err());
        assert!(Triple::new(-3, 5, 7).is_err());
        assert!(Triple::new(3, 5, 3).is_err());
    }

    #[test]
    fn decompose_examples() {
        let tr = t(3, 5, 7);
        assert_eq!(
            decompose(0, &tr),
            Representation {
                x: 0,
                y: 0,
                z: 0,
                delta: 0
            }
        );
        assert_eq!(
            decompose(35, &tr),
            Representation {
                x: 1,
                y: 0,
                z: 0,
                delta: 0
            }
        );
        assert_eq!(
            decompose(1, &tr),
            Representation {
                x: 2,
                y: 1,
                z: 1,
                delta: -1
            }
        );
        assert_eq!(brute_decompose(1, &tr), decompose(1, &tr));
    }

    #[test]
    fn decompose_matches_brute_force() {
        for tr in [t(3, 5, 7), t(4, 5, 9), t(3, 5, 2), t(7, 4, 1)] {
            let ctx = TripleContext::new(tr);
            for n in -2 * tr.product()..2 * tr.product() {
                assert_eq!(ctx.decompose(n), brute_decompose(n, &tr), "{tr} n={n}");
            }
        }
    }

    #[test]
    fn chi_examples() {
        let tr = t(3, 5, 7);
        assert_eq!(chi(0, &tr).unwrap(), 1);
        assert_eq!(chi(-5, &tr).unwrap(), 0);
        assert_eq!(chi(1, &tr).unwrap(), 0);
        assert_eq!(chi(105, &tr), Err(Error::DomainExceeded { n: 105, limit: 105 }));
    }

    #[test]
    fn f_examples() {
        let tr = t(3, 5, 7);
        assert_eq!(f_value(0, &tr, Role::R), 0);
        assert_eq!(f_value(1, &tr, Role::R), 13);
        assert_eq!(f_value(7, &tr, Role::R), 16);
        assert_eq!(f_via_residue(1, &tr, Role::R), 13);
        assert_eq!(f_via_residue(7, &tr, Role::R), 16);
        let rep = decompose(7, &tr);
        assert_eq!((rep.x, rep.y), (2, 2));
    }

    #[test]
    fn lemma4_examples() {
        let tr = t(3, 5, 7);
        assert_eq!(chi_via_lemma4(0, &tr, Role::R).unwrap(), 1);
        assert_eq!(chi_via_lemma4(1, &tr, Role::R).unwrap(), 0);
        assert_eq!(chi_via_lemma4(35, &tr, Role::R).unwrap(), 1);
        assert!(chi_via_lemma4(-1, &tr, Role::R).is_err());
        assert!(chi_via_lemma4(105, &tr, Role::R).is_err());
    }

    #[test]
    fn sigma_examples() {
        let tr = t(3, 5, 7);
        assert_eq!(sigma(0, 10, &tr).unwrap(), 0);
        assert_eq!(sigma(3, 2, &tr).unwrap(), 1);
        assert_eq!(sigma(1, 35, &tr).unwrap(), 1);
        assert!(sigma(1, 105, &tr).is_err());
    }

    #[test]
    fn chi_routes_agree_exhaustively_on_small_triples() {
        // every sorted triple with pqr <= 6_000, all pivots
        for p in 3..30i64 {
            for q in p + 1..200 {
                for r in q + 1..2000 {
                    if p * q * r > 6_000 {
                        break;
                    }
                    let Ok(tr) = Triple::new(p, q, r) else { continue };
                    let ctx = TripleContext::new(tr);
                    let table = ChiTable::build(&tr, tr.product());
                    let run = ctx.chi_run(tr.product() as usize);
                    for n in 0..tr.product() {
                        let c = ctx.chi(n).unwrap();
                        assert_eq!(c, table.chi(n), "{tr} n={n}");
                        assert_eq!(c, run[n as usize]);
                        for pivot in Role::ALL {
                            assert_eq!(c, chi_via_lemma4(n, &tr, pivot).unwrap(), "{tr} n={n}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn f_residue_table_matches_decomposition() {
        for tr in [t(3, 5, 7), t(4, 9, 5), t(5, 7, 3), t(3, 4, 11)] {
            let ctx = TripleContext::new(tr);
            for pivot in Role::ALL {
                let table = f_residue_table(&tr, pivot);
                let (c, a, b) = tr.split(pivot);
                for n in -tr.product()..tr.product() {
                    let f = ctx.f_value(n, pivot);
                    assert_eq!(f, table[residue(n, a * b) as usize]);
                    assert_eq!(f, f_via_residue(n, &tr, pivot));
                    assert_eq!(
                        residue(f, a * b),
                        residue(n * mod_inverse(c, a * b).unwrap().value(), a * b)
                    );
                }
            }
        }
    }

    fn coprime_triple() -> impl Strategy<Value = Triple> {
        (3i64..40, 3i64..40, 3i64..40).prop_filter_map("pairwise coprime", |(p, q, r)| Triple::new(p, q, r).ok())
    }

    proptest! {
        #[test]
        fn decomposition_reconstructs(tr in coprime_triple(), n in -1_000_000i64..1_000_000) {
            let rep = decompose(n, &tr);
            let [p, q, r] = tr.elements();
            prop_assert!((0..p).contains(&rep.x) && (0..q).contains(&rep.y) && (0..r).contains(&rep.z));
            prop_assert_eq!(rep.x * q * r + rep.y * r * p + rep.z * p * q + rep.delta * p * q * r, n);
        }

        #[test]
        fn decomposition_follows_permutations(tr in coprime_triple(), n in -100_000i64..100_000) {
            let rep = decompose(n, &tr);
            let swapped = Triple::new(tr.r(), tr.p(), tr.q()).unwrap();
            let rep2 = decompose(n, &swapped);
            prop_assert_eq!((rep2.x, rep2.y, rep2.z, rep2.delta), (rep.z, rep.x, rep.y, rep.delta));
        }

        #[test]
        fn chi_matches_lemma4_on_large_triples(
            tr in (50i64..400, 50i64..400, 50i64..400)
                .prop_filter_map("coprime", |(p, q, r)| Triple::new(p, q, r).ok()),
            frac in 0.0f64..1.0,
        ) {
            let n = (frac * tr.product() as f64) as i64;
            let c = chi(n, &tr).unwrap();
            for pivot in Role::ALL {
                prop_assert_eq!(c, chi_via_lemma4(n, &tr, pivot).unwrap());
            }
        }

        #[test]
        fn lemma5_f_depends_only_on_residues(
            (p, q) in (3i64..30, 3i64..30).prop_filter("coprime", |(p, q)| p != q && gcd(*p, *q) == 1),
            r0 in 1i64..500, k in 1i64..5, n in -5000i64..5000, shift in -50i64..50,
        ) {
            let pq = p * q;
            let r = r0;
            let s = r0 + k * pq;
            prop_assume!(gcd(r, pq) == 1 && r >= 3);
            let t1 = Triple::new(p, q, r).unwrap();
            let t2 = Triple::new(p, q, s).unwrap();
            prop_assert_eq!(f_value(n, &t1, Role::R), f_value(n + shift * pq, &t2, Role::R));
        }
    }
}
