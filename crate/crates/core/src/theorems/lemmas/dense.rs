//! Exhaustive kernels over zero-padded tables.
//!
//! The tables cover `[-pad, pqr)` so that every shifted argument the lemmas
//! use stays inside the slice; most checks are then comparisons of aligned
//! slices. Iteration order (and hence the first witness) matches the
//! point-wise driver.

use std::cell::OnceCell;

use serde_json::{json, Value};

use super::{Source, Tally};
use crate::arith::mod_inverse;
use crate::repr::{f_residue_table, mark_representable, others, ChiTable, Representation, Role, Triple, TripleContext};

pub(super) struct Dense {
    ctx: TripleContext,
    len: i64,
    pad: i64,
    /// `χ(n)` at `n + pad`
    bits: Vec<u8>,
    /// number of representable integers in `[0, n]`, at `n + pad`
    counts: Vec<i32>,
    /// `a_n` at `n + pad`
    coeffs: Vec<i32>,
    components: OnceCell<[Vec<u32>; 3]>,
    /// `C(n) - C(n-p) - C(n-q) + C(n-p-q)` at `n + pad`, zero near the bottom
    window_diff: OnceCell<Vec<i32>>,
}

impl Dense {
    /// `half` holds `a_0, ..., a_{D/2}`; the rest follows by symmetry.
    pub(super) fn new(ctx: &TripleContext, half: &[i64]) -> Self {
        let t = ctx.triple();
        let [p, q, r] = t.elements();
        let pad = 3 * (p + q + r) + (p * q).max(q * r).max(r * p);
        let len = t.product();
        let size = (pad + len) as usize;
        let mut bits = vec![0u8; size];
        mark_representable(t, &mut bits[pad as usize..]);
        let mut acc = 0i32;
        let counts = bits
            .iter()
            .map(|&b| {
                acc += b as i32;
                acc
            })
            .collect();
        let mut padded = Vec::with_capacity(size);
        padded.resize(pad as usize, 0);
        let degree = ((p - 1) * (q - 1) * (r - 1)) as usize;
        // heights of ternary polynomials stay far below i32::MAX
        let narrow = |&a: &i64| i32::try_from(a).expect("coefficient fits in i32");
        padded.extend(half.iter().map(narrow));
        padded.extend(half[..degree + 1 - half.len()].iter().rev().map(narrow));
        padded.resize(size, 0);
        Dense {
            ctx: ctx.clone(),
            len,
            pad,
            bits,
            counts,
            coeffs: padded,
            components: OnceCell::new(),
            window_diff: OnceCell::new(),
        }
    }

    fn triple(&self) -> &Triple {
        self.ctx.triple()
    }

    pub(super) fn coeff(&self, m: i64) -> i64 {
        if m < -self.pad || m >= self.len {
            0
        } else {
            self.coeffs[self.idx(m)] as i64
        }
    }

    #[inline]
    fn idx(&self, n: i64) -> usize {
        (n + self.pad) as usize
    }

    #[inline]
    pub(super) fn chi_at(&self, n: i64) -> u8 {
        if n < -self.pad {
            0
        } else {
            self.bits[self.idx(n)]
        }
    }

    #[inline]
    fn count(&self, m: i64) -> i64 {
        if m < -self.pad {
            0
        } else {
            self.counts[self.idx(m)] as i64
        }
    }

    /// `len` entries of `v` starting at argument `from`.
    fn window<'a, T>(&self, v: &'a [T], from: i64, len: usize) -> &'a [T] {
        &v[self.idx(from)..][..len]
    }

    fn components(&self) -> &[Vec<u32>; 3] {
        self.components
            .get_or_init(|| self.ctx.component_run(self.len as usize))
    }

    #[cfg(test)]
    pub(super) fn flip(&mut self, n: i64) {
        let i = self.idx(n);
        self.bits[i] ^= 1;
        let delta = if self.bits[i] == 1 { 1 } else { -1 };
        for c in &mut self.counts[i..] {
            *c += delta;
        }
        self.components = OnceCell::new();
        self.window_diff = OnceCell::new();
    }

    fn window_diff(&self) -> &[i32] {
        self.window_diff.get_or_init(|| {
            let [p, q, _] = self.triple().elements();
            let (p, q) = (p as usize, q as usize);
            let c = &self.counts;
            let mut out = vec![0i32; c.len()];
            let body = out[p + q..]
                .iter_mut()
                .zip(&c[p + q..])
                .zip(&c[q..])
                .zip(&c[p..])
                .zip(c);
            for ((((o, &x), &y), &z), &w) in body {
                *o = x - y - z + w;
            }
            out
        })
    }
}

impl Source for Dense {
    #[inline]
    fn chi(&self, n: i64) -> u8 {
        self.chi_at(n)
    }

    #[inline]
    fn sigma(&self, k: i64, m: i64) -> i64 {
        self.count(m) - self.count(m - k)
    }

    fn rep(&self, n: i64) -> Representation {
        let c = &self.components();
        let i = n as usize;
        let (x, y, z) = (c[0][i] as i64, c[1][i] as i64, c[2][i] as i64);
        let [cx, cy, cz] = self.ctx.cofactors();
        let rest = n - x * cx - y * cy - z * cz;
        let delta = match rest {
            0 => 0,
            _ if rest == -self.len => -1,
            _ => rest / self.len,
        };
        Representation { x, y, z, delta }
    }
}

/// Positions where two indicator slices differ.
fn differing(a: &[u8], b: &[u8]) -> u64 {
    a.chunks(255)
        .zip(b.chunks(255))
        .map(|(x, y)| x.iter().zip(y).fold(0u8, |acc, (u, v)| acc + (u ^ v)) as u64)
        .sum()
}

/// Positions where `a != x - y`.
fn unbalanced(a: &[i32], x: &[i32], y: &[i32]) -> u64 {
    a.iter().zip(x).zip(y).map(|((&a, &x), &y)| (a != x - y) as u64).sum()
}

impl Tally {
    fn over(points: u64) -> Tally {
        Tally {
            points,
            ..Tally::default()
        }
    }

    #[cold]
    fn flag(&mut self, witness: impl FnOnce() -> Value) {
        self.failures += 1;
        if self.witness.is_none() {
            self.witness = Some(witness());
        }
    }
}

pub(super) fn lemma2(d: &Dense, a: i64, b: i64) -> Tally {
    let len = d.len as usize;
    let (x0, x1, x2, x3) = (
        d.window(&d.bits, 0, len),
        d.window(&d.bits, -a, len),
        d.window(&d.bits, -b, len),
        d.window(&d.bits, -a - b, len),
    );
    // u + y - v - w lies in [-2, 2]; shifted by one, |.| > 1 is > 2 unsigned
    let bad = |u: u8, v: u8, w: u8, y: u8| (u + y).wrapping_sub(v + w).wrapping_add(1) > 2;
    let failures = x0
        .iter()
        .zip(x1)
        .zip(x2)
        .zip(x3)
        .map(|(((&u, &v), &w), &y)| bad(u, v, w, y) as u32)
        .sum::<u32>();
    let mut tally = Tally::over(len as u64);
    if failures > 0 {
        let i = (0..len).find(|&i| bad(x0[i], x1[i], x2[i], x3[i])).unwrap();
        let v = x0[i] as i64 - x1[i] as i64 - x2[i] as i64 + x3[i] as i64;
        tally.failures = failures as u64;
        tally.witness = Some(json!({ "n": i, "a": a, "b": b, "value": v }));
    }
    tally
}

pub(super) fn eq24(d: &Dense, c_role: Role) -> Tally {
    let (_, a, b) = d.triple().split(c_role);
    let len = d.len as usize;
    let (now, before) = (d.window(&d.bits, 0, len), d.window(&d.bits, -a * b, len));
    let mut tally = Tally::over(len as u64);
    for (n, (&u, &v)) in now.iter().zip(before).enumerate() {
        if u != v {
            let rep = d.ctx.decompose(n as i64);
            if !(rep.component(c_role) == 0 && rep.delta == 0) {
                tally.flag(|| json!({ "n": n, "chi": u, "chi_shifted": v }));
            }
        }
    }
    tally
}

fn zero_residue_stream(c: i64, ab: i64) -> i64 {
    if c == 1 {
        0
    } else {
        mod_inverse(ab, c).expect("coprime elements").value()
    }
}

/// Every `n in [0, pqr)` is `kc + t*ab` with `t = z_n`, the component of `n`
/// for `c`; that covers every nonnegative argument of the identity.
pub(super) fn eq25(d: &Dense, c_role: Role) -> Tally {
    let (c, a, b) = d.triple().split(c_role);
    let ab = a * b;
    let step = zero_residue_stream(c, ab);
    let mut tally = Tally::over(d.len as u64);
    let floor = -d.pad;
    let mut z = 0;
    for n in 0..d.len {
        // everything below the padding is unrepresentable, like the padding itself
        let base = n - z * ab;
        let (u, v) = (d.bits[d.idx(n)], d.bits[d.idx(base.max(floor))]);
        if u != v {
            tally.flag(|| json!({ "k": base / c, "t": z, "chi": u, "chi_base": v }));
        }
        z += step;
        z -= c * (z >= c) as i64;
    }
    tally
}

/// `n = kc - t*ab` with `t = c - z_n` (no solution when `z_n = 0`); the
/// point is in range when `k < ab`.
pub(super) fn eq26(d: &Dense, c_role: Role) -> Tally {
    let (c, a, b) = d.triple().split(c_role);
    let ab = a * b;
    let step = zero_residue_stream(c, ab);
    let bits = d.window(&d.bits, 0, d.len as usize);
    let (mut points, mut failures) = (0u64, 0u64);
    let mut z = 0;
    for (n, &u) in bits.iter().enumerate() {
        let live = (z != 0) & (n as i64 + (c - z) * ab < d.len);
        points += live as u64;
        failures += (live & (u != 0)) as u64;
        z += step;
        z -= c * (z >= c) as i64;
    }
    let mut tally = Tally::over(points);
    if failures > 0 {
        tally.failures = failures;
        let mut z = 0;
        for (n, &u) in bits.iter().enumerate() {
            let t = c - z;
            if z != 0 && n as i64 + t * ab < d.len && u != 0 {
                tally.witness = Some(json!({ "k": (n as i64 + t * ab) / c, "t": t, "chi": u }));
                break;
            }
            z += step;
            z -= c * (z >= c) as i64;
        }
    }
    tally
}

pub(super) fn lemma3(d: &Dense, a: i64, b: i64, c: i64) -> Tally {
    let len = d.len as usize;
    let (now, before) = (d.window(&d.coeffs, 0, len), d.window(&d.coeffs, -a * b, len));
    let blocked = |lo: i64, hi: i64| {
        let mut n = (lo.div_euclid(c) + 1) * c;
        while n <= hi {
            if d.chi_at(n) == 1 || d.chi_at(n - c) == 1 {
                return true;
            }
            n += c;
        }
        false
    };
    let mut tally = Tally::over(len as u64);
    for (m, (&u, &v)) in now.iter().zip(before).enumerate() {
        if u != v {
            let m = m as i64;
            if !(blocked(m - b - a, m - b) || blocked(m - a, m)) {
                tally.flag(|| json!({ "m": m, "a_m": u, "a_shifted": v, "roles": [a, b, c] }));
            }
        }
    }
    tally
}

/// `f(n) <= floor(n/c)` is `n >= c f(n)`, and `f` is `ab`-periodic, so each
/// block of `ab` consecutive `n` compares against one threshold table.
pub(super) fn lemma4(d: &Dense, c_role: Role) -> Tally {
    let (c, a, b) = d.triple().split(c_role);
    let ab = a * b;
    let thresholds: Vec<i32> = f_residue_table(d.triple(), c_role)
        .iter()
        .map(|&f| (c * f) as i32)
        .collect();
    let bits = d.window(&d.bits, 0, d.len as usize);
    let mut tally = Tally::over(d.len as u64);
    for (k, block) in bits.chunks(ab as usize).enumerate() {
        let base = (k as i64 * ab) as i32;
        let failures = block
            .iter()
            .zip(&thresholds)
            .zip(base..)
            .map(|((&u, &t), n)| ((n >= t) as u8 != u) as u32)
            .sum::<u32>();
        if failures > 0 {
            let (i, (&u, &t)) = block
                .iter()
                .zip(&thresholds)
                .enumerate()
                .find(|&(i, (&u, &t))| (base + i as i32 >= t) as u8 != u)
                .unwrap();
            let n = base as i64 + i as i64;
            if tally.witness.is_none() {
                tally.witness = Some(json!({ "n": n, "chi": u, "f": t as i64 / c, "floor": n / c }));
            }
            tally.failures += failures as u64;
        }
    }
    tally
}

pub(super) fn lemma5(d: &Dense, c_role: Role, companion: i64, f_other: &[i64]) -> Tally {
    let [ra, rb] = others(c_role);
    let (ea, eb) = (d.triple().get(ra), d.triple().get(rb));
    let inv = d.ctx.inverses();
    let (sa, sb) = (inv[ra.index()], inv[rb.index()]);
    let ab = f_other.len();
    let mut tally = Tally::over(d.len as u64);
    // residue components of consecutive n, stepped without division
    let (mut u, mut v) = (0i64, 0i64);
    let mut failures = 0u64;
    let mut first = None;
    for k in 0..(d.len as usize).div_ceil(ab) {
        let len = ab.min(d.len as usize - k * ab);
        let mut bad = 0u64;
        for &f in &f_other[..len] {
            bad += (u * eb + v * ea != f) as u64;
            u += sa;
            u -= if u >= ea { ea } else { 0 };
            v += sb;
            v -= if v >= eb { eb } else { 0 };
        }
        if bad > 0 && first.is_none() {
            first = Some(k);
        }
        failures += bad;
    }
    if let Some(k) = first {
        let comps = d.components();
        let (xa, xb) = (&comps[ra.index()], &comps[rb.index()]);
        let i = (0..ab)
            .find(|&i| xa[k * ab + i] as i64 * eb + xb[k * ab + i] as i64 * ea != f_other[i])
            .unwrap();
        let n = k * ab + i;
        let here = xa[n] as i64 * eb + xb[n] as i64 * ea;
        tally.failures = failures;
        tally.witness = Some(json!({ "n": n, "f": here, "f_companion": f_other[i], "companion": companion }));
    }
    tally
}

/// The eight count columns whose signed sum is
/// `σ_k(m-o) - σ_k(m-o-u) - σ_k(m-o-v) + σ_k(m-o-u-v)` for `m` in `[lo, lo + len)`.
fn alternating(d: &Dense, lo: i64, len: usize, k: i64, o: i64, u: i64, v: i64) -> [&[i32]; 8] {
    [0, k, u, u + k, v, v + k, u + v, u + v + k].map(|off| d.window(&d.counts, lo - o - off, len))
}

fn signed(c: &[&[i32]; 8], i: usize) -> i32 {
    c[0][i] - c[1][i] - c[2][i] + c[3][i] - c[4][i] + c[5][i] + c[6][i] - c[7][i]
}

/// With `D(x) = C(x) - C(x-p) - C(x-q) + C(x-p-q)` the two sums telescope:
/// `Σ1(m) = D(m) - D(m-s)` and `Σ2(m) = D(m-s) - D(m-s-pq)`, so `Σ1 + Σ2`
/// is `D(m) - D(m-r)`.
pub(super) fn lemma6(d: &Dense, p: i64, q: i64, s: i64) -> Tally {
    let r = d.triple().r();
    let lo = -(d.triple().p() + d.triple().q() + r);
    let len = (d.len - lo) as usize;
    let diff = d.window_diff();
    let (now, back) = (d.window(diff, lo, len), d.window(diff, lo - r, len));
    let coeffs = d.window(&d.coeffs, lo, len);
    let bad = |i: usize| coeffs[i] != now[i] - back[i];
    let failures = unbalanced(coeffs, now, back);
    let mut tally = Tally::over(len as u64);
    if failures > 0 {
        let i = (0..len).find(|&i| bad(i)).unwrap();
        let sigma1 = alternating(d, lo, len, s, 0, p, q);
        let sigma2 = alternating(d, lo, len, p, s, p * q, q);
        let (s1, s2) = (signed(&sigma1, i), signed(&sigma2, i));
        tally.failures = failures;
        tally.witness = Some(json!({ "m": lo + i as i64, "a_m": coeffs[i], "sigma1": s1, "sigma2": s2 }));
    }
    tally
}

/// `a_m - Σ1(m)` is compared with zero everywhere, then corrected on the two
/// windows after each multiple of `r`, the only places the `χ` term lives.
pub(super) fn lemma7(d: &Dense, p: i64, q: i64, s: i64) -> Tally {
    let r = d.triple().r();
    let lo = -(p + q + r);
    let len = (d.len - lo) as usize;
    let diff = d.window_diff();
    let (now, back) = (d.window(diff, lo, len), d.window(diff, lo - s, len));
    let coeffs = d.window(&d.coeffs, lo, len);
    let sigma1 = |i: usize| (now[i] - back[i]) as i64;
    let mut failures = unbalanced(coeffs, now, back) as i64;
    let mut n = (lo - s).div_euclid(r) * r;
    while n + s < lo + len as i64 {
        let chi = d.chi_at(n) as i64;
        if chi != 0 {
            for (off, sign) in [(s, 1), (s + q, -1)] {
                let from = (n + off - lo).clamp(0, len as i64) as usize;
                let to = (n + off + p - lo).clamp(0, len as i64) as usize;
                for i in from..to {
                    let plain = coeffs[i] as i64 != sigma1(i);
                    let corrected = coeffs[i] as i64 != sigma1(i) + sign * chi;
                    failures += corrected as i64 - plain as i64;
                }
            }
        }
        n += r;
    }
    let mut tally = Tally::over(len as u64);
    if failures > 0 {
        tally.failures = failures as u64;
        for (i, &a) in coeffs.iter().enumerate() {
            let (m, a) = (lo + i as i64, a as i64);
            let n = (m - s).div_euclid(r) * r;
            let correction = if n > m - s - p {
                d.chi_at(n) as i64
            } else if n > m - s - q - p && n <= m - s - q {
                -(d.chi_at(n) as i64)
            } else {
                0
            };
            if a != sigma1(i) + correction {
                tally.witness = Some(json!({
                    "m": m, "a_m": a, "sigma1": sigma1(i), "alpha": n / r, "correction": correction
                }));
                break;
            }
        }
    }
    tally
}

pub(super) fn lemma9(d: &Dense, other: &ChiTable, s: i64) -> Tally {
    let [p, q, r] = d.triple().elements();
    let pq = p * q;
    // for k < 0 both arguments are negative and both sides vanish
    let mut tally = Tally::over(((pq - 1) * (2 * s - 1)) as u64);
    let mut cbits = vec![0u8; s as usize];
    cbits.extend_from_slice(other.bits());
    let mut failures = 0;
    let mut first = None;
    for k in 0..pq {
        // j runs over [1 - s, last]
        let last = (s - 1).min(d.len - 1 - k * r).min(other.limit() - 1 - k * s);
        if last < 1 - s {
            continue;
        }
        let len = (last + s) as usize;
        let here = d.segment(&d.bits, k * r + 1 - s, len);
        let there = &cbits[(k * s + 1) as usize..][..len];
        let bad = differing(here, there);
        if bad > 0 && first.is_none() {
            let i = (0..len).find(|&i| here[i] != there[i]).unwrap();
            first = Some(json!({ "k": k, "j": i as i64 + 1 - s, "chi": here[i], "chi_companion": there[i] }));
        }
        tally.points += len as u64;
        failures += bad;
    }
    tally.failures = failures;
    tally.witness = first;
    tally
}

impl Dense {
    /// `len <= pad` entries from `from`; a window starting below the padding
    /// lies entirely below zero, so the first `len` padding entries stand in.
    #[inline]
    fn segment<'a, T>(&self, v: &'a [T], from: i64, len: usize) -> &'a [T] {
        self.window(v, from.max(-self.pad), len)
    }
}

pub(super) fn lemma10(d: &Dense, s: i64) -> Tally {
    let [p, q, r] = d.triple().elements();
    let pq = p * q;
    let bmax = pq / s;
    let mut tally = Tally::default();
    for k in 1 - pq..pq {
        let mut failures = 0;
        for beta in -bmax..=bmax {
            let last = (s - 1).min(d.len - 1 - k * r).min(d.len - 1 - k * r - beta * pq);
            if last < 1 - s {
                continue;
            }
            let len = (last + s) as usize;
            let base = d.segment(&d.bits, k * r + 1 - s, len);
            let shifted = d.segment(&d.bits, k * r + 1 - s + beta * pq, len);
            let mut bad = differing(base, shifted);
            let mut points = len as u64;
            // j = 0 is not part of the identity
            if last >= 0 {
                points -= 1;
                bad -= (base[s as usize - 1] != shifted[s as usize - 1]) as u64;
            }
            tally.points += points;
            failures += bad;
        }
        if failures > 0 {
            if tally.witness.is_none() {
                tally.witness = lemma10_witness(d, s, k);
            }
            tally.failures += failures;
        }
    }
    tally
}

fn lemma10_witness(d: &Dense, s: i64, k: i64) -> Option<Value> {
    let [p, q, r] = d.triple().elements();
    let pq = p * q;
    let bmax = pq / s;
    for j in (1 - s..s).filter(|&j| j != 0) {
        let base = k * r + j;
        for beta in -bmax..=bmax {
            if base >= d.len || base + beta * pq >= d.len {
                break;
            }
            let (shifted, chi) = (d.chi_at(base + beta * pq), d.chi_at(base));
            if shifted != chi {
                return Some(json!({ "k": k, "j": j, "beta": beta, "chi_shifted": shifted, "chi": chi }));
            }
        }
    }
    None
}

pub(super) fn lemma11(d: &Dense, other: &ChiTable, s: i64) -> Tally {
    let [p, q, r] = d.triple().elements();
    let pq = p * q;
    let bmax = pq / s;
    let su = s as usize;
    // companion counts over [-(pq + s), pqs)
    let cpad = pq + s;
    let mut ccounts = vec![0i32; cpad as usize];
    ccounts.extend(other.prefix()[1..].iter().map(|&c| c as i32));
    let cwin = |from: i64| &ccounts[(from + cpad) as usize..][..su];
    let (mut mid, mut agree) = (vec![0i32; su], vec![true; su]);
    let mut tally = Tally::default();
    for k in 1 - pq..pq {
        // for k < 0 every companion argument is negative
        if k >= 0 {
            let (hi, lo) = (cwin(k * s), cwin(k * s - s));
            let (rhi, rlo) = (cwin(k * s - pq), cwin(k * s - pq - s));
            let chi = other.chi(k * s) as i32;
            for g in 0..su {
                mid[g] = hi[g] - lo[g] - chi;
                agree[g] = mid[g] == rhi[g] - rlo[g];
            }
        }
        let mut failures = 0;
        for beta in -bmax..=bmax {
            let x = k * r + beta * pq;
            let len = (d.len - x).clamp(0, s) as usize;
            if len == 0 {
                break;
            }
            tally.points += len as u64;
            let (hi, lo) = (d.segment(&d.counts, x, len), d.segment(&d.counts, x - s, len));
            let chi = if x < 0 { 0 } else { d.bits[d.idx(x)] as i32 };
            failures += (0..len)
                .map(|g| (!agree[g] | (hi[g] - lo[g] - chi != mid[g])) as u64)
                .sum::<u64>();
        }
        if failures > 0 {
            if tally.witness.is_none() {
                tally.witness = lemma11_witness(d, other, s, k);
            }
            tally.failures += failures;
        }
    }
    tally
}

fn lemma11_witness(d: &Dense, other: &ChiTable, s: i64, k: i64) -> Option<Value> {
    let [p, q, r] = d.triple().elements();
    let pq = p * q;
    let bmax = pq / s;
    for g in 0..s {
        let mid = other.sigma(s, k * s + g) - other.chi(k * s) as i64;
        let rhs = other.sigma(s, k * s + g - pq);
        for beta in -bmax..=bmax {
            let n = k * r + g + beta * pq;
            if n >= d.len {
                break;
            }
            let lhs = d.count(n) - d.count(n - s) - d.chi_at(k * r + beta * pq) as i64;
            if lhs != mid || mid != rhs {
                return Some(json!({ "k": k, "gamma": g, "beta": beta, "lhs": lhs, "middle": mid, "rhs": rhs }));
            }
        }
    }
    None
}
