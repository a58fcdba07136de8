//! Coefficient engines for `Q_{p,q,r}`.
//!
//! Two independent routes produce the full coefficient vector:
//!
//! * the series engine expands the rational function
//!   `(1-z^pqr)(1-z^p)(1-z^q)(1-z^r) / ((1-z)(1-z^pq)(1-z^qr)(1-z^rp))`
//!   as a truncated power series with strided in-place updates;
//! * the indicator engine sums the indicator of representable integers over
//!   a window of length `min(p,q,r)` using prefix counts.
//!
//! Neither route shares code with the other beyond the [`Triple`] type.

pub mod format;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repr::{Role, Triple, TripleContext};

/// Default upper bound on the degree either engine will materialize.
pub const DEFAULT_DEGREE_CAP: u64 = 20_000_000;

/// Environment variable consulted by [`DegreeCap::from_env`].
pub const DEGREE_CAP_ENV: &str = "IEP_DEGREE_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeCap(pub u64);

impl Default for DegreeCap {
    fn default() -> Self {
        DegreeCap(DEFAULT_DEGREE_CAP)
    }
}

impl DegreeCap {
    /// Reads [`DEGREE_CAP_ENV`], falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(DEGREE_CAP_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(DegreeCap)
                .map_err(|_| Error::InvalidParameters(format!("{DEGREE_CAP_ENV}={v} is not a nonnegative integer"))),
            Err(_) => Ok(DegreeCap::default()),
        }
    }

    pub(crate) fn check(self, degree: u64) -> Result<()> {
        if degree > self.0 {
            Err(Error::DegreeCapExceeded { degree, cap: self.0 })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Series,
    Chi,
}

impl Engine {
    pub fn id(self) -> u8 {
        match self {
            Engine::Series => 0,
            Engine::Chi => 1,
        }
    }

    pub fn from_id(id: u8) -> Option<Engine> {
        match id {
            0 => Some(Engine::Series),
            1 => Some(Engine::Chi),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Engine::Series => "series",
            Engine::Chi => "chi",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(Engine::Series),
            "chi" => Ok(Engine::Chi),
            _ => Err(Error::InvalidParameters(format!("unknown engine `{s}`"))),
        }
    }
}

/// Whether the series engine computes every index or only the lower half,
/// mirroring the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Full,
    Half,
}

/// The exact coefficients `a_0 ..= a_degree` of one polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientVector {
    pub triple: Triple,
    pub degree: u64,
    pub engine: Engine,
    pub coeffs: Vec<i64>,
}

impl CoefficientVector {
    /// `a_m`, zero outside `[0, degree]`.
    pub fn get(&self, m: i64) -> i64 {
        if m < 0 || m as u64 > self.degree {
            0
        } else {
            self.coeffs[m as usize]
        }
    }

    /// Structural defects: wrong length, end coefficients, reciprocity,
    /// value at 1. Empty when the vector is sound.
    pub fn structural_defects(&self) -> Vec<String> {
        let mut defects = Vec::new();
        if self.degree != degree(&self.triple) {
            defects.push(format!(
                "degree {} differs from (p-1)(q-1)(r-1) = {}",
                self.degree,
                degree(&self.triple)
            ));
        }
        if self.coeffs.len() as u64 != self.degree + 1 {
            defects.push(format!("{} coefficients for degree {}", self.coeffs.len(), self.degree));
            return defects;
        }
        if self.coeffs[0] != 1 {
            defects.push(format!("a_0 = {}", self.coeffs[0]));
        }
        if *self.coeffs.last().unwrap() != 1 {
            defects.push(format!("a_degree = {}", self.coeffs.last().unwrap()));
        }
        let n = self.coeffs.len();
        if let Some(m) = (0..n / 2).find(|&m| self.coeffs[m] != self.coeffs[n - 1 - m]) {
            defects.push(format!("reciprocity fails at m = {m}"));
        }
        let sum: i128 = self.coeffs.iter().map(|&c| c as i128).sum();
        if sum != 1 {
            defects.push(format!("coefficient sum {sum} != 1"));
        }
        defects
    }
}

/// `(p-1)(q-1)(r-1)`.
pub fn degree(t: &Triple) -> u64 {
    let [p, q, r] = t.elements();
    ((p - 1) * (q - 1) * (r - 1)) as u64
}

/// Series expansion of the defining rational function.
pub fn coeffs_series(t: &Triple, mode: Mode, cap: DegreeCap) -> Result<CoefficientVector> {
    let deg = degree(t);
    cap.check(deg)?;
    let deg = deg as usize;
    let coeffs = match mode {
        Mode::Full => series_prefix(t, deg + 1)?,
        Mode::Half => {
            let half = series_prefix(t, deg / 2 + 1)?;
            let mut full = Vec::with_capacity(deg + 1);
            full.extend_from_slice(&half);
            full.extend((deg / 2 + 1..=deg).map(|m| half[deg - m]));
            full
        }
    };
    Ok(CoefficientVector {
        triple: *t,
        degree: deg as u64,
        engine: Engine::Series,
        coeffs,
    })
}

/// First `len` coefficients of the power series of the defining quotient.
pub(crate) fn series_prefix(t: &Triple, len: usize) -> Result<Vec<i64>> {
    let [p, q, r] = t.elements();
    let mut c = vec![0i64; len];
    if len == 0 {
        return Ok(c);
    }
    // the numerator has at most 16 terms; place them directly
    for (mask, sign) in (0..16u32).map(|m| (m, if m.count_ones() % 2 == 0 { 1 } else { -1 })) {
        let e: i64 = [p * q * r, p, q, r]
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &a)| a)
            .sum();
        if (e as usize) < len {
            c[e as usize] += sign;
        }
    }
    for b in [1, p * q, q * r, r * p] {
        divide_one_minus(&mut c, b as usize)?;
    }
    Ok(c)
}

/// `c <- c / (1 - z^b)`, i.e. `c[i] += c[i-b]` in ascending order.
fn divide_one_minus(c: &mut [i64], b: usize) -> Result<()> {
    let len = c.len();
    if b >= len {
        return Ok(());
    }
    if b == 1 {
        let mut acc = 0i64;
        for (i, v) in c.iter_mut().enumerate() {
            acc = acc.checked_add(*v).ok_or(Error::OverflowDetected { index: i })?;
            *v = acc;
        }
        return Ok(());
    }
    if b < 64 {
        for i in b..len {
            let (v, o) = c[i].overflowing_add(c[i - b]);
            if o {
                return Err(Error::OverflowDetected { index: i });
            }
            c[i] = v;
        }
        return Ok(());
    }
    // blocks of length b depend only on the block before them
    let mut start = b;
    while start < len {
        let end = (start + b).min(len);
        let (lo, hi) = c.split_at_mut(start);
        let mut overflow = false;
        for (dst, src) in hi[..end - start].iter_mut().zip(&lo[start - b..end - b]) {
            let (v, o) = dst.overflowing_add(*src);
            *dst = v;
            overflow |= o;
        }
        if overflow {
            return Err(Error::OverflowDetected { index: start });
        }
        start = end;
    }
    Ok(())
}

/// Indicator-window engine: `a_m` as a signed sum of four window counts.
pub fn coeffs_chi(t: &Triple, cap: DegreeCap) -> Result<CoefficientVector> {
    if !t.is_ternary() {
        return Err(Error::InvalidTriple {
            p: t.p(),
            q: t.q(),
            r: t.r(),
            reason: "indicator engine needs all elements >= 3".into(),
        });
    }
    let deg = degree(t);
    cap.check(deg)?;
    let len = deg as usize + 1;
    let (w, b, c) = window_roles(t);
    let ctx = TripleContext::new(*t);
    let bits = ctx.chi_run(len);
    // prefix[i] = sum of chi over [0, i)
    let mut prefix = Vec::with_capacity(len + 1);
    let mut acc = 0i64;
    prefix.push(0);
    for &bit in &bits {
        acc += bit as i64;
        prefix.push(acc);
    }
    let count_upto = |x: i64| -> i64 {
        if x < 0 {
            0
        } else {
            prefix[(x + 1) as usize]
        }
    };
    let window = |x: i64| count_upto(x) - count_upto(x - w);
    let coeffs = (0..len as i64)
        .map(|m| window(m) - window(m - b) - window(m - c) + window(m - b - c))
        .collect();
    Ok(CoefficientVector {
        triple: *t,
        degree: deg,
        engine: Engine::Chi,
        coeffs,
    })
}

/// `(window, shift1, shift2)` with the smallest element as the window.
fn window_roles(t: &Triple) -> (i64, i64, i64) {
    let s = t.sorted();
    (s.p(), s.q(), s.r())
}

/// Single coefficient from four window sums of length `min(p,q,r)`.
///
/// Defined for `-pqr < m < pqr`; the sums vanish outside `[0, degree]`.
pub fn coefficient_at(t: &Triple, m: i64) -> Result<i64> {
    let smallest = Role::ALL.into_iter().min_by_key(|&role| t.get(role)).unwrap();
    coefficient_at_with_window(t, m, smallest)
}

/// [`coefficient_at`] with an explicit choice of the window element.
pub fn coefficient_at_with_window(t: &Triple, m: i64, window: Role) -> Result<i64> {
    if !t.is_ternary() {
        return Err(Error::InvalidTriple {
            p: t.p(),
            q: t.q(),
            r: t.r(),
            reason: "window formula needs all elements >= 3".into(),
        });
    }
    let pqr = t.product();
    if m <= -pqr || m >= pqr {
        return Err(Error::DomainExceeded { n: m, limit: pqr });
    }
    let (w, b, c) = t.split(window);
    let ctx = TripleContext::new(*t);
    let sigma = |x: i64| ctx.sigma(w, x).expect("argument below pqr");
    Ok(sigma(m) - sigma(m - c) - sigma(m - b) + sigma(m - b - c))
}
