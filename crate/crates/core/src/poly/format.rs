//! Versioned on-disk forms of a [`CoefficientVector`].
//!
//! CSV:
//!
//! ```text
//! # iep-coeffs v1 p=3 q=5 r=7 degree=48 engine=series
//! index,coefficient
//! 0,1
//! ...
//! ```
//!
//! Binary (all fields little-endian): magic `IEPC`, `u16` version, `u8`
//! engine id, `u8` reserved, `i64` p, q, r, `u64` degree, `u64` count, then
//! `count` × `i64` coefficients.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::{degree, CoefficientVector, Engine};
use crate::error::{Error, Result};
use crate::repr::Triple;

pub const FORMAT_VERSION: u16 = 1;
const MAGIC: [u8; 4] = *b"IEPC";

fn malformed(msg: impl Into<String>) -> Error {
    Error::Persistence(format!("malformed coefficient record: {}", msg.into()))
}

pub fn write_csv<W: Write>(v: &CoefficientVector, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# iep-coeffs v{FORMAT_VERSION} p={} q={} r={} degree={} engine={}",
        v.triple.p(),
        v.triple.q(),
        v.triple.r(),
        v.degree,
        v.engine.name()
    )?;
    writeln!(out, "index,coefficient")?;
    for (i, c) in v.coeffs.iter().enumerate() {
        writeln!(out, "{i},{c}")?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<CoefficientVector> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| malformed("empty input"))??;
    let mut fields = header
        .strip_prefix("# iep-coeffs ")
        .ok_or_else(|| malformed("missing header"))?
        .split_whitespace();
    if fields.next() != Some(&format!("v{FORMAT_VERSION}")) {
        return Err(malformed("unsupported version"));
    }
    let mut get = |key: &str| -> Result<String> {
        let field = fields.next().ok_or_else(|| malformed(format!("missing {key}")))?;
        field
            .strip_prefix(&format!("{key}="))
            .map(str::to_string)
            .ok_or_else(|| malformed(format!("expected {key}=")))
    };
    let num = |s: String| s.parse::<i64>().map_err(|_| malformed(format!("bad number {s}")));
    let (p, q, r) = (num(get("p")?)?, num(get("q")?)?, num(get("r")?)?);
    let deg = num(get("degree")?)? as u64;
    let engine: Engine = get("engine")?.parse()?;
    if lines.next().transpose()?.as_deref() != Some("index,coefficient") {
        return Err(malformed("missing column header"));
    }
    let mut coeffs = Vec::new();
    for (expected, line) in lines.enumerate() {
        let line = line?;
        let (i, c) = line.split_once(',').ok_or_else(|| malformed(line.clone()))?;
        if num(i.to_string())? != expected as i64 {
            return Err(malformed(format!("index {i} out of order")));
        }
        coeffs.push(num(c.to_string())?);
    }
    finish(p, q, r, deg, engine, coeffs)
}

pub fn write_binary<W: Write>(v: &CoefficientVector, mut out: W) -> Result<()> {
    out.write_all(&MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&[v.engine.id(), 0])?;
    for e in v.triple.elements() {
        out.write_all(&e.to_le_bytes())?;
    }
    out.write_all(&v.degree.to_le_bytes())?;
    out.write_all(&(v.coeffs.len() as u64).to_le_bytes())?;
    for c in &v.coeffs {
        out.write_all(&c.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<CoefficientVector> {
    let mut head = [0u8; 4 + 2 + 2 + 3 * 8 + 8 + 8];
    input.read_exact(&mut head)?;
    if head[..4] != MAGIC {
        return Err(malformed("bad magic"));
    }
    if u16::from_le_bytes([head[4], head[5]]) != FORMAT_VERSION {
        return Err(malformed("unsupported version"));
    }
    let engine = Engine::from_id(head[6]).ok_or_else(|| malformed("unknown engine id"))?;
    let word = |i: usize| <[u8; 8]>::try_from(&head[8 + 8 * i..16 + 8 * i]).unwrap();
    let (p, q, r) = (
        i64::from_le_bytes(word(0)),
        i64::from_le_bytes(word(1)),
        i64::from_le_bytes(word(2)),
    );
    let deg = u64::from_le_bytes(word(3));
    let count = u64::from_le_bytes(word(4));
    if count != deg + 1 {
        return Err(malformed("count does not match degree"));
    }
    let mut raw = vec![0u8; count as usize * 8];
    input.read_exact(&mut raw)?;
    let coeffs = raw
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    finish(p, q, r, deg, engine, coeffs)
}

/// JSON form used by the command line (`{"version":1,"p":..,"coeffs":[..]}`).
#[derive(Debug, Serialize, Deserialize)]
pub struct CoefficientJson {
    pub version: u16,
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub degree: u64,
    pub engine: Engine,
    pub coeffs: Vec<i64>,
}

impl From<&CoefficientVector> for CoefficientJson {
    fn from(v: &CoefficientVector) -> Self {
        CoefficientJson {
            version: FORMAT_VERSION,
            p: v.triple.p(),
            q: v.triple.q(),
            r: v.triple.r(),
            degree: v.degree,
            engine: v.engine,
            coeffs: v.coeffs.clone(),
        }
    }
}

impl TryFrom<CoefficientJson> for CoefficientVector {
    type Error = Error;
    fn try_from(j: CoefficientJson) -> Result<Self> {
        if j.version != FORMAT_VERSION {
            return Err(malformed("unsupported version"));
        }
        finish(j.p, j.q, j.r, j.degree, j.engine, j.coeffs)
    }
}

fn finish(p: i64, q: i64, r: i64, deg: u64, engine: Engine, coeffs: Vec<i64>) -> Result<CoefficientVector> {
    let triple = Triple::new(p, q, r)?;
    if deg != degree(&triple) || coeffs.len() as u64 != deg + 1 {
        return Err(malformed("degree inconsistent with triple or coefficient count"));
    }
    Ok(CoefficientVector {
        triple,
        degree: deg,
        engine,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{coeffs_chi, coeffs_series, DegreeCap, Mode};
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let v = coeffs_series(&Triple::new(3, 5, 7).unwrap(), Mode::Full, DegreeCap::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&v, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("# iep-coeffs v1 p=3 q=5 r=7 degree=48 engine=series")
        );
        assert_eq!(lines.next(), Some("index,coefficient"));
        assert_eq!(lines.next(), Some("0,1"));
        assert_eq!(text.lines().count(), 2 + 49);
    }

    #[test]
    fn binary_layout() {
        let v = coeffs_chi(&Triple::new(3, 4, 5).unwrap(), DegreeCap::default()).unwrap();
        let mut buf = Vec::new();
        write_binary(&v, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"IEPC");
        assert_eq!(buf[6], 1);
        assert_eq!(buf.len(), 48 + 8 * v.coeffs.len());
        assert_eq!(i64::from_le_bytes(buf[48..56].try_into().unwrap()), 1);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(read_binary(&b"XXXX"[..]).is_err());
        assert!(read_csv(&b"# iep-coeffs v2 p=3 q=5 r=7 degree=48 engine=series\n"[..]).is_err());
        assert!(
            read_csv(&b"# iep-coeffs v1 p=3 q=5 r=7 degree=47 engine=series\nindex,coefficient\n0,1\n"[..]).is_err()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn formats_round_trip(
            tr in (3i64..20, 3i64..20, 1i64..30)
                .prop_filter_map("valid", |(p, q, r)| Triple::new(p, q, r).ok())
        ) {
            let v = coeffs_series(&tr, Mode::Full, DegreeCap::default()).unwrap();
            let mut csv = Vec::new();
            write_csv(&v, &mut csv).unwrap();
            prop_assert_eq!(&read_csv(&csv[..]).unwrap(), &v);
            let mut bin = Vec::new();
            write_binary(&v, &mut bin).unwrap();
            prop_assert_eq!(&read_binary(&bin[..]).unwrap(), &v);
            let json = serde_json::to_string(&CoefficientJson::from(&v)).unwrap();
            let back: CoefficientJson = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(&CoefficientVector::try_from(back).unwrap(), &v);
        }
    }
}
