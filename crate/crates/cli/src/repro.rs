//! Reference values reproduced by `iep repro-paper`.
//!
//! These are the only expected values hard-coded anywhere in the workspace;
//! everything else is computed.

use iep_core::theorems::bounded_m;
use iep_core::{height, DegreeCap, Result, Triple};

/// What a row asserts about the computed value.
#[derive(Debug, Clone, Copy)]
pub enum Expect {
    Height(i64),
    Flat,
    /// `M̂(s; p_max)` and one pair attaining it.
    BoundedM {
        value: i64,
        pair: (i64, i64),
    },
}

#[derive(Debug, Clone, Copy)]
pub struct Reference {
    pub label: &'static str,
    pub elements: [i64; 3],
    pub expect: Expect,
    /// Where the value comes from.
    pub note: &'static str,
}

pub const REFERENCES: &[Reference] = &[
    Reference {
        label: "A(5,7,3)",
        elements: [5, 7, 3],
        expect: Expect::Height(2),
        note: "height with a small third element, s = 3",
    },
    Reference {
        label: "A(11,13,4)",
        elements: [11, 13, 4],
        expect: Expect::Height(3),
        note: "height with s = 4, equal to s - 1",
    },
    Reference {
        label: "A(3,5,17)",
        elements: [3, 5, 17],
        expect: Expect::Height(2),
        note: "r = pq + 2 attains the upper value A(3,5,2) + 1",
    },
    Reference {
        label: "A(7,16,115)",
        elements: [7, 16, 115],
        expect: Expect::Height(3),
        note: "r = pq + 3 solves A(p,q,pq+s) = s",
    },
    Reference {
        label: "A(7,11,5)",
        elements: [7, 11, 5],
        expect: Expect::Height(3),
        note: "largest height with s = 5",
    },
    Reference {
        label: "A(13,43,564)",
        elements: [13, 43, 564],
        expect: Expect::Height(4),
        note: "r = pq + 5 exceeds the s = 5 maximum by one",
    },
    Reference {
        label: "flat {3,5,16}",
        elements: [3, 5, 16],
        expect: Expect::Flat,
        note: "r = pq + 1 gives a flat polynomial",
    },
    Reference {
        label: "flat {3,5,14}",
        elements: [3, 5, 14],
        expect: Expect::Flat,
        note: "r = pq - 1 gives a flat polynomial",
    },
    Reference {
        label: "flat {7,11,78}",
        elements: [7, 11, 78],
        expect: Expect::Flat,
        note: "r = pq + 1 gives a flat polynomial",
    },
    Reference {
        label: "A(3,5,1)",
        elements: [3, 5, 1],
        expect: Expect::Height(0),
        note: "convention A = s - 1 for s = 1",
    },
    Reference {
        label: "M(5) over p,q <= 15",
        elements: [0, 15, 5],
        expect: Expect::BoundedM {
            value: 3,
            pair: (7, 11),
        },
        note: "bounded maximum of A(p,q,5), attained at (7,11)",
    },
];

/// One evaluated row.
#[derive(Debug, Clone)]
pub struct Row {
    pub reference: Reference,
    pub expected: String,
    pub computed: String,
    pub passed: bool,
}

pub fn evaluate(r: &Reference, cap: DegreeCap) -> Result<Row> {
    let [a, b, c] = r.elements;
    let (expected, computed, passed) = match r.expect {
        Expect::Height(h) => {
            let got = height(&Triple::new(a, b, c)?, cap)?.height;
            (h.to_string(), got.to_string(), got == h)
        }
        Expect::Flat => {
            let rec = height(&Triple::new(a, b, c)?, cap)?;
            let got = format!("[{}, {}]", rec.a_minus, rec.a_plus);
            ("flat".to_string(), got, rec.flat)
        }
        Expect::BoundedM { value, pair } => {
            let m = bounded_m(c, b, cap)?;
            let got = format!("{} at {:?}", m.value, m.attaining);
            (
                format!("{value} at ({}, {})", pair.0, pair.1),
                got,
                m.value == value && m.attaining.contains(&pair),
            )
        }
    };
    Ok(Row {
        reference: *r,
        expected,
        computed,
        passed,
    })
}
