//! Witness extraction for the three universality theorems and the mass identity check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundled;
use crate::error::{Error, Result};
use crate::qform::GramMatrix;
use crate::repenum::{count_table, representations};

fn extraction_error(n: u64, reason: impl Into<String>) -> Error {
    Error::Extraction {
        n,
        reason: reason.into(),
    }
}

fn diag133() -> GramMatrix {
    GramMatrix::diagonal(1, 3, 3).expect("positive diagonal")
}

/// The sign of `v` that is `1 (mod m)`, if either is.
fn signed_to_one(v: i64, m: i64) -> Option<i64> {
    [v, -v].into_iter().find(|s| s.rem_euclid(m) == 1 % m)
}

/// `a^2 + 3b^2 + 3c^2 = 24n + 7` with `a = b = c (mod 4)` and not both
/// `a = b` and `a = c` modulo 8; lexicographically first.
pub fn lemma31_witness(n: u64) -> Result<[i64; 3]> {
    if n == 0 {
        return Err(Error::InvalidArgument("lemma witness needs n >= 1".into()));
    }
    let m = 24 * n + 7;
    representations(&diag133(), m)?
        .vectors
        .into_iter()
        .map(|v| v.0)
        .find(|&v| lemma31_conditions(v))
        .ok_or_else(|| extraction_error(n, format!("no representation of {m} meets the congruences")))
}

pub fn lemma31_conditions([a, b, c]: [i64; 3]) -> bool {
    let m4 = |x: i64| x.rem_euclid(4);
    let m8 = |x: i64| x.rem_euclid(8);
    m4(a) == m4(b) && m4(b) == m4(c) && !(m8(a) == m8(b) && m8(a) == m8(c))
}

/// `3(4x+1)^2 + 3(4y+1)^2 + (12z+1)^2`.
pub fn identity_226([x, y, z]: [i64; 3]) -> i128 {
    let sq = |v: i64| (v as i128) * (v as i128);
    3 * sq(4 * x + 1) + 3 * sq(4 * y + 1) + sq(12 * z + 1)
}

/// `15(4x+1)^2 + 10(6y+1)^2 + 6(10z+1)^2`.
pub fn identity_235([x, y, z]: [i64; 3]) -> i128 {
    let sq = |v: i64| (v as i128) * (v as i128);
    15 * sq(4 * x + 1) + 10 * sq(6 * y + 1) + 6 * sq(10 * z + 1)
}

/// `21(4x+1)^2 + 14(6y+1)^2 + 6(14z+1)^2`.
pub fn identity_237([x, y, z]: [i64; 3]) -> i128 {
    let sq = |v: i64| (v as i128) * (v as i128);
    21 * sq(4 * x + 1) + 14 * sq(6 * y + 1) + 6 * sq(14 * z + 1)
}

/// `(x, y, z)` with `3(4x+1)^2 + 3(4y+1)^2 + (12z+1)^2 = 24n + 7`.
pub fn theorem_226_extract(n: u64) -> Result<[i64; 3]> {
    if n == 0 {
        return Ok([0, 0, 0]);
    }
    let w = lemma31_witness(n)?;
    let mut v = w.map(|x| signed_to_one(x, 4).expect("witness coordinates are odd"));
    if v[0].rem_euclid(3) == 2 {
        let a = v[0];
        let slot = if a.rem_euclid(8) != v[1].rem_euclid(8) { 1 } else { 2 };
        let s = v[slot];
        v[0] = (a - 3 * s) / 2;
        v[slot] = (a + s) / 2;
        v = v.map(|x| signed_to_one(x, 4).unwrap_or(x));
    }
    let [a, b, c] = v;
    if a.rem_euclid(12) != 1 || b.rem_euclid(4) != 1 || c.rem_euclid(4) != 1 {
        return Err(extraction_error(
            n,
            format!("witness {w:?} normalized to {v:?}, which misses the 1 mod 12 / 1 mod 4 targets"),
        ));
    }
    let out = [(b - 1) / 4, (c - 1) / 4, (a - 1) / 12];
    if identity_226(out) != (24 * n + 7) as i128 {
        return Err(extraction_error(n, format!("{out:?} does not substitute back")));
    }
    Ok(out)
}

/// `(x, y, z)` with `15(4x+1)^2 + 10(6y+1)^2 + 6(10z+1)^2 = 120n + 31`.
pub fn theorem_235_extract(n: u64) -> Result<[i64; 3]> {
    let m = 120 * n + 31;
    let reps = representations(&bundled::f_235(), m)?;
    let [a, b, c] = reps
        .vectors
        .first()
        .ok_or_else(|| extraction_error(n, format!("{m} is not represented")))?
        .0;
    let u = 2 * b + c;
    let congruences = a.rem_euclid(2) == 1
        && u.rem_euclid(2) == 1
        && c.rem_euclid(2) == 1
        && u.rem_euclid(3) != 0
        && matches!(a.rem_euclid(5), 1 | 4);
    let signs = (signed_to_one(a, 10), signed_to_one(u, 6), signed_to_one(c, 4));
    let (true, (Some(sa), Some(su), Some(sc))) = (congruences, signs) else {
        return Err(extraction_error(n, format!("representation ({a},{b},{c}) violates the congruences")));
    };
    let out = [(sc - 1) / 4, (su - 1) / 6, (sa - 1) / 10];
    if identity_235(out) != m as i128 {
        return Err(extraction_error(n, format!("{out:?} does not substitute back")));
    }
    Ok(out)
}

/// `(x, y, z)` with `21(4x+1)^2 + 14(6y+1)^2 + 6(14z+1)^2 = 168n + 41`.
pub fn theorem_237_extract(n: u64) -> Result<[i64; 3]> {
    let m = 168 * n + 41;
    let reps = representations(&bundled::f_237(), m)?;
    let [a, b, c] = reps
        .vectors
        .first()
        .ok_or_else(|| extraction_error(n, format!("{m} is not represented")))?
        .0;
    let congruences = [a, b, c].iter().all(|x| x.rem_euclid(2) == 1)
        && b.rem_euclid(3) != 0
        && matches!(a.rem_euclid(7), 1 | 6);
    let signs = (signed_to_one(a, 14), signed_to_one(b, 6), signed_to_one(c, 4));
    let (true, (Some(sa), Some(sb), Some(sc))) = (congruences, signs) else {
        return Err(extraction_error(n, format!("representation ({a},{b},{c}) violates the congruences")));
    };
    let out = [(sc - 1) / 4, (sb - 1) / 6, (sa - 1) / 14];
    if identity_237(out) != m as i128 {
        return Err(extraction_error(n, format!("{out:?} does not substitute back")));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pipeline {
    T226,
    T235,
    T237,
}

impl Pipeline {
    pub fn extract(self, n: u64) -> Result<[i64; 3]> {
        match self {
            Pipeline::T226 => theorem_226_extract(n),
            Pipeline::T235 => theorem_235_extract(n),
            Pipeline::T237 => theorem_237_extract(n),
        }
    }

    /// The weighted-square identity evaluated at an extracted triple.
    pub fn identity(self, v: [i64; 3]) -> i128 {
        match self {
            Pipeline::T226 => identity_226(v),
            Pipeline::T235 => identity_235(v),
            Pipeline::T237 => identity_237(v),
        }
    }

    /// `Psi(n)` for the triple, divided by 4 in the `(2,2,6)` case.
    pub fn target(self, n: u64) -> u64 {
        match self {
            Pipeline::T226 => 24 * n + 7,
            Pipeline::T235 => 120 * n + 31,
            Pipeline::T237 => 168 * n + 41,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionSweep {
    pub pipeline: Pipeline,
    pub max_n: u64,
    pub checked: u64,
    /// First `n` whose extraction failed, with the error text.
    pub failure: Option<(u64, String)>,
    pub sample: Vec<(u64, [i64; 3])>,
}

impl ExtractionSweep {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Extracts and substitutes back for every `n <= max_n`.
pub fn extraction_sweep(pipeline: Pipeline, max_n: u64) -> ExtractionSweep {
    let results: Vec<Result<[i64; 3]>> = (0..=max_n)
        .into_par_iter()
        .map(|n| {
            let v = pipeline.extract(n)?;
            if pipeline.identity(v) == pipeline.target(n) as i128 {
                Ok(v)
            } else {
                Err(extraction_error(n, "substitution mismatch"))
            }
        })
        .collect();
    let failure = results
        .iter()
        .enumerate()
        .find_map(|(n, r)| r.as_ref().err().map(|e| (n as u64, e.to_string())));
    let sample = [0, 1, max_n / 2, max_n]
        .into_iter()
        .filter_map(|n| results[n as usize].as_ref().ok().map(|v| (n, *v)))
        .fold(Vec::new(), |mut acc, x| {
            if !acc.contains(&x) {
                acc.push(x);
            }
            acc
        });
    ExtractionSweep {
        pipeline,
        max_n,
        checked: results.len() as u64,
        failure,
        sample,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassIdentityReport {
    pub bound: u64,
    pub checked: u64,
    /// `(m, r(m,f) - r(m,g), r(m,M2) + 2 r(m,M3))` at the first mismatch.
    pub mismatch: Option<(u64, i64, i64)>,
    /// First `m = 24n + 7` with `n >= 1` and a zero right-hand side.
    pub positivity_failure: Option<u64>,
}

impl MassIdentityReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none() && self.positivity_failure.is_none()
    }
}

/// `r(m,f) - r(m,g) = r(m,M2) + 2 r(m,M3)` for `m = 24n + 7 <= bound`.
pub fn mass_identity_check(bound: u64) -> Result<MassIdentityReport> {
    let tables = [
        bundled::f_lemma(),
        bundled::g_lemma(),
        bundled::m2_lemma(),
        bundled::m3_lemma(),
    ]
    .par_iter()
    .map(|f| count_table(f, bound))
    .collect::<Result<Vec<_>>>()?;
    let r = |i: usize, m: u64| tables[i][m as usize] as i64;
    let mut report = MassIdentityReport {
        bound,
        checked: 0,
        mismatch: None,
        positivity_failure: None,
    };
    for m in (7..=bound).step_by(24) {
        report.checked += 1;
        let lhs = r(0, m) - r(1, m);
        let rhs = r(2, m) + 2 * r(3, m);
        if lhs != rhs && report.mismatch.is_none() {
            report.mismatch = Some((m, lhs, rhs));
        }
        if m > 7 && rhs <= 0 && report.positivity_failure.is_none() {
            report.positivity_failure = Some(m);
        }
    }
    Ok(report)
}
