//! Universality of `x(ax+1) + y(by+1) + z(cz+1)` and of sums of triangular numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmap::Bitmap;
use crate::error::{overflow, Error, Result};
use crate::repenum::{congruent_representation_exists, isqrt_u64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    a: u64,
    b: u64,
    c: u64,
}

impl Triple {
    pub fn new(a: u64, b: u64, c: u64) -> Result<Self> {
        if a == 0 || a > b || b > c {
            return Err(Error::InvalidArgument(format!(
                "triple ({a},{b},{c}) must satisfy 0 < a <= b <= c"
            )));
        }
        if c > 1 << 20 {
            return Err(overflow("triple", (a, b, c)));
        }
        Ok(Triple { a, b, c })
    }

    pub fn a(&self) -> u64 {
        self.a
    }
    pub fn b(&self) -> u64 {
        self.b
    }
    pub fn c(&self) -> u64 {
        self.c
    }
    pub fn coefficients(&self) -> [u64; 3] {
        [self.a, self.b, self.c]
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

pub fn triangular(n: u64) -> Result<u64> {
    n.checked_add(1)
        .and_then(|m| m.checked_mul(n))
        .map(|p| p / 2)
        .ok_or_else(|| overflow("triangular", n))
}

fn term(a: u64, x: i64) -> i128 {
    let x = x as i128;
    x * (a as i128 * x + 1)
}

pub fn phi_value(t: &Triple, x: i64, y: i64, z: i64) -> i128 {
    term(t.a, x) + term(t.b, y) + term(t.c, z)
}

/// Largest `|x|` with `x(ax+1) <= n`, with a little slack.
fn term_bound(a: u64, n: u64) -> i64 {
    let s = isqrt_u64(4 * a * n + 1);
    ((s + 2) / (2 * a) + 1) as i64
}

/// The scan box `[-B_a, B_a] x [-B_b, B_b] x [-B_c, B_c]` used for `n`.
pub fn phi_search_box(t: &Triple, n: u64) -> [i64; 3] {
    t.coefficients().map(|a| term_bound(a, n))
}

/// Lexicographically first `(x, y, z)` with `phi(x, y, z) = n`.
pub fn phi_witness(t: &Triple, n: u64) -> Option<[i64; 3]> {
    let [bx, by, _] = phi_search_box(t, n);
    let c = t.c as i128;
    for x in -bx..=bx {
        let rx = n as i128 - term(t.a, x);
        if rx < 0 {
            continue;
        }
        for y in -by..=by {
            let r = rx - term(t.b, y);
            if r < 0 {
                continue;
            }
            // c z^2 + z = r
            let disc = 1 + 4 * c * r;
            let s = isqrt_u64(disc as u64) as i128;
            if s * s != disc {
                continue;
            }
            for num in [-1 - s, -1 + s] {
                if num % (2 * c) == 0 {
                    return Some([x, y, (num / (2 * c)) as i64]);
                }
            }
        }
    }
    None
}

/// `{x(ax+1) : x in Z} ∩ [0, n]`; every value is non-negative.
fn term_values(a: u64, n: u64) -> Bitmap {
    let mut out = Bitmap::new(n + 1);
    let b = term_bound(a, n);
    for x in -b..=b {
        let v = term(a, x);
        if v <= n as i128 {
            out.set(v as u64);
        }
    }
    out
}

fn triangular_multiples(a: u64, n: u64) -> Bitmap {
    let mut out = Bitmap::new(n + 1);
    let mut x = 0;
    loop {
        let v = a * (x * (x + 1) / 2);
        if v > n {
            break out;
        }
        out.set(v);
        x += 1;
    }
}

/// `{u + v <= n : u in A, v in B}`.
fn sumset(a: &Bitmap, b: &Bitmap) -> Bitmap {
    let len = a.len();
    let mut out = Bitmap::new(len);
    for shift in b.iter_ones() {
        out.or_shifted(a, shift);
    }
    out
}

fn first_gap(bits: &Bitmap) -> Option<u64> {
    (0..bits.len()).find(|&i| !bits.get(i))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UniversalityOutcome {
    /// Every `n <= bound` is represented; `sample` holds witnesses for a few `n`.
    UniversalUpTo {
        bound: u64,
        sample: Vec<(u64, [i64; 3])>,
    },
    /// No solution exists for `n` anywhere in `scanned_box`, outside of which
    /// every term exceeds `n`.
    FailsAt { n: u64, scanned_box: [i64; 3] },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalityReport {
    pub triple: Triple,
    pub bound: u64,
    pub outcome: UniversalityOutcome,
}

impl UniversalityReport {
    pub fn is_universal(&self) -> bool {
        matches!(self.outcome, UniversalityOutcome::UniversalUpTo { .. })
    }
}

fn witness_sample(bound: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..=bound.min(9)).collect();
    let mut m = 100;
    while m <= bound {
        out.push(m);
        m *= 10;
    }
    if !out.contains(&bound) {
        out.push(bound);
    }
    out
}

pub fn check_universal(t: &Triple, bound: u64) -> UniversalityReport {
    let ab = sumset(&term_values(t.a, bound), &term_values(t.b, bound));
    let all = sumset(&ab, &term_values(t.c, bound));
    let outcome = match first_gap(&all) {
        Some(n) => {
            assert!(phi_witness(t, n).is_none(), "sumset and box scan disagree at {n}");
            UniversalityOutcome::FailsAt {
                n,
                scanned_box: phi_search_box(t, n),
            }
        }
        None => UniversalityOutcome::UniversalUpTo {
            bound,
            sample: witness_sample(bound)
                .into_par_iter()
                .map(|n| (n, phi_witness(t, n).expect("sumset says represented")))
                .collect(),
        },
    };
    UniversalityReport {
        triple: *t,
        bound,
        outcome,
    }
}

/// `4abcn + bc + ac + ab`.
pub fn psi_value(t: &Triple, n: u64) -> Result<u64> {
    let [a, b, c] = t.coefficients();
    4u64.checked_mul(a * b * c)
        .and_then(|k| k.checked_mul(n))
        .and_then(|k| k.checked_add(b * c + a * c + a * b))
        .ok_or_else(|| overflow("psi", (t.coefficients(), n)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub triple: Triple,
    pub bound: u64,
    pub counterexample: Option<u64>,
}

impl CrosscheckReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// For each `n <= bound`, compares solvability of `phi = n` with the congruent
/// representation of `psi(n)` by `bc X^2 + ac Y^2 + ab Z^2`.
pub fn phi_psi_crosscheck(t: &Triple, bound: u64) -> Result<CrosscheckReport> {
    let [a, b, c] = t.coefficients();
    let results = (0..=bound)
        .into_par_iter()
        .map(|n| {
            let psi = psi_value(t, n)?;
            let lhs = phi_witness(t, n).is_some();
            let rhs = congruent_representation_exists([b * c, a * c, a * b], psi, [2 * a, 2 * b, 2 * c])
                .is_some();
            Ok(lhs != rhs)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(CrosscheckReport {
        triple: *t,
        bound,
        counterexample: results.iter().position(|&m| m).map(|i| i as u64),
    })
}

fn triples_up_to(bound_c: u64) -> Vec<Triple> {
    let mut out = Vec::new();
    for a in 1..=bound_c {
        for b in a..=bound_c {
            for c in b..=bound_c {
                out.push(Triple { a, b, c });
            }
        }
    }
    out
}

/// First `m <= n` not of the form `aT_x + bT_y + cT_z`.
pub fn triangular_sum_gap(t: &Triple, n: u64) -> Option<u64> {
    let ab = sumset(&triangular_multiples(t.a, n), &triangular_multiples(t.b, n));
    first_gap(&sumset(&ab, &triangular_multiples(t.c, n)))
}

/// Triples with `a <= b <= c <= bound_c` whose `aT_x + bT_y + cT_z` covers `0..=n`.
pub fn liouville_sieve(bound_c: u64, n: u64) -> Vec<Triple> {
    triples_up_to(bound_c)
        .into_par_iter()
        .filter(|t| triangular_sum_gap(t, n).is_none())
        .collect()
}

/// Triples with `a <= b <= c <= bound_c` passing [`check_universal`] up to `n`.
pub fn sun_sieve(bound_c: u64, n: u64) -> Vec<Triple> {
    triples_up_to(bound_c)
        .into_par_iter()
        .filter(|t| {
            let ab = sumset(&term_values(t.a, n), &term_values(t.b, n));
            first_gap(&sumset(&ab, &term_values(t.c, n))).is_none()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(a: u64, b: u64, c: u64) -> Triple {
        Triple::new(a, b, c).unwrap()
    }

    #[test]
    fn triangular_examples() {
        assert_eq!(triangular(0).unwrap(), 0);
        assert_eq!(triangular(3).unwrap(), 6);
        assert_eq!(triangular(10).unwrap(), 55);
        assert!(triangular(u64::MAX).is_err());
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(Triple::new(2, 1, 3).is_err());
        assert!(Triple::new(0, 1, 1).is_err());
        assert!(Triple::new(1, 1, 1).is_ok());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_value(&t(2, 2, 2), 1, 1, 1), 9);
        assert_eq!(phi_value(&t(2, 3, 5), 0, 0, 0), 0);
        assert_eq!(phi_value(&t(2, 3, 7), -1, -1, -1), 9);
        assert_eq!(phi_witness(&t(2, 2, 6), 0), Some([0, 0, 0]));
        let w = phi_witness(&t(2, 3, 5), 1).unwrap();
        assert_eq!(phi_value(&t(2, 3, 5), w[0], w[1], w[2]), 1);
        assert!((0..=100).any(|n| phi_witness(&t(1, 1, 3), n).is_none()));
    }

    #[test]
    fn witness_is_lexicographically_first() {
        let tr = t(1, 2, 3);
        for n in 0..60u64 {
            let brute = (-10i64..=10)
                .flat_map(|x| (-10i64..=10).flat_map(move |y| (-10i64..=10).map(move |z| [x, y, z])))
                .find(|v| phi_value(&tr, v[0], v[1], v[2]) == n as i128);
            assert_eq!(phi_witness(&tr, n), brute, "n = {n}");
        }
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_value(&t(2, 3, 5), 0).unwrap(), 31);
        assert_eq!(psi_value(&t(2, 3, 5), 1).unwrap(), 151);
        assert_eq!(psi_value(&t(2, 3, 7), 1).unwrap(), 209);
        assert_eq!(psi_value(&t(2, 2, 6), 5).unwrap(), 4 * (24 * 5 + 7));
    }

    #[test]
    fn crosscheck_holds_on_small_bounds() {
        assert!(phi_psi_crosscheck(&t(2, 2, 6), 1000).unwrap().holds());
        assert!(phi_psi_crosscheck(&t(2, 3, 5), 1000).unwrap().holds());
        assert!(phi_psi_crosscheck(&t(1, 1, 3), 100).unwrap().holds());
    }

    #[test]
    fn failing_triple_reports_first_gap() {
        let r = check_universal(&t(2, 2, 7), 1000);
        match r.outcome {
            UniversalityOutcome::FailsAt { n, .. } => {
                assert!(phi_witness(&t(2, 2, 7), n).is_none());
                assert!((0..n).all(|m| phi_witness(&t(2, 2, 7), m).is_some()));
            }
            _ => panic!("(2,2,7) should fail"),
        }
    }

    #[test]
    fn small_sieves() {
        assert_eq!(liouville_sieve(1, 1000), vec![t(1, 1, 1)]);
        assert!(liouville_sieve(6, 1000).iter().all(|x| *x != t(1, 1, 3)));
        let sun = sun_sieve(10, 2000);
        assert!(sun.contains(&t(1, 1, 2)));
        assert!(!sun.contains(&t(2, 2, 7)));
    }

    proptest! {
        #[test]
        fn witnesses_evaluate_to_n(a in 1u64..6, db in 0u64..4, dc in 0u64..4, n in 0u64..400) {
            let tr = t(a, a + db, a + db + dc);
            if let Some([x, y, z]) = phi_witness(&tr, n) {
                prop_assert_eq!(phi_value(&tr, x, y, z), n as i128);
            }
        }

        #[test]
        fn sumset_agrees_with_box_scan(a in 1u64..5, db in 0u64..3, dc in 0u64..3) {
            let tr = t(a, a + db, a + db + dc);
            let n = 150;
            let ab = sumset(&term_values(tr.a, n), &term_values(tr.b, n));
            let all = sumset(&ab, &term_values(tr.c, n));
            for m in 0..=n {
                prop_assert_eq!(all.get(m), phi_witness(&tr, m).is_some());
            }
        }
    }
}
