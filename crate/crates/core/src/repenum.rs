//! Exhaustive enumeration of representations by positive definite ternary forms.
//!
//! Coordinates are bounded by the exact LDL (Schur complement) decomposition of
//! the Gram matrix: the outer coordinate satisfies `x_i^2 <= m (M^-1)_ii`, the
//! middle coordinate is bounded by the binary form left after minimising over
//! the inner one, and the inner coordinate is solved by completing the square.
//! All bounds are computed in integer arithmetic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmap::Bitmap;
use crate::error::{overflow, Error, Result};
use crate::qform::{GramMatrix, IntVector3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProgressionSpec {
    pub modulus: u64,
    pub residue: u64,
}

impl ProgressionSpec {
    pub fn new(modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 || residue >= modulus {
            return Err(Error::InvalidArgument(format!(
                "progression {modulus}n+{residue} needs 0 <= residue < modulus"
            )));
        }
        Ok(ProgressionSpec { modulus, residue })
    }

    pub fn contains(&self, m: u64) -> bool {
        m % self.modulus == self.residue
    }

    /// True iff every element of `self` lies in `other`.
    pub fn is_subprogression_of(&self, other: &ProgressionSpec) -> bool {
        self.modulus.is_multiple_of(other.modulus) && self.residue % other.modulus == other.residue
    }

    /// Elements `<= bound`, ascending.
    pub fn iter_up_to(&self, bound: u64) -> impl Iterator<Item = u64> {
        (self.residue..=bound).step_by(self.modulus as usize)
    }
}

impl std::fmt::Display for ProgressionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}n+{}", self.modulus, self.residue)
    }
}

/// All representations of `target` by `form`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepSet {
    pub target: u64,
    pub form: GramMatrix,
    pub vectors: Vec<IntVector3>,
}

impl RepSet {
    pub fn count(&self) -> usize {
        self.vectors.len()
    }
}

pub(crate) fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub(crate) fn isqrt_u64(n: u64) -> u64 {
    isqrt_u128(n as u128) as u64
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Enumeration order and the integer data of the LDL bounds.
#[derive(Clone, Copy, Debug)]
struct Plan {
    m: [[i128; 3]; 3],
    outer: usize,
    middle: usize,
    inner: usize,
    adj_outer: i128,
    det: i128,
}

impl Plan {
    fn new(form: &GramMatrix) -> Plan {
        let m = form.entries().map(|r| r.map(|x| x as i128));
        let det = form.det();
        let adj = form.matrix().adjugate();
        // Largest last pivot det/adj_ii gives the smallest outer range.
        let outer = (0..3).min_by_key(|&i| (adj[i][i], i)).unwrap();
        let (a, b) = match outer {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        // The middle range scales with sqrt(M_kk); put the smaller diagonal inside.
        let (middle, inner) = if m[b][b] <= m[a][a] { (a, b) } else { (b, a) };
        Plan {
            m,
            outer,
            middle,
            inner,
            adj_outer: adj[outer][outer],
            det,
        }
    }

    fn outer_bound(&self, bound: u64) -> i64 {
        isqrt_u128(bound as u128 * self.adj_outer as u128 / self.det as u128) as i64
    }

    /// Visits every vector with the given outer coordinate and value `<= bound`
    /// (or `== bound` when `exact`), passing `(vector, value)`.
    fn visit_slice(&self, xi: i64, bound: u64, exact: bool, f: &mut impl FnMut([i64; 3], u64)) {
        let (i, j, k) = (self.outer, self.middle, self.inner);
        let m = &self.m;
        let n = bound as i128;
        let xi = xi as i128;
        let a = m[j][j] * m[k][k] - m[j][k] * m[j][k];
        let b = (m[i][j] * m[k][k] - m[j][k] * m[i][k]) * xi;
        let c = (m[i][i] * m[k][k] - m[i][k] * m[i][k]) * xi * xi - m[k][k] * n;
        let disc = b * b - a * c;
        if disc < 0 {
            return;
        }
        let s = isqrt_u128(disc as u128) as i128;
        let lo = floor_div(-b - s - 1, a);
        let hi = floor_div(-b + s + 1, a) + 1;
        let mkk = m[k][k];
        for xj in lo..=hi {
            let lin = m[i][k] * xi + m[j][k] * xj;
            let base = m[i][i] * xi * xi + 2 * m[i][j] * xi * xj + m[j][j] * xj * xj;
            // mkk t^2 + 2 lin t + base <= n
            let disc2 = lin * lin - mkk * (base - n);
            if disc2 < 0 {
                continue;
            }
            let s2 = isqrt_u128(disc2 as u128) as i128;
            let mut emit = |xk: i128| {
                let mut v = [0i64; 3];
                v[i] = xi as i64;
                v[j] = xj as i64;
                v[k] = xk as i64;
                let value = mkk * xk * xk + 2 * lin * xk + base;
                f(v, value as u64);
            };
            if exact {
                if s2 * s2 != disc2 {
                    continue;
                }
                for num in [-lin - s2, -lin + s2] {
                    if num % mkk == 0 {
                        emit(num / mkk);
                    }
                    if s2 == 0 {
                        break;
                    }
                }
            } else {
                let lo_k = floor_div(-lin - s2 - 1, mkk);
                let hi_k = floor_div(-lin + s2 + 1, mkk) + 1;
                for xk in lo_k..=hi_k {
                    let value = mkk * xk * xk + 2 * lin * xk + base;
                    if value <= n {
                        emit(xk);
                    }
                }
            }
        }
    }
}

fn guard(form: &GramMatrix, bound: u64) -> Result<()> {
    // Intermediate products stay far inside i128 for these magnitudes.
    let max_entry = form
        .entries()
        .iter()
        .flatten()
        .map(|x| x.unsigned_abs())
        .max()
        .unwrap_or(0);
    if bound > 1 << 62 || max_entry > 1 << 30 {
        return Err(overflow("representation enumeration", (form.entries(), bound)));
    }
    Ok(())
}

/// `R(m, f)`: every integer vector with `f(v) = m`.
pub fn representations(form: &GramMatrix, m: u64) -> Result<RepSet> {
    guard(form, m)?;
    let plan = Plan::new(form);
    let r = plan.outer_bound(m);
    let mut vectors = Vec::new();
    for xi in -r..=r {
        plan.visit_slice(xi, m, true, &mut |v, _| vectors.push(IntVector3(v)));
    }
    vectors.sort_unstable();
    vectors.dedup();
    Ok(RepSet {
        target: m,
        form: *form,
        vectors,
    })
}

/// `r(m, f)`.
pub fn count(form: &GramMatrix, m: u64) -> Result<usize> {
    Ok(representations(form, m)?.count())
}

/// Visits every vector with value `<= bound` (order unspecified).
pub fn for_each_vector_up_to(
    form: &GramMatrix,
    bound: u64,
    mut f: impl FnMut(IntVector3, u64),
) -> Result<()> {
    guard(form, bound)?;
    let plan = Plan::new(form);
    let r = plan.outer_bound(bound);
    for xi in -r..=r {
        plan.visit_slice(xi, bound, false, &mut |v, val| f(IntVector3(v), val));
    }
    Ok(())
}

/// Bitmap over `0..=bound` of the values represented by `form`, by a single sweep.
pub fn represented_bitmap(form: &GramMatrix, bound: u64) -> Result<Bitmap> {
    guard(form, bound)?;
    let plan = Plan::new(form);
    let r = plan.outer_bound(bound);
    let len = bound + 1;
    let bitmap = (-r..=r)
        .into_par_iter()
        .fold(
            || Bitmap::new(len),
            |mut acc, xi| {
                plan.visit_slice(xi, bound, false, &mut |_, val| acc.set(val));
                acc
            },
        )
        .reduce(
            || Bitmap::new(len),
            |mut a, b| {
                a.union_with(&b);
                a
            },
        );
    Ok(bitmap)
}

/// Representation counts `r(m, f)` for every `m <= bound`, by a single sweep.
pub fn count_table(form: &GramMatrix, bound: u64) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; bound as usize + 1];
    for_each_vector_up_to(form, bound, |_, val| counts[val as usize] += 1)?;
    Ok(counts)
}

/// `Q(f)` restricted to `0..=bound` and optionally to a progression, ascending.
pub fn represented_set(
    form: &GramMatrix,
    bound: u64,
    filter: Option<ProgressionSpec>,
) -> Result<Vec<u64>> {
    let bitmap = represented_bitmap(form, bound)?;
    Ok(bitmap
        .iter_ones()
        .filter(|&m| filter.is_none_or(|p| p.contains(m)))
        .collect())
}

/// Smallest integer `>= lo` congruent to 1 modulo `m`.
fn first_one_mod(lo: i64, m: i64) -> i64 {
    lo + (1 - lo).rem_euclid(m)
}

/// Lexicographically first `(X, Y, Z)` with `w1 X^2 + w2 Y^2 + w3 Z^2 = target`
/// and each coordinate congruent to 1 modulo its modulus.
pub fn congruent_representation_exists(
    weights: [u64; 3],
    target: u64,
    moduli: [u64; 3],
) -> Option<IntVector3> {
    let [w1, w2, w3] = weights.map(|w| w as i128);
    let [m1, m2, m3] = moduli.map(|m| m as i64);
    let t = target as i128;
    let bx = isqrt_u128(target as u128 / w1 as u128) as i64;
    let mut x = first_one_mod(-bx, m1);
    while x <= bx {
        let rx = t - w1 * (x as i128).pow(2);
        if rx >= 0 {
            let by = isqrt_u128(rx as u128 / w2 as u128) as i64;
            let mut y = first_one_mod(-by, m2);
            while y <= by {
                let ry = rx - w2 * (y as i128).pow(2);
                if ry >= 0 && ry % w3 == 0 {
                    let q = (ry / w3) as u128;
                    let s = isqrt_u128(q);
                    if s * s == q {
                        let s = s as i64;
                        for z in [-s, s] {
                            if (z - 1).rem_euclid(m3) == 0 {
                                return Some(IntVector3::new(x, y, z));
                            }
                        }
                    }
                }
                y += m2;
            }
        }
        x += m1;
    }
    None
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Box-scan oracle with the eigenvalue bound `lambda_min >= det / trace^2`.
    pub(crate) fn naive_counts(form: &GramMatrix, bound: u64) -> Vec<Vec<IntVector3>> {
        let e = form.entries();
        let trace = (e[0][0] + e[1][1] + e[2][2]) as u128;
        let r = isqrt_u128(bound as u128 * trace * trace / form.det() as u128) as i64 + 1;
        let mut out = vec![Vec::new(); bound as usize + 1];
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    let v = IntVector3::new(x, y, z);
                    let val = form.evaluate(&v).unwrap();
                    if val <= bound as i64 {
                        out[val as usize].push(v);
                    }
                }
            }
        }
        out
    }

    fn d(a: i64, b: i64, c: i64) -> GramMatrix {
        GramMatrix::diagonal(a, b, c).unwrap()
    }

    #[test]
    fn seven_by_one_three_three() {
        // 7 = 4 + 3 and 7 = 1 + 3 + 3
        let reps = representations(&d(1, 3, 3), 7).unwrap();
        let mut expected = Vec::new();
        for s in [-1, 1] {
            for t in [-1, 1] {
                expected.push(IntVector3::new(2 * s, t, 0));
                expected.push(IntVector3::new(2 * s, 0, t));
                for u in [-1, 1] {
                    expected.push(IntVector3::new(s, t, u));
                }
            }
        }
        expected.sort_unstable();
        assert_eq!(reps.vectors, expected);
        assert_eq!(count(&d(1, 3, 3), 7).unwrap(), 16);
        assert_eq!(naive_counts(&d(1, 3, 3), 7)[7].len(), 16);
    }

    #[test]
    fn zero_has_one_representation() {
        let m = GramMatrix::new([[5, 1, 2], [1, 17, -8], [2, -8, 26]]).unwrap();
        assert_eq!(representations(&m, 0).unwrap().vectors, vec![IntVector3::new(0, 0, 0)]);
        assert_eq!(count(&d(6, 14, 21), 0).unwrap(), 1);
        assert_eq!(represented_set(&m, 0, None).unwrap(), vec![0]);
    }

    #[test]
    fn forty_one_by_six_fourteen_twentyone() {
        let reps = representations(&d(6, 14, 21), 41).unwrap();
        let oracle = &naive_counts(&d(6, 14, 21), 41)[41];
        assert_eq!(reps.count(), oracle.len());
        for sx in [-1, 1] {
            for sy in [-1, 1] {
                for sz in [-1, 1] {
                    assert!(reps.vectors.contains(&IntVector3::new(sx, sy, sz)));
                }
            }
        }
        assert_eq!(reps.count(), 8);
    }

    #[test]
    fn thirty_one_by_one_thirty_onetwenty() {
        assert_eq!(count(&d(1, 30, 120), 31).unwrap(), 4);
    }

    #[test]
    fn represented_set_examples() {
        assert_eq!(
            represented_set(&d(1, 1, 1), 7, None).unwrap(),
            vec![0, 1, 2, 3, 4, 5, 6]
        );
        let p = ProgressionSpec::new(40, 31).unwrap();
        assert_eq!(
            represented_set(&d(1, 30, 120), 151, Some(p)).unwrap(),
            vec![31, 111, 151]
        );
    }

    #[test]
    fn congruent_representation_examples() {
        assert_eq!(
            congruent_representation_exists([3, 3, 1], 7, [4, 4, 12]),
            Some(IntVector3::new(1, 1, 1))
        );
        assert_eq!(
            congruent_representation_exists([15, 10, 6], 31, [4, 6, 10]),
            Some(IntVector3::new(1, 1, 1))
        );
        assert_eq!(
            congruent_representation_exists([21, 14, 6], 41, [4, 6, 14]),
            Some(IntVector3::new(1, 1, 1))
        );
        // 2 = 1 + 1 + 0, and 0 is not 1 mod 4
        assert_eq!(congruent_representation_exists([1, 1, 1], 2, [4, 4, 4]), None);
    }

    #[test]
    fn progression_relations() {
        let fine = ProgressionSpec::new(120, 31).unwrap();
        let coarse = ProgressionSpec::new(40, 31).unwrap();
        assert!(fine.is_subprogression_of(&coarse));
        assert!(!coarse.is_subprogression_of(&fine));
        assert!(!ProgressionSpec::new(60, 31).unwrap().is_subprogression_of(&coarse));
        assert!(ProgressionSpec::new(8, 8).is_err());
        assert_eq!(fine.iter_up_to(300).collect::<Vec<_>>(), vec![31, 151, 271]);
    }

    #[test]
    fn sweep_matches_per_value_counts() {
        let forms = [
            d(1, 30, 120),
            GramMatrix::new([[5, 1, 2], [1, 17, -8], [2, -8, 26]]).unwrap(),
            GramMatrix::new([[6, 0, 0], [0, 25, 5], [0, 5, 25]]).unwrap(),
        ];
        for f in &forms {
            let bitmap = represented_bitmap(f, 2000).unwrap();
            let table = count_table(f, 2000).unwrap();
            for m in 0..=2000u64 {
                assert_eq!(bitmap.get(m), table[m as usize] > 0, "form {f}, m = {m}");
            }
            for m in (0..=2000u64).step_by(37) {
                assert_eq!(count(f, m).unwrap() as u64, table[m as usize]);
            }
        }
    }
}
