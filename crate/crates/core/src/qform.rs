//! Exact arithmetic on integral ternary quadratic forms and their similitudes.
//!
//! Vectors act on matrices as rows: a similitude `T` moves `v` to `(1/d) v T^t`.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{overflow, Error, Result};

/// A 3x3 integer matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mat3(pub [[i64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);

    pub fn scalar(k: i64) -> Mat3 {
        Mat3([[k, 0, 0], [0, k, 0], [0, 0, k]])
    }

    /// Builds a matrix from nine row-major entries.
    pub fn from_row_major(e: [i64; 9]) -> Mat3 {
        Mat3([[e[0], e[1], e[2]], [e[3], e[4], e[5]], [e[6], e[7], e[8]]])
    }

    pub fn row_major(&self) -> [i64; 9] {
        let m = &self.0;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn checked_mul(&self, rhs: &Mat3) -> Result<Mat3> {
        let mut out = [[0i64; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc: i128 = 0;
                for k in 0..3 {
                    acc += self.0[i][k] as i128 * rhs.0[k][j] as i128;
                }
                *cell = i64::try_from(acc).map_err(|_| overflow("matrix product", (self, rhs)))?;
            }
        }
        Ok(Mat3(out))
    }

    pub fn checked_scale(&self, k: i64) -> Result<Mat3> {
        let mut out = self.0;
        for row in out.iter_mut() {
            for cell in row.iter_mut() {
                *cell = cell
                    .checked_mul(k)
                    .ok_or_else(|| overflow("matrix scaling", (self, k)))?;
            }
        }
        Ok(Mat3(out))
    }

    pub fn det(&self) -> i128 {
        let m = self.0.map(|r| r.map(|x| x as i128));
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Classical adjugate, so that `self * adj == det * I`.
    pub fn adjugate(&self) -> [[i128; 3]; 3] {
        let m = self.0.map(|r| r.map(|x| x as i128));
        let mut adj = [[0i128; 3]; 3];
        for (i, row) in adj.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let (r0, r1) = other_two(j);
                let (c0, c1) = other_two(i);
                let minor = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
                *cell = if (i + j) % 2 == 0 { minor } else { -minor };
            }
        }
        adj
    }

    /// Row-vector action `v T^t`, i.e. the column product `T v`.
    pub fn act(&self, v: &IntVector3) -> Result<IntVector3> {
        let mut out = [0i64; 3];
        for (i, cell) in out.iter_mut().enumerate() {
            let acc: i128 = (0..3).map(|j| self.0[i][j] as i128 * v.0[j] as i128).sum();
            *cell = i64::try_from(acc).map_err(|_| overflow("matrix action", (self, v)))?;
        }
        Ok(IntVector3(out))
    }
}

fn other_two(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{},{},{}],[{},{},{}],[{},{},{}]]",
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]
        )
    }
}

/// An integer vector in Z^3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntVector3(pub [i64; 3]);

impl IntVector3 {
    pub fn new(x: i64, y: i64, z: i64) -> Self {
        IntVector3([x, y, z])
    }

    pub fn neg(&self) -> IntVector3 {
        IntVector3(self.0.map(|x| -x))
    }

    pub fn gcd(&self) -> u64 {
        self.0.iter().fold(0u64, |g, &x| gcd_u64(g, x.unsigned_abs()))
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd() == 1
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }
}

impl fmt::Display for IntVector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// True iff all three leading principal minors are strictly positive.
pub fn is_positive_definite(m: &[[i64; 3]; 3]) -> bool {
    let a = m.map(|r| r.map(|x| x as i128));
    let m1 = a[0][0];
    let m2 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    m1 > 0 && m2 > 0 && Mat3(*m).det() > 0
}

/// Gram matrix of a positive definite integral ternary quadratic form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(into = "[i64; 9]")]
pub struct GramMatrix(Mat3);

impl GramMatrix {
    pub fn new(entries: [[i64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::NotSymmetric(entries));
                }
            }
        }
        if !is_positive_definite(&entries) {
            return Err(Error::NotPositiveDefinite(entries));
        }
        Ok(GramMatrix(Mat3(entries)))
    }

    /// The diagonal form `<a1, a2, a3>`.
    pub fn diagonal(a1: i64, a2: i64, a3: i64) -> Result<Self> {
        Self::new([[a1, 0, 0], [0, a2, 0], [0, 0, a3]])
    }

    pub fn from_row_major(e: [i64; 9]) -> Result<Self> {
        Self::new(Mat3::from_row_major(e).0)
    }

    pub fn entries(&self) -> &[[i64; 3]; 3] {
        &self.0 .0
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn det(&self) -> i128 {
        self.0.det()
    }

    /// `v M v^t`, computed exactly.
    pub fn evaluate(&self, v: &IntVector3) -> Result<i64> {
        let m = self.entries();
        let x = v.0.map(|c| c as i128);
        let mut acc: i128 = 0;
        for i in 0..3 {
            for j in 0..3 {
                acc += m[i][j] as i128 * x[i] * x[j];
            }
        }
        i64::try_from(acc).map_err(|_| overflow("form evaluation", (m, v)))
    }

    /// The bilinear pairing `u M w^t`.
    pub fn pair(&self, u: &IntVector3, w: &IntVector3) -> Result<i64> {
        let m = self.entries();
        let mut acc: i128 = 0;
        for i in 0..3 {
            for j in 0..3 {
                acc += m[i][j] as i128 * u.0[i] as i128 * w.0[j] as i128;
            }
        }
        i64::try_from(acc).map_err(|_| overflow("bilinear pairing", (m, u, w)))
    }
}

impl From<GramMatrix> for [i64; 9] {
    fn from(g: GramMatrix) -> Self {
        g.0.row_major()
    }
}

impl<'de> Deserialize<'de> for GramMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = <[i64; 9]>::deserialize(d)?;
        GramMatrix::from_row_major(e).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for GramMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.entries();
        if m[0][1] == 0 && m[0][2] == 0 && m[1][2] == 0 {
            write!(f, "<{},{},{}>", m[0][0], m[1][1], m[2][2])
        } else {
            self.0.fmt(f)
        }
    }
}

pub fn evaluate(m: &GramMatrix, v: &IntVector3) -> Result<i64> {
    m.evaluate(v)
}

/// Exact test of `T^t M_f T == d^2 M_g`.
pub fn similitude_check(t: &Mat3, f: &GramMatrix, g: &GramMatrix, d: i64) -> Result<bool> {
    let lhs = t.transpose().checked_mul(f.matrix())?.checked_mul(t)?;
    let d2 = d.checked_mul(d).ok_or_else(|| overflow("scale squared", d))?;
    let rhs = g.matrix().checked_scale(d2)?;
    Ok(lhs == rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderClass {
    Finite(u32),
    Infinite,
}

/// An element of `R(f, g, d)`: `T^t M_f T = d^2 M_g`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Similitude {
    pub matrix: Mat3,
    /// The form `g` whose vectors are transferred.
    pub source: GramMatrix,
    /// The form `f` receiving the transferred vectors.
    pub target: GramMatrix,
    pub scale: i64,
}

impl Similitude {
    pub fn new(matrix: Mat3, target: GramMatrix, source: GramMatrix, scale: i64) -> Result<Self> {
        if scale <= 0 || !similitude_check(&matrix, &target, &source, scale)? {
            return Err(Error::NotSimilitude {
                matrix: matrix.0,
                scale,
            });
        }
        Ok(Similitude {
            matrix,
            source,
            target,
            scale,
        })
    }

    /// An auto-similitude of `form`.
    pub fn auto(matrix: Mat3, form: GramMatrix, scale: i64) -> Result<Self> {
        Self::new(matrix, form, form, scale)
    }

    pub fn is_auto(&self) -> bool {
        self.source == self.target
    }

    /// `d^2 T^{-1}`, a similitude of the same scale from `f` back to `g`.
    pub fn scaled_inverse(&self) -> Result<Similitude> {
        let det = self.matrix.det();
        let adj = self.matrix.adjugate();
        let d2 = self.scale as i128 * self.scale as i128;
        let mut out = [[0i64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let num = adj[i][j] * d2;
                if det == 0 || num % det != 0 {
                    return Err(Error::NotIntegralInverse(self.matrix.0));
                }
                out[i][j] = i64::try_from(num / det)
                    .map_err(|_| overflow("scaled inverse", self.matrix))?;
            }
        }
        Similitude::new(Mat3(out), self.source, self.target, self.scale)
    }

    /// `self * inner`, first applying `inner`, then `self`.
    pub fn compose(&self, inner: &Similitude) -> Result<Similitude> {
        if self.source != inner.target {
            return Err(Error::InvalidArgument(format!(
                "cannot compose: source {} does not match target {}",
                self.source, inner.target
            )));
        }
        let scale = self
            .scale
            .checked_mul(inner.scale)
            .ok_or_else(|| overflow("composed scale", (self.scale, inner.scale)))?;
        Similitude::new(
            self.matrix.checked_mul(&inner.matrix)?,
            self.target,
            inner.source,
            scale,
        )
    }

    /// Smallest `k <= 12` with `(T/d)^k = I`, or `Infinite`.
    pub fn order_classification(&self) -> OrderClass {
        let t = self.matrix.0.map(|r| r.map(BigInt::from));
        let d = BigInt::from(self.scale);
        let mut power = t.clone();
        let mut dk = d.clone();
        for k in 1..=12u32 {
            let is_scalar = (0..3).all(|i| {
                (0..3).all(|j| {
                    if i == j {
                        power[i][j] == dk
                    } else {
                        power[i][j] == BigInt::from(0)
                    }
                })
            });
            if is_scalar {
                return OrderClass::Finite(k);
            }
            power = big_mul(&power, &t);
            dk *= &d;
        }
        OrderClass::Infinite
    }

    /// Primitive `z` with `z T^t = +-d z`, first nonzero coordinate positive.
    pub fn primitive_eigenvector(&self) -> Result<IntVector3> {
        self.eigen_pair().map(|(z, _)| z)
    }

    /// Like [`Self::primitive_eigenvector`], also returning the eigenvalue `+-d`.
    pub fn eigen_pair(&self) -> Result<(IntVector3, i64)> {
        let mut degenerate = false;
        for lambda in [self.scale, -self.scale] {
            let mut a = self.matrix.0.map(|r| r.map(|x| x as i128));
            for (i, row) in a.iter_mut().enumerate() {
                row[i] -= lambda as i128;
            }
            if det_i128(&a) != 0 {
                continue;
            }
            match kernel_vector(&a) {
                Some(z) => {
                    let z = normalize_primitive(z)
                        .ok_or_else(|| overflow("eigenvector", self.matrix))?;
                    return Ok((z, lambda));
                }
                None => degenerate = true,
            }
        }
        if degenerate {
            Err(Error::DegenerateEigenspace(self.matrix.0))
        } else {
            Err(Error::NoEigenvector(self.matrix.0))
        }
    }
}

pub fn scaled_inverse(t: &Similitude) -> Result<Similitude> {
    t.scaled_inverse()
}

pub fn order_classification(t: &Similitude) -> OrderClass {
    t.order_classification()
}

pub fn primitive_eigenvector(t: &Similitude) -> Result<IntVector3> {
    t.primitive_eigenvector()
}

fn big_mul(a: &[[BigInt; 3]; 3], b: &[[BigInt; 3]; 3]) -> [[BigInt; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..3).map(|k| &a[i][k] * &b[k][j]).sum::<BigInt>())
    })
}

fn det_i128(m: &[[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cross(u: &[i128; 3], w: &[i128; 3]) -> [i128; 3] {
    [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ]
}

/// Kernel of a rank-2 singular matrix; `None` when the rank is below 2.
fn kernel_vector(a: &[[i128; 3]; 3]) -> Option<[i128; 3]> {
    [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .map(|(i, j)| cross(&a[i], &a[j]))
        .find(|c| c.iter().any(|&x| x != 0))
}

fn normalize_primitive(z: [i128; 3]) -> Option<IntVector3> {
    let g = z
        .iter()
        .fold(0u128, |g, &x| gcd_u128(g, x.unsigned_abs()));
    let sign = z.iter().find(|&&x| x != 0).map_or(1, |&x| x.signum());
    let mut out = [0i64; 3];
    for (o, &x) in out.iter_mut().zip(z.iter()) {
        *o = i64::try_from(sign * x / g as i128).ok()?;
    }
    Some(IntVector3(out))
}
