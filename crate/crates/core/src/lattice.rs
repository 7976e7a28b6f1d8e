//! Exact integer linear algebra over Z^n.
//!
//! Everything here works on arbitrary-precision integers; nothing in this
//! module touches floating point. The Smith normal form gives the coset
//! structure of Z^n / A(Z^n), and an independent exact rational solve
//! decides membership in A(Z^n) directly.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A lattice vector in Z^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVector(pub Vec<BigInt>);

impl IntVector {
    pub fn zeros(n: usize) -> Self {
        IntVector(vec![BigInt::zero(); n])
    }

    pub fn from_i64(v: &[i64]) -> Self {
        IntVector(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> IntVector {
        IntVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: &BigInt) -> IntVector {
        IntVector(self.0.iter().map(|a| a * k).collect())
    }

    /// Squared Euclidean norm, exact.
    pub fn norm_sq(&self) -> BigInt {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A square integer matrix, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(n: usize, entries: Vec<BigInt>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(IntMatrix { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        IntMatrix::new(n, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor for tests and literals.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let rows = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        IntMatrix::from_rows(rows).expect("literal matrix must be square")
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1)
    }

    pub fn scalar(n: usize, k: i64) -> Self {
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigInt::from(k);
        }
        IntMatrix { n, entries }
    }

    pub fn diagonal(d: &[i64]) -> Self {
        let n = d.len();
        let mut m = Self::scalar(n, 0);
        for (i, &x) in d.iter().enumerate() {
            m.entries[i * n + i] = BigInt::from(x);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    fn get_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.n;
        let mut t = self.clone();
        for i in 0..n {
            for j in 0..n {
                t.entries[j * n + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut out = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.get(k, j);
                }
            }
        }
        IntMatrix { n, entries: out }
    }

    pub fn mul_vec(&self, x: &IntVector) -> IntVector {
        IntVector(self.entries.chunks(self.n).map(|row| row.iter().zip(&x.0).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn pow(&self, k: u32) -> IntMatrix {
        let mut result = IntMatrix::identity(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn sub_scalar_identity(&self, k: &BigInt) -> IntMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            *m.get_mut(i, i) -= k;
        }
        m
    }

    /// Largest absolute row sum (the induced infinity norm).
    pub fn max_abs_row_sum(&self) -> BigInt {
        self.entries.chunks(self.n).map(|r| r.iter().map(|a| a.abs()).sum::<BigInt>()).max().unwrap_or_default()
    }

    pub fn row_abs_sums(&self) -> Vec<BigInt> {
        self.entries.chunks(self.n).map(|r| r.iter().map(|a| a.abs()).sum()).collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.iter().map(|a| a.to_f64().unwrap_or(f64::NAN)).collect()).collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        det_exact(self)
    }

    /// Leading principal minors, in order of increasing size.
    pub fn leading_principal_minors(&self) -> Vec<BigInt> {
        (1..=self.n).map(|k| det_exact(&self.leading_block(k))).collect()
    }

    fn leading_block(&self, k: usize) -> IntMatrix {
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                entries.push(self.get(i, j).clone());
            }
        }
        IntMatrix { n: k, entries }
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> IntMatrix {
        let n = self.n - 1;
        let mut entries = Vec::with_capacity(n * n);
        for i in (0..self.n).filter(|&i| i != skip_row) {
            for j in (0..self.n).filter(|&j| j != skip_col) {
                entries.push(self.get(i, j).clone());
            }
        }
        IntMatrix { n, entries }
    }

    /// Adjugate, so that `A * adj(A) = det(A) * I`.
    pub fn adjugate(&self) -> IntMatrix {
        let n = self.n;
        if n == 1 {
            return IntMatrix::identity(1);
        }
        let mut adj = IntMatrix::scalar(n, 0);
        for i in 0..n {
            for j in 0..n {
                let c = det_exact(&self.minor(i, j));
                *adj.get_mut(j, i) = if (i + j) % 2 == 0 { c } else { -c };
            }
        }
        adj
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.n).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", IntVector(row.to_vec()))?;
        }
        write!(f, "]")
    }
}

pub fn det_exact(a: &IntMatrix) -> BigInt {
    let n = a.n;
    let mut m: Vec<Vec<BigInt>> = a.rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Exact rational solution of `A z = b`.
#[allow(clippy::needless_range_loop)]
pub fn solve_rational(a: &IntMatrix, b: &IntVector) -> Result<Vec<BigRational>> {
    let n = a.n;
    if b.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.dim() });
    }
    let mut m: Vec<Vec<BigRational>> = a
        .rows()
        .into_iter()
        .zip(&b.0)
        .map(|(row, bi)| row.into_iter().chain(std::iter::once(bi.clone())).map(BigRational::from_integer).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::SingularMatrix)?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for j in col..=n {
            m[col][j] = &m[col][j] / &p;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in col..=n {
                let v = &m[col][j] * &f;
                m[r][j] -= v;
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Returns the integral solution of `A z = b` if one exists.
pub fn solve_integral(a: &IntMatrix, b: &IntVector) -> Result<Option<IntVector>> {
    let z = solve_rational(a, b)?;
    if z.iter().all(|c| c.is_integer()) {
        Ok(Some(IntVector(z.into_iter().map(|c| c.to_integer()).collect())))
    } else {
        Ok(None)
    }
}

/// True iff `x - y` lies in `A(Z^n)`.
pub fn same_coset(x: &IntVector, y: &IntVector, a: &IntMatrix) -> Result<bool> {
    if x.dim() != a.dim() || y.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: if x.dim() != a.dim() { x.dim() } else { y.dim() },
        });
    }
    Ok(solve_integral(a, &x.sub(y))?.is_some())
}

/// `U * A * V = S` with `S = diag(s_1, ..., s_n)`, `s_i | s_{i+1}`, `s_i > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub s: IntMatrix,
}

impl SmithDecomposition {
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.s.dim()).map(|i| self.s.get(i, i).clone()).collect()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> Result<SmithDecomposition> {
    if a.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let n = a.dim();
    let mut s = a.clone();
    let mut u = IntMatrix::identity(n);
    let mut v = IntMatrix::identity(n);

    for t in 0..n {
        loop {
            // Smallest nonzero magnitude in the trailing block; ties go to the
            // lowest (row, column) in row-major order.
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    let x = s.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    match pivot {
                        Some((pi, pj)) if s.get(pi, pj).abs() <= x.abs() => {}
                        _ => pivot = Some((i, j)),
                    }
                }
            }
            let (pi, pj) = pivot.ok_or(Error::SingularMatrix)?;
            swap_rows(&mut s, &mut u, t, pi);
            swap_cols(&mut s, &mut v, t, pj);

            let mut dirty = false;
            for i in t + 1..n {
                let q = s.get(i, t).div_floor(s.get(t, t));
                if !q.is_zero() {
                    add_row_multiple(&mut s, &mut u, i, t, &-q);
                }
                dirty |= !s.get(i, t).is_zero();
            }
            for j in t + 1..n {
                let q = s.get(t, j).div_floor(s.get(t, t));
                if !q.is_zero() {
                    add_col_multiple(&mut s, &mut v, j, t, &-q);
                }
                dirty |= !s.get(t, j).is_zero();
            }
            if dirty {
                continue;
            }
            let p = s.get(t, t).clone();
            let offender = (t + 1..n).find(|&i| (t + 1..n).any(|j| !s.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => add_row_multiple(&mut s, &mut u, t, i, &BigInt::one()),
                None => break,
            }
        }
        if s.get(t, t).is_negative() {
            for j in 0..n {
                let x = -s.get(t, j).clone();
                *s.get_mut(t, j) = x;
                let y = -u.get(t, j).clone();
                *u.get_mut(t, j) = y;
            }
        }
    }
    Ok(SmithDecomposition { u, v, s })
}

fn swap_rows(s: &mut IntMatrix, u: &mut IntMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let n = s.n;
    for j in 0..n {
        s.entries.swap(a * n + j, b * n + j);
        u.entries.swap(a * n + j, b * n + j);
    }
}

fn swap_cols(s: &mut IntMatrix, v: &mut IntMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let n = s.n;
    for i in 0..n {
        s.entries.swap(i * n + a, i * n + b);
        v.entries.swap(i * n + a, i * n + b);
    }
}

/// row[dst] += k * row[src]
fn add_row_multiple(s: &mut IntMatrix, u: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    for j in 0..s.n {
        let ds = s.get(src, j) * k;
        *s.get_mut(dst, j) += ds;
        let du = u.get(src, j) * k;
        *u.get_mut(dst, j) += du;
    }
}

/// col[dst] += k * col[src]
fn add_col_multiple(s: &mut IntMatrix, v: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    for i in 0..s.n {
        let ds = s.get(i, src) * k;
        *s.get_mut(i, dst) += ds;
        let dv = v.get(i, src) * k;
        *v.get_mut(i, dst) += dv;
    }
}

/// Canonical label of a coset of Z^n / A(Z^n): least nonnegative residues of
/// `U x` modulo the invariant factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CosetIndex(#[serde(with = "bigint_vec_str")] pub Vec<BigInt>);

pub fn coset_index(x: &IntVector, snf: &SmithDecomposition) -> Result<CosetIndex> {
    let n = snf.s.dim();
    if x.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.dim() });
    }
    let ux = snf.u.mul_vec(x);
    Ok(CosetIndex(ux.0.iter().enumerate().map(|(i, c)| c.mod_floor(snf.s.get(i, i))).collect()))
}

// JSON: integers travel as decimal strings; plain JSON integers are accepted
// on input.

struct BigIntVisitor;

impl<'de> Visitor<'de> for BigIntVisitor {
    type Value = BigInt;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a decimal integer string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BigInt, E> {
        Ok(BigInt::from(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BigInt, E> {
        v.trim().parse::<BigInt>().map_err(|_| E::custom(format!("invalid integer string {v:?}")))
    }
}

/// Serde adapter for a single `BigInt` as a decimal string.
pub mod bigint_str {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        d.deserialize_any(BigIntVisitor)
    }
}

/// Serde adapter for `Vec<BigInt>` as decimal strings.
pub mod bigint_vec_str {
    use super::*;

    pub fn serialize<S: Serializer>(x: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(|v| v.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigInt>, D::Error> {
        struct Elem(BigInt);
        impl<'de> Deserialize<'de> for Elem {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                d.deserialize_any(BigIntVisitor).map(Elem)
            }
        }
        struct SeqV;
        impl<'de> Visitor<'de> for SeqV {
            type Value = Vec<BigInt>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of integers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Vec<BigInt>, A::Error> {
                let mut out = Vec::new();
                while let Some(Elem(x)) = seq.next_element()? {
                    out.push(x);
                }
                Ok(out)
            }
        }
        d.deserialize_seq(SeqV)
    }
}

impl Serialize for IntVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        bigint_vec_str::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for IntVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        bigint_vec_str::deserialize(d).map(IntVector)
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.entries.chunks(self.n).map(|r| IntVector(r.to_vec())))
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<IntVector> = Vec::deserialize(d)?;
        IntMatrix::from_rows(rows.into_iter().map(|r| r.0).collect()).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn twin_dragon() -> IntMatrix {
        IntMatrix::from_i64(&[&[1, 1], &[-1, 1]])
    }

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_i64(x)
    }

    #[test]
    fn determinants() {
        assert_eq!(twin_dragon().det(), BigInt::from(2));
        assert_eq!(IntMatrix::scalar(2, 3).det(), BigInt::from(9));
        assert_eq!(IntMatrix::from_i64(&[&[2, 1], &[0, 2]]).det(), BigInt::from(4));
        assert_eq!(IntMatrix::from_i64(&[&[0, 1], &[1, 0]]).det(), BigInt::from(-1));
        assert_eq!(IntMatrix::from_i64(&[&[1, 2], &[2, 4]]).det(), BigInt::zero());
        let m = IntMatrix::from_i64(&[&[0, 2, 1], &[3, -1, 4], &[5, 0, -2]]);
        // cofactor expansion along the first row
        assert_eq!(m.det(), BigInt::from(-2 * (3 * -2 - 4 * 5) + 5));
    }

    #[test]
    fn adjugate_identity() {
        let m = IntMatrix::from_i64(&[&[0, 2, 1], &[3, -1, 4], &[5, 0, -2]]);
        let d = m.det();
        let prod = m.mul(&m.adjugate());
        assert_eq!(prod, IntMatrix::identity(3).mul(&IntMatrix::scalar(3, d.to_i64().unwrap())));
    }

    #[test]
    fn snf_examples() {
        let s = smith_normal_form(&IntMatrix::scalar(2, 2)).unwrap();
        assert_eq!(s.s, IntMatrix::diagonal(&[2, 2]));

        let a = twin_dragon();
        let s = smith_normal_form(&a).unwrap();
        assert_eq!(s.s, IntMatrix::diagonal(&[1, 2]));
        assert_eq!(s.u.mul(&a).mul(&s.v), s.s);

        let s = smith_normal_form(&IntMatrix::diagonal(&[2, 6])).unwrap();
        assert_eq!(s.s, IntMatrix::diagonal(&[2, 6]));

        // diag(2, 3) is not in SNF: the divisibility fix-up must produce diag(1, 6)
        let a = IntMatrix::diagonal(&[2, 3]);
        let s = smith_normal_form(&a).unwrap();
        assert_eq!(s.s, IntMatrix::diagonal(&[1, 6]));
        assert_eq!(s.u.mul(&a).mul(&s.v), s.s);
    }

    #[test]
    fn snf_twin_dragon_by_hand() {
        // Hand elimination: column op c2 -= c1 gives [[1,0],[-1,2]], then
        // row op r2 += r1 gives [[1,0],[0,2]].
        let a = twin_dragon();
        let u = IntMatrix::from_i64(&[&[1, 0], &[1, 1]]);
        let v = IntMatrix::from_i64(&[&[1, -1], &[0, 1]]);
        assert_eq!(u.mul(&a).mul(&v), IntMatrix::diagonal(&[1, 2]));
        assert_eq!(smith_normal_form(&a).unwrap().s, IntMatrix::diagonal(&[1, 2]));
    }

    #[test]
    fn snf_singular() {
        let a = IntMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert!(matches!(smith_normal_form(&a), Err(Error::SingularMatrix)));
    }

    #[test]
    fn coset_examples() {
        let a = twin_dragon();
        let snf = smith_normal_form(&a).unwrap();
        assert_eq!(coset_index(&v(&[0, 0]), &snf).unwrap(), CosetIndex(vec![0.into(), 0.into()]));
        // x - y = (1,1) = A (0,1)
        assert_eq!(coset_index(&v(&[1, 0]), &snf).unwrap(), coset_index(&v(&[0, -1]), &snf).unwrap());
        assert_ne!(coset_index(&v(&[1, 0]), &snf).unwrap(), coset_index(&v(&[0, 0]), &snf).unwrap());
        assert_eq!(solve_integral(&a, &v(&[1, 1])).unwrap(), Some(v(&[0, 1])));
        let half = solve_rational(&a, &v(&[1, 0])).unwrap();
        let h = BigRational::new(1.into(), 2.into());
        assert_eq!(half, vec![h.clone(), h]);
    }

    #[test]
    fn same_coset_examples() {
        let two = IntMatrix::scalar(1, 2);
        assert!(same_coset(&v(&[7]), &v(&[7]), &two).unwrap());
        assert!(same_coset(&v(&[5]), &v(&[1]), &two).unwrap());
        assert!(!same_coset(&v(&[5]), &v(&[0]), &two).unwrap());
        let sing = IntMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert!(matches!(same_coset(&v(&[1, 0]), &v(&[0, 0]), &sing), Err(Error::SingularMatrix)));
    }

    #[test]
    fn solve_integral_examples() {
        assert_eq!(solve_integral(&IntMatrix::scalar(2, 2), &v(&[4, -2])).unwrap(), Some(v(&[2, -1])));
        assert_eq!(solve_integral(&twin_dragon(), &v(&[1, -1])).unwrap(), Some(v(&[1, 0])));
        assert_eq!(solve_integral(&IntMatrix::scalar(1, 2), &v(&[3])).unwrap(), None);
    }

    #[test]
    fn json_roundtrip_and_numbers() {
        let a = twin_dragon();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"[["1","1"],["-1","1"]]"#);
        let back: IntMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        let plain: IntMatrix = serde_json::from_str("[[1,1],[-1,1]]").unwrap();
        assert_eq!(plain, a);
        let big: IntVector = serde_json::from_str(r#"["123456789012345678901234567890"]"#).unwrap();
        assert_eq!(big.0[0].to_string(), "123456789012345678901234567890");
        assert!(serde_json::from_str::<IntMatrix>("[[1,2],[3]]").is_err());
    }

    #[test]
    fn matrix_power() {
        let a = twin_dragon();
        assert_eq!(a.pow(0), IntMatrix::identity(2));
        assert_eq!(a.pow(2), IntMatrix::from_i64(&[&[0, 2], &[-2, 0]]));
        let a3 = a.pow(3);
        assert_eq!(a3.transpose().mul(&a3), IntMatrix::scalar(2, 8));
    }
}
