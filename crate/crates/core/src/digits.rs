//! Digit sets: complete residue systems of Z^n / A(Z^n) containing 0.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    coset_index, same_coset, smith_normal_form, CosetIndex, IntMatrix, IntVector, SmithDecomposition,
};

/// Default cap on enumerated lattice points (digit boxes, ball points).
pub const DEFAULT_CAP: u64 = 10_000_000;

/// The half-open cube F = [-1/2, 1/2)^n. Membership of A^{-1} z is decided
/// exactly from `w = adj(A) z` and `det A`: each coordinate must satisfy
/// -1/2 <= w_i / det < 1/2.
pub struct FundamentalDomain;

impl FundamentalDomain {
    /// True iff `w / det` lies in F, with `det != 0`.
    pub fn contains_scaled(w: &IntVector, det: &BigInt) -> bool {
        w.0.iter().all(|wi| {
            let two_w = wi * 2;
            if det.is_positive() {
                -det <= two_w && two_w < *det
            } else {
                *det < two_w && two_w <= -det
            }
        })
    }
}

/// A validated digit set for the radix `matrix`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "DigitSetRepr", into = "DigitSetRepr")]
pub struct DigitSet {
    matrix: IntMatrix,
    digits: Vec<IntVector>,
    canonical: bool,
    det: BigInt,
    adj: IntMatrix,
    snf: SmithDecomposition,
    lookup: HashMap<CosetIndex, usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DigitSetRepr {
    matrix: IntMatrix,
    digits: Vec<IntVector>,
    #[serde(default)]
    canonical: bool,
}

impl TryFrom<DigitSetRepr> for DigitSet {
    type Error = Error;

    fn try_from(r: DigitSetRepr) -> Result<Self> {
        let mut ds = validate_digit_set(&r.matrix, r.digits)?;
        ds.canonical = r.canonical && ds.digits_in_canonical_region();
        Ok(ds)
    }
}

impl From<DigitSet> for DigitSetRepr {
    fn from(d: DigitSet) -> Self {
        DigitSetRepr { matrix: d.matrix, digits: d.digits, canonical: d.canonical }
    }
}

impl PartialEq for DigitSet {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.digits == other.digits
    }
}

impl DigitSet {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn digits(&self) -> &[IntVector] {
        &self.digits
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// q = |det A|
    pub fn q(&self) -> BigInt {
        self.det.abs()
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn adjugate(&self) -> &IntMatrix {
        &self.adj
    }

    pub fn snf(&self) -> &SmithDecomposition {
        &self.snf
    }

    /// Index into `digits()` of the digit congruent to `x`.
    pub fn digit_index(&self, x: &IntVector) -> Result<usize> {
        let idx = coset_index(x, &self.snf)?;
        self.lookup.get(&idx).copied().ok_or_else(|| Error::Internal(format!("no digit for coset {:?}", idx.0)))
    }

    /// The digit `d` congruent to `x` and the successor `A^{-1}(x - d)`.
    pub fn digit_for(&self, x: &IntVector) -> Result<(IntVector, IntVector)> {
        let i = self.digit_index(x)?;
        let d = self.digits[i].clone();
        let succ = self.exact_inverse_apply(&x.sub(&d))?;
        Ok((d, succ))
    }

    /// `A^{-1} y`, for `y` known to lie in A(Z^n).
    fn exact_inverse_apply(&self, y: &IntVector) -> Result<IntVector> {
        let w = self.adj.mul_vec(y);
        let mut out = Vec::with_capacity(w.dim());
        for wi in w.0 {
            if !(&wi % &self.det).is_zero() {
                return Err(Error::Internal(format!("{y} is not in A(Z^n)")));
            }
            out.push(wi / &self.det);
        }
        Ok(IntVector(out))
    }

    fn digits_in_canonical_region(&self) -> bool {
        self.digits.iter().all(|d| FundamentalDomain::contains_scaled(&self.adj.mul_vec(d), &self.det))
    }

    /// Largest digit norm, squared, exact.
    pub fn max_digit_norm_sq(&self) -> BigInt {
        self.digits.iter().map(IntVector::norm_sq).max().unwrap_or_default()
    }
}

/// D = A(F) ∩ Z^n, enumerated over the box |z_i| <= (sum_j |A_ij|) / 2.
pub fn canonical_digits(a: &IntMatrix) -> Result<DigitSet> {
    canonical_digits_capped(a, DEFAULT_CAP)
}

pub fn canonical_digits_capped(a: &IntMatrix, cap: u64) -> Result<DigitSet> {
    let det = a.det();
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let adj = a.adjugate();
    let half_widths: Vec<BigInt> = a.row_abs_sums().into_iter().map(|s| s / 2).collect();
    let box_size: BigInt = half_widths.iter().map(|h| h * 2 + 1).product();
    if box_size > BigInt::from(cap) {
        return Err(Error::ResourceLimit { what: "canonical digit box", needed: box_size.to_string(), cap });
    }
    let widths: Vec<i64> = half_widths.iter().map(|h| h.to_i64().unwrap_or(0)).collect();
    let mut digits = Vec::new();
    let mut cur: Vec<i64> = widths.iter().map(|w| -w).collect();
    'outer: loop {
        let z = IntVector::from_i64(&cur);
        if FundamentalDomain::contains_scaled(&adj.mul_vec(&z), &det) {
            digits.push(z);
        }
        for i in (0..cur.len()).rev() {
            if cur[i] < widths[i] {
                cur[i] += 1;
                continue 'outer;
            }
            cur[i] = -widths[i];
        }
        break;
    }
    let mut ds = validate_digit_set(a, digits)
        .map_err(|e| Error::Internal(format!("canonical digit set failed validation: {e}")))?;
    ds.canonical = true;
    Ok(ds)
}

/// Checks that `digits` is a complete residue system of Z^n / A(Z^n)
/// containing 0. Input order is preserved.
pub fn validate_digit_set(a: &IntMatrix, digits: Vec<IntVector>) -> Result<DigitSet> {
    let det = a.det();
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let n = a.dim();
    if let Some(bad) = digits.iter().find(|d| d.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.dim() });
    }
    let q = det.abs();
    if BigInt::from(digits.len()) != q {
        return Err(Error::WrongCount { expected: q.to_string(), got: digits.len() });
    }
    let snf = smith_normal_form(a)?;
    let mut lookup: HashMap<CosetIndex, usize> = HashMap::with_capacity(digits.len());
    for (i, d) in digits.iter().enumerate() {
        let idx = coset_index(d, &snf)?;
        if let Some(&j) = lookup.get(&idx) {
            let (first, second) = (digits[j].clone(), d.clone());
            if !same_coset(&first, &second, a)? {
                return Err(Error::Internal(format!(
                    "coset index collision for {first} and {second} not confirmed by exact solve"
                )));
            }
            return Err(Error::DuplicateCoset { first, second });
        }
        lookup.insert(idx, i);
    }
    if !digits.iter().any(IntVector::is_zero) {
        return Err(Error::MissingZero);
    }
    Ok(DigitSet { matrix: a.clone(), digits, canonical: false, adj: a.adjugate(), det, snf, lookup })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_i64(x)
    }

    fn twin_dragon() -> IntMatrix {
        IntMatrix::from_i64(&[&[1, 1], &[-1, 1]])
    }

    fn sorted(mut d: Vec<IntVector>) -> Vec<IntVector> {
        d.sort();
        d
    }

    #[test]
    fn canonical_examples() {
        let d3 = canonical_digits(&IntMatrix::scalar(1, 3)).unwrap();
        assert_eq!(sorted(d3.digits().to_vec()), vec![v(&[-1]), v(&[0]), v(&[1])]);
        assert!(d3.is_canonical());

        let d2 = canonical_digits(&IntMatrix::scalar(1, 2)).unwrap();
        assert_eq!(sorted(d2.digits().to_vec()), vec![v(&[-1]), v(&[0])]);

        let td = canonical_digits(&twin_dragon()).unwrap();
        assert_eq!(sorted(td.digits().to_vec()), vec![v(&[-1, 0]), v(&[0, 0])]);
    }

    #[test]
    fn half_open_boundary() {
        // A^{-1}(1,0) = (1/2,1/2) and A^{-1}(0,1) = (-1/2,1/2) both touch the
        // excluded face of F.
        let a = twin_dragon();
        let det = a.det();
        let adj = a.adjugate();
        assert!(FundamentalDomain::contains_scaled(&adj.mul_vec(&v(&[-1, 0])), &det));
        assert!(!FundamentalDomain::contains_scaled(&adj.mul_vec(&v(&[1, 0])), &det));
        assert!(!FundamentalDomain::contains_scaled(&adj.mul_vec(&v(&[0, 1])), &det));
        // negative determinant flips the inequalities
        let m = IntMatrix::scalar(1, -2);
        let d = canonical_digits(&m).unwrap();
        // (-2)^{-1} z in [-1/2, 1/2) <=> z in (-1, 1]
        assert_eq!(sorted(d.digits().to_vec()), vec![v(&[0]), v(&[1])]);
    }

    #[test]
    fn validate_examples() {
        let two = IntMatrix::scalar(1, 2);
        let ok = validate_digit_set(&two, vec![v(&[0]), v(&[1])]).unwrap();
        assert_eq!(ok.digits(), &[v(&[0]), v(&[1])]);
        assert!(validate_digit_set(&twin_dragon(), vec![v(&[0, 0]), v(&[1, 0])]).is_ok());
        match validate_digit_set(&two, vec![v(&[0]), v(&[2])]) {
            Err(Error::DuplicateCoset { first, second }) => {
                assert_eq!((first, second), (v(&[0]), v(&[2])));
            }
            other => panic!("expected DuplicateCoset, got {other:?}"),
        }
        assert!(matches!(validate_digit_set(&two, vec![v(&[0])]), Err(Error::WrongCount { .. })));
        assert!(matches!(validate_digit_set(&two, vec![v(&[1]), v(&[2])]), Err(Error::MissingZero)));
        assert!(matches!(validate_digit_set(&two, vec![v(&[1, 0]), v(&[0])]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn digit_for_examples() {
        let two = validate_digit_set(&IntMatrix::scalar(1, 2), vec![v(&[0]), v(&[1])]).unwrap();
        assert_eq!(two.digit_for(&v(&[0])).unwrap(), (v(&[0]), v(&[0])));
        assert_eq!(two.digit_for(&v(&[5])).unwrap(), (v(&[1]), v(&[2])));
        let td = validate_digit_set(&twin_dragon(), vec![v(&[0, 0]), v(&[1, 0])]).unwrap();
        // (0,-1) - (1,0) = (-1,-1) = A (0,-1)
        assert_eq!(td.digit_for(&v(&[0, -1])).unwrap(), (v(&[1, 0]), v(&[0, -1])));
    }

    #[test]
    fn json_shape() {
        let td = canonical_digits(&twin_dragon()).unwrap();
        let js = serde_json::to_value(&td).unwrap();
        assert_eq!(js["canonical"], true);
        assert_eq!(js["matrix"], serde_json::json!([["1", "1"], ["-1", "1"]]));
        let back: DigitSet = serde_json::from_value(js).unwrap();
        assert_eq!(back, td);
        assert!(back.is_canonical());
        let bad = serde_json::json!({"matrix": [[2]], "digits": [[0], [2]]});
        assert!(serde_json::from_value::<DigitSet>(bad).is_err());
    }
}
