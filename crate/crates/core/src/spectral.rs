//! Dilation and singular-value tests.
//!
//! The two decisions that matter (all |lambda| > 1, and sigma_min > 2) are
//! made in exact integer arithmetic. The floating-point singular value is
//! reported for humans only.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::digits::{canonical_digits, DigitSet};
use crate::error::{Error, Result};
use crate::lattice::{bigint_str, bigint_vec_str, IntMatrix};
use crate::radix::{decide_radix, DecideOptions};

pub const DEFAULT_KMAX: u32 = 12;

/// Characteristic polynomial det(xI - A), coefficients in ascending order
/// (constant term first, leading coefficient 1 last).
///
/// Faddeev-LeVerrier; every division is exact over Z.
pub fn char_poly(a: &IntMatrix) -> Vec<BigInt> {
    let n = a.dim();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut m = IntMatrix::scalar(n, 0);
    for k in 1..=n {
        m = a.mul(&m).sub_scalar_identity(&-&coeffs[n - k + 1]);
        let am = a.mul(&m);
        let trace: BigInt = (0..n).map(|i| am.get(i, i).clone()).sum();
        coeffs[n - k] = -trace / BigInt::from(k);
    }
    coeffs
}

/// Schur-Cohn test: true iff every root of `f` (ascending coefficients) lies
/// strictly inside the unit disk.
pub fn roots_strictly_inside_unit_disk(f: &[BigInt]) -> bool {
    let mut f: Vec<BigInt> = f.to_vec();
    while f.last().is_some_and(Zero::is_zero) {
        f.pop();
    }
    if f.is_empty() {
        return false;
    }
    loop {
        let deg = f.len() - 1;
        if deg == 0 {
            return true;
        }
        let a0 = f[0].clone();
        let an = f[deg].clone();
        if an.abs() <= a0.abs() {
            return false;
        }
        // (an * f(z) - a0 * z^deg f(1/z)) / z, degree exactly deg - 1
        let mut g: Vec<BigInt> = (1..=deg).map(|i| &an * &f[i] - &a0 * &f[deg - i]).collect();
        let content = g.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if !content.is_zero() && !content.is_one() {
            for c in &mut g {
                *c = &*c / &content;
            }
        }
        f = g;
    }
}

/// True iff every eigenvalue of `a` satisfies |lambda| > 1.
pub fn is_dilation_matrix(a: &IntMatrix) -> bool {
    let p = char_poly(a);
    if p[0].is_zero() {
        return false;
    }
    // x^n p(1/x) has its roots at 1/lambda.
    let reversed: Vec<BigInt> = p.iter().rev().cloned().collect();
    roots_strictly_inside_unit_disk(&reversed)
}

/// True iff the smallest singular value of `a` exceeds 2, i.e. A^T A - 4I is
/// positive definite (Sylvester's criterion, exact).
pub fn mu_exceeds_two(a: &IntMatrix) -> bool {
    let gram = a.transpose().mul(a).sub_scalar_identity(&BigInt::from(4));
    gram.leading_principal_minors().iter().all(Signed::is_positive)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
#[allow(clippy::needless_range_loop)]
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Floating-point estimate of the smallest singular value. Advisory only.
pub fn smallest_singular_value_estimate(a: &IntMatrix) -> Result<f64> {
    if a.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let gram = a.transpose().mul(a).to_f64_rows();
    let min = symmetric_eigenvalues(&gram).into_iter().fold(f64::INFINITY, f64::min);
    Ok(min.max(0.0).sqrt())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectralReport {
    #[serde(with = "bigint_str")]
    pub q: BigInt,
    pub is_dilation: bool,
    pub mu_exceeds_two: bool,
    pub mu_estimate: f64,
    /// det(xI - A), constant term first.
    #[serde(with = "bigint_vec_str")]
    pub char_poly: Vec<BigInt>,
}

pub fn spectral_report(a: &IntMatrix) -> Result<SpectralReport> {
    let det = a.det();
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    Ok(SpectralReport {
        q: det.abs(),
        is_dilation: is_dilation_matrix(a),
        mu_exceeds_two: mu_exceeds_two(a),
        mu_estimate: smallest_singular_value_estimate(a)?,
        char_poly: char_poly(a),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaTrial {
    pub power: u32,
    pub mu_exceeds_two: bool,
    /// `None` when the decision was not attempted (search already finished).
    pub yields: Option<bool>,
    pub digit_count: String,
}

/// Outcome of the search for the least power of A that yields a radix
/// representation with its own canonical digit set.
#[derive(Clone, Debug, Serialize)]
pub struct BetaSearch {
    pub beta: Option<u32>,
    pub digit_set: Option<DigitSet>,
    /// Least k <= k_max with sigma_min(A^k) > 2, reported alongside beta.
    pub min_mu_power: Option<u32>,
    pub k_max: u32,
    pub trials: Vec<BetaTrial>,
}

pub fn find_beta(a: &IntMatrix, k_max: u32, opts: &DecideOptions) -> Result<BetaSearch> {
    if !is_dilation_matrix(a) {
        return Err(Error::NotDilation);
    }
    let mut search = BetaSearch { beta: None, digit_set: None, min_mu_power: None, k_max, trials: Vec::new() };
    for k in 1..=k_max {
        let ak = a.pow(k);
        let mu2 = mu_exceeds_two(&ak);
        if mu2 && search.min_mu_power.is_none() {
            search.min_mu_power = Some(k);
        }
        if search.beta.is_some() {
            search.trials.push(BetaTrial {
                power: k,
                mu_exceeds_two: mu2,
                yields: None,
                digit_count: ak.det().abs().to_string(),
            });
            if search.min_mu_power.is_some() {
                break;
            }
            continue;
        }
        let digits = canonical_digits(&ak)?;
        let report = decide_radix(&digits, opts)?;
        if mu2 && !report.yields {
            return Err(Error::Internal(format!("A^{k} has sigma_min > 2 but the decision procedure found a cycle")));
        }
        search.trials.push(BetaTrial {
            power: k,
            mu_exceeds_two: mu2,
            yields: Some(report.yields),
            digit_count: digits.q().to_string(),
        });
        if report.yields {
            search.beta = Some(k);
            search.digit_set = Some(digits);
            if search.min_mu_power.is_some() {
                break;
            }
        }
    }
    Ok(search)
}

/// f64 upper bound for sqrt of a nonnegative integer ratio.
pub(crate) fn sqrt_ratio_up(num: &BigInt, den: &BigInt) -> f64 {
    let r = num_rational::BigRational::new(num.clone(), den.clone());
    let v = r.to_f64().unwrap_or(f64::INFINITY).max(0.0).sqrt();
    v * (1.0 + 1e-12) + f64::MIN_POSITIVE
}

#[cfg(test)]
mod tests {
    use super::*;

    fn twin_dragon() -> IntMatrix {
        IntMatrix::from_i64(&[&[1, 1], &[-1, 1]])
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn char_poly_examples() {
        // x^2 - 2x + 2
        assert_eq!(char_poly(&twin_dragon()), ints(&[2, -2, 1]));
        assert_eq!(char_poly(&IntMatrix::scalar(1, 2)), ints(&[-2, 1]));
        // (x-3)^2
        assert_eq!(char_poly(&IntMatrix::scalar(2, 3)), ints(&[9, -6, 1]));
        let m = IntMatrix::from_i64(&[&[0, 2, 1], &[3, -1, 4], &[5, 0, -2]]);
        let p = char_poly(&m);
        assert_eq!(p[0], -m.det());
        assert_eq!(p[2], BigInt::from(3)); // minus the trace
    }

    #[test]
    fn dilation_examples() {
        assert!(is_dilation_matrix(&IntMatrix::scalar(1, 2)));
        assert!(is_dilation_matrix(&twin_dragon()));
        assert!(!is_dilation_matrix(&IntMatrix::diagonal(&[1, 2])));
        assert!(!is_dilation_matrix(&IntMatrix::diagonal(&[-1, 3])));
        assert!(is_dilation_matrix(&IntMatrix::scalar(1, -2)));
        // rotation by 90 degrees: |lambda| = 1
        assert!(!is_dilation_matrix(&IntMatrix::from_i64(&[&[0, -1], &[1, 0]])));
        // eigenvalues (3 +- sqrt5)/2, one of them < 1
        assert!(!is_dilation_matrix(&IntMatrix::from_i64(&[&[2, 1], &[1, 1]])));
        assert!(!is_dilation_matrix(&IntMatrix::from_i64(&[&[1, 2], &[2, 4]])));
    }

    #[test]
    fn schur_cohn_small() {
        // 2z - 1: root 1/2
        assert!(roots_strictly_inside_unit_disk(&ints(&[-1, 2])));
        // z - 1: root on the circle
        assert!(!roots_strictly_inside_unit_disk(&ints(&[-1, 1])));
        // z^2 + 1: roots +-i on the circle
        assert!(!roots_strictly_inside_unit_disk(&ints(&[1, 0, 1])));
        // 4z^2 + 1: roots +-i/2
        assert!(roots_strictly_inside_unit_disk(&ints(&[1, 0, 4])));
    }

    #[test]
    fn mu_examples() {
        assert!(mu_exceeds_two(&IntMatrix::scalar(2, 3)));
        assert!(!mu_exceeds_two(&twin_dragon()));
        assert!(mu_exceeds_two(&IntMatrix::from_i64(&[&[3, 1], &[0, 3]])));
        // sigma_min(A^2) = 2 exactly for the twin dragon
        assert!(!mu_exceeds_two(&twin_dragon().pow(2)));
        assert!(mu_exceeds_two(&twin_dragon().pow(3)));
        assert!(!mu_exceeds_two(&IntMatrix::scalar(1, 2)));
    }

    #[test]
    fn singular_value_examples() {
        let s = smallest_singular_value_estimate(&twin_dragon()).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
        assert!((smallest_singular_value_estimate(&IntMatrix::scalar(2, 3)).unwrap() - 3.0).abs() < 1e-12);
        assert!((smallest_singular_value_estimate(&IntMatrix::scalar(1, 2)).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            smallest_singular_value_estimate(&IntMatrix::from_i64(&[&[1, 2], &[2, 4]])),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn report_json() {
        let r = spectral_report(&twin_dragon()).unwrap();
        let js = serde_json::to_value(&r).unwrap();
        assert_eq!(js["q"], "2");
        assert_eq!(js["char_poly"], serde_json::json!(["2", "-2", "1"]));
    }
}
