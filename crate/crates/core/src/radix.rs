//! Digit expansion by the Euclidean algorithm and the exact decision
//! procedure for "A yields a radix representation with digit set D".
//!
//! The decision works on a finite ball: `absorbing_ball` gives a radius
//! containing every periodic orbit of the digit-step map `x -> A^{-1}(x - d)`.
//! A nonzero cycle anywhere in Z^n therefore shows up among the ball points,
//! and if every ball point reaches 0 there is no nonzero cycle at all.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::{DigitSet, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::lattice::{IntMatrix, IntVector};
use crate::spectral::{is_dilation_matrix, sqrt_ratio_up};

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionStatus {
    Terminated { length: usize },
    Cycle { entry_index: usize, period: usize, cycle_states: Vec<IntVector> },
}

/// Digits are least-significant first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadixExpansion {
    pub input: IntVector,
    pub digits: Vec<IntVector>,
    pub status: ExpansionStatus,
}

impl RadixExpansion {
    pub fn is_terminated(&self) -> bool {
        matches!(self.status, ExpansionStatus::Terminated { .. })
    }
}

pub fn expand(x: &IntVector, ds: &DigitSet, max_steps: usize) -> Result<RadixExpansion> {
    if x.dim() != ds.dim() {
        return Err(Error::DimensionMismatch { expected: ds.dim(), got: x.dim() });
    }
    let mut seen: HashMap<IntVector, usize> = HashMap::new();
    let mut states: Vec<IntVector> = Vec::new();
    let mut digits = Vec::new();
    let mut cur = x.clone();
    loop {
        if cur.is_zero() {
            return Ok(RadixExpansion {
                input: x.clone(),
                status: ExpansionStatus::Terminated { length: digits.len() },
                digits,
            });
        }
        if let Some(&entry) = seen.get(&cur) {
            let cycle_states = states[entry..].to_vec();
            return Ok(RadixExpansion {
                input: x.clone(),
                digits,
                status: ExpansionStatus::Cycle { entry_index: entry, period: cycle_states.len(), cycle_states },
            });
        }
        if states.len() >= max_steps {
            return Err(Error::StepBudgetExceeded(max_steps));
        }
        seen.insert(cur.clone(), states.len());
        states.push(cur.clone());
        let (d, next) = ds.digit_for(&cur)?;
        digits.push(d);
        cur = next;
    }
}

/// Horner evaluation of sum_j A^j d_j.
pub fn reconstruct(e: &RadixExpansion, a: &IntMatrix) -> Result<IntVector> {
    if !e.is_terminated() {
        return Err(Error::NotTerminated);
    }
    Ok(horner(&e.digits, a, e.input.dim()))
}

pub(crate) fn horner(digits: &[IntVector], a: &IntMatrix, n: usize) -> IntVector {
    digits.iter().rev().fold(IntVector::zeros(n), |acc, d| a.mul_vec(&acc).add(d))
}

/// Operator-norm upper bounds for the inverse powers of A, from the exact
/// Frobenius norm of `adj(A)^i / det(A)^i`.
#[derive(Clone, Debug)]
pub struct InverseNorms {
    /// `bounds[i-1]` >= ||A^{-i}||_2
    pub bounds: Vec<f64>,
    /// Least m with ||A^{-m}||_F <= 1/2 (decided exactly).
    pub m: usize,
}

const MAX_CONTRACTION_POWER: usize = 4096;

pub fn inverse_norms(a: &IntMatrix) -> Result<InverseNorms> {
    if !is_dilation_matrix(a) {
        return Err(Error::NotDilation);
    }
    let det = a.det();
    let adj = a.adjugate();
    let mut p = adj.clone();
    let mut d = det.clone();
    let mut bounds = Vec::new();
    for i in 1..=MAX_CONTRACTION_POWER {
        let fro_sq: BigInt =
            (0..a.dim()).flat_map(|r| (0..a.dim()).map(move |c| (r, c))).map(|(r, c)| p.get(r, c) * p.get(r, c)).sum();
        let d_sq = &d * &d;
        bounds.push(sqrt_ratio_up(&fro_sq, &d_sq));
        if fro_sq * 4 <= d_sq {
            return Ok(InverseNorms { bounds, m: i });
        }
        p = p.mul(&adj);
        d *= &det;
    }
    Err(Error::Internal(format!("no power <= {MAX_CONTRACTION_POWER} of A^-1 has norm <= 1/2")))
}

/// Upper bound for ||A^{-k}||_2 via the exact Frobenius norm of A^{-k}.
pub fn inverse_power_norm(a: &IntMatrix, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let det = a.det();
    let p = a.adjugate().pow(k);
    let n = a.dim();
    let fro_sq: BigInt = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| p.get(r, c) * p.get(r, c)).sum();
    let d = det.pow(k);
    sqrt_ratio_up(&fro_sq, &(&d * &d))
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AbsorbingBall {
    pub rho: f64,
    pub m: usize,
    /// max ||d||_2 over the digits (upper bound)
    pub c: f64,
    /// C * sum_{i<=m} ||A^{-i}||
    pub k: f64,
}

/// Ball of radius rho containing every periodic state of the digit-step map.
///
/// After m steps `||x'|| <= ||x||/2 + K`, so periodic states satisfy
/// `||x|| <= 2K`; the extra slack `s = max_i ||A^{-i}|| * 2K + K` covers
/// the states visited inside an m-block.
pub fn absorbing_ball(ds: &DigitSet) -> Result<AbsorbingBall> {
    let norms = inverse_norms(ds.matrix())?;
    let c = sqrt_ratio_up(&ds.max_digit_norm_sq(), &BigInt::from(1));
    Ok(ball_from_norms(&norms, c))
}

pub(crate) fn ball_from_norms(norms: &InverseNorms, c: f64) -> AbsorbingBall {
    let sum: f64 = norms.bounds.iter().sum();
    let max = norms.bounds.iter().cloned().fold(0.0, f64::max);
    let k = c * sum;
    let slack = max * 2.0 * k + k;
    AbsorbingBall { rho: (2.0 * k + slack) * (1.0 + 1e-12), m: norms.m, c, k }
}

#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub cap: u64,
    pub max_steps: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { cap: DEFAULT_CAP, max_steps: DEFAULT_MAX_STEPS }
    }
}

/// A nonzero cycle of the digit-step map, rotated to start at its
/// lexicographically smallest state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleWitness {
    pub representative: IntVector,
    pub cycle: Vec<IntVector>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecisionReport {
    pub yields: bool,
    pub ball_radius: f64,
    pub points_checked: u64,
    pub witnesses: Vec<CycleWitness>,
    pub m_contraction: usize,
    /// Longest expansion N(x) seen among terminating ball points.
    pub max_expansion_length: usize,
    pub cap: u64,
}

fn canonical_cycle(states: &[IntVector]) -> CycleWitness {
    let (start, _) = states.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).expect("cycle is nonempty");
    let cycle: Vec<IntVector> = states[start..].iter().chain(&states[..start]).cloned().collect();
    CycleWitness { representative: cycle[0].clone(), cycle }
}

/// Replays the digit-step map around `w.cycle`; true iff it closes up.
pub fn verify_cycle(w: &CycleWitness, ds: &DigitSet) -> Result<bool> {
    if w.cycle.is_empty() || w.cycle.iter().any(IntVector::is_zero) {
        return Ok(false);
    }
    for (i, s) in w.cycle.iter().enumerate() {
        let (_, next) = ds.digit_for(s)?;
        if next != w.cycle[(i + 1) % w.cycle.len()] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone)]
enum Fate {
    /// steps needed to reach 0
    Terminates(usize),
    Cycles(usize),
}

#[derive(Default)]
struct ChunkResult {
    cycles: BTreeMap<IntVector, CycleWitness>,
    max_len: usize,
}

fn resolve_chunk(points: &[Vec<i64>], ds: &DigitSet, max_steps: usize) -> Result<ChunkResult> {
    let mut fate: HashMap<IntVector, Fate> = HashMap::new();
    let mut out = ChunkResult::default();
    let mut cycle_ids: Vec<IntVector> = Vec::new();
    for p in points {
        let start = IntVector::from_i64(p);
        if fate.contains_key(&start) {
            continue;
        }
        let mut path: Vec<IntVector> = Vec::new();
        let mut on_path: HashMap<IntVector, usize> = HashMap::new();
        let mut cur = start;
        let outcome = loop {
            if cur.is_zero() {
                break Fate::Terminates(0);
            }
            if let Some(f) = fate.get(&cur) {
                break f.clone();
            }
            if let Some(&i) = on_path.get(&cur) {
                let w = canonical_cycle(&path[i..]);
                let id = cycle_ids.len();
                cycle_ids.push(w.representative.clone());
                out.cycles.insert(w.representative.clone(), w);
                break Fate::Cycles(id);
            }
            if path.len() >= max_steps {
                return Err(Error::StepBudgetExceeded(max_steps));
            }
            on_path.insert(cur.clone(), path.len());
            path.push(cur.clone());
            cur = ds.digit_for(&cur)?.1;
        };
        match outcome {
            Fate::Terminates(tail) => {
                let total = path.len();
                out.max_len = out.max_len.max(total + tail);
                for (i, s) in path.into_iter().enumerate() {
                    fate.insert(s, Fate::Terminates(total - i + tail));
                }
            }
            Fate::Cycles(id) => {
                for s in path {
                    fate.insert(s, Fate::Cycles(id));
                }
            }
        }
    }
    Ok(out)
}

/// Lattice points with Euclidean norm <= rho.
pub(crate) fn ball_points(n: usize, rho: f64, cap: u64, what: &'static str) -> Result<Vec<Vec<i64>>> {
    let r = rho.floor().max(0.0);
    let side = 2.0 * r + 1.0;
    let box_count = side.powi(n as i32);
    if box_count > cap as f64 {
        // Volume of the n-ball as an estimate of the lattice count.
        let vol = std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half_int(n) * rho.powi(n as i32);
        if vol > cap as f64 || box_count > 64.0 * cap as f64 {
            return Err(Error::ResourceLimit { what, needed: format!("{:.0}", vol.max(1.0)), cap });
        }
    }
    let r = r as i64;
    let rho_sq = rho * rho;
    let mut out = Vec::new();
    let mut cur = vec![-r; n];
    'outer: loop {
        let norm: f64 = cur.iter().map(|&c| (c as f64) * (c as f64)).sum();
        if norm <= rho_sq {
            out.push(cur.clone());
        }
        for i in (0..n).rev() {
            if cur[i] < r {
                cur[i] += 1;
                continue 'outer;
            }
            cur[i] = -r;
        }
        break;
    }
    if out.len() as u64 > cap {
        return Err(Error::ResourceLimit { what, needed: out.len().to_string(), cap });
    }
    Ok(out)
}

/// Gamma(n/2 + 1)
fn gamma_half_int(n: usize) -> f64 {
    let mut g = if n.is_multiple_of(2) { 1.0 } else { std::f64::consts::PI.sqrt() / 2.0 };
    let mut k = if n.is_multiple_of(2) { 1.0 } else { 1.5 };
    while k <= n as f64 / 2.0 {
        g *= k;
        k += 1.0;
    }
    g
}

pub fn decide_radix(ds: &DigitSet, opts: &DecideOptions) -> Result<DecisionReport> {
    let ball = absorbing_ball(ds)?;
    let points = ball_points(ds.dim(), ball.rho, opts.cap, "absorbing ball")?;
    let chunk = (points.len() / (4 * rayon::current_num_threads()).max(1)).clamp(256, 65_536);
    let results: Vec<ChunkResult> =
        points.par_chunks(chunk).map(|c| resolve_chunk(c, ds, opts.max_steps)).collect::<Result<_>>()?;
    let mut cycles = BTreeMap::new();
    let mut max_len = 0;
    for r in results {
        max_len = max_len.max(r.max_len);
        cycles.extend(r.cycles);
    }
    let witnesses: Vec<CycleWitness> = cycles.into_values().collect();
    for w in &witnesses {
        if !verify_cycle(w, ds)? {
            return Err(Error::Internal(format!("reported cycle at {} does not replay", w.representative)));
        }
    }
    Ok(DecisionReport {
        yields: witnesses.is_empty(),
        ball_radius: ball.rho,
        points_checked: points.len() as u64,
        witnesses,
        m_contraction: ball.m,
        max_expansion_length: max_len,
        cap: opts.cap,
    })
}

/// D_{A,k}: every sum_{j<k} A^j d_j.
#[derive(Clone, Debug)]
pub struct DkSet {
    pub k: u32,
    pub members: HashSet<IntVector>,
}

pub fn enumerate_dk(ds: &DigitSet, k: u32, cap: u64) -> Result<DkSet> {
    let list = dk_list(ds, k, cap)?;
    let len = list.len();
    let members: HashSet<IntVector> = list.into_iter().collect();
    if members.len() != len {
        return Err(Error::Internal(format!("D_(A,{k}) has {} distinct members, expected {len}", members.len())));
    }
    Ok(DkSet { k, members })
}

/// D_{A,k} as a list, ordered by digit string (d_{k-1} most significant).
pub(crate) fn dk_list(ds: &DigitSet, k: u32, cap: u64) -> Result<Vec<IntVector>> {
    let q = ds.q();
    let total = q.pow(k);
    if total > BigInt::from(cap) {
        return Err(Error::ResourceLimit { what: "D_(A,k)", needed: total.to_string(), cap });
    }
    let a = ds.matrix();
    let mut cur = vec![IntVector::zeros(ds.dim())];
    for _ in 0..k {
        let mut next = Vec::with_capacity(cur.len() * ds.digits().len());
        for s in &cur {
            let as_ = a.mul_vec(s);
            for d in ds.digits() {
                next.push(as_.add(d));
            }
        }
        cur = next;
    }
    debug_assert_eq!(BigInt::from(cur.len()), total);
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::{canonical_digits, validate_digit_set};

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_i64(x)
    }

    fn ds(a: IntMatrix, d: &[&[i64]]) -> DigitSet {
        validate_digit_set(&a, d.iter().map(|x| v(x)).collect()).unwrap()
    }

    fn binary() -> DigitSet {
        ds(IntMatrix::scalar(1, 2), &[&[0], &[1]])
    }

    fn twin_dragon() -> DigitSet {
        ds(IntMatrix::from_i64(&[&[1, 1], &[-1, 1]]), &[&[0, 0], &[1, 0]])
    }

    #[test]
    fn expand_examples() {
        let e = expand(&v(&[5]), &binary(), 100).unwrap();
        assert_eq!(e.digits, vec![v(&[1]), v(&[0]), v(&[1])]);
        assert_eq!(e.status, ExpansionStatus::Terminated { length: 3 });

        let e = expand(&v(&[0, -1]), &twin_dragon(), 100).unwrap();
        assert!(matches!(e.status, ExpansionStatus::Cycle { period: 1, .. }));

        let e = expand(&v(&[-1]), &binary(), 100).unwrap();
        assert_eq!(e.status, ExpansionStatus::Cycle { entry_index: 0, period: 1, cycle_states: vec![v(&[-1])] });

        let e = expand(&v(&[0]), &binary(), 1).unwrap();
        assert!(e.digits.is_empty());
        assert_eq!(e.status, ExpansionStatus::Terminated { length: 0 });
    }

    #[test]
    fn step_budget() {
        assert!(matches!(expand(&v(&[1 << 20]), &binary(), 5), Err(Error::StepBudgetExceeded(5))));
    }

    #[test]
    fn reconstruct_examples() {
        let mk = |digits: Vec<IntVector>, input: IntVector| RadixExpansion {
            status: ExpansionStatus::Terminated { length: digits.len() },
            digits,
            input,
        };
        let two = IntMatrix::scalar(1, 2);
        assert_eq!(reconstruct(&mk(vec![v(&[1]), v(&[0]), v(&[1])], v(&[5])), &two).unwrap(), v(&[5]));
        assert_eq!(reconstruct(&mk(vec![], v(&[0])), &two).unwrap(), v(&[0]));
        let td = IntMatrix::from_i64(&[&[1, 1], &[-1, 1]]);
        assert_eq!(reconstruct(&mk(vec![v(&[1, 0]), v(&[1, 0])], v(&[2, -1])), &td).unwrap(), v(&[2, -1]));
        let cyc = expand(&v(&[-1]), &binary(), 10).unwrap();
        assert!(matches!(reconstruct(&cyc, &two), Err(Error::NotTerminated)));
    }

    #[test]
    fn absorbing_ball_examples() {
        let ternary = ds(IntMatrix::scalar(1, 3), &[&[-1], &[0], &[1]]);
        let b = absorbing_ball(&ternary).unwrap();
        assert_eq!(b.m, 1);
        assert!((b.k - 1.0 / 3.0).abs() < 1e-9);
        assert!(b.rho >= 1.0);
        // every orbit from |x| <= 100 eventually enters the ball
        for x in -100..=100 {
            let mut cur = v(&[x]);
            let mut inside = false;
            for _ in 0..64 {
                if cur.to_f64()[0].abs() <= b.rho {
                    inside = true;
                    break;
                }
                cur = ternary.digit_for(&cur).unwrap().1;
            }
            assert!(inside, "orbit of {x} never entered the ball");
        }

        let b = absorbing_ball(&binary()).unwrap();
        assert_eq!(b.m, 1);
        assert!((b.k - 0.5).abs() < 1e-9);
        assert!(b.rho >= 1.0, "cycle state -1 must lie in the ball");

        // K is linear in the digit bound C
        let norms = inverse_norms(&IntMatrix::from_i64(&[&[1, 1], &[-1, 1]])).unwrap();
        let one = ball_from_norms(&norms, 1.0);
        let two = ball_from_norms(&norms, 2.0);
        assert!((two.k - 2.0 * one.k).abs() < 1e-12);
        assert_eq!(norms.m, 3);
    }

    #[test]
    fn decide_counterexamples() {
        let r = decide_radix(&binary(), &DecideOptions::default()).unwrap();
        assert!(!r.yields);
        assert_eq!(r.witnesses[0].representative, v(&[-1]));

        let r = decide_radix(&twin_dragon(), &DecideOptions::default()).unwrap();
        assert!(!r.yields);
        assert!(r.witnesses.iter().any(|w| w.cycle.contains(&v(&[0, -1]))));
    }

    #[test]
    fn decide_positive_cases() {
        let ternary = ds(IntMatrix::scalar(1, 3), &[&[-1], &[0], &[1]]);
        let r = decide_radix(&ternary, &DecideOptions::default()).unwrap();
        assert!(r.yields);
        assert!(r.witnesses.is_empty());
        // brute force over |x| <= 1000
        for x in -1000..=1000 {
            assert!(expand(&v(&[x]), &ternary, 1000).unwrap().is_terminated());
        }
        let three = canonical_digits(&IntMatrix::scalar(2, 3)).unwrap();
        assert!(decide_radix(&three, &DecideOptions::default()).unwrap().yields);
    }

    #[test]
    fn decide_resource_limit() {
        let opts = DecideOptions { cap: 3, ..Default::default() };
        assert!(matches!(decide_radix(&twin_dragon(), &opts), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn dk_examples() {
        let b = binary();
        let d1 = enumerate_dk(&b, 1, 1000).unwrap();
        assert_eq!(d1.members, b.digits().iter().cloned().collect());
        let d3 = enumerate_dk(&b, 3, 1000).unwrap();
        assert_eq!(d3.members, (0..8).map(|x| v(&[x])).collect());
        let td = enumerate_dk(&twin_dragon(), 2, 1000).unwrap();
        let expect: HashSet<IntVector> = [v(&[0, 0]), v(&[1, 0]), v(&[1, -1]), v(&[2, -1])].into_iter().collect();
        assert_eq!(td.members, expect);
        assert!(matches!(enumerate_dk(&b, 20, 1000), Err(Error::ResourceLimit { .. })));
    }
}
