//! The self-affine set T(A,D) = { sum_{j>=1} A^{-j} d_j }.
//!
//! Membership uses the recursion T = ∪_d A^{-1}(T + d): a point x can lie in
//! T only if some branch x -> A x - d stays inside a superset of T forever.
//! Branches leaving it are dead; if every branch dies the point is certified
//! outside. Surviving branches only show the point is within a distance bound
//! of T.
//!
//! The superset is the ball of radius R_T intersected with an envelope: the
//! union of small balls around a fixed-depth point cloud of T. With the ball
//! alone the candidate set at depth k overshoots T by a layer of width about
//! R_T ||A^{-k}||, which for slowly contracting A (the twin dragon contracts by
//! sqrt 2 per level) dominates any multiplicity estimate at moderate depth.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::hash::Hash;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::{DigitSet, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::lattice::IntVector;
use crate::radix::{decide_radix, dk_list, inverse_norms, inverse_power_norm, DecideOptions};
use crate::sampling::{self, DEN};
use crate::spectral::sqrt_ratio_up;

/// Rigorous upper bound R_T on sup_{ξ in T} ||ξ||_2:
/// `C * sum_{i<=m} ||A^{-i}|| / (1 - ||A^{-m}||)` with m from the absorbing ball.
pub fn tile_bounding_radius(ds: &DigitSet) -> Result<f64> {
    let norms = inverse_norms(ds.matrix())?;
    let c = sqrt_ratio_up(&ds.max_digit_norm_sq(), &BigInt::one());
    Ok(bounding_radius_from(&norms.bounds, c))
}

fn bounding_radius_from(bounds: &[f64], c: f64) -> f64 {
    let sum: f64 = bounds.iter().sum();
    let last = *bounds.last().expect("at least one power");
    c * sum / (1.0 - last) * (1.0 + 1e-12)
}

/// Depth-k approximation of T: the q^k points `sum_{j=1}^k A^{-j} d_j`,
/// stored exactly as `numerators / denominator`.
#[derive(Clone, Debug)]
pub struct TileApprox {
    pub depth: u32,
    pub denominator: BigInt,
    pub numerators: Vec<IntVector>,
    /// Every point of T is within this distance of the cloud and vice versa.
    pub cell_diameter: f64,
}

impl TileApprox {
    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn rational_points(&self) -> Vec<Vec<BigRational>> {
        self.numerators
            .iter()
            .map(|p| p.0.iter().map(|x| BigRational::new(x.clone(), self.denominator.clone())).collect())
            .collect()
    }

    pub fn points_f64(&self) -> Vec<Vec<f64>> {
        let den = self.denominator.to_f64().unwrap_or(f64::INFINITY);
        self.numerators.iter().map(|p| p.0.iter().map(|x| x.to_f64().unwrap_or(f64::NAN) / den).collect()).collect()
    }
}

pub fn tile_points(ds: &DigitSet, k: u32, cap: u64) -> Result<TileApprox> {
    let r_t = tile_bounding_radius(ds)?;
    let n = ds.dim();
    if k == 0 {
        return Ok(TileApprox {
            depth: 0,
            denominator: BigInt::one(),
            numerators: vec![IntVector::zeros(n)],
            cell_diameter: r_t,
        });
    }
    // sum_{j=1}^k A^{-j} d_j = A^{-k} sum_{j=1}^k A^{k-j} d_j, and the inner
    // sums range over D_{A,k}.
    let inner = dk_list(ds, k, cap)?;
    let adj_k = ds.adjugate().pow(k);
    let mut den = ds.det().pow(k);
    let flip = den.is_negative();
    if flip {
        den = -den;
    }
    let numerators = inner
        .par_iter()
        .map(|z| {
            let p = adj_k.mul_vec(z);
            if flip {
                p.neg()
            } else {
                p
            }
        })
        .collect();
    Ok(TileApprox { depth: k, denominator: den, numerators, cell_diameter: r_t * inverse_power_norm(ds.matrix(), k) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Outside,
    Candidate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipCertificate {
    pub verdict: Verdict,
    /// Outside: the depth at which the last branch died. Candidate: the full depth.
    pub depth_used: u32,
    /// For Candidate: the point is within this distance of T.
    pub distance_bound: Option<f64>,
}

pub(crate) trait Coord:
    Clone + Eq + Hash + Signed + Integer + ToPrimitive + FromPrimitive + Send + Sync
{
}

impl<T> Coord for T where T: Clone + Eq + Hash + Signed + Integer + ToPrimitive + FromPrimitive + Send + Sync {}

fn convert<T: Coord>(x: &BigInt) -> Option<T> {
    T::from_str_radix(&x.to_string(), 10).ok()
}

/// Upper limit on the size of the envelope point cloud.
pub const ENVELOPE_POINTS: u64 = 1 << 18;

/// Rigorous outer approximation of T: the points `p_s = sum_{j<=L} A^{-j} d_j`
/// over all strings of length L, each with a ball of radius `rho`.
///
/// Every ξ in T is `p_s + A^{-L} η` with η in T, so ||ξ - p_s|| <= ||A^{-L}|| R
/// for any radius R of T. R is bootstrapped as max ||p_s|| + ||A^{-L}|| R_T,
/// then rho = ||A^{-L}|| R, inflated to absorb floating-point error in p_s.
#[derive(Debug)]
pub(crate) struct Envelope {
    n: usize,
    rho: f64,
    cell: f64,
    points: Vec<f64>,
    grid: HashMap<Vec<i64>, Vec<u32>>,
}

impl Envelope {
    fn build(ds: &DigitSet, r_t: f64) -> Option<Envelope> {
        let q = ds.digits().len() as u64;
        let mut level = 0u32;
        let mut count = 1u64;
        while count.saturating_mul(q) <= ENVELOPE_POINTS {
            count *= q;
            level += 1;
        }
        if level == 0 {
            return None;
        }
        let n = ds.dim();
        let det = ds.det().to_f64()?;
        let inv: Vec<f64> =
            (0..n * n).map(|k| ds.adjugate().get(k / n, k % n).to_f64().map(|x| x / det)).collect::<Option<_>>()?;
        let digits: Vec<Vec<f64>> = ds.digits().iter().map(|d| d.to_f64()).collect();
        let mut points: Vec<f64> = vec![0.0; n];
        for _ in 0..level {
            let mut next = Vec::with_capacity(points.len() * digits.len());
            for d in &digits {
                for p in points.chunks(n) {
                    let v: Vec<f64> = p.iter().zip(d).map(|(a, b)| a + b).collect();
                    for i in 0..n {
                        next.push((0..n).map(|j| inv[i * n + j] * v[j]).sum());
                    }
                }
            }
            points = next;
        }
        let contraction = inverse_power_norm(ds.matrix(), level);
        let max_norm = points.chunks(n).map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0f64, f64::max);
        let radius = (max_norm + contraction * r_t).min(r_t);
        let rho = contraction * radius * (1.0 + 1e-9) + 1e-9;
        if !rho.is_finite() {
            return None;
        }
        // cells of width 2 rho: each ball meets at most 2^n cells
        let cell = 2.0 * rho;
        let mut grid: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
        for (idx, p) in points.chunks(n).enumerate() {
            let lo: Vec<i64> = p.iter().map(|&x| ((x - rho) / cell).floor() as i64).collect();
            let hi: Vec<i64> = p.iter().map(|&x| ((x + rho) / cell).floor() as i64).collect();
            let mut cur = lo.clone();
            'cells: loop {
                grid.entry(cur.clone()).or_default().push(idx as u32);
                for i in (0..n).rev() {
                    if cur[i] < hi[i] {
                        cur[i] += 1;
                        continue 'cells;
                    }
                    cur[i] = lo[i];
                }
                break;
            }
        }
        Some(Envelope { n, rho, cell, points, grid })
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.n)
            .map(|i| {
                let (lo, hi) = self
                    .points
                    .iter()
                    .skip(i)
                    .step_by(self.n)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
                (lo - self.rho, hi + self.rho)
            })
            .collect()
    }

    fn contains(&self, y: &[f64]) -> bool {
        let key: Vec<i64> = y.iter().map(|&x| (x / self.cell).floor() as i64).collect();
        let rho_sq = self.rho * self.rho;
        self.grid.get(&key).is_some_and(|ids| {
            ids.iter().any(|&i| {
                let p = &self.points[i as usize * self.n..(i as usize + 1) * self.n];
                p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= rho_sq
            })
        })
    }
}

/// Branch explorer over numerators with a common denominator.
#[derive(Clone, Debug)]
struct Explorer<T> {
    n: usize,
    a: Vec<T>,
    digits: Vec<Vec<T>>,
    radius_sq: f64,
    envelope: Option<Arc<Envelope>>,
}

impl<T: Coord> Explorer<T> {
    fn new(ds: &DigitSet, radius: f64, envelope: Option<Arc<Envelope>>) -> Option<Self> {
        let n = ds.dim();
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(convert(ds.matrix().get(i, j))?);
            }
        }
        let digits =
            ds.digits().iter().map(|d| d.0.iter().map(convert).collect::<Option<Vec<T>>>()).collect::<Option<_>>()?;
        Some(Explorer { n, a, digits, radius_sq: radius * radius, envelope })
    }

    fn alive(&self, s: &[T], den_f: f64) -> bool {
        let y: Vec<f64> = s.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY) / den_f).collect();
        if y.iter().any(|f| f.is_nan()) {
            // both parts overflowed f64; keeping the branch is always sound
            return true;
        }
        let norm: f64 = y.iter().map(|f| f * f).sum();
        norm <= self.radius_sq && self.envelope.as_ref().is_none_or(|e| e.contains(&y))
    }

    /// For each root, the number of levels some branch survives, capped at
    /// `depth`; `None` when the root itself is outside the ball.
    fn survival(&self, roots: &[Vec<T>], den: &T, depth: u32) -> Vec<Option<u32>> {
        let den_f = den.to_f64().unwrap_or(f64::INFINITY);
        let scaled: Vec<Vec<T>> =
            self.digits.iter().map(|d| d.iter().map(|x| x.clone() * den.clone()).collect()).collect();

        let mut layers: Vec<Vec<Vec<T>>> = vec![Vec::new()];
        let mut index: HashMap<Vec<T>, usize> = HashMap::new();
        let root_idx: Vec<Option<usize>> = roots
            .iter()
            .map(|r| {
                if !self.alive(r, den_f) {
                    return None;
                }
                Some(*index.entry(r.clone()).or_insert_with(|| {
                    layers[0].push(r.clone());
                    layers[0].len() - 1
                }))
            })
            .collect();

        let mut children: Vec<Vec<Vec<usize>>> = Vec::new();
        for level in 0..depth as usize {
            let mut next_index: HashMap<Vec<T>, usize> = HashMap::new();
            let mut next: Vec<Vec<T>> = Vec::new();
            let mut kids = Vec::with_capacity(layers[level].len());
            for s in &layers[level] {
                let as_: Vec<T> = (0..self.n)
                    .map(|i| (0..self.n).fold(T::zero(), |acc, j| acc + self.a[i * self.n + j].clone() * s[j].clone()))
                    .collect();
                let mut mine = Vec::new();
                for d in &scaled {
                    let c: Vec<T> = as_.iter().zip(d).map(|(x, y)| x.clone() - y.clone()).collect();
                    if !self.alive(&c, den_f) {
                        continue;
                    }
                    let id = *next_index.entry(c.clone()).or_insert_with(|| {
                        next.push(c);
                        next.len() - 1
                    });
                    mine.push(id);
                }
                kids.push(mine);
            }
            children.push(kids);
            layers.push(next);
            if layers[level + 1].is_empty() {
                break;
            }
        }

        // reach[level][i]: deepest level reachable from state i of `level`
        let top = layers.len() - 1;
        let mut reach: Vec<u32> = vec![top as u32; layers[top].len()];
        for level in (0..top).rev() {
            reach =
                children[level].iter().map(|ks| ks.iter().map(|&c| reach[c]).max().unwrap_or(level as u32)).collect();
        }
        root_idx.into_iter().map(|i| i.map(|i| reach[i])).collect()
    }
}

fn certificate(reach: Option<u32>, depth: u32, delta: f64) -> MembershipCertificate {
    match reach {
        Some(r) if r >= depth => {
            MembershipCertificate { verdict: Verdict::Candidate, depth_used: depth, distance_bound: Some(delta) }
        }
        Some(r) => MembershipCertificate { verdict: Verdict::Outside, depth_used: r + 1, distance_bound: None },
        None => MembershipCertificate { verdict: Verdict::Outside, depth_used: 0, distance_bound: None },
    }
}

/// Membership oracle for T(A,D) with precomputed geometry.
#[derive(Clone, Debug)]
pub struct TileOracle {
    ds: DigitSet,
    r_t: f64,
    exact: Explorer<BigInt>,
    /// Fixed-width explorer for sample points over 2^32, when no
    /// intermediate value can overflow.
    fast: Option<Explorer<i128>>,
    deltas: std::sync::Arc<std::sync::Mutex<HashMap<u32, f64>>>,
}

impl TileOracle {
    pub fn new(ds: &DigitSet) -> Result<Self> {
        let r_t = tile_bounding_radius(ds)?;
        Ok(Self::with_radius(ds, r_t))
    }

    fn with_radius(ds: &DigitSet, r_t: f64) -> Self {
        let envelope = Envelope::build(ds, r_t).map(Arc::new);
        let exact = Explorer::new(ds, r_t, envelope.clone()).expect("BigInt conversion cannot fail");
        let row = ds.matrix().max_abs_row_sum().to_f64().unwrap_or(f64::INFINITY);
        let dmax = ds.max_digit_norm_sq().to_f64().unwrap_or(f64::INFINITY).sqrt();
        let bound = (row * (r_t + 2.0) * (ds.dim() as f64) + dmax + 2.0) * DEN as f64;
        let fast = if bound < 2f64.powi(110) { Explorer::new(ds, r_t, envelope) } else { None };
        TileOracle { ds: ds.clone(), r_t, exact, fast, deltas: Default::default() }
    }

    pub fn digit_set(&self) -> &DigitSet {
        &self.ds
    }

    pub fn bounding_radius(&self) -> f64 {
        self.r_t
    }

    /// Coordinate box containing T: the envelope's box, clipped to the ball.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let r = self.r_t;
        match self.exact.envelope.as_ref() {
            Some(e) => e.bounds().into_iter().map(|(lo, hi)| (lo.max(-r), hi.min(r))).collect(),
            None => vec![(-r, r); self.ds.dim()],
        }
    }

    /// δ = R_T * ||A^{-depth}||
    pub fn distance_bound(&self, depth: u32) -> f64 {
        let mut cache = self.deltas.lock().expect("poisoned");
        *cache.entry(depth).or_insert_with(|| self.r_t * inverse_power_norm(self.ds.matrix(), depth))
    }

    pub fn membership(&self, x: &[BigRational], depth: u32) -> Result<MembershipCertificate> {
        if x.len() != self.ds.dim() {
            return Err(Error::DimensionMismatch { expected: self.ds.dim(), got: x.len() });
        }
        let den = x.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let root: Vec<BigInt> = x.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        let reach = self.exact.survival(&[root], &den, depth)[0];
        Ok(certificate(reach, depth, self.distance_bound(depth)))
    }

    /// Survival depths for points given as numerators over 2^32.
    pub(crate) fn survival_dyadic(&self, roots: &[Vec<i128>], depth: u32) -> Vec<Option<u32>> {
        match &self.fast {
            Some(e) => e.survival(roots, &DEN, depth),
            None => {
                let big: Vec<Vec<BigInt>> =
                    roots.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
                self.exact.survival(&big, &BigInt::from(DEN), depth)
            }
        }
    }

    /// All k in Z^n with x - k a Candidate at `depth`, for x = num / 2^32.
    pub(crate) fn covering_translates(&self, x: &[i128], depth: u32) -> Vec<Vec<i64>> {
        let n = x.len();
        let xf: Vec<f64> = x.iter().map(|&v| v as f64 / DEN as f64).collect();
        let lo: Vec<i64> = xf.iter().map(|&c| (c - self.r_t).ceil() as i64).collect();
        let hi: Vec<i64> = xf.iter().map(|&c| (c + self.r_t).floor() as i64).collect();
        let mut ks = Vec::new();
        let mut roots = Vec::new();
        let mut cur = lo.clone();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return ks;
        }
        'outer: loop {
            roots.push((0..n).map(|i| x[i] - (cur[i] as i128) * DEN).collect::<Vec<i128>>());
            ks.push(cur.clone());
            for i in (0..n).rev() {
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    continue 'outer;
                }
                cur[i] = lo[i];
            }
            break;
        }
        let reach = self.survival_dyadic(&roots, depth);
        ks.into_iter().zip(reach).filter(|(_, r)| r.is_some_and(|r| r >= depth)).map(|(k, _)| k).collect()
    }
}

pub fn membership(x: &[BigRational], ds: &DigitSet, max_depth: u32) -> Result<MembershipCertificate> {
    TileOracle::new(ds)?.membership(x, max_depth)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityEstimate {
    pub sample_count: usize,
    pub mean_multiplicity: f64,
    pub min: u64,
    pub max: u64,
    pub depth: u32,
    pub seed: u64,
    /// Counts are inflated near ∂T by points within this distance.
    pub distance_bound: f64,
}

/// Average number of lattice translates of T covering a uniform point of F.
pub fn multiplicity_estimate(ds: &DigitSet, samples: usize, depth: u32, seed: u64) -> Result<MultiplicityEstimate> {
    let oracle = TileOracle::new(ds)?;
    Ok(multiplicity_with(&oracle, samples, depth, seed))
}

pub fn multiplicity_with(oracle: &TileOracle, samples: usize, depth: u32, seed: u64) -> MultiplicityEstimate {
    let n = oracle.ds.dim();
    let counts: Vec<u64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let x = sampling::point_in_unit_cube(&mut sampling::rng_for(seed, i), n);
            oracle.covering_translates(&x, depth).len() as u64
        })
        .collect();
    let total: u64 = counts.iter().sum();
    MultiplicityEstimate {
        sample_count: samples,
        mean_multiplicity: if samples == 0 { 0.0 } else { total as f64 / samples as f64 },
        min: counts.iter().copied().min().unwrap_or(0),
        max: counts.iter().copied().max().unwrap_or(0),
        depth,
        seed,
        distance_bound: oracle.distance_bound(depth),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub radius: f64,
    pub points: usize,
    pub outside: usize,
    pub depth: u32,
    pub distance_bound: f64,
}

impl ProbeResult {
    /// No probe point was certified outside T.
    pub fn passes(&self) -> bool {
        self.outside == 0
    }
}

pub const PROBE_STEPS: i64 = 4;
pub const DEFAULT_PROBE_RADIUS: f64 = 0.1;

/// Probes the grid `radius * z / PROBE_STEPS`, z in Z^n, ||z|| <= PROBE_STEPS.
pub fn interior_probe(oracle: &TileOracle, depth: u32, radius: f64) -> ProbeResult {
    let n = oracle.ds.dim();
    let step = (radius / PROBE_STEPS as f64 * DEN as f64).round() as i128;
    let mut roots = Vec::new();
    let mut cur = vec![-PROBE_STEPS; n];
    'outer: loop {
        if cur.iter().map(|c| c * c).sum::<i64>() <= PROBE_STEPS * PROBE_STEPS {
            roots.push(cur.iter().map(|&c| c as i128 * step).collect::<Vec<i128>>());
        }
        for i in (0..n).rev() {
            if cur[i] < PROBE_STEPS {
                cur[i] += 1;
                continue 'outer;
            }
            cur[i] = -PROBE_STEPS;
        }
        break;
    }
    let outside = oracle.survival_dyadic(&roots, depth).into_iter().filter(|r| !r.is_some_and(|r| r >= depth)).count();
    ProbeResult { radius, points: roots.len(), outside, depth, distance_bound: oracle.distance_bound(depth) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteriorVerdict {
    InteriorByTheorem,
    BoundaryByTheorem,
    LikelyInterior,
    LikelyBoundary,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct InteriorReport {
    pub verdict: InteriorVerdict,
    /// `None` when the decision hit a resource limit.
    pub decide_yields: Option<bool>,
    pub multiplicity: Option<MultiplicityEstimate>,
    pub probe: Option<ProbeResult>,
}

#[derive(Clone, Debug)]
pub struct TileOptions {
    pub depth: u32,
    pub samples: usize,
    pub seed: u64,
    pub probe_radius: f64,
    pub multiplicity_tolerance: f64,
    pub decide: DecideOptions,
}

impl Default for TileOptions {
    fn default() -> Self {
        TileOptions {
            depth: sampling::DEFAULT_DEPTH,
            samples: sampling::DEFAULT_SAMPLES,
            seed: sampling::DEFAULT_SEED,
            probe_radius: DEFAULT_PROBE_RADIUS,
            multiplicity_tolerance: 0.05,
            decide: DecideOptions::default(),
        }
    }
}

/// Is the origin an interior point of T?
///
/// A radix representation forces 0 into the interior. Without one, a Z^n
/// tiling forces 0 onto the boundary. Only when neither applies is the
/// answer guessed from a probe grid around 0.
pub fn interior_zero_test(ds: &DigitSet, opts: &TileOptions) -> Result<InteriorReport> {
    let decide_yields = match decide_radix(ds, &opts.decide) {
        Ok(r) => Some(r.yields),
        Err(Error::ResourceLimit { .. }) => None,
        Err(e) => return Err(e),
    };
    if decide_yields == Some(true) {
        return Ok(InteriorReport {
            verdict: InteriorVerdict::InteriorByTheorem,
            decide_yields,
            multiplicity: None,
            probe: None,
        });
    }
    let oracle = TileOracle::new(ds)?;
    let mult = multiplicity_with(&oracle, opts.samples, opts.depth, opts.seed);
    Ok(interior_with(&oracle, decide_yields, mult, opts))
}

/// The verdict logic of [`interior_zero_test`] with the decision and the
/// multiplicity estimate already in hand.
pub fn interior_with(
    oracle: &TileOracle,
    decide_yields: Option<bool>,
    mult: MultiplicityEstimate,
    opts: &TileOptions,
) -> InteriorReport {
    if decide_yields == Some(true) {
        return InteriorReport {
            verdict: InteriorVerdict::InteriorByTheorem,
            decide_yields,
            multiplicity: Some(mult),
            probe: None,
        };
    }
    let tiles = (mult.mean_multiplicity - 1.0).abs() <= opts.multiplicity_tolerance;
    if decide_yields == Some(false) && tiles {
        return InteriorReport {
            verdict: InteriorVerdict::BoundaryByTheorem,
            decide_yields,
            multiplicity: Some(mult),
            probe: None,
        };
    }
    let probe = interior_probe(oracle, opts.depth, opts.probe_radius);
    let verdict = if !probe.passes() {
        InteriorVerdict::LikelyBoundary
    } else if probe.distance_bound >= probe.radius {
        InteriorVerdict::Inconclusive
    } else {
        InteriorVerdict::LikelyInterior
    };
    InteriorReport { verdict, decide_yields, multiplicity: Some(mult), probe: Some(probe) }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn centered(radius: f64) -> Self {
        Window { x_min: -radius, x_max: radius, y_min: -radius, y_max: radius }
    }
}

/// Binary raster, row-major from the top-left corner; 1 = filled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn filled(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != 0).count()
    }

    pub fn filled_fraction(&self) -> f64 {
        self.filled() as f64 / (self.width * self.height) as f64
    }

    /// Binary PGM (P5): filled pixels black, background white.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().map(|&p| if p != 0 { 0u8 } else { 255u8 }));
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_pgm())?;
        Ok(())
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path)?;
        let mut enc = png::Encoder::new(BufWriter::new(file), self.width as u32, self.height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| Error::Io(std::io::Error::other(e)))?;
        let data: Vec<u8> = self.pixels.iter().map(|&p| if p != 0 { 0 } else { 255 }).collect();
        writer.write_image_data(&data).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        writer.finish().map_err(|e| Error::Io(std::io::Error::other(e)))?;
        Ok(())
    }

    /// Writes PNG when the extension is `.png`, PGM otherwise.
    pub fn write(&self, path: &Path) -> Result<()> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("png") => self.write_png(path),
            _ => self.write_pgm(path),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_pgm())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderStyle {
    /// Each point of the depth-k cloud marks the pixel containing it.
    #[default]
    Points,
    /// Each point A^{-k} e, e in D_{A,k}, is drawn as its cell
    /// A^{-k}(e + [0,1)^2). The cells are disjoint with total area 1 at every
    /// depth, so the filled area does not creep upward as k grows.
    Cells,
}

impl FromStr for RenderStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "points" => Ok(RenderStyle::Points),
            "cells" => Ok(RenderStyle::Cells),
            _ => Err(Error::Parse(format!("unknown render style {s:?} (points, cells)"))),
        }
    }
}

/// Square window around the envelope box of T with a 5% margin.
pub fn figure_window(ds: &DigitSet) -> Result<Window> {
    if ds.dim() != 2 {
        return Err(Error::DimensionError { expected: 2, got: ds.dim() });
    }
    let b = TileOracle::new(ds)?.bounding_box();
    let (cx, cy) = ((b[0].0 + b[0].1) / 2.0, (b[1].0 + b[1].1) / 2.0);
    let half = (b[0].1 - b[0].0).max(b[1].1 - b[1].0) / 2.0 * 1.05;
    Ok(Window { x_min: cx - half, x_max: cx + half, y_min: cy - half, y_max: cy + half })
}

/// `(numerators, e)` with `xs[i] = numerators[i] / 2^e` exactly.
fn common_dyadic(xs: &[f64]) -> (Vec<BigInt>, u32) {
    let parts: Vec<(u64, i16, i8)> = xs.iter().map(|x| x.integer_decode()).collect();
    let e = parts.iter().map(|&(m, exp, _)| if m == 0 { 0 } else { -(exp as i32) }).max().unwrap_or(0).max(0);
    let nums = parts
        .iter()
        .map(|&(m, exp, sign)| {
            let v = BigInt::from(m) << ((exp as i32 + e) as u32);
            if sign < 0 {
                -v
            } else {
                v
            }
        })
        .collect();
    (nums, e as u32)
}

/// Cell rendering: a pixel is filled iff floor(A^k c) lies in D_{A,k} for its
/// centre c, decided exactly.
pub fn render_cells(ds: &DigitSet, k: u32, width: usize, height: usize, w: &Window, cap: u64) -> Result<Raster> {
    if ds.dim() != 2 {
        return Err(Error::DimensionError { expected: 2, got: ds.dim() });
    }
    let inner: HashSet<IntVector> = dk_list(ds, k, cap)?.into_iter().collect();
    let ak = ds.matrix().pow(k);
    let xs: Vec<f64> = (0..width).map(|i| w.x_min + (i as f64 + 0.5) * (w.x_max - w.x_min) / width as f64).collect();
    let ys: Vec<f64> = (0..height).map(|j| w.y_max - (j as f64 + 0.5) * (w.y_max - w.y_min) / height as f64).collect();
    let mut both = xs.clone();
    both.extend(&ys);
    let (nums, e) = common_dyadic(&both);
    let (xn, yn) = nums.split_at(width);
    let u: Vec<[BigInt; 2]> = xn.iter().map(|x| [ak.get(0, 0) * x, ak.get(1, 0) * x]).collect();
    let v: Vec<[BigInt; 2]> = yn.iter().map(|y| [ak.get(0, 1) * y, ak.get(1, 1) * y]).collect();
    let pixels: Vec<u8> = v
        .par_iter()
        .flat_map_iter(|vy| {
            u.iter().map(|ux| {
                // >> on BigInt rounds toward negative infinity
                let z = IntVector(vec![(&ux[0] + &vy[0]) >> e, (&ux[1] + &vy[1]) >> e]);
                inner.contains(&z) as u8
            })
        })
        .collect();
    Ok(Raster { width, height, pixels })
}

pub fn render_tile_2d(ds: &DigitSet, k: u32, width: usize, height: usize, window: Option<Window>) -> Result<Raster> {
    if ds.dim() != 2 {
        return Err(Error::DimensionError { expected: 2, got: ds.dim() });
    }
    let window = match window {
        Some(w) => w,
        None => Window::centered(tile_bounding_radius(ds)?),
    };
    let approx = tile_points(ds, k, DEFAULT_CAP.max(1 << 22))?;
    Ok(rasterize(&approx, width, height, &window))
}

pub fn rasterize(approx: &TileApprox, width: usize, height: usize, w: &Window) -> Raster {
    let mut pixels = vec![0u8; width * height];
    let sx = width as f64 / (w.x_max - w.x_min);
    let sy = height as f64 / (w.y_max - w.y_min);
    for p in approx.points_f64() {
        let col = ((p[0] - w.x_min) * sx).floor();
        let row = ((w.y_max - p[1]) * sy).floor();
        if col >= 0.0 && row >= 0.0 && (col as usize) < width && (row as usize) < height {
            pixels[row as usize * width + col as usize] = 1;
        }
    }
    Raster { width, height, pixels }
}

/// Exact rational from an f64 (every finite f64 is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::validate_digit_set;
    use crate::lattice::IntMatrix;

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

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn bounding_radius_examples() {
        let rb = tile_bounding_radius(&binary()).unwrap();
        assert!((1.0..1.0 + 1e-9).contains(&rb), "{rb}");
        let ternary = ds(IntMatrix::scalar(1, 3), &[&[-1], &[0], &[1]]);
        let rt = tile_bounding_radius(&ternary).unwrap();
        assert!((0.5..0.5 + 1e-9).contains(&rt), "{rt}");
        assert!((bounding_radius_from(&[0.5], 2.0) - 2.0 * bounding_radius_from(&[0.5], 1.0)).abs() < 1e-12);
    }

    #[test]
    fn tile_points_examples() {
        let t = tile_points(&binary(), 2, 1000).unwrap();
        let mut pts: Vec<BigRational> = t.rational_points().into_iter().map(|p| p[0].clone()).collect();
        pts.sort();
        assert_eq!(pts, vec![r(0, 1), r(1, 4), r(1, 2), r(3, 4)]);

        let t = tile_points(&twin_dragon(), 1, 1000).unwrap();
        let mut pts = t.rational_points();
        pts.sort();
        assert_eq!(pts, vec![vec![r(0, 1), r(0, 1)], vec![r(1, 2), r(1, 2)]]);

        let t = tile_points(&twin_dragon(), 0, 1000).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.numerators[0].is_zero());
    }

    #[test]
    fn membership_examples() {
        let b = binary();
        let far = membership(&[r(5, 1)], &b, 10).unwrap();
        assert_eq!(far.verdict, Verdict::Outside);
        assert_eq!(far.depth_used, 0);
        let third = membership(&[r(1, 3)], &b, 20).unwrap();
        assert_eq!(third.verdict, Verdict::Candidate);
        assert!(third.distance_bound.unwrap() <= 2f64.powi(-19));
        let neg = membership(&[r(-1, 3)], &b, 20).unwrap();
        assert_eq!(neg.verdict, Verdict::Outside);
        // boundary points of [0,1] are in T
        assert_eq!(membership(&[r(0, 1)], &b, 20).unwrap().verdict, Verdict::Candidate);
        assert_eq!(membership(&[r(1, 1)], &b, 20).unwrap().verdict, Verdict::Candidate);
        assert!(matches!(membership(&[r(0, 1), r(0, 1)], &b, 3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn multiplicity_interval_cases() {
        let m = multiplicity_estimate(&binary(), 2000, 14, 1).unwrap();
        assert!((m.mean_multiplicity - 1.0).abs() < 0.01, "{m:?}");
        let three = ds(IntMatrix::scalar(1, 2), &[&[0], &[3]]);
        let m = multiplicity_estimate(&three, 2000, 14, 1).unwrap();
        assert!((m.mean_multiplicity - 3.0).abs() < 0.02, "{m:?}");
    }

    #[test]
    fn interior_examples() {
        let opts = TileOptions { samples: 2000, ..Default::default() };
        let r = interior_zero_test(&binary(), &opts).unwrap();
        assert_eq!(r.verdict, InteriorVerdict::BoundaryByTheorem);
        let ternary = ds(IntMatrix::scalar(1, 3), &[&[-1], &[0], &[1]]);
        assert_eq!(interior_zero_test(&ternary, &opts).unwrap().verdict, InteriorVerdict::InteriorByTheorem);
        let three = ds(IntMatrix::scalar(1, 2), &[&[0], &[3]]);
        assert_eq!(interior_zero_test(&three, &opts).unwrap().verdict, InteriorVerdict::LikelyBoundary);
    }

    #[test]
    fn render_small_cases() {
        let td = twin_dragon();
        let one = render_tile_2d(&td, 0, 9, 9, Some(Window::centered(1.0))).unwrap();
        assert_eq!(one.filled(), 1);
        assert_eq!(one.pixels[4 * 9 + 4], 1);
        let coarse = render_tile_2d(&td, 4, 200, 200, None).unwrap();
        assert!(coarse.filled() <= 16 && coarse.filled() > 1);
        let pgm = coarse.to_pgm();
        assert!(pgm.starts_with(b"P5\n200 200\n255\n"));
        assert_eq!(pgm.len(), "P5\n200 200\n255\n".len() + 200 * 200);
        assert!(matches!(
            render_tile_2d(&binary(), 3, 10, 10, None),
            Err(Error::DimensionError { expected: 2, got: 1 })
        ));
    }
}
