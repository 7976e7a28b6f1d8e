//! Command-line front end: problem specs, the `analyze` pipeline, batch suites
//! and the twin-dragon figure. Everything prints JSON with integers as
//! decimal strings.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::digits::{canonical_digits_capped, validate_digit_set, DigitSet, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::lattice::{IntMatrix, IntVector};
use crate::radix::{decide_radix, expand, DecideOptions, DecisionReport, DEFAULT_MAX_STEPS};
use crate::sampling::{DEFAULT_DEPTH, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::spectral::{find_beta, is_dilation_matrix, spectral_report, SpectralReport, DEFAULT_KMAX};
use crate::tile::{
    figure_window, interior_probe, interior_with, multiplicity_with, rasterize, render_cells, tile_bounding_radius,
    tile_points, InteriorVerdict, MultiplicityEstimate, ProbeResult, Raster, RenderStyle, TileOptions, TileOracle,
    Window, DEFAULT_PROBE_RADIUS,
};
use crate::wavelet::{
    haar_mra, lowpass_symbol, orthonormality_check, refinement_check, MRAReport, MraOptions, OrthonormalityReport,
    RefinementReport, ScalingFunction, DEFAULT_OVERLAP_THRESHOLD, DEFAULT_REFINEMENT_THRESHOLD,
};

pub const CAP_ENV: &str = "RADIXTILES_CAP";
pub const MULTIPLICITY_TOLERANCE: f64 = 0.05;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CROSS_CHECK: i32 = 2;

/// Classic examples: A = [2] with digits {0,1}, {0,3} and canonical, the twin
/// dragon with {(0,0),(1,0)} and canonical digits, 3 I_1 and 3 I_2.
pub const CLASSIC_SUITE: &str = include_str!("../suites/classic.json");

#[derive(Clone, Debug, Default, PartialEq)]
pub enum DigitSource {
    #[default]
    Canonical,
    Explicit(Vec<IntVector>),
}

impl Serialize for DigitSource {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DigitSource::Canonical => s.serialize_str("canonical"),
            DigitSource::Explicit(d) => d.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for DigitSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Tag(String),
            List(Vec<IntVector>),
        }
        match Raw::deserialize(d)
            .map_err(|_| de::Error::custom("digits must be \"canonical\" or a list of integer vectors"))?
        {
            Raw::Tag(t) if t == "canonical" => Ok(DigitSource::Canonical),
            Raw::Tag(t) => Err(de::Error::custom(format!("unknown digit source {t:?}"))),
            Raw::List(l) => Ok(DigitSource::Explicit(l)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecOptions {
    pub depth: u32,
    pub samples: usize,
    pub seed: u64,
    /// Lattice-point cap; `None` falls back to RADIXTILES_CAP, then the default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    pub kmax: u32,
    pub probe_radius: f64,
    pub max_steps: usize,
}

impl Default for SpecOptions {
    fn default() -> Self {
        SpecOptions {
            depth: DEFAULT_DEPTH,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            cap: None,
            kmax: DEFAULT_KMAX,
            probe_radius: DEFAULT_PROBE_RADIUS,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl SpecOptions {
    pub fn effective_cap(&self) -> Result<u64> {
        match self.cap {
            Some(c) => Ok(c),
            None => env_cap(),
        }
    }

    pub fn decide_options(&self) -> Result<DecideOptions> {
        Ok(DecideOptions { cap: self.effective_cap()?, max_steps: self.max_steps })
    }

    fn tile_options(&self, decide: DecideOptions) -> TileOptions {
        TileOptions {
            depth: self.depth,
            samples: self.samples,
            seed: self.seed,
            probe_radius: self.probe_radius,
            multiplicity_tolerance: MULTIPLICITY_TOLERANCE,
            decide,
        }
    }

    fn mra_options(&self, decide: DecideOptions) -> MraOptions {
        MraOptions {
            k_max: self.kmax,
            samples: self.samples,
            depth: self.depth,
            seed: self.seed,
            refinement_threshold: DEFAULT_REFINEMENT_THRESHOLD,
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            decide,
        }
    }
}

/// The cap from RADIXTILES_CAP if set, otherwise the library default.
pub fn env_cap() -> Result<u64> {
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite() && *c >= 1.0)
            .map(|c| c as u64)
            .ok_or_else(|| Error::Parse(format!("{CAP_ENV}={v:?} is not a positive number"))),
        Err(_) => Ok(DEFAULT_CAP),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub matrix: IntMatrix,
    #[serde(default)]
    pub digits: DigitSource,
    #[serde(default)]
    pub options: SpecOptions,
}

impl ProblemSpec {
    pub fn new(matrix: IntMatrix, digits: DigitSource) -> Self {
        ProblemSpec { name: None, matrix, digits, options: SpecOptions::default() }
    }

    /// Validates explicit digits, or builds the canonical set.
    pub fn digit_set(&self) -> Result<DigitSet> {
        match &self.digits {
            DigitSource::Canonical => canonical_digits_capped(&self.matrix, self.options.effective_cap()?),
            DigitSource::Explicit(d) => validate_digit_set(&self.matrix, d.clone()),
        }
    }
}

pub fn parse_spec(text: &str) -> Result<ProblemSpec> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    pub cases: Vec<ProblemSpec>,
}

pub fn parse_suite(text: &str) -> Result<SuiteFile> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct WaveletSummary {
    pub refinement: RefinementReport,
    pub orthonormality: OrthonormalityReport,
}

/// One `analyze` run. `cross_check` lists every violated consistency rule;
/// it is empty exactly when all of them held.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub seed: u64,
    pub spectral: SpectralReport,
    pub digit_set: DigitSet,
    pub decision: Option<DecisionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision_error: Option<String>,
    pub multiplicity: MultiplicityEstimate,
    pub interior: InteriorVerdict,
    pub probe: ProbeResult,
    pub wavelet: WaveletSummary,
    pub mra: Option<MRAReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mra_error: Option<String>,
    pub cross_check: Vec<String>,
}

/// spectral -> digits -> decide -> multiplicity -> interior -> wavelet.
pub fn analyze(spec: &ProblemSpec) -> Result<AnalysisRecord> {
    let opts = &spec.options;
    let spectral = spectral_report(&spec.matrix)?;
    if !spectral.is_dilation {
        return Err(Error::NotDilation);
    }
    let ds = spec.digit_set()?;
    let decide_opts = opts.decide_options()?;
    let (decision, decision_error) = match decide_radix(&ds, &decide_opts) {
        Ok(r) => (Some(r), None),
        Err(e @ Error::ResourceLimit { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let yields = decision.as_ref().map(|d| d.yields);

    let oracle = TileOracle::new(&ds)?;
    let multiplicity = multiplicity_with(&oracle, opts.samples, opts.depth, opts.seed);
    let probe = interior_probe(&oracle, opts.depth, opts.probe_radius);
    let interior =
        interior_with(&oracle, yields, multiplicity.clone(), &opts.tile_options(decide_opts.clone())).verdict;

    let phi = ScalingFunction::from_oracle(oracle);
    let wavelet = WaveletSummary {
        refinement: refinement_check(&phi, opts.samples, opts.depth, opts.seed),
        orthonormality: orthonormality_check(&phi, opts.samples, opts.depth, opts.seed),
    };
    let (mra, mra_error) = match haar_mra(&spec.matrix, &opts.mra_options(decide_opts)) {
        Ok(r) => (Some(r), None),
        Err(e @ (Error::NoBetaFound(_) | Error::ResourceLimit { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };

    let mut record = AnalysisRecord {
        name: spec.name.clone(),
        seed: opts.seed,
        spectral,
        digit_set: ds,
        decision,
        decision_error,
        multiplicity,
        interior,
        probe,
        wavelet,
        mra,
        mra_error,
        cross_check: Vec::new(),
    };
    record.cross_check = cross_check(&record);
    Ok(record)
}

fn cross_check(r: &AnalysisRecord) -> Vec<String> {
    let mut out = Vec::new();
    let mean = r.multiplicity.mean_multiplicity;
    let tiles = (mean - 1.0).abs() <= MULTIPLICITY_TOLERANCE;
    if mean < 1.0 - MULTIPLICITY_TOLERANCE {
        out.push(format!("mean multiplicity {mean} is below the covering bound"));
    }
    if let Some(d) = &r.decision {
        let numeric = tiles && r.probe.passes();
        if d.yields != numeric {
            out.push(format!(
                "decide = {} but multiplicity {mean} and interior probe ({} outside) say {numeric}",
                d.yields, r.probe.outside
            ));
        }
        if !d.yields && tiles && r.interior != InteriorVerdict::BoundaryByTheorem {
            out.push(format!("decide = false with multiplicity near 1 but interior verdict {:?}", r.interior));
        }
        if r.spectral.mu_exceeds_two && r.digit_set.is_canonical() && !d.yields {
            out.push("sigma_min > 2 with canonical digits but decide = false".into());
        }
    }
    let rate = r.wavelet.refinement.pass_rate;
    if rate < DEFAULT_REFINEMENT_THRESHOLD {
        out.push(format!("refinement pass rate {rate} below {DEFAULT_REFINEMENT_THRESHOLD}"));
    }
    let off = r.wavelet.orthonormality.max_offdiagonal;
    if (off <= DEFAULT_OVERLAP_THRESHOLD) != tiles {
        out.push(format!("max off-diagonal overlap {off} disagrees with multiplicity {mean}"));
    }
    if let Some(m) = &r.mra {
        if !m.decide_yields {
            out.push(format!("MRA built on A^{} without a radix representation", m.beta));
        }
        if !m.verdict {
            out.push(format!("MRA checks failed for A^{}", m.beta));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseOutcome {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<AnalysisRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub case: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub violation: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub cases: Vec<CaseOutcome>,
    pub errors: usize,
    /// Empty exactly when every case passed its cross-checks.
    pub cross_check_ledger: Vec<LedgerEntry>,
}

impl SuiteResult {
    pub fn exit_code(&self) -> i32 {
        if self.cross_check_ledger.is_empty() {
            EXIT_OK
        } else {
            EXIT_CROSS_CHECK
        }
    }
}

/// Runs every case on a pool of `jobs` threads (0 = rayon default).
/// A failing case is recorded and the rest still run; output keeps input order.
pub fn run_suite(suite: &SuiteFile, jobs: usize) -> Result<SuiteResult> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::Internal(e.to_string()))?;
    let cases: Vec<CaseOutcome> = pool.install(|| {
        suite
            .cases
            .par_iter()
            .enumerate()
            .map(|(index, spec)| match analyze(spec) {
                Ok(record) => CaseOutcome { index, name: spec.name.clone(), record: Some(record), error: None },
                Err(e) => CaseOutcome { index, name: spec.name.clone(), record: None, error: Some(e.to_string()) },
            })
            .collect()
    });
    let cross_check_ledger = cases
        .iter()
        .flat_map(|c| {
            c.record.iter().flat_map(|r| &r.cross_check).map(|v| LedgerEntry {
                case: c.index,
                name: c.name.clone(),
                violation: v.clone(),
            })
        })
        .collect();
    let errors = cases.iter().filter(|c| c.error.is_some()).count();
    Ok(SuiteResult { cases, errors, cross_check_ledger })
}

pub fn twin_dragon() -> IntMatrix {
    IntMatrix::from_i64(&[&[1, 1], &[-1, 1]])
}

pub fn twin_dragon_digits() -> Vec<IntVector> {
    vec![IntVector::from_i64(&[0, 0]), IntVector::from_i64(&[1, 0])]
}

#[derive(Clone, Debug)]
pub struct FigureOptions {
    pub matrix: IntMatrix,
    pub digits: DigitSource,
    pub depth: u32,
    pub width: usize,
    pub height: usize,
    pub style: RenderStyle,
    pub cap: u64,
}

impl FigureOptions {
    pub fn twin_dragon() -> Result<Self> {
        Ok(FigureOptions {
            matrix: twin_dragon(),
            digits: DigitSource::Explicit(twin_dragon_digits()),
            depth: 16,
            width: 800,
            height: 800,
            style: RenderStyle::Cells,
            cap: env_cap()?,
        })
    }
}

/// Twin dragon at depth 16, 800x800, drawn as cells in a window fitted to the
/// tile's envelope box (which does not depend on the depth).
pub fn figure1(opts: &FigureOptions) -> Result<Raster> {
    let mut spec = ProblemSpec::new(opts.matrix.clone(), opts.digits.clone());
    spec.options.cap = Some(opts.cap);
    let ds = spec.digit_set()?;
    let window = figure_window(&ds)?;
    render(&ds, opts.depth, opts.width, opts.height, &window, opts.style, opts.cap)
}

fn render(
    ds: &DigitSet,
    depth: u32,
    width: usize,
    height: usize,
    window: &Window,
    style: RenderStyle,
    cap: u64,
) -> Result<Raster> {
    if ds.dim() != 2 {
        return Err(Error::DimensionError { expected: 2, got: ds.dim() });
    }
    if width == 0 || height == 0 {
        return Err(Error::Parse("raster size must be positive".into()));
    }
    match style {
        RenderStyle::Points => Ok(rasterize(&tile_points(ds, depth, cap)?, width, height, window)),
        RenderStyle::Cells => render_cells(ds, depth, width, height, window, cap),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "radixtiles",
    version,
    about = "Radix representations, self-affine tiles and Haar-like wavelets for integer matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Full pipeline on one problem; exit 2 on a cross-check violation
    Analyze(ProblemArgs),
    /// Canonical digit set of A, or validation of --digits
    Digits(ProblemArgs),
    /// Digit expansion of a lattice vector
    Expand {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Vector as JSON, e.g. [5,-3]
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Does A give a radix representation with D?
    Decide(ProblemArgs),
    /// Least power of A that gives a radix representation
    Beta(ProblemArgs),
    #[command(subcommand)]
    Tile(TileCommand),
    #[command(subcommand)]
    Wavelet(WaveletCommand),
    /// Twin dragon raster (overridable matrix and digits)
    Figure1 {
        #[arg(long, allow_hyphen_values = true)]
        matrix: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        digits: Option<String>,
        #[arg(long, default_value_t = 16)]
        depth: u32,
        #[arg(long, default_value_t = 800)]
        width: usize,
        #[arg(long, default_value_t = 800)]
        height: usize,
        /// cells or points
        #[arg(long, default_value = "cells")]
        style: String,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, default_value = "figure1.pgm")]
        out: PathBuf,
    },
    /// Run analyze over every case of a suite file
    Suite {
        /// Suite JSON {"cases": [...]}; omit with --builtin
        file: Option<PathBuf>,
        /// Use the bundled classic examples
        #[arg(long)]
        builtin: bool,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum TileCommand {
    /// Rasterize the depth-k point cloud (PGM, or PNG by extension)
    Render {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 800)]
        width: usize,
        #[arg(long, default_value_t = 800)]
        height: usize,
        /// xmin,xmax,ymin,ymax (default: square of radius R_T)
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// points or cells
        #[arg(long, default_value = "points")]
        style: String,
    },
    /// Monte-Carlo tiling multiplicity
    Multiplicity(ProblemArgs),
    /// Membership of a rational point, e.g. --point '["1/3"]'
    Membership {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Is 0 an interior point of T?
    Interior(ProblemArgs),
}

#[derive(Subcommand, Debug)]
pub enum WaveletCommand {
    /// Refinement and orthonormality checks for chi_T
    Check(ProblemArgs),
    /// beta search plus checks for A^beta
    Mra(ProblemArgs),
    /// Low-pass symbol m0(xi)
    Symbol {
        #[command(flatten)]
        problem: ProblemArgs,
        /// JSON list of reals, e.g. [0.5,0]
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct ProblemArgs {
    /// Problem spec JSON file; flags below override its fields
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Matrix as JSON rows, or @file
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    /// Digits as a JSON list of vectors, "canonical", or @file
    #[arg(long, allow_hyphen_values = true)]
    pub digits: Option<String>,
    /// Use the canonical digit set A(F) ∩ Z^n
    #[arg(long, conflicts_with = "digits")]
    pub canonical: bool,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub probe_radius: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Write output here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_arg(value: &str) -> Result<String> {
    match value.strip_prefix('@') {
        Some(path) => Ok(fs::read_to_string(path)?),
        None => Ok(value.to_string()),
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

impl ProblemArgs {
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let mut spec = match &self.spec {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
            }
            None => {
                let m = self.matrix.as_deref().ok_or_else(|| Error::Parse("--matrix or --spec is required".into()))?;
                ProblemSpec::new(parse_json("--matrix", &read_arg(m)?)?, DigitSource::Canonical)
            }
        };
        if self.spec.is_some() {
            if let Some(m) = &self.matrix {
                spec.matrix = parse_json("--matrix", &read_arg(m)?)?;
            }
        }
        if let Some(d) = &self.digits {
            let text = read_arg(d)?;
            spec.digits =
                if text.trim() == "canonical" { DigitSource::Canonical } else { parse_json("--digits", &text)? };
        }
        if self.canonical {
            spec.digits = DigitSource::Canonical;
        }
        let o = &mut spec.options;
        if let Some(v) = self.depth {
            o.depth = v;
        }
        if let Some(v) = self.samples {
            o.samples = v;
        }
        if let Some(v) = self.seed {
            o.seed = v;
        }
        if let Some(v) = self.kmax {
            o.kmax = v;
        }
        if let Some(v) = self.cap {
            o.cap = Some(v);
        }
        if let Some(v) = self.probe_radius {
            o.probe_radius = v;
        }
        if let Some(v) = self.max_steps {
            o.max_steps = v;
        }
        Ok(spec)
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct SymbolOutput {
    xi: Vec<f64>,
    re: f64,
    im: f64,
    abs: f64,
}

#[derive(Serialize)]
struct RenderOutput {
    path: String,
    width: usize,
    height: usize,
    depth: u32,
    points: String,
    filled: usize,
    filled_fraction: f64,
    window: Window,
}

fn parse_window(s: &str) -> Result<Window> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("--window: {e}")))?;
    match v[..] {
        [x_min, x_max, y_min, y_max] if x_min < x_max && y_min < y_max => Ok(Window { x_min, x_max, y_min, y_max }),
        _ => Err(Error::Parse("--window needs xmin,xmax,ymin,ymax with min < max".into())),
    }
}

fn parse_point(s: &str) -> Result<Vec<BigRational>> {
    let raw: Vec<serde_json::Value> = parse_json("--point", s)?;
    raw.iter()
        .map(|v| {
            let t = match v {
                serde_json::Value::String(t) => t.clone(),
                serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
                _ => return Err(Error::Parse(format!("--point: {v} is not an integer or \"p/q\" string"))),
            };
            BigRational::from_str(t.trim()).map_err(|e| Error::Parse(format!("--point: {t:?}: {e}")))
        })
        .collect()
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Analyze(args) => {
            let record = analyze(&args.to_spec()?)?;
            emit(&record, args.out.as_deref())?;
            for v in &record.cross_check {
                eprintln!("cross-check violation: {v}");
            }
            Ok(if record.cross_check.is_empty() { EXIT_OK } else { EXIT_CROSS_CHECK })
        }
        Command::Digits(args) => {
            let ds = args.to_spec()?.digit_set()?;
            emit(&ds, args.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Expand { problem, x } => {
            let spec = problem.to_spec()?;
            let ds = spec.digit_set()?;
            let x: IntVector = parse_json("--x", &x)?;
            emit(&expand(&x, &ds, spec.options.max_steps)?, problem.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Decide(args) => {
            let spec = args.to_spec()?;
            let report = decide_radix(&spec.digit_set()?, &spec.options.decide_options()?)?;
            emit(&report, args.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Beta(args) => {
            let spec = args.to_spec()?;
            if !is_dilation_matrix(&spec.matrix) {
                return Err(Error::NotDilation);
            }
            let search = find_beta(&spec.matrix, spec.options.kmax, &spec.options.decide_options()?)?;
            emit(&search, args.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Tile(t) => tile_command(t),
        Command::Wavelet(w) => wavelet_command(w),
        Command::Figure1 { matrix, digits, depth, width, height, style, cap, out } => {
            let mut opts = FigureOptions::twin_dragon()?;
            if let Some(m) = matrix {
                opts.matrix = parse_json("--matrix", &read_arg(&m)?)?;
                opts.digits = DigitSource::Canonical;
            }
            if let Some(d) = digits {
                opts.digits = parse_json("--digits", &read_arg(&d)?)?;
            }
            if let Some(c) = cap {
                opts.cap = c;
            }
            opts.depth = depth;
            opts.style = style.parse()?;
            opts.width = width;
            opts.height = height;
            let raster = figure1(&opts)?;
            raster.write(&out)?;
            eprintln!(
                "wrote {} ({}x{}, {} filled pixels)",
                out.display(),
                raster.width,
                raster.height,
                raster.filled()
            );
            Ok(EXIT_OK)
        }
        Command::Suite { file, builtin, jobs, out } => {
            let text = match (&file, builtin) {
                (Some(_), true) => return Err(Error::Parse("give a suite file or --builtin, not both".into())),
                (Some(p), false) => fs::read_to_string(p)?,
                (None, true) => CLASSIC_SUITE.to_string(),
                (None, false) => return Err(Error::Parse("suite file or --builtin is required".into())),
            };
            let suite = parse_suite(&text)?;
            let result = run_suite(&suite, jobs)?;
            emit(&result, out.as_deref())?;
            for e in &result.cross_check_ledger {
                eprintln!("case {}: cross-check violation: {}", e.case, e.violation);
            }
            Ok(result.exit_code())
        }
    }
}

fn tile_command(cmd: TileCommand) -> Result<i32> {
    match cmd {
        TileCommand::Render { problem, width, height, window, style } => {
            let spec = problem.to_spec()?;
            let out = problem.out.clone().ok_or_else(|| Error::Parse("tile render needs --out".into()))?;
            let ds = spec.digit_set()?;
            let window = match window {
                Some(w) => parse_window(&w)?,
                None => Window::centered(tile_bounding_radius(&ds)?),
            };
            let cap = spec.options.effective_cap()?;
            let raster = render(&ds, spec.options.depth, width, height, &window, style.parse()?, cap)?;
            raster.write(&out)?;
            let report = RenderOutput {
                path: out.display().to_string(),
                width,
                height,
                depth: spec.options.depth,
                points: ds.q().pow(spec.options.depth).to_string(),
                filled: raster.filled(),
                filled_fraction: raster.filled_fraction(),
                window,
            };
            emit(&report, None)?;
            Ok(EXIT_OK)
        }
        TileCommand::Multiplicity(args) => {
            let spec = args.to_spec()?;
            let oracle = TileOracle::new(&spec.digit_set()?)?;
            let o = &spec.options;
            emit(&multiplicity_with(&oracle, o.samples, o.depth, o.seed), args.out.as_deref())?;
            Ok(EXIT_OK)
        }
        TileCommand::Membership { problem, point } => {
            let spec = problem.to_spec()?;
            let oracle = TileOracle::new(&spec.digit_set()?)?;
            let cert = oracle.membership(&parse_point(&point)?, spec.options.depth)?;
            emit(&cert, problem.out.as_deref())?;
            Ok(EXIT_OK)
        }
        TileCommand::Interior(args) => {
            let spec = args.to_spec()?;
            let ds = spec.digit_set()?;
            let opts = spec.options.tile_options(spec.options.decide_options()?);
            emit(&crate::tile::interior_zero_test(&ds, &opts)?, args.out.as_deref())?;
            Ok(EXIT_OK)
        }
    }
}

fn wavelet_command(cmd: WaveletCommand) -> Result<i32> {
    match cmd {
        WaveletCommand::Check(args) => {
            let spec = args.to_spec()?;
            let ds = spec.digit_set()?;
            let mra = spec.options.mra_options(spec.options.decide_options()?);
            emit(&crate::wavelet::check_scaling_function(&ds, &mra)?, args.out.as_deref())?;
            Ok(EXIT_OK)
        }
        WaveletCommand::Mra(args) => {
            let spec = args.to_spec()?;
            let mra = spec.options.mra_options(spec.options.decide_options()?);
            emit(&haar_mra(&spec.matrix, &mra)?, args.out.as_deref())?;
            Ok(EXIT_OK)
        }
        WaveletCommand::Symbol { problem, xi } => {
            let spec = problem.to_spec()?;
            let xi: Vec<f64> = parse_json("--xi", &xi)?;
            let m = lowpass_symbol(&spec.digit_set()?, &xi)?;
            emit(&SymbolOutput { xi, re: m.re, im: m.im, abs: m.norm() }, problem.out.as_deref())?;
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trip() {
        let text = r#"{"name":"td","matrix":[[1,1],[-1,1]],"digits":[[0,0],[1,0]],"options":{"depth":9,"seed":3}}"#;
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.options.depth, 9);
        assert_eq!(spec.options.samples, DEFAULT_SAMPLES);
        assert_eq!(spec.digits, DigitSource::Explicit(twin_dragon_digits()));
        let again = parse_spec(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(again, spec);

        let canon = parse_spec(r#"{"matrix":[["3"]]}"#).unwrap();
        assert_eq!(canon.digits, DigitSource::Canonical);
        let s = serde_json::to_string(&canon).unwrap();
        assert!(s.contains(r#""digits":"canonical""#), "{s}");
        assert_eq!(parse_spec(&s).unwrap(), canon);
    }

    #[test]
    fn spec_errors_carry_position() {
        let e = parse_spec("{\"matrix\": [[1, 2],\n [3]]}").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(parse_spec(r#"{"matrix":[[2]],"digits":"balanced"}"#).is_err());
        assert!(parse_spec(r#"{"matrix":[[2]],"bogus":1}"#).is_err());
    }

    #[test]
    fn bundled_suite_parses() {
        let s = parse_suite(CLASSIC_SUITE).unwrap();
        assert_eq!(s.cases.len(), 7);
        for c in &s.cases {
            c.digit_set().unwrap();
        }
    }

    #[test]
    fn point_and_window_parsing() {
        let p = parse_point(r#"["1/3", -2]"#).unwrap();
        assert_eq!(p[0], BigRational::new(1.into(), 3.into()));
        assert_eq!(p[1], BigRational::from_integer((-2).into()));
        assert!(parse_point("[0.5]").is_err());
        assert!(parse_window("-1,1,-2,2").is_ok());
        assert!(parse_window("1,-1,0,1").is_err());
    }
}
