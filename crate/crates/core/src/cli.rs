//! Command-line front end.
//!
//! Every subcommand prints CSV or JSON on standard output, or writes it to
//! `--out`. JSON output embeds the run manifest; CSV written to a file gets a
//! `<file>.manifest.json` companion. Exit status is 0 on success, 2 when the
//! library rejects the inputs and 64 on usage errors.

use std::f64::consts::LOG2_E;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::asymptotics::{
    alpha_bicm, alpha_bicm_uniform, alpha_bicm_uniform_exact, alpha_cm, gap_table, is_foo, limit_table,
    AlphaResult, TableEntry, FOO_TOLERANCE,
};
use crate::capacity::{
    awgn_inverse, capacity_curve, f_curve, log_grid, min_ebn0_search, zero_rate_ebn0, CapacityFunctional,
    CapacityKind, DEFAULT_RATE_POINTS,
};
use crate::constellation::{BitDistribution, ChannelSpec, Constellation, InputAlphabet, SymbolDistribution};
use crate::error::{Error, Result};
use crate::format::csv_float;
use crate::hadamard::ht;
use crate::labeling::{Labeling, LabelingKind};
use crate::quadrature::{QuadratureSpec, DEFAULT_NODES};
use crate::search::{distinct_value_count_of_pmf, enumerate_alpha_classes, SearchOptions, DEFAULT_MAX_SIZE};
use crate::shaping::{shaped_f_curve, ShapingSearch, DEFAULT_FINE_STEP, DEFAULT_STEP};

/// Environment variable holding the default Gauss-Hermite order.
pub const QUAD_NODES_ENV: &str = "BICM_QUAD_NODES";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "bicm",
    version,
    about = "Capacity, first-order asymptotics and labeling analysis for bit-interleaved coded modulation"
)]
struct Cli {
    /// Worker threads for sweeps and searches (0: one per core)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capacity against SNR
    Capacity(CapacityCmd),
    /// Minimum Eb/N0 f(Rc) on a rate grid
    FCurve(FCurveCmd),
    /// SNR gap to the AWGN capacity on a rate grid
    Gap(GapCmd),
    /// Minimum Eb/N0 over all rates
    MinEbn0(MinEbn0Cmd),
    /// First-order coefficient and zero-rate Eb/N0
    Alpha(AlphaCmd),
    /// First-order optimality test and projection matrix
    FooCheck(FooCheckCmd),
    /// Hadamard spectrum of the alphabet in natural label order
    Ht(HtCmd),
    /// Census of the first-order coefficient over all labelings
    SearchLabelings(SearchCmd),
    /// Grid search for the capacity-maximizing bit distribution
    Shape(ShapeCmd),
    /// Zero-rate limit and gap tables from closed forms
    Tables(TablesCmd),
}

/// `pam:M`, `psk:M`, `qam:M1xM2` or `file:PATH`.
#[derive(Debug, Clone, PartialEq)]
enum AlphabetSpec {
    Pam(usize),
    Psk(usize),
    Qam(usize, usize),
    File(PathBuf),
}

impl FromStr for AlphabetSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (family, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("expected pam:M, psk:M, qam:M1xM2 or file:PATH, got `{s}`"))?;
        let size = |v: &str| v.parse::<usize>().map_err(|_| format!("bad alphabet size `{v}`"));
        match family.to_ascii_lowercase().as_str() {
            "pam" => Ok(AlphabetSpec::Pam(size(arg)?)),
            "psk" => Ok(AlphabetSpec::Psk(size(arg)?)),
            "qam" => {
                let (a, b) = arg
                    .split_once(['x', 'X'])
                    .ok_or_else(|| format!("expected qam:M1xM2, got `{s}`"))?;
                Ok(AlphabetSpec::Qam(size(a)?, size(b)?))
            }
            "file" => Ok(AlphabetSpec::File(PathBuf::from(arg))),
            other => Err(format!("unknown alphabet family `{other}`")),
        }
    }
}

impl fmt::Display for AlphabetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphabetSpec::Pam(m) => write!(f, "pam:{m}"),
            AlphabetSpec::Psk(m) => write!(f, "psk:{m}"),
            AlphabetSpec::Qam(a, b) => write!(f, "qam:{a}x{b}"),
            AlphabetSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl AlphabetSpec {
    fn build(&self) -> Result<InputAlphabet> {
        match self {
            AlphabetSpec::Pam(m) => InputAlphabet::pam(*m),
            AlphabetSpec::Psk(m) => InputAlphabet::psk(*m),
            AlphabetSpec::Qam(a, b) => InputAlphabet::qam(*a, *b),
            AlphabetSpec::File(p) => InputAlphabet::read_csv(p),
        }
    }
}

/// A named labeling or `file:PATH`.
#[derive(Debug, Clone, PartialEq)]
enum LabelingSpec {
    Kind(LabelingKind),
    File(PathBuf),
}

impl FromStr for LabelingSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.strip_prefix("file:") {
            Some(path) => Ok(LabelingSpec::File(PathBuf::from(path))),
            None => s.parse().map(LabelingSpec::Kind).map_err(|e: Error| e.to_string()),
        }
    }
}

impl fmt::Display for LabelingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelingSpec::Kind(k) => write!(f, "{k}"),
            LabelingSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn order_of(size: usize) -> Result<usize> {
    if size.is_power_of_two() {
        Ok(size.trailing_zeros() as usize)
    } else {
        Err(Error::domain(format!("alphabet size {size} is not a power of two")))
    }
}

/// Comma-separated values or an inclusive range `start:stop:step`.
#[derive(Debug, Clone, PartialEq)]
struct Grid(Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number `{v}`"));
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [a, b, step] = parts[..] else {
                return Err(format!("expected start:stop:step, got `{s}`"));
            };
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(format!("range `{s}` needs stop >= start and a positive step"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok(Grid((0..n).map(|i| a + i as f64 * step).collect()))
        } else {
            s.split(',').map(num).collect::<std::result::Result<_, _>>().map(Grid)
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ConstellationArgs {
    /// pam:M, psk:M, qam:M1xM2 or file:PATH (CSV, one point per row)
    #[arg(long, default_value = "pam:8")]
    alphabet: AlphabetSpec,
    /// brgc, nbc, bsgc, fbc or file:PATH (one codeword per line). For QAM
    /// a named labeling is the product of the per-axis labelings
    #[arg(long, default_value = "brgc")]
    labeling: LabelingSpec,
    /// Labeling file, same as --labeling file:PATH
    #[arg(long, value_name = "PATH")]
    labeling_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct DistributionArgs {
    /// Bit probabilities P_{C_k}(0), one per bit position (default uniform)
    #[arg(long, value_delimiter = ',', value_name = "P0,P1,...")]
    bits: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone)]
struct QuadArgs {
    /// Gauss-Hermite nodes per dimension
    #[arg(long, env = QUAD_NODES_ENV, default_value_t = DEFAULT_NODES)]
    quad_nodes: usize,
    /// Use Monte Carlo integration with this many samples per symbol
    #[arg(long)]
    mc_samples: Option<u64>,
    /// Monte Carlo seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl QuadArgs {
    fn spec(&self) -> Result<QuadratureSpec> {
        match self.mc_samples {
            Some(n) => QuadratureSpec::monte_carlo(n, self.seed),
            None => QuadratureSpec::gauss_hermite(self.quad_nodes),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output format (csv for tabular subcommands, json for shape)
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct RateGridArgs {
    /// Smallest rate of the log-spaced grid (bit/symbol)
    #[arg(long, default_value_t = 0.01)]
    rate_min: f64,
    /// Largest rate (default 95% of the saturation rate)
    #[arg(long)]
    rate_max: Option<f64>,
    #[arg(long, default_value_t = 40)]
    points: usize,
}

#[derive(Args, Debug)]
struct CapacityCmd {
    #[command(flatten)]
    constellation: ConstellationArgs,
    #[command(flatten)]
    distribution: DistributionArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// awgn, cm or bicm
    #[arg(long, default_value = "bicm")]
    kind: CapacityKind,
    /// SNR values in dB: comma list or start:stop:step
    #[arg(long, default_value = "-10:30:1", allow_hyphen_values = true)]
    snr_db: Grid,
}

#[derive(Args, Debug)]
struct FCurveCmd {
    #[command(flatten)]
    constellation: ConstellationArgs,
    #[command(flatten)]
    distribution: DistributionArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    rates: RateGridArgs,
    #[arg(long, default_value = "bicm")]
    kind: CapacityKind,
    /// Optimize the bit distribution at every point (BICM only)
    #[arg(long, conflicts_with = "bits")]
    shaped: bool,
    /// Shaping grid step
    #[arg(long, default_value_t = DEFAULT_STEP, requires = "shaped")]
    step: f64,
}

#[derive(Args, Debug)]
struct GapCmd {
    #[command(flatten)]
    constellation: ConstellationArgs,
    #[command(flatten)]
    distribution: DistributionArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    rates: RateGridArgs,
    #[arg(long, default_value = "bicm")]
    kind: CapacityKind,
}

#[derive(Args, Debug)]
struct MinEbn0Cmd {
    #[command(flatten)]
    constellation: ConstellationArgs,
    #[command(flatten)]
    distribution: DistributionArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value = "bicm")]
    kind: CapacityKind,
    /// Smallest rate of the search grid
    #[arg(long, default_value_t = 1e-3)]
    rate_min: f64,
    /// Largest rate (default 95% of the saturation rate)
    #[arg(long)]
    rate_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_RATE_POINTS)]
    points: usize,
}

#[derive(Args, Debug)]
struct AlphaCmd {
    #[command(flatten)]
    constellation: ConstellationArgs,
    #[command(flatten)]
    distribution: DistributionArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value = "bicm")]
    kind: CapacityKind,
}

#[derive(Args, Debug)]
struct FooCheckCmd {
    #[command(flatten)]
    constellation: ConstellationArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Relative residual accepted for non-integer alphabets
    #[arg(long, default_value_t = FOO_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct HtCmd {
    #[command(flatten)]
    constellation: ConstellationArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SearchCmd {
    #[arg(long, default_value = "pam:8")]
    alphabet: AlphabetSpec,
    /// Largest alphabet enumerated
    #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
    max_size: usize,
    /// Where to write the JSON summary in CSV mode (default: next to --out,
    /// or standard error)
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ShapeCmd {
    #[command(flatten)]
    constellation: ConstellationArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// SNR values in dB: comma list or start:stop:step
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Grid,
    /// Coarse grid step over each P_{C_k}(0)
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    /// Refinement step around the coarse optimum
    #[arg(long, default_value_t = DEFAULT_FINE_STEP)]
    fine_step: f64,
    /// Skip the refinement
    #[arg(long)]
    no_refine: bool,
}

#[derive(Args, Debug)]
struct TablesCmd {
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16])]
    pam_sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [8usize])]
    psk_sizes: Vec<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Provenance written with every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch, from `SOURCE_DATE_EPOCH` when set.
    pub timestamp: u64,
    pub config: Value,
}

impl RunManifest {
    fn new(subcommand: &str, config: Value) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            });
        RunManifest {
            subcommand: subcommand.to_string(),
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            config,
        }
    }
}

/// A CSV block: header plus rows of preformatted fields.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, out: &mut String) {
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
}

struct Report {
    tables: Vec<Table>,
    json: Value,
    default_format: Format,
}

impl Report {
    fn csv(table: Table, json: Value) -> Self {
        Report {
            tables: vec![table],
            json,
            default_format: Format::Csv,
        }
    }
}

/// Inserts `v`, or `null` plus a `<key>_nonfinite` flag for infinities.
fn put(map: &mut Map<String, Value>, key: &str, v: f64) {
    if v.is_finite() {
        map.insert(key.to_string(), json!(v));
    } else {
        map.insert(key.to_string(), Value::Null);
        map.insert(format!("{key}_nonfinite"), json!(csv_float(v)));
    }
}

fn db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

fn point_row(snr: f64, rate: f64, ebn0: f64) -> Vec<String> {
    vec![csv_float(db(snr)), csv_float(rate), csv_float(db(ebn0))]
}

fn point_json(snr: f64, rate: f64, ebn0: f64) -> Value {
    let mut m = Map::new();
    put(&mut m, "snr_db", db(snr));
    put(&mut m, "rate_bpcu", rate);
    put(&mut m, "ebn0_db", db(ebn0));
    Value::Object(m)
}

const POINT_HEADER: [&str; 3] = ["snr_db", "rate_bpcu", "ebn0_db"];

fn bit_strings(l: &Labeling) -> Vec<String> {
    (0..l.size())
        .map(|i| l.row(i).iter().map(|b| char::from(b'0' + b)).collect())
        .collect()
}

struct Setup {
    alphabet: InputAlphabet,
    labeling: Labeling,
    omega: Constellation,
    config: Map<String, Value>,
}

fn labeling_for(args: &ConstellationArgs, alphabet: &InputAlphabet) -> Result<(Labeling, String)> {
    let spec = match &args.labeling_file {
        Some(p) => LabelingSpec::File(p.clone()),
        None => args.labeling.clone(),
    };
    let labeling = match (&spec, &args.alphabet) {
        (LabelingSpec::File(p), _) => Labeling::read_file(p)?,
        (LabelingSpec::Kind(k), AlphabetSpec::Qam(a, b)) => {
            Labeling::standard(*k, order_of(*a)?)?.ordered_product(&Labeling::standard(*k, order_of(*b)?)?)?
        }
        (LabelingSpec::Kind(k), _) => Labeling::standard(*k, order_of(alphabet.size())?)?,
    };
    Ok((labeling, spec.to_string()))
}

fn setup(args: &ConstellationArgs, bits: Option<&[f64]>) -> Result<Setup> {
    let alphabet = args.alphabet.build()?;
    let (labeling, labeling_name) = labeling_for(args, &alphabet)?;
    let omega = match bits {
        Some(p) => Constellation::bitwise(alphabet.clone(), labeling.clone(), &BitDistribution::new(p.to_vec())?)?,
        None => Constellation::uniform(alphabet.clone(), labeling.clone())?,
    };
    let mut config = Map::new();
    config.insert(
        "alphabet".into(),
        json!({ "spec": args.alphabet.to_string(), "size": alphabet.size(), "dim": alphabet.dim() }),
    );
    config.insert(
        "labeling".into(),
        json!({ "spec": labeling_name, "codewords": bit_strings(&labeling) }),
    );
    config.insert(
        "distribution".into(),
        match bits {
            Some(p) => json!({ "bits": p, "symbols": omega.distribution().probs() }),
            None => json!("uniform"),
        },
    );
    config.insert(
        "channel".into(),
        json!({ "model": "awgn", "fading_second_moment": 1.0, "dim": alphabet.dim() }),
    );
    Ok(Setup {
        alphabet,
        labeling,
        omega,
        config,
    })
}

fn with_quad(mut config: Map<String, Value>, quad: &QuadratureSpec) -> Map<String, Value> {
    config.insert("quadrature".into(), serde_json::to_value(quad).expect("serializable"));
    config
}

fn rate_bounds(functional: &CapacityFunctional, omega: &Constellation, lo: f64, hi: Option<f64>) -> Result<(f64, f64)> {
    let hi = match hi {
        Some(h) => h,
        None => {
            let sup = functional.saturation_rate();
            let sup = if sup.is_finite() { sup } else { omega.order() as f64 };
            0.95 * sup
        }
    };
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::domain(format!(
            "rate grid needs 0 < rate-min < rate-max, got {lo} and {hi}"
        )));
    }
    Ok((lo, hi))
}

fn cmd_capacity(c: &CapacityCmd) -> Result<(Report, Map<String, Value>)> {
    let s = setup(&c.constellation, c.distribution.bits.as_deref())?;
    let quad = c.quad.spec()?;
    let functional = CapacityFunctional::new(c.kind, &s.omega, quad);
    let snrs: Vec<f64> = c.snr_db.0.iter().map(|&d| 10f64.powf(d / 10.0)).collect();
    let curve = capacity_curve(&functional, &snrs, &ChannelSpec::awgn(s.alphabet.dim()))?;
    let mut table = Table::new(POINT_HEADER);
    let mut points = Vec::new();
    for p in &curve.points {
        table.push(point_row(p.snr, p.rate, p.ebn0));
        points.push(point_json(p.snr, p.rate, p.ebn0));
    }
    let mut config = with_quad(s.config, &quad);
    config.insert("kind".into(), json!(c.kind.to_string()));
    let json = json!({ "provenance": curve.provenance, "points": points });
    Ok((Report::csv(table, json), config))
}

fn cmd_f_curve(c: &FCurveCmd) -> Result<(Report, Map<String, Value>)> {
    let s = setup(&c.constellation, c.distribution.bits.as_deref())?;
    let quad = c.quad.spec()?;
    let channel = ChannelSpec::awgn(s.alphabet.dim());
    let functional = CapacityFunctional::new(c.kind, &s.omega, quad);
    let (lo, hi) = rate_bounds(&functional, &s.omega, c.rates.rate_min, c.rates.rate_max)?;
    let rates = log_grid(lo, hi, c.rates.points);
    let mut table = Table::new(POINT_HEADER);
    let mut points = Vec::new();
    let curve = if c.shaped {
        if c.kind != CapacityKind::Bicm {
            return Err(Error::domain("--shaped applies to the bicm capacity only"));
        }
        let search = ShapingSearch {
            step: c.step,
            fine_step: None,
            quad,
        };
        shaped_f_curve(&s.alphabet, &s.labeling, &rates, &search, 2 * c.rates.points)?
    } else {
        // the zero-rate endpoint comes from the first-order coefficient
        let zero = zero_rate_ebn0(&functional, &channel);
        table.push(point_row(0.0, 0.0, zero));
        points.push(point_json(0.0, 0.0, zero));
        f_curve(&functional, &rates, &channel)?
    };
    for p in &curve.points {
        table.push(point_row(p.snr, p.rate, p.ebn0));
        points.push(point_json(p.snr, p.rate, p.ebn0));
    }
    let mut config = with_quad(s.config, &quad);
    config.insert("kind".into(), json!(c.kind.to_string()));
    config.insert("rates".into(), json!({ "min": lo, "max": hi, "points": c.rates.points, "spacing": "log" }));
    if c.shaped {
        config.insert("shaping".into(), json!({ "step": c.step }));
    }
    let json = json!({ "provenance": curve.provenance, "points": points });
    Ok((Report::csv(table, json), config))
}

fn cmd_gap(c: &GapCmd) -> Result<(Report, Map<String, Value>)> {
    let s = setup(&c.constellation, c.distribution.bits.as_deref())?;
    let quad = c.quad.spec()?;
    let dim = s.alphabet.dim();
    let channel = ChannelSpec::awgn(dim);
    let functional = CapacityFunctional::new(c.kind, &s.omega, quad);
    let (lo, hi) = rate_bounds(&functional, &s.omega, c.rates.rate_min, c.rates.rate_max)?;
    let rates = log_grid(lo, hi, c.rates.points);
    let curve = f_curve(&functional, &rates, &channel)?;
    let mut table = Table::new(["snr_db", "rate_bpcu", "ebn0_db", "gap_db"]);
    let mut points = Vec::new();
    let alpha = functional.alpha();
    let zero_gap = if alpha > 0.0 { LOG2_E / alpha } else { f64::INFINITY };
    let mut rows = vec![(0.0, 0.0, zero_rate_ebn0(&functional, &channel), zero_gap)];
    rows.extend(curve.points.iter().map(|p| (p.snr, p.rate, p.ebn0, p.snr / awgn_inverse(p.rate, dim))));
    for (snr, rate, ebn0, gap) in rows {
        let mut row = point_row(snr, rate, ebn0);
        row.push(csv_float(db(gap)));
        table.push(row);
        let mut j = point_json(snr, rate, ebn0);
        put(j.as_object_mut().expect("object"), "gap_db", db(gap));
        points.push(j);
    }
    let mut config = with_quad(s.config, &quad);
    config.insert("kind".into(), json!(c.kind.to_string()));
    config.insert("rates".into(), json!({ "min": lo, "max": hi, "points": c.rates.points, "spacing": "log" }));
    let json = json!({ "provenance": curve.provenance, "points": points });
    Ok((Report::csv(table, json), config))
}

fn cmd_min_ebn0(c: &MinEbn0Cmd) -> Result<(Report, Map<String, Value>)> {
    let s = setup(&c.constellation, c.distribution.bits.as_deref())?;
    let quad = c.quad.spec()?;
    let channel = ChannelSpec::awgn(s.alphabet.dim());
    let functional = CapacityFunctional::new(c.kind, &s.omega, quad);
    let (lo, hi) = rate_bounds(&functional, &s.omega, c.rate_min, c.rate_max)?;
    let m = min_ebn0_search(&functional, &channel, lo, hi, c.points)?;
    let mut table = Table::new(POINT_HEADER);
    table.push(point_row(0.0, 0.0, m.zero_rate_ebn0));
    let mut interior = Vec::new();
    for &(rate, ebn0) in &m.interior_minima {
        let snr = ebn0 * rate * channel.fading_second_moment();
        table.push(point_row(snr, rate, ebn0));
        interior.push(point_json(snr, rate, ebn0));
    }
    let best_snr = m.ebn0 * m.rate * channel.fading_second_moment();
    let json = json!({
        "provenance": functional.describe(),
        "minimum": point_json(best_snr, m.rate, m.ebn0),
        "zero_rate": point_json(0.0, 0.0, m.zero_rate_ebn0),
        "interior_minima": interior,
    });
    let mut config = with_quad(s.config, &quad);
    config.insert("kind".into(), json!(c.kind.to_string()));
    config.insert("rates".into(), json!({ "min": lo, "max": hi, "points": c.points, "spacing": "log" }));
    Ok((Report::csv(table, json), config))
}

fn cmd_alpha(c: &AlphaCmd) -> Result<(Report, Map<String, Value>)> {
    let bits = c.distribution.bits.as_deref();
    let s = setup(&c.constellation, bits)?;
    let mut exact = None;
    let result = match c.kind {
        CapacityKind::Awgn => AlphaResult::new(LOG2_E),
        CapacityKind::Cm => alpha_cm(&s.omega),
        CapacityKind::Bicm if bits.is_none() => {
            exact = alpha_bicm_uniform_exact(&s.alphabet, &s.labeling)?;
            alpha_bicm_uniform(&s.alphabet, &s.labeling)?
        }
        CapacityKind::Bicm => alpha_bicm(&s.omega),
    };
    let mut table = Table::new(["alpha", "normalized_alpha", "zero_rate_ebn0_db", "gap_db"]);
    table.push(vec![
        csv_float(result.alpha),
        csv_float(result.normalized()),
        csv_float(result.zero_rate_ebn0_db),
        csv_float(result.gap_db()),
    ]);
    let mut m = Map::new();
    put(&mut m, "alpha", result.alpha);
    put(&mut m, "normalized_alpha", result.normalized());
    put(&mut m, "zero_rate_ebn0", result.zero_rate_ebn0);
    put(&mut m, "zero_rate_ebn0_db", result.zero_rate_ebn0_db);
    put(&mut m, "gap_db", result.gap_db());
    if let Some(r) = exact {
        // alpha / log2(e) as an exact fraction
        m.insert("normalized_alpha_exact".into(), json!(format!("{}/{}", r.numer(), r.denom())));
    }
    let mut config = s.config;
    config.insert("kind".into(), json!(c.kind.to_string()));
    Ok((Report::csv(table, Value::Object(m)), config))
}

fn cmd_foo_check(c: &FooCheckCmd) -> Result<(Report, Map<String, Value>)> {
    let s = setup(&c.constellation, None)?;
    let v = is_foo(&s.alphabet, &s.labeling, c.tolerance)?;
    let mut verdict = Table::new(["is_foo", "residual", "residual_hadamard", "exact"]);
    verdict.push(vec![
        v.is_foo.to_string(),
        csv_float(v.residual),
        csv_float(v.residual_hadamard),
        v.exact.to_string(),
    ]);
    let dim = v.projection.dim();
    let mut proj = Table::new(std::iter::once("k".to_string()).chain((0..dim).map(|n| format!("v_{n}"))));
    for k in 0..v.projection.order() {
        let mut row = vec![k.to_string()];
        row.extend(v.projection.row(k).iter().map(|&x| csv_float(x)));
        proj.push(row);
    }
    let mut json = serde_json::to_value(&v).expect("serializable");
    json["projection"] = json!(v.projection.rows().collect::<Vec<_>>());
    let mut config = s.config;
    config.insert("tolerance".into(), json!(c.tolerance));
    Ok((
        Report {
            tables: vec![verdict, proj],
            json,
            default_format: Format::Csv,
        },
        config,
    ))
}

fn cmd_ht(c: &HtCmd) -> Result<(Report, Map<String, Value>)> {
    let s = setup(&c.constellation, None)?;
    let spectrum = ht(&s.alphabet.reorder_to_natural(&s.labeling)?);
    let dim = spectrum.dim();
    let mut table = Table::new(
        std::iter::once("j".to_string())
            .chain((0..dim).map(|n| format!("h_{n}")))
            .chain(std::iter::once("energy".to_string())),
    );
    let mut rows = Vec::new();
    for j in 0..spectrum.size() {
        let mut row = vec![j.to_string()];
        row.extend(spectrum.row(j).iter().map(|&x| csv_float(x)));
        row.push(csv_float(spectrum.energy(j)));
        table.push(row);
        rows.push(json!({ "j": j, "h": spectrum.row(j), "energy": spectrum.energy(j) }));
    }
    let json = json!({
        "spectrum": rows,
        "total_energy": spectrum.total_energy(),
        "off_cube_energy": spectrum.off_cube_energy(),
    });
    Ok((Report::csv(table, json), s.config))
}

fn cmd_search(c: &SearchCmd, threads: usize) -> Result<(Report, Map<String, Value>, Value)> {
    let alphabet = c.alphabet.build()?;
    let options = SearchOptions {
        threads,
        max_size: c.max_size,
    };
    let census = enumerate_alpha_classes(&alphabet, &options)?;
    let mut table = Table::new(["alpha", "count"]);
    let mut pmf = Vec::new();
    for class in &census.classes {
        table.push(vec![csv_float(class.alpha), class.count.to_string()]);
        pmf.push(json!({ "alpha": class.alpha, "count": class.count }));
    }
    let best = census.max_class();
    let summary = json!({
        "alphabet": c.alphabet.to_string(),
        "total": census.total,
        "class_count": census.class_count(),
        "distinct_multiplicities": distinct_value_count_of_pmf(&census),
        "foo_count": census.foo_count,
        "exact": census.exact,
        "min_class_spacing": census.min_class_spacing,
        "max_alpha": best.alpha,
        "max_alpha_normalized": best.alpha / LOG2_E,
        "max_alpha_count": best.count,
        "max_alpha_witness": bit_strings(&best.witness),
    });
    let mut config = Map::new();
    config.insert(
        "alphabet".into(),
        json!({ "spec": c.alphabet.to_string(), "size": alphabet.size(), "dim": alphabet.dim() }),
    );
    config.insert("distribution".into(), json!("uniform"));
    config.insert("max_size".into(), json!(c.max_size));
    let json = json!({ "summary": summary.clone(), "pmf": pmf });
    Ok((Report::csv(table, json), config, summary))
}

fn cmd_shape(c: &ShapeCmd) -> Result<(Report, Map<String, Value>)> {
    let s = setup(&c.constellation, None)?;
    let quad = c.quad.spec()?;
    let search = ShapingSearch {
        step: c.step,
        fine_step: (!c.no_refine).then_some(c.fine_step),
        quad,
    };
    let m = s.labeling.order();
    let mut table = Table::new(
        POINT_HEADER
            .iter()
            .map(|h| h.to_string())
            .chain(std::iter::once("uniform_rate_bpcu".to_string()))
            .chain((0..m).map(|k| format!("p0_c{k}"))),
    );
    let mut results = Vec::new();
    for &snr_db in &c.snr_db.0 {
        let snr = 10f64.powf(snr_db / 10.0);
        let r = search.optimize(&s.alphabet, &s.labeling, snr)?;
        let ebn0 = if r.shaped_capacity > 0.0 { snr / r.shaped_capacity } else { f64::INFINITY };
        let mut row = point_row(snr, r.shaped_capacity, ebn0);
        row.push(csv_float(r.uniform_capacity));
        row.extend(r.bits.iter().map(|&p| csv_float(p)));
        table.push(row);
        let mut j = Map::new();
        put(&mut j, "snr_db", snr_db);
        j.insert("bits".into(), json!(r.bits));
        let symbols = SymbolDistribution::bitwise(&s.labeling, &r.distribution())?;
        j.insert("symbols".into(), json!(symbols.probs()));
        put(&mut j, "shaped_capacity", r.shaped_capacity);
        put(&mut j, "uniform_capacity", r.uniform_capacity);
        put(&mut j, "ebn0_db", db(ebn0));
        results.push(Value::Object(j));
    }
    let mut config = with_quad(s.config, &quad);
    config.insert(
        "shaping".into(),
        json!({ "step": c.step, "fine_step": search.fine_step }),
    );
    Ok((
        Report {
            tables: vec![table],
            json: json!({ "results": results }),
            default_format: Format::Json,
        },
        config,
    ))
}

fn entry_json(table: &str, e: &TableEntry) -> Value {
    let mut m = Map::new();
    m.insert("table".into(), json!(table));
    m.insert("family".into(), json!(e.family.to_string()));
    m.insert("size".into(), json!(e.size));
    m.insert("labeling".into(), json!(e.labeling.to_string()));
    put(&mut m, "normalized_alpha", e.normalized_alpha);
    put(&mut m, "zero_rate_ebn0_db", e.zero_rate_ebn0_db);
    put(&mut m, "gap_db", e.gap_db);
    Value::Object(m)
}

fn cmd_tables(c: &TablesCmd) -> Result<(Report, Map<String, Value>)> {
    let mut table = Table::new([
        "table",
        "family",
        "size",
        "labeling",
        "normalized_alpha",
        "zero_rate_ebn0_db",
        "gap_db",
    ]);
    let mut entries = Vec::new();
    let limits = limit_table();
    let gaps = gap_table(&c.pam_sizes, &c.psk_sizes);
    for (name, list) in [("limit", &limits), ("gap", &gaps)] {
        for e in list.iter() {
            table.push(vec![
                name.to_string(),
                e.family.to_string(),
                e.size.map_or_else(|| "inf".to_string(), |s| s.to_string()),
                e.labeling.to_string(),
                csv_float(e.normalized_alpha),
                csv_float(e.zero_rate_ebn0_db),
                csv_float(e.gap_db),
            ]);
            entries.push(entry_json(name, e));
        }
    }
    let mut config = Map::new();
    config.insert("pam_sizes".into(), json!(c.pam_sizes));
    config.insert("psk_sizes".into(), json!(c.psk_sizes));
    Ok((Report::csv(table, json!({ "entries": entries })), config))
}

fn render(report: &Report, format: Format, manifest: &RunManifest) -> String {
    match format {
        Format::Csv => {
            let mut s = String::new();
            for (n, t) in report.tables.iter().enumerate() {
                if n > 0 {
                    s.push('\n');
                }
                t.write(&mut s);
            }
            s
        }
        Format::Json => {
            let doc = json!({ "manifest": manifest, "result": report.json });
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
            s.push('\n');
            s
        }
    }
}

fn companion(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn manifest_text(manifest: &RunManifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("serializable");
    s.push('\n');
    s
}

/// Text produced by one run, in the order it is written.
enum Artifact {
    Stdout(String),
    Stderr(String),
    File(PathBuf, String),
}

fn emit(report: &Report, output: &OutputArgs, manifest: &RunManifest, out: &mut Vec<Artifact>) -> Format {
    let format = output.format.unwrap_or(report.default_format);
    let text = render(report, format, manifest);
    match &output.out {
        Some(path) => {
            out.push(Artifact::File(path.clone(), text));
            if format == Format::Csv {
                out.push(Artifact::File(companion(path, ".manifest.json"), manifest_text(manifest)));
            }
        }
        None => out.push(Artifact::Stdout(text)),
    }
    format
}

fn dispatch(cli: &Cli) -> Result<Vec<Artifact>> {
    let mut artifacts = Vec::new();
    let (name, (report, config), output) = match &cli.command {
        Command::Capacity(c) => ("capacity", cmd_capacity(c)?, &c.output),
        Command::FCurve(c) => ("f-curve", cmd_f_curve(c)?, &c.output),
        Command::Gap(c) => ("gap", cmd_gap(c)?, &c.output),
        Command::MinEbn0(c) => ("min-ebn0", cmd_min_ebn0(c)?, &c.output),
        Command::Alpha(c) => ("alpha", cmd_alpha(c)?, &c.output),
        Command::FooCheck(c) => ("foo-check", cmd_foo_check(c)?, &c.output),
        Command::Ht(c) => ("ht", cmd_ht(c)?, &c.output),
        Command::Shape(c) => ("shape", cmd_shape(c)?, &c.output),
        Command::Tables(c) => ("tables", cmd_tables(c)?, &c.output),
        Command::SearchLabelings(c) => {
            let (report, config, summary) = cmd_search(c, cli.threads)?;
            let manifest = RunManifest::new("search-labelings", Value::Object(config));
            if emit(&report, &c.output, &manifest, &mut artifacts) == Format::Csv {
                let text = serde_json::to_string_pretty(&summary).expect("serializable") + "\n";
                artifacts.push(match (&c.summary, &c.output.out) {
                    (Some(p), _) => Artifact::File(p.clone(), text),
                    (None, Some(out)) => Artifact::File(companion(out, ".summary.json"), text),
                    (None, None) => Artifact::Stderr(text),
                });
            }
            return Ok(artifacts);
        }
    };
    let manifest = RunManifest::new(name, Value::Object(config));
    emit(&report, output, &manifest, &mut artifacts);
    Ok(artifacts)
}

fn write_artifacts(artifacts: Vec<Artifact>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    for a in artifacts {
        match a {
            Artifact::Stdout(t) => stdout.write_all(t.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
            Artifact::Stderr(t) => stderr.write_all(t.as_bytes()).map_err(|e| Error::io("<stderr>", e))?,
            Artifact::File(p, t) => write_file(&p, &t)?,
        }
    }
    Ok(())
}

/// Runs the command line `args` (program name first) against the process's
/// standard streams and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = if cli.threads > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::domain(format!("cannot start {} worker threads: {e}", cli.threads))),
        }
    } else {
        dispatch(&cli)
    }
    .and_then(|a| write_artifacts(a, stdout, stderr));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DOMAIN
        }
    }
}
