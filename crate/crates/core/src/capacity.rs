//! Average mutual information of discrete constellations over the AWGN
//! channel, capacity inversion and Eb/N0 analysis.
//!
//! For a constellation `[X, L, P]` at signal-to-noise ratio `SNR` the noise
//! spectral density is `N0 = Es / SNR`. All integrands are evaluated in the
//! log domain; the expectation over the noise uses [`QuadratureSpec`].

use std::f64::consts::{LN_2, LOG2_E};

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{alpha_bicm, alpha_cm};
use crate::constellation::{entropy_bits, ChannelSpec, Constellation, InputAlphabet};
use crate::error::{Error, Result};
use crate::quadrature::{Estimate, QuadratureSpec};

/// Relative tolerance of capacity inversion.
pub const INVERSION_TOLERANCE: f64 = 1e-10;
/// Relative step of the central differences used for `g(Rc)`.
pub const DERIVATIVE_STEP: f64 = 1e-4;
/// Default number of rate grid points for `g` and minimum search.
pub const DEFAULT_RATE_POINTS: usize = 240;

const SCAN_FACTOR: f64 = 1.122_018_454_301_963_4; // 0.5 dB
const MAX_SNR: f64 = 1e12;
/// Discrete-constellation inversion scans rates up to this fraction of the
/// saturation rate by default.
const SATURATION_FRACTION: f64 = 0.95;

/// `C^AW(SNR) = N/2 log2(1 + 2 SNR / N)`.
pub fn awgn_capacity(snr: f64, dim: usize) -> f64 {
    let n = dim as f64;
    0.5 * n * (2.0 * snr / n).ln_1p() * LOG2_E
}

/// SNR achieving rate `rate` on the AWGN channel.
pub fn awgn_inverse(rate: f64, dim: usize) -> f64 {
    let n = dim as f64;
    0.5 * n * (2.0 * rate * LN_2 / n).exp_m1()
}

/// `f^AW(Rc) = N/(2 Rc) (2^{2Rc/N} - 1)`.
pub fn f_awgn(rate: f64, dim: usize) -> Result<f64> {
    check_rate(rate)?;
    Ok(awgn_inverse(rate, dim) / rate)
}

/// `g^AW(Rc) = [N + (2 Rc ln 2 - N) 2^{2Rc/N}] / (2 Rc^2)`.
pub fn g_awgn(rate: f64, dim: usize) -> Result<f64> {
    check_rate(rate)?;
    let n = dim as f64;
    let x = 2.0 * rate * LN_2 / n;
    // N + (N x - N) e^x = N (x e^x - expm1(x))
    let num = n * (x * x.exp() - x.exp_m1());
    Ok(num / (2.0 * rate * rate))
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("rate Rc must be positive, got {rate}")))
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if snr.is_finite() && snr >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("SNR must be finite and non-negative, got {snr}")))
    }
}

/// Per-pair terms `a_ij(t) = ln P_j - d_ij^2/N0 + c_ij . t` for one
/// transmitted symbol `i`.
struct SymbolTerms {
    index: usize,
    prob: f64,
    base: Vec<f64>,
    slope: Vec<f64>,
    support: Vec<usize>,
}

struct Kernel {
    dim: usize,
    symbols: Vec<SymbolTerms>,
}

impl Kernel {
    fn new(alphabet: &InputAlphabet, probs: &[f64], n0: f64) -> Kernel {
        let dim = alphabet.dim();
        let support: Vec<usize> = (0..probs.len()).filter(|&j| probs[j] > 0.0).collect();
        let scale = 2.0 / n0.sqrt();
        let symbols = support
            .iter()
            .map(|&i| {
                let xi = alphabet.point(i);
                let mut base = Vec::with_capacity(support.len());
                let mut slope = Vec::with_capacity(support.len() * dim);
                for &j in &support {
                    let xj = alphabet.point(j);
                    let d2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                    base.push(probs[j].ln() - d2 / n0);
                    slope.extend(xi.iter().zip(xj).map(|(a, b)| -scale * (a - b)));
                }
                SymbolTerms {
                    index: i,
                    prob: probs[i],
                    base,
                    slope,
                    support: support.clone(),
                }
            })
            .collect();
        Kernel { dim, symbols }
    }

    #[inline]
    fn exponents(&self, s: &SymbolTerms, t: &[f64], a: &mut [f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for (j, out) in a.iter_mut().enumerate() {
            let mut v = s.base[j];
            let slope = &s.slope[j * self.dim..(j + 1) * self.dim];
            v += slope.iter().zip(t).map(|(a, b)| a * b).sum::<f64>();
            *out = v;
            if v > max {
                max = v;
            }
        }
        max
    }
}

/// `ln sum_j exp(a_j)` over the selected entries, stable for any spread.
fn log_sum_exp_subset(a: &[f64], keep: impl Fn(usize) -> bool) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for (j, v) in a.iter().enumerate() {
        if keep(j) && *v > max {
            max = *v;
        }
    }
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = a
        .iter()
        .enumerate()
        .filter(|(j, _)| keep(*j))
        .map(|(_, v)| (v - max).exp())
        .sum();
    max + sum.ln()
}

/// `I(X; Y)` in bits for input distribution `probs` on `alphabet` with noise
/// density `n0`.
pub fn ami(alphabet: &InputAlphabet, probs: &[f64], n0: f64, quad: &QuadratureSpec) -> Result<Estimate> {
    if probs.len() != alphabet.size() {
        return Err(Error::domain("distribution and alphabet sizes differ"));
    }
    if n0.is_infinite() {
        return Ok(Estimate {
            value: 0.0,
            std_error: None,
        });
    }
    if !(n0 > 0.0) {
        return Err(Error::domain(format!("noise density must be positive, got {n0}")));
    }
    let kernel = Kernel::new(alphabet, probs, n0);
    let width = kernel.symbols.first().map_or(0, |s| s.support.len());
    let mut a = vec![0.0; width];
    quad.integrate(alphabet.dim(), |t| {
        let mut acc = 0.0;
        for s in &kernel.symbols {
            let max = kernel.exponents(s, t, &mut a);
            let sum: f64 = a.iter().map(|v| (v - max).exp()).sum();
            acc -= s.prob * (max + sum.ln());
        }
        acc * LOG2_E
    })
}

fn noise_density(omega: &Constellation, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    Ok(if snr == 0.0 { f64::INFINITY } else { omega.es() / snr })
}

/// Coded-modulation capacity `I(X; Y)` of `omega` at `snr`.
pub fn cm_capacity(omega: &Constellation, snr: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(cm_capacity_estimate(omega, snr, quad)?.value)
}

pub fn cm_capacity_estimate(omega: &Constellation, snr: f64, quad: &QuadratureSpec) -> Result<Estimate> {
    let n0 = noise_density(omega, snr)?;
    ami(omega.alphabet(), omega.distribution().probs(), n0, quad)
}

/// BICM capacity with its per-bit-level decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicmEvaluation {
    pub capacity: f64,
    pub std_error: Option<f64>,
    /// `I(C_k; Y)` for each bit position.
    pub per_bit: Vec<f64>,
    /// Bit positions with a zero-probability value; they contribute zero.
    pub degenerate_bits: Vec<usize>,
}

/// BICM capacity `sum_k I(C_k; Y)` of `omega` at `snr`.
///
/// The sum is evaluated for any distribution, but it is only bounded by the
/// CM capacity when the bits are independent.
pub fn bicm_capacity(omega: &Constellation, snr: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(bicm_capacity_detailed(omega, snr, quad)?.capacity)
}

pub fn bicm_capacity_detailed(
    omega: &Constellation,
    snr: f64,
    quad: &QuadratureSpec,
) -> Result<BicmEvaluation> {
    let n0 = noise_density(omega, snr)?;
    let m = omega.order();
    let degenerate_bits: Vec<usize> = (0..m)
        .filter(|&k| omega.bit_prob(k, 0) <= 0.0 || omega.bit_prob(k, 1) <= 0.0)
        .collect();
    if n0.is_infinite() {
        return Ok(BicmEvaluation {
            capacity: 0.0,
            std_error: quad_std_error_zero(quad),
            per_bit: vec![0.0; m],
            degenerate_bits,
        });
    }
    let labeling = omega.labeling();
    let probs = omega.distribution().probs();
    let kernel = Kernel::new(omega.alphabet(), probs, n0);
    let bit_log_prob: Vec<[f64; 2]> = (0..m)
        .map(|k| [omega.bit_prob(k, 0).ln(), omega.bit_prob(k, 1).ln()])
        .collect();
    let width = kernel.symbols.first().map_or(0, |s| s.support.len());
    // bits[j * m + k] is the k-th bit of the j-th supported symbol
    let support = kernel.symbols.first().map(|s| s.support.clone()).unwrap_or_default();
    let bits: Vec<u8> = support
        .iter()
        .flat_map(|&j| (0..m).map(move |k| labeling.bit(j, k)))
        .collect();
    let mut a = vec![0.0; width];
    let mut e = vec![0.0; width];
    let estimates = quad.integrate_many(omega.dim(), m + 1, |t, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (pos, s) in kernel.symbols.iter().enumerate() {
            let max = kernel.exponents(s, t, &mut a);
            for (ej, aj) in e.iter_mut().zip(&a) {
                *ej = (aj - max).exp();
            }
            let total: f64 = e.iter().sum();
            let ln_total = max + total.ln();
            for k in 0..m {
                let u = bits[pos * m + k];
                let mut sub = 0.0;
                for j in 0..width {
                    if bits[j * m + k] == u {
                        sub += e[j];
                    }
                }
                let ln_sub = if sub > 1e-290 {
                    max + sub.ln()
                } else {
                    log_sum_exp_subset(&a, |j| bits[j * m + k] == u)
                };
                let term = s.prob * (ln_sub - bit_log_prob[k][u as usize] - ln_total) * LOG2_E;
                out[k] += term;
                out[m] += term;
            }
            debug_assert_eq!(support[pos], s.index);
        }
    })?;
    let per_bit = estimates[..m].iter().map(|e| e.value).collect();
    Ok(BicmEvaluation {
        capacity: estimates[m].value,
        std_error: estimates[m].std_error,
        per_bit,
        degenerate_bits,
    })
}

fn quad_std_error_zero(quad: &QuadratureSpec) -> Option<f64> {
    match quad {
        QuadratureSpec::MonteCarlo { .. } => Some(0.0),
        QuadratureSpec::GaussHermite { .. } => None,
    }
}

/// BICM capacity as `sum_k sum_u P_{C_k}(u) [I(X;Y) - I_{X|C_k=u}(X;Y)]`.
pub fn bicm_capacity_via_difference(omega: &Constellation, snr: f64, quad: &QuadratureSpec) -> Result<f64> {
    let n0 = noise_density(omega, snr)?;
    if n0.is_infinite() {
        return Ok(0.0);
    }
    let total = ami(omega.alphabet(), omega.distribution().probs(), n0, quad)?.value;
    let mut acc = 0.0;
    for k in 0..omega.order() {
        for u in 0..2u8 {
            let pu = omega.bit_prob(k, u);
            if pu <= 0.0 {
                continue;
            }
            let cond = omega.conditional_distribution(k, u)?;
            let i_cond = ami(omega.alphabet(), cond.probs(), n0, quad)?.value;
            acc += pu * (total - i_cond);
        }
    }
    Ok(acc)
}

/// `I(C_k; Y | C_0, ..., C_{k-1})`, averaged over the prefix bit patterns.
pub fn bit_level_conditional_ami(
    omega: &Constellation,
    snr: f64,
    k: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if k >= omega.order() {
        return Err(Error::domain(format!(
            "bit position {k} out of range for order {}",
            omega.order()
        )));
    }
    let n0 = noise_density(omega, snr)?;
    if n0.is_infinite() {
        return Ok(0.0);
    }
    let labeling = omega.labeling();
    let probs = omega.distribution().probs();
    let prefix_of = |i: usize| -> u32 { labeling.codeword(i) >> (labeling.order() - k) };
    let restricted = |keep: &dyn Fn(usize) -> bool| -> (f64, Vec<f64>) {
        let mass: f64 = (0..probs.len()).filter(|&i| keep(i)).map(|i| probs[i]).sum();
        let p = (0..probs.len())
            .map(|i| if keep(i) && mass > 0.0 { probs[i] / mass } else { 0.0 })
            .collect();
        (mass, p)
    };
    let mut acc = 0.0;
    for prefix in 0..(1u32 << k) {
        let in_prefix = |i: usize| k == 0 || prefix_of(i) == prefix;
        let (mass, p_prefix) = restricted(&in_prefix);
        if mass <= 0.0 {
            continue;
        }
        let mut value = ami(omega.alphabet(), &p_prefix, n0, quad)?.value;
        for u in 0..2u8 {
            let (sub_mass, p_sub) = restricted(&|i| in_prefix(i) && labeling.bit(i, k) == u);
            if sub_mass <= 0.0 {
                continue;
            }
            value -= sub_mass / mass * ami(omega.alphabet(), &p_sub, n0, quad)?.value;
        }
        acc += mass * value;
    }
    Ok(acc)
}

/// Which mutual information a curve is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityKind {
    Awgn,
    Cm,
    Bicm,
}

impl std::str::FromStr for CapacityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(CapacityKind::Awgn),
            "cm" => Ok(CapacityKind::Cm),
            "bicm" | "bi" => Ok(CapacityKind::Bicm),
            other => Err(Error::parse(format!("unknown capacity kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for CapacityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CapacityKind::Awgn => "awgn",
            CapacityKind::Cm => "cm",
            CapacityKind::Bicm => "bicm",
        })
    }
}

/// A capacity `SNR -> rate` that can be evaluated and inverted.
#[derive(Debug, Clone)]
pub enum CapacityFunctional {
    Awgn { dim: usize },
    Cm { omega: Constellation, quad: QuadratureSpec },
    Bicm { omega: Constellation, quad: QuadratureSpec },
}

impl CapacityFunctional {
    pub fn new(kind: CapacityKind, omega: &Constellation, quad: QuadratureSpec) -> Self {
        match kind {
            CapacityKind::Awgn => CapacityFunctional::Awgn { dim: omega.dim() },
            CapacityKind::Cm => CapacityFunctional::Cm {
                omega: omega.clone(),
                quad,
            },
            CapacityKind::Bicm => CapacityFunctional::Bicm {
                omega: omega.clone(),
                quad,
            },
        }
    }

    pub fn kind(&self) -> CapacityKind {
        match self {
            CapacityFunctional::Awgn { .. } => CapacityKind::Awgn,
            CapacityFunctional::Cm { .. } => CapacityKind::Cm,
            CapacityFunctional::Bicm { .. } => CapacityKind::Bicm,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CapacityFunctional::Awgn { dim } => *dim,
            CapacityFunctional::Cm { omega, .. } | CapacityFunctional::Bicm { omega, .. } => omega.dim(),
        }
    }

    pub fn evaluate(&self, snr: f64) -> Result<f64> {
        match self {
            CapacityFunctional::Awgn { dim } => {
                check_snr(snr)?;
                Ok(awgn_capacity(snr, *dim))
            }
            CapacityFunctional::Cm { omega, quad } => cm_capacity(omega, snr, quad),
            CapacityFunctional::Bicm { omega, quad } => bicm_capacity(omega, snr, quad),
        }
    }

    /// The rate approached as `SNR -> infinity` (an upper bound for
    /// constellations with coinciding points).
    pub fn saturation_rate(&self) -> f64 {
        match self {
            CapacityFunctional::Awgn { .. } => f64::INFINITY,
            CapacityFunctional::Cm { omega, .. } => omega.entropy_bits(),
            CapacityFunctional::Bicm { omega, .. } => {
                let bits = omega.bit_distribution();
                (0..omega.order())
                    .map(|k| entropy_bits(&[bits.prob(k, 0), bits.prob(k, 1)]))
                    .sum()
            }
        }
    }

    /// First-order coefficient `alpha = lim C(SNR)/SNR` at `SNR -> 0`.
    pub fn alpha(&self) -> f64 {
        match self {
            CapacityFunctional::Awgn { .. } => LOG2_E,
            CapacityFunctional::Cm { omega, .. } => alpha_cm(omega).alpha,
            CapacityFunctional::Bicm { omega, .. } => alpha_bicm(omega).alpha,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CapacityFunctional::Awgn { dim } => format!("awgn capacity, N = {dim}"),
            CapacityFunctional::Cm { omega, .. } => format!("cm capacity of {omega}"),
            CapacityFunctional::Bicm { omega, .. } => format!("bicm capacity of {omega}"),
        }
    }
}

/// Smallest SNR at which `functional` reaches `rate`. The optional bracket
/// gives a starting point below the answer and a scan ceiling.
pub fn invert_capacity(functional: &CapacityFunctional, rate: f64, bracket: Option<(f64, f64)>) -> Result<f64> {
    check_rate(rate)?;
    if let CapacityFunctional::Awgn { dim } = functional {
        return Ok(awgn_inverse(rate, *dim));
    }
    let sup = functional.saturation_rate();
    if rate >= sup {
        return Err(Error::Range(format!(
            "rate {rate} is not below the saturation rate {sup} of the {}",
            functional.describe()
        )));
    }
    let floor = awgn_inverse(rate, functional.dim());
    let (start, ceiling) = bracket.unwrap_or((floor, MAX_SNR));
    let mut lo = start.max(floor * (1.0 - 1e-12)).max(f64::MIN_POSITIVE);
    while functional.evaluate(lo)? >= rate {
        lo /= SCAN_FACTOR;
        if lo < floor * 1e-3 {
            break;
        }
    }
    let mut hi = lo * SCAN_FACTOR;
    loop {
        if hi > ceiling {
            return Err(Error::Range(format!(
                "rate {rate} not reached by the {} below SNR {ceiling:e}",
                functional.describe()
            )));
        }
        if functional.evaluate(hi)? >= rate {
            break;
        }
        lo = hi;
        hi *= SCAN_FACTOR;
    }
    while (hi - lo) > INVERSION_TOLERANCE * hi {
        let mid = 0.5 * (lo + hi);
        if functional.evaluate(mid)? >= rate {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One `(SNR, rate, Eb/N0)` sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityPoint {
    pub snr: f64,
    pub rate: f64,
    pub ebn0: f64,
}

impl CapacityPoint {
    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr.log10()
    }

    pub fn ebn0_db(&self) -> f64 {
        10.0 * self.ebn0.log10()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityCurve {
    pub provenance: String,
    pub points: Vec<CapacityPoint>,
}

fn ebn0_of(snr: f64, rate: f64, channel: &ChannelSpec) -> f64 {
    if rate > 0.0 {
        snr / (channel.fading_second_moment() * rate)
    } else {
        f64::INFINITY
    }
}

/// Capacity at each SNR of `snrs`.
pub fn capacity_curve(functional: &CapacityFunctional, snrs: &[f64], channel: &ChannelSpec) -> Result<CapacityCurve> {
    let points = snrs
        .par_iter()
        .map(|&snr| {
            let rate = functional.evaluate(snr)?;
            Ok(CapacityPoint {
                snr,
                rate,
                ebn0: ebn0_of(snr, rate, channel),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CapacityCurve {
        provenance: functional.describe(),
        points,
    })
}

const INVERSION_CHUNK: usize = 16;

/// Inverts `functional` at increasing rates, warm-starting each inversion
/// from the previous solution within fixed-size chunks.
fn invert_sorted(functional: &CapacityFunctional, rates: &[f64]) -> Result<Vec<f64>> {
    if rates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("rate grid must be strictly increasing"));
    }
    let chunks: Vec<&[f64]> = rates.chunks(INVERSION_CHUNK).collect();
    let solved = chunks
        .par_iter()
        .map(|chunk| {
            let mut out = Vec::with_capacity(chunk.len());
            let mut prev: Option<f64> = None;
            for &r in chunk.iter() {
                let bracket = prev.map(|p| (p, MAX_SNR));
                let snr = invert_capacity(functional, r, bracket)?;
                prev = Some(snr);
                out.push(snr);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(solved.into_iter().flatten().collect())
}

/// `f(Rc) = C^{-1}(Rc) / (E[H^2] Rc)` on a strictly increasing rate grid.
pub fn f_curve(functional: &CapacityFunctional, rates: &[f64], channel: &ChannelSpec) -> Result<CapacityCurve> {
    for &r in rates {
        check_rate(r)?;
    }
    let snrs = invert_sorted(functional, rates)?;
    Ok(CapacityCurve {
        provenance: functional.describe(),
        points: rates
            .iter()
            .zip(snrs)
            .map(|(&rate, snr)| CapacityPoint {
                snr,
                rate,
                ebn0: ebn0_of(snr, rate, channel),
            })
            .collect(),
    })
}

/// `lim f(Rc)` as `Rc -> 0`, i.e. `1 / (E[H^2] alpha)`.
pub fn zero_rate_ebn0(functional: &CapacityFunctional, channel: &ChannelSpec) -> f64 {
    let alpha = functional.alpha();
    if alpha > 0.0 {
        1.0 / (channel.fading_second_moment() * alpha)
    } else {
        f64::INFINITY
    }
}

/// `f` and its derivative `g = df/dRc` at one rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopePoint {
    pub rate: f64,
    pub ebn0: f64,
    pub slope: f64,
}

/// `g(Rc)` by central differences with relative step [`DERIVATIVE_STEP`].
pub fn g_curve(functional: &CapacityFunctional, rates: &[f64], channel: &ChannelSpec) -> Result<Vec<SlopePoint>> {
    let mut stencil = Vec::with_capacity(3 * rates.len());
    for &r in rates {
        check_rate(r)?;
        stencil.extend([r * (1.0 - DERIVATIVE_STEP), r, r * (1.0 + DERIVATIVE_STEP)]);
    }
    let snrs = invert_sorted(functional, &stencil)?;
    let f = |idx: usize| ebn0_of(snrs[idx], stencil[idx], channel);
    Ok(rates
        .iter()
        .enumerate()
        .map(|(n, &rate)| {
            let h = rate * DERIVATIVE_STEP;
            SlopePoint {
                rate,
                ebn0: f(3 * n + 1),
                slope: (f(3 * n + 2) - f(3 * n)) / (2.0 * h),
            }
        })
        .collect())
}

/// `n` log-spaced values between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Result of the minimum Eb/N0 search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimumEbN0 {
    /// Rate at the minimum; zero when the minimum is the zero-rate limit.
    pub rate: f64,
    pub ebn0: f64,
    pub ebn0_db: f64,
    pub zero_rate_ebn0: f64,
    /// Local minima `(Rc, Eb/N0)` of `f` found at sign changes of `g`.
    pub interior_minima: Vec<(f64, f64)>,
}

/// Minimum of `f` over `{0+} u (0, Rc_max]`, from the analytic zero-rate
/// limit and golden-section refinement at each sign change of `g` on a log
/// grid of `points` rates in `[rate_lo, rate_hi]`.
pub fn min_ebn0_search(
    functional: &CapacityFunctional,
    channel: &ChannelSpec,
    rate_lo: f64,
    rate_hi: f64,
    points: usize,
) -> Result<MinimumEbN0> {
    let zero = zero_rate_ebn0(functional, channel);
    let mut best = (0.0, zero);
    let mut interior = Vec::new();
    if functional.kind() != CapacityKind::Awgn {
        let rates = log_grid(rate_lo, rate_hi, points.max(3));
        let g = g_curve(functional, &rates, channel)?;
        for j in 1..g.len() {
            if g[j - 1].slope < 0.0 && g[j].slope >= 0.0 {
                let a = rates[j.saturating_sub(2)];
                let b = rates[(j + 1).min(rates.len() - 1)];
                let (r, e) = golden_section(|r| f_at(functional, r, channel), a, b, 1e-7)?;
                interior.push((r, e));
                if e < best.1 {
                    best = (r, e);
                }
            }
        }
    }
    Ok(MinimumEbN0 {
        rate: best.0,
        ebn0: best.1,
        ebn0_db: 10.0 * best.1.log10(),
        zero_rate_ebn0: zero,
        interior_minima: interior,
    })
}

/// [`min_ebn0_search`] on the default grid: `1e-3` up to 95% of the
/// saturation rate (`10 N` bits for the AWGN capacity).
pub fn min_ebn0(functional: &CapacityFunctional, channel: &ChannelSpec) -> Result<MinimumEbN0> {
    let sup = functional.saturation_rate();
    let hi = if sup.is_finite() {
        SATURATION_FRACTION * sup
    } else {
        10.0 * functional.dim() as f64
    };
    min_ebn0_search(functional, channel, 1e-3, hi, DEFAULT_RATE_POINTS)
}

fn f_at(functional: &CapacityFunctional, rate: f64, channel: &ChannelSpec) -> Result<f64> {
    let snr = invert_capacity(functional, rate, None)?;
    Ok(ebn0_of(snr, rate, channel))
}

fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a) > rel_tol * (a.abs() + b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// SNR gap `f_Omega(Rc) / f^AW(Rc)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrGap {
    pub rate: f64,
    pub ratio: f64,
    pub db: f64,
}

/// Gap to the AWGN capacity at `rate`; `rate = 0` uses the first-order
/// limit `log2(e) / alpha`.
pub fn snr_gap(functional: &CapacityFunctional, rate: f64) -> Result<SnrGap> {
    let ratio = if rate == 0.0 {
        let alpha = functional.alpha();
        if alpha > 0.0 {
            LOG2_E / alpha
        } else {
            f64::INFINITY
        }
    } else {
        check_rate(rate)?;
        invert_capacity(functional, rate, None)? / awgn_inverse(rate, functional.dim())
    };
    Ok(SnrGap {
        rate,
        ratio,
        db: 10.0 * ratio.log10(),
    })
}

/// SNR in `[lo, hi]` where two capacities cross, by bisection on their
/// difference.
pub fn crossing_snr(a: &CapacityFunctional, b: &CapacityFunctional, lo: f64, hi: f64) -> Result<f64> {
    let diff = |s: f64| -> Result<f64> { Ok(a.evaluate(s)? - b.evaluate(s)?) };
    let (mut lo, mut hi) = (lo, hi);
    let dlo = diff(lo)?;
    if dlo.signum() == diff(hi)?.signum() {
        return Err(Error::Range(format!(
            "capacities do not cross between SNR {lo} and {hi}"
        )));
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if diff(mid)?.signum() == dlo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::Labeling;

    fn pam(m: usize, l: Labeling) -> Constellation {
        Constellation::uniform(InputAlphabet::pam(1 << m).unwrap(), l).unwrap()
    }

    #[test]
    fn awgn_closed_forms() {
        assert_eq!(awgn_capacity(0.0, 1), 0.0);
        assert!((awgn_capacity(1.0, 1) - 0.5 * 3f64.log2()).abs() < 1e-15);
        assert!((awgn_capacity(1.0, 2) - 1.0).abs() < 1e-15);
        assert!((f_awgn(1.0, 1).unwrap() - 1.5).abs() < 1e-15);
        assert!((f_awgn(1e-9, 1).unwrap() - LN_2).abs() < 1e-9);
        assert!(f_awgn(0.0, 1).is_err());
        for dim in [1, 2] {
            for r in [1e-3, 0.3, 2.0, 5.0] {
                let s = awgn_inverse(r, dim);
                assert!((awgn_capacity(s, dim) - r).abs() < 1e-12 * r.max(1.0));
                let h = 1e-5 * r;
                let fd = (f_awgn(r + h, dim).unwrap() - f_awgn(r - h, dim).unwrap()) / (2.0 * h);
                let g = g_awgn(r, dim).unwrap();
                assert!((fd - g).abs() < 1e-6 * g.abs().max(1e-3), "{fd} vs {g}");
            }
        }
    }

    #[test]
    fn binary_pam_saturates() {
        let c = pam(1, Labeling::nbc(1).unwrap());
        let q = QuadratureSpec::default();
        let i = cm_capacity(&c, 100.0, &q).unwrap();
        assert!((i - 1.0).abs() < 1e-6, "{i}");
        assert_eq!(cm_capacity(&c, 0.0, &q).unwrap(), 0.0);
        assert_eq!(bicm_capacity(&c, 0.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn bicm_forms_agree() {
        let q = QuadratureSpec::default();
        let c = pam(2, Labeling::brgc(2).unwrap());
        for snr in [0.5, 1.0, 5.0] {
            let a = bicm_capacity(&c, snr, &q).unwrap();
            let b = bicm_capacity_via_difference(&c, snr, &q).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn single_bit_chain_rule_is_cm() {
        let q = QuadratureSpec::default();
        let c = pam(1, Labeling::nbc(1).unwrap());
        let cm = cm_capacity(&c, 1.3, &q).unwrap();
        let b0 = bit_level_conditional_ami(&c, 1.3, 0, &q).unwrap();
        assert!((cm - b0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_bit_contributes_nothing() {
        let q = QuadratureSpec::default();
        let bits = crate::constellation::BitDistribution::new(vec![1.0, 0.5]).unwrap();
        let c = Constellation::bitwise(InputAlphabet::pam(4).unwrap(), Labeling::nbc(2).unwrap(), &bits)
            .unwrap();
        let e = bicm_capacity_detailed(&c, 2.0, &q).unwrap();
        assert_eq!(e.degenerate_bits, vec![0]);
        assert!(e.per_bit[0].abs() < 1e-14);
        let d = bicm_capacity_via_difference(&c, 2.0, &q).unwrap();
        assert!((e.capacity - d).abs() < 1e-10);
    }

    #[test]
    fn awgn_inversion_is_closed_form() {
        let f = CapacityFunctional::Awgn { dim: 1 };
        let s = invert_capacity(&f, 1.0, None).unwrap();
        assert_eq!(s, 1.5);
    }

    #[test]
    fn cm_inversion_round_trip() {
        let c = pam(3, Labeling::brgc(3).unwrap());
        let f = CapacityFunctional::new(CapacityKind::Cm, &c, QuadratureSpec::default());
        let s2 = invert_capacity(&f, 2.0, None).unwrap();
        let s3 = invert_capacity(&f, 2.999, None).unwrap();
        assert!(s3.is_finite() && s3 > s2);
        assert!((f.evaluate(s2).unwrap() - 2.0).abs() < 1e-8);
        assert!(matches!(invert_capacity(&f, 3.0, None), Err(Error::Range(_))));
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, y) = golden_section(|x| Ok((x - 0.3) * (x - 0.3) + 1.0), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
        assert!((y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 10.0, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[4] - 10.0).abs() < 1e-12);
        assert!((g[2] - 0.1).abs() < 1e-14);
    }
}
