//! Probabilistic shaping by grid search over the bit probabilities
//! `P_{C_k}(0)`, maximizing the BICM capacity at a fixed SNR.
//!
//! The SNR is held fixed while the distribution changes, so the noise level
//! `N0 = Es(P) / SNR` is recomputed for every candidate.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{awgn_inverse, bicm_capacity, CapacityCurve, CapacityPoint};
use crate::constellation::{BitDistribution, ChannelSpec, Constellation, InputAlphabet};
use crate::error::{Error, Result};
use crate::labeling::Labeling;
use crate::quadrature::QuadratureSpec;

pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_FINE_STEP: f64 = 0.01;

/// Best bit distribution found at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapingResult {
    pub snr: f64,
    pub bits: Vec<f64>,
    pub shaped_capacity: f64,
    pub uniform_capacity: f64,
    pub step: f64,
}

impl ShapingResult {
    pub fn distribution(&self) -> BitDistribution {
        BitDistribution::new(self.bits.clone()).expect("grid values are probabilities")
    }
}

/// `{0, step, 2 step, ..., 1}`; 1 is appended when `step` does not divide it.
pub fn probability_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::domain(format!("grid step must lie in (0, 0.5], got {step}")));
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|j| snap(j as f64 * step)).collect();
    if 1.0 - grid[n] > 1e-9 {
        grid.push(1.0);
    }
    Ok(grid)
}

// keeps grid values such as 0.35 free of accumulated rounding
fn snap(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

/// BICM capacity at `snr` of the bitwise distribution `bits`, zero when the
/// distribution puts all mass on a zero-energy point.
pub fn shaped_capacity(
    alphabet: &InputAlphabet,
    labeling: &Labeling,
    bits: &[f64],
    snr: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let bits = BitDistribution::new(bits.to_vec())?;
    match Constellation::bitwise(alphabet.clone(), labeling.clone(), &bits) {
        Ok(omega) => bicm_capacity(&omega, snr, quad),
        Err(Error::Domain(msg)) if msg.contains("Es is zero") => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Evaluates every candidate and returns the best one; ties go to the
/// lexicographically smallest probability vector.
fn argmax(
    alphabet: &InputAlphabet,
    labeling: &Labeling,
    candidates: Vec<Vec<f64>>,
    snr: f64,
    quad: &QuadratureSpec,
) -> Result<(Vec<f64>, f64)> {
    let scored = candidates
        .into_par_iter()
        .map(|p| {
            let c = shaped_capacity(alphabet, labeling, &p, snr, quad)?;
            Ok((p, c))
        })
        .collect::<Result<Vec<_>>>()?;
    scored
        .into_iter()
        .reduce(|best, cand| match cand.1.total_cmp(&best.1) {
            Ordering::Greater => cand,
            Ordering::Equal if lex_cmp(&cand.0, &best.0) == Ordering::Less => cand,
            _ => best,
        })
        .ok_or_else(|| Error::domain("empty candidate grid"))
}

/// Grid search over `P_{C_k}(0) in {0, step, ..., 1}` for every bit position.
pub fn optimize_distribution(
    alphabet: &InputAlphabet,
    labeling: &Labeling,
    snr: f64,
    step: f64,
    quad: &QuadratureSpec,
) -> Result<ShapingResult> {
    check_inputs(alphabet, labeling)?;
    let grid = probability_grid(step)?;
    let axes = vec![grid; labeling.order()];
    let (bits, shaped) = argmax(alphabet, labeling, cartesian(&axes), snr, quad)?;
    finish(alphabet, labeling, snr, step, bits, shaped, quad)
}

/// Coarse grid search at `step` followed by a search at `fine_step` over
/// the box of half-width `step` around the coarse optimum.
pub fn optimize_distribution_refined(
    alphabet: &InputAlphabet,
    labeling: &Labeling,
    snr: f64,
    step: f64,
    fine_step: f64,
    quad: &QuadratureSpec,
) -> Result<ShapingResult> {
    let coarse = optimize_distribution(alphabet, labeling, snr, step, quad)?;
    let fine = probability_grid(fine_step)?;
    let axes: Vec<Vec<f64>> = coarse
        .bits
        .iter()
        .map(|&c| {
            fine.iter()
                .copied()
                .filter(|&v| (v - c).abs() <= step + 1e-9)
                .collect()
        })
        .collect();
    let (bits, shaped) = argmax(alphabet, labeling, cartesian(&axes), snr, quad)?;
    let (bits, shaped) = if shaped >= coarse.shaped_capacity {
        (bits, shaped)
    } else {
        (coarse.bits, coarse.shaped_capacity)
    };
    finish(alphabet, labeling, snr, fine_step, bits, shaped, quad)
}

fn check_inputs(alphabet: &InputAlphabet, labeling: &Labeling) -> Result<()> {
    if alphabet.size() != labeling.size() {
        return Err(Error::domain(format!(
            "labeling has {} codewords but the alphabet has {} points",
            labeling.size(),
            alphabet.size()
        )));
    }
    Ok(())
}

fn finish(
    alphabet: &InputAlphabet,
    labeling: &Labeling,
    snr: f64,
    step: f64,
    bits: Vec<f64>,
    shaped: f64,
    quad: &QuadratureSpec,
) -> Result<ShapingResult> {
    let uniform = shaped_capacity(alphabet, labeling, &vec![0.5; labeling.order()], snr, quad)?;
    Ok(ShapingResult {
        snr,
        bits,
        shaped_capacity: shaped,
        uniform_capacity: uniform,
        step,
    })
}

/// Options for the shaped Eb/N0 curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingSearch {
    pub step: f64,
    /// Optional refinement step around the coarse optimum.
    pub fine_step: Option<f64>,
    pub quad: QuadratureSpec,
}

impl Default for ShapingSearch {
    fn default() -> Self {
        ShapingSearch {
            step: DEFAULT_STEP,
            fine_step: Some(DEFAULT_FINE_STEP),
            quad: QuadratureSpec::default(),
        }
    }
}

impl ShapingSearch {
    pub fn optimize(&self, alphabet: &InputAlphabet, labeling: &Labeling, snr: f64) -> Result<ShapingResult> {
        match self.fine_step {
            Some(fine) => optimize_distribution_refined(alphabet, labeling, snr, self.step, fine, &self.quad),
            None => optimize_distribution(alphabet, labeling, snr, self.step, &self.quad),
        }
    }
}

/// Shaped BICM capacity envelope on an SNR grid, converted to
/// `(Rc, Eb/N0)` points. The envelope is made non-decreasing in SNR.
pub fn shaped_capacity_curve(
    alphabet: &InputAlphabet,
    labeling: &Labeling,
    snrs: &[f64],
    search: &ShapingSearch,
    channel: &ChannelSpec,
) -> Result<CapacityCurve> {
    if snrs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("SNR grid must be strictly increasing"));
    }
    let mut rates = Vec::with_capacity(snrs.len());
    for &snr in snrs {
        rates.push(search.optimize(alphabet, labeling, snr)?.shaped_capacity);
    }
    for j in 1..rates.len() {
        rates[j] = rates[j].max(rates[j - 1]);
    }
    Ok(CapacityCurve {
        provenance: format!("shaped bicm capacity, grid step {}", search.step),
        points: snrs
            .iter()
            .zip(rates)
            .map(|(&snr, rate)| CapacityPoint {
                snr,
                rate,
                ebn0: if rate > 0.0 {
                    snr / (channel.fading_second_moment() * rate)
                } else {
                    f64::INFINITY
                },
            })
            .collect(),
    })
}

/// Shaped `f(Rc)` at each rate of `rates`, by interpolating the envelope
/// computed on an internal log-spaced SNR grid of `internal_points` points.
pub fn shaped_f_curve(
    alphabet: &InputAlphabet,
    labeling: &Labeling,
    rates: &[f64],
    search: &ShapingSearch,
    internal_points: usize,
) -> Result<CapacityCurve> {
    let channel = ChannelSpec::awgn(alphabet.dim());
    let (lo, hi) = match (rates.first(), rates.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 && rates.windows(2).all(|w| w[0] < w[1]) => (lo, hi),
        _ => return Err(Error::domain("rate grid must be positive and strictly increasing")),
    };
    let snr_lo = 0.5 * awgn_inverse(lo, alphabet.dim());
    let mut snr_hi = 4.0 * awgn_inverse(hi, alphabet.dim()).max(snr_lo * 2.0);
    let envelope = loop {
        let grid = crate::capacity::log_grid(snr_lo, snr_hi, internal_points.max(4));
        let curve = shaped_capacity_curve(alphabet, labeling, &grid, search, &channel)?;
        if curve.points.last().is_some_and(|p| p.rate >= hi) {
            break curve;
        }
        if snr_hi > 1e8 {
            return Err(Error::Range(format!("rate {hi} not reached by the shaped capacity")));
        }
        snr_hi *= 10.0;
    };
    let pts = &envelope.points;
    let mut out = Vec::with_capacity(rates.len());
    for &r in rates {
        let j = pts.iter().position(|p| p.rate >= r).expect("envelope reaches the top rate");
        let snr = if j == 0 {
            pts[0].snr
        } else {
            let (a, b) = (&pts[j - 1], &pts[j]);
            let t = if b.rate > a.rate { (r - a.rate) / (b.rate - a.rate) } else { 1.0 };
            (a.snr.ln() + t * (b.snr.ln() - a.snr.ln())).exp()
        };
        out.push(CapacityPoint {
            snr,
            rate: r,
            ebn0: snr / r,
        });
    }
    Ok(CapacityCurve {
        provenance: envelope.provenance,
        points: out,
    })
}

/// Smallest SNR at which the shaped capacity reaches `rate`, by bisection
/// on the optimized capacity, returned as `(SNR, Eb/N0, optimum)`.
pub fn shaped_ebn0_at_rate(
    alphabet: &InputAlphabet,
    labeling: &Labeling,
    rate: f64,
    search: &ShapingSearch,
    rel_tol: f64,
) -> Result<(f64, f64, ShapingResult)> {
    if !(rate > 0.0) {
        return Err(Error::domain(format!("rate must be positive, got {rate}")));
    }
    let mut lo = awgn_inverse(rate, alphabet.dim());
    let mut hi = lo;
    let mut best = loop {
        hi *= 1.5;
        let r = search.optimize(alphabet, labeling, hi)?;
        if r.shaped_capacity >= rate {
            break r;
        }
        if hi > 1e8 {
            return Err(Error::Range(format!("rate {rate} not reached by the shaped capacity")));
        }
        lo = hi;
    };
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        let r = search.optimize(alphabet, labeling, mid)?;
        if r.shaped_capacity >= rate {
            hi = mid;
            best = r;
        } else {
            lo = mid;
        }
    }
    Ok((hi, hi / rate, best))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values() {
        let g = probability_grid(0.25).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = probability_grid(0.05).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[7], 0.35);
        let g = probability_grid(0.3).unwrap();
        assert_eq!(g, vec![0.0, 0.3, 0.6, 0.9, 1.0]);
        assert!(probability_grid(0.0).is_err());
        assert!(probability_grid(0.6).is_err());
    }

    #[test]
    fn binary_optimum_is_uniform() {
        let x = InputAlphabet::pam(2).unwrap();
        let l = Labeling::nbc(1).unwrap();
        let q = QuadratureSpec::default();
        for snr in [0.1, 1.0, 10.0] {
            let r = optimize_distribution(&x, &l, snr, 0.05, &q).unwrap();
            assert_eq!(r.bits, vec![0.5]);
            assert_eq!(r.shaped_capacity, r.uniform_capacity);
        }
    }

    #[test]
    fn tie_break_prefers_smaller_vector() {
        assert_eq!(lex_cmp(&[0.1, 0.9], &[0.9, 0.1]), Ordering::Less);
        assert_eq!(lex_cmp(&[0.5, 0.5], &[0.5, 0.5]), Ordering::Equal);
    }

    #[test]
    fn cartesian_order_is_lexicographic() {
        let c = cartesian(&[vec![0.0, 1.0], vec![0.0, 0.5, 1.0]]);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![0.0, 0.0]);
        assert_eq!(c[1], vec![0.0, 0.5]);
        assert_eq!(c[5], vec![1.0, 1.0]);
    }
}
