//! First-order (low-SNR) behaviour of the coded-modulation and BICM
//! capacities, closed forms for PAM and PSK, and first-order optimality.
//!
//! `alpha` is the slope `C(SNR)/SNR` at `SNR -> 0`, measured in bits per
//! channel use per unit SNR. The Shannon limit corresponds to
//! `alpha = log2(e)`.

use std::f64::consts::{LN_2, LOG2_E, PI};

use num_rational::Ratio;
use serde::Serialize;

use crate::constellation::{Constellation, InputAlphabet};
use crate::error::{Error, Result};
use crate::hadamard::ht;
use crate::labeling::{Labeling, LabelingKind};

/// Relative residual accepted as first-order optimal for non-integer
/// alphabets.
pub const FOO_TOLERANCE: f64 = 1e-9;

/// `alpha` together with the zero-rate Eb/N0 it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaResult {
    pub alpha: f64,
    /// `1 / alpha`, infinite when `alpha = 0`.
    pub zero_rate_ebn0: f64,
    pub zero_rate_ebn0_db: f64,
}

impl AlphaResult {
    pub fn new(alpha: f64) -> Self {
        // rounding can push a vanishing alpha slightly negative
        let alpha = if alpha < 0.0 && alpha > -1e-12 { 0.0 } else { alpha };
        let zero_rate_ebn0 = if alpha > 0.0 { 1.0 / alpha } else { f64::INFINITY };
        AlphaResult {
            alpha,
            zero_rate_ebn0,
            zero_rate_ebn0_db: 10.0 * zero_rate_ebn0.log10(),
        }
    }

    /// `alpha / log2(e)`, the fraction of the Shannon-limit slope.
    pub fn normalized(&self) -> f64 {
        self.alpha / LOG2_E
    }

    /// Zero-rate SNR gap to the AWGN capacity, `10 log10(log2(e) / alpha)`.
    pub fn gap_db(&self) -> f64 {
        10.0 * (LOG2_E / self.alpha).log10()
    }
}

/// An `m x N` matrix whose rows `v_k` project the `m`-cube onto an alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl ProjectionMatrix {
    pub fn new<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::domain("a projection matrix needs at least one row"))?;
        if dim == 0 {
            return Err(Error::domain("projection rows need at least one coordinate"));
        }
        let mut entries = Vec::with_capacity(rows.len() * dim);
        for (k, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim || r.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("projection row {k} is malformed")));
            }
            entries.extend_from_slice(r);
        }
        Ok(ProjectionMatrix { dim, entries })
    }

    /// Number of rows `m`.
    pub fn order(&self) -> usize {
        self.entries.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, n: usize) -> f64 {
        self.entries[k * self.dim + n]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.entries[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.entries.chunks_exact(self.dim)
    }
}

/// Projection giving the "one-three-three-one" constellation with the
/// natural binary code.
pub fn otto_projection() -> ProjectionMatrix {
    ProjectionMatrix::new(&[[-1.0, -1.0], [1.0, 0.0], [-1.0, 1.0]]).expect("valid rows")
}

/// Projection giving the "one-two-one-two-one" constellation (a hexagon
/// plus two points at the origin) with the natural binary code.
pub fn ototo_projection() -> ProjectionMatrix {
    let (c, s) = ((PI / 3.0).cos(), (PI / 3.0).sin());
    ProjectionMatrix::new(&[[-1.0, 0.0], [c, s], [c, -s]]).expect("valid rows")
}

/// `alpha = log2(e) (1 - ||E[X]||^2 / Es)`.
pub fn alpha_cm(omega: &Constellation) -> AlphaResult {
    AlphaResult::new(LOG2_E * (1.0 - omega.mean_energy() / omega.es()))
}

/// BICM coefficient from the conditional means:
/// `(log2 e / Es) [sum_k sum_u P_{C_k}(u) ||E[X|C_k=u]||^2 - m ||E[X]||^2]`.
///
/// A bit value of probability zero contributes nothing.
pub fn alpha_bicm(omega: &Constellation) -> AlphaResult {
    let mut acc = 0.0;
    for k in 0..omega.order() {
        for u in 0..2u8 {
            if let Some(mean) = omega.conditional_mean(k, u) {
                acc += omega.bit_prob(k, u) * mean.iter().map(|v| v * v).sum::<f64>();
            }
        }
    }
    acc -= omega.order() as f64 * omega.mean_energy();
    let alpha = AlphaResult::new(LOG2_E * acc / omega.es());
    debug_assert!(
        (alpha.alpha - alpha_bicm_signed_sums(omega)).abs() <= 1e-12 * LOG2_E.max(alpha.alpha.abs()),
        "conditional-mean and signed-sum forms disagree"
    );
    alpha
}

/// The same coefficient written with the signed and unsigned sums
/// `sum_i s_{i,k} P_i x_i / sqrt(P_{C_k}(c_{i,k}))`, `s_{i,k} = (-1)^{c_{i,k}}`.
pub fn alpha_bicm_signed_sums(omega: &Constellation) -> f64 {
    let dim = omega.dim();
    let labeling = omega.labeling();
    let probs = omega.distribution().probs();
    let mut acc = 0.0;
    for k in 0..omega.order() {
        let mut signed = vec![0.0; dim];
        let mut plain = vec![0.0; dim];
        for (i, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let c = labeling.bit(i, k);
            let w = p / omega.bit_prob(k, c).sqrt();
            let s = if c == 0 { w } else { -w };
            for (n, x) in omega.alphabet().point(i).iter().enumerate() {
                signed[n] += s * x;
                plain[n] += w * x;
            }
        }
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
        acc += norm(&signed) + norm(&plain) - 2.0 * omega.mean_energy();
    }
    LOG2_E * acc / (2.0 * omega.es())
}

fn check_sizes(alphabet: &InputAlphabet, labeling: &Labeling) -> Result<()> {
    if alphabet.size() != labeling.size() {
        return Err(Error::domain(format!(
            "labeling has {} codewords but the alphabet has {} points",
            labeling.size(),
            alphabet.size()
        )));
    }
    Ok(())
}

fn uniform_energy(alphabet: &InputAlphabet) -> Result<f64> {
    let es = (0..alphabet.size()).map(|i| alphabet.energy(i)).sum::<f64>() / alphabet.size() as f64;
    if es > 0.0 {
        Ok(es)
    } else {
        Err(Error::domain("all-zero alphabet has Es = 0"))
    }
}

/// `S_k = sum_i q_{i,k} x_i` for every column of the modified matrix,
/// stored row-major as `m x N`.
fn signed_column_sums(alphabet: &InputAlphabet, labeling: &Labeling) -> Vec<f64> {
    let dim = alphabet.dim();
    let q = labeling.modified_matrix();
    let mut s = vec![0.0; labeling.order() * dim];
    for i in 0..alphabet.size() {
        for k in 0..labeling.order() {
            let sign = q.entry(i, k) as f64;
            for (n, x) in alphabet.point(i).iter().enumerate() {
                s[k * dim + n] += sign * x;
            }
        }
    }
    s
}

/// BICM coefficient under the uniform distribution,
/// `(log2 e / Es) sum_k ||(1/M) sum_i q_{i,k} x_i||^2`.
pub fn alpha_bicm_uniform(alphabet: &InputAlphabet, labeling: &Labeling) -> Result<AlphaResult> {
    check_sizes(alphabet, labeling)?;
    if let Some(exact) = alpha_bicm_uniform_exact(alphabet, labeling)? {
        return Ok(AlphaResult::new(LOG2_E * ratio_to_f64(exact)));
    }
    let es = uniform_energy(alphabet)?;
    let m = alphabet.size() as f64;
    let s = signed_column_sums(alphabet, labeling);
    let energy: f64 = s.iter().map(|v| (v / m) * (v / m)).sum();
    Ok(AlphaResult::new(LOG2_E * energy / es))
}

/// `alpha / log2(e)` as an exact fraction when every coordinate is an
/// integer: `sum_k ||sum_i q_{i,k} x_i||^2 / (M sum_i ||x_i||^2)`.
pub fn alpha_bicm_uniform_exact(alphabet: &InputAlphabet, labeling: &Labeling) -> Result<Option<Ratio<i128>>> {
    check_sizes(alphabet, labeling)?;
    let Some(coords) = alphabet.integer_coords() else {
        return Ok(None);
    };
    let (num, den) = exact_kernel(&coords, alphabet.dim(), labeling);
    if den == 0 {
        return Err(Error::domain("all-zero alphabet has Es = 0"));
    }
    Ok(Some(Ratio::new(num, den * alphabet.size() as i128)))
}

/// Returns `(sum_k ||S_k||^2, sum_i ||x_i||^2)` over integers.
pub(crate) fn exact_kernel(coords: &[i64], dim: usize, labeling: &Labeling) -> (i128, i128) {
    let m = labeling.order();
    let mut sums = vec![0i128; m * dim];
    let mut energy = 0i128;
    for (i, x) in coords.chunks_exact(dim).enumerate() {
        let c = labeling.codeword(i);
        for k in 0..m {
            let negative = (c >> k) & 1 == 1;
            for (n, &v) in x.iter().enumerate() {
                if negative {
                    sums[k * dim + n] -= v as i128;
                } else {
                    sums[k * dim + n] += v as i128;
                }
            }
        }
        energy += x.iter().map(|&v| (v as i128) * (v as i128)).sum::<i128>();
    }
    (sums.iter().map(|s| s * s).sum(), energy)
}

pub(crate) fn ratio_to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// BICM coefficient of the natural binary code from the Hadamard spectrum
/// of `alphabet`, whose rows must be in natural-binary label order:
/// `(log2 e / Es) sum_k ||x~_{2^k}||^2`.
pub fn alpha_bicm_ht(alphabet: &InputAlphabet) -> Result<AlphaResult> {
    let es = uniform_energy(alphabet)?;
    let spectrum = ht(alphabet);
    let mut energy = 0.0;
    let mut j = 1;
    while j < spectrum.size() {
        energy += spectrum.energy(j);
        j <<= 1;
    }
    Ok(AlphaResult::new(LOG2_E * energy / es))
}

fn validate_kind_order(kind: LabelingKind, size: usize) -> Result<usize> {
    if size < 2 || !size.is_power_of_two() {
        return Err(Error::domain(format!("M must be a power of two >= 2, got {size}")));
    }
    let m = size.trailing_zeros() as usize;
    if m < kind.min_order() {
        return Err(Error::domain(format!(
            "the {kind} needs m >= {}, got M = {size}",
            kind.min_order()
        )));
    }
    Ok(m)
}

/// Closed form of `alpha / log2(e)` for uniform `M`-PAM.
pub fn alpha_pam_closed_exact(size: usize, kind: LabelingKind) -> Result<Ratio<i128>> {
    validate_kind_order(kind, size)?;
    let m2 = (size * size) as i128;
    Ok(match kind {
        LabelingKind::Brgc | LabelingKind::Fbc => Ratio::new(3 * m2, 4 * (m2 - 1)),
        LabelingKind::Nbc => Ratio::from_integer(1),
        LabelingKind::Bsgc => Ratio::from_integer(0),
    })
}

pub fn alpha_pam_closed(size: usize, kind: LabelingKind) -> Result<AlphaResult> {
    Ok(AlphaResult::new(LOG2_E * ratio_to_f64(alpha_pam_closed_exact(size, kind)?)))
}

/// `sum_{k=2}^{m} tan^2(pi / 2^k)`.
pub fn fbc_tan_sum(order: usize) -> f64 {
    (2..=order).map(|k| (PI / 2f64.powi(k as i32)).tan().powi(2)).sum()
}

/// Closed form for uniform `M`-PSK, `M >= 4`.
pub fn alpha_psk_closed(size: usize, kind: LabelingKind) -> Result<AlphaResult> {
    let m = validate_kind_order(kind, size)?;
    if size < 4 {
        return Err(Error::domain("PSK closed forms hold for M >= 4"));
    }
    let mf = size as f64;
    let nbc = 4.0 / (mf * mf * (PI / mf).sin().powi(2));
    let ratio = match kind {
        LabelingKind::Brgc => 2.0 * nbc,
        LabelingKind::Nbc => nbc,
        LabelingKind::Bsgc => nbc * (1.0 + (1.0 - 1.0 / (2.0 * PI / mf).cos()).powi(2)),
        LabelingKind::Fbc => nbc * (1.0 + fbc_tan_sum(m)),
    };
    Ok(AlphaResult::new(LOG2_E * ratio))
}

/// `alpha / log2(e)` of uniform PAM as `M -> infinity`.
pub fn pam_alpha_limit(kind: LabelingKind) -> f64 {
    match kind {
        LabelingKind::Brgc | LabelingKind::Fbc => 0.75,
        LabelingKind::Nbc => 1.0,
        LabelingKind::Bsgc => 0.0,
    }
}

/// `alpha / log2(e)` of uniform PSK as `M -> infinity`; the folded code
/// sums the tangent series to `terms` terms.
pub fn psk_alpha_limit(kind: LabelingKind, terms: usize) -> f64 {
    let nbc = 4.0 / (PI * PI);
    match kind {
        LabelingKind::Brgc => 2.0 * nbc,
        LabelingKind::Nbc | LabelingKind::Bsgc => nbc,
        LabelingKind::Fbc => nbc * (1.0 + fbc_tan_sum(terms)),
    }
}

/// Zero-rate Eb/N0 in dB for a normalized slope `alpha / log2(e)`.
pub fn zero_rate_ebn0_db(normalized_alpha: f64) -> f64 {
    if normalized_alpha > 0.0 {
        10.0 * (LN_2 / normalized_alpha).log10()
    } else {
        f64::INFINITY
    }
}

/// Outcome of the first-order optimality test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FooVerdict {
    pub is_foo: bool,
    /// Least-squares `V = (1/M) Q^T X`.
    pub projection: ProjectionMatrix,
    /// `||Q V - X||^2 / (M Es)`, equal to `1 - alpha / log2(e)`.
    pub residual: f64,
    /// The same residual from the Hadamard spectrum of the rows in natural
    /// label order.
    pub residual_hadamard: f64,
    /// True when the verdict was decided in integer arithmetic.
    pub exact: bool,
}

/// Decides whether `X = Q(L) V` for some `V` (uniform distribution).
pub fn is_foo(alphabet: &InputAlphabet, labeling: &Labeling, tolerance: f64) -> Result<FooVerdict> {
    check_sizes(alphabet, labeling)?;
    let es = uniform_energy(alphabet)?;
    let dim = alphabet.dim();
    let size = alphabet.size();
    let sums = signed_column_sums(alphabet, labeling);
    let rows: Vec<Vec<f64>> = sums
        .chunks_exact(dim)
        .map(|s| s.iter().map(|v| v / size as f64).collect())
        .collect();
    let projection = if rows.is_empty() {
        ProjectionMatrix {
            dim,
            entries: Vec::new(),
        }
    } else {
        ProjectionMatrix::new(&rows)?
    };

    let q = labeling.modified_matrix();
    let mut error = 0.0;
    for i in 0..size {
        for n in 0..dim {
            let fit: f64 = (0..labeling.order())
                .map(|k| q.entry(i, k) as f64 * projection.get(k, n))
                .sum();
            let d = alphabet.point(i)[n] - fit;
            error += d * d;
        }
    }
    let residual = error / (size as f64 * es);

    let spectrum = ht(&alphabet.reorder_to_natural(labeling)?);
    let residual_hadamard = (spectrum.energy(0) + spectrum.off_cube_energy()) / es;

    let (is_foo, exact) = match alphabet.integer_coords() {
        Some(coords) => {
            let m = labeling.order();
            let isums: Vec<i128> = {
                let mut s = vec![0i128; m * dim];
                for (i, x) in coords.chunks_exact(dim).enumerate() {
                    for k in 0..m {
                        for (n, &v) in x.iter().enumerate() {
                            s[k * dim + n] += q.entry(i, k) as i128 * v as i128;
                        }
                    }
                }
                s
            };
            let ok = coords.chunks_exact(dim).enumerate().all(|(i, x)| {
                x.iter().enumerate().all(|(n, &v)| {
                    let fit: i128 = (0..m).map(|k| q.entry(i, k) as i128 * isums[k * dim + n]).sum();
                    size as i128 * v as i128 == fit
                })
            });
            (ok, true)
        }
        None => (residual <= tolerance, false),
    };
    Ok(FooVerdict {
        is_foo,
        projection,
        residual,
        residual_hadamard,
        exact,
    })
}

/// First-order optimality for constant-energy alphabets: `X = Q V` with
/// pairwise orthogonal rows of `V`.
pub fn constant_energy_foo_check(alphabet: &InputAlphabet, labeling: &Labeling, tolerance: f64) -> Result<bool> {
    let e0 = alphabet.energy(0);
    if let Some(i) = (0..alphabet.size()).find(|&i| (alphabet.energy(i) - e0).abs() > tolerance * e0.max(1.0)) {
        return Err(Error::domain(format!(
            "alphabet is not constant-energy: ||x_{i}||^2 = {} but ||x_0||^2 = {e0}",
            alphabet.energy(i)
        )));
    }
    let verdict = is_foo(alphabet, labeling, tolerance)?;
    let v = &verdict.projection;
    let orthogonal = (0..v.order()).all(|a| {
        (a + 1..v.order()).all(|b| {
            let dot: f64 = v.row(a).iter().zip(v.row(b)).map(|(x, y)| x * y).sum();
            dot.abs() <= tolerance * e0.max(1.0)
        })
    });
    if verdict.is_foo != (verdict.is_foo && orthogonal) {
        return Err(Error::domain(
            "projection reconstructs the alphabet but its rows are not orthogonal",
        ));
    }
    Ok(verdict.is_foo && orthogonal)
}

/// First-order optimality of rectangular QAM with labeling `L`, decided
/// structurally (trivial variant of the natural binary code) and checked
/// against [`is_foo`] on the QAM alphabet.
pub fn qam_foo_check(first: usize, second: usize, labeling: &Labeling) -> Result<bool> {
    let alphabet = InputAlphabet::qam(first, second)?;
    if labeling.size() != alphabet.size() {
        return Err(Error::domain(format!(
            "labeling of order {} does not fit a {first}x{second} QAM",
            labeling.order()
        )));
    }
    let structural = labeling.is_trivial_variant_of(&Labeling::nbc(labeling.order())?);
    let verdict = is_foo(&alphabet, labeling, FOO_TOLERANCE)?;
    if structural != verdict.is_foo {
        return Err(Error::domain(format!(
            "structural test ({structural}) and projection test ({}) disagree",
            verdict.is_foo
        )));
    }
    Ok(structural)
}

/// Alphabet family in the first-order tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pam,
    Psk,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Pam => "pam",
            Family::Psk => "psk",
        })
    }
}

/// One entry of the zero-rate tables. `size = None` is the `M -> infinity`
/// limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableEntry {
    pub family: Family,
    pub size: Option<usize>,
    pub labeling: LabelingKind,
    pub normalized_alpha: f64,
    pub zero_rate_ebn0_db: f64,
    pub gap_db: f64,
}

fn entry(family: Family, size: Option<usize>, labeling: LabelingKind, normalized_alpha: f64) -> TableEntry {
    TableEntry {
        family,
        size,
        labeling,
        normalized_alpha,
        zero_rate_ebn0_db: zero_rate_ebn0_db(normalized_alpha),
        gap_db: if normalized_alpha > 0.0 {
            -10.0 * normalized_alpha.log10()
        } else {
            f64::INFINITY
        },
    }
}

/// Zero-rate Eb/N0 limits as `M -> infinity`.
pub fn limit_table() -> Vec<TableEntry> {
    let mut out = Vec::new();
    for kind in LabelingKind::ALL {
        out.push(entry(Family::Pam, None, kind, pam_alpha_limit(kind)));
    }
    for kind in LabelingKind::ALL {
        out.push(entry(Family::Psk, None, kind, psk_alpha_limit(kind, 64)));
    }
    out
}

/// Zero-rate SNR gaps for finite PAM and PSK sizes.
pub fn gap_table(pam_sizes: &[usize], psk_sizes: &[usize]) -> Vec<TableEntry> {
    let mut out = Vec::new();
    for &size in pam_sizes {
        for kind in LabelingKind::ALL {
            if let Ok(a) = alpha_pam_closed(size, kind) {
                out.push(entry(Family::Pam, Some(size), kind, a.normalized()));
            }
        }
    }
    for &size in psk_sizes {
        for kind in LabelingKind::ALL {
            if let Ok(a) = alpha_psk_closed(size, kind) {
                out.push(entry(Family::Psk, Some(size), kind, a.normalized()));
            }
        }
    }
    out
}
