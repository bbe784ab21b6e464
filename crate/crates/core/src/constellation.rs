//! Input alphabets, input distributions and constellations.
//!
//! Coordinates are kept unnormalized (PAM and QAM points are odd integers);
//! every SNR-dependent quantity is expressed relative to the mean symbol
//! energy `Es` of the constellation.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::asymptotics::ProjectionMatrix;
use crate::error::{Error, Result};
use crate::labeling::Labeling;

/// Tolerance on the total mass of a symbol distribution.
pub const DISTRIBUTION_SUM_TOLERANCE: f64 = 1e-12;

fn is_power_of_two(n: usize) -> bool {
    n >= 1 && n & (n - 1) == 0
}

/// `M` points in `N` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InputAlphabet {
    dim: usize,
    coords: Vec<f64>,
}

impl InputAlphabet {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::domain("an input alphabet needs at least one point"))?;
        if dim == 0 {
            return Err(Error::domain("alphabet points need at least one coordinate"));
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::domain(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    r.len()
                )));
            }
            if let Some(bad) = r.iter().find(|v| !v.is_finite()) {
                return Err(Error::domain(format!("point {i} has non-finite coordinate {bad}")));
            }
            coords.extend_from_slice(r);
        }
        InputAlphabet::from_flat(dim, coords)
    }

    pub(crate) fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let size = coords.len() / dim;
        if !is_power_of_two(size) || size * dim != coords.len() {
            return Err(Error::domain(format!(
                "alphabet size must be a power of two, got {size}"
            )));
        }
        Ok(InputAlphabet { dim, coords })
    }

    /// Equally spaced odd integers `x_i = -(M - 2i - 1)`.
    pub fn pam(size: usize) -> Result<Self> {
        if size < 2 || !is_power_of_two(size) {
            return Err(Error::domain(format!(
                "PAM size must be a power of two >= 2, got {size}"
            )));
        }
        let coords = (0..size).map(|i| -((size as f64) - 2.0 * i as f64 - 1.0)).collect();
        Ok(InputAlphabet { dim: 1, coords })
    }

    /// Unit-energy points at angles `(2i + 1) * pi / M`.
    pub fn psk(size: usize) -> Result<Self> {
        if size < 2 || !is_power_of_two(size) {
            return Err(Error::domain(format!(
                "PSK size must be a power of two >= 2, got {size}"
            )));
        }
        let coords = (0..size)
            .flat_map(|i| {
                let phi = (2 * i + 1) as f64 * PI / size as f64;
                [phi.cos(), phi.sin()]
            })
            .collect();
        Ok(InputAlphabet { dim: 2, coords })
    }

    /// Rectangular QAM: the ordered direct product of two PAM columns.
    pub fn qam(first: usize, second: usize) -> Result<Self> {
        InputAlphabet::pam(first)?.ordered_product(&InputAlphabet::pam(second)?)
    }

    /// One-dimensional hierarchical alphabet `x_i = sum_k (2 b_k(i) - 1) d_k`,
    /// where `b_k(i)` is bit `k` (least significant first) of `i`.
    pub fn hierarchical_pam(distances: &[f64]) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::domain("hierarchical PAM needs at least one distance"));
        }
        if let Some((k, d)) = distances
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.is_finite() && **d > 0.0))
        {
            return Err(Error::domain(format!("distance d_{k} = {d} must be positive")));
        }
        let m = distances.len();
        let coords: Vec<f64> = (0..1usize << m)
            .map(|i| {
                distances
                    .iter()
                    .enumerate()
                    .map(|(k, d)| if (i >> k) & 1 == 1 { *d } else { -*d })
                    .sum()
            })
            .collect();
        if let Some(i) = coords.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "hierarchical points overlap: x_{i} = {} is not below x_{} = {}",
                coords[i],
                i + 1,
                coords[i + 1]
            )));
        }
        Ok(InputAlphabet { dim: 1, coords })
    }

    /// Linear projection of the labeling's hypercube: `x_i = sum_k q_{i,k} v_k`.
    pub fn from_projection(labeling: &Labeling, projection: &ProjectionMatrix) -> Result<Self> {
        if projection.order() != labeling.order() {
            return Err(Error::domain(format!(
                "projection has {} rows but the labeling has order {}",
                projection.order(),
                labeling.order()
            )));
        }
        let q = labeling.modified_matrix();
        let dim = projection.dim();
        let mut coords = vec![0.0; labeling.size() * dim];
        for i in 0..labeling.size() {
            for k in 0..labeling.order() {
                let s = q.entry(i, k) as f64;
                for n in 0..dim {
                    coords[i * dim + n] += s * projection.get(k, n);
                }
            }
        }
        Ok(InputAlphabet { dim, coords })
    }

    /// Ordered direct product: row `q*i + j` is `[self_i, other_j]`.
    pub fn ordered_product(&self, other: &InputAlphabet) -> Result<Self> {
        let dim = self.dim + other.dim;
        let mut coords = Vec::with_capacity(self.size() * other.size() * dim);
        for a in self.points() {
            for b in other.points() {
                coords.extend_from_slice(a);
                coords.extend_from_slice(b);
            }
        }
        InputAlphabet::from_flat(dim, coords)
    }

    /// CSV with one point per row and `N` numeric columns. A non-numeric
    /// first line is treated as a header.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if rows.is_empty() && n == 0 => continue,
                Err(e) => {
                    return Err(Error::parse(format!("line {}: {e}", n + 1)));
                }
            }
        }
        InputAlphabet::from_rows(&rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        InputAlphabet::parse_csv(&text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in self.points() {
            let line: Vec<String> = p.iter().map(|v| crate::format::csv_float(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn size(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Number of real dimensions `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.point(i).iter().map(|v| v * v).sum()
    }

    /// Integer coordinates when every coordinate is an exact integer of
    /// modest magnitude.
    pub fn integer_coords(&self) -> Option<Vec<i64>> {
        self.coords
            .iter()
            .map(|&v| {
                if v.fract() == 0.0 && v.abs() < 1e9 {
                    Some(v as i64)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Reorders rows so that row `c` holds the point that `labeling` maps
    /// to codeword `c` (the natural-binary order).
    pub fn reorder_to_natural(&self, labeling: &Labeling) -> Result<InputAlphabet> {
        if labeling.size() != self.size() {
            return Err(Error::domain(format!(
                "labeling has {} codewords but the alphabet has {} points",
                labeling.size(),
                self.size()
            )));
        }
        let mut coords = vec![0.0; self.coords.len()];
        for i in 0..self.size() {
            let c = labeling.codeword(i) as usize;
            coords[c * self.dim..(c + 1) * self.dim].copy_from_slice(self.point(i));
        }
        Ok(InputAlphabet {
            dim: self.dim,
            coords,
        })
    }
}

/// Per-position bit probabilities `P_{C_k}(0)`.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct BitDistribution {
    p0: Vec<f64>,
}

impl BitDistribution {
    pub fn new(p0: Vec<f64>) -> Result<Self> {
        if p0.is_empty() {
            return Err(Error::domain("a bit distribution needs at least one position"));
        }
        if let Some((k, p)) = p0
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && (0.0..=1.0).contains(*p)))
        {
            return Err(Error::domain(format!("P_C{k}(0) = {p} is not a probability")));
        }
        Ok(BitDistribution { p0 })
    }

    pub fn uniform(order: usize) -> Self {
        BitDistribution {
            p0: vec![0.5; order],
        }
    }

    pub fn order(&self) -> usize {
        self.p0.len()
    }

    /// `P_{C_k}(u)`.
    pub fn prob(&self, k: usize, u: u8) -> f64 {
        if u == 0 {
            self.p0[k]
        } else {
            1.0 - self.p0[k]
        }
    }

    pub fn zeros(&self) -> &[f64] {
        &self.p0
    }
}

/// Symbol probabilities `P_X(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDistribution {
    probs: Vec<f64>,
}

impl SymbolDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("empty symbol distribution"));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= 0.0))
        {
            return Err(Error::domain(format!("P(x_{i}) = {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_SUM_TOLERANCE {
            return Err(Error::domain(format!(
                "symbol probabilities sum to {total}, not 1"
            )));
        }
        Ok(SymbolDistribution { probs })
    }

    pub fn uniform(size: usize) -> Self {
        SymbolDistribution {
            probs: vec![1.0 / size as f64; size],
        }
    }

    /// Product of bit probabilities: `P_X(x_i) = prod_k P_{C_k}(c_{i,k})`.
    pub fn bitwise(labeling: &Labeling, bits: &BitDistribution) -> Result<Self> {
        if bits.order() != labeling.order() {
            return Err(Error::domain(format!(
                "bit distribution has {} positions but the labeling has order {}",
                bits.order(),
                labeling.order()
            )));
        }
        let probs = (0..labeling.size())
            .map(|i| {
                (0..labeling.order())
                    .map(|k| bits.prob(k, labeling.bit(i, k)))
                    .product()
            })
            .collect();
        Ok(SymbolDistribution { probs })
    }

    pub fn size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.probs.len() as f64;
        self.probs.iter().all(|&p| p == u)
    }
}

/// The triple `[X, L, P]` with cached first and second moments.
#[derive(Debug, Clone)]
pub struct Constellation {
    alphabet: InputAlphabet,
    labeling: Labeling,
    distribution: SymbolDistribution,
    es: f64,
    mean: Vec<f64>,
}

impl Constellation {
    pub fn new(
        alphabet: InputAlphabet,
        labeling: Labeling,
        distribution: SymbolDistribution,
    ) -> Result<Self> {
        if labeling.size() != alphabet.size() {
            return Err(Error::domain(format!(
                "labeling has {} codewords but the alphabet has {} points",
                labeling.size(),
                alphabet.size()
            )));
        }
        if distribution.size() != alphabet.size() {
            return Err(Error::domain(format!(
                "distribution has {} entries but the alphabet has {} points",
                distribution.size(),
                alphabet.size()
            )));
        }
        let dim = alphabet.dim();
        let mut mean = vec![0.0; dim];
        let mut es = 0.0;
        for (i, p) in distribution.probs().iter().enumerate() {
            let x = alphabet.point(i);
            for n in 0..dim {
                mean[n] += p * x[n];
            }
            es += p * alphabet.energy(i);
        }
        if !(es > 0.0) {
            return Err(Error::domain(
                "mean symbol energy Es is zero; the constellation carries no signal",
            ));
        }
        Ok(Constellation {
            alphabet,
            labeling,
            distribution,
            es,
            mean,
        })
    }

    pub fn uniform(alphabet: InputAlphabet, labeling: Labeling) -> Result<Self> {
        let p = SymbolDistribution::uniform(alphabet.size());
        Constellation::new(alphabet, labeling, p)
    }

    pub fn bitwise(alphabet: InputAlphabet, labeling: Labeling, bits: &BitDistribution) -> Result<Self> {
        let p = SymbolDistribution::bitwise(&labeling, bits)?;
        Constellation::new(alphabet, labeling, p)
    }

    pub fn alphabet(&self) -> &InputAlphabet {
        &self.alphabet
    }

    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }

    pub fn distribution(&self) -> &SymbolDistribution {
        &self.distribution
    }

    pub fn order(&self) -> usize {
        self.labeling.order()
    }

    pub fn size(&self) -> usize {
        self.alphabet.size()
    }

    pub fn dim(&self) -> usize {
        self.alphabet.dim()
    }

    /// Mean symbol energy `Es = sum_i P_X(x_i) ||x_i||^2`.
    pub fn es(&self) -> f64 {
        self.es
    }

    /// `E[X]`.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn mean_energy(&self) -> f64 {
        self.mean.iter().map(|v| v * v).sum()
    }

    pub fn index_set(&self, k: usize, u: u8) -> Vec<usize> {
        self.labeling.index_set(k, u)
    }

    /// Bit marginal `P_{C_k}(u)`.
    pub fn bit_prob(&self, k: usize, u: u8) -> f64 {
        (0..self.size())
            .filter(|&i| self.labeling.bit(i, k) == u)
            .map(|i| self.distribution.prob(i))
            .sum()
    }

    pub fn bit_distribution(&self) -> BitDistribution {
        BitDistribution {
            p0: (0..self.order()).map(|k| self.bit_prob(k, 0)).collect(),
        }
    }

    /// True if `P` factors into its bit marginals to within `tol`.
    pub fn is_bitwise_product(&self, tol: f64) -> bool {
        let bits = self.bit_distribution();
        match SymbolDistribution::bitwise(&self.labeling, &bits) {
            Ok(p) => p
                .probs()
                .iter()
                .zip(self.distribution.probs())
                .all(|(a, b)| (a - b).abs() <= tol),
            Err(_) => false,
        }
    }

    /// `P_{X | C_k = u}`: `P_X(x_i) / P_{C_k}(u)` on `I_{k,u}`, zero elsewhere.
    pub fn conditional_distribution(&self, k: usize, u: u8) -> Result<SymbolDistribution> {
        if k >= self.order() || u > 1 {
            return Err(Error::domain(format!(
                "bit position {k} / value {u} out of range for order {}",
                self.order()
            )));
        }
        let pu = self.bit_prob(k, u);
        if pu <= 0.0 {
            return Err(Error::domain(format!(
                "cannot condition on C_{k} = {u}: it has probability zero"
            )));
        }
        let probs = (0..self.size())
            .map(|i| {
                if self.labeling.bit(i, k) == u {
                    self.distribution.prob(i) / pu
                } else {
                    0.0
                }
            })
            .collect();
        Ok(SymbolDistribution { probs })
    }

    /// `E[X | C_k = u]`, or `None` when `P_{C_k}(u) = 0`.
    pub fn conditional_mean(&self, k: usize, u: u8) -> Option<Vec<f64>> {
        let pu = self.bit_prob(k, u);
        if pu <= 0.0 {
            return None;
        }
        let dim = self.dim();
        let mut acc = vec![0.0; dim];
        for i in self.labeling.index_set(k, u) {
            let p = self.distribution.prob(i);
            for (a, x) in acc.iter_mut().zip(self.alphabet.point(i)) {
                *a += p * x;
            }
        }
        Some(acc.into_iter().map(|v| v / pu).collect())
    }

    /// Entropy of the symbol distribution in bits.
    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(self.distribution.probs())
    }

    pub fn with_distribution(&self, distribution: SymbolDistribution) -> Result<Self> {
        Constellation::new(self.alphabet.clone(), self.labeling.clone(), distribution)
    }
}

pub(crate) fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-point constellation in {} dimension(s), Es = {}",
            self.size(),
            self.dim(),
            self.es
        )
    }
}

/// Scalar channel description used in SNR and Eb/N0 conversions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    fading_second_moment: f64,
    dim: usize,
}

impl ChannelSpec {
    pub fn new(fading_second_moment: f64, dim: usize) -> Result<Self> {
        if !(fading_second_moment.is_finite() && fading_second_moment > 0.0) {
            return Err(Error::domain(format!(
                "E[H^2] must be finite and positive, got {fading_second_moment}"
            )));
        }
        if dim == 0 {
            return Err(Error::domain("channel dimension must be at least 1"));
        }
        Ok(ChannelSpec {
            fading_second_moment,
            dim,
        })
    }

    pub fn awgn(dim: usize) -> Self {
        ChannelSpec {
            fading_second_moment: 1.0,
            dim: dim.max(1),
        }
    }

    /// `E[H^2]`.
    pub fn fading_second_moment(&self) -> f64 {
        self.fading_second_moment
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `Eb/N0 = SNR / (E[H^2] Rc)`.
pub fn snr_to_ebn0(snr: f64, rate: f64, channel: &ChannelSpec) -> Result<f64> {
    check_conversion(snr, rate)?;
    Ok(snr / (channel.fading_second_moment * rate))
}

/// `SNR = E[H^2] Rc Eb/N0`.
pub fn ebn0_to_snr(ebn0: f64, rate: f64, channel: &ChannelSpec) -> Result<f64> {
    check_conversion(ebn0, rate)?;
    Ok(ebn0 * channel.fading_second_moment * rate)
}

fn check_conversion(value: f64, rate: f64) -> Result<()> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::domain(format!(
            "rate Rc must be positive for SNR/Eb/N0 conversion, got {rate}; \
             use the zero-rate asymptotics instead"
        )));
    }
    if !(value >= 0.0) {
        return Err(Error::domain(format!("ratio must be non-negative, got {value}")));
    }
    Ok(())
}

/// `P_X(x_i) = prod_k P_{C_k}(c_{i,k})`.
pub fn bitwise_symbol_distribution(
    labeling: &Labeling,
    bits: &BitDistribution,
) -> Result<SymbolDistribution> {
    SymbolDistribution::bitwise(labeling, bits)
}

pub fn conditional_symbol_distribution(
    constellation: &Constellation,
    k: usize,
    u: u8,
) -> Result<SymbolDistribution> {
    constellation.conditional_distribution(k, u)
}

/// `10 log10(x)`.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pam_points() {
        assert_eq!(InputAlphabet::pam(2).unwrap().coords(), &[-1.0, 1.0]);
        assert_eq!(
            InputAlphabet::pam(8).unwrap().coords(),
            &[-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0]
        );
        assert!(InputAlphabet::pam(6).is_err());
        assert!(InputAlphabet::pam(1).is_err());
    }

    #[test]
    fn pam_uniform_energy() {
        for m in 1..=4 {
            let size = 1 << m;
            let c = Constellation::uniform(InputAlphabet::pam(size).unwrap(), Labeling::nbc(m).unwrap())
                .unwrap();
            let expected = ((size * size - 1) as f64) / 3.0;
            assert_abs_diff_eq!(c.es(), expected, epsilon = 1e-12);
            assert_eq!(c.mean(), &[0.0]);
        }
    }

    #[test]
    fn psk_points() {
        let p4 = InputAlphabet::psk(4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [[h, h], [-h, h], [-h, -h], [h, -h]];
        for (p, e) in p4.points().zip(expected) {
            assert_abs_diff_eq!(p[0], e[0], epsilon = 1e-15);
            assert_abs_diff_eq!(p[1], e[1], epsilon = 1e-15);
        }
        let p8 = InputAlphabet::psk(8).unwrap();
        assert_abs_diff_eq!(p8.point(0)[0], 0.923_879_532_511_286_7, epsilon = 1e-15);
        assert_abs_diff_eq!(p8.point(0)[1], 0.382_683_432_365_089_8, epsilon = 1e-15);
        for i in 0..8 {
            assert_abs_diff_eq!(p8.energy(i), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn qam_product() {
        let q = InputAlphabet::qam(2, 2).unwrap();
        assert_eq!(q.coords(), &[-1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0]);
        let q42 = InputAlphabet::qam(4, 2).unwrap();
        assert_eq!(q42.size(), 8);
        assert_eq!(q42.point(1), &[-3.0, 1.0]);
        assert_eq!(q42.point(2), &[-1.0, -1.0]);
        assert_eq!(q42.point(7), &[3.0, 1.0]);
        let c = Constellation::uniform(InputAlphabet::qam(4, 4).unwrap(), Labeling::nbc(4).unwrap())
            .unwrap();
        assert_abs_diff_eq!(c.es(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn hierarchical_points() {
        let h = InputAlphabet::hierarchical_pam(&[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(h, InputAlphabet::pam(8).unwrap());
        let h = InputAlphabet::hierarchical_pam(&[1.0, 2.0, 6.0]).unwrap();
        assert_eq!(h.coords(), &[-9.0, -7.0, -5.0, -3.0, 3.0, 5.0, 7.0, 9.0]);
        let err = InputAlphabet::hierarchical_pam(&[2.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("x_1"), "{err}");
        assert!(InputAlphabet::hierarchical_pam(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn bitwise_distribution_examples() {
        let l1 = Labeling::nbc(1).unwrap();
        let p = SymbolDistribution::bitwise(&l1, &BitDistribution::new(vec![0.7]).unwrap()).unwrap();
        assert_eq!(p.probs(), &[0.7, 0.30000000000000004]);

        let l2 = Labeling::nbc(2).unwrap();
        let bits = BitDistribution::new(vec![0.5, 0.25]).unwrap();
        let p = SymbolDistribution::bitwise(&l2, &bits).unwrap();
        assert_eq!(p.probs(), &[0.125, 0.375, 0.125, 0.375]);

        let l3 = Labeling::brgc(3).unwrap();
        let p = SymbolDistribution::bitwise(&l3, &BitDistribution::uniform(3)).unwrap();
        assert!(p.is_uniform());
    }

    #[test]
    fn conditional_distribution_examples() {
        let l2 = Labeling::nbc(2).unwrap();
        let bits = BitDistribution::new(vec![0.5, 0.25]).unwrap();
        let c = Constellation::bitwise(InputAlphabet::pam(4).unwrap(), l2, &bits).unwrap();
        let cond = c.conditional_distribution(1, 0).unwrap();
        assert_eq!(cond.probs(), &[0.5, 0.0, 0.5, 0.0]);
        let cond = c.conditional_distribution(0, 0).unwrap();
        assert_eq!(cond.probs(), &[0.25, 0.75, 0.0, 0.0]);
        for k in 0..2 {
            for u in 0..2 {
                let sum: f64 = c.conditional_distribution(k, u).unwrap().probs().iter().sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-15);
            }
        }

        let c8 = Constellation::uniform(InputAlphabet::pam(8).unwrap(), Labeling::nbc(3).unwrap()).unwrap();
        let cond = c8.conditional_distribution(2, 0).unwrap();
        let support: Vec<usize> = (0..8).filter(|&i| cond.prob(i) > 0.0).collect();
        assert_eq!(support, vec![0, 2, 4, 6]);
        assert!(support.iter().all(|&i| cond.prob(i) == 0.25));
    }

    #[test]
    fn conditioning_on_impossible_bit_fails() {
        let bits = BitDistribution::new(vec![1.0, 0.5]).unwrap();
        let c = Constellation::bitwise(InputAlphabet::pam(4).unwrap(), Labeling::nbc(2).unwrap(), &bits)
            .unwrap();
        assert!(c.conditional_distribution(0, 1).is_err());
        assert!(c.conditional_mean(0, 1).is_none());
    }

    #[test]
    fn distribution_validation() {
        assert!(SymbolDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(SymbolDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(BitDistribution::new(vec![1.1]).is_err());
    }

    #[test]
    fn zero_energy_is_rejected() {
        let x = InputAlphabet::from_rows(&[[0.0], [0.0]]).unwrap();
        assert!(Constellation::uniform(x, Labeling::trivial()).is_err());
    }

    #[test]
    fn conversions() {
        let ch = ChannelSpec::awgn(1);
        assert_eq!(snr_to_ebn0(1.0, 1.0, &ch).unwrap(), 1.0);
        assert!(snr_to_ebn0(1.0, 0.0, &ch).is_err());
        let ch = ChannelSpec::new(2.5, 2).unwrap();
        for &(snr, rc) in &[(0.3, 0.1), (17.0, 2.5), (1e-4, 1e-3)] {
            let e = snr_to_ebn0(snr, rc, &ch).unwrap();
            let back = ebn0_to_snr(e, rc, &ch).unwrap();
            assert!((back - snr).abs() <= 1e-14 * snr);
        }
        assert_abs_diff_eq!(to_db(std::f64::consts::LN_2), -1.591_745_389_548_615, epsilon = 1e-12);
        assert!(ChannelSpec::new(0.0, 1).is_err());
    }

    #[test]
    fn csv_parsing() {
        let x = InputAlphabet::parse_csv("x,y\n1,0\n0,1\n-1,0\n0,-1\n").unwrap();
        assert_eq!(x.size(), 4);
        assert_eq!(x.dim(), 2);
        assert!(InputAlphabet::parse_csv("1\n2\n3\n").is_err());
        assert!(InputAlphabet::parse_csv("1,2\n3\n").is_err());
        let round = InputAlphabet::parse_csv(&InputAlphabet::psk(8).unwrap().to_csv()).unwrap();
        assert_eq!(round.size(), 8);
    }
}
