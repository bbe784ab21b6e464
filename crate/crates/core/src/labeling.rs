//! Binary labelings.
//!
//! A labeling of order `m` assigns a distinct length-`m` binary codeword to
//! each of the `M = 2^m` constellation points. Row `i` holds the codeword
//! `c_i = [c_{i,0}, ..., c_{i,m-1}]` of symbol `i`.
//!
//! Codewords are stored as integers whose most significant bit is `c_{i,0}`,
//! so the natural binary code of order `m` is the identity `i -> i`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::next_permutation;

/// Largest supported order; keeps codewords and index arithmetic inside `u32`.
pub const MAX_ORDER: usize = 20;

/// Orders up to this value materialize their trivial-variant set.
pub const MAX_MATERIALIZED_VARIANT_ORDER: usize = 4;

/// The four named labelings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelingKind {
    /// Binary reflected Gray code.
    Brgc,
    /// Natural binary code.
    Nbc,
    /// Binary semi-Gray code.
    Bsgc,
    /// Folded binary code.
    Fbc,
}

impl LabelingKind {
    pub const ALL: [LabelingKind; 4] = [
        LabelingKind::Brgc,
        LabelingKind::Nbc,
        LabelingKind::Bsgc,
        LabelingKind::Fbc,
    ];

    /// Smallest order for which the construction is defined.
    pub fn min_order(self) -> usize {
        match self {
            LabelingKind::Brgc | LabelingKind::Nbc => 1,
            LabelingKind::Bsgc => 3,
            LabelingKind::Fbc => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LabelingKind::Brgc => "brgc",
            LabelingKind::Nbc => "nbc",
            LabelingKind::Bsgc => "bsgc",
            LabelingKind::Fbc => "fbc",
        }
    }
}

impl fmt::Display for LabelingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for LabelingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "brgc" | "gray" => Ok(LabelingKind::Brgc),
            "nbc" | "natural" => Ok(LabelingKind::Nbc),
            "bsgc" => Ok(LabelingKind::Bsgc),
            "fbc" | "folded" => Ok(LabelingKind::Fbc),
            other => Err(Error::parse(format!(
                "unknown labeling `{other}` (expected brgc, nbc, bsgc or fbc)"
            ))),
        }
    }
}

/// A bijective binary labeling of order `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Labeling {
    order: usize,
    codewords: Vec<u32>,
}

impl Labeling {
    /// Builds a labeling from integer codewords (`c_{i,0}` is the most significant bit).
    pub fn from_codewords(order: usize, codewords: Vec<u32>) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::domain(format!(
                "labeling order must be in 1..={MAX_ORDER}, got {order}"
            )));
        }
        let size = 1usize << order;
        if codewords.len() != size {
            return Err(Error::domain(format!(
                "a labeling of order {order} needs {size} codewords, got {}",
                codewords.len()
            )));
        }
        let mut seen = vec![false; size];
        for (i, &c) in codewords.iter().enumerate() {
            let c = c as usize;
            if c >= size {
                return Err(Error::domain(format!(
                    "codeword {c} at row {i} does not fit in {order} bits"
                )));
            }
            if seen[c] {
                return Err(Error::domain(format!(
                    "codeword at row {i} is repeated; a labeling must be a bijection"
                )));
            }
            seen[c] = true;
        }
        Ok(Labeling { order, codewords })
    }

    /// Builds a labeling from explicit rows of binary digits.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::domain("a labeling needs at least two rows"))?;
        let order = first.as_ref().len();
        let mut codewords = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != order {
                return Err(Error::domain(format!(
                    "row {i} has {} bits, expected {order}",
                    row.len()
                )));
            }
            let mut c = 0u32;
            for &b in row {
                if b > 1 {
                    return Err(Error::domain(format!("row {i} contains non-binary digit {b}")));
                }
                c = (c << 1) | b as u32;
            }
            codewords.push(c);
        }
        Labeling::from_codewords(order, codewords)
    }

    /// The trivial labeling `[0; 1]`.
    pub fn trivial() -> Self {
        Labeling {
            order: 1,
            codewords: vec![0, 1],
        }
    }

    /// The empty labeling of a one-point alphabet.
    pub fn single() -> Self {
        Labeling {
            order: 0,
            codewords: vec![0],
        }
    }

    /// Natural binary code: row `i` is the base-2 representation of `i`.
    pub fn nbc(order: usize) -> Result<Self> {
        Labeling::from_codewords(order, (0..1u32 << order.min(MAX_ORDER)).collect())
    }

    /// Binary reflected Gray code, built by repeated expansion of `[0; 1]`.
    pub fn brgc(order: usize) -> Result<Self> {
        check_order(LabelingKind::Brgc, order)?;
        let mut l = Labeling::trivial();
        for _ in 1..order {
            l = l.expand();
        }
        Ok(l)
    }

    /// Binary semi-Gray code: the BRGC with its first column replaced by the
    /// XOR of its first and last columns.
    pub fn bsgc(order: usize) -> Result<Self> {
        check_order(LabelingKind::Bsgc, order)?;
        let g = Labeling::brgc(order)?;
        let msb = 1u32 << (order - 1);
        let codewords = g
            .codewords
            .iter()
            .map(|&c| if c & 1 == 1 { c ^ msb } else { c })
            .collect();
        Labeling::from_codewords(order, codewords)
    }

    /// Folded binary code: one reflection of the NBC of order `m - 1`.
    pub fn fbc(order: usize) -> Result<Self> {
        check_order(LabelingKind::Fbc, order)?;
        Ok(Labeling::nbc(order - 1)?.reflect())
    }

    pub fn standard(kind: LabelingKind, order: usize) -> Result<Self> {
        match kind {
            LabelingKind::Brgc => Labeling::brgc(order),
            LabelingKind::Nbc => Labeling::nbc(order),
            LabelingKind::Bsgc => Labeling::bsgc(order),
            LabelingKind::Fbc => Labeling::fbc(order),
        }
    }

    /// Bits per codeword (`m`).
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of codewords (`M = 2^m`).
    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    pub fn codewords(&self) -> &[u32] {
        &self.codewords
    }

    pub fn codeword(&self, row: usize) -> u32 {
        self.codewords[row]
    }

    /// Bit `c_{row,k}`.
    #[inline]
    pub fn bit(&self, row: usize, k: usize) -> u8 {
        ((self.codewords[row] >> (self.order - 1 - k)) & 1) as u8
    }

    pub fn row(&self, row: usize) -> Vec<u8> {
        (0..self.order).map(|k| self.bit(row, k)).collect()
    }

    pub fn column(&self, k: usize) -> Vec<u8> {
        (0..self.size()).map(|i| self.bit(i, k)).collect()
    }

    /// Row indices whose bit `k` equals `u` (the set `I_{k,u}`).
    pub fn index_set(&self, k: usize, u: u8) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.bit(i, k) == u).collect()
    }

    /// For each codeword value, the row that carries it.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.size()];
        for (i, &c) in self.codewords.iter().enumerate() {
            inv[c as usize] = i;
        }
        inv
    }

    /// Duplicates every row and appends the column `0,1,1,0,0,1,1,0,...`.
    pub fn expand(&self) -> Labeling {
        let codewords = self
            .codewords
            .iter()
            .flat_map(|&c| [c, c])
            .enumerate()
            .map(|(r, c)| (c << 1) | ((r as u32).div_ceil(2) & 1))
            .collect();
        Labeling {
            order: self.order + 1,
            codewords,
        }
    }

    /// Rows followed by the reversed rows, with a new leading column of
    /// `M` zeros then `M` ones.
    pub fn reflect(&self) -> Labeling {
        let top = 1u32 << self.order;
        let codewords = self
            .codewords
            .iter()
            .copied()
            .chain(self.codewords.iter().rev().map(|&c| c | top))
            .collect();
        Labeling {
            order: self.order + 1,
            codewords,
        }
    }

    /// Rows repeated twice, with a new leading column of `M` zeros then `M` ones.
    pub fn repeat(&self) -> Labeling {
        let top = 1u32 << self.order;
        let codewords = self
            .codewords
            .iter()
            .copied()
            .chain(self.codewords.iter().map(|&c| c | top))
            .collect();
        Labeling {
            order: self.order + 1,
            codewords,
        }
    }

    /// Ordered direct product: row `q*i + j` is `[self_i, other_j]`, `q = 2^{m''}`.
    pub fn ordered_product(&self, other: &Labeling) -> Result<Labeling> {
        let order = self.order + other.order;
        if order > MAX_ORDER {
            return Err(Error::domain(format!(
                "product order {order} exceeds the maximum {MAX_ORDER}"
            )));
        }
        let codewords = self
            .codewords
            .iter()
            .flat_map(|&a| other.codewords.iter().map(move |&b| (a << other.order) | b))
            .collect();
        Ok(Labeling { order, codewords })
    }

    /// The ±1 matrix `Q` with `q_{i,k} = +1` iff `c_{i,m-1-k} = 0`.
    pub fn modified_matrix(&self) -> ModifiedLabeling {
        let m = self.order;
        let mut entries = Vec::with_capacity(self.size() * m);
        for i in 0..self.size() {
            for k in 0..m {
                entries.push(if self.bit(i, m - 1 - k) == 0 { 1 } else { -1 });
            }
        }
        ModifiedLabeling { order: m, entries }
    }

    /// New labeling whose column `k` is column `perm[k]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Labeling> {
        let m = self.order;
        let mut check: Vec<usize> = perm.to_vec();
        check.sort_unstable();
        if check != (0..m).collect::<Vec<_>>() {
            return Err(Error::domain(format!(
                "{perm:?} is not a permutation of the {m} bit positions"
            )));
        }
        let codewords = (0..self.size())
            .map(|i| {
                perm.iter()
                    .fold(0u32, |acc, &src| (acc << 1) | self.bit(i, src) as u32)
            })
            .collect();
        Ok(Labeling { order: m, codewords })
    }

    /// Inverts the columns flagged in `mask` (bit `k` of `mask` flags column `k`).
    pub fn invert_columns(&self, mask: u32) -> Labeling {
        let m = self.order;
        let flip = (0..m)
            .filter(|&k| (mask >> k) & 1 == 1)
            .fold(0u32, |acc, k| acc | (1 << (m - 1 - k)));
        Labeling {
            order: m,
            codewords: self.codewords.iter().map(|&c| c ^ flip).collect(),
        }
    }

    /// Lazily yields every column permutation composed with every bit
    /// inversion (`m! * 2^m` labelings, duplicates included).
    pub fn trivial_variants_iter(&self) -> TrivialVariants<'_> {
        TrivialVariants {
            base: self,
            perm: (0..self.order).collect(),
            mask: 0,
            done: false,
        }
    }

    /// The deduplicated, sorted set of trivial variants. Only materialized for
    /// orders up to [`MAX_MATERIALIZED_VARIANT_ORDER`]; use
    /// [`Labeling::trivial_variants_iter`] above that.
    pub fn trivial_variants(&self) -> Result<Vec<Labeling>> {
        if self.order > MAX_MATERIALIZED_VARIANT_ORDER {
            return Err(Error::Refused(format!(
                "materializing the {}!*2^{} trivial variants of an order-{} labeling; \
                 iterate with trivial_variants_iter instead",
                self.order, self.order, self.order
            )));
        }
        let set: BTreeSet<Labeling> = self.trivial_variants_iter().collect();
        Ok(set.into_iter().collect())
    }

    /// True iff `self` can be obtained from `other` by permuting and
    /// inverting bit positions.
    pub fn is_trivial_variant_of(&self, other: &Labeling) -> bool {
        if self.order != other.order {
            return false;
        }
        let m = self.order;
        let mut used = vec![false; m];
        for k in 0..m {
            let col = self.column(k);
            let found = (0..m).find(|&j| {
                if used[j] {
                    return false;
                }
                let other_col = other.column(j);
                col == other_col || col.iter().zip(&other_col).all(|(a, b)| a != b)
            });
            match found {
                Some(j) => used[j] = true,
                None => return false,
            }
        }
        true
    }

    /// Reads the plain-text format: one codeword per line as a bit string.
    pub fn read_file(path: impl AsRef<Path>) -> Result<Labeling> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        text.parse()
    }
}

fn check_order(kind: LabelingKind, order: usize) -> Result<()> {
    if order < kind.min_order() {
        return Err(Error::domain(format!(
            "{kind} requires order m >= {}, got {order}",
            kind.min_order()
        )));
    }
    if order > MAX_ORDER {
        return Err(Error::domain(format!(
            "order {order} exceeds the maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

impl fmt::Display for Labeling {
    /// `M` lines of `m` characters, row `i` on line `i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.size() {
            for k in 0..self.order {
                f.write_str(if self.bit(i, k) == 0 { "0" } else { "1" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for Labeling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    other => Err(Error::parse(format!(
                        "line {}: unexpected character `{other}` in codeword",
                        n + 1
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        Labeling::from_rows(&rows)
    }
}

/// Iterator returned by [`Labeling::trivial_variants_iter`].
pub struct TrivialVariants<'a> {
    base: &'a Labeling,
    perm: Vec<usize>,
    mask: u32,
    done: bool,
}

impl Iterator for TrivialVariants<'_> {
    type Item = Labeling;

    fn next(&mut self) -> Option<Labeling> {
        if self.done {
            return None;
        }
        let out = self
            .base
            .permute_columns(&self.perm)
            .expect("internal permutation is valid")
            .invert_columns(self.mask);
        self.mask += 1;
        if self.mask == 1 << self.base.order {
            self.mask = 0;
            if !next_permutation(&mut self.perm) {
                self.done = true;
            }
        }
        Some(out)
    }
}

/// The ±1 modified labeling matrix `Q(L)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifiedLabeling {
    order: usize,
    entries: Vec<i8>,
}

impl ModifiedLabeling {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.entries.len() / self.order
    }

    #[inline]
    pub fn entry(&self, row: usize, k: usize) -> i8 {
        self.entries[row * self.order + k]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    pub fn column(&self, k: usize) -> Vec<i8> {
        (0..self.size()).map(|i| self.entry(i, k)).collect()
    }

    /// Inner product of columns `a` and `b`.
    pub fn column_dot(&self, a: usize, b: usize) -> i64 {
        (0..self.size())
            .map(|i| self.entry(i, a) as i64 * self.entry(i, b) as i64)
            .sum()
    }

    /// Inverse of the ±1 mapping: recovers the labeling.
    pub fn to_labeling(&self) -> Result<Labeling> {
        let m = self.order;
        let rows: Vec<Vec<u8>> = (0..self.size())
            .map(|i| (0..m).map(|k| u8::from(self.entry(i, m - 1 - k) < 0)).collect())
            .collect();
        Labeling::from_rows(&rows)
    }
}
