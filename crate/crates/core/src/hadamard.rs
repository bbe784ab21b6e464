//! Hadamard matrices in natural (Sylvester) order and the Hadamard transform
//! of alphabet matrices.

use std::ops::{Add, Sub};

use crate::constellation::InputAlphabet;
use crate::error::{Error, Result};
use crate::labeling::Labeling;

/// The `M x M` Sylvester Hadamard matrix. Entries are computed on demand as
/// `h_{i,j} = (-1)^{popcount(i & j)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HadamardMatrix {
    size: usize,
}

impl HadamardMatrix {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_power_of_two() {
            return Err(Error::domain(format!(
                "Hadamard matrix size must be a power of two, got {size}"
            )));
        }
        Ok(HadamardMatrix { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> i8 {
        if (i & j).count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn column(&self, j: usize) -> Vec<i8> {
        (0..self.size).map(|i| self.entry(i, j)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<i8>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.entry(i, j)).collect())
            .collect()
    }
}

pub fn hadamard_matrix(size: usize) -> Result<HadamardMatrix> {
    HadamardMatrix::new(size)
}

/// Unnormalized in-place transform `y = H x` of `data.len() / stride` rows,
/// each row holding `stride` interleaved coordinates.
pub fn fwht_rows<T>(data: &mut [T], stride: usize)
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let rows = data.len() / stride;
    debug_assert!(rows.is_power_of_two() && rows * stride == data.len());
    let mut h = 1;
    while h < rows {
        for block in (0..rows).step_by(2 * h) {
            for r in block..block + h {
                for c in 0..stride {
                    let a = data[r * stride + c];
                    let b = data[(r + h) * stride + c];
                    data[r * stride + c] = a + b;
                    data[(r + h) * stride + c] = a - b;
                }
            }
        }
        h *= 2;
    }
}

/// Rows `x~_j = (1/M) sum_i h_{j,i} x_i` of the Hadamard spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardSpectrum {
    dim: usize,
    coords: Vec<f64>,
}

impl HadamardSpectrum {
    pub fn size(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// `||x~_j||^2`.
    pub fn energy(&self, j: usize) -> f64 {
        self.row(j).iter().map(|v| v * v).sum()
    }

    pub fn total_energy(&self) -> f64 {
        (0..self.size()).map(|j| self.energy(j)).sum()
    }

    /// Energy held outside index 0 and the powers of two.
    pub fn off_cube_energy(&self) -> f64 {
        (1..self.size())
            .filter(|j| !j.is_power_of_two())
            .map(|j| self.energy(j))
            .sum()
    }
}

pub fn ht(alphabet: &InputAlphabet) -> HadamardSpectrum {
    let mut coords = alphabet.coords().to_vec();
    fwht_rows(&mut coords, alphabet.dim());
    let scale = 1.0 / alphabet.size() as f64;
    coords.iter_mut().for_each(|v| *v *= scale);
    HadamardSpectrum {
        dim: alphabet.dim(),
        coords,
    }
}

/// `X = H X~`.
pub fn inverse_ht(spectrum: &HadamardSpectrum) -> InputAlphabet {
    let mut coords = spectrum.coords.clone();
    fwht_rows(&mut coords, spectrum.dim);
    InputAlphabet::from_flat(spectrum.dim, coords).expect("spectrum has a power-of-two row count")
}

/// Unnormalized transform `H X` over integers.
pub fn ht_integer(coords: &[i64], dim: usize) -> Result<Vec<i64>> {
    let rows = coords.len() / dim.max(1);
    if dim == 0 || rows == 0 || !rows.is_power_of_two() || rows * dim != coords.len() {
        return Err(Error::domain(format!(
            "integer transform needs a power-of-two row count, got {} values in {dim} columns",
            coords.len()
        )));
    }
    let mut out = coords.to_vec();
    fwht_rows(&mut out, dim);
    Ok(out)
}

/// Checks that column `k` of the modified matrix of the natural binary code
/// equals column `2^k` of the Hadamard matrix.
pub fn nbc_column_identity_check(order: usize) -> Result<bool> {
    if order == 0 {
        return Err(Error::domain("order must be at least 1"));
    }
    let q = Labeling::nbc(order)?.modified_matrix();
    let h = HadamardMatrix::new(1 << order)?;
    Ok((0..order).all(|k| {
        let col = 1usize << k;
        (0..h.size()).all(|i| q.entry(i, k) == h.entry(i, col))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_matrices() {
        assert_eq!(HadamardMatrix::new(1).unwrap().to_dense(), vec![vec![1]]);
        assert_eq!(
            HadamardMatrix::new(2).unwrap().to_dense(),
            vec![vec![1, 1], vec![1, -1]]
        );
        assert!(HadamardMatrix::new(6).is_err());
        assert!(HadamardMatrix::new(0).is_err());
    }

    #[test]
    fn recursive_block_structure() {
        for m in 0..6 {
            let small = HadamardMatrix::new(1 << m).unwrap();
            let big = HadamardMatrix::new(2 << m).unwrap();
            let n = small.size();
            for i in 0..n {
                for j in 0..n {
                    let h = small.entry(i, j);
                    assert_eq!(big.entry(i, j), h);
                    assert_eq!(big.entry(i, j + n), h);
                    assert_eq!(big.entry(i + n, j), h);
                    assert_eq!(big.entry(i + n, j + n), -h);
                }
            }
        }
    }

    #[test]
    fn fast_transform_matches_dense_product() {
        let x: Vec<i64> = vec![3, -1, 4, 1, -5, 9, 2, -6];
        let h = HadamardMatrix::new(8).unwrap();
        let fast = ht_integer(&x, 1).unwrap();
        for (j, y) in fast.iter().enumerate() {
            let direct: i64 = (0..8).map(|i| h.entry(j, i) as i64 * x[i]).sum();
            assert_eq!(*y, direct);
        }
    }

    #[test]
    fn pam_spectrum() {
        let s = ht(&InputAlphabet::pam(8).unwrap());
        let expected = [0.0, -1.0, -2.0, 0.0, -4.0, 0.0, 0.0, 0.0];
        for (j, e) in expected.iter().enumerate() {
            assert_eq!(s.row(j), &[*e]);
        }
        assert_eq!(s.off_cube_energy(), 0.0);
    }

    #[test]
    fn dc_term_is_the_mean() {
        let x = InputAlphabet::from_rows(&[[1.0, 2.0], [3.0, -1.0], [0.5, 0.0], [-2.0, 7.0]]).unwrap();
        let s = ht(&x);
        assert_eq!(s.row(0), &[0.625, 2.0]);
        let back = inverse_ht(&s);
        for (a, b) in back.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_alphabet_has_zero_spectrum() {
        let x = InputAlphabet::from_rows(&[[0.0]; 4]).unwrap();
        assert!(ht(&x).coords.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn nbc_identity() {
        for m in 1..=8 {
            assert!(nbc_column_identity_check(m).unwrap(), "m = {m}");
        }
    }
}
