//! Expectations over Gaussian noise: tensor-product Gauss-Hermite rules and
//! a seeded Monte-Carlo estimator.
//!
//! Both integrate against the density `pi^{-N/2} exp(-||t||^2)`, i.e. `t` has
//! independent `N(0, 1/2)` coordinates. A noise sample of variance `N0/2`
//! per dimension is then `sqrt(N0) * t`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 64;

/// How noise expectations are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum QuadratureSpec {
    GaussHermite { nodes: usize },
    MonteCarlo { samples: u64, seed: u64 },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::GaussHermite {
            nodes: DEFAULT_NODES,
        }
    }
}

impl QuadratureSpec {
    pub fn gauss_hermite(nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::domain(format!(
                "Gauss-Hermite rules need at least 2 nodes, got {nodes}"
            )));
        }
        Ok(QuadratureSpec::GaussHermite { nodes })
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Result<Self> {
        if samples < 2 {
            return Err(Error::domain("Monte-Carlo estimation needs at least 2 samples"));
        }
        Ok(QuadratureSpec::MonteCarlo { samples, seed })
    }

    /// `E[f(t)]` over `dim`-dimensional `t`.
    pub fn integrate<F>(&self, dim: usize, mut f: F) -> Result<Estimate>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut out = self.integrate_many(dim, 1, |t, y| y[0] = f(t))?;
        Ok(out.remove(0))
    }

    /// Componentwise `E[f(t)]` for a vector-valued integrand writing `len`
    /// outputs per sample.
    pub fn integrate_many<F>(&self, dim: usize, len: usize, mut f: F) -> Result<Vec<Estimate>>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        match *self {
            QuadratureSpec::GaussHermite { nodes } => {
                let rule = GaussHermite::new(nodes)?;
                Ok(rule
                    .tensor_integrate_many(dim, len, &mut f)
                    .into_iter()
                    .map(|value| Estimate {
                        value,
                        std_error: None,
                    })
                    .collect())
            }
            QuadratureSpec::MonteCarlo { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2)
                    .expect("valid standard deviation");
                let mut t = vec![0.0; dim];
                let mut y = vec![0.0; len];
                let mut mean = vec![0.0; len];
                let mut m2 = vec![0.0; len];
                for n in 1..=samples {
                    t.iter_mut().for_each(|v| *v = normal.sample(&mut rng));
                    f(&t, &mut y);
                    for c in 0..len {
                        let delta = y[c] - mean[c];
                        mean[c] += delta / n as f64;
                        m2[c] += delta * (y[c] - mean[c]);
                    }
                }
                Ok(mean
                    .into_iter()
                    .zip(m2)
                    .map(|(value, m2)| Estimate {
                        value,
                        std_error: Some((m2 / (samples - 1) as f64 / samples as f64).sqrt()),
                    })
                    .collect())
            }
        }
    }
}

/// A numerical expectation with its standard error when it is stochastic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Nodes and weights of the `n`-point rule for `int exp(-t^2) g(t) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Roots of the Hermite polynomial of degree `n`: eigenvalues of the
    /// Jacobi matrix as starting points, polished by Newton iteration on the
    /// orthonormal three-term recurrence, which also yields the weights.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!(
                "Gauss-Hermite rules need at least 2 nodes, got {n}"
            )));
        }
        const PIM4: f64 = 0.751_125_544_464_942_5;
        let nf = n as f64;
        let mut nodes = jacobi_eigenvalues(n);
        let mut weights = vec![0.0; n];
        // symmetric rule: solve the non-negative half and mirror it
        for i in n / 2..n {
            let mut z = nodes[i];
            let mut pp = 0.0;
            for _ in 0..8 {
                let mut p1 = PIM4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                if !pp.is_finite() {
                    break;
                }
                let step = p1 / pp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            if n % 2 == 1 && i == n / 2 {
                z = 0.0;
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            let w = 2.0 / (pp * pp);
            weights[i] = if w.is_finite() { w } else { 0.0 };
            weights[n - 1 - i] = weights[i];
        }
        Ok(GaussHermite { nodes, weights })
    }

    /// `pi^{-dim/2} int exp(-||t||^2) f(t) dt` by the tensor-product rule.
    pub fn tensor_integrate<F>(&self, dim: usize, f: &mut F) -> f64
    where
        F: FnMut(&[f64]) -> f64,
    {
        self.tensor_integrate_many(dim, 1, &mut |t: &[f64], y: &mut [f64]| y[0] = f(t))[0]
    }

    pub fn tensor_integrate_many<F>(&self, dim: usize, len: usize, f: &mut F) -> Vec<f64>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let n = self.nodes.len();
        let norm = std::f64::consts::PI.powf(-(dim as f64) / 2.0);
        let mut idx = vec![0usize; dim];
        let mut t = vec![0.0; dim];
        let mut y = vec![0.0; len];
        let mut total = vec![0.0; len];
        loop {
            let mut weight = norm;
            for (d, &k) in idx.iter().enumerate() {
                t[d] = self.nodes[k];
                weight *= self.weights[k];
            }
            f(&t, &mut y);
            for (acc, v) in total.iter_mut().zip(&y) {
                *acc += weight * v;
            }
            let mut d = 0;
            loop {
                if d == dim {
                    return total;
                }
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with zero
/// diagonal and off-diagonal `sqrt(k / 2)`, by implicit QL iteration.
fn jacobi_eigenvalues(n: usize) -> Vec<f64> {
    let mut d = vec![0.0f64; n];
    let mut e: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 64, "QL iteration did not converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_rule() {
        let r = GaussHermite::new(5).unwrap();
        let nodes = [
            -2.020_182_870_456_085_6,
            -0.958_572_464_613_818_5,
            0.0,
            0.958_572_464_613_818_5,
            2.020_182_870_456_085_6,
        ];
        let weights = [
            0.019_953_242_059_045_913,
            0.393_619_323_152_241_2,
            0.945_308_720_482_941_9,
            0.393_619_323_152_241_2,
            0.019_953_242_059_045_913,
        ];
        for i in 0..5 {
            assert!((r.nodes[i] - nodes[i]).abs() < 1e-13);
            assert!((r.weights[i] - weights[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn moments_of_large_rules() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        for n in [2, 3, 16, 64, 128, 256, 512, 1024] {
            let r = GaussHermite::new(n).unwrap();
            let m0: f64 = r.weights.iter().sum();
            let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t * t).sum();
            let m4: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * t.powi(4)).sum();
            assert!((m0 - sqrt_pi).abs() < 1e-12, "n = {n}");
            assert!((m2 - sqrt_pi / 2.0).abs() < 1e-12, "n = {n}");
            if n > 2 {
                assert!((m4 - 0.75 * sqrt_pi).abs() < 1e-12, "n = {n}");
            }
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(GaussHermite::new(1).is_err());
    }

    #[test]
    fn tensor_rule_in_two_dimensions() {
        let q = QuadratureSpec::default();
        let e = q.integrate(2, |t| t[0] * t[0] + 3.0 * t[1] * t[1]).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
        assert!(e.std_error.is_none());
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let q = QuadratureSpec::monte_carlo(20_000, 7).unwrap();
        let a = q.integrate(1, |t| t[0] * t[0]).unwrap();
        let b = q.integrate(1, |t| t[0] * t[0]).unwrap();
        assert_eq!(a, b);
        let se = a.std_error.unwrap();
        assert!((a.value - 0.5).abs() < 5.0 * se);
    }
}
