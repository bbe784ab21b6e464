//! Exhaustive enumeration of all `M!` labelings of an alphabet, classified
//! by their uniform-distribution BICM coefficient.
//!
//! Labelings are visited as lexicographic permutations `p` of the codewords:
//! symbol `i` receives codeword `p[i]`. Integer alphabets are classified by
//! the exact kernel `sum_k ||sum_i q_{i,k} x_i||^2`; other alphabets by the
//! floating-point coefficient, grouping values closer than
//! [`FLOAT_CLASS_TOLERANCE`].

use std::collections::BTreeMap;
use std::f64::consts::LOG2_E;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{exact_kernel, FOO_TOLERANCE};
use crate::constellation::InputAlphabet;
use crate::error::{Error, Result};
use crate::labeling::Labeling;
use crate::perm::{factorial, next_permutation, unrank_permutation};

/// Default largest alphabet enumerated without an explicit override.
pub const DEFAULT_MAX_SIZE: usize = 8;
/// Floating coefficients (normalized by `log2 e`) closer than this share a class.
pub const FLOAT_CLASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Worker threads; `0` uses the rayon default.
    pub threads: usize,
    pub max_size: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            threads: 0,
            max_size: DEFAULT_MAX_SIZE,
        }
    }
}

/// A set of labelings sharing one value of the coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaClass {
    /// `alpha` in bits per channel use per unit SNR.
    pub alpha: f64,
    /// `sum_k ||sum_i q_{i,k} x_i||^2` for integer alphabets.
    pub exact_key: Option<i128>,
    pub count: u64,
    /// Lexicographically first labeling of the class.
    #[serde(serialize_with = "serialize_labeling")]
    pub witness: Labeling,
}

fn serialize_labeling<S: serde::Serializer>(l: &Labeling, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<String> = (0..l.size())
        .map(|i| l.row(i).iter().map(|b| char::from(b'0' + b)).collect())
        .collect();
    s.collect_seq(rows)
}

/// Histogram of the coefficient over every labeling of one alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCensus {
    pub alphabet: String,
    pub total: u64,
    /// Classes in increasing order of `alpha`.
    pub classes: Vec<AlphaClass>,
    pub foo_count: u64,
    pub exact: bool,
    /// Smallest gap between consecutive class values of `alpha / log2 e`.
    pub min_class_spacing: Option<f64>,
}

impl AlphaCensus {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn max_class(&self) -> &AlphaClass {
        self.classes.last().expect("a census has at least one class")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Exact(i128),
    Float(u64),
}

#[derive(Clone, Copy)]
struct Bucket {
    count: u64,
    first_rank: u64,
}

struct Evaluator {
    dim: usize,
    size: usize,
    integer: Option<Vec<i64>>,
    coords: Vec<f64>,
    energy: f64,
    order: usize,
}

impl Evaluator {
    fn new(alphabet: &InputAlphabet) -> Result<Self> {
        let energy: f64 = (0..alphabet.size()).map(|i| alphabet.energy(i)).sum();
        if !(energy > 0.0) {
            return Err(Error::domain("all-zero alphabet has Es = 0"));
        }
        Ok(Evaluator {
            dim: alphabet.dim(),
            size: alphabet.size(),
            integer: alphabet.integer_coords(),
            coords: alphabet.coords().to_vec(),
            energy,
            order: alphabet.size().trailing_zeros() as usize,
        })
    }

    fn key(&self, perm: &[usize], scratch: &mut [f64]) -> Key {
        match &self.integer {
            Some(coords) => {
                let l = Labeling::from_codewords(self.order, perm.iter().map(|&c| c as u32).collect())
                    .expect("permutation is a bijection");
                Key::Exact(exact_kernel(coords, self.dim, &l).0)
            }
            None => {
                scratch.iter_mut().for_each(|v| *v = 0.0);
                for (i, &c) in perm.iter().enumerate() {
                    let x = &self.coords[i * self.dim..(i + 1) * self.dim];
                    for k in 0..self.order {
                        let negative = (c >> k) & 1 == 1;
                        for (n, v) in x.iter().enumerate() {
                            if negative {
                                scratch[k * self.dim + n] -= v;
                            } else {
                                scratch[k * self.dim + n] += v;
                            }
                        }
                    }
                }
                let s: f64 = scratch.iter().map(|v| v * v).sum();
                Key::Float(self.normalize(s).to_bits())
            }
        }
    }

    /// Converts `sum_k ||S_k||^2` into `alpha / log2 e`.
    fn normalize(&self, kernel: f64) -> f64 {
        kernel / (self.size as f64 * self.energy)
    }

    fn normalized(&self, key: Key) -> f64 {
        match key {
            Key::Exact(k) => self.normalize(k as f64),
            Key::Float(bits) => f64::from_bits(bits),
        }
    }

    fn is_foo(&self, key: Key) -> bool {
        match key {
            Key::Exact(k) => k == self.size as i128 * self.energy.round() as i128,
            Key::Float(_) => (1.0 - self.normalized(key)).abs() <= FOO_TOLERANCE,
        }
    }
}

fn check_size(size: usize, options: &SearchOptions) -> Result<u64> {
    let total = factorial(size).ok_or_else(|| Error::Refused(format!("{size}! overflows")))?;
    if size > options.max_size {
        return Err(Error::Refused(format!(
            "enumerating {size}! = {total} labelings exceeds the limit of M = {}; \
             raise the limit explicitly to proceed",
            options.max_size
        )));
    }
    Ok(total)
}

const RANGE_LEN: u64 = 2520;

fn partial_census(eval: &Evaluator, start: u64, len: u64) -> BTreeMap<Key, Bucket> {
    let mut out = BTreeMap::new();
    let mut perm = unrank_permutation(eval.size, start);
    let mut scratch = vec![0.0; eval.order * eval.dim];
    for rank in start..start + len {
        let key = eval.key(&perm, &mut scratch);
        out.entry(key)
            .and_modify(|b: &mut Bucket| b.count += 1)
            .or_insert(Bucket {
                count: 1,
                first_rank: rank,
            });
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
}

fn merge(mut a: BTreeMap<Key, Bucket>, b: BTreeMap<Key, Bucket>) -> BTreeMap<Key, Bucket> {
    for (k, v) in b {
        a.entry(k)
            .and_modify(|e| {
                e.count += v.count;
                e.first_rank = e.first_rank.min(v.first_rank);
            })
            .or_insert(v);
    }
    a
}

fn run_partitioned<F, R>(options: &SearchOptions, job: F) -> Result<R>
where
    F: FnOnce() -> R + Send,
    R: Send,
{
    if options.threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(job))
}

fn buckets(alphabet: &InputAlphabet, options: &SearchOptions) -> Result<(Evaluator, u64, BTreeMap<Key, Bucket>)> {
    let total = check_size(alphabet.size(), options)?;
    let eval = Evaluator::new(alphabet)?;
    let starts: Vec<u64> = (0..total).step_by(RANGE_LEN as usize).collect();
    let map = run_partitioned(options, || {
        starts
            .par_iter()
            .map(|&s| partial_census(&eval, s, RANGE_LEN.min(total - s)))
            .reduce(BTreeMap::new, merge)
    })?;
    Ok((eval, total, map))
}

fn labeling_at(size: usize, rank: u64) -> Labeling {
    let perm = unrank_permutation(size, rank);
    Labeling::from_codewords(size.trailing_zeros() as usize, perm.into_iter().map(|c| c as u32).collect())
        .expect("permutation is a bijection")
}

/// Classifies every labeling of `alphabet` by its uniform BICM coefficient.
pub fn enumerate_alpha_classes(alphabet: &InputAlphabet, options: &SearchOptions) -> Result<AlphaCensus> {
    let (eval, total, map) = buckets(alphabet, options)?;
    let exact = eval.integer.is_some();
    // (normalized alpha, key, bucket) sorted by alpha
    let mut entries: Vec<(f64, Key, Bucket)> = map.into_iter().map(|(k, b)| (eval.normalized(k), k, b)).collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut classes: Vec<(f64, Option<i128>, Bucket, bool)> = Vec::new();
    for (value, key, bucket) in entries {
        let optimal = eval.is_foo(key);
        let exact_key = match key {
            Key::Exact(k) => Some(k),
            Key::Float(_) => None,
        };
        match classes.last_mut() {
            Some(last) if !exact && value - last.0 < FLOAT_CLASS_TOLERANCE => {
                last.2.count += bucket.count;
                last.2.first_rank = last.2.first_rank.min(bucket.first_rank);
                last.3 |= optimal;
            }
            _ => classes.push((value, exact_key, bucket, optimal)),
        }
    }
    let min_class_spacing = classes
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .min_by(|a, b| a.total_cmp(b));
    let foo_count = classes.iter().filter(|c| c.3).map(|c| c.2.count).sum();
    Ok(AlphaCensus {
        alphabet: describe(alphabet),
        total,
        classes: classes
            .into_iter()
            .map(|(value, exact_key, bucket, _)| AlphaClass {
                alpha: value * LOG2_E,
                exact_key,
                count: bucket.count,
                witness: labeling_at(eval.size, bucket.first_rank),
            })
            .collect(),
        foo_count,
        exact,
        min_class_spacing,
    })
}

fn describe(alphabet: &InputAlphabet) -> String {
    format!("{} points in {} dimension(s)", alphabet.size(), alphabet.dim())
}

/// First-order optimal labelings of an alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FooCensus {
    pub count: u64,
    /// Lexicographically first first-order optimal labeling.
    #[serde(skip)]
    pub first_witness: Option<Labeling>,
    /// True when every first-order optimal labeling is a trivial variant of
    /// the natural binary code.
    pub all_nbc_variants: bool,
}

pub fn count_foo_labelings(alphabet: &InputAlphabet, options: &SearchOptions) -> Result<FooCensus> {
    let total = check_size(alphabet.size(), options)?;
    let eval = Evaluator::new(alphabet)?;
    let nbc = Labeling::nbc(eval.order)?;
    let starts: Vec<u64> = (0..total).step_by(RANGE_LEN as usize).collect();
    let found: Vec<u64> = run_partitioned(options, || {
        starts
            .par_iter()
            .flat_map_iter(|&s| {
                let len = RANGE_LEN.min(total - s);
                let mut perm = unrank_permutation(eval.size, s);
                let mut scratch = vec![0.0; eval.order * eval.dim];
                let mut hits = Vec::new();
                for rank in s..s + len {
                    if eval.is_foo(eval.key(&perm, &mut scratch)) {
                        hits.push(rank);
                    }
                    next_permutation(&mut perm);
                }
                hits
            })
            .collect()
    })?;
    let witnesses: Vec<Labeling> = found.iter().map(|&r| labeling_at(eval.size, r)).collect();
    Ok(FooCensus {
        count: found.len() as u64,
        all_nbc_variants: witnesses.iter().all(|l| l.is_trivial_variant_of(&nbc)),
        first_witness: witnesses.into_iter().next(),
    })
}

/// Number of distinct class sizes in a census.
pub fn distinct_value_count_of_pmf(census: &AlphaCensus) -> usize {
    let mut counts: Vec<u64> = census.classes.iter().map(|c| c.count).collect();
    counts.sort_unstable();
    counts.dedup();
    counts.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_pam() {
        let c = enumerate_alpha_classes(&InputAlphabet::pam(2).unwrap(), &SearchOptions::default()).unwrap();
        assert_eq!(c.total, 2);
        assert_eq!(c.class_count(), 1);
        assert_eq!(c.classes[0].alpha, LOG2_E);
        assert_eq!(c.foo_count, 2);
        assert_eq!(distinct_value_count_of_pmf(&c), 1);
    }

    #[test]
    fn four_pam_matches_closed_forms() {
        let x = InputAlphabet::pam(4).unwrap();
        let c = enumerate_alpha_classes(&x, &SearchOptions::default()).unwrap();
        assert_eq!(c.classes.iter().map(|k| k.count).sum::<u64>(), 24);
        assert_eq!(c.max_class().alpha, LOG2_E);
        assert_eq!(c.max_class().count, 8);
        let brgc = crate::asymptotics::alpha_bicm_uniform(&x, &Labeling::brgc(2).unwrap()).unwrap();
        assert!(c.classes.iter().any(|k| (k.alpha - brgc.alpha).abs() < 1e-15));
    }

    #[test]
    fn psk4_foo_count() {
        let f = count_foo_labelings(&InputAlphabet::psk(4).unwrap(), &SearchOptions::default()).unwrap();
        assert_eq!(f.count, 8);
        assert!(!f.all_nbc_variants);
        assert!(f.first_witness.unwrap().is_trivial_variant_of(&Labeling::brgc(2).unwrap()));
    }

    #[test]
    fn refuses_large_alphabets() {
        let err = enumerate_alpha_classes(&InputAlphabet::pam(16).unwrap(), &SearchOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
        assert!(err.to_string().contains("20922789888000"));
    }
}
