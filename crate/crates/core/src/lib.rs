//! Capacity and low-SNR analysis of bit-interleaved coded modulation (BICM).
//!
//! The crate builds constellations `[X, L, P]` from an input alphabet, a
//! binary labeling and an input distribution, evaluates coded-modulation
//! and BICM capacities over the AWGN channel, and studies their first-order
//! behaviour at low SNR: closed forms for PAM and PSK, first-order optimal
//! constellations, exhaustive labeling censuses and probabilistic shaping.
//!
//! ```
//! use bicm::{alpha_bicm_uniform, InputAlphabet, Labeling};
//!
//! let x = InputAlphabet::pam(8).unwrap();
//! let a = alpha_bicm_uniform(&x, &Labeling::brgc(3).unwrap()).unwrap();
//! assert!((a.zero_rate_ebn0_db - (-0.41)).abs() < 0.01);
//! ```

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod capacity;
pub mod cli;
pub mod constellation;
pub mod error;
pub mod format;
pub mod hadamard;
pub mod labeling;
pub mod perm;
pub mod quadrature;
pub mod search;
pub mod shaping;

pub use asymptotics::{
    alpha_bicm, alpha_bicm_ht, alpha_bicm_uniform, alpha_cm, alpha_pam_closed, alpha_psk_closed, is_foo,
    AlphaResult, FooVerdict, ProjectionMatrix,
};
pub use capacity::{
    awgn_capacity, bicm_capacity, cm_capacity, f_awgn, g_awgn, invert_capacity, CapacityCurve, CapacityFunctional,
    CapacityKind, CapacityPoint,
};
pub use constellation::{BitDistribution, ChannelSpec, Constellation, InputAlphabet, SymbolDistribution};
pub use error::{Error, Result};
pub use hadamard::{ht, inverse_ht, HadamardMatrix, HadamardSpectrum};
pub use labeling::{Labeling, LabelingKind};
pub use quadrature::QuadratureSpec;
pub use search::{enumerate_alpha_classes, AlphaCensus, SearchOptions};
pub use shaping::{optimize_distribution, ShapingResult};
