//! Shared fixtures for the performance benchmarks.
//!
//! The benchmark harness lives in `benches/core_ops.rs`; this library only
//! builds the objects the benchmarks exercise, so that setup cost stays
//! outside the measured loops.

use latlab_core::lattice::{LatticeSpec, TailMode};
use latlab_core::spectral::{build_homspace, HomSpace};
use latlab_core::truncation::{build_truncation, PrimePowerSeq, TailRule, TruncationModel};

/// The five-term quadratic-floor sequence used across the suite.
pub fn base_seq() -> PrimePowerSeq {
    PrimePowerSeq::new(&[5, 11, 17, 29, 37], TailRule::QuadraticFloor).unwrap()
}

/// Fully twisted spec over [`base_seq`].
pub fn twisted_spec() -> LatticeSpec {
    let seq = base_seq();
    LatticeSpec::new(&seq, &vec![true; seq.len()], TailMode::AllIn).unwrap()
}

/// Fully translational spec over [`base_seq`].
pub fn translational_spec() -> LatticeSpec {
    let seq = base_seq();
    LatticeSpec::new(&seq, &vec![false; seq.len()], TailMode::AllOut).unwrap()
}

/// A single-coordinate truncation head of order `q (q - 1)`.
pub fn single_head(q: u64) -> TruncationModel {
    let seq = PrimePowerSeq::new(&[q], TailRule::None).unwrap();
    build_truncation(&seq, 0).unwrap()
}

/// The 935-point homogeneous space of the twisted spec at levels `(0, 2)`.
pub fn medium_space() -> HomSpace {
    build_homspace(&twisted_spec(), 0, 2).unwrap()
}
