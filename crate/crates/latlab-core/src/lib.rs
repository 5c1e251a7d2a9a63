//! A computational laboratory for discrete subgroups of restricted products
//! of finite affine groups.
//!
//! The ambient objects are finite truncations of the restricted product of
//! the groups `G_n = F_{q_n} â‹Š F_{q_n}^*` over a sequence of prime powers
//! `q_n > 4`, taken relative to the point-stabilizer subgroups
//! `U_n = {(0, u)}`.  Discrete subgroups are direct sums picking, per
//! coordinate, either the translation subgroup `T_n = {(t, 1)}` or the
//! twisted diagonal `S_n = {(x - 1, x)}`.  Everything measurable is computed
//! in exact rational arithmetic under the normalization that gives each
//! `U_n` volume one.
//!
//! Modules build on one another:
//!
//! * [`field`] — finite fields `F_{p^e}` with a canonical modulus choice;
//! * [`affine`] — the one-dimensional affine groups, their marked subgroups
//!   and labeled coset spaces;
//! * [`truncation`] — finite truncations `P_k = G_0 × … × G_k` with Haar
//!   weights and fundamental domains;
//! * [`lattice`] — covolume enclosures, uniformity classification,
//!   commensurability certificates and unipotent-approximation witnesses;
//! * [`covolume`] — double-coset covolume sums, Haar-scaling consistency
//!   checks and index-ratio traces along the truncation chain;
//! * [`spectral`] — finite homogeneous-space actions, averaging-operator
//!   spectra, almost-invariant vectors and invariance-defect floors.

pub mod affine;
pub mod covolume;
mod error;
pub mod field;
pub mod lattice;
pub mod rational;
pub mod spectral;
pub mod truncation;

pub use error::{Error, Result};
pub use rational::Rat;
