//! Discrete coordinate-product subgroups and their exact covolume
//! enclosures.
//!
//! A `LatticeSpec` picks, for every coordinate `n`, either the translation
//! subgroup `T_n` (order `q_n`) or the twisted diagonal `S_n` (order
//! `q_n - 1`); the listed head is given by an explicit mark vector and the
//! unlisted tail by a single repeating mode.  Under the normalization that
//! gives every units subgroup volume one, coordinate `n` contributes the
//! factor `q_n / (q_n - 1)` to the covolume when marked twisted and `1`
//! when marked translational, so the total covolume is an infinite product
//! that converges exactly when `sum 1 / q_n` does.  The enclosure routines
//! sandwich that product between the exact partial product and a rational
//! majorant derived from the tail rule alone.

use crate::affine::{AffElem, AffineGroup, SubgroupTag};
use crate::field::field_of_order;
use crate::rational::{rat, Rat};
use crate::truncation::PrimePowerSeq;
use crate::{Error, Result};
use num::{BigUint, One};

/// Repeating mark for every coordinate beyond the listed horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMode {
    /// every tail coordinate marked twisted
    AllIn,
    /// every tail coordinate marked translational
    AllOut,
}

impl TailMode {
    pub fn label(self) -> &'static str {
        match self {
            TailMode::AllIn => "allin",
            TailMode::AllOut => "allout",
        }
    }
}

/// A coordinate-product discrete subgroup: one mark per listed coordinate
/// (`true` = twisted diagonal, `false` = translations) plus a tail mode.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    seq: PrimePowerSeq,
    marks: Vec<bool>,
    tail: TailMode,
}

impl LatticeSpec {
    /// `marks` must cover exactly the listed coordinates; a twisted tail
    /// needs an infinite tail rule to refer to.
    pub fn new(seq: &PrimePowerSeq, marks: &[bool], tail: TailMode) -> Result<Self> {
        if marks.len() != seq.len() {
            return Err(Error::MaskLength {
                mask: marks.len(),
                seq: seq.len(),
            });
        }
        if tail == TailMode::AllIn && !seq.rule().is_infinite() {
            return Err(Error::TailModeNeedsRule);
        }
        Ok(LatticeSpec {
            seq: seq.clone(),
            marks: marks.to_vec(),
            tail,
        })
    }

    pub fn seq(&self) -> &PrimePowerSeq {
        &self.seq
    }

    pub fn marks(&self) -> &[bool] {
        &self.marks
    }

    pub fn tail(&self) -> TailMode {
        self.tail
    }

    /// Mark of coordinate `n`, listed or not.
    pub fn mark(&self, n: usize) -> bool {
        self.marks
            .get(n)
            .copied()
            .unwrap_or(self.tail == TailMode::AllIn)
    }

    /// The marked subgroup of coordinate `n` as a tag.
    pub fn subgroup_tag(&self, n: usize) -> SubgroupTag {
        if self.mark(n) {
            SubgroupTag::Twisted
        } else {
            SubgroupTag::Translations
        }
    }

    /// Tags for coordinates `0 ..= k`.
    pub fn tags_through(&self, k: i64) -> Vec<SubgroupTag> {
        (0..(k + 1).max(0) as usize)
            .map(|n| self.subgroup_tag(n))
            .collect()
    }

    /// Order of the marked subgroup at listed coordinate `n`.
    pub fn subgroup_order(&self, n: usize) -> u64 {
        let q = self.seq.value(n) as u64;
        if self.mark(n) {
            q - 1
        } else {
            q
        }
    }

    /// Covolume factor of listed coordinate `n`: `q_n / (q_n - 1)` when
    /// twisted, `1` otherwise.
    pub fn coordinate_factor(&self, n: usize) -> Rat {
        let q = self.seq.value(n) as i64;
        if self.mark(n) {
            rat(q, q - 1)
        } else {
            rat(1, 1)
        }
    }

    /// Listed coordinates carrying the twisted mark.
    pub fn twisted_coordinates(&self) -> Vec<usize> {
        (0..self.seq.len()).filter(|&n| self.marks[n]).collect()
    }

    /// Compact textual form, e.g. `1010/allin`.
    pub fn mask_label(&self) -> String {
        let bits: String = self
            .marks
            .iter()
            .map(|&m| if m { '1' } else { '0' })
            .collect();
        format!("{}/{}", bits, self.tail.label())
    }
}

/// Structural classification of a lattice spec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    /// The quotient is compact exactly when only finitely many coordinates
    /// are twisted, i.e. when the tail mode is all-out.
    pub uniform: bool,
    pub tail: TailMode,
    /// Listed coordinates with the twisted mark.
    pub twisted_head: Vec<usize>,
    /// Whether the listed sequence is the whole story.
    pub finite_sequence: bool,
}

pub fn classify(spec: &LatticeSpec) -> Classification {
    Classification {
        uniform: spec.tail() == TailMode::AllOut,
        tail: spec.tail(),
        twisted_head: spec.twisted_coordinates(),
        finite_sequence: !spec.seq().rule().is_infinite(),
    }
}

/// Exact rational enclosure of the full covolume, computed at level `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovolumeEnclosure {
    pub level: i64,
    /// Exact partial product `C_k = prod_{n <= k} c_n`.
    pub partial: Rat,
    /// The listed factors `c_0 … c_k`.
    pub factors: Vec<Rat>,
    /// Rational majorant of the remaining factor `prod_{n > k} c_n`,
    /// derived from the tail rule floors alone.
    pub tail_upper: Rat,
    /// `lo = C_k` (every factor is at least one).
    pub lo: Rat,
    /// `hi = C_k * tail_upper`.
    pub hi: Rat,
}

impl CovolumeEnclosure {
    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &Rat) -> bool {
        &self.lo <= v && v <= &self.hi
    }
}

/// Majorant of `prod_{n > k} c_n` from the floors of the tail rule.
///
/// Every factor satisfies `c_n <= b(n) := g_e(n) / (g_e(n) - 1)` where
/// `g_e(n) = max(g(n), 5)` joins the rule floor with the standing bound
/// `q_n >= 5`; the map `x -> x / (x - 1)` is decreasing.  Individual
/// factors `b(n)` are split off until the remaining log-sum bound
/// `S(m) = 2 * sum_{n > m} 1 / g(n)` drops below `1/2`; the remainder is
/// closed with `prod_{n > m} b(n) <= exp(S(m)) <= 1 / (1 - S(m))`, using
/// `log(x / (x - 1)) < 2 / x` for `x > 4`.
fn tail_majorant(seq: &PrimePowerSeq, k: i64) -> Result<Rat> {
    let rule = seq.rule();
    if !rule.is_infinite() {
        return Ok(Rat::one());
    }
    let half = rat(1, 2);
    let s_bound = |m: i64| -> Rat {
        rat(2, 1) * rule.tail_sum_bound(m).expect("infinite rule")
    };
    let mut split = k.max(-1);
    let mut guard = 0u32;
    while s_bound(split) >= half {
        split += 1;
        guard += 1;
        if guard > 100_000 {
            return Err(Error::Invariant(
                "tail split level did not converge".into(),
            ));
        }
    }
    let five = rat(5, 1);
    let mut majorant = Rat::one();
    for n in (k + 1)..=split {
        let g = rule.floor_at(n as usize).expect("infinite rule");
        let ge = if g < five { five.clone() } else { g };
        majorant *= &ge / (&ge - Rat::one());
    }
    let s = s_bound(split);
    majorant *= (Rat::one() - s).recip();
    Ok(majorant)
}

/// Encloses the full covolume using the exact partial product through
/// level `k` and the tail majorant beyond it.
pub fn covolume(spec: &LatticeSpec, k: i64) -> Result<CovolumeEnclosure> {
    if k < -1 || k > spec.seq().horizon() {
        return Err(Error::LevelRange {
            k,
            h: spec.seq().horizon(),
        });
    }
    let mut factors = Vec::new();
    let mut partial = Rat::one();
    for n in 0..(k + 1).max(0) as usize {
        let f = spec.coordinate_factor(n);
        partial *= &f;
        factors.push(f);
    }
    let tail_upper = match spec.tail() {
        TailMode::AllIn => tail_majorant(spec.seq(), k)?,
        TailMode::AllOut => {
            // The unlisted tail contributes only unit factors; the listed
            // remainder is known exactly.
            let mut rest = Rat::one();
            for n in (k + 1) as usize..spec.seq().len() {
                rest *= spec.coordinate_factor(n);
            }
            rest
        }
    };
    let hi = &partial * &tail_upper;
    Ok(CovolumeEnclosure {
        level: k,
        lo: partial.clone(),
        partial,
        factors,
        tail_upper,
        hi,
    })
}

/// Relative-position report for two specs over the same sequence.
///
/// The intersection `Δ = Γ_A ∩ Γ_B` is again a coordinate product; at a
/// coordinate where the marks differ the factors intersect trivially, so
/// the partial index `[Γ_A : Δ]` through level `j` is the product of
/// `|Γ_{A,n}|` over differing `n <= j` (and symmetrically for `B`).  The
/// pair is commensurable exactly when the marks differ at finitely many
/// coordinates, i.e. when the tail modes agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommensurabilityReport {
    pub same_tail: bool,
    pub commensurable: bool,
    /// Listed coordinates where the marks differ.
    pub diff_coordinates: Vec<usize>,
    pub last_listed_diff: Option<usize>,
    /// `[Γ_A : Δ]` restricted to coordinates `0 ..= j`, for `j = 0 ..= k`.
    pub left_trace: Vec<BigUint>,
    /// `[Γ_B : Δ]` likewise.
    pub right_trace: Vec<BigUint>,
    /// Both partial index traces are constant from some listed level on.
    pub traces_stabilize: bool,
    /// Level at which both traces reach their final listed value.
    pub stabilization_level: Option<i64>,
    /// When the tails disagree, every unlisted coordinate multiplies both
    /// indices by at least 5, so the traces grow beyond any bound.
    pub tail_grows: bool,
    /// Stabilized strictly inside the listed horizon — the listed data
    /// alone certifies finite index on both sides.
    pub bounded_within_horizon: bool,
}

pub fn commensurable(a: &LatticeSpec, b: &LatticeSpec, k: i64) -> Result<CommensurabilityReport> {
    if a.seq() != b.seq() {
        return Err(Error::SequenceMismatch);
    }
    let seq = a.seq();
    if k < 0 || k > seq.horizon() {
        return Err(Error::LevelRange {
            k,
            h: seq.horizon(),
        });
    }
    let diff_coordinates: Vec<usize> = (0..seq.len())
        .filter(|&n| a.marks()[n] != b.marks()[n])
        .collect();
    let last_listed_diff = diff_coordinates.last().copied();
    let mut left_trace = Vec::with_capacity((k + 1) as usize);
    let mut right_trace = Vec::with_capacity((k + 1) as usize);
    let mut left = BigUint::one();
    let mut right = BigUint::one();
    for j in 0..=k as usize {
        if a.marks()[j] != b.marks()[j] {
            left *= BigUint::from(a.subgroup_order(j));
            right *= BigUint::from(b.subgroup_order(j));
        }
        left_trace.push(left.clone());
        right_trace.push(right.clone());
    }
    let same_tail = a.tail() == b.tail();
    let tail_grows = !same_tail;
    // Stabilization over the listed range: constant from the last listed
    // difference on (or from the start if none).
    let stabilization_level = match last_listed_diff {
        None => Some(0),
        Some(d) if (d as i64) <= k => Some(d as i64),
        Some(_) => None,
    };
    let traces_stabilize = stabilization_level.is_some() && same_tail;
    let bounded_within_horizon = same_tail
        && last_listed_diff.map_or(true, |d| (d as i64) < seq.horizon());
    Ok(CommensurabilityReport {
        same_tail,
        commensurable: same_tail,
        diff_coordinates,
        last_listed_diff,
        left_trace,
        right_trace,
        traces_stabilize,
        stabilization_level,
        tail_grows,
        bounded_within_horizon,
    })
}

/// One coordinate-level certificate that a twisted factor is conjugate
/// into the units: with `x` the least multiplicative generator,
/// `γ = (x - 1, x)` generates `S_n`, and conjugating by the unit
/// translation `g = (1, 1)` gives `g γ g^{-1} = (0, x) ∈ U_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub coordinate: usize,
    pub q: u32,
    /// Canonical index of the least multiplicative generator `x`.
    pub generator_index: u32,
    pub gamma: AffElem,
    pub conjugator: AffElem,
    pub conjugate: AffElem,
}

/// Produces `count` witnesses from the least twisted listed coordinates of
/// a non-uniform spec, each verified by actually computing the conjugation.
pub fn unipotent_witnesses(spec: &LatticeSpec, count: usize) -> Result<Vec<Witness>> {
    if classify(spec).uniform {
        return Err(Error::UniformSpec);
    }
    let twisted = spec.twisted_coordinates();
    if count > twisted.len() {
        return Err(Error::WitnessCount {
            want: count,
            have: twisted.len(),
        });
    }
    let mut out = Vec::with_capacity(count);
    for &n in twisted.iter().take(count) {
        let q = spec.seq().value(n);
        let group = AffineGroup::new(field_of_order(q as u64)?);
        let field = group.field();
        let x = field.least_generator();
        let one = field.one();
        let gamma = group.elem(field.sub(x, one)?, x)?;
        let conjugator = group.elem(one, one)?;
        let conjugate = group.conjugate(conjugator, gamma)?;
        let expected = group.elem(field.zero(), x)?;
        if conjugate != expected {
            return Err(Error::Invariant(format!(
                "witness conjugation at coordinate {n} missed the units"
            )));
        }
        out.push(Witness {
            coordinate: n,
            q,
            generator_index: x.index(),
            gamma,
            conjugator,
            conjugate,
        });
    }
    Ok(out)
}

/// Conjugacy-class audit of the twisted generator at the least twisted
/// coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoUnipotentCheck {
    pub coordinate: usize,
    pub q: u32,
    /// Size of the full conjugacy class of `γ = (x - 1, x)`.
    pub class_size: usize,
    /// The identity never appears in the class.
    pub identity_excluded: bool,
    /// Every class element keeps the multiplier `x`.
    pub multiplier_locked: bool,
    /// The class meets the units subgroup (at `(0, x)`).
    pub meets_units: bool,
}

/// Enumerates the conjugacy class of the twisted generator by brute force
/// and records its separation from the identity.
pub fn pseudo_unipotent_check(spec: &LatticeSpec) -> Result<PseudoUnipotentCheck> {
    let twisted = spec.twisted_coordinates();
    let n = *twisted.first().ok_or(Error::UniformSpec)?;
    let q = spec.seq().value(n);
    let group = AffineGroup::new(field_of_order(q as u64)?);
    let field = group.field();
    let x = field.least_generator();
    let gamma = group.elem(field.sub(x, field.one())?, x)?;
    let mut class: Vec<AffElem> = Vec::new();
    for i in 0..group.order() {
        let g = group.from_index(i)?;
        let c = group.conjugate(g, gamma)?;
        if !class.contains(&c) {
            class.push(c);
        }
    }
    let identity_excluded = !class.iter().any(|c| c.is_identity());
    let multiplier_locked = class.iter().all(|c| c.multiplier() == x);
    let units_rep = group.elem(field.zero(), x)?;
    let meets_units = class.contains(&units_rep);
    Ok(PseudoUnipotentCheck {
        coordinate: n,
        q,
        class_size: class.len(),
        identity_excluded,
        multiplier_locked,
        meets_units,
    })
}
