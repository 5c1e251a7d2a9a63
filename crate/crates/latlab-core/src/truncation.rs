//! Finite truncations of the restricted product, with exact Haar weights.
//!
//! A `PrimePowerSeq` fixes the coordinate orders `q_0, q_1, …` up to a
//! horizon, together with a tail rule promising lower bounds for the
//! unlisted coordinates.  A `TruncationModel` realizes the level-`k` head
//! `P_k = G_0 × … × G_k` as a finite group whose elements are coordinate
//! vectors; the Haar normalization gives each units subgroup volume one, so
//! every head element carries mass `1 / prod (q_n - 1)` and the head has
//! total volume `prod q_n`.  Level `-1` denotes the trivial truncation.

use crate::affine::{AffElem, AffineGroup, SubgroupTag};
use crate::field::field_of_order;
use crate::rational::{pow_i64, rat, rat_u, Rat};
use crate::{Error, Result};
use num::{One, Signed, Zero};

/// Default cap on the head order `prod q_n (q_n - 1)` of a truncation.
pub const DEFAULT_HEAD_CAP: u128 = 10_000_000;

/// Hard budget for operations that enumerate every head element.
pub const ENUMERATION_BUDGET: u128 = 1_000_000;

/// Promise about the coordinate orders beyond the horizon.
///
/// Values past the listed ones are never materialized; covolume tail bounds
/// consume only the stated lower bound `g(n)`, together with the standing
/// assumption that every coordinate order exceeds 4.
#[derive(Clone, Debug, PartialEq)]
pub enum TailRule {
    /// The sequence is finite: there are no coordinates past the horizon.
    None,
    /// `q_n >= (n + 2)^2`.
    QuadraticFloor,
    /// `q_n >= c * r^n` with rational `c > 0`, `r > 1`.
    GeometricFloor { c: Rat, r: Rat },
}

impl TailRule {
    pub fn label(&self) -> String {
        match self {
            TailRule::None => "none".into(),
            TailRule::QuadraticFloor => "quadratic".into(),
            TailRule::GeometricFloor { c, r } => {
                format!("geometric c={} r={}", c, r)
            }
        }
    }

    /// The promised lower bound `g(n)`, when the rule has one.
    pub fn floor_at(&self, n: usize) -> Option<Rat> {
        match self {
            TailRule::None => None,
            TailRule::QuadraticFloor => {
                let b = rat(n as i64 + 2, 1);
                Some(&b * &b)
            }
            TailRule::GeometricFloor { c, r } => Some(c * pow_i64(r, n as i64)),
        }
    }

    /// Closed-form upper bound for `sum_{n > k} 1 / g(n)`.
    ///
    /// Quadratic: `sum_{n > k} (n + 2)^{-2} <= 1 / (k + 2)` by comparison
    /// with the telescoping sum of `1 / ((n + 1)(n + 2))`.
    /// Geometric: `sum_{n > k} (c r^n)^{-1} = 1 / (c r^k (r - 1))`.
    pub fn tail_sum_bound(&self, k: i64) -> Option<Rat> {
        match self {
            TailRule::None => Some(Rat::zero()),
            TailRule::QuadraticFloor => Some(if k < -1 {
                // Not needed below level -1; clamp for safety.
                Rat::one()
            } else {
                rat(1, k + 2)
            }),
            TailRule::GeometricFloor { c, r } => {
                let denom = c * pow_i64(r, k) * (r - Rat::one());
                Some(denom.recip())
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        !matches!(self, TailRule::None)
    }
}

/// The coordinate orders `q_0 … q_h` (all prime powers `> 4`) plus the tail
/// rule; listed values must respect the rule's floor.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimePowerSeq {
    values: Vec<u32>,
    rule: TailRule,
}

impl PrimePowerSeq {
    pub fn new(values: &[u64], rule: TailRule) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let TailRule::GeometricFloor { c, r } = &rule {
            if !c.is_positive() || *r <= Rat::one() {
                return Err(Error::BadGeometricRule);
            }
        }
        for (n, &q) in values.iter().enumerate() {
            if q <= 4 {
                return Err(Error::QTooSmall { n, q });
            }
            crate::field::prime_power_parts(q)?;
            if q > crate::field::MAX_FIELD_ORDER {
                return Err(Error::FieldOrderCap {
                    q,
                    max: crate::field::MAX_FIELD_ORDER,
                });
            }
            if let Some(floor) = rule.floor_at(n) {
                if rat_u(q as u128) < floor {
                    return Err(Error::BelowTailFloor {
                        n,
                        q,
                        floor: floor.to_string(),
                    });
                }
            }
        }
        Ok(PrimePowerSeq {
            values: values.iter().map(|&q| q as u32).collect(),
            rule,
        })
    }

    /// Index of the last listed coordinate.
    pub fn horizon(&self) -> i64 {
        self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, n: usize) -> u32 {
        self.values[n]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn rule(&self) -> &TailRule {
        &self.rule
    }

    /// Effective floor for an unlisted coordinate: the rule floor joined
    /// with the standing bound `q > 4` (prime powers above 4 are `>= 5`).
    pub fn effective_floor(&self, n: usize) -> Option<Rat> {
        let five = rat(5, 1);
        self.rule.floor_at(n).map(|f| if f < five { five } else { f })
    }
}

/// The level-`k` head `P_k = G_0 × … × G_k` with exact Haar weights.
#[derive(Clone, Debug)]
pub struct TruncationModel {
    seq: PrimePowerSeq,
    k: i64,
    groups: Vec<AffineGroup>,
    head_order: u128,
    point_mass: Rat,
}

/// Builds the truncation at level `k >= -1` under the default head cap.
pub fn build_truncation(seq: &PrimePowerSeq, k: i64) -> Result<TruncationModel> {
    build_truncation_capped(seq, k, DEFAULT_HEAD_CAP)
}

/// Builds the truncation at level `k >= -1`; the head order
/// `prod_{n <= k} q_n (q_n - 1)` must stay within `cap`.
pub fn build_truncation_capped(
    seq: &PrimePowerSeq,
    k: i64,
    cap: u128,
) -> Result<TruncationModel> {
    if k < -1 || k > seq.horizon() {
        return Err(Error::LevelRange {
            k,
            h: seq.horizon(),
        });
    }
    let ncoords = (k + 1) as usize;
    let mut head_order: u128 = 1;
    for n in 0..ncoords {
        let q = seq.value(n) as u128;
        head_order = head_order.saturating_mul(q * (q - 1));
        if head_order > cap {
            return Err(Error::HeadCap {
                order: head_order,
                cap,
            });
        }
    }
    let mut groups = Vec::with_capacity(ncoords);
    let mut denom = Rat::one();
    for n in 0..ncoords {
        let q = seq.value(n) as u64;
        groups.push(AffineGroup::new(field_of_order(q)?));
        denom *= rat_u(q as u128 - 1);
    }
    Ok(TruncationModel {
        seq: seq.clone(),
        k,
        groups,
        head_order,
        point_mass: denom.recip(),
    })
}

impl TruncationModel {
    pub fn seq(&self) -> &PrimePowerSeq {
        &self.seq
    }

    pub fn level(&self) -> i64 {
        self.k
    }

    /// Number of coordinates, `k + 1`.
    pub fn ncoords(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, n: usize) -> &AffineGroup {
        &self.groups[n]
    }

    pub fn groups(&self) -> &[AffineGroup] {
        &self.groups
    }

    /// `|P_k| = prod q_n (q_n - 1)`.
    pub fn head_order(&self) -> u128 {
        self.head_order
    }

    /// Haar mass of a single head element: `1 / prod (q_n - 1)`.
    pub fn point_mass(&self) -> &Rat {
        &self.point_mass
    }

    /// Haar volume of the head, `prod q_n` (each factor `G_n` has volume
    /// `|G_n| / (q_n - 1) = q_n`).
    pub fn volume(&self) -> Rat {
        rat_u(self.head_order) * &self.point_mass
    }

    pub fn identity(&self) -> Vec<AffElem> {
        self.groups.iter().map(|g| g.identity()).collect()
    }

    fn check_elem(&self, g: &[AffElem]) -> Result<()> {
        if g.len() != self.ncoords() {
            return Err(Error::CoordinateCount);
        }
        Ok(())
    }

    /// Coordinate-wise product.
    pub fn mul(&self, a: &[AffElem], b: &[AffElem]) -> Result<Vec<AffElem>> {
        self.check_elem(a)?;
        self.check_elem(b)?;
        self.groups
            .iter()
            .zip(a.iter().zip(b.iter()))
            .map(|(g, (&x, &y))| g.mul(x, y))
            .collect()
    }

    /// Coordinate-wise inverse.
    pub fn inv(&self, a: &[AffElem]) -> Result<Vec<AffElem>> {
        self.check_elem(a)?;
        self.groups
            .iter()
            .zip(a.iter())
            .map(|(g, &x)| g.inv(x))
            .collect()
    }

    /// Mixed-radix canonical index of a head element (coordinate 0 varies
    /// fastest).
    pub fn index(&self, a: &[AffElem]) -> Result<u128> {
        self.check_elem(a)?;
        let mut idx: u128 = 0;
        for (g, &x) in self.groups.iter().zip(a.iter()).rev() {
            idx = idx * g.order() as u128 + g.index(x) as u128;
        }
        Ok(idx)
    }

    pub fn from_index(&self, mut idx: u128) -> Result<Vec<AffElem>> {
        if idx >= self.head_order {
            return Err(Error::IndexRange {
                idx: idx.min(u64::MAX as u128) as u64,
                q: 0,
            });
        }
        let mut out = Vec::with_capacity(self.ncoords());
        for g in &self.groups {
            let o = g.order() as u128;
            out.push(g.from_index((idx % o) as u64)?);
            idx /= o;
        }
        Ok(out)
    }

    /// Iterates every head element in canonical index order; guarded by the
    /// enumeration budget.
    pub fn head_elements(&self) -> Result<impl Iterator<Item = Vec<AffElem>> + '_> {
        if self.head_order > ENUMERATION_BUDGET {
            return Err(Error::EnumerationBudget {
                order: self.head_order,
                budget: ENUMERATION_BUDGET,
            });
        }
        Ok((0..self.head_order).map(|i| self.from_index(i).expect("in range")))
    }

    /// Exact Haar mass of an explicit subset of the head.
    pub fn mass_of(&self, count: u128) -> Rat {
        rat_u(count) * &self.point_mass
    }
}

/// A per-coordinate fundamental domain for a discrete head subgroup
/// `prod Γ_n` with `Γ_n ∈ {T_n, S_n}`: the set `Ω_k = F_0 × … × F_k` of
/// coordinate-wise transversals, with `F_n = U_n` against translations and
/// `F_n = U_n ∪ {least uncovered element}` against the twisted diagonal.
#[derive(Clone, Debug)]
pub struct FundamentalDomain {
    per_coordinate: Vec<Vec<AffElem>>,
    coordinate_volumes: Vec<Rat>,
    volume: Rat,
}

/// Marks must have length `k + 1` with every entry `Translations` or
/// `Twisted`.  Transversality is verified exhaustively per coordinate.
pub fn fundamental_domain(
    model: &TruncationModel,
    marks: &[SubgroupTag],
) -> Result<FundamentalDomain> {
    if marks.len() != model.ncoords() {
        return Err(Error::MaskLength {
            mask: marks.len(),
            seq: model.ncoords(),
        });
    }
    let mut per_coordinate = Vec::with_capacity(marks.len());
    let mut coordinate_volumes = Vec::with_capacity(marks.len());
    let mut volume = Rat::one();
    for (n, &mark) in marks.iter().enumerate() {
        let group = model.group(n);
        let q = group.q() as u64;
        let mut cells = match mark {
            SubgroupTag::Translations | SubgroupTag::Twisted => {
                group.subgroup_elements(SubgroupTag::Units)
            }
            _ => return Err(Error::Invariant(format!(
                "coordinate {n} must be marked T or S"
            ))),
        };
        if mark == SubgroupTag::Twisted {
            // U misses exactly one S-coset; adjoin its least element.
            let space = group.coset_space(SubgroupTag::Twisted);
            let mut covered = vec![false; space.len()];
            for &u in &cells {
                covered[space.point_of_elem(group, u) as usize] = true;
            }
            let extra = (0..group.order())
                .map(|i| group.from_index(i).expect("in range"))
                .find(|&g| !covered[space.point_of_elem(group, g) as usize])
                .ok_or_else(|| Error::Invariant("U already covers G/S".into()))?;
            cells.push(extra);
        }
        // Transversality: each coset of the mark meets the cell set once.
        let space = group.coset_space(mark);
        let mut hits = vec![0u32; space.len()];
        for &c in &cells {
            hits[space.point_of_elem(group, c) as usize] += 1;
        }
        if !hits.iter().all(|&h| h == 1) {
            return Err(Error::Invariant(format!(
                "coordinate {n} transversal failed"
            )));
        }
        let vol = rat_u(cells.len() as u128) / rat_u(q as u128 - 1);
        volume *= &vol;
        coordinate_volumes.push(vol);
        per_coordinate.push(cells);
    }
    Ok(FundamentalDomain {
        per_coordinate,
        coordinate_volumes,
        volume,
    })
}

impl FundamentalDomain {
    pub fn coordinate_cells(&self, n: usize) -> &[AffElem] {
        &self.per_coordinate[n]
    }

    pub fn coordinate_volume(&self, n: usize) -> &Rat {
        &self.coordinate_volumes[n]
    }

    /// `vol(Ω_k) = prod |F_n| / (q_n - 1)`.
    pub fn volume(&self) -> &Rat {
        &self.volume
    }
}

/// Outcome of the tiling verification for a fundamental domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingCheck {
    /// Every coordinate's `F_n · Γ_n` covers `G_n` exactly once.
    pub per_coordinate_exact: bool,
    /// Whether the full product head was additionally swept element by
    /// element (only for head orders within the enumeration budget scaled
    /// down to `10^5`).
    pub product_checked: bool,
    pub product_exact: Option<bool>,
}

/// Verifies that the translates `Ω_k · γ` tile the head exactly: each head
/// element factors uniquely as `f · γ` with `f ∈ Ω_k`, `γ` in the marked
/// subgroup (the domain is a transversal of the coset space `head / Γ`).
pub fn verify_tiling(
    model: &TruncationModel,
    marks: &[SubgroupTag],
    domain: &FundamentalDomain,
) -> Result<TilingCheck> {
    if marks.len() != model.ncoords() {
        return Err(Error::MaskLength {
            mask: marks.len(),
            seq: model.ncoords(),
        });
    }
    let mut per_coordinate_exact = true;
    for (n, &mark) in marks.iter().enumerate() {
        let group = model.group(n);
        let gamma = group.subgroup_elements(mark);
        let mut cover = vec![0u32; group.order() as usize];
        for &f in domain.coordinate_cells(n) {
            for &g in &gamma {
                cover[group.index(group.mul(f, g)?) as usize] += 1;
            }
        }
        if !cover.iter().all(|&c| c == 1) {
            per_coordinate_exact = false;
        }
    }
    let full_budget: u128 = 100_000;
    if model.head_order() <= full_budget {
        // Sweep the whole head: decompose each element coordinate-wise and
        // count decompositions.
        let mut exact = true;
        'outer: for g in model.head_elements()? {
            for (n, &mark) in marks.iter().enumerate() {
                let group = model.group(n);
                let mut ways = 0u32;
                for &f in domain.coordinate_cells(n) {
                    let cand = group.mul(group.inv(f)?, g[n])?;
                    if group.subgroup_contains(mark, cand) {
                        ways += 1;
                    }
                }
                if ways != 1 {
                    exact = false;
                    break 'outer;
                }
            }
        }
        Ok(TilingCheck {
            per_coordinate_exact,
            product_checked: true,
            product_exact: Some(exact),
        })
    } else {
        Ok(TilingCheck {
            per_coordinate_exact,
            product_checked: false,
            product_exact: None,
        })
    }
}

/// Two-route evaluation of the fibration identity
/// `μ_G(K) = Σ_{xH ∈ K·x0} μ_H(H ∩ x^{-1} K) · m(xH)` on the head, under
/// the normalization `vol_H(H ∩ U-head) = 1` and the induced invariant
/// measure `m` on `head / H`.
#[derive(Clone, Debug)]
pub struct NormalizationReport {
    /// Direct Haar mass of `K`.
    pub lhs: Rat,
    /// Fiber-sum route.
    pub rhs: Rat,
    /// Per-coset rows: (least element index of the coset, fiber mass
    /// `μ_H(H ∩ x^{-1}K)`, point mass `m(xH)`).
    pub per_coset: Vec<(u128, Rat, Rat)>,
    pub holds: bool,
}

/// `h_marks` cuts the subgroup `H = prod H_n` from marked factors; `k_set`
/// is an arbitrary subset of the head given by elements.
pub fn standard_normalization_check(
    model: &TruncationModel,
    h_marks: &[SubgroupTag],
    k_set: &[Vec<AffElem>],
) -> Result<NormalizationReport> {
    if h_marks.len() != model.ncoords() {
        return Err(Error::MaskLength {
            mask: h_marks.len(),
            seq: model.ncoords(),
        });
    }
    let mut h_order: u128 = 1;
    let mut h_cap_u: u128 = 1; // |H ∩ U-head|
    for (n, &mark) in h_marks.iter().enumerate() {
        let group = model.group(n);
        h_order *= group.subgroup_order(mark) as u128;
        let in_u = group
            .subgroup_elements(mark)
            .iter()
            .filter(|&&g| g.translation_part().is_zero())
            .count() as u128;
        h_cap_u *= in_u;
    }
    let budget = ENUMERATION_BUDGET;
    if k_set.len() as u128 * h_order > budget {
        return Err(Error::EnumerationBudget {
            order: k_set.len() as u128 * h_order,
            budget,
        });
    }
    let lhs = model.mass_of(k_set.len() as u128);
    // Group K by cosets xH: a coset is keyed by the least head index over
    // x h for h in H.
    let h_elements = enumerate_marked(model, h_marks)?;
    let mut per_coset: Vec<(u128, Rat, Rat)> = Vec::new();
    let mut seen: std::collections::BTreeMap<u128, u128> = std::collections::BTreeMap::new();
    for x in k_set {
        model.check_elem(x)?;
        let mut key = u128::MAX;
        let mut fiber = 0u128;
        for h in &h_elements {
            let xh = model.mul(x, h)?;
            let idx = model.index(&xh)?;
            key = key.min(idx);
            if k_set.iter().any(|y| y == &xh) {
                fiber += 1;
            }
        }
        seen.entry(key).or_insert(fiber);
    }
    // m(xH) = point_mass * |H ∩ U-head| (fibration of μ_G over m with
    // fibers of vol_H-volume |H| / |H ∩ U-head|).
    let m_point = model.point_mass() * rat_u(h_cap_u);
    let mut rhs = Rat::zero();
    for (key, fiber) in seen {
        let fiber_mass = rat_u(fiber) / rat_u(h_cap_u);
        rhs += &fiber_mass * &m_point;
        per_coset.push((key, fiber_mass, m_point.clone()));
    }
    let holds = lhs == rhs;
    Ok(NormalizationReport {
        lhs,
        rhs,
        per_coset,
        holds,
    })
}

/// Enumerates `prod H_n` for marked factors, in canonical index order.
pub fn enumerate_marked(
    model: &TruncationModel,
    marks: &[SubgroupTag],
) -> Result<Vec<Vec<AffElem>>> {
    if marks.len() != model.ncoords() {
        return Err(Error::MaskLength {
            mask: marks.len(),
            seq: model.ncoords(),
        });
    }
    let mut total: u128 = 1;
    for (n, &mark) in marks.iter().enumerate() {
        total *= model.group(n).subgroup_order(mark) as u128;
    }
    if total > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget {
            order: total,
            budget: ENUMERATION_BUDGET,
        });
    }
    let per: Vec<Vec<AffElem>> = marks
        .iter()
        .enumerate()
        .map(|(n, &mark)| model.group(n).subgroup_elements(mark))
        .collect();
    let mut out = Vec::with_capacity(total as usize);
    let mut counters = vec![0usize; marks.len()];
    loop {
        out.push(
            counters
                .iter()
                .enumerate()
                .map(|(n, &c)| per[n][c])
                .collect::<Vec<_>>(),
        );
        let mut n = 0;
        loop {
            if n == marks.len() {
                return Ok(out);
            }
            counters[n] += 1;
            if counters[n] < per[n].len() {
                break;
            }
            counters[n] = 0;
            n += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn seq(values: &[u64]) -> PrimePowerSeq {
        PrimePowerSeq::new(values, TailRule::None).unwrap()
    }

    #[test]
    fn sequence_validation() {
        assert!(matches!(
            PrimePowerSeq::new(&[], TailRule::None).unwrap_err(),
            Error::EmptySequence
        ));
        assert_eq!(
            PrimePowerSeq::new(&[3], TailRule::None).unwrap_err(),
            Error::QTooSmall { n: 0, q: 3 }
        );
        assert_eq!(
            PrimePowerSeq::new(&[5, 6], TailRule::None).unwrap_err(),
            Error::NotPrimePower(6)
        );
        // Quadratic floor: q_1 must be >= 9.
        assert!(matches!(
            PrimePowerSeq::new(&[5, 7], TailRule::QuadraticFloor).unwrap_err(),
            Error::BelowTailFloor { n: 1, q: 7, .. }
        ));
        assert!(PrimePowerSeq::new(&[5, 11, 17, 29, 37], TailRule::QuadraticFloor).is_ok());
        assert!(matches!(
            PrimePowerSeq::new(
                &[5],
                TailRule::GeometricFloor {
                    c: rat(5, 1),
                    r: rat(1, 1)
                }
            )
            .unwrap_err(),
            Error::BadGeometricRule
        ));
        // Geometric floor honored: 5, 7, 8, 9 over c=5, r=6/5.
        assert!(PrimePowerSeq::new(
            &[5, 7, 8, 9],
            TailRule::GeometricFloor {
                c: rat(5, 1),
                r: rat(6, 5)
            }
        )
        .is_ok());
    }

    #[test]
    fn tail_sum_bounds() {
        let quad = TailRule::QuadraticFloor;
        assert_eq!(quad.tail_sum_bound(0).unwrap(), rat(1, 2));
        assert_eq!(quad.tail_sum_bound(3).unwrap(), rat(1, 5));
        let geo = TailRule::GeometricFloor {
            c: rat(5, 1),
            r: rat(6, 5),
        };
        // sum_{n>k} 1/(5 (6/5)^n) = 1/(5 (6/5)^k (1/5)) = (5/6)^k.
        assert_eq!(geo.tail_sum_bound(0).unwrap(), rat(1, 1));
        assert_eq!(geo.tail_sum_bound(2).unwrap(), rat(25, 36));
        // Partial sums really stay below the closed form.
        let mut partial = Rat::zero();
        for n in 1..200usize {
            partial += quad.floor_at(n).unwrap().recip();
        }
        assert!(partial < quad.tail_sum_bound(0).unwrap());
    }

    #[test]
    fn builds_and_measures() {
        let s = seq(&[5]);
        let m = build_truncation(&s, 0).unwrap();
        assert_eq!(m.head_order(), 20);
        assert_eq!(*m.point_mass(), rat(1, 4));
        assert_eq!(m.volume(), rat(5, 1));

        let s2 = seq(&[5, 11]);
        let m2 = build_truncation(&s2, 1).unwrap();
        assert_eq!(m2.head_order(), 20 * 110);
        assert_eq!(m2.volume(), rat(55, 1));

        let trivial = build_truncation(&s2, -1).unwrap();
        assert_eq!(trivial.head_order(), 1);
        assert_eq!(trivial.volume(), rat(1, 1));

        assert!(matches!(
            build_truncation(&s2, 2).unwrap_err(),
            Error::LevelRange { .. }
        ));
        assert!(matches!(
            build_truncation_capped(&s2, 1, 100).unwrap_err(),
            Error::HeadCap { .. }
        ));
    }

    #[test]
    fn head_group_laws() {
        let s = seq(&[5, 7]);
        let m = build_truncation(&s, 1).unwrap();
        let a = m.from_index(123).unwrap();
        let b = m.from_index(456).unwrap();
        let ab = m.mul(&a, &b).unwrap();
        assert_eq!(m.index(&ab).unwrap() < m.head_order(), true);
        let inv = m.inv(&a).unwrap();
        assert_eq!(m.mul(&a, &inv).unwrap(), m.identity());
        // Index round-trip.
        for idx in [0u128, 1, 19, 20, 839] {
            assert_eq!(m.index(&m.from_index(idx).unwrap()).unwrap(), idx);
        }
        // Left translation permutes the head (unimodularity surrogate).
        let mut seen = vec![false; m.head_order() as usize];
        for g in m.head_elements().unwrap() {
            let ag = m.mul(&a, &g).unwrap();
            let i = m.index(&ag).unwrap() as usize;
            assert!(!seen[i]);
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn fundamental_domain_volumes() {
        let s = seq(&[5, 11, 17]);
        let m = build_truncation(&s, 2).unwrap();
        // All translations: F_n = U_n, volume 1.
        let marks = vec![SubgroupTag::Translations; 3];
        let d = fundamental_domain(&m, &marks).unwrap();
        assert_eq!(*d.volume(), rat(1, 1));
        for n in 0..3 {
            assert_eq!(d.coordinate_cells(n).len() as u64, s.value(n) as u64 - 1);
        }
        // All twisted: F_n = U_n plus one element, volume q/(q-1) each.
        let marks = vec![SubgroupTag::Twisted; 3];
        let d = fundamental_domain(&m, &marks).unwrap();
        assert_eq!(*d.volume(), rat(5, 4) * rat(11, 10) * rat(17, 16));
        assert_eq!(*d.coordinate_volume(0), rat(5, 4));
        // The adjoined element is the least uncovered one: (1, 1) at q = 5.
        let extra = *d.coordinate_cells(0).last().unwrap();
        assert_eq!(extra.translation_part().index(), 1);
        assert_eq!(extra.multiplier().index(), 1);
    }

    #[test]
    fn tiling_exact_small_heads() {
        let s = seq(&[5, 7]);
        let m = build_truncation(&s, 1).unwrap();
        for marks in [
            vec![SubgroupTag::Translations, SubgroupTag::Translations],
            vec![SubgroupTag::Twisted, SubgroupTag::Translations],
            vec![SubgroupTag::Translations, SubgroupTag::Twisted],
            vec![SubgroupTag::Twisted, SubgroupTag::Twisted],
        ] {
            let d = fundamental_domain(&m, &marks).unwrap();
            let check = verify_tiling(&m, &marks, &d).unwrap();
            assert!(check.per_coordinate_exact);
            assert_eq!(check.product_exact, Some(true));
        }
    }

    #[test]
    fn normalization_identity_routes_agree() {
        let s = seq(&[5, 7]);
        let m = build_truncation(&s, 1).unwrap();
        let h_marks = vec![SubgroupTag::Twisted, SubgroupTag::Translations];
        // K = the U-head: mass 1.
        let k_u = enumerate_marked(&m, &[SubgroupTag::Units, SubgroupTag::Units]).unwrap();
        let rep = standard_normalization_check(&m, &h_marks, &k_u).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.lhs, rat(1, 1));
        // K = the full head: mass = total volume 35.
        let k_all: Vec<_> = m.head_elements().unwrap().collect();
        let rep = standard_normalization_check(&m, &h_marks, &k_all).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.lhs, rat(35, 1));
        // K = an arbitrary slice of elements.
        let k_some: Vec<_> = m
            .head_elements()
            .unwrap()
            .enumerate()
            .filter(|(i, _)| i % 7 == 0)
            .map(|(_, g)| g)
            .collect();
        let rep = standard_normalization_check(&m, &h_marks, &k_some).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.lhs, m.mass_of(k_some.len() as u128));
    }

    #[test]
    fn marked_enumeration_orders() {
        let s = seq(&[5, 7]);
        let m = build_truncation(&s, 1).unwrap();
        let h = enumerate_marked(&m, &[SubgroupTag::Twisted, SubgroupTag::Units]).unwrap();
        assert_eq!(h.len(), 4 * 6);
        let g = enumerate_marked(&m, &[SubgroupTag::Full, SubgroupTag::Trivial]).unwrap();
        assert_eq!(g.len(), 20);
    }
}
