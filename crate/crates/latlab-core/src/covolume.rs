//! Volume bookkeeping for subgroups of finite heads: the double-coset
//! covolume sum with its closed-form oracle, a scale-invariant consistency
//! identity for orbit measures, and the monotone volume trace whose
//! stabilization certifies cocompactness.
//!
//! Throughout, `G` is a truncated head, `K`, `K₁`, `K₂` are coordinate
//! products of marked subgroups playing the role of compact open
//! subgroups, and `H` is either another marked product or the exact
//! stabilizer of a point in a product of coset spaces.

use crate::affine::{AffElem, SubgroupTag};
use crate::lattice::LatticeSpec;
use crate::rational::{rat_u, Rat};
use crate::truncation::{enumerate_marked, TruncationModel, ENUMERATION_BUDGET};
use crate::{Error, Result};
use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// One double coset `K t H`, keyed by its least element.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleCosetRow {
    /// Canonical head index of the least element of the coset.
    pub rep_index: u128,
    /// `|K t H|`.
    pub size: u128,
    /// `|H_t|` where `H_t = H ∩ t⁻¹ K t`.
    pub fixer_order: u128,
    /// `vol_H(H_t)` under the normalization `vol_H(K ∩ H) = 1`.
    pub fixer_volume: Rat,
    /// `1 / vol_H(H_t)`, the coset's share of the total measure.
    pub contribution: Rat,
}

/// Double-coset evaluation of the total measure of `G / H` against the
/// closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct SerreReport {
    pub group_order: u128,
    pub k_order: u128,
    pub h_order: u128,
    pub k_meet_h_order: u128,
    pub rows: Vec<DoubleCosetRow>,
    /// `Σ_t 1 / vol_H(H_t)` over double-coset representatives.
    pub covolume: Rat,
    /// `|G| · |K ∩ H| / (|H| · |K|)` — independent of the decomposition.
    pub oracle: Rat,
    /// The cosets really partition `G`: `Σ_t |K t H| = |G|`.
    pub partition_exact: bool,
    pub agrees: bool,
}

fn check_tags(model: &TruncationModel, tags: &[SubgroupTag]) -> Result<()> {
    if tags.len() != model.ncoords() {
        return Err(Error::MaskLength {
            mask: tags.len(),
            seq: model.ncoords(),
        });
    }
    Ok(())
}

fn marked_order(model: &TruncationModel, tags: &[SubgroupTag]) -> u128 {
    tags.iter()
        .enumerate()
        .map(|(n, &t)| model.group(n).subgroup_order(t) as u128)
        .product()
}

fn meet_order(model: &TruncationModel, a: &[SubgroupTag], b: &[SubgroupTag]) -> u128 {
    a.iter()
        .zip(b.iter())
        .enumerate()
        .map(|(n, (&ta, &tb))| {
            let group = model.group(n);
            group
                .subgroup_elements(ta)
                .iter()
                .filter(|&&g| group.subgroup_contains(tb, g))
                .count() as u128
        })
        .product()
}

fn contains_marked(model: &TruncationModel, tags: &[SubgroupTag], g: &[AffElem]) -> bool {
    tags.iter()
        .zip(g.iter())
        .enumerate()
        .all(|(n, (&t, &x))| model.group(n).subgroup_contains(t, x))
}

/// Measures `G / H` as a sum over the double cosets `K \ G / H`, with the
/// least-element rule picking representatives, and cross-checks the result
/// against the closed form.
pub fn serre_covolume(
    model: &TruncationModel,
    k_tags: &[SubgroupTag],
    h_tags: &[SubgroupTag],
) -> Result<SerreReport> {
    check_tags(model, k_tags)?;
    check_tags(model, h_tags)?;
    if model.head_order() > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget {
            order: model.head_order(),
            budget: ENUMERATION_BUDGET,
        });
    }
    let k_elems = enumerate_marked(model, k_tags)?;
    let h_elems = enumerate_marked(model, h_tags)?;
    let k_order = k_elems.len() as u128;
    let h_order = h_elems.len() as u128;
    let k_meet_h_order = meet_order(model, k_tags, h_tags);
    let group_order = model.head_order();

    let mut covered = vec![false; group_order as usize];
    let mut rows = Vec::new();
    let mut covolume = Rat::zero();
    let mut total_size: u128 = 0;
    for rep in 0..group_order {
        if covered[rep as usize] {
            continue;
        }
        let t = model.from_index(rep)?;
        // Sweep K t H, marking members and counting fresh ones.
        let mut size: u128 = 0;
        for k in &k_elems {
            let kt = model.mul(k, &t)?;
            for h in &h_elems {
                let kth = model.mul(&kt, h)?;
                let idx = model.index(&kth)? as usize;
                if !covered[idx] {
                    covered[idx] = true;
                    size += 1;
                }
            }
        }
        // H_t = { h ∈ H : t h t⁻¹ ∈ K }.
        let t_inv = model.inv(&t)?;
        let mut fixer_order: u128 = 0;
        for h in &h_elems {
            let tht = model.mul(&model.mul(&t, h)?, &t_inv)?;
            if contains_marked(model, k_tags, &tht) {
                fixer_order += 1;
            }
        }
        let fixer_volume = rat_u(fixer_order) / rat_u(k_meet_h_order);
        let contribution = fixer_volume.recip();
        covolume += &contribution;
        total_size += size;
        rows.push(DoubleCosetRow {
            rep_index: rep,
            size,
            fixer_order,
            fixer_volume,
            contribution,
        });
    }
    let oracle =
        rat_u(group_order) * rat_u(k_meet_h_order) / (rat_u(h_order) * rat_u(k_order));
    let partition_exact = total_size == group_order;
    let agrees = covolume == oracle;
    Ok(SerreReport {
        group_order,
        k_order,
        h_order,
        k_meet_h_order,
        rows,
        covolume,
        oracle,
        partition_exact,
        agrees,
    })
}

/// A point of the product coset space `X = Π_n G_n / B_n` together with
/// its per-coordinate data, used by the orbit-measure identities.
struct ProductPoint {
    coords: Vec<u32>,
    /// Stabilizer of the point, per coordinate, as element-index sets.
    stab: Vec<BTreeSet<u64>>,
    stabilizer_order: u128,
}

fn resolve_point(
    model: &TruncationModel,
    base_tags: &[SubgroupTag],
    point: u128,
) -> Result<ProductPoint> {
    check_tags(model, base_tags)?;
    let mut space_size: u128 = 1;
    for (n, &t) in base_tags.iter().enumerate() {
        space_size *= model.group(n).coset_space(t).len() as u128;
    }
    if point >= space_size {
        return Err(Error::IndexRange {
            idx: point.min(u64::MAX as u128) as u64,
            q: 0,
        });
    }
    let mut rem = point;
    let mut coords = Vec::with_capacity(base_tags.len());
    let mut stab = Vec::with_capacity(base_tags.len());
    let mut stabilizer_order: u128 = 1;
    for (n, &t) in base_tags.iter().enumerate() {
        let group = model.group(n);
        let space = group.coset_space(t);
        let len = space.len() as u128;
        let x = (rem % len) as u32;
        rem /= len;
        let fix: BTreeSet<u64> = space.stabilizer(group, x).into_iter().collect();
        stabilizer_order *= fix.len() as u128;
        coords.push(x);
        stab.push(fix);
    }
    Ok(ProductPoint {
        coords,
        stab,
        stabilizer_order,
    })
}

/// Orbit size of the point under a marked product subgroup, coordinate by
/// coordinate.
fn orbit_size(
    model: &TruncationModel,
    base_tags: &[SubgroupTag],
    tags: &[SubgroupTag],
    point: &ProductPoint,
) -> Result<u128> {
    let mut size: u128 = 1;
    for (n, &t) in tags.iter().enumerate() {
        let group = model.group(n);
        let space = group.coset_space(base_tags[n]);
        let mut seen = BTreeSet::new();
        for &g in &group.subgroup_elements(t) {
            seen.insert(space.act(group, g, point.coords[n]));
        }
        size *= seen.len() as u128;
    }
    Ok(size)
}

/// How much of a marked subgroup fixes the point.
fn meet_stabilizer(
    model: &TruncationModel,
    tags: &[SubgroupTag],
    point: &ProductPoint,
) -> u128 {
    tags.iter()
        .enumerate()
        .map(|(n, &t)| {
            let group = model.group(n);
            group
                .subgroup_elements(t)
                .iter()
                .filter(|&&g| point.stab[n].contains(&group.index(g)))
                .count() as u128
        })
        .product()
}

/// One random rescaling of the three measures and the two sides of the
/// identity under it.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingTrial {
    pub scale_group: Rat,
    pub scale_stabilizer: Rat,
    pub scale_orbit: Rat,
    pub lhs: Rat,
    pub rhs: Rat,
}

/// Exact verification of the orbit-measure identity
/// `vol_G(K₂) · vol_H(K₁∩H) · μ(K₁x) = vol_G(K₁) · vol_H(K₂∩H) · μ(K₂x)`
/// with `H = Stab(x)`, under several random rescalings of `vol_G`,
/// `vol_H` and `μ` (both sides are homogeneous of degree one in each
/// measure, so the identity cannot depend on the normalizations).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub point: u128,
    pub stabilizer_order: u128,
    pub k1_order: u128,
    pub k2_order: u128,
    pub k1_meet_stabilizer: u128,
    pub k2_meet_stabilizer: u128,
    pub orbit1: u128,
    pub orbit2: u128,
    pub trials: Vec<ScalingTrial>,
    pub holds: bool,
}

/// Evaluates the identity at the given point of `X = Π_n G_n / B_n` with
/// three seeded rational rescalings.
pub fn haar_scaling_consistency(
    model: &TruncationModel,
    k1_tags: &[SubgroupTag],
    k2_tags: &[SubgroupTag],
    base_tags: &[SubgroupTag],
    point: u128,
    seed: u64,
) -> Result<ScalingReport> {
    check_tags(model, k1_tags)?;
    check_tags(model, k2_tags)?;
    let pt = resolve_point(model, base_tags, point)?;
    let k1_order = marked_order(model, k1_tags);
    let k2_order = marked_order(model, k2_tags);
    let k1_meet_stabilizer = meet_stabilizer(model, k1_tags, &pt);
    let k2_meet_stabilizer = meet_stabilizer(model, k2_tags, &pt);
    let orbit1 = orbit_size(model, base_tags, k1_tags, &pt)?;
    let orbit2 = orbit_size(model, base_tags, k2_tags, &pt)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_scale = |rng: &mut ChaCha8Rng| -> Rat {
        let num = rng.gen_range(1u64..=1000);
        let den = rng.gen_range(1u64..=1000);
        rat_u(num as u128) / rat_u(den as u128)
    };
    let mut trials = Vec::with_capacity(3);
    let mut holds = true;
    for _ in 0..3 {
        let a = random_scale(&mut rng);
        let b = random_scale(&mut rng);
        let lam = random_scale(&mut rng);
        let lhs = &a * rat_u(k2_order)
            * (&b * rat_u(k1_meet_stabilizer))
            * (&lam * rat_u(orbit1));
        let rhs = &a * rat_u(k1_order)
            * (&b * rat_u(k2_meet_stabilizer))
            * (&lam * rat_u(orbit2));
        holds &= lhs == rhs;
        trials.push(ScalingTrial {
            scale_group: a,
            scale_stabilizer: b,
            scale_orbit: lam,
            lhs,
            rhs,
        });
    }
    Ok(ScalingReport {
        point,
        stabilizer_order: pt.stabilizer_order,
        k1_order,
        k2_order,
        k1_meet_stabilizer,
        k2_meet_stabilizer,
        orbit1,
        orbit2,
        trials,
        holds,
    })
}

/// The nested-pair reduction of the identity: for `K₂` normal in `K₁`,
/// the orbit map `K₁x → K₁ / K₂·(K₁ ∩ H)` has fibers of size `|K₂x|`, so
/// `μ(K₁x) = [K₁ : K₂·(K₁∩H)] · μ(K₂x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalPairReport {
    pub point: u128,
    /// `[K₁ : K₂ · (K₁ ∩ H)]`.
    pub index: u128,
    pub orbit1: u128,
    pub orbit2: u128,
    pub holds: bool,
}

/// Verifies the reduction for marked products with `K₂ ⊴ K₁`
/// coordinate-wise (normality is checked element by element).
pub fn normal_pair_identity(
    model: &TruncationModel,
    k1_tags: &[SubgroupTag],
    k2_tags: &[SubgroupTag],
    base_tags: &[SubgroupTag],
    point: u128,
) -> Result<NormalPairReport> {
    check_tags(model, k1_tags)?;
    check_tags(model, k2_tags)?;
    let pt = resolve_point(model, base_tags, point)?;
    // Containment and normality per coordinate.
    for n in 0..model.ncoords() {
        let group = model.group(n);
        let k1 = group.subgroup_elements(k1_tags[n]);
        let k2 = group.subgroup_elements(k2_tags[n]);
        if !k2.iter().all(|&g| group.subgroup_contains(k1_tags[n], g)) {
            return Err(Error::NotNormalPair);
        }
        for &a in &k1 {
            for &b in &k2 {
                let c = group.conjugate(a, b)?;
                if !group.subgroup_contains(k2_tags[n], c) {
                    return Err(Error::NotNormalPair);
                }
            }
        }
    }
    // |K₂ · (K₁ ∩ H)| per coordinate, then the index.
    let mut product_order: u128 = 1;
    for n in 0..model.ncoords() {
        let group = model.group(n);
        let k1 = group.subgroup_elements(k1_tags[n]);
        let k2 = group.subgroup_elements(k2_tags[n]);
        let meet: Vec<AffElem> = k1
            .iter()
            .copied()
            .filter(|&g| pt.stab[n].contains(&group.index(g)))
            .collect();
        let mut set = BTreeSet::new();
        for &x in &k2 {
            for &s in &meet {
                set.insert(group.index(group.mul(x, s)?));
            }
        }
        product_order *= set.len() as u128;
    }
    let k1_order = marked_order(model, k1_tags);
    if k1_order % product_order != 0 {
        return Err(Error::Invariant(
            "product set order does not divide the ambient order".into(),
        ));
    }
    let index = k1_order / product_order;
    let orbit1 = orbit_size(model, base_tags, k1_tags, &pt)?;
    let orbit2 = orbit_size(model, base_tags, k2_tags, &pt)?;
    let holds = orbit1 == index * orbit2;
    Ok(NormalPairReport {
        point,
        index,
        orbit1,
        orbit2,
        holds,
    })
}

/// The per-level volume trace `γ_k = vol(O_k) / |H_k|`, where `O_k` is
/// the level-`k` open subgroup (head times units tail) and
/// `H_k = Γ ∩ O_k` the lattice head, together with the exact step data
/// relating consecutive levels.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaTrace {
    /// `γ_0 … γ_h`, each an exact rational.
    pub gammas: Vec<Rat>,
    /// `α_n = [H_{n+1} : H_n]`, the lattice-side index.
    pub alphas: Vec<u64>,
    /// `β_n = [O_{n+1} : O_n]`, the open-side index.
    pub betas: Vec<u64>,
    pub sup_beta: Option<u64>,
    /// `γ_0 / sup β` — every strictly positive step clears this floor.
    pub increment_floor: Option<Rat>,
    /// `α_n γ_{n+1} = β_n γ_n` at every step.
    pub relation_exact: bool,
    pub monotone: bool,
    pub alpha_le_beta: bool,
    /// Least level whose value already equals the final value.
    pub stabilization_level: i64,
    /// The trace goes flat strictly before the horizon.
    pub cocompact_certified: bool,
}

/// Computes the trace from the volume route: `vol(O_k) = Π q_n` and
/// `|H_k| = Π |Γ_n|`, both over `n ≤ k`.
pub fn gamma_trace(spec: &LatticeSpec, horizon: i64) -> Result<GammaTrace> {
    let h = spec.seq().horizon();
    if horizon < 0 || horizon > h {
        return Err(Error::LevelRange { k: horizon, h });
    }
    let mut gammas = Vec::with_capacity((horizon + 1) as usize);
    let mut vol = Rat::one();
    let mut count = Rat::one();
    for n in 0..=horizon as usize {
        vol *= rat_u(spec.seq().value(n) as u128);
        count *= rat_u(spec.subgroup_order(n) as u128);
        gammas.push(&vol / &count);
    }
    let alphas: Vec<u64> = (1..=horizon as usize)
        .map(|n| spec.subgroup_order(n))
        .collect();
    let betas: Vec<u64> = (1..=horizon as usize)
        .map(|n| spec.seq().value(n) as u64)
        .collect();
    let sup_beta = betas.iter().copied().max();
    let increment_floor = sup_beta.map(|q| &gammas[0] / rat_u(q as u128));
    let relation_exact = (0..alphas.len()).all(|n| {
        rat_u(alphas[n] as u128) * &gammas[n + 1] == rat_u(betas[n] as u128) * &gammas[n]
    });
    let monotone = gammas.windows(2).all(|w| w[0] <= w[1]);
    let alpha_le_beta = alphas.iter().zip(betas.iter()).all(|(a, b)| a <= b);
    let last = gammas.last().expect("nonempty").clone();
    let stabilization_level = gammas
        .iter()
        .position(|g| *g == last)
        .expect("last is present") as i64;
    let cocompact_certified = stabilization_level < horizon;
    Ok(GammaTrace {
        gammas,
        alphas,
        betas,
        sup_beta,
        increment_floor,
        relation_exact,
        monotone,
        alpha_le_beta,
        stabilization_level,
        cocompact_certified,
    })
}

/// Step-by-step audit of the trace increments against the floor.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementReport {
    pub increments: Vec<Rat>,
    pub floor: Option<Rat>,
    pub strict_increases: usize,
    /// Every strictly positive increment is at least the floor.
    pub all_above_floor: bool,
}

pub fn bounded_index_increment_check(trace: &GammaTrace) -> IncrementReport {
    let increments: Vec<Rat> = trace
        .gammas
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .collect();
    let strict: Vec<&Rat> = increments.iter().filter(|d| d.is_positive()).collect();
    let strict_increases = strict.len();
    let all_above_floor = match &trace.increment_floor {
        Some(floor) => strict.iter().all(|d| *d >= floor),
        None => strict_increases == 0,
    };
    IncrementReport {
        increments,
        floor: trace.increment_floor.clone(),
        strict_increases,
        all_above_floor,
    }
}

/// Verdict from a family of per-level relative volumes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocompactnessVerdict {
    /// All listed volumes stay within the stated bound.
    pub bounded: bool,
    /// The family goes flat at the end (last two values equal).
    pub stabilizes: bool,
    pub certified: bool,
}

/// A family certifies cocompactness when it is bounded by the given
/// constant and has stopped growing; an empty family certifies nothing.
pub fn bounded_volume_cocompactness(
    volumes: &[Rat],
    bound: &Rat,
) -> Result<CocompactnessVerdict> {
    if volumes.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let bounded = volumes.iter().all(|v| v <= bound);
    let stabilizes = volumes.len() >= 2 && volumes[volumes.len() - 1] == volumes[volumes.len() - 2];
    Ok(CocompactnessVerdict {
        bounded,
        stabilizes,
        certified: bounded && stabilizes,
    })
}
