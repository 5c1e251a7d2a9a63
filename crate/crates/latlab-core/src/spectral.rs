//! Finite homogeneous-space models of the head acting on its lattice
//! quotient, with three diagnostics: the orbit/gap dichotomy of an
//! averaging operator, almost-invariant vectors built from exact
//! convolutions against a nested chain of open subgroups, and a
//! balanced-set invariance floor certifying strong mixing of translations.
//!
//! The space is `X = P_k / Γ-head` with the uniform invariant probability
//! measure (left translation by the head is transitive, so uniformity is
//! forced).  The acting subgroup is `W_m = G_0 × … × G_m × U_{m+1} × … ×
//! U_k`; its canonical generators are a unit translation and a
//! multiplicative generator in each full coordinate, and a multiplicative
//! generator alone in each units coordinate.

use crate::affine::{orbit_ids, AffElem, CosetSpace, SubgroupTag};
use crate::lattice::{covolume, LatticeSpec};
use crate::rational::{rat, rat_u, to_f64, Rat};
use crate::truncation::{build_truncation_capped, enumerate_marked, TruncationModel};
use crate::{Error, Result};
use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default cap on the number of points of a homogeneous-space model.
pub const DEFAULT_POINT_CAP: u128 = 5000;

/// Convergence tolerance of the eigensolver residual.
pub const EIGEN_TOL: f64 = 1e-12;

/// Iteration cap of the eigensolver.
pub const EIGEN_CAP: u64 = 100_000;

/// What a probe does in its single nontrivial coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeKind {
    /// Translation by one, `(1, 1)`.
    Translation,
    /// The least multiplicative generator, `(0, x)`.
    Unit,
}

/// A canonical generator of the acting subgroup, realized both as a head
/// element and as a permutation of the point set.
#[derive(Clone, Debug)]
pub struct Probe {
    pub coordinate: usize,
    pub kind: ProbeKind,
    pub elem: Vec<AffElem>,
    pub perm: Vec<u32>,
}

impl Probe {
    pub fn label(&self) -> String {
        match self.kind {
            ProbeKind::Translation => format!("t{}", self.coordinate),
            ProbeKind::Unit => format!("u{}", self.coordinate),
        }
    }

    /// Whether the probe lies in `W_j` (units lie in every level; the
    /// translation needs its coordinate within the full block).
    pub fn in_level(&self, j: i64) -> bool {
        match self.kind {
            ProbeKind::Unit => true,
            ProbeKind::Translation => (self.coordinate as i64) <= j,
        }
    }
}

/// The finite model `X = P_k / Γ-head` acted on by `W_m`.
#[derive(Clone, Debug)]
pub struct HomSpace {
    spec: LatticeSpec,
    m: i64,
    k: i64,
    model: TruncationModel,
    spaces: Vec<CosetSpace>,
    sizes: Vec<u32>,
    points: usize,
    base: usize,
    probes: Vec<Probe>,
    /// Per coordinate, the orbit id of each local point under the local
    /// units subgroup (ids keyed by least member).
    unit_orbit_ids: Vec<Vec<u32>>,
}

/// Builds the space under the default point cap.
pub fn build_homspace(spec: &LatticeSpec, m: i64, k: i64) -> Result<HomSpace> {
    build_homspace_capped(spec, m, k, DEFAULT_POINT_CAP)
}

/// Builds the space for the level pair `-1 <= m < k <= horizon`.
pub fn build_homspace_capped(
    spec: &LatticeSpec,
    m: i64,
    k: i64,
    cap: u128,
) -> Result<HomSpace> {
    if m < -1 || m >= k {
        return Err(Error::BadLevelPair { m, k });
    }
    // The head itself is never enumerated here; feasibility is governed
    // entirely by the point cap, so the head-order cap is lifted.
    let model = build_truncation_capped(spec.seq(), k, u128::MAX)?;
    let mut sizes = Vec::with_capacity(model.ncoords());
    let mut spaces = Vec::with_capacity(model.ncoords());
    let mut points: u128 = 1;
    for n in 0..model.ncoords() {
        let space = model.group(n).coset_space(spec.subgroup_tag(n));
        let len = space.len() as u32;
        points *= len as u128;
        if points > cap {
            return Err(Error::PointCap { points, cap });
        }
        sizes.push(len);
        spaces.push(space);
    }
    let points = points as usize;
    // Per-coordinate unit orbits, from the cyclic generator alone.
    let mut unit_orbit_ids = Vec::with_capacity(model.ncoords());
    for n in 0..model.ncoords() {
        let group = model.group(n);
        let space = &spaces[n];
        let gen = group.elem(group.field().zero(), group.field().least_generator())?;
        let ids = orbit_ids(space.len(), |p| {
            vec![space.act(group, gen, p as u32) as usize]
        });
        unit_orbit_ids.push(ids);
    }
    // The base point is the identity coset in every coordinate, which
    // indexes as zero.
    let mut hs = HomSpace {
        spec: spec.clone(),
        m,
        k,
        model,
        spaces,
        sizes,
        points,
        base: 0,
        probes: Vec::new(),
        unit_orbit_ids,
    };
    let mut probes = Vec::new();
    for n in 0..hs.model.ncoords() {
        let group = hs.model.group(n);
        let field = group.field();
        if (n as i64) <= m {
            let t = group.elem(field.one(), field.one())?;
            probes.push(hs.make_probe(n, ProbeKind::Translation, t)?);
        }
        let u = group.elem(field.zero(), field.least_generator())?;
        probes.push(hs.make_probe(n, ProbeKind::Unit, u)?);
    }
    hs.probes = probes;
    Ok(hs)
}

impl HomSpace {
    fn make_probe(&self, n: usize, kind: ProbeKind, local: AffElem) -> Result<Probe> {
        let mut elem = self.model.identity();
        elem[n] = local;
        let perm = self.permutation(&elem)?;
        Ok(Probe {
            coordinate: n,
            kind,
            elem,
            perm,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn inner_level(&self) -> i64 {
        self.m
    }

    pub fn outer_level(&self) -> i64 {
        self.k
    }

    pub fn model(&self) -> &TruncationModel {
        &self.model
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn coordinate_sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Mixed-radix decomposition of a point (coordinate 0 varies fastest).
    pub fn decompose(&self, x: usize) -> Vec<u32> {
        let mut rem = x;
        self.sizes
            .iter()
            .map(|&s| {
                let c = (rem % s as usize) as u32;
                rem /= s as usize;
                c
            })
            .collect()
    }

    pub fn compose(&self, coords: &[u32]) -> usize {
        let mut x = 0usize;
        for (n, &c) in coords.iter().enumerate().rev() {
            x = x * self.sizes[n] as usize + c as usize;
        }
        x
    }

    /// Left action of a head element on a point.
    pub fn act(&self, g: &[AffElem], x: usize) -> Result<usize> {
        let mut coords = self.decompose(x);
        for n in 0..coords.len() {
            coords[n] = self.spaces[n].act(self.model.group(n), g[n], coords[n]);
        }
        Ok(self.compose(&coords))
    }

    /// The permutation of the point set induced by a head element.
    pub fn permutation(&self, g: &[AffElem]) -> Result<Vec<u32>> {
        let mut local: Vec<Vec<u32>> = Vec::with_capacity(self.sizes.len());
        for n in 0..self.sizes.len() {
            let group = self.model.group(n);
            local.push(
                (0..self.sizes[n])
                    .map(|p| self.spaces[n].act(group, g[n], p))
                    .collect(),
            );
        }
        let mut perm = vec![0u32; self.points];
        for (x, slot) in perm.iter_mut().enumerate() {
            let mut coords = self.decompose(x);
            for n in 0..coords.len() {
                coords[n] = local[n][coords[n] as usize];
            }
            *slot = self.compose(&coords) as u32;
        }
        Ok(perm)
    }

    /// The uniform point mass `1 / |X|`.
    pub fn point_mass(&self) -> Rat {
        rat_u(self.points as u128).recip()
    }

    /// Exact mass of a subset given by its cardinality.
    pub fn mass_of(&self, count: usize) -> Rat {
        rat_u(count as u128) * self.point_mass()
    }

    /// Marked tags realizing `W_j` as a product subgroup of the head.
    pub fn level_tags(&self, j: i64) -> Vec<SubgroupTag> {
        (0..self.sizes.len())
            .map(|n| {
                if (n as i64) <= j {
                    SubgroupTag::Full
                } else {
                    SubgroupTag::Units
                }
            })
            .collect()
    }

    /// Haar volume of `O_j` (the units tail carries volume one).
    pub fn level_volume(&self, j: i64) -> Rat {
        let mut v = Rat::one();
        let mut n = 0i64;
        while n <= j {
            v *= rat_u(self.spec.seq().value(n as usize) as u128);
            n += 1;
        }
        v
    }

    /// Orbit id of each point under `W_j`: within a coordinate `n <= j`
    /// everything is identified; beyond `j` points are identified exactly
    /// when they share a local units orbit.
    pub fn level_orbit_keys(&self, j: i64) -> Vec<u32> {
        let mut key_of = std::collections::BTreeMap::new();
        let mut keys = Vec::with_capacity(self.points);
        for x in 0..self.points {
            let coords = self.decompose(x);
            let key: Vec<u32> = coords
                .iter()
                .enumerate()
                .filter(|(n, _)| (*n as i64) > j)
                .map(|(n, &c)| self.unit_orbit_ids[n][c as usize])
                .collect();
            let next = key_of.len() as u32;
            let id = *key_of.entry(key).or_insert(next);
            keys.push(id);
        }
        keys
    }

    /// Membership of each point in the `W_j`-orbit of the base point.
    pub fn level_core(&self, j: i64) -> Vec<bool> {
        let keys = self.level_orbit_keys(j);
        let base_key = keys[self.base];
        keys.iter().map(|&k| k == base_key).collect()
    }

    /// Exact mass of the `W_j`-orbit of the base point.
    pub fn level_core_mass(&self, j: i64) -> Rat {
        let mut size: u128 = 1;
        for n in 0..self.sizes.len() {
            if (n as i64) <= j {
                size *= self.sizes[n] as u128;
            } else {
                let base_id = self.unit_orbit_ids[n][0];
                let local = self.unit_orbit_ids[n]
                    .iter()
                    .filter(|&&id| id == base_id)
                    .count() as u128;
                size *= local;
            }
        }
        rat_u(size) / rat_u(self.points as u128)
    }
}

/// Orbit structure and spectral gap of the probe-averaging operator.
#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub orbit_count: usize,
    /// Dimension of the invariant functions (one per orbit).
    pub inv_dim: usize,
    pub orbit_sizes: Vec<usize>,
    pub orbit_of_point: Vec<u32>,
    /// The probes really generate the acting subgroup: their orbit
    /// partition matches the product-structure partition.
    pub generates: bool,
    /// `1 - λ` with `λ` the top averaging eigenvalue on mean-zero
    /// functions; exactly zero when an invariant witness exists.
    pub gap: f64,
    pub lambda_mean_zero: f64,
    pub iterations: u64,
    pub residual: f64,
    /// Exact mean-zero invariant vector when the action is intransitive:
    /// the difference of two normalized orbit indicators.
    pub witness: Option<Vec<Rat>>,
    pub witness_invariant: bool,
    /// Size of the symmetrized probe set driving the operator.
    pub probe_set_size: usize,
}

/// Computes the report with the canonical probe set.
pub fn orbit_spectrum(space: &HomSpace) -> Result<SpectralReport> {
    orbit_spectrum_with(space, space.probes())
}

fn inverse_perm(perm: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p as usize] = i as u32;
    }
    inv
}

/// Computes the report for an explicit probe set.
pub fn orbit_spectrum_with(space: &HomSpace, probes: &[Probe]) -> Result<SpectralReport> {
    let n = space.points();
    let ids = orbit_ids(n, |x| {
        probes.iter().map(|p| p.perm[x] as usize).collect()
    });
    let orbit_count = ids.iter().map(|&i| i + 1).max().unwrap_or(0) as usize;
    let mut orbit_sizes = vec![0usize; orbit_count];
    for &i in &ids {
        orbit_sizes[i as usize] += 1;
    }
    // Generation check: the probe partition must equal the product
    // partition of the full acting subgroup.  Probe orbits always refine
    // it, so the partitions agree exactly when the probe-orbit-to-class
    // relabeling is injective and consistent.
    let level_keys = space.level_orbit_keys(space.inner_level());
    let generates = {
        let mut probe_to_key = std::collections::BTreeMap::new();
        let mut ok = true;
        for x in 0..n {
            match probe_to_key.entry(ids[x]) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(level_keys[x]);
                }
                std::collections::btree_map::Entry::Occupied(e) => {
                    ok &= *e.get() == level_keys[x];
                }
            }
        }
        let mut seen_keys = std::collections::BTreeSet::new();
        for v in probe_to_key.values() {
            ok &= seen_keys.insert(*v);
        }
        ok
    };

    // Symmetrized, deduplicated probe permutations.
    let mut qhat: Vec<Vec<u32>> = Vec::new();
    for p in probes {
        let inv = inverse_perm(&p.perm);
        for cand in [p.perm.clone(), inv] {
            if !qhat.contains(&cand) {
                qhat.push(cand);
            }
        }
    }
    let probe_set_size = qhat.len();

    if orbit_count > 1 {
        // Exact witness: difference of normalized indicators of the first
        // two orbits.
        let m0 = space.mass_of(orbit_sizes[0]);
        let m1 = space.mass_of(orbit_sizes[1]);
        let witness: Vec<Rat> = ids
            .iter()
            .map(|&i| match i {
                0 => m0.recip(),
                1 => -m1.recip(),
                _ => Rat::zero(),
            })
            .collect();
        let witness_invariant = qhat
            .iter()
            .all(|perm| (0..n).all(|x| witness[perm[x] as usize] == witness[x]));
        return Ok(SpectralReport {
            orbit_count,
            inv_dim: orbit_count,
            orbit_sizes,
            orbit_of_point: ids,
            generates,
            gap: 0.0,
            lambda_mean_zero: 1.0,
            iterations: 0,
            residual: 0.0,
            witness: Some(witness),
            witness_invariant,
            probe_set_size,
        });
    }

    // Transitive case: power iteration on the half-shifted averaging
    // operator `(M + I)/2`, whose spectrum sits in [0, 1], with the
    // constant direction deflated by mean removal at every step.
    if n == 1 {
        return Ok(SpectralReport {
            orbit_count,
            inv_dim: 1,
            orbit_sizes,
            orbit_of_point: ids,
            generates,
            gap: 1.0,
            lambda_mean_zero: 0.0,
            iterations: 0,
            residual: 0.0,
            witness: None,
            witness_invariant: false,
            probe_set_size,
        });
    }
    let nf = n as f64;
    let remove_mean = |v: &mut [f64]| {
        let mean: f64 = v.iter().sum::<f64>() / nf;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v: Vec<f64> = (0..n).map(|i| (i + 1) as f64).collect();
    remove_mean(&mut v);
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut lambda = 0.0f64;
    let mut residual = f64::INFINITY;
    let mut iterations = 0u64;
    let mut w = vec![0.0f64; n];
    while iterations < EIGEN_CAP {
        iterations += 1;
        // w = (v + M v) / 2 with (M v)(x) averaging v over probe images.
        for x in 0..n {
            let mut acc = 0.0;
            for perm in &qhat {
                acc += v[perm[x] as usize];
            }
            w[x] = 0.5 * (v[x] + acc / probe_set_size as f64);
        }
        remove_mean(&mut w);
        lambda = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>();
        residual = v
            .iter()
            .zip(w.iter())
            .map(|(a, b)| (b - lambda * a) * (b - lambda * a))
            .sum::<f64>()
            .sqrt();
        let nw = norm(&w);
        if nw == 0.0 {
            // The operator annihilates the vector; the gap is total.
            lambda = 0.0;
            residual = 0.0;
            break;
        }
        for x in 0..n {
            v[x] = w[x] / nw;
        }
        if residual <= EIGEN_TOL {
            break;
        }
    }
    let lambda_m = 2.0 * lambda - 1.0;
    let gap = (1.0 - lambda_m).max(0.0);
    Ok(SpectralReport {
        orbit_count,
        inv_dim: 1,
        orbit_sizes,
        orbit_of_point: ids,
        generates,
        gap,
        lambda_mean_zero: lambda_m,
        iterations,
        residual,
        witness: None,
        witness_invariant: false,
        probe_set_size,
    })
}

/// One probe's translation defect of the almost-invariant vector.
#[derive(Clone, Debug)]
pub struct FolnerDefectRow {
    pub probe: String,
    pub coordinate: usize,
    pub in_folner_group: bool,
    /// `‖f − g·f‖₂` in the invariant-measure norm.
    pub defect: f64,
    /// Exact transfer bound `‖ψ − g·ψ‖₁ / ‖ψ‖₁`; the defect squared
    /// never exceeds it.
    pub transfer_bound: Rat,
    pub exactly_zero: bool,
}

/// An almost-invariant unit vector supported away from the compact core.
#[derive(Clone, Debug)]
pub struct FolnerWitness {
    pub j: i64,
    /// Haar volume of the window `O_j` driving the convolution.
    pub window_volume: Rat,
    pub core_size: usize,
    pub core_mass: Rat,
    pub target: Vec<usize>,
    pub target_mass: Rat,
    /// Exact convolution values `ψ(x) = vol(O_j) · |A ∩ orbit(x)| /
    /// |orbit(x)|` over `W_j`-orbits.
    pub psi: Vec<Rat>,
    pub ell1: Rat,
    /// `f = sqrt(ψ / ‖ψ‖₁)`, an L²(m) unit vector.
    pub f: Vec<f64>,
    pub norm2: f64,
    pub defects: Vec<FolnerDefectRow>,
    /// `⟨1_{X∖core}, f⟩` — the vector's mean mass away from the core.
    pub off_core_inner: f64,
    /// Exact bound `m(X∖core)`; the inner product is at most its root.
    pub off_core_mass: Rat,
    pub support_off_core: bool,
}

/// Builds the vector at window level `j <= m`; the default target is the
/// whole complement of the `W_j`-core, which is invariant and makes every
/// quantity exact.
pub fn folner_vector(
    space: &HomSpace,
    j: i64,
    target: Option<&[usize]>,
) -> Result<FolnerWitness> {
    if j < -1 || j > space.inner_level() {
        return Err(Error::LevelRange {
            k: j,
            h: space.inner_level(),
        });
    }
    let n = space.points();
    let core = space.level_core(j);
    let core_size = core.iter().filter(|&&c| c).count();
    if core_size == n {
        return Err(Error::DegenerateTarget);
    }
    let target: Vec<usize> = match target {
        Some(t) => {
            if t.is_empty() || t.iter().any(|&x| x >= n || core[x]) {
                return Err(Error::DegenerateTarget);
            }
            let mut t = t.to_vec();
            t.sort_unstable();
            t.dedup();
            t
        }
        None => (0..n).filter(|&x| !core[x]).collect(),
    };
    let in_target: Vec<bool> = {
        let mut v = vec![false; n];
        for &x in &target {
            v[x] = true;
        }
        v
    };
    // ψ from the orbit formula over W_j-orbits.
    let keys = space.level_orbit_keys(j);
    let classes = keys.iter().map(|&k| k + 1).max().unwrap_or(0) as usize;
    let mut orbit_size = vec![0u64; classes];
    let mut orbit_hit = vec![0u64; classes];
    for x in 0..n {
        orbit_size[keys[x] as usize] += 1;
        if in_target[x] {
            orbit_hit[keys[x] as usize] += 1;
        }
    }
    let window_volume = space.level_volume(j);
    let psi: Vec<Rat> = (0..n)
        .map(|x| {
            let c = keys[x] as usize;
            &window_volume * rat_u(orbit_hit[c] as u128) / rat_u(orbit_size[c] as u128)
        })
        .collect();
    let point_mass = space.point_mass();
    let ell1: Rat = psi.iter().map(|p| p * &point_mass).sum();
    if ell1.is_zero() {
        return Err(Error::DegenerateTarget);
    }
    let f: Vec<f64> = psi
        .iter()
        .map(|p| to_f64(&(p / &ell1)).sqrt())
        .collect();
    let norm2 = (f.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    let support_off_core = (0..n).all(|x| !core[x] || psi[x].is_zero());

    let mut defects = Vec::new();
    for probe in space.probes() {
        let inv = inverse_perm(&probe.perm);
        let exactly_zero = (0..n).all(|x| psi[inv[x] as usize] == psi[x]);
        let defect = if exactly_zero {
            0.0
        } else {
            ((0..n)
                .map(|x| {
                    let d = f[x] - f[inv[x] as usize];
                    d * d
                })
                .sum::<f64>()
                / n as f64)
                .sqrt()
        };
        let moved_l1: Rat = (0..n)
            .map(|x| {
                let d = &psi[x] - &psi[inv[x] as usize];
                if d.is_negative() {
                    -d
                } else {
                    d
                }
            })
            .sum::<Rat>()
            * &point_mass;
        let transfer_bound = moved_l1 / &ell1;
        defects.push(FolnerDefectRow {
            probe: probe.label(),
            coordinate: probe.coordinate,
            in_folner_group: probe.in_level(j),
            defect,
            transfer_bound,
            exactly_zero,
        });
    }
    let off_core_inner = (0..n)
        .filter(|&x| !core[x])
        .map(|x| f[x])
        .sum::<f64>()
        / n as f64;
    let core_mass = space.mass_of(core_size);
    let off_core_mass = Rat::one() - &core_mass;
    let target_mass = space.mass_of(target.len());
    Ok(FolnerWitness {
        j,
        window_volume,
        core_size,
        core_mass,
        target,
        target_mass,
        psi,
        ell1,
        f,
        norm2,
        defects,
        off_core_inner,
        off_core_mass,
        support_off_core,
    })
}

/// How the balanced-set floor was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateLevel {
    /// Every balanced subset was enumerated.
    Exhaustive,
    /// Seeded local search over balanced subsets.
    Heuristic,
}

/// The invariance floor for balanced subsets under the probe subgroup.
#[derive(Clone, Debug)]
pub struct ErgodicityBound {
    /// Window level with `m(W_j · base) >= 9/10`.
    pub j: i64,
    pub core_mass: Rat,
    /// Haar volume of the probe subgroup `K = W_j`.
    pub mu_k: Rat,
    /// Modular minimum of the model (unimodular, hence one).
    pub delta: Rat,
    /// `(9/25) · δ / μ(K)`.
    pub threshold: Rat,
    pub balanced_size: usize,
    /// The point count is odd, so exact half-mass sets do not exist and
    /// the nearest balanced cardinality is used instead.
    pub odd_flagged: bool,
    pub certificate: CertificateLevel,
    pub candidates: u64,
    pub full_checks: u64,
    /// Least certified defect lower bound over the candidates (exact for
    /// any candidate that fell below the threshold).
    pub min_defect: Rat,
    pub satisfied: bool,
    /// A candidate attaining the reported minimum.
    pub witness_set: Vec<usize>,
}

fn perm_of_head_elem(space: &HomSpace, g: &[AffElem]) -> Result<Vec<u32>> {
    space.permutation(g)
}

/// Symmetric-difference cardinality `|gB △ B|` for a mask over points.
fn moved_count(perm: &[u32], mask: &[bool]) -> usize {
    let mut moved = 0usize;
    for (x, &inb) in mask.iter().enumerate() {
        if inb && !mask[perm[x] as usize] {
            moved += 1;
        }
    }
    2 * moved
}

/// Certifies that every balanced subset is visibly moved by the level
/// subgroup `K = W_j`, where `j` is the least level whose base orbit
/// carries at least 9/10 of the mass.
pub fn strong_ergodicity_bound(space: &HomSpace, seed: u64) -> Result<ErgodicityBound> {
    let n = space.points();
    let nine_tenths = rat(9, 10);
    let mut j = -1i64;
    while space.level_core_mass(j) < nine_tenths {
        j += 1;
        if j > space.outer_level() {
            return Err(Error::Invariant(
                "full head failed to dominate its own quotient".into(),
            ));
        }
    }
    let core_mass = space.level_core_mass(j);
    let mu_k = space.level_volume(j);
    let delta = Rat::one();
    let threshold = rat(9, 25) * &delta / &mu_k;
    let balanced_size = n / 2;
    let odd_flagged = n % 2 == 1;
    let points_rat = rat_u(n as u128);

    // The generator probes of K, cheap first line of the defect check.
    let mut subset_perms: Vec<Vec<u32>> = space
        .probes()
        .iter()
        .filter(|p| p.in_level(j))
        .map(|p| p.perm.clone())
        .collect();

    let full_group_order: u128 = {
        let tags = space.level_tags(j);
        (0..space.coordinate_sizes().len())
            .map(|c| space.model().group(c).subgroup_order(tags[c]) as u128)
            .product()
    };
    // The full subgroup permutation table is only materialized when a
    // candidate's cheap bound fails the threshold.
    let full_eligible = full_group_order <= 65_536;
    let full_cache: std::cell::RefCell<Option<Vec<Vec<u32>>>> =
        std::cell::RefCell::new(None);

    // Defect of one candidate: max over the full group when available
    // (early exit once the threshold is cleared), otherwise max over the
    // probe subset (a lower bound), refining with sampled group elements.
    let threshold_count = {
        // least integer c with c / n >= threshold
        let scaled = &threshold * &points_rat;
        let num = scaled.numer().clone();
        let den = scaled.denom().clone();
        let q = &num / &den;
        let r = &num % &den;
        let mut c: u128 = q.try_into().unwrap_or(u128::MAX);
        if !r.is_zero() {
            c += 1;
        }
        c as usize
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if !full_eligible {
        // Extend the probe subset with sampled group elements.
        let tags = space.level_tags(j);
        for _ in 0..128 {
            let mut g = space.model().identity();
            for (c, slot) in g.iter_mut().enumerate() {
                let elems = space.model().group(c).subgroup_elements(tags[c]);
                *slot = elems[rng.gen_range(0..elems.len())];
            }
            subset_perms.push(perm_of_head_elem(space, &g)?);
        }
    }

    let full_defect = |mask: &[bool]| -> usize {
        let mut cache = full_cache.borrow_mut();
        if cache.is_none() {
            let elems = enumerate_marked(space.model(), &space.level_tags(j))
                .expect("level subgroup within enumeration budget");
            let perms: Vec<Vec<u32>> = elems
                .iter()
                .map(|e| {
                    perm_of_head_elem(space, e).expect("level subgroup element acts")
                })
                .collect();
            *cache = Some(perms);
        }
        cache
            .as_ref()
            .expect("cache filled")
            .iter()
            .map(|perm| moved_count(perm, mask))
            .max()
            .unwrap_or(0)
    };
    let subset_defect = |mask: &[bool]| -> usize {
        subset_perms
            .iter()
            .map(|p| moved_count(p, mask))
            .max()
            .unwrap_or(0)
    };

    let mut candidates: u64 = 0;
    let mut full_checks: u64 = 0;
    let mut min_count: Option<usize> = None;
    let mut witness_mask: Vec<bool> = Vec::new();

    let consider =
        |mask: &[bool], min_count: &mut Option<usize>, full_checks: &mut u64, witness: &mut Vec<bool>| {
            // The probe-subset maximum certifies a lower bound on the
            // candidate's true defect; fall back to the full subgroup
            // only when the cheap bound fails the threshold.
            let quick = subset_defect(mask);
            let certified = if quick >= threshold_count || !full_eligible {
                quick
            } else {
                *full_checks += 1;
                full_defect(mask)
            };
            if min_count.map_or(true, |m| certified < m) {
                *min_count = Some(certified);
                *witness = mask.to_vec();
            }
        };

    let certificate;
    if n <= 24 && full_eligible {
        certificate = CertificateLevel::Exhaustive;
        // Gosper's hack over all balanced bitmasks.
        let mut mask_bits: u64 = (1u64 << balanced_size) - 1;
        let limit: u64 = 1u64 << n;
        let mut mask = vec![false; n];
        while mask_bits < limit {
            for (x, slot) in mask.iter_mut().enumerate() {
                *slot = mask_bits & (1u64 << x) != 0;
            }
            candidates += 1;
            consider(&mask, &mut min_count, &mut full_checks, &mut witness_mask);
            // Next combination with the same popcount.
            let c = mask_bits & mask_bits.wrapping_neg();
            let r = mask_bits + c;
            if r >= limit || c == 0 {
                break;
            }
            mask_bits = (((r ^ mask_bits) >> 2) / c) | r;
        }
    } else {
        certificate = CertificateLevel::Heuristic;
        // Seeded annealing over balanced masks, minimizing the subset
        // defect, with structured starts: a coordinate block and random
        // balanced sets.
        let mut starts: Vec<Vec<bool>> = Vec::new();
        let mut block = vec![false; n];
        for slot in block.iter_mut().take(balanced_size) {
            *slot = true;
        }
        starts.push(block);
        for _ in 0..2 {
            let mut mask = vec![false; n];
            let mut placed = 0usize;
            while placed < balanced_size {
                let x = rng.gen_range(0..n);
                if !mask[x] {
                    mask[x] = true;
                    placed += 1;
                }
            }
            starts.push(mask);
        }
        let mut finalists: Vec<Vec<bool>> = Vec::new();
        for start in starts {
            let mut mask = start;
            let mut energy = subset_defect(&mask);
            let mut best_mask = mask.clone();
            let mut best_energy = energy;
            let mut temp = n as f64 / 10.0;
            for _ in 0..4000 {
                let inside: Vec<usize> = (0..n).filter(|&x| mask[x]).collect();
                let outside: Vec<usize> = (0..n).filter(|&x| !mask[x]).collect();
                let a = inside[rng.gen_range(0..inside.len())];
                let b = outside[rng.gen_range(0..outside.len())];
                mask[a] = false;
                mask[b] = true;
                let e2 = subset_defect(&mask);
                let accept = e2 <= energy
                    || rng.gen::<f64>() < (-((e2 - energy) as f64) / temp.max(1e-9)).exp();
                if accept {
                    energy = e2;
                    if energy < best_energy {
                        best_energy = energy;
                        best_mask = mask.clone();
                    }
                } else {
                    mask[a] = true;
                    mask[b] = false;
                }
                temp *= 0.9985;
            }
            candidates += 4000;
            finalists.push(best_mask);
        }
        for mask in finalists {
            consider(&mask, &mut min_count, &mut full_checks, &mut witness_mask);
        }
    }

    let min_count = min_count.ok_or_else(|| Error::Invariant("no candidates".into()))?;
    let min_defect = rat_u(min_count as u128) / &points_rat;
    let satisfied = min_defect >= threshold;
    let witness_set: Vec<usize> = witness_mask
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(x, _)| x)
        .collect();
    Ok(ErgodicityBound {
        j,
        core_mass,
        mu_k,
        delta,
        threshold,
        balanced_size,
        odd_flagged,
        certificate,
        candidates,
        full_checks,
        min_defect,
        satisfied,
        witness_set,
    })
}

/// One row of the mass-escape table.
#[derive(Clone, Debug)]
pub struct EscapeRow {
    pub k: i64,
    pub points: usize,
    pub orbit_count: usize,
    /// Mass of the level-`m` core, from the per-coordinate orbit sizes.
    pub core_mass: Rat,
    /// The same quantity from the covolume route `C_m / C_k`.
    pub gamma_ratio: Rat,
    pub routes_agree: bool,
}

/// Tracks the mass of the fixed level-`m` core as the outer level grows;
/// for a twisted tail it shrinks to zero, for a translational one it
/// stays at one.
pub fn escape_of_mass_trace(
    spec: &LatticeSpec,
    m: i64,
    ks: &[i64],
    cap: u128,
) -> Result<Vec<EscapeRow>> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let space = build_homspace_capped(spec, m, k, cap)?;
        let report = orbit_spectrum(&space)?;
        let core_mass = space.level_core_mass(m);
        let cm = covolume(spec, m)?.partial;
        let ck = covolume(spec, k)?.partial;
        let gamma_ratio = cm / ck;
        let routes_agree = core_mass == gamma_ratio;
        rows.push(EscapeRow {
            k,
            points: space.points(),
            orbit_count: report.orbit_count,
            core_mass,
            gamma_ratio,
            routes_agree,
        });
    }
    Ok(rows)
}
