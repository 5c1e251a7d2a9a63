//! The finite affine group `G = F_q ⋊ F_q^*` of a single coordinate.
//!
//! An element is a pair `(t, u)` with `t ∈ F_q` and `u ∈ F_q^*`, composing by
//! `(t1, u1)(t2, u2) = (t1 + u1 t2, u1 u2)`; it acts on the affine line as
//! `x ↦ u x + t`.  Three marked subgroups matter throughout the crate:
//!
//! * translations `T = {(t, 1)}`, order `q`;
//! * units `U = {(0, u)}`, order `q - 1`;
//! * the twisted diagonal `S = {(x - 1, x) : x ∈ F_q^*}`, order `q - 1`.
//!
//! Elements carry a canonical index `t_index * (q - 1) + (u_index - 1)` so
//! coset representatives and search orders are deterministic.

use crate::field::{FieldElem, FiniteField};
use crate::{Error, Result};

/// An element `(t, u)` of the affine group; `u` is always nonzero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct AffElem {
    t: FieldElem,
    u: FieldElem,
}

impl AffElem {
    pub fn translation_part(self) -> FieldElem {
        self.t
    }

    pub fn multiplier(self) -> FieldElem {
        self.u
    }

    pub fn is_identity(self) -> bool {
        self.t.is_zero() && self.u.is_one()
    }
}

/// The subgroups (and degenerate companions) used to cut coset spaces and
/// to assemble product subgroups of truncation heads.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum SubgroupTag {
    /// `{(0, 1)}`.
    Trivial,
    /// `T = {(t, 1)}`.
    Translations,
    /// `U = {(0, u)}`.
    Units,
    /// `S = {(x - 1, x)}`.
    Twisted,
    /// The whole group.
    Full,
}

impl SubgroupTag {
    pub fn label(self) -> &'static str {
        match self {
            SubgroupTag::Trivial => "1",
            SubgroupTag::Translations => "T",
            SubgroupTag::Units => "U",
            SubgroupTag::Twisted => "S",
            SubgroupTag::Full => "G",
        }
    }
}

/// The group `F_q ⋊ F_q^*` over a fixed field.
#[derive(Clone, Debug)]
pub struct AffineGroup {
    field: FiniteField,
}

impl AffineGroup {
    pub fn new(field: FiniteField) -> Self {
        AffineGroup { field }
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.order()
    }

    /// `|G| = q (q - 1)`.
    pub fn order(&self) -> u64 {
        let q = self.q() as u64;
        q * (q - 1)
    }

    pub fn identity(&self) -> AffElem {
        AffElem {
            t: self.field.zero(),
            u: self.field.one(),
        }
    }

    /// Builds `(t, u)`; the multiplier must be nonzero and both parts must
    /// come from this group's field.
    pub fn elem(&self, t: FieldElem, u: FieldElem) -> Result<AffElem> {
        if t.field_order() != self.q() || u.field_order() != self.q() {
            return Err(Error::FieldMismatch(t.field_order(), self.q()));
        }
        if u.is_zero() {
            return Err(Error::ZeroMultiplier);
        }
        Ok(AffElem { t, u })
    }

    /// Convenience constructor from canonical field indices.
    pub fn elem_from_parts(&self, t_idx: u64, u_idx: u64) -> Result<AffElem> {
        let t = self.field.elem_from_index(t_idx)?;
        let u = self.field.elem_from_index(u_idx)?;
        self.elem(t, u)
    }

    /// Canonical element index in `[0, q(q-1))`.
    pub fn index(&self, g: AffElem) -> u64 {
        let q = self.q() as u64;
        g.t.index() as u64 * (q - 1) + (g.u.index() as u64 - 1)
    }

    pub fn from_index(&self, idx: u64) -> Result<AffElem> {
        if idx >= self.order() {
            return Err(Error::IndexRange {
                idx,
                q: self.q(),
            });
        }
        let q = self.q() as u64;
        let t = self.field.elem_from_index(idx / (q - 1))?;
        let u = self.field.elem_from_index(idx % (q - 1) + 1)?;
        Ok(AffElem { t, u })
    }

    fn check(&self, g: AffElem) -> Result<()> {
        if g.t.field_order() != self.q() {
            return Err(Error::FieldMismatch(g.t.field_order(), self.q()));
        }
        Ok(())
    }

    /// `(t1, u1)(t2, u2) = (t1 + u1 t2, u1 u2)`.
    pub fn mul(&self, a: AffElem, b: AffElem) -> Result<AffElem> {
        self.check(a)?;
        self.check(b)?;
        let t = self.field.add(a.t, self.field.mul(a.u, b.t)?)?;
        let u = self.field.mul(a.u, b.u)?;
        Ok(AffElem { t, u })
    }

    /// `(t, u)^{-1} = (-u^{-1} t, u^{-1})`.
    pub fn inv(&self, a: AffElem) -> Result<AffElem> {
        self.check(a)?;
        let ui = self.field.inv(a.u)?;
        let t = self.field.neg(self.field.mul(ui, a.t)?)?;
        Ok(AffElem { t, u: ui })
    }

    /// `g h g^{-1}`.
    pub fn conjugate(&self, g: AffElem, h: AffElem) -> Result<AffElem> {
        let gh = self.mul(g, h)?;
        self.mul(gh, self.inv(g)?)
    }

    /// Order of the chosen subgroup.
    pub fn subgroup_order(&self, tag: SubgroupTag) -> u64 {
        let q = self.q() as u64;
        match tag {
            SubgroupTag::Trivial => 1,
            SubgroupTag::Translations => q,
            SubgroupTag::Units | SubgroupTag::Twisted => q - 1,
            SubgroupTag::Full => q * (q - 1),
        }
    }

    /// Elements of the chosen subgroup, ascending by canonical index.
    pub fn subgroup_elements(&self, tag: SubgroupTag) -> Vec<AffElem> {
        let f = &self.field;
        match tag {
            SubgroupTag::Trivial => vec![self.identity()],
            SubgroupTag::Translations => f
                .elements()
                .map(|t| AffElem { t, u: f.one() })
                .collect(),
            SubgroupTag::Units => f
                .units()
                .map(|u| AffElem { t: f.zero(), u })
                .collect(),
            SubgroupTag::Twisted => f
                .units()
                .map(|x| AffElem {
                    t: f.sub(x, f.one()).expect("same field"),
                    u: x,
                })
                .collect(),
            SubgroupTag::Full => (0..self.order())
                .map(|i| self.from_index(i).expect("in range"))
                .collect(),
        }
    }

    /// Constant-time membership test for a marked subgroup.
    pub fn subgroup_contains(&self, tag: SubgroupTag, g: AffElem) -> bool {
        match tag {
            SubgroupTag::Trivial => g.is_identity(),
            SubgroupTag::Translations => g.u.is_one(),
            SubgroupTag::Units => g.t.is_zero(),
            SubgroupTag::Twisted => {
                let xm1 = self.field.sub(g.u, self.field.one()).expect("same field");
                g.t == xm1
            }
            SubgroupTag::Full => true,
        }
    }

    /// Left coset space `G/H` with deterministic labels.
    pub fn coset_space(&self, tag: SubgroupTag) -> CosetSpace {
        let n = self.order() as usize;
        let mut point_of = vec![u32::MAX; n];
        let mut reps = Vec::new();
        let subgroup = self.subgroup_elements(tag);
        for idx in 0..n as u64 {
            if point_of[idx as usize] != u32::MAX {
                continue;
            }
            let g = self.from_index(idx).expect("in range");
            let pt = reps.len() as u32;
            reps.push(idx);
            for &h in &subgroup {
                let gh = self.mul(g, h).expect("same field");
                let j = self.index(gh) as usize;
                debug_assert!(point_of[j] == u32::MAX || point_of[j] == pt);
                point_of[j] = pt;
            }
        }
        CosetSpace {
            tag,
            reps,
            point_of,
        }
    }
}

/// The left coset space `G/H` of a marked subgroup, with points labeled by
/// the least element of each coset and the full `G`-action available.
#[derive(Clone, Debug)]
pub struct CosetSpace {
    tag: SubgroupTag,
    /// `reps[p]` = canonical index of the least element of coset `p`.
    reps: Vec<u64>,
    /// `point_of[i]` = point id of the coset containing element `i`.
    point_of: Vec<u32>,
}

impl CosetSpace {
    pub fn tag(&self) -> SubgroupTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Least element index of the coset behind point `p`.
    pub fn rep(&self, p: u32) -> u64 {
        self.reps[p as usize]
    }

    /// Point id of the coset containing a group element.
    pub fn point_of_elem(&self, group: &AffineGroup, g: AffElem) -> u32 {
        self.point_of[group.index(g) as usize]
    }

    /// The coset of the identity.
    pub fn base_point(&self, group: &AffineGroup) -> u32 {
        self.point_of_elem(group, group.identity())
    }

    /// Left action `g · (x H) = (g x) H`.
    pub fn act(&self, group: &AffineGroup, g: AffElem, p: u32) -> u32 {
        let rep = group.from_index(self.rep(p)).expect("in range");
        let moved = group.mul(g, rep).expect("same field");
        self.point_of[group.index(moved) as usize]
    }

    /// Full action table, `table[g_index][point] = g · point`.
    pub fn action_table(&self, group: &AffineGroup) -> Vec<Vec<u32>> {
        (0..group.order())
            .map(|gi| {
                let g = group.from_index(gi).expect("in range");
                self.permutation(group, g)
            })
            .collect()
    }

    /// Point permutation induced by a single element.
    pub fn permutation(&self, group: &AffineGroup, g: AffElem) -> Vec<u32> {
        (0..self.len() as u32).map(|p| self.act(group, g, p)).collect()
    }

    /// Stabilizer of a point, as element indices.
    pub fn stabilizer(&self, group: &AffineGroup, p: u32) -> Vec<u64> {
        (0..group.order())
            .filter(|&gi| {
                let g = group.from_index(gi).expect("in range");
                self.act(group, g, p) == p
            })
            .collect()
    }

    /// Orbit partition of the space under a set of acting elements.
    /// Returns the orbit id per point; ids are ordered by least member.
    pub fn orbits(&self, group: &AffineGroup, movers: &[AffElem]) -> Vec<u32> {
        orbit_ids(self.len(), |p| {
            movers
                .iter()
                .map(|&g| self.act(group, g, p as u32) as usize)
                .collect()
        })
    }
}

/// Generic orbit labeling: `neighbors(p)` lists images of `p` under the
/// acting set; orbit ids are assigned in order of least member.
pub fn orbit_ids(n: usize, neighbors: impl Fn(usize) -> Vec<usize>) -> Vec<u32> {
    let mut id = vec![u32::MAX; n];
    let mut next = 0u32;
    for start in 0..n {
        if id[start] != u32::MAX {
            continue;
        }
        let this = next;
        next += 1;
        let mut stack = vec![start];
        id[start] = this;
        while let Some(p) = stack.pop() {
            for npt in neighbors(p) {
                if id[npt] == u32::MAX {
                    id[npt] = this;
                    stack.push(npt);
                }
            }
        }
    }
    id
}
