//! Self-contained descriptions of each task: what it computes, and what
//! its certificates mean.

use crate::config::Task;
use crate::CliError;
use std::str::FromStr;

/// Returns the explanatory text for a task name.
pub fn explain(task: &str) -> Result<String, CliError> {
    let task = Task::from_str(task).map_err(CliError::config)?;
    Ok(text(task).to_string())
}

fn text(task: Task) -> &'static str {
    match task {
        Task::Classify => "\
classify — lattice type of a marked product subgroup.

The ambient group is the restricted product of the affine groups
F_q ⋊ F_q^* over the configured prime powers, glued along their unit
subgroups.  A lattice spec marks each coordinate with either the
translation subgroup T = {(t, 1)} or the twisted diagonal
S = {(x - 1, x)}, plus a tail mode for the unlisted coordinates.
The discrete product of the marked subgroups has finite covolume; it is
cocompact exactly when only finitely many coordinates are twisted
(tail mode allout).  Certificate: exact — a finite rational upper bound
for the covolume is computed, and uniformity is decided by the tail
mode alone.",
        Task::Covolume => "\
covolume — exact covolume partial products with a rational tail
enclosure.

Each twisted coordinate contributes the factor q/(q - 1) to the
covolume; translational coordinates contribute 1.  The task reports the
exact partial products C_k and an interval [C_k, C_k · tail_upper]
whose upper end majorizes every remaining factor using only the tail
rule's growth floor.  A second route recomputes C_k as the volume of an
explicit fundamental domain (unit cosets, with the twisted coordinate's
uncovered coset patched by its least element) and checks the tiling
coordinate by coordinate.  Certificate: exact; the enclosure width
shrinks as k grows.",
        Task::Gamma => "\
gamma — the stabilization trace for cocompactness.

gamma_k is the Haar volume of the level-k open subgroup divided by the
order of the lattice's level-k part; it equals C_k exactly and is
non-decreasing.  Writing alpha_k and beta_k for the lattice-side and
open-side index jumps, the identity alpha_k gamma_{k+1} = beta_k gamma_k
holds at every level, every strict increment clears the floor
gamma_0 / sup beta, and the trace goes flat exactly when all remaining
coordinates are translational.  A trace that stabilizes strictly before
the horizon certifies a cocompact quotient.  Certificate: exact
rational identities at every listed level.",
        Task::Commensurate => "\
commensurate — finite-index compatibility of two lattice specs.

Two marked lattices share a finite-index common subgroup exactly when
their marks differ in only finitely many coordinates, which over a
common sequence reduces to: their tail modes agree.  The task reports
the coordinates where the listed marks differ and the exact index
traces [Γ : Γ ∩ Γ'] accumulated level by level on both sides (one
factor q or q - 1 per differing coordinate).  Certificate: exact — the
verdict is bounded_within_horizon when both traces stop growing
strictly before the end of the listed data.",
        Task::Serre => "\
serre — double-coset covolume formula against a closed-form oracle.

For the finite head G at the chosen level, a compact open K (the unit
product) and a lattice head H, the quotient measure of G/H decomposes
over the double cosets K t H: each contributes 1 / vol_H(H_t) with
H_t = H ∩ t^{-1} K t and volumes normalized so vol_H(K ∩ H) = 1.  The
sweep enumerates the double cosets explicitly, checks that they
partition G, and compares the sum with the closed form
|G| |K ∩ H| / (|H| |K|).  Certificate: exact equality of rationals.",
        Task::Spectrum => "\
spectrum — orbit/gap dichotomy of the probe-averaging operator.

The space X is the level-k head quotient by the lattice head, carrying
the uniform invariant probability measure; the acting subgroup W_m is
full in coordinates up to m and units beyond.  A symmetrized probe set
(a unit translation and a multiplicative generator per full coordinate,
a generator per units coordinate) drives the averaging operator M.
If the action is intransitive, the number of orbits is 2 raised to the
number of twisted coordinates in (m, k], and an exact rational mean-zero
invariant vector (difference of two normalized orbit indicators) is
verified generator by generator: the gap is exactly zero.  If it is
transitive, deflated power iteration on (M + I)/2 reports the top
mean-zero eigenvalue and the gap 1 - lambda.  Escape-of-mass
tables report the level-m core mass C_m / C_k by two independent exact
routes.  Certificate: exact for orbits and witnesses; the eigenvalue is
a float converged to residual 1e-12.",
        Task::Folner => "\
folner — almost-invariant unit vectors supported away from the core.

With window W_j (j at most the probe level m), the vector is built by
convolving the window against a target set in the complement of the
window's base orbit: psi(x) = vol(O_j) |A ∩ orbit(x)| / |orbit(x)|,
exactly rational, and f = sqrt(psi / ||psi||_1) is an L2 unit vector.
Probes inside the window leave f exactly fixed; probes outside move it
by at most the L1-to-L2 transfer bound sqrt(||psi - g psi||_1 /
||psi||_1), with equality for the default invariant target.  The mass
of f near the core is bounded by the square root of the complement
mass.  Certificate: exact rationals for psi and all bounds; defects are
floats checked against the exact bounds.",
        Task::Ergodicity => "\
ergodicity — a quantitative invariance floor for balanced sets.

Let j be the least level whose window orbit carries at least 9/10 of
the mass, K = W_j with exact Haar volume mu(K), and threshold
(9/25)/mu(K).  Every subset of half the points (nearest half when the
point count is odd — flagged) must be moved by some element of K by at
least the threshold in symmetric-difference mass.  Point counts up to
24 are certified by exhausting all balanced subsets (cheap generator
probes first, the full subgroup on demand); larger spaces use a seeded
annealing search for near-invariant sets and report the minimum defect
found, labeled heuristic.  Certificate: exhaustive = proven for every
balanced set; heuristic = no violator found by the search.",
        Task::Witnesses => "\
witnesses — approximated unipotents and the pseudo-unipotent
refutation.

In each twisted coordinate the element gamma = (x - 1, x), with x the
least multiplicative generator, is conjugated by the translation (1, 1)
onto the unit (0, x): the lattice elements are conjugate into any
neighborhood of the tail units, which obstructs uniformity.  The
refutation side enumerates the full conjugacy class of (x - 1, x) —
all q elements (t, x) with the multiplier locked — and confirms the
identity never appears, so no single element is genuinely unipotent.
Certificate: exhaustive enumeration in each reported coordinate.",
    }
}

/// All task names with one-line summaries, for `--help`-style listings.
pub fn task_list() -> String {
    let mut out = String::new();
    for t in Task::ALL {
        out.push_str(t.name());
        out.push('\n');
    }
    out
}
