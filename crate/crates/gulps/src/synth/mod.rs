//! The synthesis pipeline: cost-ordered sentence enumeration, trajectory
//! feasibility via the monodromy LP, per-segment least-squares stitching,
//! exterior recovery, and full-circuit assembly with verification.

mod lm;
mod real;
mod segment;

pub use lm::{lm_minimize, LmOptions, LmResult, ResidualFn};
pub use real::Dual;
pub use segment::{
    solve_segment, MonolithicResidual, SegmentOptions, SegmentResidual, SegmentSolution,
};

use crate::invariants::{
    canonical_coords, coords_to_logspec, kak, rho_reflect, CanonicalCoord, InvariantError, LogSpec,
};
use crate::lp::{feasible_point, LpError, LpProblem, LpStatus};
use crate::matcore::{
    can_gate, cx_gate, cz_gate, iswap_gate, kron, phase_distance, rv_gate, swap_gate, Mat2,
    Mat4, MatError, Unitary4,
};
use crate::monodromy::{chamber_rows, instantiate_segment, Slot};
use crate::tol;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid instruction set: {0}")]
    InvalidIsa(String),
    #[error("unknown gate name: {0}")]
    UnknownGate(String),
    #[error("segment synthesis did not converge (best residual {best_residual:.3e}); retry with a larger budget")]
    SegmentNoConvergence { best_residual: f64 },
    #[error("assembled circuit misses the target by {distance:.3e}")]
    AssemblyMismatch { distance: f64 },
    #[error("search budget exhausted after {sentences_tried} sentences without a feasible trajectory")]
    BudgetExhausted { sentences_tried: usize },
}

// ---------------------------------------------------------------------------
// Instruction sets
// ---------------------------------------------------------------------------

/// One basis gate: an id, a relative duration cost, a fixed matrix
/// representative and its cached invariants.
#[derive(Debug, Clone)]
pub struct GateDef {
    pub id: String,
    pub coords: CanonicalCoord,
    pub cost: f64,
    pub matrix: Unitary4,
    pub spec: LogSpec,
}

impl GateDef {
    pub fn new(id: impl Into<String>, cost: f64, matrix: Unitary4) -> Result<Self, SynthError> {
        let id = id.into();
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(SynthError::InvalidIsa(format!("gate {id} has non-positive cost")));
        }
        let coords = canonical_coords(&matrix)?;
        let spec = coords_to_logspec(&coords);
        Ok(GateDef { id, coords, cost, matrix, spec })
    }

    /// Gate defined by chamber coordinates; the representative is the
    /// canonical gate itself.
    pub fn from_coords(
        id: impl Into<String>,
        cost: f64,
        coords: CanonicalCoord,
    ) -> Result<Self, SynthError> {
        GateDef::new(id, cost, can_gate(coords.as_array()))
    }
}

/// A discrete two-qubit instruction set.
#[derive(Debug, Clone)]
pub struct Isa {
    gates: Vec<GateDef>,
    /// gate indices sorted by id; sentences store ranks into this order
    rank_order: Vec<usize>,
}

impl Isa {
    pub fn new(gates: Vec<GateDef>) -> Result<Self, SynthError> {
        if gates.is_empty() {
            return Err(SynthError::InvalidIsa("instruction set is empty".into()));
        }
        let mut ids: Vec<&str> = gates.iter().map(|g| g.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(SynthError::InvalidIsa("duplicate gate ids".into()));
        }
        let mut rank_order: Vec<usize> = (0..gates.len()).collect();
        rank_order.sort_by(|&a, &b| gates[a].id.cmp(&gates[b].id));
        Ok(Isa { gates, rank_order })
    }

    pub fn gates(&self) -> &[GateDef] {
        &self.gates
    }

    pub fn gate(&self, idx: usize) -> &GateDef {
        &self.gates[idx]
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.gates.iter().position(|g| g.id == id)
    }

    fn by_rank(&self, rank: usize) -> usize {
        self.rank_order[rank]
    }
}

// ---------------------------------------------------------------------------
// Sentences
// ---------------------------------------------------------------------------

/// An ordered multiset of basis gates stored in its canonical (id-sorted)
/// representative order. Gate order inside a sentence does not affect the
/// circuit polytope, so multisets are enumerated instead of permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    /// indices into the ISA gate list, sorted by gate id
    pub gates: Vec<usize>,
    pub total_cost: f64,
}

impl Sentence {
    pub fn empty() -> Self {
        Sentence { gates: Vec::new(), total_cost: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn ids<'a>(&self, isa: &'a Isa) -> Vec<&'a str> {
        self.gates.iter().map(|&i| isa.gate(i).id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct FrontierItem {
    cost: f64,
    ranks: Vec<usize>,
}

impl Eq for FrontierItem {}

impl Ord for FrontierItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.ranks.len().cmp(&other.ranks.len()))
            .then_with(|| self.ranks.cmp(&other.ranks))
    }
}

impl PartialOrd for FrontierItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Endless best-first stream of sentences in nondecreasing total cost; ties
/// break toward shorter sentences, then lexicographic gate ids. Extending
/// only with gates at or after the last id-rank yields every multiset exactly
/// once, so no visited set is needed.
pub struct SentenceStream<'a> {
    isa: &'a Isa,
    heap: std::collections::BinaryHeap<std::cmp::Reverse<FrontierItem>>,
}

pub fn enumerate_sentences(isa: &Isa) -> SentenceStream<'_> {
    let mut heap = std::collections::BinaryHeap::new();
    for rank in 0..isa.gates.len() {
        let idx = isa.by_rank(rank);
        heap.push(std::cmp::Reverse(FrontierItem {
            cost: isa.gate(idx).cost,
            ranks: vec![rank],
        }));
    }
    SentenceStream { isa, heap }
}

impl Iterator for SentenceStream<'_> {
    type Item = Sentence;

    fn next(&mut self) -> Option<Sentence> {
        let std::cmp::Reverse(item) = self.heap.pop()?;
        let last = *item.ranks.last().expect("frontier items are nonempty");
        for rank in last..self.isa.gates.len() {
            let mut ranks = item.ranks.clone();
            ranks.push(rank);
            let cost = item.cost + self.isa.gate(self.isa.by_rank(rank)).cost;
            self.heap.push(std::cmp::Reverse(FrontierItem { cost, ranks }));
        }
        let gates: Vec<usize> = item.ranks.iter().map(|&r| self.isa.by_rank(r)).collect();
        Some(Sentence { gates, total_cost: item.cost })
    }
}

// ---------------------------------------------------------------------------
// Trajectory LP
// ---------------------------------------------------------------------------

/// The sequence of canonical invariants C0..Cn traversed by a sentence.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<CanonicalCoord>,
    /// whether the projective reflection of the target spectrum was the
    /// feasible branch
    pub reflected: bool,
}

enum TargetSlot<'a> {
    Fixed(&'a LogSpec),
    Free,
}

/// Stack the per-segment constraint blocks for a sentence into one LP.
/// Variables are the chamber coordinates of C2..C_{n-1} (plus the target
/// when `target` is free); chamber rows are added once per free invariant.
fn stack_trajectory_lp(gates: &[&GateDef], target: TargetSlot<'_>) -> LpProblem {
    let n = gates.len();
    assert!(n >= 2, "stacked LP needs at least two gates");
    let target_free = matches!(target, TargetSlot::Free);
    let n_blocks = n - 2 + usize::from(target_free);
    let num_vars = 3 * n_blocks;
    let mut lp = LpProblem::feasibility(num_vars);

    // chamber rows once per free invariant
    for block in 0..n_blocks {
        for (coef, constant) in chamber_rows() {
            let mut row = vec![0.0; num_vars];
            for (k, &c) in coef.iter().enumerate() {
                row[3 * block + k] = -c;
            }
            lp.push_row(row, constant);
        }
    }

    // segment blocks: segment i couples C_{i-1} and C_i (i = 2..=n); the
    // merged first block fixes the previous invariant at coords(G1)
    for i in 2..=n {
        let prev_block: Option<usize> = if i == 2 { None } else { Some(i - 3) };
        let next_block: Option<usize> = if i < n {
            Some(i - 2)
        } else if target_free {
            Some(n - 2)
        } else {
            None
        };
        let prev_slot = match prev_block {
            None => Slot::Fixed(&gates[0].spec),
            Some(_) => Slot::Free,
        };
        let next_slot = match (next_block, &target) {
            (Some(_), _) => Slot::Free,
            (None, TargetSlot::Fixed(spec)) => Slot::Fixed(spec),
            (None, TargetSlot::Free) => unreachable!(),
        };
        let block = instantiate_segment(prev_slot, &gates[i - 1].spec, next_slot);
        for row in block.rows.iter().filter(|r| r.provenance.is_some()) {
            let mut coef = vec![0.0; num_vars];
            if let Some(b) = prev_block {
                for k in 0..3 {
                    coef[3 * b + k] = -row.prev[k];
                }
            }
            if let Some(b) = next_block {
                for k in 0..3 {
                    coef[3 * b + k] = -row.next[k];
                }
            }
            lp.push_row(coef, row.constant);
        }
    }
    lp
}

fn lp_for_spec(isa: &Isa, sentence: &Sentence, target_spec: &LogSpec) -> LpProblem {
    let gates: Vec<&GateDef> = sentence.gates.iter().map(|&i| isa.gate(i)).collect();
    stack_trajectory_lp(&gates, TargetSlot::Fixed(target_spec))
}

/// The feasibility LP of a sentence against a fixed target chamber point:
/// zero variables for one- and two-gate sentences, 3(n-2) variables beyond.
pub fn build_trajectory_lp(isa: &Isa, sentence: &Sentence, target: &CanonicalCoord) -> LpProblem {
    let n = sentence.len();
    if n == 1 {
        // paired rows |coords(G1) - target| <= verification tolerance
        let g = isa.gate(sentence.gates[0]);
        let mut lp = LpProblem::feasibility(0);
        let gc = g.coords.as_array();
        let tc = target.as_array();
        for k in 0..3 {
            let diff = gc[k] - tc[k];
            lp.push_row(Vec::new(), tol::VERIFY - diff);
            lp.push_row(Vec::new(), tol::VERIFY + diff);
        }
        return lp;
    }
    if n == 2 {
        let spec = coords_to_logspec(target);
        let g1 = isa.gate(sentence.gates[0]);
        let g2 = isa.gate(sentence.gates[1]);
        let block = instantiate_segment(Slot::Fixed(&g1.spec), &g2.spec, Slot::Fixed(&spec));
        let mut lp = LpProblem::feasibility(0);
        for row in &block.rows {
            lp.push_row(Vec::new(), row.constant);
        }
        return lp;
    }
    lp_for_spec(isa, sentence, &coords_to_logspec(target))
}

fn try_branch(
    isa: &Isa,
    sentence: &Sentence,
    target_coords: &CanonicalCoord,
    target_spec: &LogSpec,
) -> Result<Option<Vec<CanonicalCoord>>, SynthError> {
    let n = sentence.len();
    if n == 1 {
        let g = isa.gate(sentence.gates[0]);
        let close = g
            .coords
            .as_array()
            .iter()
            .zip(target_coords.as_array())
            .all(|(a, b)| (a - b).abs() <= tol::VERIFY);
        return Ok(close.then(|| vec![CanonicalCoord::new(0.0, 0.0, 0.0), *target_coords]));
    }
    if n == 2 {
        let g1 = isa.gate(sentence.gates[0]);
        let g2 = isa.gate(sentence.gates[1]);
        let block = instantiate_segment(Slot::Fixed(&g1.spec), &g2.spec, Slot::Fixed(target_spec));
        if block.min_slack() >= -tol::LP_FEASIBLE {
            return Ok(Some(vec![
                CanonicalCoord::new(0.0, 0.0, 0.0),
                g1.coords,
                *target_coords,
            ]));
        }
        return Ok(None);
    }
    let lp = lp_for_spec(isa, sentence, target_spec);
    let out = feasible_point(&lp)?;
    if out.status != LpStatus::Feasible {
        return Ok(None);
    }
    let mut points = Vec::with_capacity(n + 1);
    points.push(CanonicalCoord::new(0.0, 0.0, 0.0));
    points.push(isa.gate(sentence.gates[0]).coords);
    for block in 0..n - 2 {
        // snap LP-tolerance noise back into the chamber
        let mut c: [f64; 3] = std::array::from_fn(|k| out.x[3 * block + k].clamp(0.0, 0.5));
        c.sort_by(|a, b| b.partial_cmp(a).unwrap());
        points.push(CanonicalCoord::new(c[0], c[1], c[2]));
    }
    points.push(*target_coords);
    Ok(Some(points))
}

/// LP feasibility of both projective branches of a target under a sentence,
/// honoring the sentence's stored gate order. Used to check that feasibility
/// is invariant under gate permutations.
pub fn branch_feasibility(
    isa: &Isa,
    sentence: &Sentence,
    target: &Unitary4,
) -> Result<(bool, bool), SynthError> {
    let tc = canonical_coords(target)?;
    let spec = coords_to_logspec(&tc);
    let refl = rho_reflect(&spec);
    let direct = try_branch(isa, sentence, &tc, &spec)?.is_some();
    let reflected = try_branch(isa, sentence, &tc, &refl)?.is_some();
    Ok((direct, reflected))
}

/// Solve the trajectory LP for the target, then for its projective
/// reflection; the first feasible branch wins.
pub fn find_trajectory(
    isa: &Isa,
    sentence: &Sentence,
    target: &Unitary4,
) -> Result<Option<Trajectory>, SynthError> {
    let tc = canonical_coords(target)?;
    let spec = coords_to_logspec(&tc);
    if let Some(points) = try_branch(isa, sentence, &tc, &spec)? {
        return Ok(Some(Trajectory { points, reflected: false }));
    }
    let refl = rho_reflect(&spec);
    if let Some(points) = try_branch(isa, sentence, &tc, &refl)? {
        return Ok(Some(Trajectory { points, reflected: true }));
    }
    Ok(None)
}

/// Worst-case synthesis target of a fixed-gate depth-d polytope: the apex,
/// i.e. the vertex maximizing total interaction content c1 + c2 + c3 of the
/// target when its coordinates are left free in the depth-d LP. Extremal
/// targets are the ones whose monolithic synthesis basins collapse with
/// depth; an interior point (max-min-slack) stays easy at every depth.
pub fn apex_target(gate: &GateDef, depth: usize) -> Result<CanonicalCoord, SynthError> {
    // the tiny tie-break tilt picks the symmetric corner of the maximal
    // interaction face, the empirically hardest vertex; vertex sums sit on a
    // much coarser rational grid so the tilt never trades away total content
    apex_target_tilted(gate, depth, [0.0, 0.002, 0.004])
}

/// Apex search with a small objective tilt (per-coordinate bonus weights)
/// used to select a particular vertex of the maximal-interaction face.
pub fn apex_target_tilted(
    gate: &GateDef,
    depth: usize,
    tilt: [f64; 3],
) -> Result<CanonicalCoord, SynthError> {
    assert!(depth >= 2);
    let gates: Vec<&GateDef> = std::iter::repeat(gate).take(depth).collect();
    let mut lp = stack_trajectory_lp(&gates, TargetSlot::Free);
    let b = lp.num_vars - 3;
    for k in 0..3 {
        lp.objective[b + k] = -1.0 - tilt[k];
    }
    let out = crate::lp::solve(&lp)?;
    if out.status != LpStatus::Feasible {
        return Err(SynthError::BudgetExhausted { sentences_tried: 0 });
    }
    let mut c: [f64; 3] = std::array::from_fn(|k| out.x[b + k].clamp(0.0, 0.5));
    c.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(CanonicalCoord::new(c[0], c[1], c[2]))
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct DecompStats {
    pub sentence_search_ms: f64,
    pub lp_ms: f64,
    pub lm_ms: f64,
    pub rejected_sentences: usize,
}

/// A complete synthesis result; multiplying the layers and gates back out
/// (with the global phase) reproduces the target.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub sentence: Sentence,
    pub trajectory: Trajectory,
    pub segments: Vec<SegmentSolution>,
    /// n + 1 local layers, layer 0 applied first
    pub local_layers: Vec<(Mat2, Mat2)>,
    pub global_phase: f64,
    pub stats: DecompStats,
}

#[derive(Debug, Clone)]
pub struct DecomposeOptions {
    pub segment: SegmentOptions,
    pub max_sentences: usize,
    pub max_cost: Option<f64>,
    pub seed: u64,
    pub parallel_segments: bool,
    /// restart multiplier for the single retry after a failed segment
    pub retry_multiplier: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            segment: SegmentOptions::default(),
            max_sentences: 1024,
            max_cost: None,
            seed: 0x67756c7073, // "gulps"
            parallel_segments: true,
            retry_multiplier: 4,
        }
    }
}

/// Outcome of the sentence-determination phase alone (the part benchmarked
/// against external decomposers).
#[derive(Debug, Clone)]
pub struct SentenceSearch {
    pub sentence: Sentence,
    pub trajectory: Trajectory,
    pub rejected: usize,
    pub search_ms: f64,
    pub lp_ms: f64,
}

/// Walk sentences in cost order until one admits a feasible trajectory.
/// Local targets (identity class) return the empty sentence immediately.
pub fn find_cheapest_sentence(
    target: &Unitary4,
    isa: &Isa,
    opts: &DecomposeOptions,
) -> Result<SentenceSearch, SynthError> {
    let start = Instant::now();
    let tc = canonical_coords(target)?;
    if tc.c1.abs() <= tol::VERIFY {
        return Ok(SentenceSearch {
            sentence: Sentence::empty(),
            trajectory: Trajectory {
                points: vec![CanonicalCoord::new(0.0, 0.0, 0.0)],
                reflected: false,
            },
            rejected: 0,
            search_ms: start.elapsed().as_secs_f64() * 1e3,
            lp_ms: 0.0,
        });
    }
    let spec = coords_to_logspec(&tc);
    let refl = rho_reflect(&spec);
    let mut rejected = 0usize;
    let mut lp_ms = 0.0f64;
    for sentence in enumerate_sentences(isa).take(opts.max_sentences) {
        if let Some(cap) = opts.max_cost {
            if sentence.total_cost > cap {
                return Err(SynthError::BudgetExhausted { sentences_tried: rejected });
            }
        }
        let lp_start = Instant::now();
        let mut found = try_branch(isa, &sentence, &tc, &spec)?.map(|points| Trajectory {
            points,
            reflected: false,
        });
        if found.is_none() {
            found = try_branch(isa, &sentence, &tc, &refl)?.map(|points| Trajectory {
                points,
                reflected: true,
            });
        }
        lp_ms += lp_start.elapsed().as_secs_f64() * 1e3;
        match found {
            Some(trajectory) => {
                return Ok(SentenceSearch {
                    sentence,
                    trajectory,
                    rejected,
                    search_ms: start.elapsed().as_secs_f64() * 1e3,
                    lp_ms,
                });
            }
            None => rejected += 1,
        }
    }
    Err(SynthError::BudgetExhausted { sentences_tried: rejected })
}

fn mul_pair(a: &(Mat2, Mat2), b: &(Mat2, Mat2)) -> (Mat2, Mat2) {
    (a.0 * b.0, a.1 * b.1)
}

/// Merge segment exteriors, interior rotations and the boundary KAK factors
/// into n + 1 local layers so the circuit multiplies out to the target.
pub fn assemble(
    target: &Unitary4,
    isa: &Isa,
    sentence: &Sentence,
    trajectory: &Trajectory,
    segments: &[SegmentSolution],
    stats: DecompStats,
) -> Result<Decomposition, SynthError> {
    let n = sentence.len();
    let kt = kak(target)?;
    let mut layers: Vec<(Mat2, Mat2)> = Vec::with_capacity(n + 1);

    if n == 0 {
        // pure local target: T = e^{i phi} (k1 k2)
        layers.push(mul_pair(&kt.k1, &kt.k2));
    } else {
        debug_assert_eq!(segments.len(), n - 1);
        let g1 = isa.gate(sentence.gates[0]);
        let kg = kak(&g1.matrix)?;
        // CAN(C1) = e^{-i phi} P^H G1 Q^H
        let mut layer0 = (kg.k2.0.adjoint(), kg.k2.1.adjoint());
        let mut carry = (kg.k1.0.adjoint(), kg.k1.1.adjoint());
        layers.push((Mat2::identity(), Mat2::identity())); // placeholder for index 0
        for (i, seg) in segments.iter().enumerate() {
            // layer between G_i and G_{i+1}: interior rotation times the
            // previous exterior
            let r = (rv_gate(seg.v1), rv_gate(seg.v2));
            layers.push(mul_pair(&r, &carry));
            carry = seg.left;
            layer0 = mul_pair(&layer0, &seg.right);
            let _ = i;
        }
        // outermost layers pick up the target's KAK frame
        layers.push(mul_pair(&kt.k1, &carry));
        layers[0] = mul_pair(&layer0, &kt.k2);
    }

    // multiply out and pin the global phase
    let mut m: Mat4 = kron(&layers[0].0, &layers[0].1);
    for (j, layer) in layers.iter().enumerate().skip(1) {
        let g = isa.gate(sentence.gates[j - 1]);
        m = *g.matrix.matrix() * m;
        m = kron(&layer.0, &layer.1) * m;
    }
    let distance = phase_distance(&m, target);
    if distance > tol::ASSEMBLY {
        return Err(SynthError::AssemblyMismatch { distance });
    }
    let global_phase = (m.adjoint() * **target).trace().arg();
    Ok(Decomposition {
        sentence: sentence.clone(),
        trajectory: trajectory.clone(),
        segments: segments.to_vec(),
        local_layers: layers,
        global_phase,
        stats,
    })
}

/// Full pipeline: cheapest feasible sentence, per-segment stitching (in
/// parallel, deterministically seeded), assembly.
pub fn decompose(
    target: &Unitary4,
    isa: &Isa,
    opts: &DecomposeOptions,
) -> Result<Decomposition, SynthError> {
    let search = find_cheapest_sentence(target, isa, opts)?;
    let sentence = search.sentence;
    let trajectory = search.trajectory;
    let n = sentence.len();

    let lm_start = Instant::now();
    let solve_one = |i: usize| -> Result<SegmentSolution, SynthError> {
        // segment i (2-based trajectory step): C_{i-1} -> C_i through gate i
        let gate = isa.gate(sentence.gates[i - 1]);
        let c_prev = &trajectory.points[i - 1];
        let c_next = &trajectory.points[i];
        let seed = opts.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match solve_segment(c_prev, &gate.matrix, c_next, &opts.segment, &mut rng) {
            Ok(sol) => Ok(sol),
            Err(SynthError::SegmentNoConvergence { .. }) => {
                // feasibility is guaranteed by the LP; invest more effort once
                let boosted = SegmentOptions {
                    restarts: opts.segment.restarts * opts.retry_multiplier.max(1),
                    lm: opts.segment.lm.clone(),
                };
                solve_segment(c_prev, &gate.matrix, c_next, &boosted, &mut rng)
            }
            Err(e) => Err(e),
        }
    };
    let segments: Vec<SegmentSolution> = if n >= 2 {
        let idx: Vec<usize> = (2..=n).collect();
        if opts.parallel_segments {
            idx.into_par_iter().map(solve_one).collect::<Result<Vec<_>, _>>()?
        } else {
            idx.into_iter().map(solve_one).collect::<Result<Vec<_>, _>>()?
        }
    } else {
        Vec::new()
    };
    let lm_ms = lm_start.elapsed().as_secs_f64() * 1e3;

    let stats = DecompStats {
        sentence_search_ms: search.search_ms,
        lp_ms: search.lp_ms,
        lm_ms,
        rejected_sentences: search.rejected,
    };
    assemble(target, isa, &sentence, &trajectory, &segments, stats)
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// phase distance between the multiplied-out circuit and the target
    pub distance: f64,
    /// recomputed per-segment residual norms
    pub segment_residuals: Vec<f64>,
    /// minimum slack of the instantiated trajectory rows
    pub trajectory_min_slack: f64,
}

/// Recompute everything from stored fields; purely diagnostic.
pub fn verify(d: &Decomposition, target: &Unitary4, isa: &Isa) -> VerifyReport {
    let n = d.sentence.len();
    // multiply out
    let mut m: Mat4 = kron(&d.local_layers[0].0, &d.local_layers[0].1);
    for j in 1..=n {
        let g = isa.gate(d.sentence.gates[j - 1]);
        m = *g.matrix.matrix() * m;
        m = kron(&d.local_layers[j].0, &d.local_layers[j].1) * m;
    }
    let distance = phase_distance(&m, target);

    // segment residuals from the stored rotation vectors
    let mut segment_residuals = Vec::with_capacity(d.segments.len());
    for (k, seg) in d.segments.iter().enumerate() {
        let i = k + 2;
        let gate = isa.gate(d.sentence.gates[i - 1]);
        let f = SegmentResidual::new(&gate.matrix, &d.trajectory.points[i - 1], &d.trajectory.points[i]);
        let mut out = [0.0f64; 3];
        let x = [seg.v1[0], seg.v1[1], seg.v1[2], seg.v2[0], seg.v2[1], seg.v2[2]];
        f.eval(&x, &mut out);
        segment_residuals.push(out.iter().fold(0.0f64, |acc, r| acc.max(r.abs())));
    }

    // trajectory row slacks
    let mut min_slack = f64::INFINITY;
    for i in 2..=n {
        let gate = isa.gate(d.sentence.gates[i - 1]);
        let prev = coords_to_logspec(&d.trajectory.points[i - 1]);
        let next_spec = if i == n && d.trajectory.reflected {
            rho_reflect(&coords_to_logspec(&d.trajectory.points[i]))
        } else {
            coords_to_logspec(&d.trajectory.points[i])
        };
        min_slack = min_slack.min(crate::monodromy::depth2_min_slack(&prev, &gate.spec, &next_spec));
    }
    VerifyReport { distance, segment_residuals, trajectory_min_slack: min_slack }
}

// ---------------------------------------------------------------------------
// Named gates
// ---------------------------------------------------------------------------

/// Named-gate vocabulary: CX/CNOT, CZ, iSWAP, SWAP, B, and fractional forms
/// "G^1/k". Fractional gates are the canonical gate at coords(G)/k dressed
/// with the base gate's own KAK frame.
pub fn named_gate_matrix(name: &str) -> Result<Unitary4, SynthError> {
    if let Some((base, frac)) = name.split_once('^') {
        let k: u32 = frac
            .strip_prefix("1/")
            .and_then(|s| s.parse().ok())
            .filter(|&k| k >= 1)
            .ok_or_else(|| SynthError::UnknownGate(name.to_string()))?;
        let base_matrix = named_gate_matrix(base.trim())?;
        let kd = kak(&base_matrix)?;
        let scaled = CanonicalCoord::new(
            kd.coord.c1 / k as f64,
            kd.coord.c2 / k as f64,
            kd.coord.c3 / k as f64,
        );
        let m = kron(&kd.k1.0, &kd.k1.1)
            * *can_gate(scaled.as_array()).matrix()
            * kron(&kd.k2.0, &kd.k2.1);
        return Ok(Unitary4::new_unchecked(m));
    }
    match name.to_ascii_uppercase().as_str() {
        "CX" | "CNOT" => Ok(cx_gate()),
        "CZ" => Ok(cz_gate()),
        "ISWAP" => Ok(iswap_gate()),
        "SWAP" => Ok(swap_gate()),
        "B" => Ok(can_gate([0.25, 0.125, 0.0])),
        _ => Err(SynthError::UnknownGate(name.to_string())),
    }
}
