//! Two-qubit unitary synthesis over native instruction sets.
//!
//! The pipeline decomposes an arbitrary 4x4 unitary into a minimum-cost
//! sequence of basis gates interleaved with single-qubit rotations:
//!
//! 1. candidate gate sentences are enumerated in nondecreasing total cost;
//! 2. for each sentence, a small linear program over canonical gate
//!    invariants (cut out by quantum Littlewood-Richardson inequalities)
//!    decides whether a trajectory from the identity to the target exists,
//!    so the first feasible sentence is also the cheapest;
//! 3. each depth-2 trajectory segment is stitched numerically by
//!    Levenberg-Marquardt on a Makhlin-invariant residual, with the exterior
//!    rotations recovered through the KAK decomposition;
//! 4. the segments are merged into local layers and verified by multiplying
//!    the circuit back out.
//!
//! Modules mirror those stages: [`matcore`] (fixed-size complex linear
//! algebra), [`invariants`] (canonical coordinates, spectra, Makhlin, KAK),
//! [`monodromy`] (the inequality family), [`lp`] (a self-contained dense
//! simplex), and [`synth`] (the pipeline itself).

pub mod invariants;
pub mod lp;
pub mod matcore;
pub mod monodromy;
pub mod synth;
pub mod tol;
