//! Central tolerance table. Every numeric gate in the crate reads from here
//! so that the bands stay ordered: construction < verification < eigen residual.

/// Admission tolerance for unitarity checks on constructed matrices.
pub const CONSTRUCT: f64 = 1e-10;

/// Verification tolerance for products of validated unitaries.
pub const VERIFY: f64 = 1e-9;

/// Residual bound for eigenpairs returned by the 4x4 eigensolver.
pub const EIG_RESIDUAL: f64 = 1e-8;

/// KAK reconstruction bound (phase distance).
pub const KAK_RECONSTRUCT: f64 = 1e-8;

/// Slack below which an LP constraint counts as violated.
pub const LP_FEASIBLE: f64 = 1e-9;

/// Phase-I objective above this certifies infeasibility; values between
/// `LP_FEASIBLE` and this band are degenerate-feasible and get logged.
pub const LP_INFEASIBLE_CERT: f64 = 1e-7;

/// Per-term residual threshold for segment least squares.
pub const SEGMENT_RESIDUAL: f64 = 1e-8;

/// Full-circuit assembly distance gate.
pub const ASSEMBLY: f64 = 1e-6;
