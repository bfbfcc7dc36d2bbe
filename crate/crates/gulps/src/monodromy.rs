//! The quantum Littlewood-Richardson inequality family cutting out the
//! depth-2 circuit polytope, plus per-segment instantiation with fixed gate
//! spectra folded into constants.
//!
//! Everything here is exact integer combinatorics until instantiation time:
//! classical LR coefficients come from lattice-word tableau enumeration,
//! quantum ones from the rim-hook (abacus) reduction, and the generated row
//! table is cached once and shared.

use crate::invariants::{coords_to_logspec, rho_reflect, CanonicalCoord, LogSpec};
use crate::tol;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error("box dimensions must satisfy r >= 1, k >= 1, r + k = 4 (got r = {r}, k = {k})")]
    InvalidBox { r: usize, k: usize },
}

// ---------------------------------------------------------------------------
// Partitions and Littlewood-Richardson coefficients
// ---------------------------------------------------------------------------

/// Integer partition with non-increasing parts (trailing zeros trimmed).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(pub Vec<u8>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn size(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    pub fn part(&self, i: usize) -> u8 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn fits_in_box(&self, r: usize, k: usize) -> bool {
        self.0.len() <= r && self.0.iter().all(|&p| p as usize <= k)
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions fitting in an r x k box, lexicographically ordered.
pub fn partitions_in_box(r: usize, k: usize) -> Result<Vec<Partition>, MonodromyError> {
    if r == 0 || k == 0 || r + k != 4 {
        return Err(MonodromyError::InvalidBox { r, k });
    }
    let mut out = Vec::new();
    let mut cur: Vec<u8> = Vec::new();
    fn rec(out: &mut Vec<Partition>, cur: &mut Vec<u8>, rows_left: usize, max_part: u8) {
        out.push(Partition(cur.clone()));
        if rows_left == 0 {
            return;
        }
        for p in 1..=max_part {
            cur.push(p);
            rec(out, cur, rows_left - 1, p);
            cur.pop();
        }
    }
    rec(&mut out, &mut cur, r, k as u8);
    out.sort();
    Ok(out)
}

/// Classical Littlewood-Richardson coefficient c^c_{a,b} by exhaustive
/// enumeration of LR skew tableaux of shape c/a with content b (lattice-word
/// condition). Inputs here never exceed three rows and parts of six.
pub fn lr_coefficient(a: &Partition, b: &Partition, c: &Partition) -> u64 {
    if c.size() != a.size() + b.size() {
        return 0;
    }
    let rows = c.0.len();
    // inner shape must be contained in the outer
    for i in 0..rows.max(a.0.len()) {
        if a.part(i) > c.part(i) {
            return 0;
        }
    }
    if a.0.len() > c.0.len() && a.size() > 0 {
        return 0;
    }
    let nvals = b.0.len();
    if nvals == 0 {
        return if a == c { 1 } else { 0 };
    }
    // cells in reverse reading order: rows top to bottom, right to left
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for row in 0..rows {
        let lo = a.part(row) as usize;
        let hi = c.part(row) as usize;
        for col in (lo..hi).rev() {
            cells.push((row, col));
        }
    }
    let mut grid = vec![vec![0u8; 8]; rows.max(1)];
    let mut counts = vec![0u32; nvals + 1];
    fn rec(
        cells: &[(usize, usize)],
        idx: usize,
        grid: &mut Vec<Vec<u8>>,
        counts: &mut Vec<u32>,
        a: &Partition,
        b: &Partition,
        c: &Partition,
    ) -> u64 {
        if idx == cells.len() {
            return 1;
        }
        let (row, col) = cells[idx];
        let nvals = b.0.len() as u8;
        let mut total = 0;
        for v in 1..=nvals {
            // content bound
            if counts[v as usize] + 1 > b.part(v as usize - 1) as u32 {
                continue;
            }
            // lattice word: after placing, #v <= #(v-1)
            if v >= 2 && counts[v as usize] + 1 > counts[v as usize - 1] {
                continue;
            }
            // row weakly increasing: right neighbour (filled earlier) >= v
            if col + 1 < c.part(row) as usize && grid[row][col + 1] < v {
                continue;
            }
            // column strictly increasing: cell above (if a skew cell) < v
            if row > 0 {
                let above_filled =
                    col >= a.part(row - 1) as usize && col < c.part(row - 1) as usize;
                if above_filled && grid[row - 1][col] >= v {
                    continue;
                }
            }
            grid[row][col] = v;
            counts[v as usize] += 1;
            total += rec(cells, idx + 1, grid, counts, a, b, c);
            counts[v as usize] -= 1;
            grid[row][col] = 0;
        }
        total
    }
    rec(&cells, 0, &mut grid, &mut counts, a, b, c)
}

/// Quantum Littlewood-Richardson coefficient N^{c,d}_{a,b}(r,k) for the
/// r + k = 4 Grassmannians, via the rim-hook reduction of classical
/// coefficients in first-column hook (abacus) coordinates. d = 0 reduces
/// exactly to the classical coefficient.
pub fn qlr_coefficient(
    r: usize,
    k: usize,
    a: &Partition,
    b: &Partition,
    c: &Partition,
    d: usize,
) -> i64 {
    let n = r + k;
    debug_assert_eq!(n, 4);
    let total = a.size() + b.size();
    if total != c.size() + d * n || !c.fits_in_box(r, k) {
        return 0;
    }
    let max_part = (a.part(0) + b.part(0)) as usize;
    // enumerate lambda with at most r rows, |lambda| = total, lambda_1 <= a1+b1
    let mut acc: i64 = 0;
    let mut lam: Vec<u8> = Vec::new();
    fn enumerate(
        lam: &mut Vec<u8>,
        remaining: usize,
        rows_left: usize,
        max_part: usize,
        visit: &mut impl FnMut(&Partition),
    ) {
        if remaining == 0 {
            visit(&Partition(lam.clone()));
            return;
        }
        if rows_left == 0 {
            return;
        }
        let cap = max_part.min(remaining);
        for p in (1..=cap).rev() {
            // feasibility: remaining - p must fit in (rows_left - 1) rows of <= p
            if remaining - p <= p * (rows_left - 1) {
                lam.push(p as u8);
                enumerate(lam, remaining - p, rows_left - 1, p, visit);
                lam.pop();
            }
        }
    }
    enumerate(&mut lam, total, r, max_part, &mut |lambda| {
        let m = lr_coefficient(a, b, lambda);
        if m == 0 {
            return;
        }
        if let Some((sign, reduced, hooks)) = rim_hook_reduce(lambda, r, n) {
            if hooks == d && &reduced == c {
                acc += sign * m as i64;
            }
        }
    });
    acc
}

/// Reduce a partition with at most r rows into the r x (n-r) box by removing
/// rim hooks of size n. Returns (sign, reduced partition, hooks removed), or
/// None when the residues collide and no reduction exists.
fn rim_hook_reduce(lam: &Partition, r: usize, n: usize) -> Option<(i64, Partition, usize)> {
    if lam.0.len() > r {
        return None;
    }
    // beta numbers: strictly decreasing first-column hook lengths
    let mut beta: Vec<i64> =
        (0..r).map(|i| lam.part(i) as i64 + (r - 1 - i) as i64).collect();
    let residues: Vec<i64> = beta.iter().map(|&b| b.rem_euclid(n as i64)).collect();
    {
        let mut sorted = residues.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != r {
            return None; // colliding residues: no n-hook reduction to the box
        }
    }
    let mut sign: i64 = 1;
    let mut hooks = 0usize;
    for i in 0..r {
        while beta[i] - residues[i] > 0 {
            // remove one hook from runner i: height = 1 + number of beta
            // values strictly between the new and old positions
            let lo = beta[i] - n as i64;
            let passed = beta
                .iter()
                .enumerate()
                .filter(|&(j, &bj)| j != i && bj > lo && bj < beta[i])
                .count();
            let ht = 1 + passed;
            if (r as i64 - ht as i64) % 2 != 0 {
                sign = -sign;
            }
            beta[i] = lo;
            hooks += 1;
        }
    }
    beta.sort_unstable_by(|a, b| b.cmp(a));
    let mut parts: Vec<u8> = Vec::new();
    for (j, &b) in beta.iter().enumerate() {
        let p = b - (r - 1 - j) as i64;
        debug_assert!(p >= 0);
        if p > 0 {
            parts.push(p as u8);
        }
    }
    Some((sign, Partition(parts), hooks))
}

// ---------------------------------------------------------------------------
// The inequality table
// ---------------------------------------------------------------------------

/// Provenance of one QLR row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QlrTriple {
    pub r: u8,
    pub k: u8,
    pub a: Partition,
    pub b: Partition,
    pub c: Partition,
    pub d: u8,
}

/// One linear inequality over three sorted log spectra:
/// `constant + coef_alpha . alpha + coef_beta . beta + coef_delta . delta >= 0`.
/// Each coefficient block selects exactly r spectrum entries (the Schubert
/// positions of the corresponding partition).
#[derive(Debug, Clone, PartialEq)]
pub struct IneqRow {
    pub coef_alpha: [i8; 4],
    pub coef_beta: [i8; 4],
    pub coef_delta: [i8; 4],
    pub constant: i32,
    pub provenance: QlrTriple,
}

impl IneqRow {
    pub fn slack(&self, alpha: &LogSpec, beta: &LogSpec, delta: &LogSpec) -> f64 {
        let mut s = self.constant as f64;
        for i in 0..4 {
            s += self.coef_alpha[i] as f64 * alpha.0[i];
            s += self.coef_beta[i] as f64 * beta.0[i];
            s += self.coef_delta[i] as f64 * delta.0[i];
        }
        s
    }
}

/// Schubert positions of a partition in the r x k box: 0-based indices
/// {k + i - a_i} into the descending-sorted spectrum.
fn subset_indices(a: &Partition, r: usize, k: usize) -> [i8; 4] {
    let mut coef = [0i8; 4];
    for i in 0..r {
        let pos = k + i - a.part(i) as usize;
        coef[pos] += 1;
    }
    coef
}

/// Generate (and cache) the full QLR inequality family for two-qubit spectra:
/// r in {1,2,3}, all ordered partition pairs with unit quantum coefficient.
/// The table has exactly 72 rows.
pub fn qlr_rows() -> &'static [IneqRow] {
    static TABLE: OnceLock<Vec<IneqRow>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows = Vec::new();
        for r in 1..=3usize {
            let k = 4 - r;
            let parts = partitions_in_box(r, k).expect("valid box");
            for a in &parts {
                for b in &parts {
                    for d in 0..=2usize {
                        for c in &parts {
                            if qlr_coefficient(r, k, a, b, c, d) == 1 {
                                let mut alpha = subset_indices(a, r, k);
                                let mut beta = subset_indices(b, r, k);
                                for v in alpha.iter_mut().chain(beta.iter_mut()) {
                                    *v = -*v;
                                }
                                let delta = subset_indices(c, r, k);
                                rows.push(IneqRow {
                                    coef_alpha: alpha,
                                    coef_beta: beta,
                                    coef_delta: delta,
                                    constant: d as i32,
                                    provenance: QlrTriple {
                                        r: r as u8,
                                        k: k as u8,
                                        a: a.clone(),
                                        b: b.clone(),
                                        c: c.clone(),
                                        d: d as u8,
                                    },
                                });
                            }
                        }
                    }
                }
            }
        }
        // exact-duplicate removal on the numeric content
        let mut seen = std::collections::BTreeSet::new();
        rows.retain(|row| {
            let key = (row.coef_alpha, row.coef_beta, row.coef_delta, row.constant);
            seen.insert(key)
        });
        rows
    })
}

// ---------------------------------------------------------------------------
// Instantiation
// ---------------------------------------------------------------------------

/// Affine bridge rows: for a chamber triple the sorted log spectrum is this
/// matrix times (c1, c2, c3). Valid because chamber ordering makes the four
/// entries already sorted.
pub const AFFINE_LOGSPEC: [[f64; 3]; 4] =
    [[1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, -1.0]];

/// A spectrum slot of one segment: fixed (folded into constants) or free
/// (rewritten as an affine function of that invariant's chamber coordinates).
#[derive(Debug, Clone, Copy)]
pub enum Slot<'a> {
    Fixed(&'a LogSpec),
    Free,
}

/// One instantiated inequality over a segment's free coordinates. Coefficient
/// layout: three entries for the previous invariant, three for the next; the
/// block of a fixed slot is zero.
#[derive(Debug, Clone)]
pub struct SegRow {
    pub prev: [f64; 3],
    pub next: [f64; 3],
    pub constant: f64,
    /// index into [`qlr_rows`], or None for a chamber row
    pub provenance: Option<usize>,
}

/// Constraint block for one trajectory segment.
#[derive(Debug, Clone)]
pub struct SegmentConstraints {
    pub rows: Vec<SegRow>,
    pub prev_free: bool,
    pub next_free: bool,
}

impl SegmentConstraints {
    /// For fully-fixed blocks: the minimum slack over all rows. Negative
    /// beyond tolerance means the segment is infeasible (a legitimate
    /// outcome, not an error).
    pub fn min_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.constant).fold(f64::INFINITY, f64::min)
    }

    pub fn qlr_row_count(&self) -> usize {
        self.rows.iter().filter(|r| r.provenance.is_some()).count()
    }
}

fn fold_block(coef: &[i8; 4], spec: &LogSpec) -> f64 {
    (0..4).map(|i| coef[i] as f64 * spec.0[i]).sum()
}

fn spread_block(coef: &[i8; 4]) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for (j, aff) in AFFINE_LOGSPEC.iter().enumerate() {
        for (v, &coef_aff) in out.iter_mut().zip(aff.iter()) {
            *v += coef[j] as f64 * coef_aff;
        }
    }
    out
}

/// The four chamber rows for a free invariant: c1 >= c2, c2 >= c3, c3 >= 0,
/// c1 + c2 <= 1/2 (each as "expr >= 0" coefficient triples with constant).
pub fn chamber_rows() -> [([f64; 3], f64); 4] {
    [
        ([1.0, -1.0, 0.0], 0.0),
        ([0.0, 1.0, -1.0], 0.0),
        ([0.0, 0.0, 1.0], 0.0),
        ([-1.0, -1.0, 0.0], 0.5),
    ]
}

/// Instantiate the QLR family for one segment. The alpha block always takes
/// the (fixed) basis-gate spectrum; the beta block is the invariant before
/// the gate, delta the invariant after. Free slots become affine functions of
/// chamber coordinates and pick up their chamber rows.
pub fn instantiate_segment(prev: Slot<'_>, gate: &LogSpec, next: Slot<'_>) -> SegmentConstraints {
    let table = qlr_rows();
    let mut rows = Vec::with_capacity(table.len() + 8);
    let prev_free = matches!(prev, Slot::Free);
    let next_free = matches!(next, Slot::Free);
    for (idx, r) in table.iter().enumerate() {
        let mut constant = r.constant as f64 + fold_block(&r.coef_alpha, gate);
        let mut pc = [0.0f64; 3];
        let mut nc = [0.0f64; 3];
        match prev {
            Slot::Fixed(s) => constant += fold_block(&r.coef_beta, s),
            Slot::Free => pc = spread_block(&r.coef_beta),
        }
        match next {
            Slot::Fixed(s) => constant += fold_block(&r.coef_delta, s),
            Slot::Free => nc = spread_block(&r.coef_delta),
        }
        rows.push(SegRow { prev: pc, next: nc, constant, provenance: Some(idx) });
    }
    if prev_free {
        for (coef, constant) in chamber_rows() {
            rows.push(SegRow { prev: coef, next: [0.0; 3], constant, provenance: None });
        }
    }
    if next_free {
        for (coef, constant) in chamber_rows() {
            rows.push(SegRow { prev: [0.0; 3], next: coef, constant, provenance: None });
        }
    }
    SegmentConstraints { rows, prev_free, next_free }
}

/// Minimum slack of the depth-2 polytope rows at a fully fixed target
/// spectrum.
pub fn depth2_min_slack(g1: &LogSpec, g2: &LogSpec, target: &LogSpec) -> f64 {
    qlr_rows()
        .iter()
        .map(|r| r.slack(g2, g1, target))
        .fold(f64::INFINITY, f64::min)
}

/// Depth-2 circuit-polytope membership: true when every inequality holds
/// within slack -1e-9 for the target's chamber spectrum or its projective
/// reflection.
pub fn polytope_contains(g1: &LogSpec, g2: &LogSpec, target: &CanonicalCoord) -> bool {
    let delta = coords_to_logspec(target);
    let refl = rho_reflect(&delta);
    depth2_min_slack(g1, g2, &delta) >= -tol::LP_FEASIBLE
        || depth2_min_slack(g1, g2, &refl) >= -tol::LP_FEASIBLE
}
