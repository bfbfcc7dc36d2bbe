//! Dense two-phase primal simplex with Bland's anti-cycling rule, sized for
//! this problem family (hundreds of rows, a dozen variables). Free variables
//! are split into nonnegative pairs; Phase I decides feasibility via
//! artificial variables, Phase II (skipped for all-zero objectives) minimizes.
//!
//! No external solver is used anywhere in the crate.

use crate::tol;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex iteration limit hit ({0} pivots); the tableau is likely ill-conditioned")]
    IterationLimit(usize),
}

/// `a x <= b`, minimize `objective . x`, with optional per-variable bounds.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub num_vars: usize,
    /// rows (coefficients, rhs)
    pub rows: Vec<(Vec<f64>, f64)>,
    /// all-zero means pure feasibility
    pub objective: Vec<f64>,
    /// optional (lower, upper) per variable
    pub var_bounds: Vec<(Option<f64>, Option<f64>)>,
}

impl LpProblem {
    pub fn feasibility(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            rows: Vec::new(),
            objective: vec![0.0; num_vars],
            var_bounds: vec![(None, None); num_vars],
        }
    }

    pub fn push_row(&mut self, coef: Vec<f64>, rhs: f64) {
        debug_assert_eq!(coef.len(), self.num_vars);
        self.rows.push((coef, rhs));
    }

    /// Maximum constraint violation of a candidate point (0 when feasible).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for (coef, rhs) in &self.rows {
            let lhs: f64 = coef.iter().zip(x).map(|(c, xi)| c * xi).sum();
            v = v.max(lhs - rhs);
        }
        for (i, (lo, hi)) in self.var_bounds.iter().enumerate() {
            if let Some(lo) = lo {
                v = v.max(lo - x[i]);
            }
            if let Some(hi) = hi {
                v = v.max(x[i] - hi);
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub max_violation: f64,
    pub objective_value: f64,
    /// Phase-I optimum fell in the borderline band (logged, never dropped).
    pub degenerate: bool,
}

const PIVOT_EPS: f64 = 1e-11;

struct Tableau {
    /// (m + 1) x (n + 1); last row is the objective, last column the RHS
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    m: usize,
    n: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        for r in 0..=self.m {
            if r == row {
                continue;
            }
            let f = self.t[r][col];
            if f.abs() < 1e-300 {
                continue;
            }
            for c in 0..=self.n {
                let sub = f * self.t[row][c];
                self.t[r][c] -= sub;
            }
            self.t[r][col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering variable is the lowest-index column with a
    /// negative reduced cost; leaving row is the ratio-test minimum with the
    /// lowest basis index on ties. Returns Ok(true) at optimality,
    /// Ok(false) when unbounded.
    fn iterate(&mut self, allowed_cols: usize, budget: usize) -> Result<bool, LpError> {
        for _ in 0..budget {
            let mut entering = None;
            for j in 0..allowed_cols {
                if self.t[self.m][j] < -PIVOT_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.t[r][col];
                if a > PIVOT_EPS {
                    let ratio = self.t[r][self.n] / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - PIVOT_EPS
                                || (ratio < bratio + PIVOT_EPS && self.basis[r] < self.basis[br])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(false);
            };
            self.pivot(row, col);
        }
        Err(LpError::IterationLimit(budget))
    }
}

/// Two-phase simplex. Deterministic: identical input bytes produce identical
/// outcomes.
pub fn solve(p: &LpProblem) -> Result<LpOutcome, LpError> {
    // materialize bounds as rows
    let mut rows: Vec<(Vec<f64>, f64)> = p.rows.clone();
    for (i, (lo, hi)) in p.var_bounds.iter().enumerate() {
        if let Some(hi) = hi {
            let mut c = vec![0.0; p.num_vars];
            c[i] = 1.0;
            rows.push((c, *hi));
        }
        if let Some(lo) = lo {
            let mut c = vec![0.0; p.num_vars];
            c[i] = -1.0;
            rows.push((c, -*lo));
        }
    }

    // zero-variable problems are plain constant checks
    if p.num_vars == 0 {
        let worst = rows.iter().map(|(_, b)| -b).fold(0.0f64, f64::max);
        let feasible = worst <= tol::LP_FEASIBLE;
        return Ok(LpOutcome {
            status: if feasible { LpStatus::Feasible } else { LpStatus::Infeasible },
            x: Vec::new(),
            max_violation: worst.max(0.0),
            objective_value: 0.0,
            degenerate: false,
        });
    }

    let m = rows.len();
    let nv = 2 * p.num_vars; // free-variable split x = u - w
    let n_art: usize = rows.iter().filter(|(_, b)| *b < 0.0).count();
    let n = nv + m + n_art; // split vars + slacks + artificials
    let mut t = vec![vec![0.0f64; n + 1]; m + 1];
    let mut basis = vec![0usize; m];
    let mut art_col = nv + m;
    for (r, (coef, b)) in rows.iter().enumerate() {
        let flip = if *b < 0.0 { -1.0 } else { 1.0 };
        for (j, &c) in coef.iter().enumerate() {
            t[r][j] = flip * c;
            t[r][p.num_vars + j] = -flip * c;
        }
        t[r][nv + r] = flip; // slack
        t[r][n] = flip * b;
        if flip < 0.0 {
            t[r][art_col] = 1.0;
            basis[r] = art_col;
            art_col += 1;
        } else {
            basis[r] = nv + r;
        }
    }

    let mut tab = Tableau { t, basis, m, n };
    let budget = 50 * (m + p.num_vars).max(20);

    // Phase I: minimize the artificial sum (only if artificials exist)
    let mut degenerate = false;
    if n_art > 0 {
        for j in nv + m..n {
            tab.t[m][j] = 1.0;
        }
        // price out the artificial basis
        for r in 0..m {
            if tab.basis[r] >= nv + m {
                for c in 0..=n {
                    let sub = tab.t[r][c];
                    tab.t[m][c] -= sub;
                }
            }
        }
        let optimal = tab.iterate(n, budget)?;
        debug_assert!(optimal, "phase I cannot be unbounded");
        let w = -tab.t[m][n]; // objective row RHS carries -value
        if w > tol::LP_INFEASIBLE_CERT {
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                max_violation: w,
                objective_value: 0.0,
                degenerate: false,
            });
        }
        if w > tol::LP_FEASIBLE {
            log::warn!("phase I optimum {w:.3e} in the degenerate band; reporting feasible");
            degenerate = true;
        }
        // drive remaining artificials out of the basis where possible
        for r in 0..m {
            if tab.basis[r] >= nv + m {
                if let Some(col) = (0..nv + m).find(|&c| tab.t[r][c].abs() > PIVOT_EPS) {
                    tab.pivot(r, col);
                }
            }
        }
    }

    // Phase II (skipped for all-zero objectives)
    let pure_feasibility = p.objective.iter().all(|&c| c == 0.0);
    let mut status = LpStatus::Feasible;
    if !pure_feasibility {
        for c in 0..=n {
            tab.t[m][c] = 0.0;
        }
        for (j, &c) in p.objective.iter().enumerate() {
            tab.t[m][j] = c;
            tab.t[m][p.num_vars + j] = -c;
        }
        // forbid artificials from re-entering by leaving their costs at zero
        // and restricting the entering scan to real + slack columns
        for r in 0..m {
            let b = tab.basis[r];
            if b < nv + m {
                let f = tab.t[m][b];
                if f.abs() > 1e-300 {
                    for c in 0..=n {
                        let sub = f * tab.t[r][c];
                        tab.t[m][c] -= sub;
                    }
                }
            }
        }
        match tab.iterate(nv + m, budget)? {
            true => {}
            false => status = LpStatus::Unbounded,
        }
    }

    // read the solution
    let mut y = vec![0.0f64; n];
    for r in 0..m {
        y[tab.basis[r]] = tab.t[r][tab.n];
    }
    let x: Vec<f64> = (0..p.num_vars).map(|i| y[i] - y[p.num_vars + i]).collect();
    let objective_value: f64 = p.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
    let max_violation = p.violation(&x).max(0.0);
    Ok(LpOutcome { status, x, max_violation, objective_value, degenerate })
}

/// Feasibility with an interior preference: after Phase I succeeds, re-solve
/// maximizing the minimum slack over all rows (one auxiliary variable) and
/// return that point. Segment stitching is better conditioned away from the
/// polytope faces.
pub fn feasible_point(p: &LpProblem) -> Result<LpOutcome, LpError> {
    let mut probe = p.clone();
    probe.objective = vec![0.0; p.num_vars];
    let first = solve(&probe)?;
    if first.status != LpStatus::Feasible {
        return Ok(first);
    }
    // augmented problem over (x, s): a x + s <= b, maximize s
    let mut aug = LpProblem::feasibility(p.num_vars + 1);
    for (coef, rhs) in &p.rows {
        let mut c = coef.clone();
        c.push(1.0);
        aug.push_row(c, *rhs);
    }
    for (i, (lo, hi)) in p.var_bounds.iter().enumerate() {
        if let Some(hi) = hi {
            let mut c = vec![0.0; p.num_vars + 1];
            c[i] = 1.0;
            c[p.num_vars] = 1.0;
            aug.push_row(c, *hi);
        }
        if let Some(lo) = lo {
            let mut c = vec![0.0; p.num_vars + 1];
            c[i] = -1.0;
            c[p.num_vars] = 1.0;
            aug.push_row(c, -*lo);
        }
    }
    // keep the slack objective bounded even for unbounded feasible sets
    let mut cap = vec![0.0; p.num_vars + 1];
    cap[p.num_vars] = 1.0;
    aug.push_row(cap, 1e6);
    aug.objective = vec![0.0; p.num_vars + 1];
    aug.objective[p.num_vars] = -1.0;
    let centered = solve(&aug)?;
    if centered.status != LpStatus::Feasible {
        return Ok(first);
    }
    let x: Vec<f64> = centered.x[..p.num_vars].to_vec();
    let max_violation = p.violation(&x).max(0.0);
    Ok(LpOutcome {
        status: LpStatus::Feasible,
        x,
        max_violation,
        objective_value: 0.0,
        degenerate: first.degenerate || centered.degenerate,
    })
}
