//! Conic solver interface and the bundled Clarabel backend.
//!
//! Problems are posed as
//!
//! ```text
//! minimize    c·x
//! subject to  A x = b
//!             h − G x ∈ K1 × K2 × …
//! ```
//!
//! where each `Ki` is a nonnegative orthant or a second-order cone
//! `{(t, r) : |r| ≤ t}`. Duals are signed so that at optimality
//! `c + Aᵀy + Gᵀz = 0` with `z ∈ K*`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::error::{Result, SteerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    Nonnegative(usize),
    SecondOrder(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Nonnegative(d) | Cone::SecondOrder(d) => d,
        }
    }
}

/// Sparse matrix as `(row, col, value)` triplets without duplicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Triplets {
    pub rows: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(rows: usize) -> Self {
        Triplets { rows, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    /// `M x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            out[r] += v * x[c];
        }
        out
    }

    /// `Mᵀ y`.
    pub fn mul_transpose(&self, y: &[f64], cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; cols];
        for &(r, c, v) in &self.entries {
            out[c] += v * y[r];
        }
        out
    }
}

/// A linear objective over equality constraints and a product of cones.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub eq_matrix: Triplets,
    pub eq_rhs: Vec<f64>,
    pub cone_matrix: Triplets,
    pub cone_rhs: Vec<f64>,
    pub cones: Vec<Cone>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeStatus {
    Optimal,
    /// Optimal to the solver's reduced accuracy.
    AlmostOptimal,
    PrimalInfeasible,
    DualInfeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSolution {
    pub status: ConeStatus,
    pub x: Vec<f64>,
    /// Multipliers of the equality rows.
    pub y: Vec<f64>,
    /// Multipliers of the cone rows, in the dual cone.
    pub z: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: u32,
}

/// Anything that can solve a [`ConeProblem`].
pub trait ConicSolver: Sync {
    fn solve(&self, problem: &ConeProblem) -> Result<ConeSolution>;
}

/// Tolerance profile for the bundled interior-point solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarabelSolver {
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_feas: f64,
    pub max_iter: u32,
}

impl Default for ClarabelSolver {
    fn default() -> Self {
        ClarabelSolver { tol_gap_abs: 1e-10, tol_gap_rel: 1e-10, tol_feas: 1e-10, max_iter: 200 }
    }
}

fn to_csc(t: &Triplets, offset: usize, cols: usize, rows: usize, out: &mut (Vec<usize>, Vec<usize>, Vec<f64>)) {
    for &(r, c, v) in &t.entries {
        debug_assert!(c < cols && r + offset < rows);
        out.0.push(r + offset);
        out.1.push(c);
        out.2.push(v);
    }
}

impl ConicSolver for ClarabelSolver {
    fn solve(&self, p: &ConeProblem) -> Result<ConeSolution> {
        let n = p.num_vars;
        let n_eq = p.eq_matrix.rows;
        let n_cone: usize = p.cones.iter().map(Cone::dim).sum();
        if p.eq_rhs.len() != n_eq || p.cone_rhs.len() != n_cone || p.cone_matrix.rows != n_cone {
            return Err(SteerError::Dimension { expected: n_cone, found: p.cone_matrix.rows });
        }
        let rows = n_eq + n_cone;
        let mut trip = (Vec::new(), Vec::new(), Vec::new());
        to_csc(&p.eq_matrix, 0, n, rows, &mut trip);
        to_csc(&p.cone_matrix, n_eq, n, rows, &mut trip);
        let a = CscMatrix::new_from_triplets(rows, n, trip.0, trip.1, trip.2);
        let pmat = CscMatrix::<f64>::zeros((n, n));
        let b: Vec<f64> = p.eq_rhs.iter().chain(&p.cone_rhs).copied().collect();

        let mut cones = Vec::with_capacity(p.cones.len() + 1);
        if n_eq > 0 {
            cones.push(SupportedConeT::ZeroConeT(n_eq));
        }
        for c in &p.cones {
            cones.push(match *c {
                Cone::Nonnegative(d) => SupportedConeT::NonnegativeConeT(d),
                Cone::SecondOrder(d) => SupportedConeT::SecondOrderConeT(d),
            });
        }

        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .tol_gap_abs(self.tol_gap_abs)
            .tol_gap_rel(self.tol_gap_rel)
            .tol_feas(self.tol_feas)
            .max_iter(self.max_iter)
            .build()
            .map_err(|e| SteerError::numeric(format!("solver settings: {e}")))?;
        let mut solver = DefaultSolver::new(&pmat, &p.objective, &a, &b, &cones, settings)
            .map_err(|e| SteerError::numeric(format!("solver setup: {e:?}")))?;
        solver.solve();

        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved => ConeStatus::Optimal,
            SolverStatus::AlmostSolved => ConeStatus::AlmostOptimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => ConeStatus::PrimalInfeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => ConeStatus::DualInfeasible,
            other => {
                return Err(SteerError::Numeric {
                    message: format!("conic solver stopped with status {other:?}"),
                    primal_residual: sol.r_prim,
                    dual_residual: sol.r_dual,
                })
            }
        };
        // Clarabel stacks the equality rows first; its z on them is our y.
        Ok(ConeSolution {
            status,
            x: sol.x.clone(),
            y: sol.z[..n_eq].to_vec(),
            z: sol.z[n_eq..].to_vec(),
            primal_objective: sol.obj_val,
            dual_objective: sol.obj_val_dual,
            primal_residual: sol.r_prim,
            dual_residual: sol.r_dual,
            iterations: sol.iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_socp() {
        // minimize −x0 subject to x0 + x1 = 1, (1, x0, x1) ∈ SOC(3)
        let mut eq = Triplets::new(1);
        eq.push(0, 0, 1.0);
        eq.push(0, 1, 1.0);
        let mut g = Triplets::new(3);
        g.push(1, 0, -1.0);
        g.push(2, 1, -1.0);
        let p = ConeProblem {
            num_vars: 2,
            objective: vec![-1.0, 0.0],
            eq_matrix: eq,
            eq_rhs: vec![1.0],
            cone_matrix: g,
            cone_rhs: vec![1.0, 0.0, 0.0],
            cones: vec![Cone::SecondOrder(3)],
        };
        let s = ClarabelSolver::default().solve(&p).unwrap();
        assert_eq!(s.status, ConeStatus::Optimal);
        // x0² + (1 − x0)² = 1 → x0 = 1
        assert!((s.x[0] - 1.0).abs() < 1e-7, "{:?}", s.x);
        // stationarity c + Aᵀy + Gᵀz = 0
        let r0 = -1.0 + s.y[0] - s.z[1];
        let r1 = s.y[0] - s.z[2];
        assert!(r0.abs() < 1e-7 && r1.abs() < 1e-7);
    }

    #[test]
    fn infeasible_problem_is_reported() {
        // x0 = 2 and (1, x0) ∈ SOC(2)
        let mut eq = Triplets::new(1);
        eq.push(0, 0, 1.0);
        let mut g = Triplets::new(2);
        g.push(1, 0, -1.0);
        let p = ConeProblem {
            num_vars: 1,
            objective: vec![0.0],
            eq_matrix: eq,
            eq_rhs: vec![2.0],
            cone_matrix: g,
            cone_rhs: vec![1.0, 0.0],
            cones: vec![Cone::SecondOrder(2)],
        };
        let s = ClarabelSolver::default().solve(&p).unwrap();
        assert_eq!(s.status, ConeStatus::PrimalInfeasible);
    }
}
