//! Deciding whether statistics admit a local-hidden-state decomposition.
//!
//! A local-hidden-state model for `m` two-outcome measurements is a mixture
//! over the `2^m` deterministic response strategies `E ∈ {±1}^m`, each paired
//! with an unnormalized qubit state `ρ_E = (t_E I + r⃗_E·σ)/2`. Positivity of a
//! 2×2 operator is the second-order cone condition `|r⃗_E| ≤ t_E`, so the
//! decision problem is a second-order cone program with `4m + 4` equality
//! rows:
//!
//! ```text
//! Σ_E t_E          = 1
//! Σ_E E_i t_E      = ⟨a⟩_i
//! Σ_E r⃗_E          = ⟨b⟩
//! Σ_E E_i r⃗_E      = ⟨ab⟩_i
//! ```
//!
//! Every program here is posed along a path of targets `T(θ) = base + θ·slope`
//! whose `θ = 0` end is known to be local, and maximizes `θ` up to a cap. For a
//! fixed table the path scales the table towards white noise; for the state
//! family it is `α` itself. The optimal dual multipliers are a steering
//! inequality that is tight at `θ*`.

mod inequality;
pub mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SteerError};
use crate::pauli::BlochVector;
use crate::state::{correlation_table, make_state, Assemblage, CorrelationTable, MeasurementSet};

pub use inequality::{lhs_bound, quantum_value, SteeringInequality};
use solver::{Cone, ConeProblem, ConeSolution, ConeStatus, ConicSolver, Triplets};

/// Largest measurement count for which strategies are enumerated.
pub const MAX_STRATEGY_BITS: usize = 20;
/// Shortfall `cap − θ*` at or below which the target is declared local.
pub const FEASIBLE_TOL: f64 = 1e-9;
/// Shortfall above which the target is declared steerable.
pub const INFEASIBLE_TOL: f64 = 1e-6;
/// Largest deviation a feasible certificate may show from its target.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;
/// Smallest violation an infeasibility certificate must show.
pub const VIOLATION_TOL: f64 = 1e-7;

/// Outcome assignment `E_i = ±1` for each measurement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeterministicStrategy {
    pub signs: Vec<i8>,
}

impl DeterministicStrategy {
    /// Strategy number `k` in binary-counting order: bit `i` set means `E_i = −1`.
    pub fn from_index(k: u64, m: usize) -> Self {
        DeterministicStrategy { signs: (0..m).map(|i| if k >> i & 1 == 0 { 1 } else { -1 }).collect() }
    }

    pub fn sign(&self, i: usize) -> f64 {
        f64::from(self.signs[i])
    }
}

/// All `2^m` strategies, `(+1, …, +1)` first.
pub fn enumerate_strategies(m: usize) -> Result<Vec<DeterministicStrategy>> {
    if m == 0 {
        return Err(SteerError::domain("need at least one measurement"));
    }
    if m > MAX_STRATEGY_BITS {
        return Err(SteerError::Resource(format!(
            "{m} measurements exceed the enumeration guard of {MAX_STRATEGY_BITS}"
        )));
    }
    Ok((0..1u64 << m).map(|k| DeterministicStrategy::from_index(k, m)).collect())
}

/// One strategy of a local-hidden-state model with its state `(t I + r⃗·σ)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub strategy: DeterministicStrategy,
    pub weight: f64,
    pub vector: BlochVector,
}

/// A local-hidden-state certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStateEnsemble {
    pub m: usize,
    pub members: Vec<EnsembleMember>,
}

impl LocalStateEnsemble {
    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|e| e.weight).sum()
    }

    /// Largest `|r⃗| − t` over members; positive values are PSD violations.
    pub fn max_cone_violation(&self) -> f64 {
        self.members.iter().map(|e| e.vector.norm() - e.weight).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The statistics this model produces.
    pub fn reconstruct(&self) -> CorrelationTable {
        let mut t = CorrelationTable::zeros(self.m);
        for e in &self.members {
            for j in 0..3 {
                t.b[j] += e.vector.0[j];
            }
            for i in 0..self.m {
                let s = e.strategy.sign(i);
                t.a[i] += s * e.weight;
                for j in 0..3 {
                    t.ab[i][j] += s * e.vector.0[j];
                }
            }
        }
        t
    }

    /// Largest deviation from `target`, including the normalization.
    pub fn reconstruction_error(&self, target: &CorrelationTable) -> f64 {
        self.reconstruct().max_abs_diff(target).max((self.total_weight() - 1.0).abs())
    }

    /// Drops members with weight at or below `tol`.
    pub fn pruned(&self, tol: f64) -> LocalStateEnsemble {
        LocalStateEnsemble {
            m: self.m,
            members: self.members.iter().filter(|e| e.weight > tol).cloned().collect(),
        }
    }
}

/// The cone program for a path of targets `T(θ) = base + θ·slope`, `θ ≤ cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringProgram {
    m: usize,
    strategies: Vec<DeterministicStrategy>,
    base: CorrelationTable,
    slope: CorrelationTable,
    cap: f64,
}

fn check_strategies(m: usize, strategies: &[DeterministicStrategy]) -> Result<()> {
    if strategies.is_empty() {
        return Err(SteerError::domain("no strategies supplied"));
    }
    if let Some(bad) = strategies.iter().find(|s| s.signs.len() != m) {
        return Err(SteerError::Dimension { expected: m, found: bad.signs.len() });
    }
    Ok(())
}

fn check_table(t: &CorrelationTable) -> Result<()> {
    if t.a.len() != t.ab.len() {
        return Err(SteerError::Dimension { expected: t.ab.len(), found: t.a.len() });
    }
    if t.flatten().iter().any(|v| !v.is_finite()) {
        return Err(SteerError::domain("correlation table has non-finite entries"));
    }
    Ok(())
}

/// Program testing whether `table` admits a local-hidden-state model.
pub fn assemble_program(table: &CorrelationTable, strategies: Vec<DeterministicStrategy>) -> Result<SteeringProgram> {
    check_table(table)?;
    check_strategies(table.m(), &strategies)?;
    Ok(SteeringProgram {
        m: table.m(),
        strategies,
        base: CorrelationTable::zeros(table.m()),
        slope: table.clone(),
        cap: 1.0,
    })
}

/// [`assemble_program`] for an assemblage.
pub fn assemble_assemblage_program(asm: &Assemblage, strategies: Vec<DeterministicStrategy>) -> Result<SteeringProgram> {
    if asm.is_empty() {
        return Err(SteerError::domain("empty assemblage"));
    }
    assemble_program(&asm.correlation_table(), strategies)
}

/// Program maximizing `α` for the state family measured by Alice along `meas`.
pub fn assemble_family_program(meas: &MeasurementSet) -> Result<SteeringProgram> {
    let t0 = correlation_table(&make_state(0.0)?, meas);
    let t1 = correlation_table(&make_state(1.0)?, meas);
    let slope = t1.add_scaled(&t0, -1.0);
    Ok(SteeringProgram {
        m: meas.len(),
        strategies: enumerate_strategies(meas.len())?,
        base: t0,
        slope,
        cap: 1.0,
    })
}

impl SteeringProgram {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn strategies(&self) -> &[DeterministicStrategy] {
        &self.strategies
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn num_equalities(&self) -> usize {
        4 * self.m + 4
    }

    pub fn num_cones(&self) -> usize {
        self.strategies.len()
    }

    /// Target statistics at path parameter `theta`.
    pub fn target(&self, theta: f64) -> CorrelationTable {
        self.base.add_scaled(&self.slope, theta)
    }

    // Equality rows: 0 normalization, 1..=m ⟨a⟩_i, m+1..=m+3 ⟨b⟩_j,
    // then ⟨ab⟩_ij at m + 4 + 3i + j. This matches CorrelationTable::flatten
    // shifted by one.
    fn row_a(&self, i: usize) -> usize {
        1 + i
    }
    fn row_b(&self, j: usize) -> usize {
        1 + self.m + j
    }
    fn row_ab(&self, i: usize, j: usize) -> usize {
        4 + self.m + 3 * i + j
    }

    /// Variables `[θ, (t, r1, r2, r3) per strategy]`; minimizes `−θ`.
    pub fn to_cone_problem(&self) -> ConeProblem {
        let n_strat = self.strategies.len();
        let num_vars = 1 + 4 * n_strat;
        let mut eq = Triplets::new(self.num_equalities());
        let mut rhs = vec![0.0; self.num_equalities()];

        rhs[0] = 1.0;
        for i in 0..self.m {
            eq.push(self.row_a(i), 0, -self.slope.a[i]);
            rhs[self.row_a(i)] = self.base.a[i];
            for j in 0..3 {
                eq.push(self.row_ab(i, j), 0, -self.slope.ab[i][j]);
                rhs[self.row_ab(i, j)] = self.base.ab[i][j];
            }
        }
        for j in 0..3 {
            eq.push(self.row_b(j), 0, -self.slope.b[j]);
            rhs[self.row_b(j)] = self.base.b[j];
        }
        for (k, strat) in self.strategies.iter().enumerate() {
            let col = 1 + 4 * k;
            eq.push(0, col, 1.0);
            for j in 0..3 {
                eq.push(self.row_b(j), col + 1 + j, 1.0);
            }
            for i in 0..self.m {
                let e = strat.sign(i);
                eq.push(self.row_a(i), col, e);
                for j in 0..3 {
                    eq.push(self.row_ab(i, j), col + 1 + j, e);
                }
            }
        }

        // (t, r⃗) ∈ SOC for every strategy, then cap − θ ≥ 0.
        let mut g = Triplets::new(4 * n_strat + 1);
        for k in 0..n_strat {
            for c in 0..4 {
                g.push(4 * k + c, 1 + 4 * k + c, -1.0);
            }
        }
        g.push(4 * n_strat, 0, 1.0);
        let mut h = vec![0.0; 4 * n_strat + 1];
        h[4 * n_strat] = self.cap;
        let mut cones = vec![Cone::SecondOrder(4); n_strat];
        cones.push(Cone::Nonnegative(1));

        let mut objective = vec![0.0; num_vars];
        objective[0] = -1.0;
        ConeProblem { num_vars, objective, eq_matrix: eq, eq_rhs: rhs, cone_matrix: g, cone_rhs: h, cones }
    }

    fn ensemble_from(&self, x: &[f64]) -> LocalStateEnsemble {
        let members = self
            .strategies
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let c = 1 + 4 * k;
                EnsembleMember {
                    strategy: s.clone(),
                    weight: x[c],
                    vector: BlochVector::new(x[c + 1], x[c + 2], x[c + 3]),
                }
            })
            .collect();
        LocalStateEnsemble { m: self.m, members }
    }

    /// The inequality read off the equality multipliers, normalized, with exact bound.
    fn dual_inequality(&self, y: &[f64]) -> Result<SteeringInequality> {
        if y.len() != self.num_equalities() {
            return Err(SteerError::Dimension { expected: self.num_equalities(), found: y.len() });
        }
        // For every local model x, y·(A x) ≥ 0, i.e. −y_rest·T ≤ y_0.
        let s = (0..self.m).map(|i| [0, 1, 2].map(|j| -y[self.row_ab(i, j)])).collect();
        let s_a = (0..self.m).map(|i| -y[self.row_a(i)]).collect();
        let s_b = [0, 1, 2].map(|j| -y[self.row_b(j)]);
        SteeringInequality::new(s, s_a, s_b)?.normalized()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    NumericallyAmbiguous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    /// `cap − θ*`.
    pub shortfall: f64,
    /// Deviation of the ensemble from the capped target.
    pub reconstruction: f64,
    /// Violation of the dual inequality at the capped target.
    pub violation: Option<f64>,
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub status: FeasibilityStatus,
    /// Optimal path parameter.
    pub theta_star: f64,
    /// Local model reproducing the table at `theta_star`.
    pub ensemble: Option<LocalStateEnsemble>,
    pub inequality: Option<SteeringInequality>,
    pub residuals: Residuals,
}

/// Solves `program` and classifies its capped target.
pub fn solve_feasibility(program: &SteeringProgram, solver: &dyn ConicSolver) -> Result<FeasibilityReport> {
    let sol = solver.solve(&program.to_cone_problem())?;
    report_from_solution(program, &sol)
}

fn report_from_solution(program: &SteeringProgram, sol: &ConeSolution) -> Result<FeasibilityReport> {
    match sol.status {
        ConeStatus::Optimal | ConeStatus::AlmostOptimal => {}
        other => {
            // θ = 0 is always attainable and θ ≤ cap, so neither certificate can be genuine.
            return Err(SteerError::Numeric {
                message: format!("bounded feasible program reported {other:?}"),
                primal_residual: sol.primal_residual,
                dual_residual: sol.dual_residual,
            });
        }
    }
    let theta = sol.x[0];
    let shortfall = program.cap - theta;
    let target = program.target(program.cap);
    let ensemble = program.ensemble_from(&sol.x);
    let reconstruction = ensemble.reconstruction_error(&target);
    let inequality = if shortfall > FEASIBLE_TOL { program.dual_inequality(&sol.y).ok() } else { None };
    let violation = match &inequality {
        Some(ineq) => Some(ineq.violation(&target)?),
        None => None,
    };

    let status = if shortfall <= FEASIBLE_TOL && reconstruction <= RECONSTRUCTION_TOL {
        FeasibilityStatus::Feasible
    } else if shortfall > INFEASIBLE_TOL && violation.is_some_and(|v| v > VIOLATION_TOL) {
        FeasibilityStatus::Infeasible
    } else {
        FeasibilityStatus::NumericallyAmbiguous
    };
    Ok(FeasibilityReport {
        status,
        theta_star: theta,
        ensemble: Some(ensemble),
        inequality,
        residuals: Residuals {
            primal: sol.primal_residual,
            dual: sol.dual_residual,
            shortfall,
            reconstruction,
            violation,
            iterations: sol.iterations,
        },
    })
}

/// Result of maximizing `α` for one measurement set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaStar {
    pub alpha_star: f64,
    /// Set when the statistics stay local up to `α = 1`.
    pub clamped: bool,
    /// Report for the `α = 1` end of the path; its ensemble sits at `α*`.
    pub report: FeasibilityReport,
}

/// Largest `α` for which Alice's statistics along `meas` remain local, capped at 1.
pub fn max_alpha(meas: &MeasurementSet, solver: &dyn ConicSolver) -> Result<AlphaStar> {
    let program = assemble_family_program(meas)?;
    let report = solve_feasibility(&program, solver)?;
    let clamped = report.residuals.shortfall <= FEASIBLE_TOL;
    let alpha_star = if clamped { 1.0 } else { report.theta_star };
    Ok(AlphaStar { alpha_star, clamped, report })
}

/// Bisection on `α` with fixed-table programs; cross-check for [`max_alpha`].
pub fn max_alpha_bisection(meas: &MeasurementSet, solver: &dyn ConicSolver, width: f64) -> Result<f64> {
    let strategies = enumerate_strategies(meas.len())?;
    let local = |alpha: f64| -> Result<bool> {
        let table = correlation_table(&make_state(alpha)?, meas);
        let report = solve_feasibility(&assemble_program(&table, strategies.clone())?, solver)?;
        Ok(report.residuals.shortfall <= INFEASIBLE_TOL)
    };
    if local(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if local(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The steering inequality carried by a report that is not feasible.
pub fn extract_inequality(report: &FeasibilityReport, meas: &MeasurementSet) -> Result<SteeringInequality> {
    if report.status == FeasibilityStatus::Feasible {
        return Err(SteerError::domain("a feasible report carries no steering inequality"));
    }
    let ineq = report
        .inequality
        .clone()
        .ok_or_else(|| SteerError::domain("report has no dual certificate"))?;
    if ineq.m != meas.len() {
        return Err(SteerError::Dimension { expected: meas.len(), found: ineq.m });
    }
    Ok(ineq)
}
