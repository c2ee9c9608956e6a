//! Linear steering inequalities
//! `Σ s_ij ⟨ab⟩_ij + Σ sA_i ⟨a⟩_i + Σ sB_j ⟨b⟩_j ≤ L`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SteerError};
use crate::state::{correlation_table, CorrelationTable, MeasurementSet, TwoQubitState};

use super::MAX_STRATEGY_BITS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringInequality {
    pub m: usize,
    pub s: Vec<[f64; 3]>,
    #[serde(rename = "sA")]
    pub s_a: Vec<f64>,
    #[serde(rename = "sB")]
    pub s_b: [f64; 3],
    /// Bound over all local-hidden-state models.
    #[serde(rename = "L")]
    pub bound: f64,
}

impl SteeringInequality {
    /// Builds an inequality and computes its exact bound.
    pub fn new(s: Vec<[f64; 3]>, s_a: Vec<f64>, s_b: [f64; 3]) -> Result<Self> {
        if s.len() != s_a.len() {
            return Err(SteerError::Dimension { expected: s.len(), found: s_a.len() });
        }
        let bound = lhs_bound(&s, &s_a, &s_b)?;
        Ok(SteeringInequality { m: s.len(), s, s_a, s_b, bound })
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.s
            .iter()
            .flatten()
            .chain(&self.s_a)
            .chain(&self.s_b)
            .fold(0.0, |acc: f64, c| acc.max(c.abs()))
    }

    /// Multiplies every coefficient by `factor > 0` and recomputes `L`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(SteerError::domain("inequality scale factor must be positive"));
        }
        Self::new(
            self.s.iter().map(|r| r.map(|c| c * factor)).collect(),
            self.s_a.iter().map(|c| c * factor).collect(),
            self.s_b.map(|c| c * factor),
        )
    }

    /// Rescales so the largest coefficient has magnitude one.
    pub fn normalized(&self) -> Result<Self> {
        let k = self.max_abs_coefficient();
        if !(k > 0.0) || !k.is_finite() {
            return Err(SteerError::numeric("inequality has no nonzero coefficients"));
        }
        self.scaled(1.0 / k)
    }

    /// Left-hand side on a table of statistics.
    pub fn evaluate(&self, table: &CorrelationTable) -> Result<f64> {
        if table.m() != self.m {
            return Err(SteerError::Dimension { expected: self.m, found: table.m() });
        }
        let mut v: f64 = self.s_b.iter().zip(&table.b).map(|(s, b)| s * b).sum();
        for i in 0..self.m {
            v += self.s_a[i] * table.a[i];
            v += (0..3).map(|j| self.s[i][j] * table.ab[i][j]).sum::<f64>();
        }
        Ok(v)
    }

    /// `evaluate(table) − L`; positive values certify steering.
    pub fn violation(&self, table: &CorrelationTable) -> Result<f64> {
        Ok(self.evaluate(table)? - self.bound)
    }
}

/// Largest value of the functional over local-hidden-state models,
/// `max_E [Σ_i sA_i E_i + |Σ_i s_i E_i + sB|]` over all sign vectors `E`.
pub fn lhs_bound(s: &[[f64; 3]], s_a: &[f64], s_b: &[f64; 3]) -> Result<f64> {
    let m = s.len();
    if s_a.len() != m {
        return Err(SteerError::Dimension { expected: m, found: s_a.len() });
    }
    if m > MAX_STRATEGY_BITS {
        return Err(SteerError::Resource(format!(
            "bound enumeration limited to {MAX_STRATEGY_BITS} measurements, got {m}"
        )));
    }
    let value = |k: u64| {
        let mut scalar = 0.0;
        let mut v = *s_b;
        for i in 0..m {
            let e = if k >> i & 1 == 0 { 1.0 } else { -1.0 };
            scalar += e * s_a[i];
            for j in 0..3 {
                v[j] += e * s[i][j];
            }
        }
        scalar + (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    };
    Ok((0..1u64 << m).into_par_iter().map(value).reduce(|| f64::NEG_INFINITY, f64::max))
}

/// Left-hand side of `ineq` on the statistics of `state` under Alice's `meas`.
pub fn quantum_value(ineq: &SteeringInequality, state: &TwoQubitState, meas: &MeasurementSet) -> Result<f64> {
    if meas.len() != ineq.m {
        return Err(SteerError::Dimension { expected: ineq.m, found: meas.len() });
    }
    ineq.evaluate(&correlation_table(state, meas))
}
