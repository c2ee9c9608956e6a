//! The two-qubit state family, its assemblages and correlation tables.

use std::f64::consts::SQRT_2;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SteerError};
use crate::pauli::{
    self, complex, expectation, partial_trace, partial_transpose, projector, tensor, BlochVector,
    Outcome, Party, QubitOperator, TwoQubitOperator, PSD_TOL,
};

/// Trace tolerance for states built in code.
pub const TRACE_TOL: f64 = 1e-12;
/// Trace tolerance for user-supplied matrices, which arrive rounded.
pub const INGEST_TRACE_TOL: f64 = 1e-9;
/// No-signaling tolerance for generated assemblages.
pub const NO_SIGNALING_TOL: f64 = 1e-10;
/// No-signaling tolerance for assemblages read from files.
pub const INGEST_NO_SIGNALING_TOL: f64 = 1e-8;

/// Where a state came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Family { alpha: f64 },
    Custom,
}

/// A normalized, positive semidefinite two-qubit density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    op: TwoQubitOperator,
    provenance: Provenance,
}

impl TwoQubitState {
    /// Validates a user-supplied operator as a state.
    pub fn custom(op: TwoQubitOperator) -> Result<Self> {
        Self::validated(op, Provenance::Custom, INGEST_TRACE_TOL)
    }

    fn validated(op: TwoQubitOperator, provenance: Provenance, trace_tol: f64) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > trace_tol {
            return Err(SteerError::domain(format!("state trace must be 1, got {tr}")));
        }
        let lo = pauli::min_eigenvalue(&op)?;
        if lo < -PSD_TOL {
            return Err(SteerError::domain(format!(
                "state is not positive semidefinite (min eigenvalue {lo:.3e})"
            )));
        }
        Ok(TwoQubitState { op, provenance })
    }

    pub fn operator(&self) -> &TwoQubitOperator {
        &self.op
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Reduced state of `party`.
    pub fn reduced(&self, party: Party) -> QubitOperator {
        partial_trace(&self.op, party.other())
    }

    /// Smallest eigenvalue of the partial transpose.
    pub fn ppt_min_eigenvalue(&self) -> f64 {
        // the partial transpose of a Hermitian operator is Hermitian
        pauli::min_eigenvalue(&partial_transpose(&self.op)).expect("Hermitian by construction")
    }
}

/// The singlet projector `|ψ−⟩⟨ψ−|`, `|ψ−⟩ = (|01⟩ − |10⟩)/√2`.
pub fn singlet() -> TwoQubitOperator {
    let psi = [0.0, 1.0 / SQRT_2, -1.0 / SQRT_2, 0.0];
    TwoQubitOperator::from_matrix(Matrix4::from_fn(|r, c| complex(psi[r] * psi[c], 0.0)))
        .expect("real symmetric")
}

/// The separable noise `(2|0⟩⟨0| ⊗ I/2 + 3 I/2 ⊗ |1⟩⟨1|)/5`.
pub fn noise_state() -> TwoQubitOperator {
    let zero = QubitOperator::from_pauli(0.5, 0.0, 0.0, 0.5);
    let one = QubitOperator::from_pauli(0.5, 0.0, 0.0, -0.5);
    let half_id = QubitOperator::from_pauli(0.5, 0.0, 0.0, 0.0);
    let left = tensor(&zero, &half_id).scale(2.0);
    let right = tensor(&half_id, &one).scale(3.0);
    (&left + &right).scale(0.2)
}

/// `α Ψ− + (1 − α)/5 · (2|0⟩⟨0| ⊗ I/2 + 3 I/2 ⊗ |1⟩⟨1|)`.
pub fn make_state(alpha: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(SteerError::domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let op = &singlet().scale(alpha) + &noise_state().scale(1.0 - alpha);
    TwoQubitState::validated(op, Provenance::Family { alpha }, TRACE_TOL)
}

/// Minimum eigenvalue of the partial transpose of `make_state(alpha)`.
pub fn ppt_min_eigenvalue(alpha: f64) -> Result<f64> {
    Ok(make_state(alpha)?.ppt_min_eigenvalue())
}

/// Bisection width used by [`entanglement_threshold`].
pub const THRESHOLD_WIDTH: f64 = 1e-8;

/// The α at which the family starts to violate the PPT criterion.
pub fn entanglement_threshold() -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 1.0);
    let f_lo = ppt_min_eigenvalue(lo)?;
    let f_hi = ppt_min_eigenvalue(hi)?;
    if f_lo < -PSD_TOL || f_hi >= 0.0 {
        return Err(SteerError::numeric(format!(
            "PPT eigenvalue does not change sign on [0, 1] ({f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    while hi - lo > THRESHOLD_WIDTH {
        let mid = 0.5 * (lo + hi);
        if ppt_min_eigenvalue(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// An ordered list of measurement directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    directions: Vec<BlochVector>,
}

impl MeasurementSet {
    pub fn new(directions: Vec<BlochVector>) -> Result<Self> {
        if directions.is_empty() {
            return Err(SteerError::domain("a measurement set needs at least one direction"));
        }
        for d in &directions {
            d.ensure_unit()?;
        }
        Ok(MeasurementSet { directions })
    }

    /// Normalizes each direction before validating.
    pub fn normalized(directions: Vec<BlochVector>) -> Result<Self> {
        let dirs = directions
            .into_iter()
            .map(|d| d.normalized().ok_or_else(|| SteerError::domain("zero direction")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dirs)
    }

    pub fn directions(&self) -> &[BlochVector] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Appends directions.
    pub fn extended(&self, extra: impl IntoIterator<Item = BlochVector>) -> Result<Self> {
        let mut dirs = self.directions.clone();
        dirs.extend(extra);
        Self::new(dirs)
    }
}

/// Unnormalized conditional states `ρ_{a|i}` on the steered side.
///
/// `members[i][outcome.index()]` holds `ρ_{a|i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    pub members: Vec<[QubitOperator; 2]>,
}

impl Assemblage {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize, a: Outcome) -> &QubitOperator {
        &self.members[i][a.index()]
    }

    /// `Σ_a ρ_{a|i}`.
    pub fn marginal(&self, i: usize) -> QubitOperator {
        self.members[i][0] + self.members[i][1]
    }

    /// Statistics of the assemblage: `ab[i][j] = tr((ρ+ − ρ−)σ_j)`,
    /// `a[i] = tr(ρ+ − ρ−)`, `b[j] = tr((ρ+ + ρ−)σ_j)` from the first measurement.
    pub fn correlation_table(&self) -> CorrelationTable {
        let ab = self
            .members
            .iter()
            .map(|[p, m]| {
                let d = *p - *m;
                [2.0 * d.coeffs[1], 2.0 * d.coeffs[2], 2.0 * d.coeffs[3]]
            })
            .collect();
        let a = self.members.iter().map(|[p, m]| (*p - *m).trace()).collect();
        let sum = self.marginal(0);
        let b = [2.0 * sum.coeffs[1], 2.0 * sum.coeffs[2], 2.0 * sum.coeffs[3]];
        CorrelationTable { ab, a, b }
    }

    /// Invariant violations at the given tolerances; empty when valid.
    pub fn violations(&self, psd_tol: f64, no_signaling_tol: f64, trace_tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.members.is_empty() {
            out.push("assemblage has no members".to_string());
            return out;
        }
        for (i, pair) in self.members.iter().enumerate() {
            for (k, op) in pair.iter().enumerate() {
                let lo = op.min_eigenvalue();
                if lo < -psd_tol {
                    let a = if k == 0 { "+1" } else { "-1" };
                    out.push(format!("member (i={}, a={a}) has eigenvalue {lo:.3e}", i + 1));
                }
            }
            let tr = self.marginal(i).trace();
            if (tr - 1.0).abs() > trace_tol {
                out.push(format!("measurement i={} has total trace {tr}", i + 1));
            }
        }
        let dev = no_signaling_check(self);
        if dev > no_signaling_tol {
            out.push(format!("no-signaling deviation {dev:.3e} exceeds {no_signaling_tol:.1e}"));
        }
        out
    }
}

/// Largest elementwise deviation between `Σ_a ρ_{a|i}` and `Σ_a ρ_{a|i'}` over all pairs.
pub fn no_signaling_check(asm: &Assemblage) -> f64 {
    let sums: Vec<QubitOperator> = (0..asm.len()).map(|i| asm.marginal(i)).collect();
    let mut worst: f64 = 0.0;
    for (i, si) in sums.iter().enumerate() {
        for sj in &sums[i + 1..] {
            worst = worst.max(si.max_abs_diff(sj));
        }
    }
    worst
}

/// Conditional states prepared on the other side when `steering_party` measures.
pub fn assemblage_from_measurements(
    state: &TwoQubitState,
    meas: &MeasurementSet,
    steering_party: Party,
) -> Assemblage {
    let id = QubitOperator::identity();
    let members = meas
        .directions()
        .iter()
        .map(|dir| {
            Outcome::BOTH.map(|a| {
                let proj = projector(dir, a).expect("MeasurementSet holds unit vectors");
                let (lhs, traced) = match steering_party {
                    Party::A => (tensor(&proj, &id), Party::A),
                    Party::B => (tensor(&id, &proj), Party::B),
                };
                let product = TwoQubitOperator::from_matrix_unchecked(state.operator().matrix() * lhs.matrix());
                partial_trace(&product, traced)
            })
        })
        .collect();
    Assemblage { members }
}

/// Correlators `⟨ab⟩_ij`, marginals `⟨a⟩_i` of the steering party and `⟨b⟩_j` of the steered party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub ab: Vec<[f64; 3]>,
    pub a: Vec<f64>,
    pub b: [f64; 3],
}

impl CorrelationTable {
    pub fn m(&self) -> usize {
        self.ab.len()
    }

    pub fn zeros(m: usize) -> Self {
        CorrelationTable { ab: vec![[0.0; 3]; m], a: vec![0.0; m], b: [0.0; 3] }
    }

    /// Flattened entries in the order `a[0..m], b[0..3], ab[0][0..3], ab[1][0..3], …`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.m() + 3);
        out.extend_from_slice(&self.a);
        out.extend_from_slice(&self.b);
        for row in &self.ab {
            out.extend_from_slice(row);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &CorrelationTable) -> f64 {
        self.flatten()
            .iter()
            .zip(other.flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// `self + k·other`.
    pub fn add_scaled(&self, other: &CorrelationTable, k: f64) -> CorrelationTable {
        self.lerp_raw(other, k, 1.0)
    }

    fn lerp_raw(&self, other: &CorrelationTable, k: f64, keep: f64) -> CorrelationTable {
        let f = |x: f64, y: f64| keep * x + k * y;
        CorrelationTable {
            ab: self
                .ab
                .iter()
                .zip(&other.ab)
                .map(|(r, s)| [f(r[0], s[0]), f(r[1], s[1]), f(r[2], s[2])])
                .collect(),
            a: self.a.iter().zip(&other.a).map(|(x, y)| f(*x, *y)).collect(),
            b: [f(self.b[0], other.b[0]), f(self.b[1], other.b[1]), f(self.b[2], other.b[2])],
        }
    }

    /// `self + t (other − self)`.
    pub fn lerp(&self, other: &CorrelationTable, t: f64) -> CorrelationTable {
        self.lerp_raw(other, t, 1.0 - t)
    }

    /// The assemblage these statistics describe.
    pub fn to_assemblage(&self) -> Assemblage {
        let members = (0..self.m())
            .map(|i| {
                let sum = [1.0, self.b[0], self.b[1], self.b[2]];
                let diff = [self.a[i], self.ab[i][0], self.ab[i][1], self.ab[i][2]];
                Outcome::BOTH.map(|a| {
                    let s = a.sign();
                    let c: Vec<f64> = (0..4).map(|k| (sum[k] + s * diff[k]) / 4.0).collect();
                    QubitOperator::from_pauli(c[0], c[1], c[2], c[3])
                })
            })
            .collect();
        Assemblage { members }
    }
}

/// Statistics when Alice measures `meas` and Bob performs Pauli tomography.
pub fn correlation_table(state: &TwoQubitState, meas: &MeasurementSet) -> CorrelationTable {
    correlation_table_for(state, meas, Party::A)
}

/// Statistics with `steering_party` measuring `meas` and the other party doing tomography.
pub fn correlation_table_for(
    state: &TwoQubitState,
    meas: &MeasurementSet,
    steering_party: Party,
) -> CorrelationTable {
    let rho = state.operator();
    let id = QubitOperator::identity();
    let corr = |obs: &QubitOperator, tomo: &QubitOperator| match steering_party {
        Party::A => expectation(rho, obs, tomo),
        Party::B => expectation(rho, tomo, obs),
    };
    let ab = meas
        .directions()
        .iter()
        .map(|x| {
            let obs = QubitOperator::observable(x);
            [1, 2, 3].map(|j| corr(&obs, &QubitOperator::pauli(j)))
        })
        .collect();
    let a = meas
        .directions()
        .iter()
        .map(|x| corr(&QubitOperator::observable(x), &id))
        .collect();
    let b = [1, 2, 3].map(|j| corr(&id, &QubitOperator::pauli(j)));
    CorrelationTable { ab, a, b }
}
