//! Qubit and two-qubit operator algebra.
//!
//! Single-qubit operators are stored as real Pauli coefficients
//! `(c0, c1, c2, c3)` with `Op = c0 I + c1 σ1 + c2 σ2 + c3 σ3`. Two-qubit
//! operators are dense 4×4 complex matrices in the basis `|i⟩_A |j⟩_B ↦ 2i + j`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SteerError};

/// Tolerance on the norm of a measurement direction.
pub const UNIT_TOL: f64 = 1e-9;
/// Anti-Hermitian residue above which an ingested matrix is rejected.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-8;
/// Eigenvalue floor for positive semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-10;
/// Traces below this are treated as a vanishing operator.
pub const DEGENERATE_WEIGHT: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// The two parties sharing a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

/// Outcome of a two-outcome projective measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(SteerError::domain(format!("outcome must be ±1, got {other}"))),
        }
    }

    /// Index used for storage: `+1 ↦ 0`, `−1 ↦ 1`.
    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }
}

/// A real 3-vector on or inside the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector([0.0, 0.0, 0.0]);
    pub const X: BlochVector = BlochVector([1.0, 0.0, 0.0]);
    pub const Y: BlochVector = BlochVector([0.0, 1.0, 0.0]);
    pub const Z: BlochVector = BlochVector([0.0, 0.0, 1.0]);

    pub fn new(r1: f64, r2: f64, r3: f64) -> Self {
        BlochVector([r1, r2, r3])
    }

    /// Direction with polar angle `theta` and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        BlochVector([st * cp, st * sp, ct])
    }

    /// Checked constructor for measurement directions.
    pub fn unit(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        let v = BlochVector([r1, r2, r3]);
        v.ensure_unit()?;
        Ok(v)
    }

    pub fn ensure_unit(&self) -> Result<()> {
        let n = self.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(SteerError::domain(format!(
                "measurement direction must be a unit vector, |r| = {n}"
            )));
        }
        Ok(())
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, o: &BlochVector) -> BlochVector {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        BlochVector([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Rescales to unit length. Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<BlochVector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self * (1.0 / n))
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }
    pub fn y(&self) -> f64 {
        self.0[1]
    }
    pub fn z(&self) -> f64 {
        self.0[2]
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;
    fn mul(self, s: f64) -> BlochVector {
        BlochVector([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        self * -1.0
    }
}

/// Hermitian 2×2 operator in Pauli coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QubitOperator {
    /// `(c0, c1, c2, c3)` with `Op = c0 I + Σ_j c_j σ_j`.
    pub coeffs: [f64; 4],
}

impl QubitOperator {
    pub const fn from_pauli(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        QubitOperator { coeffs: [c0, c1, c2, c3] }
    }

    pub const fn zero() -> Self {
        Self::from_pauli(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn identity() -> Self {
        Self::from_pauli(1.0, 0.0, 0.0, 0.0)
    }

    /// `σ_j` for `j = 1, 2, 3`; `j = 0` gives the identity.
    pub fn pauli(j: usize) -> Self {
        assert!(j < 4, "Pauli index out of range: {j}");
        let mut coeffs = [0.0; 4];
        coeffs[j] = 1.0;
        QubitOperator { coeffs }
    }

    /// The observable `r·σ`.
    pub fn observable(r: &BlochVector) -> Self {
        Self::from_pauli(0.0, r.0[0], r.0[1], r.0[2])
    }

    /// Ingests a 2×2 matrix, symmetrizing `(M + M†)/2`.
    pub fn from_matrix(m: &Matrix2<Complex64>) -> Result<Self> {
        let residue = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) / 2.0;
        if !residue.is_finite() || residue > HERMITIAN_REJECT_TOL {
            return Err(SteerError::domain(format!(
                "matrix is not Hermitian (anti-Hermitian residue {residue:.3e})"
            )));
        }
        let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        // tr(H σ_j) / 2
        let c0 = (h[(0, 0)].re + h[(1, 1)].re) / 2.0;
        let c1 = h[(0, 1)].re;
        let c2 = -h[(0, 1)].im;
        let c3 = (h[(0, 0)].re - h[(1, 1)].re) / 2.0;
        Ok(Self::from_pauli(c0, c1, c2, c3))
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        let [c0, c1, c2, c3] = self.coeffs;
        Matrix2::new(
            Complex64::new(c0 + c3, 0.0),
            Complex64::new(c1, -c2),
            Complex64::new(c1, c2),
            Complex64::new(c0 - c3, 0.0),
        )
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.coeffs[0]
    }

    /// Bloch part `(c1, c2, c3)`.
    pub fn vector(&self) -> BlochVector {
        BlochVector([self.coeffs[1], self.coeffs[2], self.coeffs[3]])
    }

    /// Eigenvalues in ascending order: `c0 ∓ |c⃗|`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let n = self.vector().norm();
        [self.coeffs[0] - n, self.coeffs[0] + n]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `tr(self · other)`.
    pub fn trace_product(&self, other: &QubitOperator) -> f64 {
        2.0 * self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Largest absolute deviation between matrix entries.
    pub fn max_abs_diff(&self, other: &QubitOperator) -> f64 {
        let d = self.matrix() - other.matrix();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for QubitOperator {
    type Output = QubitOperator;
    fn add(self, o: QubitOperator) -> QubitOperator {
        let mut coeffs = self.coeffs;
        coeffs.iter_mut().zip(o.coeffs).for_each(|(a, b)| *a += b);
        QubitOperator { coeffs }
    }
}

impl Sub for QubitOperator {
    type Output = QubitOperator;
    fn sub(self, o: QubitOperator) -> QubitOperator {
        self + o * -1.0
    }
}

impl Mul<f64> for QubitOperator {
    type Output = QubitOperator;
    fn mul(self, s: f64) -> QubitOperator {
        QubitOperator { coeffs: self.coeffs.map(|c| c * s) }
    }
}

/// A 4×4 Hermitian operator on two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitOperator {
    matrix: Matrix4<Complex64>,
}

impl TwoQubitOperator {
    /// Ingests a 4×4 matrix, symmetrizing `(M + M†)/2`.
    pub fn from_matrix(m: Matrix4<Complex64>) -> Result<Self> {
        let residue = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) / 2.0;
        if !residue.is_finite() || residue > HERMITIAN_REJECT_TOL {
            return Err(SteerError::domain(format!(
                "matrix is not Hermitian (anti-Hermitian residue {residue:.3e})"
            )));
        }
        Ok(TwoQubitOperator { matrix: (m + m.adjoint()) * Complex64::new(0.5, 0.0) })
    }

    /// Wraps a matrix without the Hermiticity check.
    pub(crate) fn from_matrix_unchecked(matrix: Matrix4<Complex64>) -> Self {
        TwoQubitOperator { matrix }
    }

    pub fn identity() -> Self {
        TwoQubitOperator { matrix: Matrix4::identity() }
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        TwoQubitOperator { matrix: self.matrix * Complex64::new(s, 0.0) }
    }

    pub fn max_abs_diff(&self, other: &TwoQubitOperator) -> f64 {
        (self.matrix - other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Real and imaginary parts of every entry, row-major.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..4)
            .map(|r| (0..4).map(|c| [self.matrix[(r, c)].re, self.matrix[(r, c)].im]).collect())
            .collect()
    }

    pub fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err(SteerError::Invalid("two-qubit matrix must be 4×4".into()));
        }
        let m = Matrix4::from_fn(|r, c| Complex64::new(rows[r][c][0], rows[r][c][1]));
        Self::from_matrix(m)
    }
}

impl Add for &TwoQubitOperator {
    type Output = TwoQubitOperator;
    fn add(self, o: &TwoQubitOperator) -> TwoQubitOperator {
        TwoQubitOperator { matrix: self.matrix + o.matrix }
    }
}

impl Sub for &TwoQubitOperator {
    type Output = TwoQubitOperator;
    fn sub(self, o: &TwoQubitOperator) -> TwoQubitOperator {
        TwoQubitOperator { matrix: self.matrix - o.matrix }
    }
}

/// `(weight/2)(I + r·σ)`, an operator of trace `weight`.
pub fn bloch_to_operator(r: &BlochVector, weight: f64) -> Result<QubitOperator> {
    if !(weight >= 0.0) {
        return Err(SteerError::domain(format!("weight must be non-negative, got {weight}")));
    }
    let h = weight / 2.0;
    Ok(QubitOperator::from_pauli(h, h * r.0[0], h * r.0[1], h * r.0[2]))
}

/// Trace and normalized Bloch vector of a qubit operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDecomposition {
    pub weight: f64,
    pub vector: BlochVector,
    /// Set when the trace is too small to normalize by.
    pub degenerate: bool,
}

/// Inverse of [`bloch_to_operator`].
pub fn operator_to_bloch(op: &QubitOperator) -> BlochDecomposition {
    let weight = op.trace();
    if weight <= DEGENERATE_WEIGHT {
        return BlochDecomposition { weight, vector: BlochVector::ZERO, degenerate: true };
    }
    // r_j = tr(op σ_j) / tr(op) = 2 c_j / (2 c0)
    let vector = op.vector() * (2.0 / weight);
    BlochDecomposition { weight, vector, degenerate: false }
}

/// Projector `(I + a x·σ)/2` onto outcome `a` of the measurement along `direction`.
pub fn projector(direction: &BlochVector, outcome: Outcome) -> Result<QubitOperator> {
    direction.ensure_unit()?;
    bloch_to_operator(&(*direction * outcome.sign()), 1.0)
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &QubitOperator, b: &QubitOperator) -> TwoQubitOperator {
    let ma = a.matrix();
    let mb = b.matrix();
    TwoQubitOperator::from_matrix_unchecked(ma.kronecker(&mb))
}

/// Traces out `traced_party` and returns the operator on the other qubit.
pub fn partial_trace(op: &TwoQubitOperator, traced_party: Party) -> QubitOperator {
    let m = &op.matrix;
    let mut out = Matrix2::<Complex64>::zeros();
    for r in 0..2 {
        for c in 0..2 {
            out[(r, c)] = match traced_party {
                // (tr_A ρ)_{jj'} = Σ_i ρ_{(i,j),(i,j')}
                Party::A => m[(r, c)] + m[(2 + r, 2 + c)],
                // (tr_B ρ)_{ii'} = Σ_j ρ_{(i,j),(i',j)}
                Party::B => m[(2 * r, 2 * c)] + m[(2 * r + 1, 2 * c + 1)],
            };
        }
    }
    // The result of a Hermitian input is Hermitian up to rounding.
    QubitOperator::from_matrix(&out).unwrap_or_else(|_| {
        let h = (out + out.adjoint()) * Complex64::new(0.5, 0.0);
        QubitOperator::from_pauli(
            (h[(0, 0)].re + h[(1, 1)].re) / 2.0,
            h[(0, 1)].re,
            -h[(0, 1)].im,
            (h[(0, 0)].re - h[(1, 1)].re) / 2.0,
        )
    })
}

/// Transpose on party B's indices.
pub fn partial_transpose(op: &TwoQubitOperator) -> TwoQubitOperator {
    let m = &op.matrix;
    let pt = Matrix4::from_fn(|r, c| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (c / 2, c % 2);
        m[(2 * i + l, 2 * k + j)]
    });
    TwoQubitOperator::from_matrix_unchecked(pt)
}

/// All eigenvalues of a Hermitian two-qubit operator, ascending.
pub fn eigenvalues(op: &TwoQubitOperator) -> Result<[f64; 4]> {
    let m = &op.matrix;
    let residue = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) / 2.0;
    if !residue.is_finite() || residue > HERMITIAN_REJECT_TOL {
        return Err(SteerError::domain(format!(
            "eigenvalues requested for a non-Hermitian operator (residue {residue:.3e})"
        )));
    }
    let ev = m.symmetric_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(f64::total_cmp);
    Ok(out)
}

pub fn min_eigenvalue(op: &TwoQubitOperator) -> Result<f64> {
    Ok(eigenvalues(op)?[0])
}

/// `Re tr(state · obs_a ⊗ obs_b)`.
pub fn expectation(state: &TwoQubitOperator, obs_a: &QubitOperator, obs_b: &QubitOperator) -> f64 {
    let joint = tensor(obs_a, obs_b);
    (state.matrix * joint.matrix).trace().re
}

pub(crate) fn complex(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrices as explicit 2×2 arrays, `σ_0 = I`.
pub fn pauli_matrix(j: usize) -> Matrix2<Complex64> {
    match j {
        0 => Matrix2::new(ONE, ZERO, ZERO, ONE),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index out of range: {j}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ket_bra(i: usize) -> QubitOperator {
        let mut m = Matrix2::zeros();
        m[(i, i)] = ONE;
        QubitOperator::from_matrix(&m).unwrap()
    }

    fn singlet() -> TwoQubitOperator {
        // (|01⟩ − |10⟩)/√2
        let psi = [0.0, 1.0, -1.0, 0.0].map(|v: f64| v / 2f64.sqrt());
        let m = Matrix4::from_fn(|r, c| complex(psi[r] * psi[c], 0.0));
        TwoQubitOperator::from_matrix(m).unwrap()
    }

    #[test]
    fn bloch_to_operator_examples() {
        let north = bloch_to_operator(&BlochVector::Z, 1.0).unwrap();
        assert_eq!(north, ket_bra(0));
        let mixed = bloch_to_operator(&BlochVector::ZERO, 1.0).unwrap();
        assert_eq!(mixed.matrix(), Matrix2::identity() * complex(0.5, 0.0));
        let plus = bloch_to_operator(&BlochVector::X, 0.5).unwrap();
        assert_eq!(plus.eigenvalues(), [0.0, 0.5]);
        assert_abs_diff_eq!(plus.trace(), 0.5);
        assert!(bloch_to_operator(&BlochVector::Z, -0.1).is_err());
    }

    #[test]
    fn operator_to_bloch_examples() {
        let d = operator_to_bloch(&QubitOperator::from_pauli(0.5, 0.0, 0.0, 0.0));
        assert_eq!((d.weight, d.vector, d.degenerate), (1.0, BlochVector::ZERO, false));
        let d = operator_to_bloch(&ket_bra(1));
        assert_eq!(d.vector, BlochVector::new(0.0, 0.0, -1.0));
        let d = operator_to_bloch(&bloch_to_operator(&BlochVector::Z, 0.3).unwrap());
        assert_abs_diff_eq!(d.weight, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(d.vector.z(), 1.0, epsilon = 1e-15);
        let d = operator_to_bloch(&QubitOperator::zero());
        assert!(d.degenerate);
    }

    #[test]
    fn projector_examples() {
        assert_eq!(projector(&BlochVector::Z, Outcome::Plus).unwrap(), ket_bra(0));
        assert_eq!(projector(&BlochVector::Z, Outcome::Minus).unwrap(), ket_bra(1));
        assert_eq!(
            projector(&BlochVector::X, Outcome::Plus).unwrap(),
            QubitOperator::from_pauli(0.5, 0.5, 0.0, 0.0)
        );
        assert!(projector(&BlochVector::new(1.0, 1.0, 0.0), Outcome::Plus).is_err());
    }

    #[test]
    fn tensor_basis_ordering() {
        let id = tensor(&QubitOperator::identity(), &QubitOperator::identity());
        assert_eq!(id, TwoQubitOperator::identity());
        let d = tensor(&ket_bra(0), &ket_bra(1));
        let expected = Matrix4::from_diagonal(&nalgebra::Vector4::new(ZERO, ONE, ZERO, ZERO));
        assert_eq!(*d.matrix(), expected);
        let zz = tensor(&QubitOperator::pauli(3), &QubitOperator::pauli(3));
        let expected = Matrix4::from_diagonal(&nalgebra::Vector4::new(ONE, -ONE, -ONE, ONE));
        assert_eq!(*zz.matrix(), expected);
    }

    #[test]
    fn partial_trace_examples() {
        let red = partial_trace(&singlet(), Party::B);
        assert_abs_diff_eq!(red.max_abs_diff(&QubitOperator::from_pauli(0.5, 0.0, 0.0, 0.0)), 0.0, epsilon = 1e-15);
        let red = partial_trace(&tensor(&ket_bra(0), &ket_bra(1)), Party::A);
        assert_eq!(red, ket_bra(1));
        // tr_B of |0⟩⟨0| ⊗ |1⟩⟨1| leaves A in |0⟩
        let red = partial_trace(&tensor(&ket_bra(0), &ket_bra(1)), Party::B);
        assert_eq!(red, ket_bra(0));
    }

    #[test]
    fn partial_transpose_examples() {
        let quarter = TwoQubitOperator::identity().scale(0.25);
        assert_eq!(partial_transpose(&quarter), quarter);
        let pt = partial_transpose(&singlet());
        assert_abs_diff_eq!(min_eigenvalue(&pt).unwrap(), -0.5, epsilon = 1e-12);
        assert_eq!(partial_transpose(&pt), singlet());
    }

    #[test]
    fn min_eigenvalue_examples() {
        let quarter = TwoQubitOperator::identity().scale(0.25);
        assert_abs_diff_eq!(min_eigenvalue(&quarter).unwrap(), 0.25, epsilon = 1e-14);
        let zz = tensor(&QubitOperator::pauli(3), &QubitOperator::pauli(3));
        assert_abs_diff_eq!(min_eigenvalue(&zz).unwrap(), -1.0, epsilon = 1e-14);
        let mut bad = Matrix4::<Complex64>::zeros();
        bad[(0, 1)] = ONE;
        assert!(min_eigenvalue(&TwoQubitOperator::from_matrix_unchecked(bad)).is_err());
        assert!(TwoQubitOperator::from_matrix(bad).is_err());
    }

    #[test]
    fn expectation_examples() {
        let s3 = QubitOperator::pauli(3);
        assert_abs_diff_eq!(expectation(&singlet(), &s3, &s3), -1.0, epsilon = 1e-14);
        let quarter = TwoQubitOperator::identity().scale(0.25);
        let v = expectation(&quarter, &QubitOperator::pauli(1), &QubitOperator::pauli(2));
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pauli_coefficients_match_explicit_matrices() {
        for j in 0..4 {
            assert_eq!(QubitOperator::pauli(j).matrix(), pauli_matrix(j));
        }
    }

    #[test]
    fn small_hermitian_rounding_is_tolerated() {
        let mut m = ket_bra(0).matrix();
        m[(0, 1)] = complex(0.0, 1e-10);
        let op = QubitOperator::from_matrix(&m).unwrap();
        assert_abs_diff_eq!(op.coeffs[2], -5e-11, epsilon = 1e-20);
        m[(0, 1)] = complex(0.0, 1e-6);
        assert!(QubitOperator::from_matrix(&m).is_err());
    }
}
