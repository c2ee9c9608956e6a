//! Local-hidden-state model for Bob steering Alice on `ρ_AB(1/2)`.
//!
//! Bob holds a hidden variable `(λ0, λ⃗)` with `λ⃗` drawn from the density
//! `ω(θ, φ) = cos²(θ/2)/(2π)` on the sphere and `λ0 = −1` with probability
//! `f`. He sends Alice the pure state `(I + λ0 λ⃗·σ)/2` and, asked for
//! direction `y⃗`, announces `b = −λ0 sgn(y⃗·λ⃗)`. With `f = 1/5` the joint
//! statistics are exactly those of projective measurements on `ρ_AB(1/2)`.
//!
//! Three independent routes to the same statistics live here: the closed
//! form ([`analytic_expectations`]), deterministic sphere quadrature of the
//! model's definition ([`quadrature_expectations`]) and a seeded simulation
//! of the protocol ([`monte_carlo_protocol`]).

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SteerError};
use crate::pauli::{BlochVector, Outcome, QubitOperator};
use crate::rng::{stream_id, stream_rng};
use crate::state::{Assemblage, MeasurementSet};

/// Flip probability that reproduces `ρ_AB(1/2)`.
pub const DEFAULT_FLIP_PROBABILITY: f64 = 0.2;

/// Samples per Monte Carlo block; each block owns one generator stream.
pub const BLOCK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub flip_probability: f64,
}

impl Default for ModelParameters {
    fn default() -> Self {
        ModelParameters { flip_probability: DEFAULT_FLIP_PROBABILITY }
    }
}

impl ModelParameters {
    pub fn new(flip_probability: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&flip_probability) {
            return Err(SteerError::domain(format!(
                "flip probability must lie in [0, 1/2], got {flip_probability}"
            )));
        }
        Ok(ModelParameters { flip_probability })
    }

    /// `1 − 2f`, the factor by which flipping shrinks both marginals.
    pub fn marginal_factor(&self) -> f64 {
        1.0 - 2.0 * self.flip_probability
    }
}

/// Bob's classical variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenVariable {
    /// `λ0 = ±1`.
    pub lambda0: i8,
    /// `λ⃗`, a unit vector.
    pub direction: BlochVector,
}

impl HiddenVariable {
    pub fn new(lambda0: i8, direction: BlochVector) -> Result<Self> {
        if lambda0 != 1 && lambda0 != -1 {
            return Err(SteerError::domain(format!("lambda0 must be ±1, got {lambda0}")));
        }
        if (direction.norm() - 1.0).abs() > 1e-12 {
            return Err(SteerError::domain("hidden direction must be a unit vector"));
        }
        Ok(HiddenVariable { lambda0, direction })
    }

    /// The state `(I + λ0 λ⃗·σ)/2` sent to Alice.
    pub fn sent_state(&self) -> QubitOperator {
        let r = self.direction * f64::from(self.lambda0);
        QubitOperator::from_pauli(0.5, 0.5 * r.x(), 0.5 * r.y(), 0.5 * r.z())
    }
}

/// `ω(θ) = cos²(θ/2) / (2π)` with respect to `sin θ dθ dφ`.
pub fn hidden_variable_density(theta: f64) -> f64 {
    let c = (theta / 2.0).cos();
    c * c / TAU
}

/// Draws `(λ0, λ⃗)`.
///
/// The height `u = cos θ` has density `(1 + u)/2` on `[−1, 1]`, with CDF
/// `F(u) = (1 + u)²/4`, so `u = 2√w − 1` for uniform `w`.
pub fn sample_hidden_variable<R: Rng + ?Sized>(rng: &mut R, params: &ModelParameters) -> HiddenVariable {
    let w: f64 = rng.random();
    let u = 2.0 * w.sqrt() - 1.0;
    let phi: f64 = rng.random::<f64>() * TAU;
    let s = (1.0 - u * u).max(0.0).sqrt();
    let (sp, cp) = phi.sin_cos();
    let flip = rng.random::<f64>() < params.flip_probability;
    HiddenVariable {
        lambda0: if flip { -1 } else { 1 },
        direction: BlochVector::new(s * cp, s * sp, u),
    }
}

/// `b = −λ0 sgn(y⃗·λ⃗)` with `sgn(0) = +1`.
pub fn bob_announcement(hv: &HiddenVariable, y: &BlochVector) -> Outcome {
    let sgn = if y.dot(&hv.direction) >= 0.0 { 1 } else { -1 };
    if -i32::from(hv.lambda0) * sgn > 0 {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Born probability of Alice's outcome `a` along `x` on the state Bob sent.
pub fn alice_outcome_probability(hv: &HiddenVariable, x: &BlochVector, a: Outcome) -> f64 {
    (1.0 + a.sign() * f64::from(hv.lambda0) * x.dot(&hv.direction)) / 2.0
}

/// `(⟨a⟩, ⟨b⟩, ⟨ab⟩)` for one measurement pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Expectations {
    pub ea: f64,
    pub eb: f64,
    pub eab: f64,
}

impl Expectations {
    pub fn max_abs_diff(&self, o: &Expectations) -> f64 {
        (self.ea - o.ea).abs().max((self.eb - o.eb).abs()).max((self.eab - o.eab).abs())
    }
}

/// Closed-form statistics of the model:
/// `⟨a⟩ = (1−2f) x3/3`, `⟨b⟩ = −(1−2f) y3/2`, `⟨ab⟩ = −x⃗·y⃗/2`.
pub fn analytic_expectations(x: &BlochVector, y: &BlochVector, params: &ModelParameters) -> Expectations {
    let k = params.marginal_factor();
    Expectations { ea: k * x.z() / 3.0, eb: -k * y.z() / 2.0, eab: -x.dot(y) / 2.0 }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = ((4 * k + 3) as f64 * PI / (4 * n + 2) as f64).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Orthonormal frame `(e1, e2, e3)` with `e3 = y`.
fn frame_along(y: &BlochVector) -> [BlochVector; 3] {
    let helper = if y.x().abs() < 0.9 { BlochVector::X } else { BlochVector::Y };
    let e1 = (helper - *y * helper.dot(y)).normalized().expect("helper not parallel to y");
    let e2 = y.cross(&e1);
    [e1, e2, *y]
}

/// Integrates `g(λ⃗, sgn(y⃗·λ⃗)) ω` over the sphere in the frame aligned with `y`,
/// splitting the height integral at the zero circle of `y⃗·λ⃗`.
fn sphere_integral<const K: usize>(
    y: &BlochVector,
    n_height: usize,
    n_azimuth: usize,
    g: impl Fn(&BlochVector, f64) -> [f64; K],
) -> [f64; K] {
    let [e1, e2, e3] = frame_along(y);
    let nodes = gauss_legendre(n_height);
    let dphi = TAU / n_azimuth as f64;
    let mut acc = [0.0; K];
    // upper hemisphere u ∈ (0, 1), lower u ∈ (−1, 0)
    for (lo, sgn) in [(0.0, 1.0), (-1.0, -1.0)] {
        for &(t, wt) in &nodes {
            let u = lo + 0.5 * (t + 1.0);
            let wu = 0.5 * wt;
            let s = (1.0 - u * u).max(0.0).sqrt();
            for k in 0..n_azimuth {
                let phi = k as f64 * dphi;
                let (sp, cp) = phi.sin_cos();
                let lam = e1 * (s * cp) + e2 * (s * sp) + e3 * u;
                let theta = lam.z().clamp(-1.0, 1.0).acos();
                let w = hidden_variable_density(theta) * wu * dphi;
                let vals = g(&lam, sgn);
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += w * v;
                }
            }
        }
    }
    acc
}

/// Relative and absolute agreement required between the two quadrature levels.
const QUADRATURE_TOL: f64 = 1e-9;

fn checked_sphere_integral<const K: usize>(
    y: &BlochVector,
    g: impl Fn(&BlochVector, f64) -> [f64; K] + Copy,
) -> Result<[f64; K]> {
    let coarse = sphere_integral(y, 12, 24, g);
    let fine = sphere_integral(y, 24, 48, g);
    let err = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if !(err <= QUADRATURE_TOL) {
        return Err(SteerError::numeric(format!("sphere quadrature error estimate {err:.3e}")));
    }
    Ok(fine)
}

/// Model statistics by deterministic quadrature of the protocol's definition.
pub fn quadrature_expectations(
    x: &BlochVector,
    y: &BlochVector,
    params: &ModelParameters,
) -> Result<Expectations> {
    x.ensure_unit()?;
    y.ensure_unit()?;
    // [∫ω x·λ, ∫ω sgn, ∫ω (x·λ) sgn]
    let [ix, isgn, ixs] = checked_sphere_integral(y, |lam, sgn| {
        let xl = x.dot(lam);
        [xl, sgn, xl * sgn]
    })?;
    let k = params.marginal_factor();
    Ok(Expectations { ea: k * ix, eb: -k * isgn, eab: -ixs })
}

/// Alice's conditional states `ρ_{b|y}` produced by the model, by quadrature.
pub fn quadrature_assemblage(y_set: &MeasurementSet, params: &ModelParameters) -> Result<Assemblage> {
    let f = params.flip_probability;
    let members = y_set
        .directions()
        .iter()
        .map(|y| {
            let ops = checked_sphere_integral(y, |lam, _| {
                // Pauli coefficients of ρ_{+|y} then ρ_{−|y}
                let mut out = [0.0; 8];
                for (lambda0, p) in [(1i8, 1.0 - f), (-1i8, f)] {
                    let hv = HiddenVariable { lambda0, direction: *lam };
                    let rho = hv.sent_state();
                    let off = 4 * bob_announcement(&hv, y).index();
                    for c in 0..4 {
                        out[off + c] += p * rho.coeffs[c];
                    }
                }
                out
            })?;
            Ok([
                QubitOperator::from_pauli(ops[0], ops[1], ops[2], ops[3]),
                QubitOperator::from_pauli(ops[4], ops[5], ops[6], ops[7]),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assemblage { members })
}

/// Empirical statistics of one `(x_i, y_j)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStatistics {
    pub i: usize,
    pub j: usize,
    pub x: BlochVector,
    pub y: BlochVector,
    pub mean: Expectations,
    /// Binomial standard errors `sqrt((1 − mean²)/n)`.
    pub se: Expectations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub pairs: Vec<PairStatistics>,
    pub n: u64,
    pub seed: u64,
}

/// Standard error of the mean of `n` samples of a ±1 variable with mean `mu`.
pub fn binomial_standard_error(mu: f64, n: u64) -> f64 {
    ((1.0 - mu * mu).max(0.0) / n as f64).sqrt()
}

/// Mixing weights `(2α, 1 − 2α)` with `ρ(α) = 2α ρ(1/2) + (1 − 2α) ρ(0)`.
pub fn extend_below_half(alpha: f64) -> Result<(f64, f64)> {
    if !(0.0..=0.5).contains(&alpha) {
        return Err(SteerError::domain(format!("alpha must lie in [0, 1/2], got {alpha}")));
    }
    Ok((2.0 * alpha, 1.0 - 2.0 * alpha))
}

/// Simulates the protocol for every `(x_i, y_j)` with `n` rounds each.
///
/// Pair `p = i·|y_set| + j` uses generator streams `stream_id(p, k)` for
/// block `k` of [`BLOCK_SIZE`] rounds, so results do not depend on threading.
pub fn monte_carlo_protocol(
    x_set: &MeasurementSet,
    y_set: &MeasurementSet,
    n: u64,
    seed: u64,
    params: &ModelParameters,
) -> Result<MonteCarloReport> {
    simulate(&cross_pairs(x_set, y_set), n, seed, params, 1.0)
}

/// Like [`monte_carlo_protocol`] for an explicit list of `(x, y)` pairs;
/// both indices of pair `k` are `k`.
pub fn monte_carlo_pairs(
    pairs: &[(BlochVector, BlochVector)],
    n: u64,
    seed: u64,
    params: &ModelParameters,
) -> Result<MonteCarloReport> {
    for (x, y) in pairs {
        x.ensure_unit()?;
        y.ensure_unit()?;
    }
    let jobs: Vec<_> = pairs.iter().enumerate().map(|(k, &(x, y))| (k, k, x, y)).collect();
    simulate(&jobs, n, seed, params, 1.0)
}

type PairJob = (usize, usize, BlochVector, BlochVector);

fn cross_pairs(x_set: &MeasurementSet, y_set: &MeasurementSet) -> Vec<PairJob> {
    let mut out = Vec::with_capacity(x_set.len() * y_set.len());
    for (i, x) in x_set.directions().iter().enumerate() {
        for (j, y) in y_set.directions().iter().enumerate() {
            out.push((i, j, *x, *y));
        }
    }
    out
}

/// Simulation of `ρ(α)` for `α ≤ 1/2`: the model with probability `2α`,
/// otherwise the separable state `ρ(0)`.
pub fn monte_carlo_mixture(
    alpha: f64,
    x_set: &MeasurementSet,
    y_set: &MeasurementSet,
    n: u64,
    seed: u64,
    params: &ModelParameters,
) -> Result<MonteCarloReport> {
    let (w_model, _) = extend_below_half(alpha)?;
    simulate(&cross_pairs(x_set, y_set), n, seed, params, w_model)
}

fn simulate(
    jobs_in: &[PairJob],
    n: u64,
    seed: u64,
    params: &ModelParameters,
    w_model: f64,
) -> Result<MonteCarloReport> {
    if n == 0 {
        return Err(SteerError::domain("sample count must be at least 1"));
    }
    let n_pairs = jobs_in.len();
    let n_blocks = n.div_ceil(BLOCK_SIZE);
    if n_pairs > u32::MAX as usize || n_blocks > u64::from(u32::MAX) {
        return Err(SteerError::Resource("too many pairs or blocks for stream ids".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..n_pairs).flat_map(|p| (0..n_blocks).map(move |k| (p, k))).collect();
    let sums: Vec<[i64; 3]> = jobs
        .par_iter()
        .map(|&(p, k)| {
            let (_, _, x, y) = &jobs_in[p];
            let count = BLOCK_SIZE.min(n - k * BLOCK_SIZE);
            let mut rng = stream_rng(seed, stream_id(p as u32, k as u32));
            simulate_block(&mut rng, x, y, count, params, w_model)
        })
        .collect();
    let pairs = (0..n_pairs)
        .map(|p| {
            let mut tot = [0i64; 3];
            for s in &sums[p * n_blocks as usize..(p + 1) * n_blocks as usize] {
                for c in 0..3 {
                    tot[c] += s[c];
                }
            }
            let mean = Expectations {
                ea: tot[0] as f64 / n as f64,
                eb: tot[1] as f64 / n as f64,
                eab: tot[2] as f64 / n as f64,
            };
            let se = Expectations {
                ea: binomial_standard_error(mean.ea, n),
                eb: binomial_standard_error(mean.eb, n),
                eab: binomial_standard_error(mean.eab, n),
            };
            let (i, j, x, y) = jobs_in[p];
            PairStatistics {
                i,
                j,
                x,
                y,
                mean,
                se,
            }
        })
        .collect();
    Ok(MonteCarloReport { pairs, n, seed })
}

/// Sums of `a`, `b` and `ab` over `count` rounds.
fn simulate_block<R: Rng>(
    rng: &mut R,
    x: &BlochVector,
    y: &BlochVector,
    count: u64,
    params: &ModelParameters,
    w_model: f64,
) -> [i64; 3] {
    let mut sums = [0i64; 3];
    for _ in 0..count {
        let (a, b) = if w_model >= 1.0 || rng.random::<f64>() < w_model {
            let hv = sample_hidden_variable(rng, params);
            let b = bob_announcement(&hv, y);
            let p_plus = alice_outcome_probability(&hv, x, Outcome::Plus);
            let a = if rng.random::<f64>() < p_plus { Outcome::Plus } else { Outcome::Minus };
            (a, b)
        } else {
            separable_round(rng, x, y)
        };
        let (a, b) = (a.sign() as i64, b.sign() as i64);
        sums[0] += a;
        sums[1] += b;
        sums[2] += a * b;
    }
    sums
}

/// One round on `(2|0⟩⟨0| ⊗ I/2 + 3 I/2 ⊗ |1⟩⟨1|)/5`.
fn separable_round<R: Rng>(rng: &mut R, x: &BlochVector, y: &BlochVector) -> (Outcome, Outcome) {
    let born = |rng: &mut R, bloch_z: f64, dir: &BlochVector| {
        if rng.random::<f64>() < (1.0 + bloch_z * dir.z()) / 2.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    };
    if rng.random::<f64>() < 0.4 {
        // Alice |0⟩, Bob maximally mixed
        (born(rng, 1.0, x), born(rng, 0.0, y))
    } else {
        // Alice maximally mixed, Bob |1⟩
        (born(rng, 0.0, x), born(rng, -1.0, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Party;
    use crate::rng::uniform_direction;
    use crate::state::{assemblage_from_measurements, correlation_table_for, make_state};
    use approx::assert_abs_diff_eq;

    fn default_params() -> ModelParameters {
        ModelParameters::default()
    }

    #[test]
    fn density_examples() {
        assert_abs_diff_eq!(hidden_variable_density(0.0), 1.0 / TAU, epsilon = 1e-15);
        assert_abs_diff_eq!(hidden_variable_density(PI), 0.0, epsilon = 1e-15);
        // ∫∫ ω sinθ dθ dφ with Gauss–Legendre in cos θ
        let total: f64 = gauss_legendre(20)
            .iter()
            .map(|&(u, w)| w * TAU * hidden_variable_density(u.acos()))
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(5);
        assert_abs_diff_eq!(rule.iter().map(|p| p.1).sum::<f64>(), 2.0, epsilon = 1e-14);
        let x8: f64 = rule.iter().map(|&(x, w)| w * x.powi(8)).sum();
        assert_abs_diff_eq!(x8, 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn height_cdf_inverse() {
        // F(u) = (1+u)²/4 inverted at a few quantiles
        for w in [0.0, 0.1, 0.25, 0.5, 0.9, 1.0] {
            let u: f64 = 2.0 * f64::sqrt(w) - 1.0;
            assert_abs_diff_eq!((1.0 + u).powi(2) / 4.0, w, epsilon = 1e-15);
        }
        // F' = (1+u)/2 matches the density integrated over φ
        let u: f64 = 0.3;
        assert_abs_diff_eq!((1.0 + u) / 2.0, TAU * hidden_variable_density(u.acos()), epsilon = 1e-14);
    }

    #[test]
    fn sampler_height_mean_and_flip_rate() {
        let mut rng = stream_rng(11, 0);
        let n = 1_000_000;
        let (mut sum_z, mut flips) = (0.0, 0u64);
        for _ in 0..n {
            let hv = sample_hidden_variable(&mut rng, &default_params());
            sum_z += hv.direction.z();
            flips += u64::from(hv.lambda0 == -1);
            assert!((hv.direction.norm() - 1.0).abs() < 1e-12);
        }
        assert_abs_diff_eq!(sum_z / n as f64, 1.0 / 3.0, epsilon = 3e-3);
        let p = flips as f64 / n as f64;
        let sigma = (0.2f64 * 0.8 / n as f64).sqrt();
        assert!((p - 0.2).abs() < 3.0 * sigma, "flip rate {p}");
    }

    #[test]
    fn sampler_azimuth_is_uniform() {
        let mut rng = stream_rng(12, 0);
        let n = 20_000;
        let mut phis: Vec<f64> = (0..n)
            .map(|_| {
                let d = sample_hidden_variable(&mut rng, &default_params()).direction;
                d.y().atan2(d.x()).rem_euclid(TAU) / TAU
            })
            .collect();
        phis.sort_by(f64::total_cmp);
        let ks = phis
            .iter()
            .enumerate()
            .map(|(k, &v)| ((k + 1) as f64 / n as f64 - v).max(v - k as f64 / n as f64))
            .fold(0.0, f64::max);
        // critical value at significance 0.01
        assert!(ks < 1.628 / (n as f64).sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn announcement_examples() {
        let up = HiddenVariable::new(1, BlochVector::Z).unwrap();
        let flipped = HiddenVariable::new(-1, BlochVector::Z).unwrap();
        assert_eq!(bob_announcement(&up, &BlochVector::Z), Outcome::Minus);
        assert_eq!(bob_announcement(&flipped, &BlochVector::Z), Outcome::Plus);
        // y·λ = 0 resolves to sgn = +1, so b = −λ0
        assert_eq!(bob_announcement(&up, &BlochVector::X), Outcome::Minus);
        assert!(HiddenVariable::new(0, BlochVector::Z).is_err());
    }

    #[test]
    fn alice_probability_examples() {
        let up = HiddenVariable::new(1, BlochVector::Z).unwrap();
        assert_eq!(alice_outcome_probability(&up, &BlochVector::Z, Outcome::Plus), 1.0);
        assert_eq!(alice_outcome_probability(&up, &BlochVector::X, Outcome::Plus), 0.5);
        let hv = HiddenVariable::new(-1, BlochVector::new(0.6, 0.0, 0.8)).unwrap();
        let x = BlochVector::from_angles(1.0, 2.0);
        let total: f64 = Outcome::BOTH.iter().map(|&a| alice_outcome_probability(&hv, &x, a)).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn analytic_examples() {
        let e = analytic_expectations(&BlochVector::Z, &BlochVector::Z, &default_params());
        assert_abs_diff_eq!(e.ea, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eb, -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eab, -0.5, epsilon = 1e-15);
        let e = analytic_expectations(&BlochVector::X, &BlochVector::Y, &default_params());
        assert_eq!((e.ea, e.eb, e.eab), (0.0, 0.0, 0.0));
        let e = analytic_expectations(&BlochVector::X, &BlochVector::X, &default_params());
        assert_eq!((e.ea, e.eb, e.eab), (0.0, 0.0, -0.5));
    }

    #[test]
    fn quadrature_examples() {
        let e = quadrature_expectations(&BlochVector::Z, &BlochVector::Z, &default_params()).unwrap();
        assert_abs_diff_eq!(e.ea, 0.2, epsilon = 1e-7);
        assert_abs_diff_eq!(e.eb, -0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(e.eab, -0.5, epsilon = 1e-7);
        let half = ModelParameters::new(0.5).unwrap();
        let x = BlochVector::from_angles(0.4, 1.1);
        let y = BlochVector::from_angles(2.2, -0.3);
        let e = quadrature_expectations(&x, &y, &half).unwrap();
        assert_eq!((e.ea, e.eb), (0.0, 0.0));
        assert_abs_diff_eq!(e.eab, -x.dot(&y) / 2.0, epsilon = 1e-7);
    }

    #[test]
    fn three_routes_agree_on_random_pairs() {
        let mut rng = stream_rng(3, 0);
        let state = make_state(0.5).unwrap();
        for _ in 0..25 {
            let x = uniform_direction(&mut rng);
            let y = uniform_direction(&mut rng);
            let analytic = analytic_expectations(&x, &y, &default_params());
            let quad = quadrature_expectations(&x, &y, &default_params()).unwrap();
            assert!(quad.max_abs_diff(&analytic) < 1e-7);
            let xs = MeasurementSet::new(vec![x]).unwrap();
            let t = correlation_table_for(&state, &xs, Party::A);
            let trace = Expectations {
                ea: t.a[0],
                eb: t.b[0] * y.x() + t.b[1] * y.y() + t.b[2] * y.z(),
                eab: t.ab[0][0] * y.x() + t.ab[0][1] * y.y() + t.ab[0][2] * y.z(),
            };
            assert!(trace.max_abs_diff(&analytic) < 1e-10);
        }
    }

    #[test]
    fn model_reproduces_bob_side_assemblage() {
        let mut rng = stream_rng(4, 0);
        let ys = MeasurementSet::new((0..4).map(|_| uniform_direction(&mut rng)).collect()).unwrap();
        let model = quadrature_assemblage(&ys, &default_params()).unwrap();
        let quantum = assemblage_from_measurements(&make_state(0.5).unwrap(), &ys, Party::B);
        for (p, q) in model.members.iter().zip(&quantum.members) {
            assert!(p[0].max_abs_diff(&q[0]) < 1e-7);
            assert!(p[1].max_abs_diff(&q[1]) < 1e-7);
        }
    }

    #[test]
    fn monte_carlo_single_round() {
        let z = MeasurementSet::new(vec![BlochVector::Z]).unwrap();
        let r = monte_carlo_protocol(&z, &z, 1, 5, &default_params()).unwrap();
        let m = r.pairs[0].mean;
        for v in [m.ea, m.eb, m.eab] {
            assert!(v == 1.0 || v == -1.0 || v == 0.0);
        }
        assert!(monte_carlo_protocol(&z, &z, 0, 5, &default_params()).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic_and_consistent() {
        let mut rng = stream_rng(8, 0);
        let xs = MeasurementSet::new((0..2).map(|_| uniform_direction(&mut rng)).collect()).unwrap();
        let ys = MeasurementSet::new(vec![BlochVector::Z, uniform_direction(&mut rng)]).unwrap();
        let n = 200_000;
        let r1 = monte_carlo_protocol(&xs, &ys, n, 99, &default_params()).unwrap();
        let r2 = monte_carlo_protocol(&xs, &ys, n, 99, &default_params()).unwrap();
        assert_eq!(r1, r2);
        for p in &r1.pairs {
            let e = analytic_expectations(&p.x, &p.y, &default_params());
            for (got, want) in [(p.mean.ea, e.ea), (p.mean.eb, e.eb), (p.mean.eab, e.eab)] {
                assert!((got - want).abs() <= 5.0 * binomial_standard_error(want, n));
            }
        }
    }

    #[test]
    fn extend_below_half_examples() {
        assert_eq!(extend_below_half(0.5).unwrap(), (1.0, 0.0));
        assert_eq!(extend_below_half(0.0).unwrap(), (0.0, 1.0));
        assert_eq!(extend_below_half(0.25).unwrap(), (0.5, 0.5));
        assert!(extend_below_half(0.6).is_err());
    }

    #[test]
    fn mixture_reproduces_quarter_state() {
        let mut rng = stream_rng(9, 0);
        let xs = MeasurementSet::new(vec![BlochVector::Z, uniform_direction(&mut rng)]).unwrap();
        let ys = MeasurementSet::new(vec![BlochVector::Z, uniform_direction(&mut rng)]).unwrap();
        let n = 200_000;
        let r = monte_carlo_mixture(0.25, &xs, &ys, n, 1, &default_params()).unwrap();
        let state = make_state(0.25).unwrap();
        for p in &r.pairs {
            let t = correlation_table_for(&state, &MeasurementSet::new(vec![p.x]).unwrap(), Party::A);
            let eb = t.b[0] * p.y.x() + t.b[1] * p.y.y() + t.b[2] * p.y.z();
            let eab = t.ab[0][0] * p.y.x() + t.ab[0][1] * p.y.y() + t.ab[0][2] * p.y.z();
            for (got, want) in [(p.mean.ea, t.a[0]), (p.mean.eb, eb), (p.mean.eab, eab)] {
                assert!((got - want).abs() <= 5.0 * binomial_standard_error(want, n), "{got} vs {want}");
            }
        }
    }
}
