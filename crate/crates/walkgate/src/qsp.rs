//! Quantum signal processing: interleave the signal operator W(x) with
//! ancilla z rotations to shape a chosen polynomial response of x.
//!
//! The interleaved walk sequence is the special case with the phase pattern
//! φ_j = 2πj/N, whose response is the reflection polynomial 2x^{2N}−1.
//! Picking other phase vectors trades that fixed polynomial for targets that
//! stay near −1 over a wider band of singular values, which is what makes
//! six-neighbor reflections work in ten interaction pulses. Phases for a
//! target are found numerically (damped least squares on a Chebyshev grid);
//! the response convention is
//!
//! ```text
//! P(x) = ⟨0| e^{iφ_d σ_z} W(x) e^{iφ_{d−1} σ_z} ⋯ W(x) e^{iφ_0 σ_z} |0⟩
//! ```
//!
//! with W(x) = [[x, −i√(1−x²)], [−i√(1−x²), x]].

use crate::linalg::{Operator, C64, I};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QspError {
    #[error("signal operand x = {0} lies outside [-1, 1]")]
    SignalOutOfRange(f64),
    #[error("phase sequence for degree {degree} needs {} phases, got {got}", degree + 1)]
    WrongPhaseCount { degree: usize, got: usize },
    #[error("target violates representability condition {condition}: {detail}")]
    ConditionViolated { condition: u8, detail: String },
    #[error("phase optimization did not converge: best sup-residual {best:.3e} after {restarts} restarts")]
    NonConvergence { best: f64, restarts: usize },
}

/// z-rotation phases φ_0..φ_d defining a degree-d response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSequence {
    phases: Vec<f64>,
}

impl PhaseSequence {
    pub fn new(phases: Vec<f64>) -> Self {
        assert!(!phases.is_empty(), "a phase sequence needs at least φ_0");
        PhaseSequence { phases }
    }

    pub fn degree(&self) -> usize {
        self.phases.len() - 1
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// The interleaved-walk pattern on 2N steps: φ_0 = 0 and φ_j = 2πj/N.
    /// Its response is exactly 2x^{2N} − 1.
    pub fn walk_pattern(half_steps: usize) -> Self {
        let mut phases = vec![0.0];
        for m in 1..=2 * half_steps {
            phases.push(TAU * (m % half_steps) as f64 / half_steps as f64);
        }
        PhaseSequence { phases }
    }

    /// Sum of all phases mod 2π; the response at x = 1 is e^{iΣφ}.
    pub fn phase_sum(&self) -> f64 {
        self.phases.iter().sum::<f64>().rem_euclid(TAU)
    }
}

/// Signal operator W(x).
pub fn signal_operator(x: f64) -> Result<Operator, QspError> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(QspError::SignalOutOfRange(x));
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    Ok(Operator::from_fn(&[2], |i, j| {
        if i == j {
            C64::new(x, 0.0)
        } else {
            -I * C64::new(s, 0.0)
        }
    }))
}

/// Full 2×2 phased product U_Φ(x).
pub fn qsp_unitary(seq: &PhaseSequence, x: f64) -> Operator {
    let w = signal_operator(x).expect("x in range");
    let mut u = z_phase(seq.phases[0]);
    for &phi in &seq.phases[1..] {
        u = &z_phase(phi) * &(&w * &u);
    }
    u
}

/// Response ⟨0|U_Φ(x)|0⟩ (vector recursion, no matrix products).
pub fn qsp_response(seq: &PhaseSequence, x: f64) -> C64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let (wx, ws) = (C64::new(x, 0.0), -I * C64::new(s, 0.0));
    let mut v0 = (I * C64::new(seq.phases[0], 0.0)).exp();
    let mut v1 = C64::new(0.0, 0.0);
    for &phi in &seq.phases[1..] {
        let (n0, n1) = (wx * v0 + ws * v1, ws * v0 + wx * v1);
        let phase = (I * C64::new(phi, 0.0)).exp();
        v0 = phase * n0;
        v1 = n1 / phase;
    }
    v0
}

fn z_phase(phi: f64) -> Operator {
    Operator::from_diagonal(
        &[2],
        &[
            (I * C64::new(phi, 0.0)).exp(),
            (-I * C64::new(phi, 0.0)).exp(),
        ],
    )
}

/// Real target polynomials for the response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetPolynomial {
    /// x^degree.
    Monomial { degree: usize },
    /// 2x^{2N} − 1, the interleaved-walk reflection polynomial.
    WalkReflection { half_steps: usize },
    /// 2x² Π_j (x²−c_j²)² / Π_j (1−c_j²)² − 1: pinned to −1 at every root
    /// ±c_j and to +1 at ±1. No roots gives 2x²−1.
    RootReflection { roots: Vec<f64> },
}

/// Degree-10 double-well reflection target with dips at ±a and ±b.
pub fn target_poly_ab(a: f64, b: f64) -> TargetPolynomial {
    TargetPolynomial::RootReflection { roots: vec![a, b] }
}

/// Degree-6 single-well reflection target with dips at ±a.
pub fn target_poly_a(a: f64) -> TargetPolynomial {
    TargetPolynomial::RootReflection { roots: vec![a] }
}

impl TargetPolynomial {
    pub fn degree(&self) -> usize {
        match self {
            TargetPolynomial::Monomial { degree } => *degree,
            TargetPolynomial::WalkReflection { half_steps } => 2 * half_steps,
            TargetPolynomial::RootReflection { roots } => 2 + 4 * roots.len(),
        }
    }

    /// true for even parity.
    pub fn even(&self) -> bool {
        self.degree().is_multiple_of(2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TargetPolynomial::Monomial { degree } => x.powi(*degree as i32),
            TargetPolynomial::WalkReflection { half_steps } => {
                2.0 * x.powi(2 * *half_steps as i32) - 1.0
            }
            TargetPolynomial::RootReflection { roots } => Self::root_reflection(roots, x * x),
        }
    }

    /// Even targets continued to the imaginary axis: T(ix) (real).
    pub fn eval_imag_axis(&self, x: f64) -> f64 {
        match self {
            TargetPolynomial::Monomial { degree } => {
                assert!(degree % 2 == 0, "imaginary-axis value is complex for odd parity");
                let sign = if degree % 4 == 0 { 1.0 } else { -1.0 };
                sign * x.powi(*degree as i32)
            }
            TargetPolynomial::WalkReflection { half_steps } => {
                let sign = if half_steps % 2 == 0 { 1.0 } else { -1.0 };
                2.0 * sign * x.powi(2 * *half_steps as i32) - 1.0
            }
            TargetPolynomial::RootReflection { roots } => Self::root_reflection(roots, -x * x),
        }
    }

    fn root_reflection(roots: &[f64], u: f64) -> f64 {
        let mut num = 2.0 * u;
        let mut den = 1.0;
        for &c in roots {
            num *= (u - c * c).powi(2);
            den *= (1.0 - c * c).powi(2);
        }
        num / den - 1.0
    }
}

/// Representability preconditions: |T| ≤ 1 on [−1,1], |T| ≥ 1 outside, and
/// (even parity only) T(ix)² ≥ 1 on the imaginary axis.
pub fn check_target_conditions(target: &TargetPolynomial) -> Result<(), QspError> {
    let eps = 1e-9;
    for i in 0..=500 {
        let x = -1.0 + 2.0 * i as f64 / 500.0;
        let v = target.eval(x);
        if v.abs() > 1.0 + eps {
            return Err(QspError::ConditionViolated {
                condition: 1,
                detail: format!("|T({x:.4})| = {:.6} > 1", v.abs()),
            });
        }
    }
    for i in 0..=200 {
        let x = 1.0 + 2.0 * i as f64 / 200.0;
        for sign in [1.0, -1.0] {
            let v = target.eval(sign * x);
            if v.abs() < 1.0 - eps {
                return Err(QspError::ConditionViolated {
                    condition: 2,
                    detail: format!("|T({:.4})| = {:.6} < 1", sign * x, v.abs()),
                });
            }
        }
    }
    if target.even() {
        for i in 0..=200 {
            let x = 3.0 * i as f64 / 200.0;
            let v = target.eval_imag_axis(x);
            if v * v < 1.0 - eps {
                return Err(QspError::ConditionViolated {
                    condition: 3,
                    detail: format!("T(i·{x:.4})² = {:.6} < 1", v * v),
                });
            }
        }
    }
    Ok(())
}

/// Walk-polynomial identities for W_N(x) = Π_{j=1..N} R_{N+1−j} W(x) with
/// R_j = diag(e^{2πij/N}, e^{−2πij/N}).
#[derive(Clone, Copy, Debug)]
pub struct WalkPolyReport {
    /// max |⟨0|W_N|0⟩ − x^N|
    pub entry_deviation: f64,
    /// max |tr W_N − 2x^N|
    pub trace_deviation: f64,
    /// max over i of |⟨i|W_N²|i⟩ − (2x^{2N}−1)|
    pub square_deviation: f64,
    /// max |Im ⟨0|W_N|0⟩|
    pub imag_deviation: f64,
}

pub fn verify_walk_polynomial(half_steps: usize, xs: &[f64]) -> WalkPolyReport {
    let n = half_steps;
    let mut report = WalkPolyReport {
        entry_deviation: 0.0,
        trace_deviation: 0.0,
        square_deviation: 0.0,
        imag_deviation: 0.0,
    };
    for &x in xs {
        let w = signal_operator(x).expect("x in range");
        let mut u = Operator::identity(&[2]);
        // rightmost factor of Π_{j=1..N} R_{N+1−j}W is R_1·W, so the phases
        // arrive in increasing order as the product is applied
        for j in 1..=n {
            u = &(&z_phase(TAU * (j % n) as f64 / n as f64) * &w) * &u;
        }
        let p = u.get(0, 0);
        let xn = x.powi(n as i32);
        report.entry_deviation = report.entry_deviation.max((p - C64::new(xn, 0.0)).norm());
        report.imag_deviation = report.imag_deviation.max(p.im.abs());
        let tr = u.get(0, 0) + u.get(1, 1);
        report.trace_deviation = report
            .trace_deviation
            .max((tr - C64::new(2.0 * xn, 0.0)).norm());
        let squared = &u * &u;
        let poly = 2.0 * x.powi(2 * n as i32) - 1.0;
        for i in 0..2 {
            report.square_deviation = report
                .square_deviation
                .max((squared.get(i, i) - C64::new(poly, 0.0)).norm());
        }
    }
    report
}

/// Options for [`find_phases`].
#[derive(Clone, Copy, Debug)]
pub struct FindPhasesOptions {
    pub grid_points: usize,
    pub max_restarts: usize,
    pub seed: u64,
    /// Accept when the sup-norm residual on the grid drops below this.
    pub accept_residual: f64,
}

impl Default for FindPhasesOptions {
    fn default() -> Self {
        FindPhasesOptions {
            grid_points: 201,
            max_restarts: 24,
            seed: 7,
            accept_residual: 1e-6,
        }
    }
}

/// Result of a successful phase search.
#[derive(Clone, Debug)]
pub struct FoundPhases {
    pub sequence: PhaseSequence,
    /// sup |response − target| over the Chebyshev grid.
    pub residual: f64,
}

/// Find phases whose response matches `target` of the given degree, by
/// damped least squares on a Chebyshev grid with multi-start. The gauge
/// freedom is pinned so that response(1) = target(1) exactly.
pub fn find_phases(
    target: &TargetPolynomial,
    degree: usize,
    opts: FindPhasesOptions,
) -> Result<FoundPhases, QspError> {
    check_target_conditions(target)?;
    let npts = opts.grid_points.max(degree + 2);
    let grid: Vec<f64> = (0..npts)
        .map(|i| (PI * i as f64 / (npts - 1) as f64).cos())
        .collect();
    let tv: Vec<f64> = grid.iter().map(|&x| target.eval(x)).collect();

    let residuals = |phis: &[f64], out: &mut [f64]| {
        let seq = PhaseSequence::new(phis.to_vec());
        for (i, (&x, &t)) in grid.iter().zip(&tv).enumerate() {
            let p = qsp_response(&seq, x);
            out[2 * i] = p.re - t;
            out[2 * i + 1] = p.im;
        }
    };
    let sup = |phis: &[f64]| {
        let seq = PhaseSequence::new(phis.to_vec());
        grid.iter()
            .zip(&tv)
            .map(|(&x, &t)| (qsp_response(&seq, x) - C64::new(t, 0.0)).norm())
            .fold(0.0, f64::max)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; degree + 1]];
    if degree.is_multiple_of(2) && (degree / 2) % 2 == 1 {
        starts.push(PhaseSequence::walk_pattern(degree / 2).phases);
    }
    while starts.len() < opts.max_restarts {
        starts.push((0..=degree).map(|_| rng.gen_range(-PI..PI)).collect());
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let solution = levenberg_marquardt(start, 2 * npts, &residuals);
        let r = sup(&solution);
        if best.as_ref().is_none_or(|(_, b)| r < *b) {
            best = Some((solution, r));
        }
        if best.as_ref().unwrap().1 < 1e-12 {
            break;
        }
    }
    let (mut phases, mut residual) = best.unwrap();

    // Pin the gauge: a shift of φ_0 rotates the whole response by a global
    // phase, so set Σφ to arg(target(1)) exactly.
    let t1 = target.eval(1.0);
    let want = if t1 >= 0.0 { 0.0 } else { PI };
    let sum: f64 = phases.iter().sum();
    phases[0] += want - sum;
    residual = residual.max(sup(&phases));
    if residual > opts.accept_residual {
        return Err(QspError::NonConvergence {
            best: residual,
            restarts: starts.len(),
        });
    }
    Ok(FoundPhases {
        sequence: PhaseSequence::new(phases),
        residual,
    })
}

/// Damped Gauss-Newton loop with forward-difference Jacobian.
fn levenberg_marquardt(
    start: &[f64],
    n_resid: usize,
    residuals: &dyn Fn(&[f64], &mut [f64]),
) -> Vec<f64> {
    use nalgebra::{DMatrix, DVector};
    let n_par = start.len();
    let mut params = start.to_vec();
    let mut r = vec![0.0; n_resid];
    residuals(&params, &mut r);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let h = 1e-7;
    for _ in 0..400 {
        if cost < 1e-28 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n_resid, n_par);
        let mut shifted = vec![0.0; n_resid];
        for p in 0..n_par {
            let mut probe = params.clone();
            probe[p] += h;
            residuals(&probe, &mut shifted);
            for i in 0..n_resid {
                jac[(i, p)] = (shifted[i] - r[i]) / h;
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let jtr = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..12 {
            let mut damped = jtj.clone();
            for d in 0..n_par {
                damped[(d, d)] += lambda;
            }
            if let Some(step) = damped.lu().solve(&jtr) {
                let trial: Vec<f64> = params
                    .iter()
                    .zip(step.iter())
                    .map(|(p, s)| p - s)
                    .collect();
                residuals(&trial, &mut shifted);
                let trial_cost: f64 = shifted.iter().map(|v| v * v).sum();
                if trial_cost < cost {
                    params = trial;
                    r.copy_from_slice(&shifted);
                    cost = trial_cost;
                    lambda = (lambda / 3.0).max(1e-14);
                    improved = true;
                    break;
                }
            }
            lambda *= 4.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    params
}

/// Reflection fidelity of a phase sequence over singular-value blocks
/// (Λ, multiplicity) at interaction time t: the achieved gate is the
/// diagonal of response(cos Λt) per block, the target is +1 on Λ = 0 blocks
/// and −1 elsewhere, and n = Σ multiplicities.
pub fn qsp_reflection_fidelity(seq: &PhaseSequence, blocks: &[(f64, usize)], t: f64) -> f64 {
    let mut tr_mu = C64::new(0.0, 0.0);
    let mut tr_mm = 0.0;
    let mut n = 0usize;
    for &(lambda, mult) in blocks {
        let m = qsp_response(seq, (lambda * t).cos());
        let target = if lambda.abs() < 1e-12 { 1.0 } else { -1.0 };
        tr_mu += m * C64::new(target * mult as f64, 0.0);
        tr_mm += mult as f64 * m.norm_sqr();
        n += mult;
    }
    let n = n as f64;
    (tr_mu.norm_sqr() + tr_mm) / (n * (n + 1.0))
}

/// Binomial singular-value blocks Λ/g ∈ {0, 1, √2, …, √n} with
/// multiplicities C(n, D) for n homogeneously coupled neighbors.
pub fn homogeneous_blocks(n_neighbors: usize) -> Vec<(f64, usize)> {
    (0..=n_neighbors)
        .map(|d| ((d as f64).sqrt(), binomial(n_neighbors, d)))
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_operator_limits() {
        assert!(signal_operator(1.0)
            .unwrap()
            .max_abs_diff(&Operator::identity(&[2]))
            < 1e-15);
        let w0 = signal_operator(0.0).unwrap();
        let expect = crate::linalg::sigma_x().scale(-I);
        assert!(w0.max_abs_diff(&expect) < 1e-15);
        assert!(signal_operator(1.2).is_err());
    }

    #[test]
    fn signal_operator_matches_embedded_block() {
        // W(cos Λt) is the coin block of the embedded evolution (the sign
        // of sin only flips the off-diagonal, invisible on diagonals)
        let (lam, t): (f64, f64) = (0.8, 0.9);
        let w = signal_operator((lam * t).cos()).unwrap();
        assert!((w.get(0, 0) - C64::new((lam * t).cos(), 0.0)).norm() < 1e-15);
        assert!((w.get(0, 1) + I * C64::new((lam * t).sin(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trivial_response_is_x() {
        let seq = PhaseSequence::new(vec![0.0, 0.0]);
        for x in [-0.9, -0.3, 0.0, 0.4, 1.0] {
            assert!((qsp_response(&seq, x) - C64::new(x, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn walk_pattern_gives_reflection_polynomial() {
        let seq = PhaseSequence::walk_pattern(5);
        assert_eq!(seq.degree(), 10);
        for i in 0..=40 {
            let x = -1.0 + i as f64 / 20.0;
            let expect = 2.0 * x.powi(10) - 1.0;
            let p = qsp_response(&seq, x);
            assert!((p - C64::new(expect, 0.0)).norm() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn response_matches_unitary_entry() {
        let seq = PhaseSequence::new(vec![0.3, -0.7, 1.1, 0.2]);
        for x in [-0.8, 0.1, 0.77] {
            let u = qsp_unitary(&seq, x);
            assert!((u.get(0, 0) - qsp_response(&seq, x)).norm() < 1e-13);
            assert!(u.unitarity_deviation() < 1e-13);
        }
    }

    #[test]
    fn response_magnitude_bounded_by_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let seq = PhaseSequence::new((0..8).map(|_| rng.gen_range(-PI..PI)).collect());
            for i in 0..=50 {
                let x = -1.0 + i as f64 / 25.0;
                assert!(qsp_response(&seq, x).norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn target_polynomial_values() {
        let pab = target_poly_ab(0.62, 0.3);
        assert_eq!(pab.degree(), 10);
        assert!((pab.eval(1.0) - 1.0).abs() < 1e-12);
        assert!((pab.eval(-1.0) - 1.0).abs() < 1e-12);
        assert!((pab.eval(0.62) + 1.0).abs() < 1e-12);
        assert!((pab.eval(0.3) + 1.0).abs() < 1e-12);
        // brute-force arithmetic at x = 0.5
        let x: f64 = 0.5;
        let brute = 2.0 * x * x * (x * x - 0.62 * 0.62) * (x * x - 0.62 * 0.62)
            * (x * x - 0.09)
            * (x * x - 0.09)
            / ((1.0 - 0.62 * 0.62) * (1.0 - 0.62 * 0.62) * (1.0 - 0.09) * (1.0 - 0.09))
            - 1.0;
        assert!((pab.eval(0.5) - brute).abs() < 1e-12);

        let pa = target_poly_a(std::f64::consts::FRAC_1_SQRT_2);
        assert_eq!(pa.degree(), 6);
        assert!((pa.eval(std::f64::consts::FRAC_1_SQRT_2) + 1.0).abs() < 1e-12);
        assert!((pa.eval(-std::f64::consts::FRAC_1_SQRT_2) + 1.0).abs() < 1e-12);
        assert!((pa.eval(1.0) - 1.0).abs() < 1e-12);
        assert!((pa.eval(0.0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn reference_targets_satisfy_conditions() {
        assert!(check_target_conditions(&target_poly_ab(0.62, 0.3)).is_ok());
        assert!(check_target_conditions(&target_poly_a(std::f64::consts::FRAC_1_SQRT_2)).is_ok());
        assert!(check_target_conditions(&TargetPolynomial::WalkReflection { half_steps: 5 }).is_ok());
        assert!(check_target_conditions(&TargetPolynomial::Monomial { degree: 3 }).is_ok());
        // a target exceeding 1 inside the interval is rejected
        let bad = TargetPolynomial::RootReflection {
            roots: vec![0.95, 0.9],
        };
        assert!(matches!(
            check_target_conditions(&bad),
            Err(QspError::ConditionViolated { .. })
        ));
    }

    #[test]
    fn walk_polynomial_identities() {
        let xs: Vec<f64> = (0..101).map(|i| -1.0 + i as f64 / 50.0).collect();
        for n in [3usize, 5, 7] {
            let report = verify_walk_polynomial(n, &xs);
            assert!(report.entry_deviation < 1e-11, "N={n}: {report:?}");
            assert!(report.trace_deviation < 1e-11, "N={n}: {report:?}");
            assert!(report.square_deviation < 1e-11, "N={n}: {report:?}");
            assert!(report.imag_deviation < 1e-12, "N={n}: {report:?}");
        }
        // spot values: x = 1 gives 1, N = 3 at x = 0.5 gives 0.125
        let r = verify_walk_polynomial(3, &[1.0, 0.5]);
        assert!(r.entry_deviation < 1e-13);
    }

    #[test]
    fn find_phases_chebyshev_reflection() {
        // 2x²−1 (d = 2) is hit exactly; the all-zero pattern is a solution
        let target = TargetPolynomial::RootReflection { roots: vec![] };
        let found = find_phases(&target, 2, FindPhasesOptions::default()).unwrap();
        assert!(found.residual < 1e-8, "residual {}", found.residual);
    }

    #[test]
    fn find_phases_cubic_monomial() {
        // x³ needs the 2πj/3 walk pattern (mod-π phases only reach
        // ±(4x³−3x)); the optimizer must recover a sequence equivalent to it
        let target = TargetPolynomial::Monomial { degree: 3 };
        let found = find_phases(&target, 3, FindPhasesOptions::default()).unwrap();
        assert!(found.residual < 1e-8, "residual {}", found.residual);
        for x in [-0.9, -0.2, 0.5, 1.0] {
            let p = qsp_response(&found.sequence, x);
            assert!((p - C64::new(x.powi(3), 0.0)).norm() < 1e-8);
        }
        // the analytic solution is the N = 3 walk factor itself
        let r = verify_walk_polynomial(3, &[0.5]);
        assert!(r.entry_deviation < 1e-13);
    }

    #[test]
    fn find_phases_double_well() {
        let target = target_poly_ab(0.62, 0.3);
        let found = find_phases(&target, 10, FindPhasesOptions::default()).unwrap();
        assert!(found.residual < 1e-6, "residual {}", found.residual);
        // gauge pinned: response(1) = 1 exactly up to rounding
        let at_one = qsp_response(&found.sequence, 1.0);
        assert!((at_one - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn phase_arrangement_is_not_gauge_freedom() {
        // the response depends on the arrangement of the phases, not just
        // their multiset: scrambling a working sequence breaks the fit by
        // O(1), so conventions (ordering, signs) must be carried exactly
        let target = target_poly_ab(0.62, 0.3);
        let found = find_phases(&target, 10, FindPhasesOptions::default()).unwrap();
        let grid: Vec<f64> = (0..101).map(|i| -1.0 + i as f64 / 50.0).collect();
        let sup = |seq: &PhaseSequence| {
            grid.iter()
                .map(|&x| (qsp_response(seq, x) - C64::new(target.eval(x), 0.0)).norm())
                .fold(0.0, f64::max)
        };
        assert!(sup(&found.sequence) < 1e-6);
        let mut swapped = found.sequence.phases().to_vec();
        swapped.swap(1, 3);
        let mut reversed: Vec<f64> = found.sequence.phases().to_vec();
        reversed[2] = -reversed[2];
        for variant in [swapped, reversed] {
            let residual = sup(&PhaseSequence::new(variant));
            assert!(residual > 1e-2, "scrambled phases still fit: {residual}");
        }
    }

    #[test]
    fn six_neighbor_reflection_fidelity() {
        let target = target_poly_ab(0.62, 0.3);
        let found = find_phases(&target, 10, FindPhasesOptions::default()).unwrap();
        let blocks = homogeneous_blocks(6);
        assert_eq!(blocks.iter().map(|b| b.1).sum::<usize>(), 64);
        let f = qsp_reflection_fidelity(&found.sequence, &blocks, 0.88);
        assert!(f >= 0.999, "F = {f}");
    }

    #[test]
    fn ion_reflection_fidelity_is_exact() {
        // collective-spin blocks at θ = π/2: cos(θλ/2) ∈ {0, ±1/√2, 1};
        // the single-well target is −1 at every nonzero block, so F = 1
        let target = target_poly_a(std::f64::consts::FRAC_1_SQRT_2);
        let found = find_phases(&target, 6, FindPhasesOptions::default()).unwrap();
        // encode blocks as (Λ, mult) with t = 1: Λ = θλ/2 for λ = -3..3
        let blocks: Vec<(f64, usize)> = (-3i32..=3)
            .map(|lam| {
                let arg = (PI / 2.0) * lam as f64 / 2.0;
                (arg.abs(), binomial(6, (3 + lam) as usize))
            })
            .collect();
        let f = qsp_reflection_fidelity(&found.sequence, &blocks, 1.0);
        assert!((f - 1.0).abs() < 1e-9, "F = {f}");
    }

    #[test]
    fn all_dark_blocks_give_unit_fidelity() {
        let seq = PhaseSequence::walk_pattern(3);
        let f = qsp_reflection_fidelity(&seq, &[(0.0, 16)], 0.9);
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn response_at_one_is_phase_sum() {
        let seq = PhaseSequence::new(vec![0.2, 1.1, -0.4, 2.2]);
        let expect = (I * C64::new(seq.phase_sum(), 0.0)).exp();
        assert!((qsp_response(&seq, 1.0) - expect).norm() < 1e-13);
    }
}
