//! Discrete-time coined quantum walk at fixed momentum.
//!
//! The walker register is reduced to a single momentum component k, so every
//! object here is a 2×2 operator on the coin. A walk step is W₀ = S₀·R(θ)
//! with shift S₀ = diag(e^{ik}, e^{−ik}) and coin R(θ) an x rotation. The
//! step-dependent sequence sweeps the momentum across the zone in 2N steps
//! and refocuses to −1 up to the revival residual 2|cos(θ/2)|^N.

use crate::linalg::{operator_norm, Operator, C64, DEFAULT_TOL, I};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("half-step count must be a positive odd integer, got {0}")]
    EvenHalfSteps(usize),
    #[error("degenerate band point at k={k}, theta={theta}: sin E = {sin_e:.3e}, axis undefined")]
    DegeneratePoint { k: f64, theta: f64, sin_e: f64 },
    #[error("winding-number grid must have at least 16 points, got {0}")]
    GridTooSmall(usize),
}

/// Parameters of the step-dependent walk: coin angle θ, momentum k and the
/// odd half-step count N (the sequence runs 2N steps with per-step shift
/// δk = 2π/N).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkParams {
    pub theta: f64,
    pub k: f64,
    half_steps: usize,
}

impl WalkParams {
    pub fn new(theta: f64, k: f64, half_steps: usize) -> Result<Self, WalkError> {
        if half_steps == 0 || half_steps.is_multiple_of(2) {
            return Err(WalkError::EvenHalfSteps(half_steps));
        }
        Ok(WalkParams {
            theta,
            k,
            half_steps,
        })
    }

    pub fn half_steps(&self) -> usize {
        self.half_steps
    }

    pub fn total_steps(&self) -> usize {
        2 * self.half_steps
    }

    pub fn delta_k(&self) -> f64 {
        TAU / self.half_steps as f64
    }
}

/// Coin rotation R(θ) = cos(θ/2)·1 − i sin(θ/2)·σ_x.
pub fn coin(theta: f64) -> Operator {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = -I * C64::new((theta / 2.0).sin(), 0.0);
    Operator::from_fn(&[2], |i, j| if i == j { c } else { s })
}

/// Single-momentum shift S₀ = e^{ikσ_z} = diag(e^{ik}, e^{−ik}).
pub fn shift(k: f64) -> Operator {
    Operator::from_diagonal(&[2], &[(I * C64::new(k, 0.0)).exp(), (-I * C64::new(k, 0.0)).exp()])
}

/// One walk step W₀(θ) = S₀·R(θ).
pub fn single_step(theta: f64, k: f64) -> Operator {
    &shift(k) * &coin(theta)
}

/// Band structure data at momentum k: quasienergy E ∈ (0, π), the band axis
/// n (unit 3-vector) and the chiral axis A_θ = (0, cos θ/2, sin θ/2).
///
/// cos E = cos k cos(θ/2) and n ⟂ A_θ for every k.
#[derive(Clone, Copy, Debug)]
pub struct BandPoint {
    pub energy: f64,
    pub axis: [f64; 3],
    pub chiral_axis: [f64; 3],
}

pub fn chiral_axis(theta: f64) -> [f64; 3] {
    [0.0, (theta / 2.0).cos(), (theta / 2.0).sin()]
}

pub fn band_point(k: f64, theta: f64) -> Result<BandPoint, WalkError> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let cos_e = k.cos() * c;
    let energy = cos_e.acos();
    let sin_e = energy.sin();
    if sin_e.abs() < DEFAULT_TOL {
        return Err(WalkError::DegeneratePoint { k, theta, sin_e });
    }
    let axis = [
        k.cos() * s / sin_e,
        -k.sin() * s / sin_e,
        k.sin() * c / sin_e,
    ];
    Ok(BandPoint {
        energy,
        axis,
        chiral_axis: chiral_axis(theta),
    })
}

/// Winding of the band axis around the great circle perpendicular to A_θ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingResult {
    /// 0 for the trivial phase, 1 for the topological phase.
    pub winding: u32,
    /// Set when θ sits at the degenerate boundary (0 or 2π), where the axis
    /// collapses onto z and no winding is defined.
    pub degenerate: bool,
}

/// Accumulated-angle winding number of n_{k,θ} over k ∈ [0, 2π).
pub fn winding_number(theta: f64, grid_size: usize) -> Result<WindingResult, WalkError> {
    if grid_size < 16 {
        return Err(WalkError::GridTooSmall(grid_size));
    }
    let boundary = theta.rem_euclid(TAU);
    if boundary < 1e-6 || TAU - boundary < 1e-6 {
        return Ok(WindingResult {
            winding: 0,
            degenerate: true,
        });
    }
    // In-plane frame: e1 = x̂, e2 = A_θ × e1 = (0, sin θ/2, −cos θ/2).
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let angle_at = |k: f64| -> f64 {
        let p = band_point(k, theta).expect("non-degenerate for theta in (0, 2pi)");
        let u = p.axis[0];
        let v = p.axis[1] * s - p.axis[2] * c;
        v.atan2(u)
    };
    let mut total = 0.0;
    let mut prev = angle_at(0.0);
    for step in 1..=grid_size {
        let k = TAU * step as f64 / grid_size as f64;
        let cur = angle_at(k);
        let mut delta = cur - prev;
        while delta > PI {
            delta -= TAU;
        }
        while delta < -PI {
            delta += TAU;
        }
        total += delta;
        prev = cur;
    }
    Ok(WindingResult {
        winding: (total / TAU).round().abs() as u32,
        degenerate: false,
    })
}

/// ∏_{m=1..steps} S^m·W₀ with S = shift(delta_k); the m = 1 factor acts
/// first.
pub fn walk_product(theta: f64, k: f64, steps: usize, delta_k: f64) -> Operator {
    let w0 = single_step(theta, k);
    let mut u = Operator::identity(&[2]);
    for m in 1..=steps {
        u = &(&shift(delta_k * m as f64) * &w0) * &u;
    }
    u
}

/// The 2N-step sweep W_k^[2N,1](θ) with per-step shift δk = 2π/N.
pub fn walk_sequence(params: &WalkParams) -> Operator {
    walk_product(
        params.theta,
        params.k,
        params.total_steps(),
        params.delta_k(),
    )
}

/// Revival bound 2|cos(θ/2)|^N. For odd N this equals ‖W^[2N,1] + 1‖ exactly
/// at k = 0 and bounds it at every k.
pub fn revival_bound(theta: f64, half_steps: usize) -> f64 {
    2.0 * (theta / 2.0).cos().abs().powi(half_steps as i32)
}

/// ‖W_0^[2N,1](θ) + 1‖ at k = 0.
pub fn revival_residual(theta: f64, half_steps: usize) -> Result<f64, WalkError> {
    let params = WalkParams::new(theta, 0.0, half_steps)?;
    let seq = walk_sequence(&params);
    let shifted = &seq + &Operator::identity(&[2]);
    Ok(operator_norm(&shifted))
}

/// Decompose a 2×2 special unitary as exp(iμ m·σ): returns (μ, m) with
/// μ ∈ [0, π] and m a unit 3-vector (undefined at μ ∈ {0, π}).
pub fn bloch_log(u: &Operator) -> (f64, [f64; 3]) {
    assert_eq!(u.dim(), 2);
    let tr = u.get(0, 0) + u.get(1, 1);
    let cos_mu = (tr.re / 2.0).clamp(-1.0, 1.0);
    let mu = cos_mu.acos();
    let sin_mu = mu.sin();
    if sin_mu.abs() < 1e-14 {
        return (mu, [0.0, 0.0, 0.0]);
    }
    let mz = (u.get(0, 0) - C64::new(cos_mu, 0.0)).im / sin_mu;
    let off = u.get(0, 1);
    // i sin μ (m_x − i m_y) = u01, so Im(u01) = sin μ m_x, Re(u01) = sin μ m_y
    let mx = off.im / sin_mu;
    let my = off.re / sin_mu;
    (mu, [mx, my, mz])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_y, sigma_z};
    use proptest::prelude::*;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn coin_limits() {
        assert!(coin(0.0).max_abs_diff(&Operator::identity(&[2])) < 1e-15);
        assert!(coin(PI).max_abs_diff(&sigma_x().scale(-I)) < 1e-15);
        let half = coin(PI / 2.0);
        assert!((half.get(0, 0) - C64::new(SQRT_HALF, 0.0)).norm() < 1e-15);
        assert!((half.get(0, 1) - C64::new(0.0, -SQRT_HALF)).norm() < 1e-15);
    }

    #[test]
    fn shift_limits() {
        assert!(shift(0.0).max_abs_diff(&Operator::identity(&[2])) < 1e-15);
        let quarter = shift(PI / 2.0);
        assert!((quarter.get(0, 0) - I).norm() < 1e-15);
        assert!((quarter.get(1, 1) + I).norm() < 1e-15);
        assert!(shift(PI).max_abs_diff(&Operator::identity(&[2]).scale(C64::new(-1.0, 0.0))) < 1e-12);
    }

    #[test]
    fn single_step_trivial_coin_is_shift() {
        for k in [0.3, 1.2, 4.0] {
            assert!(single_step(0.0, k).max_abs_diff(&shift(k)) < 1e-15);
        }
        assert!(single_step(PI, 0.0).max_abs_diff(&sigma_x().scale(-I)) < 1e-15);
    }

    #[test]
    fn single_step_eigenphases_match_band_energy() {
        // eigenphases of W₀ are ±E with cos E = cos k cos(θ/2)
        for (theta, k) in [(0.7, 0.31), (2.1, 1.4), (PI / 2.0, 2.9), (1.9, 5.5)] {
            let (mu, _) = bloch_log(&single_step(theta, k));
            let e = band_point(k, theta).unwrap().energy;
            assert!((mu - e).abs() < 1e-10, "theta={theta} k={k}");
        }
    }

    #[test]
    fn band_point_examples() {
        // trivial phase: axis on z
        let p = band_point(PI / 2.0, 0.0).unwrap();
        assert!((p.energy - PI / 2.0).abs() < 1e-12);
        assert!((p.axis[0]).abs() < 1e-12 && (p.axis[1]).abs() < 1e-12);
        assert!((p.axis[2] - 1.0).abs() < 1e-12);
        // θ = π at k = π/2: axis on −y
        let p = band_point(PI / 2.0, PI).unwrap();
        assert!((p.energy - PI / 2.0).abs() < 1e-12);
        assert!((p.axis[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn band_point_degenerate_is_signalled() {
        match band_point(0.0, 0.0) {
            Err(WalkError::DegeneratePoint { .. }) => {}
            other => panic!("expected degenerate point, got {other:?}"),
        }
    }

    #[test]
    fn axis_is_unit_and_chiral_perpendicular() {
        for theta in [0.4, 1.0, 2.0, 3.0, 5.2] {
            for step in 0..24 {
                let k = TAU * step as f64 / 24.0;
                let p = band_point(k, theta).unwrap();
                let norm: f64 = p.axis.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-10);
                let dot: f64 = p
                    .axis
                    .iter()
                    .zip(p.chiral_axis.iter())
                    .map(|(a, b)| a * b)
                    .sum();
                assert!(dot.abs() < 1e-10, "n·A = {dot:.2e} at theta={theta}, k={k}");
            }
        }
    }

    #[test]
    fn chiral_conjugation_negates_band_hamiltonian() {
        // Γ = exp(i(π/2) A_θ·σ) sends E n·σ to −E n·σ since n ⟂ A_θ.
        for theta in [0.6, 1.7, 2.8] {
            for k in [0.35, 1.1, 2.2, 4.4] {
                let p = band_point(k, theta).unwrap();
                let n_sigma = &(&sigma_x().scale(C64::new(p.axis[0], 0.0))
                    + &sigma_y().scale(C64::new(p.axis[1], 0.0)))
                    + &sigma_z().scale(C64::new(p.axis[2], 0.0));
                let h = n_sigma.scale(C64::new(p.energy, 0.0));
                let a_sigma = &sigma_y().scale(C64::new(p.chiral_axis[1], 0.0))
                    + &sigma_z().scale(C64::new(p.chiral_axis[2], 0.0));
                let gamma = crate::linalg::matexp_hermitian(&a_sigma, -PI / 2.0).unwrap();
                let conj = &(&gamma * &h) * &gamma.adjoint();
                let neg = h.scale(C64::new(-1.0, 0.0));
                assert!(conj.max_abs_diff(&neg) < 1e-8);
            }
        }
    }

    #[test]
    fn single_step_log_axis_chiral_wrt_reflected_angle() {
        // The log axis of W₀ = S₀R(θ) lies on the great circle perpendicular
        // to A_{−θ} = (0, cos θ/2, −sin θ/2).
        for theta in [0.5, 1.3, 2.4] {
            for k in [0.2, 1.0, 2.8] {
                let (_, m) = bloch_log(&single_step(theta, k));
                let a = chiral_axis(-theta);
                let dot: f64 = m.iter().zip(a.iter()).map(|(x, y)| x * y).sum();
                assert!(dot.abs() < 1e-10, "theta={theta} k={k} dot={dot:.2e}");
            }
        }
    }

    #[test]
    fn winding_numbers() {
        assert_eq!(
            winding_number(0.0, 256).unwrap(),
            WindingResult {
                winding: 0,
                degenerate: true
            }
        );
        assert_eq!(winding_number(2.0 * PI / 3.0, 256).unwrap().winding, 1);
        assert_eq!(winding_number(PI, 256).unwrap().winding, 1);
        assert_eq!(winding_number(PI / 3.0, 64).unwrap().winding, 1);
        assert!(matches!(
            winding_number(1.0, 8),
            Err(WalkError::GridTooSmall(8))
        ));
    }

    #[test]
    fn trivial_coin_sequence_reduces_to_pure_shift() {
        // odd N, 2N steps: the S^m factors close the zone and cancel
        for n in [1usize, 3, 5] {
            let params = WalkParams::new(0.0, 0.77, n).unwrap();
            let seq = walk_sequence(&params);
            let mut expect = Operator::identity(&[2]);
            for _ in 0..2 * n {
                expect = &shift(0.77) * &expect;
            }
            assert!(seq.max_abs_diff(&expect) < 1e-12, "N={n}");
        }
    }

    #[test]
    fn trivial_coin_even_step_closed_form() {
        // test-only identity: W^[N',1] = S^{(N'+1)N'/2}·S₀^{N'} for even N'
        for steps in [2usize, 4, 6] {
            let k = 1.23;
            let delta = TAU / steps as f64;
            let seq = walk_product(0.0, k, steps, delta);
            let power = steps * (steps + 1) / 2;
            let mut expect = shift(delta * power as f64);
            for _ in 0..steps {
                expect = &expect * &shift(k);
            }
            assert!(seq.max_abs_diff(&expect) < 1e-12, "steps={steps}");
        }
    }

    #[test]
    fn n_equals_one_sequence_by_hand() {
        // N = 1: S = shift(2π) = 1, so the sequence is S²W₀·S·W₀ = W₀²
        let (theta, k) = (1.1, 0.6);
        let params = WalkParams::new(theta, k, 1).unwrap();
        let w0 = single_step(theta, k);
        let hand = &(&shift(2.0 * TAU) * &w0) * &(&shift(TAU) * &w0);
        assert!(walk_sequence(&params).max_abs_diff(&hand) < 1e-13);
    }

    #[test]
    fn walk_params_validation() {
        assert!(WalkParams::new(1.0, 0.0, 2).is_err());
        assert!(WalkParams::new(1.0, 0.0, 0).is_err());
        let p = WalkParams::new(1.0, 0.5, 5).unwrap();
        assert_eq!(p.total_steps(), 10);
        assert!((p.delta_k() - TAU / 5.0).abs() < 1e-15);
    }

    #[test]
    fn revival_residual_examples() {
        // θ = π: cos(π/2) = 0, exact refocusing for any odd N
        for n in [1usize, 3, 7] {
            assert!(revival_residual(PI, n).unwrap() < 1e-10);
        }
        // θ = 2π/3, N = 3: 2·(1/2)³ = 0.25
        let r = revival_residual(2.0 * PI / 3.0, 3).unwrap();
        assert!((r - 0.25).abs() < 1e-10, "residual {r}");
        // θ = π/2, N = 5: 2·(√2/2)⁵
        let r = revival_residual(PI / 2.0, 5).unwrap();
        assert!((r - 2.0 * SQRT_HALF.powi(5)).abs() < 1e-10);
    }

    #[test]
    fn revival_matches_formula_for_theta_grid() {
        for &n in &[3usize, 5, 7, 9] {
            for step in 1..12 {
                let theta = TAU * step as f64 / 12.5;
                let r = revival_residual(theta, n).unwrap();
                let b = revival_bound(theta, n);
                assert!((r - b).abs() < 1e-9, "theta={theta} N={n}: {r} vs {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn sequence_is_unitary(theta in 0.0..TAU, k in 0.0..TAU, idx in 0usize..4) {
            let n = [1usize, 3, 5, 7][idx];
            let params = WalkParams::new(theta, k, n).unwrap();
            prop_assert!(walk_sequence(&params).unitarity_deviation() < 1e-10);
        }

        #[test]
        fn revival_bound_holds_at_any_momentum(theta in 0.05..6.2, k in 0.0..TAU, idx in 0usize..3) {
            let n = [3usize, 5, 7][idx];
            let params = WalkParams::new(theta, k, n).unwrap();
            let seq = walk_sequence(&params);
            let residual = operator_norm(&(&seq + &Operator::identity(&[2])));
            prop_assert!(residual <= revival_bound(theta, n) + 1e-9);
        }

        #[test]
        fn band_energy_relation(theta in 0.05..6.2, k in 0.0..TAU) {
            if let Ok(p) = band_point(k, theta) {
                prop_assert!((p.energy.cos() - k.cos()*(theta/2.0).cos()).abs() < 1e-12);
            }
        }
    }
}
