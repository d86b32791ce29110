//! Trapped-ion and Rydberg collective-spin walks.
//!
//! The Mølmer–Sørensen gate U_MS(θ,φ) = exp(−i(θ/4)(cos φ S_x + sin φ S_y)²)
//! with collective spin S = Σ_i σ_i/2 (ancilla included) conjugates an
//! ancilla z rotation into one coin rotation per eigenvalue λ of the
//! neighbor spin S̃_x, with coin argument θλ/2. Interleaving with ancilla z
//! rotations then reflects about the λ = 0 subspace — for unit weights the
//! balanced strings, which exist only for an even number of ions. Weighted
//! couplings turn the same reflection into an oracle for the partition
//! problem. Rydberg σ^z σ^z interactions give the x↔z-rotated version.
//!
//! Qubits use the plain computational ordering here (index 0 is |0⟩ with
//! σ_z = +1); the ancilla is ion 0, the leftmost tensor factor.

use crate::linalg::{kron, matexp_hermitian, Operator, C64, I};
use crate::qsp::{find_phases, qsp_response, FindPhasesOptions, TargetPolynomial};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IonError {
    #[error("half-step count must be a positive odd integer, got {0}")]
    EvenHalfSteps(usize),
    #[error("the collective spin has a zero eigenvalue only for an even ion count, got {0}")]
    OddIonCount(usize),
    #[error("partition instances need at least two integers, got {0}")]
    TooFewIntegers(usize),
    #[error("full-space construction capped at 12 ions, got {0}")]
    TooManyIons(usize),
    #[error("qsp mechanism failed: {0}")]
    Qsp(#[from] crate::qsp::QspError),
}

/// Collective spin S̃ = Σ_j w_j σ_j over the neighbor ions, tagged with its
/// axis. Eigenvalues are reported in Pauli units (Σ ±w_j); the spin-half
/// value that enters every coin argument is half of that.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollectiveSpin {
    pub weights: Vec<f64>,
    pub axis: SpinAxis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinAxis {
    X,
    Z,
}

impl CollectiveSpin {
    pub fn uniform(n: usize, axis: SpinAxis) -> Self {
        CollectiveSpin {
            weights: vec![1.0; n],
            axis,
        }
    }

    pub fn n_ions(&self) -> usize {
        self.weights.len()
    }

    /// Pauli eigenvalue Σ_j ±w_j for a sign assignment (false = +1 branch,
    /// i.e. |0⟩ for the z axis and |+⟩ for the x axis).
    pub fn pauli_eigenvalue(&self, downs: &[bool]) -> f64 {
        self.weights
            .iter()
            .zip(downs)
            .map(|(&w, &down)| if down { -w } else { w })
            .sum()
    }

    /// Spin-half eigenvalue, the λ that enters cos(θλ/2).
    pub fn spin_eigenvalue(&self, downs: &[bool]) -> f64 {
        self.pauli_eigenvalue(downs) / 2.0
    }

    /// Σ_j w_j σ_j as a matrix on the neighbor register.
    pub fn operator_pauli(&self) -> Operator {
        let n = self.n_ions();
        let single = match self.axis {
            SpinAxis::X => crate::linalg::sigma_x(),
            SpinAxis::Z => crate::linalg::sigma_z(),
        };
        let mut sum = Operator::zeros(&vec![2; n]);
        for (j, &w) in self.weights.iter().enumerate() {
            let mut term = if j == 0 {
                single.clone()
            } else {
                Operator::identity(&[2])
            };
            for site in 1..n {
                let f = if site == j {
                    single.clone()
                } else {
                    Operator::identity(&[2])
                };
                term = kron(&term, &f);
            }
            sum = &sum + &term.scale(C64::new(w, 0.0));
        }
        sum
    }

    /// Sorted distinct Pauli eigenvalues over all sign assignments.
    pub fn pauli_spectrum(&self) -> Vec<f64> {
        let n = self.n_ions();
        let mut values: Vec<f64> = (0..1usize << n)
            .map(|code| {
                let downs: Vec<bool> = (0..n).map(|j| (code >> (n - 1 - j)) & 1 == 1).collect();
                self.pauli_eigenvalue(&downs)
            })
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        values
    }
}

/// Mølmer–Sørensen unitary exp(−i(θ/4)(cos φ S_x + sin φ S_y)²) over
/// `total_ions` ions, with spin-half collective operators S = Σ σ/2.
pub fn ms_unitary(theta: f64, varphi: f64, total_ions: usize) -> Operator {
    let dims = vec![2usize; total_ions];
    let sx = CollectiveSpin::uniform(total_ions, SpinAxis::X).operator_pauli();
    let sy = {
        let mut sum = Operator::zeros(&dims);
        for j in 0..total_ions {
            let mut term = if j == 0 {
                crate::linalg::sigma_y()
            } else {
                Operator::identity(&[2])
            };
            for site in 1..total_ions {
                let f = if site == j {
                    crate::linalg::sigma_y()
                } else {
                    Operator::identity(&[2])
                };
                term = kron(&term, &f);
            }
            sum = &sum + &term;
        }
        sum
    };
    let axis = &sx.scale(C64::new(varphi.cos() / 2.0, 0.0))
        + &sy.scale(C64::new(varphi.sin() / 2.0, 0.0));
    let squared = &axis * &axis;
    matexp_hermitian(&squared, theta / 4.0).expect("S² is Hermitian")
}

/// σ-axis rotation exp(iθσ/2)-style phase on ion 0 of an (n+1)-ion register.
fn ancilla_op(op: Operator, n_neighbors: usize) -> Operator {
    kron(&op, &Operator::identity(&vec![2; n_neighbors]))
}

fn exp_ancilla_z(angle: f64, n_neighbors: usize) -> Operator {
    // exp(i·angle·σ_0^z)
    ancilla_op(
        Operator::from_diagonal(
            &[2],
            &[
                (I * C64::new(angle, 0.0)).exp(),
                (-I * C64::new(angle, 0.0)).exp(),
            ],
        ),
        n_neighbors,
    )
}

fn exp_ancilla_x(angle: f64, n_neighbors: usize) -> Operator {
    let rot = matexp_hermitian(&crate::linalg::sigma_x(), -angle).expect("sigma_x Hermitian");
    ancilla_op(rot, n_neighbors)
}

/// Conjugated MS pulse w_0 = U_MS(−θ,0)·exp(i(π/2)σ_0^z)·U_MS(θ,0) over the
/// ancilla plus `n_neighbors` ions.
pub fn ion_walk_w0(theta: f64, n_neighbors: usize) -> Operator {
    let total = n_neighbors + 1;
    let plus = ms_unitary(theta, 0.0, total);
    let minus = ms_unitary(-theta, 0.0, total);
    &minus * &(&exp_ancilla_z(PI / 2.0, n_neighbors) * &plus)
}

/// Eigen-block form of [`ion_walk_w0`]: per S̃_x spin eigenvalue λ the
/// ancilla rotates as exp[i(π/2)(cos(θλ/2)σ_z + sin(θλ/2)σ_y)].
pub fn ion_walk_w0_blocks(theta: f64, n_neighbors: usize) -> Operator {
    let spin = CollectiveSpin::uniform(n_neighbors, SpinAxis::X);
    blocks_over_x_basis(&spin, n_neighbors, |lam| {
        let axis = &crate::linalg::sigma_z().scale(C64::new((theta * lam / 2.0).cos(), 0.0))
            + &crate::linalg::sigma_y().scale(C64::new((theta * lam / 2.0).sin(), 0.0));
        matexp_hermitian(&axis, -PI / 2.0).expect("axis Hermitian")
    })
}

/// One ion walk step W_0 = S_0·(w_0·e^{i(π/2)σ_0^z}) with S_0 = e^{iφσ_0^z}.
pub fn ion_walk_step(theta: f64, phi: f64, n_neighbors: usize) -> Operator {
    let w0 = ion_walk_w0(theta, n_neighbors);
    &exp_ancilla_z(phi, n_neighbors) * &(&w0 * &exp_ancilla_z(PI / 2.0, n_neighbors))
}

/// Eigen-block form of [`ion_walk_step`]: −S_0·[[cos(θλ/2), i sin(θλ/2)],
/// [i sin(θλ/2), cos(θλ/2)]] per spin eigenvalue λ.
pub fn ion_walk_step_blocks(theta: f64, phi: f64, n_neighbors: usize) -> Operator {
    let spin = CollectiveSpin::uniform(n_neighbors, SpinAxis::X);
    blocks_over_x_basis(&spin, n_neighbors, |lam| {
        let (c, s) = ((theta * lam / 2.0).cos(), (theta * lam / 2.0).sin());
        let coin = Operator::from_fn(&[2], |i, j| {
            if i == j {
                C64::new(c, 0.0)
            } else {
                I * C64::new(s, 0.0)
            }
        });
        let s0 = Operator::from_diagonal(
            &[2],
            &[(I * C64::new(phi, 0.0)).exp(), (-I * C64::new(phi, 0.0)).exp()],
        );
        (&s0 * &coin).scale(C64::new(-1.0, 0.0))
    })
}

/// Assemble ⊕_λ block(λ) ⊗ |λ⟩⟨λ| where λ runs over the x-basis spin
/// eigenvalues of the neighbors (the ancilla factor comes first).
fn blocks_over_x_basis(
    spin: &CollectiveSpin,
    n_neighbors: usize,
    mut block: impl FnMut(f64) -> Operator,
) -> Operator {
    let nb_dim = 1usize << n_neighbors;
    let dims = vec![2usize; n_neighbors + 1];
    let mut mat = DMatrix::<C64>::zeros(2 * nb_dim, 2 * nb_dim);
    for code in 0..nb_dim {
        let downs: Vec<bool> = (0..n_neighbors)
            .map(|j| (code >> (n_neighbors - 1 - j)) & 1 == 1)
            .collect();
        let lam = spin.spin_eigenvalue(&downs);
        let b = block(lam);
        for anc_r in 0..2 {
            for anc_c in 0..2 {
                mat[(anc_r * nb_dim + code, anc_c * nb_dim + code)] = b.get(anc_r, anc_c);
            }
        }
    }
    let op = Operator::new(mat, dims.clone()).expect("block dims");
    // rotate the neighbor register from the x eigenbasis back to z
    let h2 = Operator::from_fn(&[2], |i, j| {
        let v = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(if i == 1 && j == 1 { -v } else { v }, 0.0)
    });
    let mut v = Operator::identity(&[2]);
    for _ in 0..n_neighbors {
        v = kron(&v, &h2);
    }
    &(&v * &op) * &v.adjoint()
}

/// Reflection report for the collective-spin walk.
#[derive(Clone, Debug)]
pub struct IonReflectionReport {
    /// Fidelity with the ancilla initialized in |0⟩ and in |1⟩.
    pub fidelity_anc0: f64,
    pub fidelity_anc1: f64,
    /// Dimension of the λ = 0 (rotated) subspace.
    pub zero_subspace_dim: usize,
    pub half_steps: usize,
    pub theta: f64,
    pub phi: f64,
}

/// Interleave the ion walk step with S = exp(i(2π/N)σ_0^z) powers over 2N
/// steps and compare against the exact target: e^{±2iNφ} on the λ = 0
/// subspace, −1 on every other eigenvalue block (n = 2^{N_q}).
pub fn ion_reflection(
    n_neighbors: usize,
    theta: f64,
    half_steps: usize,
    phi: f64,
) -> Result<IonReflectionReport, IonError> {
    if n_neighbors % 2 == 1 {
        return Err(IonError::OddIonCount(n_neighbors));
    }
    if half_steps == 0 || half_steps.is_multiple_of(2) {
        return Err(IonError::EvenHalfSteps(half_steps));
    }
    if n_neighbors > 11 {
        return Err(IonError::TooManyIons(n_neighbors));
    }
    let w0 = ion_walk_step(theta, phi, n_neighbors);
    let mut u = Operator::identity(w0.dims());
    for m in 1..=2 * half_steps {
        u = &(&exp_ancilla_z(TAU * m as f64 / half_steps as f64, n_neighbors) * &w0) * &u;
    }
    let spin = CollectiveSpin::uniform(n_neighbors, SpinAxis::X);
    let nb_dim = 1usize << n_neighbors;
    // targets live in the x eigenbasis of the neighbors
    let mut zero_subspace_dim = 0;
    let build_target = |anc_sign: f64| -> DMatrix<C64> {
        let mut diag = DMatrix::<C64>::zeros(nb_dim, nb_dim);
        for code in 0..nb_dim {
            let downs: Vec<bool> = (0..n_neighbors)
                .map(|j| (code >> (n_neighbors - 1 - j)) & 1 == 1)
                .collect();
            let lam = spin.spin_eigenvalue(&downs);
            diag[(code, code)] = if lam.abs() < 1e-12 {
                (I * C64::new(anc_sign * 2.0 * half_steps as f64 * phi, 0.0)).exp()
            } else {
                C64::new(-1.0, 0.0)
            };
        }
        diag
    };
    for code in 0..nb_dim {
        let downs: Vec<bool> = (0..n_neighbors)
            .map(|j| (code >> (n_neighbors - 1 - j)) & 1 == 1)
            .collect();
        if spin.spin_eigenvalue(&downs).abs() < 1e-12 {
            zero_subspace_dim += 1;
        }
    }
    // rotate M into the x basis so the target is diagonal there
    let h2 = Operator::from_fn(&[2], |i, j| {
        let v = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(if i == 1 && j == 1 { -v } else { v }, 0.0)
    });
    let mut v = h2.clone();
    for _ in 1..n_neighbors {
        v = kron(&v, &h2);
    }
    let fidelity_for = |anc: usize| -> f64 {
        let m = DMatrix::from_fn(nb_dim, nb_dim, |i, j| u.get(anc * nb_dim + i, anc * nb_dim + j));
        let m_x = v.matrix().adjoint() * m * v.matrix();
        let target = build_target(if anc == 0 { 1.0 } else { -1.0 });
        crate::linalg::average_gate_fidelity(&m_x, &target)
    };
    Ok(IonReflectionReport {
        fidelity_anc0: fidelity_for(0),
        fidelity_anc1: fidelity_for(1),
        zero_subspace_dim,
        half_steps,
        theta,
        phi,
    })
}

/// Rydberg walk pulse w_0 = e^{iH_R t}·e^{iφσ_0^x}·e^{−iH_R t} with
/// H_R = Σ_{i<j} V_ij (σ_i^z/2)(σ_j^z/2) restricted to the star (i = 0).
pub fn rydberg_walk_w0(couplings: &[f64], t: f64, phi: f64) -> Operator {
    let n = couplings.len();
    let dims = vec![2usize; n + 1];
    // H_R is diagonal: (1/4)·(±1 ancilla)·Σ_j V_0j (±1)_j
    let total = 1usize << (n + 1);
    let diag: Vec<C64> = (0..total)
        .map(|idx| {
            let anc_down = (idx >> n) & 1 == 1;
            let mut sz = 0.0;
            for (j, &v) in couplings.iter().enumerate() {
                let down = (idx >> (n - 1 - j)) & 1 == 1;
                sz += if down { -v } else { v };
            }
            let h = 0.25 * (if anc_down { -1.0 } else { 1.0 }) * sz;
            C64::new(h, 0.0)
        })
        .collect();
    let hr = Operator::from_diagonal(&dims, &diag);
    let forward = matexp_hermitian(&hr, -t).expect("H_R Hermitian"); // e^{+iH_R t}
    let backward = matexp_hermitian(&hr, t).expect("H_R Hermitian");
    &forward * &(&exp_ancilla_x(phi, n) * &backward)
}

/// Eigen-block form of [`rydberg_walk_w0`]: per weighted Pauli eigenvalue λ
/// of S̃_z the ancilla rotates as exp[iφ(cos(tλ/2)σ_x − sin(tλ/2)σ_y)].
pub fn rydberg_walk_w0_blocks(couplings: &[f64], t: f64, phi: f64) -> Operator {
    let n = couplings.len();
    let nb_dim = 1usize << n;
    let dims = vec![2usize; n + 1];
    let mut mat = DMatrix::<C64>::zeros(2 * nb_dim, 2 * nb_dim);
    let spin = CollectiveSpin {
        weights: couplings.to_vec(),
        axis: SpinAxis::Z,
    };
    for code in 0..nb_dim {
        let downs: Vec<bool> = (0..n).map(|j| (code >> (n - 1 - j)) & 1 == 1).collect();
        let lam = spin.pauli_eigenvalue(&downs);
        let axis = &crate::linalg::sigma_x().scale(C64::new((t * lam / 2.0).cos(), 0.0))
            - &crate::linalg::sigma_y().scale(C64::new((t * lam / 2.0).sin(), 0.0));
        let b = matexp_hermitian(&axis, -phi).expect("axis Hermitian");
        for anc_r in 0..2 {
            for anc_c in 0..2 {
                mat[(anc_r * nb_dim + code, anc_c * nb_dim + code)] = b.get(anc_r, anc_c);
            }
        }
    }
    Operator::new(mat, dims).expect("block dims")
}

/// How the partition reflection is compiled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionMechanism {
    /// Interleaved topological walk with auto-chosen interaction time and
    /// step count.
    Walk,
    /// Signal-processing phases for a reflection target with dips at every
    /// occurring block value.
    Qsp,
}

/// Outcome of the partition-problem oracle.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub weights: Vec<i64>,
    pub mechanism: PartitionMechanism,
    pub has_balanced_partition: bool,
    pub zero_subspace_dim: usize,
    /// Fidelity against the exact reflection (or against −1 when no
    /// balanced partition exists).
    pub fidelity: f64,
    /// Interaction time per pulse (in units where the Ising couplings are
    /// the integers themselves).
    pub interaction_time: f64,
    /// Walk half-steps, or the qsp polynomial degree.
    pub effort: usize,
}

/// Reflection about the subspace where Σ_j a_j z_j = 0 (z_j = ±1), built by
/// a weighted collective-spin walk on the star H_R = Σ_j a_j σ_0^zσ_j^z/4,
/// or by signal-processing phases over the same blocks.
pub fn partition_oracle(
    weights: &[i64],
    mechanism: PartitionMechanism,
) -> Result<PartitionReport, IonError> {
    let n = weights.len();
    if n < 2 {
        return Err(IonError::TooFewIntegers(n));
    }
    if n > 11 {
        return Err(IonError::TooManyIons(n));
    }
    let couplings: Vec<f64> = weights.iter().map(|&a| a as f64).collect();
    let spin = CollectiveSpin {
        weights: couplings.clone(),
        axis: SpinAxis::Z,
    };
    let nb_dim = 1usize << n;
    let lambdas: Vec<f64> = (0..nb_dim)
        .map(|code| {
            let downs: Vec<bool> = (0..n).map(|j| (code >> (n - 1 - j)) & 1 == 1).collect();
            spin.pauli_eigenvalue(&downs)
        })
        .collect();
    let zero_subspace_dim = lambdas.iter().filter(|l| l.abs() < 1e-9).count();
    let mut distinct_nonzero: Vec<f64> = lambdas.iter().map(|l| l.abs()).filter(|l| *l > 1e-9).collect();
    distinct_nonzero.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct_nonzero.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    // pick the pulse time minimizing the worst |cos(tλ/2)| over the
    // occurring nonzero eigenvalues
    let mut best_t = PI / 2.0;
    let mut best_worst = f64::MAX;
    for i in 1..=720 {
        let t = PI * i as f64 / 720.0;
        let worst = distinct_nonzero
            .iter()
            .map(|&l| (t * l / 2.0).cos().abs())
            .fold(0.0, f64::max);
        if worst < best_worst {
            best_worst = worst;
            best_t = t;
        }
    }

    // the exact partition reflection is diagonal in the computational basis
    let target_diag: Vec<C64> = lambdas
        .iter()
        .map(|l| {
            if l.abs() < 1e-9 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(-1.0, 0.0)
            }
        })
        .collect();

    match mechanism {
        PartitionMechanism::Walk => {
            // smallest odd N with 2·worst^N below 1e-4 (capped)
            let mut half_steps = 3usize;
            while 2.0 * best_worst.powi(half_steps as i32) > 1e-4 && half_steps < 99 {
                half_steps += 2;
            }
            let w0 = {
                // W_0 = S_0·(w_0(t, π/2)·e^{i(π/2)σ_0^x}); the reflection
                // point has shift S_0 = 1
                let inner = rydberg_walk_w0(&couplings, best_t, PI / 2.0);
                &inner * &exp_ancilla_x(PI / 2.0, n)
            };
            let mut u = Operator::identity(w0.dims());
            for m in 1..=2 * half_steps {
                u = &(&exp_ancilla_x(TAU * m as f64 / half_steps as f64, n) * &w0) * &u;
            }
            // the ancilla starts and returns along x; measure the |+⟩ block
            let fidelity = {
                let m = plus_block(&u, n);
                let target = DMatrix::from_fn(nb_dim, nb_dim, |i, j| {
                    if i == j {
                        target_diag[i]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                crate::linalg::average_gate_fidelity(&m, &target)
            };
            Ok(PartitionReport {
                weights: weights.to_vec(),
                mechanism,
                has_balanced_partition: zero_subspace_dim > 0,
                zero_subspace_dim,
                fidelity,
                interaction_time: best_t,
                effort: half_steps,
            })
        }
        PartitionMechanism::Qsp => {
            let roots: Vec<f64> = distinct_nonzero
                .iter()
                .map(|&l| (best_t * l / 2.0).cos().abs())
                .filter(|c| *c > 1e-9)
                .collect();
            let mut dedup = roots.clone();
            dedup.sort_by(|a, b| a.partial_cmp(b).unwrap());
            dedup.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let target = TargetPolynomial::RootReflection { roots: dedup };
            let degree = target.degree();
            let found = find_phases(&target, degree, FindPhasesOptions::default())?;
            // per-block response at x = cos(tλ/2)
            let mut tr_mu = C64::new(0.0, 0.0);
            let mut tr_mm = 0.0;
            for (lam, t_val) in lambdas.iter().zip(&target_diag) {
                let x = (best_t * lam / 2.0).cos();
                let r = qsp_response(&found.sequence, x);
                tr_mu += r * t_val.conj();
                tr_mm += r.norm_sqr();
            }
            let nf = nb_dim as f64;
            let fidelity = (tr_mu.norm_sqr() + tr_mm) / (nf * (nf + 1.0));
            Ok(PartitionReport {
                weights: weights.to_vec(),
                mechanism,
                has_balanced_partition: zero_subspace_dim > 0,
                zero_subspace_dim,
                fidelity,
                interaction_time: best_t,
                effort: degree,
            })
        }
    }
}

/// ⟨+| U |+⟩ over the neighbor register (ancilla along x).
fn plus_block(u: &Operator, n_neighbors: usize) -> DMatrix<C64> {
    let nb_dim = 1usize << n_neighbors;
    DMatrix::from_fn(nb_dim, nb_dim, |i, j| {
        let half = C64::new(0.5, 0.0);
        half * (u.get(i, j) + u.get(i, nb_dim + j) + u.get(nb_dim + i, j) + u.get(nb_dim + i, nb_dim + j))
    })
}

/// Brute-force balanced-partition oracle: all sign assignments with
/// Σ a_j z_j = 0.
pub fn balanced_assignments(weights: &[i64]) -> Vec<Vec<i8>> {
    let n = weights.len();
    (0..1usize << n)
        .filter_map(|code| {
            let signs: Vec<i8> = (0..n)
                .map(|j| if (code >> (n - 1 - j)) & 1 == 1 { -1 } else { 1 })
                .collect();
            let sum: i64 = weights
                .iter()
                .zip(&signs)
                .map(|(&a, &s)| a * s as i64)
                .sum();
            (sum == 0).then_some(signs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_y, sigma_z};

    #[test]
    fn ms_identity_at_zero_angle() {
        let u = ms_unitary(0.0, 0.3, 3);
        assert!(u.max_abs_diff(&Operator::identity(&[2, 2, 2])) < 1e-13);
    }

    #[test]
    fn ms_two_ions_hand_formula() {
        // S_x² = (1/2)(1 + σ_x⊗σ_x), so
        // U_MS(θ) = e^{−iθ/8}[cos(θ/8) − i sin(θ/8) σ_x⊗σ_x]
        let theta = PI / 2.0;
        let u = ms_unitary(theta, 0.0, 2);
        let phase = (-I * C64::new(theta / 8.0, 0.0)).exp();
        let xx = kron(&sigma_x(), &sigma_x());
        let hand = &Operator::identity(&[2, 2]).scale(C64::new((theta / 8.0).cos(), 0.0))
            + &xx.scale(-I * C64::new((theta / 8.0).sin(), 0.0));
        let hand = hand.scale(phase);
        assert!(u.max_abs_diff(&hand) < 1e-13);
    }

    #[test]
    fn ms_inverse_pair() {
        let u = ms_unitary(0.9, 0.0, 3);
        let v = ms_unitary(-0.9, 0.0, 3);
        assert!((&u * &v).max_abs_diff(&Operator::identity(&[2, 2, 2])) < 1e-12);
    }

    #[test]
    fn collective_spin_spectrum() {
        let spin = CollectiveSpin::uniform(4, SpinAxis::Z);
        assert_eq!(spin.pauli_spectrum(), vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        let op = spin.operator_pauli();
        assert!(op.is_hermitian(1e-12));
        // weighted case
        let spin = CollectiveSpin {
            weights: vec![1.0, 2.0],
            axis: SpinAxis::Z,
        };
        assert_eq!(spin.pauli_spectrum(), vec![-3.0, -1.0, 1.0, 3.0]);
    }

    #[test]
    fn rotate_x_identity() {
        // e^{(i/2)kσ_x} = −e^{(i/2)π(cos(k/2)σ_z + sin(k/2)σ_y)}·e^{(i/2)πσ_z}
        for k in [0.0, 0.6, 1.7, 3.0, 5.1] {
            let lhs = matexp_hermitian(&sigma_x(), -k / 2.0).unwrap();
            let axis = &sigma_z().scale(C64::new((k / 2.0).cos(), 0.0))
                + &sigma_y().scale(C64::new((k / 2.0).sin(), 0.0));
            let rhs = &matexp_hermitian(&axis, -PI / 2.0).unwrap()
                * &matexp_hermitian(&sigma_z(), -PI / 2.0).unwrap();
            assert!(lhs.max_abs_diff(&rhs.scale(C64::new(-1.0, 0.0))) < 1e-12, "k={k}");
        }
    }

    #[test]
    fn ion_w0_trivial_angle() {
        let w0 = ion_walk_w0(0.0, 2);
        let expect = exp_ancilla_z(PI / 2.0, 2);
        assert!(w0.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn ion_w0_dual_construction() {
        for (theta, n) in [(PI / 2.0, 2usize), (0.77, 3), (2.1, 2)] {
            let gates = ion_walk_w0(theta, n);
            let blocks = ion_walk_w0_blocks(theta, n);
            let dev = gates.max_abs_diff(&blocks);
            assert!(dev < 1e-10, "theta={theta} n={n}: {dev:.3e}");
        }
    }

    #[test]
    fn ion_w0_zero_eigenspace_is_pure_z_rotation() {
        // a λ = 0 neighbor state (e.g. |+−⟩) leaves the ancilla rotating
        // about z regardless of θ
        let n = 2;
        let w0 = ion_walk_w0(1.3, n);
        // |+−⟩ = (|00⟩ − |01⟩ + |10⟩ − |11⟩)/2
        let nb = [0.5, -0.5, 0.5, -0.5];
        for anc in 0..2 {
            let mut input = nalgebra::DVector::<C64>::zeros(8);
            for (i, &v) in nb.iter().enumerate() {
                input[anc * 4 + i] = C64::new(v, 0.0);
            }
            let out = w0.matrix() * &input;
            let expect_phase = if anc == 0 { I } else { -I }; // e^{±iπ/2}
            let expect = input.map(|z| z * expect_phase);
            let dev = (out - expect).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-12, "anc={anc}");
        }
    }

    #[test]
    fn ion_step_dual_construction() {
        for (theta, phi, n) in [(0.9, 0.4, 2usize), (2.2, 1.3, 3)] {
            let gates = ion_walk_step(theta, phi, n);
            let blocks = ion_walk_step_blocks(theta, phi, n);
            let dev = gates.max_abs_diff(&blocks);
            assert!(dev < 1e-10, "theta={theta} phi={phi} n={n}: {dev:.3e}");
        }
    }

    #[test]
    fn ion_step_block_entries() {
        // λ = 0 block is −S_0; nonzero blocks carry cos(θλ/2), i sin(θλ/2)
        let (theta, phi, n) = (1.1, 0.7, 2usize);
        let step = ion_walk_step_blocks(theta, phi, n);
        // sanity via the gate-product route on a λ = ±1 state:
        let gates = ion_walk_step(theta, phi, n);
        assert!(step.max_abs_diff(&gates) < 1e-10);
        // project onto |++⟩ (λ = 1): ancilla block = −S_0·coin(θ/2 angle)
        let plusplus = [0.5, 0.5, 0.5, 0.5];
        let mut block = DMatrix::<C64>::zeros(2, 2);
        for anc_in in 0..2 {
            let mut input = nalgebra::DVector::<C64>::zeros(8);
            for (i, &v) in plusplus.iter().enumerate() {
                input[anc_in * 4 + i] = C64::new(v, 0.0);
            }
            let out = gates.matrix() * &input;
            for anc_out in 0..2 {
                let mut bra = nalgebra::DVector::<C64>::zeros(8);
                for (i, &v) in plusplus.iter().enumerate() {
                    bra[anc_out * 4 + i] = C64::new(v, 0.0);
                }
                block[(anc_out, anc_in)] = bra.dotc(&out);
            }
        }
        let lam = 1.0;
        let (c, s) = ((theta * lam / 2.0).cos(), (theta * lam / 2.0).sin());
        let e = |x: f64| (I * C64::new(x, 0.0)).exp();
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[
                -e(phi) * C64::new(c, 0.0),
                -e(phi) * I * C64::new(s, 0.0),
                -e(-phi) * I * C64::new(s, 0.0),
                -e(-phi) * C64::new(c, 0.0),
            ],
        );
        let dev = (&block - &expect).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "{dev:.3e}");
    }

    #[test]
    fn ion_reflection_exact_at_theta_pi() {
        // N_q = 2, θ = π: cos(θλ/2) = 0 on λ = ±1, so N = 1 already reflects
        let report = ion_reflection(2, PI, 1, 0.0).unwrap();
        assert!((report.fidelity_anc0 - 1.0).abs() < 1e-12);
        assert!((report.fidelity_anc1 - 1.0).abs() < 1e-12);
        assert_eq!(report.zero_subspace_dim, 2);
    }

    #[test]
    fn ion_reflection_converges() {
        let report = ion_reflection(4, 2.0 * PI / 3.0, 7, 0.0).unwrap();
        assert!(report.fidelity_anc0 >= 0.999, "F = {}", report.fidelity_anc0);
        assert_eq!(report.zero_subspace_dim, 6); // C(4, 2)
    }

    #[test]
    fn ion_reflection_block_error_bound() {
        // per-λ deviation from −1 obeys the revival bound 2|cos(θλ/2)|^N
        let (n, theta, half_steps) = (2usize, 2.0 * PI / 3.0, 5usize);
        let w0 = ion_walk_step(theta, 0.0, n);
        let mut u = Operator::identity(w0.dims());
        for m in 1..=2 * half_steps {
            u = &(&exp_ancilla_z(TAU * m as f64 / half_steps as f64, n) * &w0) * &u;
        }
        // |++⟩ has λ = 1
        let plusplus = [0.5, 0.5, 0.5, 0.5];
        let mut input = nalgebra::DVector::<C64>::zeros(8);
        for (i, &v) in plusplus.iter().enumerate() {
            input[i] = C64::new(v, 0.0);
        }
        let out = u.matrix() * &input;
        let amp = input.dotc(&out);
        let bound = 2.0 * (theta * 1.0 / 2.0).cos().abs().powi(half_steps as i32);
        assert!((amp + C64::new(1.0, 0.0)).norm() <= bound + 1e-10);
    }

    #[test]
    fn ion_reflection_rejects_odd_counts() {
        assert!(matches!(
            ion_reflection(3, 1.0, 3, 0.0),
            Err(IonError::OddIonCount(3))
        ));
        assert!(matches!(
            ion_reflection(2, 1.0, 4, 0.0),
            Err(IonError::EvenHalfSteps(4))
        ));
    }

    #[test]
    fn ion_reflection_ancilla_inits_agree_at_reflection_point() {
        // φ = 0: both ancilla initializations give the same subspace phases;
        // at φ ≠ 0 the zero-block phases are conjugate
        let a = ion_reflection(2, 2.0 * PI / 3.0, 5, 0.0).unwrap();
        assert!((a.fidelity_anc0 - a.fidelity_anc1).abs() < 1e-12);
        let b = ion_reflection(2, PI, 1, 0.4).unwrap();
        // exact walk: each init matches its own conjugate-phase target
        assert!((b.fidelity_anc0 - 1.0).abs() < 1e-10);
        assert!((b.fidelity_anc1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rydberg_trivial_limits() {
        let n = 2;
        let w0 = rydberg_walk_w0(&[0.7, 1.3], 0.0, 0.9);
        assert!(w0.max_abs_diff(&exp_ancilla_x(0.9, n)) < 1e-12);
        let w0 = rydberg_walk_w0(&[0.7, 1.3], 1.1, 0.0);
        assert!(w0.max_abs_diff(&Operator::identity(&[2, 2, 2])) < 1e-12);
    }

    #[test]
    fn rydberg_dual_construction() {
        for (v, t, phi) in [
            (vec![0.8, 1.7], 0.9, 0.6),
            (vec![1.0, 1.0], 1.3, 1.1),
            (vec![0.5, 2.0, 1.2], 0.4, 0.8),
        ] {
            let gates = rydberg_walk_w0(&v, t, phi);
            let blocks = rydberg_walk_w0_blocks(&v, t, phi);
            let dev = gates.max_abs_diff(&blocks);
            assert!(dev < 1e-10, "V={v:?}: {dev:.3e}");
        }
    }

    #[test]
    fn partition_equal_pair_reflects_exactly() {
        let report = partition_oracle(&[1, 1], PartitionMechanism::Walk).unwrap();
        assert!(report.has_balanced_partition);
        assert_eq!(report.zero_subspace_dim, 2);
        assert!((report.fidelity - 1.0).abs() < 1e-9, "F = {}", report.fidelity);
        // brute-force oracle agrees: |01⟩ and |10⟩ balance
        let assignments = balanced_assignments(&[1, 1]);
        assert_eq!(assignments.len(), 2);
        assert!(assignments.contains(&vec![1, -1]));
        assert!(assignments.contains(&vec![-1, 1]));
    }

    #[test]
    fn partition_one_two_three() {
        let report = partition_oracle(&[1, 2, 3], PartitionMechanism::Walk).unwrap();
        assert!(report.has_balanced_partition);
        assert_eq!(report.zero_subspace_dim, 2);
        assert!(report.fidelity > 0.999, "F = {}", report.fidelity);
        // (+,+,−) and (−,−,+) balance: 1 + 2 − 3 = 0
        let assignments = balanced_assignments(&[1, 2, 3]);
        assert_eq!(assignments.len(), 2);
        assert!(assignments.contains(&vec![1, 1, -1]));
        assert!(assignments.contains(&vec![-1, -1, 1]));
    }

    #[test]
    fn partition_without_balanced_split() {
        let report = partition_oracle(&[1, 2, 4], PartitionMechanism::Walk).unwrap();
        assert!(!report.has_balanced_partition);
        assert_eq!(report.zero_subspace_dim, 0);
        assert!(balanced_assignments(&[1, 2, 4]).is_empty());
        // the oracle acts as −1 on everything
        assert!(report.fidelity > 0.999, "F = {}", report.fidelity);
    }

    #[test]
    fn partition_qsp_mechanism() {
        let report = partition_oracle(&[1, 2, 3], PartitionMechanism::Qsp).unwrap();
        assert!(report.fidelity > 0.999, "F = {}", report.fidelity);
        assert!(report.has_balanced_partition);
    }

    #[test]
    fn partition_rejects_tiny_instances() {
        assert!(matches!(
            partition_oracle(&[5], PartitionMechanism::Walk),
            Err(IonError::TooFewIntegers(1))
        ));
    }
}
