//! Matrix embedding H = σ⁺⊗A + σ⁻⊗A† and the interleaved rotation sequence.
//!
//! The ancilla basis ordering is fixed globally as {|1⟩, |0⟩}: row/column 0
//! of the ancilla factor is the excited state |1⟩, so σ_z acts as +1 on |1⟩
//! and σ⁺ = |1⟩⟨0|. Under that ordering exp(−iHt) splits into 2×2 blocks on
//! span{|1⟩|l_J⟩, |0⟩|r_J⟩}, one per singular-vector pair of A, each a coin
//! rotation with angle set by Λ_J t. Interleaving with ancilla z rotations
//! runs one topological walk per block: nonzero-Λ blocks refocus to −1 while
//! the dark blocks collect exactly e^{±2iNk}.

use crate::linalg::{
    kron, matexp_hermitian, sigma_minus, sigma_plus, svd, Operator, SvdTriple, C64, I,
};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("half-step count must be a positive odd integer, got {0}")]
    EvenHalfSteps(usize),
}

/// Ancilla basis index under the fixed {|1⟩, |0⟩} ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ancilla {
    /// |1⟩, carried by index 0 (σ_z = +1).
    Excited,
    /// |0⟩, carried by index 1 (σ_z = −1).
    Ground,
}

impl Ancilla {
    pub fn index(self) -> usize {
        match self {
            Ancilla::Excited => 0,
            Ancilla::Ground => 1,
        }
    }
}

/// A square matrix A embedded as H = σ⁺⊗A + σ⁻⊗A†, together with the SVD
/// block data of A.
#[derive(Clone, Debug)]
pub struct EmbeddedSystem {
    a: Operator,
    h: Operator,
    svd: SvdTriple,
}

/// Embed a square matrix. The Hamiltonian lives on dims [2, dims of A].
pub fn embed(a: &Operator) -> EmbeddedSystem {
    let h = &kron(&sigma_plus(), a) + &kron(&sigma_minus(), &a.adjoint());
    EmbeddedSystem {
        a: a.clone(),
        svd: svd(a),
        h,
    }
}

impl EmbeddedSystem {
    pub fn embedded_matrix(&self) -> &Operator {
        &self.a
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.h
    }

    pub fn svd(&self) -> &SvdTriple {
        &self.svd
    }

    /// Dimension of the embedded (non-ancilla) space.
    pub fn inner_dim(&self) -> usize {
        self.a.dim()
    }

    /// Index of one zero-singular-value block, if any.
    pub fn dark_index(&self) -> Option<usize> {
        (0..self.inner_dim()).find(|&j| self.svd.is_zero(j))
    }

    /// exp(−iHt).
    pub fn evolve(&self, t: f64) -> Operator {
        matexp_hermitian(&self.h, t).expect("embedded Hamiltonian is Hermitian by construction")
    }

    /// The same evolution assembled block by block from the SVD: on
    /// span{|1,l_J⟩, |0,r_J⟩} it is the coin matrix with angle Λ_J t.
    pub fn evolve_blocks(&self, t: f64) -> Operator {
        let d = self.inner_dim();
        let mut mat = DMatrix::<C64>::zeros(2 * d, 2 * d);
        for j in 0..d {
            let lam = self.svd.singular_values[j];
            let (c, s) = ((lam * t).cos(), (lam * t).sin());
            let l = self.svd.left.column(j);
            let r = self.svd.right.column(j);
            for row in 0..d {
                for col in 0..d {
                    mat[(row, col)] += C64::new(c, 0.0) * l[row] * l[col].conj();
                    mat[(row, d + col)] += -I * C64::new(s, 0.0) * l[row] * r[col].conj();
                    mat[(d + row, col)] += -I * C64::new(s, 0.0) * r[row] * l[col].conj();
                    mat[(d + row, d + col)] += C64::new(c, 0.0) * r[row] * r[col].conj();
                }
            }
        }
        let mut dims = vec![2];
        dims.extend_from_slice(self.a.dims());
        Operator::new(mat, dims).expect("block assembly dims")
    }

    /// The interleaved sequence S^{2N}W₀ ⋯ S²W₀ SW₀ with
    /// W₀ = (R_z(2k)⊗1)·exp(−iHt) and S = R_z(4π/N)⊗1, for odd N.
    pub fn rotation_sequence(
        &self,
        t: f64,
        k: f64,
        half_steps: usize,
    ) -> Result<Operator, EmbeddingError> {
        if half_steps == 0 || half_steps.is_multiple_of(2) {
            return Err(EmbeddingError::EvenHalfSteps(half_steps));
        }
        let w0 = &ancilla_z(self.a.dims(), 2.0 * k) * &self.evolve(t);
        let mut u = Operator::identity(w0.dims());
        for m in 1..=2 * half_steps {
            let s_m = ancilla_z(self.a.dims(), 4.0 * PI * m as f64 / half_steps as f64);
            u = &(&s_m * &w0) * &u;
        }
        Ok(u)
    }

    /// Exact sequence limit on the ancilla-|1⟩ restriction: e^{2iNk} on the
    /// zero-Λ left vectors and −1 on every other left vector.
    pub fn ideal_rotation(&self, k: f64, half_steps: usize) -> RotationTarget {
        let d = self.inner_dim();
        let phase = (I * C64::new(2.0 * half_steps as f64 * k, 0.0)).exp();
        let mut mat = DMatrix::<C64>::zeros(d, d);
        for j in 0..d {
            let factor = if self.svd.is_zero(j) {
                phase
            } else {
                C64::new(-1.0, 0.0)
            };
            let l = self.svd.left.column(j);
            for row in 0..d {
                for col in 0..d {
                    mat[(row, col)] += factor * l[row] * l[col].conj();
                }
            }
        }
        RotationTarget {
            restricted: mat,
            phi: PI - half_steps as f64 * k,
        }
    }
}

/// Target of the sequence on the ancilla-|1⟩ restriction, with the rotation
/// angle label φ = π − Nk.
#[derive(Clone, Debug)]
pub struct RotationTarget {
    pub restricted: DMatrix<C64>,
    pub phi: f64,
}

/// R_z(θ)⊗1 on [2, inner dims]: diag(e^{iθ/2}, e^{−iθ/2}) on the ancilla in
/// the fixed {|1⟩, |0⟩} ordering.
pub fn ancilla_z(inner_dims: &[usize], theta: f64) -> Operator {
    let rz = Operator::from_diagonal(
        &[2],
        &[
            (I * C64::new(theta / 2.0, 0.0)).exp(),
            (-I * C64::new(theta / 2.0, 0.0)).exp(),
        ],
    );
    kron(&rz, &Operator::identity(inner_dims))
}

/// ⟨anc_out| U |anc_in⟩ block of an operator on [2, d...].
pub fn ancilla_block(op: &Operator, anc_out: Ancilla, anc_in: Ancilla) -> DMatrix<C64> {
    assert_eq!(op.dims()[0], 2, "first factor must be the ancilla");
    let d = op.dim() / 2;
    let (ro, ci) = (anc_out.index() * d, anc_in.index() * d);
    DMatrix::from_fn(d, d, |i, j| op.get(ro + i, ci + j))
}

/// Revival error bound 2|cos(Λt)|^N transplanted to an embedded block.
pub fn error_bound(lambda: f64, t: f64, half_steps: usize) -> f64 {
    2.0 * (lambda * t).cos().abs().powi(half_steps as i32)
}

/// Column vector of the full [2, d...] space holding |anc⟩⊗|v⟩.
pub fn lift_vector(v: &DVector<C64>, anc: Ancilla) -> DVector<C64> {
    let d = v.len();
    let mut out = DVector::zeros(2 * d);
    for i in 0..d {
        out[anc.index() * d + i] = v[i];
    }
    out
}

/// ⟨a| M |b⟩ for a d×d matrix.
pub fn sandwich(a: &DVector<C64>, m: &DMatrix<C64>, b: &DVector<C64>) -> C64 {
    a.dotc(&(m * b))
}
