//! Multi-qubit subspace rotations compiled from topological quantum walks.
//!
//! A projector-controlled rotation exp(i2φΠ) — the C_{n}Z gate is the φ = π/2
//! special case — can be compiled into a short interleaved sequence: evolve a
//! Hamiltonian that embeds a matrix A, alternate it with single-qubit z
//! rotations of an ancilla, and let the block structure of the embedding sort
//! every singular-vector pair of A into its own two-level quantum walk. Walk
//! blocks with nonzero singular value sweep a topological band and refocus to
//! −1; the zero-singular-value (dark) block only collects the programmed
//! z-rotation phases. The relative phase between the two is the gate.
//!
//! The crate covers the full pipeline at desk scale:
//!
//! - [`walk`]: the coined discrete-time walk at fixed momentum, its two-band
//!   structure, winding numbers, and the revival identity that controls
//!   convergence.
//! - [`embedding`]: the σ⁺⊗A + σ⁻⊗A† construction, its SVD block dynamics,
//!   and the interleaved rotation sequence with its exact dark-block phases.
//! - [`cqed`]: a star lattice of three-level transmons running simultaneous
//!   CZ interactions — rotating-wave and full lab-frame simulations, average
//!   gate fidelities, leakage studies, and closed-form rotation fidelities.
//! - [`qsp`]: the quantum-signal-processing view — response polynomials,
//!   target polynomials with better spectral coverage, and numerical phase
//!   finding.
//! - [`ion`]: Mølmer–Sørensen and Rydberg collective-spin walks, reflections
//!   about zero-eigenvalue subspaces, and a partition-problem oracle.
//! - [`fsbsw`]: the resonant hide-phase-unhide C_{n−1}Z baseline and gate
//!   cost comparison.
//! - [`runner`]: reproducible experiment driver behind the `walkgate` CLI.
//!
//! The numerical kernel lives in [`linalg`]; everything downstream is pure
//! and deterministic, so parameter sweeps parallelize freely.

pub mod cqed;
pub mod embedding;
pub mod fsbsw;
pub mod ion;
pub mod linalg;
pub mod qsp;
pub mod runner;
pub mod walk;

#[cfg(doctest)]
mod book {
    //! The book chapters double as doctests so the guide can never drift
    //! from the library.
    #[doc = include_str!("../../../book/src/walks.md")]
    pub struct WalksChapter;
    #[doc = include_str!("../../../book/src/embedding.md")]
    pub struct EmbeddingChapter;
    #[doc = include_str!("../../../book/src/cqed.md")]
    pub struct CqedChapter;
    #[doc = include_str!("../../../book/src/qsp.md")]
    pub struct QspChapter;
    #[doc = include_str!("../../../book/src/ion-rydberg.md")]
    pub struct IonRydbergChapter;
    #[doc = include_str!("../../../book/src/baseline.md")]
    pub struct BaselineChapter;
}
