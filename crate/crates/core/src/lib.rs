//! Spectra and spectral statistics of dissipative spin chains.
//!
//! The crate builds Lindbladians of one-dimensional spin-1/2 chains with
//! local jump operators, together with the effective non-Hermitian
//! Hamiltonians of their no-jump evolution, resolves their symmetry sectors,
//! diagonalizes the blocks and evaluates spacing statistics of the resulting
//! complex spectra and of their singular values.
//!
//! Basis convention: a computational state is a bitmask with site 1 in the
//! most significant bit and bit value 1 meaning spin up. Liouville-space
//! states `|m⟩⟨n|` are indexed `m·2^L + n`.

pub mod coulomb_gas;
pub mod diagnostics;
pub mod ensembles;
pub mod error;
pub mod liouville;
pub mod matching;
pub mod models;
pub mod pauli_ops;
pub mod sparse;
pub mod spectral_core;
pub mod symmetry;

pub type C64 = num_complex::Complex64;

pub use error::{Error, Result};
pub use liouville::{build_lindbladian, Lindbladian, LiouvilleIndex};
pub use models::{Family, JumpKind, JumpSet, JumpSpec, Model, ModelConfig};
pub use pauli_ops::{Axis, OperatorMatrix, PauliTerm, SpinBasisIndex};
pub use sparse::CsrMatrix;
pub use spectral_core::{ComplexSpectrum, SingularSpectrum};
pub use symmetry::{Parity, SectorBasis, SectorBlock, SectorLabel, Space};
