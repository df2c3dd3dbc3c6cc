//! Numerical tolerances shared across the crate.

/// Hermiticity, trace, norm and unitarity checks.
pub const STRUCTURAL: f64 = 1e-10;

/// Lowest eigenvalue still accepted as nonnegative (PSD and PPT checks).
pub const EIGEN_FLOOR: f64 = -1e-9;

/// Comparison of derived scalar quantities.
pub const DERIVED: f64 = 1e-9;

/// Largest imaginary residue discarded from a real expectation value.
pub const IMAG_RESIDUE: f64 = 1e-9;

/// Purity threshold above which a density matrix counts as pure.
pub const PURITY: f64 = 1e-9;

/// Frame orthonormality and orientation checks.
pub const FRAME: f64 = 1e-9;

/// Objective ties closer than this break toward the lowest restart index.
pub const TIE: f64 = 1e-12;

/// Largest Hilbert-space dimension for pure-state operations (12 qubits).
pub const MAX_PURE_DIM: usize = 4096;

/// Largest Hilbert-space dimension for density-matrix pipelines (10 qubits).
pub const MAX_DENSITY_DIM: usize = 1024;
