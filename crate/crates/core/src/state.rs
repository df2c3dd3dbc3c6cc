//! Quantum states, subsystem layouts and the bipartite operations on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, hermitian_eigenvalues, hermitian_residual, ComplexMatrix, ComplexVector, ZERO,
};
use crate::tol;

/// Local dimensions of each tensor slot plus the index where the B side starts.
///
/// Slot 0 is the most significant factor, so a composite basis index is the
/// mixed-radix number over `dims`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    side_split: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>, side_split: usize) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::usage("a layout needs at least two subsystems"));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::usage(format!("local dimension {d} is below 2")));
        }
        if side_split < 1 || side_split > dims.len() - 1 {
            return Err(Error::usage(format!(
                "side split {side_split} must lie in 1..={}",
                dims.len() - 1
            )));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= tol::MAX_PURE_DIM)
            .ok_or_else(|| {
                Error::usage(format!(
                    "total dimension of {dims:?} exceeds limit {}",
                    tol::MAX_PURE_DIM
                ))
            })?;
        debug_assert!(total >= 4);
        Ok(Self { dims, side_split })
    }

    /// Multiqubit layout A₁…A_n,B₁…B_n.
    pub fn multiqubit(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("qubits per side must be at least 1"));
        }
        Self::new(vec![2; 2 * n], n)
    }

    /// Two-party d×d layout.
    pub fn bipartite(d: usize) -> Result<Self> {
        Self::new(vec![d, d], 1)
    }

    /// `count` qubits with the split after the first half (rounded down, at least 1).
    pub fn qubits(count: usize) -> Result<Self> {
        Self::new(vec![2; count], (count / 2).max(1))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side_split(&self) -> usize {
        self.side_split
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Dimensions (d_A, d_B) of the two sides.
    pub fn side_dims(&self) -> (usize, usize) {
        let a = self.dims[..self.side_split].iter().product();
        let b = self.dims[self.side_split..].iter().product();
        (a, b)
    }

    pub fn is_multiqubit(&self) -> bool {
        self.dims.iter().all(|&d| d == 2) && 2 * self.side_split == self.dims.len()
    }

    /// Qubits per side, when the layout is multiqubit.
    pub fn qubits_per_side(&self) -> Option<usize> {
        self.is_multiqubit().then_some(self.side_split)
    }

    /// Square bipartite dimension d when d_A = d_B.
    pub fn square_dim(&self) -> Option<usize> {
        let (a, b) = self.side_dims();
        (a == b).then_some(a)
    }

    /// Collapse each side into a single slot.
    pub fn grouped(&self) -> SubsystemLayout {
        let (a, b) = self.side_dims();
        SubsystemLayout {
            dims: vec![a, b],
            side_split: 1,
        }
    }

    fn require_multiqubit(&self) -> Result<usize> {
        self.qubits_per_side().ok_or_else(|| {
            Error::usage(format!(
                "expected a multiqubit A₁…A_n,B₁…B_n layout, got dims {:?} split {}",
                self.dims, self.side_split
            ))
        })
    }
}

/// Unit vector on a [`SubsystemLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
    layout: SubsystemLayout,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector, layout: SubsystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::usage(format!(
                "{} amplitudes for a layout of dimension {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation {
                check: "finite",
                residual: f64::INFINITY,
                tolerance: 0.0,
            });
        }
        let residual = (amplitudes.norm() - 1.0).abs();
        if residual > tol::STRUCTURAL {
            return Err(Error::Validation {
                check: "norm",
                residual,
                tolerance: tol::STRUCTURAL,
            });
        }
        Ok(Self { amplitudes, layout })
    }

    /// Normalize `amplitudes` and wrap them.
    pub fn normalized(amplitudes: ComplexVector, layout: SubsystemLayout) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::usage("cannot normalize a zero or non-finite vector"));
        }
        Self::new(amplitudes.unscale(norm), layout)
    }

    pub(crate) fn from_parts_unchecked(amplitudes: ComplexVector, layout: SubsystemLayout) -> Self {
        Self { amplitudes, layout }
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: linalg::projector(&self.amplitudes),
            layout: self.layout.clone(),
        }
    }

    /// Same amplitudes viewed as a two-slot d_A × d_B state.
    pub fn as_bipartite(&self) -> PureState {
        Self {
            amplitudes: self.amplitudes.clone(),
            layout: self.layout.grouped(),
        }
    }

    /// Amplitude matrix M with |φ⟩ = Σ M_ij |i⟩_A|j⟩_B.
    pub fn amplitude_matrix(&self) -> ComplexMatrix {
        let (da, db) = self.layout.side_dims();
        ComplexMatrix::from_fn(da, db, |i, j| self.amplitudes[i * db + j])
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix on a [`SubsystemLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    layout: SubsystemLayout,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, layout: SubsystemLayout) -> Result<Self> {
        let dim = layout.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::usage(format!(
                "matrix is {}x{} but layout has dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if dim > tol::MAX_DENSITY_DIM {
            return Err(Error::usage(format!(
                "density dimension {dim} exceeds limit {}",
                tol::MAX_DENSITY_DIM
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation {
                check: "finite",
                residual: f64::INFINITY,
                tolerance: 0.0,
            });
        }
        let herm = hermitian_residual(&matrix);
        if herm > tol::STRUCTURAL {
            return Err(Error::Validation {
                check: "hermitian",
                residual: herm,
                tolerance: tol::STRUCTURAL,
            });
        }
        let trace = (matrix.trace() - c(1.0, 0.0)).norm();
        if trace > tol::STRUCTURAL {
            return Err(Error::Validation {
                check: "trace",
                residual: trace,
                tolerance: tol::STRUCTURAL,
            });
        }
        let min_eig = hermitian_eigenvalues(&matrix)[0];
        if min_eig < tol::EIGEN_FLOOR {
            return Err(Error::Validation {
                check: "positivity",
                residual: -min_eig,
                tolerance: -tol::EIGEN_FLOOR,
            });
        }
        Ok(Self { matrix, layout })
    }

    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, layout: SubsystemLayout) -> Self {
        Self { matrix, layout }
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let dim = layout.total_dim();
        let matrix = ComplexMatrix::identity(dim, dim).unscale(dim as f64);
        Self { matrix, layout }
    }

    /// Convex combination Σ wᵢ ρᵢ. Weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::usage("mixture of zero states"))?;
        let layout = first.layout.clone();
        let dim = layout.total_dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.layout != layout {
                return Err(Error::usage("mixture components have different layouts"));
            }
            if *w < 0.0 {
                return Err(Error::usage(format!("negative mixture weight {w}")));
            }
            acc += rho.matrix.scale(*w);
        }
        Self::new(acc, layout)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(&self.matrix, &self.matrix).re
    }

    pub fn is_pure(&self) -> bool {
        self.purity() >= 1.0 - tol::PURITY
    }

    pub fn as_bipartite(&self) -> DensityMatrix {
        Self {
            matrix: self.matrix.clone(),
            layout: self.layout.grouped(),
        }
    }

    pub(crate) fn require_multiqubit(&self) -> Result<usize> {
        self.layout.require_multiqubit()
    }

    /// Check that the state is d×d bipartite (after grouping the sides).
    pub(crate) fn require_square(&self, d: usize) -> Result<()> {
        match self.layout.square_dim() {
            Some(sd) if sd == d => Ok(()),
            _ => Err(Error::usage(format!(
                "state has side dimensions {:?}, expected {d}x{d}",
                self.layout.side_dims()
            ))),
        }
    }
}

/// Tr(op·ρ) for a Hermitian `op`.
pub fn expectation(state: &DensityMatrix, op: &ComplexMatrix) -> Result<f64> {
    if op.nrows() != state.dim() || op.ncols() != state.dim() {
        return Err(Error::usage(format!(
            "operator is {}x{} but state has dimension {}",
            op.nrows(),
            op.ncols(),
            state.dim()
        )));
    }
    let herm = hermitian_residual(op);
    if herm > tol::STRUCTURAL {
        return Err(Error::contract(format!(
            "observable is not Hermitian: residual {herm:.1e}"
        )));
    }
    let value = linalg::trace_of_product(op, state.matrix());
    if value.im.abs() > tol::IMAG_RESIDUE {
        return Err(Error::contract(format!(
            "expectation has imaginary residue {:.1e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Partial transpose of a (d_A·d_B)-square matrix on one side.
pub fn partial_transpose_matrix(m: &ComplexMatrix, da: usize, db: usize, side: Side) -> ComplexMatrix {
    let dim = da * db;
    assert_eq!(m.nrows(), dim, "matrix does not match d_A·d_B");
    let mut out = ComplexMatrix::zeros(dim, dim);
    for ia in 0..da {
        for ib in 0..db {
            for ja in 0..da {
                for jb in 0..db {
                    let (r, col) = match side {
                        Side::A => (ja * db + ib, ia * db + jb),
                        Side::B => (ia * db + jb, ja * db + ib),
                    };
                    out[(r, col)] = m[(ia * db + ib, ja * db + jb)];
                }
            }
        }
    }
    out
}

pub fn partial_transpose(rho: &DensityMatrix, side: Side) -> ComplexMatrix {
    let (da, db) = rho.layout().side_dims();
    partial_transpose_matrix(rho.matrix(), da, db, side)
}

/// Smallest eigenvalue of ρ^{T_B}.
pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix) -> f64 {
    hermitian_eigenvalues(&partial_transpose(rho, Side::B))[0]
}

pub fn is_ppt(rho: &DensityMatrix) -> bool {
    min_partial_transpose_eigenvalue(rho) >= tol::EIGEN_FLOOR
}

/// Reduced operator on the slots `keep` (in that order), tracing out the rest.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<ComplexMatrix> {
    let dims = rho.layout().dims();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::usage("partial trace slot out of range"));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let order: Vec<usize> = keep.iter().chain(&rest).copied().collect();
    let permuted = linalg::permute_slots(rho.matrix(), dims, &order);
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dr: usize = rest.iter().map(|&k| dims[k]).product();
    Ok(ComplexMatrix::from_fn(dk, dk, |i, j| {
        (0..dr).fold(ZERO, |acc, r| acc + permuted[(i * dr + r, j * dr + r)])
    }))
}

/// Schmidt coefficients across the A|B split, descending.
pub fn schmidt_coefficients(phi: &PureState) -> Vec<f64> {
    linalg::singular_values(&phi.amplitude_matrix())
}

/// Tensor product of n Bell pairs, (1/√2ⁿ) Σ |i⟩_A|i⟩_B in A₁…A_n,B₁…B_n order.
pub fn bell_tensor(n: usize) -> Result<PureState> {
    let layout = SubsystemLayout::multiqubit(n)?;
    let side = 1usize << n;
    let amp = c((1.0 / side as f64).sqrt(), 0.0);
    let mut v = ComplexVector::zeros(side * side);
    for i in 0..side {
        v[i * side + i] = amp;
    }
    Ok(PureState::from_parts_unchecked(v, layout))
}

/// Maximally entangled |ψ⁺⟩ = (1/√d) Σ |ii⟩ on a d×d layout.
pub fn psi_plus(d: usize) -> Result<PureState> {
    let layout = SubsystemLayout::bipartite(d)?;
    let amp = c((1.0 / d as f64).sqrt(), 0.0);
    let mut v = ComplexVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    Ok(PureState::from_parts_unchecked(v, layout))
}

/// Computational basis state |i⟩_A|j⟩_B on a d×d layout.
pub fn basis_product(d: usize, i: usize, j: usize) -> Result<PureState> {
    let layout = SubsystemLayout::bipartite(d)?;
    if i >= d || j >= d {
        return Err(Error::usage("basis index out of range"));
    }
    let mut v = ComplexVector::zeros(d * d);
    v[i * d + j] = c(1.0, 0.0);
    Ok(PureState::from_parts_unchecked(v, layout))
}

/// Isotropic state p|ψ⁺⟩⟨ψ⁺| + (1−p)I/d²; the two-qubit Werner family at d = 2.
pub fn werner(p: f64, d: usize) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::usage(format!("mixing weight {p} outside [0, 1]")));
    }
    let psi = psi_plus(d)?.density();
    let mixed = DensityMatrix::maximally_mixed(psi.layout().clone());
    let matrix = psi.matrix().scale(p) + mixed.matrix().scale(1.0 - p);
    Ok(DensityMatrix::from_parts_unchecked(matrix, psi.layout().clone()))
}
