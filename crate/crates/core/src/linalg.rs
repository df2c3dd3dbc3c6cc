//! Dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::SubsystemLayout;
use crate::tol;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kronecker product of `ops` in list order.
pub fn tensor_product(ops: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::usage("tensor product of an empty operator list"))?;
    Ok(rest.iter().fold(first.clone(), |acc, op| acc.kronecker(op)))
}

/// Kronecker product of state vectors in list order.
pub fn tensor_vectors(vs: &[ComplexVector]) -> Result<ComplexVector> {
    let (first, rest) = vs
        .split_first()
        .ok_or_else(|| Error::usage("tensor product of an empty vector list"))?;
    Ok(rest.iter().fold(first.clone(), |acc, v| acc.kronecker(v)))
}

/// Mixed-radix digits of `index` over `dims`, most significant slot first.
pub(crate) fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in dims.iter().enumerate().rev() {
        out[slot] = index % d;
        index /= d;
    }
}

pub(crate) fn undigits(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Lift `op` acting on the slots `positions` (in that order) to the full space of `layout`.
pub fn embed_operator(
    op: &ComplexMatrix,
    positions: &[usize],
    layout: &SubsystemLayout,
) -> Result<ComplexMatrix> {
    let dims = layout.dims();
    if positions.is_empty() {
        return Err(Error::usage("embed_operator needs at least one position"));
    }
    for (i, &p) in positions.iter().enumerate() {
        if p >= dims.len() {
            return Err(Error::usage(format!(
                "slot {p} out of range for {} subsystems",
                dims.len()
            )));
        }
        if positions[..i].contains(&p) {
            return Err(Error::usage(format!("slot {p} listed twice")));
        }
    }
    let sub_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
    let sub_dim: usize = sub_dims.iter().product();
    if op.nrows() != sub_dim || op.ncols() != sub_dim {
        return Err(Error::usage(format!(
            "operator is {}x{} but slots {:?} span dimension {}",
            op.nrows(),
            op.ncols(),
            positions,
            sub_dim
        )));
    }
    let total = layout.total_dim();
    if total > tol::MAX_DENSITY_DIM {
        return Err(Error::usage(format!(
            "operator dimension {total} exceeds limit {}",
            tol::MAX_DENSITY_DIM
        )));
    }

    let mut out = ComplexMatrix::zeros(total, total);
    let mut col_digits = vec![0; dims.len()];
    let mut row_digits = vec![0; dims.len()];
    let mut sub = vec![0; positions.len()];
    for col in 0..total {
        digits(col, dims, &mut col_digits);
        let sub_col = positions
            .iter()
            .fold(0, |acc, &p| acc * dims[p] + col_digits[p]);
        row_digits.copy_from_slice(&col_digits);
        for sub_row in 0..sub_dim {
            let v = op[(sub_row, sub_col)];
            if v == ZERO {
                continue;
            }
            digits(sub_row, &sub_dims, &mut sub);
            for (&p, &x) in positions.iter().zip(&sub) {
                row_digits[p] = x;
            }
            out[(undigits(&row_digits, dims), col)] = v;
        }
    }
    Ok(out)
}

/// Reorder the tensor slots of an operator. Slot `k` of the result is slot `order[k]` of `op`.
pub fn permute_slots(op: &ComplexMatrix, dims: &[usize], order: &[usize]) -> ComplexMatrix {
    let total = op.nrows();
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut od = vec![0; dims.len()];
    let mut nd = vec![0; dims.len()];
    let index_map: Vec<usize> = (0..total)
        .map(|old| {
            digits(old, dims, &mut od);
            for (k, &src) in order.iter().enumerate() {
                nd[k] = od[src];
            }
            undigits(&nd, &new_dims)
        })
        .collect();
    for c_old in 0..total {
        for r_old in 0..total {
            out[(index_map[r_old], index_map[c_old])] = op[(r_old, c_old)];
        }
    }
    out
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// ‖M − M†‖ in the max-entry norm.
pub fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// ‖U†U − I‖ in the max-entry norm.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &ComplexMatrix::identity(u.nrows(), u.ncols()))
}

pub fn require_unitary(u: &ComplexMatrix, what: &str) -> Result<()> {
    let r = unitarity_residual(u);
    if r > tol::STRUCTURAL {
        return Err(Error::contract(format!(
            "{what} is not unitary: residual {r:.1e} exceeds {:.0e}",
            tol::STRUCTURAL
        )));
    }
    Ok(())
}

/// Ascending eigenvalues of a Hermitian matrix. The strict lower triangle is trusted.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = ComplexMatrix::from_fn(m.nrows(), idx.len(), |r, k| eig.eigenvectors[(r, idx[k])]);
    (vals, vecs)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Nearest unitary in Frobenius norm, `W V†` from the SVD `W Σ V†`.
pub fn polar_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    let svd = m.clone().svd(true, true);
    let w = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    w * v_t
}

/// Tr(A·B) without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for j in 0..n {
        for i in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Rank by singular values above `dim · ε · σ_max`.
pub fn numerical_rank(m: &ComplexMatrix) -> usize {
    let sv = singular_values(m);
    let Some(&largest) = sv.first() else {
        return 0;
    };
    let threshold = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * largest;
    sv.iter().filter(|&&s| s > threshold).count()
}

/// Outer product |v⟩⟨v|.
pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    fn m(p: Pauli) -> ComplexMatrix {
        p.dmatrix()
    }

    #[test]
    fn identity_tensor_identity() {
        let id = ComplexMatrix::identity(2, 2);
        let t = tensor_product(&[id.clone(), id]).unwrap();
        assert_eq!(t, ComplexMatrix::identity(4, 4));
    }

    #[test]
    fn kronecker_index_convention() {
        let a = m(Pauli::S1);
        let b = m(Pauli::S3);
        let t = tensor_product(&[a.clone(), b.clone()]).unwrap();
        for (ra, ca, rb, cb) in index_quads() {
            assert_eq!(t[(2 * ra + rb, 2 * ca + cb)], a[(ra, ca)] * b[(rb, cb)]);
        }
    }

    fn index_quads() -> Vec<(usize, usize, usize, usize)> {
        let mut v = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c_ in 0..2 {
                    for d in 0..2 {
                        v.push((a, b, c_, d));
                    }
                }
            }
        }
        v
    }

    #[test]
    fn sigma2_tensor_sigma2() {
        // σ₂ = i(|0⟩⟨1| − |1⟩⟨0|); (0,3) entry is (σ₂)₀₁(σ₂)₀₁ = i·i.
        let t = tensor_product(&[m(Pauli::S2), m(Pauli::S2)]).unwrap();
        assert_eq!(t[(0, 3)], c(-1.0, 0.0));
        assert_eq!(t[(3, 0)], c(-1.0, 0.0));
        assert_eq!(t[(1, 2)], c(1.0, 0.0));
        assert_eq!(t[(2, 1)], c(1.0, 0.0));
        for z in t.iter() {
            assert!(z.im == 0.0 && [0.0, 1.0, -1.0].contains(&z.re));
        }
    }

    #[test]
    fn empty_tensor_is_usage_error() {
        assert!(matches!(tensor_product(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn embed_single_slot() {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let id = ComplexMatrix::identity(2, 2);
        let z = m(Pauli::S3);
        assert_eq!(
            embed_operator(&z, &[0], &layout).unwrap(),
            z.kronecker(&id)
        );
        assert_eq!(
            embed_operator(&z, &[1], &layout).unwrap(),
            id.kronecker(&z)
        );
    }

    #[test]
    fn embed_two_separated_slots() {
        let layout = SubsystemLayout::qubits(4).unwrap();
        let x = m(Pauli::S1);
        let id = ComplexMatrix::identity(2, 2);
        let got = embed_operator(&x.kronecker(&x), &[0, 2], &layout).unwrap();
        let want = tensor_product(&[x.clone(), id.clone(), x, id]).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn embed_respects_slot_order() {
        let layout = SubsystemLayout::qubits(3).unwrap();
        let (x, z, id) = (m(Pauli::S1), m(Pauli::S3), ComplexMatrix::identity(2, 2));
        let got = embed_operator(&x.kronecker(&z), &[2, 0], &layout).unwrap();
        let want = tensor_product(&[z, id, x]).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn embed_dimension_mismatch() {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let err = embed_operator(&ComplexMatrix::identity(4, 4), &[0], &layout).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        assert!(embed_operator(&m(Pauli::S1), &[5], &layout).is_err());
    }

    #[test]
    fn permute_swaps_factors() {
        let (x, z) = (m(Pauli::S1), m(Pauli::S3));
        let xz = x.kronecker(&z);
        let zx = permute_slots(&xz, &[2, 2], &[1, 0]);
        assert_eq!(zx, z.kronecker(&x));
    }

    #[test]
    fn polar_of_scaled_unitary() {
        let u = m(Pauli::S2) * c(3.0, 0.0);
        let p = polar_unitary(&u);
        assert!(max_abs_diff(&p, &m(Pauli::S2)) < 1e-14);
    }
}
