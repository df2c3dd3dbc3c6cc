//! Pauli matrices and complementary observable triples.
//!
//! Conventions: σ₁ = |0⟩⟨1| + |1⟩⟨0|, σ₂ = i(|0⟩⟨1| − |1⟩⟨0|), σ₃ = |0⟩⟨0| − |1⟩⟨1|.
//! Note that this σ₂ is the negative of the textbook σ_y, so σ₁σ₂σ₃ = −iI₂.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, C64, I, ONE, ZERO};
use crate::tol;

pub type Mat2 = Matrix2<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    Id,
    S1,
    S2,
    S3,
}

impl Pauli {
    pub const SIGMAS: [Pauli; 3] = [Pauli::S1, Pauli::S2, Pauli::S3];

    pub fn from_index(i: usize) -> Option<Pauli> {
        [Pauli::Id, Pauli::S1, Pauli::S2, Pauli::S3].get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::Id => Mat2::new(ONE, ZERO, ZERO, ONE),
            Pauli::S1 => Mat2::new(ZERO, ONE, ONE, ZERO),
            Pauli::S2 => Mat2::new(ZERO, I, -I, ZERO),
            Pauli::S3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    pub fn dmatrix(self) -> ComplexMatrix {
        to_dynamic(&self.matrix())
    }
}

pub fn to_dynamic(m: &Mat2) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

pub fn from_dynamic(m: &ComplexMatrix) -> Result<Mat2> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::usage(format!(
            "expected a 2x2 matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(Mat2::from_fn(|i, j| m[(i, j)]))
}

fn max_entry(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Three observables X_k = a_k·σ⃗ with X₁X₂X₃ = −iI₂.
///
/// Stored together with the frame (a₁, a₂, a₃) and an SU(2) rotation R with
/// X_k = R σ_k R†.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementaryTriple {
    observables: [Mat2; 3],
    frame: [Vector3<f64>; 3],
    su2: Mat2,
}

impl ComplementaryTriple {
    /// (σ₁, σ₂, σ₃).
    pub fn pauli() -> Self {
        Self {
            observables: Pauli::SIGMAS.map(Pauli::matrix),
            frame: [Vector3::x(), Vector3::y(), Vector3::z()],
            su2: Mat2::identity(),
        }
    }

    /// X_k for k = 1, 2, 3.
    pub fn observable(&self, k: usize) -> &Mat2 {
        assert!((1..=3).contains(&k), "observable index {k} outside 1..=3");
        &self.observables[k - 1]
    }

    pub fn observables(&self) -> &[Mat2; 3] {
        &self.observables
    }

    pub fn frame(&self) -> &[Vector3<f64>; 3] {
        &self.frame
    }

    pub fn su2(&self) -> &Mat2 {
        &self.su2
    }

    /// ‖X₁X₂X₃ + iI₂‖_max.
    pub fn product_residual(&self) -> f64 {
        let [x1, x2, x3] = &self.observables;
        max_entry(&(x1 * x2 * x3 + Mat2::identity() * I))
    }
}

/// Bloch vector a^j = ½ Re Tr(X σ_j).
fn bloch_vector(x: &Mat2) -> Vector3<f64> {
    Vector3::from_iterator(Pauli::SIGMAS.iter().map(|s| 0.5 * (x * s.matrix()).trace().re))
}

fn observable_from_vector(a: &Vector3<f64>) -> Mat2 {
    Pauli::SIGMAS
        .iter()
        .zip(a.iter())
        .fold(Mat2::zeros(), |acc, (s, &w)| acc + s.matrix() * c(w, 0.0))
}

/// X_k = R σ_k R† for a unitary R.
pub fn triple_from_su2(r: &Mat2) -> Result<ComplementaryTriple> {
    let residual = max_entry(&(r.adjoint() * r - Mat2::identity()));
    if residual > tol::STRUCTURAL {
        return Err(Error::contract(format!(
            "rotation is not unitary: residual {residual:.1e}"
        )));
    }
    let observables = Pauli::SIGMAS.map(|s| r * s.matrix() * r.adjoint());
    let frame = [
        bloch_vector(&observables[0]),
        bloch_vector(&observables[1]),
        bloch_vector(&observables[2]),
    ];
    Ok(ComplementaryTriple {
        observables,
        frame,
        su2: *r,
    })
}

/// X_k = a_k·σ⃗ for an orthonormal right-handed frame.
pub fn triple_from_frame(frame: [Vector3<f64>; 3]) -> Result<ComplementaryTriple> {
    let m = Matrix3::from_columns(&frame);
    let gram = m.transpose() * m - Matrix3::identity();
    let gram_residual = gram.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if gram_residual > tol::FRAME {
        return Err(Error::usage(format!(
            "frame is not orthonormal: Gram residual {gram_residual:.1e}"
        )));
    }
    let det = m.determinant();
    if (det - 1.0).abs() > tol::FRAME {
        return Err(Error::usage(format!(
            "frame is not right-handed: determinant {det:.6}"
        )));
    }
    let observables = frame.map(|a| observable_from_vector(&a));

    // R|0⟩ is the +1 eigenvector of X₃ and R|1⟩ = X₁R|0⟩.
    let proj = (observables[2] + Mat2::identity()) * c(0.5, 0.0);
    let (c0, c1) = (proj.column(0).into_owned(), proj.column(1).into_owned());
    let v0 = if c0.norm() >= c1.norm() { c0 } else { c1 };
    let v0 = v0.unscale(v0.norm());
    let v1 = observables[0] * v0;
    let su2 = Mat2::from_columns(&[v0, v1]);

    Ok(ComplementaryTriple {
        observables,
        frame,
        su2,
    })
}

/// Euler angles of the chart R = Rz(α)·Ry(β)·Rz(γ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let periodic = 0.0..TAU;
        if !periodic.contains(&alpha) || !periodic.contains(&gamma) || !(0.0..=PI).contains(&beta) {
            return Err(Error::usage(format!(
                "Euler angles ({alpha}, {beta}, {gamma}) outside [0,2π)×[0,π]×[0,2π)"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }
}

/// exp(−iα σ₃/2)·exp(−iβ σ₂/2)·exp(−iγ σ₃/2).
pub fn su2_from_euler(angles: EulerAngles) -> Mat2 {
    su2_from_angles(angles.alpha, angles.beta, angles.gamma)
}

/// Same chart as [`su2_from_euler`] without range checks; used by the optimizer.
pub fn su2_from_angles(alpha: f64, beta: f64, gamma: f64) -> Mat2 {
    let rz = |t: f64| {
        let h = 0.5 * t;
        Mat2::new(c(h.cos(), -h.sin()), ZERO, ZERO, c(h.cos(), h.sin()))
    };
    let (s, co) = (0.5 * beta).sin_cos();
    // −iσ₂ = [[0, 1], [−1, 0]].
    let ry = Mat2::new(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0));
    rz(alpha) * ry * rz(gamma)
}
