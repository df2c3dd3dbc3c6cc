//! Teleportation witnesses W(U) = I/d − (U⊗I)|ψ⁺⟩⟨ψ⁺|(U†⊗I), pure-state
//! entanglement witnesses αI − |ψ⟩⟨ψ|, and their optimality certificates.

use crate::error::{Error, Result};
use crate::fef::{self, FefConfig, FefResult};
use crate::linalg::{self, ComplexMatrix, ComplexVector, I, ONE};
use crate::state::{psi_plus, schmidt_coefficients, DensityMatrix, PureState, SubsystemLayout};
use crate::tol;
use crate::Verdict;

/// Where a witness came from; decides which product vectors certify it.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessSource {
    Identity,
    Rotated(ComplexMatrix),
    FromPure,
}

/// Hermitian operator αI − |χ⟩⟨χ|.
#[derive(Debug, Clone)]
pub struct Witness {
    matrix: ComplexMatrix,
    alpha: f64,
    chi: ComplexVector,
    source: WitnessSource,
}

impl Witness {
    fn assemble(alpha: f64, chi: ComplexVector, source: WitnessSource) -> Self {
        let dim = chi.len();
        let matrix = ComplexMatrix::identity(dim, dim).scale(alpha) - linalg::projector(&chi);
        Self {
            matrix,
            alpha,
            chi,
            source,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The pure state |χ⟩ subtracted from αI.
    pub fn core(&self) -> &ComplexVector {
        &self.chi
    }

    pub fn source(&self) -> &WitnessSource {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Same witness with α raised by `delta`, keeping the source.
    pub fn shifted(&self, delta: f64) -> Witness {
        Self::assemble(self.alpha + delta, self.chi.clone(), self.source.clone())
    }
}

/// W(I) = I/d − |ψ⁺⟩⟨ψ⁺|.
pub fn witness_identity(d: usize) -> Result<Witness> {
    let psi = psi_plus(d)?;
    Ok(Witness::assemble(
        1.0 / d as f64,
        psi.amplitudes().clone(),
        WitnessSource::Identity,
    ))
}

/// (U⊗I)|ψ⁺⟩ as a flat vector: amplitude U_ji/√d on |j⟩|i⟩.
fn rotated_psi_plus(u: &ComplexMatrix) -> ComplexVector {
    let d = u.nrows();
    let s = 1.0 / (d as f64).sqrt();
    ComplexVector::from_fn(d * d, |idx, _| u[(idx / d, idx % d)] * s)
}

/// W(U) = I/d − (U⊗I)|ψ⁺⟩⟨ψ⁺|(U†⊗I).
pub fn witness_rotated(u: &ComplexMatrix) -> Result<Witness> {
    linalg::require_unitary(u, "witness rotation")?;
    let d = u.nrows();
    if d < 2 {
        return Err(Error::usage("witness dimension must be at least 2"));
    }
    Ok(Witness::assemble(
        1.0 / d as f64,
        rotated_psi_plus(u),
        WitnessSource::Rotated(u.clone()),
    ))
}

/// αI − |ψ⟩⟨ψ| with α the largest squared Schmidt coefficient of ψ.
pub fn witness_from_pure(psi: &PureState) -> Result<Witness> {
    let schmidt = schmidt_coefficients(psi);
    let alpha = schmidt[0] * schmidt[0];
    if alpha >= 1.0 - tol::DERIVED {
        return Err(Error::usage(
            "product state: α = 1 makes αI − |ψ⟩⟨ψ| positive, not a witness",
        ));
    }
    Ok(Witness::assemble(
        alpha,
        psi.amplitudes().clone(),
        WitnessSource::FromPure,
    ))
}

/// Tr(Wρ).
pub fn evaluate(w: &Witness, rho: &DensityMatrix) -> Result<f64> {
    if w.dim() != rho.dim() {
        return Err(Error::usage(format!(
            "witness has dimension {} but state has dimension {}",
            w.dim(),
            rho.dim()
        )));
    }
    let v = linalg::trace_of_product(&w.matrix, rho.matrix());
    if v.im.abs() > tol::IMAG_RESIDUE {
        return Err(Error::contract(format!(
            "witness value has imaginary residue {:.1e}",
            v.im
        )));
    }
    Ok(v.re)
}

fn basis(d: usize, k: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d);
    v[k] = ONE;
    v
}

/// The d² unnormalized product vectors annihilated by W(I):
/// |jj⟩, then (|k⟩+|l⟩)⊗(|k⟩+|l⟩), then (|k⟩+i|l⟩)⊗(|k⟩−i|l⟩) for k < l.
pub fn optimality_vectors(d: usize) -> Result<Vec<ComplexVector>> {
    if d < 2 {
        return Err(Error::usage("optimality vectors need d ≥ 2"));
    }
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        out.push(basis(d, j).kronecker(&basis(d, j)));
    }
    for k in 0..d {
        for l in k + 1..d {
            let s = basis(d, k) + basis(d, l);
            out.push(s.kronecker(&s));
        }
    }
    for k in 0..d {
        for l in k + 1..d {
            let a = basis(d, k) + basis(d, l) * I;
            let b = basis(d, k) - basis(d, l) * I;
            out.push(a.kronecker(&b));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct OptimalityCertificate {
    pub vectors: Vec<ComplexVector>,
    /// ⟨v|W|v⟩ for each vector.
    pub annihilation_residuals: Vec<f64>,
    pub gram_rank: usize,
    pub optimal: bool,
    pub note: Option<String>,
}

pub const ANNIHILATION_TOL: f64 = 1e-10;

fn side_dim(w: &Witness) -> Result<usize> {
    let dim = w.dim();
    let d = (dim as f64).sqrt().round() as usize;
    if d * d != dim {
        return Err(Error::usage(format!(
            "witness dimension {dim} is not a square"
        )));
    }
    Ok(d)
}

/// Certify optimality by d² annihilated product vectors that span C^d⊗C^d.
///
/// For W(U) the base vectors are mapped through U⊗I. A pure-state witness is
/// certified only when its core is maximally entangled; otherwise the
/// certificate comes back with `optimal = false` and a note.
pub fn check_optimality(w: &Witness) -> Result<OptimalityCertificate> {
    let d = side_dim(w)?;
    let rotation = match w.source() {
        WitnessSource::Identity => None,
        WitnessSource::Rotated(u) => Some(u.clone()),
        WitnessSource::FromPure => {
            let psi = PureState::normalized(w.core().clone(), SubsystemLayout::bipartite(d)?)?;
            let schmidt = schmidt_coefficients(&psi);
            let uniform = 1.0 / (d as f64).sqrt();
            if schmidt.iter().any(|s| (s - uniform).abs() > tol::DERIVED) {
                return Ok(OptimalityCertificate {
                    vectors: Vec::new(),
                    annihilation_residuals: Vec::new(),
                    gram_rank: 0,
                    optimal: false,
                    note: Some(
                        "core state has a non-uniform Schmidt spectrum; the product-vector construction covers maximally entangled cores only"
                            .into(),
                    ),
                });
            }
            // A maximally entangled core is (U⊗I)|ψ⁺⟩ with U = √d·M.
            Some(psi.amplitude_matrix().scale((d as f64).sqrt()))
        }
    };

    let mut vectors = optimality_vectors(d)?;
    if let Some(u) = &rotation {
        let lift = u.kronecker(&ComplexMatrix::identity(d, d));
        for v in &mut vectors {
            *v = &lift * &*v;
        }
    }
    let annihilation_residuals: Vec<f64> = vectors
        .iter()
        .map(|v| (v.adjoint() * w.matrix() * v)[(0, 0)].re)
        .collect();

    let n = vectors.len();
    let gram = ComplexMatrix::from_fn(n, n, |i, j| vectors[i].dotc(&vectors[j]));
    let gram_rank = linalg::numerical_rank(&gram);
    let max_residual = annihilation_residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(OptimalityCertificate {
        optimal: gram_rank == d * d && max_residual <= ANNIHILATION_TOL,
        vectors,
        annihilation_residuals,
        gram_rank,
        note: None,
    })
}

#[derive(Debug, Clone)]
pub struct WitnessDetection {
    /// min_U Tr(W(U)ρ) found, evaluated at `unitary`.
    pub minimum: f64,
    pub unitary: ComplexMatrix,
    pub verdict: Verdict,
    pub fef: FefResult,
}

/// Minimize Tr(W(U)ρ) = 1/d − ⟨ψ⁺|(U†⊗I)ρ(U⊗I)|ψ⁺⟩ through the FEF optimizer.
pub fn detect_useful_via_witness(
    rho: &DensityMatrix,
    d: usize,
    config: &FefConfig,
) -> Result<WitnessDetection> {
    let fef = fef::fully_entangled_fraction(rho, d, config)?;
    let w = witness_rotated(&fef.optimizer_unitary)?;
    let minimum = evaluate(&w, rho)?;
    let verdict = if minimum < -config.margin {
        Verdict::Useful
    } else {
        Verdict::Inconclusive
    };
    Ok(WitnessDetection {
        minimum,
        unitary: fef.optimizer_unitary.clone(),
        verdict,
        fef,
    })
}
