//! Seeded sampling of states and unitaries.
//!
//! Every generator is driven by a ChaCha stream derived from `(seed, stream)`,
//! so independent workers can draw from disjoint streams of the same seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix, ComplexVector, C64};
use crate::state::{DensityMatrix, PureState, SubsystemLayout};

/// Generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    let v = ComplexVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Haar unitary: QR of a Ginibre matrix with R's diagonal phases moved into Q.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for row in 0..dim {
            q[(row, k)] *= phase;
        }
    }
    q
}

pub fn haar_pure_with<R: Rng + ?Sized>(layout: &SubsystemLayout, rng: &mut R) -> PureState {
    PureState::from_parts_unchecked(haar_vector(layout.total_dim(), rng), layout.clone())
}

pub fn product_pure_with<R: Rng + ?Sized>(layout: &SubsystemLayout, rng: &mut R) -> PureState {
    let factors: Vec<ComplexVector> = layout.dims().iter().map(|&d| haar_vector(d, rng)).collect();
    let v = linalg::tensor_vectors(&factors).expect("layouts have at least two slots");
    let n = v.norm();
    PureState::from_parts_unchecked(v.unscale(n), layout.clone())
}

pub fn density_with<R: Rng + ?Sized>(
    layout: &SubsystemLayout,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let dim = layout.total_dim();
    if rank == 0 || rank > dim {
        return Err(Error::usage(format!("rank {rank} outside 1..={dim}")));
    }
    let g = ginibre(dim, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let mut m = m.unscale(tr);
    // Exact Hermitian symmetrization removes rounding asymmetry.
    let mt = m.adjoint();
    m = (m + mt).scale(0.5);
    DensityMatrix::new(m, layout.clone())
}

/// Haar-random pure state.
pub fn random_haar_pure(layout: &SubsystemLayout, seed: u64) -> PureState {
    haar_pure_with(layout, &mut rng_for(seed, 0))
}

/// Random mixed state GG†/Tr(GG†) with G a dim × rank Ginibre matrix.
pub fn random_density(layout: &SubsystemLayout, rank: usize, seed: u64) -> Result<DensityMatrix> {
    density_with(layout, rank, &mut rng_for(seed, 0))
}

/// Tensor product of independent Haar states, one per slot (fully separable).
pub fn random_product_pure(layout: &SubsystemLayout, seed: u64) -> PureState {
    product_pure_with(layout, &mut rng_for(seed, 0))
}

pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::usage("unitary dimension must be positive"));
    }
    Ok(haar_unitary(dim, &mut rng_for(seed, 0)))
}
