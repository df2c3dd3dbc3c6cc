//! Fully entangled fraction, optimal teleportation fidelity and the
//! usefulness verdict for d×d states.
//!
//! F(ρ) = max_U ⟨ψ⁺|(U†⊗I)ρ(U⊗I)|ψ⁺⟩. Writing u for the row-major flattening
//! of U, (U⊗I)|ψ⁺⟩ = u/√d, so the objective is the quadratic form u†ρu/d
//! restricted to unitary U.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector};
use crate::parallel::{self, Jobs};
use crate::random::{haar_unitary, rng_for};
use crate::state::{DensityMatrix, PureState};
use crate::Verdict;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FefMethod {
    ClosedFormPure,
    ManifoldAscent,
}

#[derive(Debug, Clone)]
pub struct FefResult {
    pub value: f64,
    pub optimizer_unitary: ComplexMatrix,
    pub method: FefMethod,
    pub restarts_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FefConfig {
    /// Haar-random restarts in addition to the identity start.
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub margin: f64,
    /// Run the manifold ascent even for pure inputs.
    pub force_optimizer: bool,
    #[serde(skip)]
    pub jobs: Jobs,
}

impl Default for FefConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 500,
            seed: 0,
            margin: 1e-7,
            force_optimizer: false,
            jobs: Jobs::Auto,
        }
    }
}

fn flatten(u: &ComplexMatrix) -> ComplexVector {
    let d = u.nrows();
    ComplexVector::from_fn(d * d, |idx, _| u[(idx / d, idx % d)])
}

fn unflatten(v: &ComplexVector, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |j, i| v[j * d + i])
}

/// ⟨ψ⁺|(U†⊗I)ρ(U⊗I)|ψ⁺⟩ for a d×d state.
pub fn fef_objective(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<f64> {
    let d = u.nrows();
    rho.require_square(d)?;
    let v = flatten(u);
    Ok((v.adjoint() * rho.matrix() * &v)[(0, 0)].re / d as f64)
}

fn check_dim(d: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(Error::usage(format!(
            "local dimension {d} outside supported range {MIN_DIM}..={MAX_DIM}"
        )));
    }
    Ok(())
}

/// Closed form (Σσᵢ)²/d from the Schmidt coefficients, maximized at U = W V†
/// where M = W Σ V† is the amplitude matrix.
pub fn fef_pure(phi: &PureState, d: usize) -> Result<FefResult> {
    match phi.layout().square_dim() {
        Some(sd) if sd == d => {}
        _ => {
            return Err(Error::usage(format!(
                "state has side dimensions {:?}, expected {d}x{d}",
                phi.layout().side_dims()
            )))
        }
    }
    let svd = phi.amplitude_matrix().svd(true, true);
    let nuclear: f64 = svd.singular_values.iter().sum();
    let w = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    Ok(FefResult {
        value: nuclear * nuclear / d as f64,
        optimizer_unitary: w * v_t,
        method: FefMethod::ClosedFormPure,
        restarts_used: 0,
        converged: true,
    })
}

struct AscentOutcome {
    u: ComplexMatrix,
    value: f64,
    converged: bool,
}

const REL_IMPROVEMENT_TOL: f64 = 1e-12;
const MAX_HALVINGS: usize = 60;
const MAX_DOUBLINGS: usize = 40;

/// Gradient ascent with polar retraction from `u`. The line search starts at
/// step 1, halving until the value increases or doubling while it does.
fn ascend(rho: &ComplexMatrix, d: usize, mut u: ComplexMatrix, max_iters: usize) -> AscentOutcome {
    let scale = 1.0 / d as f64;
    let value_of = |u: &ComplexMatrix| {
        let v = flatten(u);
        (v.adjoint() * rho * &v)[(0, 0)].re * scale
    };
    let mut value = value_of(&u);
    let mut converged = false;
    for _ in 0..max_iters {
        // ∂F/∂Ū = reshape(ρ·vec U)/d.
        let grad = unflatten(&(rho * flatten(&u)), d).scale(scale);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate = linalg::polar_unitary(&(&u + grad.scale(step)));
            let cv = value_of(&candidate);
            if cv > value {
                accepted = Some((candidate, cv));
                break;
            }
            step *= 0.5;
        }
        let Some((mut next, mut next_value)) = accepted else {
            converged = true;
            break;
        };
        // F is a convex quadratic, so long steps toward polar(∇F) keep paying
        // off; expand while they do.
        if step == 1.0 {
            for _ in 0..MAX_DOUBLINGS {
                step *= 2.0;
                let candidate = linalg::polar_unitary(&(&u + grad.scale(step)));
                let cv = value_of(&candidate);
                if cv <= next_value {
                    break;
                }
                next = candidate;
                next_value = cv;
            }
        }
        let rel = (next_value - value) / value.abs().max(f64::MIN_POSITIVE);
        u = next;
        value = next_value;
        if rel < REL_IMPROVEMENT_TOL {
            converged = true;
            break;
        }
    }
    AscentOutcome { u, value, converged }
}

/// Lower bound on F(ρ) by restarted manifold ascent: one start at the
/// identity, then `config.restarts` Haar-random starts from streams 1.. of
/// `config.seed`.
pub fn fef_optimize(rho: &DensityMatrix, d: usize, config: &FefConfig) -> Result<FefResult> {
    check_dim(d)?;
    rho.require_square(d)?;
    let total = config.restarts + 1;
    let matrix = rho.matrix();
    let outcomes = parallel::run_indexed(total, config.jobs, |k| {
        let start = if k == 0 {
            ComplexMatrix::identity(d, d)
        } else {
            haar_unitary(d, &mut rng_for(config.seed, k as u64))
        };
        ascend(matrix, d, start, config.max_iters)
    });
    let best = parallel::best_index(outcomes.iter().map(|o| o.value)).expect("at least one start");
    let winner = &outcomes[best];
    Ok(FefResult {
        value: fef_objective(rho, &winner.u)?,
        optimizer_unitary: winner.u.clone(),
        method: FefMethod::ManifoldAscent,
        restarts_used: total,
        converged: winner.converged,
    })
}

/// F(ρ) by the closed form when ρ is pure (unless forced), by ascent otherwise.
pub fn fully_entangled_fraction(rho: &DensityMatrix, d: usize, config: &FefConfig) -> Result<FefResult> {
    check_dim(d)?;
    rho.require_square(d)?;
    if rho.is_pure() && !config.force_optimizer {
        let (_, vecs) = linalg::hermitian_eigen(rho.matrix());
        let top = vecs.column(vecs.ncols() - 1).into_owned();
        let phi = PureState::normalized(top, rho.layout().grouped())?;
        let mut res = fef_pure(&phi, d)?;
        // Report the objective of ρ itself so the certificate re-evaluates exactly.
        res.value = fef_objective(rho, &res.optimizer_unitary)?;
        return Ok(res);
    }
    fef_optimize(rho, d, config)
}

/// (dF + 1)/(d + 1).
pub fn fidelity_from_fef(fef: f64, d: usize) -> f64 {
    let d = d as f64;
    (d * fef + 1.0) / (d + 1.0)
}

#[derive(Debug, Clone)]
pub struct TeleportationVerdict {
    pub fef: FefResult,
    pub fidelity: f64,
    pub useful: Verdict,
}

/// Useful when the certified F exceeds 1/d + margin; never certifies the converse.
pub fn is_useful(rho: &DensityMatrix, d: usize, config: &FefConfig) -> Result<TeleportationVerdict> {
    let fef = fully_entangled_fraction(rho, d, config)?;
    let fidelity = fidelity_from_fef(fef.value, d);
    let useful = if fef.value > 1.0 / d as f64 + config.margin {
        Verdict::Useful
    } else {
        Verdict::Inconclusive
    };
    Ok(TeleportationVerdict {
        fef,
        fidelity,
        useful,
    })
}
