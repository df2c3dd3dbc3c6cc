//! Detection of ideal and useful resources for quantum teleportation.
//!
//! * [`gamma`]: the Γ operator for 2n-qubit states built from local
//!   complementary observables, with the ideal-resource and full-separability
//!   tests driven by a restarted simplex search.
//! * [`fef`]: fully entangled fraction, optimal teleportation fidelity and the
//!   usefulness verdict for d×d states.
//! * [`witness`]: teleportation witnesses W(U) and their optimality certificates.
//!
//! Restarts run on rayon when the `parallel` feature is enabled (default);
//! results do not depend on the worker count.

pub mod error;
pub mod fef;
pub mod gamma;
pub mod io;
pub mod linalg;
pub mod nelder_mead;
pub mod parallel;
pub mod pauli;
pub mod random;
pub mod state;
pub mod tol;
pub mod witness;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
pub use parallel::Jobs;
pub use state::{DensityMatrix, PureState, SubsystemLayout};

/// One-sided verdicts. The tests here are sufficient conditions only, so a
/// negative outcome is always `Inconclusive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Ideal,
    Entangled,
    Useful,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Ideal => "Ideal",
            Verdict::Entangled => "Entangled",
            Verdict::Useful => "Useful",
            Verdict::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}
