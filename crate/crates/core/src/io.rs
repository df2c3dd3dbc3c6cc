//! State files, unitary files and run reports.
//!
//! State file (JSON):
//!
//! ```json
//! { "kind": "pure", "mode": "multiqubit", "qubits_per_side": 1,
//!   "data": [[0.7071067811865476, 0.0], [0.0, 0.0], [0.0, 0.0], [0.7071067811865476, 0.0]] }
//! ```
//!
//! `kind` is `pure` (flat amplitude list) or `density` (row-major list of
//! rows); `mode` is `multiqubit` with `qubits_per_side` or `bipartite` with
//! `d`. Complex entries are `[re, im]` pairs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fef;
use crate::gamma;
use crate::linalg::{self, c, ComplexMatrix, ComplexVector};
use crate::pauli::{self, Mat2};
use crate::state::{DensityMatrix, PureState, SubsystemLayout};
use crate::witness;
use crate::{tol, Verdict};

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateMode {
    Multiqubit,
    Bipartite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateData {
    Vector(Vec<Pair>),
    Matrix(Vec<Vec<Pair>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub kind: StateKind,
    pub mode: StateMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits_per_side: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub data: StateData,
}

/// A parsed and validated state.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedState {
    Pure(PureState),
    Density(DensityMatrix),
}

impl LoadedState {
    pub fn density(&self) -> DensityMatrix {
        match self {
            LoadedState::Pure(p) => p.density(),
            LoadedState::Density(d) => d.clone(),
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        match self {
            LoadedState::Pure(p) => p.layout(),
            LoadedState::Density(d) => d.layout(),
        }
    }
}

fn pair(z: &linalg::C64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: &Pair) -> linalg::C64 {
    c(p[0], p[1])
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(&m[(i, j)])).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<Pair>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::usage(format!(
            "row {i} has {} entries, expected {cols}",
            r.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(n, cols, |i, j| unpair(&rows[i][j])))
}

fn layout_of(file: &StateFile) -> Result<SubsystemLayout> {
    match file.mode {
        StateMode::Multiqubit => {
            let n = file
                .qubits_per_side
                .ok_or_else(|| Error::usage("multiqubit state needs qubits_per_side"))?;
            if file.d.is_some() {
                return Err(Error::usage("multiqubit state must not declare d"));
            }
            SubsystemLayout::multiqubit(n)
        }
        StateMode::Bipartite => {
            let d = file
                .d
                .ok_or_else(|| Error::usage("bipartite state needs d"))?;
            if file.qubits_per_side.is_some() {
                return Err(Error::usage("bipartite state must not declare qubits_per_side"));
            }
            SubsystemLayout::bipartite(d)
        }
    }
}

impl StateFile {
    pub fn from_pure(state: &PureState) -> Result<Self> {
        let (mode, qubits_per_side, d) = describe(state.layout())?;
        Ok(Self {
            kind: StateKind::Pure,
            mode,
            qubits_per_side,
            d,
            data: StateData::Vector(state.amplitudes().iter().map(pair).collect()),
        })
    }

    pub fn from_density(state: &DensityMatrix) -> Result<Self> {
        let (mode, qubits_per_side, d) = describe(state.layout())?;
        Ok(Self {
            kind: StateKind::Density,
            mode,
            qubits_per_side,
            d,
            data: StateData::Matrix(matrix_to_rows(state.matrix())),
        })
    }

    pub fn from_loaded(state: &LoadedState) -> Result<Self> {
        match state {
            LoadedState::Pure(p) => Self::from_pure(p),
            LoadedState::Density(d) => Self::from_density(d),
        }
    }

    /// Validate dimensions and state invariants.
    pub fn into_state(self) -> Result<LoadedState> {
        let layout = layout_of(&self)?;
        let dim = layout.total_dim();
        match (self.kind, self.data) {
            (StateKind::Pure, StateData::Vector(v)) => {
                if v.len() != dim {
                    return Err(Error::usage(format!(
                        "pure state declares dimension {dim} but has {} amplitudes",
                        v.len()
                    )));
                }
                let amps = ComplexVector::from_iterator(dim, v.iter().map(unpair));
                Ok(LoadedState::Pure(PureState::new(amps, layout)?))
            }
            (StateKind::Density, StateData::Matrix(rows)) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::usage(format!(
                        "density matrix must be {dim}x{dim} for the declared layout"
                    )));
                }
                let m = rows_to_matrix(&rows)?;
                Ok(LoadedState::Density(DensityMatrix::new(m, layout)?))
            }
            (StateKind::Pure, StateData::Matrix(_)) => {
                Err(Error::usage("pure state data must be a flat list of [re, im] pairs"))
            }
            (StateKind::Density, StateData::Vector(_)) => {
                Err(Error::usage("density data must be a list of rows of [re, im] pairs"))
            }
        }
    }
}

fn describe(layout: &SubsystemLayout) -> Result<(StateMode, Option<usize>, Option<usize>)> {
    if let Some(n) = layout.qubits_per_side() {
        return Ok((StateMode::Multiqubit, Some(n), None));
    }
    match (layout.dims(), layout.square_dim()) {
        ([_, _], Some(d)) => Ok((StateMode::Bipartite, None, Some(d))),
        _ => Err(Error::usage(format!(
            "layout {:?} has no file representation",
            layout.dims()
        ))),
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        message: e.to_string(),
    }
}

pub fn parse_state_str(text: &str) -> Result<LoadedState> {
    let file: StateFile = serde_json::from_str(text).map_err(json_error)?;
    file.into_state()
}

pub fn parse_state(path: impl AsRef<Path>) -> Result<LoadedState> {
    parse_state_str(&std::fs::read_to_string(path)?)
}

/// One amplitude (pure) or one row (density) per line.
pub fn state_to_string(state: &LoadedState) -> Result<String> {
    let file = StateFile::from_loaded(state)?;
    let mut out = String::from("{\n");
    out += &format!("  \"kind\": {},\n", enc(&file.kind));
    out += &format!("  \"mode\": {},\n", enc(&file.mode));
    if let Some(n) = file.qubits_per_side {
        out += &format!("  \"qubits_per_side\": {n},\n");
    }
    if let Some(d) = file.d {
        out += &format!("  \"d\": {d},\n");
    }
    let lines: Vec<String> = match &file.data {
        StateData::Vector(v) => v.iter().map(enc).collect(),
        StateData::Matrix(rows) => rows.iter().map(enc).collect(),
    };
    out += "  \"data\": [\n    ";
    out += &lines.join(",\n    ");
    out += "\n  ]\n}";
    Ok(out)
}

fn enc<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

pub fn write_state(path: impl AsRef<Path>, state: &LoadedState) -> Result<()> {
    let mut text = state_to_string(state)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitaryFile {
    pub unitary: Vec<Vec<Pair>>,
}

pub fn parse_unitary_str(text: &str) -> Result<ComplexMatrix> {
    let file: UnitaryFile = serde_json::from_str(text).map_err(json_error)?;
    let u = rows_to_matrix(&file.unitary)?;
    linalg::require_unitary(&u, "unitary file")?;
    Ok(u)
}

pub fn parse_unitary(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    parse_unitary_str(&std::fs::read_to_string(path)?)
}

pub fn write_unitary(path: impl AsRef<Path>, u: &ComplexMatrix) -> Result<()> {
    let file = UnitaryFile {
        unitary: matrix_to_rows(u),
    };
    let mut text = serde_json::to_string(&file).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn mat2_rows(m: &Mat2) -> [[Pair; 2]; 2] {
    [
        [pair(&m[(0, 0)]), pair(&m[(0, 1)])],
        [pair(&m[(1, 0)]), pair(&m[(1, 1)])],
    ]
}

fn rows_mat2(r: &[[Pair; 2]; 2]) -> Mat2 {
    Mat2::new(
        unpair(&r[0][0]),
        unpair(&r[0][1]),
        unpair(&r[1][0]),
        unpair(&r[1][1]),
    )
}

/// Evidence attached to a positive verdict, re-checkable against the input state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    /// Per-qubit rotations R_i (X_k = R_i σ_k R_i†) with their frames; `value` is ⟨Γ⟩.
    Triples {
        su2: Vec<[[Pair; 2]; 2]>,
        frames: Vec<[[f64; 3]; 3]>,
        value: f64,
    },
    /// Unitary attaining the fully entangled fraction `value`.
    Unitary { unitary: Vec<Vec<Pair>>, value: f64 },
    /// Unitary U with Tr(W(U)ρ) = `value`.
    Witness { unitary: Vec<Vec<Pair>>, value: f64 },
}

impl Certificate {
    pub fn from_triples(triples: &[pauli::ComplementaryTriple], value: f64) -> Self {
        Certificate::Triples {
            su2: triples.iter().map(|t| mat2_rows(t.su2())).collect(),
            frames: triples
                .iter()
                .map(|t| t.frame().map(|a| [a[0], a[1], a[2]]))
                .collect(),
            value,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Certificate::Triples { value, .. }
            | Certificate::Unitary { value, .. }
            | Certificate::Witness { value, .. } => *value,
        }
    }

    /// Recompute the certified quantity on `state`.
    pub fn recompute(&self, state: &DensityMatrix) -> Result<f64> {
        match self {
            Certificate::Triples { su2, .. } => {
                let triples = su2
                    .iter()
                    .map(|r| pauli::triple_from_su2(&rows_mat2(r)))
                    .collect::<Result<Vec<_>>>()?;
                gamma::gamma_expectation(state, &triples)
            }
            Certificate::Unitary { unitary, .. } => {
                let u = rows_to_matrix(unitary)?;
                linalg::require_unitary(&u, "certificate unitary")?;
                fef::fef_objective(state, &u)
            }
            Certificate::Witness { unitary, .. } => {
                let w = witness::witness_rotated(&rows_to_matrix(unitary)?)?;
                witness::evaluate(&w, state)
            }
        }
    }

    /// True when the recomputed value matches within 1e−9.
    pub fn revalidate(&self, state: &DensityMatrix) -> Result<bool> {
        Ok((self.recompute(state)? - self.value()).abs() <= tol::DERIVED)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Command-specific quantities (threshold, fidelity, rank, ...).
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    pub diagnostics: Diagnostics,
    pub seed: u64,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_haar_pure};
    use crate::state::bell_tensor;
    use proptest::prelude::*;

    #[test]
    fn bell_file_parses() {
        let text = r#"{ "kind": "pure", "mode": "multiqubit", "qubits_per_side": 1,
            "data": [[0.7071067811865476, 0.0], [0.0, 0.0], [0.0, 0.0], [0.7071067811865476, 0.0]] }"#;
        let LoadedState::Pure(p) = parse_state_str(text).unwrap() else {
            panic!("expected a pure state")
        };
        assert_eq!(p.amplitudes(), bell_tensor(1).unwrap().amplitudes());
        assert_eq!(p.layout(), &SubsystemLayout::multiqubit(1).unwrap());
    }

    #[test]
    fn trace_error_message() {
        let rows: Vec<String> = (0..4)
            .map(|i| {
                let entries: Vec<&str> = (0..4).map(|j| if i == j { "[0.245, 0]" } else { "[0, 0]" }).collect();
                format!("[{}]", entries.join(", "))
            })
            .collect();
        let text = format!(
            r#"{{"kind": "density", "mode": "bipartite", "d": 2, "data": [{}]}}"#,
            rows.join(", ")
        );
        let err = parse_state_str(&text).unwrap_err();
        assert_eq!(err.to_string(), "validation: trace residual 2.0e-2 exceeds 1e-10");
    }

    #[test]
    fn malformed_reports_line() {
        let text = "{\n \"kind\": \"pure\",\n \"mode\": oops\n}";
        match parse_state_str(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn structural_rejections() {
        let wrong_len = r#"{"kind": "pure", "mode": "bipartite", "d": 2, "data": [[1, 0]]}"#;
        assert!(matches!(parse_state_str(wrong_len), Err(Error::Usage(_))));
        let both = r#"{"kind": "pure", "mode": "bipartite", "d": 2, "qubits_per_side": 1, "data": [[1,0],[0,0],[0,0],[0,0]]}"#;
        assert!(parse_state_str(both).is_err());
        let unknown = r#"{"kind": "pure", "mode": "bipartite", "d": 2, "extra": 1, "data": [[1,0],[0,0],[0,0],[0,0]]}"#;
        assert!(matches!(parse_state_str(unknown), Err(Error::Parse { .. })));
        let unnormalized = r#"{"kind": "pure", "mode": "bipartite", "d": 2, "data": [[1,0],[1,0],[0,0],[0,0]]}"#;
        assert!(matches!(
            parse_state_str(unnormalized),
            Err(Error::Validation { check: "norm", .. })
        ));
    }

    #[test]
    fn unitary_file() {
        let u = crate::random::random_unitary(3, 5).unwrap();
        let text = serde_json::to_string(&UnitaryFile { unitary: matrix_to_rows(&u) }).unwrap();
        assert_eq!(parse_unitary_str(&text).unwrap(), u);
        let bad = r#"{"unitary": [[[2,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(parse_unitary_str(bad), Err(Error::Contract(_))));
    }

    #[test]
    fn certificate_round_trip_and_revalidation() {
        let rho = bell_tensor(2).unwrap().density();
        let cert = Certificate::from_triples(&gamma::pauli_triples(2), 1.0);
        let back: Certificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
        assert_eq!(back, cert);
        assert!(back.revalidate(&rho).unwrap());
        let wrong = Certificate::Unitary {
            unitary: matrix_to_rows(&ComplexMatrix::identity(4, 4)),
            value: 0.5,
        };
        assert!(!wrong.revalidate(&rho.as_bipartite()).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn state_files_round_trip_bit_exactly(seed in any::<u64>(), n in 1usize..=2, rank in 1usize..=3, pure in any::<bool>()) {
            let layout = SubsystemLayout::multiqubit(n).unwrap();
            let state = if pure {
                LoadedState::Pure(random_haar_pure(&layout, seed))
            } else {
                LoadedState::Density(random_density(&layout, rank, seed).unwrap())
            };
            let text = state_to_string(&state).unwrap();
            let back = parse_state_str(&text).unwrap();
            prop_assert_eq!(back, state);
        }
    }
}
