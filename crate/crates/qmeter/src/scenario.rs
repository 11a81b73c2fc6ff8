//! Scenario files: the JSON schema bundling state, observable, measurement,
//! and optional value assignment, plus parse/serialize with field-level
//! validation errors.
//!
//! Schema (version 1): complex numbers are two-element arrays `[re, im]`,
//! vectors are arrays of such pairs, matrices are row-major arrays of rows.
//! The `measurement` object carries exactly one of `basis`, `povm`,
//! `apparatus`, or `coupling`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apparatus::{Apparatus, CouplingFamily};
use crate::error::Error as DomainError;
use crate::error_analysis::ValueAssignment;
use crate::hilbert::{C64, Ket, Observable};
use crate::measurement::{Povm, ProjectiveBasis, validate_povm, z_basis};

#[derive(Debug, Error)]
pub enum ScenarioError {
    /// Malformed document syntax; CLI exit code 2.
    #[error("parse error: {0}")]
    Syntax(#[from] serde_json::Error),
    /// A well-formed document violating an invariant; CLI exit code 1.
    #[error("{field}: {source}")]
    Invalid {
        field: String,
        #[source]
        source: DomainError,
    },
    #[error("{field}: {message}")]
    Schema { field: String, message: String },
}

fn invalid(field: &str) -> impl Fn(DomainError) -> ScenarioError + '_ {
    move |source| ScenarioError::Invalid { field: field.to_string(), source }
}

type Cx = [f64; 2];

fn to_c64(x: Cx) -> C64 {
    C64::new(x[0], x[1])
}

fn from_c64(z: C64) -> Cx {
    [z.re, z.im]
}

fn parse_vector(raw: &[Cx]) -> Vec<C64> {
    raw.iter().copied().map(to_c64).collect()
}

fn parse_matrix(field: &str, raw: &[Vec<Cx>]) -> Result<DMatrix<C64>, ScenarioError> {
    let rows = raw.len();
    let cols = raw.first().map_or(0, Vec::len);
    for r in raw {
        if r.len() != cols {
            return Err(ScenarioError::Schema {
                field: field.to_string(),
                message: "ragged matrix rows".to_string(),
            });
        }
    }
    let flat: Vec<C64> = raw.iter().flatten().copied().map(to_c64).collect();
    Ok(DMatrix::from_row_slice(rows, cols, &flat))
}

fn matrix_doc(m: &DMatrix<C64>) -> Vec<Vec<Cx>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| from_c64(m[(r, c)])).collect())
        .collect()
}

fn vector_doc(v: &Ket) -> Vec<Cx> {
    v.amps().iter().copied().map(from_c64).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub vectors: Vec<Vec<Cx>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmElementDoc {
    pub label: String,
    pub matrix: Vec<Vec<Cx>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApparatusDoc {
    pub meter_dim: usize,
    pub meter_init: Vec<Cx>,
    pub joint_unitary: Vec<Vec<Cx>>,
    pub readout: BasisDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingDoc {
    /// Coupling strength phi in radians; generator is the scenario observable.
    pub phi: f64,
}

/// Exactly one variant; serde's externally tagged encoding enforces it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementDoc {
    Basis(BasisDoc),
    Povm { elements: Vec<PovmElementDoc> },
    Apparatus(ApparatusDoc),
    Coupling(CouplingDoc),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub version: u32,
    pub dim: usize,
    pub state: Vec<Cx>,
    pub observable: Vec<Vec<Cx>>,
    pub measurement: MeasurementDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_psi: Option<f64>,
}

/// A validated measurement description.
#[derive(Debug, Clone)]
pub enum Measurement {
    Basis(ProjectiveBasis),
    Povm(Povm),
    Apparatus(Apparatus),
    Coupling(CouplingFamily),
}

impl Measurement {
    /// The POVM this measurement induces on the system.
    pub fn povm(&self) -> crate::error::Result<Povm> {
        match self {
            Measurement::Basis(b) => Ok(crate::measurement::basis_to_povm(b)),
            Measurement::Povm(p) => Ok(p.clone()),
            Measurement::Apparatus(a) => crate::apparatus::induced_povm(a),
            Measurement::Coupling(fam) => {
                let app = fam.apparatus(z_basis(2))?;
                crate::apparatus::induced_povm(&app)
            }
        }
    }

    /// The projective basis, for the operations the zero-error machinery
    /// restricts to projective measurements.
    pub fn basis(&self) -> crate::error::Result<&ProjectiveBasis> {
        match self {
            Measurement::Basis(b) => Ok(b),
            _ => Err(DomainError::NonProjective),
        }
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub dim: usize,
    pub state: Ket,
    pub observable: Observable,
    pub measurement: Measurement,
    pub assignment: Option<ValueAssignment>,
    pub b_psi: f64,
}

fn parse_basis(field: &str, doc: &BasisDoc, dim: usize) -> Result<ProjectiveBasis, ScenarioError> {
    let vectors = doc
        .vectors
        .iter()
        .enumerate()
        .map(|(i, raw)| {
            Ket::new(parse_vector(raw)).map_err(invalid(&format!("{field}.vectors[{i}]")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (i, v) in vectors.iter().enumerate() {
        if v.dim() != dim {
            return Err(ScenarioError::Invalid {
                field: format!("{field}.vectors[{i}]"),
                source: DomainError::DimensionMismatch { expected: dim, got: v.dim() },
            });
        }
    }
    let basis = match &doc.labels {
        Some(labels) => ProjectiveBasis::new(labels.clone(), vectors),
        None => ProjectiveBasis::with_default_labels(vectors),
    };
    basis.map_err(invalid(field))
}

/// Validate a parsed document into a [`Scenario`].
pub fn validate_scenario(doc: &ScenarioDoc) -> Result<Scenario, ScenarioError> {
    if doc.version != 1 {
        return Err(ScenarioError::Schema {
            field: "version".to_string(),
            message: format!("unsupported version {}, expected 1", doc.version),
        });
    }
    let state = Ket::new(parse_vector(&doc.state)).map_err(invalid("state"))?;
    if state.dim() != doc.dim {
        return Err(ScenarioError::Invalid {
            field: "state".to_string(),
            source: DomainError::DimensionMismatch { expected: doc.dim, got: state.dim() },
        });
    }
    let observable = Observable::new(parse_matrix("observable", &doc.observable)?)
        .map_err(invalid("observable"))?;
    if observable.dim() != doc.dim {
        return Err(ScenarioError::Invalid {
            field: "observable".to_string(),
            source: DomainError::DimensionMismatch { expected: doc.dim, got: observable.dim() },
        });
    }
    let measurement = match &doc.measurement {
        MeasurementDoc::Basis(b) => {
            Measurement::Basis(parse_basis("measurement.basis", b, doc.dim)?)
        }
        MeasurementDoc::Povm { elements } => {
            let raw = elements
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let m = parse_matrix(&format!("measurement.povm.elements[{i}]"), &e.matrix)?;
                    Ok((e.label.clone(), m))
                })
                .collect::<Result<Vec<_>, ScenarioError>>()?;
            Measurement::Povm(validate_povm(raw).map_err(invalid("measurement.povm"))?)
        }
        MeasurementDoc::Apparatus(a) => {
            let meter_init = Ket::new(parse_vector(&a.meter_init))
                .map_err(invalid("measurement.apparatus.meter_init"))?;
            let readout =
                parse_basis("measurement.apparatus.readout", &a.readout, a.meter_dim)?;
            let joint = parse_matrix("measurement.apparatus.joint_unitary", &a.joint_unitary)?;
            Measurement::Apparatus(
                Apparatus::new(doc.dim, a.meter_dim, meter_init, joint, readout)
                    .map_err(invalid("measurement.apparatus"))?,
            )
        }
        MeasurementDoc::Coupling(c) => {
            if !c.phi.is_finite() {
                return Err(ScenarioError::Schema {
                    field: "measurement.coupling.phi".to_string(),
                    message: "must be finite".to_string(),
                });
            }
            Measurement::Coupling(CouplingFamily::new(observable.clone(), c.phi))
        }
    };
    let assignment = doc
        .assignment
        .as_ref()
        .map(|m| ValueAssignment::from_pairs(m.iter().map(|(l, v)| (l.clone(), *v))));
    Ok(Scenario {
        dim: doc.dim,
        state,
        observable,
        measurement,
        assignment,
        b_psi: doc.b_psi.unwrap_or(0.0),
    })
}

/// Parse a scenario document from JSON text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_str(text)?;
    validate_scenario(&doc)
}

/// Serialize a validated scenario back into its document form.
pub fn scenario_doc(s: &Scenario) -> ScenarioDoc {
    let measurement = match &s.measurement {
        Measurement::Basis(b) => MeasurementDoc::Basis(BasisDoc {
            labels: Some(b.labels().to_vec()),
            vectors: b.vectors().iter().map(vector_doc).collect(),
        }),
        Measurement::Povm(p) => MeasurementDoc::Povm {
            elements: p
                .elements()
                .iter()
                .map(|e| PovmElementDoc { label: e.label().to_string(), matrix: matrix_doc(e.matrix()) })
                .collect(),
        },
        Measurement::Apparatus(a) => MeasurementDoc::Apparatus(ApparatusDoc {
            meter_dim: a.meter_dim(),
            meter_init: vector_doc(a.meter_init()),
            joint_unitary: matrix_doc(a.joint_unitary()),
            readout: BasisDoc {
                labels: Some(a.readout_basis().labels().to_vec()),
                vectors: a.readout_basis().vectors().iter().map(vector_doc).collect(),
            },
        }),
        Measurement::Coupling(fam) => {
            MeasurementDoc::Coupling(CouplingDoc { phi: fam.strength() })
        }
    };
    ScenarioDoc {
        version: 1,
        dim: s.dim,
        state: vector_doc(&s.state),
        observable: matrix_doc(s.observable.matrix()),
        measurement,
        assignment: s
            .assignment
            .as_ref()
            .map(|a| a.iter().map(|(l, v)| (l.to_string(), v)).collect()),
        b_psi: if s.b_psi == 0.0 { None } else { Some(s.b_psi) },
    }
}

pub fn serialize_scenario(s: &Scenario) -> String {
    serde_json::to_string_pretty(&scenario_doc(s)).expect("scenario serialization")
}
