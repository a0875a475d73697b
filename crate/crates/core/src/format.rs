//! JSON circuit files.
//!
//! ```json
//! {"loops": [{"phi_x": 0.0,
//!             "branches": [{"kind": "JJ", "CJ": 1.92e-15, "EJ": 1e9},
//!                          {"kind": "none"}, {"kind": "none"},
//!                          {"kind": "JJ", "CJ": 5.42e-14, "EJ": 9.127e9}]}],
//!  "couplings": []}
//! ```
//!
//! All numbers are SI; `EJ` is `E_J / h` in hertz.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::circuit::{Branch, BranchKind, ChainCircuit, CircuitError, LoopTopology};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed circuit file at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unknown element kind {kind:?} (expected C, L, JJ or none)")]
    UnknownKind { path: String, kind: String },
    #[error("{path}: component value must be strictly positive, got {value}")]
    NegativeValue { path: String, value: f64 },
    #[error("{path}: missing field {field:?} for this element kind")]
    MissingField { path: String, field: &'static str },
    #[error("{path}: field {field:?} does not belong to this element kind")]
    UnexpectedField { path: String, field: &'static str },
    #[error("{path}: {message}")]
    Structure { path: String, message: String },
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawBranch {
    kind: String,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    l: Option<f64>,
    #[serde(rename = "CJ", default, skip_serializing_if = "Option::is_none")]
    cj: Option<f64>,
    #[serde(rename = "EJ", default, skip_serializing_if = "Option::is_none")]
    ej: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawLoop {
    #[serde(default)]
    phi_x: f64,
    branches: Vec<RawBranch>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawCircuit {
    loops: Vec<RawLoop>,
    #[serde(default)]
    couplings: Vec<f64>,
}

pub fn parse_circuit(text: &[u8]) -> Result<ChainCircuit, FormatError> {
    let raw: RawCircuit = serde_json::from_slice(text).map_err(syntax)?;
    from_raw(raw)
}

/// Parses a circuit from an already decoded JSON value (for documents that
/// embed a circuit next to other keys).
pub fn circuit_from_value(value: Value) -> Result<ChainCircuit, FormatError> {
    let raw: RawCircuit = serde_json::from_value(value).map_err(syntax)?;
    from_raw(raw)
}

fn syntax(e: serde_json::Error) -> FormatError {
    FormatError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn from_raw(raw: RawCircuit) -> Result<ChainCircuit, FormatError> {
    if raw.loops.is_empty() {
        return Err(FormatError::Structure {
            path: "loops".into(),
            message: "at least one loop is required".into(),
        });
    }
    let mut loops = Vec::with_capacity(raw.loops.len());
    for (i, lp) in raw.loops.into_iter().enumerate() {
        if lp.branches.len() != 4 {
            return Err(FormatError::Structure {
                path: format!("loops[{i}].branches"),
                message: format!("expected exactly 4 branches, got {}", lp.branches.len()),
            });
        }
        if !lp.phi_x.is_finite() {
            return Err(FormatError::Structure {
                path: format!("loops[{i}].phi_x"),
                message: "must be finite".into(),
            });
        }
        let mut branches = [Branch::Absent; 4];
        for (b, rb) in lp.branches.into_iter().enumerate() {
            branches[b] = branch_from_raw(&format!("loops[{i}].branches[{b}]"), rb)?;
        }
        loops.push(LoopTopology::new(branches, lp.phi_x));
    }
    for (i, c) in raw.couplings.iter().enumerate() {
        check_positive(&format!("couplings[{i}]"), *c)?;
    }
    ChainCircuit::new(loops, raw.couplings).map_err(|e| match e {
        CircuitError::CouplingCount { expected, got, .. } => FormatError::Structure {
            path: "couplings".into(),
            message: format!("expected {expected} coupling capacitors, got {got}"),
        },
        other => FormatError::Structure {
            path: "circuit".into(),
            message: other.to_string(),
        },
    })
}

fn branch_from_raw(path: &str, rb: RawBranch) -> Result<Branch, FormatError> {
    let kind = BranchKind::from_symbol(&rb.kind).ok_or_else(|| FormatError::UnknownKind {
        path: format!("{path}.kind"),
        kind: rb.kind.clone(),
    })?;
    let fields: [(&'static str, Option<f64>); 4] =
        [("C", rb.c), ("L", rb.l), ("CJ", rb.cj), ("EJ", rb.ej)];
    let wanted: &[&str] = match kind {
        BranchKind::Capacitor => &["C"],
        BranchKind::Inductor => &["L"],
        BranchKind::Junction => &["CJ", "EJ"],
        BranchKind::Absent => &[],
    };
    let mut vals = Vec::new();
    for (name, value) in fields {
        match (wanted.contains(&name), value) {
            (true, Some(v)) => {
                check_positive(&format!("{path}.{name}"), v)?;
                vals.push(v);
            }
            (true, None) => {
                return Err(FormatError::MissingField {
                    path: path.to_string(),
                    field: name,
                })
            }
            (false, Some(_)) => {
                return Err(FormatError::UnexpectedField {
                    path: path.to_string(),
                    field: name,
                })
            }
            (false, None) => {}
        }
    }
    Ok(match kind {
        BranchKind::Capacitor => Branch::Capacitor { capacitance: vals[0] },
        BranchKind::Inductor => Branch::Inductor { inductance: vals[0] },
        BranchKind::Junction => Branch::Junction {
            capacitance: vals[0],
            josephson_energy: vals[1],
        },
        BranchKind::Absent => Branch::Absent,
    })
}

fn check_positive(path: &str, v: f64) -> Result<(), FormatError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FormatError::NegativeValue {
            path: path.to_string(),
            value: v,
        })
    }
}

fn to_raw(circuit: &ChainCircuit) -> RawCircuit {
    let loops = circuit
        .loops
        .iter()
        .map(|lp| RawLoop {
            phi_x: lp.external_phase,
            branches: lp
                .branches
                .iter()
                .map(|b| {
                    let mut rb = RawBranch {
                        kind: b.kind().symbol().to_string(),
                        c: None,
                        l: None,
                        cj: None,
                        ej: None,
                    };
                    match *b {
                        Branch::Capacitor { capacitance } => rb.c = Some(capacitance),
                        Branch::Inductor { inductance } => rb.l = Some(inductance),
                        Branch::Junction {
                            capacitance,
                            josephson_energy,
                        } => {
                            rb.cj = Some(capacitance);
                            rb.ej = Some(josephson_energy);
                        }
                        Branch::Absent => {}
                    }
                    rb
                })
                .collect(),
        })
        .collect();
    RawCircuit {
        loops,
        couplings: circuit.couplings.clone(),
    }
}

/// The circuit as a JSON object (`loops`, `couplings`).
pub fn circuit_to_value(circuit: &ChainCircuit) -> Value {
    serde_json::to_value(to_raw(circuit)).expect("circuit serializes")
}

pub fn serialize_circuit(circuit: &ChainCircuit) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&to_raw(circuit)).expect("circuit serializes");
    out.push(b'\n');
    out
}
