//! Lowest eigenpairs, transition frequencies and operator matrix elements.

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::ChainCircuit;
use crate::linalg::{dense_eigh, lowest_eigenpairs, CsrMatrix, EigenOptions, LinalgError};
use crate::quantize::{assemble_chain_hamiltonian, OperatorLabel, QuantizeError, QuantizeOptions, QuantizedSystem};

/// Denominators below this many hertz are treated as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

/// Eigenvalues closer than this (relative to the largest level magnitude)
/// form a degenerate cluster.
pub const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("requested {requested} levels but only {available} are available")]
    InsufficientLevels { requested: usize, available: usize },
    #[error("level index {0} is outside the computed spectrum")]
    LevelOutOfRange(usize),
    #[error("denominator {value:.3e} Hz is below the degeneracy floor")]
    DegenerateDenominator { value: f64 },
}

/// Lowest eigenpairs with a fixed phase gauge: the largest-magnitude
/// component of every eigenvector is real and positive.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: Array2<C64>,
}

impl Eigensystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn fix_gauge(vectors: &mut Array2<C64>) {
    for mut col in vectors.columns_mut() {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (i, z) in col.iter().enumerate() {
            // Strict comparison with a small margin keeps the choice stable
            // when two components tie up to rounding.
            if z.norm() > best_norm * (1.0 + 1e-10) {
                best = i;
                best_norm = z.norm();
            }
        }
        if best_norm > 0.0 {
            let phase = col[best].conj() / best_norm;
            col.mapv_inplace(|z| z * phase);
        }
    }
}

/// Lowest `k` eigenpairs of a Hermitian matrix, gauge fixed.
pub fn eigensystem_of(h: &CsrMatrix, k: usize, opts: &EigenOptions) -> Result<Eigensystem, SpectrumError> {
    if k > h.dim() {
        return Err(SpectrumError::InsufficientLevels {
            requested: k,
            available: h.dim(),
        });
    }
    let pairs = lowest_eigenpairs(h, k, opts)?;
    let mut vectors = pairs.vectors;
    fix_gauge(&mut vectors);
    Ok(Eigensystem {
        values: pairs.values,
        vectors,
    })
}

pub fn eigensystem(system: &QuantizedSystem, k: usize, opts: &EigenOptions) -> Result<Eigensystem, SpectrumError> {
    eigensystem_of(&system.hamiltonian, k, opts)
}

/// Index ranges of eigenvalue clusters.
pub fn clusters(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] >= CLUSTER_GAP * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// `⟨i|Ô|j⟩` for all pairs of the eigensystem. Inside a degenerate cluster the
/// basis is first rotated to diagonalize `Ô`, then gauge fixed again.
pub fn matrix_elements_of(eig: &Eigensystem, op: &CsrMatrix) -> Result<Array2<C64>, SpectrumError> {
    let mut vectors = eig.vectors.clone();
    let mut touched = false;
    for range in clusters(&eig.values) {
        if range.len() < 2 {
            continue;
        }
        let block = vectors.slice(s![.., range.clone()]).to_owned();
        let ob = adjoint(&block).dot(&op.matmat(&block.view()));
        let herm = (&ob + &adjoint(&ob)).mapv(|z| z * 0.5);
        let rot = dense_eigh(herm)?;
        vectors.slice_mut(s![.., range]).assign(&block.dot(&rot.vectors));
        touched = true;
    }
    if touched {
        fix_gauge(&mut vectors);
    }
    Ok(adjoint(&vectors).dot(&op.matmat(&vectors.view())))
}

fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn matrix_elements(
    system: &QuantizedSystem,
    eig: &Eigensystem,
    label: &OperatorLabel,
) -> Result<Array2<C64>, SpectrumError> {
    matrix_elements_of(eig, system.operator(label)?)
}

/// Levels and matrix elements of one operator for the lowest states.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Eigenvalues in Hz, ascending.
    pub levels: Vec<f64>,
    pub operator: String,
    /// `elements[i][j] = ⟨i|Ô|j⟩` as `[re, im]`.
    #[serde(serialize_with = "serialize_elements")]
    pub elements: Array2<C64>,
}

fn serialize_elements<S: serde::Serializer>(a: &Array2<C64>, s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = a
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    rows.serialize(s)
}

impl SpectrumReport {
    pub fn new(levels: Vec<f64>, operator: &OperatorLabel, elements: Array2<C64>) -> Self {
        SpectrumReport {
            levels,
            operator: operator.to_string(),
            elements,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn level(&self, i: usize) -> Result<f64, SpectrumError> {
        self.levels.get(i).copied().ok_or(SpectrumError::LevelOutOfRange(i))
    }

    /// `ω_ij = ω_i − ω_j` in Hz.
    pub fn transition(&self, i: usize, j: usize) -> Result<f64, SpectrumError> {
        Ok(self.level(i)? - self.level(j)?)
    }

    /// `|⟨i|Ô|j⟩|`.
    pub fn element(&self, i: usize, j: usize) -> Result<f64, SpectrumError> {
        let n = self.elements.nrows();
        if i >= n || j >= n {
            return Err(SpectrumError::LevelOutOfRange(i.max(j)));
        }
        Ok(self.elements[[i, j]].norm())
    }

    /// `A_{ij,kl} = (ω_ij − ω_kl) / (ω_ij + ω_kl)`.
    pub fn anharmonicity(&self, (i, j): (usize, usize), (k, l): (usize, usize)) -> Result<f64, SpectrumError> {
        let a = self.transition(i, j)?;
        let b = self.transition(k, l)?;
        let den = a + b;
        if den.abs() <= DENOMINATOR_FLOOR {
            return Err(SpectrumError::DegenerateDenominator { value: den });
        }
        Ok((a - b) / den)
    }

    /// `R_{jk,lm} = (ω_j − ω_k) / (ω_l − ω_m)`; index pairs are ordered so the
    /// result is non-negative.
    pub fn ratio(&self, (j, k): (usize, usize), (l, m): (usize, usize)) -> Result<f64, SpectrumError> {
        let (j, k) = (j.max(k), j.min(k));
        let (l, m) = (l.max(m), l.min(m));
        let num = self.transition(j, k)?;
        let den = self.transition(l, m)?;
        if den.abs() <= DENOMINATOR_FLOOR {
            return Err(SpectrumError::DegenerateDenominator { value: den });
        }
        Ok(num / den)
    }

    /// Magnitudes `|⟨i|Ô|j⟩|` as a dense table.
    pub fn magnitude_table(&self) -> Array2<f64> {
        self.elements.mapv(|z| z.norm())
    }
}

/// Settings for the quantize-diagonalize pipeline.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumOptions {
    pub quantize: QuantizeOptions,
}

/// Quantizes a circuit, keeps its lowest `k` levels and the elements of
/// `label`.
pub fn analyze(
    circuit: &ChainCircuit,
    k: usize,
    label: &OperatorLabel,
    options: &SpectrumOptions,
) -> Result<SpectrumReport, SpectrumError> {
    let system = assemble_chain_hamiltonian(circuit, &options.quantize)?;
    report_for(&system, k, label, &options.quantize.eigen)
}

pub fn report_for(
    system: &QuantizedSystem,
    k: usize,
    label: &OperatorLabel,
    eigen: &EigenOptions,
) -> Result<SpectrumReport, SpectrumError> {
    let op = system.operator(label)?;
    let eig = eigensystem(system, k, eigen)?;
    let elements = matrix_elements_of(&eig, op)?;
    Ok(SpectrumReport::new(eig.values, label, elements))
}

/// Raises both cutoffs until the three lowest transitions stop moving. The
/// accepted truncation is the smaller one of the first pair that agrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationGate {
    /// Largest accepted change of `ω_n0`, `n = 1..3`, relative to
    /// `max(ω_30, frequency_floor)`.
    pub tolerance: f64,
    /// Hz.
    pub frequency_floor: f64,
    pub charge_step: usize,
    pub fock_step: usize,
    pub max_rounds: usize,
}

impl Default for TruncationGate {
    fn default() -> Self {
        TruncationGate {
            tolerance: 1e-3,
            frequency_floor: crate::units::GHZ,
            charge_step: 4,
            fock_step: 8,
            max_rounds: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateOutcome {
    pub charge: usize,
    pub fock: usize,
    /// Relative change between the accepted cutoffs and the next step.
    pub change: f64,
    pub converged: bool,
}

fn low_transitions(circuit: &ChainCircuit, options: &SpectrumOptions) -> Result<Vec<f64>, SpectrumError> {
    let system = assemble_chain_hamiltonian(circuit, &options.quantize)?;
    let k = 4.min(system.dim());
    let eig = eigensystem(&system, k, &options.quantize.eigen)?;
    Ok(eig.values.iter().map(|v| v - eig.values[0]).collect())
}

/// Starting from `options`, grows the truncation until the gate holds and
/// returns the options to use. Running out of rounds or hitting the
/// dimension cap is reported in the outcome, not as an error.
pub fn gate_truncation(
    circuit: &ChainCircuit,
    options: &SpectrumOptions,
    gate: &TruncationGate,
) -> Result<(SpectrumOptions, GateOutcome), SpectrumError> {
    let mut current = options.clone();
    let mut prev = low_transitions(circuit, &current)?;
    let mut change = f64::INFINITY;
    for _ in 0..gate.max_rounds {
        let mut next = current.clone();
        next.quantize.truncation.charge += gate.charge_step;
        next.quantize.truncation.fock += gate.fock_step;
        let levels = match low_transitions(circuit, &next) {
            Ok(l) => l,
            Err(SpectrumError::Quantize(QuantizeError::DimensionOverflow { .. })) => break,
            Err(e) => return Err(e),
        };
        let scale = levels
            .last()
            .copied()
            .unwrap_or(0.0)
            .abs()
            .max(gate.frequency_floor)
            .max(DENOMINATOR_FLOOR);
        change = levels
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs() / scale)
            .fold(0.0, f64::max);
        if change < gate.tolerance {
            break;
        }
        current = next;
        prev = levels;
    }
    let t = current.quantize.truncation;
    Ok((
        current,
        GateOutcome {
            charge: t.charge,
            fock: t.fock,
            change,
            converged: change < gate.tolerance,
        },
    ))
}
