//! Ladder (Ξ) and lambda (Λ) cost functions.
//!
//! Frequency distances are divided by [`CostSpec::frequency_unit`] before
//! squaring so they are commensurate with the dimensionless matrix-element
//! distances.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::ChainCircuit;
use crate::quantize::OperatorLabel;
use crate::spectrum::{analyze, SpectrumError, SpectrumOptions, SpectrumReport};
use crate::units::GHZ;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("cost needs {needed} levels, report has {available}")]
    InsufficientLevels { needed: usize, available: usize },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Ladder,
    Lambda,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Ladder => "ladder",
            Target::Lambda => "lambda",
        })
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ladder" => Ok(Target::Ladder),
            "lambda" => Ok(Target::Lambda),
            other => Err(format!("unknown target {other:?} (expected ladder or lambda)")),
        }
    }
}

/// How matrix elements are scaled before the `|·| = 1` targets apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementScale {
    /// Divide by the largest `|⟨i|Ô|j⟩|`, `i ≠ j`, among the lowest three
    /// levels.
    MaxTransition,
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub target: Target,
    /// Detuning floor Γ, Hz.
    pub gamma: f64,
    /// Spectral cut-off ω_M, Hz.
    pub omega_max: f64,
    pub operator: OperatorLabel,
    pub element_scale: ElementScale,
    /// Frequencies are divided by this before squaring, Hz.
    pub frequency_unit: f64,
    /// Use `max(0, ·)` for the ladder detuning distances d₂ and d₃.
    pub clamp_detuning: bool,
}

impl CostSpec {
    pub fn new(target: Target) -> Self {
        CostSpec {
            target,
            gamma: GHZ,
            omega_max: 16.0 * GHZ,
            operator: OperatorLabel::default(),
            element_scale: ElementScale::MaxTransition,
            frequency_unit: GHZ,
            clamp_detuning: false,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        self.gamma >= 0.0 && self.omega_max > 0.0 && self.frequency_unit > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub target: Target,
    /// d₁..d₇ (ladder) or d′₁..d′₆ (lambda).
    pub distances: Vec<f64>,
    pub total: f64,
}

/// Levels required by either cost.
pub const COST_LEVELS: usize = 4;

fn check(report: &SpectrumReport) -> Result<(), CostError> {
    if report.len() < COST_LEVELS || report.elements.nrows() < 3 {
        return Err(CostError::InsufficientLevels {
            needed: COST_LEVELS,
            available: report.len(),
        });
    }
    Ok(())
}

fn element_scale(report: &SpectrumReport, spec: &CostSpec) -> f64 {
    match spec.element_scale {
        ElementScale::Raw => 1.0,
        ElementScale::MaxTransition => {
            let mut m = 0.0f64;
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        m = m.max(report.elements[[i, j]].norm());
                    }
                }
            }
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    }
}

pub fn ladder_cost(report: &SpectrumReport, spec: &CostSpec) -> Result<CostBreakdown, CostError> {
    check(report)?;
    let u = spec.frequency_unit;
    let w = |i, j| report.transition(i, j);
    let (w10, w21, w32, w30) = (w(1, 0)?, w(2, 1)?, w(3, 2)?, w(3, 0)?);
    let s = element_scale(report, spec);
    let e = |i, j| report.element(i, j).map(|x| x / s);
    let detune = |x: f64| {
        let d = (x.abs() - spec.gamma) / u;
        if spec.clamp_detuning {
            d.max(0.0)
        } else {
            d
        }
    };
    let d = vec![
        (w21 - w10).abs() / u,
        detune(w32 - w21),
        detune(w32 - w10),
        (w30 - spec.omega_max).abs() / u,
        (e(0, 1)? - 1.0).abs(),
        (e(1, 2)? - 1.0).abs(),
        e(0, 2)?,
    ];
    let total = d.iter().map(|x| x * x).sum::<f64>() / 49.0;
    Ok(CostBreakdown {
        target: Target::Ladder,
        distances: d,
        total,
    })
}

pub fn lambda_cost(report: &SpectrumReport, spec: &CostSpec) -> Result<CostBreakdown, CostError> {
    check(report)?;
    let u = spec.frequency_unit;
    let w = |i, j| report.transition(i, j);
    let s = element_scale(report, spec);
    let e = |i, j| report.element(i, j).map(|x| x / s);
    let d = vec![
        w(1, 0)?.abs() / u,
        (w(2, 0)? - w(2, 1)?).abs() / u,
        (w(3, 0)? - spec.omega_max).abs() / u,
        e(0, 1)?,
        (e(0, 2)? - 1.0).abs(),
        (e(1, 2)? - 1.0).abs(),
    ];
    let total = d.iter().map(|x| x * x).sum::<f64>() / 36.0;
    Ok(CostBreakdown {
        target: Target::Lambda,
        distances: d,
        total,
    })
}

pub fn cost(report: &SpectrumReport, spec: &CostSpec) -> Result<CostBreakdown, CostError> {
    match spec.target {
        Target::Ladder => ladder_cost(report, spec),
        Target::Lambda => lambda_cost(report, spec),
    }
}

/// Quantizes, diagonalizes and scores a circuit.
pub fn evaluate(circuit: &ChainCircuit, spec: &CostSpec, options: &SpectrumOptions) -> Result<CostBreakdown, CostError> {
    let report = analyze(circuit, COST_LEVELS, &spec.operator, options)?;
    cost(&report, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use num_complex::Complex64 as C64;

    fn report(levels: [f64; 4], e01: f64, e12: f64, e02: f64) -> SpectrumReport {
        let mut el = Array2::zeros((4, 4));
        for (i, j, v) in [(0, 1, e01), (1, 2, e12), (0, 2, e02)] {
            el[[i, j]] = C64::new(v, 0.0);
            el[[j, i]] = C64::new(v, 0.0);
        }
        SpectrumReport::new(levels.iter().map(|x| x * GHZ).collect(), &OperatorLabel::default(), el)
    }

    #[test]
    fn exact_ladder_target_costs_nothing() {
        // ω10 = ω21 = 5, ω32 = 6 (detuned by Γ = 1 from both), ω30 = 16.
        let r = report([0.0, 5.0, 10.0, 16.0], 1.0, 1.0, 0.0);
        let c = ladder_cost(&r, &CostSpec::new(Target::Ladder)).unwrap();
        assert!(c.total.abs() < 1e-24, "{c:?}");
    }

    #[test]
    fn harmonic_ladder_detuning_terms() {
        let r = report([0.0, 5.0, 10.0, 15.0], 1.0, 1.0, 0.0);
        let mut spec = CostSpec::new(Target::Ladder);
        spec.omega_max = 15.0 * GHZ;
        let c = ladder_cost(&r, &spec).unwrap();
        assert_eq!(c.distances[1], -1.0);
        assert_eq!(c.distances[2], -1.0);
        assert!((c.total - 2.0 / 49.0).abs() < 1e-15);
        spec.clamp_detuning = true;
        assert_eq!(ladder_cost(&r, &spec).unwrap().total, 0.0);
    }

    #[test]
    fn exact_lambda_target_costs_nothing() {
        let r = report([0.0, 0.0, 7.0, 16.0], 0.0, 1.0, 1.0);
        let c = lambda_cost(&r, &CostSpec::new(Target::Lambda)).unwrap();
        assert_eq!(c.total, 0.0);
    }

    #[test]
    fn large_forbidden_element_dominates_lambda_cost() {
        let r = report([0.0, 0.0, 7.0, 16.0], 5.0, 1.0, 1.0);
        let mut spec = CostSpec::new(Target::Lambda);
        spec.element_scale = ElementScale::Raw;
        let c = lambda_cost(&r, &spec).unwrap();
        let biggest = c
            .distances
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(biggest, 3);
    }

    #[test]
    fn too_few_levels() {
        let r = SpectrumReport::new(vec![0.0, 1.0, 2.0], &OperatorLabel::default(), Array2::zeros((3, 3)));
        assert!(matches!(
            ladder_cost(&r, &CostSpec::new(Target::Ladder)),
            Err(CostError::InsufficientLevels { .. })
        ));
    }
}
