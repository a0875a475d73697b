//! Flux sweeps and Monte Carlo robustness of transition-frequency ratios.
//!
//! Truncations are never re-gated inside this module: the caller passes
//! converged [`SpectrumOptions`] and they are held fixed across every grid
//! point and sample.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{ChainCircuit, Component, ParameterSlot};
use crate::objectives::{cost, CostSpec, Target};
use crate::parallel;
use crate::quantize::OperatorLabel;
use crate::spectrum::{analyze, SpectrumError, SpectrumOptions, SpectrumReport};

/// Perturbed values never drop below this fraction of their nominal value.
pub const CLAMP_FRACTION: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("flux grid needs at least 2 points and min < max (got {steps} points on [{min}, {max}])")]
    InvalidGrid { min: f64, max: f64, steps: usize },
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("circuit has no capacitor to perturb")]
    NoCapacitor,
    #[error("nominal circuit failed: {0}")]
    Nominal(SpectrumError),
}

/// Uniform grid of external phases, radians, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl FluxGrid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self, AnalysisError> {
        if steps < 2 || !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(AnalysisError::InvalidGrid { min, max, steps });
        }
        Ok(FluxGrid { min, max, steps })
    }

    /// `(−2π, 2π)` with `steps` points.
    pub fn full_period(steps: usize) -> Result<Self, AnalysisError> {
        let two_pi = 2.0 * std::f64::consts::PI;
        FluxGrid::new(-two_pi, two_pi, steps)
    }

    pub fn points(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.max } else { self.min + h * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub phi: f64,
    pub report: Option<SpectrumReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub grid: FluxGrid,
    pub levels: usize,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.report.is_none()).count()
    }

    pub fn reports(&self) -> impl Iterator<Item = (f64, &SpectrumReport)> {
        self.points.iter().filter_map(|p| p.report.as_ref().map(|r| (p.phi, r)))
    }

    /// One row per grid point: `phi_x omega_10 omega_21 omega_32 N01 N12 N02`
    /// (Hz and dimensionless magnitudes). Missing values are `nan`.
    pub fn to_table(&self, separator: &str, comment: &str) -> String {
        let cols = ["phi_x", "omega_10", "omega_21", "omega_32", "N01", "N12", "N02"];
        let mut out = format!("{comment}{}\n", cols.join(separator));
        for p in &self.points {
            let mut row = vec![p.phi];
            match &p.report {
                Some(r) => {
                    for (i, j) in [(1, 0), (2, 1), (3, 2)] {
                        row.push(r.transition(i, j).unwrap_or(f64::NAN));
                    }
                    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                        row.push(r.element(i, j).unwrap_or(f64::NAN));
                    }
                }
                None => row.extend([f64::NAN; 6]),
            }
            let cells: Vec<String> = row
                .iter()
                .map(|v| if v.is_nan() { "nan".to_string() } else { format!("{v:.12e}") })
                .collect();
            writeln!(out, "{}", cells.join(separator)).unwrap();
        }
        out
    }
}

/// Re-assembles and diagonalizes `circuit` at every grid point with the same
/// truncation. Point failures are recorded and the sweep continues.
pub fn flux_sweep(
    circuit: &ChainCircuit,
    grid: FluxGrid,
    k: usize,
    label: &OperatorLabel,
    options: &SpectrumOptions,
) -> SweepResult {
    let points = parallel::map(&grid.points(), |&phi| {
        match analyze(&circuit.with_external_phase(phi), k, label, options) {
            Ok(r) => SweepPoint {
                phi,
                report: Some(r),
                error: None,
            },
            Err(e) => SweepPoint {
                phi,
                report: None,
                error: Some(e.to_string()),
            },
        }
    });
    SweepResult {
        grid,
        levels: k,
        points,
    }
}

/// Grid point with the lowest cost; failed points are skipped. `None` when
/// every point fails.
pub fn operating_flux(
    circuit: &ChainCircuit,
    spec: &CostSpec,
    grid: FluxGrid,
    options: &SpectrumOptions,
) -> Option<(f64, f64)> {
    let costs = parallel::map(&grid.points(), |&phi| {
        let report = analyze(&circuit.with_external_phase(phi), crate::objectives::COST_LEVELS, &spec.operator, options);
        let c = report.ok().and_then(|r| cost(&r, spec).ok()).map(|b| b.total);
        (phi, c.filter(|v| v.is_finite()))
    });
    costs
        .into_iter()
        .filter_map(|(phi, c)| c.map(|c| (phi, c)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    SingleCapacitor,
    AllParameters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    /// `nominal · (1 + U(−σ, σ))`.
    UniformPlusMinus,
    /// `Normal(nominal, σ · nominal)`.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationSpec {
    pub mode: PerturbationMode,
    /// Relative magnitude.
    pub sigma: f64,
    pub distribution: Distribution,
    pub samples: usize,
    /// Overrides the designated capacitor in single-capacitor mode.
    #[serde(skip)]
    pub designated: Option<ParameterSlot>,
}

impl PerturbationSpec {
    /// One capacitor, uniform `±σ`.
    pub fn single_capacitor(sigma: f64, samples: usize) -> Self {
        PerturbationSpec {
            mode: PerturbationMode::SingleCapacitor,
            sigma,
            distribution: Distribution::UniformPlusMinus,
            samples,
            designated: None,
        }
    }

    /// Every component, normal with relative deviation `σ`.
    pub fn all_parameters(sigma: f64, samples: usize) -> Self {
        PerturbationSpec {
            mode: PerturbationMode::AllParameters,
            sigma,
            distribution: Distribution::Normal,
            samples,
            designated: None,
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(AnalysisError::InvalidPerturbation(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if self.samples == 0 {
            return Err(AnalysisError::InvalidPerturbation("samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// The coupling capacitor of a chain (the first one), otherwise the largest
/// capacitor branch, otherwise the largest junction capacitance.
pub fn designated_capacitor(circuit: &ChainCircuit) -> Option<ParameterSlot> {
    if !circuit.couplings.is_empty() {
        return Some(ParameterSlot::Coupling(0));
    }
    let largest = |component: Component| {
        circuit
            .parameter_slots()
            .into_iter()
            .filter(|s| s.component() == component)
            .max_by(|a, b| circuit.get(*a).total_cmp(&circuit.get(*b)))
    };
    largest(Component::Capacitance).or_else(|| largest(Component::JunctionCapacitance))
}

fn draw(nominal: f64, spec: &PerturbationSpec, rng: &mut impl Rng) -> f64 {
    if spec.sigma == 0.0 {
        return nominal;
    }
    let v = match spec.distribution {
        Distribution::UniformPlusMinus => nominal * (1.0 + rng.gen_range(-spec.sigma..=spec.sigma)),
        Distribution::Normal => Normal::new(nominal, spec.sigma * nominal)
            .expect("finite deviation")
            .sample(rng),
    };
    v.max(CLAMP_FRACTION * nominal)
}

/// One random sample of `circuit` under `spec`. External phases and the
/// topology are left untouched.
pub fn perturb_parameters(
    circuit: &ChainCircuit,
    spec: &PerturbationSpec,
    rng: &mut impl Rng,
) -> Result<ChainCircuit, AnalysisError> {
    spec.validate()?;
    let mut out = circuit.clone();
    match spec.mode {
        PerturbationMode::SingleCapacitor => {
            let slot = spec
                .designated
                .or_else(|| designated_capacitor(circuit))
                .ok_or(AnalysisError::NoCapacitor)?;
            out.set(slot, draw(circuit.get(slot), spec, rng));
        }
        PerturbationMode::AllParameters => {
            for slot in circuit.parameter_slots() {
                out.set(slot, draw(circuit.get(slot), spec, rng));
            }
        }
    }
    Ok(out)
}

/// `(name, (j, k), (l, m))` for `R_{jk,lm}`.
pub type RatioDef = (&'static str, (usize, usize), (usize, usize));

pub fn ratio_definitions(target: Target) -> &'static [RatioDef] {
    match target {
        Target::Ladder => &[("R21_10", (2, 1), (1, 0)), ("R32_21", (3, 2), (2, 1))],
        Target::Lambda => &[("R21_20", (2, 1), (2, 0))],
    }
}

/// Transitions tracked by the sweep envelopes.
pub fn envelope_transitions(target: Target) -> &'static [(&'static str, (usize, usize))] {
    match target {
        Target::Ladder => &[("omega_10", (1, 0)), ("omega_21", (2, 1)), ("omega_32", (3, 2))],
        Target::Lambda => &[("omega_10", (1, 0)), ("omega_20", (2, 0)), ("omega_21", (2, 1))],
    }
}

fn ratios(report: &SpectrumReport, target: Target) -> Result<Vec<f64>, SpectrumError> {
    ratio_definitions(target)
        .iter()
        .map(|(_, a, b)| report.ratio(*a, *b))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRow {
    pub index: usize,
    /// Perturbed parameter vector, packing order of the nominal circuit.
    pub parameters: Vec<f64>,
    pub ratios: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioStats {
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); zero for a single sample.
    pub sd: f64,
    pub count: usize,
}

/// Per-transition min/mean/max across samples at every grid point, Hz.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub grid: FluxGrid,
    pub transitions: Vec<&'static str>,
    /// `[transition][point]`.
    pub min: Vec<Vec<f64>>,
    pub mean: Vec<Vec<f64>>,
    pub max: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    pub target: Target,
    pub perturbation: PerturbationSpec,
    pub seed: u64,
    pub ratio_names: Vec<&'static str>,
    pub nominal: Vec<f64>,
    pub samples: Vec<SampleRow>,
    pub stats: Vec<RatioStats>,
    pub failures: usize,
    pub envelope: Option<Envelope>,
}

impl RobustnessReport {
    /// One row per sample: `index` then each ratio; failed samples have
    /// `nan` ratios.
    pub fn to_table(&self, separator: &str, comment: &str) -> String {
        let mut header = vec!["index"];
        header.extend(&self.ratio_names);
        let mut out = format!("{comment}{}\n", header.join(separator));
        for s in &self.samples {
            let mut cells = vec![s.index.to_string()];
            match &s.ratios {
                Some(r) => cells.extend(r.iter().map(|v| format!("{v:.12e}"))),
                None => cells.extend(self.ratio_names.iter().map(|_| "nan".to_string())),
            }
            writeln!(out, "{}", cells.join(separator)).unwrap();
        }
        out
    }

    /// One row per ratio: `name nominal mean sd count failures`.
    pub fn summary_table(&self, separator: &str, comment: &str) -> String {
        let cols = ["ratio", "nominal", "mean", "sd", "count", "failures"];
        let mut out = format!("{comment}{}\n", cols.join(separator));
        for ((name, nominal), st) in self.ratio_names.iter().zip(&self.nominal).zip(&self.stats) {
            writeln!(
                out,
                "{}",
                [
                    name.to_string(),
                    format!("{nominal:.12e}"),
                    format!("{:.12e}", st.mean),
                    format!("{:.12e}", st.sd),
                    st.count.to_string(),
                    self.failures.to_string(),
                ]
                .join(separator)
            )
            .unwrap();
        }
        out
    }
}

pub fn mean_sd(values: &[f64]) -> RatioStats {
    let n = values.len();
    if n == 0 {
        return RatioStats {
            mean: f64::NAN,
            sd: f64::NAN,
            count: 0,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    RatioStats { mean, sd, count: n }
}

/// Draws all samples from one seeded stream, then evaluates them
/// concurrently. Ratios of failed samples are dropped from the statistics
/// and counted. With `envelope`, every successful sample is also swept.
pub fn robustness_study(
    circuit: &ChainCircuit,
    spec: &PerturbationSpec,
    target: Target,
    seed: u64,
    options: &SpectrumOptions,
    envelope: Option<FluxGrid>,
) -> Result<RobustnessReport, AnalysisError> {
    spec.validate()?;
    let label = OperatorLabel::default();
    let nominal_report = analyze(circuit, 4, &label, options).map_err(AnalysisError::Nominal)?;
    let nominal = ratios(&nominal_report, target).map_err(AnalysisError::Nominal)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let circuits: Vec<ChainCircuit> = (0..spec.samples)
        .map(|_| perturb_parameters(circuit, spec, &mut rng))
        .collect::<Result<_, _>>()?;

    let evaluated = parallel::map(&circuits, |c| analyze(c, 4, &label, options).and_then(|r| ratios(&r, target)));
    let samples: Vec<SampleRow> = evaluated
        .into_iter()
        .zip(&circuits)
        .enumerate()
        .map(|(index, (res, c))| {
            let (ratios, error) = match res {
                Ok(r) if r.iter().all(|v| v.is_finite()) => (Some(r), None),
                Ok(_) => (None, Some("non-finite ratio".to_string())),
                Err(e) => (None, Some(e.to_string())),
            };
            SampleRow {
                index,
                parameters: c.pack_parameters(),
                ratios,
                error,
            }
        })
        .collect();

    let names: Vec<&'static str> = ratio_definitions(target).iter().map(|d| d.0).collect();
    let stats = (0..names.len())
        .map(|i| {
            let v: Vec<f64> = samples.iter().filter_map(|s| s.ratios.as_ref().map(|r| r[i])).collect();
            mean_sd(&v)
        })
        .collect();
    let failures = samples.iter().filter(|s| s.ratios.is_none()).count();

    let envelope = envelope.map(|grid| {
        let ok: Vec<&ChainCircuit> = samples
            .iter()
            .zip(&circuits)
            .filter(|(s, _)| s.ratios.is_some())
            .map(|(_, c)| c)
            .collect();
        sweep_envelope(&ok, grid, target, options)
    });

    Ok(RobustnessReport {
        target,
        perturbation: *spec,
        seed,
        ratio_names: names,
        nominal,
        samples,
        stats,
        failures,
        envelope,
    })
}

fn sweep_envelope(circuits: &[&ChainCircuit], grid: FluxGrid, target: Target, options: &SpectrumOptions) -> Envelope {
    let tracked = envelope_transitions(target);
    let n = grid.steps;
    let mut min = vec![vec![f64::INFINITY; n]; tracked.len()];
    let mut max = vec![vec![f64::NEG_INFINITY; n]; tracked.len()];
    let mut sum = vec![vec![0.0; n]; tracked.len()];
    let mut count = vec![vec![0usize; n]; tracked.len()];
    for c in circuits {
        let sweep = flux_sweep(c, grid, 4, &OperatorLabel::default(), options);
        for (p, point) in sweep.points.iter().enumerate() {
            let Some(r) = &point.report else { continue };
            for (t, (_, (i, j))) in tracked.iter().enumerate() {
                if let Ok(w) = r.transition(*i, *j) {
                    min[t][p] = min[t][p].min(w);
                    max[t][p] = max[t][p].max(w);
                    sum[t][p] += w;
                    count[t][p] += 1;
                }
            }
        }
    }
    let mean = sum
        .iter()
        .zip(&count)
        .map(|(s, c)| s.iter().zip(c).map(|(s, &c)| if c > 0 { s / c as f64 } else { f64::NAN }).collect())
        .collect();
    let fix = |v: &mut Vec<Vec<f64>>| {
        for x in v.iter_mut().flatten() {
            if !x.is_finite() {
                *x = f64::NAN;
            }
        }
    };
    fix(&mut min);
    fix(&mut max);
    Envelope {
        grid,
        transitions: tracked.iter().map(|t| t.0).collect(),
        min,
        mean,
        max,
    }
}
