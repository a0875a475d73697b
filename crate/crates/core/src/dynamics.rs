//! Driven evolution in the lowest `D` eigenstates.
//!
//! The drive enters as `h · Ω cos(2πνt) · Ô` with `Ω` and `ν` in Hz, so the
//! resonant two-level Rabi half-period is `t_eff = 1 / (2 Ω |O₁₀|)`.
//! Integration runs in the interaction picture of the undriven levels, in
//! nanoseconds and GHz; reported times are seconds.

use std::fmt::Write as _;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use ode_solvers::dop_shared::{IntegrationError, OutputType, System};
use ode_solvers::{DVector, Dopri5};
use serde::Serialize;
use thiserror::Error;

use crate::circuit::ChainCircuit;
use crate::quantize::{assemble_chain_hamiltonian, OperatorLabel};
use crate::spectrum::{analyze, eigensystem, matrix_elements_of, SpectrumError, SpectrumOptions};
use crate::units::GHZ;

/// Default number of eigenstates kept.
pub const DEFAULT_LEVELS: usize = 8;
/// Default `Ω` as a fraction of `ω10`.
pub const DEFAULT_DRIVE_FRACTION: f64 = 1.0 / 50.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("integration failed at t = {time:.6e} s: {reason}")]
    IntegrationFailure { time: f64, reason: String },
}

/// Drive frequency, either absolute or tied to a transition of the
/// projected spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveFrequency {
    Hz(f64),
    /// `ω_ij = E_i − E_j`.
    Transition(usize, usize),
}

impl DriveFrequency {
    pub const W10: DriveFrequency = DriveFrequency::Transition(1, 0);
    pub const W21: DriveFrequency = DriveFrequency::Transition(2, 1);
    pub const W20: DriveFrequency = DriveFrequency::Transition(2, 0);

    /// `|1⟩` when driving `ω20`, `|0⟩` otherwise.
    pub fn default_initial_state(&self) -> usize {
        match self {
            DriveFrequency::Transition(2, 0) | DriveFrequency::Transition(0, 2) => 1,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Duration {
    Seconds(f64),
    /// Multiples of `t_eff`.
    Effective(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveSpec {
    /// Hz; `None` means `ω10 / 50`.
    pub omega: Option<f64>,
    pub nu: DriveFrequency,
    #[serde(serialize_with = "label_string")]
    pub operator: OperatorLabel,
    /// `None` picks the state from `nu`.
    pub initial_state: Option<usize>,
    pub duration: Duration,
    /// Eigenstates kept, `D`.
    pub levels: usize,
    /// Points of the uniform output grid, both ends included.
    pub samples: usize,
    /// Relative and absolute local error tolerance.
    pub tolerance: f64,
}

fn label_string<S: serde::Serializer>(l: &OperatorLabel, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&l.to_string())
}

impl DriveSpec {
    pub fn resonant(nu: DriveFrequency) -> Self {
        DriveSpec {
            omega: None,
            nu,
            operator: OperatorLabel::default(),
            initial_state: None,
            duration: Duration::Effective(2.0),
            levels: DEFAULT_LEVELS,
            samples: 201,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: String| Err(DynamicsError::InvalidDrive(m));
        if let Some(o) = self.omega {
            if !(o >= 0.0 && o.is_finite()) {
                return bad(format!("omega must be >= 0, got {o}"));
            }
        }
        if self.levels < 2 {
            return bad(format!("need at least 2 levels, got {}", self.levels));
        }
        let init = self.initial_state.unwrap_or(self.nu.default_initial_state());
        if init >= self.levels {
            return bad(format!("initial state {init} is outside the {} kept levels", self.levels));
        }
        if let DriveFrequency::Transition(i, j) = self.nu {
            if i.max(j) >= self.levels {
                return bad(format!("transition ({i}, {j}) is outside the {} kept levels", self.levels));
            }
        }
        if let DriveFrequency::Hz(f) = self.nu {
            if !f.is_finite() {
                return bad(format!("drive frequency must be finite, got {f}"));
            }
        }
        let span = match self.duration {
            Duration::Seconds(t) | Duration::Effective(t) => t,
        };
        if !(span > 0.0 && span.is_finite()) {
            return bad(format!("duration must be > 0, got {span}"));
        }
        if self.samples < 2 {
            return bad("need at least 2 output samples".into());
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be > 0".into());
        }
        Ok(())
    }
}

/// Hamiltonian and drive operator restricted to the lowest eigenstates.
#[derive(Debug, Clone)]
pub struct ProjectedSystem {
    /// `E_i − E_0`, Hz.
    pub energies: Vec<f64>,
    /// `⟨i|Ô|j⟩`.
    pub operator: Array2<C64>,
}

impl ProjectedSystem {
    pub fn from_circuit(
        circuit: &ChainCircuit,
        label: &OperatorLabel,
        levels: usize,
        options: &SpectrumOptions,
    ) -> Result<Self, DynamicsError> {
        let system = assemble_chain_hamiltonian(circuit, &options.quantize).map_err(SpectrumError::from)?;
        let op = system.operator(label).map_err(SpectrumError::from)?;
        let eig = eigensystem(&system, levels, &options.quantize.eigen)?;
        let operator = matrix_elements_of(&eig, op)?;
        let e0 = eig.values[0];
        Ok(ProjectedSystem {
            energies: eig.values.iter().map(|e| e - e0).collect(),
            operator,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn frequency(&self, nu: DriveFrequency) -> f64 {
        match nu {
            DriveFrequency::Hz(f) => f,
            DriveFrequency::Transition(i, j) => self.energies[i] - self.energies[j],
        }
    }

    /// `1 / (2 Ω |O₁₀|)`, seconds.
    pub fn effective_time(&self, omega: f64) -> f64 {
        1.0 / (2.0 * omega * self.operator[[1, 0]].norm())
    }

    /// Integrates `ψ` from `t0` to each entry of `times` in turn (seconds,
    /// monotone in either direction) and returns the states there.
    pub fn propagate(
        &self,
        omega: f64,
        nu: f64,
        psi0: &[C64],
        t0: f64,
        times: &[f64],
        tolerance: f64,
    ) -> Result<Vec<Vec<C64>>, DynamicsError> {
        let d = self.dim();
        let rhs = Rhs {
            energies: self.energies.iter().map(|e| e / GHZ).collect(),
            operator: self.operator.clone(),
            omega: omega / GHZ,
            nu: nu / GHZ,
        };
        let mut t = t0 / NS;
        let c0: Vec<C64> = rhs.phases(t).iter().zip(psi0).map(|(p, z)| p * z).collect();
        let mut y = DVector::from_iterator(2 * d, c0.iter().map(|z| z.re).chain(c0.iter().map(|z| z.im)));
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            let target = target / NS;
            if target != t {
                let mut stepper = Dopri5::from_param(
                    rhs.clone(),
                    t,
                    target,
                    target - t,
                    y.clone(),
                    tolerance,
                    tolerance,
                    0.9,
                    0.04,
                    0.2,
                    10.0,
                    (target - t).abs(),
                    0.0,
                    u32::MAX,
                    u32::MAX,
                    OutputType::Sparse,
                );
                stepper.integrate().map_err(|e| failure(e, t))?;
                y = stepper.y_out().last().expect("solver keeps the endpoint").clone();
                t = target;
            }
            let p = rhs.phases(t);
            out.push((0..d).map(|i| p[i].conj() * C64::new(y[i], y[i + d])).collect());
        }
        Ok(out)
    }
}

const NS: f64 = 1e-9;

fn failure(e: IntegrationError, start: f64) -> DynamicsError {
    let time = match e {
        IntegrationError::MaxNumStepReached { x, .. }
        | IntegrationError::StepSizeUnderflow { x }
        | IntegrationError::StiffnessDetected { x } => x,
    };
    DynamicsError::IntegrationFailure {
        time: time * NS,
        reason: format!("{e} (segment started at {:.6e} s)", start * NS),
    }
}

/// Interaction picture of the undriven levels, t in ns:
/// `dc_i/dt = −2πi Ω cos(2πνt) Σ_j O_ij e^{2πi(E_i − E_j)t} c_j`
/// on `[Re c, Im c]`. No terms are dropped.
#[derive(Clone)]
struct Rhs {
    energies: Vec<f64>,
    operator: Array2<C64>,
    omega: f64,
    nu: f64,
}

impl Rhs {
    fn phases(&self, t: f64) -> Vec<C64> {
        self.energies.iter().map(|e| C64::from_polar(1.0, TWO_PI * e * t)).collect()
    }
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

impl System<f64, DVector<f64>> for Rhs {
    fn system(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let d = self.energies.len();
        let drive = self.omega * (TWO_PI * self.nu * t).cos();
        if drive == 0.0 {
            dy.fill(0.0);
            return;
        }
        let p = self.phases(t);
        // u_j = e^{−2πiE_j t} c_j, then (dc)_i = −2πi·drive·e^{2πiE_i t} (O u)_i.
        let u: Vec<C64> = (0..d).map(|j| p[j].conj() * C64::new(y[j], y[j + d])).collect();
        for i in 0..d {
            let ou: C64 = (0..d).map(|j| self.operator[[i, j]] * u[j]).sum();
            let v = C64::new(0.0, -TWO_PI * drive) * p[i] * ou;
            dy[i] = v.re;
            dy[i + d] = v.im;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsReport {
    pub drive: DriveSpec,
    /// Resolved drive strength and frequency, Hz.
    pub omega: f64,
    pub nu: f64,
    pub initial_state: usize,
    /// `E_i − E_0` of the kept states, Hz.
    pub energies: Vec<f64>,
    /// Seconds.
    pub t_eff: f64,
    /// Seconds.
    pub times: Vec<f64>,
    /// `populations[t][j] = |⟨Ψ_j|ψ(t)⟩|²`.
    pub populations: Vec<Vec<f64>>,
    /// `max_t |‖ψ(t)‖ − 1|`.
    pub norm_defect: f64,
}

impl DynamicsReport {
    pub fn population(&self, level: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[level]).collect()
    }

    /// `t P0 P1 …`, seconds.
    pub fn to_table(&self, separator: &str, comment: &str) -> String {
        let mut header = vec!["t".to_string()];
        header.extend((0..self.energies.len()).map(|j| format!("P{j}")));
        let mut out = format!("{comment}{}\n", header.join(separator));
        for (t, p) in self.times.iter().zip(&self.populations) {
            let mut cells = vec![format!("{t:.12e}")];
            cells.extend(p.iter().map(|v| format!("{v:.12e}")));
            writeln!(out, "{}", cells.join(separator)).unwrap();
        }
        out
    }
}

/// Evolves a projected system under `drive`.
pub fn evolve_projected(system: &ProjectedSystem, drive: &DriveSpec) -> Result<DynamicsReport, DynamicsError> {
    drive.validate()?;
    let d = system.dim();
    if d < drive.levels {
        return Err(DynamicsError::InvalidDrive(format!("only {d} levels available")));
    }
    let omega = drive.omega.unwrap_or(system.energies[1] * DEFAULT_DRIVE_FRACTION);
    let nu = system.frequency(drive.nu);
    let initial_state = drive.initial_state.unwrap_or(drive.nu.default_initial_state());
    let t_eff = system.effective_time(omega);
    let t_end = match drive.duration {
        Duration::Seconds(t) => t,
        Duration::Effective(n) => n * t_eff,
    };
    if !t_end.is_finite() {
        return Err(DynamicsError::InvalidDrive(format!(
            "duration is not finite (t_eff = {t_eff:e} s); give it in seconds"
        )));
    }
    let n = drive.samples;
    let times: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
    let mut psi0 = vec![C64::new(0.0, 0.0); d];
    psi0[initial_state] = C64::new(1.0, 0.0);
    let states = system.propagate(omega, nu, &psi0, 0.0, &times, drive.tolerance)?;
    let populations: Vec<Vec<f64>> = states.iter().map(|s| s.iter().map(|z| z.norm_sqr()).collect()).collect();
    let norm_defect = populations
        .iter()
        .map(|p| (p.iter().sum::<f64>().sqrt() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(DynamicsReport {
        drive: drive.clone(),
        omega,
        nu,
        initial_state,
        energies: system.energies.clone(),
        t_eff,
        times,
        populations,
        norm_defect,
    })
}

/// Projects `circuit` onto its lowest `drive.levels` states and evolves.
pub fn evolve_driven(
    circuit: &ChainCircuit,
    drive: &DriveSpec,
    options: &SpectrumOptions,
) -> Result<DynamicsReport, DynamicsError> {
    drive.validate()?;
    let system = ProjectedSystem::from_circuit(circuit, &drive.operator, drive.levels, options)?;
    evolve_projected(&system, drive)
}

/// `|⟨i|Ô|j⟩|` for the lowest `k` states.
pub fn dump_operator_matrix(
    circuit: &ChainCircuit,
    label: &OperatorLabel,
    k: usize,
    options: &SpectrumOptions,
) -> Result<Array2<f64>, SpectrumError> {
    Ok(analyze(circuit, k, label, options)?.magnitude_table())
}

/// Dense comma-separated matrix, one row per line.
pub fn matrix_csv(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}
