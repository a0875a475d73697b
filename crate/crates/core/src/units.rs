//! Physical constants and unit helpers.
//!
//! Every energy in the crate is a cyclic frequency `E/h` in hertz. Component
//! values are SI (farads, henries). Josephson energies are stored as `E_J/h`
//! in hertz; [`JosephsonConvention`] converts tabulated values that were
//! quoted per reduced Planck constant.

use std::f64::consts::PI;

/// CODATA 2018 exact constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Elementary charge in coulombs.
    pub e: f64,
    /// Planck constant in joule-seconds.
    pub h: f64,
    /// Superconducting flux quantum `h / 2e` in webers.
    pub flux_quantum: f64,
}

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

pub const CODATA: PhysicalConstants = PhysicalConstants {
    e: ELEMENTARY_CHARGE,
    h: PLANCK,
    flux_quantum: FLUX_QUANTUM,
};

pub const GHZ: f64 = 1e9;
pub const FEMTO: f64 = 1e-15;
pub const PICO: f64 = 1e-12;
pub const NANO: f64 = 1e-9;

/// How a tabulated Josephson energy should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JosephsonConvention {
    /// The number is `E_J / h` in Hz. This is the storage convention.
    PerPlanck,
    /// The number is `E_J / ħ` in rad/s.
    PerReducedPlanck,
}

impl JosephsonConvention {
    /// Converts a tabulated value into the stored `E_J / h` in Hz.
    pub fn to_hertz(self, value: f64) -> f64 {
        match self {
            JosephsonConvention::PerPlanck => value,
            JosephsonConvention::PerReducedPlanck => value / (2.0 * PI),
        }
    }
}

/// The convention used for every stored Josephson energy.
pub const STORAGE_CONVENTION: JosephsonConvention = JosephsonConvention::PerPlanck;

/// `e² / (2C h)`, the charging energy of a capacitance in Hz.
pub fn charging_energy(capacitance: f64) -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * capacitance * PLANCK)
}

/// `Φ0² / (4π² L h)`, the inductive energy of an inductance in Hz.
pub fn inductive_energy(inductance: f64) -> f64 {
    FLUX_QUANTUM * FLUX_QUANTUM / (4.0 * PI * PI * inductance * PLANCK)
}

/// Charging-energy scale applied to an inverse capacitance entry, in Hz·F.
pub const CHARGING_SCALE: f64 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * PLANCK);

/// Inductive-energy scale applied to an inverse inductance entry, in Hz·H.
pub const INDUCTIVE_SCALE: f64 = FLUX_QUANTUM * FLUX_QUANTUM / (4.0 * PI * PI * PLANCK);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_quantum_value() {
        assert!((FLUX_QUANTUM - 2.067_833_848e-15).abs() < 1e-23);
    }

    #[test]
    fn lc_frequency_from_energies() {
        // sqrt(8 E_C E_L) is the plasma frequency 1/(2π sqrt(LC)).
        let (c, l) = (50e-15, 20e-9);
        let w = (8.0 * charging_energy(c) * inductive_energy(l)).sqrt();
        let expected = 1.0 / (2.0 * PI * (l * c).sqrt());
        assert!((w / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convention_conversion() {
        assert_eq!(JosephsonConvention::PerPlanck.to_hertz(5.0e9), 5.0e9);
        let hz = JosephsonConvention::PerReducedPlanck.to_hertz(2.0 * PI * 1e9);
        assert!((hz - 1e9).abs() < 1e-3);
    }
}
