//! Reference circuits: the optimized ladder and lambda designs.
//!
//! Values are SI; `EJ` is `E_J / h` in hertz.

use crate::circuit::{Branch, ChainCircuit, LoopTopology};
use crate::units::{FEMTO, GHZ, NANO};

fn jj(cj_ff: f64, ej_ghz: f64) -> Branch {
    Branch::Junction {
        capacitance: cj_ff * FEMTO,
        josephson_energy: ej_ghz * GHZ,
    }
}

fn cap(c_ff: f64) -> Branch {
    Branch::Capacitor { capacitance: c_ff * FEMTO }
}

fn ind(l_nh: f64) -> Branch {
    Branch::Inductor { inductance: l_nh * NANO }
}

const NONE: Branch = Branch::Absent;

/// Two junctions closing one loop (ladder, two links).
pub fn split_junction() -> ChainCircuit {
    ChainCircuit::single(LoopTopology::new([jj(1.92, 1.0), NONE, NONE, jj(54.2, 9.127)], 0.0))
}

/// Two junctions and a small shunt capacitor (ladder, three links).
pub fn shunted_junction_pair() -> ChainCircuit {
    ChainCircuit::single(LoopTopology::new([jj(1500.0, 88.2), jj(3403.0, 100.0), NONE, cap(0.15)], 0.0))
}

/// Capacitor, junction and two inductors coupled to a lone junction
/// (ladder, two-loop array).
pub fn ladder_array() -> ChainCircuit {
    ChainCircuit::new(
        vec![
            LoopTopology::new([cap(101.0), jj(1590.0, 1.0), ind(18.25), ind(150.0)], 0.0),
            LoopTopology::new([NONE, NONE, jj(520.0, 59.45), NONE], 0.0),
        ],
        vec![803.0 * FEMTO],
    )
    .expect("preset is well formed")
}

/// Junction shunted by an inductor (lambda, two links).
pub fn fluxonium() -> ChainCircuit {
    ChainCircuit::single(LoopTopology::new([ind(150.0), NONE, NONE, jj(28.0, 64.21)], 0.0))
}

/// Junction, inductor and capacitor (lambda, three links).
pub fn capacitive_fluxonium() -> ChainCircuit {
    ChainCircuit::single(LoopTopology::new([jj(15.0, 100.0), ind(19.84), NONE, cap(45.0)], 0.0))
}

/// Two capacitively coupled junction-inductor-capacitor loops (lambda,
/// two-loop array).
pub fn lambda_array() -> ChainCircuit {
    ChainCircuit::new(
        vec![
            LoopTopology::new([jj(2.1, 100.0), ind(0.24), NONE, cap(0.15)], 0.0),
            LoopTopology::new([jj(356.0, 34.28), ind(113.0), NONE, cap(0.15)], 0.0),
        ],
        vec![173.0 * FEMTO],
    )
    .expect("preset is well formed")
}

/// A named reference circuit.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    /// Roman numeral used in tables and file names.
    pub numeral: &'static str,
    pub name: &'static str,
    pub build: fn() -> ChainCircuit,
}

pub const PRESETS: [Preset; 6] = [
    Preset {
        numeral: "I",
        name: "split-junction",
        build: split_junction,
    },
    Preset {
        numeral: "II",
        name: "shunted-junction-pair",
        build: shunted_junction_pair,
    },
    Preset {
        numeral: "III",
        name: "ladder-array",
        build: ladder_array,
    },
    Preset {
        numeral: "IV",
        name: "fluxonium",
        build: fluxonium,
    },
    Preset {
        numeral: "V",
        name: "capacitive-fluxonium",
        build: capacitive_fluxonium,
    },
    Preset {
        numeral: "VI",
        name: "lambda-array",
        build: lambda_array,
    },
];

pub fn by_name(name: &str) -> Option<ChainCircuit> {
    PRESETS
        .iter()
        .find(|p| p.name == name || p.numeral.eq_ignore_ascii_case(name))
        .map(|p| (p.build)())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for p in PRESETS {
            (p.build)().validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn lookup_by_numeral_and_name() {
        assert_eq!(by_name("vi"), Some(lambda_array()));
        assert_eq!(by_name("fluxonium"), Some(fluxonium()));
        assert_eq!(by_name("VII"), None);
    }
}
