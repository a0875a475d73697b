//! Lowest levels, transitions and charge matrix elements of the reference
//! circuits at converged cutoffs. The single-loop lambda designs are biased
//! at half a flux quantum.
//!
//! cargo run --release --example spectrum

use circuitforge::presets::PRESETS;
use circuitforge::quantize::OperatorLabel;
use circuitforge::spectrum::{analyze, gate_truncation, SpectrumOptions, TruncationGate};

fn main() {
    for p in PRESETS.iter().filter(|p| p.numeral != "VI") {
        let mut circuit = (p.build)();
        if matches!(p.numeral, "IV" | "V") {
            circuit = circuit.with_external_phase(std::f64::consts::PI);
        }
        let (opts, gate) = gate_truncation(&circuit, &SpectrumOptions::default(), &TruncationGate::default())
            .expect("gate");
        let r = analyze(&circuit, 4, &OperatorLabel::default(), &opts).expect("spectrum");
        let w = |i, j| r.transition(i, j).unwrap() / 1e9;
        println!(
            "{:>3} {:<22} cutoffs ({}, {})  w10 {:.3}  w21 {:.3}  w32 {:.3} GHz  |N01| {:.3}  |N12| {:.3}  |N02| {:.3}",
            p.numeral,
            p.name,
            gate.charge,
            gate.fock,
            w(1, 0),
            w(2, 1),
            w(3, 2),
            r.element(0, 1).unwrap(),
            r.element(1, 2).unwrap(),
            r.element(0, 2).unwrap(),
        );
    }
}
