//! Sweeps the external phase of the fluxonium and writes a plot-ready
//! table to stdout.
//!
//! cargo run --release --example flux_sweep > sweep.dat

use circuitforge::analysis::{flux_sweep, FluxGrid};
use circuitforge::presets;
use circuitforge::quantize::OperatorLabel;
use circuitforge::spectrum::{gate_truncation, SpectrumOptions, TruncationGate};

fn main() {
    let circuit = presets::fluxonium();
    let (opts, _) = gate_truncation(&circuit, &SpectrumOptions::default(), &TruncationGate::default()).expect("gate");
    let sweep = flux_sweep(&circuit, FluxGrid::full_period(81).unwrap(), 4, &OperatorLabel::default(), &opts);
    eprintln!("{} failed points", sweep.failures());
    print!("{}", sweep.to_table(" ", "# "));
}
