//! Monte Carlo spread of the ladder ratios of the split junction under 5%
//! normal component noise.
//!
//! cargo run --release --example robustness

use circuitforge::analysis::{robustness_study, PerturbationSpec};
use circuitforge::objectives::Target;
use circuitforge::presets;
use circuitforge::spectrum::{gate_truncation, SpectrumOptions, TruncationGate};

fn main() {
    let circuit = presets::split_junction();
    let (opts, _) = gate_truncation(&circuit, &SpectrumOptions::default(), &TruncationGate::default()).expect("gate");
    for spec in [PerturbationSpec::all_parameters(0.05, 200), PerturbationSpec::single_capacitor(0.05, 200)] {
        let r = robustness_study(&circuit, &spec, Target::Ladder, 1, &opts, None).expect("study");
        println!("{:?} ({:?})", spec.mode, spec.distribution);
        print!("{}", r.summary_table("  ", "  "));
    }
}
