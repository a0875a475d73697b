//! Relative level change against the per-mode excitation cutoff for a
//! junction-inductor-capacitor loop.
//!
//! cargo run --release --example convergence

use circuitforge::circuit::{Branch, LoopTopology};
use circuitforge::quantize::{convergence_study, ConvergenceModel};

fn main() {
    let lp = LoopTopology::new(
        [
            Branch::Capacitor { capacitance: 10e-15 },
            Branch::Inductor { inductance: 645e-9 },
            Branch::Junction {
                capacitance: 10e-15,
                josephson_energy: 1.6e9,
            },
            Branch::Absent,
        ],
        0.0,
    );
    for model in [ConvergenceModel::Harmonic, ConvergenceModel::Full] {
        let r = convergence_study(&lp, 2..=16, model, 1e-3).expect("study");
        println!("{model:?}: converged at m = {:?}", r.converged_at);
        for (m, errs) in r.cutoffs.iter().zip(&r.errors) {
            let cells: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
            println!("  m = {m:>2}  {}", cells.join("  "));
        }
    }
}
