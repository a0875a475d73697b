//! Resonant Rabi drive of the split junction, printed as populations of the
//! three lowest states against time in units of t_eff.
//!
//! cargo run --release --example dynamics

use circuitforge::dynamics::{evolve_driven, DriveFrequency, DriveSpec};
use circuitforge::presets;
use circuitforge::spectrum::{gate_truncation, SpectrumOptions, TruncationGate};

fn main() {
    let circuit = presets::split_junction();
    let (opts, _) = gate_truncation(&circuit, &SpectrumOptions::default(), &TruncationGate::default()).expect("gate");
    let mut drive = DriveSpec::resonant(DriveFrequency::W10);
    drive.samples = 41;
    let r = evolve_driven(&circuit, &drive, &opts).expect("evolution");
    println!("Omega = {:.4e} Hz, nu = {:.4e} Hz, t_eff = {:.3} ns", r.omega, r.nu, r.t_eff * 1e9);
    println!("{:>8} {:>8} {:>8} {:>8}", "t/t_eff", "P0", "P1", "P2");
    for (t, p) in r.times.iter().zip(&r.populations) {
        println!("{:>8.3} {:>8.5} {:>8.5} {:>8.5}", t / r.t_eff, p[0], p[1], p[2]);
    }
    println!("norm defect {:.1e}", r.norm_defect);
}
