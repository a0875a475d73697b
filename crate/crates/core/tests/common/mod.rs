#![allow(dead_code)]

pub mod invariants;

use circuitforge::circuit::{enumerate_single_loop_topologies, Branch, BranchKind, ChainCircuit, LoopTopology};
use circuitforge::quantize::{assemble_chain_hamiltonian, Truncation};
use circuitforge::spectrum::{eigensystem, SpectrumOptions};
use proptest::prelude::*;

/// Raw draws for one branch: (C fF, L nH, CJ fF, EJ GHz).
pub type BranchDraw = (f64, f64, f64, f64);

pub fn branch_draw() -> impl Strategy<Value = BranchDraw> {
    (5.0..200.0f64, 5.0..200.0f64, 2.0..50.0f64, 1.0..30.0f64)
}

pub fn build_loop(index: usize, draws: &[BranchDraw; 4], phi: f64) -> LoopTopology {
    let topology = enumerate_single_loop_topologies()[index];
    let mut branches = [Branch::Absent; 4];
    for (b, (kind, d)) in topology.0.iter().zip(draws).enumerate() {
        branches[b] = match kind {
            BranchKind::Capacitor => Branch::Capacitor { capacitance: d.0 * 1e-15 },
            BranchKind::Inductor => Branch::Inductor { inductance: d.1 * 1e-9 },
            BranchKind::Junction => Branch::Junction {
                capacitance: d.2 * 1e-15,
                josephson_energy: d.3 * 1e9,
            },
            BranchKind::Absent => Branch::Absent,
        };
    }
    LoopTopology::new(branches, phi)
}

/// A random valid single loop with individually drawn component values.
pub fn valid_loop() -> impl Strategy<Value = LoopTopology> {
    (0..225usize, [branch_draw(), branch_draw(), branch_draw(), branch_draw()], -3.2..3.2f64)
        .prop_map(|(i, d, phi)| build_loop(i, &d, phi))
}

pub fn valid_circuit() -> impl Strategy<Value = ChainCircuit> {
    valid_loop().prop_map(ChainCircuit::single)
}

/// Small cutoffs keep every random loop below a few hundred states.
pub fn small_options(charge: usize, fock: usize) -> SpectrumOptions {
    let mut o = SpectrumOptions::default();
    o.quantize.truncation = Truncation { charge, fock };
    o
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn scale(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(1.0, f64::max)
}

/// Lowest four levels of `c` at the given cutoffs, Hz.
pub fn levels(c: &ChainCircuit, charge: usize, fock: usize) -> Vec<f64> {
    let opts = small_options(charge, fock);
    let sys = assemble_chain_hamiltonian(c, &opts.quantize).unwrap();
    let k = 4.min(sys.dim());
    eigensystem(&sys, k, &opts.quantize.eigen).unwrap().values
}
