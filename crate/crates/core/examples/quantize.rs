//! Reduces a fluxonium-like loop and prints the quadratic forms, the chosen
//! bases and the assembled dimension.
//!
//! cargo run --release --example quantize

use circuitforge::network::reduce_loop;
use circuitforge::presets;
use circuitforge::quantize::{assemble_chain_hamiltonian, QuantizeOptions};

fn main() {
    let circuit = presets::capacitive_fluxonium();
    let spec = reduce_loop(&circuit.loops[0]).expect("valid loop");
    println!("active nodes: {:?}", spec.nodes);
    println!("E_C (Hz):\n{:.4e}", spec.charging);
    println!("E_L (Hz):\n{:.4e}", spec.inductive);
    for j in &spec.junctions {
        println!("junction E_J = {:.4e} Hz, coefficients {:?}, offset {}", j.energy, j.coefficients, j.flux_offset);
    }

    let system = assemble_chain_hamiltonian(&circuit, &QuantizeOptions::default()).expect("quantizable");
    for site in &system.sites {
        println!("loop {} node {:?}: {:?}", site.loop_index, site.label, site.basis);
    }
    println!(
        "dimension {} (factors {:?}), {} stored entries, hermiticity defect {:.1e}",
        system.dim(),
        system.factor_dims,
        system.hamiltonian.nnz(),
        system.hamiltonian.hermiticity_defect()
    );
}
