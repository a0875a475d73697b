//! Genetic topology search for a ladder spectrum, then a short component
//! search on the winner.
//!
//! cargo run --release --example optimize

use circuitforge::circuit::FixedParameters;
use circuitforge::ga::{optimize_parameters, optimize_topology, Dedup, GaConfig, TopologySearch};
use circuitforge::objectives::{evaluate, CostSpec, Target};
use circuitforge::spectrum::SpectrumOptions;

fn main() {
    let spec = CostSpec::new(Target::Ladder);
    let opts = SpectrumOptions::default();
    let search = TopologySearch::new(FixedParameters::default(), 1);
    let config = GaConfig {
        epochs: 30,
        mutation_rate: 0.1,
        dedup: Dedup::History,
        seed: 7,
        ..GaConfig::default()
    };
    let run = optimize_topology(&spec, &search, &opts, &config).expect("topology search");
    for rec in run.history.iter().step_by(5) {
        println!("epoch {:>3}  best {:.5}  evaluations {}", rec.epoch, rec.best, rec.evaluations);
    }
    let template = search.circuit(&run.best);
    println!("best topology {:?}, cost {:.5}", run.best, run.best_cost);
    let run_cost = run.best_cost;

    // The component search draws fresh values inside the default bounds; it
    // does not start from the fixed values of the topology stage.
    let refine = GaConfig {
        epochs: 40,
        mutation_rate: 0.2,
        seed: 7,
        ..GaConfig::default()
    };
    let run = optimize_parameters(&spec, &template, &opts, &refine).expect("parameter search");
    let tuned = template.with_parameters(&run.best).expect("in bounds");
    let breakdown = evaluate(&tuned, &spec, &opts).expect("cost");
    println!(
        "component search from random in-bounds values: cost {:.5} (fixed values: {:.5})",
        breakdown.total, run_cost
    );
    println!("{tuned:#?}");
}
