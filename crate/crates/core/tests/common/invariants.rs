//! Invariant checks shared by the property suite and the acceptance harness.

use std::collections::HashMap;

use circuitforge::circuit::{enumerate_single_loop_topologies, ChainCircuit, FixedParameters, LoopTopology, Topology};
use circuitforge::ga::{evolve, Dedup, GaConfig, MutationMode, TopologySearch};
use circuitforge::quantize::{assemble_chain_hamiltonian, build_node_operators, Basis};
use num_complex::Complex64 as C64;
use ndarray::Array2;
use ndarray_linalg::Eig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{levels, max_abs_diff, scale, small_options};

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn max_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian(lp: &LoopTopology) -> Check {
    let c = ChainCircuit::single(lp.clone());
    let h = assemble_chain_hamiltonian(&c, &small_options(3, 5).quantize).map_err(|e| e.to_string())?.hamiltonian;
    let defect = h.hermiticity_defect();
    ensure(defect <= 1e-12 * h.max_abs().max(1.0), || format!("defect {defect:e}"))
}

/// Eigenvalues from a general (non-Hermitian) solver have no imaginary part.
pub fn real_spectrum(lp: &LoopTopology) -> Check {
    let c = ChainCircuit::single(lp.clone());
    let sys = assemble_chain_hamiltonian(&c, &small_options(2, 3).quantize).map_err(|e| e.to_string())?;
    let (vals, _) = sys.hamiltonian.to_dense().eig().map_err(|e| e.to_string())?;
    let s = vals.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let worst = vals.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-9 * s, || format!("imaginary part {worst:e}"))
}

pub fn flux_periodic(lp: &LoopTopology) -> Check {
    let a = levels(&ChainCircuit::single(lp.clone()), 3, 5);
    let shifted = lp.clone().with_external_phase(lp.external_phase + 2.0 * std::f64::consts::PI);
    let b = levels(&ChainCircuit::single(shifted), 3, 5);
    ensure(max_abs_diff(&a, &b) <= 1e-9 * scale(&a), || format!("{a:?} vs {b:?}"))
}

/// `[N, e^{iφ}] = e^{iφ}` in the charge basis.
pub fn charge_commutator(n_max: usize) -> Check {
    let ops = build_node_operators(Basis::Charge { n_max }, 1e9, 0.0).map_err(|e| e.to_string())?;
    let e = &ops.exp_i_phase;
    let c = ops.number.dot(e) - e.dot(&ops.number) - e;
    ensure(max_norm(&c) < 1e-14, || format!("residual {:e}", max_norm(&c)))
}

/// `[φ, N] = i` on the block `0..m_max` of the Fock basis.
pub fn fock_commutator(m_max: usize, ec: f64, el: f64) -> Check {
    let ops = build_node_operators(Basis::Fock { m_max }, ec, el).map_err(|e| e.to_string())?;
    let phi = ops.phase.as_ref().ok_or("Fock node without phase operator")?;
    let c = phi.dot(&ops.number) - ops.number.dot(phi);
    for i in 0..m_max {
        for j in 0..m_max {
            let expected = if i == j { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) };
            ensure((c[[i, j]] - expected).norm() < 1e-10, || format!("entry ({i},{j}) = {}", c[[i, j]]))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GaCase {
    pub table_seed: u64,
    pub config: GaConfig,
}

pub fn ga_case() -> impl Strategy<Value = GaCase> {
    (
        any::<u64>(),
        any::<u64>(),
        3usize..20,
        0.0..1.0f64,
        0.0..1.0f64,
        any::<bool>(),
        0usize..3,
        0usize..15,
    )
        .prop_map(|(table_seed, seed, population, frac, rate, single, dedup, epochs)| GaCase {
            table_seed,
            config: GaConfig {
                population,
                survivors: 1 + ((population - 2) as f64 * frac) as usize,
                mutation_rate: rate,
                mutation_mode: if single { MutationMode::SingleIndividual } else { MutationMode::PerIndividual },
                epochs,
                seed,
                dedup: [Dedup::Off, Dedup::Population, Dedup::History][dedup],
                ..GaConfig::default()
            },
        })
}

/// Two runs with one seed agree exactly; the best cost never increases and
/// every kept individual scores at most every discarded one.
pub fn ga_deterministic_and_elitist(case: &GaCase) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(case.table_seed);
    let costs: HashMap<Topology, f64> =
        enumerate_single_loop_topologies().into_iter().map(|t| (t, rng.gen::<f64>())).collect();
    let search = TopologySearch::new(FixedParameters::default(), 1);
    let cost = |g: &Vec<Topology>| costs[&g[0]];
    let a = evolve(&search, cost, &case.config).map_err(|e| e.to_string())?;
    let b = evolve(&search, cost, &case.config).map_err(|e| e.to_string())?;
    ensure(a.best == b.best && format!("{:?}", a.history) == format!("{:?}", b.history), || {
        "runs with one seed differ".into()
    })?;
    ensure(a.final_state.stream_position() == b.final_state.stream_position(), || {
        "random streams differ".into()
    })?;
    ensure(a.history.len() == case.config.epochs + 1, || format!("{} history rows", a.history.len()))?;
    for w in a.history.windows(2) {
        ensure(w[1].best <= w[0].best, || format!("best rose at epoch {}", w[1].epoch))?;
    }
    for r in &a.history[1..] {
        ensure(r.worst_survivor <= r.best_discarded, || format!("elitism broken at epoch {}", r.epoch))?;
    }
    ensure(costs[&a.best[0]] == a.best_cost, || "reported best cost is not the best genome's".into())
}
