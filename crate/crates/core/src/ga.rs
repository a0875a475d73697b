//! Genetic search over loop topologies at fixed component values, and over
//! packed component values at a fixed topology.
//!
//! Lower cost is fitter. One ChaCha stream seeded from [`GaConfig::seed`]
//! drives selection, crossover and mutation; fitness evaluation is pure and
//! runs in parallel, so results do not depend on the worker count.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::circuit::{
    enumerate_single_loop_topologies, BranchKind, ChainCircuit, FixedParameters, LoopTopology, ParameterBounds,
    ParameterSlot, Topology,
};
use crate::format::circuit_to_value;
use crate::objectives::{evaluate, CostSpec};
use crate::parallel;
use crate::spectrum::SpectrumOptions;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    Config(String),
    #[error("the starting circuit is invalid: {0}")]
    Circuit(String),
}

/// Which individuals the mutation step may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationMode {
    /// Every offspring mutates independently with probability `mutation_rate`.
    PerIndividual,
    /// With probability `mutation_rate`, one random offspring mutates.
    SingleIndividual,
}

/// Offspring rejection while refilling the population. A rejected child is
/// redrawn; after `crossover_retries` attempts the last draw is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dedup {
    Off,
    /// Reject children already in the new population.
    Population,
    /// Reject children already in the new population or evaluated in any
    /// earlier epoch.
    History,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaConfig {
    pub population: usize,
    pub survivors: usize,
    pub mutation_rate: f64,
    pub mutation_mode: MutationMode,
    pub epochs: usize,
    pub seed: u64,
    #[serde(skip)]
    pub bounds: ParameterBounds,
    pub dedup: Dedup,
    pub crossover_retries: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 16,
            survivors: 8,
            mutation_rate: 0.01,
            mutation_mode: MutationMode::PerIndividual,
            epochs: 50,
            seed: 0,
            bounds: ParameterBounds::default(),
            dedup: Dedup::Off,
            crossover_retries: 1000,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.survivors < 1 || self.survivors >= self.population {
            return Err(GaError::Config(format!(
                "need 1 <= survivors < population, got {} of {}",
                self.survivors, self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(GaError::Config(format!("mutation rate {} outside [0, 1]", self.mutation_rate)));
        }
        if !self.bounds.is_well_formed() {
            return Err(GaError::Config("parameter bounds need 0 < lower < upper".into()));
        }
        Ok(())
    }
}

/// Per-epoch bookkeeping. Entry 0 describes the initial population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Best cost seen so far.
    pub best: f64,
    /// Best cost in this epoch's evaluated population.
    pub population_best: f64,
    /// Largest cost among the individuals kept for the next epoch.
    pub worst_survivor: f64,
    /// Smallest cost among the discarded individuals.
    pub best_discarded: f64,
    /// Cost evaluations so far (cache hits excluded).
    pub evaluations: usize,
}

/// Population snapshot at an epoch boundary.
#[derive(Debug, Clone)]
pub struct GaState<G> {
    pub population: Vec<G>,
    pub costs: Vec<f64>,
    pub epoch: usize,
    pub best: G,
    pub best_cost: f64,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone)]
pub struct GaRun<G> {
    pub best: G,
    pub best_cost: f64,
    pub history: Vec<EpochRecord>,
    pub final_state: GaState<G>,
}

/// Variation operators for one genome type.
pub trait GeneticOps<G> {
    fn random(&self, rng: &mut ChaCha8Rng) -> G;
    fn crossover(&self, a: &G, b: &G, a_fitter: bool, rng: &mut ChaCha8Rng) -> G;
    fn mutate(&self, g: &G, rng: &mut ChaCha8Rng) -> G;
    /// Exact identity used by the fitness cache and deduplication.
    fn key(&self, g: &G) -> Vec<u64>;
}

fn sanitize(c: f64) -> f64 {
    if c.is_nan() {
        f64::INFINITY
    } else {
        c
    }
}

struct Evaluator<'a, G, F> {
    cost: &'a F,
    cache: HashMap<Vec<u64>, f64>,
    evaluations: usize,
    _genome: std::marker::PhantomData<G>,
}

impl<'a, G: Sync, F: Fn(&G) -> f64 + Sync + Send> Evaluator<'a, G, F> {
    fn run<O: GeneticOps<G>>(&mut self, ops: &O, genomes: &[G]) -> Vec<f64> {
        let keys: Vec<Vec<u64>> = genomes.iter().map(|g| ops.key(g)).collect();
        let mut todo: Vec<usize> = Vec::new();
        for (i, k) in keys.iter().enumerate() {
            if !self.cache.contains_key(k) && !todo.iter().any(|&j| keys[j] == *k) {
                todo.push(i);
            }
        }
        let cost = self.cost;
        let fresh = parallel::map(&todo, |&i| sanitize(cost(&genomes[i])));
        self.evaluations += todo.len();
        for (&i, c) in todo.iter().zip(fresh) {
            self.cache.insert(keys[i].clone(), c);
        }
        keys.iter().map(|k| self.cache[k]).collect()
    }
}

fn ranked(costs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    order
}

/// Runs the evolution loop: evaluate, keep the fittest, refill by crossover,
/// mutate the offspring.
pub fn evolve<G, O, F>(ops: &O, cost: F, config: &GaConfig) -> Result<GaRun<G>, GaError>
where
    G: Clone + Send + Sync,
    O: GeneticOps<G>,
    F: Fn(&G) -> f64 + Sync + Send,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eval = Evaluator {
        cost: &cost,
        cache: HashMap::new(),
        evaluations: 0,
        _genome: std::marker::PhantomData,
    };
    let mut population: Vec<G> = (0..config.population).map(|_| ops.random(&mut rng)).collect();
    let mut costs = eval.run(ops, &population);
    let first = ranked(&costs)[0];
    let mut best = population[first].clone();
    let mut best_cost = costs[first];
    let mut history = Vec::with_capacity(config.epochs + 1);
    history.push(EpochRecord {
        epoch: 0,
        best: best_cost,
        population_best: best_cost,
        worst_survivor: f64::NAN,
        best_discarded: f64::NAN,
        evaluations: eval.evaluations,
    });

    for epoch in 1..=config.epochs {
        let order = ranked(&costs);
        let (keep, drop) = order.split_at(config.survivors);
        let worst_survivor = costs[*keep.last().expect("at least one survivor")];
        let best_discarded = drop.first().map_or(f64::NAN, |&i| costs[i]);
        let mut next: Vec<G> = keep.iter().map(|&i| population[i].clone()).collect();
        let mut next_costs: Vec<f64> = keep.iter().map(|&i| costs[i]).collect();
        let mut keys: Vec<Vec<u64>> = next.iter().map(|g| ops.key(g)).collect();
        let first_offspring = next.len();
        while next.len() < config.population {
            let mut child = None;
            for _ in 0..config.crossover_retries.max(1) {
                let a = keep[rng.gen_range(0..keep.len())];
                let b = keep[rng.gen_range(0..keep.len())];
                let a_fitter = costs[a] <= costs[b];
                let mut c = ops.crossover(&population[a], &population[b], a_fitter, &mut rng);
                if config.mutation_mode == MutationMode::PerIndividual && rng.gen::<f64>() < config.mutation_rate {
                    c = ops.mutate(&c, &mut rng);
                }
                let duplicate = match config.dedup {
                    Dedup::Off => false,
                    Dedup::Population => keys.contains(&ops.key(&c)),
                    Dedup::History => {
                        let k = ops.key(&c);
                        keys.contains(&k) || eval.cache.contains_key(&k)
                    }
                };
                child = Some(c);
                if !duplicate {
                    break;
                }
            }
            let c = child.expect("at least one attempt");
            keys.push(ops.key(&c));
            next.push(c);
            next_costs.push(f64::NAN);
        }
        if config.mutation_mode == MutationMode::SingleIndividual
            && next.len() > first_offspring
            && rng.gen::<f64>() < config.mutation_rate
        {
            let i = rng.gen_range(first_offspring..next.len());
            next[i] = ops.mutate(&next[i], &mut rng);
        }
        let fresh = eval.run(ops, &next[first_offspring..]);
        next_costs[first_offspring..].copy_from_slice(&fresh);
        population = next;
        costs = next_costs;
        let top = ranked(&costs)[0];
        if costs[top] < best_cost {
            best_cost = costs[top];
            best = population[top].clone();
        }
        history.push(EpochRecord {
            epoch,
            best: best_cost,
            population_best: costs[top],
            worst_survivor,
            best_discarded,
            evaluations: eval.evaluations,
        });
    }
    Ok(GaRun {
        best: best.clone(),
        best_cost,
        history,
        final_state: GaState {
            population,
            costs,
            epoch: config.epochs,
            best,
            best_cost,
            rng,
        },
    })
}

impl<G> GaState<G> {
    /// Position of the evolution stream, for reproducibility checks.
    pub fn stream_position(&self) -> u128 {
        self.rng.get_word_pos()
    }
}

/// Offspring of two loop topologies cut at node 0, 1 or 2: branches up to the
/// cut come from one parent and the rest from the other. Invalid offspring
/// are redrawn up to `retries` times, then the fitter parent is cloned.
pub fn crossover_topology(
    a: &Topology,
    b: &Topology,
    a_fitter: bool,
    retries: usize,
    rng: &mut impl Rng,
) -> Topology {
    for _ in 0..retries {
        let cut = rng.gen_range(0..3usize);
        let (left, right) = if rng.gen::<bool>() { (a, b) } else { (b, a) };
        let mut kinds = right.0;
        kinds[..=cut].copy_from_slice(&left.0[..=cut]);
        let child = Topology(kinds);
        if child.is_valid() {
            return child;
        }
    }
    if a_fitter {
        *a
    } else {
        *b
    }
}

/// Redraws one branch kind so that the result stays valid. Returns the input
/// when no single-branch change is valid.
pub fn mutate_topology(t: &Topology, rng: &mut impl Rng) -> Topology {
    let mut branches = [0usize, 1, 2, 3];
    branches.shuffle(rng);
    for b in branches {
        let mut options: Vec<BranchKind> = BranchKind::ALL
            .iter()
            .copied()
            .filter(|k| *k != t.0[b])
            .filter(|k| {
                let mut kinds = t.0;
                kinds[b] = *k;
                Topology(kinds).is_valid()
            })
            .collect();
        if options.is_empty() {
            continue;
        }
        options.shuffle(rng);
        let mut kinds = t.0;
        kinds[b] = options[0];
        return Topology(kinds);
    }
    *t
}

/// Per-loop topologies of a chain; component values come from
/// [`FixedParameters`].
#[derive(Debug, Clone)]
pub struct TopologySearch {
    pub fixed: FixedParameters,
    pub loops: usize,
    /// Coupling capacitance between neighbouring loops, F.
    pub coupling: f64,
    pub external_phase: f64,
    pub retries: usize,
    valid: Vec<Topology>,
}

impl TopologySearch {
    pub fn new(fixed: FixedParameters, loops: usize) -> Self {
        TopologySearch {
            fixed,
            loops: loops.max(1),
            coupling: fixed.capacitance,
            external_phase: 0.0,
            retries: 1000,
            valid: enumerate_single_loop_topologies(),
        }
    }

    pub fn circuit(&self, genome: &[Topology]) -> ChainCircuit {
        ChainCircuit {
            loops: genome
                .iter()
                .map(|t| LoopTopology::from_topology(*t, &self.fixed, self.external_phase))
                .collect(),
            couplings: vec![self.coupling; genome.len().saturating_sub(1)],
        }
    }
}

impl GeneticOps<Vec<Topology>> for TopologySearch {
    fn random(&self, rng: &mut ChaCha8Rng) -> Vec<Topology> {
        (0..self.loops).map(|_| *self.valid.choose(rng).expect("225 topologies")).collect()
    }

    fn crossover(&self, a: &Vec<Topology>, b: &Vec<Topology>, a_fitter: bool, rng: &mut ChaCha8Rng) -> Vec<Topology> {
        a.iter()
            .zip(b)
            .map(|(x, y)| crossover_topology(x, y, a_fitter, self.retries, rng))
            .collect()
    }

    fn mutate(&self, g: &Vec<Topology>, rng: &mut ChaCha8Rng) -> Vec<Topology> {
        let mut out = g.clone();
        let l = rng.gen_range(0..out.len());
        out[l] = mutate_topology(&out[l], rng);
        out
    }

    fn key(&self, g: &Vec<Topology>) -> Vec<u64> {
        g.iter()
            .map(|t| t.0.iter().fold(0u64, |acc, k| acc * 4 + kind_code(*k)))
            .collect()
    }
}

fn kind_code(k: BranchKind) -> u64 {
    match k {
        BranchKind::Capacitor => 0,
        BranchKind::Inductor => 1,
        BranchKind::Junction => 2,
        BranchKind::Absent => 3,
    }
}

/// Packed component values of a fixed chain.
#[derive(Debug, Clone)]
pub struct ParameterSearch {
    pub template: ChainCircuit,
    pub slots: Vec<ParameterSlot>,
    pub bounds: Vec<(f64, f64)>,
}

impl ParameterSearch {
    pub fn new(template: ChainCircuit, bounds: &ParameterBounds) -> Self {
        let slots = template.parameter_slots();
        let bounds = slots.iter().map(|s| bounds.for_component(s.component())).collect();
        ParameterSearch {
            template,
            slots,
            bounds,
        }
    }

    pub fn circuit(&self, genome: &[f64]) -> ChainCircuit {
        self.template
            .with_parameters(genome)
            .expect("genome length matches the template")
    }

    pub fn in_bounds(&self, genome: &[f64]) -> bool {
        genome
            .iter()
            .zip(&self.bounds)
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

impl GeneticOps<Vec<f64>> for ParameterSearch {
    fn random(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()
    }

    /// Single split point; the head comes from `a` and the tail from `b`.
    fn crossover(&self, a: &Vec<f64>, b: &Vec<f64>, _a_fitter: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = a.len();
        if n < 2 {
            return if rng.gen::<bool>() { a.clone() } else { b.clone() };
        }
        let split = rng.gen_range(1..n);
        a[..split].iter().chain(&b[split..]).copied().collect()
    }

    fn mutate(&self, g: &Vec<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut out = g.clone();
        if out.is_empty() {
            return out;
        }
        let i = rng.gen_range(0..out.len());
        let (lo, hi) = self.bounds[i];
        out[i] = rng.gen_range(lo..=hi);
        out
    }

    fn key(&self, g: &Vec<f64>) -> Vec<u64> {
        g.iter().map(|v| v.to_bits()).collect()
    }
}

/// Topology evolution at fixed component values, scored by `spec`.
pub fn optimize_topology(
    spec: &CostSpec,
    search: &TopologySearch,
    options: &SpectrumOptions,
    config: &GaConfig,
) -> Result<GaRun<Vec<Topology>>, GaError> {
    evolve(
        search,
        |g: &Vec<Topology>| evaluate(&search.circuit(g), spec, options).map_or(f64::INFINITY, |c| c.total),
        config,
    )
}

/// Component-value evolution at the topology of `template`.
pub fn optimize_parameters(
    spec: &CostSpec,
    template: &ChainCircuit,
    options: &SpectrumOptions,
    config: &GaConfig,
) -> Result<GaRun<Vec<f64>>, GaError> {
    template.validate().map_err(|e| GaError::Circuit(e.to_string()))?;
    let search = ParameterSearch::new(template.clone(), &config.bounds);
    evolve(
        &search,
        |g: &Vec<f64>| evaluate(&search.circuit(g), spec, options).map_or(f64::INFINITY, |c| c.total),
        config,
    )
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Run manifest: the best circuit in circuit-file layout plus `cost`,
/// `config` and a per-epoch `history`.
pub fn run_manifest<G>(best: &ChainCircuit, run: &GaRun<G>, config: &GaConfig) -> Value {
    let mut v = circuit_to_value(best);
    let obj = v.as_object_mut().expect("circuit value is an object");
    obj.insert("cost".into(), finite_or_null(run.best_cost));
    obj.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    obj.insert(
        "history".into(),
        Value::Array(
            run.history
                .iter()
                .map(|r| {
                    json!({
                        "epoch": r.epoch,
                        "best": finite_or_null(r.best),
                        "population_best": finite_or_null(r.population_best),
                        "evaluations": r.evaluations,
                    })
                })
                .collect(),
        ),
    );
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use BranchKind::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn identical_parents_give_identical_offspring() {
        let t = Topology([Junction, Capacitor, Absent, Inductor]);
        let mut r = rng(1);
        for _ in 0..50 {
            assert_eq!(crossover_topology(&t, &t, true, 1000, &mut r), t);
        }
    }

    #[test]
    fn junction_and_capacitor_parents_can_mix() {
        let a = Topology([Junction; 4]);
        let b = Topology([Capacitor; 4]);
        let mut r = rng(2);
        let seen: Vec<Topology> = (0..200).map(|_| crossover_topology(&a, &b, true, 1000, &mut r)).collect();
        assert!(seen.contains(&Topology([Junction, Junction, Capacitor, Capacitor])));
        assert!(seen.iter().all(Topology::is_valid));
    }

    #[test]
    fn capacitor_only_parents_fall_back_to_fitter() {
        let a = Topology([Capacitor; 4]);
        let b = Topology([Capacitor, Capacitor, Absent, Capacitor]);
        let mut r = rng(3);
        assert_eq!(crossover_topology(&a, &b, false, 1000, &mut r), b);
    }

    #[test]
    fn topology_mutation_changes_one_branch() {
        let mut r = rng(4);
        for t in enumerate_single_loop_topologies() {
            let m = mutate_topology(&t, &mut r);
            let diff = t.0.iter().zip(m.0).filter(|(x, y)| **x != *y).count();
            assert_eq!(diff, 1, "{t} -> {m}");
            assert!(m.is_valid());
        }
    }

    fn quadratic_search() -> ParameterSearch {
        let template = ChainCircuit::single(LoopTopology::from_topology(
            Topology([Junction, Absent, Absent, Capacitor]),
            &FixedParameters::default(),
            0.0,
        ));
        ParameterSearch::new(template, &ParameterBounds::default())
    }

    #[test]
    fn zero_epochs_returns_best_initial() {
        let s = quadratic_search();
        let cfg = GaConfig {
            epochs: 0,
            seed: 5,
            ..GaConfig::default()
        };
        let run = evolve(&s, |g: &Vec<f64>| g[2], &cfg).unwrap();
        let min = run.final_state.costs.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(run.best_cost, min);
        assert_eq!(run.history.len(), 1);
    }

    #[test]
    fn population_size_is_constant_and_bounded() {
        let s = quadratic_search();
        let cfg = GaConfig {
            epochs: 20,
            seed: 6,
            mutation_rate: 0.5,
            ..GaConfig::default()
        };
        let run = evolve(&s, |g: &Vec<f64>| (g[2] / 1e9 - 40.0).powi(2), &cfg).unwrap();
        assert_eq!(run.final_state.population.len(), 16);
        assert!(run.final_state.population.iter().all(|g| s.in_bounds(g)));
    }

    #[test]
    fn no_variation_keeps_population() {
        struct Frozen;
        impl GeneticOps<Vec<f64>> for Frozen {
            fn random(&self, _: &mut ChaCha8Rng) -> Vec<f64> {
                vec![1.0, 2.0]
            }
            fn crossover(&self, a: &Vec<f64>, b: &Vec<f64>, _: bool, r: &mut ChaCha8Rng) -> Vec<f64> {
                let s = r.gen_range(1..2);
                a[..s].iter().chain(&b[s..]).copied().collect()
            }
            fn mutate(&self, g: &Vec<f64>, _: &mut ChaCha8Rng) -> Vec<f64> {
                vec![g[0] + 1.0, g[1]]
            }
            fn key(&self, g: &Vec<f64>) -> Vec<u64> {
                g.iter().map(|v| v.to_bits()).collect()
            }
        }
        let cfg = GaConfig {
            mutation_rate: 0.0,
            epochs: 10,
            ..GaConfig::default()
        };
        let run = evolve(&Frozen, |g: &Vec<f64>| g[0] + g[1], &cfg).unwrap();
        assert!(run.final_state.population.iter().all(|g| g == &vec![1.0, 2.0]));
    }

    #[test]
    fn rejects_bad_configs() {
        let s = quadratic_search();
        for cfg in [
            GaConfig {
                survivors: 16,
                ..GaConfig::default()
            },
            GaConfig {
                survivors: 0,
                ..GaConfig::default()
            },
            GaConfig {
                mutation_rate: 1.5,
                ..GaConfig::default()
            },
        ] {
            assert!(evolve(&s, |_: &Vec<f64>| 0.0, &cfg).is_err());
        }
    }
}
