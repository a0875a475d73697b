//! Acceptance criteria. Prints one PASS/FAIL line per criterion, followed by
//! indented measurements. Criteria listed in `KNOWN_RED` are expected to fail
//! with this implementation; they are still run and reported, and only an
//! unexpected failure makes the target exit non-zero.

mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration as WallTime, Instant};

use circuitforge::analysis::{flux_sweep, operating_flux, robustness_study, FluxGrid, PerturbationSpec};
use circuitforge::circuit::{enumerate_single_loop_topologies, Branch, BranchKind, ChainCircuit, FixedParameters, LoopTopology, Topology};
use circuitforge::dynamics::{evolve_driven, evolve_projected, DriveFrequency, DriveSpec, Duration, ProjectedSystem};
use circuitforge::ga::{optimize_topology, Dedup, GaConfig, TopologySearch};
use circuitforge::network::{eliminate_passive_nodes, node_network};
use circuitforge::objectives::{evaluate, CostSpec, Target};
use circuitforge::presets;
use circuitforge::quantize::{convergence_study, ConvergenceModel, OperatorLabel};
use circuitforge::spectrum::{analyze, gate_truncation, SpectrumOptions, SpectrumReport, TruncationGate};
use circuitforge::units::{JosephsonConvention, GHZ, STORAGE_CONVENTION};
use common::invariants::{self, Check};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestRunner};

/// Criteria this implementation does not meet; see the decisions ledger.
const KNOWN_RED: &[u32] = &[2, 4, 10];

// 1
const SPLIT_JUNCTION_W10_GHZ: f64 = 4.90;
const CONVENTION_REL_TOL: f64 = 0.10;
const C1_BUDGET: f64 = 1.0;

// 2
const TABLE1: [(&str, [f64; 4]); 3] = [
    ("I", [4.90, 4.47, 4.06, 13.43]),
    ("II", [3.53, 5.22, 7.04, 15.8]),
    ("III", [2.09, 2.44, 0.61, 5.15]),
];
const TABLE1_REL_TOL: f64 = 0.10;
const C2_BUDGET: f64 = 60.0;

// 3
const V_W21_GHZ: f64 = 5.07;
const V_EQUAL_REL_TOL: f64 = 0.01;
const IV_W21_GHZ: f64 = 18.27;
const IV_RATIO_MAX: f64 = 0.05;
const TABLE2_REL_TOL: f64 = 0.10;
const C3_BUDGET: f64 = 60.0;
/// One flux period, both ends included; the spectrum is 2π periodic.
const C3_GRID_STEPS: usize = 51;

// 4
const A21_10: [f64; 3] = [-0.046, 0.193, 0.077];
const A21_10_TOL: f64 = 0.03;
const A32_21_III: f64 = -0.60;
const A32_21_TOL: f64 = 0.06;

// 5
const ELIMINATION_REL_TOL: f64 = 1e-12;

// 6
const CONVERGENCE_C: f64 = 10e-15;
const CONVERGENCE_L: f64 = 645e-9;
/// `E_J / ħ = 1e10 rad/s`, stored as `E_J / h`.
const CONVERGENCE_EJ: f64 = 1e10 / (2.0 * PI);
const CONVERGENCE_M: usize = 12;
const CONVERGENCE_EPS: f64 = 1e-3;

// 7
const VALID_TOPOLOGIES: usize = 225;

// 8
const GA_RUNS: u64 = 20;
const GA_MIN_HITS: usize = 19;
const GA_POPULATION: usize = 16;
const GA_EPOCHS: usize = 50;
const GA_MUTATION_RATE: f64 = 0.1;
const GA_HIT_REL_TOL: f64 = 1e-12;
const C8_BUDGET: f64 = 600.0;

// 9
const SUPPRESSION_FRACTION: f64 = 0.05;
const C9_GRID_STEPS: usize = 101;
const OPERATING_GRID_STEPS: usize = 9;

// 10
const ROBUSTNESS_SAMPLES: usize = 100;
const ROBUSTNESS_SIGMA: f64 = 0.05;
const ROBUSTNESS_SEED: u64 = 0;
const VI_R21_20: (f64, f64) = (0.95, 1.05);
const III_R21_10: (f64, f64) = (0.9, 1.1);
const C10_BUDGET: f64 = 600.0;

// 11
const STATIONARITY_TOL: f64 = 1e-7;
const RABI_PEAK_MIN: f64 = 0.9;
/// "Near t_eff": the peak lies within this fraction of `t_eff`.
const RABI_PEAK_WINDOW: f64 = 0.1;
const RWA_DRIVE_FRACTION: f64 = 1.0 / 100.0;
const RWA_TOL: f64 = 0.02;
const LAMBDA_DRIVE_FRACTION: f64 = 1.0 / 50.0;
const LAMBDA_DURATION: f64 = 200e-9;
const LAMBDA_LOW_POPULATION_MIN: f64 = 0.99;

// 12
const INVARIANT_CASES: u32 = 200;
const C12_BUDGET: f64 = 300.0;

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines.push(format!("[{}] {line}", if ok { "ok" } else { "miss" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("      {line}"));
    }
}

fn gated(c: &ChainCircuit) -> SpectrumOptions {
    gate_truncation(c, &SpectrumOptions::default(), &TruncationGate::default())
        .expect("truncation gate")
        .0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ghz(r: &SpectrumReport, i: usize, j: usize) -> f64 {
    r.transition(i, j).unwrap() / GHZ
}

/// Gated four-level reports of the ladder circuits I, II and III.
fn ladder_reports() -> &'static [SpectrumReport; 3] {
    static REPORTS: OnceLock<[SpectrumReport; 3]> = OnceLock::new();
    REPORTS.get_or_init(|| {
        [presets::split_junction(), presets::shunted_junction_pair(), presets::ladder_array()].map(|c| {
            analyze(&c, 4, &OperatorLabel::default(), &gated(&c)).expect("ladder preset spectrum")
        })
    })
}

fn criterion_1() -> Verdict {
    let mut v = Verdict::new();
    let mut landing = Vec::new();
    for conv in [JosephsonConvention::PerPlanck, JosephsonConvention::PerReducedPlanck] {
        let table = presets::split_junction();
        let mut lp = table.loops[0].clone();
        for b in lp.branches.iter_mut() {
            if let Branch::Junction { josephson_energy, .. } = b {
                *josephson_energy = conv.to_hertz(*josephson_energy);
            }
        }
        let c = ChainCircuit::single(lp);
        let r = analyze(&c, 2, &OperatorLabel::default(), &gated(&c)).unwrap();
        let w10 = ghz(&r, 1, 0);
        let hit = rel(w10, SPLIT_JUNCTION_W10_GHZ) < CONVENTION_REL_TOL;
        v.note(format!("{conv:?}: omega_10 = {w10:.4} GHz{}", if hit { " (within 10%)" } else { "" }));
        if hit {
            landing.push(conv);
        }
    }
    v.check(landing.len() == 1, format!("{} convention(s) land within 10% of 4.90 GHz", landing.len()));
    v.check(
        landing.first() == Some(&STORAGE_CONVENTION),
        format!("stored convention is {STORAGE_CONVENTION:?}"),
    );
    v
}

fn criterion_2() -> Verdict {
    let mut v = Verdict::new();
    for ((name, want), r) in TABLE1.iter().zip(ladder_reports()) {
        let got = [ghz(r, 1, 0), ghz(r, 2, 1), ghz(r, 3, 2), ghz(r, 3, 0)];
        let ok = got.iter().zip(want).all(|(g, w)| rel(*g, *w) <= TABLE1_REL_TOL);
        v.check(
            ok,
            format!(
                "{name}: (w10, w21, w32, w30) = ({:.3}, {:.3}, {:.3}, {:.3}) GHz, expected {want:?}",
                got[0], got[1], got[2], got[3]
            ),
        );
    }
    v
}

/// Grid point minimizing `ω10 / ω21` over one sweep, truncation gated once
/// at the nominal flux.
fn min_ratio_point(c: &ChainCircuit) -> (f64, SpectrumReport) {
    let sweep = flux_sweep(
        c,
        FluxGrid::new(-PI, PI, C3_GRID_STEPS).unwrap(),
        4,
        &OperatorLabel::default(),
        &gated(c),
    );
    let (phi, r) = sweep
        .reports()
        .min_by(|a, b| {
            let ra = a.1.transition(1, 0).unwrap() / a.1.transition(2, 1).unwrap();
            let rb = b.1.transition(1, 0).unwrap() / b.1.transition(2, 1).unwrap();
            ra.total_cmp(&rb)
        })
        .expect("sweep produced no spectra");
    (phi, r.clone())
}

fn criterion_3() -> Verdict {
    let mut v = Verdict::new();
    let (phi, r) = min_ratio_point(&presets::capacitive_fluxonium());
    let (w21, w20) = (ghz(&r, 2, 1), ghz(&r, 2, 0));
    v.check(
        rel(w21, w20) < V_EQUAL_REL_TOL,
        format!("V at phi = {phi:.4}: w21 = {w21:.4}, w20 = {w20:.4} GHz agree within 1%"),
    );
    v.check(rel(w21, V_W21_GHZ) <= TABLE2_REL_TOL, format!("V: w21 = {w21:.4} GHz vs {V_W21_GHZ}"));
    let (phi, r) = min_ratio_point(&presets::fluxonium());
    let (w10, w21) = (ghz(&r, 1, 0), ghz(&r, 2, 1));
    v.check(
        w10 / w21 < IV_RATIO_MAX,
        format!("IV at phi = {phi:.4}: w10 / w21 = {:.2e}", w10 / w21),
    );
    v.check(rel(w21, IV_W21_GHZ) <= TABLE2_REL_TOL, format!("IV: w21 = {w21:.4} GHz vs {IV_W21_GHZ}"));
    v
}

fn criterion_4() -> Verdict {
    let mut v = Verdict::new();
    for ((name, want), r) in ["I", "II", "III"].iter().zip(A21_10).zip(ladder_reports()) {
        let a = r.anharmonicity((2, 1), (1, 0)).unwrap();
        v.check((a - want).abs() <= A21_10_TOL, format!("{name}: A21,10 = {a:.4}, expected {want}"));
    }
    let a = ladder_reports()[2].anharmonicity((3, 2), (2, 1)).unwrap();
    v.check(
        (a - A32_21_III).abs() <= A32_21_TOL,
        format!("III: A32,21 = {a:.4}, expected {A32_21_III}"),
    );
    v
}

fn criterion_5() -> Verdict {
    let mut v = Verdict::new();
    for (l1, l2, c1, c2) in [(12e-9, 7e-9, 30e-15, 45e-15), (1e-9, 200e-9, 5e-15, 1e-12), (645e-9, 645e-9, 10e-15, 10e-15)] {
        let lp = LoopTopology::new(
            [
                Branch::Inductor { inductance: l1 },
                Branch::Inductor { inductance: l2 },
                Branch::Capacitor { capacitance: c1 },
                Branch::Capacitor { capacitance: c2 },
            ],
            0.0,
        );
        let net = eliminate_passive_nodes(node_network(&lp).unwrap()).unwrap();
        let ok_dim = net.dim() == 1;
        let c_err = rel(net.capacitance[[0, 0]], c1 * c2 / (c1 + c2));
        let l_err = rel(1.0 / net.inverse_inductance[[0, 0]], l1 + l2);
        v.check(
            ok_dim && c_err <= ELIMINATION_REL_TOL && l_err <= ELIMINATION_REL_TOL,
            format!("L1 = {l1:e}, L2 = {l2:e}, C1 = {c1:e}, C2 = {c2:e}: C_eff error {c_err:.1e}, L_eff error {l_err:.1e}"),
        );
    }
    v
}

fn criterion_6() -> Verdict {
    use Branch::*;
    let c = Capacitor { capacitance: CONVERGENCE_C };
    let l = Inductor { inductance: CONVERGENCE_L };
    let j = Junction {
        capacitance: CONVERGENCE_C,
        josephson_energy: CONVERGENCE_EJ,
    };
    let configs = [
        ("a", [c, Absent, Absent, l]),
        ("b", [c, Absent, Absent, j]),
        ("c", [j, j, j, Absent]),
        ("d", [c, l, j, Absent]),
    ];
    let mut v = Verdict::new();
    for (name, branches) in configs {
        let lp = LoopTopology::new(branches, 0.0);
        let r = convergence_study(&lp, [CONVERGENCE_M], ConvergenceModel::Harmonic, CONVERGENCE_EPS).unwrap();
        let errs = r.errors_at(CONVERGENCE_M).unwrap();
        let worst = errs.iter().cloned().fold(0.0, f64::max);
        v.check(worst < CONVERGENCE_EPS, format!("({name}): max eps_r,n at m = 12 is {worst:.2e}"));
    }
    v
}

fn criterion_7() -> Verdict {
    let mut v = Verdict::new();
    let enumerated = enumerate_single_loop_topologies();
    // A Hamiltonian needs a junction, or both a capacitor and an inductor.
    let brute: Vec<Topology> = Topology::all()
        .filter(|t| {
            let has = |k| t.0.contains(&k);
            has(BranchKind::Junction) || (has(BranchKind::Capacitor) && has(BranchKind::Inductor))
        })
        .collect();
    v.check(Topology::all().count() == 256, format!("{} raw topologies", Topology::all().count()));
    v.check(enumerated.len() == VALID_TOPOLOGIES, format!("{} enumerated", enumerated.len()));
    v.check(enumerated == brute, format!("brute-force filter keeps {}, same set", brute.len()));
    v
}

fn ga_hits(config: &GaConfig, optimum: f64, spec: &CostSpec, opts: &SpectrumOptions) -> usize {
    let search = TopologySearch::new(FixedParameters::default(), 1);
    (0..GA_RUNS)
        .filter(|&seed| {
            let run = optimize_topology(spec, &search, opts, &GaConfig { seed, ..config.clone() }).unwrap();
            rel(run.best_cost, optimum) <= GA_HIT_REL_TOL
        })
        .count()
}

fn criterion_8() -> Verdict {
    let mut v = Verdict::new();
    let spec = CostSpec::new(Target::Ladder);
    let opts = SpectrumOptions::default();
    let fixed = FixedParameters::default();
    let (best_t, optimum) = enumerate_single_loop_topologies()
        .into_iter()
        .map(|t| {
            let c = ChainCircuit::single(LoopTopology::from_topology(t, &fixed, 0.0));
            (t, evaluate(&c, &spec, &opts).map_or(f64::INFINITY, |b| b.total))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    v.note(format!("exhaustive optimum {optimum:.12e} at {best_t:?}"));
    let config = GaConfig {
        population: GA_POPULATION,
        epochs: GA_EPOCHS,
        mutation_rate: GA_MUTATION_RATE,
        dedup: Dedup::History,
        ..GaConfig::default()
    };
    let hits = ga_hits(&config, optimum, &spec, &opts);
    v.check(
        hits >= GA_MIN_HITS,
        format!("{hits}/{GA_RUNS} runs (M = 16, 50 epochs, mutation 0.1, history dedup) reach the optimum"),
    );
    v
}

fn criterion_9() -> Verdict {
    let mut v = Verdict::new();
    let c = presets::split_junction();
    let sweep = flux_sweep(
        &c,
        FluxGrid::full_period(C9_GRID_STEPS).unwrap(),
        3,
        &OperatorLabel::default(),
        &gated(&c),
    );
    let n01_max = sweep.reports().map(|(_, r)| r.element(0, 1).unwrap()).fold(0.0, f64::max);
    let n02_max = sweep.reports().map(|(_, r)| r.element(0, 2).unwrap()).fold(0.0, f64::max);
    v.check(
        sweep.failures() == 0 && n02_max < SUPPRESSION_FRACTION * n01_max,
        format!("I: max |N02| = {n02_max:.3e}, max |N01| = {n01_max:.3e}, {} failed points", sweep.failures()),
    );

    let c = presets::lambda_array();
    let opts = gated(&c);
    let spec = CostSpec::new(Target::Lambda);
    let (phi, cost) = operating_flux(&c, &spec, FluxGrid::new(-PI, PI, OPERATING_GRID_STEPS).unwrap(), &opts)
        .expect("operating flux");
    let r = analyze(&c.with_external_phase(phi), 4, &OperatorLabel::default(), &opts).unwrap();
    let (n01, n12) = (r.element(0, 1).unwrap(), r.element(1, 2).unwrap());
    v.check(
        n01 < SUPPRESSION_FRACTION * n12,
        format!("VI at operating flux {phi:.4} (cost {cost:.3e}): |N01| = {n01:.3e}, |N12| = {n12:.3e}"),
    );
    v
}

fn criterion_10() -> Verdict {
    let mut v = Verdict::new();
    let spec = PerturbationSpec::all_parameters(ROBUSTNESS_SIGMA, ROBUSTNESS_SAMPLES);
    for (name, c, target, ratio, (lo, hi)) in [
        ("VI", presets::lambda_array(), Target::Lambda, "R21_20", VI_R21_20),
        ("III", presets::ladder_array(), Target::Ladder, "R21_10", III_R21_10),
    ] {
        let r = robustness_study(&c, &spec, target, ROBUSTNESS_SEED, &gated(&c), None).unwrap();
        let i = r.ratio_names.iter().position(|n| *n == ratio).unwrap();
        let st = r.stats[i];
        v.check(
            (lo..=hi).contains(&st.mean),
            format!(
                "{name}: mean {ratio} = {:.4} (sd {:.4}, nominal {:.4}, {} samples, {} failed), window [{lo}, {hi}]",
                st.mean, st.sd, r.nominal[i], st.count, r.failures
            ),
        );
    }
    v
}

fn criterion_11() -> Verdict {
    let mut v = Verdict::new();
    let c = presets::split_junction();
    let opts = gated(&c);

    let mut still = DriveSpec::resonant(DriveFrequency::W10);
    still.omega = Some(0.0);
    still.duration = Duration::Seconds(100e-9);
    still.initial_state = Some(1);
    let r = evolve_driven(&c, &still, &opts).unwrap();
    let drift = r.populations.iter().map(|p| (p[1] - 1.0).abs()).fold(0.0, f64::max);
    v.check(drift < STATIONARITY_TOL, format!("undriven |1>: max |P1 - 1| = {drift:.1e} over 100 ns"));

    let r = evolve_driven(&c, &DriveSpec::resonant(DriveFrequency::W10), &opts).unwrap();
    let p1 = r.population(1);
    let (k, peak) = p1.iter().cloned().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let t_peak = r.times[k] / r.t_eff;
    v.check(
        peak > RABI_PEAK_MIN && (t_peak - 1.0).abs() <= RABI_PEAK_WINDOW,
        format!("resonant drive, Omega = w10/50: peak P1 = {peak:.4} at {t_peak:.3} t_eff"),
    );

    let sys = ProjectedSystem::from_circuit(&c, &OperatorLabel::default(), 8, &opts).unwrap();
    let mut weak = DriveSpec::resonant(DriveFrequency::W10);
    weak.omega = Some(sys.energies[1] * RWA_DRIVE_FRACTION);
    let r = evolve_projected(&sys, &weak).unwrap();
    let coupling = r.omega * sys.operator[[1, 0]].norm();
    // Two-level rotating-wave result at zero detuning.
    let worst = r
        .times
        .iter()
        .zip(r.population(1))
        .map(|(t, p)| (p - (PI * coupling * t).sin().powi(2)).abs())
        .fold(0.0, f64::max);
    v.check(worst < RWA_TOL, format!("Omega = w10/100: max |P1 - P1_RWA| = {worst:.2e}"));

    let c = presets::lambda_array();
    let vi = ProjectedSystem::from_circuit(&c, &OperatorLabel::default(), 8, &gated(&c)).unwrap();
    let drive = DriveSpec {
        omega: Some(vi.energies[3] * LAMBDA_DRIVE_FRACTION),
        initial_state: Some(1),
        duration: Duration::Seconds(LAMBDA_DURATION),
        ..DriveSpec::resonant(DriveFrequency::W20)
    };
    let r = evolve_projected(&vi, &drive).unwrap();
    let low = r.populations.iter().map(|p| p[0] + p[1] + p[2]).fold(1.0, f64::min);
    v.check(
        low > LAMBDA_LOW_POPULATION_MIN,
        format!("VI driven at w20 from |1>, Omega = w30/50, 200 ns: min P0+P1+P2 = {low:.5}"),
    );
    v
}

fn run_invariant<S: Strategy>(v: &mut Verdict, name: &str, strategy: S, check: impl Fn(&S::Value) -> Check)
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases: INVARIANT_CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&strategy, |value| {
        check(&value).map_err(proptest::test_runner::TestCaseError::fail)
    });
    v.check(
        result.is_ok(),
        match result {
            Ok(()) => format!("{name}: {INVARIANT_CASES} random instances"),
            Err(e) => format!("{name}: {e}"),
        },
    );
}

fn criterion_12() -> Verdict {
    let mut v = Verdict::new();
    run_invariant(&mut v, "Hermiticity", common::valid_loop(), invariants::hermitian);
    run_invariant(&mut v, "real spectra", common::valid_loop(), invariants::real_spectrum);
    run_invariant(&mut v, "charge-basis commutator", 1usize..12, |n| invariants::charge_commutator(*n));
    run_invariant(
        &mut v,
        "Fock interior-block commutator",
        (2usize..30, 0.1..20.0f64, 0.1..20.0f64),
        |(m, ec, el)| invariants::fock_commutator(*m, ec * GHZ, el * GHZ),
    );
    run_invariant(&mut v, "2 pi flux periodicity", common::valid_loop(), invariants::flux_periodic);
    run_invariant(&mut v, "GA determinism and elitism", invariants::ga_case(), invariants::ga_deterministic_and_elitist);
    v
}

fn main() {
    let criteria: [(u32, &str, fn() -> Verdict, Option<f64>); 12] = [
        (1, "Josephson energy convention", criterion_1, Some(C1_BUDGET)),
        (2, "ladder table reproduction", criterion_2, Some(C2_BUDGET)),
        (3, "lambda table reproduction", criterion_3, Some(C3_BUDGET)),
        (4, "anharmonicities", criterion_4, None),
        (5, "passive-node elimination", criterion_5, None),
        (6, "truncation convergence", criterion_6, None),
        (7, "topology count", criterion_7, None),
        (8, "GA against exhaustive search", criterion_8, Some(C8_BUDGET)),
        (9, "selection-rule suppression", criterion_9, None),
        (10, "robustness statistics", criterion_10, Some(C10_BUDGET)),
        (11, "driven dynamics", criterion_11, None),
        (12, "invariant suites", criterion_12, Some(C12_BUDGET)),
    ];
    // Comma-separated criterion numbers; unset runs everything.
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (id, name, run, budget) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            println!("criterion {id:>2} SKIP: {name}");
            continue;
        }
        let start = Instant::now();
        let mut verdict = run();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            verdict.check(
                elapsed <= WallTime::from_secs_f64(limit),
                format!("runtime {:.1} s within {limit} s", elapsed.as_secs_f64()),
            );
        }
        let known = KNOWN_RED.contains(&id);
        let status = match (verdict.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {status}: {name} [{:.1} s]", elapsed.as_secs_f64());
        for line in &verdict.lines {
            println!("    {line}");
        }
        if verdict.pass {
            passed += 1;
        } else if !known {
            unexpected.push(id);
        }
    }
    println!("{passed} criteria pass; known failures {KNOWN_RED:?}; unexpected failures {unexpected:?}");
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
