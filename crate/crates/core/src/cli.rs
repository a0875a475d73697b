//! Command-line front end.
//!
//! Every command writes `<command>.json` (config echo plus result) and
//! `<command>.txt` (the printed summary) into `--out`; unless `--no-plots`
//! is given it also writes whitespace-separated `.dat` files with `#`
//! headers. Data files are SI, summaries are in GHz.
//!
//! Exit codes: 0 success, 1 domain or I/O error, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{flux_sweep, robustness_study, Distribution, FluxGrid, PerturbationMode, PerturbationSpec};
use crate::circuit::{ChainCircuit, FixedParameters};
use crate::dynamics::{dump_operator_matrix, evolve_driven, matrix_csv, DriveFrequency, DriveSpec, Duration};
use crate::format::parse_circuit;
use crate::ga::{optimize_parameters, optimize_topology, run_manifest, Dedup, GaConfig, MutationMode, TopologySearch};
use crate::network::reduce_loop;
use crate::objectives::{evaluate, CostSpec, Target};
use crate::quantize::{assemble_chain_hamiltonian, convergence_study, ConvergenceModel, OperatorLabel, Truncation};
use crate::spectrum::{analyze, gate_truncation, GateOutcome, SpectrumOptions, TruncationGate};
use crate::units::GHZ;

#[derive(Parser, Debug, Serialize)]
#[command(name = "circuitforge", version, about = "Quantize, analyze and evolve superconducting circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Skip the gnuplot data files.
    #[arg(long, global = true)]
    pub no_plots: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Reduce and assemble a circuit; report bases and dimensions.
    Quantize {
        #[command(flatten)]
        input: CircuitArgs,
    },
    /// Lowest levels and operator matrix elements.
    Spectrum {
        #[command(flatten)]
        input: CircuitArgs,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Overrides every loop's external phase, rad.
        #[arg(long)]
        flux: Option<f64>,
    },
    /// Levels and elements over a grid of external phases.
    Sweep {
        #[command(flatten)]
        input: CircuitArgs,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Genetic search over topologies, or over component values when
    /// `--circuit` is given.
    Optimize {
        #[arg(long, value_enum)]
        target: TargetArg,
        /// Template circuit for a component-value search.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Loops per chain in a topology search.
        #[arg(long, default_value_t = 1)]
        loops: usize,
        #[command(flatten)]
        ga: GaArgs,
        #[command(flatten)]
        cost: CostArgs,
        #[command(flatten)]
        truncation: TruncationArgs,
    },
    /// Driven evolution in the lowest eigenstates.
    Dynamics {
        #[command(flatten)]
        input: CircuitArgs,
        /// Drive strength, Hz (default ω10/50).
        #[arg(long)]
        omega: Option<f64>,
        /// Drive frequency: w10, w21, w20 or a value in Hz.
        #[arg(long, default_value = "w10")]
        nu: NuArg,
        /// Eigenstates kept.
        #[arg(long, default_value_t = crate::dynamics::DEFAULT_LEVELS)]
        levels: usize,
        /// Initial eigenstate (default |1⟩ for w20, |0⟩ otherwise).
        #[arg(long)]
        initial: Option<usize>,
        /// Duration in units of t_eff.
        #[arg(long, default_value_t = 2.0, conflicts_with = "duration_seconds")]
        duration: f64,
        /// Duration in seconds.
        #[arg(long)]
        duration_seconds: Option<f64>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Monte Carlo statistics of transition ratios.
    Robustness {
        #[command(flatten)]
        input: CircuitArgs,
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::All)]
        mode: ModeArg,
        /// Default: uniform for single-cap, normal for all.
        #[arg(long, value_enum)]
        distribution: Option<DistributionArg>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also sweep every sample over this grid.
        #[arg(long)]
        envelope: bool,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Level convergence against the excitation cutoff for one loop.
    Convergence {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long = "loop", default_value_t = 0)]
        loop_index: usize,
        #[arg(long, default_value_t = 2)]
        m_min: usize,
        #[arg(long, default_value_t = 14)]
        m_max: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Harmonic)]
        model: ModelArg,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Quantize { .. } => "quantize",
            Command::Spectrum { .. } => "spectrum",
            Command::Sweep { .. } => "sweep",
            Command::Optimize { .. } => "optimize",
            Command::Dynamics { .. } => "dynamics",
            Command::Robustness { .. } => "robustness",
            Command::Convergence { .. } => "convergence",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CircuitArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    /// Operator for matrix elements, e.g. charge-edge-left or phase:0:1.
    #[arg(long, default_value = "charge-edge-left")]
    pub operator: String,
    #[command(flatten)]
    pub truncation: TruncationArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct TruncationArgs {
    /// Charge-basis cutoff n_max (starting point of the gate).
    #[arg(long)]
    pub charge: Option<usize>,
    /// Fock-basis cutoff m_max (starting point of the gate).
    #[arg(long)]
    pub fock: Option<usize>,
    /// Use the cutoffs as given instead of growing them until the lowest
    /// transitions settle.
    #[arg(long)]
    pub no_gate: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct GridArgs {
    /// rad.
    #[arg(long, default_value_t = -2.0 * std::f64::consts::PI, allow_hyphen_values = true)]
    pub flux_min: f64,
    /// rad.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI, allow_hyphen_values = true)]
    pub flux_max: f64,
    #[arg(long, default_value_t = 101)]
    pub flux_steps: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct GaArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 16)]
    pub population: usize,
    #[arg(long, default_value_t = 8)]
    pub survivors: usize,
    #[arg(long, default_value_t = 0.01)]
    pub mutation_rate: f64,
    #[arg(long, value_enum, default_value_t = MutationArg::PerIndividual)]
    pub mutation_mode: MutationArg,
    #[arg(long, value_enum, default_value_t = DedupArg::Off)]
    pub dedup: DedupArg,
}

#[derive(Args, Debug, Serialize)]
pub struct CostArgs {
    /// Detuning floor Γ, Hz.
    #[arg(long, default_value_t = GHZ)]
    pub gamma: f64,
    /// Spectral cut-off ω_M, Hz.
    #[arg(long, default_value_t = 16.0 * GHZ)]
    pub omega_max: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetArg {
    Ladder,
    Lambda,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Ladder => Target::Ladder,
            TargetArg::Lambda => Target::Lambda,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    SingleCap,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionArg {
    Uniform,
    Normal,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationArg {
    PerIndividual,
    SingleIndividual,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupArg {
    Off,
    Population,
    History,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    Harmonic,
    Full,
}

/// `w10`, `w21`, `w20` or a frequency in Hz.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(into = "String")]
pub struct NuArg(pub DriveFrequency);

impl FromStr for NuArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "w10" => Ok(NuArg(DriveFrequency::W10)),
            "w21" => Ok(NuArg(DriveFrequency::W21)),
            "w20" => Ok(NuArg(DriveFrequency::W20)),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|f| f.is_finite() && *f >= 0.0)
                .map(|f| NuArg(DriveFrequency::Hz(f)))
                .ok_or_else(|| format!("expected w10, w21, w20 or a frequency in Hz, got {other:?}")),
        }
    }
}

impl From<NuArg> for String {
    fn from(n: NuArg) -> String {
        match n.0 {
            DriveFrequency::Transition(i, j) => format!("w{i}{j}"),
            DriveFrequency::Hz(f) => f.to_string(),
        }
    }
}

/// What a command produced.
struct Outcome {
    result: Value,
    summary: String,
    /// `(file name, contents)`.
    plots: Vec<(String, String)>,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Parses `argv` (including the program name), dispatches and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let name = cli.command.name();
    let (outcome, truncation) = dispatch(&cli.command)?;
    fs::create_dir_all(&cli.out).map_err(|e| Failure(format!("cannot create {}: {e}", cli.out.display())))?;
    let mut doc = json!({
        "command": name,
        "config": cli,
        "result": outcome.result,
    });
    if let Some(t) = truncation {
        doc["truncation"] = t;
    }
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write(&cli.out.join(format!("{name}.json")), &text)?;
    write(&cli.out.join(format!("{name}.txt")), &outcome.summary)?;
    if !cli.no_plots {
        for (file, body) in &outcome.plots {
            write(&cli.out.join(file), body)?;
        }
    }
    Ok(outcome.summary)
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ChainCircuit, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    let c = parse_circuit(&bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    c.validate().map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Ok(c)
}

fn operator(label: &str) -> Result<OperatorLabel, Failure> {
    label.parse().map_err(Failure::from)
}

/// Starting options from the flags, gated at `circuit` unless disabled.
fn resolve_options(circuit: &ChainCircuit, t: &TruncationArgs) -> Result<(SpectrumOptions, Value), Failure> {
    let mut opts = SpectrumOptions::default();
    let d = Truncation::default();
    opts.quantize.truncation = Truncation {
        charge: t.charge.unwrap_or(d.charge),
        fock: t.fock.unwrap_or(d.fock),
    };
    let outcome: Option<GateOutcome> = if t.no_gate {
        None
    } else {
        let (o, g) = gate_truncation(circuit, &opts, &TruncationGate::default())?;
        opts = o;
        Some(g)
    };
    let tr = opts.quantize.truncation;
    Ok((opts, json!({"charge": tr.charge, "fock": tr.fock, "gate": outcome})))
}

fn ghz(x: f64) -> String {
    format!("{:.4}", x / GHZ)
}

fn dispatch(cmd: &Command) -> Result<(Outcome, Option<Value>), Failure> {
    match cmd {
        Command::Quantize { input } => {
            let c = load(&input.circuit)?;
            let (opts, tr) = resolve_options(&c, &input.truncation)?;
            Ok((quantize(&c, &opts)?, Some(tr)))
        }
        Command::Spectrum { input, levels, flux } => {
            let mut c = load(&input.circuit)?;
            if let Some(phi) = flux {
                c = c.with_external_phase(*phi);
            }
            let (opts, tr) = resolve_options(&c, &input.truncation)?;
            let r = analyze(&c, *levels, &operator(&input.operator)?, &opts)?;
            let mut summary = format!("{} levels, operator {}\n", r.len(), r.operator);
            for n in 1..r.len() {
                let _ = writeln!(summary, "omega_{n}0 = {} GHz", ghz(r.transition(n, 0)?));
            }
            for n in 2..r.len() {
                let _ = writeln!(summary, "omega_{}{} = {} GHz", n, n - 1, ghz(r.transition(n, n - 1)?));
            }
            let table = r.magnitude_table();
            let _ = writeln!(summary, "|<i|O|j>|:");
            for row in table.rows() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
                let _ = writeln!(summary, "  {}", cells.join(" "));
            }
            let plots = vec![("spectrum_elements.csv".into(), matrix_csv(&table))];
            Ok((
                Outcome {
                    result: serde_json::to_value(&r)?,
                    summary,
                    plots,
                },
                Some(tr),
            ))
        }
        Command::Sweep { input, levels, grid } => {
            let c = load(&input.circuit)?;
            let g = FluxGrid::new(grid.flux_min, grid.flux_max, grid.flux_steps)?;
            let (opts, tr) = resolve_options(&c, &input.truncation)?;
            let s = flux_sweep(&c, g, *levels, &operator(&input.operator)?, &opts);
            let mut summary = format!(
                "{} points on [{:.4}, {:.4}] rad, {} failed\n",
                g.steps,
                g.min,
                g.max,
                s.failures()
            );
            if let Some((w10, phi)) = s
                .reports()
                .filter_map(|(phi, r)| r.transition(1, 0).ok().map(|w| (w, phi)))
                .min_by(|a, b| a.0.total_cmp(&b.0))
            {
                let _ = writeln!(summary, "min omega_10 = {} GHz at phi_x = {phi:.4}", ghz(w10));
            }
            let plots = vec![("sweep.dat".into(), s.to_table(" ", "# "))];
            Ok((
                Outcome {
                    result: serde_json::to_value(&s)?,
                    summary,
                    plots,
                },
                Some(tr),
            ))
        }
        Command::Optimize {
            target,
            circuit,
            loops,
            ga,
            cost,
            truncation,
        } => optimize(*target, circuit.as_deref(), *loops, ga, cost, truncation).map(|o| (o, None)),
        Command::Dynamics {
            input,
            omega,
            nu,
            levels,
            initial,
            duration,
            duration_seconds,
            samples,
        } => {
            let c = load(&input.circuit)?;
            let (opts, tr) = resolve_options(&c, &input.truncation)?;
            let label = operator(&input.operator)?;
            let drive = DriveSpec {
                omega: *omega,
                nu: nu.0,
                operator: label,
                initial_state: *initial,
                duration: duration_seconds.map_or(Duration::Effective(*duration), Duration::Seconds),
                levels: *levels,
                samples: *samples,
                tolerance: crate::dynamics::DEFAULT_TOLERANCE,
            };
            let r = evolve_driven(&c, &drive, &opts)?;
            let table = dump_operator_matrix(&c, &label, *levels, &opts)?;
            let last = r.populations.last().expect("at least two samples");
            let peaks: Vec<f64> = (0..r.energies.len())
                .map(|j| r.populations.iter().map(|p| p[j]).fold(0.0, f64::max))
                .collect();
            let mut summary = format!(
                "Omega = {} GHz, nu = {} GHz, start |{}>, t_eff = {:.4e} s, norm defect {:.2e}\n",
                ghz(r.omega),
                ghz(r.nu),
                r.initial_state,
                r.t_eff,
                r.norm_defect
            );
            for (j, (p, pk)) in last.iter().zip(&peaks).enumerate() {
                let _ = writeln!(summary, "P{j}: final {p:.4}, peak {pk:.4}");
            }
            let plots = vec![
                ("dynamics.dat".into(), r.to_table(" ", "# ")),
                ("dynamics.csv".into(), r.to_table(",", "")),
                ("operator.csv".into(), matrix_csv(&table)),
            ];
            Ok((
                Outcome {
                    result: serde_json::to_value(&r)?,
                    summary,
                    plots,
                },
                Some(tr),
            ))
        }
        Command::Robustness {
            input,
            target,
            sigma,
            mode,
            distribution,
            samples,
            seed,
            envelope,
            grid,
        } => {
            let c = load(&input.circuit)?;
            let (opts, tr) = resolve_options(&c, &input.truncation)?;
            let mut spec = match mode {
                ModeArg::SingleCap => PerturbationSpec::single_capacitor(*sigma, *samples),
                ModeArg::All => PerturbationSpec::all_parameters(*sigma, *samples),
            };
            if let Some(d) = distribution {
                spec.distribution = match d {
                    DistributionArg::Uniform => Distribution::UniformPlusMinus,
                    DistributionArg::Normal => Distribution::Normal,
                };
            }
            let g = if *envelope {
                Some(FluxGrid::new(grid.flux_min, grid.flux_max, grid.flux_steps)?)
            } else {
                None
            };
            let r = robustness_study(&c, &spec, (*target).into(), *seed, &opts, g)?;
            let mode_name = match spec.mode {
                PerturbationMode::SingleCapacitor => "single capacitor",
                PerturbationMode::AllParameters => "all parameters",
            };
            let mut summary = format!(
                "{} samples ({mode_name}, sigma = {}), {} failed\n",
                spec.samples, spec.sigma, r.failures
            );
            for ((name, nominal), st) in r.ratio_names.iter().zip(&r.nominal).zip(&r.stats) {
                let _ = writeln!(
                    summary,
                    "{name}: nominal {nominal:.4}, mean {:.4}, sd {:.4}",
                    st.mean, st.sd
                );
            }
            let mut plots = vec![
                ("robustness_samples.dat".into(), r.to_table(" ", "# ")),
                ("robustness_summary.dat".into(), r.summary_table(" ", "# ")),
            ];
            if let Some(env) = &r.envelope {
                plots.push(("robustness_envelope.dat".into(), envelope_table(env)));
            }
            Ok((
                Outcome {
                    result: serde_json::to_value(&r)?,
                    summary,
                    plots,
                },
                Some(tr),
            ))
        }
        Command::Convergence {
            circuit,
            loop_index,
            m_min,
            m_max,
            model,
            tolerance,
        } => {
            let c = load(circuit)?;
            let lp = c
                .loops
                .get(*loop_index)
                .ok_or_else(|| Failure(format!("circuit has {} loops, no loop {loop_index}", c.len())))?;
            if m_min > m_max {
                return Err(Failure(format!("--m-min {m_min} exceeds --m-max {m_max}")));
            }
            let model = match model {
                ModelArg::Harmonic => ConvergenceModel::Harmonic,
                ModelArg::Full => ConvergenceModel::Full,
            };
            let r = convergence_study(lp, *m_min..=*m_max, model, *tolerance)?;
            let mut summary = match r.converged_at {
                Some(m) => format!("converged below {tolerance:e} at m = {m}\n"),
                None => format!("not converged below {tolerance:e} by m = {m_max}\n"),
            };
            let mut dat = String::from("# m eps_0 eps_1 eps_2 eps_3\n");
            for (m, e) in r.cutoffs.iter().zip(&r.errors) {
                let cells: Vec<String> = e.iter().map(|v| format!("{v:.6e}")).collect();
                let _ = writeln!(summary, "m = {m:2}: {}", cells.join(" "));
                let _ = writeln!(dat, "{m} {}", cells.join(" "));
            }
            let result = json!({
                "cutoffs": r.cutoffs,
                "levels": r.levels,
                "errors": r.errors,
                "tolerance": r.tolerance,
                "converged_at": r.converged_at,
            });
            Ok((
                Outcome {
                    result,
                    summary,
                    plots: vec![("convergence.dat".into(), dat)],
                },
                None,
            ))
        }
    }
}

fn quantize(c: &ChainCircuit, opts: &SpectrumOptions) -> Result<Outcome, Failure> {
    let system = assemble_chain_hamiltonian(c, &opts.quantize)?;
    let mut loops = Vec::new();
    let mut summary = String::new();
    for (i, lp) in c.loops.iter().enumerate() {
        let spec = reduce_loop(lp)?;
        let junctions: Vec<Value> = spec
            .junctions
            .iter()
            .map(|j| json!({"branch": j.branch, "EJ": j.energy, "coefficients": j.coefficients, "flux_offset": j.flux_offset}))
            .collect();
        let rows = |a: &ndarray::Array2<f64>| -> Vec<Vec<f64>> { a.rows().into_iter().map(|r| r.to_vec()).collect() };
        loops.push(json!({
            "nodes": spec.nodes.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
            "charging": rows(&spec.charging),
            "inductive": rows(&spec.inductive),
            "junctions": junctions,
            "closure_branch": spec.closure_branch,
        }));
        let _ = writeln!(
            summary,
            "loop {i}: {} active nodes, {} junction terms",
            spec.dim(),
            spec.junctions.len()
        );
    }
    let sites: Vec<Value> = system
        .sites
        .iter()
        .map(|s| json!({"loop": s.loop_index, "node": s.label.to_string(), "basis": s.basis.to_string(), "dim": s.basis.dim()}))
        .collect();
    for s in &system.sites {
        let _ = writeln!(summary, "  loop {} {}: {}", s.loop_index, s.label, s.basis);
    }
    let _ = writeln!(
        summary,
        "Hilbert space dimension {}, {} nonzeros",
        system.dim(),
        system.hamiltonian.nnz()
    );
    Ok(Outcome {
        result: json!({
            "dimension": system.dim(),
            "factor_dims": system.factor_dims,
            "nonzeros": system.hamiltonian.nnz(),
            "sites": sites,
            "loops": loops,
        }),
        summary,
        plots: Vec::new(),
    })
}

fn optimize(
    target: TargetArg,
    template: Option<&Path>,
    loops: usize,
    ga: &GaArgs,
    cost: &CostArgs,
    truncation: &TruncationArgs,
) -> Result<Outcome, Failure> {
    let mut spec = CostSpec::new(target.into());
    spec.gamma = cost.gamma;
    spec.omega_max = cost.omega_max;
    if !spec.is_well_formed() {
        return Err(Failure("gamma must be >= 0 and omega-max > 0".into()));
    }
    let config = GaConfig {
        population: ga.population,
        survivors: ga.survivors,
        mutation_rate: ga.mutation_rate,
        mutation_mode: match ga.mutation_mode {
            MutationArg::PerIndividual => MutationMode::PerIndividual,
            MutationArg::SingleIndividual => MutationMode::SingleIndividual,
        },
        epochs: ga.epochs,
        seed: ga.seed,
        dedup: match ga.dedup {
            DedupArg::Off => Dedup::Off,
            DedupArg::Population => Dedup::Population,
            DedupArg::History => Dedup::History,
        },
        ..GaConfig::default()
    };
    // Candidates are scored at fixed cutoffs; gating every candidate would
    // make the cost depend on the gate path.
    let mut opts = SpectrumOptions::default();
    let d = Truncation::default();
    opts.quantize.truncation = Truncation {
        charge: truncation.charge.unwrap_or(d.charge),
        fock: truncation.fock.unwrap_or(d.fock),
    };
    let (manifest, best, best_cost, history) = match template {
        Some(path) => {
            let c = load(path)?;
            let run = optimize_parameters(&spec, &c, &opts, &config)?;
            let best = c.with_parameters(&run.best)?;
            (run_manifest(&best, &run, &config), best, run.best_cost, history_table(&run.history))
        }
        None => {
            let search = TopologySearch::new(FixedParameters::default(), loops);
            let run = optimize_topology(&spec, &search, &opts, &config)?;
            let best = search.circuit(&run.best);
            (run_manifest(&best, &run, &config), best, run.best_cost, history_table(&run.history))
        }
    };
    let mut summary = format!("best cost {best_cost:.6e} after {} epochs\n", config.epochs);
    for (i, lp) in best.loops.iter().enumerate() {
        let kinds: Vec<&str> = lp.topology().0.iter().map(|k| k.symbol()).collect();
        let _ = writeln!(summary, "loop {i}: [{}]", kinds.join(", "));
    }
    if let Ok(b) = evaluate(&best, &spec, &opts) {
        let d: Vec<String> = b.distances.iter().map(|x| format!("{x:.4}")).collect();
        let _ = writeln!(summary, "distances: {}", d.join(" "));
    }
    Ok(Outcome {
        result: manifest,
        summary,
        plots: vec![("optimize_history.dat".into(), history)],
    })
}

fn history_table(h: &[crate::ga::EpochRecord]) -> String {
    let mut out = String::from("# epoch best population_best evaluations\n");
    for r in h {
        let _ = writeln!(out, "{} {:.12e} {:.12e} {}", r.epoch, r.best, r.population_best, r.evaluations);
    }
    out
}

fn envelope_table(env: &crate::analysis::Envelope) -> String {
    let mut cols = vec!["phi_x".to_string()];
    for t in &env.transitions {
        cols.extend([format!("{t}_min"), format!("{t}_mean"), format!("{t}_max")]);
    }
    let mut out = format!("# {}\n", cols.join(" "));
    for (p, phi) in env.grid.points().iter().enumerate() {
        let mut cells = vec![format!("{phi:.12e}")];
        for t in 0..env.transitions.len() {
            for v in [env.min[t][p], env.mean[t][p], env.max[t][p]] {
                cells.push(format!("{v:.12e}"));
            }
        }
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}
