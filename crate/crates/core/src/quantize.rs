//! Basis selection, truncated node operators and Hamiltonian assembly for
//! loops and capacitively coupled chains.
//!
//! Energies are in Hz. For a reduced loop with charging matrix `E_C`,
//! inductive matrix `E_L` and junction terms `(E_J, c, θ)` the assembled
//! operator is
//!
//! ```text
//! H = 4 Nᵀ E_C N + ½ φᵀ E_L φ - Σ E_J cos(c·φ - θ)
//! ```
//!
//! Chains add `4 e²/(C_c h) N_k N_{k+1}` between neighbouring loops.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::circuit::{ChainCircuit, LoopTopology};
use crate::linalg::{
    dense_eigh_real, kron_all, lowest_eigenpairs, CsrMatrix, EigenOptions, EigenPairs, LinalgError, ONE, ZERO,
};
use crate::network::{reduce_loop, HamiltonianSpec, NetworkError, NodeLabel};
use crate::units::{ELEMENTARY_CHARGE, PLANCK};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizeError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Fock basis requested for node {node} without inductive energy")]
    MissingInductance { node: usize },
    #[error("truncation must be at least 1, got {0}")]
    BadTruncation(usize),
    #[error("Hilbert-space dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },
    #[error("{bases} bases given for {nodes} nodes")]
    BasisCount { bases: usize, nodes: usize },
    #[error("unknown operator label {0:?}")]
    UnknownOperator(String),
    #[error("operator {label} is not defined: {reason}")]
    UndefinedOperator { label: String, reason: String },
    #[error("chain coupling override refers to a missing node")]
    BadCouplingNode,
}

/// Which basis a node is quantized in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Charge,
    Fock,
}

/// A basis tag with its truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Cooper-pair numbers `-n_max ..= n_max`.
    Charge { n_max: usize },
    /// Oscillator states `0 ..= m_max`.
    Fock { m_max: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Charge { n_max } => 2 * n_max + 1,
            Basis::Fock { m_max } => m_max + 1,
        }
    }

    pub fn kind(&self) -> BasisKind {
        match self {
            Basis::Charge { .. } => BasisKind::Charge,
            Basis::Fock { .. } => BasisKind::Fock,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Charge { n_max } => write!(f, "charge(n_max={n_max})"),
            Basis::Fock { m_max } => write!(f, "fock(m_max={m_max})"),
        }
    }
}

/// Default cutoffs per basis kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub charge: usize,
    pub fock: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            charge: 10,
            fock: 12,
        }
    }
}

impl Truncation {
    pub fn basis(&self, kind: BasisKind) -> Basis {
        match kind {
            BasisKind::Charge => Basis::Charge { n_max: self.charge },
            BasisKind::Fock => Basis::Fock { m_max: self.fock },
        }
    }
}

/// Basis choice from the quartic expansion of the potential.
///
/// The fourth derivative along a node vanishes unless a junction touches it.
/// A junction node is quantized in the charge basis unless it also carries
/// inductive energy.
pub fn select_basis(spec: &HamiltonianSpec, node: usize) -> BasisKind {
    let quartic: f64 = spec
        .junctions
        .iter()
        .map(|j| j.energy * (j.coefficients[node] as f64).powi(4))
        .sum();
    if quartic == 0.0 || spec.node_has_inductance[node] {
        BasisKind::Fock
    } else {
        BasisKind::Charge
    }
}

pub fn choose_bases(spec: &HamiltonianSpec, truncation: &Truncation) -> Vec<Basis> {
    (0..spec.dim())
        .map(|i| truncation.basis(select_basis(spec, i)))
        .collect()
}

/// Harmonic length scales of a Fock-quantized node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPoint {
    /// `(E_L / 32 E_C)^{1/4}`
    pub charge: f64,
    /// `(2 E_C / E_L)^{1/4}`
    pub phase: f64,
}

/// Truncated single-node operators.
#[derive(Debug, Clone)]
pub struct NodeOperators {
    pub basis: Basis,
    pub number: Array2<C64>,
    /// `N²` evaluated before truncation.
    pub number_squared: Array2<C64>,
    /// Fock basis only.
    pub phase: Option<Array2<C64>>,
    /// Fock basis only, `φ²` evaluated before truncation.
    pub phase_squared: Option<Array2<C64>>,
    /// Lower shift in the charge basis, `exp(iφ)` of the truncated phase in
    /// the Fock basis.
    pub exp_i_phase: Array2<C64>,
    pub zero_point: Option<ZeroPoint>,
    /// Eigen-decomposition of the truncated phase (Fock basis).
    phase_spectrum: Option<(Vec<f64>, Array2<f64>)>,
}

fn ladder(dim: usize) -> Array2<f64> {
    let mut a = Array2::zeros((dim, dim));
    for k in 1..dim {
        a[[k - 1, k]] = (k as f64).sqrt();
    }
    a
}

fn to_complex(a: &Array2<f64>) -> Array2<C64> {
    a.mapv(|x| C64::new(x, 0.0))
}

fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn build_node_operators(
    basis: Basis,
    charging: f64,
    inductive: f64,
) -> Result<NodeOperators, QuantizeError> {
    match basis {
        Basis::Charge { n_max } => {
            if n_max < 1 {
                return Err(QuantizeError::BadTruncation(n_max));
            }
            let dim = 2 * n_max + 1;
            let mut number = Array2::zeros((dim, dim));
            let mut shift = Array2::zeros((dim, dim));
            for i in 0..dim {
                number[[i, i]] = C64::new(i as f64 - n_max as f64, 0.0);
                if i + 1 < dim {
                    shift[[i + 1, i]] = ONE;
                }
            }
            let number_squared = number.dot(&number);
            Ok(NodeOperators {
                basis,
                number,
                number_squared,
                phase: None,
                phase_squared: None,
                exp_i_phase: shift,
                zero_point: None,
                phase_spectrum: None,
            })
        }
        Basis::Fock { m_max } => {
            if m_max < 1 {
                return Err(QuantizeError::BadTruncation(m_max));
            }
            if inductive <= 0.0 {
                return Err(QuantizeError::MissingInductance { node: 0 });
            }
            let zp = ZeroPoint {
                charge: (inductive / (32.0 * charging)).powf(0.25),
                phase: (2.0 * charging / inductive).powf(0.25),
            };
            let dim = m_max + 1;
            let pad = dim + 3;
            let a = ladder(pad);
            let ad = a.t().to_owned();
            // N = i n0 (a† - a), φ = φ0 (a† + a)
            let n_pad: Array2<C64> = (&ad - &a).mapv(|x| C64::new(0.0, zp.charge * x));
            let p_pad: Array2<C64> = (&ad + &a).mapv(|x| C64::new(zp.phase * x, 0.0));
            let cut = |m: Array2<C64>| m.slice(s![..dim, ..dim]).to_owned();
            let number = cut(n_pad.clone());
            let phase_real = (&ad + &a).slice(s![..dim, ..dim]).mapv(|x| zp.phase * x);
            let (w, v) = dense_eigh_real(phase_real.clone())?;
            let exp_i_phase = spectral(&w, &v, |x| C64::new(x.cos(), x.sin()));
            Ok(NodeOperators {
                basis,
                number,
                number_squared: cut(n_pad.dot(&n_pad)),
                phase: Some(to_complex(&phase_real)),
                phase_squared: Some(cut(p_pad.dot(&p_pad))),
                exp_i_phase,
                zero_point: Some(zp),
                phase_spectrum: Some((w, v)),
            })
        }
    }
}

fn spectral(w: &[f64], v: &Array2<f64>, f: impl Fn(f64) -> C64) -> Array2<C64> {
    let n = w.len();
    let vc = to_complex(v);
    let d = Array2::from_shape_fn((n, n), |(i, j)| if i == j { f(w[i]) } else { ZERO });
    vc.dot(&d).dot(&dagger(&vc))
}

impl NodeOperators {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `(cos(cφ), sin(cφ))` for an integer multiple `c`.
    pub fn cos_sin(&self, c: i32) -> (Array2<C64>, Array2<C64>) {
        match &self.phase_spectrum {
            Some((w, v)) => {
                let cf = c as f64;
                (
                    spectral(w, v, |x| C64::new((cf * x).cos(), 0.0)),
                    spectral(w, v, |x| C64::new((cf * x).sin(), 0.0)),
                )
            }
            None => {
                let e = self.shift_power(c);
                let ed = dagger(&e);
                let cos = (&e + &ed).mapv(|z| z * 0.5);
                let sin = (&e - &ed).mapv(|z| z / C64::new(0.0, 2.0));
                (cos, sin)
            }
        }
    }

    fn shift_power(&self, c: i32) -> Array2<C64> {
        let n = self.dim();
        let mut out = Array2::eye(n).mapv(|x: f64| C64::new(x, 0.0));
        let base = if c >= 0 {
            self.exp_i_phase.clone()
        } else {
            dagger(&self.exp_i_phase)
        };
        for _ in 0..c.unsigned_abs() {
            out = out.dot(&base);
        }
        out
    }
}

/// Kind of observable addressed by an [`OperatorLabel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Charge,
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteSelector {
    LeftEdge,
    RightEdge,
    /// `position`-th active node of loop `loop_index`.
    Node { loop_index: usize, position: usize },
}

/// Names a node operator, e.g. `charge-edge-left` or `phase:1:0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorLabel {
    pub kind: OperatorKind,
    pub site: SiteSelector,
}

impl OperatorLabel {
    pub const CHARGE_LEFT: OperatorLabel = OperatorLabel {
        kind: OperatorKind::Charge,
        site: SiteSelector::LeftEdge,
    };
    pub const CHARGE_RIGHT: OperatorLabel = OperatorLabel {
        kind: OperatorKind::Charge,
        site: SiteSelector::RightEdge,
    };
}

impl Default for OperatorLabel {
    fn default() -> Self {
        OperatorLabel::CHARGE_LEFT
    }
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            OperatorKind::Charge => "charge",
            OperatorKind::Phase => "phase",
        };
        match self.site {
            SiteSelector::LeftEdge => write!(f, "{kind}-edge-left"),
            SiteSelector::RightEdge => write!(f, "{kind}-edge-right"),
            SiteSelector::Node {
                loop_index,
                position,
            } => write!(f, "{kind}:{loop_index}:{position}"),
        }
    }
}

impl FromStr for OperatorLabel {
    type Err = QuantizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QuantizeError::UnknownOperator(s.to_string());
        let (kind, rest) = if let Some(r) = s.strip_prefix("charge") {
            (OperatorKind::Charge, r)
        } else if let Some(r) = s.strip_prefix("phase") {
            (OperatorKind::Phase, r)
        } else {
            return Err(bad());
        };
        let site = match rest {
            "-edge-left" => SiteSelector::LeftEdge,
            "-edge-right" => SiteSelector::RightEdge,
            other => {
                let mut parts = other.strip_prefix(':').ok_or_else(bad)?.split(':');
                let loop_index = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
                let position = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
                if parts.next().is_some() {
                    return Err(bad());
                }
                SiteSelector::Node {
                    loop_index,
                    position,
                }
            }
        };
        Ok(OperatorLabel { kind, site })
    }
}

/// One active node of a quantized circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub loop_index: usize,
    pub label: NodeLabel,
    pub basis: Basis,
}

/// An assembled Hamiltonian with its node operators lifted to the full space.
#[derive(Debug, Clone)]
pub struct QuantizedSystem {
    pub sites: Vec<Site>,
    /// Dimensions of the tensor factors, left to right.
    pub factor_dims: Vec<usize>,
    pub hamiltonian: CsrMatrix,
    charge: Vec<CsrMatrix>,
    phase: Vec<Option<CsrMatrix>>,
}

impl QuantizedSystem {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Lowest `k` eigenpairs of the Hamiltonian.
    pub fn lowest_eigenpairs(&self, k: usize, eigen: &EigenOptions) -> Result<EigenPairs, LinalgError> {
        lowest_eigenpairs(&self.hamiltonian, k, eigen)
    }

    pub fn charge_operator(&self, site: usize) -> &CsrMatrix {
        &self.charge[site]
    }

    fn site_index(&self, sel: SiteSelector) -> Option<usize> {
        match sel {
            SiteSelector::LeftEdge => (!self.sites.is_empty()).then_some(0),
            SiteSelector::RightEdge => self.sites.len().checked_sub(1),
            SiteSelector::Node {
                loop_index,
                position,
            } => self
                .sites
                .iter()
                .enumerate()
                .filter(|(_, s)| s.loop_index == loop_index)
                .nth(position)
                .map(|(i, _)| i),
        }
    }

    /// Resolves a label to a lifted operator.
    pub fn operator(&self, label: &OperatorLabel) -> Result<&CsrMatrix, QuantizeError> {
        let undefined = |reason: &str| QuantizeError::UndefinedOperator {
            label: label.to_string(),
            reason: reason.to_string(),
        };
        let i = self
            .site_index(label.site)
            .ok_or_else(|| undefined("no such active node"))?;
        match label.kind {
            OperatorKind::Charge => Ok(&self.charge[i]),
            OperatorKind::Phase => self.phase[i]
                .as_ref()
                .ok_or_else(|| undefined("the node is quantized in the charge basis")),
        }
    }
}

/// Assembly settings shared by loops and chains.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizeOptions {
    pub truncation: Truncation,
    pub dimension_cap: usize,
    pub chain: ChainMode,
    /// Per link `(position in loop k, position in loop k+1)`; `None` couples
    /// the rightmost node of loop k to the leftmost node of loop k+1.
    pub coupling_nodes: Option<Vec<(usize, usize)>>,
    pub eigen: EigenOptions,
}

impl Default for QuantizeOptions {
    fn default() -> Self {
        QuantizeOptions {
            truncation: Truncation::default(),
            dimension_cap: 200_000,
            chain: ChainMode::LoopEigenstates {
                levels: 12,
                exact_limit: 4096,
            },
            coupling_nodes: None,
            eigen: EigenOptions::default(),
        }
    }
}

/// How loops of a chain are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainMode {
    /// Direct product of the per-loop truncated bases.
    Product,
    /// Product of each loop's lowest `levels` eigenstates, used when the
    /// exact product dimension exceeds `exact_limit`.
    LoopEigenstates { levels: usize, exact_limit: usize },
}

type Factor = Vec<(usize, Array2<C64>)>;

fn lift(dims: &[usize], factors: &Factor) -> CsrMatrix {
    let mats: Vec<CsrMatrix> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| match factors.iter().find(|(k, _)| *k == i) {
            Some((_, m)) => CsrMatrix::from_dense(&m.view(), 0.0),
            None => CsrMatrix::identity(d),
        })
        .collect();
    let refs: Vec<&CsrMatrix> = mats.iter().collect();
    kron_all(&refs)
}

/// Product terms of `(cos(c·φ), sin(c·φ))` built by angle addition over the
/// nodes with nonzero coefficient.
fn junction_terms(ops: &[NodeOperators], coefficients: &[i32]) -> (Vec<(C64, Factor)>, Vec<(C64, Factor)>) {
    let mut cos: Vec<(C64, Factor)> = vec![(ONE, Vec::new())];
    let mut sin: Vec<(C64, Factor)> = Vec::new();
    for (node, &c) in coefficients.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (cn, sn) = ops[node].cos_sin(c);
        let mut next_cos = Vec::new();
        let mut next_sin = Vec::new();
        // cos(A+B) = cosA cosB - sinA sinB ; sin(A+B) = sinA cosB + cosA sinB
        for (w, f) in &cos {
            let mut fc = f.clone();
            fc.push((node, cn.clone()));
            next_cos.push((*w, fc));
            let mut fs = f.clone();
            fs.push((node, sn.clone()));
            next_sin.push((*w, fs));
        }
        for (w, f) in &sin {
            let mut fs = f.clone();
            fs.push((node, sn.clone()));
            next_cos.push((-*w, fs));
            let mut fc = f.clone();
            fc.push((node, cn.clone()));
            next_sin.push((*w, fc));
        }
        cos = next_cos;
        sin = next_sin;
    }
    (cos, sin)
}

/// Assembles a single reduced loop at external phase `external_phase`.
pub fn assemble_hamiltonian(
    spec: &HamiltonianSpec,
    bases: &[Basis],
    external_phase: f64,
) -> Result<QuantizedSystem, QuantizeError> {
    assemble_with_cap(spec, bases, external_phase, 0, usize::MAX)
}

fn assemble_with_cap(
    spec: &HamiltonianSpec,
    bases: &[Basis],
    external_phase: f64,
    loop_index: usize,
    cap: usize,
) -> Result<QuantizedSystem, QuantizeError> {
    let n = spec.dim();
    if bases.len() != n {
        return Err(QuantizeError::BasisCount {
            bases: bases.len(),
            nodes: n,
        });
    }
    let spec = spec.with_external_phase(external_phase);
    let dims: Vec<usize> = bases.iter().map(Basis::dim).collect();
    let total = dims
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(*d))
        .unwrap_or(usize::MAX);
    if total > cap {
        return Err(QuantizeError::DimensionOverflow { dim: total, cap });
    }
    let ops: Vec<NodeOperators> = bases
        .iter()
        .enumerate()
        .map(|(i, b)| {
            build_node_operators(*b, spec.charging[[i, i]], spec.inductive[[i, i]]).map_err(|e| match e {
                QuantizeError::MissingInductance { .. } => QuantizeError::MissingInductance { node: i },
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut h = CsrMatrix::zeros(total);
    let re = |x: f64| C64::new(x, 0.0);
    for i in 0..n {
        let ec = spec.charging[[i, i]];
        if ec != 0.0 {
            h = h.add(&lift(&dims, &vec![(i, ops[i].number_squared.mapv(|z| z * 4.0 * ec))]));
        }
        for j in i + 1..n {
            let ecij = spec.charging[[i, j]];
            if ecij != 0.0 {
                let f = vec![(i, ops[i].number.mapv(|z| z * 8.0 * ecij)), (j, ops[j].number.clone())];
                h = h.add(&lift(&dims, &f));
            }
        }
    }
    for i in 0..n {
        let el = spec.inductive[[i, i]];
        if el != 0.0 {
            let sq = ops[i].phase_squared.as_ref().ok_or(QuantizeError::MissingInductance { node: i })?;
            h = h.add(&lift(&dims, &vec![(i, sq.mapv(|z| z * 0.5 * el))]));
        }
        for j in i + 1..n {
            let elij = spec.inductive[[i, j]];
            if elij != 0.0 {
                let (pi, pj) = match (&ops[i].phase, &ops[j].phase) {
                    (Some(a), Some(b)) => (a, b),
                    (None, _) => return Err(QuantizeError::MissingInductance { node: i }),
                    (_, None) => return Err(QuantizeError::MissingInductance { node: j }),
                };
                let f = vec![(i, pi.mapv(|z| z * elij)), (j, pj.clone())];
                h = h.add(&lift(&dims, &f));
            }
        }
    }
    for term in &spec.junctions {
        let (cos_terms, sin_terms) = junction_terms(&ops, &term.coefficients);
        // cos(θ - off) = cosθ cos(off) + sinθ sin(off)
        let (co, so) = (term.flux_offset.cos(), term.flux_offset.sin());
        let weighted = cos_terms
            .into_iter()
            .map(|(w, f)| (w * re(-term.energy * co), f))
            .chain(
                sin_terms
                    .into_iter()
                    .filter(|_| so != 0.0)
                    .map(|(w, f)| (w * re(-term.energy * so), f)),
            );
        for (w, f) in weighted {
            h = h.add(&lift(&dims, &f).scale(w));
        }
    }
    // Hermitian part only; removes rounding asymmetry from the spectral
    // matrix functions.
    let h = h.add(&h.adjoint()).scale(re(0.5));

    let charge = (0..n).map(|i| lift(&dims, &vec![(i, ops[i].number.clone())])).collect();
    let phase = (0..n)
        .map(|i| ops[i].phase.as_ref().map(|p| lift(&dims, &vec![(i, p.clone())])))
        .collect();
    let sites = spec
        .nodes
        .iter()
        .zip(bases)
        .map(|(label, basis)| Site {
            loop_index,
            label: *label,
            basis: *basis,
        })
        .collect();
    Ok(QuantizedSystem {
        sites,
        factor_dims: dims,
        hamiltonian: h,
        charge,
        phase,
    })
}

/// Reduces and assembles one loop with default basis selection.
pub fn quantize_loop(lp: &LoopTopology, options: &QuantizeOptions) -> Result<QuantizedSystem, QuantizeError> {
    quantize_loop_at(lp, 0, options)
}

fn quantize_loop_at(
    lp: &LoopTopology,
    loop_index: usize,
    options: &QuantizeOptions,
) -> Result<QuantizedSystem, QuantizeError> {
    let spec = reduce_loop(lp)?;
    let bases = choose_bases(&spec, &options.truncation);
    assemble_with_cap(&spec, &bases, lp.external_phase, loop_index, options.dimension_cap)
}

/// `e² / (C_c h)` in Hz.
pub fn coupling_energy(capacitance: f64) -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (capacitance * PLANCK)
}

/// A loop prepared for chain assembly: its Hamiltonian and node operators in
/// the basis that enters the product space.
struct ChainFactor {
    h: Array2<C64>,
    charge: Vec<Array2<C64>>,
    phase: Vec<Option<Array2<C64>>>,
    sites: Vec<Site>,
}

fn project(v: &Array2<C64>, op: &CsrMatrix) -> Array2<C64> {
    let hv = op.matmat(&v.view());
    dagger(v).dot(&hv)
}

fn chain_factor(sys: QuantizedSystem, mode: ChainMode, eigen: &EigenOptions) -> Result<ChainFactor, QuantizeError> {
    match mode {
        ChainMode::Product => Ok(ChainFactor {
            h: sys.hamiltonian.to_dense(),
            charge: sys.charge.iter().map(CsrMatrix::to_dense).collect(),
            phase: sys.phase.iter().map(|p| p.as_ref().map(CsrMatrix::to_dense)).collect(),
            sites: sys.sites,
        }),
        ChainMode::LoopEigenstates { levels, .. } => {
            let k = levels.min(sys.dim()).max(1);
            let pairs = sys.lowest_eigenpairs(k, eigen)?;
            let v = pairs.vectors;
            let h = Array2::from_shape_fn((k, k), |(i, j)| {
                if i == j {
                    C64::new(pairs.values[i], 0.0)
                } else {
                    ZERO
                }
            });
            Ok(ChainFactor {
                h,
                charge: sys.charge.iter().map(|c| project(&v, c)).collect(),
                phase: sys.phase.iter().map(|p| p.as_ref().map(|p| project(&v, p))).collect(),
                sites: sys.sites,
            })
        }
    }
}

/// Assembles a capacitively coupled chain.
pub fn assemble_chain_hamiltonian(
    chain: &ChainCircuit,
    options: &QuantizeOptions,
) -> Result<QuantizedSystem, QuantizeError> {
    if chain.loops.len() == 1 {
        return quantize_loop(&chain.loops[0], options);
    }
    let systems = chain
        .loops
        .iter()
        .enumerate()
        .map(|(l, lp)| quantize_loop_at(lp, l, options))
        .collect::<Result<Vec<_>, _>>()?;
    let exact_dim = systems
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.dim()))
        .unwrap_or(usize::MAX);
    let mode = match options.chain {
        ChainMode::LoopEigenstates { exact_limit, .. } if exact_dim <= exact_limit => ChainMode::Product,
        other => other,
    };
    let mut factors = Vec::with_capacity(systems.len());
    for sys in systems {
        factors.push(chain_factor(sys, mode, &options.eigen)?);
    }
    let dims: Vec<usize> = factors.iter().map(|f| f.h.nrows()).collect();
    let total = dims
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(*d))
        .unwrap_or(usize::MAX);
    if total > options.dimension_cap {
        return Err(QuantizeError::DimensionOverflow {
            dim: total,
            cap: options.dimension_cap,
        });
    }
    let mut h = CsrMatrix::zeros(total);
    for (l, f) in factors.iter().enumerate() {
        h = h.add(&lift(&dims, &vec![(l, f.h.clone())]));
    }
    for (k, &cc) in chain.couplings.iter().enumerate() {
        let (a, b) = (&factors[k], &factors[k + 1]);
        if a.sites.is_empty() || b.sites.is_empty() {
            continue;
        }
        let (ia, ib) = match &options.coupling_nodes {
            Some(nodes) => {
                let (ia, ib) = *nodes.get(k).ok_or(QuantizeError::BadCouplingNode)?;
                if ia >= a.sites.len() || ib >= b.sites.len() {
                    return Err(QuantizeError::BadCouplingNode);
                }
                (ia, ib)
            }
            None => (a.sites.len() - 1, 0),
        };
        let g = 4.0 * coupling_energy(cc);
        let f = vec![(k, a.charge[ia].mapv(|z| z * g)), (k + 1, b.charge[ib].clone())];
        h = h.add(&lift(&dims, &f));
    }
    let h = h.add(&h.adjoint()).scale(C64::new(0.5, 0.0));
    let mut sites = Vec::new();
    let mut charge = Vec::new();
    let mut phase = Vec::new();
    for (l, f) in factors.iter().enumerate() {
        for (i, site) in f.sites.iter().enumerate() {
            sites.push(site.clone());
            charge.push(lift(&dims, &vec![(l, f.charge[i].clone())]));
            phase.push(f.phase[i].as_ref().map(|p| lift(&dims, &vec![(l, p.clone())])));
        }
    }
    Ok(QuantizedSystem {
        sites,
        factor_dims: dims,
        hamiltonian: h,
        charge,
        phase,
    })
}

/// Which Hamiltonian a convergence study diagonalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceModel {
    /// Quadratic part: kinetic, inductive and junction curvature, every
    /// node in the Fock basis.
    Harmonic,
    /// The assembled Hamiltonian with its default basis choice; both
    /// cutoffs follow the excitation count.
    Full,
}

/// Relative level changes between successive cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub model: ConvergenceModel,
    /// Excitation counts `m`.
    pub cutoffs: Vec<usize>,
    /// `levels[i][n]` is level `n` at `cutoffs[i]`, Hz.
    pub levels: Vec<Vec<f64>>,
    /// `errors[i][n] = |ε_n(m) - ε_n(m+1)| / |ε_n(m+1)|` with `m = cutoffs[i]`.
    pub errors: Vec<Vec<f64>>,
    pub tolerance: f64,
    /// Smallest `m` whose worst relative error is below the tolerance.
    pub converged_at: Option<usize>,
}

impl ConvergenceReport {
    pub fn errors_at(&self, m: usize) -> Option<&[f64]> {
        self.cutoffs
            .iter()
            .position(|&c| c == m)
            .map(|i| self.errors[i].as_slice())
    }
}

/// Quadratic approximation of a reduced loop: `E_L` plus junction curvature
/// `E_J cos(θ) c cᵀ`.
pub fn harmonic_spec(spec: &HamiltonianSpec) -> HamiltonianSpec {
    let n = spec.dim();
    let mut k = spec.inductive.clone();
    for j in &spec.junctions {
        let w = j.energy * j.flux_offset.cos();
        for a in 0..n {
            for b in 0..n {
                k[[a, b]] += w * (j.coefficients[a] * j.coefficients[b]) as f64;
            }
        }
    }
    HamiltonianSpec {
        nodes: spec.nodes.clone(),
        charging: spec.charging.clone(),
        node_has_inductance: (0..n).map(|i| k[[i, i]] > 0.0).collect(),
        inductive: k,
        junctions: Vec::new(),
        closure_branch: None,
    }
}

const CONVERGENCE_LEVELS: usize = 4;

fn lowest_levels(sys: &QuantizedSystem, eigen: &EigenOptions) -> Result<Vec<f64>, QuantizeError> {
    let k = CONVERGENCE_LEVELS.min(sys.dim());
    Ok(sys.lowest_eigenpairs(k, eigen)?.values)
}

/// Tracks the four lowest levels while the per-mode excitation count grows
/// over `cutoffs` (each `m` is compared with `m + 1`).
pub fn convergence_study(
    lp: &LoopTopology,
    cutoffs: impl IntoIterator<Item = usize>,
    model: ConvergenceModel,
    tolerance: f64,
) -> Result<ConvergenceReport, QuantizeError> {
    let spec = reduce_loop(lp)?;
    let eigen = EigenOptions::default();
    let levels_at = |m: usize| -> Result<Vec<f64>, QuantizeError> {
        let sys = match model {
            ConvergenceModel::Harmonic => {
                let hs = harmonic_spec(&spec);
                let bases = vec![Basis::Fock { m_max: m }; hs.dim()];
                assemble_hamiltonian(&hs, &bases, 0.0)?
            }
            ConvergenceModel::Full => {
                let t = Truncation { charge: m, fock: m };
                let bases = choose_bases(&spec, &t);
                assemble_hamiltonian(&spec, &bases, lp.external_phase)?
            }
        };
        lowest_levels(&sys, &eigen)
    };
    let cutoffs: Vec<usize> = cutoffs.into_iter().collect();
    let mut levels = Vec::new();
    let mut errors = Vec::new();
    let mut converged_at = None;
    let mut cache: Option<(usize, Vec<f64>)> = None;
    for &m in &cutoffs {
        let lo = match cache.take() {
            Some((cm, v)) if cm == m => v,
            _ => levels_at(m)?,
        };
        let hi = levels_at(m + 1)?;
        let err: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| if *b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() })
            .collect();
        if converged_at.is_none() && err.iter().all(|e| *e < tolerance) {
            converged_at = Some(m);
        }
        levels.push(lo);
        errors.push(err);
        cache = Some((m + 1, hi));
    }
    Ok(ConvergenceReport {
        model,
        cutoffs,
        levels,
        errors,
        tolerance,
        converged_at,
    })
}
