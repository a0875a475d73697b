//! Node-variable description of a loop and its reduction to a Hamiltonian.
//!
//! The pipeline is [`node_network`] (node matrices, fluxoid rule, merging of
//! nodes joined by absent branches) followed by [`eliminate_passive_nodes`]
//! and [`legendre_transform`]. [`reduce_loop`] runs all three.
//!
//! An absent branch is a superconducting wire: its two terminals become one
//! node. A junction whose terminals merge only contributes a constant and is
//! dropped.

use std::fmt;

use ndarray::Array2;
use ndarray_linalg::{Cholesky, Inverse, UPLO};
use thiserror::Error;

use crate::circuit::{Branch, LoopTopology, ValidityReason};
use crate::units::{CHARGING_SCALE, INDUCTIVE_SCALE};

/// Rows whose largest entry is below this (SI units) count as zero.
pub const ZERO_ROW_THRESHOLD: f64 = 1e-18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("topology is not quantizable: {0}")]
    InvalidTopology(ValidityReason),
    #[error("degenerate network: {0}")]
    DegenerateNetwork(String),
    #[error("junction attached to passive coordinate {0}")]
    JunctionOnPassiveNode(NodeLabel),
    #[error("capacitance matrix is not invertible; passive elimination was skipped")]
    SingularCapacitance,
}

/// A generalized node coordinate. `reference` is set when the coordinate is
/// the phase of `node` measured from another node of a floating island.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeLabel {
    pub node: usize,
    pub reference: Option<usize>,
}

impl NodeLabel {
    pub fn node(node: usize) -> Self {
        NodeLabel {
            node,
            reference: None,
        }
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reference {
            None => write!(f, "phi{}", self.node),
            Some(r) => write!(f, "phi{}-phi{}", self.node, r),
        }
    }
}

/// `-E_J cos(coefficients · φ - flux_offset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JosephsonTerm {
    /// Branch index inside the loop.
    pub branch: usize,
    /// `E_J / h` in Hz.
    pub energy: f64,
    pub coefficients: Vec<i32>,
    pub flux_offset: f64,
}

impl JosephsonTerm {
    pub fn touches(&self, node: usize) -> bool {
        self.coefficients[node] != 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EliminationKind {
    /// Zero kinetic row: `∂L/∂φ = 0` fixes the coordinate.
    Coordinate,
    /// Zero potential row: `∂L/∂φ̇ = 0` fixes the velocity.
    Velocity,
}

/// `x_label = weights · x_active`, where `x` is the coordinate or velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationMap {
    pub kind: EliminationKind,
    pub label: NodeLabel,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedNetwork {
    pub active_nodes: Vec<NodeLabel>,
    /// Farads.
    pub capacitance: Array2<f64>,
    /// Inverse henries.
    pub inverse_inductance: Array2<f64>,
    pub junctions: Vec<JosephsonTerm>,
    pub eliminations: Vec<EliminationMap>,
}

impl ReducedNetwork {
    pub fn dim(&self) -> usize {
        self.active_nodes.len()
    }

    fn junction_on(&self, i: usize) -> bool {
        self.junctions.iter().any(|j| j.touches(i))
    }
}

/// Reduced quadratic forms in energy units.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub nodes: Vec<NodeLabel>,
    /// `e² C⁻¹ / 2h`, Hz.
    pub charging: Array2<f64>,
    /// `Φ0² L⁻¹ / (4π² h)`, Hz.
    pub inductive: Array2<f64>,
    pub junctions: Vec<JosephsonTerm>,
    pub node_has_inductance: Vec<bool>,
    /// Closure branch of the source loop, if any junction exists.
    pub closure_branch: Option<usize>,
}

impl HamiltonianSpec {
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Moves the external flux onto the closure junction.
    pub fn with_external_phase(&self, phi: f64) -> Self {
        let mut out = self.clone();
        for j in &mut out.junctions {
            if Some(j.branch) == self.closure_branch {
                j.flux_offset = phi;
            }
        }
        out
    }
}

/// Raw 3×3 capacitance and inverse-inductance node matrices.
pub fn build_matrices(lp: &LoopTopology) -> (Array2<f64>, Array2<f64>) {
    let caps: Vec<f64> = lp.branches.iter().map(Branch::capacitance).collect();
    let invl: Vec<f64> = lp.branches.iter().map(Branch::inverse_inductance).collect();
    (tridiagonal(&caps), tridiagonal(&invl))
}

fn tridiagonal(s: &[f64]) -> Array2<f64> {
    let mut m = Array2::zeros((3, 3));
    for i in 0..3 {
        m[[i, i]] = s[i] + s[i + 1];
        if i < 2 {
            m[[i, i + 1]] = -s[i + 1];
            m[[i + 1, i]] = -s[i + 1];
        }
    }
    m
}

/// First junction branch; the external flux enters its phase argument.
pub fn apply_fluxoid_rule(lp: &LoopTopology) -> Option<usize> {
    lp.branches
        .iter()
        .position(|b| matches!(b, Branch::Junction { .. }))
}

/// Terminal pairs of each branch; terminal 3 is ground.
const TERMINALS: [(usize, usize); 4] = [(3, 0), (0, 1), (1, 2), (2, 3)];

/// Phase-difference coefficients of a branch over the three raw nodes.
fn raw_coefficients(branch: usize) -> [i32; 3] {
    match branch {
        0 => [1, 0, 0],
        1 => [-1, 1, 0],
        2 => [0, -1, 1],
        _ => [0, 0, 1],
    }
}

/// Node matrices after merging wired terminals, with Josephson terms and the
/// fluxoid offset. No passive elimination.
pub fn node_network(lp: &LoopTopology) -> Result<ReducedNetwork, NetworkError> {
    let report = lp.validate();
    if !report.valid {
        return Err(NetworkError::InvalidTopology(report.reason));
    }
    let (c_raw, l_raw) = build_matrices(lp);

    let mut parent = [0usize, 1, 2, 3];
    fn find(p: &mut [usize; 4], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (b, br) in lp.branches.iter().enumerate() {
        if matches!(br, Branch::Absent) {
            let (u, v) = TERMINALS[b];
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                // ground wins, otherwise the smaller index
                let (keep, drop) = if ru == 3 || (rv != 3 && ru < rv) {
                    (ru, rv)
                } else {
                    (rv, ru)
                };
                parent[drop] = keep;
            }
        }
    }
    let ground = find(&mut parent, 3);
    let mut classes: Vec<usize> = Vec::new();
    let mut class_of = [usize::MAX; 3];
    for (node, slot) in class_of.iter_mut().enumerate() {
        let root = find(&mut parent, node);
        if root == ground {
            continue;
        }
        let idx = match classes.iter().position(|&r| r == root) {
            Some(i) => i,
            None => {
                classes.push(root);
                classes.len() - 1
            }
        };
        *slot = idx;
    }
    let n = classes.len();
    let mut p = Array2::<f64>::zeros((3, n));
    for node in 0..3 {
        if class_of[node] != usize::MAX {
            p[[node, class_of[node]]] = 1.0;
        }
    }
    let capacitance = p.t().dot(&c_raw).dot(&p);
    let inverse_inductance = p.t().dot(&l_raw).dot(&p);

    let mut active_nodes: Vec<NodeLabel> = vec![NodeLabel::node(usize::MAX); n];
    for node in (0..3).rev() {
        if class_of[node] != usize::MAX {
            active_nodes[class_of[node]] = NodeLabel::node(node);
        }
    }

    let closure = apply_fluxoid_rule(lp);
    let mut junctions = Vec::new();
    for (b, br) in lp.branches.iter().enumerate() {
        if let Branch::Junction {
            josephson_energy, ..
        } = *br
        {
            let raw = raw_coefficients(b);
            let mut coefficients = vec![0i32; n];
            for node in 0..3 {
                if class_of[node] != usize::MAX {
                    coefficients[class_of[node]] += raw[node];
                }
            }
            if coefficients.iter().all(|&c| c == 0) {
                continue;
            }
            junctions.push(JosephsonTerm {
                branch: b,
                energy: josephson_energy,
                coefficients,
                flux_offset: if Some(b) == closure {
                    lp.external_phase
                } else {
                    0.0
                },
            });
        }
    }
    Ok(ReducedNetwork {
        active_nodes,
        capacitance,
        inverse_inductance,
        junctions,
        eliminations: Vec::new(),
    })
}

fn row_is_zero(m: &Array2<f64>, i: usize) -> bool {
    m.row(i).iter().all(|v| v.abs() < ZERO_ROW_THRESHOLD)
}

fn without(m: &Array2<f64>, k: usize) -> Array2<f64> {
    let n = m.nrows();
    let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    Array2::from_shape_fn((n - 1, n - 1), |(a, b)| m[[keep[a], keep[b]]])
}

/// Schur complement removing index `k`, and the solved weights
/// `x_k = w · x_rest`. A zero pivot means a free coordinate: weights are zero.
fn schur(m: &Array2<f64>, k: usize) -> (Array2<f64>, Vec<f64>) {
    let n = m.nrows();
    let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    let pivot = m[[k, k]];
    let mut out = without(m, k);
    if pivot.abs() < ZERO_ROW_THRESHOLD {
        return (out, vec![0.0; n - 1]);
    }
    let w: Vec<f64> = keep.iter().map(|&i| -m[[k, i]] / pivot).collect();
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            out[[a, b]] -= m[[i, k]] * m[[k, j]] / pivot;
        }
    }
    (out, w)
}

impl ReducedNetwork {
    fn remove(&mut self, k: usize, kind: EliminationKind) -> Result<(), NetworkError> {
        let label = self.active_nodes[k];
        if self.junction_on(k) {
            return Err(NetworkError::JunctionOnPassiveNode(label));
        }
        let weights = match kind {
            EliminationKind::Coordinate => {
                let (l, w) = schur(&self.inverse_inductance, k);
                self.inverse_inductance = l;
                self.capacitance = without(&self.capacitance, k);
                w
            }
            EliminationKind::Velocity => {
                let (c, w) = schur(&self.capacitance, k);
                self.capacitance = c;
                self.inverse_inductance = without(&self.inverse_inductance, k);
                w
            }
        };
        for map in &mut self.eliminations {
            let wk = map.weights.remove(k);
            if map.kind == kind {
                for (m, x) in map.weights.iter_mut().zip(&weights) {
                    *m += wk * x;
                }
            }
        }
        for j in &mut self.junctions {
            j.coefficients.remove(k);
        }
        self.active_nodes.remove(k);
        self.eliminations.push(EliminationMap {
            kind,
            label,
            weights,
        });
        Ok(())
    }

    /// Connected components of the graph whose edges are nonzero entries of `m`.
    fn components(m: &Array2<f64>) -> Vec<Vec<usize>> {
        let n = m.nrows();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            let mut comp = Vec::new();
            seen[s] = true;
            while let Some(i) = stack.pop() {
                comp.push(i);
                for j in 0..n {
                    if !seen[j] && m[[i, j]].abs() >= ZERO_ROW_THRESHOLD {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Rewrites the island `members` relative to its first node. Afterwards
    /// the first coordinate is the island's common mode.
    fn rereference(&mut self, members: &[usize]) {
        let n = self.dim();
        let r = members[0];
        let mut t = Array2::<f64>::eye(n);
        for &i in &members[1..] {
            t[[i, r]] = 1.0;
        }
        self.capacitance = t.t().dot(&self.capacitance).dot(&t);
        self.inverse_inductance = t.t().dot(&self.inverse_inductance).dot(&t);
        for j in &mut self.junctions {
            let s: i32 = members.iter().map(|&i| j.coefficients[i]).sum();
            j.coefficients[r] = s;
        }
        for map in &mut self.eliminations {
            let s: f64 = members.iter().map(|&i| map.weights[i]).sum();
            map.weights[r] = s;
        }
        for &i in &members[1..] {
            self.active_nodes[i].reference = Some(self.active_nodes[r].node);
        }
    }

    fn floating_island(&self, m: &Array2<f64>, require_cyclic: bool) -> Option<Vec<usize>> {
        Self::components(m).into_iter().find(|comp| {
            if comp.len() < 2 {
                return false;
            }
            let total: f64 = comp
                .iter()
                .flat_map(|&i| comp.iter().map(move |&j| (i, j)))
                .map(|(i, j)| m[[i, j]])
                .sum();
            let scale = comp.iter().map(|&i| m[[i, i]].abs()).fold(0.0, f64::max);
            let floating = total.abs() <= 1e-12 * scale;
            let cyclic = !require_cyclic
                || self
                    .junctions
                    .iter()
                    .all(|j| comp.iter().map(|&i| j.coefficients[i]).sum::<i32>() == 0);
            floating && cyclic
        })
    }
}

/// Removes coordinate-only and velocity-only degrees of freedom until the
/// capacitance matrix is positive definite.
pub fn eliminate_passive_nodes(mut net: ReducedNetwork) -> Result<ReducedNetwork, NetworkError> {
    loop {
        let n = net.dim();
        if let Some(k) = (0..n).find(|&k| row_is_zero(&net.capacitance, k)) {
            net.remove(k, EliminationKind::Coordinate)?;
            continue;
        }
        if let Some(k) =
            (0..n).find(|&k| row_is_zero(&net.inverse_inductance, k) && !net.junction_on(k))
        {
            net.remove(k, EliminationKind::Velocity)?;
            continue;
        }
        if let Some(island) = net.floating_island(&net.capacitance.clone(), false) {
            net.rereference(&island);
            continue;
        }
        if let Some(island) = net.floating_island(&net.inverse_inductance.clone(), true) {
            net.rereference(&island);
            net.remove(island[0], EliminationKind::Velocity)?;
            continue;
        }
        break;
    }
    if net.dim() > 0 && net.capacitance.cholesky(UPLO::Lower).is_err() {
        return Err(NetworkError::DegenerateNetwork(
            "capacitance matrix is not positive definite after elimination".into(),
        ));
    }
    Ok(net)
}

/// Converts the reduced quadratic forms into charging and inductive energy
/// matrices.
pub fn legendre_transform(net: &ReducedNetwork) -> Result<HamiltonianSpec, NetworkError> {
    let n = net.dim();
    let charging = if n == 0 {
        Array2::zeros((0, 0))
    } else {
        if net.capacitance.cholesky(UPLO::Lower).is_err() {
            return Err(NetworkError::SingularCapacitance);
        }
        let inv = net
            .capacitance
            .inv()
            .map_err(|_| NetworkError::SingularCapacitance)?;
        symmetrize(inv * CHARGING_SCALE)
    };
    let inductive = symmetrize(&net.inverse_inductance * INDUCTIVE_SCALE);
    let node_has_inductance = (0..n).map(|i| inductive[[i, i]] > 0.0).collect();
    Ok(HamiltonianSpec {
        nodes: net.active_nodes.clone(),
        charging,
        inductive,
        junctions: net.junctions.clone(),
        node_has_inductance,
        closure_branch: None,
    })
}

fn symmetrize(m: Array2<f64>) -> Array2<f64> {
    (&m + &m.t()) * 0.5
}

/// Full reduction of one loop.
pub fn reduce_loop(lp: &LoopTopology) -> Result<HamiltonianSpec, NetworkError> {
    let net = eliminate_passive_nodes(node_network(lp)?)?;
    let mut spec = legendre_transform(&net)?;
    spec.closure_branch = apply_fluxoid_rule(lp);
    Ok(spec)
}
