//! Circuit genome: four-branch loops, capacitively coupled chains, validity
//! rules, topology enumeration and packed parameter vectors.
//!
//! Branch incidence is fixed for every loop:
//!
//! ```text
//!   B0: ground - node0    B1: node0 - node1
//!   B2: node1 - node2     B3: node2 - ground
//! ```

use std::fmt;

use thiserror::Error;

/// Element kind of a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchKind {
    Capacitor,
    Inductor,
    Junction,
    Absent,
}

impl BranchKind {
    pub const ALL: [BranchKind; 4] = [
        BranchKind::Capacitor,
        BranchKind::Inductor,
        BranchKind::Junction,
        BranchKind::Absent,
    ];

    /// Token used in circuit files.
    pub fn symbol(self) -> &'static str {
        match self {
            BranchKind::Capacitor => "C",
            BranchKind::Inductor => "L",
            BranchKind::Junction => "JJ",
            BranchKind::Absent => "none",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "C" => Some(BranchKind::Capacitor),
            "L" => Some(BranchKind::Inductor),
            "JJ" => Some(BranchKind::Junction),
            "none" => Some(BranchKind::Absent),
            _ => None,
        }
    }
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One branch of a loop with its component values in SI units.
///
/// Josephson energies are `E_J / h` in hertz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    Capacitor { capacitance: f64 },
    Inductor { inductance: f64 },
    Junction { capacitance: f64, josephson_energy: f64 },
    Absent,
}

impl Branch {
    pub fn kind(&self) -> BranchKind {
        match self {
            Branch::Capacitor { .. } => BranchKind::Capacitor,
            Branch::Inductor { .. } => BranchKind::Inductor,
            Branch::Junction { .. } => BranchKind::Junction,
            Branch::Absent => BranchKind::Absent,
        }
    }

    /// Capacitance contributed to the node matrix (C or C_J), zero otherwise.
    pub fn capacitance(&self) -> f64 {
        match *self {
            Branch::Capacitor { capacitance } | Branch::Junction { capacitance, .. } => capacitance,
            _ => 0.0,
        }
    }

    pub fn inverse_inductance(&self) -> f64 {
        match *self {
            Branch::Inductor { inductance } => 1.0 / inductance,
            _ => 0.0,
        }
    }

    pub fn josephson_energy(&self) -> Option<f64> {
        match *self {
            Branch::Junction { josephson_energy, .. } => Some(josephson_energy),
            _ => None,
        }
    }

    /// Component values in packing order.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Branch::Capacitor { capacitance } => vec![capacitance],
            Branch::Inductor { inductance } => vec![inductance],
            Branch::Junction {
                capacitance,
                josephson_energy,
            } => vec![capacitance, josephson_energy],
            Branch::Absent => Vec::new(),
        }
    }
}

/// Why a loop does or does not admit a quantum Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityReason {
    Valid,
    OnlyCapacitive,
    OnlyInductive,
    AllAbsent,
}

impl fmt::Display for ValidityReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValidityReason::Valid => "Valid",
            ValidityReason::OnlyCapacitive => "OnlyCapacitive",
            ValidityReason::OnlyInductive => "OnlyInductive",
            ValidityReason::AllAbsent => "AllAbsent",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidityReport {
    pub valid: bool,
    pub reason: ValidityReason,
}

impl ValidityReport {
    fn from_reason(reason: ValidityReason) -> Self {
        ValidityReport {
            valid: reason == ValidityReason::Valid,
            reason,
        }
    }
}

/// Branch kinds of a single loop, without component values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Topology(pub [BranchKind; 4]);

impl Topology {
    pub fn validate(&self) -> ValidityReport {
        let present: Vec<BranchKind> = self
            .0
            .iter()
            .copied()
            .filter(|k| *k != BranchKind::Absent)
            .collect();
        let reason = if present.is_empty() {
            ValidityReason::AllAbsent
        } else if present.contains(&BranchKind::Junction) {
            ValidityReason::Valid
        } else if present.iter().all(|k| *k == BranchKind::Capacitor) {
            ValidityReason::OnlyCapacitive
        } else if present.iter().all(|k| *k == BranchKind::Inductor) {
            ValidityReason::OnlyInductive
        } else {
            ValidityReason::Valid
        };
        ValidityReport::from_reason(reason)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().valid
    }

    /// All 4^4 kind assignments in lexicographic order.
    pub fn all() -> impl Iterator<Item = Topology> {
        (0..256usize).map(|code| {
            let mut kinds = [BranchKind::Absent; 4];
            for (b, kind) in kinds.iter_mut().enumerate() {
                *kind = BranchKind::ALL[(code >> (2 * (3 - b))) & 3];
            }
            Topology(kinds)
        })
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.0.iter().map(|k| k.symbol()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Every valid single-loop topology (225 of the 256 kind assignments).
pub fn enumerate_single_loop_topologies() -> Vec<Topology> {
    Topology::all().filter(Topology::is_valid).collect()
}

/// A four-branch loop threaded by a reduced external flux `phi_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopTopology {
    pub branches: [Branch; 4],
    /// Reduced external flux `2π Φx / Φ0`, radians.
    pub external_phase: f64,
}

impl LoopTopology {
    pub fn new(branches: [Branch; 4], external_phase: f64) -> Self {
        LoopTopology {
            branches,
            external_phase,
        }
    }

    pub fn topology(&self) -> Topology {
        Topology([
            self.branches[0].kind(),
            self.branches[1].kind(),
            self.branches[2].kind(),
            self.branches[3].kind(),
        ])
    }

    pub fn validate(&self) -> ValidityReport {
        self.topology().validate()
    }

    pub fn with_external_phase(mut self, phi: f64) -> Self {
        self.external_phase = phi;
        self
    }

    /// Builds a loop from kinds with one shared value per kind.
    pub fn from_topology(topology: Topology, values: &FixedParameters, external_phase: f64) -> Self {
        let mut branches = [Branch::Absent; 4];
        for (slot, kind) in branches.iter_mut().zip(topology.0) {
            *slot = values.branch(kind);
        }
        LoopTopology::new(branches, external_phase)
    }
}

/// Component values used when only the topology varies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedParameters {
    pub capacitance: f64,
    pub inductance: f64,
    pub junction_capacitance: f64,
    pub josephson_energy: f64,
}

impl Default for FixedParameters {
    fn default() -> Self {
        FixedParameters {
            capacitance: 50e-15,
            inductance: 20e-9,
            junction_capacitance: 5e-15,
            josephson_energy: 15e9,
        }
    }
}

impl FixedParameters {
    pub fn branch(&self, kind: BranchKind) -> Branch {
        match kind {
            BranchKind::Capacitor => Branch::Capacitor {
                capacitance: self.capacitance,
            },
            BranchKind::Inductor => Branch::Inductor {
                inductance: self.inductance,
            },
            BranchKind::Junction => Branch::Junction {
                capacitance: self.junction_capacitance,
                josephson_energy: self.josephson_energy,
            },
            BranchKind::Absent => Branch::Absent,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("a chain needs at least one loop")]
    EmptyChain,
    #[error("{loops} loops need {expected} coupling capacitors, got {got}")]
    CouplingCount {
        loops: usize,
        expected: usize,
        got: usize,
    },
    #[error("{field} must be strictly positive and finite, got {value}")]
    NonPositive { field: String, value: f64 },
    #[error("loop {index} is not quantizable: {reason}")]
    InvalidLoop {
        index: usize,
        reason: ValidityReason,
    },
    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterLength { expected: usize, got: usize },
}

/// A one-dimensional array of loops joined by coupling capacitors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCircuit {
    pub loops: Vec<LoopTopology>,
    pub couplings: Vec<f64>,
}

impl ChainCircuit {
    pub fn new(loops: Vec<LoopTopology>, couplings: Vec<f64>) -> Result<Self, CircuitError> {
        let chain = ChainCircuit { loops, couplings };
        chain.check_values()?;
        Ok(chain)
    }

    pub fn single(lp: LoopTopology) -> Self {
        ChainCircuit {
            loops: vec![lp],
            couplings: Vec::new(),
        }
    }

    /// Structural checks: counts and strictly positive component values.
    pub fn check_values(&self) -> Result<(), CircuitError> {
        if self.loops.is_empty() {
            return Err(CircuitError::EmptyChain);
        }
        if self.couplings.len() + 1 != self.loops.len() {
            return Err(CircuitError::CouplingCount {
                loops: self.loops.len(),
                expected: self.loops.len() - 1,
                got: self.couplings.len(),
            });
        }
        for (i, c) in self.couplings.iter().enumerate() {
            positive(&format!("couplings[{i}]"), *c)?;
        }
        for (i, lp) in self.loops.iter().enumerate() {
            for (b, br) in lp.branches.iter().enumerate() {
                let names: &[&str] = match br {
                    Branch::Capacitor { .. } => &["C"],
                    Branch::Inductor { .. } => &["L"],
                    Branch::Junction { .. } => &["CJ", "EJ"],
                    Branch::Absent => &[],
                };
                for (name, v) in names.iter().zip(br.values()) {
                    positive(&format!("loops[{i}].branches[{b}].{name}"), v)?;
                }
            }
        }
        Ok(())
    }

    /// Values plus per-loop validity.
    pub fn validate(&self) -> Result<(), CircuitError> {
        self.check_values()?;
        for (index, lp) in self.loops.iter().enumerate() {
            let report = lp.validate();
            if !report.valid {
                return Err(CircuitError::InvalidLoop {
                    index,
                    reason: report.reason,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    /// Sets the same external phase on every loop.
    pub fn with_external_phase(&self, phi: f64) -> Self {
        let mut out = self.clone();
        for lp in &mut out.loops {
            lp.external_phase = phi;
        }
        out
    }

    /// Slots of the packed parameter vector, in packing order.
    pub fn parameter_slots(&self) -> Vec<ParameterSlot> {
        let mut slots = Vec::new();
        for (l, lp) in self.loops.iter().enumerate() {
            for (b, br) in lp.branches.iter().enumerate() {
                let fields: &[Component] = match br {
                    Branch::Capacitor { .. } => &[Component::Capacitance],
                    Branch::Inductor { .. } => &[Component::Inductance],
                    Branch::Junction { .. } => {
                        &[Component::JunctionCapacitance, Component::JosephsonEnergy]
                    }
                    Branch::Absent => &[],
                };
                for &component in fields {
                    slots.push(ParameterSlot::Branch {
                        loop_index: l,
                        branch: b,
                        component,
                    });
                }
            }
        }
        for i in 0..self.couplings.len() {
            slots.push(ParameterSlot::Coupling(i));
        }
        slots
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_slots().len()
    }

    pub fn pack_parameters(&self) -> Vec<f64> {
        self.parameter_slots().iter().map(|s| self.get(*s)).collect()
    }

    pub fn with_parameters(&self, values: &[f64]) -> Result<Self, CircuitError> {
        let slots = self.parameter_slots();
        if slots.len() != values.len() {
            return Err(CircuitError::ParameterLength {
                expected: slots.len(),
                got: values.len(),
            });
        }
        let mut out = self.clone();
        for (slot, v) in slots.iter().zip(values) {
            out.set(*slot, *v);
        }
        Ok(out)
    }

    pub fn get(&self, slot: ParameterSlot) -> f64 {
        match slot {
            ParameterSlot::Coupling(i) => self.couplings[i],
            ParameterSlot::Branch {
                loop_index,
                branch,
                component,
            } => match (self.loops[loop_index].branches[branch], component) {
                (Branch::Capacitor { capacitance }, Component::Capacitance) => capacitance,
                (Branch::Inductor { inductance }, Component::Inductance) => inductance,
                (Branch::Junction { capacitance, .. }, Component::JunctionCapacitance) => capacitance,
                (Branch::Junction { josephson_energy, .. }, Component::JosephsonEnergy) => {
                    josephson_energy
                }
                (br, c) => panic!("slot {c:?} does not exist on branch {:?}", br.kind()),
            },
        }
    }

    pub fn set(&mut self, slot: ParameterSlot, value: f64) {
        match slot {
            ParameterSlot::Coupling(i) => self.couplings[i] = value,
            ParameterSlot::Branch {
                loop_index,
                branch,
                component,
            } => {
                let br = &mut self.loops[loop_index].branches[branch];
                match (br, component) {
                    (Branch::Capacitor { capacitance }, Component::Capacitance) => *capacitance = value,
                    (Branch::Inductor { inductance }, Component::Inductance) => *inductance = value,
                    (Branch::Junction { capacitance, .. }, Component::JunctionCapacitance) => {
                        *capacitance = value
                    }
                    (Branch::Junction { josephson_energy, .. }, Component::JosephsonEnergy) => {
                        *josephson_energy = value
                    }
                    (br, c) => panic!("slot {c:?} does not exist on branch {:?}", br.kind()),
                }
            }
        }
    }
}

fn positive(field: &str, value: f64) -> Result<(), CircuitError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CircuitError::NonPositive {
            field: field.to_string(),
            value,
        })
    }
}

/// Physical quantity held by a parameter slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Capacitance,
    Inductance,
    JunctionCapacitance,
    JosephsonEnergy,
}

/// Address of one entry of the packed parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParameterSlot {
    Branch {
        loop_index: usize,
        branch: usize,
        component: Component,
    },
    Coupling(usize),
}

impl ParameterSlot {
    pub fn component(&self) -> Component {
        match self {
            ParameterSlot::Branch { component, .. } => *component,
            ParameterSlot::Coupling(_) => Component::Capacitance,
        }
    }
}

/// Search bounds per component, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterBounds {
    pub capacitance: (f64, f64),
    pub inductance: (f64, f64),
    pub junction_capacitance: (f64, f64),
    pub josephson_energy: (f64, f64),
}

impl Default for ParameterBounds {
    fn default() -> Self {
        ParameterBounds {
            capacitance: (0.15e-15, 800e-15),
            inductance: (238e-12, 15000e-12),
            junction_capacitance: (3e-15, 6000e-15),
            josephson_energy: (0.15e9, 200e9),
        }
    }
}

impl ParameterBounds {
    pub fn for_component(&self, c: Component) -> (f64, f64) {
        match c {
            Component::Capacitance => self.capacitance,
            Component::Inductance => self.inductance,
            Component::JunctionCapacitance => self.junction_capacitance,
            Component::JosephsonEnergy => self.josephson_energy,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        [
            self.capacitance,
            self.inductance,
            self.junction_capacitance,
            self.josephson_energy,
        ]
        .iter()
        .all(|(lo, hi)| *lo > 0.0 && lo < hi)
    }
}
