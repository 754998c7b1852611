//! Sycamore-style random circuits: cycles of random single-qubit gates from
//! {√X, √Y, √W} followed by a layer of fSim entanglers on a coupler pattern.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_6};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::statevector::DEFAULT_QUBIT_CAP;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    SqrtX,
    SqrtY,
    SqrtW,
    TwoQubit,
}

impl GateKind {
    pub const SINGLE: [GateKind; 3] = [GateKind::SqrtX, GateKind::SqrtY, GateKind::SqrtW];

    pub fn arity(self) -> usize {
        match self {
            GateKind::TwoQubit => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::SqrtX => "sqrt_x",
            GateKind::SqrtY => "sqrt_y",
            GateKind::SqrtW => "sqrt_w",
            GateKind::TwoQubit => "two_qubit",
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt_x" => Ok(GateKind::SqrtX),
            "sqrt_y" => Ok(GateKind::SqrtY),
            "sqrt_w" => Ok(GateKind::SqrtW),
            "two_qubit" => Ok(GateKind::TwoQubit),
            other => Err(Error::Input(format!("unknown gate kind {other:?}"))),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli X, Y and W = (X+Y)/√2, row-major.
pub fn pauli(kind: GateKind) -> [Complex64; 4] {
    let z = c(0.0, 0.0);
    match kind {
        GateKind::SqrtX => [z, c(1.0, 0.0), c(1.0, 0.0), z],
        GateKind::SqrtY => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        GateKind::SqrtW => [z, c(FRAC_1_SQRT_2, -FRAC_1_SQRT_2), c(FRAC_1_SQRT_2, FRAC_1_SQRT_2), z],
        GateKind::TwoQubit => panic!("no Pauli for a two-qubit gate"),
    }
}

/// fSim(θ, φ) in the |00>, |01>, |10>, |11> basis.
pub fn fsim(theta: f64, phi: f64) -> Vec<Complex64> {
    let (s, co) = theta.sin_cos();
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    vec![
        o,
        z,
        z,
        z, //
        z,
        c(co, 0.0),
        c(0.0, -s),
        z, //
        z,
        c(0.0, -s),
        c(co, 0.0),
        z, //
        z,
        z,
        z,
        Complex64::from_polar(1.0, -phi),
    ]
}

/// Fixed matrix of a gate kind, row-major (2×2 or 4×4).
///
/// Square roots use √P = ((1+i)/2)·I + ((1−i)/2)·P, which for X gives
/// ½[[1+i, 1−i], [1−i, 1+i]]. The entangler is fSim(π/2, π/6).
pub fn gate_unitary(kind: GateKind) -> Vec<Complex64> {
    match kind {
        GateKind::TwoQubit => fsim(FRAC_PI_2, FRAC_PI_6),
        single => {
            let a = c(0.5, 0.5);
            let b = c(0.5, -0.5);
            let p = pauli(single);
            vec![a + b * p[0], b * p[1], b * p[2], a + b * p[3]]
        }
    }
}

/// Row-major product of two square matrices of side `dim`.
pub fn matmul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn dagger(a: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[j * dim + i] = a[i * dim + j].conj();
        }
    }
    out
}

/// Largest elementwise deviation of U†U from the identity.
pub fn unitarity_defect(u: &[Complex64], dim: usize) -> f64 {
    let p = matmul(&dagger(u, dim), u, dim);
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[i * dim + j] - c(target, 0.0)).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// Row-major; for two-qubit gates the first target is the more significant bit.
    pub unitary: Vec<Complex64>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Self { kind, targets, unitary: gate_unitary(kind) }
    }

    pub fn with_matrix(kind: GateKind, targets: Vec<usize>, unitary: Vec<Complex64>) -> Result<Self> {
        let gate = Self { kind, targets, unitary };
        gate.validate()?;
        Ok(gate)
    }

    pub fn dim(&self) -> usize {
        1 << self.targets.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::Input(format!(
                "{} gate needs {} target(s), got {}",
                self.kind.name(),
                self.kind.arity(),
                self.targets.len()
            )));
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::Input("two-qubit gate with repeated target".into()));
        }
        let dim = self.dim();
        if self.unitary.len() != dim * dim {
            return Err(Error::Input(format!("matrix has {} entries, expected {}", self.unitary.len(), dim * dim)));
        }
        let defect = unitarity_defect(&self.unitary, dim);
        if defect > UNITARY_TOL {
            return Err(Error::Input(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        Ok(())
    }
}

/// Qubit connectivity graph and its coupler activation sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Line,
    Ring,
    Grid { rows: usize, cols: usize },
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Line => f.write_str("line"),
            Topology::Ring => f.write_str("ring"),
            Topology::Grid { rows, cols } => write!(f, "grid({rows},{cols})"),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "line" => return Ok(Topology::Line),
            "ring" => return Ok(Topology::Ring),
            _ => {}
        }
        let inner = t
            .strip_prefix("grid(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Config(format!("unknown topology {s:?}")))?;
        let dims: Vec<usize> = inner
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("bad grid dimensions in {s:?}")))?;
        match dims[..] {
            [rows, cols] if rows > 0 && cols > 0 => Ok(Topology::Grid { rows, cols }),
            _ => Err(Error::Config(format!("grid needs two positive dimensions: {s:?}"))),
        }
    }
}

impl Topology {
    /// Names of the coupler patterns, in activation order; cycled over two-qubit layers.
    pub fn pattern_sequence(&self, n: usize) -> &'static [&'static str] {
        match self {
            Topology::Line => &["A", "B"],
            Topology::Ring if n % 2 == 1 => &["A", "B", "C"],
            Topology::Ring => &["A", "B"],
            Topology::Grid { .. } => &["A", "B", "C", "D", "C", "D", "A", "B"],
        }
    }

    /// Qubit pairs activated by the named pattern. Qubits `>= n` are absent.
    pub fn couplers(&self, n: usize, pattern: &str) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        match *self {
            Topology::Line | Topology::Ring => {
                let start = match pattern {
                    "A" => Some(0),
                    "B" => Some(1),
                    _ => None,
                };
                if let Some(start) = start {
                    let mut i = start;
                    while i + 1 < n {
                        pairs.push((i, i + 1));
                        i += 2;
                    }
                }
                // Closing edge: joins B for even rings, gets its own pattern for odd ones.
                if *self == Topology::Ring && n > 2 {
                    let wrap_pattern = if n.is_multiple_of(2) { "B" } else { "C" };
                    if pattern == wrap_pattern {
                        pairs.push((0, n - 1));
                    }
                }
            }
            Topology::Grid { rows, cols } => {
                let id = |r: usize, c: usize| r * cols + c;
                let (horizontal, parity) = match pattern {
                    "A" => (true, 0),
                    "B" => (true, 1),
                    "C" => (false, 0),
                    "D" => (false, 1),
                    _ => return pairs,
                };
                for r in 0..rows {
                    for c in 0..cols {
                        let other = if horizontal {
                            (c % 2 == parity && c + 1 < cols).then(|| id(r, c + 1))
                        } else {
                            (r % 2 == parity && r + 1 < rows).then(|| id(r + 1, c))
                        };
                        if let Some(o) = other {
                            if id(r, c) < n && o < n {
                                pairs.push((id(r, c), o));
                            }
                        }
                    }
                }
            }
        }
        pairs
    }

    pub fn capacity(&self, n: usize) -> usize {
        match *self {
            Topology::Line | Topology::Ring => n,
            Topology::Grid { rows, cols } => rows * cols,
        }
    }

    /// Every coupler of the graph.
    pub fn edges(&self, n: usize) -> Vec<(usize, usize)> {
        let mut all: Vec<_> = ["A", "B", "C", "D"].iter().flat_map(|p| self.couplers(n, p)).collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub gates: Vec<Gate>,
}

/// A layered circuit acting on |0…0>. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitJson", into = "CircuitJson")]
pub struct Circuit {
    pub n_qubits: usize,
    pub seed: u64,
    pub topology: Topology,
    pub layers: Vec<Layer>,
    /// Pattern name of each two-qubit layer, in order.
    pub coupler_pattern: Vec<String>,
}

impl Circuit {
    /// Builds a circuit from explicit layers, checking qubit-disjointness per layer.
    pub fn from_layers(n_qubits: usize, seed: u64, topology: Topology, layers: Vec<Layer>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 64 {
            return Err(Error::Config(format!("n_qubits must be in 1..=64, got {n_qubits}")));
        }
        for (li, layer) in layers.iter().enumerate() {
            let mut seen = vec![false; n_qubits];
            for gate in &layer.gates {
                gate.validate()?;
                for &q in &gate.targets {
                    if q >= n_qubits {
                        return Err(Error::Input(format!("layer {li}: qubit {q} out of range")));
                    }
                    if std::mem::replace(&mut seen[q], true) {
                        return Err(Error::Input(format!("layer {li}: qubit {q} used twice")));
                    }
                }
            }
        }
        let seq = topology.pattern_sequence(n_qubits);
        let two_qubit_layers = layers.iter().filter(|l| l.gates.iter().any(|g| g.kind == GateKind::TwoQubit)).count();
        let coupler_pattern = (0..two_qubit_layers).map(|i| seq[i % seq.len()].to_string()).collect();
        Ok(Self { n_qubits, seed, topology, layers, coupler_pattern })
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.gates.len()).sum()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flat_map(|l| l.gates.iter())
    }

    pub fn exceeds_exact_cap(&self, cap: usize) -> bool {
        self.n_qubits > cap
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Random circuit of `n_layers` cycles; each cycle is a layer of random
/// single-qubit gates followed by the next coupler pattern of fSim gates.
///
/// One random draw per single-qubit slot: a uniform pick of three kinds on
/// a qubit's first slot, afterwards a pick among the two kinds differing
/// from the previous one on that qubit.
pub fn gen_random_circuit(n_qubits: usize, n_layers: usize, topology: Topology, seed: u64) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(Error::Config(format!("need at least 2 qubits, got {n_qubits}")));
    }
    if n_layers == 0 {
        return Err(Error::Config("need at least one layer".into()));
    }
    if n_qubits > topology.capacity(n_qubits) {
        return Err(Error::Config(format!("{topology} cannot hold {n_qubits} qubits")));
    }
    if topology.edges(n_qubits).is_empty() {
        return Err(Error::Config(format!("{topology} on {n_qubits} qubits has no couplers")));
    }
    if n_qubits > DEFAULT_QUBIT_CAP {
        log::warn!("{n_qubits} qubits exceeds the exact-simulation cap of {DEFAULT_QUBIT_CAP}");
    }
    let mut rng = stream_rng(seed, Stream::Circuit);
    let seq = topology.pattern_sequence(n_qubits);
    let mut previous: Vec<Option<GateKind>> = vec![None; n_qubits];
    let mut layers = Vec::with_capacity(2 * n_layers);
    for cycle in 0..n_layers {
        let singles = (0..n_qubits)
            .map(|q| {
                let kind = match previous[q] {
                    None => GateKind::SINGLE[rng.random_range(0..3)],
                    Some(prev) => {
                        let others: Vec<GateKind> = GateKind::SINGLE.iter().copied().filter(|&k| k != prev).collect();
                        others[rng.random_range(0..2)]
                    }
                };
                previous[q] = Some(kind);
                Gate::new(kind, vec![q])
            })
            .collect();
        layers.push(Layer { gates: singles });
        let pattern = seq[cycle % seq.len()];
        let doubles = topology
            .couplers(n_qubits, pattern)
            .into_iter()
            .map(|(a, b)| Gate::new(GateKind::TwoQubit, vec![a, b]))
            .collect();
        layers.push(Layer { gates: doubles });
    }
    let mut circuit = Circuit::from_layers(n_qubits, seed, topology, layers)?;
    // Keep the pattern sequence even when a pattern happens to be empty.
    circuit.coupler_pattern = (0..n_layers).map(|i| seq[i % seq.len()].to_string()).collect();
    Ok(circuit)
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    kind: String,
    targets: Vec<usize>,
    matrix: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    gates: Vec<GateJson>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n_qubits: usize,
    seed: u64,
    topology: String,
    layers: Vec<LayerJson>,
}

impl From<Circuit> for CircuitJson {
    fn from(c: Circuit) -> Self {
        CircuitJson {
            n_qubits: c.n_qubits,
            seed: c.seed,
            topology: c.topology.to_string(),
            layers: c
                .layers
                .into_iter()
                .map(|l| LayerJson {
                    gates: l
                        .gates
                        .into_iter()
                        .map(|g| GateJson {
                            kind: g.kind.name().to_string(),
                            targets: g.targets,
                            matrix: g.unitary.iter().map(|z| [z.re, z.im]).collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(j: CircuitJson) -> Result<Self> {
        let topology: Topology = j.topology.parse()?;
        let layers = j
            .layers
            .into_iter()
            .map(|l| {
                let gates = l
                    .gates
                    .into_iter()
                    .map(|g| {
                        let unitary = g.matrix.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                        Gate::with_matrix(g.kind.parse()?, g.targets, unitary)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Layer { gates })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut circuit = Circuit::from_layers(j.n_qubits, j.seed, topology, layers)?;
        let seq = topology.pattern_sequence(j.n_qubits);
        // Generated circuits alternate single/two-qubit layers; count the latter by position.
        let cycles = circuit.layers.len() / 2;
        if circuit.layers.len() % 2 == 0
            && circuit.layers.iter().step_by(2).all(|l| l.gates.iter().all(|g| g.kind != GateKind::TwoQubit))
        {
            circuit.coupler_pattern = (0..cycles).map(|i| seq[i % seq.len()].to_string()).collect();
        }
        Ok(circuit)
    }
}
