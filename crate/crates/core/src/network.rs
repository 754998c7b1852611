//! Tensor-network form of a circuit amplitude computation.
//!
//! Every gate becomes one tensor whose indices are `[outs.., ins..]`. Each
//! wire segment between two gates on a qubit is one index label shared by
//! exactly two tensors. Input legs are pinned to |0>; output legs are either
//! left open or pinned to the bits of a candidate group. All bond
//! dimensions are 2, and tensor data is row-major with the first index most
//! significant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::Bitstring;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRole {
    Input,
    Internal,
    Output,
}

/// Where a wire segment sits in the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeInfo {
    pub qubit: usize,
    /// Index of the layer that produced this segment; `None` for input legs.
    pub after_layer: Option<usize>,
    pub role: EdgeRole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub id: usize,
    pub indices: Vec<Label>,
    pub data: Vec<Complex64>,
}

impl Tensor {
    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    /// Pins every index for which `value_of` returns a bit, dropping it.
    pub fn restrict(&self, value_of: impl Fn(Label) -> Option<u8>) -> Tensor {
        let r = self.rank();
        let mut keep = Vec::with_capacity(r);
        let mut offset = 0usize;
        for (p, &label) in self.indices.iter().enumerate() {
            let stride = 1usize << (r - 1 - p);
            match value_of(label) {
                Some(bit) => offset += stride * bit as usize,
                None => keep.push((label, stride)),
            }
        }
        if keep.len() == r {
            return self.clone();
        }
        let out_rank = keep.len();
        let data = (0..1usize << out_rank)
            .map(|j| {
                let src = keep.iter().enumerate().fold(offset, |acc, (p, &(_, stride))| {
                    if j >> (out_rank - 1 - p) & 1 == 1 {
                        acc + stride
                    } else {
                        acc
                    }
                });
                self.data[src]
            })
            .collect();
        Tensor { id: self.id, indices: keep.into_iter().map(|(l, _)| l).collect(), data }
    }
}

/// Which output legs stay open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    /// Open qubits, in the order their bits appear in the result.
    pub open_qubits: Vec<usize>,
    pub closed: ClosedOutputs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedOutputs {
    /// Non-open outputs also stay open (batch every group in one contraction).
    /// The result then covers all qubits, listed after the open ones in qubit order.
    Open,
    /// Non-open outputs are pinned to these bits.
    Fixed(Bitstring),
}

impl OutputSpec {
    pub fn all_open(n: usize) -> Self {
        Self { open_qubits: (0..n).collect(), closed: ClosedOutputs::Open }
    }

    pub fn fixed(open_qubits: Vec<usize>, bits: Bitstring) -> Self {
        Self { open_qubits, closed: ClosedOutputs::Fixed(bits) }
    }
}

#[derive(Debug, Clone)]
pub struct TensorNetwork {
    pub tensors: Vec<Tensor>,
    /// Labels left uncontracted, in result order.
    pub open_indices: Vec<Label>,
    /// Labels pinned to a value before contraction.
    pub fixed_indices: BTreeMap<Label, u8>,
    /// Qubit behind each open index, when built from a circuit.
    pub output_qubits: Vec<usize>,
    pub edge_info: BTreeMap<Label, EdgeInfo>,
    /// Number of circuit layers, when built from a circuit.
    pub n_layers: usize,
}

impl TensorNetwork {
    /// Assembles a network from raw tensors and checks its invariants.
    pub fn from_tensors(
        tensors: Vec<Tensor>,
        open_indices: Vec<Label>,
        fixed_indices: BTreeMap<Label, u8>,
    ) -> Result<Self> {
        let net = Self {
            tensors,
            open_indices,
            fixed_indices,
            output_qubits: Vec::new(),
            edge_info: BTreeMap::new(),
            n_layers: 0,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        let mut count: BTreeMap<Label, usize> = BTreeMap::new();
        for t in &self.tensors {
            if t.data.len() != 1usize << t.rank() {
                return Err(Error::Input(format!(
                    "tensor {} has {} entries for rank {}",
                    t.id,
                    t.data.len(),
                    t.rank()
                )));
            }
            let distinct: BTreeSet<_> = t.indices.iter().collect();
            if distinct.len() != t.rank() {
                return Err(Error::Input(format!("tensor {} repeats an index", t.id)));
            }
            for &l in &t.indices {
                *count.entry(l).or_default() += 1;
            }
        }
        if let Some((l, _)) = count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::Input(format!("index {l} appears on more than two tensors")));
        }
        for l in &self.open_indices {
            if count.get(l) != Some(&1) {
                return Err(Error::Input(format!("open index {l} must sit on exactly one tensor")));
            }
            if self.fixed_indices.contains_key(l) {
                return Err(Error::Input(format!("index {l} is both open and fixed")));
            }
        }
        for (l, &v) in &self.fixed_indices {
            if !count.contains_key(l) || v > 1 {
                return Err(Error::Input(format!("bad fixed index {l}={v}")));
            }
        }
        for (l, &c) in &count {
            if c == 1 && !self.fixed_indices.contains_key(l) && !self.open_indices.contains(l) {
                return Err(Error::Input(format!("dangling index {l} is neither open nor fixed")));
            }
        }
        Ok(())
    }

    /// Every label in the network, sorted.
    pub fn labels(&self) -> BTreeSet<Label> {
        self.tensors.iter().flat_map(|t| t.indices.iter().copied()).collect()
    }

    /// Labels shared by two tensors.
    pub fn bond_labels(&self) -> BTreeSet<Label> {
        let mut count: BTreeMap<Label, usize> = BTreeMap::new();
        for t in &self.tensors {
            for &l in &t.indices {
                *count.entry(l).or_default() += 1;
            }
        }
        count.into_iter().filter(|&(_, c)| c == 2).map(|(l, _)| l).collect()
    }

    pub fn largest_tensor_bytes(&self) -> u64 {
        self.tensors.iter().map(|t| 16u64 << t.rank()).max().unwrap_or(16)
    }
}

/// Converts a circuit into the network for the amplitudes selected by `output`.
pub fn circuit_to_network(circuit: &Circuit, output: &OutputSpec) -> Result<TensorNetwork> {
    let n = circuit.n_qubits;
    let mut seen = vec![false; n];
    for &q in &output.open_qubits {
        if q >= n {
            return Err(Error::Input(format!("open qubit {q} out of range for {n} qubits")));
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::Input(format!("duplicate open qubit {q}")));
        }
    }

    let mut next_label = 0u32;
    let mut fresh = || {
        let l = Label(next_label);
        next_label += 1;
        l
    };
    let mut edge_info = BTreeMap::new();
    let mut fixed = BTreeMap::new();
    // Current dangling wire label per qubit; None until the first gate.
    let mut wire: Vec<Option<Label>> = vec![None; n];
    let mut tensors = Vec::with_capacity(circuit.gate_count() + n);

    for (li, layer) in circuit.layers.iter().enumerate() {
        for gate in &layer.gates {
            let ins: Vec<Label> = gate
                .targets
                .iter()
                .map(|&q| {
                    wire[q].unwrap_or_else(|| {
                        let l = fresh();
                        edge_info.insert(l, EdgeInfo { qubit: q, after_layer: None, role: EdgeRole::Input });
                        fixed.insert(l, 0u8);
                        l
                    })
                })
                .collect();
            let outs: Vec<Label> = gate
                .targets
                .iter()
                .map(|&q| {
                    let l = fresh();
                    edge_info.insert(l, EdgeInfo { qubit: q, after_layer: Some(li), role: EdgeRole::Internal });
                    wire[q] = Some(l);
                    l
                })
                .collect();
            let indices = outs.into_iter().chain(ins).collect();
            tensors.push(Tensor { id: tensors.len(), indices, data: gate.unitary.clone() });
        }
    }

    // Untouched qubits get an explicit |0> vector.
    for (q, slot) in wire.iter_mut().enumerate() {
        if slot.is_none() {
            let l = fresh();
            edge_info.insert(l, EdgeInfo { qubit: q, after_layer: None, role: EdgeRole::Internal });
            tensors.push(Tensor {
                id: tensors.len(),
                indices: vec![l],
                data: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            });
            *slot = Some(l);
        }
    }
    let out_label: Vec<Label> = wire.into_iter().map(Option::unwrap).collect();
    for &l in &out_label {
        edge_info.get_mut(&l).unwrap().role = EdgeRole::Output;
    }

    let mut output_qubits = output.open_qubits.clone();
    match output.closed {
        ClosedOutputs::Open => output_qubits.extend((0..n).filter(|&q| !seen[q])),
        ClosedOutputs::Fixed(bits) => {
            for q in (0..n).filter(|&q| !seen[q]) {
                fixed.insert(out_label[q], (bits >> q & 1) as u8);
            }
        }
    }
    let open_indices = output_qubits.iter().map(|&q| out_label[q]).collect();
    let net = TensorNetwork {
        tensors,
        open_indices,
        fixed_indices: fixed,
        output_qubits,
        edge_info,
        n_layers: circuit.layers.len(),
    };
    net.validate()?;
    Ok(net)
}
