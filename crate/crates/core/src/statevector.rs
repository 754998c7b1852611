//! Dense state-vector simulation, used as ground truth for small circuits.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::Bitstring;

/// 2^24 amplitudes at 16 bytes each is 256 MiB.
pub const DEFAULT_QUBIT_CAP: usize = 24;

const DUMP_MAGIC: &[u8; 4] = b"QSVD";
const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |0…0>.
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amplitudes }
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1usize << n_qubits {
            return Err(Error::Input(format!("{} amplitudes for {n_qubits} qubits", amplitudes.len())));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, bits: Bitstring) -> Complex64 {
        self.amplitudes[bits as usize]
    }

    /// |<bits|ψ>|² for a packed bitstring.
    pub fn probability(&self, bits: Bitstring) -> f64 {
        self.amplitudes[bits as usize].norm_sqr()
    }

    /// |<s|ψ>|² for an ASCII bitstring with qubit 0 first.
    pub fn ideal_probability(&self, bitstring: &str) -> Result<f64> {
        if bitstring.len() != self.n_qubits {
            return Err(Error::Input(format!(
                "bitstring of length {} for a {}-qubit state",
                bitstring.len(),
                self.n_qubits
            )));
        }
        Ok(self.probability(crate::parse_bitstring(bitstring)?))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect::<CompensatedSum>().value()
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        match gate.targets[..] {
            [q] => self.apply_single(q, &gate.unitary),
            [q0, q1] => self.apply_two(q0, q1, &gate.unitary),
            _ => unreachable!("gates act on one or two qubits"),
        }
    }

    /// In-place 2×2 update over amplitude pairs differing in bit `q`.
    pub fn apply_single(&mut self, q: usize, u: &[Complex64]) {
        let stride = 1usize << q;
        let (u00, u01, u10, u11) = (u[0], u[1], u[2], u[3]);
        for block in (0..self.amplitudes.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i + stride];
                self.amplitudes[i] = u00 * a0 + u01 * a1;
                self.amplitudes[i + stride] = u10 * a0 + u11 * a1;
            }
        }
    }

    /// In-place 4×4 update; matrix row index is `2·bit(q0) + bit(q1)`.
    pub fn apply_two(&mut self, q0: usize, q1: usize, u: &[Complex64]) {
        let m0 = 1usize << q0;
        let m1 = 1usize << q1;
        for base in 0..self.amplitudes.len() {
            if base & (m0 | m1) != 0 {
                continue;
            }
            let idx = [base, base | m1, base | m0, base | m0 | m1];
            let a = idx.map(|i| self.amplitudes[i]);
            for (row, &i) in idx.iter().enumerate() {
                let r = &u[row * 4..row * 4 + 4];
                self.amplitudes[i] = r[0] * a[0] + r[1] * a[1] + r[2] * a[2] + r[3] * a[3];
            }
        }
    }

    /// Writes the 16-byte header (magic, version, qubit count, reserved)
    /// followed by little-endian f64 (re, im) pairs.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(self.n_qubits as u32).to_le_bytes())?;
        w.write_all(&0u32.to_le_bytes())?;
        for a in &self.amplitudes {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != DUMP_MAGIC {
            return Err(Error::Input("not a state-vector dump (bad magic)".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != DUMP_VERSION {
            return Err(Error::Input(format!("unsupported dump version {version}")));
        }
        let n = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        if n > 40 {
            return Err(Error::Capacity { what: format!("dump with {n} qubits"), cap: 40 });
        }
        let mut buf = vec![0u8; 16 << n];
        r.read_exact(&mut buf)?;
        let amplitudes = buf
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(Self { n_qubits: n, amplitudes })
    }
}

/// Evolves |0…0> through every layer, refusing circuits above `DEFAULT_QUBIT_CAP`.
pub fn simulate_exact(circuit: &Circuit) -> Result<StateVector> {
    simulate_exact_with_cap(circuit, DEFAULT_QUBIT_CAP)
}

pub fn simulate_exact_with_cap(circuit: &Circuit, cap: usize) -> Result<StateVector> {
    if circuit.n_qubits > cap {
        return Err(Error::Capacity { what: format!("{}-qubit state vector", circuit.n_qubits), cap });
    }
    let mut state = StateVector::zero_state(circuit.n_qubits);
    for gate in circuit.gates() {
        state.apply_gate(gate);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{dagger, gen_random_circuit, GateKind, Layer, Topology};

    #[test]
    fn empty_circuit_is_identity() {
        let circuit = Circuit::from_layers(3, 0, Topology::Line, vec![]).unwrap();
        let state = simulate_exact(&circuit).unwrap();
        assert_eq!(state.amplitude(0), Complex64::new(1.0, 0.0));
        assert!(state.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
        assert_eq!(state.ideal_probability("000").unwrap(), 1.0);
        assert_eq!(state.ideal_probability("010").unwrap(), 0.0);
        assert!(matches!(state.ideal_probability("01"), Err(Error::Input(_))));
    }

    #[test]
    fn sqrt_x_gives_even_split() {
        let layer = Layer { gates: vec![Gate::new(GateKind::SqrtX, vec![0])] };
        let circuit = Circuit::from_layers(1, 0, Topology::Line, vec![layer]).unwrap();
        let p = simulate_exact(&circuit).unwrap().probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_qubit_first_target_is_high_bit() {
        // CNOT with control = first target.
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let cnot = vec![o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z];
        let mut state = StateVector::zero_state(3);
        state.apply_single(2, &[z, o, o, z]);
        state.apply_two(2, 0, &cnot);
        assert!((state.probability(0b101) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_conserved_and_gates_invertible() {
        let circuit = gen_random_circuit(8, 8, Topology::Grid { rows: 2, cols: 4 }, 11).unwrap();
        let mut state = StateVector::zero_state(8);
        for layer in &circuit.layers {
            for g in &layer.gates {
                state.apply_gate(g);
            }
            assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        }
        let before = state.clone();
        for g in circuit.layers[3].gates.iter() {
            state.apply_gate(g);
            let inv = Gate { unitary: dagger(&g.unitary, g.dim()), ..g.clone() };
            state.apply_gate(&inv);
        }
        let diff = before.amplitudes().iter().zip(state.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
    }

    #[test]
    fn capacity_is_enforced() {
        let circuit = gen_random_circuit(6, 1, Topology::Line, 0).unwrap();
        match simulate_exact_with_cap(&circuit, 5) {
            Err(Error::Capacity { cap, .. }) => assert_eq!(cap, 5),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn dump_roundtrip() {
        let circuit = gen_random_circuit(5, 3, Topology::Ring, 2).unwrap();
        let state = simulate_exact(&circuit).unwrap();
        let mut buf = Vec::new();
        state.write_dump(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"QSVD");
        assert_eq!(buf.len(), 16 + 16 * 32);
        assert_eq!(StateVector::read_dump(&buf[..]).unwrap(), state);
        buf[0] = b'X';
        assert!(StateVector::read_dump(&buf[..]).is_err());
    }
}
