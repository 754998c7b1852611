//! Approximate sampling of random quantum circuits.
//!
//! The pipeline is: generate a layered random circuit ([`circuit`]), map it
//! to a tensor network ([`network`]), plan a sliced contraction order under
//! a memory budget ([`path`]), contract it exactly or with a subset of
//! broken-edge configurations ([`engine`]), and post-process the resulting
//! candidate probabilities with direct sampling or top-k selection
//! ([`metrics`]). A dense state-vector simulator ([`statevector`]) serves as
//! ground truth for small circuits.

pub mod circuit;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod network;
pub mod numeric;
pub mod path;
pub mod rng;
pub mod statevector;

pub use circuit::{Circuit, Gate, GateKind, Topology};
pub use engine::{AmplitudeBatch, BrokenEdgeConfig, ExecOptions, Precision};
pub use error::{Error, Result};
pub use metrics::{CandidateSet, MetricsReport, SampleSet};
pub use network::{Label, TensorNetwork};
pub use path::{ContractionPlan, SearchEffort};
pub use statevector::StateVector;

/// Bitstrings are packed little-endian: bit `q` holds the value of qubit `q`.
pub type Bitstring = u64;

/// Renders a bitstring as ASCII with qubit 0 first.
pub fn bitstring_to_string(bits: Bitstring, n: usize) -> String {
    (0..n).map(|q| if bits >> q & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`bitstring_to_string`].
pub fn parse_bitstring(s: &str) -> Result<Bitstring> {
    if s.len() > 64 {
        return Err(Error::Input(format!("bitstring longer than 64 bits: {}", s.len())));
    }
    s.chars().enumerate().try_fold(0u64, |acc, (q, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << q),
        other => Err(Error::Input(format!("invalid bitstring character {other:?}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstring_text_roundtrip() {
        assert_eq!(bitstring_to_string(0b1101, 5), "10110");
        assert_eq!(parse_bitstring("10110").unwrap(), 0b1101);
        assert!(parse_bitstring("10a").is_err());
    }
}
