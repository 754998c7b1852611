//! Experiment configuration: one JSON document, overridable from the command line.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rcsim_core::circuit::Topology;
use rcsim_core::engine::{EngineSettings, ExecOptions};
use rcsim_core::statevector::DEFAULT_QUBIT_CAP;
use rcsim_core::{Error, Precision, Result, SearchEffort};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub layers: usize,
    /// `line`, `ring` or `grid(rows,cols)`.
    pub topology: String,
    /// Defaults to the master seed.
    pub seed: Option<u64>,
}

impl Default for CircuitSpec {
    fn default() -> Self {
        Self { n_qubits: 12, layers: 14, topology: "grid(3,4)".into(), seed: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrokenEdgePolicy {
    /// Middle third of the circuit, one edge per qubit, cheapest contraction first.
    #[default]
    MiddleBand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproximationSpec {
    /// K; zero means exact contraction.
    #[serde(rename = "K")]
    pub broken_edges: usize,
    /// m, the number of configurations summed.
    pub m: u64,
    pub policy: BrokenEdgePolicy,
}

impl Default for ApproximationSpec {
    fn default() -> Self {
        Self { broken_edges: 2, m: 1, policy: BrokenEdgePolicy::MiddleBand }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CandidateSpec {
    /// Explicit open qubits; when absent the first `l` qubits are open.
    pub open_qubits: Option<Vec<usize>>,
    /// Open-qubit count, 4 unless given or implied by `open_qubits`.
    pub l: Option<usize>,
    /// M, the number of groups.
    #[serde(rename = "M")]
    pub groups: usize,
}

impl Default for CandidateSpec {
    fn default() -> Self {
        Self { open_qubits: None, l: None, groups: 1 << 12 }
    }
}

impl CandidateSpec {
    pub fn resolved_open_qubits(&self) -> Vec<usize> {
        self.open_qubits.clone().unwrap_or_else(|| (0..self.l.unwrap_or(4)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostprocessSpec {
    pub k: usize,
}

impl Default for PostprocessSpec {
    fn default() -> Self {
        Self { k: 1 << 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutionSpec {
    pub workers: usize,
    pub memory_budget_bytes: u64,
    pub precision: Precision,
    pub anneal_steps: usize,
    /// Largest circuit checked against the dense simulator.
    pub oracle_max_qubits: usize,
}

impl Default for ExecutionSpec {
    fn default() -> Self {
        Self {
            workers: 1,
            memory_budget_bytes: 80 << 20,
            precision: Precision::F64,
            anneal_steps: SearchEffort::default().anneal_steps,
            oracle_max_qubits: DEFAULT_QUBIT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub dir: PathBuf,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Everything one experiment needs. A single master seed feeds independent
/// random streams for the circuit, candidates, configurations, sampling and
/// path search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub circuit: CircuitSpec,
    pub approximation: ApproximationSpec,
    pub candidates: CandidateSpec,
    pub postprocess: PostprocessSpec,
    pub execution: ExecutionSpec,
    pub output: OutputPaths,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            circuit: CircuitSpec::default(),
            approximation: ApproximationSpec::default(),
            candidates: CandidateSpec::default(),
            postprocess: PostprocessSpec::default(),
            execution: ExecutionSpec::default(),
            output: OutputPaths::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub precision: Option<Precision>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(workers) = o.workers {
            self.execution.workers = workers;
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(precision) = o.precision {
            self.execution.precision = precision;
        }
    }

    pub fn circuit_seed(&self) -> u64 {
        self.circuit.seed.unwrap_or(self.seed)
    }

    pub fn topology(&self) -> Result<Topology> {
        self.circuit.topology.parse()
    }

    pub fn open_qubits(&self) -> Vec<usize> {
        self.candidates.resolved_open_qubits()
    }

    /// |S̃| = M · 2^l.
    pub fn candidate_size(&self) -> usize {
        self.candidates.groups.saturating_mul(1 << self.open_qubits().len().min(62))
    }

    pub fn settings(&self) -> EngineSettings {
        EngineSettings {
            memory_budget_bytes: self.execution.memory_budget_bytes,
            effort: SearchEffort { anneal_steps: self.execution.anneal_steps, seed: self.seed },
            exec: ExecOptions { workers: self.execution.workers, precision: self.execution.precision },
            ..EngineSettings::default()
        }
    }

    /// Cross-field checks; every message names the violated constraint.
    pub fn validate(&self) -> Result<()> {
        let n = self.circuit.n_qubits;
        let bad = |msg: String| Err(Error::Config(msg));
        if !(2..=64).contains(&n) {
            return bad(format!("circuit.n_qubits = {n} must be in 2..=64"));
        }
        if self.circuit.layers == 0 {
            return bad("circuit.layers must be at least 1".into());
        }
        self.topology()?;
        let open = self.open_qubits();
        if let (Some(explicit), Some(l)) = (&self.candidates.open_qubits, self.candidates.l) {
            if explicit.len() != l {
                return bad(format!("candidates.l = {l} disagrees with {} explicit open qubits", explicit.len()));
            }
        }
        if open.len() > n {
            return bad(format!("candidates.l = {} exceeds circuit.n_qubits = {n}", open.len()));
        }
        if open.len() > 30 {
            return bad(format!("candidates.l = {} must be at most 30", open.len()));
        }
        if open.iter().collect::<BTreeSet<_>>().len() != open.len() {
            return bad("candidates.open_qubits must be distinct".into());
        }
        if let Some(q) = open.iter().find(|&&q| q >= n) {
            return bad(format!("open qubit {q} is not below circuit.n_qubits = {n}"));
        }
        if self.candidates.groups == 0 {
            return bad("candidates.M must be at least 1".into());
        }
        if open.len() == n && self.candidates.groups > 1 {
            return bad("candidates.M must be 1 when every qubit is open".into());
        }
        let k = self.postprocess.k;
        let size = self.candidate_size();
        if k == 0 || k > size {
            return bad(format!("postprocess.k = {k} must satisfy 1 <= k <= |S| = M * 2^l = {size}"));
        }
        let big_k = self.approximation.broken_edges;
        if big_k > 30 {
            return bad(format!("approximation.K = {big_k} must be at most 30"));
        }
        let m = self.approximation.m;
        if m == 0 || m > 1u64 << big_k {
            return bad(format!("approximation.m = {m} must satisfy 1 <= m <= 2^K = {}", 1u64 << big_k));
        }
        if self.execution.workers == 0 {
            return bad("execution.workers must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"seed": 9, "approximation": {"K": 3}}"#).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.approximation.broken_edges, 3);
        assert_eq!(cfg.approximation.m, 1);
        assert!(ExperimentConfig::from_json(r#"{"sed": 9}"#).is_err());
    }

    #[test]
    fn overrides_win() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(&Overrides {
            seed: Some(5),
            workers: Some(3),
            out: Some("x".into()),
            precision: Some(Precision::F32),
        });
        assert_eq!((cfg.seed, cfg.execution.workers), (5, 3));
        assert_eq!(cfg.output.dir, PathBuf::from("x"));
        assert_eq!(cfg.execution.precision, Precision::F32);
    }

    #[test]
    fn constraint_messages() {
        let mut cfg = ExperimentConfig::default();
        cfg.postprocess.k = cfg.candidate_size() + 1;
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("postprocess.k"), "{msg}");
        let mut cfg = ExperimentConfig::default();
        cfg.approximation.m = 5;
        assert!(cfg.validate().unwrap_err().to_string().contains("approximation.m"));
        let mut cfg = ExperimentConfig::default();
        cfg.candidates.open_qubits = Some(vec![1, 1, 2, 3]);
        assert!(cfg.validate().is_err());
    }
}
