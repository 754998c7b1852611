//! Worker pool over independent subtasks with an ordered reducer.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use num_complex::{Complex, Complex64};
use num_traits::Float;

use super::kernel::{contract_pair, DenseTensor};
use super::{resolve_config, BrokenEdgeConfig, ExecOptions, ExecStats, Precision, SubtaskTiming};
use crate::error::{Error, Result};
use crate::network::{Label, Tensor, TensorNetwork};
use crate::numeric::ComplexAccumulator;
use crate::path::{ContractionPlan, BYTES_PER_ELEMENT, FLOPS_PER_CMAC};

#[derive(Debug, Clone)]
pub struct ParallelOutcome {
    /// Summed result over the network's open indices, first index most significant.
    pub amplitudes: Vec<Complex64>,
    pub timings: Vec<SubtaskTiming>,
    pub stats: ExecStats,
}

struct Job<'a> {
    leaves: Vec<Tensor>,
    plan: &'a ContractionPlan,
    open: &'a [Label],
    config: BrokenEdgeConfig,
    precision: Precision,
}

impl Job<'_> {
    fn n_slices(&self) -> usize {
        1 << self.plan.sliced.len()
    }

    fn n_subtasks(&self) -> usize {
        self.config.m() * self.n_slices()
    }

    fn subtask_label(&self, id: usize) -> String {
        let (c, s) = (id / self.n_slices(), id % self.n_slices());
        let mut bits = self.config.config_bits(c);
        if !self.plan.sliced.is_empty() {
            bits.push(':');
            bits.extend((0..self.plan.sliced.len()).map(|j| if s >> j & 1 == 1 { '1' } else { '0' }));
        }
        bits
    }

    fn assignment(&self, id: usize) -> BTreeMap<Label, u8> {
        let (c, s) = (id / self.n_slices(), id % self.n_slices());
        let cfg = self.config.configurations[c];
        let mut map = BTreeMap::new();
        for (j, &l) in self.config.broken_labels.iter().enumerate() {
            map.insert(l, (cfg >> j & 1) as u8);
        }
        for (j, &l) in self.plan.sliced.iter().enumerate() {
            map.insert(l, (s >> j & 1) as u8);
        }
        map
    }

    fn run(&self, id: usize) -> Result<(Vec<Complex64>, ExecStats)> {
        match self.precision {
            Precision::F64 => self.run_typed::<f64>(id),
            Precision::F32 => self.run_typed::<f32>(id),
        }
    }

    fn run_typed<T: Float>(&self, id: usize) -> Result<(Vec<Complex64>, ExecStats)> {
        let assign = self.assignment(id);
        let mut stats = ExecStats { subtasks: 1, ..Default::default() };
        let mut slots: Vec<Option<DenseTensor<T>>> = self
            .leaves
            .iter()
            .map(|t| {
                let r = t.restrict(|l| assign.get(&l).copied());
                Some(DenseTensor {
                    indices: r.indices,
                    data: r.data.iter().map(|z| Complex::new(T::from(z.re).unwrap(), T::from(z.im).unwrap())).collect(),
                })
            })
            .collect();
        for (step_index, step) in self.plan.steps.iter().enumerate() {
            let (a, b) = step.operands;
            let ta = slots[a].take().expect("operand consumed once");
            let tb = slots[b].take().expect("operand consumed once");
            let (out, macs) = contract_pair(&ta, &tb);
            stats.complex_macs += macs;
            stats.peak_intermediate_bytes =
                stats.peak_intermediate_bytes.max(out.data.len() as u64 * BYTES_PER_ELEMENT);
            if !out.is_finite() {
                return Err(Error::NumericFault { step: step_index });
            }
            slots.push(Some(out));
        }
        let last = slots.len() - 1;
        let result = slots[last].take().expect("final tensor").permuted(self.open);
        let data = result.data.iter().map(|z| Complex64::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap())).collect();
        Ok((data, stats))
    }
}

/// Runs every (configuration, slice) subtask on `opts.workers` threads and
/// sums results in ascending subtask order with compensated accumulation,
/// so the output is bit-identical for any worker count.
pub fn run_parallel(
    network: &TensorNetwork,
    plan: &ContractionPlan,
    config: Option<&BrokenEdgeConfig>,
    opts: &ExecOptions,
) -> Result<ParallelOutcome> {
    if opts.workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let config = resolve_config(network, plan, config)?;
    let fixed = &network.fixed_indices;
    let job = Job {
        leaves: network.tensors.iter().map(|t| t.restrict(|l| fixed.get(&l).copied())).collect(),
        plan,
        open: &network.open_indices,
        config,
        precision: opts.precision,
    };
    let total = job.n_subtasks();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, Result<(Vec<Complex64>, ExecStats)>, f64)>();

    let mut acc = ComplexAccumulator::zeros(1 << network.open_indices.len());
    let mut stats = ExecStats::default();
    let mut timings = Vec::with_capacity(total);
    let mut failure: Option<(usize, Error)> = None;

    std::thread::scope(|scope| {
        for _ in 0..opts.workers.min(total.max(1)) {
            let tx = tx.clone();
            let (job, next, abort) = (&job, &next, &abort);
            scope.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let id = next.fetch_add(1, Ordering::Relaxed);
                if id >= total {
                    break;
                }
                let start = Instant::now();
                let out = job.run(id);
                let ms = start.elapsed().as_secs_f64() * 1e3;
                if out.is_err() {
                    abort.store(true, Ordering::Relaxed);
                }
                if tx.send((id, out, ms)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending: BTreeMap<usize, (Vec<Complex64>, ExecStats, f64)> = BTreeMap::new();
        let mut expected = 0usize;
        for (id, out, ms) in rx {
            match out {
                Ok((data, s)) => {
                    pending.insert(id, (data, s, ms));
                }
                Err(e) => {
                    if failure.as_ref().is_none_or(|(f, _)| id < *f) {
                        failure = Some((id, e));
                    }
                }
            }
            while let Some((data, s, ms)) = pending.remove(&expected) {
                acc.add(&data);
                stats.merge(&s);
                timings.push(SubtaskTiming {
                    subtask_id: expected,
                    config_bits: job.subtask_label(expected),
                    wall_ms: ms,
                    flops: s.complex_macs as f64 * FLOPS_PER_CMAC,
                });
                expected += 1;
            }
        }
    });

    if let Some((id, e)) = failure {
        return Err(Error::Subtask { subtask: id, config_bits: job.subtask_label(id), source: Box::new(e) });
    }
    Ok(ParallelOutcome { amplitudes: acc.finish(), timings, stats })
}
