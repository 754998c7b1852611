//! Contraction-order search, slicing and cost accounting.
//!
//! A plan is a binary contraction tree in SSA form: leaves are the network's
//! tensors `0..n_leaves`, and step `s` produces node `n_leaves + s`. Costs
//! count 8 real FLOPs per complex multiply-add.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{Label, TensorNetwork};
use crate::rng::{stream_rng, Stream};

/// Real FLOPs per complex fused multiply-add.
pub const FLOPS_PER_CMAC: f64 = 8.0;
/// Bytes per double-precision complex element.
pub const BYTES_PER_ELEMENT: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchEffort {
    /// Simulated-annealing moves applied after the greedy pass.
    pub anneal_steps: usize,
    pub seed: u64,
}

impl Default for SearchEffort {
    fn default() -> Self {
        Self { anneal_steps: 2000, seed: 0 }
    }
}

impl SearchEffort {
    pub fn greedy_only() -> Self {
        Self { anneal_steps: 0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanStep {
    /// SSA ids of the operands.
    pub operands: (usize, usize),
    /// Result indices, sliced labels removed.
    pub result_indices: Vec<Label>,
    /// Real FLOPs summed over all slices.
    pub flops: f64,
    /// Size of the result of one slice.
    pub bytes: u64,
    /// Bytes read and written, summed over all slices.
    pub traffic_bytes: f64,
    #[serde(skip)]
    result_full: Vec<Label>,
    #[serde(skip)]
    union_full: Vec<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanTotals {
    pub time_flops: f64,
    pub peak_bytes: u64,
    pub memory_traffic_bytes: f64,
    pub n_slices: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPlan {
    pub n_leaves: usize,
    pub steps: Vec<PlanStep>,
    /// Indices enumerated externally and summed.
    pub sliced: Vec<Label>,
    /// Broken edges, in configuration-bit order.
    pub broken: Vec<Label>,
    pub open_indices: Vec<Label>,
    pub budget_bytes: u64,
    pub totals: PlanTotals,
    leaf_labels: Vec<Vec<Label>>,
}

fn symmetric_difference(a: &[Label], b: &[Label]) -> Vec<Label> {
    let (sa, sb): (BTreeSet<_>, BTreeSet<_>) = (a.iter().collect(), b.iter().collect());
    sa.symmetric_difference(&sb).map(|&&l| l).collect()
}

fn union_of(a: &[Label], b: &[Label]) -> Vec<Label> {
    let s: BTreeSet<Label> = a.iter().chain(b).copied().collect();
    s.into_iter().collect()
}

fn count_unsliced(labels: &[Label], sliced: &BTreeSet<Label>) -> usize {
    labels.iter().filter(|l| !sliced.contains(l)).count()
}

#[derive(Debug)]
struct Candidate {
    cost: f64,
    a: usize,
    b: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // Max-heap: lowest cost, then lowest ids, pop first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

/// Contraction tree under construction: node `i < n_leaves` is a leaf.
#[derive(Debug, Clone)]
struct Tree {
    n_leaves: usize,
    children: Vec<Option<(usize, usize)>>,
    labels: Vec<Vec<Label>>,
    union_rank: Vec<usize>,
    root: usize,
}

impl Tree {
    fn node_flops(&self, node: usize) -> f64 {
        match self.children[node] {
            Some(_) => (self.union_rank[node] as f64).exp2(),
            None => 0.0,
        }
    }

    fn peak_rank(&self) -> usize {
        self.labels.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn recompute(&mut self, node: usize) {
        if let Some((l, r)) = self.children[node] {
            self.labels[node] = symmetric_difference(&self.labels[l], &self.labels[r]);
            self.union_rank[node] = union_of(&self.labels[l], &self.labels[r]).len();
        }
    }

    /// Internal nodes, children before parents, left subtree first.
    fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((node, expanded)) = stack.pop() {
            match self.children[node] {
                None => {}
                Some(_) if expanded => out.push(node),
                Some((l, r)) => {
                    stack.push((node, true));
                    stack.push((r, false));
                    stack.push((l, false));
                }
            }
        }
        out
    }
}

/// Greedy pairing: repeatedly merge the connected pair minimising
/// `size(result) - size(a) - size(b)`, ties by lowest ids; disconnected
/// components are joined smallest-first at the end.
fn greedy_tree(leaf_labels: &[Vec<Label>]) -> Tree {
    let n_leaves = leaf_labels.len();
    let mut tree = Tree {
        n_leaves,
        children: vec![None; n_leaves],
        labels: leaf_labels.to_vec(),
        union_rank: leaf_labels.iter().map(Vec::len).collect(),
        root: 0,
    };
    let mut active: BTreeSet<usize> = (0..n_leaves).collect();
    let mut holders: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, ls) in leaf_labels.iter().enumerate() {
        for &l in ls {
            holders.entry(l).or_default().push(i);
        }
    }
    let size = |ls: &[Label]| (ls.len() as f64).exp2();
    let mut heap = BinaryHeap::new();
    let push_pair = |heap: &mut BinaryHeap<Candidate>, tree: &Tree, a: usize, b: usize| {
        let (a, b) = (a.min(b), a.max(b));
        let res = symmetric_difference(&tree.labels[a], &tree.labels[b]);
        let cost = size(&res) - size(&tree.labels[a]) - size(&tree.labels[b]);
        heap.push(Candidate { cost, a, b });
    };
    for nodes in holders.values() {
        if let [a, b] = nodes[..] {
            push_pair(&mut heap, &tree, a, b);
        }
    }
    while let Some(Candidate { a, b, .. }) = heap.pop() {
        if !active.contains(&a) || !active.contains(&b) {
            continue;
        }
        let node = tree.children.len();
        tree.children.push(Some((a, b)));
        tree.labels.push(Vec::new());
        tree.union_rank.push(0);
        tree.recompute(node);
        active.remove(&a);
        active.remove(&b);
        active.insert(node);
        let mut neighbours = BTreeSet::new();
        for &l in &tree.labels[node] {
            if let Some(h) = holders.get_mut(&l) {
                h.retain(|&x| x != a && x != b);
                h.push(node);
                neighbours.extend(h.iter().copied().filter(|&x| x != node));
            }
        }
        for nb in neighbours {
            push_pair(&mut heap, &tree, nb, node);
        }
    }
    while active.len() > 1 {
        let mut by_rank: Vec<usize> = active.iter().copied().collect();
        by_rank.sort_by_key(|&i| (tree.labels[i].len(), i));
        let (a, b) = (by_rank[0], by_rank[1]);
        let node = tree.children.len();
        tree.children.push(Some((a.min(b), a.max(b))));
        tree.labels.push(Vec::new());
        tree.union_rank.push(0);
        tree.recompute(node);
        active.remove(&a);
        active.remove(&b);
        active.insert(node);
    }
    tree.root = *active.iter().next().expect("non-empty network");
    tree
}

/// Total flops of the greedy tree once `removed` indices are pinned.
pub(crate) fn greedy_flops(network: &TensorNetwork, removed: &BTreeSet<Label>) -> f64 {
    let leaf_labels: Vec<Vec<Label>> = network
        .tensors
        .iter()
        .map(|t| {
            let mut ls: Vec<Label> = t.indices.iter().copied().filter(|l| !removed.contains(l)).collect();
            ls.sort_unstable();
            ls
        })
        .collect();
    let tree = greedy_tree(&leaf_labels);
    FLOPS_PER_CMAC * (tree.n_leaves..tree.children.len()).map(|n| tree.node_flops(n)).sum::<f64>()
}

fn log_objective(total_flops: f64, peak_rank: usize, budget_rank: usize) -> f64 {
    // Each rank above the budget costs roughly one doubling from slicing.
    total_flops.max(1.0).log2() + peak_rank.saturating_sub(budget_rank) as f64
}

/// Simulated annealing over subtree rotations `(X, Y), Z -> X, (Y, Z)`.
fn anneal(tree: &mut Tree, effort: SearchEffort, budget_rank: usize) {
    let internal: Vec<usize> = (tree.n_leaves..tree.children.len()).collect();
    if effort.anneal_steps == 0 || internal.len() < 2 {
        return;
    }
    let mut rng = stream_rng(effort.seed, Stream::Annealing);
    let mut total: f64 = internal.iter().map(|&n| tree.node_flops(n)).sum();
    let mut current = log_objective(total, tree.peak_rank(), budget_rank);
    let mut best = (current, tree.clone());
    let (t_start, t_end) = (1.0f64, 0.01f64);
    for step in 0..effort.anneal_steps {
        let temp = t_start * (t_end / t_start).powf(step as f64 / effort.anneal_steps as f64);
        let parent = internal[rng.random_range(0..internal.len())];
        let (l, r) = tree.children[parent].unwrap();
        let internal_kids: Vec<(usize, usize)> =
            [(l, r), (r, l)].into_iter().filter(|&(c, _)| tree.children[c].is_some()).collect();
        if internal_kids.is_empty() {
            continue;
        }
        let (child, other) = internal_kids[rng.random_range(0..internal_kids.len())];
        let (x, y) = tree.children[child].unwrap();
        let (keep, moved) = if rng.random_bool(0.5) { (x, y) } else { (y, x) };

        let saved = (
            tree.children[parent],
            tree.children[child],
            tree.labels[child].clone(),
            tree.union_rank[parent],
            tree.union_rank[child],
        );
        let old_flops = tree.node_flops(parent) + tree.node_flops(child);
        tree.children[child] = Some((moved, other));
        tree.children[parent] = Some((keep, child));
        tree.recompute(child);
        tree.recompute(parent);
        let new_total = total - old_flops + tree.node_flops(parent) + tree.node_flops(child);
        let proposed = log_objective(new_total, tree.peak_rank(), budget_rank);
        let delta = proposed - current;
        if delta <= 0.0 || rng.random::<f64>() < (-delta / temp).exp() {
            total = new_total;
            current = proposed;
            if current < best.0 {
                best = (current, tree.clone());
            }
        } else {
            tree.children[parent] = saved.0;
            tree.children[child] = saved.1;
            tree.labels[child] = saved.2;
            tree.union_rank[parent] = saved.3;
            tree.union_rank[child] = saved.4;
        }
    }
    *tree = best.1;
}

/// Plans the contraction of `network` with no broken edges.
pub fn find_contraction_path(
    network: &TensorNetwork,
    memory_budget_bytes: u64,
    effort: SearchEffort,
) -> Result<ContractionPlan> {
    find_contraction_path_with_broken(network, &[], memory_budget_bytes, effort)
}

/// Plans the contraction with `broken` indices pinned per subtask, then
/// slices until every intermediate fits the budget.
pub fn find_contraction_path_with_broken(
    network: &TensorNetwork,
    broken: &[Label],
    memory_budget_bytes: u64,
    effort: SearchEffort,
) -> Result<ContractionPlan> {
    if network.tensors.is_empty() {
        return Err(Error::Input("cannot plan an empty network".into()));
    }
    let largest = network.largest_tensor_bytes();
    if memory_budget_bytes < largest {
        return Err(Error::Infeasible(format!(
            "memory budget {memory_budget_bytes} B is below the largest input tensor ({largest} B)"
        )));
    }
    let bonds = network.bond_labels();
    let mut seen = BTreeSet::new();
    for l in broken {
        if !bonds.contains(l) || network.fixed_indices.contains_key(l) {
            return Err(Error::Input(format!("broken edge {l} is not a free bond of the network")));
        }
        if !seen.insert(*l) {
            return Err(Error::Input(format!("broken edge {l} listed twice")));
        }
    }
    let removed: BTreeSet<Label> = network.fixed_indices.keys().chain(broken).copied().collect();
    let leaf_labels: Vec<Vec<Label>> = network
        .tensors
        .iter()
        .map(|t| {
            let mut ls: Vec<Label> = t.indices.iter().copied().filter(|l| !removed.contains(l)).collect();
            ls.sort_unstable();
            ls
        })
        .collect();
    let open_bytes = BYTES_PER_ELEMENT << network.open_indices.len();
    if memory_budget_bytes < open_bytes {
        return Err(Error::Infeasible(format!(
            "the {}-index result needs {open_bytes} B, above the budget of {memory_budget_bytes} B",
            network.open_indices.len()
        )));
    }
    let budget_rank = (memory_budget_bytes / BYTES_PER_ELEMENT).max(1).ilog2() as usize;

    let mut tree = greedy_tree(&leaf_labels);
    anneal(&mut tree, effort, budget_rank);

    let mut plan = ContractionPlan::from_tree(&tree, leaf_labels, broken, network, memory_budget_bytes);
    plan.slice_to_budget(network)?;
    Ok(plan)
}

impl ContractionPlan {
    fn from_tree(
        tree: &Tree,
        leaf_labels: Vec<Vec<Label>>,
        broken: &[Label],
        network: &TensorNetwork,
        budget_bytes: u64,
    ) -> Self {
        let mut ssa: Vec<usize> = (0..tree.n_leaves).collect();
        ssa.resize(tree.children.len(), usize::MAX);
        let mut steps = Vec::new();
        for (k, node) in tree.postorder().into_iter().enumerate() {
            let (l, r) = tree.children[node].unwrap();
            ssa[node] = tree.n_leaves + k;
            steps.push(PlanStep {
                operands: (ssa[l], ssa[r]),
                result_indices: Vec::new(),
                flops: 0.0,
                bytes: 0,
                traffic_bytes: 0.0,
                result_full: tree.labels[node].clone(),
                union_full: union_of(&tree.labels[l], &tree.labels[r]),
            });
        }
        let mut plan = ContractionPlan {
            n_leaves: tree.n_leaves,
            steps,
            sliced: Vec::new(),
            broken: broken.to_vec(),
            open_indices: network.open_indices.clone(),
            budget_bytes,
            totals: PlanTotals { time_flops: 0.0, peak_bytes: 0, memory_traffic_bytes: 0.0, n_slices: 1 },
            leaf_labels,
        };
        plan.recost();
        plan
    }

    fn node_labels(&self, id: usize) -> &[Label] {
        if id < self.n_leaves {
            &self.leaf_labels[id]
        } else {
            &self.steps[id - self.n_leaves].result_full
        }
    }

    /// Recomputes per-step and total costs for the current slice set.
    fn recost(&mut self) {
        let sliced: BTreeSet<Label> = self.sliced.iter().copied().collect();
        let n_slices = 1u64 << sliced.len();
        let elems = |ls: &[Label]| (count_unsliced(ls, &sliced) as f64).exp2();
        let mut updates = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let (a, b) = step.operands;
            let read = elems(self.node_labels(a)) + elems(self.node_labels(b));
            let write = elems(&step.result_full);
            updates.push((
                FLOPS_PER_CMAC * elems(&step.union_full) * n_slices as f64,
                BYTES_PER_ELEMENT * write as u64,
                BYTES_PER_ELEMENT as f64 * (read + write) * n_slices as f64,
                step.result_full.iter().copied().filter(|l| !sliced.contains(l)).collect(),
            ));
        }
        for (step, (flops, bytes, traffic, idx)) in self.steps.iter_mut().zip(updates) {
            step.flops = flops;
            step.bytes = bytes;
            step.traffic_bytes = traffic;
            step.result_indices = idx;
        }
        let peak_bytes = match self.steps.iter().map(|s| s.bytes).max() {
            Some(p) => p,
            None => self.leaf_labels.iter().map(|ls| BYTES_PER_ELEMENT << ls.len()).max().unwrap_or(16),
        };
        self.totals = PlanTotals {
            time_flops: self.steps.iter().map(|s| s.flops).sum(),
            peak_bytes,
            memory_traffic_bytes: self.steps.iter().map(|s| s.traffic_bytes).sum(),
            n_slices,
        };
    }

    /// Greedy slicing: pick the index whose removal most lowers the peak
    /// (then the number of peak-sized intermediates, then total FLOPs);
    /// ties go to the smallest label.
    fn slice_to_budget(&mut self, network: &TensorNetwork) -> Result<()> {
        let open: BTreeSet<Label> = self.open_indices.iter().copied().collect();
        let broken: BTreeSet<Label> = self.broken.iter().copied().collect();
        let sliceable: BTreeSet<Label> = network
            .bond_labels()
            .into_iter()
            .filter(|l| !open.contains(l) && !broken.contains(l) && !network.fixed_indices.contains_key(l))
            .collect();
        while self.totals.peak_bytes > self.budget_bytes {
            let peak = self.totals.peak_bytes;
            let at_peak: BTreeSet<Label> = self
                .steps
                .iter()
                .filter(|s| s.bytes == peak)
                .flat_map(|s| s.result_indices.iter().copied())
                .filter(|l| sliceable.contains(l) && !self.sliced.contains(l))
                .collect();
            let mut best: Option<((u64, usize, f64), Label)> = None;
            for &label in &at_peak {
                let mut trial = self.clone();
                trial.sliced.push(label);
                trial.recost();
                let new_peak = trial.totals.peak_bytes;
                let count = trial.steps.iter().filter(|s| s.bytes == new_peak).count();
                let key = (new_peak, count, trial.totals.time_flops);
                let better = match &best {
                    None => true,
                    Some((k, _)) => (key.0, key.1).cmp(&(k.0, k.1)).then(key.2.total_cmp(&k.2)) == Ordering::Less,
                };
                if better {
                    best = Some((key, label));
                }
            }
            let Some((_, label)) = best else {
                return Err(Error::Infeasible(format!(
                    "no sliceable index left; peak {} B exceeds budget {} B",
                    self.totals.peak_bytes, self.budget_bytes
                )));
            };
            self.sliced.push(label);
            self.sliced.sort_unstable();
            self.recost();
        }
        Ok(())
    }

    /// The same tree re-costed with the given slice set.
    pub fn resliced(&self, sliced: &[Label]) -> Result<ContractionPlan> {
        let mut plan = self.clone();
        let mut s = sliced.to_vec();
        s.sort_unstable();
        s.dedup();
        for l in &s {
            if self.open_indices.contains(l) || self.broken.contains(l) {
                return Err(Error::Input(format!("cannot slice open or broken index {l}")));
            }
        }
        plan.sliced = s;
        plan.recost();
        Ok(plan)
    }

    /// Effective (unsliced, unfixed) labels of leaf `i`.
    pub fn leaf_indices(&self, i: usize) -> &[Label] {
        &self.leaf_labels[i]
    }

    /// Cost of one subtask: one broken-edge configuration, all slices.
    pub fn subtask_cost(&self) -> SubtaskCost {
        SubtaskCost {
            flops: self.totals.time_flops,
            memory_traffic_bytes: self.totals.memory_traffic_bytes,
            peak_bytes: self.totals.peak_bytes as f64,
        }
    }

    /// Contraction order as nested pairs of leaf ids.
    pub fn order_tree(&self) -> serde_json::Value {
        fn build(plan: &ContractionPlan, id: usize) -> serde_json::Value {
            if id < plan.n_leaves {
                serde_json::Value::from(id)
            } else {
                let (a, b) = plan.steps[id - plan.n_leaves].operands;
                serde_json::Value::Array(vec![build(plan, a), build(plan, b)])
            }
        }
        match self.steps.len() {
            0 => serde_json::Value::from(0),
            n => build(self, self.n_leaves + n - 1),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::json!({
            "order": self.order_tree(),
            "sliced": self.sliced,
            "broken": self.broken,
            "open": self.open_indices,
            "budget_bytes": self.budget_bytes,
            "per_step": self.steps,
            "totals": self.totals,
        });
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

/// Work of one independent subtask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubtaskCost {
    pub flops: f64,
    pub memory_traffic_bytes: f64,
    pub peak_bytes: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub per_subtask_flops: f64,
    pub total_flops: f64,
    pub peak_bytes: f64,
    pub per_subtask_traffic_bytes: f64,
    pub memory_traffic_bytes: f64,
    pub n_subtasks: u64,
}

impl ComplexityReport {
    /// Achieved fraction of device peak. `total_flops` already carries the
    /// factor of 8 per complex product, so this is 8·T_c/(P·t) with T_c
    /// counted in complex products.
    pub fn efficiency(&self, device_peak_flops: f64, wall_seconds: f64) -> f64 {
        self.total_flops / (device_peak_flops * wall_seconds)
    }
}

pub fn estimate_complexity(cost: &SubtaskCost, n_subtasks_executed: u64) -> ComplexityReport {
    ComplexityReport {
        per_subtask_flops: cost.flops,
        total_flops: cost.flops * n_subtasks_executed as f64,
        peak_bytes: cost.peak_bytes,
        per_subtask_traffic_bytes: cost.memory_traffic_bytes,
        memory_traffic_bytes: cost.memory_traffic_bytes * n_subtasks_executed as f64,
        n_subtasks: n_subtasks_executed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Tensor;
    use num_complex::Complex64;

    fn tensor(id: usize, labels: &[u32]) -> Tensor {
        Tensor {
            id,
            indices: labels.iter().map(|&l| Label(l)).collect(),
            data: vec![Complex64::new(1.0, 0.0); 1 << labels.len()],
        }
    }

    fn net(tensors: Vec<Tensor>, open: &[u32]) -> TensorNetwork {
        TensorNetwork::from_tensors(tensors, open.iter().map(|&l| Label(l)).collect(), BTreeMap::new()).unwrap()
    }

    #[test]
    fn two_matrix_product_costs_64_flops() {
        let n = net(vec![tensor(0, &[0, 1]), tensor(1, &[1, 2])], &[0, 2]);
        let plan = find_contraction_path(&n, 1 << 20, SearchEffort::default()).unwrap();
        assert_eq!(plan.steps.len(), 1);
        assert_eq!(plan.totals.time_flops, 64.0);
        assert_eq!(plan.totals.peak_bytes, 64);
    }

    #[test]
    fn annealing_fixes_greedy_tie() {
        // M1(i,j) M2(j,k) v(k): (M1 M2) v costs 12 products, M1 (M2 v) costs 8.
        let n = net(vec![tensor(0, &[0, 1]), tensor(1, &[1, 2]), tensor(2, &[2])], &[0]);
        let greedy = find_contraction_path(&n, 1 << 20, SearchEffort::greedy_only()).unwrap();
        assert_eq!(greedy.totals.time_flops, 8.0 * 12.0);
        let annealed = find_contraction_path(&n, 1 << 20, SearchEffort { anneal_steps: 200, seed: 1 }).unwrap();
        assert_eq!(annealed.totals.time_flops, 8.0 * 8.0);
    }

    #[test]
    fn infeasible_budgets() {
        let n = net(vec![tensor(0, &[0, 1, 2, 3]), tensor(1, &[2, 3])], &[0, 1]);
        assert!(matches!(find_contraction_path(&n, 100, SearchEffort::default()), Err(Error::Infeasible(_))));
        let wide = net(vec![tensor(0, &[0, 1, 2, 3, 4]), tensor(1, &[5, 6, 7, 8, 9])], &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert!(matches!(find_contraction_path(&wide, 1024, SearchEffort::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn slicing_meets_budget() {
        // A closed 4x4 lattice: interior tensors have rank 4 but any
        // contraction order passes through wider intermediates.
        let side = 4u32;
        let h = |r: u32, c: u32| r * side + c;
        let v = |r: u32, c: u32| 100 + r * side + c;
        let tensors = (0..side * side)
            .map(|id| {
                let (r, c) = (id / side, id % side);
                let mut ls = Vec::new();
                if c > 0 {
                    ls.push(h(r, c - 1));
                }
                if c + 1 < side {
                    ls.push(h(r, c));
                }
                if r > 0 {
                    ls.push(v(r - 1, c));
                }
                if r + 1 < side {
                    ls.push(v(r, c));
                }
                tensor(id as usize, &ls)
            })
            .collect();
        let n = net(tensors, &[]);
        let loose = find_contraction_path(&n, 1 << 30, SearchEffort::greedy_only()).unwrap();
        let budget = 16u64 << 4;
        let tight = find_contraction_path(&n, budget, SearchEffort::greedy_only()).unwrap();
        assert!(loose.totals.peak_bytes > budget);
        assert!(tight.totals.peak_bytes <= budget);
        assert!(!tight.sliced.is_empty());
        assert!(tight.totals.time_flops >= loose.totals.time_flops);
        let sum: f64 = tight.steps.iter().map(|s| s.flops).sum();
        assert_eq!(sum, tight.totals.time_flops);
        assert_eq!(tight.steps.iter().map(|s| s.bytes).max().unwrap(), tight.totals.peak_bytes);
    }

    #[test]
    fn broken_edges_must_be_bonds() {
        let n = net(vec![tensor(0, &[0, 1]), tensor(1, &[1, 2])], &[0, 2]);
        assert!(find_contraction_path_with_broken(&n, &[Label(0)], 1 << 20, SearchEffort::default()).is_err());
        let plan = find_contraction_path_with_broken(&n, &[Label(1)], 1 << 20, SearchEffort::default()).unwrap();
        assert_eq!(plan.broken, vec![Label(1)]);
        // Outer product of two vectors once the bond is pinned.
        assert_eq!(plan.totals.time_flops, 32.0);
    }

    #[test]
    fn large_scale_table_arithmetic() {
        let per = SubtaskCost { flops: 1.0859e13, memory_traffic_bytes: 2.4361e11, peak_bytes: 80e9 };
        let report = estimate_complexity(&per, 344_277);
        assert!((report.total_flops / 3.7385e18 - 1.0).abs() < 1e-4);
        assert!((report.memory_traffic_bytes / 8.3869e16 - 1.0).abs() < 1e-4);
        let full = estimate_complexity(&per, 1 << 30);
        assert!((full.total_flops / 1.1660e22 - 1.0).abs() < 1e-4);
    }
}
