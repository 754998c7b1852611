//! Candidate sets, sampling, top-k post-selection and the statistics used
//! to judge them: XEB, fidelity ratios, Pearson correlation and the
//! Porter-Thomas goodness of fit.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::AmplitudeBatch;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::rng::{stream_rng, Stream};
use crate::statevector::StateVector;
use crate::{bitstring_to_string, Bitstring};

/// Strings sharing one assignment of the non-open qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateGroup {
    /// Bits on the non-open qubits; open positions are zero.
    pub fixed: Bitstring,
    /// Approximate probabilities of the 2^l members once computed, indexed
    /// like [`AmplitudeBatch::amplitudes`].
    pub probabilities: Vec<f64>,
}

/// M groups × 2^l bitstrings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub n: usize,
    pub open_qubits: Vec<usize>,
    pub groups: Vec<CandidateGroup>,
}

impl CandidateSet {
    /// Draws the non-open bits of `m_groups` groups uniformly. With every
    /// qubit open and one group the set is the whole space and no
    /// randomness is consumed.
    pub fn build(n: usize, open_qubits: Vec<usize>, m_groups: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::Input(format!("{n} qubits outside 1..=64")));
        }
        if m_groups == 0 {
            return Err(Error::Input("need at least one group".into()));
        }
        let distinct: BTreeSet<_> = open_qubits.iter().copied().collect();
        if distinct.len() != open_qubits.len() {
            return Err(Error::Input("open qubits must be distinct".into()));
        }
        if let Some(q) = open_qubits.iter().find(|&&q| q >= n) {
            return Err(Error::Input(format!("open qubit {q} out of range for {n} qubits")));
        }
        if open_qubits.len() > 30 {
            return Err(Error::Capacity { what: format!("{} open qubits", open_qubits.len()), cap: 30 });
        }
        let closed: Vec<usize> = (0..n).filter(|q| !distinct.contains(q)).collect();
        if closed.is_empty() && m_groups > 1 {
            return Err(Error::Input("all qubits open with more than one group: groups would coincide".into()));
        }
        let mut groups = Vec::with_capacity(m_groups);
        if closed.is_empty() {
            groups.push(CandidateGroup { fixed: 0, probabilities: Vec::new() });
        } else {
            let mut rng = stream_rng(seed, Stream::Candidates);
            let mut seen = BTreeSet::new();
            let mut duplicates = 0usize;
            for _ in 0..m_groups {
                let fixed = closed.iter().fold(0u64, |acc, &q| acc | (rng.random::<bool>() as u64) << q);
                if !seen.insert(fixed) {
                    duplicates += 1;
                }
                groups.push(CandidateGroup { fixed, probabilities: Vec::new() });
            }
            if duplicates > 0 {
                log::info!("{duplicates} of {m_groups} candidate groups repeat an earlier fixed substring");
            }
        }
        Ok(Self { n, open_qubits, groups })
    }

    pub fn l(&self) -> usize {
        self.open_qubits.len()
    }

    pub fn m(&self) -> usize {
        self.groups.len()
    }

    /// |S̃| = M · 2^l.
    pub fn size(&self) -> usize {
        self.m() << self.l()
    }

    /// Member `i` of group `g`.
    pub fn bitstring(&self, g: usize, i: usize) -> Bitstring {
        self.groups[g].fixed | crate::engine::scatter_open(i, &self.open_qubits)
    }

    /// Attaches |amplitude|² from each batch to its group.
    pub fn with_amplitudes(mut self, batches: &[AmplitudeBatch]) -> Result<Self> {
        if batches.len() != self.m() {
            return Err(Error::Input(format!("{} batches for {} groups", batches.len(), self.m())));
        }
        for batch in batches {
            let group = self
                .groups
                .get_mut(batch.group_id)
                .ok_or_else(|| Error::Input(format!("batch for unknown group {}", batch.group_id)))?;
            if batch.fixed_substring != group.fixed || batch.amplitudes.len() != 1 << self.open_qubits.len() {
                return Err(Error::Input(format!("batch {} does not match its group", batch.group_id)));
            }
            group.probabilities = batch.probabilities();
        }
        Ok(self)
    }

    fn check_scored(&self) -> Result<()> {
        match self.groups.iter().position(|g| g.probabilities.len() != 1 << self.l()) {
            Some(g) => Err(Error::Input(format!("group {g} has no probabilities"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Direct,
    TopK,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub n: usize,
    pub bitstrings: Vec<Bitstring>,
    pub provenance: Provenance,
    pub k: Option<usize>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.bitstrings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bitstrings.is_empty()
    }

    /// Comment header followed by one ASCII bitstring per line.
    pub fn write_text<W: Write>(&self, mut w: W, extra_header: &[String]) -> Result<()> {
        let provenance = match self.provenance {
            Provenance::Direct => "direct",
            Provenance::TopK => "top_k",
        };
        writeln!(w, "# provenance: {provenance}")?;
        if let Some(k) = self.k {
            writeln!(w, "# k: {k}")?;
        }
        writeln!(w, "# n_qubits: {}", self.n)?;
        writeln!(w, "# bit order: qubit 0 first")?;
        for line in extra_header {
            writeln!(w, "# {line}")?;
        }
        for &b in &self.bitstrings {
            writeln!(w, "{}", bitstring_to_string(b, self.n))?;
        }
        Ok(())
    }
}

/// Source of ideal output probabilities q(s).
pub trait IdealProbabilities {
    fn n_qubits(&self) -> usize;
    fn ideal(&self, bits: Bitstring) -> Option<f64>;
}

impl IdealProbabilities for StateVector {
    fn n_qubits(&self) -> usize {
        StateVector::n_qubits(self)
    }

    fn ideal(&self, bits: Bitstring) -> Option<f64> {
        (bits < 1u64 << StateVector::n_qubits(self)).then(|| self.probability(bits))
    }
}

/// Sparse table of known probabilities.
#[derive(Debug, Clone, Default)]
pub struct ProbabilityTable {
    pub n: usize,
    pub values: HashMap<Bitstring, f64>,
}

impl IdealProbabilities for ProbabilityTable {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn ideal(&self, bits: Bitstring) -> Option<f64> {
        self.values.get(&bits).copied()
    }
}

/// Linear cross-entropy benchmark (2^n / |S|) Σ q(s) − 1.
pub fn xeb(samples: &SampleSet, q: &impl IdealProbabilities) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Input("XEB of an empty sample set".into()));
    }
    if samples.n != q.n_qubits() {
        return Err(Error::Input(format!("{}-bit samples, {}-qubit probabilities", samples.n, q.n_qubits())));
    }
    let mut sum = CompensatedSum::default();
    for &s in &samples.bitstrings {
        let p = q
            .ideal(s)
            .ok_or_else(|| Error::Input(format!("no ideal probability for {}", bitstring_to_string(s, samples.n))))?;
        sum.add(p);
    }
    Ok((samples.n as f64).exp2() * sum.value() / samples.len() as f64 - 1.0)
}

/// Ascending lexicographic order of the text form (qubit 0 first).
fn text_order_key(b: Bitstring) -> u64 {
    b.reverse_bits()
}

/// The `k` candidates with the largest p̃; ties go to the lexicographically
/// smaller bitstring. Repeated groups contribute repeated members.
pub fn top_k_select(candidates: &CandidateSet, k: usize) -> Result<SampleSet> {
    candidates.check_scored()?;
    let size = candidates.size();
    if k == 0 || k > size {
        return Err(Error::Input(format!("k = {k} outside 1..={size}")));
    }
    let mut all: Vec<(f64, u64, Bitstring)> = Vec::with_capacity(size);
    for (g, group) in candidates.groups.iter().enumerate() {
        for (i, &p) in group.probabilities.iter().enumerate() {
            let b = candidates.bitstring(g, i);
            all.push((p, text_order_key(b), b));
        }
    }
    let cmp = |x: &(f64, u64, Bitstring), y: &(f64, u64, Bitstring)| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1));
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, cmp);
        all.truncate(k);
    }
    all.sort_unstable_by(cmp);
    Ok(SampleSet {
        n: candidates.n,
        bitstrings: all.into_iter().map(|(_, _, b)| b).collect(),
        provenance: Provenance::TopK,
        k: Some(k),
    })
}

/// One draw per group from its normalised p̃.
pub fn direct_sample(candidates: &CandidateSet, seed: u64) -> Result<SampleSet> {
    candidates.check_scored()?;
    let mut rng = stream_rng(seed, Stream::Sampling);
    let mut bitstrings = Vec::with_capacity(candidates.m());
    for (g, group) in candidates.groups.iter().enumerate() {
        let total: f64 = group.probabilities.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::Input(format!("group {g} has zero total probability")));
        }
        let target = rng.random::<f64>() * total;
        let mut running = 0.0;
        let mut pick = group.probabilities.iter().rposition(|&p| p > 0.0).expect("positive total");
        for (i, &p) in group.probabilities.iter().enumerate() {
            running += p;
            if target < running && p > 0.0 {
                pick = i;
                break;
            }
        }
        bitstrings.push(candidates.bitstring(g, pick));
    }
    Ok(SampleSet { n: candidates.n, bitstrings, provenance: Provenance::Direct, k: None })
}

/// F · ln(|S̃| / k).
pub fn predicted_topk_xeb(fidelity: f64, candidate_size: usize, k: usize) -> f64 {
    fidelity * (candidate_size as f64 / k as f64).ln()
}

/// Pearson product-moment correlation.
pub fn pearson_r(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.len() < 2 {
        return Err(Error::Input(format!(
            "correlation needs two equal series of length ≥ 2, got {} and {}",
            p.len(),
            q.len()
        )));
    }
    let n = p.len() as f64;
    let mp = p.iter().copied().collect::<CompensatedSum>().value() / n;
    let mq = q.iter().copied().collect::<CompensatedSum>().value() / n;
    let (mut sxy, mut sxx, mut syy) = (CompensatedSum::default(), CompensatedSum::default(), CompensatedSum::default());
    for (&x, &y) in p.iter().zip(q) {
        let (dx, dy) = (x - mp, y - mq);
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    if sxx.value() == 0.0 || syy.value() == 0.0 {
        return Err(Error::Statistics("correlation undefined for a constant series".into()));
    }
    Ok((sxy.value() / (sxx.value() * syy.value()).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation of the real parts of two amplitude vectors.
pub fn amplitude_correlation(approx: &[Complex64], exact: &[Complex64]) -> Result<f64> {
    let a: Vec<f64> = approx.iter().map(|z| z.re).collect();
    let e: Vec<f64> = exact.iter().map(|z| z.re).collect();
    pearson_r(&a, &e)
}

/// Correlation of the imaginary parts.
pub fn amplitude_correlation_imag(approx: &[Complex64], exact: &[Complex64]) -> Result<f64> {
    let a: Vec<f64> = approx.iter().map(|z| z.im).collect();
    let e: Vec<f64> = exact.iter().map(|z| z.im).collect();
    pearson_r(&a, &e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PorterThomasFit {
    pub ks_statistic: f64,
    pub p_value: f64,
    /// Mean of N·q; 1 for a Porter-Thomas ensemble over the full space.
    pub mean_scaled: f64,
    pub n_points: usize,
}

/// Kolmogorov survival function Q(λ) = 2 Σ (−1)^{j−1} exp(−2 j² λ²).
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small λ.
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let s: f64 = (1..=6).map(|j| y.powi((2 * j - 1) * (2 * j - 1))).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub const MIN_PT_POINTS: usize = 1000;

/// One-sample KS test of N·q (N = 2^n) against Exponential(1).
pub fn porter_thomas_check(probs: &[f64], n: usize) -> Result<PorterThomasFit> {
    if probs.len() < MIN_PT_POINTS {
        return Err(Error::Statistics(format!(
            "Porter-Thomas check needs at least {MIN_PT_POINTS} probabilities, got {}",
            probs.len()
        )));
    }
    let scale = (n as f64).exp2();
    let mut x: Vec<f64> = probs.iter().map(|&p| p * scale).collect();
    x.sort_unstable_by(f64::total_cmp);
    let len = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let cdf = 1.0 - (-v.max(0.0)).exp();
        d = d.max((i as f64 + 1.0) / len - cdf).max(cdf - i as f64 / len);
    }
    let sqrt_n = len.sqrt();
    let p_value = kolmogorov_q((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
    let mean_scaled = x.iter().copied().collect::<CompensatedSum>().value() / len;
    Ok(PorterThomasFit { ks_statistic: d, p_value, mean_scaled, n_points: x.len() })
}

/// Closed-form top-k XEB of an exponential ensemble keeping fraction α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopKLaw {
    /// −ln α.
    pub xeb: f64,
    /// Threshold t = ln(1/α) on N·q above which strings are kept.
    pub threshold: f64,
    /// ∫_t^∞ x e^{−x} dx = α (1 − ln α).
    pub tail_mass: f64,
}

pub fn ideal_topk_law(alpha: f64) -> Result<TopKLaw> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Input(format!("alpha = {alpha} outside (0, 1]")));
    }
    Ok(TopKLaw { xeb: -alpha.ln(), threshold: (1.0 / alpha).ln(), tail_mass: alpha * (1.0 - alpha.ln()) })
}

/// Parameters a report was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    pub n: usize,
    pub l: usize,
    #[serde(rename = "M")]
    pub m_groups: usize,
    #[serde(rename = "K")]
    pub k_broken: usize,
    pub m: usize,
    pub k: usize,
    pub candidate_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// XEB of the top-k selection.
    pub xeb: f64,
    /// XEB of one direct draw per group.
    pub direct_xeb: f64,
    /// Measured state fidelity over the candidate amplitudes.
    pub fidelity: f64,
    /// m · 2^-K.
    pub predicted_fidelity: f64,
    /// fidelity · ln(|S̃| / k).
    pub predicted_xeb: f64,
    pub pearson_r: Option<f64>,
    pub pearson_r_imag: Option<f64>,
    pub pt_ks_statistic: Option<f64>,
    pub pt_ks_p_value: Option<f64>,
    pub pt_mean_scaled: Option<f64>,
    /// Absent when the measured fidelity is zero.
    pub xeb_over_fidelity: Option<f64>,
    pub inputs: ReportInputs,
}

impl MetricsReport {
    /// Recomputes `predicted_xeb` from the stored inputs.
    pub fn recomputed_predicted_xeb(&self) -> f64 {
        predicted_topk_xeb(self.fidelity, self.inputs.candidate_size, self.inputs.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Exp1};

    fn scored(n: usize, open: Vec<usize>, m: usize, seed: u64, f: impl Fn(Bitstring) -> f64) -> CandidateSet {
        let mut set = CandidateSet::build(n, open, m, seed).unwrap();
        for g in 0..set.m() {
            let probs = (0..1usize << set.l()).map(|i| f(set.bitstring(g, i))).collect();
            set.groups[g].probabilities = probs;
        }
        set
    }

    #[test]
    fn candidate_structure() {
        let set = CandidateSet::build(4, vec![0, 1], 3, 9).unwrap();
        assert_eq!(set.size(), 12);
        for g in 0..3 {
            let members: BTreeSet<_> = (0..4).map(|i| set.bitstring(g, i)).collect();
            assert_eq!(members.len(), 4);
            assert!(members.iter().all(|b| b & 0b1100 == set.groups[g].fixed));
        }
        assert_eq!(set, CandidateSet::build(4, vec![0, 1], 3, 9).unwrap());
        let full = CandidateSet::build(12, (0..12).collect(), 1, 0).unwrap();
        assert_eq!(full.size(), 4096);
        assert_eq!(full.groups[0].fixed, 0);
        assert!(CandidateSet::build(4, (0..4).collect(), 2, 0).is_err());
        assert!(CandidateSet::build(4, vec![1, 1], 1, 0).is_err());
        assert!(CandidateSet::build(4, vec![4], 1, 0).is_err());
    }

    #[test]
    fn xeb_trivial_cases() {
        let table = ProbabilityTable { n: 3, values: [(5u64, 0.125)].into_iter().collect() };
        let one = SampleSet { n: 3, bitstrings: vec![5], provenance: Provenance::Direct, k: None };
        assert_eq!(xeb(&one, &table).unwrap(), 0.0);
        let missing = SampleSet { bitstrings: vec![4], ..one.clone() };
        assert!(matches!(xeb(&missing, &table), Err(Error::Input(_))));
        let empty = SampleSet { bitstrings: vec![], ..one };
        assert!(xeb(&empty, &table).is_err());
    }

    #[test]
    fn top_k_ties_and_full_selection() {
        let set = scored(3, vec![0, 1, 2], 1, 0, |b| if b == 3 || b == 6 { 0.3 } else { 0.05 });
        let top = top_k_select(&set, 1).unwrap();
        // "110" (6) precedes "011" (3) in text order.
        assert_eq!(top.bitstrings, vec![6]);
        assert_eq!(top_k_select(&set, 2).unwrap().bitstrings, vec![6, 3]);
        let all = top_k_select(&set, 8).unwrap();
        assert_eq!(all.bitstrings.iter().collect::<BTreeSet<_>>().len(), 8);
        assert!(top_k_select(&set, 0).is_err());
        assert!(top_k_select(&set, 9).is_err());
    }

    #[test]
    fn direct_sampling_degenerate_and_uniform() {
        let set = scored(4, vec![0, 1], 5, 1, |b| if b & 3 == 0 { 1.0 } else { 0.0 });
        let s = direct_sample(&set, 3).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.bitstrings.iter().all(|b| b & 3 == 0));

        let zero = scored(4, vec![0, 1], 2, 1, |_| 0.0);
        assert!(direct_sample(&zero, 0).is_err());

        let uniform = scored(4, vec![0, 1], 10_000, 2, |_| 0.25);
        let draws = direct_sample(&uniform, 7).unwrap();
        let mut counts = [0f64; 4];
        for b in &draws.bitstrings {
            counts[(b & 3) as usize] += 1.0;
        }
        let chi2: f64 = counts.iter().map(|c| (c - 2500.0).powi(2) / 2500.0).sum();
        // 99th percentile of chi-square with 3 degrees of freedom.
        assert!(chi2 < 11.345, "chi2 = {chi2}");
    }

    #[test]
    fn predicted_topk_values() {
        assert!((predicted_topk_xeb(1.0, 1 << 30, 1 << 15) - 10.3972).abs() < 1e-4);
        assert_eq!(predicted_topk_xeb(0.3, 500, 500), 0.0);
        assert!((1.0 - 1.0 / (1024f64).ln() - 0.8557).abs() < 5e-5);
    }

    #[test]
    fn pearson_cases() {
        let p = [0.1, 0.4, 0.2, 0.3];
        assert!((pearson_r(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        let q: Vec<f64> = p.iter().map(|x| 2.0 - x).collect();
        assert!((pearson_r(&p, &q).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(pearson_r(&p, &[1.0; 4]), Err(Error::Statistics(_))));
        assert!(pearson_r(&p[..1], &p[..1]).is_err());
    }

    #[test]
    fn kolmogorov_branches_agree() {
        for lambda in [1.0, 1.1, 1.17, 1.19, 1.3] {
            let mut series = 0.0;
            for j in 1..200 {
                let t = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
                series += if j % 2 == 1 { t } else { -t };
            }
            assert!((kolmogorov_q(lambda) - 2.0 * series).abs() < 1e-10, "λ = {lambda}");
        }
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn porter_thomas_self_consistency() {
        let mut rng = stream_rng(5, Stream::Synthetic);
        let n = 12;
        let probs: Vec<f64> = (0..4096)
            .map(|_| {
                let x: f64 = Exp1.sample(&mut rng);
                x / 4096.0
            })
            .collect();
        let fit = porter_thomas_check(&probs, n).unwrap();
        assert!(fit.p_value > 0.01, "{fit:?}");
        let flat = vec![1.0 / 4096.0; 4096];
        assert!(porter_thomas_check(&flat, n).unwrap().p_value < 1e-6);
        assert!(porter_thomas_check(&flat[..999], n).is_err());
    }

    #[test]
    fn topk_law() {
        let law = ideal_topk_law(1.0).unwrap();
        assert_eq!(law.xeb, 0.0);
        assert!((ideal_topk_law((-15f64).exp2()).unwrap().xeb - 10.3972).abs() < 1e-4);
        let a = 1e-3;
        let law = ideal_topk_law(a).unwrap();
        assert!((law.tail_mass - a * (1.0 + law.threshold)).abs() < 1e-15);
        assert!(ideal_topk_law(0.0).is_err());
        assert!(ideal_topk_law(1.5).is_err());
    }

    #[test]
    fn topk_law_monte_carlo() {
        let mut rng = stream_rng(11, Stream::Synthetic);
        let total = 10_000_000usize;
        let mut x: Vec<f64> = (0..total).map(|_| Exp1.sample(&mut rng)).collect();
        let keep = total / 1000;
        x.select_nth_unstable_by(keep - 1, |a, b| b.total_cmp(a));
        let mean: f64 = x[..keep].iter().sum::<f64>() / keep as f64;
        assert!((mean - 1.0 - 6.908).abs() < 0.05, "mean − 1 = {}", mean - 1.0);
    }

    #[test]
    fn samples_file_format() {
        let s = SampleSet { n: 3, bitstrings: vec![1, 6], provenance: Provenance::TopK, k: Some(2) };
        let mut buf = Vec::new();
        s.write_text(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["100", "011"]);
        assert!(text.contains("# k: 2"));
    }

    proptest! {
        #[test]
        fn top_k_ignores_group_order(seed in 0u64..1000, k in 1usize..32) {
            let set = scored(6, vec![1, 4], 8, seed, |b| ((b * 2654435761) % 97) as f64 / 97.0);
            let mut shuffled = set.clone();
            shuffled.groups.reverse();
            prop_assert_eq!(top_k_select(&set, k).unwrap().bitstrings, top_k_select(&shuffled, k).unwrap().bitstrings);
        }

        #[test]
        fn full_distribution_xeb_is_nonnegative(weights in proptest::collection::vec(0.0f64..1.0, 16)) {
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 1e-6);
            let q: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let value = 16.0 * q.iter().map(|p| p * p).sum::<f64>() - 1.0;
            prop_assert!(value >= -1e-12);
        }
    }
}
