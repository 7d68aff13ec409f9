//! Shannon entropy (in nats) of convolution powers, plug-in estimators on
//! sampled ensembles, and the elementary entropy bounds used by the
//! reconstruction arguments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::law::GroupLaw;
use crate::walks::{path_rng, StepDistribution};
use crate::wreath::WreathElement;

/// `κ(x) = -x ln x` with `κ(0) = 0`.
pub fn kappa(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Finitely supported probability distribution, sorted by key.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution<E> {
    atoms: Vec<(E, f64)>,
}

impl<E: Ord + Clone> FiniteDistribution<E> {
    /// Merges repeated keys and validates positivity and normalization.
    pub fn new(atoms: Vec<(E, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::validation("distribution", "empty support"));
        }
        if let Some((_, p)) = atoms.iter().find(|(_, p)| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::validation("probability", format!("{p} is not positive")));
        }
        let out = Self::from_unsorted(atoms);
        let total = out.total();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(
                "probability",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        Ok(out)
    }

    pub fn point_mass(e: E) -> Self {
        FiniteDistribution { atoms: vec![(e, 1.0)] }
    }

    fn from_unsorted(mut atoms: Vec<(E, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        FiniteDistribution {
            atoms: reduce_sorted(atoms),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&E, f64)> {
        self.atoms.iter().map(|(e, p)| (e, *p))
    }

    pub fn prob(&self, e: &E) -> f64 {
        self.atoms
            .binary_search_by(|(k, _)| k.cmp(e))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }

    pub fn probs(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|(_, p)| *p)
    }

    /// Running sums of the probabilities in key order.
    fn cumulative(&self) -> Vec<f64> {
        self.atoms
            .iter()
            .scan(0.0, |acc, (_, p)| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

impl FiniteDistribution<WreathElement> {
    pub fn from_step(mu: &StepDistribution) -> Self {
        Self::from_unsorted(mu.iter().map(|(g, p)| (g.clone(), p)).collect())
    }
}

fn reduce_sorted<E: PartialEq>(atoms: Vec<(E, f64)>) -> Vec<(E, f64)> {
    let mut out: Vec<(E, f64)> = Vec::with_capacity(atoms.len());
    for (e, p) in atoms {
        match out.last_mut() {
            Some((last, q)) if *last == e => *q += p,
            _ => out.push((e, p)),
        }
    }
    out
}

/// `-Σ p ln p` over the atoms, summed in key order.
pub fn shannon_entropy<E>(p: &FiniteDistribution<E>) -> f64 {
    p.atoms.iter().map(|(_, x)| kappa(*x)).sum()
}

/// Rows of `p` handled per work unit. Fixed so the reduction order, and hence
/// every floating-point sum, is independent of the execution policy.
const CONVOLUTION_CHUNK: usize = 2048;

/// Exact convolution `p * q` under `law`.
///
/// Contributions are produced per fixed-size chunk of `p`, stably sorted by
/// key and summed in enumeration order.
pub fn convolve<L: GroupLaw>(
    law: &L,
    p: &FiniteDistribution<L::Elem>,
    q: &FiniteDistribution<L::Elem>,
    exec: Exec,
) -> Result<FiniteDistribution<L::Elem>> {
    let chunks = p.atoms.len().div_ceil(CONVOLUTION_CHUNK);
    let parts = exec.map_indices(chunks, |c| -> Result<Vec<(L::Elem, f64)>> {
        let lo = c * CONVOLUTION_CHUNK;
        let hi = (lo + CONVOLUTION_CHUNK).min(p.atoms.len());
        let mut out = Vec::with_capacity((hi - lo) * q.atoms.len());
        for (a, x) in &p.atoms[lo..hi] {
            for (b, y) in &q.atoms {
                out.push((law.compose(a, b)?, x * y));
            }
        }
        out.sort_by(|u, v| u.0.cmp(&v.0));
        Ok(reduce_sorted(out))
    });
    let mut all = Vec::new();
    for part in parts {
        all.extend(part?);
    }
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::slice::ParallelSliceMut;
            all.par_sort_by(|u, v| u.0.cmp(&v.0));
        }
        _ => all.sort_by(|u, v| u.0.cmp(&v.0)),
    }
    Ok(FiniteDistribution {
        atoms: reduce_sorted(all),
    })
}

/// Plug-in entropy of a sample with the Miller–Madow correction
/// `(K - 1) / (2N)`, `K` the number of distinct observed values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlugInEstimate {
    pub plug_in: f64,
    pub correction: f64,
    pub support: usize,
    pub samples: usize,
}

impl PlugInEstimate {
    pub fn corrected(&self) -> f64 {
        self.plug_in + self.correction
    }
}

/// Plug-in entropy of the empirical distribution of `sample`.
pub fn plug_in_entropy<E: Ord>(sample: &mut [E]) -> PlugInEstimate {
    sample.sort();
    let n = sample.len();
    let mut counts = Vec::new();
    let mut k = 0;
    while k < n {
        let mut j = k + 1;
        while j < n && sample[j] == sample[k] {
            j += 1;
        }
        counts.push(j - k);
        k = j;
    }
    let plug_in = counts_entropy(counts.iter().copied(), n);
    PlugInEstimate {
        plug_in,
        correction: if n == 0 {
            0.0
        } else {
            (counts.len() as f64 - 1.0) / (2.0 * n as f64)
        },
        support: counts.len(),
        samples: n,
    }
}

fn counts_entropy<I: Iterator<Item = usize>>(counts: I, total: usize) -> f64 {
    let t = total as f64;
    counts.map(|c| kappa(c as f64 / t)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorMode {
    Exact,
    PlugIn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEntry {
    pub n: usize,
    /// `H(μ^{*n})` in nats (Miller–Madow corrected in plug-in mode).
    pub entropy: f64,
    pub ratio: f64,
    /// `H(μ^{*n}) - H(μ^{*(n-1)})`.
    pub increment: f64,
    pub mode: EstimatorMode,
    pub support: usize,
    pub samples: Option<usize>,
    pub correction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub units: String,
    pub budget: usize,
    pub entries: Vec<EntropyEntry>,
}

impl EntropyReport {
    pub fn entry(&self, n: usize) -> Option<&EntropyEntry> {
        self.entries.iter().find(|e| e.n == n)
    }

    /// Largest `n` computed exactly.
    pub fn exact_horizon(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.mode == EstimatorMode::Exact)
            .map(|e| e.n)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyOptions {
    pub n_max: usize,
    /// Maximum number of products `|μ^{*n}|·|μ|` formed in one convolution.
    pub budget: usize,
    pub sampling: Option<Sampling>,
}

pub const DEFAULT_BUDGET: usize = 5_000_000;

/// Tolerance for the monotonicity checks on exact increments.
const INCREMENT_TOLERANCE: f64 = 1e-9;

/// `H(μ^{*n})` for `n = 1..=n_max`: exact while the convolution fits in the
/// budget, then plug-in estimates from sampled walks if sampling is enabled.
pub fn entropy_sequence<L: GroupLaw>(
    law: &L,
    mu: &FiniteDistribution<L::Elem>,
    opts: &EntropyOptions,
    exec: Exec,
) -> Result<EntropyReport> {
    if opts.n_max == 0 {
        return Err(Error::validation("n_max", "must be at least 1"));
    }
    let mut entries: Vec<EntropyEntry> = Vec::with_capacity(opts.n_max);
    let mut current = mu.clone();
    let mut prev_h = 0.0;
    let mut n = 1;
    loop {
        let h = shannon_entropy(&current);
        entries.push(EntropyEntry {
            n,
            entropy: h,
            ratio: h / n as f64,
            increment: h - prev_h,
            mode: EstimatorMode::Exact,
            support: current.len(),
            samples: None,
            correction: 0.0,
        });
        prev_h = h;
        if n == opts.n_max {
            break;
        }
        if current.len().saturating_mul(mu.len()) > opts.budget {
            break;
        }
        current = convolve(law, &current, mu, exec)?;
        n += 1;
    }
    check_exact_increments(&entries)?;
    if n < opts.n_max {
        let Some(sampling) = opts.sampling else {
            return Err(Error::Resource(format!(
                "exact convolution stops at n = {n} within budget {}; enable sampling to continue to n = {}",
                opts.budget, opts.n_max
            )));
        };
        let estimates = sampled_entropies(law, mu, n + 1, opts.n_max, sampling, exec)?;
        for (k, est) in estimates.into_iter().enumerate() {
            let m = n + 1 + k;
            let h = est.corrected();
            entries.push(EntropyEntry {
                n: m,
                entropy: h,
                ratio: h / m as f64,
                increment: h - prev_h,
                mode: EstimatorMode::PlugIn,
                support: est.support,
                samples: Some(est.samples),
                correction: est.correction,
            });
            prev_h = h;
        }
    }
    Ok(EntropyReport {
        units: "nats".into(),
        budget: opts.budget,
        entries,
    })
}

fn check_exact_increments(entries: &[EntropyEntry]) -> Result<()> {
    for w in entries.windows(2) {
        if w[1].increment < -INCREMENT_TOLERANCE {
            return Err(Error::Integrity(format!(
                "exact entropy decreased at n = {}: increment {}",
                w[1].n, w[1].increment
            )));
        }
        if w[0].n > 1 && w[1].increment > w[0].increment + INCREMENT_TOLERANCE {
            return Err(Error::Integrity(format!(
                "exact entropy increments grew at n = {}: {} > {}",
                w[1].n, w[1].increment, w[0].increment
            )));
        }
    }
    Ok(())
}

fn sampled_entropies<L: GroupLaw>(
    law: &L,
    mu: &FiniteDistribution<L::Elem>,
    from: usize,
    to: usize,
    sampling: Sampling,
    exec: Exec,
) -> Result<Vec<PlugInEstimate>> {
    if sampling.samples == 0 {
        return Err(Error::validation("samples", "must be at least 1"));
    }
    let cumulative = mu.cumulative();
    let total = *cumulative.last().expect("nonempty");
    let paths = exec.map_indices(sampling.samples, |k| -> Result<Vec<L::Elem>> {
        use rand::Rng;
        let mut rng = path_rng(sampling.seed, k as u64);
        let mut w = law.identity();
        let mut out = Vec::with_capacity(to + 1 - from);
        for t in 1..=to {
            let u = rng.random::<f64>() * total;
            let i = cumulative.partition_point(|&c| c <= u).min(mu.len() - 1);
            w = law.compose(&w, &mu.atoms[i].0)?;
            if t >= from {
                out.push(w.clone());
            }
        }
        Ok(out)
    });
    let paths = paths.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..=to - from)
        .map(|k| {
            let mut sample: Vec<L::Elem> = paths.iter().map(|p| p[k].clone()).collect();
            plug_in_entropy(&mut sample)
        })
        .collect())
}

/// Per-path labels for a family of named partitions of the path space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledEnsemble {
    paths: usize,
    partitions: BTreeMap<String, Vec<String>>,
}

impl LabeledEnsemble {
    pub fn new(paths: usize) -> Self {
        LabeledEnsemble {
            paths,
            partitions: BTreeMap::new(),
        }
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn register(&mut self, name: &str, labels: Vec<String>) -> Result<()> {
        if labels.len() != self.paths {
            return Err(Error::validation(
                name,
                format!("{} labels for {} paths", labels.len(), self.paths),
            ));
        }
        self.partitions.insert(name.to_string(), labels);
        Ok(())
    }

    fn columns<'a>(&'a self, names: &[&str]) -> Result<Vec<&'a [String]>> {
        names
            .iter()
            .map(|n| {
                self.partitions
                    .get(*n)
                    .map(Vec::as_slice)
                    .ok_or_else(|| Error::Usage(format!("unregistered partition {n:?}")))
            })
            .collect()
    }

    /// Plug-in entropy of the join of the named partitions (no bias correction).
    pub fn partition_entropy(&self, names: &[&str]) -> Result<f64> {
        let cols = self.columns(names)?;
        if self.paths == 0 {
            return Ok(0.0);
        }
        let mut counts: BTreeMap<Vec<&str>, usize> = BTreeMap::new();
        for k in 0..self.paths {
            let key: Vec<&str> = cols.iter().map(|c| c[k].as_str()).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
        Ok(counts_entropy(counts.into_values(), self.paths))
    }

    /// `H(ρ | γ) = H(ρ ∨ γ) - H(γ)` for joins of named partitions.
    pub fn conditional_entropy(&self, rho: &[&str], gamma: &[&str]) -> Result<f64> {
        let joint: Vec<&str> = rho.iter().chain(gamma.iter()).copied().collect();
        Ok(self.partition_entropy(&joint)? - self.partition_entropy(gamma)?)
    }
}

/// `h(p) = -p ln p - (1-p) ln(1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("binary entropy needs p in [0, 1], got {p}")));
    }
    Ok(kappa(p) + kappa(1.0 - p))
}

/// `|D|·h(α)`, an upper bound for the entropy of a random subset of `D`
/// with expected size `α|D|`, valid for `α ≤ 1/2`.
pub fn subset_entropy_bound(size: usize, alpha: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&alpha) {
        return Err(Error::Domain(format!("subset bound needs alpha in [0, 1/2], got {alpha}")));
    }
    Ok(size as f64 * binary_entropy(alpha)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObscuringThreshold {
    pub delta: f64,
    /// Size of the retained set `Q`.
    pub retained: usize,
    /// `Σ_{d ∉ Q} κ(P(X = d))`.
    pub tail: f64,
}

/// A `δ` such that every event `E` with `P(E) < δ` obscures `X` to entropy
/// below `ε`.
///
/// `Q` is the shortest prefix of the atoms in decreasing probability whose
/// complement has `κ`-mass below `ε/2` and which contains every atom of mass
/// at least `1/e`. Then `δ < 1/e` is the largest value found by bisection
/// with `κ(1-δ) + |Q| κ(δ) < ε/2`.
pub fn obscuring_threshold<E>(p: &FiniteDistribution<E>, eps: f64) -> Result<ObscuringThreshold> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {eps}")));
    }
    let inv_e = (-1.0f64).exp();
    let mut probs: Vec<f64> = p.atoms.iter().map(|(_, x)| *x).collect();
    probs.sort_by(|a, b| b.total_cmp(a));
    let heavy = probs.iter().take_while(|&&x| x >= inv_e).count();
    // suffix κ-sums
    let mut tails = vec![0.0; probs.len() + 1];
    for k in (0..probs.len()).rev() {
        tails[k] = tails[k + 1] + kappa(probs[k]);
    }
    let retained = (heavy..=probs.len())
        .find(|&k| tails[k] < eps / 2.0)
        .expect("the empty tail has zero mass");
    let q = retained as f64;
    let g = |d: f64| kappa(1.0 - d) + q * kappa(d);
    let target = eps / 2.0;
    let mut lo = 0.0f64;
    let mut hi = inv_e;
    if g(hi) < target {
        lo = hi;
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    // strictly inside (0, 1/e) with g(δ) < ε/2
    let delta = if lo >= inv_e { inv_e * (1.0 - 1e-12) } else { lo };
    if !(delta > 0.0 && g(delta) < target) {
        return Err(Error::Domain(format!("no admissible delta found for epsilon {eps}")));
    }
    Ok(ObscuringThreshold {
        delta,
        retained,
        tail: tails[retained],
    })
}

/// Entropy of `X̃` (equal to `X` on `E`, to `⋆` off `E`) given the masses
/// `P({X = d} ∩ E)` of each atom inside the event.
pub fn obscured_entropy(masses_in_event: &[f64]) -> f64 {
    let inside: f64 = masses_in_event.iter().sum();
    kappa(1.0 - inside) + masses_in_event.iter().map(|&m| kappa(m)).sum::<f64>()
}

/// Outcome of testing `ĥ ≤ ℓ̂·v + slack`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuivarchReport {
    pub entropy: f64,
    pub speed: f64,
    pub growth: f64,
    pub bound: f64,
    pub slack: f64,
    /// `ℓ̂·v + slack - ĥ`; negative on violation.
    pub margin: f64,
    pub holds: bool,
}

/// Checks the fundamental inequality with slack three combined standard errors.
pub fn guivarch_check(h: f64, h_se: f64, speed: f64, speed_se: f64, growth: f64) -> GuivarchReport {
    let bound = speed * growth;
    let slack = 3.0 * (h_se.powi(2) + (growth * speed_se).powi(2)).sqrt();
    let margin = bound + slack - h;
    GuivarchReport {
        entropy: h,
        speed,
        growth,
        bound,
        slack,
        margin,
        holds: margin >= 0.0,
    }
}
