//! Seeded random walks on wreath products.
//!
//! A walk `w_n = g_1 ⋯ g_n` is driven by i.i.d. increments from a finite
//! [`StepDistribution`]. Every path draws from its own ChaCha8 stream
//! selected by `(master seed, path index)`, so results do not depend on how
//! paths are scheduled across threads.
//!
//! Walks on free solvable groups run on their Magnus image
//! `ℤᵈ ≀ S_{d,k-1}`, and walks on a plain base group use the trivial lamp
//! group `ℤ/1`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::group::{Element, Group};
use crate::magnus;
use crate::wreath::{LampChange, LampConfig, WreathElement, WreathProduct};

/// Finitely supported probability measure on a wreath product.
#[derive(Clone, Debug)]
pub struct StepDistribution {
    group: WreathProduct,
    atoms: Vec<WreathElement>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

const PROB_TOLERANCE: f64 = 1e-9;

impl StepDistribution {
    pub fn new(group: WreathProduct, support: Vec<(WreathElement, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::validation("support", "empty support"));
        }
        let mut seen = BTreeSet::new();
        let mut total = 0.0;
        for (g, p) in &support {
            group.check(g)?;
            if !(p.is_finite() && *p > 0.0) {
                return Err(Error::validation("probability", format!("{p} is not positive")));
            }
            if !seen.insert(g) {
                return Err(Error::validation("support", format!("repeated atom {g}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::validation(
                "probability",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        let (atoms, probs): (Vec<_>, Vec<_>) = support.into_iter().unzip();
        let cumulative = probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(StepDistribution {
            group,
            atoms,
            probs,
            cumulative,
        })
    }

    /// Uniform measure on `atoms` (repeated atoms are merged with added mass).
    pub fn uniform(group: WreathProduct, atoms: Vec<WreathElement>) -> Result<Self> {
        let k = atoms.len() as f64;
        Self::from_weights(group, atoms.into_iter().map(|a| (a, 1.0 / k)))
    }

    /// Builds a distribution from possibly repeated weighted atoms.
    pub fn from_weights<I>(group: WreathProduct, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (WreathElement, f64)>,
    {
        let mut merged: BTreeMap<WreathElement, f64> = BTreeMap::new();
        for (g, p) in weights {
            *merged.entry(g).or_insert(0.0) += p;
        }
        Self::new(group, merged.into_iter().collect())
    }

    pub fn group(&self) -> &WreathProduct {
        &self.group
    }

    pub fn atoms(&self) -> &[WreathElement] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WreathElement, f64)> {
        self.atoms.iter().zip(self.probs.iter().copied())
    }

    /// Index of an atom drawn from `rng`.
    pub fn sample_index<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty support");
        let u = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.atoms.len() - 1)
    }

    /// Convolution `self * other`, merged on equal products.
    pub fn convolve(&self, other: &StepDistribution) -> Result<StepDistribution> {
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for (a, p) in self.iter() {
            for (b, q) in other.iter() {
                weights.push((self.group.multiply(a, b)?, p * q));
            }
        }
        Self::from_weights(self.group.clone(), weights)
    }
}

/// Named step distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// Switch the lamp at the current site uniformly (including "no change"),
    /// then step to a uniform base generator.
    SwitchWalk,
    /// Either switch the current lamp by a lamp generator or move by a base
    /// generator, uniformly over all of these moves.
    WalkOrSwitch,
    /// Switch, step, switch.
    Sws,
    /// `δ x δ` for the first lamp generator `δ` and uniform base generators `x`.
    ExampleConjugate,
    /// Simple random walk on the base; lamps untouched.
    SimpleBase,
    /// Explicit atoms in the wreath text form `delta(pos)=value; ... @ base`.
    Custom { atoms: Vec<CustomAtom> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomAtom {
    pub element: String,
    pub prob: f64,
}

/// Uniform switch `κ`: the identity together with the lamp generators at `e`.
fn switch_atoms(group: &WreathProduct) -> Result<Vec<WreathElement>> {
    let mut out = vec![group.identity()];
    for a in group.lamp.generators()? {
        out.push(group.embed_lamp(&a)?);
    }
    Ok(out)
}

fn base_steps(group: &WreathProduct) -> Result<Vec<WreathElement>> {
    let gens = group.base.generators()?;
    if gens.is_empty() {
        return Err(Error::validation("group", "base group has no nontrivial generators"));
    }
    gens.iter().map(|b| group.embed_base(b)).collect()
}

fn uniform_product(group: &WreathProduct, factors: &[Vec<WreathElement>]) -> Result<StepDistribution> {
    let mut acc = vec![(group.identity(), 1.0)];
    for factor in factors {
        let w = 1.0 / factor.len() as f64;
        let mut next = Vec::with_capacity(acc.len() * factor.len());
        for (a, p) in &acc {
            for b in factor {
                next.push((group.multiply(a, b)?, p * w));
            }
        }
        acc = next;
    }
    StepDistribution::from_weights(group.clone(), acc)
}

/// Builds a named step distribution on `group`.
pub fn standard_measure(group: &WreathProduct, spec: &MeasureSpec) -> Result<StepDistribution> {
    match spec {
        MeasureSpec::SwitchWalk => {
            uniform_product(group, &[switch_atoms(group)?, base_steps(group)?])
        }
        MeasureSpec::Sws => {
            let k = switch_atoms(group)?;
            uniform_product(group, &[k.clone(), base_steps(group)?, k])
        }
        MeasureSpec::WalkOrSwitch => {
            let mut atoms = switch_atoms(group)?.split_off(1);
            atoms.extend(base_steps(group)?);
            StepDistribution::uniform(group.clone(), atoms)
        }
        MeasureSpec::ExampleConjugate => {
            let a = group.lamp.generator(1)?;
            if a == group.lamp.identity() {
                return Err(Error::validation("group", "lamp group is trivial"));
            }
            let delta = vec![group.embed_lamp(&a)?];
            uniform_product(group, &[delta.clone(), base_steps(group)?, delta])
        }
        MeasureSpec::SimpleBase => StepDistribution::uniform(group.clone(), base_steps(group)?),
        MeasureSpec::Custom { atoms } => {
            let support = atoms
                .iter()
                .map(|a| Ok((group.parse_element(&a.element)?, a.prob)))
                .collect::<Result<Vec<_>>>()?;
            StepDistribution::new(group.clone(), support)
        }
    }
}

/// Simple random walk on `S_{d,k}` (`k ≥ 2`) as a measure on its Magnus image.
pub fn solvable_generator_measure(rank: usize, level: usize) -> Result<StepDistribution> {
    if level < 2 {
        return Err(Error::validation("level", "use the base group directly for level 1"));
    }
    let quotient = Group::solvable(rank, level - 1)?;
    let target = magnus::magnus_target(&quotient)?;
    let mut atoms = Vec::with_capacity(2 * rank);
    for i in 1..=rank as i8 {
        for l in [i, -i] {
            atoms.push(magnus::magnus_embed(&quotient, &[l])?);
        }
    }
    StepDistribution::uniform(target, atoms)
}

/// Deterministic per-path generator: `(master seed, path index)` selects a
/// ChaCha8 key and stream.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Incremental walker holding only the current state.
pub struct Walker<'a> {
    mu: &'a StepDistribution,
    rng: ChaCha8Rng,
    lamps: LampConfig,
    position: Element,
    time: usize,
}

impl<'a> Walker<'a> {
    pub fn new(mu: &'a StepDistribution, seed: u64, path_index: u64) -> Self {
        Walker {
            mu,
            rng: path_rng(seed, path_index),
            lamps: LampConfig::new(),
            position: mu.group.base.identity(),
            time: 0,
        }
    }

    /// Draws and applies one increment; returns its atom index and the lamp changes.
    pub fn step(&mut self) -> Result<(usize, Vec<LampChange>)> {
        let k = self.mu.sample_index(&mut self.rng);
        let changes = self
            .mu
            .group
            .apply_in_place(&mut self.lamps, &mut self.position, &self.mu.atoms[k])?;
        self.time += 1;
        Ok((k, changes))
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn lamps(&self) -> &LampConfig {
        &self.lamps
    }

    pub fn position(&self) -> &Element {
        &self.position
    }

    pub fn state(&self) -> WreathElement {
        WreathElement {
            lamps: self.lamps.clone(),
            base: self.position.clone(),
        }
    }
}

/// One entry of the modification log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Modification {
    pub time: usize,
    pub site: Element,
    pub old: Element,
    pub new: Element,
}

/// A recorded walk of horizon `n`.
///
/// Stores the increments, the base positions `X_0..X_n`, the final lamp
/// configuration and a log of every lamp change. Intermediate lamp
/// configurations are recovered by replaying the log.
#[derive(Clone, Debug)]
pub struct SamplePath {
    mu: Arc<StepDistribution>,
    seed: u64,
    path_index: u64,
    steps: Vec<u32>,
    positions: Vec<Element>,
    log: Vec<Modification>,
    /// `log_end[i]` is the number of log entries with time `≤ i`.
    log_end: Vec<usize>,
    lamps: LampConfig,
}

impl SamplePath {
    pub fn generate(mu: Arc<StepDistribution>, n: usize, seed: u64, path_index: u64) -> Result<Self> {
        let mut walker = Walker::new(&mu, seed, path_index);
        let mut steps = Vec::with_capacity(n);
        let mut positions = Vec::with_capacity(n + 1);
        positions.push(walker.position().clone());
        let mut log = Vec::new();
        let mut log_end = Vec::with_capacity(n + 1);
        log_end.push(0);
        for i in 1..=n {
            let (k, changes) = walker.step()?;
            steps.push(k as u32);
            positions.push(walker.position().clone());
            log.extend(changes.into_iter().map(|c| Modification {
                time: i,
                site: c.site,
                old: c.old,
                new: c.new,
            }));
            log_end.push(log.len());
        }
        let lamps = walker.lamps.clone();
        drop(walker);
        Ok(SamplePath {
            mu,
            seed,
            path_index,
            steps,
            positions,
            log,
            log_end,
            lamps,
        })
    }

    /// Builds a path from explicit increments (used for hand-made fixtures).
    pub fn from_increments(mu: Arc<StepDistribution>, steps: Vec<usize>) -> Result<Self> {
        let group = mu.group.clone();
        let mut lamps = LampConfig::new();
        let mut position = group.base.identity();
        let mut positions = vec![position.clone()];
        let mut log = Vec::new();
        let mut log_end = vec![0];
        for (t, &k) in steps.iter().enumerate() {
            let g = mu
                .atoms
                .get(k)
                .ok_or_else(|| Error::Usage(format!("atom index {k} out of range")))?;
            for c in group.apply_in_place(&mut lamps, &mut position, g)? {
                log.push(Modification {
                    time: t + 1,
                    site: c.site,
                    old: c.old,
                    new: c.new,
                });
            }
            positions.push(position.clone());
            log_end.push(log.len());
        }
        Ok(SamplePath {
            mu,
            seed: 0,
            path_index: 0,
            steps: steps.into_iter().map(|k| k as u32).collect(),
            positions,
            log,
            log_end,
            lamps,
        })
    }

    pub fn measure(&self) -> &StepDistribution {
        &self.mu
    }

    pub fn group(&self) -> &WreathProduct {
        &self.mu.group
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    /// Increment `g_i`, `1 ≤ i ≤ n`.
    pub fn increment(&self, i: usize) -> &WreathElement {
        &self.mu.atoms[self.steps[i - 1] as usize]
    }

    pub fn step_indices(&self) -> &[u32] {
        &self.steps
    }

    /// Base position `X_i`, `0 ≤ i ≤ n`.
    pub fn position(&self, i: usize) -> &Element {
        &self.positions[i]
    }

    pub fn positions(&self) -> &[Element] {
        &self.positions
    }

    pub fn log(&self) -> &[Modification] {
        &self.log
    }

    /// Log entries written at time `i`.
    pub fn changes_at(&self, i: usize) -> &[Modification] {
        &self.log[self.log_end[i - 1]..self.log_end[i]]
    }

    /// Final lamp configuration `φ_n`.
    pub fn final_lamps(&self) -> &LampConfig {
        &self.lamps
    }

    /// `φ_i`, replayed from the log.
    pub fn lamps_at(&self, i: usize) -> LampConfig {
        let lamp = &self.mu.group.lamp;
        let mut out = LampConfig::new();
        for m in &self.log[..self.log_end[i]] {
            out.set(lamp, m.site.clone(), m.new.clone());
        }
        out
    }

    /// `w_i = (φ_i, X_i)`.
    pub fn state_at(&self, i: usize) -> WreathElement {
        WreathElement {
            lamps: self.lamps_at(i),
            base: self.positions[i].clone(),
        }
    }

    /// Number of distinct base positions among `X_0..X_n`.
    pub fn range(&self) -> usize {
        self.positions.iter().collect::<BTreeSet<_>>().len()
    }
}

/// Sorted times `i` at which the lamp at `site` changed.
pub fn modification_times(path: &SamplePath, site: &Element) -> Vec<usize> {
    path.log()
        .iter()
        .filter(|m| m.site == *site)
        .map(|m| m.time)
        .collect()
}

/// `φ_T` of a path with horizon `T`, standing in for the limit configuration
/// seen from time `n`.
pub fn limit_config_proxy(path: &SamplePath, n: usize) -> Result<LampConfig> {
    if path.horizon() < n {
        return Err(Error::Usage(format!(
            "proxy horizon {} is shorter than n = {n}",
            path.horizon()
        )));
    }
    Ok(path.final_lamps().clone())
}

/// Ensemble size, horizon and master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub horizon: usize,
    pub paths: usize,
    pub seed: u64,
}

/// Per-path summary kept by [`run_ensemble`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub index: usize,
    /// `|X_n|` when the base group has a computable word length.
    pub base_length: Option<u64>,
    /// Number of times `i ∈ 1..=n` with `X_i = e`.
    pub returns: u64,
    pub support_size: usize,
    /// Modification counts inside the window, one per monitored site.
    pub site_counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub spec: EnsembleSpec,
    pub window: (usize, usize),
    pub sites: Vec<String>,
    pub paths: Vec<PathSummary>,
}

fn summarize(
    mu: &StepDistribution,
    spec: &EnsembleSpec,
    sites: &[Element],
    window: (usize, usize),
    index: usize,
) -> Result<PathSummary> {
    let base = &mu.group.base;
    let id = base.identity();
    let mut walker = Walker::new(mu, spec.seed, index as u64);
    let mut counts = vec![0u64; sites.len()];
    let mut returns = 0;
    for i in 1..=spec.horizon {
        let (_, changes) = walker.step()?;
        if i >= window.0 && i <= window.1 {
            for c in &changes {
                if let Some(k) = sites.iter().position(|s| *s == c.site) {
                    counts[k] += 1;
                }
            }
        }
        if *walker.position() == id {
            returns += 1;
        }
    }
    let base_length = match base {
        Group::Solvable { .. } => None,
        _ => Some(base.word_length(walker.position())?),
    };
    Ok(PathSummary {
        index,
        base_length,
        returns,
        support_size: walker.lamps().len(),
        site_counts: counts,
    })
}

/// Runs `spec.paths` independent walks, tracking modifications of `sites`
/// during the inclusive time window.
pub fn run_ensemble(
    mu: &StepDistribution,
    spec: EnsembleSpec,
    sites: &[Element],
    window: (usize, usize),
    exec: Exec,
) -> Result<EnsembleStats> {
    if spec.paths == 0 {
        return Err(Error::validation("paths", "must be at least 1"));
    }
    if spec.horizon == 0 {
        return Err(Error::validation("n", "must be at least 1"));
    }
    if window.0 > window.1 || window.1 > spec.horizon {
        return Err(Error::validation(
            "window",
            format!(
                "[{}, {}] must be an interval inside [0, {}]",
                window.0, window.1, spec.horizon
            ),
        ));
    }
    for s in sites {
        mu.group.base.check(s)?;
    }
    let paths = exec
        .map_indices(spec.paths, |k| summarize(mu, &spec, sites, window, k))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleStats {
        spec,
        window,
        sites: sites.iter().map(|s| s.to_string()).collect(),
        paths,
    })
}

/// Mean and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Estimate {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Estimate { mean: 0.0, se: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Estimate { mean, se: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Estimate {
            mean,
            se: (var / n).sqrt(),
        }
    }
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteStats {
    pub site: String,
    pub mean: f64,
    pub se: f64,
    pub median: f64,
}

/// Modification-count statistics per monitored site over the ensemble window.
pub fn stabilization_stats(stats: &EnsembleStats) -> Vec<SiteStats> {
    stats
        .sites
        .iter()
        .enumerate()
        .map(|(k, site)| {
            let xs: Vec<f64> = stats.paths.iter().map(|p| p.site_counts[k] as f64).collect();
            let e = Estimate::of(&xs);
            SiteStats {
                site: site.clone(),
                mean: e.mean,
                se: e.se,
                median: median(&xs),
            }
        })
        .collect()
}

/// Estimate of the speed `ℓ` from `|X_n|/n`.
pub fn empirical_speed(stats: &EnsembleStats) -> Result<Estimate> {
    let n = stats.spec.horizon as f64;
    let xs = stats
        .paths
        .iter()
        .map(|p| {
            p.base_length
                .map(|l| l as f64 / n)
                .ok_or_else(|| Error::Unsupported("word length of the base group".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimate::of(&xs))
}

/// Number of returns of the base projection to the identity, per path.
pub fn empirical_returns(stats: &EnsembleStats) -> Vec<u64> {
    stats.paths.iter().map(|p| p.returns).collect()
}
