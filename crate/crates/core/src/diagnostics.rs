//! Coarse trajectories, bad increments and lamp reconstruction.
//!
//! Time is cut into intervals `I_j = {(j-1)t₀+1, …, jt₀}` for
//! `j = 1..=m`, `m = ⌊n/t₀⌋`, followed by the final interval
//! `{mt₀+1, …, n}`; we write `s = mt₀`. An increment is good when it moves
//! within the ball `R` of radius `r`, writes only inside `R`, and writes values
//! from `L`. Modifications made during good intervals stay inside the coarse
//! neighborhood `N = ∪_{j<m} X_{jt₀}·ball(r t₀)`, so knowing the coarse
//! trajectory and the bad increments determines the lamps outside `N`.
//!
//! The limit configuration is proxied by the final configuration `φ_T` of a
//! path with horizon `T ≥ n`.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::entropy::plug_in_entropy;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::group::{Element, Group};
use crate::walks::{limit_config_proxy, Estimate, SamplePath, StepDistribution};
use crate::wreath::{LampConfig, WreathElement, WreathProduct};

/// Admissible lamp values `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LampSet {
    /// Values of word length at most `λ`.
    Ball(u64),
    /// The whole lamp group.
    Whole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoodnessParams {
    pub t0: usize,
    pub r: u64,
    pub lamps: LampSet,
}

impl GoodnessParams {
    pub fn new(t0: usize, r: u64, lamps: LampSet) -> Result<Self> {
        if t0 == 0 {
            return Err(Error::validation("t0", "must be at least 1"));
        }
        Ok(GoodnessParams { t0, r, lamps })
    }

    fn validate(&self) -> Result<()> {
        if self.t0 == 0 {
            return Err(Error::validation("t0", "must be at least 1"));
        }
        Ok(())
    }

    pub fn lambda(&self) -> Option<u64> {
        match self.lamps {
            LampSet::Ball(l) => Some(l),
            LampSet::Whole => None,
        }
    }

    /// Radius of `R^{t₀}`.
    pub fn reach(&self) -> u64 {
        self.r
            .checked_mul(self.t0 as u64)
            .expect("coarse radius overflow")
    }
}

/// `X_{t₀}, X_{2t₀}, …, X_{mt₀}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoarseTrajectory {
    pub t0: usize,
    pub points: Vec<Element>,
    origin: Element,
}

impl CoarseTrajectory {
    pub fn new(t0: usize, origin: Element, points: Vec<Element>) -> Self {
        CoarseTrajectory { t0, points, origin }
    }

    /// `m = ⌊n/t₀⌋`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `X_{jt₀}` for `0 ≤ j ≤ m`.
    pub fn at(&self, j: usize) -> &Element {
        if j == 0 {
            &self.origin
        } else {
            &self.points[j - 1]
        }
    }

    /// `X_s`.
    pub fn last(&self) -> &Element {
        self.at(self.len())
    }
}

fn check_horizon(path: &SamplePath, n: usize) -> Result<()> {
    if n > path.horizon() {
        return Err(Error::Usage(format!(
            "n = {n} exceeds the path horizon {}",
            path.horizon()
        )));
    }
    Ok(())
}

pub fn coarse_trajectory(path: &SamplePath, t0: usize, n: usize) -> Result<CoarseTrajectory> {
    if t0 == 0 {
        return Err(Error::validation("t0", "must be at least 1"));
    }
    check_horizon(path, n)?;
    let m = n / t0;
    Ok(CoarseTrajectory {
        t0,
        points: (1..=m).map(|j| path.position(j * t0).clone()).collect(),
        origin: path.position(0).clone(),
    })
}

/// Whether `g` is `(R, L)`-good.
pub fn is_good(group: &WreathProduct, g: &WreathElement, params: &GoodnessParams) -> Result<bool> {
    if !group.base.in_ball(&g.base, params.r)? {
        return Ok(false);
    }
    for (site, value) in g.lamps.iter() {
        if !group.base.in_ball(site, params.r)? {
            return Ok(false);
        }
        if let LampSet::Ball(lambda) = params.lamps {
            if group.lamp.word_length(value)? > lambda {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `true` for each good interval `I_1..I_m`.
pub fn classify_intervals(path: &SamplePath, n: usize, params: &GoodnessParams) -> Result<Vec<bool>> {
    params.validate()?;
    check_horizon(path, n)?;
    let group = path.group();
    let mu = path.measure();
    let atom_good = mu
        .atoms()
        .iter()
        .map(|g| is_good(group, g, params))
        .collect::<Result<Vec<_>>>()?;
    let steps = path.step_indices();
    Ok((0..n / params.t0)
        .map(|j| {
            steps[j * params.t0..(j + 1) * params.t0]
                .iter()
                .all(|&k| atom_good[k as usize])
        })
        .collect())
}

/// `β_n`: the increments of each bad interval (`None` stands for `⋆`), and the
/// increments of the final interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadIncrementRecord {
    pub t0: usize,
    pub n: usize,
    pub intervals: Vec<Option<Vec<WreathElement>>>,
    pub final_interval: Vec<WreathElement>,
}

impl BadIncrementRecord {
    pub fn is_bad(&self, j: usize) -> bool {
        self.intervals[j - 1].is_some()
    }

    pub fn bad_count(&self) -> usize {
        self.intervals.iter().filter(|z| z.is_some()).count()
    }
}

pub fn bad_increments(path: &SamplePath, n: usize, params: &GoodnessParams) -> Result<BadIncrementRecord> {
    let good = classify_intervals(path, n, params)?;
    let t0 = params.t0;
    let intervals = good
        .iter()
        .enumerate()
        .map(|(j, &ok)| {
            (!ok).then(|| {
                (j * t0 + 1..=(j + 1) * t0)
                    .map(|i| path.increment(i).clone())
                    .collect()
            })
        })
        .collect();
    let s = good.len() * t0;
    Ok(BadIncrementRecord {
        t0,
        n,
        intervals,
        final_interval: (s + 1..=n).map(|i| path.increment(i).clone()).collect(),
    })
}

/// Whether `b` lies in some `X_{jt₀}·ball(r t₀)`, `0 ≤ j < m`.
pub fn in_coarse_neighborhood(
    base: &Group,
    b: &Element,
    coarse: &CoarseTrajectory,
    params: &GoodnessParams,
) -> Result<bool> {
    let reach = params.reach();
    for j in 0..coarse.len() {
        let rel = base.multiply(&base.inverse(coarse.at(j))?, b)?;
        if base.in_ball(&rel, reach)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Replays `increments` from `start`, passing each lamp change to `visit`
/// as `(local step, site, increment value)`; returns the end position.
fn replay<F>(group: &WreathProduct, start: &Element, increments: &[WreathElement], mut visit: F) -> Result<Element>
where
    F: FnMut(usize, Element, &Element) -> Result<()>,
{
    let mut pos = start.clone();
    for (k, g) in increments.iter().enumerate() {
        for (s, a) in g.lamps.iter() {
            visit(k, group.base.multiply(&pos, s)?, a)?;
        }
        pos = group.base.multiply(&pos, &g.base)?;
    }
    Ok(pos)
}

fn check_shapes(coarse: &CoarseTrajectory, beta: &BadIncrementRecord) -> Result<()> {
    if coarse.t0 != beta.t0 || coarse.len() != beta.intervals.len() {
        return Err(Error::Integrity(format!(
            "coarse trajectory ({} points, t0 = {}) does not match bad increments ({} intervals, t0 = {})",
            coarse.len(),
            coarse.t0,
            beta.intervals.len(),
            beta.t0
        )));
    }
    Ok(())
}

/// Replays every bad interval, checking that it chains with the coarse
/// trajectory, and reports lamp changes as `(time, site, value)`.
fn replay_bad_intervals<F>(
    group: &WreathProduct,
    coarse: &CoarseTrajectory,
    beta: &BadIncrementRecord,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, Element, &Element) -> Result<()>,
{
    check_shapes(coarse, beta)?;
    for (idx, z) in beta.intervals.iter().enumerate() {
        let Some(incs) = z else { continue };
        let j = idx + 1;
        if incs.len() != beta.t0 {
            return Err(Error::Integrity(format!(
                "interval {j} records {} increments, expected {}",
                incs.len(),
                beta.t0
            )));
        }
        let t_start = (j - 1) * beta.t0;
        let end = replay(group, coarse.at(j - 1), incs, |k, site, a| {
            visit(t_start + k + 1, site, a)
        })?;
        if end != *coarse.at(j) {
            return Err(Error::Integrity(format!(
                "bad interval {j} ends at {end}, coarse trajectory says {}",
                coarse.at(j)
            )));
        }
    }
    Ok(())
}

/// `Φ_s^out`: the lamps at time `s` outside the coarse neighborhood, from the
/// coarse trajectory and the bad increments alone.
pub fn reconstruct_outside(
    group: &WreathProduct,
    coarse: &CoarseTrajectory,
    beta: &BadIncrementRecord,
    params: &GoodnessParams,
) -> Result<LampConfig> {
    let mut out = LampConfig::new();
    replay_bad_intervals(group, coarse, beta, |_, site, a| {
        if !in_coarse_neighborhood(&group.base, &site, coarse, params)? {
            out.combine(&group.lamp, site, a)?;
        }
        Ok(())
    })?;
    Ok(out)
}

/// `(φ_n, X_n)` from `(φ_s, X_s)` and the final-interval increments.
pub fn reconstruct_state(
    group: &WreathProduct,
    coarse: &CoarseTrajectory,
    beta: &BadIncrementRecord,
    lamps_s: &LampConfig,
) -> Result<WreathElement> {
    check_shapes(coarse, beta)?;
    let s = coarse.len() * coarse.t0;
    if s + beta.final_interval.len() != beta.n {
        return Err(Error::Integrity(format!(
            "final interval has {} increments, expected {}",
            beta.final_interval.len(),
            beta.n - s.min(beta.n)
        )));
    }
    let mut lamps = lamps_s.clone();
    let mut pos = coarse.last().clone();
    for g in &beta.final_interval {
        group.apply_in_place(&mut lamps, &mut pos, g)?;
    }
    Ok(WreathElement { lamps, base: pos })
}

/// Value of `Δ_s(b, i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnstableIncrement {
    Star,
    Value(Element),
}

/// `Δ_s`, stored sparsely: good-interval entries not listed are the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnstableIncrements {
    pub t0: usize,
    pub s: usize,
    pub good: Vec<bool>,
    pub values: Vec<(usize, Element, Element)>,
    identity: Element,
}

impl UnstableIncrements {
    /// `Δ_s(b, i)` for `1 ≤ i ≤ s`.
    pub fn get(&self, b: &Element, i: usize) -> UnstableIncrement {
        let j = (i - 1) / self.t0;
        if !self.good[j] {
            return UnstableIncrement::Star;
        }
        self.values
            .iter()
            .find(|(t, site, _)| *t == i && site == b)
            .map(|(_, _, v)| UnstableIncrement::Value(v.clone()))
            .unwrap_or_else(|| UnstableIncrement::Value(self.identity.clone()))
    }
}

/// `U_s`, `V_s` and `Δ_s` for one path.
#[derive(Clone, Debug, PartialEq)]
pub struct UnstableReport {
    pub s: usize,
    pub t_ratio: f64,
    pub unstable: BTreeSet<Element>,
    pub visits: Vec<usize>,
    pub increments: UnstableIncrements,
}

/// `U_s = {b ∈ N : φ_s(b) ≠ φ_T(b)}` with `T` the path horizon.
pub fn unstable_points(path: &SamplePath, n: usize, params: &GoodnessParams) -> Result<BTreeSet<Element>> {
    params.validate()?;
    let proxy = limit_config_proxy(path, n)?;
    let coarse = coarse_trajectory(path, params.t0, n)?;
    let s = coarse.len() * params.t0;
    let lamps_s = path.lamps_at(s);
    let group = path.group();
    let candidates: BTreeSet<&Element> = lamps_s.support().chain(proxy.support()).collect();
    let mut out = BTreeSet::new();
    for b in candidates {
        if lamps_s.get(b) != proxy.get(b) && in_coarse_neighborhood(&group.base, b, &coarse, params)? {
            out.insert(b.clone());
        }
    }
    Ok(out)
}

/// `V_s`: good intervals `j` whose `X_{(j-1)t₀}·ball(r t₀)` meets `U_s`.
pub fn visit_times(
    path: &SamplePath,
    n: usize,
    params: &GoodnessParams,
    unstable: &BTreeSet<Element>,
) -> Result<Vec<usize>> {
    let good = classify_intervals(path, n, params)?;
    let base = &path.group().base;
    let reach = params.reach();
    let mut out = Vec::new();
    for (idx, ok) in good.iter().enumerate() {
        if !ok {
            continue;
        }
        let start_inv = base.inverse(path.position(idx * params.t0))?;
        for b in unstable {
            if base.in_ball(&base.multiply(&start_inv, b)?, reach)? {
                out.push(idx + 1);
                break;
            }
        }
    }
    Ok(out)
}

/// `Δ_s(b, i) = φ_{i-1}(b)⁻¹ φ_i(b)` for `b ∈ U_s` and `i` in a good interval.
pub fn unstable_increments(
    path: &SamplePath,
    n: usize,
    params: &GoodnessParams,
    unstable: &BTreeSet<Element>,
) -> Result<UnstableIncrements> {
    let good = classify_intervals(path, n, params)?;
    let s = good.len() * params.t0;
    let lamp = &path.group().lamp;
    let mut values = Vec::new();
    for i in 1..=s {
        if !good[(i - 1) / params.t0] {
            continue;
        }
        for m in path.changes_at(i) {
            if unstable.contains(&m.site) {
                values.push((i, m.site.clone(), lamp.multiply(&lamp.inverse(&m.old)?, &m.new)?));
            }
        }
    }
    Ok(UnstableIncrements {
        t0: params.t0,
        s,
        good,
        values,
        identity: lamp.identity(),
    })
}

pub fn unstable_report(path: &SamplePath, n: usize, params: &GoodnessParams) -> Result<UnstableReport> {
    let unstable = unstable_points(path, n, params)?;
    let visits = visit_times(path, n, params, &unstable)?;
    let increments = unstable_increments(path, n, params, &unstable)?;
    Ok(UnstableReport {
        s: increments.s,
        t_ratio: path.horizon() as f64 / n as f64,
        unstable,
        visits,
        increments,
    })
}

/// `Φ_s^in`: the lamps at time `s` inside the coarse neighborhood.
///
/// Sites of `N` outside `U_s` carry their limit value. At unstable sites the
/// value is rebuilt in time order from the bad increments (replayed along the
/// coarse trajectory) and from `Δ_s` on good intervals.
pub fn reconstruct_inside(
    group: &WreathProduct,
    coarse: &CoarseTrajectory,
    beta: &BadIncrementRecord,
    report: &UnstableReport,
    limit: &LampConfig,
    params: &GoodnessParams,
) -> Result<LampConfig> {
    let delta = &report.increments;
    if delta.s != coarse.len() * coarse.t0 || delta.good.len() != beta.intervals.len() {
        return Err(Error::Integrity("unstable increments do not match the coarse trajectory".into()));
    }
    for (j, ok) in delta.good.iter().enumerate() {
        if *ok == beta.is_bad(j + 1) {
            return Err(Error::Integrity(format!(
                "interval {} classified differently by the bad increments and the unstable report",
                j + 1
            )));
        }
    }
    let mut out = LampConfig::new();
    for (b, v) in limit.iter() {
        if !report.unstable.contains(b) && in_coarse_neighborhood(&group.base, b, coarse, params)? {
            out.set(&group.lamp, b.clone(), v.clone());
        }
    }
    let mut events: Vec<(usize, Element, Element)> = Vec::new();
    replay_bad_intervals(group, coarse, beta, |t, site, a| {
        if report.unstable.contains(&site) {
            events.push((t, site, a.clone()));
        }
        Ok(())
    })?;
    events.extend(delta.values.iter().cloned());
    events.sort_by_key(|e| e.0);
    for (_, site, a) in events {
        if !report.unstable.contains(&site) {
            return Err(Error::Integrity(format!("increment recorded at stable site {site}")));
        }
        out.combine(&group.lamp, site, &a)?;
    }
    Ok(out)
}

/// Everything computed for one path and one parameter choice.
#[derive(Clone, Debug)]
pub struct DiagnosticsBundle {
    pub coarse: CoarseTrajectory,
    pub bad: BadIncrementRecord,
    pub unstable: UnstableReport,
}

pub fn diagnostics_bundle(path: &SamplePath, n: usize, params: &GoodnessParams) -> Result<DiagnosticsBundle> {
    Ok(DiagnosticsBundle {
        coarse: coarse_trajectory(path, params.t0, n)?,
        bad: bad_increments(path, n, params)?,
        unstable: unstable_report(path, n, params)?,
    })
}

/// Runs all three reconstructions against the simulated truth; any
/// disagreement is an integrity error.
pub fn verify_reconstruction(path: &SamplePath, n: usize, bundle: &DiagnosticsBundle, params: &GoodnessParams) -> Result<()> {
    let group = path.group();
    let coarse = &bundle.coarse;
    let s = coarse.len() * coarse.t0;
    let truth = path.lamps_at(s);
    let mut inside = LampConfig::new();
    let mut outside = LampConfig::new();
    for (b, v) in truth.iter() {
        if in_coarse_neighborhood(&group.base, b, coarse, params)? {
            inside.set(&group.lamp, b.clone(), v.clone());
        } else {
            outside.set(&group.lamp, b.clone(), v.clone());
        }
    }
    let out = reconstruct_outside(group, coarse, &bundle.bad, params)?;
    if out != outside {
        return Err(Error::Integrity(format!("outside reconstruction differs: {out} vs {outside}")));
    }
    let limit = limit_config_proxy(path, n)?;
    let inn = reconstruct_inside(group, coarse, &bundle.bad, &bundle.unstable, &limit, params)?;
    if inn != inside {
        return Err(Error::Integrity(format!("inside reconstruction differs: {inn} vs {inside}")));
    }
    let state = reconstruct_state(group, coarse, &bundle.bad, &truth)?;
    if state != path.state_at(n) {
        return Err(Error::Integrity(format!("state reconstruction differs at n = {n}")));
    }
    Ok(())
}

/// One row of the diagnostics table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub n: usize,
    pub t0: usize,
    pub r: u64,
    pub lambda: Option<u64>,
    pub t_ratio: f64,
    pub mean_u: f64,
    pub se_u: f64,
    pub mean_v: f64,
    pub se_v: f64,
    pub bad_frac: f64,
    pub h_u: f64,
    pub h_v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagnosticsRow>,
    pub reconstructions_checked: usize,
    pub reconstruction_mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsPlan {
    pub ns: Vec<usize>,
    pub grid: Vec<GoodnessParams>,
    pub paths: usize,
    pub seed: u64,
    /// Proxy horizon as a multiple of `n`.
    pub t_ratio: usize,
    pub verify: bool,
}

struct PathFigures {
    u: usize,
    v: usize,
    bad_frac: f64,
    u_label: String,
    v_label: String,
    mismatch: bool,
}

fn path_figures(path: &SamplePath, n: usize, params: &GoodnessParams, verify: bool) -> Result<PathFigures> {
    let bundle = diagnostics_bundle(path, n, params)?;
    let m = bundle.coarse.len();
    let mismatch = if verify {
        match verify_reconstruction(path, n, &bundle, params) {
            Ok(()) => false,
            Err(Error::Integrity(_)) => true,
            Err(e) => return Err(e),
        }
    } else {
        false
    };
    let u_label = bundle
        .unstable
        .unstable
        .iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join("|");
    let v_label = bundle
        .unstable
        .visits
        .iter()
        .map(|j| j.to_string())
        .collect::<Vec<_>>()
        .join(",");
    Ok(PathFigures {
        u: bundle.unstable.unstable.len(),
        v: bundle.unstable.visits.len(),
        bad_frac: if m == 0 { 0.0 } else { bundle.bad.bad_count() as f64 / m as f64 },
        u_label,
        v_label,
        mismatch,
    })
}

/// Ensemble averages of `|U_s|/n`, `|V_s|/n` and the bad-interval fraction
/// for every `n` and parameter choice, with plug-in entropies of `U_s`, `V_s`.
pub fn diagnostics_report(mu: &Arc<StepDistribution>, plan: &DiagnosticsPlan, exec: Exec) -> Result<DiagnosticsReport> {
    if plan.paths == 0 {
        return Err(Error::validation("paths", "must be at least 1"));
    }
    if plan.t_ratio == 0 {
        return Err(Error::validation("t_ratio", "must be at least 1"));
    }
    for p in &plan.grid {
        p.validate()?;
    }
    let mut rows = Vec::new();
    let mut checked = 0;
    let mut mismatches = 0;
    for &n in &plan.ns {
        if n == 0 {
            return Err(Error::validation("n", "must be at least 1"));
        }
        let horizon = n * plan.t_ratio;
        let per_path = exec
            .map_indices(plan.paths, |k| -> Result<Vec<PathFigures>> {
                let path = SamplePath::generate(mu.clone(), horizon, plan.seed, k as u64)?;
                plan.grid
                    .iter()
                    .map(|p| path_figures(&path, n, p, plan.verify))
                    .collect()
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        for (g, params) in plan.grid.iter().enumerate() {
            let figs: Vec<&PathFigures> = per_path.iter().map(|v| &v[g]).collect();
            let us: Vec<f64> = figs.iter().map(|f| f.u as f64 / n as f64).collect();
            let vs: Vec<f64> = figs.iter().map(|f| f.v as f64 / n as f64).collect();
            let eu = Estimate::of(&us);
            let ev = Estimate::of(&vs);
            let mut ul: Vec<&str> = figs.iter().map(|f| f.u_label.as_str()).collect();
            let mut vl: Vec<&str> = figs.iter().map(|f| f.v_label.as_str()).collect();
            if plan.verify {
                checked += figs.len();
                mismatches += figs.iter().filter(|f| f.mismatch).count();
            }
            rows.push(DiagnosticsRow {
                n,
                t0: params.t0,
                r: params.r,
                lambda: params.lambda(),
                t_ratio: plan.t_ratio as f64,
                mean_u: eu.mean,
                se_u: eu.se,
                mean_v: ev.mean,
                se_v: ev.se,
                bad_frac: figs.iter().map(|f| f.bad_frac).sum::<f64>() / figs.len() as f64,
                h_u: plug_in_entropy(&mut ul).plug_in,
                h_v: plug_in_entropy(&mut vl).plug_in,
            });
        }
    }
    Ok(DiagnosticsReport {
        rows,
        reconstructions_checked: checked,
        reconstruction_mismatches: mismatches,
    })
}
