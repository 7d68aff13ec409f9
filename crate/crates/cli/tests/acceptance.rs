//! Acceptance suite: one PASS/FAIL line per criterion, with measured values.
//!
//! All randomness derives from `SEED`, fixed before any criterion was run.
//! The process exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lampwalk_core::diagnostics::{
    diagnostics_bundle, diagnostics_report, verify_reconstruction, DiagnosticsPlan, GoodnessParams, LampSet,
};
use lampwalk_core::entropy::{
    binary_entropy, entropy_sequence, guivarch_check, kappa, obscured_entropy, obscuring_threshold,
    subset_entropy_bound, EntropyOptions, FiniteDistribution, DEFAULT_BUDGET,
};
use lampwalk_core::magnus::{
    flow_of_word, fox_derivative, fox_derivative_by_rules, magnus_embed, magnus_embed_fox, magnus_target, Flow,
};
use lampwalk_core::walks::{
    empirical_speed, median, path_rng, run_ensemble, stabilization_stats, standard_measure, EnsembleSpec,
    MeasureSpec, SamplePath, StepDistribution, Walker,
};
use lampwalk_core::{
    Element, Error, Exec, Group, GroupLaw, LampConfig, Letter, WreathElement, WreathProduct,
};
use rand::Rng;

const SEED: u64 = 20261016;

/// Distinct RNG streams per criterion.
fn rng(criterion: u64, k: u64) -> impl Rng {
    path_rng(SEED, (criterion << 32) | k)
}

type Criterion = fn() -> Result<Outcome, Error>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome, Error> {
    Ok(Outcome { pass, detail })
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn random_word(r: &mut impl Rng, rank: usize, max_len: usize) -> Vec<Letter> {
    let len = r.random_range(0..=max_len);
    (0..len)
        .map(|_| {
            let i = r.random_range(1..=rank as i8);
            if r.random::<bool>() {
                i
            } else {
                -i
            }
        })
        .collect()
}

fn random_element(r: &mut impl Rng, g: &Group) -> Element {
    match *g {
        Group::IntVector { dim } => Element::Vector((0..dim).map(|_| r.random_range(-50..=50)).collect()),
        Group::Cyclic { modulus } => Element::Residue(r.random_range(0..modulus)),
        _ => g.evaluate(&random_word(r, g.rank(), 12)).unwrap(),
    }
}

fn random_wreath(r: &mut impl Rng, w: &WreathProduct) -> WreathElement {
    let k = r.random_range(0..6);
    let entries: Vec<_> = (0..k)
        .map(|_| (random_element(r, &w.base), random_element(r, &w.lamp)))
        .collect();
    WreathElement {
        lamps: LampConfig::from_entries(&w.lamp, entries).unwrap(),
        base: random_element(r, &w.base),
    }
}

/// Counts axiom violations over `trials` random triples.
fn axiom_failures<L: GroupLaw>(law: &L, trials: usize, mut sample: impl FnMut() -> L::Elem) -> Result<usize, Error> {
    let e = law.identity();
    let mut bad = 0;
    for _ in 0..trials {
        let (x, y, z) = (sample(), sample(), sample());
        let left = law.compose(&law.compose(&x, &y)?, &z)?;
        let right = law.compose(&x, &law.compose(&y, &z)?)?;
        let inv = law.invert(&x)?;
        let ok = left == right
            && law.compose(&x, &e)? == x
            && law.compose(&e, &x)? == x
            && law.compose(&x, &inv)? == e
            && law.compose(&inv, &x)? == e;
        bad += usize::from(!ok);
    }
    Ok(bad)
}

fn c1_group_axioms() -> Result<Outcome, Error> {
    const TRIALS: usize = 10_000;
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut total = 0;
    let families = [
        Group::int_vector(3)?,
        Group::cyclic(7)?,
        Group::free(2)?,
        Group::solvable(2, 2)?,
        Group::solvable(2, 3)?,
    ];
    for (k, g) in families.iter().enumerate() {
        let mut r = rng(1, k as u64);
        let bad = axiom_failures(g, TRIALS, || random_element(&mut r, g))?;
        parts.push(format!("{g}:{bad}"));
        total += bad;
    }
    let w = WreathProduct::new(Group::cyclic(2)?, Group::int_vector(2)?);
    let mut r = rng(1, 99);
    let bad = axiom_failures(&w, TRIALS, || random_wreath(&mut r, &w))?;
    parts.push(format!("{w}:{bad}"));
    total += bad;
    let t = start.elapsed();
    outcome(
        total == 0 && within(t, 30),
        format!("{TRIALS} triples per family, failures {}; {:.1} s (limit 30 s)", parts.join(" "), t.as_secs_f64()),
    )
}

fn c2_magnus_homomorphism() -> Result<Outcome, Error> {
    const PAIRS: usize = 1000;
    let start = Instant::now();
    let mut bad = 0;
    let quotients = [Group::int_vector(1)?, Group::int_vector(2)?, Group::int_vector(3)?, Group::solvable(2, 2)?];
    for (k, q) in quotients.iter().enumerate() {
        let target = magnus_target(q)?;
        let mut r = rng(2, k as u64);
        for _ in 0..PAIRS {
            let u = random_word(&mut r, q.rank(), 20);
            let v = random_word(&mut r, q.rank(), 20);
            let uv = [u.as_slice(), &v].concat();
            let lhs = magnus_embed(q, &uv)?;
            let rhs = target.multiply(&magnus_embed(q, &u)?, &magnus_embed(q, &v)?)?;
            bad += usize::from(lhs != rhs);
        }
    }
    let t = start.elapsed();
    outcome(
        bad == 0 && within(t, 30),
        format!("{PAIRS} pairs on Z^1, Z^2, Z^3, S_{{2,2}}: {bad} failures; {:.1} s (limit 30 s)", t.as_secs_f64()),
    )
}

fn reduced_words(rank: usize, max_len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::<Letter>::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for i in 1..=rank as i8 {
                for l in [i, -i] {
                    if w.last() != Some(&-l) {
                        let mut x = w.clone();
                        x.push(l);
                        next.push(x);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn c3_word_problem() -> Result<Outcome, Error> {
    let start = Instant::now();
    let q = Group::int_vector(2)?;
    let words = reduced_words(2, 8);
    // Images come from the Fox-derivative route, independent of flow tracing.
    let mut by_flow: BTreeMap<Flow, WreathElement> = BTreeMap::new();
    let mut by_image: BTreeMap<WreathElement, Flow> = BTreeMap::new();
    let mut disagreements = 0;
    for w in &words {
        let f = flow_of_word(&q, w)?;
        let img = magnus_embed_fox(&q, w)?;
        match by_flow.get(&f) {
            Some(prev) => disagreements += usize::from(*prev != img),
            None => {
                by_flow.insert(f.clone(), img.clone());
            }
        }
        match by_image.get(&img) {
            Some(prev) => disagreements += usize::from(*prev != f),
            None => {
                by_image.insert(img, f);
            }
        }
    }
    let t = start.elapsed();
    outcome(
        disagreements == 0 && within(t, 120),
        format!(
            "{} reduced words, {} classes; {disagreements} disagreements; {:.1} s (limit 120 s)",
            words.len(),
            by_flow.len(),
            t.as_secs_f64()
        ),
    )
}

fn inverse(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| -l).collect()
}

fn commutator(u: &[Letter], v: &[Letter]) -> Vec<Letter> {
    [u, v, &inverse(u), &inverse(v)].concat()
}

/// Random element of `F₂'`: a product of conjugates of commutators.
fn random_derived(r: &mut impl Rng) -> Vec<Letter> {
    let mut out = Vec::new();
    for _ in 0..r.random_range(1..=3) {
        let c = random_word(r, 2, 6);
        let x = random_word(r, 2, 5);
        let y = random_word(r, 2, 5);
        out.extend([c.as_slice(), &commutator(&x, &y), &inverse(&c)].concat());
    }
    out
}

fn c4_kernel() -> Result<Outcome, Error> {
    let q = Group::int_vector(2)?;
    let f2 = Group::free(2)?;
    let mut r = rng(4, 0);
    let mut nonempty = 0;
    let mut draws = 0;
    for _ in 0..100 {
        // resample until the commutator is nontrivial in F_2
        let w = loop {
            draws += 1;
            let w = commutator(&random_derived(&mut r), &random_derived(&mut r));
            if f2.evaluate(&w)? != f2.identity() {
                break w;
            }
        };
        nonempty += usize::from(!flow_of_word(&q, &w)?.is_empty());
    }
    outcome(
        nonempty == 0,
        format!("100 nontrivial elements of [N,N] ({draws} draws): {nonempty} with nonempty flow"),
    )
}

fn c5_fox() -> Result<Outcome, Error> {
    let quotients = [Group::int_vector(2)?, Group::int_vector(3)?, Group::solvable(2, 2)?];
    let mut r = rng(5, 0);
    let mut bad = 0;
    let mut checks = 0;
    for k in 0..1000 {
        let q = &quotients[k % quotients.len()];
        let w = random_word(&mut r, q.rank(), 24);
        for i in 1..=q.rank() {
            checks += 1;
            bad += usize::from(fox_derivative(q, &w, i)? != fox_derivative_by_rules(q, &w, i)?);
        }
    }
    outcome(bad == 0, format!("1000 words, {checks} derivatives: {bad} disagreements"))
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn c6_entropy_exactness() -> Result<Outcome, Error> {
    let z = Group::int_vector(1)?;
    let mu = FiniteDistribution::new(vec![(Element::Vector(vec![1]), 0.5), (Element::Vector(vec![-1]), 0.5)])?;
    let opts = EntropyOptions {
        n_max: 20,
        budget: DEFAULT_BUDGET,
        sampling: None,
    };
    let report = entropy_sequence(&z, &mu, &opts, Exec::available())?;
    let oracle: f64 = (0..=4).map(|k| kappa(binomial(4, k) / 16.0)).sum();
    let h4 = report.entry(4).expect("n = 4").entropy;
    let r20 = report.entry(20).expect("n = 20").ratio;
    let err = (h4 - oracle).abs();
    outcome(
        err < 1e-9 && r20 < 0.2,
        format!("H4 = {h4:.12} (binomial {oracle:.12}, |diff| {err:.1e}); H20/20 = {r20:.6} (< 0.2)"),
    )
}

fn free_group_srw() -> Result<(Group, FiniteDistribution<Element>), Error> {
    let f2 = Group::free(2)?;
    let atoms = f2.generators()?.into_iter().map(|g| (g, 0.25)).collect();
    Ok((f2, FiniteDistribution::new(atoms)?))
}

fn c7_free_increment() -> Result<Outcome, Error> {
    let start = Instant::now();
    let (f2, mu) = free_group_srw()?;
    let opts = EntropyOptions {
        n_max: 12,
        budget: DEFAULT_BUDGET,
        sampling: None,
    };
    let report = entropy_sequence(&f2, &mu, &opts, Exec::available())?;
    let inc = report.entry(12).expect("n = 12").increment;
    let target = 0.5 * 3f64.ln();
    let rel = (inc - target).abs() / target;
    let t = start.elapsed();
    let rss = peak_rss_mb();
    let mem_ok = rss.is_none_or(|m| m < 1024.0);
    outcome(
        rel <= 0.10 && within(t, 120) && mem_ok,
        format!(
            "H12 - H11 = {inc:.6} vs ln(3)/2 = {target:.6}: rel. error {:.2}% (limit 10%); {:.1} s; peak RSS {}",
            100.0 * rel,
            t.as_secs_f64(),
            rss.map_or("n/a".into(), |m| format!("{m:.0} MB"))
        ),
    )
}

/// Peak resident set size of this process, where the platform reports it.
fn peak_rss_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

fn c8_guivarch() -> Result<Outcome, Error> {
    // F_2: the entropy rate is estimated by the last exact increment, the speed by simulation.
    let (f2, mu) = free_group_srw()?;
    let opts = EntropyOptions {
        n_max: 12,
        budget: DEFAULT_BUDGET,
        sampling: None,
    };
    let report = entropy_sequence(&f2, &mu, &opts, Exec::available())?;
    let h = report.entry(12).expect("n = 12").increment;
    let walk = WreathProduct::new(Group::cyclic(1)?, f2.clone());
    let srw = standard_measure(&walk, &MeasureSpec::SimpleBase)?;
    let spec = EnsembleSpec {
        horizon: 2000,
        paths: 200,
        seed: SEED,
    };
    let stats = run_ensemble(&srw, spec, &[], (0, 0), Exec::available())?;
    let speed = empirical_speed(&stats)?;
    let free = guivarch_check(h, 0.0, speed.mean, speed.se, f2.growth_rate().expect("free growth"));

    // Z/2 wr Z^3 with sws: v = ln|supp μ| bounds the growth for the generating set supp μ,
    // in whose word metric every step has length at most one.
    let lamplighter = WreathProduct::new(Group::cyclic(2)?, Group::int_vector(3)?);
    let sws = standard_measure(&lamplighter, &MeasureSpec::Sws)?;
    // n = 5 would need more than the default budget of products
    let opts = EntropyOptions {
        n_max: 4,
        budget: DEFAULT_BUDGET,
        sampling: None,
    };
    let lam_report = entropy_sequence(&lamplighter, &FiniteDistribution::from_step(&sws), &opts, Exec::available())?;
    let n = lam_report.exact_horizon();
    let h_lamp = lam_report.entry(n).expect("exact entry").ratio;
    let lamp = guivarch_check(h_lamp, 0.0, 1.0, 0.0, (sws.len() as f64).ln());
    outcome(
        free.holds && lamp.holds,
        format!(
            "F_2: h = {:.4} vs l*v = {:.4}*{:.4} = {:.4} + 3s {:.4} -> {}; Z/2 wr Z^3: H({n})/{n} = {:.4} vs 1*ln {} = {:.4} -> {}",
            free.entropy,
            free.speed,
            free.growth,
            free.speed * free.growth,
            free.slack,
            if free.holds { "holds" } else { "violated" },
            lamp.entropy,
            sws.len(),
            lamp.bound,
            if lamp.holds { "holds" } else { "violated" },
        ),
    )
}

fn origin_counts(base: Group) -> Result<(f64, f64), Error> {
    let w = WreathProduct::new(Group::cyclic(2)?, base);
    let mu = standard_measure(&w, &MeasureSpec::Sws)?;
    let spec = EnsembleSpec {
        horizon: 10_000,
        paths: 200,
        seed: SEED,
    };
    let origin = w.base.identity();
    let stats = run_ensemble(&mu, spec, &[origin], (5000, 10_000), Exec::available())?;
    let s = &stabilization_stats(&stats)[0];
    let counts: Vec<f64> = stats.paths.iter().map(|p| p.site_counts[0] as f64).collect();
    Ok((median(&counts), s.mean))
}

fn c9_stabilization() -> Result<Outcome, Error> {
    let start = Instant::now();
    let (med1, mean1) = origin_counts(Group::int_vector(1)?)?;
    let (med3, mean3) = origin_counts(Group::int_vector(3)?)?;
    let t = start.elapsed();
    outcome(
        med1 >= 1.0 && med3 == 0.0 && mean3 <= 0.2 && within(t, 120),
        format!(
            "Z: median {med1} (>= 1), mean {mean1:.3}; Z^3: median {med3} (= 0), mean {mean3:.3} (<= 0.2); {:.1} s",
            t.as_secs_f64()
        ),
    )
}

fn c10_conjugate_example() -> Result<Outcome, Error> {
    let w = WreathProduct::new(Group::cyclic(2)?, Group::free(2)?);
    let mu = standard_measure(&w, &MeasureSpec::ExampleConjugate)?;
    let one = Element::Residue(1);
    let checkpoints = [100, 1000, 10_000];
    let failures: usize = Exec::available()
        .map_indices(100, |k| -> Result<usize, Error> {
            let mut walker = Walker::new(&mu, SEED, k as u64);
            let mut bad = 0;
            for &t in &checkpoints {
                while walker.time() < t {
                    walker.step()?;
                }
                let mut expected = LampConfig::new();
                expected.combine(&w.lamp, w.base.identity(), &one)?;
                expected.combine(&w.lamp, walker.position().clone(), &one)?;
                bad += usize::from(*walker.lamps() != expected);
            }
            Ok(bad)
        })
        .into_iter()
        .sum::<Result<usize, Error>>()?;
    outcome(failures == 0, format!("100 paths x T in {{100, 1000, 10000}}: {failures} mismatches"))
}

/// Sws plus rare long jumps and far writes, so that bad intervals occur.
fn jumpy(w: &WreathProduct) -> Result<Arc<StepDistribution>, Error> {
    let local = standard_measure(w, &MeasureSpec::Sws)?;
    let d = w.base.rank();
    let far = |x: i64| vec![x.to_string(); d].join(",");
    let extras = [
        format!("delta({})=1 @ {}", far(3), far(1)),
        format!("delta({})=1 @ {}", far(0), far(-2)),
        format!("@ {}", far(4)),
    ];
    let mut weights: Vec<_> = local.iter().map(|(g, p)| (g.clone(), 0.9 * p)).collect();
    for e in &extras {
        weights.push((w.parse_element(e)?, 0.1 / extras.len() as f64));
    }
    Ok(Arc::new(StepDistribution::from_weights(w.clone(), weights)?))
}

fn c11_reconstruction() -> Result<Outcome, Error> {
    let mut measures = Vec::new();
    for dim in [1, 3] {
        let w = WreathProduct::new(Group::cyclic(2)?, Group::int_vector(dim)?);
        measures.push(Arc::new(standard_measure(&w, &MeasureSpec::Sws)?));
        measures.push(jumpy(&w)?);
    }
    let mut r = rng(11, 0);
    let jobs: Vec<(usize, usize, GoodnessParams)> = (0..500)
        .map(|k| {
            let n = r.random_range(1..=200);
            let t0 = [2, 5, 10][r.random_range(0..3)];
            let radius = r.random_range(1..=2);
            let lambda = r.random_range(1..=2);
            (k % measures.len(), n, GoodnessParams::new(t0, radius, LampSet::Ball(lambda)).unwrap())
        })
        .collect();
    let results = Exec::available().map_indices(jobs.len(), |k| -> Result<bool, Error> {
        let (m, n, params) = jobs[k];
        let path = SamplePath::generate(measures[m].clone(), 10 * n, SEED, k as u64)?;
        let bundle = diagnostics_bundle(&path, n, &params)?;
        match verify_reconstruction(&path, n, &bundle, &params) {
            Ok(()) => Ok(true),
            Err(Error::Integrity(_)) => Ok(false),
            Err(e) => Err(e),
        }
    });
    let mismatches = results.into_iter().collect::<Result<Vec<_>, _>>()?.iter().filter(|ok| !**ok).count();
    outcome(
        mismatches == 0,
        format!("500 paths over Z/2 wr Z and Z/2 wr Z^3 (sws and jump measures): {mismatches} mismatches"),
    )
}

/// Calls `f` on every vector of `k` multiples of `1/steps` summing to one.
fn compositions(k: usize, steps: usize, prefix: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if prefix.len() == k - 1 {
        prefix.push(steps - prefix.iter().sum::<usize>());
        f(prefix);
        prefix.pop();
        return;
    }
    let used: usize = prefix.iter().sum();
    for x in 0..=steps - used {
        prefix.push(x);
        compositions(k, steps, prefix, f);
        prefix.pop();
    }
}

fn direct_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

fn c12_subset_and_obscuring() -> Result<Outcome, Error> {
    const STEPS: usize = 20;
    let mut laws = 0usize;
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for d in 1..=3usize {
        let mut first_err = None;
        compositions(1 << d, STEPS, &mut Vec::new(), &mut |c| {
            let p: Vec<f64> = c.iter().map(|&x| x as f64 / STEPS as f64).collect();
            let alpha = (0..d)
                .map(|i| p.iter().enumerate().filter(|(m, _)| m >> i & 1 == 1).map(|(_, x)| x).sum::<f64>())
                .fold(0.0, f64::max);
            if alpha > 0.5 + 1e-12 {
                return;
            }
            laws += 1;
            match subset_entropy_bound(d, alpha.min(0.5)) {
                Ok(bound) => {
                    let gap = direct_entropy(&p) - bound;
                    worst = worst.max(gap);
                    violations += usize::from(gap > 1e-9);
                }
                Err(e) => first_err = Some(e),
            }
        });
        if let Some(e) = first_err {
            return Err(e);
        }
    }
    let h = binary_entropy(0.25)?;
    let h_oracle = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());

    let dists: Vec<Vec<f64>> = vec![
        vec![1.0],
        vec![0.25; 4],
        (1..=12).map(|k| 0.5f64.powi(k)).chain([0.5f64.powi(12)]).collect(),
        vec![0.7, 0.1, 0.1, 0.05, 0.05],
    ];
    let mut r = rng(12, 0);
    let mut events = 0;
    let mut obscure_fail = 0;
    for p in &dists {
        let fd = FiniteDistribution::new(p.iter().cloned().enumerate().collect())?;
        for eps in [0.05, 0.1, 0.5] {
            let t = obscuring_threshold(&fd, eps)?;
            for _ in 0..100 {
                let target = r.random::<f64>() * t.delta * 0.999_999;
                let m: Vec<f64> = if r.random::<f64>() < 0.3 {
                    let k = r.random_range(0..p.len());
                    let mut m = vec![0.0; p.len()];
                    m[k] = target.min(p[k]);
                    m
                } else {
                    let w: Vec<f64> = p.iter().map(|_| r.random::<f64>()).collect();
                    let s: f64 = w.iter().sum();
                    w.iter().zip(p).map(|(x, q)| (x / s * target).min(*q)).collect()
                };
                let inside: f64 = m.iter().sum();
                let mut law = m.clone();
                law.push(1.0 - inside);
                let direct = direct_entropy(&law);
                events += 1;
                let agrees = (direct - obscured_entropy(&m)).abs() < 1e-12;
                obscure_fail += usize::from(!(inside < t.delta && direct < eps && agrees));
            }
        }
    }
    outcome(
        violations == 0 && (h - h_oracle).abs() < 1e-15 && obscure_fail == 0,
        format!(
            "{laws} grid laws with |D| <= 3: {violations} violations (max H - bound {worst:.2e}); {events} events: {obscure_fail} obscuring failures"
        ),
    )
}

fn c13_unstable_trend() -> Result<Outcome, Error> {
    let start = Instant::now();
    let w = WreathProduct::new(Group::cyclic(2)?, Group::int_vector(3)?);
    let mu = Arc::new(standard_measure(&w, &MeasureSpec::Sws)?);
    let plan = DiagnosticsPlan {
        ns: vec![100, 400, 1600],
        grid: vec![GoodnessParams::new(5, 1, LampSet::Whole)?],
        paths: 200,
        seed: SEED,
        t_ratio: 10,
        verify: false,
    };
    let report = diagnostics_report(&mu, &plan, Exec::available())?;
    let means: Vec<f64> = report.rows.iter().map(|r| r.mean_u).collect();
    let decreasing = means.windows(2).all(|p| p[1] < p[0]);
    let t = start.elapsed();
    outcome(
        decreasing && within(t, 300),
        format!(
            "E|U_s|/n at n = 100, 400, 1600 (t0 = 5, r = 1): {}; {:.1} s (limit 300 s)",
            report
                .rows
                .iter()
                .map(|r| format!("{:.4} +- {:.4}", r.mean_u, r.se_u))
                .collect::<Vec<_>>()
                .join(", "),
            t.as_secs_f64()
        ),
    )
}

const REPRO_CONFIG: &str = r#"
seed = 7
[group]
lamp = "Z/2"
base = "Z3"
[measure]
name = "sws"
[simulate]
n = 500
paths = 40
[entropy]
n_max = 4
[diagnostics]
ns = [40, 80]
paths = 24
"#;

fn cli_run(cwd: &Path, threads: Option<&str>, sub: &str) -> Result<(), Error> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lampwalk"));
    cmd.current_dir(cwd).args(["--config", "run.toml", "--out", "out"]);
    if let Some(t) = threads {
        cmd.args(["--threads", t]);
    }
    let status = cmd
        .arg(sub)
        .status()
        .map_err(|e| Error::Usage(format!("spawn: {e}")))?;
    if !status.success() {
        return Err(Error::Usage(format!("lampwalk {sub} exited with {status}")));
    }
    Ok(())
}

fn artifacts(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, Error> {
    let io = |e: std::io::Error| Error::Usage(e.to_string());
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir.join("out")).map_err(io)? {
        let entry = entry.map_err(io)?;
        out.insert(entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path()).map_err(io)?);
    }
    Ok(out)
}

fn c14_reproducibility() -> Result<Outcome, Error> {
    let runs = [None, None, Some("1"), Some("3")];
    let mut sets = Vec::new();
    for threads in runs {
        let dir = tempfile::tempdir().map_err(|e| Error::Usage(e.to_string()))?;
        std::fs::write(dir.path().join("run.toml"), REPRO_CONFIG).map_err(|e| Error::Usage(e.to_string()))?;
        for sub in ["simulate", "entropy", "diagnostics"] {
            cli_run(dir.path(), threads, sub)?;
        }
        sets.push(artifacts(dir.path())?);
    }
    let files = sets[0].len();
    let identical = sets.windows(2).all(|w| w[0] == w[1]);
    outcome(
        identical && files == 7,
        format!("simulate, entropy, diagnostics x (2 default runs, --threads 1, --threads 3): {files} files, identical = {identical}"),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 14] = [
        ("group axioms", c1_group_axioms),
        ("Magnus homomorphism", c2_magnus_homomorphism),
        ("word problem oracle", c3_word_problem),
        ("kernel soundness", c4_kernel),
        ("Fox cross-check", c5_fox),
        ("entropy exactness on Z", c6_entropy_exactness),
        ("free-group entropy increment", c7_free_increment),
        ("fundamental inequality", c8_guivarch),
        ("stabilization dichotomy", c9_stabilization),
        ("conjugate base example", c10_conjugate_example),
        ("reconstruction determinism", c11_reconstruction),
        ("subset entropy bound and obscuring", c12_subset_and_obscuring),
        ("unstable-point trend", c13_unstable_trend),
        ("CLI reproducibility", c14_reproducibility),
    ];
    println!("acceptance suite, seed {SEED}");
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} {:>2}. {name}: {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
