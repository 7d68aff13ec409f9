use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lampwalk_core::diagnostics::{diagnostics_report, DiagnosticsPlan, DiagnosticsReport};
use lampwalk_core::entropy::{entropy_sequence, EntropyOptions, EntropyReport, FiniteDistribution, Sampling};
use lampwalk_core::group::parse_letters;
use lampwalk_core::magnus::{flow_of_word, magnus_embed, Flow};
use lampwalk_core::walks::{
    empirical_speed, run_ensemble, stabilization_stats, standard_measure, EnsembleSpec, Estimate, MeasureSpec, SiteStats,
    StepDistribution,
};
use lampwalk_core::wreath::WreathElementRecord;
use lampwalk_core::{Error, Exec, Group, Letter};
use serde::Serialize;

use crate::config::{parse_group, Format, RunConfig};
use crate::CliError;

pub fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    Ok(dir)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Writes the normalized config next to the artifacts and returns the directory.
fn prepare(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = out_dir(cfg)?;
    write_file(&dir.join("config.toml"), cfg.to_toml().as_bytes())?;
    Ok(dir)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(PathBuf::from("<csv>"), e.into_error()))
}

fn measure(cfg: &RunConfig) -> Result<StepDistribution, CliError> {
    Ok(standard_measure(&cfg.ambient()?, &cfg.measure)?)
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    group: String,
    measure: &'a MeasureSpec,
    support: usize,
    horizon: usize,
    paths: usize,
    seed: u64,
    window: (usize, usize),
    speed: Option<Estimate>,
    returns: Estimate,
    lamp_support: Estimate,
    sites: Vec<SiteStats>,
}

pub fn simulate(cfg: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let wreath = cfg.ambient()?;
    let mu = measure(cfg)?;
    let s = &cfg.simulate;
    let sites = s
        .sites
        .iter()
        .flatten()
        .map(|t| wreath.base.parse_element(t))
        .collect::<lampwalk_core::Result<Vec<_>>>()?;
    let [lo, hi] = s.window.expect("normalized");
    let spec = EnsembleSpec {
        horizon: s.n,
        paths: s.paths,
        seed: cfg.seed,
    };
    let stats = run_ensemble(&mu, spec, &sites, (lo, hi), exec)?;
    let dir = prepare(cfg)?;

    if cfg.output.format.csv() {
        let mut rows = Vec::new();
        for p in &stats.paths {
            let mut push = |name: String, value: String| rows.push(vec![p.index.to_string(), name, value]);
            if let Some(l) = p.base_length {
                push("base_length".into(), l.to_string());
            }
            push("returns".into(), p.returns.to_string());
            push("lamp_support".into(), p.support_size.to_string());
            for (site, c) in stats.sites.iter().zip(&p.site_counts) {
                push(format!("modifications[{site}]"), c.to_string());
            }
        }
        write_file(&dir.join("simulate.csv"), &csv_bytes(&["path", "statistic", "value"], rows)?)?;
    }
    if cfg.output.format.json() {
        let as_f64 = |f: fn(&lampwalk_core::walks::PathSummary) -> f64| -> Vec<f64> { stats.paths.iter().map(f).collect() };
        let summary = SimulateSummary {
            group: wreath.to_string(),
            measure: &cfg.measure,
            support: mu.len(),
            horizon: s.n,
            paths: s.paths,
            seed: cfg.seed,
            window: (lo, hi),
            speed: empirical_speed(&stats).ok(),
            returns: Estimate::of(&as_f64(|p| p.returns as f64)),
            lamp_support: Estimate::of(&as_f64(|p| p.support_size as f64)),
            sites: stabilization_stats(&stats),
        };
        write_json(&dir.join("simulate.json"), &summary)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EntropySummary<'a> {
    group: String,
    measure: &'a MeasureSpec,
    support: usize,
    growth_rate: Option<f64>,
    #[serde(flatten)]
    report: EntropyReport,
}

pub fn entropy(cfg: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let wreath = cfg.ambient()?;
    let mu = measure(cfg)?;
    let e = &cfg.entropy;
    let opts = EntropyOptions {
        n_max: e.n_max,
        budget: e.budget,
        sampling: (e.samples > 0).then_some(Sampling {
            samples: e.samples,
            seed: cfg.seed,
        }),
    };
    // With a trivial lamp group the walk lives on the base; convolving there is cheaper.
    let trivial_lamps = wreath.lamp == Group::Cyclic { modulus: 1 };
    let report = if trivial_lamps {
        let base_mu = FiniteDistribution::new(mu.iter().map(|(g, p)| (g.base.clone(), p)).collect())?;
        entropy_sequence(&wreath.base, &base_mu, &opts, exec)?
    } else {
        entropy_sequence(&wreath, &FiniteDistribution::from_step(&mu), &opts, exec)?
    };
    let dir = prepare(cfg)?;
    if cfg.output.format.csv() {
        let rows = report.entries.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.entropy.to_string(),
                r.ratio.to_string(),
                r.increment.to_string(),
                serde_json::to_value(r.mode).expect("mode").as_str().unwrap_or_default().to_string(),
                r.support.to_string(),
                r.samples.map(|s| s.to_string()).unwrap_or_default(),
                r.correction.to_string(),
            ]
        });
        let header = ["n", "entropy", "ratio", "increment", "mode", "support", "samples", "correction"];
        write_file(&dir.join("entropy.csv"), &csv_bytes(&header, rows)?)?;
    }
    if cfg.output.format.json() {
        let growth_rate = if trivial_lamps {
            wreath.base.growth_rate()
        } else {
            None
        };
        let summary = EntropySummary {
            group: wreath.to_string(),
            measure: &cfg.measure,
            support: mu.len(),
            growth_rate,
            report,
        };
        write_json(&dir.join("entropy.json"), &summary)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DiagnosticsSummary<'a> {
    group: String,
    measure: &'a MeasureSpec,
    seed: u64,
    paths: usize,
    #[serde(flatten)]
    report: &'a DiagnosticsReport,
}

pub fn diagnostics(cfg: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let wreath = cfg.ambient()?;
    let mu = Arc::new(measure(cfg)?);
    let d = &cfg.diagnostics;
    let plan = DiagnosticsPlan {
        ns: d.ns.clone(),
        grid: cfg.goodness_grid(&wreath.lamp)?,
        paths: d.paths,
        seed: cfg.seed,
        t_ratio: d.t_ratio,
        verify: d.verify,
    };
    let report = diagnostics_report(&mu, &plan, exec)?;
    let dir = prepare(cfg)?;
    if cfg.output.format.csv() {
        let rows = report.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.t0.to_string(),
                r.r.to_string(),
                r.lambda.map(|l| l.to_string()).unwrap_or_default(),
                r.t_ratio.to_string(),
                r.mean_u.to_string(),
                r.se_u.to_string(),
                r.mean_v.to_string(),
                r.se_v.to_string(),
                r.bad_frac.to_string(),
                r.h_u.to_string(),
                r.h_v.to_string(),
            ]
        });
        let header = [
            "n", "t0", "r", "lambda", "T_ratio", "mean_U", "se_U", "mean_V", "se_V", "bad_frac", "H_U", "H_V",
        ];
        write_file(&dir.join("diagnostics.csv"), &csv_bytes(&header, rows)?)?;
    }
    if cfg.output.format.json() {
        let summary = DiagnosticsSummary {
            group: wreath.to_string(),
            measure: &cfg.measure,
            seed: cfg.seed,
            paths: d.paths,
            report: &report,
        };
        write_json(&dir.join("diagnostics.json"), &summary)?;
    }
    if report.reconstruction_mismatches > 0 {
        return Err(Error::Integrity(format!(
            "{} of {} reconstructions disagree with the simulated path",
            report.reconstruction_mismatches, report.reconstructions_checked
        ))
        .into());
    }
    Ok(())
}

fn read_input(path: Option<&PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(p.clone(), e)),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Io(PathBuf::from("<stdin>"), e))?;
            Ok(s)
        }
    }
}

fn input_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn inverse_letters(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| -l).collect()
}

#[derive(Serialize)]
struct Verdict {
    input: String,
    verdict: &'static str,
    /// Flow of `u` (or `u v⁻¹`) over the quotient, for free solvable groups.
    #[serde(skip_serializing_if = "Option::is_none")]
    flow: Option<Vec<lampwalk_core::magnus::flow::FlowTriple>>,
    /// Normal form of `u` (or `u v⁻¹`) in the other families.
    #[serde(skip_serializing_if = "Option::is_none")]
    normal_form: Option<String>,
}

fn decide(group: &Group, letters: &[Letter]) -> Result<(bool, Option<Flow>, Option<String>), CliError> {
    match *group {
        Group::Solvable { rank, level } => {
            let f = flow_of_word(&Group::solvable(rank, level - 1)?, letters)?;
            Ok((f.is_empty(), Some(f), None))
        }
        _ => {
            let g = group.evaluate(letters)?;
            Ok((g == group.identity(), None, Some(g.to_string())))
        }
    }
}

fn parse_line(group: &Group, line_no: usize, text: &str) -> Result<Vec<Vec<Letter>>, CliError> {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() > 2 {
        return Err(Error::Parse(format!("line {line_no}: expected one or two words, got {}", words.len())).into());
    }
    words
        .iter()
        .map(|w| parse_letters(w, group.rank()).map_err(|e| Error::Parse(format!("line {line_no}: {e}")).into()))
        .collect()
}

pub fn wordproblem(cfg: &RunConfig) -> Result<(), CliError> {
    let group = parse_group("wordproblem.group", &cfg.wordproblem.group)?;
    let text = read_input(cfg.wordproblem.input.as_ref())?;
    let mut out = String::new();
    for (line_no, line) in input_lines(&text) {
        let words = parse_line(&group, line_no, line)?;
        let (letters, labels) = match words.as_slice() {
            [u] => (u.clone(), ("identity", "nonidentity")),
            [u, v] => ([u.as_slice(), &inverse_letters(v)].concat(), ("equal", "not equal")),
            _ => unreachable!("parse_line yields one or two words"),
        };
        let (trivial, flow, normal_form) = decide(&group, &letters)?;
        let v = Verdict {
            input: line.split_whitespace().collect::<Vec<_>>().join(" "),
            verdict: if trivial { labels.0 } else { labels.1 },
            flow: flow.as_ref().map(Flow::to_triples),
            normal_form,
        };
        if cfg.output.format == Format::Json {
            out.push_str(&serde_json::to_string(&v)?);
        } else {
            let detail = match (&flow, &v.normal_form) {
                (Some(f), _) => format!("flow {f}"),
                (None, Some(nf)) => format!("normal form {nf}"),
                (None, None) => String::new(),
            };
            out.push_str(&format!("{}\t{}\t{}", v.input, v.verdict, detail));
        }
        out.push('\n');
    }
    emit_stdout(&out)
}

#[derive(Serialize)]
struct Embedded {
    word: String,
    image: WreathElementRecord,
}

pub fn embed(cfg: &RunConfig) -> Result<(), CliError> {
    let quotient = parse_group("embed.quotient", &cfg.embed.quotient)?;
    let text = read_input(cfg.embed.input.as_ref())?;
    let mut out = String::new();
    for (line_no, line) in input_lines(&text) {
        let letters = parse_letters(line, quotient.rank()).map_err(|e| Error::Parse(format!("line {line_no}: {e}")))?;
        let image = magnus_embed(&quotient, &letters)?;
        if cfg.output.format == Format::Json {
            let rec = Embedded {
                word: line.to_string(),
                image: image.to_record(),
            };
            out.push_str(&serde_json::to_string(&rec)?);
        } else {
            out.push_str(&format!("{line}\t{image}"));
        }
        out.push('\n');
    }
    emit_stdout(&out)
}

fn emit_stdout(text: &str) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))
}
