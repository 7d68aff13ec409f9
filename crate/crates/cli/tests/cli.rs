use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn lampwalk(dir: &Path, args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_lampwalk"))
        .args(args)
        .current_dir(dir)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn lampwalk");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.unwrap_or("").as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn wordproblem_commutator_over_s22() {
    let dir = tempfile::tempdir().unwrap();
    let o = lampwalk(dir.path(), &["wordproblem"], Some("aBAb\n\n# comment\nabBa aa\nab ba\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("aBAb\tnonidentity\tflow {"), "{}", lines[0]);
    assert!(lines[0].contains("0,0@a:1"));
    assert_eq!(lines[1], "abBa aa\tequal\tflow {}");
    assert!(lines[2].starts_with("ab ba\tnot equal"));
}

#[test]
fn wordproblem_json_and_other_families() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "[wordproblem]\ngroup = \"F2\"\n").unwrap();
    let o = lampwalk(dir.path(), &["--config", "c.toml", "--format", "json", "wordproblem"], Some("abBA\naab\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows[0]["verdict"], "identity");
    assert_eq!(rows[1]["verdict"], "nonidentity");
    assert_eq!(rows[1]["normal_form"], "aab");
}

#[test]
fn wordproblem_rejects_bad_letters() {
    let dir = tempfile::tempdir().unwrap();
    let o = lampwalk(dir.path(), &["wordproblem"], Some("abc\n"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn embed_generator() {
    let dir = tempfile::tempdir().unwrap();
    let o = lampwalk(dir.path(), &["embed"], Some("a\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "a\t[delta(0,0)=1,0] @ 1,0\n");

    let o = lampwalk(dir.path(), &["--format", "json", "embed"], Some("a\n"));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["image"]["lamps"][0][0], "0,0");
    assert_eq!(v["image"]["lamps"][0][1], "1,0");
    assert_eq!(v["image"]["base"], "1,0");
}

#[test]
fn simulate_zero_paths_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "[simulate]\npaths = 0\n").unwrap();
    let o = lampwalk(dir.path(), &["--config", "c.toml", "simulate"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("simulate.paths"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "[simulate]\nhorizon = 5\n").unwrap();
    let o = lampwalk(dir.path(), &["--config", "c.toml", "simulate"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizon"), "{}", stderr(&o));
}

#[test]
fn exhausted_budget_is_a_resource_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[group]\nlamp = \"Z/1\"\nbase = \"F2\"\n[measure]\nname = \"simple_base\"\n[entropy]\nn_max = 10\nbudget = 1000\n";
    fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let o = lampwalk(dir.path(), &["--config", "c.toml", "entropy"], None);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn entropy_switches_to_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[group]\nlamp = \"Z/1\"\nbase = \"F2\"\n[measure]\nname = \"simple_base\"\n[entropy]\nn_max = 7\nbudget = 1000\nsamples = 200\n";
    fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let o = lampwalk(dir.path(), &["--config", "c.toml", "--out", "o", "entropy"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("o/entropy.csv")).unwrap();
    let modes: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(modes, ["exact", "exact", "exact", "exact", "exact", "plug-in", "plug-in"]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/entropy.json")).unwrap()).unwrap();
    assert_eq!(json["units"], "nats");
    assert!((json["growth_rate"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn emitted_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "seed = 9\n[simulate]\nn = 40\npaths = 3\n").unwrap();
    let o = lampwalk(dir.path(), &["--config", "c.toml", "--out", "a", "simulate"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = lampwalk(dir.path(), &["--config", "a/config.toml", "--out", "a", "simulate"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(dir.path().join("a/config.toml")).unwrap();
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("window = [20, 40]"), "{text}");
    assert!(text.contains("seed = 9"));
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "[group]\nbase = \"Z3\"\n[simulate]\nn = 200\npaths = 16\n[diagnostics]\nns = [30]\npaths = 8\n",
    )
    .unwrap();
    for cmd in ["simulate", "diagnostics"] {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "4", "4"].iter().enumerate() {
            let out = format!("o{k}");
            let o = lampwalk(dir.path(), &["--config", "c.toml", "--threads", threads, "--out", &out, cmd], None);
            assert!(o.status.success(), "{}", stderr(&o));
            let csv = fs::read(dir.path().join(format!("{out}/{cmd}.csv"))).unwrap();
            let json = fs::read(dir.path().join(format!("{out}/{cmd}.json"))).unwrap();
            outputs.push((csv, json));
        }
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{cmd} output differs");
    }
}

#[test]
fn report_merges_csvs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.csv"), "path,statistic,value\n0,returns,1\n1,returns,3\n").unwrap();
    fs::write(dir.path().join("y.csv"), "n,entropy\n1,0.5\n2,0.7\n").unwrap();
    let o = lampwalk(dir.path(), &["--out", "r", "report", "x.csv", "y.csv"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("r/report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "source,column,count,mean,se,min,max");
    assert_eq!(lines[1], "x.csv,returns,2,2.0,1.0,1.0,3.0");
    assert_eq!(lines.len(), 4);
}

#[test]
fn missing_report_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lampwalk(dir.path(), &["report", "nope.csv"], None);
    assert_eq!(o.status.code(), Some(1));
}
