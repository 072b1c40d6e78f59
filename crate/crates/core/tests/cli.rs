use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "model,p,q,event,n,rho,replicates,successes,phat,wilson_lo,wilson_hi";

fn rswlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rswlab"))
        .args(args)
        .env_remove("RSWLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn estimate_writes_one_line_per_event() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "e.jsonl");
    let o = rswlab(&["estimate", "--event", "crossing:8x8", "--event", "arm:4", "--reps", "500", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["event"], "crossing:8x8");
    assert_eq!(lines[0]["n"], 8);
    assert_eq!(lines[0]["rho"], 1);
    assert_eq!(lines[1]["replicates"], 500);
    assert!(String::from_utf8_lossy(&o.stdout).contains("crossing:8x8"));
}

#[test]
fn estimate_without_event_is_a_usage_error() {
    assert_eq!(code(&rswlab(&["estimate", "--reps", "10"])), 2);
}

#[test]
fn bad_inputs_are_rejected() {
    assert_eq!(code(&rswlab(&["verify", "--suite", "nonexistent"])), 2);
    assert_eq!(code(&rswlab(&["estimate", "--event", "crossing:8x8", "--model", "bernoulli:p=1.5"])), 2);
    assert_eq!(code(&rswlab(&["estimate", "--event", "nonsense", "--reps", "10"])), 2);
    assert_eq!(code(&rswlab(&["frobnicate"])), 2);
}

#[test]
fn unknown_suite_in_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "c.toml");
    fs::write(&cfg, "suite = \"nonexistent\"\n").unwrap();
    assert_eq!(code(&rswlab(&["verify", "--config", &cfg])), 2);
}

#[test]
fn homeo_suite_passes() {
    let o = rswlab(&["verify", "--suite", "homeo"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn duality_on_smallest_rectangle_is_exhaustive() {
    let o = rswlab(&["verify", "--suite", "duality", "--exhaustive", "1x1"]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let check: serde_json::Value = serde_json::from_str(stdout.lines().next().unwrap()).unwrap();
    assert_eq!(check["detail"], "4096/4096 pass");
    assert_eq!(check["passed"], true);
}

#[test]
fn counterexample_model_needs_expect_failure() {
    let base = ["verify", "--suite", "theorem1", "--model", "diag", "--n", "4", "--reps", "10"];
    assert_eq!(code(&rswlab(&base)), 1);
    let mut flagged = base.to_vec();
    flagged.push("--expect-failure");
    assert_eq!(code(&rswlab(&flagged)), 0);
}

#[test]
fn expect_failure_requires_an_observed_failure() {
    let o = rswlab(&["verify", "--suite", "homeo", "--expect-failure"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn report_tabulates_every_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["report".to_string()];
    for (i, ev) in ["crossing:4x4", "arm:2", "bridge:4"].iter().enumerate() {
        let out = path(dir.path(), &format!("r{i}.jsonl"));
        let o = rswlab(&["estimate", "--event", ev, "--reps", "100", "--seed", &i.to_string(), "--out", &out]);
        assert_eq!(code(&o), 0);
        args.push("--input".into());
        args.push(out);
    }
    let o = rswlab(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("bernoulli:p=0.5,0.5,,arm:2,2,,100,"));
}

#[test]
fn report_of_empty_file_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let empty = path(dir.path(), "empty.jsonl");
    fs::write(&empty, "").unwrap();
    let o = rswlab(&["report", "--input", &empty]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), format!("{HEADER}\n"));
}

#[test]
fn report_of_missing_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&rswlab(&["report", "--input", &path(dir.path(), "absent.jsonl")])), 1);
}

#[test]
fn csv_flag_matches_report() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv) = (path(dir.path(), "e.jsonl"), path(dir.path(), "e.csv"));
    let o = rswlab(&["estimate", "--event", "crossing:4x2", "--reps", "200", "--out", &out, "--csv", &csv]);
    assert_eq!(code(&o), 0);
    let r = rswlab(&["report", "--input", &out]);
    assert_eq!(fs::read_to_string(&csv).unwrap(), String::from_utf8(r.stdout).unwrap());
}

#[test]
fn dumped_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = rswlab(&["verify", "--suite", "cascade", "--triple", "8,4,2", "--model", "fk:p=sd,q=2,domain=torus:32", "--reps", "100", "--seed", "9", "--dump-config"]);
    assert_eq!(code(&o), 0);
    let first = String::from_utf8(o.stdout).unwrap();
    assert!(first.contains("suite = \"cascade\""));
    let cfg = path(dir.path(), "run.toml");
    fs::write(&cfg, &first).unwrap();
    let again = rswlab(&["verify", "--config", &cfg, "--dump-config"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), first);
}

#[test]
fn config_file_drives_a_run_identically_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let flags = rswlab(&["verify", "--suite", "lemma42", "--n", "1", "--reps", "300", "--seed", "4"]);
    let cfg = path(dir.path(), "run.toml");
    fs::write(&cfg, "suite = \"lemma42\"\nn = [1]\nreplicates = 300\nseed = 4\n").unwrap();
    let from_file = rswlab(&["verify", "--config", &cfg]);
    assert_eq!(code(&flags), code(&from_file));
    assert_eq!(flags.stdout, from_file.stdout);
}

#[test]
fn worker_count_does_not_change_output() {
    let run = |w: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_rswlab"))
            .args(["verify", "--suite", "lemma31", "--n", "1", "--reps", "2000", "--seed", "3"])
            .env("RSWLAB_WORKERS", w)
            .output()
            .unwrap();
        o.stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("4"));
    assert_eq!(one, run("16"));
}
