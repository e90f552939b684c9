use std::path::Path;
use std::process::{Command, Output};

fn ocskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocskit")).args(args).env_remove("OCSKIT_SEED").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn lp_reports_unweighted_gamma() {
    let out = ocskit(&["lp", "--variant", "unweighted", "--kmax", "8", "--ellmax", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# gamma = 0.50962346\n"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma = 0.50962346"));
    let text = stdout(&out);
    let rows = csv_rows(&text);
    assert!(rows.iter().any(|r| r.starts_with("gamma,,,0.509623459")));
    assert!(rows.iter().all(|r| !r.ends_with(",-0")));
}

#[test]
fn lp_export_writes_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.lp");
    let out = ocskit(&["lp", "--kmax", "4", "--export", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("model unweighted 4 0\nvars gamma"));
}

#[test]
fn bounds_has_one_row_per_k() {
    let out = ocskit(&["bounds", "--max-k", "10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\nk,eta_sum,eta_closed,eta_pow_bound,zeta_product,zeta_unweighted\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 11);
    assert!(rows[1].starts_with("1,0.666666666666666"));
}

#[test]
fn verify_all_same_triples_passes() {
    let out = ocskit(&["verify", "--family", "all-same", "--triples", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# method = exact\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn verify_falls_back_to_monte_carlo() {
    let out = ocskit(&["verify", "--family", "chained", "--pairs", "12", "--trials", "5000", "--seed", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# method = monte-carlo\n"));
    assert_eq!(csv_rows(&text).len(), 12);
}

#[test]
fn enumerate_replay_gives_rationals() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "q.txt", "# two pairs\nP 0 1\nP 0 1\n");
    let out = ocskit(&["enumerate", "--replay", &file, "--windows", "0..2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("never-pair,0:0..2,7/32,0.21875,"));
    assert!(text.contains("no-link,0:0..2,7/8,0.875,0.9375,true"));
}

#[test]
fn enumerate_beyond_caps_is_a_usage_error() {
    let out = ocskit(&["enumerate", "--family", "all-same", "--triples", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ocskit(&["enumerate", "--family", "all-same", "--pairs", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for (i, text) in ["bogus = 1\n", "max_k 3\n", "max_k = 3\nmax-k = 4\n", "command = lp\n", "max_k = x\n"]
        .iter()
        .enumerate()
    {
        let cfg = write(dir.path(), &format!("c{i}.cfg"), text);
        let out = ocskit(&["bounds", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{text:?}");
    }
    assert_eq!(ocskit(&["bounds", "--mode", "fancy"]).status.code(), Some(2));
    assert_eq!(ocskit(&["verify", "--family", "nope"]).status.code(), Some(2));
    assert_eq!(ocskit(&["lp", "--sigma-r2", "2"]).status.code(), Some(2));
}

#[test]
fn config_values_apply_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b.cfg", "# small table\ncommand = bounds\nmax_k = 3\nmode = consistent\n");
    let text = stdout(&ocskit(&["bounds", "--config", &cfg]));
    assert_eq!(csv_rows(&text).len(), 4);
    assert!(text.contains("# mode = consistent\n# gamma_a=0.0625\n# gamma_b=0.0625\n"));
    let text = stdout(&ocskit(&["bounds", "--config", &cfg, "--max-k", "5"]));
    assert_eq!(csv_rows(&text).len(), 6);
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &str| {
        let path = dir.path().join(name).display().to_string();
        let out = ocskit(&["simulate", "--n", "12", "--trials", "30", "--seed", "9", "--output", &path]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    let (a, b) = (args("a.csv"), args("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# command = simulate\n# variant = unweighted\n"));
    assert!(text.contains("# seed = 9\n") && text.contains("# gamma_b=0.0625\n"));
    assert!(text.contains("\nseed,alg,opt,ratio,audit_pass\n"));
    assert_eq!(csv_rows(&text).len(), 30);
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ocskit"));
        cmd.args(["simulate", "--n", "10", "--trials", "10"]).env_remove("OCSKIT_SEED");
        if let Some(e) = env {
            cmd.env("OCSKIT_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        stdout(&cmd.output().unwrap())
    };
    let from_env = run(Some("17"), None);
    assert!(from_env.contains("# seed = 17\n"));
    assert_eq!(from_env, run(None, Some("17")));
    assert!(run(Some("17"), Some("3")).contains("# seed = 3\n"));
    assert!(run(None, None).contains("# seed = 0\n"));
}

#[test]
fn simulate_reads_instance_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"offline": 2, "arrivals": [{"id": 0, "edges": [[0, 1.0], [1, 1.0]]}, {"id": 1, "edges": [[0, 1.0]]}]}"#;
    let file = write(dir.path(), "inst.json", json);
    let out = ocskit(&["simulate", "--instance", &file, "--trials", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(csv_rows(&text).iter().all(|r| r.contains(",2,") && r.ends_with(",true")));
    let bad = write(dir.path(), "bad.json", r#"{"offline": 1, "arrivals": [{"id": 0, "edges": [[3, 1.0]]}]}"#);
    assert_eq!(ocskit(&["simulate", "--instance", &bad]).status.code(), Some(2));
}
