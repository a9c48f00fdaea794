use std::path::Path;
use std::process::{Command, Output};

fn qkd_sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qkd-sim"))
}

/// Runs `line` split on whitespace, followed by `extra` verbatim.
fn run_with(line: &str, extra: &[&str]) -> Output {
    qkd_sim()
        .args(line.split_whitespace())
        .args(extra)
        .output()
        .expect("spawn qkd-sim")
}

fn run_line(line: &str) -> Output {
    run_with(line, &[])
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("missing column {name}"))
}

fn transcript(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_accepts_clean_channel() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let res = run_with(
        "run --n 10000 --epsilon 0.5 --seed 1 --out",
        &[out.to_str().unwrap()],
    );
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let summary = stdout(&res);
    assert!(summary.contains("refined=accept"), "{summary}");
    assert!(
        summary.contains("e1_hat=0.00000 e2_hat=0.00000"),
        "{summary}"
    );
    let t = transcript(&out);
    assert_eq!(t["schema_version"], 1);
    assert_eq!(t["config"]["seed"], 1);
    assert_eq!(t["status"]["kind"], "key_established");
}

#[test]
fn run_aborts_on_diagonal_attack() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let res = run_with(
        "run --n 100000 --epsilon 0.1 --eve-p1 0 --eve-p2 1 --e-max 0.03 --seed 7 --out",
        &[out.to_str().unwrap()],
    );
    assert_eq!(res.status.code(), Some(2), "{}", stderr(&res));
    assert!(stdout(&res).contains("refined=abort"));
    let t = transcript(&out);
    assert_eq!(t["verdict_naive"], "accept");
    assert_eq!(t["verdict_refined"], "abort");
    assert_eq!(t["final_key"], serde_json::Value::Null);
}

#[test]
fn transcripts_are_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let res = run_with(
            "run --n 4000 --eve-p1 0.2 --seed 9 --out",
            &[p.to_str().unwrap()],
        );
        assert!(res.status.code().unwrap() != 1, "{}", stderr(&res));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn invalid_config_names_the_field() {
    let res = run_line("run --n 1000 --epsilon 0.7 --seed 1 --out /dev/null");
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("epsilon_alice"), "{}", stderr(&res));

    let res = run_line("run --n 1000 --e-max 0.8 --seed 1 --out /dev/null");
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("e_max"), "{}", stderr(&res));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run_line("run --bogus").status.code(), Some(1));
    assert_eq!(run_line("").status.code(), Some(1));
    assert_eq!(run_line("--help").status.code(), Some(0));
}

#[test]
fn require_seed_refuses_entropy() {
    let res = run_line("run --n 1000 --require-seed --out /dev/null");
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("seed"));
}

#[test]
fn drawn_seed_is_echoed_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let res = run_with("run --n 2000 --out", &[out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let echoed: u64 = stderr(&res)
        .trim()
        .strip_prefix("seed: ")
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(transcript(&out)["config"]["seed"].as_u64(), Some(echoed));
}

#[test]
fn config_file_merges_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"n": 3000, "epsilon_alice": 0.25, "epsilon_bob": 0.25, "seed": 5, "attack": {"p1": 0.1, "p2": 0.0}}"#,
    )
    .unwrap();
    let out = dir.path().join("t.json");
    let res = run_with(
        "run --epsilon-bob 0.5 --m1 50 --config",
        &[cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
    );
    assert_ne!(res.status.code(), Some(1), "{}", stderr(&res));
    let t = transcript(&out);
    assert_eq!(t["config"]["n"], 3000);
    assert_eq!(t["config"]["epsilon_alice"], 0.25);
    assert_eq!(t["config"]["epsilon_bob"], 0.5);
    assert_eq!(t["config"]["m1"], 50);
    assert_eq!(t["config"]["seed"], 5);
    assert_eq!(t["attack"]["p1"], 0.1);

    std::fs::write(&cfg, r#"{"n": 3000, "epsilon": 0.25}"#).unwrap();
    let res = run_with(
        "run --seed 1 --out /dev/null --config",
        &[cfg.to_str().unwrap()],
    );
    assert_eq!(
        res.status.code(),
        Some(1),
        "unknown config keys must be rejected"
    );
}

#[test]
fn sweep_emits_one_row_per_point_and_trial() {
    let res = run_line("sweep --n 2000 --seed 2 --axis eta=0:0.02:2");
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let (header, rows) = read_csv(&stdout(&res));
    assert_eq!(rows.len(), 2);
    assert_eq!(header[..4], ["point", "trial", "seed", "swept_eta"]);

    let res = run_line(
        "sweep --n 2000 --seed 2 --values epsilon=0.5,0.25 --axis eta=0:0.02:3 --trials 2",
    );
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    assert_eq!(read_csv(&stdout(&res)).1.len(), 12);
}

#[test]
fn sweep_rejects_bad_axes() {
    for axis in ["eta=0:0.02:1", "bogus=0:1:2", "eta=0:1"] {
        let res = run_with("sweep --n 2000 --seed 2 --axis", &[axis]);
        assert_eq!(res.status.code(), Some(1), "{axis}");
    }
}

#[test]
fn sweep_sift_fraction_tracks_epsilon() {
    let n = 40_000;
    let res = run_line("sweep --n 40000 --seed 11 --values epsilon=0.5,0.25,0.1,0.05");
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let (header, rows) = read_csv(&stdout(&res));
    let eps_col = column(&header, "epsilon_alice");
    let sift_col = column(&header, "sift_fraction");
    assert_eq!(rows.len(), 4);
    for row in rows {
        let eps: f64 = row[eps_col].parse().unwrap();
        let sift: f64 = row[sift_col].parse().unwrap();
        let p = eps * eps + (1.0 - eps) * (1.0 - eps);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (sift - p).abs() < 3.0 * sigma,
            "eps={eps} sift={sift} expected={p}"
        );
    }
}

#[test]
fn sweep_attack_pooled_rate_falls_with_epsilon() {
    let res = run_line(
        "sweep --n 100000 --m1 400 --m2 400 --eve-p2 1 --seed 21 --values epsilon=0.5,0.25,0.1",
    );
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let (header, rows) = read_csv(&stdout(&res));
    let e1_col = column(&header, "e1_hat");
    let ebar_col = column(&header, "e_bar_hat");
    let refined_col = column(&header, "verdict_refined");
    let ebar: Vec<f64> = rows.iter().map(|r| r[ebar_col].parse().unwrap()).collect();
    assert!(ebar[0] > ebar[1] && ebar[1] > ebar[2], "{ebar:?}");
    for r in &rows {
        let e1: f64 = r[e1_col].parse().unwrap();
        assert!((e1 - 0.5).abs() < 0.1, "e1_hat={e1}");
        assert_eq!(r[refined_col], "abort");
    }
}

#[test]
fn sweep_output_is_independent_of_thread_count() {
    let args: Vec<&str> = "sweep --n 3000 --seed 8 --axis eve_p1=0:0.3:4 --trials 3"
        .split_whitespace()
        .collect();
    let one = qkd_sim()
        .args(&args)
        .env("QKD_SIFT_THREADS", "1")
        .output()
        .unwrap();
    let four = qkd_sim()
        .args(&args)
        .env("QKD_SIFT_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    let bad = qkd_sim()
        .args(&args)
        .env("QKD_SIFT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn sweep_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let res = run_with(
        "sweep --n 2000 --seed 2 --values s=50,80 --format json --out",
        &[out.to_str().unwrap()],
    );
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let v = transcript(&out);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["swept"]["s"], 80.0);
    assert_eq!(rows[1]["s"], 80);
}

#[test]
fn compare_matches_theory_on_clear_cases() {
    let res = run_line(
        "compare --n 100000 --epsilon 0.5 --m1 1000 --m2 1000 --seed 4 \
         --p1 0,0.12 --p2 0,0.09,0.12 --trials 3",
    );
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let (header, rows) = read_csv(&stdout(&res));
    let find = |p1: &str, p2: &str| {
        rows.iter()
            .find(|r| r[0] == p1 && r[1] == p2)
            .unwrap_or_else(|| panic!("row ({p1},{p2}) missing"))
    };
    let tn = column(&header, "theory_naive");
    let tr = column(&header, "theory_refined");
    let sn = column(&header, "sim_naive");
    let sr = column(&header, "sim_refined");
    for (p1, p2, naive, refined) in [
        ("0", "0.09", "accept", "abort"),
        ("0", "0", "accept", "accept"),
        ("0.12", "0.12", "abort", "abort"),
    ] {
        let row = find(p1, p2);
        assert_eq!(
            (row[tn].as_str(), row[tr].as_str()),
            (naive, refined),
            "theory ({p1},{p2})"
        );
        assert_eq!(
            (row[sn].as_str(), row[sr].as_str()),
            (naive, refined),
            "simulated ({p1},{p2})"
        );
    }
}

#[test]
fn hash_check_exit_codes() {
    assert_eq!(run_line("hash-check --n 4 --k 2").status.code(), Some(0));
    assert_eq!(run_line("hash-check --n 1 --k 1").status.code(), Some(0));
    let big = run_line("hash-check --n 20 --k 10");
    assert_eq!(big.status.code(), Some(1));
    assert!(stderr(&big).contains("--mode sampled"));
    assert_eq!(run_line("hash-check --all").status.code(), Some(0));
    let sampled = run_line("hash-check --n 20 --k 10 --mode sampled --trials 20000");
    assert_eq!(sampled.status.code(), Some(0), "{}", stdout(&sampled));
}
