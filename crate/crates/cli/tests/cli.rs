use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fermi-cavity"));
    c.env_remove("FERMI_CAVITY_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&run(args))).unwrap()
}

fn binary_entropy(p: f64) -> f64 {
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

#[test]
fn harmonic_thermo_solve_lands_near_the_partition_fit() {
    let v = json(&["thermo", "solve", "--levels", "harmonic", "--E", "21900", "--N", "200"]);
    let t = v["temperature"].as_f64().unwrap();
    let mu = v["chemical_potential"].as_f64().unwrap();
    assert!((t / 33.42 - 1.0).abs() < 0.05, "T = {t}");
    assert!((mu / 200.4 - 1.0).abs() < 0.02, "mu = {mu}");
    assert_eq!(v["schema"], "fermi-cavity/1");
    assert!((v["particles"].as_f64().unwrap() - 200.0).abs() < 1e-6);
}

#[test]
fn single_site_entropy_is_binary_entropy_of_the_site_occupation() {
    // One site of area a² holds a²·n particles on average, n = (m T / 2π ħ²) ln(1 + e^{μ/T}).
    let (a, t, mu) = (1.5_f64, 1.0_f64, 0.0_f64);
    let v = json(&["ee", "lattice", "--side", "1", "--a", "1.5", "--T", "1", "--mu", "0"]);
    let density = t / (2.0 * std::f64::consts::PI) * (1.0 + (mu / t).exp()).ln();
    let expect = binary_entropy(a * a * density);
    let s = v["S"].as_f64().unwrap();
    assert_eq!(v["N_A"].as_u64(), Some(1));
    assert!((s - expect).abs() < 1e-10, "S = {s}, expected {expect}");
}

#[test]
fn partition_reproduction_is_deterministic_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, args) in [(&a, ["repro", "fig4", "--panel", "b"]), (&b, ["repro", "fig4b", "", ""])] {
        let mut cmd = bin();
        cmd.args(args.iter().filter(|s| !s.is_empty()));
        cmd.args(["--seed", "7", "--samples", "300", "--out"]).arg(path);
        let o = cmd.output().unwrap();
        stdout(&o);
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);

    let c = dir.path().join("c.csv");
    let o = bin()
        .args(["repro", "fig4b", "--seed", "8", "--samples", "300", "--out"])
        .arg(&c)
        .output()
        .unwrap();
    stdout(&o);
    assert_ne!(std::fs::read(&c).unwrap(), ta, "a different seed gives different data");
}

#[test]
fn exit_codes_separate_usage_domain_and_numeric_failures() {
    assert_eq!(run(&["thermo", "solve", "--E", "1", "--N", "2", "--bogus"]).status.code(), Some(64));
    assert_eq!(run(&["thermo", "solve", "--E", "1", "--N", "2", "--T", "1", "--mu", "0"]).status.code(), Some(64));
    assert_eq!(run(&["repro", "volume-law", "--panel", "b"]).status.code(), Some(64));
    // Below the ground-state energy of 200 particles on the ladder.
    assert_eq!(run(&["thermo", "solve", "--E", "100", "--N", "200"]).status.code(), Some(1));
    // At the ground-state energy every ratio is 0 or 1 and no temperature fits.
    let o = run(&[
        "partition", "sample", "--E", "20100", "--N", "200", "--fit", "--samples", "10", "--burn-in", "10",
        "--thinning", "10",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_entries_override_flags_and_unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"schema": "fermi-cavity/1", "thermal": {"N": 100}, "output": "json"}"#,
    )
    .unwrap();
    let v = json(&["thermo", "solve", "--E", "21900", "--N", "200", "--config", cfg.to_str().unwrap()]);
    assert!((v["particles"].as_f64().unwrap() - 100.0).abs() < 1e-6);

    std::fs::write(&cfg, r#"{"schema": "fermi-cavity/1", "colour": "blue"}"#).unwrap();
    let o = run(&["thermo", "solve", "--E", "21900", "--N", "200", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));

    std::fs::write(&cfg, r#"{"schema": "other/2"}"#).unwrap();
    let o = run(&["thermo", "solve", "--E", "21900", "--N", "200", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn json_output_survives_a_parse_and_reemit() {
    let cases: [&[&str]; 3] = [
        &["thermo", "solve", "--E", "21900", "--N", "200"],
        &["recurrence", "--dF", "12", "--cmin", "0.1", "--cmax", "0.3", "--deps", "0.7", "--eps", "0.01"],
        &["kinetics", "run", "--levels", "16", "--steps", "20", "--format", "json"],
    ];
    for args in cases {
        let text = stdout(&run(args));
        let v: Value = serde_json::from_str(&text).unwrap();
        let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
        assert_eq!(text, again, "{args:?}");
    }
}

#[test]
fn out_writes_the_same_bytes_as_stdout_and_leaves_no_temporary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kin.csv");
    let args = ["kinetics", "run", "--levels", "16", "--steps", "10"];
    let direct = stdout(&run(&args));
    let o = bin().args(args).arg("--out").arg(&path).output().unwrap();
    assert!(stdout(&o).is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("kin.csv")]);

    let missing = dir.path().join("no/such/dir/x.csv");
    let o = bin().args(args).arg("--out").arg(&missing).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn single_pair_recurrence_is_the_heisenberg_time() {
    let v = json(&["recurrence", "--dF", "1", "--cmin", "0.5", "--cmax", "0.5", "--deps", "2", "--eps", "0.01"]);
    let expect = std::f64::consts::PI;
    for key in ["t_minus", "t_plus"] {
        let t = v[key].as_f64().unwrap();
        assert!((t / expect - 1.0).abs() < 1e-12, "{key} = {t}");
    }
    let v = json(&["recurrence", "--dF", "1000", "--cmin", "0.01", "--cmax", "0.02", "--deps", "1", "--eps", "1e-6"]);
    assert!(v["t_minus"].is_null() && v["t_plus"].is_null());
    assert!(v["log10_t_minus"].as_f64().unwrap() <= v["log10_t_plus"].as_f64().unwrap());
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn kinetics_from_an_init_file_conserves_and_relaxes() {
    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("init.csv");
    let occ: Vec<String> = (0..24).map(|i| if i % 3 == 0 { "0.9" } else { "0.2" }.to_string()).collect();
    std::fs::write(&init, format!("# alternating\nn\n{}\n", occ.join("\n"))).unwrap();
    let text = stdout(&run(&[
        "kinetics", "run", "--levels", "24", "--steps", "1000", "--init", init.to_str().unwrap(),
    ]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["t", "distance", "particles", "energy"]);
    assert_eq!(rows.len(), 1001);
    let (first, last) = (&rows[0], rows.last().unwrap());
    assert!((last[2] - first[2]).abs() < 1e-10 && (last[3] - first[3]).abs() < 1e-9);
    assert!(last[1] < 1e-3 * first[1], "distance {} -> {}", first[1], last[1]);

    let o = run(&["kinetics", "run", "--levels", "10", "--init", init.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["ee", "lattice", "--side", "8", "--a", "1.5", "--T", "1", "--mu", "0"];
    let one = bin().args(args).env("FERMI_CAVITY_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("FERMI_CAVITY_THREADS", "4").output().unwrap();
    assert_eq!(stdout(&one), stdout(&four));
    let bad = bin().args(args).env("FERMI_CAVITY_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(64));
}

#[test]
fn correlation_pairs_are_read_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.csv");
    std::fs::write(&pairs, "x1,y1,x2,y2\n100,100,100,100\n100,100,101,100\n").unwrap();
    let text = stdout(&run(&["corr", "eval", "--pairs", pairs.to_str().unwrap(), "--T", "1", "--mu", "0"]));
    let (_, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], 0.0);
    assert!(rows[0][1] > rows[1][1].abs(), "coincident value dominates");
}
