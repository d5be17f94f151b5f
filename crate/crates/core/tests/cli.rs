use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn diffint(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_diffint"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("DIFFINT_THREADS", t),
        None => cmd.env_remove("DIFFINT_THREADS"),
    };
    cmd.output().unwrap()
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn shipped_configs_validate() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let out = diffint(&["validate", "-c", path.to_str().unwrap()], None);
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
    }
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let odd = dir.path().join("odd.toml");
    fs::write(&odd, "experiment = \"noon-fi\"\nn = [3]\n").unwrap();
    let out = diffint(&["validate", "-c", odd.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));

    let out = diffint(&["validate", "--n", "4"], None);
    assert_eq!(out.status.code(), Some(2));

    let out = diffint(&["noon-fi", "--sigma-plus", "wobbly"], None);
    assert_eq!(out.status.code(), Some(2));

    let out = diffint(&["noon-fi"], Some("many"));
    assert_eq!(out.status.code(), Some(2));

    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "experiment = \"scan-tau\"\n").unwrap();
    let out = diffint(&["noon-fi", "-c", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in [Some("1"), Some("1"), Some("2")].into_iter().enumerate() {
        let target = dir.path().join(format!("run{i}"));
        let out = diffint(
            &[
                "scan-lambda",
                "--n",
                "10,20",
                "--sigma-plus",
                "flat,0.3",
                "--lambda",
                "1,10,100",
                "-o",
                target.to_str().unwrap(),
            ],
            threads,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(fs::read(target.join("scan_lambda.csv")).unwrap());
        let manifest: serde_json::Value =
            serde_json::from_slice(&fs::read(target.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["experiment"], "scan-lambda");
        assert_eq!(manifest["threads"], threads.unwrap().parse::<u64>().unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 3);
}

#[test]
fn print_config_round_trips() {
    let out = diffint(&["noise-histogram", "--n", "20", "--peaks", "3", "--trials", "7", "--print-config"], None);
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("h.toml");
    fs::write(&cfg, &out.stdout).unwrap();
    let again = diffint(&["noise-histogram", "-c", cfg.to_str().unwrap(), "--print-config"], None);
    assert_eq!(out.stdout, again.stdout);
    assert!(String::from_utf8_lossy(&out.stdout).contains("trials = 7"));
}

#[test]
fn noon_run_writes_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = diffint(
        &["noon-fi", "--n", "10", "--sigma-plus", "flat", "--sigma-minus", "delta", "-o", dir.path().to_str().unwrap()],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("noon_fi.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "N,sigma_minus,sigma_plus,theta,F,F_over_N2,delta_theta");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let f_over: f64 = row[5].parse().unwrap();
    assert!((f_over - 0.25).abs() < 1e-10, "{f_over}");
}
