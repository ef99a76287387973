use std::process::Command;

fn fdxlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fdxlab")).args(args).output().unwrap()
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(fdxlab(&[]).status.code(), Some(2));
}

#[test]
fn invalid_overrides_report_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = fdxlab(&["exponents", "--set", "m=1.2", "--set", "p=0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("`m`") && stderr.contains("`p`"), "{stderr}");
    assert!(!out.exists());
}

#[test]
fn unknown_key_in_config_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "N = 1\nsolver.dtt = 0.1\n").unwrap();
    let o = fdxlab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver.dtt"));
}

#[test]
fn output_directory_receives_timestamped_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = fdxlab(&["exponents", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.len(), 1);
    assert!(names[0].starts_with("exponents-") && names[0].ends_with(".csv"));
}
