use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavsense"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("UAVSENSE_OUT")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

const TINY: &[&str] = &[
    "--set",
    "scene.divisions=4",
    "--set",
    "scene.elements=4",
    "--set",
    "waveform.symbols=2",
    "--set",
    "waveform.subcarriers=8",
];

#[test]
fn overhead_table_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["overhead", "--P", "265", "--U", "16", "--N", "4"]);
    assert!(o.status.success());
    let stdout = text(&o.stdout);
    let row = |name: &str| -> Vec<u64> {
        let line = stdout.lines().find(|l| l.starts_with(name)).unwrap();
        line.split_whitespace().filter_map(|t| t.parse().ok()).collect()
    };
    assert_eq!(row("MuRE")[..2], [8480, 135680]);
    assert_eq!(row("MIMORE")[..2], [16960, 271360]);
    assert_eq!(row("MuPE")[..2], [64, 1024]);
    assert_eq!(row("CS")[0], 64 * 16 * 64 * 4 * 265);
    assert!(dir.path().join("overhead.txt").exists());
}

#[test]
fn overhead_can_exclude_own_cells() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["overhead", "--P", "10", "--U", "4", "--own-cells"]);
    assert!(o.status.success());
    // ceil(10 / 4) = 3 own cells leave 7 reported
    assert!(text(&o.stdout).lines().any(|l| l.starts_with("MuRE") && l.contains(" 224 ")));
}

#[test]
fn missing_config_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate", "--config", "/no/such/file.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("/no/such/file.toml"));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"error\""));
}

#[test]
fn unknown_override_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate", "--set", "scene.bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("scene.bogus"));
}

#[test]
fn simulate_sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--trials", "3", "--sweep", "U=1,4"];
    args.extend_from_slice(TINY);
    let o = run(dir.path(), &args);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("parameter,value,method"));
    assert!(lines.iter().any(|l| l.starts_with("U,1.0,benchmark")));
    assert!(lines.iter().any(|l| l.starts_with("U,4.0,mimore")));
    let manifest: String = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"ok\""));
    assert!(manifest.contains("config_sha256"));
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--trials", "3"];
    args.extend_from_slice(TINY);
    assert!(run(a.path(), &args).status.success());
    args.push("--sequential");
    assert!(run(b.path(), &args).status.success());
    let read = |d: &Path| std::fs::read(d.join("results.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn maps_writes_one_file_per_map() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["maps", "--trial", "2"];
    args.extend_from_slice(TINY);
    let o = run(dir.path(), &args);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let count = std::fs::read_dir(dir.path().join("maps")).unwrap().count();
    assert_eq!(count, 12);
}

#[test]
fn validate_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["validate"]);
    assert!(o.status.success());
    assert_eq!(text(&o.stdout).matches("[PASS]").count(), 4);
}

#[test]
fn unknown_preset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate", "--preset", "huge"]);
    assert_eq!(o.status.code(), Some(2));
}
