use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spinfield::scenario::dump::load_table;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinfield"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(config: &Path, out: &Path) -> Output {
    bin().arg("run").arg(config).arg("--out").arg(out).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fast_configs_run_and_pass() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["checkpoint-table", "photon-packet", "electron-packet", "boost", "electron-box"] {
        let out = dir.path().join(name);
        let o = run(&configs().join(format!("{name}.json")), &out);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stdout));
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        assert_eq!(report["passed"], true);
        assert_eq!(report["scenario"], name);
        assert!(out.join("metadata.json").exists());
        assert!(out.join("summary.csv").exists());
    }
}

#[test]
fn report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("boost.json");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&config, &a).status.code(), Some(0));
    assert_eq!(run(&config, &b).status.code(), Some(0));
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
}

#[test]
fn field_dump_reloads_with_constant_cp_magnitude() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    assert_eq!(run(&configs().join("photon-packet.json"), &out).status.code(), Some(0));
    let t = load_table(&out.join("photon_e.csv")).unwrap();
    assert_eq!(t.columns, ["z", "Ex", "Ey", "Ez"]);
    assert_eq!(t.rows.len(), 64);
    let text = fs::read_to_string(out.join("photon_e.csv")).unwrap();
    let first = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(first, "z,Ex,Ey,Ez");
    // |E| is constant for a uniform circularly polarized wave
    let mags: Vec<f64> = t.rows.iter().map(|r| (r[1] * r[1] + r[2] * r[2]).sqrt()).collect();
    assert!(mags.iter().all(|m| (m / mags[0] - 1.0).abs() < 1e-12));
}

#[test]
fn unknown_key_is_a_schema_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"scenario": "electron-box", "grid": {"points": 64},
            "physics": {"mass": "511 keV", "length": "1 nm", "modes": [1], "helicity": 1, "colour": 3}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&config, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("physics.colour"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn malformed_json_and_bad_units_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"scenario": "boost", "#);
    assert_eq!(run(&config, &dir.path().join("o1")).status.code(), Some(2));

    let config = write_config(
        dir.path(),
        r#"{"scenario": "electron-box", "grid": {"points": 64},
            "physics": {"mass": "511 keV", "length": "1 kg", "modes": [1], "helicity": 1}}"#,
    );
    let o = run(&config, &dir.path().join("o2"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("physics.length"), "{}", stderr(&o));
}

#[test]
fn unknown_tolerance_name_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"scenario": "boost", "seed": 1,
            "physics": {"photon_frequency": "1 THz", "beta": 0.6, "electron_mass": "511 keV",
                        "electron_velocity": 0.1, "samples": 10},
            "tolerances": {"doppler-ration": 1e-3}}"#,
    );
    let o = bin().arg("validate").arg(&config).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tolerances"), "{}", stderr(&o));
}

#[test]
fn physics_precondition_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // superluminal electron
    let config = write_config(
        dir.path(),
        r#"{"scenario": "boost", "seed": 1,
            "physics": {"photon_frequency": "1 THz", "beta": 0.6, "electron_mass": "511 keV",
                        "electron_velocity": 1.5, "samples": 10}}"#,
    );
    let o = run(&config, &dir.path().join("o"));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn tightened_tolerance_fails_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"scenario": "photon-packet", "grid": {"points": 256, "periods": 16},
            "physics": {"frequency": "1 MHz", "helicity": 1, "envelope": {"gaussian": {"width": "600 m"}}},
            "tolerances": {"energy-spin-ratio": 1e-9}}"#,
    );
    let out = dir.path().join("o");
    let o = run(&config, &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL energy-spin-ratio"));
    assert!(out.join("report.json").exists());
}

#[test]
fn validate_accepts_every_shipped_config() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let o = bin().arg("validate").arg(&path).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stderr(&o));
    }
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().arg("validate").arg(dir.path().join("nope.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}
