use std::path::Path;
use std::process::{Command, Output};

use fewbody_cli::config::Config;

const BIN: &str = env!("CARGO_BIN_EXE_fewbody");

fn fewbody(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

// Coplanar symmetric sharing at 27.2 eV with a token budget: 1024 samples per row.
const SYMMETRIC_CHEAP: &str = "\
[run]
seed = 5
[kinematics]
E_i = 27.2 eV
E_a = 6.8 eV
E_b = 6.8 eV
phi_a = 30 deg
phi_b_from = 0 deg
phi_b_to = 360 deg
phi_b_step = 2 deg
[quadrature]
batch_size = 64
max_samples = 1024
";

#[test]
fn missing_seed_on_tdcs_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.cfg", &SYMMETRIC_CHEAP.replace("seed = 5\n", ""));
    let out = dir.path().to_str().unwrap();
    let o = fewbody(&["tdcs", "--config", &cfg, "--out-dir", out]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[config]"), "{}", stderr(&o));
    assert!(!dir.path().join("tdcs.csv").exists());
}

#[test]
fn bare_energies_are_unit_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.cfg", &SYMMETRIC_CHEAP.replace("E_i = 27.2 eV", "E_i = 27.2"));
    let o = fewbody(&["tdcs", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[unit]"));
}

#[test]
fn unknown_keys_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.cfg", &format!("{SYMMETRIC_CHEAP}phi_c = 3 deg\n"));
    let o = fewbody(&["tdcs", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[quadrature] phi_c"), "{}", stderr(&o));
}

#[test]
fn azimuth_scan_has_180_rows_and_reproduces_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "scan.cfg", SYMMETRIC_CHEAP);
    let mut csvs = Vec::new();
    for workers in ["1", "4", "8"] {
        let out = dir.path().join(format!("w{workers}"));
        let o = fewbody(&["tdcs", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success(), "{}", stderr(&o));
        csvs.push(std::fs::read(out.join("tdcs.csv")).unwrap());
    }
    assert!(csvs.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "phi_a_deg,phi_b_deg,E_a_au,tdcs_au,stat_err");
    assert_eq!(lines.len(), 181);
    assert!(lines[1].starts_with("30,0,"));
    assert!(lines[180].starts_with("30,358,"));
    // symmetric sharing: the back-to-back row phi_b = phi_a has k_a = k_b
    // and the DS3C amplitudes vanish exactly
    assert!(lines[16].starts_with("30,30,") && lines[16].ends_with(",0,0"), "{}", lines[16]);
}

#[test]
fn manifest_is_a_config_that_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cusp.cfg", "[run]\nseed = 3\n[cusp]\nparticles = 2\nsystems = 2\n");
    let first = dir.path().join("first");
    let o = fewbody(&["cusp-check", "--config", &cfg, "--out-dir", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(first.join("cusp-check.manifest")).unwrap();
    let parsed = Config::parse(&manifest).unwrap();
    assert_eq!(parsed.get("run", "seed"), Some("3"));
    // defaults are echoed, so the manifest pins the whole run
    assert_eq!(parsed.get("cusp", "r_delta"), Some("0.0001 bohr"));
    assert!(parsed.get("results", "max_deviation").is_some());
    assert_eq!(parsed.get("manifest", "command"), Some("cusp-check"));

    let second = dir.path().join("second");
    let again = first.join("cusp-check.manifest");
    let o = fewbody(&["cusp-check", "--config", again.to_str().unwrap(), "--out-dir", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(first.join("cusp-check.csv")).unwrap(),
        std::fs::read(second.join("cusp-check.csv")).unwrap()
    );
    let m2 = std::fs::read_to_string(second.join("cusp-check.manifest")).unwrap();
    assert_eq!(manifest, m2);
}

#[test]
fn equal_velocities_give_the_limit_charges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "[charges]\nenergies = 1 eV\nsharing = 0.5\ntheta_ab = 0 deg\n",
    );
    let o = fewbody(&["charges", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("charges.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let col = |name: &str| row[header.iter().position(|h| h == name).unwrap()].to_string();
    assert_eq!((col("z_ab"), col("z_a"), col("z_b")), ("1".into(), "-1".into(), "-1".into()));
    assert_eq!(col("beta_ab"), "inf");
}

#[test]
fn model_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "[run]\nmodel = ds3c\n[charges]\nenergies = 1 eV\nsharing = 0.3\ntheta_ab = 60 deg\n");
    let o = fewbody(&["charges", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap(), "--model", "3c"]);
    assert!(o.status.success());
    let manifest = Config::parse(&std::fs::read_to_string(dir.path().join("charges.manifest")).unwrap()).unwrap();
    assert_eq!(manifest.get("run", "model"), Some("3c"));
    let text = std::fs::read_to_string(dir.path().join("charges.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[3..6], &["1", "-1", "-1"]);
}

#[test]
fn levels_file_feeds_the_zero_search() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "levels.txt", "# two-level system\n0.0\n1.0\n");
    let cfg = write(
        dir.path(),
        "z.cfg",
        &format!(
            "[spectrum]\nsource = file\nfile = {}\nunit = 1 au\n",
            dir.path().join("levels.txt").display()
        ),
    );
    let o = fewbody(&["zeros", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("zeros.csv")).unwrap();
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!(first[0].abs() < 1e-10 && (first[1].abs() - std::f64::consts::PI).abs() < 1e-10, "{first:?}");
}
