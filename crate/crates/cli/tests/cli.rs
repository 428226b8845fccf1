use std::path::Path;
use std::process::{Command, Output};

fn adw(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adw")).args(args).arg("--out").arg(out).output().expect("run adw")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn rate_constant_damping() {
    let dir = tempfile::tempdir().unwrap();
    let o = adw(&["rate", "--set", "damping.variant=constant", "--set", "spectrum.n_max=6", "--set", "spectrum.grid=32"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("rate.json"));
    assert!((r["alpha"].as_f64().unwrap() - 0.2).abs() < 1e-3);
    assert!((r["D0"].as_f64().unwrap() + 0.1).abs() < 1e-6);
    let lt = std::fs::read_to_string(dir.path().join("Lt.csv")).unwrap();
    assert!(lt.starts_with("t,L\n"));
    let spec = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(spec.starts_with("re,im\n"));
    assert_eq!(spec.lines().count(), 1 + 2 * 13 * 13);
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "rate");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["config"]["damping"]["variant"], "constant");
}

#[test]
fn rate_without_damping_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = adw(
        &["rate", "--set", "damping.variant=constant", "--set", "damping.c=0", "--set", "spectrum.n_max=4", "--set", "spectrum.grid=16"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(read_json(&dir.path().join("rate.json"))["alpha"].as_f64().unwrap(), 0.0);
}

#[test]
fn agcc_two_strip_satisfied() {
    let dir = tempfile::tempdir().unwrap();
    let o = adw(&["agcc", "--set", "averages.n_x=32", "--set", "averages.n_theta=64"], dir.path());
    assert!(o.status.success());
    let v = read_json(&dir.path().join("agcc.json"));
    assert_eq!(v["satisfied"], true);
    assert!(v["T0"].as_f64().unwrap() > 0.0);
}

#[test]
fn evolve_zero_data_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let o = adw(&["evolve", "--set", "evolution.initial=zero", "--set", "evolution.t_max=1", "--set", "grid.n=16"], dir.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("energies.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,E"));
    assert!(lines.all(|l| l.ends_with(",0")));
}

#[test]
fn evolve_is_reproducible() {
    let run = |dir: &Path| {
        let o = adw(
            &["evolve", "--set", "grid.n=32", "--set", "evolution.t_max=6", "--set", "evolution.snapshots=true", "--set", "evolution.record_every=4"],
            dir,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(dir.join("energies.csv")).unwrap()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(a.path()), run(b.path()));
    let snap = std::fs::read(a.path().join("snapshots/snap_00001.adwf")).unwrap();
    assert_eq!(&snap[..4], b"ADWF");
    assert_eq!(snap.len(), 16 + 32 * 32 * 16);
    let e = read_json(&a.path().join("evolve.json"));
    assert!(e["fit"]["rate"].as_f64().unwrap() > 0.0);
}

#[test]
fn spectrum_and_scaling_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = adw(&["spectrum", "--set", "spectrum.n_max=4", "--set", "spectrum.grid=32"], dir.path());
    assert!(o.status.success());
    let s = read_json(&dir.path().join("spectrum.json"));
    assert!(s["D0"].as_f64().unwrap() < 0.0);
    assert!(s["kernel_check"]["min_sigma"].as_f64().unwrap() > 1e-4);

    let o = adw(&["coherent-scaling", "--set", "beams.k_list=[32,64]", "--set", "beams.grid=128"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    assert!(csv.starts_with("k,norm,ell\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
}

#[test]
fn beam_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = adw(
        &["beam", "--set", "beams.k_list=[32,64]", "--set", "beams.grid=64", "--set", "beams.T=0.5", "--set", "beams.dt=0.05"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("beam_decay.csv")).unwrap();
    assert!(csv.starts_with("k,T,measured,predicted\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn invalid_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(adw(&["rate", "--set", "grid.n=banana"], dir.path()).status.code(), Some(1));
    assert_eq!(adw(&["rate", "--set", "damping.colour=red"], dir.path()).status.code(), Some(1));
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"spectrum": {"n_max": 0}}"#).unwrap();
    assert_eq!(adw(&["spectrum", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(1));
    assert_eq!(adw(&["no-such-command"], dir.path()).status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // k = 256 is not resolved on a 32 grid
    let o = adw(&["coherent-scaling", "--set", "beams.grid=32"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = adw(&["verify", "--only", "2,10"], dir.path());
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    let v = read_json(&dir.path().join("verify.json"));
    assert_eq!(v["passed"], true);

    let o = adw(&["verify", "--only", "1"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn shipped_config_matches_defaults() {
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let dir = tempfile::tempdir().unwrap();
    let o = adw(&["show-config", "--config", shipped.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let defaults = adw(&["show-config"], dir.path());
    assert_eq!(o.stdout, defaults.stdout);
}
