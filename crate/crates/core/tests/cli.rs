use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scatter-trace"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(task: &str, cfg: &Path, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let o = bin()
        .arg(task)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .env("SCATTER_TRACE_THREADS", "2")
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

#[test]
fn free_scatter1d_writes_trivial_rows() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"task": "scatter1d", "potential": {"kind": "zero"},
            "kgrid": {"k_min": 0.1, "k_max": 10, "count": 16}}"#,
    );
    let (code, out, err) = run("scatter1d", &cfg, d.path(), &["--emit-integrand"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("task=scatter1d"));
    let text = std::fs::read_to_string(d.path().join("scatter1d.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,re_r,im_r,re_t,im_t,arg_det_s,r2");
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 16);
    for r in rows {
        let f: Vec<f64> = r.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(&f[1..], &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }
    assert!(d.path().join("integrand.csv").is_file());
}

#[test]
fn inverted_grid_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"potential": {"kind": "zero"}, "kgrid": {"k_min": 5, "k_max": 1, "count": 32}}"#,
    );
    let (code, _, err) = run("scatter1d", &cfg, d.path(), &[]);
    assert_eq!(code, 2);
    assert!(err.contains("kgrid.k_max"), "{err}");
}

#[test]
fn small_grid_and_unknown_fields_are_config_errors() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"potential": {"kind": "zero"}, "kgrid": {"k_min": 1, "k_max": 2, "count": 8}}"#,
    );
    let (code, _, err) = run("scatter1d", &cfg, d.path(), &[]);
    assert_eq!(code, 2);
    assert!(err.contains("kgrid.count"), "{err}");
    let cfg = write(d.path(), "u.json", r#"{"potential": {"kind": "zero", "depth": 1}}"#);
    assert_eq!(run("scatter1d", &cfg, d.path(), &[]).0, 2);
    let (code, _, _) = run("scatter1d", &d.path().join("missing.json"), d.path(), &[]);
    assert_eq!(code, 2);
}

#[test]
fn task_mismatch_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.json", r#"{"task": "gamma-demo", "gamma": {"z": [0.5]}}"#);
    let (code, _, err) = run("scatter1d", &cfg, d.path(), &[]);
    assert_eq!(code, 2);
    assert!(err.contains("task"), "{err}");
}

#[test]
fn non_dispersive_casimir_is_numerical_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"potential": {"kind": "delta", "g": 2.0},
            "kgrid": {"k_min": 0.001, "k_max": 100, "count": 100}}"#,
    );
    let (code, _, err) = run("casimir1d", &cfg, d.path(), &[]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn validate_delta_passes_and_strict_threshold_fails() {
    let d = tempfile::tempdir().unwrap();
    let body = |gap: f64| {
        format!(
            r#"{{"task": "validate", "potential": {{"kind": "delta", "g": 2.0}},
               "phi": {{"kind": "gaussian_bump", "center": 1.0, "width": 0.5}},
               "kgrid": {{"k_min": 0.001, "k_max": 100, "count": 300}},
               "box": {{"sizes": [50, 100, 200], "k_cut": 5.0}},
               "tolerances": {{"validate_gap": {gap}}}}}"#
        )
    };
    let cfg = write(d.path(), "ok.json", &body(1e-2));
    let (code, out, err) = run("validate", &cfg, d.path(), &[]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("task=validate"));
    let csv = std::fs::read_to_string(d.path().join("validate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let cfg = write(d.path(), "strict.json", &body(1e-12));
    assert_eq!(run("validate", &cfg, d.path(), &[]).0, 4);
}

#[test]
fn gamma_demo_matches_reference() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "g.json", r#"{"gamma": {"z": [0.5, 1.5, 2.5]}}"#);
    let (code, out, err) = run("gamma-demo", &cfg, d.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let worst: f64 = out.split("error=").nth(1).unwrap().trim().parse().unwrap();
    assert!(worst < 1e-6);
    let cfg = write(d.path(), "p.json", r#"{"gamma": {"z": [-1.0]}}"#);
    assert_eq!(run("gamma-demo", &cfg, d.path(), &[]).0, 3);
}

#[test]
fn outputs_are_deterministic_and_reingestible() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"potential": {"kind": "square_barrier", "height": 1.0, "width": 1.0},
            "kgrid": {"k_min": 0.1, "k_max": 20, "count": 24}}"#,
    );
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    assert_eq!(run("scatter3d", &cfg, &a, &[]).0, 0);
    assert_eq!(run("scatter3d", &cfg, &b, &[]).0, 0);
    for f in ["scatter3d.csv", "phase_shifts.jsonl"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let ingest = write(
        d.path(),
        "i.json",
        &format!(
            r#"{{"potential": {{"kind": "square_barrier", "height": 1.0, "width": 1.0}},
                "io": {{"soperator": "{}"}}}}"#,
            a.join("phase_shifts.jsonl").display()
        ),
    );
    let c = d.path().join("c");
    let (code, _, err) = run("scatter3d", &ingest, &c, &[]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(
        std::fs::read(a.join("scatter3d.csv")).unwrap(),
        std::fs::read(c.join("scatter3d.csv")).unwrap()
    );
}

#[test]
fn non_unitary_file_is_validation_error() {
    let d = tempfile::tempdir().unwrap();
    let s = write(
        d.path(),
        "s.jsonl",
        "{\"l_max\":0}\n{\"k\":1.0,\"matrix\":[[1.2,0.0]]}\n",
    );
    let cfg = write(
        d.path(),
        "c.json",
        &format!(r#"{{"io": {{"soperator": "{}"}}}}"#, s.display()),
    );
    let (code, _, err) = run("scatter3d", &cfg, d.path(), &[]);
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("k = 1"), "{err}");
}

#[test]
fn bad_thread_count_is_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "g.json", r#"{"gamma": {"z": [0.5]}}"#);
    let o = bin()
        .args(["gamma-demo", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(d.path())
        .env("SCATTER_TRACE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
