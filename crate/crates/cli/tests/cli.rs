use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zonesep(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zonesep"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_owned();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    (header, rows)
}

#[test]
fn timeline_csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = zonesep(dir.path(), &["timeline"]);
    assert!(out.status.success());
    let (header, ev) = rows(&dir.path().join("timeline_events.csv"));
    assert!(header.starts_with("label,t,x"));
    let times: Vec<f64> = ev.iter().map(|r| r[1].parse().unwrap()).collect();
    let want = [0.0125, 1.0 / 45.0, 0.032, 2.0 / 45.0, 0.08, 2.0 / 15.0];
    assert_eq!(times.len(), 6);
    for (t, w) in times.iter().zip(want) {
        assert!((t - w).abs() < 1e-12, "{t} vs {w}");
    }

    let out = zonesep(dir.path(), &["timeline", "--format", "json"]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("timeline.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let events = v["timeline"]["events"].as_array().unwrap();
    assert_eq!(events.len(), ev.len());
    for (e, r) in events.iter().zip(&ev) {
        assert!(!e["label"].as_str().unwrap().is_empty());
        assert_eq!(e["time"].as_f64().unwrap(), r[1].parse::<f64>().unwrap());
        assert_eq!(
            e["position"].as_f64().unwrap(),
            r[2].parse::<f64>().unwrap()
        );
    }
    assert_eq!(v["params"]["q2"].as_f64(), Some(10.0));
}

#[test]
fn invalid_params_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[params]\nmu1 = 5.0\nmu2 = 8.0\nq1 = 6.0\nq2 = 10.0\nx1 = -1.0\nx2 = 1.0\n",
    );
    let out = zonesep(dir.path(), &["timeline", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("q1 < mu1"), "{err}");

    let out = zonesep(dir.path(), &["profile", "--times", "0.02,0.01"]);
    assert_eq!(out.status.code(), Some(2));
    let out = zonesep(dir.path(), &["profile", "--cfl", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn profile_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = ["profile", "--times", "0.01,0.0125,0.25", "--samples", "800"];
    assert!(zonesep(&a, &args).status.success());
    assert!(zonesep(&b, &args).status.success());
    for t in ["0.01", "0.0125", "0.25"] {
        let name = format!("profile_t{t}.csv");
        let x = fs::read(a.join(&name)).unwrap();
        assert_eq!(x, fs::read(b.join(&name)).unwrap());
        let (header, r) = rows(&a.join(&name));
        assert_eq!(header, "x,R1,R2,u1,u2,zone");
        assert!(r.len() > 100);
        let svg = fs::read_to_string(a.join(format!("profile_t{t}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
}

#[test]
fn profile_json_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert!(zonesep(
        dir.path(),
        &["profile", "--times", "0.036", "--samples", "300"]
    )
    .status
    .success());
    assert!(zonesep(
        dir.path(),
        &[
            "profile",
            "--times",
            "0.036",
            "--samples",
            "300",
            "--format",
            "json"
        ]
    )
    .status
    .success());
    let (_, csv) = rows(&dir.path().join("profile_t0.036.csv"));
    let text = fs::read_to_string(dir.path().join("profile_t0.036.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), csv.len());
    for (s, r) in samples.iter().zip(&csv) {
        assert_eq!(s["x"].as_f64().unwrap(), r[0].parse::<f64>().unwrap());
        assert_eq!(s["R2"].as_f64().unwrap(), r[2].parse::<f64>().unwrap());
        assert_eq!(s["zone"].as_str().unwrap(), r[5]);
    }
}

#[test]
fn compare_refinement_reduces_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = zonesep(
        dir.path(),
        &[
            "compare", "--times", "0.01", "--cells", "250", "--refine", "3",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, r) = rows(&dir.path().join("compare_summary.csv"));
    assert!(header.starts_with("t,cells,dx,l1_u1,l1_u2"));
    assert_eq!(r.len(), 3);
    for k in [3, 4] {
        let e: Vec<f64> = r.iter().map(|row| row[k].parse().unwrap()).collect();
        assert!(e[0] >= e[1] && e[1] >= e[2], "{e:?}");
    }
    assert!(dir.path().join("compare_t0.01.svg").exists());
}

fn interpolate(table: &[(f64, f64, f64)], x: f64) -> (f64, f64) {
    let i = table
        .partition_point(|r| r.0 <= x)
        .clamp(1, table.len() - 1);
    let (a, b) = (table[i - 1], table[i]);
    let w = if b.0 > a.0 {
        (x - a.0) / (b.0 - a.0)
    } else {
        1.0
    };
    (a.1 + w * (b.1 - a.1), a.2 + w * (b.2 - a.2))
}

#[test]
fn general_reproduces_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.toml",
        "[general]\nbreaks = [-1.0, 1.0]\nr1 = [5.0, 2.0, 5.0]\nr2 = [8.0, 10.0, 8.0]\n\
         domain = [-5.0, 5.0]\nwindow = [1.25, 5.6]\nseed_a = 0.0\n",
    );
    let out = zonesep(
        dir.path(),
        &["general", "--config", &cfg, "--times", "0.018"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = zonesep(
        dir.path(),
        &["profile", "--times", "0.018", "--samples", "40000"],
    );
    assert!(out.status.success());
    let parse = |name: &str| -> Vec<(f64, f64, f64)> {
        rows(&dir.path().join(name))
            .1
            .iter()
            .map(|r| {
                (
                    r[0].parse().unwrap(),
                    r[1].parse().unwrap(),
                    r[2].parse().unwrap(),
                )
            })
            .collect()
    };
    let exact = parse("profile_t0.018.csv");
    let general = parse("general_t0.018.csv");
    assert!(general.len() > 50);
    for &(x, r1, r2) in &general {
        let (e1, e2) = interpolate(&exact, x);
        assert!(
            (r1 - e1).abs() < 1e-5 && (r2 - e2).abs() < 1e-5,
            "x = {x}: ({r1}, {r2}) vs ({e1}, {e2})"
        );
    }
}

#[test]
fn general_constant_and_three_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write(
        dir.path(),
        "flat.toml",
        "[general]\nbreaks = []\nr1 = [3.0]\nr2 = [7.0]\ndomain = [0.0, 4.0]\nwindow = [2.0, 4.0]\n",
    );
    let out = zonesep(
        dir.path(),
        &["general", "--config", &flat, "--times", "0.01"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (_, r) = rows(&dir.path().join("general_t0.01.csv"));
    assert!(r
        .iter()
        .all(|row| row[1] == "3" && row[2] == "7" && row[5] == "march"));

    let three = write(
        dir.path(),
        "three.toml",
        "[general]\nmobilities = [5.0, 8.0]\nbreaks = [-1.0, 0.0, 1.0]\nr1 = [2.0, 3.0, 4.0, 5.0]\n\
         r2 = [8.0, 9.0, 9.5, 10.0]\ndomain = [-4.0, 4.0]\n",
    );
    let out = zonesep(
        dir.path(),
        &["general", "--config", &three, "--times", "0.005,0.01"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("general_t0.005.csv").exists());
}

#[test]
fn general_fold_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "fold.toml",
        "[general]\nbreaks = [-1.0, 1.0]\nr1 = [5.0, 2.0, 5.0]\nr2 = [8.0, 10.0, 8.0]\n\
         domain = [-20.0, 20.0]\nseed_a = 0.0\n",
    );
    let out = zonesep(
        dir.path(),
        &["general", "--config", &cfg, "--times", "0.018"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fold"));
}
