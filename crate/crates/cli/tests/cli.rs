use std::path::Path;
use std::process::{Command, Output};

fn blayer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blayer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn read_curve(path: &Path) -> Vec<(f64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["index", "u", "theta"]);
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[1].parse().unwrap(), rec[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn classify_exit_codes() {
    let out = blayer(&[
        "classify",
        "--u-plus",
        "2",
        "--u-minus",
        "1",
        "--theta-minus",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["reason"], "Supersonic");

    let out = blayer(&[
        "classify",
        "--u-plus",
        "1",
        "--u-minus",
        "1",
        "--theta-minus",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["reason"], "Trivial");

    let out = blayer(&[
        "classify",
        "--u-plus",
        "1",
        "--u-minus",
        "-1",
        "--theta-minus",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: InvalidBoundary"), "{err}");

    let out = blayer(&["classify", "--u-minus", "1", "--theta-minus", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("u_plus"));
}

#[test]
fn trace_then_classify_a_curve_point() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = blayer(&["trace", "--u-plus", "1", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["regime"], "Subsonic");
    assert_eq!(summary["curves"].as_array().unwrap().len(), 2);
    assert_eq!(summary["curves"][0]["terminal"], "HitUAxis");
    assert_eq!(summary["curves"][1]["terminal"], "ConvergedToS2");

    let g1 = read_curve(&dir.path().join("gamma1.csv"));
    let (u, th) = g1[g1.len() / 2];
    let (us, ths) = (u.to_string(), th.to_string());
    let out = blayer(&[
        "classify",
        "--u-plus",
        "1",
        "--u-minus",
        &us,
        "--theta-minus",
        &ths,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(json(&out)["curve"], "Gamma1");

    let bumped = (th * 1.05).to_string();
    let out = blayer(&[
        "classify",
        "--u-plus",
        "1",
        "--u-minus",
        &us,
        "--theta-minus",
        &bumped,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["reason"], "OffCurve");
}

#[test]
fn trace_subcase_b_and_supersonic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = blayer(&["trace", "--u-plus", "0.3", "--out", d, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let g2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("gamma2.json")).unwrap())
            .unwrap();
    assert_eq!(g2["terminal"], "HitThetaAxis");
    assert!(g2["terminal_point"]["theta"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(
        g2["points"].as_array().unwrap().len() as u64,
        g2["samples"].as_u64().unwrap()
    );

    let out = blayer(&["trace", "--u-plus", "2", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn profile_reports_decay_and_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    blayer(&["trace", "--u-plus", "1", "--out", d]);
    let g2 = read_curve(&dir.path().join("gamma2.csv"));
    let (u, th) = g2[g2.len() / 2];
    let out = blayer(&[
        "profile",
        "--u-plus",
        "1",
        "--u-minus",
        &u.to_string(),
        "--theta-minus",
        &th.to_string(),
        "--out",
        d,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["curve"], "Gamma2");
    assert_eq!(v["profile"]["monotone_ok"], true);
    assert!(v["profile"]["residual_sup"].as_f64().unwrap() < 1e-8);
    let mut r = csv::Reader::from_path(dir.path().join("profile.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["xi", "V", "U", "Theta"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len() as u64, v["profile"]["samples"].as_u64().unwrap());
    let last_u: f64 = rows.last().unwrap()[2].parse().unwrap();
    assert!((last_u - 1.0).abs() < 1e-8);
}

#[test]
fn portrait_svg_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = blayer(&["portrait", "--u-plus", "1", "--grid", "3", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("portrait.svg")).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let node = |id: &str| {
        doc.descendants()
            .find(|n| n.attribute("id") == Some(id))
            .unwrap_or_else(|| panic!("no element {id}"))
    };
    let num = |n: roxmltree::Node, a: &str| -> f64 { n.attribute(a).unwrap().parse().unwrap() };
    let s2 = node("S2");
    assert!((num(s2, "data-u") - 4.0 / 3.0).abs() < 1e-12);
    assert!((num(s2, "data-theta") - 8.0 / 9.0).abs() < 1e-12);
    let z1 = node("Z1");
    assert!(num(z1, "data-u").abs() < 1e-9);
    assert!(num(z1, "data-theta") > 1.0);
    let g1_end = node("Gamma1").attribute("data-end").unwrap().to_string();
    let (eu, et): (f64, f64) = {
        let (a, b) = g1_end.split_once(',').unwrap();
        (a.parse().unwrap(), b.parse().unwrap())
    };
    assert_eq!((eu, et), (num(z1, "data-u"), num(z1, "data-theta")));
    // S2 lies right of S1 and below it in screen coordinates
    let s1 = node("S1");
    assert!(num(s2, "cx") > num(s1, "cx"));
    assert!(num(s2, "cy") > num(s1, "cy"));

    let out = blayer(&["portrait", "--u-plus", "2", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_csv_flips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = blayer(&[
        "sweep",
        "--mach-min",
        "0.1",
        "--mach-max",
        "2.09",
        "--points",
        "200",
        "--out",
        d,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut r = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 200);
    let m_star = (0.4f64 / 2.8).sqrt();
    for row in &rows {
        let m: f64 = row[0].parse().unwrap();
        let det: f64 = row[2].parse().unwrap();
        let alpha2: f64 = row[7].parse().unwrap();
        if &row[1] != "Transonic" {
            assert_eq!(det.signum(), (m * m - 1.0).signum(), "M+ = {m}");
        }
        assert_eq!(alpha2 < 0.0, m < m_star, "M+ = {m}");
        let want = match &row[1] {
            "Subsonic" if m < m_star => "HitThetaAxis",
            "Subsonic" => "ConvergedToS2",
            _ => "",
        };
        assert_eq!(&row[8], want, "M+ = {m}");
    }
    assert_eq!(rows.iter().filter(|r| &r[1] == "Transonic").count(), 1);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# far field\nu_plus = 2\nu-minus = 1\ntheta_minus = 1\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let out = blayer(&["classify", "--config", c]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["reason"], "Supersonic");
    let out = blayer(&["classify", "--config", c, "--u-plus", "1"]);
    assert_eq!(json(&out)["regime"], "Subsonic");

    std::fs::write(&cfg, "u_plus = 1\ngamma = fast\n").unwrap();
    let out = blayer(&["classify", "--config", c]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("gamma"), "{err}");
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = blayer(&[
            "trace",
            "--u-plus",
            "1.1832159566199232",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let x = std::fs::read(a.path().join("sigma.csv")).unwrap();
    let y = std::fs::read(b.path().join("sigma.csv")).unwrap();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}
