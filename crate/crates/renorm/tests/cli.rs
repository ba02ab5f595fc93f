use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use renorm::cli_io::render_ball_2d;
use renorm::linalg;
use renorm::norm::NormObject;

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn renorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renorm")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn radii(norm: &str, resolution: usize) -> Vec<(f64, f64)> {
    let path = corpus(norm);
    let v = json(&renorm(&["render", "--file", path.to_str().unwrap(), "--resolution", &resolution.to_string()]));
    v.as_array().unwrap().iter().map(|p| (p["theta"].as_f64().unwrap(), p["radius"].as_f64().unwrap())).collect()
}

#[test]
fn day_norm_eval() {
    let path = corpus("norms/day4.json");
    let v = json(&renorm(&["norm", "eval", "--file", path.to_str().unwrap(), "--x", "1,1,0,0"]));
    assert!((v["value"].as_f64().unwrap() - 0.559017).abs() < 1e-6);
}

#[test]
fn malformed_input_exits_2() {
    let dir = std::env::temp_dir().join(format!("renorm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"dim\": 2, \"kind\":").unwrap();
    let out = renorm(&["norm", "eval", "--file", bad.to_str().unwrap(), "--x", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let out = renorm(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn euclidean_disk_has_unit_radius() {
    for (_, r) in radii("norms/euclidean2.json", 360) {
        assert!((r - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_pimple_peaks_at_the_tips() {
    let pts = radii("norms/disk_single_pimple.json", 360);
    let max = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    assert!((max - 1.25).abs() < 1e-6);
    let at: Vec<f64> = pts.iter().filter(|p| p.1 > max - 1e-6).map(|p| p.0).collect();
    assert_eq!(at.len(), 2);
    assert!(at[0].abs() < 1e-12 && (at[1] - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn c4_pimple_has_four_maxima() {
    let pts = radii("norms/disk_c4_pimple.json", 720);
    let max = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let at: Vec<f64> = pts.iter().filter(|p| p.1 > max - 1e-9).map(|p| p.0).collect();
    assert_eq!(at.len(), 4);
    for (k, th) in at.iter().enumerate() {
        assert!((th - k as f64 * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}

#[test]
fn render_consistency() {
    for file in ["norms/euclidean2.json", "norms/disk_single_pimple.json", "norms/disk_c4_pimple.json"] {
        let norm: NormObject = serde_json::from_str(&std::fs::read_to_string(corpus(file)).unwrap()).unwrap();
        let r = render_ball_2d(&norm, 256).unwrap();
        for p in &r.points {
            let u = linalg::vector(&[p.theta.cos(), p.theta.sin()]);
            assert!((p.radius * norm.eval(&u).unwrap() - 1.0).abs() < 1e-8);
        }
        assert!(r.csv.starts_with("theta,radius\n"));
        assert_eq!(r.csv.lines().count(), 257);
        assert!(r.svg.contains("<svg") && r.svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn render_writes_files() {
    let dir = std::env::temp_dir().join(format!("renorm-render-{}", std::process::id()));
    let path = corpus("norms/disk_single_pimple.json");
    let out = renorm(&["--out", dir.to_str().unwrap(), "render", "--file", path.to_str().unwrap()]);
    assert!(out.status.success());
    for f in ["render.csv", "render.svg", "render.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.join("render.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("theta,radius"));
}

#[test]
fn manifests_are_deterministic() {
    for m in ["norm_eval_day4", "pimple_check_single", "jarosz_double", "complex_structures_c4"] {
        let p = corpus(&format!("manifests/{m}.json"));
        let a = renorm(&["run", p.to_str().unwrap()]);
        let b = renorm(&["run", p.to_str().unwrap()]);
        assert!(a.status.success(), "{m}");
        assert_eq!(a.stdout, b.stdout, "{m}");
    }
}

#[test]
fn committed_specs_match_a_rebuild() {
    for name in ["disk_single", "disk_pm", "disk_c4", "l3_weighted_pm", "euclid3_c6", "l4_q8"] {
        let c = corpus(&format!("constructions/{name}.json"));
        let out = renorm(&["pimple", "build", "--file", c.to_str().unwrap()]);
        assert!(out.status.success(), "{name}");
        let committed = std::fs::read(corpus(&format!("specs/{name}.json"))).unwrap();
        assert!(out.stdout == committed, "{name} spec drifted from its construction");
    }
}
