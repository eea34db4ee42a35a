use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hzlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hzlab"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("hzlab runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn roots_of_z_squared_minus_conj_z() {
    let dir = TempDir::new().unwrap();
    // h = z^2 + conj(-z): zeros at 0 and the three cube roots of unity
    let cfg = write_config(dir.path(), r#"{"p": [[0,0],[0,0],[1,0]], "q": [[0,0],[-1,0]]}"#);
    let out = hzlab(&["roots", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("roots.json"));
    assert_eq!(report["command"], "roots");
    assert_eq!(report["result"]["count"], 4);
    assert_eq!(report["result"]["certified"], true);
    assert_eq!(report["result"]["index_sum_ok"], true);
}

#[test]
fn construct_preset_is_reproducible_byte_for_byte() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let cfg = write_config(dir.path(), r#"{"preset": "paper-fig-3-left"}"#);
        let out = hzlab(&["construct", "--config", &cfg, "--svg"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["construct.json", "construct.svg"] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{file} differs between runs");
    }
    let report = read_json(&a.path().join("construct.json"));
    assert_eq!(report["result"]["count"], 12);
}

#[test]
fn newton_on_complex_coefficients_skips_the_root_bound() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"p": [[0,1],[1,0],[0,0],[1,0]], "q": [[0,0],[1,0]]}"#);
    let out = hzlab(&["newton", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("newton.json"));
    assert_eq!(report["result"]["bernstein"], Value::Null);
}

#[test]
fn newton_reports_mixed_area_for_real_input() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"p": [[0.3,0],[1,0],[0.7,0],[1,0]], "q": [[0,0],[0.5,0]]}"#);
    let out = hzlab(&["newton", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("newton.json"));
    assert_eq!(report["result"]["mixed_area"], 6.0);
}

#[test]
fn missing_polynomial_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "{}");
    let out = hzlab(&["roots", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hzlab roots"));
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"polynomial": [1, 2]}"#);
    let out = hzlab(&["roots", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn caustic_of_petals_writes_json_and_svg() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"preset": "paper-fig-5", "theta": 0.5235987755982988}"#);
    let out = hzlab(&["caustic", "--config", &cfg, "--svg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("caustic.json"));
    let comps = report["result"]["components"].as_array().unwrap();
    assert!(!comps.is_empty());
    for comp in comps {
        if comp["cusp_law"] != Value::Null {
            assert_eq!(comp["cusp_law"], true);
        }
    }
    let svg = fs::read_to_string(dir.path().join("caustic.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn render_every_preset() {
    let dir = TempDir::new().unwrap();
    for name in ["paper-fig-1", "paper-fig-2", "paper-fig-3", "paper-fig-4", "paper-fig-5"] {
        let cfg = write_config(dir.path(), &format!(r#"{{"preset": "{name}"}}"#));
        let out = hzlab(&["render", "--config", &cfg], dir.path());
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(format!("{name}.svg")).exists());
        assert!(dir.path().join(format!("{name}.json")).exists());
    }
}

#[test]
fn unknown_preset_fails_cleanly() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"preset": "no-such-figure"}"#);
    let out = hzlab(&["render", "--config", &cfg], dir.path());
    assert_ne!(out.status.code(), Some(0));
    assert!(out.status.code().is_some());
}
