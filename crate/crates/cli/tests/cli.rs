use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use b2i::raster::{load_labelmap, save_mask};
use b2i::Mask;

fn b2i(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_b2i")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn discs(centers: &[(f64, f64)], r: f64) -> Mask {
    Mask::from_fn(64, 64, |x, y| {
        centers
            .iter()
            .any(|&(cx, cy)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r)
    })
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn convert_single_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("two.png");
    save_mask(&discs(&[(16.0, 16.0), (46.0, 46.0)], 8.0), &input).unwrap();
    let out = dir.path().join("out");
    let o = b2i(&["convert", "--input", p(&input), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["entries"].as_array().unwrap().len(), 1);
    assert_eq!(load_labelmap(out.join("labels/two.png")).unwrap().count(), 2);
}

#[test]
fn convert_directory_of_masks() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    for k in 0..5 {
        let centers: Vec<(f64, f64)> = (0..=k % 3).map(|i| (12.0 + 20.0 * i as f64, 32.0)).collect();
        save_mask(&discs(&centers, 7.0), input.join(format!("m{k}.png"))).unwrap();
    }
    fs::write(input.join("notes.txt"), "ignored").unwrap();
    let out = dir.path().join("out");
    let o = b2i(&["convert", "--input", p(&input), "--out", p(&out), "--overlay"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("manifest.json"))["entries"].as_array().unwrap().len(), 5);
    for k in 0..5 {
        let labels = load_labelmap(out.join(format!("labels/m{k}.png"))).unwrap();
        assert_eq!(labels.count(), 1 + k % 3);
        assert!(out.join(format!("overlays/m{k}.png")).is_file());
    }
}

#[test]
fn unreadable_input_fails_without_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.png");
    fs::write(&input, b"not a png").unwrap();
    let out = dir.path().join("out");
    let o = b2i(&["convert", "--input", p(&input), "--out", p(&out)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.png"));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn tune_requires_refs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.png");
    save_mask(&discs(&[(32.0, 32.0)], 9.0), &input).unwrap();
    let o = b2i(&["tune", "--input", p(&input), "--out", p(&dir.path().join("out"))]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--refs"));
}

#[test]
fn eval_rejects_unmatched_references() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    save_mask(&discs(&[(32.0, 32.0)], 9.0), input.join("a.png")).unwrap();
    let refs = dir.path().join("refs.csv");
    fs::write(&refs, "image,count\na,1\nghost,3\n").unwrap();
    let o = b2i(&["eval", "--input", p(&input), "--out", p(&dir.path().join("out")), "--refs", p(&refs)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("ghost"));
}

#[test]
fn eval_writes_report_and_error_tables() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    save_mask(&discs(&[(32.0, 32.0)], 9.0), input.join("a.png")).unwrap();
    save_mask(&discs(&[(16.0, 16.0), (46.0, 46.0)], 8.0), input.join("b.png")).unwrap();
    let refs = dir.path().join("refs.csv");
    fs::write(&refs, "image,count,class\na,1,round\nb,2,round\n").unwrap();
    let out = dir.path().join("out");
    let o = b2i(&["eval", "--input", p(&input), "--out", p(&out), "--refs", p(&refs), "--jobs", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("report.json").is_file());
    let table = fs::read_to_string(out.join("pe_dymorph.csv")).unwrap();
    assert!(table.starts_with("image,class,measured,reference,pe"));
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"width": 128, "height": 128, "regime": "mixed", "n_objects": 4, "overlap": 0.2, "seed": 11}"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = b2i(&["synth", "--out", p(out), "--spec", p(&spec)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["refs.csv", "scenes.json", "masks/scene_000.png", "truth/scene_000.png"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::read_to_string(a.join("refs.csv")).unwrap().lines().nth(1).unwrap(), "scene_000,4,mixed");
}
