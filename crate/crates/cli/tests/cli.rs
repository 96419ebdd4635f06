use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vesselmip(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vesselmip"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = vesselmip(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn stage_by_stage_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "--seed", "2", "--size", "16", "--out", "ph"]);
    for f in ["ph.vol", "ph.json", "ph_gt.vol", "ph_gt.json", "ph_centerline.json", "ph_meta.json"] {
        assert!(d.join(f).exists(), "{f}");
    }
    ok(d, &["project", "--input", "ph", "--axis", "x", "--out", "px"]);
    assert!(d.join("px_mip.png").exists() && d.join("px_z_bw.raw").exists());
    assert_eq!(fs::metadata(d.join("px_z_fw.raw")).unwrap().len(), 16 * 16 * 4);

    ok(d, &["annotate", "--gt", "ph_gt", "--axis", "x", "--out", "ax"]);
    ok(d, &["depthmap", "--input", "ph", "--annotation", "ax", "--tau", "0.05", "--out", "dx"]);
    assert!(d.join("dx.vol").exists());

    ok(
        d,
        &["fit", "--input", "ph", "--cond", "fixed1:x", "--steps", "20", "--lr", "0.1", "--sigma", "0", "--out", "pred"],
    );
    let trace = fs::read_to_string(d.join("pred_loss.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "step,total,term_2d,term_depth");
    assert_eq!(trace.lines().count(), 21);

    for _ in 0..2 {
        ok(d, &["eval", "--pred", "pred", "--gt", "ph_gt", "--centerline", "ph_centerline.json", "--out", "r.json", "--csv", "rows.csv"]);
    }
    let rows = fs::read_to_string(d.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert!(report["dice"].as_f64().unwrap() >= 0.0);
}

#[test]
fn full_supervision_fit_recovers_gt() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "--seed", "0", "--size", "16", "--out", "ph"]);
    ok(d, &["fit", "--input", "ph", "--cond", "3d", "--steps", "300", "--out", "pred"]);
    let out = ok(d, &["eval", "--pred", "pred", "--gt", "ph_gt", "--out", "r.json"]);
    assert!(out.starts_with("dice 1.0000"), "{out}");
}

#[test]
fn bench_writes_report_and_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = serde_json::json!({
        "suite_size": 2,
        "phantom": {
            "dims": [16, 16, 16],
            "branch_count": [2, 3],
            "radius_range": [1.5, 2.0],
            "length_range": [0.45, 0.8],
            "vessel_intensity": 0.9,
            "noise_amplitude": 0.35,
            "occluder_count": 0,
            "occluder_radius": [2.0, 4.0],
            "curvature": 0.15,
            "root_axis": null
        },
        "conditions": ["rand1", "rand1+d"],
        "fit": { "steps": 30 },
        "master_seed": 4,
        "render_samples": [5]
    });
    fs::write(d.join("cfg.json"), cfg.to_string()).unwrap();
    ok(d, &["bench", "--config", "cfg.json", "--out", "out"]);
    let csv = fs::read_to_string(d.join("out/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("4,rand1,true,"));
    assert!(d.join("out/aggregate.json").exists());
    assert!(d.join("out/renders/phantom_5/mip_z.png").exists());

    // phantoms that cannot fit the volume fail their cells
    let mut bad = cfg.clone();
    bad["phantom"]["dims"] = serde_json::json!([3, 3, 3]);
    bad["phantom"]["radius_range"] = serde_json::json!([1.0, 1.0]);
    fs::write(d.join("bad.json"), bad.to_string()).unwrap();
    let out = vesselmip(d, &["bench", "--config", "bad.json", "--out", "bad"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_inputs_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("cfg.json"), "{ not json").unwrap();
    let out = vesselmip(d, &["bench", "--config", "cfg.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    let out = vesselmip(d, &["project", "--input", "missing", "--axis", "z", "--out", "p"]);
    assert!(!out.status.success());
    let out = vesselmip(d, &["fit", "--input", "x", "--cond", "fixed9", "--out", "p"]);
    assert!(!out.status.success());
}
