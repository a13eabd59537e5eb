use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use imudeblur::blurfield::{load_camera, BlurField, CameraRig};
use imudeblur::eval::{save_homography, save_keypoints, toy_detect, Homography, Keypoint};
use imudeblur::imaging::{dead_leaves, load_image, psnr, save_image};
use imudeblur::imu::{save_trace, GyroSample};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imudeblur"))
        .args(args)
        .env_remove("IMUDEBLUR_BANK_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(out.status.success(), "{args:?} failed: {err}");
    assert!(out.stdout.is_empty(), "data must go to files, got stdout {:?}", String::from_utf8_lossy(&out.stdout));
    err
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn write_camera(path: &str, rig: &CameraRig) {
    imudeblur::blurfield::save_camera(rig, path).unwrap();
}

fn constant_trace(path: &str, omega: [f64; 3], until_ns: i64) {
    let samples: Vec<_> = (0..=until_ns / 10_000_000)
        .map(|i| GyroSample::new(i * 10_000_000, omega[0], omega[1], omega[2]))
        .collect();
    save_trace(path, &samples).unwrap();
}

fn read_field(path: &str, rig: &CameraRig, block: usize) -> BlurField {
    BlurField::read_csv(std::fs::File::open(path).unwrap(), rig.width, rig.height, block, block).unwrap()
}

#[test]
fn still_camera_leaves_image_byte_identical() {
    let dir = TempDir::new().unwrap();
    save_image(&dead_leaves(160, 120, 1), p(&dir, "in.pgm")).unwrap();
    let rig = CameraRig::new(160, 120, 150.0, 20_000_000, 10_000_000, 50_000_000).unwrap();
    write_camera(&p(&dir, "cam.json"), &rig);
    constant_trace(&p(&dir, "gyro.csv"), [0.0; 3], 200_000_000);
    let err = ok(&[
        "deblur", "--input", &p(&dir, "in.pgm"), "--output", &p(&dir, "out.pgm"), "--camera", &p(&dir, "cam.json"),
        "--trace", &p(&dir, "gyro.csv"), "--block", "32",
    ]);
    assert!(err.contains("cells_valid=0"), "{err}");
    assert_eq!(std::fs::read(p(&dir, "in.pgm")).unwrap(), std::fs::read(p(&dir, "out.pgm")).unwrap());
}

#[test]
fn synth_then_deblur_recovers_blur_and_improves_psnr() {
    let dir = TempDir::new().unwrap();
    let sharp = dead_leaves(256, 192, 3);
    save_image(&sharp, p(&dir, "sharp.pgm")).unwrap();
    ok(&[
        "synth", "--input", &p(&dir, "sharp.pgm"), "--output", &p(&dir, "blur.pgm"), "--trace-out", &p(&dir, "gyro.csv"),
        "--camera-out", &p(&dir, "cam.json"), "--theta", "30", "--r", "13", "--seed", "5",
    ]);
    let rig = load_camera(p(&dir, "cam.json")).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let out = p(&dir, &format!("deblur{threads}.pgm"));
        ok(&[
            "--threads", threads, "deblur", "--input", &p(&dir, "blur.pgm"), "--output", &out, "--camera",
            &p(&dir, "cam.json"), "--trace", &p(&dir, "gyro.csv"), "--field-out", &p(&dir, "field.csv"), "--validate=off",
        ]);
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "thread count changed the output");

    let field = read_field(&p(&dir, "field.csv"), &rig, 64);
    let centre = field.cells()[field.cell_index_at(rig.cx, rig.cy)].blur;
    assert!((centre.theta_deg - 30.0).abs() <= 1.0 && (centre.extent_px - 13.0).abs() <= 1.0, "{centre:?}");

    let blurred = load_image(p(&dir, "blur.pgm")).unwrap();
    let restored = load_image(p(&dir, "deblur1.pgm")).unwrap();
    let before = psnr(&sharp, &blurred).unwrap();
    let after = psnr(&sharp, &restored).unwrap();
    assert!(after > before, "{after} <= {before}");
}

#[test]
fn validation_protects_a_sharp_frame() {
    let dir = TempDir::new().unwrap();
    let sharp = dead_leaves(256, 192, 11);
    save_image(&sharp, p(&dir, "sharp.pgm")).unwrap();
    let rig = CameraRig::new(256, 192, 256.0, 20_000_000, 30_000_000, 50_000_000).unwrap();
    write_camera(&p(&dir, "cam.json"), &rig);
    // Fabricated motion: the gyro claims ~10 px of blur the frame does not have.
    constant_trace(&p(&dir, "gyro.csv"), [0.2, 1.2, 0.0], 200_000_000);
    let mut scores = Vec::new();
    for mode in ["--validate=off", "--validate=block"] {
        let out = p(&dir, "out.pgm");
        ok(&[
            "deblur", "--input", &p(&dir, "sharp.pgm"), "--output", &out, "--camera", &p(&dir, "cam.json"), "--trace",
            &p(&dir, "gyro.csv"), mode,
        ]);
        scores.push(psnr(&sharp, &load_image(&out).unwrap()).unwrap());
    }
    let (off, block) = (scores[0], scores[1]);
    assert!(off < 30.0, "deblurring a sharp frame should hurt, got {off} dB");
    assert!(block > 40.0 && block > off + 10.0, "validation should preserve the frame: {block} vs {off}");
}

#[test]
fn bank_command_reports_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let err = ok(&["bank", "--r-max", "2", "--output", &p(&dir, "a.idbk")]);
    assert!(err.contains("kernels=180"), "{err}");
    ok(&["bank", "--r-max", "2", "--output", &p(&dir, "b.idbk")]);
    let a = std::fs::read(p(&dir, "a.idbk")).unwrap();
    assert_eq!(a, std::fs::read(p(&dir, "b.idbk")).unwrap());

    // A truncated bank fails with a format error, not a crash.
    std::fs::write(p(&dir, "cut.idbk"), &a[..a.len() - 7]).unwrap();
    save_image(&dead_leaves(64, 64, 2), p(&dir, "in.pgm")).unwrap();
    let rig = CameraRig::new(64, 64, 64.0, 10_000_000, 20_000_000, 50_000_000).unwrap();
    write_camera(&p(&dir, "cam.json"), &rig);
    constant_trace(&p(&dir, "gyro.csv"), [0.0, 2.0, 0.0], 200_000_000);
    let out = run(&[
        "deblur", "--input", &p(&dir, "in.pgm"), "--output", &p(&dir, "out.pgm"), "--camera", &p(&dir, "cam.json"),
        "--trace", &p(&dir, "gyro.csv"), "--validate=off", "--bank", &p(&dir, "cut.idbk"),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.lines().any(|l| l.starts_with("error: kind=bank_format msg=")), "{err}");
    assert!(!Path::new(&p(&dir, "out.pgm")).exists());
}

#[test]
fn bank_cache_directory_is_used() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    save_image(&dead_leaves(64, 64, 2), p(&dir, "in.pgm")).unwrap();
    let rig = CameraRig::new(64, 64, 64.0, 10_000_000, 20_000_000, 50_000_000).unwrap();
    write_camera(&p(&dir, "cam.json"), &rig);
    constant_trace(&p(&dir, "gyro.csv"), [0.0, 2.0, 0.0], 200_000_000);
    let status = Command::new(env!("CARGO_BIN_EXE_imudeblur"))
        .args([
            "deblur", "--input", &p(&dir, "in.pgm"), "--output", &p(&dir, "out.pgm"), "--camera", &p(&dir, "cam.json"),
            "--trace", &p(&dir, "gyro.csv"), "--validate=off",
        ])
        .env("IMUDEBLUR_BANK_DIR", &cache)
        .status()
        .unwrap();
    assert!(status.success());
    let cached: Vec<PathBuf> = std::fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(cached.len(), 1);
    assert!(cached[0].extension().is_some_and(|e| e == "idbk"));
}

#[test]
fn eval_identical_and_batch_reports() {
    let dir = TempDir::new().unwrap();
    let kps = toy_detect(&dead_leaves(200, 200, 6), 300);
    assert!(kps.len() > 50);
    save_keypoints(p(&dir, "a.csv"), &kps).unwrap();
    save_homography(p(&dir, "h.txt"), &Homography::identity()).unwrap();
    let err = ok(&[
        "eval", "--a", &p(&dir, "a.csv"), "--b", &p(&dir, "a.csv"), "--homography", &p(&dir, "h.txt"), "--report",
        &p(&dir, "one.csv"),
    ]);
    assert!(err.contains("fewer than --count"), "expected a count warning: {err}");
    let text = std::fs::read_to_string(p(&dir, "one.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "pair,rep,loc_err,matches,count");
    assert_eq!(lines[1], format!("a,1.000000,0.000000,{0},{0}", kps.len()));

    let mut args: Vec<String> = vec!["eval".into(), "--count".into(), "100".into()];
    for i in 0..10 {
        let shifted: Vec<Keypoint> = kps.iter().map(|k| Keypoint { x: k.x + i as f64 * 0.1, ..*k }).collect();
        let b = p(&dir, &format!("b{i}.csv"));
        save_keypoints(&b, &shifted).unwrap();
        args.extend(["--a".into(), p(&dir, "a.csv"), "--b".into(), b, "--homography".into(), p(&dir, "h.txt")]);
        args.extend(["--label".into(), format!("pair{i}")]);
    }
    args.extend(["--report".into(), p(&dir, "ten.csv")]);
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let text = std::fs::read_to_string(p(&dir, "ten.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[1].starts_with("pair0,1.000000,0.000000,100,100"));
    assert!(lines[11].starts_with("avg,1.000000,0.450000,100,100"), "{}", lines[11]);
}

#[test]
fn field_preview_for_still_and_rolling_camera() {
    let dir = TempDir::new().unwrap();
    let rig = CameraRig::new(320, 240, 300.0, 20_000_000, 20_000_000, 50_000_000).unwrap();
    write_camera(&p(&dir, "cam.json"), &rig);
    constant_trace(&p(&dir, "still.csv"), [0.0; 3], 200_000_000);
    ok(&[
        "field", "--camera", &p(&dir, "cam.json"), "--trace", &p(&dir, "still.csv"), "--block", "40", "--output",
        &p(&dir, "f.csv"), "--preview", &p(&dir, "f.pgm"),
    ]);
    let preview = load_image(p(&dir, "f.pgm")).unwrap();
    assert_eq!(preview.dims(), (320, 240));
    assert_eq!(preview.data().iter().filter(|v| **v > 0.0).count(), 8 * 6);

    // Rotation about the optical axis: tangential blur growing with radius.
    constant_trace(&p(&dir, "roll.csv"), [0.0, 0.0, 1.5], 200_000_000);
    ok(&[
        "field", "--camera", &p(&dir, "cam.json"), "--trace", &p(&dir, "roll.csv"), "--block", "40", "--output",
        &p(&dir, "r.csv"),
    ]);
    let field = read_field(&p(&dir, "r.csv"), &rig, 40);
    let mut by_radius = Vec::new();
    for row in 0..field.grid_rows() {
        for col in 0..field.grid_cols() {
            let c = field.block_center(col, row);
            let (dx, dy) = (c.x - rig.cx, c.y - rig.cy);
            let b = field.cell(col, row).blur;
            let radial = dy.atan2(dx).to_degrees().rem_euclid(180.0);
            let off = (b.theta_deg - radial).rem_euclid(180.0);
            assert!((off - 90.0).abs() < 3.0, "cell ({col},{row}) not tangential: {b:?} radial {radial}");
            by_radius.push((dx.hypot(dy), b.extent_px));
        }
    }
    by_radius.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in by_radius.windows(2) {
        if w[1].0 > w[0].0 + 1.0 {
            assert!(w[1].1 > w[0].1, "{w:?}");
        }
    }
}

#[test]
fn rectify_writes_keypoints() {
    let dir = TempDir::new().unwrap();
    let rig = CameraRig::new(320, 240, 300.0, 30_000_000, 10_000_000, 50_000_000).unwrap();
    write_camera(&p(&dir, "cam.json"), &rig);
    constant_trace(&p(&dir, "gyro.csv"), [0.0, 0.5, 0.0], 200_000_000);
    let kps = vec![Keypoint::new(100.0, 0.0, 3.0, 1.0), Keypoint::new(200.0, 200.0, 3.0, 0.5)];
    save_keypoints(p(&dir, "k.csv"), &kps).unwrap();
    ok(&[
        "rectify", "--keypoints", &p(&dir, "k.csv"), "--output", &p(&dir, "r.csv"), "--camera", &p(&dir, "cam.json"),
        "--trace", &p(&dir, "gyro.csv"),
    ]);
    let out = imudeblur::eval::load_keypoints(p(&dir, "r.csv")).unwrap();
    assert_eq!(out.len(), 2);
    assert!((out[0].x - 100.0).abs() < 1e-9 && out[0].y.abs() < 1e-9);
    assert!((out[1].x - 200.0).abs() > 0.5);
    assert_eq!(out[1].scale, 3.0);
}

#[test]
fn failures_print_one_error_line() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "deblur", "--input", &p(&dir, "missing.pgm"), "--output", &p(&dir, "o.pgm"), "--camera", &p(&dir, "c.json"),
        "--trace", &p(&dir, "t.csv"),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: kind=io msg="), "{err}");
    assert_eq!(err.lines().count(), 1);

    let out = run(&["bank", "--r-max", "1", "--output", &p(&dir, "b.idbk")]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: kind=extent_out_of_range"));
    assert!(run(&["deblur", "--help"]).status.success());
}
