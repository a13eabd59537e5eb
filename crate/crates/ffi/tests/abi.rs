use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use imudeblur_ffi::*;

fn last_error() -> String {
    let p = imd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn gray_ramp(w: usize, h: usize) -> Vec<u8> {
    (0..w * h).map(|i| ((i % w) * 255 / (w - 1)) as u8).collect()
}

#[test]
fn image_round_trip_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let pixels = gray_ramp(20, 10);
    let mut img = ptr::null_mut();
    unsafe {
        assert_eq!(imd_image_from_gray8(pixels.as_ptr(), 20, 10, 20, &mut img), ImdStatus::Ok);
        assert_eq!(imd_image_width(img), 20);
        assert_eq!(imd_image_height(img), 10);
        let data = std::slice::from_raw_parts(imd_image_data(img), 200);
        assert_eq!(data[19], 1.0);

        let path = CString::new(dir.path().join("a.pgm").to_str().unwrap()).unwrap();
        assert_eq!(imd_image_save(img, path.as_ptr()), ImdStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(imd_image_load(path.as_ptr(), &mut back), ImdStatus::Ok);
        let b = std::slice::from_raw_parts(imd_image_data(back), 200);
        assert_eq!(data, b);
        imd_image_free(back);
        imd_image_free(img);
    }
}

#[test]
fn errors_become_codes_with_messages() {
    unsafe {
        let mut img = ptr::null_mut();
        assert_eq!(imd_image_from_gray8(ptr::null(), 4, 4, 4, &mut img), ImdStatus::NullPointer);
        assert!(img.is_null());
        let missing = CString::new("/nonexistent/x.pgm").unwrap();
        assert_eq!(imd_image_load(missing.as_ptr(), &mut img), ImdStatus::Io);
        assert!(last_error().contains("/nonexistent/x.pgm"));

        let mut bank = ptr::null_mut();
        assert_eq!(imd_bank_build(1, 0.01, &mut bank), ImdStatus::OutOfRange);
        assert_eq!(imd_bank_build(4, -1.0, &mut bank), ImdStatus::InvalidArgument);
        assert!(bank.is_null());

        let t = [0i64, 10, 5];
        let w = [0.0f64; 9];
        let mut traj = ptr::null_mut();
        assert_eq!(imd_trajectory_from_gyro(t.as_ptr(), w.as_ptr(), 3, &mut traj), ImdStatus::InvalidArgument);

        // Freeing null is a no-op.
        imd_image_free(ptr::null_mut());
        imd_bank_free(ptr::null_mut());
        assert_eq!(imd_image_width(ptr::null()), 0);
    }
}

#[test]
fn still_camera_pipeline_passes_image_through() {
    let pixels = gray_ramp(64, 48);
    unsafe {
        let mut img = ptr::null_mut();
        assert_eq!(imd_image_from_gray8(pixels.as_ptr(), 64, 48, 64, &mut img), ImdStatus::Ok);
        let mut cam = ptr::null_mut();
        assert_eq!(imd_camera_new(64, 48, 60.0, 10_000_000, 20_000_000, 50_000_000, &mut cam), ImdStatus::Ok);
        let t: Vec<i64> = (0..11).map(|i| i * 10_000_000).collect();
        let w = vec![0.0f64; 33];
        let mut traj = ptr::null_mut();
        assert_eq!(imd_trajectory_from_gyro(t.as_ptr(), w.as_ptr(), t.len(), &mut traj), ImdStatus::Ok);
        let mut q = [0.0f64; 4];
        assert_eq!(imd_trajectory_orientation(traj, 55_000_000, q.as_mut_ptr()), ImdStatus::Ok);
        assert_eq!(q, [1.0, 0.0, 0.0, 0.0]);

        let mut field = ptr::null_mut();
        assert_eq!(imd_field_estimate(cam, traj, 16, &mut field), ImdStatus::Ok);
        assert_eq!(imd_field_cell_count(field), 12);
        assert_eq!(imd_field_validate(field, img, 0.3, ImdGranularity::Block), ImdStatus::Ok);
        assert_eq!(imd_field_valid_count(field), 0);
        let (mut th, mut r, mut v) = (1.0, 1.0, true);
        assert_eq!(imd_field_cell(field, 0, &mut th, &mut r, &mut v), ImdStatus::Ok);
        assert_eq!((th, r, v), (0.0, 0.0, false));
        assert_eq!(imd_field_cell(field, 12, &mut th, &mut r, &mut v), ImdStatus::OutOfRange);

        let mut bank = ptr::null_mut();
        assert_eq!(imd_bank_build(3, 0.01, &mut bank), ImdStatus::Ok);
        assert_eq!(imd_bank_len(bank), 360);
        assert_eq!(imd_bank_r_max(bank), 3);
        let mut out = ptr::null_mut();
        assert_eq!(imd_deblur(img, field, bank, &mut out), ImdStatus::Ok);
        let a = std::slice::from_raw_parts(imd_image_data(img), 64 * 48);
        let b = std::slice::from_raw_parts(imd_image_data(out), 64 * 48);
        assert_eq!(a, b);

        imd_image_free(out);
        imd_bank_free(bank);
        imd_field_free(field);
        imd_trajectory_free(traj);
        imd_camera_free(cam);
        imd_image_free(img);
    }
}

#[test]
fn bank_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("b.idbk").to_str().unwrap()).unwrap();
    unsafe {
        let mut bank = ptr::null_mut();
        assert_eq!(imd_bank_build(4, 0.01, &mut bank), ImdStatus::Ok);
        assert_eq!(imd_bank_save(bank, path.as_ptr()), ImdStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(imd_bank_load(path.as_ptr(), &mut back), ImdStatus::Ok);
        assert_eq!(imd_bank_len(back), imd_bank_len(bank));
        imd_bank_free(back);

        let bytes = std::fs::read(dir.path().join("b.idbk")).unwrap();
        std::fs::write(dir.path().join("b.idbk"), &bytes[..bytes.len() / 2]).unwrap();
        assert_eq!(imd_bank_load(path.as_ptr(), &mut back), ImdStatus::Format);
        imd_bank_free(bank);
    }
}

#[test]
fn header_is_current_and_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/imudeblur.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "imd_last_error",
        "imd_image_load",
        "imd_field_estimate",
        "imd_deblur",
        "typedef struct ImdBank ImdBank;",
        "IMD_STATUS_OK = 0",
    ] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping compile check");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"imudeblur.h\"\nint main(void) { ImdBank *b = 0; ImdStatus s = imd_bank_build(2, 0.01, &b); imd_bank_free(b); return (int)s; }\n",
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}
