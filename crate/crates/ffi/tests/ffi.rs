use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
use std::ptr;

use qmdisc_ffi::*;

// mpmath, 40 digits
const ENT_PI6_03: f64 = 0.685_410_196_624_968_5;
const PIT_09: f64 = 0.758_287_970_135_288_4;

fn last_error() -> String {
    let n = qmd_last_error_length();
    let mut buf = vec![0 as std::ffi::c_char; n + 1];
    let full = unsafe { qmd_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(full, n);
    unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn closed_forms() {
    let mut p = QmdStrategyPoint::default();
    assert_eq!(unsafe { qmd_entangled_success(FRAC_PI_6, 0.3, &mut p) }, QmdStatus::Ok);
    assert!((p.p_success - ENT_PI6_03).abs() < 1e-12);
    assert!((p.p_success + p.p_error + p.p_inconclusive - 1.0).abs() < 1e-12);

    assert_eq!(unsafe { qmd_helstrom(FRAC_PI_4, &mut p) }, QmdStatus::Ok);
    assert!((p.p_success - 1.0).abs() < 1e-12);

    let mut x = 0.0;
    assert_eq!(unsafe { qmd_tangent_pit(0.9, &mut x) }, QmdStatus::Ok);
    assert!((x - PIT_09).abs() < 1e-12);
    assert_eq!(unsafe { qmd_advantage(FRAC_PI_6, 0.0, &mut x) }, QmdStatus::Ok);
    assert!(x.abs() < 1e-12);
    assert_eq!(unsafe { qmd_second_derivative(0.5, 0.3, &mut x) }, QmdStatus::Ok);
    assert!(x > 0.0);
}

#[test]
fn errors_are_reported() {
    let mut p = QmdStrategyPoint { p_success: -7.0, ..Default::default() };
    assert_eq!(unsafe { qmd_entangled_success(FRAC_PI_6, 0.9, &mut p) }, QmdStatus::Domain);
    assert_eq!(p.p_success, -7.0, "out untouched on failure");
    assert!(last_error().contains("domain"));

    assert_eq!(unsafe { qmd_entangled_success(FRAC_PI_6, 0.1, ptr::null_mut()) }, QmdStatus::NullPointer);
    assert_eq!(last_error(), "out is null");

    // truncation keeps a terminating nul
    let mut small = [1 as std::ffi::c_char; 4];
    let n = unsafe { qmd_last_error_message(small.as_mut_ptr(), small.len()) };
    assert_eq!(n, "out is null".len());
    assert_eq!(small[3], 0);
}

#[test]
fn experiment_handle() {
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { qmd_experiment_new(FRAC_PI_6, 0.6, 200_000, 5, &mut exp) }, QmdStatus::Ok);
    assert!(!exp.is_null());

    let mut counts = QmdCounts::default();
    assert_eq!(unsafe { qmd_experiment_run(exp, &mut counts) }, QmdStatus::Ok);
    assert_eq!(counts.cells.iter().sum::<u64>(), 200_000);
    let mut again = QmdCounts::default();
    unsafe { qmd_experiment_run(exp, &mut again) };
    assert_eq!(counts, again);

    let mut est = QmdEstimate::default();
    assert_eq!(unsafe { qmd_experiment_estimate(exp, &mut est) }, QmdStatus::Ok);
    assert!((est.point.p_success - ENT_PI6_03).abs() < 4.0 * est.sigma_success);
    assert!((est.point.p_inconclusive - 0.3).abs() < 4.0 * est.sigma_inconclusive);

    let mut imp = QmdImperfections { singlet_visibility: 2.0, ..unsafe { ideal() } };
    assert_eq!(unsafe { qmd_experiment_set_imperfections(exp, &imp) }, QmdStatus::Config);
    assert_eq!(unsafe { qmd_imperfections_paperlike(&mut imp) }, QmdStatus::Ok);
    assert_eq!(unsafe { qmd_experiment_set_imperfections(exp, &imp) }, QmdStatus::Ok);
    assert_eq!(unsafe { qmd_experiment_set_feed_forward(exp, false) }, QmdStatus::Ok);
    assert_eq!(unsafe { qmd_experiment_estimate(exp, &mut est) }, QmdStatus::Ok);
    assert!(est.point.p_error > 0.05, "{est:?}");

    unsafe { qmd_experiment_free(exp) };
    unsafe { qmd_experiment_free(ptr::null_mut()) };
}

unsafe fn ideal() -> QmdImperfections {
    let mut imp = QmdImperfections {
        phase_noise_sigma_rad: f64::NAN,
        eta_d0: 0.0,
        eta_d1: 0.0,
        eta_da: 0.0,
        eta_db: 0.0,
        eta_di: 0.0,
        singlet_visibility: 0.0,
        splitter_imbalance: 0.0,
    };
    assert_eq!(qmd_imperfections_ideal(&mut imp), QmdStatus::Ok);
    imp
}

#[test]
fn experiment_rejects_bad_config() {
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { qmd_experiment_new(FRAC_PI_6, 1.5, 10, 0, &mut exp) }, QmdStatus::Domain);
    assert!(exp.is_null());
    assert_eq!(unsafe { qmd_experiment_run(ptr::null(), ptr::null_mut()) }, QmdStatus::NullPointer);
}

#[test]
fn curve_handle() {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { qmd_curve_new(FRAC_PI_6, 0.0, 1.0, 0.1, &mut t) }, QmdStatus::Ok);
    let mut len = 0;
    assert_eq!(unsafe { qmd_curve_len(t, &mut len) }, QmdStatus::Ok);
    assert_eq!(len, 6, "grid clipped at cos 2θ = 0.5");
    let mut row = QmdCurveRow::default();
    assert_eq!(unsafe { qmd_curve_row(t, 3, &mut row) }, QmdStatus::Ok);
    assert!((row.p_inc - 0.3).abs() < 1e-12);
    assert!((row.ps_entangled - ENT_PI6_03).abs() < 1e-12);
    assert!(row.advantage > 0.0);
    assert_eq!(unsafe { qmd_curve_row(t, 6, &mut row) }, QmdStatus::Domain);
    unsafe { qmd_curve_free(t) };
}

#[test]
fn oracle_matches_closed_form() {
    let mut p = QmdStrategyPoint::default();
    assert_eq!(unsafe { qmd_oracle_optimize(FRAC_PI_6, 0.3, 1e-4, 0, 20, &mut p) }, QmdStatus::Ok);
    assert!((p.p_success - ENT_PI6_03).abs() < 1e-4);
    assert_eq!(unsafe { qmd_oracle_optimize(FRAC_PI_6, 0.3, 1e-4, 0, 3, &mut p) }, QmdStatus::Domain);
}

#[test]
fn version_string() {
    let v = unsafe { std::ffi::CStr::from_ptr(qmd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = format!("{dir}/include/qmdisc.h");
    let src = std::env::temp_dir().join(format!("qmdisc_header_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"qmdisc.h\"\n\
         int main(void) { QmdStrategyPoint p; return qmd_entangled_success(0.5, 0.1, &p) == QMD_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let Ok(status) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler; skipping syntax check of {header}");
        return;
    };
    std::fs::remove_file(&src).ok();
    assert!(status.success(), "{header} does not compile");
}
