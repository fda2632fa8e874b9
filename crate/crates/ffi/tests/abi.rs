use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use maxbound_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        mb_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn scalars_and_status_codes() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(mb_std_normal_cdf(0.0, &mut out), MbStatus::Ok);
        assert_eq!(out, 0.5);
        assert_eq!(mb_std_normal_log_tail(40.0, &mut out), MbStatus::Ok);
        assert!((out + 804.608_442_013_754_3).abs() < 1e-9);
        assert_eq!(mb_tail_v(2.0, &mut out), MbStatus::Ok);
        assert!((out - 5.728_492).abs() < 1e-6);
        assert_eq!(mb_invert_v_upper(0.5, &mut out), MbStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(
            mb_std_normal_quantile(0.5, ptr::null_mut()),
            MbStatus::NullPointer
        );
        assert_eq!(last_error(), "out is null");
        assert_eq!(mb_std_normal_cdf(1.0, &mut out), MbStatus::Ok);
        assert_eq!(last_error(), "");
    }
}

#[test]
fn certificates_and_brackets() {
    let mut cert = MbCertificate {
        n: 0,
        alpha: 0.0,
        l_alpha: 0.0,
        sigma: 0.0,
        tau: 0.0,
        threshold: 0.0,
        guaranteed_tail: 0.0,
    };
    unsafe {
        assert_eq!(
            mb_lower_bound_certificate(100, 0.25, 1.0, 0.0, &mut cert),
            MbStatus::Ok
        );
        assert!((cert.threshold - 2.194_134_558_732_562).abs() < 1e-12);
        assert_eq!(
            mb_lower_bound_certificate(69, 0.25, 1.0, 1.0, &mut cert),
            MbStatus::Validity
        );
        assert!(last_error().contains("smallest valid n at alpha=0.25 is 70"));
        assert_eq!(
            mb_headline_bound(100, 1.0, 0.5, &mut cert),
            MbStatus::Domain
        );
    }
    let mut b = MbBracket {
        coupling_value: 0.0,
        msq_lower: 0.0,
        msq_upper: 0.0,
        regime_ok: false,
    };
    unsafe {
        let g = 0.366_512_920_581_664_3; // Gumbel median
        assert_eq!(mb_independent_msq_bracket(100, g, &mut b), MbStatus::Ok);
        assert!(b.msq_lower < 6.0616 && 6.0616 < b.msq_upper && b.regime_ok);
        assert_eq!(mb_dependent_msq_bracket(100, 0.0, &mut b), MbStatus::Ok);
        assert!(b.msq_lower.is_nan());
        assert!((b.msq_upper - 5.645_686_236_641_245).abs() < 1e-12);
        assert_eq!(mb_independent_msq_bracket(0, 0.0, &mut b), MbStatus::Domain);
    }
}

#[test]
fn covariance_handle_lifecycle() {
    let rows = [2.0, 0.5, 0.0, 0.5, 1.0, 0.25, 0.0, 0.25, 1.5];
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(mb_covariance_new(rows.as_ptr(), 3, &mut c), MbStatus::Ok);
        assert_eq!(mb_covariance_dim(c), 3);
        let (mut s, mut t) = (0.0, 0.0);
        let order = [2usize, 0, 1];
        assert_eq!(
            mb_covariance_sigma_tau(c, order.as_ptr(), 3, &mut s, &mut t),
            MbStatus::Ok
        );
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(
            mb_covariance_eigen_bounds(c, &mut lo, &mut hi),
            MbStatus::Ok
        );
        assert!(lo <= s * s + 1e-12 && t * t <= hi + 1e-12);
        let bad = [0usize, 0, 1];
        assert_eq!(
            mb_covariance_sigma_tau(c, bad.as_ptr(), 3, &mut s, &mut t),
            MbStatus::Domain
        );
        mb_covariance_free(c);
        mb_covariance_free(ptr::null_mut());
        assert_eq!(mb_covariance_dim(ptr::null()), 0);

        let singular = [1.0, 1.0, 1.0, 1.0];
        let mut d = ptr::null_mut();
        assert_eq!(
            mb_covariance_new(singular.as_ptr(), 2, &mut d),
            MbStatus::NotPositiveDefinite
        );
        assert!(d.is_null());
        assert_eq!(
            mb_covariance_new(ptr::null(), 2, &mut d),
            MbStatus::NullPointer
        );
    }
}

#[test]
fn process_handle() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(mb_wold_ar1(0.9, 1e-14, &mut m), MbStatus::Ok);
        let mut cert = std::mem::zeroed::<MbCertificate>();
        let mut count = 0u64;
        assert_eq!(
            mb_stationary_lower_bound(m, 10_000, 10, 0.25, &mut cert, &mut count),
            MbStatus::Ok
        );
        assert_eq!(count, 1000);
        assert!((cert.sigma * cert.sigma - (1.0 - 0.9f64.powi(20))).abs() < 1e-12);
        assert_eq!(
            mb_stationary_lower_bound(m, 1_000, 20, 0.25, &mut cert, ptr::null_mut()),
            MbStatus::Validity
        );
        mb_wold_free(m);

        let psi = [0.5, 0.25];
        assert_eq!(mb_wold_from_psi(psi.as_ptr(), 2, &mut m), MbStatus::Ok);
        mb_wold_free(m);
        assert_eq!(mb_wold_from_psi(ptr::null(), 0, &mut m), MbStatus::Ok);
        mb_wold_free(m);
        assert_eq!(mb_wold_ar1(1.0, 1e-10, &mut m), MbStatus::Domain);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles `tests/c/smoke.c` against the generated header and the static
/// library. Skipped when no C compiler or static archive is available.
#[test]
fn c_smoke_program() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let archive = profile_dir.join("libmaxbound_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!(
            "skipping C smoke test: no archive at {} or no cc",
            archive.display()
        );
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&archive)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
