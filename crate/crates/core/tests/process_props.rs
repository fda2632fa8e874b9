mod common;

use common::SplitMix;
use maxbound::bounds::lower_bound_certificate;
use maxbound::covariance::{decompose, natural_ordering};
use maxbound::process::{
    stationary_lower_bound, stride_sweep, subsample_residual_variance, window_covariance,
    ProcessSpec, WoldModel,
};
use maxbound::Error;

fn random_models(count: usize) -> Vec<WoldModel> {
    let mut rng = SplitMix(0xa11ce);
    (0..count)
        .map(|_| {
            let order = 1 + rng.below(30);
            let decay = 0.3 + 0.65 * rng.uniform();
            let psi = (1..=order)
                .map(|j| (2.0 * rng.uniform() - 1.0) * decay.powi(j as i32))
                .collect();
            WoldModel::from_psi(psi).unwrap()
        })
        .collect()
}

#[test]
fn subsample_variance_monotone_and_bounded() {
    for m in random_models(50) {
        let mut prev = 0.0;
        for k in 1..=40 {
            let v = subsample_residual_variance(&m, k).unwrap();
            assert!(v >= prev && v <= 1.0 + 1e-12, "k={k}: {v} after {prev}");
            prev = v;
        }
    }
}

#[test]
fn window_covariance_is_valid() {
    let mut rng = SplitMix(11);
    for m in random_models(20) {
        let n = 1 + rng.below(200);
        let k = 1 + rng.below(20);
        let c = window_covariance(&m, n, k).unwrap();
        assert_eq!(c.dim(), n);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(c.get(i, j), c.get(j, i));
            }
        }
    }
    let ar = WoldModel::ar1(0.95, 1e-12).unwrap();
    window_covariance(&ar, 200, 1).unwrap();
    window_covariance(&ar, 200, 20).unwrap();
}

#[test]
fn ar1_window_sequential_residuals() {
    for rho in [0.3, 0.6, 0.9] {
        let m = WoldModel::ar1(rho, 1e-14).unwrap();
        let c = window_covariance(&m, 60, 1).unwrap();
        let d = decompose(&c, &natural_ordering(60)).unwrap();
        for &v in &d.residual_vars[1..] {
            assert!((v - (1.0 - rho * rho)).abs() < 1e-8, "rho={rho}: {v}");
        }
    }
}

#[test]
fn ar1_closed_forms() {
    let m = WoldModel::ar1(0.9, 1e-6).unwrap();
    assert!((m.innovation_sd() - 0.19f64.sqrt()).abs() < 1e-12);
    assert!(m.truncation_tail() <= 1e-6);
    assert!((m.autocovariance(5) - 0.9f64.powi(5)).abs() < 2e-6);

    let m = WoldModel::ar1(0.9, 1e-14).unwrap();
    let k10 = subsample_residual_variance(&m, 10).unwrap();
    assert!((k10 - (1.0 - 0.9f64.powi(20))).abs() < 1e-12);
    let k40 = subsample_residual_variance(&m, 40).unwrap();
    assert!((k40 - 0.99978).abs() < 1e-5);
    let c = window_covariance(&m, 2, 5).unwrap();
    assert!((c.get(0, 1) - 0.59049).abs() < 1e-12);
}

#[test]
fn iid_reduces_to_plain_certificate() {
    let m = WoldModel::from_psi(vec![]).unwrap();
    let s = stationary_lower_bound(&m, 100, 1, 0.25).unwrap();
    let plain = lower_bound_certificate(100, 0.25, 1.0, 0.0).unwrap();
    assert_eq!(s.certificate, plain);
}

#[test]
fn stride_ten_at_ten_thousand() {
    let m = WoldModel::ar1(0.9, 1e-14).unwrap();
    let s = stationary_lower_bound(&m, 10_000, 10, 0.25).unwrap();
    assert_eq!(s.subsample_count, 1000);
    assert!((s.certificate.sigma - 0.878_423_345_409_431_3f64.sqrt()).abs() < 1e-9);
    assert!((s.certificate.tau - 0.121_576_654_590_568_7f64.sqrt()).abs() < 1e-9);
}

#[test]
fn stride_sweep_has_interior_argmax() {
    let m = WoldModel::ar1(0.9, 1e-12).unwrap();
    let sweep = stride_sweep(&m, 10_000, 1..=50, 0.25).unwrap();
    assert_eq!(sweep.best_stride, Some(18));
    let best = sweep.best_threshold.unwrap();
    assert!((best - 2.665_212_430_692_905).abs() < 1e-9, "{best}");
    // unimodal: increasing up to the argmax, decreasing after
    let t: Vec<f64> = sweep.points.iter().map(|p| p.threshold.unwrap()).collect();
    for w in t[..18].windows(2) {
        assert!(w[1] > w[0]);
    }
    for w in t[17..].windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn gate_reports_largest_usable_stride() {
    let m = WoldModel::ar1(0.9, 1e-12).unwrap();
    match stationary_lower_bound(&m, 1_000, 20, 0.25) {
        Err(Error::Validity(msg)) => assert!(msg.contains("largest usable k is 14"), "{msg}"),
        other => panic!("expected gate failure, got {other:?}"),
    }
    match stationary_lower_bound(&m, 50, 1, 0.25) {
        Err(Error::Validity(msg)) => assert!(msg.contains("no stride is usable"), "{msg}"),
        other => panic!("expected gate failure, got {other:?}"),
    }
}

#[test]
fn spec_file_parsing() {
    let spec: ProcessSpec = "# ar model\nkind = ar1\nrho = 0.5\ntail_tol = 1e-8\n"
        .parse()
        .unwrap();
    let m = spec.build().unwrap();
    assert!((m.innovation_var() - 0.75).abs() < 1e-12);
    let spec: ProcessSpec = "kind = psi-list\npsi = 0.5, 0.25 0.125\n".parse().unwrap();
    assert_eq!(spec.build().unwrap().psi().len(), 3);
    assert!("kind = arma\n".parse::<ProcessSpec>().is_err());
    assert!("kind = ar1\nrho = 1.0\n"
        .parse::<ProcessSpec>()
        .and_then(|s| s.build())
        .is_err());
}
