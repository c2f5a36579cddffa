use std::ffi::CStr;
use std::ptr;

use c3ma_ffi::*;

fn solve_cov(cov: &[f64], p: usize, kappa: f64) -> (C3maStatus, *mut C3maApproximation) {
    let mut h = ptr::null_mut();
    let status = unsafe { c3ma_solve_covariance(cov.as_ptr(), p, kappa, C3maAlgorithm::FuSpt as i32, &mut h) };
    (status, h)
}

fn last_error() -> String {
    let msg = c3ma_last_error_message();
    assert!(!msg.is_null());
    unsafe { CStr::from_ptr(msg) }.to_string_lossy().into_owned()
}

#[test]
fn covariance_fixture() {
    let cov = [
        4.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ];
    let (status, h) = solve_cov(&cov, 4, 3.0);
    assert_eq!(status, C3maStatus::Ok);
    unsafe {
        assert_eq!(c3ma_approximation_dim(h), 4);
        assert!((c3ma_approximation_mu(h) - 13.0 / 12.0).abs() < 1e-15);
        assert!((c3ma_approximation_nu(h) - 13.0 / 4.0).abs() < 1e-15);
        assert_eq!((c3ma_approximation_alpha(h), c3ma_approximation_beta(h)), (1, 2));
        assert_eq!(c3ma_approximation_rank(h), 1);
        assert!(!c3ma_approximation_is_feasible_input(h));
        assert!((c3ma_approximation_kappa_achieved(h) - 3.0).abs() < 1e-12);

        let mut eig = [0.0; 4];
        assert_eq!(c3ma_approximation_eigenvalues(h, eig.as_mut_ptr(), 4), C3maStatus::Ok);
        assert!((eig[0] - 13.0 / 4.0).abs() < 1e-15 && (eig[3] - 13.0 / 12.0).abs() < 1e-15);

        let mut dense = [0.0; 16];
        assert_eq!(c3ma_approximation_dense(h, dense.as_mut_ptr(), 16), C3maStatus::Ok);
        assert!((dense[0] - 13.0 / 4.0).abs() < 1e-14);
        assert!((dense[5] - 13.0 / 12.0).abs() < 1e-14);
        assert!(dense[1].abs() < 1e-15);

        let (mut u, mut d) = ([0.0; 4], [0.0; 1]);
        assert_eq!(c3ma_approximation_vectors(h, u.as_mut_ptr(), 4), C3maStatus::Ok);
        assert_eq!(c3ma_approximation_deltas(h, d.as_mut_ptr(), 1), C3maStatus::Ok);
        assert!((u[0].abs() - 1.0).abs() < 1e-15);
        assert!((d[0] - (13.0 / 4.0 - 13.0 / 12.0)).abs() < 1e-14);

        assert_eq!(
            c3ma_approximation_dense(h, dense.as_mut_ptr(), 15),
            C3maStatus::BufferTooSmall
        );
        assert!(last_error().contains("need 16"));
        c3ma_approximation_free(h);
    }
}

#[test]
fn data_pipelines_agree() {
    let (p, n) = (6, 3);
    let data: Vec<f64> = (0..p * n).map(|k| ((k * 7 + 3) % 11) as f64 - 5.0).collect();
    let mut dense = Vec::new();
    for alg in [C3maAlgorithm::FuSpt, C3maAlgorithm::GrSvd, C3maAlgorithm::ModSvd] {
        let mut h = ptr::null_mut();
        let status = unsafe { c3ma_solve_data(data.as_ptr(), p, n, 50.0, alg as i32, false, &mut h) };
        assert_eq!(status, C3maStatus::Ok);
        let mut buf = vec![0.0; p * p];
        assert_eq!(
            unsafe { c3ma_approximation_dense(h, buf.as_mut_ptr(), buf.len()) },
            C3maStatus::Ok
        );
        unsafe { c3ma_approximation_free(h) };
        dense.push(buf);
    }
    for other in &dense[1..] {
        let diff: f64 = other
            .iter()
            .zip(&dense[0])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = dense[0].iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(diff <= 1e-10 * norm);
    }
}

#[test]
fn error_statuses() {
    let zero = [0.0; 4];
    let (status, h) = solve_cov(&zero, 2, 3.0);
    assert_eq!(status, C3maStatus::InfeasibleZeroMatrix);
    assert!(h.is_null());

    let eye = [1.0, 0.0, 0.0, 1.0];
    assert_eq!(solve_cov(&eye, 2, 0.5).0, C3maStatus::InvalidKappa);
    assert_eq!(solve_cov(&[1.0, 2.0, 0.0, 1.0], 2, 3.0).0, C3maStatus::InvalidArgument);

    let mut h = ptr::null_mut();
    let status = unsafe { c3ma_solve_covariance(eye.as_ptr(), 2, 3.0, C3maAlgorithm::GrSvd as i32, &mut h) };
    assert_eq!(status, C3maStatus::InvalidArgument);
    let status = unsafe { c3ma_solve_covariance(eye.as_ptr(), 2, 3.0, 42, &mut h) };
    assert_eq!(status, C3maStatus::InvalidArgument);
    assert!(last_error().contains("42"));
    let status = unsafe { c3ma_solve_covariance(ptr::null(), 2, 3.0, 0, &mut h) };
    assert_eq!(status, C3maStatus::NullPointer);

    let wide = [1.0, 2.0, 3.0, 4.0, 5.0, 7.0];
    let status = unsafe { c3ma_solve_data(wide.as_ptr(), 2, 3, 3.0, C3maAlgorithm::ModSvd as i32, false, &mut h) };
    assert_eq!(status, C3maStatus::InvalidArgument);
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        assert_eq!(c3ma_approximation_dim(ptr::null()), 0);
        assert!(c3ma_approximation_mu(ptr::null()).is_nan());
        let mut x = [0.0];
        assert_eq!(
            c3ma_approximation_eigenvalues(ptr::null(), x.as_mut_ptr(), 1),
            C3maStatus::NullPointer
        );
        c3ma_approximation_free(ptr::null_mut());
    }
}

#[test]
fn feasible_input_is_returned_unchanged() {
    let cov = [2.0, 0.0, 0.0, 1.0];
    let (status, h) = solve_cov(&cov, 2, 5.0);
    assert_eq!(status, C3maStatus::Ok);
    unsafe {
        assert!(c3ma_approximation_is_feasible_input(h));
        assert_eq!((c3ma_approximation_alpha(h), c3ma_approximation_beta(h)), (0, 3));
        assert_eq!(c3ma_approximation_objective(h), 0.0);
        c3ma_approximation_free(h);
    }
}

#[test]
fn header_lists_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/c3ma.h")).unwrap();
    for name in [
        "c3ma_solve_data",
        "c3ma_solve_covariance",
        "c3ma_approximation_free",
        "c3ma_approximation_dense",
        "c3ma_last_error_message",
        "C3MA_STATUS_INFEASIBLE_ZERO_MATRIX",
        "typedef struct C3maApproximation C3maApproximation",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
