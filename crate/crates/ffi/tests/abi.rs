use std::ffi::{CStr, CString};
use std::ptr;

use npiv_ffi::*;

fn last_error() -> String {
    let p = npiv_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn sample_arrays(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    // Z = W on a regular grid, Y = 0.5 + 0.1 f_2(Z)
    let z: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let y = z
        .iter()
        .map(|&x| 0.5 + 0.1 * std::f64::consts::SQRT_2 * (std::f64::consts::PI * x).cos())
        .collect();
    (y, z.clone(), z)
}

#[test]
fn fit_round_trip() {
    let (y, z, w) = sample_arrays(2000);
    let mut sample = ptr::null_mut();
    let st = unsafe { npiv_sample_new(y.as_ptr(), z.as_ptr(), w.as_ptr(), y.len(), &mut sample) };
    assert_eq!(st, NpivStatus::Ok);
    assert!(npiv_last_error_message().is_null());
    assert_eq!(unsafe { npiv_sample_len(sample) }, 2000);

    let mut fit = ptr::null_mut();
    let penalty = npiv_penalty_default();
    assert_eq!(penalty.kappa, 144.0);
    assert_eq!(unsafe { npiv_fit(sample, NpivBasis::Cosine, &penalty, &mut fit) }, NpivStatus::Ok);
    let m_hat = unsafe { npiv_fit_m_hat(fit) };
    assert!(m_hat >= 1 && m_hat <= unsafe { npiv_fit_m_cap(fit) });

    let mut len = 0;
    assert_eq!(unsafe { npiv_fit_theta(fit, ptr::null_mut(), 0, &mut len) }, NpivStatus::Ok);
    assert_eq!(len, m_hat);
    let mut theta = vec![0.0; len];
    assert_eq!(unsafe { npiv_fit_theta(fit, theta.as_mut_ptr(), len, &mut len) }, NpivStatus::Ok);
    assert!((theta[0] - 0.5).abs() < 1e-3, "{theta:?}");

    let mut value = 0.0;
    assert_eq!(unsafe { npiv_fit_eval(fit, 0.3, &mut value) }, NpivStatus::Ok);
    let expected: f64 = theta
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let mut f = 0.0;
            unsafe { npiv_basis_eval(NpivBasis::Cosine, j + 1, 0.3, &mut f) };
            c * f
        })
        .sum();
    assert!((value - expected).abs() < 1e-14);
    assert_eq!(unsafe { npiv_fit_eval(fit, 1.5, &mut value) }, NpivStatus::Domain);

    unsafe {
        npiv_fit_free(fit);
        npiv_sample_free(sample);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut sample = ptr::null_mut();
    let y = [1.0, 2.0];
    let z = [0.2, 1.7];
    let st = unsafe { npiv_sample_new(y.as_ptr(), z.as_ptr(), z.as_ptr(), 2, &mut sample) };
    assert_eq!(st, NpivStatus::Sample);
    assert!(sample.is_null());
    assert!(!last_error().is_empty());

    let st = unsafe { npiv_sample_new(ptr::null(), z.as_ptr(), z.as_ptr(), 2, &mut sample) };
    assert_eq!(st, NpivStatus::NullPointer);
    assert!(last_error().contains('y'));

    let mut out = 0.0;
    assert_eq!(unsafe { npiv_basis_eval(NpivBasis::Cosine, 0, 0.5, &mut out) }, NpivStatus::Domain);
    assert_eq!(unsafe { npiv_basis_eval(NpivBasis::Trigonometric, 1, 0.5, &mut out) }, NpivStatus::Ok);
    assert_eq!(out, 1.0);
    assert!(npiv_last_error_message().is_null());

    let missing = CString::new("/nonexistent/data.csv").unwrap();
    let st = unsafe { npiv_sample_read_csv(missing.as_ptr(), &mut sample) };
    assert_eq!(st, NpivStatus::Io);
    assert!(last_error().contains("/nonexistent/data.csv"));

    let mut fit = ptr::null_mut();
    let st = unsafe { npiv_fit(ptr::null(), NpivBasis::Cosine, ptr::null(), &mut fit) };
    assert_eq!(st, NpivStatus::NullPointer);

    // null handles are accepted by queries and destructors
    unsafe {
        assert_eq!(npiv_sample_len(ptr::null()), 0);
        assert_eq!(npiv_fit_m_hat(ptr::null()), 0);
        npiv_sample_free(ptr::null_mut());
        npiv_fit_free(ptr::null_mut());
        npiv_experiment_free(ptr::null_mut());
    }
}

#[test]
fn alpha_and_version() {
    assert!((npiv_alpha_n(100) - 1.555989).abs() < 1e-6);
    let v = unsafe { CStr::from_ptr(npiv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn experiment_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "seed = 3\nreplications = 2\nn_grid = [100, 200]\nparallel = false\n\n[design]\ncase = \"PP\"\np = 2.0\na = 1.0\nJ = 4\nr = 1.0\nsigma_eps = 0.5\nc_endo = 0.3\n",
    )
    .unwrap();
    let path = CString::new(cfg.to_str().unwrap()).unwrap();
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { npiv_experiment_run(path.as_ptr(), &mut exp) }, NpivStatus::Ok);
    assert_eq!(unsafe { npiv_experiment_len(exp) }, 4);
    let mut rec = NpivRecord::default();
    assert_eq!(unsafe { npiv_experiment_record(exp, 3, &mut rec) }, NpivStatus::Ok);
    assert_eq!((rec.n, rec.rep), (200, 1));
    assert!(rec.m_hat >= 1 && rec.m_hat <= rec.m_cap);
    assert_eq!(unsafe { npiv_experiment_record(exp, 4, &mut rec) }, NpivStatus::InvalidArgument);
    unsafe { npiv_experiment_free(exp) };

    std::fs::write(&cfg, "seed = 3\nreplications = 0\n").unwrap();
    assert_eq!(unsafe { npiv_experiment_run(path.as_ptr(), &mut exp) }, NpivStatus::Config);
    assert!(exp.is_null());
}
