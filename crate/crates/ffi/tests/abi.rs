use std::ffi::{CStr, CString};
use std::ptr;

use heralded_fock_ffi::*;

fn last_error() -> String {
    let p = hf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn fock_state_round_trips_through_json() {
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(hf_fock_state(2, 5, &mut rho), HfStatus::Ok);
        assert_eq!(hf_density_dim(rho), 5);

        let mut json = ptr::null_mut();
        assert_eq!(hf_density_to_json(rho, &mut json), HfStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(hf_density_from_json(json, &mut back), HfStatus::Ok);
        hf_string_free(json);

        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(hf_density_element(back, 2, 2, &mut re, &mut im), HfStatus::Ok);
        assert_eq!((re, im), (1.0, 0.0));
        assert_eq!(
            hf_density_element(back, 5, 0, &mut re, &mut im),
            HfStatus::InvalidArgument
        );

        hf_density_free(rho);
        hf_density_free(back);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut rho = ptr::null_mut();
        assert_eq!(hf_fock_state(7, 5, &mut rho), HfStatus::InvalidArgument);
        assert!(rho.is_null());
        assert!(last_error().contains("cutoff"));

        let mut v = 0.0;
        assert_eq!(hf_quadrature_pdf(ptr::null(), 0.0, 0.0, &mut v), HfStatus::NullPointer);
        assert_eq!(hf_cavity_enhancement(1.0, 1.0, &mut v), HfStatus::InvalidArgument);
        assert_eq!(hf_fock_wavefunction(171, 0.0, &mut v), HfStatus::InvalidArgument);
        assert_eq!(hf_fock_state(0, 2, ptr::null_mut()), HfStatus::NullPointer);

        hf_density_free(ptr::null_mut());
        hf_dataset_free(ptr::null_mut());
        hf_string_free(ptr::null_mut());
    }
}

#[test]
fn lossy_two_photon_wigner() {
    unsafe {
        let mut two = ptr::null_mut();
        hf_fock_state(2, 5, &mut two);
        let mut lossy = ptr::null_mut();
        assert_eq!(hf_apply_loss(two, 0.8, &mut lossy), HfStatus::Ok);

        let mut w0 = 0.0;
        assert_eq!(hf_wigner_point(lossy, 0.0, 0.0, &mut w0), HfStatus::Ok);
        let expected = (1.0 - 2.0 * 0.8f64).powi(2) / std::f64::consts::PI;
        assert!((w0 - expected).abs() < 1e-12);

        let (mut wmin, mut r) = (0.0, 0.0);
        assert_eq!(hf_wigner_min(lossy, &mut wmin, &mut r), HfStatus::Ok);
        assert!(wmin < 0.0 && r > 0.0);

        hf_density_free(two);
        hf_density_free(lossy);
    }
}

#[test]
fn cavity_and_rates() {
    unsafe {
        let mut e = 0.0;
        assert_eq!(hf_cavity_enhancement(0.90, 0.93, &mut e), HfStatus::Ok);
        assert!((e - 13.80).abs() < 0.01);
        let mut f = 0.0;
        assert_eq!(hf_cavity_finesse(0.99, 0.99, &mut f), HfStatus::Ok);
        assert!((f - 313.0).abs() < 0.05 * 313.0);
        let mut ri = 0.0;
        assert_eq!(hf_optimal_input_coupler(0.99, &mut ri), HfStatus::Ok);
        assert!((ri - 0.99).abs() < 1e-6);

        assert!((hf_two_photon_rate_law(5800.0, 82e6) - 0.2051).abs() < 1e-3);

        let spec = HfHeraldSpec {
            split: 0.5,
            eta_click: 1.0,
            dark: 0.0,
            pattern: HfClickPattern::Both,
        };
        let mut p = 0.0;
        assert_eq!(hf_click_probability(2, spec, &mut p), HfStatus::Ok);
        assert!((p - 0.5).abs() < 1e-15);

        let mut state = ptr::null_mut();
        let mut prob = 0.0;
        assert_eq!(hf_herald_state(0.1, spec, 6, &mut state, &mut prob), HfStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        hf_density_element(state, 2, 2, &mut re, &mut im);
        assert!(re > 0.9 && prob > 0.0);
        hf_density_free(state);

        let (mut r1, mut r2) = (0.0, 0.0);
        assert_eq!(hf_predicted_rates(82e6, 0.01, spec, &mut r1, &mut r2), HfStatus::Ok);
        assert!(r1 > 0.0 && r2 > 0.0 && r2 < r1);
    }
}

#[test]
fn sample_and_reconstruct_vacuum() {
    unsafe {
        let mut vac = ptr::null_mut();
        hf_fock_state(0, 3, &mut vac);
        let mut ds = ptr::null_mut();
        assert_eq!(
            hf_sample(vac, 1.0, HfSchedule::Stepped, 12, 3000, 7, &mut ds),
            HfStatus::Ok
        );
        assert_eq!(hf_dataset_len(ds), 3000);
        let (mut theta, mut x) = (0.0, 0.0);
        assert_eq!(hf_dataset_record(ds, 0, &mut theta, &mut x), HfStatus::Ok);
        assert_eq!(
            hf_dataset_record(ds, 3000, &mut theta, &mut x),
            HfStatus::InvalidArgument
        );

        let dir = std::env::temp_dir().join(format!("hf-ffi-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = CString::new(dir.join("ds.csv").to_str().unwrap()).unwrap();
        assert_eq!(hf_dataset_write_csv(ds, path.as_ptr()), HfStatus::Ok);
        let text = std::fs::read_to_string(dir.join("ds.csv")).unwrap();
        assert!(text.starts_with("theta,x\n"));
        std::fs::remove_dir_all(&dir).ok();

        let mut rho = ptr::null_mut();
        let mut iters = 0usize;
        let status = hf_maxlik(
            ds,
            3,
            1.0,
            HfTomoMode::Full,
            1e-9,
            2000,
            &mut rho,
            &mut iters,
            ptr::null_mut(),
        );
        assert_eq!(status, HfStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        hf_density_element(rho, 0, 0, &mut re, &mut im);
        assert!(re > 0.95, "vacuum population {re}");
        assert!(iters > 0);

        hf_density_free(rho);
        hf_dataset_free(ds);
        hf_density_free(vac);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/heralded_fock.h");
    for name in [
        "hf_last_error_message",
        "hf_fock_state",
        "hf_density_free",
        "hf_apply_loss",
        "hf_wigner_min",
        "hf_sample",
        "hf_maxlik",
        "HfDensityMatrix",
        "HF_STATUS_PANIC",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
