use std::ffi::{CStr, CString};
use std::ptr;

use scatter_trace_ffi::*;

fn last_error() -> String {
    let p = st_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[test]
fn delta_matches_closed_form() {
    let g = 2.0;
    let ks = logspace(0.05, 50.0, 40);
    unsafe {
        let mut pot = ptr::null_mut();
        assert_eq!(st_potential_delta(g, &mut pot), StStatus::Ok);
        let mut data = ptr::null_mut();
        assert_eq!(st_scatter1d_solve(pot, ks.as_ptr(), ks.len(), 1e-10, &mut data), StStatus::Ok);
        assert_eq!(st_scatter1d_len(data), ks.len());
        for (i, &k) in ks.iter().enumerate() {
            let mut p = StScatterPoint::default();
            assert_eq!(st_scatter1d_get(data, i, &mut p), StStatus::Ok);
            // T = 1 / (1 + i g / 2k)
            let a = g / (2.0 * k);
            let d = 1.0 + a * a;
            assert!((p.t_re - 1.0 / d).abs() < 1e-10);
            assert!((p.t_im + a / d).abs() < 1e-10);
            assert!((p.r_re + a * a / d).abs() < 1e-10);
        }
        let mut p = StScatterPoint::default();
        assert_eq!(st_scatter1d_get(data, ks.len(), &mut p), StStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
        st_scatter1d_free(data);
        st_potential_free(pot);
    }
}

#[test]
fn json_potential_and_trace() {
    let json = CString::new(r#"{"kind": "gaussian", "height": 1.0, "width": 0.5}"#).unwrap();
    let phi = CString::new(r#"{"kind": "gaussian_bump", "center": 1.0, "width": 0.5}"#).unwrap();
    let ks = logspace(0.01, 40.0, 200);
    unsafe {
        let mut pot = ptr::null_mut();
        assert_eq!(st_potential_from_json(json.as_ptr(), &mut pot), StStatus::Ok);
        let mut v = 0.0;
        assert_eq!(st_potential_value(pot, 0.0, 1.0, &mut v), StStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        let mut data = ptr::null_mut();
        assert_eq!(st_scatter1d_solve(pot, ks.as_ptr(), ks.len(), 1e-9, &mut data), StStatus::Ok);
        let mut t = StTrace::default();
        assert_eq!(st_trace1d(data, phi.as_ptr(), &mut t), StStatus::Ok);
        assert!(t.value.is_finite());
        // non-dispersive Casimir energy is rejected as numerical
        assert_eq!(st_casimir1d(data, &mut t), StStatus::Numerical);
        assert!(!last_error().is_empty());
        st_scatter1d_free(data);
        st_potential_free(pot);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut pot = ptr::null_mut();
        let bad = CString::new(r#"{"kind": "nope"}"#).unwrap();
        assert_eq!(st_potential_from_json(bad.as_ptr(), &mut pot), StStatus::Config);
        assert!(pot.is_null());
        assert!(last_error().contains("potential"));
        assert_eq!(st_potential_from_json(ptr::null(), &mut pot), StStatus::NullPointer);
        assert_eq!(st_potential_gaussian(1.0, -1.0, &mut pot), StStatus::Numerical);

        assert_eq!(st_potential_delta(1.0, &mut pot), StStatus::Ok);
        assert!(st_last_error_message().is_null());
        let ks = [2.0, 1.0];
        let mut data = ptr::null_mut();
        assert_eq!(st_scatter1d_solve(pot, ks.as_ptr(), 2, 1e-8, &mut data), StStatus::Config);
        let mut sp = ptr::null_mut();
        let ks = [1.0, 2.0];
        assert_eq!(st_phase_shifts(pot, ks.as_ptr(), 2, 1e-8, &mut sp), StStatus::Numerical);
        st_potential_free(pot);
        st_potential_free(ptr::null_mut());
        assert_eq!(st_scatter1d_len(ptr::null()), 0);
    }
}

#[test]
fn phase_shifts_and_casimir3d() {
    let json = CString::new(
        r#"{"kind": "gaussian", "height": 0.05, "width": 1.0,
            "dispersion": {"kind": "lorentzian_cutoff", "k_c": 1.0, "p": 3}}"#,
    )
    .unwrap();
    let ks = logspace(0.01, 10.0, 60);
    unsafe {
        let mut pot = ptr::null_mut();
        let st = st_potential_from_json(json.as_ptr(), &mut pot);
        assert_eq!(st, StStatus::Ok, "{}", last_error());
        let mut sp = ptr::null_mut();
        assert_eq!(st_phase_shifts(pot, ks.as_ptr(), ks.len(), 1e-9, &mut sp), StStatus::Ok);
        assert_eq!(st_spectra_len(sp), ks.len());
        let mut s = StSpectrumSummary::default();
        assert_eq!(st_spectra_get(sp, 10, &mut s), StStatus::Ok);
        assert!(s.re_log_det1 >= 0.0 && s.sigma_bar > 0.0);
        let mut len = 0;
        assert_eq!(
            st_spectra_phase_shifts(sp, 10, ptr::null_mut(), 0, &mut len),
            StStatus::InvalidArgument
        );
        assert_eq!(len, s.channels);
        let mut eta = vec![0.0; len];
        assert_eq!(st_spectra_phase_shifts(sp, 10, eta.as_mut_ptr(), len, &mut len), StStatus::Ok);
        let hs: f64 = eta
            .iter()
            .enumerate()
            .map(|(l, e)| 4.0 * (2 * l + 1) as f64 * e.sin().powi(2))
            .sum();
        assert!((hs - s.hs_norm_squared).abs() <= 1e-12 * hs.max(1.0));

        let mut c = StCasimir3D::default();
        let st = st_casimir3d(pot, sp, &mut c);
        assert_eq!(st, StStatus::Ok, "{}", last_error());
        assert!(c.total > 0.0 && c.weak_coupling_flag);
        assert!((c.total - c.anomaly_term - c.cross_section_term - c.det1_term).abs() < 1e-12);
        st_spectra_free(sp);
        st_potential_free(pot);
    }
}

#[test]
fn header_declares_every_export() {
    let h = include_str!("../include/scatter_trace.h");
    let src = include_str!("../src/lib.rs");
    let names: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|r| r.split('(').next().unwrap())
        .collect();
    assert!(names.len() > 10);
    for n in names {
        assert!(h.contains(&format!("{n}(")), "{n} missing from header");
    }
}
