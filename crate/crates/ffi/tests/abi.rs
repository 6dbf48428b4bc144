use std::ffi::{CStr, CString};
use std::ptr;

use m3d_noc_ffi::*;

fn last_error() -> String {
    let p = m3d_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn mesh(x: u32, y: u32, z: u32) -> *mut M3dDesign {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { m3d_design_mesh(x, y, z, 1.0, &mut d) }, M3dStatus::Ok);
    d
}

fn params(alpha: f64, beta: f64, gamma: f64) -> *mut M3dParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { m3d_params_new(alpha, beta, gamma, &mut p) }, M3dStatus::Ok);
    p
}

#[test]
fn mesh_counts() {
    let d = mesh(4, 4, 4);
    unsafe {
        assert_eq!(m3d_design_num_routers(d), 64);
        assert_eq!(m3d_design_num_links(d), 144);
        assert_eq!(m3d_design_validate(d), M3dStatus::Ok);
        m3d_design_free(d);
    }
}

#[test]
fn evaluate_zero_and_uniform() {
    let d = mesh(2, 2, 1);
    let p = params(0.0, 0.0, 0.0);
    let mut t = ptr::null_mut();
    unsafe {
        assert_eq!(m3d_traffic_new(4, &mut t), M3dStatus::Ok);
        let mut r = M3dEval::default();
        assert_eq!(m3d_evaluate(d, t, p, &mut r), M3dStatus::Ok);
        assert_eq!(r.edp, 0.0);

        assert_eq!(m3d_traffic_set(t, 0, 3, 1.0), M3dStatus::Ok);
        assert_eq!(m3d_evaluate(d, t, p, &mut r), M3dStatus::Ok);
        assert!(r.latency_ps > 0.0 && r.energy_pj > 0.0);
        assert!((r.edp - r.latency_ps * r.energy_pj).abs() <= 1e-9 * r.edp);

        m3d_traffic_free(t);
        m3d_params_free(p);
        m3d_design_free(d);
    }
}

#[test]
fn optimize_beats_baseline() {
    let d = mesh(2, 2, 1);
    let p = params(0.2, 0.3, 0.2);
    let mut t = ptr::null_mut();
    unsafe {
        assert_eq!(m3d_traffic_distance_decay(2, 2, 1, 2.0, &mut t), M3dStatus::Ok);
        let mut base = M3dEval::default();
        assert_eq!(m3d_evaluate(d, t, p, &mut base), M3dStatus::Ok);

        let mut po = ptr::null_mut();
        let mut po_eval = M3dEval::default();
        assert_eq!(
            m3d_optimize(d, t, p, M3dMode::ProcessOblivious, 7, &mut po, &mut po_eval),
            M3dStatus::Ok
        );
        let mut pa = ptr::null_mut();
        let mut pa_eval = M3dEval::default();
        assert_eq!(m3d_optimize(d, t, p, M3dMode::ProcessAware, 7, &mut pa, &mut pa_eval), M3dStatus::Ok);
        assert!(po_eval.edp <= base.edp * (1.0 + 1e-12));
        assert!(pa_eval.edp <= po_eval.edp * (1.0 + 1e-12));

        let mut check = M3dEval::default();
        assert_eq!(m3d_evaluate(pa, t, p, &mut check), M3dStatus::Ok);
        assert_eq!(check, pa_eval);

        let mut counts = [0usize; 3];
        let mut top = 0usize;
        assert_eq!(m3d_design_tier_counts(pa, counts.as_mut_ptr(), &mut top), M3dStatus::Ok);
        assert_eq!(counts.iter().sum::<usize>(), 4 * 3);

        m3d_design_free(pa);
        m3d_design_free(po);
        m3d_traffic_free(t);
        m3d_params_free(p);
        m3d_design_free(d);
    }
}

#[test]
fn save_and_load_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("d").to_str().unwrap()).unwrap();
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(m3d_design_smallworld(4, 4, 1, 1.0, 3, &mut d), M3dStatus::Ok);
        assert_eq!(m3d_design_save(d, path.as_ptr()), M3dStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(m3d_design_load(path.as_ptr(), &mut back), M3dStatus::Ok);
        assert_eq!(m3d_design_num_links(back), m3d_design_num_links(d));
        assert_eq!(m3d_design_num_routers(back), 16);
        m3d_design_free(back);
        m3d_design_free(d);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(m3d_params_new(1.5, 0.0, 0.0, &mut p), M3dStatus::Validation);
        assert!(p.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(m3d_params_new(0.0, 0.0, 0.0, ptr::null_mut()), M3dStatus::NullArgument);
        assert!(last_error().contains("out"));

        let mut r = M3dEval::default();
        assert_eq!(m3d_evaluate(ptr::null(), ptr::null(), ptr::null(), &mut r), M3dStatus::NullArgument);

        let mut t = ptr::null_mut();
        assert_eq!(m3d_traffic_new(4, &mut t), M3dStatus::Ok);
        assert_eq!(m3d_traffic_set(t, 9, 0, 1.0), M3dStatus::Validation);
        assert_eq!(m3d_traffic_set(t, 0, 1, -1.0), M3dStatus::Validation);
        m3d_traffic_free(t);

        let missing = CString::new("/nonexistent/m3d/design").unwrap();
        let mut d = ptr::null_mut();
        assert_ne!(m3d_design_load(missing.as_ptr(), &mut d), M3dStatus::Ok);

        let bad = CString::new("{\"alpha\": \"x\"}").unwrap();
        assert_eq!(m3d_params_from_json(bad.as_ptr(), &mut p), M3dStatus::Validation);
        let good = CString::new("{\"alpha\": 0.1, \"beta\": 0.2}").unwrap();
        assert_eq!(m3d_params_from_json(good.as_ptr(), &mut p), M3dStatus::Ok);
        m3d_params_free(p);

        m3d_design_free(ptr::null_mut());
        m3d_traffic_free(ptr::null_mut());
        m3d_params_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(m3d_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
