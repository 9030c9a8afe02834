use std::ffi::{CStr, CString};
use std::ptr;

use supertransfer_ffi::*;

fn last_error() -> String {
    let p = st_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const HOPPING: &str = r#"{
    "group_a": {"sites": 2, "frequency": 1.0},
    "group_b": {"sites": 3, "frequency": 1.0},
    "inter_coupling": 0.1
}"#;

#[test]
fn system_and_operator_round_trip() {
    let json = CString::new(HOPPING).unwrap();
    let mut sys = ptr::null_mut();
    unsafe {
        assert_eq!(st_system_from_json(json.as_ptr(), &mut sys), StStatus::Ok);
        let mut dim = 0;
        assert_eq!(st_system_dim(sys, &mut dim), StStatus::Ok);
        assert_eq!(dim, 32);
        let mut op = ptr::null_mut();
        assert_eq!(st_system_hamiltonian(sys, &mut op), StStatus::Ok);
        let (mut d, mut nnz) = (0, 0);
        assert_eq!(st_operator_dim(op, &mut d), StStatus::Ok);
        assert_eq!(st_operator_nnz(op, &mut nnz), StStatus::Ok);
        assert_eq!(d, 32);
        assert!(nnz > 0);
        let mut text = ptr::null_mut();
        assert_eq!(st_operator_to_json(op, &mut text), StStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(text).to_str().unwrap()).unwrap();
        assert_eq!(v["dim"], 32);
        assert_eq!(v["triplets"].as_array().unwrap().len(), nnz);
        st_string_free(text);
        st_operator_free(op);
        st_system_free(sys);
    }
}

#[test]
fn errors_set_status_and_message() {
    st_clear_error();
    assert!(st_last_error_message().is_null());
    let bad = CString::new(r#"{"group_a": {"sites": 2, "frequency": 1.0}, "bogus": 1}"#).unwrap();
    let mut sys = ptr::null_mut();
    unsafe {
        let s = st_system_from_json(bad.as_ptr(), &mut sys);
        assert!(matches!(s, StStatus::Json | StStatus::Config), "{s:?}");
        assert!(sys.is_null());
        assert!(last_error().contains("bogus"));
        assert_eq!(st_system_from_json(ptr::null(), &mut sys), StStatus::NullPointer);
        assert!(last_error().contains("json"));
        let mut x = 0.0;
        assert_eq!(st_emission_amplitude(3, 4, 0.1, 0, &mut x), StStatus::Domain);
        assert_eq!(st_emission_amplitude(3, 1, 0.1, 0, ptr::null_mut()), StStatus::NullPointer);
        // Freeing null is a no-op.
        st_system_free(ptr::null_mut());
        st_operator_free(ptr::null_mut());
        st_string_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_thread_local() {
    unsafe {
        let mut x = 0.0;
        assert_eq!(st_emission_amplitude(1, 2, 0.1, 0, &mut x), StStatus::Domain);
    }
    std::thread::spawn(|| assert!(st_last_error_message().is_null())).join().unwrap();
    assert!(!st_last_error_message().is_null());
}

#[test]
fn closed_forms() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(st_emission_amplitude(4, 1, 0.5, 0, &mut x), StStatus::Ok);
        assert!((x - 1.0).abs() < 1e-15);
        assert_eq!(st_supertransfer_rate(1, 3, 0, 4, 0.5, &mut x), StStatus::Ok);
        assert!((x - 3.0).abs() < 1e-15);
        assert_eq!(st_supertransfer_forward(2, 3, 1, 4, 1.0, &mut x), StStatus::Ok);
        assert_eq!(x, (2 * 2 * 2 * 3) as f64);
        assert_eq!(st_effective_step_length(5.0, 0.2, 20.0, &mut x), StStatus::Ok);
        assert!((x - 20.0).abs() < 1e-12);
        assert_eq!(st_required_step_length(300.0, 0.2, 1000.0, &mut x), StStatus::Ok);
        assert!((x - 300.0 / 200f64.sqrt()).abs() < 1e-12);
    }
    let v = unsafe { CStr::from_ptr(st_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn walk_through_the_abi_matches_the_library() {
    let mut cfg = StDiffusionConfig {
        alpha: 0.0,
        gamma: 0.0,
        tau: 0.0,
        lifetime: 0.0,
        fixed_lifetime: 0,
        lattice_dim: 0,
        complex_diameter: 0.0,
        target_l: 0.0,
        walkers: 0,
        rng_seed: 0,
    };
    let mut a = StDiffusionResult::default();
    let mut b = StDiffusionResult::default();
    unsafe {
        assert_eq!(st_diffusion_default_config(&mut cfg), StStatus::Ok);
        cfg.walkers = 3000;
        cfg.rng_seed = 9;
        assert_eq!(st_simulate_walk(&cfg, &mut a), StStatus::Ok);
        assert_eq!(st_simulate_walk(&cfg, &mut b), StStatus::Ok);
    }
    assert_eq!(a.rms_displacement_units.to_bits(), b.rms_displacement_units.to_bits());
    let lib = supertransfer::diffusion::simulate_walk(&supertransfer::diffusion::DiffusionConfig {
        walkers: 3000,
        rng_seed: 9,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(a.rms_displacement_units, lib.rms_displacement_units);
    assert_eq!(a.walkers, 3000);
    assert_eq!(a.condition_met, u8::from(lib.condition_met));

    cfg.walkers = 1;
    unsafe { assert_eq!(st_simulate_walk(&cfg, &mut a), StStatus::Ok) };
    assert!(a.rms_standard_error.is_nan());
    cfg.lattice_dim = 3;
    unsafe { assert_eq!(st_simulate_walk(&cfg, &mut a), StStatus::Domain) };
}
