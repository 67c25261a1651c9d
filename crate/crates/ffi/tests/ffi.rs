use std::ffi::{CStr, CString};
use std::ptr;

use nsgate_ffi::*;

fn builtin(gate: NsgGate) -> *mut NsgCircuit {
    let mut handle = ptr::null_mut();
    assert_eq!(
        unsafe { nsg_circuit_builtin(gate, &mut handle) },
        NsgStatus::Ok
    );
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    let p = nsg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(nsg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn ideal_gate_applies_ns_with_quarter_probability() {
    for gate in [NsgGate::Klm, NsgGate::Reverse] {
        let c = builtin(gate);
        let mut count = 0;
        assert_eq!(
            unsafe { nsg_circuit_parameter_count(c, &mut count) },
            NsgStatus::Ok
        );
        assert_eq!(count, 8);

        let a = 3f64.sqrt().recip();
        let signal = [NsgComplex { re: a, im: 0.0 }; 3];
        let mut out = [NsgComplex::default(); 3];
        let mut p = 0.0;
        let devs = [0.0; 8];
        let status = unsafe {
            nsg_circuit_apply(
                c,
                devs.as_ptr(),
                8,
                signal.as_ptr(),
                out.as_mut_ptr(),
                &mut p,
            )
        };
        assert_eq!(status, NsgStatus::Ok);
        assert!((p - 0.25).abs() < 1e-12);
        // Output equals (|0> + |1> - |2>)/sqrt(3) up to a global phase.
        let overlap = out[0].re * a + out[1].re * a - out[2].re * a;
        let overlap_im = out[0].im * a + out[1].im * a - out[2].im * a;
        assert!((overlap * overlap + overlap_im * overlap_im - 1.0).abs() < 1e-12);
        unsafe { nsg_circuit_free(c) };
    }
}

#[test]
fn fidelity_is_deterministic_in_seed() {
    let c = builtin(NsgGate::Klm);
    let mut devs = [0.0; 8];
    devs[1] = 0.1;
    let mut a = NsgFidelity::default();
    let mut b = NsgFidelity::default();
    unsafe {
        assert_eq!(
            nsg_circuit_fidelity_mc(c, devs.as_ptr(), 8, 1000, 4, &mut a),
            NsgStatus::Ok
        );
        assert_eq!(
            nsg_circuit_fidelity_mc(c, devs.as_ptr(), 8, 1000, 4, &mut b),
            NsgStatus::Ok
        );
        nsg_circuit_free(c);
    }
    assert_eq!(a, b);
    assert!(a.mean < 1.0 && a.mean > 0.5);
    assert_eq!(a.n_samples + a.n_excluded, 1000);
}

#[test]
fn text_round_trip_through_handles() {
    let c = builtin(NsgGate::Reverse);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { nsg_circuit_to_text(c, &mut text) }, NsgStatus::Ok);
    let mut parsed = ptr::null_mut();
    assert_eq!(
        unsafe { nsg_circuit_parse(text, &mut parsed) },
        NsgStatus::Ok
    );
    let mut text2 = ptr::null_mut();
    assert_eq!(
        unsafe { nsg_circuit_to_text(parsed, &mut text2) },
        NsgStatus::Ok
    );
    unsafe {
        assert_eq!(CStr::from_ptr(text), CStr::from_ptr(text2));
        nsg_string_free(text);
        nsg_string_free(text2);
        nsg_circuit_free(c);
        nsg_circuit_free(parsed);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut handle = ptr::null_mut();
    let bad = CString::new("modes = 3\nelement = bs modes=1,7 param=a value=0.1\n").unwrap();
    let status = unsafe { nsg_circuit_parse(bad.as_ptr(), &mut handle) };
    assert!(
        matches!(status, NsgStatus::ParseError | NsgStatus::InvalidCircuit),
        "{status:?}"
    );
    assert!(handle.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { nsg_circuit_parse(ptr::null(), &mut handle) },
        NsgStatus::NullPointer
    );
    assert_eq!(
        unsafe { nsg_circuit_builtin(NsgGate::Klm, ptr::null_mut()) },
        NsgStatus::NullPointer
    );

    let c = builtin(NsgGate::Klm);
    let devs = [0.0; 3];
    let mut est = NsgFidelity::default();
    let status = unsafe { nsg_circuit_fidelity_mc(c, devs.as_ptr(), 3, 10, 1, &mut est) };
    assert_eq!(status, NsgStatus::InvalidArgument);
    assert!(last_error().contains("expected 8"));

    let full = [0.0; 8];
    let status = unsafe { nsg_circuit_fidelity_mc(c, full.as_ptr(), 8, 0, 1, &mut est) };
    assert_eq!(status, NsgStatus::InvalidArgument);

    let mut count = 0;
    assert_eq!(
        unsafe { nsg_circuit_parameter_count(c, &mut count) },
        NsgStatus::Ok
    );
    assert!(nsg_last_error_message().is_null());
    unsafe {
        nsg_circuit_free(c);
        nsg_circuit_free(ptr::null_mut());
        nsg_string_free(ptr::null_mut());
    }
}

#[test]
fn unheralded_input_is_reported() {
    // A circuit with no ancilla photon and a herald of one photon never fires.
    let text = CString::new(
        "name = dark\nmodes = 3\nancilla = 0,0\nherald = 1,0\nparameters = t\nelement = bs modes=1,2 param=t value=0.5\n",
    )
    .unwrap();
    let mut c = ptr::null_mut();
    let status = unsafe { nsg_circuit_parse(text.as_ptr(), &mut c) };
    assert_eq!(status, NsgStatus::Ok, "{}", last_error());
    let signal = [
        NsgComplex { re: 1.0, im: 0.0 },
        NsgComplex::default(),
        NsgComplex::default(),
    ];
    let mut out = [NsgComplex { re: 9.0, im: 9.0 }; 3];
    let mut p = -1.0;
    let devs = [0.0];
    let status = unsafe {
        nsg_circuit_apply(
            c,
            devs.as_ptr(),
            1,
            signal.as_ptr(),
            out.as_mut_ptr(),
            &mut p,
        )
    };
    assert_eq!(status, NsgStatus::NotHeralded);
    assert_eq!(p, 0.0);
    assert_eq!(out, [NsgComplex::default(); 3]);
    unsafe { nsg_circuit_free(c) };
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/nsgate.h")).unwrap();
    for name in [
        "nsg_circuit_builtin",
        "nsg_circuit_parse",
        "nsg_circuit_free",
        "nsg_circuit_to_text",
        "nsg_string_free",
        "nsg_circuit_apply",
        "nsg_circuit_fidelity_mc",
        "nsg_last_error_message",
        "NSG_STATUS_NOT_HERALDED",
        "typedef struct NsgCircuit NsgCircuit",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = std::env::temp_dir().join(format!("nsgate-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"nsgate.h\"\nint main(void) { NsgCircuit *c = 0; return nsg_circuit_builtin(NSG_GATE_KLM, &c) == NSG_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|cc| {
            std::process::Command::new(cc)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .ok_or(())
}
