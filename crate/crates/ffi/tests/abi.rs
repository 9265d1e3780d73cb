use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use floquet_ffi::*;

fn last_error() -> String {
    let p = floquet_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(floquet_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn closed_forms() {
    assert_eq!(floquet_u_cosine_closed(0.0), 0.0);
    assert!((floquet_u_square_closed(0.5) + 0.0625).abs() < 1e-15);
}

#[test]
fn profile_moments_and_series() {
    unsafe {
        let mut profile = ptr::null_mut();
        assert_eq!(
            floquet_profile_new(FloquetShape::Cosine, 1.0, 0.1, &mut profile),
            FloquetStatus::Ok
        );
        let mut table = ptr::null_mut();
        assert_eq!(
            floquet_moments_compute(profile, 30, FloquetConvention::FullCycle, &mut table),
            FloquetStatus::Ok
        );
        assert_eq!(floquet_moments_p_max(table), 30);
        let mut m1 = 0.0;
        assert_eq!(floquet_moments_get(table, 1, &mut m1), FloquetStatus::Ok);
        assert!(m1 > 0.0);
        assert_eq!(
            floquet_moments_get(table, 0, &mut m1),
            FloquetStatus::OutOfRange
        );
        assert!(last_error().contains("outside"));

        let (mut value, mut tail) = (0.0, 0.0);
        assert_eq!(
            floquet_u_series(table, 0.4, 30, &mut value, &mut tail),
            FloquetStatus::Ok
        );
        assert!(
            (value - floquet_u_cosine_closed(0.4)).abs() < 1e-10,
            "{value}"
        );
        assert!(tail >= 0.0);
        assert_eq!(
            floquet_u_series(table, 0.4, 30, &mut value, ptr::null_mut()),
            FloquetStatus::Ok
        );

        floquet_moments_free(table);
        floquet_profile_free(profile);
    }
}

#[test]
fn solve_reports_roots_and_failures() {
    unsafe {
        let mut sol = ptr::null_mut();
        let st = floquet_solve_condition(
            FloquetFamily::Cosine,
            ptr::null(),
            0,
            -3.0,
            FloquetTarget::Ising,
            0.0,
            0.0,
            &mut sol,
        );
        assert_eq!(st, FloquetStatus::Ok);
        let n = floquet_solution_len(sol);
        assert!(n >= 2);
        let mut v = 0.0;
        assert_eq!(floquet_solution_preferred(sol, &mut v), FloquetStatus::Ok);
        assert!((v.abs() - 0.601_206_389_423_942_9).abs() < 1e-8, "{v}");
        assert_eq!(
            floquet_solution_root(sol, n, &mut v),
            FloquetStatus::OutOfRange
        );
        floquet_solution_free(sol);

        // s = 1 is a pole of the Ising condition.
        let st = floquet_solve_condition(
            FloquetFamily::Cosine,
            ptr::null(),
            0,
            1.0,
            FloquetTarget::Ising,
            0.0,
            0.0,
            &mut sol,
        );
        assert_eq!(st, FloquetStatus::SingularCondition);
        assert!(!last_error().is_empty());

        // Series without a table.
        let st = floquet_solve_condition(
            FloquetFamily::Series,
            ptr::null(),
            8,
            -3.0,
            FloquetTarget::Heisenberg,
            0.0,
            0.0,
            &mut sol,
        );
        assert_eq!(st, FloquetStatus::NullPointer);
    }
}

#[test]
fn unreachable_target_has_no_preferred_root() {
    unsafe {
        let mut sol = ptr::null_mut();
        // Ising at s = 1/2 needs U = -1/4, below the minimum of (J0(4v) - 1)/32.
        let st = floquet_solve_condition(
            FloquetFamily::Cosine,
            ptr::null(),
            0,
            0.5,
            FloquetTarget::Ising,
            0.0,
            0.0,
            &mut sol,
        );
        assert_eq!(st, FloquetStatus::Ok);
        assert_eq!(floquet_solution_len(sol), 0);
        let mut v = 0.0;
        assert_eq!(
            floquet_solution_preferred(sol, &mut v),
            FloquetStatus::NoSolution
        );
        assert!(last_error().contains("outside"));
        floquet_solution_free(sol);
    }
}

#[test]
fn effective_coefficients() {
    unsafe {
        let mut profile = ptr::null_mut();
        assert_eq!(
            floquet_profile_new(FloquetShape::Cosine, 0.0, 0.1, &mut profile),
            FloquetStatus::Ok
        );
        let (mut a, mut b) = (0.0, 0.0);
        let st = floquet_effective_xxz(
            3,
            1.0,
            -3.0,
            profile,
            FloquetConvention::FullCycle,
            &mut a,
            &mut b,
        );
        assert_eq!(st, FloquetStatus::Ok, "{}", last_error());
        assert!(
            (a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12,
            "{a} {b}"
        );
        floquet_profile_free(profile);
    }
}

#[test]
fn null_handles_are_rejected() {
    unsafe {
        assert_eq!(
            floquet_profile_new(FloquetShape::Square, 1.0, 0.1, ptr::null_mut()),
            FloquetStatus::NullPointer
        );
        assert!(last_error().contains("out"));
        let mut out = ptr::null_mut();
        assert_eq!(
            floquet_moments_compute(ptr::null(), 4, FloquetConvention::Subcycle, &mut out),
            FloquetStatus::NullPointer
        );
        assert_eq!(floquet_moments_p_max(ptr::null()), 0);
        assert_eq!(floquet_solution_len(ptr::null()), 0);
        floquet_profile_free(ptr::null_mut());
        floquet_moments_free(ptr::null_mut());
        floquet_solution_free(ptr::null_mut());
    }
}

#[test]
fn invalid_profile_sets_error() {
    unsafe {
        let mut profile = ptr::null_mut();
        let st = floquet_profile_new(FloquetShape::Cosine, 1.0, -1.0, &mut profile);
        assert_eq!(st, FloquetStatus::InvalidArgument);
        assert!(profile.is_null());
        assert!(!last_error().is_empty());
        // A later success clears it.
        assert_eq!(
            floquet_profile_new(FloquetShape::Cosine, 1.0, 0.1, &mut profile),
            FloquetStatus::Ok
        );
        assert!(floquet_last_error().is_null());
        floquet_profile_free(profile);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/floquet.h");
    let text = std::fs::read_to_string(header).expect("header generated by build script");
    for name in [
        "floquet_version",
        "floquet_last_error",
        "floquet_profile_new",
        "floquet_moments_compute",
        "floquet_solve_condition",
        "floquet_effective_xxz",
        "FLOQUET_STATUS_NO_SOLUTION",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"floquet.h\"\nint main(void) {\n  FloquetProfile *p = 0;\n  FloquetStatus s = floquet_profile_new(FLOQUET_SHAPE_COSINE, 1.0, 0.1, &p);\n  floquet_profile_free(p);\n  return s == FLOQUET_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output()
    {
        Ok(out) => assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        ),
        Err(_) => eprintln!("no C compiler ({cc}); skipped syntax check"),
    }
}
