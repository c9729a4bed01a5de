use bcmod_ffi::*;
use std::ffi::CStr;
use std::ptr;

const I: BcmodComplex = BcmodComplex { re: 0.0, im: 1.0 };

fn c(re: f64, im: f64) -> BcmodComplex {
    BcmodComplex { re, im }
}

fn last_error() -> String {
    let p = bcmod_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn lame_pipeline_through_handles() {
    unsafe {
        let mut g2 = c(0.0, 0.0);
        let mut g3 = c(0.0, 0.0);
        assert_eq!(bcmod_lattice_invariants(I, &mut g2, &mut g3), BcmodStatus::Ok);
        assert!(g3.re.abs() < 1e-9 && g2.re > 189.0 && g2.re < 189.1);

        let mut lame = ptr::null_mut();
        assert_eq!(bcmod_lame_new(I, c(2.0, 0.0), c(0.5, 0.0), &mut lame), BcmodStatus::Ok);
        let prin = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let mut q = ptr::null_mut();
        assert_eq!(bcmod_commutant_build(lame, prin.as_ptr(), 4, 3, 0, &mut q), BcmodStatus::Ok);
        let (mut order, mut residual) = (0usize, 1.0f64);
        assert_eq!(bcmod_commutant_info(q, &mut order, &mut residual), BcmodStatus::Ok);
        assert_eq!(order, 3);
        assert!(residual < 1e-10);

        let mut curve = ptr::null_mut();
        assert_eq!(bcmod_curve_compute(lame, q, &mut curve), BcmodStatus::Ok);
        let mut f10 = c(0.0, 0.0);
        assert_eq!(bcmod_curve_coeff(curve, 1, 0, &mut f10), BcmodStatus::Ok);
        assert!((f10.re - g2.re / 4.0).abs() < 1e-8 * g2.re);
        let (mut varpi, mut degenerate) = (0i64, 1i32);
        assert_eq!(bcmod_curve_genus(curve, &mut varpi, &mut degenerate), BcmodStatus::Ok);
        assert_eq!((varpi, degenerate), (1, 0));

        // F vanishes on (X, Y) = (e, 0) for a root e of 4X^3 - g2 X - g3
        let e = (g2.re / 4.0).sqrt();
        let mut v = c(1.0, 1.0);
        assert_eq!(bcmod_curve_eval(curve, c(e, 0.0), c(0.0, 0.0), &mut v), BcmodStatus::Ok);
        assert!(v.re.hypot(v.im) < 1e-8 * g2.re.powf(1.5));

        bcmod_curve_free(curve);
        bcmod_commutant_free(q);
        bcmod_lame_free(lame);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut lame = ptr::null_mut();
        assert_eq!(bcmod_lame_new(c(0.0, -1.0), c(2.0, 0.0), c(0.5, 0.0), &mut lame), BcmodStatus::InvalidArgument);
        assert!(lame.is_null());
        assert!(last_error().contains("upper half-plane"));
        assert_eq!(bcmod_lattice_invariants(I, ptr::null_mut(), ptr::null_mut()), BcmodStatus::NullPointer);

        assert_eq!(bcmod_lame_new(I, c(2.0, 0.0), c(0.5, 0.0), &mut lame), BcmodStatus::Ok);
        let mut q = ptr::null_mut();
        assert_eq!(bcmod_commutant_build(lame, [c(1.0, 0.0)].as_ptr(), 0, 0, 0, &mut q), BcmodStatus::InvalidArgument);
        let mut m = [c(0.0, 0.0); 2];
        let square = [c(0.5, 0.0), c(0.6, 0.0), c(0.6, 0.1), c(0.5, 0.0)];
        assert_eq!(bcmod_monodromy(lame, c(2.0, 0.0), square.as_ptr(), 4, m.as_mut_ptr(), 2), BcmodStatus::InvalidArgument);
        bcmod_lame_free(lame);
        bcmod_lame_free(ptr::null_mut());
    }
}

#[test]
fn monodromy_of_a_contractible_loop_is_trivial() {
    unsafe {
        let mut lame = ptr::null_mut();
        assert_eq!(bcmod_lame_new(I, c(2.0, 0.0), c(0.5, 0.0), &mut lame), BcmodStatus::Ok);
        let square = [c(0.5, 0.0), c(0.6, 0.0), c(0.6, 0.1), c(0.5, 0.1), c(0.5, 0.0)];
        let mut m = [c(9.0, 9.0); 4];
        assert_eq!(bcmod_monodromy(lame, c(2.0, 0.0), square.as_ptr(), 5, m.as_mut_ptr(), 4), BcmodStatus::Ok);
        for (k, e) in m.iter().enumerate() {
            let want = if k == 0 || k == 3 { 1.0 } else { 0.0 };
            assert!((e.re - want).abs() < 1e-7 && e.im.abs() < 1e-7, "{k}: {e:?}");
        }
        bcmod_lame_free(lame);
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = format!("{dir}/include/bcmod.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["bcmod_lame_new", "bcmod_commutant_build", "bcmod_curve_genus", "bcmod_monodromy", "bcmod_last_error"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping compile check");
        return;
    };
    assert!(cc.status.success());
    let src = std::env::temp_dir().join("bcmod_header_check.c");
    std::fs::write(&src, "#include \"bcmod.h\"\nint main(void) { BcmodComplex z = {0.0, 1.0}; (void)z; return BCMOD_STATUS_OK; }\n").unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
