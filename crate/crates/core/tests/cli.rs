use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::process::{Command, Output};

use npwigner::kernel::{import_kernel, KernelModel};
use npwigner::periodics::{f2, sawtooth, unit_eval, UnitFunction};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npwigner")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Numeric rows of a `rows`-format output, skipping the header block and the column line.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn kernel_s1_support() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s1.txt");
    let o = run(&["kernel", "--variant", "s1", "--nmax", "8", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[-1, 0]"));
    let imp = import_kernel(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for n in 0..=8i64 {
        for k in 0..=8 {
            for l in 0..=8 {
                let Ok(z) = imp.kernel.element(k, l, n, 0.4) else { continue };
                if z.norm() > 0.0 {
                    assert!(k + l == 2 * n || k + l == 2 * n - 1);
                }
            }
        }
    }
}

#[test]
fn kernel_w2_hermitian() {
    let o = run(&["kernel", "--variant", "w2", "--nmin", "-8", "--nmax", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let imp = import_kernel(&stdout(&o)).unwrap();
    let w = imp.kernel.window();
    for kk in w.iter() {
        for ll in w.iter() {
            let d = imp.kernel.base_get(kk, ll).unwrap() - imp.kernel.base_get(ll, kk).unwrap().conj();
            assert!(d.norm() <= 1e-12);
        }
    }
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["kernel", "--variant", "w9"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let o = run(&["wigner", "--variant", "s1", "--state", "wave:3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("number:"));
    let o =
        Command::new(env!("CARGO_BIN_EXE_npwigner")).args(["tabulate", "--nodes", "3"]).env("NPWIGNER_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wigner_number_state() {
    let o = run(&["wigner", "--variant", "s1", "--state", "number:3", "--nmax", "8", "--theta-nodes", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 9 * 8);
    for row in r {
        let expected = if row[0] == 3.0 { 1.0 / TAU } else { 0.0 };
        assert!((row[2] - expected).abs() <= 1e-12);
    }
}

#[test]
fn wigner_superposition_rows() {
    let o = run(&["wigner", "--variant", "s1", "--state", "super:0,1", "--nmax", "4", "--theta-nodes", "16"]);
    assert_eq!(o.status.code(), Some(0));
    for row in rows(&stdout(&o)) {
        let (n, t, v) = (row[0], row[1], row[2]);
        let expected = match n as i64 {
            0 => 1.0 / (2.0 * TAU),
            1 => (1.0 + 2.0 * t.cos()) / (2.0 * TAU),
            _ => 0.0,
        };
        assert!((v - expected).abs() <= 1e-14, "n={n} t={t}");
    }
}

#[test]
fn wigner_json_output() {
    let o = run(&["wigner", "--variant", "w2", "--state", "number:0", "--nmax", "3", "--theta-nodes", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_object());
}

#[test]
fn verify_exit_codes() {
    let o = run(&["verify", "--variant", "w1", "--nmax", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let fails: Vec<&str> = text.lines().filter(|l| l.contains("FAIL")).collect();
    assert!(!fails.is_empty());
    assert!(fails.iter().all(|l| l.contains(" v ")
        || l.contains(" vi ")
        || l.contains("reflection")
        || l.contains("time-reversal")
        || l.contains("evenness")));
    assert_eq!(run(&["verify", "--variant", "w2", "--nmax", "16"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--variant", "w2", "--nmax", "16", "--tol", "1e-30"]).status.code(), Some(1));
}

#[test]
fn verify_imported_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.txt");
    let p = path.to_str().unwrap();
    assert_eq!(run(&["kernel", "--variant", "w3", "--nmax", "16", "-o", p]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--import", p]).status.code(), Some(0));
}

#[test]
fn repr_number_operator() {
    let o = run(&["repr", "--op", "N", "--variant", "w2", "--nmax", "12", "--theta-nodes", "8"]);
    assert_eq!(o.status.code(), Some(0));
    for row in rows(&stdout(&o)).into_iter().filter(|r| r[0].abs() <= 6.0) {
        assert!((row[2] - row[0]).abs() <= 1e-12 && row[3].abs() <= 1e-12);
    }
}

#[test]
fn repr_theta_operator() {
    let o = run(&["repr", "--op", "theta", "--variant", "w2", "--nmax", "200", "--theta-nodes", "32", "--grid", "interior"]);
    assert_eq!(o.status.code(), Some(0));
    for row in rows(&stdout(&o)).into_iter().filter(|r| r[0] == 0.0) {
        assert!((row[2] - sawtooth(row[1])).abs() <= 5e-2, "theta {}", row[1]);
    }
}

#[test]
fn repr_symmetric_difference() {
    let args = |v| vec!["repr", "--op", "sym(N,theta)", "--variant", v, "--nmax", "400", "--theta-nodes", "32", "--grid", "interior"];
    let a = rows(&stdout(&run(&args("w1"))));
    let b = rows(&stdout(&run(&args("w2"))));
    let mut checked = 0;
    for (ra, rb) in a.iter().zip(&b).filter(|(r, _)| r[0] == 0.0) {
        let t = ra[1];
        if (t - PI).abs() < 0.2 {
            continue;
        }
        let r = FRAC_PI_4 * f2(2.0 * t - PI);
        assert!((ra[2] - rb[2] - r).abs() <= 5e-2, "theta {t}: {}", ra[2] - rb[2]);
        checked += 1;
    }
    assert!(checked >= 20);
}

#[test]
fn tabulate_columns() {
    let o = run(&["tabulate", "--nodes", "33", "--terms", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let u = UnitFunction::lighthill();
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 33);
    for row in r {
        assert!((row[1] - unit_eval(&u, row[0])).abs() < 1e-15);
        assert_eq!(row[2], f2(row[0]));
        assert!((row[4] - sawtooth(row[0])).abs() < 1e-15);
    }
}

#[test]
fn outputs_are_reproducible_and_carry_provenance() {
    let args = ["wigner", "--variant", "w3", "--state", "packet:1.0,0.3", "--nmax", "10", "--theta-nodes", "16"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# npwigner "));
    assert!(text.contains("variant=w3") && text.contains("tolerances:"));
}
