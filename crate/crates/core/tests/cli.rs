use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kn-affine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = bin(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../tables").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn tables_match_golden_files() {
    for family in ["classical", "threepoint", "torus"] {
        for kind in ["product", "cocycle"] {
            for format in ["csv", "json"] {
                let got = stdout(&["--family", family, "--window", "-3:3", "--format", format, "table", kind]);
                assert_eq!(got, golden(&format!("{kind}_{family}.{format}")), "{kind} {family} {format}");
            }
        }
    }
}

#[test]
fn table_rows_from_the_literature() {
    let tp = golden("cocycle_threepoint.csv");
    assert!(tp.lines().any(|l| l == "3,-1,-2*a2"));
    let torus = golden("product_torus.csv");
    for row in ["1,1,2,1", "1,1,0,3*e1", "1,1,-2,2*e1^2 - e1*e2 - e2^2"] {
        assert!(torus.lines().any(|l| l == row), "{row}");
    }
    let classical = golden("cocycle_classical.csv");
    for line in classical.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let (n, m): (i64, i64) = (cells[0].parse().unwrap(), cells[1].parse().unwrap());
        let expected = if m == -n { (-n).to_string() } else { "0".into() };
        assert_eq!(cells[2], expected, "{line}");
    }
}

#[test]
fn table_output_is_deterministic() {
    let args = ["--family", "torus", "--window", "-4:4", "table", "cocycle", "--format", "json"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn table_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let p = path.to_str().unwrap();
    let out = bin(&["--family", "threepoint", "--window", "-3:3", "--out", p, "table", "cocycle"]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden("cocycle_threepoint.csv"));
}

#[test]
fn bracket_examples() {
    assert_eq!(
        stdout(&["--family", "threepoint", "--extended", "bracket", "e(2)", "f(-2)"]),
        "h(0) - 2*t\n"
    );
    assert_eq!(
        stdout(&["--family", "torus", "bracket", "e(1)", "f(1)"]),
        "h(2) + 3*e1*h(0) + (2*e1^2 - e1*e2 - e2^2)*h(-2)\n"
    );
    assert_eq!(stdout(&["bracket", "h(0)", "h(5)"]), "0\n");
    assert_eq!(stdout(&["bracket", "[e(1), f(1)]"]), "h(2)\n");
    assert_eq!(
        stdout(&["--family", "threepoint", "--set", "a2=0", "bracket", "e(1)", "f(1)"]),
        "h(2)\n"
    );
}

#[test]
fn gl_and_function_algebras() {
    assert_eq!(
        stdout(&["--algebra", "gl(2)", "--extended", "bracket", "E[1,2](1)", "E[2,1](-1)"]),
        "H[1](0) - t\n"
    );
    assert_eq!(
        stdout(&["--algebra", "functions", "--family", "threepoint", "bracket", "A(1)*A(1)"]),
        "A(2) + a2*A(0)\n"
    );
}

#[test]
fn parse_errors_exit_with_two() {
    let out = bin(&["bracket", "[e(1), f(1)"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("end of input"), "{err}");
    assert_eq!(bin(&["--algebra", "sl(2)", "bracket", "q(1)"]).status.code(), Some(2));
    assert_eq!(bin(&["--window", "3:1", "describe"]).status.code(), Some(2));
    assert_eq!(bin(&["--format", "xml", "describe"]).status.code(), Some(2));
}

#[test]
fn verify_reports_and_exit_codes() {
    let out = bin(&["--family", "threepoint", "--window", "-6:6", "verify"]);
    assert_eq!(out.status.code(), Some(0));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = reports.as_array().unwrap();
    let checks: Vec<&str> = reports.iter().map(|r| r["check"].as_str().unwrap()).collect();
    assert_eq!(
        checks,
        ["jacobi", "cocycle-condition", "locality", "oracle", "linvariance", "degeneration", "witness"]
    );
    for r in reports {
        for key in ["check", "family", "algebra", "window", "tuples_checked", "violations", "bounds"] {
            assert!(r.get(key).is_some(), "{key} missing");
        }
        assert!(r["violations"].as_array().unwrap().is_empty());
    }
    let bad = bin(&["--family", "threepoint", "verify", "--checks", "cocycle-condition", "--corrupt-cocycle"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn degeneration_report() {
    let out = bin(&["--family", "torus", "--window", "-4:4", "verify", "--checks", "degeneration"]);
    assert_eq!(out.status.code(), Some(0));
    let out = bin(&["--family", "torus", "--extended", "degenerate", "[e(1), f(1)]"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn describe_lists_basis() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["--algebra", "sl(3)", "describe"])).unwrap();
    assert_eq!(v["algebra"]["dim"], 8);
}
