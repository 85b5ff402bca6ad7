use std::process::Command;

fn regint(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_regint")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn regint_engines_agree() {
    let expr = "wp(1,2)*wp(1,3)*wp(2,3)";
    let mut seen = Vec::new();
    for engine in ["iterated", "forests", "chains", "hae"] {
        let (code, out, _) = regint(&["regint", expr, "--engine", engine]);
        assert_eq!(code, 0);
        seen.push(out);
    }
    assert!(seen.iter().all(|s| s == &seen[0]));
    assert_eq!(seen[0].trim(), "I^6*E2*E4/576 - I^6*E6/864 - I^4*E4*Y/48");
}

#[test]
fn acycle_and_limits() {
    assert_eq!(regint(&["acycle", "Z(1,2)^2", "--order", "2,1"]).1.trim(), "I^2*E2/12 + I^2/6");
    let avg = regint(&["acycle-average", "wp(1,2)*wp(2,3)"]).1;
    for engine in ["iterated", "average", "forests"] {
        assert_eq!(regint(&["limit", "wp(1,2)*wp(2,3)", "--engine", engine]).1, avg);
    }
}

#[test]
fn json_output() {
    let (code, out, _) = regint(&["--format", "json", "regint", "wp(1,2)^2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rendered"], "I^4*E4/144");
    assert_eq!(v["weight"], 4);
    assert_eq!(v["value"][0]["coeff"], "1/144");
    assert_eq!(v["value"][0]["E4"], 1);
}

#[test]
fn errors_and_exit_codes() {
    let (code, _, err) = regint(&["regint", "wp(1,1)"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error["), "{err}");
    let (code, out, _) = regint(&["--format", "json", "acycle", "Zhat(1,2)"]);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["error"].is_string());
    assert_eq!(regint(&["check", "nonsense"]).0, 2);
}

#[test]
fn check_suite() {
    let (code, out, _) = regint(&["check", "weights", "--samples", "3", "--seed", "5"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("weights: pass"));
}

#[test]
fn forests_listing() {
    let (code, out, _) = regint(&["forests", "--n", "4"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 6);
}
