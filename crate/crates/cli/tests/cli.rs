use std::process::Command;

fn latquant(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_latquant")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn catalog_lists_the_main_lattices() {
    let (code, out) = latquant(&["catalog", "list", "--out", "csv"]);
    assert_eq!(code, 0);
    for name in ["B14", "B13", "AppendixA", "AppendixB"] {
        assert!(out.lines().any(|l| l.starts_with(&format!("{name},"))), "missing {name}");
    }
}

#[test]
fn appendix_verification_succeeds() {
    let (code, out) = latquant(&["verify", "appendix-b"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["all_passed"], true);
}

#[test]
fn theta_of_d4() {
    let (code, out) = latquant(&["theta", "--lattice", "D4", "--rmax", "4", "--out", "csv"]);
    assert_eq!(code, 0);
    let counts: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts, ["25", "49"]);
}

#[test]
fn exact_nsm_at_unit_scales_is_rational() {
    let (code, out) = latquant(&["exact-nsm", "--dim", "13", "--a2", "1", "--a3", "1", "--digits", "20"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        v["exact"]["g"],
        "264643025208158502912098205658743146287/3796982028294824029753236210396954624000"
    );
    assert_eq!(v["g_a"]["decimal"], v["g_b"]["decimal"]);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(latquant(&["no-such-command"]).0, 2);
    assert_eq!(latquant(&["theta", "--lattice", "Nope", "--rmax", "2"]).0, 2);
    assert_eq!(latquant(&["nsm"]).0, 2);
}

#[test]
fn nsm_is_reproducible_for_a_seed() {
    let args = ["nsm", "--lattice", "Z:n=3", "--samples", "20000", "--seed", "7"];
    let (c1, a) = latquant(&args);
    let (c2, b) = latquant(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}
