use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn ffl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffl"))
        .args(args)
        .current_dir(fixtures())
        .env_remove("FFL_FUEL")
        .output()
        .expect("run ffl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn rules_lists_the_catalogue() {
    let o = ffl(&["rules"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let headers: Vec<&str> = out.lines().filter(|l| !l.starts_with(' ')).collect();
    assert_eq!(headers.len(), 13);
    assert!(headers[0].starts_with("R1 extract-independent-to-map"));
    assert!(out.contains("  R4: map(?f, map(?g, ?xs))"), "{out}");
}

#[test]
fn diff_prints_lambdas_and_path() {
    let o = ffl(&["diff", "diff/fold_add.ffl", "diff/fold_add_commuted.ffl"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("path [0]"), "{out}");
    assert!(out.contains("(λ(x,y).x+y, λ(x,y).y+x)"), "{out}");
}

#[test]
fn eval_exit_codes() {
    let args = ["eval", "sum/sum_fold.ffl", "--arg", "sum/xs.ffl", "--arg", "sum/ys.ffl", "--arg", "sum/n.ffl"];
    let o = ffl(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(list 4 6)");

    let mut starved = args.to_vec();
    starved.extend(["--fuel", "3"]);
    let o = ffl(&starved);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stdout(&o).trim(), "out-of-fuel");

    let o = Command::new(env!("CARGO_BIN_EXE_ffl"))
        .args(args)
        .current_dir(fixtures())
        .env("FFL_FUEL", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4), "FFL_FUEL sets the default");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("oob.ffl");
    std::fs::write(&bad, "(read (list 1) 3)").unwrap();
    let o = ffl(&["eval", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("stuck:"));
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(ffl(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(ffl(&["eval", "missing.ffl"]).status.code(), Some(66));
    assert_eq!(ffl(&["verify-chain", "missing.chain"]).status.code(), Some(66));
    assert_eq!(ffl(&["check", "--help"]).status.code(), Some(0));
}

#[test]
fn translate_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sum.ffl");
    let o = ffl(&["translate", "sum/sum_arrays.il", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("fold"));
    let o = ffl(&["typecheck", out.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "(List Int -> (List Int -> (Int -> List Int)))");
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ffl");
    let b = dir.path().join("b.ffl");
    let c = dir.path().join("c.ffl");
    std::fs::write(&a, "(lam x (lam y (sub x y)))").unwrap();
    std::fs::write(&b, "(lam x (lam y (sub y x)))").unwrap();
    std::fs::write(&c, "(lam y (lam x (sub y x)))").unwrap();
    let p = |f: &PathBuf| f.to_str().unwrap().to_string();
    let o = ffl(&["check", &p(&a), &p(&b)]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let o = ffl(&["check", &p(&a), &p(&c)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn check_with_coupling_hint() {
    let o = ffl(&[
        "check",
        "sum/sum_arrays.il",
        "sum/sum_arrays_zipped.il",
        "--couple",
        "sum/same_array.ffl",
        "--domain",
        "n=derived (length xs)",
        "--assume",
        "equal-length xs ys",
        "--bound-len",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_chain_report_is_deterministic_and_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let o1 = ffl(&["verify-chain", "sum/sum.chain", "--out", out.to_str().unwrap()]);
    let o2 = ffl(&["verify-chain", "sum/sum.chain"]);
    assert_eq!(o1.status.code(), Some(0));
    assert_eq!(stdout(&o1), stdout(&o2));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&o1));
    assert!(stdout(&o1).ends_with("chain Equivalent\n"));

    let o = ffl(&["verify-chain", "sum/mismatch.chain"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("signature mismatch"));
}
