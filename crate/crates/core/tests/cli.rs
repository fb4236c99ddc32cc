use std::path::Path;
use std::process::{Command, Output};

fn podrom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_podrom")).args(args).output().unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["study", "cex2", "--h", "1/256", "--seed", "7"];
    let a = podrom(&args);
    let b = podrom(&args);
    assert!(a.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);

    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&d1, &d2] {
        let out = podrom(&[
            "study",
            "cex1-proj",
            "--h",
            "1/256",
            "--k",
            "16",
            "--dt",
            "1/4,1/8,1/16",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (f1, f2) = (files(d1.path()), files(d2.path()));
    assert!(f1.iter().any(|(n, _)| n == "cex1_scaling_dq.csv"));
    assert!(f1.iter().any(|(n, _)| n == "cex1_scaling_dq.full.csv"));
    assert!(f1.iter().any(|(n, _)| n == "cex1_scaling_dq.provenance.toml"));
    assert_eq!(f1, f2);
}

#[test]
fn property_suite_is_deterministic_and_passes() {
    let args = ["props", "--h", "1/64", "--k", "16", "--dt", "1/4,1/8", "--seed", "3"];
    let a = podrom(&args);
    let b = podrom(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn grid_violation_is_a_validation_error() {
    let out = podrom(&["study", "cex1-rom", "--k", "3", "--dt", "1/2", "--h", "1/64"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("boundary conditions"), "{err}");
}

#[test]
fn exit_codes() {
    assert_eq!(podrom(&["study", "cex1-rom", "--bogus"]).status.code(), Some(1));
    assert_eq!(podrom(&["study", "cex2", "--h", "1/3.5"]).status.code(), Some(1));
    assert_eq!(podrom(&["--help"]).status.code(), Some(0));
    assert_eq!(
        podrom(&["basis", "--h", "1/32", "--k", "8", "--dt", "1/8"])
            .status
            .code(),
        Some(0)
    );
}
