//! Runs the example binaries that `cargo test` builds alongside the tests.
//! The shaping example takes about a minute and is only compiled.

use std::path::PathBuf;
use std::process::Command;

fn example_path(name: &str) -> PathBuf {
    // target/<profile>/deps/examples-<hash> -> target/<profile>/examples/<name>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    profile_dir.join("examples").join(format!("{name}{}", std::env::consts::EXE_SUFFIX))
}

fn run(name: &str) -> String {
    let path = example_path(name);
    let out = Command::new(&path).output().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn labelings() {
    assert!(run("labelings").contains("brgc"));
}

#[test]
fn hadamard_spectrum() {
    assert!(!run("hadamard_spectrum").is_empty());
}

#[test]
fn first_order_tables() {
    assert!(!run("first_order_tables").is_empty());
}

#[test]
fn foo_constellations() {
    assert!(!run("foo_constellations").is_empty());
}

#[test]
fn labeling_census() {
    assert!(run("labeling_census").contains("40320"));
}

#[test]
fn capacity_curves() {
    assert!(!run("capacity_curves").is_empty());
}

#[test]
fn min_ebn0() {
    assert!(!run("min_ebn0").is_empty());
}
