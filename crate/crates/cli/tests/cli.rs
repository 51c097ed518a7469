use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use canonlab::Certificate;

fn gallery(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("gallery").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canonlab"))
        .args(args)
        .env_remove("CANONLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn hasse_of_gallery_displays() {
    let o = run(&["hasse", path(&gallery("gm_p3.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("H = 0\n"), "{}", stdout(&o));

    let o = run(&["hasse", path(&gallery("pi_p3_e2.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("H = 1/2\n"));
}

#[test]
fn every_gallery_file_certifies_or_declines() {
    for entry in fs::read_dir(gallery("")).unwrap() {
        let p = entry.unwrap().path();
        let o = run(&["certify", path(&p), "--level", "1", "--jobs", "2"]);
        let code = o.status.code();
        assert!(code == Some(0) || code == Some(2), "{}: {:?}", p.display(), o);
    }
}

#[test]
fn certify_exit_codes() {
    let o = run(&["certify", path(&gallery("gm_p3.json")), "--level", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exists: true"));

    let o = run(&["certify", path(&gallery("pi_p3_e2.json")), "--level", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("radius_exponent: 1/4"));

    // H = 1/2 is not below (p - 1)/p = 1/2
    let o = run(&["certify", path(&gallery("pi_p2_e2.json")), "--level", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("exists: false"));
}

#[test]
fn certificate_json_round_trips() {
    let o = run(&["certify", path(&gallery("gm2_block_p3.json")), "--level", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let cert = Certificate::from_json_str(&text).unwrap();
    assert!(cert.exists);
    assert_eq!(cert.order.as_deref(), Some("81"));
    let again: serde_json::Value = serde_json::from_str(&cert.to_json_string()).unwrap();
    let orig: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(again, orig);
}

#[test]
fn witt_expressions() {
    let o = run(&["witt", "add [1] [1]", "--p", "2", "--len", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(2, -1)");

    let o = run(&["witt", "frob (1, 2, 0)", "--p", "3", "--len", "3"]);
    assert_eq!(stdout(&o).trim(), "(7, -106)");

    let o = run(&["witt", "blend [1] [1]", "--p", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_input_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"p\": 3, \"e\": 1,").unwrap();
    let o = run(&["certify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    // det w_0(M) = 3 is not a unit
    let nonunit = dir.path().join("nonunit.json");
    fs::write(&nonunit, r#"{"p": 3, "e": 1, "g": 1, "h": 1, "L": 1, "M": [[["3"]]]}"#).unwrap();
    let o = run(&["hasse", nonunit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["hasse", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn hyp_declines_above_the_bound() {
    let o = run(&["hyp", path(&gallery("pi_p5_e2.json")), "--level", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["hyp", path(&gallery("pi_p5_e2.json")), "--level", "1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn trop_renders_svg_and_tsv() {
    let f = gallery("gm2_block_p3.json");
    let o = run(&["trop", path(&f), "--level", "1", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("<svg"));
    let o = run(&["trop", path(&f), "--level", "1", "--format", "tsv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().count() > 1);
}

#[test]
fn sweep_is_deterministic() {
    let a = run(&["sweep", "--count", "4", "--seed", "7", "--format", "json"]);
    let b = run(&["sweep", "--count", "4", "--seed", "7", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}
