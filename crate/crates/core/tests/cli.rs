use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use bairesum::ideals::{Certificate, CoverFamily, MeagerWitness, Slalom};
use bairesum::words::Word;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bairesum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn write(dir: &TempDir, name: &str, v: &impl serde::Serialize) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lists_scenarios() {
    let o = bin(&["scenario", "--list"]);
    assert_eq!(code(&o), 0);
    let names = json(&o);
    assert_eq!(names.as_array().unwrap().len(), 15);
    assert!(names
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n == "sacks-meager"));
}

#[test]
fn report_round_trip_and_tamper() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = bin(&[
        "scenario",
        "laver-full-sum",
        "--window",
        "2,8,2,0",
        "--count",
        "5",
        "--seed",
        "3",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin(&["verify", "--report", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["replayed"], true);

    let mut report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    report["inputs_digest"] = Value::from("00");
    let bad = write(&dir, "bad.json", &report);
    let o = bin(&["verify", "--report", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["replayed"], false);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&bin(&["scenario", "no-such-thing"])), 2);
    assert_eq!(
        code(&bin(&["scenario", "laver-full-sum", "--window", "0,4,2,0"])),
        2
    );
    assert_eq!(
        code(&bin(&[
            "scenario",
            "laver-full-sum",
            "--window",
            "nonsense"
        ])),
        2
    );
    assert_eq!(code(&bin(&["escape", "laver"])), 2);
}

#[test]
fn verify_words_against_a_witness() {
    let dir = TempDir::new().unwrap();
    let cert = write(
        &dir,
        "cert.json",
        &Certificate::MeagerWitness(MeagerWitness::constant(Word::from([7]))),
    );
    let good = write(
        &dir,
        "good.json",
        &vec![Word::from([1, 2, 3]), Word::from([0, 0])],
    );
    let bad = write(&dir, "bad.json", &vec![Word::from([1, 7, 7])]);
    let o = bin(&["verify", "--cert", s(&cert), "--words", s(&good)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = bin(&["verify", "--cert", s(&cert), "--words", s(&bad)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn convert_cover_to_slalom_and_back() {
    let dir = TempDir::new().unwrap();
    let cover = Certificate::Cover {
        families: vec![
            CoverFamily::new(vec![Word::from([0])]),
            CoverFamily::new(vec![Word::from([1, 1])]),
        ],
    };
    let cert = write(&dir, "cover.json", &cover);
    let o = bin(&["convert", "--cert", s(&cert), "--window", "2,4,2,0"]);
    assert_eq!(code(&o), 0);
    let slalom: Slalom = serde_json::from_value(json(&o)["slalom"].clone()).unwrap();
    assert!(slalom.level(1).contains(&Word::from([0])));
    assert!(slalom.level(2).contains(&Word::from([1, 1])));

    let back = write(&dir, "slalom.json", &Certificate::Slalom(slalom));
    let o = bin(&[
        "convert",
        "--cert",
        s(&back),
        "--window",
        "2,4,2,0",
        "--steps",
        "2",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn shrink_and_escape_commands() {
    let dir = TempDir::new().unwrap();
    let o = bin(&["shrink", "miller-null", "--window", "2,6,2,0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let cert = write(
        &dir,
        "w.json",
        &Certificate::MeagerWitness(MeagerWitness::constant(Word::from([7]))),
    );
    let o = bin(&["shrink", "sacks", "--cert", s(&cert), "--steps", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&o)["complete"].as_bool().unwrap());

    let o = bin(&["escape", "laver", "--target", "3,-1,0,4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let o = bin(&[
        "escape",
        "miller-meager",
        "--cert",
        s(&cert),
        "--steps",
        "4",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let out = dir.path().join("trace.json");
    let o = bin(&[
        "escape",
        "silver-nwd",
        "--cert",
        s(&cert),
        "--tree",
        s(&silver(&dir)),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let trace: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(trace["x_prefix"].is_array());
}

fn silver(dir: &TempDir) -> PathBuf {
    use bairesum::bench::TreeInput;
    use bairesum::seq::{Center, FreeSet};
    use bairesum::trees::SilverSpec;
    let spec = SilverSpec::new(FreeSet::evens(), Center::zero()).unwrap();
    write(dir, "silver.json", &TreeInput::Silver { spec })
}
