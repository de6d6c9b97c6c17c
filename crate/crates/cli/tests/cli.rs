use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mcc_core::envelope::{self, EnvelopeJson, Object};

fn mcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> TempDir {
        let dir = std::env::temp_dir().join(format!("mcc-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).display().to_string()
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn read_object(path: &str) -> Object {
    let text = fs::read_to_string(path).unwrap();
    EnvelopeJson::from_json(&text).unwrap().decode().unwrap().1
}

#[test]
fn demo_examples() {
    let o = mcc(&["demo", "--k", "3", "--messages", "2,3,5", "--bound", "100", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("recovered sum: 10\n"));

    let o = mcc(&["demo", "--k", "2", "--messages", "0,0", "--bound", "100", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("recovered sum: 0"));

    let o = mcc(&["demo", "--k", "2", "--messages", "60,60", "--bound", "100", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no exponent in [0, 100]"));
}

#[test]
fn demo_usage_errors() {
    for args in [
        vec!["demo", "--k", "3", "--messages", "1,2"],
        vec!["demo", "--messages", "5"],
        vec!["demo", "--messages", "500,1", "--bound", "100"],
        vec!["demo", "--messages", "1,2", "--prime", "12"],
        vec!["demo", "--messages", "1,2", "--backend", "curve", "--prime", "11"],
        vec!["demo", "--messages", "1,2", "--backend", "elliptic"],
        vec!["frobnicate"],
    ] {
        assert_eq!(mcc(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn demo_is_reproducible_from_its_seed() {
    let dir = TempDir::new("repro");
    let (a, b) = (dir.path("a.jsonl"), dir.path("b.jsonl"));
    for path in [&a, &b] {
        let o = mcc(&["demo", "--messages", "7,8,9", "--seed", "99", "--transcript-out", path]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ta = fs::read(&a).unwrap();
    assert_eq!(ta, fs::read(&b).unwrap());
    let first: serde_json::Value =
        serde_json::from_str(String::from_utf8(ta).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["seq"], 0);
    assert_eq!(first["from"], "third_party");
    assert_eq!(first["kind"], "publish_params");
    assert!(first["payload_hex"].is_string());
}

#[test]
fn step_enc_then_dec() {
    let dir = TempDir::new("roundtrip");
    let p = |n: &str| dir.path(n);
    for args in [
        vec!["step", "setup", "--prime", "1000003", "--out", &p("params")],
        vec!["step", "keygen", "--in", &p("params"), "--owner", "1", "--seed", "3", "--out", &p("kp")],
        vec!["step", "extract", "--in", &p("kp"), "--part", "public-key", "--out", &p("pk")],
        vec!["step", "encode", "--in", &p("params"), "--value", "77", "--out", &p("m")],
        vec!["step", "enc", "--in", &p("pk"), "--in", &p("m"), "--out", &p("ct")],
        vec!["step", "dec", "--in", &p("kp"), "--in", &p("ct"), "--out", &p("m2")],
    ] {
        let o = mcc(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(fs::read(p("m")).unwrap(), fs::read(p("m2")).unwrap());
    let o = mcc(&["step", "decode", "--in", &p("m2"), "--bound", "100"]);
    assert_eq!(stdout(&o).trim(), "77");
}

#[test]
fn step_type_errors() {
    let dir = TempDir::new("types");
    let p = |n: &str| dir.path(n);
    let run = |args: &[&str]| mcc(args).status.code();
    assert_eq!(run(&["step", "setup", "--prime", "1000003", "--out", &p("params")]), Some(0));
    assert_eq!(run(&["step", "setup", "--prime", "101", "--out", &p("small")]), Some(0));
    for owner in ["1", "2"] {
        let kp = p(&format!("kp{owner}"));
        let pk = p(&format!("pk{owner}"));
        assert_eq!(run(&["step", "keygen", "--in", &p("params"), "--owner", owner, "--out", &kp]), Some(0));
        assert_eq!(run(&["step", "extract", "--in", &kp, "--part", "public-key", "--out", &pk]), Some(0));
    }
    assert_eq!(run(&["step", "thkeygen", "--in", &p("params"), "--k", "2", "--out", &p("t")]), Some(0));
    assert_eq!(run(&["step", "extract", "--in", &p("t"), "--part", "spk", "--out", &p("spk")]), Some(0));
    assert_eq!(run(&["step", "proxykeygen", "--in", &p("kp2"), "--in", &p("spk"), "--out", &p("rk2")]), Some(0));
    assert_eq!(run(&["step", "encode", "--in", &p("params"), "--value", "1", "--out", &p("m")]), Some(0));
    assert_eq!(run(&["step", "enc", "--in", &p("pk1"), "--in", &p("m"), "--out", &p("ct1")]), Some(0));

    // owner mismatch
    let o = mcc(&["step", "proxyenc", "--in", &p("ct1"), "--in", &p("rk2"), "--out", &p("x")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("client 1"), "{}", stderr(&o));
    // wrong object type
    assert_eq!(run(&["step", "dec", "--in", &p("pk1"), "--in", &p("ct1"), "--out", &p("x")]), Some(2));
    // inputs from different groups
    assert_eq!(run(&["step", "encode", "--in", &p("params"), "--in", &p("small"), "--value", "1", "--out", &p("x")]), Some(2));
    // share index out of range
    assert_eq!(run(&["step", "extract", "--in", &p("t"), "--part", "share", "--index", "3", "--out", &p("x")]), Some(2));
    // malformed envelope
    fs::write(p("bad"), "{\"version\": 1}").unwrap();
    assert_eq!(run(&["step", "dec", "--in", &p("bad"), "--out", &p("x")]), Some(2));
    assert_eq!(run(&["step", "dec", "--in", &p("missing"), "--out", &p("x")]), Some(2));
    assert!(!Path::new(&p("x")).exists());
}

/// Drives the whole protocol by hand for two clients and checks it against
/// the protocol engine run with the same seed.
#[test]
fn scripted_pipeline_matches_demo() {
    let dir = TempDir::new("pipeline");
    let p = |n: &str| dir.path(n);
    let seed = "2024";
    let messages = [4u64, 9];

    let o = mcc(&[
        "demo", "--prime", "1000003", "--messages", "4,9", "--seed", seed, "--bound", "100",
        "--transcript-out", &p("transcript"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let demo_sum: u64 = stdout(&o).lines().last().unwrap().rsplit(' ').next().unwrap().parse().unwrap();

    let mut steps: Vec<Vec<String>> = vec![
        vec!["setup".into(), "--prime".into(), "1000003".into(), "--out".into(), p("params")],
        vec!["thkeygen".into(), "--in".into(), p("params"), "--k".into(), "2".into(), "--seed".into(), seed.into(), "--out".into(), p("target")],
        vec!["extract".into(), "--in".into(), p("target"), "--part".into(), "spk".into(), "--out".into(), p("spk")],
    ];
    for (n, m) in messages.iter().enumerate() {
        let i = (n + 1).to_string();
        let f = |name: &str| p(&format!("{name}{i}"));
        steps.extend([
            vec!["keygen".into(), "--in".into(), p("params"), "--owner".into(), i.clone(), "--seed".into(), seed.into(), "--out".into(), f("kp")],
            vec!["extract".into(), "--in".into(), f("kp"), "--part".into(), "public-key".into(), "--out".into(), f("pk")],
            vec!["encode".into(), "--in".into(), p("params"), "--value".into(), m.to_string(), "--out".into(), f("m")],
            vec!["enc".into(), "--in".into(), f("pk"), "--in".into(), f("m"), "--seed".into(), seed.into(), "--out".into(), f("ct")],
            vec!["proxykeygen".into(), "--in".into(), f("kp"), "--in".into(), p("spk"), "--out".into(), f("rk")],
            vec!["proxyenc".into(), "--in".into(), f("ct"), "--in".into(), f("rk"), "--out".into(), f("re")],
            vec!["extract".into(), "--in".into(), p("target"), "--part".into(), "share".into(), "--index".into(), i.clone(), "--out".into(), f("share")],
        ]);
    }
    steps.push(vec!["homeval".into(), "--in".into(), p("re1"), "--in".into(), p("re2"), "--out".into(), p("outp")]);
    for i in ["1", "2"] {
        steps.push(vec![
            "thdec-share".into(), "--in".into(), p("outp"), "--in".into(), p(&format!("share{i}")),
            "--out".into(), p(&format!("w{i}")),
        ]);
    }
    steps.push(vec![
        "thdec-combine".into(), "--in".into(), p("outp"), "--in".into(), p("w1"), "--in".into(), p("w2"),
        "--out".into(), p("result"),
    ]);
    steps.push(vec![
        "thdec".into(), "--in".into(), p("outp"), "--in".into(), p("share1"), "--in".into(), p("share2"),
        "--out".into(), p("result2"),
    ]);
    for s in &steps {
        let mut args = vec!["step"];
        args.extend(s.iter().map(String::as_str));
        let o = mcc(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
    let o = mcc(&["step", "decode", "--in", &p("result"), "--bound", "100"]);
    let step_sum: u64 = stdout(&o).trim().parse().unwrap();
    assert_eq!(step_sum, 13);
    assert_eq!(step_sum, demo_sum);
    assert_eq!(fs::read(p("result")).unwrap(), fs::read(p("result2")).unwrap());

    // the hand-run keys and ciphertexts are the ones the engine used
    let transcript = fs::read_to_string(p("transcript")).unwrap();
    let sent = |kind: &str, to: &str| -> Vec<Object> {
        transcript
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
            .filter(|v| v["kind"] == kind && (to.is_empty() || v["to"] == to))
            .map(|v| {
                let bytes = hex::decode(v["payload_hex"].as_str().unwrap()).unwrap();
                envelope::decode(&bytes).unwrap().1
            })
            .collect()
    };
    let uploads = sent("upload_ciphertext", "");
    assert_eq!(uploads.len(), 2);
    assert!(uploads.contains(&read_object(&p("ct1"))));
    assert!(uploads.contains(&read_object(&p("ct2"))));
    assert_eq!(sent("publish_spk", "client:1")[0], read_object(&p("spk")));
    assert_eq!(sent("deliver_share", "client:2")[0], read_object(&p("share2")));
    assert!(sent("register_rekey", "").contains(&read_object(&p("rk1"))));
    assert_eq!(sent("eval_result", "client:1")[0], read_object(&p("outp")));
}

#[test]
fn vectors_round_trip_and_tamper() {
    let dir = TempDir::new("vectors");
    let (a, b) = (dir.path("a.json"), dir.path("b.json"));
    for path in [&a, &b] {
        let o = mcc(&["gen-vectors", "--prime", "11", "--seed", "1", "--out", path]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.as_bytes(), fs::read(&b).unwrap());
    let o = mcc(&["verify-vectors", &a]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("pass: "), "{}", stdout(&o));
    for alg in mcc_cli::vectors::ALGORITHMS {
        assert!(text.contains(&format!("\"algorithm\": \"{alg}\"")));
    }

    // flip one bit inside the output of the enc record
    let at = text.find("\"algorithm\": \"enc\"").unwrap();
    let out = at + text[at..].find("\"c2\": \"").unwrap() + 7 + 15;
    let mut bytes = text.into_bytes();
    assert_eq!(bytes[out], b'9');
    bytes[out] ^= 0x01;
    fs::write(&b, &bytes).unwrap();
    let o = mcc(&["verify-vectors", &b]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("record 4 (enc)"), "{}", stderr(&o));

    let half = bytes.len() / 2;
    fs::write(&b, &bytes[..half]).unwrap();
    let o = mcc(&["verify-vectors", &b]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed vector file"), "{}", stderr(&o));
}

#[test]
fn verify_on_stdout_file() {
    let o = mcc(&["gen-vectors", "--prime", "13", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let file = mcc_cli::vectors::VectorFile::from_json(&stdout(&o)).unwrap();
    assert_eq!(file.header.prime, Some(13));
    assert!(mcc_cli::vectors::verify(&file).is_ok());
}
