use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const NOTICE_PREFIX: &str = "# scripted adversaries validate mechanism only";

fn zklogin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zklogin")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap().trim_end().to_string()
}

fn setup(backend: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "profile = \"compact\"\nbackend = \"{backend}\"\nseed = 3\nsalt_seed = \"{}\"\nproviders = [\"op.json\"]\n",
        "11".repeat(32)
    );
    std::fs::write(dir.path().join("zk.toml"), cfg).unwrap();
    stdout(&zklogin(dir.path(), &["--config", "zk.toml", "op", "keygen", "--iss", "https://op.test", "--out", "op.json"]));
    dir
}

struct Flow {
    jwt: String,
    salt: String,
    addr: String,
}

fn enroll(d: &Path, sub: &str) -> Flow {
    let c = ["--config", "zk.toml"];
    let run = |args: &[&str]| stdout(&zklogin(d, &[&c[..], args].concat()));
    run(&["wallet", "init", "--out", "w.json"]);
    let w: Value = serde_json::from_str(&std::fs::read_to_string(d.join("w.json")).unwrap()).unwrap();
    let nonce = w["nonce"].as_str().unwrap();
    let jwt = run(&["op", "issue", "--op", "op.json", "--sub", sub, "--aud", "app.example", "--nonce", nonce]);
    std::fs::write(d.join("jwt.txt"), &jwt).unwrap();
    let salt = run(&["salt", "derive", "--jwt", "@jwt.txt"]);
    let addr = run(&["wallet", "address", "--jwt", "@jwt.txt", "--salt", &salt]);
    let explicit = run(&["wallet", "address", "--stid", sub, "--aud", "app.example", "--iss", "https://op.test", "--salt", &salt]);
    assert_eq!(addr, explicit);
    Flow { jwt, salt, addr }
}

#[test]
fn sign_and_verify_round_trip() {
    for backend in ["simulation", "transparent"] {
        let dir = setup(backend);
        let d = dir.path();
        let f = enroll(d, "31337");
        let c = ["--config", "zk.toml"];
        let run = |args: &[&str]| zklogin(d, &[&c[..], args].concat());

        stdout(&run(&["prove", "--wallet", "w.json", "--jwt", &f.jwt, "--salt", &f.salt, "--out", "proof.json"]));
        let proof: Value = serde_json::from_str(&std::fs::read_to_string(d.join("proof.json")).unwrap()).unwrap();
        assert!(proof["public_inputs"].as_array().unwrap().contains(&Value::String(f.addr.clone())));

        let with_proof =
            stdout(&run(&["wallet", "sign", "--wallet", "w.json", "--jwt", "@jwt.txt", "--salt", &f.salt, "--msg", "pay 5", "--proof", "proof.json"]));
        let direct = stdout(&run(&["wallet", "sign", "--wallet", "w.json", "--jwt", "@jwt.txt", "--salt", &f.salt, "--msg", "pay 5"]));
        assert_eq!(with_proof, direct, "{backend}");
        std::fs::write(d.join("sig.txt"), &direct).unwrap();

        let verify = |msg: &str, extra: &[&str]| {
            let args = [&["wallet", "verify", "--addr", &f.addr, "--iss", "https://op.test", "--msg", msg, "--sig", "@sig.txt"][..], extra].concat();
            run(&args)
        };
        let ok = verify("pay 5", &[]);
        assert_eq!(stdout(&ok), "valid");
        for (msg, extra, region) in [
            ("pay 6", &[][..], "ephemeral_signature"),
            ("pay 5", &["--t-cur", "12"][..], "freshness"),
            ("pay 5", &["--epoch", "9"][..], "freshness"),
        ] {
            let o = verify(msg, extra);
            assert_eq!(o.status.code(), Some(1), "{backend} {msg} {extra:?}");
            assert!(String::from_utf8_lossy(&o.stderr).contains(region), "{}", String::from_utf8_lossy(&o.stderr));
        }
        let other = enroll(d, "31338");
        let o = run(&["wallet", "verify", "--addr", &other.addr, "--iss", "https://op.test", "--msg", "pay 5", "--sig", "@sig.txt"]);
        assert_eq!(o.status.code(), Some(1));
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = setup("simulation");
    let d = dir.path();
    assert_eq!(zklogin(d, &[]).status.code(), Some(2));
    assert_eq!(zklogin(d, &["wallet", "verify", "--addr", "00"]).status.code(), Some(2));
    assert_eq!(zklogin(d, &["--backend", "groth16", "circuit", "stats"]).status.code(), Some(2));
    assert_eq!(zklogin(d, &["--config", "zk.toml", "attack", "run", "no_such_case"]).status.code(), Some(2));
    assert_eq!(zklogin(d, &["--config", "zk.toml", "game", "run", "no_such_game"]).status.code(), Some(2));
    assert_eq!(zklogin(d, &["--config", "missing.toml", "circuit", "stats"]).status.code(), Some(2));
    std::fs::write(d.join("bad.toml"), "profile = \"compact\"\nunknown_key = 1\n").unwrap();
    let o = zklogin(d, &["--config", "bad.toml", "circuit", "stats"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
    std::fs::write(d.join("bad2.toml"), "[serve]\nport = 1\n").unwrap();
    assert_eq!(zklogin(d, &["--config", "bad2.toml", "circuit", "stats"]).status.code(), Some(2));
    let o = zklogin(d, &["--config", "zk.toml", "salt", "derive", "--stid", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn circuit_stats_and_build() {
    let dir = setup("simulation");
    let d = dir.path();
    let stats: Value = serde_json::from_str(&stdout(&zklogin(d, &["--config", "zk.toml", "circuit", "stats"]))).unwrap();
    let total = stats["total"].as_u64().unwrap();
    let sum: u64 = stats["regions"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(sum, total);
    let build: Value = serde_json::from_str(&stdout(&zklogin(d, &["--config", "zk.toml", "circuit", "build"]))).unwrap();
    assert_eq!(build["constraints"].as_u64(), Some(total));
    assert_eq!(build["profile"], "compact");
    assert_eq!(build["digest"].as_str().unwrap().len(), 64);
}

fn report(out: &str) -> Value {
    let (header, json) = out.split_once('\n').unwrap();
    assert!(header.starts_with(NOTICE_PREFIX), "{header}");
    serde_json::from_str(json).unwrap()
}

#[test]
fn attack_and_game_reports() {
    let dir = setup("simulation");
    let d = dir.path();
    let r = report(&stdout(&zklogin(d, &["--config", "zk.toml", "attack", "run", "escaped_quote_key", "--seeds", "2"])));
    assert_eq!(r["game"], "attacks");
    assert_eq!(r["wins"], 0);
    assert_eq!(r["cases"][0]["region"], "parse/sub/top_level");

    let r = report(&stdout(&zklogin(d, &["--config", "zk.toml", "game", "run", "cross_address_reuse", "--trials", "10"])));
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(keys, ["game", "trials", "wins", "advantage", "cases"]);
    assert_eq!(r["trials"], 10);
    assert_eq!(r["wins"], 0);

    let r = report(&stdout(&zklogin(d, &["--config", "zk.toml", "game", "run", "unlinkability", "--trials", "20"])));
    assert_eq!(r["game"], "unlinkability/simulation");
    let r = report(&stdout(&zklogin(d, &["--config", "zk.toml", "--backend", "transparent", "game", "run", "tws_witness_hiding", "--trials", "2"])));
    assert_eq!(r["game"], "tws_witness_hiding/transparent");
    assert_eq!(r["wins"], 2);
}
