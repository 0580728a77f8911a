use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::Duration;

use ppda_core::dataio::{read_message, read_traces, write_message, BatchFrame, Message, RewardFrame};

fn ppda() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ppda"));
    cmd.env("RUST_LOG", "info");
    cmd
}

fn run(args: &[&str], dir: &Path) -> Output {
    ppda().args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = run(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn walking_fixtures(dir: &Path) -> [PathBuf; 2] {
    for (subject, file) in [("s01", "s01.json"), ("s02", "s02.json")] {
        ok(
            &["fixture", "--kind", "walking", "--subject", subject, "--len", "400", "--out", file],
            dir,
        );
    }
    [dir.join("s01.json"), dir.join("s02.json")]
}

fn read_frames(path: &Path) -> Vec<BatchFrame> {
    let bytes = std::fs::read(path).unwrap();
    let mut r = &bytes[..];
    let mut frames = Vec::new();
    while let Some(msg) = read_message(&mut r).unwrap() {
        frames.push(BatchFrame::decode(&msg).unwrap());
    }
    frames
}

#[test]
fn policy_inspect_on_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["policy", "inspect"], dir.path());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "810 sub-policies, uniform 0.0012346\n");

    ok(&["policy", "init", "--out", "default.json"], dir.path());
    let out = ok(&["policy", "inspect", "--policy", "default.json"], dir.path());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "810 sub-policies, uniform 0.0012346\n");

    ok(&["policy", "init", "--binary", "--out", "binary.json"], dir.path());
    let out = ok(&["policy", "inspect", "--policy", "binary.json"], dir.path());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "2 sub-policies, uniform 0.5000000\n");
}

#[test]
fn augment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    walking_fixtures(dir.path());
    let base = [
        "augment", "--bundle", "s01.json", "--bundle", "s02.json", "--window", "60", "--stride", "30",
        "--batch", "8", "--batches", "5",
    ];
    for mode in ["ppda", "stda"] {
        let mut a: Vec<&str> = base.to_vec();
        a.extend(["--mode", mode, "--seed", "42", "--out", "a.bin"]);
        ok(&a, dir.path());
        let mut b: Vec<&str> = base.to_vec();
        b.extend(["--mode", mode, "--seed", "42", "--out", "b.bin"]);
        ok(&b, dir.path());
        let mut c: Vec<&str> = base.to_vec();
        c.extend(["--mode", mode, "--seed", "43", "--out", "c.bin"]);
        ok(&c, dir.path());
        let a = std::fs::read(dir.path().join("a.bin")).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("b.bin")).unwrap());
        assert_ne!(a, std::fs::read(dir.path().join("c.bin")).unwrap());

        let frames = read_frames(&dir.path().join("a.bin"));
        assert_eq!(frames.len(), 5);
        for f in &frames {
            let (_, t, c) = f.shape();
            assert_eq!((t, c), (60, 12));
            assert!(f.subpolicy < 810);
            assert!(f.labels.iter().all(|&l| l <= 1));
        }
    }
}

#[test]
fn run_header_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    walking_fixtures(dir.path());
    let out = ok(
        &["augment", "--bundle", "s01.json", "--window", "50", "--batches", "1", "--out", "x.bin"],
        dir.path(),
    );
    let log = String::from_utf8(out.stderr).unwrap();
    assert!(log.contains("generated seed"), "{log}");
    assert!(log.contains("mode=ppda"), "{log}");
    assert!(log.contains("policy=sha256:"), "{log}");
    assert!(log.contains(env!("CARGO_PKG_VERSION")), "{log}");
}

#[test]
fn augment_from_csv_traces() {
    let dir = tempfile::tempdir().unwrap();
    walking_fixtures(dir.path());
    ok(&["simulate", "--bundle", "s01.json", "--out", "s01.csv", "--seed", "1"], dir.path());
    std::fs::write(dir.path().join("labels.txt"), "1\n".repeat(400)).unwrap();
    ok(
        &[
            "augment", "--mode", "stda", "--traces", "s01.csv", "--labels", "labels.txt", "--window", "40",
            "--stride", "40", "--batch", "4", "--seed", "1", "--out", "t.bin",
        ],
        dir.path(),
    );
    let frames = read_frames(&dir.path().join("t.bin"));
    assert_eq!(frames.len(), 3);
    assert!(frames.iter().all(|f| f.labels.iter().all(|&l| l == 1)));
    let out = run(
        &["augment", "--mode", "ppda", "--traces", "s01.csv", "--out", "t.bin"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_static_reads_one_g_up() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["fixture", "--kind", "static", "--len", "50", "--out", "static.json"], dir.path());
    ok(&["simulate", "--bundle", "static.json", "--out", "static.csv", "--seed", "0"], dir.path());
    let traces = read_traces(dir.path().join("static.csv")).unwrap();
    assert_eq!(traces.len(), 1);
    for (a, g) in traces[0].accel.iter().zip(&traces[0].gyro) {
        assert!(a[0].abs() < 1e-9 && a[1].abs() < 1e-9);
        assert!((a[2] - 9.80665).abs() < 1e-9);
        assert!(g.iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    walking_fixtures(dir.path());
    let code = |args: &[&str]| run(args, dir.path()).status.code();
    assert_eq!(code(&["augment", "--bundle", "missing.json", "--out", "x.bin"]), Some(3));
    std::fs::write(dir.path().join("bad.json"), r#"{"learning_rate": 0}"#).unwrap();
    assert_eq!(
        code(&["augment", "--bundle", "s01.json", "--policy", "bad.json", "--out", "x.bin"]),
        Some(2)
    );
    assert_eq!(code(&["augment", "--bundle", "s01.json", "--window", "1000", "--out", "x.bin"]), Some(2));
    assert_eq!(code(&["augment", "--bundle", "s01.json", "--stride", "0", "--out", "x.bin"]), Some(2));
    assert_eq!(code(&["augment", "--bundle", "s01.json", "--out", "no/such/dir/x.bin"]), Some(3));
    assert_eq!(code(&["augment", "--mode", "sideways", "--bundle", "s01.json", "--out", "x.bin"]), Some(2));
    assert_eq!(code(&["policy", "frobnicate"]), Some(2));
    std::fs::write(dir.path().join("broken.json"), "{").unwrap();
    assert_eq!(code(&["simulate", "--bundle", "broken.json", "--out", "x.csv"]), Some(2));
}

struct Server {
    child: std::process::Child,
    port: u16,
    log: std::sync::mpsc::Receiver<String>,
}

fn start_server(dir: &Path, extra: &[&str]) -> Server {
    let mut child = ppda()
        .args([
            "serve", "--bundle", "s01.json", "--bundle", "s02.json", "--window", "50", "--stride", "25",
            "--batch", "4", "--seed", "7", "--port", "0",
        ])
        .args(extra)
        .current_dir(dir)
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let stderr = child.stderr.take().unwrap();
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        for line in BufReader::new(stderr).lines() {
            let Ok(line) = line else { break };
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    let port = loop {
        let line = rx.recv_timeout(Duration::from_secs(30)).expect("server starts");
        if let Some(addr) = line.split("listening on ").nth(1) {
            break addr.rsplit(':').next().unwrap().trim().parse().unwrap();
        }
    };
    Server { child, port, log: rx }
}

#[test]
fn serve_streams_batches_and_learns_from_rewards() {
    let dir = tempfile::tempdir().unwrap();
    walking_fixtures(dir.path());
    let mut server = start_server(
        dir.path(),
        &["--round", "1", "--max-batches", "6", "--reward-wait-ms", "20000", "--state-out", "state.json"],
    );
    let mut stream = TcpStream::connect(("127.0.0.1", server.port)).unwrap();
    let mut rewarded = None;
    let mut frames = 0;
    while let Some(bytes) = read_message(&mut stream).unwrap() {
        let Message::Batch(frame) = Message::decode(&bytes).unwrap() else {
            panic!("expected a batch frame");
        };
        assert_eq!(frame.shape().1, 50);
        frames += 1;
        let idx = *rewarded.get_or_insert(frame.subpolicy);
        let reward = RewardFrame {
            rewards: vec![(idx, 1.0)],
        };
        if write_message(&mut stream, &reward.encode()).is_err() {
            break;
        }
    }
    assert_eq!(frames, 6);
    let status = server.child.wait().unwrap();
    assert!(status.success());
    let log: Vec<String> = server.log.try_iter().collect();
    let idx = rewarded.unwrap();
    assert!(
        log.iter().any(|l| l.contains(&format!("reward subpolicy={idx} value=1"))),
        "{log:#?}"
    );
    // the rewarded sub-policy gains probability every round
    let trail: Vec<(f64, f64)> = log
        .iter()
        .filter(|l| l.contains(&format!("p[{idx}]")))
        .map(|l| {
            let tail = l.split(&format!("p[{idx}] ")).nth(1).unwrap();
            let (a, b) = tail.split_once(" -> ").unwrap();
            (a.trim().parse().unwrap(), b.trim().parse().unwrap())
        })
        .collect();
    assert!(!trail.is_empty(), "{log:#?}");
    assert!(trail.iter().all(|(a, b)| b > a), "{trail:?}");

    let out = ok(
        &["policy", "inspect", "--state", "state.json", "--top", "1"],
        dir.path(),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let top = text.lines().nth(1).unwrap();
    assert_eq!(top.split_whitespace().next().unwrap(), idx.to_string(), "{text}");
}

#[test]
fn serve_rejects_garbage_with_protocol_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    walking_fixtures(dir.path());
    let mut server = start_server(dir.path(), &["--round", "1", "--reward-wait-ms", "20000"]);
    let mut stream = TcpStream::connect(("127.0.0.1", server.port)).unwrap();
    read_message(&mut stream).unwrap().unwrap();
    write_message(&mut stream, b"JUNKJUNK").unwrap();
    stream.flush().unwrap();
    // keep reading until the server hangs up
    while let Ok(Some(_)) = read_message(&mut stream) {}
    let status = server.child.wait().unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn serve_reports_busy_port() {
    let dir = tempfile::tempdir().unwrap();
    walking_fixtures(dir.path());
    let holder = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = holder.local_addr().unwrap().port().to_string();
    let out = run(
        &["serve", "--bundle", "s01.json", "--window", "50", "--seed", "1", "--port", &port],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}
