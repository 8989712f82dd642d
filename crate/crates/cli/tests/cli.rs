use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_socialgest"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Model trained through the CLI on the default cohort.
fn model() -> &'static Path {
    static M: OnceLock<PathBuf> = OnceLock::new();
    M.get_or_init(|| {
        let dir = scratch("model");
        let corpus = dir.join("corpus");
        let m = dir.join("m.json");
        ok(&["gen", "--cohort", "train-default", "--seed", "1", "--out", s(&corpus)]);
        ok(&["train", "--corpus", s(&corpus), "--rounds", "50", "--seed", "1", "--out", s(&m)]);
        m
    })
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &[][..],
        &["frobnicate"],
        &["gen", "--gesture", "RH", "--bogus"],
        &["gen"],
        &["gen", "--gesture", "RH", "--cohort", "train-small"],
        &["detect", "--model", "m.json"],
        &["detect", "--model", "m", "--clip", "c", "--format", "xml"],
        &["gen", "--gesture", "RH", "--seed", "minus-one"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_exits_0() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["gen", "train", "detect", "eval", "dyad", "inspect"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn validation_errors_exit_2_with_one_line() {
    let dir = scratch("invalid");
    let clip = dir.join("bad.jsonl");
    std::fs::write(&clip, "{\"v\":1,\"fps\":30.0,\"meta\":{},\"spans\":[]}\n{\"t\":0.0,\"j\":[[0,0,0]],\"hl\":0,\"hr\":0}\n").unwrap();
    let missing = dir.join("missing.json");
    let empty = scratch("invalid-empty");
    for args in [
        vec!["gen", "--gesture", "XX"],
        vec!["gen", "--gesture", "HUG"],
        vec!["gen", "--cohort", "nope", "--out", s(&dir)],
        vec!["gen", "--gesture", "RH", "--noise=-1"],
        vec!["detect", "--model", s(&missing), "--clip", s(&clip)],
        vec!["detect", "--model", s(model()), "--clip", s(&clip)],
        vec!["train", "--corpus", s(&empty), "--out", s(&missing)],
        vec!["eval", "pilot", "--model", s(model()), "--participants", "0", "--report", s(&missing)],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "));
    }
    let out = run(&["detect", "--model", s(model()), "--clip", s(&clip)]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn gen_then_detect_finds_the_gesture() {
    let dir = scratch("detect");
    let clip = dir.join("c.jsonl");
    ok(&["gen", "--gesture", "RH", "--seed", "7", "--out", s(&clip)]);
    let out = ok(&["detect", "--model", s(model()), "--clip", s(&clip), "--format", "events"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "{text}");
    let fields: Vec<&str> = lines[0].split(' ').collect();
    assert_eq!(fields[0], "RH");
    let frames: Vec<usize> = fields[1..4].iter().map(|f| f.parse().unwrap()).collect();
    assert!(frames[0] <= frames[1] && frames[1] <= frames[2]);
    assert_eq!(fields[4].split('.').nth(1).unwrap().len(), 6);

    let out = ok(&["detect", "--model", s(model()), "--clip", s(&clip), "--format", "csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("gesture,start_frame,peak_frame,end_frame,peak_confidence\nRH,"));
    let out = ok(&["detect", "--model", s(model()), "--clip", s(&clip), "--format", "conf"]);
    let conf = String::from_utf8(out.stdout).unwrap();
    assert!(conf.starts_with("frame,R5,L5,RH,LH,RS,LS,RM,LM\n14,"));
    assert_eq!(conf.lines().count(), 1 + 210 - 14);
}

#[test]
fn gen_to_stdout_is_a_clip() {
    let a = ok(&["gen", "--gesture", "none", "--seed", "3"]).stdout;
    let b = ok(&["gen", "--gesture", "none", "--seed", "3"]).stdout;
    assert_eq!(a, b);
    let clip = socialgest::parse_clip(&a).unwrap();
    assert_eq!(clip.frames.len(), 210);
    assert!(clip.spans.is_empty());
}

#[test]
fn train_is_reproducible() {
    let dir = scratch("train");
    let corpus = dir.join("corpus");
    ok(&["gen", "--cohort", "train-small", "--seed", "2", "--out", s(&corpus)]);
    let (a, b) = (dir.join("a.json"), dir.join("b.json"));
    for m in [&a, &b] {
        ok(&["train", "--corpus", s(&corpus), "--rounds", "10", "--seed", "2", "--out", s(m)]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let out = ok(&["inspect", "--model", s(&a)]);
    let text = String::from_utf8(out.stdout).unwrap();
    let gestures: Vec<&str> = text
        .lines()
        .filter(|l| l.contains("stumps="))
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(gestures, ["R5", "L5", "RH", "LH", "RS", "LS", "RM", "LM"]);
    assert!(text.lines().any(|l| l == "rounds 10"));
}

#[test]
fn pilot_report_rows_sum_to_100() {
    let dir = scratch("pilot");
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    for r in [&a, &b] {
        let out = ok(&["eval", "pilot", "--model", s(model()), "--seed", "42", "--participants", "4", "--report", s(r)]);
        assert!(String::from_utf8(out.stdout).unwrap().starts_with("overall accuracy "));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let report = socialgest::eval::parse_report_csv(&text).unwrap();
    assert_eq!(report.seed, 42);
    for row in &report.percentages {
        assert!((row.iter().sum::<f64>() - 100.0).abs() <= 0.1);
    }
    let txt = dir.join("r.txt");
    ok(&["eval", "pilot", "--model", s(model()), "--participants", "2", "--mat-prompts", "0", "--report", s(&txt)]);
    assert!(std::fs::read_to_string(&txt).unwrap().contains("RM (hand on mat): skipped"));
}

#[test]
fn dyad_session_end_to_end() {
    let dir = scratch("dyad");
    let (a, b) = (dir.join("a.jsonl"), dir.join("b.jsonl"));
    ok(&["gen", "--gesture", "R5", "--seed", "4", "--out", s(&a)]);
    ok(&["gen", "--gesture", "R5", "--seed", "5", "--participant", "9", "--out", s(&b)]);
    let mut traces = Vec::new();
    for name in ["t1.jsonl", "t2.jsonl"] {
        let trace = dir.join(name);
        let out = ok(&[
            "dyad", "--model", s(model()), "--peer-a", s(&a), "--peer-b", s(&b), "--latency-ms", "80",
            "--jitter-ms", "20", "--drop", "0.05", "--seed", "6", "--trace", s(&trace),
        ]);
        let log = String::from_utf8(out.stdout).unwrap();
        for peer in ["A", "B"] {
            let r5 = log
                .lines()
                .filter(|l| l.starts_with(&format!("{peer} ")) && l.contains("\"g\":\"R5\""))
                .count();
            assert_eq!(r5, 1, "{log}");
        }
        traces.push(std::fs::read(&trace).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    let other = dir.join("c.jsonl");
    std::fs::write(&other, ok(&["gen", "--gesture", "R5", "--seed", "4"]).stdout.replace_fps()).unwrap();
    let out = run(&["dyad", "--model", s(model()), "--peer-a", s(&a), "--peer-b", s(&other)]);
    assert_eq!(out.status.code(), Some(2));
}

trait ReplaceFps {
    fn replace_fps(self) -> Vec<u8>;
}

impl ReplaceFps for Vec<u8> {
    /// Same clip re-timed at 15 fps.
    fn replace_fps(self) -> Vec<u8> {
        let mut clip = socialgest::parse_clip(&self).unwrap();
        clip.fps = 15.0;
        for (i, f) in clip.frames.iter_mut().enumerate() {
            f.t = i as f64 / 15.0;
        }
        socialgest::serialize_clip(&clip)
    }
}
