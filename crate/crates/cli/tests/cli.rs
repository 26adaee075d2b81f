use std::path::Path;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> String {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).to_string_lossy().into_owned()
}

/// Runs the binary; returns exit code, stdout, stderr.
fn mpgame<const N: usize>(args: [&str; N]) -> (i32, String, String) {
    let Output { status, stdout, stderr } = Command::new(env!("CARGO_BIN_EXE_mpgame")).args(args).output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn compile(machine: &str, tag: &str) -> String {
    let out = scratch(&format!("{tag}-{machine}.json"));
    let (code, stdout, _) = mpgame(["compile", &fixture(machine), "--out", &out]);
    assert_eq!(code, 0, "{stdout}");
    out
}

#[test]
fn validate_exit_codes() {
    let (code, out, _) = mpgame(["validate", &fixture("m_halt.tsm")]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = mpgame(["validate", &fixture("bad_side.tsm")]);
    assert_eq!(code, 1);
    assert_eq!(out.lines().count(), 1, "{out}");
    let (code, _, err) = mpgame(["validate", "/definitely/missing.tsm"]);
    assert_eq!(code, 2);
    assert!(err.contains("missing.tsm"), "{err}");
    let (code, _, _) = mpgame(["validate", &fixture("standard/add.mm")]);
    assert_eq!(code, 0);
}

#[test]
fn compile_writes_layout_header_and_dot() {
    for (m, k) in [("m_halt.tsm", 8), ("m_transfer.tsm", 10)] {
        let g = compile(m, "header");
        let text = std::fs::read_to_string(&g).unwrap();
        assert!(text.lines().next().unwrap().contains(&format!("\"dims\":{k}")), "{m}");
    }
    let dot = scratch("halt.dot");
    let out = scratch("halt2.json");
    let (code, _, _) = mpgame(["compile", &fixture("m_halt.tsm"), "--out", &out, "--dot", &dot]);
    assert_eq!(code, 0);
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("digraph"));
    let (code, _, _) = mpgame(["compile", &fixture("bad_side.tsm"), "--out", &scratch("bad.json")]);
    assert_eq!(code, 1);
}

#[test]
fn simulate_summaries() {
    let g = compile("m_halt.tsm", "sim");
    let (code, out, _) = mpgame(["simulate", &g, "--halt-bound", "11"]);
    assert_eq!(code, 0);
    assert!(out.contains("lasso at qf") && out.contains("condition: false"), "{out}");

    let g = compile("m_loop.tsm", "sim");
    let (code, out, _) = mpgame(["simulate", &g, "--halt-bound", "11", "--horizon", "100000"]);
    assert_eq!(code, 0);
    assert!(out.contains("no blame") && out.contains("condition estimate: satisfied at all checkpoints"), "{out}");

    let (code, _, err) = mpgame(["simulate", &g, "--p2", "nobody"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = mpgame(["simulate", &g]);
    assert_eq!(code, 2, "referee without a halting bound");
}

#[test]
fn pipeline_compile_simulate_monitor() {
    for m in ["m_halt.tsm", "m_loop.tsm", "m_transfer.tsm"] {
        let g = compile(m, "pipe");
        let trace = scratch(&format!("{m}.trace"));
        let (code, _, err) = mpgame(["simulate", &g, "--halt-bound", "20", "--horizon", "20000", "--trace", &trace]);
        assert_eq!(code, 0, "{m}: {err}");
        let (code, out, err) = mpgame(["monitor", &g, "--trace", &trace, "--halt-bound", "20", "--lemmas", "L2,L3,L4,L5,L6,L7"]);
        assert_eq!(code, 0, "{m}: {out}{err}");
        // the same play, run inline, gives the same reports
        let (code2, out2, _) = mpgame(["monitor", &g, "--halt-bound", "20", "--horizon", "20000", "--lemmas", "L2,L3,L4,L5,L6,L7"]);
        assert_eq!((code, &out), (code2, &out2), "{m}");
    }
}

#[test]
fn monitor_verdicts() {
    let halt = fixture("m_halt.tsm");
    let (code, out, _) = mpgame(["monitor", &halt, "--p1", "cheat:1:zero-when-positive", "--halt-bound", "11", "--max-resets", "3", "--lemmas", "L2,L5"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("L5 pass"), "{out}");

    let (code, out, _) = mpgame(["monitor", &halt, "--p1", "stretch:2:2", "--p2", "never-blame", "--horizon", "2000", "--halt-bound", "11", "--lemmas", "L3"]);
    assert_eq!(code, 1);
    assert!(out.contains("first violation of L3 at round "), "{out}");

    // honest play passes everything except L1, which honest play cannot meet
    let looping = fixture("m_loop.tsm");
    let (code, out, _) = mpgame(["monitor", &looping, "--halt-bound", "11"]);
    assert_eq!(code, 1);
    assert!(out.contains("L1 FAIL") && out.contains("L3 pass") && out.contains("L4 pass") && out.contains("L6 pass"), "{out}");

    let (code, out, _) = mpgame(["monitor", &halt, "--halt-bound", "11", "--lemmas", "P1"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = mpgame(["monitor", &looping, "--p2", "spurious", "--max-resets", "15", "--lemmas", "P2", "--delta", "1/11", "--delta", "1/20"]);
    assert_eq!(code, 0, "{out}");
    let (code, _, _) = mpgame(["monitor", &looping, "--halt-bound", "11", "--lemmas", "L9"]);
    assert_eq!(code, 2);
}

#[test]
fn expr_eval_and_export() {
    let (code, out, _) = mpgame(["expr-eval", "--lv", "0", "0", "0", "0", "0", "0", "-1", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains("E = -1") && out.contains("F = 1") && out.contains("condition: false"), "{out}");
    let e = scratch("e.expr");
    std::fs::write(&e, "max(infavg(0), sum(supavg(1), neg(infavg(1))))\n").unwrap();
    let (code, out, _) = mpgame(["expr-eval", &e, "--lv", "-1", "1/3", "0", "1"]);
    assert_eq!(code, 0);
    assert!(out.trim_end().ends_with("= 2/3"), "{out}");
    let (code, _, _) = mpgame(["expr-eval", "--lv", "1", "2", "3"]);
    assert_eq!(code, 2);

    let g = compile("m_loop.tsm", "export");
    let (code, out, _) = mpgame(["export", &g, "--format", "json"]);
    assert_eq!(code, 0);
    assert_eq!(out, std::fs::read_to_string(&g).unwrap());
    let (code, out, _) = mpgame(["export", &g, "--format", "dot"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph") && out.contains("cluster_"));
}
