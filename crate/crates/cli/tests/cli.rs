use std::path::Path;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motioncomic"))
        .args(args)
        .current_dir(dir)
        .env_remove("DB_LLM_API_KEY")
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn analyze(dir: &Path, story: &str) -> Output {
    run(
        dir,
        &[
            "analyze",
            "--story",
            &fixture(&format!("{story}.txt")),
            "--fixture",
            &fixture(&format!("{story}.analyzer.json")),
            "--out",
            "p.json",
        ],
    )
}

#[test]
fn analyze_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&analyze(a.path(), "red_riding_hood")), 0);
    assert_eq!(code(&analyze(b.path(), "red_riding_hood")), 0);
    let pa = std::fs::read(a.path().join("p.json")).unwrap();
    assert_eq!(pa, std::fs::read(b.path().join("p.json")).unwrap());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(d.path(), &["analyze", "--story", "missing.txt", "--out", "x.json"])), 2);
    assert_eq!(code(&run(d.path(), &["analyze", "--story", &fixture("red_riding_hood.txt"), "--out", "x.json"])), 3);
    let o = run(
        d.path(),
        &["analyze", "--story", &fixture("red_riding_hood.txt"), "--fixture", &fixture("sleeping_beauty.analyzer.json"), "--out", "x.json"],
    );
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&run(d.path(), &["bogus"])), 2);

    assert_eq!(code(&analyze(d.path(), "sleeping_beauty")), 0);
    std::fs::write(
        d.path().join("bad.json"),
        r#"{"version":1,"mutations":[{"op":"add_clip","scene":0,"action":1,"template_id":"ptrans.teleport"}]}"#,
    )
    .unwrap();
    let o = run(d.path(), &["compile", "--project", "p.json", "--authoring", "bad.json", "--out", "o"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ptrans.teleport"));
    assert!(!d.path().join("o").exists());
    std::fs::write(d.path().join("v9.json"), r#"{"version":9,"mutations":[]}"#).unwrap();
    assert_eq!(code(&run(d.path(), &["compile", "--project", "p.json", "--authoring", "v9.json", "--out", "o"])), 4);
    assert_eq!(code(&run(d.path(), &["render", "--project", "p.json", "--scene", "0", "--out", "r"])), 2);
}

#[test]
fn empty_script_exports_static_layouts() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&analyze(d.path(), "sleeping_beauty")), 0);
    std::fs::write(d.path().join("empty.json"), r#"{"version":1,"mutations":[]}"#).unwrap();
    let o = run(d.path(), &["compile", "--project", "p.json", "--authoring", "empty.json", "--out", "o"]);
    assert_eq!(code(&o), 2, "nothing saved, nothing to export");
    std::fs::write(
        d.path().join("save.json"),
        r#"{"version":1,"mutations":[{"op":"place","scene":0,"entity":"king"},{"op":"save_layout","scene":0}]}"#,
    )
    .unwrap();
    let o = run(d.path(), &["compile", "--project", "p.json", "--authoring", "save.json", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let x: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("o/motioncomic.json")).unwrap()).unwrap();
    assert_eq!(x["scenes"].as_array().unwrap().len(), 1);
    assert_eq!(x["scenes"][0]["frame_count"], 1);
}

#[test]
fn render_follows_frame_count_law() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&analyze(d.path(), "sleeping_beauty")), 0);
    let o = run(d.path(), &["compile", "--project", "p.json", "--authoring", &fixture("sleeping_beauty.authoring.json"), "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let x: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("o/motioncomic.json")).unwrap()).unwrap();
    let duration = x["scenes"][1]["duration"].as_f64().unwrap();
    for fps in [1u32, 12, 30] {
        let dir = format!("r{fps}");
        let o = run(d.path(), &["render", "--project", "o/project.json", "--scene", "1", "--fps", &fps.to_string(), "--out", &dir]);
        assert_eq!(code(&o), 0);
        let frames = std::fs::read_dir(d.path().join(&dir).join("scene-001")).unwrap().count();
        assert_eq!(frames, (duration * fps as f64 + 1e-9).floor() as usize + 1);
    }
}

#[test]
fn suggest_matches_design_space() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&analyze(d.path(), "sleeping_beauty")), 0);
    let o = run(d.path(), &["suggest", "--project", "p.json", "--scene", "1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let ptrans: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("action 0 "))
        .skip(1)
        .take_while(|l| l.starts_with(' '))
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(ptrans, ["ptrans.path", "ptrans.dis_reappear"]);
    assert_eq!(text, String::from_utf8(run(d.path(), &["suggest", "--project", "p.json", "--scene", "1"]).stdout).unwrap());
    let o = run(d.path(), &["design-space"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object());
}
