use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hardy_bounds::report::Report;
use hardy_bounds::spec::MeasureSpec;
use tempfile::TempDir;

fn hardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path: PathBuf = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

struct Files {
    _dir: TempDir,
    atoms: String,
    other: String,
    far: String,
    counting: String,
    power: String,
    bad: String,
    step: String,
    out: String,
}

fn files() -> Files {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    Files {
        atoms: write(
            d,
            "atoms.json",
            r#"{"type":"atoms","points":[0,1,2],"weights":[1,2,3]}"#,
        ),
        other: write(
            d,
            "other.json",
            r#"{"type":"atoms","points":[0.5,1.5,3],"weights":[1,1,1]}"#,
        ),
        far: write(
            d,
            "far.json",
            r#"{"type":"atoms","points":[5],"weights":[1]}"#,
        ),
        counting: write(
            d,
            "counting.json",
            r#"{"type":"atoms","points":[],"weights":[],"tail":{"start":1}}"#,
        ),
        power: write(
            d,
            "power.json",
            r#"{"type":"density","kind":"power","coefficient":1,"exponent":-2,"support":[1,"inf"]}"#,
        ),
        bad: write(
            d,
            "bad.json",
            r#"{"type":"atoms","points":[2,1],"weights":[1,1]}"#,
        ),
        step: write(d, "step.json", r#"{"family":"step","x0":1.0,"height":2.0}"#),
        out: d.join("report.json").to_str().unwrap().to_owned(),
        _dir: dir,
    }
}

#[test]
fn kqp_reports_the_sharp_factor() {
    let o = hardy(&["kqp", "--p", "2", "--q", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let k = r.factors.unwrap().k_sharp;
    assert!((k - 2.0).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&hardy(&["kqp", "--p", "1", "--q", "2"])), 2);
    assert_eq!(code(&hardy(&["kqp", "--p", "2"])), 2);
    assert_eq!(code(&hardy(&["frobnicate"])), 2);
    assert_eq!(code(&hardy(&["reproduce", "nonsense"])), 2);
    let f = files();
    let o = hardy(&[
        "rayleigh", "--nu", &f.atoms, "--mu", &f.other, "--p", "2", "--q", "2", "--family", "bliss",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_specs_exit_3_and_name_the_field() {
    let f = files();
    let o = hardy(&[
        "bound", "--nu", &f.bad, "--mu", &f.power, "--p", "2", "--q", "2",
    ]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("$.points[1]"), "{}", stderr(&o));
    let o = hardy(&[
        "bound",
        "--nu",
        "/nonexistent/nu.json",
        "--mu",
        &f.power,
        "--p",
        "2",
        "--q",
        "2",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn strict_divergence_exits_4_after_writing() {
    let f = files();
    let args = [
        "bound",
        "--nu",
        &f.counting,
        "--mu",
        &f.power,
        "--p",
        "2",
        "--q",
        "2",
        "--dual",
    ];
    let o = hardy(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut strict = args.to_vec();
    strict.push("--strict");
    let o = hardy(&strict);
    assert_eq!(code(&o), 4);
    let r = Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let b = r.bound.unwrap();
    assert!(b.b_divergent);
    assert!(b.a_lower.is_none());
}

#[test]
fn zero_norm_trial_exits_5() {
    let f = files();
    let o = hardy(&[
        "rayleigh", "--nu", &f.far, "--mu", &f.other, "--p", "2", "--q", "2", "--trial", &f.step,
    ]);
    assert_eq!(code(&o), 5);
}

#[test]
fn exit_code_tracks_the_table() {
    let o = hardy(&["reproduce", "mixed2"]);
    let r = Report::from_json(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert!(!r.table.is_empty());
    assert_eq!(code(&o) == 0, r.all_pass());
    assert_eq!(code(&o) == 1, !r.all_pass());
}

#[test]
fn same_seed_gives_identical_bytes() {
    let f = files();
    let run = |seed: &str| {
        let o = hardy(&[
            "bound",
            "--nu",
            &f.atoms,
            "--mu",
            &f.other,
            "--p",
            "2",
            "--q",
            "3",
            "--certify",
            "--seed",
            seed,
            "--out",
            &f.out,
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(o.stdout.is_empty());
        std::fs::read(&f.out).unwrap()
    };
    let first = run("9");
    assert_eq!(first, run("9"));
    let r = Report::from_json(std::str::from_utf8(&first).unwrap()).unwrap();
    assert!(r.metadata.wall_clock_seconds.is_none());
}

#[test]
fn timing_is_opt_in() {
    let o = hardy(&["kqp", "--p", "2", "--q", "3", "--timing"]);
    let r = Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(r.metadata.wall_clock_seconds.is_some());
}

#[test]
fn reports_echo_the_parsed_specs() {
    let f = files();
    let o = hardy(&[
        "bound", "--nu", &f.atoms, "--mu", &f.power, "--p", "2", "--q", "2",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let nu = MeasureSpec::from_json(&std::fs::read_to_string(&f.atoms).unwrap()).unwrap();
    let mu = MeasureSpec::from_json(&std::fs::read_to_string(&f.power).unwrap()).unwrap();
    assert_eq!(r.inputs.nu, Some(nu));
    assert_eq!(r.inputs.mu, Some(mu));
}

#[test]
fn csv_output_is_the_table() {
    let o = hardy(&["check", "--seed", "4", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("scenario,quantity,expected,computed,tolerance,result")
    );
    assert_eq!(lines.clone().count(), 6);
    assert!(lines.all(|l| l.ends_with(",PASS")));
}
