use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn msh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msh")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = msh(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    ok(&["generate", "lines3d", "--structures", "3", "--seed", "5", "--out", p(&a)]);
    ok(&["generate", "lines3d", "--structures", "3", "--seed", "5", "--out", p(&b)]);
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().count(), 1 + 700);
    assert_eq!(text.lines().next().unwrap(), "x,y,z,label");
}

#[test]
fn generate_to_a_missing_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = msh(&["generate", "star5", "--out", p(&dir.path().join("no/such/file.csv"))]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn eval_prints_two_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, labels: &[usize]| {
        let path = dir.path().join(name);
        let body: String = labels.iter().map(|l| format!("{l}\n")).collect();
        fs::write(&path, format!("label\n{body}")).unwrap();
        path
    };
    let gt = write("gt.csv", &[1, 1, 2, 2, 0]);
    let pred = write("pred.csv", &[2, 2, 1, 1, 1]);
    let permuted = write("perm.csv", &[2, 2, 1, 1, 0]);

    let out = ok(&["eval", p(&pred), p(&gt)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "20.00");
    let out = ok(&["eval", p(&permuted), p(&gt)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.00");
    let out = ok(&["eval", p(&gt), p(&gt)]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.00");

    let short = write("short.csv", &[1, 1]);
    assert!(!msh(&["eval", p(&short), p(&gt)]).status.success());
}

#[test]
fn fit_star5_finds_five_lines() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("star.csv");
    ok(&["generate", "star5", "--seed", "1", "--out", p(&data)]);
    let (result, labels, trace, plot) =
        (dir.path().join("r.json"), dir.path().join("l.csv"), dir.path().join("t.json"), dir.path().join("p.svg"));
    let flags =
        ["--model", "line2d", "--k-ikose", "45", "--was-fraction", "0.1", "--proximity-sigma", "42.43", "--seed", "3"];
    let mut args = vec!["fit", p(&data)];
    args.extend(flags);
    args.extend(["--output", p(&result), "--labels", p(&labels), "--mtd-trace", p(&trace), "--plot", p(&plot)]);
    ok(&args);

    let json: serde_json::Value = serde_json::from_slice(&fs::read(&result).unwrap()).unwrap();
    assert_eq!(json["modes"].as_array().unwrap().len(), 5);
    assert_eq!(fs::read_to_string(&labels).unwrap().lines().count(), 1 + 450);
    let trace: serde_json::Value = serde_json::from_slice(&fs::read(&trace).unwrap()).unwrap();
    assert_eq!(trace.as_array().unwrap().len(), json["sampled_count"].as_u64().unwrap() as usize);
    let svg = fs::read_to_string(&plot).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    let mut again = vec!["fit", p(&data)];
    again.extend(flags);
    let stdout = ok(&again).stdout;
    assert_eq!(stdout, fs::read(&result).unwrap());

    let out = ok(&["eval", p(&labels), p(&data)]);
    let err: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(err < 20.0, "{err}");
}

#[test]
fn fit_rejects_mismatched_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("scene.csv");
    ok(&["generate", "planar-scene", "--inliers", "20", "--outliers", "10", "--out", p(&data)]);
    let out = msh(&["fit", p(&data), "--model", "circle"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
}

#[test]
fn fit_dumps_the_hypergraph() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("c.csv");
    ok(&["generate", "circles", "--structures", "2", "--inliers", "40", "--outliers", "20", "--out", p(&data)]);
    let graph = dir.path().join("g.json");
    ok(&["fit", p(&data), "--model", "circle", "--hypotheses", "200", "--k-ikose", "20", "--hypergraph", p(&graph)]);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&graph).unwrap()).unwrap();
    assert!(json.is_object());
}

#[test]
fn bench_single_repeat_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let records = dir.path().join("r.json");
    ok(&[
        "--threads",
        "2",
        "bench",
        "star5",
        "--repeats",
        "1",
        "--hypotheses",
        "1000",
        "--seed",
        "9",
        "--csv",
        p(&table),
        "--json",
        p(&records),
    ]);
    let text = fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "method,star5 Std.,star5 Avg.,star5 Min.");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "0.00");
    assert_eq!(row[2], row[3]);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&records).unwrap()).unwrap();
    assert_eq!(json[0]["records"].as_array().unwrap().len(), 1);
}

#[test]
fn bench_custom_needs_data() {
    assert!(!msh(&["bench", "custom", "--repeats", "1"]).status.success());
}
