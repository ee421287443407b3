use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspidal-atlas")).arg("--out").arg(out).args(args).output().expect("binary runs")
}

fn params(d3: &str, r2: &str, d4: &str) -> Vec<String> {
    ["--d3", d3, "--r2", r2, "--d4", d4].iter().map(|s| s.to_string()).collect()
}

fn run_with(out: &Path, head: &[&str], tail: &[String]) -> Output {
    let mut args: Vec<&str> = head.to_vec();
    args.extend(tail.iter().map(String::as_str));
    run(out, &args)
}

#[test]
fn classify_writes_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), &["classify"], &params("1.36", "0.35", "0.75"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("classify.json")).unwrap()).unwrap();
    assert_eq!(json["class"], "2(1,0)");
    assert_eq!(json["cusps"], 4);
    assert_eq!(json["cuspidal"], true);
    assert!(fs::read_to_string(dir.path().join("classify.txt")).unwrap().contains("2(1,0)"));

    let o = run_with(dir.path(), &["classify"], &params("0.21", "0.1", "0.05"));
    assert!(o.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("classify.json")).unwrap()).unwrap();
    assert_eq!(json["class"], "binary");
    assert_eq!(json["cuspidal"], false);
}

#[test]
fn invalid_input_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), &["classify"], &params("-1", "0.35", "0.75"));
    assert_eq!(o.status.code(), Some(1));
    let o = run(dir.path(), &["classify", "--d3", "1"]);
    assert_eq!(o.status.code(), Some(1));

    let file = dir.path().join("occupied");
    fs::write(&file, "x").unwrap();
    let o = run_with(&file, &["classify"], &params("1.36", "0.35", "0.75"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn section_csv_has_one_row_per_pixel() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), &["--resolution", "128", "--format", "csv", "section"], &params("2", "1", "1.5"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("section.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rho,z,count"));
    assert_eq!(lines.count(), 128 * 128);
    assert!(!dir.path().join("section.svg").exists());
}

#[test]
fn jointspace_of_row_d_has_two_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), &["jointspace"], &params("1.36", "0.35", "0.75"));
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("jointspace.csv")).unwrap();
    let mut ids: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    ids.dedup();
    assert_eq!(ids, ["0", "1"]);
    assert!(fs::read_to_string(dir.path().join("jointspace.svg")).unwrap().contains("<svg xmlns"));
}

#[test]
fn empty_points_file_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("points.txt");
    fs::write(&pts, "# nothing\n").unwrap();
    let o = run(dir.path(), &["sweep", "--points", pts.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read_to_string(dir.path().join("sweep.csv")).unwrap(),
        "d3,r2,d4,kind,generic,aspects,cusps,class,status\n"
    );
}

#[test]
fn sweep_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("points.txt");
    fs::write(&pts, "0.21,0.1,0.05\n1.36,0.35,0.75\n").unwrap();
    let args = ["sweep", "--points", pts.to_str().unwrap()];
    assert!(run(dir.path(), &args).status.success());
    let csv_path = dir.path().join("sweep.csv");
    let full = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = full.lines().collect();
    assert_eq!(lines.len(), 3);

    // Pretend the run stopped after one row, whose content is a sentinel.
    let sentinel = "0.21,0.1,0.05,sentinel,true,0,0,x,ok";
    fs::write(&csv_path, format!("{}\n{}\n", lines[0], sentinel)).unwrap();
    let cp = dir.path().join("sweep.csv.checkpoint");
    let fingerprint = fs::read_to_string(&cp).unwrap().lines().next().unwrap().to_string();
    fs::write(&cp, format!("{fingerprint}\n1\n")).unwrap();

    assert!(run(dir.path(), &args).status.success());
    let resumed = fs::read_to_string(&csv_path).unwrap();
    let got: Vec<&str> = resumed.lines().collect();
    assert_eq!(got, [lines[0], sentinel, lines[2]]);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(run_with(dir.path(), &["classify"], &params("2", "1", "1.5")).status.success());
        assert!(run_with(dir.path(), &["cusps"], &params("2", "1", "1.5")).status.success());
    }
    for name in ["classify.txt", "classify.json", "cusps.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
