use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sieveclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sieveclust"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn gen_writes_points_as_columns() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("moons.csv");
    let labels = dir.path().join("arcs.txt");
    let out = sieveclust(&[
        "gen",
        "--n",
        "40",
        "--seed",
        "3",
        "--out",
        data.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&data).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.split(',').count() == 40));
    assert_eq!(fs::read_to_string(&labels).unwrap().lines().count(), 40);
}

#[test]
fn path_writes_the_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = sieveclust(&[
        "path",
        "--moons",
        "80",
        "--lambdas",
        "5,2,1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&out_dir.join("path.csv")), 3);
    for f in ["summary.json", "state.json", "manifest.json", "plot_time.csv", "plot_dimension.csv"] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }
    assert_eq!(fs::read_dir(out_dir.join("labels")).unwrap().count(), 3);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("3 certified"), "{stdout}");

    // the saved manifest reproduces the run
    let again = dir.path().join("again");
    let manifest = out_dir.join("manifest.json");
    let text = fs::read_to_string(&manifest)
        .unwrap()
        .replace(out_dir.to_str().unwrap(), again.to_str().unwrap());
    fs::write(&manifest, text).unwrap();
    let out = sieveclust(&["path", "--manifest", manifest.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(rows(&again.join("path.csv")), 3);
}

#[test]
fn manifest_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    let out_dir = dir.path().join("from_manifest");
    fs::write(
        &manifest,
        format!(
            r#"{{"moons": {{"n": 30, "noise": 0.1}}, "lambdas": {{"list": [4.0]}}, "output_dir": {:?}}}"#,
            out_dir
        ),
    )
    .unwrap();
    let ignored = dir.path().join("ignored");
    let out = sieveclust(&[
        "path",
        "--manifest",
        manifest.to_str().unwrap(),
        "--lambdas",
        "5,4,3",
        "--out",
        ignored.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&out_dir.join("path.csv")), 1);
    assert!(!ignored.exists());
}

#[test]
fn solve_reads_csv_input_and_report_re_emits() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("t1.csv");
    fs::write(&input, "# three points on a line\n0,0.5,1\n").unwrap();
    let run = dir.path().join("run");
    let out = sieveclust(&[
        "solve",
        "--lambda",
        "10",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "2",
        "--sequential",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(run.join("path.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    // everything fuses at λ = 10
    let label_file = fs::read_dir(run.join("labels")).unwrap().next().unwrap().unwrap().path();
    let labels = fs::read_to_string(label_file).unwrap();
    assert!(labels.lines().skip(1).all(|l| l.ends_with(",0")));

    let copy = dir.path().join("copy");
    let out = sieveclust(&[
        "report",
        "--state",
        run.join("state.json").to_str().unwrap(),
        "--out",
        copy.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(copy.join("path.csv")).unwrap(), table);
}

#[test]
fn uncertified_runs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("t1.csv");
    fs::write(&input, "0,1,5\n").unwrap();
    // the all-fused guess needs a second round at small λ
    let out = sieveclust(&[
        "solve",
        "--lambda",
        "0.01",
        "--input",
        input.to_str().unwrap(),
        "--max-rounds",
        "1",
        "--out",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("not certified"));
}

#[test]
fn bad_input_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "1,2,3\n4,NaN,6\n").unwrap();
    let out = sieveclust(&["path", "--input", input.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("NaN"), "{err}");

    let out = sieveclust(&["path", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
