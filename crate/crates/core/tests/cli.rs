use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bdscore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdscore"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the example files into `dir` via `repro --dump-data`.
fn dump(dir: &Path) {
    let o = bdscore(&[
        "repro",
        "--out",
        path(dir),
        "--dump-data",
        "--grid",
        "0.01,100,9",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn repro_reports_every_value_and_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = bdscore(&["repro", "--out", path(a.path())]);
    let second = bdscore(&["repro", "--out", path(b.path())]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(second.status.code(), Some(0));
    let text = stdout(&first);
    assert!(text.contains("18/20 values within tolerance"), "{text}");
    assert_eq!(text.matches(" ok\n").count(), 18);

    let mut names: Vec<String> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "checks.csv",
            "example1_bdeu.csv",
            "example1_bds.csv",
            "example2_bdeu.csv",
            "example2_bds.csv"
        ]
    );
    for name in &names {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
    let curve = fs::read_to_string(a.path().join("example1_bdeu.csv")).unwrap();
    assert_eq!(curve.lines().count(), 202);
    assert!(curve
        .starts_with("alpha,score_name,log_bf,log_bf_reverse,ee_minus,ee_plus,me_minus,me_plus\n"));
}

#[test]
fn score_prints_the_example_family_term() {
    let dir = tempfile::tempdir().unwrap();
    dump(dir.path());
    let csv = dir.path().join("scores.csv");
    let o = bdscore(&[
        "score",
        "--data",
        path(&dir.path().join("example1.csv")),
        "--dag",
        path(&dir.path().join("g_minus.dag")),
        "--score",
        "bdeu",
        "--alpha",
        "1",
        "--out",
        path(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let x_line = text.lines().find(|l| l.starts_with("X ")).unwrap();
    // ln 0.03263 = -3.423
    assert!(
        x_line.contains("-3.423") && x_line.contains("0.03263"),
        "{x_line}"
    );

    let written = fs::read_to_string(&csv).unwrap();
    let x_row = written.lines().find(|l| l.starts_with("X,")).unwrap();
    let value: f64 = x_row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((value - 0.032625390625f64.ln()).abs() < 1e-12);
}

#[test]
fn bayes_factor_of_identical_dags_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    dump(dir.path());
    let dag = dir.path().join("g_plus.dag");
    let out = dir.path().join("bf.csv");
    let o = bdscore(&[
        "bf",
        "--data",
        path(&dir.path().join("example2.csv")),
        "--minus",
        path(&dag),
        "--plus",
        path(&dag),
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("log BF (G- over G+): 0\n"));
    let row = fs::read_to_string(&out).unwrap();
    assert!(row
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("bdeu,1e0,0e0,1e0,indifferent"));
}

#[test]
fn sweep_and_entropy_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    dump(dir.path());
    let data = dir.path().join("example1.csv");
    let out = dir.path().join("sweep.csv");
    let o = bdscore(&[
        "sweep",
        "--data",
        path(&data),
        "--minus",
        path(&dir.path().join("g_minus.dag")),
        "--plus",
        path(&dir.path().join("g_plus.dag")),
        "--score",
        "bdeu,bds,bdla",
        "--grid",
        "0.1,10,3",
        "--out",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 10);

    let entropy = dir.path().join("entropy.csv");
    let o = bdscore(&[
        "entropy",
        "--data",
        path(&data),
        "--dag",
        path(&dir.path().join("g_plus.dag")),
        "--row-mask",
        "all",
        "--out",
        path(&entropy),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&entropy).unwrap();
    assert!(text.starts_with("node,parents,empirical,marginal_posterior,expected_posterior,lemma1_bias,log_bd,me_score\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn learn_and_cpdag_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    dump(dir.path());
    let learned = dir.path().join("learned.dag");
    let log = dir.path().join("moves.csv");
    let o = bdscore(&[
        "learn",
        "--data",
        path(&dir.path().join("example2.csv")),
        "--score",
        "bic",
        "--max-parents",
        "2",
        "--out",
        path(&learned),
        "--move-log",
        path(&log),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(&log)
        .unwrap()
        .starts_with("iteration,move,delta\n"));

    let o = bdscore(&[
        "cpdag",
        "--dag",
        path(&learned),
        "--other",
        path(&learned),
        "--data",
        path(&dir.path().join("example2.csv")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("equivalent true\n"));

    let o = bdscore(&["cpdag", "--dag", path(&dir.path().join("g_plus.dag"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("v-structure").count(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(bdscore(&[]).status.code(), Some(2));
    assert_eq!(bdscore(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        bdscore(&["score", "--data", "x.csv"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bdscore(&["score", "--data", "x.csv", "--dag", "g", "--alpha", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bdscore(&["learn", "--data", "x.csv", "--max-parents", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bdscore(&["--help"]).status.code(), Some(0));

    let missing = bdscore(&[
        "score",
        "--data",
        "/no/such/file.csv",
        "--dag",
        "/no/such/g",
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/no/such/file.csv"));

    let dir = tempfile::tempdir().unwrap();
    dump(dir.path());
    let data = dir.path().join("example1.csv");
    let bad = dir.path().join("bad.dag");
    fs::write(&bad, "X -> Q\n").unwrap();
    let o = bdscore(&["score", "--data", path(&data), "--dag", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));

    let o = bdscore(&[
        "entropy",
        "--data",
        path(&data),
        "--dag",
        path(&dir.path().join("g_plus.dag")),
        "--score",
        "bic",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_documents_csv_columns() {
    let o = bdscore(&["sweep", "--help"]);
    assert!(stdout(&o)
        .contains("alpha,score_name,log_bf,log_bf_reverse,ee_minus,ee_plus,me_minus,me_plus"));
}
