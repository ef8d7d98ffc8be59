use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lsfb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsfb"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    lsfb(dir, args).status.code().unwrap()
}

fn trained(dir: &Path) {
    assert_eq!(code(dir, &["gen", "--dataset", "db3", "--out", "d.csv"]), 0);
    let args = [
        "train",
        "--data",
        "d.csv",
        "--model",
        "m.txt",
        "--resolution",
        "24",
        "--max-iter",
        "50",
    ];
    assert_eq!(code(dir, &args), 0);
}

#[test]
fn usage_errors_exit_with_one() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    assert_eq!(code(d, &[]), 1);
    assert_eq!(code(d, &["bogus"]), 1);
    assert_eq!(code(d, &["gen", "--dataset", "db9", "--out", "x.csv"]), 1);
    assert_eq!(
        code(
            d,
            &["train", "--dataset", "toy", "--model", "m", "--beta", "-1"]
        ),
        1
    );
    assert_eq!(
        code(
            d,
            &[
                "train",
                "--dataset",
                "toy",
                "--model",
                "m",
                "--set",
                "nonsense=1"
            ]
        ),
        1
    );
    assert_eq!(
        code(
            d,
            &[
                "train",
                "--dataset",
                "toy",
                "--data",
                "x.csv",
                "--model",
                "m"
            ]
        ),
        1
    );
    assert_eq!(code(d, &["--help"]), 0);
    assert_eq!(code(d, &["--version"]), 0);
}

#[test]
fn data_errors_exit_with_two() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    assert_eq!(
        code(
            d,
            &["predict", "--model", "missing", "--data", "x.csv", "--out", "p.csv"]
        ),
        2
    );
    fs::write(d.join("bad.csv"), "x,label\n1.0,1\nfoo,0\n").unwrap();
    assert_eq!(code(d, &["train", "--data", "bad.csv", "--model", "m"]), 2);
    fs::write(d.join("flat.csv"), "x,label\n1,1\n1,1\n1,0\n1,0\n1,0\n").unwrap();
    assert_eq!(code(d, &["train", "--data", "flat.csv", "--model", "m"]), 2);
    fs::write(d.join("bad.model"), "not a model\n").unwrap();
    assert_eq!(
        code(d, &["frontier", "--model", "bad.model", "--out", "f.csv"]),
        2
    );
    assert_eq!(
        code(d, &["eval", "--config", "none.cfg", "--out", "r.csv"]),
        2
    );

    // a model of two features cannot label three-column rows
    trained(d);
    fs::write(d.join("wide.csv"), "a,b,c\n1,2,3\n").unwrap();
    assert_eq!(
        code(
            d,
            &["predict", "--model", "m.txt", "--data", "wide.csv", "--out", "p.csv"]
        ),
        2
    );
}

#[test]
fn numerical_failures_exit_with_three() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    assert_eq!(code(d, &["gen", "--dataset", "db3", "--out", "d.csv"]), 0);
    // a start region smaller than a cell that barely moves leaves one sign everywhere
    let frozen = [
        "--max-iter",
        "1",
        "--set",
        "dt=1e-12",
        "--set",
        "init=sphere:0.0123,0.0456:0.000001",
    ];
    assert_eq!(
        code(
            d,
            &[
                &[
                    "train",
                    "--data",
                    "d.csv",
                    "--model",
                    "m.txt",
                    "--resolution",
                    "16"
                ][..],
                &frozen
            ]
            .concat()
        ),
        0
    );
    let out = lsfb(d, &["frontier", "--model", "m.txt", "--out", "f.csv"]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn commands_write_the_documented_columns() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    trained(d);
    let head = |f: &str| {
        fs::read_to_string(d.join(f))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(head("d.csv"), "x0,x1,label");

    assert_eq!(
        code(
            d,
            &[
                "predict",
                "--model",
                "m.txt",
                "--data",
                "d.csv",
                "--labelled",
                "--out",
                "p.csv"
            ]
        ),
        0
    );
    let pred = fs::read_to_string(d.join("p.csv")).unwrap();
    let rows = fs::read_to_string(d.join("d.csv")).unwrap().lines().count();
    assert_eq!(pred.lines().next(), Some("row,label,value"));
    assert_eq!(pred.lines().count(), rows);

    assert_eq!(
        code(d, &["frontier", "--model", "m.txt", "--out", "f.csv"]),
        0
    );
    assert_eq!(head("f.csv"), "x,y");
    assert_eq!(code(d, &["field", "--model", "m.txt", "--out", "u.csv"]), 0);
    assert_eq!(head("u.csv"), "x0,x1,value");
    assert_eq!(
        fs::read_to_string(d.join("u.csv")).unwrap().lines().count(),
        1 + 25 * 25
    );
    assert_eq!(code(d, &["field", "--model", "m.txt", "--out", "u.pgm"]), 0);
    assert!(fs::read(d.join("u.pgm")).unwrap().starts_with(b"P"));

    let sweep = [
        "sweep-beta",
        "--dataset",
        "db3",
        "--betas",
        "0.5,2",
        "--repetitions",
        "1",
        "--folds",
        "2",
    ];
    let rest = [
        "--resolution",
        "16",
        "--max-iter",
        "20",
        "--out",
        "s.csv",
        "--raw",
        "r.csv",
    ];
    assert_eq!(code(d, &[&sweep[..], &rest].concat()), 0);
    let table = fs::read_to_string(d.join("s.csv")).unwrap();
    // comment line, header, 2 classifiers x 2 betas
    assert_eq!(table.lines().count(), 6);
    assert_eq!(
        fs::read_to_string(d.join("r.csv")).unwrap().lines().count(),
        1 + 2 * 2 * 2
    );
}

#[test]
fn seed_flag_changes_generated_data() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    assert_eq!(
        code(
            d,
            &["--seed", "1", "gen", "--dataset", "db1", "--out", "a.csv"]
        ),
        0
    );
    assert_eq!(
        code(
            d,
            &["gen", "--dataset", "db1", "--out", "b.csv", "--seed", "1"]
        ),
        0
    );
    assert_eq!(
        code(
            d,
            &["--seed", "2", "gen", "--dataset", "db1", "--out", "c.csv"]
        ),
        0
    );
    let read = |f: &str| fs::read(d.join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
}
