use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use igmd_cli::{manifest_path_for, RunManifest};

fn igmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igmd"))
        .args(args)
        .output()
        .expect("run igmd")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    for rec in r.records() {
        rows.push(rec.unwrap().iter().map(String::from).collect());
    }
    rows
}

#[test]
fn decompose_identity() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("eye.txt");
    fs::write(&m, "3 3\n1 0 0\n0 1 0\n0 0 1\n").unwrap();
    let out = dir.path().join("out");
    let o = igmd(&[
        "decompose",
        "--matrix-file",
        p(&m),
        "--iterations",
        "3",
        "--out-dir",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    for f in ["q.txt", "r.txt", "s.txt", "trace.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let r = igmd::matcore::parse_matrix(&fs::read_to_string(out.join("r.txt")).unwrap()).unwrap();
    assert!(r.sub(&igmd::ComplexMatrix::identity(3)).unwrap().max_abs() < 1e-12);

    let rows = read_csv(&out.join("trace.csv"));
    assert_eq!(rows[0], ["iteration", "r_11", "r_22", "r_33", "F", "mse"]);
    assert_eq!(rows.len(), 1 + 4);
    for row in &rows[1..] {
        assert!(row[5].parse::<f64>().unwrap().abs() < 1e-24);
    }
}

#[test]
fn decompose_diag_8_1_gm_one_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("d.txt");
    fs::write(&m, "2 2\n8 0\n0 1\n").unwrap();
    let o = igmd(&[
        "decompose",
        "--matrix-file",
        p(&m),
        "--kind",
        "gm",
        "--iterations",
        "1",
        "--out-dir",
        p(dir.path()),
    ]);
    assert!(o.status.success());
    let rows = read_csv(&dir.path().join("trace.csv"));
    let r11: f64 = rows[2][1].parse().unwrap();
    let r22: f64 = rows[2][2].parse().unwrap();
    assert!((r11 - 2.828427).abs() < 1e-6 && (r22 - 2.828427).abs() < 1e-6);
}

#[test]
fn malformed_matrix_exits_2_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.txt");
    fs::write(&m, "2 2\n1 0\n0 banana\n").unwrap();
    let o = igmd(&[
        "decompose",
        "--matrix-file",
        p(&m),
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn singular_matrix_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("sing.txt");
    fs::write(&m, "2 2\n1 2\n2 4\n").unwrap();
    let o = igmd(&[
        "decompose",
        "--matrix-file",
        p(&m),
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let o = igmd(&["mse", "--inits", "sqrd", "--out-csv", p(&csv)]);
    assert_eq!(o.status.code(), Some(2));
    let o = igmd(&["ber", "--snr-list", "", "--out-csv", p(&csv)]);
    assert_eq!(o.status.code(), Some(2));
    let o = igmd(&["ber", "--out-csv", p(&csv)]);
    assert_eq!(o.status.code(), Some(2));
    let o = igmd(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mse_csv_shape_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("mse.csv");
    let o = igmd(&[
        "mse",
        "--trials",
        "50",
        "--iterations",
        "10",
        "--seed",
        "3",
        "--out-csv",
        p(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&csv);
    assert_eq!(rows[0], ["init", "kind", "iteration", "mean_mse"]);
    assert_eq!(rows.len() - 1, 4 * 3 * 11);
    assert_eq!(rows[1][..3], ["svd", "am", "0"]);

    let m = RunManifest::read(&manifest_path_for(&csv)).unwrap();
    assert_eq!(m.command, "mse");
    assert_eq!(m.seed, Some(3));
    assert_eq!(m.params["trials"], 50);
    assert_eq!(m.params["inits"][1], "intrlv-svd");
}

#[test]
fn ber_high_snr_exact_gmd_is_error_free() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ber.csv");
    let o = igmd(&[
        "ber",
        "--iterations-list",
        "--snr-list",
        "40",
        "--bits",
        "1000000",
        "--out-csv",
        p(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&csv);
    assert_eq!(rows.len() - 1, 1);
    assert_eq!(rows[1][2], "exact-gmd");
    assert!(rows[1][6].parse::<f64>().unwrap() < 1e-5);

    let o = igmd(&[
        "ber",
        "--iterations-list",
        "50",
        "--snr-list",
        "40",
        "--bits",
        "1000000",
        "--out-csv",
        p(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&csv);
    assert_eq!(
        rows[0],
        [
            "init",
            "kind",
            "iterations",
            "snr_db",
            "bits",
            "bit_errors",
            "ber"
        ]
    );
    assert_eq!(rows.len() - 1, 2);
    for row in &rows[1..] {
        assert!(row[4].parse::<u64>().unwrap() >= 1_000_000);
        assert!(row[6].parse::<f64>().unwrap() < 1e-5, "{row:?}");
    }
    assert_eq!(rows[2][2], "exact-gmd");
}

#[test]
fn same_seed_same_bit_errors() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let o = igmd(&[
            "ber",
            "--init",
            "qr",
            "--kind",
            "am",
            "--iterations-list",
            "1,2",
            "--snr-list",
            "10,14",
            "--bits",
            "20000",
            "--trials",
            "100",
            "--seed",
            "9",
            "--out-csv",
            p(&csv),
        ]);
        assert!(o.status.success());
        read_csv(&csv)
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("mse.csv");
    let o = igmd(&[
        "mse",
        "--trials",
        "40",
        "--iterations",
        "4",
        "--inits",
        "qr,vbqr",
        "--kinds",
        "hm",
        "--seed",
        "12",
        "--out-csv",
        p(&csv),
    ]);
    assert!(o.status.success());
    let again = dir.path().join("again.csv");
    let o = igmd(&[
        "replay",
        p(&manifest_path_for(&csv)),
        "--out",
        p(&again),
        "--threads",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&csv).unwrap(), fs::read(&again).unwrap());

    let ber = dir.path().join("ber.csv");
    let o = igmd(&[
        "ber",
        "--snr-list",
        "12,16",
        "--bits",
        "10000",
        "--trials",
        "50",
        "--out-csv",
        p(&ber),
    ]);
    assert!(o.status.success());
    let ber2 = dir.path().join("ber2.csv");
    let o = igmd(&["replay", p(&manifest_path_for(&ber)), "--out", p(&ber2)]);
    assert!(o.status.success());
    assert_eq!(fs::read(&ber).unwrap(), fs::read(&ber2).unwrap());

    let m = dir.path().join("h.txt");
    fs::write(&m, "2 2\n1+1i 0.5\n-0.25i 2\n").unwrap();
    let d1 = dir.path().join("d1");
    let o = igmd(&[
        "decompose",
        "--matrix-file",
        p(&m),
        "--init",
        "vbqr",
        "--kind",
        "am",
        "--out-dir",
        p(&d1),
    ]);
    assert!(o.status.success());
    let d2 = dir.path().join("d2");
    let o = igmd(&["replay", p(&d1.join("manifest.json")), "--out", p(&d2)]);
    assert!(o.status.success());
    for f in ["q.txt", "r.txt", "s.txt", "trace.csv"] {
        assert_eq!(
            fs::read(d1.join(f)).unwrap(),
            fs::read(d2.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn replay_rejects_garbage_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    fs::write(&m, "{not json").unwrap();
    assert_eq!(igmd(&["replay", p(&m)]).status.code(), Some(2));
    fs::write(
        &m,
        r#"{"command":"dance","params":{},"seed":null,"version":"0","duration_secs":0}"#,
    )
    .unwrap();
    assert_eq!(igmd(&["replay", p(&m)]).status.code(), Some(2));
}
