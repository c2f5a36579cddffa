use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use c3ma::io::{read_matrix_csv, read_matrix_market_file, write_matrix_csv, CompactRecord, ResultRecord};
use c3ma::linalg::Matrix;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_c3ma"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_data(dir: &Path, name: &str, m: &Matrix) -> String {
    let path = dir.join(name);
    write_matrix_csv(std::fs::File::create(&path).unwrap(), m).unwrap();
    path.to_str().unwrap().to_owned()
}

fn lcg_matrix(p: usize, n: usize, seed: u64) -> Matrix {
    let mut s = seed | 1;
    Matrix::from_fn(p, n, |_, _| {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    })
}

#[test]
fn solve_fixture_covariance() {
    let out = run(&[
        "solve",
        "--cov",
        fixture("diag_4100.mtx").to_str().unwrap(),
        "--kappa",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rec: ResultRecord = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((rec.mu - 1.0833333333).abs() < 1e-9);
    assert_eq!((rec.alpha, rec.beta, rec.p), (1, 2, 4));
    assert_eq!(rec.schema_version, 1);
    assert!(!rec.feasible_short_circuit);
}

#[test]
fn solve_data_writes_compact_and_dense() {
    let dir = tempfile::tempdir().unwrap();
    let x = write_data(dir.path(), "x.csv", &lcg_matrix(12, 5, 3));
    let compact = dir.path().join("out.json");
    let dense = dir.path().join("out.mtx");
    let result = dir.path().join("result.json");
    let out = run(&[
        "solve",
        "--input",
        &x,
        "--kappa",
        "1e4",
        "--algorithm",
        "mod-svd",
        "--compact",
        compact.to_str().unwrap(),
        "--dense",
        dense.to_str().unwrap(),
        "--result",
        result.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let rec: ResultRecord = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!((rec.p, rec.n), (12, Some(5)));
    assert!((rec.kappa_achieved / 1e4 - 1.0).abs() < 1e-8);

    let c: CompactRecord = serde_json::from_str(&std::fs::read_to_string(&compact).unwrap()).unwrap();
    assert_eq!(c.columns.len(), rec.beta - 1);
    let from_compact = c.into_compact(12).unwrap().densify();
    let from_dense = read_matrix_market_file(&dense).unwrap();
    let diff = from_compact.as_matrix().sub(from_dense.as_matrix()).frobenius_norm();
    assert!(diff <= 1e-10 * from_dense.as_matrix().frobenius_norm());
}

#[test]
fn solve_validation_exit_codes() {
    let cov = fixture("diag_4100.mtx");
    let cov = cov.to_str().unwrap();
    assert_eq!(run(&["solve", "--cov", cov, "--kappa", "0.5"]).status.code(), Some(2));
    assert_eq!(
        run(&["solve", "--cov", cov, "--kappa", "3", "--algorithm", "gr-svd"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "--cov", cov, "--kappa", "3", "--algorithm", "mod-svd"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["solve", "--kappa", "3"]).status.code(), Some(2));
    assert_eq!(
        run(&["solve", "--cov", "/nonexistent.mtx", "--kappa", "3"])
            .status
            .code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let zero = write_data(dir.path(), "zero.csv", &Matrix::zeros(4, 2));
    assert_eq!(
        run(&["solve", "--input", &zero, "--kappa", "10"]).status.code(),
        Some(3)
    );
    let both = run(&["solve", "--input", &zero, "--cov", cov, "--kappa", "10"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn wide_data_defaults_to_full_eigendecomposition() {
    let dir = tempfile::tempdir().unwrap();
    let x = write_data(dir.path(), "wide.csv", &lcg_matrix(3, 8, 9));
    let out = run(&["solve", "--input", &x, "--kappa", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rec: ResultRecord = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rec.algorithm.name(), "FU-SPT");
    let out = run(&["solve", "--input", &x, "--kappa", "2", "--algorithm", "gr-svd"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_matches_golden_file() {
    let out = run(&["simulate", "--p", "4", "--n", "2", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read_to_string(fixture("simulate_p4_n2_seed7.csv")).unwrap();
    assert_eq!(stdout(&out), golden);
    let m = read_matrix_csv(golden.as_bytes()).unwrap();
    assert_eq!((m.rows(), m.cols()), (4, 2));
}

#[test]
fn simulate_with_sigma_is_deterministic() {
    let args = [
        "simulate",
        "--p",
        "5",
        "--n",
        "3",
        "--sigma-cond-exp",
        "2",
        "--spacing",
        "log",
        "--seed",
        "11",
    ];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn trace_two_point_grid() {
    let out = run(&[
        "trace",
        "--spectrum",
        fixture("spectrum_10.txt").to_str().unwrap(),
        "--kappa-min",
        "2",
        "--kappa-max",
        "4",
        "--kappa-step",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        [
            "kappa",
            "alpha",
            "beta",
            "mu",
            "nu",
            "diffAlpha",
            "diffBeta",
            "kappaMu",
            "kappaNu",
            "inInterval"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let mu = |r: &csv::StringRecord| r[3].parse::<f64>().unwrap();
    assert!((mu(&rows[0]) - 0.4).abs() < 1e-15);
    assert!((mu(&rows[1]) - 4.0 / 17.0).abs() < 1e-15);
    assert_eq!(
        (&rows[1][1], &rows[1][2], &rows[1][5], &rows[1][6]),
        ("1", "2", "0", "0")
    );
    assert_eq!(&rows[0][6], "");
}

#[test]
fn trace_simulated_and_bad_grid() {
    let ok = run(&["trace", "--p", "20", "--n", "10", "--kappa-max", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).lines().count(), 1 + 11);
    let bad = run(&["trace", "--p", "20", "--n", "10", "--kappa-min", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = run(&["trace", "--p", "20", "--n", "10", "--kappa-step", "-1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bench_csv_format() {
    let out = run(&["bench", "--n", "4", "--p-list", "6,8", "--reps", "3", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "algorithm,n,p,rep,wall_ms,mean_ms,median_ms");
    assert_eq!(lines.len(), 1 + 2 * 3 * 3);
    for alg in ["FU-SPT", "GR-SVD", "MOD-SVD"] {
        assert_eq!(
            lines.iter().filter(|l| l.starts_with(&format!("{alg},4,6,"))).count(),
            3
        );
    }
    assert_eq!(
        run(&["bench", "--n", "4", "--p-list", "6", "--reps", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["bench", "--n", "10", "--p-list", "6", "--reps", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn spectrum_consistency_regime() {
    let out = run(&["spectrum", "--p", "10", "--n", "5000", "--reps", "4", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 10);
    assert!(values.iter().all(|v| (v - 1.0).abs() < 0.1), "{values:?}");
    assert_eq!(
        run(&["spectrum", "--p", "10", "--n", "5", "--reps", "0"]).status.code(),
        Some(2)
    );
}
