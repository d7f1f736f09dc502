use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qperc")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qperc-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn express_has_one_row_per_suite_function() {
    let out = scratch("express");
    let o =
        qperc(&["express", "--n", "7", "--encoding", "amplitude", "--suite-seed", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&out.join("express.csv")), 100);
    let manifest = fs::read_to_string(out.join("express.csv.manifest")).unwrap();
    for key in ["config_hash = ", "seed = ", "version = "] {
        assert!(manifest.contains(key), "{key}");
    }
}

#[test]
fn train_suite_row_count_and_determinism() {
    let (a, b) = (scratch("train-a"), scratch("train-b"));
    for dir in [&a, &b] {
        let o = qperc(&[
            "train-suite",
            "--n",
            "4",
            "--encoding",
            "zz",
            "--model",
            "tpp",
            "--m",
            "8",
            "--seeds",
            "5",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(data_rows(&a.join("train-suite.csv")), 500);
    assert_eq!(fs::read(a.join("train-suite.csv")).unwrap(), fs::read(b.join("train-suite.csv")).unwrap());
}

#[test]
fn kernel_spectrum_rank() {
    let out = scratch("spectrum");
    let o = qperc(&["kernel-spectrum", "--n", "7", "--encoding", "amplitude", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("kernel-spectrum.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("k,eigenvalue,ta_cumulative"));
    let eig: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(eig.iter().filter(|&&e| e > 1e-10 * eig[0]).count(), 28);
}

#[test]
fn exit_codes() {
    let out = scratch("codes");
    let dir = out.to_str().unwrap();
    assert_eq!(qperc(&["express", "--n", "0", "--out", dir]).status.code(), Some(2));
    assert_eq!(qperc(&["train-suite", "--encoding", "zz", "--model", "fcn", "--out", dir]).status.code(), Some(2));
    assert_eq!(qperc(&["qfashion", "--images", "/no/such/file", "--out", dir]).status.code(), Some(3));
    assert_eq!(qperc(&["report", "/no/such/records.csv", "--out", dir]).status.code(), Some(3));
    let cfg = out.join("bad.cfg");
    fs::create_dir_all(&out).unwrap();
    fs::write(&cfg, "run.experiment = express\nmystery.key = 1\n").unwrap();
    assert_eq!(qperc(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn config_file_drives_run() {
    let out = scratch("config");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("prior.cfg");
    fs::write(
        &cfg,
        "run.experiment = prior\nboolean.n = 2\nencode.encoding = basis\nprior.samples = 2000\nrun.seed = 4\n",
    )
    .unwrap();
    let o = qperc(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ranks = fs::read_to_string(out.join("prior-rank.csv")).unwrap();
    let p: Vec<f64> = ranks.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(p.windows(2).all(|w| w[0] >= w[1]));
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn report_summaries() {
    let empty = scratch("report-empty");
    let o = qperc(&["report", "--out", empty.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(data_rows(&empty.join("summary.csv")), 0);

    let runs = scratch("report-runs");
    let r = runs.to_str().unwrap();
    assert!(qperc(&["train-suite", "--n", "3", "--model", "tpp", "--m", "4", "--seeds", "2", "--out", r])
        .status
        .success());
    assert!(qperc(&["prior", "--n", "2", "--samples", "500", "--out", r]).status.success());
    let rep = scratch("report-out");
    let o = qperc(&[
        "report",
        runs.join("train-suite.csv").to_str().unwrap(),
        runs.join("prior.hist").to_str().unwrap(),
        "--svg",
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(rep.join("summary.csv")).unwrap();
    assert!(summary.lines().skip(1).all(|l| l.starts_with("tpp,amplitude01,")));
    assert!(rep.join("rank-prior.svg").exists());
    let bad = rep.join("bad.csv");
    fs::write(&bad, "what,is,this\n1,2,3\n").unwrap();
    assert_eq!(qperc(&["report", bad.to_str().unwrap(), "--out", rep.to_str().unwrap()]).status.code(), Some(2));
}
