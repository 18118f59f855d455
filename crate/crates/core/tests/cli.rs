use std::path::Path;

use mobius_corr::cli::{self, ApErrorsReport, CorrelationReport, FitReport, MertensReport, SieveReport, VerifyReport};
use mobius_corr::decomposition::DecompositionReport;
use mobius_corr::progressions::LargeSieveReport;
use mobius_corr::sieve::cache::{decode_block, StoreStatus};
use serde::de::DeserializeOwned;
use serde::Serialize;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("mobius").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

/// Parses JSON output and checks that re-emitting it gives the same document.
fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(json: &str) -> T {
    let parsed: T = serde_json::from_str(json).unwrap();
    let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
    assert_eq!(again, json);
    assert_eq!(serde_json::from_str::<T>(&again).unwrap(), parsed);
    parsed
}

fn dir_arg(p: &Path) -> String {
    p.to_str().unwrap().to_owned()
}

#[test]
fn correlate_examples() {
    let csv = ok(&["--format", "csv", "correlate", "--t", "1", "--ladder", "10,100"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "t,x,R,R/x");
    assert!(lines[1].starts_with("1,10,-3,"));

    let json = ok(&["correlate", "--t", "1", "--ladder", "10"]);
    let report: CorrelationReport = round_trip(&json);
    assert_eq!(report.series.checkpoints[0].r, -3);
    assert!(json.contains("\"r\": \"-3\""));

    let json = ok(&["correlate", "--t", "-1", "--ladder", "10^1..10^3", "--c", "0.5"]);
    let report: CorrelationReport = round_trip(&json);
    assert_eq!(report.normalized.unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_2() {
    let (code, _, err) = run(&["correlate", "--t", "0", "--ladder", "10"]);
    assert_eq!(code, 2);
    assert!(err.contains("squarefree"));
    assert_eq!(run(&["verify", "--limit", "0"]).0, 2);
    assert_eq!(run(&["verify", "--limit", "20000"]).0, 2);
    assert_eq!(run(&["--block-len", "1000", "mertens", "--ladder", "10"]).0, 2);
    assert_eq!(run(&["--workers", "0", "mertens", "--ladder", "10"]).0, 2);
    assert_eq!(run(&["mertens", "--ladder", "100,10"]).0, 2);
    assert_eq!(run(&["decompose", "--x", "1"]).0, 2);
    assert_eq!(run(&["large-sieve", "--x", "20000"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["sieve", "--range", "1..10"]).0, 2);
    assert_eq!(run(&["fit", "--model", "NOPE", "--source", "mertens", "--ladder", "10,100"]).0, 2);
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("not-a-dir");
    std::fs::write(&file, b"x").unwrap();
    let (code, _, _) = run(&["--cache-dir", &dir_arg(&file), "sieve", "--range", "1..10"]);
    assert_eq!(code, 3);
    let missing = dir.path().join("missing.csv");
    assert_eq!(run(&["fit", "--input", &dir_arg(&missing)]).0, 3);

    let cache = dir.path().join("cache");
    ok(&["--cache-dir", &dir_arg(&cache), "--block-len", "1024", "sieve", "--range", "1..1000"]);
    let block = cache.join("mu-00000000000000000001-1024.mubk");
    std::fs::write(&block, b"MUBKgarbage").unwrap();
    let (code, _, _) = run(&["--cache-dir", &dir_arg(&cache), "--block-len", "1024", "mertens", "--ladder", "1000"]);
    assert_eq!(code, 3);
}

#[test]
fn sieve_writes_aligned_blocks_once() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir_arg(dir.path());
    let json = ok(&["--cache-dir", &d, "sieve", "--range", "1..2^21"]);
    let report: SieveReport = round_trip(&json);
    assert_eq!(report.blocks.len(), 2);
    assert!(report.blocks.iter().all(|b| b.status == StoreStatus::Written));
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 2);

    let before: Vec<_> = report
        .blocks
        .iter()
        .map(|b| std::fs::metadata(dir.path().join(&b.file)).unwrap().modified().unwrap())
        .collect();
    let again: SieveReport = round_trip(&ok(&["--cache-dir", &d, "sieve", "--range", "1..2^21"]));
    assert!(again.blocks.iter().all(|b| b.status == StoreStatus::Unchanged));
    for (b, t) in again.blocks.iter().zip(before) {
        assert_eq!(std::fs::metadata(dir.path().join(&b.file)).unwrap().modified().unwrap(), t);
    }
    for (a, b) in report.blocks.iter().zip(&again.blocks) {
        assert_eq!(a.sha256, b.sha256);
    }

    let bytes = std::fs::read(dir.path().join(&report.blocks[0].file)).unwrap();
    let block = decode_block(&bytes).unwrap();
    assert_eq!(block.start(), 1);
    assert_eq!(block.len(), 1 << 20);
    assert_eq!(&block.to_values()[..5], &[1, -1, -1, 0, -1]);

    let one = tempfile::tempdir().unwrap();
    let r: SieveReport = round_trip(&ok(&["--cache-dir", &dir_arg(one.path()), "sieve", "--range", "1..10^6"]));
    assert_eq!(r.blocks.len(), 1);
}

#[test]
fn cache_env_var_is_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_mobius"))
        .args(["--block-len", "1024", "sieve", "--range", "1..3000"])
        .env("MOBIUS_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 3);
}

#[test]
fn warm_cache_changes_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir_arg(dir.path());
    let base = ["--cache-dir", d.as_str(), "--block-len", "4096"];
    let cmds: [&[&str]; 3] = [
        &["mertens", "--ladder", "10,100,1000,20000"],
        &["correlate", "--t", "2", "--ladder", "10,1000,20000"],
        &["correlate", "--t", "-3", "--ladder", "10,1000,20000"],
    ];
    let run_all = || -> Vec<String> {
        cmds.iter()
            .map(|c| ok(&base.iter().chain(c.iter()).copied().collect::<Vec<_>>()))
            .collect()
    };
    let cold = run_all();
    ok(&[&base[..], &["sieve", "--range", "1..30000"]].concat());
    let warm = run_all();
    assert_eq!(cold, warm);
    let uncached = cmds
        .iter()
        .map(|c| ok(&["--block-len", "4096"].iter().chain(c.iter()).copied().collect::<Vec<_>>()))
        .collect::<Vec<_>>();
    assert_eq!(cold, uncached);
}

#[test]
fn json_round_trips() {
    let m: MertensReport = round_trip(&ok(&["mertens", "--ladder", "10^1..10^5"]));
    assert_eq!(m.points[0].mertens, -1);

    let d: DecompositionReport = round_trip(&ok(&["decompose", "--x", "10"]));
    assert_eq!(d.lhs_direct, -3);
    assert_eq!(d.r0.to_string(), "-25/21");
    let d: DecompositionReport = round_trip(&ok(&["decompose", "--x", "1500"]));
    assert!(!d.r0.is_exact());

    let l: LargeSieveReport = round_trip(&ok(&["large-sieve", "--x", "300", "--sequence", "mobius"]));
    assert!(l.holds());

    let a: ApErrorsReport = round_trip(&ok(&["ap-errors", "--x", "1000", "--qmax", "7", "--classes"]));
    assert_eq!(a.classes.unwrap().len(), 28);

    let f: FitReport = round_trip(&ok(&["fit", "--source", "mertens", "--ladder", "10^1..10^6"]));
    assert_eq!(f.fits.len(), 3);
    assert_eq!(f.residuals.len(), 3 * f.n_points);

    let v: VerifyReport = round_trip(&ok(&["verify", "--limit", "100"]));
    assert!(v.passed);
    assert_eq!(v.decompositions.len(), 4);
}

#[test]
fn fit_from_input_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    let mut text = String::from("x,y\n1,5\n");
    for k in 1..=8u32 {
        let x = 10f64.powi(k as i32);
        text += &format!("{},{}\n", 10u64.pow(k), 3.0 * x * (-0.4 * x.ln().sqrt()).exp());
    }
    std::fs::write(&path, text).unwrap();
    let json = ok(&["fit", "--input", &dir_arg(&path), "--model", "EXP_SQRT_LOG"]);
    let f: FitReport = round_trip(&json);
    assert_eq!(f.dropped, 1);
    assert!((f.fits[0].c_hat - 0.4).abs() < 1e-9);

    let csv = ok(&["--format", "csv", "fit", "--input", &dir_arg(&path)]);
    assert_eq!(csv.lines().count(), 1 + 3 * 8);
}

#[test]
fn csv_shapes() {
    let ls = ok(&["--format", "csv", "large-sieve", "--x", "50"]);
    assert_eq!(ls.lines().next().unwrap(), "Q,x,lhs,rhs,ratio");
    let ap = ok(&["--format", "csv", "ap-errors", "--x", "100", "--qmax", "3", "--classes"]);
    assert_eq!(ap.lines().next().unwrap(), "q,a,count,error");
    assert_eq!(ap.lines().count(), 7);
    let v = ok(&["--format", "csv", "verify", "--limit", "50"]);
    assert!(v.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn verify_to_ceiling() {
    let (code, out, _) = run(&["verify", "--limit", "10^4"]);
    assert_eq!(code, 0);
    let v: VerifyReport = serde_json::from_str(&out).unwrap();
    assert_eq!(v.decompositions.len(), 6);
    assert_eq!(v.large_sieve.len(), 8);
    assert!(v.decompositions.iter().any(|d| d.discrepancy_pair_vs_direct != 0));
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["correlate", "--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("R(−s, x) = R(s, x − s)"));
}
