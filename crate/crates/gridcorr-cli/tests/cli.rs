//! End-to-end tests of the `gridcorr` binary: file formats, exit codes,
//! round trips through moment tables, reports, and the example generator.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gridcorr"));
    // Keep the suite independent of the caller's environment.
    cmd.env_remove("GRIDCORR_PRECISION_BITS");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn write_grid(dir: &Path, name: &str, dims: &[u64], values: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let body = json!({ "dims": dims, "values": values });
    fs::write(&path, serde_json::to_vec_pretty(&body).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

const Z7: [&str; 7] = ["0", "0", "0", "1", "0", "1", "1"];

#[test]
fn moment_tables_freeze_known_values_and_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let grid = write_grid(dir.path(), "f.json", &[7], &Z7);
    let m1 = dir.path().join("m1.json");
    let m2 = dir.path().join("m2.json");
    for out in [&m1, &m2] {
        let res = run(bin().args(["moments"]).arg(&grid).args(["--order", "2", "--output"]).arg(out));
        assert_eq!(code(&res), 0, "{}", stderr(&res));
        assert!(stdout(&res).contains("wrote moments to order 2"));
    }
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap(), "identical runs, identical bytes");

    let doc = read_json(&m1);
    assert_eq!(doc["dims"], json!([7]));
    assert_eq!(doc["max_order"], json!(2));
    // Indicator of {3, 5, 6}: the sum is 3, the full pair table is
    // (3, 1, 1, 1, 1, 1, 1), and zero entries are never stored.
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 8);
    assert_eq!(entries[0], json!({ "shift": [], "value": "3" }));
    assert_eq!(entries[1], json!({ "shift": [[0]], "value": "3" }));
    for (i, entry) in entries.iter().enumerate().skip(2) {
        assert_eq!(entry["shift"], json!([[i as u64 - 1]]));
        assert_eq!(entry["value"], json!("1"));
    }
}

#[test]
fn moment_files_round_trip_back_to_translates() {
    // (dims, values, table order, cap argument). The caps stay within each
    // stored table; "auto" is used where the derived cap fits the order.
    let corpus: [(&[u64], &[&str], &str, Option<&str>); 4] = [
        (&[7], &Z7, "3", Some("3")),
        (&[5], &["1/2", "0", "-3", "2", "1"], "4", None),
        (&[2, 4], &["3", "1", "0", "2", "-1", "1", "4", "0"], "6", Some("6")),
        (&[4], &["0", "0", "0", "0"], "6", None),
    ];
    for (dims, values, order, cap) in corpus {
        let dir = TempDir::new().unwrap();
        let grid = write_grid(dir.path(), "f.json", dims, values);
        let table = dir.path().join("f.moments.json");
        let rec = dir.path().join("rec.json");

        let res = run(bin().args(["moments"]).arg(&grid).args(["--order", order, "--output"]).arg(&table));
        assert_eq!(code(&res), 0, "moments on {dims:?}: {}", stderr(&res));

        let mut cmd = bin();
        cmd.args(["reconstruct"]).arg(&table).args(["--output"]).arg(&rec);
        if let Some(cap) = cap {
            cmd.args(["--cap", cap]);
        }
        let res = run(&mut cmd);
        assert_eq!(code(&res), 0, "reconstruct on {dims:?}: {}", stderr(&res));
        assert!(stdout(&res).starts_with("wrote "), "{}", stdout(&res));

        let res = run(bin().args(["verify"]).arg(&grid).arg(&rec));
        assert_eq!(code(&res), 0, "verify on {dims:?}: {}", stderr(&res));
        assert_eq!(stdout(&res), "y\n");
    }
}

#[test]
fn reconstructed_grids_are_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let grid = write_grid(dir.path(), "f.json", &[7], &Z7);
    let table = dir.path().join("m.json");
    let res = run(bin().args(["moments"]).arg(&grid).args(["--order", "3", "--output"]).arg(&table));
    assert_eq!(code(&res), 0, "{}", stderr(&res));

    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for out in [&r1, &r2] {
        let res = run(bin().args(["reconstruct"]).arg(&table).args(["--cap", "3", "--output"]).arg(out));
        assert_eq!(code(&res), 0, "{}", stderr(&res));
    }
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    // Atomic writes must not leave temporaries behind.
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "stray temp files: {leftovers:?}");
}

#[test]
fn hidden_mode_reconstructs_from_the_grid_itself_and_reports() {
    let dir = TempDir::new().unwrap();
    let grid = write_grid(dir.path(), "f.json", &[7], &Z7);
    let rec = dir.path().join("rec.json");
    let report = dir.path().join("report.json");
    let res = run(bin()
        .args(["reconstruct"])
        .arg(&grid)
        .args(["--output"])
        .arg(&rec)
        .args(["--report"])
        .arg(&report));
    assert_eq!(code(&res), 0, "{}", stderr(&res));

    let res = run(bin().args(["verify"]).arg(&grid).arg(&rec));
    assert_eq!(code(&res), 0);
    assert_eq!(stdout(&res), "y\n");

    let doc = read_json(&report);
    assert_eq!(doc["mode"], json!("hidden"));
    assert_eq!(doc["dims"], json!([7]));
    assert_eq!(doc["exponent"], json!(7));
    assert_eq!(doc["cap"], json!(4), "derived cap for one odd cyclic factor");
    assert_eq!(doc["support_size"], json!(7), "indicator data has full spectrum support");
    assert_eq!(doc["verified"], json!(true));
    assert_eq!(doc["scale"], json!("1"));
    assert_eq!(doc["blocks"], json!([{ "cofactor": 1, "generators": [[1]] }]));
    let powers = doc["power_exponents"].as_array().unwrap();
    assert!(!powers.is_empty());
    for p in powers {
        assert_eq!(p["exponent"], json!(7), "2^3 - 1 is the ladder exponent mod 7");
    }
    assert!(doc["max_order_queried"].as_u64().unwrap() <= 3);
    assert!(doc["queries"].as_u64().unwrap() > 0);
}

#[test]
fn csv_grids_are_read_and_written() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("f.csv");
    fs::write(&csv, "7\n0,0,0,1,0,1,1\n").unwrap();
    let rec = dir.path().join("rec.csv");
    let res = run(bin()
        .args(["reconstruct"])
        .arg(&csv)
        .args(["--output"])
        .arg(&rec)
        .args(["--format", "csv"]));
    assert_eq!(code(&res), 0, "{}", stderr(&res));

    let body = fs::read_to_string(&rec).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("7"));
    assert_eq!(lines.next().unwrap().split(',').count(), 7);
    assert_eq!(lines.next(), None);

    // Mixed formats verify against each other.
    let res = run(bin().args(["verify"]).arg(&csv).arg(&rec));
    assert_eq!(code(&res), 0);
    assert_eq!(stdout(&res), "y\n");

    // Rows of a multi-coordinate grid chunk by the last dimension.
    let grid = write_grid(dir.path(), "g.json", &[2, 4], &["3", "1", "0", "2", "-1", "1", "4", "0"]);
    let out = dir.path().join("g.csv");
    let table = dir.path().join("g.moments.json");
    let res = run(bin().args(["moments"]).arg(&grid).args(["--order", "6", "--output"]).arg(&table));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let res = run(bin()
        .args(["reconstruct"])
        .arg(&table)
        .args(["--cap", "6", "--output"])
        .arg(&out)
        .args(["--format", "csv"]));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let body = fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = body.lines().collect();
    assert_eq!(lines[0], "2,4");
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 4));
}

#[test]
fn verify_distinguishes_translates_others_and_mismatched_grids() {
    let dir = TempDir::new().unwrap();
    let a = write_grid(dir.path(), "a.json", &[7], &Z7);
    let shifted = write_grid(dir.path(), "b.json", &[7], &["0", "1", "0", "1", "1", "0", "0"]);
    let other = write_grid(dir.path(), "c.json", &[7], &["1", "0", "0", "0", "0", "0", "0"]);
    let small = write_grid(dir.path(), "d.json", &[5], &["1", "0", "0", "0", "0"]);

    let res = run(bin().args(["verify"]).arg(&a).arg(&shifted));
    assert_eq!(code(&res), 0);
    assert_eq!(stdout(&res), "y\n");

    let res = run(bin().args(["verify"]).arg(&a).arg(&other));
    assert_eq!(code(&res), 1);
    assert_eq!(stdout(&res), "n\n");

    let res = run(bin().args(["verify"]).arg(&a).arg(&small));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("dimension mismatch"), "{}", stderr(&res));
}

#[test]
fn work_budgets_refuse_oversized_jobs() {
    let dir = TempDir::new().unwrap();
    let zeros: Vec<&str> = vec!["0"; 30];
    let big = write_grid(dir.path(), "big.json", &[30], &zeros);
    let out = dir.path().join("m.json");
    let res = run(bin().args(["moments"]).arg(&big).args(["--order", "6", "--output"]).arg(&out));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("budget"), "{}", stderr(&res));
    assert!(!out.exists(), "refused jobs write nothing");

    // The same guard covers table-mode post-verification.
    let grid = write_grid(dir.path(), "f.json", &[7], &Z7);
    let table = dir.path().join("f.moments.json");
    let res = run(bin().args(["moments"]).arg(&grid).args(["--order", "3", "--output"]).arg(&table));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let rec = dir.path().join("rec.json");
    let res = run(bin()
        .args(["reconstruct"])
        .arg(&table)
        .args(["--cap", "3", "--budget", "10", "--output"])
        .arg(&rec));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("budget"), "{}", stderr(&res));
}

#[test]
fn table_mode_requires_tables_at_least_as_deep_as_the_cap() {
    let dir = TempDir::new().unwrap();
    let grid = write_grid(dir.path(), "f.json", &[7], &Z7);
    let table = dir.path().join("m.json");
    let res = run(bin().args(["moments"]).arg(&grid).args(["--order", "2", "--output"]).arg(&table));
    assert_eq!(code(&res), 0, "{}", stderr(&res));

    let rec = dir.path().join("rec.json");
    let res = run(bin().args(["reconstruct"]).arg(&table).args(["--cap", "3", "--output"]).arg(&rec));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("stores orders up to 2"), "{}", stderr(&res));

    // The derived cap for Z/7 is 4, so "auto" needs order-4 tables too.
    let res = run(bin().args(["reconstruct"]).arg(&table).args(["--output"]).arg(&rec));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("query cap is 4"), "{}", stderr(&res));
}

#[test]
fn capped_oracles_refuse_reconstructions_that_need_deeper_queries() {
    let dir = TempDir::new().unwrap();
    let grid = write_grid(dir.path(), "f.json", &[7], &Z7);
    let rec = dir.path().join("rec.json");
    let res = run(bin().args(["reconstruct"]).arg(&grid).args(["--cap", "2", "--output"]).arg(&rec));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("reconstruction from"), "{}", stderr(&res));
}

#[test]
fn gen_example_writes_members_and_manifests() {
    // Conic member with the invariant frozen.
    let dir = TempDir::new().unwrap();
    let res = run(bin()
        .args(["gen-example", "--family", "z6", "--a", "7", "--b", "0", "--output-dir"])
        .arg(dir.path()));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["family"], json!("z6"));
    assert_eq!(manifest["agreement_order"], json!(5));
    assert_eq!(manifest["dims"], json!([6]));
    assert_eq!(manifest["params"]["invariant"], json!("49"));
    assert_eq!(manifest["files"], json!(["f.json"]));
    let member = read_json(&dir.path().join("f.json"));
    assert_eq!(member["values"], json!(["14", "7", "-7", "-14", "-7", "7"]));

    // Axis-diagonal pair: same grid, same moments through order 3, yet not
    // translates of each other.
    let dir = TempDir::new().unwrap();
    let res = run(bin()
        .args(["gen-example", "--family", "threer", "--r", "1", "--output-dir"])
        .arg(dir.path()));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["agreement_order"], json!(3));
    assert_eq!(manifest["dims"], json!([6]));
    let res = run(bin().args(["verify"]).arg(dir.path().join("f.json")).arg(dir.path().join("g.json")));
    assert_eq!(code(&res), 1);
    assert_eq!(stdout(&res), "n\n");

    let dir = TempDir::new().unwrap();
    let res = run(bin()
        .args(["gen-example", "--family", "sharp", "--p", "3", "--q", "5", "--r", "1", "--output-dir"])
        .arg(dir.path()));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["agreement_order"], json!(5));
    assert_eq!(manifest["dims"], json!([30]));
    assert!(dir.path().join("f.json").exists() && dir.path().join("g.json").exists());

    // Spectral families serialize cyclotomic coordinates, not grid values.
    let dir = TempDir::new().unwrap();
    let res = run(bin()
        .args(["gen-example", "--family", "delta", "--dims", "5", "--output-dir"])
        .arg(dir.path()));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["agreement_order"], json!(4));
    let f = read_json(&dir.path().join("f.spectrum.json"));
    let g = read_json(&dir.path().join("g.spectrum.json"));
    assert_eq!(f["conductor"], json!(5));
    assert_eq!(f["entries"].as_array().unwrap().len(), 1);
    assert_eq!(f["entries"][0]["point"], json!([1]));
    assert!(g["entries"].as_array().unwrap().is_empty(), "the zero partner has empty support");

    let dir = TempDir::new().unwrap();
    let res = run(bin()
        .args(["gen-example", "--family", "divisor", "--dims", "6,6", "--d", "3", "--output-dir"])
        .arg(dir.path()));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["agreement_order"], json!(4));
    let f = read_json(&dir.path().join("f.spectrum.json"));
    let g = read_json(&dir.path().join("g.spectrum.json"));
    assert_eq!(f["conductor"], json!(6));
    assert_eq!(f["entries"].as_array().unwrap().len(), 3, "two generators plus the split point");
    assert_eq!(g["entries"].as_array().unwrap().len(), 3);
    assert_ne!(f["entries"], g["entries"], "the split point carries a different root of unity");
}

#[test]
fn gen_example_rejects_bad_parameters() {
    let dir = TempDir::new().unwrap();
    let cases: &[&[&str]] = &[
        &["gen-example", "--family", "sharp", "--p", "4", "--q", "5", "--r", "1"],
        &["gen-example", "--family", "sharp", "--p", "3", "--q", "3", "--r", "1"],
        &["gen-example", "--family", "divisor", "--dims", "6,6", "--d", "4"],
        &["gen-example", "--family", "divisor", "--dims", "6,6"],
        &["gen-example", "--family", "delta"],
        &["gen-example", "--family", "z6", "--a", "7"],
        &["gen-example", "--family", "threer", "--r", "0"],
    ];
    for args in cases {
        let res = run(bin().args(*args).args(["--output-dir"]).arg(dir.path()));
        assert_eq!(code(&res), 2, "{args:?} must be refused: {}", stdout(&res));
        assert!(!stderr(&res).is_empty(), "{args:?} must explain itself");
    }

    let res = run(bin()
        .args(["gen-example", "--family", "z6", "--a", "1", "--b", "1", "--output-dir"])
        .arg(dir.path().join("missing")));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("does not exist"), "{}", stderr(&res));

    // Unknown family names die in argument parsing.
    let res = run(bin().args(["gen-example", "--family", "mystery", "--output-dir"]).arg(dir.path()));
    assert_eq!(code(&res), 2);
}

#[test]
fn precision_schedule_env_is_honored_and_validated() {
    let dir = TempDir::new().unwrap();
    let grid = write_grid(dir.path(), "f.json", &[7], &Z7);
    let rec = dir.path().join("rec.json");

    let res = run(bin()
        .env("GRIDCORR_PRECISION_BITS", "256")
        .args(["reconstruct"])
        .arg(&grid)
        .args(["--output"])
        .arg(&rec));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let res = run(bin().args(["verify"]).arg(&grid).arg(&rec));
    assert_eq!(code(&res), 0);

    for bad in ["abc", "32", "256,,512"] {
        let res = run(bin()
            .env("GRIDCORR_PRECISION_BITS", bad)
            .args(["reconstruct"])
            .arg(&grid)
            .args(["--output"])
            .arg(&rec));
        assert_eq!(code(&res), 2, "schedule {bad:?} must be refused");
        assert!(stderr(&res).contains("GRIDCORR_PRECISION_BITS"), "{}", stderr(&res));
    }
}

#[test]
fn malformed_inputs_exit_with_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out.json");

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    let res = run(bin().args(["moments"]).arg(&garbage).args(["--order", "2", "--output"]).arg(&out));
    assert_eq!(code(&res), 2);

    let short = dir.path().join("short.json");
    fs::write(&short, serde_json::to_vec(&json!({ "dims": [7], "values": ["1", "2"] })).unwrap())
        .unwrap();
    let res = run(bin().args(["moments"]).arg(&short).args(["--order", "2", "--output"]).arg(&out));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("7"), "count mismatch names the expectation: {}", stderr(&res));

    let dup = dir.path().join("dup.json");
    let body = json!({
        "dims": [7],
        "max_order": 2,
        "entries": [
            { "shift": [], "value": "3" },
            { "shift": [[1]], "value": "1" },
            { "shift": [[1]], "value": "1" }
        ]
    });
    fs::write(&dup, serde_json::to_vec(&body).unwrap()).unwrap();
    let res = run(bin().args(["reconstruct"]).arg(&dup).args(["--cap", "2", "--output"]).arg(&out));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("duplicate"), "{}", stderr(&res));

    let res = run(bin().args(["moments"]).arg(&short).args(["--order", "0", "--output"]).arg(&out));
    assert_eq!(code(&res), 2);

    let grid = write_grid(dir.path(), "f.json", &[7], &Z7);
    let res = run(bin().args(["reconstruct"]).arg(&grid).args(["--cap", "junk", "--output"]).arg(&out));
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("--cap"), "{}", stderr(&res));
}
