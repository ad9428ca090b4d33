//! End-to-end tests driving the `svie` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn svie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svie"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn out_path(dir: &tempfile::TempDir, name: &str) -> (PathBuf, String) {
    let path = dir.path().join(name);
    let arg = path.to_str().unwrap().to_string();
    (path, arg)
}

fn parse_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn solve_bond_emits_midpoint_and_probe_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (path, arg) = out_path(&dir, "bond.csv");
    let run = svie(&["solve", "--problem", "bond", "--k", "6", "--out", &arg]);
    assert!(run.status.success(), "{}", stderr(&run));
    let (header, rows) = parse_csv(&path);
    assert_eq!(header, ["t", "x_approx", "x_exact", "abs_err"]);
    assert_eq!(rows.len(), 64 + 9);
    for row in &rows {
        assert_eq!(row.len(), 4);
        let abs_err: f64 = row[3].parse().unwrap();
        assert!(abs_err <= 0.02, "row {row:?}");
    }
}

#[test]
fn identical_configurations_reproduce_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (path_a, arg_a) = out_path(&dir, "a.csv");
    let (path_b, arg_b) = out_path(&dir, "b.csv");
    let args = ["solve", "--problem", "example2", "--k", "5", "--seed", "9"];
    assert!(svie(&[&args[..], &["--out", &arg_a]].concat())
        .status
        .success());
    assert!(svie(&[&args[..], &["--out", &arg_b]].concat())
        .status
        .success());
    let a = std::fs::read(&path_a).unwrap();
    let b = std::fs::read(&path_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn example2_has_empty_exact_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (path, arg) = out_path(&dir, "e2.csv");
    let run = svie(&["solve", "--problem", "example2", "--k", "3", "--out", &arg]);
    assert!(run.status.success(), "{}", stderr(&run));
    let (_, rows) = parse_csv(&path);
    for row in &rows {
        assert!(row[2].is_empty() && row[3].is_empty());
        let _: f64 = row[1].parse().unwrap();
    }
}

#[test]
fn montecarlo_emits_one_row_per_k_n_pair() {
    let dir = tempfile::tempdir().unwrap();
    let (path, arg) = out_path(&dir, "mc.csv");
    let run = svie(&[
        "montecarlo",
        "--problem",
        "example1",
        "--k",
        "3",
        "--n",
        "4,6",
        "--seed",
        "5",
        "--refine",
        "4",
        "--out",
        &arg,
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let (header, rows) = parse_csv(&path);
    assert_eq!(
        header,
        [
            "m",
            "n",
            "mean_error",
            "std_error",
            "ci_lower",
            "ci_upper",
            "seed"
        ]
    );
    assert_eq!(rows.len(), 2);
    for (row, expected_n) in rows.iter().zip(["4", "6"]) {
        assert_eq!(row[0], "8");
        assert_eq!(row[1], expected_n);
        assert_eq!(row[6], "5");
        let mean: f64 = row[2].parse().unwrap();
        let lo: f64 = row[4].parse().unwrap();
        let hi: f64 = row[5].parse().unwrap();
        assert!(lo <= mean && mean <= hi);
    }
    // growing n extends the same trial sequence: rerunning with n=4 reproduces row 0
    let (path2, arg2) = out_path(&dir, "mc4.csv");
    let rerun = svie(&[
        "montecarlo",
        "--problem",
        "example1",
        "--k",
        "3",
        "--n",
        "4",
        "--seed",
        "5",
        "--refine",
        "4",
        "--out",
        &arg2,
    ]);
    assert!(rerun.status.success());
    let (_, rows4) = parse_csv(&path2);
    assert_eq!(rows4[0], rows[0]);
}

#[test]
fn montecarlo_rejects_single_trial() {
    let dir = tempfile::tempdir().unwrap();
    let (_, arg) = out_path(&dir, "mc.csv");
    let run = svie(&[
        "montecarlo",
        "--problem",
        "example1",
        "--k",
        "3",
        "--n",
        "1",
        "--out",
        &arg,
    ]);
    assert!(!run.status.success());
    assert!(
        stderr(&run).contains("standard deviation"),
        "{}",
        stderr(&run)
    );
}

#[test]
fn montecarlo_requires_an_exact_solution() {
    let dir = tempfile::tempdir().unwrap();
    let (_, arg) = out_path(&dir, "mc.csv");
    let run = svie(&[
        "montecarlo",
        "--problem",
        "example2",
        "--k",
        "3",
        "--n",
        "4",
        "--out",
        &arg,
    ]);
    assert!(!run.status.success());
    assert!(
        stderr(&run).contains("no exact solution"),
        "{}",
        stderr(&run)
    );
}

#[test]
fn convergence_probe_table_for_example2() {
    let dir = tempfile::tempdir().unwrap();
    let (path, arg) = out_path(&dir, "conv.csv");
    let run = svie(&[
        "convergence",
        "--problem",
        "example2",
        "--k",
        "4,5",
        "--n",
        "2",
        "--refine",
        "4",
        "--out",
        &arg,
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let (header, rows) = parse_csv(&path);
    assert_eq!(header, ["t", "m16", "m32"]);
    assert_eq!(rows.len(), 9);
    for row in &rows {
        for cell in row {
            let v: f64 = cell.parse().unwrap();
            assert!(v.is_finite());
        }
    }
}

#[test]
fn convergence_statistics_for_bond() {
    let dir = tempfile::tempdir().unwrap();
    let (path, arg) = out_path(&dir, "conv.csv");
    let run = svie(&[
        "convergence",
        "--problem",
        "bond",
        "--k",
        "3,4,5",
        "--n",
        "2",
        "--zero-noise",
        "--refine",
        "4",
        "--out",
        &arg,
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let (header, rows) = parse_csv(&path);
    assert_eq!(header[0], "m");
    assert_eq!(rows.len(), 3);
    let means: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(means[1] < means[0] && means[2] < means[1], "{means:?}");
}

#[test]
fn matrices_zero_noise_dump() {
    let dir = tempfile::tempdir().unwrap();
    let (path, arg) = out_path(&dir, "mat.csv");
    let run = svie(&["matrices", "--k", "1", "--zero-noise", "--out", &arg]);
    assert!(run.status.success(), "{}", stderr(&run));
    let text = std::fs::read_to_string(&path).unwrap();
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 5);
    assert!(blocks[0].starts_with("T_W\n1,1\n1,-1"));
    let ps_block = blocks[2];
    assert!(ps_block.starts_with("P_S\n"));
    for line in ps_block.lines().skip(1) {
        for cell in line.split(',') {
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0);
        }
    }
    // the deterministic operational matrix at k=2 carries the 1/8 prefactor
    let (path2, arg2) = out_path(&dir, "mat2.csv");
    assert!(
        svie(&["matrices", "--k", "2", "--zero-noise", "--out", &arg2])
            .status
            .success()
    );
    let text2 = std::fs::read_to_string(&path2).unwrap();
    let p_block = text2.split("\n\n").nth(1).unwrap();
    let first_row: Vec<f64> = p_block
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(first_row, vec![0.125, 0.25, 0.25, 0.25]);
}

#[test]
fn matrices_rejects_oversized_levels() {
    let dir = tempfile::tempdir().unwrap();
    let (_, arg) = out_path(&dir, "mat.csv");
    let run = svie(&["matrices", "--k", "17", "--out", &arg]);
    assert!(!run.status.success());
    assert!(stderr(&run).contains("exceeds"), "{}", stderr(&run));
}

#[test]
fn missing_output_path_exits_with_usage_error() {
    let run = svie(&["solve", "--problem", "bond", "--k", "3"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn unknown_problem_lists_the_registry() {
    let dir = tempfile::tempdir().unwrap();
    let (_, arg) = out_path(&dir, "x.csv");
    let run = svie(&["solve", "--problem", "nosuch", "--k", "3", "--out", &arg]);
    assert!(!run.status.success());
    let err = stderr(&run);
    for name in ["example1", "example2", "stock", "bond"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn file_problems_match_registry_problems() {
    let dir = tempfile::tempdir().unwrap();
    let problem_path = dir.path().join("bond.prob");
    std::fs::write(
        &problem_path,
        "name = file_bond\nT = 1\nf = 1\nk1 = sin(s)\nk2 = 0\nexact = exp(1 - cos(t))\n",
    )
    .unwrap();
    let (reg_path, reg_arg) = out_path(&dir, "registry.csv");
    let (file_path, file_arg) = out_path(&dir, "from_file.csv");
    assert!(
        svie(&["solve", "--problem", "bond", "--k", "4", "--out", &reg_arg])
            .status
            .success()
    );
    let run = svie(&[
        "solve",
        "--file",
        problem_path.to_str().unwrap(),
        "--k",
        "4",
        "--out",
        &file_arg,
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let (_, reg_rows) = parse_csv(&reg_path);
    let (_, file_rows) = parse_csv(&file_path);
    assert_eq!(reg_rows.len(), file_rows.len());
    for (a, b) in reg_rows.iter().zip(&file_rows) {
        let xa: f64 = a[1].parse().unwrap();
        let xb: f64 = b[1].parse().unwrap();
        assert!((xa - xb).abs() < 1e-12, "{xa} vs {xb}");
    }
}

#[test]
fn invalid_problem_files_are_rejected_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.prob");
    std::fs::write(&bad, "name = p\nT = 1\nf = t\nk1 = B(t)\nk2 = 0\n").unwrap();
    let (_, arg) = out_path(&dir, "x.csv");
    let run = svie(&[
        "solve",
        "--file",
        bad.to_str().unwrap(),
        "--k",
        "3",
        "--out",
        &arg,
    ]);
    assert!(!run.status.success());
    assert!(stderr(&run).contains("deterministic"), "{}", stderr(&run));
}

#[test]
fn json_outputs_parse() {
    let dir = tempfile::tempdir().unwrap();
    let (sol_path, sol_arg) = out_path(&dir, "sol.json");
    let run = svie(&[
        "solve",
        "--problem",
        "stock",
        "--k",
        "3",
        "--seed",
        "3",
        "--format",
        "json",
        "--out",
        &sol_arg,
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&sol_path).unwrap()).unwrap();
    assert_eq!(doc["problem"], "stock");
    assert_eq!(doc["m"], 8);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 8 + 9);

    let (mc_path, mc_arg) = out_path(&dir, "mc.json");
    let run = svie(&[
        "montecarlo",
        "--problem",
        "bond",
        "--k",
        "3",
        "--n",
        "3",
        "--zero-noise",
        "--refine",
        "4",
        "--format",
        "json",
        "--out",
        &mc_arg,
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&mc_path).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["std_error"], 0.0);

    let (mat_path, mat_arg) = out_path(&dir, "mat.json");
    let run = svie(&[
        "matrices",
        "--k",
        "1",
        "--zero-noise",
        "--format",
        "json",
        "--out",
        &mat_arg,
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&mat_path).unwrap()).unwrap();
    assert_eq!(doc["t_w"], serde_json::json!([[1.0, 1.0], [1.0, -1.0]]));
}

#[test]
fn paper_prefactor_flag_scales_the_exact_solution() {
    let dir = tempfile::tempdir().unwrap();
    let (plain_path, plain_arg) = out_path(&dir, "plain.csv");
    let (variant_path, variant_arg) = out_path(&dir, "variant.csv");
    let base = ["solve", "--problem", "example1", "--k", "3", "--seed", "4"];
    assert!(svie(&[&base[..], &["--out", &plain_arg]].concat())
        .status
        .success());
    assert!(
        svie(&[&base[..], &["--paper-prefactor", "--out", &variant_arg]].concat())
            .status
            .success()
    );
    let (_, plain_rows) = parse_csv(&plain_path);
    let (_, variant_rows) = parse_csv(&variant_path);
    for (a, b) in plain_rows.iter().zip(&variant_rows) {
        // approximate solution is unchanged; the exact reference is scaled by 1/12
        assert_eq!(a[1], b[1]);
        let ea: f64 = a[2].parse().unwrap();
        let eb: f64 = b[2].parse().unwrap();
        assert!((eb - ea / 12.0).abs() < 1e-12, "{ea} vs {eb}");
    }
}
