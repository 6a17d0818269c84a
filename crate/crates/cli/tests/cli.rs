//! End-to-end coverage of the command-line surface: pinned outputs,
//! exit-code contract, and byte determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iwasawa"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8 stdout")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scenario_path(name: &str, text: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn generated_scenario(name: &str, seed: u64, p: u64, d: usize) -> PathBuf {
    let f = iwasawa_core::scenario::generate(seed, p, d, 8, 8).unwrap();
    scenario_path(name, &serde_json::to_string_pretty(&f).unwrap())
}

#[test]
fn simple_subcommand_prints_the_expanded_element() {
    let o = run(&["simple", "--p", "3", "--d", "2", "--gamma", "[1,0]", "--zeta-order", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "t1^2 + 3*t1 + 3\n");
}

#[test]
fn zeroset_subcommand_counts_common_zeros() {
    let o = run(&["zeroset", "--p", "2", "--d", "2", "--n", "2", "--gens", "t1+2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "level 2\nexamined 16\ncount 4\n");
}

#[test]
fn zeroset_over_budget_is_inconclusive_not_wrong() {
    let o = run(&["zeroset", "--p", "2", "--d", "2", "--n", "2", "--gens", "t1+2", "--budget", "3"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).is_empty());
}

#[test]
fn malformed_expressions_exit_with_config_code() {
    let o = run(&["sharp", "t1 + + 3"]);
    assert_eq!(code(&o), 2);
    let o = run(&["eval", "t9", "--character", "[0,0]@0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn eval_reports_root_of_unity_values() {
    let o = run(&["eval", "g1", "--p", "3", "--d", "2", "--character", "[1,0]@1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "[0, 1] at level 1\n");
    let o = run(&["eval", "g1", "--p", "3", "--d", "2", "--character", "[0,0]@0"]);
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn specialize_defaults_to_dropping_the_last_variable() {
    let o = run(&["specialize", "t1 + 5 t2 + 2", "--p", "3", "--d", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "t1 + 2\n");
}

#[test]
fn sharp_inverts_group_generators() {
    let o = run(&["sharp", "g1", "--p", "3", "--d", "1", "--degree-bound", "2"]);
    assert_eq!(code(&o), 0);
    // (1 + t1)^(-1) truncated at degree 2
    assert_eq!(stdout(&o), "t1^2 + 6560*t1 + 1\n");
}

#[test]
fn charideal_of_a_diagonal_matrix_is_the_product() {
    let o = run(&["charideal", "--p", "3", "--d", "2", "--matrix", "t1,0;0,t2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "(t1 t2)\n");
    let o = run(&["charideal", "--p", "3", "--d", "2", "--matrix", "t1,0;0,0"]);
    assert_eq!(stdout(&o), "(0)\n");
}

#[test]
fn charideal_elementary_blocks_multiply() {
    let o = run(&["charideal", "--p", "3", "--d", "2", "--elementary", "t1:2;t2+p"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "(t1^2 t2 + 3*t1^2)\n");
}

#[test]
fn descent_verdict_drives_the_exit_code() {
    let o = run(&["descent", "--p", "3", "--d", "2", "--elementary", "t2+p"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("verdict pass"), "got: {text}");
}

#[test]
fn growth_table_reports_counts_and_coefficients() {
    let o = run(&[
        "growth", "--p", "3", "--d", "2", "--gens", "t1^2 + 3*t1 + 3", "--n-min", "1", "--n-max",
        "3",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("n 1 count 6\n"), "got: {text}");
    assert!(text.contains("n 2 count 18\n"), "got: {text}");
    assert!(text.contains("n 3 count 54\n"), "got: {text}");
    assert!(text.contains("kappa1 0\n"), "got: {text}");
    assert!(text.contains("kappa2 2\n"), "got: {text}");
}

#[test]
fn check_passes_generated_scenarios_and_fails_mutations() {
    let path = generated_scenario("cli_pass.json", 11, 3, 2);
    let o = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "stdout: {}", stdout(&o));
    assert!(stdout(&o).starts_with("verdict pass\n"));

    let f = iwasawa_core::scenario::generate(11, 3, 2, 8, 8).unwrap();
    let m = iwasawa_core::scenario::mutate(&f, 5).unwrap();
    let mpath = scenario_path("cli_fail.json", &serde_json::to_string_pretty(&m).unwrap());
    let o = run(&["check", mpath.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "stdout: {}", stdout(&o));
    assert!(stdout(&o).starts_with("verdict fail\n"));
}

#[test]
fn check_output_is_byte_deterministic() {
    let path = generated_scenario("cli_det.json", 23, 2, 3);
    let a = run(&["check", path.to_str().unwrap(), "--format", "json"]);
    let b = run(&["check", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&a), code(&b));
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).expect("valid json");
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn factors_lists_every_entry() {
    let path = generated_scenario("cli_factors.json", 3, 3, 2);
    let o = run(&["factors", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("factor theta_Lprime"), "got: {text}");
    assert!(text.contains("factor rho"), "got: {text}");
    assert!(text.contains("factor specialize(theta_L)"), "got: {text}");
}

#[test]
fn screen_classifies_cuts() {
    let path = generated_scenario("cli_screen.json", 7, 3, 2);
    let o = run(&["screen", path.to_str().unwrap(), "--cut", "[1]"]);
    assert_eq!(code(&o), 0, "stdout: {}", stdout(&o));
    assert!(stdout(&o).contains("classification "));
}

#[test]
fn missing_scenario_file_is_a_config_error() {
    let o = run(&["check", "/nonexistent/scenario.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_scenario_version_is_a_config_error() {
    let mut f = iwasawa_core::scenario::generate(0, 2, 2, 8, 8).unwrap();
    f.version = "scenario_v9".into();
    let path = scenario_path("cli_badver.json", &serde_json::to_string(&f).unwrap());
    let o = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn help_echoes_the_grammar_version() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("grammar_v1"), "got: {text}");
    assert!(text.contains("scenario_v1"), "got: {text}");
}
