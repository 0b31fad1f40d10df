use std::path::PathBuf;
use std::process::Command;

use fixspec::fixed::{fixed_spectrum, pencil_rank_test};
use fixspec::instances::embedded_fixed_mode_system;
use fixspec::io::{emit_system, parse_report, parse_system};
use fixspec::sampling::stream_rng;
use fixspec::RankTolerance;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn fixspec(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_fixspec"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_str().unwrap().to_owned()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

#[test]
fn controllable_scalar_has_empty_fixed_spectrum() {
    let run = fixspec(&["analyze", &data("scalar.json")]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("fixed spectrum: empty"));
}

#[test]
fn unactuated_scalar_exits_one() {
    let run = fixspec(&["analyze", &data("unactuated.json")]);
    assert_eq!(run.code, 1);
    assert!(run
        .stdout
        .contains("lambda = 0: FIXED, S = {}, deficiency 1, oracle agrees"));
}

#[test]
fn zero_channels_certify_every_mode_with_empty_subset() {
    let run = fixspec(&["--json", "analyze", &data("zero_channels.json")]);
    assert_eq!(run.code, 1);
    let report = parse_report(&run.stdout).unwrap();
    assert_eq!(report.modes.len(), 3);
    for mode in &report.modes {
        assert_eq!(mode.certificate.as_ref().unwrap().subset, Vec::<usize>::new());
        assert_eq!(mode.oracle_agrees, Some(true));
    }
}

#[test]
fn centralized_case_fixes_the_hidden_mode() {
    let run = fixspec(&["analyze", &data("pbh.json")]);
    assert_eq!(run.code, 1);
    assert!(run.stdout.contains("lambda = 1: not fixed"));
    assert!(run.stdout.contains("fixed spectrum: {2}\n"));
}

#[test]
fn embedded_example_matches_golden_and_library() {
    let run = fixspec(&["analyze", &data("embedded.json")]);
    assert_eq!(run.code, 1);
    assert_eq!(run.stdout, golden("embedded.report.txt"));
    let run = fixspec(&["--json", "analyze", &data("embedded.json")]);
    assert_eq!(run.code, 1);
    assert_eq!(run.stdout, golden("embedded.report.json"));

    // The golden system is the library construction for seed 0.
    let mut rng = stream_rng(0, 0);
    let (sys, _) = embedded_fixed_mode_system(&mut rng, 3, &[(1, 1), (1, 1)], 1.0).unwrap();
    assert_eq!(emit_system(&sys), golden("embedded.json"));
    let tol = RankTolerance::default();
    let library = fixed_spectrum(&sys, tol).unwrap();
    let from_cli = parse_report(&run.stdout).unwrap();
    for (lib, cli) in library.modes.iter().zip(&from_cli.modes) {
        assert_eq!(lib.certificate, cli.certificate);
    }
    let cert = from_cli
        .modes
        .iter()
        .find(|m| m.is_fixed)
        .unwrap()
        .certificate
        .clone()
        .unwrap();
    assert!(
        pencil_rank_test(&sys, cert.lambda, &cert.subset, tol)
            .unwrap()
            .deficient
    );
}

#[test]
fn malformed_files_exit_two_with_location() {
    let run = fixspec(&["analyze", &data("malformed.json")]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("A: row 2"), "{}", run.stderr);
    assert_eq!(fixspec(&["analyze", &data("no_such_file.json")]).code, 2);
    assert_eq!(fixspec(&["grank", &data("scalar.json")]).code, 2);
    assert_eq!(fixspec(&["--tol", "2", "analyze", &data("scalar.json")]).code, 2);
    assert_eq!(fixspec(&["analyze"]).code, 2);
}

#[test]
fn empty_and_single_pair_families() {
    let run = fixspec(&["grank", &data("empty_family.json")]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("matroid: rank 0"));
    assert!(run.stdout.contains("min-formula: rank 0"));
    assert!(run.stdout.contains("sampled: rank 0"));
    assert!(run.stdout.contains("consistent: yes"));

    let run = fixspec(&["grank", &data("single_pair.json")]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("matroid: rank 1, witness {1}"));
    for method in ["matroid", "minformula", "sampled"] {
        let run = fixspec(&["grank", "--method", method, &data("single_pair.json")]);
        assert_eq!(run.code, 0);
        assert!(run.stdout.contains("rank 1"));
        assert!(!run.stdout.contains("consistent"));
    }
}

#[test]
fn member_family_with_constant_agrees() {
    let run = fixspec(&["grank", &data("members.json")]);
    assert_eq!(run.code, 0, "{}", run.stdout);
    assert!(run.stdout.contains("exact (constant fixed): rank 3"));
    assert!(run.stdout.contains("consistent: yes"));
}

#[test]
fn constant_held_fixed_can_be_below_parameterized_factors() {
    let run = fixspec(&["--json", "grank", &data("rotated_constant.json")]);
    assert_eq!(run.code, 0);
    let v: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(v["exact"], 2);
    assert_eq!(v["sampled"]["rank"], 2);
    assert_eq!(v["matroid"]["rank"], 3);
    assert_eq!(v["minformula"]["value"], 3);
}

#[test]
fn random_family_file_is_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5u64 {
        let mut rng = stream_rng(seed, 9);
        let fam = fixspec::instances::random_sized_pair_family(&mut rng, 8, 5);
        let pairs: Vec<serde_json::Value> = (0..fam.len())
            .map(|i| {
                let (w, r) = fam.pair(i);
                let enc = |m: fixspec::ComplexMatrix| -> Vec<[f64; 2]> {
                    m.to_row_major().iter().map(|z| [z.re, z.im]).collect()
                };
                serde_json::json!({ "w": enc(w), "r": enc(r) })
            })
            .collect();
        let doc = serde_json::json!({ "pairs": pairs, "n1": fam.n1(), "n2": fam.n2(), "seed": seed });
        let path = dir.path().join(format!("family{seed}.json"));
        std::fs::write(&path, doc.to_string()).unwrap();
        let run = fixspec(&["grank", path.to_str().unwrap()]);
        assert_eq!(run.code, 0, "seed {seed}: {}", run.stdout);
        assert!(run.stdout.contains("consistent: yes"));
    }
}

#[test]
fn gen_is_deterministic() {
    let args = ["--seed", "7", "gen", "--n", "2", "--k", "1"];
    let first = fixspec(&args);
    assert_eq!(first.code, 0);
    assert_eq!(first.stdout, fixspec(&args).stdout);
    assert_ne!(
        first.stdout,
        fixspec(&["--seed", "8", "gen", "--n", "2", "--k", "1"]).stdout
    );
    let sys = parse_system(&first.stdout).unwrap().system;
    assert_eq!((sys.n(), sys.k()), (2, 1));
}

#[test]
fn gen_rejects_bad_dimensions() {
    assert_eq!(fixspec(&["gen", "--n", "0", "--k", "1"]).code, 2);
    assert_eq!(
        fixspec(&["gen", "--n", "2", "--k", "2", "--dims", "1x1,2x2,1x1"]).code,
        2
    );
    assert_eq!(fixspec(&["gen", "--n", "2", "--k", "1", "--dims", "wide"]).code, 2);
}

#[test]
fn generic_gen_output_usually_has_no_fixed_modes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.json");
    let gen = fixspec(&["--seed", "1", "gen", "--n", "3", "--k", "2"]);
    std::fs::write(&path, &gen.stdout).unwrap();
    let run = fixspec(&["--json", "analyze", path.to_str().unwrap()]);
    let report = parse_report(&run.stdout).unwrap();
    assert_eq!(report.oracle_disagreements(), 0);
    assert_eq!(run.code, if report.has_fixed_spectrum() { 1 } else { 0 });
    assert!(!report.has_fixed_spectrum());
}

#[test]
fn embedded_gen_round_trips_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..6 {
        let seed = seed.to_string();
        let gen = fixspec(&[
            "--seed",
            &seed,
            "gen",
            "--n",
            "4",
            "--k",
            "2",
            "--embed-fixed-mode=-0.5",
        ]);
        assert_eq!(gen.code, 0, "{}", gen.stderr);
        let path = dir.path().join(format!("sys{seed}.json"));
        std::fs::write(&path, &gen.stdout).unwrap();
        let run = fixspec(&["--json", "analyze", path.to_str().unwrap()]);
        assert_eq!(run.code, 1);
        let report = parse_report(&run.stdout).unwrap();
        assert!(report
            .fixed_modes()
            .iter()
            .any(|z| (z.re + 0.5).abs() < 1e-6 && z.im.abs() < 1e-6));
    }
}

#[test]
fn verify_smoke_and_negative_control() {
    let run = fixspec(&["--seed", "0", "verify", "--instances", "1"]);
    assert_eq!(run.code, 0, "{}", run.stdout);
    assert!(run.stdout.ends_with("all campaigns passed\n"));
    assert_eq!(run.stdout.lines().count(), 7);

    let run = fixspec(&["--tol", "0.5", "verify", "--instances", "20"]);
    assert_ne!(run.code, 0);
    assert!(run.stdout.contains("FAILURES"));
}
