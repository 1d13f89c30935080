//! End-to-end tests driving the compiled binary: exit codes, JSON schema
//! round-trips, determinism, config ingestion and the regression workflow.

use std::path::PathBuf;
use std::process::{Command, Output};

use torsion_meet::reports::{
    BranchReport, ChiReport, DegreeReport, Envelope, IntersectReport, MwReport, NevanRatioReport,
    NevanSmtReport, TorsionImagesReport,
};
use torsion_meet_core::meet::SweepReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torsion-meet"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn json_report<T: serde::de::DeserializeOwned>(args: &[&str]) -> Envelope<T> {
    let out = run(args);
    let text = stdout_of(&out);
    serde_json::from_str(text.trim()).expect("envelope JSON parses")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn scratch(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("torsion-meet-test-{}-{name}", std::process::id()));
    path
}

#[test]
fn branch_reports_the_reference_locus() {
    let env: Envelope<BranchReport> =
        json_report(&["branch", "--curve", "legendre:2", "--map", "x", "--json"]);
    assert_eq!(env.command, "branch");
    assert!(env.warnings.is_empty());
    assert_eq!(env.report.finite_part, "t*(t-1)*(t-2)");
    assert!(env.report.inf);
    assert_eq!(env.report.degree, 2);
    assert_eq!(env.report.branch_values, 4);
    assert_eq!(env.report.total_defect, env.report.expected_defect);
}

#[test]
fn invalid_inputs_exit_with_two() {
    let singular = run(&["branch", "--curve", "legendre:1", "--map", "x"]);
    assert_eq!(exit_code(&singular), 2);
    let degenerate = run(&["branch", "--curve", "weierstrass:0,0", "--map", "x"]);
    assert_eq!(exit_code(&degenerate), 2);
    let constant = run(&["branch", "--curve", "weierstrass:0,1", "--map", "5"]);
    assert_eq!(exit_code(&constant), 2);
    let truncated = run(&["branch", "--curve", "weierstrass:0,1", "--map", "x + y/"]);
    assert_eq!(exit_code(&truncated), 2);
    assert!(String::from_utf8_lossy(&truncated.stderr).contains("offset 6"));
    let missing = run(&["branch", "--curve", "weierstrass:0,1"]);
    assert_eq!(exit_code(&missing), 2);
    let float_curve = run(&["branch", "--curve", "weierstrass:0.5,1", "--map", "x"]);
    assert_eq!(exit_code(&float_curve), 2);
    let csv_unsupported =
        run(&["branch", "--curve", "legendre:2", "--map", "x", "--csv"]);
    assert_eq!(exit_code(&csv_unsupported), 2);
}

#[test]
fn degree_routes_agree() {
    let env: Envelope<DegreeReport> =
        json_report(&["degree", "--curve", "weierstrass:0,1", "--map", "(y+1)/x", "--json"]);
    assert_eq!(env.report.degree, 2);
    assert_eq!(env.report.polar_degree, 2);
    assert_eq!(env.report.fiber_degree, 2);
    assert!(!env.report.even);
}

#[test]
fn chi_warns_on_the_diagonal_and_counts_the_reference_cell() {
    let diag: Envelope<ChiReport> =
        json_report(&["chi", "--curve", "legendre:2", "--map", "x", "--json"]);
    assert_eq!(diag.warnings, vec!["branch loci equal; theorem hypotheses not satisfied"]);
    assert!(!diag.report.hypothesis_ok);

    let cell: Envelope<ChiReport> = json_report(&[
        "chi", "--curve", "legendre:2", "--curve2", "legendre:3", "--map", "x", "--json",
    ]);
    assert!(cell.warnings.is_empty());
    assert_eq!(cell.report.chi_tilde, -2);
    assert_eq!(cell.report.degree_bound, 16);
    assert!(cell.report.hypothesis_ok);
    assert!(cell.report.slice_v1 <= cell.report.d2);
    assert!(cell.report.slice_v2 <= cell.report.d1);
}

#[test]
fn torsion_images_lists_the_two_torsion_values() {
    let env: Envelope<TorsionImagesReport> = json_report(&[
        "torsion-images", "--curve", "legendre:3", "--map", "x", "--level", "2", "--json",
    ]);
    assert_eq!(env.report.finite_part, "t*(t-1)*(t-3)");
    assert!(env.report.inf);
    assert_eq!(env.report.distinct_values, 4);
    assert_eq!(env.report.coefficients.len(), 4);
}

#[test]
fn intersect_matches_the_brute_force_recount() {
    let env: Envelope<IntersectReport> = json_report(&[
        "intersect", "--curve", "legendre:2", "--curve2", "legendre:3", "--map", "x",
        "--level", "2", "--brute", "--json",
    ]);
    assert_eq!(env.report.count, 3);
    assert_eq!(env.report.brute_count, Some(3));
    assert!(env.report.inf);

    let loose = run(&[
        "intersect", "--curve", "legendre:2", "--curve2", "legendre:3", "--map", "x",
        "--level", "2", "--brute", "--tolerance", "0.2",
    ]);
    assert_eq!(exit_code(&loose), 3);
    assert!(String::from_utf8_lossy(&loose.stderr).contains("internal consistency failure"));
}

#[test]
fn sweep_output_is_deterministic_and_regression_checked() {
    let args =
        ["sweep", "--lambdas", "2,3", "--mus", "2,3", "--levels", "2,3", "--csv"];
    let first = stdout_of(&run(&args));
    let second = stdout_of(&run(&args));
    assert_eq!(first, second);
    assert!(first.starts_with("# torsion-meet sweep-table v1\n"));
    assert!(first.contains("2,3,x,x,2,3,true"));

    let lock = scratch("sweep-lock.csv");
    let lock_str = lock.to_str().unwrap();
    let locked = run(&[&args[..], &["--regression-lock", lock_str]].concat());
    assert_eq!(exit_code(&locked), 0);
    assert_eq!(std::fs::read_to_string(&lock).unwrap(), first);

    let check = run(&[&args[..], &["--regression-check", lock_str]].concat());
    assert_eq!(exit_code(&check), 0);

    let tampered = first.replace("2,3,x,x,2,3,true", "2,3,x,x,2,4,true");
    std::fs::write(&lock, tampered).unwrap();
    let mismatch = run(&[&args[..], &["--regression-check", lock_str]].concat());
    assert_eq!(exit_code(&mismatch), 4);
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("regression mismatch"));
    std::fs::remove_file(&lock).ok();
}

#[test]
fn sweep_json_carries_the_grid_and_seed() {
    let env: Envelope<SweepReport> = json_report(&[
        "sweep", "--lambdas", "2,3", "--mus", "2,3", "--levels", "2,3", "--seed", "11",
        "--json",
    ]);
    assert_eq!(env.seed, Some(11));
    assert_eq!(env.report.rows.len(), 8);
    assert!(env.report.rows.iter().all(|r| r.error.is_none()));
}

#[test]
fn mw_reports_the_implied_constant() {
    let env: Envelope<MwReport> = json_report(&[
        "mw", "--curve", "weierstrass:0,1", "--map", "x", "--generators", "(2,3)",
        "--radius", "3", "--map2", "y", "--json",
    ]);
    assert_eq!(env.report.generators, 2);
    assert_eq!(env.report.count, 3);
    let implied = env.report.implied_constant;
    assert!((implied.powi(3) - env.report.count as f64).abs() < 1e-9);
    let off_curve = run(&[
        "mw", "--curve", "weierstrass:0,1", "--map", "x", "--generators", "(2,4)",
        "--radius", "3",
    ]);
    assert_eq!(exit_code(&off_curve), 2);
}

#[test]
fn nevanlinna_ratio_meets_its_tolerance() {
    let env: Envelope<NevanRatioReport> = json_report(&[
        "nevanlinna", "ratio", "--curve", "weierstrass:-1,0", "--map", "x", "--targets",
        "0; 1/3; inf", "--json",
    ]);
    assert!(env.warnings.is_empty());
    let expected = [0.5, 1.0, 0.5];
    for (row, want) in env.report.targets.iter().zip(expected) {
        assert!(row.ok, "target {} deviates by {}", row.target, row.deviation);
        assert_eq!(row.expected, want);
    }
}

#[test]
fn nevanlinna_smt_emits_one_counting_column_per_target() {
    let csv = stdout_of(&run(&[
        "nevanlinna", "smt", "--curve", "weierstrass:-1,0", "--map", "x", "--targets",
        "0; 1; -1; inf", "--csv",
    ]));
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert_eq!(header.split(',').count(), 7);
    assert!(header.starts_with("r,n1("));
    assert!(header.ends_with(",T,margin"));
    assert_eq!(lines.count(), 16);

    let env: Envelope<NevanSmtReport> = json_report(&[
        "nevanlinna", "smt", "--curve", "weierstrass:-1,0", "--map", "x", "--targets",
        "0; 1; -1; inf", "--json",
    ]);
    assert!(env.report.smt.ok);
    assert!(env.report.smt.margin.abs() <= 0.05 * env.report.smt.characteristic_at_r_max);
    let too_few = run(&[
        "nevanlinna", "smt", "--curve", "weierstrass:-1,0", "--map", "x", "--targets", "0; 1",
    ]);
    assert_eq!(exit_code(&too_few), 2);
}

#[test]
fn config_files_feed_and_flags_override() {
    let path = scratch("job.cfg");
    std::fs::write(
        &path,
        "# reference cell\ncurve = legendre:3\nmap = x\nlevel = 2\nseed = 5\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();

    let env: Envelope<TorsionImagesReport> =
        json_report(&["torsion-images", "--config", cfg, "--json"]);
    assert_eq!(env.seed, Some(5));
    assert_eq!(env.report.level, 2);
    assert_eq!(env.report.finite_part, "t*(t-1)*(t-3)");

    let overridden: Envelope<TorsionImagesReport> =
        json_report(&["torsion-images", "--config", cfg, "--level", "3", "--seed", "9", "--json"]);
    assert_eq!(overridden.seed, Some(9));
    assert_eq!(overridden.report.level, 3);

    let bad = scratch("bad.cfg");
    std::fs::write(&bad, "curve = legendre:3\nflavor = sour\n").unwrap();
    let rejected = run(&["torsion-images", "--config", bad.to_str().unwrap(), "--json"]);
    assert_eq!(exit_code(&rejected), 2);
    assert!(String::from_utf8_lossy(&rejected.stderr).contains("unknown key `flavor`"));

    std::fs::remove_file(&path).ok();
    std::fs::remove_file(&bad).ok();
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "intersect", "--curve", "legendre:2", "--curve2", "legendre:3", "--map", "x",
        "--level", "2", "--seed", "42", "--json",
    ];
    let first = stdout_of(&run(&args));
    let second = stdout_of(&run(&args));
    assert_eq!(first, second);
    let out_path = scratch("tee.json");
    let teed = run(&[&args[..], &["--out", out_path.to_str().unwrap()]].concat());
    assert_eq!(stdout_of(&teed), first);
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), first);
    std::fs::remove_file(&out_path).ok();
}
