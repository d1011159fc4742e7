use std::fs;

use pindist::cli::{run, EXIT_INVARIANT, EXIT_OK, EXIT_REFUSED, EXIT_USAGE};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pindist").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn field<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{out}"))
}

#[test]
fn dist_reports_delta_size() {
    let (code, out, _) = invoke(&["dist", "--p", "3", "--gen", "interval", "--size", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "delta_size"), "3");
    assert_eq!(field(&out, "delta_set"), "0 1 2");
}

#[test]
fn dist_excluding_diagonal() {
    let (code, out, _) = invoke(&[
        "dist",
        "--p",
        "13",
        "--gen",
        "interval",
        "--size",
        "1",
        "--exclude-diagonal",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "delta_size"), "0");
}

#[test]
fn dist_listing_is_capped() {
    let (code, out, _) = invoke(&["dist", "--p", "1201", "--gen", "interval", "--size", "120"]);
    assert_eq!(code, EXIT_OK);
    assert!(field(&out, "delta_size").parse::<usize>().unwrap() > 1000);
    assert_eq!(field(&out, "delta_set").split(' ').count(), 1000);
    assert_eq!(field(&out, "delta_set_truncated"), "1000");
}

#[test]
fn count_n_with_oracle() {
    let (code, out, _) = invoke(&[
        "count-n", "--p", "3", "--gen", "interval", "--size", "2", "--oracle",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "n_total"), "24");
    assert_eq!(field(&out, "n_oracle"), "24");
    assert_eq!(field(&out, "oracle"), "agree");
}

#[test]
fn oracle_over_cap_is_refused() {
    let (code, out, err) = invoke(&[
        "count-n", "--p", "101", "--gen", "interval", "--size", "15", "--oracle",
    ]);
    assert_eq!(code, EXIT_REFUSED);
    assert!(out.is_empty());
    assert!(err.contains("exceeds cap"));
}

#[test]
fn non_prime_modulus_is_usage_error() {
    let (code, _, err) = invoke(&["dist", "--p", "4", "--gen", "interval", "--size", "2"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains('4'));
}

#[test]
fn conflicting_and_malformed_flags() {
    let (code, _, _) = invoke(&["dist", "--p", "5", "--set", "a.txt", "--gen", "interval"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = invoke(&["dist", "--p", "5"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, err) = invoke(&["dist", "--p", "5", "--gen", "zigzag:1", "--size", "2"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("zigzag:1"));
    let (code, _, _) = invoke(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("count-n"));
}

#[test]
fn set_files_are_reduced_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.txt");
    fs::write(&path, "0, 1\n6\n2\n").unwrap();
    let path = path.to_str().unwrap();
    let (code, out, err) = invoke(&["pin", "--p", "5", "--set", path]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "set"), "0 1 2");
    assert!(err.contains("warning"));
    assert_eq!(field(&out, "guaranteed_bound").split('/').count(), 2);

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1\nseven\n").unwrap();
    let (code, _, err) = invoke(&["pin", "--p", "5", "--set", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("seven"));

    let (code, _, err) = invoke(&["pin", "--p", "5", "--set", "/nonexistent/set.txt"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("/nonexistent/set.txt"));
}

#[test]
fn incidence_naive_and_bucketed_agree_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("points.txt");
    let pls = dir.path().join("planes.txt");
    let base = ["incidence", "--p", "11", "--gen", "ap:2:3", "--size", "4"];
    let (code, fast, _) = invoke(&base);
    assert_eq!(code, EXIT_OK);
    let mut args = base.to_vec();
    args.extend([
        "--naive",
        "--export-points",
        pts.to_str().unwrap(),
        "--export-planes",
        pls.to_str().unwrap(),
    ]);
    let (code, slow, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&fast, "incidences"), field(&slow, "incidences"));
    assert_eq!(field(&fast, "p_card"), "48");
    assert_eq!(field(&slow, "counter"), "naive");

    let (code, n_out, _) = invoke(&["count-n", "--p", "11", "--gen", "ap:2:3", "--size", "4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&n_out, "n_restricted"), field(&fast, "incidences"));

    let points = fs::read_to_string(&pts).unwrap();
    assert_eq!(points.lines().next(), Some("p=11"));
    assert_eq!(points.lines().count(), 49);
    let (m, planes) = pindist::incidence::read_planes(fs::read(&pls).unwrap().as_slice()).unwrap();
    assert_eq!(m.p(), 11);
    assert_eq!(planes.len(), 48);
}

#[test]
fn incidence_warns_above_p_squared() {
    let (code, out, err) = invoke(&["incidence", "--p", "7", "--gen", "interval", "--size", "5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "flag_p_vs_p2"), "0");
    assert!(err.contains("exceeds p^2"));
}

#[test]
fn verify_runs_and_guards() {
    let (code, out, _) = invoke(&["verify", "--p", "5", "--max-size", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "subsets_checked"), "25");
    assert_eq!(field(&out, "bound_failures"), "0");
    let (code, _, _) = invoke(&["verify", "--p", "17", "--max-size", "2"]);
    assert_eq!(code, EXIT_REFUSED);
    let (code, _, _) = invoke(&["verify", "--p", "17", "--max-size", "2", "--force"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn sweep_writes_csv_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(
        &cfg,
        "primes = 7, 11, 13\nsizes = 2, 3, 4\nspecs = interval, random\nseed = 5\n",
    )
    .unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let (code, out, _) = invoke(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "rows"), "18");
    assert_eq!(field(&out, "invariant_failures"), "0");
    let (code, _, _) = invoke(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let a = fs::read(&first).unwrap();
    assert_eq!(a, fs::read(&second).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("p,size_a,gen_kind,seed,delta_size,"));
    assert_eq!(text.lines().count(), 19);
}

#[test]
fn sweep_without_output_path_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(&cfg, "primes = 7\nsizes = 2\nspecs = interval\n").unwrap();
    let (code, _, err) = invoke(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("output"));
}

#[test]
fn exit_code_constants_are_distinct() {
    let codes = [EXIT_OK, EXIT_USAGE, EXIT_REFUSED, EXIT_INVARIANT];
    assert_eq!(codes, [0, 1, 2, 3]);
}
