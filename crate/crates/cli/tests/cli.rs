use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_topo-bc"));
    c.env_remove("TOPO_BC_THREADS");
    c
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn body(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn bounds_for_alternating_delayed_csit() {
    let o = run(&[
        "bounds",
        "--dist",
        config("alternating_dd.json").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("d_min = 6/5 (1.200000)"), "{s}");
    assert!(s.contains("achievable = 6/5 (1.200000) [optimal]"), "{s}");
    assert!(s.contains("gap = 0 (0.000000)"), "{s}");
}

#[test]
fn bounds_report_the_gap_of_the_fixed_topology_lower_bound() {
    let o = run(&[
        "bounds",
        "--dist",
        config("fixed_dd.json").to_str().unwrap(),
    ]);
    let s = stdout(&o);
    assert!(s.contains("d_min = 6/5"), "{s}");
    assert!(
        s.contains("achievable = 74/65 (1.138462) [lower-bound]"),
        "{s}"
    );
    assert!(s.contains("gap = 4/65"), "{s}");
}

#[test]
fn malformed_fractions_are_config_errors() {
    let o = run(&["bounds", "--dist", config("bad_sum.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fractions must sum to 1"));
}

#[test]
fn missing_files_and_bad_json_are_config_errors() {
    assert_eq!(
        run(&["bounds", "--dist", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"alpha\": 0.5,\n \"states\": [}").unwrap();
    let o = run(&["bounds", "--dist", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn unknown_scheme_and_unsupported_alpha_are_config_errors() {
    assert_eq!(
        run(&["simulate", "--scheme", "nope", "--alpha", "0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["simulate", "--scheme", "tsm3", "--alpha", "0.997", "--trials", "100"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["simulate", "--scheme", "zf"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zf.csv");
    let o = run(&[
        "simulate",
        "--scheme",
        "zf",
        "--alpha",
        "1/2",
        "--trials",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# tool: topo-bc"));
    let b = body(&csv);
    let lines: Vec<&str> = b.lines().collect();
    assert_eq!(lines[0], "snr_db,rho,rate_u1,rate_u2,rate_sum,se_sum");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("40,1e4,"));
    let slope: f64 = lines[4].split(',').nth(4).unwrap().parse().unwrap();
    assert!((slope - 1.5).abs() < 0.1, "{slope}");
}

#[test]
fn simulate_accepts_a_custom_distribution_for_the_concatenated_scheme() {
    let dist = config("pn_np_skewed.json");
    let o = run(&[
        "simulate",
        "--scheme",
        "tsm5",
        "--dist",
        dist.to_str().unwrap(),
        "--trials",
        "300",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains(&format!("# config: {}", dist.display())));
    let o = run(&[
        "simulate",
        "--scheme",
        "tsm1",
        "--dist",
        dist.to_str().unwrap(),
        "--trials",
        "300",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let args = [
        "simulate", "--scheme", "tsm3", "--alpha", "1/2", "--trials", "400", "--mode", "bitlevel",
    ];
    let a = bin()
        .args(args)
        .env("TOPO_BC_THREADS", "1")
        .output()
        .unwrap();
    let b = bin()
        .args(args)
        .env("TOPO_BC_THREADS", "3")
        .output()
        .unwrap();
    let c = bin().args(args).output().unwrap();
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(body(&stdout(&a)), body(&stdout(&b)));
    assert_eq!(body(&stdout(&a)), body(&stdout(&c)));
}

#[test]
fn manifest_invocation_regenerates_the_body() {
    let o = run(&[
        "simulate", "--scheme", "tsm1", "--alpha", "0.25", "--trials", "200", "--seed", "9",
    ]);
    let first = stdout(&o);
    let invocation = first
        .lines()
        .find_map(|l| l.strip_prefix("# invocation: topo-bc "))
        .unwrap();
    let again = run(&invocation.split(' ').collect::<Vec<_>>());
    assert_eq!(body(&first), body(&stdout(&again)));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let o = bin()
        .args([
            "simulate", "--scheme", "zf", "--alpha", "0.5", "--trials", "100",
        ])
        .env("TOPO_BC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn comparison_sweep_closed_forms() {
    let o = run(&["sweep"]);
    assert!(o.status.success());
    let s = body(&stdout(&o));
    let rows: Vec<&str> = s.lines().collect();
    assert_eq!(rows[0], "alpha,mat,su,tsm1,tsm2");
    assert_eq!(rows[1], "0,0.666667,1.000000,1.000000,1.000000");
    assert!(rows.contains(&"0.5,1.000000,1.000000,1.100000,1.166667"));
    assert_eq!(
        *rows.last().unwrap(),
        "1,1.333333,1.000000,1.333333,1.333333"
    );
}

#[test]
fn comparison_sweep_with_measured_columns() {
    let o = run(&["sweep", "--alpha", "1/2", "--simulated", "--trials", "1000"]);
    assert!(o.status.success());
    let s = body(&stdout(&o));
    let rows: Vec<&str> = s.lines().collect();
    assert_eq!(
        rows[0],
        "alpha,mat,su,tsm1,tsm2,mat_sim,su_sim,tsm1_sim,tsm2_sim"
    );
    let cells: Vec<f64> = rows[1].split(',').map(|c| c.parse().unwrap()).collect();
    for k in 0..4 {
        assert!((cells[1 + k] - cells[5 + k]).abs() < 0.08, "{}", rows[1]);
    }
}

#[test]
fn verify_fails_below_the_noise_floor() {
    let o = run(&[
        "verify",
        "--scheme",
        "zf",
        "--tolerance",
        "0.001",
        "--trials",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn verify_reports_wider_errors_with_fewer_trials() {
    let dir = tempfile::tempdir().unwrap();
    let se = |trials: &str| -> Vec<f64> {
        let out = dir.path().join(format!("v{trials}.csv"));
        run(&[
            "verify",
            "--scheme",
            "su",
            "--trials",
            trials,
            "--out",
            out.to_str().unwrap(),
        ]);
        let csv = std::fs::read_to_string(&out).unwrap();
        body(&csv)
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
            .collect()
    };
    let few = se("100");
    let many = se("2500");
    assert_eq!(few.len(), 5);
    assert!(few.iter().zip(&many).all(|(a, b)| a > b));
}

#[test]
fn verify_passes_on_schemes_without_finite_snr_lag() {
    let o = run(&["verify", "--scheme", "su,tsm3,pnnp-nd", "--trials", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn schemes_are_listed() {
    let s = stdout(&run(&["schemes"]));
    for name in [
        "zf",
        "su",
        "tsm1",
        "tsm3",
        "tsm4-mix",
        "tsm5-sa1-s1a",
        "mat-nd",
        "pnnp-nd",
    ] {
        assert!(
            s.lines().any(|l| l.split_whitespace().next() == Some(name)),
            "{name}"
        );
    }
}
