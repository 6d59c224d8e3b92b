use std::path::Path;
use std::process::{Command, Output};

fn noma_ra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-ra"))
        .args(args)
        .env_remove("NOMA_RA_SEED")
        .output()
        .expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = noma_ra(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn peak(csv: &str) -> (f64, f64) {
    rows(csv)
        .into_iter()
        .map(|r| (r[0], r[1]))
        .fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a })
}

fn report_value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .parse()
        .unwrap()
}

#[test]
fn curves_single_level_peaks_at_unit_load() {
    let csv = ok_stdout(&["curves", "--l", "1", "--grid", "0:3:0.01"]);
    assert!(csv.starts_with("load,normalized_throughput\n"));
    let (load, t) = peak(&csv);
    assert!(
        (load - 1.0).abs() < 1e-9 && (t - 0.3679).abs() < 1e-3,
        "{load} {t}"
    );
}

#[test]
fn curves_msaloha_equals_single_level_noma() {
    let aloha = ok_stdout(&["curves", "--scheme", "msaloha", "--grid", "0:4:0.25"]);
    let noma = ok_stdout(&["curves", "--l", "1", "--grid", "0:4:0.25"]);
    for (a, b) in rows(&aloha).iter().zip(rows(&noma)) {
        assert_eq!(a[0], b[0]);
        assert!((a[1] - b[1]).abs() < 1e-12);
    }
}

#[test]
fn curves_four_levels_peak_near_optimum() {
    let csv = ok_stdout(&["curves", "--grid", "0:6:0.05"]);
    let (load, t) = peak(&csv);
    assert!((load - 2.6).abs() < 0.1, "{load}");
    assert!((t - 1.1).abs() < 0.01, "{t}");
    let binom = ok_stdout(&["curves", "--model", "binomial", "--grid", "0:6:0.1"]);
    let pts = rows(&binom);
    assert_eq!(pts.len(), 61);
    assert!(pts
        .iter()
        .all(|r| (r[0] * 10.0 - (r[0] * 10.0).round()).abs() < 1e-9));
}

#[test]
fn optimal_report_and_sweep() {
    let report = ok_stdout(&["optimal"]);
    assert!((report_value(&report, "channel_load_star") - 2.6).abs() < 0.05);
    assert!((report_value(&report, "idle_threshold") - 0.7822).abs() < 1e-3);
    assert_eq!(report_value(&report, "u_star"), 26.0);

    let sweep = ok_stdout(&["optimal", "--l", "1..6"]);
    assert!(sweep.starts_with("l,lambda_star,channel_load_star,max_norm_throughput,gain\n"));
    let gains: Vec<f64> = rows(&sweep).iter().map(|r| r[4]).collect();
    assert_eq!(gains.len(), 6);
    assert!(gains.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn simulate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let trace = dir.path().join(format!("{name}.trace"));
        ok_stdout(&[
            "simulate",
            "--arrivals",
            "poisson:0.65",
            "--slots",
            "2000",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ]);
        (std::fs::read(&out).unwrap(), std::fs::read(&trace).unwrap())
    };
    let a = run("a.csv", "7");
    let b = run("b.csv", "7");
    let c = run("c.csv", "8");
    assert_eq!(a, b);
    assert_ne!(a.1, c.1);
    let summary = String::from_utf8(a.0).unwrap();
    assert!(
        summary.starts_with("scheme,n,l,load,slots,seed,mean_norm_throughput,idle_freq,std_err\n")
    );
    assert!(dir.path().join("a.csv.manifest.json").exists());
}

#[test]
fn simulate_seed_from_environment() {
    let with_env = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_noma-ra"))
            .args(["simulate", "--arrivals", "binomial:26", "--slots", "500"])
            .env("NOMA_RA_SEED", seed)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let flag = ok_stdout(&[
        "simulate",
        "--arrivals",
        "binomial:26",
        "--slots",
        "500",
        "--seed",
        "99",
    ]);
    assert_eq!(with_env("99"), flag.into_bytes());
}

#[test]
fn lone_packet_capture_paper_semantics() {
    // one user, two levels: the printed formula drops the weakest-level lone packet
    let csv = ok_stdout(&[
        "simulate",
        "--scheme",
        "capture",
        "--capture-semantics",
        "paper",
        "--arrivals",
        "binomial:1",
        "--n",
        "1",
        "--l",
        "2",
        "--slots",
        "20000",
    ]);
    let line = csv.lines().nth(1).unwrap();
    let t: f64 = line.split(',').nth(6).unwrap().parse().unwrap();
    assert!((t - 0.5).abs() < 0.02, "{t}");
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("scenario.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const TABLE_ONE: &str = r#"{"n":10,"l":4,"period_slots":25,"u_max":500,"seed":42,"barring":true,
  "schedule":[{"slots":1250,"users":20},{"slots":1250,"users":50},
              {"slots":1250,"users":80},{"slots":1250,"users":110}]}"#;

#[test]
fn barring_scenario_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TABLE_ONE);
    let on = ok_stdout(&["barring", "--config", &cfg]);
    assert_eq!(on.lines().count(), 201);
    assert_eq!(on, ok_stdout(&["barring", "--config", &cfg]));

    let off = ok_stdout(&["barring", "--config", &cfg, "--barring", "false"]);
    assert!(off.lines().skip(1).all(|l| l.ends_with(",1")));
    let reseeded = ok_stdout(&["barring", "--config", &cfg, "--seed", "43"]);
    assert_ne!(on, reseeded);
}

#[test]
fn compare_table_shape() {
    let csv = ok_stdout(&["compare", "--l", "1..4"]);
    assert!(csv.starts_with(
        "l,noma_max_norm_throughput,msaloha_max_norm_throughput,capture_max_norm_throughput,gain_vs_msaloha,gain_vs_capture\n"
    ));
    let r = rows(&csv);
    assert_eq!(r.len(), 4);
    assert!((r[0][4] - 1.0).abs() < 1e-6);
    assert!(r
        .iter()
        .all(|row| row[2] <= row[3] + 1e-12 && row[3] <= row[1] + 1e-12));
}

#[test]
fn bad_input_exits_with_usage_code() {
    assert_eq!(
        noma_ra(&["curves", "--grid", "3:1:0.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        noma_ra(&["simulate", "--arrivals", "poisson:-1"])
            .status
            .code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"n":10,"l":4,"period_slots":0,"u_max":500,"seed":1,"barring":true,"schedule":[]}"#,
    );
    let out = noma_ra(&["barring", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("period_slots"));

    let missing = noma_ra(&["barring", "--config", "/nonexistent/scenario.json"]);
    assert_eq!(missing.status.code(), Some(2));
}
