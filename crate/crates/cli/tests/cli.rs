use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman-lab"))
        .args(args)
        .output()
        .expect("spawn bergman-lab")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    let body: String = csv.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["family", "sigma", "N", "p", "alpha", "branch", "series", "x", "lhs", "rhs", "ratio"]
    );
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn header_value<'a>(csv: &'a str, key: &str) -> Option<&'a str> {
    csv.lines().find_map(|l| l.strip_prefix(&format!("# {key} = ")))
}

#[test]
fn main1_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("main1.csv");
    let o = lab(&[
        "verify-main1",
        "--sequence",
        "exp:sigma=0.5,n=10",
        "--weight",
        "standard:alpha=-0.5",
        "--p",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(header_value(&csv, "verdict"), Some("pass"));
    assert_eq!(header_value(&csv, "rad_order"), Some("128"));
    assert_eq!(header_value(&csv, "config_sha256").map(str::len), Some(64));
    let drift: f64 = header_value(&csv, "doubled_order_drift").unwrap().parse().unwrap();
    assert!(drift < 1e-6);
    let upper: Vec<usize> = data_rows(&csv)
        .iter()
        .filter(|r| r[6] == "upper")
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert_eq!(upper, [1, 2, 4, 8, 10]);
}

#[test]
fn unknown_config_key_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "p = 1\nalpha2 = 0.5\n").unwrap();
    let o = lab(&["verify-main1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("bad.cfg:2"), "{err}");
    assert!(err.contains("unknown key \"alpha2\""), "{err}");
}

#[test]
fn inner_eps_outside_gate_is_an_error() {
    let o = lab(&["verify-inner", "--eps", "0.6", "--sequence", "exp:sigma=0.5,n=3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("eps must be < 1/2"), "{}", stderr(&o));
}

#[test]
fn inadmissible_gate_exits_with_error() {
    let o = lab(&["verify-cor24", "--set", "p1=1.5", "--set", "p2=1", "--set", "drift=false"]);
    assert_eq!(o.status.code(), Some(1));
}

fn run_to(path: &Path, args: &[&str]) -> String {
    let mut all = args.to_vec();
    all.extend_from_slice(&["--seed", "11", "--set", "drift=false", "--out", path.to_str().unwrap()]);
    let o = lab(&all);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::read_to_string(path).unwrap()
}

const INTERP: [&str; 9] = [
    "verify-interp",
    "--sequence",
    "exp:sigma=0.5,n=6",
    "--p",
    "2",
    "--alpha",
    "0",
    "--trials",
    "5",
];

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_to(&dir.path().join("a.csv"), &INTERP);
    let b = run_to(&dir.path().join("b.csv"), &INTERP);
    assert_eq!(a, b);
}

#[test]
fn interp_flags_patch_the_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let csv = run_to(
        &dir.path().join("s.csv"),
        &["verify-interp", "--sigma", "0.4", "--n", "5", "--p", "2", "--alpha", "0", "--trials", "3"],
    );
    assert!(csv.contains("# config: sequence=exp:sigma=0.4,n=5\n"), "{csv}");
}

#[test]
fn ratio_column_is_lhs_over_rhs() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &INTERP,
        &["verify-prop12", "--alpha", "0", "--set", "lambda_points=8"],
        &["verify-duality", "--sequence", "exp:sigma=0.5,n=8", "--p", "1.5", "--alpha", "-0.4"],
        &["verify-power-growth", "--sequence", "radial:moduli=0.3;0.6"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let csv = std::fs::read_to_string({
            let p = dir.path().join(format!("{k}.csv"));
            let mut all = args.to_vec();
            all.extend_from_slice(&["--set", "drift=false", "--out", p.to_str().unwrap()]);
            let o = lab(&all);
            assert!(matches!(o.status.code(), Some(0) | Some(2)), "{}", stderr(&o));
            p
        })
        .unwrap();
        let rows = data_rows(&csv);
        assert!(!rows.is_empty());
        for r in rows {
            let (lhs, rhs, ratio): (f64, f64, f64) = (r[8].parse().unwrap(), r[9].parse().unwrap(), r[10].parse().unwrap());
            assert!((ratio - lhs / rhs).abs() <= 1e-12 * ratio.abs(), "{args:?}: {r:?}");
        }
    }
}
