use std::process::{Command, Output};

use branchmix_cli::table::{Cell, Table};

fn branchmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_branchmix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn table(args: &[&str]) -> Table {
    let out = branchmix(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    Table::read_csv(&text).unwrap()
}

fn num(t: &Table, row: usize, col: &str) -> f64 {
    t.rows[row][t.column(col).unwrap()].as_f64().unwrap()
}

fn row_of(t: &Table, quantity: &str) -> usize {
    t.rows
        .iter()
        .position(|r| r[0].as_str() == Some(quantity))
        .unwrap_or_else(|| panic!("no row {quantity}"))
}

const ALL: &[&[&str]] = &[
    &["density", "--x", "-4:4:0.5", "--n-list", "0,5,25"],
    &["exceed", "--k", "1,3,10", "--n-list", "0,5,50"],
    &["ratio-table"],
    &["moments", "--schedule", "bleed:a1=0.2,lambda=0.9,N=12"],
    &["moments", "--schedule", "geometric:a=0.1,N=6"],
    &["loglog", "--x", "1:10:0.5", "--n-list", "0,5,50"],
    &[
        "validate",
        "--n-samples",
        "20000",
        "--schedule",
        "constant:a=0.1,N=4",
    ],
];

#[test]
fn every_command_parses_back_in_both_formats() {
    for args in ALL {
        let csv = branchmix(args);
        assert!(csv.status.success(), "{args:?}");
        let csv_text = String::from_utf8(csv.stdout).unwrap();
        assert!(!csv_text.contains('\r'));
        let from_csv = Table::read_csv(&csv_text).unwrap();

        let mut json_args = args.to_vec();
        json_args.extend(["--format", "json"]);
        let json_text = String::from_utf8(branchmix(&json_args).stdout).unwrap();
        let from_json = Table::read_json(&json_text).unwrap();
        assert_eq!(from_json.command, args[0]);
        assert_eq!(from_csv.columns, from_json.columns);
        assert_eq!(from_csv.rows.len(), from_json.rows.len());
        for (a, b) in from_csv.rows.iter().zip(&from_json.rows) {
            for (x, y) in a.iter().zip(b) {
                match (x.as_f64(), y.as_f64()) {
                    (Some(x), Some(y)) => {
                        assert!(x == y || (x.is_nan() && y.is_nan()), "{x} vs {y}")
                    }
                    _ => assert_eq!(x, y),
                }
            }
        }
    }
}

#[test]
fn json_carries_schema_version() {
    let out = branchmix(&["ratio-table", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
}

#[test]
fn identical_config_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for (i, args) in ALL.iter().enumerate() {
        for fmt in ["csv", "json"] {
            let paths: Vec<String> = (0..2)
                .map(|r| {
                    dir.path()
                        .join(format!("{i}_{fmt}_{r}"))
                        .display()
                        .to_string()
                })
                .collect();
            for p in &paths {
                let mut a = args.to_vec();
                a.extend(["--format", fmt, "--out", p, "--seed", "7"]);
                assert!(branchmix(&a).status.success());
            }
            assert_eq!(
                std::fs::read(&paths[0]).unwrap(),
                std::fs::read(&paths[1]).unwrap()
            );
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(
        branchmix(&["density", "--schedule", "constant:a=0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(branchmix(&["density", "--x", "1:2"]).status.code(), Some(2));
    assert_eq!(
        branchmix(&["density", "--format", "xml"]).status.code(),
        Some(2)
    );
    assert_eq!(branchmix(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        branchmix(&["density", "--schedule", "explicit:0.1,0.2", "--n-list", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        branchmix(&["density", "--sigma", "-1"]).status.code(),
        Some(3)
    );
    assert_eq!(
        branchmix(&["moments", "--orders", "9"]).status.code(),
        Some(3)
    );
    assert_eq!(
        branchmix(&["density", "--schedule", "bleed:a1=0.2,lambda=0.9,N=30"])
            .status
            .code(),
        Some(3)
    );
    let out = branchmix(&["density", "--sigma", "0"]);
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn density_grid_and_peak() {
    let t = table(&[
        "density",
        "--mu",
        "0",
        "--sigma",
        "1",
        "--schedule",
        "constant:a=0.1,N=5",
        "--x",
        "-4:4:0.05",
    ]);
    assert_eq!(t.rows.len(), 161);
    assert_eq!(num(&t, 0, "x"), -4.0);
    assert!((num(&t, 160, "x") - 4.0).abs() < 1e-12);

    let t = table(&["density", "--x", "-1:1:0.5", "--n-list", "0,5,10,25"]);
    assert!((num(&t, 2, "density_n0") - 0.398942).abs() < 1e-6);
    let peaks: Vec<f64> = ["density_n0", "density_n5", "density_n10", "density_n25"]
        .iter()
        .map(|c| num(&t, 2, c))
        .collect();
    assert!(peaks.windows(2).all(|w| w[1] > w[0]), "{peaks:?}");
}

#[test]
fn ratio_table_cells() {
    let t = table(&["ratio-table"]);
    assert_eq!(t.rows.len(), 10);
    let cell = |a: f64, n: i64, col: &str| {
        let r = t
            .rows
            .iter()
            .position(|r| r[0].as_f64() == Some(a) && r[1] == Cell::Int(n))
            .unwrap();
        num(&t, r, col)
    };
    assert!((cell(0.01, 20, "ratio_k5") / 1.720 - 1.0).abs() < 5e-3);
    assert!((cell(0.1, 25, "ratio_k10") / 3.62e18 - 1.0).abs() < 5e-3);

    let t = table(&[
        "ratio-table",
        "--a",
        "0.05,0.3",
        "--n-list",
        "0",
        "--k",
        "1,4",
    ]);
    for r in 0..t.rows.len() {
        assert_eq!(num(&t, r, "ratio_k1"), 1.0);
        assert_eq!(num(&t, r, "ratio_k4"), 1.0);
    }
}

#[test]
fn moments_reports() {
    let t = table(&["moments", "--schedule", "bleed:a1=0.2,lambda=0.9,N=12"]);
    let r = row_of(&t, "moment_4_limit");
    assert!((num(&t, r, "closed_form") / 9.88 - 1.0).abs() < 5e-3);
    for k in 1..=8 {
        let r = row_of(&t, &format!("moment_{k}"));
        assert!(num(&t, r, "rel_diff") < 1e-12);
    }

    let t = table(&["moments", "--schedule", "constant:a=0.1,N=10"]);
    let r = row_of(&t, "moment_2");
    assert!((num(&t, r, "closed_form") / 1.01_f64.powi(10) - 1.0).abs() < 1e-14);

    let t = table(&[
        "moments",
        "--mu",
        "0.3",
        "--sigma",
        "2",
        "--schedule",
        "constant:a=0,N=7",
    ]);
    for k in 1..=8 {
        let r = row_of(&t, &format!("moment_{k}"));
        let g = num(&t, r, "gaussian");
        assert!((num(&t, r, "closed_form") - g).abs() <= 1e-12 * g.abs().max(1.0));
        assert!((num(&t, r, "enumeration") - g).abs() <= 1e-12 * g.abs().max(1.0));
    }
    assert!((num(&t, row_of(&t, "kurtosis"), "closed_form") - 3.0).abs() < 1e-12);
}

#[test]
fn loglog_slopes() {
    let t = table(&["loglog", "--x", "1:10:0.1", "--n-list", "0,5,10,25,50"]);
    let slope_at = |n: i64, x: f64| {
        let r = t
            .rows
            .iter()
            .position(|r| r[0] == Cell::Int(n) && (r[1].as_f64().unwrap() - x).abs() < 1e-9)
            .unwrap();
        num(&t, r, "local_slope")
    };
    // Gaussian: slope keeps falling over [2, 8]
    let g: Vec<f64> = (20..=80).map(|i| slope_at(0, i as f64 / 10.0)).collect();
    assert!(g.windows(2).all(|w| w[1] < w[0]));
    let at6: Vec<f64> = [0, 5, 10, 25, 50]
        .iter()
        .map(|&n| slope_at(n, 6.0))
        .collect();
    assert!(at6.windows(2).all(|w| w[1] > w[0]), "{at6:?}");
}

#[test]
fn validate_passes_and_fails_as_it_should() {
    let out = branchmix(&[
        "validate",
        "--schedule",
        "constant:a=0.1,N=8",
        "--n-samples",
        "1000000",
        "--seed",
        "42",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let t = Table::read_csv(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    let status = t.column("status").unwrap();
    assert!(t.rows.iter().all(|r| r[status].as_str() == Some("pass")));

    let out = branchmix(&[
        "validate",
        "--schedule",
        "constant:a=0,N=5",
        "--n-samples",
        "100000",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = branchmix(&["validate", "--self-test", "--n-samples", "100000"]);
    assert_ne!(out.status.code(), Some(0));
    let t = Table::read_csv(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(
        t.rows[row_of(&t, "moment_2_shifted")][status].as_str(),
        Some("fail")
    );
}

#[test]
fn validate_flags_deep_tail() {
    let out = branchmix(&[
        "validate",
        "--n-samples",
        "10000",
        "--k",
        "10",
        "--orders",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let t = Table::read_csv(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    let status = t.column("status").unwrap();
    assert_eq!(
        t.rows[row_of(&t, "exceed_10")][status].as_str(),
        Some("unreliable")
    );
}

#[test]
fn validate_deep_schedules() {
    // beyond the enumeration ceiling: binomial tree or the sign-flip process
    for s in [
        "constant:a=0.1,N=40",
        "bleed:a1=0.2,lambda=0.9,N=40",
        "geometric:a=0.1,N=40",
    ] {
        let out = branchmix(&[
            "validate",
            "--schedule",
            s,
            "--n-samples",
            "200000",
            "--orders",
            "2,4",
            "--k",
            "2",
        ]);
        assert_eq!(out.status.code(), Some(0), "{s}");
    }
}
