use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn centnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_centnorm"))
        .args(args)
        .output()
        .expect("run centnorm")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Parses a TSV or CSV with a header into rows of fields.
fn rows(text: &str, sep: u8) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .delimiter(sep)
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn fit_value(fit_file: &str, key: &str) -> String {
    fit_file
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in fit file"))
        .to_owned()
}

fn fit_topgear(method: &str, dir: &Path) -> Output {
    let input = data("topgear_mpg.csv");
    centnorm(&[
        "fit",
        p(&input),
        "--family",
        "bc",
        "--prestandardize",
        "median",
        "--method",
        method,
        "--out-dir",
        p(dir),
    ])
}

#[test]
fn topgear_rewml_flags_the_plug_in_hybrids() {
    let dir = tempfile::tempdir().unwrap();
    let out = fit_topgear("rewml", dir.path());
    assert!(out.status.success(), "{}", stderr(&out));

    let fit = fs::read_to_string(dir.path().join("fit.txt")).unwrap();
    let lambda: f64 = fit_value(&fit, "lambda").parse().unwrap();
    assert!((lambda - 0.84).abs() <= 0.03, "lambda {lambda}");
    assert_eq!(fit_value(&fit, "flagged"), "3");

    let summary = rows(
        &fs::read_to_string(dir.path().join("summary.tsv")).unwrap(),
        b'\t',
    );
    let flagged: Vec<usize> = summary[0][12]
        .split(';')
        .map(|r| r.parse().unwrap())
        .collect();
    let input = rows(&fs::read_to_string(data("topgear_mpg.csv")).unwrap(), b',');
    let mut models: Vec<&str> = flagged.iter().map(|&r| input[r - 1][1].as_str()).collect();
    models.sort();
    assert_eq!(models, ["Ampera", "Volt", "i3"]);
    for &r in &flagged {
        assert!(["235", "470"].contains(&input[r - 1][2].as_str()));
    }
}

#[test]
fn topgear_ml_is_pulled_down() {
    let dir = tempfile::tempdir().unwrap();
    let out = fit_topgear("ml", dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let fit = fs::read_to_string(dir.path().join("fit.txt")).unwrap();
    let lambda: f64 = fit_value(&fit, "lambda").parse().unwrap();
    assert!((lambda + 0.11).abs() <= 0.03, "lambda {lambda}");
}

#[test]
fn qq_table_has_one_row_per_observed_value() {
    let dir = tempfile::tempdir().unwrap();
    assert!(fit_topgear("rewml", dir.path()).status.success());
    let qq = rows(
        &fs::read_to_string(dir.path().join("qq_MPG.tsv")).unwrap(),
        b'\t',
    );
    let input = rows(&fs::read_to_string(data("topgear_mpg.csv")).unwrap(), b',');
    let observed = input.iter().filter(|r| !r[2].is_empty()).count();
    assert_eq!(qq.len(), observed);
    let pairs: Vec<(f64, f64)> = qq
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert!(pairs
        .windows(2)
        .all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    // Twelve significant digits at most.
    for r in &qq {
        let digits = r[0]
            .trim_start_matches('-')
            .split('e')
            .next()
            .unwrap()
            .replace('.', "");
        assert!(digits.trim_start_matches('0').len() <= 12, "{}", r[0]);
    }
}

#[test]
fn transform_then_inverse_restores_weight() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("topgear_weight.csv");
    let d = dir.path();
    let fit = centnorm(&["fit", p(&input), "--family", "bc", "--out-dir", p(d)]);
    assert!(fit.status.success(), "{}", stderr(&fit));
    let fit_file = d.join("fit.txt");
    let (t, r) = (d.join("t.csv"), d.join("r.csv"));
    assert!(
        centnorm(&["transform", "--fit", p(&fit_file), p(&input), "-o", p(&t)])
            .status
            .success()
    );
    assert!(
        centnorm(&["inverse", "--fit", p(&fit_file), p(&t), "-o", p(&r)])
            .status
            .success()
    );

    let before = rows(&fs::read_to_string(&input).unwrap(), b',');
    let middle = rows(&fs::read_to_string(&t).unwrap(), b',');
    let after = rows(&fs::read_to_string(&r).unwrap(), b',');
    assert_eq!(before.len(), after.len());
    let mut worst = 0.0f64;
    let mut missing = 0;
    for ((b, m), a) in before.iter().zip(&middle).zip(&after) {
        assert_eq!(b[..2], a[..2]);
        if b[2].is_empty() {
            assert!(m[2].is_empty() && a[2].is_empty());
            missing += 1;
            continue;
        }
        let (x, y): (f64, f64) = (b[2].parse().unwrap(), a[2].parse().unwrap());
        worst = worst.max((x - y).abs() / x.abs());
    }
    assert!(missing > 0);
    assert!(worst < 1e-8, "max relative error {worst}");
}

const IDENTITY_FIT: &str = "\
column=v
family=yj
method=ml
lambda=1.0
lower_knot=none
upper_knot=none
location=0.0
scale=1.0
initial_lambda=none
prestandardize=none
pre_center=0.0
pre_scale=1.0
c=0.5
cutoff=0.995
trim=0.9
reweight_steps=2
lambda_min=-4.0
lambda_max=6.0
tolerance=0.0001
grid_points=21
n=4
flagged=0
";

#[test]
fn identity_fit_leaves_the_file_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("fit.txt"), IDENTITY_FIT).unwrap();
    let csv = "id,v\na,1.5\nb,\nc,-20.25\nd,0.001\ne,7\n";
    fs::write(d.join("in.csv"), csv).unwrap();
    for cmd in ["transform", "inverse"] {
        let out = centnorm(&[cmd, "--fit", p(&d.join("fit.txt")), p(&d.join("in.csv"))]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert_eq!(String::from_utf8(out.stdout).unwrap(), csv);
    }
}

#[test]
fn inverse_outside_the_box_cox_range_names_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Box-Cox at lambda 0.5 maps onto (-2, inf).
    let fit = IDENTITY_FIT
        .replace("family=yj", "family=bc")
        .replace("lambda=1.0", "lambda=0.5");
    fs::write(d.join("fit.txt"), fit).unwrap();
    fs::write(d.join("in.csv"), "id,v\na,1\nb,-3\nc,\nd,0\n").unwrap();
    let out_csv = d.join("out.csv");
    let out = centnorm(&[
        "inverse",
        "--fit",
        p(&d.join("fit.txt")),
        p(&d.join("in.csv")),
        "-o",
        p(&out_csv),
    ]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("row 2, column 'v'"), "{err}");
    assert!(err.contains("outside the range"), "{err}");
    let written = fs::read_to_string(out_csv).unwrap();
    assert_eq!(written, "id,v\na,2.25\nb,\nc,\nd,1\n");
}

#[test]
fn one_bad_column_does_not_stop_the_others() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("good,flat,label\n");
    for i in 0..40 {
        csv.push_str(&format!(
            "{},3,r{i}\n",
            (i as f64 * 0.37).sin() * 2.0 + i as f64 * 0.05
        ));
    }
    fs::write(d.join("in.csv"), csv).unwrap();
    let out = centnorm(&["fit", p(&d.join("in.csv")), "--out-dir", p(d)]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("column 'flat'") && err.contains("degenerate scale"),
        "{err}"
    );
    let fit = fs::read_to_string(d.join("fit.txt")).unwrap();
    assert!(fit.contains("column=good"));
    assert!(!fit.contains("column=flat") && !fit.contains("column=label"));
    assert!(d.join("qq_good.tsv").exists());

    let out = centnorm(&[
        "fit",
        p(&d.join("in.csv")),
        "--columns",
        "good,label,nope",
        "--out-dir",
        p(d),
    ]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("column 'label': row 1"), "{err}");
    assert!(err.contains("column 'nope'"), "{err}");
}

fn simulate(extra: &[&str], threads: Option<&str>) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_centnorm"));
    cmd.args([
        "simulate",
        "--family",
        "yj",
        "--lambda",
        "1",
        "--replications",
        "12",
    ]);
    cmd.args(extra);
    if let Some(t) = threads {
        cmd.env("CN_THREADS", t);
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    out.stdout
}

#[test]
fn k_sweep_has_eleven_rows_per_estimator() {
    let out = simulate(&["--eps", "0.10", "--k-sweep", "--seed", "42"], None);
    let table = rows(std::str::from_utf8(&out).unwrap(), b'\t');
    assert_eq!(table.len(), 11 * 6);
    let ks: Vec<&str> = table.iter().step_by(6).map(|r| r[5].as_str()).collect();
    assert_eq!(ks, ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "10"]);
}

#[test]
fn eps_sweep_has_four_levels() {
    let out = simulate(&["--k", "10", "--eps-sweep", "--method", "ml,rewml"], None);
    let table = rows(std::str::from_utf8(&out).unwrap(), b'\t');
    assert_eq!(table.len(), 4 * 2);
    let eps: Vec<&str> = table.iter().step_by(2).map(|r| r[4].as_str()).collect();
    assert_eq!(eps, ["0", "0.05", "0.1", "0.15"]);
}

#[test]
fn simulate_is_byte_for_byte_reproducible() {
    let args = ["--eps", "0.05", "--k", "6", "--seed", "42"];
    let first = simulate(&args, None);
    assert_eq!(first, simulate(&args, None));
    assert_eq!(first, simulate(&args, Some("1")));
    assert_ne!(
        first,
        simulate(&["--eps", "0.05", "--k", "6", "--seed", "43"], None)
    );
}

#[test]
fn rewml_sensitivity_vanishes_at_the_grid_ends() {
    let out = centnorm(&[
        "sensitivity",
        "--estimator",
        "rewml",
        "--family",
        "yj",
        "--n",
        "100",
        "--z",
        "-10:10:0.25",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = rows(std::str::from_utf8(&out.stdout).unwrap(), b'\t');
    assert_eq!(table.len(), 81);
    for r in [&table[0], &table[80]] {
        let sc: f64 = r[1].parse().unwrap();
        assert_eq!(sc, 0.0, "z = {}", r[0]);
    }
}

#[test]
fn ml_sensitivity_is_small_at_the_median() {
    for family in ["yj", "bc"] {
        let out = centnorm(&[
            "sensitivity",
            "--method",
            "ml",
            "--family",
            family,
            "--z",
            "0",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let table = rows(std::str::from_utf8(&out.stdout).unwrap(), b'\t');
        let sc: f64 = table[0].last().unwrap().parse().unwrap();
        assert!(sc.abs() < 0.5, "{family}: {sc}");
    }
}

#[test]
fn empty_z_grid_is_a_usage_error() {
    for grid in ["5:1:0.5", ""] {
        let out = centnorm(&["sensitivity", "--z", grid]);
        assert_eq!(out.status.code(), Some(2), "{grid:?}");
        assert!(stderr(&out).contains("empty"));
    }
}
