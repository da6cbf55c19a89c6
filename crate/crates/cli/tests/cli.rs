use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use hydrofeat::regionalization::report::{
    read_correlations, read_evaluation, read_importance, read_pred_vs_obs, read_summaries, write_correlations,
    write_evaluation, write_importance, write_pred_vs_obs, write_summaries,
};

const SHORT_WINDOW: &str = "end = \"1984-12-31\"\n";

fn hydrofeat(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrofeat"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// A directory with a short-window synthetic extraction shared by the tests.
fn fixture() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap().keep();
        fs::write(dir.join("short.toml"), SHORT_WINDOW).unwrap();
        ok(&hydrofeat(&["extract", "--synthetic", "--config", "short.toml", "--out", "base"], &dir));
        dir
    })
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn extract_synthetic_gives_180_rows_and_is_reproducible() {
    let dir = fixture();
    let features = dir.join("base/features.csv");
    assert_eq!(lines(&features).len(), 1 + 180);
    assert_eq!(lines(&dir.join("base/exclusions.csv")), ["catchment_id,variable,reason"]);

    let before: Vec<Vec<u8>> = ["features.csv", "exclusions.csv", "run_config.toml"]
        .iter()
        .map(|f| fs::read(dir.join("base").join(f)).unwrap())
        .collect();
    let work = tempfile::tempdir().unwrap();
    fs::write(work.path().join("short.toml"), SHORT_WINDOW).unwrap();
    let out = dir.join("base").to_string_lossy().into_owned();
    ok(&hydrofeat(
        &["extract", "--synthetic", "--config", "short.toml", "--out", &out, "--workers", "3"],
        work.path(),
    ));
    let echo = fs::read_to_string(dir.join("base/run_config.toml")).unwrap();
    assert!(echo.contains("workers = 3"));
    assert_eq!(fs::read(&features).unwrap(), before[0]);
    assert_eq!(fs::read(dir.join("base/exclusions.csv")).unwrap(), before[1]);
}

#[test]
fn missing_attributes_file_exits_2_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = hydrofeat(
        &["extract", "--series-dir", ".", "--attributes", "no_such_attributes.csv", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_attributes.csv"));
}

#[test]
fn config_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(hydrofeat(&["crossval", "--synthetic", "--folds", "1"], p).status.code(), Some(4));
    assert_eq!(hydrofeat(&["crossval", "--synthetic", "--group", "S,X"], p).status.code(), Some(4));
    assert_eq!(hydrofeat(&["extract"], p).status.code(), Some(4));
    fs::write(p.join("bad.toml"), "trees = \"many\"\n").unwrap();
    assert_eq!(hydrofeat(&["extract", "--config", "bad.toml"], p).status.code(), Some(4));
    assert_eq!(hydrofeat(&["frobnicate"], p).status.code(), Some(4));
    assert_eq!(hydrofeat(&["--help"], p).status.code(), Some(0));
}

#[test]
fn strict_policy_fails_on_broken_catchment() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let src = fixture().join("base/synthetic");
    let series = p.join("series");
    fs::create_dir(&series).unwrap();
    for entry in fs::read_dir(src.join("series")).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name().into_string().unwrap();
        if name.starts_with("syn00") {
            fs::copy(entry.path(), series.join(&name)).unwrap();
        }
    }
    let attrs: Vec<String> = lines(&src.join("attributes.csv"))
        .into_iter()
        .filter(|l| !l.starts_with("syn") || l.starts_with("syn00"))
        .collect();
    fs::write(p.join("attributes.csv"), attrs.join("\n")).unwrap();
    // Constant streamflow cannot be standardized.
    let q = series.join("syn004_streamflow.csv");
    let flat: Vec<String> = lines(&q)
        .into_iter()
        .enumerate()
        .map(|(i, l)| if i == 0 { l } else { format!("{},1.0", &l[..10]) })
        .collect();
    fs::write(&q, flat.join("\n")).unwrap();
    fs::write(p.join("short.toml"), SHORT_WINDOW).unwrap();

    let args = ["extract", "--series-dir", "series", "--attributes", "attributes.csv", "--config", "short.toml"];
    let strict = hydrofeat(&[&args[..], &["--strict", "--out", "s"]].concat(), p);
    assert_eq!(strict.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("syn004"));

    ok(&hydrofeat(&[&args[..], &["--out", "d"]].concat(), p));
    let excl = lines(&p.join("d/exclusions.csv"));
    assert_eq!(excl.len(), 2);
    assert!(excl[1].starts_with("syn004,streamflow,"), "{excl:?}");
    // Catchments syn001..syn009 minus the broken one, three rows each.
    assert_eq!(lines(&p.join("d/features.csv")).len(), 1 + 8 * 3);
}

fn analysis(command: &str, extra: &[&str], out: &str) -> PathBuf {
    let dir = fixture();
    let mut args = vec![
        command,
        "--features",
        "base/features.csv",
        "--attributes",
        "base/synthetic/attributes.csv",
        "--trees",
        "20",
        "--out",
        out,
    ];
    args.extend(extra);
    ok(&hydrofeat(&args, dir));
    dir.join(out)
}

fn assert_reserializes<T>(path: &Path, read: impl Fn(&[u8]) -> T, write: impl Fn(&T, &mut Vec<u8>)) {
    let bytes = fs::read(path).unwrap();
    let mut again = Vec::new();
    write(&read(&bytes), &mut again);
    assert_eq!(again, bytes, "{} does not round-trip", path.display());
}

#[test]
fn correlate_writes_2100_ordered_rows() {
    let out = analysis("correlate", &[], "corr");
    let rows = lines(&out.join("correlations.csv"));
    assert_eq!(rows.len(), 1 + 2100);
    assert!(rows[1].starts_with("log_elev_mean,x_acf1,"));
    assert!(rows[2100].starts_with("precipitation.trough,trough,"));
    for r in &rows[1..] {
        let rho = r.rsplit(',').next().unwrap();
        assert!(rho == "undefined" || (-1.0..=1.0).contains(&rho.parse::<f64>().unwrap()), "{r}");
    }
    assert_reserializes(
        &out.join("correlations.csv"),
        |b| read_correlations(b).unwrap(),
        |m, w| write_correlations(m, w).unwrap(),
    );
}

#[test]
fn importance_ranks_are_permutations_and_reproducible() {
    let out = analysis("importance", &[], "imp");
    let reports = read_importance(&fs::read(out.join("importance.csv")).unwrap()[..]).unwrap();
    assert_eq!(reports.len(), 28);
    for t in &reports {
        let mut ranks = t.report.ranks.clone();
        ranks.sort_unstable();
        assert_eq!(ranks, (1..=75).collect::<Vec<_>>());
    }
    assert_reserializes(
        &out.join("importance.csv"),
        |b| read_importance(b).unwrap(),
        |r, w| write_importance(r, w).unwrap(),
    );
    let again = analysis("importance", &["--workers", "2"], "imp2");
    assert_eq!(fs::read(out.join("importance.csv")).unwrap(), fs::read(again.join("importance.csv")).unwrap());
}

#[test]
fn crossval_reports_196_scores() {
    let out = analysis("crossval", &[], "cv");
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("evaluation.json")).unwrap()).unwrap();
    let rmse = json["rmse"].as_array().unwrap();
    assert_eq!(rmse.iter().map(|r| r.as_array().unwrap().len()).sum::<usize>(), 196);
    let report = read_evaluation(&fs::read(out.join("evaluation.json")).unwrap()[..]).unwrap();
    for (ranks, rel) in report.ranks.iter().zip(&report.relative_scores) {
        let mut r = ranks.clone();
        r.sort_unstable();
        assert_eq!(r, (1..=7).collect::<Vec<_>>());
        assert_eq!(rel[0], 0.0);
    }
    assert_eq!(lines(&out.join("pred_vs_obs.csv")).len(), 1 + 28 * 60);
    assert_reserializes(
        &out.join("evaluation.json"),
        |b| read_evaluation(b).unwrap(),
        |r, w| write_evaluation(r, w).unwrap(),
    );
    assert_reserializes(
        &out.join("pred_vs_obs.csv"),
        |b| read_pred_vs_obs(b).unwrap(),
        |r, w| write_pred_vs_obs(r, w).unwrap(),
    );
}

#[test]
fn crossval_group_restriction_keeps_baseline() {
    let out = analysis("crossval", &["--group", "S+P"], "cv_sp");
    let report = read_evaluation(&fs::read(out.join("evaluation.json")).unwrap()[..]).unwrap();
    let labels: Vec<&str> = report.groups.iter().map(|g| g.label()).collect();
    assert_eq!(labels, ["S", "S+P"]);
    assert_eq!(report.n_scores(), 56);
    assert_eq!(lines(&out.join("pred_vs_obs.csv")).len(), 1);
}

#[test]
fn report_writes_84_ordered_summaries() {
    let out = analysis("report", &[], "rep");
    let rows = read_summaries(&fs::read(out.join("summaries.csv")).unwrap()[..]).unwrap();
    assert_eq!(rows.len(), 84);
    for s in &rows {
        assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max, "{s:?}");
    }
    assert_reserializes(
        &out.join("summaries.csv"),
        |b| read_summaries(b).unwrap(),
        |r, w| write_summaries(r, w).unwrap(),
    );
}
