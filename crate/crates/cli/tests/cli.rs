use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn skewjeff(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewjeff"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const QUICK: &str = "total=12000,burnin=2000,thin=10";

#[test]
fn propriety_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("two.csv"), "y\n0.3\n1.7\n").unwrap();
    let v = json_stdout(&skewjeff(
        &["check-propriety", "--data", "two.csv"],
        dir.path(),
    ));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["result"]["report"]["verdict"], "proper");

    fs::write(dir.path().join("tie.csv"), "y\n0.3\n0.3\n").unwrap();
    let v = json_stdout(&skewjeff(
        &[
            "check-propriety",
            "--data",
            "tie.csv",
            "--model",
            "skew-normal",
        ],
        dir.path(),
    ));
    assert_eq!(v["result"]["report"]["verdict"], "not_guaranteed");

    fs::write(dir.path().join("cens.csv"), "lo,hi\n-inf,0\n1,2\n").unwrap();
    let v = json_stdout(&skewjeff(
        &["check-propriety", "--data", "cens.csv"],
        dir.path(),
    ));
    assert_eq!(v["result"]["report"]["verdict"], "proper");
    fs::write(dir.path().join("overlap.csv"), "lo,hi\n-inf,1\n0,2\n").unwrap();
    let v = json_stdout(&skewjeff(
        &["check-propriety", "--data", "overlap.csv"],
        dir.path(),
    ));
    assert_eq!(v["result"]["report"]["verdict"], "not_guaranteed");
}

#[test]
fn prior_table_is_symmetric_and_versioned() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sl.json"), r#"{"family": "skew-logistic"}"#).unwrap();
    let out = skewjeff(
        &["prior-tab", "--model", "sl.json", "--out", "res"],
        dir.path(),
    );
    let v = json_stdout(&out);
    assert_eq!(v["config"]["model"], "sl.json");
    let saved: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/prior_table.json")).unwrap())
            .unwrap();
    assert_eq!(saved, v);

    let mut rdr = csv::Reader::from_path(dir.path().join("res/prior_table.csv")).unwrap();
    let rows: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    let m = rows.len();
    assert_eq!(m % 2, 1);
    for i in 0..m / 2 {
        let (a, b) = (rows[i], rows[m - 1 - i]);
        assert_eq!(a.0, -b.0);
        assert!(
            (a.1 - b.1).abs() <= 1e-10 * b.1,
            "lambda {}: {} vs {}",
            b.0,
            a.1,
            b.1
        );
    }

    // An explicit base/skew pair gives the same table.
    fs::write(
        dir.path().join("explicit.json"),
        r#"{"base": {"kind": "logistic"}, "skew": {"kind": "logistic_cdf"}}"#,
    )
    .unwrap();
    let w = json_stdout(&skewjeff(
        &["prior-tab", "--model", "explicit.json"],
        dir.path(),
    ));
    assert_eq!(w["result"], v["result"]);
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let dir = tempfile::tempdir().unwrap();
    assert!(skewjeff(
        &["prior-tab", "--model", "skew-normal", "--out", "o"],
        dir.path()
    )
    .status
    .success());
    let again = skewjeff(
        &["prior-tab", "--model", "skew-normal", "--out", "o"],
        dir.path(),
    );
    assert_eq!(again.status.code(), Some(2));
    assert!(stderr(&again).contains("--force"));
    assert!(skewjeff(
        &[
            "prior-tab",
            "--model",
            "skew-normal",
            "--out",
            "o",
            "--force"
        ],
        dir.path()
    )
    .status
    .success());
}

#[test]
fn usage_and_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = skewjeff(&["fit", "--data", "x.csv", "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = skewjeff(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    fs::write(dir.path().join("bad.csv"), "lo,hi\n0,1\n2,oops\n").unwrap();
    let out = skewjeff(&["check-propriety", "--data", "bad.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("line 3, column 2 (hi)"), "{msg}");

    fs::write(dir.path().join("ragged.csv"), "y\n1\n2,3\n").unwrap();
    let out = skewjeff(&["check-propriety", "--data", "ragged.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    fs::write(dir.path().join("m.json"), "{\"family\": \n ,}").unwrap();
    let out = skewjeff(&["prior-tab", "--model", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("line 2, column 2"),
        "{}",
        stderr(&out)
    );
    fs::write(dir.path().join("m.json"), "{\"family\": 7}").unwrap();
    assert_eq!(
        skewjeff(&["prior-tab", "--model", "m.json"], dir.path())
            .status
            .code(),
        Some(2)
    );

    let out = skewjeff(&["prior-tab", "--model", "skew-cauchy"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = skewjeff(
        &["fit", "--data", "x.csv", "--mcmc", "total=10,burnin=20"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let out = skewjeff(&["reproduce", "table8"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--data"));

    fs::write(
        dir.path().join("glm.csv"),
        "dose,n,y\n1.0,10,3\n2.0,10,11\n",
    )
    .unwrap();
    let out = skewjeff(
        &[
            "binreg",
            "--data",
            "glm.csv",
            "--link",
            "logit",
            "--reference",
            "logit",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("line 3, column 3 (y)"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn fit_is_reproducible_from_its_config() {
    let dir = tempfile::tempdir().unwrap();
    let ys: Vec<String> = (0..40)
        .map(|i| format!("{}", ((i * 37) % 40) as f64 * 0.11 - 1.3 + 0.002 * i as f64))
        .collect();
    fs::write(dir.path().join("y.csv"), format!("y\n{}\n", ys.join("\n"))).unwrap();
    let args = [
        "fit",
        "--data",
        "y.csv",
        "--mcmc",
        QUICK,
        "--seed",
        "7",
        "--marginal-draws",
        "2000",
    ];
    let a = json_stdout(&skewjeff(
        &[&args[..], &["--out", "a"]].concat(),
        dir.path(),
    ));
    json_stdout(&skewjeff(
        &[&args[..], &["--out", "b"]].concat(),
        dir.path(),
    ));
    let da = fs::read(dir.path().join("a/draws.csv")).unwrap();
    assert_eq!(da, fs::read(dir.path().join("b/draws.csv")).unwrap());
    assert_eq!(a["config"]["mcmc"]["seed"], 7);
    assert_eq!(a["config"]["mcmc"]["total_iterations"], 12000);
    assert_eq!(String::from_utf8(da).unwrap().lines().count(), 1 + 1000);
    let params = a["result"]["params"].as_array().unwrap();
    assert_eq!(params.len(), 3);
    for p in params {
        assert!(p["lower"].as_f64().unwrap() <= p["mean"].as_f64().unwrap());
        assert!(p["mean"].as_f64().unwrap() <= p["upper"].as_f64().unwrap());
    }
    assert!(a["result"]["log_marginal"]["log_value"].is_number());
    assert!(a["result"]["mle"]["aic"].is_number());
}

#[test]
fn stress_needs_force_for_ties() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("p.csv"),
        "x,y\n1,0\n2,1\n3,1.5\n0.2,0.9\n4,2.2\n1.1,1.3\n",
    )
    .unwrap();
    let out = skewjeff(&["stress", "--data", "p.csv", "--mcmc", QUICK], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("propriety"));
    let v = json_stdout(&skewjeff(
        &[
            "stress",
            "--data",
            "p.csv",
            "--mcmc",
            QUICK,
            "--force-improper",
            "--bins",
            "10",
            "--out",
            "s",
        ],
        dir.path(),
    ));
    assert_eq!(v["result"]["forced"], true);
    let hist = v["result"]["histogram"].as_array().unwrap();
    assert_eq!(hist.len(), 10);
    let (lo, hi) = (
        v["result"]["interval"][0].as_f64().unwrap(),
        v["result"]["interval"][1].as_f64().unwrap(),
    );
    assert!(0.0 < lo && lo < hi && hi < 1.0);
    let theta = fs::read_to_string(dir.path().join("s/theta.csv")).unwrap();
    assert!(theta.starts_with("theta,mu,sigma,lambda"));

    fs::write(dir.path().join("missing.csv"), "x,y\n1,0\n2,\n").unwrap();
    let out = skewjeff(&["stress", "--data", "missing.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("censored"));
}

#[test]
fn table6_logit_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&skewjeff(
        &["reproduce", "table6", "--link", "logit", "--out", "t6"],
        dir.path(),
    ));
    let cmp = &v["result"]["comparison"][0];
    assert_eq!(cmp["link"], "logit");
    assert!(cmp["max_abs_deviation"].as_f64().unwrap() <= 1.0, "{cmp}");
    let csv = fs::read_to_string(dir.path().join("t6/predictions.csv")).unwrap();
    assert!(csv.starts_with("dose,n,y,logit"));
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn coverage_writes_one_row_per_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let out = skewjeff(
        &[
            "coverage",
            "--n",
            "20",
            "--lambda0",
            "1",
            "--lambda0",
            "2",
            "--reps",
            "4",
            "--mcmc",
            "total=4000,burnin=1000,thin=3",
            "--out",
            "c",
            "--threads",
            "2",
        ],
        dir.path(),
    );
    let v = json_stdout(&out);
    let cells = v["result"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 6);
    assert!(cells
        .iter()
        .all(|c| c["completed"].as_u64().unwrap() + c["failed"].as_u64().unwrap() == 4));
    let csv = fs::read_to_string(dir.path().join("c/coverage.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn binreg_on_custom_data() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("glm.csv"),
        "dose,n,y\n1.6907,59,6\n1.7242,60,13\n1.7552,62,18\n1.7842,56,28\n1.8113,63,52\n1.8369,59,53\n1.8610,62,61\n1.8839,60,60\n",
    )
    .unwrap();
    let v = json_stdout(&skewjeff(
        &[
            "binreg",
            "--data",
            "glm.csv",
            "--link",
            "logit",
            "--link",
            "probit",
            "--reference",
            "logit",
            "--mcmc",
            "total=20000,burnin=5000,thin=15",
            "--importance-draws",
            "4000",
        ],
        dir.path(),
    ));
    let rows = v["result"]["comparison"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["bayes_factor"].as_f64().unwrap(), 1.0);
    assert!((rows[1]["aic"].as_f64().unwrap() - 375.36).abs() < 0.05);
}
