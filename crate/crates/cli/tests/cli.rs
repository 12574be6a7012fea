use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tuv_cli::RunReport;

fn tuv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tuv"))
        .args(args)
        .env_remove("TUV_JOBS")
        .output()
        .expect("binary runs")
}

fn json_report(args: &[&str]) -> (i32, RunReport, String) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = tuv(&all);
    let text = String::from_utf8(out.stdout).unwrap();
    let report: RunReport = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    (out.status.code().unwrap(), report, text)
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn without_timings(text: &str) -> String {
    let mut v: Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v.to_string()
}

#[test]
fn enumerate_examples() {
    let (code, r, _) = json_report(&["enumerate", "1,3,3", "7"]);
    assert_eq!(code, 0);
    assert_eq!(r.checks[0].witnesses.len(), 16);

    let (_, r, _) = json_report(&["enumerate", "6,14,21", "41"]);
    assert!(r.checks[0].witnesses.contains(&"(1,1,1)".to_string()));

    let (_, r, _) = json_report(&["enumerate", "[[6,0,0],[0,40,20],[0,20,25]]", "0"]);
    assert_eq!(r.checks[0].witnesses, vec!["(0,0,0)"]);
}

#[test]
fn exit_codes_follow_the_contract() {
    assert_eq!(tuv(&["enumerate", "1,1,1", "3"]).status.code(), Some(0));
    assert_eq!(tuv(&["check-universal", "1", "1", "3", "1000"]).status.code(), Some(1));
    assert_eq!(tuv(&["precedes", "1,1,1", "1,1,1", "8", "7"]).status.code(), Some(0));
    for bad in [
        vec!["enumerate", "1,2", "3"],
        vec!["enumerate", "1,-1,1", "3"],
        vec!["check-universal", "3", "2", "1", "10"],
        vec!["verify-theorem", "999"],
        vec!["good-vectors", "1,1,1", "1,1,1", "0", "1"],
        vec!["frobnicate"],
        vec![],
    ] {
        assert_eq!(tuv(&bad).status.code(), Some(2), "{bad:?}");
    }
    let out = tuv(&["cert-verify", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not/here.json"));
}

#[test]
fn universality_and_sieves() {
    let (code, r, _) = json_report(&["check-universal", "2", "2", "6", "100000"]);
    assert_eq!(code, 0);
    assert!(r.checks[0].detail.contains("100000"));
    // x(x+1) is always even, so the Liouville triple (1,1,1) is universal only over triangular sums
    let (code, r, _) = json_report(&["check-universal", "1", "1", "1", "1000"]);
    assert_eq!(code, 1);
    assert!(r.checks[0].detail.starts_with("1 has no representation"));
    let (code, _, _) = json_report(&["check-universal", "1", "1", "1", "1000", "--triangular"]);
    assert_eq!(code, 0);
    let (_, r, _) = json_report(&["check-universal", "2", "3", "8", "1000"]);
    assert!(r.checks[0].detail.contains("conjectural beyond 1000"));

    let (code, r, _) = json_report(&["sieve", "sun", "10", "10000"]);
    assert_eq!(code, 0);
    assert_eq!(r.checks[0].witnesses.len(), 17);
    let (_, r, _) = json_report(&["sieve", "liouville", "6", "10000"]);
    assert_eq!(r.checks[0].witnesses.len(), 7);
    let (code, r, _) = json_report(&["sieve", "sun", "5", "100"]);
    assert_eq!(code, 0);
    assert!(r.checks[0].witnesses.len() >= 12);
}

#[test]
fn json_reports_round_trip() {
    let (_, r, text) = json_report(&["sieve", "liouville", "6", "1000"]);
    assert_eq!(r.to_json(), text.trim_end());
    let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
    assert_eq!(r.command, vec!["sieve", "liouville", "6", "1000"]);
}

#[test]
fn jobs_flag_wins_over_environment() {
    let run = |args: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_tuv"));
        c.args(args).arg("--json").env_remove("TUV_JOBS");
        if let Some(j) = env {
            c.env("TUV_JOBS", j);
        }
        let r: RunReport = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        r.config.jobs
    };
    let args = ["enumerate", "1,1,1", "3"];
    assert_eq!(run(&args, Some("3")), 3);
    assert_eq!(run(&["--jobs", "2", "enumerate", "1,1,1", "3"], Some("3")), 2);
    assert!(run(&args, None) >= 1);
}

#[test]
fn good_vectors_partition_the_sphere() {
    let (code, r, _) = json_report(&["good-vectors", "[[6,0,0],[0,40,20],[0,20,25]]", "1,30,120", "40", "31"]);
    assert_eq!(code, 0);
    let sizes: Vec<usize> = r.checks.iter().map(|c| c.witnesses.len()).collect();
    assert_eq!(sizes, vec![6400, 6336, 64]);
}

#[test]
fn precedence_examples() {
    let m2 = "[[1,0,0],[0,3,0],[0,0,3]]";
    let (code, r, _) = json_report(&["precedes", "1,3,3", m2, "8", "7"]);
    assert_eq!(code, 0, "{:?}", r.checks);
}

#[test]
fn bundled_certificates_are_accepted() {
    for name in ["lemma-226.json", "thm-237.json"] {
        let path = data(name);
        let (code, r, _) = json_report(&["cert-verify", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{name}: {:?}", r.checks);
        assert_eq!(r.checks.len(), 8);
    }
}

#[test]
fn mutated_certificate_is_rejected_at_similitude_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(data("lemma-226.json")).unwrap()).unwrap();
    let entry = v["matrices"]["T1"][0].as_i64().unwrap();
    v["matrices"]["T1"][0] = (entry + 1).into();
    let path = dir.path().join("mutated.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let (code, r, _) = json_report(&["cert-verify", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    let failing: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert!(failing.contains(&"stage Similitudes"), "{failing:?}");
    assert!(!failing.contains(&"stage Structure"), "{failing:?}");
}

#[test]
fn schema_violation_reports_the_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(data("thm-235.json")).unwrap()).unwrap();
    v["classes"][1]["predicate"]["modulus"] = "five".into();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = tuv(&["cert-verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("classes[1].predicate.modulus"), "{err}");
}

#[test]
fn verify_theorem_pipelines_pass() {
    for id in ["226", "235", "237"] {
        let (code, r, _) = json_report(&["verify-theorem", id, "--max-n", "1000"]);
        let failing: Vec<_> = r.checks.iter().filter(|c| !c.passed).collect();
        assert_eq!(code, 0, "{id}: {failing:?}");
        assert!(r.checks.iter().any(|c| c.name == "extraction"));
        assert!(r.checks.iter().any(|c| c.name == "genus coverage"));
        assert_eq!(r.checks.iter().any(|c| c.name == "mass identity"), id == "226");
    }
}

#[test]
fn caching_does_not_change_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let args = ["verify-theorem", "235", "--max-n", "300", "--n-empirical", "3000"];
    let (_, _, plain) = json_report(&args);
    let mut cached_args = args.to_vec();
    cached_args.extend(["--cache-dir", cache]);
    let (_, _, cold) = json_report(&cached_args);
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    let (_, _, warm) = json_report(&cached_args);
    assert_eq!(without_timings(&plain), without_timings(&cold));
    assert_eq!(without_timings(&plain), without_timings(&warm));
}
