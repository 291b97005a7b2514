use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn disamb() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_disamb"));
    cmd.env_remove("DISAMB_GENDER_DICT");
    cmd
}

fn core_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core").join(rel)
}

fn golden(rel: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(rel)).unwrap()
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn disamb")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn ingest_fixture(dir: &Path) -> PathBuf {
    let table = dir.join("careers.tsv");
    let out = run(disamb()
        .arg("ingest")
        .arg(core_file("tests/fixtures/filter_fidelity.jsonl"))
        .arg("-o")
        .arg(&table));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    table
}

#[test]
fn ingest_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let table = ingest_fixture(dir.path());
    assert_eq!(
        std::fs::read_to_string(&table).unwrap(),
        std::fs::read_to_string(core_file("tests/fixtures/filter_fidelity_expected.tsv")).unwrap()
    );
    let text = std::fs::read_to_string(dir.path().join("careers.tsv.manifest.json")).unwrap();
    assert_eq!(text.lines().count(), 1);
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["command"], "ingest");
    assert_eq!(m["counts"]["lines_read"], 20);
    assert_eq!(m["counts"]["works_eligible"], 15);
    assert_eq!(m["counts"]["authors_selected"], 9);
    assert_eq!(m["counts"]["careers_emitted"], 8);
    assert_eq!(m["counts"]["rows_dropped_early_debut"], 1);
    assert!(m["inputs"][0]["bytes"].as_u64().unwrap() > 0);
}

#[test]
fn ingest_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(disamb().args(["ingest", "no/such/file.jsonl", "-o"]).arg(dir.path().join("x.tsv")));
    assert_eq!(code(&out), 2);

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{oops\nnot json\n").unwrap();
    let out = run(disamb().arg("ingest").arg(&bad).arg("-o").arg(dir.path().join("x.tsv")));
    assert_eq!(code(&out), 3);

    let out = run(disamb()
        .arg("ingest")
        .arg(&bad)
        .args(["--max-error-rate", "1", "-o"])
        .arg(dir.path().join("x.tsv")));
    assert_eq!(code(&out), 0);

    assert_eq!(code(&run(disamb().arg("ingest"))), 1);
    assert_eq!(code(&run(disamb().arg("frobnicate"))), 1);
    assert_eq!(code(&run(disamb().arg("--help"))), 0);
}

#[test]
fn gender_annotation_is_idempotent_and_touches_only_gender() {
    let dir = tempfile::tempdir().unwrap();
    let table = ingest_fixture(dir.path());
    let once = dir.path().join("once.tsv");
    let twice = dir.path().join("twice.tsv");
    let dict = core_file("data/fixture_gender_dict.csv");
    assert_eq!(code(&run(disamb().arg("gender").arg(&table).arg("--gender-dict").arg(&dict).arg("-o").arg(&once))), 0);
    // dictionary from the environment this time
    let out = run(disamb().env("DISAMB_GENDER_DICT", &dict).arg("gender").arg(&once).arg("-o").arg(&twice));
    assert_eq!(code(&out), 0);
    let a = std::fs::read_to_string(&once).unwrap();
    assert_eq!(a, std::fs::read_to_string(&twice).unwrap());
    let strip = |s: &str| -> Vec<String> {
        s.lines().map(|l| l.rsplit_once('\t').unwrap().0.to_string()).collect()
    };
    assert_eq!(strip(&a), strip(&std::fs::read_to_string(&table).unwrap()));
    assert_eq!(a, golden("careers_gender.tsv"));
}

#[test]
fn gender_dictionary_errors() {
    let dir = tempfile::tempdir().unwrap();
    let table = ingest_fixture(dir.path());
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "name,p_gf\n").unwrap();
    let out = dir.path().join("g.tsv");
    assert_eq!(code(&run(disamb().arg("gender").arg(&table).arg("--gender-dict").arg(&empty).arg("-o").arg(&out))), 2);
    assert_eq!(code(&run(disamb().arg("gender").arg(&table).arg("--gender-dict").arg("missing.csv").arg("-o").arg(&out))), 2);
    assert_eq!(code(&run(disamb().arg("gender").arg(&table).arg("-o").arg(&out))), 2);
}

#[test]
fn report_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let table = ingest_fixture(dir.path());
    let rep = dir.path().join("rep");
    assert_eq!(code(&run(disamb().arg("report").arg(&table).arg("--out-dir").arg(&rep))), 0);
    assert_eq!(std::fs::read_to_string(rep.join("cohort_report.csv")).unwrap(), golden("cohort_report.csv"));
    assert_eq!(std::fs::read_to_string(rep.join("tti_histogram.csv")).unwrap(), golden("tti_histogram.csv"));
    assert!(rep.join("manifest.json").exists());
}

#[test]
fn report_gender_strata_need_annotation() {
    let dir = tempfile::tempdir().unwrap();
    let table = ingest_fixture(dir.path());
    let out = run(disamb().arg("report").arg(&table).args(["--strata", "all,gender", "--out-dir"]).arg(dir.path().join("r")));
    assert_eq!(code(&out), 4);
    assert_eq!(code(&run(disamb().arg("report").arg(&table).args(["--strata", "nonsense", "--out-dir"]).arg(dir.path().join("r")))), 1);
}

#[test]
fn zero_window_rates_are_all_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let truth = dir.path().join("t.tsv");
    let out = run(disamb()
        .args(["synth", "--n-authors", "800", "--split-rate", "0.3", "--seed", "2", "-o"])
        .arg(&corpus)
        .arg("--truth")
        .arg(&truth));
    assert_eq!(code(&out), 0);
    let table = dir.path().join("careers.tsv");
    assert_eq!(code(&run(disamb().arg("ingest").arg(&corpus).arg("-o").arg(&table))), 0);
    let rep = dir.path().join("rep");
    assert_eq!(code(&run(disamb().arg("report").arg(&table).args(["--window", "0", "--out-dir"]).arg(&rep))), 0);
    let csv = std::fs::read_to_string(rep.join("cohort_report.csv")).unwrap();
    let rates: Vec<&str> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).filter(|r| !r.is_empty()).collect();
    assert!(!rates.is_empty());
    assert!(rates.iter().all(|r| *r == "1.000000"), "{rates:?}");
}

#[test]
fn synth_is_deterministic_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let corpus = dir.path().join(format!("c{i}.jsonl.gz"));
        let truth = dir.path().join(format!("t{i}.tsv"));
        let out = run(disamb().args(["synth", "--n-authors", "100", "--seed", "7", "-o"]).arg(&corpus).arg("--truth").arg(&truth));
        assert_eq!(code(&out), 0);
        outputs.push((std::fs::read(&corpus).unwrap(), std::fs::read(&truth).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);

    let corpus = dir.path().join("bad.jsonl");
    let truth = dir.path().join("bad.tsv");
    let out = run(disamb().args(["synth", "--split-rate", "1.5", "-o"]).arg(&corpus).arg("--truth").arg(&truth));
    assert_eq!(code(&out), 2);

    let empty = dir.path().join("empty.jsonl");
    let out = run(disamb().args(["synth", "--n-authors", "0", "-o"]).arg(&empty).arg("--truth").arg(&truth));
    assert_eq!(code(&out), 0);
    assert!(std::fs::read(&empty).unwrap().is_empty());
}

#[test]
fn threads_do_not_change_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let truth = dir.path().join("t.tsv");
    let out = run(disamb().args(["synth", "--n-authors", "1500", "--split-rate", "0.2", "-o"]).arg(&corpus).arg("--truth").arg(&truth));
    assert_eq!(code(&out), 0);
    let tables: Vec<Vec<u8>> = [1, 4]
        .iter()
        .map(|t| {
            let table = dir.path().join(format!("careers{t}.tsv"));
            let out = run(disamb().arg("ingest").arg(&corpus).args(["--threads", &t.to_string(), "-o"]).arg(&table));
            assert_eq!(code(&out), 0);
            std::fs::read(&table).unwrap()
        })
        .collect();
    assert_eq!(tables[0], tables[1]);
}

fn headline_rate(dir: &Path, split: &str) -> f64 {
    let out_dir = dir.join(format!("audit{split}"));
    let out = run(disamb()
        .args(["audit", "--synth", "--n-authors", "6000", "--seed", "3", "--split-rate", split, "--out-dir"])
        .arg(&out_dir));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("debut-year anomaly rate"));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    m["headline"]["anomaly_rate"].as_f64().unwrap()
}

#[test]
fn audit_headline_rises_with_split_rate() {
    let dir = tempfile::tempdir().unwrap();
    let clean = headline_rate(dir.path(), "0");
    let split = headline_rate(dir.path(), "0.5");
    assert!(split > clean, "{split} <= {clean}");
}

#[test]
fn audit_fixture_manifest_counts_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("audit");
    let out = run(disamb()
        .arg("audit")
        .arg(core_file("tests/fixtures/filter_fidelity.jsonl"))
        .arg("--gender-dict")
        .arg(core_file("data/fixture_gender_dict.csv"))
        .args(["--strata", "all,gender,continent-gender", "--out-dir"])
        .arg(&out_dir));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["counts"]["lines_read"], 20);
    assert_eq!(m["counts"]["parse_errors"], 0);
    assert_eq!(m["counts"]["works_eligible"], 15);
    assert_eq!(m["counts"]["authors_selected"], 9);
    assert_eq!(m["counts"]["rows_dropped_early_debut"], 1);
    assert_eq!(m["headline"]["n_anomalous"], 1);
    assert_eq!(m["headline"]["n_independent_within_window"], 7);

    assert_eq!(code(&run(disamb().arg("audit").arg("--out-dir").arg(dir.path().join("x")))), 1);
}

#[test]
fn oracle_command_agrees_with_streaming_commands() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl.gz");
    let truth = dir.path().join("t.tsv");
    let out = run(disamb().args(["synth", "--n-authors", "400", "--split-rate", "0.4", "--seed", "9", "-o"]).arg(&corpus).arg("--truth").arg(&truth));
    assert_eq!(code(&out), 0);
    let audit = dir.path().join("audit");
    let oracle = dir.path().join("oracle");
    assert_eq!(code(&run(disamb().arg("audit").arg(&corpus).arg("--out-dir").arg(&audit))), 0);
    assert_eq!(code(&run(disamb().arg("oracle").arg(&corpus).arg("--out-dir").arg(&oracle))), 0);
    for f in ["careers.tsv", "cohort_report.csv", "tti_histogram.csv"] {
        assert_eq!(std::fs::read(audit.join(f)).unwrap(), std::fs::read(oracle.join(f)).unwrap(), "{f}");
    }
}
