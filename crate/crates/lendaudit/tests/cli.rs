use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lendaudit::builtin;
use lendaudit::core::policy::Jurisdiction;
use lendaudit::corpus::{run_corpus, CorpusOptions};
use lendaudit::formats::{load_policy, load_registry};
use lendaudit::report::{emit_report, read_reports, ReportFormat};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn apk(name: &str) -> PathBuf {
    fixtures().join("apks").join(format!("{name}.apk"))
}

fn lendaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lendaudit")).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn audit_exit_codes() {
    let violating = lendaudit(&["audit", arg(&apk("com.fx.pinoyloan")), "--jurisdiction", "Philippines"]);
    assert_eq!(violating.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&violating.stdout).unwrap();
    assert_eq!(report["app"]["package_id"], "com.fx.pinoyloan");
    assert_eq!(report["verdict"]["violates_country"], true);

    let clean = lendaudit(&["audit", arg(&apk("com.fx.tindahan")), "--jurisdiction", "Indonesia"]);
    assert_eq!(clean.status.code(), Some(0), "{}", String::from_utf8_lossy(&clean.stderr));

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.apk");
    std::fs::write(&junk, b"not a zip at all").unwrap();
    let broken = lendaudit(&["audit", arg(&junk), "--jurisdiction", "India"]);
    assert_eq!(broken.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&broken.stderr).contains("archive"));
}

#[test]
fn audit_writes_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = lendaudit(&["audit", arg(&apk("com.fx.naijacash")), "--jurisdiction", "Nigeria", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["jurisdiction"], "Nigeria");
}

#[test]
fn unknown_jurisdiction_is_a_usage_error() {
    let o = lendaudit(&["audit", arg(&apk("com.fx.pinoyloan")), "--jurisdiction", "Atlantis"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hooks_plan_lists_sources_and_sinks() {
    let o = lendaudit(&["hooks", arg(&apk("com.fx.pinoyloan")), "--jurisdiction", "Philippines"]);
    assert_eq!(o.status.code(), Some(0));
    let plan: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let hooks = plan["hooks"].as_array().unwrap();
    assert!(hooks.iter().any(|h| h["tag"] == "source"));
    assert!(hooks.iter().any(|h| h["tag"] == "sink" && h["capture"] == "args"));
}

#[test]
fn dynlog_reports_pre_registration_send() {
    let o = lendaudit(&[
        "dynlog",
        arg(&fixtures().join("events/pinoyloan.ndjson")),
        "--manifest-of",
        arg(&apk("com.fx.pinoyloan")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let findings = doc["findings"].as_array().unwrap();
    assert_eq!(findings.len(), 2);
    assert_eq!(findings[0]["category"], "contacts");
    assert_eq!(findings[0]["pre_registration"], true);
    assert_eq!(findings[0]["launch_time"], true);
    assert_eq!(findings[1]["pre_registration"], false);
}

#[test]
fn dynlog_rejects_malformed_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.ndjson");
    std::fs::write(&log, "{\"event_id\":\"a\",\"timestamp_ms\":10,\"tag\":\"marker\",\"marker_kind\":\"APP_LAUNCH\"}\n{oops\n").unwrap();
    let o = lendaudit(&["dynlog", arg(&log), "--manifest-of", arg(&apk("com.fx.pinoyloan"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn map_policy_replay_matches_expert_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("india-draft.toml");
    let o = lendaudit(&[
        "map-policy",
        arg(&fixtures().join("policy_docs/india-digital-lending.txt")),
        "--jurisdiction",
        "India",
        "--replay",
        arg(&fixtures().join("replay")),
        "--out",
        arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("READ_CONTACT_HISTORY"));
    let draft = load_policy(&std::fs::read_to_string(&out).unwrap(), "draft").unwrap();
    let expert = &builtin::policies()[&Jurisdiction::India];
    assert_eq!(draft.unconditional_permissions(), expert.unconditional_permissions());
    assert_eq!(draft.conditional_permissions(), expert.conditional_permissions());
    assert_eq!(draft.rules.len(), 8);
}

#[test]
fn print_request_matches_recording() {
    let o = lendaudit(&[
        "map-policy",
        arg(&fixtures().join("policy_docs/india-digital-lending.txt")),
        "--jurisdiction",
        "India",
        "--print-request",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let recorded = std::fs::read_to_string(fixtures().join("replay/India/gpt-4/request.txt")).unwrap();
    assert_eq!(stdout(&o), recorded);
}

#[test]
fn live_model_without_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("lendaudit.toml");
    std::fs::write(&config, "[llm]\nendpoint = \"http://127.0.0.1:9/v1/chat/completions\"\nmodel = \"m\"\napi_key_env = \"LENDAUDIT_TEST_NO_SUCH_KEY\"\n").unwrap();
    let o = lendaudit(&[
        "--config",
        arg(&config),
        "map-policy",
        arg(&fixtures().join("policy_docs/india-digital-lending.txt")),
        "--jurisdiction",
        "India",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

fn write_corpus(dir: &Path) -> PathBuf {
    let apks = dir.join("apks");
    std::fs::create_dir_all(apks.join("PH")).unwrap();
    std::fs::copy(apk("com.fx.pinoyloan"), apks.join("PH/com.fx.pinoyloan.apk")).unwrap();
    std::fs::copy(apk("com.fx.karachicredit"), apks.join("com.fx.karachicredit.apk")).unwrap();
    std::fs::copy(apk("com.fx.tindahan"), apks.join("com.fx.tindahan.apk")).unwrap();
    std::fs::write(apks.join("com.fx.broken.apk"), b"PK\x03\x04 truncated").unwrap();
    let registry = dir.join("registry.csv");
    std::fs::write(
        &registry,
        "country,status,package_id,app_name,registry_source\n\
         Philippines,approved,com.fx.pinoyloan,Pinoy Loan,SEC list\n\
         PK,delisted,com.fx.karachicredit,Karachi Credit,SECP list\n\
         Indonesia,approved,com.fx.tindahan,Tindahan,OJK list\n\
         Kenya,approved,com.fx.nowhere,Nowhere,CBK list\n\
         Nigeria,approved,com.fx.broken,Broken,FCCPC list\n",
    )
    .unwrap();
    registry
}

#[test]
fn corpus_run_counts_missing_and_failed_apps() {
    let dir = tempfile::tempdir().unwrap();
    let registry = load_registry(&std::fs::read(write_corpus(dir.path())).unwrap()).unwrap();
    let options = CorpusOptions { jobs: 2, generated_at: Some("2026-01-01T00:00:00Z".into()) };
    let outcome = run_corpus(&registry, &dir.path().join("apks"), &builtin::library(), &options).unwrap();
    assert_eq!(outcome.reports.len(), 3);
    assert_eq!(outcome.missing.len(), 1);
    assert_eq!(outcome.missing[0].package_id, "com.fx.nowhere");
    assert_eq!(outcome.failures.len(), 1);
    assert_eq!(outcome.failures[0].package_id, "com.fx.broken");

    let ph = outcome.summary.row(Jurisdiction::Philippines).unwrap();
    assert_eq!(ph.approved.country.to_string(), "1/1 (100.0%)");
    let pk = outcome.summary.row(Jurisdiction::Pakistan).unwrap();
    assert_eq!(pk.delisted.country.total, 1);
    let id = outcome.summary.row(Jurisdiction::Indonesia).unwrap();
    assert_eq!(id.approved.country.to_string(), "0/1 (0%)");
    let ke = outcome.summary.row(Jurisdiction::Kenya).unwrap();
    assert_eq!((ke.registry_approved, ke.approved.country.to_string()), (1, "0/0 (N/A)".to_string()));

    let out = dir.path().join("out");
    emit_report(&outcome.reports, &outcome.summary, ReportFormat::Structured, &out).unwrap();
    let back = read_reports(&out).unwrap();
    let mut expected = outcome.reports.clone();
    expected.sort_by_key(|r| r.file_name());
    assert_eq!(back, expected);
}

#[test]
fn corpus_cli_writes_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let registry = write_corpus(dir.path());
    let apks = dir.path().join("apks");
    let structured = dir.path().join("structured");
    let o = lendaudit(&["corpus", "--registry", arg(&registry), "--apk-dir", arg(&apks), "--out", arg(&structured)]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("missing APK: com.fx.nowhere"), "{stderr}");
    assert!(stderr.contains("failed: com.fx.broken"), "{stderr}");
    assert!(structured.join("summary.json").exists());
    assert!(structured.join("reports/PH-com.fx.pinoyloan.json").exists());
    let notices: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(structured.join("notices.json")).unwrap()).unwrap();
    assert_eq!(notices["missing"].as_array().unwrap().len(), 1);

    let tabular = dir.path().join("tabular");
    let o = lendaudit(&[
        "corpus", "--registry", arg(&registry), "--apk-dir", arg(&apks), "--out", arg(&tabular), "--format", "tabular",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let table = std::fs::read_to_string(tabular.join("summary.txt")).unwrap();
    assert!(table.contains("Philippines"));
    assert!(table.contains("1/1 (100.0%)"));
}

#[test]
fn corpus_rejects_bad_registry_header() {
    let dir = tempfile::tempdir().unwrap();
    let registry = dir.path().join("r.csv");
    std::fs::write(&registry, "nation,status,package\nIndia,approved,x\n").unwrap();
    let o = lendaudit(&["corpus", "--registry", arg(&registry), "--apk-dir", arg(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn custom_policy_directory_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let policies = dir.path().join("policies");
    std::fs::create_dir(&policies).unwrap();
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/policies");
    std::fs::copy(data.join("platform.toml"), policies.join("platform.toml")).unwrap();
    std::fs::write(
        policies.join("india.toml"),
        "jurisdiction = \"India\"\nversion = \"test\"\n\n[[rules]]\ndata_type = \"Apps\"\nprohibition = \"unconditional\"\npermissions = [\"android.permission.QUERY_ALL_PACKAGES\"]\nsource_clause = \"test\"\n",
    )
    .unwrap();
    let o = lendaudit(&["audit", arg(&apk("com.fx.pinoyloan")), "--jurisdiction", "India", "--policies", arg(&policies)]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let country = report["verdict"]["evidence"]["country"].as_array().unwrap();
    assert_eq!(country.len(), 1);
    assert_eq!(country[0]["permission"], "android.permission.QUERY_ALL_PACKAGES");
}
