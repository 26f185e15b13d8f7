//! Per-app structured reports and the per-country summary table.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lendaudit_core::audit::{ApiUsageRecord, AuditVerdict, CountrySummary, FlowFinding, SummaryRow, WatchItem};
use lendaudit_core::dynamic::ExfiltrationFinding;
use lendaudit_core::pipeline::{AppAudit, AuditContext};
use lendaudit_core::policy::Jurisdiction;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppIdentity {
    pub package_id: String,
    pub version_code: Option<i64>,
    pub version_name: Option<String>,
    /// SHA-256 of the APK file.
    pub apk_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyVersions {
    pub country: String,
    pub platform: String,
    pub harmonized: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportTimestamps {
    pub generated_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub app: AppIdentity,
    pub jurisdiction: Jurisdiction,
    pub declared_permissions: Vec<String>,
    /// Permission names given as unresolved resource references.
    pub unresolved_permissions: Vec<String>,
    pub verdict: AuditVerdict,
    pub api_usage: Vec<ApiUsageRecord>,
    pub flows: Vec<FlowFinding>,
    /// Declared permissions under conditional rules, left to runtime checks.
    pub watch_items: Vec<WatchItem>,
    pub reflection_present: bool,
    pub policy_versions: PolicyVersions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic_findings: Option<Vec<ExfiltrationFinding>>,
    pub timestamps: ReportTimestamps,
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl AuditReport {
    pub fn new(audit: AppAudit, ctx: &AuditContext<'_>, generated_at: String) -> Self {
        let m = audit.manifest;
        AuditReport {
            schema_version: REPORT_SCHEMA_VERSION,
            app: AppIdentity {
                package_id: m.package_id.clone(),
                version_code: m.version_code,
                version_name: m.version_name.clone(),
                apk_digest: audit.apk_digest,
            },
            jurisdiction: ctx.jurisdiction,
            declared_permissions: m.declared_permissions.into_iter().collect(),
            unresolved_permissions: m.unresolved_permissions.into_iter().collect(),
            api_usage: audit.verdict.evidence.api_usage.clone(),
            flows: audit.verdict.evidence.flows.clone(),
            verdict: audit.verdict,
            watch_items: audit.watch_items,
            reflection_present: audit.reflection_present,
            policy_versions: PolicyVersions {
                country: ctx.country.version.clone(),
                platform: ctx.platform.version.clone(),
                harmonized: ctx.harmonized.version.clone(),
            },
            dynamic_findings: None,
            timestamps: ReportTimestamps { generated_at },
        }
    }

    /// The report with timestamp fields blanked, for comparisons.
    pub fn without_timestamps(&self) -> Self {
        AuditReport { timestamps: ReportTimestamps { generated_at: String::new() }, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// File name used in structured output: `<code>-<package>.json`.
    pub fn file_name(&self) -> String {
        format!("{}-{}.json", self.jurisdiction.code().unwrap_or(self.jurisdiction.name()), self.app.package_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Structured,
    Tabular,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" => Ok(ReportFormat::Structured),
            "tabular" => Ok(ReportFormat::Tabular),
            other => Err(format!("unknown format {other:?} (structured or tabular)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    UnwritableDestination { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Unreadable { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Malformed { path: PathBuf, source: serde_json::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub schema_version: u32,
    pub summary: CountrySummary,
}

const HEADERS: [&str; 9] = [
    "Country",
    "Registry (approved/delisted)",
    "Country policy: approved",
    "Country policy: delisted",
    "Platform policy: approved",
    "Platform policy: delisted",
    "Harmonized: approved",
    "Harmonized: delisted",
    "",
];

fn cells(row: &SummaryRow) -> Vec<String> {
    vec![
        row.label.clone(),
        format!("{}/{}", row.registry_approved, row.registry_delisted),
        row.approved.country.to_string(),
        row.delisted.country.to_string(),
        row.approved.platform.to_string(),
        row.delisted.platform.to_string(),
        row.approved.harmonized.to_string(),
        row.delisted.harmonized.to_string(),
    ]
}

/// Plain-text table, one line per country plus a total line.
pub fn render_summary_table(summary: &CountrySummary) -> String {
    let mut rows: Vec<Vec<String>> = vec![HEADERS[..8].iter().map(|h| h.to_string()).collect()];
    rows.extend(summary.rows.iter().map(cells));
    rows.push(cells(&summary.total));
    let widths: Vec<usize> = (0..8).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = format!("# summary schema_version {SUMMARY_SCHEMA_VERSION}\n");
    for (i, r) in rows.iter().enumerate() {
        let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out
}

fn write(path: &Path, text: &str) -> Result<(), ReportError> {
    fs::write(path, text).map_err(|source| ReportError::UnwritableDestination { path: path.into(), source })
}

/// Structured: `reports/<code>-<package>.json` per report and
/// `summary.json`. Tabular: `summary.txt`. Returns the files written.
pub fn emit_report(reports: &[AuditReport], summary: &CountrySummary, format: ReportFormat, dest: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let mkdir = |p: &Path| fs::create_dir_all(p).map_err(|source| ReportError::UnwritableDestination { path: p.into(), source });
    mkdir(dest)?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Structured => {
            let dir = dest.join("reports");
            mkdir(&dir)?;
            for r in reports {
                let p = dir.join(r.file_name());
                write(&p, &r.to_json())?;
                written.push(p);
            }
            let p = dest.join("summary.json");
            let doc = SummaryDocument { schema_version: SUMMARY_SCHEMA_VERSION, summary: summary.clone() };
            write(&p, &serde_json::to_string_pretty(&doc).expect("summary serializes"))?;
            written.push(p);
        }
        ReportFormat::Tabular => {
            let p = dest.join("summary.txt");
            write(&p, &render_summary_table(summary))?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Reports from a structured output directory, in file-name order.
pub fn read_reports(dest: &Path) -> Result<Vec<AuditReport>, ReportError> {
    let dir = dest.join("reports");
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|source| ReportError::Unreadable { path: dir.clone(), source })?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|source| ReportError::Unreadable { path: p.clone(), source })?;
            serde_json::from_str(&text).map_err(|source| ReportError::Malformed { path: p.clone(), source })
        })
        .collect()
}
