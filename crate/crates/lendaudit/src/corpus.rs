//! Audits every registry row whose APK is present, in parallel, with one
//! failure never stopping the rest.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use lendaudit_core::audit::{aggregate_country, CountrySummary, SummaryError};
use lendaudit_core::pipeline::{audit_apk, PolicyLibrary};
use lendaudit_core::policy::Jurisdiction;
use lendaudit_core::registry::{RegistryRow, RegistryTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::AuditReport;

#[derive(Debug, Clone, Default)]
pub struct CorpusOptions {
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
    /// Fixed `generated_at` value, for reproducible output.
    pub generated_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingArtifact {
    pub country: Jurisdiction,
    pub package_id: String,
    pub looked_for: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppFailure {
    pub country: Jurisdiction,
    pub package_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusOutcome {
    pub reports: Vec<AuditReport>,
    pub summary: CountrySummary,
    pub missing: Vec<MissingArtifact>,
    pub failures: Vec<AppFailure>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no country policies loaded")]
    NoPoliciesLoaded,
    #[error(transparent)]
    Summary(#[from] SummaryError),
    #[error("cannot start worker pool: {0}")]
    WorkerPool(String),
}

/// `<dir>/<code>/<package_id>.apk` first, then `<dir>/<package_id>.apk`.
pub fn apk_candidates(dir: &Path, row: &RegistryRow) -> Vec<PathBuf> {
    let file = format!("{}.apk", row.package_id);
    let mut out = Vec::new();
    if let Some(code) = row.country.code() {
        out.push(dir.join(code).join(&file));
    }
    out.push(dir.join(file));
    out
}

enum Outcome {
    Report(Box<AuditReport>),
    Missing(MissingArtifact),
    Failed(AppFailure),
}

fn audit_row(row: &RegistryRow, apk_dir: &Path, library: &PolicyLibrary, generated_at: &Option<String>) -> Outcome {
    let fail = |error: String| Outcome::Failed(AppFailure { country: row.country, package_id: row.package_id.clone(), error });
    let candidates = apk_candidates(apk_dir, row);
    let Some(path) = candidates.iter().find(|p| p.is_file()) else {
        return Outcome::Missing(MissingArtifact { country: row.country, package_id: row.package_id.clone(), looked_for: candidates });
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    let ctx = match library.context(row.country) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    let result = catch_unwind(AssertUnwindSafe(|| audit_apk(&bytes, &ctx)));
    match result {
        Ok(Ok(audit)) if audit.manifest.package_id != row.package_id => {
            fail(format!("APK declares package {:?}", audit.manifest.package_id))
        }
        Ok(Ok(audit)) => {
            let stamp = generated_at.clone().unwrap_or_else(crate::report::now_rfc3339);
            Outcome::Report(Box::new(AuditReport::new(audit, &ctx, stamp)))
        }
        Ok(Err(e)) => fail(e.to_string()),
        Err(_) => fail("analysis panicked".into()),
    }
}

pub fn run_corpus(
    registry: &RegistryTable,
    apk_dir: &Path,
    library: &PolicyLibrary,
    options: &CorpusOptions,
) -> Result<CorpusOutcome, CorpusError> {
    if library.countries.is_empty() {
        return Err(CorpusError::NoPoliciesLoaded);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| CorpusError::WorkerPool(e.to_string()))?;
    let outcomes: Vec<Outcome> =
        pool.install(|| registry.rows().par_iter().map(|row| audit_row(row, apk_dir, library, &options.generated_at)).collect());

    let (mut reports, mut missing, mut failures) = (Vec::new(), Vec::new(), Vec::new());
    for o in outcomes {
        match o {
            Outcome::Report(r) => reports.push(*r),
            Outcome::Missing(m) => {
                log::warn!("{} ({}): no APK found", m.package_id, m.country);
                missing.push(m);
            }
            Outcome::Failed(f) => {
                log::warn!("{} ({}): {}", f.package_id, f.country, f.error);
                failures.push(f);
            }
        }
    }
    reports.sort_by(|a, b| (a.jurisdiction, &a.app.package_id).cmp(&(b.jurisdiction, &b.app.package_id)));
    let verdicts: Vec<_> = reports.iter().map(|r| r.verdict.clone()).collect();
    let summary = aggregate_country(&verdicts, registry)?;
    Ok(CorpusOutcome { reports, summary, missing, failures })
}
