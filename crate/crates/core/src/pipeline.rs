//! One APK in, one audit out: container, manifest, bytecode, policy checks,
//! API usage and flows.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apk::{extract_bundle, open_archive, ArchiveError, MANIFEST_ENTRY};
use crate::audit::{check_permissions, classify_app, detect_api_usage, find_flows, watch_items, AuditVerdict, CodeFacts, InconsistentEvidence, WatchItem};
use crate::axml::{decode_axml, AxmlError};
use crate::callgraph::build_call_graph;
use crate::dex::{defined_methods, extract_field_reads, extract_invocations, parse_dex, uses_reflection, DexError};
use crate::manifest::{extract_manifest, ManifestError, ManifestModel};
use crate::mapping::MappingTable;
use crate::policy::{harmonized_set, Jurisdiction, PolicySet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error("manifest: {0}")]
    Axml(#[from] AxmlError),
    #[error("manifest: {0}")]
    Manifest(#[from] ManifestError),
    #[error("{entry}: {source}")]
    Dex { entry: String, source: DexError },
    #[error(transparent)]
    Inconsistent(#[from] InconsistentEvidence),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyLookupError {
    #[error("no policy set loaded for {0}")]
    MissingPolicy(Jurisdiction),
    #[error("{0} is not a country jurisdiction")]
    NotACountry(Jurisdiction),
}

/// Loaded policies and the mapping table, shared by every audit of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyLibrary {
    pub platform: PolicySet,
    pub countries: BTreeMap<Jurisdiction, PolicySet>,
    pub mapping: MappingTable,
}

/// The policy sets one audit is evaluated against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditContext<'a> {
    pub jurisdiction: Jurisdiction,
    pub country: &'a PolicySet,
    pub platform: &'a PolicySet,
    pub harmonized: PolicySet,
    pub mapping: &'a MappingTable,
}

impl PolicyLibrary {
    /// The harmonized set is the platform policy joined with the five
    /// corpus countries and the audited jurisdiction, where loaded.
    pub fn context(&self, jurisdiction: Jurisdiction) -> Result<AuditContext<'_>, PolicyLookupError> {
        if !jurisdiction.is_country() {
            return Err(PolicyLookupError::NotACountry(jurisdiction));
        }
        let country = self.countries.get(&jurisdiction).ok_or(PolicyLookupError::MissingPolicy(jurisdiction))?;
        let members: BTreeSet<Jurisdiction> =
            Jurisdiction::CORPUS_DEFAULTS.iter().copied().chain(core::iter::once(jurisdiction)).collect();
        let sets: Vec<PolicySet> = members.iter().filter_map(|j| self.countries.get(j).cloned()).collect();
        Ok(AuditContext {
            jurisdiction,
            country,
            platform: &self.platform,
            harmonized: harmonized_set(&self.platform, &sets),
            mapping: &self.mapping,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppAudit {
    pub manifest: ManifestModel,
    pub apk_digest: String,
    pub verdict: AuditVerdict,
    pub watch_items: Vec<WatchItem>,
    /// Reflective calls were seen, so the call graph may be missing edges.
    pub reflection_present: bool,
}

/// Only the manifest, for callers that do not need the bytecode.
pub fn read_manifest(apk: &[u8]) -> Result<ManifestModel, AuditError> {
    let archive = open_archive(apk)?;
    if !archive.entries().contains_key(MANIFEST_ENTRY) {
        return Err(ArchiveError::MissingManifest.into());
    }
    let bytes = archive.read_entry(MANIFEST_ENTRY)?;
    Ok(extract_manifest(&decode_axml(&bytes)?)?)
}

pub fn audit_apk(apk: &[u8], ctx: &AuditContext<'_>) -> Result<AppAudit, AuditError> {
    let archive = open_archive(apk)?;
    let bundle = extract_bundle(&archive)?;
    let manifest = extract_manifest(&decode_axml(&bundle.manifest_bytes)?)?;
    let dex = bundle
        .dex_entries
        .iter()
        .map(|(name, bytes)| parse_dex(bytes).map_err(|source| AuditError::Dex { entry: name.clone(), source }))
        .collect::<Result<Vec<_>, _>>()?;
    let dex_err = |source| AuditError::Dex { entry: "classes*.dex".into(), source };
    let code = CodeFacts {
        defined_methods: defined_methods(&dex),
        invocations: extract_invocations(&dex).map_err(dex_err)?,
        field_reads: extract_field_reads(&dex).map_err(dex_err)?,
    };

    let mut verdict = classify_app(
        &manifest.package_id,
        ctx.jurisdiction,
        check_permissions(&manifest, ctx.country),
        check_permissions(&manifest, ctx.platform),
        check_permissions(&manifest, &ctx.harmonized),
    )?;
    let usage = detect_api_usage(&code, &manifest, ctx.mapping);
    let graph = build_call_graph(&code.defined_methods, &code.invocations, &manifest);
    verdict.evidence.flows = find_flows(&graph, &usage, &ctx.mapping.sink_patterns());
    verdict.evidence.api_usage = usage;

    let known = ctx.mapping.permissions();
    let watch = watch_items(&manifest, ctx.country, |p| known.contains(p));
    Ok(AppAudit {
        apk_digest: bundle.package_digest,
        watch_items: watch,
        reflection_present: uses_reflection(&dex),
        manifest,
        verdict,
    })
}
