use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::manifest::ManifestModel;
use crate::policy::{Jurisdiction, PolicySet, WILDCARD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Framework {
    Country(Jurisdiction),
    Platform,
    Harmonized,
}

impl Framework {
    pub fn of(set: &PolicySet) -> Self {
        match set.jurisdiction {
            Jurisdiction::Platform => Framework::Platform,
            Jurisdiction::Harmonized => Framework::Harmonized,
            j => Framework::Country(j),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub framework: Framework,
    pub permission: String,
    pub rule_source_clause: String,
    /// Declared only through `uses-permission-sdk-23`.
    pub via_sdk23: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope_note: Option<String>,
}

/// Declared permissions that fall under a set's unconditional rules, one
/// record each, in name order. Conditional rules never produce records.
pub fn check_permissions(manifest: &ManifestModel, set: &PolicySet) -> Vec<ViolationRecord> {
    let framework = Framework::of(set);
    manifest
        .declared_permissions
        .iter()
        .filter_map(|p| {
            let rule = set.unconditional_rule_for(p)?;
            Some(ViolationRecord {
                framework,
                permission: p.clone(),
                rule_source_clause: rule.source_clause.clone(),
                via_sdk23: manifest.sdk23_permissions.contains(p),
                scope_note: rule.scope_note.clone(),
            })
        })
        .collect()
}

/// A declared permission under a conditional rule: not a static violation,
/// but something whose timing is checked at runtime.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WatchItem {
    pub permission: String,
    pub jurisdiction: Jurisdiction,
    pub data_type: String,
    pub source_clause: String,
}

/// Watch items for declared permissions covered by conditional rules. A
/// wildcard rule covers every declared permission in `candidates` (usually
/// the permissions the mapping table knows about).
pub fn watch_items<'a>(
    manifest: &ManifestModel,
    set: &PolicySet,
    candidates: impl Fn(&str) -> bool + 'a,
) -> Vec<WatchItem> {
    manifest
        .declared_permissions
        .iter()
        .filter_map(|p| {
            let rule = set.conditional_rule_for(p)?;
            if !rule.permissions.contains(p.as_str()) && (!rule.permissions.contains(WILDCARD) || !candidates(p)) {
                return None;
            }
            Some(WatchItem {
                permission: p.clone(),
                jurisdiction: set.jurisdiction,
                data_type: rule.data_type.clone(),
                source_clause: rule.source_clause.clone(),
            })
        })
        .collect()
}
