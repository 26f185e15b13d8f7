use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::MappingProposal;
use crate::permission::PermissionRegistry;

pub const NOT_IN_REGISTRY: &str = "not in platform registry";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedName {
    pub model_id: String,
    pub data_type: String,
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub accepted: Vec<MappingProposal>,
    pub rejected: Vec<RejectedName>,
}

/// Normalizes names through the registry's aliases and drops the ones the
/// registry does not know. A proposal whose names were all rejected is
/// dropped; one that never named any (notes only) is kept.
pub fn validate_proposals(proposals: &[MappingProposal], registry: &PermissionRegistry) -> Validation {
    let mut out = Validation::default();
    for p in proposals {
        let mut kept: Vec<String> = Vec::new();
        for name in &p.permissions {
            let n = registry.aliases.normalize(name);
            if registry.contains(&n) {
                if !kept.contains(&n) {
                    kept.push(n);
                }
            } else {
                out.rejected.push(RejectedName {
                    model_id: p.model_id.clone(),
                    data_type: p.data_type.clone(),
                    name: name.clone(),
                    reason: NOT_IN_REGISTRY.into(),
                });
            }
        }
        if kept.is_empty() && !p.permissions.is_empty() {
            continue;
        }
        out.accepted.push(MappingProposal { permissions: kept, ..p.clone() });
    }
    out
}
