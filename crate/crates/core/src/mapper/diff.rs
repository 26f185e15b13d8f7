use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{Jurisdiction, PolicySet, Prohibition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot compare a {draft} draft with {expert} ground truth")]
pub struct JurisdictionMismatch {
    pub draft: Jurisdiction,
    pub expert: Jurisdiction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindMismatch {
    pub permission: String,
    pub draft: Prohibition,
    pub expert: Prohibition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub jurisdiction: Jurisdiction,
    /// In the expert set, absent from the draft.
    pub missing: BTreeSet<String>,
    /// In the draft, absent from the expert set.
    pub extra: BTreeSet<String>,
    pub kind_mismatches: Vec<KindMismatch>,
}

impl CoverageReport {
    pub fn is_exact(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.kind_mismatches.is_empty()
    }
}

fn kind_of(set: &PolicySet, p: &str) -> Option<Prohibition> {
    if set.unconditional_permissions().contains(p) {
        Some(Prohibition::Unconditional)
    } else if set.conditional_permissions().contains(p) {
        Some(Prohibition::Conditional)
    } else {
        None
    }
}

pub fn diff_against_ground_truth(draft: &PolicySet, expert: &PolicySet) -> Result<CoverageReport, JurisdictionMismatch> {
    if draft.jurisdiction != expert.jurisdiction {
        return Err(JurisdictionMismatch { draft: draft.jurisdiction, expert: expert.jurisdiction });
    }
    let all = |s: &PolicySet| -> BTreeSet<String> {
        s.unconditional_permissions().union(&s.conditional_permissions()).cloned().collect()
    };
    let (d, e) = (all(draft), all(expert));
    let kind_mismatches = d
        .intersection(&e)
        .filter_map(|p| {
            let (dk, ek) = (kind_of(draft, p)?, kind_of(expert, p)?);
            (dk != ek).then(|| KindMismatch { permission: p.clone(), draft: dk, expert: ek })
        })
        .collect();
    Ok(CoverageReport {
        jurisdiction: expert.jurisdiction,
        missing: e.difference(&d).cloned().collect(),
        extra: d.difference(&e).cloned().collect(),
        kind_mismatches,
    })
}
