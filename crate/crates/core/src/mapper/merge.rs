use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::MappingProposal;
use crate::policy::{Jurisdiction, PolicyRule, PolicySet, Prohibition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftRule {
    /// Smallest spelling seen for this data type.
    pub data_type: String,
    pub prohibition: Prohibition,
    pub permissions: BTreeSet<String>,
    pub notes: BTreeSet<String>,
    pub models: BTreeSet<String>,
}

impl DraftRule {
    fn absorb(&mut self, other: &DraftRule) {
        if other.data_type < self.data_type {
            self.data_type = other.data_type.clone();
        }
        self.permissions.extend(other.permissions.iter().cloned());
        self.notes.extend(other.notes.iter().cloned());
        self.models.extend(other.models.iter().cloned());
    }
}

/// A permission proposed as both unconditional and conditional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewFlag {
    pub permission: String,
    pub unconditional_in: BTreeSet<String>,
    pub conditional_in: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} permission(s) need review before the draft can be used", .0.len())]
pub struct ReviewRequired(pub Vec<ReviewFlag>);

/// Union of proposals from one or more models, keyed by data type
/// (case and spacing folded) and prohibition kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDraft {
    rules: BTreeMap<(String, Prohibition), DraftRule>,
}

fn fold_key(data_type: &str) -> String {
    data_type
        .split_whitespace()
        .map(|w| if w == "&" { "and" } else { w })
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

impl PolicyDraft {
    pub fn from_proposals(proposals: &[MappingProposal]) -> Self {
        let mut draft = PolicyDraft::default();
        for p in proposals {
            let rule = DraftRule {
                data_type: p.data_type.clone(),
                prohibition: p.prohibition,
                permissions: p.permissions.iter().cloned().collect(),
                notes: if p.notes.is_empty() { BTreeSet::new() } else { [p.notes.clone()].into() },
                models: [p.model_id.clone()].into(),
            };
            draft.insert(rule);
        }
        draft
    }

    fn insert(&mut self, rule: DraftRule) {
        let key = (fold_key(&rule.data_type), rule.prohibition);
        match self.rules.get_mut(&key) {
            Some(existing) => existing.absorb(&rule),
            None => {
                self.rules.insert(key, rule);
            }
        }
    }

    pub fn union(&self, other: &PolicyDraft) -> PolicyDraft {
        let mut out = self.clone();
        for r in other.rules.values() {
            out.insert(r.clone());
        }
        out
    }

    pub fn rules(&self) -> impl Iterator<Item = &DraftRule> {
        self.rules.values()
    }

    pub fn permissions(&self, kind: Prohibition) -> BTreeSet<String> {
        self.rules().filter(|r| r.prohibition == kind).flat_map(|r| r.permissions.iter().cloned()).collect()
    }

    pub fn review_flags(&self) -> Vec<ReviewFlag> {
        let mut by_perm: BTreeMap<&str, (BTreeSet<String>, BTreeSet<String>)> = BTreeMap::new();
        for r in self.rules() {
            for p in &r.permissions {
                let e = by_perm.entry(p).or_default();
                match r.prohibition {
                    Prohibition::Unconditional => e.0.insert(r.data_type.clone()),
                    Prohibition::Conditional => e.1.insert(r.data_type.clone()),
                };
            }
        }
        by_perm
            .into_iter()
            .filter(|(_, (u, c))| !u.is_empty() && !c.is_empty())
            .map(|(p, (u, c))| ReviewFlag { permission: p.into(), unconditional_in: u, conditional_in: c })
            .collect()
    }

    /// Rules without permissions (notes only) are left out.
    pub fn into_policy_set(self, jurisdiction: Jurisdiction, version: &str) -> Result<PolicySet, ReviewRequired> {
        let flags = self.review_flags();
        if !flags.is_empty() {
            return Err(ReviewRequired(flags));
        }
        let rules = self
            .rules
            .into_values()
            .filter(|r| !r.permissions.is_empty())
            .map(|r| PolicyRule {
                source_clause: alloc::format!("draft from {}", r.models.iter().cloned().collect::<Vec<_>>().join(", ")),
                data_type: r.data_type,
                prohibition: r.prohibition,
                permissions: r.permissions,
                scope_note: None,
            })
            .collect();
        Ok(PolicySet { jurisdiction, version: version.into(), rules })
    }
}

pub fn merge_model_outputs(per_model: &[Vec<MappingProposal>]) -> PolicyDraft {
    per_model.iter().fold(PolicyDraft::default(), |acc, ps| acc.union(&PolicyDraft::from_proposals(ps)))
}
