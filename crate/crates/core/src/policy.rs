//! Jurisdiction policy sets: prohibition rules over permission names.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::permission::{is_valid_permission_name, AliasTable};

/// Stands for every permission in conditional ("all data with consent") rules.
pub const WILDCARD: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Jurisdiction {
    Indonesia,
    Kenya,
    Nigeria,
    Pakistan,
    Philippines,
    India,
    Thailand,
    Platform,
    Harmonized,
}

impl Jurisdiction {
    pub const ALL: [Jurisdiction; 9] = [
        Jurisdiction::Indonesia,
        Jurisdiction::Kenya,
        Jurisdiction::Nigeria,
        Jurisdiction::Pakistan,
        Jurisdiction::Philippines,
        Jurisdiction::India,
        Jurisdiction::Thailand,
        Jurisdiction::Platform,
        Jurisdiction::Harmonized,
    ];

    /// Countries audited by default; India and Thailand ship rule files but
    /// are left out of corpus runs.
    pub const CORPUS_DEFAULTS: [Jurisdiction; 5] = [
        Jurisdiction::Indonesia,
        Jurisdiction::Kenya,
        Jurisdiction::Nigeria,
        Jurisdiction::Pakistan,
        Jurisdiction::Philippines,
    ];

    pub fn is_country(self) -> bool {
        !matches!(self, Jurisdiction::Platform | Jurisdiction::Harmonized)
    }

    pub fn name(self) -> &'static str {
        match self {
            Jurisdiction::Indonesia => "Indonesia",
            Jurisdiction::Kenya => "Kenya",
            Jurisdiction::Nigeria => "Nigeria",
            Jurisdiction::Pakistan => "Pakistan",
            Jurisdiction::Philippines => "Philippines",
            Jurisdiction::India => "India",
            Jurisdiction::Thailand => "Thailand",
            Jurisdiction::Platform => "Platform",
            Jurisdiction::Harmonized => "Harmonized",
        }
    }

    /// ISO 3166 alpha-2 code for countries.
    pub fn code(self) -> Option<&'static str> {
        Some(match self {
            Jurisdiction::Indonesia => "ID",
            Jurisdiction::Kenya => "KE",
            Jurisdiction::Nigeria => "NG",
            Jurisdiction::Pakistan => "PK",
            Jurisdiction::Philippines => "PH",
            Jurisdiction::India => "IN",
            Jurisdiction::Thailand => "TH",
            _ => return None,
        })
    }
}

impl fmt::Display for Jurisdiction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Jurisdiction {
    type Err = PolicyError;

    /// Accepts names and country codes, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Jurisdiction::ALL
            .into_iter()
            .find(|j| j.name().eq_ignore_ascii_case(s) || j.code().is_some_and(|c| c.eq_ignore_ascii_case(s)))
            .ok_or_else(|| PolicyError::UnknownJurisdiction(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prohibition {
    Unconditional,
    Conditional,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("{permission} is declared both unconditional and conditional")]
    ConflictingProhibitionKind { permission: String },
    #[error("unknown jurisdiction {0:?}")]
    UnknownJurisdiction(String),
}

/// One rule as written in a policy file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEntry {
    pub data_type: String,
    pub prohibition: Prohibition,
    pub permissions: Vec<String>,
    pub source_clause: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope_note: Option<String>,
}

/// On-disk shape of a policy file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub jurisdiction: String,
    pub version: String,
    pub rules: Vec<RuleEntry>,
    /// Spellings used in the source text → platform names.
    #[serde(default, skip_serializing_if = "AliasTable::is_empty")]
    pub aliases: AliasTable,
}

impl AliasTable {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PolicyRule {
    pub data_type: String,
    pub prohibition: Prohibition,
    pub permissions: BTreeSet<String>,
    pub source_clause: String,
    /// Limits of the rule the static check cannot see (e.g. purpose).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySet {
    pub jurisdiction: Jurisdiction,
    pub version: String,
    pub rules: Vec<PolicyRule>,
}

impl PolicySet {
    /// Validates a parsed policy file, applying its alias table.
    pub fn from_file(doc: PolicyFile) -> Result<Self, PolicyError> {
        let jurisdiction: Jurisdiction = doc.jurisdiction.parse()?;
        if doc.version.trim().is_empty() {
            return Err(PolicyError::SchemaViolation("version is empty".into()));
        }
        let mut rules = Vec::with_capacity(doc.rules.len());
        for r in doc.rules {
            if r.data_type.trim().is_empty() {
                return Err(PolicyError::SchemaViolation("rule with empty data_type".into()));
            }
            if r.permissions.is_empty() {
                return Err(PolicyError::SchemaViolation(alloc::format!("rule {:?} lists no permissions", r.data_type)));
            }
            let mut permissions = BTreeSet::new();
            for p in &r.permissions {
                if p == WILDCARD {
                    if r.prohibition == Prohibition::Unconditional {
                        return Err(PolicyError::SchemaViolation(alloc::format!(
                            "rule {:?}: wildcard is only allowed in conditional rules",
                            r.data_type
                        )));
                    }
                    permissions.insert(p.clone());
                    continue;
                }
                if !is_valid_permission_name(p) {
                    return Err(PolicyError::SchemaViolation(alloc::format!("invalid permission name {p:?}")));
                }
                permissions.insert(doc.aliases.0.get(p).cloned().unwrap_or_else(|| p.clone()));
            }
            rules.push(PolicyRule {
                data_type: r.data_type,
                prohibition: r.prohibition,
                permissions,
                source_clause: r.source_clause,
                scope_note: r.scope_note,
            });
        }
        let set = PolicySet { jurisdiction, version: doc.version, rules };
        if let Some(p) = set.unconditional_permissions().intersection(&set.conditional_permissions()).next() {
            return Err(PolicyError::ConflictingProhibitionKind { permission: p.clone() });
        }
        Ok(set)
    }

    /// Inverse of [`PolicySet::from_file`] (aliases already applied).
    pub fn to_file(&self) -> PolicyFile {
        PolicyFile {
            jurisdiction: self.jurisdiction.name().to_string(),
            version: self.version.clone(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleEntry {
                    data_type: r.data_type.clone(),
                    prohibition: r.prohibition,
                    permissions: r.permissions.iter().cloned().collect(),
                    source_clause: r.source_clause.clone(),
                    scope_note: r.scope_note.clone(),
                })
                .collect(),
            aliases: AliasTable::default(),
        }
    }

    fn permissions_of(&self, kind: Prohibition) -> BTreeSet<String> {
        self.rules
            .iter()
            .filter(|r| r.prohibition == kind)
            .flat_map(|r| r.permissions.iter().cloned())
            .collect()
    }

    pub fn unconditional_permissions(&self) -> BTreeSet<String> {
        self.permissions_of(Prohibition::Unconditional)
    }

    /// May contain [`WILDCARD`].
    pub fn conditional_permissions(&self) -> BTreeSet<String> {
        self.permissions_of(Prohibition::Conditional)
    }

    /// First unconditional rule naming `permission`.
    pub fn unconditional_rule_for(&self, permission: &str) -> Option<&PolicyRule> {
        self.rules
            .iter()
            .find(|r| r.prohibition == Prohibition::Unconditional && r.permissions.contains(permission))
    }

    /// Conditional rule covering `permission`, explicitly or by wildcard.
    pub fn conditional_rule_for(&self, permission: &str) -> Option<&PolicyRule> {
        let conditional = || self.rules.iter().filter(|r| r.prohibition == Prohibition::Conditional);
        conditional()
            .find(|r| r.permissions.contains(permission))
            .or_else(|| conditional().find(|r| r.permissions.contains(WILDCARD)))
    }
}

/// Platform unconditional rules together with every country's unconditional
/// rules. Conditional rules are left out. Each rule's clause is prefixed with
/// the jurisdiction it came from; rules are sorted and deduplicated so the
/// result does not depend on the order of `countries`.
pub fn harmonized_set(platform: &PolicySet, countries: &[PolicySet]) -> PolicySet {
    let mut rules = BTreeSet::new();
    let mut versions = BTreeSet::new();
    for set in core::iter::once(platform).chain(countries) {
        versions.insert(alloc::format!("{}@{}", set.jurisdiction, set.version));
        for r in set.rules.iter().filter(|r| r.prohibition == Prohibition::Unconditional) {
            let mut r = r.clone();
            r.source_clause = alloc::format!("[{}] {}", set.jurisdiction, r.source_clause);
            rules.insert(r);
        }
    }
    PolicySet {
        jurisdiction: Jurisdiction::Harmonized,
        version: versions.into_iter().collect::<Vec<_>>().join("+"),
        rules: rules.into_iter().collect(),
    }
}
