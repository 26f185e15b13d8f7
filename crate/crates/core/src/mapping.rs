//! Permission → sensitive-API mapping tables, keyed by API-level ranges, plus
//! the network sink patterns used by the flow search.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dex::{FieldRef, MethodRef};
use crate::permission::is_valid_permission_name;

pub const ANY_METHOD: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiKind {
    MethodCall,
    /// A provider URI constant read alongside a `ContentResolver` call.
    ContentUri,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataCategory {
    Contacts,
    Sms,
    CallLog,
    Media,
    Location,
    Packages,
    Identifiers,
    Storage,
}

impl DataCategory {
    pub const ALL: [DataCategory; 8] = [
        DataCategory::Contacts,
        DataCategory::Sms,
        DataCategory::CallLog,
        DataCategory::Media,
        DataCategory::Location,
        DataCategory::Packages,
        DataCategory::Identifiers,
        DataCategory::Storage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DataCategory::Contacts => "contacts",
            DataCategory::Sms => "sms",
            DataCategory::CallLog => "call_log",
            DataCategory::Media => "media",
            DataCategory::Location => "location",
            DataCategory::Packages => "packages",
            DataCategory::Identifiers => "identifiers",
            DataCategory::Storage => "storage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ApiPattern {
    /// Descriptor prefix, e.g. `Landroid/provider/ContactsContract`.
    pub class_descriptor_prefix: String,
    /// Method name for calls, field name for URI constants, or `*`.
    pub method_name: String,
    pub kind: ApiKind,
}

impl ApiPattern {
    pub fn method_call(prefix: &str, method: &str) -> Self {
        ApiPattern { class_descriptor_prefix: prefix.into(), method_name: method.into(), kind: ApiKind::MethodCall }
    }

    fn name_matches(&self, name: &str) -> bool {
        self.method_name == ANY_METHOD || self.method_name == name
    }

    pub fn matches_method(&self, m: &MethodRef) -> bool {
        self.kind == ApiKind::MethodCall && m.class_descriptor.starts_with(&self.class_descriptor_prefix) && self.name_matches(&m.name)
    }

    pub fn matches_field(&self, f: &FieldRef) -> bool {
        self.kind == ApiKind::ContentUri && f.class_descriptor.starts_with(&self.class_descriptor_prefix) && self.name_matches(&f.name)
    }

    /// Match against a runtime `(class, method)` identity. URI patterns
    /// match on the class alone, since the hooked call is the provider query.
    pub fn matches_api(&self, class: &str, method: &str) -> bool {
        class.starts_with(&self.class_descriptor_prefix) && (self.kind == ApiKind::ContentUri || self.name_matches(method))
    }
}

impl fmt::Display for ApiPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = match self.kind {
            ApiKind::MethodCall => "->",
            ApiKind::ContentUri => "#",
        };
        write!(f, "{}{}{}", self.class_descriptor_prefix, sep, self.method_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MappingEntry {
    pub permission: String,
    pub pattern: ApiPattern,
    pub min_api: u32,
    pub max_api: u32,
    pub provenance: String,
    pub category: Option<DataCategory>,
}

impl MappingEntry {
    pub fn covers(&self, level: u32) -> bool {
        self.min_api <= level && level <= self.max_api
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SinkEntry {
    pub pattern: ApiPattern,
    pub provenance: String,
}

/// One entry as written in the mapping file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingFileEntry {
    pub permission: String,
    pub class_prefix: String,
    pub method: String,
    pub kind: ApiKind,
    pub min_api: u32,
    pub max_api: u32,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<DataCategory>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SinkFileEntry {
    pub class_prefix: String,
    pub method: String,
    pub provenance: String,
}

/// On-disk shape of a mapping file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingFile {
    #[serde(default)]
    pub entries: Vec<MappingFileEntry>,
    #[serde(default)]
    pub sinks: Vec<SinkFileEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("{permission}: range [{min_api}, {max_api}] is inverted")]
    InvertedRange { permission: String, min_api: u32, max_api: u32 },
    #[error("permission {0} is not in the mapping table")]
    UnknownPermission(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "match")]
pub enum Exactness {
    Exact,
    /// No range held the requested level; `level` is the one used instead.
    Fallback { level: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternQuery<'a> {
    pub entries: Vec<&'a MappingEntry>,
    pub exactness: Exactness,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingTable {
    /// Sorted, so lookups do not depend on file order.
    entries: Vec<MappingEntry>,
    sinks: Vec<SinkEntry>,
}

impl MappingTable {
    pub fn from_file(doc: MappingFile) -> Result<Self, MappingError> {
        let mut entries = Vec::with_capacity(doc.entries.len());
        for e in doc.entries {
            if !is_valid_permission_name(&e.permission) {
                return Err(MappingError::SchemaViolation(alloc::format!("invalid permission name {:?}", e.permission)));
            }
            if e.class_prefix.is_empty() || e.method.is_empty() {
                return Err(MappingError::SchemaViolation(alloc::format!("{}: empty class_prefix or method", e.permission)));
            }
            if e.min_api == 0 {
                return Err(MappingError::SchemaViolation(alloc::format!("{}: min_api must be at least 1", e.permission)));
            }
            if e.min_api > e.max_api {
                return Err(MappingError::InvertedRange { permission: e.permission, min_api: e.min_api, max_api: e.max_api });
            }
            entries.push(MappingEntry {
                permission: e.permission,
                pattern: ApiPattern { class_descriptor_prefix: e.class_prefix, method_name: e.method, kind: e.kind },
                min_api: e.min_api,
                max_api: e.max_api,
                provenance: e.provenance,
                category: e.category,
            });
        }
        let mut sinks = Vec::with_capacity(doc.sinks.len());
        for s in doc.sinks {
            if s.class_prefix.is_empty() || s.method.is_empty() {
                return Err(MappingError::SchemaViolation("sink with empty class_prefix or method".into()));
            }
            sinks.push(SinkEntry { pattern: ApiPattern::method_call(&s.class_prefix, &s.method), provenance: s.provenance });
        }
        entries.sort();
        entries.dedup();
        sinks.sort();
        sinks.dedup();
        Ok(MappingTable { entries, sinks })
    }

    pub fn entries(&self) -> &[MappingEntry] {
        &self.entries
    }

    pub fn sinks(&self) -> &[SinkEntry] {
        &self.sinks
    }

    pub fn sink_patterns(&self) -> Vec<ApiPattern> {
        self.sinks.iter().map(|s| s.pattern.clone()).collect()
    }

    pub fn permissions(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.permission.as_str()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.sinks.is_empty()
    }

    /// Patterns for `permission` at `api_level`. When no range holds the
    /// level, the nearest covered level below it is used, or above it when
    /// nothing lower is covered.
    pub fn apis_for_permission(&self, permission: &str, api_level: u32) -> Result<PatternQuery<'_>, MappingError> {
        let for_perm: Vec<&MappingEntry> = self.entries.iter().filter(|e| e.permission == permission).collect();
        if for_perm.is_empty() {
            return Err(MappingError::UnknownPermission(permission.to_string()));
        }
        let at = |level: u32| for_perm.iter().copied().filter(|e| e.covers(level)).collect::<Vec<_>>();
        let exact = at(api_level);
        if !exact.is_empty() {
            return Ok(PatternQuery { entries: exact, exactness: Exactness::Exact });
        }
        let lower = for_perm.iter().filter(|e| e.max_api < api_level).map(|e| e.max_api).max();
        let level = lower.unwrap_or_else(|| {
            for_perm.iter().filter(|e| e.min_api > api_level).map(|e| e.min_api).min().unwrap_or(api_level)
        });
        Ok(PatternQuery { entries: at(level), exactness: Exactness::Fallback { level } })
    }

    /// Category of a runtime API identity, from the first matching entry.
    pub fn category_for(&self, class: &str, method: &str) -> Option<DataCategory> {
        self.entries.iter().filter(|e| e.pattern.matches_api(class, method)).find_map(|e| e.category)
    }

    /// Category of an entry's permission, used when a pattern itself has none.
    pub fn category_of_permission(&self, permission: &str) -> Option<DataCategory> {
        self.entries.iter().filter(|e| e.permission == permission).find_map(|e| e.category)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    const RCL: &str = "android.permission.READ_CALL_LOG";

    fn entry(perm: &str, method: &str, min_api: u32, max_api: u32) -> MappingFileEntry {
        MappingFileEntry {
            permission: perm.into(),
            class_prefix: "Landroid/provider/CallLog".into(),
            method: method.into(),
            kind: ApiKind::ContentUri,
            min_api,
            max_api,
            provenance: "test".into(),
            category: Some(DataCategory::CallLog),
        }
    }

    fn table(entries: Vec<MappingFileEntry>) -> MappingTable {
        MappingTable::from_file(MappingFile { entries, sinks: vec![] }).unwrap()
    }

    #[test]
    fn contacts_entry_is_queryable() {
        let mut e = entry("android.permission.READ_CONTACTS", "CONTENT_URI", 16, 36);
        e.class_prefix = "Landroid/provider/ContactsContract".into();
        let t = table(vec![e]);
        let q = t.apis_for_permission("android.permission.READ_CONTACTS", 30).unwrap();
        assert_eq!(q.entries.len(), 1);
        assert_eq!(q.exactness, Exactness::Exact);
    }

    #[test]
    fn inverted_range() {
        let doc = MappingFile { entries: vec![entry(RCL, "*", 30, 29)], sinks: vec![] };
        assert_eq!(
            MappingTable::from_file(doc),
            Err(MappingError::InvertedRange { permission: RCL.into(), min_api: 30, max_api: 29 })
        );
    }

    #[test]
    fn empty_document_is_empty_table() {
        assert!(MappingTable::from_file(MappingFile::default()).unwrap().is_empty());
    }

    #[test]
    fn exact_and_fallback_lookups() {
        let t = table(vec![entry(RCL, "a", 16, 25), entry(RCL, "b", 26, 29), entry(RCL, "c", 30, 36)]);
        let q = t.apis_for_permission(RCL, 28).unwrap();
        assert_eq!(q.exactness, Exactness::Exact);
        assert_eq!(q.entries[0].pattern.method_name, "b");
        let q = t.apis_for_permission(RCL, 37).unwrap();
        assert_eq!(q.exactness, Exactness::Fallback { level: 36 });
        assert_eq!(q.entries[0].pattern.method_name, "c");
        let q = t.apis_for_permission(RCL, 3).unwrap();
        assert_eq!(q.exactness, Exactness::Fallback { level: 16 });
        assert_eq!(
            t.apis_for_permission("android.permission.READ_SMS", 30),
            Err(MappingError::UnknownPermission("android.permission.READ_SMS".into()))
        );
    }

    proptest! {
        #[test]
        fn lookup_is_order_independent_and_subset(
            ranges in prop::collection::vec((1u32..40, 0u32..10), 1..8),
            level in 1u32..50,
            seed in any::<u64>(),
        ) {
            let docs: Vec<_> = ranges.iter().enumerate()
                .map(|(i, (lo, len))| entry(RCL, &alloc::format!("m{i}"), *lo, lo + len))
                .collect();
            let mut shuffled = docs.clone();
            let n = shuffled.len();
            shuffled.rotate_left((seed as usize) % n);
            if seed % 2 == 0 { shuffled.reverse(); }
            let a = table(docs);
            let b = table(shuffled);
            let qa = a.apis_for_permission(RCL, level).unwrap();
            let qb = b.apis_for_permission(RCL, level).unwrap();
            prop_assert_eq!(&qa, &qb);
            prop_assert!(!qa.entries.is_empty());
            for e in &qa.entries {
                prop_assert!(a.entries().contains(e));
            }
            let contained = a.entries().iter().any(|e| e.covers(level));
            prop_assert_eq!(qa.exactness == Exactness::Exact, contained);
        }
    }
}
