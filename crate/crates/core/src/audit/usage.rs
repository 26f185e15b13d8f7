use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dex::{FieldRead, Invocation, MethodRef};
use crate::manifest::ManifestModel;
use crate::mapping::{ApiKind, ApiPattern, DataCategory, Exactness, MappingTable};

const CONTENT_RESOLVER: &str = "Landroid/content/ContentResolver;";

/// What the audit needs from an app's bytecode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodeFacts {
    pub defined_methods: Vec<MethodRef>,
    pub invocations: Vec<Invocation>,
    pub field_reads: Vec<FieldRead>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ApiUsageRecord {
    pub permission: String,
    pub pattern: ApiPattern,
    /// Methods containing a matching call, sorted.
    pub call_sites: Vec<MethodRef>,
    /// Whether the manifest declares `permission`.
    pub declared: bool,
    pub exactness: Exactness,
    pub provenance: String,
    pub category: Option<DataCategory>,
}

/// One record per (permission, pattern) with at least one call site, using
/// the patterns selected for the manifest's target SDK.
pub fn detect_api_usage(code: &CodeFacts, manifest: &ManifestModel, table: &MappingTable) -> Vec<ApiUsageRecord> {
    let resolver_users: BTreeSet<&MethodRef> = code
        .invocations
        .iter()
        .filter(|i| i.callee.class_descriptor == CONTENT_RESOLVER)
        .map(|i| &i.caller)
        .collect();

    let mut out: BTreeMap<(String, ApiPattern), ApiUsageRecord> = BTreeMap::new();
    for permission in table.permissions() {
        let Ok(query) = table.apis_for_permission(permission, manifest.target_sdk) else {
            continue;
        };
        for entry in query.entries {
            let sites: BTreeSet<&MethodRef> = match entry.pattern.kind {
                ApiKind::MethodCall => code
                    .invocations
                    .iter()
                    .filter(|i| entry.pattern.matches_method(&i.callee))
                    .map(|i| &i.caller)
                    .collect(),
                ApiKind::ContentUri => code
                    .field_reads
                    .iter()
                    .filter(|r| entry.pattern.matches_field(&r.field) && resolver_users.contains(&r.method))
                    .map(|r| &r.method)
                    .collect(),
            };
            if sites.is_empty() {
                continue;
            }
            let record = out.entry((permission.into(), entry.pattern.clone())).or_insert_with(|| ApiUsageRecord {
                permission: permission.into(),
                pattern: entry.pattern.clone(),
                call_sites: Vec::new(),
                declared: manifest.declared_permissions.contains(permission),
                exactness: query.exactness,
                provenance: entry.provenance.clone(),
                category: entry.category,
            });
            record.call_sites.extend(sites.into_iter().cloned());
            record.call_sites.sort();
            record.call_sites.dedup();
        }
    }
    out.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dex::{FieldRef, InvokeKind};
    use crate::mapping::{MappingFileEntry, MappingFile};
    use alloc::vec;

    fn table() -> MappingTable {
        let e = |perm: &str, class: &str, method: &str, kind| MappingFileEntry {
            permission: alloc::format!("android.permission.{perm}"),
            class_prefix: class.into(),
            method: method.into(),
            kind,
            min_api: 1,
            max_api: 36,
            provenance: "test".into(),
            category: None,
        };
        MappingTable::from_file(MappingFile {
            entries: vec![
                e("READ_CONTACTS", "Landroid/provider/ContactsContract", "*", ApiKind::ContentUri),
                e("READ_SMS", "Landroid/telephony/SmsManager", "getAllMessagesFromIcc", ApiKind::MethodCall),
            ],
            sinks: vec![],
        })
        .unwrap()
    }

    fn method(name: &str) -> MethodRef {
        MethodRef::new("Lapp/Reader;", name, &[], "V")
    }

    fn invoke(caller: &MethodRef, class: &str, name: &str) -> Invocation {
        Invocation { caller: caller.clone(), callee: MethodRef::new(class, name, &[], "V"), kind: InvokeKind::Virtual }
    }

    fn contacts_read(m: &MethodRef) -> FieldRead {
        FieldRead {
            method: m.clone(),
            field: FieldRef {
                class_descriptor: "Landroid/provider/ContactsContract$Contacts;".into(),
                name: "CONTENT_URI".into(),
                type_descriptor: "Landroid/net/Uri;".into(),
            },
        }
    }

    #[test]
    fn provider_query_with_uri_in_same_method() {
        let m = method("collect");
        let code = CodeFacts {
            defined_methods: vec![m.clone()],
            invocations: vec![invoke(&m, CONTENT_RESOLVER, "query")],
            field_reads: vec![contacts_read(&m)],
        };
        let manifest = ManifestModel::with_permissions("p", ["android.permission.READ_CONTACTS"]);
        let usage = detect_api_usage(&code, &manifest, &table());
        assert_eq!(usage.len(), 1);
        assert!(usage[0].declared);
        assert_eq!(usage[0].call_sites, vec![m]);
    }

    #[test]
    fn uri_read_without_query_does_not_count() {
        let (a, b) = (method("a"), method("b"));
        let code = CodeFacts {
            defined_methods: vec![a.clone(), b.clone()],
            invocations: vec![invoke(&b, CONTENT_RESOLVER, "query")],
            field_reads: vec![contacts_read(&a)],
        };
        assert!(detect_api_usage(&code, &ManifestModel::with_permissions("p", Vec::<String>::new()), &table()).is_empty());
    }

    #[test]
    fn undeclared_capability_is_flagged() {
        let m = method("sms");
        let code = CodeFacts {
            defined_methods: vec![m.clone()],
            invocations: vec![invoke(&m, "Landroid/telephony/SmsManager;", "getAllMessagesFromIcc")],
            field_reads: vec![],
        };
        let usage = detect_api_usage(&code, &ManifestModel::with_permissions("p", Vec::<String>::new()), &table());
        assert_eq!(usage.len(), 1);
        assert_eq!(usage[0].permission, "android.permission.READ_SMS");
        assert!(!usage[0].declared);
    }

    #[test]
    fn nothing_matches() {
        let code = CodeFacts::default();
        assert!(detect_api_usage(&code, &ManifestModel::with_permissions("p", Vec::<String>::new()), &table()).is_empty());
    }
}
