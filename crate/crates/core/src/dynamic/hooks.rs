use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{FlowFinding, WatchItem};
use crate::manifest::ManifestModel;
use crate::mapping::{ApiKind, ApiPattern, MappingTable};

pub const HOOK_PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Capture {
    Args,
    Return,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HookTag {
    Source,
    Sink,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hook {
    /// Descriptor prefix to match; `*` in `method_name` hooks every method.
    pub class_descriptor: String,
    pub method_name: String,
    pub capture: Capture,
    pub tag: HookTag,
    /// Flow ids and `watch:<permission>` items this hook serves.
    pub derived_from: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HookPlan {
    pub schema_version: u32,
    pub package_id: String,
    pub hooks: Vec<Hook>,
    pub derived_from: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{package_id}: no flows and no watch items, nothing to hook")]
pub struct EmptyPlan {
    pub package_id: String,
}

fn capture_for(tag: HookTag, pattern: &ApiPattern) -> Capture {
    match (tag, pattern.kind) {
        (HookTag::Sink, _) => Capture::Args,
        (HookTag::Source, ApiKind::MethodCall) => Capture::Return,
        // provider reads: the URI goes in, the cursor comes out
        (HookTag::Source, ApiKind::ContentUri) => Capture::Both,
    }
}

/// One hook per distinct (pattern, role). Flow sources and sinks come
/// from the flows; each watch item adds the source patterns of its
/// permission at the app's target SDK plus every sink in the table.
pub fn generate_hook_plan(
    flows: &[FlowFinding],
    watch: &[WatchItem],
    manifest: &ManifestModel,
    table: &MappingTable,
) -> Result<HookPlan, EmptyPlan> {
    if flows.is_empty() && watch.is_empty() {
        return Err(EmptyPlan { package_id: manifest.package_id.clone() });
    }
    let mut hooks: BTreeMap<(HookTag, ApiPattern), BTreeSet<String>> = BTreeMap::new();
    let mut add = |tag: HookTag, p: &ApiPattern, origin: &str| {
        hooks.entry((tag, p.clone())).or_default().insert(origin.into());
    };
    for f in flows {
        add(HookTag::Source, &f.source_pattern, &f.id);
        add(HookTag::Sink, &f.sink_pattern, &f.id);
    }
    for w in watch {
        let origin = alloc::format!("watch:{}", w.permission);
        if let Ok(q) = table.apis_for_permission(&w.permission, manifest.target_sdk) {
            for e in q.entries {
                add(HookTag::Source, &e.pattern, &origin);
            }
        }
        for s in table.sinks() {
            add(HookTag::Sink, &s.pattern, &origin);
        }
    }
    let hooks: Vec<Hook> = hooks
        .into_iter()
        .map(|((tag, p), derived_from)| Hook {
            capture: capture_for(tag, &p),
            class_descriptor: p.class_descriptor_prefix,
            method_name: p.method_name,
            tag,
            derived_from,
        })
        .collect();
    let derived_from = hooks.iter().flat_map(|h| h.derived_from.iter().cloned()).collect();
    Ok(HookPlan { schema_version: HOOK_PLAN_SCHEMA_VERSION, package_id: manifest.package_id.clone(), hooks, derived_from })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::PLAUSIBLE_PATH;
    use crate::dex::MethodRef;
    use crate::mapping::{MappingFile, MappingFileEntry, SinkFileEntry};
    use crate::policy::Jurisdiction;
    use alloc::vec;

    fn flow(id: &str, source: ApiPattern, sink: ApiPattern) -> FlowFinding {
        let m = MethodRef::new("La/B;", "c", &[], "V");
        FlowFinding {
            id: id.into(),
            permission: "android.permission.READ_CONTACTS".into(),
            source_pattern: source,
            sink_pattern: sink,
            source_method: m.clone(),
            sink_method: m,
            path_length: 0,
            launcher_reachable: false,
            label: PLAUSIBLE_PATH.into(),
        }
    }

    fn table() -> MappingTable {
        MappingTable::from_file(MappingFile {
            entries: vec![MappingFileEntry {
                permission: "android.permission.CAMERA".into(),
                class_prefix: "Landroid/hardware/Camera".into(),
                method: "open".into(),
                kind: ApiKind::MethodCall,
                min_api: 1,
                max_api: 36,
                provenance: "t".into(),
                category: None,
            }],
            sinks: vec![SinkFileEntry { class_prefix: "Ljava/net/URL;".into(), method: "openConnection".into(), provenance: "t".into() }],
        })
        .unwrap()
    }

    fn manifest() -> ManifestModel {
        ManifestModel::with_permissions("com.a", ["android.permission.CAMERA"])
    }

    #[test]
    fn one_flow_two_hooks() {
        let f = flow("flow-001", ApiPattern::method_call("Lsrc;", "read"), ApiPattern::method_call("Lnet;", "send"));
        let plan = generate_hook_plan(&[f], &[], &manifest(), &table()).unwrap();
        assert_eq!(plan.hooks.len(), 2);
        assert_eq!(plan.hooks.iter().filter(|h| h.tag == HookTag::Sink).count(), 1);
        assert_eq!(plan.derived_from, ["flow-001".into()].into());
    }

    #[test]
    fn shared_sink_deduplicated() {
        let sink = ApiPattern::method_call("Lnet;", "send");
        let flows = [
            flow("flow-001", ApiPattern::method_call("Lsrc;", "a"), sink.clone()),
            flow("flow-002", ApiPattern::method_call("Lsrc;", "b"), sink),
        ];
        let plan = generate_hook_plan(&flows, &[], &manifest(), &table()).unwrap();
        assert_eq!(plan.hooks.len(), 3);
        let s = plan.hooks.iter().find(|h| h.tag == HookTag::Sink).unwrap();
        assert_eq!(s.derived_from.len(), 2);
        assert_eq!(s.capture, Capture::Args);
    }

    #[test]
    fn watch_items_hook_sources_and_sinks() {
        let w = WatchItem {
            permission: "android.permission.CAMERA".into(),
            jurisdiction: Jurisdiction::Pakistan,
            data_type: "Camera".into(),
            source_clause: "c".into(),
        };
        let plan = generate_hook_plan(&[], &[w], &manifest(), &table()).unwrap();
        assert_eq!(plan.hooks.len(), 2);
        assert!(plan.hooks.iter().all(|h| h.derived_from.contains("watch:android.permission.CAMERA")));
    }

    #[test]
    fn nothing_to_hook() {
        assert!(generate_hook_plan(&[], &[], &manifest(), &table()).is_err());
    }
}
