use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::events::{EventTag, MarkerKind, RuntimeEvent};
use crate::manifest::ManifestModel;
use crate::mapping::{DataCategory, MappingTable};

/// How far back a sink looks for a source when digests do not match.
pub const PAIRING_WINDOW_MS: i64 = 60_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExfiltrationFinding {
    pub category: DataCategory,
    /// Sink happened before the session's first registration milestone,
    /// or the session has none.
    pub pre_registration: bool,
    /// Source was observed in a launcher activity.
    pub launch_time: bool,
    pub source_event_id: String,
    pub sink_event_id: String,
    pub endpoint: String,
}

/// Sessions in log order; each `APP_LAUNCH` marker begins a new one.
pub fn split_sessions(events: &[RuntimeEvent]) -> Vec<&[RuntimeEvent]> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, e) in events.iter().enumerate() {
        if i > start && e.is_marker(MarkerKind::AppLaunch) {
            out.push(&events[start..i]);
            start = i;
        }
    }
    if start < events.len() {
        out.push(&events[start..]);
    }
    out
}

struct Source<'a> {
    event: &'a RuntimeEvent,
    category: DataCategory,
    paired: bool,
}

/// Pairs sources with later sinks, session by session. For each sink and
/// each category with unpaired sources, a source with the same payload
/// digest is taken first; otherwise the most recent unpaired source within
/// [`PAIRING_WINDOW_MS`]. Sources whose API has no category in `table` are
/// ignored. Findings are returned sorted and deduplicated.
pub fn detect_exfiltration(events: &[RuntimeEvent], manifest: &ManifestModel, table: &MappingTable) -> Vec<ExfiltrationFinding> {
    let launchers: BTreeSet<String> = manifest.launcher_activities.iter().cloned().chain(manifest.launcher_classes()).collect();
    let mut found = BTreeSet::new();
    for session in split_sessions(events) {
        let registration = session
            .iter()
            .find(|e| e.is_marker(MarkerKind::RegistrationMilestone))
            .map(|e| e.timestamp_ms);
        let mut sources: Vec<Source<'_>> = Vec::new();
        for e in session {
            match e.tag {
                EventTag::Marker => {}
                EventTag::Source => {
                    let Some(api) = &e.api else { continue };
                    if let Some(category) = table.category_for(&api.class_descriptor, &api.method_name) {
                        sources.push(Source { event: e, category, paired: false });
                    }
                }
                EventTag::Sink => {
                    let mut by_category: BTreeMap<DataCategory, usize> = BTreeMap::new();
                    for (i, s) in sources.iter().enumerate().rev() {
                        if s.paired {
                            continue;
                        }
                        let digest_match = s.event.payload_digest.is_some() && s.event.payload_digest == e.payload_digest;
                        let in_window = e.timestamp_ms - s.event.timestamp_ms <= PAIRING_WINDOW_MS;
                        let slot = by_category.get(&s.category).copied();
                        let slot_digest = slot.is_some_and(|j| {
                            sources[j].event.payload_digest.is_some() && sources[j].event.payload_digest == e.payload_digest
                        });
                        if (digest_match && !slot_digest) || (slot.is_none() && in_window) {
                            by_category.insert(s.category, i);
                        }
                    }
                    for (category, i) in by_category {
                        let s = &mut sources[i];
                        s.paired = true;
                        found.insert(ExfiltrationFinding {
                            category,
                            pre_registration: registration.is_none_or(|t| e.timestamp_ms < t),
                            launch_time: s.event.activity.as_ref().is_some_and(|a| launchers.contains(a)),
                            source_event_id: s.event.event_id.clone(),
                            sink_event_id: e.event_id.clone(),
                            endpoint: e.endpoint.clone().unwrap_or_default(),
                        });
                    }
                }
            }
        }
    }
    found.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::events::ApiIdentity;
    use crate::mapping::{ApiKind, MappingFile, MappingFileEntry};
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn table() -> MappingTable {
        let e = |perm: &str, class: &str, method: &str, kind, cat| MappingFileEntry {
            permission: alloc::format!("android.permission.{perm}"),
            class_prefix: class.into(),
            method: method.into(),
            kind,
            min_api: 1,
            max_api: 36,
            provenance: "t".into(),
            category: Some(cat),
        };
        MappingTable::from_file(MappingFile {
            entries: vec![
                e("READ_CONTACTS", "Landroid/provider/ContactsContract", "*", ApiKind::ContentUri, DataCategory::Contacts),
                e("ACCESS_FINE_LOCATION", "Landroid/location/LocationManager", "getLastKnownLocation", ApiKind::MethodCall, DataCategory::Location),
            ],
            sinks: vec![],
        })
        .unwrap()
    }

    fn ev(id: &str, t: i64, tag: EventTag) -> RuntimeEvent {
        RuntimeEvent {
            schema_version: 1,
            event_id: id.into(),
            timestamp_ms: t,
            api: None,
            tag,
            activity: None,
            payload_digest: None,
            endpoint: None,
            marker_kind: None,
        }
    }

    fn contacts(id: &str, t: i64) -> RuntimeEvent {
        RuntimeEvent {
            api: Some(ApiIdentity { class_descriptor: "Landroid/provider/ContactsContract$Contacts;".into(), method_name: "query".into() }),
            ..ev(id, t, EventTag::Source)
        }
    }

    fn location(id: &str, t: i64) -> RuntimeEvent {
        RuntimeEvent {
            api: Some(ApiIdentity { class_descriptor: "Landroid/location/LocationManager;".into(), method_name: "getLastKnownLocation".into() }),
            ..ev(id, t, EventTag::Source)
        }
    }

    fn sink(id: &str, t: i64) -> RuntimeEvent {
        RuntimeEvent {
            api: Some(ApiIdentity { class_descriptor: "Ljava/net/URL;".into(), method_name: "openConnection".into() }),
            endpoint: Some("api.example.com".into()),
            ..ev(id, t, EventTag::Sink)
        }
    }

    fn marker(id: &str, t: i64, kind: MarkerKind) -> RuntimeEvent {
        RuntimeEvent { marker_kind: Some(kind), ..ev(id, t, EventTag::Marker) }
    }

    fn manifest() -> ManifestModel {
        let mut m = ManifestModel::with_permissions("com.a", Vec::<String>::new());
        m.launcher_activities.insert("com.a.Main".into());
        m
    }

    #[test]
    fn before_and_after_registration() {
        let log = vec![
            marker("l", 0, MarkerKind::AppLaunch),
            contacts("s1", 100),
            sink("k1", 400),
            marker("r", 900, MarkerKind::RegistrationMilestone),
            contacts("s2", 950),
            sink("k2", 1000),
        ];
        let f = detect_exfiltration(&log, &manifest(), &table());
        assert_eq!(f.len(), 2);
        let first = f.iter().find(|x| x.source_event_id == "s1").unwrap();
        assert_eq!(first.category, DataCategory::Contacts);
        assert!(first.pre_registration);
        assert!(!f.iter().find(|x| x.source_event_id == "s2").unwrap().pre_registration);
    }

    #[test]
    fn launcher_activity_marks_launch_time() {
        let mut src = location("s", 5);
        src.activity = Some("com.a.Main".into());
        let f = detect_exfiltration(&[src, sink("k", 6)], &manifest(), &table());
        assert!(f[0].launch_time);
        assert!(f[0].pre_registration);
    }

    #[test]
    fn window_and_digest() {
        let far = contacts("s", 0);
        assert!(detect_exfiltration(&[far.clone(), sink("k", PAIRING_WINDOW_MS + 1)], &manifest(), &table()).is_empty());
        let mut far = far;
        far.payload_digest = Some("aa".into());
        let mut k = sink("k", PAIRING_WINDOW_MS * 10);
        k.payload_digest = Some("aa".into());
        assert_eq!(detect_exfiltration(&[far, k], &manifest(), &table()).len(), 1);
    }

    #[test]
    fn digest_beats_recency() {
        let mut old = contacts("old", 0);
        old.payload_digest = Some("aa".into());
        let recent = contacts("recent", 10);
        let mut k = sink("k", 20);
        k.payload_digest = Some("aa".into());
        let f = detect_exfiltration(&[old, recent, k], &manifest(), &table());
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].source_event_id, "old");
    }

    #[test]
    fn one_sink_per_source_and_one_source_per_category() {
        let log = vec![contacts("a", 0), contacts("b", 1), location("c", 2), sink("k1", 3), sink("k2", 4)];
        let f = detect_exfiltration(&log, &manifest(), &table());
        let pairs: BTreeSet<(String, String)> = f.iter().map(|x| (x.source_event_id.clone(), x.sink_event_id.clone())).collect();
        let want: BTreeSet<(String, String)> =
            [("b", "k1"), ("c", "k1"), ("a", "k2")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert_eq!(pairs, want);
    }

    #[test]
    fn sessions_do_not_pair_across_launches() {
        let log = vec![contacts("a", 0), marker("l", 5, MarkerKind::AppLaunch), sink("k", 6)];
        assert!(detect_exfiltration(&log, &manifest(), &table()).is_empty());
        assert_eq!(split_sessions(&log).len(), 2);
    }

    fn arb_log() -> impl Strategy<Value = (Vec<RuntimeEvent>, i64)> {
        (prop::collection::vec((0u8..3, 0i64..40_000), 1..25), 0i64..2_000_000).prop_map(|(steps, marker_at)| {
            let mut t = 0;
            let mut log = Vec::new();
            for (i, (kind, dt)) in steps.into_iter().enumerate() {
                t += dt;
                let id = alloc::format!("e{i}");
                log.push(match kind {
                    0 => contacts(&id, t),
                    1 => location(&id, t),
                    _ => sink(&id, t),
                });
            }
            (log, marker_at)
        })
    }

    fn with_marker(log: &[RuntimeEvent], at: i64) -> Vec<RuntimeEvent> {
        let mut out: Vec<RuntimeEvent> = log.to_vec();
        let pos = out.iter().position(|e| e.timestamp_ms > at).unwrap_or(out.len());
        out.insert(pos, marker("reg", at, MarkerKind::RegistrationMilestone));
        out
    }

    proptest! {
        #[test]
        fn marker_monotone((log, at) in arb_log(), shift in 0i64..500_000) {
            let m = manifest();
            let early = detect_exfiltration(&with_marker(&log, at), &m, &table());
            let late = detect_exfiltration(&with_marker(&log, at + shift), &m, &table());
            prop_assert_eq!(early.len(), late.len());
            for f in &early {
                if f.pre_registration {
                    let g = late.iter().find(|g| g.source_event_id == f.source_event_id && g.sink_event_id == f.sink_event_id);
                    prop_assert!(g.is_some_and(|g| g.pre_registration));
                }
            }
            let ts: BTreeMap<&str, i64> = log.iter().map(|e| (e.event_id.as_str(), e.timestamp_ms)).collect();
            for f in &late {
                prop_assert!(ts[f.source_event_id.as_str()] <= ts[f.sink_event_id.as_str()]);
            }
        }
    }
}
