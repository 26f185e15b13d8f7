use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EVENT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventTag {
    Source,
    Sink,
    Marker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MarkerKind {
    /// Starts a new session within a log.
    AppLaunch,
    RegistrationMilestone,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ApiIdentity {
    pub class_descriptor: String,
    pub method_name: String,
}

/// One line of an event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeEvent {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub event_id: String,
    pub timestamp_ms: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api: Option<ApiIdentity>,
    pub tag: EventTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker_kind: Option<MarkerKind>,
}

fn default_schema() -> u32 {
    EVENT_SCHEMA_VERSION
}

impl RuntimeEvent {
    fn check(&self) -> Result<(), String> {
        if self.schema_version != EVENT_SCHEMA_VERSION {
            return Err(alloc::format!("unsupported schema_version {}", self.schema_version));
        }
        if self.event_id.is_empty() {
            return Err("empty event_id".into());
        }
        match self.tag {
            EventTag::Marker if self.marker_kind.is_none() => return Err("marker without marker_kind".into()),
            EventTag::Source | EventTag::Sink if self.api.is_none() => return Err("source or sink without api".into()),
            EventTag::Sink if self.endpoint.as_deref().is_none_or(str::is_empty) => {
                return Err("sink without endpoint".into())
            }
            EventTag::Source | EventTag::Sink if self.marker_kind.is_some() => {
                return Err("marker_kind on a non-marker event".into())
            }
            _ => {}
        }
        if let Some(d) = &self.payload_digest {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(alloc::format!("payload_digest {d:?} is not hex"));
            }
        }
        Ok(())
    }

    pub fn is_marker(&self, kind: MarkerKind) -> bool {
        self.tag == EventTag::Marker && self.marker_kind == Some(kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: timestamp {found} is earlier than {previous}")]
    NonMonotonicTimestamp { line: usize, previous: i64, found: i64 },
}

/// Parses a newline-delimited log. Blank lines are skipped. Timestamps must
/// not decrease within a session; an `APP_LAUNCH` marker starts a new one.
pub fn ingest_events(log: &[u8]) -> Result<Vec<RuntimeEvent>, EventError> {
    let text = core::str::from_utf8(log)
        .map_err(|e| EventError::MalformedRecord { line: 1 + log[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(), reason: "invalid UTF-8".into() })?;
    let mut events = Vec::new();
    let mut ids = BTreeSet::new();
    let mut last: Option<i64> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| EventError::MalformedRecord { line, reason };
        let ev: RuntimeEvent = serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
        ev.check().map_err(malformed)?;
        if !ids.insert(ev.event_id.clone()) {
            return Err(malformed(alloc::format!("duplicate event_id {:?}", ev.event_id)));
        }
        if ev.is_marker(MarkerKind::AppLaunch) {
            last = None;
        }
        if let Some(prev) = last {
            if ev.timestamp_ms < prev {
                return Err(EventError::NonMonotonicTimestamp { line, previous: prev, found: ev.timestamp_ms });
            }
        }
        last = Some(ev.timestamp_ms);
        events.push(ev);
    }
    Ok(events)
}
