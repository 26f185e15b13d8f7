//! Runtime evidence: hook plans handed to an instrumentation agent, and
//! analysis of the event logs it writes back.

mod detect;
mod events;
mod hooks;
mod summary;

pub use detect::{detect_exfiltration, split_sessions, ExfiltrationFinding, PAIRING_WINDOW_MS};
pub use events::{ingest_events, ApiIdentity, EventError, EventTag, MarkerKind, RuntimeEvent, EVENT_SCHEMA_VERSION};
pub use hooks::{generate_hook_plan, Capture, EmptyPlan, Hook, HookPlan, HookTag, HOOK_PLAN_SCHEMA_VERSION};
pub use summary::{summarize_dynamic, AppFindings, DynamicSummary};
