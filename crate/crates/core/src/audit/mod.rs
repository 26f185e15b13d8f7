//! Static audit of one app: permission violations per regime, sensitive API
//! usage, source-to-sink reachability, and the asymmetry verdict. Corpus
//! aggregation into per-country summaries lives in [`summary`].

mod flows;
pub mod summary;
mod usage;
mod verdict;
mod violations;

pub use flows::{find_flows, FlowFinding, PLAUSIBLE_PATH};
pub use summary::{aggregate_country, Cell, CountrySummary, SummaryError, SummaryRow};
pub use usage::{detect_api_usage, ApiUsageRecord, CodeFacts};
pub use verdict::{classify_app, Asymmetry, AuditVerdict, Evidence, InconsistentEvidence};
pub use violations::{check_permissions, watch_items, Framework, ViolationRecord, WatchItem};
