//! Turning policy prose into permission rules with language models: prompt
//! rendering, the completion interface, response parsing, registry
//! validation, union merge across models, and comparison with expert sets.

mod completion;
mod diff;
mod merge;
mod parse;
mod prompt;
mod validate;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::policy::Prohibition;

pub use completion::{complete, CompletionError, CompletionRecord, TextCompletion};
pub use diff::{diff_against_ground_truth, CoverageReport, JurisdictionMismatch, KindMismatch};
pub use merge::{merge_model_outputs, DraftRule, PolicyDraft, ReviewFlag, ReviewRequired};
pub use parse::{parse_mapping_response, NoProposalsFound, ParseWarning, ParsedResponse};
pub use prompt::{render_prompt, EmptyPolicyDocument, PolicyDocument, PromptPair, PLACEHOLDER, SYSTEM_PROMPT, USER_TEMPLATE};
pub use validate::{validate_proposals, RejectedName, Validation, NOT_IN_REGISTRY};

/// One data-type row proposed by a model.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MappingProposal {
    pub data_type: String,
    pub prohibition: Prohibition,
    /// Prohibition cell as written, e.g. `Conditional (one-time)`.
    pub prohibition_text: String,
    pub permissions: Vec<String>,
    pub notes: String,
    pub model_id: String,
}
