//! The policy-to-permission workflow over one or more completion clients.

use lendaudit_core::mapper::{
    complete, merge_model_outputs, parse_mapping_response, render_prompt, validate_proposals, CompletionError, CompletionRecord,
    NoProposalsFound, ParseWarning, PolicyDocument, PolicyDraft, PromptPair, ReviewFlag, TextCompletion, Validation,
};
use lendaudit_core::permission::PermissionRegistry;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapPolicyError {
    #[error("no completion clients given")]
    NoModels,
    #[error("{model}: {source}")]
    Completion { model: String, source: CompletionError },
    #[error("{model}: {source}")]
    Parse { model: String, source: NoProposalsFound },
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelRun {
    pub record: CompletionRecord,
    pub warnings: Vec<ParseWarning>,
    pub validation: Validation,
}

#[derive(Debug, Clone, Serialize)]
pub struct MappingRun {
    pub prompt: PromptPair,
    pub runs: Vec<ModelRun>,
    pub draft: PolicyDraft,
    pub review_flags: Vec<ReviewFlag>,
}

/// Prompts every client with the same document, keeps each model's
/// registry-valid proposals and merges them by union.
pub fn map_policy(doc: &PolicyDocument, clients: &[&dyn TextCompletion], registry: &PermissionRegistry) -> Result<MappingRun, MapPolicyError> {
    if clients.is_empty() {
        return Err(MapPolicyError::NoModels);
    }
    let prompt = render_prompt(doc);
    let mut runs = Vec::new();
    for client in clients {
        let model = client.model_id().to_string();
        let record = complete(&prompt, *client).map_err(|source| MapPolicyError::Completion { model: model.clone(), source })?;
        let parsed = parse_mapping_response(&record.response, &model).map_err(|source| MapPolicyError::Parse { model, source })?;
        let validation = validate_proposals(&parsed.proposals, registry);
        runs.push(ModelRun { record, warnings: parsed.warnings, validation });
    }
    let accepted: Vec<_> = runs.iter().map(|r| r.validation.accepted.clone()).collect();
    let draft = merge_model_outputs(&accepted);
    let review_flags = draft.review_flags();
    Ok(MappingRun { prompt, runs, draft, review_flags })
}
