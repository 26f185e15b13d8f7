use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::Jurisdiction;

pub const PLACEHOLDER: &str = "[POLICY_TEXT_PLACEHOLDER]";

pub const SYSTEM_PROMPT: &str = "You are an Android security and data privacy expert with extensive knowledge of Android permissions and regulatory policies. Your expertise includes interpreting natural language policy statements and mapping them to technical permissions on the Android platform.";

pub const USER_TEMPLATE: &str = "\
Task: Analyze the following policy document and identify data access restrictions for mobile applications.

Policy Document: [POLICY_TEXT_PLACEHOLDER]

Instructions:
1. Identify prohibited data types:
   - Unconditionally prohibited: Data types explicitly banned regardless of user consent
   - Conditionally prohibited: Data types that require explicit user consent
2. Map to Android permissions: For each identified data type, determine the corresponding Android permissions required to access that data.
3. Reasoning process:
   a. Extract all statements relating to data access prohibitions
   b. Classify each as unconditional or conditional based on consent requirements
   c. Map prohibited data types to specific Android permissions
   d. Explain reasoning for uncertain mappings

Output Format: For each identified restriction, provide: Data Type (as described in policy), Prohibition Type (unconditional/conditional), Android Permissions (specific permission names), and Notes (any ambiguities or uncertainties).
";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("policy document body is empty")]
pub struct EmptyPolicyDocument;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDocument {
    pub jurisdiction: Jurisdiction,
    pub title: String,
    body_text: String,
    pub source_citation: String,
}

impl PolicyDocument {
    pub fn new(jurisdiction: Jurisdiction, title: &str, body_text: &str, source_citation: &str) -> Result<Self, EmptyPolicyDocument> {
        if body_text.trim().is_empty() {
            return Err(EmptyPolicyDocument);
        }
        Ok(PolicyDocument {
            jurisdiction,
            title: title.into(),
            body_text: body_text.into(),
            source_citation: source_citation.into(),
        })
    }

    pub fn body_text(&self) -> &str {
        &self.body_text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPair {
    pub system: String,
    pub user: String,
}

impl PromptPair {
    /// Exact bytes sent, used for the request digest and replay files.
    pub fn request_text(&self) -> String {
        alloc::format!("[system]\n{}\n\n[user]\n{}", self.system, self.user)
    }
}

pub fn render_prompt(doc: &PolicyDocument) -> PromptPair {
    PromptPair { system: SYSTEM_PROMPT.into(), user: USER_TEMPLATE.replace(PLACEHOLDER, doc.body_text().trim()) }
}
