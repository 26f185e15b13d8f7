use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::flows::FlowFinding;
use super::usage::ApiUsageRecord;
use super::violations::ViolationRecord;
use crate::policy::Jurisdiction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Asymmetry {
    CountryOnly,
    PlatformOnly,
    Both,
    Neither,
}

impl Asymmetry {
    pub fn classify(country: bool, platform: bool) -> Self {
        match (country, platform) {
            (true, false) => Asymmetry::CountryOnly,
            (false, true) => Asymmetry::PlatformOnly,
            (true, true) => Asymmetry::Both,
            (false, false) => Asymmetry::Neither,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub country: Vec<ViolationRecord>,
    pub platform: Vec<ViolationRecord>,
    pub harmonized: Vec<ViolationRecord>,
    pub api_usage: Vec<ApiUsageRecord>,
    pub flows: Vec<FlowFinding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub package_id: String,
    pub jurisdiction: Jurisdiction,
    pub violates_country: bool,
    pub violates_platform: bool,
    pub violates_harmonized: bool,
    pub asymmetry: Asymmetry,
    pub evidence: Evidence,
}

impl AuditVerdict {
    pub fn any_violation(&self) -> bool {
        self.violates_country || self.violates_platform || self.violates_harmonized
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{package_id}: country or platform violation without a harmonized violation")]
pub struct InconsistentEvidence {
    pub package_id: String,
}

/// Verdict from the three violation lists computed on one manifest. API
/// usage and flows are attached by the caller.
pub fn classify_app(
    package_id: &str,
    jurisdiction: Jurisdiction,
    country: Vec<ViolationRecord>,
    platform: Vec<ViolationRecord>,
    harmonized: Vec<ViolationRecord>,
) -> Result<AuditVerdict, InconsistentEvidence> {
    let (c, p, h) = (!country.is_empty(), !platform.is_empty(), !harmonized.is_empty());
    if (c || p) && !h {
        return Err(InconsistentEvidence { package_id: package_id.into() });
    }
    Ok(AuditVerdict {
        package_id: package_id.into(),
        jurisdiction,
        violates_country: c,
        violates_platform: p,
        violates_harmonized: h,
        asymmetry: Asymmetry::classify(c, p),
        evidence: Evidence { country, platform, harmonized, api_usage: Vec::new(), flows: Vec::new() },
    })
}
