//! Regulator registries of lending providers, already collapsed to
//! approved / delisted.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::Jurisdiction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegistryStatus {
    Approved,
    Delisted,
}

impl RegistryStatus {
    pub const ALL: [RegistryStatus; 2] = [RegistryStatus::Approved, RegistryStatus::Delisted];

    pub fn name(self) -> &'static str {
        match self {
            RegistryStatus::Approved => "approved",
            RegistryStatus::Delisted => "delisted",
        }
    }
}

impl fmt::Display for RegistryStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegistryStatus {
    type Err = RegistryTableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RegistryStatus::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RegistryTableError::SchemaViolation(alloc::format!("status {s:?} is not approved or delisted")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryTableError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("duplicate registry row for ({country}, {package_id})")]
    DuplicateRow { country: Jurisdiction, package_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryRow {
    pub country: Jurisdiction,
    pub status: RegistryStatus,
    pub package_id: String,
    pub app_name: String,
    pub registry_source: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegistryTable {
    rows: Vec<RegistryRow>,
}

impl RegistryTable {
    pub fn new(rows: Vec<RegistryRow>) -> Result<Self, RegistryTableError> {
        let mut seen = BTreeSet::new();
        for r in &rows {
            if !r.country.is_country() {
                return Err(RegistryTableError::SchemaViolation(alloc::format!("{} is not a country", r.country)));
            }
            if r.package_id.trim().is_empty() {
                return Err(RegistryTableError::SchemaViolation("empty package_id".to_string()));
            }
            if !seen.insert((r.country, r.package_id.as_str())) {
                return Err(RegistryTableError::DuplicateRow { country: r.country, package_id: r.package_id.clone() });
            }
        }
        Ok(RegistryTable { rows })
    }

    pub fn rows(&self) -> &[RegistryRow] {
        &self.rows
    }

    pub fn find(&self, country: Jurisdiction, package_id: &str) -> Option<&RegistryRow> {
        self.rows.iter().find(|r| r.country == country && r.package_id == package_id)
    }

    pub fn count(&self, country: Jurisdiction, status: RegistryStatus) -> usize {
        self.rows.iter().filter(|r| r.country == country && r.status == status).count()
    }

    pub fn countries(&self) -> BTreeSet<Jurisdiction> {
        self.rows.iter().map(|r| r.country).collect()
    }
}
