//! On-disk formats: TOML policy, mapping and permission-registry files,
//! the registry CSV, and NDJSON event logs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lendaudit_core::dynamic::{ingest_events, EventError, RuntimeEvent};
use lendaudit_core::mapping::{MappingError, MappingFile, MappingTable};
use lendaudit_core::permission::{PermissionRegistry, RegistryError, RegistryFile};
use lendaudit_core::policy::{Jurisdiction, PolicyError, PolicyFile, PolicySet};
use lendaudit_core::registry::{RegistryRow, RegistryStatus, RegistryTable, RegistryTableError};
use serde::Deserialize;
use thiserror::Error;

pub const REGISTRY_HEADER: [&str; 5] = ["country", "status", "package_id", "app_name", "registry_source"];

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{origin}: {source}")]
    Toml { origin: String, source: toml::de::Error },
    #[error("{origin}: {source}")]
    Policy { origin: String, source: PolicyError },
    #[error("{origin}: {source}")]
    Mapping { origin: String, source: MappingError },
    #[error("{origin}: {source}")]
    PermissionRegistry { origin: String, source: RegistryError },
    #[error("two policy files for {0}")]
    DuplicateJurisdiction(Jurisdiction),
    #[error(transparent)]
    Registry(#[from] RegistryTableError),
    #[error(transparent)]
    Events(#[from] EventError),
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T, FormatError> {
    toml::from_str(text).map_err(|source| FormatError::Toml { origin: origin.into(), source })
}

pub fn load_policy(text: &str, origin: &str) -> Result<PolicySet, FormatError> {
    let file: PolicyFile = parse_toml(text, origin)?;
    PolicySet::from_file(file).map_err(|source| FormatError::Policy { origin: origin.into(), source })
}

pub fn policy_to_toml(set: &PolicySet) -> String {
    toml::to_string(&set.to_file()).expect("policy files always serialize")
}

/// Every `*.toml` in `dir`, keyed by jurisdiction.
pub fn load_policy_dir(dir: &Path) -> Result<BTreeMap<Jurisdiction, PolicySet>, FormatError> {
    let entries = fs::read_dir(dir).map_err(|source| FormatError::Io { path: dir.to_path_buf(), source })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    let mut out = BTreeMap::new();
    for p in paths {
        let text = String::from_utf8_lossy(&read_file(&p)?).into_owned();
        let set = load_policy(&text, &p.display().to_string())?;
        let j = set.jurisdiction;
        if out.insert(j, set).is_some() {
            return Err(FormatError::DuplicateJurisdiction(j));
        }
    }
    Ok(out)
}

pub fn load_mapping(text: &str, origin: &str) -> Result<MappingTable, FormatError> {
    let file: MappingFile = parse_toml(text, origin)?;
    MappingTable::from_file(file).map_err(|source| FormatError::Mapping { origin: origin.into(), source })
}

pub fn load_permission_registry(text: &str, origin: &str) -> Result<PermissionRegistry, FormatError> {
    let file: RegistryFile = parse_toml(text, origin)?;
    PermissionRegistry::from_file(file).map_err(|source| FormatError::PermissionRegistry { origin: origin.into(), source })
}

fn schema(msg: String) -> RegistryTableError {
    RegistryTableError::SchemaViolation(msg)
}

/// Registry CSV with the exact header `country,status,package_id,app_name,registry_source`.
/// Countries may be given by name or two-letter code.
pub fn load_registry(bytes: &[u8]) -> Result<RegistryTable, RegistryTableError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = reader.headers().map_err(|e| schema(e.to_string()))?.clone();
    if header.iter().map(str::trim).ne(REGISTRY_HEADER) {
        return Err(schema(format!("header must be {}", REGISTRY_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| schema(format!("line {line}: {e}")))?;
        let field = |k: usize| rec.get(k).unwrap_or("").trim().to_string();
        let country: Jurisdiction = field(0).parse().map_err(|_| schema(format!("line {line}: unknown country {:?}", field(0))))?;
        let status: RegistryStatus = field(1).parse().map_err(|e: RegistryTableError| schema(format!("line {line}: {e}")))?;
        rows.push(RegistryRow { country, status, package_id: field(2), app_name: field(3), registry_source: field(4) });
    }
    RegistryTable::new(rows)
}

pub fn load_events(path: &Path) -> Result<Vec<RuntimeEvent>, FormatError> {
    Ok(ingest_events(&read_file(path)?)?)
}
