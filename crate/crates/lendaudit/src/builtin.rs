//! Policy, mapping and permission-registry files compiled into the binary,
//! used when no directory or file is configured.

use std::collections::BTreeMap;

use lendaudit_core::mapping::MappingTable;
use lendaudit_core::permission::PermissionRegistry;
use lendaudit_core::pipeline::PolicyLibrary;
use lendaudit_core::policy::{Jurisdiction, PolicySet};

use crate::formats::{load_mapping, load_permission_registry, load_policy};

pub const POLICY_FILES: [(&str, &str); 8] = [
    ("platform.toml", include_str!("../../../data/policies/platform.toml")),
    ("india.toml", include_str!("../../../data/policies/india.toml")),
    ("indonesia.toml", include_str!("../../../data/policies/indonesia.toml")),
    ("kenya.toml", include_str!("../../../data/policies/kenya.toml")),
    ("nigeria.toml", include_str!("../../../data/policies/nigeria.toml")),
    ("pakistan.toml", include_str!("../../../data/policies/pakistan.toml")),
    ("philippines.toml", include_str!("../../../data/policies/philippines.toml")),
    ("thailand.toml", include_str!("../../../data/policies/thailand.toml")),
];

pub const MAPPING_FILE: &str = include_str!("../../../data/mapping/seed.toml");
pub const PERMISSION_REGISTRY_FILE: &str = include_str!("../../../data/permissions.toml");

pub fn policies() -> BTreeMap<Jurisdiction, PolicySet> {
    POLICY_FILES
        .iter()
        .map(|(name, text)| {
            let set = load_policy(text, name).unwrap_or_else(|e| panic!("built-in {e}"));
            (set.jurisdiction, set)
        })
        .collect()
}

pub fn mapping() -> MappingTable {
    load_mapping(MAPPING_FILE, "seed.toml").unwrap_or_else(|e| panic!("built-in {e}"))
}

pub fn permission_registry() -> PermissionRegistry {
    load_permission_registry(PERMISSION_REGISTRY_FILE, "permissions.toml").unwrap_or_else(|e| panic!("built-in {e}"))
}

pub fn library() -> PolicyLibrary {
    let mut countries = policies();
    let platform = countries.remove(&Jurisdiction::Platform).expect("built-in platform policy");
    PolicyLibrary { platform, countries, mapping: mapping() }
}
