//! Permission-name syntax, spelling aliases, and the platform registry of
//! known permission names.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PLATFORM_PREFIX: &str = "android.permission.";

/// Dotted Java-style name with at least two segments, e.g.
/// `android.permission.READ_SMS`.
pub fn is_valid_permission_name(name: &str) -> bool {
    let mut segments = 0;
    for seg in name.split('.') {
        let mut chars = seg.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return false,
        }
        if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return false;
        }
        segments += 1;
    }
    segments >= 2
}

/// Bare constant names (`READ_SMS`) get the platform prefix; anything
/// dotted is left alone.
pub fn qualify(name: &str) -> String {
    let name = name.trim();
    if name.contains('.') {
        name.to_string()
    } else {
        alloc::format!("{PLATFORM_PREFIX}{name}")
    }
}

/// Maps alternative spellings to platform names. Keys and values are fully
/// qualified.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AliasTable(pub BTreeMap<String, String>);

impl AliasTable {
    pub fn normalize(&self, name: &str) -> String {
        let q = qualify(name);
        self.0.get(&q).cloned().unwrap_or(q)
    }

    pub fn merged(&self, other: &AliasTable) -> AliasTable {
        let mut m = self.0.clone();
        m.extend(other.0.iter().map(|(k, v)| (k.clone(), v.clone())));
        AliasTable(m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("permission {0:?} listed twice")]
    DuplicateName(String),
    #[error("invalid permission name {0:?}")]
    InvalidName(String),
    #[error("alias {alias:?} points at unknown permission {target:?}")]
    DanglingAlias { alias: String, target: String },
}

/// On-disk shape of the registry file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryFile {
    pub version: String,
    pub permissions: Vec<String>,
    #[serde(default)]
    pub aliases: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermissionRegistry {
    pub valid_names: BTreeSet<String>,
    pub aliases: AliasTable,
    pub version: String,
}

impl PermissionRegistry {
    pub fn from_file(doc: RegistryFile) -> Result<Self, RegistryError> {
        let mut valid_names = BTreeSet::new();
        for name in doc.permissions {
            if !is_valid_permission_name(&name) {
                return Err(RegistryError::InvalidName(name));
            }
            if !valid_names.insert(name.clone()) {
                return Err(RegistryError::DuplicateName(name));
            }
        }
        for (alias, target) in &doc.aliases {
            if !valid_names.contains(target) {
                return Err(RegistryError::DanglingAlias { alias: alias.clone(), target: target.clone() });
            }
        }
        Ok(PermissionRegistry { valid_names, aliases: AliasTable(doc.aliases), version: doc.version })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.valid_names.contains(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn name_syntax() {
        assert!(is_valid_permission_name("android.permission.READ_SMS"));
        assert!(is_valid_permission_name("com.fx.tindahan.permission.C2D_MESSAGE"));
        for bad in ["READ_SMS", "", "android..READ", "android.permission.", "1a.b", "a.b-c"] {
            assert!(!is_valid_permission_name(bad), "{bad}");
        }
    }

    #[test]
    fn alias_normalization() {
        let aliases = AliasTable(
            [("android.permission.READ_MEDIA_IMAGE".to_string(), "android.permission.READ_MEDIA_IMAGES".to_string())].into(),
        );
        assert_eq!(aliases.normalize("READ_MEDIA_IMAGE"), "android.permission.READ_MEDIA_IMAGES");
        assert_eq!(aliases.normalize("android.permission.CAMERA"), "android.permission.CAMERA");
    }

    #[test]
    fn registry_rejects_duplicates_and_dangling_aliases() {
        let doc = |perms: Vec<&str>, aliases: Vec<(&str, &str)>| RegistryFile {
            version: "t".into(),
            permissions: perms.into_iter().map(String::from).collect(),
            aliases: aliases.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
        };
        let ok = PermissionRegistry::from_file(doc(vec!["android.permission.CAMERA"], vec![])).unwrap();
        assert!(ok.contains("android.permission.CAMERA"));
        assert_eq!(
            PermissionRegistry::from_file(doc(vec!["a.B", "a.B"], vec![])),
            Err(RegistryError::DuplicateName("a.B".into()))
        );
        assert!(matches!(
            PermissionRegistry::from_file(doc(vec!["a.B"], vec![("a.C", "a.D")])),
            Err(RegistryError::DanglingAlias { .. })
        ));
    }
}
