//! Projection of a decoded manifest tree onto the fields the audit uses.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axml::{AxmlDocument, Element, TypedValue};

const ACTION_MAIN: &str = "android.intent.action.MAIN";
const CATEGORY_LAUNCHER: &str = "android.intent.category.LAUNCHER";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("root element is <{0}>, expected <manifest>")]
    NotAManifest(String),
    #[error("manifest has no package attribute")]
    MissingPackageAttribute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestModel {
    pub package_id: String,
    pub version_code: Option<i64>,
    pub version_name: Option<String>,
    /// Fully qualified names from `uses-permission` and
    /// `uses-permission-sdk-23`, case preserved.
    pub declared_permissions: BTreeSet<String>,
    /// Names that came (at least once) from `uses-permission-sdk-23`.
    pub sdk23_permissions: BTreeSet<String>,
    /// `android:name` values given as resource references, rendered `@XXXXXXXX`.
    pub unresolved_permissions: BTreeSet<String>,
    pub min_sdk: u32,
    pub target_sdk: u32,
    /// Activities and activity-aliases with a MAIN/LAUNCHER intent filter.
    pub launcher_activities: BTreeSet<String>,
    /// Activities and activity-aliases.
    pub all_activities: BTreeSet<String>,
    /// alias name → target activity
    pub activity_aliases: BTreeMap<String, String>,
}

impl ManifestModel {
    /// Minimal model used when only permissions matter.
    pub fn with_permissions<I, S>(package_id: &str, permissions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ManifestModel {
            package_id: package_id.to_string(),
            version_code: None,
            version_name: None,
            declared_permissions: permissions.into_iter().map(Into::into).collect(),
            sdk23_permissions: BTreeSet::new(),
            unresolved_permissions: BTreeSet::new(),
            min_sdk: 1,
            target_sdk: 1,
            launcher_activities: BTreeSet::new(),
            all_activities: BTreeSet::new(),
            activity_aliases: BTreeMap::new(),
        }
    }

    /// Launcher entries with aliases replaced by the class they point at.
    pub fn launcher_classes(&self) -> BTreeSet<String> {
        self.launcher_activities
            .iter()
            .map(|a| self.activity_aliases.get(a).unwrap_or(a).clone())
            .collect()
    }

    /// Activity classes: all activities minus aliases, plus alias targets.
    pub fn activity_classes(&self) -> BTreeSet<String> {
        self.all_activities
            .iter()
            .map(|a| self.activity_aliases.get(a).unwrap_or(a).clone())
            .collect()
    }
}

/// `.Foo` and bare `Foo` are relative to the package.
fn qualify(package: &str, name: &str) -> String {
    if let Some(rest) = name.strip_prefix('.') {
        alloc::format!("{package}.{rest}")
    } else if !name.contains('.') {
        alloc::format!("{package}.{name}")
    } else {
        name.to_string()
    }
}

fn int_attr(e: &Element, name: &str) -> Option<i64> {
    e.android_attr(name).and_then(TypedValue::as_int)
}

fn has_launcher_filter(e: &Element) -> bool {
    e.children_named("intent-filter").any(|f| {
        let names = |tag: &'static str| {
            f.children_named(tag)
                .filter_map(|c| c.android_attr("name").and_then(TypedValue::as_str))
                .collect::<Vec<_>>()
        };
        names("action").contains(&ACTION_MAIN) && names("category").contains(&CATEGORY_LAUNCHER)
    })
}

pub fn extract_manifest(doc: &AxmlDocument) -> Result<ManifestModel, ManifestError> {
    let root = &doc.root;
    if root.name != "manifest" {
        return Err(ManifestError::NotAManifest(root.name.clone()));
    }
    let package_id = root
        .plain_attr("package")
        .and_then(TypedValue::as_str)
        .filter(|p| !p.is_empty())
        .ok_or(ManifestError::MissingPackageAttribute)?
        .to_string();

    let mut model = ManifestModel::with_permissions(&package_id, Vec::<String>::new());
    model.version_code = int_attr(root, "versionCode");
    model.version_name = root.android_attr("versionName").map(|v| v.to_string());

    let mut min_sdk = None;
    let mut target_sdk = None;
    for child in &root.children {
        match child.name.as_str() {
            "uses-permission" | "uses-permission-sdk-23" => match child.android_attr("name") {
                Some(TypedValue::String(name)) if !name.is_empty() => {
                    model.declared_permissions.insert(name.clone());
                    if child.name == "uses-permission-sdk-23" {
                        model.sdk23_permissions.insert(name.clone());
                    }
                }
                Some(v @ TypedValue::Reference(_)) => {
                    model.unresolved_permissions.insert(v.to_string());
                }
                _ => {}
            },
            "uses-sdk" => {
                min_sdk = min_sdk.or(int_attr(child, "minSdkVersion"));
                target_sdk = target_sdk.or(int_attr(child, "targetSdkVersion"));
            }
            "application" => {
                for comp in &child.children {
                    let is_alias = comp.name == "activity-alias";
                    if comp.name != "activity" && !is_alias {
                        continue;
                    }
                    let Some(name) = comp.android_attr("name").and_then(TypedValue::as_str) else {
                        continue;
                    };
                    let name = qualify(&package_id, name);
                    if is_alias {
                        if let Some(target) = comp.android_attr("targetActivity").and_then(TypedValue::as_str) {
                            model.activity_aliases.insert(name.clone(), qualify(&package_id, target));
                        }
                    }
                    if has_launcher_filter(comp) {
                        model.launcher_activities.insert(name.clone());
                    }
                    model.all_activities.insert(name);
                }
            }
            _ => {}
        }
    }
    let min = min_sdk.filter(|v| *v >= 1).unwrap_or(1) as u32;
    model.min_sdk = min;
    model.target_sdk = target_sdk.map(|t| (t.max(1)) as u32).unwrap_or(min).max(min);
    Ok(model)
}
