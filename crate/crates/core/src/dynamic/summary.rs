use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::detect::ExfiltrationFinding;
use crate::mapping::DataCategory;

/// Findings for one app that ran under instrumentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppFindings {
    pub package_id: String,
    pub findings: Vec<ExfiltrationFinding>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicSummary {
    pub apps_total: usize,
    pub apps_with_pre_registration: usize,
    /// Apps with at least one pre-registration finding of each category.
    pub pre_registration_by_category: BTreeMap<DataCategory, usize>,
    pub apps_with_launch_time: usize,
    /// Categories each app sent from a launcher activity; apps without
    /// such findings are omitted.
    pub launch_time_categories: BTreeMap<String, BTreeSet<DataCategory>>,
}

pub fn summarize_dynamic(apps: &[AppFindings]) -> DynamicSummary {
    let mut s = DynamicSummary {
        apps_total: apps.len(),
        pre_registration_by_category: DataCategory::ALL.iter().map(|c| (*c, 0)).collect(),
        ..DynamicSummary::default()
    };
    for app in apps {
        let pre: BTreeSet<DataCategory> = app.findings.iter().filter(|f| f.pre_registration).map(|f| f.category).collect();
        if !pre.is_empty() {
            s.apps_with_pre_registration += 1;
        }
        for c in pre {
            *s.pre_registration_by_category.entry(c).or_default() += 1;
        }
        let launch: BTreeSet<DataCategory> = app.findings.iter().filter(|f| f.launch_time).map(|f| f.category).collect();
        if !launch.is_empty() {
            s.apps_with_launch_time += 1;
            s.launch_time_categories.entry(app.package_id.clone()).or_default().extend(launch);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn finding(category: DataCategory, pre: bool, launch: bool) -> ExfiltrationFinding {
        ExfiltrationFinding {
            category,
            pre_registration: pre,
            launch_time: launch,
            source_event_id: "s".into(),
            sink_event_id: "k".into(),
            endpoint: "h".into(),
        }
    }

    #[test]
    fn empty_corpus() {
        let s = summarize_dynamic(&[]);
        assert_eq!(s.apps_total, 0);
        assert_eq!(s.apps_with_pre_registration, 0);
        assert!(s.pre_registration_by_category.values().all(|&n| n == 0));
    }

    #[test]
    fn counts_apps_not_findings() {
        let apps = vec![
            AppFindings {
                package_id: "a".into(),
                findings: vec![
                    finding(DataCategory::Location, true, true),
                    finding(DataCategory::Location, true, false),
                    finding(DataCategory::Contacts, true, true),
                ],
            },
            AppFindings { package_id: "b".into(), findings: vec![finding(DataCategory::Sms, false, false)] },
            AppFindings { package_id: "c".into(), findings: vec![] },
        ];
        let s = summarize_dynamic(&apps);
        assert_eq!(s.apps_total, 3);
        assert_eq!(s.apps_with_pre_registration, 1);
        assert_eq!(s.pre_registration_by_category[&DataCategory::Location], 1);
        assert_eq!(s.pre_registration_by_category[&DataCategory::Sms], 0);
        assert_eq!(s.apps_with_launch_time, 1);
        assert_eq!(s.launch_time_categories["a"].len(), 2);
    }
}
