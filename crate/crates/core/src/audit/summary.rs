//! Per-country violation counts over a corpus, split by registry status.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::verdict::AuditVerdict;
use crate::policy::Jurisdiction;
use crate::registry::{RegistryStatus, RegistryTable};

/// `violating / total`, rendered `v/n (p%)` with one decimal, half rounded
/// up; `0%` when nothing violates and `N/A` for an empty slice.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub violating: usize,
    pub total: usize,
}

impl Cell {
    /// Percentage in tenths, rounded half up.
    pub fn tenths(&self) -> Option<u64> {
        if self.total == 0 {
            return None;
        }
        let (v, n) = (self.violating as u64, self.total as u64);
        Some((2000 * v + n) / (2 * n))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} ", self.violating, self.total)?;
        match self.tenths() {
            None => f.write_str("(N/A)"),
            Some(_) if self.violating == 0 => f.write_str("(0%)"),
            Some(t) => write!(f, "({}.{}%)", t / 10, t % 10),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Columns {
    pub country: Cell,
    pub platform: Cell,
    pub harmonized: Cell,
}

impl Columns {
    fn add(&mut self, v: &AuditVerdict) {
        for (cell, hit) in [
            (&mut self.country, v.violates_country),
            (&mut self.platform, v.violates_platform),
            (&mut self.harmonized, v.violates_harmonized),
        ] {
            cell.total += 1;
            cell.violating += hit as usize;
        }
    }

    fn merge(&mut self, other: &Columns) {
        for (a, b) in [
            (&mut self.country, &other.country),
            (&mut self.platform, &other.platform),
            (&mut self.harmonized, &other.harmonized),
        ] {
            a.total += b.total;
            a.violating += b.violating;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub registry_approved: usize,
    pub registry_delisted: usize,
    pub approved: Columns,
    pub delisted: Columns,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountrySummary {
    pub rows: Vec<SummaryRow>,
    pub total: SummaryRow,
}

impl CountrySummary {
    pub fn row(&self, country: Jurisdiction) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.label == country.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SummaryError {
    #[error("verdict for ({jurisdiction}, {package_id}) has no registry row")]
    UnmatchedVerdict { package_id: String, jurisdiction: Jurisdiction },
}

/// Folds verdicts into per-country rows. Registry columns count registry
/// rows; cell denominators count completed audits.
pub fn aggregate_country(verdicts: &[AuditVerdict], registry: &RegistryTable) -> Result<CountrySummary, SummaryError> {
    let mut cells: BTreeMap<Jurisdiction, (Columns, Columns)> = BTreeMap::new();
    for c in registry.countries() {
        cells.entry(c).or_default();
    }
    for v in verdicts {
        let row = registry.find(v.jurisdiction, &v.package_id).ok_or_else(|| SummaryError::UnmatchedVerdict {
            package_id: v.package_id.clone(),
            jurisdiction: v.jurisdiction,
        })?;
        let slot = cells.entry(v.jurisdiction).or_default();
        match row.status {
            RegistryStatus::Approved => slot.0.add(v),
            RegistryStatus::Delisted => slot.1.add(v),
        }
    }
    let mut total = SummaryRow {
        label: "Total".to_string(),
        registry_approved: 0,
        registry_delisted: 0,
        approved: Columns::default(),
        delisted: Columns::default(),
    };
    let rows = cells
        .into_iter()
        .map(|(country, (approved, delisted))| {
            let row = SummaryRow {
                label: country.name().to_string(),
                registry_approved: registry.count(country, RegistryStatus::Approved),
                registry_delisted: registry.count(country, RegistryStatus::Delisted),
                approved,
                delisted,
            };
            total.registry_approved += row.registry_approved;
            total.registry_delisted += row.registry_delisted;
            total.approved.merge(&row.approved);
            total.delisted.merge(&row.delisted);
            row
        })
        .collect();
    Ok(CountrySummary { rows, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{Asymmetry, Evidence};
    use crate::registry::RegistryRow;
    use alloc::format;
    use proptest::prelude::*;

    fn cell(v: usize, n: usize) -> String {
        Cell { violating: v, total: n }.to_string()
    }

    #[test]
    fn table_cells() {
        assert_eq!(cell(9, 11), "9/11 (81.8%)");
        assert_eq!(cell(9, 28), "9/28 (32.1%)");
        assert_eq!(cell(0, 52), "0/52 (0%)");
        assert_eq!(cell(0, 0), "0/0 (N/A)");
        assert_eq!(cell(26, 52), "26/52 (50.0%)");
        assert_eq!(cell(92, 189), "92/189 (48.7%)");
        assert_eq!(cell(145, 189), "145/189 (76.7%)");
        assert_eq!(cell(251, 339), "251/339 (74.0%)");
        assert_eq!(cell(1, 1), "1/1 (100.0%)");
        // 1/8 = 12.5% exactly, 1/16 = 6.25% rounds up to 6.3
        assert_eq!(cell(1, 16), "1/16 (6.3%)");
    }

    fn verdict(pkg: &str, j: Jurisdiction, hit: bool) -> AuditVerdict {
        AuditVerdict {
            package_id: pkg.into(),
            jurisdiction: j,
            violates_country: hit,
            violates_platform: hit,
            violates_harmonized: hit,
            asymmetry: Asymmetry::classify(hit, hit),
            evidence: Evidence::default(),
        }
    }

    fn reg(rows: &[(Jurisdiction, RegistryStatus, &str)]) -> RegistryTable {
        RegistryTable::new(
            rows.iter()
                .map(|(c, s, p)| RegistryRow {
                    country: *c,
                    status: *s,
                    package_id: (*p).into(),
                    app_name: "x".into(),
                    registry_source: "x".into(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn unmatched_verdict() {
        let r = reg(&[(Jurisdiction::Kenya, RegistryStatus::Approved, "a")]);
        assert!(matches!(
            aggregate_country(&[verdict("b", Jurisdiction::Kenya, true)], &r),
            Err(SummaryError::UnmatchedVerdict { .. })
        ));
    }

    proptest! {
        #[test]
        fn conservation(flags in prop::collection::vec((any::<bool>(), any::<bool>(), 0usize..3), 0..40)) {
            let countries = [Jurisdiction::Kenya, Jurisdiction::Nigeria, Jurisdiction::Pakistan];
            let rows: Vec<_> = flags.iter().enumerate()
                .map(|(i, (_, approved, c))| (countries[*c], if *approved { RegistryStatus::Approved } else { RegistryStatus::Delisted }, format!("p{i}")))
                .collect();
            let registry = reg(&rows.iter().map(|(c, s, p)| (*c, *s, p.as_str())).collect::<Vec<_>>());
            let verdicts: Vec<_> = flags.iter().zip(&rows).map(|((hit, _, _), (c, _, p))| verdict(p, *c, *hit)).collect();
            let s = aggregate_country(&verdicts, &registry).unwrap();
            for row in &s.rows {
                prop_assert_eq!(row.approved.country.total, row.registry_approved);
                prop_assert_eq!(row.delisted.harmonized.total, row.registry_delisted);
                prop_assert!(row.approved.country.violating <= row.approved.country.total);
            }
            prop_assert_eq!(s.total.approved.country.total + s.total.delisted.country.total, verdicts.len());
        }
    }
}
