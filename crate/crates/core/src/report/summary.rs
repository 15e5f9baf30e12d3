use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::triage::{Category, TriagedRule};
use crate::{Error, Result};

/// Which rules a summary row counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleSet {
    Single,
    Conjunctive,
}

impl RuleSet {
    fn tag(self) -> &'static str {
        match self {
            RuleSet::Single => "s",
            RuleSet::Conjunctive => "c",
        }
    }
}

/// Per-instance averages of rule counts for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub rule_set: RuleSet,
    pub cal_size: usize,
    pub seed: u64,
    pub instances: usize,
    pub total: f64,
    /// Mean count per category, in [`Category::ALL`] order.
    pub counts: [f64; 6],
    /// Mean number of ensured rules.
    pub ensured: f64,
    /// Ensured rules over all rules, pooled across instances.
    pub ensured_proportion: f64,
}

impl SummaryRow {
    /// Aggregates triaged rule lists, one per test instance. Single-rule
    /// rows ignore conjunctions; conjunctive rows count every rule.
    pub fn from_instances(per_instance: &[Vec<TriagedRule>], rule_set: RuleSet, cal_size: usize, seed: u64) -> Self {
        let mut counts = [0usize; 6];
        let mut ensured = 0usize;
        let mut total = 0usize;
        for rules in per_instance {
            for r in rules {
                if rule_set == RuleSet::Single && r.rule.is_conjunctive {
                    continue;
                }
                let slot = Category::ALL.iter().position(|&c| c == r.category).expect("category listed");
                counts[slot] += 1;
                total += 1;
                ensured += usize::from(r.ensured);
            }
        }
        let n = per_instance.len().max(1) as f64;
        let mut means = [0.0; 6];
        for (m, &c) in means.iter_mut().zip(&counts) {
            *m = c as f64 / n;
        }
        Self {
            label: format!("{cal_size} ({})", rule_set.tag()),
            rule_set,
            cal_size,
            seed,
            instances: per_instance.len(),
            total: total as f64 / n,
            counts: means,
            ensured: ensured as f64 / n,
            ensured_proportion: if total == 0 { 0.0 } else { ensured as f64 / total as f64 },
        }
    }

    pub fn count(&self, category: Category) -> f64 {
        let slot = Category::ALL.iter().position(|&c| c == category).expect("category listed");
        self.counts[slot]
    }

    /// Mean number of potential rules (all three kinds).
    pub fn potential(&self) -> f64 {
        Category::ALL
            .iter()
            .filter(|c| c.is_potential())
            .map(|&c| self.count(c))
            .sum()
    }

    /// Whether the category means add up to the total.
    pub fn partition_holds(&self) -> bool {
        (self.counts.iter().sum::<f64>() - self.total).abs() <= 1e-9 * self.total.max(1.0)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRecord {
    run: String,
    cal_size: usize,
    seed: u64,
    instances: usize,
    #[serde(rename = "Total")]
    total: f64,
    #[serde(rename = "CoFa")]
    cofa: f64,
    #[serde(rename = "CoPo")]
    copo: f64,
    #[serde(rename = "SeFa")]
    sefa: f64,
    #[serde(rename = "SePo")]
    sepo: f64,
    #[serde(rename = "SuFa")]
    sufa: f64,
    #[serde(rename = "SuPo")]
    supo: f64,
    #[serde(rename = "Ens")]
    ens: f64,
    #[serde(rename = "Ens_prop")]
    ens_prop: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| Error::Io(e.into()))?;
        for r in &self.rows {
            let c = r.counts;
            w.serialize(CsvRecord {
                run: r.label.clone(),
                cal_size: r.cal_size,
                seed: r.seed,
                instances: r.instances,
                total: r.total,
                cofa: c[0],
                copo: c[1],
                sefa: c[2],
                sepo: c[3],
                sufa: c[4],
                supo: c[5],
                ens: r.ensured,
                ens_prop: r.ensured_proportion,
            })
            .map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Checks the partition identity of every row in a written table.
    pub fn check_csv(path: impl AsRef<Path>) -> Result<bool> {
        let mut r = csv::Reader::from_path(path.as_ref()).map_err(|e| Error::Io(e.into()))?;
        for rec in r.deserialize::<CsvRecord>() {
            let rec = rec.map_err(|e| Error::Io(e.into()))?;
            let sum = rec.cofa + rec.copo + rec.sefa + rec.sepo + rec.sufa + rec.supo;
            if (sum - rec.total).abs() > 1e-9 * rec.total.max(1.0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn partition_holds(&self) -> bool {
        self.rows.iter().all(SummaryRow::partition_holds)
    }
}
