//! Per-dataset evaluation budgets from the two published budget tables.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetPreset {
    /// Budgets used for the selector comparisons at population 20.
    Table3,
    /// Budgets used for the population-100 runs against classical learners.
    Table8,
}

const TABLE3: &[(&str, u64)] = &[
    ("australian", 100_000),
    ("bands", 150_000),
    ("bcw", 50_000),
    ("crx", 50_000),
    ("german", 200_000),
    ("house-votes", 30_000),
    ("ionosphere", 80_000),
    ("kr-vs-kp", 200_000),
    ("mammographic", 60_000),
    ("monks-1", 200_000),
    ("monks-2", 1_000_000),
    ("monks-3", 40_000),
    ("parkinsons", 30_000),
    ("pima", 80_000),
    ("sonar", 30_000),
    ("spect", 40_000),
    ("tic-tac-toe", 300_000),
    ("transfusion", 22_000),
    ("wdbc", 30_000),
    ("adult", 10_000),
    ("magic04", 10_000),
    ("skin", 10_000),
];

const TABLE8: &[(&str, u64)] = &[
    ("australian", 100_000),
    ("bands", 1_500_000),
    ("bcw", 18_500),
    ("crx", 450_000),
    ("german", 120_000),
    ("house-votes", 24_000),
    ("ionosphere", 80_000),
    ("kr-vs-kp", 2_000_000),
    ("mammographic", 80_000),
    ("monks-1", 230_000),
    ("monks-2", 10_000_000),
    ("monks-3", 190_000),
    ("parkinsons", 42_000),
    ("pima", 180_000),
    ("sonar", 12_000),
    ("spect", 10_000),
    ("tic-tac-toe", 3_000_000),
    ("transfusion", 35_000),
    ("wdbc", 21_000),
    ("adult", 300_000),
    ("magic04", 40_000),
    ("skin", 30_000),
];

impl BudgetPreset {
    pub fn table(self) -> &'static [(&'static str, u64)] {
        match self {
            BudgetPreset::Table3 => TABLE3,
            BudgetPreset::Table8 => TABLE8,
        }
    }

    /// Budget for a dataset, matched case-insensitively by name.
    pub fn budget(self, dataset: &str) -> Option<u64> {
        self.table()
            .iter()
            .find(|(name, _)| name.eq_ignore_ascii_case(dataset))
            .map(|&(_, b)| b)
    }
}
