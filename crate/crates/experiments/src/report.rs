//! Tables derived from result rows: final-budget summaries, pairwise
//! win/draw/loss comparisons and convergence curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chmogp_core::selection::SelectorKind;

use crate::results::ResultRow;
use crate::stats::{self, Outcome};

/// Group key: dataset, selector name, checkpoint ratio bits.
type CellKey = (String, String, u64);

fn ratio_key(r: f64) -> u64 {
    // Positive finite ratios order the same as their bit patterns.
    r.to_bits()
}

/// Orders selector names by the standard table order, unknown names last.
fn selector_order(name: &str) -> (usize, String) {
    let pos = SelectorKind::ALL
        .iter()
        .position(|k| k.name() == name)
        .unwrap_or(usize::MAX);
    (pos, name.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub dataset: String,
    pub selector: String,
    pub ratio: f64,
    pub n: usize,
    pub mean_evaluations: f64,
    pub mean_train: f64,
    pub mean_test: f64,
    pub std_test: Option<f64>,
    pub test_values: Vec<f64>,
}

/// Statistics per (dataset, selector, ratio), sorted by dataset name, the
/// standard selector order and ratio. Independent of row order.
pub fn cell_stats(rows: &[ResultRow]) -> Vec<CellStats> {
    let mut groups: BTreeMap<CellKey, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.dataset.clone(), r.selector.clone(), ratio_key(r.ratio)))
            .or_default()
            .push(r);
    }
    let mut out: Vec<CellStats> = groups
        .into_iter()
        .map(|((dataset, selector, bits), members)| {
            let mut test: Vec<f64> = members.iter().map(|r| r.test_auch).collect();
            test.sort_by(f64::total_cmp);
            let train: Vec<f64> = members.iter().map(|r| r.train_auch).collect();
            let evals: Vec<f64> = members.iter().map(|r| r.evaluations as f64).collect();
            CellStats {
                dataset,
                selector,
                ratio: f64::from_bits(bits),
                n: members.len(),
                mean_evaluations: stats::mean(&evals).unwrap_or(0.0),
                mean_train: stats::mean(&train).unwrap_or(0.0),
                mean_test: stats::mean(&test).unwrap_or(0.0),
                std_test: stats::sample_std(&test),
                test_values: test,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.dataset
            .cmp(&b.dataset)
            .then_with(|| selector_order(&a.selector).cmp(&selector_order(&b.selector)))
            .then(a.ratio.total_cmp(&b.ratio))
    });
    out
}

/// Final-checkpoint statistics of every (dataset, selector) cell.
pub fn summarize(rows: &[ResultRow]) -> Vec<CellStats> {
    let all = cell_stats(rows);
    let mut out: Vec<CellStats> = Vec::new();
    for c in all {
        match out.last_mut() {
            Some(last) if last.dataset == c.dataset && last.selector == c.selector => *last = c,
            _ => out.push(c),
        }
    }
    out
}

/// Dataset-by-selector table of `mean ± std` test AUCH × 100 at the final
/// checkpoint, as CSV. Missing cells read `absent`.
pub fn summary_table(rows: &[ResultRow]) -> String {
    let cells = summarize(rows);
    let mut selectors: Vec<String> = cells.iter().map(|c| c.selector.clone()).collect();
    selectors.sort_by_key(|s| selector_order(s));
    selectors.dedup();
    let mut datasets: Vec<String> = cells.iter().map(|c| c.dataset.clone()).collect();
    datasets.dedup();
    let mut out = String::from("dataset");
    for s in &selectors {
        write!(out, ",{s}").unwrap();
    }
    out.push('\n');
    for d in &datasets {
        out.push_str(d);
        for s in &selectors {
            let text = cells
                .iter()
                .find(|c| &c.dataset == d && &c.selector == s)
                .map_or_else(|| "absent".to_string(), |c| stats::format_percent(&c.test_values));
            write!(out, ",{text}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub dataset: String,
    pub ratio: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub p_value: f64,
    pub outcome: Outcome,
}

/// Rank-sum comparison of selectors `a` and `b` on every dataset and ratio
/// where both have results.
pub fn compare(rows: &[ResultRow], a: &str, b: &str, alpha: f64) -> Vec<Comparison> {
    let cells = cell_stats(rows);
    let mut out = Vec::new();
    for ca in cells.iter().filter(|c| c.selector == a) {
        let Some(cb) = cells.iter().find(|c| {
            c.selector == b && c.dataset == ca.dataset && ratio_key(c.ratio) == ratio_key(ca.ratio)
        }) else {
            continue;
        };
        let test = stats::wilcoxon_rank_sum(&ca.test_values, &cb.test_values, alpha);
        out.push(Comparison {
            dataset: ca.dataset.clone(),
            ratio: ca.ratio,
            mean_a: ca.mean_test,
            mean_b: cb.mean_test,
            p_value: test.p_value,
            outcome: test.outcome,
        });
    }
    out.sort_by(|x, y| x.ratio.total_cmp(&y.ratio).then_with(|| x.dataset.cmp(&y.dataset)));
    out
}

/// `(wins, draws, losses)` of the first selector per ratio.
pub fn tally(comparisons: &[Comparison]) -> Vec<(f64, usize, usize, usize)> {
    let mut by_ratio: BTreeMap<u64, (usize, usize, usize)> = BTreeMap::new();
    for c in comparisons {
        let e = by_ratio.entry(ratio_key(c.ratio)).or_default();
        match c.outcome {
            Outcome::AWins => e.0 += 1,
            Outcome::Draw => e.1 += 1,
            Outcome::BWins => e.2 += 1,
        }
    }
    by_ratio
        .into_iter()
        .map(|(k, (w, d, l))| (f64::from_bits(k), w, d, l))
        .collect()
}

pub fn comparison_table(comparisons: &[Comparison]) -> String {
    let mut out = String::from("dataset,ratio,mean_a,mean_b,p_value,outcome\n");
    for c in comparisons {
        let outcome = match c.outcome {
            Outcome::AWins => "win",
            Outcome::Draw => "draw",
            Outcome::BWins => "loss",
        };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.dataset, c.ratio, c.mean_a, c.mean_b, c.p_value, outcome
        )
        .unwrap();
    }
    out
}

/// Curve rows of one (dataset, selector) cell, one per checkpoint ratio.
pub fn curve_table(cells: &[&CellStats]) -> String {
    let mut out =
        String::from("ratio,n,mean_evaluations,mean_train_auch,mean_test_auch,std_test_auch\n");
    for c in cells {
        let std = c.std_test.map_or_else(String::new, |s| s.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.ratio, c.n, c.mean_evaluations, c.mean_train, c.mean_test, std
        )
        .unwrap();
    }
    out
}

/// Writes `curves/<dataset>/<selector>.csv` under `dir` for every cell and
/// returns the written paths.
pub fn emit_convergence(rows: &[ResultRow], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let cells = cell_stats(rows);
    let mut groups: BTreeMap<(String, String), Vec<&CellStats>> = BTreeMap::new();
    for c in &cells {
        groups
            .entry((c.dataset.clone(), c.selector.clone()))
            .or_default()
            .push(c);
    }
    let mut written = Vec::new();
    for ((dataset, selector), members) in groups {
        let sub = dir.join("curves").join(&dataset);
        fs::create_dir_all(&sub)?;
        let path = sub.join(format!("{}.csv", selector.replace('/', "-")));
        fs::write(&path, curve_table(&members))?;
        written.push(path);
    }
    Ok(written)
}
