//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Datasets are read from `CHMOGP_DATA_DIR`, defaulting to the repository's
//! `data/` directory. A criterion that cannot run because a dataset file is
//! absent is reported as `FAIL (data unavailable)`; those lines do not make
//! the process exit non-zero, every other failure does.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chmogp_core::data::{load_dataset, stratified_kfold, SchemaSpec};
use chmogp_core::engine::{self, EngineConfig};
use chmogp_core::roc::{self, RocPoint};
use chmogp_core::selection::{
    self, ch_sort_no_redundancy, dominance, fast_nondominated_sort, Dominance, SelectorKind,
};
use chmogp_experiments::config::RunConfig;
use chmogp_experiments::report;
use chmogp_experiments::results::ResultRow;
use chmogp_experiments::runner;
use chmogp_experiments::stats::rank_sum_test;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Unavailable(String),
}

fn data_dir() -> PathBuf {
    std::env::var_os("CHMOGP_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

// ---------------------------------------------------------------------------
// Geometry oracles on integer grids.

fn random_grid_set(rng: &mut ChaCha8Rng, max_len: usize) -> (u64, Vec<(u64, u64)>) {
    let den = [5u64, 10, 16, 50, 97][rng.gen_range(0..5)];
    let n = rng.gen_range(0..=max_len);
    let pts = (0..n)
        .map(|_| (rng.gen_range(0..=den), rng.gen_range(0..=den)))
        .collect();
    (den, pts)
}

fn to_points(den: u64, raw: &[(u64, u64)]) -> Vec<RocPoint> {
    raw.iter()
        .map(|&(x, y)| RocPoint::new(x, den, y, den).unwrap())
        .collect()
}

fn cross(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> i64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

/// O(n^3) upper hull: anchors plus every point not on or below a segment
/// between two other points spanning its x coordinate.
fn brute_force_hull(den: u64, raw: &[(u64, u64)]) -> Vec<RocPoint> {
    let mut pts: Vec<(i64, i64)> = raw.iter().map(|&(x, y)| (x as i64, y as i64)).collect();
    let (lo, hi) = ((0, 0), (den as i64, den as i64));
    pts.extend([lo, hi]);
    pts.sort();
    pts.dedup();
    let keep: Vec<(u64, u64)> = pts
        .iter()
        .filter(|&&p| {
            p == lo
                || p == hi
                || !pts.iter().any(|&a| {
                    pts.iter().any(|&b| {
                        a != p && b != p && a.0 <= p.0 && p.0 <= b.0 && a.0 < b.0 && cross(a, b, p) <= 0
                    })
                })
        })
        .map(|&(x, y)| (x as u64, y as u64))
        .collect();
    to_points(den, &keep)
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let (den, raw) = random_grid_set(&mut rng, 12);
        if roc::upper_hull(&to_points(den, &raw)).points() != brute_force_hull(den, &raw) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatches == 0 && secs < 5.0,
        format!("1000 sets, {mismatches} mismatches, {secs:.2}s (limit 5s)"),
    )
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let (mut worst, mut sequence_mismatch, mut chains) = (0.0f64, 0, 0);
    while chains < 500 {
        let (den, raw) = random_grid_set(&mut rng, 30);
        let hull = roc::upper_hull(&to_points(den, &raw));
        if hull.interior().len() > 10 {
            continue;
        }
        chains += 1;
        let chain = hull.points();
        let full = roc::auch(&hull);
        for k in 1..chain.len() - 1 {
            let mut rest = hull.interior().to_vec();
            rest.remove(k - 1);
            let lost = full - roc::auch_of(&rest);
            let tri = roc::triangle_contribution(&chain[k - 1], &chain[k], &chain[k + 1]);
            worst = worst.max((lost - tri).abs());
        }
        // Sequential removal recomputed from scratch at every step.
        let mut expected = vec![f64::INFINITY; chain.len()];
        let mut alive: Vec<usize> = (0..chain.len()).collect();
        while alive.len() > 2 {
            let (k, c) = (1..alive.len() - 1)
                .map(|k| {
                    let c = roc::triangle_contribution(
                        &chain[alive[k - 1]],
                        &chain[alive[k]],
                        &chain[alive[k + 1]],
                    );
                    (k, c)
                })
                .fold((0, f64::INFINITY), |best, x| if x.1 < best.1 { x } else { best });
            expected[alive[k]] = c;
            alive.remove(k);
        }
        if roc::delta_area(chain).unwrap() != expected {
            sequence_mismatch += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-12 && sequence_mismatch == 0 && secs < 5.0,
        format!(
            "500 chains, max |loss - triangle| = {worst:.1e} (tol 1e-12), {sequence_mismatch} sequence mismatches, {secs:.2}s"
        ),
    )
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let mut problems = Vec::new();
    for case in 0..500 {
        let (den, raw) = random_grid_set(&mut rng, 30);
        let mut pts = to_points(den, &raw);
        if !pts.is_empty() {
            for _ in 0..rng.gen_range(0..=10) {
                pts.push(pts[rng.gen_range(0..pts.len())]);
            }
        }
        let part = ch_sort_no_redundancy(&pts);
        let mut seen: Vec<usize> = part
            .levels
            .iter()
            .flatten()
            .chain(&part.redundant_archive)
            .copied()
            .collect();
        seen.sort_unstable();
        if seen != (0..pts.len()).collect::<Vec<_>>() {
            problems.push(format!("case {case}: not a partition"));
        }
        let mut level_values: Vec<RocPoint> =
            part.levels.iter().flatten().map(|&i| pts[i]).collect();
        level_values.sort();
        let n_level = level_values.len();
        level_values.dedup();
        if n_level != level_values.len() {
            problems.push(format!("case {case}: duplicate inside levels"));
        }
        if part
            .redundant_archive
            .iter()
            .any(|&i| !pts[..i].contains(&pts[i]))
        {
            problems.push(format!("case {case}: archived point is not a copy"));
        }
        let hull = roc::upper_hull(&pts);
        if let Some(l0) = part.levels.first() {
            let interior_ok = l0
                .iter()
                .all(|&i| pts[i].is_anchor() || hull.contains_vertex(&pts[i]));
            let complete = hull
                .interior()
                .iter()
                .all(|v| l0.iter().any(|&i| pts[i] == *v));
            if !(hull.interior().is_empty() || (interior_ok && complete)) {
                problems.push(format!("case {case}: level 0 is not the hull"));
            }
        }
        // Pairwise-dominance oracle for the fronts.
        let fronts = fast_nondominated_sort(&pts);
        let mut rank = vec![usize::MAX; pts.len()];
        for (l, f) in fronts.iter().enumerate() {
            for &i in f {
                rank[i] = l;
            }
        }
        for i in 0..pts.len() {
            let expected = (0..pts.len())
                .filter(|&j| dominance(&pts[j], &pts[i]) == Dominance::FirstDominates)
                .map(|j| rank[j] + 1)
                .max()
                .unwrap_or(0);
            if rank[i] != expected {
                problems.push(format!("case {case}: front of point {i}"));
                break;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = problems.is_empty() && secs < 10.0;
    let first = problems.first().cloned().unwrap_or_default();
    verdict(
        ok,
        format!("500 populations, {} violations {first}, {secs:.2}s (limit 10s)", problems.len()),
    )
}

fn criterion_4() -> Verdict {
    let p = |x, y| RocPoint::new(x, 10, y, 10).unwrap();
    // The middle point is non-dominated but strictly below the outer segment.
    let pts = [p(1, 6), p(3, 7), p(5, 9)];
    let fronts = fast_nondominated_sort(&pts);
    let part = ch_sort_no_redundancy(&pts);
    let nd_ok = fronts == vec![vec![0, 1, 2]];
    let ch_ok = part.levels == vec![vec![0, 2], vec![1]];
    verdict(
        nd_ok && ch_ok,
        format!("non-dominated fronts {fronts:?}, hull levels {:?}", part.levels),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut archive_checks = 0;
    for _ in 0..500 {
        let (den, raw) = random_grid_set(&mut rng, 30);
        if raw.is_empty() {
            continue;
        }
        let mut pts = to_points(den, &raw);
        for _ in 0..rng.gen_range(0..=15) {
            pts.push(pts[rng.gen_range(0..pts.len())]);
        }
        let part = ch_sort_no_redundancy(&pts);
        let level0 = part.levels.first().cloned().unwrap_or_default();
        for n in 0..=pts.len() {
            let kept = selection::reduce(&pts, n, &mut rng).unwrap();
            if kept.len() != pts.len() - n {
                violations += 1;
            }
            if n <= pts.len() - level0.len() && level0.iter().any(|i| !kept.contains(i)) {
                violations += 1;
            }
            if n <= part.redundant_archive.len() {
                archive_checks += 1;
                if (0..pts.len()).any(|i| !kept.contains(&i) && !part.redundant_archive.contains(&i)) {
                    violations += 1;
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("{violations} violations; archive-first branch checked for every N up to the archive size ({archive_checks} cases)"),
    )
}

// ---------------------------------------------------------------------------
// Desk-scale runs shared by criteria 6 and 7.

const DESK_DATASETS: [&str; 3] = ["bcw", "monks-3", "transfusion"];
const DESK_SELECTORS: [&str; 3] = ["CH-MOGP", "MOEA/D", "NSGA-II"];

struct DeskRuns {
    rows: Vec<ResultRow>,
    /// Longest CH-MOGP job in seconds per dataset.
    ch_seconds: Vec<(String, f64)>,
    missing: Vec<String>,
}

fn desk_runs(out: &Path) -> DeskRuns {
    let dir = data_dir();
    let mut missing = Vec::new();
    let mut entries = String::new();
    for name in DESK_DATASETS {
        let data = dir.join(format!("{name}.data"));
        let schema = dir.join(format!("{name}.schema.toml"));
        if !data.exists() || !schema.exists() {
            missing.push(name.to_string());
            continue;
        }
        entries.push_str(&format!(
            "[[datasets]]\nname = \"{name}\"\npath = {:?}\nschema = {:?}\n\n",
            data, schema
        ));
    }
    let text = format!(
        "output_dir = {:?}\nbase_seed = 1\nfolds = 5\nrepeats = 4\nmax_evaluations = 10000\nselectors = {:?}\n\n{entries}",
        out, DESK_SELECTORS
    );
    let cfg = RunConfig::from_toml(&text, Path::new("desk.toml"))
        .unwrap()
        .resolve()
        .unwrap();
    let report = runner::run_experiment(&cfg, |_| {}).unwrap();
    assert!(report.failed.is_empty(), "desk jobs failed: {:?}", report.failed);
    let rows = runner::load_results(&cfg.output_dir).unwrap();
    let timings = fs::read_to_string(cfg.output_dir.join("timings.csv")).unwrap();
    let mut ch_seconds: Vec<(String, f64)> = Vec::new();
    for line in timings.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[1] != "CH-MOGP" {
            continue;
        }
        let s: f64 = f[4].parse().unwrap();
        match ch_seconds.iter_mut().find(|(d, _)| d == f[0]) {
            Some(e) => e.1 = e.1.max(s),
            None => ch_seconds.push((f[0].to_string(), s)),
        }
    }
    DeskRuns {
        rows,
        ch_seconds,
        missing,
    }
}

fn final_mean(rows: &[ResultRow], dataset: &str, selector: &str) -> Option<(f64, usize)> {
    report::summarize(rows)
        .into_iter()
        .find(|c| c.dataset == dataset && c.selector == selector)
        .map(|c| (c.mean_test, c.n))
}

fn criterion_6(desk: &DeskRuns) -> Verdict {
    let targets = [("bcw", 0.95), ("monks-3", 0.97)];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, threshold) in targets {
        if desk.missing.iter().any(|m| m == name) {
            return Verdict::Unavailable(format!("{name}.data not found in {}", data_dir().display()));
        }
        let (mean, n) = final_mean(&desk.rows, name, "CH-MOGP").unwrap();
        let secs = desk
            .ch_seconds
            .iter()
            .find(|(d, _)| d == name)
            .map_or(f64::INFINITY, |e| e.1);
        ok &= mean >= threshold && n == 20 && secs < 60.0;
        parts.push(format!(
            "{name} mean test AUCH {mean:.4} over {n} runs (need >= {threshold}), slowest run {secs:.2}s"
        ));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_7(desk: &DeskRuns) -> Verdict {
    let mut parts = Vec::new();
    let mut beats_moead = 0;
    let mut close_to_nsga = true;
    for name in DESK_DATASETS {
        if desk.missing.iter().any(|m| m == name) {
            parts.push(format!("{name}: no data"));
            continue;
        }
        let ch = final_mean(&desk.rows, name, "CH-MOGP").unwrap().0;
        let moead = final_mean(&desk.rows, name, "MOEA/D").unwrap().0;
        let nsga = final_mean(&desk.rows, name, "NSGA-II").unwrap().0;
        if ch > moead {
            beats_moead += 1;
        }
        close_to_nsga &= (ch - nsga).abs() <= 0.02;
        parts.push(format!(
            "{name}: CH-MOGP {ch:.4} vs MOEA/D {moead:.4}, NSGA-II {nsga:.4}"
        ));
    }
    let detail = format!(
        "CH-MOGP beats MOEA/D on {beats_moead} of 3 (need >= 2); |CH-MOGP - NSGA-II| <= 0.02 on all evaluated: {close_to_nsga}; {}",
        parts.join("; ")
    );
    if !desk.missing.is_empty() {
        return Verdict::Unavailable(format!(
            "{} missing from {}; partial results: {detail}",
            desk.missing.join(", "),
            data_dir().display()
        ));
    }
    verdict(beats_moead >= 2 && close_to_nsga, detail)
}

// ---------------------------------------------------------------------------

fn permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let u_of = |mask: u32| {
        let mut u = 0.0;
        for (i, x) in pooled.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0) {
            for (_, y) in pooled.iter().enumerate().filter(|(j, _)| mask & (1 << j) == 0) {
                if x > y {
                    u += 1.0;
                } else if x == y {
                    u += 0.5;
                }
            }
            let _ = i;
        }
        u
    };
    let observed = u_of((1u32 << a.len()) - 1);
    let (mut lo, mut hi, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << pooled.len()) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let u = u_of(mask);
        total += 1;
        lo += u64::from(u <= observed);
        hi += u64::from(u >= observed);
    }
    (2.0 * lo.min(hi) as f64 / total as f64).min(1.0)
}

/// Values 1..=n split so that the first sample's U equals `u`.
fn samples_with_u(na: usize, nb: usize, u: usize) -> (Vec<f64>, Vec<f64>) {
    let n = na + nb;
    let mut ranks: Vec<usize> = (1..=na).collect();
    let mut need = u;
    for i in (0..na).rev() {
        let max = n - (na - 1 - i);
        let step = need.min(max - ranks[i]);
        ranks[i] += step;
        need -= step;
    }
    assert_eq!(need, 0);
    let a: Vec<f64> = ranks.iter().map(|&r| r as f64).collect();
    let b: Vec<f64> = (1..=n).filter(|r| !ranks.contains(r)).map(|r| r as f64).collect();
    (a, b)
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for na in 2..=8 {
        for nb in 2..=8 {
            for _ in 0..3 {
                let a: Vec<f64> = (0..na).map(|_| rng.gen_range(0..6) as f64).collect();
                let b: Vec<f64> = (0..nb).map(|_| rng.gen_range(0..6) as f64).collect();
                let (_, p, _) = rank_sum_test(&a, &b);
                worst = worst.max((p - permutation_p(&a, &b)).abs());
            }
        }
    }
    // Published two-sided 0.05 critical values: U <= 23 for 10 vs 10 and
    // U <= 127 for 20 vs 20.
    let mut critical = Vec::new();
    let mut critical_ok = true;
    for (n, crit) in [(10usize, 23usize), (20, 127)] {
        let (a, b) = samples_with_u(n, n, crit);
        let (u_at, p_at, _) = rank_sum_test(&a, &b);
        let (a, b) = samples_with_u(n, n, crit + 1);
        let (_, p_above, _) = rank_sum_test(&a, &b);
        critical_ok &= u_at == crit as f64 && p_at <= 0.05 && p_above > 0.05;
        critical.push(format!("n={n}: p(U={crit})={p_at:.4}, p(U={})={p_above:.4}", crit + 1));
    }
    verdict(
        worst < 1e-12 && critical_ok,
        format!(
            "all size pairs 2..8: max |p - enumeration| = {worst:.1e}; {}",
            critical.join(", ")
        ),
    )
}

fn criterion_9(scratch: &Path) -> Verdict {
    let dir = data_dir();
    let Some(name) = ["bcw", "monks-3"]
        .into_iter()
        .find(|n| dir.join(format!("{n}.data")).exists())
    else {
        return Verdict::Unavailable("no dataset available".into());
    };
    let mut files = Vec::new();
    for run in ["first", "second"] {
        let out = scratch.join(run);
        let text = format!(
            "output_dir = {:?}\nbase_seed = 99\nfolds = 5\nrepeats = 1\nmax_evaluations = 400\nselectors = {:?}\n\n[[datasets]]\nname = \"{name}\"\npath = {:?}\nschema = {:?}\n",
            out,
            SelectorKind::ALL.map(|k| k.name()),
            dir.join(format!("{name}.data")),
            dir.join(format!("{name}.schema.toml")),
        );
        let cfg = RunConfig::from_toml(&text, Path::new("det.toml"))
            .unwrap()
            .resolve()
            .unwrap();
        runner::run_experiment(&cfg, |_| {}).unwrap();
        files.push(fs::read(out.join("results.csv")).unwrap());
    }
    verdict(
        files[0] == files[1] && !files[0].is_empty(),
        format!(
            "{name}, 8 selectors x 5 folds: results.csv {} bytes, identical: {}",
            files[0].len(),
            files[0] == files[1]
        ),
    )
}

fn criterion_10() -> Verdict {
    let dir = data_dir();
    let name = "bcw";
    let (Ok(spec), true) = (
        SchemaSpec::load(&dir.join(format!("{name}.schema.toml"))),
        dir.join(format!("{name}.data")).exists(),
    ) else {
        return Verdict::Unavailable(format!("{name} not found"));
    };
    let ds = load_dataset(&dir.join(format!("{name}.data")), &spec).unwrap();
    let plan = stratified_kfold(ds.labels(), 5, 1, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
    let fold = plan.fold(0, 0);
    let (train, test) = (ds.subset(&fold.train), ds.subset(&fold.test));
    let mut worst = 0u64;
    let mut ok = true;
    for kind in SelectorKind::ALL {
        for budget in [20u64, 333, 1009, 2000] {
            let c = EngineConfig::new(kind, budget, budget ^ 0x5eed);
            let out = engine::run(&c, &ds.schema.attributes, &train, &test).unwrap();
            let used = out.state.evaluations_used;
            let gap = budget.saturating_sub(used);
            worst = worst.max(gap);
            ok &= used <= budget && gap < c.population_size as u64;
        }
    }
    verdict(
        ok,
        format!("8 selectors x 4 budgets, largest gap max_evaluations - used = {worst} (need < 20)"),
    )
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temporary directory");
    let desk_started = Instant::now();
    let desk = desk_runs(&scratch.path().join("desk"));
    let desk_secs = desk_started.elapsed().as_secs_f64();

    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("hull oracle equivalence", Box::new(criterion_1)),
        ("delta-area consistency", Box::new(criterion_2)),
        ("sorting properties", Box::new(criterion_3)),
        ("discriminating case: hull sorting demotes a non-dominated concave point", Box::new(criterion_4)),
        ("reduce contract", Box::new(criterion_5)),
        ("desk-scale reproduction", Box::new(|| criterion_6(&desk))),
        ("desk-scale relative ordering", Box::new(|| criterion_7(&desk))),
        ("rank-sum test correctness", Box::new(criterion_8)),
        ("determinism", Box::new(|| criterion_9(&scratch.path().join("det")))),
        ("budget fairness", Box::new(criterion_10)),
    ];
    let (mut passed, mut failed, mut unavailable) = (0, 0, 0);
    println!();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Verdict::Pass(d) => {
                passed += 1;
                println!("criterion {:>2} PASS  {name}: {d}", i + 1);
            }
            Verdict::Fail(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1);
            }
            Verdict::Unavailable(d) => {
                unavailable += 1;
                println!("criterion {:>2} FAIL (data unavailable)  {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {passed} passed, {} failed ({unavailable} for missing data); desk runs took {desk_secs:.1}s",
        failed + unavailable
    );
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
