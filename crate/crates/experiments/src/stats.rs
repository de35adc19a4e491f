//! Summary statistics and the two-sample Wilcoxon rank-sum test.

use std::f64::consts::SQRT_2;

/// Largest group size (both groups) for which the exact null distribution
/// is enumerated; larger samples use the normal approximation.
pub const EXACT_LIMIT: usize = 20;

/// Mean of `xs`, summed in sorted order so the result does not depend on
/// input order. `None` when empty.
pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v.iter().sum::<f64>() / v.len() as f64)
}

/// Sample standard deviation (n − 1 denominator). `None` below two values.
pub fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let mut sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    sq.sort_by(f64::total_cmp);
    Some((sq.iter().sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

/// `mean ± std` of the values scaled by 100, or `absent` with fewer than
/// two values.
pub fn format_percent(xs: &[f64]) -> String {
    match (mean(xs), sample_std(xs)) {
        (Some(m), Some(s)) => format!("{:.2} ± {:.2}", m * 100.0, s * 100.0),
        _ => "absent".to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    AWins,
    BWins,
    Draw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSum {
    /// Mann–Whitney U of the first sample (pairs where `a` beats `b`, ties
    /// counting one half).
    pub u_a: f64,
    pub p_value: f64,
    pub exact: bool,
    pub outcome: Outcome,
}

/// Midranks (1-based) of the pooled sample.
fn midranks(pooled: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut k = 0;
    while k < order.len() {
        let mut end = k + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[k]] {
            end += 1;
        }
        let r = (k + 1 + end) as f64 / 2.0;
        for &i in &order[k..end] {
            ranks[i] = r;
        }
        k = end;
    }
    ranks
}

fn tie_sizes(pooled: &[f64]) -> Vec<usize> {
    let mut v = pooled.to_vec();
    v.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut k = 0;
    while k < v.len() {
        let mut end = k + 1;
        while end < v.len() && v[end] == v[k] {
            end += 1;
        }
        sizes.push(end - k);
        k = end;
    }
    sizes
}

/// Two-sided p-value from the exact permutation distribution of the first
/// sample's rank sum, ties handled by midranks.
fn exact_p(doubled: &[usize], na: usize, observed: usize) -> f64 {
    let total: usize = doubled.iter().sum();
    // ways[k][s]: subsets of size k with doubled-rank sum s.
    let mut ways = vec![vec![0u64; total + 1]; na + 1];
    ways[0][0] = 1;
    for &r in doubled {
        for k in (1..=na).rev() {
            let (lo, hi) = ways.split_at_mut(k);
            for s in (r..=total).rev() {
                hi[0][s] += lo[k - 1][s - r];
            }
        }
    }
    let dist = &ways[na];
    let all: u64 = dist.iter().sum();
    let lower: u64 = dist[..=observed].iter().sum();
    let upper: u64 = dist[observed..].iter().sum();
    (2.0 * lower.min(upper) as f64 / all as f64).min(1.0)
}

/// Two-sided normal approximation with tie and continuity corrections.
fn normal_p(u_a: f64, na: usize, nb: usize, ties: &[usize]) -> f64 {
    let (n1, n2) = (na as f64, nb as f64);
    let n = n1 + n2;
    let mu = n1 * n2 / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let u = u_a.max(n1 * n2 - u_a);
    let z = (u - mu - 0.5) / var.sqrt();
    libm::erfc(z / SQRT_2).clamp(0.0, 1.0)
}

/// Rank-sum statistic and two-sided p-value. Exact when both samples have at
/// most [`EXACT_LIMIT`] members.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> (f64, f64, bool) {
    let (na, nb) = (a.len(), b.len());
    if na == 0 || nb == 0 {
        return (0.0, 1.0, true);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u_a = rank_sum_a - (na * (na + 1)) as f64 / 2.0;
    if na <= EXACT_LIMIT && nb <= EXACT_LIMIT {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let observed = (2.0 * rank_sum_a).round() as usize;
        (u_a, exact_p(&doubled, na, observed), true)
    } else {
        (u_a, normal_p(u_a, na, nb, &tie_sizes(&pooled)), false)
    }
}

/// A sample "wins" when the difference is significant at `alpha` and its
/// mean is higher.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64], alpha: f64) -> RankSum {
    let (u_a, p_value, exact) = rank_sum_test(a, b);
    let outcome = match (mean(a), mean(b)) {
        (Some(ma), Some(mb)) if p_value < alpha && ma > mb => Outcome::AWins,
        (Some(ma), Some(mb)) if p_value < alpha && mb > ma => Outcome::BWins,
        _ => Outcome::Draw,
    };
    RankSum {
        u_a,
        p_value,
        exact,
        outcome,
    }
}
