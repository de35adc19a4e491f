//! Survivor selection: level sorting schemes, per-level indicators and the
//! `reduce` step that discards a fixed number of individuals.
//!
//! Every function works on a slice of objective vectors and returns indices
//! into it, so callers keep ownership of their individuals.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roc::{self, RocPoint};

/// Objective vector of a classifier: exact `(fpr, tpr)`.
pub type ObjectiveVector = RocPoint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("cannot discard {discard} individuals from a population of {len}")]
    DiscardExceedsPopulation { discard: usize, len: usize },
    #[error("front member {index} is dominated")]
    DominatedMember { index: usize },
    #[error("unknown selector `{0}`")]
    UnknownSelector(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    FirstDominates,
    SecondDominates,
    NonDominated,
    Equal,
}

/// Pareto dominance with fpr minimized and tpr maximized.
pub fn dominance(u: &ObjectiveVector, v: &ObjectiveVector) -> Dominance {
    let fpr = u.fpr.cmp(&v.fpr);
    // Reversed so that `Less` means "better" on both axes.
    let tpr = v.tpr.cmp(&u.tpr);
    match (fpr, tpr) {
        (Ordering::Equal, Ordering::Equal) => Dominance::Equal,
        (Ordering::Greater, Ordering::Greater)
        | (Ordering::Greater, Ordering::Equal)
        | (Ordering::Equal, Ordering::Greater) => Dominance::SecondDominates,
        (Ordering::Less, Ordering::Less)
        | (Ordering::Less, Ordering::Equal)
        | (Ordering::Equal, Ordering::Less) => Dominance::FirstDominates,
        _ => Dominance::NonDominated,
    }
}

/// Ordered levels (best first) plus the indices exiled as redundant copies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelPartition {
    pub levels: Vec<Vec<usize>>,
    pub redundant_archive: Vec<usize>,
}

impl LevelPartition {
    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum::<usize>() + self.redundant_archive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Level of every index; archived indices get `levels.len()`.
    pub fn rank_of(&self, population: usize) -> Vec<usize> {
        let mut rank = vec![self.levels.len(); population];
        for (l, level) in self.levels.iter().enumerate() {
            for &i in level {
                rank[i] = l;
            }
        }
        rank
    }
}

/// Groups indices by objective value. Groups are returned sorted by value;
/// within a group indices keep population order.
fn group_by_value(points: &[ObjectiveVector]) -> Vec<(ObjectiveVector, Vec<usize>)> {
    let mut slot: HashMap<ObjectiveVector, usize> = HashMap::new();
    let mut groups: Vec<(ObjectiveVector, Vec<usize>)> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let g = *slot.entry(*p).or_insert_with(|| {
            groups.push((*p, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(i);
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    groups
}

/// Peels distinct values (sorted, deduplicated) into hull levels. Returns the
/// positions into `values` for each level.
///
/// A level is the set of values that are vertices of the upper hull of the
/// remaining values plus the two anchors. Once nothing left lies above the
/// anchor diagonal, the anchored hull has no remaining vertex; the next level
/// is then the upper chain of the remaining values on their own.
fn peel_hull_levels(values: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..values.len()).collect();
    let mut levels = Vec::new();
    while !remaining.is_empty() {
        let mut with_anchors = Vec::with_capacity(remaining.len() + 2);
        with_anchors.push(RocPoint::ORIGIN);
        with_anchors.extend(remaining.iter().map(|&i| values[i]));
        with_anchors.push(RocPoint::TOP_RIGHT);
        with_anchors.dedup();
        let chain = roc::upper_chain(&with_anchors);
        let mut level: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| chain.binary_search(&values[i]).is_ok())
            .collect();
        if level.is_empty() {
            let rest: Vec<ObjectiveVector> = remaining.iter().map(|&i| values[i]).collect();
            let chain = roc::upper_chain(&rest);
            level = remaining
                .iter()
                .copied()
                .filter(|&i| chain.binary_search(&values[i]).is_ok())
                .collect();
        }
        remaining.retain(|i| level.binary_search(i).is_err());
        levels.push(level);
    }
    levels
}

/// Convex-hull sorting without redundancy: the first holder of each distinct
/// objective vector is sorted into hull levels, every later copy goes to the
/// redundant archive.
pub fn ch_sort_no_redundancy(points: &[ObjectiveVector]) -> LevelPartition {
    let groups = group_by_value(points);
    let values: Vec<ObjectiveVector> = groups.iter().map(|g| g.0).collect();
    let levels = peel_hull_levels(&values)
        .into_iter()
        .map(|lv| lv.into_iter().map(|g| groups[g].1[0]).collect())
        .collect();
    let mut redundant_archive: Vec<usize> =
        groups.iter().flat_map(|g| g.1[1..].iter().copied()).collect();
    redundant_archive.sort_unstable();
    LevelPartition {
        levels,
        redundant_archive,
    }
}

/// Plain convex-hull sorting: copies of a value share its level.
pub fn ch_sort(points: &[ObjectiveVector]) -> LevelPartition {
    let groups = group_by_value(points);
    let values: Vec<ObjectiveVector> = groups.iter().map(|g| g.0).collect();
    let levels = peel_hull_levels(&values)
        .into_iter()
        .map(|lv| lv.into_iter().flat_map(|g| groups[g].1.iter().copied()).collect())
        .collect();
    LevelPartition {
        levels,
        redundant_archive: Vec::new(),
    }
}

/// NSGA-II front peeling. Equal vectors share a front.
pub fn fast_nondominated_sort(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            match dominance(&points[i], &points[j]) {
                Dominance::FirstDominates => {
                    dominates[i].push(j);
                    dominated_by_count[j] += 1;
                }
                Dominance::SecondDominates => {
                    dominates[j].push(i);
                    dominated_by_count[i] += 1;
                }
                _ => {}
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// NSGA-II crowding distance, normalized per objective by the front's own
/// range. A zero range contributes nothing for that objective.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let objectives: [fn(&ObjectiveVector) -> f64; 2] = [|p| p.fpr_f64(), |p| p.tpr_f64()];
    for value in objectives {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| value(&front[a]).total_cmp(&value(&front[b])).then(a.cmp(&b)));
        let (lo, hi) = (value(&front[order[0]]), value(&front[order[n - 1]]));
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            let gap = value(&front[order[k + 1]]) - value(&front[order[k - 1]]);
            distance[order[k]] += gap / range;
        }
    }
    distance
}

/// Hypervolume reference point: the worst corner of ROC space.
pub const HV_REFERENCE: RocPoint = RocPoint {
    fpr: roc::Rate::ONE,
    tpr: roc::Rate::ZERO,
};

/// Exclusive hypervolume of each point with respect to `reference`, for an
/// arbitrary set: dominated points and repeated values contribute zero.
pub fn exclusive_hypervolume(points: &[ObjectiveVector], reference: &RocPoint) -> Vec<f64> {
    let n = points.len();
    let mut out = vec![0.0; n];
    let groups = group_by_value(points);
    // Nondominated distinct values, increasing in fpr and strictly in tpr.
    let mut staircase: Vec<(ObjectiveVector, Option<usize>)> = Vec::new();
    for (value, members) in &groups {
        if value.fpr > reference.fpr || value.tpr < reference.tpr {
            continue;
        }
        if let Some(last) = staircase.last() {
            if value.tpr <= last.0.tpr {
                continue;
            }
            if value.fpr == last.0.fpr {
                staircase.pop();
            }
        }
        let sole = (members.len() == 1).then(|| members[0]);
        staircase.push((*value, sole));
    }
    for k in 0..staircase.len() {
        let (p, sole) = staircase[k];
        let Some(i) = sole else { continue };
        let right = staircase
            .get(k + 1)
            .map_or(reference.fpr_f64(), |q| q.0.fpr_f64());
        let below = if k == 0 {
            reference.tpr_f64()
        } else {
            staircase[k - 1].0.tpr_f64()
        };
        out[i] = (right - p.fpr_f64()) * (p.tpr_f64() - below);
    }
    out
}

/// Exclusive hypervolume contribution of each member of a mutually
/// nondominated front.
pub fn hypervolume2d_contribution(
    front: &[ObjectiveVector],
    reference: &RocPoint,
) -> Result<Vec<f64>, SelectionError> {
    for i in 0..front.len() {
        for j in 0..front.len() {
            if dominance(&front[j], &front[i]) == Dominance::FirstDominates {
                return Err(SelectionError::DominatedMember { index: i });
            }
        }
    }
    Ok(exclusive_hypervolume(front, reference))
}

/// Tchebycheff scalarization in the minimization orientation
/// `(fpr, 1 - tpr)`. `ideal` is given in that orientation too.
pub fn moead_scalarize(v: &ObjectiveVector, weight: (f64, f64), ideal: (f64, f64)) -> f64 {
    let f1 = v.fpr_f64();
    let f2 = 1.0 - v.tpr_f64();
    (weight.0 * (f1 - ideal.0).abs()).max(weight.1 * (f2 - ideal.1).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sorting {
    ConvexHull,
    ConvexHullNoRedundancy,
    NonDominated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Indicator {
    Area,
    Crowding,
    Hypervolume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    MuPlusMu,
    MuPlusOne,
    Decomposition,
}

/// The compared algorithms, one per (sorting, selection, scheme) row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SelectorKind {
    /// CH-MOGP.
    ChNoRedundancyArea,
    /// CHCrowding.
    ChNoRedundancyCrowding,
    /// CHH-MOGP.
    ChAreaMu1,
    /// CH-EMOA.
    ChHvMu1,
    /// RCHH-EMOA.
    ChNoRedundancyAreaMu1,
    Nsga2,
    SmsEmoa,
    Moead,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 8] = [
        SelectorKind::ChNoRedundancyArea,
        SelectorKind::ChNoRedundancyAreaMu1,
        SelectorKind::ChHvMu1,
        SelectorKind::ChNoRedundancyCrowding,
        SelectorKind::ChAreaMu1,
        SelectorKind::Nsga2,
        SelectorKind::SmsEmoa,
        SelectorKind::Moead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectorKind::ChNoRedundancyArea => "CH-MOGP",
            SelectorKind::ChNoRedundancyAreaMu1 => "RCHH-EMOA",
            SelectorKind::ChHvMu1 => "CH-EMOA",
            SelectorKind::ChNoRedundancyCrowding => "CHCrowding",
            SelectorKind::ChAreaMu1 => "CHH-MOGP",
            SelectorKind::Nsga2 => "NSGA-II",
            SelectorKind::SmsEmoa => "SMS-EMOA",
            SelectorKind::Moead => "MOEA/D",
        }
    }

    /// Name usable as a path component.
    pub fn file_stem(self) -> String {
        self.name().replace('/', "-")
    }

    /// Sorting and per-level indicator, or `None` for decomposition.
    pub fn survival(self) -> Option<(Sorting, Indicator)> {
        use Indicator::*;
        use Sorting::*;
        match self {
            SelectorKind::ChNoRedundancyArea | SelectorKind::ChNoRedundancyAreaMu1 => {
                Some((ConvexHullNoRedundancy, Area))
            }
            SelectorKind::ChNoRedundancyCrowding => Some((ConvexHullNoRedundancy, Crowding)),
            SelectorKind::ChAreaMu1 => Some((ConvexHull, Area)),
            SelectorKind::ChHvMu1 => Some((ConvexHull, Hypervolume)),
            SelectorKind::Nsga2 => Some((NonDominated, Crowding)),
            SelectorKind::SmsEmoa => Some((NonDominated, Hypervolume)),
            SelectorKind::Moead => None,
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            SelectorKind::ChNoRedundancyArea
            | SelectorKind::ChNoRedundancyCrowding
            | SelectorKind::Nsga2 => Scheme::MuPlusMu,
            SelectorKind::ChAreaMu1
            | SelectorKind::ChHvMu1
            | SelectorKind::ChNoRedundancyAreaMu1
            | SelectorKind::SmsEmoa => Scheme::MuPlusOne,
            SelectorKind::Moead => Scheme::Decomposition,
        }
    }

    pub fn is_convex_hull_family(self) -> bool {
        matches!(
            self.survival(),
            Some((Sorting::ConvexHull | Sorting::ConvexHullNoRedundancy, _))
        )
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SelectorKind {
    type Err = SelectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let squash = |t: &str| -> String {
            t.chars()
                .filter(|c| c.is_ascii_alphanumeric())
                .collect::<String>()
                .to_ascii_lowercase()
        };
        let key = squash(s);
        // Display names ("NSGA-II") and variant names ("Nsga2") both match.
        SelectorKind::ALL
            .into_iter()
            .find(|k| squash(k.name()) == key || squash(&format!("{k:?}")) == key)
            .ok_or_else(|| SelectionError::UnknownSelector(s.to_string()))
    }
}

/// Sorts a population into levels with the given scheme.
pub fn partition(points: &[ObjectiveVector], sorting: Sorting) -> LevelPartition {
    match sorting {
        Sorting::ConvexHull => ch_sort(points),
        Sorting::ConvexHullNoRedundancy => ch_sort_no_redundancy(points),
        Sorting::NonDominated => LevelPartition {
            levels: fast_nondominated_sort(points),
            redundant_archive: Vec::new(),
        },
    }
}

/// Members of a level ordered by objective value, then by index.
fn chain_order(points: &[ObjectiveVector], level: &[usize]) -> Vec<usize> {
    let mut order = level.to_vec();
    order.sort_by(|&a, &b| points[a].cmp(&points[b]).then(a.cmp(&b)));
    order
}

/// Area contribution of each level member, computed on the level's chain
/// with the two anchors attached. Values are aligned with `level`.
pub fn level_area_contributions(points: &[ObjectiveVector], level: &[usize]) -> Vec<f64> {
    let order = chain_order(points, level);
    let mut chain = Vec::with_capacity(order.len() + 2);
    chain.push(RocPoint::ORIGIN);
    chain.extend(order.iter().map(|&i| points[i]));
    chain.push(RocPoint::TOP_RIGHT);
    let mut by_index: HashMap<usize, f64> = HashMap::with_capacity(order.len());
    let mut contrib = vec![f64::INFINITY; chain.len()];
    for k in 1..chain.len() - 1 {
        contrib[k] = roc::triangle_contribution(&chain[k - 1], &chain[k], &chain[k + 1]);
    }
    for (k, &i) in order.iter().enumerate() {
        by_index.insert(i, contrib[k + 1]);
    }
    level.iter().map(|i| by_index[i]).collect()
}

/// Per-level quality values used to rank members inside a level (larger is
/// better). Aligned with `level`.
pub fn level_scores(points: &[ObjectiveVector], level: &[usize], indicator: Indicator) -> Vec<f64> {
    let members: Vec<ObjectiveVector> = level.iter().map(|&i| points[i]).collect();
    match indicator {
        Indicator::Area => level_area_contributions(points, level),
        Indicator::Crowding => crowding_distance(&members),
        Indicator::Hypervolume => exclusive_hypervolume(&members, &HV_REFERENCE),
    }
}

/// Chooses `count` members of `level` to discard with the given indicator.
fn discard_within_level(
    points: &[ObjectiveVector],
    level: &[usize],
    count: usize,
    indicator: Indicator,
) -> Vec<usize> {
    match indicator {
        Indicator::Area => {
            let order = chain_order(points, level);
            let mut chain = Vec::with_capacity(order.len() + 2);
            chain.push(RocPoint::ORIGIN);
            chain.extend(order.iter().map(|&i| points[i]));
            chain.push(RocPoint::TOP_RIGHT);
            roc::removal_sequence(&chain)
                .into_iter()
                .take(count)
                .map(|(k, _)| order[k - 1])
                .collect()
        }
        Indicator::Crowding => {
            let members: Vec<ObjectiveVector> = level.iter().map(|&i| points[i]).collect();
            let distance = crowding_distance(&members);
            let mut order: Vec<usize> = (0..level.len()).collect();
            order.sort_by(|&a, &b| distance[a].total_cmp(&distance[b]).then(b.cmp(&a)));
            order.into_iter().take(count).map(|k| level[k]).collect()
        }
        Indicator::Hypervolume => {
            let mut alive: Vec<usize> = level.to_vec();
            let mut removed = Vec::with_capacity(count);
            for _ in 0..count {
                let members: Vec<ObjectiveVector> = alive.iter().map(|&i| points[i]).collect();
                let hv = exclusive_hypervolume(&members, &HV_REFERENCE);
                let worst = (0..alive.len())
                    .min_by(|&a, &b| hv[a].total_cmp(&hv[b]).then(b.cmp(&a)))
                    .expect("level has members left");
                removed.push(alive.remove(worst));
            }
            removed
        }
    }
}

/// Discards `discard` individuals and returns the survivors' indices in
/// population order.
///
/// Redundant copies go first (chosen uniformly at random when there are
/// enough of them), then whole levels from the worst upwards, and finally the
/// lowest-scoring members of the first level that does not fit entirely.
pub fn select_survivors<R: Rng + ?Sized>(
    points: &[ObjectiveVector],
    discard: usize,
    sorting: Sorting,
    indicator: Indicator,
    rng: &mut R,
) -> Result<Vec<usize>, SelectionError> {
    let n = points.len();
    if discard > n {
        return Err(SelectionError::DiscardExceedsPopulation { discard, len: n });
    }
    let mut removed = vec![false; n];
    if discard > 0 {
        let part = partition(points, sorting);
        let archive = &part.redundant_archive;
        if archive.len() >= discard {
            for k in sample(rng, archive.len(), discard) {
                removed[archive[k]] = true;
            }
        } else {
            for &i in archive {
                removed[i] = true;
            }
            let mut deficit = discard - archive.len();
            for level in part.levels.iter().rev() {
                if deficit == 0 {
                    break;
                }
                if level.len() <= deficit {
                    for &i in level {
                        removed[i] = true;
                    }
                    deficit -= level.len();
                } else {
                    for i in discard_within_level(points, level, deficit, indicator) {
                        removed[i] = true;
                    }
                    deficit = 0;
                }
            }
        }
    }
    Ok((0..n).filter(|&i| !removed[i]).collect())
}

/// Convex-hull reduce: discard `discard` individuals using hull sorting
/// without redundancy and area contributions.
pub fn reduce<R: Rng + ?Sized>(
    points: &[ObjectiveVector],
    discard: usize,
    rng: &mut R,
) -> Result<Vec<usize>, SelectionError> {
    select_survivors(
        points,
        discard,
        Sorting::ConvexHullNoRedundancy,
        Indicator::Area,
        rng,
    )
}
