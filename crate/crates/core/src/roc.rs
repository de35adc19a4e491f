//! ROC-space arithmetic: confusion counts, exact rational ROC points, the
//! upper-left convex hull anchored at the trivial classifiers, the area under
//! it, and per-point area contributions.
//!
//! Coordinates are `x = fpr` (minimized) and `y = tpr` (maximized). Points
//! built from integer counts keep their exact rational value; every geometric
//! predicate (ordering, collinearity, turn direction) is decided exactly.
//! Floating point is only used for area values.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RocError {
    #[error("degenerate split: {positives} positives and {negatives} negatives")]
    DegenerateSplit { positives: u64, negatives: u64 },
    #[error("invalid rate {num}/{den}: must satisfy 0 <= num <= den and den > 0")]
    InvalidRate { num: u64, den: u64 },
    #[error("chain is not sorted by fpr at position {index}")]
    UnsortedChain { index: usize },
}

/// Outcome counts of one hard classifier on one labelled split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    pub fn total(&self) -> u64 {
        self.positives() + self.negatives()
    }
}

/// A rate `num / den` in `[0, 1]`, always stored in lowest terms so that
/// structural equality is value equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rate {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rate {
    pub const ZERO: Rate = Rate { num: 0, den: 1 };
    pub const ONE: Rate = Rate { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self, RocError> {
        if den == 0 || num > den {
            return Err(RocError::InvalidRate { num, den });
        }
        let g = gcd(num, den);
        Ok(Rate {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for Rate {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Rate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A classifier's position in ROC space.
///
/// Ordering is lexicographic on `(fpr, tpr)`, which is the sweep order used by
/// the hull construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RocPoint {
    pub fpr: Rate,
    pub tpr: Rate,
}

impl RocPoint {
    /// The all-negative classifier.
    pub const ORIGIN: RocPoint = RocPoint {
        fpr: Rate::ZERO,
        tpr: Rate::ZERO,
    };
    /// The all-positive classifier.
    pub const TOP_RIGHT: RocPoint = RocPoint {
        fpr: Rate::ONE,
        tpr: Rate::ONE,
    };

    /// Builds `(fp / negatives, tp / positives)`.
    pub fn new(fp: u64, negatives: u64, tp: u64, positives: u64) -> Result<Self, RocError> {
        Ok(RocPoint {
            fpr: Rate::new(fp, negatives)?,
            tpr: Rate::new(tp, positives)?,
        })
    }

    pub fn from_rates(fpr: Rate, tpr: Rate) -> Self {
        RocPoint { fpr, tpr }
    }

    pub fn fpr_f64(&self) -> f64 {
        self.fpr.to_f64()
    }

    pub fn tpr_f64(&self) -> f64 {
        self.tpr.to_f64()
    }

    pub fn is_anchor(&self) -> bool {
        *self == Self::ORIGIN || *self == Self::TOP_RIGHT
    }
}

impl fmt::Display for RocPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.fpr_f64(), self.tpr_f64())
    }
}

/// Converts confusion counts to an exact ROC point.
pub fn counts_to_point(c: &ConfusionCounts) -> Result<RocPoint, RocError> {
    let (positives, negatives) = (c.positives(), c.negatives());
    if positives == 0 || negatives == 0 {
        return Err(RocError::DegenerateSplit {
            positives,
            negatives,
        });
    }
    RocPoint::new(c.fp, negatives, c.tp, positives)
}

fn lcm3(a: u64, b: u64, c: u64) -> Option<u128> {
    let l = |x: u128, y: u128| -> Option<u128> { (x / gcd128(x, y)).checked_mul(y) };
    l(l(a as u128, b as u128)?, c as u128)
}

/// Twice the signed area of the triangle `o, a, b`, as the exact integer
/// cross product `(a - o) x (b - o)` over the common denominator `dx * dy`.
fn exact_cross(o: &RocPoint, a: &RocPoint, b: &RocPoint) -> Option<(i128, u128, u128)> {
    let dx = lcm3(o.fpr.den, a.fpr.den, b.fpr.den)?;
    let dy = lcm3(o.tpr.den, a.tpr.den, b.tpr.den)?;
    let scale = |r: Rate, d: u128| -> Option<i128> {
        i128::try_from((d / r.den as u128).checked_mul(r.num as u128)?).ok()
    };
    let (ox, ax, bx) = (scale(o.fpr, dx)?, scale(a.fpr, dx)?, scale(b.fpr, dx)?);
    let (oy, ay, by) = (scale(o.tpr, dy)?, scale(a.tpr, dy)?, scale(b.tpr, dy)?);
    let lhs = (ax - ox).checked_mul(by - oy)?;
    let rhs = (ay - oy).checked_mul(bx - ox)?;
    Some((lhs.checked_sub(rhs)?, dx, dy))
}

fn float_cross(o: &RocPoint, a: &RocPoint, b: &RocPoint) -> f64 {
    (a.fpr_f64() - o.fpr_f64()) * (b.tpr_f64() - o.tpr_f64())
        - (a.tpr_f64() - o.tpr_f64()) * (b.fpr_f64() - o.fpr_f64())
}

/// Sign of the turn `o -> a -> b`: `Greater` is counter-clockwise, `Less` is
/// clockwise, `Equal` is collinear.
pub fn orientation(o: &RocPoint, a: &RocPoint, b: &RocPoint) -> Ordering {
    match exact_cross(o, a, b) {
        Some((c, _, _)) => c.cmp(&0),
        // Denominators too large for i128; only reachable with splits of
        // billions of instances.
        None => float_cross(o, a, b).partial_cmp(&0.0).unwrap_or(Ordering::Equal),
    }
}

/// Area of the triangle spanned by `l`, `x`, `u`: the AUCH lost when `x` is
/// removed from a hull on which `l` and `u` are its neighbours.
pub fn triangle_contribution(l: &RocPoint, x: &RocPoint, u: &RocPoint) -> f64 {
    match exact_cross(l, x, u) {
        Some((c, dx, dy)) => c.unsigned_abs() as f64 / (dx as f64 * dy as f64) / 2.0,
        None => float_cross(l, x, u).abs() / 2.0,
    }
}

/// Upper-left convex chain from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RocHull {
    points: Vec<RocPoint>,
}

impl RocHull {
    /// All chain vertices, anchors included.
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    /// Chain vertices strictly between the two anchors.
    pub fn interior(&self) -> &[RocPoint] {
        &self.points[1..self.points.len() - 1]
    }

    /// Whether `p` is a vertex of the chain (anchors count).
    pub fn contains_vertex(&self, p: &RocPoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Monotone-chain upper hull of `points` together with the two trivial
/// classifiers. Collinear points are not vertices, and everything below the
/// chain (the lower-right part of the full hull) is dropped.
pub fn upper_hull(points: &[RocPoint]) -> RocHull {
    let mut all = Vec::with_capacity(points.len() + 2);
    all.push(RocPoint::ORIGIN);
    all.extend_from_slice(points);
    all.push(RocPoint::TOP_RIGHT);
    all.sort_unstable();
    all.dedup();
    RocHull {
        points: upper_chain(&all),
    }
}

/// Upper chain of points already sorted by `(fpr, tpr)` and deduplicated.
pub(crate) fn upper_chain(sorted: &[RocPoint]) -> Vec<RocPoint> {
    let mut chain: Vec<RocPoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        while chain.len() >= 2
            && orientation(&chain[chain.len() - 2], &chain[chain.len() - 1], p) != Ordering::Less
        {
            chain.pop();
        }
        chain.push(*p);
    }
    chain
}

/// Trapezoidal area under the hull over `fpr in [0, 1]`.
pub fn auch(hull: &RocHull) -> f64 {
    chain_area(hull.points())
}

pub(crate) fn chain_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].fpr_f64() - w[0].fpr_f64()) * (w[0].tpr_f64() + w[1].tpr_f64()))
        .sum()
}

/// AUCH of the hull over a set of points; shorthand for `auch(&upper_hull(points))`.
pub fn auch_of(points: &[RocPoint]) -> f64 {
    auch(&upper_hull(points))
}

fn check_sorted(points: &[RocPoint]) -> Result<(), RocError> {
    match points.windows(2).position(|w| w[1].fpr < w[0].fpr) {
        Some(i) => Err(RocError::UnsortedChain { index: i + 1 }),
        None => Ok(()),
    }
}

/// Sequential removal of the least-contributing interior point, as
/// `(index, contribution at removal)` pairs in removal order. Endpoints are
/// never removed. Ties go to the lowest index.
pub(crate) fn removal_sequence(points: &[RocPoint]) -> Vec<(usize, f64)> {
    let m = points.len();
    if m < 3 {
        return Vec::new();
    }
    let mut contrib = vec![f64::INFINITY; m];
    for i in 1..m - 1 {
        contrib[i] = triangle_contribution(&points[i - 1], &points[i], &points[i + 1]);
    }
    let mut prev: Vec<usize> = (0..m).map(|i| i.wrapping_sub(1)).collect();
    let mut next: Vec<usize> = (1..=m).collect();
    let mut alive = vec![true; m];
    let mut order = Vec::with_capacity(m - 2);
    for _ in 0..m - 2 {
        let mut r = usize::MAX;
        for i in 1..m - 1 {
            if alive[i] && (r == usize::MAX || contrib[i] < contrib[r]) {
                r = i;
            }
        }
        order.push((r, contrib[r]));
        alive[r] = false;
        let (l, u) = (prev[r], next[r]);
        next[l] = u;
        prev[u] = l;
        if l != 0 {
            contrib[l] = triangle_contribution(&points[prev[l]], &points[l], &points[u]);
        }
        if u != m - 1 {
            contrib[u] = triangle_contribution(&points[l], &points[u], &points[next[u]]);
        }
    }
    order
}

/// Area contribution of every point of a chain sorted by fpr.
///
/// With fewer than three points all contributions are infinite. Otherwise the
/// two endpoints are infinite and interior points are removed one at a time,
/// least contribution first, with the two neighbours updated after every
/// removal; each point reports its contribution at the moment it was removed.
pub fn delta_area(points: &[RocPoint]) -> Result<Vec<f64>, RocError> {
    check_sorted(points)?;
    let mut out = vec![f64::INFINITY; points.len()];
    for (i, c) in removal_sequence(points) {
        out[i] = c;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(fp: u64, neg: u64, tp: u64, pos: u64) -> RocPoint {
        RocPoint::new(fp, neg, tp, pos).unwrap()
    }

    fn tenths(x: u64, y: u64) -> RocPoint {
        p(x, 10, y, 10)
    }

    #[test]
    fn counts_to_point_examples() {
        let perfect = ConfusionCounts { tp: 5, fp: 0, tn: 10, fn_: 0 };
        assert_eq!(counts_to_point(&perfect).unwrap(), p(0, 1, 1, 1));
        let none = ConfusionCounts { tp: 0, fp: 0, tn: 10, fn_: 5 };
        assert_eq!(counts_to_point(&none).unwrap(), RocPoint::ORIGIN);
        let mixed = ConfusionCounts { tp: 3, fp: 2, tn: 8, fn_: 1 };
        let pt = counts_to_point(&mixed).unwrap();
        assert_eq!(pt, p(1, 5, 3, 4));
        assert_eq!(pt.fpr_f64(), 0.2);
        assert_eq!(pt.tpr_f64(), 0.75);
    }

    #[test]
    fn counts_to_point_rejects_degenerate_splits() {
        let no_neg = ConfusionCounts { tp: 3, fp: 0, tn: 0, fn_: 1 };
        assert!(matches!(
            counts_to_point(&no_neg),
            Err(RocError::DegenerateSplit { positives: 4, negatives: 0 })
        ));
        let no_pos = ConfusionCounts { tp: 0, fp: 1, tn: 1, fn_: 0 };
        assert!(counts_to_point(&no_pos).is_err());
    }

    #[test]
    fn rates_are_reduced() {
        assert_eq!(Rate::new(2, 10).unwrap(), Rate::new(1, 5).unwrap());
        assert_eq!(Rate::new(0, 7).unwrap(), Rate::ZERO);
        assert!(Rate::new(3, 2).is_err());
        assert!(Rate::new(0, 0).is_err());
    }

    #[test]
    fn hull_examples() {
        let h = upper_hull(&[tenths(2, 8), tenths(5, 5)]);
        assert_eq!(h.points(), &[RocPoint::ORIGIN, tenths(2, 8), RocPoint::TOP_RIGHT]);
        let h = upper_hull(&[]);
        assert_eq!(h.points(), &[RocPoint::ORIGIN, RocPoint::TOP_RIGHT]);
        let h = upper_hull(&[tenths(3, 3)]);
        assert_eq!(h.points(), &[RocPoint::ORIGIN, RocPoint::TOP_RIGHT]);
    }

    #[test]
    fn hull_keeps_vertical_and_horizontal_edges() {
        let h = upper_hull(&[tenths(0, 6), tenths(0, 3), tenths(5, 10), tenths(10, 4)]);
        assert_eq!(
            h.points(),
            &[RocPoint::ORIGIN, tenths(0, 6), tenths(5, 10), RocPoint::TOP_RIGHT]
        );
    }

    #[test]
    fn hull_drops_collinear_points() {
        let h = upper_hull(&[tenths(1, 5), tenths(2, 6), tenths(3, 7)]);
        assert_eq!(
            h.points(),
            &[RocPoint::ORIGIN, tenths(1, 5), tenths(3, 7), RocPoint::TOP_RIGHT]
        );
    }

    #[test]
    fn auch_examples() {
        assert_eq!(auch(&upper_hull(&[])), 0.5);
        assert_eq!(auch(&upper_hull(&[tenths(0, 10)])), 1.0);
        assert!((auch(&upper_hull(&[tenths(2, 8)])) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn triangle_examples() {
        let (o, t) = (RocPoint::ORIGIN, RocPoint::TOP_RIGHT);
        assert!((triangle_contribution(&o, &tenths(2, 8), &t) - 0.3).abs() < 1e-15);
        assert_eq!(triangle_contribution(&o, &tenths(5, 5), &t), 0.0);
        assert_eq!(triangle_contribution(&o, &tenths(0, 10), &t), 0.5);
    }

    #[test]
    fn delta_area_short_chains_are_infinite() {
        let d = delta_area(&[RocPoint::ORIGIN, RocPoint::TOP_RIGHT]).unwrap();
        assert_eq!(d, vec![f64::INFINITY, f64::INFINITY]);
        let d = delta_area(&[RocPoint::ORIGIN]).unwrap();
        assert_eq!(d, vec![f64::INFINITY]);
    }

    #[test]
    fn delta_area_single_interior() {
        let d = delta_area(&[RocPoint::ORIGIN, tenths(2, 8), RocPoint::TOP_RIGHT]).unwrap();
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn delta_area_rejects_unsorted_input() {
        let err = delta_area(&[RocPoint::ORIGIN, tenths(5, 9), tenths(2, 8)]).unwrap_err();
        assert_eq!(err, RocError::UnsortedChain { index: 2 });
    }

    #[test]
    fn delta_area_ties_remove_lowest_index_first() {
        let pts = [RocPoint::ORIGIN, tenths(2, 6), tenths(4, 8), RocPoint::TOP_RIGHT];
        let a = triangle_contribution(&pts[0], &pts[1], &pts[2]);
        let b = triangle_contribution(&pts[1], &pts[2], &pts[3]);
        assert_eq!(a, b);
        assert_eq!(removal_sequence(&pts)[0].0, 1);
    }
}
