//! Genetic decision trees: if-then-else trees over attribute comparisons with
//! `{0, 1}` leaves, plus their random construction and variation operators.
//!
//! Trees print as s-expressions, e.g. `(if (< x3 0.25) 1 (if (= x7 2) 0 1))`,
//! and parse back from the same form.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Attribute, AttributeKind, Split};
use crate::roc::{self, ConfusionCounts, RocPoint};

/// Maximum depth of any tree during evolution. A lone leaf has depth 1.
pub const MAX_DEPTH: usize = 17;
/// Maximum depth of freshly generated trees.
pub const INITIAL_MAX_DEPTH: usize = 3;

/// Attempts made by crossover and mutation before falling back to the parent.
const REPAIR_ATTEMPTS: usize = 5;
/// Probability that a new condition joins two comparisons with and/or.
const COMPOUND_RATE: f64 = 0.2;
/// Probability that a new condition is negated.
const NEGATION_RATE: f64 = 0.2;
/// Probability that a grow-method node below the depth limit is a leaf.
const GROW_LEAF_RATE: f64 = 0.5;
/// Largest shift step as a fraction of the attribute's observed range.
const SHIFT_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GdtError {
    #[error("attribute x{attr} out of range for {width} features")]
    AttributeOutOfRange { attr: usize, width: usize },
    #[error("degenerate split: {positives} positives and {negatives} negatives")]
    DegenerateSplit { positives: usize, negatives: usize },
    #[error("parse error at token {position}: {message}")]
    Parse { position: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Gt,
    Eq,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub attr: usize,
    pub op: CmpOp,
    pub value: f64,
}

impl Comparison {
    #[inline]
    fn holds(&self, row: &[f64]) -> bool {
        let x = row[self.attr];
        match self.op {
            CmpOp::Lt => x < self.value,
            CmpOp::Gt => x > self.value,
            CmpOp::Eq => x == self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Condition {
    Compare(Comparison),
    Not(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
}

impl Condition {
    pub fn compare(attr: usize, op: CmpOp, value: f64) -> Self {
        Condition::Compare(Comparison { attr, op, value })
    }

    #[inline]
    fn holds(&self, row: &[f64]) -> bool {
        match self {
            Condition::Compare(c) => c.holds(row),
            Condition::Not(c) => !c.holds(row),
            Condition::And(a, b) => a.holds(row) && b.holds(row),
            Condition::Or(a, b) => a.holds(row) || b.holds(row),
        }
    }

    fn max_attr(&self) -> usize {
        match self {
            Condition::Compare(c) => c.attr,
            Condition::Not(c) => c.max_attr(),
            Condition::And(a, b) | Condition::Or(a, b) => a.max_attr().max(b.max_attr()),
        }
    }

    fn comparisons_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Comparison>) {
        match self {
            Condition::Compare(c) => out.push(c),
            Condition::Not(c) => c.comparisons_mut(out),
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.comparisons_mut(out);
                b.comparisons_mut(out);
            }
        }
    }
}

/// A decision tree node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(u8),
    Branch {
        condition: Condition,
        then: Box<Node>,
        otherwise: Box<Node>,
    },
}

impl Node {
    pub fn branch(condition: Condition, then: Node, otherwise: Node) -> Self {
        Node::Branch {
            condition,
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Branch { then, otherwise, .. } => 1 + then.depth().max(otherwise.depth()),
        }
    }

    /// Number of nodes (branches and leaves).
    pub fn size(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Branch { then, otherwise, .. } => 1 + then.size() + otherwise.size(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Branch { then, otherwise, .. } => then.leaf_count() + otherwise.leaf_count(),
        }
    }

    /// Largest attribute index referenced, if any.
    pub fn max_attr(&self) -> Option<usize> {
        match self {
            Node::Leaf(_) => None,
            Node::Branch {
                condition,
                then,
                otherwise,
            } => Some(
                condition
                    .max_attr()
                    .max(then.max_attr().unwrap_or(0))
                    .max(otherwise.max_attr().unwrap_or(0)),
            ),
        }
    }

    /// Subtree at preorder position `idx` (root is 0).
    pub fn nth(&self, idx: usize) -> &Node {
        match self {
            _ if idx == 0 => self,
            Node::Branch { then, otherwise, .. } => {
                let left = then.size();
                if idx <= left {
                    then.nth(idx - 1)
                } else {
                    otherwise.nth(idx - 1 - left)
                }
            }
            Node::Leaf(_) => panic!("preorder index out of range"),
        }
    }

    fn nth_mut(&mut self, idx: usize) -> &mut Node {
        if idx == 0 {
            return self;
        }
        match self {
            Node::Branch { then, otherwise, .. } => {
                let left = then.size();
                if idx <= left {
                    then.nth_mut(idx - 1)
                } else {
                    otherwise.nth_mut(idx - 1 - left)
                }
            }
            Node::Leaf(_) => panic!("preorder index out of range"),
        }
    }

    /// Copy of `self` with the subtree at `idx` replaced.
    pub fn with_subtree(&self, idx: usize, subtree: Node) -> Node {
        let mut out = self.clone();
        *out.nth_mut(idx) = subtree;
        out
    }

    fn comparisons_mut<'a>(&'a mut self, out: &mut Vec<&'a mut Comparison>) {
        if let Node::Branch {
            condition,
            then,
            otherwise,
        } = self
        {
            condition.comparisons_mut(out);
            then.comparisons_mut(out);
            otherwise.comparisons_mut(out);
        }
    }

    /// Mutable leaf `k` in preorder, with its depth (root is depth 1).
    fn leaf_mut(&mut self, k: &mut usize, depth: usize) -> Option<(&mut Node, usize)> {
        match self {
            Node::Leaf(_) => {
                if *k == 0 {
                    Some((self, depth))
                } else {
                    *k -= 1;
                    None
                }
            }
            Node::Branch { then, otherwise, .. } => match then.leaf_mut(k, depth + 1) {
                Some(found) => Some(found),
                None => otherwise.leaf_mut(k, depth + 1),
            },
        }
    }

    /// Class for `row` without bounds validation; callers check `max_attr`.
    #[inline]
    pub fn predict(&self, row: &[f64]) -> u8 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf(c) => return *c,
                Node::Branch {
                    condition,
                    then,
                    otherwise,
                } => {
                    node = if condition.holds(row) { then } else { otherwise };
                }
            }
        }
    }

    fn check_width(&self, width: usize) -> Result<(), GdtError> {
        match self.max_attr() {
            Some(attr) if attr >= width => Err(GdtError::AttributeOutOfRange { attr, width }),
            _ => Ok(()),
        }
    }
}

/// Classifies one instance.
pub fn classify(tree: &Node, instance: &[f64]) -> Result<u8, GdtError> {
    tree.check_width(instance.len())?;
    Ok(tree.predict(instance))
}

/// Tallies the tree's predictions against the split's labels.
pub fn evaluate(tree: &Node, split: &Split) -> Result<ConfusionCounts, GdtError> {
    if split.positives() == 0 || split.negatives() == 0 {
        return Err(GdtError::DegenerateSplit {
            positives: split.positives(),
            negatives: split.negatives(),
        });
    }
    tree.check_width(split.width())?;
    let mut c = ConfusionCounts::default();
    for (row, label) in split.rows() {
        match (tree.predict(row), label) {
            (1, 1) => c.tp += 1,
            (1, _) => c.fp += 1,
            (_, 1) => c.fn_ += 1,
            _ => c.tn += 1,
        }
    }
    Ok(c)
}

/// Evaluates and converts straight to a ROC point.
pub fn evaluate_point(tree: &Node, split: &Split) -> Result<(ConfusionCounts, RocPoint), GdtError> {
    let counts = evaluate(tree, split)?;
    let point = roc::counts_to_point(&counts).expect("split checked non-degenerate");
    Ok((counts, point))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    Full,
    Grow,
}

fn random_comparison<R: Rng + ?Sized>(attrs: &[Attribute], rng: &mut R) -> Comparison {
    let attr = rng.gen_range(0..attrs.len());
    match &attrs[attr].kind {
        AttributeKind::Categorical { codes } => Comparison {
            attr,
            op: CmpOp::Eq,
            value: codes[rng.gen_range(0..codes.len())],
        },
        AttributeKind::Numeric { min, max } => {
            let op = if rng.gen_bool(0.5) { CmpOp::Lt } else { CmpOp::Gt };
            let value = if max > min { rng.gen_range(*min..=*max) } else { *min };
            Comparison { attr, op, value }
        }
    }
}

/// A random branch condition: one comparison, sometimes joined with a second
/// by and/or, sometimes negated.
pub fn random_condition<R: Rng + ?Sized>(attrs: &[Attribute], rng: &mut R) -> Condition {
    let mut cond = Condition::Compare(random_comparison(attrs, rng));
    if rng.gen_bool(COMPOUND_RATE) {
        let other = Box::new(Condition::Compare(random_comparison(attrs, rng)));
        cond = if rng.gen_bool(0.5) {
            Condition::And(Box::new(cond), other)
        } else {
            Condition::Or(Box::new(cond), other)
        };
    }
    if rng.gen_bool(NEGATION_RATE) {
        cond = Condition::Not(Box::new(cond));
    }
    cond
}

fn random_leaf<R: Rng + ?Sized>(rng: &mut R) -> Node {
    Node::Leaf(rng.gen_range(0..=1))
}

/// A tree of exactly (full) or at most (grow) the given depth.
pub fn build_tree<R: Rng + ?Sized>(
    attrs: &[Attribute],
    depth: usize,
    method: InitMethod,
    rng: &mut R,
) -> Node {
    if depth <= 1 || attrs.is_empty() {
        return random_leaf(rng);
    }
    if method == InitMethod::Grow && rng.gen_bool(GROW_LEAF_RATE) {
        return random_leaf(rng);
    }
    let condition = random_condition(attrs, rng);
    let then = build_tree(attrs, depth - 1, method, rng);
    let otherwise = build_tree(attrs, depth - 1, method, rng);
    Node::branch(condition, then, otherwise)
}

/// One ramped half-and-half sample: depth uniform in
/// `[depth_min, depth_max]`, full or grow with equal probability.
pub fn random_tree<R: Rng + ?Sized>(
    attrs: &[Attribute],
    depth_min: usize,
    depth_max: usize,
    rng: &mut R,
) -> Node {
    let depth = rng.gen_range(depth_min.max(1)..=depth_max.max(depth_min).max(1));
    let method = if rng.gen_bool(0.5) {
        InitMethod::Full
    } else {
        InitMethod::Grow
    };
    build_tree(attrs, depth, method, rng)
}

/// `n` trees cycling through the depths `depth_min..=depth_max`, alternating
/// full and grow construction.
pub fn ramped_half_and_half<R: Rng + ?Sized>(
    attrs: &[Attribute],
    n: usize,
    depth_min: usize,
    depth_max: usize,
    rng: &mut R,
) -> Vec<Node> {
    let lo = depth_min.max(1);
    let depths = depth_max.max(lo) - lo + 1;
    (0..n)
        .map(|i| {
            let method = if i % 2 == 0 {
                InitMethod::Full
            } else {
                InitMethod::Grow
            };
            build_tree(attrs, lo + (i / 2) % depths, method, rng)
        })
        .collect()
}

/// Swaps uniformly chosen subtrees. If an offspring would exceed
/// [`MAX_DEPTH`], new points are drawn; after a few failures the parents are
/// returned unchanged.
pub fn crossover<R: Rng + ?Sized>(a: &Node, b: &Node, rng: &mut R) -> (Node, Node) {
    for _ in 0..REPAIR_ATTEMPTS {
        let i = rng.gen_range(0..a.size());
        let j = rng.gen_range(0..b.size());
        let first = a.with_subtree(i, b.nth(j).clone());
        let second = b.with_subtree(j, a.nth(i).clone());
        if first.depth() <= MAX_DEPTH && second.depth() <= MAX_DEPTH {
            return (first, second);
        }
    }
    (a.clone(), b.clone())
}

/// Replaces a uniformly chosen subtree with a fresh grow tree of depth at
/// most [`INITIAL_MAX_DEPTH`].
pub fn mutate<R: Rng + ?Sized>(tree: &Node, attrs: &[Attribute], rng: &mut R) -> Node {
    for _ in 0..REPAIR_ATTEMPTS {
        let idx = rng.gen_range(0..tree.size());
        let depth = rng.gen_range(1..=INITIAL_MAX_DEPTH);
        let fresh = build_tree(attrs, depth, InitMethod::Grow, rng);
        let out = tree.with_subtree(idx, fresh);
        if out.depth() <= MAX_DEPTH {
            return out;
        }
    }
    tree.clone()
}

/// Moves the constant of one uniformly chosen comparison. Numeric constants
/// move by a uniform step of at most a tenth of the attribute's range and are
/// clamped to it; categorical constants move to a neighbouring observed code.
pub fn shift<R: Rng + ?Sized>(tree: &Node, attrs: &[Attribute], rng: &mut R) -> Node {
    let mut out = tree.clone();
    let mut comparisons = Vec::new();
    out.comparisons_mut(&mut comparisons);
    if comparisons.is_empty() {
        return out;
    }
    let k = rng.gen_range(0..comparisons.len());
    let cmp = &mut *comparisons[k];
    match attrs.get(cmp.attr).map(|a| &a.kind) {
        Some(AttributeKind::Numeric { min, max }) => {
            let span = max - min;
            if span > 0.0 {
                let step = rng.gen_range(-SHIFT_FRACTION..=SHIFT_FRACTION) * span;
                cmp.value = (cmp.value + step).clamp(*min, *max);
            }
        }
        Some(AttributeKind::Categorical { codes }) if codes.len() > 1 => {
            let pos = codes
                .iter()
                .position(|&c| c >= cmp.value)
                .unwrap_or(codes.len() - 1);
            let next = if pos == 0 {
                1
            } else if pos == codes.len() - 1 || rng.gen_bool(0.5) {
                pos - 1
            } else {
                pos + 1
            };
            cmp.value = codes[next];
        }
        _ => {}
    }
    out
}

/// Replaces a uniformly chosen leaf of class `c` with
/// `(if <random condition> c 1-c)`. A leaf already at [`MAX_DEPTH`] leaves
/// the tree unchanged.
pub fn split<R: Rng + ?Sized>(tree: &Node, attrs: &[Attribute], rng: &mut R) -> Node {
    let mut out = tree.clone();
    if attrs.is_empty() {
        return out;
    }
    let mut k = rng.gen_range(0..tree.leaf_count());
    let (leaf, depth) = out.leaf_mut(&mut k, 1).expect("leaf index in range");
    if depth >= MAX_DEPTH {
        return tree.clone();
    }
    let class = match leaf {
        Node::Leaf(c) => *c,
        Node::Branch { .. } => unreachable!("leaf_mut returns leaves"),
    };
    let condition = random_condition(attrs, rng);
    *leaf = Node::branch(condition, Node::Leaf(class), Node::Leaf(1 - class));
    out
}

/// Per-offspring probabilities of the four operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationRates {
    pub crossover: f64,
    pub mutation: f64,
    pub shifting: f64,
    pub splitting: f64,
}

impl Default for VariationRates {
    fn default() -> Self {
        VariationRates {
            crossover: 0.9,
            mutation: 0.1,
            shifting: 0.1,
            splitting: 0.1,
        }
    }
}

impl VariationRates {
    pub const NONE: VariationRates = VariationRates {
        crossover: 0.0,
        mutation: 0.0,
        shifting: 0.0,
        splitting: 0.0,
    };

    pub fn is_valid(&self) -> bool {
        [self.crossover, self.mutation, self.shifting, self.splitting]
            .iter()
            .all(|p| (0.0..=1.0).contains(p))
    }
}

/// A tree with its cached objective vector on a particular split.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub tree: Node,
    pub counts: Option<ConfusionCounts>,
    pub objectives: Option<RocPoint>,
    /// Serial number of the evaluation that produced `objectives`.
    pub eval_stamp: Option<u64>,
}

impl Individual {
    pub fn new(tree: Node) -> Self {
        Individual {
            tree,
            counts: None,
            objectives: None,
            eval_stamp: None,
        }
    }

    /// Objective vector; panics if the individual was never evaluated.
    pub fn point(&self) -> RocPoint {
        self.objectives.expect("individual not evaluated")
    }
}

fn fmt_condition(c: &Condition, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match c {
        Condition::Compare(cmp) => write!(f, "({} x{} {})", cmp.op.symbol(), cmp.attr, cmp.value),
        Condition::Not(inner) => {
            f.write_str("(not ")?;
            fmt_condition(inner, f)?;
            f.write_str(")")
        }
        Condition::And(a, b) | Condition::Or(a, b) => {
            let op = if matches!(c, Condition::And(..)) { "and" } else { "or" };
            write!(f, "({op} ")?;
            fmt_condition(a, f)?;
            f.write_str(" ")?;
            fmt_condition(b, f)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_condition(self, f)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Leaf(c) => write!(f, "{c}"),
            Node::Branch {
                condition,
                then,
                otherwise,
            } => write!(f, "(if {condition} {then} {otherwise})"),
        }
    }
}

struct Parser<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, ch) in text.char_indices() {
            match ch {
                '(' | ')' => {
                    if let Some(s) = start.take() {
                        tokens.push(&text[s..i]);
                    }
                    tokens.push(&text[i..i + 1]);
                }
                c if c.is_whitespace() => {
                    if let Some(s) = start.take() {
                        tokens.push(&text[s..i]);
                    }
                }
                _ => {
                    start.get_or_insert(i);
                }
            }
        }
        if let Some(s) = start {
            tokens.push(&text[s..]);
        }
        Parser { tokens, pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> GdtError {
        GdtError::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str, GdtError> {
        let t = self
            .tokens
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: &str) -> Result<(), GdtError> {
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            Err(self.error(format!("expected `{want}`, found `{got}`")))
        }
    }

    fn node(&mut self) -> Result<Node, GdtError> {
        match self.next()? {
            "0" => Ok(Node::Leaf(0)),
            "1" => Ok(Node::Leaf(1)),
            "(" => {
                self.expect("if")?;
                let condition = self.condition()?;
                let then = self.node()?;
                let otherwise = self.node()?;
                self.expect(")")?;
                Ok(Node::branch(condition, then, otherwise))
            }
            other => Err(self.error(format!("expected a node, found `{other}`"))),
        }
    }

    fn condition(&mut self) -> Result<Condition, GdtError> {
        self.expect("(")?;
        let head = self.next()?;
        let cond = match head {
            "<" | ">" | "=" => {
                let op = match head {
                    "<" => CmpOp::Lt,
                    ">" => CmpOp::Gt,
                    _ => CmpOp::Eq,
                };
                let attr_tok = self.next()?;
                let attr = attr_tok
                    .strip_prefix('x')
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| self.error(format!("bad attribute `{attr_tok}`")))?;
                let value_tok = self.next()?;
                let value = value_tok
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.error(format!("bad constant `{value_tok}`")))?;
                Condition::compare(attr, op, value)
            }
            "not" => Condition::Not(Box::new(self.condition()?)),
            "and" => Condition::And(Box::new(self.condition()?), Box::new(self.condition()?)),
            "or" => Condition::Or(Box::new(self.condition()?), Box::new(self.condition()?)),
            other => return Err(self.error(format!("unknown operator `{other}`"))),
        };
        self.expect(")")?;
        Ok(cond)
    }
}

impl FromStr for Node {
    type Err = GdtError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let node = p.node()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("trailing input"));
        }
        Ok(node)
    }
}
