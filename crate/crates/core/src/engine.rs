//! Evolutionary loops: the convex-hull μ+μ loop and the baseline selectors
//! (μ+μ, μ+1 and MOEA/D), with tournament parent selection and strict
//! evaluation-budget accounting.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Attribute, DataError, Split};
use crate::gdt::{self, GdtError, Individual, Node, VariationRates, INITIAL_MAX_DEPTH};
use crate::roc::{self, RocPoint};
use crate::selection::{self, Indicator, Scheme, SelectionError, SelectorKind, Sorting};

pub const DEFAULT_CHECKPOINT_RATIOS: [f64; 7] =
    [1.0 / 15.0, 0.1, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0];

/// Neighbourhood size for MOEA/D subproblems.
pub const MOEAD_NEIGHBOURS: usize = 5;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0} is not a convex-hull μ+μ selector")]
    NotConvexHull(SelectorKind),
    #[error("schema has {attributes} attributes but the split has {width} features")]
    WidthMismatch { attributes: usize, width: usize },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Tree(#[from] GdtError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub population_size: usize,
    pub max_evaluations: u64,
    pub selector: SelectorKind,
    pub rates: VariationRates,
    pub tournament_size: usize,
    pub seed: u64,
    pub checkpoint_ratios: Vec<f64>,
}

impl EngineConfig {
    pub fn new(selector: SelectorKind, max_evaluations: u64, seed: u64) -> Self {
        EngineConfig {
            population_size: 20,
            max_evaluations,
            selector,
            rates: VariationRates::default(),
            tournament_size: 4,
            seed,
            checkpoint_ratios: DEFAULT_CHECKPOINT_RATIOS.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |m: String| Err(EngineError::Config(m));
        if self.population_size < 2 {
            return fail(format!("population size {} < 2", self.population_size));
        }
        if self.max_evaluations < self.population_size as u64 {
            return fail(format!(
                "max evaluations {} below population size {}",
                self.max_evaluations, self.population_size
            ));
        }
        if self.tournament_size == 0 {
            return fail("tournament size must be positive".into());
        }
        if !self.rates.is_valid() {
            return fail(format!("operator rates outside [0, 1]: {:?}", self.rates));
        }
        if self
            .checkpoint_ratios
            .iter()
            .any(|r| !(r.is_finite() && *r > 0.0 && *r <= 1.0))
        {
            return fail("checkpoint ratios must lie in (0, 1]".into());
        }
        if self.checkpoint_ratios.windows(2).any(|w| w[0] >= w[1]) {
            return fail("checkpoint ratios must be strictly increasing".into());
        }
        Ok(())
    }

    /// Evaluation counts at which each checkpoint fires.
    pub fn checkpoint_targets(&self) -> Vec<u64> {
        self.checkpoint_ratios
            .iter()
            .map(|r| ((r * self.max_evaluations as f64) - 1e-9).ceil().max(1.0) as u64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub ratio: f64,
    pub evaluations: u64,
    pub generation: u64,
    pub train_auch: f64,
    pub test_auch: f64,
    /// Population members on the training hull.
    pub hull_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLog {
    pub records: Vec<Checkpoint>,
    /// Generations after which training AUCH of the population fell.
    pub auch_decreases: Vec<u64>,
}

impl ConvergenceLog {
    pub fn last(&self) -> Option<&Checkpoint> {
        self.records.last()
    }
}

#[derive(Debug, Clone)]
pub struct RunState {
    pub population: Vec<Individual>,
    pub evaluations_used: u64,
    pub generation: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: RunState,
    pub log: ConvergenceLog,
}

impl RunOutcome {
    pub fn population(&self) -> &[Individual] {
        &self.state.population
    }

    pub fn training_points(&self) -> Vec<RocPoint> {
        points_of(&self.state.population)
    }
}

/// Tournament fitness: lower level first, then larger in-level score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankKey {
    pub level: usize,
    pub score: f64,
}

impl RankKey {
    fn better_than(&self, other: &RankKey) -> bool {
        match self.level.cmp(&other.level) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.score > other.score,
        }
    }
}

/// Ranks every member by level and in-level indicator score. Redundant
/// copies rank below every level with score zero.
pub fn rank_population(points: &[RocPoint], sorting: Sorting, indicator: Indicator) -> Vec<RankKey> {
    let part = selection::partition(points, sorting);
    let archive_level = part.levels.len();
    let mut keys = vec![
        RankKey {
            level: archive_level,
            score: 0.0,
        };
        points.len()
    ];
    for (l, level) in part.levels.iter().enumerate() {
        let scores = selection::level_scores(points, level, indicator);
        for (&i, &score) in level.iter().zip(&scores) {
            keys[i] = RankKey { level: l, score };
        }
    }
    keys
}

/// Draws `k` members with replacement and returns the index of the best.
/// Ties go to the earliest draw.
pub fn tournament_select<R: Rng + ?Sized>(keys: &[RankKey], k: usize, rng: &mut R) -> usize {
    assert!(!keys.is_empty(), "tournament over an empty population");
    let mut best = rng.gen_range(0..keys.len());
    for _ in 1..k.max(1) {
        let c = rng.gen_range(0..keys.len());
        if keys[c].better_than(&keys[best]) {
            best = c;
        }
    }
    best
}

/// Builds one child: tournament parent, crossover with a second tournament
/// parent, then mutation, shifting and splitting, each applied independently.
pub fn breed<R: Rng + ?Sized>(
    pool: &[&Node],
    keys: &[RankKey],
    tournament_size: usize,
    rates: &VariationRates,
    attrs: &[Attribute],
    rng: &mut R,
) -> Node {
    let first = pool[tournament_select(keys, tournament_size, rng)];
    let mut child = if rng.gen_bool(rates.crossover) {
        let second = pool[tournament_select(keys, tournament_size, rng)];
        gdt::crossover(first, second, rng).0
    } else {
        first.clone()
    };
    if rng.gen_bool(rates.mutation) {
        child = gdt::mutate(&child, attrs, rng);
    }
    if rng.gen_bool(rates.shifting) {
        child = gdt::shift(&child, attrs, rng);
    }
    if rng.gen_bool(rates.splitting) {
        child = gdt::split(&child, attrs, rng);
    }
    child
}

/// Training-split evaluation with a hard budget.
struct Evaluator<'a> {
    train: &'a Split,
    used: u64,
    max: u64,
}

impl Evaluator<'_> {
    fn remaining(&self) -> u64 {
        self.max - self.used
    }

    fn evaluate(&mut self, tree: Node) -> Result<Individual, EngineError> {
        debug_assert!(self.used < self.max);
        let (counts, point) = gdt::evaluate_point(&tree, self.train)?;
        self.used += 1;
        Ok(Individual {
            tree,
            counts: Some(counts),
            objectives: Some(point),
            eval_stamp: Some(self.used),
        })
    }
}

/// Generates up to `count` offspring (fewer if the budget runs out) from
/// `population` and evaluates each one on the training split.
fn make_offspring<R: Rng + ?Sized>(
    population: &[Individual],
    keys: &[RankKey],
    count: usize,
    config: &EngineConfig,
    attrs: &[Attribute],
    evaluator: &mut Evaluator<'_>,
    rng: &mut R,
) -> Result<Vec<Individual>, EngineError> {
    let n = (count as u64).min(evaluator.remaining()) as usize;
    let pool: Vec<&Node> = population.iter().map(|i| &i.tree).collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let child = breed(&pool, keys, config.tournament_size, &config.rates, attrs, rng);
        out.push(evaluator.evaluate(child)?);
    }
    Ok(out)
}

fn points_of(population: &[Individual]) -> Vec<RocPoint> {
    population.iter().map(Individual::point).collect()
}

struct Recorder<'a> {
    test: &'a Split,
    ratios: Vec<f64>,
    targets: Vec<u64>,
    next: usize,
    last_train: Option<f64>,
    log: ConvergenceLog,
}

impl<'a> Recorder<'a> {
    fn new(config: &EngineConfig, test: &'a Split) -> Self {
        Recorder {
            test,
            ratios: config.checkpoint_ratios.clone(),
            targets: config.checkpoint_targets(),
            next: 0,
            last_train: None,
            log: ConvergenceLog::default(),
        }
    }

    /// Called at every generation boundary.
    fn boundary(
        &mut self,
        population: &[Individual],
        evaluations: u64,
        generation: u64,
    ) -> Result<(), EngineError> {
        let train_points = points_of(population);
        let train_auch = roc::auch_of(&train_points);
        if let Some(prev) = self.last_train {
            if train_auch < prev - 1e-12 {
                self.log.auch_decreases.push(generation);
            }
        }
        self.last_train = Some(train_auch);
        if self.next >= self.targets.len() || self.targets[self.next] > evaluations {
            return Ok(());
        }
        let mut test_points = Vec::with_capacity(population.len());
        for ind in population {
            test_points.push(gdt::evaluate_point(&ind.tree, self.test)?.1);
        }
        let test_auch = roc::auch_of(&test_points);
        let hull_size = roc::upper_hull(&train_points).interior().len();
        while self.next < self.targets.len() && self.targets[self.next] <= evaluations {
            self.log.records.push(Checkpoint {
                ratio: self.ratios[self.next],
                evaluations,
                generation,
                train_auch,
                test_auch,
                hull_size,
            });
            self.next += 1;
        }
        Ok(())
    }
}

struct Setup<'a> {
    rng: ChaCha8Rng,
    evaluator: Evaluator<'a>,
    recorder: Recorder<'a>,
    population: Vec<Individual>,
}

fn setup<'a>(
    config: &EngineConfig,
    attrs: &[Attribute],
    train: &'a Split,
    test: &'a Split,
) -> Result<Setup<'a>, EngineError> {
    config.validate()?;
    train.check_non_degenerate()?;
    test.check_non_degenerate()?;
    for split in [train, test] {
        if split.width() != attrs.len() {
            return Err(EngineError::WidthMismatch {
                attributes: attrs.len(),
                width: split.width(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evaluator = Evaluator {
        train,
        used: 0,
        max: config.max_evaluations,
    };
    let trees =
        gdt::ramped_half_and_half(attrs, config.population_size, 1, INITIAL_MAX_DEPTH, &mut rng);
    let population = trees
        .into_iter()
        .map(|t| evaluator.evaluate(t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut recorder = Recorder::new(config, test);
    recorder.boundary(&population, evaluator.used, 0)?;
    Ok(Setup {
        rng,
        evaluator,
        recorder,
        population,
    })
}

fn finish(s: Setup<'_>, generation: u64) -> RunOutcome {
    RunOutcome {
        state: RunState {
            population: s.population,
            evaluations_used: s.evaluator.used,
            generation,
        },
        log: s.recorder.log,
    }
}

fn run_generational(
    config: &EngineConfig,
    attrs: &[Attribute],
    train: &Split,
    test: &Split,
    sorting: Sorting,
    indicator: Indicator,
    batch: usize,
) -> Result<RunOutcome, EngineError> {
    let mut s = setup(config, attrs, train, test)?;
    let mu = config.population_size;
    let mut generation = 0;
    while s.evaluator.remaining() > 0 {
        let keys = rank_population(&points_of(&s.population), sorting, indicator);
        let offspring = make_offspring(
            &s.population,
            &keys,
            batch,
            config,
            attrs,
            &mut s.evaluator,
            &mut s.rng,
        )?;
        let mut union = std::mem::take(&mut s.population);
        union.extend(offspring);
        let points = points_of(&union);
        let keep =
            selection::select_survivors(&points, union.len() - mu, sorting, indicator, &mut s.rng)?;
        let mut slots: Vec<Option<Individual>> = union.into_iter().map(Some).collect();
        s.population = keep.into_iter().map(|i| slots[i].take().expect("unique")).collect();
        generation += 1;
        s.recorder
            .boundary(&s.population, s.evaluator.used, generation)?;
    }
    Ok(finish(s, generation))
}

/// Weight vectors spread evenly over the simplex.
pub fn moead_weights(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let a = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
            (a, 1.0 - a)
        })
        .collect()
}

/// The `t` nearest weight vectors of each subproblem, itself included.
pub fn moead_neighbourhoods(weights: &[(f64, f64)], t: usize) -> Vec<Vec<usize>> {
    let t = t.min(weights.len());
    weights
        .iter()
        .map(|w| {
            let mut order: Vec<usize> = (0..weights.len()).collect();
            let dist = |j: usize| (weights[j].0 - w.0).powi(2) + (weights[j].1 - w.1).powi(2);
            order.sort_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b)));
            order.truncate(t);
            order
        })
        .collect()
}

fn minimisation_objectives(p: &RocPoint) -> (f64, f64) {
    (p.fpr_f64(), 1.0 - p.tpr_f64())
}

fn run_moead(
    config: &EngineConfig,
    attrs: &[Attribute],
    train: &Split,
    test: &Split,
) -> Result<RunOutcome, EngineError> {
    let mut s = setup(config, attrs, train, test)?;
    let weights = moead_weights(config.population_size);
    let hoods = moead_neighbourhoods(&weights, MOEAD_NEIGHBOURS);
    let mut ideal = (f64::INFINITY, f64::INFINITY);
    for ind in &s.population {
        let f = minimisation_objectives(&ind.point());
        ideal = (ideal.0.min(f.0), ideal.1.min(f.1));
    }
    let mut generation = 0;
    while s.evaluator.remaining() > 0 {
        for (i, hood) in hoods.iter().enumerate() {
            if s.evaluator.remaining() == 0 {
                break;
            }
            let pool: Vec<&Node> = hood.iter().map(|&j| &s.population[j].tree).collect();
            let keys: Vec<RankKey> = hood
                .iter()
                .map(|&j| RankKey {
                    level: 0,
                    score: -selection::moead_scalarize(&s.population[j].point(), weights[i], ideal),
                })
                .collect();
            let child = breed(
                &pool,
                &keys,
                config.tournament_size,
                &config.rates,
                attrs,
                &mut s.rng,
            );
            let child = s.evaluator.evaluate(child)?;
            let f = minimisation_objectives(&child.point());
            ideal = (ideal.0.min(f.0), ideal.1.min(f.1));
            for &j in hood {
                let w = weights[j];
                let new = selection::moead_scalarize(&child.point(), w, ideal);
                let old = selection::moead_scalarize(&s.population[j].point(), w, ideal);
                if new < old {
                    s.population[j] = child.clone();
                }
            }
        }
        generation += 1;
        s.recorder
            .boundary(&s.population, s.evaluator.used, generation)?;
    }
    Ok(finish(s, generation))
}

/// The convex-hull μ+μ loop: μ offspring per generation, then the union of
/// parents and offspring is reduced back to μ.
pub fn run_chmogp(
    config: &EngineConfig,
    attrs: &[Attribute],
    train: &Split,
    test: &Split,
) -> Result<RunOutcome, EngineError> {
    let selector = config.selector;
    match selector.survival() {
        Some((sorting, indicator))
            if selector.is_convex_hull_family() && selector.scheme() == Scheme::MuPlusMu =>
        {
            run_generational(
                config,
                attrs,
                train,
                test,
                sorting,
                indicator,
                config.population_size,
            )
        }
        _ => Err(EngineError::NotConvexHull(selector)),
    }
}

/// Runs any selector with its own sorting, indicator and scheme.
pub fn run_baseline(
    config: &EngineConfig,
    attrs: &[Attribute],
    train: &Split,
    test: &Split,
) -> Result<RunOutcome, EngineError> {
    match (config.selector.survival(), config.selector.scheme()) {
        (Some((sorting, indicator)), Scheme::MuPlusMu) => run_generational(
            config,
            attrs,
            train,
            test,
            sorting,
            indicator,
            config.population_size,
        ),
        (Some((sorting, indicator)), Scheme::MuPlusOne) => {
            run_generational(config, attrs, train, test, sorting, indicator, 1)
        }
        _ => run_moead(config, attrs, train, test),
    }
}

/// Runs the configured selector.
pub fn run(
    config: &EngineConfig,
    attrs: &[Attribute],
    train: &Split,
    test: &Split,
) -> Result<RunOutcome, EngineError> {
    if config.selector == SelectorKind::ChNoRedundancyArea {
        run_chmogp(config, attrs, train, test)
    } else {
        run_baseline(config, attrs, train, test)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DatasetSchema;
    use rand_chacha::ChaCha8Rng;

    fn toy(n: usize, seed: u64) -> (Vec<Attribute>, Split) {
        // Two features; label is x0 + noise > 0.5.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Vec::with_capacity(2 * n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let x0: f64 = rng.gen();
            let x1: f64 = rng.gen();
            features.extend([x0, x1]);
            labels.push(u8::from(x0 + 0.3 * (x1 - 0.5) > 0.5));
        }
        let attrs = DatasetSchema::numeric(&[(0.0, 1.0), (0.0, 1.0)]).attributes;
        (attrs, Split::new(2, features, labels))
    }

    fn rk(level: usize, score: f64) -> RankKey {
        RankKey { level, score }
    }

    #[test]
    fn tournament_k1_is_uniform() {
        let keys = vec![rk(0, 1.0), rk(1, 0.0), rk(2, 0.0), rk(3, 0.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut hits = [0usize; 4];
        for _ in 0..40_000 {
            hits[tournament_select(&keys, 1, &mut rng)] += 1;
        }
        assert!(hits.iter().all(|&h| (9_000..11_000).contains(&h)), "{hits:?}");
    }

    #[test]
    fn tournament_prefers_lower_level() {
        let keys = vec![rk(1, 5.0), rk(0, 0.0), rk(1, 9.0), rk(1, 1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Whenever the level-0 member is drawn it wins; with k large it is
        // essentially always drawn.
        for _ in 0..1000 {
            assert_eq!(tournament_select(&keys, 64, &mut rng), 1);
        }
    }

    #[test]
    fn rank_population_levels_and_archive() {
        let p = |x, y| RocPoint::new(x, 10, y, 10).unwrap();
        let pts = vec![p(1, 8), p(1, 8), p(5, 5), p(2, 9)];
        let keys = rank_population(
            &pts,
            Sorting::ConvexHullNoRedundancy,
            Indicator::Area,
        );
        assert_eq!(keys[0].level, 0);
        assert_eq!(keys[3].level, 0);
        assert!(keys[2].level >= 1);
        assert_eq!(keys[1], rk(keys.iter().map(|k| k.level).max().unwrap(), 0.0));
    }

    #[test]
    fn config_validation() {
        let mut c = EngineConfig::new(SelectorKind::ChNoRedundancyArea, 100, 1);
        assert!(c.validate().is_ok());
        c.max_evaluations = 10;
        assert!(c.validate().is_err());
        c.max_evaluations = 100;
        c.population_size = 1;
        assert!(c.validate().is_err());
        c.population_size = 20;
        c.checkpoint_ratios = vec![0.5, 0.25];
        assert!(c.validate().is_err());
    }

    #[test]
    fn checkpoint_targets_round_up() {
        let c = EngineConfig::new(SelectorKind::ChNoRedundancyArea, 15_000, 1);
        assert_eq!(
            c.checkpoint_targets(),
            vec![1000, 1500, 3750, 5000, 7500, 10_000, 15_000]
        );
    }

    #[test]
    fn budget_floor_runs_no_generations() {
        let (attrs, train) = toy(60, 1);
        let (_, test) = toy(40, 2);
        let c = EngineConfig::new(SelectorKind::ChNoRedundancyArea, 20, 3);
        let out = run_chmogp(&c, &attrs, &train, &test).unwrap();
        assert_eq!(out.state.evaluations_used, 20);
        assert_eq!(out.state.generation, 0);
        assert_eq!(out.population().len(), 20);
        assert_eq!(out.log.records.len(), 7);
        assert!(out.log.records.iter().all(|r| r.evaluations == 20));
    }

    #[test]
    fn every_selector_spends_exactly_the_budget() {
        let (attrs, train) = toy(80, 4);
        let (_, test) = toy(40, 5);
        for kind in SelectorKind::ALL {
            let c = EngineConfig::new(kind, 437, 9);
            let out = run(&c, &attrs, &train, &test).unwrap();
            assert_eq!(out.state.evaluations_used, 437, "{kind}");
            assert_eq!(out.population().len(), 20, "{kind}");
            let recs = &out.log.records;
            assert_eq!(recs.len(), 7, "{kind}");
            assert!(recs.windows(2).all(|w| w[0].evaluations <= w[1].evaluations));
            assert_eq!(recs.last().unwrap().evaluations, 437);
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let (attrs, train) = toy(80, 6);
        let (_, test) = toy(40, 7);
        for kind in [SelectorKind::ChNoRedundancyArea, SelectorKind::SmsEmoa, SelectorKind::Moead] {
            let c = EngineConfig::new(kind, 400, 11);
            let a = run(&c, &attrs, &train, &test).unwrap();
            let b = run(&c, &attrs, &train, &test).unwrap();
            assert_eq!(a.log, b.log);
            let ta: Vec<String> = a.population().iter().map(|i| i.tree.to_string()).collect();
            let tb: Vec<String> = b.population().iter().map(|i| i.tree.to_string()).collect();
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn zero_rates_clone_winners() {
        let (attrs, train) = toy(60, 8);
        let (_, test) = toy(40, 9);
        let mut c = EngineConfig::new(SelectorKind::Nsga2, 200, 1);
        c.rates = VariationRates::NONE;
        let init = gdt::ramped_half_and_half(
            &attrs,
            20,
            1,
            INITIAL_MAX_DEPTH,
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        let init: Vec<String> = init.iter().map(|t| t.to_string()).collect();
        let out = run(&c, &attrs, &train, &test).unwrap();
        for ind in out.population() {
            assert!(init.contains(&ind.tree.to_string()));
        }
        assert_eq!(out.state.evaluations_used, 200);
    }

    #[test]
    fn run_chmogp_rejects_other_selectors() {
        let (attrs, train) = toy(60, 8);
        let (_, test) = toy(40, 9);
        let c = EngineConfig::new(SelectorKind::Nsga2, 100, 1);
        assert!(matches!(
            run_chmogp(&c, &attrs, &train, &test),
            Err(EngineError::NotConvexHull(SelectorKind::Nsga2))
        ));
    }

    #[test]
    fn degenerate_split_fails_before_evaluating() {
        let (attrs, train) = toy(60, 8);
        let bad = Split::new(2, vec![0.1, 0.2, 0.3, 0.4], vec![1, 1]);
        let c = EngineConfig::new(SelectorKind::ChNoRedundancyArea, 100, 1);
        assert!(matches!(
            run_chmogp(&c, &attrs, &train, &bad),
            Err(EngineError::Data(_))
        ));
    }

    #[test]
    fn chmogp_learns_the_toy_problem() {
        let (attrs, train) = toy(200, 12);
        let (_, test) = toy(200, 13);
        let c = EngineConfig::new(SelectorKind::ChNoRedundancyArea, 3000, 5);
        let out = run_chmogp(&c, &attrs, &train, &test).unwrap();
        let last = out.log.last().unwrap();
        assert!(last.train_auch > 0.9, "{last:?}");
        assert!(last.test_auch > 0.85, "{last:?}");
    }

    #[test]
    fn moead_weights_and_neighbourhoods() {
        let w = moead_weights(5);
        assert_eq!(w[0], (0.0, 1.0));
        assert_eq!(w[4], (1.0, 0.0));
        let hoods = moead_neighbourhoods(&w, 3);
        assert_eq!(hoods[0], vec![0, 1, 2]);
        assert_eq!(hoods[2], vec![2, 1, 3]);
    }
}
