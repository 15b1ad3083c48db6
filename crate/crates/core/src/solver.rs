//! Amplitude-ensemble quantum-inspired tabu search.
//!
//! Each iteration measures the register `N` times, repairs every measurement
//! into a feasible and maximal selection, then rotates the register toward
//! the better half of the population. With `pair_count = 1` only the best and
//! the worst solution drive the rotation, which is plain QTS; with
//! `pair_count = N / 2` the `i`-th best is paired with the `i`-th worst and
//! rotated by `theta / (i + 1)`.
//!
//! # Random stream
//!
//! A trial owns one [`TrialRng`] (`ChaCha8Rng::seed_from_u64(seed)`). Draws
//! happen in this order: the initial population, then per iteration all `N`
//! measurements (solution-major, `K` draws each) followed by the repair draws
//! of each solution in population order. Rotation uses no randomness.

use std::cmp::Reverse;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{KnapsackInstance, Solution};
use crate::qreg::{lookup_delta, quadrant, rotate, QubitRegister};

/// The per-trial random generator. Fixed for reproducibility of published
/// numbers; changing it changes every trajectory.
pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const DEFAULT_POPULATION: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 1000;
pub const DEFAULT_THETA: f64 = 0.01 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ae-qts")]
    AeQts,
    #[serde(rename = "qts")]
    Qts,
}

impl Algorithm {
    /// Label for a pair count: a single pair is the QTS update.
    pub fn from_pair_count(pair_count: usize) -> Self {
        if pair_count == 1 {
            Algorithm::Qts
        } else {
            Algorithm::AeQts
        }
    }

    pub fn default_pair_count(self, population_size: usize) -> usize {
        match self {
            Algorithm::AeQts => (population_size / 2).max(1),
            Algorithm::Qts => 1,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::AeQts => "ae-qts",
            Algorithm::Qts => "qts",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ae-qts" => Ok(Algorithm::AeQts),
            "qts" => Ok(Algorithm::Qts),
            other => Err(Error::invalid(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub population_size: usize,
    pub max_iter: usize,
    /// Base rotation angle in radians.
    pub theta: f64,
    pub pair_count: usize,
    pub seed: u64,
}

impl SolverConfig {
    /// `N = 10`, 1000 iterations, `theta = 0.01 pi`, `N / 2` pairs.
    pub fn ae_qts(seed: u64) -> Self {
        Self::for_algorithm(Algorithm::AeQts, seed)
    }

    /// Same defaults with a single best/worst pair.
    pub fn qts(seed: u64) -> Self {
        Self::for_algorithm(Algorithm::Qts, seed)
    }

    pub fn for_algorithm(algo: Algorithm, seed: u64) -> Self {
        SolverConfig {
            population_size: DEFAULT_POPULATION,
            max_iter: DEFAULT_MAX_ITER,
            theta: DEFAULT_THETA,
            pair_count: algo.default_pair_count(DEFAULT_POPULATION),
            seed,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        Algorithm::from_pair_count(self.pair_count)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid(format!(
                "population size must be at least 2, got {}",
                self.population_size
            )));
        }
        if self.pair_count == 0 || self.pair_count > self.population_size / 2 {
            return Err(Error::invalid(format!(
                "pair count must be in 1..={}, got {}",
                self.population_size / 2,
                self.pair_count
            )));
        }
        if !(self.theta > 0.0 && self.theta < FRAC_PI_2) {
            return Err(Error::invalid(format!(
                "theta must lie in (0, pi/2), got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Makes `bits` feasible, then maximal.
///
/// While overweight, a uniformly random selected item is dropped. Then,
/// while some unselected item still fits, a uniformly random one of those is
/// added. The result never exceeds the capacity and has no room left for any
/// further item.
pub fn repair<R: Rng + ?Sized>(
    mut bits: Vec<bool>,
    inst: &KnapsackInstance,
    rng: &mut R,
) -> Result<Solution> {
    if bits.len() != inst.len() {
        return Err(Error::invalid(format!(
            "selection has {} bits, instance has {} items",
            bits.len(),
            inst.len()
        )));
    }
    let items = inst.items();
    let mut weight = 0u64;
    let mut profit = 0u64;
    for (&b, it) in bits.iter().zip(items) {
        if b {
            weight += it.weight;
            profit += it.profit;
        }
    }

    if !inst.fits(weight) {
        let mut selected: Vec<usize> = (0..bits.len()).filter(|&j| bits[j]).collect();
        while !inst.fits(weight) {
            let j = selected.swap_remove(rng.gen_range(0..selected.len()));
            bits[j] = false;
            weight -= items[j].weight;
            profit -= items[j].profit;
        }
    }

    let mut candidates: Vec<usize> = (0..bits.len())
        .filter(|&j| !bits[j] && inst.fits(weight + items[j].weight))
        .collect();
    while !candidates.is_empty() {
        let j = candidates.swap_remove(rng.gen_range(0..candidates.len()));
        bits[j] = true;
        weight += items[j].weight;
        profit += items[j].profit;
        candidates.retain(|&c| inst.fits(weight + items[c].weight));
    }

    let sol = Solution::from_parts(bits, weight, profit);
    debug_assert!(sol.cache_consistent(inst));
    Ok(sol)
}

/// One iteration's repaired and evaluated solutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    solutions: Vec<Solution>,
}

impl Population {
    pub fn new(solutions: Vec<Solution>) -> Self {
        Population { solutions }
    }

    pub fn solutions(&self) -> &[Solution] {
        &self.solutions
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Indices ordered by descending profit; ties keep population order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.solutions.len()).collect();
        idx.sort_by_key(|&i| Reverse(self.solutions[i].profit()));
        idx
    }

    pub fn best(&self) -> Option<&Solution> {
        self.ranking().first().map(|&i| &self.solutions[i])
    }
}

/// Measures `reg` `n` times, then repairs each measurement in order.
pub fn make_population<R: Rng + ?Sized>(
    reg: &QubitRegister,
    inst: &KnapsackInstance,
    n: usize,
    rng: &mut R,
) -> Result<Population> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "population size must be at least 2, got {n}"
        )));
    }
    if reg.len() != inst.len() {
        return Err(Error::invalid(format!(
            "register has {} qubits, instance has {} items",
            reg.len(),
            inst.len()
        )));
    }
    let measured: Vec<Vec<bool>> = (0..n).map(|_| reg.measure(rng)).collect();
    let solutions = measured
        .into_iter()
        .map(|bits| repair(bits, inst, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(Population { solutions })
}

/// Rotates `reg` using `pair_count` best/worst pairs of `pop`.
///
/// Pair `i` couples rank `i` with rank `N - 1 - i` and uses the angle
/// `theta / (i + 1)`. Pairs are applied in ascending order and the quadrant
/// of each qubit is read from its current state.
pub fn update_register(
    reg: &mut QubitRegister,
    pop: &Population,
    theta: f64,
    pair_count: usize,
) -> Result<()> {
    let n = pop.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "population size must be at least 2, got {n}"
        )));
    }
    if pair_count == 0 || pair_count > n / 2 {
        return Err(Error::invalid(format!(
            "pair count must be in 1..={}, got {pair_count}",
            n / 2
        )));
    }
    if pop.solutions.iter().any(|s| s.bits().len() != reg.len()) {
        return Err(Error::invalid("population and register lengths differ"));
    }
    apply_pairs(reg, pop, &pop.ranking(), theta, pair_count);
    Ok(())
}

fn apply_pairs(
    reg: &mut QubitRegister,
    pop: &Population,
    ranking: &[usize],
    theta: f64,
    pair_count: usize,
) {
    let n = ranking.len();
    for i in 0..pair_count {
        let best = pop.solutions[ranking[i]].bits();
        let worst = pop.solutions[ranking[n - 1 - i]].bits();
        let divisor = (i + 1) as u32;
        for (q, (&b, &w)) in reg.qubits_mut().iter_mut().zip(best.iter().zip(worst)) {
            let delta = lookup_delta(b, w, quadrant(*q), theta);
            if delta.0 != 0.0 {
                *q = rotate(*q, delta / divisor);
            }
        }
    }
}

/// What one iteration produced, for tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepReport {
    pub t: usize,
    pub best_so_far: u64,
    pub iter_best: u64,
    pub iter_worst: u64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    t: usize,
    register: QubitRegister,
    best: Solution,
    last_update_iter: usize,
    curve: Vec<u64>,
    population: Population,
}

impl SolverState {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn best(&self) -> &Solution {
        &self.best
    }

    pub fn last_update_iter(&self) -> usize {
        self.last_update_iter
    }

    /// Best-so-far profit after each completed iteration.
    pub fn curve(&self) -> &[u64] {
        &self.curve
    }

    /// The most recent population (the initial one before the first step).
    pub fn population(&self) -> &Population {
        &self.population
    }
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub best_profit: u64,
    pub best_bits: Vec<bool>,
    /// Iteration (1-based) of the last strict improvement; 0 when the initial
    /// population's best was never beaten.
    pub last_update_iter: usize,
    pub curve: Vec<u64>,
    pub trial_seed: u64,
}

/// A single solver run that can be advanced one iteration at a time.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    config: SolverConfig,
    inst: &'a KnapsackInstance,
    rng: TrialRng,
    state: SolverState,
}

impl<'a> Solver<'a> {
    /// Validates the config, builds the uniform register and draws the
    /// initial population that seeds the best-so-far solution.
    pub fn new(config: SolverConfig, inst: &'a KnapsackInstance) -> Result<Self> {
        config.validate()?;
        let mut rng = trial_rng(config.seed);
        let register = QubitRegister::uniform(inst.len())?;
        let population = make_population(&register, inst, config.population_size, &mut rng)?;
        let best = population.solutions[population.ranking()[0]].clone();
        let state = SolverState {
            t: 0,
            register,
            best,
            last_update_iter: 0,
            curve: Vec::with_capacity(config.max_iter),
            population,
        };
        Ok(Solver {
            config,
            inst,
            rng,
            state,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.t >= self.config.max_iter
    }

    /// One make / repair / evaluate / update / select iteration.
    pub fn step(&mut self) -> StepReport {
        let cfg = &self.config;
        let st = &mut self.state;
        st.t += 1;
        let pop = make_population(&st.register, self.inst, cfg.population_size, &mut self.rng)
            .expect("config and register validated at construction");
        let ranking = pop.ranking();
        apply_pairs(&mut st.register, &pop, &ranking, cfg.theta, cfg.pair_count);

        let iter_best = &pop.solutions[ranking[0]];
        let iter_worst = pop.solutions[ranking[ranking.len() - 1]].profit();
        if iter_best.profit() > st.best.profit() {
            st.best = iter_best.clone();
            st.last_update_iter = st.t;
        }
        let report = StepReport {
            t: st.t,
            best_so_far: st.best.profit(),
            iter_best: iter_best.profit(),
            iter_worst,
        };
        st.curve.push(st.best.profit());
        st.population = pop;
        report
    }

    pub fn finish(self) -> TrialResult {
        TrialResult {
            best_profit: self.state.best.profit(),
            best_bits: self.state.best.into_bits(),
            last_update_iter: self.state.last_update_iter,
            curve: self.state.curve,
            trial_seed: self.config.seed,
        }
    }
}

/// Runs a full trial of `config.max_iter` iterations.
pub fn run(config: &SolverConfig, inst: &KnapsackInstance) -> Result<TrialResult> {
    run_with(config, inst, |_, _| {})
}

/// Like [`run`], calling `observe` after every iteration.
pub fn run_with<F>(
    config: &SolverConfig,
    inst: &KnapsackInstance,
    mut observe: F,
) -> Result<TrialResult>
where
    F: FnMut(&StepReport, &SolverState),
{
    let mut solver = Solver::new(*config, inst)?;
    while !solver.is_done() {
        let report = solver.step();
        observe(&report, solver.state());
    }
    Ok(solver.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, CaseTag, Item};
    use crate::qreg::Qubit;

    fn custom(items: &[(u64, u64)], capacity_x2: u64) -> KnapsackInstance {
        let items = items.iter().map(|&(w, p)| Item::new(w, p)).collect();
        KnapsackInstance::new(items, capacity_x2, CaseTag::Custom, None).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::ae_qts(0).validate().is_ok());
        assert!(SolverConfig::qts(0).validate().is_ok());
        let base = SolverConfig::ae_qts(0);
        for bad in [
            SolverConfig {
                population_size: 1,
                pair_count: 1,
                ..base
            },
            SolverConfig {
                pair_count: 0,
                ..base
            },
            SolverConfig {
                pair_count: 6,
                ..base
            },
            SolverConfig { theta: 0.0, ..base },
            SolverConfig {
                theta: FRAC_PI_2,
                ..base
            },
            SolverConfig {
                theta: f64::NAN,
                ..base
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        // odd N leaves the median unpaired
        assert!(SolverConfig {
            population_size: 7,
            pair_count: 3,
            ..base
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn defaults() {
        let c = SolverConfig::ae_qts(1);
        assert_eq!((c.population_size, c.max_iter, c.pair_count), (10, 1000, 5));
        assert_eq!(c.theta, 0.01 * PI);
        assert_eq!(c.algorithm(), Algorithm::AeQts);
        assert_eq!(SolverConfig::qts(1).pair_count, 1);
        assert_eq!(SolverConfig::qts(1).algorithm(), Algorithm::Qts);
    }

    #[test]
    fn repair_overfull_pair_removes_one() {
        let inst = custom(&[(6, 6), (6, 6)], 12);
        let mut outcomes = [0usize; 2];
        for seed in 0..200 {
            let mut rng = trial_rng(seed);
            let sol = repair(vec![true, true], &inst, &mut rng).unwrap();
            assert_eq!(sol.weight(), 6);
            assert!(sol.is_feasible(&inst) && sol.is_maximal(&inst));
            outcomes[if sol.bits()[0] { 0 } else { 1 }] += 1;
        }
        assert!(
            outcomes.iter().all(|&c| c > 0),
            "both branches reachable: {outcomes:?}"
        );
    }

    #[test]
    fn repair_empty_pair_adds_one() {
        let inst = custom(&[(6, 6), (6, 6)], 12);
        let mut outcomes = [0usize; 2];
        for seed in 0..200 {
            let mut rng = trial_rng(seed);
            let sol = repair(vec![false, false], &inst, &mut rng).unwrap();
            assert_eq!(sol.bits().iter().filter(|&&b| b).count(), 1);
            outcomes[if sol.bits()[0] { 0 } else { 1 }] += 1;
        }
        assert!(
            outcomes.iter().all(|&c| c > 0),
            "both branches reachable: {outcomes:?}"
        );
    }

    #[test]
    fn repair_keeps_feasible_maximal_input() {
        let inst = generate_instance(CaseTag::III, 10, 0).unwrap();
        // {1,2,3,4,8,9} weighs 27 of 27.5
        let bits: Vec<bool> = (1..=10).map(|w| [1, 2, 3, 4, 8, 9].contains(&w)).collect();
        let mut rng = trial_rng(4);
        let before = rng.clone();
        let sol = repair(bits.clone(), &inst, &mut rng).unwrap();
        assert_eq!(sol.bits(), &bits[..]);
        assert_eq!(sol.profit(), 57);
        assert_eq!(rng, before, "no draws for a no-op repair");
    }

    #[test]
    fn repair_nothing_fits() {
        let inst = custom(&[(1, 6)], 1);
        let sol = repair(vec![true], &inst, &mut trial_rng(0)).unwrap();
        assert_eq!(sol.bits(), &[false]);
        let sol = repair(vec![false], &inst, &mut trial_rng(0)).unwrap();
        assert_eq!(sol.bits(), &[false]);
    }

    #[test]
    fn repair_length_mismatch() {
        let inst = custom(&[(1, 6)], 4);
        assert!(repair(vec![true, false], &inst, &mut trial_rng(0)).is_err());
    }

    #[test]
    fn population_from_zero_register() {
        let inst = custom(&[(6, 6), (6, 6), (6, 6)], 12);
        let reg = QubitRegister::from_qubits(vec![Qubit::new(1.0, 0.0); 3]).unwrap();
        let pop = make_population(&reg, &inst, 4, &mut trial_rng(9)).unwrap();
        assert_eq!(pop.len(), 4);
        for s in pop.solutions() {
            assert_eq!(s.weight(), 6);
            assert!(s.is_feasible(&inst) && s.is_maximal(&inst));
        }
        assert!(make_population(&reg, &inst, 1, &mut trial_rng(9)).is_err());
    }

    #[test]
    fn ranking_is_stable() {
        let inst = custom(&[(1, 1), (1, 2), (1, 3)], 6);
        let sols = [
            vec![true, false, false],
            vec![false, false, true],
            vec![true, false, false],
            vec![false, true, false],
        ]
        .into_iter()
        .map(|b| Solution::evaluate(b, &inst).unwrap())
        .collect();
        assert_eq!(Population::new(sols).ranking(), vec![1, 3, 0, 2]);
    }

    #[test]
    fn update_pairs_and_divisors() {
        // Four solutions with distinct profits on K = 1; rank order 3,2,1,0.
        let inst = custom(&[(1, 1), (1, 2), (1, 3), (1, 4)], 8);
        let one_hot = |j: usize| (0..4).map(|i| i == j).collect::<Vec<_>>();
        let pop = Population::new(
            (0..4)
                .map(|j| Solution::evaluate(one_hot(j), &inst).unwrap())
                .collect(),
        );
        let theta = 0.05;
        let mut reg = QubitRegister::uniform(4).unwrap();
        update_register(&mut reg, &pop, theta, 2).unwrap();
        // pair 0: best = item 3 set, worst = item 0 set. pair 1: best = item 2, worst = item 1.
        let expect = [
            rotate(Qubit::UNIFORM, crate::qreg::AngleDelta(-theta)),
            rotate(Qubit::UNIFORM, crate::qreg::AngleDelta(-theta / 2.0)),
            rotate(Qubit::UNIFORM, crate::qreg::AngleDelta(theta / 2.0)),
            rotate(Qubit::UNIFORM, crate::qreg::AngleDelta(theta)),
        ];
        for (q, e) in reg.qubits().iter().zip(expect) {
            assert!((q.alpha - e.alpha).abs() < 1e-15 && (q.beta - e.beta).abs() < 1e-15);
        }
    }

    #[test]
    fn update_rejects_bad_pairs() {
        let inst = custom(&[(1, 1)], 2);
        let one = Population::new(vec![Solution::evaluate(vec![true], &inst).unwrap()]);
        let mut reg = QubitRegister::uniform(1).unwrap();
        assert!(update_register(&mut reg, &one, 0.1, 1).is_err());
        let two = Population::new(vec![
            Solution::evaluate(vec![true], &inst).unwrap(),
            Solution::evaluate(vec![false], &inst).unwrap(),
        ]);
        assert!(update_register(&mut reg, &two, 0.1, 2).is_err());
        assert!(update_register(&mut reg, &two, 0.1, 1).is_ok());
    }

    #[test]
    fn zero_iterations() {
        let inst = generate_instance(CaseTag::I, 12, 1).unwrap();
        let cfg = SolverConfig {
            max_iter: 0,
            ..SolverConfig::ae_qts(3)
        };
        let res = run(&cfg, &inst).unwrap();
        assert!(res.curve.is_empty());
        assert_eq!(res.last_update_iter, 0);
        let init = Solver::new(cfg, &inst).unwrap();
        assert_eq!(res.best_profit, init.state().best().profit());
    }

    #[test]
    fn run_rejects_invalid_config() {
        let inst = generate_instance(CaseTag::I, 12, 1).unwrap();
        let cfg = SolverConfig {
            pair_count: 9,
            ..SolverConfig::ae_qts(3)
        };
        assert!(matches!(run(&cfg, &inst), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn first_step_bounds() {
        let inst = generate_instance(CaseTag::II, 40, 5).unwrap();
        // One rotation by at most theta from the uniform state gives
        // beta^2 = (1 +- sin 2 theta) / 2.
        let theta = 0.01 * PI;
        let bound = 0.5 * (2.0 * theta).sin() + 1e-12;
        for seed in 0..20 {
            let mut s = Solver::new(SolverConfig::qts(seed), &inst).unwrap();
            s.step();
            for q in s.state().register().qubits() {
                assert!((q.prob_one() - 0.5).abs() <= bound);
            }
        }
    }

    #[test]
    fn trial_result_shape() {
        let inst = generate_instance(CaseTag::I, 30, 2).unwrap();
        let cfg = SolverConfig {
            max_iter: 200,
            ..SolverConfig::ae_qts(8)
        };
        let res = run(&cfg, &inst).unwrap();
        assert_eq!(res.curve.len(), 200);
        assert_eq!(*res.curve.last().unwrap(), res.best_profit);
        assert!(res.curve.windows(2).all(|w| w[0] <= w[1]));
        let sol = Solution::evaluate(res.best_bits.clone(), &inst).unwrap();
        assert_eq!(sol.profit(), res.best_profit);
        assert!(sol.is_feasible(&inst));
        assert_eq!(res.trial_seed, 8);
    }

    #[test]
    fn algorithm_labels() {
        assert_eq!("qts".parse::<Algorithm>().unwrap(), Algorithm::Qts);
        assert_eq!("ae-qts".parse::<Algorithm>().unwrap(), Algorithm::AeQts);
        assert!("ga".parse::<Algorithm>().is_err());
        assert_eq!(Algorithm::AeQts.to_string(), "ae-qts");
        assert_eq!(serde_json::to_string(&Algorithm::Qts).unwrap(), "\"qts\"");
    }
}
