//! Test-only oracles, independent of the library's DP and update paths.

#![allow(dead_code)]

use aeqts::qreg::{Qubit, QubitRegister};
use aeqts::solver::{make_population, trial_rng, Population};
use aeqts::{KnapsackInstance, Solution, SolverConfig};

/// Maximum feasible profit by enumerating all 2^K subsets.
pub fn brute_force(inst: &KnapsackInstance) -> u64 {
    let k = inst.len();
    assert!(k <= 20, "brute force limited to 20 items");
    let items = inst.items();
    let mut best = 0;
    for mask in 0u32..(1 << k) {
        let (mut w, mut p) = (0u64, 0u64);
        for (j, it) in items.iter().enumerate() {
            if mask >> j & 1 == 1 {
                w += it.weight;
                p += it.profit;
            }
        }
        if 2 * w <= inst.capacity_x2() && p > best {
            best = p;
        }
    }
    best
}

/// One QTS iteration's observable output.
#[derive(Debug, Clone, PartialEq)]
pub struct QtsFrame {
    pub register: Vec<Qubit>,
    pub population: Population,
    pub best_so_far: u64,
}

/// Plain QTS written out directly: measure and repair with the library
/// primitives, then rotate every qubit once using the single best and the
/// single worst solution with the full angle.
pub fn qts_reference(cfg: &SolverConfig, inst: &KnapsackInstance, iters: usize) -> Vec<QtsFrame> {
    let mut rng = trial_rng(cfg.seed);
    let mut reg = QubitRegister::uniform(inst.len()).unwrap();
    let init = make_population(&reg, inst, cfg.population_size, &mut rng).unwrap();
    let mut best = pick(&init, true).clone();
    let mut frames = Vec::new();
    for _ in 0..iters {
        let pop = make_population(&reg, inst, cfg.population_size, &mut rng).unwrap();
        let b = pick(&pop, true).clone();
        let w = pick(&pop, false);
        for (j, q) in reg.qubits_mut().iter_mut().enumerate() {
            let (sb, sw) = (b.bits()[j], w.bits()[j]);
            if sb == sw {
                continue;
            }
            let first_third = q.alpha * q.beta >= 0.0;
            // Rotate toward the best solution's bit.
            let toward_one = sb;
            let angle = if toward_one == first_third {
                cfg.theta
            } else {
                -cfg.theta
            };
            let (s, c) = angle.sin_cos();
            *q = Qubit::new(c * q.alpha - s * q.beta, s * q.alpha + c * q.beta);
        }
        if b.profit() > best.profit() {
            best = b;
        }
        frames.push(QtsFrame {
            register: reg.qubits().to_vec(),
            population: pop,
            best_so_far: best.profit(),
        });
    }
    frames
}

/// Best: highest profit, earliest index. Worst: lowest profit, latest index.
fn pick(pop: &Population, best: bool) -> &Solution {
    let sols = pop.solutions();
    let mut at = 0;
    for (i, s) in sols.iter().enumerate() {
        let better = if best {
            s.profit() > sols[at].profit()
        } else {
            s.profit() <= sols[at].profit()
        };
        if better {
            at = i;
        }
    }
    &sols[at]
}
