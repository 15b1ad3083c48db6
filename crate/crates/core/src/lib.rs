//! Quantum-inspired tabu search (QTS) and its amplitude-ensemble variant
//! (AE-QTS) for the 0/1 knapsack problem, with an exact DP oracle and a
//! multi-trial benchmark harness.

pub mod bench;
pub mod cli;
pub mod error;
pub mod instance;
pub mod qreg;
pub mod solver;

pub use error::{Error, Result};
pub use instance::{
    dp_optimal_selection, dp_optimum, generate_instance, total_profit, total_weight, CaseTag, Item,
    KnapsackInstance, Solution,
};
pub use qreg::{
    init_register, lookup_delta, quadrant, rotate, AngleDelta, Quadrant, Qubit, QubitRegister,
};
pub use solver::{
    make_population, repair, run, update_register, Algorithm, Population, Solver, SolverConfig,
    SolverState, StepReport, TrialResult,
};
