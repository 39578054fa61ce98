//! Power calculations for replication studies.
//!
//! Design-time powers ([`fixed`]) answer "how likely is the replication to be
//! significant?" before any data are collected; interim powers ([`interim`])
//! recompute the answer after part of the replication has been run.
//! [`solver`] inverts any power for the relative sample size and applies
//! futility rules, [`mc`] re-derives every power by simulation, and [`ssrp`]
//! reproduces the Social Science Replication Project case study.

pub mod config;
pub mod error;
pub mod fixed;
pub mod interim;
pub mod mc;
pub mod solver;
pub mod ssrp;
pub mod stats;

pub use config::{AnalysisPrior, DesignConfig, DesignPrior, Method, Stage, Tail};
pub use error::{Error, Result};
pub use fixed::{
    cbp, cp, cp_pp_intersection, fbp, fbp_cbp_intersection, fbp_minimum, fixed_power, pp,
    Crossing, FixedDesign, Minimum, PowerResult,
};
pub use interim::{
    cpi, interim_ordering_holds, interim_power, ippi, ippi_asymptote, ppi, ppi_minimum,
    remaining_n_curve, weight_dominance_threshold, weights, CurvePoint, InterimOrdering,
    InterimState, PpiMinimum, Weights,
};
pub use stats::{Direction, Probability, ZValue};
pub use mc::{simulate_power, SimEstimate, SimSpec};
pub use solver::{
    futility_decision, solve_c, Decision, FutilityDecision, FutilityRule, InterimInputs, Solution,
    SolveRequest,
};
pub use ssrp::{DerivedQuantities, SsrpDataset, SsrpRecord};
