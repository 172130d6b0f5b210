//! Solvers for the two-agent flock formation Stackelberg game.
//!
//! A leader picks an arrival time and announces it; the follower replies.
//! Whoever arrives first takes the better territory, both pay a quadratic
//! travel cost for arriving before the optimal time `t_o`, and arriving
//! within the flocking window of each other halves the predation risk.
//!
//! [`solve_ct`], [`solve_dt`] and [`solve_sfg`] give the closed-form
//! equilibria of the continuous-time, discrete-time and strict-flocking
//! games. The [`oracle`] module recomputes them by exhaustive backward
//! induction and [`analysis`] maps the parameter space.

pub mod analysis;
pub mod continuous;
pub mod discrete;
pub mod error;
pub mod exec;
pub mod game;
pub mod numfmt;
pub mod oracle;
pub mod outcome;
pub mod params;
pub mod sampling;
pub mod sfg;
pub mod tolerance;
pub mod verify;

pub use continuous::{classify_case_ct, follower_best_response_ct, solve_ct};
pub use discrete::{classify_case_dt, follower_best_response_dt, k_star, solve_dt, ThresholdReading};
pub use error::{Error, Result};
pub use exec::Execution;
pub use game::{utility, Action, ArrivalProfile, FlockKind, UtilityBreakdown};
pub use oracle::{enumerate_spe, oracle_ct_approx, GridSpec, OracleResult, TieMode};
pub use outcome::{CaseLabel, Game, SpeOutcome, SpeResult, SpeType};
pub use params::GameParams;
pub use sfg::solve_sfg;
pub use tolerance::Tolerances;
