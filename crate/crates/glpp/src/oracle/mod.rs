//! Brute-force references that share no code with the exact module: the
//! truncated one-step kernel of the chain, its stationary vector by power
//! iteration, and distances between laws.

mod matrix;
mod metrics;

pub use matrix::{power_iterate_stationary, power_iterate_stationary_with, truncated_transition_matrix, ClosurePolicy, OracleStationary, TransitionMatrix, MAX_LEAK};
pub use metrics::{chi_square_p_value, ks_statistic, tv_distance, tv_distance_keyed};
