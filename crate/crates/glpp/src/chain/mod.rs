//! The front-line Markov chain: exact one-step kernel and simulation in
//! discrete time, event-driven jump process in continuous time.

mod continuous;
mod discrete;
mod stats;

pub use continuous::{simulate_continuous, ContinuousConfig, ContinuousTrajectory};
pub use discrete::{
    estimate_speed, flip_probability, lyapunov_drift, simulate_discrete, simulate_discrete_with, step_discrete,
    successors, transition_prob, FrontChain, SimConfig, SpeedEstimate, Trajectory, TrajectoryRow, TrajectorySummary,
    BATCHES,
};
pub use stats::{Batch, Estimate};

/// β_m^δ for a continuous family.
pub fn flip_rate(m: f64, delta: f64, fam: &crate::measures::DensityFamily) -> crate::Result<f64> {
    fam.flip_rate(m, delta)
}
