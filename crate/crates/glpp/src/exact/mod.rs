//! Closed-form stationary laws and speeds of integrable families.

mod closed;
mod continuous;
mod kernel;
mod partition;
mod weights;

pub use closed::{geometric_closed_form, lemma_comb, lemma_comb_partial, lemma_sumcomb, sumcomb_direct};
pub use continuous::{continuous_density_g, continuous_z, continuous_z_monte_carlo, ContinuousLaw};
pub use kernel::TransferKernel;
pub use partition::{
    partition_z, speed_exact, stationary_law, stationary_law_alpha, BridgeProbability, ExactLaw, SpeedReport,
    MAX_EXACT_L,
};
pub use weights::{ln_pair_sum, max_pair_identity, weight_w, WForm};
