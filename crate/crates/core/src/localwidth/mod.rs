//! A concrete local-width model: a confluent rewriting system on local
//! update words, windows of derivative steps, interface-anonymous
//! profiles, and the counting bounds built on them.

mod bounds;
mod model;
mod window;

pub use bounds::{
    circuit_rank_bound, coordinate_budget, count_kappa_step_sequences, count_profiles, profile_subspace_dim,
    t_step, width_for,
};
pub use model::LocalModel;
pub use window::{profile_of, realized_profiles, saturation_kappa, Profile, ProfileInstantiation, Step, Window};

/// Default gate constant in the circuit bound.
pub const DEFAULT_C_GATE: u32 = 2;
