//! Configurations, the gradient field and trajectory integration.

mod configuration;
mod field;
mod integrator;

pub use configuration::{check_in_configuration_space, metrics, Configuration, Metrics};
pub use field::{
    field_jacobian_apply, finite_difference_gradient, potential, restricted_field, subsystem_field, vector_field,
};
pub use integrator::{simulate, IntegratorParams, IntegratorStats, Snapshot, StopReason, Trajectory};
