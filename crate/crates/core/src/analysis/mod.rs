//! Diagnostics built on simulated or synthetic configurations: equilibrium
//! checks, cluster tracking and field-norm estimates.

mod clustering;
mod dissipation;
mod equilibrium;

pub use clustering::{
    cluster_diagnostics, lemma4_check, pi_hierarchy, pi_table, self_clustering_detect, ClusterDiagnostics, GrowthCheck,
    SelfClustering, RUNNING_MAX_TOL,
};
pub use dissipation::{
    lemma8_distance, mu_estimate, pin_edge, shortest_edge_estimate, small_d_blowup_check, BlowupReport,
    FieldNormEstimate, PinnedDistance,
};
pub use equilibrium::{collision_bound, is_equilibrium, EquilibriumReport, BOUND_TOLERANCE};
