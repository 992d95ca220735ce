//! Experiments that check how highway graphs scale: highway density in
//! balls and shells, normalization constants, distance to the highway,
//! contact statistics, diameter, dimensionality and routing sweeps.
//!
//! Logarithms are natural throughout; every report records `log_base=e`.

pub mod diameter;
pub mod dimension;
pub mod experiments;
pub mod highway_stats;
pub mod report;
pub mod stats;

pub use diameter::{estimate_diameter, DiameterMode, DEFAULT_EXACT_CAP};
pub use dimension::{estimate_alpha, AlphaGrid, DimEstimate, NodeAlpha};
pub use experiments::{
    far_pairs, routing_scaling, sweep_clustering_exponent, FarPairs, KChoice, ScalingConfig,
};
pub use highway_stats::{
    ball_highway_stats, fresh_contact_probability, highway_distance_stats, highway_scale,
    improvement_probability, shell_highway_stats, z_stats,
};
pub use report::StatReport;
