//! The map `g_{x,t}`, pinned and tree distance sets of products, and
//! finite-resolution coverage certificates.

pub mod coverage;
pub mod linking;
pub mod map;
pub mod sets;
pub mod tree;

pub use coverage::{certify_coverage, pinned_intersection_over_neighborhood, CoverageCertificate, CoverageRegion};
pub use map::{g_apply, g_jacobian, g_mvt_witness, g_operator_norm, DistanceMapParams};
pub use sets::{
    diagonal_delta_search, generate_distinct_pins, membership_via_g, pinned_distance_set, DistanceSampleSet,
    DistanceValues, Provenance,
};
pub use tree::{tree_distance_set, DistinctMode, TreeGraph};
