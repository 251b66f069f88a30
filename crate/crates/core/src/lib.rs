#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Thickness of compact sets, the gap lemma, and pinned distance sets of
//! products of thick Cantor sets and Sierpinski carpets.

pub mod bounds;
#[cfg(feature = "cli")]
pub mod cli;
pub mod distance;
pub mod error;
pub mod fractal;
pub mod gap_lemma;
pub mod geometry;
mod index;
mod serde_ext;
pub mod thickness;

pub use error::{Error, Result};
pub use fractal::{
    build_approx, enumerate_gaps, hausdorff_dimension, product_points, FractalKind, FractalSpec, Gap,
    GapCatalog, InteriorStatus, SampleLimit, SetApprox,
};
pub use geometry::{
    box_diameter, box_distance, hulls_linked, normalize_pair, rotation_to_diagonal, AffineMap, BoxRegion,
    ConvexHullProxy, HullKind, Point,
};
pub use thickness::{
    epsilon_thickness, hyperplane_thickness_check, thickness, thickness_lambda_form, EpsilonThicknessReport,
    ThicknessReport,
};
pub use gap_lemma::{check_gap_lemma, contained_in_gap, GapLemmaVerdict};
pub use distance::{
    certify_coverage, diagonal_delta_search, g_apply, g_jacobian, g_mvt_witness, g_operator_norm,
    generate_distinct_pins, membership_via_g, pinned_distance_set, pinned_intersection_over_neighborhood,
    tree_distance_set, CoverageCertificate, DistanceMapParams, DistanceSampleSet, TreeGraph,
};
pub use bounds::{carpet_sequence_table, compute_bounds, BoundsReport, SequenceRow};
