//! Temporal hierarchical clustering: L∞ ultrametric fitting, per-level
//! clustering of a sequence of point sets with Hausdorff correspondences,
//! label tracking through a minimum flow, the 3-coloring reduction and a
//! flocking data generator.

pub mod error;
pub mod hardness;
pub mod labeling;
pub mod metric;
pub mod simgen;
pub mod temporal;
pub mod ultrametric;

pub use error::{Error, Result};
pub use metric::{
    hausdorff_distance, linf_distance, perturb, restrict, Distances, MetricSpace, Points,
    TemporalSampling, FORMAT_VERSION, TOL,
};
pub use ultrametric::{FitScheme, PseudoUltrametric};
