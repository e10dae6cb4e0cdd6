//! Subclustering of weight vectors and action-unit specific responses.

mod au;
mod cluster;

pub use au::{
    au_approx_response, au_intensity, load_au_annotations, squared_error, threshold_weights, AUEvent,
    AuResult,
};
pub use cluster::{cut_tree, ward_cluster, ward_linkage, ClusterResult, Merge};

/// Default number of clusters per label group.
pub const DEFAULT_K: usize = 3;
/// Default fraction of weights kept by thresholding.
pub const DEFAULT_KEEP_FRACTION: f64 = 0.25;
