//! Clustering by over-partitioning and outlier-guided merging.
//!
//! The procedure first over-clusters the data with a classical method
//! (hierarchical agglomeration or k-means, with ⌈10·ln n⌉ initial
//! clusters by default), then repeatedly tries to merge the two clusters
//! whose closest points are nearest. A merge happens only if each side's
//! frontier point looks like an inlier of the other cluster under a
//! local outlier factor test, evaluated over a range of neighborhood
//! sizes and compared against a critical value derived from the score
//! spread. The two-sided test stops the chain merges that plague plain
//! single linkage while still letting elongated clusters reunite.
//!
//! ```
//! use iclust::{cluster, DataMatrix, PipelineConfig};
//!
//! let rows: Vec<Vec<f64>> = (0..12)
//!     .map(|i| {
//!         let offset = if i < 6 { 0.0 } else { 8.0 };
//!         vec![offset + (i % 3) as f64 * 0.1, offset + (i % 2) as f64 * 0.1]
//!     })
//!     .collect();
//! let matrix = DataMatrix::from_rows(rows).unwrap();
//! let config = PipelineConfig {
//!     standardize: false,
//!     k_init: Some(4),
//!     ..Default::default()
//! };
//! let result = cluster(&matrix, &config).unwrap();
//! assert_eq!(result.final_partition().k(), 2);
//! ```

pub mod data;
pub mod error;
pub mod eval;
pub mod initcluster;
pub mod lof;
pub mod merge;
pub mod neighbors;
pub mod pipeline;

pub use data::{
    derive_seed, load_csv, sample_imbalanced, standardize, DataMatrix, LabeledDataset,
    SamplingSpec, Standardization, UNLABELED,
};
pub use error::{Error, Result};
pub use eval::{
    evaluate, evaluate_with_baselines, extreme_baselines, ContingencyTable, EvaluationReport,
    MetricSet, VMeasure,
};
pub use initcluster::{
    cut, default_k_init, hierarchical, kmeans, kmeans_detailed, quarter_k_init,
    read_partition_csv, scaled_log_k_init, write_partition_csv, Dendrogram, KmeansRun, Linkage,
    MergeStep, Partition, KMEANS_MAX_ITER,
};
pub use lof::{lof_profile, lof_scores, lrd, LofProfile};
pub use merge::{
    closest_pair, critical_value, merge_test, ClosestPair, CvStrategy, MergeConfig, MergeEvent,
    MergeTest, MergeTrace,
};
pub use neighbors::{neighborhood, pairwise_distances, DistanceMatrix, Neighborhood};
pub use pipeline::{cluster, InitMethod, PipelineConfig, PipelineResult};
