//! End-to-end composition: standardize, over-cluster, then merge.

use crate::data::{standardize, DataMatrix};
use crate::error::{Error, Result};
use crate::initcluster::{
    cut, default_k_init, hierarchical, kmeans, Linkage, Partition, KMEANS_MAX_ITER,
};
use crate::merge::{self, MergeConfig, MergeTrace};
use crate::neighbors::pairwise_distances;

#[derive(Debug, Clone)]
pub enum InitMethod {
    Ward,
    Complete,
    Single,
    Kmeans,
    /// A caller-supplied initial partition; `k_init` is taken from it.
    External(Partition),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub standardize: bool,
    pub init: InitMethod,
    /// Initial cluster count; `None` means ⌈10·ln n⌉. Ignored for an
    /// external initial partition.
    pub k_init: Option<usize>,
    pub merge: MergeConfig,
    /// Seed for randomized initializers (k-means). Deterministic methods
    /// ignore it.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            standardize: true,
            init: InitMethod::Ward,
            k_init: None,
            merge: MergeConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub k_init: usize,
    pub initial: Partition,
    pub trace: MergeTrace,
}

impl PipelineResult {
    pub fn final_partition(&self) -> &Partition {
        &self.trace.partition
    }
}

/// Runs the full procedure on raw features and returns the initial
/// partition, the merge trace, and the final partition.
pub fn cluster(matrix: &DataMatrix, config: &PipelineConfig) -> Result<PipelineResult> {
    let n = matrix.n();
    if n < 2 {
        return Err(Error::invalid("clustering needs at least 2 rows"));
    }

    let standardized;
    let features = if config.standardize {
        standardized = standardize(matrix)?;
        &standardized.matrix
    } else {
        matrix
    };
    let dm = pairwise_distances(features);

    let (initial, k_init) = match &config.init {
        InitMethod::External(partition) => {
            if partition.n() != n {
                return Err(Error::invalid(format!(
                    "external partition covers {} rows, data has {n}",
                    partition.n()
                )));
            }
            (partition.clone(), partition.k())
        }
        method => {
            let k_init = config.k_init.unwrap_or_else(|| default_k_init(n));
            if k_init == 0 || k_init > n {
                return Err(Error::invalid(format!("k_init = {k_init} outside [1, {n}]")));
            }
            let partition = match method {
                InitMethod::Ward => cut(&hierarchical(&dm, Linkage::Ward), k_init)?,
                InitMethod::Complete => cut(&hierarchical(&dm, Linkage::Complete), k_init)?,
                InitMethod::Single => cut(&hierarchical(&dm, Linkage::Single), k_init)?,
                InitMethod::Kmeans => kmeans(features, k_init, config.seed, KMEANS_MAX_ITER)?,
                InitMethod::External(_) => unreachable!("handled above"),
            };
            (partition, k_init)
        }
    };

    let trace = merge::run(&dm, initial.clone(), &config.merge)?;
    Ok(PipelineResult {
        k_init,
        initial,
        trace,
    })
}
