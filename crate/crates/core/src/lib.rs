//! Clustering of network-constrained vehicle trajectories.
//!
//! Trajectories are treated as bags of road segments. Each trajectory gets a
//! sparse TF-IDF style profile where the term frequency is the share of the
//! trajectory's travelled length spent on a segment. Profiles are compared by
//! cosine similarity, the positive similarities form an undirected graph, and
//! that graph is clustered by recursive modularity optimisation with a
//! randomised null-model check at each split. The result is a hierarchy of
//! nested clusters that can be flattened level by level or greedily.
//!
//! Agglomerative clustering baselines, overlap / inertia / ARI scoring and a
//! planted-corridor synthetic generator are included for comparisons.

pub mod error;
pub mod evaluation;
pub mod geojson;
pub mod hac;
pub mod modularity;
pub mod network;
pub mod partition;
pub mod seed;
pub mod similarity;
pub mod synth;
pub mod trajectory;
pub mod weighting;

pub use error::{Error, Result};
pub use evaluation::EvaluationReport;
pub use hac::{Dendrogram, Linkage};
pub use modularity::{ClusterHierarchy, HierarchyParams};
pub use network::RoadNetwork;
pub use partition::Partition;
pub use similarity::{SimilarityGraph, SimilarityScheme};
pub use trajectory::{Trajectory, TrajectorySet};
pub use weighting::{CorpusStats, WeightVector, WeightingScheme};
