//! Correlation networks: metric distances, minimum spanning trees, tree
//! topology and community structure.

mod distance;
mod louvain;
mod mst;
mod topology;
mod track;

pub use distance::{distance_matrix, DistanceMatrix};
pub use louvain::{louvain, louvain_weights, modularity, LouvainOutcome, Partition};
pub use mst::{minimum_spanning_tree, Edge, SpanningTree};
pub use topology::{
    degree_distribution, fit_power_law, mean_path_length, mean_weighted_path_length, powerlaw_fit,
    DegreeDistribution, PowerLawFit,
};
pub use track::{cluster_track, CoMembership};
