//! Device fleet, link-quality distance, k-means clustering and head election.

mod capacity;
mod device;
mod head;
mod kmeans;

pub use capacity::{channel_capacity, distance_metric, mismatch_link};
pub use device::{
    find_device, fleet_noise, load_fleet, parse_fleet, validate_fleet, DeviceProfile,
};
pub use head::{elect_from_scores, elect_head, head_score};
pub use kmeans::{
    cluster_fleet, device_distance, fixed_clusters, fleet_diameter, kmeans_cluster, Centroid,
    Cluster, ClusteringParams, KMeansResult,
};
