//! Clustered federated training. The server ships the global angles to
//! every cluster over a noisy link, clusters train their partitioned models
//! on local shards, and the uploads are averaged with weights proportional
//! to each cluster's mean quantum volume.

mod aggregate;
mod metrics;
mod run;
mod transmit;

pub use aggregate::{fedavg, normalize_weights};
pub use metrics::{classification_metrics, evaluate, Metrics};
pub use run::{
    history_csv, prepare_clusters, run_federation, ClusterRecord, ClusterSetup, FederationConfig,
    FederationOutcome, RoundRecord, SelectionMethod,
};
pub use transmit::{transmit_params, wrap_angle, Transmitted};
