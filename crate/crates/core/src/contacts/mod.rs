//! Human-contact maps: ingestion, a geometric predictor, and density-based
//! clustering down to the single cluster used for planning.

mod cluster;
mod heuristic;
mod map;

pub use cluster::{
    cluster_contacts, dbscan, largest_cluster, ContactCluster, DEFAULT_EPS_VOXELS, DEFAULT_MIN_PTS,
};
pub use heuristic::{
    predict_contacts_heuristic, run_length, thickness, ContactSource, FileContacts,
    ThicknessHeuristic,
};
pub use map::{load_contact_map, read_contact_map, ContactFile, ContactMap, DEFAULT_THRESHOLD};
