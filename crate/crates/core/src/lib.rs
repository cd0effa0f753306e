//! Discrete-event simulator for keyword search over unstructured peer-to-peer overlays.

pub mod baselines;
pub mod config;
pub mod error;
pub mod load;
pub mod metrics;
pub mod net;
pub mod qtable;
pub mod routing;
pub mod sim;

pub use config::{Algo, ApsMode, ApsParams, LoadParams, RewardParams, SimConfig, Thresholds};
pub use error::{Error, Result};
pub use load::{LoadReport, LoadSnapshot, LoadTracker};
pub use metrics::{MetricsRecord, MetricsSeries};
pub use net::{DataObject, Network, ObjectId, Peer, PeerClass, PeerId};
pub use qtable::{
    Keyword, NeighbourQTable, Outcome, PeerScores, PeerTables, PowerPeerQTable, QValue, QueryQTable, TableKind,
};
pub use routing::{HitReport, RouteKind, RoutingAction, TerminateReason, WalkerMessage};
pub use sim::{run_experiment, run_experiment_with, IssueOutcome, RunReport, Simulation, WalkerOutcomes};
