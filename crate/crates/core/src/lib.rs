//! Surveillance of dynamic networks through a degree-corrected stochastic
//! block model: simulation, estimation, community recovery, control charts
//! and run-length experiments.

pub mod charts;
pub mod community;
pub mod dcsbm;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod linalg;
pub mod paramfile;
pub mod render;
pub mod sampling;
pub mod surveillance;

pub use charts::{ChartKind, ControlChart, LimitStyle, PhaseIEstimate, RunLength};
pub use dcsbm::{ChangeSpec, DcsbmParams, MleFit, ThetaRedraw};
pub use error::{Error, Result};
pub use graph::{CommunityAssignment, DynamicNetwork, WeightedGraph};
pub use linalg::Matrix;
pub use surveillance::{ChartBank, MonitorConfig, SdMode, StatVector, Statistic};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
