//! Magnitude of finite metric spaces: weightings, the similarity embedding and
//! its circumradius, identities of the centered similarity pseudoinverse,
//! subspace updates, strong positive definiteness and scale asymptotics.

pub mod asymptotics;
pub mod embedding;
pub mod error;
pub mod identities;
pub mod linalg;
pub mod metric;
pub mod similarity;
pub mod spaces;
pub mod spd;
pub mod subspace;

pub use error::{Error, Result};
pub use metric::{MetricSpace, SubsetSelector, DEFAULT_METRIC_TOLERANCE};
pub use similarity::{magnitude, Definiteness, SimilarityData};
