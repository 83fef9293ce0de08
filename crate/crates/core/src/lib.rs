//! Irregular edge weightings of dense regular graphs.

pub mod codec;
pub mod error;
pub mod generate;
pub mod graph;
pub mod kkp;
pub mod lab;
pub mod labeling;
pub mod params;
pub mod partition;
pub mod pipeline;
pub mod report;
pub mod seed;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use graph::{Graph, Vertex};
