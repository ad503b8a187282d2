//! N-player kidney exchange games on partitioned compatibility graphs.

pub mod engine;
pub mod enumeration;
pub mod equilibrium;
pub mod experiment;
pub mod error;
pub mod game;
pub mod generator;
pub mod graph;
pub mod ia;
pub mod io;
pub mod matching;
pub mod rational;
pub mod weights;

pub use error::{KegError, Result};
pub use graph::{CompatibilityGraph, Edge, EdgeId, EdgeKind, PlayerId, VertexId};
pub use matching::{residual_international, restrict, Matching, Scope, StrategyProfile};
pub use rational::Weight;
pub use weights::{Mode, WeightSystem};
pub use io::{Instance, InstanceMeta};
