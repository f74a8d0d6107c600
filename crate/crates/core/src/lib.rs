pub mod cascade;
pub mod check;
pub mod cutline;
pub mod error;
pub mod gateway;
pub mod geom;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod query;
pub mod rational;
pub mod render;
pub mod scene;
pub mod visibility;
pub mod weighted;

pub use error::{Error, Result};
pub use gateway::GraphMode;
pub use geom::{Point, Polygon, RPoint, Segment};
pub use query::{preprocess, ApspPolicy, PathKind, PreprocessedIndex, QueryResult};
pub use rational::{Cost, Rational};
pub use scene::{Mode, Scene, SceneStats};
