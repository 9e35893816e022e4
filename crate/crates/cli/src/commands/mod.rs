pub mod fuse;
pub mod graph;
pub mod metrics;
pub mod toytask;
