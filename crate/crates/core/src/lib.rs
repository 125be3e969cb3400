pub mod agreement;
pub mod centrality;
pub mod commands;
pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod null_model;
pub mod report;
pub mod rng;
pub mod synthetic;
pub mod taxonomy;
pub mod temporal;
