pub mod cache;
pub mod cli;
pub mod clock;
pub mod cluster;
pub mod config;
pub mod corpus;
pub mod domain;
pub mod embed;
pub mod engine;
mod error;
pub mod eval;
pub mod index;
pub mod query;
pub mod service;
pub mod summarize;
pub mod themes;

pub use error::{Error, Result};
