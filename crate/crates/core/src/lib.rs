pub mod chain;
pub mod cli;
pub mod config;
pub mod coop;
pub mod error;
pub mod geom;
pub mod ik;
pub mod selfcheck;
pub mod sim;

pub use error::{ConfigError, Error, Result};
