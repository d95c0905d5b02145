pub mod analysis;
pub mod classical;
pub mod config;
pub mod error;
pub mod fock;
pub mod params;
pub mod qsd;
pub mod runner;

#[cfg(test)]
#[path = "../tests/common/oracles.rs"]
#[allow(dead_code)]
mod oracles;

pub use error::{Error, Result};
pub use params::{Frame, SystemParams};
