pub mod cli;
pub mod config;
pub mod error;
pub mod finite;
pub mod mat2core;
pub mod model;
pub mod periodic;
pub mod random;
pub mod selftest;
pub mod spectrum;
mod numeric;
pub mod transfer;

pub use error::{Error, Result};
