pub mod config;
pub mod corpus;
pub mod diversity;
pub mod embeddings;
pub mod error;
pub mod features;
pub mod learning;
pub mod neighbors;
pub mod objects;
pub mod pipeline;
pub mod pixels;
pub mod plots;
pub mod synthetic;

pub use error::{Error, Result};
