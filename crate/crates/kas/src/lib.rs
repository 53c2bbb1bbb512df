//! Command line, interchange files and service backends for the
//! knowledge-aware summarization pipeline in `kas-core`.

pub mod config;
pub mod error;
pub mod files;
pub mod http;
pub mod pipeline;
pub mod qmsum;
pub mod vecstore;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use pipeline::Pipeline;
