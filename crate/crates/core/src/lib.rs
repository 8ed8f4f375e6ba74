pub mod basis;
pub mod besselcf;
pub mod error;
pub mod experiment;
pub mod ext;
pub mod fracdim;
pub mod oracle;
pub mod sampler;
pub mod sequences;

pub use error::{Error, Result};
