pub mod cli;
pub mod error;
pub mod halfline;
pub mod pencil;
pub mod poly;
pub mod polygon;
pub mod quad;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
