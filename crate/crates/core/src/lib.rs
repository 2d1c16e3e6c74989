pub mod error;
pub mod expcli;
pub mod field;
pub mod level;
pub mod linop;
pub mod solver;
pub mod tv;

pub use error::{Error, Result};
