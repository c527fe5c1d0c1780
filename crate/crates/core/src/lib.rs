pub mod bayes;
pub mod causal;
pub mod channels;
pub mod error;
pub mod linalg;
pub mod properties;
pub mod random;
pub mod scenarios;
pub mod states;

pub use error::{Error, Result};
