pub mod auth;
pub mod bench;
pub mod detect;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod par;
pub mod region;
pub mod store;

pub use error::{Error, Result};
