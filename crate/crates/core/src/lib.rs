pub mod adversary;
pub mod auth;
pub mod crypto;
pub mod elections;
pub mod predictions;
pub mod protocol;
pub mod sim;
pub mod types;
pub mod unauth;
pub mod wire;

pub use types::{ProcessId, Value};
